use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_pshlab"));
    c.env_remove("PSHLAB_THREADS");
    c
}

fn scenarios() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn lct_config() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(d.path(), "lct.json", r#"{"generators": [[2, 0], [0, 3]]}"#);
    let out = d.path().join("r.json");
    let o = bin().args(["lct", "--config"]).arg(&cfg).arg("--out").arg(&out).output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains("\"5/6\""));
    assert!(text.contains("0.83333333333333337"));
}

#[test]
fn usage_and_parse_errors_exit_one() {
    let d = tempfile::tempdir().unwrap();
    let bad = write(d.path(), "bad.json", "{\"generators\": [[2, 0],, ]}");
    let o = bin().args(["lct", "--config"]).arg(&bad).output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 1"));
    assert_eq!(bin().arg("fourier").output().unwrap().status.code(), Some(1));
    assert_eq!(bin().args(["run", "/nonexistent.json"]).output().unwrap().status.code(), Some(1));
    let unknown = write(d.path(), "u.json", r#"{"tasks": [{"op": "fourier"}]}"#);
    assert_eq!(bin().arg("run").arg(&unknown).output().unwrap().status.code(), Some(1));
    let help = bin().arg("--help").output().unwrap();
    assert_eq!(help.status.code(), Some(0));
    assert!(stdout(&help).contains("catalog"));
}

#[test]
fn failed_task_exits_two() {
    let d = tempfile::tempdir().unwrap();
    let s = write(
        d.path(),
        "s.json",
        r#"{"tasks": [{"op": "lct", "generators": [[1, 0], [0]]}, {"op": "lct", "generators": [[1, 1]]}]}"#,
    );
    let o = bin().arg("run").arg(&s).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let text = stdout(&o);
    assert!(text.contains("\"failed\""));
    assert!(text.contains("\"ok\""));
}

#[test]
fn thread_count_does_not_change_reports() {
    let d = tempfile::tempdir().unwrap();
    let mut texts = Vec::new();
    for n in ["1", "3"] {
        let (json, csv) = (d.path().join(format!("r{n}.json")), d.path().join(format!("r{n}.csv")));
        let o = bin()
            .env("PSHLAB_THREADS", n)
            .arg("run")
            .arg(scenarios().join("quick.json"))
            .arg("--out")
            .arg(&json)
            .arg("--csv")
            .arg(&csv)
            .output()
            .unwrap();
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        texts.push((std::fs::read(&json).unwrap(), std::fs::read(&csv).unwrap()));
    }
    assert!(texts[0] == texts[1]);
    let csv = String::from_utf8(texts[0].1.clone()).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "task,op,class,value,uncertainty,re_1,im_1,re_2,im_2");
}

#[test]
fn scan_writes_cloud_csv() {
    let fam = scenarios().join("diagonal_family.json");
    let o = bin().args(["scan", "--kind", "X", "--c", "1", "--family"]).arg(&fam).arg("--grid=-0.5:0.5:3,-0.5:0.5:3").output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "re_1,im_1,re_2,im_2,value,uncertainty,class");
    assert_eq!(&lines[1..], ["-0.5,0,-0.5,0,1,0,member", "0,0,0,0,1,0,member", "0.5,0,0.5,0,1,0,member"]);
}

#[test]
fn bergman_kernel_csv() {
    let d = tempfile::tempdir().unwrap();
    let fam = write(
        d.path(),
        "f.json",
        r#"{"expr": {"const": {"dim": 2, "value": 0}}, "domain": {"center": [[0, 0], [0, 0]], "radii": [1, 1]}, "n_z": 1}"#,
    );
    let o = bin().args(["bergman", "--c", "1", "--cap", "8", "--family"]).arg(&fam).arg("--grid=0:0.5:2,0").output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "re_z,im_z,re_w,im_w,K,logK");
    assert_eq!(lines.len(), 3);
    // unit disc kernel at the origin is 1/pi
    let k0: f64 = lines[1].split(',').nth(4).unwrap().parse().unwrap();
    assert!((k0 - 1.0 / std::f64::consts::PI).abs() < 1e-6, "{k0}");
}

#[test]
fn catalog_wang_csv() {
    let o = bin().args(["catalog", "--example", "wang", "--depth", "3"]).output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "w,nu,uncertainty,method,member");
    assert_eq!(lines.len(), 5);
    // members accumulate at w = 0, which is not a member
    assert_eq!(lines[1], "0,0,0,exact-multiplicity,false");
    assert!(lines[2..].iter().all(|l| l.ends_with(",true")));
}

#[test]
fn stability_nondeg_json() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write(
        d.path(),
        "i.json",
        r#"{"integrand": {"f": [{"dim": 2, "terms": [{"exp": [0, 0], "re": 1}]}],
                          "g": [{"dim": 2, "terms": [{"exp": [1, 0], "re": 1}]}], "eps": "2", "delta": "1/2"}}"#,
    );
    let o = bin().args(["stability", "--check", "nondeg", "--integrand"]).arg(&cfg).output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v.is_object());
}
