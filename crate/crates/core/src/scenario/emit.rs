use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use serde_json::ser::{Formatter, PrettyFormatter};

use super::task::{KernelRow, TaskOutput};
use super::Report;
use crate::cloud::{CloudPoint, LevelSetCloud};
use crate::counterexamples::CatalogRow;
use crate::error::{Error, Result};
use crate::Complex64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// `%.17g`: seventeen significant digits, trailing zeros dropped.
/// Non-finite values print as `inf`, `-inf`, `nan`.
pub fn fmt17(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0" } else { "0" }.into();
    }
    let sci = format!("{x:.16e}");
    let (mant, exp) = sci.split_once('e').expect("exponent");
    let e: i32 = exp.parse().expect("integer exponent");
    if (-4..17).contains(&e) {
        let s = format!("{:.*}", (16 - e) as usize, x);
        trim(&s).to_string()
    } else {
        format!("{}e{}", trim(mant), e)
    }
}

fn trim(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Pretty JSON with floats written by [`fmt17`].
struct Fmt17(PrettyFormatter<'static>);

impl Formatter for Fmt17 {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        w.write_all(fmt17(v).as_bytes())
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Any serializable value as pretty JSON with 17-digit floats.
pub fn to_json<T: Serialize>(v: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Fmt17(PrettyFormatter::new()));
    v.serialize(&mut ser).expect("in-memory serialization");
    out.push(b'\n');
    String::from_utf8(out).expect("utf-8 json")
}

fn coords(p: &[Complex64]) -> Vec<String> {
    p.iter().flat_map(|z| [fmt17(z.re), fmt17(z.im)]).collect()
}

fn coord_header(dim: usize) -> Vec<String> {
    (1..=dim).flat_map(|i| [format!("re_{i}"), format!("im_{i}")]).collect()
}

/// Cloud rows in grid order: members, then borderline and unresolved
/// points. Columns are the coordinates, `value`, `uncertainty`, `class`.
fn cloud_rows(c: &LevelSetCloud) -> Vec<(&CloudPoint, &'static str)> {
    let mut rows: Vec<(&CloudPoint, &'static str)> = c
        .points
        .iter()
        .map(|p| (p, if c.borderline.iter().any(|b| b.point == p.point) { "borderline" } else { "member" }))
        .collect();
    rows.extend(c.borderline.iter().filter(|b| !c.contains(&b.point)).map(|p| (p, "borderline")));
    rows.extend(c.unresolved.iter().map(|p| (p, "unresolved")));
    rows
}

fn cloud_dim(c: &LevelSetCloud) -> usize {
    c.grid.dim().or_else(|| cloud_rows(c).first().map(|(p, _)| p.point.len())).unwrap_or(0)
}

pub fn cloud_csv(c: &LevelSetCloud) -> String {
    let dim = cloud_dim(c);
    let mut h = coord_header(dim);
    h.extend(["value", "uncertainty", "class"].map(String::from));
    let mut out = h.join(",") + "\n";
    for (p, class) in cloud_rows(c) {
        let mut r = coords(&p.point);
        r.extend([fmt17(p.value), fmt17(p.uncertainty), class.to_string()]);
        out += &(r.join(",") + "\n");
    }
    out
}

/// Columns `re z, im z, re w, im w, K, logK` (one pair per coordinate).
pub fn kernel_csv(rows: &[KernelRow]) -> String {
    let (nz, nw) = rows.first().map(|r| (r.z.len(), r.w.len())).unwrap_or((1, 1));
    let names = |v: &str, n: usize| -> Vec<String> {
        if n == 1 {
            vec![format!("re_{v}"), format!("im_{v}")]
        } else {
            (1..=n).flat_map(|i| [format!("re_{v}{i}"), format!("im_{v}{i}")]).collect()
        }
    };
    let mut h = names("z", nz);
    h.extend(names("w", nw));
    h.extend(["K", "logK"].map(String::from));
    let mut out = h.join(",") + "\n";
    for r in rows {
        let mut c = coords(&r.z);
        c.extend(coords(&r.w));
        c.extend([fmt17(r.k), fmt17(r.log_k)]);
        out += &(c.join(",") + "\n");
    }
    out
}

/// Columns `w, nu, uncertainty, method, member`.
pub fn catalog_csv(rows: &[CatalogRow]) -> String {
    let mut out = String::from("w,nu,uncertainty,method,member\n");
    for r in rows {
        let m = serde_json::to_value(r.estimate.method).expect("method");
        out += &format!(
            "{},{},{},{},{}\n",
            fmt17(r.w),
            fmt17(r.estimate.value),
            fmt17(r.estimate.uncertainty),
            m.as_str().unwrap_or_default(),
            r.member
        );
    }
    out
}

/// The report's point data as one table: estimates, cloud points, kernel
/// values and catalog samples. Fixed columns
/// `task, op, class, value, uncertainty` followed by coordinate pairs up to
/// the largest dimension in the report.
pub fn to_csv(report: &Report) -> String {
    let mut rows: Vec<(usize, &'static str, f64, f64, Vec<Complex64>)> = Vec::new();
    for (i, t) in report.tasks.iter().enumerate() {
        let Some(res) = &t.result else { continue };
        match res {
            TaskOutput::Estimate { point, estimate } => {
                rows.push((i, "estimate", estimate.value, estimate.uncertainty, point.clone()))
            }
            TaskOutput::Cloud(c) | TaskOutput::Probe { cloud: c, .. } => {
                for (p, class) in cloud_rows(c) {
                    rows.push((i, class, p.value, p.uncertainty, p.point.clone()));
                }
            }
            TaskOutput::Kernel(ks) => {
                for k in ks {
                    rows.push((i, "log_kernel", k.log_k, 0.0, [k.z.clone(), k.w.clone()].concat()));
                }
            }
            TaskOutput::Wang(cat) => {
                for r in cat {
                    rows.push((i, if r.member { "member" } else { "outside" }, r.estimate.value, r.estimate.uncertainty, vec![
                        Complex64::new(0.0, 0.0),
                        Complex64::new(r.w, 0.0),
                    ]));
                }
            }
            TaskOutput::Li(rep) => {
                for r in &rep.samples {
                    rows.push((i, if r.member { "member" } else { "outside" }, r.estimate.value, r.estimate.uncertainty, vec![
                        Complex64::new(0.0, 0.0),
                        Complex64::new(r.w, 0.0),
                    ]));
                }
            }
            _ => {}
        }
    }
    let dim = rows.iter().map(|r| r.4.len()).max().unwrap_or(0);
    let mut h: Vec<String> = ["task", "op", "class", "value", "uncertainty"].map(String::from).to_vec();
    h.extend(coord_header(dim));
    let mut out = h.join(",") + "\n";
    for (i, class, v, u, p) in rows {
        let t = &report.tasks[i];
        let mut r = vec![csv_field(&t.name), t.op.clone(), class.to_string(), fmt17(v), fmt17(u)];
        let mut c = coords(&p);
        c.resize(2 * dim, String::new());
        r.extend(c);
        out += &(r.join(",") + "\n");
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn emit(report: &Report, format: Format, path: &str) -> Result<()> {
    let text = match format {
        Format::Json => to_json(report),
        Format::Csv => to_csv(report),
    };
    std::fs::write(path, text).map_err(|e| Error::Io { path: path.into(), message: e.to_string() })
}
