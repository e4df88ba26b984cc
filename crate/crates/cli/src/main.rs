mod grid;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pshlab::scenario::{self, catalog_csv, cloud_csv, kernel_csv, to_csv, to_json, Report, StabilityOutput, TaskOutput};
use serde_json::{json, Map, Value};

#[derive(Parser)]
#[command(name = "pshlab", version, about = "Singularity invariants of plurisubharmonic functions")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct Common {
    /// Scenario seed; every estimator seed is derived from it.
    #[arg(long)]
    seed: Option<u64>,
    /// Bisection tolerance for threshold estimates.
    #[arg(long)]
    tol: Option<f64>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    E,
    X,
    F,
    Y,
}

#[derive(Clone, Copy, ValueEnum)]
enum CheckArg {
    Nondeg,
    Hyp,
    Family,
    Siu,
    Nb,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExampleArg {
    Wang,
    Li,
}

#[derive(Subcommand)]
enum Cmd {
    /// Lelong number at a point. The config holds `fn`, `point` and optional `radial`.
    Lelong {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Exact threshold of a monomial ideal. The config holds `generators`.
    Lct {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Complex singularity exponent. The config holds `fn`, `point` and optional `cse`.
    Cse {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Fiber thresholds over sampled parameters. The config holds `fn`, `n_z`, `w_samples`.
    RestrictionScan {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Level-set scan; writes the cloud as CSV.
    Scan {
        #[arg(long, value_enum, ignore_case = true)]
        kind: KindArg,
        #[arg(long)]
        c: f64,
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        grid: Option<String>,
        /// Estimator parameters (JSON).
        #[arg(long)]
        params: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Scan and fit polynomials vanishing on the cloud; writes the fit as JSON.
    Probe {
        #[arg(long, value_enum, ignore_case = true)]
        kind: KindArg,
        #[arg(long)]
        c: f64,
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        grid: Option<String>,
        #[arg(long)]
        params: Option<PathBuf>,
        /// Largest degree tried.
        #[arg(long)]
        cap: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Diagonal fiber Bergman kernel on a grid of (z, w); writes CSV.
    Bergman {
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        c: f64,
        /// Total degree cap of the polynomial basis.
        #[arg(long)]
        cap: Option<usize>,
        #[arg(long)]
        grid: String,
        #[command(flatten)]
        common: Common,
    },
    /// Stability checks on a rational power integrand. The config holds
    /// `integrand` and the parameters of the check.
    Stability {
        #[arg(long)]
        integrand: PathBuf,
        #[arg(long, value_enum)]
        check: CheckArg,
        #[command(flatten)]
        common: Common,
    },
    /// Catalog counterexamples; CSV columns w, nu, uncertainty, method, member.
    Catalog {
        #[arg(long, value_enum)]
        example: ExampleArg,
        #[arg(long)]
        c: Option<f64>,
        /// Cantor depth, or the number of terms for `wang`.
        #[arg(long)]
        depth: Option<usize>,
        /// Real parameter values (the `li` example only).
        #[arg(long)]
        grid: Option<String>,
        /// `csv` or `json`; by default taken from the output extension.
        #[arg(long)]
        format: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Runs a scenario file.
    Run {
        scenario: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// JSON report; overrides the scenario output path.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Flattened CSV report.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Record runtimes in the report.
        #[arg(long)]
        timings: bool,
    },
}

/// Usage, parse and I/O failures.
struct Fatal(String);

impl From<pshlab::Error> for Fatal {
    fn from(e: pshlab::Error) -> Self {
        Fatal(e.to_string())
    }
}

fn read_json(path: &Path) -> Result<Value, Fatal> {
    let text = std::fs::read_to_string(path).map_err(|e| Fatal(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Fatal(format!("{}: parse error at line {}, column {}: {e}", path.display(), e.line(), e.column())))
}

fn object(v: Value, what: &Path) -> Result<Map<String, Value>, Fatal> {
    match v {
        Value::Object(m) => Ok(m),
        _ => Err(Fatal(format!("{}: expected a JSON object", what.display()))),
    }
}

fn write_out(out: &Option<PathBuf>, text: &str) -> Result<(), Fatal> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| Fatal(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Runs one task through the scenario machinery.
fn run_task(task: Map<String, Value>, common: &Common) -> Result<Report, Fatal> {
    let mut s = json!({ "seed": common.seed.unwrap_or(0), "tasks": [Value::Object(task)] });
    if let Some(t) = common.tol {
        s["tol"] = json!(t);
    }
    let sc = scenario::parse_scenario(&s.to_string())?;
    let report = scenario::run(&sc);
    for t in &report.tasks {
        if let Some(e) = &t.error {
            eprintln!("{}: {e}", t.name);
        }
    }
    Ok(report)
}

fn kind_str(k: KindArg) -> &'static str {
    match k {
        KindArg::E => "E",
        KindArg::X => "X",
        KindArg::F => "F",
        KindArg::Y => "Y",
    }
}

fn scan_task(
    op: &str,
    kind: KindArg,
    c: f64,
    family: &Path,
    grid: &Option<String>,
    params: &Option<PathBuf>,
) -> Result<Map<String, Value>, Fatal> {
    let mut t = Map::new();
    t.insert("op".into(), json!(op));
    t.insert("kind".into(), json!(kind_str(kind)));
    t.insert("c".into(), json!(c));
    t.insert("family".into(), read_json(family)?);
    if let Some(g) = grid {
        t.insert("grid".into(), grid::grid_value(g).map_err(Fatal)?);
    }
    if let Some(p) = params {
        t.insert("params".into(), read_json(p)?);
    }
    Ok(t)
}

fn result(report: &Report) -> Option<&TaskOutput> {
    report.tasks.first().and_then(|t| t.result.as_ref())
}

fn dispatch(cmd: Cmd) -> Result<i32, Fatal> {
    let (report, text, out) = match cmd {
        Cmd::Lelong { config, common } => single("lelong", &config, common)?,
        Cmd::Lct { config, common } => single("lct", &config, common)?,
        Cmd::Cse { config, common } => single("cse", &config, common)?,
        Cmd::RestrictionScan { config, common } => single("restriction-scan", &config, common)?,
        Cmd::Scan { kind, c, family, grid, params, common } => {
            let r = run_task(scan_task("scan", kind, c, &family, &grid, &params)?, &common)?;
            let text = match result(&r) {
                Some(TaskOutput::Cloud(cl)) => cloud_csv(cl),
                _ => String::new(),
            };
            (r, text, common.out)
        }
        Cmd::Probe { kind, c, family, grid, params, cap, common } => {
            let mut t = scan_task("probe", kind, c, &family, &grid, &params)?;
            if let Some(cap) = cap {
                t.insert("probe".into(), json!({ "cap": cap }));
            }
            let r = run_task(t, &common)?;
            let text = match result(&r) {
                Some(TaskOutput::Probe { probe, .. }) => to_json(probe),
                _ => to_json(&r),
            };
            (r, text, common.out)
        }
        Cmd::Bergman { family, c, cap, grid, common } => {
            let mut t = Map::new();
            t.insert("op".into(), json!("bergman"));
            t.insert("family".into(), read_json(&family)?);
            t.insert("c".into(), json!(c));
            t.insert("grid".into(), grid::grid_value(&grid).map_err(Fatal)?);
            if let Some(cap) = cap {
                t.insert("basis".into(), json!({ "degree_cap": cap }));
            }
            let r = run_task(t, &common)?;
            let text = match result(&r) {
                Some(TaskOutput::Kernel(rows)) => kernel_csv(rows),
                _ => String::new(),
            };
            (r, text, common.out)
        }
        Cmd::Stability { integrand, check, common } => {
            let mut t = object(read_json(&integrand)?, &integrand)?;
            let name = match check {
                CheckArg::Nondeg => "nondeg",
                CheckArg::Hyp => "hyp",
                CheckArg::Family => "family",
                CheckArg::Siu => "siu",
                CheckArg::Nb => "nb",
            };
            t.insert("op".into(), json!("stability"));
            t.insert("check".into(), json!(name));
            let r = run_task(t, &common)?;
            let text = match result(&r) {
                Some(TaskOutput::Stability(s)) => match s {
                    StabilityOutput::Nondeg(x) => to_json(x),
                    StabilityOutput::Hyp(x) => to_json(x),
                    StabilityOutput::Family(x) => to_json(x),
                    StabilityOutput::Siu(x) => to_json(x),
                    StabilityOutput::Nb(x) => to_json(x),
                },
                _ => to_json(&r),
            };
            (r, text, common.out)
        }
        Cmd::Catalog { example, c, depth, grid, format, common } => {
            let mut t = Map::new();
            t.insert("op".into(), json!("catalog"));
            match example {
                ExampleArg::Wang => {
                    t.insert("example".into(), json!("wang"));
                    if let Some(k) = depth {
                        t.insert("k".into(), json!(k));
                    }
                    if grid.is_some() {
                        return Err(Fatal("--grid applies to the li example only".into()));
                    }
                }
                ExampleArg::Li => {
                    t.insert("example".into(), json!("li"));
                    if let Some(d) = depth {
                        t.insert("depth".into(), json!(d));
                    }
                    if let Some(g) = &grid {
                        t.insert("ws".into(), json!(grid::real_values(g).map_err(Fatal)?));
                    }
                }
            }
            if let Some(c) = c {
                t.insert("c".into(), json!(c));
            }
            let json_out = match format.as_deref() {
                Some("json") => true,
                Some("csv") => false,
                Some(f) => return Err(Fatal(format!("unknown format `{f}`"))),
                None => common.out.as_ref().is_some_and(|p| p.extension().is_some_and(|e| e == "json")),
            };
            let r = run_task(t, &common)?;
            let text = if json_out {
                to_json(&r)
            } else {
                match result(&r) {
                    Some(TaskOutput::Wang(rows)) => catalog_csv(rows),
                    Some(TaskOutput::Li(rep)) => catalog_csv(&rep.samples),
                    _ => String::new(),
                }
            };
            (r, text, common.out)
        }
        Cmd::Run { scenario: path, seed, out, csv, timings } => {
            let mut sc = scenario::load_scenario(&path.to_string_lossy())?;
            if let Some(s) = seed {
                sc.seed = s;
            }
            sc.timings |= timings;
            let r = scenario::run(&sc);
            for t in r.tasks.iter().filter(|t| t.status != scenario::Status::Ok) {
                eprintln!("{}: {:?}{}", t.name, t.status, t.error.as_ref().map(|e| format!(": {e}")).unwrap_or_default());
            }
            let csv = csv.or(sc.outputs.csv.as_ref().map(PathBuf::from));
            if let Some(p) = &csv {
                write_out(&Some(p.clone()), &to_csv(&r))?;
            }
            let out = out.or(sc.outputs.json.as_ref().map(PathBuf::from));
            let text = to_json(&r);
            (r, text, out)
        }
    };
    write_out(&out, &text)?;
    Ok(report.exit_code())
}

/// A task read from `config` with its op set; the whole report is written.
fn single(op: &str, config: &Path, common: Common) -> Result<(Report, String, Option<PathBuf>), Fatal> {
    let mut t = object(read_json(config)?, config)?;
    t.insert("op".into(), json!(op));
    let r = run_task(t, &common)?;
    let text = to_json(&r);
    Ok((r, text, common.out))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(e) = pshlab::scenario::init_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    match dispatch(cli.cmd) {
        Ok(code) => ExitCode::from(code as u8),
        Err(Fatal(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
