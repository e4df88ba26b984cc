//! Scenario files: a seed and an ordered task list, run into a report.

mod emit;
mod task;

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use emit::{catalog_csv, cloud_csv, emit, fmt17, kernel_csv, to_csv, to_json, Format};
pub use task::{CatalogExample, ContainmentPair, KernelRow, StabilityCheck, StabilityOutput, Task, TaskOutput};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    #[serde(default = "current_schema")]
    pub schema_version: u32,
    #[serde(default)]
    pub seed: u64,
    /// Overrides the bisection tolerance of every task.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    /// Record wall-clock runtimes. Off by default so reports stay byte-stable.
    #[serde(default)]
    pub timings: bool,
    #[serde(default)]
    pub tasks: Vec<TaskSpec>,
    #[serde(default)]
    pub outputs: Outputs,
}

fn current_schema() -> u32 {
    SCHEMA_VERSION
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Outputs {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub json: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(flatten)]
    pub task: Task,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Inconclusive,
    Failed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskReport {
    pub name: String,
    pub op: String,
    pub seed: u64,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<TaskOutput>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub runtime_ms: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub seed: u64,
    pub tasks: Vec<TaskReport>,
}

impl Report {
    /// 0 when every task succeeded, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.tasks.iter().all(|t| t.status == Status::Ok) {
            0
        } else {
            2
        }
    }
}

pub const TASK_NAMES: &[&str] = &[
    "lelong",
    "lct",
    "cse",
    "reciprocity",
    "restriction-scan",
    "scan",
    "probe",
    "containment",
    "sandwich",
    "bergman",
    "pole-scan",
    "log-psh",
    "stability",
    "catalog",
];

fn parse_error(e: serde_json::Error) -> Error {
    Error::Parse { line: e.line(), column: e.column(), message: e.to_string() }
}

/// Parses and validates a scenario; schema and task names are checked
/// before the typed parse so they get their own errors.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let v: serde_json::Value = serde_json::from_str(text).map_err(parse_error)?;
    if let Some(found) = v.get("schema_version") {
        let found = found.as_u64().ok_or_else(|| Error::Parse {
            line: 0,
            column: 0,
            message: "schema_version must be an unsigned integer".into(),
        })?;
        if found != SCHEMA_VERSION as u64 {
            return Err(Error::SchemaVersion { expected: SCHEMA_VERSION, found: found as u32 });
        }
    }
    if let Some(tasks) = v.get("tasks").and_then(|t| t.as_array()) {
        for t in tasks {
            if let Some(op) = t.get("op").and_then(|o| o.as_str()) {
                if !TASK_NAMES.contains(&op) {
                    return Err(Error::UnknownTask(op.into()));
                }
            }
        }
    }
    serde_json::from_str(text).map_err(parse_error)
}

pub fn load_scenario(path: &str) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io { path: path.into(), message: e.to_string() })?;
    parse_scenario(&text)
}

pub fn run_scenario(path: &str) -> Result<Report> {
    Ok(run(&load_scenario(path)?))
}

/// Seed of task `i`: the scenario seed XOR a hash of the index.
pub fn task_seed(seed: u64, i: usize) -> u64 {
    seed ^ crate::rng::splitmix64(i as u64)
}

/// Runs every task; failures are recorded per task.
pub fn run(s: &Scenario) -> Report {
    let tasks = s
        .tasks
        .par_iter()
        .enumerate()
        .map(|(i, spec)| {
            let seed = task_seed(s.seed, i);
            let op = spec.task.op().to_string();
            let name = spec.name.clone().unwrap_or_else(|| format!("{i}-{op}"));
            let t0 = Instant::now();
            let out = spec.task.run(seed, s.tol);
            let runtime_ms = s.timings.then(|| t0.elapsed().as_secs_f64() * 1e3);
            match out {
                Ok(r) => TaskReport { name, op, seed, status: r.status(), result: Some(r), error: None, runtime_ms },
                Err(e) => {
                    TaskReport { name, op, seed, status: Status::Failed, result: None, error: Some(e.to_string()), runtime_ms }
                }
            }
        })
        .collect();
    Report { schema_version: SCHEMA_VERSION, seed: s.seed, tasks }
}

/// Caps the global thread pool at `PSHLAB_THREADS` when set.
pub fn init_threads() -> Result<()> {
    let Ok(v) = std::env::var("PSHLAB_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Error::InvalidInput(format!("PSHLAB_THREADS must be a positive integer, got `{v}`")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::InvalidInput(format!("thread pool: {e}")))
}
