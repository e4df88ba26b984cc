//! `--grid` values: inline JSON, a JSON file, or the compact axis syntax.
//!
//! Compact syntax: one entry per complex coordinate, separated by `,`.
//! An entry is `lo:hi:n` (real axis), `lo:hi:n@lo:hi:n` (real and imaginary
//! axes) or a single number (fixed real value).

use pshlab::cloud::{Axis, CoordAxes, GridSpec};
use serde_json::Value;

fn axis(s: &str) -> Result<Axis, String> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("bad number `{t}` in grid axis `{s}`"));
    match parts.as_slice() {
        [v] => Ok(Axis::fixed(num(v)?)),
        [lo, hi, n] => {
            let n = n.trim().parse::<usize>().map_err(|_| format!("bad point count in grid axis `{s}`"))?;
            if n == 0 {
                return Err(format!("grid axis `{s}` has no points"));
            }
            Ok(Axis { lo: num(lo)?, hi: num(hi)?, n })
        }
        _ => Err(format!("grid axis `{s}` is not `lo:hi:n` or a number")),
    }
}

fn compact(s: &str) -> Result<GridSpec, String> {
    let coords = s
        .split(',')
        .map(|c| {
            let (re, im) = c.split_once('@').unwrap_or((c, "0"));
            Ok(CoordAxes { re: axis(re)?, im: axis(im)? })
        })
        .collect::<Result<Vec<_>, String>>()?;
    Ok(GridSpec::Tensor(coords))
}

fn json_text(s: &str) -> Result<Option<String>, String> {
    let t = s.trim_start();
    if t.starts_with('{') || t.starts_with('[') {
        return Ok(Some(s.to_string()));
    }
    if std::path::Path::new(s).is_file() {
        return std::fs::read_to_string(s).map(Some).map_err(|e| format!("{s}: {e}"));
    }
    Ok(None)
}

/// The grid as a JSON value ready to splice into a task.
pub fn grid_value(s: &str) -> Result<Value, String> {
    match json_text(s)? {
        Some(text) => serde_json::from_str(&text).map_err(|e| format!("grid: {e}")),
        None => serde_json::to_value(compact(s)?).map_err(|e| e.to_string()),
    }
}

/// Real parameter values: a JSON list, or one compact real axis.
pub fn real_values(s: &str) -> Result<Vec<f64>, String> {
    match json_text(s)? {
        Some(text) => serde_json::from_str(&text).map_err(|e| format!("grid: {e}")),
        None => Ok(axis(s)?.values()),
    }
}
