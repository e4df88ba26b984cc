//! Generalized Cantor sets in `[0, 1]`, their measures and potentials.
//!
//! Level lengths are kept as logarithms: the polar parameters have
//! `l_k = exp(−2^k)`, far below the smallest double for `k ≥ 10`.

use std::collections::HashMap;
use std::f64::consts::LN_2;
use std::sync::RwLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::psh::{FieldDef, ScalarField};
use crate::Complex64;

pub const DEFAULT_DEPTH: usize = 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CantorSpec {
    pub depth: usize,
    /// `log l_k` for `k = 0..=depth + 1`; the extra level is the one-step
    /// refinement used at points of the set.
    pub log_lengths: Vec<f64>,
}

fn log_diff(a: f64, b: f64) -> f64 {
    // log(e^a − e^b) for a > b
    a + (-(b - a).exp()).ln_1p()
}

fn log_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        hi
    } else {
        hi + (lo - hi).exp().ln_1p()
    }
}

/// From ratios: level `k` removes the proportion `s_k` from the middle of
/// each level `k − 1` interval. The last ratio is reused for the refinement level.
pub fn cantor_build(s: &[f64], depth: usize) -> Result<CantorSpec> {
    if s.len() < depth || s.is_empty() {
        return Err(Error::InvalidInput(format!("need {depth} ratios, got {}", s.len())));
    }
    if let Some(x) = s.iter().find(|x| !(**x > 0.0 && **x < 1.0)) {
        return Err(Error::InvalidInput(format!("ratio {x} is outside (0, 1)")));
    }
    let mut ll = vec![0.0];
    for k in 1..=depth + 1 {
        let sk = s[(k - 1).min(s.len() - 1)];
        ll.push(ll[k - 1] + (0.5 * (1.0 - sk)).ln());
    }
    Ok(CantorSpec { depth, log_lengths: ll })
}

impl CantorSpec {
    /// `l_k = exp(−2^k)` for `k ≥ 1`, so `Σ 2^{−k} log(1/l_k)` diverges.
    pub fn polar(depth: usize) -> Self {
        let ll = (0..=depth + 1).map(|k| if k == 0 { 0.0 } else { -(2f64.powi(k as i32)) }).collect();
        Self { depth, log_lengths: ll }
    }

    pub fn from_log_lengths(depth: usize, log_lengths: Vec<f64>) -> Result<Self> {
        if log_lengths.len() < depth + 2 || log_lengths[0] != 0.0 {
            return Err(Error::InvalidInput("need log-lengths for levels 0..=depth+1 starting at 0".into()));
        }
        if log_lengths.windows(2).any(|w| !(w[1] < w[0] - LN_2)) {
            return Err(Error::InvalidInput("each level must be shorter than half the previous one".into()));
        }
        Ok(Self { depth, log_lengths: log_lengths[..depth + 2].to_vec() })
    }

    /// Ratios `s_k`; these round to 1 once `l_k / l_{k−1}` underflows.
    pub fn ratios(&self) -> Vec<f64> {
        (1..=self.depth).map(|k| 1.0 - 2.0 * (self.log_lengths[k] - self.log_lengths[k - 1]).exp()).collect()
    }

    fn len(&self, k: usize) -> f64 {
        self.log_lengths[k].exp()
    }

    /// Level-`k` intervals `[a, b]` in increasing order.
    pub fn intervals(&self, k: usize) -> Vec<(f64, f64)> {
        let mut cur = vec![(0.0, 1.0)];
        for j in 1..=k {
            let l = self.len(j);
            cur = cur.into_iter().flat_map(|(a, b)| [(a, a + l), (b - l, b)]).collect();
        }
        cur
    }

    /// Endpoints of the level-`k` intervals; they are endpoints at every deeper level.
    pub fn endpoints(&self, k: usize) -> Vec<f64> {
        self.intervals(k).into_iter().flat_map(|(a, b)| [a, b]).collect()
    }

    /// Midpoints of the gaps removed at levels `1..=k`.
    pub fn gap_midpoints(&self, k: usize) -> Vec<f64> {
        let mut out = Vec::new();
        for j in 1..=k {
            for (a, b) in self.intervals(j - 1) {
                out.push(0.5 * (a + b));
            }
        }
        out.sort_by(f64::total_cmp);
        out
    }

    /// Upper bound for the depth-`depth` potential on the level-`depth`
    /// intervals: the sibling at level `k` lies within `l_{k−1}` and the
    /// own interval within `l_K`.
    pub fn potential_bound(&self) -> f64 {
        let k = self.depth;
        let mut s = 0.0;
        for j in 2..=k {
            s += 0.5f64.powi(j as i32) * self.log_lengths[j - 1];
        }
        s + 0.5f64.powi(k as i32) * self.log_lengths[k]
    }
}

/// Distribution function of the depth-`depth` measure: mass `2^{−k}` per
/// level-`k` interval, constant on gaps, linear inside the deepest intervals.
pub fn cantor_cdf(spec: &CantorSpec, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let (mut a, mut b) = (0.0, 1.0);
    let mut acc = 0.0;
    for k in 1..=spec.depth {
        let l = spec.len(k);
        let m = 0.5f64.powi(k as i32);
        if x <= a + l {
            b = a + l;
        } else if x >= b - l {
            acc += m;
            a = b - l;
        } else {
            return acc + m;
        }
    }
    let frac = if b > a { ((x - a) / (b - a)).clamp(0.0, 1.0) } else { 0.5 };
    acc + 0.5f64.powi(spec.depth as i32) * frac
}

/// Position of `w` relative to a node.
#[derive(Clone, Copy)]
enum Rel {
    Left,
    Right,
    Inside,
    /// On the real line beside the node at `exp(log_d)` from its near end.
    Beside { log_d: f64, left_of: bool },
    Off,
}

/// `∫ log χ(w, t) dμ_K(t)` with the chordal distance
/// `χ(w, t) = |w − t| / (√(1+|w|²) √(1+t²))`, by the midpoint rule on the
/// level-`K` intervals (one extra level on the interval holding `w`).
/// Nodes of length below `1e-12` times their distance count as one point.
pub fn cantor_potential(spec: &CantorSpec, w: Complex64) -> f64 {
    let on_line = w.im == 0.0 && (0.0..=1.0).contains(&w.re);
    let rel = if !on_line {
        Rel::Off
    } else if w.re == 0.0 {
        Rel::Left
    } else if w.re == 1.0 {
        Rel::Right
    } else {
        Rel::Inside
    };
    let lw = 0.5 * w.norm_sqr().ln_1p();
    let mut acc = 0.0;
    node(spec, w, 0, 0.0, 1.0, rel, 1.0, &mut acc);
    acc - lw
}

const FAR: f64 = -27.631021115928547; // ln 1e-12

#[allow(clippy::too_many_arguments)]
fn node(spec: &CantorSpec, w: Complex64, k: usize, a: f64, b: f64, rel: Rel, mass: f64, acc: &mut f64) {
    let ll = spec.log_lengths[k];
    let mid = 0.5 * (a + b);
    let chord = 0.5 * (mid * mid).ln_1p();
    let leaf = |log_dist: f64, acc: &mut f64| *acc += mass * (log_dist - chord);
    match rel {
        Rel::Off => {
            let d = if w.re < a {
                (w - a).norm()
            } else if w.re > b {
                (w - b).norm()
            } else {
                w.im.abs()
            };
            if k == spec.depth || ll < d.ln() + FAR {
                return leaf((w - mid).norm().ln(), acc);
            }
        }
        Rel::Beside { log_d, .. } => {
            if k == spec.depth || ll < log_d + FAR {
                return leaf(log_add(log_d, ll - LN_2), acc);
            }
        }
        _ => {}
    }
    let lc = spec.log_lengths[k + 1];
    let c = lc.exp();
    let (left, right) = ((a, a + c), (b - c, b));
    // log of the gap between the two children
    let gap = log_diff(ll, lc + LN_2);
    let inner = log_diff(ll, lc);
    if k == spec.depth {
        // refinement: half the mass at each child midpoint
        let (d1, d2) = match rel {
            Rel::Left => (lc - LN_2, log_diff(ll, lc - LN_2)),
            Rel::Right => (log_diff(ll, lc - LN_2), lc - LN_2),
            _ => {
                let floor = lc - 2.0 * LN_2;
                let f = |m: f64| (w.re - m).abs().ln().max(floor);
                (f(0.5 * (left.0 + left.1)), f(0.5 * (right.0 + right.1)))
            }
        };
        *acc += 0.5 * mass * (d1 + d2) - mass * chord;
        return;
    }
    let half = 0.5 * mass;
    let (rl, rr) = match rel {
        Rel::Left => (Rel::Left, Rel::Beside { log_d: inner, left_of: true }),
        Rel::Right => (Rel::Beside { log_d: inner, left_of: false }, Rel::Right),
        Rel::Inside => {
            let x = w.re;
            if x == left.0 {
                (Rel::Left, Rel::Beside { log_d: inner, left_of: true })
            } else if x == right.1 {
                (Rel::Beside { log_d: inner, left_of: false }, Rel::Right)
            } else if x < left.1 {
                (Rel::Inside, Rel::Beside { log_d: (right.0 - x).ln(), left_of: true })
            } else if x == left.1 {
                (Rel::Right, Rel::Beside { log_d: gap, left_of: true })
            } else if x == right.0 {
                (Rel::Beside { log_d: gap, left_of: false }, Rel::Left)
            } else if x > right.0 {
                (Rel::Beside { log_d: (x - left.1).ln(), left_of: false }, Rel::Inside)
            } else {
                (
                    Rel::Beside { log_d: (x - left.1).ln(), left_of: false },
                    Rel::Beside { log_d: (right.0 - x).ln(), left_of: true },
                )
            }
        }
        Rel::Beside { log_d, left_of } => {
            let far = log_add(log_d, inner);
            if left_of {
                (Rel::Beside { log_d, left_of }, Rel::Beside { log_d: far, left_of })
            } else {
                (Rel::Beside { log_d: far, left_of }, Rel::Beside { log_d, left_of })
            }
        }
        Rel::Off => (Rel::Off, Rel::Off),
    };
    node(spec, w, k + 1, left.0, left.1, rl, half, acc);
    node(spec, w, k + 1, right.0, right.1, rr, half, acc);
}

/// [`cantor_potential`] as a field, memoized per point.
#[derive(Debug)]
pub struct CantorPotential {
    pub spec: CantorSpec,
    /// Polar default parameters; kept so the definition round-trips.
    polar: bool,
    cache: RwLock<HashMap<(u64, u64), f64>>,
}

impl CantorPotential {
    pub fn new(spec: CantorSpec) -> Self {
        let polar = spec == CantorSpec::polar(spec.depth);
        Self { spec, polar, cache: RwLock::new(HashMap::new()) }
    }

    pub fn from_def(depth: usize, log_lengths: Option<Vec<f64>>) -> Result<Self> {
        let spec = match log_lengths {
            None => CantorSpec::polar(depth),
            Some(ll) => CantorSpec::from_log_lengths(depth, ll)?,
        };
        Ok(Self::new(spec))
    }
}

impl ScalarField for CantorPotential {
    fn value(&self, w: Complex64) -> f64 {
        let key = (w.re.to_bits(), w.im.to_bits());
        if let Some(v) = self.cache.read().expect("cache lock").get(&key) {
            return *v;
        }
        let v = cantor_potential(&self.spec, w);
        self.cache.write().expect("cache lock").insert(key, v);
        v
    }

    fn def(&self) -> FieldDef {
        FieldDef::CantorPotential {
            depth: self.spec.depth,
            log_lengths: if self.polar { None } else { Some(self.spec.log_lengths.clone()) },
        }
    }
}
