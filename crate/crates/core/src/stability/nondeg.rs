//! Resonance-free exponent pairs.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::invariants::newton::rational_to_string;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NondegeneracyReport {
    #[serde(with = "crate::rational")]
    pub eps: BigRational,
    #[serde(with = "crate::rational")]
    pub delta: BigRational,
    pub m: u32,
    pub n: u32,
    /// Pairs `(ν, l)` with `ν·eps + 2 − l·delta/([delta] + 1) = 0`.
    pub degenerate: Vec<(u32, u32)>,
    pub nondegenerate: bool,
}

fn int(k: u32) -> BigRational {
    BigRational::from_integer(BigInt::from(k))
}

/// Exact enumeration over `0 ≤ ν ≤ m`, `0 ≤ l ≤ n`.
pub fn nondegenerate_check(eps: &BigRational, delta: &BigRational, m: u32, n: u32) -> Result<NondegeneracyReport> {
    if eps.is_negative() || delta.is_negative() {
        return Err(Error::InvalidInput("exponents must be non-negative".into()));
    }
    let step = delta / (delta.floor() + BigRational::one());
    let two = int(2);
    let mut degenerate = Vec::new();
    for nu in 0..=m {
        let base = int(nu) * eps + &two;
        for l in 0..=n {
            if (&base - int(l) * &step).is_zero() {
                degenerate.push((nu, l));
            }
        }
    }
    Ok(NondegeneracyReport {
        eps: eps.clone(),
        delta: delta.clone(),
        m,
        n,
        nondegenerate: degenerate.is_empty(),
        degenerate,
    })
}

/// Smallest `η` of the grid making `(eps, delta + η)` non-degenerate.
pub fn find_eta(eps: &BigRational, delta: &BigRational, m: u32, n: u32, grid: &[BigRational]) -> Result<BigRational> {
    if let Some(e) = grid.iter().find(|e| !e.is_positive() || **e > BigRational::one()) {
        return Err(Error::InvalidInput(format!("η = {} is outside (0, 1]", rational_to_string(e))));
    }
    let mut sorted = grid.to_vec();
    sorted.sort();
    let mut blocked = Vec::new();
    for eta in sorted {
        let r = nondegenerate_check(eps, &(delta + &eta), m, n)?;
        if r.nondegenerate {
            return Ok(eta);
        }
        blocked.push(format!("{} {:?}", rational_to_string(&eta), r.degenerate));
    }
    Err(Error::GridExhausted(blocked))
}
