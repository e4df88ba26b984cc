//! Newton polyhedra of monomial ideals and the exact rational LP behind
//! Howald's formula.
//!
//! For `v > 0` the scaling function `τ(v) = sup{μ : v/μ ∈ Newt}` equals the
//! optimum of `max Σρ_i  s.t.  Σ ρ_i a_i ≤ v, ρ ≥ 0`, which is what
//! [`NewtonPolyhedron::scaling`] solves with a Bland-rule simplex over
//! `BigRational`. The log canonical threshold of the ideal is `τ(1,…,1)`, and
//! `z^k` lies in the multiplier ideal of `λ·a` iff `τ(k + 1) > λ`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NewtonPolyhedron {
    pub dim: usize,
    pub generators: Vec<Vec<u32>>,
}

/// Exact optimum of the scaling LP; `None` means unbounded (unit ideal).
pub type Scaling = Option<BigRational>;

impl NewtonPolyhedron {
    pub fn new(generators: Vec<Vec<u32>>) -> Result<Self> {
        let Some(first) = generators.first() else {
            return Err(Error::InvalidInput("Newton polyhedron needs a generator".into()));
        };
        let dim = first.len();
        if dim == 0 {
            return Err(Error::InvalidInput("exponents must have positive length".into()));
        }
        if let Some(g) = generators.iter().find(|g| g.len() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: g.len() });
        }
        Ok(Self { dim, generators })
    }

    /// `sup{μ > 0 : v/μ ∈ Newt}` for a positive rational vector `v`.
    pub fn scaling(&self, v: &[BigRational]) -> Scaling {
        assert_eq!(v.len(), self.dim);
        assert!(v.iter().all(|x| x.is_positive()));
        if self.generators.iter().any(|g| g.iter().all(|&e| e == 0)) {
            return None;
        }
        Some(simplex_max(&self.generators, v))
    }

    pub fn scaling_int(&self, v: &[u64]) -> Scaling {
        let v: Vec<BigRational> =
            v.iter().map(|&x| BigRational::from_integer(BigInt::from(x))).collect();
        self.scaling(&v)
    }

    /// Log canonical threshold `τ(1,…,1)`.
    pub fn lct(&self) -> Scaling {
        self.scaling_int(&vec![1; self.dim])
    }

    /// Whether `z^k` is in the multiplier ideal `J(λ · a)`, i.e. whether
    /// `|z^k|² (Σ|z^{a_i}|²)^{-λ}` is integrable near the origin.
    pub fn in_multiplier_ideal(&self, k: &[u32], lambda: &BigRational) -> bool {
        let v: Vec<u64> = k.iter().map(|&x| x as u64 + 1).collect();
        match self.scaling_int(&v) {
            None => true,
            Some(t) => &t > lambda,
        }
    }
}

/// Dense tableau simplex for `max 1ᵀρ, Aᵀρ ≤ v, ρ ≥ 0` (origin feasible).
fn simplex_max(gens: &[Vec<u32>], v: &[BigRational]) -> BigRational {
    let n = v.len(); // constraints
    let g = gens.len(); // structural variables
    let cols = g + n; // plus slacks
    // rows: constraint i: Σ_j a_j[i] ρ_j + s_i = v_i
    let mut t: Vec<Vec<BigRational>> = (0..n)
        .map(|i| {
            let mut row = vec![BigRational::zero(); cols + 1];
            for (j, a) in gens.iter().enumerate() {
                row[j] = BigRational::from_integer(BigInt::from(a[i]));
            }
            row[g + i] = BigRational::one();
            row[cols] = v[i].clone();
            row
        })
        .collect();
    // reduced costs for maximization: objective row z - Σρ = 0
    let mut obj = vec![BigRational::zero(); cols + 1];
    for o in obj.iter_mut().take(g) {
        *o = -BigRational::one();
    }
    let mut basis: Vec<usize> = (g..g + n).collect();
    loop {
        // Bland: smallest index with negative reduced cost
        let Some(enter) = (0..cols).find(|&j| obj[j].is_negative()) else {
            break;
        };
        let mut leave: Option<(usize, BigRational)> = None;
        for i in 0..n {
            if t[i][enter].is_positive() {
                let ratio = &t[i][cols] / &t[i][enter];
                let better = match &leave {
                    None => true,
                    Some((li, lr)) => ratio < *lr || (ratio == *lr && basis[i] < basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let (r, _) = leave.expect("bounded LP: every generator has a positive entry");
        let piv = t[r][enter].clone();
        for x in t[r].iter_mut() {
            *x /= &piv;
        }
        let prow = t[r].clone();
        for (i, row) in t.iter_mut().enumerate() {
            if i != r && !row[enter].is_zero() {
                let f = row[enter].clone();
                for (x, p) in row.iter_mut().zip(&prow) {
                    *x -= &f * p;
                }
            }
        }
        if !obj[enter].is_zero() {
            let f = obj[enter].clone();
            for (x, p) in obj.iter_mut().zip(&prow) {
                *x -= &f * p;
            }
        }
        basis[r] = enter;
    }
    obj[cols].clone()
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn rational_to_string(r: &BigRational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}
