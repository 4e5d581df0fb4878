//! The polynomial family `q_1(t) = t`, `q_{k+1}(t) = t q_k(t) - q_k'(t)`,
//! its integer coefficients, real roots, and the scaled thresholds
//! `t_i * sqrt(2a(1-2a))` that separate the signs of infinite derivatives.
//!
//! Each `q_k` is monic of degree `k` with `k` distinct real roots placed
//! symmetrically about 0, and the roots of consecutive polynomials strictly
//! interlace; the root finder exploits exactly that structure.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

/// A member of the family, with exact integer coefficients.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QPolynomial {
    k: u32,
    /// Ascending order: `coeffs[i]` multiplies `t^i`; length `k + 1`.
    coeffs: Vec<BigInt>,
}

/// Roots of `q_k` together with their `sqrt(2a(1-2a))`-scaled versions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdSet {
    /// Sorted roots `t_1 < … < t_k` of `q_k`.
    pub roots: Vec<f64>,
    /// `t_i * sqrt(2a(1-2a))`.
    pub scaled: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum HermiteError {
    InvalidParam { name: &'static str, reason: String },
    /// A sign-change bracket predicted by interlacing was not found.
    BracketLost { k: u32, detail: String },
}

impl std::fmt::Display for HermiteError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            HermiteError::InvalidParam { name, reason } => {
                write!(f, "invalid parameter {name}: {reason}")
            }
            HermiteError::BracketLost { k, detail } => {
                write!(f, "lost a root bracket of q_{k}: {detail}")
            }
        }
    }
}

impl std::error::Error for HermiteError {}

impl QPolynomial {
    pub fn degree(&self) -> u32 {
        self.k
    }

    /// Coefficients in ascending order of the power of `t`.
    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    /// Coefficients as `i128`, for compact output; `None` on overflow.
    pub fn coeffs_i128(&self) -> Option<Vec<i128>> {
        self.coeffs.iter().map(|c| c.to_i128()).collect()
    }

    /// Horner evaluation in `f64`.
    pub fn eval(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for c in self.coeffs.iter().rev() {
            acc = acc * t + c.to_f64().unwrap_or(f64::NAN);
        }
        acc
    }

    /// Derivative evaluation in `f64`.
    pub fn eval_derivative(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for (i, c) in self.coeffs.iter().enumerate().skip(1).rev() {
            acc = acc * t + i as f64 * c.to_f64().unwrap_or(f64::NAN);
        }
        acc
    }
}

/// Exact coefficients of `q_k` via the defining recursion.
pub fn q_poly(k: u32) -> Result<QPolynomial, HermiteError> {
    if k < 1 {
        return Err(HermiteError::InvalidParam {
            name: "k",
            reason: "need k >= 1".into(),
        });
    }
    // q_1 = t
    let mut coeffs: Vec<BigInt> = vec![BigInt::zero(), BigInt::from(1)];
    for _ in 1..k {
        // next = t * q - q'
        let deg = coeffs.len() - 1;
        let mut next = vec![BigInt::zero(); deg + 2];
        for (i, c) in coeffs.iter().enumerate() {
            next[i + 1] += c; // t * q
            if i >= 1 {
                next[i - 1] -= c * BigInt::from(i as u32); // -q'
            }
        }
        coeffs = next;
    }
    Ok(QPolynomial { k, coeffs })
}

/// The `k` distinct real roots of `q_k`, ascending.
///
/// Brackets come from the interlacing property: between consecutive roots of
/// `q_{k-1}` lies exactly one root of `q_k`, plus one root outside on each
/// end. Each bracket is resolved by bisection and polished by a safeguarded
/// Newton step. Errors if a predicted sign change is missing.
pub fn q_roots(k: u32) -> Result<Vec<f64>, HermiteError> {
    if k < 1 {
        return Err(HermiteError::InvalidParam {
            name: "k",
            reason: "need k >= 1".into(),
        });
    }
    let mut roots = vec![0.0f64];
    for deg in 2..=k {
        let poly = q_poly(deg)?;
        let mut next = Vec::with_capacity(deg as usize);
        // outer bound: the extreme roots stay below 2 sqrt(deg) + 1
        let outer = 2.0 * (deg as f64).sqrt() + 1.0;
        let mut cuts = Vec::with_capacity(deg as usize + 1);
        cuts.push(-outer);
        cuts.extend_from_slice(&roots);
        cuts.push(outer);
        for w in cuts.windows(2) {
            next.push(bracketed_root(&poly, w[0], w[1])?);
        }
        roots = next;
    }
    Ok(roots)
}

fn bracketed_root(poly: &QPolynomial, mut lo: f64, mut hi: f64) -> Result<f64, HermiteError> {
    let mut flo = poly.eval(lo);
    let fhi = poly.eval(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(HermiteError::BracketLost {
            k: poly.degree(),
            detail: format!("no sign change on [{lo}, {hi}]"),
        });
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        let fmid = poly.eval(mid);
        if fmid == 0.0 {
            return Ok(mid);
        }
        if fmid.signum() == flo.signum() {
            lo = mid;
            flo = fmid;
        } else {
            hi = mid;
        }
    }
    // Newton polish, kept inside the bracket
    let mut t = 0.5 * (lo + hi);
    for _ in 0..6 {
        let f = poly.eval(t);
        let df = poly.eval_derivative(t);
        if df == 0.0 {
            break;
        }
        let step = f / df;
        let candidate = t - step;
        if candidate > lo && candidate < hi {
            t = candidate;
        } else {
            break;
        }
    }
    Ok(t)
}

/// Scaled thresholds `t_i * sqrt(2a(1-2a))` for `0 < a < 1/2`.
pub fn thresholds(k: u32, a: f64) -> Result<ThresholdSet, HermiteError> {
    if !(a > 0.0 && a < 0.5) {
        return Err(HermiteError::InvalidParam {
            name: "a",
            reason: format!("need a in (0,1/2), got {a}"),
        });
    }
    let roots = q_roots(k)?;
    let scale = (2.0 * a * (1.0 - 2.0 * a)).sqrt();
    let scaled = roots.iter().map(|t| t * scale).collect();
    Ok(ThresholdSet { roots, scaled })
}

/// Parity check used by the invariants: coefficients of terms whose parity
/// differs from `k (mod 2)` vanish.
pub fn parity_holds(poly: &QPolynomial) -> bool {
    poly.coeffs
        .iter()
        .enumerate()
        .all(|(i, c)| (i as u32 % 2 == poly.degree() % 2) || c.is_zero())
}
