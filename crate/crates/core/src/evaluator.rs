//! Evaluation of `F_a(x)` and its parameter derivatives `M_{k,a}(x)` with
//! rigorous truncation-error bounds.
//!
//! The workhorse is the explicit series
//!
//! ```text
//! F_a(x) = sum_{n>=0} a^(n-l_n) (1-2a)^(l_n) q(x_{n+1}),
//!          q(0) = 0,  q(1) = a,  q(2) = 1 - a,
//! ```
//!
//! differentiated `k` times in `a` term by term. Every truncation is
//! accompanied by an explicit upper bound on the discarded tail
//! ([`tail_bound`]). For terminating digit streams the series itself
//! terminates (`q(0) = 0`) and results are exact up to rounding.
//!
//! Reported error bounds cover truncation only; floating-point rounding of
//! the summed terms is below `1e-12` for the parameter ranges exercised here
//! and is accounted for separately by callers that need it.

use serde::Serialize;

use crate::math;
use crate::ternary::DigitSource;

/// Validated evaluation request.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalParams {
    pub a: f64,
    pub k: u32,
    pub tol: f64,
}

impl EvalParams {
    pub fn new(a: f64, k: u32, tol: f64) -> Result<Self, EvalError> {
        check_a(a)?;
        if !(tol > 0.0) {
            return Err(EvalError::InvalidParam {
                name: "tol",
                reason: format!("need tol > 0, got {tol}"),
            });
        }
        Ok(Self { a, k, tol })
    }
}

/// A value together with its truncation-error bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvalResult {
    pub value: f64,
    /// Upper bound on the truncation error; 0 when `exact`.
    pub err_bound: f64,
    /// Number of series terms (or unrolling depth) used.
    pub terms: usize,
    /// True when the series terminated (finite digit stream).
    pub exact: bool,
}

/// Digit weights and decay data of the series at parameter `a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesWeights {
    pub q0: f64,
    pub q1: f64,
    pub q2: f64,
    /// Geometric decay base `max(a, |1-2a|)`.
    pub b: f64,
    /// Hölder exponent `-log_3 b`.
    pub gamma: f64,
}

/// Weights of the defining series at parameter `a`.
pub fn series_weights(a: f64) -> SeriesWeights {
    SeriesWeights {
        q0: 0.0,
        q1: a,
        q2: 1.0 - a,
        b: math::decay_base(a),
        gamma: math::holder_gamma(a),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EvalError {
    InvalidParam { name: &'static str, reason: String },
    /// The iteration cap was reached before the tail bound fell below the
    /// requested tolerance; `achieved` is the best bound obtained.
    ToleranceNotReached { achieved: f64, terms: usize },
}

impl std::fmt::Display for EvalError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            EvalError::InvalidParam { name, reason } => {
                write!(f, "invalid parameter {name}: {reason}")
            }
            EvalError::ToleranceNotReached { achieved, terms } => write!(
                f,
                "tolerance not reached after {terms} terms; best bound {achieved:e}"
            ),
        }
    }
}

impl std::error::Error for EvalError {}

fn check_a(a: f64) -> Result<(), EvalError> {
    if !(a > 0.0 && a < 1.0) {
        return Err(EvalError::InvalidParam {
            name: "a",
            reason: format!("need a in (0,1), got {a}"),
        });
    }
    Ok(())
}

const MAX_TERMS: u64 = 1 << 20;

// --- small combinatorial helpers -----------------------------------------

/// Falling factorial `m (m-1) … (m-r+1)`; 0 when `r > m`, 1 when `r = 0`.
pub(crate) fn falling(m: u64, r: u32) -> f64 {
    if (r as u64) > m {
        return 0.0;
    }
    let mut out = 1.0;
    for i in 0..r as u64 {
        out *= (m - i) as f64;
    }
    out
}

pub(crate) fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let mut out = 1.0;
    for i in 0..k {
        out = out * (n - i) as f64 / (i + 1) as f64;
    }
    out
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// Stirling numbers of the second kind S(r, j) for j = 0..=r.
fn stirling2_row(r: u32) -> Vec<f64> {
    let mut row = vec![1.0];
    for n in 1..=r {
        let mut next = vec![0.0; n as usize + 1];
        for j in 1..=n as usize {
            let above = row.get(j).copied().unwrap_or(0.0);
            next[j] = j as f64 * above + row[j - 1];
        }
        row = next;
    }
    row
}

/// Exact closed form of `sum_{n>=m} n^r b^n` for `0 < b < 1`.
///
/// Uses `n^r = sum_j S(r,j) n^(j)` (falling factorials) and `j`-fold
/// differentiation of the geometric tail.
pub(crate) fn tail_power_geometric(r: u32, b: f64, m: u64) -> f64 {
    debug_assert!(b > 0.0 && b < 1.0);
    let stirling = stirling2_row(r);
    let mut total = 0.0;
    for (j, &s) in stirling.iter().enumerate() {
        if s == 0.0 {
            continue;
        }
        let j = j as u32;
        // sum_{n>=m} n^(j) b^n = b^j * d^j/db^j [ b^m / (1-b) ]
        let mut inner = 0.0;
        for i in 0..=j.min(m as u32) {
            inner += binomial(j, i)
                * falling(m, i)
                * b.powi((m - i as u64) as i32)
                * factorial(j - i)
                / (1.0 - b).powi((j - i + 1) as i32);
        }
        // when m < i the falling factorial vanishes, so capping i at m is safe
        total += s * b.powi(j as i32) * inner;
    }
    total
}

/// Upper bound on the sum of all series terms with index `>= m`.
///
/// Per-term bounds follow the proof chain of the Hölder estimate:
/// `b^n (alpha n + 1)^k` with `alpha = 1/a + 2/|1-2a|` for `a != 1/2`, and
/// `k! 4^k (1/2)^n (2n+1)^k` for `a = 1/2`. The tail is summed in closed
/// form. Monotone decreasing in `m` and tending to 0.
pub fn tail_bound(k: u32, a: f64, m: u64) -> f64 {
    if a == 0.5 {
        let mut sum = 0.0;
        for r in 0..=k {
            sum += binomial(k, r) * 2f64.powi(r as i32) * tail_power_geometric(r, 0.5, m);
        }
        factorial(k) * 4f64.powi(k as i32) * sum
    } else {
        let b = math::decay_base(a);
        let alpha = 1.0 / a + 2.0 / (1.0 - 2.0 * a).abs();
        let mut sum = 0.0;
        for r in 0..=k {
            sum += binomial(k, r) * alpha.powi(r as i32) * tail_power_geometric(r, b, m);
        }
        sum
    }
}

/// `d^i/da^i` of the digit weight `q(d)`.
#[inline]
fn weight_derivative(d: u8, i: u32, a: f64) -> f64 {
    match (d, i) {
        (0, _) => 0.0,
        (1, 0) => a,
        (1, 1) => 1.0,
        (2, 0) => 1.0 - a,
        (2, 1) => -1.0,
        _ => 0.0,
    }
}

/// Term `n` of the `k`-times differentiated series, given `l_n` and the
/// digit `x_{n+1}`. Valid for every `a` in `(0,1)` including `1/2`
/// (`0^0 = 1` in `powi`).
pub(crate) fn series_term(k: u32, a: f64, n: u64, l: u64, d: u8) -> f64 {
    if d == 0 {
        return 0.0;
    }
    let nl = n - l;
    let one_minus_2a = 1.0 - 2.0 * a;
    let mut total = 0.0;
    for i3 in 0..=k.min(1) {
        let dq = weight_derivative(d, i3, a);
        if dq == 0.0 {
            continue;
        }
        let l_cap = (k - i3).min(l.min(u32::MAX as u64) as u32);
        for i2 in 0..=l_cap {
            let i1 = k - i3 - i2;
            if (i1 as u64) > nl {
                continue;
            }
            let coeff = binomial(k, i3) * binomial(k - i3, i2);
            let part_a = falling(nl, i1) * a.powi((nl - i1 as u64) as i32);
            let part_b = falling(l, i2)
                * one_minus_2a.powi((l - i2 as u64) as i32)
                * (-2f64).powi(i2 as i32);
            total += coeff * part_a * part_b * dq;
        }
    }
    total
}

fn series_eval(k: u32, a: f64, x: &DigitSource, tol: f64) -> Result<EvalResult, EvalError> {
    if !(tol > 0.0) {
        return Err(EvalError::InvalidParam {
            name: "tol",
            reason: format!("need tol > 0, got {tol}"),
        });
    }
    let finite_len = match x {
        DigitSource::Finite(v) => Some(v.len() as u64),
        _ => None,
    };
    let mut value = 0.0;
    let mut l = 0u64;
    let mut digits = x.digits();
    let mut n = 0u64;
    loop {
        if finite_len == Some(n) {
            return Ok(EvalResult {
                value,
                err_bound: 0.0,
                terms: n as usize,
                exact: true,
            });
        }
        let d = digits.next().unwrap();
        value += series_term(k, a, n, l, d);
        if d == 1 {
            l += 1;
        }
        n += 1;
        if finite_len.is_none() {
            let bound = tail_bound(k, a, n);
            if bound <= tol {
                return Ok(EvalResult {
                    value,
                    err_bound: bound,
                    terms: n as usize,
                    exact: false,
                });
            }
            if n >= MAX_TERMS {
                return Err(EvalError::ToleranceNotReached {
                    achieved: bound,
                    terms: n as usize,
                });
            }
        }
    }
}

/// `F_a(x)` to absolute tolerance `tol`.
pub fn okamoto_f(a: f64, x: &DigitSource, tol: f64) -> Result<EvalResult, EvalError> {
    check_a(a)?;
    series_eval(0, a, x, tol)
}

/// `M_{k,a}(x) = d^k/da^k F_a(x)` to absolute tolerance `tol`, `k >= 1`.
pub fn partial_m(k: u32, a: f64, x: &DigitSource, tol: f64) -> Result<EvalResult, EvalError> {
    check_a(a)?;
    if k < 1 {
        return Err(EvalError::InvalidParam {
            name: "k",
            reason: "need k >= 1 (use okamoto_f for k = 0)".into(),
        });
    }
    series_eval(k, a, x, tol)
}

/// `M_{k,a}(j / 3^n)` as a finite sum, exact up to rounding.
///
/// Requires `n <= 39` and `0 <= j <= 3^n`; the right endpoint `j = 3^n`
/// evaluates the symmetry values `F_a(1) = 1`, `M_{k,a}(1) = 0`.
pub fn exact_at_rational(k: u32, a: f64, n: u32, j: u64) -> f64 {
    assert!(n <= 39, "depth too large for u64 interval indices");
    let pow3 = 3u64.pow(n);
    assert!(j <= pow3, "need j <= 3^n");
    if j == pow3 {
        return if k == 0 { 1.0 } else { 0.0 };
    }
    // base-3 digits of j, most significant first
    let mut digits = [0u8; 40];
    let mut v = j;
    for t in (0..n).rev() {
        digits[t as usize] = (v % 3) as u8;
        v /= 3;
    }
    let mut value = 0.0;
    let mut l = 0u64;
    for (t, &d) in digits[..n as usize].iter().enumerate() {
        value += series_term(k, a, t as u64, l, d);
        if d == 1 {
            l += 1;
        }
    }
    value
}

/// Sup-norm bound for `|M_{k,a}|` on `[0,1]` from the series bounds.
pub fn sup_bound(k: u32, a: f64) -> f64 {
    tail_bound(k, a, 0)
}

/// Evaluate by unrolling the digit functional equations `depth` levels and
/// bounding the remainder by sup-norm bounds of the shifted evaluations.
///
/// This is an independent route to the same value as [`partial_m`] /
/// [`okamoto_f`]; the two must agree within combined error bounds.
pub fn eval_via_fe(k: u32, a: f64, x: &DigitSource, depth: u32) -> Result<EvalResult, EvalError> {
    check_a(a)?;
    if depth < 1 {
        return Err(EvalError::InvalidParam {
            name: "depth",
            reason: "need depth >= 1".into(),
        });
    }
    // Row vector over the state [F, M_1, …, M_k, 1]; start with the selector
    // of the quantity we want. After processing digits d_1…d_D,
    //   target = sum_i w[i] * state_i(sigma^D x).
    let dim = k as usize + 2;
    let mut w = vec![0.0; dim];
    w[k as usize] = 1.0; // index 0 is F = M_0
    let one_minus_2a = 1.0 - 2.0 * a;
    for d in x.digits().take(depth as usize) {
        let s = if d == 1 { one_minus_2a } else { a };
        let mut next = vec![0.0; dim];
        // self coefficients: every M_j propagates with s
        for j in 0..=k as usize {
            next[j] += w[j] * s;
        }
        // M_j feeds M_{j-1} with j (digits 0,2) or -2j (digit 1), j >= 2
        for j in 2..=k as usize {
            let c = if d == 1 { -2.0 * j as f64 } else { j as f64 };
            next[j - 1] += w[j] * c;
        }
        if k >= 1 {
            // M_1 feeds F and the constant
            let (u, v) = match d {
                0 => (1.0, 0.0),
                1 => (-2.0, 1.0),
                _ => (1.0, -1.0),
            };
            next[0] += w[1] * u;
            next[dim - 1] += w[1] * v;
        }
        // F feeds the constant
        let t = match d {
            0 => 0.0,
            1 => a,
            _ => 1.0 - a,
        };
        next[dim - 1] += w[0] * t + w[dim - 1];
        w = next;
    }
    // plug in F ≈ 1/2 (error ≤ 1/2) and M_j ≈ 0 (error ≤ sup bound)
    let value = 0.5 * w[0] + w[dim - 1];
    let mut err = 0.5 * w[0].abs();
    for j in 1..=k as usize {
        err += w[j].abs() * sup_bound(j as u32, a);
    }
    Ok(EvalResult {
        value,
        err_bound: err,
        terms: depth as usize,
        exact: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ternary::DigitSource;
    use proptest::prelude::*;

    fn rational(p: u64, q: u64) -> DigitSource {
        DigitSource::from_rational(p, q).unwrap()
    }

    #[test]
    fn series_weights_invariants() {
        for i in 1..100 {
            let a = i as f64 / 100.0;
            let w = series_weights(a);
            assert_eq!((w.q0, w.q1, w.q2), (0.0, a, 1.0 - a));
            assert!(w.b > 0.0 && w.b < 1.0);
            // gamma peaks at 1 where a = |1-2a| = 1/3
            assert!(w.gamma > 0.0 && w.gamma <= 1.0 + 1e-15);
        }
        assert!(EvalParams::new(0.3, 2, 1e-10).is_ok());
        assert!(EvalParams::new(1.2, 2, 1e-10).is_err());
        assert!(EvalParams::new(0.3, 2, 0.0).is_err());
    }

    #[test]
    fn okamoto_f_examples() {
        // F_a(1/3) = a exactly (terminating digit stream)
        let r = okamoto_f(0.7, &rational(1, 3), 1e-12).unwrap();
        assert_eq!(r.value, 0.7);
        assert!(r.exact && r.err_bound == 0.0);

        // F_{1/3} is the identity
        let r = okamoto_f(1.0 / 3.0, &rational(37, 100), 1e-12).unwrap();
        assert!((r.value - 0.37).abs() <= 1e-12 + r.err_bound);

        // Cantor function value F_{1/2}(1/4) = 1/3
        let r = okamoto_f(0.5, &rational(1, 4), 1e-12).unwrap();
        assert!((r.value - 1.0 / 3.0).abs() <= 1e-12 + r.err_bound);
    }

    #[test]
    fn partial_m_examples() {
        // M_{k,a}(0) = 0 exactly
        let zero = DigitSource::finite(vec![]).unwrap();
        let r = partial_m(1, 0.37, &zero, 1e-12).unwrap();
        assert_eq!((r.value, r.exact), (0.0, true));

        // F_a(1/3) = a, so dF/da = 1
        let r = partial_m(1, 0.6, &rational(1, 3), 1e-12).unwrap();
        assert_eq!(r.value, 1.0);

        // F_a(2/3) = 1 - a, so dF/da = -1, exactly
        let r = partial_m(1, 0.5, &rational(2, 3), 1e-12).unwrap();
        assert_eq!((r.value, r.exact), (-1.0, true));

        // d^2/da^2 of a is 0
        let r = partial_m(2, 0.4, &rational(1, 3), 1e-12).unwrap();
        assert_eq!(r.value, 0.0);

        assert!(matches!(
            partial_m(0, 0.4, &rational(1, 3), 1e-12),
            Err(EvalError::InvalidParam { name: "k", .. })
        ));
    }

    #[test]
    fn tail_bound_properties() {
        // k = 0 closed form: b^m / (1-b)
        for &a in &[0.2, 0.45, 0.7] {
            let b = math::decay_base(a);
            for m in 1..20u64 {
                let expect = b.powi(m as i32) / (1.0 - b);
                assert!((tail_bound(0, a, m) - expect).abs() < 1e-12 * expect);
            }
        }
        // monotone decreasing and tending to zero
        for &a in &[0.2, 0.5, 0.8] {
            for k in 0..5u32 {
                let mut prev = f64::INFINITY;
                for m in 1..200u64 {
                    let t = tail_bound(k, a, m);
                    assert!(t <= prev, "a={a} k={k} m={m}");
                    prev = t;
                }
                assert!(tail_bound(k, a, 2000) < 1e-60);
            }
        }
    }

    #[test]
    fn tail_bound_dominates_series_terms() {
        // the bound at m must exceed the absolute value of term m alone
        let x = rational(5, 7);
        for &a in &[0.15, 0.49, 0.5, 0.51, 0.9] {
            for k in 0..=4u32 {
                let mut l = 0u64;
                for (n, d) in x.digits().take(40).enumerate() {
                    let t = series_term(k, a, n as u64, l, d).abs();
                    assert!(
                        tail_bound(k, a, n as u64) >= t * (1.0 - 1e-12),
                        "a={a} k={k} n={n}: bound {} < term {}",
                        tail_bound(k, a, n as u64),
                        t
                    );
                    if d == 1 {
                        l += 1;
                    }
                }
            }
        }
    }

    #[test]
    fn exact_at_rational_examples() {
        for k in 1..=4 {
            assert_eq!(exact_at_rational(k, 0.3, 5, 0), 0.0);
            assert_eq!(exact_at_rational(k, 0.3, 5, 3u64.pow(5)), 0.0);
        }
        assert_eq!(exact_at_rational(0, 0.3, 5, 3u64.pow(5)), 1.0);
        assert_eq!(exact_at_rational(1, 0.5, 1, 1), 1.0);
        assert!((exact_at_rational(0, 0.7, 1, 2) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn exact_at_rational_matches_series() {
        for &a in &[0.25, 0.5, 0.62] {
            for k in 0..=3u32 {
                for n in 1..=5u32 {
                    for j in 0..3u64.pow(n) {
                        let x = rational(j, 3u64.pow(n));
                        let direct = exact_at_rational(k, a, n, j);
                        let via_series = series_eval(k, a, &x, 1e-14).unwrap();
                        assert!(via_series.exact);
                        assert!(
                            (direct - via_series.value).abs() < 1e-12,
                            "k={k} a={a} j/3^{n}={j}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn fe_route_agrees_with_series_route() {
        // k = 0: Cantor function value
        let r = eval_via_fe(0, 0.5, &rational(1, 4), 20).unwrap();
        assert!((r.value - 1.0 / 3.0).abs() <= r.err_bound + 1e-12);
        assert!(r.err_bound < 1e-6);

        // M_{k,a}(1/2) = 0 by symmetry
        for &a in &[0.3, 0.62] {
            let r = eval_via_fe(1, a, &rational(1, 2), 40).unwrap();
            assert!(r.value.abs() <= r.err_bound + 1e-12, "a={a}: {r:?}");
        }

        // cross-evaluator agreement within combined bounds
        for &(k, a) in &[(1u32, 1.0 / 3.0), (2, 0.4), (3, 0.55)] {
            for &(p, q) in &[(1u64, 2u64), (3, 7), (5, 9)] {
                let x = rational(p, q);
                let fe = eval_via_fe(k, a, &x, 45).unwrap();
                let series = partial_m(k, a, &x, 1e-12).unwrap();
                assert!(
                    (fe.value - series.value).abs() <= fe.err_bound + series.err_bound + 1e-10,
                    "k={k} a={a} x={p}/{q}: fe={fe:?} series={series:?}"
                );
            }
        }
    }

    #[test]
    fn symmetry_in_x() {
        // M_{k,a}(1-x) = -M_{k,a}(x)
        for &a in &[0.2, 0.5, 0.77] {
            for k in 1..=3u32 {
                for &(p, q) in &[(1u64, 7u64), (2, 9), (13, 27), (5, 11)] {
                    let x = rational(p, q);
                    let y = x.reflected().unwrap();
                    let mx = series_eval(k, a, &x, 1e-12).unwrap();
                    let my = series_eval(k, a, &y, 1e-12).unwrap();
                    assert!(
                        (mx.value + my.value).abs() <= mx.err_bound + my.err_bound + 1e-11,
                        "k={k} a={a} x={p}/{q}"
                    );
                }
            }
        }
    }

    fn central_stencil(k: u32, a: f64, h: f64, f: &dyn Fn(f64) -> f64) -> f64 {
        match k {
            1 => (f(a + h) - f(a - h)) / (2.0 * h),
            2 => (f(a + h) - 2.0 * f(a) + f(a - h)) / (h * h),
            3 => {
                (f(a + 2.0 * h) - 2.0 * f(a + h) + 2.0 * f(a - h) - f(a - 2.0 * h))
                    / (2.0 * h * h * h)
            }
            4 => {
                (f(a + 2.0 * h) - 4.0 * f(a + h) + 6.0 * f(a) - 4.0 * f(a - h)
                    + f(a - 2.0 * h))
                    / (h * h * h * h)
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn finite_difference_oracle_matches_partial_m() {
        // Richardson-extrapolated central differences of okamoto_f in a
        // against partial_m on a grid of ternary rationals. The k = 4
        // stencil divides by h^4, so its subtractive rounding floor sits
        // near 1e-5 in double precision; the tolerance reflects that, while
        // k <= 3 meets 1e-6.
        let depth = 7u32;
        let pow = 3u64.pow(depth);
        let mut rng = crate::rng::SplitMix64::new(21);
        for trial in 0..50 {
            let a = 0.15 + 0.6 * rng.next_f64();
            let j = 1 + rng.next_u64() % (pow - 1);
            let x = rational(j, pow);
            let f = |aa: f64| okamoto_f(aa, &x, 1e-13).unwrap().value;
            for k in 1..=4u32 {
                let h = if k <= 3 { 0.0025 } else { 0.01 };
                let d1 = central_stencil(k, a, h, &f);
                let d2 = central_stencil(k, a, h / 2.0, &f);
                let oracle = (4.0 * d2 - d1) / 3.0;
                let direct = partial_m(k, a, &x, 1e-12).unwrap().value;
                let tol = if k <= 3 { 1e-6 } else { 2e-4 };
                assert!(
                    (oracle - direct).abs() < tol,
                    "trial {trial}: k={k} a={a} j={j}: oracle {oracle} vs {direct}"
                );
            }
        }
    }

    #[test]
    fn holder_ratio_is_bounded_by_effective_constant() {
        // sup |M(x)-M(y)| / (|x-y|^gamma (log_3 1/|x-y|)^k) <= C_eff
        for &(k, a) in &[(0u32, 0.3), (1, 0.3), (2, 0.6), (1, 0.5)] {
            let b = math::decay_base(a);
            let gamma = math::holder_gamma(a);
            let alpha = if a == 0.5 {
                // a = 1/2 per-term bound k! 4^k (2n+1)^k (1/2)^n fits the same
                // shape with alpha = 2 and the k!4^k prefactor
                2.0
            } else {
                1.0 / a + 2.0 / (1.0 - 2.0 * a).abs()
            };
            let prefactor = if a == 0.5 { factorial(k) * 4f64.powi(k as i32) } else { 1.0 };
            let kk = tail_power_geometric(k, b, 1) / b; // sum (m+1)^k b^m
            let c_eff = 4.0 / b * (alpha + 1.0).powi(k as i32) * kk * prefactor;

            let depth = 20u32;
            let pow = 3u64.pow(depth);
            let mut worst: f64 = 0.0;
            let mut rng = crate::rng::SplitMix64::new(11 + k as u64);
            for _ in 0..300 {
                let j = rng.next_u64() % (pow - 1);
                let d = 3 + (rng.next_u64() % 17) as u32; // gap 3^-d, d in [3,19]
                let gap = 3u64.pow(depth - d);
                if j + gap > pow {
                    continue;
                }
                let vx = exact_at_rational(k, a, depth, j);
                let vy = exact_at_rational(k, a, depth, j + gap);
                let dist = 3f64.powi(-(d as i32));
                let denom = dist.powf(gamma) * (d as f64).powi(k as i32);
                worst = worst.max((vx - vy).abs() / denom);
            }
            assert!(
                worst <= c_eff,
                "k={k} a={a}: worst ratio {worst} exceeds effective constant {c_eff}"
            );
        }
    }

    proptest! {
        #[test]
        fn identity_at_one_third(p in 0u64..10_000, q in 1u64..10_000) {
            prop_assume!(p <= q);
            let x = rational(p, q);
            let r = okamoto_f(1.0 / 3.0, &x, 1e-11).unwrap();
            let expect = p as f64 / q as f64;
            prop_assert!((r.value - expect).abs() <= 1e-11 + r.err_bound);
        }

        #[test]
        fn eval_error_bound_honest_vs_tight_reference(
            p in 1u64..500, q in 2u64..500, a_scaled in 1u64..99
        ) {
            prop_assume!(p < q);
            let a = a_scaled as f64 / 100.0;
            let x = rational(p, q);
            let coarse = series_eval(2, a, &x, 1e-6).unwrap();
            let fine = series_eval(2, a, &x, 1e-13).unwrap();
            // the advertised bound must cover the distance to a much finer value
            prop_assert!(
                (coarse.value - fine.value).abs() <= coarse.err_bound + 1e-12,
                "a={} x={}/{} coarse={:?} fine={:?}", a, p, q, coarse, fine
            );
        }
    }
}
