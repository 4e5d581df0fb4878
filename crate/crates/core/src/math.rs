//! Shared scalar functions of the family parameter `a`.
//!
//! These are used by several modules; the public API around them lives in
//! [`crate::classifier`].

/// Base of the geometric decay of the defining series: `b = max(a, |1-2a|)`.
#[inline]
pub(crate) fn decay_base(a: f64) -> f64 {
    a.max((1.0 - 2.0 * a).abs())
}

/// Hölder exponent `gamma = -log_3 max(a, |1-2a|)`.
#[inline]
pub(crate) fn holder_gamma(a: f64) -> f64 {
    -decay_base(a).ln() / 3f64.ln()
}

/// Critical frequency of ternary 1s, `phi(a) = log(3a) / (log a - log|1-2a|)`,
/// extended continuously by `phi(0) = 1`, `phi(1/3) = 1/3`, `phi(1/2) = 0`.
pub(crate) fn phi(a: f64) -> f64 {
    if a == 0.0 {
        return 1.0;
    }
    if (a - 0.5).abs() < 1e-15 {
        return 0.0;
    }
    // The quotient is 0/0 at a = 1/3; both parts vanish linearly, so close to
    // the singularity we return the limit value.
    if (a - 1.0 / 3.0).abs() < 1e-9 {
        return 1.0 / 3.0;
    }
    (3.0 * a).ln() / (a.ln() - (1.0 - 2.0 * a).abs().ln())
}

/// `C_0(a) = 1 / (log a - log|1-2a|)`, undefined at `a = 1/3` and `a = 1/2`.
pub(crate) fn c0(a: f64) -> Option<f64> {
    if (a - 1.0 / 3.0).abs() < 1e-12 || (a - 0.5).abs() < 1e-12 {
        return None;
    }
    Some(1.0 / (a.ln() - (1.0 - 2.0 * a).abs().ln()))
}

/// Dimension of the level set of 1-frequency `p`:
/// `h(p) = (-p log p - (1-p) log(1-p) + (1-p) log 2) / log 3`, with `0 log 0 = 0`.
pub(crate) fn entropy_h(p: f64) -> f64 {
    debug_assert!((0.0..=1.0).contains(&p));
    let xlx = |x: f64| if x <= 0.0 { 0.0 } else { x * x.ln() };
    (-xlx(p) - xlx(1.0 - p) + (1.0 - p) * 2f64.ln()) / 3f64.ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_special_values() {
        assert_eq!(phi(0.0), 1.0);
        assert_eq!(phi(1.0 / 3.0), 1.0 / 3.0);
        assert_eq!(phi(0.5), 0.0);
        // continuous extension at 2/3 evaluates to 1 by the formula
        assert!((phi(2.0 / 3.0) - 1.0).abs() < 1e-12);
        assert!((phi(0.2) - 0.46497352071792725).abs() < 1e-12);
    }

    #[test]
    fn phi_is_monotone_on_each_side_of_one_half() {
        let grid: Vec<f64> = (0..=500).map(|i| i as f64 / 1000.0).collect();
        for w in grid.windows(2) {
            assert!(phi(w[0]) > phi(w[1]), "phi not decreasing at {}", w[0]);
        }
        let grid: Vec<f64> = (500..=666).map(|i| i as f64 / 1000.0).collect();
        for w in grid.windows(2) {
            assert!(phi(w[0]) < phi(w[1]), "phi not increasing at {}", w[0]);
        }
    }

    #[test]
    fn c0_sign_and_definedness() {
        assert!(c0(0.2).unwrap() < 0.0);
        assert!(c0(0.4).unwrap() > 0.0);
        assert!(c0(1.0 / 3.0).is_none());
        assert!(c0(0.5).is_none());
        assert!((c0(0.2).unwrap() + 0.9102392266268375).abs() < 1e-12);
    }

    #[test]
    fn entropy_values() {
        assert!((entropy_h(1.0 / 3.0) - 1.0).abs() < 1e-14);
        assert!((entropy_h(0.0) - 2f64.ln() / 3f64.ln()).abs() < 1e-15);
        assert_eq!(entropy_h(1.0), 0.0);
    }

    #[test]
    fn phi_bracketing_inequalities() {
        // 0 < a < 1/3  =>  1/3 < phi(a) < 1-2a; reversed on (1/3, 1/2)
        for i in 1..333 {
            let a = i as f64 / 1000.0;
            assert!(1.0 / 3.0 < phi(a) && phi(a) < 1.0 - 2.0 * a, "a={a}");
        }
        for i in 336..499 {
            let a = i as f64 / 1000.0;
            assert!(1.0 / 3.0 > phi(a) && phi(a) > 1.0 - 2.0 * a, "a={a}");
        }
    }
}
