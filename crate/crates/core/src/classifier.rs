//! Classification of points by the derivative behavior of `M_{k,a}`.
//!
//! The deciding statistics are the 1-frequency limits of the ternary
//! expansion, the square-root-normalized deviation of `l_n` from `(1-2a)n`
//! compared against the scaled roots of the `q_k` polynomials, run lengths
//! of 0s and 2s (at `a = 1/2`), and geometrically weighted tail sums of
//! digit indicators (for `a > 1/2`).
//!
//! Verdicts are honest: where the implemented conditions are only
//! sufficient or only necessary, or where a statistic sits exactly on a
//! boundary, the classifier answers [`Verdict::Inconclusive`] rather than
//! guess. Verdicts derived from windowed estimates of generated streams
//! carry `exactness = false` and are to be read as "consistent with", never
//! as proof.

use serde::Serialize;

use crate::hermite;
use crate::increments;
use crate::math;
use crate::ternary::{self, DigitSource, Fill, FrequencyLimits, Generated, OnesCount};

const PARAM_EPS: f64 = 1e-12;
/// Guard band for comparisons of exact (rational) statistics against
/// transcendental boundaries.
const EXACT_GUARD: f64 = 1e-9;

/// Spectral data of the parameter `a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CharacteristicValues {
    /// Critical 1-frequency `phi(a)`, on `[0, 2/3]`.
    pub phi: f64,
    /// `1/(log a - log|1-2a|)`; undefined at `a = 1/3` and `a = 1/2`.
    pub c0: Option<f64>,
    /// Hölder exponent `-log_3 max(a, |1-2a|)`.
    pub gamma: f64,
    /// `d(a) = h(phi(a))`.
    pub d: f64,
    /// `h(1-2a)`, defined for `a <= 1/2`.
    pub d_tilde: Option<f64>,
}

/// The three special parameter constants of the theory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpecialConstants {
    /// Unique real root of `54a^3 - 27a^2 = 1`.
    pub a0: f64,
    /// Unique root in `(0,1)` of `sum_j t_j a^j = 1` over the Thue-Morse
    /// sequence; reciprocal of the Komornik-Loreti constant.
    pub a_hat: f64,
    /// `2/(1+sqrt 5)`, reciprocal of the golden ratio.
    pub inv_golden: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    /// Finite derivative exists and equals 0 (the only possible finite value).
    FiniteZero,
    PlusInfinity,
    MinusInfinity,
    /// Within the queried operation: neither the finite (resp. infinite)
    /// derivative condition holds.
    NotDifferentiable,
    Inconclusive,
}

/// A classification verdict with the condition that fired.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointClass {
    pub verdict: Verdict,
    /// Identifier of the deciding condition.
    pub reason: String,
    /// False whenever the decision rests on windowed estimates.
    pub exactness: bool,
    pub stats: FrequencyLimits,
}

/// Size regimes of the set of infinite-derivative points for `a > 1/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    Empty,
    CountableRational,
    DimensionZero,
    PositiveDimension,
}

/// Which one-sided weighted tail sum to take: `Plus` sums indicators of
/// digit 2 (right derivative), `Minus` of digit 0 (left derivative).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailSide {
    Plus,
    Minus,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ClassifyError {
    InvalidParam { name: &'static str, reason: String },
    /// A digit 1 persists past the horizon, so the weighted tail sums do
    /// not classify the point.
    OnesPersist { position: u64 },
}

impl std::fmt::Display for ClassifyError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ClassifyError::InvalidParam { name, reason } => {
                write!(f, "invalid parameter {name}: {reason}")
            }
            ClassifyError::OnesPersist { position } => {
                write!(f, "digit 1 at position {position} persists past horizon")
            }
        }
    }
}

impl std::error::Error for ClassifyError {}

fn invalid(name: &'static str, reason: String) -> ClassifyError {
    ClassifyError::InvalidParam { name, reason }
}

/// `phi`, `C_0`, Hölder exponent, and the dimension values at `a`.
///
/// `phi` and `d` require `a` in `[0, 2/3]`; `C_0` is undefined at `1/3` and
/// `1/2` and `d_tilde = h(1-2a)` is undefined for `a > 1/2` (both are
/// reported as `None`, never as a number).
pub fn characteristic_values(a: f64) -> Result<CharacteristicValues, ClassifyError> {
    if !(0.0..=2.0 / 3.0 + PARAM_EPS).contains(&a) {
        return Err(invalid("a", format!("phi and d need a in [0, 2/3], got {a}")));
    }
    let phi = math::phi(a);
    Ok(CharacteristicValues {
        phi,
        c0: math::c0(a),
        gamma: math::holder_gamma(a),
        d: math::entropy_h(phi),
        d_tilde: if a <= 0.5 { Some(math::entropy_h(1.0 - 2.0 * a)) } else { None },
    })
}

/// Dimension of the set of points with ternary 1-frequency `p`.
pub fn entropy_h(p: f64) -> Result<f64, ClassifyError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid("p", format!("need p in [0,1], got {p}")));
    }
    Ok(math::entropy_h(p))
}

/// `j`-th term of the Thue-Morse sequence (parity of the binary digit sum).
pub fn thue_morse_bit(j: u64) -> u8 {
    (j.count_ones() & 1) as u8
}

/// Computes the three special constants by bisection with explicit
/// truncation control.
pub fn special_constants() -> SpecialConstants {
    // 54a^3 - 27a^2 - 1 is increasing on [1/2, 1)
    let cubic = |a: f64| 54.0 * a * a * a - 27.0 * a * a - 1.0;
    let a0 = bisect(cubic, 0.5, 0.62);

    // sum_{j>=1} t_j a^j - 1, truncated where the geometric tail is < 1e-16
    let tm_sum = |a: f64| {
        let mut s = -1.0;
        let mut w = 1.0;
        for j in 1..=256u64 {
            w *= a;
            if thue_morse_bit(j) == 1 {
                s += w;
            }
        }
        s
    };
    let a_hat = bisect(tm_sum, 0.5, 0.62);

    SpecialConstants {
        a0,
        a_hat,
        inv_golden: 2.0 / (1.0 + 5f64.sqrt()),
    }
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    debug_assert!(f(lo) < 0.0 && f(hi) > 0.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Size regime of the infinite-derivative sets for `a in (1/2, 1)`.
pub fn univoque_regime(a: f64) -> Result<Regime, ClassifyError> {
    if !(a > 0.5 && a < 1.0) {
        return Err(invalid("a", format!("need a in (1/2,1), got {a}")));
    }
    let c = special_constants();
    Ok(if a >= c.inv_golden {
        Regime::Empty
    } else if (a - c.a_hat).abs() <= PARAM_EPS {
        Regime::DimensionZero
    } else if a > c.a_hat {
        Regime::CountableRational
    } else {
        Regime::PositiveDimension
    })
}

/// Geometrically weighted tail statistic
/// `limsup_n sum_{j>=1} a^j [x_{n+j} = d]`, with `d = 2` for `Plus` and
/// `d = 0` for `Minus`. Exact for eventually periodic sources; a windowed
/// lower estimate otherwise. Rejects sources in which a digit 1 persists
/// past the horizon.
pub fn limsup_tail(
    a: f64,
    x: &DigitSource,
    side: TailSide,
    horizon: u64,
) -> Result<(f64, bool), ClassifyError> {
    if !(a > 0.5 && a < 1.0) {
        return Err(invalid("a", format!("need a in (1/2,1), got {a}")));
    }
    let d = match side {
        TailSide::Plus => 2u8,
        TailSide::Minus => 0u8,
    };
    match x {
        DigitSource::Finite(_) => Ok((if d == 0 { a / (1.0 - a) } else { 0.0 }, true)),
        DigitSource::EventuallyPeriodic { preperiod, period } => {
            if period.contains(&1) {
                return Err(ClassifyError::OnesPersist {
                    position: preperiod.len() as u64
                        + 1
                        + period.iter().position(|&v| v == 1).unwrap() as u64,
                });
            }
            let p = period.len();
            let geo = 1.0 - a.powi(p as i32);
            let mut best = f64::NEG_INFINITY;
            for offset in 0..p {
                let mut s = 0.0;
                let mut w = 1.0;
                for r in 1..=p {
                    w *= a;
                    if period[(offset + r) % p] == d {
                        s += w;
                    }
                }
                best = best.max(s / geo);
            }
            Ok((best, true))
        }
        DigitSource::Generated(_) => {
            // window length making the neglected geometric tail < 1e-12
            let t = ((1e-12 * (1.0 - a)).ln() / a.ln()).ceil() as u64;
            let digits: Vec<u8> = x.digits().take((horizon + t) as usize).collect();
            if let Some(pos) = digits.iter().rposition(|&v| v == 1) {
                return Err(ClassifyError::OnesPersist {
                    position: pos as u64 + 1,
                });
            }
            let mut best = f64::NEG_INFINITY;
            for n in (horizon / 2)..horizon {
                let mut s = 0.0;
                let mut w = 1.0;
                for j in 1..=t {
                    w *= a;
                    if digits[(n + j - 1) as usize] == d {
                        s += w;
                    }
                }
                best = best.max(s);
            }
            Ok((best, false))
        }
    }
}

/// Point with `M_{k,a}' = 0` but no finite derivative of `M_{k+1,a}`:
/// a generated stream with 1s at the `b_n` positions. The construction is
/// proven for `a in (0, 1/3)` only and is rejected outside.
pub fn boundary_point(k: u32, a: f64, delta: f64) -> Result<DigitSource, ClassifyError> {
    DigitSource::generated(Generated::BnOnes {
        k,
        a,
        delta,
        fill: Fill::Zeros,
    })
    .map_err(|e| invalid("family", e.to_string()))
}

/// Sign and log-magnitude of the secant slope `3^n delta(I_n(x))` at the
/// depth-`n` interval containing `x`.
pub fn secant_trend(k: u32, a: f64, x: &DigitSource, n: u64) -> (i8, f64) {
    let l_n = x.digits().take(n as usize).filter(|&d| d == 1).count() as u64;
    increments::secant_slope_log(k, a, n, l_n)
}

fn check_classify_args(k: u32, a: f64, horizon: u64) -> Result<(), ClassifyError> {
    if k < 1 {
        return Err(invalid("k", "need k >= 1".into()));
    }
    if !(a > 0.0 && a < 1.0) {
        return Err(invalid("a", format!("need a in (0,1), got {a}")));
    }
    if horizon < 64 {
        return Err(invalid("horizon", format!("need horizon >= 64, got {horizon}")));
    }
    Ok(())
}

fn verdict(
    verdict: Verdict,
    reason: impl Into<String>,
    x: &DigitSource,
    stats: FrequencyLimits,
) -> PointClass {
    PointClass {
        verdict,
        reason: reason.into(),
        exactness: x.is_exact(),
        stats,
    }
}

fn sign_verdict(parity_even: bool) -> Verdict {
    if parity_even {
        Verdict::PlusInfinity
    } else {
        Verdict::MinusInfinity
    }
}

/// Margin for comparisons of windowed frequency estimates.
fn windowed_margin(window: u64) -> f64 {
    4.0 / (window as f64).sqrt() + 0.01
}

/// Does `M_{k,a}` have a finite derivative (necessarily 0) at `x`?
///
/// Returns `FiniteZero`, `NotDifferentiable` (here: *no finite derivative*,
/// an infinite one may still exist), or `Inconclusive`. For
/// `a >= 2/3` and `a = 1/3` the answer is unconditional; for `a = 1/2` the
/// digit criterion "some `l_n = k+1` strictly inside an interval" is
/// decidable from exact sources; otherwise the drift of
/// `r_n = l_n - n phi(a)` against `+-k C_0 log n` decides, symbolically for
/// eventually periodic sources and by a windowed trend fit for generated
/// ones.
pub fn classify_finite(
    k: u32,
    a: f64,
    x: &DigitSource,
    horizon: u64,
) -> Result<PointClass, ClassifyError> {
    check_classify_args(k, a, horizon)?;
    let stats = ternary::frequency_limits(x, a, horizon);

    if a >= 2.0 / 3.0 {
        return Ok(verdict(Verdict::NotDifferentiable, "a-ge-two-thirds", x, stats));
    }
    if (a - 1.0 / 3.0).abs() <= PARAM_EPS {
        return Ok(verdict(Verdict::NotDifferentiable, "a-eq-one-third", x, stats));
    }
    if (a - 0.5).abs() <= PARAM_EPS {
        return Ok(classify_finite_half(k, x, horizon, stats));
    }

    let phi = math::phi(a);
    let c0 = math::c0(a).expect("c0 defined away from 1/3 and 1/2");
    // below 1/3 the criterion is r_n + k|C0| log n -> -inf;
    // above it is r_n - k C0 log n -> +inf
    let below_third = a < 1.0 / 3.0;

    if stats.exact {
        let lambda = stats.lambda_lo;
        let drift = lambda - phi;
        if drift.abs() <= PARAM_EPS {
            return Ok(verdict(
                Verdict::Inconclusive,
                "frequency-at-phi-resolution",
                x,
                stats,
            ));
        }
        let finite = if below_third { drift < 0.0 } else { drift > 0.0 };
        return Ok(if finite {
            verdict(
                Verdict::FiniteZero,
                if below_third { "frequency-below-phi" } else { "frequency-above-phi" },
                x,
                stats,
            )
        } else {
            verdict(Verdict::NotDifferentiable, "r-drift-against-criterion", x, stats)
        });
    }

    // windowed analysis for generated sources
    let margin = windowed_margin(horizon);
    if stats.lambda_hi < phi - margin {
        return Ok(if below_third {
            verdict(Verdict::FiniteZero, "frequency-below-phi", x, stats)
        } else {
            verdict(Verdict::NotDifferentiable, "r-drift-against-criterion", x, stats)
        });
    }
    if stats.lambda_lo > phi + margin {
        return Ok(if below_third {
            verdict(Verdict::NotDifferentiable, "r-drift-against-criterion", x, stats)
        } else {
            verdict(Verdict::FiniteZero, "frequency-above-phi", x, stats)
        });
    }

    // frequency close to phi: fit the slope of the criterion statistic
    // s(n) = r_n -+ k C0-term against log n over a geometric window
    let slope = criterion_slope(k, x, horizon, phi, c0, below_third);
    let theta = 0.05 * c0.abs();
    let wants_decrease = below_third; // s -> -inf for a < 1/3, +inf above
    let decided = if slope.abs() <= theta {
        None
    } else if (slope < 0.0) == wants_decrease {
        Some(true)
    } else {
        Some(false)
    };
    Ok(match decided {
        Some(true) => verdict(Verdict::FiniteZero, "criterion-trend-decisive", x, stats),
        Some(false) => verdict(Verdict::NotDifferentiable, "criterion-trend-against", x, stats),
        None => verdict(Verdict::Inconclusive, "criterion-trend-flat", x, stats),
    })
}

/// Slope of `s(n) = r_n + sign * k |C0| log n` against `log n`, from two
/// window-averaged samples an octave-cubed apart.
fn criterion_slope(
    k: u32,
    x: &DigitSource,
    horizon: u64,
    phi: f64,
    c0: f64,
    below_third: bool,
) -> f64 {
    let log_coeff = if below_third {
        k as f64 * c0.abs()
    } else {
        -(k as f64) * c0
    };
    let n2 = horizon;
    let n1 = (horizon / 8).max(32);
    let window = |hi: u64| (hi - hi / 4, hi);
    let (a1, b1) = window(n1);
    let (a2, b2) = window(n2);
    let mut l = 0u64;
    let (mut s1, mut c1) = (0.0, 0u64);
    let (mut s2, mut c2) = (0.0, 0u64);
    for (idx, d) in x.digits().take(n2 as usize).enumerate() {
        let n = idx as u64 + 1;
        if d == 1 {
            l += 1;
        }
        let in1 = n >= a1 && n <= b1;
        let in2 = n >= a2 && n <= b2;
        if in1 || in2 {
            let s = l as f64 - n as f64 * phi + log_coeff * (n as f64).ln();
            if in1 {
                s1 += s;
                c1 += 1;
            }
            if in2 {
                s2 += s;
                c2 += 1;
            }
        }
    }
    let mean1 = s1 / c1 as f64;
    let mean2 = s2 / c2 as f64;
    (mean2 - mean1) / ((n2 as f64).ln() - (n1 as f64).ln())
}

fn classify_finite_half(
    k: u32,
    x: &DigitSource,
    horizon: u64,
    stats: FrequencyLimits,
) -> PointClass {
    // finite derivative iff some n has l_n = k+1 with 3^n x not an integer
    match x.ones_count() {
        OnesCount::Infinite => verdict(
            Verdict::FiniteZero,
            "one-count-passes-k-plus-one-interior",
            x,
            stats,
        ),
        OnesCount::Finite(c) => {
            if c < k as u64 + 1 {
                return verdict(Verdict::NotDifferentiable, "fewer-than-k-plus-one-ones", x, stats);
            }
            if c > k as u64 + 1 {
                return verdict(
                    Verdict::FiniteZero,
                    "one-count-passes-k-plus-one-interior",
                    x,
                    stats,
                );
            }
            // exactly k+1 ones: flat interval exists unless the expansion
            // terminates at the last 1
            let terminates_at_last_one = match x {
                DigitSource::Finite(digits) => digits.last() == Some(&1),
                _ => false,
            };
            if terminates_at_last_one {
                verdict(Verdict::NotDifferentiable, "terminates-at-last-one", x, stats)
            } else {
                verdict(
                    Verdict::FiniteZero,
                    "one-count-passes-k-plus-one-interior",
                    x,
                    stats,
                )
            }
        }
        OnesCount::Unknown => {
            // scan the window for the (k+2)-th 1; anything beyond k+1
            // witnesses the interior condition
            let mut seen = 0u64;
            for d in x.digits().take(horizon as usize) {
                if d == 1 {
                    seen += 1;
                    if seen >= k as u64 + 2 {
                        return verdict(
                            Verdict::FiniteZero,
                            "one-count-passes-k-plus-one-interior",
                            x,
                            stats,
                        );
                    }
                }
            }
            verdict(Verdict::Inconclusive, "one-count-unresolved-at-horizon", x, stats)
        }
    }
}

/// Does `M_{k,a}` have an infinite derivative at `x`, and of which sign?
///
/// Returns `PlusInfinity` / `MinusInfinity`, `NotDifferentiable` (here: *no
/// infinite derivative*; a finite one may still exist), or `Inconclusive`
/// where the statistic lands between necessary and sufficient conditions or
/// exactly on a threshold.
pub fn classify_infinite(
    k: u32,
    a: f64,
    x: &DigitSource,
    horizon: u64,
) -> Result<PointClass, ClassifyError> {
    check_classify_args(k, a, horizon)?;
    let stats = ternary::frequency_limits(x, a, horizon);
    if (a - 0.5).abs() <= PARAM_EPS {
        return Ok(classify_infinite_half(k, x, horizon, stats));
    }
    if a > 0.5 {
        return classify_infinite_high(k, a, x, horizon, stats);
    }
    Ok(classify_infinite_low(k, a, x, horizon, stats))
}

fn classify_infinite_low(
    k: u32,
    a: f64,
    x: &DigitSource,
    horizon: u64,
    stats: FrequencyLimits,
) -> PointClass {
    let phi = math::phi(a);
    let c = 1.0 - 2.0 * a;
    let near_third = (a - 1.0 / 3.0).abs() <= PARAM_EPS;
    let g = if stats.exact { PARAM_EPS } else { windowed_margin(horizon) };
    let (lo, hi) = (stats.lambda_lo, stats.lambda_hi);
    let k_parity_even = k % 2 == 0;

    // frequency straddles the critical value: increments change sign
    if lo < c - g && hi > c + g {
        return verdict(
            Verdict::NotDifferentiable,
            "frequency-straddles-one-minus-2a",
            x,
            stats,
        );
    }

    if near_third {
        if hi < c - g {
            return verdict(Verdict::PlusInfinity, "frequency-below-one-third", x, stats);
        }
        if lo > c + g {
            return verdict(
                sign_verdict(k_parity_even),
                "frequency-above-one-third",
                x,
                stats,
            );
        }
    } else if a < 1.0 / 3.0 {
        // here phi(a) < 1-2a
        if lo < phi - g {
            return verdict(Verdict::NotDifferentiable, "frequency-below-phi", x, stats);
        }
        if lo > c + g {
            return verdict(
                sign_verdict(k_parity_even),
                "frequency-above-one-minus-2a",
                x,
                stats,
            );
        }
        if lo > phi + g && hi < c - g {
            return verdict(Verdict::PlusInfinity, "frequency-in-middle-band", x, stats);
        }
        if (lo - phi).abs() <= g {
            return verdict(Verdict::Inconclusive, "frequency-at-phi", x, stats);
        }
    } else {
        // 1/3 < a < 1/2: here 1-2a < phi(a)
        if hi > phi + g {
            return verdict(Verdict::NotDifferentiable, "frequency-above-phi", x, stats);
        }
        if hi < c - g {
            return verdict(Verdict::PlusInfinity, "frequency-below-one-minus-2a", x, stats);
        }
        if lo > c + g && hi < phi - g {
            return verdict(
                sign_verdict(k_parity_even),
                "frequency-in-middle-band",
                x,
                stats,
            );
        }
        if (hi - phi).abs() <= g {
            return verdict(Verdict::Inconclusive, "frequency-at-phi", x, stats);
        }
    }

    // frequency pinned at 1-2a: the sqrt(n)-scale deviation against the
    // scaled polynomial roots decides (the non-vanishing condition
    // 3^n a^(n-l) (1-2a)^l >= 1 holds automatically in this regime)
    if (lo - c).abs() <= g && (hi - c).abs() <= g {
        let thresholds = match hermite::thresholds(k, a) {
            Ok(t) => t.scaled,
            Err(_) => return verdict(Verdict::Inconclusive, "thresholds-unavailable", x, stats),
        };
        let gd = if stats.exact { EXACT_GUARD } else { 0.05 };
        let (d_lo, d_hi) = (stats.delta_lo, stats.delta_hi);
        // straddle: a threshold strictly inside the delta range
        if thresholds.iter().any(|&t| d_lo + gd < t && t < d_hi - gd) {
            return verdict(
                Verdict::NotDifferentiable,
                "delta-straddles-threshold",
                x,
                stats,
            );
        }
        // boundary hit
        if thresholds
            .iter()
            .any(|&t| (t - d_lo).abs() <= gd || (t - d_hi).abs() <= gd)
        {
            return verdict(Verdict::Inconclusive, "delta-at-threshold", x, stats);
        }
        let band = thresholds.iter().filter(|&&t| t < d_lo).count() as u32;
        return verdict(
            sign_verdict((k - band) % 2 == 0),
            format!("delta-band-{band}"),
            x,
            stats,
        );
    }
    verdict(Verdict::Inconclusive, "frequency-band-unresolved", x, stats)
}

fn classify_infinite_half(
    k: u32,
    x: &DigitSource,
    horizon: u64,
    stats: FrequencyLimits,
) -> PointClass {
    const EIDSWICK_C: f64 = 0.584962500721156; // log2(3) - 1
    let ones = match x.ones_count() {
        OnesCount::Infinite => {
            return verdict(Verdict::NotDifferentiable, "more-than-k-ones", x, stats)
        }
        OnesCount::Finite(c) => c,
        OnesCount::Unknown => {
            let seen = x.digits().take(horizon as usize).filter(|&d| d == 1).count() as u64;
            if seen > k as u64 {
                return verdict(Verdict::NotDifferentiable, "more-than-k-ones", x, stats);
            }
            return verdict(Verdict::Inconclusive, "one-count-unresolved-at-horizon", x, stats);
        }
    };
    if ones > k as u64 {
        return verdict(Verdict::NotDifferentiable, "more-than-k-ones", x, stats);
    }
    let l = ones as u32;
    match x {
        // terminating expansions have an infinite tail run of 0s
        DigitSource::Finite(_) => {
            verdict(Verdict::NotDifferentiable, "terminating-tail-run", x, stats)
        }
        // eventually periodic, with 1-free period: run lengths are bounded,
        // so both the Eidswick condition (l = k) and the logarithmic run
        // bound (l < k) hold from some point on
        DigitSource::EventuallyPeriodic { .. } => {
            if l == k {
                verdict(sign_verdict(k % 2 == 0), "eidswick-bounded-runs", x, stats)
            } else {
                verdict(sign_verdict(l % 2 == 0), "bounded-runs-below-log-bound", x, stats)
            }
        }
        DigitSource::Generated(_) => {
            // windowed run-length analysis over the tail half
            let digits: Vec<u8> = x.digits().take(horizon as usize).collect();
            let mut run_ahead = vec![1u64; digits.len()];
            for i in (0..digits.len() - 1).rev() {
                if digits[i] == digits[i + 1] {
                    run_ahead[i] = run_ahead[i + 1] + 1;
                }
            }
            let start = (horizon / 4) as usize;
            let tail_runs = (start..digits.len()).map(|i| (i as u64 + 1, run_ahead[i]));
            if l == k {
                let ok = tail_runs
                    .clone()
                    .all(|(n, r)| (r as f64) < 0.5 * EIDSWICK_C * n as f64);
                if ok {
                    verdict(sign_verdict(k % 2 == 0), "eidswick-consistent", x, stats)
                } else {
                    verdict(Verdict::Inconclusive, "run-length-near-linear", x, stats)
                }
            } else {
                let bound = |n: u64| (n as f64).log2() - f64::from(k - l).log2();
                let sufficient = tail_runs.clone().all(|(n, r)| r as f64 <= bound(n) - 2.0);
                let violations = tail_runs.filter(|&(n, r)| r as f64 > bound(n)).count();
                if sufficient {
                    verdict(sign_verdict(l % 2 == 0), "runs-within-log-bound", x, stats)
                } else if violations > 8 {
                    verdict(Verdict::NotDifferentiable, "runs-exceed-log-bound", x, stats)
                } else {
                    verdict(Verdict::Inconclusive, "run-length-gap", x, stats)
                }
            }
        }
    }
}

fn classify_infinite_high(
    k: u32,
    a: f64,
    x: &DigitSource,
    horizon: u64,
    stats: FrequencyLimits,
) -> Result<PointClass, ClassifyError> {
    let _ = k; // the conditions for a > 1/2 do not depend on k
    let ones = match x.ones_count() {
        OnesCount::Infinite => {
            return Ok(verdict(
                Verdict::NotDifferentiable,
                "ones-recur-increment-signs-alternate",
                x,
                stats,
            ))
        }
        OnesCount::Finite(c) => Some(c),
        OnesCount::Unknown => None,
    };
    let ones = match ones {
        Some(c) => c,
        None => {
            let digits: Vec<u8> = x.digits().take(horizon as usize).collect();
            match digits.iter().rposition(|&d| d == 1) {
                Some(pos) if pos as u64 >= horizon / 2 => {
                    return Ok(verdict(
                        Verdict::NotDifferentiable,
                        "ones-persist-in-window",
                        x,
                        stats,
                    ))
                }
                _ => digits.iter().filter(|&&d| d == 1).count() as u64,
            }
        }
    };
    let l_parity_even = ones % 2 == 0;
    let (l_plus, exact_p) = limsup_tail(a, x, TailSide::Plus, horizon)?;
    let (l_minus, exact_m) = limsup_tail(a, x, TailSide::Minus, horizon)?;
    let exact = exact_p && exact_m;
    let g = if exact { EXACT_GUARD } else { 0.01 };
    let class = if l_plus < 1.0 - g && l_minus < 1.0 - g {
        verdict(
            sign_verdict(l_parity_even),
            "weighted-tails-below-one",
            x,
            stats,
        )
    } else if l_plus > 1.0 + g || l_minus > 1.0 + g {
        verdict(Verdict::NotDifferentiable, "weighted-tail-above-one", x, stats)
    } else {
        verdict(Verdict::Inconclusive, "weighted-tail-at-one", x, stats)
    };
    Ok(class)
}

/// Full verdict, merging the finite- and infinite-derivative analyses.
pub fn classify(k: u32, a: f64, x: &DigitSource, horizon: u64) -> Result<PointClass, ClassifyError> {
    let fin = classify_finite(k, a, x, horizon)?;
    let inf = classify_infinite(k, a, x, horizon)?;
    let is_infinite = matches!(inf.verdict, Verdict::PlusInfinity | Verdict::MinusInfinity);
    Ok(match (fin.verdict, is_infinite) {
        (Verdict::FiniteZero, true) => {
            // mutually exclusive claims: trust an exact one over an estimate
            if fin.exactness && !inf.exactness {
                fin
            } else if inf.exactness && !fin.exactness {
                inf
            } else {
                PointClass {
                    verdict: Verdict::Inconclusive,
                    reason: format!("conflicting-criteria({} vs {})", fin.reason, inf.reason),
                    exactness: false,
                    stats: fin.stats,
                }
            }
        }
        (_, true) => inf,
        (Verdict::FiniteZero, false) => fin,
        (Verdict::NotDifferentiable, false) => match inf.verdict {
            Verdict::NotDifferentiable => PointClass {
                verdict: Verdict::NotDifferentiable,
                reason: format!("{}; {}", fin.reason, inf.reason),
                exactness: fin.exactness && inf.exactness,
                stats: fin.stats,
            },
            _ => PointClass {
                verdict: Verdict::Inconclusive,
                reason: inf.reason,
                exactness: false,
                stats: fin.stats,
            },
        },
        (Verdict::Inconclusive, false) => fin,
        _ => fin,
    })
}
