//! Ternary digit expansions of points in `[0,1]` and their statistics.
//!
//! A [`DigitSource`] identifies a point by its base-3 digit stream. Sources
//! are immutable after construction and digit queries are pure, so they can
//! be shared freely across threads. Digit positions are 1-indexed: the
//! expansion of `x` is `0.x_1 x_2 x_3 …` and `digit_at(i)` returns `x_i`.
//!
//! Ternary rationals are stored in the terminating form (the expansion
//! ending in all zeros); the single exception is the point 1 itself, which
//! is kept as the periodic stream `0.222…`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_integer::Integer;
use serde::Serialize;

use crate::math;
use crate::rng;

/// How the free (unconstrained) digits of a generated source are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fill {
    /// Every free digit is 0.
    Zeros,
    /// Every free digit is 2.
    Twos,
    /// Free digits drawn from {0,2} by a position-addressable stream.
    Seeded(u64),
}

impl Fill {
    #[inline]
    fn digit(self, position: u64) -> u8 {
        match self {
            Fill::Zeros => 0,
            Fill::Twos => 2,
            Fill::Seeded(seed) => {
                if rng::at(seed, position) & 1 == 0 {
                    0
                } else {
                    2
                }
            }
        }
    }
}

/// Rule-generated digit streams. All are deterministic given their
/// parameters; queries at arbitrary positions are pure.
#[derive(Debug, Clone, PartialEq)]
pub enum Generated {
    /// 1s exactly at the positions `b_n = floor(n/phi(a) - (k+delta)/log(3a) * log n)`,
    /// free digits elsewhere. Valid for `a in (0,1/3)`, `delta in (0,1)`.
    BnOnes { k: u32, a: f64, delta: f64, fill: Fill },
    /// Digits in {0,2} with a forced 0 at positions `== m-1 (mod m)` and a
    /// forced 2 at positions `== 0 (mod m)`; runs of equal digits are
    /// therefore shorter than `2m`.
    BoundedRun { m: u64, fill: Fill },
    /// The three-state digit chain with stationary vector `[a, 1-2a, a]`;
    /// `p` is the 1-to-1 transition probability.
    Markov { a: f64, p: f64, seed: u64 },
    /// 1s placed so that `l_n` tracks `round((1-2a)n - delta*sqrt(n))`,
    /// i.e. the centered statistic `((1-2a)n - l_n)/sqrt(n)` converges
    /// to `delta`.
    DeltaSqrt { a: f64, delta: f64, fill: Fill },
}

/// A ternary digit stream identifying a point of `[0,1]`.
#[derive(Debug, Clone, PartialEq)]
pub enum DigitSource {
    /// Terminating expansion; digits beyond the prefix are all 0.
    Finite(Vec<u8>),
    /// `0.(preperiod)(period)(period)…` with a nonempty period.
    EventuallyPeriodic { preperiod: Vec<u8>, period: Vec<u8> },
    /// Rule-generated stream.
    Generated(Generated),
}

/// Errors from digit-source construction and parsing.
#[derive(Debug, Clone, PartialEq)]
pub enum TernaryError {
    ZeroDenominator,
    NumeratorExceedsDenominator { p: u64, q: u64 },
    InvalidDigit(u8),
    EmptyPeriod,
    /// A generated-family parameter is outside its validity range.
    InvalidParam { name: &'static str, reason: String },
    /// The expansion of `p/q` would need more digits than the safety cap.
    PeriodTooLong { denominator: u64 },
    Parse(String),
}

impl fmt::Display for TernaryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TernaryError::ZeroDenominator => write!(f, "denominator must be nonzero"),
            TernaryError::NumeratorExceedsDenominator { p, q } => {
                write!(f, "numerator {p} exceeds denominator {q}; need p/q in [0,1]")
            }
            TernaryError::InvalidDigit(d) => write!(f, "digit {d} not in {{0,1,2}}"),
            TernaryError::EmptyPeriod => write!(f, "period must be nonempty"),
            TernaryError::InvalidParam { name, reason } => {
                write!(f, "invalid parameter {name}: {reason}")
            }
            TernaryError::PeriodTooLong { denominator } => {
                write!(f, "expansion of rational with denominator {denominator} exceeds digit cap")
            }
            TernaryError::Parse(msg) => write!(f, "cannot parse digit source: {msg}"),
        }
    }
}

impl std::error::Error for TernaryError {}

fn check_digits(digits: &[u8]) -> Result<(), TernaryError> {
    match digits.iter().find(|&&d| d > 2) {
        Some(&d) => Err(TernaryError::InvalidDigit(d)),
        None => Ok(()),
    }
}

/// Total number of 1s in a stream, when decidable from the source structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OnesCount {
    Finite(u64),
    Infinite,
    /// Not decidable from the rule alone (e.g. a Markov stream).
    Unknown,
}

/// Run length of a fixed digit starting at some position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunLen {
    Finite(u64),
    Infinite,
}

impl RunLen {
    pub fn as_f64(self) -> f64 {
        match self {
            RunLen::Finite(r) => r as f64,
            RunLen::Infinite => f64::INFINITY,
        }
    }
}

/// Digit statistics of a point at depth `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DigitStats {
    pub n: u64,
    /// Number of 1s among the first `n` digits.
    pub l_n: u64,
    /// Run length of 0s starting at digit `n+1`.
    pub rho_0: RunLen,
    /// Run length of 2s starting at digit `n+1`.
    pub rho_2: RunLen,
    /// `l_n - n*phi(a)`.
    pub r_n: f64,
    /// `((1-2a)n - l_n)/sqrt(n)`.
    pub centered: f64,
}

/// Limit statistics of the 1-frequency and of the centered deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrequencyLimits {
    pub lambda_lo: f64,
    pub lambda_hi: f64,
    pub delta_lo: f64,
    pub delta_hi: f64,
    /// True iff the limits were computed symbolically from an eventually
    /// periodic source; windowed empirical estimates carry `false`.
    pub exact: bool,
}

// Cap on digit scans where the source structure does not decide a question
// (run lengths of generated streams).
const SCAN_CAP: u64 = 1 << 16;
// Cap on long-division steps in `from_rational`.
const DIVISION_CAP: usize = 4_000_000;

impl DigitSource {
    /// Terminating expansion `0.d_1 … d_m`. Trailing zeros are removed.
    pub fn finite(mut digits: Vec<u8>) -> Result<Self, TernaryError> {
        check_digits(&digits)?;
        while digits.last() == Some(&0) {
            digits.pop();
        }
        Ok(DigitSource::Finite(digits))
    }

    /// Eventually periodic expansion. All-zero periods collapse to the
    /// terminating form; all-two periods are carried into it.
    pub fn eventually_periodic(preperiod: Vec<u8>, period: Vec<u8>) -> Result<Self, TernaryError> {
        check_digits(&preperiod)?;
        check_digits(&period)?;
        if period.is_empty() {
            return Err(TernaryError::EmptyPeriod);
        }
        if period.iter().all(|&d| d == 0) {
            return Self::finite(preperiod);
        }
        if period.iter().all(|&d| d == 2) {
            // 0.(pre)222… terminates after a carry, except for the point 1.
            let mut digits = preperiod;
            loop {
                match digits.pop() {
                    None => return Ok(DigitSource::EventuallyPeriodic {
                        preperiod: Vec::new(),
                        period: vec![2],
                    }),
                    Some(d) if d < 2 => {
                        digits.push(d + 1);
                        return Self::finite(digits);
                    }
                    Some(_) => continue,
                }
            }
        }
        Ok(DigitSource::EventuallyPeriodic { preperiod, period })
    }

    /// Rule-generated stream with parameter validation.
    pub fn generated(family: Generated) -> Result<Self, TernaryError> {
        match &family {
            Generated::BnOnes { k, a, delta, .. } => {
                if *k < 1 {
                    return Err(TernaryError::InvalidParam {
                        name: "k",
                        reason: "need k >= 1".into(),
                    });
                }
                if !(*a > 0.0 && *a < 1.0 / 3.0) {
                    return Err(TernaryError::InvalidParam {
                        name: "a",
                        reason: format!("need a in (0,1/3), got {a}"),
                    });
                }
                if !(*delta > 0.0 && *delta < 1.0) {
                    return Err(TernaryError::InvalidParam {
                        name: "delta",
                        reason: format!("need delta in (0,1), got {delta}"),
                    });
                }
            }
            Generated::BoundedRun { m, .. } => {
                if *m < 2 {
                    return Err(TernaryError::InvalidParam {
                        name: "m",
                        reason: format!("need m >= 2, got {m}"),
                    });
                }
            }
            Generated::Markov { a, p, .. } => {
                if !(*a > 0.0 && *a < 0.5) {
                    return Err(TernaryError::InvalidParam {
                        name: "a",
                        reason: format!("need a in (0,1/2), got {a}"),
                    });
                }
                if !(*p >= 0.0 && *p < 1.0) {
                    return Err(TernaryError::InvalidParam {
                        name: "p",
                        reason: format!("need p in [0,1), got {p}"),
                    });
                }
                let r = markov_r(*a, *p);
                if r > 1.0 {
                    return Err(TernaryError::InvalidParam {
                        name: "p",
                        reason: format!("r = (1-2a)(1-p)/(2a) = {r} exceeds 1"),
                    });
                }
            }
            Generated::DeltaSqrt { a, delta, .. } => {
                if !(*a > 0.0 && *a < 0.5) {
                    return Err(TernaryError::InvalidParam {
                        name: "a",
                        reason: format!("need a in (0,1/2), got {a}"),
                    });
                }
                if !delta.is_finite() {
                    return Err(TernaryError::InvalidParam {
                        name: "delta",
                        reason: "delta must be finite".into(),
                    });
                }
            }
        }
        Ok(DigitSource::Generated(family))
    }

    /// Ternary expansion of `p/q` in the canonical (terminating) form.
    pub fn from_rational(p: u64, q: u64) -> Result<Self, TernaryError> {
        if q == 0 {
            return Err(TernaryError::ZeroDenominator);
        }
        if p > q {
            return Err(TernaryError::NumeratorExceedsDenominator { p, q });
        }
        if p == q {
            // The point 1 = 0.222…, the one stream with no terminating form.
            return Ok(DigitSource::EventuallyPeriodic {
                preperiod: Vec::new(),
                period: vec![2],
            });
        }
        let mut digits: Vec<u8> = Vec::new();
        let mut seen: HashMap<u64, usize> = HashMap::new();
        let mut r = p % q;
        loop {
            if r == 0 {
                return Self::finite(digits);
            }
            if let Some(&start) = seen.get(&r) {
                let period = digits.split_off(start);
                return Self::eventually_periodic(digits, period);
            }
            if digits.len() >= DIVISION_CAP {
                return Err(TernaryError::PeriodTooLong { denominator: q });
            }
            seen.insert(r, digits.len());
            let t = 3u128 * r as u128;
            digits.push((t / q as u128) as u8);
            r = (t % q as u128) as u64;
        }
    }

    /// Exact value as a reduced fraction; `None` for generated sources.
    pub fn to_value(&self) -> Option<(BigUint, BigUint)> {
        fn digits_value(digits: &[u8]) -> BigUint {
            let mut v = BigUint::from(0u32);
            for &d in digits {
                v = v * 3u32 + d;
            }
            v
        }
        let (num, den) = match self {
            DigitSource::Finite(digits) => {
                (digits_value(digits), BigUint::from(3u32).pow(digits.len() as u32))
            }
            DigitSource::EventuallyPeriodic { preperiod, period } => {
                let m = preperiod.len() as u32;
                let p_len = period.len() as u32;
                let scale = BigUint::from(3u32).pow(p_len) - 1u32;
                let num = digits_value(preperiod) * &scale + digits_value(period);
                let den = BigUint::from(3u32).pow(m) * scale;
                (num, den)
            }
            DigitSource::Generated(_) => return None,
        };
        if num == BigUint::from(0u32) {
            return Some((num, BigUint::from(1u32)));
        }
        let g = num.gcd(&den);
        Some((num / &g, den / g))
    }

    /// Approximate value in `[0,1]` from the first 64 digits.
    pub fn value_f64(&self) -> f64 {
        let mut v = 0.0;
        let mut w = 1.0;
        for d in self.digits().take(64) {
            w /= 3.0;
            v += w * d as f64;
        }
        v
    }

    /// The digit `x_i`, 1-indexed.
    ///
    /// For sequentially defined rules (Markov, DeltaSqrt) this replays the
    /// stream and costs `O(i)`; use [`DigitSource::digits`] for scans.
    pub fn digit_at(&self, i: u64) -> u8 {
        assert!(i >= 1, "digit positions are 1-indexed");
        match self {
            DigitSource::Finite(digits) => {
                if i <= digits.len() as u64 {
                    digits[(i - 1) as usize]
                } else {
                    0
                }
            }
            DigitSource::EventuallyPeriodic { preperiod, period } => {
                let m = preperiod.len() as u64;
                if i <= m {
                    preperiod[(i - 1) as usize]
                } else {
                    period[((i - m - 1) % period.len() as u64) as usize]
                }
            }
            DigitSource::Generated(g) => match g {
                Generated::BnOnes { k, a, delta, fill } => {
                    if bn_position_is_one(*k, *a, *delta, i) {
                        1
                    } else {
                        fill.digit(i)
                    }
                }
                Generated::BoundedRun { m, fill } => {
                    let r = i % m;
                    if r == m - 1 {
                        0
                    } else if r == 0 {
                        2
                    } else {
                        fill.digit(i)
                    }
                }
                Generated::Markov { .. } | Generated::DeltaSqrt { .. } => {
                    self.digits().nth((i - 1) as usize).unwrap()
                }
            },
        }
    }

    /// Infinite iterator over the digit stream, starting at `x_1`.
    pub fn digits(&self) -> Digits<'_> {
        let state = match self {
            DigitSource::Finite(digits) => IterState::Finite { digits, i: 0 },
            DigitSource::EventuallyPeriodic { preperiod, period } => IterState::Periodic {
                preperiod,
                period,
                i: 0,
            },
            DigitSource::Generated(g) => match g {
                Generated::BnOnes { k, a, delta, fill } => IterState::BnOnes {
                    k: *k,
                    a: *a,
                    delta: *delta,
                    fill: *fill,
                    next_n: 1,
                    next_one: bn_position(*k, *a, *delta, 1),
                    i: 0,
                },
                Generated::BoundedRun { m, fill } => IterState::BoundedRun {
                    m: *m,
                    fill: *fill,
                    i: 0,
                },
                Generated::Markov { a, p, seed } => IterState::Markov {
                    a: *a,
                    p: *p,
                    rng: rng::SplitMix64::new(*seed),
                    prev: None,
                },
                Generated::DeltaSqrt { a, delta, fill } => IterState::DeltaSqrt {
                    a: *a,
                    delta: *delta,
                    fill: *fill,
                    l_prev: 0,
                    i: 0,
                },
            },
        };
        Digits { state }
    }

    /// Total number of 1s, when the rule decides it.
    pub fn ones_count(&self) -> OnesCount {
        match self {
            DigitSource::Finite(digits) => {
                OnesCount::Finite(digits.iter().filter(|&&d| d == 1).count() as u64)
            }
            DigitSource::EventuallyPeriodic { preperiod, period } => {
                if period.contains(&1) {
                    OnesCount::Infinite
                } else {
                    OnesCount::Finite(preperiod.iter().filter(|&&d| d == 1).count() as u64)
                }
            }
            DigitSource::Generated(g) => match g {
                Generated::BnOnes { .. } | Generated::DeltaSqrt { .. } => OnesCount::Infinite,
                Generated::BoundedRun { .. } => OnesCount::Finite(0),
                Generated::Markov { .. } => OnesCount::Unknown,
            },
        }
    }

    /// Position (1-indexed) of the `r`-th digit 1, scanning at most `cap` digits.
    pub fn position_of_one(&self, r: u64, cap: u64) -> Option<u64> {
        let mut seen = 0;
        for (idx, d) in self.digits().take(cap as usize).enumerate() {
            if d == 1 {
                seen += 1;
                if seen == r {
                    return Some(idx as u64 + 1);
                }
            }
        }
        None
    }

    /// The shifted stream `sigma x` (first digit dropped); structural
    /// sources only.
    pub fn shifted(&self) -> Option<DigitSource> {
        match self {
            DigitSource::Finite(digits) => {
                let rest = if digits.is_empty() { Vec::new() } else { digits[1..].to_vec() };
                Some(DigitSource::finite(rest).unwrap())
            }
            DigitSource::EventuallyPeriodic { preperiod, period } => {
                if preperiod.is_empty() {
                    let mut rotated = period[1..].to_vec();
                    rotated.push(period[0]);
                    Some(DigitSource::eventually_periodic(Vec::new(), rotated).unwrap())
                } else {
                    Some(
                        DigitSource::eventually_periodic(preperiod[1..].to_vec(), period.clone())
                            .unwrap(),
                    )
                }
            }
            DigitSource::Generated(_) => None,
        }
    }

    /// The point `1 - x`; structural sources only. Terminating inputs stay
    /// terminating (digit complement with a final carry).
    pub fn reflected(&self) -> Option<DigitSource> {
        match self {
            DigitSource::Finite(digits) => {
                if digits.is_empty() {
                    // 1 - 0 = 1
                    return Some(DigitSource::EventuallyPeriodic {
                        preperiod: Vec::new(),
                        period: vec![2],
                    });
                }
                let m = digits.len();
                let mut out: Vec<u8> = digits[..m - 1].iter().map(|&d| 2 - d).collect();
                out.push(3 - digits[m - 1]);
                Some(DigitSource::finite(out).unwrap())
            }
            DigitSource::EventuallyPeriodic { preperiod, period } => {
                if preperiod.is_empty() && period.as_slice() == [2] {
                    return Some(DigitSource::Finite(Vec::new()));
                }
                let pre = preperiod.iter().map(|&d| 2 - d).collect();
                let per = period.iter().map(|&d| 2 - d).collect();
                Some(DigitSource::eventually_periodic(pre, per).unwrap())
            }
            DigitSource::Generated(_) => None,
        }
    }

    /// True for the structurally exact variants (finite / eventually periodic).
    pub fn is_exact(&self) -> bool {
        !matches!(self, DigitSource::Generated(_))
    }
}

fn markov_r(a: f64, p: f64) -> f64 {
    (1.0 - 2.0 * a) * (1.0 - p) / (2.0 * a)
}

/// Draw the next chain digit given the previous one (`None` for the first,
/// which uses the stationary vector `[a, 1-2a, a]`).
pub fn markov_next(a: f64, p: f64, prev: Option<u8>, u: f64) -> u8 {
    match prev {
        None => {
            if u < a {
                0
            } else if u < 1.0 - a {
                1
            } else {
                2
            }
        }
        Some(1) => {
            if u < p {
                1
            } else if u < p + (1.0 - p) / 2.0 {
                0
            } else {
                2
            }
        }
        Some(_) => {
            let r = markov_r(a, p);
            if u < r {
                1
            } else if u < r + (1.0 - r) / 2.0 {
                0
            } else {
                2
            }
        }
    }
}

/// `b_n = floor(n/phi(a) - (k+delta)/log(3a) * log n)`, the position of the
/// `n`-th forced 1. Strictly increasing in `n` since the slope exceeds 1.
pub(crate) fn bn_position(k: u32, a: f64, delta: f64, n: u64) -> u64 {
    let phi = math::phi(a);
    let coeff = (k as f64 + delta) / (3.0 * a).ln();
    let v = n as f64 / phi - coeff * (n as f64).ln();
    v.floor().max(1.0) as u64
}

fn bn_position_is_one(k: u32, a: f64, delta: f64, i: u64) -> bool {
    // binary search: b is strictly increasing and b(n) > n
    let (mut lo, mut hi) = (1u64, i + 1);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if bn_position(k, a, delta, mid) < i {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    lo <= i && bn_position(k, a, delta, lo) == i
}

enum IterState<'a> {
    Finite {
        digits: &'a [u8],
        i: usize,
    },
    Periodic {
        preperiod: &'a [u8],
        period: &'a [u8],
        i: usize,
    },
    BnOnes {
        k: u32,
        a: f64,
        delta: f64,
        fill: Fill,
        next_n: u64,
        next_one: u64,
        i: u64,
    },
    BoundedRun {
        m: u64,
        fill: Fill,
        i: u64,
    },
    Markov {
        a: f64,
        p: f64,
        rng: rng::SplitMix64,
        prev: Option<u8>,
    },
    DeltaSqrt {
        a: f64,
        delta: f64,
        fill: Fill,
        l_prev: u64,
        i: u64,
    },
}

/// Infinite digit iterator; see [`DigitSource::digits`].
pub struct Digits<'a> {
    state: IterState<'a>,
}

impl Iterator for Digits<'_> {
    type Item = u8;

    fn next(&mut self) -> Option<u8> {
        Some(match &mut self.state {
            IterState::Finite { digits, i } => {
                let d = digits.get(*i).copied().unwrap_or(0);
                *i += 1;
                d
            }
            IterState::Periodic { preperiod, period, i } => {
                let d = if *i < preperiod.len() {
                    preperiod[*i]
                } else {
                    period[(*i - preperiod.len()) % period.len()]
                };
                *i += 1;
                d
            }
            IterState::BnOnes { k, a, delta, fill, next_n, next_one, i } => {
                *i += 1;
                if *i == *next_one {
                    *next_n += 1;
                    *next_one = bn_position(*k, *a, *delta, *next_n);
                    1
                } else {
                    fill.digit(*i)
                }
            }
            IterState::BoundedRun { m, fill, i } => {
                *i += 1;
                let r = *i % *m;
                if r == *m - 1 {
                    0
                } else if r == 0 {
                    2
                } else {
                    fill.digit(*i)
                }
            }
            IterState::Markov { a, p, rng, prev } => {
                let d = markov_next(*a, *p, *prev, rng.next_f64());
                *prev = Some(d);
                d
            }
            IterState::DeltaSqrt { a, delta, fill, l_prev, i } => {
                *i += 1;
                let n = *i as f64;
                let target = ((1.0 - 2.0 * *a) * n - *delta * n.sqrt()).round();
                let l_n = if target >= (*l_prev + 1) as f64 && *l_prev < *i {
                    *l_prev + 1
                } else {
                    *l_prev
                };
                if l_n > *l_prev {
                    *l_prev = l_n;
                    1
                } else {
                    fill.digit(*i)
                }
            }
        })
    }
}

fn run_len_from(x: &DigitSource, n: u64, d: u8) -> RunLen {
    match x {
        DigitSource::Finite(digits) => {
            let len = digits.len() as u64;
            let mut pos = n + 1;
            while pos <= len {
                if digits[(pos - 1) as usize] != d {
                    return RunLen::Finite(pos - n - 1);
                }
                pos += 1;
            }
            // beyond the prefix all digits are 0
            if d == 0 {
                RunLen::Infinite
            } else {
                RunLen::Finite(pos - n - 1)
            }
        }
        DigitSource::EventuallyPeriodic { preperiod, period } => {
            let m = preperiod.len() as u64;
            let p = period.len() as u64;
            // once inside the period, a full all-d cycle means an infinite run
            let limit = n.max(m) + p + 1;
            let mut pos = n + 1;
            while pos <= limit {
                if x.digit_at(pos) != d {
                    return RunLen::Finite(pos - n - 1);
                }
                pos += 1;
            }
            RunLen::Infinite
        }
        DigitSource::Generated(_) => {
            let mut run = 0u64;
            for digit in x.digits().skip(n as usize).take(SCAN_CAP as usize) {
                if digit != d {
                    return RunLen::Finite(run);
                }
                run += 1;
            }
            RunLen::Infinite
        }
    }
}

/// Exact digit statistics at depth `n` (the floating-point fields use `a`).
pub fn stats_at(x: &DigitSource, n: u64, a: f64) -> DigitStats {
    assert!(n >= 1, "need n >= 1");
    let l_n = x.digits().take(n as usize).filter(|&d| d == 1).count() as u64;
    DigitStats {
        n,
        l_n,
        rho_0: run_len_from(x, n, 0),
        rho_2: run_len_from(x, n, 2),
        r_n: l_n as f64 - n as f64 * math::phi(a),
        centered: ((1.0 - 2.0 * a) * n as f64 - l_n as f64) / (n as f64).sqrt(),
    }
}

/// 1-frequency limits, and limits of the centered statistic
/// `((1-2a)n - l_n)/sqrt(n)`.
///
/// Eventually periodic sources are resolved symbolically (`exact = true`).
/// Other sources get windowed min/max estimates over `n in [window/2, window]`
/// flagged `exact = false`; classifiers must treat those as evidence, not
/// proof.
pub fn frequency_limits(x: &DigitSource, a: f64, window: u64) -> FrequencyLimits {
    assert!(window >= 1, "need window >= 1");
    match x {
        DigitSource::Finite(_) | DigitSource::EventuallyPeriodic { .. } => {
            let (ones, len) = match x {
                DigitSource::Finite(_) => (0u64, 1u64),
                DigitSource::EventuallyPeriodic { period, .. } => (
                    period.iter().filter(|&&d| d == 1).count() as u64,
                    period.len() as u64,
                ),
                _ => unreachable!(),
            };
            let lambda = ones as f64 / len as f64;
            let drift = (1.0 - 2.0 * a) - lambda;
            let (delta_lo, delta_hi) = if drift.abs() <= 1e-12 {
                // l_n - (1-2a)n stays bounded, so the sqrt(n)-normalized
                // deviation tends to 0.
                (0.0, 0.0)
            } else if drift > 0.0 {
                (f64::INFINITY, f64::INFINITY)
            } else {
                (f64::NEG_INFINITY, f64::NEG_INFINITY)
            };
            FrequencyLimits {
                lambda_lo: lambda,
                lambda_hi: lambda,
                delta_lo,
                delta_hi,
                exact: true,
            }
        }
        DigitSource::Generated(_) => {
            let lo_n = (window / 2).max(1);
            let mut l = 0u64;
            let mut lambda_lo = f64::INFINITY;
            let mut lambda_hi = f64::NEG_INFINITY;
            let mut delta_lo = f64::INFINITY;
            let mut delta_hi = f64::NEG_INFINITY;
            for (idx, d) in x.digits().take(window as usize).enumerate() {
                let n = idx as u64 + 1;
                if d == 1 {
                    l += 1;
                }
                if n >= lo_n {
                    let nf = n as f64;
                    let lam = l as f64 / nf;
                    let cen = ((1.0 - 2.0 * a) * nf - l as f64) / nf.sqrt();
                    lambda_lo = lambda_lo.min(lam);
                    lambda_hi = lambda_hi.max(lam);
                    delta_lo = delta_lo.min(cen);
                    delta_hi = delta_hi.max(cen);
                }
            }
            FrequencyLimits {
                lambda_lo,
                lambda_hi,
                delta_lo,
                delta_hi,
                exact: false,
            }
        }
    }
}

// --- serialization -------------------------------------------------------

fn digits_str(digits: &[u8]) -> String {
    digits.iter().map(|d| char::from(b'0' + d)).collect()
}

fn fill_str(fill: Fill) -> String {
    match fill {
        Fill::Zeros => "fill=0".to_string(),
        Fill::Twos => "fill=2".to_string(),
        Fill::Seeded(s) => format!("seed={s}"),
    }
}

impl fmt::Display for DigitSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DigitSource::Finite(digits) => write!(f, "F:{}", digits_str(digits)),
            DigitSource::EventuallyPeriodic { preperiod, period } => {
                write!(f, "P:{}|{}", digits_str(preperiod), digits_str(period))
            }
            DigitSource::Generated(g) => match g {
                Generated::BnOnes { k, a, delta, fill } => {
                    write!(f, "G:bnones:k={k},a={a},delta={delta},{}", fill_str(*fill))
                }
                Generated::BoundedRun { m, fill } => {
                    write!(f, "G:boundedrun:m={m},{}", fill_str(*fill))
                }
                Generated::Markov { a, p, seed } => {
                    write!(f, "G:markov:a={a},p={p},seed={seed}")
                }
                Generated::DeltaSqrt { a, delta, fill } => {
                    write!(f, "G:deltasqrt:a={a},delta={delta},{}", fill_str(*fill))
                }
            },
        }
    }
}

fn parse_digits(s: &str) -> Result<Vec<u8>, TernaryError> {
    s.chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            '2' => Ok(2),
            _ => Err(TernaryError::Parse(format!("bad digit character {c:?}"))),
        })
        .collect()
}

fn parse_kv(pairs: &str) -> Result<HashMap<&str, &str>, TernaryError> {
    let mut map = HashMap::new();
    for item in pairs.split(',').filter(|s| !s.is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| TernaryError::Parse(format!("expected key=value, got {item:?}")))?;
        map.insert(k.trim(), v.trim());
    }
    Ok(map)
}

fn kv_f64(map: &HashMap<&str, &str>, key: &'static str) -> Result<f64, TernaryError> {
    map.get(key)
        .ok_or_else(|| TernaryError::Parse(format!("missing {key}")))?
        .parse()
        .map_err(|_| TernaryError::Parse(format!("bad float for {key}")))
}

fn kv_u64(map: &HashMap<&str, &str>, key: &'static str) -> Result<u64, TernaryError> {
    map.get(key)
        .ok_or_else(|| TernaryError::Parse(format!("missing {key}")))?
        .parse()
        .map_err(|_| TernaryError::Parse(format!("bad integer for {key}")))
}

fn kv_fill(map: &HashMap<&str, &str>) -> Result<Fill, TernaryError> {
    match (map.get("fill"), map.get("seed")) {
        (Some(&"0"), None) => Ok(Fill::Zeros),
        (Some(&"2"), None) => Ok(Fill::Twos),
        (Some(v), None) => Err(TernaryError::Parse(format!("fill must be 0 or 2, got {v}"))),
        (None, Some(s)) => s
            .parse()
            .map(Fill::Seeded)
            .map_err(|_| TernaryError::Parse("bad integer for seed".into())),
        (None, None) => Ok(Fill::Seeded(0)),
        (Some(_), Some(_)) => Err(TernaryError::Parse("give either fill or seed".into())),
    }
}

impl FromStr for DigitSource {
    type Err = TernaryError;

    /// Parses the compact forms `F:1020`, `P:10|02`, `R:1/4`, and
    /// `G:<family>:key=value,…`.
    fn from_str(s: &str) -> Result<Self, TernaryError> {
        let (tag, rest) = s
            .split_once(':')
            .ok_or_else(|| TernaryError::Parse("expected F:, P:, R: or G: prefix".into()))?;
        match tag {
            "F" => DigitSource::finite(parse_digits(rest)?),
            "P" => {
                let (pre, per) = rest
                    .split_once('|')
                    .ok_or_else(|| TernaryError::Parse("P: needs pre|period".into()))?;
                DigitSource::eventually_periodic(parse_digits(pre)?, parse_digits(per)?)
            }
            "R" => {
                let (p, q) = rest
                    .split_once('/')
                    .ok_or_else(|| TernaryError::Parse("R: needs p/q".into()))?;
                let p = p.trim().parse().map_err(|_| TernaryError::Parse("bad numerator".into()))?;
                let q = q.trim().parse().map_err(|_| TernaryError::Parse("bad denominator".into()))?;
                DigitSource::from_rational(p, q)
            }
            "G" => {
                let (family, params) = rest
                    .split_once(':')
                    .ok_or_else(|| TernaryError::Parse("G: needs family:params".into()))?;
                let map = parse_kv(params)?;
                let family = match family {
                    "bnones" => Generated::BnOnes {
                        k: kv_u64(&map, "k")? as u32,
                        a: kv_f64(&map, "a")?,
                        delta: kv_f64(&map, "delta")?,
                        fill: kv_fill(&map)?,
                    },
                    "boundedrun" => Generated::BoundedRun {
                        m: kv_u64(&map, "m")?,
                        fill: kv_fill(&map)?,
                    },
                    "markov" => Generated::Markov {
                        a: kv_f64(&map, "a")?,
                        p: kv_f64(&map, "p")?,
                        seed: kv_u64(&map, "seed").unwrap_or(0),
                    },
                    "deltasqrt" => Generated::DeltaSqrt {
                        a: kv_f64(&map, "a")?,
                        delta: kv_f64(&map, "delta")?,
                        fill: kv_fill(&map)?,
                    },
                    other => {
                        return Err(TernaryError::Parse(format!("unknown family {other:?}")))
                    }
                };
                DigitSource::generated(family)
            }
            other => Err(TernaryError::Parse(format!("unknown tag {other:?}"))),
        }
    }
}
