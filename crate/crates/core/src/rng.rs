//! Small splittable pseudorandom generator (splitmix64).
//!
//! Digit sources and Monte Carlo runs must be reproducible across platforms
//! and restartable at any index, so we use a fixed counter-based mixer
//! instead of an external RNG crate.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// Finalizer of splitmix64: a bijective mixer on `u64`.
#[inline]
pub(crate) fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Position-addressable stream: value at `index` of the stream named `seed`.
#[inline]
pub(crate) fn at(seed: u64, index: u64) -> u64 {
    mix64(seed.wrapping_add(GOLDEN.wrapping_mul(index.wrapping_add(1))))
}

/// Derive an independent child seed, e.g. one per Monte Carlo trial.
#[inline]
pub(crate) fn child_seed(seed: u64, lane: u64) -> u64 {
    mix64(seed ^ mix64(lane.wrapping_add(0x5851_F42D_4C95_7F2D)))
}

/// Sequential splitmix64 generator.
#[derive(Debug, Clone, Copy)]
pub(crate) struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub(crate) fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    #[inline]
    pub(crate) fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        mix64(self.state)
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    #[inline]
    pub(crate) fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stream_is_reproducible_and_position_addressable() {
        let a: Vec<u64> = (0..32).map(|i| at(7, i)).collect();
        let b: Vec<u64> = (0..32).map(|i| at(7, i)).collect();
        assert_eq!(a, b);
        // random access agrees with itself regardless of query order
        assert_eq!(at(7, 31), *a.last().unwrap());
        // different seeds decorrelate
        assert_ne!(at(7, 0), at(8, 0));
    }

    #[test]
    fn uniform_mean_is_sane() {
        let mut rng = SplitMix64::new(42);
        let n = 10_000;
        let mean: f64 = (0..n).map(|_| rng.next_f64()).sum::<f64>() / n as f64;
        assert!((mean - 0.5).abs() < 0.02, "mean {mean}");
    }
}
