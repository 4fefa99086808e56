//! Counter-based deterministic random streams.
//!
//! Every stream is derived from a key (seed plus a handful of integer parts,
//! e.g. student index and week). Streams derived from the same key produce
//! the same values on every platform and under any parallel schedule, which
//! is what makes the synthetic cohort generator reproducible.

/// SplitMix64 increment.
const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A SplitMix64 stream addressed by an explicit key.
#[derive(Debug, Clone)]
pub struct KeyedRng {
    state: u64,
}

impl KeyedRng {
    /// Derives a stream from the given key parts. Order matters.
    pub fn from_key(parts: &[u64]) -> Self {
        let mut h = 0x243F_6A88_85A3_08D3u64; // arbitrary non-zero start
        for &p in parts {
            h = mix64(h.wrapping_add(GAMMA) ^ p);
        }
        KeyedRng { state: h }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GAMMA);
        mix64(self.state)
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }

    /// Uniform integer in `[lo, hi]` (inclusive).
    pub fn uniform_inclusive(&mut self, lo: i64, hi: i64) -> i64 {
        debug_assert!(lo <= hi);
        let span = (hi - lo) as u64 + 1;
        // Multiply-shift reduction; bias is < 2^-53 for the spans used here.
        let r = ((self.next_u64() as u128 * span as u128) >> 64) as u64;
        lo + r as i64
    }

    /// Index drawn from unnormalized non-negative weights.
    pub fn categorical(&mut self, weights: &[f64]) -> usize {
        debug_assert!(!weights.is_empty());
        let total: f64 = weights.iter().sum();
        let mut u = self.next_f64() * total;
        for (i, &w) in weights.iter().enumerate() {
            u -= w;
            if u < 0.0 {
                return i;
            }
        }
        weights.len() - 1
    }

    /// Poisson draw by inversion. Large means are split into chunks so the
    /// running pmf never underflows; the result is still exact Poisson
    /// because independent Poisson counts are additive in the mean.
    pub fn poisson(&mut self, lambda: f64) -> u64 {
        debug_assert!(lambda >= 0.0 && lambda.is_finite());
        const CHUNK: f64 = 32.0;
        let mut remaining = lambda;
        let mut total = 0u64;
        while remaining > CHUNK {
            total += self.poisson_small(CHUNK);
            remaining -= CHUNK;
        }
        total + self.poisson_small(remaining)
    }

    fn poisson_small(&mut self, lambda: f64) -> u64 {
        if lambda <= 0.0 {
            return 0;
        }
        let u = self.next_f64();
        let mut p = libm::exp(-lambda);
        let mut cdf = p;
        let mut k = 0u64;
        while u >= cdf && k < 10_000 {
            k += 1;
            p *= lambda / k as f64;
            cdf += p;
        }
        k
    }
}
