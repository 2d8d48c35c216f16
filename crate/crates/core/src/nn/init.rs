use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Seeded source of initial weights.
///
/// Uses ChaCha8 and converts raw 64-bit draws by hand so the stream is stable
/// across platforms and dependency upgrades.
pub struct Initializer {
    rng: ChaCha8Rng,
}

impl Initializer {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn unit(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on `[-bound, bound)`.
    pub fn symmetric(&mut self, bound: f64) -> f64 {
        (2.0 * self.unit() - 1.0) * bound
    }

    /// Fills `out` from `U(-1/√fan_in, 1/√fan_in)`.
    pub fn fan_in_uniform(&mut self, fan_in: usize, out: &mut [f64]) {
        let bound = 1.0 / (fan_in as f64).sqrt();
        for v in out {
            *v = self.symmetric(bound);
        }
    }
}
