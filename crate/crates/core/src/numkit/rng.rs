/// SplitMix64 generator (Steele, Lea & Flood; the constants used by
/// `java.util.SplittableRandom`). 64 bits of state, portable and fully
/// specified, so seeded runs reproduce across platforms and languages.
#[derive(Debug, Clone)]
pub struct SeededRng {
    seed: u64,
    state: u64,
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self { seed, state: seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform draw in `[0, 1)` with 53 random bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw in `[lo, hi)`. Callers guarantee `lo < hi`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        let v = lo + (hi - lo) * self.next_f64();
        // lo + (hi - lo) * u can round up to hi when u is just below 1.
        if v < hi {
            v
        } else {
            hi.next_down()
        }
    }

    /// Independent generator derived from this one's stream.
    pub fn fork(&mut self) -> Self {
        Self::new(self.next_u64())
    }
}
