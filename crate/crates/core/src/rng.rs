//! Small deterministic PRNG used for seeding, shuffling and inverse-transform
//! sampling. SplitMix64 keeps results identical across platforms and builds.

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    /// Uniform draw in the open interval (0, 1).
    #[inline]
    pub fn next_open01(&mut self) -> f64 {
        (((self.next_u64() >> 11) as f64) + 0.5) / 9007199254740992.0
    }

    #[inline]
    pub fn next_below(&mut self, bound: usize) -> usize {
        debug_assert!(bound > 0);
        (self.next_u64() % bound as u64) as usize
    }
}

/// Derive an independent stream seed from a base seed and a counter.
#[inline]
pub fn derive_seed(base: u64, counter: u64) -> u64 {
    let mut rng = SplitMix64::new(base ^ counter.wrapping_mul(0xA24BAED4963EE407));
    rng.next_u64()
}

/// In-place Fisher-Yates shuffle driven by a seed.
pub fn shuffle<T>(values: &mut [T], seed: u64) {
    let mut rng = SplitMix64::new(seed);
    let n = values.len();
    for i in (1..n).rev() {
        let j = rng.next_below(i + 1);
        values.swap(i, j);
    }
}
