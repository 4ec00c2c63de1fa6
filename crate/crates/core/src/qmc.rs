//! Low-discrepancy machinery: a compact Sobol generator (enough dimensions
//! for degree-4 kernels), seeded Cranley-Patterson rotation, and stratified
//! one-dimensional probability grids.

use crate::rng::SplitMix64;

/// Direction-number parameters (degree, polynomial coefficient, initial m's)
/// for Sobol dimensions 2..=7; dimension 1 is the van der Corput sequence.
const SOBOL_PARAMS: [(u32, u32, &[u32]); 6] = [
    (1, 0, &[1]),
    (2, 1, &[1, 3]),
    (3, 1, &[1, 3, 1]),
    (3, 2, &[1, 1, 1]),
    (4, 1, &[1, 1, 3, 3]),
    (4, 4, &[1, 3, 5, 13]),
];

const SOBOL_BITS: u32 = 32;

/// Gray-code Sobol sequence with a per-seed rotation, yielding points in
/// the open cube (0,1)^dim.
#[derive(Debug, Clone)]
pub struct SobolSequence {
    direction: Vec<[u32; SOBOL_BITS as usize]>,
    state: Vec<u32>,
    shift: Vec<u32>,
    index: u64,
}

impl SobolSequence {
    pub fn new(dim: usize, seed: u64) -> Self {
        assert!(
            (1..=SOBOL_PARAMS.len() + 1).contains(&dim),
            "sobol dimension {dim} out of range"
        );
        let mut direction = Vec::with_capacity(dim);
        // dimension 1: van der Corput
        let mut first = [0u32; SOBOL_BITS as usize];
        for (k, slot) in first.iter_mut().enumerate() {
            *slot = 1 << (SOBOL_BITS - 1 - k as u32);
        }
        direction.push(first);
        for &(s, a, m_init) in SOBOL_PARAMS.iter().take(dim.saturating_sub(1)) {
            let mut m = [0u64; SOBOL_BITS as usize];
            for k in 0..SOBOL_BITS as usize {
                if k < s as usize {
                    m[k] = u64::from(m_init[k]);
                } else {
                    let mut v = m[k - s as usize] ^ (m[k - s as usize] << s);
                    for i in 1..s {
                        if (a >> (s - 1 - i)) & 1 == 1 {
                            v ^= m[k - i as usize] << i;
                        }
                    }
                    m[k] = v;
                }
            }
            let mut dirs = [0u32; SOBOL_BITS as usize];
            for k in 0..SOBOL_BITS as usize {
                dirs[k] = (m[k] << (SOBOL_BITS - 1 - k as u32)) as u32;
            }
            direction.push(dirs);
        }
        let mut rng = SplitMix64::new(seed);
        let shift: Vec<u32> = (0..dim).map(|_| (rng.next_u64() >> 32) as u32).collect();
        SobolSequence {
            direction,
            state: vec![0u32; dim],
            shift,
            index: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.state.len()
    }

    /// Jump directly to sequence position `index` (the state that
    /// `next_point` would have after `index` calls on a fresh generator).
    pub fn seek(&mut self, index: u64) {
        let gray = index ^ (index >> 1);
        for d in 0..self.state.len() {
            let mut acc = 0u32;
            for bit in 0..SOBOL_BITS as usize {
                if (gray >> bit) & 1 == 1 {
                    acc ^= self.direction[d][bit];
                }
            }
            self.state[d] = acc;
        }
        self.index = index;
    }

    /// Next point, written into `out` (length = dim).
    pub fn next_point(&mut self, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.dim());
        self.index += 1;
        let bit = self.index.trailing_zeros() as usize;
        for (d, slot) in out.iter_mut().enumerate() {
            self.state[d] ^= self.direction[d][bit];
            let rotated = self.state[d].wrapping_add(self.shift[d]);
            *slot = (f64::from(rotated) + 0.5) / 4294967296.0;
        }
    }
}

/// Map a point of the unit cube to `k` distinct indices in 0..n via a
/// virtual Fisher-Yates pass (no O(n) array per draw).
pub fn point_to_distinct_indices(point: &[f64], n: usize, out: &mut Vec<usize>) {
    let k = point.len();
    debug_assert!(k <= n);
    out.clear();
    // tiny association list; k <= 4 in practice
    let mut swaps: Vec<(usize, usize)> = Vec::with_capacity(2 * k);
    let lookup = |swaps: &[(usize, usize)], i: usize| {
        swaps
            .iter()
            .rev()
            .find(|&&(from, _)| from == i)
            .map(|&(_, to)| to)
            .unwrap_or(i)
    };
    for (j, &u) in point.iter().enumerate() {
        let span = n - j;
        let offset = ((u * span as f64) as usize).min(span - 1);
        let r = j + offset;
        let chosen = lookup(&swaps, r);
        let displaced = lookup(&swaps, j);
        swaps.push((r, displaced));
        out.push(chosen);
    }
}

/// Evenly stratified probabilities (i + offset)/n with a seed-derived offset
/// in (0,1); the lowest-discrepancy deterministic grid on the unit interval.
pub fn stratified_probabilities(n: usize, seed: u64) -> impl Iterator<Item = f64> {
    let offset = SplitMix64::new(seed).next_open01();
    (0..n).map(move |i| (i as f64 + offset) / n as f64)
}
