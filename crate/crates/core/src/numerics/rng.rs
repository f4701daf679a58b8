use crate::error::{Error, Result};

/// Splitmix64 generator. One `u64` of state, bit-exact on every platform,
/// so any artifact derived from a seed is reproducible byte-for-byte.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Rng64 {
    state: u64,
}

impl Rng64 {
    pub fn new(seed: u64) -> Self {
        Rng64 { state: seed }
    }

    pub fn state(&self) -> u64 {
        self.state
    }

    /// Reference splitmix64 step.
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform draw in `[0, k)` as `(next >> 11) mod k`. The modulo bias at
    /// 53 bits is below 2^-43 and the formula is portable.
    pub fn below(&mut self, k: u64) -> Result<u64> {
        if k == 0 {
            return Err(Error::InvalidArgument("rng_below: k must be >= 1".into()));
        }
        Ok((self.next_u64() >> 11) % k)
    }

    /// Uniform f64 in [0, 1) from the top 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform f64 in [lo, hi).
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Downward Fisher-Yates permutation of `[0..n)`.
    pub fn fisher_yates(&mut self, n: usize) -> Vec<usize> {
        let mut arr: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = self.below((i + 1) as u64).expect("i + 1 >= 1") as usize;
            arr.swap(i, j);
        }
        arr
    }

    /// `k` distinct indices out of `[0..n)`, sorted ascending: the first `k`
    /// entries of a Fisher-Yates permutation.
    pub fn choose_k(&mut self, n: usize, k: usize) -> Result<Vec<usize>> {
        if k > n {
            return Err(Error::InvalidArgument(format!(
                "choose_k: k={k} exceeds n={n}"
            )));
        }
        let mut picked: Vec<usize> = self.fisher_yates(n).into_iter().take(k).collect();
        picked.sort_unstable();
        Ok(picked)
    }
}
