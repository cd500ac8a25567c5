//! Seeded, splittable random streams.
//!
//! Backed by ChaCha8: a named, state-based generator whose output sequence
//! is fixed by the `rand_chacha` crate and identical across platforms. A
//! stream is addressed by `(seed, stream_id)`; distinct stream ids select
//! statistically independent sequences from the same seed, which is how
//! parallel work (heatmap cells, sweep runs) stays deterministic.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream_id);
        RngStream {
            seed,
            stream_id,
            inner,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// A fresh stream with the same seed and a different stream id.
    pub fn sibling(&self, stream_id: u64) -> RngStream {
        RngStream::new(self.seed, stream_id)
    }

    /// Standard normal draw (ziggurat).
    pub fn normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.inner)
    }

    /// Uniform double in [0, 1) with 53-bit resolution.
    pub fn uniform(&mut self) -> f64 {
        (self.inner.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in [0, bound) by rejection sampling, so the
    /// distribution is exact and the consumed words are reproducible.
    pub fn uniform_index(&mut self, bound: usize) -> usize {
        assert!(bound > 0, "uniform_index: bound must be positive");
        let bound = bound as u64;
        let zone = u64::MAX - u64::MAX % bound;
        loop {
            let v = self.inner.next_u64();
            if v < zone {
                return (v % bound) as usize;
            }
        }
    }

    /// Fisher-Yates shuffle driven by `uniform_index`.
    pub fn shuffle<T>(&mut self, slice: &mut [T]) {
        for i in (1..slice.len()).rev() {
            let j = self.uniform_index(i + 1);
            slice.swap(i, j);
        }
    }

    pub fn fill_normal(&mut self, out: &mut [f64], mean: f64, std: f64) {
        for v in out {
            *v = mean + std * self.normal();
        }
    }

    pub fn normal_vec(&mut self, n: usize, mean: f64, std: f64) -> Vec<f64> {
        (0..n).map(|_| mean + std * self.normal()).collect()
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.inner.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), rand_chacha::rand_core::Error> {
        self.inner.try_fill_bytes(dest)
    }
}

/// Stream-id layout. Subsystems draw from disjoint ranges so streams never
/// collide between, say, weight init and batch shuffling.
pub mod streams {
    /// Hidden-layer weight initialization.
    pub const HIDDEN_INIT: u64 = 0;
    /// Output-layer weight initialization.
    pub const OUT_INIT: u64 = 1;
    /// Epoch shuffles during training.
    pub const BATCHES: u64 = 2;
    /// Dataset subsetting.
    pub const SUBSET: u64 = 3;
    /// Synthetic dataset generation.
    pub const SYNTHETIC: u64 = 4;
    /// Base for per-cell heatmap streams; cell i uses HEATMAP_BASE + 4*i..+3.
    pub const HEATMAP_BASE: u64 = 1 << 20;
    /// Base for per-run sweep streams; run k offsets by SWEEP_STRIDE * k.
    pub const SWEEP_BASE: u64 = 1 << 40;
    pub const SWEEP_STRIDE: u64 = 1 << 20;
    /// Base for per-image global-property probes.
    pub const GLOBAL_CHECK_BASE: u64 = 1 << 50;
}
