//! Time-indexed uniform sources.
//!
//! `U_i` must be a pure function of the seed and `i` so that the backward
//! search can revisit or extend any index in any order. The stream is a
//! ChaCha8 keystream addressed by word position: index `i` maps to the
//! 64-bit word at offset-binary position `i ^ 2^63`, so consecutive indices
//! are consecutive keystream words.

use std::collections::BTreeMap;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// A source of `U_i` in `[0, 1)`, one per integer time.
pub trait UniformSource {
    fn uniform(&mut self, i: i64) -> f64;
}

const CHUNK: usize = 32;

#[inline]
fn to_unit(x: u64) -> f64 {
    (x >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[derive(Clone)]
pub struct UniformStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
    cached_chunk: Option<u64>,
    words: [u64; CHUNK],
}

impl std::fmt::Debug for UniformStream {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("UniformStream")
            .field("seed", &self.seed)
            .field("stream_id", &self.stream_id)
            .finish()
    }
}

impl UniformStream {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    /// Independent substream `stream_id` of `seed`, used for replicas.
    pub fn with_stream(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        UniformStream {
            seed,
            stream_id,
            rng,
            cached_chunk: None,
            words: [0; CHUNK],
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    fn word(&mut self, i: i64) -> u64 {
        let pos = (i as u64) ^ (1 << 63);
        let chunk = pos / CHUNK as u64;
        if self.cached_chunk != Some(chunk) {
            // word positions count 32-bit words
            self.rng
                .set_word_pos(chunk as u128 * CHUNK as u128 * 2);
            for slot in self.words.iter_mut() {
                *slot = self.rng.next_u64();
            }
            self.cached_chunk = Some(chunk);
        }
        self.words[(pos % CHUNK as u64) as usize]
    }
}

impl UniformSource for UniformStream {
    fn uniform(&mut self, i: i64) -> f64 {
        to_unit(self.word(i))
    }
}

/// `recent` for indices `>= cut`, `older` below it.
#[derive(Debug, Clone)]
pub struct SplicedSource<A, B> {
    pub recent: A,
    pub older: B,
    pub cut: i64,
}

impl<A: UniformSource, B: UniformSource> UniformSource for SplicedSource<A, B> {
    fn uniform(&mut self, i: i64) -> f64 {
        if i >= self.cut {
            self.recent.uniform(i)
        } else {
            self.older.uniform(i)
        }
    }
}

/// Pinned values over a fallback source.
#[derive(Debug, Clone)]
pub struct FixedUniforms<S> {
    pub values: BTreeMap<i64, f64>,
    pub fallback: S,
}

impl<S> FixedUniforms<S> {
    pub fn new(fallback: S) -> Self {
        FixedUniforms {
            values: BTreeMap::new(),
            fallback,
        }
    }

    pub fn pin(mut self, i: i64, u: f64) -> Self {
        assert!((0.0..1.0).contains(&u), "uniform {u} outside [0, 1)");
        self.values.insert(i, u);
        self
    }
}

impl<S: UniformSource> UniformSource for FixedUniforms<S> {
    fn uniform(&mut self, i: i64) -> f64 {
        match self.values.get(&i) {
            Some(&u) => u,
            None => self.fallback.uniform(i),
        }
    }
}

impl<S: UniformSource + ?Sized> UniformSource for &mut S {
    fn uniform(&mut self, i: i64) -> f64 {
        (**self).uniform(i)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pure_function_of_index() {
        let mut a = UniformStream::new(7);
        let forward: Vec<f64> = (-100..100).map(|i| a.uniform(i)).collect();
        let mut b = UniformStream::new(7);
        let backward: Vec<f64> = (-100..100).rev().map(|i| b.uniform(i)).collect();
        let mut backward = backward;
        backward.reverse();
        assert_eq!(forward, backward);
        let mut c = UniformStream::new(7);
        assert_eq!(c.uniform(-57), forward[43]);
        assert_eq!(c.uniform(i64::MIN), c.clone().uniform(i64::MIN));
    }

    #[test]
    fn seeds_and_streams_differ() {
        let mut a = UniformStream::new(1);
        let mut b = UniformStream::new(2);
        let mut c = UniformStream::with_stream(1, 1);
        let xa: Vec<f64> = (0..8).map(|i| a.uniform(i)).collect();
        let xb: Vec<f64> = (0..8).map(|i| b.uniform(i)).collect();
        let xc: Vec<f64> = (0..8).map(|i| c.uniform(i)).collect();
        assert_ne!(xa, xb);
        assert_ne!(xa, xc);
    }

    #[test]
    fn values_in_unit_interval_with_right_mean() {
        let mut s = UniformStream::new(99);
        let n = 200_000;
        let mut sum = 0.0;
        for i in -(n / 2)..(n / 2) {
            let u = s.uniform(i);
            assert!((0.0..1.0).contains(&u));
            sum += u;
        }
        let mean = sum / n as f64;
        assert!((mean - 0.5).abs() < 4.0 * (1.0f64 / 12.0 / n as f64).sqrt());
    }

    #[test]
    fn negative_and_positive_indices_are_contiguous_words() {
        // offset-binary keeps -1 and 0 adjacent in the keystream
        let mut s = UniformStream::new(3);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        rng.set_word_pos(((1u128 << 63) - 1) * 2);
        assert_eq!(s.uniform(-1), to_unit(rng.next_u64()));
        assert_eq!(s.uniform(0), to_unit(rng.next_u64()));
    }

    #[test]
    fn splicing_and_pinning() {
        let base = UniformStream::new(5);
        let other = UniformStream::new(6);
        let mut spliced = SplicedSource {
            recent: base.clone(),
            older: other.clone(),
            cut: 0,
        };
        assert_eq!(spliced.uniform(3), base.clone().uniform(3));
        assert_eq!(spliced.uniform(-3), other.clone().uniform(-3));
        let mut fixed = FixedUniforms::new(base.clone()).pin(0, 0.25);
        assert_eq!(fixed.uniform(0), 0.25);
        assert_eq!(fixed.uniform(1), base.clone().uniform(1));
    }
}
