//! Counter-based random numbers.
//!
//! Every draw is addressed by a key, a stream and a block counter of a
//! ChaCha8 generator, so results do not depend on the order in which
//! samples or sites are visited.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

const FOLD_INIT: u64 = 0x6A09_E667_F3BC_C908;

/// ChaCha8 keyed by `key`, positioned at block `counter` of `stream`.
pub fn keyed(key: u64, stream: u64, counter: u64) -> ChaCha8Rng {
    let mut g = ChaCha8Rng::seed_from_u64(key);
    g.set_stream(stream);
    g.set_word_pos(16 * counter as u128);
    g
}

/// Fold an ordered list of words into one 64-bit key.
pub fn hash_words(words: &[u64]) -> u64 {
    words.iter().fold(FOLD_INIT, |k, &w| keyed(k, w, 0).next_u64())
}

/// Uniform in [0, 1) for a key.
pub fn uniform(words: &[u64]) -> f64 {
    keyed(hash_words(words), 0, 0).random()
}

/// Derived seed for the `index`-th member of a family.
pub fn sub_seed(seed: u64, tag: u64, index: u64) -> u64 {
    keyed(seed, tag, index).next_u64()
}

/// Sequential stream over a fixed key.
#[derive(Debug, Clone)]
pub struct Stream(ChaCha8Rng);

impl Stream {
    pub fn new(seed: u64, tag: u64) -> Self {
        Stream(keyed(seed, tag, 0))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform in [0, 1).
    pub fn next_f64(&mut self) -> f64 {
        self.0.random()
    }

    pub fn normal(&mut self) -> f64 {
        self.0.sample(StandardNormal)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic() {
        assert_eq!(uniform(&[1, 2, 3]), uniform(&[1, 2, 3]));
        assert_ne!(uniform(&[1, 2, 3]), uniform(&[1, 3, 2]));
        let mut a = Stream::new(5, 0);
        let mut b = Stream::new(5, 0);
        for _ in 0..10 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
    }

    #[test]
    fn uniform_moments() {
        let n = 100_000u64;
        let mut s = 0.0;
        let mut s2 = 0.0;
        for i in 0..n {
            let u = uniform(&[42, i]);
            assert!((0.0..1.0).contains(&u));
            s += u;
            s2 += u * u;
        }
        let m = s / n as f64;
        let v = s2 / n as f64 - m * m;
        assert!((m - 0.5).abs() < 0.005);
        assert!((v - 1.0 / 12.0).abs() < 0.002);
    }

    #[test]
    fn normal_moments() {
        let mut st = Stream::new(9, 1);
        let n = 50_000;
        let xs: Vec<f64> = (0..n).map(|_| st.normal()).collect();
        let m = xs.iter().sum::<f64>() / n as f64;
        let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n as f64;
        assert!(m.abs() < 0.03);
        assert!((v - 1.0).abs() < 0.03);
    }
}
