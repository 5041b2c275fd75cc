//! Seeded, index-addressable random streams.
//!
//! Draw `i` of a run always comes from chunk `i / CHUNK_LEN` of the
//! generator, and chunk `c` is a ChaCha8 stream keyed by `(seed, c)`. A run
//! therefore produces identical output whether its chunks are processed
//! sequentially or spread across any number of threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub const CHUNK_LEN: usize = 1 << 14;

/// Generator for one chunk of a seeded run.
pub fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

/// Uniform draw on the open interval (0, 1).
pub fn open_unit<R: Rng>(rng: &mut R) -> f64 {
    ((rng.random::<u64>() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Fills `n` values chunk by chunk, in parallel, with `fill(rng, out)`
/// called once per chunk on that chunk's generator.
pub fn generate<T, F>(n: usize, seed: u64, fill: F) -> Vec<T>
where
    T: Send + Default + Clone,
    F: Fn(&mut ChaCha8Rng, &mut [T]) + Sync,
{
    let mut out = vec![T::default(); n];
    out.par_chunks_mut(CHUNK_LEN)
        .enumerate()
        .for_each(|(c, slot)| fill(&mut chunk_rng(seed, c as u64), slot));
    out
}

/// Sequential reference for [`generate`].
pub fn generate_serial<T, F>(n: usize, seed: u64, fill: F) -> Vec<T>
where
    T: Default + Clone,
    F: Fn(&mut ChaCha8Rng, &mut [T]),
{
    let mut out = vec![T::default(); n];
    for (c, slot) in out.chunks_mut(CHUNK_LEN).enumerate() {
        fill(&mut chunk_rng(seed, c as u64), slot);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniforms(rng: &mut ChaCha8Rng, out: &mut [f64]) {
        for v in out {
            *v = open_unit(rng);
        }
    }

    #[test]
    fn parallel_matches_serial() {
        let n = 3 * CHUNK_LEN + 17;
        let a = generate(n, 9, uniforms);
        let b = generate_serial(n, 9, uniforms);
        assert_eq!(a, b);
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let c = pool.install(|| generate(n, 9, uniforms));
        assert_eq!(a, c);
    }

    #[test]
    fn draws_in_open_unit_interval() {
        let v = generate(100_000, 1, uniforms);
        assert!(v.iter().all(|&x| x > 0.0 && x < 1.0));
        let mean = v.iter().sum::<f64>() / v.len() as f64;
        assert!((mean - 0.5).abs() < 0.005);
    }

    #[test]
    fn seeds_and_chunks_differ() {
        let a = generate(8, 1, uniforms);
        let b = generate(8, 2, uniforms);
        assert_ne!(a, b);
        let mut r0 = chunk_rng(1, 0);
        let mut r1 = chunk_rng(1, 1);
        assert_ne!(open_unit(&mut r0), open_unit(&mut r1));
    }
}
