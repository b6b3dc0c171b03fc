//! Seeded randomness. Every random object in the crate is driven by a
//! ChaCha8 stream so that a (seed, stream) pair fully determines a result,
//! independently of thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub type SimRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for trial `trial` of an experiment with base seed `base`.
/// Trials use disjoint ChaCha streams of the same key.
pub fn trial_rng(base: u64, trial: u64) -> SimRng {
    let mut rng = seeded(base);
    rng.set_stream(trial);
    rng
}

/// Mixes a label into a seed (splitmix64 finalizer), for deriving
/// independent sub-experiment seeds.
pub fn derive_seed(base: u64, label: u64) -> u64 {
    let mut z = base ^ label.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs `trials` independent trials (possibly in parallel) and returns the
/// per-trial outputs in trial order.
pub fn run_trials<T, F>(trials: u64, base_seed: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, &mut SimRng) -> T + Sync + Send,
{
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(base_seed, t);
            f(t, &mut rng)
        })
        .collect()
}

/// Runs `trials` trials that each add to a shared vector of `width` integer
/// counters. Integer sums are order independent, so the result does not depend
/// on how trials are scheduled across threads.
pub fn count_trials<F>(trials: u64, base_seed: u64, width: usize, f: F) -> Vec<u64>
where
    F: Fn(u64, &mut SimRng, &mut [u64]) + Sync + Send,
{
    const CHUNK: u64 = 1024;
    let chunks = trials.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![0u64; width];
            for t in c * CHUNK..((c + 1) * CHUNK).min(trials) {
                let mut rng = trial_rng(base_seed, t);
                f(t, &mut rng, &mut acc);
            }
            acc
        })
        .reduce(
            || vec![0u64; width],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        )
}

/// Draws from Binomial(n, 1/2).
pub fn binomial_half(rng: &mut SimRng, n: u64) -> u64 {
    use rand_distr::{Binomial, Distribution};
    if n == 0 {
        return 0;
    }
    Binomial::new(n, 0.5).expect("valid binomial").sample(rng)
}
