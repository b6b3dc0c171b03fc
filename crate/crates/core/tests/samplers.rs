//! Goodness-of-fit checks for the samplers against exact laws.

use std::collections::HashMap;

use nusec_core::distributions::{enumerate_permutations, two_point_reverse, uniform, PermDistribution};
use nusec_core::hardness::c1_distribution;
use nusec_core::perm_core::Permutation;
use nusec_core::rng::{binomial_half, seeded, trial_rng};
use statrs::distribution::{Binomial, ChiSquared, ContinuousCDF, Discrete};

/// Upper-tail p-value of Pearson's statistic for `observed` against `expected` counts.
fn chi_square_p(observed: &[f64], expected: &[f64]) -> f64 {
    let stat: f64 = observed.iter().zip(expected).map(|(o, e)| (o - e).powi(2) / e).sum();
    let dof = (observed.len() - 1) as f64;
    1.0 - ChiSquared::new(dof).unwrap().cdf(stat)
}

fn counts(dist: &PermDistribution, draws: u64, seed: u64) -> HashMap<Permutation, f64> {
    let mut c = HashMap::new();
    for t in 0..draws {
        *c.entry(dist.sample(&mut trial_rng(seed, t))).or_insert(0.0) += 1.0;
    }
    c
}

#[test]
fn uniform_sampler_fits_all_orders() {
    let n = 5;
    let draws = 60_000;
    let c = counts(&uniform(n), draws, 17);
    let all = enumerate_permutations(n);
    assert_eq!(c.len(), all.len());
    let observed: Vec<f64> = all.iter().map(|p| c.get(p).copied().unwrap_or(0.0)).collect();
    let expected = vec![draws as f64 / all.len() as f64; all.len()];
    let p = chi_square_p(&observed, &expected);
    assert!(p > 1e-4, "p = {p}");
}

#[test]
fn explicit_sampler_follows_weights() {
    let atoms: Vec<(Permutation, f64)> =
        enumerate_permutations(3).into_iter().zip([0.05, 0.1, 0.15, 0.2, 0.2, 0.3]).collect();
    let dist = PermDistribution::explicit(atoms.clone()).unwrap();
    let draws = 40_000;
    let c = counts(&dist, draws, 5);
    let observed: Vec<f64> = atoms.iter().map(|(p, _)| c.get(p).copied().unwrap_or(0.0)).collect();
    let expected: Vec<f64> = atoms.iter().map(|(_, w)| w * draws as f64).collect();
    assert!(chi_square_p(&observed, &expected) > 1e-4);
}

#[test]
fn two_point_reverse_splits_evenly() {
    let c = counts(&two_point_reverse(7), 20_000, 3);
    assert_eq!(c.len(), 2);
    let v: Vec<f64> = c.values().copied().collect();
    assert!(chi_square_p(&v, &[10_000.0, 10_000.0]) > 1e-4);
}

#[test]
fn binomial_half_matches_pmf() {
    let n = 12;
    let draws = 50_000;
    let mut rng = seeded(99);
    let mut observed = vec![0.0; n as usize + 1];
    for _ in 0..draws {
        observed[binomial_half(&mut rng, n) as usize] += 1.0;
    }
    let law = Binomial::new(0.5, n).unwrap();
    // pool the thin tails so every expected count is at least 5
    let expected: Vec<f64> = (0..=n).map(|k| law.pmf(k) * draws as f64).collect();
    let (mut o, mut e) = (vec![observed[..2].iter().sum()], vec![expected[..2].iter().sum()]);
    o.extend_from_slice(&observed[2..n as usize - 1]);
    e.extend_from_slice(&expected[2..n as usize - 1]);
    o.push(observed[n as usize - 1..].iter().sum());
    e.push(expected[n as usize - 1..].iter().sum());
    assert!(chi_square_p(&o, &e) > 1e-4);
}

#[test]
fn c1_moves_item_n_uniformly_into_the_first_half() {
    let n = 32;
    let dist = c1_distribution(n).unwrap();
    let draws = 16_000;
    let mut observed = vec![0.0; n / 2];
    for t in 0..draws {
        let pos = dist.sample(&mut trial_rng(8, t)).position(n);
        assert!(pos <= n / 2, "item {n} at {pos}");
        observed[pos - 1] += 1.0;
    }
    let expected = vec![draws as f64 / (n / 2) as f64; n / 2];
    assert!(chi_square_p(&observed, &expected) > 1e-4);
}
