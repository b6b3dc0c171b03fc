//! Semitone sequences, the adversarial value law built on them, and an exact
//! minimax oracle for tiny instances.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::distributions::{PermDistribution, Support};
use crate::error::{invalid, Error, Result};
use crate::perm_core::{compose_unchecked, ArrivalSequence, Permutation, ValueOrdering};
use crate::rng::{count_trials, derive_seed, seeded, SimRng};
use crate::secretary_algs::{classic_threshold_policy, random_threshold_policy, run_policy, StoppingPolicy};

/// Largest universe accepted by the minimax oracle.
pub const MINIMAX_MAX_N: usize = 10;
pub const MINIMAX_BUDGET: f64 = 5e7;

fn check_distinct(seq: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n + 1];
    for &x in seq {
        if x == 0 || x > n {
            return Err(invalid(format!("item {x} out of range 1..={n}")));
        }
        if std::mem::replace(&mut seen[x], true) {
            return Err(invalid(format!("item {x} repeated")));
        }
    }
    Ok(())
}

/// True if every element of `seq` arrives either before or after all earlier
/// elements of `seq` under `p`.
pub fn is_semitone(seq: &[usize], p: &Permutation) -> Result<bool> {
    check_distinct(seq, p.len())?;
    let mut lo = usize::MAX;
    let mut hi = 0;
    for (i, &x) in seq.iter().enumerate() {
        let pos = p.position(x);
        if i > 0 && pos > lo && pos < hi {
            return Ok(false);
        }
        lo = lo.min(pos);
        hi = hi.max(pos);
    }
    Ok(true)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SemitoneSequence {
    pub items: Vec<usize>,
}

impl SemitoneSequence {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// Builds a sequence that is semitone for every permutation in `perms`:
/// repeatedly take the smallest remaining item as pivot and keep the largest
/// class of items that lie on the same side of the pivot in every permutation.
pub fn find_semitone(perms: &[Permutation], n: usize) -> Result<SemitoneSequence> {
    if n == 0 {
        return Err(invalid("empty universe"));
    }
    if perms.is_empty() {
        return Err(invalid("need at least one permutation"));
    }
    if let Some(p) = perms.iter().find(|p| p.len() != n) {
        return Err(Error::DimensionMismatch { expected: n, got: p.len() });
    }
    let mut universe: Vec<u32> = (0..n as u32).collect();
    let mut pivots = Vec::new();
    while let Some(&pivot) = universe.first() {
        pivots.push(pivot as usize + 1);
        let mut buckets: BTreeMap<Vec<bool>, Vec<u32>> = BTreeMap::new();
        for &x in &universe[1..] {
            let key: Vec<bool> =
                perms.iter().map(|p| p.zero_based()[x as usize] > p.zero_based()[pivot as usize]).collect();
            buckets.entry(key).or_default().push(x);
        }
        // BTreeMap iterates keys in increasing order, so the first maximum wins ties
        universe = buckets
            .into_values()
            .fold(Vec::new(), |best, b| if b.len() > best.len() { b } else { best });
    }
    pivots.reverse();
    let seq = SemitoneSequence { items: pivots };
    debug_assert!(perms.iter().all(|p| is_semitone(&seq.items, p).unwrap()));
    Ok(seq)
}

/// Length guarantee `log2(n) / (k + 1)` for `k` permutations.
pub fn semitone_length_bound(n: usize, k: usize) -> f64 {
    (n as f64).log2() / (k as f64 + 1.0)
}

/// Values per item (index `i-1` for item `i`): the sequence items get
/// distinct values 1..s, everything else 0.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AdversarialAssignment {
    pub values: Vec<u32>,
}

impl AdversarialAssignment {
    /// Value order with zero-valued items ranked by increasing index.
    pub fn ordering(&self) -> ValueOrdering {
        ValueOrdering::from_values(&self.values)
    }
}

/// Last sequence element takes the largest remaining value with probability
/// `1/t` (t = remaining length) and the smallest otherwise; then recurse.
pub fn adversarial_assignment(seq: &SemitoneSequence, n: usize, rng: &mut SimRng) -> Result<AdversarialAssignment> {
    check_distinct(&seq.items, n)?;
    if seq.is_empty() {
        return Err(invalid("sequence must be non-empty"));
    }
    let mut values = vec![0u32; n];
    let (mut lo, mut hi) = (1u32, seq.len() as u32);
    for t in (1..=seq.len()).rev() {
        let x = seq.items[t - 1];
        if rng.random_range(0..t) == 0 {
            values[x - 1] = hi;
            hi -= 1;
        } else {
            values[x - 1] = lo;
            lo += 1;
        }
    }
    Ok(AdversarialAssignment { values })
}

/// Every outcome of [`adversarial_assignment`] with its probability.
pub fn adversarial_law(seq: &SemitoneSequence, n: usize) -> Result<Vec<(AdversarialAssignment, f64)>> {
    check_distinct(&seq.items, n)?;
    if seq.is_empty() {
        return Err(invalid("sequence must be non-empty"));
    }
    let mut out = vec![(vec![0u32; n], 1.0, 1u32, seq.len() as u32)];
    for t in (1..=seq.len()).rev() {
        let x = seq.items[t - 1] - 1;
        let mut next = Vec::with_capacity(out.len() * 2);
        for (vals, w, lo, hi) in out {
            let mut a = vals.clone();
            a[x] = hi;
            next.push((a, w / t as f64, lo, hi - 1));
            if t > 1 {
                let mut b = vals;
                b[x] = lo;
                next.push((b, w * (t - 1) as f64 / t as f64, lo + 1, hi));
            }
        }
        out = next;
    }
    Ok(out.into_iter().map(|(values, w, _, _)| (AdversarialAssignment { values }, w)).collect())
}

/// Optimal success probability against the adversary on `seq`, with every
/// arrival following the single permutation `pi`.
pub fn semitone_minimax(seq: &SemitoneSequence, pi: &Permutation) -> Result<f64> {
    let n = pi.len();
    if !is_semitone(&seq.items, pi)? {
        return Err(invalid("sequence is not semitone for the permutation"));
    }
    let law: Vec<(ValueOrdering, f64)> =
        adversarial_law(seq, n)?.into_iter().map(|(a, p)| (a.ordering(), p)).collect();
    brute_force_minimax(&combine_laws(&Support::new(vec![(pi.clone(), 1.0)])?, &law)?)
}

/// Smallest and largest [`semitone_minimax`] over every semitone ordering of
/// items `1..=s` under the identity arrival order.
pub fn semitone_minimax_range(s: usize) -> Result<(f64, f64)> {
    if !(1..=8).contains(&s) {
        return Err(invalid("s must lie in 1..=8"));
    }
    let id = Permutation::identity(s);
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for p in crate::distributions::enumerate_permutations(s) {
        let seq = SemitoneSequence { items: p.arrival_order() };
        if !is_semitone(&seq.items, &id)? {
            continue;
        }
        let v = semitone_minimax(&seq, &id)?;
        lo = lo.min(v);
        hi = hi.max(v);
    }
    Ok((lo, hi))
}

/// Best success probability of any deterministic comparison-based stopping
/// rule against a finite law of arrival sequences, by backward induction over
/// relative-rank histories.
pub fn brute_force_minimax(inputs: &[(ArrivalSequence, f64)]) -> Result<f64> {
    let Some(first) = inputs.first() else { return Err(invalid("empty input law")) };
    let n = first.0.len();
    if n > MINIMAX_MAX_N {
        return Err(invalid(format!("n = {n} exceeds the oracle limit {MINIMAX_MAX_N}")));
    }
    let cost = inputs.len() as f64 * n as f64 * (inputs.len() as f64).log2().max(1.0);
    if cost > MINIMAX_BUDGET {
        return Err(Error::BudgetExceeded { estimate: cost, budget: MINIMAX_BUDGET });
    }
    let mut rows: Vec<(Vec<u8>, usize, f64)> = Vec::with_capacity(inputs.len());
    for (seq, w) in inputs {
        if seq.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: seq.len() });
        }
        let ranks = seq.prefix_rank_iter().map(|r| r as u8).collect();
        rows.push((ranks, seq.best_time(), *w));
    }
    rows.sort_by(|a, b| a.0.cmp(&b.0));
    Ok(solve(&rows, 0, n))
}

fn solve(rows: &[(Vec<u8>, usize, f64)], t: usize, n: usize) -> f64 {
    let stop = if t == 0 { 0.0 } else { rows.iter().filter(|r| r.1 == t).map(|r| r.2).sum() };
    if t == n {
        return stop;
    }
    let mut cont = 0.0;
    let mut i = 0;
    while i < rows.len() {
        let r = rows[i].0[t];
        let j = i + rows[i..].iter().take_while(|row| row.0[t] == r).count();
        cont += solve(&rows[i..j], t + 1, n);
        i = j;
    }
    stop.max(cont)
}

/// Input law from an explicit arrival-order support and a law over value orders.
pub fn combine_laws(support: &Support, values: &[(ValueOrdering, f64)]) -> Result<Vec<(ArrivalSequence, f64)>> {
    let mut out = Vec::with_capacity(support.len() * values.len());
    for (pi, w) in support.iter() {
        for (sigma, v) in values {
            if sigma.len() != pi.len() {
                return Err(Error::DimensionMismatch { expected: pi.len(), got: sigma.len() });
            }
            out.push((compose_unchecked(pi, sigma), w * v));
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundReport {
    pub n: usize,
    pub k: usize,
    pub s: usize,
    pub semitone: Vec<usize>,
    /// `(k+1) / log2 n`.
    pub bound: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub oracle_pcs: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub policy_pcs: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub trials: Option<u64>,
}

/// Support of `k` uniformly weighted random permutations against the
/// adversarial value law on a common semitone sequence. Exact optimum for
/// `n <= 10`, otherwise the best of the implemented single-choice policies.
pub fn entropy_lb_experiment(n: usize, k: usize, trials: u64, seed: u64) -> Result<LowerBoundReport> {
    if n < 2 || k == 0 {
        return Err(invalid("need n >= 2 and k >= 1"));
    }
    let mut rng = seeded(derive_seed(seed, 1));
    let perms: Vec<Permutation> = (0..k).map(|_| Permutation::random(n, &mut rng)).collect();
    let w = 1.0 / k as f64;
    let support = Support::new(perms.iter().map(|p| (p.clone(), w)).collect())?;
    let seq = find_semitone(&perms, n)?;
    let bound = (k as f64 + 1.0) / (n as f64).log2();
    let mut report = LowerBoundReport {
        n,
        k,
        s: seq.len(),
        semitone: seq.items.clone(),
        bound,
        oracle_pcs: None,
        policy_pcs: None,
        trials: None,
    };
    if n <= MINIMAX_MAX_N {
        let law: Vec<(ValueOrdering, f64)> =
            adversarial_law(&seq, n)?.into_iter().map(|(a, p)| (a.ordering(), p)).collect();
        report.oracle_pcs = Some(brute_force_minimax(&combine_laws(&support, &law)?)?);
    } else {
        let dist = PermDistribution::from_support("support", support)?;
        let run = |policy_id: u64| {
            let c = count_trials(trials, derive_seed(seed, 2 + policy_id), 1, |_, rng, acc| {
                let pi = dist.sample(rng);
                let a = adversarial_assignment(&seq, n, rng).expect("valid sequence");
                let s = compose_unchecked(&pi, &a.ordering());
                let mut p: Box<dyn StoppingPolicy> = match policy_id {
                    0 => Box::new(classic_threshold_policy(n)),
                    _ => Box::new(random_threshold_policy(n, rng)),
                };
                if run_policy(&mut p, &s).is_some_and(|t| s.rank_at(t) == 1) {
                    acc[0] += 1;
                }
            });
            c[0] as f64 / trials as f64
        };
        report.policy_pcs = Some(run(0).max(run(1)));
        report.trials = Some(trials);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::uniform;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn find_semitone_guarantee(k in 1usize..=5, log_n in 4u32..=10, seed in any::<u64>()) {
            let n = 1usize << log_n;
            let mut rng = seeded(seed);
            let perms: Vec<Permutation> = (0..k).map(|_| Permutation::random(n, &mut rng)).collect();
            let s = find_semitone(&perms, n).unwrap();
            prop_assert!(s.len() as f64 > (n as f64).log2() / (k as f64 + 1.0));
            for p in &perms {
                prop_assert!(is_semitone(&s.items, p).unwrap());
            }
        }

        #[test]
        fn adversary_law_is_a_distribution(s in 1usize..=6, seed in any::<u64>()) {
            let n = s + 2;
            let p = Permutation::random(n, &mut seeded(seed));
            let seq = SemitoneSequence { items: p.arrival_order()[..s].to_vec() };
            let law = adversarial_law(&seq, n).unwrap();
            let total: f64 = law.iter().map(|(_, w)| w).sum();
            prop_assert!((total - 1.0).abs() < 1e-12);
            for (a, _) in &law {
                let mut used: Vec<u32> = seq.items.iter().map(|&x| a.values[x - 1]).collect();
                used.sort_unstable();
                prop_assert_eq!(used, (1..=s as u32).collect::<Vec<_>>());
            }
        }
    }

    #[test]
    fn semitone_fixtures() {
        let id = Permutation::identity(5);
        assert!(is_semitone(&[], &id).unwrap());
        assert!(is_semitone(&[4], &id).unwrap());
        assert!(is_semitone(&[1, 2, 3], &id).unwrap());
        assert!(is_semitone(&[2, 1, 3], &id).unwrap());
        assert!(!is_semitone(&[1, 3, 2], &id).unwrap());
        assert!(is_semitone(&[1, 1], &id).is_err());
    }

    #[test]
    fn find_semitone_fixtures() {
        let s = find_semitone(&[Permutation::identity(8)], 8).unwrap();
        assert!(s.len() >= 2);
        let perms = [Permutation::identity(16), Permutation::reverse(16)];
        let s = find_semitone(&perms, 16).unwrap();
        assert!(s.len() >= 2);
        for p in &perms {
            assert!(is_semitone(&s.items, p).unwrap());
        }
        assert!(find_semitone(&perms, 0).is_err());
    }

    #[test]
    fn assignment_small_cases() {
        let mut rng = seeded(1);
        let seq = SemitoneSequence { items: vec![3] };
        let a = adversarial_assignment(&seq, 4, &mut rng).unwrap();
        assert_eq!(a.values, vec![0, 0, 1, 0]);
        let seq = SemitoneSequence { items: vec![1, 2] };
        let law = adversarial_law(&seq, 2).unwrap();
        assert_eq!(law.len(), 2);
        assert!(law.iter().any(|(a, p)| a.values == vec![1, 2] && (p - 0.5).abs() < 1e-15));
        assert!(law.iter().any(|(a, p)| a.values == vec![2, 1] && (p - 0.5).abs() < 1e-15));
    }

    #[test]
    fn minimax_fixtures() {
        let id = ValueOrdering::identity(3);
        let law = combine_laws(uniform(3).support().unwrap(), &[(id.clone(), 1.0)]).unwrap();
        assert!((brute_force_minimax(&law).unwrap() - 0.5).abs() < 1e-12);
        let single = Support::new(vec![(Permutation::identity(3), 1.0)]).unwrap();
        let law = combine_laws(&single, &[(id, 1.0)]).unwrap();
        assert!((brute_force_minimax(&law).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn minimax_against_adversary_by_shape() {
        let id = |n| Permutation::identity(n);
        let v = |items: Vec<usize>, n| semitone_minimax(&SemitoneSequence { items }, &id(n)).unwrap();
        // each x_t arriving ahead of x_1..x_{t-1}: exactly 1/s
        assert!((v(vec![1, 2], 2) - 0.5).abs() < 1e-12);
        assert!((v(vec![2, 3, 1], 3) - 1.0 / 3.0).abs() < 1e-12);
        assert!((v(vec![3, 4, 2, 1], 4) - 0.25).abs() < 1e-12);
        assert!((v(vec![4, 5, 3, 2, 1], 5) - 0.2).abs() < 1e-12);
        // arrival order x_1, x_2, x_3: skip x_1, take the first record -> 1/2 by hand
        assert!((v(vec![1, 2, 3], 3) - 0.5).abs() < 1e-12);
        assert!((v(vec![3, 2, 4, 1], 6) - 0.375).abs() < 1e-12);
        assert!((v(vec![1, 2, 3, 4], 4) - 11.0 / 24.0).abs() < 1e-12);
    }

    #[test]
    fn worst_shape_table() {
        let expect = [(2, 0.5), (3, 0.5), (4, 11.0 / 24.0), (5, 13.0 / 30.0)];
        for (s, want) in expect {
            let (lo, hi) = semitone_minimax_range(s).unwrap();
            assert!((lo - 1.0 / s as f64).abs() < 1e-12);
            assert!((hi - want).abs() < 1e-12, "s={s} hi={hi}");
        }
    }

    #[test]
    fn experiment_small() {
        let r = entropy_lb_experiment(8, 1, 0, 3).unwrap();
        assert!(r.s >= 2);
        let pcs = r.oracle_pcs.unwrap();
        assert!(pcs >= 1.0 / r.s as f64 - 1e-12);
        assert!(pcs <= r.bound + 1e-12);
        let v = serde_json::to_value(&r).unwrap();
        assert!(v.get("policy_pcs").is_none());
    }
}
