//! Comparison-based stopping and selection policies and their evaluation.
//!
//! Policies receive nothing but the arrival time and the relative rank of the
//! new arrival among everything seen so far.

use serde::{Deserialize, Serialize};

use crate::distributions::PermDistribution;
use crate::error::{invalid, Error, Result};
use crate::perm_core::{compose_unchecked, ArrivalSequence, Permutation, ValueOrdering};
use crate::properties::{block_partition, hoeffding_radius};
use crate::rng::{binomial_half, count_trials, run_trials, SimRng};
use rand::Rng;

pub const DEFAULT_ALPHA: f64 = 0.01;

/// Single-choice online rule over relative ranks.
pub trait StoppingPolicy {
    /// Arrival `t` (1-based) has relative rank `rank` among the first `t`
    /// arrivals. Return `true` to stop and select it.
    fn observe(&mut self, t: usize, rank: usize) -> bool;
}

/// Online rule that may select up to a fixed number of arrivals.
pub trait SelectionPolicy {
    fn observe(&mut self, t: usize, rank: usize) -> bool;
    fn capacity(&self) -> usize;
}

impl<P: StoppingPolicy + ?Sized> StoppingPolicy for Box<P> {
    fn observe(&mut self, t: usize, rank: usize) -> bool {
        (**self).observe(t, rank)
    }
}

/// Observe a fixed number of arrivals, then take the first best-so-far.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CutoffPolicy {
    cutoff: usize,
}

impl CutoffPolicy {
    pub fn new(cutoff: usize) -> Self {
        Self { cutoff }
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }
}

impl StoppingPolicy for CutoffPolicy {
    fn observe(&mut self, t: usize, rank: usize) -> bool {
        t > self.cutoff && rank == 1
    }
}

pub fn classic_cutoff(n: usize) -> usize {
    (n as f64 / std::f64::consts::E).floor() as usize
}

/// Skip the first `floor(n/e)` arrivals, then stop at the first best-so-far.
pub fn classic_threshold_policy(n: usize) -> CutoffPolicy {
    CutoffPolicy::new(classic_cutoff(n))
}

/// Threshold `tau` uniform on 1..=n; arrivals before `tau` are only observed.
pub fn random_threshold_policy(n: usize, rng: &mut SimRng) -> CutoffPolicy {
    let tau = rng.random_range(1..=n.max(1));
    CutoffPolicy::new(tau - 1)
}

/// Stopping time (1-based) of `policy` on `seq`, if it stops.
pub fn run_policy<P: StoppingPolicy + ?Sized>(policy: &mut P, seq: &ArrivalSequence) -> Option<usize> {
    seq.prefix_rank_iter().enumerate().find(|&(i, r)| policy.observe(i + 1, r)).map(|(i, _)| i + 1)
}

/// Selected times (1-based) of a multi-choice policy on `seq`.
pub fn run_selection<P: SelectionPolicy + ?Sized>(policy: &mut P, seq: &ArrivalSequence) -> Vec<usize> {
    let cap = policy.capacity();
    let mut out = Vec::new();
    for (i, r) in seq.prefix_rank_iter().enumerate() {
        if policy.observe(i + 1, r) && out.len() < cap {
            out.push(i + 1);
        }
    }
    out
}

/// `1/e - (e+1)/q - delta - (1-1/e)^(p-1)`, clamped below at 0.
pub fn secretary_bound(p: usize, q: usize, delta: f64) -> f64 {
    let e = std::f64::consts::E;
    let v = 1.0 / e - (e + 1.0) / q as f64 - delta - (1.0 - 1.0 / e).powi(p as i32 - 1);
    v.max(0.0)
}

/// Guarantee of the random-threshold rule under a `(3, delta)` ordering property.
pub fn random_threshold_bound(delta: f64) -> f64 {
    (1.0 - delta).powi(2) / (6.0 * (1.0 + delta))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PcsEstimate {
    pub trials: u64,
    pub successes: u64,
    pub estimate: f64,
    pub standard_error: f64,
    pub hoeffding_radius: f64,
}

impl PcsEstimate {
    pub fn from_counts(successes: u64, trials: u64, alpha: f64) -> Self {
        let p = successes as f64 / trials as f64;
        Self {
            trials,
            successes,
            estimate: p,
            standard_error: (p * (1.0 - p) / trials as f64).sqrt(),
            hoeffding_radius: hoeffding_radius(trials, alpha),
        }
    }
}

fn check_n(dist: &PermDistribution, sigma: &ValueOrdering) -> Result<()> {
    if dist.n() != sigma.len() {
        return Err(Error::DimensionMismatch { expected: dist.n(), got: sigma.len() });
    }
    Ok(())
}

/// Probability of selecting the best item, estimated over `trials` draws of
/// the arrival order. A fresh policy is built for every trial.
pub fn pcs<F, P>(factory: F, dist: &PermDistribution, sigma: &ValueOrdering, trials: u64, seed: u64) -> Result<PcsEstimate>
where
    F: Fn(&mut SimRng) -> P + Sync + Send,
    P: StoppingPolicy,
{
    check_n(dist, sigma)?;
    if trials == 0 {
        return Err(invalid("need at least one trial"));
    }
    let c = count_trials(trials, seed, 1, |_, rng, acc| {
        let pi = dist.sample(rng);
        let mut policy = factory(rng);
        let seq = compose_unchecked(&pi, sigma);
        if let Some(t) = run_policy(&mut policy, &seq) {
            if seq.rank_at(t) == 1 {
                acc[0] += 1;
            }
        }
    });
    Ok(PcsEstimate::from_counts(c[0], trials, DEFAULT_ALPHA))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub trial: u64,
    pub stopped_at: Option<usize>,
    pub success: bool,
}

/// Per-trial outcomes of the same experiment as [`pcs`].
pub fn simulate_trials<F, P>(
    factory: F,
    dist: &PermDistribution,
    sigma: &ValueOrdering,
    trials: u64,
    seed: u64,
) -> Result<Vec<TrialOutcome>>
where
    F: Fn(&mut SimRng) -> P + Sync + Send,
    P: StoppingPolicy,
{
    check_n(dist, sigma)?;
    Ok(run_trials(trials, seed, |t, rng| {
        let pi = dist.sample(rng);
        let mut policy = factory(rng);
        let seq = compose_unchecked(&pi, sigma);
        let stopped_at = run_policy(&mut policy, &seq);
        TrialOutcome { trial: t, stopped_at, success: stopped_at.is_some_and(|s| seq.rank_at(s) == 1) }
    }))
}

/// Exact success probability of a deterministic policy on an explicit distribution.
pub fn pcs_exact<F, P>(factory: F, dist: &PermDistribution, sigma: &ValueOrdering) -> Result<f64>
where
    F: Fn() -> P,
    P: StoppingPolicy,
{
    check_n(dist, sigma)?;
    let s = dist.support().ok_or_else(|| Error::Unsupported("distribution has no explicit support".into()))?;
    Ok(s.iter()
        .map(|(pi, w)| {
            let seq = compose_unchecked(pi, sigma);
            let mut policy = factory();
            match run_policy(&mut policy, &seq) {
                Some(t) if seq.rank_at(t) == 1 => w,
                _ => 0.0,
            }
        })
        .sum())
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Phase {
    /// Cutoff rule for a single pick inside times `1..=end`.
    Single { end: usize, cutoff: usize },
    /// Times `start+1..=end`: accept arrivals beating the `rank_in_sample`-th
    /// best of the first `start` arrivals until `cap` picks in total.
    Beat { start: usize, end: usize, rank_in_sample: usize, cap: usize },
}

/// Recursive `k`-choice rule: sample a Binomial(q, 1/2) fraction of the
/// blocks, solve the `k/2` problem on that prefix recursively, then accept
/// arrivals beating the `k/2`-th best sampled item.
#[derive(Clone, Debug)]
pub struct MultiChoicePolicy {
    n: usize,
    k: usize,
    phases: Vec<Phase>,
    current: usize,
    /// Current relative rank of the reference item; `None` when there is none.
    reference: Option<usize>,
    picked: usize,
}

impl MultiChoicePolicy {
    /// Draws the whole chain of sample sizes up front.
    pub fn new(n: usize, k: usize, q: usize, rng: &mut SimRng) -> Self {
        Self::build(n, k, q, |q| binomial_half(rng, q as u64) as usize)
    }

    /// Uses the given sample sizes (block counts) for successive levels.
    pub fn with_taus(n: usize, k: usize, q: usize, taus: &[usize]) -> Self {
        let mut it = taus.iter().copied();
        Self::build(n, k, q, |_| it.next().expect("not enough tau values"))
    }

    fn build(n: usize, k: usize, q: usize, mut draw: impl FnMut(usize) -> usize) -> Self {
        let mut phases = Vec::new();
        let (mut len, mut kk, mut qq) = (n, k.max(1), q);
        if k >= n {
            phases.push(Phase::Beat { start: 0, end: n, rank_in_sample: usize::MAX, cap: n });
        } else {
            loop {
                if kk == 1 {
                    phases.push(Phase::Single { end: len, cutoff: classic_cutoff(len) });
                    break;
                }
                let tau = if qq == 0 { 0 } else { draw(qq).min(qq) };
                let prefix = if qq == 0 { 0 } else { ((tau * len) as f64 / qq as f64).round() as usize };
                let half = kk / 2;
                phases.push(Phase::Beat { start: prefix, end: len, rank_in_sample: half, cap: kk });
                if prefix == 0 {
                    break;
                }
                len = prefix;
                kk = half;
                qq = tau;
            }
            phases.reverse();
        }
        Self { n, k, phases, current: 0, reference: None, picked: 0 }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Prefix lengths of the recursion, innermost first.
    pub fn prefix_lengths(&self) -> Vec<usize> {
        self.phases
            .iter()
            .map(|p| match p {
                Phase::Single { end, .. } | Phase::Beat { end, .. } => *end,
            })
            .collect()
    }
}

impl SelectionPolicy for MultiChoicePolicy {
    fn capacity(&self) -> usize {
        self.k
    }

    fn observe(&mut self, t: usize, rank: usize) -> bool {
        loop {
            let end = match &self.phases.get(self.current) {
                Some(Phase::Single { end, .. }) | Some(Phase::Beat { end, .. }) => *end,
                None => return false,
            };
            if t <= end {
                break;
            }
            self.current += 1;
            if let Some(Phase::Beat { start, rank_in_sample, .. }) = self.phases.get(self.current) {
                self.reference = (*start > 0).then(|| (*rank_in_sample).min(*start));
            }
        }
        match self.phases[self.current] {
            Phase::Single { cutoff, .. } => {
                if self.picked == 0 && t > cutoff && rank == 1 {
                    self.picked += 1;
                    return true;
                }
                false
            }
            Phase::Beat { cap, rank_in_sample, .. } => {
                if rank_in_sample == usize::MAX {
                    self.picked += 1;
                    return true;
                }
                let Some(reference) = self.reference.as_mut() else { return false };
                if rank <= *reference {
                    *reference += 1;
                    if self.picked < cap {
                        self.picked += 1;
                        return true;
                    }
                }
                false
            }
        }
    }
}

pub fn multi_choice_policy(n: usize, k: usize, q: usize, rng: &mut SimRng) -> MultiChoicePolicy {
    MultiChoicePolicy::new(n, k, q, rng)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiChoiceOutcome {
    /// Selected items (1-based).
    pub selected: Vec<usize>,
    pub value: f64,
    pub optimum: f64,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioStats {
    pub trials: u64,
    pub k: usize,
    pub mean_ratio: f64,
    pub standard_error: f64,
    pub mean_selected: f64,
}

/// Outcome of one selection run for given arrival order and item values.
pub fn selection_outcome<P: SelectionPolicy>(policy: &mut P, pi: &Permutation, values: &[f64], k: usize) -> MultiChoiceOutcome {
    let sigma = ValueOrdering::from_values(values);
    let seq = compose_unchecked(pi, &sigma);
    let order = pi.arrival_order();
    let selected: Vec<usize> = run_selection(policy, &seq).into_iter().map(|t| order[t - 1]).collect();
    let value: f64 = selected.iter().map(|&i| values[i - 1]).sum();
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let optimum: f64 = sorted.iter().take(k).sum();
    let ratio = if optimum == 0.0 { 1.0 } else { value / optimum };
    MultiChoiceOutcome { selected, value, optimum, ratio }
}

/// Mean of `value(selected) / value(top k)` over sampled arrival orders.
pub fn competitive_ratio<F, P>(
    factory: F,
    dist: &PermDistribution,
    values: &[f64],
    k: usize,
    trials: u64,
    seed: u64,
) -> Result<RatioStats>
where
    F: Fn(&mut SimRng) -> P + Sync + Send,
    P: SelectionPolicy,
{
    if values.len() != dist.n() {
        return Err(Error::DimensionMismatch { expected: dist.n(), got: values.len() });
    }
    if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(invalid("values must be finite and non-negative"));
    }
    if trials < 2 {
        return Err(invalid("need at least two trials"));
    }
    let outcomes = run_trials(trials, seed, |_, rng| {
        let pi = dist.sample(rng);
        let mut policy = factory(rng);
        let o = selection_outcome(&mut policy, &pi, values, k);
        (o.ratio, o.selected.len())
    });
    let t = trials as f64;
    let mean = outcomes.iter().map(|o| o.0).sum::<f64>() / t;
    let var = outcomes.iter().map(|o| (o.0 - mean).powi(2)).sum::<f64>() / (t - 1.0);
    Ok(RatioStats {
        trials,
        k,
        mean_ratio: mean,
        standard_error: (var / t).sqrt(),
        mean_selected: outcomes.iter().map(|o| o.1 as f64).sum::<f64>() / t,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailFrequency {
    pub alpha: f64,
    pub frequency: f64,
    pub standard_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitStats {
    pub trials: u64,
    pub set_size: usize,
    pub mean_intersection: f64,
    pub intersection_standard_error: f64,
    pub mean_value: f64,
    pub tails: Vec<TailFrequency>,
}

fn mean_se(xs: &[f64]) -> (f64, f64) {
    let t = xs.len() as f64;
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let mean = xs.iter().sum::<f64>() / t;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (t - 1.0);
    (mean, (var / t).sqrt())
}

/// Statistics of `|T ∩ S|` where `S` holds the items arriving in the first
/// `tau ~ Binomial(q, 1/2)` of `q` position blocks.
pub fn sample_split_stats(
    dist: &PermDistribution,
    q: usize,
    set: &[usize],
    values: Option<&[f64]>,
    alphas: &[f64],
    trials: u64,
    seed: u64,
) -> Result<SplitStats> {
    let n = dist.n();
    let bp = block_partition(n, q)?;
    if let Some(&x) = set.iter().find(|&&x| x == 0 || x > n) {
        return Err(invalid(format!("item {x} out of range 1..={n}")));
    }
    if let Some(v) = values {
        if v.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: v.len() });
        }
    }
    let cuts = bp.cuts().to_vec();
    let per = run_trials(trials, seed, |_, rng| {
        let pi = dist.sample(rng);
        let tau = binomial_half(rng, q as u64) as usize;
        let limit = cuts[tau] as u32;
        let pos = pi.zero_based();
        let inside: Vec<usize> = set.iter().copied().filter(|&x| pos[x - 1] < limit).collect();
        let val = values.map_or(0.0, |v| inside.iter().map(|&x| v[x - 1]).sum());
        (inside.len() as f64, val)
    });
    let sizes: Vec<f64> = per.iter().map(|p| p.0).collect();
    let (mean, se) = mean_se(&sizes);
    let half = set.len() as f64 / 2.0;
    let tails = alphas
        .iter()
        .map(|&a| {
            let hits: Vec<f64> = sizes.iter().map(|&s| f64::from(u8::from(s >= half + a))).collect();
            let (f, fse) = mean_se(&hits);
            TailFrequency { alpha: a, frequency: f, standard_error: fse }
        })
        .collect();
    Ok(SplitStats {
        trials,
        set_size: set.len(),
        mean_intersection: mean,
        intersection_standard_error: se,
        mean_value: per.iter().map(|p| p.1).sum::<f64>() / trials.max(1) as f64,
        tails,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExcessStats {
    pub k: usize,
    pub q: usize,
    pub trials: u64,
    pub used_trials: u64,
    pub skipped_trials: u64,
    pub mean_abs_excess: f64,
    pub standard_error: f64,
}

/// Global rank of the `k/2`-th best sampled item, minus `k`, in absolute value.
pub fn y1_excess_stat(
    dist: &PermDistribution,
    sigma: &ValueOrdering,
    k: usize,
    q: usize,
    trials: u64,
    seed: u64,
) -> Result<ExcessStats> {
    let n = dist.n();
    check_n(dist, sigma)?;
    if k == 0 || !k.is_multiple_of(2) || k > n {
        return Err(invalid(format!("k = {k} must be even and in 2..={n}")));
    }
    let bp = block_partition(n, q)?;
    let cuts = bp.cuts().to_vec();
    let per = run_trials(trials, seed, |_, rng| {
        let pi = dist.sample(rng);
        let tau = binomial_half(rng, q as u64) as usize;
        let len = cuts[tau];
        if len < k / 2 {
            return None;
        }
        let seq = compose_unchecked(&pi, sigma);
        let mut ranks: Vec<u32> = seq.zero_based()[..len].to_vec();
        let (_, &mut r, _) = ranks.select_nth_unstable(k / 2 - 1);
        Some((r as f64 + 1.0 - k as f64).abs())
    });
    let used: Vec<f64> = per.iter().flatten().copied().collect();
    let (mean, se) = mean_se(&used);
    Ok(ExcessStats {
        k,
        q,
        trials,
        used_trials: used.len() as u64,
        skipped_trials: trials - used.len() as u64,
        mean_abs_excess: mean,
        standard_error: se,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{two_point_reverse, uniform};
    use crate::rng::seeded;

    #[test]
    fn classic_small_cases() {
        assert_eq!(classic_cutoff(1), 0);
        assert_eq!(classic_cutoff(3), 1);
        let p = pcs_exact(|| classic_threshold_policy(1), &uniform(1), &ValueOrdering::identity(1)).unwrap();
        assert_eq!(p, 1.0);
        let p = pcs_exact(|| classic_threshold_policy(3), &uniform(3), &ValueOrdering::identity(3)).unwrap();
        assert!((p - 0.5).abs() < 1e-12);
    }

    #[test]
    fn random_threshold_small_cases() {
        // average over the two thresholds of the exact success probability
        let d = uniform(2);
        let id = ValueOrdering::identity(2);
        let avg = (0..2).map(|c| pcs_exact(|| CutoffPolicy::new(c), &d, &id).unwrap()).sum::<f64>() / 2.0;
        assert!((avg - 0.5).abs() < 1e-12);
        let est = pcs(|rng| random_threshold_policy(1, rng), &uniform(1), &ValueOrdering::identity(1), 100, 1).unwrap();
        assert_eq!(est.estimate, 1.0);
    }

    #[test]
    fn two_point_reverse_is_per_atom() {
        // identity atom: the best arrives first and is only observed;
        // reverse atom: every arrival is a new best, so the rule stops at time 3.
        let n = 6;
        let d = two_point_reverse(n);
        let id = ValueOrdering::identity(n);
        assert_eq!(pcs_exact(|| classic_threshold_policy(n), &d, &id).unwrap(), 0.0);
        assert_eq!(pcs(|_| classic_threshold_policy(n), &d, &id, 1000, 2).unwrap().successes, 0);
        // with the cutoff at n - 1 the reverse atom succeeds
        assert_eq!(pcs_exact(|| CutoffPolicy::new(n - 1), &d, &id).unwrap(), 0.5);
        let est = pcs(|_| CutoffPolicy::new(n - 1), &d, &id, 4000, 2).unwrap();
        assert!((est.estimate - 0.5).abs() < 4.0 * est.standard_error);
    }

    #[test]
    fn secretary_bound_values() {
        assert_eq!(secretary_bound(2, 1, 0.0), 0.0);
        let e = std::f64::consts::E;
        let v = secretary_bound(10, 50, 0.05);
        assert!((v - (1.0 / e - (e + 1.0) / 50.0 - 0.05 - (1.0 - 1.0 / e).powi(9))).abs() < 1e-15);
        assert!((secretary_bound(200, 1_000_000_000, 0.0) - 1.0 / e).abs() < 1e-6);
    }

    #[test]
    fn multi_choice_hand_fixture() {
        // n=16, k=2, q=4, tau=2: inner prefix of 8 uses cutoff 2, outer
        // phase accepts arrivals beating the best of the first 8.
        let seq = ArrivalSequence::new(vec![5, 9, 3, 12, 4, 7, 14, 10, 2, 16, 1, 8, 6, 13, 11, 15]).unwrap();
        let mut p = MultiChoicePolicy::with_taus(16, 2, 4, &[2]);
        assert_eq!(p.prefix_lengths(), vec![8, 16]);
        assert_eq!(run_selection(&mut p, &seq), vec![3, 9]);
    }

    #[test]
    fn multi_choice_empty_sample_accepts_nothing_in_phase() {
        let seq = ArrivalSequence::new((1..=10).rev().collect()).unwrap();
        let mut p = MultiChoicePolicy::with_taus(10, 4, 5, &[0]);
        assert!(run_selection(&mut p, &seq).is_empty());
    }

    #[test]
    fn multi_choice_k_equals_n_takes_all() {
        let mut rng = seeded(4);
        let pi = Permutation::random(7, &mut rng);
        let values: Vec<f64> = (1..=7).map(|i| i as f64).collect();
        let mut p = MultiChoicePolicy::new(7, 7, 3, &mut rng);
        let o = selection_outcome(&mut p, &pi, &values, 7);
        assert_eq!(o.selected.len(), 7);
        assert!((o.ratio - 1.0).abs() < 1e-12);
    }

    #[test]
    fn multi_choice_k1_is_classic() {
        let mut rng = seeded(8);
        for n in [1usize, 2, 5, 37, 200] {
            for _ in 0..50 {
                let pi = Permutation::random(n, &mut rng);
                let seq = compose_unchecked(&pi, &ValueOrdering::random(n, &mut rng));
                let mut mc = MultiChoicePolicy::new(n, 1, 10, &mut rng);
                let got = run_selection(&mut mc, &seq);
                let want: Vec<usize> = run_policy(&mut classic_threshold_policy(n), &seq).into_iter().collect();
                assert_eq!(got, want);
            }
        }
    }

    #[test]
    fn all_zero_values_ratio_one() {
        let stats = competitive_ratio(|rng| MultiChoicePolicy::new(20, 3, 4, rng), &uniform(20), &[0.0; 20], 3, 50, 1).unwrap();
        assert_eq!(stats.mean_ratio, 1.0);
    }

    #[test]
    fn split_stats_empty_set() {
        let s = sample_split_stats(&uniform(10), 5, &[], None, &[1.0], 100, 3).unwrap();
        assert_eq!(s.mean_intersection, 0.0);
        assert_eq!(s.tails[0].frequency, 0.0);
    }
}
