//! Exact and sampled audits of the uniform-induced-ordering and
//! block-independence properties.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{PermDistribution, Support};
use crate::error::{invalid, Error, Result};
use crate::perm_core::Permutation;
use crate::rng::{count_trials, derive_seed, seeded};

pub const DEFAULT_BUDGET: f64 = 1e9;

/// Consecutive blocks of positions; the first `n mod q` blocks are one longer.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockPartition {
    n: usize,
    q: usize,
    cuts: Vec<usize>,
    #[serde(skip)]
    block_of_pos: Vec<u32>,
}

impl BlockPartition {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// The `q + 1` cut points: block `b` holds positions `cuts[b-1]+1 ..= cuts[b]`.
    pub fn cuts(&self) -> &[usize] {
        &self.cuts
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.cuts.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Block (1-based) containing position `pos` (1-based).
    pub fn block_of_position(&self, pos: usize) -> usize {
        self.block_of_pos[pos - 1] as usize + 1
    }

    pub(crate) fn block0(&self, pos0: u32) -> usize {
        self.block_of_pos[pos0 as usize] as usize
    }
}

pub fn block_partition(n: usize, q: usize) -> Result<BlockPartition> {
    if q == 0 || q > n {
        return Err(invalid(format!("need 1 <= q <= n, got q = {q}, n = {n}")));
    }
    let (base, extra) = (n / q, n % q);
    let mut cuts = vec![0];
    for b in 0..q {
        cuts.push(cuts[b] + base + usize::from(b < extra));
    }
    let mut block_of_pos = Vec::with_capacity(n);
    for b in 0..q {
        block_of_pos.extend(std::iter::repeat_n(b as u32, cuts[b + 1] - cuts[b]));
    }
    Ok(BlockPartition { n, q, cuts, block_of_pos })
}

/// Block (1-based) that `p` assigns to `item` (1-based).
pub fn block_index(p: &Permutation, item: usize, bp: &BlockPartition) -> Result<usize> {
    if p.len() != bp.n {
        return Err(Error::DimensionMismatch { expected: bp.n, got: p.len() });
    }
    if item == 0 || item > p.len() {
        return Err(invalid(format!("item {item} out of range 1..={}", p.len())));
    }
    Ok(bp.block_of_position(p.position(item)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum PropertyTag {
    Uiop { k: usize },
    Bip { p: usize, q: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckMode {
    Exact,
    MonteCarlo,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub property: PropertyTag,
    pub mode: CheckMode,
    /// Items (1-based) of the least likely event, in the order of the event.
    pub worst_tuple: Vec<usize>,
    /// Blocks (1-based) of the least likely event, for block-independence reports.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub worst_blocks: Option<Vec<usize>>,
    pub worst_probability: f64,
    /// `1 - worst_probability * (k! or q^p)`; negative when over-represented.
    pub implied_delta: f64,
    pub trials: u64,
    pub confidence_radius: f64,
}

impl PropertyReport {
    /// Whether the audited distribution satisfies the property with parameter `delta`.
    pub fn satisfies(&self, delta: f64) -> bool {
        self.implied_delta <= delta + 1e-12
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

fn require_support(dist: &PermDistribution) -> Result<&Support> {
    dist.support()
        .ok_or_else(|| Error::Unsupported(format!("{} distribution has no explicit support", dist.kind())))
}

/// All k-subsets of 0..n in lexicographic order.
fn combinations(n: usize, k: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    if k > n {
        return out;
    }
    let mut c: Vec<u32> = (0..k as u32).collect();
    loop {
        out.push(c.clone());
        let Some(i) = (0..k).rev().find(|&i| (c[i] as usize) < n - k + i) else { break };
        c[i] += 1;
        for j in i + 1..k {
            c[j] = c[j - 1] + 1;
        }
    }
    out
}

/// Lexicographic rank among the k! orderings of the arrangement `order`
/// (a permutation of 0..k).
fn lehmer_rank(order: &[usize]) -> usize {
    let k = order.len();
    let mut rank = 0;
    for i in 0..k {
        let smaller = order[i + 1..].iter().filter(|&&x| x < order[i]).count();
        rank = rank * (k - i) + smaller;
    }
    rank
}

fn lehmer_unrank(mut rank: usize, k: usize) -> Vec<usize> {
    let mut digits = vec![0; k];
    for i in (0..k).rev() {
        let base = k - i;
        digits[i] = rank % base;
        rank /= base;
    }
    let mut pool: Vec<usize> = (0..k).collect();
    digits.into_iter().map(|d| pool.remove(d)).collect()
}

fn check_budget(estimate: f64, budget: f64) -> Result<()> {
    if estimate > budget {
        Err(Error::BudgetExceeded { estimate, budget })
    } else {
        Ok(())
    }
}

/// Exact minimum over ordered k-tuples of distinct items of the probability
/// that they arrive in that order.
pub fn check_uiop_exact(dist: &PermDistribution, k: usize) -> Result<PropertyReport> {
    check_uiop_exact_with_budget(dist, k, DEFAULT_BUDGET)
}

pub fn check_uiop_exact_with_budget(dist: &PermDistribution, k: usize, budget: f64) -> Result<PropertyReport> {
    let support = require_support(dist)?;
    let n = support.n();
    if k == 0 || k > n {
        return Err(invalid(format!("need 1 <= k <= n, got k = {k}, n = {n}")));
    }
    check_budget((n as f64).powi(k as i32) * support.len() as f64, budget)?;
    let kf = factorial(k) as usize;
    let sets = combinations(n, k);
    let per_set: Vec<(f64, usize)> = sets
        .par_iter()
        .map(|set| {
            let mut mass = vec![0.0; kf];
            let mut idx: Vec<usize> = (0..k).collect();
            for (p, w) in support.iter() {
                let pos = p.zero_based();
                idx.sort_unstable_by_key(|&i| pos[set[i] as usize]);
                mass[lehmer_rank(&idx)] += w;
            }
            let (best, &m) = mass
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(b.1).then(a.0.cmp(&b.0)))
                .unwrap();
            (m, best)
        })
        .collect();
    let (s, &(min, pattern)) = per_set
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .0.total_cmp(&b.1 .0).then(a.0.cmp(&b.0)))
        .unwrap();
    let worst_tuple = lehmer_unrank(pattern, k).into_iter().map(|i| sets[s][i] as usize + 1).collect();
    Ok(PropertyReport {
        property: PropertyTag::Uiop { k },
        mode: CheckMode::Exact,
        worst_tuple,
        worst_blocks: None,
        worst_probability: min,
        implied_delta: 1.0 - factorial(k) * min,
        trials: 0,
        confidence_radius: 0.0,
    })
}

pub fn hoeffding_radius(trials: u64, alpha: f64) -> f64 {
    ((2.0 / alpha).ln() / (2.0 * trials as f64)).sqrt()
}

/// Sampled audit: `tuples` uniformly random ordered tuples, each evaluated on
/// `trials` independent draws (the draws are shared between tuples).
pub fn check_uiop_mc(
    dist: &PermDistribution,
    k: usize,
    tuples: usize,
    trials: u64,
    seed: u64,
    alpha: f64,
) -> Result<PropertyReport> {
    let n = dist.n();
    if k == 0 || k > n {
        return Err(invalid(format!("need 1 <= k <= n, got k = {k}, n = {n}")));
    }
    if tuples == 0 || trials == 0 {
        return Err(invalid("need at least one tuple and one trial"));
    }
    let mut rng = seeded(derive_seed(seed, 1));
    let sample: Vec<Vec<u32>> = (0..tuples)
        .map(|_| {
            let mut t: Vec<u32> = Vec::with_capacity(k);
            while t.len() < k {
                let x = rng.random_range(0..n as u32);
                if !t.contains(&x) {
                    t.push(x);
                }
            }
            t
        })
        .collect();
    let counts = count_trials(trials, derive_seed(seed, 2), tuples, |_, rng, acc| {
        let p = dist.sample(rng);
        let pos = p.zero_based();
        for (c, t) in acc.iter_mut().zip(&sample) {
            if t.windows(2).all(|w| pos[w[0] as usize] < pos[w[1] as usize]) {
                *c += 1;
            }
        }
    });
    let (i, &c) = counts.iter().enumerate().min_by_key(|&(i, &c)| (c, i)).unwrap();
    let min = c as f64 / trials as f64;
    Ok(PropertyReport {
        property: PropertyTag::Uiop { k },
        mode: CheckMode::MonteCarlo,
        worst_tuple: sample[i].iter().map(|&x| x as usize + 1).collect(),
        worst_blocks: None,
        worst_probability: min,
        implied_delta: 1.0 - factorial(k) * min,
        trials,
        confidence_radius: hoeffding_radius(trials, alpha),
    })
}

/// Exact minimum over distinct items `x_1..x_p` and blocks `b_1..b_p` of
/// `Pr[item x_i lands in block b_i for all i]`.
pub fn check_bip_exact(dist: &PermDistribution, p: usize, q: usize) -> Result<PropertyReport> {
    check_bip_exact_with_budget(dist, p, q, DEFAULT_BUDGET)
}

pub fn check_bip_exact_with_budget(dist: &PermDistribution, p: usize, q: usize, budget: f64) -> Result<PropertyReport> {
    let support = require_support(dist)?;
    let n = support.n();
    if p == 0 || p > n {
        return Err(invalid(format!("need 1 <= p <= n, got p = {p}, n = {n}")));
    }
    let bp = block_partition(n, q)?;
    let cells = q.checked_pow(p as u32).ok_or_else(|| invalid("q^p overflows"))?;
    check_budget(
        (n as f64).powi(p as i32) * (q as f64).powi(p as i32) * support.len() as f64,
        budget,
    )?;
    let sets = combinations(n, p);
    let per_set: Vec<(f64, usize)> = sets
        .par_iter()
        .map(|set| {
            let mut mass = vec![0.0; cells];
            for (perm, w) in support.iter() {
                let pos = perm.zero_based();
                let cell = set.iter().fold(0, |acc, &x| acc * q + bp.block0(pos[x as usize]));
                mass[cell] += w;
            }
            let (cell, &m) = mass
                .iter()
                .enumerate()
                .min_by(|a, b| a.1.total_cmp(b.1).then(a.0.cmp(&b.0)))
                .unwrap();
            (m, cell)
        })
        .collect();
    let (s, &(min, cell)) = per_set
        .iter()
        .enumerate()
        .min_by(|a, b| a.1 .0.total_cmp(&b.1 .0).then(a.0.cmp(&b.0)))
        .unwrap();
    let mut blocks = vec![0; p];
    let mut c = cell;
    for b in blocks.iter_mut().rev() {
        *b = c % q + 1;
        c /= q;
    }
    Ok(PropertyReport {
        property: PropertyTag::Bip { p, q },
        mode: CheckMode::Exact,
        worst_tuple: sets[s].iter().map(|&x| x as usize + 1).collect(),
        worst_blocks: Some(blocks),
        worst_probability: min,
        implied_delta: 1.0 - (q as f64).powi(p as i32) * min,
        trials: 0,
        confidence_radius: 0.0,
    })
}

/// Ordering-property parameter implied by block independence: `delta + p^2/q`, clamped to [0, 1].
pub fn bip_to_uiop_delta(p: usize, q: usize, delta: f64) -> f64 {
    (delta + (p * p) as f64 / q as f64).clamp(0.0, 1.0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MarginalClaim {
    pub p: usize,
    pub p_prime: usize,
    pub q: usize,
    pub claimed_delta: f64,
    pub measured_delta: f64,
    pub holds: bool,
}

/// Checks that a block-independence guarantee at `p` carries over to `p' < p`.
pub fn marginalize_bip(dist: &PermDistribution, report: &PropertyReport, p_prime: usize) -> Result<MarginalClaim> {
    let PropertyTag::Bip { p, q } = report.property else {
        return Err(invalid("report is not a block-independence report"));
    };
    if p_prime == 0 || p_prime >= p {
        return Err(invalid(format!("need 1 <= p' < p, got p' = {p_prime}, p = {p}")));
    }
    let measured = check_bip_exact(dist, p_prime, q)?.implied_delta;
    Ok(MarginalClaim {
        p,
        p_prime,
        q,
        claimed_delta: report.implied_delta,
        measured_delta: measured,
        holds: measured <= report.implied_delta + 1e-12,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SupportCover {
    pub atoms: Vec<Permutation>,
    pub mass: f64,
    pub entropy_bits: f64,
    /// `1 - 8 H / log2(k - 3)`; minus infinity when `k = 4` and `H > 0`.
    pub bound: f64,
}

impl SupportCover {
    pub fn holds(&self) -> bool {
        self.mass + 1e-12 >= self.bound
    }
}

/// The `k` most likely permutations and their total mass.
pub fn support_cover(dist: &PermDistribution, k: usize) -> Result<SupportCover> {
    if k < 4 {
        return Err(invalid(format!("k = {k} must be at least 4")));
    }
    let merged = require_support(dist)?.merged();
    let h = merged.entropy_bits();
    let mut idx: Vec<usize> = (0..merged.len()).collect();
    idx.sort_by(|&a, &b| merged.probs()[b].total_cmp(&merged.probs()[a]).then(a.cmp(&b)));
    idx.truncate(k);
    let mass = idx.iter().map(|&i| merged.probs()[i]).sum::<f64>().min(1.0);
    let denom = ((k - 3) as f64).log2();
    let bound = if h == 0.0 { 1.0 } else { 1.0 - 8.0 * h / denom };
    Ok(SupportCover {
        atoms: idx.into_iter().map(|i| merged.atoms()[i].clone()).collect(),
        mass,
        entropy_bits: h,
        bound,
    })
}
