//! Online weighted bipartite matching under a sampled arrival order: the
//! Korula-Pál rule, an adversarial instance for it, and an exact offline
//! optimum with a dual certificate.
//!
//! Online vertices `j` and offline vertices `i` are 1-based. A weight of 0
//! means the edge is absent.

use std::path::Path;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::distributions::{multiset_size, PermDistribution, Support};
use crate::error::{invalid, Error, Result};
use crate::perm_core::Permutation;
use crate::rng::{binomial_half, derive_seed, run_trials, seeded, SimRng};

/// Largest side accepted by the exact optimum.
pub const MATCHING_MAX_N: usize = 4000;

#[derive(Clone, Debug, PartialEq)]
pub struct BipartiteInstance {
    n: usize,
    weight: Vec<f64>,
}

impl BipartiteInstance {
    /// `rows[j-1][i-1]` is the weight of edge `(j, i)`.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        let mut weight = Vec::with_capacity(n * n);
        for row in &rows {
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: row.len() });
            }
            if let Some(w) = row.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
                return Err(invalid(format!("weight {w} must be finite and non-negative")));
            }
            weight.extend_from_slice(row);
        }
        Ok(Self { n, weight })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn weight(&self, j: usize, i: usize) -> f64 {
        self.weight[(j - 1) * self.n + i - 1]
    }

    pub fn edge_count(&self) -> usize {
        self.weight.iter().filter(|&&w| w > 0.0).count()
    }

    /// Text form: `n` then `n` rows of `n` weights, one row per online vertex.
    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.n);
        for row in self.weight.chunks(self.n.max(1)).take(self.n) {
            let cells: Vec<String> = row.iter().map(|w| w.to_string()).collect();
            out.push_str(&cells.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let n: usize = lines
            .next()
            .ok_or_else(|| Error::Parse("empty instance file".into()))?
            .parse()
            .map_err(|_| Error::Parse("first line must be n".into()))?;
        let rows: Vec<Vec<f64>> = lines
            .map(|l| {
                l.split_whitespace()
                    .map(|t| t.parse::<f64>().map_err(|_| Error::Parse(format!("bad weight {t:?}"))))
                    .collect()
            })
            .collect::<Result<_>>()?;
        if rows.len() != n {
            return Err(Error::Parse(format!("expected {n} rows, found {}", rows.len())));
        }
        Self::from_rows(rows).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        Ok(std::fs::write(path, self.to_text())?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchingResult {
    /// `(online j, offline i)` pairs in commit order.
    pub pairs: Vec<(usize, usize)>,
    pub weight: f64,
    /// Every vertex used at most once and every pair is an edge.
    pub feasible: bool,
}

impl MatchingResult {
    fn audited(inst: &BipartiteInstance, pairs: Vec<(usize, usize)>) -> Self {
        let mut on = vec![false; inst.n + 1];
        let mut off = vec![false; inst.n + 1];
        let mut feasible = true;
        let mut weight = 0.0;
        for &(j, i) in &pairs {
            let w = inst.weight(j, i);
            feasible &= !on[j] && !off[i] && w > 0.0;
            on[j] = true;
            off[i] = true;
            weight += w;
        }
        Self { pairs, weight, feasible }
    }
}

/// Strict edge order: heavier first, then smaller online index, then smaller
/// offline index.
fn key_before(a: (f64, usize, usize), b: (f64, usize, usize)) -> bool {
    match a.0.total_cmp(&b.0) {
        std::cmp::Ordering::Greater => true,
        std::cmp::Ordering::Less => false,
        std::cmp::Ordering::Equal => (a.1, a.2) < (b.1, b.2),
    }
}

/// Instance with per-vertex edge lists sorted in greedy order, reusable
/// across arrival orders.
#[derive(Clone, Debug)]
pub struct KorulaPal {
    inst: Arc<BipartiteInstance>,
    adj: Vec<Vec<(u32, f64)>>,
}

impl KorulaPal {
    pub fn new(inst: Arc<BipartiteInstance>) -> Self {
        let n = inst.n;
        let adj = (1..=n)
            .map(|j| {
                let mut e: Vec<(u32, f64)> =
                    (1..=n).filter_map(|i| Some((i as u32, inst.weight(j, i))).filter(|e| e.1 > 0.0)).collect();
                e.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
                e
            })
            .collect();
        Self { inst, adj }
    }

    pub fn instance(&self) -> &BipartiteInstance {
        &self.inst
    }

    /// Edge-greedy matching on the online vertices `seen`; entry `i` holds the
    /// weight and online endpoint of the edge matching offline `i`.
    fn greedy(&self, seen: &[usize]) -> Vec<Option<(f64, usize)>> {
        let mut edges: Vec<(f64, usize, usize)> =
            seen.iter().flat_map(|&j| self.adj[j - 1].iter().map(move |&(i, w)| (w, j, i as usize))).collect();
        edges.sort_by(|a, b| b.0.total_cmp(&a.0).then((a.1, a.2).cmp(&(b.1, b.2))));
        let n = self.inst.n;
        let mut by_offline = vec![None; n + 1];
        let mut online_used = vec![false; n + 1];
        for (w, j, i) in edges {
            if by_offline[i].is_none() && !online_used[j] {
                by_offline[i] = Some((w, j));
                online_used[j] = true;
            }
        }
        by_offline
    }

    /// Offline greedy over all online vertices.
    pub fn greedy_offline(&self) -> MatchingResult {
        let all: Vec<usize> = (1..=self.inst.n).collect();
        let by_offline = self.greedy(&all);
        let mut pairs: Vec<(usize, usize)> =
            by_offline.iter().enumerate().filter_map(|(i, m)| m.map(|(_, j)| (j, i))).collect();
        pairs.sort_unstable();
        MatchingResult::audited(&self.inst, pairs)
    }

    /// Observe the first `tau` arrivals; every later arrival `j` takes the edge
    /// the greedy matching on the observed vertices plus `j` would give it,
    /// if that offline vertex is still free.
    pub fn run(&self, arrival: &Permutation, tau: usize) -> Result<MatchingResult> {
        let n = self.inst.n;
        if arrival.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: arrival.len() });
        }
        let order = arrival.arrival_order();
        let tau = tau.min(n);
        let base = self.greedy(&order[..tau]);
        let mut taken = vec![false; n + 1];
        let mut pairs = Vec::new();
        for &j in &order[tau..] {
            // j's edge (w, i) survives in the enlarged greedy run iff i is
            // unmatched in the base run or matched there by a later edge
            let tentative = self.adj[j - 1].iter().find(|&&(i, w)| match base[i as usize] {
                None => true,
                Some((w2, j2)) => key_before((w, j, i as usize), (w2, j2, i as usize)),
            });
            if let Some(&(i, _)) = tentative {
                if !taken[i as usize] {
                    taken[i as usize] = true;
                    pairs.push((j, i as usize));
                }
            }
        }
        Ok(MatchingResult::audited(&self.inst, pairs))
    }
}

/// Runs the rule with a transition point drawn as Binomial(n, 1/2).
pub fn korula_pal(inst: &BipartiteInstance, arrival: &Permutation, seed: u64) -> Result<MatchingResult> {
    let tau = binomial_half(&mut seeded(seed), inst.n as u64) as usize;
    KorulaPal::new(Arc::new(inst.clone())).run(arrival, tau)
}

/// Dual solution: `row[j] + col[i] >= w(j, i)` everywhere, with equality on
/// the matched pairs and on the zero-weight pairs completing them.
#[derive(Clone, Debug, PartialEq)]
pub struct DualCertificate {
    pub row: Vec<f64>,
    pub col: Vec<f64>,
}

impl DualCertificate {
    /// Checks feasibility, tightness on `m` and equal objective values, up to
    /// `tol` per entry.
    pub fn certifies(&self, inst: &BipartiteInstance, m: &MatchingResult, tol: f64) -> bool {
        let n = inst.n;
        let feasible = (1..=n).all(|j| (1..=n).all(|i| self.row[j - 1] + self.col[i - 1] >= inst.weight(j, i) - tol));
        let tight = m.pairs.iter().all(|&(j, i)| (self.row[j - 1] + self.col[i - 1] - inst.weight(j, i)).abs() <= tol);
        // weak duality over perfect matchings of the zero-padded graph; any
        // matching extends to one of at least its weight
        let dual: f64 = self.row.iter().chain(&self.col).sum();
        feasible && tight && m.feasible && (dual - m.weight).abs() <= tol * (2 * n) as f64
    }
}

/// Maximum-weight matching by the Hungarian method on the complete graph
/// (absent edges weigh 0), plus its dual certificate.
pub fn max_weight_matching_certified(inst: &BipartiteInstance) -> Result<(MatchingResult, DualCertificate)> {
    let n = inst.n;
    if n > MATCHING_MAX_N {
        return Err(invalid(format!("n = {n} exceeds {MATCHING_MAX_N}")));
    }
    let cost = |r: usize, c: usize| -inst.weight[(r - 1) * n + c - 1];
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    let mut minv = vec![0.0f64; n + 1];
    let mut used = vec![false; n + 1];
    for r in 1..=n {
        owner[0] = r;
        let mut c0 = 0;
        minv.iter_mut().for_each(|x| *x = f64::INFINITY);
        used.iter_mut().for_each(|x| *x = false);
        loop {
            used[c0] = true;
            let r0 = owner[c0];
            let mut delta = f64::INFINITY;
            let mut c1 = 0;
            for c in 1..=n {
                if !used[c] {
                    let cur = cost(r0, c) - u[r0] - v[c];
                    if cur < minv[c] {
                        minv[c] = cur;
                        way[c] = c0;
                    }
                    if minv[c] < delta {
                        delta = minv[c];
                        c1 = c;
                    }
                }
            }
            for c in 0..=n {
                if used[c] {
                    u[owner[c]] += delta;
                    v[c] -= delta;
                } else {
                    minv[c] -= delta;
                }
            }
            c0 = c1;
            if owner[c0] == 0 {
                break;
            }
        }
        loop {
            let c1 = way[c0];
            owner[c0] = owner[c1];
            c0 = c1;
            if c0 == 0 {
                break;
            }
        }
    }
    let mut pairs: Vec<(usize, usize)> =
        (1..=n).filter(|&c| owner[c] != 0 && inst.weight(owner[c], c) > 0.0).map(|c| (owner[c], c)).collect();
    pairs.sort_unstable();
    let row: Vec<f64> = u[1..].iter().map(|x| -x).collect();
    let col: Vec<f64> = v[1..].iter().map(|x| -x).collect();
    Ok((MatchingResult::audited(inst, pairs), DualCertificate { row, col }))
}

pub fn max_weight_matching(inst: &BipartiteInstance) -> Result<MatchingResult> {
    Ok(max_weight_matching_certified(inst)?.0)
}

/// `1/2 - 8 sqrt(ln n / n)`.
pub fn kp_edge_probability(n: usize) -> f64 {
    let n = n as f64;
    0.5 - 8.0 * (n.ln() / n).sqrt()
}

/// Random instance with neighbour-last arrival orders for the first `xi`
/// offline vertices.
#[derive(Clone, Debug)]
pub struct KpConstruction {
    pub instance: Arc<BipartiteInstance>,
    pub xi: usize,
    pub edge_probability: f64,
    /// `(offline i, arrival order)`: the neighbours of `i` arrive last.
    pub atoms: Vec<(usize, Permutation)>,
    pub distribution: PermDistribution,
}

impl KpConstruction {
    /// Number of online vertices not adjacent to offline `i`.
    pub fn non_neighbours(&self, i: usize) -> usize {
        (1..=self.instance.n).filter(|&j| self.instance.weight(j, i) == 0.0).count()
    }
}

/// Each pair is an edge with probability `1/2 - 8 sqrt(ln n/n)` and weight
/// `1 - (j+i)/n^2`; the arrival law is uniform over `xi = ceil(2 (k+1)! ln n /
/// delta^2)` orders, the `i`-th uniform among those with offline `i`'s
/// neighbours last.
pub fn kp_adversarial_instance(n: usize, k: usize, delta: f64, seed: u64) -> Result<KpConstruction> {
    let p = kp_edge_probability(n);
    if !(p > 0.0) {
        return Err(invalid(format!("edge probability {p:.4} is not positive at n = {n}")));
    }
    let xi = multiset_size(n, k, delta)?;
    if xi > n {
        return Err(invalid(format!("xi = {xi} exceeds n = {n}")));
    }
    let mut rng = seeded(derive_seed(seed, 1));
    let eps = 1.0 / (n as f64 * n as f64);
    let mut weight = vec![0.0; n * n];
    for j in 1..=n {
        for i in 1..=n {
            if rng.random::<f64>() < p {
                weight[(j - 1) * n + i - 1] = 1.0 - eps * (j + i) as f64;
            }
        }
    }
    let instance = Arc::new(BipartiteInstance { n, weight });
    let mut rng = seeded(derive_seed(seed, 2));
    let atoms: Vec<(usize, Permutation)> = (1..=xi)
        .map(|i| {
            let (mut nb, mut rest): (Vec<usize>, Vec<usize>) = (1..=n).partition(|&j| instance.weight(j, i) > 0.0);
            rest.shuffle(&mut rng);
            nb.shuffle(&mut rng);
            rest.extend(nb);
            (i, Permutation::from_arrival_order(&rest).expect("bijection"))
        })
        .collect();
    let w = 1.0 / xi as f64;
    let support = Support::new(atoms.iter().map(|(_, p)| (p.clone(), w)).collect())?;
    let distribution = PermDistribution::from_support("neighbours-last", support)?;
    Ok(KpConstruction { instance, xi, edge_probability: p, atoms, distribution })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioSummary {
    pub mean_ratio: f64,
    pub standard_error: f64,
    pub mean_weight: f64,
}

impl RatioSummary {
    fn from_weights(weights: &[f64], opt: f64) -> Self {
        let t = weights.len() as f64;
        let ratios: Vec<f64> = weights.iter().map(|w| if opt > 0.0 { w / opt } else { 1.0 }).collect();
        let mean = ratios.iter().sum::<f64>() / t;
        let var = if weights.len() > 1 { ratios.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (t - 1.0) } else { 0.0 };
        Self { mean_ratio: mean, standard_error: (var / t).sqrt(), mean_weight: weights.iter().sum::<f64>() / t }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KpReport {
    pub n: usize,
    pub k: usize,
    pub delta: f64,
    pub xi: usize,
    pub edge_probability: f64,
    pub edges: usize,
    pub opt_weight: f64,
    pub trials: u64,
    pub adversarial: RatioSummary,
    pub uniform: RatioSummary,
    /// Share of adversarial trials in which every neighbour of the chosen
    /// offline vertex arrives after the transition point.
    pub event_frequency: f64,
    /// Trials where that event held but the matching weighed more than `xi`.
    pub event_violations: u64,
    pub infeasible_runs: u64,
}

/// Mean ALG/OPT of the Korula-Pál rule under the adversarial arrival law and
/// under uniform arrivals on the same instance.
pub fn kp_experiment(n: usize, k: usize, delta: f64, trials: u64, seed: u64) -> Result<KpReport> {
    if trials == 0 {
        return Err(invalid("need at least one trial"));
    }
    let c = kp_adversarial_instance(n, k, delta, seed)?;
    let opt = max_weight_matching(&c.instance)?.weight;
    let kp = KorulaPal::new(c.instance.clone());
    let non_nb: Vec<usize> = c.atoms.iter().map(|(i, _)| c.non_neighbours(*i)).collect();
    let adv = run_trials(trials, derive_seed(seed, 3), |_, rng: &mut SimRng| {
        let a = rng.random_range(0..c.atoms.len());
        let tau = binomial_half(rng, n as u64) as usize;
        let m = kp.run(&c.atoms[a].1, tau).expect("sizes match");
        (m.weight, non_nb[a] <= tau, m.feasible)
    });
    let uni = run_trials(trials, derive_seed(seed, 4), |_, rng: &mut SimRng| {
        let pi = Permutation::random(n, rng);
        let tau = binomial_half(rng, n as u64) as usize;
        let m = kp.run(&pi, tau).expect("sizes match");
        (m.weight, m.feasible)
    });
    let adv_w: Vec<f64> = adv.iter().map(|r| r.0).collect();
    let uni_w: Vec<f64> = uni.iter().map(|r| r.0).collect();
    let events = adv.iter().filter(|r| r.1).count();
    let violations = adv.iter().filter(|r| r.1 && r.0 > c.xi as f64).count() as u64;
    let infeasible = (adv.iter().filter(|r| !r.2).count() + uni.iter().filter(|r| !r.1).count()) as u64;
    Ok(KpReport {
        n,
        k,
        delta,
        xi: c.xi,
        edge_probability: c.edge_probability,
        edges: c.instance.edge_count(),
        opt_weight: opt,
        trials,
        adversarial: RatioSummary::from_weights(&adv_w, opt),
        uniform: RatioSummary::from_weights(&uni_w, opt),
        event_frequency: events as f64 / trials as f64,
        event_violations: violations,
        infeasible_runs: infeasible,
    })
}
