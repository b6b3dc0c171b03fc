//! Distributions over arrival orders: a seeded sampler plus, when it is
//! small enough, the explicit support.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::Rng;
use rand::seq::SliceRandom;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::error::{invalid, Error, Result};
use crate::gf::{prime_power, GaloisField};
use crate::perm_core::Permutation;
use crate::rng::{seeded, SimRng};

/// Largest `n` for which `uniform(n)` carries its explicit support.
pub const UNIFORM_SUPPORT_MAX_N: usize = 8;
/// Largest `k` accepted by the multiset construction.
pub const MULTISET_MAX_K: usize = 12;

pub trait PermSampler: Send + Sync {
    fn sample(&self, rng: &mut SimRng) -> Permutation;
}

impl<F> PermSampler for F
where
    F: Fn(&mut SimRng) -> Permutation + Send + Sync,
{
    fn sample(&self, rng: &mut SimRng) -> Permutation {
        self(rng)
    }
}

/// Finite list of permutations with probabilities summing to one.
#[derive(Clone, Debug, PartialEq)]
pub struct Support {
    atoms: Vec<Permutation>,
    probs: Vec<f64>,
    cumulative: Vec<f64>,
}

impl Support {
    pub fn new(atoms: Vec<(Permutation, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(invalid("support must be non-empty"));
        }
        let n = atoms[0].0.len();
        let mut total = 0.0;
        for (p, w) in &atoms {
            if p.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: p.len() });
            }
            if !(w.is_finite() && *w >= 0.0) {
                return Err(invalid(format!("probability {w} is not a non-negative number")));
            }
            total += w;
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(invalid(format!("probabilities sum to {total}, expected 1")));
        }
        let (atoms, probs): (Vec<_>, Vec<_>) = atoms.into_iter().unzip();
        let mut acc = 0.0;
        let cumulative = probs
            .iter()
            .map(|w| {
                acc += w;
                acc
            })
            .collect();
        Ok(Self { atoms, probs, cumulative })
    }

    pub fn n(&self) -> usize {
        self.atoms[0].len()
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Permutation, f64)> {
        self.atoms.iter().zip(self.probs.iter().copied())
    }

    pub fn atoms(&self) -> &[Permutation] {
        &self.atoms
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn sample(&self, rng: &mut SimRng) -> Permutation {
        let u: f64 = rng.random::<f64>() * self.cumulative[self.cumulative.len() - 1];
        let i = self.cumulative.partition_point(|&c| c <= u).min(self.atoms.len() - 1);
        self.atoms[i].clone()
    }

    /// Same distribution with repeated permutations merged, in first-seen order.
    pub fn merged(&self) -> Support {
        let mut index: HashMap<&Permutation, usize> = HashMap::new();
        let mut out: Vec<(Permutation, f64)> = Vec::new();
        for (p, w) in self.iter() {
            match index.get(p) {
                Some(&i) => out[i].1 += w,
                None => {
                    index.insert(p, out.len());
                    out.push((p.clone(), w));
                }
            }
        }
        Support::new(out).expect("merging preserves validity")
    }

    /// Shannon entropy in bits of the merged distribution.
    pub fn entropy_bits(&self) -> f64 {
        self.merged().probs.iter().filter(|&&w| w > 0.0).map(|&w| -w * w.log2()).sum()
    }

    /// Equality as distributions, up to `tol` per atom.
    pub fn approx_eq(&self, other: &Support, tol: f64) -> bool {
        let a: HashMap<_, _> = self.merged().iter().map(|(p, w)| (p.clone(), w)).collect();
        let b: HashMap<_, _> = other.merged().iter().map(|(p, w)| (p.clone(), w)).collect();
        a.keys().chain(b.keys()).all(|k| {
            let x = a.get(k).copied().unwrap_or(0.0);
            let y = b.get(k).copied().unwrap_or(0.0);
            (x - y).abs() <= tol
        })
    }
}

#[derive(Clone)]
pub struct PermDistribution {
    n: usize,
    kind: String,
    sampler: Arc<dyn PermSampler>,
    support: Option<Arc<Support>>,
}

impl fmt::Debug for PermDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PermDistribution")
            .field("n", &self.n)
            .field("kind", &self.kind)
            .field("support_size", &self.support.as_ref().map(|s| s.len()))
            .finish()
    }
}

struct SupportSampler(Arc<Support>);

impl PermSampler for SupportSampler {
    fn sample(&self, rng: &mut SimRng) -> Permutation {
        self.0.sample(rng)
    }
}

impl PermDistribution {
    pub fn from_sampler(
        n: usize,
        kind: impl Into<String>,
        sampler: Arc<dyn PermSampler>,
        support: Option<Support>,
    ) -> Self {
        Self { n, kind: kind.into(), sampler, support: support.map(Arc::new) }
    }

    /// Distribution given by its support; sampling draws an atom.
    pub fn explicit(atoms: Vec<(Permutation, f64)>) -> Result<Self> {
        Self::from_support("explicit", Support::new(atoms)?)
    }

    pub fn from_support(kind: impl Into<String>, support: Support) -> Result<Self> {
        let support = Arc::new(support);
        Ok(Self {
            n: support.n(),
            kind: kind.into(),
            sampler: Arc::new(SupportSampler(support.clone())),
            support: Some(support),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> &str {
        &self.kind
    }

    pub fn support(&self) -> Option<&Support> {
        self.support.as_deref()
    }

    pub fn sample(&self, rng: &mut SimRng) -> Permutation {
        self.sampler.sample(rng)
    }

    pub fn sample_seeded(&self, seed: u64) -> Permutation {
        self.sample(&mut seeded(seed))
    }

    /// Text form: a header `n=<n> m=<m>` then one `p=<prob> perm=<positions>` line per atom.
    pub fn to_text(&self) -> Result<String> {
        let s = self.support().ok_or_else(|| Error::Unsupported("distribution has no explicit support".into()))?;
        let mut out = format!("n={} m={}\n", s.n(), s.len());
        for (p, w) in s.iter() {
            out.push_str(&format!("p={w} perm={}\n", p.to_line()));
        }
        Ok(out)
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| Error::Parse("empty distribution file".into()))?;
        let mut n = None;
        let mut m = None;
        for tok in header.split_whitespace() {
            match tok.split_once('=') {
                Some(("n", v)) => n = v.parse::<usize>().ok(),
                Some(("m", v)) => m = v.parse::<usize>().ok(),
                _ => return Err(Error::Parse(format!("bad header token {tok:?}"))),
            }
        }
        let (n, m) = match (n, m) {
            (Some(n), Some(m)) => (n, m),
            _ => return Err(Error::Parse(format!("bad header {header:?}"))),
        };
        let mut atoms = Vec::with_capacity(m);
        for line in lines {
            let rest = line.strip_prefix("p=").ok_or_else(|| Error::Parse(format!("bad line {line:?}")))?;
            let (prob, perm) = rest
                .split_once(" perm=")
                .ok_or_else(|| Error::Parse(format!("bad line {line:?}")))?;
            let prob: f64 = prob.trim().parse().map_err(|e| Error::Parse(format!("{prob:?}: {e}")))?;
            let p = Permutation::parse_line(perm)?;
            if p.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: p.len() });
            }
            atoms.push((p, prob));
        }
        if atoms.len() != m {
            return Err(Error::Parse(format!("header says {m} atoms, found {}", atoms.len())));
        }
        Self::explicit(atoms)
    }
}

/// All permutations of `n` items in lexicographic order of their position vectors.
pub fn enumerate_permutations(n: usize) -> Vec<Permutation> {
    let mut cur: Vec<u32> = (0..n as u32).collect();
    let mut out = vec![Permutation::from_zero_based(cur.clone())];
    loop {
        let Some(i) = (1..n).rev().find(|&i| cur[i - 1] < cur[i]) else { break };
        let j = (i..n).rev().find(|&j| cur[j] > cur[i - 1]).unwrap();
        cur.swap(i - 1, j);
        cur[i..].reverse();
        out.push(Permutation::from_zero_based(cur.clone()));
    }
    out
}

pub fn uniform(n: usize) -> PermDistribution {
    let support = (n <= UNIFORM_SUPPORT_MAX_N).then(|| {
        let all = enumerate_permutations(n);
        let w = 1.0 / all.len() as f64;
        Support::new(all.into_iter().map(|p| (p, w)).collect()).expect("uniform support")
    });
    PermDistribution::from_sampler(
        n,
        "uniform",
        Arc::new(move |rng: &mut SimRng| Permutation::random(n, rng)),
        support,
    )
}

/// Identity order or its reverse, each with probability 1/2. For `n = 1`
/// both atoms coincide.
pub fn two_point_reverse(n: usize) -> PermDistribution {
    let s = Support::new(vec![(Permutation::identity(n), 0.5), (Permutation::reverse(n), 0.5)])
        .expect("two point support");
    PermDistribution::from_support("two-point-reverse", s).expect("valid")
}

/// Size of the random multiset: `ceil(2 (k+1)! ln n / delta^2)`.
pub fn multiset_size(n: usize, k: usize, delta: f64) -> Result<usize> {
    if k == 0 || k > MULTISET_MAX_K {
        return Err(invalid(format!("k = {k} must be in 1..={MULTISET_MAX_K}")));
    }
    if n < 2 {
        return Err(invalid("n must be at least 2"));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(invalid(format!("delta = {delta} must be in (0, 1]")));
    }
    let fact: f64 = (1..=k + 1).map(|i| i as f64).product();
    Ok((2.0 * fact * (n as f64).ln() / (delta * delta)).ceil() as usize)
}

/// Uniform distribution over a multiset of independent uniformly random permutations.
pub fn random_multiset(n: usize, k: usize, delta: f64, seed: u64) -> Result<PermDistribution> {
    if k < 2 || n < k {
        return Err(invalid(format!("need n >= k >= 2, got n = {n}, k = {k}")));
    }
    if delta >= 1.0 {
        return Err(invalid(format!("delta = {delta} must be below 1")));
    }
    let xi = multiset_size(n, k, delta)?;
    let mut rng = seeded(seed);
    let w = 1.0 / xi as f64;
    let atoms = (0..xi).map(|_| (Permutation::random(n, &mut rng), w)).collect();
    PermDistribution::from_support("multiset", Support::new(atoms)?)
}

#[derive(Clone, Debug)]
struct HashLevel {
    k: usize,
    q: u32,
    field: GaloisField,
}

/// Composite hash `f = h_L o C_L o g_{L-1} o ... o h_1 o C_1` built from
/// Reed-Solomon codes; the random part is the evaluation coordinate per level.
#[derive(Clone, Debug)]
pub struct ReedSolomonHash {
    n: usize,
    levels: Vec<HashLevel>,
}

fn digits_base(mut x: u64, base: u64, len: usize) -> Vec<u32> {
    (0..len)
        .map(|_| {
            let d = (x % base) as u32;
            x /= base;
            d
        })
        .collect()
}

impl ReedSolomonHash {
    pub fn new(n: usize, levels: usize) -> Result<Self> {
        if !(1..=3).contains(&levels) {
            return Err(invalid(format!("levels = {levels} must be 1, 2 or 3")));
        }
        if n < 4 {
            return Err(invalid("n must be at least 4"));
        }
        let mut out = Vec::new();
        let mut x = n as f64;
        for i in 0..levels {
            x = x.log2();
            let k = x.floor() as usize;
            if k < 2 {
                return Err(invalid(format!("message length at level {} is {k}; need at least 2", i + 1)));
            }
            let lo = (k * k + 1) as u32;
            let hi = (2 * k * k + 1) as u32;
            let q = (lo..=hi)
                .find(|&c| prime_power(c as u64).is_some())
                .ok_or_else(|| invalid(format!("no prime power in [{lo}, {hi}]")))?;
            out.push(HashLevel { k, q, field: GaloisField::new(q)? });
            x = k as f64;
        }
        // each level's input domain must embed into the next level's messages
        let mut domain = n as f64;
        for lvl in &out {
            if (lvl.q as f64).powi(lvl.k as i32) < domain {
                return Err(invalid("message space too small for the input domain"));
            }
            domain = lvl.q as f64;
        }
        Ok(Self { n, levels: out })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `(message length, field size)` per level.
    pub fn parameters(&self) -> Vec<(usize, u32)> {
        self.levels.iter().map(|l| (l.k, l.q)).collect()
    }

    /// Number of buckets of the final hash.
    pub fn buckets(&self) -> usize {
        self.levels.last().unwrap().q as usize
    }

    /// Union bound on the collision probability: sum over levels of `1 - d/N`,
    /// with code length `N = q - 1` and distance `d = q - k`.
    pub fn collision_bound(&self) -> f64 {
        self.levels.iter().map(|l| (l.k as f64 - 1.0) / (l.q as f64 - 1.0)).sum()
    }

    /// Entropy in bits of the induced permutation sampler.
    pub fn entropy_bits(&self) -> f64 {
        let coords: f64 = self.levels.iter().map(|l| ((l.q - 1) as f64).log2()).sum();
        let perm: f64 = (2..=self.buckets()).map(|i| (i as f64).log2()).sum();
        coords + perm
    }

    /// Full codeword of the level-`level` code (0-based) for a message.
    pub fn encode(&self, level: usize, message: &[u32]) -> Vec<u32> {
        let l = &self.levels[level];
        (0..l.q as usize - 1).map(|j| l.field.eval_poly(message, l.field.generator_power(j))).collect()
    }

    /// Message of level `level` (0-based) encoding `symbol` of the previous
    /// level, or the item index for level 0.
    pub fn message(&self, level: usize, symbol: u64) -> Vec<u32> {
        let l = &self.levels[level];
        digits_base(symbol, l.q as u64, l.k)
    }

    /// Hash of the 0-based item with evaluation coordinates `coords` (0-based, one per level).
    pub fn eval(&self, item0: usize, coords: &[usize]) -> u32 {
        let mut sym = item0 as u64;
        for (i, l) in self.levels.iter().enumerate() {
            let msg = self.message(i, sym);
            sym = l.field.eval_poly(&msg, l.field.generator_power(coords[i])) as u64;
        }
        sym as u32
    }

    pub fn random_coords(&self, rng: &mut SimRng) -> Vec<usize> {
        self.levels.iter().map(|l| rng.random_range(0..l.q as usize - 1)).collect()
    }

    /// Arrival order: items sorted by the shuffled bucket of their hash,
    /// ties broken by increasing item index.
    pub fn sample(&self, rng: &mut SimRng) -> Permutation {
        let coords = self.random_coords(rng);
        let mut bucket_rank: Vec<u32> = (0..self.buckets() as u32).collect();
        bucket_rank.shuffle(rng);
        let keys: Vec<u32> = (0..self.n).map(|i| bucket_rank[self.eval(i, &coords) as usize]).collect();
        let mut order: Vec<u32> = (0..self.n as u32).collect();
        order.sort_by_key(|&i| (keys[i as usize], i));
        Permutation::from_order_zero_based(&order)
    }
}

pub fn reed_solomon_distribution(n: usize, levels: usize) -> Result<(PermDistribution, ReedSolomonHash)> {
    let hash = ReedSolomonHash::new(n, levels)?;
    let h = hash.clone();
    let dist = PermDistribution::from_sampler(
        n,
        "reed-solomon",
        Arc::new(move |rng: &mut SimRng| h.sample(rng)),
        None,
    );
    Ok((dist, hash))
}

/// `n` vectors in R^d, stored column by column.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorFamily {
    d: usize,
    n: usize,
    data: Vec<f64>,
}

impl VectorFamily {
    pub fn new(d: usize, columns: Vec<Vec<f64>>) -> Result<Self> {
        let n = columns.len();
        let mut data = Vec::with_capacity(d * n);
        for c in columns {
            if c.len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: c.len() });
            }
            data.extend(c);
        }
        Ok(Self { d, n, data })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn vector(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }

    pub fn gram(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| {
            self.vector(i).iter().zip(self.vector(j)).map(|(a, b)| a * b).sum()
        })
    }
}

/// `n` vectors with independent N(0, 1/d) entries.
pub fn gaussian_vectors(d: usize, n: usize, seed: u64) -> Result<VectorFamily> {
    if d == 0 {
        return Err(invalid("dimension must be positive"));
    }
    let mut rng = seeded(seed);
    let normal = Normal::new(0.0, (1.0 / d as f64).sqrt()).expect("valid normal");
    let cols: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| normal.sample(&mut rng)).collect()).collect();
    let fam = VectorFamily::new(d, cols)?;
    for i in 0..n {
        let norm2: f64 = fam.vector(i).iter().map(|x| x * x).sum();
        if (norm2 - 1.0).abs() > 0.5 {
            log::warn!("vector {} has squared norm {norm2:.3}, far from 1", i + 1);
        }
    }
    Ok(fam)
}

fn order_by_projection(z: &[f64]) -> Permutation {
    let mut order: Vec<u32> = (0..z.len() as u32).collect();
    order.sort_by(|&a, &b| z[a as usize].total_cmp(&z[b as usize]).then(a.cmp(&b)));
    if order.windows(2).any(|w| z[w[0] as usize] == z[w[1] as usize]) {
        log::warn!("tied projections, broken by item index");
    }
    Permutation::from_order_zero_based(&order)
}

/// Arrival order by increasing projection on a standard Gaussian direction.
///
/// The projections `(w.x_1, ..., w.x_n)` are jointly Gaussian with covariance
/// equal to the Gram matrix, so when that matrix is positive definite they are
/// drawn through its Cholesky factor (n^2 work per sample instead of n d).
pub fn rip_projection_distribution(family: &VectorFamily) -> PermDistribution {
    let n = family.len();
    let chol = if n <= family.dim() { family.gram().cholesky() } else { None };
    let sampler: Arc<dyn PermSampler> = match chol {
        Some(c) => {
            let l = c.l();
            Arc::new(move |rng: &mut SimRng| {
                let g: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
                let z: Vec<f64> = (0..n).map(|i| (0..=i).map(|j| l[(i, j)] * g[j]).sum()).collect();
                order_by_projection(&z)
            })
        }
        None => {
            let fam = family.clone();
            Arc::new(move |rng: &mut SimRng| {
                let w: Vec<f64> = (0..fam.dim()).map(|_| rng.sample(StandardNormal)).collect();
                let z: Vec<f64> =
                    (0..fam.len()).map(|i| fam.vector(i).iter().zip(&w).map(|(a, b)| a * b).sum()).collect();
                order_by_projection(&z)
            })
        }
    };
    PermDistribution::from_sampler(n, "rip-projection", sampler, None)
}

/// Draws a component by weight, then a permutation from it.
pub fn mixture(components: Vec<PermDistribution>, weights: Vec<f64>) -> Result<PermDistribution> {
    if components.is_empty() || components.len() != weights.len() {
        return Err(Error::DimensionMismatch { expected: components.len(), got: weights.len() });
    }
    let n = components[0].n();
    if let Some(c) = components.iter().find(|c| c.n() != n) {
        return Err(Error::DimensionMismatch { expected: n, got: c.n() });
    }
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(invalid("mixture weights must be non-negative"));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(invalid(format!("mixture weights sum to {total}, expected 1")));
    }
    let support = if components.iter().all(|c| c.support().is_some()) {
        let atoms: Vec<(Permutation, f64)> = components
            .iter()
            .zip(&weights)
            .flat_map(|(c, &w)| c.support().unwrap().iter().map(move |(p, x)| (p.clone(), x * w)))
            .collect();
        Some(Support::new(atoms)?.merged())
    } else {
        None
    };
    let mut acc = 0.0;
    let cumulative: Vec<f64> = weights
        .iter()
        .map(|w| {
            acc += w;
            acc
        })
        .collect();
    let sampler = Arc::new(move |rng: &mut SimRng| {
        let u: f64 = rng.random::<f64>() * cumulative[cumulative.len() - 1];
        let i = cumulative.partition_point(|&c| c <= u).min(components.len() - 1);
        components[i].sample(rng)
    });
    Ok(PermDistribution::from_sampler(n, "mixture", sampler, support))
}

/// Shannon entropy (bits) of a distribution with explicit support.
pub fn entropy(dist: &PermDistribution) -> Result<f64> {
    dist.support()
        .map(Support::entropy_bits)
        .ok_or_else(|| Error::Unsupported(format!("{} distribution has no explicit support", dist.kind())))
}
