//! Arrival-order distributions whose first half encodes where the best item
//! sits in the second half, the matched decoding policies, and the
//! half-unique-decoding codes they rely on.
//!
//! Positions and items are 1-based. Bit `i` of a message `x` is
//! `(x >> (i - 1)) & 1`.

use std::path::Path;
use std::sync::Arc;

use rand::seq::index::sample as sample_indices;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{mixture, PermDistribution, Support};
use crate::error::{invalid, Error, Result};
use crate::perm_core::{OrderTracker, Permutation, ValueOrdering};
use crate::rng::{derive_seed, seeded, SimRng};
use crate::secretary_algs::{CutoffPolicy, StoppingPolicy};

/// Largest input width of a stored lookup table.
pub const HARD_FUNCTION_MAX_BITS: usize = 20;
/// Largest message width for all-pairs radius computations.
pub const RADIUS_MAX_BITS: usize = 12;
/// Largest message width for which the game-against-nature distribution
/// carries its explicit support.
pub const GAN_SUPPORT_MAX_BITS: usize = 10;
pub const DEFAULT_KAPPA: f64 = 1.0 / 16.0;
/// Share of the probe set that must lie in the upper half of `(n/4, n/2]`.
pub const DECODABLE_FRACTION: f64 = 39.0 / 40.0;

/// Uniformly random table `{0,1}^m -> [range]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HardFunction {
    m: usize,
    range: usize,
    table: Vec<u32>,
}

impl HardFunction {
    pub fn random(m: usize, range: usize, seed: u64) -> Result<Self> {
        if m > HARD_FUNCTION_MAX_BITS {
            return Err(invalid(format!("table input width {m} exceeds {HARD_FUNCTION_MAX_BITS}")));
        }
        if range == 0 || range > u32::MAX as usize {
            return Err(invalid("range must be positive"));
        }
        let mut rng = seeded(seed);
        let table = (0..1usize << m).map(|_| rng.random_range(1..=range as u32)).collect();
        Ok(Self { m, range, table })
    }

    pub fn from_table(m: usize, range: usize, table: Vec<u32>) -> Result<Self> {
        if m > HARD_FUNCTION_MAX_BITS || table.len() != 1 << m {
            return Err(Error::DimensionMismatch { expected: 1 << m.min(HARD_FUNCTION_MAX_BITS), got: table.len() });
        }
        if table.iter().any(|&v| v == 0 || v as usize > range) {
            return Err(invalid(format!("table entries must lie in 1..={range}")));
        }
        Ok(Self { m, range, table })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn range(&self) -> usize {
        self.range
    }

    pub fn eval(&self, x: u64) -> usize {
        self.table[x as usize] as usize
    }
}

/// Map `{0,1}^m -> {0,1}^L` stored as its full codeword list.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinaryCode {
    m: usize,
    l: usize,
    words: Vec<Vec<u64>>,
}

fn packed_len(l: usize) -> usize {
    l.div_ceil(64).max(1)
}

fn pack(bits: impl Iterator<Item = bool>, l: usize) -> Vec<u64> {
    let mut w = vec![0u64; packed_len(l)];
    for (j, b) in bits.enumerate() {
        if b {
            w[j / 64] |= 1 << (j % 64);
        }
    }
    w
}

fn hamming(a: &[u64], b: &[u64]) -> u32 {
    a.iter().zip(b).map(|(x, y)| (x ^ y).count_ones()).sum()
}

impl BinaryCode {
    pub fn new(m: usize, codewords: Vec<Vec<bool>>) -> Result<Self> {
        if m >= 32 || codewords.len() != 1 << m {
            return Err(Error::DimensionMismatch { expected: 1usize << m.min(31), got: codewords.len() });
        }
        let l = codewords.first().map_or(0, Vec::len);
        if l < m {
            return Err(invalid(format!("block length {l} is below message length {m}")));
        }
        if let Some(c) = codewords.iter().find(|c| c.len() != l) {
            return Err(Error::DimensionMismatch { expected: l, got: c.len() });
        }
        let words = codewords.iter().map(|c| pack(c.iter().copied(), l)).collect();
        Ok(Self { m, l, words })
    }

    /// Every codeword bit drawn independently and uniformly.
    pub fn random(m: usize, l: usize, rng: &mut SimRng) -> Result<Self> {
        if m >= 32 || l < m || l == 0 {
            return Err(invalid(format!("need m < 32 and L >= max(m, 1), got m={m}, L={l}")));
        }
        let words = (0..1usize << m).map(|_| pack((0..l).map(|_| rng.random::<bool>()), l)).collect();
        Ok(Self { m, l, words })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn block_length(&self) -> usize {
        self.l
    }

    /// Bit `j` (1-based) of the codeword of `x`.
    pub fn bit(&self, x: u64, j: usize) -> bool {
        let j = j - 1;
        self.words[x as usize][j / 64] >> (j % 64) & 1 == 1
    }

    pub fn encode(&self, x: u64) -> Vec<bool> {
        (1..=self.l).map(|j| self.bit(x, j)).collect()
    }

    /// Codewords restricted to the coordinate list `s` (1-based, repeats
    /// allowed), or all coordinates when `s` is `None`.
    fn projected(&self, s: Option<&[usize]>) -> Result<Vec<Vec<u64>>> {
        let Some(s) = s else { return Ok(self.words.clone()) };
        if let Some(&j) = s.iter().find(|&&j| j == 0 || j > self.l) {
            return Err(invalid(format!("coordinate {j} outside 1..={}", self.l)));
        }
        Ok((0..self.words.len() as u64).map(|x| pack(s.iter().map(|&j| self.bit(x, j)), s.len())).collect())
    }

    /// Text form: `m L` then one line of `L` binary digits per message, in
    /// message order.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.m, self.l);
        for x in 0..self.words.len() as u64 {
            for b in self.encode(x) {
                out.push(if b { '1' } else { '0' });
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty code file".into()))?;
        let nums: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad header token {t:?}"))))
            .collect::<Result<_>>()?;
        let [m, l] = nums[..] else { return Err(Error::Parse(format!("header must be `m L`, got {header:?}"))) };
        if m >= 32 {
            return Err(Error::Parse(format!("message length {m} too large")));
        }
        let mut codewords = Vec::with_capacity(1 << m);
        for (i, line) in lines.enumerate() {
            if line.len() != l {
                return Err(Error::Parse(format!("codeword {} has length {}, expected {l}", i + 1, line.len())));
            }
            let bits = line
                .chars()
                .map(|c| match c {
                    '0' => Ok(false),
                    '1' => Ok(true),
                    _ => Err(Error::Parse(format!("codeword {}: unexpected character {c:?}", i + 1))),
                })
                .collect::<Result<Vec<bool>>>()?;
            codewords.push(bits);
        }
        if codewords.len() != 1 << m {
            return Err(Error::Parse(format!("expected {} codewords, found {}", 1usize << m, codewords.len())));
        }
        Self::new(m, codewords).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        Ok(std::fs::write(path, self.to_text())?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RadiusReport {
    /// Largest `r` with at least half the messages having every rival at
    /// distance above `2r`; 0 when `degenerate`.
    pub radius: usize,
    /// The `2^(m-1)`-th largest nearest-rival distance.
    pub half_distance: u32,
    /// No positive radius: at least half the messages share their codeword.
    pub degenerate: bool,
}

/// Half-unique-decoding radius of the code restricted to `s`.
pub fn half_unique_radius(code: &BinaryCode, s: Option<&[usize]>) -> Result<RadiusReport> {
    if code.m > RADIUS_MAX_BITS {
        return Err(invalid(format!("m = {} exceeds the all-pairs limit {RADIUS_MAX_BITS}", code.m)));
    }
    let words = code.projected(s)?;
    let len = s.map_or(code.l, <[usize]>::len) as u32;
    let mut nearest: Vec<u32> = (0..words.len())
        .into_par_iter()
        .map(|x| {
            (0..words.len()).filter(|&y| y != x).map(|y| hamming(&words[x], &words[y])).min().unwrap_or(len + 1)
        })
        .collect();
    nearest.sort_unstable_by(|a, b| b.cmp(a));
    let half_distance = nearest[(words.len() / 2).max(1) - 1];
    Ok(if half_distance == 0 {
        RadiusReport { radius: 0, half_distance, degenerate: true }
    } else {
        RadiusReport { radius: ((half_distance - 1) / 2) as usize, half_distance, degenerate: false }
    })
}

/// Message whose (projected) codeword is nearest to `y_hat`; ties go to the
/// smallest message.
pub fn nearest_codeword(code: &BinaryCode, s: Option<&[usize]>, y_hat: &[bool]) -> Result<u64> {
    let len = s.map_or(code.l, <[usize]>::len);
    if y_hat.len() != len {
        return Err(Error::DimensionMismatch { expected: len, got: y_hat.len() });
    }
    let target = pack(y_hat.iter().copied(), len);
    let words = code.projected(s)?;
    let best = words.iter().enumerate().min_by_key(|(x, w)| (hamming(w, &target), *x)).map(|(x, _)| x);
    Ok(best.unwrap_or(0) as u64)
}

/// Draws random `(m, l)` codes until one reaches half-unique radius
/// `target`. Attempt `a` uses seed `derive_seed(seed, a)`, and the lowest
/// successful attempt wins, so the result does not depend on scheduling.
pub fn search_code(m: usize, l: usize, target: usize, attempts: usize, seed: u64) -> Result<(BinaryCode, RadiusReport)> {
    if m > RADIUS_MAX_BITS {
        return Err(invalid(format!("m = {m} exceeds the all-pairs limit {RADIUS_MAX_BITS}")));
    }
    if l < m || l == 0 {
        return Err(invalid(format!("need L >= max(m, 1), got m={m}, L={l}")));
    }
    (0..attempts)
        .into_par_iter()
        .map(|a| {
            let code = BinaryCode::random(m, l, &mut seeded(derive_seed(seed, a as u64))).expect("validated");
            let r = half_unique_radius(&code, None).expect("validated");
            (code, r)
        })
        .find_first(|(_, r)| !r.degenerate && r.radius >= target)
        .ok_or(Error::CodeSearchFailed { target, attempts })
}

fn check_gan(n: usize, g: &HardFunction) -> Result<()> {
    if n < 4 || !n.is_multiple_of(4) {
        return Err(invalid(format!("n = {n} must be a positive multiple of 4")));
    }
    if g.m != n / 4 || g.range != n / 2 {
        return Err(invalid(format!(
            "table must map {} bits to 1..={}, got {} bits to 1..={}",
            n / 4,
            n / 2,
            g.m,
            g.range
        )));
    }
    Ok(())
}

fn from_order(order: &[u32]) -> Permutation {
    Permutation::from_order_zero_based(order)
}

/// Arrival order `pi(x)`: item `i` starts at position `n-i+1`; positions `i`
/// and `i+n/4` swap when bit `i` of `x` is set; finally positions `n` and
/// `n/2+g(x)` swap, which moves item 1 there.
pub fn sample_pi_gan(n: usize, g: &HardFunction, x: u64) -> Result<Permutation> {
    check_gan(n, g)?;
    if g.m < 64 && x >> g.m != 0 {
        return Err(invalid(format!("message {x} wider than {} bits", g.m)));
    }
    Ok(from_order(&gan_order(n, g, x)))
}

fn gan_order(n: usize, g: &HardFunction, x: u64) -> Vec<u32> {
    let q = n / 4;
    let mut order: Vec<u32> = (0..n as u32).rev().collect();
    for i in 0..q {
        if x >> i & 1 == 1 {
            order.swap(i, i + q);
        }
    }
    order.swap(n - 1, n / 2 + g.eval(x) - 1);
    order
}

/// Uniform mixture of `pi(x)` over all messages `x`.
pub fn gan_distribution(n: usize, g: Arc<HardFunction>) -> Result<PermDistribution> {
    check_gan(n, &g)?;
    let support = if g.m <= GAN_SUPPORT_MAX_BITS {
        let w = 1.0 / (1u64 << g.m) as f64;
        Some(Support::new((0..1u64 << g.m).map(|x| (from_order(&gan_order(n, &g, x)), w)).collect())?)
    } else {
        None
    };
    let m = g.m;
    let sampler = Arc::new(move |rng: &mut SimRng| from_order(&gan_order(n, &g, rng.random_range(0..1u64 << m))));
    Ok(PermDistribution::from_sampler(n, "game-against-nature", sampler, support))
}

/// Reads bit `i` from whether arrival `i` beats arrival `i+n/4`, then stops
/// at time `n/2+g(x)`.
#[derive(Clone, Debug)]
pub struct GanPolicy {
    n: usize,
    g: Arc<HardFunction>,
    seen: OrderTracker,
    stop_at: Option<usize>,
}

pub fn alg_gan(n: usize, g: Arc<HardFunction>) -> Result<GanPolicy> {
    check_gan(n, &g)?;
    Ok(GanPolicy { n, g, seen: OrderTracker::with_capacity(n / 2), stop_at: None })
}

impl StoppingPolicy for GanPolicy {
    fn observe(&mut self, t: usize, rank: usize) -> bool {
        let half = self.n / 2;
        if t <= half {
            self.seen.push(rank);
            if t == half {
                let q = self.n / 4;
                let x = (1..=q).filter(|&i| self.seen.better(i, i + q)).fold(0u64, |x, i| x | 1 << (i - 1));
                self.stop_at = Some(half + self.g.eval(x));
            }
            return false;
        }
        self.stop_at == Some(t)
    }
}

fn check_even(n: usize) -> Result<()> {
    if n < 2 || !n.is_multiple_of(2) {
        return Err(invalid(format!("n = {n} must be a positive even number")));
    }
    Ok(())
}

fn check_eighths(n: usize) -> Result<()> {
    if n < 8 || !n.is_multiple_of(8) {
        return Err(invalid(format!("n = {n} must be a positive multiple of 8")));
    }
    Ok(())
}

/// A random `n/2`-subset of `1..n` in increasing order, the rest of `1..n`
/// in increasing order, then item `n`; finally position `n` swaps with a
/// uniform position in `1..=n/2`.
pub fn sample_pi_c1(n: usize, rng: &mut SimRng) -> Result<Permutation> {
    check_even(n)?;
    Ok(from_order(&c1_order(n, rng)))
}

fn c1_order(n: usize, rng: &mut SimRng) -> Vec<u32> {
    let mut in_left = vec![false; n - 1];
    for i in sample_indices(rng, n - 1, n / 2) {
        in_left[i] = true;
    }
    let mut order: Vec<u32> = (0..n as u32 - 1).filter(|&i| in_left[i as usize]).collect();
    order.extend((0..n as u32 - 1).filter(|&i| !in_left[i as usize]));
    order.push(n as u32 - 1);
    let i = rng.random_range(0..n / 2);
    order.swap(i, n - 1);
    order
}

pub fn c1_distribution(n: usize) -> Result<PermDistribution> {
    check_even(n)?;
    Ok(PermDistribution::from_sampler(n, "coerce-max", Arc::new(move |rng: &mut SimRng| from_order(&c1_order(n, rng))), None))
}

/// Observe `n/2` arrivals, then take the first best-so-far.
pub fn alg_c1(n: usize) -> CutoffPolicy {
    CutoffPolicy::new(n / 2)
}

fn check_kappa(n: usize, kappa: f64) -> Result<()> {
    if !(kappa > 0.0 && kappa <= 0.125) {
        return Err(invalid(format!("kappa = {kappa} must lie in (0, 1/8]")));
    }
    if n as f64 * kappa < 1.0 {
        return Err(invalid(format!("n * kappa = {} must be at least 1", n as f64 * kappa)));
    }
    Ok(())
}

/// Identity order with: the first `n/4` positions reversed with probability
/// 1/2; each position `i <= n/4` swapped with `i+n/4` with probability
/// `1/(n kappa)`; then position `n` swapped with a uniform swapped position in
/// `(n/8, n/4]`, or with a uniform position there if none was swapped.
pub fn sample_pi_c2(n: usize, kappa: f64, rng: &mut SimRng) -> Result<Permutation> {
    check_eighths(n)?;
    check_kappa(n, kappa)?;
    Ok(from_order(&c2_order(n, kappa, rng).0))
}

/// Order plus the swapped positions above `n/8` (1-based).
fn c2_order(n: usize, kappa: f64, rng: &mut SimRng) -> (Vec<u32>, Vec<usize>) {
    let q = n / 4;
    let mut order: Vec<u32> = (0..n as u32).collect();
    if rng.random::<bool>() {
        order[..q].reverse();
    }
    let p = 1.0 / (n as f64 * kappa);
    let mut upper = Vec::new();
    for i in 1..=q {
        if rng.random::<f64>() < p {
            order.swap(i - 1, i + q - 1);
            if i > n / 8 {
                upper.push(i);
            }
        }
    }
    let i = if upper.is_empty() {
        rng.random_range(n / 8 + 1..=q)
    } else {
        upper[rng.random_range(0..upper.len())]
    };
    order.swap(i - 1, n - 1);
    (order, upper)
}

/// Number of swapped positions above `n/8` in one draw of [`sample_pi_c2`].
pub fn c2_upper_swaps(n: usize, kappa: f64, rng: &mut SimRng) -> Result<usize> {
    check_eighths(n)?;
    check_kappa(n, kappa)?;
    Ok(c2_order(n, kappa, rng).1.len())
}

pub fn c2_distribution(n: usize, kappa: f64) -> Result<PermDistribution> {
    check_eighths(n)?;
    check_kappa(n, kappa)?;
    let sampler = Arc::new(move |rng: &mut SimRng| from_order(&c2_order(n, kappa, rng).0));
    Ok(PermDistribution::from_sampler(n, "coerce-decodable", sampler, None))
}

/// Observe `n/8` arrivals, then take the first best-so-far.
pub fn alg_c2(n: usize) -> CutoffPolicy {
    CutoffPolicy::new(n / 8)
}

fn check_encrypted(n: usize, code: &BinaryCode, g: &HardFunction) -> Result<()> {
    check_eighths(n)?;
    if code.l != n / 8 {
        return Err(Error::DimensionMismatch { expected: n / 8, got: code.l });
    }
    if 2 * code.m > n / 4 {
        return Err(invalid(format!("2m = {} exceeds n/4 = {}", 2 * code.m, n / 4)));
    }
    if g.m != code.m || g.range != n / 2 {
        return Err(invalid(format!(
            "table must map {} bits to 1..={}, got {} bits to 1..={}",
            code.m,
            n / 2,
            g.m,
            g.range
        )));
    }
    Ok(())
}

/// Draw of the encrypting distribution with its message.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EncryptedDraw {
    pub x: u64,
    pub perm: Permutation,
}

/// Identity order; for each `i <= n/8` with codeword bit `y_i = 1`,
/// positions `3n/8+i` and `n/4+i` swap; then positions `n` and `n/2+g(x)`
/// swap.
pub fn sample_pi_e(n: usize, code: &BinaryCode, g: &HardFunction, rng: &mut SimRng) -> Result<EncryptedDraw> {
    check_encrypted(n, code, g)?;
    let x = rng.random_range(0..1u64 << code.m);
    Ok(EncryptedDraw { x, perm: from_order(&encrypted_order(n, code, g, x)) })
}

/// The encrypting arrival order for a fixed message.
pub fn pi_e_for(n: usize, code: &BinaryCode, g: &HardFunction, x: u64) -> Result<Permutation> {
    check_encrypted(n, code, g)?;
    if x >> code.m != 0 {
        return Err(invalid(format!("message {x} wider than {} bits", code.m)));
    }
    Ok(from_order(&encrypted_order(n, code, g, x)))
}

fn encrypted_order(n: usize, code: &BinaryCode, g: &HardFunction, x: u64) -> Vec<u32> {
    let mut order: Vec<u32> = (0..n as u32).collect();
    for i in 1..=n / 8 {
        if code.bit(x, i) {
            order.swap(3 * n / 8 + i - 1, n / 4 + i - 1);
        }
    }
    order.swap(n - 1, n / 2 + g.eval(x) - 1);
    order
}

pub fn encrypted_distribution(n: usize, code: Arc<BinaryCode>, g: Arc<HardFunction>) -> Result<PermDistribution> {
    check_encrypted(n, &code, &g)?;
    let m = code.m;
    let sampler =
        Arc::new(move |rng: &mut SimRng| from_order(&encrypted_order(n, &code, &g, rng.random_range(0..1u64 << m))));
    Ok(PermDistribution::from_sampler(n, "encrypting", sampler, None))
}

/// What the encrypted-order decoder read after `n/2` arrivals.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodedClue {
    /// Coordinates read, one per probed arrival (1-based, may repeat).
    pub coords: Vec<usize>,
    pub bits: Vec<bool>,
    pub message: u64,
    pub stop_at: usize,
}

/// Lists the arrivals at times `(n/4, n/2]` best first and reads, for the
/// first `2m`, a bit and a coordinate from each arrival time; decodes the
/// nearest message and stops at `n/2+g(x)`.
#[derive(Clone, Debug)]
pub struct EncryptedPolicy {
    n: usize,
    code: Arc<BinaryCode>,
    g: Arc<HardFunction>,
    seen: OrderTracker,
    clue: Option<DecodedClue>,
}

pub fn alg_e(n: usize, code: Arc<BinaryCode>, g: Arc<HardFunction>) -> Result<EncryptedPolicy> {
    check_encrypted(n, &code, &g)?;
    Ok(EncryptedPolicy { n, code, g, seen: OrderTracker::with_capacity(n / 2), clue: None })
}

impl EncryptedPolicy {
    pub fn clue(&self) -> Option<&DecodedClue> {
        self.clue.as_ref()
    }

    fn decode(&self) -> DecodedClue {
        let (n, m) = (self.n, self.code.m);
        let probes = self.seen.times_by_value().into_iter().filter(|&t| t > n / 4).take(2 * m);
        let (mut coords, mut bits) = (Vec::with_capacity(2 * m), Vec::with_capacity(2 * m));
        for t in probes {
            if t <= 3 * n / 8 {
                bits.push(true);
                coords.push(t - n / 4);
            } else {
                bits.push(false);
                coords.push(t - 3 * n / 8);
            }
        }
        let message = nearest_codeword(&self.code, Some(&coords), &bits).expect("coordinates lie in 1..=n/8");
        let stop_at = n / 2 + self.g.eval(message);
        DecodedClue { coords, bits, message, stop_at }
    }
}

impl StoppingPolicy for EncryptedPolicy {
    fn observe(&mut self, t: usize, rank: usize) -> bool {
        let half = self.n / 2;
        if t <= half {
            self.seen.push(rank);
            if t == half {
                self.clue = Some(self.decode());
            }
            return false;
        }
        self.clue.as_ref().is_some_and(|c| c.stop_at == t)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecodabilityVerdict {
    pub is_decodable: bool,
    /// The best item is item `n`.
    pub property1: bool,
    /// Among the best `floor(n kappa)` items of `(n/4, n/2]`, the share lying
    /// in `(3n/8, n/2]`.
    pub property2_fraction: f64,
    pub probe_size: usize,
}

pub fn is_decodable(sigma: &ValueOrdering, n: usize, kappa: f64) -> Result<DecodabilityVerdict> {
    check_eighths(n)?;
    if sigma.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: sigma.len() });
    }
    if !(kappa > 0.0) || n as f64 * kappa < 1.0 {
        return Err(invalid(format!("n * kappa = {} must be at least 1", n as f64 * kappa)));
    }
    let probe_size = ((n as f64 * kappa).floor() as usize).min(n / 4);
    let high = (1..=n)
        .map(|r| sigma.item_at_rank(r))
        .filter(|&i| i > n / 4 && i <= n / 2)
        .take(probe_size)
        .filter(|&i| i > 3 * n / 8)
        .count();
    let property1 = sigma.item_at_rank(1) == n;
    let property2_fraction = high as f64 / probe_size as f64;
    Ok(DecodabilityVerdict {
        is_decodable: property1 && property2_fraction >= DECODABLE_FRACTION,
        property1,
        property2_fraction,
        probe_size,
    })
}

/// One of the three matched policies, chosen per trial.
#[derive(Clone, Debug)]
pub enum HardnessPolicy {
    Encrypted(EncryptedPolicy),
    CoerceMax(CutoffPolicy),
    CoerceDecodable(CutoffPolicy),
}

impl StoppingPolicy for HardnessPolicy {
    fn observe(&mut self, t: usize, rank: usize) -> bool {
        match self {
            Self::Encrypted(p) => p.observe(t, rank),
            Self::CoerceMax(p) | Self::CoerceDecodable(p) => p.observe(t, rank),
        }
    }
}

/// Equal-weight mixture of the encrypting and two coercing distributions,
/// with a policy factory that picks one of the three matched policies
/// uniformly per trial.
#[derive(Clone, Debug)]
pub struct CombinedConstruction {
    pub distribution: PermDistribution,
    n: usize,
    code: Arc<BinaryCode>,
    g: Arc<HardFunction>,
}

impl CombinedConstruction {
    pub fn policy(&self, rng: &mut SimRng) -> HardnessPolicy {
        match rng.random_range(0..3u8) {
            0 => HardnessPolicy::Encrypted(alg_e(self.n, self.code.clone(), self.g.clone()).expect("validated")),
            1 => HardnessPolicy::CoerceMax(alg_c1(self.n)),
            _ => HardnessPolicy::CoerceDecodable(alg_c2(self.n)),
        }
    }
}

pub fn combined_mixture(n: usize, kappa: f64, code: Arc<BinaryCode>, g: Arc<HardFunction>) -> Result<CombinedConstruction> {
    check_encrypted(n, &code, &g)?;
    check_kappa(n, kappa)?;
    let w = 1.0 / 3.0;
    let distribution = mixture(
        vec![encrypted_distribution(n, code.clone(), g.clone())?, c1_distribution(n)?, c2_distribution(n, kappa)?],
        vec![w, w, 1.0 - 2.0 * w],
    )?;
    Ok(CombinedConstruction { distribution, n, code, g })
}

/// Best item `n-1`, then item `n`, then the rest in decreasing index order.
pub fn top_two_swapped(n: usize) -> ValueOrdering {
    let mut order: Vec<usize> = (1..=n).rev().collect();
    order.swap(0, 1);
    ValueOrdering::new(order).expect("permutation")
}

/// Item `n` best, then items `(n/4, 3n/8]` from the top down, then the rest
/// in decreasing index order. The probed items all lie in the low half of
/// `(n/4, n/2]`.
pub fn low_probe_ordering(n: usize) -> ValueOrdering {
    let mut order = vec![n];
    order.extend((n / 4 + 1..=3 * n / 8).rev());
    order.extend((1..n).rev().filter(|&i| !(i > n / 4 && i <= 3 * n / 8)));
    ValueOrdering::new(order).expect("permutation")
}

/// Item `n` best, then items `(3n/8, n/2]` from the top down, then the rest.
pub fn high_probe_ordering(n: usize) -> ValueOrdering {
    let mut order = vec![n];
    order.extend((3 * n / 8 + 1..=n / 2).rev());
    order.extend((1..n).rev().filter(|&i| !(i > 3 * n / 8 && i <= n / 2)));
    ValueOrdering::new(order).expect("permutation")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm_core::compose;
    use crate::secretary_algs::{classic_threshold_policy, pcs, pcs_exact, random_threshold_policy, run_policy};
    use proptest::prelude::*;

    fn repetition(l: usize) -> BinaryCode {
        BinaryCode::new(1, vec![vec![false; l], vec![true; l]]).unwrap()
    }

    /// Independent radius: count messages isolated at distance > 2r for
    /// decreasing r.
    fn radius_oracle(words: &[Vec<bool>]) -> Option<usize> {
        let dist = |a: &[bool], b: &[bool]| a.iter().zip(b).filter(|(x, y)| x != y).count();
        let half = words.len().div_ceil(2);
        (0..=words[0].len()).rev().find(|&r| {
            let isolated = (0..words.len())
                .filter(|&x| (0..words.len()).all(|y| y == x || dist(&words[x], &words[y]) > 2 * r))
                .count();
            isolated >= half
        })
    }

    #[test]
    fn hard_function_table() {
        let g = HardFunction::random(6, 10, 3).unwrap();
        assert_eq!(g, HardFunction::random(6, 10, 3).unwrap());
        assert!((0..64).all(|x| (1..=10).contains(&g.eval(x))));
        assert!(HardFunction::random(21, 4, 0).is_err());
        assert!(HardFunction::from_table(1, 2, vec![1, 3]).is_err());
    }

    #[test]
    fn code_text_round_trip() {
        let code = BinaryCode::random(3, 5, &mut seeded(9)).unwrap();
        let back = BinaryCode::from_text(&code.to_text()).unwrap();
        assert_eq!(back, code);
        assert_eq!(repetition(3).to_text(), "1 3\n000\n111\n");
        assert!(BinaryCode::from_text("1 3\n000\n").is_err());
        assert!(BinaryCode::from_text("1 3\n000\n1x1\n").is_err());
        assert!(BinaryCode::from_text("2 1\n0\n1\n0\n1\n").is_err());
        let dir = std::env::temp_dir().join(format!("nusec-code-{}", std::process::id()));
        code.write(&dir).unwrap();
        assert_eq!(BinaryCode::read(&dir).unwrap(), code);
        std::fs::remove_file(&dir).unwrap();
    }

    #[test]
    fn radius_fixtures() {
        let r = half_unique_radius(&repetition(6), None).unwrap();
        assert_eq!((r.radius, r.half_distance, r.degenerate), (2, 6, false));
        let same = BinaryCode::new(1, vec![vec![true, false], vec![true, false]]).unwrap();
        let r = half_unique_radius(&same, None).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.radius, 0);
        let code = BinaryCode::random(6, 24, &mut seeded(2024)).unwrap();
        let words: Vec<Vec<bool>> = (0..64).map(|x| code.encode(x)).collect();
        let r = half_unique_radius(&code, None).unwrap();
        assert_eq!(Some(r.radius), radius_oracle(&words));
        assert_eq!(r.radius, 2);
        assert!(half_unique_radius(&BinaryCode::random(13, 13, &mut seeded(1)).unwrap(), None).is_err());
    }

    #[test]
    fn nearest_codeword_fixtures() {
        let rep = repetition(5);
        assert_eq!(nearest_codeword(&rep, None, &[true; 5]).unwrap(), 1);
        assert_eq!(nearest_codeword(&rep, None, &[true, true, false, false, false]).unwrap(), 0);
        // exact tie goes to the smaller message
        assert_eq!(nearest_codeword(&rep, Some(&[1, 2]), &[true, false]).unwrap(), 0);
        assert!(nearest_codeword(&rep, None, &[true; 4]).is_err());
        let code = BinaryCode::random(6, 20, &mut seeded(5)).unwrap();
        for x in 0..64 {
            assert_eq!(nearest_codeword(&code, None, &code.encode(x)).unwrap(), x);
        }
    }

    #[test]
    fn worst_case_flips_decode_half() {
        let (code, rep) = search_code(6, 24, 2, 200, 11).unwrap();
        let r = rep.radius;
        let mut ok = 0;
        for x in 0..64u64 {
            let y = code.encode(x);
            // push y toward its nearest rival with r flips
            let rival = (0..64u64)
                .filter(|&z| z != x)
                .min_by_key(|&z| code.encode(z).iter().zip(&y).filter(|(a, b)| a != b).count())
                .unwrap();
            let target = code.encode(rival);
            let mut y_hat = y.clone();
            let mut flips = 0;
            for j in 0..y.len() {
                if flips < r && y_hat[j] != target[j] {
                    y_hat[j] = target[j];
                    flips += 1;
                }
            }
            if nearest_codeword(&code, None, &y_hat).unwrap() == x {
                ok += 1;
            }
        }
        assert!(ok >= 32, "decoded {ok} of 64");
    }

    #[test]
    fn code_search_reports_failure() {
        // 64 codewords in {0,1}^8: radius-1 balls around 32 of them cannot be disjoint
        assert_eq!(search_code(6, 8, 1, 50, 1).unwrap_err(), Error::CodeSearchFailed { target: 1, attempts: 50 });
        let (a, _) = search_code(4, 16, 2, 100, 7).unwrap();
        let (b, _) = search_code(4, 16, 2, 100, 7).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn gan_hand_trace() {
        let g = HardFunction::from_table(2, 4, vec![1, 3, 2, 4]).unwrap();
        // start 8 7 6 5 4 3 2 1, no bit swaps, then positions 8 and 5 swap
        let p = sample_pi_gan(8, &g, 0).unwrap();
        assert_eq!(p.arrival_order(), vec![8, 7, 6, 5, 1, 3, 2, 4]);
        // x = 0b01 swaps positions 1 and 3, g = 3 swaps positions 8 and 7
        let p = sample_pi_gan(8, &g, 1).unwrap();
        assert_eq!(p.arrival_order(), vec![6, 7, 8, 5, 4, 3, 1, 2]);
        assert!(sample_pi_gan(10, &g, 0).is_err());
        assert!(sample_pi_gan(8, &g, 4).is_err());
    }

    #[test]
    fn gan_policy_decodes_every_message() {
        for n in [8, 16, 32] {
            let g = Arc::new(HardFunction::random(n / 4, n / 2, n as u64).unwrap());
            let dist = gan_distribution(n, g.clone()).unwrap();
            let id = ValueOrdering::identity(n);
            assert_eq!(pcs_exact(|| alg_gan(n, g.clone()).unwrap(), &dist, &id).unwrap(), 1.0);
            // top two values swapped: the decoded slot never holds the new best
            let mut top = (1..=n).collect::<Vec<_>>();
            top.swap(0, 1);
            let swapped = ValueOrdering::new(top).unwrap();
            assert_eq!(pcs_exact(|| alg_gan(n, g.clone()).unwrap(), &dist, &swapped).unwrap(), 0.0);
        }
    }

    #[test]
    fn gan_without_structure() {
        let n = 64;
        let g = Arc::new(HardFunction::random(16, 32, 1).unwrap());
        let est = pcs(|_| alg_gan(n, g.clone()).unwrap(), &crate::distributions::uniform(n), &ValueOrdering::identity(n), 20_000, 4)
            .unwrap();
        assert!(est.estimate < 0.1, "{}", est.estimate);
    }

    #[test]
    fn c1_structure_and_bounds() {
        let n = 64;
        let mut rng = seeded(1);
        for _ in 0..200 {
            let order = sample_pi_c1(n, &mut rng).unwrap().arrival_order();
            // undo the final swap: item n sits in the first half, its slot's
            // former occupant is last
            let i = order.iter().position(|&x| x == n).unwrap();
            assert!(i < n / 2);
            let mut pre = order.clone();
            pre.swap(i, n - 1);
            assert!(pre[..n / 2].windows(2).all(|w| w[0] < w[1]));
            assert!(pre[n / 2..n - 1].windows(2).all(|w| w[0] < w[1]));
        }
        let dist = c1_distribution(n).unwrap();
        let mut top: Vec<usize> = (1..=n).rev().collect();
        top.swap(0, 1);
        let sigma = ValueOrdering::new(top).unwrap();
        let est = pcs(|_| alg_c1(n), &dist, &sigma, 20_000, 2).unwrap();
        assert!(est.estimate > 0.25, "{}", est.estimate);
        let rho = ValueOrdering::increasing(n);
        let bound = 2.0 / n as f64;
        for est in [
            pcs(|_| alg_c1(n), &dist, &rho, 20_000, 3).unwrap(),
            pcs(|_| classic_threshold_policy(n), &dist, &rho, 20_000, 4).unwrap(),
            pcs(|rng| random_threshold_policy(n, rng), &dist, &rho, 20_000, 5).unwrap(),
        ] {
            assert!(est.estimate <= bound + 3.0 * est.standard_error + 1e-12, "{}", est.estimate);
        }
    }

    #[test]
    fn c2_upper_swap_mean() {
        let (n, kappa) = (256, 1.0 / 16.0);
        let trials = 20_000u64;
        let mut rng = seeded(8);
        let draws: Vec<f64> = (0..trials).map(|_| c2_upper_swaps(n, kappa, &mut rng).unwrap() as f64).collect();
        let mean = draws.iter().sum::<f64>() / trials as f64;
        let var = draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (trials - 1) as f64;
        let se = (var / trials as f64).sqrt();
        assert!((mean - 1.0 / (8.0 * kappa)).abs() <= 3.0 * se, "{mean} ± {se}");
        assert!(sample_pi_c2(100, kappa, &mut rng).is_err());
        assert!(sample_pi_c2(256, 0.2, &mut rng).is_err());
    }

    #[test]
    fn c2_beats_property2_violation() {
        let (n, kappa) = (256, 1.0 / 16.0);
        let sigma = property2_violating(n);
        let v = is_decodable(&sigma, n, kappa).unwrap();
        assert!(v.property1 && !v.is_decodable);
        let est = pcs(|_| alg_c2(n), &c2_distribution(n, kappa).unwrap(), &sigma, 50_000, 6).unwrap();
        assert!(est.estimate > 1.0 / 250.0, "{}", est.estimate);
    }

    /// Item n best, then the items of (n/4, 3n/8], then the rest by index.
    fn property2_violating(n: usize) -> ValueOrdering {
        let mut top = vec![n];
        top.extend((n / 4 + 1..=3 * n / 8).rev());
        top.extend((1..n).rev().filter(|&i| !(n / 4 + 1..=3 * n / 8).contains(&i)));
        ValueOrdering::new(top).unwrap()
    }

    #[test]
    fn probe_orderings_match_hand_built() {
        for n in [64, 256] {
            assert_eq!(low_probe_ordering(n), property2_violating(n));
            let v = is_decodable(&high_probe_ordering(n), n, DEFAULT_KAPPA).unwrap();
            assert!(v.is_decodable && v.property2_fraction == 1.0);
        }
        assert_eq!(top_two_swapped(5).rank_to_item(), vec![4, 5, 3, 2, 1]);
    }

    fn small_encrypted(seed: u64) -> (usize, Arc<BinaryCode>, Arc<HardFunction>) {
        let n = 64;
        let code = Arc::new(BinaryCode::random(6, 8, &mut seeded(seed)).unwrap());
        let g = Arc::new(HardFunction::random(6, 32, seed).unwrap());
        (n, code, g)
    }

    #[test]
    fn encrypted_keeps_middle_block() {
        let (n, code, g) = small_encrypted(1);
        let mut rng = seeded(2);
        for _ in 0..200 {
            let d = sample_pi_e(n, &code, &g, &mut rng).unwrap();
            for item in n / 4 + 1..=n / 2 {
                let t = d.perm.position(item);
                assert!(t > n / 4 && t <= n / 2);
            }
            assert_eq!(d.perm.position(n), n / 2 + g.eval(d.x));
        }
    }

    fn injective_code(m: usize, l: usize) -> BinaryCode {
        (0..)
            .map(|s| BinaryCode::random(m, l, &mut seeded(s)).unwrap())
            .find(|c| {
                let mut w: Vec<Vec<bool>> = (0..1u64 << m).map(|x| c.encode(x)).collect();
                w.sort();
                w.dedup();
                w.len() == 1 << m
            })
            .unwrap()
    }

    #[test]
    fn encrypted_round_trip_without_misplacement() {
        // 2m = n/8: with increasing values every probe lies in (3n/8, n/2]
        let n = 64;
        let code = Arc::new(injective_code(4, 8));
        let g = Arc::new(HardFunction::random(4, 32, 3).unwrap());
        let sigma = ValueOrdering::increasing(n);
        assert!(is_decodable(&sigma, n, DEFAULT_KAPPA).unwrap().is_decodable);
        for x in 0..16u64 {
            let seq = compose(&pi_e_for(n, &code, &g, x).unwrap(), &sigma).unwrap();
            let mut p = alg_e(n, code.clone(), g.clone()).unwrap();
            let stop = run_policy(&mut p, &seq);
            let clue = p.clue().unwrap();
            assert_eq!(clue.bits, clue.coords.iter().map(|&j| code.bit(x, j)).collect::<Vec<_>>());
            assert_eq!(clue.message, x);
            assert_eq!(stop, Some(n / 2 + g.eval(x)));
            assert_eq!(seq.rank_at(stop.unwrap()), 1);
        }
    }

    #[test]
    fn encrypted_reads_with_low_probes() {
        // 2m = 12 > n/8 = 8: the probes are items 32..21, the last four low;
        // a low item n/4+i reads the complement of y_i at coordinate i
        let (n, code, g) = small_encrypted(3);
        let sigma = ValueOrdering::increasing(n);
        for x in 0..64u64 {
            let seq = compose(&pi_e_for(n, &code, &g, x).unwrap(), &sigma).unwrap();
            let mut p = alg_e(n, code.clone(), g.clone()).unwrap();
            run_policy(&mut p, &seq);
            let clue = p.clue().unwrap();
            let coords: Vec<usize> = (1..=8).rev().chain((5..=8).rev()).collect();
            assert_eq!(clue.coords, coords);
            for (l, (&j, &b)) in clue.coords.iter().zip(&clue.bits).enumerate() {
                assert_eq!(b, code.bit(x, j) ^ (l >= 8));
            }
            // every rival sits at distance 4 + (disagreements on coordinates 1..4)
            let agrees = |z: u64| (1..=4).all(|j| code.bit(z, j) == code.bit(x, j));
            let expect = (0..64u64).find(|&z| agrees(z)).unwrap();
            assert_eq!(clue.message, expect);
        }
    }

    #[test]
    fn decodability_fixtures() {
        let n = 256;
        let v = is_decodable(&ValueOrdering::increasing(n), n, 1.0 / 16.0).unwrap();
        assert!(v.is_decodable && v.property1);
        assert_eq!((v.property2_fraction, v.probe_size), (1.0, 16));
        let v = is_decodable(&ValueOrdering::identity(n), n, 1.0 / 16.0).unwrap();
        assert!(!v.property1 && !v.is_decodable);
        // probe of 40 with exactly two low items among the best 40 of (n/4, n/2]
        let n = 640;
        let (lo, hi) = (n / 4 + 1..=3 * n / 8, 3 * n / 8 + 1..=n / 2);
        let mut top = vec![n];
        top.extend(hi.clone().rev().take(38));
        top.extend(lo.clone().take(2));
        let rest: Vec<usize> = (1..n).rev().filter(|i| !top.contains(i)).collect();
        top.extend(rest);
        let v = is_decodable(&ValueOrdering::new(top).unwrap(), n, 1.0 / 16.0).unwrap();
        assert_eq!(v.probe_size, 40);
        assert!((v.property2_fraction - 0.95).abs() < 1e-12);
        assert!(v.property1 && !v.is_decodable);
    }

    #[test]
    fn combined_construction_runs() {
        let n = 64;
        let (code, _) = search_code(6, 8, 0, 10, 1).unwrap();
        let g = Arc::new(HardFunction::random(6, 32, 2).unwrap());
        let c = combined_mixture(n, DEFAULT_KAPPA, Arc::new(code), g).unwrap();
        let mut top: Vec<usize> = (1..=n).rev().collect();
        top.swap(0, 1);
        let sigma = ValueOrdering::new(top).unwrap();
        let est = pcs(|rng| c.policy(rng), &c.distribution, &sigma, 20_000, 3).unwrap();
        assert!(est.estimate >= 0.25 / 3.0 - 3.0 * est.standard_error, "{}", est.estimate);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn radius_shrinks_under_projection(seed in any::<u64>(), keep in 1usize..12) {
            let code = BinaryCode::random(5, 12, &mut seeded(seed)).unwrap();
            let full = half_unique_radius(&code, None).unwrap();
            let s: Vec<usize> = (1..=keep).collect();
            let part = half_unique_radius(&code, Some(&s)).unwrap();
            prop_assert!(part.half_distance <= full.half_distance);
            prop_assert!(part.radius <= full.radius || part.degenerate);
        }

        #[test]
        fn samplers_give_permutations(seed in any::<u64>()) {
            let mut rng = seeded(seed);
            let n = 64;
            for p in [sample_pi_c1(n, &mut rng).unwrap(), sample_pi_c2(n, 0.125, &mut rng).unwrap()] {
                prop_assert!(Permutation::new(p.positions()).is_ok());
            }
            let (_, code, g) = small_encrypted(seed);
            let d = sample_pi_e(n, &code, &g, &mut rng).unwrap();
            prop_assert!(Permutation::new(d.perm.positions()).is_ok());
        }

        #[test]
        fn encrypted_policy_reads_ranks_only(seed in any::<u64>()) {
            let (n, code, g) = small_encrypted(seed);
            let mut rng = seeded(seed ^ 1);
            let sigma = ValueOrdering::random(n, &mut rng);
            let d = sample_pi_e(n, &code, &g, &mut rng).unwrap();
            let seq = compose(&d.perm, &sigma).unwrap();
            let stream = crate::perm_core::prefix_ranks(&seq);
            let mut a = alg_e(n, code.clone(), g.clone()).unwrap();
            let mut b = alg_e(n, code, g).unwrap();
            let from_seq = run_policy(&mut a, &seq);
            let from_stream = stream.ranks().into_iter().enumerate().find(|&(i, r)| b.observe(i + 1, r)).map(|(i, _)| i + 1);
            prop_assert_eq!(from_seq, from_stream);
        }
    }
}
