//! Arrival orders, value orderings and the prefix-rank view of an arrival
//! sequence. Public indices are 1-based; storage is 0-based `u32`.

use crate::error::{Error, Result};
use crate::rng::SimRng;
use rand::seq::SliceRandom;

fn check_perm(v: &[usize], what: &str) -> Result<Vec<u32>> {
    let n = v.len();
    if n > u32::MAX as usize {
        return Err(Error::InvalidPermutation(format!("{what}: too long")));
    }
    let mut seen = vec![false; n];
    let mut out = Vec::with_capacity(n);
    for (i, &x) in v.iter().enumerate() {
        if x == 0 || x > n {
            return Err(Error::InvalidPermutation(format!(
                "{what}: entry {} is {x}, expected a value in 1..={n}",
                i + 1
            )));
        }
        if seen[x - 1] {
            return Err(Error::InvalidPermutation(format!("{what}: value {x} repeated")));
        }
        seen[x - 1] = true;
        out.push((x - 1) as u32);
    }
    Ok(out)
}

fn invert0(v: &[u32]) -> Vec<u32> {
    let mut inv = vec![0u32; v.len()];
    for (i, &x) in v.iter().enumerate() {
        inv[x as usize] = i as u32;
    }
    inv
}

/// Arrival order of `n` items: `position(i)` is the time at which item `i` arrives.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    pos: Vec<u32>,
}

impl Permutation {
    /// Builds from 1-based arrival positions, `pos[i-1]` being the time of item `i`.
    pub fn new(pos: Vec<usize>) -> Result<Self> {
        Ok(Self { pos: check_perm(&pos, "permutation")? })
    }

    /// Builds from the list of items (1-based) in the order they arrive.
    pub fn from_arrival_order(items: &[usize]) -> Result<Self> {
        let order = check_perm(items, "arrival order")?;
        Ok(Self { pos: invert0(&order) })
    }

    pub(crate) fn from_zero_based(pos: Vec<u32>) -> Self {
        debug_assert!(check_perm(&pos.iter().map(|&x| x as usize + 1).collect::<Vec<_>>(), "").is_ok());
        Self { pos }
    }

    pub(crate) fn from_order_zero_based(order: &[u32]) -> Self {
        Self::from_zero_based(invert0(order))
    }

    pub fn identity(n: usize) -> Self {
        Self { pos: (0..n as u32).collect() }
    }

    pub fn reverse(n: usize) -> Self {
        Self { pos: (0..n as u32).rev().collect() }
    }

    /// Uniformly random permutation (Fisher-Yates).
    pub fn random(n: usize, rng: &mut SimRng) -> Self {
        let mut pos: Vec<u32> = (0..n as u32).collect();
        pos.shuffle(rng);
        Self { pos }
    }

    pub fn len(&self) -> usize {
        self.pos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pos.is_empty()
    }

    /// Arrival time (1-based) of item `item` (1-based).
    pub fn position(&self, item: usize) -> usize {
        self.pos[item - 1] as usize + 1
    }

    pub fn positions(&self) -> Vec<usize> {
        self.pos.iter().map(|&p| p as usize + 1).collect()
    }

    /// Items (1-based) listed by arrival time.
    pub fn arrival_order(&self) -> Vec<usize> {
        invert0(&self.pos).into_iter().map(|x| x as usize + 1).collect()
    }

    pub fn zero_based(&self) -> &[u32] {
        &self.pos
    }

    pub fn invert(&self) -> Self {
        Self { pos: invert0(&self.pos) }
    }

    /// Space separated 1-based positions.
    pub fn to_line(&self) -> String {
        let parts: Vec<String> = self.pos.iter().map(|p| (p + 1).to_string()).collect();
        parts.join(" ")
    }

    pub fn parse_line(line: &str) -> Result<Self> {
        let v = line
            .split_whitespace()
            .map(|s| s.parse::<usize>().map_err(|e| Error::Parse(format!("{s:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        Self::new(v)
    }
}

/// Ranking of items by value: `item_at_rank(1)` is the most valuable item.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ValueOrdering {
    rank_to_item: Vec<u32>,
}

impl ValueOrdering {
    /// Builds from the 1-based items listed from best to worst.
    pub fn new(rank_to_item: Vec<usize>) -> Result<Self> {
        Ok(Self { rank_to_item: check_perm(&rank_to_item, "value ordering")? })
    }

    /// Item 1 is the best, item n the worst.
    pub fn identity(n: usize) -> Self {
        Self { rank_to_item: (0..n as u32).collect() }
    }

    /// Values increase with the item index: item n is the best.
    pub fn increasing(n: usize) -> Self {
        Self { rank_to_item: (0..n as u32).rev().collect() }
    }

    /// Orders items by decreasing value; equal values are ranked by
    /// increasing item index.
    pub fn from_values<T: PartialOrd + Copy>(values: &[T]) -> Self {
        let mut idx: Vec<u32> = (0..values.len() as u32).collect();
        idx.sort_by(|&a, &b| {
            values[b as usize]
                .partial_cmp(&values[a as usize])
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        Self { rank_to_item: idx }
    }

    pub fn random(n: usize, rng: &mut SimRng) -> Self {
        let mut v: Vec<u32> = (0..n as u32).collect();
        v.shuffle(rng);
        Self { rank_to_item: v }
    }

    pub fn len(&self) -> usize {
        self.rank_to_item.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rank_to_item.is_empty()
    }

    /// Item (1-based) holding the `rank`-th largest value.
    pub fn item_at_rank(&self, rank: usize) -> usize {
        self.rank_to_item[rank - 1] as usize + 1
    }

    /// Rank (1-based) of every item (1-based): entry `i-1` is the rank of item `i`.
    pub fn item_ranks(&self) -> Vec<usize> {
        invert0(&self.rank_to_item).into_iter().map(|r| r as usize + 1).collect()
    }

    pub fn rank_to_item(&self) -> Vec<usize> {
        self.rank_to_item.iter().map(|&x| x as usize + 1).collect()
    }

    pub fn zero_based(&self) -> &[u32] {
        &self.rank_to_item
    }
}

/// What the observer would see with full information: the global value rank
/// of the arrival at each time.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ArrivalSequence {
    rank_at_time: Vec<u32>,
}

impl ArrivalSequence {
    /// Builds from 1-based global ranks listed by arrival time.
    pub fn new(rank_at_time: Vec<usize>) -> Result<Self> {
        Ok(Self { rank_at_time: check_perm(&rank_at_time, "arrival sequence")? })
    }

    pub fn len(&self) -> usize {
        self.rank_at_time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rank_at_time.is_empty()
    }

    /// Global rank (1 = best) of the arrival at time `t` (1-based).
    pub fn rank_at(&self, t: usize) -> usize {
        self.rank_at_time[t - 1] as usize + 1
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.rank_at_time.iter().map(|&r| r as usize + 1).collect()
    }

    pub fn zero_based(&self) -> &[u32] {
        &self.rank_at_time
    }

    /// Arrival time of the best item.
    pub fn best_time(&self) -> usize {
        self.rank_at_time.iter().position(|&r| r == 0).map(|t| t + 1).unwrap_or(0)
    }

    /// Incremental prefix-rank view; ranks are computed on demand so a
    /// policy that stops early does not pay for the whole sequence.
    pub fn prefix_rank_iter(&self) -> PrefixRankIter<'_> {
        PrefixRankIter { seq: &self.rank_at_time, tree: Fenwick::new(self.rank_at_time.len()), t: 0 }
    }
}

/// Global value rank at each time, given arrival order and value order.
pub fn compose(pi: &Permutation, sigma: &ValueOrdering) -> Result<ArrivalSequence> {
    if pi.len() != sigma.len() {
        return Err(Error::DimensionMismatch { expected: pi.len(), got: sigma.len() });
    }
    Ok(compose_unchecked(pi, sigma))
}

pub(crate) fn compose_unchecked(pi: &Permutation, sigma: &ValueOrdering) -> ArrivalSequence {
    let mut rank_at_time = vec![0u32; pi.len()];
    for (j, &item) in sigma.rank_to_item.iter().enumerate() {
        rank_at_time[pi.pos[item as usize] as usize] = j as u32;
    }
    ArrivalSequence { rank_at_time }
}

/// Relative ranks `r_t = 1 + #{s < t : arrival s is better than arrival t}`.
/// This is the only information a comparison-based policy receives.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PrefixRankStream {
    ranks: Vec<u32>,
}

impl PrefixRankStream {
    pub fn new(ranks: Vec<usize>) -> Result<Self> {
        for (i, &r) in ranks.iter().enumerate() {
            if r == 0 || r > i + 1 {
                return Err(Error::InvalidParameter(format!(
                    "relative rank at time {} is {r}, must be in 1..={}",
                    i + 1,
                    i + 1
                )));
            }
        }
        Ok(Self { ranks: ranks.into_iter().map(|r| r as u32).collect() })
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    pub fn rank_at(&self, t: usize) -> usize {
        self.ranks[t - 1] as usize
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.ranks.iter().map(|&r| r as usize).collect()
    }

    /// Rebuilds the unique arrival sequence with these relative ranks.
    pub fn to_sequence(&self) -> ArrivalSequence {
        let mut tracker = OrderTracker::with_capacity(self.ranks.len());
        for &r in &self.ranks {
            tracker.push(r as usize);
        }
        let mut rank_at_time = vec![0u32; self.ranks.len()];
        for (j, &t) in tracker.by_value.iter().enumerate() {
            rank_at_time[t as usize] = j as u32;
        }
        ArrivalSequence { rank_at_time }
    }
}

pub fn prefix_ranks(seq: &ArrivalSequence) -> PrefixRankStream {
    PrefixRankStream { ranks: seq.prefix_rank_iter().map(|r| r as u32).collect() }
}

/// Inverse of a permutation.
pub fn invert(pi: &Permutation) -> Permutation {
    pi.invert()
}

#[derive(Clone, Debug)]
struct Fenwick {
    tree: Vec<u32>,
}

impl Fenwick {
    fn new(n: usize) -> Self {
        Self { tree: vec![0; n + 1] }
    }

    fn add(&mut self, i0: usize) {
        let mut i = i0 + 1;
        while i < self.tree.len() {
            self.tree[i] += 1;
            i += i & i.wrapping_neg();
        }
    }

    /// Number of marked indices strictly below `i0`.
    fn count_below(&self, i0: usize) -> u32 {
        let mut i = i0;
        let mut s = 0;
        while i > 0 {
            s += self.tree[i];
            i -= i & i.wrapping_neg();
        }
        s
    }
}

pub struct PrefixRankIter<'a> {
    seq: &'a [u32],
    tree: Fenwick,
    t: usize,
}

impl Iterator for PrefixRankIter<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        let v = *self.seq.get(self.t)? as usize;
        self.t += 1;
        let better = self.tree.count_below(v);
        self.tree.add(v);
        Some(better as usize + 1)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let rest = self.seq.len() - self.t;
        (rest, Some(rest))
    }
}

/// Reconstructs, from relative ranks alone, the value order of the
/// arrivals seen so far.
#[derive(Clone, Debug, Default)]
pub struct OrderTracker {
    by_value: Vec<u32>,
}

impl OrderTracker {
    pub fn with_capacity(n: usize) -> Self {
        Self { by_value: Vec::with_capacity(n) }
    }

    /// Records the next arrival, which has relative rank `rank`.
    pub fn push(&mut self, rank: usize) {
        let t = self.by_value.len() as u32;
        self.by_value.insert(rank - 1, t);
    }

    pub fn len(&self) -> usize {
        self.by_value.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_value.is_empty()
    }

    /// Arrival times (1-based) seen so far, best first.
    pub fn times_by_value(&self) -> Vec<usize> {
        self.by_value.iter().map(|&t| t as usize + 1).collect()
    }

    /// Current relative rank of the arrival at time `t` (1-based).
    pub fn rank_of_time(&self, t: usize) -> usize {
        self.by_value.iter().position(|&s| s as usize + 1 == t).map(|i| i + 1).unwrap_or(0)
    }

    /// True if the arrival at time `a` beats the arrival at time `b`.
    pub fn better(&self, a: usize, b: usize) -> bool {
        self.rank_of_time(a) < self.rank_of_time(b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn compose_fixture() {
        let pi = Permutation::new(vec![2, 3, 1]).unwrap();
        let sigma = ValueOrdering::new(vec![3, 1, 2]).unwrap();
        // item 3 (rank 1) arrives first, item 1 (rank 2) second, item 2 (rank 3) last
        assert_eq!(compose(&pi, &sigma).unwrap().ranks(), vec![1, 2, 3]);
        let id = compose(&Permutation::identity(4), &ValueOrdering::identity(4)).unwrap();
        assert_eq!(id.ranks(), vec![1, 2, 3, 4]);
    }

    #[test]
    fn prefix_rank_fixtures() {
        let s = ArrivalSequence::new(vec![2, 3, 1]).unwrap();
        assert_eq!(prefix_ranks(&s).ranks(), vec![1, 2, 1]);
        let s = ArrivalSequence::new(vec![4, 3, 2, 1]).unwrap();
        assert_eq!(prefix_ranks(&s).ranks(), vec![1, 1, 1, 1]);
    }

    #[test]
    fn invert_fixture() {
        let pi = Permutation::new(vec![2, 3, 1]).unwrap();
        assert_eq!(invert(&pi).positions(), vec![3, 1, 2]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Permutation::new(vec![1, 1, 2]).is_err());
        assert!(Permutation::new(vec![0, 1, 2]).is_err());
        assert!(Permutation::new(vec![1, 2, 4]).is_err());
        let pi = Permutation::identity(3);
        let sigma = ValueOrdering::identity(4);
        assert!(matches!(compose(&pi, &sigma), Err(Error::DimensionMismatch { .. })));
        assert!(PrefixRankStream::new(vec![1, 3]).is_err());
    }

    #[test]
    fn line_round_trip() {
        let pi = Permutation::new(vec![4, 1, 3, 2]).unwrap();
        assert_eq!(pi.to_line(), "4 1 3 2");
        assert_eq!(Permutation::parse_line(&pi.to_line()).unwrap(), pi);
        assert!(Permutation::parse_line("1 x").is_err());
    }

    #[test]
    fn arrival_order_views() {
        let pi = Permutation::new(vec![2, 3, 1]).unwrap();
        assert_eq!(pi.arrival_order(), vec![3, 1, 2]);
        assert_eq!(Permutation::from_arrival_order(&[3, 1, 2]).unwrap(), pi);
        assert_eq!(Permutation::reverse(3).positions(), vec![3, 2, 1]);
        assert_eq!(ValueOrdering::increasing(3).rank_to_item(), vec![3, 2, 1]);
    }

    #[test]
    fn from_values_breaks_ties_by_index() {
        let o = ValueOrdering::from_values(&[0.0, 5.0, 0.0, 2.0]);
        assert_eq!(o.rank_to_item(), vec![2, 4, 1, 3]);
    }

    fn all_perms(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in all_perms(n - 1) {
            for k in 0..n {
                let mut q = p.clone();
                q.insert(k, n);
                out.push(q);
            }
        }
        out
    }

    #[test]
    fn prefix_ranks_bijective_small_n() {
        for n in 1..=6 {
            let mut seen = std::collections::HashSet::new();
            for p in all_perms(n) {
                let s = ArrivalSequence::new(p).unwrap();
                let r = prefix_ranks(&s);
                assert_eq!(r.to_sequence(), s);
                assert!(seen.insert(r.ranks()));
            }
        }
    }

    #[test]
    fn order_tracker_matches_sequence() {
        let s = ArrivalSequence::new(vec![3, 5, 1, 4, 2]).unwrap();
        let mut tr = OrderTracker::default();
        for r in s.prefix_rank_iter() {
            tr.push(r);
        }
        assert_eq!(tr.times_by_value(), vec![3, 5, 1, 4, 2]);
        assert!(tr.better(3, 1));
        assert!(!tr.better(2, 4));
    }

    fn naive_prefix_ranks(v: &[usize]) -> Vec<usize> {
        (0..v.len()).map(|t| 1 + (0..t).filter(|&s| v[s] < v[t]).count()).collect()
    }

    proptest! {
        #[test]
        fn compose_is_a_bijection(seed in any::<u64>(), n in 1usize..40) {
            let mut rng = crate::rng::seeded(seed);
            let pi = Permutation::random(n, &mut rng);
            let sigma = ValueOrdering::random(n, &mut rng);
            let s = compose(&pi, &sigma).unwrap();
            let mut r = s.ranks();
            r.sort();
            prop_assert_eq!(r, (1..=n).collect::<Vec<_>>());
            // the best item arrives at the time pi assigns to it
            prop_assert_eq!(s.best_time(), pi.position(sigma.item_at_rank(1)));
        }

        #[test]
        fn prefix_ranks_match_definition(seed in any::<u64>(), n in 1usize..60) {
            let mut rng = crate::rng::seeded(seed);
            let pi = Permutation::random(n, &mut rng);
            let s = compose(&pi, &ValueOrdering::identity(n)).unwrap();
            let r = prefix_ranks(&s);
            prop_assert_eq!(r.ranks(), naive_prefix_ranks(&s.ranks()));
            prop_assert_eq!(r.to_sequence(), s);
        }

        #[test]
        fn invert_is_involution(seed in any::<u64>(), n in 0usize..50) {
            let mut rng = crate::rng::seeded(seed);
            let pi = Permutation::random(n, &mut rng);
            prop_assert_eq!(pi.invert().invert(), pi.clone());
            prop_assert_eq!(Permutation::parse_line(&pi.to_line()).unwrap(), pi);
        }
    }
}
