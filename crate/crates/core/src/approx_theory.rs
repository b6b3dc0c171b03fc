//! Bernstein polynomials, moduli of continuity and moment comparisons
//! between an arrival-order distribution and independent uniform positions.

use std::collections::VecDeque;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::distributions::PermDistribution;
use crate::error::{invalid, Result};
use crate::rng::count_trials;

pub const DEFAULT_GRID: usize = 10_000;

/// A bounded function on [0, 1] together with the grid used for sup-norms.
#[derive(Clone)]
pub struct SampledFunction {
    name: String,
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    grid: usize,
}

impl fmt::Debug for SampledFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SampledFunction({}, grid={})", self.name, self.grid)
    }
}

impl SampledFunction {
    pub fn new(name: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Self { name: name.into(), f: Arc::new(f), grid: DEFAULT_GRID }
    }

    pub fn with_grid(mut self, grid: usize) -> Self {
        self.grid = grid.max(2);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn grid(&self) -> usize {
        self.grid
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    fn grid_points(&self) -> impl Iterator<Item = f64> + '_ {
        let g = self.grid;
        (0..g).map(move |i| i as f64 / (g - 1) as f64)
    }

    /// Named test functions: `identity`, `abs-centered`, `parabola`, `square`, `step`.
    pub fn named(name: &str) -> Option<Self> {
        let f: fn(f64) -> f64 = match name {
            "identity" => |x| x,
            "abs-centered" => |x| (x - 0.5).abs(),
            "parabola" => |x| x * (1.0 - x),
            "square" => |x| x * x,
            "step" => |x| if x < 0.5 { 0.0 } else { 1.0 },
            _ => return None,
        };
        Some(Self::new(name, f))
    }
}

/// Bernstein basis weights `C(d,k) x^k (1-x)^(d-k)` for k = 0..=d.
pub fn bernstein_basis(d: usize, x: f64) -> Vec<f64> {
    if x == 0.0 || x == 1.0 {
        let mut w = vec![0.0; d + 1];
        w[if x == 0.0 { 0 } else { d }] = 1.0;
        return w;
    }
    if d <= 50 {
        let mut c = 1.0;
        (0..=d)
            .map(|k| {
                let w = c * x.powi(k as i32) * (1.0 - x).powi((d - k) as i32);
                c = c * (d - k) as f64 / (k + 1) as f64;
                w
            })
            .collect()
    } else {
        // log-domain weight at the mode, then ratio recurrences outwards
        let m = ((d as f64 * x).floor() as usize).min(d);
        let ln_binom: f64 = (1..=m).map(|i| ((d - m + i) as f64 / i as f64).ln()).sum();
        let mut w = vec![0.0; d + 1];
        w[m] = (ln_binom + m as f64 * x.ln() + (d - m) as f64 * (1.0 - x).ln()).exp();
        let r = x / (1.0 - x);
        for k in m..d {
            w[k + 1] = w[k] * r * (d - k) as f64 / (k + 1) as f64;
        }
        for k in (1..=m).rev() {
            w[k - 1] = w[k] / r * k as f64 / (d - k + 1) as f64;
        }
        w
    }
}

/// Degree-`d` Bernstein polynomial of `f` at `x`.
pub fn bernstein_eval(f: &SampledFunction, d: usize, x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(invalid(format!("x = {x} outside [0, 1]")));
    }
    if d == 0 {
        return Err(invalid("degree must be at least 1"));
    }
    Ok(bernstein_basis(d, x).iter().enumerate().map(|(k, w)| w * f.eval(k as f64 / d as f64)).sum())
}

/// Largest `|f(x1) - f(x2)|` over grid points at distance at most `delta`.
/// A lower estimate of the true modulus of continuity.
pub fn modulus_of_continuity(f: &SampledFunction, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(invalid(format!("delta = {delta} must be in (0, 1]")));
    }
    let vals: Vec<f64> = f.grid_points().map(|x| f.eval(x)).collect();
    let step = 1.0 / (f.grid - 1) as f64;
    let w = ((delta / step) + 1e-9).floor() as usize;
    // sliding window max and min over windows of w + 1 consecutive points
    let mut maxq: VecDeque<usize> = VecDeque::new();
    let mut minq: VecDeque<usize> = VecDeque::new();
    let mut best: f64 = 0.0;
    for i in 0..vals.len() {
        while maxq.back().is_some_and(|&j| vals[j] <= vals[i]) {
            maxq.pop_back();
        }
        while minq.back().is_some_and(|&j| vals[j] >= vals[i]) {
            minq.pop_back();
        }
        maxq.push_back(i);
        minq.push_back(i);
        while maxq.front().is_some_and(|&j| j + w < i) {
            maxq.pop_front();
        }
        while minq.front().is_some_and(|&j| j + w < i) {
            minq.pop_front();
        }
        best = best.max(vals[*maxq.front().unwrap()] - vals[*minq.front().unwrap()]);
    }
    Ok(best)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BernsteinCheck {
    pub function: String,
    pub degree: usize,
    /// Grid sup of `|f - B_d f|`.
    pub lhs: f64,
    /// `1.5 * omega(1 / sqrt(d))`.
    pub rhs: f64,
    pub holds: bool,
}

pub fn verify_bernstein_bound(f: &SampledFunction, d: usize) -> Result<BernsteinCheck> {
    if d == 0 {
        return Err(invalid("degree must be at least 1"));
    }
    let nodes: Vec<f64> = (0..=d).map(|k| f.eval(k as f64 / d as f64)).collect();
    let lhs = f
        .grid_points()
        .map(|x| {
            let b: f64 = bernstein_basis(d, x).iter().zip(&nodes).map(|(w, v)| w * v).sum();
            (f.eval(x) - b).abs()
        })
        .fold(0.0, f64::max);
    let rhs = 1.5 * modulus_of_continuity(f, 1.0 / (d as f64).sqrt())?;
    Ok(BernsteinCheck { function: f.name.clone(), degree: d, lhs, rhs, holds: lhs <= rhs + 1e-9 })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentComparison {
    pub items: Vec<usize>,
    pub exponents: Vec<u32>,
    pub trials: u64,
    pub empirical: f64,
    pub standard_error: f64,
    pub uniform_reference: f64,
    pub ratio: f64,
    pub ratio_standard_error: f64,
}

/// Reference value `prod_i (1/n) sum_j (j/n)^k_i` for independent uniform positions.
pub fn uniform_moment_reference(n: usize, exponents: &[u32]) -> f64 {
    exponents
        .iter()
        .map(|&k| (1..=n).map(|j| (j as f64 / n as f64).powi(k as i32)).sum::<f64>() / n as f64)
        .product()
}

fn moment_term(pos: &[u32], items: &[usize], exponents: &[u32], n: usize) -> f64 {
    items
        .iter()
        .zip(exponents)
        .map(|(&x, &k)| ((pos[x - 1] + 1) as f64 / n as f64).powi(k as i32))
        .product()
}

fn check_items(n: usize, items: &[usize], exponents: &[u32]) -> Result<()> {
    if items.len() != exponents.len() {
        return Err(invalid("items and exponents differ in length"));
    }
    for (i, &x) in items.iter().enumerate() {
        if x == 0 || x > n || items[..i].contains(&x) {
            return Err(invalid(format!("items must be distinct values in 1..={n}")));
        }
    }
    Ok(())
}

/// Sampled `E[prod (pi(x_i)/n)^k_i]` compared against independent uniform positions.
pub fn moment_compare(
    dist: &PermDistribution,
    items: &[usize],
    exponents: &[u32],
    trials: u64,
    seed: u64,
) -> Result<MomentComparison> {
    let n = dist.n();
    check_items(n, items, exponents)?;
    if trials < 2 {
        return Err(invalid("need at least two trials"));
    }
    // values lie in [0, 1]; accumulate them in fixed point so sums are exact integers
    const SCALE: f64 = (1u64 << 40) as f64;
    let acc = count_trials(trials, seed, 2, |_, rng, acc| {
        let p = dist.sample(rng);
        let v = moment_term(p.zero_based(), items, exponents, n);
        acc[0] += (v * SCALE).round() as u64;
        acc[1] += (v * v * SCALE).round() as u64;
    });
    let t = trials as f64;
    let mean = acc[0] as f64 / SCALE / t;
    let second = acc[1] as f64 / SCALE / t;
    let var = (second - mean * mean).max(0.0) * t / (t - 1.0);
    let se = (var / t).sqrt();
    let reference = uniform_moment_reference(n, exponents);
    Ok(MomentComparison {
        items: items.to_vec(),
        exponents: exponents.to_vec(),
        trials,
        empirical: mean,
        standard_error: se,
        uniform_reference: reference,
        ratio: mean / reference,
        ratio_standard_error: se / reference,
    })
}

/// Exact moment over an explicit support.
pub fn moment_exact(dist: &PermDistribution, items: &[usize], exponents: &[u32]) -> Result<f64> {
    let n = dist.n();
    check_items(n, items, exponents)?;
    let s = dist
        .support()
        .ok_or_else(|| crate::Error::Unsupported("distribution has no explicit support".into()))?;
    Ok(s.iter().map(|(p, w)| w * moment_term(p.zero_based(), items, exponents, n)).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bernstein_fixtures() {
        let sq = SampledFunction::named("square").unwrap();
        assert!((bernstein_eval(&sq, 2, 0.5).unwrap() - 0.375).abs() < 1e-15);
        let one = SampledFunction::new("one", |_| 1.0);
        let id = SampledFunction::named("identity").unwrap();
        for d in [1, 7, 50, 51, 300] {
            for x in [0.0, 0.13, 0.5, 0.99, 1.0] {
                assert!((bernstein_eval(&one, d, x).unwrap() - 1.0).abs() < 1e-12);
                assert!((bernstein_eval(&id, d, x).unwrap() - x).abs() < 1e-12);
            }
        }
        assert!(bernstein_eval(&one, 3, 1.5).is_err());
    }

    #[test]
    fn partition_of_unity() {
        for d in [1usize, 10, 50, 51, 200, 512] {
            for i in 0..=200 {
                let x = i as f64 / 200.0;
                let s: f64 = bernstein_basis(d, x).iter().sum();
                assert!((s - 1.0).abs() < 1e-12, "d={d} x={x} s={s}");
            }
        }
    }

    #[test]
    fn modulus_fixtures() {
        let step = 1.0 / (DEFAULT_GRID - 1) as f64;
        let id = SampledFunction::named("identity").unwrap();
        assert!((modulus_of_continuity(&id, 0.1).unwrap() - 0.1).abs() <= step);
        let abs = SampledFunction::named("abs-centered").unwrap();
        assert!((modulus_of_continuity(&abs, 0.1).unwrap() - 0.1).abs() <= step);
        let st = SampledFunction::named("step").unwrap();
        assert_eq!(modulus_of_continuity(&st, 0.01).unwrap(), 1.0);
        assert!(modulus_of_continuity(&st, 0.0).is_err());
    }

    #[test]
    fn modulus_matches_naive() {
        let f = SampledFunction::new("wiggle", |x: f64| (7.0 * x).sin() * x).with_grid(300);
        let pts: Vec<f64> = (0..300).map(|i| i as f64 / 299.0).collect();
        for delta in [0.01, 0.05, 0.3, 1.0] {
            let mut naive: f64 = 0.0;
            for a in &pts {
                for b in &pts {
                    if (a - b).abs() <= delta + 1e-12 {
                        naive = naive.max((f.eval(*a) - f.eval(*b)).abs());
                    }
                }
            }
            assert!((modulus_of_continuity(&f, delta).unwrap() - naive).abs() < 1e-12);
        }
    }

    #[test]
    fn bernstein_bound_fixtures() {
        let id = SampledFunction::named("identity").unwrap();
        let c = verify_bernstein_bound(&id, 9).unwrap();
        assert!(c.lhs < 1e-12 && c.holds);
        let abs = SampledFunction::named("abs-centered").unwrap();
        let c = verify_bernstein_bound(&abs, 64).unwrap();
        assert!((c.rhs - 0.1875).abs() < 1e-3);
        assert!(c.holds);
        let par = SampledFunction::named("parabola").unwrap();
        assert!(verify_bernstein_bound(&par, 16).unwrap().holds);
    }

    #[test]
    fn reference_mean_rank() {
        let n = 10;
        assert!((uniform_moment_reference(n, &[1]) - (n as f64 + 1.0) / (2.0 * n as f64)).abs() < 1e-15);
        assert_eq!(uniform_moment_reference(n, &[0, 0]), 1.0);
    }
}
