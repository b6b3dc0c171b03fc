//! Arithmetic in GF(p^e) through exponent/log tables over a primitive element.
//! Elements are encoded as integers `sum d_i p^i` whose base-p digits are the
//! polynomial coefficients; for prime fields this is just the residue.

use crate::error::{invalid, Result};

/// Returns `(p, e)` with `x = p^e` if `x` is a prime power.
pub fn prime_power(x: u64) -> Option<(u64, u32)> {
    if x < 2 {
        return None;
    }
    let mut p = 2;
    while p * p <= x {
        if x.is_multiple_of(p) {
            break;
        }
        p += 1;
    }
    if !x.is_multiple_of(p) {
        p = x;
    }
    let (mut y, mut e) = (x, 0);
    while y % p == 0 {
        y /= p;
        e += 1;
    }
    (y == 1).then_some((p, e))
}

#[derive(Clone, Debug)]
pub struct GaloisField {
    p: u32,
    e: u32,
    q: u32,
    exp: Vec<u32>,
    log: Vec<u32>,
}

impl GaloisField {
    pub fn new(q: u32) -> Result<Self> {
        let (p, e) = prime_power(q as u64).ok_or_else(|| invalid(format!("{q} is not a prime power")))?;
        let (p, e) = (p as u32, e);
        // Candidate reductions x^e = -(c_{e-1} x^{e-1} + ... + c_0); for e = 1 the
        // candidate `c` is the multiplier itself.
        for cand in 1..q {
            if let Some(exp) = Self::try_generate(p, e, q, cand) {
                let mut log = vec![0u32; q as usize];
                for (i, &v) in exp.iter().enumerate().take(q as usize - 1) {
                    log[v as usize] = i as u32;
                }
                return Ok(Self { p, e, q, exp, log });
            }
        }
        Err(invalid(format!("no primitive element found for GF({q})")))
    }

    fn digits(p: u32, e: u32, mut x: u32) -> Vec<u32> {
        (0..e)
            .map(|_| {
                let d = x % p;
                x /= p;
                d
            })
            .collect()
    }

    fn undigits(p: u32, d: &[u32]) -> u32 {
        d.iter().rev().fold(0, |acc, &x| acc * p + x)
    }

    fn try_generate(p: u32, e: u32, q: u32, cand: u32) -> Option<Vec<u32>> {
        let n = (q - 1) as usize;
        let mut exp = Vec::with_capacity(n + 1);
        let mut cur = 1u32;
        if e == 1 {
            if cand < 2 && q > 2 {
                return None;
            }
            for i in 0..n {
                if i > 0 && cur == 1 {
                    return None;
                }
                exp.push(cur);
                cur = ((cur as u64 * cand as u64) % p as u64) as u32;
            }
        } else {
            // cand encodes the low coefficients c_0..c_{e-1} of a monic polynomial.
            let c = Self::digits(p, e, cand);
            if c[0] == 0 {
                return None;
            }
            let mut d = Self::digits(p, e, 1);
            for i in 0..n {
                let v = Self::undigits(p, &d);
                if i > 0 && v == 1 {
                    return None;
                }
                exp.push(v);
                // multiply by x
                let top = d[e as usize - 1];
                for j in (1..e as usize).rev() {
                    d[j] = d[j - 1];
                }
                d[0] = 0;
                for j in 0..e as usize {
                    d[j] = (d[j] + (p - (top * c[j]) % p)) % p;
                }
            }
            cur = Self::undigits(p, &d);
        }
        (cur == 1).then(|| {
            exp.push(1);
            exp
        })
    }

    pub fn order(&self) -> u32 {
        self.q
    }

    pub fn characteristic(&self) -> u32 {
        self.p
    }

    pub fn add(&self, a: u32, b: u32) -> u32 {
        if self.e == 1 {
            return (a + b) % self.p;
        }
        let (mut a, mut b, mut out, mut scale) = (a, b, 0, 1);
        for _ in 0..self.e {
            out += ((a % self.p + b % self.p) % self.p) * scale;
            a /= self.p;
            b /= self.p;
            scale *= self.p;
        }
        out
    }

    pub fn neg(&self, a: u32) -> u32 {
        let (mut a, mut out, mut scale) = (a, 0, 1);
        for _ in 0..self.e {
            out += ((self.p - a % self.p) % self.p) * scale;
            a /= self.p;
            scale *= self.p;
        }
        out
    }

    pub fn mul(&self, a: u32, b: u32) -> u32 {
        if a == 0 || b == 0 {
            return 0;
        }
        let s = (self.log[a as usize] + self.log[b as usize]) % (self.q - 1);
        self.exp[s as usize]
    }

    /// `g^i` for the fixed primitive element `g`.
    pub fn generator_power(&self, i: usize) -> u32 {
        self.exp[i % (self.q as usize - 1)]
    }

    /// Evaluates the polynomial with coefficients `coeffs` (constant term first) at `x`.
    pub fn eval_poly(&self, coeffs: &[u32], x: u32) -> u32 {
        coeffs.iter().rev().fold(0, |acc, &c| self.add(self.mul(acc, x), c))
    }
}
