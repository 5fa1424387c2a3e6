use super::{fg_certify, FGElement, GroupError, TriangularMatrix};
use crate::arith::{BigRational, PrimeSet};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use std::fmt;

/// A generator θ_rs(1)^(±1) (r < s) or δ_r(p)^(±1); indices are 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Generator {
    Theta { r: usize, s: usize, inverse: bool },
    Delta { r: usize, p: u64, inverse: bool },
}

impl Generator {
    pub fn inverse(self) -> Self {
        match self {
            Generator::Theta { r, s, inverse } => Generator::Theta {
                r,
                s,
                inverse: !inverse,
            },
            Generator::Delta { r, p, inverse } => Generator::Delta {
                r,
                p,
                inverse: !inverse,
            },
        }
    }

    /// Every generator and inverse for dimension n over `primes`.
    pub fn all(n: usize, primes: &PrimeSet) -> Vec<Generator> {
        let mut out = Vec::new();
        for r in 0..n {
            for s in r + 1..n {
                for inverse in [false, true] {
                    out.push(Generator::Theta { r, s, inverse });
                }
            }
            for &p in primes.primes() {
                for inverse in [false, true] {
                    out.push(Generator::Delta { r, p, inverse });
                }
            }
        }
        out
    }

    fn check(&self, n: usize, primes: &PrimeSet) -> Result<(), GroupError> {
        match *self {
            Generator::Theta { r, s, .. } if r < s && s < n => Ok(()),
            Generator::Delta { r, p, .. } if r < n && primes.contains(p) => Ok(()),
            g => Err(GroupError::BadToken(g.to_string())),
        }
    }

    /// Right multiplication by the generator as a column operation.
    pub(crate) fn apply_right(&self, m: &mut [Vec<BigRational>]) {
        match *self {
            Generator::Theta { r, s, inverse } => {
                for row in m.iter_mut().take(r + 1) {
                    if row[r].is_zero() {
                        continue;
                    }
                    let v = row[r].clone();
                    if inverse {
                        row[s] -= v;
                    } else {
                        row[s] += v;
                    }
                }
            }
            Generator::Delta { r, p, inverse } => {
                let pq = BigRational::from_integer(BigInt::from(p));
                for row in m.iter_mut().take(r + 1) {
                    if inverse {
                        row[r] /= &pq;
                    } else {
                        row[r] *= &pq;
                    }
                }
            }
        }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = |inv: bool| if inv { "-1" } else { "+1" };
        match *self {
            Generator::Theta { r, s, inverse } => write!(f, "t:{}:{}:{}", r + 1, s + 1, sign(inverse)),
            Generator::Delta { r, p, inverse } => write!(f, "d:{}:{}:{}", r + 1, p, sign(inverse)),
        }
    }
}

impl std::str::FromStr for Generator {
    type Err = GroupError;

    fn from_str(tok: &str) -> Result<Self, Self::Err> {
        let bad = || GroupError::BadToken(tok.to_string());
        let parts: Vec<&str> = tok.split(':').collect();
        if parts.len() != 4 {
            return Err(bad());
        }
        let a: usize = parts[1].parse().map_err(|_| bad())?;
        let b: u64 = parts[2].parse().map_err(|_| bad())?;
        let inverse = match parts[3] {
            "+1" | "1" => false,
            "-1" => true,
            _ => return Err(bad()),
        };
        if a == 0 {
            return Err(bad());
        }
        match parts[0] {
            "t" if b >= 1 => Ok(Generator::Theta {
                r: a - 1,
                s: b as usize - 1,
                inverse,
            }),
            "d" => Ok(Generator::Delta {
                r: a - 1,
                p: b,
                inverse,
            }),
            _ => Err(bad()),
        }
    }
}

/// A word in the generators, read left to right.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GeneratorWord {
    pub symbols: Vec<Generator>,
}

impl GeneratorWord {
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn to_tokens(&self) -> Vec<String> {
        self.symbols.iter().map(|g| g.to_string()).collect()
    }

    pub fn from_tokens<S: AsRef<str>>(tokens: &[S]) -> Result<Self, GroupError> {
        let symbols = tokens
            .iter()
            .map(|t| t.as_ref().parse())
            .collect::<Result<Vec<_>, _>>()?;
        Ok(GeneratorWord { symbols })
    }

    pub fn inverse(&self) -> Self {
        GeneratorWord {
            symbols: self.symbols.iter().rev().map(|g| g.inverse()).collect(),
        }
    }
}

/// Multiplies the symbols left to right.
pub fn word_evaluate(w: &GeneratorWord, n: usize, primes: &PrimeSet) -> Result<FGElement, GroupError> {
    let mut m = TriangularMatrix::identity(n).into_entries();
    for g in &w.symbols {
        g.check(n, primes)?;
        g.apply_right(&mut m);
    }
    fg_certify(&TriangularMatrix::from_raw(m), primes)
}

/// Cancels adjacent inverse pairs until none remain.
pub fn free_reduce(symbols: &[Generator]) -> Vec<Generator> {
    let mut out: Vec<Generator> = Vec::with_capacity(symbols.len());
    for &g in symbols {
        if out.last() == Some(&g.inverse()) {
            out.pop();
        } else {
            out.push(g);
        }
    }
    out
}

/// δ_i(Π)^e as a run of prime-by-prime generators; negative powers list primes in reverse
/// so that adjacent opposite runs cancel under free reduction.
fn delta_pi_power(i: usize, primes: &PrimeSet, e: i64, out: &mut Vec<Generator>) {
    for _ in 0..e.unsigned_abs() {
        if e > 0 {
            for &p in primes.primes() {
                out.push(Generator::Delta {
                    r: i,
                    p,
                    inverse: false,
                });
            }
        } else {
            for &p in primes.primes().iter().rev() {
                out.push(Generator::Delta { r: i, p, inverse: true });
            }
        }
    }
}

/// θ_ij(x) through the base-Π expansion x = ±Π^n0 Σ_k ε_k Π^k:
/// δ_i(Π)^n0 θ_ij(1)^(±ε_0) Π_k [δ_i(Π) θ_ij(1)^(±ε_k)] δ_i(Π)^(−n0−t).
fn theta_word(i: usize, j: usize, x: &BigRational, primes: &PrimeSet, out: &mut Vec<Generator>) {
    if x.is_zero() {
        return;
    }
    let n0 = primes
        .primes()
        .iter()
        .map(|&p| crate::arith::padic_valuation(x, p).expect("nonzero"))
        .min()
        .expect("nonempty");
    let scaled = x.abs() * crate::arith::pow_q(primes.product_u64(), -n0);
    debug_assert!(scaled.is_integer());
    let mut rest = scaled.to_integer();
    let base = primes.product().clone();
    let mut digits = Vec::new();
    while !rest.is_zero() {
        let (q, r) = rest.div_rem(&base);
        digits.push(r.to_u64().expect("digit fits"));
        rest = q;
    }
    let t = digits.len() as i64 - 1;
    let inverse = x.is_negative();
    delta_pi_power(i, primes, n0, out);
    for (k, &eps) in digits.iter().enumerate() {
        if k > 0 {
            delta_pi_power(i, primes, 1, out);
        }
        for _ in 0..eps {
            out.push(Generator::Theta { r: i, s: j, inverse });
        }
    }
    delta_pi_power(i, primes, -n0 - t, out);
}

/// A word for f built row by row: f = h_n ⋯ h_1 where h_i agrees with f on row i and with
/// the identity elsewhere, and h_i = Π_(j>i) θ_ij(f_ij) · θ_ii(f_ii).
pub fn factorize(f: &FGElement) -> GeneratorWord {
    let n = f.n();
    let primes = f.prime_set();
    let mut raw = Vec::new();
    for i in (0..n).rev() {
        for j in i + 1..n {
            theta_word(i, j, f.matrix().get(i, j), primes, &mut raw);
        }
        for (r, &p) in primes.primes().iter().enumerate() {
            let c = f.exponent(r, i, i);
            for _ in 0..c.unsigned_abs() {
                raw.push(Generator::Delta {
                    r: i,
                    p,
                    inverse: c < 0,
                });
            }
        }
    }
    GeneratorWord {
        symbols: free_reduce(&raw),
    }
}
