//! Length functions: the entrywise word-metric estimates, p-adic and real operator
//! norms, the adelic length and the equivalence constants tying them to word length.

mod constants;
mod norms;

pub use constants::{sandwich_constants, SandwichConstants};
pub use norms::{max_norm_bracket, opnorm_padic, opnorm_real, NoConvergence, PadicOpNorm, POWER_ITERATION_CAP};

use crate::arith::{digit_span_primes, is_prime, q_to_f64};
use crate::group::{FGElement, SemiDirectElement, TriangularMatrix};
use serde::{Deserialize, Serialize};

/// ℓ(f) = Σ_i Σ_r |c^r_ii| + Σ_{i<j} ⟨f_ij⟩_Π.
pub fn length_estimate(f: &FGElement) -> u64 {
    let n = f.n();
    let primes = f.prime_set().primes();
    let mut total = 0u64;
    for i in 0..n {
        for r in 0..primes.len() {
            total += f.exponent(r, i, i).unsigned_abs();
        }
        for j in i + 1..n {
            total += digit_span_primes(f.matrix().get(i, j), primes)
                .expect("certified entries lie in Z[1/P]")
                .span;
        }
    }
    total
}

/// ⟦(x, f)⟧ = Σ_i |x_i| + Σ_{i<j} ⟨f_ij⟩_p.
pub fn sd_length_estimate(a: &SemiDirectElement) -> u64 {
    let n = a.n();
    let p = [a.prime()];
    let mut total: u64 = a.x().iter().map(|v| v.unsigned_abs()).sum();
    for i in 0..n {
        for j in i + 1..n {
            total += digit_span_primes(a.f().get(i, j), &p)
                .expect("entries lie in Z[1/p]")
                .span;
        }
    }
    total
}

/// E(f) = Σ_{i<j} |f_ij|^(1/(j−i)) for unitriangular integer matrices.
pub fn unitriangular_growth(m: &TriangularMatrix) -> f64 {
    let n = m.n();
    let mut e = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let v = q_to_f64(m.get(i, j)).abs();
            if v > 0.0 {
                e += v.powf(1.0 / (j - i) as f64);
            }
        }
    }
    e
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrimeContribution {
    pub prime: u64,
    /// ln⁺‖f‖_p / ln p
    pub f_exponent: u64,
    /// ln⁺‖f⁻¹‖_p / ln p
    pub inverse_exponent: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealPart {
    pub norm_f: f64,
    pub norm_inverse: f64,
    pub ln_plus_f: f64,
    pub ln_plus_inverse: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LengthReport {
    pub estimate_l: u64,
    pub per_prime: Vec<PrimeContribution>,
    pub real_part: RealPart,
    /// Σ_p (exponents)·ln p + real part.
    pub adelic: f64,
    /// Primes outside P whose contributions were checked.
    pub foreign_primes_checked: Vec<u64>,
    /// Any of those with a nonzero contribution (always empty for members of FG_n(P)).
    pub foreign_nonzero: Vec<u64>,
}

impl LengthReport {
    pub fn padic_part(&self) -> f64 {
        self.per_prime
            .iter()
            .map(|c| (c.f_exponent + c.inverse_exponent) as f64 * (c.prime as f64).ln())
            .sum()
    }
}

pub const REAL_TOL: f64 = 1e-12;
pub const DEFAULT_FOREIGN_SAMPLE: usize = 20;

fn real_norm(m: &TriangularMatrix) -> (f64, bool) {
    match opnorm_real(m, REAL_TOL) {
        Ok(v) => (v, true),
        Err(e) => (e.estimate.clamp(e.lower, e.upper), false),
    }
}

/// The first `count` primes not in `f`'s prime set.
pub fn foreign_primes(f: &FGElement, count: usize) -> Vec<u64> {
    (2u64..)
        .filter(|&q| is_prime(q) && !f.prime_set().contains(q))
        .take(count)
        .collect()
}

/// ℓ^a(f) = Σ_{p ∈ P ∪ {∞}} ln⁺‖f‖_p + ln⁺‖f⁻¹‖_p, with p-adic terms kept as exponents.
pub fn adelic_length(f: &FGElement) -> LengthReport {
    adelic_length_with(f, DEFAULT_FOREIGN_SAMPLE)
}

pub fn adelic_length_with(f: &FGElement, foreign_sample: usize) -> LengthReport {
    let inv = crate::group::tri_inverse(f.matrix()).expect("invertible");
    let per_prime: Vec<PrimeContribution> = f
        .prime_set()
        .primes()
        .iter()
        .map(|&p| PrimeContribution {
            prime: p,
            f_exponent: opnorm_padic(f.matrix(), p).ln_plus().exponent,
            inverse_exponent: opnorm_padic(&inv, p).ln_plus().exponent,
        })
        .collect();
    let foreign = foreign_primes(f, foreign_sample);
    let foreign_nonzero = foreign
        .iter()
        .copied()
        .filter(|&q| {
            opnorm_padic(f.matrix(), q).ln_plus().exponent != 0 || opnorm_padic(&inv, q).ln_plus().exponent != 0
        })
        .collect();
    let (nf, c1) = real_norm(f.matrix());
    let (ni, c2) = real_norm(&inv);
    let real_part = RealPart {
        norm_f: nf,
        norm_inverse: ni,
        ln_plus_f: nf.ln().max(0.0),
        ln_plus_inverse: ni.ln().max(0.0),
        converged: c1 && c2,
    };
    let mut report = LengthReport {
        estimate_l: length_estimate(f),
        per_prime,
        adelic: 0.0,
        real_part,
        foreign_primes_checked: foreign,
        foreign_nonzero,
    };
    report.adelic = report.padic_part() + report.real_part.ln_plus_f + report.real_part.ln_plus_inverse;
    report
}

/// d^a(f, g) = ℓ^a(f⁻¹g).
pub fn adelic_distance(f: &FGElement, g: &FGElement) -> Result<f64, crate::group::GroupError> {
    Ok(adelic_length(&f.inverse().mul(g)?).adelic)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{parse_q, PrimeSet};
    use crate::group::{fg_certify, SemiDirectElement};

    fn fg(rows: &[&[&str]], primes: &[u64]) -> FGElement {
        let m = TriangularMatrix::new(
            rows.iter()
                .map(|r| r.iter().map(|s| parse_q(s).unwrap()).collect())
                .collect(),
        )
        .unwrap();
        fg_certify(&m, &PrimeSet::new(primes.to_vec()).unwrap()).unwrap()
    }

    #[test]
    fn estimate_examples() {
        assert_eq!(length_estimate(&fg(&[&["1", "0"], &["0", "1"]], &[2])), 0);
        assert_eq!(length_estimate(&fg(&[&["2", "0"], &["0", "1"]], &[2])), 1);
        assert_eq!(length_estimate(&fg(&[&["1", "3"], &["0", "1"]], &[2])), 2);
        assert_eq!(length_estimate(&fg(&[&["6", "0"], &["0", "1/3"]], &[2, 3])), 3);
    }

    #[test]
    fn sd_estimate_examples() {
        let m = |rows: &[&[&str]]| {
            TriangularMatrix::new(
                rows.iter()
                    .map(|r| r.iter().map(|s| parse_q(s).unwrap()).collect())
                    .collect(),
            )
            .unwrap()
        };
        assert_eq!(sd_length_estimate(&SemiDirectElement::identity(2, 2)), 0);
        let a = SemiDirectElement::new(2, vec![1, 0], TriangularMatrix::identity(2)).unwrap();
        assert_eq!(sd_length_estimate(&a), 1);
        let b = SemiDirectElement::new(2, vec![-2, 1], m(&[&["1", "3/2"], &["0", "1"]])).unwrap();
        assert_eq!(sd_length_estimate(&b), 5);
    }

    #[test]
    fn adelic_examples() {
        let id = adelic_length(&fg(&[&["1", "0"], &["0", "1"]], &[2]));
        assert_eq!(id.adelic, 0.0);
        let d = adelic_length(&fg(&[&["2", "0"], &["0", "1"]], &[2]));
        assert_eq!(d.per_prime[0].f_exponent, 0);
        assert_eq!(d.per_prime[0].inverse_exponent, 1);
        assert!((d.real_part.ln_plus_f - 2f64.ln()).abs() < 1e-10);
        assert_eq!(d.real_part.ln_plus_inverse, 0.0);
        assert!((d.adelic - 2.0 * 2f64.ln()).abs() < 1e-10);
        let t = adelic_length(&fg(&[&["1", "1"], &["0", "1"]], &[2]));
        let golden = ((1.0 + 5f64.sqrt()) / 2.0).ln();
        assert_eq!(t.padic_part(), 0.0);
        assert!((t.adelic - 2.0 * golden).abs() < 1e-10);
        assert_eq!(t.foreign_primes_checked.len(), 20);
        assert!(t.foreign_nonzero.is_empty());
        assert!(!t.foreign_primes_checked.contains(&2));
    }

    #[test]
    fn growth_comparison_base_two() {
        // ln E(f) ≤ ℓ(f) for unitriangular integer f over P = {2}
        for (a, b, c) in [(1, 1, 1), (35, 0, 0), (1000, -7, 3), (0, 0, 0), (5, 5, 5)] {
            let s = |v: i32| v.to_string();
            let f = fg(&[&["1", &s(a), &s(b)], &["0", "1", &s(c)], &["0", "0", "1"]], &[2]);
            let e = unitriangular_growth(f.matrix());
            if e > 0.0 {
                assert!(e.ln() <= length_estimate(&f) as f64);
            }
        }
    }

    #[test]
    fn growth_comparison_fails_for_base_six() {
        let f = fg(&[&["1", "35"], &["0", "1"]], &[2, 3]);
        assert!(unitriangular_growth(f.matrix()).ln() > length_estimate(&f) as f64);
    }
}
