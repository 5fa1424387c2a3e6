use crate::arith::PrimeSet;
use serde::{Deserialize, Serialize};

/// Equivalence constants for dimension n over a set of k primes.
///
/// `j` and `a_n` bound word length against ℓ: ℓ/J ≤ |f| ≤ J·ℓ and |factorize(f)| ≤ A_n·ℓ.
/// `q, r, s, t` give Q + R·ℓ^a ≤ |f| ≤ S + T·ℓ^a for the adelic length.
///
/// Upper side: every diagonal exponent satisfies Σ_r |c^r_ii| ln 2 ≤ ℓ^a, and every
/// off-diagonal span satisfies ⟨f_ij⟩ ≤ 1 + ℓ^a / ln 2, so summing over the n diagonal and
/// n(n−1)/2 off-diagonal entries and applying |f| ≤ J·ℓ gives S and T (S also carries
/// J·n·3 ln n / (2 ln 2) of slack from the Golub bracket).
/// Lower side: ℓ^a(f) ≤ L + 2 ln Π (ℓ(f) + ℓ(f⁻¹)) with L = 2 ln n + 2 ln Π, and
/// ℓ(f), ℓ(f⁻¹) ≤ J·|f|, giving Q = −L/(4 J ln Π) and R = 1/(4 J ln Π).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SandwichConstants {
    pub n: usize,
    pub k: usize,
    pub j: u64,
    pub a_n: u64,
    pub l: f64,
    pub q: f64,
    pub r: f64,
    pub s: f64,
    pub t: f64,
}

pub fn sandwich_constants(n: usize, primes: &PrimeSet) -> SandwichConstants {
    let k = primes.len();
    let a_n = (6 * (k as u64 + 1)).pow(n.saturating_sub(1) as u32);
    let j = if n <= 1 { 1 } else { ((n * (n - 1)) as u64).max(a_n) };
    let nf = n as f64;
    let jf = j as f64;
    let ln2 = 2f64.ln();
    let ln_pi = primes.ln_product();
    let off = nf * (nf - 1.0) / 2.0;
    let s = jf * off + jf * nf * 3.0 * nf.ln() / (2.0 * ln2);
    let t = jf * (3.0 * nf + off) / ln2;
    let l = 2.0 * nf.ln() + 2.0 * ln_pi;
    SandwichConstants {
        n,
        k,
        j,
        a_n,
        l,
        q: -l / (4.0 * jf * ln_pi),
        r: 1.0 / (4.0 * jf * ln_pi),
        s,
        t,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        let p2 = PrimeSet::single(2).unwrap();
        let c1 = sandwich_constants(1, &p2);
        assert_eq!((c1.j, c1.a_n), (1, 1));
        let c2 = sandwich_constants(2, &p2);
        assert_eq!((c2.j, c2.a_n), (12, 12));
        let c3 = sandwich_constants(3, &PrimeSet::new(vec![2, 3]).unwrap());
        assert_eq!(c3.a_n, 324);
        assert_eq!(c3.j, 324);
        assert!(c2.q < 0.0 && c2.r > 0.0 && c2.s > 0.0 && c2.t > 0.0);
    }
}
