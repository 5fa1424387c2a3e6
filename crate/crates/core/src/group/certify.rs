use super::{GroupError, TriangularMatrix};
#[cfg(test)]
use crate::arith::BigRational;
use crate::arith::{padic_valuation, pow_q, PrimeSet};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

/// A member of FG_n(P) with its factorisation certificate.
///
/// Every entry is r_ij · Π_r p_r^{c^r_ij} with r_ij coprime to P; diagonal entries have r_ii = 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FGElement {
    matrix: TriangularMatrix,
    primes: PrimeSet,
    exponents: Vec<Vec<Vec<i64>>>,
    residues: Vec<Vec<BigInt>>,
}

impl FGElement {
    pub fn matrix(&self) -> &TriangularMatrix {
        &self.matrix
    }

    pub fn prime_set(&self) -> &PrimeSet {
        &self.primes
    }

    pub fn n(&self) -> usize {
        self.matrix.n()
    }

    /// c^r_ij for the r-th prime of the set.
    pub fn exponent(&self, r: usize, i: usize, j: usize) -> i64 {
        self.exponents[i][j][r]
    }

    /// The P-free cofactor r_ij (1 on the diagonal, 0 for zero entries).
    pub fn residue(&self, i: usize, j: usize) -> &BigInt {
        &self.residues[i][j]
    }

    pub fn inverse(&self) -> FGElement {
        let inv = super::tri_inverse(&self.matrix).expect("certified elements are invertible");
        fg_certify(&inv, &self.primes).expect("FG_n(P) is closed under inversion")
    }

    pub fn mul(&self, other: &FGElement) -> Result<FGElement, GroupError> {
        if self.primes != other.primes {
            return Err(GroupError::NotMember {
                i: 0,
                j: 0,
                reason: format!("prime sets {} and {} differ", self.primes, other.primes),
            });
        }
        fg_certify(&self.matrix.mul(&other.matrix)?, &self.primes)
    }
}

/// Factors every entry into its P-part and a P-free cofactor, or reports why `m` ∉ FG_n(P).
pub fn fg_certify(m: &TriangularMatrix, primes: &PrimeSet) -> Result<FGElement, GroupError> {
    let n = m.n();
    let k = primes.len();
    let mut exponents = vec![vec![vec![0i64; k]; n]; n];
    let mut residues = vec![vec![BigInt::zero(); n]; n];
    for i in 0..n {
        for j in i..n {
            let x = m.get(i, j);
            if x.is_zero() {
                if i == j {
                    return Err(GroupError::Singular);
                }
                continue;
            }
            if !primes.admits(x) {
                return Err(GroupError::NotMember {
                    i,
                    j,
                    reason: format!("denominator of {x} has a prime outside {primes}"),
                });
            }
            let mut rest = x.clone();
            for (r, &p) in primes.primes().iter().enumerate() {
                let v = padic_valuation(x, p).expect("nonzero");
                exponents[i][j][r] = v;
                rest *= pow_q(p, -v);
            }
            debug_assert!(rest.is_integer());
            let res = rest.to_integer();
            if i == j && (!res.is_one() || x.is_negative()) {
                return Err(GroupError::NotMember {
                    i,
                    j,
                    reason: format!("diagonal entry {x} is not a product of powers of {primes}"),
                });
            }
            residues[i][j] = res;
        }
    }
    Ok(FGElement {
        matrix: m.clone(),
        primes: primes.clone(),
        exponents,
        residues,
    })
}

#[cfg(test)]
/// Rebuilds the entry r_ij · Π p_r^{c^r_ij} from a certificate.
pub(crate) fn reconstruct(f: &FGElement, i: usize, j: usize) -> BigRational {
    let mut v = BigRational::from_integer(f.residue(i, j).clone());
    for (r, &p) in f.prime_set().primes().iter().enumerate() {
        v *= pow_q(p, f.exponent(r, i, j));
    }
    v
}
