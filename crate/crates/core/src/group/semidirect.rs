use super::{fg_certify, tri_inverse, FGElement, GroupError, TriangularMatrix};
use crate::arith::{pow_q, PLocalNumber, PrimeSet};
use num_traits::One;

/// (x, f) ∈ ℤ^n ⋉ UT_n(ℤ[1/p]); as a matrix it is f · diag(p^x_1, …, p^x_n).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SemiDirectElement {
    p: u64,
    x: Vec<i64>,
    f: TriangularMatrix,
}

impl SemiDirectElement {
    pub fn new(p: u64, x: Vec<i64>, f: TriangularMatrix) -> Result<Self, GroupError> {
        if x.len() != f.n() {
            return Err(GroupError::DimensionMismatch(x.len(), f.n()));
        }
        let primes = PrimeSet::single(p)?;
        let n = f.n();
        for i in 0..n {
            if !f.get(i, i).is_one() {
                return Err(GroupError::NotUnitriangular { i, j: i });
            }
            for j in i + 1..n {
                if !primes.admits(f.get(i, j)) {
                    return Err(GroupError::NotMember {
                        i,
                        j,
                        reason: format!("{} is not in Z[1/{p}]", f.get(i, j)),
                    });
                }
            }
        }
        Ok(SemiDirectElement { p, x, f })
    }

    pub(crate) fn from_parts_unchecked(p: u64, x: Vec<i64>, f: TriangularMatrix) -> Self {
        SemiDirectElement { p, x, f }
    }

    pub fn identity(n: usize, p: u64) -> Self {
        SemiDirectElement {
            p,
            x: vec![0; n],
            f: TriangularMatrix::identity(n),
        }
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    pub fn x(&self) -> &[i64] {
        &self.x
    }

    pub fn f(&self) -> &TriangularMatrix {
        &self.f
    }

    pub fn entry(&self, i: usize, j: usize) -> PLocalNumber {
        PLocalNumber::new(self.f.get(i, j).clone(), PrimeSet::single(self.p).expect("prime"))
            .expect("entries lie in Z[1/p]")
    }

    pub fn is_identity(&self) -> bool {
        self.x.iter().all(|&v| v == 0) && self.f.is_identity()
    }
}

/// ζ_x(g) = X g X⁻¹: entry (i,j) scaled by p^(x_i − x_j).
pub fn zeta(x: &[i64], g: &TriangularMatrix, p: u64) -> TriangularMatrix {
    let n = g.n();
    let mut e = g.entries().to_vec();
    for i in 0..n {
        for j in i + 1..n {
            let s = x[i] - x[j];
            if s != 0 {
                e[i][j] *= pow_q(p, s);
            }
        }
    }
    TriangularMatrix::from_raw(e)
}

/// (x, f)(y, g) = (x + y, f ζ_x(g)).
pub fn sd_multiply(a: &SemiDirectElement, b: &SemiDirectElement) -> Result<SemiDirectElement, GroupError> {
    if a.n() != b.n() {
        return Err(GroupError::DimensionMismatch(a.n(), b.n()));
    }
    if a.p != b.p {
        return Err(GroupError::Arith(crate::arith::ArithError::PrimeMismatch(a.p, b.p)));
    }
    let x = a.x.iter().zip(&b.x).map(|(u, v)| u + v).collect();
    let f = a.f.mul(&zeta(&a.x, &b.f, a.p))?;
    Ok(SemiDirectElement { p: a.p, x, f })
}

/// (x, f)⁻¹ = (−x, ζ_{−x}(f⁻¹)).
pub fn sd_inverse(a: &SemiDirectElement) -> SemiDirectElement {
    let neg: Vec<i64> = a.x.iter().map(|v| -v).collect();
    let inv = tri_inverse(&a.f).expect("unitriangular");
    let f = zeta(&neg, &inv, a.p);
    SemiDirectElement { p: a.p, x: neg, f }
}

/// Splits f = g · diag(p^x): x_j is the exponent of f_jj and g_ij = f_ij / p^(x_j).
pub fn sd_from_matrix(f: &FGElement) -> Result<SemiDirectElement, GroupError> {
    if f.prime_set().len() != 1 {
        return Err(GroupError::MultiPrime(f.prime_set().len()));
    }
    let p = f.prime_set().primes()[0];
    let n = f.n();
    let x: Vec<i64> = (0..n).map(|j| f.exponent(0, j, j)).collect();
    let mut g = f.matrix().entries().to_vec();
    for (i, row) in g.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate().skip(i) {
            *v *= pow_q(p, -x[j]);
        }
    }
    Ok(SemiDirectElement {
        p,
        x,
        f: TriangularMatrix::from_raw(g),
    })
}

pub fn sd_to_matrix(a: &SemiDirectElement) -> FGElement {
    let mut m = a.f.entries().to_vec();
    for row in m.iter_mut() {
        for (j, v) in row.iter_mut().enumerate() {
            *v *= pow_q(a.p, a.x[j]);
        }
    }
    let primes = PrimeSet::single(a.p).expect("prime");
    fg_certify(&TriangularMatrix::from_raw(m), &primes).expect("semidirect elements lie in FG_n(p)")
}

/// Product of a sequence of increments, left to right.
pub fn sd_product<'a>(
    n: usize,
    p: u64,
    items: impl IntoIterator<Item = &'a SemiDirectElement>,
) -> Result<SemiDirectElement, GroupError> {
    let mut acc = SemiDirectElement::identity(n, p);
    for g in items {
        acc = sd_multiply(&acc, g)?;
    }
    Ok(acc)
}
