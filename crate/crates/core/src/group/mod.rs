//! Triangular matrices over Z[1/P], their membership certificates, the
//! semidirect form ℤ^n ⋉ UT_n(ℤ[1/p]), generator words and a BFS oracle.

mod bfs;
mod certify;
mod expansion;
mod inverse;
mod semidirect;
mod word;

pub use bfs::{bfs_word_length, enumerate_ball, BallElement};
pub use certify::{fg_certify, FGElement};
pub use expansion::{enumerate_mfi, product_expansion};
pub use inverse::{neumann_inverse, tri_inverse, unitriangular_inverse_paths, unitriangular_inverse_recursive};
pub use semidirect::{sd_from_matrix, sd_inverse, sd_multiply, sd_product, sd_to_matrix, zeta, SemiDirectElement};
pub use word::{factorize, free_reduce, word_evaluate, Generator, GeneratorWord};

#[cfg(test)]
pub(crate) use semidirect::strategies as semidirect_strategies;

use crate::arith::{ArithError, BigRational};
use num_traits::{One, Zero};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GroupError {
    #[error("entry ({i},{j}) is not in FG_n(P): {reason}")]
    NotMember { i: usize, j: usize, reason: String },
    #[error("matrix is singular")]
    Singular,
    #[error("matrix is not upper triangular at ({i},{j})")]
    NotTriangular { i: usize, j: usize },
    #[error("matrix is not unitriangular at ({i},{j})")]
    NotUnitriangular { i: usize, j: usize },
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("the semidirect form needs a single prime, got {0}")]
    MultiPrime(usize),
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("no word of length at most {0} reaches the target")]
    NotWithinRadius(usize),
    #[error("bad generator token {0:?}")]
    BadToken(String),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

/// An invertible upper-triangular matrix with rational entries.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TriangularMatrix {
    n: usize,
    entries: Vec<Vec<BigRational>>,
}

impl TriangularMatrix {
    pub fn new(entries: Vec<Vec<BigRational>>) -> Result<Self, GroupError> {
        let n = entries.len();
        if n == 0 {
            return Err(GroupError::DimensionMismatch(0, 1));
        }
        for (i, row) in entries.iter().enumerate() {
            if row.len() != n {
                return Err(GroupError::DimensionMismatch(row.len(), n));
            }
            for (j, v) in row.iter().enumerate() {
                if j < i && !v.is_zero() {
                    return Err(GroupError::NotTriangular { i, j });
                }
            }
            if row[i].is_zero() {
                return Err(GroupError::Singular);
            }
        }
        Ok(TriangularMatrix { n, entries })
    }

    /// Skips validation; callers guarantee the shape.
    pub(crate) fn from_raw(entries: Vec<Vec<BigRational>>) -> Self {
        TriangularMatrix {
            n: entries.len(),
            entries,
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut e = vec![vec![BigRational::zero(); n]; n];
        for (i, row) in e.iter_mut().enumerate() {
            row[i] = BigRational::one();
        }
        TriangularMatrix { n, entries: e }
    }

    /// θ_ij(x): the identity with entry (i,j) replaced by x (0-based).
    pub fn theta(n: usize, i: usize, j: usize, x: BigRational) -> Result<Self, GroupError> {
        let mut m = Self::identity(n);
        if i >= n || j >= n || j < i {
            return Err(GroupError::IndexOutOfRange(format!("({i},{j}) in dimension {n}")));
        }
        m.entries[i][j] = x;
        Self::new(m.entries)
    }

    pub fn diagonal(d: Vec<BigRational>) -> Result<Self, GroupError> {
        let mut m = Self::identity(d.len());
        for (i, v) in d.into_iter().enumerate() {
            m.entries[i][i] = v;
        }
        Self::new(m.entries)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &BigRational {
        &self.entries[i][j]
    }

    pub fn entries(&self) -> &[Vec<BigRational>] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<Vec<BigRational>> {
        self.entries
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.n)
    }

    pub fn is_unitriangular(&self) -> bool {
        (0..self.n).all(|i| self.entries[i][i].is_one())
    }

    pub fn mul(&self, other: &Self) -> Result<Self, GroupError> {
        if self.n != other.n {
            return Err(GroupError::DimensionMismatch(self.n, other.n));
        }
        Ok(Self::from_raw(mat_mul(&self.entries, &other.entries)))
    }
}

impl fmt::Display for TriangularMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .entries
            .iter()
            .map(|r| {
                let cells: Vec<String> = r.iter().map(|v| v.to_string()).collect();
                format!("[{}]", cells.join(", "))
            })
            .collect();
        write!(f, "[{}]", rows.join(", "))
    }
}

/// Upper-triangular product, skipping the structurally zero terms.
pub(crate) fn mat_mul(a: &[Vec<BigRational>], b: &[Vec<BigRational>]) -> Vec<Vec<BigRational>> {
    let n = a.len();
    let mut c = vec![vec![BigRational::zero(); n]; n];
    for i in 0..n {
        for j in i..n {
            let mut s = BigRational::zero();
            for k in i..=j {
                if !a[i][k].is_zero() && !b[k][j].is_zero() {
                    s += &a[i][k] * &b[k][j];
                }
            }
            c[i][j] = s;
        }
    }
    c
}
