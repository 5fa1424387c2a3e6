use super::WalkError;
use crate::arith::{q_int, BigRational};
use crate::group::{sd_inverse, SemiDirectElement};
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;
use std::collections::HashSet;

/// A finitely supported probability measure on ℤ^n ⋉ UT_n(ℤ[1/p]).
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureSpec {
    n: usize,
    p: u64,
    support: Vec<(SemiDirectElement, BigRational)>,
}

impl MeasureSpec {
    pub fn new(n: usize, p: u64, support: Vec<(SemiDirectElement, BigRational)>) -> Result<Self, WalkError> {
        if support.is_empty() {
            return Err(WalkError::InvalidMeasure("empty support".into()));
        }
        let mut total = BigRational::zero();
        let mut seen = HashSet::new();
        for (k, (g, w)) in support.iter().enumerate() {
            if g.n() != n || g.prime() != p {
                return Err(WalkError::InvalidMeasure(format!(
                    "support element {k} lives in dimension {} over p={}, expected {n} over p={p}",
                    g.n(),
                    g.prime()
                )));
            }
            if !w.is_positive() {
                return Err(WalkError::InvalidMeasure(format!(
                    "probability {w} of element {k} is not positive"
                )));
            }
            if !seen.insert(g) {
                return Err(WalkError::InvalidMeasure(format!("support element {k} is repeated")));
            }
            total += w;
        }
        if !total.is_one() {
            return Err(WalkError::InvalidMeasure(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        Ok(MeasureSpec { n, p, support })
    }

    /// Uniform measure on distinct elements.
    pub fn uniform(n: usize, p: u64, elements: Vec<SemiDirectElement>) -> Result<Self, WalkError> {
        let w = BigRational::new(1.into(), elements.len().into());
        Self::new(n, p, elements.into_iter().map(|g| (g, w.clone())).collect())
    }

    pub fn point_mass(g: SemiDirectElement) -> Self {
        MeasureSpec {
            n: g.n(),
            p: g.prime(),
            support: vec![(g, BigRational::one())],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn support(&self) -> &[(SemiDirectElement, BigRational)] {
        &self.support
    }

    /// Exact means of the diagonal exponents x_i.
    pub fn means(&self) -> Vec<BigRational> {
        let mut m = vec![BigRational::zero(); self.n];
        for (g, w) in &self.support {
            for (acc, &x) in m.iter_mut().zip(g.x()) {
                *acc += w * q_int(x);
            }
        }
        m
    }
}

/// D_ij = mean_i − mean_j for i < j, with the sign-pattern flags.
#[derive(Debug, Clone, PartialEq)]
pub struct DisplacementMatrix {
    d: Vec<Vec<BigRational>>,
    pub non_zero: bool,
    pub row_homogeneous: bool,
    pub column_homogeneous: bool,
    pub homogeneous: bool,
}

fn all_same(signs: impl IntoIterator<Item = Ordering>) -> bool {
    let mut it = signs.into_iter();
    match it.next() {
        None => true,
        Some(first) => it.all(|s| s == first),
    }
}

impl DisplacementMatrix {
    pub fn from_means(means: &[BigRational]) -> Self {
        let n = means.len();
        let mut d = vec![vec![BigRational::zero(); n]; n];
        for i in 0..n {
            for j in i + 1..n {
                d[i][j] = &means[i] - &means[j];
            }
        }
        let sign = |i: usize, j: usize| d[i][j].cmp(&BigRational::zero());
        let upper = || (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)));
        let non_zero = upper().all(|(i, j)| !d[i][j].is_zero());
        let row_homogeneous = (0..n).all(|i| all_same((i + 1..n).map(|j| sign(i, j))));
        let column_homogeneous = (0..n).all(|j| all_same((0..j).map(|i| sign(i, j))));
        let homogeneous = non_zero && all_same(upper().map(|(i, j)| sign(i, j)));
        DisplacementMatrix {
            d,
            non_zero,
            row_homogeneous,
            column_homogeneous,
            homogeneous,
        }
    }

    pub fn n(&self) -> usize {
        self.d.len()
    }

    pub fn get(&self, i: usize, j: usize) -> &BigRational {
        &self.d[i][j]
    }

    pub fn sign(&self, i: usize, j: usize) -> Ordering {
        self.d[i][j].cmp(&BigRational::zero())
    }

    /// Less for all-negative, Greater for all-positive, None otherwise.
    pub fn homogeneous_sign(&self) -> Option<Ordering> {
        if self.homogeneous && self.n() > 1 {
            Some(self.sign(0, 1))
        } else {
            None
        }
    }

    /// sgn D_ij = sgn D_kj for every i < k < j.
    pub fn column_consistent(&self, i: usize, j: usize) -> bool {
        (i + 1..j).all(|k| self.sign(k, j) == self.sign(i, j))
    }

    /// Strictly-upper entries violating column consistency.
    pub fn column_inconsistencies(&self) -> Vec<(usize, usize)> {
        let n = self.n();
        (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .filter(|&(i, j)| !self.column_consistent(i, j))
            .collect()
    }
}

pub fn displacement(mu: &MeasureSpec) -> DisplacementMatrix {
    DisplacementMatrix::from_means(&mu.means())
}

/// μ̌(E) = μ(E⁻¹).
pub fn reflect(mu: &MeasureSpec) -> MeasureSpec {
    MeasureSpec {
        n: mu.n,
        p: mu.p,
        support: mu.support.iter().map(|(g, w)| (sd_inverse(g), w.clone())).collect(),
    }
}
