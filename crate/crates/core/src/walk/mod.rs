//! Random walks on ℤ^n ⋉ UT_n(ℤ[1/p]): measures and their displacement, the
//! seeded walk engine, boundary limits in ℝ and ℚ_p, approximation maps and the
//! triviality classifier.

mod approx;
mod boundary;
mod engine;
mod measure;
mod triviality;

pub use approx::{
    approx_map, approx_map_with, drift_vector, error_element, error_series, ApproxMap, ApproxVariant, CrossTerm,
    ErrorSeries,
};
pub use boundary::{detect_boundary, expected_tag, gamma_action, BoundaryEntry, BoundaryPoint, DetectionParams, Tag};
pub use engine::{
    drift_deviation, run_seeds, run_walk, run_walk_from, sample_indices, Sampler, Trajectory, WalkConfig, WalkState,
    DEFAULT_AUDIT_EVERY, RNG_IDENTITY,
};
pub use measure::{displacement, reflect, DisplacementMatrix, MeasureSpec};
pub use triviality::{check_triviality, TrivialityReport, Verdict, Witness};

use crate::arith::ArithError;
use crate::group::GroupError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum WalkError {
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("entry ({},{}) has not converged: {diagnostics}", .i + 1, .j + 1)]
    NotConverged { i: usize, j: usize, diagnostics: String },
    #[error("entry ({},{}) combines coordinates from different completions", .i + 1, .j + 1)]
    TagMismatch { i: usize, j: usize },
    #[error("{0}")]
    BadArgument(String),
    #[error(transparent)]
    Group(#[from] GroupError),
}

impl From<ArithError> for WalkError {
    fn from(e: ArithError) -> Self {
        WalkError::Group(GroupError::Arith(e))
    }
}

/// Small measures used by tests, the acceptance suite and the CLI self-checks.
pub mod fixtures {
    use super::{reflect, MeasureSpec};
    use crate::arith::q_int;
    use crate::group::{SemiDirectElement, TriangularMatrix};

    fn el(x: &[i64], f: TriangularMatrix) -> SemiDirectElement {
        SemiDirectElement::new(2, x.to_vec(), f).expect("valid element")
    }

    /// Point mass at ((shift, 0), θ_12(1)) over p = 2.
    pub fn theta_point_mass(shift: i64) -> MeasureSpec {
        MeasureSpec::point_mass(el(&[shift, 0], TriangularMatrix::theta(2, 0, 1, q_int(1)).unwrap()))
    }

    /// n = 3, p = 2: x uniform on {(0,1,2), (1,0,3), (−1,2,1)} (means (0,1,2)) independent of
    /// f uniform on the eight unitriangular matrices with entries in {0,1}. Every D_ij < 0.
    pub fn negative_drift_n3() -> MeasureSpec {
        let xs: [[i64; 3]; 3] = [[0, 1, 2], [1, 0, 3], [-1, 2, 1]];
        let mut support = Vec::new();
        for x in xs {
            for bits in 0..8u8 {
                let mut e = TriangularMatrix::identity(3).into_entries();
                e[0][1] = q_int((bits & 1) as i64);
                e[1][2] = q_int((bits >> 1 & 1) as i64);
                e[0][2] = q_int((bits >> 2 & 1) as i64);
                support.push(el(&x, TriangularMatrix::new(e).unwrap()));
            }
        }
        MeasureSpec::uniform(3, 2, support).expect("24 distinct atoms")
    }

    /// Reflection of [`negative_drift_n3`]; every D_ij > 0.
    pub fn positive_drift_n3() -> MeasureSpec {
        reflect(&negative_drift_n3())
    }

    /// Diagonal-only support with nonzero drift.
    pub fn abelian_diagonal() -> MeasureSpec {
        let id = || TriangularMatrix::identity(2);
        MeasureSpec::uniform(2, 2, vec![el(&[1, 0], id()), el(&[2, 0], id())]).unwrap()
    }

    /// Non-commuting support with both means zero.
    pub fn zero_drift() -> MeasureSpec {
        let a = el(&[1, 0], TriangularMatrix::theta(2, 0, 1, q_int(1)).unwrap());
        let b = el(&[-1, 0], TriangularMatrix::identity(2));
        MeasureSpec::uniform(2, 2, vec![a, b]).unwrap()
    }

    /// D_12 = 1 with f_12 = 1 on half the support.
    pub fn drift_with_entry() -> MeasureSpec {
        let a = el(&[1, 0], TriangularMatrix::theta(2, 0, 1, q_int(1)).unwrap());
        let b = el(&[1, 0], TriangularMatrix::identity(2));
        MeasureSpec::uniform(2, 2, vec![a, b]).unwrap()
    }
}
