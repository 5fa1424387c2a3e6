use super::{displacement, BoundaryEntry, BoundaryPoint, MeasureSpec, Trajectory, WalkError};
use crate::arith::{padic_frac, padic_int_part, pow_q, BigRational};
use crate::group::{sd_inverse, sd_multiply, SemiDirectElement, TriangularMatrix};
use crate::metrics::sd_length_estimate;
use num_bigint::BigInt;
use num_traits::Zero;
use std::cmp::Ordering;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApproxVariant {
    /// Entrywise truncation; exact for n ≤ 2.
    Generic,
    /// n = 3 with one displacement sign: T_13 cancels the T_12 (φ_23 − T_23) cross term.
    CorrectedN3,
    /// n = 3 with one displacement sign, correction built from (φ_12 − T_12) T_23 instead.
    AlternateN3,
    /// Entrywise truncation where no corrected map is available (n ≥ 3, mixed or zero signs, or n ≥ 4).
    GenericFlagged,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApproxMap {
    pub element: SemiDirectElement,
    pub variant: ApproxVariant,
}

/// t^(m) = (⌊m·mean_1⌋, …, ⌊m·mean_n⌋).
pub fn drift_vector(mu: &MeasureSpec, m: u64) -> Vec<i64> {
    let scale = BigRational::from_integer(BigInt::from(m));
    mu.means()
        .iter()
        .map(|mean| i64::try_from((mean * &scale).floor().to_integer()).expect("drift fits in i64"))
        .collect()
}

fn floor_q(x: &BigRational) -> BigRational {
    x.floor()
}

/// p^M ⌊p^(−M) b⌋ for real entries, p^M {p^(−M) b} for p-adic ones.
fn truncate_entry(entry: &BoundaryEntry, p: u64, shift: i64) -> BigRational {
    let scale = pow_q(p, shift);
    match entry {
        BoundaryEntry::Real { representative, .. } => floor_q(&(representative / &scale)) * scale,
        BoundaryEntry::PAdic { representative, .. } => {
            padic_frac(&(representative / &scale), p).expect("Z[1/p]") * scale
        }
        BoundaryEntry::Undefined => BigRational::zero(),
    }
}

/// Which product the n = 3 correction of T_13 compensates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossTerm {
    /// (T⁻¹φ)_13 = φ_13 − T_13 − T_12 (φ_23 − T_23): uses ⌊p^(−M12) b12⌋ and {p^(−M23) b23}.
    Compensating,
    /// Compensates (φ_12 − T_12) T_23: uses {p^(−M12) b12} and p^(−M23) b23.
    Alternate,
}

/// Π^(m)(b) = (t^(m), T^(m)(b)).
pub fn approx_map(b: &BoundaryPoint, mu: &MeasureSpec, m: u64) -> Result<ApproxMap, WalkError> {
    approx_map_with(b, mu, m, CrossTerm::Compensating)
}

pub fn approx_map_with(
    b: &BoundaryPoint,
    mu: &MeasureSpec,
    m: u64,
    cross_term: CrossTerm,
) -> Result<ApproxMap, WalkError> {
    let n = mu.n();
    let p = mu.prime();
    if b.n() != n || b.p != p {
        return Err(WalkError::BadArgument(
            "boundary point and measure disagree on n or p".into(),
        ));
    }
    let d = displacement(mu);
    let t = drift_vector(mu, m);
    let big_m = |i: usize, j: usize| t[i] - t[j];
    let mut e = TriangularMatrix::identity(n).into_entries();
    for i in 0..n {
        for j in i + 1..n {
            e[i][j] = truncate_entry(b.get(i, j), p, big_m(i, j));
        }
    }
    let variant = match (n, d.homogeneous_sign()) {
        (0..=2, _) => ApproxVariant::Generic,
        (3, Some(sign)) => {
            let (m12, m23, m13) = (big_m(0, 1), big_m(1, 2), big_m(0, 2));
            let rep = |i: usize, j: usize| {
                b.get(i, j)
                    .representative()
                    .cloned()
                    .ok_or(WalkError::TagMismatch { i, j })
            };
            let b12 = rep(0, 1)? * pow_q(p, -m12);
            let b23 = rep(1, 2)? * pow_q(p, -m23);
            // negative: subtract p^M13 ⌊A⌋; positive: subtract p^M13 {A}
            let settle = |a: BigRational| -> Result<BigRational, WalkError> {
                Ok(match sign {
                    Ordering::Less => floor_q(&a),
                    _ => padic_frac(&a, p)?,
                })
            };
            let (whole, part) = (padic_int_part(&b12, p)?, padic_frac(&b12, p)?);
            let (variant, a) = match (cross_term, sign) {
                (CrossTerm::Compensating, Ordering::Less) => (ApproxVariant::CorrectedN3, whole * padic_frac(&b23, p)?),
                (CrossTerm::Compensating, _) => (ApproxVariant::CorrectedN3, part * padic_int_part(&b23, p)?),
                (CrossTerm::Alternate, Ordering::Less) => (ApproxVariant::AlternateN3, part * b23),
                (CrossTerm::Alternate, _) => (ApproxVariant::AlternateN3, whole * b23),
            };
            e[0][2] -= pow_q(p, m13) * settle(a)?;
            variant
        }
        _ => ApproxVariant::GenericFlagged,
    };
    let element = SemiDirectElement::new(p, t, TriangularMatrix::new(e)?)?;
    Ok(ApproxMap { element, variant })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorSeries {
    /// (m, ⟦Π^(m)(b)⁻¹ · (y^(m), φ^(m))⟧)
    pub points: Vec<(u64, u64)>,
    pub variant: ApproxVariant,
}

/// The error element Π^(m)(b)⁻¹ · (y^(m), φ^(m)).
pub fn error_element(
    b: &BoundaryPoint,
    mu: &MeasureSpec,
    m: u64,
    state: &SemiDirectElement,
) -> Result<(SemiDirectElement, ApproxVariant), WalkError> {
    let pi = approx_map(b, mu, m)?;
    Ok((sd_multiply(&sd_inverse(&pi.element), state)?, pi.variant))
}

/// ⟦error element⟧ at every recorded step that carries an exact state.
pub fn error_series(traj: &Trajectory, b: &BoundaryPoint, mu: &MeasureSpec) -> Result<ErrorSeries, WalkError> {
    let mut points = Vec::new();
    let mut variant = approx_map(b, mu, 0)?.variant;
    for s in &traj.states {
        let Some(state) = s.element(traj.p) else {
            continue;
        };
        let (err, v) = error_element(b, mu, s.m, &state)?;
        variant = v;
        points.push((s.m, sd_length_estimate(&err)));
    }
    Ok(ErrorSeries { points, variant })
}

#[cfg(test)]
mod tests {
    use super::super::{detect_boundary, fixtures, reflect, run_walk, DetectionParams, WalkConfig};
    use super::*;
    use crate::arith::{padic_valuation, q_int};
    use num_traits::{One, Signed};

    fn boundary(mu: &MeasureSpec, steps: u64, seed: u64) -> (Trajectory, BoundaryPoint) {
        let traj = run_walk(mu, &WalkConfig::new(steps, seed).with_audit_every(10)).unwrap();
        let b = detect_boundary(&traj, &displacement(mu), &DetectionParams::default()).unwrap();
        (traj, b)
    }

    #[test]
    fn zero_step_is_unit_scale_truncation() {
        let mu = fixtures::theta_point_mass(-1);
        let (_, b) = boundary(&mu, 200, 0);
        let pi = approx_map(&b, &mu, 0).unwrap();
        assert_eq!(pi.element.x(), &[0, 0]);
        assert_eq!(pi.element.f().get(0, 1), &q_int(2));
        assert_eq!(pi.variant, ApproxVariant::Generic);
    }

    #[test]
    fn dyadic_truncation_of_real_limit() {
        let mu = fixtures::theta_point_mass(-1);
        let (traj, b) = boundary(&mu, 200, 0);
        for m in [1u64, 5, 40, 150] {
            let pi = approx_map(&b, &mu, m).unwrap();
            assert_eq!(pi.element.x(), &[-(m as i64), 0]);
            assert_eq!(pi.element.f().get(0, 1), &q_int(2));
        }
        let s = traj.state_at(40).unwrap().element(2).unwrap();
        let (err, _) = error_element(&b, &mu, 40, &s).unwrap();
        assert!(err.x().iter().all(|v| *v == 0));
        assert_eq!(err.f().get(0, 1), &q_int(-2));
    }

    #[test]
    fn deterministic_series_is_constant() {
        let mu = fixtures::theta_point_mass(-1);
        let (traj, b) = boundary(&mu, 300, 0);
        let series = error_series(&traj, &b, &mu).unwrap();
        assert!(series.points.len() > 20);
        assert!(series.points.iter().all(|&(_, e)| e == 2), "{:?}", series.points);

        let mu = fixtures::theta_point_mass(1);
        let (traj, b) = boundary(&mu, 300, 0);
        let series = error_series(&traj, &b, &mu).unwrap();
        assert!(series.points.iter().all(|&(_, e)| e == 0), "{:?}", series.points);
    }

    #[test]
    fn identity_walk_has_zero_error() {
        let mu = MeasureSpec::point_mass(SemiDirectElement::identity(3, 2));
        let (traj, b) = boundary(&mu, 200, 0);
        let series = error_series(&traj, &b, &mu).unwrap();
        assert!(series.points.iter().all(|&(_, e)| e == 0));
        assert_eq!(series.variant, ApproxVariant::GenericFlagged);
    }

    #[test]
    fn corrected_map_is_selected_for_homogeneous_n3() {
        let mu = fixtures::negative_drift_n3();
        let (_, b) = boundary(&mu, 400, 1);
        assert_eq!(approx_map(&b, &mu, 50).unwrap().variant, ApproxVariant::CorrectedN3);
        let r = reflect(&mu);
        let (_, b) = boundary(&r, 400, 1);
        assert_eq!(approx_map(&b, &r, 50).unwrap().variant, ApproxVariant::CorrectedN3);
    }

    fn gamma_with(mu: &MeasureSpec, cross: CrossTerm, m: u64) -> SemiDirectElement {
        let (traj, b) = boundary(mu, 1000, 4);
        let s = traj.state_at(m).unwrap().element(2).unwrap();
        let pi = approx_map_with(&b, mu, m, cross).unwrap();
        sd_multiply(&sd_inverse(&pi.element), &s).unwrap()
    }

    fn bits(x: &BigRational) -> i64 {
        x.numer().bits() as i64 - x.denom().bits() as i64
    }

    #[test]
    fn compensating_cross_term_keeps_gamma_13_small() {
        let mu = fixtures::negative_drift_n3();
        let good = gamma_with(&mu, CrossTerm::Compensating, 400);
        assert!(good.f().get(0, 2).abs() < BigRational::from_integer(BigInt::from(1u64 << 40)));
        // the alternate cross term leaves T_12 (φ_23 − T_23) ≈ p^(M23) uncancelled
        let bad = gamma_with(&mu, CrossTerm::Alternate, 400);
        assert!(bits(bad.f().get(0, 2)) > 300, "{}", bad.f().get(0, 2));

        let r = reflect(&mu);
        let good = gamma_with(&r, CrossTerm::Compensating, 400);
        for (i, j) in [(0, 1), (1, 2), (0, 2)] {
            let g = good.f().get(i, j);
            if !g.is_zero() {
                assert!(padic_valuation(g, 2).unwrap() > -40, "({i},{j}) {g}");
            }
        }
        let bad = gamma_with(&r, CrossTerm::Alternate, 400);
        assert!(padic_valuation(bad.f().get(0, 2), 2).unwrap() < -300);
        assert!(good.f().get(0, 0).is_one());
    }
}
