use super::{DisplacementMatrix, Trajectory, WalkError, WalkState};
use crate::arith::{padic_frac, padic_valuation, pow_q, q_to_f64, trunc_add, ArithError, BigRational, PAdicTrunc};
use crate::group::SemiDirectElement;
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionParams {
    pub real_tol: f64,
    pub padic_digits: u32,
    /// Steps between the reference state and the final state.
    pub window: u64,
}

impl Default for DetectionParams {
    fn default() -> Self {
        DetectionParams {
            real_tol: 1e-9,
            padic_digits: 30,
            window: 100,
        }
    }
}

/// One coordinate of a boundary point.
///
/// `representative` is an exact rational in Z[1/p] agreeing with the limit to the
/// certified precision; approximation maps are evaluated on it.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryEntry {
    Real {
        value: f64,
        error_bound: f64,
        representative: BigRational,
    },
    PAdic {
        value: PAdicTrunc,
        representative: BigRational,
    },
    Undefined,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tag {
    Real,
    PAdic,
    Undefined,
}

impl BoundaryEntry {
    pub fn tag(&self) -> Tag {
        match self {
            BoundaryEntry::Real { .. } => Tag::Real,
            BoundaryEntry::PAdic { .. } => Tag::PAdic,
            BoundaryEntry::Undefined => Tag::Undefined,
        }
    }

    pub fn representative(&self) -> Option<&BigRational> {
        match self {
            BoundaryEntry::Real { representative, .. } | BoundaryEntry::PAdic { representative, .. } => {
                Some(representative)
            }
            BoundaryEntry::Undefined => None,
        }
    }
}

/// A point of the mixed real/p-adic boundary: entry (i,j) lives in ℝ when D_ij < 0 and in ℚ_p when D_ij > 0.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryPoint {
    pub p: u64,
    pub entries: Vec<Vec<BoundaryEntry>>,
    /// Entries where sgn D_ij ≠ sgn D_kj for some i < k < j.
    pub hypothesis_failures: Vec<(usize, usize)>,
}

impl BoundaryPoint {
    pub fn n(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, i: usize, j: usize) -> &BoundaryEntry {
        &self.entries[i][j]
    }

    pub fn tag_pattern(&self) -> Vec<Vec<Tag>> {
        self.entries
            .iter()
            .map(|row| row.iter().map(BoundaryEntry::tag).collect())
            .collect()
    }
}

/// Tag each strictly-upper entry must carry under D.
pub fn expected_tag(d: &DisplacementMatrix, i: usize, j: usize) -> Tag {
    match d.sign(i, j) {
        Ordering::Less => Tag::Real,
        Ordering::Greater => Tag::PAdic,
        Ordering::Equal => Tag::Undefined,
    }
}

/// Largest K with δ · p^K ≤ 1, for δ > 0.
fn floor_log_inverse(delta: &BigRational, p: u64) -> i64 {
    let bits = delta.numer().bits() as f64 - delta.denom().bits() as f64;
    let mut k = (-bits * std::f64::consts::LN_2 / (p as f64).ln()).floor() as i64;
    while delta * pow_q(p, k) > BigRational::one() {
        k -= 1;
    }
    while delta * pow_q(p, k + 1) <= BigRational::one() {
        k += 1;
    }
    k
}

/// Nearest multiple of p^(−k).
fn round_to_grid(x: &BigRational, p: u64, k: i64) -> BigRational {
    let scaled = x * pow_q(p, k) + BigRational::new(BigInt::one(), BigInt::from(2));
    BigRational::from_integer(scaled.floor().to_integer()) * pow_q(p, -k)
}

/// The residue of x modulo p^N in (−p^N/2, p^N/2], keeping its digits below N.
fn balanced_residue(x: &BigRational, p: u64, n: i64) -> BigRational {
    let scale = pow_q(p, n);
    let r = padic_frac(&(x / &scale), p).expect("Z[1/p]") * &scale;
    if r.clone() * BigRational::from_integer(2.into()) > scale {
        r - scale
    } else {
        r
    }
}

/// Truncation of x to absolute precision p^digits.
fn truncate_to(x: &BigRational, p: u64, digits: i64) -> PAdicTrunc {
    match padic_valuation(x, p) {
        Some(v) if v < digits => PAdicTrunc::from_rational(x, p, (digits - v) as u32),
        _ => PAdicTrunc::zero_certificate(p, digits),
    }
}

fn padic_gap(a: &PAdicTrunc, b: &PAdicTrunc) -> i64 {
    match trunc_add(a, &b.neg()) {
        Ok(d) if d.is_exact_zero() => i64::MAX,
        Ok(d) => d.valuation_lower_bound(),
        Err(ArithError::PrecisionExhausted { certified_to }) => certified_to,
        Err(e) => panic!("{e}"),
    }
}

fn detect_real(
    last: &WalkState,
    window: &[&WalkState],
    i: usize,
    j: usize,
    p: u64,
    params: &DetectionParams,
) -> Result<BoundaryEntry, WalkError> {
    let value = last.phi_shadow[i][j];
    let bound = window
        .iter()
        .map(|s| (value - s.phi_shadow[i][j]).abs())
        .fold(0.0f64, f64::max);
    if !value.is_finite() || !(bound < params.real_tol) {
        return Err(WalkError::NotConverged {
            i,
            j,
            diagnostics: format!(
                "real shadow {value} moved by {bound} over the last {} steps (tolerance {})",
                params.window, params.real_tol
            ),
        });
    }
    let representative = match &last.phi {
        Some(exact) => {
            let here = exact.get(i, j);
            let delta = window
                .iter()
                .filter_map(|s| s.phi.as_ref())
                .map(|e| (here - e.get(i, j)).abs())
                .max();
            match delta {
                Some(d) if d.is_zero() => here.clone(),
                Some(d) => round_to_grid(here, p, floor_log_inverse(&d, p)),
                None => BigRational::from_float(value).expect("finite"),
            }
        }
        None => BigRational::from_float(value).expect("finite"),
    };
    Ok(BoundaryEntry::Real {
        value,
        error_bound: bound,
        representative,
    })
}

fn detect_padic(
    last: &WalkState,
    window: &[&WalkState],
    i: usize,
    j: usize,
    p: u64,
    params: &DetectionParams,
) -> Result<BoundaryEntry, WalkError> {
    let exact_last = last.phi.as_ref().map(|e| e.get(i, j));
    let exact_window: Vec<_> = window.iter().filter_map(|s| s.phi.as_ref()).collect();
    let (certified, base) = match exact_last {
        Some(here) if !exact_window.is_empty() => {
            let n = exact_window
                .iter()
                .map(|e| padic_valuation(&(here - e.get(i, j)), p).unwrap_or(i64::MAX))
                .min()
                .unwrap();
            (n, here.clone())
        }
        _ => {
            let here = &last.padic_shadow[i][j];
            let n = window
                .iter()
                .map(|s| padic_gap(here, &s.padic_shadow[i][j]))
                .min()
                .unwrap_or(i64::MIN);
            (n, here.to_rational())
        }
    };
    let digits = params.padic_digits as i64;
    if certified < digits {
        return Err(WalkError::NotConverged {
            i,
            j,
            diagnostics: format!(
                "only {certified} p-adic digits agree over the last {} steps (need {digits})",
                params.window
            ),
        });
    }
    let representative = if certified == i64::MAX {
        base
    } else {
        balanced_residue(&base, p, certified)
    };
    Ok(BoundaryEntry::PAdic {
        value: truncate_to(&representative, p, digits),
        representative,
    })
}

/// Reads the limit of each φ_ij off the tail of a trajectory.
pub fn detect_boundary(
    traj: &Trajectory,
    d: &DisplacementMatrix,
    params: &DetectionParams,
) -> Result<BoundaryPoint, WalkError> {
    let n = traj.n;
    if d.n() != n {
        return Err(WalkError::BadArgument(format!(
            "displacement is {}x{}, walk is {n}x{n}",
            d.n(),
            d.n()
        )));
    }
    let last = traj.last();
    let start = last
        .m
        .checked_sub(params.window)
        .ok_or_else(|| WalkError::NotConverged {
            i: 0,
            j: 0,
            diagnostics: format!("walk of {} steps is shorter than the window {}", last.m, params.window),
        })?;
    let reference = traj
        .states
        .iter()
        .rev()
        .find(|s| s.m <= start)
        .map(|s| s.m)
        .ok_or_else(|| WalkError::NotConverged {
            i: 0,
            j: 0,
            diagnostics: format!("no recorded state at or before step {start}"),
        })?;
    let window: Vec<&WalkState> = traj
        .states
        .iter()
        .filter(|s| s.m >= reference && s.m < last.m)
        .collect();
    let mut entries = vec![vec![BoundaryEntry::Undefined; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            entries[i][j] = match expected_tag(d, i, j) {
                Tag::Real => detect_real(last, &window, i, j, traj.p, params)?,
                Tag::PAdic => detect_padic(last, &window, i, j, traj.p, params)?,
                Tag::Undefined => BoundaryEntry::Undefined,
            };
        }
    }
    Ok(BoundaryPoint {
        p: traj.p,
        entries,
        hypothesis_failures: d.column_inconsistencies(),
    })
}

/// (x, f) · b = f ζ_x(b), evaluated in the completion each entry lives in.
pub fn gamma_action(g: &SemiDirectElement, b: &BoundaryPoint) -> Result<BoundaryPoint, WalkError> {
    let n = b.n();
    if g.n() != n || g.prime() != b.p {
        return Err(WalkError::BadArgument(
            "element and boundary point disagree on n or p".into(),
        ));
    }
    let p = b.p;
    let x = g.x();
    let mut entries = vec![vec![BoundaryEntry::Undefined; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let tag = b.get(i, j).tag();
            // terms k = i..j-1 carry b_kj; the k = j term is the constant f_ij
            let terms: Vec<(BigRational, &BoundaryEntry)> = (i..j)
                .filter(|&k| !g.f().get(i, k).is_zero())
                .map(|k| (g.f().get(i, k) * pow_q(p, x[k] - x[j]), b.get(k, j)))
                .collect();
            if terms.iter().any(|(_, e)| e.tag() != tag) {
                return Err(WalkError::TagMismatch { i, j });
            }
            let constant = g.f().get(i, j);
            entries[i][j] = match tag {
                Tag::Undefined => BoundaryEntry::Undefined,
                Tag::Real => {
                    let (mut value, mut err) = (q_to_f64(constant), 0.0);
                    let mut rep = constant.clone();
                    for (c, e) in &terms {
                        if let BoundaryEntry::Real {
                            value: v,
                            error_bound,
                            representative,
                        } = e
                        {
                            let cf = q_to_f64(c);
                            value += cf * v;
                            err += cf.abs() * error_bound;
                            rep += c * representative;
                        }
                    }
                    BoundaryEntry::Real {
                        value,
                        error_bound: err,
                        representative: rep,
                    }
                }
                Tag::PAdic => {
                    // known digits of c·b_kj end at v_p(c) + (those of b_kj)
                    let mut limit = i64::MAX;
                    let mut rep = constant.clone();
                    for (c, e) in &terms {
                        if let BoundaryEntry::PAdic { value, representative } = e {
                            if let Some(a) = value.absolute_precision() {
                                limit = limit.min(a + padic_valuation(c, p).expect("nonzero"));
                            }
                            rep += c * representative;
                        }
                    }
                    let value = if limit == i64::MAX {
                        PAdicTrunc::from_rational(&rep, p, PAdicTrunc::DEFAULT_PRECISION)
                    } else {
                        truncate_to(&rep, p, limit)
                    };
                    BoundaryEntry::PAdic {
                        value,
                        representative: rep,
                    }
                }
            };
        }
    }
    Ok(BoundaryPoint {
        p,
        entries,
        hypothesis_failures: b.hypothesis_failures.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::super::{displacement, fixtures, run_walk, run_walk_from, WalkConfig};
    use super::*;
    use crate::arith::{parse_q, q_int};
    use crate::group::{sd_multiply, TriangularMatrix};

    fn detect(shift: i64, steps: u64) -> BoundaryPoint {
        let mu = fixtures::theta_point_mass(shift);
        let traj = run_walk(&mu, &WalkConfig::new(steps, 0).with_audit_every(10)).unwrap();
        detect_boundary(&traj, &displacement(&mu), &DetectionParams::default()).unwrap()
    }

    #[test]
    fn two_adic_limit_of_geometric_sum() {
        let b = detect(1, 200);
        match b.get(0, 1) {
            BoundaryEntry::PAdic { value, representative } => {
                assert_eq!(representative, &q_int(-1));
                assert_eq!(value, &PAdicTrunc::from_rational(&q_int(-1), 2, 30));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn real_limit_of_geometric_sum() {
        let b = detect(-1, 200);
        match b.get(0, 1) {
            BoundaryEntry::Real {
                value,
                representative,
                error_bound,
            } => {
                assert_eq!(*value, 2.0);
                assert_eq!(representative, &q_int(2));
                assert!(*error_bound < 1e-9);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn zero_displacement_is_undefined() {
        let b = detect(0, 200);
        assert_eq!(b.get(0, 1), &BoundaryEntry::Undefined);
    }

    #[test]
    fn short_walks_do_not_converge() {
        let mu = fixtures::theta_point_mass(1);
        let traj = run_walk(&mu, &WalkConfig::new(20, 0).with_audit_every(1)).unwrap();
        let params = DetectionParams {
            window: 10,
            ..Default::default()
        };
        assert!(matches!(
            detect_boundary(&traj, &displacement(&mu), &params),
            Err(WalkError::NotConverged { i: 0, j: 1, .. })
        ));
    }

    #[test]
    fn helpers() {
        assert_eq!(floor_log_inverse(&parse_q("1/8").unwrap(), 2), 3);
        assert_eq!(floor_log_inverse(&parse_q("1/9").unwrap(), 2), 3);
        assert_eq!(floor_log_inverse(&parse_q("3").unwrap(), 2), -2);
        assert_eq!(round_to_grid(&parse_q("2047/1024").unwrap(), 2, 5), q_int(2));
        assert_eq!(balanced_residue(&parse_q("1023").unwrap(), 2, 10), q_int(-1));
        assert_eq!(
            balanced_residue(&parse_q("5/2").unwrap(), 2, 3),
            parse_q("5/2").unwrap()
        );
        assert_eq!(
            balanced_residue(&parse_q("13/2").unwrap(), 2, 3),
            parse_q("-3/2").unwrap()
        );
    }

    #[test]
    fn identity_acts_trivially() {
        let b = detect(-1, 200);
        assert_eq!(gamma_action(&SemiDirectElement::identity(2, 2), &b).unwrap(), b);
        let b = detect(1, 200);
        assert_eq!(gamma_action(&SemiDirectElement::identity(2, 2), &b).unwrap(), b);
    }

    #[test]
    fn theta_translates_real_entry() {
        let b = detect(-1, 200);
        let g = SemiDirectElement::new(2, vec![0, 0], TriangularMatrix::theta(2, 0, 1, q_int(1)).unwrap()).unwrap();
        let gb = gamma_action(&g, &b).unwrap();
        assert_eq!(gb.get(0, 1).representative(), Some(&q_int(3)));
        match gb.get(0, 1) {
            BoundaryEntry::Real { value, .. } => assert_eq!(*value, 3.0),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn action_is_compatible_with_products() {
        let mu = fixtures::negative_drift_n3();
        let traj = run_walk(&mu, &WalkConfig::new(400, 3).with_audit_every(100)).unwrap();
        let b = detect_boundary(&traj, &displacement(&mu), &DetectionParams::default()).unwrap();
        let g = &mu.support()[5].0;
        let h = &mu.support()[17].0;
        let lhs = gamma_action(&sd_multiply(g, h).unwrap(), &b).unwrap();
        let rhs = gamma_action(g, &gamma_action(h, &b).unwrap()).unwrap();
        for i in 0..3 {
            for j in i + 1..3 {
                assert_eq!(lhs.get(i, j).representative(), rhs.get(i, j).representative());
                if let (BoundaryEntry::Real { value: a, .. }, BoundaryEntry::Real { value: c, .. }) =
                    (lhs.get(i, j), rhs.get(i, j))
                {
                    assert!((a - c).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn tag_mismatch_is_reported() {
        let mut b = detect(-1, 200);
        b.entries = vec![vec![BoundaryEntry::Undefined; 3]; 3];
        b.entries[0][2] = BoundaryEntry::Real {
            value: 1.0,
            error_bound: 0.0,
            representative: q_int(1),
        };
        let g = SemiDirectElement::new(2, vec![0, 0, 0], TriangularMatrix::theta(3, 0, 1, q_int(1)).unwrap()).unwrap();
        assert_eq!(gamma_action(&g, &b), Err(WalkError::TagMismatch { i: 0, j: 2 }));
    }

    #[test]
    fn limits_are_equivariant() {
        let g = SemiDirectElement::new(
            2,
            vec![2, -1],
            TriangularMatrix::theta(2, 0, 1, parse_q("3/4").unwrap()).unwrap(),
        )
        .unwrap();
        for shift in [1, -1] {
            let mu = fixtures::theta_point_mass(shift);
            let cfg = WalkConfig::new(300, 0).with_audit_every(10);
            let d = displacement(&mu);
            let params = DetectionParams::default();
            let b = detect_boundary(&run_walk(&mu, &cfg).unwrap(), &d, &params).unwrap();
            let shifted = detect_boundary(&run_walk_from(&g, &mu, &cfg).unwrap(), &d, &params).unwrap();
            let moved = gamma_action(&g, &b).unwrap();
            match (moved.get(0, 1), shifted.get(0, 1)) {
                (BoundaryEntry::PAdic { value: a, .. }, BoundaryEntry::PAdic { value: c, .. }) => {
                    assert!(padic_gap(a, c) >= 30, "{a:?} vs {c:?}");
                }
                (BoundaryEntry::Real { value: a, .. }, BoundaryEntry::Real { value: c, .. }) => {
                    assert!((a - c).abs() < 1e-12, "{a} vs {c}");
                }
                other => panic!("{other:?}"),
            }
            assert_eq!(moved.get(0, 1).representative(), shifted.get(0, 1).representative());
        }
    }
}
