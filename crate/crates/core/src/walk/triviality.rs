use super::{displacement, MeasureSpec};
use crate::group::{sd_multiply, SemiDirectElement};
use num_traits::Zero;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Trivial,
    NonTrivial,
}

/// A pair p < q with D_pq ≠ 0 and a support element with a nonzero entry at `entry`.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub p: usize,
    pub q: usize,
    pub entry: (usize, usize),
    pub support_index: usize,
    pub element: SemiDirectElement,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrivialityReport {
    /// Per pair p < q: D_pq = 0 or every support element has f_pq = 0.
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    /// Per pair p < q: D_pq = 0 or every support element vanishes on the block p ≤ i < j ≤ q.
    pub strict_verdict: Verdict,
    pub strict_witness: Option<Witness>,
    pub verdicts_differ: bool,
    pub zero_displacement: bool,
    pub abelian_support: bool,
}

fn find_witness(mu: &MeasureSpec, entries: impl Fn(usize, usize) -> Vec<(usize, usize)>) -> Option<Witness> {
    let d = displacement(mu);
    let n = mu.n();
    for p in 0..n {
        for q in p + 1..n {
            if d.get(p, q).is_zero() {
                continue;
            }
            for (i, j) in entries(p, q) {
                for (k, (g, _)) in mu.support().iter().enumerate() {
                    if !g.f().get(i, j).is_zero() {
                        return Some(Witness {
                            p,
                            q,
                            entry: (i, j),
                            support_index: k,
                            element: g.clone(),
                        });
                    }
                }
            }
        }
    }
    None
}

fn pairwise_commuting(support: &[SemiDirectElement]) -> bool {
    support.iter().enumerate().all(|(k, a)| {
        support[k + 1..]
            .iter()
            .all(|b| sd_multiply(a, b).expect("same group") == sd_multiply(b, a).expect("same group"))
    })
}

/// Decides whether the walk's Poisson boundary is a single point.
///
/// A support that generates an abelian group, or zero displacement everywhere,
/// is trivial regardless of the entrywise test.
pub fn check_triviality(mu: &MeasureSpec) -> TrivialityReport {
    let d = displacement(mu);
    let n = mu.n();
    let zero_displacement = (0..n).all(|i| (i + 1..n).all(|j| d.get(i, j).is_zero()));
    let elements: Vec<_> = mu.support().iter().map(|(g, _)| g.clone()).collect();
    let abelian_support = pairwise_commuting(&elements);
    let shortcut = zero_displacement || abelian_support;

    let witness = find_witness(mu, |p, q| vec![(p, q)]);
    let strict_witness = find_witness(mu, |p, q| {
        (p..=q).flat_map(|i| (i + 1..=q).map(move |j| (i, j))).collect()
    });
    let verdict_of = |w: &Option<Witness>| {
        if shortcut || w.is_none() {
            Verdict::Trivial
        } else {
            Verdict::NonTrivial
        }
    };
    let verdict = verdict_of(&witness);
    let strict_verdict = verdict_of(&strict_witness);
    TrivialityReport {
        verdict,
        witness: if shortcut { None } else { witness },
        strict_verdict,
        strict_witness: if shortcut { None } else { strict_witness },
        verdicts_differ: verdict != strict_verdict,
        zero_displacement,
        abelian_support,
    }
}

#[cfg(test)]
mod tests {
    use super::super::fixtures;
    use super::*;
    use crate::arith::q_int;
    use crate::group::TriangularMatrix;

    #[test]
    fn diagonal_support_is_trivial() {
        let r = check_triviality(&fixtures::abelian_diagonal());
        assert!(r.abelian_support);
        assert!(!r.zero_displacement);
        assert_eq!(r.verdict, Verdict::Trivial);
        assert_eq!(r.strict_verdict, Verdict::Trivial);
    }

    #[test]
    fn zero_displacement_is_trivial() {
        let r = check_triviality(&fixtures::zero_drift());
        assert!(r.zero_displacement);
        assert!(!r.abelian_support);
        assert_eq!(r.verdict, Verdict::Trivial);
    }

    #[test]
    fn drift_with_entry_is_nontrivial() {
        let mu = fixtures::drift_with_entry();
        let r = check_triviality(&mu);
        assert_eq!(r.verdict, Verdict::NonTrivial);
        let w = r.witness.unwrap();
        assert_eq!((w.p, w.q), (0, 1));
        assert!(!w.element.f().get(0, 1).is_zero());
        assert!(!r.verdicts_differ);
    }

    #[test]
    fn strict_mode_can_disagree() {
        // means (2/3, 2/3, 0): D_12 = 0, f_13 = f_23 = 0, but f_12 ≠ 0 inside the (1,3) block
        let a = SemiDirectElement::new(2, vec![0, 0, 0], TriangularMatrix::theta(3, 0, 1, q_int(1)).unwrap()).unwrap();
        let b = SemiDirectElement::new(2, vec![2, 0, 0], TriangularMatrix::identity(3)).unwrap();
        let c = SemiDirectElement::new(2, vec![0, 2, 0], TriangularMatrix::identity(3)).unwrap();
        let mu = MeasureSpec::uniform(3, 2, vec![a, b, c]).unwrap();
        let r = check_triviality(&mu);
        assert!(!r.abelian_support);
        assert_eq!(r.verdict, Verdict::Trivial);
        assert_eq!(r.strict_verdict, Verdict::NonTrivial);
        assert!(r.verdicts_differ);
        assert_eq!(r.strict_witness.unwrap().entry, (0, 1));
    }
}
