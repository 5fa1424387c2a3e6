use super::{mat_mul, GroupError, TriangularMatrix};
use crate::arith::BigRational;
use num_traits::{One, Zero};

/// Chains i = c_0 < c_1 < … < c_l = j through indices strictly between.
fn for_each_chain(i: usize, j: usize, mut visit: impl FnMut(&[usize])) {
    let inner: Vec<usize> = (i + 1..j).collect();
    let mut chain = Vec::with_capacity(inner.len() + 2);
    for mask in 0u64..(1u64 << inner.len()) {
        chain.clear();
        chain.push(i);
        for (b, &k) in inner.iter().enumerate() {
            if mask >> b & 1 == 1 {
                chain.push(k);
            }
        }
        chain.push(j);
        visit(&chain);
    }
}

fn check_unitriangular(m: &TriangularMatrix) -> Result<(), GroupError> {
    for i in 0..m.n() {
        if !m.get(i, i).is_one() {
            return Err(GroupError::NotUnitriangular { i, j: i });
        }
    }
    Ok(())
}

/// Inverse of a unitriangular matrix as a signed sum over index chains:
/// (f⁻¹)_ij = Σ_l (−1)^l Σ_{i=c_0<…<c_l=j} Π f_{c_t c_(t+1)}.
pub fn unitriangular_inverse_paths(m: &TriangularMatrix) -> Result<TriangularMatrix, GroupError> {
    check_unitriangular(m)?;
    let n = m.n();
    let mut out = TriangularMatrix::identity(n).into_entries();
    for i in 0..n {
        for j in i + 1..n {
            let mut total = BigRational::zero();
            for_each_chain(i, j, |chain| {
                let mut term = BigRational::one();
                for w in chain.windows(2) {
                    let e = m.get(w[0], w[1]);
                    if e.is_zero() {
                        return;
                    }
                    term *= e;
                }
                if (chain.len() - 1) % 2 == 1 {
                    total -= term;
                } else {
                    total += term;
                }
            });
            out[i][j] = total;
        }
    }
    Ok(TriangularMatrix::from_raw(out))
}

/// Same inverse from the row recurrence (f⁻¹)_{i,i+s} = −Σ_{k=1..s} f_{i,i+k} (f⁻¹)_{i+k,i+s}.
pub fn unitriangular_inverse_recursive(m: &TriangularMatrix) -> Result<TriangularMatrix, GroupError> {
    check_unitriangular(m)?;
    let n = m.n();
    let mut out = TriangularMatrix::identity(n).into_entries();
    for s in 1..n {
        for i in 0..n - s {
            let mut acc = BigRational::zero();
            for k in 1..=s {
                acc -= m.get(i, i + k) * &out[i + k][i + s];
            }
            out[i][i + s] = acc;
        }
    }
    Ok(TriangularMatrix::from_raw(out))
}

/// (I + g)⁻¹ = Σ_{k<n} (−g)^k for nilpotent g.
pub fn neumann_inverse(m: &TriangularMatrix) -> Result<TriangularMatrix, GroupError> {
    check_unitriangular(m)?;
    let n = m.n();
    let mut neg_g = m.entries().to_vec();
    for (i, row) in neg_g.iter_mut().enumerate() {
        row[i] = BigRational::zero();
        for v in row.iter_mut() {
            *v = -v.clone();
        }
    }
    let mut sum = TriangularMatrix::identity(n).into_entries();
    let mut power = sum.clone();
    for _ in 1..n {
        power = mat_mul(&power, &neg_g);
        for i in 0..n {
            for j in i..n {
                sum[i][j] += &power[i][j];
            }
        }
    }
    Ok(TriangularMatrix::from_raw(sum))
}

/// Inverse of an invertible upper-triangular matrix: split off the diagonal d,
/// invert the unitriangular d⁻¹m by the chain formula, then multiply by d⁻¹ on the right.
pub fn tri_inverse(m: &TriangularMatrix) -> Result<TriangularMatrix, GroupError> {
    let n = m.n();
    let mut unit = m.entries().to_vec();
    for (i, row) in unit.iter_mut().enumerate() {
        let d = m.get(i, i).clone();
        if d.is_zero() {
            return Err(GroupError::Singular);
        }
        for v in row.iter_mut().skip(i) {
            *v /= &d;
        }
    }
    let u_inv = unitriangular_inverse_paths(&TriangularMatrix::from_raw(unit))?;
    let mut out = u_inv.into_entries();
    for j in 0..n {
        let d_inv = m.get(j, j).recip();
        for row in out.iter_mut().take(j + 1) {
            row[j] *= &d_inv;
        }
    }
    Ok(TriangularMatrix::from_raw(out))
}

#[cfg(test)]
mod tests {
    use super::super::testutil::*;
    use super::*;
    use proptest::prelude::*;

    fn tm(rows: &[&[&str]]) -> TriangularMatrix {
        TriangularMatrix::new(mat(rows)).unwrap()
    }

    #[test]
    fn examples() {
        let a = tm(&[&["1", "5/2"], &["0", "1"]]);
        assert_eq!(tri_inverse(&a).unwrap(), tm(&[&["1", "-5/2"], &["0", "1"]]));
        let (x, y, z) = (q("3"), q("-1/4"), q("7"));
        let m = TriangularMatrix::new(vec![
            vec![q("1"), x.clone(), y.clone()],
            vec![q("0"), q("1"), z.clone()],
            vec![q("0"), q("0"), q("1")],
        ])
        .unwrap();
        let want = TriangularMatrix::new(vec![
            vec![q("1"), -x.clone(), &x * &z - &y],
            vec![q("0"), q("1"), -z.clone()],
            vec![q("0"), q("0"), q("1")],
        ])
        .unwrap();
        assert_eq!(tri_inverse(&m).unwrap(), want);
        assert_eq!(
            tri_inverse(&tm(&[&["2", "0"], &["0", "4"]])).unwrap(),
            tm(&[&["1/2", "0"], &["0", "1/4"]])
        );
    }

    #[test]
    fn unitriangular_required() {
        assert!(neumann_inverse(&tm(&[&["2", "0"], &["0", "1"]])).is_err());
    }

    fn arb_tri(unit: bool) -> impl Strategy<Value = TriangularMatrix> {
        (1usize..6).prop_flat_map(move |n| {
            prop::collection::vec((-20i64..20, 1i64..9), n * n).prop_map(move |v| {
                let mut e = vec![vec![BigRational::zero(); n]; n];
                for i in 0..n {
                    for j in i..n {
                        let (a, b) = v[i * n + j];
                        e[i][j] = if i == j {
                            if unit {
                                BigRational::one()
                            } else {
                                BigRational::new(((a.abs() % 7) + 1).into(), b.into())
                            }
                        } else {
                            BigRational::new(a.into(), b.into())
                        };
                    }
                }
                TriangularMatrix::new(e).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn inverse_routes_agree(m in arb_tri(true)) {
            let a = unitriangular_inverse_paths(&m).unwrap();
            let b = neumann_inverse(&m).unwrap();
            let c = unitriangular_inverse_recursive(&m).unwrap();
            prop_assert_eq!(&a, &b);
            prop_assert_eq!(&a, &c);
            prop_assert!(m.mul(&a).unwrap().is_identity());
        }

        #[test]
        fn triangular_inverse_multiplies_back(m in arb_tri(false)) {
            let inv = tri_inverse(&m).unwrap();
            prop_assert!(m.mul(&inv).unwrap().is_identity());
            prop_assert!(inv.mul(&m).unwrap().is_identity());
        }
    }
}
