use super::{GroupError, SemiDirectElement};
use crate::arith::{pow_q, BigRational, PLocalNumber, PrimeSet};
use num_traits::{One, Zero};

/// Strictly increasing integer sequences running from 0 to r.
pub fn enumerate_mfi(r: usize) -> Vec<Vec<usize>> {
    if r == 0 {
        return vec![vec![0]];
    }
    let inner = r - 1;
    let mut out: Vec<Vec<usize>> = (0u64..(1u64 << inner))
        .map(|mask| {
            let mut s = vec![0];
            s.extend((1..r).filter(|k| mask >> (k - 1) & 1 == 1));
            s.push(r);
            s
        })
        .collect();
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    out
}

/// Calls `visit` with every strictly increasing tuple of `len` values in 0..m.
fn for_each_increasing(len: usize, m: usize, visit: &mut impl FnMut(&[usize])) {
    fn rec(start: usize, m: usize, buf: &mut Vec<usize>, len: usize, visit: &mut impl FnMut(&[usize])) {
        if buf.len() == len {
            visit(buf);
            return;
        }
        let remaining = len - buf.len();
        for b in start..=m.saturating_sub(remaining) {
            if b >= m {
                break;
            }
            buf.push(b);
            rec(b + 1, m, buf, len, visit);
            buf.pop();
        }
    }
    let mut buf = Vec::with_capacity(len);
    rec(0, m, &mut buf, len, visit);
}

/// Entry (i, i+r) of the product of `increments`, summed over index chains a ∈ MFI(r)
/// and strictly increasing step choices b_1 < … < b_|a|-1:
/// Σ_a Σ_b Π_t f^(b_t+1)_{i+a_(t-1), i+a_t} · p^(y^(b_t)_{i+a_(t-1)} − y^(b_t)_{i+a_t}).
pub fn product_expansion(increments: &[SemiDirectElement], i: usize, r: usize) -> Result<PLocalNumber, GroupError> {
    let first = increments
        .first()
        .ok_or_else(|| GroupError::IndexOutOfRange("empty increment sequence".into()))?;
    let n = first.n();
    let p = first.prime();
    if i + r >= n {
        return Err(GroupError::IndexOutOfRange(format!(
            "entry ({}, {}) in dimension {n}",
            i + 1,
            i + r + 1
        )));
    }
    if increments.iter().any(|g| g.n() != n || g.prime() != p) {
        return Err(GroupError::DimensionMismatch(n, n));
    }
    let m = increments.len();
    // partial sums y^(b) of the diagonal exponents
    let mut ys = vec![vec![0i64; n]];
    for g in increments {
        let last = ys.last().unwrap();
        ys.push(last.iter().zip(g.x()).map(|(a, b)| a + b).collect());
    }
    let primes = PrimeSet::single(p)?;
    if r == 0 {
        return Ok(PLocalNumber::new(BigRational::one(), primes)?);
    }
    let mut total = BigRational::zero();
    for a in enumerate_mfi(r) {
        let hops = a.len() - 1;
        for_each_increasing(hops, m, &mut |bs: &[usize]| {
            let mut term = BigRational::one();
            let mut shift = 0i64;
            for (t, &b) in bs.iter().enumerate() {
                let (u, v) = (i + a[t], i + a[t + 1]);
                let f = increments[b].f().get(u, v);
                if f.is_zero() {
                    return;
                }
                term *= f;
                shift += ys[b][u] - ys[b][v];
            }
            total += term * pow_q(p, shift);
        });
    }
    Ok(PLocalNumber::new(total, primes)?)
}
