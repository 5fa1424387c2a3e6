use crate::arith::{padic_valuation, q_to_f64, LnPlus};
use crate::group::TriangularMatrix;
use serde::{Deserialize, Serialize};

/// max_ij |m_ij|_p = p^log_p; `log_p` is None for the zero matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PadicOpNorm {
    pub prime: u64,
    pub log_p: Option<i64>,
}

impl PadicOpNorm {
    pub fn ln_plus(&self) -> LnPlus {
        LnPlus {
            exponent: self.log_p.unwrap_or(0).max(0) as u64,
            prime: self.prime,
        }
    }
}

/// Operator norm of m on (Q_p^n, sup-norm): the largest entry norm.
pub fn opnorm_padic(m: &TriangularMatrix, p: u64) -> PadicOpNorm {
    let log_p = m
        .entries()
        .iter()
        .flatten()
        .filter_map(|x| padic_valuation(x, p))
        .map(|v| -v)
        .max();
    PadicOpNorm { prime: p, log_p }
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
#[error("power iteration did not converge; norm lies in [{lower}, {upper}], last estimate {estimate}")]
pub struct NoConvergence {
    pub lower: f64,
    pub upper: f64,
    pub estimate: f64,
}

pub const POWER_ITERATION_CAP: usize = 10_000;

/// The bracket [max|m_ij|, n·max|m_ij|] that always contains the spectral norm.
pub fn max_norm_bracket(m: &TriangularMatrix) -> (f64, f64) {
    let mx = m
        .entries()
        .iter()
        .flatten()
        .map(|x| q_to_f64(x).abs())
        .fold(0.0, f64::max);
    (mx, m.n() as f64 * mx)
}

/// Largest singular value by power iteration on mᵀm from the all-ones vector.
pub fn opnorm_real(m: &TriangularMatrix, tol: f64) -> Result<f64, NoConvergence> {
    let a: Vec<Vec<f64>> = m.entries().iter().map(|r| r.iter().map(q_to_f64).collect()).collect();
    let n = a.len();
    let (lower, upper) = max_norm_bracket(m);
    if lower == 0.0 {
        return Ok(0.0);
    }
    // scale so the iteration stays in range for huge or tiny entries
    let scale = lower;
    let a: Vec<Vec<f64>> = a.iter().map(|r| r.iter().map(|v| v / scale).collect()).collect();
    let mut v = vec![1.0 / (n as f64).sqrt(); n];
    let mut sigma = 0.0f64;
    for _ in 0..POWER_ITERATION_CAP {
        let av: Vec<f64> = (0..n).map(|i| (0..n).map(|k| a[i][k] * v[k]).sum()).collect();
        let w: Vec<f64> = (0..n).map(|k| (0..n).map(|i| a[i][k] * av[i]).sum()).collect();
        let next = av.iter().map(|x| x * x).sum::<f64>().sqrt();
        let wn = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if wn == 0.0 {
            break;
        }
        v = w.iter().map(|x| x / wn).collect();
        if (next - sigma).abs() <= tol * next {
            return Ok(next * scale);
        }
        sigma = next;
    }
    Err(NoConvergence {
        lower,
        upper,
        estimate: sigma * scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::parse_q;
    use proptest::prelude::*;

    fn tm(rows: &[&[&str]]) -> TriangularMatrix {
        TriangularMatrix::new(
            rows.iter()
                .map(|r| r.iter().map(|s| parse_q(s).unwrap()).collect())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn padic_examples() {
        assert_eq!(opnorm_padic(&TriangularMatrix::identity(3), 2).log_p, Some(0));
        let d = tm(&[&["2", "0"], &["0", "1/2"]]);
        assert_eq!(opnorm_padic(&d, 2).log_p, Some(1));
        assert_eq!(opnorm_padic(&d, 2).ln_plus().exponent, 1);
        let t = tm(&[&["1", "1/4"], &["0", "1"]]);
        assert_eq!(opnorm_padic(&t, 2).log_p, Some(2));
        assert_eq!(opnorm_padic(&tm(&[&["4", "0"], &["0", "8"]]), 2).ln_plus().exponent, 0);
    }

    #[test]
    fn real_examples() {
        let tol = 1e-12;
        assert!((opnorm_real(&TriangularMatrix::identity(3), tol).unwrap() - 1.0).abs() < 1e-9);
        assert!((opnorm_real(&tm(&[&["2", "0"], &["0", "1"]]), tol).unwrap() - 2.0).abs() < 1e-9);
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((opnorm_real(&tm(&[&["1", "1"], &["0", "1"]]), tol).unwrap() - golden).abs() < 1e-9);
    }

    proptest! {
        #[test]
        fn inside_bracket(v in prop::collection::vec(-50i64..50, 6), d in prop::collection::vec(1i64..20, 3)) {
            let q = |x: i64| crate::arith::q_int(x);
            let m = TriangularMatrix::new(vec![
                vec![q(d[0]), q(v[0]), q(v[1])],
                vec![q(0), q(d[1]), q(v[2])],
                vec![q(0), q(0), q(d[2])],
            ]).unwrap();
            let (lo, hi) = max_norm_bracket(&m);
            if let Ok(s) = opnorm_real(&m, 1e-12) {
                prop_assert!(s >= lo * (1.0 - 1e-9) && s <= hi * (1.0 + 1e-9));
            }
        }
    }
}
