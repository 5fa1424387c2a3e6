use super::{is_prime, padic_valuation, ArithError, BigRational, PLocalNumber};
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

/// Lowest and highest nonzero base-b digit indices of |x| and ⟨x⟩_b.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DigitSpan {
    pub d_minus: i64,
    pub d_plus: i64,
    pub span: u64,
}

impl DigitSpan {
    pub const ZERO: DigitSpan = DigitSpan {
        d_minus: 0,
        d_plus: 0,
        span: 0,
    };
}

/// Digit span of `x` in base `b`. `b` must be squarefree with all prime factors in x's prime set.
pub fn digit_span(x: &PLocalNumber, b: u64) -> Result<DigitSpan, ArithError> {
    let factors = squarefree_factors(b).ok_or(ArithError::BadBase(b))?;
    if factors.iter().any(|&q| !x.prime_set().contains(q)) {
        return Err(ArithError::BadBase(b));
    }
    digit_span_primes(x.value(), &factors)
}

/// Digit span of `x` in the base given by the product of `primes` (distinct primes).
pub fn digit_span_primes(x: &BigRational, primes: &[u64]) -> Result<DigitSpan, ArithError> {
    if x.is_zero() {
        return Ok(DigitSpan::ZERO);
    }
    let b: u64 = primes.iter().product();
    let mut den = x.denom().clone();
    for &p in primes {
        super::strip_factor(&mut den, p);
    }
    if den != BigInt::from(1) {
        return Err(ArithError::NonRepresentable {
            value: x.to_string(),
            base: b.to_string(),
        });
    }
    let d_minus = primes
        .iter()
        .map(|&p| padic_valuation(x, p).expect("nonzero"))
        .min()
        .expect("nonempty prime list");
    let d_plus = highest_index(x, b);
    let span = 1 + d_minus.unsigned_abs().max(d_plus.unsigned_abs());
    Ok(DigitSpan { d_minus, d_plus, span })
}

/// The unique k with b^k ≤ |x| < b^(k+1), by exact comparison.
fn highest_index(x: &BigRational, b: u64) -> i64 {
    let a = x.numer().abs();
    let c = x.denom();
    let log2b = (b as f64).log2();
    let mut k = ((a.bits() as f64 - c.bits() as f64) / log2b).floor() as i64;
    let bb = BigInt::from(b);
    let at_least = |k: i64| -> bool {
        let pk = num_traits::pow(bb.clone(), k.unsigned_abs() as usize);
        if k >= 0 {
            a >= c * pk
        } else {
            &a * pk >= *c
        }
    };
    while !at_least(k) {
        k -= 1;
    }
    while at_least(k + 1) {
        k += 1;
    }
    k
}

fn squarefree_factors(b: u64) -> Option<Vec<u64>> {
    if b < 2 {
        return None;
    }
    let mut out = Vec::new();
    let mut rest = b;
    let mut d = 2u64;
    while d * d <= rest {
        if rest % d == 0 {
            rest /= d;
            if rest % d == 0 {
                return None;
            }
            out.push(d);
        }
        d += 1;
    }
    if rest > 1 {
        out.push(rest);
    }
    debug_assert!(out.iter().all(|&q| is_prime(q)));
    Some(out)
}
