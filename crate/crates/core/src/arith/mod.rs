//! Exact rationals, elements of Z[1/P], valuations and base-b digit spans.

mod digits;
mod padic;
mod zinvp;

pub use digits::{digit_span, digit_span_primes, DigitSpan};
pub use padic::{trunc_add, trunc_mul, PAdicTrunc};
pub use zinvp::ZInvP;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;

pub use num_rational::BigRational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ArithError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("prime set must be nonempty and strictly increasing")]
    BadPrimeSet,
    #[error("{value} has no finite base-{base} expansion")]
    NonRepresentable { value: String, base: String },
    #[error("base {0} must be a squarefree product of at least one active prime")]
    BadBase(u64),
    #[error("argument is zero")]
    ZeroArgument,
    #[error("prime mismatch: {0} vs {1}")]
    PrimeMismatch(u64, u64),
    #[error("cancellation left no certified digits below p^{certified_to}")]
    PrecisionExhausted { certified_to: i64 },
    #[error("cannot parse rational {0:?}")]
    Parse(String),
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n % 2 == 0 {
        return false;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// A finite set of primes together with their product.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PrimeSet {
    primes: Vec<u64>,
    product: BigInt,
}

impl PrimeSet {
    pub fn new(mut primes: Vec<u64>) -> Result<Self, ArithError> {
        if primes.is_empty() {
            return Err(ArithError::BadPrimeSet);
        }
        let given = primes.clone();
        primes.sort_unstable();
        primes.dedup();
        if primes != given {
            return Err(ArithError::BadPrimeSet);
        }
        if let Some(&q) = primes.iter().find(|&&q| !is_prime(q)) {
            return Err(ArithError::NotPrime(q));
        }
        let product = primes.iter().fold(BigInt::one(), |acc, &q| acc * q);
        Ok(PrimeSet { primes, product })
    }

    pub fn single(p: u64) -> Result<Self, ArithError> {
        Self::new(vec![p])
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    pub fn product(&self) -> &BigInt {
        &self.product
    }

    pub fn product_u64(&self) -> u64 {
        self.product.to_u64().expect("prime product exceeds u64")
    }

    pub fn contains(&self, p: u64) -> bool {
        self.primes.binary_search(&p).is_ok()
    }

    /// ln of the product of the primes.
    pub fn ln_product(&self) -> f64 {
        self.primes.iter().map(|&p| (p as f64).ln()).sum()
    }

    /// True when every prime factor of `x`'s denominator lies in the set.
    pub fn admits(&self, x: &BigRational) -> bool {
        let mut d = x.denom().clone();
        for &p in &self.primes {
            strip_factor(&mut d, p);
        }
        d.is_one()
    }
}

impl fmt::Display for PrimeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.primes.iter().map(|p| p.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// An element of Z[1/P].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PLocalNumber {
    value: BigRational,
    primes: PrimeSet,
}

impl PLocalNumber {
    pub fn new(value: BigRational, primes: PrimeSet) -> Result<Self, ArithError> {
        if !primes.admits(&value) {
            return Err(ArithError::NonRepresentable {
                value: value.to_string(),
                base: primes.product().to_string(),
            });
        }
        Ok(PLocalNumber { value, primes })
    }

    pub fn value(&self) -> &BigRational {
        &self.value
    }

    pub fn prime_set(&self) -> &PrimeSet {
        &self.primes
    }

    pub fn into_value(self) -> BigRational {
        self.value
    }
}

impl fmt::Display for PLocalNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// Removes every factor `p` from `n` and returns how many were removed.
pub(crate) fn strip_factor(n: &mut BigInt, p: u64) -> u64 {
    if n.is_zero() {
        return 0;
    }
    if p == 2 {
        let tz = n.trailing_zeros().unwrap_or(0);
        *n >>= tz;
        return tz;
    }
    let mut count = 0;
    // square the divisor while it keeps dividing, then walk back down
    let mut powers = vec![BigInt::from(p)];
    loop {
        let top = powers.last().unwrap();
        let (q, r) = n.div_rem(top);
        if !r.is_zero() {
            break;
        }
        *n = q;
        count += 1u64 << (powers.len() - 1);
        let next = top * top;
        powers.push(next);
    }
    while let Some(top) = powers.pop() {
        loop {
            let (q, r) = n.div_rem(&top);
            if !r.is_zero() {
                break;
            }
            *n = q;
            count += 1u64 << powers.len();
        }
    }
    count
}

pub(crate) fn strip_factor_u(n: &mut BigUint, p: u64) -> u64 {
    let mut b = BigInt::from_biguint(Sign::Plus, std::mem::take(n));
    let c = strip_factor(&mut b, p);
    *n = b.into_parts().1;
    c
}

/// v_p(x), or `None` for x = 0.
pub fn padic_valuation(x: &BigRational, p: u64) -> Option<i64> {
    if x.is_zero() {
        return None;
    }
    let mut a = x.numer().clone();
    let mut c = x.denom().clone();
    let up = strip_factor(&mut a, p) as i64;
    let down = strip_factor(&mut c, p) as i64;
    Some(up - down)
}

/// ln⁺|x|_p kept as an integer multiple of ln p.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LnPlus {
    pub exponent: u64,
    pub prime: u64,
}

impl LnPlus {
    pub fn value(&self) -> f64 {
        self.exponent as f64 * (self.prime as f64).ln()
    }
}

pub fn ln_plus_padic_norm(x: &BigRational, p: u64) -> Result<LnPlus, ArithError> {
    let v = padic_valuation(x, p).ok_or(ArithError::ZeroArgument)?;
    Ok(LnPlus {
        exponent: (-v).max(0) as u64,
        prime: p,
    })
}

/// Fractional part of x ∈ Z[1/p] taken from its base-p expansion.
pub fn padic_frac(x: &BigRational, p: u64) -> Result<BigRational, ArithError> {
    let mut d = x.denom().clone();
    strip_factor(&mut d, p);
    if !d.is_one() {
        return Err(ArithError::NonRepresentable {
            value: x.to_string(),
            base: p.to_string(),
        });
    }
    Ok(BigRational::new(x.numer().mod_floor(x.denom()), x.denom().clone()))
}

/// x − padic_frac(x): the integer part of x in its base-p expansion.
pub fn padic_int_part(x: &BigRational, p: u64) -> Result<BigRational, ArithError> {
    Ok(x - padic_frac(x, p)?)
}

pub fn real_floor(x: &BigRational) -> BigInt {
    x.floor().to_integer()
}

/// p^e as an exact rational, e of either sign.
pub fn pow_q(p: u64, e: i64) -> BigRational {
    let m = num_traits::pow(BigInt::from(p), e.unsigned_abs() as usize);
    if e >= 0 {
        BigRational::from_integer(m)
    } else {
        BigRational::new(BigInt::one(), m)
    }
}

pub fn q_int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

fn ldexp(mut x: f64, mut e: i64) -> f64 {
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
    }
    x * 2f64.powi(e as i32)
}

pub fn parse_q(s: &str) -> Result<BigRational, ArithError> {
    let t = s.trim();
    let bad = || ArithError::Parse(s.to_string());
    match t.split_once('/') {
        Some((a, b)) => {
            let a: BigInt = a.trim().parse().map_err(|_| bad())?;
            let b: BigInt = b.trim().parse().map_err(|_| bad())?;
            if b.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(a, b))
        }
        None => Ok(BigRational::from_integer(t.parse().map_err(|_| bad())?)),
    }
}

/// "num/den", or "num" when den = 1.
pub fn fmt_q(x: &BigRational) -> String {
    x.to_string()
}

/// Nearest f64 to a rational, robust to huge numerators and denominators.
pub fn q_to_f64(x: &BigRational) -> f64 {
    if x.is_zero() {
        return 0.0;
    }
    let a = x.numer().abs();
    let c = x.denom();
    let shift = a.bits() as i64 - c.bits() as i64;
    // scale to a 64-bit quotient, then reapply the binary exponent
    let (num, den) = if shift > 64 {
        (a, c << ((shift - 64) as u64))
    } else {
        (a << ((64 - shift) as u64), c.clone())
    };
    let q = (num / den).to_f64().unwrap_or(f64::INFINITY);
    let mag = ldexp(q, shift - 64);
    if x.is_negative() {
        -mag
    } else {
        mag
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> BigRational {
        parse_q(s).unwrap()
    }

    #[test]
    fn prime_set_validation() {
        assert!(PrimeSet::new(vec![2, 3]).is_ok());
        assert_eq!(PrimeSet::new(vec![2, 4]), Err(ArithError::NotPrime(4)));
        assert_eq!(PrimeSet::new(vec![3, 2]), Err(ArithError::BadPrimeSet));
        assert_eq!(PrimeSet::new(vec![]), Err(ArithError::BadPrimeSet));
        assert_eq!(PrimeSet::new(vec![2, 3, 5]).unwrap().product_u64(), 30);
    }

    #[test]
    fn plocal_membership() {
        let p2 = PrimeSet::single(2).unwrap();
        assert!(PLocalNumber::new(q("3/8"), p2.clone()).is_ok());
        assert!(PLocalNumber::new(q("1/3"), p2).is_err());
    }

    #[test]
    fn valuations() {
        assert_eq!(padic_valuation(&q("8"), 2), Some(3));
        assert_eq!(padic_valuation(&q("3/4"), 2), Some(-2));
        assert_eq!(padic_valuation(&q("5"), 2), Some(0));
        assert_eq!(padic_valuation(&q("0"), 2), None);
        assert_eq!(padic_valuation(&q("-243/7"), 3), Some(5));
        let big = num_traits::pow(BigInt::from(3), 1000) * 7;
        assert_eq!(padic_valuation(&BigRational::from_integer(big), 3), Some(1000));
    }

    #[test]
    fn ln_plus_examples() {
        assert_eq!(ln_plus_padic_norm(&q("1/2"), 2).unwrap().exponent, 1);
        assert_eq!(ln_plus_padic_norm(&q("4"), 2).unwrap().exponent, 0);
        assert_eq!(ln_plus_padic_norm(&q("9/8"), 2).unwrap().exponent, 3);
        assert_eq!(ln_plus_padic_norm(&q("0"), 2), Err(ArithError::ZeroArgument));
    }

    #[test]
    fn frac_and_floor() {
        assert_eq!(padic_frac(&q("7/8"), 2).unwrap(), q("7/8"));
        assert_eq!(padic_frac(&q("9/4"), 2).unwrap(), q("1/4"));
        assert_eq!(padic_frac(&q("-1/2"), 2).unwrap(), q("1/2"));
        assert!(padic_frac(&q("1/3"), 2).is_err());
        assert_eq!(real_floor(&q("7/2")), BigInt::from(3));
        assert_eq!(real_floor(&q("-1/2")), BigInt::from(-1));
    }

    #[test]
    fn rational_strings() {
        assert_eq!(fmt_q(&q("6/4")), "3/2");
        assert_eq!(fmt_q(&q("-4/2")), "-2");
        assert!(parse_q("1/0").is_err());
        assert!(parse_q("x").is_err());
    }

    #[test]
    fn float_conversion() {
        assert_eq!(q_to_f64(&q("3/4")), 0.75);
        assert_eq!(q_to_f64(&q("-5")), -5.0);
        let tiny = pow_q(2, -2000);
        assert_eq!(q_to_f64(&tiny), 0.0);
        let near_two = q("2") - pow_q(2, -60);
        assert_eq!(q_to_f64(&near_two), 2.0);
        let x = pow_q(2, -1000) * q("3");
        assert_eq!(q_to_f64(&x), 3.0 * 2f64.powi(-1000));
    }
}
