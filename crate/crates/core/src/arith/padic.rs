use super::{padic_valuation, strip_factor_u, ArithError, BigRational};
use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

/// Valuation marker for the exact zero.
const EXACT_ZERO: i64 = i64::MAX;

/// A p-adic number known modulo p^(valuation + precision).
///
/// Three shapes: a unit part times p^valuation with `precision` certified digits;
/// a zero certificate (`unit_digits = 0`, `precision = 0`) meaning 0 + O(p^valuation);
/// and the exact zero.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PAdicTrunc {
    pub prime: u64,
    pub valuation: i64,
    #[serde(with = "decimal")]
    pub unit_digits: BigUint,
    pub precision: u32,
}

mod decimal {
    use num_bigint::BigUint;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigUint, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(D::Error::custom)
    }
}

impl PAdicTrunc {
    pub const DEFAULT_PRECISION: u32 = 64;

    pub fn exact_zero(prime: u64) -> Self {
        PAdicTrunc {
            prime,
            valuation: EXACT_ZERO,
            unit_digits: BigUint::zero(),
            precision: 0,
        }
    }

    /// 0 + O(p^bound).
    pub fn zero_certificate(prime: u64, bound: i64) -> Self {
        PAdicTrunc {
            prime,
            valuation: bound,
            unit_digits: BigUint::zero(),
            precision: 0,
        }
    }

    /// Reduces a rational with denominator prime to p (after removing p-powers) to `precision` digits.
    pub fn from_rational(x: &BigRational, prime: u64, precision: u32) -> Self {
        let Some(v) = padic_valuation(x, prime) else {
            return Self::exact_zero(prime);
        };
        let modulus = num_traits::pow(BigInt::from(prime), precision as usize);
        let mut a = x.numer().clone();
        let mut c = x.denom().clone();
        super::strip_factor(&mut a, prime);
        super::strip_factor(&mut c, prime);
        let c_inv = mod_inverse(&c, &modulus).expect("unit denominator");
        let u = (a * c_inv).mod_floor(&modulus);
        PAdicTrunc {
            prime,
            valuation: v,
            unit_digits: u.into_parts().1,
            precision,
        }
    }

    pub fn is_exact_zero(&self) -> bool {
        self.valuation == EXACT_ZERO
    }

    pub fn is_zero_certificate(&self) -> bool {
        !self.is_exact_zero() && self.unit_digits.is_zero()
    }

    /// Exponent N such that the value is known modulo p^N; `None` for the exact zero.
    pub fn absolute_precision(&self) -> Option<i64> {
        if self.is_exact_zero() {
            None
        } else {
            Some(self.valuation.saturating_add(self.precision as i64))
        }
    }

    /// Lower bound on the valuation: exact for units, the certificate bound for zero certificates.
    pub fn valuation_lower_bound(&self) -> i64 {
        self.valuation
    }

    /// The representative p^v · unit as an exact rational (zero for certificates).
    pub fn to_rational(&self) -> BigRational {
        if self.unit_digits.is_zero() {
            return BigRational::zero();
        }
        let u = BigRational::from_integer(BigInt::from_biguint(Sign::Plus, self.unit_digits.clone()));
        u * super::pow_q(self.prime, self.valuation)
    }

    pub fn neg(&self) -> Self {
        if self.unit_digits.is_zero() {
            return self.clone();
        }
        let m = self.modulus();
        let u = (&m - &self.unit_digits) % &m;
        PAdicTrunc {
            unit_digits: u,
            ..self.clone()
        }
    }

    fn modulus(&self) -> BigUint {
        num_traits::pow(BigUint::from(self.prime), self.precision as usize)
    }

    /// Multiplies by p^e, which only shifts the valuation.
    pub fn shift(&self, e: i64) -> Self {
        if self.is_exact_zero() {
            return self.clone();
        }
        PAdicTrunc {
            valuation: self.valuation.saturating_add(e),
            ..self.clone()
        }
    }

    /// Sum that never fails: total cancellation yields a zero certificate.
    pub fn add_lossy(&self, other: &Self) -> Self {
        match trunc_add(self, other) {
            Ok(s) => s,
            Err(ArithError::PrecisionExhausted { certified_to }) => Self::zero_certificate(self.prime, certified_to),
            Err(e) => panic!("{e}"),
        }
    }
}

fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let g = a.extended_gcd(m);
    if !g.gcd.is_one() {
        return None;
    }
    Some(g.x.mod_floor(m))
}

/// Sum to the precision both inputs support.
pub fn trunc_add(a: &PAdicTrunc, b: &PAdicTrunc) -> Result<PAdicTrunc, ArithError> {
    if a.prime != b.prime {
        return Err(ArithError::PrimeMismatch(a.prime, b.prime));
    }
    let p = a.prime;
    if a.is_exact_zero() {
        return Ok(b.clone());
    }
    if b.is_exact_zero() {
        return Ok(a.clone());
    }
    let n = a.absolute_precision().unwrap().min(b.absolute_precision().unwrap());
    let cap = match (a.is_zero_certificate(), b.is_zero_certificate()) {
        (true, true) => return Ok(PAdicTrunc::zero_certificate(p, n)),
        (true, false) => b.precision,
        (false, true) => a.precision,
        (false, false) => a.precision.min(b.precision),
    };
    let vmin = a.valuation.min(b.valuation);
    if n <= vmin {
        return Err(ArithError::PrecisionExhausted { certified_to: n });
    }
    let lift = |x: &PAdicTrunc| -> BigUint {
        if x.unit_digits.is_zero() {
            BigUint::zero()
        } else {
            &x.unit_digits * num_traits::pow(BigUint::from(p), (x.valuation - vmin) as usize)
        }
    };
    let window = num_traits::pow(BigUint::from(p), (n - vmin) as usize);
    let mut s = (lift(a) + lift(b)) % &window;
    if s.is_zero() {
        return Err(ArithError::PrecisionExhausted { certified_to: n });
    }
    let extra = strip_factor_u(&mut s, p) as i64;
    let v = vmin + extra;
    let k = ((n - v) as u32).min(cap);
    let modulus = num_traits::pow(BigUint::from(p), k as usize);
    Ok(PAdicTrunc {
        prime: p,
        valuation: v,
        unit_digits: s % modulus,
        precision: k,
    })
}

pub fn trunc_mul(a: &PAdicTrunc, b: &PAdicTrunc) -> Result<PAdicTrunc, ArithError> {
    if a.prime != b.prime {
        return Err(ArithError::PrimeMismatch(a.prime, b.prime));
    }
    let p = a.prime;
    if a.is_exact_zero() || b.is_exact_zero() {
        return Ok(PAdicTrunc::exact_zero(p));
    }
    if a.is_zero_certificate() || b.is_zero_certificate() {
        return Ok(PAdicTrunc::zero_certificate(p, a.valuation.saturating_add(b.valuation)));
    }
    let k = a.precision.min(b.precision);
    let modulus = num_traits::pow(BigUint::from(p), k as usize);
    Ok(PAdicTrunc {
        prime: p,
        valuation: a.valuation + b.valuation,
        unit_digits: (&a.unit_digits * &b.unit_digits) % modulus,
        precision: k,
    })
}
