use super::{strip_factor, BigRational};
use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

/// mantissa · p^exponent with p ∤ mantissa, the prime carried by the caller.
///
/// Avoids gcd normalisation, so sums of long dyadic or p-adic expansions stay cheap.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ZInvP {
    mantissa: BigInt,
    exponent: i64,
}

impl ZInvP {
    pub fn zero() -> Self {
        ZInvP {
            mantissa: BigInt::zero(),
            exponent: 0,
        }
    }

    pub fn one() -> Self {
        ZInvP {
            mantissa: BigInt::one(),
            exponent: 0,
        }
    }

    pub fn from_parts(mantissa: BigInt, exponent: i64, p: u64) -> Self {
        let mut z = ZInvP { mantissa, exponent };
        z.normalize(p);
        z
    }

    /// Fails when the denominator has a prime factor other than p.
    pub fn from_rational(x: &BigRational, p: u64) -> Option<Self> {
        if x.is_zero() {
            return Some(Self::zero());
        }
        let mut den = x.denom().clone();
        let down = strip_factor(&mut den, p) as i64;
        if !den.is_one() {
            return None;
        }
        Some(Self::from_parts(x.numer().clone(), -down, p))
    }

    pub fn to_rational(&self, p: u64) -> BigRational {
        BigRational::from_integer(self.mantissa.clone()) * super::pow_q(p, self.exponent)
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mantissa
    }

    /// v_p of the value; meaningless for zero.
    pub fn exponent(&self) -> i64 {
        self.exponent
    }

    fn normalize(&mut self, p: u64) {
        if self.mantissa.is_zero() {
            self.exponent = 0;
            return;
        }
        let k = strip_factor(&mut self.mantissa, p);
        self.exponent += k as i64;
    }

    pub fn neg(&self) -> Self {
        ZInvP {
            mantissa: -&self.mantissa,
            exponent: self.exponent,
        }
    }

    pub fn add(&self, other: &Self, p: u64) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let (lo, hi) = if self.exponent <= other.exponent {
            (self, other)
        } else {
            (other, self)
        };
        let gap = (hi.exponent - lo.exponent) as u64;
        let lifted = scale_up(&hi.mantissa, p, gap);
        let mut z = ZInvP {
            mantissa: &lo.mantissa + lifted,
            exponent: lo.exponent,
        };
        // only an exact tie in exponents can create new factors of p
        if gap == 0 {
            z.normalize(p);
        }
        z
    }

    pub fn sub(&self, other: &Self, p: u64) -> Self {
        self.add(&other.neg(), p)
    }

    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        ZInvP {
            mantissa: &self.mantissa * &other.mantissa,
            exponent: self.exponent + other.exponent,
        }
    }

    /// Multiplies by p^e.
    pub fn shift(&self, e: i64) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        ZInvP {
            mantissa: self.mantissa.clone(),
            exponent: self.exponent + e,
        }
    }

    pub fn is_negative(&self) -> bool {
        self.mantissa.is_negative()
    }
}

fn scale_up(m: &BigInt, p: u64, k: u64) -> BigInt {
    if k == 0 {
        return m.clone();
    }
    if p == 2 {
        m << k
    } else {
        m * num_traits::pow(BigInt::from(p), k as usize)
    }
}
