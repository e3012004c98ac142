//! Exact dyadic rationals `mant * 2^exp` with directed rounding.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Round {
    Nearest,
    /// Toward +infinity.
    Up,
    /// Toward -infinity.
    Down,
}

/// A dyadic rational. Kept normalized: the mantissa is odd, or zero with `exp == 0`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Dyadic {
    mant: BigInt,
    exp: i64,
}

impl Dyadic {
    pub fn new(mant: BigInt, exp: i64) -> Self {
        if mant.is_zero() {
            return Dyadic::zero();
        }
        let tz = mant.trailing_zeros().unwrap_or(0);
        if tz > 0 {
            Dyadic {
                mant: mant >> tz,
                exp: exp + tz as i64,
            }
        } else {
            Dyadic { mant, exp }
        }
    }

    pub fn zero() -> Self {
        Dyadic {
            mant: BigInt::zero(),
            exp: 0,
        }
    }

    pub fn one() -> Self {
        Dyadic::from_int(1)
    }

    pub fn from_int(v: i64) -> Self {
        Dyadic::new(BigInt::from(v), 0)
    }

    pub fn from_bigint(v: BigInt) -> Self {
        Dyadic::new(v, 0)
    }

    /// `2^e`
    pub fn pow2(e: i64) -> Self {
        Dyadic {
            mant: BigInt::one(),
            exp: e,
        }
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mant
    }

    pub fn exponent(&self) -> i64 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mant.is_negative()
    }

    pub fn abs(&self) -> Self {
        Dyadic {
            mant: self.mant.abs(),
            exp: self.exp,
        }
    }

    pub fn neg(&self) -> Self {
        Dyadic {
            mant: -&self.mant,
            exp: self.exp,
        }
    }

    /// Multiply by `2^k`.
    pub fn shl(&self, k: i64) -> Self {
        if self.is_zero() {
            return Dyadic::zero();
        }
        Dyadic {
            mant: self.mant.clone(),
            exp: self.exp + k,
        }
    }

    /// Bit length of the mantissa magnitude.
    pub fn bits(&self) -> u64 {
        self.mant.bits()
    }

    /// Position of the leading bit: `2^(msb-1) <= |x| < 2^msb`.
    pub fn msb(&self) -> i64 {
        self.exp + self.mant.bits() as i64
    }

    pub fn add(&self, other: &Dyadic) -> Dyadic {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let e = self.exp.min(other.exp);
        let a = &self.mant << (self.exp - e) as usize;
        let b = &other.mant << (other.exp - e) as usize;
        Dyadic::new(a + b, e)
    }

    pub fn sub(&self, other: &Dyadic) -> Dyadic {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Dyadic) -> Dyadic {
        if self.is_zero() || other.is_zero() {
            return Dyadic::zero();
        }
        Dyadic::new(&self.mant * &other.mant, self.exp + other.exp)
    }

    pub fn mul_int(&self, k: &BigInt) -> Dyadic {
        Dyadic::new(&self.mant * k, self.exp)
    }

    pub fn to_rational(&self) -> BigRational {
        if self.exp >= 0 {
            BigRational::from_integer(&self.mant << self.exp as usize)
        } else {
            BigRational::new(self.mant.clone(), BigInt::one() << (-self.exp) as usize)
        }
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        // keep 64 leading bits so the conversion cannot overflow the mantissa
        let bits = self.mant.bits() as i64;
        let shift = (bits - 64).max(0);
        let m = (&self.mant >> shift as usize).to_f64().unwrap_or(f64::NAN);
        m * 2f64.powi((self.exp + shift).clamp(-2000, 2000) as i32)
    }

    /// Largest integer `<= self`.
    pub fn floor(&self) -> BigInt {
        if self.exp >= 0 {
            &self.mant << self.exp as usize
        } else {
            self.mant
                .div_floor(&(BigInt::one() << (-self.exp) as usize))
        }
    }

    /// Nearest integer, ties toward +infinity.
    pub fn round_int(&self) -> BigInt {
        self.add(&Dyadic::pow2(-1)).floor()
    }

    /// Round to at most `prec` mantissa bits. Returns the rounded value;
    /// the exact error is `self - rounded`.
    pub fn round(&self, prec: u32, mode: Round) -> Dyadic {
        self.round_inexact(prec, mode).0
    }

    /// [`Dyadic::round`], also returning the exponent of the last kept bit when
    /// the result differs from `self`. The error is then below `2^ulp`.
    pub fn round_inexact(&self, prec: u32, mode: Round) -> (Dyadic, Option<i64>) {
        let bits = self.mant.bits();
        if bits <= prec as u64 {
            return (self.clone(), None);
        }
        let shift = bits - prec as u64;
        let (sign, mag) = (self.mant.sign(), self.mant.magnitude());
        let tz = mag.trailing_zeros().unwrap_or(0);
        if tz >= shift {
            return (
                Dyadic::new(&self.mant >> shift as usize, self.exp + shift as i64),
                None,
            );
        }
        let floor_mag = mag >> shift as usize;
        let negative = sign == Sign::Minus;
        let bump = match mode {
            Round::Down => negative,
            Round::Up => !negative,
            Round::Nearest => {
                let half = mag.bit(shift - 1);
                // exact ties go toward +infinity
                half && (tz < shift - 1 || !negative)
            }
        };
        let mag = if bump { floor_mag + 1u32 } else { floor_mag };
        let mant = BigInt::from_biguint(if mag.is_zero() { Sign::NoSign } else { sign }, mag);
        let ulp = self.exp + shift as i64;
        (Dyadic::new(mant, ulp), Some(ulp))
    }

    /// Round a rational to a dyadic with about `prec` significant bits.
    pub fn from_rational(q: &BigRational, prec: u32, mode: Round) -> Dyadic {
        if q.is_zero() {
            return Dyadic::zero();
        }
        let num = q.numer();
        let den = q.denom();
        let e = num.bits() as i64 - den.bits() as i64 - prec as i64;
        let (n, d) = if e < 0 {
            (num << (-e) as usize, den.clone())
        } else {
            (num.clone(), den << e as usize)
        };
        let (fl, r) = n.div_mod_floor(&d);
        let m = match mode {
            Round::Down => fl,
            Round::Up => {
                if r.is_zero() {
                    fl
                } else {
                    fl + 1
                }
            }
            Round::Nearest => {
                let twice: BigInt = r << 1usize;
                if twice >= d {
                    fl + 1
                } else {
                    fl
                }
            }
        };
        Dyadic::new(m, e)
    }

    pub fn min(a: &Dyadic, b: &Dyadic) -> Dyadic {
        if a <= b {
            a.clone()
        } else {
            b.clone()
        }
    }

    pub fn max(a: &Dyadic, b: &Dyadic) -> Dyadic {
        if a >= b {
            a.clone()
        } else {
            b.clone()
        }
    }

    /// Hex form `[-]0x<mant>p<exp>`, e.g. `0x3p-2` for 0.75.
    pub fn to_hex(&self) -> String {
        let sign = if self.mant.is_negative() { "-" } else { "" };
        format!("{}0x{:x}p{}", sign, self.mant.abs(), self.exp)
    }

    pub fn parse_hex(s: &str) -> Result<Dyadic> {
        let bad = || Error::Parse(format!("bad dyadic hex literal {s:?}"));
        let (neg, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let body = body.strip_prefix("0x").ok_or_else(bad)?;
        let (m, e) = body.split_once('p').ok_or_else(bad)?;
        let mant = BigInt::parse_bytes(m.as_bytes(), 16).ok_or_else(bad)?;
        let exp: i64 = e.parse().map_err(|_| bad())?;
        let mant = if neg { -mant } else { mant };
        Ok(Dyadic::new(mant, exp))
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let sa = self.mant.sign();
        let sb = other.mant.sign();
        if sa != sb || sa == Sign::NoSign {
            let rank = |s: Sign| match s {
                Sign::Minus => -1,
                Sign::NoSign => 0,
                Sign::Plus => 1,
            };
            return rank(sa).cmp(&rank(sb));
        }
        let (ma, mb) = (self.msb(), other.msb());
        if ma != mb {
            let by_size = ma.cmp(&mb);
            return if sa == Sign::Minus {
                by_size.reverse()
            } else {
                by_size
            };
        }
        let e = self.exp.min(other.exp);
        let a = &self.mant << (self.exp - e) as usize;
        let b = &other.mant << (other.exp - e) as usize;
        a.cmp(&b)
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.to_hex(), self.to_f64())
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_f64())
    }
}
