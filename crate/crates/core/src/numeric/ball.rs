//! Rigorous real balls: a dyadic midpoint, a dyadic radius and a working precision.
//!
//! Every operation returns a ball containing the exact result for every choice of
//! inputs inside the operand balls. Midpoints are rounded to `prec` bits, radii to
//! a short mantissa rounded upward.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::dyadic::{Dyadic, Round};
use crate::error::{Error, Result};

pub const DEFAULT_PRECISION: u32 = 128;

/// Mantissa bits kept for radii.
const RAD_BITS: u32 = 30;
/// Extra bits used internally by transcendental functions.
const GUARD_BITS: u32 = 32;

#[derive(Clone, PartialEq, Eq)]
pub struct RealBall {
    mid: Dyadic,
    rad: Dyadic,
    prec: u32,
}

impl RealBall {
    fn finish(mid: Dyadic, rad: Dyadic, prec: u32) -> RealBall {
        let (rounded, ulp) = mid.round_inexact(prec, Round::Nearest);
        let rad = match ulp {
            Some(e) => rad.add(&Dyadic::pow2(e - 1)),
            None => rad,
        };
        let rad = rad.round(RAD_BITS, Round::Up);
        RealBall {
            mid: rounded,
            rad,
            prec,
        }
    }

    pub fn new(mid: Dyadic, rad: Dyadic, prec: u32) -> Result<RealBall> {
        if rad.is_negative() {
            return Err(Error::InvalidInput("negative ball radius".into()));
        }
        Ok(RealBall::finish(mid, rad, prec))
    }

    pub fn exact(mid: Dyadic, prec: u32) -> RealBall {
        RealBall::finish(mid, Dyadic::zero(), prec)
    }

    pub fn zero(prec: u32) -> RealBall {
        RealBall::exact(Dyadic::zero(), prec)
    }

    pub fn one(prec: u32) -> RealBall {
        RealBall::exact(Dyadic::one(), prec)
    }

    pub fn from_int(v: i64, prec: u32) -> RealBall {
        RealBall::exact(Dyadic::from_int(v), prec)
    }

    pub fn from_bigint(v: &BigInt, prec: u32) -> RealBall {
        RealBall::exact(Dyadic::from_bigint(v.clone()), prec)
    }

    pub fn from_rational(q: &BigRational, prec: u32) -> RealBall {
        let mid = Dyadic::from_rational(q, prec, Round::Nearest);
        let err = (q - mid.to_rational()).abs();
        let rad = Dyadic::from_rational(&err, RAD_BITS, Round::Up);
        RealBall { mid, rad, prec }
    }

    /// Smallest ball (up to rounding) containing `[lo, hi]`.
    pub fn from_interval(lo: &Dyadic, hi: &Dyadic, prec: u32) -> RealBall {
        let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        let mid = lo.add(hi).shl(-1);
        let rad = hi.sub(lo).shl(-1);
        RealBall::finish(mid, rad, prec)
    }

    pub fn mid(&self) -> &Dyadic {
        &self.mid
    }

    pub fn rad(&self) -> &Dyadic {
        &self.rad
    }

    pub fn prec(&self) -> u32 {
        self.prec
    }

    pub fn with_prec(&self, prec: u32) -> RealBall {
        RealBall::finish(self.mid.clone(), self.rad.clone(), prec)
    }

    pub fn lower(&self) -> Dyadic {
        self.mid.sub(&self.rad)
    }

    pub fn upper(&self) -> Dyadic {
        self.mid.add(&self.rad)
    }

    pub fn to_f64(&self) -> f64 {
        self.mid.to_f64()
    }

    pub fn rad_f64(&self) -> f64 {
        self.rad.to_f64()
    }

    pub fn is_exact(&self) -> bool {
        self.rad.is_zero()
    }

    pub fn contains_zero(&self) -> bool {
        let z = Dyadic::zero();
        self.lower() <= z && self.upper() >= z
    }

    pub fn contains(&self, x: &Dyadic) -> bool {
        &self.lower() <= x && x <= &self.upper()
    }

    pub fn contains_rational(&self, q: &BigRational) -> bool {
        let lo = self.lower().to_rational();
        let hi = self.upper().to_rational();
        &lo <= q && q <= &hi
    }

    pub fn contains_ball(&self, other: &RealBall) -> bool {
        self.lower() <= other.lower() && other.upper() <= self.upper()
    }

    pub fn overlaps(&self, other: &RealBall) -> bool {
        self.lower() <= other.upper() && other.lower() <= self.upper()
    }

    /// Every point of `self` is `>=` every point of `other`.
    pub fn certainly_ge(&self, other: &RealBall) -> bool {
        self.lower() >= other.upper()
    }

    pub fn certainly_gt(&self, other: &RealBall) -> bool {
        self.lower() > other.upper()
    }

    pub fn certainly_nonneg(&self) -> bool {
        !self.lower().is_negative()
    }

    pub fn certainly_negative(&self) -> bool {
        self.upper().is_negative()
    }

    /// Upper bound of `|x|` over the ball.
    pub fn abs_upper(&self) -> Dyadic {
        Dyadic::max(&self.lower().abs(), &self.upper().abs())
    }

    pub fn neg(&self) -> RealBall {
        RealBall {
            mid: self.mid.neg(),
            rad: self.rad.clone(),
            prec: self.prec,
        }
    }

    pub fn abs(&self) -> RealBall {
        let lo = self.lower();
        let hi = self.upper();
        if !lo.is_negative() {
            self.clone()
        } else if !hi.is_zero() && !hi.is_negative() {
            RealBall::from_interval(&Dyadic::zero(), &Dyadic::max(&lo.abs(), &hi), self.prec)
        } else {
            self.neg()
        }
    }

    pub fn add_ball(&self, other: &RealBall) -> RealBall {
        RealBall::finish(
            self.mid.add(&other.mid),
            self.rad.add(&other.rad),
            self.prec.max(other.prec),
        )
    }

    pub fn sub_ball(&self, other: &RealBall) -> RealBall {
        RealBall::finish(
            self.mid.sub(&other.mid),
            self.rad.add(&other.rad),
            self.prec.max(other.prec),
        )
    }

    pub fn mul_ball(&self, other: &RealBall) -> RealBall {
        let mid = self.mid.mul(&other.mid);
        let a = self.mid.abs().round(RAD_BITS, Round::Up);
        let b = other.mid.abs().round(RAD_BITS, Round::Up);
        let rad = a
            .mul(&other.rad)
            .add(&b.mul(&self.rad))
            .add(&self.rad.mul(&other.rad));
        RealBall::finish(mid, rad, self.prec.max(other.prec))
    }

    pub fn sqr(&self) -> RealBall {
        let b = self.mul_ball(self);
        // x^2 >= 0: clip the lower end
        if b.lower().is_negative() {
            RealBall::from_interval(&Dyadic::zero(), &b.upper(), b.prec)
        } else {
            b
        }
    }

    pub fn mul_int(&self, k: &BigInt) -> RealBall {
        RealBall::finish(self.mid.mul_int(k), self.rad.mul_int(&k.abs()), self.prec)
    }

    pub fn mul_rational(&self, q: &BigRational) -> RealBall {
        self.mul_ball(&RealBall::from_rational(q, self.prec))
    }

    /// Division by a positive machine integer.
    pub fn div_u64(&self, n: u64) -> RealBall {
        assert!(n > 0, "division by zero");
        if n == 1 {
            return self.clone();
        }
        let nb = BigInt::from(n);
        let (mid, err) = if self.mid.is_zero() {
            (Dyadic::zero(), Dyadic::zero())
        } else {
            let s = (self.prec as i64 + 64 - self.mid.bits() as i64).max(0);
            let q = (self.mid.mantissa() << s as usize).div_floor(&nb);
            let e = self.mid.exponent() - s;
            (Dyadic::new(q, e), Dyadic::pow2(e))
        };
        let rad = if self.rad.is_zero() {
            Dyadic::zero()
        } else {
            let q = (self.rad.mantissa() << 40usize).div_ceil(&nb);
            Dyadic::new(q, self.rad.exponent() - 40)
        };
        RealBall::finish(mid, rad.add(&err), self.prec)
    }

    pub fn div_ball(&self, other: &RealBall) -> Result<RealBall> {
        if other.contains_zero() {
            return Err(Error::DivisionByZero);
        }
        let prec = self.prec.max(other.prec);
        let a = self.mid.to_rational();
        let b = other.mid.to_rational();
        let q = &a / &b;
        let mid = Dyadic::from_rational(&q, prec, Round::Nearest);
        let err = (&q - mid.to_rational()).abs();
        let bm = b.abs();
        let ar = self.rad.to_rational();
        let br = other.rad.to_rational();
        let prop = (&ar * &bm + a.abs() * &br) / (&bm * (&bm - &br));
        let rad = Dyadic::from_rational(&(err + prop), RAD_BITS, Round::Up);
        Ok(RealBall { mid, rad, prec })
    }

    pub fn recip(&self) -> Result<RealBall> {
        RealBall::one(self.prec).div_ball(self)
    }

    pub fn pow(&self, e: u32) -> RealBall {
        let mut acc = RealBall::one(self.prec);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_ball(&base);
            }
            base = base.sqr();
            e >>= 1;
        }
        acc
    }

    pub fn sqrt(&self) -> Result<RealBall> {
        let hi = self.upper();
        if hi.is_negative() {
            return Err(Error::InvalidInput("square root of a negative ball".into()));
        }
        let lo = Dyadic::max(&self.lower(), &Dyadic::zero());
        let down = sqrt_dyadic(&lo, self.prec + 8, Round::Down);
        let up = sqrt_dyadic(&hi, self.prec + 8, Round::Up);
        Ok(RealBall::from_interval(&down, &up, self.prec))
    }

    /// Interval hull of two balls.
    pub fn hull(&self, other: &RealBall) -> RealBall {
        RealBall::from_interval(
            &Dyadic::min(&self.lower(), &other.lower()),
            &Dyadic::max(&self.upper(), &other.upper()),
            self.prec.max(other.prec),
        )
    }

    /// Enclosure of `max(x, y)` over the two balls.
    pub fn max_ball(&self, other: &RealBall) -> RealBall {
        if self.certainly_ge(other) {
            return self.clone();
        }
        if other.certainly_ge(self) {
            return other.clone();
        }
        RealBall::from_interval(
            &Dyadic::max(&self.lower(), &other.lower()),
            &Dyadic::max(&self.upper(), &other.upper()),
            self.prec.max(other.prec),
        )
    }

    pub fn min_ball(&self, other: &RealBall) -> RealBall {
        self.neg().max_ball(&other.neg()).neg()
    }

    /// Intersect with `[lo, hi]`; the input must meet the interval.
    pub fn clamp(&self, lo: &Dyadic, hi: &Dyadic) -> RealBall {
        let a = Dyadic::max(&self.lower(), lo);
        let b = Dyadic::min(&self.upper(), hi);
        if a > b || (self.lower() >= *lo && self.upper() <= *hi) {
            return self.clone();
        }
        RealBall::from_interval(&a, &b, self.prec)
    }

    /// pi, cached per precision.
    pub fn pi(prec: u32) -> RealBall {
        static CACHE: OnceLock<Mutex<Vec<RealBall>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(Vec::new()));
        {
            let guard = cache.lock().expect("pi cache poisoned");
            if let Some(b) = guard.iter().find(|b| b.prec >= prec) {
                return b.with_prec(prec);
            }
        }
        let bucket = prec.div_ceil(64) * 64;
        let b = compute_pi(bucket);
        let mut guard = cache.lock().expect("pi cache poisoned");
        guard.push(b.clone());
        b.with_prec(prec)
    }

    /// Enclosure of `sin(pi * x)`.
    pub fn sin_pi(&self) -> RealBall {
        self.trig_pi(false)
    }

    /// Enclosure of `cos(pi * x)`.
    pub fn cos_pi(&self) -> RealBall {
        self.trig_pi(true)
    }

    fn trig_pi(&self, cosine: bool) -> RealBall {
        let prec = self.prec;
        if self.rad >= Dyadic::one() {
            return RealBall::from_interval(&Dyadic::from_int(-1), &Dyadic::one(), prec);
        }
        let wp = prec + GUARD_BITS;
        let n = self.mid.round_int();
        let z = self.mid.sub(&Dyadic::from_bigint(n.clone()));
        let v = if cosine {
            cos_pi_reduced(&z, wp)
        } else {
            sin_pi_reduced(&z, wp)
        };
        let v = if n.is_odd() { v.neg() } else { v };
        // d/dx sin(pi x) is bounded by pi < 4
        let rad = v.rad.add(&self.rad.shl(2));
        let out = RealBall::finish(v.mid, rad, prec);
        out.clamp(&Dyadic::from_int(-1), &Dyadic::one())
    }

    /// `(mid_hex, rad_hex, prec)`.
    pub fn to_parts(&self) -> (String, String, u32) {
        (self.mid.to_hex(), self.rad.to_hex(), self.prec)
    }

    pub fn from_parts(mid_hex: &str, rad_hex: &str, prec: u32) -> Result<RealBall> {
        let mid = Dyadic::parse_hex(mid_hex)?;
        let rad = Dyadic::parse_hex(rad_hex)?;
        if rad.is_negative() {
            return Err(Error::Parse("negative radius".into()));
        }
        // stored exactly, no re-rounding
        Ok(RealBall { mid, rad, prec })
    }
}

fn sqrt_dyadic(x: &Dyadic, prec: u32, mode: Round) -> Dyadic {
    if x.is_zero() {
        return Dyadic::zero();
    }
    // choose w so that x * 4^w is an integer with about 2*prec bits
    let e = x.exponent();
    let mut w = prec as i64 - x.msb() / 2 + 2;
    if e + 2 * w < 0 {
        w = (-e + 1) / 2 + 1;
    }
    let t: BigInt = x.mantissa() << (e + 2 * w) as usize;
    let s = t.sqrt();
    let s = if mode == Round::Up && &s * &s != t {
        s + 1
    } else {
        s
    };
    Dyadic::new(s, -w)
}

/// Machin's formula in fixed point at `prec + 32` bits.
fn compute_pi(prec: u32) -> RealBall {
    let w = prec as usize + 32;
    let (a, ea) = arctan_inv_fixed(5, w);
    let (b, eb) = arctan_inv_fixed(239, w);
    let mid = BigInt::from(16) * a - BigInt::from(4) * b;
    let ulps = 16 * ea + 4 * eb;
    let mid = Dyadic::new(mid, -(w as i64));
    let rad = Dyadic::new(BigInt::from(ulps), -(w as i64));
    RealBall::finish(mid, rad, prec)
}

/// `floor`-based fixed point `arctan(1/x) * 2^w` and its error in ulps.
fn arctan_inv_fixed(x: u64, w: usize) -> (BigInt, u64) {
    let x2 = BigInt::from(x * x);
    let mut power = (BigInt::one() << w) / BigInt::from(x);
    let mut sum = BigInt::zero();
    let mut k: u64 = 0;
    while !power.is_zero() {
        let term = &power / BigInt::from(2 * k + 1);
        if k.is_multiple_of(2) {
            sum += term;
        } else {
            sum -= term;
        }
        power /= &x2;
        k += 1;
    }
    // each term is off by less than 2 ulps, the dropped tail by less than 1
    (sum, 2 * k + 2)
}

fn sin_pi_reduced(z: &Dyadic, wp: u32) -> RealBall {
    if z.is_zero() {
        return RealBall::zero(wp);
    }
    let az = z.abs();
    let quarter = Dyadic::pow2(-2);
    let v = if az <= quarter {
        taylor_sin(&RealBall::pi(wp).mul_ball(&RealBall::exact(az, wp)))
    } else {
        let w = Dyadic::pow2(-1).sub(&az);
        if w.is_zero() {
            RealBall::one(wp)
        } else {
            taylor_cos(&RealBall::pi(wp).mul_ball(&RealBall::exact(w, wp)))
        }
    };
    if z.is_negative() {
        v.neg()
    } else {
        v
    }
}

fn cos_pi_reduced(z: &Dyadic, wp: u32) -> RealBall {
    if z.is_zero() {
        return RealBall::one(wp);
    }
    let az = z.abs();
    let quarter = Dyadic::pow2(-2);
    if az <= quarter {
        taylor_cos(&RealBall::pi(wp).mul_ball(&RealBall::exact(az, wp)))
    } else {
        let w = Dyadic::pow2(-1).sub(&az);
        if w.is_zero() {
            RealBall::zero(wp)
        } else {
            taylor_sin(&RealBall::pi(wp).mul_ball(&RealBall::exact(w, wp)))
        }
    }
}

/// Taylor series of `sin` for `|y| <= 1`.
fn taylor_sin(y: &RealBall) -> RealBall {
    taylor_fixed(y, true)
}

/// Taylor series of `cos` for `|y| <= 1`.
fn taylor_cos(y: &RealBall) -> RealBall {
    taylor_fixed(y, false)
}

/// Alternating Taylor series in `w`-bit fixed point.
///
/// With `|y| <= 1` every computed term is within 2 ulps of the exact term for the
/// truncated input, and the dropped tail is below the last computed term. Both
/// `sin` and `cos` are 1-Lipschitz, so the input radius and the input truncation
/// add directly.
fn taylor_fixed(y: &RealBall, sine: bool) -> RealBall {
    let wp = y.prec;
    let w = wp as i64 + 16;
    let mid = &y.mid;
    let shift = mid.exponent() + w;
    let yf: BigInt = if shift >= 0 {
        mid.mantissa() << shift as usize
    } else {
        mid.mantissa() >> (-shift) as usize
    };
    let y2: BigInt = (&yf * &yf) >> w as usize;
    let one = BigInt::one() << w as usize;
    let mut term = if sine { yf } else { one };
    let mut sum = term.clone();
    let mut k: u64 = 1;
    while !term.is_zero() {
        let d = if sine {
            (2 * k) * (2 * k + 1)
        } else {
            (2 * k - 1) * (2 * k)
        };
        let t: BigInt = (&term * &y2) >> w as usize;
        term = -t.div_floor(&BigInt::from(d));
        sum += &term;
        k += 1;
    }
    // 2 ulps per term, 1 for the input truncation, 2 for the (zero) tail term
    let ulps = BigInt::from(2 * k + 3);
    let rad = y.rad.add(&Dyadic::new(ulps, -w));
    RealBall::finish(Dyadic::new(sum, -w), rad, wp)
}

macro_rules! forward_binop {
    ($tr:ident, $m:ident, $imp:ident) => {
        impl $tr<&RealBall> for &RealBall {
            type Output = RealBall;
            fn $m(self, rhs: &RealBall) -> RealBall {
                self.$imp(rhs)
            }
        }
        impl $tr<RealBall> for RealBall {
            type Output = RealBall;
            fn $m(self, rhs: RealBall) -> RealBall {
                self.$imp(&rhs)
            }
        }
        impl $tr<&RealBall> for RealBall {
            type Output = RealBall;
            fn $m(self, rhs: &RealBall) -> RealBall {
                self.$imp(rhs)
            }
        }
    };
}

forward_binop!(Add, add, add_ball);
forward_binop!(Sub, sub, sub_ball);
forward_binop!(Mul, mul, mul_ball);

impl Neg for RealBall {
    type Output = RealBall;
    fn neg(self) -> RealBall {
        RealBall::neg(&self)
    }
}

impl Neg for &RealBall {
    type Output = RealBall;
    fn neg(self) -> RealBall {
        RealBall::neg(self)
    }
}

impl fmt::Debug for RealBall {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e} +/- {:.3e}]", self.to_f64(), self.rad_f64())
    }
}

impl fmt::Display for RealBall {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.17} +/- {:.3e}", self.to_f64(), self.rad_f64())
    }
}
