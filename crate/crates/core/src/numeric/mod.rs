//! Scalars: big integers, exact rationals, rigorous balls and the fractional-part
//! operators used throughout the crate.
//!
//! Notation follows the usual conventions: `{x}` is the distance from `x` to the
//! nearest integer, `round_half_down(x)` the nearest integer with ties going to the
//! smaller one, and `<x> = x - round_half_down(x)` the signed fractional part.

mod ball;
mod dyadic;
pub mod serde_fmt;

pub use ball::{RealBall, DEFAULT_PRECISION};
pub use dyadic::{Dyadic, Round};

use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type BigInt = num_bigint::BigInt;
pub type Rational = num_rational::BigRational;

/// Radius above which `circle_dist` on a ball angle refuses to answer.
pub const DEFAULT_RADIUS_CAP: f64 = 1e-12;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> BigInt {
    BigInt::from(n)
}

/// `x - floor(x)`, in `[0, 1)`.
pub fn frac_part(x: &Rational) -> Rational {
    x - x.floor()
}

/// Distance from `x` to the nearest integer, exact.
pub fn frac_dist(x: &Rational) -> Rational {
    let f = frac_part(x);
    let g = Rational::one() - &f;
    if f <= g {
        f
    } else {
        g
    }
}

/// Enclosure of the distance to the nearest integer, within `[0, 1/2]`.
///
/// The map is 1-Lipschitz, so the enclosure is `{mid} +/- rad` clipped; a ball wider
/// than `1/2` yields the whole range.
pub fn frac_dist_ball(x: &RealBall) -> RealBall {
    let half = Dyadic::pow2(-1);
    let prec = x.prec();
    if x.rad() >= &half {
        return RealBall::from_interval(&Dyadic::zero(), &half, prec);
    }
    let n = x.mid().round_int();
    let d = x.mid().sub(&Dyadic::from_bigint(n)).abs();
    let lo = Dyadic::max(&d.sub(x.rad()), &Dyadic::zero());
    let hi = Dyadic::min(&d.add(x.rad()), &half);
    RealBall::from_interval(&lo, &hi, prec)
}

/// Nearest integer; exact ties go to the smaller integer.
pub fn nearest_int(x: &Rational) -> BigInt {
    let half = rat(1, 2);
    (x - half).ceil().to_integer()
}

/// `<x> = x - nearest_int(x)`, in `(-1/2, 1/2]`.
pub fn signed_frac(x: &Rational) -> Rational {
    x - Rational::from_integer(nearest_int(x))
}

/// A point `e^{2 i pi theta}` of the unit circle, with `theta` reduced to `[0, 1)`.
#[derive(Clone, Debug, PartialEq)]
pub enum UnimodularPoint {
    Exact(Rational),
    Ball(RealBall),
}

impl UnimodularPoint {
    pub fn exact(theta: Rational) -> Self {
        UnimodularPoint::Exact(frac_part(&theta))
    }

    pub fn ball(theta: RealBall) -> Self {
        let shift = theta.mid().floor();
        let shifted = theta.sub_ball(&RealBall::from_bigint(&shift, theta.prec()));
        UnimodularPoint::Ball(shifted)
    }

    pub fn is_one(&self) -> bool {
        match self {
            UnimodularPoint::Exact(t) => t.is_zero(),
            UnimodularPoint::Ball(b) => b.is_exact() && b.mid().is_zero(),
        }
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        match self {
            UnimodularPoint::Exact(t) => Some(t),
            UnimodularPoint::Ball(_) => None,
        }
    }

    /// Enclosure of `n * theta`, unreduced.
    fn scaled_ball(&self, n: &BigInt, prec: u32) -> RealBall {
        match self {
            UnimodularPoint::Exact(t) => {
                let r = Rational::from_integer(n.clone()) * t;
                RealBall::from_rational(&frac_part(&r), prec)
            }
            UnimodularPoint::Ball(b) => b.with_prec(prec).mul_int(n),
        }
    }

    /// Enclosure of `Re(lambda^n)` and `Im(lambda^n)`.
    pub fn power(&self, n: &BigInt, prec: u32) -> Result<(RealBall, RealBall)> {
        match self {
            UnimodularPoint::Exact(t) => {
                // 2 n theta mod 2, exactly
                let x = Rational::from_integer(n.clone() * 2) * t;
                let two = Rational::from_integer(int(2));
                let r = &x - (&x / &two).floor() * &two;
                Ok((cos_pi_rat(&r, prec), sin_pi_rat(&r, prec)))
            }
            UnimodularPoint::Ball(b) => {
                let wp = prec.max(b.prec()).max(n.bits() as u32 + 64);
                let x = self.scaled_ball(n, wp).mul_int(&int(2));
                let c = x.cos_pi();
                let s = x.sin_pi();
                check_cap(&c, DEFAULT_RADIUS_CAP)?;
                Ok((c.with_prec(prec), s.with_prec(prec)))
            }
        }
    }
}

fn check_cap(b: &RealBall, cap: f64) -> Result<()> {
    if b.rad_f64() > cap {
        return Err(Error::Precision(format!(
            "result radius {:.3e} exceeds cap {:.3e}; raise the angle precision",
            b.rad_f64(),
            cap
        )));
    }
    Ok(())
}

/// Reduce `x` modulo 2 into `[0, 2)`.
fn mod_two(x: &Rational) -> Rational {
    let two = Rational::from_integer(int(2));
    x - (x / &two).floor() * &two
}

/// `sin(pi x)` for rational `x`; exact at multiples of `1/2`.
pub fn sin_pi_rat(x: &Rational, prec: u32) -> RealBall {
    let r = mod_two(x);
    let twice = &r * Rational::from_integer(int(2));
    if twice.is_integer() {
        return match twice.to_integer().to_string().as_str() {
            "1" => RealBall::one(prec),
            "3" => RealBall::from_int(-1, prec),
            _ => RealBall::zero(prec),
        };
    }
    RealBall::from_rational(&r, prec + 32)
        .sin_pi()
        .with_prec(prec)
}

/// `cos(pi x)` for rational `x`; exact at multiples of `1/2`.
pub fn cos_pi_rat(x: &Rational, prec: u32) -> RealBall {
    let r = mod_two(x);
    let twice = &r * Rational::from_integer(int(2));
    if twice.is_integer() {
        return match twice.to_integer().to_string().as_str() {
            "0" => RealBall::one(prec),
            "2" => RealBall::from_int(-1, prec),
            _ => RealBall::zero(prec),
        };
    }
    RealBall::from_rational(&r, prec + 32)
        .cos_pi()
        .with_prec(prec)
}

/// `|e^{2 i pi n theta} - 1| = 2 sin(pi {n theta})`.
///
/// Rational angles are reduced through `n a mod q`, so the cost does not depend
/// on the size of `n`. Ball angles are evaluated at `bits(n) + 64` bits at least
/// and fail with a precision error when the result radius exceeds the cap.
pub fn circle_dist(n: &BigInt, theta: &UnimodularPoint, prec: u32) -> Result<RealBall> {
    circle_dist_with_cap(n, theta, prec, DEFAULT_RADIUS_CAP)
}

pub fn circle_dist_with_cap(
    n: &BigInt,
    theta: &UnimodularPoint,
    prec: u32,
    cap: f64,
) -> Result<RealBall> {
    match theta {
        UnimodularPoint::Exact(t) => {
            let d = circle_frac_exact(n, t);
            Ok(sin_pi_rat(&d, prec).mul_int(&int(2)))
        }
        UnimodularPoint::Ball(b) => {
            let wp = prec.max(n.bits() as u32 + 64);
            if b.prec() < n.bits() as u32 + 64 {
                return Err(Error::Precision(format!(
                    "angle carries {} bits, need at least {} for n with {} bits",
                    b.prec(),
                    n.bits() + 64,
                    n.bits()
                )));
            }
            let x = b.with_prec(wp).mul_int(n);
            let d = frac_dist_ball(&x);
            let v = d.sin_pi().mul_int(&int(2));
            check_cap(&v, cap)?;
            Ok(v.with_prec(prec))
        }
    }
}

/// `{n theta}` exactly, via `n a mod q`.
pub fn circle_frac_exact(n: &BigInt, theta: &Rational) -> Rational {
    let a = theta.numer();
    let q = theta.denom();
    let r = (n * a).mod_floor(q);
    frac_dist(&Rational::new(r, q.clone()))
}

/// `<n theta>` exactly, via `n a mod q`.
pub fn signed_frac_scaled(n: &BigInt, theta: &Rational) -> Rational {
    let a = theta.numer();
    let q = theta.denom();
    let r = (n * a).mod_floor(q);
    signed_frac(&Rational::new(r, q.clone()))
}

/// Serializable angle: a rational string or a ball.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum AngleRepr {
    Exact(#[serde(with = "serde_fmt::rational")] Rational),
    Ball(serde_fmt::BallRepr),
}

impl TryFrom<AngleRepr> for UnimodularPoint {
    type Error = Error;
    fn try_from(a: AngleRepr) -> Result<Self> {
        Ok(match a {
            AngleRepr::Exact(q) => UnimodularPoint::exact(q),
            AngleRepr::Ball(b) => UnimodularPoint::ball(b.try_into()?),
        })
    }
}

impl From<&UnimodularPoint> for AngleRepr {
    fn from(p: &UnimodularPoint) -> Self {
        match p {
            UnimodularPoint::Exact(q) => AngleRepr::Exact(q.clone()),
            UnimodularPoint::Ball(b) => AngleRepr::Ball(b.into()),
        }
    }
}

/// Parse `"a/q"`, `"a"`, or a finite decimal like `"-0.25"` or `"1.5e-3"`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational: {s:?}"));
    if let Some((a, b)) = s.split_once('/') {
        let a: BigInt = a.trim().parse().map_err(|_| bad())?;
        let b: BigInt = b.trim().parse().map_err(|_| bad())?;
        if b.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(a, b));
    }
    if let Ok(v) = s.parse::<BigInt>() {
        return Ok(Rational::from_integer(v));
    }
    parse_decimal(s).ok_or_else(bad)
}

/// Exact value of a decimal literal.
pub fn parse_decimal(s: &str) -> Option<Rational> {
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i64>().ok()?),
        None => (s, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (ip, fp) = mant.split_once('.').unwrap_or((mant, ""));
    if ip.is_empty() && fp.is_empty() {
        return None;
    }
    if !ip.chars().chain(fp.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("{ip}{fp}0").parse().ok()?;
    let scale = exp - fp.len() as i64 - 1;
    let ten = BigInt::from(10);
    let v = if scale >= 0 {
        Rational::from_integer(digits * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(digits, num_traits::pow(ten, (-scale) as usize))
    };
    Some(if neg { -v } else { v })
}

/// Decimal rendering of a ball: midpoint with `digits` significant digits and an
/// upward-rounded radius that also covers the decimal rounding of the midpoint.
pub fn ball_to_decimal(b: &RealBall, digits: usize) -> (String, String) {
    let mid = b.mid().to_rational();
    let (text, err) = rational_to_sci(&mid, digits);
    let rad = b.rad().to_rational() + err;
    (text, rational_to_sci_up(&rad))
}

fn decimal_exponent(q: &Rational) -> i64 {
    // floor(log10 |q|), corrected exactly
    let f = Dyadic::from_rational(q, 64, Round::Nearest).to_f64().abs();
    let mut e = if f > 0.0 && f.is_finite() {
        f.log10().floor() as i64
    } else {
        let bits = q.numer().bits() as i64 - q.denom().bits() as i64;
        (bits as f64 * std::f64::consts::LOG10_2).floor() as i64
    };
    let ten = Rational::from_integer(int(10));
    let pow10 = |k: i64| -> Rational {
        if k >= 0 {
            num_traits::pow(ten.clone(), k as usize)
        } else {
            Rational::one() / num_traits::pow(ten.clone(), (-k) as usize)
        }
    };
    let a = q.abs();
    while pow10(e) > a {
        e -= 1;
    }
    while pow10(e + 1) <= a {
        e += 1;
    }
    e
}

fn rational_to_sci(q: &Rational, digits: usize) -> (String, Rational) {
    if q.is_zero() {
        return ("0".to_string(), Rational::zero());
    }
    let e = decimal_exponent(q);
    let shift = digits as i64 - 1 - e;
    let ten = Rational::from_integer(int(10));
    let scale = if shift >= 0 {
        num_traits::pow(ten.clone(), shift as usize)
    } else {
        Rational::one() / num_traits::pow(ten.clone(), (-shift) as usize)
    };
    let m = (q * &scale).round().to_integer();
    let approx = Rational::from_integer(m.clone()) / &scale;
    let err = (q - &approx).abs();
    (format_sci(&m, e, digits), err)
}

fn rational_to_sci_up(q: &Rational) -> String {
    if q.is_zero() {
        return "0".to_string();
    }
    let digits = 3;
    let e = decimal_exponent(q);
    let shift = digits as i64 - 1 - e;
    let ten = Rational::from_integer(int(10));
    let scale = if shift >= 0 {
        num_traits::pow(ten.clone(), shift as usize)
    } else {
        Rational::one() / num_traits::pow(ten.clone(), (-shift) as usize)
    };
    let m = (q * &scale).ceil().to_integer();
    format_sci(&m, e, digits)
}

fn format_sci(m: &BigInt, e: i64, digits: usize) -> String {
    let neg = m.is_negative();
    let s = m.abs().to_string();
    // ceil/round may carry into an extra digit
    let (s, e) = if s.len() > digits {
        (s[..s.len() - 1].to_string(), e + 1)
    } else {
        (s, e)
    };
    let (head, tail) = s.split_at(1);
    let tail = tail.trim_end_matches('0');
    let sign = if neg { "-" } else { "" };
    if tail.is_empty() {
        format!("{sign}{head}e{e}")
    } else {
        format!("{sign}{head}.{tail}e{e}")
    }
}

/// Read back a `(value, radius)` decimal pair as a ball enclosing both.
pub fn ball_from_decimal(value: &str, radius: &str, prec: u32) -> Result<RealBall> {
    let v = parse_rational(value)?;
    let r = parse_rational(radius)?;
    if r.is_negative() {
        return Err(Error::Parse(format!("negative radius {radius:?}")));
    }
    let b = RealBall::from_rational(&v, prec);
    let extra = Dyadic::from_rational(&r, 30, Round::Up);
    RealBall::new(b.mid().clone(), b.rad().add(&extra), prec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frac_dist_examples() {
        assert_eq!(frac_dist(&rat(7, 3)), rat(1, 3));
        assert_eq!(frac_dist(&rat(5, 2)), rat(1, 2));
        assert_eq!(frac_dist(&rat(-1, 5)), rat(1, 5));
        assert_eq!(frac_dist(&rat(4, 1)), rat(0, 1));
    }

    #[test]
    fn nearest_int_tie_goes_down() {
        assert_eq!(nearest_int(&rat(5, 2)), int(2));
        assert_eq!(nearest_int(&rat(7, 3)), int(2));
        assert_eq!(nearest_int(&rat(-1, 2)), int(-1));
        assert_eq!(nearest_int(&rat(-3, 2)), int(-2));
        assert_eq!(nearest_int(&rat(8, 3)), int(3));
    }

    #[test]
    fn signed_frac_examples() {
        assert_eq!(signed_frac(&rat(7, 3)), rat(1, 3));
        assert_eq!(signed_frac(&rat(5, 2)), rat(1, 2));
        assert_eq!(signed_frac(&rat(0, 1)), rat(0, 1));
        assert_eq!(signed_frac(&rat(8, 3)), rat(-1, 3));
    }

    #[test]
    fn circle_dist_examples() {
        let half = UnimodularPoint::exact(rat(1, 2));
        let d3 = circle_dist(&int(3), &half, 128).unwrap();
        assert_eq!(d3, RealBall::from_int(2, 128));
        let d4 = circle_dist(&int(4), &half, 128).unwrap();
        assert!(d4.is_exact() && d4.mid().is_zero());
        let third = UnimodularPoint::exact(rat(1, 3));
        let d = circle_dist(&int(1), &third, 128).unwrap();
        assert!((d.to_f64() - 3f64.sqrt()).abs() < 1e-15);
        assert!(d.sqr().contains(&Dyadic::from_int(3)));
    }

    #[test]
    fn circle_dist_matches_exponential_quadrature() {
        // |e^{2 i pi t} - 1| from the defining exponential, independent of sin_pi
        let t = std::f64::consts::PI * 2.0 / 3.0;
        let (re, im) = (t.cos() - 1.0, t.sin());
        let direct = (re * re + im * im).sqrt();
        let d = circle_dist(&int(1), &UnimodularPoint::exact(rat(1, 3)), 64).unwrap();
        assert!((d.to_f64() - direct).abs() < 1e-14);
    }

    #[test]
    fn circle_dist_huge_n_rational() {
        let n: BigInt = BigInt::from(10).pow(400) + 1;
        let d = circle_dist(&n, &UnimodularPoint::exact(rat(1, 2)), 128).unwrap();
        assert_eq!(d, RealBall::from_int(2, 128));
    }

    #[test]
    fn circle_dist_ball_angle_precision_error() {
        let theta = RealBall::from_rational(&rat(1, 3), 64);
        let p = UnimodularPoint::ball(theta);
        let n: BigInt = BigInt::from(1u64 << 40);
        assert!(matches!(circle_dist(&n, &p, 128), Err(Error::Precision(_))));
        let theta = RealBall::from_rational(&rat(1, 3), 200);
        let p = UnimodularPoint::ball(theta);
        let d = circle_dist(&n, &p, 128).unwrap();
        let exact = circle_dist(&n, &UnimodularPoint::exact(rat(1, 3)), 128).unwrap();
        assert!(d.overlaps(&exact));
    }

    #[test]
    fn frac_dist_ball_wide_is_full_range() {
        let b = RealBall::new(Dyadic::zero(), Dyadic::one(), 64).unwrap();
        let d = frac_dist_ball(&b);
        assert!(d.contains(&Dyadic::zero()) && d.contains(&Dyadic::pow2(-1)));
        let b = RealBall::from_rational(&rat(-1, 5), 64);
        assert!(frac_dist_ball(&b).contains_rational(&rat(1, 5)));
    }

    #[test]
    fn decimal_parsing() {
        assert_eq!(parse_rational("-0.2").unwrap(), rat(-1, 5));
        assert_eq!(parse_rational("7/10").unwrap(), rat(7, 10));
        assert_eq!(parse_rational("1.5e-3").unwrap(), rat(3, 2000));
        assert_eq!(parse_rational("12").unwrap(), rat(12, 1));
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("1/0").is_err());
    }

    #[test]
    fn decimal_pair_encloses() {
        let b = RealBall::from_rational(&rat(1, 3), 128);
        let (v, r) = ball_to_decimal(&b, 25);
        let back = ball_from_decimal(&v, &r, 128).unwrap();
        assert!(back.contains_rational(&rat(1, 3)));
        assert!(back.rad_f64() < 1e-23);
        let neg = RealBall::from_rational(&rat(-22, 7), 128);
        let (v, r) = ball_to_decimal(&neg, 10);
        assert!(ball_from_decimal(&v, &r, 128)
            .unwrap()
            .contains_rational(&rat(-22, 7)));
    }

    #[test]
    fn unimodular_canonical() {
        let p = UnimodularPoint::exact(rat(7, 3));
        assert_eq!(p.as_rational().unwrap(), &rat(1, 3));
        let p = UnimodularPoint::exact(rat(-1, 4));
        assert_eq!(p.as_rational().unwrap(), &rat(3, 4));
        let (re, im) = UnimodularPoint::exact(rat(1, 4))
            .power(&int(1), 64)
            .unwrap();
        assert!(re.mid().is_zero() && im == RealBall::one(64));
    }
}
