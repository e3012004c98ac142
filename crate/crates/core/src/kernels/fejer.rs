//! Fejer-type kernels `P(e^{2 i pi t}) = 2/(m+2) |sum_{j=1}^{m+1} sin(j pi/(m+2)) e^{2 i pi j t}|^2`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{cos_pi_rat, int, rat, sin_pi_rat, BigInt, Rational, RealBall};

const GUARD: u32 = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FejerKernel {
    order: u64,
}

impl FejerKernel {
    pub fn new(order: u64) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidInput("kernel order must be positive".into()));
        }
        Ok(FejerKernel { order })
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn coeff(&self, p: i64, prec: u32) -> RealBall {
        fejer_coeff(self.order, p, prec)
    }

    pub fn eval(&self, t: &Rational, prec: u32) -> RealBall {
        fejer_eval(self.order, t, prec)
    }

    /// `(p, coefficient)` for `p = -m..=m`.
    pub fn coefficients(&self, prec: u32) -> Vec<(i64, RealBall)> {
        let m = self.order as i64;
        let half: Vec<RealBall> = (0..=m).map(|p| fejer_coeff(self.order, p, prec)).collect();
        (-m..=m)
            .map(|p| (p, half[p.unsigned_abs() as usize].clone()))
            .collect()
    }
}

fn ratio(p: u64, m: u64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(m + 2))
}

/// Closed form of the coefficient at frequency `p`:
/// `((m+2-|p|) cos(|p| pi/(m+2)) + sin(|p| pi/(m+2)) cot(pi/(m+2))) / (m+2)`.
pub fn fejer_coeff(m: u64, p: i64, prec: u32) -> RealBall {
    let a = p.unsigned_abs();
    if a == 0 {
        return RealBall::one(prec);
    }
    if a > m {
        return RealBall::zero(prec);
    }
    let wp = prec + GUARD;
    let x = ratio(a, m);
    let c = cos_pi_rat(&x, wp);
    let s = sin_pi_rat(&x, wp);
    let base = ratio(1, m);
    let cot = cos_pi_rat(&base, wp)
        .div_ball(&sin_pi_rat(&base, wp))
        .expect("sin(pi/(m+2)) is bounded away from zero");
    let v = c
        .mul_int(&BigInt::from(m + 2 - a))
        .add_ball(&s.mul_ball(&cot))
        .div_u64(m + 2);
    v.with_prec(prec)
}

/// Sine-product form `2/(m+2) sum_{j=1}^{m+1-|p|} sin((j+|p|) pi/(m+2)) sin(j pi/(m+2))`.
///
/// Costs `O(m)` ball operations; intended as an independent check of [`fejer_coeff`].
pub fn fejer_coeff_direct(m: u64, p: i64, prec: u32) -> RealBall {
    let a = p.unsigned_abs();
    if a > m {
        return RealBall::zero(prec);
    }
    direct_sum(&direct_sines(m, prec + GUARD), m, a).with_prec(prec)
}

/// [`fejer_coeff_direct`] for `p = 0..=m`, sharing the sine table.
pub fn fejer_coeffs_direct(m: u64, prec: u32) -> Vec<RealBall> {
    let sines = direct_sines(m, prec + GUARD);
    (0..=m)
        .map(|a| direct_sum(&sines, m, a).with_prec(prec))
        .collect()
}

fn direct_sines(m: u64, wp: u32) -> Vec<RealBall> {
    (0..=m + 1).map(|j| sin_pi_rat(&ratio(j, m), wp)).collect()
}

fn direct_sum(sines: &[RealBall], m: u64, a: u64) -> RealBall {
    let mut acc = RealBall::zero(sines[0].prec());
    for j in 1..=(m + 1 - a) {
        acc = acc.add_ball(&sines[(j + a) as usize].mul_ball(&sines[j as usize]));
    }
    acc.mul_int(&int(2)).div_u64(m + 2)
}

type SineCache = HashMap<(u64, u32), Arc<Vec<RealBall>>>;

/// `sin(j pi/(m+2))` for `j = 0..=(m+2)/2`, cached per order and precision.
fn half_sines(m: u64, wp: u32) -> Arc<Vec<RealBall>> {
    static CACHE: OnceLock<Mutex<SineCache>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(v) = cache.lock().expect("sine cache").get(&(m, wp)) {
        return v.clone();
    }
    let v: Arc<Vec<RealBall>> = Arc::new(
        (0..=(m + 2) / 2)
            .map(|j| sin_pi_rat(&ratio(j, m), wp))
            .collect(),
    );
    cache.lock().expect("sine cache").insert((m, wp), v.clone());
    v
}

/// Value of the kernel at `e^{2 i pi t}`.
///
/// The sine weights are symmetric about `(m+2)/2`, so the kernel equals
/// `2/(m+2) (sum_j sin(j pi/(m+2)) cos((m+2-2j) pi t))^2`; the cosines come from
/// the Chebyshev recurrence in steps of `2 pi t`.
pub fn fejer_eval(m: u64, t: &Rational, prec: u32) -> RealBall {
    let wp = prec + GUARD + 2 * (64 - (m + 2).leading_zeros());
    let sines = half_sines(m, wp);
    let two_t = t * Rational::from_integer(int(2));
    let c2 = cos_pi_rat(&two_t, wp);
    let twice_c2 = c2.mul_int(&int(2));
    // (previous, current) cosines of k pi t for k of the parity of m
    let (mut prev, mut cur, start) = if m.is_multiple_of(2) {
        (c2.clone(), RealBall::one(wp), 0)
    } else {
        let c1 = cos_pi_rat(t, wp);
        (c1.clone(), c1, 1)
    };
    let mut sum = RealBall::zero(wp);
    let mut k = start;
    loop {
        let j = ((m + 2 - k) / 2) as usize;
        let term = sines[j].mul_ball(&cur);
        sum = if k == 0 {
            sum.add_ball(&term)
        } else {
            sum.add_ball(&term.mul_int(&int(2)))
        };
        if k + 2 > m {
            break;
        }
        let next = twice_c2.mul_ball(&cur).sub_ball(&prev);
        prev = cur;
        cur = next;
        k += 2;
    }
    let v = sum.sqr().mul_int(&int(2)).div_u64(m + 2);
    v.with_prec(prec)
}

/// Whether `cap * pi <= m + 2` holds with certainty.
pub fn cap_admissible(cap: u64, m: u64, prec: u32) -> bool {
    let lhs = RealBall::pi(prec + GUARD).mul_int(&BigInt::from(cap));
    RealBall::from_int((m + 2) as i64, prec + GUARD).certainly_ge(&lhs)
}

/// The factor `1 - 3 pi^2 (cap/(m+2))^2`, defined when `cap * pi <= m + 2`.
pub fn lower_bound_eq3_factor(cap: u64, m: u64, prec: u32) -> Result<RealBall> {
    if !cap_admissible(cap, m, prec) {
        return Err(Error::CapViolation { index: 0 });
    }
    let wp = prec + GUARD;
    let pi = RealBall::pi(wp);
    let r = ratio(cap, m);
    let v = RealBall::one(wp).sub_ball(&pi.sqr().mul_int(&int(3)).mul_rational(&(&r * &r)));
    Ok(v.with_prec(prec))
}

/// Largest cap allowed for order `m`, i.e. `floor((m+2)/pi)`.
pub fn max_cap(m: u64, prec: u32) -> u64 {
    let est = ((m + 2) as f64 / std::f64::consts::PI) as u64;
    let mut c = est.saturating_sub(2);
    while cap_admissible(c + 1, m, prec) {
        c += 1;
    }
    c
}

/// `cos(pi/(m+2))`, the coefficient at frequency 1.
pub fn first_coeff_closed(m: u64, prec: u32) -> RealBall {
    cos_pi_rat(&rat(1, (m + 2) as i64), prec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::Dyadic;
    use proptest::prelude::*;

    #[test]
    fn coefficient_examples() {
        let half = RealBall::from_rational(&rat(1, 2), 128);
        assert!(fejer_coeff(1, 1, 128).overlaps(&half));
        assert!(fejer_coeff_direct(1, 1, 128).overlaps(&half));
        assert_eq!(fejer_coeff(7, 0, 128), RealBall::one(128));
        assert_eq!(fejer_coeff(2, 3, 128), RealBall::zero(128));
        let d = fejer_coeff_direct(2, 1, 128);
        assert!((d.to_f64() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!(fejer_coeff(3, 2, 128).overlaps(&fejer_coeff_direct(3, 2, 128)));
    }

    #[test]
    fn closed_form_equals_direct_sum() {
        for m in 1..=64u64 {
            let direct = fejer_coeffs_direct(m, 128);
            assert!(direct[m as usize].overlaps(&fejer_coeff_direct(m, m as i64, 128)));
            for p in 0..=m as i64 {
                let a = fejer_coeff(m, p, 128);
                let b = &direct[p as usize];
                assert!(a.overlaps(b), "m={m} p={p}");
                assert!(a.rad_f64() < 1e-30);
            }
        }
    }

    #[test]
    fn first_coefficient_is_cosine() {
        for m in 1..=64 {
            assert!(fejer_coeff(m, 1, 128).overlaps(&first_coeff_closed(m, 128)));
        }
    }

    #[test]
    fn eval_examples() {
        let v0 = fejer_eval(1, &rat(0, 1), 128);
        assert!(v0.overlaps(&RealBall::from_int(2, 128)));
        let vh = fejer_eval(1, &rat(1, 2), 128);
        assert!(vh.contains(&Dyadic::zero()));
    }

    #[test]
    fn quadratic_factor_examples() {
        let f = lower_bound_eq3_factor(1, 8, 128).unwrap();
        let expect = 1.0 - 3.0 * std::f64::consts::PI.powi(2) / 100.0;
        assert!((f.to_f64() - expect).abs() < 1e-15);
        assert!((f.to_f64() - 0.70392).abs() < 1e-5);
        let a = lower_bound_eq3_factor(1, 1000, 128).unwrap();
        let b = lower_bound_eq3_factor(1, 1_000_000, 128).unwrap();
        assert!(f.certainly_gt(&RealBall::zero(128)) && b.certainly_gt(&a) && a.certainly_gt(&f));
        assert!(RealBall::one(128).certainly_gt(&b));
        assert_eq!(
            lower_bound_eq3_factor(4, 8, 128),
            Err(Error::CapViolation { index: 0 })
        );
    }

    #[test]
    fn quadratic_factor_chain_scan() {
        for m in 4..=64u64 {
            let cap = max_cap(m, 128);
            assert!(cap as f64 * std::f64::consts::PI <= (m + 2) as f64);
            assert!((cap + 1) as f64 * std::f64::consts::PI > (m + 2) as f64);
            for p in 1..=cap {
                let c = fejer_coeff(m, p as i64, 128);
                let f = lower_bound_eq3_factor(p, m, 128).unwrap();
                assert!(c.certainly_ge(&f), "m={m} p={p}");
            }
        }
    }

    #[test]
    fn synthesis_matches_eval() {
        for m in [1u64, 2, 5, 9] {
            let coeffs = FejerKernel::new(m).unwrap().coefficients(128);
            for t in [rat(0, 1), rat(1, 7), rat(2, 5), rat(5, 11)] {
                let mut acc = RealBall::zero(160);
                for (p, c) in &coeffs {
                    let ang = &t * Rational::from_integer(BigInt::from(2 * p));
                    acc = acc.add_ball(&c.mul_ball(&cos_pi_rat(&ang, 160)));
                }
                assert!(acc.overlaps(&fejer_eval(m, &t, 128)), "m={m} t={t}");
            }
        }
    }

    proptest! {
        #[test]
        fn eval_nonnegative(m in 1u64..40, a in 0i64..997) {
            let v = fejer_eval(m, &rat(a, 997), 96);
            prop_assert!(!v.certainly_negative());
            prop_assert!(!v.lower().is_negative() || v.contains(&Dyadic::zero()));
        }

        #[test]
        fn coefficients_symmetric(m in 1u64..50, p in -60i64..60) {
            prop_assert_eq!(fejer_coeff(m, p, 96), fejer_coeff(m, -p, 96));
        }
    }
}
