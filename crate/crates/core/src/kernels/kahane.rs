//! Kernels built from `phi = a (Delta * Delta)` with `Delta(t) = max(1 - 6|t|, 0)`.
//!
//! `phi` is derived once by exact piecewise integration and interpolation; every
//! coefficient of the trigonometric polynomials below is an exact rational.

use std::sync::OnceLock;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::poly::{Piecewise, Poly};
use crate::error::{Error, Result};
use crate::numeric::serde_fmt::{ball, rational, rational_vec};
use crate::numeric::{cos_pi_rat, rat, BigInt, Rational, RealBall};

fn triangle() -> Piecewise {
    Piecewise {
        pieces: vec![
            (rat(-1, 6), rat(0, 1), Poly::linear(rat(1, 1), rat(6, 1))),
            (rat(0, 1), rat(1, 6), Poly::linear(rat(1, 1), rat(-6, 1))),
        ],
    }
}

/// `(Delta * Delta)(x)`, by direct integration.
pub fn triangle_self_convolution(x: &Rational) -> Rational {
    let d = triangle();
    d.convolve_at(&d, x)
}

/// `a = 1 / (Delta * Delta)(0)`.
pub fn phi_normalization() -> Rational {
    triangle_self_convolution(&Rational::zero()).recip()
}

/// `phi''(0) = a (Delta' * Delta')(0)`.
pub fn phi_second_derivative_at_zero() -> Rational {
    let d = triangle().derivative();
    phi_normalization() * d.convolve_at(&d, &Rational::zero())
}

/// Piecewise-cubic closed form of `phi` on `[0, 1/6]` and `[1/6, 1/3]`.
pub fn phi_pieces() -> &'static Piecewise {
    static PIECES: OnceLock<Piecewise> = OnceLock::new();
    PIECES.get_or_init(|| {
        let a = phi_normalization();
        let cuts = [rat(0, 1), rat(1, 6), rat(1, 3)];
        let pieces = cuts
            .windows(2)
            .map(|w| {
                let (lo, hi) = (&w[0], &w[1]);
                let sample = |i: i64, n: i64| {
                    let x = lo + (hi - lo) * rat(i, n);
                    let y = &a * triangle_self_convolution(&x);
                    (x, y)
                };
                let p = Poly::interpolate(&(0..4).map(|i| sample(i, 3)).collect::<Vec<_>>());
                // the self-convolution of a piecewise-linear function is cubic per piece
                for i in 0..7 {
                    let (x, y) = sample(i, 6);
                    assert_eq!(p.eval(&x), y, "phi is not cubic on [{lo}, {hi}]");
                }
                (lo.clone(), hi.clone(), p)
            })
            .collect();
        Piecewise { pieces }
    })
}

/// Exact `phi(x)`; even, supported on `[-1/3, 1/3]`, `phi(0) = 1`.
pub fn kahane_phi(x: &Rational) -> Rational {
    phi_pieces().eval(&x.abs())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KahanePoly {
    index: u64,
    /// `phi(s/j)` for `s = 0..=degree`.
    #[serde(with = "rational_vec")]
    coeffs: Vec<Rational>,
}

impl KahanePoly {
    pub fn index(&self) -> u64 {
        self.index
    }

    pub fn degree(&self) -> u64 {
        self.coeffs.len() as u64 - 1
    }

    pub fn coeff(&self, s: i64) -> Rational {
        self.coeffs
            .get(s.unsigned_abs() as usize)
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    /// `(s, coefficient)` for `s = -degree..=degree`.
    pub fn spectrum(&self) -> Vec<(i64, Rational)> {
        let d = self.degree() as i64;
        (-d..=d).map(|s| (s, self.coeff(s))).collect()
    }

    /// Value at `e^{2 i pi t}`.
    pub fn eval(&self, t: &Rational, prec: u32) -> RealBall {
        let mut acc = RealBall::from_rational(&self.coeffs[0], prec + 16);
        for (s, c) in self.coeffs.iter().enumerate().skip(1) {
            let ang = t * Rational::from_integer(BigInt::from(2 * s as u64));
            let term = cos_pi_rat(&ang, prec + 16).mul_rational(&(c * rat(2, 1)));
            acc = acc.add_ball(&term);
        }
        acc.with_prec(prec)
    }
}

/// `P_j(e^{it}) = sum_s phi(s/j) e^{ist}` with `3|s| < j`.
pub fn kahane_poly(j: u64) -> Result<KahanePoly> {
    if j == 0 {
        return Err(Error::InvalidInput("index must be at least 1".into()));
    }
    let degree = (j - 1) / 3;
    let coeffs = (0..=degree)
        .map(|s| kahane_phi(&Rational::new(BigInt::from(s), BigInt::from(j))))
        .collect();
    Ok(KahanePoly { index: j, coeffs })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonnegReport {
    pub index: u64,
    pub grid: u64,
    #[serde(with = "ball")]
    pub min: RealBall,
    /// Grid point `i` is the angle `i/grid` of a full turn.
    pub argmin: u64,
    /// Grid points whose enclosure lies in `[0, inf)`.
    pub certified: u64,
}

/// Evaluate `P_j` on `grid` equispaced points and report the smallest value.
///
/// A value with a certified negative upper bound is an invariant violation.
pub fn kahane_nonneg_check(j: u64, grid: u64, prec: u32) -> Result<NonnegReport> {
    if grid < 4 * j {
        return Err(Error::InvalidInput(format!(
            "grid {grid} is below 4 j = {}",
            4 * j
        )));
    }
    let p = kahane_poly(j)?;
    let wp = prec + 16;
    let cos_table: Vec<RealBall> = (0..grid)
        .map(|i| cos_pi_rat(&Rational::new(BigInt::from(2 * i), BigInt::from(grid)), wp))
        .collect();
    let twice: Vec<Rational> = p.coeffs.iter().map(|c| c * rat(2, 1)).collect();
    let mut min: Option<(RealBall, u64)> = None;
    let mut certified = 0;
    for i in 0..grid {
        let mut v = RealBall::from_rational(&p.coeffs[0], wp);
        for (s, c) in twice.iter().enumerate().skip(1) {
            let idx = (s as u64 * i) % grid;
            v = v.add_ball(&cos_table[idx as usize].mul_rational(c));
        }
        if v.certainly_negative() {
            return Err(Error::InvariantViolation(format!(
                "P_{j} is negative at grid point {i}/{grid}: {v}"
            )));
        }
        if v.certainly_nonneg() {
            certified += 1;
        }
        if min.as_ref().is_none_or(|(m, _)| v.mid() < m.mid()) {
            min = Some((v, i));
        }
    }
    let (min, argmin) = min.expect("grid is nonempty");
    Ok(NonnegReport {
        index: j,
        grid,
        min: min.with_prec(prec),
        argmin,
        certified,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhiBound {
    /// `phi(x) >= 1 - c x^2` on `[-gamma, gamma]`.
    #[serde(with = "rational")]
    pub c: Rational,
    #[serde(with = "rational")]
    pub gamma: Rational,
    /// `floor(1/gamma) + 1`, so that `1/j <= gamma` for `j >= j0`.
    pub j0: u64,
    /// Leaf intervals used by the Bernstein certificate.
    pub leaves: usize,
}

impl PhiBound {
    /// Re-run the exact certificate.
    pub fn verify(&self) -> bool {
        certify_phi_bound(&self.c, &self.gamma).is_some()
    }
}

fn certify_phi_bound(c: &Rational, gamma: &Rational) -> Option<usize> {
    let quad = Poly(vec![Rational::one(), Rational::zero(), -c.clone()]);
    let mut leaves = 0;
    for (lo, hi, p) in &phi_pieces().pieces {
        if lo >= gamma {
            break;
        }
        let top = if hi < gamma { hi } else { gamma };
        leaves += p.sub(&quad).certify_nonneg(lo, top, 24)?;
    }
    Some(leaves)
}

/// Smallest integer `c` (starting from the second-order requirement `-phi''(0)/2`)
/// and, for it, the largest `gamma` on a 1/100 grid inside `(0, 1/3)` with a
/// certified `phi(x) >= 1 - c x^2` on `[-gamma, gamma]`.
pub fn derive_phi_bound() -> PhiBound {
    let seed = (-phi_second_derivative_at_zero() / rat(2, 1)).ceil();
    let mut c = seed;
    loop {
        for k in (1..=33).rev() {
            let gamma = rat(k, 100);
            if let Some(leaves) = certify_phi_bound(&c, &gamma) {
                let j0 = (gamma.recip()).floor().to_integer();
                let j0: u64 = (j0 + 1u32).try_into().expect("small");
                return PhiBound {
                    c,
                    gamma,
                    j0,
                    leaves,
                };
            }
        }
        c += Rational::one();
    }
}

/// Indices `j` in `j0..=jmax` where `phi(1/j) >= 1 - c/j^2` fails.
pub fn first_coeff_scan(bound: &PhiBound, jmax: u64) -> Vec<u64> {
    (bound.j0..=jmax)
        .filter(|&j| {
            let p = kahane_poly(j).expect("j >= 1");
            let rhs = Rational::one() - &bound.c / Rational::from_integer(BigInt::from(j * j));
            p.coeff(1) < rhs
        })
        .collect()
}

/// Degree check `deg P_j <= floor(j/3)` for `j = 1..=jmax`, without building the polynomials.
pub fn degree_scan(jmax: u64) -> Vec<u64> {
    (1..=jmax)
        .filter(|&j| {
            let d = (j - 1) / 3;
            let next = Rational::new(BigInt::from(d + 1), BigInt::from(j));
            d > j / 3 || !kahane_phi(&next).is_zero()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::Dyadic;
    use proptest::prelude::*;

    // hand-derived closed form, used as an independent reference
    fn phi_reference(x: &Rational) -> Rational {
        let x = x.abs();
        if x <= rat(1, 6) {
            rat(1, 1) - rat(54, 1) * &x * &x + rat(162, 1) * &x * &x * &x
        } else if x <= rat(1, 3) {
            let u = rat(2, 1) - rat(6, 1) * &x;
            &u * &u * &u / rat(4, 1)
        } else {
            Rational::zero()
        }
    }

    #[test]
    fn normalization_and_values() {
        assert_eq!(phi_normalization(), rat(9, 1));
        assert_eq!(kahane_phi(&rat(0, 1)), rat(1, 1));
        assert_eq!(kahane_phi(&rat(1, 3)), rat(0, 1));
        assert_eq!(kahane_phi(&rat(1, 6)), rat(1, 4));
        assert_eq!(triangle_self_convolution(&rat(1, 6)), rat(1, 36));
        assert_eq!(phi_second_derivative_at_zero(), rat(-108, 1));
    }

    #[test]
    fn pieces_match_reference() {
        let p = phi_pieces();
        assert_eq!(
            p.pieces[0].2,
            Poly(vec![rat(1, 1), rat(0, 1), rat(-54, 1), rat(162, 1)])
        );
        for i in -50..=50 {
            let x = rat(i, 120);
            assert_eq!(kahane_phi(&x), phi_reference(&x), "x={x}");
        }
    }

    #[test]
    fn poly_examples() {
        let p7 = kahane_poly(7).unwrap();
        assert_eq!(p7.degree(), 2);
        assert_eq!(p7.spectrum().len(), 5);
        let p2 = kahane_poly(2).unwrap();
        assert_eq!(p2.degree(), 0);
        assert_eq!(p2.eval(&rat(1, 5), 64), RealBall::one(64));
        let p12 = kahane_poly(12).unwrap();
        assert_eq!(p12.coeff(1), kahane_phi(&rat(1, 12)));
        assert_eq!(p12.coeff(0), rat(1, 1));
    }

    #[test]
    fn nonnegativity_on_grids() {
        for (j, grid) in [(7, 64), (2, 8), (30, 256), (7, 256), (2, 256)] {
            let r = kahane_nonneg_check(j, grid, 128).unwrap();
            assert!(!r.min.certainly_negative());
            assert!(r.min.upper() >= Dyadic::zero());
        }
        assert!(kahane_nonneg_check(30, 100, 128).is_err());
    }

    #[test]
    fn phi_bound_certificate() {
        let b = derive_phi_bound();
        assert_eq!(b.c, rat(54, 1));
        assert_eq!(b.gamma, rat(33, 100));
        assert_eq!(b.j0, 4);
        assert!(b.verify());
        assert!(certify_phi_bound(&rat(53, 1), &rat(1, 100)).is_none());
        assert!(first_coeff_scan(&b, 200).is_empty());
    }

    #[test]
    fn degrees_small() {
        assert!(degree_scan(2000).is_empty());
    }

    proptest! {
        #[test]
        fn phi_matches_direct_convolution(a in -400i64..400, q in 1i64..200) {
            let x = rat(a, q * 3);
            prop_assert_eq!(kahane_phi(&x), rat(9, 1) * triangle_self_convolution(&x));
        }

        #[test]
        fn phi_even_and_nonincreasing(a in 0i64..1000, b in 0i64..1000) {
            let (x, y) = (rat(a.min(b), 3000), rat(a.max(b), 3000));
            prop_assert_eq!(kahane_phi(&x), kahane_phi(&-x.clone()));
            prop_assert!(kahane_phi(&x) >= kahane_phi(&y));
        }
    }
}
