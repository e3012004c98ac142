//! Dense univariate polynomials and piecewise polynomials over exact rationals.

use num_traits::{One, Signed, Zero};

use crate::numeric::{BigInt, Rational};

/// Coefficients from the constant term upward.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly(pub Vec<Rational>);

impl Poly {
    pub fn zero() -> Self {
        Poly(Vec::new())
    }

    pub fn constant(c: Rational) -> Self {
        Poly(vec![c]).trimmed()
    }

    /// `a + b x`
    pub fn linear(a: Rational, b: Rational) -> Self {
        Poly(vec![a, b]).trimmed()
    }

    fn trimmed(mut self) -> Self {
        while self.0.last().is_some_and(Zero::is_zero) {
            self.0.pop();
        }
        self
    }

    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn coeff(&self, i: usize) -> Rational {
        self.0.get(i).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        self.0
            .iter()
            .rev()
            .fold(Rational::zero(), |acc, c| acc * x + c)
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let n = self.0.len().max(o.0.len());
        Poly((0..n).map(|i| self.coeff(i) + o.coeff(i)).collect()).trimmed()
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        self.add(&o.scale(&-Rational::one()))
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        Poly(self.0.iter().map(|a| a * c).collect()).trimmed()
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        if self.0.is_empty() || o.0.is_empty() {
            return Poly::zero();
        }
        let mut out = vec![Rational::zero(); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in o.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly(out).trimmed()
    }

    pub fn derivative(&self) -> Poly {
        Poly(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| c * Rational::from_integer(BigInt::from(i)))
                .collect(),
        )
        .trimmed()
    }

    /// Antiderivative vanishing at 0.
    pub fn integral(&self) -> Poly {
        let mut out = vec![Rational::zero()];
        for (i, c) in self.0.iter().enumerate() {
            out.push(c / Rational::from_integer(BigInt::from(i + 1)));
        }
        Poly(out).trimmed()
    }

    /// `x -> p(a + b x)`
    pub fn compose_affine(&self, a: &Rational, b: &Rational) -> Poly {
        let lin = Poly::linear(a.clone(), b.clone());
        self.0.iter().rev().fold(Poly::zero(), |acc, c| {
            acc.mul(&lin).add(&Poly::constant(c.clone()))
        })
    }

    /// Lagrange interpolation through the given points.
    pub fn interpolate(points: &[(Rational, Rational)]) -> Poly {
        let mut out = Poly::zero();
        for (i, (xi, yi)) in points.iter().enumerate() {
            let mut basis = Poly::constant(Rational::one());
            let mut denom = Rational::one();
            for (j, (xj, _)) in points.iter().enumerate() {
                if i != j {
                    basis = basis.mul(&Poly::linear(-xj.clone(), Rational::one()));
                    denom *= xi - xj;
                }
            }
            out = out.add(&basis.scale(&(yi / denom)));
        }
        out
    }

    /// Coefficients in the Bernstein basis of degree `deg(p)` on `[lo, hi]`.
    pub fn bernstein(&self, lo: &Rational, hi: &Rational) -> Vec<Rational> {
        let g = self.compose_affine(lo, &(hi - lo));
        let n = g.degree().unwrap_or(0);
        let binom = |n: usize, k: usize| -> Rational {
            let mut r = Rational::one();
            for i in 0..k {
                r = r * Rational::from_integer(BigInt::from(n - i))
                    / Rational::from_integer(BigInt::from(i + 1));
            }
            r
        };
        (0..=n)
            .map(|i| {
                (0..=i)
                    .map(|k| g.coeff(k) * binom(i, k) / binom(n, k))
                    .fold(Rational::zero(), |a, b| a + b)
            })
            .collect()
    }

    /// Certify `p >= 0` on `[lo, hi]` by Bernstein coefficients with bisection.
    ///
    /// Returns `Some(pieces)` with the number of leaf intervals used, or `None` when
    /// a negative value is found or the depth budget runs out.
    pub fn certify_nonneg(&self, lo: &Rational, hi: &Rational, depth: u32) -> Option<usize> {
        if self.eval(lo).is_negative() || self.eval(hi).is_negative() {
            return None;
        }
        let b = self.bernstein(lo, hi);
        if b.iter().all(|c| !c.is_negative()) {
            return Some(1);
        }
        if depth == 0 {
            return None;
        }
        let mid = (lo + hi) / Rational::from_integer(BigInt::from(2));
        let l = self.certify_nonneg(lo, &mid, depth - 1)?;
        let r = self.certify_nonneg(&mid, hi, depth - 1)?;
        Some(l + r)
    }
}

/// A function given by polynomials on consecutive closed intervals, zero elsewhere.
#[derive(Clone, Debug, PartialEq)]
pub struct Piecewise {
    /// `(lo, hi, poly)` with `poly` in the absolute variable.
    pub pieces: Vec<(Rational, Rational, Poly)>,
}

impl Piecewise {
    pub fn eval(&self, x: &Rational) -> Rational {
        // the right-most piece wins at shared breakpoints; pieces agree there for
        // continuous functions
        self.pieces
            .iter()
            .rev()
            .find(|(lo, hi, _)| lo <= x && x <= hi)
            .map(|(_, _, p)| p.eval(x))
            .unwrap_or_else(Rational::zero)
    }

    fn breakpoints(&self) -> Vec<Rational> {
        let mut v: Vec<Rational> = self
            .pieces
            .iter()
            .flat_map(|(a, b, _)| [a.clone(), b.clone()])
            .collect();
        v.sort();
        v.dedup();
        v
    }

    fn piece_at(&self, x: &Rational) -> Option<&Poly> {
        // strict interior point of some piece
        self.pieces
            .iter()
            .find(|(lo, hi, _)| lo < x && x < hi)
            .map(|(_, _, p)| p)
    }

    /// `(f * g)(x) = int f(t) g(x - t) dt`, exactly.
    pub fn convolve_at(&self, g: &Piecewise, x: &Rational) -> Rational {
        let mut cuts = self.breakpoints();
        cuts.extend(g.breakpoints().into_iter().map(|b| x - b));
        cuts.sort();
        cuts.dedup();
        let two = Rational::from_integer(BigInt::from(2));
        let mut total = Rational::zero();
        for w in cuts.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            let m = (a + b) / &two;
            let (Some(pf), Some(pg)) = (self.piece_at(&m), g.piece_at(&(x - &m))) else {
                continue;
            };
            // g(x - t) as a polynomial in t
            let gt = pg.compose_affine(x, &-Rational::one());
            let prim = pf.mul(&gt).integral();
            total += prim.eval(b) - prim.eval(a);
        }
        total
    }

    pub fn derivative(&self) -> Piecewise {
        Piecewise {
            pieces: self
                .pieces
                .iter()
                .map(|(a, b, p)| (a.clone(), b.clone(), p.derivative()))
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rat;

    #[test]
    fn arithmetic() {
        let p = Poly(vec![rat(1, 1), rat(-2, 1), rat(1, 1)]); // (x-1)^2
        assert_eq!(p.eval(&rat(3, 1)), rat(4, 1));
        assert_eq!(p.derivative(), Poly(vec![rat(-2, 1), rat(2, 1)]));
        assert_eq!(p.integral().eval(&rat(1, 1)), rat(1, 3));
        let q = p.compose_affine(&rat(1, 1), &rat(1, 1)); // x^2
        assert_eq!(q, Poly(vec![rat(0, 1), rat(0, 1), rat(1, 1)]));
    }

    #[test]
    fn interpolation_recovers_cubic() {
        let c = Poly(vec![rat(1, 1), rat(0, 1), rat(-54, 1), rat(162, 1)]);
        let pts: Vec<_> = (0..4).map(|i| (rat(i, 7), c.eval(&rat(i, 7)))).collect();
        assert_eq!(Poly::interpolate(&pts), c);
    }

    #[test]
    fn bernstein_certification() {
        let p = Poly(vec![rat(1, 1), rat(-2, 1), rat(1, 1)]);
        assert!(p.certify_nonneg(&rat(0, 1), &rat(2, 1), 20).is_some());
        let q = p.sub(&Poly::constant(rat(1, 100)));
        assert!(q.certify_nonneg(&rat(0, 1), &rat(3, 1), 20).is_none());
        // (x - 1)^2 + 1/1000 needs subdivision near the minimum
        let r = p.add(&Poly::constant(rat(1, 1000)));
        assert!(r.certify_nonneg(&rat(-5, 1), &rat(5, 1), 30).unwrap() > 1);
    }

    #[test]
    fn box_self_convolution_is_triangle() {
        let one = Piecewise {
            pieces: vec![(rat(0, 1), rat(1, 1), Poly::constant(rat(1, 1)))],
        };
        assert_eq!(one.convolve_at(&one, &rat(1, 1)), rat(1, 1));
        assert_eq!(one.convolve_at(&one, &rat(1, 2)), rat(1, 2));
        assert_eq!(one.convolve_at(&one, &rat(3, 2)), rat(1, 2));
        assert_eq!(one.convolve_at(&one, &rat(5, 2)), rat(0, 1));
    }
}
