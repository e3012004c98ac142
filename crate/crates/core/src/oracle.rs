//! Brute-force validators: literal expansion of partial products and
//! trapezoidal quadrature, independent of the closed-form coefficient paths.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{fejer_coeff_direct, fejer_eval, kahane_poly};
use crate::numeric::serde_fmt::bigint;
use crate::numeric::{
    ball_from_decimal, ball_to_decimal, cos_pi_rat, frac_part, BigInt, Rational, RealBall,
};
use crate::riesz::RieszSpec;

/// Largest number of terms a literal expansion may produce.
pub const EXPANSION_LIMIT: usize = 10_000_000;

/// Decimal digits written per CSV value.
pub const CSV_DIGITS: usize = 40;

/// Real coefficients on a sparse set of frequencies; absent keys are zero.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SparseSpectrum {
    coeffs: BTreeMap<BigInt, RealBall>,
    /// Frequencies written more than once during expansion.
    collisions: usize,
}

impl SparseSpectrum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_map(coeffs: BTreeMap<BigInt, RealBall>) -> Self {
        SparseSpectrum {
            coeffs,
            collisions: 0,
        }
    }

    pub fn insert(&mut self, n: BigInt, c: RealBall) {
        self.coeffs.insert(n, c);
    }

    pub fn get(&self, n: &BigInt) -> Option<&RealBall> {
        self.coeffs.get(n)
    }

    /// Coefficient at `n`, zero off the support.
    pub fn coeff(&self, n: &BigInt, prec: u32) -> RealBall {
        self.coeffs
            .get(n)
            .cloned()
            .unwrap_or_else(|| RealBall::zero(prec))
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn collisions(&self) -> usize {
        self.collisions
    }

    pub fn iter(&self) -> impl Iterator<Item = (&BigInt, &RealBall)> {
        self.coeffs.iter()
    }

    pub fn frequencies(&self) -> impl Iterator<Item = &BigInt> {
        self.coeffs.keys()
    }

    /// Largest `|n|` on the support.
    pub fn bandwidth(&self) -> BigInt {
        self.coeffs
            .keys()
            .map(|n| n.abs())
            .max()
            .unwrap_or_default()
    }

    /// Whether the coefficients at `n` and `-n` overlap for every `n`.
    pub fn is_symmetric(&self) -> bool {
        self.coeffs
            .iter()
            .all(|(n, c)| self.coeffs.get(&-n).is_some_and(|d| c.overlaps(d)))
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["frequency", "value", "radius"])
            .map_err(csv_err)?;
        for (n, c) in &self.coeffs {
            let (v, r) = ball_to_decimal(c, CSV_DIGITS);
            out.write_record([n.to_string(), v, r]).map_err(csv_err)?;
        }
        out.flush().map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn read_csv<R: Read>(r: R, prec: u32) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let mut coeffs = BTreeMap::new();
        for rec in rd.records() {
            let rec = rec.map_err(csv_err)?;
            if rec.len() != 3 {
                return Err(Error::Parse(format!(
                    "expected 3 fields, got {}",
                    rec.len()
                )));
            }
            let n: BigInt = rec[0]
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad frequency {:?}", &rec[0])))?;
            let c = ball_from_decimal(rec[1].trim(), rec[2].trim(), prec)?;
            if coeffs.insert(n.clone(), c).is_some() {
                return Err(Error::Parse(format!("duplicate frequency {n}")));
            }
        }
        Ok(SparseSpectrum::from_map(coeffs))
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

/// One factor `P(e^{2 i pi n t})` of a product, with the spectrum of `P`.
#[derive(Clone, Debug, PartialEq)]
pub struct Factor {
    pub frequency: BigInt,
    pub spectrum: Vec<(i64, RealBall)>,
}

/// Convolve the factor spectra placed at `j * n`, term by term.
pub fn expand_factors(factors: &[Factor], prec: u32) -> Result<SparseSpectrum> {
    let size = factors
        .iter()
        .try_fold(1usize, |acc, f| acc.checked_mul(f.spectrum.len()))
        .filter(|&s| s <= EXPANSION_LIMIT);
    if size.is_none() {
        return Err(Error::Guard {
            width: factors
                .iter()
                .map(|f| f.spectrum.len())
                .product::<usize>()
                .max(EXPANSION_LIMIT + 1),
            limit: EXPANSION_LIMIT,
        });
    }
    let mut cur: BTreeMap<BigInt, RealBall> = BTreeMap::new();
    cur.insert(BigInt::zero(), RealBall::one(prec));
    let mut collisions = 0;
    for f in factors {
        let mut next: BTreeMap<BigInt, RealBall> = BTreeMap::new();
        for (freq, c) in &cur {
            for (j, p) in &f.spectrum {
                let key = freq + &f.frequency * *j;
                let term = c.mul_ball(p);
                match next.get_mut(&key) {
                    Some(v) => {
                        collisions += 1;
                        *v = v.add_ball(&term);
                    }
                    None => {
                        next.insert(key, term);
                    }
                }
            }
        }
        cur = next;
    }
    Ok(SparseSpectrum {
        coeffs: cur,
        collisions,
    })
}

/// Literal expansion of the first `horizon` factors of a Riesz product, using
/// the direct sine-sum kernel coefficients at twice the working precision.
pub fn expand_product(spec: &RieszSpec, horizon: usize, prec: u32) -> Result<SparseSpectrum> {
    if horizon > spec.len() {
        return Err(Error::InvalidInput(format!(
            "horizon {horizon} exceeds the spec length {}",
            spec.len()
        )));
    }
    let op = 2 * prec;
    let factors = (1..=horizon)
        .filter(|&k| spec.order(k) > 0)
        .map(|k| {
            let m = spec.order(k);
            Factor {
                frequency: spec.seq().term(k).clone(),
                spectrum: (-(m as i64)..=m as i64)
                    .map(|j| (j, fejer_coeff_direct(m, j, op)))
                    .collect(),
            }
        })
        .collect::<Vec<_>>();
    expand_factors(&factors, op)
}

/// Factors `(n_k, j_k)` of a product of `P_{j_k}(e^{2 i pi n_k t})` built from the
/// exact-rational kernels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KahanePlan {
    pub factors: Vec<KahaneFactor>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KahaneFactor {
    #[serde(with = "bigint")]
    pub frequency: BigInt,
    pub index: u64,
}

pub fn expand_kahane(plan: &KahanePlan, prec: u32) -> Result<SparseSpectrum> {
    let factors = plan
        .factors
        .iter()
        .map(|f| {
            let p = kahane_poly(f.index)?;
            Ok(Factor {
                frequency: f.frequency.clone(),
                spectrum: p
                    .spectrum()
                    .into_iter()
                    .map(|(s, c)| (s, RealBall::from_rational(&c, 2 * prec)))
                    .collect(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    expand_factors(&factors, 2 * prec)
}

/// `t -> prod_k P_k(e^{2 i pi n_k t})` for the active factors of a spec.
pub fn riesz_evaluator(spec: &RieszSpec, prec: u32) -> impl Fn(&Rational) -> RealBall + '_ {
    move |t| {
        spec.active().iter().fold(RealBall::one(prec), |acc, &k| {
            let x = frac_part(&(t * Rational::from_integer(spec.seq().term(k).clone())));
            acc.mul_ball(&fejer_eval(spec.order(k), &x, prec))
        })
    }
}

/// Smallest node count that makes the trapezoidal rule exact at `n` for a
/// trigonometric polynomial of the given bandwidth.
pub fn min_nodes(bandwidth: &BigInt, n: &BigInt) -> BigInt {
    bandwidth + n.abs() + 1
}

/// Trapezoidal approximations of the coefficients of a real, even trigonometric
/// polynomial `Q` at several frequencies, sharing the node samples.
///
/// Exact up to ball radius when `nodes > bandwidth + |n|` for every requested `n`.
pub fn quadrature_table<F: Fn(&Rational) -> RealBall>(
    q: F,
    bandwidth: &BigInt,
    freqs: &[BigInt],
    nodes: u64,
    prec: u32,
) -> Result<SparseSpectrum> {
    if nodes == 0 {
        return Err(Error::InvalidInput("at least one node is required".into()));
    }
    let nb = BigInt::from(nodes);
    for n in freqs {
        if nb < min_nodes(bandwidth, n) {
            return Err(Error::InvalidInput(format!(
                "{nodes} nodes cannot resolve frequency {n} at bandwidth {bandwidth}"
            )));
        }
    }
    let wp = prec + 16;
    let raw: Vec<RealBall> = (0..nodes)
        .map(|i| q(&Rational::new(BigInt::from(i), nb.clone())))
        .collect();
    // nodes i and N - i share their cosine, so fold them
    let half = nodes / 2;
    let samples: Vec<RealBall> = (0..=half)
        .map(|i| {
            let j = (nodes - i) % nodes;
            if i == 0 || i == j {
                raw[i as usize].clone()
            } else {
                raw[i as usize].add_ball(&raw[j as usize])
            }
        })
        .collect();
    // cos(2 pi r / N) for r = 0..N
    let cosines: Vec<RealBall> = (0..nodes)
        .map(|r| cos_pi_rat(&Rational::new(BigInt::from(2 * r), nb.clone()), wp))
        .collect();
    let mut out = SparseSpectrum::new();
    for n in freqs {
        let step = n.mod_floor(&nb).to_u64().unwrap_or(0);
        let mut acc = RealBall::zero(wp);
        let mut idx = 0u64;
        for s in &samples {
            acc = acc.add_ball(&s.mul_ball(&cosines[idx as usize]));
            idx = (idx + step) % nodes;
        }
        out.insert(n.clone(), acc.div_u64(nodes).with_prec(prec));
    }
    Ok(out)
}

pub fn quadrature_coeff<F: Fn(&Rational) -> RealBall>(
    q: F,
    bandwidth: &BigInt,
    n: &BigInt,
    nodes: u64,
    prec: u32,
) -> Result<RealBall> {
    let t = quadrature_table(q, bandwidth, std::slice::from_ref(n), nodes, prec)?;
    Ok(t.coeff(n, prec))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub common: usize,
    pub only_left: usize,
    pub only_right: usize,
    /// Largest `|mid_a - mid_b|`.
    pub max_abs_diff: f64,
    /// Largest distance between non-overlapping balls.
    pub max_gap: f64,
    #[serde(with = "opt_bigint")]
    pub worst: Option<BigInt>,
    pub tol: f64,
    pub pass: bool,
}

mod opt_bigint {
    use super::BigInt;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<BigInt>, s: S) -> Result<S::Ok, S::Error> {
        v.as_ref().map(|n| n.to_string()).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<BigInt>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|s| s.parse().map_err(serde::de::Error::custom))
            .transpose()
    }
}

/// Pairwise comparison over the common frequencies. A key passes when the two
/// balls overlap or their distance is at most `tol`.
pub fn compare(a: &SparseSpectrum, b: &SparseSpectrum, tol: f64) -> Result<CompareReport> {
    let mut common = 0;
    let mut max_abs_diff = 0.0f64;
    let mut max_gap = 0.0f64;
    let mut worst = None;
    let mut pass = true;
    for (n, x) in a.iter() {
        let Some(y) = b.get(n) else { continue };
        common += 1;
        let diff = x.sub_ball(y);
        let mid = diff.mid().to_f64().abs();
        if mid > max_abs_diff || worst.is_none() {
            max_abs_diff = max_abs_diff.max(mid);
            worst = Some(n.clone());
        }
        if !diff.contains_zero() {
            // distance from zero to the difference ball
            let gap = diff.abs().lower().to_f64();
            max_gap = max_gap.max(gap);
            if gap > tol {
                pass = false;
            }
        }
    }
    if common == 0 {
        return Err(Error::InvalidInput("the tables share no frequency".into()));
    }
    Ok(CompareReport {
        common,
        only_left: a.len() - common,
        only_right: b.len() - common,
        max_abs_diff,
        max_gap,
        worst,
        tol,
        pass,
    })
}
