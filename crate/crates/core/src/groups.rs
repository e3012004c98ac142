//! Diagnostics for the subgroups `G_p((n_k))` of circle points `lambda` with
//! `sum_k |lambda^{n_k} - 1|^p < inf` (or `|lambda^{n_k} - 1| -> 0` for `p = inf`).
//!
//! Everything here is finite-horizon evidence. Nothing asserts membership.

use std::fmt;
use std::str::FromStr;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::serde_fmt::{ball, ball_vec, bigint, rational};
use crate::numeric::{
    circle_dist, circle_frac_exact, frac_dist, int, nearest_int, rat, AngleRepr, BigInt, Rational,
    RealBall, UnimodularPoint,
};
use crate::sequences::{erdos_taylor, IndexedSequence};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Exponent {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "2")]
    Two,
    #[serde(rename = "inf")]
    Inf,
}

impl FromStr for Exponent {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "1" => Ok(Exponent::One),
            "2" => Ok(Exponent::Two),
            "inf" | "infinity" => Ok(Exponent::Inf),
            _ => Err(Error::Parse(format!(
                "exponent must be 1, 2 or inf, got {s:?}"
            ))),
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Exponent::One => "1",
            Exponent::Two => "2",
            Exponent::Inf => "inf",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupScan {
    pub theta: AngleRepr,
    pub exponent: Exponent,
    pub horizon: usize,
    /// `|lambda^{n_k} - 1|` for `k = 1..=horizon`.
    #[serde(with = "ball_vec")]
    pub distances: Vec<RealBall>,
    /// Partial sums of `distances^p`, or the distances themselves for `p = inf`.
    #[serde(with = "ball_vec")]
    pub values: Vec<RealBall>,
}

pub fn gp_partial_sums(
    theta: &UnimodularPoint,
    seq: &IndexedSequence,
    exponent: Exponent,
    horizon: usize,
    prec: u32,
) -> Result<GroupScan> {
    if horizon > seq.len() {
        return Err(Error::InvalidInput(format!(
            "horizon {horizon} exceeds the {} available terms",
            seq.len()
        )));
    }
    let distances = (1..=horizon)
        .map(|k| circle_dist(seq.term(k), theta, prec))
        .collect::<Result<Vec<_>>>()?;
    let values = match exponent {
        Exponent::Inf => distances.clone(),
        Exponent::One | Exponent::Two => {
            let mut acc = RealBall::zero(prec);
            distances
                .iter()
                .map(|d| {
                    let t = if exponent == Exponent::Two {
                        d.sqr()
                    } else {
                        d.clone()
                    };
                    acc = acc.add_ball(&t);
                    acc.clone()
                })
                .collect()
        }
    };
    Ok(GroupScan {
        theta: theta.into(),
        exponent,
        horizon,
        distances,
        values,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Holds,
    Undecided,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EtStep {
    pub k: usize,
    #[serde(with = "ball")]
    pub distance: RealBall,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EtReport {
    #[serde(with = "rational")]
    pub theta: Rational,
    /// `|lambda - 1| / 2`.
    #[serde(with = "ball")]
    pub epsilon: RealBall,
    pub steps: Vec<EtStep>,
    pub holds: usize,
    pub undecided: usize,
    /// `sum_{k <= K} |lambda^{n_k} - 1|`.
    #[serde(with = "ball")]
    pub partial_sum: RealBall,
}

/// For the sequence `n_1 = 1`, `n_{k+1} = k n_k + 1`, with `eps = |lambda - 1|/2`:
/// for each `k <= K`, either `|lambda^{n_k} - 1| >= eps/k` or `|lambda^{n_{k+1}} - 1| >= eps`.
///
/// A step where both alternatives are certainly false is an invariant violation.
pub fn et_divergence_check(theta: &Rational, horizon: usize, prec: u32) -> Result<EtReport> {
    if !theta.is_positive() || theta >= &Rational::one() {
        return Err(Error::InvalidInput("theta must lie in (0, 1)".into()));
    }
    let seq = erdos_taylor(horizon + 1)?;
    let point = UnimodularPoint::exact(theta.clone());
    let eps = circle_dist(&BigInt::one(), &point, prec)?.div_u64(2);
    let dist = (1..=horizon + 1)
        .map(|k| circle_dist(seq.term(k), &point, prec))
        .collect::<Result<Vec<_>>>()?;
    let mut steps = Vec::with_capacity(horizon);
    let (mut holds, mut undecided) = (0, 0);
    for k in 1..=horizon {
        let a = &dist[k - 1];
        let b = &dist[k];
        let small = eps.div_u64(k as u64);
        let verdict = if a.certainly_ge(&small) || b.certainly_ge(&eps) {
            holds += 1;
            Verdict::Holds
        } else if small.certainly_gt(a) && eps.certainly_gt(b) {
            return Err(Error::InvariantViolation(format!(
                "both alternatives fail at k = {k} for theta = {theta}"
            )));
        } else {
            undecided += 1;
            Verdict::Undecided
        };
        steps.push(EtStep {
            k,
            distance: a.clone(),
            verdict,
        });
    }
    let partial_sum = dist[..horizon]
        .iter()
        .fold(RealBall::zero(prec), |acc, d| acc.add_ball(d));
    Ok(EtReport {
        theta: theta.clone(),
        epsilon: eps,
        steps,
        holds,
        undecided,
        partial_sum,
    })
}

/// The constant in `|lambda^{p_l} - 1| <= C p_l / p_{l+1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WitnessConstant {
    /// Read as a bound on the fractional part: `{p_l theta} <= c p_l / p_{l+1}`.
    Fractional(#[serde(with = "rational")] Rational),
    /// `C = 2 pi`: enforced through `{p_l theta} <= p_l / p_{l+1}`, since
    /// `|e^{2 i pi x} - 1| <= 2 pi {x}`, and re-checked on the distance itself.
    TwoPi,
}

impl WitnessConstant {
    fn fractional_factor(&self) -> Rational {
        match self {
            WitnessConstant::Fractional(c) => c.clone(),
            WitnessConstant::TwoPi => Rational::one(),
        }
    }
}

impl FromStr for WitnessConstant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        if t == "2pi" || t == "2*pi" {
            return Ok(WitnessConstant::TwoPi);
        }
        let c = crate::numeric::parse_rational(&t)?;
        if !c.is_positive() {
            return Err(Error::InvalidInput("the constant must be positive".into()));
        }
        Ok(WitnessConstant::Fractional(c))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessEntry {
    pub level: usize,
    #[serde(with = "bigint")]
    pub base: BigInt,
    #[serde(with = "bigint")]
    pub next_base: BigInt,
    /// `{p_l theta}`.
    #[serde(with = "rational")]
    pub frac: Rational,
    /// Bound on `{p_l theta}`.
    #[serde(with = "rational")]
    pub bound: Rational,
    /// `|lambda^{p_l} - 1|`.
    #[serde(with = "ball")]
    pub distance: RealBall,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessCertificate {
    #[serde(with = "rational")]
    pub theta: Rational,
    pub constant: WitnessConstant,
    /// Final refinement interval, `theta` is its midpoint.
    #[serde(with = "rational")]
    pub lo: Rational,
    #[serde(with = "rational")]
    pub hi: Rational,
    pub entries: Vec<WitnessEntry>,
}

impl WitnessCertificate {
    /// Re-check every listed inequality from scratch.
    pub fn verify(&self, prec: u32) -> Result<()> {
        if !self.theta.is_positive() || self.theta >= Rational::one() {
            return Err(Error::InvariantViolation("theta outside (0, 1)".into()));
        }
        let point = UnimodularPoint::exact(self.theta.clone());
        for e in &self.entries {
            let frac = circle_frac_exact(&e.base, &self.theta);
            let bound = self.constant.fractional_factor()
                * Rational::new(e.base.clone(), e.next_base.clone());
            if frac != e.frac || bound != e.bound || frac > bound {
                return Err(Error::InvariantViolation(format!(
                    "fractional bound fails at level {}",
                    e.level
                )));
            }
            if self.constant == WitnessConstant::TwoPi {
                let d = circle_dist(&e.base, &point, prec)?;
                let rhs = RealBall::pi(prec)
                    .mul_int(&int(2))
                    .mul_rational(&Rational::new(e.base.clone(), e.next_base.clone()));
                if !rhs.certainly_ge(&d) {
                    return Err(Error::InvariantViolation(format!(
                        "distance bound fails at level {}",
                        e.level
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Nested-interval search for one angle with `{p_l theta} <= c p_l / p_{l+1}` at
/// levels `first_level .. first_level + depth`.
///
/// At each level the admissible set is a union of intervals around the points
/// `n/p_l`; the piece closest to the current midpoint is kept, ties going to the
/// smaller angle. `bases` holds `p_1, p_2, ...`.
pub fn witness_search(
    bases: &[BigInt],
    first_level: usize,
    constant: &WitnessConstant,
    depth: usize,
    prec: u32,
) -> Result<WitnessCertificate> {
    if first_level == 0 || depth == 0 {
        return Err(Error::InvalidInput(
            "levels are 1-based and depth must be positive".into(),
        ));
    }
    if first_level + depth > bases.len() {
        return Err(Error::InvalidInput(format!(
            "depth {depth} from level {first_level} needs {} bases",
            first_level + depth
        )));
    }
    let half = rat(1, 2);
    let mut lo = Rational::zero();
    let mut hi = Rational::one();
    for l in first_level..first_level + depth {
        let p = Rational::from_integer(bases[l - 1].clone());
        let bound =
            constant.fractional_factor() * Rational::new(bases[l - 1].clone(), bases[l].clone());
        if bound >= half {
            continue;
        }
        let mid = (&lo + &hi) * &half;
        let n0 = nearest_int(&(&mid * &p));
        let mut best: Option<(Rational, Rational, Rational)> = None;
        for dn in -2i64..=2 {
            let n = Rational::from_integer(&n0 + dn);
            let a = (&n - &bound) / &p;
            let b = (&n + &bound) / &p;
            let a = if a > lo { a } else { lo.clone() };
            let b = if b < hi { b } else { hi.clone() };
            if a > b {
                continue;
            }
            let gap = if mid < a {
                &a - &mid
            } else if mid > b {
                &mid - &b
            } else {
                Rational::zero()
            };
            // candidates are visited in increasing order, so ties keep the smaller one
            if best.as_ref().is_none_or(|(g, _, _)| &gap < g) {
                best = Some((gap, a, b));
            }
        }
        let (_, a, b) = best.ok_or(Error::EmptyRefinement { step: l })?;
        lo = a;
        hi = b;
    }
    let theta = (&lo + &hi) * &half;
    if theta.is_zero() {
        return Err(Error::EmptyRefinement {
            step: first_level + depth - 1,
        });
    }
    let point = UnimodularPoint::exact(theta.clone());
    let entries = (first_level..first_level + depth)
        .map(|l| {
            let base = bases[l - 1].clone();
            let next_base = bases[l].clone();
            Ok(WitnessEntry {
                level: l,
                frac: circle_frac_exact(&base, &theta),
                bound: constant.fractional_factor()
                    * Rational::new(base.clone(), next_base.clone()),
                distance: circle_dist(&base, &point, prec)?,
                base,
                next_base,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let cert = WitnessCertificate {
        theta,
        constant: constant.clone(),
        lo,
        hi,
        entries,
    };
    cert.verify(prec)?;
    Ok(cert)
}

/// Running sums over blocks of `sum_{j <= l^2} |lambda^{j p_l} - 1|^2`, one per block.
pub fn block_square_series(
    theta: &Rational,
    seq: &IndexedSequence,
    prec: u32,
) -> Result<Vec<(usize, RealBall)>> {
    let blocks = seq
        .blocks()
        .ok_or_else(|| Error::InvalidInput("sequence has no block structure".into()))?;
    let point = UnimodularPoint::exact(theta.clone());
    let mut acc = RealBall::zero(prec);
    let mut out = Vec::with_capacity(blocks.len());
    for b in blocks {
        for k in b.start..=b.end {
            acc = acc.add_ball(&circle_dist(seq.term(k), &point, prec)?.sqr());
        }
        out.push((b.level, acc.clone()));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockScanEntry {
    pub level: usize,
    /// `sum_{j <= r_l} {j theta p_l}^2`, exact.
    #[serde(with = "rational")]
    pub frac_square_sum: Rational,
    /// Contribution of the block to `sum_k |lambda^{n_k} - 1|^2`.
    #[serde(with = "ball")]
    pub increment: RealBall,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleScan {
    #[serde(with = "rational")]
    pub theta: Rational,
    #[serde(with = "ball")]
    pub partial_sum: RealBall,
    pub blocks: Vec<BlockScanEntry>,
    /// Positive increments in at least two of the last three blocks. Heuristic.
    pub growing: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prop7Scan {
    pub horizon: usize,
    pub samples: Vec<SampleScan>,
    pub growing_count: usize,
    pub label: String,
}

/// Per-block quantities `sum_j {j theta p_l}^2` and `p = 2` partial sums for each
/// sampled angle, over blocks ending at or before term `horizon`.
pub fn prop7_negative_scan(
    seq: &IndexedSequence,
    samples: &[Rational],
    horizon: usize,
    prec: u32,
) -> Result<Prop7Scan> {
    let blocks = seq
        .blocks()
        .ok_or_else(|| Error::InvalidInput("sequence has no block structure".into()))?;
    let horizon = horizon.min(seq.len());
    let mut out = Vec::with_capacity(samples.len());
    for theta in samples {
        if frac_dist(theta).is_zero() {
            return Err(Error::InvalidInput(format!(
                "theta = {theta} gives lambda = 1"
            )));
        }
        let point = UnimodularPoint::exact(theta.clone());
        let mut acc = RealBall::zero(prec);
        let mut entries = Vec::new();
        for b in blocks.iter().filter(|b| b.end <= horizon) {
            let mut fsum = Rational::zero();
            let mut inc = RealBall::zero(prec);
            for k in b.start..=b.end {
                let n = seq.term(k);
                let f = circle_frac_exact(n, theta);
                fsum += &f * &f;
                inc = inc.add_ball(&circle_dist(n, &point, prec)?.sqr());
            }
            acc = acc.add_ball(&inc);
            entries.push(BlockScanEntry {
                level: b.level,
                frac_square_sum: fsum,
                increment: inc,
            });
        }
        let last: Vec<&BlockScanEntry> = entries.iter().rev().take(3).collect();
        let positive = last
            .iter()
            .filter(|e| e.increment.certainly_gt(&RealBall::zero(prec)))
            .count();
        out.push(SampleScan {
            theta: theta.clone(),
            partial_sum: acc,
            growing: last.len() == 3 && positive >= 2,
            blocks: entries,
        });
    }
    let growing_count = out.iter().filter(|s| s.growing).count();
    Ok(Prop7Scan {
        horizon,
        samples: out,
        growing_count,
        label: "heuristic finite-horizon evidence, not a proof".into(),
    })
}
