//! Riesz products `prod_k P_k(e^{2 i pi n_k t})` over dissociated sequences.
//!
//! Under the dissociation condition `n_{k+1} - 2 sum_{j<=k} m_j n_j >= 1` every
//! frequency has at most one representation `sum_k j_k n_k` with `|j_k| <= m_k`, and
//! the coefficient there is `prod_k Phat_k(j_k)`.
//!
//! An order `m_k = 0` means the factor is absent (`P_k = 1`).

use std::collections::BTreeMap;

use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{cap_admissible, fejer_coeff, lower_bound_eq3_factor};
use crate::numeric::serde_fmt::{bigint_vec, rational, rational_vec};
use crate::numeric::{nearest_int, rat, BigInt, Rational, RealBall};
use crate::sequences::IndexedSequence;

/// How an order sequence was produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Construction {
    /// Leading indices left without a kernel.
    pub dropped: usize,
    /// `eps_1, ..., eps_K`.
    #[serde(with = "rational_vec")]
    pub epsilons: Vec<Rational>,
    /// `sum_k (rho_k / eps_{k+1})^2` over the active range.
    #[serde(with = "rational")]
    pub weighted_sum: Rational,
    #[serde(with = "rational")]
    pub threshold: Rational,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec")]
pub struct RieszSpec {
    seq: IndexedSequence,
    orders: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    caps: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    construction: Option<Construction>,
}

#[derive(Deserialize)]
struct RawSpec {
    seq: IndexedSequence,
    orders: Vec<u64>,
    #[serde(default)]
    caps: Option<Vec<u64>>,
    #[serde(default)]
    construction: Option<Construction>,
}

impl TryFrom<RawSpec> for RieszSpec {
    type Error = Error;
    fn try_from(r: RawSpec) -> Result<Self> {
        let mut s = RieszSpec::new(r.seq, r.orders, r.caps)?;
        s.construction = r.construction;
        Ok(s)
    }
}

impl RieszSpec {
    pub fn new(seq: IndexedSequence, orders: Vec<u64>, caps: Option<Vec<u64>>) -> Result<Self> {
        if seq.len() < 2 {
            return Err(Error::InvalidInput(
                "a spec needs at least two indices".into(),
            ));
        }
        if orders.len() != seq.len() {
            return Err(Error::InvalidInput(format!(
                "{} orders for {} terms",
                orders.len(),
                seq.len()
            )));
        }
        if let Some(c) = &caps {
            if c.len() != seq.len() {
                return Err(Error::InvalidInput("one cap per term is required".into()));
            }
            for (i, (&cap, &m)) in c.iter().zip(&orders).enumerate() {
                if cap > 0 && (m == 0 || !cap_admissible(cap, m, 64)) {
                    return Err(Error::CapViolation { index: i + 1 });
                }
            }
        }
        Ok(RieszSpec {
            seq,
            orders,
            caps,
            construction: None,
        })
    }

    pub fn from_u64(terms: &[u64], orders: &[u64]) -> Result<Self> {
        RieszSpec::new(IndexedSequence::from_u64(terms)?, orders.to_vec(), None)
    }

    pub fn with_caps(self, caps: Vec<u64>) -> Result<Self> {
        let c = self.construction.clone();
        let mut s = RieszSpec::new(self.seq, self.orders, Some(caps))?;
        s.construction = c;
        Ok(s)
    }

    pub fn seq(&self) -> &IndexedSequence {
        &self.seq
    }

    pub fn len(&self) -> usize {
        self.seq.len()
    }

    pub fn is_empty(&self) -> bool {
        self.seq.is_empty()
    }

    /// 1-based.
    pub fn order(&self, k: usize) -> u64 {
        self.orders[k - 1]
    }

    pub fn orders(&self) -> &[u64] {
        &self.orders
    }

    pub fn caps(&self) -> Option<&[u64]> {
        self.caps.as_deref()
    }

    pub fn cap(&self, k: usize) -> Option<u64> {
        self.caps.as_ref().map(|c| c[k - 1])
    }

    pub fn construction(&self) -> Option<&Construction> {
        self.construction.as_ref()
    }

    /// Indices carrying a kernel.
    pub fn active(&self) -> Vec<usize> {
        (1..=self.len()).filter(|&k| self.order(k) > 0).collect()
    }

    /// `S_k = sum_{j<=k} m_j n_j` for `k = 1..=K`.
    pub fn reach(&self) -> Vec<BigInt> {
        let mut acc = BigInt::zero();
        (1..=self.len())
            .map(|k| {
                acc += self.seq.term(k) * self.order(k);
                acc.clone()
            })
            .collect()
    }

    /// Open intervals `(S_k, n_{k+1} - S_k)` on which the coefficients vanish.
    pub fn gap_intervals(&self) -> Vec<(BigInt, BigInt)> {
        let reach = self.reach();
        (1..self.len())
            .map(|k| (reach[k - 1].clone(), self.seq.term(k + 1) - &reach[k - 1]))
            .collect()
    }

    /// Largest frequency in the spectrum of the partial product, `S_K`.
    pub fn bandwidth(&self) -> BigInt {
        self.reach().pop().unwrap_or_default()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DissociationCertificate {
    /// `l_k = n_{k+1} - 2 S_k - 1` for `k = 1..K-1`, all nonnegative.
    #[serde(with = "bigint_vec")]
    pub gaps: Vec<BigInt>,
    /// Whether `l_k` is strictly increasing over the horizon. A finite prefix
    /// says nothing about the limit; this is a prefix certificate only.
    pub gaps_increasing: bool,
    pub horizon: usize,
}

pub fn check_dissociation(spec: &RieszSpec) -> Result<DissociationCertificate> {
    let reach = spec.reach();
    let mut gaps = Vec::with_capacity(spec.len() - 1);
    for k in 1..spec.len() {
        let l: BigInt = spec.seq.term(k + 1) - &reach[k - 1] * 2u32 - 1u32;
        if l.is_negative() {
            return Err(Error::Dissociation {
                k,
                deficit: (-&l).to_string(),
            });
        }
        gaps.push(l);
    }
    let gaps_increasing = gaps.windows(2).all(|w| w[0] < w[1]);
    Ok(DissociationCertificate {
        gaps,
        gaps_increasing,
        horizon: spec.len(),
    })
}

/// Nonzero digits `k -> j_k`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Decomposition {
    pub digits: BTreeMap<usize, i64>,
}

impl Decomposition {
    pub fn value(&self, spec: &RieszSpec) -> BigInt {
        self.digits
            .iter()
            .map(|(&k, &j)| spec.seq.term(k) * j)
            .sum()
    }

    /// Compact `k:j` list, e.g. `1:2 2:1 3:1`.
    pub fn render(&self) -> String {
        self.digits
            .iter()
            .map(|(k, j)| format!("{k}:{j}"))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Greedy digits from the largest index; `None` when `n` is not representable.
pub fn decompose(n: &BigInt, spec: &RieszSpec) -> Option<Decomposition> {
    let mut r = n.clone();
    let mut digits = BTreeMap::new();
    for k in (1..=spec.len()).rev() {
        let nk = spec.seq.term(k);
        let j = nearest_int(&Rational::new(r.clone(), nk.clone()));
        if j.is_zero() {
            continue;
        }
        let j = j.to_i64()?;
        if j.unsigned_abs() > spec.order(k) {
            return None;
        }
        r -= nk * j;
        digits.insert(k, j);
    }
    r.is_zero().then_some(Decomposition { digits })
}

/// `sigmahat(n) = prod_k Phat_k(j_k)`, zero off the spectrum.
pub fn riesz_coeff(n: &BigInt, spec: &RieszSpec, prec: u32) -> RealBall {
    match decompose(n, spec) {
        Some(d) => coeff_of_digits(&d, spec, prec),
        None => RealBall::zero(prec),
    }
}

pub fn coeff_of_digits(d: &Decomposition, spec: &RieszSpec, prec: u32) -> RealBall {
    d.digits
        .iter()
        .fold(RealBall::one(prec + 16), |acc, (&k, &j)| {
            acc.mul_ball(&fejer_coeff(spec.order(k), j, prec + 16))
        })
        .with_prec(prec)
}

/// `prod_{k in F} max(0, 1 - 3 pi^2 (p_k/(m_k+2))^2)`.
///
/// The kernel coefficients inside the caps are positive, so each factor is
/// clamped at zero before multiplying.
pub fn coeff_lower_bound(indices: &[usize], spec: &RieszSpec, prec: u32) -> Result<RealBall> {
    let caps = spec
        .caps()
        .ok_or_else(|| Error::InvalidInput("spec has no caps".into()))?;
    let mut acc = RealBall::one(prec + 16);
    for &k in indices {
        if k == 0 || k > spec.len() {
            return Err(Error::InvalidInput(format!(
                "index {k} outside the horizon"
            )));
        }
        let f = lower_bound_eq3_factor(caps[k - 1], spec.order(k), prec + 16)
            .map_err(|_| Error::CapViolation { index: k })?;
        let f = f.max_ball(&RealBall::zero(prec + 16));
        acc = acc.mul_ball(&f);
    }
    Ok(acc.with_prec(prec))
}

/// Admissibility target for the order construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    /// Required strict bound on `sum_k (rho_k / eps_{k+1})^2`.
    #[serde(with = "rational")]
    pub threshold: Rational,
    /// Largest prefix to drop; `None` tries every prefix.
    pub max_drop: Option<usize>,
}

impl Budget {
    /// Threshold `1/9`, which makes every order positive and the spec dissociated.
    pub fn standard() -> Self {
        Budget {
            threshold: rat(1, 9),
            max_drop: None,
        }
    }

    /// Threshold `1/81`, which additionally leaves room for the caps `q_l pi <= m_l + 2`.
    pub fn blocks() -> Self {
        Budget {
            threshold: rat(1, 81),
            max_drop: None,
        }
    }
}

const EPS_CAP: (i64, i64) = (49, 100);

/// Rational lower approximation of `x^{1/3}` for `0 < x <= 1`.
fn cbrt_lower(x: &Rational) -> Rational {
    let s = 64 + (x.denom().bits() as i64 - x.numer().bits() as i64).max(0) as usize / 3 + 1;
    let scaled = (x.numer() << (3 * s)) / x.denom();
    Rational::new(scaled.cbrt(), BigInt::one() << s)
}

struct Orders {
    dropped: usize,
    eps: Vec<Rational>,
    orders: Vec<u64>,
    weighted: Rational,
}

/// `eps_{k+1} = 49/100 (T_k / T_{d+1})^{1/3}` with tails `T_k = sum_{j=k}^{K-1} rho_j^2`,
/// `m_k = floor((eps_{k+1} n_{k+1} - eps_k n_k) / (2 n_k))`.
fn build_orders(terms: &[BigInt], rho: &[Rational], budget: &Budget) -> Result<Orders> {
    let big_k = terms.len();
    let max_drop = budget.max_drop.unwrap_or(big_k - 2).min(big_k - 2);
    let cap = rat(EPS_CAP.0, EPS_CAP.1);
    let mut best: Option<Rational> = None;
    for d in 0..=max_drop {
        // tails over the active range, indices are 0-based here: rho[k] = n_k / n_{k+1}
        let mut tails = vec![Rational::zero(); big_k];
        for k in (d..big_k - 1).rev() {
            tails[k] = &tails[k + 1] + &rho[k] * &rho[k];
        }
        let total = tails[d].clone();
        if total.is_zero() {
            continue;
        }
        let mut eps = vec![Rational::zero(); big_k];
        for k in d..big_k - 1 {
            let e = &cap * cbrt_lower(&(&tails[k] / &total));
            eps[k + 1] = if e > cap { cap.clone() } else { e };
        }
        if eps[d + 1..].iter().any(Zero::is_zero) {
            continue;
        }
        let weighted: Rational = (d..big_k - 1)
            .map(|k| {
                let r = &rho[k] / &eps[k + 1];
                &r * &r
            })
            .sum();
        if weighted >= budget.threshold {
            if best.as_ref().is_none_or(|b| &weighted < b) {
                best = Some(weighted);
            }
            continue;
        }
        let mut orders = vec![0u64; big_k];
        let mut ok = true;
        for k in d..big_k - 1 {
            let num = &eps[k + 1] * Rational::from_integer(terms[k + 1].clone())
                - &eps[k] * Rational::from_integer(terms[k].clone());
            let m = (num / Rational::from_integer(&terms[k] * 2u32))
                .floor()
                .to_integer();
            match m.to_u64() {
                Some(m) if m >= 1 => orders[k] = m,
                _ => {
                    ok = false;
                    break;
                }
            }
            let slack =
                (Rational::one() - &eps[k + 1]) * Rational::from_integer(terms[k + 1].clone());
            if slack < Rational::one() {
                ok = false;
                break;
            }
        }
        if ok {
            return Ok(Orders {
                dropped: d,
                eps,
                orders,
                weighted,
            });
        }
    }
    Err(Error::Infeasible(match best {
        Some(b) => format!(
            "weighted ratio sum stays at {:.6} or above, threshold {}",
            b.to_f64().unwrap_or(f64::NAN),
            budget.threshold
        ),
        None => "no prefix drop yields admissible orders".into(),
    }))
}

/// Orders `m_k` from decreasing `eps_k`, with the smallest prefix drop that meets the budget.
///
/// The last index gets order 0: its order would depend on the next, unknown term.
pub fn choose_m_sequence(seq: &IndexedSequence, budget: &Budget) -> Result<RieszSpec> {
    if seq.len() < 3 {
        return Err(Error::InvalidInput("need at least three terms".into()));
    }
    let terms = seq.terms();
    let rho: Vec<Rational> = terms
        .windows(2)
        .map(|w| Rational::new(w[0].clone(), w[1].clone()))
        .collect();
    let o = build_orders(terms, &rho, budget)?;
    let mut spec = RieszSpec::new(seq.clone(), o.orders, None)?;
    spec.construction = Some(Construction {
        dropped: o.dropped,
        epsilons: o.eps,
        weighted_sum: o.weighted,
        threshold: budget.threshold.clone(),
    });
    check_dissociation(&spec)?;
    Ok(spec)
}

/// Spec over the block bases `p_l` with caps `q_l = sum_j q_{j,l}`, so that every
/// block subset sum `sum_l (sum_{j in G_l} q_{j,l}) p_l` has digits within caps.
pub fn block_riesz_spec(seq: &IndexedSequence, budget: &Budget) -> Result<RieszSpec> {
    let blocks = seq
        .blocks()
        .ok_or_else(|| Error::InvalidInput("sequence has no block structure".into()))?;
    if blocks.len() < 3 {
        return Err(Error::InvalidInput("need at least three blocks".into()));
    }
    let bases: Vec<BigInt> = blocks.iter().map(|b| b.base.clone()).collect();
    let totals: Vec<BigInt> = blocks.iter().map(|b| b.multiplier_sum()).collect();
    let rho: Vec<Rational> = (0..bases.len() - 1)
        .map(|l| Rational::new(&totals[l] * &bases[l], bases[l + 1].clone()))
        .collect();
    let o = build_orders(&bases, &rho, budget)?;
    let caps: Vec<u64> = (0..bases.len())
        .map(|l| {
            if o.orders[l] == 0 {
                Ok(0)
            } else {
                totals[l]
                    .to_u64()
                    .ok_or_else(|| Error::InvalidInput("block multiplier sum overflows".into()))
            }
        })
        .collect::<Result<_>>()?;
    let base_seq =
        IndexedSequence::new(format!("{}-bases", seq.family), seq.params.clone(), bases)?;
    let mut spec = RieszSpec::new(base_seq, o.orders, Some(caps))?;
    spec.construction = Some(Construction {
        dropped: o.dropped,
        epsilons: o.eps,
        weighted_sum: o.weighted,
        threshold: budget.threshold.clone(),
    });
    check_dissociation(&spec)?;
    Ok(spec)
}

/// `prod_{k in F, m_k > 0} cos(pi/(m_k+2))`, the coefficient at `sum_{k in F} n_k`.
pub fn unit_digit_product(indices: &[usize], spec: &RieszSpec, prec: u32) -> RealBall {
    indices
        .iter()
        .filter(|&&k| spec.order(k) > 0)
        .fold(RealBall::one(prec + 16), |acc, &k| {
            acc.mul_ball(&crate::kernels::first_coeff_closed(
                spec.order(k),
                prec + 16,
            ))
        })
        .with_prec(prec)
}

/// Every digit vector `j` with `|j_k| <= m_k` on a small spec, for exhaustive checks.
pub fn all_digit_vectors(spec: &RieszSpec) -> Result<Vec<Vec<i64>>> {
    let size: u128 = spec.orders().iter().map(|&m| 2 * m as u128 + 1).product();
    if size > 1_000_000 {
        return Err(Error::Guard {
            width: size.min(usize::MAX as u128) as usize,
            limit: 1_000_000,
        });
    }
    let mut out: Vec<Vec<i64>> = vec![Vec::new()];
    for &m in spec.orders() {
        let m = m as i64;
        out = out
            .into_iter()
            .flat_map(|v| {
                (-m..=m).map(move |j| {
                    let mut w = v.clone();
                    w.push(j);
                    w
                })
            })
            .collect();
    }
    Ok(out)
}

/// `n_k / n_{k+1}` ratios of the spec sequence.
pub fn ratios(spec: &RieszSpec) -> Vec<Rational> {
    spec.seq
        .terms()
        .windows(2)
        .map(|w| Rational::new(w[0].clone(), w[1].clone()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rat;
    use crate::sequences::{block_sequence, erdos_taylor, pow2sq, th1_sequence};
    use proptest::prelude::*;

    fn spec_small(m: &[u64]) -> RieszSpec {
        RieszSpec::from_u64(&[1, 10, 100], m).unwrap()
    }

    fn exhaustive(n: &BigInt, spec: &RieszSpec) -> Vec<Vec<i64>> {
        all_digit_vectors(spec)
            .unwrap()
            .into_iter()
            .filter(|v| {
                let s: BigInt = v
                    .iter()
                    .enumerate()
                    .map(|(i, &j)| spec.seq().term(i + 1) * j)
                    .sum();
                &s == n
            })
            .collect()
    }

    #[test]
    fn dissociation_examples() {
        let c = check_dissociation(&spec_small(&[2, 3, 2])).unwrap();
        assert_eq!(c.gaps, vec![BigInt::from(5), BigInt::from(35)]);
        assert!(c.gaps_increasing);
        let bad = RieszSpec::from_u64(&[1, 2, 4], &[1, 1, 1]).unwrap();
        assert!(matches!(
            check_dissociation(&bad),
            Err(Error::Dissociation { k: 1, .. })
        ));
    }

    #[test]
    fn decompose_examples() {
        let s = spec_small(&[2, 3, 2]);
        let d = decompose(&BigInt::from(112), &s).unwrap();
        assert_eq!(d.digits, BTreeMap::from([(1, 2), (2, 1), (3, 1)]));
        assert_eq!(exhaustive(&BigInt::from(112), &s), vec![vec![2, 1, 1]]);
        assert!(decompose(&BigInt::zero(), &s).unwrap().digits.is_empty());
        assert!(decompose(&BigInt::from(5), &s).is_none());
        assert!(exhaustive(&BigInt::from(5), &s).is_empty());
    }

    #[test]
    fn decompose_matches_exhaustive_search() {
        for m in [[1u64, 1, 1], [2, 3, 2], [3, 3, 3], [1, 2, 3]] {
            let terms = [1u64, 10, 100];
            let s = RieszSpec::from_u64(&terms, &m).unwrap();
            if check_dissociation(&s).is_err() {
                continue;
            }
            for n in -450i64..=450 {
                let n = BigInt::from(n);
                let ex = exhaustive(&n, &s);
                assert!(ex.len() <= 1);
                match decompose(&n, &s) {
                    Some(d) => {
                        let v: Vec<i64> =
                            (1..=3).map(|k| *d.digits.get(&k).unwrap_or(&0)).collect();
                        assert_eq!(ex, vec![v]);
                    }
                    None => assert!(ex.is_empty()),
                }
            }
        }
    }

    #[test]
    fn coefficient_examples() {
        let s = RieszSpec::from_u64(&[1, 10, 100, 1000], &[1, 1, 1, 1]).unwrap();
        let quarter = RealBall::from_rational(&rat(1, 4), 128);
        assert!(riesz_coeff(&BigInt::from(11), &s, 128).overlaps(&quarter));
        assert_eq!(riesz_coeff(&BigInt::zero(), &s, 128), RealBall::one(128));
        let eighth = RealBall::from_rational(&rat(1, 8), 128);
        assert!(riesz_coeff(&BigInt::from(111), &s, 128).overlaps(&eighth));
        assert_eq!(riesz_coeff(&BigInt::from(5), &s, 128), RealBall::zero(128));
    }

    #[test]
    fn lower_bound_examples() {
        let s = RieszSpec::from_u64(&[1, 100, 10000], &[8, 8, 8])
            .unwrap()
            .with_caps(vec![1, 2, 1])
            .unwrap();
        assert_eq!(coeff_lower_bound(&[], &s, 128).unwrap(), RealBall::one(128));
        let b = coeff_lower_bound(&[1], &s, 128).unwrap();
        assert!((b.to_f64() - 0.70392).abs() < 1e-5);
        assert!(RieszSpec::from_u64(&[1, 100, 10000], &[8, 8, 8])
            .unwrap()
            .with_caps(vec![4, 1, 1])
            .is_err());
    }

    #[test]
    fn lower_bound_below_coefficients_exhaustively() {
        let s = RieszSpec::from_u64(&[1, 40, 1600], &[8, 10, 12])
            .unwrap()
            .with_caps(vec![3, 3, 4])
            .unwrap();
        check_dissociation(&s).unwrap();
        for v in all_digit_vectors(&s).unwrap() {
            let within: Vec<usize> = v
                .iter()
                .enumerate()
                .filter(|(i, &j)| j != 0 && j.unsigned_abs() <= s.caps().unwrap()[*i])
                .map(|(i, _)| i + 1)
                .collect();
            if within.len() != v.iter().filter(|&&j| j != 0).count() {
                continue;
            }
            let n: BigInt = v
                .iter()
                .enumerate()
                .map(|(i, &j)| s.seq().term(i + 1) * j)
                .sum();
            let c = riesz_coeff(&n, &s, 128);
            let b = coeff_lower_bound(&within, &s, 128).unwrap();
            assert!(c.certainly_ge(&b), "{v:?}");
        }
    }

    #[test]
    fn unit_digit_products_match() {
        let s =
            RieszSpec::from_u64(&[1, 10, 100, 1000, 10000, 100000], &[1, 2, 3, 3, 2, 1]).unwrap();
        check_dissociation(&s).unwrap();
        for mask in 1u32..64 {
            let f: Vec<usize> = (1..=6).filter(|k| mask >> (k - 1) & 1 == 1).collect();
            let n: BigInt = f.iter().map(|&k| s.seq().term(k).clone()).sum();
            assert!(riesz_coeff(&n, &s, 128).overlaps(&unit_digit_product(&f, &s, 128)));
        }
    }

    #[test]
    fn pow2sq_construction() {
        let seq = pow2sq(12).unwrap();
        let s = choose_m_sequence(&seq, &Budget::standard()).unwrap();
        let c = s.construction().unwrap();
        assert!(c.weighted_sum < rat(1, 9));
        let cert = check_dissociation(&s).unwrap();
        assert!(cert.gaps_increasing);
        let active = s.active();
        assert!(active.iter().all(|&k| s.order(k) >= 1));
        assert_eq!(s.order(12), 0);
        let tail: Vec<usize> = active.iter().copied().filter(|&k| k >= 5).collect();
        assert!(unit_digit_product(&tail, &s, 128).to_f64() >= 0.9);
        // the ratio sum of 2^{k^2} is 1/60 in the limit
        let r: Rational = ratios(&s).iter().map(|x| x * x).sum();
        assert!(r < rat(1, 60) && r > rat(1, 61));
    }

    #[test]
    fn erdos_taylor_construction() {
        let seq = erdos_taylor(40).unwrap();
        let s = choose_m_sequence(&seq, &Budget::standard()).unwrap();
        check_dissociation(&s).unwrap();
        assert!(s.construction().unwrap().dropped > 0);
    }

    #[test]
    fn infeasible_when_ratios_large() {
        let seq = crate::sequences::geometric(2, 10).unwrap();
        let e = choose_m_sequence(&seq, &Budget::standard()).unwrap_err();
        assert!(matches!(e, Error::Infeasible(_)));
    }

    #[test]
    fn block_spec_hundredfold() {
        let bases: Vec<BigInt> = (0..8)
            .map(|l| num_traits::pow(BigInt::from(10000), l))
            .collect();
        let mult: Vec<Vec<BigInt>> = (0..8)
            .map(|l| {
                if l % 2 == 0 {
                    vec![1.into(), 2.into()]
                } else {
                    vec![1.into()]
                }
            })
            .collect();
        let seq = block_sequence(&bases, &mult).unwrap();
        let s = block_riesz_spec(&seq, &Budget::blocks()).unwrap();
        for k in s.active() {
            assert!(cap_admissible(s.cap(k).unwrap(), s.order(k), 128));
        }
        let tail: Vec<usize> = s.active().into_iter().filter(|&k| k >= 3).collect();
        assert!(coeff_lower_bound(&tail, &s, 128).unwrap().to_f64() > 0.9);
    }

    #[test]
    fn block_spec_hundredfold_bound() {
        // ratio 100 with q_l = 3 keeps m_l near 24, so each factor stays near 0.6
        let bases: Vec<BigInt> = (0..8)
            .map(|l| num_traits::pow(BigInt::from(100), l))
            .collect();
        let mult: Vec<Vec<BigInt>> = (0..8).map(|_| vec![1.into(), 2.into()]).collect();
        let seq = block_sequence(&bases, &mult).unwrap();
        let s = block_riesz_spec(&seq, &Budget::blocks()).unwrap();
        for k in s.active() {
            assert!(s.order(k) <= 25);
            assert!(cap_admissible(s.cap(k).unwrap(), s.order(k), 128));
        }
    }

    #[test]
    fn block_spec_th1_is_infeasible() {
        // q_l p_l = p_{l+1} for every block
        let seq = th1_sequence(6).unwrap();
        assert!(matches!(
            block_riesz_spec(&seq, &Budget::blocks()),
            Err(Error::Infeasible(_))
        ));
    }

    #[test]
    fn block_spec_from_factor_chain() {
        // n_k | n_{k+1} off S = {3, 6, 9}, large jumps across S
        let mut terms = vec![BigInt::from(1)];
        for k in 1..12usize {
            let prev = terms[k - 1].clone();
            terms.push(if k % 3 == 0 {
                prev * 100_000u32 + 1u32
            } else {
                prev * 2u32
            });
        }
        let seq = IndexedSequence::explicit(terms).unwrap();
        let s_set = crate::sequences::divisibility_profile(&seq);
        let fc = crate::sequences::factor_chain(&seq, &s_set).unwrap();
        assert!(fc.all_within_double());
        let bseq = fc.to_block_sequence().unwrap();
        let spec = block_riesz_spec(&bseq, &Budget::blocks()).unwrap();
        // sum_l (q_l p_l/p_{l+1})^2 <= 4 sum_{k in S} (n_k/n_{k+1})^2
        let lhs: Rational = (1..spec.len())
            .map(|l| {
                let r = Rational::new(
                    BigInt::from(spec.cap(l).unwrap_or(0).max(1)) * spec.seq().term(l),
                    spec.seq().term(l + 1).clone(),
                );
                &r * &r
            })
            .sum();
        let rhs: Rational = s_set
            .iter()
            .map(|&k| {
                let r = Rational::new(seq.term(k).clone(), seq.term(k + 1).clone());
                &r * &r
            })
            .sum::<Rational>()
            * rat(4, 1);
        assert!(lhs <= rhs);
    }

    #[test]
    fn gaps_are_zero() {
        let s = spec_small(&[2, 3, 2]);
        for (lo, hi) in s.gap_intervals() {
            let mut n = &lo + 1u32;
            while n < hi {
                assert!(decompose(&n, &s).is_none());
                n += 1u32;
            }
        }
    }

    #[test]
    fn spec_json_round_trip() {
        let s = choose_m_sequence(&pow2sq(8).unwrap(), &Budget::standard()).unwrap();
        let j = serde_json::to_string(&s).unwrap();
        let back: RieszSpec = serde_json::from_str(&j).unwrap();
        assert_eq!(back, s);
    }

    proptest! {
        #[test]
        fn cbrt_is_lower_bound(a in 1u64..1_000_000, b in 1u64..1_000_000) {
            let x = Rational::new(BigInt::from(a.min(b)), BigInt::from(a.max(b)));
            let c = cbrt_lower(&x);
            prop_assert!(&c * &c * &c <= x);
            let up = &c + Rational::new(BigInt::from(1), BigInt::one() << 60);
            prop_assert!(&up * &up * &up > x);
        }

        #[test]
        fn uniqueness_small(m1 in 1u64..=3, m2 in 1u64..=3, m3 in 1u64..=3, m4 in 1u64..=3, n in -3000i64..3000) {
            let s = RieszSpec::from_u64(&[1, 9, 70, 500], &[m1, m2, m3, m4]).unwrap();
            prop_assume!(check_dissociation(&s).is_ok());
            let n = BigInt::from(n);
            let ex = exhaustive(&n, &s);
            prop_assert!(ex.len() <= 1);
            prop_assert_eq!(decompose(&n, &s).is_some(), ex.len() == 1);
        }
    }
}
