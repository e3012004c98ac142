//! Finite-window checks over subset sums `sum_{k in F} n_k`.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Mutex;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::fejer_coeff;
use crate::numeric::serde_fmt::{ball, ball_vec, bigint, rational, rational_vec};
use crate::numeric::{
    circle_dist, circle_frac_exact, signed_frac_scaled, AngleRepr, BigInt, Rational, RealBall,
    UnimodularPoint,
};
use crate::oracle::SparseSpectrum;
use crate::riesz::{coeff_lower_bound, decompose, unit_digit_product, RieszSpec};
use crate::sequences::{erdos_taylor, th1_sequence, IndexedSequence, Marker};

/// Widest window enumerated exhaustively.
pub const MAX_WIDTH: usize = 24;

/// Largest block exponent for the subset-sum union sequence.
pub const MAX_Q: u32 = 3;

fn check_width(width: usize) -> Result<()> {
    if width > MAX_WIDTH {
        return Err(Error::Guard {
            width,
            limit: MAX_WIDTH,
        });
    }
    Ok(())
}

/// `{ sum_{k in F} n_k : F nonempty, F in lo..=hi }`.
pub fn subset_sums(seq: &IndexedSequence, lo: usize, hi: usize) -> Result<BTreeSet<BigInt>> {
    if lo == 0 || lo > hi || hi > seq.len() {
        return Err(Error::InvalidInput(format!("bad index range {lo}..={hi}")));
    }
    check_width(hi - lo + 1)?;
    let mut sums = BTreeSet::from([BigInt::zero()]);
    for k in lo..=hi {
        let n = seq.term(k);
        let shifted: Vec<BigInt> = sums.iter().map(|s| s + n).collect();
        sums.extend(shifted);
    }
    sums.remove(&BigInt::zero());
    Ok(sums)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Certificate {
    pub l: usize,
    pub q: usize,
    /// Index range of blocks `l..=l+q`.
    pub start: usize,
    pub end: usize,
    #[serde(with = "bigint")]
    pub base: BigInt,
    /// The sums are exactly `s * base` for `1 <= s <= top`, where
    /// `top * base = p_{l+1} + ... + p_{l+q+1}`.
    #[serde(with = "bigint")]
    pub top: BigInt,
    /// `prod_{j<=q} (l+j)^2((l+j)^2+1)/2`, so that `product_top * base = p_{l+q+1}`.
    #[serde(with = "bigint")]
    pub product_top: BigInt,
    /// Whether `top == product_top`, which holds only for `q = 0`.
    pub product_form_exact: bool,
    pub count: usize,
}

/// Subset sums over blocks `l..=l+q` of the `l^2 (l^2+1)/2` block sequence are
/// the consecutive multiples `p_l, 2 p_l, ..., (p_{l+1} + ... + p_{l+q+1})`.
///
/// In particular every `s p_l` with `s <= prod_{j<=q} (l+j)^2((l+j)^2+1)/2` is a
/// subset sum; the certificate records both bounds.
pub fn verify_lemma1(l: usize, q: usize) -> Result<Lemma1Certificate> {
    if l < 2 {
        return Err(Error::InvalidInput("l must be at least 2".into()));
    }
    let seq = th1_sequence(l + q + 1)?;
    let first = seq
        .block(l)
        .ok_or_else(|| Error::InvalidInput(format!("no block {l}")))?;
    let last = seq
        .block(l + q)
        .ok_or_else(|| Error::InvalidInput(format!("no block {}", l + q)))?;
    let (start, end) = (first.start, last.end);
    check_width(end - start + 1)?;
    let base = first.base.clone();
    let bases = seq.bases().expect("block sequence carries bases");
    let reach: BigInt = (l + 1..=l + q + 1).map(|i| &bases[i - 1]).sum();
    let top = &reach / &base;
    let product_top: BigInt = (l..=l + q)
        .map(|i| {
            let s = BigInt::from(i * i);
            &s * (&s + 1u32) / 2u32
        })
        .product();
    if &product_top * &base != bases[l + q] {
        return Err(Error::InvariantViolation(format!(
            "product form disagrees with p_{}",
            l + q + 1
        )));
    }
    let sums = subset_sums(&seq, start, end)?;
    let mut expected = BigInt::one();
    for s in &sums {
        if *s != &expected * &base {
            return Err(Error::InvariantViolation(format!(
                "sumset over blocks {l}..={} misses {expected} * {base}",
                l + q
            )));
        }
        expected += 1u32;
    }
    if expected - 1u32 != top {
        return Err(Error::InvariantViolation(format!(
            "sumset over blocks {l}..={} stops before {top} * {base}",
            l + q
        )));
    }
    Ok(Lemma1Certificate {
        l,
        q,
        start,
        end,
        product_form_exact: top == product_top,
        base,
        top,
        product_top,
        count: sums.len(),
    })
}

/// `re + i im` with ball parts.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexBall {
    pub re: RealBall,
    pub im: RealBall,
}

impl ComplexBall {
    pub fn real(re: RealBall) -> Self {
        let im = RealBall::zero(re.prec());
        ComplexBall { re, im }
    }

    /// `|z - 1|`.
    pub fn dist_to_one(&self) -> RealBall {
        let d = self.re.sub_ball(&RealBall::one(self.re.prec()));
        let s = d.sqr().add_ball(&self.im.sqr());
        s.max_ball(&RealBall::zero(s.prec()))
            .sqrt()
            .expect("nonnegative by construction")
    }
}

/// Probability measure with finitely many atoms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawAtomic")]
pub struct AtomicMeasure {
    atoms: Vec<AngleRepr>,
    #[serde(with = "rational_vec")]
    weights: Vec<Rational>,
    #[serde(skip)]
    points: Vec<UnimodularPoint>,
}

#[derive(Deserialize)]
struct RawAtomic {
    atoms: Vec<AngleRepr>,
    #[serde(with = "rational_vec")]
    weights: Vec<Rational>,
}

impl TryFrom<RawAtomic> for AtomicMeasure {
    type Error = Error;
    fn try_from(r: RawAtomic) -> Result<Self> {
        let points = r
            .atoms
            .into_iter()
            .map(UnimodularPoint::try_from)
            .collect::<Result<Vec<_>>>()?;
        AtomicMeasure::new(points, r.weights)
    }
}

impl AtomicMeasure {
    pub fn new(points: Vec<UnimodularPoint>, weights: Vec<Rational>) -> Result<Self> {
        if points.is_empty() || points.len() != weights.len() {
            return Err(Error::InvalidInput(
                "need one positive weight per atom".into(),
            ));
        }
        if weights.iter().any(|w| !w.is_positive()) {
            return Err(Error::InvalidInput("weights must be positive".into()));
        }
        if weights.iter().sum::<Rational>() != Rational::one() {
            return Err(Error::InvalidInput("weights must sum to 1".into()));
        }
        Ok(AtomicMeasure {
            atoms: points.iter().map(AngleRepr::from).collect(),
            weights,
            points,
        })
    }

    pub fn dirac(theta: Rational) -> Self {
        AtomicMeasure::new(vec![UnimodularPoint::exact(theta)], vec![Rational::one()])
            .expect("single unit atom")
    }

    pub fn points(&self) -> &[UnimodularPoint] {
        &self.points
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    /// `muhat(n) = sum_a w_a lambda_a^n`.
    pub fn coeff(&self, n: &BigInt, prec: u32) -> Result<ComplexBall> {
        let mut re = RealBall::zero(prec);
        let mut im = RealBall::zero(prec);
        for (p, w) in self.points.iter().zip(&self.weights) {
            let (c, s) = p.power(n, prec)?;
            re = re.add_ball(&c.mul_rational(w));
            im = im.add_ball(&s.mul_rational(w));
        }
        Ok(ComplexBall { re, im })
    }
}

/// Where window coefficients come from.
pub enum CoefficientSource {
    Riesz(RieszSource),
    Atomic(AtomicMeasure),
    Table(SparseSpectrum),
    /// `sigmahat(n) = 0` for `n != 0`.
    Lebesgue,
}

/// A Riesz spec with memoized kernel coefficients.
pub struct RieszSource {
    spec: RieszSpec,
    cache: Mutex<BTreeMap<(u64, i64), RealBall>>,
}

impl RieszSource {
    pub fn new(spec: RieszSpec) -> Self {
        RieszSource {
            spec,
            cache: Mutex::new(BTreeMap::new()),
        }
    }

    pub fn spec(&self) -> &RieszSpec {
        &self.spec
    }

    fn kernel(&self, m: u64, j: i64, prec: u32) -> RealBall {
        let mut cache = self.cache.lock().expect("cache lock");
        cache
            .entry((m, j))
            .or_insert_with(|| fejer_coeff(m, j, prec))
            .clone()
    }

    pub fn coeff(&self, n: &BigInt, prec: u32) -> RealBall {
        let wp = prec + 16;
        match decompose(n, &self.spec) {
            Some(d) => d
                .digits
                .iter()
                .fold(RealBall::one(wp), |acc, (&k, &j)| {
                    acc.mul_ball(&self.kernel(self.spec.order(k), j, wp))
                })
                .with_prec(prec),
            None => RealBall::zero(prec),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SourceTag {
    RieszSpec,
    Atomic,
    CustomTable,
    Lebesgue,
}

impl CoefficientSource {
    pub fn tag(&self) -> SourceTag {
        match self {
            CoefficientSource::Riesz(_) => SourceTag::RieszSpec,
            CoefficientSource::Atomic(_) => SourceTag::Atomic,
            CoefficientSource::Table(_) => SourceTag::CustomTable,
            CoefficientSource::Lebesgue => SourceTag::Lebesgue,
        }
    }

    pub fn coeff(&self, n: &BigInt, prec: u32) -> Result<ComplexBall> {
        Ok(match self {
            CoefficientSource::Riesz(r) => ComplexBall::real(r.coeff(n, prec)),
            CoefficientSource::Atomic(mu) => mu.coeff(n, prec)?,
            CoefficientSource::Table(t) => {
                let c = t
                    .get(n)
                    .or_else(|| t.get(&-n))
                    .ok_or_else(|| Error::InvalidInput(format!("table has no frequency {n}")))?;
                ComplexBall::real(c.with_prec(prec))
            }
            CoefficientSource::Lebesgue => ComplexBall::real(if n.is_zero() {
                RealBall::one(prec)
            } else {
                RealBall::zero(prec)
            }),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WindowReport {
    pub k0: usize,
    pub width: usize,
    /// Enclosure of `max_F |sigmahat(sum_{k in F} n_k) - 1|`.
    #[serde(with = "ball")]
    pub deviation: RealBall,
    /// A subset whose deviation ball has the largest midpoint.
    pub worst_subset: Vec<usize>,
    #[serde(with = "bigint")]
    pub worst_frequency: BigInt,
    pub source: SourceTag,
    /// `1 - prod_{k in window} cos(pi/(m_k+2))`, the full-window deviation of a
    /// Riesz spec.
    #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_ball")]
    pub full_window_floor: Option<RealBall>,
    /// `1 - prod_{k in window} max(0, 1 - 3 pi^2 (c_k/(m_k+2))^2)` when caps are present.
    #[serde(default, skip_serializing_if = "Option::is_none", with = "opt_ball")]
    pub cap_ceiling: Option<RealBall>,
}

mod opt_ball {
    use crate::numeric::serde_fmt::BallRepr;
    use crate::numeric::RealBall;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<RealBall>, s: S) -> Result<S::Ok, S::Error> {
        v.as_ref().map(BallRepr::from).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<RealBall>, D::Error> {
        Option::<BallRepr>::deserialize(d)?
            .map(|r| RealBall::try_from(r).map_err(serde::de::Error::custom))
            .transpose()
    }
}

/// Exhaustive deviation over the `2^w - 1` nonempty subsets of `k0..k0+w`,
/// visited in Gray-code order.
pub fn ip_window_deviation(
    source: &CoefficientSource,
    seq: &IndexedSequence,
    k0: usize,
    width: usize,
    prec: u32,
) -> Result<WindowReport> {
    if k0 == 0 || width == 0 || k0 + width - 1 > seq.len() {
        return Err(Error::InvalidInput(format!(
            "window {k0}..{} does not fit {} terms",
            k0 + width,
            seq.len()
        )));
    }
    check_width(width)?;
    let mut member = vec![false; width];
    let mut sum = BigInt::zero();
    let mut deviation: Option<RealBall> = None;
    let mut worst_mask = 0u32;
    let mut worst_mid = None;
    let mut worst_frequency = BigInt::zero();
    let mut mask = 0u32;
    for i in 1u32..(1u32 << width) {
        let bit = i.trailing_zeros() as usize;
        let n = seq.term(k0 + bit);
        if member[bit] {
            sum -= n;
        } else {
            sum += n;
        }
        member[bit] = !member[bit];
        mask ^= 1 << bit;
        let d = source.coeff(&sum, prec)?.dist_to_one();
        if worst_mid.as_ref().is_none_or(|w| d.mid() > w) {
            worst_mid = Some(d.mid().clone());
            worst_mask = mask;
            worst_frequency = sum.clone();
        }
        deviation = Some(match deviation {
            Some(v) => v.max_ball(&d),
            None => d,
        });
    }
    let window: Vec<usize> = (k0..k0 + width).collect();
    let (full_window_floor, cap_ceiling) = match source {
        CoefficientSource::Riesz(r) => {
            let one = RealBall::one(prec);
            let floor = one.sub_ball(&unit_digit_product(&window, r.spec(), prec));
            let ceiling = match r.spec().caps() {
                Some(_) => Some(one.sub_ball(&coeff_lower_bound(&window, r.spec(), prec)?)),
                None => None,
            };
            (Some(floor), ceiling)
        }
        _ => (None, None),
    };
    Ok(WindowReport {
        k0,
        width,
        deviation: deviation.expect("nonempty window"),
        worst_subset: (0..width)
            .filter(|b| worst_mask >> b & 1 == 1)
            .map(|b| k0 + b)
            .collect(),
        worst_frequency,
        source: source.tag(),
        full_window_floor,
        cap_ceiling,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtomReport {
    pub theta: AngleRepr,
    #[serde(with = "rational")]
    pub weight: Rational,
    /// `prod_{k in window} |1 + lambda^{n_k}| / 2`.
    #[serde(with = "ball")]
    pub product: RealBall,
    /// `sum_{k in window} |lambda^{n_k} - 1|^2`.
    #[serde(with = "ball")]
    pub square_sum: RealBall,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AtomicReport {
    pub window: WindowReport,
    pub atoms: Vec<AtomReport>,
}

pub fn atomic_ip_check(
    mu: &AtomicMeasure,
    seq: &IndexedSequence,
    k0: usize,
    width: usize,
    prec: u32,
) -> Result<AtomicReport> {
    let window = ip_window_deviation(&CoefficientSource::Atomic(mu.clone()), seq, k0, width, prec)?;
    let mut atoms = Vec::with_capacity(mu.points().len());
    for (p, w) in mu.points().iter().zip(mu.weights()) {
        let mut product = RealBall::one(prec);
        let mut square_sum = RealBall::zero(prec);
        for k in k0..k0 + width {
            let d2 = circle_dist(seq.term(k), p, prec)?.sqr();
            // |1 + z|^2 + |1 - z|^2 = 4 on the circle
            let half = RealBall::one(prec).sub_ball(&d2.div_u64(4));
            let half = half.max_ball(&RealBall::zero(prec)).sqrt()?;
            product = product.mul_ball(&half);
            square_sum = square_sum.add_ball(&d2);
        }
        atoms.push(AtomReport {
            theta: p.into(),
            weight: w.clone(),
            product,
            square_sum,
        });
    }
    Ok(AtomicReport { window, atoms })
}

/// Flattened union of the sets `P_q = { sum_{k in F} p_k : F in 2^q+1..=2^{q+1} }`
/// over the Erdos-Taylor terms `p_k`, `1 <= q <= qmax`, with one marker per `q`.
pub fn section62_sequence(qmax: u32) -> Result<IndexedSequence> {
    if qmax == 0 || qmax > MAX_Q {
        return Err(Error::Guard {
            width: qmax as usize,
            limit: MAX_Q as usize,
        });
    }
    let p = erdos_taylor(1 << (qmax + 1))?;
    let mut terms: Vec<BigInt> = Vec::new();
    let mut markers = Vec::new();
    for q in 1..=qmax {
        let block = subset_sums(&p, (1 << q) + 1, 1 << (q + 1))?;
        if let (Some(prev), Some(first)) = (terms.last(), block.first()) {
            if prev >= first {
                return Err(Error::InvariantViolation(format!(
                    "block {q} overlaps block {}",
                    q - 1
                )));
            }
        }
        terms.extend(block);
        markers.push(Marker {
            level: q as usize,
            end: terms.len(),
        });
    }
    IndexedSequence::new("section62", serde_json::json!({ "qmax": qmax }), terms)?
        .with_markers(markers)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdditivityBlock {
    pub q: u32,
    /// Disjoint nonempty pairs `(F, G)` examined.
    pub pairs: usize,
    /// Pairs meeting the hypothesis `{F}, {G}, {F + G} < 1/4`.
    pub applicable: usize,
    /// `max_{n in P_q} |lambda^n - 1|`.
    #[serde(with = "ball")]
    pub max_dist: RealBall,
    /// `sum_{k=2^q+1}^{2^{q+1}} {p_k theta}`.
    #[serde(with = "rational")]
    pub frac_sum: Rational,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdditivityScan {
    #[serde(with = "rational")]
    pub theta: Rational,
    pub blocks: Vec<AdditivityBlock>,
    #[serde(with = "ball_vec")]
    pub block_max: Vec<RealBall>,
}

/// Threshold under which signed fractional parts add.
pub fn additivity_threshold() -> Rational {
    Rational::new(BigInt::one(), BigInt::from(4))
}

/// For each sampled angle and block `q`, check `<a + b> = <a> + <b>` on every
/// disjoint pair of index sets whose three distances to the integers are below
/// `1/4`, and report the block maxima and fractional sums.
pub fn section62_ginf_scan(
    samples: &[Rational],
    qmax: u32,
    prec: u32,
) -> Result<Vec<AdditivityScan>> {
    if qmax == 0 || qmax > MAX_Q {
        return Err(Error::Guard {
            width: qmax as usize,
            limit: MAX_Q as usize,
        });
    }
    let p = erdos_taylor(1 << (qmax + 1))?;
    let quarter = additivity_threshold();
    let mut out = Vec::with_capacity(samples.len());
    for theta in samples {
        if crate::numeric::frac_dist(theta).is_zero() {
            return Err(Error::InvalidInput(format!(
                "theta = {theta} gives lambda = 1"
            )));
        }
        let point = UnimodularPoint::exact(theta.clone());
        let mut blocks = Vec::new();
        for q in 1..=qmax {
            let lo = (1usize << q) + 1;
            let hi = 1usize << (q + 1);
            let w = hi - lo + 1;
            // signed fractional part and distance for every subset mask
            let sums: Vec<BigInt> = (0u32..1 << w)
                .map(|mask| {
                    (0..w)
                        .filter(|b| mask >> b & 1 == 1)
                        .map(|b| p.term(lo + b))
                        .sum()
                })
                .collect();
            let signed: Vec<Rational> = sums.iter().map(|s| signed_frac_scaled(s, theta)).collect();
            let (mut pairs, mut applicable) = (0, 0);
            for f in 1u32..1 << w {
                let rest = !f & ((1 << w) - 1);
                // enumerate nonempty submasks g of the complement
                let mut g = rest;
                while g != 0 {
                    if f < g {
                        pairs += 1;
                        let u = (f | g) as usize;
                        let (a, b, c) = (&signed[f as usize], &signed[g as usize], &signed[u]);
                        if a.abs() < quarter && b.abs() < quarter && c.abs() < quarter {
                            applicable += 1;
                            if *c != a + b {
                                return Err(Error::InvariantViolation(format!(
                                    "additivity fails for theta = {theta}, block {q}, masks {f:#b} and {g:#b}"
                                )));
                            }
                        }
                    }
                    g = (g - 1) & rest;
                }
            }
            let mut max_dist = RealBall::zero(prec);
            for s in sums.iter().skip(1) {
                max_dist = max_dist.max_ball(&circle_dist(s, &point, prec)?);
            }
            let frac_sum = (lo..=hi).map(|k| circle_frac_exact(p.term(k), theta)).sum();
            blocks.push(AdditivityBlock {
                q,
                pairs,
                applicable,
                max_dist,
                frac_sum,
            });
        }
        let block_max = blocks.iter().map(|b| b.max_dist.clone()).collect();
        out.push(AdditivityScan {
            theta: theta.clone(),
            blocks,
            block_max,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::{int, rat};
    use crate::riesz::{check_dissociation, choose_m_sequence, Budget};
    use crate::sequences::{geometric, pow2_plus_one, pow2sq};
    use proptest::prelude::*;

    fn range(a: i64, b: i64) -> BTreeSet<BigInt> {
        (a..=b).map(int).collect()
    }

    #[test]
    fn subset_sum_examples() {
        let s = IndexedSequence::from_u64(&[1, 2, 3]).unwrap();
        assert_eq!(subset_sums(&s, 1, 3).unwrap(), range(1, 6));
        assert_eq!(subset_sums(&s, 2, 2).unwrap(), BTreeSet::from([int(2)]));
        let th = th1_sequence(3).unwrap();
        let b = th.block(2).unwrap();
        assert_eq!(subset_sums(&th, b.start, b.end).unwrap(), range(1, 10));
        let long = geometric(2, 30).unwrap();
        assert!(matches!(
            subset_sums(&long, 1, 25),
            Err(Error::Guard { .. })
        ));
    }

    #[test]
    fn lemma1_cases() {
        let c = verify_lemma1(2, 0).unwrap();
        assert_eq!(
            (c.base.clone(), c.top.clone(), c.count),
            (int(1), int(10), 10)
        );
        let c = verify_lemma1(3, 0).unwrap();
        assert_eq!((c.base.clone(), c.top.clone()), (int(10), int(45)));
        assert!(c.product_form_exact);
        // blocks 2 and 3: {1..10} + {0, 10, ..., 450}
        let c = verify_lemma1(2, 1).unwrap();
        assert_eq!(
            (c.top.clone(), c.product_top.clone(), c.count),
            (int(460), int(450), 460)
        );
        assert!(!c.product_form_exact);
        assert!(verify_lemma1(3, 1).is_err());
    }

    #[test]
    fn lebesgue_and_dirac() {
        let seq = geometric(2, 8).unwrap();
        let r = ip_window_deviation(&CoefficientSource::Lebesgue, &seq, 2, 5, 128).unwrap();
        assert_eq!(r.deviation, RealBall::one(128));
        let one = AtomicMeasure::dirac(rat(0, 1));
        let r = ip_window_deviation(&CoefficientSource::Atomic(one), &seq, 2, 5, 128).unwrap();
        assert!(r.deviation.mid().is_zero());
    }

    #[test]
    fn atomic_examples() {
        let r = atomic_ip_check(
            &AtomicMeasure::dirac(rat(0, 1)),
            &geometric(3, 6).unwrap(),
            1,
            6,
            128,
        )
        .unwrap();
        assert!(r.window.deviation.contains_zero());
        assert_eq!(r.atoms[0].product, RealBall::one(128));
        assert!(r.atoms[0].square_sum.mid().is_zero());

        let r = atomic_ip_check(
            &AtomicMeasure::dirac(rat(1, 3)),
            &geometric(3, 8).unwrap(),
            1,
            8,
            128,
        )
        .unwrap();
        assert!(r.window.deviation.contains_zero() && r.window.deviation.rad_f64() < 1e-30);

        let r = atomic_ip_check(
            &AtomicMeasure::dirac(rat(1, 2)),
            &pow2_plus_one(8).unwrap(),
            2,
            5,
            128,
        )
        .unwrap();
        assert!(r.window.deviation.contains_rational(&rat(2, 1)));
        assert!(r.atoms[0].product.contains_zero());
        assert_eq!(r.window.worst_subset.len() % 2, 1);
    }

    #[test]
    fn atomic_measure_validation() {
        let pts = vec![
            UnimodularPoint::exact(rat(1, 3)),
            UnimodularPoint::exact(rat(2, 3)),
        ];
        assert!(AtomicMeasure::new(pts.clone(), vec![rat(1, 2), rat(1, 3)]).is_err());
        assert!(AtomicMeasure::new(pts.clone(), vec![rat(3, 2), rat(-1, 2)]).is_err());
        let mu = AtomicMeasure::new(pts, vec![rat(1, 2), rat(1, 2)]).unwrap();
        // muhat(1) = cos(2 pi / 3) = -1/2
        let c = mu.coeff(&int(1), 128).unwrap();
        assert!(c.re.contains_rational(&rat(-1, 2)) && c.im.contains_zero());
        let json = serde_json::to_string(&mu).unwrap();
        let back: AtomicMeasure = serde_json::from_str(&json).unwrap();
        assert_eq!(back, mu);
    }

    fn pow2sq_source() -> (RieszSource, IndexedSequence) {
        let seq = pow2sq(12).unwrap();
        let spec = choose_m_sequence(&seq, &Budget::standard()).unwrap();
        check_dissociation(&spec).unwrap();
        (RieszSource::new(spec), seq)
    }

    #[test]
    fn riesz_window_matches_product() {
        let (src, seq) = pow2sq_source();
        let src = CoefficientSource::Riesz(src);
        let r = ip_window_deviation(&src, &seq, 6, 6, 128).unwrap();
        let floor = r.full_window_floor.clone().unwrap();
        assert!(r.deviation.overlaps(&floor));
        assert!(!r.deviation.certainly_gt(&floor));
        assert_eq!(r.worst_subset, (6..12).collect::<Vec<_>>());
    }

    #[test]
    fn riesz_window_monotone_in_start() {
        let (src, seq) = pow2sq_source();
        let src = CoefficientSource::Riesz(src);
        let devs: Vec<RealBall> = (4..=8)
            .map(|k0| {
                ip_window_deviation(&src, &seq, k0, 4, 128)
                    .unwrap()
                    .deviation
            })
            .collect();
        for w in devs.windows(2) {
            assert!(!w[1].certainly_gt(&w[0]));
        }
    }

    #[test]
    fn capped_window_respects_ceiling() {
        let spec = RieszSpec::from_u64(&[1, 20, 400, 8000], &[6, 6, 6, 6])
            .unwrap()
            .with_caps(vec![1, 1, 1, 1])
            .unwrap();
        let seq = spec.seq().clone();
        let src = CoefficientSource::Riesz(RieszSource::new(spec));
        let r = ip_window_deviation(&src, &seq, 1, 4, 128).unwrap();
        assert!(!r.deviation.certainly_gt(r.cap_ceiling.as_ref().unwrap()));
    }

    #[test]
    fn table_source() {
        let t = SparseSpectrum::from_map(
            [
                (int(1), RealBall::from_rational(&rat(1, 2), 64)),
                (int(2), RealBall::from_rational(&rat(1, 4), 64)),
            ]
            .into_iter()
            .collect(),
        );
        let seq = IndexedSequence::from_u64(&[1, 2]).unwrap();
        let src = CoefficientSource::Table(t);
        assert!(ip_window_deviation(&src, &seq, 1, 1, 64)
            .unwrap()
            .deviation
            .contains_rational(&rat(1, 2)));
        assert!(ip_window_deviation(&src, &seq, 1, 2, 64).is_err());
    }

    #[test]
    fn section62_examples() {
        let s = section62_sequence(1).unwrap();
        assert_eq!(s.terms(), &[int(5), int(16), int(21)]);
        let s = section62_sequence(2).unwrap();
        assert_eq!(s.len(), 3 + 15);
        assert_eq!(s.term(4), &int(65));
        assert_eq!(s.term(18), &int(65 + 326 + 1957 + 13700));
        assert_eq!(section62_sequence(3).unwrap().len(), 3 + 15 + 255);
        assert!(section62_sequence(4).is_err());
    }

    #[test]
    fn section62_scan_examples() {
        let r = section62_ginf_scan(&[rat(1, 2), rat(1, 5), rat(1, 100)], 2, 128).unwrap();
        assert!(r[0].blocks[0].max_dist.contains_rational(&rat(2, 1)));
        assert_eq!(r[1].blocks[0].frac_sum, rat(1, 5));
        assert!(r[2].blocks[0].applicable >= 1);
        // <5/100> + <16/100> = <21/100>
        assert_eq!(signed_frac_scaled(&int(21), &rat(1, 100)), rat(21, 100));
        // unordered disjoint nonempty pairs in a 4-element block: (3^4 - 2 * 2^4 + 1) / 2
        assert_eq!(r[0].blocks[1].pairs, 25);
    }

    proptest! {
        #[test]
        fn subset_sum_cardinality(terms in proptest::collection::btree_set(1u64..1000, 1..10)) {
            let v: Vec<u64> = terms.into_iter().collect();
            let s = IndexedSequence::from_u64(&v).unwrap();
            let sums = subset_sums(&s, 1, v.len()).unwrap();
            prop_assert!(sums.len() < 1 << v.len());
            prop_assert_eq!(sums.iter().next_back().cloned(), Some(BigInt::from(v.iter().sum::<u64>())));
        }

        #[test]
        fn additivity_never_fails(a in 1i64..500, q in 2i64..500) {
            prop_assert!(!matches!(section62_ginf_scan(&[rat(a, q)], 2, 64), Err(Error::InvariantViolation(_))));
        }
    }
}
