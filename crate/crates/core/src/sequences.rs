//! Integer-sequence families and their structural analyzers.
//!
//! Indices are 1-based at the API surface: `term(1)` is the first term.

use std::collections::BTreeSet;

use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::numeric::serde_fmt::{bigint, bigint_vec, rational_vec};
use crate::numeric::{int, BigInt, Rational};

/// A run of consecutive terms `base * multipliers[j]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub level: usize,
    #[serde(with = "bigint")]
    pub base: BigInt,
    #[serde(with = "bigint_vec")]
    pub multipliers: Vec<BigInt>,
    /// First and last term index, inclusive.
    pub start: usize,
    pub end: usize,
}

impl Block {
    pub fn len(&self) -> usize {
        self.multipliers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.multipliers.is_empty()
    }

    /// Sum of the multipliers.
    pub fn multiplier_sum(&self) -> BigInt {
        self.multipliers.iter().sum()
    }

    pub fn largest_multiplier(&self) -> &BigInt {
        self.multipliers.last().expect("blocks are nonempty")
    }
}

/// `end` is the last term index belonging to `level`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Marker {
    pub level: usize,
    pub end: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSequence")]
pub struct IndexedSequence {
    pub family: String,
    pub params: Value,
    #[serde(with = "bigint_vec")]
    terms: Vec<BigInt>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    blocks: Option<Vec<Block>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    markers: Option<Vec<Marker>>,
    /// Full base list `p_1, p_2, ...`, including the base following the last block.
    #[serde(
        default,
        skip_serializing_if = "Option::is_none",
        with = "opt_bigint_vec"
    )]
    bases: Option<Vec<BigInt>>,
}

mod opt_bigint_vec {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(
        v: &Option<Vec<BigInt>>,
        s: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        match v {
            Some(v) => s.collect_seq(v.iter().map(|x| x.to_string())),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> std::result::Result<Option<Vec<BigInt>>, D::Error> {
        let v = Option::<Vec<String>>::deserialize(d)?;
        v.map(|v| {
            v.iter()
                .map(|s| s.parse().map_err(serde::de::Error::custom))
                .collect()
        })
        .transpose()
    }
}

#[derive(Deserialize)]
struct RawSequence {
    family: String,
    #[serde(default)]
    params: Value,
    #[serde(with = "bigint_vec")]
    terms: Vec<BigInt>,
    #[serde(default)]
    blocks: Option<Vec<Block>>,
    #[serde(default)]
    markers: Option<Vec<Marker>>,
    #[serde(default, with = "opt_bigint_vec")]
    bases: Option<Vec<BigInt>>,
}

impl TryFrom<RawSequence> for IndexedSequence {
    type Error = Error;
    fn try_from(r: RawSequence) -> Result<Self> {
        let mut s = IndexedSequence::new(r.family, r.params, r.terms)?;
        if let Some(b) = r.blocks {
            s = s.with_blocks(b)?;
        }
        if let Some(m) = r.markers {
            s = s.with_markers(m)?;
        }
        if let Some(p) = r.bases {
            s = s.with_bases(p)?;
        }
        Ok(s)
    }
}

impl IndexedSequence {
    /// Positive, strictly increasing terms.
    pub fn new(family: impl Into<String>, params: Value, terms: Vec<BigInt>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidInput("empty sequence".into()));
        }
        if !terms[0].is_positive() {
            return Err(Error::InvalidInput("terms must be positive".into()));
        }
        for k in 1..terms.len() {
            if terms[k] <= terms[k - 1] {
                return Err(Error::NotIncreasing { index: k + 1 });
            }
        }
        Ok(IndexedSequence {
            family: family.into(),
            params,
            terms,
            blocks: None,
            markers: None,
            bases: None,
        })
    }

    pub fn explicit(terms: Vec<BigInt>) -> Result<Self> {
        IndexedSequence::new("explicit", Value::Null, terms)
    }

    pub fn from_u64(terms: &[u64]) -> Result<Self> {
        IndexedSequence::explicit(terms.iter().map(|&t| BigInt::from(t)).collect())
    }

    /// Attach blocks; they must tile `1..=len` and reproduce the terms.
    pub fn with_blocks(mut self, blocks: Vec<Block>) -> Result<Self> {
        let mut next = 1;
        for (i, b) in blocks.iter().enumerate() {
            let bad = |msg: &str| Error::InvalidInput(format!("block {}: {msg}", b.level));
            if b.start != next || b.end < b.start || b.end - b.start + 1 != b.len() {
                return Err(bad("blocks do not tile the index range"));
            }
            if b.multipliers.first() != Some(&BigInt::one()) {
                return Err(bad("first multiplier must be 1"));
            }
            if b.multipliers.windows(2).any(|w| w[1] <= w[0]) {
                return Err(bad("multipliers not strictly increasing"));
            }
            for (j, q) in b.multipliers.iter().enumerate() {
                if self.terms.get(b.start - 1 + j) != Some(&(&b.base * q)) {
                    return Err(bad("block does not match the terms"));
                }
            }
            if let Some(nb) = blocks.get(i + 1) {
                if nb.base <= &b.base * b.largest_multiplier() {
                    return Err(Error::BlockOverlap { level: b.level });
                }
            }
            next = b.end + 1;
        }
        if next != self.terms.len() + 1 {
            return Err(Error::InvalidInput("blocks do not cover every term".into()));
        }
        self.blocks = Some(blocks);
        Ok(self)
    }

    pub fn with_markers(mut self, markers: Vec<Marker>) -> Result<Self> {
        if markers.windows(2).any(|w| w[1].end <= w[0].end) {
            return Err(Error::InvalidInput("markers must increase".into()));
        }
        if markers.last().is_some_and(|m| m.end > self.terms.len()) {
            return Err(Error::InvalidInput("marker beyond the last term".into()));
        }
        self.markers = Some(markers);
        Ok(self)
    }

    pub fn with_bases(mut self, bases: Vec<BigInt>) -> Result<Self> {
        if bases.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidInput("bases must be nondecreasing".into()));
        }
        self.bases = Some(bases);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[BigInt] {
        &self.terms
    }

    /// 1-based access.
    pub fn term(&self, k: usize) -> &BigInt {
        &self.terms[k - 1]
    }

    pub fn blocks(&self) -> Option<&[Block]> {
        self.blocks.as_deref()
    }

    pub fn markers(&self) -> Option<&[Marker]> {
        self.markers.as_deref()
    }

    pub fn bases(&self) -> Option<&[BigInt]> {
        self.bases.as_deref()
    }

    pub fn block(&self, level: usize) -> Option<&Block> {
        self.blocks()?.iter().find(|b| b.level == level)
    }

    pub fn marker(&self, level: usize) -> Option<usize> {
        self.markers()?
            .iter()
            .find(|m| m.level == level)
            .map(|m| m.end)
    }

    /// The base `p_level` (1-based).
    pub fn base(&self, level: usize) -> Option<&BigInt> {
        self.bases()?.get(level.checked_sub(1)?)
    }

    /// Prefix of the first `k` terms; blocks are cut to those fully inside.
    pub fn truncate(&self, k: usize) -> Result<Self> {
        let k = k.min(self.len());
        let mut s = IndexedSequence::new(
            self.family.clone(),
            self.params.clone(),
            self.terms[..k].to_vec(),
        )?;
        if let Some(blocks) = &self.blocks {
            let kept: Vec<Block> = blocks.iter().filter(|b| b.end <= k).cloned().collect();
            if kept.last().map(|b| b.end) == Some(k) {
                s = s.with_blocks(kept)?;
            }
        }
        s.bases = self.bases.clone();
        if let Some(m) = &self.markers {
            s.markers = Some(m.iter().filter(|m| m.end <= k).copied().collect());
        }
        Ok(s)
    }
}

/// `n_1 = 1`, `n_{k+1} = k n_k + 1`.
pub fn erdos_taylor(count: usize) -> Result<IndexedSequence> {
    if count == 0 {
        return Err(Error::InvalidInput("count must be at least 1".into()));
    }
    let mut terms = vec![BigInt::one()];
    for k in 1..count {
        let next = &terms[k - 1] * k + 1u32;
        terms.push(next);
    }
    IndexedSequence::new("erdos-taylor", json!({ "count": count }), terms)
}

/// `n_k = 2^{k^2}` for `k = 1..=count`.
pub fn pow2sq(count: usize) -> Result<IndexedSequence> {
    let terms = (1..=count).map(|k| BigInt::one() << (k * k)).collect();
    IndexedSequence::new("pow2sq", json!({ "count": count }), terms)
}

/// `n_k = base^k` for `k = 1..=count`.
pub fn geometric(base: u64, count: usize) -> Result<IndexedSequence> {
    if base < 2 {
        return Err(Error::InvalidInput(
            "geometric base must be at least 2".into(),
        ));
    }
    let b = BigInt::from(base);
    let terms = (1..=count).map(|k| num_traits::pow(b.clone(), k)).collect();
    IndexedSequence::new("geometric", json!({ "base": base, "count": count }), terms)
}

/// `n_k = 2^k + 1` for `k = 1..=count`.
pub fn pow2_plus_one(count: usize) -> Result<IndexedSequence> {
    let terms = (1..=count).map(|k| (BigInt::one() << k) + 1u32).collect();
    IndexedSequence::new("pow2-plus-one", json!({ "count": count }), terms)
}

/// Bases `p_1 = 1`, `p_{l+1} = l^2 (l^2 + 1)/2 * p_l` for `l <= blocks + 1`, and the
/// flattened blocks `{p_l, 2 p_l, ..., l^2 p_l}` for `l = 2..=blocks`.
pub fn th1_sequence(blocks: usize) -> Result<IndexedSequence> {
    if blocks < 2 {
        return Err(Error::InvalidInput(
            "at least two blocks are required".into(),
        ));
    }
    let mut bases = vec![BigInt::one()];
    for l in 1..=blocks {
        let l2 = BigInt::from(l * l);
        let f = &l2 * (&l2 + 1u32) / 2u32;
        let next = &bases[l - 1] * f;
        bases.push(next);
    }
    let mut terms = Vec::new();
    let mut bl = Vec::new();
    let mut markers = Vec::new();
    for l in 2..=blocks {
        let p = bases[l - 1].clone();
        let start = terms.len() + 1;
        let multipliers: Vec<BigInt> = (1..=(l * l) as u64).map(BigInt::from).collect();
        terms.extend(multipliers.iter().map(|q| &p * q));
        bl.push(Block {
            level: l,
            base: p,
            multipliers,
            start,
            end: terms.len(),
        });
        markers.push(Marker {
            level: l,
            end: terms.len(),
        });
    }
    IndexedSequence::new("th1", json!({ "blocks": blocks }), terms)?
        .with_blocks(bl)?
        .with_markers(markers)?
        .with_bases(bases)
}

/// Parameter rules for the block family with `p_{l+1} = floor(r_l^2/gamma_l) p_l + 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Prop7Rules {
    /// Explicit tables indexed from `l = 1`.
    Table {
        #[serde(with = "rational_vec")]
        gamma: Vec<Rational>,
        r: Vec<u64>,
    },
    /// `gamma_l = 1/ceil(sqrt(l+1))`, `r_l = 1 + ceil(log2(l+1))`.
    ///
    /// `sum gamma_l^2 / r_l` behaves like `sum 1/(l log l)` and diverges while
    /// `r_l` grows without bound.
    SqrtLog,
}

impl Prop7Rules {
    pub fn gamma(&self, l: usize) -> Result<Rational> {
        match self {
            Prop7Rules::Table { gamma, .. } => gamma.get(l - 1).cloned().ok_or_else(|| {
                Error::InvalidInput(format!("gamma table has no entry for l = {l}"))
            }),
            Prop7Rules::SqrtLog => {
                let s = (l as u64 + 1).isqrt();
                let c = if s * s == l as u64 + 1 { s } else { s + 1 };
                Ok(Rational::new(int(1), BigInt::from(c)))
            }
        }
    }

    pub fn r(&self, l: usize) -> Result<u64> {
        match self {
            Prop7Rules::Table { r, .. } => r
                .get(l - 1)
                .copied()
                .ok_or_else(|| Error::InvalidInput(format!("r table has no entry for l = {l}"))),
            Prop7Rules::SqrtLog => {
                let v = l as u64 + 1;
                let lg = 64 - (v - 1).leading_zeros() as u64;
                Ok(1 + lg)
            }
        }
    }
}

pub fn prop7_sequence(rules: &Prop7Rules, blocks: usize) -> Result<IndexedSequence> {
    if blocks == 0 {
        return Err(Error::InvalidInput("at least one block is required".into()));
    }
    let mut bases = vec![BigInt::one()];
    let mut terms = Vec::new();
    let mut bl = Vec::new();
    for l in 1..=blocks {
        let g = rules.gamma(l)?;
        let r = rules.r(l)?;
        if !g.is_positive() || (l >= 2 && g >= Rational::one()) {
            return Err(Error::InvalidInput(format!(
                "gamma_{l} = {g} is outside (0, 1)"
            )));
        }
        if r < 2 {
            return Err(Error::InvalidInput(format!("r_{l} = {r} is below 2")));
        }
        let p = bases[l - 1].clone();
        let factor = (Rational::from_integer(BigInt::from(r * r)) / &g)
            .floor()
            .to_integer();
        let next = &factor * &p + 1u32;
        if next <= &p * r {
            return Err(Error::BlockOverlap { level: l });
        }
        let start = terms.len() + 1;
        let multipliers: Vec<BigInt> = (1..=r).map(BigInt::from).collect();
        terms.extend(multipliers.iter().map(|q| &p * q));
        bl.push(Block {
            level: l,
            base: p,
            multipliers,
            start,
            end: terms.len(),
        });
        bases.push(next);
    }
    let params = json!({ "rules": rules, "blocks": blocks });
    IndexedSequence::new("prop7", params, terms)?
        .with_blocks(bl)?
        .with_bases(bases)
}

/// Flatten blocks `{p_l q_{0,l}, ..., p_l q_{r_l,l}}`.
pub fn block_sequence(bases: &[BigInt], multipliers: &[Vec<BigInt>]) -> Result<IndexedSequence> {
    if bases.len() != multipliers.len() {
        return Err(Error::InvalidInput(
            "one multiplier list per base is required".into(),
        ));
    }
    for l in 1..bases.len() {
        if bases[l] <= bases[l - 1] {
            return Err(Error::NotIncreasing { index: l + 1 });
        }
    }
    let mut terms = Vec::new();
    let mut bl = Vec::new();
    for (i, (p, q)) in bases.iter().zip(multipliers).enumerate() {
        let l = i + 1;
        if q.first() != Some(&BigInt::one()) || q.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput(format!(
                "multipliers of block {l} must start at 1 and increase"
            )));
        }
        if let Some(np) = bases.get(i + 1) {
            if np <= &(p * q.last().unwrap()) {
                return Err(Error::BlockOverlap { level: l });
            }
        }
        let start = terms.len() + 1;
        terms.extend(q.iter().map(|m| p * m));
        bl.push(Block {
            level: l,
            base: p.clone(),
            multipliers: q.clone(),
            start,
            end: terms.len(),
        });
    }
    let params = json!({
        "bases": bases.iter().map(|b| b.to_string()).collect::<Vec<_>>(),
        "multipliers": multipliers
            .iter()
            .map(|q| q.iter().map(|m| m.to_string()).collect::<Vec<_>>())
            .collect::<Vec<_>>(),
    });
    IndexedSequence::new("block", params, terms)?
        .with_blocks(bl)?
        .with_bases(bases.to_vec())
}

/// Partial sums `sum_{k <= K, k in S} (n_k/n_{k+1})^exponent` for `K = 1..=count`.
pub fn ratio_series(
    seq: &IndexedSequence,
    exponent: u32,
    count: usize,
    restrict: Option<&BTreeSet<usize>>,
) -> Result<Vec<Rational>> {
    if !(1..=2).contains(&exponent) {
        return Err(Error::InvalidInput("exponent must be 1 or 2".into()));
    }
    if count >= seq.len() {
        return Err(Error::InvalidInput(format!(
            "need count < {} (the sequence length)",
            seq.len()
        )));
    }
    let mut acc = Rational::zero();
    let mut out = Vec::with_capacity(count);
    for k in 1..=count {
        if restrict.is_none_or(|s| s.contains(&k)) {
            let r = Rational::new(seq.term(k).clone(), seq.term(k + 1).clone());
            acc += if exponent == 2 { &r * &r } else { r };
        }
        out.push(acc.clone());
    }
    Ok(out)
}

/// Indices `k` with `n_k` not dividing `n_{k+1}`.
pub fn divisibility_profile(seq: &IndexedSequence) -> BTreeSet<usize> {
    (1..seq.len())
        .filter(|&k| !seq.term(k + 1).is_multiple_of(seq.term(k)))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainBlock {
    pub level: usize,
    pub start: usize,
    pub end: usize,
    /// `p_l`, the first term of the block.
    #[serde(with = "bigint")]
    pub base: BigInt,
    /// `s_{0,l} = 1, s_{1,l}, ...`
    #[serde(with = "bigint_vec")]
    pub steps: Vec<BigInt>,
    /// Cumulative products `q_{j,l}`.
    #[serde(with = "bigint_vec")]
    pub multipliers: Vec<BigInt>,
    /// `q_l = sum_j q_{j,l}`.
    #[serde(with = "bigint")]
    pub total: BigInt,
    /// Whether the block ends at an index of `S` (as opposed to the horizon).
    pub closed: bool,
}

impl ChainBlock {
    /// `q_l <= 2 q_{r_l,l}`.
    pub fn total_within_double(&self) -> bool {
        self.total <= self.multipliers.last().unwrap() * 2u32
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorChain {
    pub breaks: BTreeSet<usize>,
    pub blocks: Vec<ChainBlock>,
}

impl FactorChain {
    pub fn all_within_double(&self) -> bool {
        self.blocks.iter().all(ChainBlock::total_within_double)
    }

    /// The same terms as a block sequence with bases `p_l` and multipliers `q_{j,l}`.
    pub fn to_block_sequence(&self) -> Result<IndexedSequence> {
        let bases: Vec<BigInt> = self.blocks.iter().map(|b| b.base.clone()).collect();
        let mult: Vec<Vec<BigInt>> = self.blocks.iter().map(|b| b.multipliers.clone()).collect();
        block_sequence(&bases, &mult)
    }
}

/// Split the sequence after every index in `breaks` and factor each block through
/// its successive quotients.
pub fn factor_chain(seq: &IndexedSequence, breaks: &BTreeSet<usize>) -> Result<FactorChain> {
    let mut blocks = Vec::new();
    let mut start = 1;
    while start <= seq.len() {
        let level = blocks.len() + 1;
        let base = seq.term(start).clone();
        let mut steps = vec![BigInt::one()];
        let mut multipliers = vec![BigInt::one()];
        let mut k = start;
        while !breaks.contains(&k) && k < seq.len() {
            let (s, rem) = seq.term(k + 1).div_rem(seq.term(k));
            if !rem.is_zero() {
                return Err(Error::Divisibility { index: k });
            }
            let q = multipliers.last().unwrap() * &s;
            steps.push(s);
            multipliers.push(q);
            k += 1;
        }
        let total = multipliers.iter().sum();
        blocks.push(ChainBlock {
            level,
            start,
            end: k,
            base,
            steps,
            multipliers,
            total,
            closed: breaks.contains(&k),
        });
        start = k + 1;
    }
    Ok(FactorChain {
        breaks: breaks.clone(),
        blocks,
    })
}

/// Build a sequence from a family name and JSON parameters.
///
/// Families: `erdos-taylor`, `pow2sq`, `geometric` (`base`), `pow2-plus-one`,
/// `th1` (`blocks`), `prop7` (`rules`, `blocks`), `block` (`bases`,
/// `multipliers`), `explicit` (`terms`). `count` limits the number of terms, or
/// the number of blocks for the block families.
pub fn generate(family: &str, params: &Value, count: Option<usize>) -> Result<IndexedSequence> {
    let get_usize = |key: &str| -> Option<usize> { params.get(key)?.as_u64().map(|v| v as usize) };
    let need = |v: Option<usize>, what: &str| {
        v.ok_or_else(|| Error::InvalidInput(format!("family {family} needs {what}")))
    };
    let count = count.or_else(|| get_usize("count"));
    match family {
        "erdos-taylor" => erdos_taylor(need(count, "a count")?),
        "pow2sq" => pow2sq(need(count, "a count")?),
        "pow2-plus-one" => pow2_plus_one(need(count, "a count")?),
        "geometric" => {
            let base = need(get_usize("base"), "a base")? as u64;
            geometric(base, need(count, "a count")?)
        }
        "th1" => th1_sequence(need(
            count.or_else(|| get_usize("blocks")),
            "a block count",
        )?),
        "prop7" => {
            let rules = match params.get("rules") {
                Some(r) => serde_json::from_value(r.clone())
                    .map_err(|e| Error::InvalidInput(format!("bad prop7 rules: {e}")))?,
                None => Prop7Rules::SqrtLog,
            };
            prop7_sequence(
                &rules,
                need(count.or_else(|| get_usize("blocks")), "a block count")?,
            )
        }
        "block" => {
            let parse = |v: &Value| -> Result<BigInt> {
                match v {
                    Value::String(s) => s.parse().map_err(|_| Error::Parse(s.clone())),
                    Value::Number(n) => n
                        .as_u64()
                        .map(BigInt::from)
                        .ok_or_else(|| Error::Parse(n.to_string())),
                    _ => Err(Error::Parse(v.to_string())),
                }
            };
            let bases = params
                .get("bases")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::InvalidInput("block family needs bases".into()))?
                .iter()
                .map(parse)
                .collect::<Result<Vec<_>>>()?;
            let mult = params
                .get("multipliers")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::InvalidInput("block family needs multipliers".into()))?
                .iter()
                .map(|q| {
                    q.as_array()
                        .ok_or_else(|| Error::InvalidInput("multipliers must be lists".into()))?
                        .iter()
                        .map(parse)
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            block_sequence(&bases, &mult)
        }
        "explicit" => {
            let terms = params
                .get("terms")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::InvalidInput("explicit family needs terms".into()))?
                .iter()
                .map(|v| match v {
                    Value::String(s) => s.parse().map_err(|_| Error::Parse(s.clone())),
                    Value::Number(n) => n
                        .as_u64()
                        .map(BigInt::from)
                        .ok_or_else(|| Error::Parse(n.to_string())),
                    _ => Err(Error::Parse(v.to_string())),
                })
                .collect::<Result<Vec<_>>>()?;
            let s = IndexedSequence::explicit(terms)?;
            match count {
                Some(c) => s.truncate(c),
                None => Ok(s),
            }
        }
        other => Err(Error::InvalidInput(format!("unknown family {other:?}"))),
    }
}

/// Smallest `k` with `n_k >= x`, if any.
pub fn first_index_at_least(seq: &IndexedSequence, x: &BigInt) -> Option<usize> {
    let i = seq.terms().partition_point(|t| t < x);
    (i < seq.len()).then_some(i + 1)
}

/// `n_k` as `u64` when it fits.
pub fn term_u64(seq: &IndexedSequence, k: usize) -> Option<u64> {
    seq.term(k).to_u64()
}
