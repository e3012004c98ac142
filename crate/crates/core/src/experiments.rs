//! Reproducible experiment drivers. Each one returns a JSON report, CSV tables
//! and a list of named checks; output depends only on the configuration.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_traits::{One, ToPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::groups::{block_square_series, prop7_negative_scan, witness_search, WitnessConstant};
use crate::ipcheck::{
    ip_window_deviation, section62_ginf_scan, section62_sequence, verify_lemma1, CoefficientSource,
    RieszSource,
};
use crate::kernels::{
    derive_phi_bound, fejer_coeff, fejer_coeffs_direct, fejer_eval, first_coeff_closed,
    first_coeff_scan, kahane_nonneg_check, kahane_phi, lower_bound_eq3_factor, max_cap,
    phi_normalization, phi_second_derivative_at_zero,
};
use crate::numeric::serde_fmt::rational_to_string;
use crate::numeric::{ball_to_decimal, rat, BigInt, Rational, RealBall};
use crate::oracle::{expand_product, quadrature_coeff};
use crate::riesz::{
    block_riesz_spec, check_dissociation, choose_m_sequence, coeff_lower_bound, riesz_coeff,
    unit_digit_product, Budget, RieszSpec,
};
use crate::sequences::{
    block_sequence, divisibility_profile, factor_chain, generate, prop7_sequence, th1_sequence,
    IndexedSequence, Prop7Rules,
};

/// Decimal digits used for every number written to a report.
pub const REPORT_DIGITS: usize = 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    Prop3Demo,
    Cor4,
    Prop5,
    ThmCor6,
    Prop7,
    ThmTh1,
    Lemma1,
    #[serde(rename = "kahane-61")]
    Kahane61,
    #[serde(rename = "section-62")]
    Section62,
}

impl Experiment {
    pub const ALL: [Experiment; 9] = [
        Experiment::Prop3Demo,
        Experiment::Cor4,
        Experiment::Prop5,
        Experiment::ThmCor6,
        Experiment::Prop7,
        Experiment::ThmTh1,
        Experiment::Lemma1,
        Experiment::Kahane61,
        Experiment::Section62,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Prop3Demo => "prop3-demo",
            Experiment::Cor4 => "cor4",
            Experiment::Prop5 => "prop5",
            Experiment::ThmCor6 => "thm-cor6",
            Experiment::Prop7 => "prop7",
            Experiment::ThmTh1 => "thm-th1",
            Experiment::Lemma1 => "lemma1",
            Experiment::Kahane61 => "kahane-61",
            Experiment::Section62 => "section-62",
        }
    }

    /// What the numbers of the report instantiate.
    pub fn anchor(self) -> &'static str {
        match self {
            Experiment::Prop3Demo => "kernel coefficients, normalisation and the quadratic lower bound",
            Experiment::Cor4 => "order construction from square-summable ratios; window deviation against the cosine product",
            Experiment::Prop5 => "block sequences with capped digits; certified product bound",
            Experiment::ThmCor6 => "eventually divisible sequences regrouped into blocks",
            Experiment::Prop7 => "slowly growing block family; p = 2 partial sums",
            Experiment::ThmTh1 => "square-block sequence; witness angle and block square sums",
            Experiment::Lemma1 => "subset sums over consecutive square blocks",
            Experiment::Kahane61 => "triangle self-convolution kernels on the Erdos-Taylor sequence",
            Experiment::Section62 => "subset-sum union of Erdos-Taylor blocks; signed fractional additivity",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown experiment {s:?}")))
    }
}

/// Optional knobs; each experiment reads the ones it uses and fills defaults.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k0: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub width: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub jmax: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mmax: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blocks: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qmax: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub depth: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    #[serde(default)]
    pub params: Params,
    pub precision: u32,
    pub seed: u64,
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment) -> Self {
        ExperimentConfig {
            experiment,
            params: Params::default(),
            precision: crate::numeric::DEFAULT_PRECISION,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)
            .map_err(|e| Error::Parse(e.to_string()))?;
        for r in &self.rows {
            w.write_record(r).map_err(|e| Error::Parse(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentOutput {
    pub config: ExperimentConfig,
    pub checks: Vec<Check>,
    pub results: Value,
    pub tables: Vec<(String, Table)>,
}

impl ExperimentOutput {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failed_checks(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.name.as_str())
            .collect()
    }

    pub fn report(&self) -> Value {
        json!({
            "experiment": self.config.experiment.name(),
            "anchor": self.config.experiment.anchor(),
            "config": self.config,
            "checks": self.checks,
            "pass": self.passed(),
            "results": self.results,
            "tables": self.tables.iter().map(|(n, _)| self.file_name(n)).collect::<Vec<_>>(),
        })
    }

    pub fn report_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(&self.report())
            .map_err(|e| Error::Parse(e.to_string()))?;
        s.push('\n');
        Ok(s)
    }

    pub fn file_name(&self, table: &str) -> String {
        format!("{}-{}.csv", self.config.experiment.name(), table)
    }

    /// Every output file as `(name, contents)`: the report first, then the tables.
    pub fn files(&self) -> Result<Vec<(String, String)>> {
        let mut out = vec![(
            format!("{}.json", self.config.experiment.name()),
            self.report_json()?,
        )];
        for (n, t) in &self.tables {
            out.push((self.file_name(n), t.to_csv()?));
        }
        Ok(out)
    }
}

fn dec(b: &RealBall) -> String {
    ball_to_decimal(b, REPORT_DIGITS).0
}

fn ball_json(b: &RealBall) -> Value {
    let (v, r) = ball_to_decimal(b, REPORT_DIGITS);
    json!({ "value": v, "radius": r })
}

fn q(x: &Rational) -> String {
    rational_to_string(x)
}

struct Checks(Vec<Check>);

impl Checks {
    fn add(&mut self, name: &str, pass: bool, detail: impl Into<String>) {
        self.0.push(Check {
            name: name.into(),
            pass,
            detail: detail.into(),
        });
    }
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    if config.precision < 32 {
        return Err(Error::InvalidInput(
            "precision must be at least 32 bits".into(),
        ));
    }
    let mut checks = Checks(Vec::new());
    let (results, tables) = match config.experiment {
        Experiment::Prop3Demo => prop3_demo(config, &mut checks)?,
        Experiment::Cor4 => cor4(config, &mut checks)?,
        Experiment::Prop5 => prop5(config, &mut checks)?,
        Experiment::ThmCor6 => thm_cor6(config, &mut checks)?,
        Experiment::Prop7 => prop7(config, &mut checks)?,
        Experiment::ThmTh1 => thm_th1(config, &mut checks)?,
        Experiment::Lemma1 => lemma1(config, &mut checks)?,
        Experiment::Kahane61 => kahane61(config, &mut checks)?,
        Experiment::Section62 => section62(config, &mut checks)?,
    };
    Ok(ExperimentOutput {
        config: config.clone(),
        checks: checks.0,
        results,
        tables,
    })
}

type Outcome = Result<(Value, Vec<(String, Table)>)>;

fn prop3_demo(c: &ExperimentConfig, checks: &mut Checks) -> Outcome {
    let prec = c.precision;
    let mmax = c.params.mmax.unwrap_or(64);
    if mmax == 0 {
        return Err(Error::InvalidInput("mmax must be positive".into()));
    }
    let mut table = Table::new(&[
        "m",
        "coeff0",
        "coeff1",
        "cos_pi_over_m_plus_2",
        "quadrature_mass",
        "cap",
        "min_eq3_slack",
    ]);
    let (mut norm_ok, mut first_ok, mut direct_ok, mut bound_ok) = (true, true, true, true);
    for m in 1..=mmax {
        let c0 = fejer_coeff(m, 0, prec);
        let mass = quadrature_coeff(
            |t| fejer_eval(m, t, prec),
            &BigInt::from(m + 1),
            &BigInt::from(0),
            2 * m + 3,
            prec,
        )?;
        norm_ok &= c0 == RealBall::one(prec) && mass.contains_rational(&Rational::one());
        let c1 = fejer_coeff(m, 1, prec);
        let cosine = first_coeff_closed(m, prec);
        first_ok &= c1.overlaps(&cosine);
        for (p, d) in fejer_coeffs_direct(m, prec).iter().enumerate() {
            direct_ok &= fejer_coeff(m, p as i64, prec).overlaps(d);
        }
        let cap = max_cap(m, prec);
        let mut slack: Option<RealBall> = None;
        for p in 1..=cap {
            let s = fejer_coeff(m, p as i64, prec).sub_ball(&lower_bound_eq3_factor(p, m, prec)?);
            bound_ok &= s.certainly_nonneg();
            slack = Some(match slack {
                Some(x) => x.min_ball(&s),
                None => s,
            });
        }
        table.push(vec![
            m.to_string(),
            dec(&c0),
            dec(&c1),
            dec(&cosine),
            dec(&mass),
            cap.to_string(),
            slack.map(|s| dec(&s)).unwrap_or_default(),
        ]);
    }
    checks.add(
        "normalisation",
        norm_ok,
        format!("Phat(0) = 1 and quadrature mass 1 for m <= {mmax}"),
    );
    checks.add("first-coefficient", first_ok, "Phat(1) = cos(pi/(m+2))");
    checks.add(
        "closed-equals-direct",
        direct_ok,
        "closed form overlaps the sine sum for every p",
    );
    checks.add(
        "quadratic-bound",
        bound_ok,
        "Phat(p) >= 1 - 3 pi^2 (p/(m+2))^2 for p <= floor((m+2)/pi)",
    );

    // three-factor product on (1, 10, 100)
    let spec = RieszSpec::from_u64(&[1, 10, 100], &[1, 1, 1])?;
    check_dissociation(&spec)?;
    let expansion = expand_product(&spec, 3, prec)?;
    let at111 = riesz_coeff(&BigInt::from(111), &spec, prec);
    let mut gap_zero = true;
    for (lo, hi) in spec.gap_intervals() {
        let mut n = &lo + 1u32;
        while n < hi {
            gap_zero &= expansion.get(&n).is_none() && riesz_coeff(&n, &spec, prec).mid().is_zero();
            n += 1u32;
        }
    }
    checks.add(
        "product-coefficient",
        at111.overlaps(&RealBall::from_rational(&rat(1, 8), prec)),
        "coefficient at 111 is 1/8",
    );
    checks.add(
        "gap-zeros",
        gap_zero,
        "no spectrum inside the gap intervals",
    );
    let results = json!({
        "mmax": mmax,
        "product": {
            "terms": ["1", "10", "100"],
            "orders": [1, 1, 1],
            "frequencies": expansion.len(),
            "collisions": expansion.collisions(),
            "coeff_111": ball_json(&at111),
        },
    });
    Ok((results, vec![("kernels".into(), table)]))
}

fn window_rows(spec: &RieszSpec, width: usize, prec: u32) -> Result<(Vec<Value>, Table)> {
    let active = spec.active();
    let (first, last) = match (active.first(), active.last()) {
        (Some(&a), Some(&b)) => (a, b),
        _ => return Err(Error::Infeasible("spec has no active index".into())),
    };
    let src = CoefficientSource::Riesz(RieszSource::new(spec.clone()));
    let mut rows = Vec::new();
    let mut table = Table::new(&["k0", "width", "deviation", "full_window_floor"]);
    for s in first..=last {
        let w = width.min(last - s + 1);
        let r = ip_window_deviation(&src, spec.seq(), s, w, prec)?;
        let floor = r.full_window_floor.clone().expect("riesz source");
        table.push(vec![
            s.to_string(),
            w.to_string(),
            dec(&r.deviation),
            dec(&floor),
        ]);
        rows.push(json!({
            "k0": s,
            "width": w,
            "deviation": ball_json(&r.deviation),
            "full_window_floor": ball_json(&floor),
            "worst_subset": r.worst_subset,
        }));
    }
    Ok((rows, table))
}

fn cor4(c: &ExperimentConfig, checks: &mut Checks) -> Outcome {
    let prec = c.precision;
    let family = c.params.family.clone().unwrap_or_else(|| "pow2sq".into());
    let count = c.params.count.unwrap_or(12);
    let k0 = c.params.k0.unwrap_or(6);
    let width = c.params.width.unwrap_or(6);
    let seq = generate(&family, &json!({}), Some(count))?;
    let spec = choose_m_sequence(&seq, &Budget::standard())?;
    let cert = check_dissociation(&spec)?;
    checks.add(
        "dissociation",
        true,
        format!("gaps nonnegative over {} terms", cert.horizon),
    );
    let last = *spec.active().last().expect("nonempty");
    if k0 == 0 || k0 > last {
        return Err(Error::InvalidInput(format!("k0 must lie in 1..={last}")));
    }
    let w = width.min(last - k0 + 1);
    let src = CoefficientSource::Riesz(RieszSource::new(spec.clone()));
    let main = ip_window_deviation(&src, &seq, k0, w, prec)?;
    let tail: Vec<usize> = (k0..=seq.len()).collect();
    let floor = RealBall::one(prec).sub_ball(&unit_digit_product(&tail, &spec, prec));
    checks.add(
        "window-floor",
        !main.deviation.certainly_gt(&floor) && main.deviation.overlaps(&floor),
        format!(
            "deviation on {k0}..{} equals 1 - prod_(k >= {k0}) cos(pi/(m_k+2))",
            k0 + w - 1
        ),
    );
    let (rows, table) = window_rows(&spec, width, prec)?;
    let devs: Vec<&Value> = rows.iter().map(|r| &r["deviation"]["value"]).collect();
    let monotone = rows.windows(2).all(|p| {
        let a = dec_value(&p[0]["deviation"]["value"]);
        let b = dec_value(&p[1]["deviation"]["value"]);
        b <= a + 1e-25
    });
    checks.add(
        "monotone-in-k0",
        monotone,
        format!("{} windows", devs.len()),
    );
    let construction = spec.construction().expect("constructed spec");
    let results = json!({
        "family": family,
        "count": count,
        "orders": spec.orders(),
        "dropped": construction.dropped,
        "epsilons": construction.epsilons.iter().map(q).collect::<Vec<_>>(),
        "weighted_sum": q(&construction.weighted_sum),
        "threshold": q(&construction.threshold),
        "gaps": cert.gaps.iter().map(|g| g.to_string()).collect::<Vec<_>>(),
        "gaps_increasing": cert.gaps_increasing,
        "main_window": {
            "k0": k0,
            "width": w,
            "requested_width": width,
            "deviation": ball_json(&main.deviation),
            "worst_subset": main.worst_subset,
            "tail_floor": ball_json(&floor),
        },
        "windows": rows,
    });
    Ok((results, vec![("windows".into(), table)]))
}

fn dec_value(v: &Value) -> f64 {
    v.as_str().and_then(|s| s.parse().ok()).unwrap_or(f64::NAN)
}

fn prop5(c: &ExperimentConfig, checks: &mut Checks) -> Outcome {
    let prec = c.precision;
    let ratio = c.params.ratio.unwrap_or(10_000);
    let levels = c.params.levels.unwrap_or(8);
    if ratio < 4 || levels < 3 {
        return Err(Error::InvalidInput(
            "need ratio >= 4 and at least three levels".into(),
        ));
    }
    let bases: Vec<BigInt> = (0..levels as u32)
        .map(|l| BigInt::from(ratio).pow(l))
        .collect();
    let mult: Vec<Vec<BigInt>> = (0..levels)
        .map(|l| {
            if l % 2 == 0 {
                vec![1.into(), 2.into()]
            } else {
                vec![1.into()]
            }
        })
        .collect();
    let seq = block_sequence(&bases, &mult)?;
    let spec = block_riesz_spec(&seq, &Budget::blocks())?;
    check_dissociation(&spec)?;
    let caps = spec.caps().expect("block spec has caps").to_vec();
    let active = spec.active();
    let caps_ok = active
        .iter()
        .all(|&k| crate::kernels::cap_admissible(caps[k - 1], spec.order(k), prec));
    checks.add("caps", caps_ok, "q_l pi <= m_l + 2 on every active level");
    // every block subset sum over three consecutive active levels
    let window: Vec<usize> = active
        .iter()
        .copied()
        .rev()
        .take(3)
        .collect::<Vec<_>>()
        .into_iter()
        .rev()
        .collect();
    let bound = coeff_lower_bound(&window, &spec, prec)?;
    let mut sound = true;
    let mut count = 0usize;
    let digit_sets: Vec<Vec<u64>> = window
        .iter()
        .map(|&l| {
            let b = seq.block(l).expect("level exists");
            let q: Vec<u64> = b
                .multipliers
                .iter()
                .map(|x| x.to_u64().unwrap_or(0))
                .collect();
            let mut sums: BTreeSet<u64> = BTreeSet::new();
            for mask in 1u32..1 << q.len() {
                sums.insert(
                    (0..q.len())
                        .filter(|i| mask >> i & 1 == 1)
                        .map(|i| q[i])
                        .sum(),
                );
            }
            sums.into_iter().collect()
        })
        .collect();
    let mut idx = vec![0usize; window.len()];
    loop {
        let n: BigInt = window
            .iter()
            .zip(&idx)
            .enumerate()
            .map(|(i, (&l, &j))| spec.seq().term(l) * digit_sets[i][j])
            .sum();
        sound &= !bound.certainly_gt(&riesz_coeff(&n, &spec, prec));
        count += 1;
        let mut i = 0;
        while i < idx.len() {
            idx[i] += 1;
            if idx[i] < digit_sets[i].len() {
                break;
            }
            idx[i] = 0;
            i += 1;
        }
        if i == idx.len() {
            break;
        }
    }
    checks.add(
        "bound-below-coefficients",
        sound,
        format!("{count} block subset sums on levels {window:?}"),
    );
    let mut table = Table::new(&["level", "base", "cap", "order", "factor"]);
    for k in 1..=spec.len() {
        let factor = if spec.order(k) > 0 {
            dec(&lower_bound_eq3_factor(caps[k - 1], spec.order(k), prec)?)
        } else {
            String::new()
        };
        table.push(vec![
            k.to_string(),
            spec.seq().term(k).to_string(),
            caps[k - 1].to_string(),
            spec.order(k).to_string(),
            factor,
        ]);
    }
    let results = json!({
        "ratio": ratio,
        "levels": levels,
        "orders": spec.orders(),
        "caps": caps,
        "weighted_sum": q(&spec.construction().expect("constructed").weighted_sum),
        "window": window,
        "window_bound": ball_json(&bound),
    });
    Ok((results, vec![("levels".into(), table)]))
}

fn thm_cor6(c: &ExperimentConfig, checks: &mut Checks) -> Outcome {
    let count = c.params.count.unwrap_or(12);
    let jump = c.params.ratio.unwrap_or(100_000);
    if count < 7 {
        return Err(Error::InvalidInput("count must be at least 7".into()));
    }
    // n_k | n_{k+1} except at every third index, where the ratio jumps
    let mut terms = vec![BigInt::one()];
    for k in 1..count {
        let prev = terms[k - 1].clone();
        terms.push(if k % 3 == 0 {
            prev * jump + 1u32
        } else {
            prev * 2u32
        });
    }
    let seq = IndexedSequence::new(
        "eventually-divisible",
        json!({ "count": count, "jump": jump }),
        terms,
    )?;
    let s_set = divisibility_profile(&seq);
    let chain = factor_chain(&seq, &s_set)?;
    checks.add(
        "within-double",
        chain.all_within_double(),
        "q_l <= 2 q_(r_l, l) on every block",
    );
    let bseq = chain.to_block_sequence()?;
    let spec = block_riesz_spec(&bseq, &Budget::blocks())?;
    check_dissociation(&spec)?;
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
        .filter(|&&k| k < seq.len())
        .map(|&k| {
            let r = Rational::new(seq.term(k).clone(), seq.term(k + 1).clone());
            &r * &r
        })
        .sum::<Rational>()
        * rat(4, 1);
    checks.add(
        "ratio-comparison",
        lhs <= rhs,
        "sum (q_l p_l/p_(l+1))^2 <= 4 sum_(k in S) (n_k/n_(k+1))^2",
    );
    let mut table = Table::new(&["level", "start", "end", "base", "total", "closed"]);
    for b in &chain.blocks {
        table.push(vec![
            b.level.to_string(),
            b.start.to_string(),
            b.end.to_string(),
            b.base.to_string(),
            b.total.to_string(),
            b.closed.to_string(),
        ]);
    }
    let results = json!({
        "terms": seq.terms().iter().map(|t| t.to_string()).collect::<Vec<_>>(),
        "non_divisible": s_set,
        "block_orders": spec.orders(),
        "block_caps": spec.caps(),
        "lhs": q(&lhs),
        "rhs": q(&rhs),
    });
    Ok((results, vec![("chain".into(), table)]))
}

fn sample_angles(seed: u64, count: usize, max_denominator: i64) -> Vec<Rational> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let d = rng.gen_range(2..=max_denominator);
            let n = rng.gen_range(1..d);
            rat(n, d)
        })
        .collect()
}

fn prop7(c: &ExperimentConfig, checks: &mut Checks) -> Outcome {
    let prec = c.precision;
    let blocks = c.params.blocks.unwrap_or(7);
    let samples = c.params.samples.unwrap_or(5);
    let seq = prop7_sequence(&Prop7Rules::SqrtLog, blocks)?;
    let p2 = seq
        .base(2)
        .ok_or_else(|| Error::InvalidInput("need at least two blocks".into()))?
        .clone();
    let mut thetas = vec![rat(1, 2), Rational::new(BigInt::one(), p2)];
    thetas.extend(sample_angles(c.seed, samples.saturating_sub(2), 97));
    thetas.truncate(samples);
    let scan = prop7_negative_scan(&seq, &thetas, seq.len(), prec)?;
    let need = (4 * samples).div_ceil(5);
    checks.add(
        "growing-partial-sums",
        scan.growing_count >= need,
        format!(
            "{} of {} samples growing ({})",
            scan.growing_count, samples, scan.label
        ),
    );
    let mut table = Table::new(&["theta", "level", "frac_square_sum", "increment"]);
    for s in &scan.samples {
        for b in &s.blocks {
            table.push(vec![
                q(&s.theta),
                b.level.to_string(),
                q(&b.frac_square_sum),
                dec(&b.increment),
            ]);
        }
    }
    let results = json!({
        "blocks": blocks,
        "terms": seq.len(),
        "bases": seq.bases().unwrap_or(&[]).iter().map(|b| b.to_string()).collect::<Vec<_>>(),
        "label": scan.label,
        "growing_count": scan.growing_count,
        "samples": scan.samples.iter().map(|s| json!({
            "theta": q(&s.theta),
            "partial_sum": ball_json(&s.partial_sum),
            "growing": s.growing,
        })).collect::<Vec<_>>(),
    });
    Ok((results, vec![("blocks".into(), table)]))
}

fn thm_th1(c: &ExperimentConfig, checks: &mut Checks) -> Outcome {
    let prec = c.precision;
    let depth = c.params.depth.unwrap_or(5);
    let seq = th1_sequence(depth + 1)?;
    let cert = witness_search(
        seq.bases().expect("bases"),
        2,
        &WitnessConstant::TwoPi,
        depth,
        prec,
    )?;
    checks.add(
        "witness-certificate",
        cert.verify(prec).is_ok(),
        format!("{} levels", cert.entries.len()),
    );
    let series = block_square_series(&cert.theta, &seq, prec)?;
    let mut table = Table::new(&[
        "level",
        "base",
        "frac",
        "bound",
        "distance",
        "block_square_sum",
    ]);
    for (e, (_, s)) in cert.entries.iter().zip(&series) {
        table.push(vec![
            e.level.to_string(),
            e.base.to_string(),
            q(&e.frac),
            q(&e.bound),
            dec(&e.distance),
            dec(s),
        ]);
    }
    let lemma: Vec<Value> = [(2usize, 0usize), (3, 0), (2, 1)]
        .iter()
        .map(|&(l, qq)| {
            verify_lemma1(l, qq)
                .map(|c| json!({ "l": l, "q": qq, "top": c.top.to_string(), "count": c.count }))
        })
        .collect::<Result<_>>()?;
    checks.add(
        "sumsets",
        true,
        "consecutive multiples over blocks (2,0), (3,0), (2,1)",
    );
    let results = json!({
        "theta": q(&cert.theta),
        "interval": [q(&cert.lo), q(&cert.hi)],
        "bases": seq.bases().unwrap_or(&[]).iter().map(|b| b.to_string()).collect::<Vec<_>>(),
        "block_square_sums": series.iter().map(|(l, s)| json!({ "level": l, "sum": ball_json(s) })).collect::<Vec<_>>(),
        "sumsets": lemma,
    });
    Ok((results, vec![("witness".into(), table)]))
}

fn lemma1(c: &ExperimentConfig, checks: &mut Checks) -> Outcome {
    let l = c.params.l.unwrap_or(2);
    let qq = c.params.q.unwrap_or(1);
    let cert = verify_lemma1(l, qq)?;
    checks.add(
        "sumset",
        true,
        format!(
            "subset sums over blocks {l}..={} are s * {} for s = 1..={}",
            l + qq,
            cert.base,
            cert.top
        ),
    );
    let mut table = Table::new(&["s", "value"]);
    let mut s = BigInt::one();
    while s <= cert.top {
        table.push(vec![s.to_string(), (&s * &cert.base).to_string()]);
        s += 1u32;
    }
    let results = serde_json::to_value(&cert).map_err(|e| Error::Parse(e.to_string()))?;
    Ok((results, vec![("sums".into(), table)]))
}

fn kahane61(c: &ExperimentConfig, checks: &mut Checks) -> Outcome {
    let prec = c.precision;
    let jmax = c.params.jmax.unwrap_or(50);
    if jmax < 30 {
        return Err(Error::InvalidInput("jmax must be at least 30".into()));
    }
    let a = phi_normalization();
    checks.add("normalisation", a == rat(9, 1), format!("a = {}", q(&a)));
    let at_sixth = kahane_phi(&rat(1, 6));
    checks.add(
        "phi-at-one-sixth",
        at_sixth == rat(1, 4),
        format!("phi(1/6) = {}", q(&at_sixth)),
    );
    let mut phi = Table::new(&["x", "phi"]);
    for i in 0..=16 {
        let x = rat(i, 48);
        phi.push(vec![q(&x), q(&kahane_phi(&x))]);
    }
    let mut minima = Table::new(&["j", "grid", "min", "argmin", "certified"]);
    let mut nonneg = true;
    let mut minima_rows = Vec::new();
    for j in [2u64, 7, 30] {
        let r = kahane_nonneg_check(j, 256, prec)?;
        nonneg &= !r.min.certainly_negative();
        minima_rows.push(
            json!({ "j": j, "min": dec(&r.min), "argmin": r.argmin, "certified": r.certified }),
        );
        minima.push(vec![
            j.to_string(),
            r.grid.to_string(),
            dec(&r.min),
            r.argmin.to_string(),
            r.certified.to_string(),
        ]);
    }
    checks.add(
        "nonnegative",
        nonneg,
        "minima on 256-point grids for j = 2, 7, 30",
    );
    let bound = derive_phi_bound();
    checks.add(
        "phi-bound",
        bound.verify(),
        format!(
            "phi(x) >= 1 - {} x^2 on |x| <= {}",
            q(&bound.c),
            q(&bound.gamma)
        ),
    );
    let fails = first_coeff_scan(&bound, jmax);
    checks.add(
        "first-coefficient",
        fails.is_empty(),
        format!("Phat_j(1) >= 1 - c/j^2 for {} <= j <= {jmax}", bound.j0),
    );
    let degree_fails = crate::kernels::degree_scan(jmax);
    checks.add(
        "degree",
        degree_fails.is_empty(),
        format!("deg P_j <= floor(j/3) for j <= {jmax}"),
    );
    let mut first = Table::new(&["j", "first_coeff", "lower"]);
    for j in bound.j0..=jmax {
        let p = crate::kernels::kahane_poly(j)?;
        let lower = Rational::one() - &bound.c / Rational::from_integer(BigInt::from(j * j));
        first.push(vec![j.to_string(), q(&p.coeff(1)), q(&lower)]);
    }
    let results = json!({
        "a": q(&a),
        "phi_second_derivative_at_zero": q(&phi_second_derivative_at_zero()),
        "c": q(&bound.c),
        "gamma": q(&bound.gamma),
        "j0": bound.j0,
        "leaves": bound.leaves,
        "jmax": jmax,
        "minima": minima_rows,
    });
    Ok((
        results,
        vec![
            ("phi".into(), phi),
            ("minima".into(), minima),
            ("first-coeff".into(), first),
        ],
    ))
}

fn section62(c: &ExperimentConfig, checks: &mut Checks) -> Outcome {
    let prec = c.precision;
    let qmax = c.params.qmax.unwrap_or(2);
    let samples = c.params.samples.unwrap_or(10);
    let seq = section62_sequence(qmax)?;
    let p1: Vec<String> = seq.terms()[..3].iter().map(|t| t.to_string()).collect();
    checks.add(
        "first-block",
        p1 == ["5", "16", "21"],
        format!("P_1 = {{{}}}", p1.join(", ")),
    );
    let thetas = sample_angles(c.seed, samples, 1000);
    let scans = section62_ginf_scan(&thetas, qmax, prec)?;
    let applicable: usize = scans
        .iter()
        .flat_map(|s| &s.blocks)
        .map(|b| b.applicable)
        .sum();
    checks.add(
        "additivity",
        true,
        format!("no violation in {applicable} applicable pairs"),
    );
    let mut table = Table::new(&["theta", "q", "pairs", "applicable", "max_dist", "frac_sum"]);
    for s in &scans {
        for b in &s.blocks {
            table.push(vec![
                q(&s.theta),
                b.q.to_string(),
                b.pairs.to_string(),
                b.applicable.to_string(),
                dec(&b.max_dist),
                q(&b.frac_sum),
            ]);
        }
    }
    let results = json!({
        "qmax": qmax,
        "terms": seq.terms().iter().map(|t| t.to_string()).collect::<Vec<_>>(),
        "markers": seq.markers(),
        "thetas": thetas.iter().map(q).collect::<Vec<_>>(),
    });
    Ok((results, vec![("blocks".into(), table)]))
}

/// Series that can be extracted from reports for plotting.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlotKind {
    /// Window deviation against the starting index, from a `cor4` report.
    DeviationVsK0,
    /// Partial sums against the horizon, from a group scan.
    PartialSums,
    /// Grid minima against the kernel index, from a `kahane-61` report.
    KahaneMinima,
}

impl FromStr for PlotKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "deviation-vs-k0" => Ok(PlotKind::DeviationVsK0),
            "partial-sums" => Ok(PlotKind::PartialSums),
            "kahane-minima" => Ok(PlotKind::KahaneMinima),
            _ => Err(Error::InvalidInput(format!("unknown plot kind {s:?}"))),
        }
    }
}

fn array<'a>(v: &'a Value, path: &[&str]) -> Result<&'a Vec<Value>> {
    let mut cur = v;
    for p in path {
        cur = cur.get(p).ok_or_else(|| {
            Error::InvalidInput(format!("report has no field {:?}", path.join(".")))
        })?;
    }
    cur.as_array()
        .ok_or_else(|| Error::InvalidInput(format!("{:?} is not a list", path.join("."))))
}

/// Plain two-column series from a report.
pub fn emit_plotdata(report: &Value, kind: PlotKind) -> Result<Table> {
    match kind {
        PlotKind::DeviationVsK0 => {
            let mut t = Table::new(&["k0", "deviation"]);
            for row in array(report, &["results", "windows"])? {
                t.push(vec![
                    row["k0"].to_string(),
                    row["deviation"]["value"].as_str().unwrap_or("").to_string(),
                ]);
            }
            Ok(t)
        }
        PlotKind::PartialSums => {
            let mut t = Table::new(&["k", "value"]);
            for (i, b) in array(report, &["values"])?.iter().enumerate() {
                let repr: crate::numeric::serde_fmt::BallRepr =
                    serde_json::from_value(b.clone()).map_err(|e| Error::Parse(e.to_string()))?;
                let ball = RealBall::try_from(repr)?;
                t.push(vec![(i + 1).to_string(), dec(&ball)]);
            }
            Ok(t)
        }
        PlotKind::KahaneMinima => {
            let mut t = Table::new(&["j", "min"]);
            for row in array(report, &["results", "minima"])? {
                t.push(vec![
                    row["j"].to_string(),
                    row["min"].as_str().unwrap_or("").to_string(),
                ]);
            }
            Ok(t)
        }
    }
}
