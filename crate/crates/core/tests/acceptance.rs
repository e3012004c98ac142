//! One PASS/FAIL line per acceptance criterion. Run with
//! `cargo test -p ipriesz-core --test acceptance`.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use num_traits::{Signed, ToPrimitive, Zero};

use ipriesz_core::experiments::{run_experiment, Experiment, ExperimentConfig};
use ipriesz_core::groups::{
    et_divergence_check, prop7_negative_scan, witness_search, WitnessConstant,
};
use ipriesz_core::ipcheck::{
    ip_window_deviation, section62_ginf_scan, section62_sequence, verify_lemma1, CoefficientSource,
    RieszSource,
};
use ipriesz_core::kernels::{
    derive_phi_bound, fejer_coeff, fejer_eval, first_coeff_scan, kahane_nonneg_check, kahane_phi,
    kahane_poly, max_cap, phi_normalization,
};
use ipriesz_core::numeric::{rat, RealBall};
use ipriesz_core::oracle::{
    compare, expand_product, quadrature_coeff, quadrature_table, riesz_evaluator, SparseSpectrum,
};
use ipriesz_core::riesz::{
    all_digit_vectors, check_dissociation, choose_m_sequence, coeff_lower_bound, riesz_coeff,
    Budget, RieszSpec,
};
use ipriesz_core::sequences::{
    erdos_taylor, pow2sq, prop7_sequence, ratio_series, th1_sequence, Prop7Rules,
};
use ipriesz_core::{BigInt, Rational};

const PREC: u32 = 128;

/// Id, name, time limit in seconds, check.
type Criterion = (u32, &'static str, u64, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn ok(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

/// `cos(pi/(m+2))`, computed from the ball cosine.
fn cos_unit(m: u64) -> RealBall {
    RealBall::from_rational(&rat(1, m as i64 + 2), PREC).cos_pi()
}

/// `1 - 3 pi^2 (p/(m+2))^2`, clamped at zero.
fn quadratic_floor(p: u64, m: u64) -> RealBall {
    let pi = RealBall::pi(PREC);
    let r = RealBall::from_rational(&rat(p as i64, m as i64 + 2), PREC);
    let v = RealBall::one(PREC).sub_ball(&pi.sqr().mul_ball(&r.sqr()).mul_int(&BigInt::from(3)));
    v.max_ball(&RealBall::zero(PREC))
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

fn small_specs() -> Vec<RieszSpec> {
    vec![
        RieszSpec::from_u64(&[1, 10, 100], &[3, 3, 3]).unwrap(),
        RieszSpec::from_u64(&[1, 10, 100], &[1, 2, 3]).unwrap(),
        RieszSpec::from_u64(&[1, 8, 64, 512], &[3, 3, 3, 3]).unwrap(),
        RieszSpec::from_u64(&[1, 9, 80, 700], &[2, 3, 1, 3]).unwrap(),
    ]
}

fn c1() -> Outcome {
    let mut bad = Vec::new();
    for m in 1..=64u64 {
        let c0 = fejer_coeff(m, 0, PREC);
        let mass = quadrature_coeff(
            |t| fejer_eval(m, t, PREC),
            &BigInt::from(m + 1),
            &BigInt::zero(),
            2 * m + 3,
            PREC,
        )
        .unwrap();
        let one = Rational::from_integer(1.into());
        if !c0.contains_rational(&one) || !mass.contains_rational(&one) || mass.rad_f64() > 1e-30 {
            bad.push(m);
        }
    }
    ok(bad.is_empty(), format!("m = 1..64, failures {bad:?}"))
}

fn subsets_product_check(spec: &RieszSpec, idx: &[usize]) -> usize {
    let mut bad = 0;
    for mask in 1u32..1 << idx.len() {
        let f: Vec<usize> = (0..idx.len())
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| idx[i])
            .collect();
        let n: BigInt = f.iter().map(|&k| spec.seq().term(k).clone()).sum();
        let expect = f
            .iter()
            .filter(|&&k| spec.order(k) > 0)
            .fold(RealBall::one(PREC), |acc, &k| {
                acc.mul_ball(&cos_unit(spec.order(k)))
            });
        if !riesz_coeff(&n, spec, PREC).overlaps(&expect) {
            bad += 1;
        }
    }
    bad
}

fn c2() -> Outcome {
    let explicit = RieszSpec::from_u64(
        &[1, 100, 10_000, 1_000_000, 100_000_000, 10_000_000_000],
        &[1, 2, 3, 4, 5, 6],
    )
    .unwrap();
    let constructed = choose_m_sequence(&pow2sq(12).unwrap(), &Budget::standard()).unwrap();
    let mut checked = 0;
    let mut bad = 0;
    for (spec, idx) in [
        (&explicit, vec![1, 2, 3, 4, 5, 6]),
        (&constructed, vec![6, 7, 8, 9, 10, 11]),
    ] {
        if check_dissociation(spec).is_err() {
            return ok(false, "spec not dissociated");
        }
        bad += subsets_product_check(spec, &idx);
        checked += 63;
    }
    ok(
        bad == 0,
        format!("{checked} subsets over two 6-term specs, {bad} mismatches"),
    )
}

fn c3() -> Outcome {
    let mut kernel_bad = 0;
    let mut pairs = 0;
    for m in 1..=64u64 {
        for p in 1..=max_cap(m, PREC) {
            pairs += 1;
            if !fejer_coeff(m, p as i64, PREC).certainly_ge(&quadratic_floor(p, m)) {
                kernel_bad += 1;
            }
        }
    }
    let specs = [
        RieszSpec::from_u64(&[1, 100, 10_000], &[10, 10, 10])
            .unwrap()
            .with_caps(vec![3, 3, 3])
            .unwrap(),
        RieszSpec::from_u64(&[1, 100, 10_000], &[20, 7, 30])
            .unwrap()
            .with_caps(vec![6, 2, 9])
            .unwrap(),
    ];
    let mut vectors = 0;
    let mut product_bad = 0;
    for spec in &specs {
        check_dissociation(spec).unwrap();
        let caps = spec.caps().unwrap().to_vec();
        let ranges: Vec<i64> = caps.iter().map(|&c| c as i64).collect();
        for d in all_digit_vectors(spec).unwrap() {
            if d.iter().zip(&ranges).any(|(x, c)| x.abs() > *c) || d.iter().all(|&x| x == 0) {
                continue;
            }
            vectors += 1;
            let n: BigInt = d
                .iter()
                .enumerate()
                .map(|(i, &x)| spec.seq().term(i + 1) * x)
                .sum();
            let coeff = riesz_coeff(&n, spec, PREC);
            let support: Vec<usize> = (0..3).filter(|&i| d[i] != 0).map(|i| i + 1).collect();
            let digit_floor = support.iter().fold(RealBall::one(PREC), |acc, &k| {
                acc.mul_ball(&quadratic_floor(d[k - 1].unsigned_abs(), spec.order(k)))
            });
            let cap_floor = coeff_lower_bound(&support, spec, PREC).unwrap();
            if digit_floor.certainly_gt(&coeff) || cap_floor.certainly_gt(&coeff) {
                product_bad += 1;
            }
        }
    }
    ok(
        kernel_bad == 0 && product_bad == 0,
        format!(
            "{pairs} kernel pairs ({kernel_bad} bad), {vectors} digit vectors ({product_bad} bad)"
        ),
    )
}

fn c4() -> Outcome {
    let mut worst = 0.0f64;
    let mut pass = true;
    let mut quad_bad = 0;
    let mut freqs = 0;
    for spec in small_specs() {
        check_dissociation(&spec).unwrap();
        let table = expand_product(&spec, spec.len(), PREC).unwrap();
        let mut direct = SparseSpectrum::new();
        for n in table.frequencies() {
            direct.insert(n.clone(), riesz_coeff(n, &spec, PREC));
        }
        let r = compare(&table, &direct, 1e-12).unwrap();
        pass &= r.pass && r.only_left == 0 && r.only_right == 0;
        worst = worst.max(r.max_abs_diff);
        let bw = spec.bandwidth();
        let keys: Vec<BigInt> = table.frequencies().cloned().collect();
        let nodes = (2u32 * &bw + 1u32).to_u64().unwrap();
        let quad = quadrature_table(riesz_evaluator(&spec, PREC), &bw, &keys, nodes, PREC).unwrap();
        for n in &keys {
            freqs += 1;
            if !quad.get(n).unwrap().overlaps(table.get(n).unwrap()) {
                quad_bad += 1;
            }
        }
    }
    ok(
        pass && worst <= 1e-12 && quad_bad == 0,
        format!("{freqs} frequencies, max |expand - closed| = {worst:.1e}, quadrature misses {quad_bad}"),
    )
}

fn c5() -> Outcome {
    let mut specs = small_specs();
    specs.push(RieszSpec::from_u64(&[1, 100, 10_000], &[20, 7, 30]).unwrap());
    let mut checked = 0u64;
    let mut bad = 0u64;
    for spec in &specs {
        check_dissociation(spec).unwrap();
        let table = expand_product(spec, spec.len(), PREC).unwrap();
        let gaps = spec.gap_intervals();
        for n in table.frequencies() {
            let a = n.abs();
            if gaps.iter().any(|(lo, hi)| &a > lo && &a < hi) {
                bad += 1;
            }
        }
        for (lo, hi) in &gaps {
            let mut n = lo + 1u32;
            while &n < hi {
                checked += 1;
                if table.get(&n).is_some() || !riesz_coeff(&n, spec, PREC).contains_zero() {
                    bad += 1;
                }
                n += 1u32;
            }
        }
    }
    ok(
        bad == 0,
        format!(
            "{checked} gap integers over {} specs, {bad} nonzero",
            specs.len()
        ),
    )
}

fn c6() -> Outcome {
    let mut details = Vec::new();
    let mut pass = true;
    for (l, q) in [(2usize, 0usize), (3, 0), (2, 1)] {
        let cert = match verify_lemma1(l, q) {
            Ok(c) => c,
            Err(e) => return ok(false, format!("({l},{q}): {e}")),
        };
        // brute-force subset sums of blocks l..=l+q
        let seq = th1_sequence(l + q + 1).unwrap();
        let lo = seq.block(l).unwrap().start;
        let hi = seq.block(l + q).unwrap().end;
        let mut sums: BTreeSet<BigInt> = BTreeSet::new();
        for k in lo..=hi {
            let t = seq.term(k).clone();
            let next: Vec<BigInt> = sums.iter().map(|s| s + &t).collect();
            sums.extend(next);
            sums.insert(t);
        }
        let pl = seq.base(l).unwrap().clone();
        let top: BigInt = (l + 1..=l + q + 1)
            .map(|j| seq.base(j).unwrap().clone())
            .sum::<BigInt>()
            / &pl;
        let expect: BTreeSet<BigInt> = num_iter(&top).map(|s| s * &pl).collect();
        let equal = sums == expect && cert.top == top && BigInt::from(cert.count) == top;
        pass &= equal;
        details.push(format!("({l},{q}) top {top}"));
    }
    ok(
        pass,
        format!(
            "{}; equality against the corrected closed form",
            details.join(", ")
        ),
    )
}

fn num_iter(top: &BigInt) -> impl Iterator<Item = BigInt> {
    let t = top.to_u64().unwrap();
    (1..=t).map(BigInt::from)
}

fn c7() -> Outcome {
    let seq = pow2sq(12).unwrap();
    let spec = match choose_m_sequence(&seq, &Budget::standard()) {
        Ok(s) => s,
        Err(e) => return ok(false, format!("construction failed: {e}")),
    };
    if let Err(e) = check_dissociation(&spec) {
        return ok(false, format!("dissociation failed: {e}"));
    }
    let src = CoefficientSource::Riesz(RieszSource::new(spec.clone()));
    let r = ip_window_deviation(&src, &seq, 6, 6, PREC).unwrap();
    let tail = (6..=seq.len())
        .filter(|&k| spec.order(k) > 0)
        .fold(RealBall::one(PREC), |acc, k| {
            acc.mul_ball(&cos_unit(spec.order(k)))
        });
    let floor = RealBall::one(PREC).sub_ball(&tail);
    let full: BigInt = (6..=11).map(|k| seq.term(k).clone()).sum();
    let at_full = RealBall::one(PREC).sub_ball(&riesz_coeff(&full, &spec, PREC));
    let pass = !r.deviation.certainly_gt(&floor)
        && at_full.overlaps(&floor)
        && r.deviation.overlaps(&floor);
    ok(
        pass,
        format!(
            "orders {:?}, deviation {:.6}, floor {:.6}",
            spec.orders(),
            r.deviation.to_f64(),
            floor.to_f64()
        ),
    )
}

fn c8() -> Outcome {
    let a = phi_normalization();
    let tri = |t: f64| (1.0 - 6.0 * t.abs()).max(0.0);
    let a_num = 1.0 / simpson(|t| tri(t) * tri(t), -1.0 / 6.0, 1.0 / 6.0, 6000);
    let phi_sixth = 9.0 * simpson(|t| tri(t) * tri(1.0 / 6.0 - t), 0.0, 1.0 / 6.0, 6000);
    let a_ok = a == rat(9, 1) && (a_num - 9.0).abs() < 1e-9;
    let sixth_ok = kahane_phi(&rat(1, 6)) == rat(1, 4) && (phi_sixth - 0.25).abs() < 1e-9;
    let degree_bad = ipriesz_core::kernels::degree_scan(10_000);
    let direct_degree_bad: Vec<u64> = [1u64, 2, 3, 4, 5, 6, 7, 30, 299, 300, 301, 10_000]
        .into_iter()
        .filter(|&j| kahane_poly(j).unwrap().degree() > j / 3)
        .collect();
    let mut nonneg = true;
    for j in [2u64, 7, 30] {
        match kahane_nonneg_check(j, 256, PREC) {
            Ok(r) => nonneg &= !r.min.certainly_negative(),
            Err(_) => nonneg = false,
        }
    }
    let bound = derive_phi_bound();
    let first_bad = first_coeff_scan(&bound, 200);
    let pass = a_ok
        && sixth_ok
        && degree_bad.is_empty()
        && direct_degree_bad.is_empty()
        && nonneg
        && bound.verify()
        && first_bad.is_empty();
    ok(
        pass,
        format!(
            "a = {a}, phi(1/6) = {}, (c, gamma) = ({}, {}), j0 = {}, degree failures {}, coefficient failures {}",
            kahane_phi(&rat(1, 6)),
            bound.c,
            bound.gamma,
            bound.j0,
            degree_bad.len() + direct_degree_bad.len(),
            first_bad.len()
        ),
    )
}

fn c9() -> Outcome {
    let mut pass = true;
    for theta in [rat(1, 2), rat(1, 3), rat(1, 7), rat(3, 8)] {
        match et_divergence_check(&theta, 30, PREC) {
            Ok(r) => pass &= r.undecided == 0 && r.holds == 30,
            Err(_) => pass = false,
        }
    }
    let seq = erdos_taylor(31).unwrap();
    let series = ratio_series(&seq, 2, 30, None).unwrap();
    let mut basel = Rational::zero();
    for (k, s) in series.iter().enumerate() {
        let k = k as i64 + 1;
        basel += rat(1, k * k);
        pass &= *s <= basel;
    }
    ok(
        pass,
        "theta in {1/2, 1/3, 1/7, 3/8}, K = 30; ratio partial sums below sum 1/k^2",
    )
}

fn c10() -> Outcome {
    let seq = th1_sequence(6).unwrap();
    let witness = witness_search(seq.bases().unwrap(), 2, &WitnessConstant::TwoPi, 5, PREC);
    let witness_ok = matches!(&witness, Ok(c) if !c.entries.is_empty() && c.verify(PREC).is_ok());
    let p7 = prop7_sequence(&Prop7Rules::SqrtLog, 7).unwrap();
    let mut thetas = vec![
        rat(1, 2),
        Rational::new(1.into(), p7.base(2).unwrap().clone()),
    ];
    thetas.extend([rat(2, 7), rat(5, 13), rat(17, 41)]);
    let scan = prop7_negative_scan(&p7, &thetas, p7.len(), PREC).unwrap();
    ok(
        witness_ok && scan.growing_count >= 4,
        format!(
            "witness theta = {}; growing p = 2 sums for {}/5 samples ({})",
            witness
                .as_ref()
                .map(|c| c.theta.to_string())
                .unwrap_or_else(|e| e.to_string()),
            scan.growing_count,
            scan.label
        ),
    )
}

fn c11() -> Outcome {
    let seq = section62_sequence(2).unwrap();
    let p1: Vec<BigInt> = seq.terms()[..3].to_vec();
    let p1_ok =
        p1 == [BigInt::from(5), BigInt::from(16), BigInt::from(21)] && seq.marker(1) == Some(3);
    let thetas: Vec<Rational> = [
        (1, 3),
        (2, 5),
        (3, 7),
        (1, 11),
        (5, 13),
        (7, 17),
        (4, 19),
        (10, 23),
        (12, 29),
        (100, 331),
    ]
    .iter()
    .map(|&(n, d)| rat(n, d))
    .collect();
    match section62_ginf_scan(&thetas, 2, PREC) {
        Ok(scans) => {
            let applicable: usize = scans
                .iter()
                .flat_map(|s| &s.blocks)
                .map(|b| b.applicable)
                .sum();
            let pairs: usize = scans.iter().flat_map(|s| &s.blocks).map(|b| b.pairs).sum();
            ok(
                p1_ok,
                format!("P_1 = {p1:?}; 0 violations over {pairs} pairs ({applicable} applicable)"),
            )
        }
        Err(e) => ok(false, format!("scan failed: {e}")),
    }
}

fn c12() -> Outcome {
    let mut differing = Vec::new();
    for e in Experiment::ALL {
        let cfg = ExperimentConfig::new(e);
        let a = run_experiment(&cfg).and_then(|o| o.files());
        let b = run_experiment(&cfg).and_then(|o| o.files());
        match (a, b) {
            (Ok(a), Ok(b)) if a == b => {}
            _ => differing.push(e.name()),
        }
    }
    ok(
        differing.is_empty(),
        format!("9 experiments run twice, differing {differing:?}"),
    )
}

fn main() {
    let criteria: [Criterion; 12] = [
        (1, "kernel normalisation", 1, c1),
        (2, "unit-digit product identity", 1, c2),
        (3, "quadratic coefficient bound", 10, c3),
        (4, "oracle equivalence", 30, c4),
        (5, "gap zeros", 10, c5),
        (6, "square-block subset sums", 5, c6),
        (7, "order construction pipeline", 30, c7),
        (8, "triangle-convolution kernels", 60, c8),
        (9, "Erdos-Taylor diagnostics", 5, c9),
        (10, "witness and negative scan", 60, c10),
        (11, "subset-sum union additivity", 30, c11),
        (12, "determinism", 600, c12),
    ];
    let mut failed = 0;
    for (id, name, limit, f) in criteria {
        let start = Instant::now();
        let out = f();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(limit);
        let pass = out.pass && in_time;
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {id:>2} {}: {name}: {} [{:.2} s, limit {limit} s]",
            if pass { "PASS" } else { "FAIL" },
            out.detail,
            elapsed.as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
