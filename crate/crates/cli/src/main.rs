use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::Value;

use ipriesz_core::experiments::{
    emit_plotdata, run_experiment, Experiment, ExperimentConfig, Params, PlotKind,
};
use ipriesz_core::groups::{
    et_divergence_check, gp_partial_sums, witness_search, Exponent, WitnessConstant,
};
use ipriesz_core::ipcheck::{ip_window_deviation, verify_lemma1, CoefficientSource, RieszSource};
use ipriesz_core::kernels::{derive_phi_bound, fejer_coeff, kahane_nonneg_check, kahane_poly};
use ipriesz_core::numeric::{ball_to_decimal, parse_rational};
use ipriesz_core::oracle::{compare, expand_product, SparseSpectrum};
use ipriesz_core::riesz::{
    block_riesz_spec, check_dissociation, choose_m_sequence, riesz_coeff, Budget, RieszSpec,
};
use ipriesz_core::sequences::{generate, IndexedSequence};
use ipriesz_core::{BigInt, UnimodularPoint, DEFAULT_PRECISION};

#[derive(Parser)]
#[command(
    name = "ipriesz",
    version,
    about = "Riesz products, IP window checks and circle diagnostics"
)]
struct Cli {
    /// Working precision in bits.
    #[arg(long, global = true, default_value_t = DEFAULT_PRECISION)]
    precision: u32,
    /// Output directory; commands other than `run` print to stdout without it.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for sampled angles.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct SeqArgs {
    /// Sequence family (erdos-taylor, pow2sq, geometric, pow2-plus-one, th1, prop7, block, explicit).
    #[arg(long, default_value = "erdos-taylor")]
    family: String,
    /// Number of terms, or of blocks for block families.
    #[arg(long)]
    count: Option<usize>,
    /// Extra family parameters as a JSON object.
    #[arg(long, default_value = "{}")]
    params: String,
}

impl SeqArgs {
    fn build(&self) -> Result<IndexedSequence> {
        let params: Value = serde_json::from_str(&self.params).context("--params is not JSON")?;
        Ok(generate(&self.family, &params, self.count)?)
    }
}

#[derive(Args, Clone)]
struct SpecArgs {
    #[command(flatten)]
    seq: SeqArgs,
    /// Use the capped block construction instead of the plain one.
    #[arg(long)]
    blocks: bool,
}

impl SpecArgs {
    fn build(&self) -> Result<RieszSpec> {
        let seq = self.seq.build()?;
        let spec = if self.blocks {
            block_riesz_spec(&seq, &Budget::blocks())?
        } else {
            choose_m_sequence(&seq, &Budget::standard())?
        };
        Ok(spec)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a sequence.
    Seq(SeqArgs),
    /// Build a certified Riesz spec, optionally evaluating coefficients.
    Riesz {
        #[command(flatten)]
        spec: SpecArgs,
        /// Frequencies to evaluate.
        #[arg(long = "coeff")]
        coeffs: Vec<BigInt>,
    },
    /// Kernel coefficients and certificates.
    #[command(subcommand)]
    Kernel(KernelCmd),
    /// Circle subgroup diagnostics.
    #[command(subcommand)]
    Group(GroupCmd),
    /// IP window checks.
    #[command(subcommand)]
    Ip(IpCmd),
    /// Spectral expansion and table comparison.
    #[command(subcommand)]
    Oracle(OracleCmd),
    /// Run a named experiment and write its report and tables.
    Run(RunArgs),
    /// Extract a plot series from a report.
    Plotdata {
        report: PathBuf,
        /// deviation-vs-k0, partial-sums or kahane-minima.
        #[arg(long)]
        kind: String,
    },
}

#[derive(Subcommand)]
enum KernelCmd {
    /// Fejer coefficients for p = 0..=m.
    Fejer {
        #[arg(long)]
        m: u64,
    },
    /// Triangle self-convolution kernel of index j.
    Kahane {
        #[arg(long)]
        j: u64,
        #[arg(long, default_value_t = 256)]
        grid: u64,
    },
    /// The certified quadratic bound on phi.
    PhiBound,
}

#[derive(Subcommand)]
enum GroupCmd {
    /// Partial sums of |lambda^n_k - 1|^p.
    Scan {
        #[command(flatten)]
        seq: SeqArgs,
        #[arg(long)]
        theta: String,
        #[arg(long, default_value = "2")]
        exponent: Exponent,
        #[arg(long)]
        horizon: Option<usize>,
    },
    /// Divergence disjunction on the Erdos-Taylor sequence.
    Et {
        #[arg(long)]
        theta: String,
        #[arg(long, default_value_t = 30)]
        horizon: usize,
    },
    /// Nested-interval witness on a block sequence.
    Witness {
        #[command(flatten)]
        seq: SeqArgs,
        #[arg(long, default_value = "2pi")]
        constant: WitnessConstant,
        #[arg(long, default_value_t = 2)]
        first_level: usize,
        #[arg(long, default_value_t = 5)]
        depth: usize,
    },
}

#[derive(Subcommand)]
enum IpCmd {
    /// Worst deviation of Riesz coefficients over a window of subset sums.
    Window {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        k0: usize,
        #[arg(long)]
        width: usize,
    },
    /// Subset sums over consecutive square blocks.
    Lemma1 {
        #[arg(long, default_value_t = 2)]
        l: usize,
        #[arg(long, default_value_t = 1)]
        q: usize,
    },
}

#[derive(Subcommand)]
enum OracleCmd {
    /// Expand the product over the first `horizon` factors into a CSV spectrum.
    Expand {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long)]
        horizon: usize,
    },
    /// Compare two CSV spectra.
    Compare {
        left: PathBuf,
        right: PathBuf,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Experiment name; omit when --config is given.
    experiment: Option<Experiment>,
    /// JSON configuration file; command-line parameters override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    count: Option<usize>,
    #[arg(long)]
    k0: Option<usize>,
    #[arg(long)]
    width: Option<usize>,
    #[arg(long)]
    l: Option<usize>,
    #[arg(long)]
    q: Option<usize>,
    #[arg(long)]
    jmax: Option<u64>,
    #[arg(long)]
    mmax: Option<u64>,
    #[arg(long)]
    ratio: Option<u64>,
    #[arg(long)]
    levels: Option<usize>,
    #[arg(long)]
    blocks: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    qmax: Option<u32>,
    #[arg(long)]
    depth: Option<usize>,
}

impl RunArgs {
    fn config(&self, cli: &Cli) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(p) => {
                let text =
                    fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                serde_json::from_str(&text)
                    .with_context(|| format!("invalid config {}", p.display()))?
            }
            None => {
                let Some(e) = self.experiment else {
                    bail!("name an experiment or pass --config");
                };
                let mut c = ExperimentConfig::new(e);
                c.precision = cli.precision;
                c.seed = cli.seed;
                c
            }
        };
        if let Some(e) = self.experiment {
            cfg.experiment = e;
        }
        let p = &mut cfg.params;
        let o = Params {
            family: self.family.clone(),
            count: self.count,
            k0: self.k0,
            width: self.width,
            l: self.l,
            q: self.q,
            jmax: self.jmax,
            mmax: self.mmax,
            ratio: self.ratio,
            levels: self.levels,
            blocks: self.blocks,
            samples: self.samples,
            qmax: self.qmax,
            depth: self.depth,
        };
        macro_rules! merge {
            ($($f:ident),*) => { $( if o.$f.is_some() { p.$f = o.$f.clone(); } )* };
        }
        merge!(
            family, count, k0, width, l, q, jmax, mmax, ratio, levels, blocks, samples, qmax, depth
        );
        Ok(cfg)
    }
}

fn emit<T: Serialize>(out: &Option<PathBuf>, name: &str, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_text(out, name, &text)
}

fn write_text(out: &Option<PathBuf>, name: &str, text: &str) -> Result<()> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            let path = dir.join(name);
            fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        }
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn dec(b: &ipriesz_core::RealBall) -> Value {
    let (v, r) = ball_to_decimal(b, 30);
    serde_json::json!({ "value": v, "radius": r })
}

fn read_spectrum(path: &Path, prec: u32) -> Result<SparseSpectrum> {
    let f = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(SparseSpectrum::read_csv(f, prec)?)
}

/// Runs the command; `Ok(Some(names))` reports failed checks.
fn execute(cli: &Cli) -> Result<Option<Vec<String>>> {
    let prec = cli.precision;
    let out = &cli.out;
    match &cli.command {
        Command::Seq(a) => emit(out, "seq.json", &a.build()?)?,
        Command::Riesz { spec, coeffs } => {
            let spec = spec.build()?;
            let cert = check_dissociation(&spec)?;
            let values: Vec<Value> = coeffs
                .iter()
                .map(|n| serde_json::json!({ "n": n.to_string(), "coeff": dec(&riesz_coeff(n, &spec, prec)) }))
                .collect();
            emit(
                out,
                "riesz.json",
                &serde_json::json!({ "spec": spec, "dissociation": cert, "coefficients": values }),
            )?;
        }
        Command::Kernel(k) => match k {
            KernelCmd::Fejer { m } => {
                let rows: Vec<Value> = (0..=*m as i64)
                    .map(|p| serde_json::json!({ "p": p, "coeff": dec(&fejer_coeff(*m, p, prec)) }))
                    .collect();
                emit(
                    out,
                    "fejer.json",
                    &serde_json::json!({ "m": m, "coefficients": rows }),
                )?;
            }
            KernelCmd::Kahane { j, grid } => {
                let poly = kahane_poly(*j)?;
                let nonneg = kahane_nonneg_check(*j, *grid, prec)?;
                let failed = nonneg.min.certainly_negative();
                emit(
                    out,
                    "kahane.json",
                    &serde_json::json!({ "poly": poly, "nonnegativity": nonneg }),
                )?;
                if failed {
                    return Ok(Some(vec!["nonnegative".into()]));
                }
            }
            KernelCmd::PhiBound => {
                let b = derive_phi_bound();
                let ok = b.verify();
                emit(out, "phi-bound.json", &b)?;
                if !ok {
                    return Ok(Some(vec!["phi-bound".into()]));
                }
            }
        },
        Command::Group(g) => match g {
            GroupCmd::Scan {
                seq,
                theta,
                exponent,
                horizon,
            } => {
                let seq = seq.build()?;
                let point = UnimodularPoint::exact(parse_rational(theta)?);
                let h = horizon.unwrap_or(seq.len());
                emit(
                    out,
                    "group-scan.json",
                    &gp_partial_sums(&point, &seq, *exponent, h, prec)?,
                )?;
            }
            GroupCmd::Et { theta, horizon } => {
                let r = et_divergence_check(&parse_rational(theta)?, *horizon, prec)?;
                let decided = r.undecided == 0;
                emit(out, "et.json", &r)?;
                if !decided {
                    return Ok(Some(vec!["et-divergence".into()]));
                }
            }
            GroupCmd::Witness {
                seq,
                constant,
                first_level,
                depth,
            } => {
                let seq = seq.build()?;
                let Some(bases) = seq.bases() else {
                    bail!("family {} has no block bases", seq.family);
                };
                let cert = witness_search(bases, *first_level, constant, *depth, prec)?;
                emit(out, "witness.json", &cert)?;
            }
        },
        Command::Ip(i) => match i {
            IpCmd::Window { spec, k0, width } => {
                let spec = spec.build()?;
                check_dissociation(&spec)?;
                let src = CoefficientSource::Riesz(RieszSource::new(spec.clone()));
                emit(
                    out,
                    "window.json",
                    &ip_window_deviation(&src, spec.seq(), *k0, *width, prec)?,
                )?;
            }
            IpCmd::Lemma1 { l, q } => emit(out, "lemma1.json", &verify_lemma1(*l, *q)?)?,
        },
        Command::Oracle(o) => match o {
            OracleCmd::Expand { spec, horizon } => {
                let spec = spec.build()?;
                check_dissociation(&spec)?;
                let s = expand_product(&spec, *horizon, prec)?;
                let mut buf = Vec::new();
                s.write_csv(&mut buf)?;
                write_text(out, "spectrum.csv", &String::from_utf8(buf)?)?;
            }
            OracleCmd::Compare { left, right, tol } => {
                let r = compare(
                    &read_spectrum(left, prec)?,
                    &read_spectrum(right, prec)?,
                    *tol,
                )?;
                let pass = r.pass;
                emit(out, "compare.json", &r)?;
                if !pass {
                    return Ok(Some(vec!["spectra-agree".into()]));
                }
            }
        },
        Command::Run(args) => {
            let cfg = args.config(cli)?;
            let output = run_experiment(&cfg)?;
            let dir = out.clone().unwrap_or_else(|| PathBuf::from("out"));
            for (name, text) in output.files()? {
                write_text(&Some(dir.clone()), &name, &text)?;
            }
            eprintln!(
                "{}: {} checks, written to {}",
                cfg.experiment,
                output.checks.len(),
                dir.display()
            );
            if !output.passed() {
                return Ok(Some(
                    output
                        .failed_checks()
                        .into_iter()
                        .map(String::from)
                        .collect(),
                ));
            }
        }
        Command::Plotdata { report, kind } => {
            let kind: PlotKind = kind.parse()?;
            let text = fs::read_to_string(report)
                .with_context(|| format!("reading {}", report.display()))?;
            let v: Value = serde_json::from_str(&text).context("report is not JSON")?;
            write_text(out, "plotdata.csv", &emit_plotdata(&v, kind)?.to_csv()?)?;
        }
    }
    Ok(None)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(failed)) => {
            for name in failed {
                eprintln!("check failed: {name}");
            }
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
