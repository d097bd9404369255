//! `lab`: command-line front end for the weighted Littlewood-Paley
//! laboratory. Every command emits a versioned JSON (or CSV) report and
//! exits 0 on PASS, 1 on experiment FAIL, 2 on usage errors.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use lp_lab::lab::report::SCHEMA_VERSION;
use lp_lab::lab::{
    carleson_counterexample, check_necessary_condition, estimate_multiplier_norm, gap_sequence,
    square_function_probe, verify_fefferman_stein, verify_pointwise_g, verify_theorem_a,
    verify_theorem_b, verify_theorem_b_weak, ExperimentConfig, ExperimentReport, FamilySpec,
    GridMeta, NormBudget, PsiSpec, RatioEntry, SymbolSpec, WeightSpec,
};
use lp_lab::lattice::FreqInterval;
use lp_lab::variation::{decompose_rp, vq_dyadic, vq_norm};
use lp_lab::weights::weight_report;
use lp_lab::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(
    name = "lab",
    version,
    about = "Desk-scale laboratory for weighted square functions, Muckenhoupt weights, and bounded-variation Fourier multipliers"
)]
struct Cli {
    /// Flat key=value file overriding built-in defaults (keys: n, period,
    /// seed, trials); command-line flags override the file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Grid sample count (power of two).
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Grid period.
    #[arg(long, global = true)]
    period: Option<f64>,
    /// Base seed for every random draw in the experiment.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Trial count (witness signals, families, and so on).
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Output report path; defaults to <experiment>.report.<ext>.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Report file format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Muckenhoupt and reverse-Holder constants of a weight.
    ApConstant(ApConstantArgs),
    /// q-variation norms of a multiplier symbol.
    Variation(VariationArgs),
    /// Step-atom decomposition of a bounded-variation symbol.
    Decompose(DecomposeArgs),
    /// Operator-norm estimate of a Fourier multiplier.
    MultiplierNorm(MultiplierNormArgs),
    /// Square-function norm ratios for one interval family.
    SquareFunction(SquareFunctionArgs),
    /// Boundedness sweeps with grid-doubling stability gates.
    #[command(subcommand)]
    Verify(VerifyCmd),
    /// Unboundedness growth probes.
    #[command(subcommand)]
    Counterexample(CounterCmd),
    /// Report file utilities.
    #[command(subcommand)]
    Report(ReportCmd),
}

#[derive(Debug, Args)]
struct ApConstantArgs {
    /// Weight spec: const, a1, or power:<alpha>.
    #[arg(long, default_value = "power:0.5")]
    weight: String,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    /// Reverse-Holder exponent to evaluate.
    #[arg(long, default_value_t = 2.0)]
    s: f64,
    /// Geometric ladder ratio for the supremal reverse-Holder exponent.
    #[arg(long, default_value_t = 0.05)]
    ladder_tol: f64,
}

#[derive(Debug, Args)]
struct VariationArgs {
    /// Symbol spec: one, hilbert, sinlog, or blocks:<seed>.
    #[arg(long, default_value = "hilbert")]
    symbol: String,
    #[arg(long, default_value_t = 1.5)]
    q: f64,
    /// Optional interval [lo, hi); without it the dyadic norm is computed.
    #[arg(long)]
    lo: Option<f64>,
    #[arg(long)]
    hi: Option<f64>,
}

#[derive(Debug, Args)]
struct DecomposeArgs {
    #[arg(long, default_value = "sinlog")]
    symbol: String,
    #[arg(long, default_value_t = 1.0)]
    lo: f64,
    #[arg(long, default_value_t = 2.0)]
    hi: f64,
    #[arg(long, default_value_t = 1.5)]
    q: f64,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    #[arg(long, default_value_t = 8)]
    levels: u32,
}

#[derive(Debug, Args)]
struct MultiplierNormArgs {
    #[arg(long, default_value = "hilbert")]
    symbol: String,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    #[arg(long, default_value = "const")]
    weight: String,
    /// Coordinate-ascent refinement steps.
    #[arg(long, default_value_t = 240)]
    ascent: usize,
}

#[derive(Debug, Args)]
struct SquareFunctionArgs {
    /// Family spec: units:<lo>:<count>, lacunary:<base>:<count>,
    /// random:<seed>:<max>:<lo>:<hi>, or whitney:<lo>:<hi>:<minlen>.
    #[arg(long, default_value = "units:0:8")]
    family: String,
    /// Combination exponent r in [1, 2] (r = 1 is the sup).
    #[arg(long, default_value_t = 2.0)]
    r: f64,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    #[arg(long, default_value = "const")]
    weight: String,
}

#[derive(Debug, Subcommand)]
enum VerifyCmd {
    /// Multiplier-norm envelope for bounded-variation symbols.
    TheoremA(TheoremAArgs),
    /// Square-function envelope over arbitrary disjoint families.
    TheoremB(TheoremBArgs),
    /// Weak-type endpoint envelope at the critical exponent.
    TheoremBWeak(TheoremBWeakArgs),
    /// Maximal vs sharp-maximal norm comparison.
    FeffermanStein(FeffermanSteinArgs),
    /// Pointwise sharp-maximal bound for the smooth square function.
    PointwiseG(PointwiseGArgs),
}

#[derive(Debug, Args)]
struct TheoremAArgs {
    #[arg(long, default_value_t = 1.5)]
    q: f64,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    /// Comma-separated weight specs.
    #[arg(long, default_value = "const,power:0.3")]
    weights: String,
    /// Comma-separated symbol specs.
    #[arg(long, default_value = "hilbert,blocks:5")]
    symbols: String,
}

#[derive(Debug, Args)]
struct TheoremBArgs {
    #[arg(long, default_value_t = 1.5)]
    q: f64,
    #[arg(long, default_value_t = 3.0)]
    p: f64,
    #[arg(long, default_value = "const,power:0.3")]
    weights: String,
}

#[derive(Debug, Args)]
struct TheoremBWeakArgs {
    #[arg(long, default_value = "a1,power:-0.3")]
    weights: String,
}

#[derive(Debug, Args)]
struct FeffermanSteinArgs {
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    #[arg(long, default_value = "const,power:0.5,a1")]
    weights: String,
}

#[derive(Debug, Args)]
struct PointwiseGArgs {
    /// Dilation of the smooth bump support.
    #[arg(long, default_value_t = 2.0)]
    lambda: f64,
}

#[derive(Debug, Subcommand)]
enum CounterCmd {
    /// Equal-unit-interval square function growth below L^2.
    Carleson(CarlesonArgs),
    /// Partition-growth functional for sub-lacunary gap sequences.
    Equ2(Equ2Args),
}

#[derive(Debug, Args)]
struct CarlesonArgs {
    #[arg(long, default_value_t = 1.5)]
    p: f64,
    /// Comma-separated increasing bandwidths.
    #[arg(long, default_value = "8,16,32,64")]
    bandwidths: String,
}

#[derive(Debug, Args)]
struct Equ2Args {
    /// Gap profile: sqrt, linear, or zero.
    #[arg(long, default_value = "sqrt")]
    psi: String,
    #[arg(long, default_value_t = 3.0)]
    p: f64,
    #[arg(long, default_value_t = 64)]
    kmax: usize,
    /// Gap base.
    #[arg(long, default_value_t = 2.0)]
    lambda: f64,
}

#[derive(Debug, Subcommand)]
enum ReportCmd {
    /// Load a JSON report and re-emit it as a table, JSON, or CSV.
    Render(RenderArgs),
}

#[derive(Debug, Args)]
struct RenderArgs {
    /// Report file to read.
    #[arg(long, value_name = "FILE")]
    input: PathBuf,
    /// Print a human-readable table instead of --format output.
    #[arg(long, default_value_t = false)]
    table: bool,
}

/// n, period, seed, trials resolved from defaults < config file < flags.
fn resolve_config(cli: &Cli, defaults: ExperimentConfig) -> Result<ExperimentConfig> {
    let mut cfg = defaults;
    if let Some(path) = &cli.config {
        let text = std::fs::read_to_string(path)?;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "config line {} is not key=value: {line:?}",
                    lineno + 1
                ))
            })?;
            let (key, value) = (key.trim(), value.trim());
            let parse_err = |what: &str| {
                Error::InvalidParameter(format!("config key {key}: bad {what} {value:?}"))
            };
            match key {
                "n" => cfg.n = value.parse().map_err(|_| parse_err("integer"))?,
                "period" => cfg.period = value.parse().map_err(|_| parse_err("number"))?,
                "seed" => cfg.seed = value.parse().map_err(|_| parse_err("integer"))?,
                "trials" => cfg.trials = value.parse().map_err(|_| parse_err("integer"))?,
                _ => {
                    return Err(Error::InvalidParameter(format!(
                        "unknown config key {key:?}"
                    )))
                }
            }
        }
    }
    if let Some(n) = cli.n {
        cfg.n = n;
    }
    if let Some(period) = cli.period {
        cfg.period = period;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(trials) = cli.trials {
        cfg.trials = trials;
    }
    Ok(cfg)
}

fn parse_weights(s: &str) -> Result<Vec<WeightSpec>> {
    s.split(',')
        .filter(|p| !p.is_empty())
        .map(WeightSpec::parse)
        .collect()
}

fn parse_symbols(s: &str) -> Result<Vec<SymbolSpec>> {
    s.split(',')
        .filter(|p| !p.is_empty())
        .map(SymbolSpec::parse)
        .collect()
}

fn parse_family(s: &str) -> Result<FamilySpec> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || Error::InvalidParameter(format!("bad family spec {s:?}"));
    let num = |v: &str| v.parse::<f64>().map_err(|_| bad());
    let int = |v: &str| v.parse::<u64>().map_err(|_| bad());
    match parts.as_slice() {
        ["units", lo, count] => Ok(FamilySpec::UnitBlocks {
            lo: num(lo)?,
            count: int(count)? as usize,
        }),
        ["lacunary", base, count] => Ok(FamilySpec::Lacunary {
            base: num(base)?,
            count: int(count)? as usize,
        }),
        ["random", seed, max, lo, hi] => Ok(FamilySpec::RandomDisjoint {
            seed: int(seed)?,
            max_intervals: int(max)? as usize,
            lo: num(lo)?,
            hi: num(hi)?,
            min_len: (num(hi)? - num(lo)?) * 1e-3,
        }),
        ["whitney", lo, hi, minlen] => Ok(FamilySpec::Whitney {
            lo: num(lo)?,
            hi: num(hi)?,
            min_len: num(minlen)?,
        }),
        _ => Err(bad()),
    }
}

fn write_report(cli: &Cli, report: &ExperimentReport) -> Result<PathBuf> {
    let (contents, ext) = match cli.format {
        Format::Json => (report.to_json(), "json"),
        Format::Csv => (report.to_csv(), "csv"),
    };
    let path = cli
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{}.report.{ext}", report.experiment)));
    std::fs::write(&path, contents)?;
    Ok(path)
}

fn small_report(
    experiment: &str,
    cfg: &ExperimentConfig,
    params: BTreeMap<String, serde_json::Value>,
    ratios: Vec<RatioEntry>,
    envelope: f64,
    pass: bool,
    started: Instant,
) -> ExperimentReport {
    ExperimentReport {
        schema_version: SCHEMA_VERSION,
        experiment: experiment.into(),
        grid: GridMeta {
            n: cfg.n,
            period: cfg.period,
        },
        params,
        ratios,
        envelope,
        pass,
        seed: cfg.seed,
        runtime_ms: started.elapsed().as_millis() as u64,
    }
}

fn entry(label: &str, value: f64) -> RatioEntry {
    RatioEntry {
        label: label.into(),
        value,
    }
}

fn run(cli: &Cli) -> Result<bool> {
    let report = match &cli.command {
        Command::ApConstant(args) => {
            let cfg = resolve_config(
                cli,
                ExperimentConfig {
                    n: 1024,
                    period: 2.0,
                    ..ExperimentConfig::default()
                },
            )?;
            let started = Instant::now();
            let grid = cfg.grid()?;
            let spec = WeightSpec::parse(&args.weight)?;
            let w = spec.build(grid)?;
            let wr = weight_report(&w, args.p, args.s, args.ladder_tol)?;
            let mut params = BTreeMap::new();
            params.insert("weight".into(), json!(spec.label()));
            params.insert("p".into(), json!(args.p));
            params.insert("s".into(), json!(args.s));
            params.insert(
                "s_w_at_ladder_top".into(),
                json!(wr.s_w_estimate.at_ladder_top),
            );
            let ratios = vec![
                entry("ap_constant", wr.ap_constant),
                entry("rh_constant", wr.rh_constant),
                entry("s_w_estimate", wr.s_w_estimate.value),
            ];
            small_report(
                "ap-constant",
                &cfg,
                params,
                ratios,
                wr.ap_constant,
                true,
                started,
            )
        }
        Command::Variation(args) => {
            let cfg = resolve_config(
                cli,
                ExperimentConfig {
                    n: 1024,
                    period: 16.0,
                    ..ExperimentConfig::default()
                },
            )?;
            let started = Instant::now();
            let grid = cfg.grid()?;
            let spec = SymbolSpec::parse(&args.symbol)?;
            let m = spec.build(grid);
            let mut params = BTreeMap::new();
            params.insert("symbol".into(), json!(spec.label()));
            params.insert("q".into(), json!(args.q));
            let (label, value) = match (args.lo, args.hi) {
                (Some(lo), Some(hi)) => {
                    let interval = FreqInterval::new(lo, hi)?;
                    params.insert("interval".into(), json!(format!("[{lo},{hi})")));
                    ("vq_norm".to_string(), vq_norm(&m, &interval, args.q)?)
                }
                (None, None) => ("vq_dyadic".to_string(), vq_dyadic(&m, args.q)?),
                _ => {
                    return Err(Error::InvalidParameter(
                        "give both --lo and --hi, or neither".into(),
                    ))
                }
            };
            let ratios = vec![RatioEntry {
                label,
                value,
            }];
            small_report("variation", &cfg, params, ratios, value, true, started)
        }
        Command::Decompose(args) => {
            let cfg = resolve_config(
                cli,
                ExperimentConfig {
                    n: 1024,
                    period: 64.0,
                    ..ExperimentConfig::default()
                },
            )?;
            let started = Instant::now();
            let grid = cfg.grid()?;
            let spec = SymbolSpec::parse(&args.symbol)?;
            let m = spec.build(grid);
            let interval = FreqInterval::new(args.lo, args.hi)?;
            let d = decompose_rp(&m, &interval, args.q, args.p, args.levels)?;
            let mut params = BTreeMap::new();
            params.insert("symbol".into(), json!(spec.label()));
            params.insert("q".into(), json!(args.q));
            params.insert("p".into(), json!(args.p));
            params.insert("levels".into(), json!(args.levels));
            params.insert("decomposition".into(), d.to_json());
            let ratios = vec![
                entry("lambda_sum", d.lambda_sum()),
                entry("residual_sup", d.residual_sup),
                entry("target_residual", d.target_residual),
                entry("achieved_constant", d.achieved_constant),
                entry("atoms", d.atoms.len() as f64),
            ];
            small_report(
                "decompose",
                &cfg,
                params,
                ratios,
                d.achieved_constant,
                d.converged,
                started,
            )
        }
        Command::MultiplierNorm(args) => {
            let cfg = resolve_config(
                cli,
                ExperimentConfig {
                    n: 512,
                    period: 16.0,
                    trials: 24,
                    ..ExperimentConfig::default()
                },
            )?;
            let started = Instant::now();
            let grid = cfg.grid()?;
            let mspec = SymbolSpec::parse(&args.symbol)?;
            let wspec = WeightSpec::parse(&args.weight)?;
            let m = mspec.build(grid);
            let w = wspec.build(grid)?;
            let budget = NormBudget {
                trials: cfg.trials,
                ascent_steps: args.ascent,
                seed: cfg.seed,
            };
            let est = estimate_multiplier_norm(&m, args.p, &w, &budget)?;
            let mut params = BTreeMap::new();
            params.insert("symbol".into(), json!(mspec.label()));
            params.insert("weight".into(), json!(wspec.label()));
            params.insert("p".into(), json!(args.p));
            params.insert("method".into(), json!(est.method));
            params.insert("witness_hash".into(), json!(format!("{:016x}", est.witness_hash)));
            let ratios = vec![entry("norm_lower_bound", est.value)];
            small_report(
                "multiplier-norm",
                &cfg,
                params,
                ratios,
                est.value,
                est.value.is_finite(),
                started,
            )
        }
        Command::SquareFunction(args) => {
            let cfg = resolve_config(
                cli,
                ExperimentConfig {
                    n: 1024,
                    period: 32.0,
                    trials: 8,
                    ..ExperimentConfig::default()
                },
            )?;
            let family = parse_family(&args.family)?;
            let weight = WeightSpec::parse(&args.weight)?;
            square_function_probe(&family, args.r, args.p, &weight, &cfg)?
        }
        Command::Verify(which) => match which {
            VerifyCmd::TheoremA(args) => {
                let cfg = resolve_config(
                    cli,
                    ExperimentConfig {
                        n: 2048,
                        period: 64.0,
                        trials: 8,
                        ..ExperimentConfig::default()
                    },
                )?;
                verify_theorem_a(
                    args.q,
                    args.p,
                    &parse_weights(&args.weights)?,
                    &parse_symbols(&args.symbols)?,
                    &cfg,
                )?
            }
            VerifyCmd::TheoremB(args) => {
                let cfg = resolve_config(
                    cli,
                    ExperimentConfig {
                        n: 2048,
                        period: 32.0,
                        trials: 20,
                        ..ExperimentConfig::default()
                    },
                )?;
                verify_theorem_b(args.q, args.p, &parse_weights(&args.weights)?, &cfg)?
            }
            VerifyCmd::TheoremBWeak(args) => {
                let cfg = resolve_config(
                    cli,
                    ExperimentConfig {
                        n: 2048,
                        period: 32.0,
                        trials: 12,
                        ..ExperimentConfig::default()
                    },
                )?;
                verify_theorem_b_weak(&parse_weights(&args.weights)?, &cfg)?
            }
            VerifyCmd::FeffermanStein(args) => {
                let cfg = resolve_config(
                    cli,
                    ExperimentConfig {
                        n: 512,
                        period: 16.0,
                        trials: 8,
                        ..ExperimentConfig::default()
                    },
                )?;
                verify_feffer_stein_wrapper(args.p, &args.weights, &cfg)?
            }
            VerifyCmd::PointwiseG(args) => {
                let cfg = resolve_config(
                    cli,
                    ExperimentConfig {
                        n: 512,
                        period: 16.0,
                        trials: 10,
                        ..ExperimentConfig::default()
                    },
                )?;
                verify_pointwise_g(args.lambda, &cfg)?
            }
        },
        Command::Counterexample(which) => match which {
            CounterCmd::Carleson(args) => {
                let cfg = resolve_config(
                    cli,
                    ExperimentConfig {
                        n: 8192,
                        period: 64.0,
                        trials: 1,
                        ..ExperimentConfig::default()
                    },
                )?;
                let bandwidths: Vec<usize> = args
                    .bandwidths
                    .split(',')
                    .filter(|s| !s.is_empty())
                    .map(|s| {
                        s.trim().parse::<usize>().map_err(|_| {
                            Error::InvalidParameter(format!("bad bandwidth {s:?}"))
                        })
                    })
                    .collect::<Result<_>>()?;
                carleson_counterexample(args.p, &bandwidths, &cfg)?
            }
            CounterCmd::Equ2(args) => {
                let cfg = resolve_config(cli, ExperimentConfig::default())?;
                let psi = PsiSpec::parse(&args.psi)?;
                let a = gap_sequence(psi, args.lambda, args.kmax);
                let mut report = check_necessary_condition(&a, args.p, args.kmax)?;
                report
                    .params
                    .insert("psi".into(), json!(psi.label()));
                report
                    .params
                    .insert("lambda".into(), json!(args.lambda));
                report.seed = cfg.seed;
                report
            }
        },
        Command::Report(ReportCmd::Render(args)) => {
            let text = std::fs::read_to_string(&args.input)?;
            let report = ExperimentReport::from_json(&text)?;
            if args.table {
                print!("{}", report.render_table());
            } else {
                match cli.format {
                    Format::Json => print!("{}", report.to_json()),
                    Format::Csv => print!("{}", report.to_csv()),
                }
            }
            return Ok(true);
        }
    };
    let path = write_report(cli, &report)?;
    println!(
        "{}: envelope {:.6e} -> {} ({})",
        report.experiment,
        report.envelope,
        if report.pass { "PASS" } else { "FAIL" },
        display_path(&path),
    );
    Ok(report.pass)
}

fn verify_feffer_stein_wrapper(
    p: f64,
    weights: &str,
    cfg: &ExperimentConfig,
) -> Result<ExperimentReport> {
    verify_fefferman_stein(p, &parse_weights(weights)?, cfg)
}

fn display_path(path: &Path) -> String {
    path.display().to_string()
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{err}");
                    0
                }
                _ => {
                    eprint!("{err}");
                    2
                }
            };
            std::process::exit(code);
        }
    };
    match run(&cli) {
        Ok(true) => {}
        Ok(false) => std::process::exit(1),
        Err(err) => {
            eprintln!("error: {err}");
            std::process::exit(2);
        }
    }
}
