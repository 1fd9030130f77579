use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use amgm_core::experiment::{write_csv, write_json};
use amgm_core::{
    angular_distance, equal_weight_bounds, equality_diagnosis, gap_comparison, holder_multi,
    holder_refinement, inequality_suite, ratio_bounds, run_experiment, sample_exponential,
    sample_l1_sphere_positive, weighted_ratio, young_refinement, ConjugatePair, DataVector,
    DiscreteMeasure, ExperimentConfig, ExperimentKind, NamedConvex, SeededStream, SuiteOptions,
    WeightScheme, WeightVector,
};
use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

mod parse;
mod selfcheck;

use parse::parse_list;

#[derive(Parser)]
#[command(
    name = "amgm",
    version,
    about = "AM-GM gap comparison, refined Young/Hölder/Jensen bounds, GM/AM concentration experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Sampler {
    Exponential,
    Sphere,
}

#[derive(Args)]
struct WeightsArgs {
    /// Weights α, comma separated; fractions like 2/3 are accepted
    #[arg(long, allow_hyphen_values = true)]
    alpha: String,
    /// Data x, comma separated
    #[arg(long, allow_hyphen_values = true)]
    x: String,
    /// Divide out weight sums within 1e-6 of one
    #[arg(long)]
    renormalize: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Two-sided comparison of the AM-GM gaps for weights α and β
    Gap {
        #[command(flatten)]
        w: WeightsArgs,
        #[arg(long)]
        beta: String,
    },
    /// Equal-weights gap envelope and GM/AM ratio bounds for weights α
    Bounds {
        #[command(flatten)]
        w: WeightsArgs,
    },
    /// Which sides of the gap comparison hold with equality
    Equality {
        #[command(flatten)]
        w: WeightsArgs,
        #[arg(long)]
        beta: String,
        /// Relative tolerance
        #[arg(long, default_value_t = amgm_core::inequality::DEFAULT_EQUALITY_TOL)]
        tol: f64,
    },
    /// Refined Young inequality for u, v ≥ 0
    Young {
        #[arg(long)]
        u: f64,
        #[arg(long)]
        v: f64,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 0.5)]
        beta: f64,
    },
    /// Refined Hölder envelope from an atom CSV (columns: mass,f,g,...)
    Holder {
        #[arg(long)]
        file: PathBuf,
        /// Exponent p for the two-function case
        #[arg(long)]
        p: Option<f64>,
        #[arg(long, default_value_t = 0.5)]
        beta: f64,
        /// Exponents for the multi-function case, comma separated
        #[arg(long)]
        ps: Option<String>,
    },
    /// Jensen gap comparison for a catalog convex function
    Jensen {
        #[command(flatten)]
        w: WeightsArgs,
        #[arg(long)]
        beta: String,
        /// exp, square, quartic, neg-log, xlogx
        #[arg(long, default_value = "exp")]
        f: String,
    },
    /// Emit sampled vectors as CSV, one row per draw
    Sample {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        trials: u64,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Sampler::Exponential)]
        sampler: Sampler,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo concentration experiment
    Experiment {
        #[arg(value_parser = ["ratio", "gap", "wratio"])]
        kind: String,
        /// Dimensions, comma separated
        #[arg(long, default_value = "10000")]
        n: String,
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[arg(long, default_value_t = 0.05)]
        epsilon: f64,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// uniform, dirichlet_random, geometric_decay(RHO), explicit
        #[arg(long, default_value = "uniform")]
        scheme: String,
        /// One weight per line; implies the explicit scheme
        #[arg(long)]
        weights_file: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Randomized verification of every implemented inequality
    Suite {
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = SuiteOptions::default().tolerance)]
        tolerance: f64,
        /// Swap min/max quotients to confirm the harness catches it
        #[arg(long)]
        inject_bug: bool,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Quick battery of fixtures, identities and small Monte Carlo checks
    Selfcheck,
}

fn open_out(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("creating {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn weights(list: &str, renormalize: bool) -> Result<WeightVector> {
    Ok(WeightVector::with_renormalize(
        parse_list(list)?,
        renormalize,
    )?)
}

fn data(list: &str) -> Result<DataVector> {
    Ok(DataVector::new(parse_list(list)?)?)
}

#[derive(Serialize)]
struct BoundsReport {
    equal_weight: amgm_core::GapComparison,
    ratio: f64,
    ratio_lower: f64,
    ratio_upper: f64,
}

#[derive(Serialize)]
struct HolderReport {
    envelope: amgm_core::HolderEnvelope,
    #[serde(skip_serializing_if = "Option::is_none")]
    angular_distance: Option<f64>,
}

fn read_atoms(path: &Path) -> Result<(DiscreteMeasure, Vec<Vec<f64>>)> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("reading {}", path.display()))?;
    let headers = reader.headers()?.clone();
    if headers.len() < 3 || &headers[0] != "mass" {
        bail!("{}: expected header `mass,f,g,...`", path.display());
    }
    let mut masses = Vec::new();
    let mut columns = vec![Vec::new(); headers.len() - 1];
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        for (col, field) in record.iter().enumerate() {
            let v: f64 = field
                .parse()
                .with_context(|| format!("row {}: `{field}` is not a number", row + 2))?;
            if col == 0 {
                masses.push(v);
            } else {
                columns[col - 1].push(v);
            }
        }
    }
    Ok((DiscreteMeasure::new(masses)?, columns))
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Gap { w, beta } => {
            let alpha = weights(&w.alpha, w.renormalize)?;
            let beta = weights(&beta, w.renormalize)?;
            print_json(&gap_comparison(&alpha, &beta, &data(&w.x)?)?)?;
        }
        Command::Bounds { w } => {
            let alpha = weights(&w.alpha, w.renormalize)?;
            let x = data(&w.x)?;
            let (ratio_lower, ratio_upper) = ratio_bounds(&alpha, &x)?;
            print_json(&BoundsReport {
                equal_weight: equal_weight_bounds(&alpha, &x)?,
                ratio: weighted_ratio(&alpha, &x)?,
                ratio_lower,
                ratio_upper,
            })?;
        }
        Command::Equality { w, beta, tol } => {
            let alpha = weights(&w.alpha, w.renormalize)?;
            let beta = weights(&beta, w.renormalize)?;
            print_json(&equality_diagnosis(&alpha, &beta, &data(&w.x)?, tol)?)?;
        }
        Command::Young { u, v, p, beta } => {
            print_json(&young_refinement(u, v, ConjugatePair::new(p)?, beta)?)?;
        }
        Command::Holder { file, p, beta, ps } => {
            let (mu, columns) = read_atoms(&file)?;
            let report = match (columns.len(), p, ps) {
                (2, Some(p), None) => {
                    let pq = ConjugatePair::new(p)?;
                    HolderReport {
                        envelope: holder_refinement(&columns[0], &columns[1], &mu, pq, beta)?,
                        angular_distance: Some(angular_distance(
                            &columns[0],
                            &columns[1],
                            &mu,
                            pq,
                        )?),
                    }
                }
                (_, None, Some(ps)) => HolderReport {
                    envelope: holder_multi(&columns, &parse_list(&ps)?, &mu)?,
                    angular_distance: None,
                },
                (k, _, _) => bail!(
                    "{k} function columns: pass --p for exactly two functions, or --ps with one exponent per function"
                ),
            };
            print_json(&report)?;
        }
        Command::Jensen { w, beta, f } => {
            let alpha = weights(&w.alpha, w.renormalize)?;
            let beta = weights(&beta, w.renormalize)?;
            let f: NamedConvex = f.parse()?;
            let x = parse_list(&w.x)?;
            print_json(&amgm_core::jensen_gap_comparison(
                &alpha,
                &beta,
                &x,
                &f.function(),
            )?)?;
        }
        Command::Sample {
            n,
            trials,
            lambda,
            seed,
            sampler,
            out,
        } => {
            let mut out = open_out(out.as_deref())?;
            let header: Vec<String> = (1..=n).map(|i| format!("x_{i}")).collect();
            writeln!(out, "draw,{}", header.join(","))?;
            for t in 0..trials {
                let stream = SeededStream::new(seed, t);
                let x = match sampler {
                    Sampler::Exponential => sample_exponential(n, lambda, stream)?,
                    Sampler::Sphere => sample_l1_sphere_positive(n, stream)?,
                };
                let row: Vec<String> = x.as_slice().iter().map(|v| format!("{v:.16e}")).collect();
                writeln!(out, "{t},{}", row.join(","))?;
            }
            out.flush()?;
        }
        Command::Experiment {
            kind,
            n,
            trials,
            epsilon,
            lambda,
            seed,
            scheme,
            weights_file,
            out,
            format,
        } => {
            let kind: ExperimentKind = kind.parse()?;
            let weight_scheme = match (&weights_file, scheme.as_str()) {
                (Some(path), "uniform" | "explicit") => WeightScheme::explicit_from_file(path)?,
                (Some(_), other) => bail!("--weights-file conflicts with --scheme {other}"),
                (None, "explicit") => bail!("--scheme explicit needs --weights-file"),
                (None, s) => s.parse()?,
            };
            let n_values = match (&weight_scheme, n.as_str()) {
                (WeightScheme::Explicit { weights }, _) if weights_file.is_some() => {
                    vec![weights.len()]
                }
                _ => parse_list(&n)?
                    .into_iter()
                    .map(|v| {
                        if v.fract() != 0.0 || v < 0.0 {
                            bail!("n={v} is not a nonnegative integer")
                        }
                        Ok(v as usize)
                    })
                    .collect::<Result<_>>()?,
            };
            let cfg = ExperimentConfig {
                n_values,
                trials,
                epsilon,
                lambda,
                base_seed: seed,
                weight_scheme,
            };
            for w in cfg.validate()? {
                eprintln!("warning: {w}");
            }
            let results = run_experiment(kind, &cfg)?;
            let mut sink = open_out(out.as_deref())?;
            match format {
                Format::Csv => write_csv(&results, &mut sink)?,
                Format::Json => write_json(&results, &mut sink)?,
            }
            sink.flush()?;
            let bridge: usize = results.iter().map(|r| r.bridge_violations).sum();
            if bridge > 0 {
                eprintln!("error: {bridge} trials broke the bridging inequality");
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Suite {
            trials,
            seed,
            tolerance,
            inject_bug,
            out,
            format,
        } => {
            let report = inequality_suite(
                trials,
                SeededStream::new(seed, 0),
                SuiteOptions {
                    tolerance,
                    inject_bug,
                },
            );
            let mut sink = open_out(out.as_deref())?;
            match format {
                Format::Json => {
                    serde_json::to_writer_pretty(&mut sink, &report)?;
                    writeln!(sink)?;
                }
                Format::Csv => {
                    writeln!(sink, "check,instances,violations,worst_margin")?;
                    for c in &report.checks {
                        let worst = c
                            .worst_margin
                            .map(|m| format!("{m:.16e}"))
                            .unwrap_or_default();
                        writeln!(sink, "{},{},{},{worst}", c.name, c.instances, c.violations)?;
                    }
                }
            }
            sink.flush()?;
            if !report.passed() {
                eprintln!("error: {} violations", report.total_violations());
                return Ok(ExitCode::FAILURE);
            }
        }
        Command::Selfcheck => {
            let outcomes = selfcheck::run();
            let mut failed = 0;
            for o in &outcomes {
                println!(
                    "{} {}: {}",
                    if o.pass { "PASS" } else { "FAIL" },
                    o.name,
                    o.detail
                );
                failed += usize::from(!o.pass);
            }
            if failed > 0 {
                eprintln!("{failed} of {} checks failed", outcomes.len());
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.chain().any(|c| {
        let kind = c
            .downcast_ref::<io::Error>()
            .map(io::Error::kind)
            .or_else(|| {
                c.downcast_ref::<serde_json::Error>()
                    .and_then(|j| j.io_error_kind())
            });
        kind == Some(io::ErrorKind::BrokenPipe)
    })
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) if is_broken_pipe(&e) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
