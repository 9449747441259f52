//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 when a verification check fails, 2 on usage
//! or input errors.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::experiment::{append_records, read_records, run_point, run_sweep, ExperimentSpec, Point};
use crate::laws::{one_type_complete_law, one_type_star_law, two_type_p1_law, GeometricSumLaw};
use crate::state::{Coloring, CompleteKernel, GraphKind, SystemKind};
use crate::stats::{fit_second_order, Baseline, FitModel, FitPoint, SampleSummary};
use crate::verify::{run_suite, SuiteSize};

pub const JOBS_ENV: &str = "ANNIHILATE_JOBS";

#[derive(Debug, Parser)]
#[command(name = "annihilate", version, about = "Annihilating random walks on complete and star graphs")]
struct Cli {
    /// Worker threads (default: $ANNIHILATE_JOBS, else logical cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SystemArg {
    One,
    Two,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GraphArg {
    Complete,
    Star,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KernelArg {
    Uniform,
    Neighbor,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ColoringArg {
    Random,
    Alternating,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum LawArg {
    /// One-type, complete graph.
    K1,
    /// One-type, star.
    S1,
    /// Two-type at p = 1, complete graph.
    Kp1,
    /// Two-type at p = 1, star.
    Sp1,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one parameter point and print a summary.
    Simulate {
        #[arg(long, value_enum, default_value = "two")]
        system: SystemArg,
        #[arg(long, value_enum, default_value = "star")]
        graph: GraphArg,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        #[arg(long, default_value_t = 1000)]
        trials: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        max_steps: Option<u64>,
        #[arg(long)]
        record_series: bool,
        #[arg(long, value_enum, default_value = "uniform")]
        kernel: KernelArg,
        #[arg(long, value_enum, default_value = "random")]
        coloring: ColoringArg,
        /// Append the result row to this CSV file.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Print an exact law and optionally sample it.
    Exact {
        #[arg(long, value_enum)]
        law: LawArg,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run a grid from a JSON experiment file and append rows to CSV.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Output CSV (replaces the config's outputs).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        trials: Option<u32>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the invariant and lemma suite.
    Verify {
        #[arg(long)]
        quick: bool,
        #[arg(long, default_value_t = 20_240_601)]
        seed: u64,
    },
    /// Fit second-order terms to a sweep CSV.
    Fit {
        #[arg(long)]
        csv: PathBuf,
    },
}

fn jobs(flag: Option<usize>) -> usize {
    flag.or_else(|| std::env::var(JOBS_ENV).ok().and_then(|v| v.parse().ok()))
        .filter(|&j| j > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Entry point used by the binary.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_cli_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// [`run_cli`] with explicit output streams.
pub fn run_cli_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(jobs(cli.jobs)).build() {
        Ok(pool) => pool,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return 2;
        }
    };
    let mut buf = Vec::new();
    let result = pool.install(|| dispatch(cli.command, &mut buf));
    let _ = out.write_all(&buf);
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}

fn dispatch(command: Command, out: &mut Vec<u8>) -> Result<i32> {
    match command {
        Command::Simulate {
            system,
            graph,
            n,
            p,
            trials,
            seed,
            max_steps,
            record_series,
            kernel,
            coloring,
            csv,
        } => {
            if trials == 0 {
                return Err(Error::InvalidParameter("trials must be at least 1".into()));
            }
            let point = Point {
                index: 0,
                system: match system {
                    SystemArg::One => SystemKind::OneType,
                    SystemArg::Two => SystemKind::TwoType,
                },
                graph: graph_kind(graph),
                n,
                p,
                trials,
                base_seed: seed,
                record_series,
                max_steps,
                coloring: match coloring {
                    ColoringArg::Random => Coloring::RandomBalanced,
                    ColoringArg::Alternating => Coloring::Alternating,
                },
                kernel: match kernel {
                    KernelArg::Uniform => CompleteKernel::Uniform,
                    KernelArg::Neighbor => CompleteKernel::Neighbor,
                },
            };
            let res = run_point(&point)?;
            let rec = res.record();
            writeln!(out, "system: {} graph: {} n: {} p: {}", rec.system, rec.topology, n, p)?;
            writeln!(out, "trials: {trials} seed: {seed}")?;
            writeln!(out, "mean_T: {} stderr_T: {}", rec.mean_t, rec.stderr_t)?;
            writeln!(out, "min_T: {} max_T: {}", res.time.min(), res.time.max())?;
            writeln!(out, "mean_M: {}", rec.mean_m)?;
            writeln!(out, "mean_maxocc: {} max_maxocc: {}", rec.mean_maxocc, res.occupancy.max())?;
            writeln!(out, "not_reached: {}", res.not_reached)?;
            writeln!(out, "verdicts: {}", rec.verdicts)?;
            if let Some(path) = csv {
                append_records(&path, &[rec])?;
            }
            Ok(0)
        }
        Command::Exact { law, n, samples, seed } => {
            let (name, l) = exact_law(law, n)?;
            print_law(out, name, n, &l)?;
            if samples > 0 {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let s: SampleSummary = l.samples(samples, &mut rng).into_iter().map(|x| x as f64).collect();
                writeln!(out, "sample_mean: {} sample_stderr: {} samples: {}", s.mean(), s.stderr(), samples)?;
            }
            Ok(0)
        }
        Command::Sweep {
            config,
            out: csv_out,
            trials,
            seed,
        } => {
            let mut spec = ExperimentSpec::load(&config)?;
            if let Some(path) = csv_out {
                spec.outputs = vec![path];
            }
            if let Some(t) = trials {
                spec.trials = t;
            }
            if let Some(s) = seed {
                spec.base_seed = s;
            }
            let rows = run_sweep(&spec)?;
            for r in &rows {
                writeln!(
                    out,
                    "{} {} n={} p={} mean_T={:.3} ± {:.3} [{}]",
                    r.system, r.topology, r.n, r.p, r.mean_t, r.stderr_t, r.verdicts
                )?;
            }
            Ok(0)
        }
        Command::Verify { quick, seed } => {
            let size = if quick { SuiteSize::Quick } else { SuiteSize::Full };
            let checks = run_suite(size, seed)?;
            writeln!(out, "{:<28} {:>6} {:>14} {:>14}  details", "check", "result", "statistic", "threshold")?;
            let mut failed = 0;
            for c in &checks {
                let v = &c.verdict;
                if !v.pass {
                    failed += 1;
                }
                writeln!(
                    out,
                    "{:<28} {:>6} {:>14.6} {:>14.6}  {}",
                    c.name,
                    if v.pass { "PASS" } else { "FAIL" },
                    v.statistic,
                    v.threshold,
                    v.details
                )?;
            }
            writeln!(out, "{} checks, {} failed", checks.len(), failed)?;
            Ok(if failed == 0 { 0 } else { 1 })
        }
        Command::Fit { csv } => {
            let records = read_records(&csv)?;
            let mut groups: BTreeMap<(String, String, String), Vec<FitPoint>> = BTreeMap::new();
            for r in &records {
                groups
                    .entry((r.system.clone(), r.topology.clone(), r.p.to_string()))
                    .or_default()
                    .push(FitPoint {
                        n: r.n as f64,
                        mean: r.mean_t,
                        stderr: r.stderr_t,
                    });
            }
            if groups.is_empty() {
                return Err(Error::InvalidParameter("no data rows".into()));
            }
            for ((system, topology, p), points) in groups {
                let baseline = if topology == "star" { Baseline::TwoN } else { Baseline::Zero };
                writeln!(out, "{system} {topology} p={p} ({} points)", points.len())?;
                for model in FitModel::ALL {
                    match fit_second_order(&points, model, baseline) {
                        Ok(fit) => writeln!(
                            out,
                            "  {:<14} coefficient {:.6} residual_norm {:.6}",
                            model.name(),
                            fit.coefficient,
                            fit.residual_norm
                        )?,
                        Err(e) => writeln!(out, "  {:<14} skipped: {e}", model.name())?,
                    }
                }
            }
            Ok(0)
        }
    }
}

fn graph_kind(g: GraphArg) -> GraphKind {
    match g {
        GraphArg::Complete => GraphKind::Complete,
        GraphArg::Star => GraphKind::Star,
    }
}

fn exact_law(law: LawArg, n: usize) -> Result<(&'static str, GeometricSumLaw)> {
    Ok(match law {
        LawArg::K1 => ("k1", one_type_complete_law(n)?),
        LawArg::S1 => ("s1", one_type_star_law(n)?),
        LawArg::Kp1 => ("kp1", two_type_p1_law(GraphKind::Complete, n)?),
        LawArg::Sp1 => ("sp1", two_type_p1_law(GraphKind::Star, n)?),
    })
}

fn print_law(out: &mut dyn Write, name: &str, n: usize, law: &GeometricSumLaw) -> Result<()> {
    let fmt = |xs: &[f64]| xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
    let probs = law.probs();
    let shown = if probs.len() <= 32 {
        fmt(probs)
    } else {
        format!("{},...,{}", fmt(&probs[..8]), fmt(&probs[probs.len() - 8..]))
    };
    writeln!(out, "law: {name}")?;
    writeln!(out, "n: {n}")?;
    writeln!(out, "scale: {}", law.scale())?;
    writeln!(out, "probs: {shown}")?;
    writeln!(out, "mean: {}", law.mean())?;
    writeln!(out, "variance: {}", law.variance())?;
    Ok(())
}
