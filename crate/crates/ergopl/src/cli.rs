//! Command-line front end. Exit status: 0 when the checked condition holds
//! (or the command simply succeeded), 1 when it fails, 2 on input errors.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use ergopl_core::{
    build_compensation, build_monotone_demo, build_tableaux_example, check_corner_crossing, check_mu_injective,
    check_u_conditions, mass_ordering, stationarity_residual, support_diagnostics, verify_tableaux, wasserstein1,
    CompensationParams, Error, Rational,
};

use crate::format::{self, FormatError};
use crate::parallel;
use crate::report::{self, render};

#[derive(Debug, Parser)]
#[command(name = "ergopl", version, about = "Exact checks for random iteration of piecewise-linear maps of [0, 1]")]
pub struct Cli {
    /// Write the report to this file instead of standard output.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a system file and check its invariants.
    Validate { system: PathBuf },
    /// Estimate the probability that sup_{n <= N} V_n < K over random words.
    BvEstimate {
        system: PathBuf,
        /// Variation threshold K.
        #[arg(long = "K", alias = "threshold")]
        k: Rational,
        /// Word length N.
        #[arg(long = "N", alias = "horizon")]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Check a covering and emit the φ tables, or the first violation.
    CertifyTableaux { system: PathBuf, covering: PathBuf },
    /// Check that graphs change partition bands only at grid corners.
    CheckCrossing { system: PathBuf, partition: PathBuf },
    /// Check Σ_g μ(g)·#g⁻¹(y) <= 1 for all levels y.
    CheckInjective { system: PathBuf },
    /// Check that every x in (0, 1) is moved strictly down (U1) and strictly up (U2) by some map.
    CheckU { system: PathBuf },
    /// Simulate one chain and summarize its empirical law.
    Stationary {
        system: PathBuf,
        #[arg(long, default_value = "1/2")]
        x0: Rational,
        #[arg(long, default_value_t = 1000)]
        burn_in: usize,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 64)]
        bins: usize,
        /// Write a histogram CSV (bin_lo, bin_hi, mass) here.
        #[arg(long)]
        histogram: Option<PathBuf>,
        /// Write the empirical measure as a measure file here.
        #[arg(long)]
        measure: Option<PathBuf>,
        /// Window for the endpoint mass diagnostics.
        #[arg(long, default_value = "1/16")]
        epsilon: Rational,
    },
    /// Exact Wasserstein-1 distance between two measure files.
    Wasserstein { first: PathBuf, second: PathBuf },
    /// Find [a, b] across which one CDF stays below the other.
    MassOrder { first: PathBuf, second: PathBuf },
    /// Emit a built-in system (or covering) file.
    Example {
        name: ExampleName,
        /// Weight of f1 in the compensation system.
        #[arg(long, default_value = "1/2")]
        p: Rational,
        /// Truncation depth of the compensation pair.
        #[arg(long, default_value_t = 4)]
        depth: usize,
    },
    /// Check the compensation pair's properties exactly.
    VerifyCompensation {
        #[arg(long, default_value_t = 4)]
        depth: usize,
        #[arg(long, default_value_t = 8)]
        max_m: usize,
        #[arg(long, default_value_t = 1000)]
        words: usize,
        #[arg(long, default_value_t = 32)]
        word_length: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExampleName {
    MonotoneDemo,
    Tableaux,
    TableauxCovering,
    Compensation,
}

/// What a successful run prints and whether the checked condition holds.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub output: String,
    pub holds: bool,
}

impl Outcome {
    fn holds(output: String) -> Self {
        Outcome { output, holds: true }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Format(#[from] FormatError),
    #[error("{0}")]
    Library(#[from] Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn run(command: &Command) -> Result<Outcome, CliError> {
    match command {
        Command::Validate { system } => {
            let sys = format::read_system(system)?;
            Ok(Outcome::holds(render("validate", report::ValidateBody::new(&sys))))
        }
        Command::BvEstimate {
            system,
            k,
            n,
            samples,
            seed,
        } => {
            let sys = format::read_system(system)?;
            let rep = parallel::bv_probability_estimate(&sys, k, *n, *samples, *seed)?;
            Ok(Outcome::holds(render("bv-estimate", report::BvBody::from(&rep))))
        }
        Command::CertifyTableaux { system, covering } => {
            let sys = format::read_system(system)?;
            let cover = format::read_covering(covering)?;
            let outcome = verify_tableaux(&sys, &cover);
            Ok(Outcome {
                holds: outcome.is_ok(),
                output: render("certify-tableaux", report::TableauxBody::new(&sys, &cover, &outcome)),
            })
        }
        Command::CheckCrossing { system, partition } => {
            let sys = format::read_system(system)?;
            let part = format::read_covering(partition)?;
            let rep = check_corner_crossing(&sys, &part)?;
            Ok(Outcome {
                holds: rep.holds,
                output: render("check-crossing", report::CrossingBody::new(&sys, &rep)),
            })
        }
        Command::CheckInjective { system } => {
            let sys = format::read_system(system)?;
            let body = match check_mu_injective(&sys) {
                Ok(rep) => report::InjectiveBody::from(&rep),
                Err(Error::FlatSegment { label, span }) => report::InjectiveBody::flat(label, &span.0, &span.1),
                Err(e) => return Err(e.into()),
            };
            Ok(Outcome {
                holds: body.injective,
                output: render("check-injective", body),
            })
        }
        Command::CheckU { system } => {
            let sys = format::read_system(system)?;
            let rep = check_u_conditions(&sys);
            Ok(Outcome {
                holds: rep.u1 && rep.u2,
                output: render("check-u", report::UBody::from(&rep)),
            })
        }
        Command::Stationary {
            system,
            x0,
            burn_in,
            samples,
            seed,
            bins,
            histogram,
            measure,
            epsilon,
        } => {
            let sys = format::read_system(system)?;
            let est = ergopl_core::estimate_stationary(&sys, x0, *burn_in, *samples, *seed)?;
            let support = support_diagnostics(&est, epsilon)?;
            let residual = stationarity_residual(&sys, &est.measure);
            if let Some(path) = histogram {
                write_file(path, &format::histogram_csv(&est.measure, *bins))?;
            }
            if let Some(path) = measure {
                write_file(path, &format::measure_to_json(&est.measure))?;
            }
            Ok(Outcome::holds(render(
                "stationary",
                report::StationaryBody::new(&est, &residual, &support),
            )))
        }
        Command::Wasserstein { first, second } => {
            let a = format::read_measure(first)?;
            let b = format::read_measure(second)?;
            let d = wasserstein1(&a, &b);
            Ok(Outcome::holds(render(
                "wasserstein",
                report::WassersteinBody {
                    distance_approx: d.to_f64(),
                    distance: format::RationalText(d),
                },
            )))
        }
        Command::MassOrder { first, second } => {
            let a = format::read_measure(first)?;
            let b = format::read_measure(second)?;
            let res = mass_ordering(&a, &b)?;
            Ok(Outcome::holds(render("mass-order", report::MassOrderBody::from(&res))))
        }
        Command::Example { name, p, depth } => {
            let output = match name {
                ExampleName::MonotoneDemo => format::system_to_json(&build_monotone_demo()),
                ExampleName::Tableaux => format::system_to_json(&build_tableaux_example().0),
                ExampleName::TableauxCovering => format::covering_to_json(&build_tableaux_example().1),
                ExampleName::Compensation => {
                    let pair = build_compensation(&CompensationParams::default().with_depth(*depth))?;
                    format::system_to_json(&pair.system(p)?)
                }
            };
            Ok(Outcome::holds(output))
        }
        Command::VerifyCompensation {
            depth,
            max_m,
            words,
            word_length,
            seed,
        } => {
            let pair = build_compensation(&CompensationParams::default().with_depth(*depth))?;
            let rep = parallel::verify_compensation(&pair, *max_m, *words, *word_length, *seed)?;
            Ok(Outcome {
                holds: rep.passed(),
                output: render("verify-compensation", report::CompensationBody::from(&rep)),
            })
        }
    }
}

/// Parses `args`, runs the command and returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let outcome = run(&cli.command).and_then(|o| {
        match &cli.output {
            Some(path) => write_file(path, &o.output)?,
            None => print!("{}", o.output),
        }
        Ok(o)
    });
    match outcome {
        Ok(o) if o.holds => 0,
        Ok(_) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
