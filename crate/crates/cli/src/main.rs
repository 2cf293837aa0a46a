//! Command-line experiment runner. Every subcommand reads a mandatory
//! master seed, runs deterministically, writes one CSV artifact, and
//! prints a one-line summary on stderr. Statistical failures exit with
//! code 3, usage errors with 2, runtime errors with 1.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use vrjp_cli::config::*;
use vrjp_cli::{run, ExperimentConfig, Outcome};

const EXIT_STAT_FAIL: u8 = 3;

#[derive(Parser)]
#[command(
    name = "vrjp",
    about = "Reinforced-walk and random-operator experiments with reproducible seeds",
    version
)]
struct Cli {
    /// Write the main CSV artifact here (stdout when omitted).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for replica-parallel runs (0 = library default).
    /// Output does not depend on this.
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    /// Load the full experiment description from a TOML file. Command
    /// line --seed still overrides the file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Print the resolved experiment config (TOML) on stderr.
    #[arg(long, global = true)]
    show_config: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GraphArgs {
    /// Lattice dimension of the box graph.
    #[arg(long, short = 'd', default_value_t = 1)]
    dimension: usize,
    /// Full side length of the box (odd).
    #[arg(long, default_value_t = 3)]
    side: usize,
    /// Constant edge weight.
    #[arg(long, short = 'w', default_value_t = 1.0)]
    weight: f64,
    /// Constant vertex weight.
    #[arg(long, default_value_t = 1.0)]
    theta: f64,
    /// Add the wired boundary vertex.
    #[arg(long)]
    wired: bool,
    /// Load the graph from a TOML description instead.
    #[arg(long)]
    graph_file: Option<PathBuf>,
}

impl GraphArgs {
    fn choice(&self) -> GraphChoice {
        GraphChoice {
            dimension: Some(self.dimension),
            side: Some(self.side),
            w: Some(self.weight),
            theta: Some(self.theta),
            wired: self.wired,
            graph_file: self
                .graph_file
                .as_ref()
                .map(|p| p.to_string_lossy().into_owned()),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Draw exact potential samples and emit them as CSV.
    SamplePotential {
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        graph: GraphArgs,
        /// Number of independent samples.
        #[arg(long, default_value_t = 1)]
        samples: usize,
    },
    /// Laplace-transform and ratio identities: closed form vs Monte Carlo.
    WardCheck {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 100_000)]
        n_samples: usize,
        /// Acceptance threshold in standard errors.
        #[arg(long, default_value_t = 4.0)]
        z_max: f64,
    },
    /// Direct inverse vs truncated random-walk expansion.
    GreenCheck {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        max_len: usize,
        #[arg(long, default_value_t = 1e-8)]
        tolerance: f64,
    },
    /// Simulate one trajectory of a process.
    Simulate {
        #[arg(value_enum)]
        process: ProcessArg,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        graph: GraphArgs,
        /// Start vertex (defaults to the box center).
        #[arg(long)]
        start: Option<usize>,
        /// Jump / step count.
        #[arg(long, default_value_t = 20)]
        jumps: usize,
        /// Stop at this horizon instead of a jump count.
        #[arg(long)]
        horizon: Option<f64>,
        /// Report epochs on the time-changed clock.
        #[arg(long)]
        time_changed: bool,
    },
    /// Skeleton law of the time-changed walker vs the quenched mixture.
    MixtureTest {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 100_000)]
        n_samples: usize,
        #[arg(long, default_value_t = 3)]
        prefix_len: usize,
        #[arg(long, default_value_t = 0.01)]
        p_min: f64,
    },
    /// Edge-reinforced walk vs the Gamma-weight mixture of walkers.
    ErrwEquivalence {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 100_000)]
        n_samples: usize,
        #[arg(long, default_value_t = 3)]
        prefix_len: usize,
        #[arg(long, default_value_t = 0.01)]
        p_min: f64,
        /// Initial edge weight / Gamma shape.
        #[arg(long, default_value_t = 1.0)]
        a: f64,
    },
    /// Fractional moments of the Green function along an axis, with an
    /// exponential decay fit.
    FractionalDecay {
        #[arg(long)]
        seed: u64,
        #[arg(long, short = 'd', default_value_t = 1)]
        dimension: usize,
        #[arg(long, default_value_t = 41)]
        side: usize,
        /// Deterministic edge weight.
        #[arg(long, short = 'w', default_value_t = 0.01)]
        weight: f64,
        /// Use i.i.d. Gamma(shape, 1) edge weights instead.
        #[arg(long)]
        gamma_shape: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        theta: f64,
        /// Moment exponent (must stay below 1/2).
        #[arg(long, default_value_t = 0.25)]
        exponent: f64,
        #[arg(long, default_value_t = 5000)]
        n_samples: usize,
        /// Largest axis offset probed (defaults to the box radius).
        #[arg(long)]
        max_offset: Option<usize>,
        #[arg(long, default_value_t = 4.0)]
        z_max: f64,
    },
    /// Recurrence thresholds and their source comparators.
    Thresholds {
        /// Dimensions to tabulate.
        #[arg(long, short = 'd', num_args = 1.., default_values_t = vec![1, 2, 3])]
        dimensions: Vec<usize>,
        #[arg(long, default_value_t = 1.0)]
        theta: f64,
    },
    /// Spectral report on sampled chains; two thetas give the disorder
    /// contrast verdict. With --eta-decay, reports the conditional
    /// boundary field at the center of growing boxes instead.
    Localization {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        sites: usize,
        #[arg(long, num_args = 1.., default_values_t = vec![0.1, 10.0])]
        thetas: Vec<f64>,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, short = 'w', default_value_t = 1.0)]
        weight: f64,
        #[arg(long, default_value_t = 1e-8)]
        residual_tol: f64,
        /// Report the boundary-field decay experiment instead.
        #[arg(long)]
        eta_decay: bool,
        /// Box sides for --eta-decay.
        #[arg(long, num_args = 1.., default_values_t = vec![5, 9, 13, 17, 21])]
        sides: Vec<usize>,
    },
    /// Edge regularity exponent of the single-site conditional density.
    TauCheck {
        #[arg(long, num_args = 1.., default_values_t = vec![0.1, 1.0, 10.0])]
        thetas: Vec<f64>,
        #[arg(long, num_args = 1.., default_values_t = vec![0.0, 3.0])]
        d0s: Vec<f64>,
        #[arg(long, default_value_t = 0.5)]
        expected_slope: f64,
        #[arg(long, default_value_t = 0.02)]
        tolerance: f64,
    },
}

#[derive(clap::ValueEnum, Clone, Copy, Debug)]
enum ProcessArg {
    Vrjp,
    Errw,
    Quenched,
}

impl From<ProcessArg> for ProcessKind {
    fn from(p: ProcessArg) -> Self {
        match p {
            ProcessArg::Vrjp => ProcessKind::Vrjp,
            ProcessArg::Errw => ProcessKind::Errw,
            ProcessArg::Quenched => ProcessKind::Quenched,
        }
    }
}

fn to_config(cmd: Command) -> ExperimentConfig {
    match cmd {
        Command::SamplePotential {
            seed,
            graph,
            samples,
        } => ExperimentConfig::SamplePotential(SamplePotentialConfig {
            seed,
            graph: graph.choice(),
            samples,
        }),
        Command::WardCheck {
            seed,
            n_samples,
            z_max,
        } => ExperimentConfig::WardCheck(WardCheckConfig {
            seed,
            n_samples,
            z_max,
        }),
        Command::GreenCheck {
            seed,
            max_len,
            tolerance,
        } => ExperimentConfig::GreenCheck(GreenCheckConfig {
            seed,
            max_len,
            tolerance,
        }),
        Command::Simulate {
            process,
            seed,
            graph,
            start,
            jumps,
            horizon,
            time_changed,
        } => ExperimentConfig::Simulate(SimulateConfig {
            seed,
            process: process.into(),
            graph: graph.choice(),
            start,
            jumps,
            horizon,
            time_changed,
        }),
        Command::MixtureTest {
            seed,
            n_samples,
            prefix_len,
            p_min,
        } => ExperimentConfig::MixtureTest(MixtureTestConfig {
            seed,
            n_samples,
            prefix_len,
            p_min,
        }),
        Command::ErrwEquivalence {
            seed,
            n_samples,
            prefix_len,
            p_min,
            a,
        } => ExperimentConfig::ErrwEquivalence(ErrwEquivalenceConfig {
            seed,
            n_samples,
            prefix_len,
            p_min,
            a,
        }),
        Command::FractionalDecay {
            seed,
            dimension,
            side,
            weight,
            gamma_shape,
            theta,
            exponent,
            n_samples,
            max_offset,
            z_max,
        } => ExperimentConfig::FractionalDecay(FractionalDecayConfig {
            seed,
            dimension,
            side,
            w: weight,
            gamma_shape,
            theta,
            exponent,
            n_samples,
            max_offset,
            z_max,
        }),
        Command::Thresholds { dimensions, theta } => {
            ExperimentConfig::Thresholds(ThresholdsConfig { dimensions, theta })
        }
        Command::Localization {
            seed,
            sites,
            thetas,
            samples,
            weight,
            residual_tol,
            eta_decay,
            sides,
        } => {
            if eta_decay {
                ExperimentConfig::EtaDecay(EtaDecayConfig {
                    seed,
                    sides,
                    theta: thetas.first().copied().unwrap_or(0.25),
                    w: weight,
                    n_samples: samples,
                })
            } else {
                ExperimentConfig::Localization(LocalizationConfig {
                    seed,
                    sites,
                    thetas,
                    samples,
                    w: weight,
                    residual_tol,
                })
            }
        }
        Command::TauCheck {
            thetas,
            d0s,
            expected_slope,
            tolerance,
        } => ExperimentConfig::TauCheck(TauCheckConfig {
            thetas,
            d0s,
            expected_slope,
            tolerance,
        }),
    }
}

fn seed_of(cmd: &Command) -> Option<u64> {
    match cmd {
        Command::SamplePotential { seed, .. }
        | Command::WardCheck { seed, .. }
        | Command::GreenCheck { seed, .. }
        | Command::Simulate { seed, .. }
        | Command::MixtureTest { seed, .. }
        | Command::ErrwEquivalence { seed, .. }
        | Command::FractionalDecay { seed, .. }
        | Command::Localization { seed, .. } => Some(*seed),
        Command::Thresholds { .. } | Command::TauCheck { .. } => None,
    }
}

fn emit(outcome: &Outcome, out: Option<&PathBuf>) -> anyhow::Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, outcome.csv.as_bytes())?;
            for (suffix, content) in &outcome.extra_csv {
                let mut extra = path.clone();
                let stem = extra
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| "out".into());
                extra.set_file_name(format!("{stem}_{suffix}.csv"));
                std::fs::write(extra, content.as_bytes())?;
            }
        }
        None => {
            std::io::stdout().write_all(outcome.csv.as_bytes())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match &cli.config {
        Some(path) => {
            let loaded = std::fs::read_to_string(path)
                .map_err(anyhow::Error::from)
                .and_then(|text| ExperimentConfig::from_toml(&text));
            match loaded {
                Ok(mut cfg) => {
                    if let Some(seed) = seed_of(&cli.command) {
                        cfg.set_seed(seed);
                    }
                    cfg
                }
                Err(e) => {
                    eprintln!("error: cannot load config: {e}");
                    return ExitCode::from(2);
                }
            }
        }
        None => to_config(cli.command),
    };
    if cli.show_config {
        eprintln!("{}", config.to_toml());
    }
    match run(&config, cli.workers) {
        Ok(outcome) => {
            if let Err(e) = emit(&outcome, cli.out.as_ref()) {
                eprintln!("error: {e}");
                return ExitCode::FAILURE;
            }
            eprintln!("{}", outcome.summary);
            match outcome.pass {
                Some(false) => ExitCode::from(EXIT_STAT_FAIL),
                _ => ExitCode::SUCCESS,
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
