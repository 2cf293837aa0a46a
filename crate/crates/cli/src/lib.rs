//! Library side of the experiment runner: every subcommand is a pure
//! function from a config to an [`Outcome`] (CSV text, a one-line
//! summary, and an optional pass/fail verdict), so the binary stays a
//! thin argument-parsing shell and the test suites drive the exact
//! same code paths.

pub mod commands;
pub mod config;

pub use config::ExperimentConfig;

/// Result of one experiment run.
#[derive(Debug, Clone)]
pub struct Outcome {
    /// Main CSV artifact (header row, LF line endings).
    pub csv: String,
    /// Auxiliary CSV artifacts as (file suffix, content).
    pub extra_csv: Vec<(String, String)>,
    /// One-line human summary (goes to stderr, never into the CSV).
    pub summary: String,
    /// Some(true/false) when an oracle exists, None for plain runs.
    pub pass: Option<bool>,
}

impl Outcome {
    fn plain(csv: String, summary: String) -> Self {
        Outcome {
            csv,
            extra_csv: Vec::new(),
            summary,
            pass: None,
        }
    }

    fn gated(csv: String, summary: String, pass: bool) -> Self {
        Outcome {
            csv,
            extra_csv: Vec::new(),
            summary,
            pass: Some(pass),
        }
    }
}

/// Assemble a CSV document: header plus rows, UTF-8, LF endings.
pub fn csv_doc(header: &str, rows: &[String]) -> String {
    let mut out =
        String::with_capacity(header.len() + rows.iter().map(|r| r.len() + 1).sum::<usize>() + 1);
    out.push_str(header);
    out.push('\n');
    for r in rows {
        out.push_str(r);
        out.push('\n');
    }
    out
}

/// Run the experiment described by the config on a rayon pool with the
/// requested worker count (0 = library default). Output is identical
/// for every worker count.
pub fn run(config: &ExperimentConfig, workers: usize) -> anyhow::Result<Outcome> {
    let exec = || commands::dispatch(config);
    if workers == 0 {
        exec()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()?;
        pool.install(exec)
    }
}
