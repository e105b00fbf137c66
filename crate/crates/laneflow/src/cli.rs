//! The `laneflow` command line.
//!
//! Exit codes: 0 on success, 1 when the configuration or arguments are
//! invalid (nothing is written), 2 when a run fails or output cannot be
//! written.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use laneflow_core::harness::{eta_sweep, refinement_study, Reference};
use laneflow_core::scenario::greenshields_riemann_exact;
use laneflow_core::{run, ScenarioName};

use crate::config::{load_config, RunConfig};
use crate::error::AppError;
use crate::output::{
    write_diagnostics_csv, write_l1_table, write_refinement_table, write_snapshot_csv, write_tv_table,
};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "LANEFLOW_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "laneflow", version, about = "Two-lane nonlocal traffic flow with lane changing")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct Source {
    /// TOML configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Named preset (see `laneflow presets`).
    #[arg(long)]
    pub preset: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one configuration and write snapshot and diagnostics CSVs.
    Run {
        #[command(flatten)]
        source: Source,
        #[arg(long, env = OUT_DIR_ENV, default_value = "laneflow-out")]
        out: PathBuf,
    },
    /// Run every eta against the local limit; writes l1_table.csv and tv_table.csv.
    Sweep {
        #[command(flatten)]
        source: Source,
        /// Comma-separated list; defaults to the scenario's list.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        etas: Option<Vec<f64>>,
        #[arg(long)]
        n_cells: Option<usize>,
        #[arg(long, env = OUT_DIR_ENV, default_value = "laneflow-out")]
        out: PathBuf,
    },
    /// Grid refinement study; writes refine_table.csv.
    Refine {
        #[command(flatten)]
        source: Source,
        /// Nested grid sizes, e.g. 400,800,1600.
        #[arg(long, value_delimiter = ',', required = true)]
        n_list: Vec<usize>,
        #[arg(long, value_enum, default_value_t = RefineReference::SelfConvergence)]
        reference: RefineReference,
        #[arg(long, env = OUT_DIR_ENV, default_value = "laneflow-out")]
        out: PathBuf,
    },
    /// Run a configuration and print its diagnostics table to stdout.
    Diagnose {
        #[command(flatten)]
        source: Source,
    },
    /// List the scenario presets.
    Presets,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RefineReference {
    /// Each grid against the next finer one.
    #[value(name = "self")]
    SelfConvergence,
    /// Exact Riemann solution (riemann_local only).
    Exact,
}

fn resolve(source: &Source) -> Result<RunConfig, AppError> {
    match (&source.config, &source.preset) {
        (Some(path), _) => load_config(path),
        (None, Some(name)) => ScenarioName::parse(name)
            .map(RunConfig::from_preset)
            .map_err(|_| AppError::Config(format!("unknown preset {name:?}"))),
        (None, None) => Err(AppError::Config("need --config or --preset".into())),
    }
}

/// Collected output, written only after every computation succeeded.
struct Files(Vec<(String, Vec<u8>)>);

impl Files {
    fn new() -> Self {
        Files(Vec::new())
    }

    fn add(&mut self, name: impl Into<String>, body: Vec<u8>) {
        self.0.push((name.into(), body));
    }

    fn write(self, dir: &Path) -> Result<(), AppError> {
        fs::create_dir_all(dir).map_err(|e| AppError::Io(format!("{}: {e}", dir.display())))?;
        for (name, body) in self.0 {
            let path = dir.join(&name);
            fs::write(&path, body).map_err(|e| AppError::Io(format!("{}: {e}", path.display())))?;
        }
        Ok(())
    }
}

fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<(), AppError> {
    match cli.command {
        Command::Presets => {
            for name in ScenarioName::ALL {
                writeln!(stdout, "{:<14} {}", name.as_str(), name.describe())?;
            }
        }
        Command::Run { source, out } => {
            let config = resolve(&source)?.simulation()?;
            let snaps = run(&config)?;
            let mut files = Files::new();
            for (k, snap) in snaps.iter().enumerate() {
                let mut buf = Vec::new();
                write_snapshot_csv(snap, &config.grid, &mut buf)?;
                files.add(format!("snapshot_{k:04}.csv"), buf);
            }
            let mut buf = Vec::new();
            write_diagnostics_csv(snaps.iter().map(|s| &s.record), &mut buf)?;
            files.add("diagnostics.csv", buf);
            files.write(&out)?;
        }
        Command::Sweep { source, etas, n_cells, out } => {
            let mut scenario = resolve(&source)?.scenario;
            if let Some(n) = n_cells {
                scenario = scenario.with_n_cells(n);
            }
            let etas = etas.unwrap_or_else(|| scenario.eta_list.clone());
            if let Some(bad) = etas.iter().find(|e| !(**e >= 0.0 && e.is_finite())) {
                return Err(AppError::Config(format!("--etas: eta must be ≥ 0, got {bad}")));
            }
            scenario.default_config()?.validate()?;
            let result = eta_sweep(&scenario, &etas)?;
            let mut files = Files::new();
            let mut buf = Vec::new();
            write_l1_table(&result.l1_table, &mut buf)?;
            files.add("l1_table.csv", buf);
            let mut buf = Vec::new();
            write_tv_table(&result.tv_table, &mut buf)?;
            files.add("tv_table.csv", buf);
            files.write(&out)?;
        }
        Command::Refine { source, n_list, reference, out } => {
            let run_config = resolve(&source)?;
            let scenario = run_config.scenario;
            scenario.default_config()?.validate()?;
            let make = |n: usize| scenario.clone().with_n_cells(n).default_config();
            let rows = match reference {
                RefineReference::SelfConvergence => refinement_study(make, &n_list, Reference::SelfConvergence)?,
                RefineReference::Exact => {
                    if scenario.name != Some(ScenarioName::RiemannLocal) {
                        return Err(AppError::Config(
                            "--reference exact is only available for the riemann_local preset".into(),
                        ));
                    }
                    let lane1 = greenshields_riemann_exact(0.0, 0.6);
                    let exact = move |x: f64, t: f64| [lane1(x, t), 0.0];
                    refinement_study(make, &n_list, Reference::Analytic(&exact))?
                }
            };
            let mut files = Files::new();
            let mut buf = Vec::new();
            write_refinement_table(&rows, &mut buf)?;
            files.add("refine_table.csv", buf);
            files.write(&out)?;
        }
        Command::Diagnose { source } => {
            let config = resolve(&source)?.simulation()?;
            let snaps = run(&config)?;
            write_diagnostics_csv(snaps.iter().map(|s| &s.record), &mut *stdout)?;
        }
    }
    Ok(())
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code. Messages go to `stdout` and `stderr`.
pub fn run_cli<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(stdout, "{text}") } else { write!(stderr, "{text}") };
            return code;
        }
    };
    match execute(cli, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
