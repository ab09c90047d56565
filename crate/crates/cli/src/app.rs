//! Command-line surface. Values from `--config` are applied first, then
//! flags, so flags win.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use naimark::dilation::FaultInjection;

use crate::commands;
use crate::config::ExperimentConfig;
use crate::error::{io_err, CliError};
use crate::verify::run_checks;

#[derive(Debug, Parser)]
#[command(name = "naimark", version, about = "Dilated non-Hermitian qubit experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Probabilities, invariants and normalisation over the time grid.
    Evolve,
    /// Dilated-system populations before postselection.
    Raw4d,
    /// Final-time populations over a grid of couplings and start times.
    SweepOmega,
    /// Every figure configuration, written under `<out>/figures`.
    Figures,
    /// Property suite; exits 1 naming the first failing check.
    Verify {
        #[arg(long, value_enum)]
        inject_fault: Option<Fault>,
    },
    /// One circuit file per grid point, written under `<out>/circuits`.
    ExportCircuits,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Fault {
    FlipGammaCommutator,
}

#[derive(Debug, Default, Args)]
pub struct CommonArgs {
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub k: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub omega0: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub t0: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub t1: Option<String>,
    #[arg(long, global = true)]
    pub points: Option<String>,
    #[arg(long, global = true)]
    pub shots: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<String>,
    /// Initial qubit state, 0 or 1.
    #[arg(long, global = true)]
    pub initial: Option<String>,
    /// exact, sampled or both.
    #[arg(long, global = true)]
    pub mode: Option<String>,
    #[arg(long, global = true)]
    pub m0: Option<String>,
    #[arg(long, global = true)]
    pub f: Option<String>,
    /// Calibration grid points per output interval.
    #[arg(long, global = true)]
    pub refinement: Option<String>,
    /// lsq or t0.
    #[arg(long, global = true)]
    pub normalization: Option<String>,
    /// Comma-separated couplings of the sweep.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub omegas: Option<String>,
    /// Comma-separated start times of the sweep.
    #[arg(long = "sweep-t0s", global = true, allow_hyphen_values = true)]
    pub sweep_t0s: Option<String>,
    /// Also write SVG plots.
    #[arg(long, global = true)]
    pub svg: bool,
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

impl CommonArgs {
    /// Resolved configuration: defaults, then the config file, then flags.
    pub fn resolve(&self) -> Result<ExperimentConfig, CliError> {
        let mut cfg = ExperimentConfig::default();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).map_err(io_err(path))?;
            cfg.merge_text(&text)
                .map_err(|e| CliError::Config(format!("{}: {}", path.display(), e.message())))?;
        }
        let flags = [
            ("k", &self.k),
            ("omega0", &self.omega0),
            ("t0", &self.t0),
            ("t1", &self.t1),
            ("points", &self.points),
            ("shots", &self.shots),
            ("seed", &self.seed),
            ("initial", &self.initial),
            ("mode", &self.mode),
            ("m0", &self.m0),
            ("f", &self.f),
            ("refinement", &self.refinement),
            ("normalization", &self.normalization),
            ("omegas", &self.omegas),
            ("sweep_t0s", &self.sweep_t0s),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        if self.svg {
            cfg.svg = true;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn report(files: &[PathBuf], out: &Path) {
    for f in files {
        let shown = f.strip_prefix(out).unwrap_or(f);
        println!("wrote {}", out.join(shown).display());
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = cli.common.resolve()?;
    let out = &cli.common.out;
    let files = match cli.command {
        Command::Evolve => commands::cmd_evolve(&cfg, out)?,
        Command::Raw4d => commands::cmd_raw4d(&cfg, out)?,
        Command::SweepOmega => commands::cmd_sweep_omega(&cfg, out)?,
        Command::Figures => commands::cmd_figures(&cfg, out)?,
        Command::ExportCircuits => commands::cmd_export_circuits(&cfg, out)?,
        Command::Verify { inject_fault } => {
            let fault = match inject_fault {
                Some(Fault::FlipGammaCommutator) => FaultInjection::FlipGammaCommutator,
                None => FaultInjection::None,
            };
            let r = run_checks(&cfg, fault)?;
            for c in &r.checks {
                println!("{}", c.line());
            }
            let n = r.checks.len();
            r.into_result()?;
            println!("all {n} checks passed");
            Vec::new()
        }
    };
    report(&files, out);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("naimark").chain(args.iter().copied())).unwrap()
    }

    #[test]
    fn negative_values_and_globals() {
        let cli = parse(&["evolve", "--k", "-1", "--t0", "-10", "--sweep-t0s", "-20,-5"]);
        let cfg = cli.common.resolve().unwrap();
        assert_eq!(cfg.params.k, -1.0);
        assert_eq!(cfg.t0, -10.0);
        assert_eq!(cfg.sweep_t0s, vec![-20.0, -5.0]);
        let cli = parse(&["--k", "2", "raw4d"]);
        assert_eq!(cli.common.resolve().unwrap().params.k, 2.0);
    }

    #[test]
    fn flags_override_config_file() {
        let dir = std::env::temp_dir().join(format!("naimark-app-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.cfg");
        std::fs::write(&path, "k = 2\nseed = 9\n").unwrap();
        let cli = parse(&["evolve", "--config", path.to_str().unwrap(), "--seed", "3"]);
        let cfg = cli.common.resolve().unwrap();
        assert_eq!((cfg.params.k, cfg.seed), (2.0, 3));
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn bad_values_are_config_errors() {
        let e = parse(&["evolve", "--mode", "fast"]).common.resolve().unwrap_err();
        assert_eq!(e.exit_code(), 2);
        let e = parse(&["evolve", "--t1", "-30"]).common.resolve().unwrap_err();
        assert_eq!(e.exit_code(), 2);
        let e = parse(&["evolve", "--config", "/nonexistent/x.cfg"]).common.resolve().unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(Cli::try_parse_from(["naimark", "verify", "--inject-fault", "nope"]).is_err());
    }
}
