//! `nuqsim`: runs one configured time sweep and emits a CSV report.

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nuqsim::experiment::{run_experiment, ExperimentConfig, ExperimentKind, Setting};

#[derive(Parser, Debug)]
#[command(name = "nuqsim", version, about = "Collective neutrino oscillation experiments on a statevector simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Two-flavour vacuum disappearance probability versus baseline.
    Vacuum(Overrides),
    /// Flavour inversion probability of an interacting ensemble.
    Invert(Overrides),
    /// Pairwise concurrence of two interacting neutrinos via a SWAP test.
    Concurrence(Overrides),
}

/// Every flag overrides the same key in `--config`.
#[derive(Args, Debug)]
struct Overrides {
    /// `key = value` config file.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Number of neutrinos.
    #[arg(long)]
    n: Option<String>,
    /// Vacuum mixing angle (accepts `pi` expressions).
    #[arg(long, value_name = "RAD")]
    theta_nu: Option<String>,
    /// Pair coupling angle `p:q:F`, 1-based; repeatable.
    #[arg(long, value_name = "P:Q:F")]
    pair_angle: Vec<String>,
    /// Mass-squared splitting [eV²].
    #[arg(long)]
    dm2: Option<String>,
    /// Neutrino energy [GeV].
    #[arg(long)]
    energy: Option<String>,
    /// Charged-current matter potential, in units of the coupling.
    #[arg(long)]
    v_cc: Option<String>,
    /// Initial flavour string such as `eμ` or `em`.
    #[arg(long)]
    initial: Option<String>,
    #[arg(long)]
    t_min: Option<String>,
    #[arg(long)]
    t_max: Option<String>,
    /// Grid size.
    #[arg(long)]
    points: Option<String>,
    /// `exact`, `statevector-shots` or `noisy`.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    shots: Option<String>,
    /// Trotter steps per evaluation time.
    #[arg(long)]
    steps: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// `p1q,p2q,readout`.
    #[arg(long, value_name = "P1,P2,PR")]
    noise: Option<String>,
    /// Route distant pairs through SWAP chains.
    #[arg(long, value_name = "BOOL", num_args = 0..=1, default_missing_value = "true")]
    hardware_swaps: Option<String>,
    /// Write the CSV here instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<String>,
}

impl Overrides {
    fn settings(&self) -> Vec<Setting> {
        let scalars = [
            ("n", &self.n),
            ("theta_nu", &self.theta_nu),
            ("dm2", &self.dm2),
            ("energy", &self.energy),
            ("v_cc", &self.v_cc),
            ("initial", &self.initial),
            ("t_min", &self.t_min),
            ("t_max", &self.t_max),
            ("points", &self.points),
            ("mode", &self.mode),
            ("shots", &self.shots),
            ("steps", &self.steps),
            ("seed", &self.seed),
            ("noise", &self.noise),
            ("hardware_swaps", &self.hardware_swaps),
            ("out", &self.out),
        ];
        // `n` first: it selects the preset the other keys refine.
        let mut out: Vec<Setting> = scalars
            .iter()
            .filter_map(|(k, v)| v.as_ref().map(|v| Setting::flag(k, v.clone())))
            .collect();
        out.extend(self.pair_angle.iter().map(|v| Setting::flag("pair_angle", v.clone())));
        out
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, flags) = match &cli.command {
        Command::Vacuum(o) => (ExperimentKind::Vacuum, o),
        Command::Invert(o) => (ExperimentKind::Invert, o),
        Command::Concurrence(o) => (ExperimentKind::Concurrence, o),
    };
    let cfg = match ExperimentConfig::load(Some(kind), flags.config.as_deref(), &flags.settings()) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("nuqsim: config error: {e}");
            return ExitCode::from(2);
        }
    };
    let report = match run_experiment(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("nuqsim: {e}");
            return ExitCode::FAILURE;
        }
    };
    let written = match &cfg.out_path {
        Some(path) => report.write_to(path),
        None => std::io::stdout().lock().write_all(report.to_csv_string().as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("nuqsim: cannot write report: {e}");
        return ExitCode::FAILURE;
    }
    ExitCode::SUCCESS
}
