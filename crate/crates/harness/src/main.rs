use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use oddnls_harness::config::{ExperimentConfig, ExperimentKind};
use oddnls_harness::experiments::{run_experiment, run_verify_all};
use oddnls_harness::threshold::KSignTarget;

/// Numerical laboratory for odd threshold solutions of the 1d focusing NLS.
#[derive(Parser)]
#[command(name = "oddnls", version, about)]
struct Cli {
    /// Path to a TOML config file; defaults apply for missing fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory for manifest.json / results.csv.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Seed for randomized property suites.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Suppress progress notes (artifacts are still written).
    #[arg(long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Construct exact-threshold odd data and classify the evolution.
    Dichotomy {
        /// Which K-sign branch to construct.
        #[arg(long, value_parser = parse_k_sign, default_value = "positive")]
        k_sign: KSignTarget,
        /// Half-separation of the soliton pair.
        #[arg(long)]
        y: Option<f64>,
        /// Integration horizon.
        #[arg(long)]
        t_max: Option<f64>,
    },
    /// Tabulate the odd minimizing sequence against twice the ground action.
    MinSeq,
    /// Fit the decay exponents of the two-soliton overlap integrals.
    OverlapAsymptotics,
    /// Constrained coercivity minima of the linearized form.
    Coercivity,
    /// Modulation-parameter recovery and estimate audits.
    ModulationAudit,
    /// Localized virial identity along a smooth trajectory.
    VirialAudit,
    /// Randomized suite for the blow-up discriminant inequality.
    BlowupIneq,
    /// Run every experiment with the current configuration.
    VerifyAll,
}

fn parse_k_sign(s: &str) -> Result<KSignTarget, String> {
    match s.to_ascii_lowercase().as_str() {
        "positive" | "pos" | "+" => Ok(KSignTarget::Positive),
        "negative" | "neg" | "-" => Ok(KSignTarget::Negative),
        other => Err(format!("unknown K sign `{other}` (use positive|negative)")),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut cfg = match &cli.config {
        Some(path) => match ExperimentConfig::from_file(path) {
            Ok(cfg) => cfg,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
        },
        None => ExperimentConfig::default(),
    };
    if let Some(out) = cli.out {
        cfg.output_dir = out;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }

    let verify_all = matches!(cli.command, Command::VerifyAll);
    match cli.command {
        Command::Dichotomy { k_sign, y, t_max } => {
            cfg.experiment = ExperimentKind::Dichotomy;
            cfg.data.k_sign_target = k_sign;
            if let Some(y) = y {
                cfg.data.y = y;
            }
            if let Some(t) = t_max {
                cfg.evolve.t_max = t;
            }
        }
        Command::MinSeq => cfg.experiment = ExperimentKind::MinimizingSequence,
        Command::OverlapAsymptotics => cfg.experiment = ExperimentKind::OverlapAsymptotics,
        Command::Coercivity => cfg.experiment = ExperimentKind::Coercivity,
        Command::ModulationAudit => cfg.experiment = ExperimentKind::ModulationAudit,
        Command::VirialAudit => cfg.experiment = ExperimentKind::VirialAudit,
        Command::BlowupIneq => cfg.experiment = ExperimentKind::BlowupInequality,
        Command::VerifyAll => {}
    }
    if let Err(e) = cfg.validate() {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }

    let result = if verify_all {
        run_verify_all(&cfg, cli.quiet)
    } else {
        run_experiment(&cfg, cli.quiet)
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
