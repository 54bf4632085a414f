use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use frontlab::experiment::{
    has_errors, run, validate, ExperimentConfig, ExperimentKind, Finding, Severity,
};

#[derive(Parser)]
#[command(name = "frontlab", version, about = "Front dynamics of the FA-1f model and the threshold contact process")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Runs trajectories and dumps fronts, probes and flips.
    Simulate(Common),
    /// Front velocity, the velocity formula and the jump structure.
    Velocity(Common),
    /// Diffusivity estimators, the KS test and covariance decay.
    Clt(Common),
    /// Seen-from-front patterns and TV curves between two starts.
    InvariantMeasure(Common),
    /// Survival and extinction times of the contact process.
    ContactSurvival(Common),
    /// Restarted contact process dominating FA-1f.
    Restart(Common),
    /// Detailed balance and engine-vs-exact comparison.
    OracleCheck(Common),
    /// Frequencies of long runs of ones behind the front.
    GapStats(Common),
    /// Drift bound for the distance to the nearest zero in a box.
    DriftDiagnostic(Common),
    /// Pointwise order of coupled FA-1f and contact process.
    Coupling(Common),
    /// Worker-count, live-set and shift invariance of trajectories.
    Equivalence(Common),
    /// Checks a configuration without running it.
    Validate {
        /// Experiment kind, unless the config file names one.
        #[arg(long)]
        kind: Option<String>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Args)]
struct Common {
    /// JSON config; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    q: Option<f64>,
    /// Horizon.
    #[arg(long)]
    t: Option<f64>,
    /// Ensemble size.
    #[arg(long)]
    n: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// delta0, bernoulli or pattern:<bits>.
    #[arg(long)]
    init: Option<String>,
    /// Output directory; the summary goes to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, value_enum)]
    live_set: Option<Switch>,
    /// Require an explicit seed.
    #[arg(long)]
    ci: bool,
    /// Any other config field, as key=value with a JSON value.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
}

impl Common {
    fn config(&self, kind: Option<ExperimentKind>) -> Result<ExperimentConfig, String> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
                ExperimentConfig::from_json(&text).map_err(|e| format!("{}: {e}", path.display()))?
            }
            None => ExperimentConfig::default(),
        };
        if let Some(k) = kind {
            cfg.kind = k;
        }
        for s in &self.sets {
            cfg.set(s).map_err(|e| e.to_string())?;
        }
        if let Some(q) = self.q {
            cfg.q = q;
        }
        if let Some(t) = self.t {
            cfg.t = t;
        }
        if let Some(n) = self.n {
            cfg.n = n;
        }
        if self.seed.is_some() {
            cfg.seed = self.seed;
        }
        if let Some(init) = &self.init {
            cfg.init = init.clone();
        }
        if let Some(w) = self.workers {
            cfg.workers = w;
        }
        if let Some(s) = self.live_set {
            cfg.live_set = matches!(s, Switch::On);
        }
        if self.ci {
            cfg.ci = true;
        }
        if self.out.is_some() {
            cfg.out = self.out.clone();
        }
        Ok(cfg)
    }
}

fn report(findings: &[Finding]) {
    for f in findings {
        let tag = match f.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
            Severity::Note => "note",
        };
        eprintln!("{tag}: {}", f.message);
    }
}

fn execute(cfg: ExperimentConfig) -> ExitCode {
    let findings = validate(&cfg);
    report(&findings);
    if has_errors(&findings) {
        return ExitCode::from(2);
    }
    let out = match run(&cfg) {
        Ok(out) => out,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let written = match &cfg.out {
        Some(dir) => out.write_to(dir).map(|_| eprintln!("wrote {}", dir.display())),
        None => out.summary_json().map(|s| print!("{s}")),
    };
    match written {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, common) = match &cli.command {
        Command::Simulate(c) => (ExperimentKind::Simulate, c),
        Command::Velocity(c) => (ExperimentKind::Velocity, c),
        Command::Clt(c) => (ExperimentKind::Clt, c),
        Command::InvariantMeasure(c) => (ExperimentKind::InvariantMeasure, c),
        Command::ContactSurvival(c) => (ExperimentKind::ContactSurvival, c),
        Command::Restart(c) => (ExperimentKind::Restart, c),
        Command::OracleCheck(c) => (ExperimentKind::OracleCheck, c),
        Command::GapStats(c) => (ExperimentKind::GapStats, c),
        Command::DriftDiagnostic(c) => (ExperimentKind::DriftDiagnostic, c),
        Command::Coupling(c) => (ExperimentKind::Coupling, c),
        Command::Equivalence(c) => (ExperimentKind::Equivalence, c),
        Command::Validate { kind, common } => {
            let kind = match kind.as_deref().map(ExperimentKind::parse).transpose() {
                Ok(k) => k,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            let cfg = match common.config(kind) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            let findings = validate(&cfg);
            match serde_json::to_string_pretty(&findings) {
                Ok(s) => println!("{s}"),
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(1);
                }
            }
            return if has_errors(&findings) {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match common.config(Some(kind)) {
        Ok(cfg) => execute(cfg),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
