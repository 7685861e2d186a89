use std::path::PathBuf;
use std::process::ExitCode;

use bdca::experiment::{
    run_experiment, AlgorithmChoice, ExperimentConfig, ExperimentError, ExperimentKind,
    ExperimentSummary,
};
use clap::{Args, Parser, Subcommand};

const EXIT_CONFIG: u8 = 2;
const EXIT_IO: u8 = 3;

#[derive(Parser)]
#[command(name = "bdca", version, about = "DCA / BDCA experiments on quadratic DC programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Multistart copositivity test on the Horn family (mu < 2 is non-copositive).
    Copositivity(Common),
    /// Random trust-region subproblems with an l-infinity ball.
    TrustRegion(Common),
    /// Solve one problem given by files.
    Solve(SolveArgs),
}

#[derive(Args)]
struct Common {
    /// JSON experiment configuration; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated problem sizes.
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    #[arg(long)]
    starts: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, allow_negative_numbers = true)]
    mu: Option<f64>,
    /// Objective value below which a run stops early.
    #[arg(long, allow_hyphen_values = true)]
    threshold: Option<f64>,
    #[arg(long)]
    algorithm: Option<AlgorithmChoice>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for the multistart sweep.
    #[arg(long, env = "BDCA_WORKERS", default_value_t = 1)]
    workers: usize,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    matrix: Option<PathBuf>,
    #[arg(long)]
    vector: Option<PathBuf>,
    #[arg(long)]
    constraints: Option<PathBuf>,
    /// Starting point; defaults to the projection of the origin.
    #[arg(long)]
    start: Option<PathBuf>,
}

fn load(common: &Common, kind: ExperimentKind) -> Result<ExperimentConfig, ExperimentError> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| {
                ExperimentError::Io(bdca::io::IoError::Io {
                    path: path.display().to_string(),
                    source,
                })
            })?;
            ExperimentConfig::from_json(&text)?
        }
        None => ExperimentConfig {
            experiment: kind,
            ..Default::default()
        },
    };
    if common.config.is_some() && !compatible(cfg.experiment, kind) {
        return Err(ExperimentError::Config(format!(
            "config experiment '{}' does not match this subcommand",
            cfg.experiment.name()
        )));
    }
    if let Some(v) = &common.sizes {
        cfg.sizes = v.clone();
    }
    if let Some(v) = common.starts {
        cfg.n_starts = v;
    }
    if let Some(v) = common.seed {
        cfg.seed = v;
    }
    if let Some(v) = common.mu {
        cfg.mu = Some(v);
    }
    if let Some(v) = common.threshold {
        cfg.threshold = Some(v);
    }
    if let Some(v) = common.algorithm {
        cfg.algorithm = v;
    }
    if let Some(v) = &common.out {
        cfg.output_dir = v.clone();
    }
    cfg.workers = common.workers;
    if matches!(cfg.experiment, ExperimentKind::HornCopositive | ExperimentKind::HornNoncopositive) {
        cfg.experiment = if cfg.mu() < 2.0 {
            ExperimentKind::HornNoncopositive
        } else {
            ExperimentKind::HornCopositive
        };
    }
    Ok(cfg)
}

fn compatible(a: ExperimentKind, b: ExperimentKind) -> bool {
    use ExperimentKind::*;
    matches!(
        (a, b),
        (HornCopositive | HornNoncopositive, HornCopositive | HornNoncopositive)
            | (TrSubproblem, TrSubproblem)
            | (SingleSolve, SingleSolve)
    )
}

fn report(s: &ExperimentSummary) {
    for z in &s.sizes {
        println!(
            "n={} starts={} median_ratio={:.3} median_rel_gap={:.3e} min_phi_dca={:.6e} min_phi_bdca={:.6e}",
            z.n, z.n_starts, z.median_ratio, z.median_rel_gap, z.min_phi_dca, z.min_phi_bdca
        );
    }
    for v in &s.verdicts {
        println!("{} {}: {}", v.matrix_id, v.algorithm, v.verdict);
    }
    let failed = s.runs.iter().filter(|r| r.error.is_some()).count();
    if failed > 0 {
        eprintln!("{failed} run(s) failed; see runs.csv");
    }
    for f in &s.files {
        println!("wrote {}", f.display());
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match &cli.command {
        Command::Copositivity(c) => load(c, ExperimentKind::HornCopositive),
        Command::TrustRegion(c) => load(c, ExperimentKind::TrSubproblem),
        Command::Solve(s) => load(&s.common, ExperimentKind::SingleSolve).map(|mut cfg| {
            cfg.matrix = s.matrix.clone().or(cfg.matrix);
            cfg.vector = s.vector.clone().or(cfg.vector);
            cfg.constraints = s.constraints.clone().or(cfg.constraints);
            cfg.start = s.start.clone().or(cfg.start);
            cfg
        }),
    };
    match cfg.and_then(|cfg| run_experiment(&cfg)) {
        Ok(summary) => {
            report(&summary);
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                ExperimentError::Config(_) => EXIT_CONFIG,
                ExperimentError::Io(_) => EXIT_IO,
            })
        }
    }
}
