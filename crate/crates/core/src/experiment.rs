//! Paired DCA/BDCA sweeps with CSV output.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::applications::{
    copositivity_config, copositivity_problem, horn_family, random_orthant_ball_start,
    random_tr_instance, stream_seed, tr_config, CopositivityVerdict,
};
use crate::io::{self, real, IoError};
use crate::model::{QuadraticDcProblem, SolverConfig, StepRule, DEFAULT_SIGMA_MARGIN};
use crate::par;
use crate::solver::{self, Algorithm, SolveResult};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] IoError),
}

impl From<crate::error::Error> for ExperimentError {
    fn from(e: crate::error::Error) -> Self {
        ExperimentError::Config(e.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    HornCopositive,
    HornNoncopositive,
    TrSubproblem,
    SingleSolve,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::HornCopositive => "horn_copositive",
            Self::HornNoncopositive => "horn_noncopositive",
            Self::TrSubproblem => "tr_subproblem",
            Self::SingleSolve => "single_solve",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum AlgorithmChoice {
    Dca,
    Bdca,
    #[default]
    Both,
}

impl AlgorithmChoice {
    pub fn algorithms(self) -> &'static [Algorithm] {
        match self {
            Self::Dca => &[Algorithm::Dca],
            Self::Bdca => &[Algorithm::Bdca],
            Self::Both => &[Algorithm::Dca, Algorithm::Bdca],
        }
    }
}

impl std::str::FromStr for AlgorithmChoice {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "dca" => Ok(Self::Dca),
            "bdca" => Ok(Self::Bdca),
            "both" => Ok(Self::Both),
            other => Err(format!("unknown algorithm '{other}' (dca|bdca|both)")),
        }
    }
}

/// Optional per-field overrides of the experiment's solver defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOverrides {
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub lambda_bar_0: Option<f64>,
    pub gamma: Option<f64>,
    pub step_rule: Option<StepRule>,
    pub d_tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub active_tol: Option<f64>,
    pub max_backtracks: Option<usize>,
    pub objective_stop: Option<f64>,
}

impl SolverOverrides {
    pub fn apply(&self, base: SolverConfig) -> SolverConfig {
        SolverConfig {
            alpha: self.alpha.unwrap_or(base.alpha),
            beta: self.beta.unwrap_or(base.beta),
            lambda_bar_0: self.lambda_bar_0.unwrap_or(base.lambda_bar_0),
            gamma: self.gamma.unwrap_or(base.gamma),
            step_rule: self.step_rule.unwrap_or(base.step_rule),
            d_tol: self.d_tol.unwrap_or(base.d_tol),
            max_iter: self.max_iter.unwrap_or(base.max_iter),
            active_tol: self.active_tol.unwrap_or(base.active_tol),
            max_backtracks: self.max_backtracks.unwrap_or(base.max_backtracks),
            objective_stop: self.objective_stop.or(base.objective_stop),
            keep_points: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub sizes: Vec<usize>,
    pub n_starts: usize,
    pub seed: u64,
    /// Horn-family parameter; defaults to 2 (copositive) or 1.9.
    pub mu: Option<f64>,
    /// Objective stop for non-copositivity runs; defaults to 0.
    pub threshold: Option<f64>,
    pub algorithm: AlgorithmChoice,
    pub solver: SolverOverrides,
    pub output_dir: PathBuf,
    /// Inputs for `single_solve`.
    pub matrix: Option<PathBuf>,
    pub vector: Option<PathBuf>,
    pub constraints: Option<PathBuf>,
    pub start: Option<PathBuf>,
    pub workers: usize,
    /// Write the iteration trace of the first start of every size.
    pub write_traces: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: ExperimentKind::HornCopositive,
            sizes: vec![1000],
            n_starts: 100,
            seed: 2023,
            mu: None,
            threshold: None,
            algorithm: AlgorithmChoice::Both,
            solver: SolverOverrides::default(),
            output_dir: PathBuf::from("out"),
            matrix: None,
            vector: None,
            constraints: None,
            start: None,
            workers: 1,
            write_traces: true,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(s: &str) -> Result<Self, ExperimentError> {
        serde_json::from_str(s).map_err(|e| ExperimentError::Config(e.to_string()))
    }

    pub fn mu(&self) -> f64 {
        self.mu.unwrap_or(match self.experiment {
            ExperimentKind::HornNoncopositive => 1.9,
            _ => 2.0,
        })
    }

    pub fn solver_config(&self) -> SolverConfig {
        let mut base = match self.experiment {
            ExperimentKind::TrSubproblem => tr_config(),
            ExperimentKind::HornCopositive | ExperimentKind::HornNoncopositive => {
                copositivity_config()
            }
            ExperimentKind::SingleSolve => SolverConfig::default(),
        };
        match self.experiment {
            ExperimentKind::HornNoncopositive => {
                base.objective_stop = Some(self.threshold.unwrap_or(0.0));
            }
            _ => base.objective_stop = self.threshold,
        }
        self.solver.apply(base)
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        let bad = |m: String| Err(ExperimentError::Config(m));
        match self.experiment {
            ExperimentKind::SingleSolve => {
                if self.matrix.is_none() || self.vector.is_none() || self.constraints.is_none() {
                    return bad("single_solve needs matrix, vector and constraints files".into());
                }
            }
            kind => {
                if self.sizes.is_empty() {
                    return bad("sizes must be nonempty".into());
                }
                if self.n_starts == 0 {
                    return bad("n_starts must be ≥ 1".into());
                }
                let min = if kind == ExperimentKind::TrSubproblem { 1 } else { 3 };
                if let Some(n) = self.sizes.iter().find(|n| **n < min) {
                    return bad(format!("size {n} is below the minimum {min}"));
                }
            }
        }
        if !self.mu().is_finite() {
            return bad("mu must be finite".into());
        }
        self.solver_config()
            .validate()
            .map_err(|e| ExperimentError::Config(e.to_string()))
    }
}

/// One solver run of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub n: usize,
    pub start: usize,
    pub algorithm: Algorithm,
    pub status: String,
    pub iterations: usize,
    pub phi_star: f64,
    pub wall_time_s: f64,
    pub stationarity: f64,
    pub complementarity: f64,
    pub feasibility: f64,
    pub error: Option<String>,
}

impl RunRecord {
    fn from_result(n: usize, start: usize, alg: Algorithm, r: &Result<SolveResult, String>) -> Self {
        match r {
            Ok(s) => Self {
                n,
                start,
                algorithm: alg,
                status: s.status.name().into(),
                iterations: s.iteration_count(),
                phi_star: s.phi_star,
                wall_time_s: s.solve_time,
                stationarity: s.kkt.stationarity_residual,
                complementarity: s.kkt.complementarity_residual,
                feasibility: s.kkt.feasibility_violation,
                error: None,
            },
            Err(e) => Self {
                n,
                start,
                algorithm: alg,
                status: "error".into(),
                iterations: 0,
                phi_star: f64::NAN,
                wall_time_s: f64::NAN,
                stationarity: f64::NAN,
                complementarity: f64::NAN,
                feasibility: f64::NAN,
                error: Some(e.clone()),
            },
        }
    }
}

/// Ratio statistics over the paired starts of one size.
#[derive(Debug, Clone, PartialEq)]
pub struct SizeSummary {
    pub n: usize,
    pub n_starts: usize,
    /// `time_DCA / time_BDCA` per start (empty unless both algorithms ran).
    pub ratios: Vec<f64>,
    pub median_ratio: f64,
    pub mean_ratio: f64,
    pub median_time_dca: f64,
    pub median_time_bdca: f64,
    /// `|φ_BDCA − φ_DCA| / (1 + |φ_DCA|)`, median over starts.
    pub median_rel_gap: f64,
    pub min_phi_dca: f64,
    pub min_phi_bdca: f64,
    pub max_phi_dca: f64,
    pub max_phi_bdca: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerdictRow {
    pub matrix_id: String,
    pub n: usize,
    pub mu: f64,
    pub algorithm: Algorithm,
    pub n_starts: usize,
    pub verdict: &'static str,
    pub witness_phi: Option<f64>,
    pub wall_time_s: f64,
    pub iterations_total: usize,
}

#[derive(Debug, Clone, Default)]
pub struct ExperimentSummary {
    pub runs: Vec<RunRecord>,
    pub sizes: Vec<SizeSummary>,
    pub verdicts: Vec<VerdictRow>,
    pub files: Vec<PathBuf>,
}

pub fn median(v: &[f64]) -> f64 {
    let mut s: Vec<f64> = v.iter().copied().filter(|x| !x.is_nan()).collect();
    if s.is_empty() {
        return f64::NAN;
    }
    s.sort_by(f64::total_cmp);
    let m = s.len() / 2;
    if s.len() % 2 == 1 {
        s[m]
    } else {
        0.5 * (s[m - 1] + s[m])
    }
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        f64::NAN
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

/// Results of the algorithms for one start, in `AlgorithmChoice` order.
type Paired = Vec<(Algorithm, Result<SolveResult, String>)>;

fn run_paired(p: &QuadraticDcProblem, x0: &[f64], cfg: &SolverConfig, choice: AlgorithmChoice) -> Paired {
    choice
        .algorithms()
        .iter()
        .map(|&alg| (alg, solver::solve(p, x0, cfg, alg).map_err(|e| e.to_string())))
        .collect()
}

fn summarize(n: usize, pairs: &[Paired]) -> SizeSummary {
    let pick = |pair: &Paired, alg: Algorithm| {
        pair.iter()
            .find(|(a, _)| *a == alg)
            .and_then(|(_, r)| r.as_ref().ok())
            .map(|s| (s.solve_time, s.phi_star))
    };
    let dca: Vec<_> = pairs.iter().map(|p| pick(p, Algorithm::Dca)).collect();
    let bdca: Vec<_> = pairs.iter().map(|p| pick(p, Algorithm::Bdca)).collect();
    let mut ratios = Vec::new();
    let mut gaps = Vec::new();
    for (d, b) in dca.iter().zip(&bdca) {
        if let (Some((td, pd)), Some((tb, pb))) = (d, b) {
            ratios.push(td / tb.max(1e-12));
            gaps.push((pb - pd).abs() / (1.0 + pd.abs()));
        }
    }
    let times = |v: &[Option<(f64, f64)>]| v.iter().flatten().map(|t| t.0).collect::<Vec<_>>();
    let phis = |v: &[Option<(f64, f64)>]| v.iter().flatten().map(|t| t.1).collect::<Vec<_>>();
    let fmin = |v: Vec<f64>| v.into_iter().fold(f64::INFINITY, f64::min);
    let fmax = |v: Vec<f64>| v.into_iter().fold(f64::NEG_INFINITY, f64::max);
    SizeSummary {
        n,
        n_starts: pairs.len(),
        median_ratio: median(&ratios),
        mean_ratio: mean(&ratios),
        ratios,
        median_time_dca: median(&times(&dca)),
        median_time_bdca: median(&times(&bdca)),
        median_rel_gap: median(&gaps),
        min_phi_dca: fmin(phis(&dca)),
        min_phi_bdca: fmin(phis(&bdca)),
        max_phi_dca: fmax(phis(&dca)),
        max_phi_bdca: fmax(phis(&bdca)),
    }
}

fn output_path(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}

/// Runs the configured sweep. Solver failures are recorded per run; only
/// configuration and I/O problems abort.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentSummary, ExperimentError> {
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.output_dir).map_err(|source| IoError::Io {
        path: cfg.output_dir.display().to_string(),
        source,
    })?;
    par::with_workers(cfg.workers, || match cfg.experiment {
        ExperimentKind::SingleSolve => run_single(cfg),
        _ => run_sweep(cfg),
    })
}

fn run_sweep(cfg: &ExperimentConfig) -> Result<ExperimentSummary, ExperimentError> {
    let solver_cfg = cfg.solver_config();
    let kind = cfg.experiment;
    let mu = cfg.mu();
    let mut summary = ExperimentSummary::default();

    for &n in &cfg.sizes {
        let size_seed = stream_seed(cfg.seed, n as u64);
        let pairs: Vec<Paired> = match kind {
            ExperimentKind::TrSubproblem => par::map_indexed(cfg.n_starts, |i| {
                let inst = match random_tr_instance(n, stream_seed(size_seed, 2 * i as u64)) {
                    Ok(inst) => inst,
                    Err(e) => return fail_all(cfg.algorithm, e.to_string()),
                };
                let x0 = inst.random_start(stream_seed(size_seed, 2 * i as u64 + 1));
                match inst.problem() {
                    Ok(p) => run_paired(&p, &x0, &solver_cfg, cfg.algorithm),
                    Err(e) => fail_all(cfg.algorithm, e.to_string()),
                }
            }),
            _ => {
                let a = horn_family(n, mu)?;
                let problem = copositivity_problem(&a)?;
                let pairs = par::map_indexed(cfg.n_starts, |i| {
                    let x0 = random_orthant_ball_start(n, stream_seed(size_seed, i as u64));
                    run_paired(&problem, &x0, &solver_cfg, cfg.algorithm)
                });
                let threshold = solver_cfg.objective_stop.unwrap_or(0.0);
                for &alg in cfg.algorithm.algorithms() {
                    let runs: Vec<SolveResult> = pairs
                        .iter()
                        .filter_map(|p| p.iter().find(|(a, _)| *a == alg))
                        .filter_map(|(_, r)| r.as_ref().ok().cloned())
                        .collect();
                    let verdict = CopositivityVerdict::from_runs(&a, &runs, threshold);
                    let matrix_id = format!("horn_n{n}_mu{mu}");
                    if let Some(w) = &verdict.witness {
                        let path = output_path(&cfg.output_dir, &format!("witness_{matrix_id}_{alg}.txt"));
                        io::write_file(&path, &io::format_vector(w))?;
                        summary.files.push(path);
                    }
                    summary.verdicts.push(VerdictRow {
                        matrix_id,
                        n,
                        mu,
                        algorithm: alg,
                        n_starts: runs.len(),
                        verdict: verdict.tag.name(),
                        witness_phi: verdict.witness_phi,
                        wall_time_s: runs.iter().map(|r| r.solve_time).sum(),
                        iterations_total: runs.iter().map(|r| r.iteration_count()).sum(),
                    });
                }
                pairs
            }
        };

        for (i, pair) in pairs.iter().enumerate() {
            for (alg, r) in pair {
                summary.runs.push(RunRecord::from_result(n, i, *alg, r));
            }
        }
        if cfg.write_traces {
            if let Some(first) = pairs.first() {
                for (alg, r) in first {
                    if let Ok(s) = r {
                        let path = output_path(
                            &cfg.output_dir,
                            &format!("trace_{}_n{n}_{alg}.csv", kind.name()),
                        );
                        io::write_file(&path, &io::trace_csv(&s.iterations))?;
                        summary.files.push(path);
                    }
                }
            }
        }
        summary.sizes.push(summarize(n, &pairs));
    }

    write_tables(cfg, &mut summary)?;
    Ok(summary)
}

fn fail_all(choice: AlgorithmChoice, msg: String) -> Paired {
    choice.algorithms().iter().map(|&a| (a, Err(msg.clone()))).collect()
}

fn run_single(cfg: &ExperimentConfig) -> Result<ExperimentSummary, ExperimentError> {
    let (Some(mp), Some(vp), Some(cp)) = (&cfg.matrix, &cfg.vector, &cfg.constraints) else {
        return Err(ExperimentError::Config("missing input files".into()));
    };
    let q_mat = io::read_matrix(mp)?;
    let q = io::read_vector(vp)?;
    let cons = io::read_constraints(cp)?;
    let x0 = match &cfg.start {
        Some(sp) => io::read_vector(sp)?,
        None => cons.project(&vec![0.0; cons.dim()])?,
    };
    let problem = QuadraticDcProblem::build(q_mat, q, cons, DEFAULT_SIGMA_MARGIN)?;
    let solver_cfg = cfg.solver_config();
    let n = problem.dim();
    let pair = run_paired(&problem, &x0, &solver_cfg, cfg.algorithm);

    let mut summary = ExperimentSummary::default();
    let mut table = format!(
        "algorithm,n,status,iterations,phi_star,wall_time_s,sigma,{}\n",
        io::KKT_HEADER
    );
    for (alg, r) in &pair {
        summary.runs.push(RunRecord::from_result(n, 0, *alg, r));
        match r {
            Ok(s) => {
                table.push_str(&format!(
                    "{alg},{n},{},{},{},{},{},{}\n",
                    s.status.name(),
                    s.iteration_count(),
                    real(s.phi_star),
                    real(s.solve_time),
                    real(problem.sigma()),
                    io::kkt_row(&s.kkt)
                ));
                let trace = output_path(&cfg.output_dir, &format!("solve_trace_{alg}.csv"));
                io::write_file(&trace, &io::trace_csv(&s.iterations))?;
                let xs = output_path(&cfg.output_dir, &format!("solve_x_{alg}.txt"));
                io::write_file(&xs, &io::format_vector(&s.x_star))?;
                summary.files.extend([trace, xs]);
            }
            Err(e) => table.push_str(&format!("{alg},{n},error,0,nan,nan,nan,nan,nan,nan,\"{e}\"\n")),
        }
    }
    let path = output_path(&cfg.output_dir, "solve_summary.csv");
    io::write_file(&path, &table)?;
    summary.files.push(path);
    summary.sizes.push(summarize(n, &[pair]));
    Ok(summary)
}

pub const RUNS_HEADER: &str = "experiment,n,start,algorithm,mu,status,iterations,phi_star,wall_time_s,stationarity,complementarity,feasibility,error";
pub const SUMMARY_HEADER: &str = "experiment,n,n_starts,median_ratio,mean_ratio,min_ratio,max_ratio,median_time_dca_s,median_time_bdca_s,median_rel_gap,min_phi_dca,min_phi_bdca";
pub const RATIOS_HEADER: &str = "experiment,n,start,ratio";
pub const VERDICT_HEADER: &str =
    "matrix_id,n,mu,algorithm,n_starts,verdict,witness_phi,wall_time_s,iterations_total";

fn write_tables(cfg: &ExperimentConfig, summary: &mut ExperimentSummary) -> Result<(), ExperimentError> {
    let kind = cfg.experiment.name();
    let mu = match cfg.experiment {
        ExperimentKind::TrSubproblem => String::new(),
        _ => real(cfg.mu()),
    };

    let mut runs = format!("{RUNS_HEADER}\n");
    for r in &summary.runs {
        runs.push_str(&format!(
            "{kind},{},{},{},{mu},{},{},{},{},{},{},{},{}\n",
            r.n,
            r.start,
            r.algorithm,
            r.status,
            r.iterations,
            real(r.phi_star),
            real(r.wall_time_s),
            real(r.stationarity),
            real(r.complementarity),
            real(r.feasibility),
            r.error.as_deref().unwrap_or("").replace(',', ";")
        ));
    }

    let mut sizes = format!("{SUMMARY_HEADER}\n");
    let mut ratios = format!("{RATIOS_HEADER}\n");
    for s in &summary.sizes {
        let lo = s.ratios.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = s.ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        sizes.push_str(&format!(
            "{kind},{},{},{},{},{},{},{},{},{},{},{}\n",
            s.n,
            s.n_starts,
            real(s.median_ratio),
            real(s.mean_ratio),
            real(lo),
            real(hi),
            real(s.median_time_dca),
            real(s.median_time_bdca),
            real(s.median_rel_gap),
            real(s.min_phi_dca),
            real(s.min_phi_bdca)
        ));
        for (i, r) in s.ratios.iter().enumerate() {
            ratios.push_str(&format!("{kind},{},{i},{}\n", s.n, real(*r)));
        }
    }

    let mut tables = vec![("runs.csv", runs), ("summary.csv", sizes), ("ratios.csv", ratios)];
    if !summary.verdicts.is_empty() {
        let mut v = format!("{VERDICT_HEADER}\n");
        for row in &summary.verdicts {
            v.push_str(&format!(
                "{},{},{},{},{},{},{},{},{}\n",
                row.matrix_id,
                row.n,
                real(row.mu),
                row.algorithm,
                row.n_starts,
                row.verdict,
                row.witness_phi.map(real).unwrap_or_default(),
                real(row.wall_time_s),
                row.iterations_total
            ));
        }
        tables.push(("verdicts.csv", v));
    }
    for (name, body) in tables {
        let path = output_path(&cfg.output_dir, name);
        io::write_file(&path, &body)?;
        summary.files.push(path);
    }
    Ok(())
}
