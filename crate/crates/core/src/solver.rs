//! DCA and BDCA drivers for [`QuadraticDcProblem`].
//!
//! For the quadratic splitting the DCA subproblem is a projected gradient step
//! `y_k = P_F(x_k − (Qx_k + q)/σ)`. BDCA then searches along `d_k = y_k − x_k`
//! from `y_k` whenever `d_k` is feasible there.
//!
//! Both drivers cost one product with `Q` per iteration, plus one more per
//! BDCA iteration that takes a positive step.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kkt::{self, KktReport};
use crate::linalg;
use crate::model::{QuadraticDcProblem, SolverConfig, StepRule};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Dca,
    Bdca,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Dca => "dca",
            Algorithm::Bdca => "bdca",
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dca" => Ok(Algorithm::Dca),
            "bdca" => Ok(Algorithm::Bdca),
            other => Err(Error::InvalidParameter(format!("unknown algorithm '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    /// `‖d_k‖ ≤ d_tol`.
    DTolReached,
    ObjectiveStopReached,
    MaxIterReached,
    /// `d_k == 0` exactly.
    StationaryExact,
}

impl Status {
    pub fn name(self) -> &'static str {
        match self {
            Status::DTolReached => "d_tol",
            Status::ObjectiveStopReached => "objective_stop",
            Status::MaxIterReached => "max_iter",
            Status::StationaryExact => "stationary",
        }
    }
}

/// One row of the iteration trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationRecord {
    pub k: usize,
    pub phi_x: f64,
    pub phi_y: f64,
    pub d_norm: f64,
    pub lambda_k: f64,
    pub trial_lambda: f64,
    pub backtracks: usize,
    pub direction_feasible: bool,
    /// Cumulative wall-clock seconds since the run started.
    pub elapsed: f64,
}

impl IterationRecord {
    /// Equality of the iterate columns (`k`, objectives, `‖d_k‖`, `λ_k`),
    /// compared bitwise.
    pub fn same_iterate(&self, other: &Self) -> bool {
        self.k == other.k
            && self.phi_x.to_bits() == other.phi_x.to_bits()
            && self.phi_y.to_bits() == other.phi_y.to_bits()
            && self.d_norm.to_bits() == other.d_norm.to_bits()
            && self.lambda_k.to_bits() == other.lambda_k.to_bits()
    }
}

/// Bookkeeping for the self-adaptive trial step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSizeState {
    pub last_accepted_positive: f64,
    pub consecutive_unbacktracked: usize,
    pub ever_searched: bool,
}

impl StepSizeState {
    pub fn new(cfg: &SolverConfig) -> Self {
        Self {
            last_accepted_positive: cfg.lambda_bar_0,
            consecutive_unbacktracked: 0,
            ever_searched: false,
        }
    }

    /// Records the outcome of one line search. A step counts as directly
    /// accepted only if neither backtracking nor the feasibility cap reduced
    /// it below the trial value.
    pub fn record(&mut self, trial: f64, accepted: f64, backtracks: usize) {
        self.ever_searched = true;
        if accepted > 0.0 {
            self.last_accepted_positive = accepted;
        }
        if backtracks == 0 && accepted > 0.0 && accepted >= trial {
            self.consecutive_unbacktracked += 1;
        } else {
            self.consecutive_unbacktracked = 0;
        }
    }
}

/// `(x_k, y_k)` for one iteration, kept when [`SolverConfig::keep_points`] is set.
#[derive(Debug, Clone, PartialEq)]
pub struct IteratePair {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub algorithm: Algorithm,
    pub x_star: Vec<f64>,
    pub phi_star: f64,
    pub status: Status,
    pub iterations: Vec<IterationRecord>,
    pub kkt: KktReport,
    /// `∇h` at the last iterate that entered a subproblem.
    pub u_final: Vec<f64>,
    /// Seconds spent iterating, excluding the final KKT check.
    pub solve_time: f64,
    pub points: Option<Vec<IteratePair>>,
}

impl SolveResult {
    pub fn kkt_residual(&self) -> f64 {
        self.kkt.stationarity_residual
    }
    pub fn iteration_count(&self) -> usize {
        self.iterations.len()
    }
}

/// Self-adaptive trial step: `λ̄_0` until the first search, `γ·λ_last` after
/// two direct acceptances, `λ_last` otherwise.
pub fn adaptive_trial_step(state: &StepSizeState, cfg: &SolverConfig) -> f64 {
    if cfg.step_rule == StepRule::Constant || !state.ever_searched {
        cfg.lambda_bar_0
    } else if state.consecutive_unbacktracked >= 2 {
        cfg.gamma * state.last_accepted_positive
    } else {
        state.last_accepted_positive
    }
}

/// Armijo-type backtracking on `λ ↦ φ(y + λd) − φ(y) ≤ −αλ²‖d‖²`, where
/// `increase(λ)` returns the left-hand side.
fn backtrack(
    lambda_init: f64,
    d_norm_sq: f64,
    cfg: &SolverConfig,
    increase: impl Fn(f64) -> f64,
) -> (f64, usize) {
    if !(lambda_init > 0.0) || d_norm_sq == 0.0 {
        return (0.0, 0);
    }
    let mut lambda = lambda_init;
    for backtracks in 0..=cfg.max_backtracks {
        if increase(lambda) <= -cfg.alpha * lambda * lambda * d_norm_sq {
            return (lambda, backtracks);
        }
        lambda *= cfg.beta;
    }
    (0.0, cfg.max_backtracks)
}

/// Backtracking line search from `y_k` along `d_k`, evaluating `φ` directly.
///
/// The caller must ensure `y_k + lambda_init·d_k` is feasible. Returns `(0, _)`
/// when `lambda_init == 0` or no step passes within `max_backtracks`
/// reductions.
pub fn line_search(
    p: &QuadraticDcProblem,
    y_k: &[f64],
    d_k: &[f64],
    lambda_init: f64,
    cfg: &SolverConfig,
) -> Result<(f64, usize)> {
    let phi_y = p.phi_value(y_k)?;
    if d_k.len() != y_k.len() {
        return Err(Error::DimensionMismatch {
            expected: y_k.len(),
            found: d_k.len(),
        });
    }
    let res = backtrack(lambda_init, linalg::norm_sq(d_k), cfg, |lam| {
        let pt: Vec<f64> = y_k.iter().zip(d_k).map(|(y, d)| y + lam * d).collect();
        p.phi_value(&pt).map_or(f64::INFINITY, |v| v - phi_y)
    });
    Ok(res)
}

/// One DCA step: `y_k = P_F((u_k − q)/σ)` with `u_k = (σI − Q)x_k`.
pub fn dca_step(p: &QuadraticDcProblem, x_k: &[f64]) -> Result<Vec<f64>> {
    let u = p.grad_h(x_k)?;
    let z: Vec<f64> = u
        .iter()
        .zip(p.linear())
        .map(|(ui, qi)| (ui - qi) / p.sigma())
        .collect();
    p.constraints().project(&z)
}

/// The DCA step given a cached `Qx_k`; also returns `u_k`.
fn dca_step_cached(p: &QuadraticDcProblem, x: &[f64], qx: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let sigma = p.sigma();
    let u: Vec<f64> = x.iter().zip(qx).map(|(xi, v)| sigma * xi - v).collect();
    let z: Vec<f64> = u
        .iter()
        .zip(p.linear())
        .map(|(ui, qi)| (ui - qi) / sigma)
        .collect();
    Ok((p.constraints().project(&z)?, u))
}

fn check_start(p: &QuadraticDcProblem, x_0: &[f64], cfg: &SolverConfig) -> Result<()> {
    cfg.validate()?;
    if x_0.len() != p.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: x_0.len(),
        });
    }
    if !p.constraints().contains(x_0, cfg.active_tol) {
        return Err(Error::Infeasible {
            violation: p.constraints().max_violation(x_0),
        });
    }
    Ok(())
}

fn objective_hit(cfg: &SolverConfig, phi: f64) -> bool {
    cfg.objective_stop.is_some_and(|t| phi < t)
}

struct Finish {
    x: Vec<f64>,
    phi: f64,
    status: Status,
    u: Vec<f64>,
}

fn finish(
    p: &QuadraticDcProblem,
    algorithm: Algorithm,
    cfg: &SolverConfig,
    end: Finish,
    iterations: Vec<IterationRecord>,
    points: Option<Vec<IteratePair>>,
    solve_time: f64,
) -> Result<SolveResult> {
    let kkt = kkt::kkt_residual(p, &end.x, cfg.active_tol)?;
    Ok(SolveResult {
        algorithm,
        x_star: end.x,
        phi_star: end.phi,
        status: end.status,
        iterations,
        kkt,
        u_final: end.u,
        solve_time,
        points,
    })
}

/// Classical DCA: `x_{k+1} = P_F(x_k − (Qx_k + q)/σ)`.
///
/// On `DTolReached` the returned point is the last subproblem solution.
pub fn run_dca(p: &QuadraticDcProblem, x_0: &[f64], cfg: &SolverConfig) -> Result<SolveResult> {
    check_start(p, x_0, cfg)?;
    let start = Instant::now();
    let mut x = x_0.to_vec();
    let mut qx = p.matrix().matvec(&x);
    let mut phi_x = p.phi_with_qx(&x, &qx);
    let mut trace = Vec::new();
    let mut points = cfg.keep_points.then(Vec::new);
    let mut u_last = vec![0.0; p.dim()];

    if objective_hit(cfg, phi_x) {
        let end = Finish { x, phi: phi_x, status: Status::ObjectiveStopReached, u: u_last };
        return finish(p, Algorithm::Dca, cfg, end, trace, points, 0.0);
    }

    for k in 0..cfg.max_iter {
        let (y, u) = dca_step_cached(p, &x, &qx)?;
        let qy = p.matrix().matvec(&y);
        let phi_y = p.phi_with_qx(&y, &qy);
        let d_norm = linalg::dist(&y, &x);
        trace.push(IterationRecord {
            k,
            phi_x,
            phi_y,
            d_norm,
            lambda_k: 0.0,
            trial_lambda: 0.0,
            backtracks: 0,
            direction_feasible: false,
            elapsed: start.elapsed().as_secs_f64(),
        });
        if let Some(pts) = points.as_mut() {
            pts.push(IteratePair { x: x.clone(), y: y.clone() });
        }
        u_last = u;
        if d_norm == 0.0 {
            let t = start.elapsed().as_secs_f64();
            let end = Finish { x, phi: phi_x, status: Status::StationaryExact, u: u_last };
            return finish(p, Algorithm::Dca, cfg, end, trace, points, t);
        }
        x = y;
        qx = qy;
        phi_x = phi_y;
        let status = if objective_hit(cfg, phi_x) {
            Some(Status::ObjectiveStopReached)
        } else if d_norm <= cfg.d_tol {
            Some(Status::DTolReached)
        } else {
            None
        };
        if let Some(status) = status {
            let t = start.elapsed().as_secs_f64();
            let end = Finish { x, phi: phi_x, status, u: u_last };
            return finish(p, Algorithm::Dca, cfg, end, trace, points, t);
        }
    }
    let t = start.elapsed().as_secs_f64();
    let end = Finish { x, phi: phi_x, status: Status::MaxIterReached, u: u_last };
    finish(p, Algorithm::Dca, cfg, end, trace, points, t)
}

/// Boosted DCA with the feasible-direction gate and self-adaptive trial step.
///
/// The trial step is capped in closed form by the ratio test before
/// backtracking. On `DTolReached` the returned point is the last subproblem
/// solution `y_k`, whose KKT residual is bounded by `‖σI − Q‖·d_tol`.
pub fn run_bdca(p: &QuadraticDcProblem, x_0: &[f64], cfg: &SolverConfig) -> Result<SolveResult> {
    check_start(p, x_0, cfg)?;
    let start = Instant::now();
    let cons = p.constraints();
    let mut x = x_0.to_vec();
    let mut qx = p.matrix().matvec(&x);
    let mut phi_x = p.phi_with_qx(&x, &qx);
    let mut trace = Vec::new();
    let mut points = cfg.keep_points.then(Vec::new);
    let mut u_last = vec![0.0; p.dim()];
    let mut steps = StepSizeState::new(cfg);

    if objective_hit(cfg, phi_x) {
        let end = Finish { x, phi: phi_x, status: Status::ObjectiveStopReached, u: u_last };
        return finish(p, Algorithm::Bdca, cfg, end, trace, points, 0.0);
    }

    for k in 0..cfg.max_iter {
        let (y, u) = dca_step_cached(p, &x, &qx)?;
        let qy = p.matrix().matvec(&y);
        let phi_y = p.phi_with_qx(&y, &qy);
        let d = linalg::sub(&y, &x);
        let d_norm_sq = linalg::norm_sq(&d);
        let d_norm = d_norm_sq.sqrt();
        if let Some(pts) = points.as_mut() {
            pts.push(IteratePair { x: x.clone(), y: y.clone() });
        }
        u_last = u;

        if d_norm == 0.0 {
            trace.push(IterationRecord {
                k,
                phi_x,
                phi_y,
                d_norm,
                lambda_k: 0.0,
                trial_lambda: 0.0,
                backtracks: 0,
                direction_feasible: true,
                elapsed: start.elapsed().as_secs_f64(),
            });
            let t = start.elapsed().as_secs_f64();
            let end = Finish { x, phi: phi_x, status: Status::StationaryExact, u: u_last };
            return finish(p, Algorithm::Bdca, cfg, end, trace, points, t);
        }

        let feasible = cons.is_feasible_direction(&x, &y, cfg.active_tol)?;
        let (mut lambda, mut trial, mut backtracks) = (0.0, 0.0, 0);
        if feasible {
            trial = adaptive_trial_step(&steps, cfg);
            let capped = trial.min(cons.max_feasible_step(&y, &d));
            if capped > 0.0 {
                // φ(y + λd) − φ(y) = λ⟨Qy + q, d⟩ + ½λ²⟨Qd, d⟩ with Qd = Qy − Qx.
                let slope: f64 = qy
                    .iter()
                    .zip(p.linear())
                    .zip(&d)
                    .map(|((a, b), di)| (a + b) * di)
                    .sum();
                let curv: f64 = qy.iter().zip(&qx).zip(&d).map(|((a, b), di)| (a - b) * di).sum();
                let (lam, bt) = backtrack(capped, d_norm_sq, cfg, |l| l * slope + 0.5 * l * l * curv);
                lambda = lam;
                backtracks = bt;
            }
            steps.record(trial, lambda, backtracks);
        }

        trace.push(IterationRecord {
            k,
            phi_x,
            phi_y,
            d_norm,
            lambda_k: lambda,
            trial_lambda: trial,
            backtracks,
            direction_feasible: feasible,
            elapsed: start.elapsed().as_secs_f64(),
        });

        let stop_on_d = d_norm <= cfg.d_tol;
        let y_copy = if stop_on_d { Some((y.clone(), phi_y)) } else { None };
        if lambda > 0.0 {
            x = y.iter().zip(&d).map(|(yi, di)| yi + lambda * di).collect();
            p.matrix().matvec_into(&x, &mut qx);
            phi_x = p.phi_with_qx(&x, &qx);
        } else {
            x = y;
            qx = qy;
            phi_x = phi_y;
        }

        if objective_hit(cfg, phi_x) {
            let t = start.elapsed().as_secs_f64();
            let end = Finish { x, phi: phi_x, status: Status::ObjectiveStopReached, u: u_last };
            return finish(p, Algorithm::Bdca, cfg, end, trace, points, t);
        }
        if let Some((yk, phi_yk)) = y_copy {
            let t = start.elapsed().as_secs_f64();
            let end = Finish { x: yk, phi: phi_yk, status: Status::DTolReached, u: u_last };
            return finish(p, Algorithm::Bdca, cfg, end, trace, points, t);
        }
    }
    let t = start.elapsed().as_secs_f64();
    let end = Finish { x, phi: phi_x, status: Status::MaxIterReached, u: u_last };
    finish(p, Algorithm::Bdca, cfg, end, trace, points, t)
}

/// Dispatches to [`run_dca`] or [`run_bdca`].
pub fn solve(
    p: &QuadraticDcProblem,
    x_0: &[f64],
    cfg: &SolverConfig,
    algorithm: Algorithm,
) -> Result<SolveResult> {
    match algorithm {
        Algorithm::Dca => run_dca(p, x_0, cfg),
        Algorithm::Bdca => run_bdca(p, x_0, cfg),
    }
}
