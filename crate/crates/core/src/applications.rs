//! Copositivity testing on Horn-type matrices and random ℓ∞-trust-region
//! subproblems.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::feasible::ConstraintSet;
use crate::model::{QuadraticDcProblem, SolverConfig, SymmetricMatrix, DEFAULT_SIGMA_MARGIN};
use crate::par;
use crate::solver::{self, Algorithm, SolveResult, Status};

/// Mixes a base seed with a stream index (splitmix64 finalizer).
pub fn stream_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform draw on the open interval `]lo, hi[`.
fn open_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    loop {
        let v = rng.random_range(lo..hi);
        if v > lo {
            return v;
        }
    }
}

/// Adjacency matrix of the cycle graph on `n ≥ 3` nodes.
pub fn cycle_adjacency(n: usize) -> Result<SymmetricMatrix> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("cycle needs n ≥ 3, got {n}")));
    }
    SymmetricMatrix::from_fn(n, |i, j| {
        let gap = i.abs_diff(j);
        if gap == 1 || gap == n - 1 {
            1.0
        } else {
            0.0
        }
    })
}

/// `μ(E − A_cycle) − E`; the Horn matrix `H_n` at `μ = 2`.
pub fn horn_family(n: usize, mu: f64) -> Result<SymmetricMatrix> {
    if !mu.is_finite() {
        return Err(Error::NonFinite("mu"));
    }
    let adj = cycle_adjacency(n)?;
    SymmetricMatrix::from_fn(n, |i, j| mu * (1.0 - adj.get(i, j)) - 1.0)
}

/// Uniform sample from `{x ≥ 0, ‖x‖ ≤ 1}`.
pub fn random_orthant_ball_start(n: usize, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    loop {
        let mut s: Vec<f64> = (0..n)
            .map(|_| r.sample::<f64, _>(StandardNormal).abs())
            .collect();
        let norm = crate::linalg::norm(&s);
        if norm == 0.0 || !norm.is_finite() {
            continue;
        }
        let radius = open_uniform(&mut r, 0.0, 1.0).powf(1.0 / n as f64);
        s.iter_mut().for_each(|v| *v *= radius / norm);
        return s;
    }
}

/// `min ⟨Ax,x⟩` over the orthant, written as `½⟨Qx,x⟩` with `Q = 2A`.
pub fn copositivity_problem(a: &SymmetricMatrix) -> Result<QuadraticDcProblem> {
    let n = a.dim();
    QuadraticDcProblem::build(
        a.scaled(2.0),
        vec![0.0; n],
        ConstraintSet::orthant(n),
        DEFAULT_SIGMA_MARGIN,
    )
}

/// Solver defaults for copositivity runs: stop at `‖d_k‖ ≤ 1e-9`.
pub fn copositivity_config() -> SolverConfig {
    SolverConfig {
        d_tol: 1e-9,
        ..SolverConfig::default()
    }
}

/// `⟨Ax,x⟩` by a plain double loop, independent of the solver kernels.
pub fn quadratic_form_direct(a: &SymmetricMatrix, x: &[f64]) -> f64 {
    let n = a.dim();
    let mut s = 0.0;
    for i in 0..n {
        let mut row = 0.0;
        for j in 0..n {
            row += a.get(i, j) * x[j];
        }
        s += x[i] * row;
    }
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictTag {
    NonCopositive,
    Undecided,
}

impl VerdictTag {
    pub fn name(self) -> &'static str {
        match self {
            VerdictTag::NonCopositive => "non_copositive",
            VerdictTag::Undecided => "undecided",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriticalPoint {
    pub start: usize,
    pub x: Vec<f64>,
    pub phi: f64,
    pub kkt_residual: f64,
    pub status: Status,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CopositivityVerdict {
    pub tag: VerdictTag,
    /// Present iff `tag == NonCopositive`; `⟨A w, w⟩ < 0` re-verified directly.
    pub witness: Option<Vec<f64>>,
    pub witness_phi: Option<f64>,
    /// Index of the start that produced the witness.
    pub witness_start: Option<usize>,
    pub critical_points: Vec<CriticalPoint>,
}

impl CopositivityVerdict {
    /// Picks the first start (by index) whose terminal point is a verified
    /// negative witness; every terminal point is kept as a critical point.
    pub fn from_runs(a: &SymmetricMatrix, runs: &[SolveResult], threshold: f64) -> Self {
        let mut verdict = Self {
            tag: VerdictTag::Undecided,
            witness: None,
            witness_phi: None,
            witness_start: None,
            critical_points: Vec::with_capacity(runs.len()),
        };
        for (start, run) in runs.iter().enumerate() {
            if verdict.witness.is_none()
                && run.status == Status::ObjectiveStopReached
                && run.phi_star < threshold
            {
                let direct = quadratic_form_direct(a, &run.x_star);
                if direct < 0.0 && run.x_star.iter().all(|v| *v >= 0.0) {
                    verdict.tag = VerdictTag::NonCopositive;
                    verdict.witness = Some(run.x_star.clone());
                    verdict.witness_phi = Some(direct);
                    verdict.witness_start = Some(start);
                }
            }
            verdict.critical_points.push(CriticalPoint {
                start,
                x: run.x_star.clone(),
                phi: run.phi_star,
                kkt_residual: run.kkt_residual(),
                status: run.status,
            });
        }
        verdict
    }

    pub fn min_phi(&self) -> f64 {
        self.critical_points
            .iter()
            .map(|c| c.phi)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Multi-start heuristic: a start that reaches `φ < threshold` proves `A` is
/// not copositive; otherwise the instance stays undecided.
///
/// `cfg.objective_stop` defaults to `0` (strict), the stop used to detect any
/// negative value.
pub fn test_copositivity(
    a: &SymmetricMatrix,
    n_starts: usize,
    cfg: &SolverConfig,
    algorithm: Algorithm,
    seed: u64,
) -> Result<CopositivityVerdict> {
    let problem = copositivity_problem(a)?;
    let mut cfg = cfg.clone();
    let threshold = *cfg.objective_stop.get_or_insert(0.0);
    let n = a.dim();
    let runs: Result<Vec<SolveResult>> = par::map_indexed(n_starts, |i| {
        let x0 = random_orthant_ball_start(n, stream_seed(seed, i as u64));
        solver::solve(&problem, &x0, &cfg, algorithm)
    })
    .into_iter()
    .collect();
    Ok(CopositivityVerdict::from_runs(a, &runs?, threshold))
}

/// Random `ℓ∞`-trust-region subproblem `min ½⟨Ax,x⟩ + ⟨b,x⟩, ‖x‖∞ ≤ r`.
#[derive(Debug, Clone, PartialEq)]
pub struct TrInstance {
    pub a: SymmetricMatrix,
    pub b: Vec<f64>,
    pub r: f64,
    pub seed: u64,
}

impl TrInstance {
    pub fn dim(&self) -> usize {
        self.b.len()
    }

    pub fn constraints(&self) -> ConstraintSet {
        ConstraintSet::cube(self.dim(), -self.r, self.r).expect("radius is positive")
    }

    pub fn problem(&self) -> Result<QuadraticDcProblem> {
        QuadraticDcProblem::build(
            self.a.clone(),
            self.b.clone(),
            self.constraints(),
            DEFAULT_SIGMA_MARGIN,
        )
    }

    /// Uniform start in `[−r, r]ⁿ`.
    pub fn random_start(&self, seed: u64) -> Vec<f64> {
        let mut g = rng(seed);
        (0..self.dim())
            .map(|_| g.random_range(-self.r..=self.r))
            .collect()
    }
}

/// `A` from symmetrized i.i.d. `U]−1,1[` entries, `b ~ U]−1,1[ⁿ`,
/// `r ~ U]0,√n[`.
pub fn random_tr_instance(n: usize, seed: u64) -> Result<TrInstance> {
    if n == 0 {
        return Err(Error::InvalidParameter("trust-region dimension must be ≥ 1".into()));
    }
    let mut g = rng(seed);
    let raw: Vec<f64> = (0..n * n).map(|_| open_uniform(&mut g, -1.0, 1.0)).collect();
    let a = SymmetricMatrix::new(n, raw)?;
    let b = (0..n).map(|_| open_uniform(&mut g, -1.0, 1.0)).collect();
    let r = open_uniform(&mut g, 0.0, (n as f64).sqrt());
    Ok(TrInstance { a, b, r, seed })
}

/// Solver defaults for trust-region runs: `γ = 4`, stop at `‖d_k‖ ≤ 1e-8`.
pub fn tr_config() -> SolverConfig {
    SolverConfig {
        gamma: 4.0,
        d_tol: 1e-8,
        ..SolverConfig::default()
    }
}

pub fn solve_tr(
    inst: &TrInstance,
    x_0: &[f64],
    cfg: &SolverConfig,
    algorithm: Algorithm,
) -> Result<SolveResult> {
    if x_0.len() != inst.dim() {
        return Err(Error::DimensionMismatch {
            expected: inst.dim(),
            found: x_0.len(),
        });
    }
    if crate::linalg::norm_inf(x_0) > inst.r * (1.0 + cfg.active_tol) {
        return Err(Error::Infeasible {
            violation: crate::linalg::norm_inf(x_0) - inst.r,
        });
    }
    solver::solve(&inst.problem()?, x_0, cfg, algorithm)
}
