//! Quadratic DC programs `min ½⟨Qx,x⟩ + ⟨q,x⟩` over a polyhedron, split as
//! `g(x) = σ/2‖x‖² + ⟨q,x⟩` and `h(x) = ½⟨(σI − Q)x,x⟩`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::feasible::ConstraintSet;
use crate::linalg;

/// Default relative margin used to place σ above the spectral estimate.
pub const DEFAULT_SIGMA_MARGIN: f64 = 0.05;
pub const DEFAULT_LAMBDA_TOL: f64 = 1e-9;

const START_SEED: u64 = 0x00b1_dca5_eed0;

/// Dense symmetric matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymmetricMatrix {
    /// Builds from row-major entries, replacing `M` by `(M + Mᵀ)/2`.
    pub fn new(n: usize, mut data: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("matrix dimension must be ≥ 1".into()));
        }
        if data.len() != n * n {
            return Err(Error::DimensionMismatch {
                expected: n * n,
                found: data.len(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("matrix"));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let (a, b) = (data[i * n + j], data[j * n + i]);
                if a != b {
                    let m = 0.5 * (a + b);
                    data[i * n + j] = m;
                    data[j * n + i] = m;
                }
            }
        }
        Ok(Self { n, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for r in rows {
            if r.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Self::new(n, data)
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let data = (0..n * n).map(|k| f(k / n, k % n)).collect();
        Self::new(n, data)
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut data = vec![0.0; n * n];
        for (i, d) in diag.iter().enumerate() {
            data[i * n + i] = *d;
        }
        Self { n, data }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Entrywise scaling, used for the `Q = 2A` copositivity convention.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            n: self.n,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn matvec_into(&self, x: &[f64], out: &mut [f64]) {
        linalg::matvec(self.n, &self.data, x, out);
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        self.matvec_into(x, &mut out);
        out
    }

    /// `xᵀ M x`.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        linalg::dot(&self.matvec(x), x)
    }

    /// Gershgorin bound `max_i Σ_j |M_ij|` on the spectral radius.
    pub fn max_abs_row_sum(&self) -> f64 {
        self.data
            .chunks_exact(self.n)
            .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// Result of the shifted power iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralEstimate {
    pub value: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Estimates `λ_max(Q)` by power iteration on the positive semidefinite shift
/// `Q + cI`, where `c` is the absolute row-sum bound.
///
/// The start vector is fixed, so the estimate is a deterministic function of
/// `Q`. Iteration stops once successive Rayleigh quotients differ by at most
/// `tol·(1 + c)`.
pub fn estimate_lambda_max(q: &SymmetricMatrix, tol: f64, max_iter: usize) -> SpectralEstimate {
    let n = q.dim();
    let shift = q.max_abs_row_sum();
    if shift == 0.0 {
        return SpectralEstimate {
            value: 0.0,
            converged: true,
            iterations: 0,
        };
    }

    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED);
    let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let nv = linalg::norm(&v);
    v.iter_mut().for_each(|x| *x /= nv);

    let mut w = vec![0.0; n];
    let mut prev = f64::NEG_INFINITY;
    let mut theta = 0.0;
    let stop = tol * (1.0 + shift);
    for it in 1..=max_iter.max(1) {
        q.matvec_into(&v, &mut w);
        for (wi, vi) in w.iter_mut().zip(&v) {
            *wi += shift * vi;
        }
        // v is unit, so vᵀ(Q + cI)v is the Rayleigh quotient.
        theta = linalg::dot(&w, &v);
        let nw = linalg::norm(&w);
        if nw == 0.0 {
            // v lies in the kernel of Q + cI, so λ_max(Q) = -c.
            return SpectralEstimate {
                value: -shift,
                converged: true,
                iterations: it,
            };
        }
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / nw;
        }
        if (theta - prev).abs() <= stop {
            return SpectralEstimate {
                value: theta - shift,
                converged: true,
                iterations: it,
            };
        }
        prev = theta;
    }
    SpectralEstimate {
        value: theta - shift,
        converged: false,
        iterations: max_iter,
    }
}

/// Quadratic DC program with its `σ`/`ρ` splitting.
#[derive(Debug, Clone)]
pub struct QuadraticDcProblem {
    q_mat: SymmetricMatrix,
    q: Vec<f64>,
    constraints: ConstraintSet,
    sigma: f64,
    rho: f64,
    lambda_max_estimate: f64,
    lambda_converged: bool,
}

impl QuadraticDcProblem {
    /// Estimates `λ_max(Q)` and sets `σ = max(0, λ̂) + max(margin·|λ̂|, margin)`.
    pub fn build(
        q_mat: SymmetricMatrix,
        q: Vec<f64>,
        constraints: ConstraintSet,
        sigma_margin: f64,
    ) -> Result<Self> {
        if !(sigma_margin > 0.0 && sigma_margin.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "sigma margin must be positive, got {sigma_margin}"
            )));
        }
        let n = q_mat.dim();
        let est = estimate_lambda_max(&q_mat, DEFAULT_LAMBDA_TOL, 10 * n.max(10));
        let lam = est.value;
        let sigma = lam.max(0.0) + (sigma_margin * lam.abs()).max(sigma_margin);
        let mut p = Self::with_sigma(q_mat, q, constraints, sigma, lam)?;
        p.lambda_converged = est.converged;
        Ok(p)
    }

    /// Uses a caller-chosen `σ`; `lambda_max` must be the (estimated) largest
    /// eigenvalue of `Q`.
    pub fn with_sigma(
        q_mat: SymmetricMatrix,
        q: Vec<f64>,
        constraints: ConstraintSet,
        sigma: f64,
        lambda_max: f64,
    ) -> Result<Self> {
        let n = q_mat.dim();
        if q.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: q.len(),
            });
        }
        if constraints.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: constraints.dim(),
            });
        }
        if q.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("linear term"));
        }
        if !(sigma.is_finite() && sigma > lambda_max.max(0.0)) {
            return Err(Error::InvalidParameter(format!(
                "sigma = {sigma} must exceed max(0, λ_max = {lambda_max})"
            )));
        }
        let rho = sigma.min(sigma - lambda_max);
        Ok(Self {
            q_mat,
            q,
            constraints,
            sigma,
            rho,
            lambda_max_estimate: lambda_max,
            lambda_converged: true,
        })
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }
    pub fn matrix(&self) -> &SymmetricMatrix {
        &self.q_mat
    }
    pub fn linear(&self) -> &[f64] {
        &self.q
    }
    pub fn constraints(&self) -> &ConstraintSet {
        &self.constraints
    }
    pub fn sigma(&self) -> f64 {
        self.sigma
    }
    pub fn rho(&self) -> f64 {
        self.rho
    }
    pub fn lambda_max_estimate(&self) -> f64 {
        self.lambda_max_estimate
    }
    /// Whether the power iteration met its tolerance within the cap.
    pub fn lambda_converged(&self) -> bool {
        self.lambda_converged
    }

    fn check_dim(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        Ok(())
    }

    /// `φ(x) = ½xᵀQx + qᵀx`.
    pub fn phi_value(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        Ok(0.5 * self.q_mat.quad_form(x) + linalg::dot(&self.q, x))
    }

    /// `φ` given a precomputed `Qx`.
    #[inline]
    pub(crate) fn phi_with_qx(&self, x: &[f64], qx: &[f64]) -> f64 {
        0.5 * linalg::dot(qx, x) + linalg::dot(&self.q, x)
    }

    pub fn g_value(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        Ok(0.5 * self.sigma * linalg::norm_sq(x) + linalg::dot(&self.q, x))
    }

    pub fn h_value(&self, x: &[f64]) -> Result<f64> {
        self.check_dim(x)?;
        Ok(0.5 * (self.sigma * linalg::norm_sq(x) - self.q_mat.quad_form(x)))
    }

    /// `∇g(x) = σx + q`.
    pub fn grad_g(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        Ok(x.iter().zip(&self.q).map(|(xi, qi)| self.sigma * xi + qi).collect())
    }

    /// `∇h(x) = (σI − Q)x`.
    pub fn grad_h(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        let qx = self.q_mat.matvec(x);
        Ok(x.iter().zip(&qx).map(|(xi, v)| self.sigma * xi - v).collect())
    }

    /// `∇φ(x) = Qx + q`.
    pub fn grad_phi(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(x)?;
        let mut r = self.q_mat.matvec(x);
        r.iter_mut().zip(&self.q).for_each(|(a, b)| *a += b);
        Ok(r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum StepRule {
    /// Self-adaptive trial step (grow by γ after two direct acceptances).
    #[default]
    Adaptive,
    /// `λ̄_k = λ̄_0` at every iteration.
    Constant,
}

/// Line-search and stopping parameters shared by DCA and BDCA.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub alpha: f64,
    pub beta: f64,
    pub lambda_bar_0: f64,
    pub gamma: f64,
    pub step_rule: StepRule,
    pub d_tol: f64,
    pub max_iter: usize,
    pub active_tol: f64,
    pub max_backtracks: usize,
    /// Stop as soon as `φ(x_k) < objective_stop`.
    pub objective_stop: Option<f64>,
    /// Keep every `(x_k, y_k)` pair in the result; memory grows with `n·k`.
    pub keep_points: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            alpha: 0.01,
            beta: 0.1,
            lambda_bar_0: 1.0,
            gamma: 2.0,
            step_rule: StepRule::Adaptive,
            d_tol: 1e-9,
            max_iter: 1_000_000,
            active_tol: 1e-8,
            max_backtracks: 50,
            objective_stop: None,
            keep_points: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(what.to_string()));
        if !(self.alpha > 0.0) {
            return bad("alpha must be > 0");
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return bad("beta must lie in ]0,1[");
        }
        if !(self.lambda_bar_0 >= 0.0 && self.lambda_bar_0.is_finite()) {
            return bad("lambda_bar_0 must be a finite nonnegative number");
        }
        if !(self.gamma > 1.0) {
            return bad("gamma must be > 1");
        }
        if !(self.d_tol > 0.0) {
            return bad("d_tol must be > 0");
        }
        if !(self.active_tol > 0.0) {
            return bad("active_tol must be > 0");
        }
        Ok(())
    }
}
