//! KKT verification with multiplier recovery on the active set.

use nalgebra::{DMatrix, DVector};

use crate::error::Result;
use crate::feasible::ConstraintId;
use crate::linalg;
use crate::model::QuadraticDcProblem;

pub const NNLS_MAX_ITER: usize = 10_000;
pub const NNLS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct KktReport {
    /// `‖Qx + q + Σ μ_i a_i‖` at the recovered multipliers.
    pub stationarity_residual: f64,
    /// `max_i |μ_i(⟨a_i,x⟩ − b_i)|`.
    pub complementarity_residual: f64,
    /// `max_i max(0, ⟨a_i,x⟩ − b_i)`.
    pub feasibility_violation: f64,
    /// Multipliers of the active constraints; every other multiplier is zero.
    pub multipliers: Vec<(ConstraintId, f64)>,
}

impl KktReport {
    /// `Lower(3):0.5;Upper(7):1.25` style encoding used in summary CSVs.
    pub fn multipliers_joined(&self) -> String {
        self.multipliers
            .iter()
            .map(|(id, m)| format!("{}:{m:e}", id_label(*id)))
            .collect::<Vec<_>>()
            .join(";")
    }
}

pub fn id_label(id: ConstraintId) -> String {
    match id {
        ConstraintId::Lower(i) => format!("L{i}"),
        ConstraintId::Upper(i) => format!("U{i}"),
        ConstraintId::Sum => "S".into(),
        ConstraintId::Row(i) => format!("R{i}"),
    }
}

fn nnls_objective(gram: &[f64], c: &[f64], mu: &[f64]) -> f64 {
    let m = c.len();
    let mut g = vec![0.0; m];
    linalg::matvec_seq(m, gram, mu, &mut g);
    0.5 * linalg::dot(mu, &g) + linalg::dot(c, mu)
}

/// Solves `min_{μ ≥ 0} ½μᵀGμ + cᵀμ` (`G` row-major, `m × m`).
///
/// Accelerated projected gradient with step `1/L`, `L` the Gershgorin bound
/// of `G`, restarted whenever the momentum points uphill. The result is then
/// polished by solving `G_SS μ_S = −c_S` on its support `S`, kept only if it
/// stays nonnegative and lowers the objective.
pub fn nnls_projected_gradient(gram: &[f64], c: &[f64], max_iter: usize, tol: f64) -> Vec<f64> {
    let m = c.len();
    let mut mu = vec![0.0; m];
    if m == 0 {
        return mu;
    }
    let lip = gram
        .chunks_exact(m)
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    if lip == 0.0 {
        return mu;
    }
    let step = 1.0 / lip;
    let mut z = mu.clone();
    let mut t = 1.0f64;
    let mut grad = vec![0.0; m];
    for _ in 0..max_iter {
        linalg::matvec_seq(m, gram, &z, &mut grad);
        let next: Vec<f64> = (0..m).map(|i| (z[i] - step * (grad[i] + c[i])).max(0.0)).collect();
        let mut change = 0.0f64;
        let mut scale = 0.0f64;
        let mut uphill = 0.0;
        for i in 0..m {
            change = change.max((next[i] - mu[i]).abs());
            scale = scale.max(next[i].abs());
            uphill += (grad[i] + c[i]) * (next[i] - mu[i]);
        }
        let t_next = if uphill > 0.0 { 1.0 } else { 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt()) };
        let w = if uphill > 0.0 { 0.0 } else { (t - 1.0) / t_next };
        for i in 0..m {
            z[i] = next[i] + w * (next[i] - mu[i]);
        }
        mu = next;
        t = t_next;
        if change <= tol * (1.0 + scale) {
            break;
        }
    }
    if let Some(polished) = polish_on_support(gram, c, &mu) {
        if nnls_objective(gram, c, &polished) <= nnls_objective(gram, c, &mu) {
            return polished;
        }
    }
    mu
}

fn polish_on_support(gram: &[f64], c: &[f64], mu: &[f64]) -> Option<Vec<f64>> {
    let m = c.len();
    let support: Vec<usize> = (0..m).filter(|&i| mu[i] > 0.0).collect();
    if support.is_empty() {
        return None;
    }
    let k = support.len();
    let g = DMatrix::from_fn(k, k, |r, s| gram[support[r] * m + support[s]]);
    let rhs = DVector::from_iterator(k, support.iter().map(|&i| -c[i]));
    let sol = g.cholesky()?.solve(&rhs);
    if sol.iter().any(|v| !(*v >= 0.0)) {
        return None;
    }
    let mut out = vec![0.0; m];
    for (r, &i) in support.iter().enumerate() {
        out[i] = sol[r];
    }
    Some(out)
}

/// Measures how far `x` is from satisfying the KKT system
/// `Qx + q + Σ μ_i a_i = 0`, `μ ≥ 0`, `μ_i(⟨a_i,x⟩ − b_i) = 0`.
///
/// Multipliers are supported on the numerically active set only and are
/// found by nonnegative least squares.
pub fn kkt_residual(p: &QuadraticDcProblem, x: &[f64], active_tol: f64) -> Result<KktReport> {
    let cons = p.constraints();
    let active = cons.active_indices(x, active_tol)?;
    let r = p.grad_phi(x)?;
    let rows: Vec<_> = active
        .ids()
        .iter()
        .map(|id| cons.constraint(*id).expect("active id belongs to the set"))
        .collect();
    let m = rows.len();

    let mut gram = vec![0.0; m * m];
    for i in 0..m {
        for j in i..m {
            let v = rows[i].dot(&rows[j]);
            gram[i * m + j] = v;
            gram[j * m + i] = v;
        }
    }
    let c: Vec<f64> = rows.iter().map(|row| row.eval(&r)).collect();
    let mu = nnls_projected_gradient(&gram, &c, NNLS_MAX_ITER, NNLS_TOL);

    let mut resid = r;
    for (row, m_i) in rows.iter().zip(&mu) {
        for &(j, a) in &row.coeffs {
            resid[j] += m_i * a;
        }
    }
    let complementarity = rows
        .iter()
        .zip(&mu)
        .map(|(row, m_i)| (m_i * (row.eval(x) - row.rhs)).abs())
        .fold(0.0, f64::max);

    Ok(KktReport {
        stationarity_residual: linalg::norm(&resid),
        complementarity_residual: complementarity,
        feasibility_violation: cons.max_violation(x),
        multipliers: active.ids().iter().copied().zip(mu).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feasible::ConstraintSet;
    use crate::model::SymmetricMatrix;

    fn problem(q: SymmetricMatrix, lin: Vec<f64>, c: ConstraintSet) -> QuadraticDcProblem {
        QuadraticDcProblem::build(q, lin, c, 0.05).unwrap()
    }

    #[test]
    fn interior_minimum() {
        let p = problem(
            SymmetricMatrix::identity(2),
            vec![-0.5, 0.0],
            ConstraintSet::cube(2, -1.0, 1.0).unwrap(),
        );
        let rep = kkt_residual(&p, &[0.5, 0.0], 1e-8).unwrap();
        assert!(rep.stationarity_residual <= 1e-10);
        assert!(rep.multipliers.is_empty());
    }

    #[test]
    fn one_dimensional_orthant_multiplier() {
        // r = 2·0 + 1 = 1 and a = -1, so μ = 1 balances it.
        let p = problem(SymmetricMatrix::diagonal(&[2.0]), vec![1.0], ConstraintSet::orthant(1));
        let rep = kkt_residual(&p, &[0.0], 1e-8).unwrap();
        assert!(rep.stationarity_residual <= 1e-10);
        assert_eq!(rep.multipliers.len(), 1);
        assert!((rep.multipliers[0].1 - 1.0).abs() <= 1e-10);
        assert!(rep.complementarity_residual <= 1e-10);
    }

    #[test]
    fn non_kkt_point_reports_gradient_norm() {
        let p = problem(
            SymmetricMatrix::identity(2),
            vec![0.0, 0.0],
            ConstraintSet::cube(2, -1.0, 1.0).unwrap(),
        );
        let rep = kkt_residual(&p, &[0.5, 0.5], 1e-8).unwrap();
        assert!((rep.stationarity_residual - 0.5f64.hypot(0.5)).abs() < 1e-15);
    }

    #[test]
    fn wrong_sign_multiplier_is_clipped() {
        // Gradient points into the set at an active bound: μ would be negative.
        let p = problem(SymmetricMatrix::identity(1), vec![-1.0], ConstraintSet::orthant(1));
        let rep = kkt_residual(&p, &[0.0], 1e-8).unwrap();
        assert_eq!(rep.multipliers[0].1, 0.0);
        assert!((rep.stationarity_residual - 1.0).abs() < 1e-15);
    }

    #[test]
    fn infeasible_point_is_an_error() {
        let p = problem(SymmetricMatrix::identity(1), vec![0.0], ConstraintSet::orthant(1));
        assert!(kkt_residual(&p, &[-1.0], 1e-8).is_err());
    }

    #[test]
    fn multiplier_encoding() {
        let p = problem(SymmetricMatrix::diagonal(&[2.0]), vec![1.0], ConstraintSet::orthant(1));
        let rep = kkt_residual(&p, &[0.0], 1e-8).unwrap();
        assert!(rep.multipliers_joined().starts_with("L0:"));
    }
}
