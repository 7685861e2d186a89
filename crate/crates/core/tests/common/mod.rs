#![allow(dead_code)]

use bdca::linalg::{dot, norm_sq};
use bdca::{
    Algorithm, ConstraintSet, QuadraticDcProblem, SolveResult, SolverConfig, Status,
    SymmetricMatrix,
};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_vec(g: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| g.random_range(lo..hi)).collect()
}

pub fn random_symmetric(g: &mut ChaCha8Rng, n: usize) -> SymmetricMatrix {
    SymmetricMatrix::new(n, uniform_vec(g, n * n, -1.0, 1.0)).unwrap()
}

/// `MᵀM/n + shift·I` with `M` uniform; positive definite for `shift > 0`.
pub fn random_convex(g: &mut ChaCha8Rng, n: usize, shift: f64) -> SymmetricMatrix {
    let m = uniform_vec(g, n * n, -1.0, 1.0);
    SymmetricMatrix::from_fn(n, |i, j| {
        let s: f64 = (0..n).map(|k| m[k * n + i] * m[k * n + j]).sum();
        s / n as f64 + if i == j { shift } else { 0.0 }
    })
    .unwrap()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SetKind {
    Box,
    Orthant,
    Simplex,
    Halfspaces,
}

pub const ALL_KINDS: [SetKind; 4] = [SetKind::Box, SetKind::Orthant, SetKind::Simplex, SetKind::Halfspaces];

/// Unit box plus two random cuts through a neighbourhood of the origin.
pub fn random_polytope(g: &mut ChaCha8Rng, n: usize) -> ConstraintSet {
    let mut rows = Vec::new();
    let mut b = Vec::new();
    for i in 0..n {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        rows.push(e.clone());
        b.push(1.0);
        e[i] = -1.0;
        rows.push(e);
        b.push(1.0);
    }
    for _ in 0..2 {
        rows.push(uniform_vec(g, n, -1.0, 1.0));
        b.push(g.random_range(0.2..1.0));
    }
    ConstraintSet::halfspaces(&rows, b).unwrap()
}

/// Random instance whose objective is bounded below on the set.
pub fn random_problem(kind: SetKind, n: usize, seed: u64) -> QuadraticDcProblem {
    let mut g = rng(seed);
    let (q_mat, cons) = match kind {
        SetKind::Box => (random_symmetric(&mut g, n), ConstraintSet::cube(n, -1.0, 1.0).unwrap()),
        SetKind::Orthant => (random_convex(&mut g, n, 0.1), ConstraintSet::orthant(n)),
        SetKind::Simplex => (
            random_symmetric(&mut g, n),
            ConstraintSet::simplex(n, g.random_range(0.5..2.0)).unwrap(),
        ),
        SetKind::Halfspaces => (random_symmetric(&mut g, n), random_polytope(&mut g, n)),
    };
    let q = uniform_vec(&mut g, n, -1.0, 1.0);
    QuadraticDcProblem::build(q_mat, q, cons, 0.05).unwrap()
}

/// A feasible start: the projection of a random point.
pub fn random_start(p: &QuadraticDcProblem, seed: u64) -> Vec<f64> {
    let mut g = rng(seed);
    let z = uniform_vec(&mut g, p.dim(), -1.5, 1.5);
    p.constraints().project(&z).unwrap()
}

pub fn traced(cfg: &SolverConfig) -> SolverConfig {
    SolverConfig { keep_points: true, ..cfg.clone() }
}

/// Euclidean projection onto `{x : Ax ≤ b}` by enumerating every subset of
/// constraints held at equality and keeping the closest feasible candidate.
pub fn project_bruteforce(rows: &[Vec<f64>], b: &[f64], z: &[f64]) -> Vec<f64> {
    let n = z.len();
    let p = rows.len();
    assert!(p <= 16);
    let zv = DVector::from_column_slice(z);
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 0u32..(1 << p) {
        let s: Vec<usize> = (0..p).filter(|i| mask & (1 << i) != 0).collect();
        let x = if s.is_empty() {
            zv.clone()
        } else {
            let a = DMatrix::from_fn(s.len(), n, |r, c| rows[s[r]][c]);
            let bs = DVector::from_iterator(s.len(), s.iter().map(|&i| b[i]));
            let gram = &a * a.transpose();
            let Ok(pinv) = gram.pseudo_inverse(1e-12) else { continue };
            let w = pinv * (&a * &zv - bs);
            &zv - a.transpose() * w
        };
        let feasible = (0..p).all(|i| dot(&rows[i], x.as_slice()) <= b[i] + 1e-10);
        if feasible {
            let d = (&x - &zv).norm_squared();
            if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
                best = Some((d, x.as_slice().to_vec()));
            }
        }
    }
    best.expect("nonempty polyhedron").1
}

/// Every KKT point of `min ½xᵀQx + qᵀx` over `[lower, upper]`, found by
/// enumerating which coordinates sit at a bound.
pub fn box_kkt_points(q_mat: &SymmetricMatrix, q: &[f64], lower: &[f64], upper: &[f64]) -> Vec<Vec<f64>> {
    let n = q.len();
    let mut out = Vec::new();
    let total = 3usize.pow(n as u32);
    for code in 0..total {
        let mut pattern = vec![0u8; n];
        let mut c = code;
        for slot in pattern.iter_mut() {
            *slot = (c % 3) as u8;
            c /= 3;
        }
        let mut x = vec![0.0; n];
        let free: Vec<usize> = (0..n).filter(|&i| pattern[i] == 2).collect();
        for i in 0..n {
            match pattern[i] {
                0 => x[i] = lower[i],
                1 => x[i] = upper[i],
                _ => {}
            }
        }
        if !free.is_empty() {
            let m = DMatrix::from_fn(free.len(), free.len(), |r, c| q_mat.get(free[r], free[c]));
            let rhs = DVector::from_iterator(
                free.len(),
                free.iter().map(|&i| {
                    let bound: f64 = (0..n)
                        .filter(|j| pattern[*j] != 2)
                        .map(|j| q_mat.get(i, j) * x[j])
                        .sum();
                    -(q[i] + bound)
                }),
            );
            let Some(sol) = m.lu().solve(&rhs) else { continue };
            for (k, &i) in free.iter().enumerate() {
                x[i] = sol[k];
            }
        }
        let tol = 1e-10;
        if (0..n).any(|i| x[i] < lower[i] - tol || x[i] > upper[i] + tol) {
            continue;
        }
        let r: Vec<f64> = (0..n).map(|i| dot(q_mat.row(i), &x) + q[i]).collect();
        let signs_ok = (0..n).all(|i| match pattern[i] {
            0 => r[i] >= -tol,
            1 => r[i] <= tol,
            _ => true,
        });
        if signs_ok {
            out.push(x);
        }
    }
    out
}

pub fn phi(p: &QuadraticDcProblem, x: &[f64]) -> f64 {
    p.phi_value(x).unwrap()
}

pub const SUMMABILITY_MIN_ITERS: usize = 100;

/// `(φ(y + td) − φ(y))/t`. When cancellation in the literal form would swamp
/// the signal, the same quotient is evaluated as `⟨Qy + q, d⟩ + ½t⟨Qd, d⟩`.
pub fn difference_quotient(p: &QuadraticDcProblem, y: &[f64], d: &[f64], t: f64) -> f64 {
    let moved: Vec<f64> = y.iter().zip(d).map(|(a, b)| a + t * b).collect();
    let (f1, f0) = (phi(p, &moved), phi(p, y));
    let literal = (f1 - f0) / t;
    let noise = 8.0 * f64::EPSILON * (f1.abs() + f0.abs()) / t;
    let qy = p.matrix().matvec(y);
    let qd = p.matrix().matvec(d);
    let slope: f64 = (0..y.len()).map(|i| (qy[i] + p.linear()[i]) * d[i]).sum();
    let exact = slope + 0.5 * t * dot(&qd, d);
    if noise < 1e-3 * exact.abs() {
        literal
    } else {
        exact
    }
}

/// Per-iteration checks of the decrease, descent, feasibility, gate and
/// summability properties. Point-level checks need `keep_points`.
/// Returns the number of iterations inspected.
pub fn check_invariants(p: &QuadraticDcProblem, cfg: &SolverConfig, res: &SolveResult) -> Result<usize, String> {
    let rho = p.rho();
    let recs = &res.iterations;
    let slack = |v: f64| 1e-9 * (1.0 + v.abs());
    for (k, r) in recs.iter().enumerate() {
        let d2 = r.d_norm * r.d_norm;
        if r.phi_y > r.phi_x - rho * d2 + slack(r.phi_x) {
            return Err(format!("k={k}: DCA decrease fails: phi_y={} phi_x={} rho={rho} d={}", r.phi_y, r.phi_x, r.d_norm));
        }
        if r.lambda_k < 0.0 {
            return Err(format!("k={k}: negative step"));
        }
        if r.direction_feasible && r.lambda_k > r.trial_lambda {
            return Err(format!("k={k}: accepted step exceeds trial"));
        }
        if !r.direction_feasible && r.lambda_k != 0.0 {
            return Err(format!("k={k}: positive step on an infeasible direction"));
        }
        if let Some(next) = recs.get(k + 1) {
            let bound = r.phi_x - (cfg.alpha * r.lambda_k * r.lambda_k + rho) * d2 + slack(r.phi_x);
            if next.phi_x > bound {
                return Err(format!("k={k}: sufficient decrease fails: {} > {bound}", next.phi_x));
            }
            if res.algorithm == Algorithm::Dca && next.phi_x.to_bits() != r.phi_y.to_bits() {
                return Err(format!("k={k}: DCA next point differs from y_k"));
            }
        }
    }
    if res.status == Status::StationaryExact && recs.last().is_some_and(|r| r.d_norm != 0.0) {
        return Err("StationaryExact with nonzero final step".into());
    }
    if !p.constraints().contains(&res.x_star, cfg.active_tol) {
        return Err("x_star infeasible".into());
    }

    if let Some(points) = &res.points {
        for (k, (pt, r)) in points.iter().zip(recs).enumerate() {
            for (name, v) in [("x", &pt.x), ("y", &pt.y)] {
                if !p.constraints().contains(v, cfg.active_tol) {
                    return Err(format!("k={k}: {name}_k infeasible"));
                }
            }
            let d: Vec<f64> = pt.y.iter().zip(&pt.x).map(|(a, b)| a - b).collect();
            if r.direction_feasible && r.d_norm > 1e-4 {
                let t = 1e-7;
                let fd = difference_quotient(p, &pt.y, &d, t);
                if fd > -0.5 * rho * norm_sq(&d) {
                    return Err(format!("k={k}: not a descent direction: fd={fd} rho|d|^2={}", rho * norm_sq(&d)));
                }
            }
            if !r.direction_feasible {
                if let Some(next) = points.get(k + 1) {
                    if next.x != pt.y {
                        return Err(format!("k={k}: x_(k+1) != y_k on an infeasible direction"));
                    }
                }
            }
        }
    }

    // Σρ‖d_k‖² is bounded by the total decrease
    let total: f64 = recs.iter().map(|r| r.d_norm * r.d_norm).sum();
    if let Some(first) = recs.first() {
        let decrease = first.phi_x - res.phi_star;
        if rho * total > decrease + slack(first.phi_x) * (1 + recs.len()) as f64 {
            return Err(format!("rho*sum|d|^2 = {} exceeds total decrease {decrease}", rho * total));
        }
    }
    Ok(recs.len())
}

/// Partial sums of `‖d_k‖²` grow by at most 1e-12 over the last 10% of a
/// `DTolReached` run. Runs shorter than [`SUMMABILITY_MIN_ITERS`] pass
/// trivially: there the window is a handful of steps.
pub fn check_cauchy_tail(res: &SolveResult) -> Result<(), String> {
    let recs = &res.iterations;
    if res.status != Status::DTolReached || recs.len() < SUMMABILITY_MIN_ITERS {
        return Ok(());
    }
    let window = recs.len() / 10;
    let growth: f64 = recs[recs.len() - window..].iter().map(|r| r.d_norm * r.d_norm).sum();
    if growth > 1e-12 {
        return Err(format!("partial sums of |d|^2 grow by {growth:e} over the last 10%"));
    }
    Ok(())
}

/// Least-squares fit of `log(φ(x_k) − φ*)` against `k` over the final
/// converged segment, with `φ* = φ_terminal − d_tol²`.
/// Returns `(slope, r², points)`.
pub fn geometric_fit(res: &SolveResult, d_tol: f64) -> Option<(f64, f64, usize)> {
    let phi_star = res.phi_star - d_tol * d_tol;
    let floor = 1e-12 * (1.0 + phi_star.abs());
    let gaps: Vec<(f64, f64)> = res
        .iterations
        .iter()
        .map(|r| (r.k as f64, r.phi_x - phi_star))
        .filter(|(_, gap)| *gap > floor)
        .collect();
    if gaps.len() < 6 {
        return None;
    }
    let seg = &gaps[gaps.len() / 2..];
    let pts: Vec<(f64, f64)> = seg.iter().map(|(k, gap)| (*k, gap.ln())).collect();
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some((slope, r2, pts.len()))
}
