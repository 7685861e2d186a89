//! Polyhedral feasible sets: membership, Euclidean projection, active
//! constraints and ratio tests.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::linalg;

/// Dykstra stops once a full cycle moves the iterate by at most this much
/// (relative to `1 + ‖x‖∞`).
pub const DYKSTRA_TOL: f64 = 1e-12;
pub const DYKSTRA_MAX_CYCLES: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub enum ConstraintSet {
    /// `lower ≤ x ≤ upper`; infinite bounds are allowed.
    Box { lower: Vec<f64>, upper: Vec<f64> },
    /// `x ≥ 0`.
    NonnegOrthant { n: usize },
    /// `x ≥ 0, Σx ≤ radius`.
    Simplex { n: usize, radius: f64 },
    /// `⟨a_i, x⟩ ≤ b_i` with `a` stored row-major (`p × n`).
    Halfspaces { n: usize, a: Vec<f64>, b: Vec<f64> },
}

/// Identifies one inequality of a [`ConstraintSet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ConstraintId {
    /// `x_i ≥ lower_i` (also `x_i ≥ 0` for the orthant and simplex).
    Lower(usize),
    Upper(usize),
    /// `Σx ≤ r` of the simplex.
    Sum,
    Row(usize),
}

/// Sorted, duplicate-free list of active constraints.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ActiveSet(Vec<ConstraintId>);

impl ActiveSet {
    pub fn from_unsorted(mut ids: Vec<ConstraintId>) -> Self {
        ids.sort_unstable();
        ids.dedup();
        Self(ids)
    }
    pub fn ids(&self) -> &[ConstraintId] {
        &self.0
    }
    pub fn len(&self) -> usize {
        self.0.len()
    }
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
    pub fn contains(&self, id: ConstraintId) -> bool {
        self.0.binary_search(&id).is_ok()
    }
    pub fn is_subset_of(&self, other: &ActiveSet) -> bool {
        self.0.iter().all(|id| other.contains(*id))
    }
}

/// One inequality `⟨a, x⟩ ≤ rhs` with a sparse coefficient vector.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearConstraint {
    pub id: ConstraintId,
    pub coeffs: Vec<(usize, f64)>,
    pub rhs: f64,
}

impl LinearConstraint {
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }

    pub fn dot(&self, other: &LinearConstraint) -> f64 {
        // Both coefficient lists are sorted by index.
        let (mut i, mut j, mut s) = (0, 0, 0.0);
        while i < self.coeffs.len() && j < other.coeffs.len() {
            match self.coeffs[i].0.cmp(&other.coeffs[j].0) {
                Ordering::Less => i += 1,
                Ordering::Greater => j += 1,
                Ordering::Equal => {
                    s += self.coeffs[i].1 * other.coeffs[j].1;
                    i += 1;
                    j += 1;
                }
            }
        }
        s
    }
}

#[inline]
fn scaled_tol(tol: f64, rhs: f64) -> f64 {
    tol * (1.0 + rhs.abs())
}

impl ConstraintSet {
    pub fn boxed(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                expected: lower.len(),
                found: upper.len(),
            });
        }
        if lower.is_empty() {
            return Err(Error::InvalidParameter("box dimension must be ≥ 1".into()));
        }
        for (l, u) in lower.iter().zip(&upper) {
            if l.is_nan() || u.is_nan() || *l == f64::INFINITY || *u == f64::NEG_INFINITY {
                return Err(Error::InvalidParameter(format!("invalid bounds [{l}, {u}]")));
            }
            if l > u {
                return Err(Error::InvalidParameter(format!("lower {l} exceeds upper {u}")));
            }
        }
        Ok(Self::Box { lower, upper })
    }

    /// `[lo, hi]ⁿ`.
    pub fn cube(n: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::boxed(vec![lo; n], vec![hi; n])
    }

    pub fn orthant(n: usize) -> Self {
        assert!(n >= 1, "orthant dimension must be ≥ 1");
        Self::NonnegOrthant { n }
    }

    pub fn simplex(n: usize, radius: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("simplex dimension must be ≥ 1".into()));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidParameter(format!("simplex radius {radius} must be > 0")));
        }
        Ok(Self::Simplex { n, radius })
    }

    pub fn halfspaces(rows: &[Vec<f64>], b: Vec<f64>) -> Result<Self> {
        let p = rows.len();
        if p == 0 {
            return Err(Error::InvalidParameter("at least one halfspace is required".into()));
        }
        if b.len() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                found: b.len(),
            });
        }
        let n = rows[0].len();
        if n == 0 {
            return Err(Error::InvalidParameter("halfspace dimension must be ≥ 1".into()));
        }
        let mut a = Vec::with_capacity(p * n);
        for r in rows {
            if r.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: r.len(),
                });
            }
            if r.iter().all(|v| *v == 0.0) {
                return Err(Error::InvalidParameter("halfspace row is zero".into()));
            }
            a.extend_from_slice(r);
        }
        if a.iter().chain(&b).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("halfspaces"));
        }
        Ok(Self::Halfspaces { n, a, b })
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Box { lower, .. } => lower.len(),
            Self::NonnegOrthant { n } | Self::Simplex { n, .. } | Self::Halfspaces { n, .. } => *n,
        }
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

    /// Visits every finite inequality as `(id, ⟨a, x⟩ − rhs, rhs)`.
    fn for_each_residual(&self, x: &[f64], mut f: impl FnMut(ConstraintId, f64, f64)) {
        match self {
            Self::Box { lower, upper } => {
                for (i, ((l, u), xi)) in lower.iter().zip(upper).zip(x).enumerate() {
                    if l.is_finite() {
                        f(ConstraintId::Lower(i), l - xi, -l);
                    }
                    if u.is_finite() {
                        f(ConstraintId::Upper(i), xi - u, *u);
                    }
                }
            }
            Self::NonnegOrthant { .. } => {
                for (i, xi) in x.iter().enumerate() {
                    f(ConstraintId::Lower(i), -xi, 0.0);
                }
            }
            Self::Simplex { radius, .. } => {
                for (i, xi) in x.iter().enumerate() {
                    f(ConstraintId::Lower(i), -xi, 0.0);
                }
                f(ConstraintId::Sum, x.iter().sum::<f64>() - radius, *radius);
            }
            Self::Halfspaces { n, a, b } => {
                for (i, (row, bi)) in a.chunks_exact(*n).zip(b).enumerate() {
                    f(ConstraintId::Row(i), linalg::dot(row, x) - bi, *bi);
                }
            }
        }
    }

    /// Largest constraint violation `max_i max(0, ⟨a_i,x⟩ − b_i)`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut m = 0.0f64;
        self.for_each_residual(x, |_, r, _| m = m.max(r));
        m
    }

    /// Whether every constraint holds up to the additive slack `tol`.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        if x.len() != self.dim() || x.iter().any(|v| v.is_nan()) {
            return false;
        }
        let mut ok = true;
        self.for_each_residual(x, |_, r, _| ok &= r <= tol);
        ok
    }

    /// Feasibility with the activity scaling `tol·(1 + |b_i|)`.
    fn check_feasible_scaled(&self, x: &[f64], tol: f64) -> Result<()> {
        self.check_dim(x)?;
        let mut worst = 0.0f64;
        let mut ok = true;
        self.for_each_residual(x, |_, r, rhs| {
            if r > scaled_tol(tol, rhs) {
                ok = false;
                worst = worst.max(r);
            }
        });
        if ok && !x.iter().any(|v| v.is_nan()) {
            Ok(())
        } else {
            Err(Error::Infeasible { violation: worst })
        }
    }

    /// Constraints with `|⟨a_i,x⟩ − b_i| ≤ tol·(1 + |b_i|)`.
    pub fn active_indices(&self, x: &[f64], active_tol: f64) -> Result<ActiveSet> {
        self.check_feasible_scaled(x, active_tol)?;
        let mut ids = Vec::new();
        self.for_each_residual(x, |id, r, rhs| {
            if r.abs() <= scaled_tol(active_tol, rhs) {
                ids.push(id);
            }
        });
        // Residuals are visited in id order for every representation except the
        // box, whose Lower/Upper tags interleave.
        Ok(ActiveSet::from_unsorted(ids))
    }

    /// `I(y) ⊆ I(x)`, i.e. `y − x` is a feasible direction at `y`.
    pub fn is_feasible_direction(&self, x: &[f64], y: &[f64], active_tol: f64) -> Result<bool> {
        self.check_feasible_scaled(x, active_tol)?;
        self.check_feasible_scaled(y, active_tol)?;
        let active = |r: f64, rhs: f64| r.abs() <= scaled_tol(active_tol, rhs);
        Ok(match self {
            Self::Box { lower, upper } => lower.iter().zip(upper).zip(x.iter().zip(y)).all(
                |((l, u), (xi, yi))| {
                    let lo = !l.is_finite() || !active(l - yi, -l) || active(l - xi, -l);
                    let hi = !u.is_finite() || !active(yi - u, *u) || active(xi - u, *u);
                    lo && hi
                },
            ),
            Self::NonnegOrthant { .. } => x
                .iter()
                .zip(y)
                .all(|(xi, yi)| !active(-yi, 0.0) || active(-xi, 0.0)),
            Self::Simplex { radius, .. } => {
                let coords = x
                    .iter()
                    .zip(y)
                    .all(|(xi, yi)| !active(-yi, 0.0) || active(-xi, 0.0));
                let sx = x.iter().sum::<f64>() - radius;
                let sy = y.iter().sum::<f64>() - radius;
                coords && (!active(sy, *radius) || active(sx, *radius))
            }
            Self::Halfspaces { .. } => {
                let ix = self.active_indices(x, active_tol)?;
                self.active_indices(y, active_tol)?.is_subset_of(&ix)
            }
        })
    }

    /// `sup{λ ≥ 0 : y + λd ∈ F}` by the ratio test; `+∞` for recession
    /// directions.
    pub fn max_feasible_step(&self, y: &[f64], d: &[f64]) -> f64 {
        let ratio = |slack: f64, rate: f64| (slack / rate).max(0.0);
        let mut best = f64::INFINITY;
        match self {
            Self::Box { lower, upper } => {
                for ((l, u), (yi, di)) in lower.iter().zip(upper).zip(y.iter().zip(d)) {
                    if *di > 0.0 && u.is_finite() {
                        best = best.min(ratio(u - yi, *di));
                    } else if *di < 0.0 && l.is_finite() {
                        best = best.min(ratio(yi - l, -di));
                    }
                }
            }
            Self::NonnegOrthant { .. } => {
                for (yi, di) in y.iter().zip(d) {
                    if *di < 0.0 {
                        best = best.min(ratio(*yi, -di));
                    }
                }
            }
            Self::Simplex { radius, .. } => {
                for (yi, di) in y.iter().zip(d) {
                    if *di < 0.0 {
                        best = best.min(ratio(*yi, -di));
                    }
                }
                let sd: f64 = d.iter().sum();
                if sd > 0.0 {
                    best = best.min(ratio(radius - y.iter().sum::<f64>(), sd));
                }
            }
            Self::Halfspaces { n, a, b } => {
                for (row, bi) in a.chunks_exact(*n).zip(b) {
                    let rate = linalg::dot(row, d);
                    if rate > 0.0 {
                        best = best.min(ratio(bi - linalg::dot(row, y), rate));
                    }
                }
            }
        }
        best
    }

    /// Euclidean projection onto the set.
    pub fn project(&self, z: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(z)?;
        match self {
            Self::Box { lower, upper } => Ok(z
                .iter()
                .zip(lower.iter().zip(upper))
                .map(|(v, (l, u))| v.max(*l).min(*u))
                .collect()),
            Self::NonnegOrthant { .. } => Ok(z.iter().map(|v| v.max(0.0)).collect()),
            Self::Simplex { radius, .. } => Ok(project_capped_simplex(z, *radius)),
            Self::Halfspaces { n, a, b } => dykstra(*n, a, b, z),
        }
    }

    /// All finite inequalities in `⟨a, x⟩ ≤ rhs` form.
    pub fn linear_constraints(&self) -> Vec<LinearConstraint> {
        let mut out = Vec::new();
        match self {
            Self::Box { lower, upper } => {
                for (i, (l, u)) in lower.iter().zip(upper).enumerate() {
                    if l.is_finite() {
                        out.push(LinearConstraint {
                            id: ConstraintId::Lower(i),
                            coeffs: vec![(i, -1.0)],
                            rhs: -l,
                        });
                    }
                    if u.is_finite() {
                        out.push(LinearConstraint {
                            id: ConstraintId::Upper(i),
                            coeffs: vec![(i, 1.0)],
                            rhs: *u,
                        });
                    }
                }
            }
            Self::NonnegOrthant { n } | Self::Simplex { n, .. } => {
                for i in 0..*n {
                    out.push(LinearConstraint {
                        id: ConstraintId::Lower(i),
                        coeffs: vec![(i, -1.0)],
                        rhs: 0.0,
                    });
                }
                if let Self::Simplex { radius, .. } = self {
                    out.push(LinearConstraint {
                        id: ConstraintId::Sum,
                        coeffs: (0..*n).map(|j| (j, 1.0)).collect(),
                        rhs: *radius,
                    });
                }
            }
            Self::Halfspaces { n, a, b } => {
                for (i, (row, bi)) in a.chunks_exact(*n).zip(b).enumerate() {
                    out.push(LinearConstraint {
                        id: ConstraintId::Row(i),
                        coeffs: row
                            .iter()
                            .enumerate()
                            .filter(|(_, v)| **v != 0.0)
                            .map(|(j, v)| (j, *v))
                            .collect(),
                        rhs: *bi,
                    });
                }
            }
        }
        out
    }

    pub fn constraint(&self, id: ConstraintId) -> Option<LinearConstraint> {
        let n = self.dim();
        match (self, id) {
            (Self::Box { lower, .. }, ConstraintId::Lower(i)) if i < n && lower[i].is_finite() => {
                Some(LinearConstraint {
                    id,
                    coeffs: vec![(i, -1.0)],
                    rhs: -lower[i],
                })
            }
            (Self::Box { upper, .. }, ConstraintId::Upper(i)) if i < n && upper[i].is_finite() => {
                Some(LinearConstraint {
                    id,
                    coeffs: vec![(i, 1.0)],
                    rhs: upper[i],
                })
            }
            (Self::NonnegOrthant { .. } | Self::Simplex { .. }, ConstraintId::Lower(i)) if i < n => {
                Some(LinearConstraint {
                    id,
                    coeffs: vec![(i, -1.0)],
                    rhs: 0.0,
                })
            }
            (Self::Simplex { radius, .. }, ConstraintId::Sum) => Some(LinearConstraint {
                id,
                coeffs: (0..n).map(|j| (j, 1.0)).collect(),
                rhs: *radius,
            }),
            (Self::Halfspaces { a, b, .. }, ConstraintId::Row(i)) if i < b.len() => {
                Some(LinearConstraint {
                    id,
                    coeffs: a[i * n..(i + 1) * n]
                        .iter()
                        .enumerate()
                        .filter(|(_, v)| **v != 0.0)
                        .map(|(j, v)| (j, *v))
                        .collect(),
                    rhs: b[i],
                })
            }
            _ => None,
        }
    }

    /// Same set written as explicit halfspaces (infinite box bounds dropped).
    pub fn to_halfspaces(&self) -> Result<Self> {
        let n = self.dim();
        let cons = self.linear_constraints();
        if cons.is_empty() {
            return Err(Error::InvalidParameter("set has no finite constraints".into()));
        }
        let rows: Vec<Vec<f64>> = cons
            .iter()
            .map(|c| {
                let mut r = vec![0.0; n];
                for &(j, v) in &c.coeffs {
                    r[j] = v;
                }
                r
            })
            .collect();
        Self::halfspaces(&rows, cons.iter().map(|c| c.rhs).collect())
    }
}

/// Projection onto `{x ≥ 0, Σx ≤ r}`.
fn project_capped_simplex(z: &[f64], r: f64) -> Vec<f64> {
    let clamped: Vec<f64> = z.iter().map(|v| v.max(0.0)).collect();
    if clamped.iter().sum::<f64>() <= r {
        return clamped;
    }
    // Sort-and-threshold onto {x ≥ 0, Σx = r}.
    let mut u = z.to_vec();
    u.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (j, uj) in u.iter().enumerate() {
        cumsum += uj;
        let t = (cumsum - r) / (j + 1) as f64;
        if uj - t > 0.0 {
            theta = t;
        } else {
            break;
        }
    }
    z.iter().map(|v| (v - theta).max(0.0)).collect()
}

/// Dykstra's cyclic projection onto `{x : A x ≤ b}`.
fn dykstra(n: usize, a: &[f64], b: &[f64], z: &[f64]) -> Result<Vec<f64>> {
    let p = b.len();
    let row_norms: Vec<f64> = a.chunks_exact(n).map(linalg::norm_sq).collect();
    let mut x = z.to_vec();
    let mut corr = vec![0.0; p * n];
    let mut w = vec![0.0; n];
    let mut last_move = f64::INFINITY;

    for cycle in 1..=DYKSTRA_MAX_CYCLES {
        let mut moved_sq = 0.0;
        for i in 0..p {
            let row = &a[i * n..(i + 1) * n];
            let ci = &mut corr[i * n..(i + 1) * n];
            for j in 0..n {
                w[j] = x[j] + ci[j];
            }
            let viol = linalg::dot(row, &w) - b[i];
            let shrink = if viol > 0.0 { viol / row_norms[i] } else { 0.0 };
            for j in 0..n {
                let new = w[j] - shrink * row[j];
                ci[j] = w[j] - new;
                moved_sq += (new - x[j]) * (new - x[j]);
                x[j] = new;
            }
        }
        last_move = moved_sq.sqrt();
        if last_move <= DYKSTRA_TOL * (1.0 + linalg::norm_inf(&x)) {
            let viol = a
                .chunks_exact(n)
                .zip(b)
                .map(|(row, bi)| linalg::dot(row, &x) - bi)
                .fold(0.0f64, f64::max);
            if viol <= 1e-9 * (1.0 + linalg::norm_inf(b)) {
                return Ok(x);
            }
            if cycle == DYKSTRA_MAX_CYCLES {
                last_move = viol;
            }
        }
    }
    Err(Error::ProjectionNotConverged {
        cycles: DYKSTRA_MAX_CYCLES,
        residual: last_move,
        best: x,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ConstraintId::*;

    fn unit_box_halfspaces(n: usize, lo: f64, hi: f64) -> ConstraintSet {
        ConstraintSet::cube(n, lo, hi).unwrap().to_halfspaces().unwrap()
    }

    #[test]
    fn containment() {
        let o = ConstraintSet::orthant(2);
        assert!(o.contains(&[0.0, 0.0], 0.0));
        let b = ConstraintSet::cube(2, -1.0, 1.0).unwrap();
        assert!(b.contains(&[1.0 + 1e-9, 0.0], 1e-8));
        assert!(!b.contains(&[1.0 + 1e-9, 0.0], 0.0));
        let h = unit_box_halfspaces(2, -1.0, 1.0);
        assert!(!h.contains(&[2.0, 0.0], 0.0));
        assert!(h.contains(&[0.5, -1.0], 0.0));
    }

    #[test]
    fn constructors_validate() {
        assert!(ConstraintSet::boxed(vec![1.0], vec![0.0]).is_err());
        assert!(ConstraintSet::boxed(vec![0.0], vec![1.0, 2.0]).is_err());
        assert!(ConstraintSet::boxed(vec![f64::NEG_INFINITY], vec![f64::INFINITY]).is_ok());
        assert!(ConstraintSet::simplex(2, 0.0).is_err());
        assert!(ConstraintSet::halfspaces(&[vec![0.0, 0.0]], vec![1.0]).is_err());
        assert!(ConstraintSet::halfspaces(&[vec![1.0, 0.0]], vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn closed_form_projections() {
        let o = ConstraintSet::orthant(2);
        assert_eq!(o.project(&[-1.0, 2.0]).unwrap(), vec![0.0, 2.0]);
        let s = ConstraintSet::simplex(2, 1.0).unwrap();
        assert_eq!(s.project(&[0.2, 0.3]).unwrap(), vec![0.2, 0.3]);
        let p = s.project(&[1.0, 1.0]).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-15 && (p[1] - 0.5).abs() < 1e-15);
        let p = s.project(&[2.0, -1.0]).unwrap();
        assert_eq!(p, vec![1.0, 0.0]);
        let b = ConstraintSet::boxed(vec![f64::NEG_INFINITY, 0.0], vec![1.0, f64::INFINITY]).unwrap();
        assert_eq!(b.project(&[-5.0, -5.0]).unwrap(), vec![-5.0, 0.0]);
        assert!(o.project(&[1.0]).is_err());
    }

    #[test]
    fn dykstra_matches_box() {
        let h = unit_box_halfspaces(3, 0.0, 1.0);
        let p = h.project(&[1.5, -0.2, 0.4]).unwrap();
        for (a, b) in p.iter().zip([1.0, 0.0, 0.4]) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn dykstra_reports_empty_set() {
        // x ≤ 0 and -x ≤ -1 is empty.
        let h = ConstraintSet::halfspaces(&[vec![1.0], vec![-1.0]], vec![0.0, -1.0]).unwrap();
        match h.project(&[0.5]) {
            Err(Error::ProjectionNotConverged { best, .. }) => assert_eq!(best.len(), 1),
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn active_sets() {
        let o = ConstraintSet::orthant(3);
        assert_eq!(
            o.active_indices(&[0.0, 5.0, 0.0], 1e-8).unwrap().ids(),
            &[Lower(0), Lower(2)]
        );
        let b = ConstraintSet::cube(1, -1.0, 1.0).unwrap();
        assert_eq!(b.active_indices(&[1.0], 1e-8).unwrap().ids(), &[Upper(0)]);
        let s = ConstraintSet::simplex(2, 1.0).unwrap();
        assert_eq!(s.active_indices(&[1.0, 0.0], 1e-8).unwrap().ids(), &[Lower(1), Sum]);
        assert!(matches!(
            o.active_indices(&[-1.0, 0.0, 0.0], 1e-8),
            Err(Error::Infeasible { .. })
        ));
    }

    #[test]
    fn box_active_ids_are_sorted() {
        let b = ConstraintSet::cube(3, 0.0, 1.0).unwrap();
        let a = b.active_indices(&[1.0, 0.0, 1.0], 1e-8).unwrap();
        assert_eq!(a.ids(), &[Lower(1), Upper(0), Upper(2)]);
    }

    #[test]
    fn feasible_direction_gate() {
        let o = ConstraintSet::orthant(2);
        assert!(o.is_feasible_direction(&[1.0, 1.0], &[2.0, 3.0], 1e-8).unwrap());
        assert!(!o.is_feasible_direction(&[1.0, 1.0], &[0.0, 1.0], 1e-8).unwrap());
        assert!(o.is_feasible_direction(&[0.0, 1.0], &[0.0, 2.0], 1e-8).unwrap());
        assert!(o.is_feasible_direction(&[-1.0, 1.0], &[0.0, 2.0], 1e-8).is_err());

        // The closed-form gates agree with the generic active-set inclusion.
        let s = ConstraintSet::simplex(2, 1.0).unwrap();
        let h = s.to_halfspaces().unwrap();
        for (x, y) in [
            ([0.5, 0.5], [1.0, 0.0]),
            ([1.0, 0.0], [0.5, 0.5]),
            ([0.2, 0.2], [0.0, 0.4]),
            ([0.0, 0.4], [0.0, 1.0]),
        ] {
            assert_eq!(
                s.is_feasible_direction(&x, &y, 1e-8).unwrap(),
                h.is_feasible_direction(&x, &y, 1e-8).unwrap()
            );
        }
    }

    #[test]
    fn ratio_tests() {
        let o = ConstraintSet::orthant(2);
        assert_eq!(o.max_feasible_step(&[1.0, 1.0], &[-1.0, 0.0]), 1.0);
        assert_eq!(o.max_feasible_step(&[1.0, 1.0], &[1.0, 1.0]), f64::INFINITY);
        let b = ConstraintSet::cube(2, 0.0, 1.0).unwrap();
        assert_eq!(b.max_feasible_step(&[0.5, 0.5], &[1.0, 1.0]), 0.5);
        let h = b.to_halfspaces().unwrap();
        assert_eq!(h.max_feasible_step(&[0.5, 0.5], &[1.0, 1.0]), 0.5);
        let s = ConstraintSet::simplex(2, 1.0).unwrap();
        assert!((s.max_feasible_step(&[0.25, 0.25], &[1.0, 1.0]) - 0.25).abs() < 1e-15);
        assert_eq!(o.max_feasible_step(&[0.0, 1.0], &[-1.0, 0.0]), 0.0);
    }

    #[test]
    fn sparse_constraint_dot() {
        let s = ConstraintSet::simplex(3, 1.0).unwrap();
        let sum = s.constraint(Sum).unwrap();
        let l1 = s.constraint(Lower(1)).unwrap();
        assert_eq!(sum.dot(&l1), -1.0);
        assert_eq!(sum.dot(&sum), 3.0);
        assert_eq!(l1.eval(&[0.0, 2.0, 0.0]), -2.0);
        assert!(s.constraint(Upper(0)).is_none());
    }
}
