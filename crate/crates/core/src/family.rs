//! Families of functions over product fibrations and their critical sets.
//!
//! The total space is an open subset of `base x fiber` coordinates, optionally
//! cut down further by equality constraints. The projection is the first
//! factor.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::linalg::{columns, fd_gradient, fd_gradient_richardson, fd_jacobian, inf_norm, kernel_basis, lstsq, numerical_rank};
use crate::minkowski::Covector;
use crate::newton::gauss_newton;

pub type ScalarFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;
pub type MatrixFn = Arc<dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync>;
pub type Predicate = Arc<dyn Fn(&[f64]) -> bool + Send + Sync>;

/// Numerical settings shared by all solvers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Relative step of the forward/central differences inside Newton.
    pub fd_step: f64,
    /// Singular values or pivots below `rank_threshold * largest` count as zero.
    pub rank_threshold: f64,
    /// Newton gives up once the iterate moves farther than this from the seed (relative).
    pub divergence_radius: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 50,
            fd_step: f64::EPSILON.sqrt(),
            rank_threshold: 1e-8,
            divergence_radius: 1e4,
        }
    }
}

impl SolverConfig {
    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.tolerance > 0.0
            && self.max_iterations > 0
            && self.fd_step > 0.0
            && self.rank_threshold > 0.0
            && self.divergence_radius > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidArgument("solver settings must be positive".into()))
        }
    }
}

/// A differentiable map between coordinate spaces, used for constraints `c(x) = 0` and projections.
#[derive(Clone)]
pub struct SmoothMap {
    pub count: usize,
    pub map: VectorFn,
    pub jacobian: Option<MatrixFn>,
}

impl fmt::Debug for SmoothMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SmoothMap")
            .field("count", &self.count)
            .field("analytic_jacobian", &self.jacobian.is_some())
            .finish()
    }
}

impl SmoothMap {
    pub fn new(count: usize, map: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        Self { count, map: Arc::new(map), jacobian: None }
    }

    pub fn with_jacobian(mut self, jac: impl Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static) -> Self {
        self.jacobian = Some(Arc::new(jac));
        self
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        (self.map)(x)
    }

    pub fn jacobian_at(&self, x: &[f64]) -> DMatrix<f64> {
        match &self.jacobian {
            Some(j) => j(x),
            None => fd_jacobian(&|y| (self.map)(y), x, self.count),
        }
    }

    /// The same map read off the coordinates `idx` of a larger space.
    pub fn reindexed(&self, idx: Vec<usize>, total_dim: usize) -> Self {
        let inner = self.clone();
        let idx = Arc::new(idx);
        let i2 = Arc::clone(&idx);
        let map = move |x: &[f64]| inner.eval(&gather(x, &idx));
        let inner = self.clone();
        let jac = move |x: &[f64]| {
            let local = inner.jacobian_at(&gather(x, &i2));
            let mut full = DMatrix::zeros(local.nrows(), total_dim);
            for (c, &i) in i2.iter().enumerate() {
                for r in 0..local.nrows() {
                    full[(r, i)] += local[(r, c)];
                }
            }
            full
        };
        Self { count: self.count, map: Arc::new(map), jacobian: Some(Arc::new(jac)) }
    }

    /// Stack several maps on the same space.
    pub fn stacked(parts: Vec<SmoothMap>, dim: usize) -> Option<Self> {
        if parts.is_empty() {
            return None;
        }
        let count = parts.iter().map(|c| c.count).sum();
        let parts = Arc::new(parts);
        let p2 = Arc::clone(&parts);
        let map = move |x: &[f64]| parts.iter().flat_map(|c| c.eval(x)).collect();
        let jac = move |x: &[f64]| {
            let mut full = DMatrix::zeros(count, dim);
            let mut row = 0;
            for c in p2.iter() {
                let j = c.jacobian_at(x);
                full.view_mut((row, 0), (c.count, dim)).copy_from(&j);
                row += c.count;
            }
            full
        };
        Some(Self { count, map: Arc::new(map), jacobian: Some(Arc::new(jac)) })
    }
}

pub(crate) fn gather(x: &[f64], idx: &[usize]) -> Vec<f64> {
    idx.iter().map(|&i| x[i]).collect()
}

/// A scalar function on the total space of a fibration `base x fiber -> base`.
#[derive(Clone)]
pub struct FamilyOfFunctions {
    base_dim: usize,
    fiber_dim: usize,
    domain: Predicate,
    value: ScalarFn,
    gradient: Option<VectorFn>,
    hessian: Option<MatrixFn>,
    constraints: Option<SmoothMap>,
}

impl fmt::Debug for FamilyOfFunctions {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FamilyOfFunctions")
            .field("base_dim", &self.base_dim)
            .field("fiber_dim", &self.fiber_dim)
            .field("analytic_gradient", &self.gradient.is_some())
            .field("analytic_hessian", &self.hessian.is_some())
            .field("constraints", &self.constraints)
            .finish()
    }
}

impl FamilyOfFunctions {
    pub fn new(base_dim: usize, fiber_dim: usize, value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            base_dim,
            fiber_dim,
            domain: Arc::new(|_| true),
            value: Arc::new(value),
            gradient: None,
            hessian: None,
            constraints: None,
        }
    }

    /// A family with zero-dimensional fibers, i.e. a plain function on the base.
    pub fn function(base_dim: usize, value: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self::new(base_dim, 0, value)
    }

    pub fn with_domain(mut self, domain: impl Fn(&[f64]) -> bool + Send + Sync + 'static) -> Self {
        self.domain = Arc::new(domain);
        self
    }

    pub fn with_gradient(mut self, gradient: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        self.gradient = Some(Arc::new(gradient));
        self
    }

    pub fn with_hessian(mut self, hessian: impl Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static) -> Self {
        self.hessian = Some(Arc::new(hessian));
        self
    }

    /// Restrict the total space to the zero set of `c`.
    pub fn with_constraints(mut self, c: SmoothMap) -> Self {
        self.constraints = Some(c);
        self
    }

    pub(crate) fn from_parts(
        base_dim: usize,
        fiber_dim: usize,
        domain: Predicate,
        value: ScalarFn,
        gradient: Option<VectorFn>,
        hessian: Option<MatrixFn>,
        constraints: Option<SmoothMap>,
    ) -> Self {
        Self { base_dim, fiber_dim, domain, value, gradient, hessian, constraints }
    }

    pub fn base_dim(&self) -> usize {
        self.base_dim
    }

    pub fn fiber_dim(&self) -> usize {
        self.fiber_dim
    }

    pub fn total_dim(&self) -> usize {
        self.base_dim + self.fiber_dim
    }

    pub fn constraints(&self) -> Option<&SmoothMap> {
        self.constraints.as_ref()
    }

    pub fn has_analytic_gradient(&self) -> bool {
        self.gradient.is_some()
    }

    pub fn in_domain(&self, x: &[f64]) -> bool {
        x.len() == self.total_dim() && x.iter().all(|v| v.is_finite()) && (self.domain)(x)
    }

    /// `F(x)` without a domain check.
    pub fn value_unchecked(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }

    pub fn value(&self, x: &[f64]) -> Result<f64> {
        self.require_domain(x)?;
        Ok((self.value)(x))
    }

    pub fn gradient_at(&self, x: &[f64]) -> Vec<f64> {
        match &self.gradient {
            Some(g) => g(x),
            None => self.fd_gradient_at(x),
        }
    }

    pub fn fd_gradient_at(&self, x: &[f64]) -> Vec<f64> {
        fd_gradient(&|y| (self.value)(y), x)
    }

    pub fn hessian_at(&self, x: &[f64]) -> DMatrix<f64> {
        if let Some(h) = &self.hessian {
            return h(x);
        }
        let n = x.len();
        let j = fd_jacobian(&|y| self.gradient_at(y), x, n);
        (&j + j.transpose()) * 0.5
    }

    pub fn join(&self, base: &[f64], fiber: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.base_dim, base.len())?;
        check_dim(self.fiber_dim, fiber.len())?;
        Ok([base, fiber].concat())
    }

    fn require_domain(&self, x: &[f64]) -> Result<()> {
        check_dim(self.total_dim(), x.len())?;
        if (self.domain)(x) {
            Ok(())
        } else {
            Err(Error::Domain("point outside the total space of the family".into()))
        }
    }

    fn fiber_rows(&self) -> Vec<usize> {
        (self.base_dim..self.total_dim()).collect()
    }

    fn constraint_jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        match &self.constraints {
            Some(c) => c.jacobian_at(x),
            None => DMatrix::zeros(0, x.len()),
        }
    }
}

/// A point of the critical set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub base: Vec<f64>,
    pub fiber: Vec<f64>,
    pub residual: f64,
}

impl CriticalPoint {
    pub fn total(&self) -> Vec<f64> {
        [self.base.as_slice(), self.fiber.as_slice()].concat()
    }
}

/// Outcome of a semi-decision procedure: a witness was found or not.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MembershipResult {
    pub member: bool,
    pub witness: Option<CriticalPoint>,
    /// Smallest residual reached over all seeds.
    pub residual: f64,
    pub seeds_tried: usize,
}

impl MembershipResult {
    pub(crate) fn rejected(residual: f64, seeds_tried: usize) -> Self {
        Self { member: false, witness: None, residual, seeds_tried }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub rank: usize,
    pub morse_at_point: bool,
}

/// Stationarity conditions solved over the fiber at a fixed base point.
///
/// With `J` the Jacobian of all constraints and `S` the selected rows, the
/// residual is the constraint values together with the part of
/// `sign * dF[S] - target[S]` not in the row space of `J[:, S]`.
#[derive(Clone)]
pub(crate) struct Conditions {
    pub constraints: Vec<SmoothMap>,
    pub rows: Vec<usize>,
    pub target: Vec<f64>,
    pub sign: f64,
}

impl Conditions {
    pub fn criticality(fam: &FamilyOfFunctions) -> Self {
        Self {
            constraints: fam.constraints.iter().cloned().collect(),
            rows: fam.fiber_rows(),
            target: vec![0.0; fam.total_dim()],
            sign: 1.0,
        }
    }

    pub fn threshold(&self, cfg: &SolverConfig) -> f64 {
        cfg.tolerance * (1.0 + inf_norm(&self.target))
    }

    fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        let m: usize = self.constraints.iter().map(|c| c.count).sum();
        let mut j = DMatrix::zeros(m, x.len());
        let mut row = 0;
        for c in &self.constraints {
            let cj = c.jacobian_at(x);
            j.view_mut((row, 0), (c.count, x.len())).copy_from(&cj);
            row += c.count;
        }
        j
    }

    /// Residual vector, or `None` outside the domain.
    pub fn eval(&self, fam: &FamilyOfFunctions, x: &[f64], cfg: &SolverConfig) -> Option<Vec<f64>> {
        if !fam.in_domain(x) {
            return None;
        }
        let mut out: Vec<f64> = self.constraints.iter().flat_map(|c| c.eval(x)).collect();
        let grad = fam.gradient_at(x);
        let gs = DVector::from_iterator(
            self.rows.len(),
            self.rows.iter().map(|&i| self.sign * grad[i] - self.target[i]),
        );
        let j = self.jacobian(x);
        if j.nrows() == 0 {
            out.extend(gs.iter());
        } else {
            let a = columns(&j, &self.rows).transpose();
            let lambda = lstsq(&a, &gs, cfg.rank_threshold);
            let r = &gs - &a * lambda;
            out.extend(r.iter());
        }
        if out.iter().any(|v| !v.is_finite()) {
            return None;
        }
        Some(out)
    }

    /// Solve over the fiber starting at `seed`.
    pub fn solve(&self, fam: &FamilyOfFunctions, base: &[f64], seed: &[f64], cfg: &SolverConfig) -> Option<CriticalPoint> {
        let threshold = self.threshold(cfg);
        let res = |phi: &[f64]| {
            let x = [base, phi].concat();
            self.eval(fam, &x, cfg)
        };
        let out = gauss_newton(&res, seed, threshold, cfg);
        if out.converged {
            Some(CriticalPoint { base: base.to_vec(), fiber: out.x, residual: out.residual })
        } else {
            None
        }
    }

    /// Try every seed; stop at the first witness.
    pub fn search(&self, fam: &FamilyOfFunctions, base: &[f64], seeds: &[Vec<f64>], cfg: &SolverConfig) -> MembershipResult {
        if fam.fiber_dim() == 0 {
            let r = self.eval(fam, base, cfg).map(|r| inf_norm(&r)).unwrap_or(f64::INFINITY);
            if r <= self.threshold(cfg) {
                let w = CriticalPoint { base: base.to_vec(), fiber: vec![], residual: r };
                return MembershipResult { member: true, witness: Some(w), residual: r, seeds_tried: 0 };
            }
            return MembershipResult::rejected(r, 0);
        }
        let mut best = f64::INFINITY;
        let mut tried = 0;
        for seed in seeds {
            if seed.len() != fam.fiber_dim() {
                continue;
            }
            tried += 1;
            if let Some(cp) = self.solve(fam, base, seed, cfg) {
                return MembershipResult { member: true, residual: cp.residual, witness: Some(cp), seeds_tried: tried };
            }
            let x = [base, seed.as_slice()].concat();
            if let Some(r) = self.eval(fam, &x, cfg) {
                best = best.min(inf_norm(&r));
            }
        }
        MembershipResult::rejected(best, tried)
    }
}

/// Partial derivatives of `F` along the fiber coordinates.
pub fn vertical_gradient(fam: &FamilyOfFunctions, x: &[f64]) -> Result<Vec<f64>> {
    fam.require_domain(x)?;
    Ok(fam.gradient_at(x)[fam.base_dim()..].to_vec())
}

fn check_seed(fam: &FamilyOfFunctions, base: &[f64], seed: &[f64]) -> Result<()> {
    check_dim(fam.base_dim(), base.len())?;
    check_dim(fam.fiber_dim(), seed.len())?;
    if !fam.in_domain(&[base, seed].concat()) {
        return Err(Error::Domain("seed outside the total space".into()));
    }
    Ok(())
}

/// Damped Newton on the fiber at a fixed base point; `None` when no critical point is reached.
pub fn solve_critical(fam: &FamilyOfFunctions, base: &[f64], seed: &[f64], cfg: &SolverConfig) -> Result<Option<CriticalPoint>> {
    check_seed(fam, base, seed)?;
    Ok(Conditions::criticality(fam).solve(fam, base, seed, cfg))
}

/// Critical points with respect to a finer projection `rho'` of the total space,
/// searched inside the `rho'`-fiber through the seed.
pub fn solve_critical_along(
    fam: &FamilyOfFunctions,
    base: &[f64],
    seed: &[f64],
    projection: &SmoothMap,
    cfg: &SolverConfig,
) -> Result<Option<CriticalPoint>> {
    check_seed(fam, base, seed)?;
    let level = projection.eval(&[base, seed].concat());
    let p = projection.clone();
    let jp = projection.clone();
    let shifted = SmoothMap {
        count: projection.count,
        map: Arc::new(move |x: &[f64]| p.eval(x).iter().zip(&level).map(|(a, b)| a - b).collect()),
        jacobian: Some(Arc::new(move |x: &[f64]| jp.jacobian_at(x))),
    };
    let mut cond = Conditions::criticality(fam);
    cond.constraints.push(shifted);
    Ok(cond.solve(fam, base, seed, cfg))
}

fn criticality_check(fam: &FamilyOfFunctions, cp: &CriticalPoint, cfg: &SolverConfig) -> Result<Vec<f64>> {
    let x = fam.join(&cp.base, &cp.fiber)?;
    let cond = Conditions::criticality(fam);
    let r = cond
        .eval(fam, &x, cfg)
        .ok_or_else(|| Error::Domain("point outside the total space".into()))?;
    let norm = inf_norm(&r);
    if norm > cond.threshold(cfg) {
        return Err(Error::Precondition(format!("point is not critical (residual {norm:e})")));
    }
    Ok(x)
}

/// Multipliers of the fiber stationarity condition `d_phi F = J_phi^T lambda`.
fn fiber_multipliers(fam: &FamilyOfFunctions, x: &[f64], cfg: &SolverConfig) -> DVector<f64> {
    let j = fam.constraint_jacobian(x);
    if j.nrows() == 0 {
        return DVector::zeros(0);
    }
    let grad = fam.gradient_at(x);
    let rows = fam.fiber_rows();
    let a = columns(&j, &rows).transpose();
    let g = DVector::from_iterator(rows.len(), rows.iter().map(|&i| grad[i]));
    lstsq(&a, &g, cfg.rank_threshold)
}

/// The mixed second-derivative form `W(F, r)`.
///
/// Rows range over vertical directions, columns over all directions. For a
/// family without constraints these are the coordinate directions, giving a
/// `fiber_dim x total_dim` block of the Hessian; with constraints both ranges
/// are restricted to the tangent space of the total space.
pub fn w_matrix(fam: &FamilyOfFunctions, cp: &CriticalPoint, cfg: &SolverConfig) -> Result<DMatrix<f64>> {
    let x = criticality_check(fam, cp, cfg)?;
    let n = fam.total_dim();
    let b = fam.base_dim();
    let Some(c) = fam.constraints() else {
        let h = fam.hessian_at(&x);
        return Ok(h.rows(b, fam.fiber_dim()).into_owned());
    };
    let lambda = fiber_multipliers(fam, &x, cfg);
    let c1 = c.clone();
    let lam = lambda.clone();
    let correction = fd_jacobian(
        &|y: &[f64]| (c1.jacobian_at(y).transpose() * &lam).iter().copied().collect(),
        &x,
        n,
    );
    let h = fam.hessian_at(&x) - correction;
    let j = c.jacobian_at(&x);
    let jv = columns(&j, &fam.fiber_rows());
    let kv = kernel_basis(&jv, fam.fiber_dim(), cfg.rank_threshold);
    let mut vertical = DMatrix::zeros(n, kv.ncols());
    vertical.view_mut((b, 0), (fam.fiber_dim(), kv.ncols())).copy_from(&kv);
    let tangent = kernel_basis(&j, n, cfg.rank_threshold);
    Ok(vertical.transpose() * h * tangent)
}

pub fn classify_at(fam: &FamilyOfFunctions, cp: &CriticalPoint, cfg: &SolverConfig) -> Result<Classification> {
    let w = w_matrix(fam, cp, cfg)?;
    let rank = numerical_rank(&w, cfg.rank_threshold);
    Ok(Classification { rank, morse_at_point: w.nrows() > 0 && rank == w.nrows() })
}

/// The covector `kappa(r)` on the base determined by `dF` at a critical point.
pub fn kappa_map(fam: &FamilyOfFunctions, cp: &CriticalPoint, cfg: &SolverConfig) -> Result<Covector> {
    let x = criticality_check(fam, cp, cfg)?;
    let grad = fam.gradient_at(&x);
    let b = fam.base_dim();
    let mut k: Vec<f64> = grad[..b].to_vec();
    let lambda = fiber_multipliers(fam, &x, cfg);
    if !lambda.is_empty() {
        let j = fam.constraint_jacobian(&x);
        let base_rows: Vec<usize> = (0..b).collect();
        let corr = columns(&j, &base_rows).transpose() * lambda;
        for (ki, c) in k.iter_mut().zip(corr.iter()) {
            *ki -= c;
        }
    }
    Ok(Covector(k))
}

/// Membership of `(base, covector)` in the generated submanifold `N`.
///
/// A `false` answer means that no witness was reached from the given seeds.
pub fn n_membership(
    fam: &FamilyOfFunctions,
    base: &[f64],
    covector: &Covector,
    seeds: &[Vec<f64>],
    cfg: &SolverConfig,
) -> Result<MembershipResult> {
    check_dim(fam.base_dim(), base.len())?;
    check_dim(fam.base_dim(), covector.dim())?;
    let mut target = covector.0.clone();
    target.resize(fam.total_dim(), 0.0);
    let cond = Conditions {
        constraints: fam.constraints.iter().cloned().collect(),
        rows: (0..fam.total_dim()).collect(),
        target,
        sign: 1.0,
    };
    Ok(cond.search(fam, base, seeds, cfg))
}

/// Worst relative disagreement between the gradient in use and central differences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientCheck {
    pub max_relative_error: f64,
    pub worst_point: Option<Vec<f64>>,
    pub points: usize,
}

pub fn check_gradient(fam: &FamilyOfFunctions, points: &[Vec<f64>]) -> Result<GradientCheck> {
    let mut worst = 0.0;
    let mut worst_point = None;
    for x in points {
        fam.require_domain(x)?;
        let ga = fam.gradient_at(x);
        let gf = fd_gradient_richardson(&|y| fam.value_unchecked(y), x);
        let diff = inf_norm(&ga.iter().zip(&gf).map(|(a, b)| a - b).collect::<Vec<_>>());
        let scale = inf_norm(&ga).max(inf_norm(&gf));
        let rel = if scale < 1e-300 { 0.0 } else { diff / scale };
        if rel > worst || !rel.is_finite() {
            worst = if rel.is_finite() { rel } else { f64::INFINITY };
            worst_point = Some(x.clone());
        }
    }
    Ok(GradientCheck { max_relative_error: worst, worst_point, points: points.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minkowski::MinkowskiSpace;

    fn optics_family() -> FamilyOfFunctions {
        let g = MinkowskiSpace::standard(4);
        let g2 = g.clone();
        FamilyOfFunctions::new(8, 1, move |x| g.quad_v(&x[4..8]) / (2.0 * x[8]))
            .with_domain(|x| x[8] > 0.0 && x[4..8].iter().any(|v| *v != 0.0))
            .with_gradient(move |x| {
                let mu = x[8];
                let gv = g2.lower(&x[4..8]);
                let mut out = vec![0.0; 9];
                for i in 0..4 {
                    out[4 + i] = gv[i] / mu;
                }
                out[8] = -g2.quad_v(&x[4..8]) / (2.0 * mu * mu);
                out
            })
    }

    fn optics_point(qdot: [f64; 4], mu: f64) -> Vec<f64> {
        let mut x = vec![0.3, -0.2, 1.0, 0.5];
        x.extend(qdot);
        x.push(mu);
        x
    }

    #[test]
    fn optics_vertical_gradient() {
        let fam = optics_family();
        let x = optics_point([2.0, 1.0, 0.0, 0.0], 1.5);
        let vg = vertical_gradient(&fam, &x).unwrap();
        assert!((vg[0] + 3.0 / (2.0 * 2.25)).abs() < 1e-15);
        assert!(matches!(vertical_gradient(&fam, &optics_point([1.0, 0.0, 0.0, 0.0], -1.0)), Err(Error::Domain(_))));
    }

    #[test]
    fn fiber_independent_family_has_zero_vertical_gradient() {
        let fam = FamilyOfFunctions::new(2, 2, |x| x[0] * x[1]);
        let vg = vertical_gradient(&fam, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!(vg.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn optics_null_base_keeps_seed() {
        let fam = optics_family();
        let cfg = SolverConfig::default();
        let x = optics_point([1.0, 1.0, 0.0, 0.0], 0.0);
        let cp = solve_critical(&fam, &x[..8], &[0.7], &cfg).unwrap().unwrap();
        assert_eq!(cp.fiber, vec![0.7]);
        assert!(cp.residual <= cfg.tolerance);
    }

    #[test]
    fn optics_timelike_base_has_no_critical_point() {
        let fam = optics_family();
        let cfg = SolverConfig::default();
        let x = optics_point([1.0, 0.0, 0.0, 0.0], 0.0);
        assert!(solve_critical(&fam, &x[..8], &[1.0], &cfg).unwrap().is_none());
    }

    #[test]
    fn seed_outside_domain_is_an_error() {
        let fam = optics_family();
        let x = optics_point([1.0, 1.0, 0.0, 0.0], 0.0);
        assert!(solve_critical(&fam, &x[..8], &[-1.0], &SolverConfig::default()).is_err());
    }

    #[test]
    fn optics_w_matrix_and_classification() {
        let fam = optics_family();
        let cfg = SolverConfig::default();
        let mu = 2.0;
        let x = optics_point([1.0, 1.0, 0.0, 0.0], mu);
        let cp = CriticalPoint { base: x[..8].to_vec(), fiber: vec![mu], residual: 0.0 };
        let w = w_matrix(&fam, &cp, &cfg).unwrap();
        assert_eq!(w.shape(), (1, 9));
        // -g(qdot)/mu^2 in the velocity columns, zero in the mu column
        let expected = [-1.0 / 4.0, 1.0 / 4.0, 0.0, 0.0];
        for i in 0..4 {
            assert!((w[(0, i)]).abs() < 1e-6);
            assert!((w[(0, 4 + i)] - expected[i]).abs() < 1e-6, "{w}");
        }
        assert!(w[(0, 8)].abs() < 1e-6);
        let c = classify_at(&fam, &cp, &cfg).unwrap();
        assert_eq!(c, Classification { rank: 1, morse_at_point: true });
    }

    #[test]
    fn quadratic_fiber_family() {
        let fam = FamilyOfFunctions::new(1, 1, |x| 0.5 * x[1] * x[1]);
        let cfg = SolverConfig::default();
        let cp = CriticalPoint { base: vec![0.3], fiber: vec![0.0], residual: 0.0 };
        let w = w_matrix(&fam, &cp, &cfg).unwrap();
        assert!((w[(0, 0)]).abs() < 1e-8 && (w[(0, 1)] - 1.0).abs() < 1e-6);
        let bad = CriticalPoint { base: vec![0.3], fiber: vec![1.0], residual: 0.0 };
        assert!(matches!(w_matrix(&fam, &bad, &cfg), Err(Error::Precondition(_))));
    }

    #[test]
    fn constant_family_is_not_morse() {
        let fam = FamilyOfFunctions::new(1, 2, |x| x[0]);
        let cfg = SolverConfig::default();
        let cp = CriticalPoint { base: vec![1.0], fiber: vec![0.0, 0.0], residual: 0.0 };
        assert_eq!(classify_at(&fam, &cp, &cfg).unwrap(), Classification { rank: 0, morse_at_point: false });
    }

    #[test]
    fn optics_kappa() {
        let fam = optics_family();
        let cfg = SolverConfig::default();
        let mu = 0.5;
        let x = optics_point([1.0, 1.0, 0.0, 0.0], mu);
        let cp = CriticalPoint { base: x[..8].to_vec(), fiber: vec![mu], residual: 0.0 };
        let k = kappa_map(&fam, &cp, &cfg).unwrap();
        let expected = [0.0, 0.0, 0.0, 0.0, 2.0, -2.0, 0.0, 0.0];
        for (a, b) in k.0.iter().zip(expected) {
            assert!((a - b).abs() < 1e-14);
        }
        let zero = FamilyOfFunctions::new(2, 1, |_| 0.0);
        let cp = CriticalPoint { base: vec![1.0, 2.0], fiber: vec![3.0], residual: 0.0 };
        assert!(kappa_map(&zero, &cp, &cfg).unwrap().0.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn optics_n_membership() {
        let fam = optics_family();
        let cfg = SolverConfig::default();
        let mu = 0.5;
        let x = optics_point([1.0, 1.0, 0.0, 0.0], mu);
        let cov = Covector(vec![0.0, 0.0, 0.0, 0.0, 2.0, -2.0, 0.0, 0.0]);
        let r = n_membership(&fam, &x[..8], &cov, &[vec![1.0]], &cfg).unwrap();
        assert!(r.member);
        assert!((r.witness.unwrap().fiber[0] - mu).abs() < 1e-8);

        // spacelike p is never g of a null vector
        let cov = Covector(vec![0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        let r = n_membership(&fam, &x[..8], &cov, &[vec![1.0], vec![0.1], vec![10.0]], &cfg).unwrap();
        assert!(!r.member);
    }

    #[test]
    fn function_case_is_graph_of_differential() {
        let fam = FamilyOfFunctions::function(2, |x| x[0] * x[0] + 3.0 * x[1]);
        let cfg = SolverConfig::default();
        let base = [1.5, -2.0];
        let on = Covector(vec![3.0, 3.0]);
        assert!(n_membership(&fam, &base, &on, &[], &cfg).unwrap().member);
        let off = Covector(vec![3.0, 2.9]);
        assert!(!n_membership(&fam, &base, &off, &[], &cfg).unwrap().member);
    }

    #[test]
    fn constrained_criticality_along_level() {
        // F = x + y on the fiber circle x^2 + y^2 = r^2 set by the level of the seed
        let fam = FamilyOfFunctions::new(1, 2, |x| x[1] + x[2]).with_gradient(|_| vec![0.0, 1.0, 1.0]);
        let radius = SmoothMap::new(1, |x| vec![x[1] * x[1] + x[2] * x[2]])
            .with_jacobian(|x| DMatrix::from_row_slice(1, 3, &[0.0, 2.0 * x[1], 2.0 * x[2]]));
        let cfg = SolverConfig::default();
        let cp = solve_critical_along(&fam, &[0.0], &[1.0, 0.2], &radius, &cfg).unwrap().unwrap();
        assert!((cp.fiber[0] - cp.fiber[1]).abs() < 1e-8);
        assert!((cp.fiber[0].powi(2) * 2.0 - 1.04).abs() < 1e-8);
    }

    #[test]
    fn gradient_check_detects_wrong_gradient() {
        let good = optics_family();
        let pts = vec![optics_point([1.0, 0.3, 0.1, 0.0], 0.7), optics_point([0.2, 1.0, -0.5, 2.0], 3.0)];
        assert!(check_gradient(&good, &pts).unwrap().max_relative_error < 1e-6);
        let bad = FamilyOfFunctions::new(1, 0, |x| x[0] * x[0]).with_gradient(|x| vec![x[0]]);
        assert!(check_gradient(&bad, &[vec![1.0]]).unwrap().max_relative_error > 0.1);
    }
}
