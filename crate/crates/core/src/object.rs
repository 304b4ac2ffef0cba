//! Generating objects: a special symplectic structure over `TT*Q`, a constraint
//! set in its base and a family of functions over the constraint set.

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bundle::{eval_dt_theta, eval_it_dtheta, TTStarQPoint, TTTStarQPoint};
use crate::error::{check_dim, Error, Result};
use crate::family::{
    gather, Conditions, FamilyOfFunctions, MembershipResult, Predicate, SmoothMap, SolverConfig, VectorFn,
};
use crate::linalg::{fd_jacobian, inf_norm, kernel_basis};
use crate::minkowski::{Covector, Point, Vector};

pub type Sampler = Arc<dyn Fn(&mut ChaCha8Rng) -> Vec<f64> + Send + Sync>;
pub type FiberSampler = Arc<dyn Fn(&mut ChaCha8Rng, &[f64]) -> Vec<f64> + Send + Sync>;

/// A submanifold `X` of a coordinate space: an open condition, optionally
/// intersected with the regular zero set of a defining map.
#[derive(Clone)]
pub struct ConstraintSet {
    ambient_dim: usize,
    open: Predicate,
    defining: Option<SmoothMap>,
    parametrization: Option<(usize, VectorFn)>,
}

impl fmt::Debug for ConstraintSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConstraintSet")
            .field("ambient_dim", &self.ambient_dim)
            .field("defining", &self.defining)
            .field("parametrized", &self.parametrization.is_some())
            .finish()
    }
}

impl ConstraintSet {
    /// The whole coordinate space.
    pub fn whole(ambient_dim: usize) -> Self {
        Self { ambient_dim, open: Arc::new(|_| true), defining: None, parametrization: None }
    }

    pub fn open(ambient_dim: usize, predicate: impl Fn(&[f64]) -> bool + Send + Sync + 'static) -> Self {
        Self { ambient_dim, open: Arc::new(predicate), defining: None, parametrization: None }
    }

    pub fn with_defining(mut self, c: SmoothMap) -> Self {
        self.defining = Some(c);
        self
    }

    pub fn with_parametrization(mut self, dim: usize, map: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        self.parametrization = Some((dim, Arc::new(map)));
        self
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn defining(&self) -> Option<&SmoothMap> {
        self.defining.as_ref()
    }

    pub fn in_open_part(&self, x: &[f64]) -> bool {
        x.len() == self.ambient_dim && (self.open)(x)
    }

    /// Sup norm of the defining map, zero without one.
    pub fn defining_residual(&self, x: &[f64]) -> f64 {
        self.defining.as_ref().map(|c| inf_norm(&c.eval(x))).unwrap_or(0.0)
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        self.in_open_part(x) && self.defining_residual(x) <= tol
    }

    /// Point of `X` with the given parameters, when a parametrization is known.
    pub fn point(&self, params: &[f64]) -> Option<Vec<f64>> {
        let (dim, map) = self.parametrization.as_ref()?;
        (params.len() == *dim).then(|| map(params))
    }

    pub fn parameter_dim(&self) -> Option<usize> {
        self.parametrization.as_ref().map(|(d, _)| *d)
    }

    pub(crate) fn open_fn(&self) -> Predicate {
        Arc::clone(&self.open)
    }
}

/// The two canonical special symplectic structures of `TT*Q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    /// Base `TQ`, one-form `d_T theta_Q`.
    Lagrangian,
    /// Base `T*Q`, one-form `i_T d theta_Q`.
    Hamiltonian,
}

impl Side {
    /// Projection of `w` to the base of the structure.
    pub fn base_point(self, w: &TTStarQPoint) -> Vec<f64> {
        match self {
            Side::Lagrangian => [w.q.as_slice(), w.qdot.as_slice()].concat(),
            Side::Hamiltonian => [w.q.as_slice(), w.p.as_slice()].concat(),
        }
    }

    /// The covector on the base representing the one-form at `w`.
    pub fn covector(self, w: &TTStarQPoint) -> Vec<f64> {
        match self {
            Side::Lagrangian => [w.pdot.as_slice(), w.p.as_slice()].concat(),
            Side::Hamiltonian => [w.pdot.as_slice(), w.qdot.scaled(-1.0).as_slice()].concat(),
        }
    }

    /// Evaluate the one-form on a variation of `w` whose base projection is `dbase`.
    pub fn evaluate(self, w: &TTStarQPoint, dbase: &[f64]) -> f64 {
        let n = w.dim();
        let mut x = TTTStarQPoint::zero_variation(w.clone());
        x.dq = Vector(dbase[..n].to_vec());
        match self {
            Side::Lagrangian => {
                x.dqdot = Vector(dbase[n..].to_vec());
                eval_dt_theta(&x)
            }
            Side::Hamiltonian => {
                x.dp = Covector(dbase[n..].to_vec());
                eval_it_dtheta(&x)
            }
        }
    }
}

/// A single structure, or the difference structure on a product `P2 x P1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Structure {
    Single(Side),
    Product { outer: Side, inner: Side },
}

impl Structure {
    pub fn base_dim(self, n: usize) -> usize {
        match self {
            Structure::Single(_) => 2 * n,
            Structure::Product { .. } => 4 * n,
        }
    }
}

/// Whether the family is `+F` or the negative `-H` of a Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FamilySign {
    Plus,
    Minus,
}

/// An element of `TT*Q`, or of `TT*Q x TT*Q` for product structures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum DynamicsCandidate {
    Single(TTStarQPoint),
    Product(TTStarQPoint, TTStarQPoint),
}

impl From<TTStarQPoint> for DynamicsCandidate {
    fn from(w: TTStarQPoint) -> Self {
        DynamicsCandidate::Single(w)
    }
}

#[derive(Clone, Debug)]
pub struct GeneratingObject {
    structure: Structure,
    dim: usize,
    constraint: ConstraintSet,
    family: FamilyOfFunctions,
    sign: FamilySign,
}

impl GeneratingObject {
    pub fn new(
        structure: Structure,
        dim: usize,
        constraint: ConstraintSet,
        family: FamilyOfFunctions,
        sign: FamilySign,
    ) -> Result<Self> {
        let base = structure.base_dim(dim);
        check_dim(base, constraint.ambient_dim())?;
        check_dim(base, family.base_dim())?;
        Ok(Self { structure, dim, constraint, family, sign })
    }

    /// `(TT*Q, d_T theta) <- TQ <- C` with the family `+L`.
    pub fn lagrangian(dim: usize, constraint: ConstraintSet, family: FamilyOfFunctions) -> Result<Self> {
        Self::new(Structure::Single(Side::Lagrangian), dim, constraint, family, FamilySign::Plus)
    }

    /// `(TT*Q, i_T d theta) <- T*Q <- K` with the family `-H` (pass `-H`).
    pub fn hamiltonian(dim: usize, constraint: ConstraintSet, family: FamilyOfFunctions) -> Result<Self> {
        Self::new(Structure::Single(Side::Hamiltonian), dim, constraint, family, FamilySign::Minus)
    }

    pub fn structure(&self) -> Structure {
        self.structure
    }

    /// Dimension of `Q`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn constraint(&self) -> &ConstraintSet {
        &self.constraint
    }

    pub fn family(&self) -> &FamilyOfFunctions {
        &self.family
    }

    pub fn sign(&self) -> FamilySign {
        self.sign
    }

    pub fn base_dim(&self) -> usize {
        self.structure.base_dim(self.dim)
    }

    /// Base projection and one-form covector of a candidate.
    fn project(&self, w: &DynamicsCandidate) -> Result<(Vec<f64>, Vec<f64>)> {
        match (self.structure, w) {
            (Structure::Single(s), DynamicsCandidate::Single(w)) => {
                check_dim(self.dim, w.dim())?;
                Ok((s.base_point(w), s.covector(w)))
            }
            (Structure::Product { outer, inner }, DynamicsCandidate::Product(w2, w1)) => {
                check_dim(self.dim, w2.dim())?;
                check_dim(self.dim, w1.dim())?;
                let base = [outer.base_point(w2), inner.base_point(w1)].concat();
                let psi1: Vec<f64> = inner.covector(w1).iter().map(|v| -v).collect();
                Ok((base, [outer.covector(w2), psi1].concat()))
            }
            _ => Err(Error::InvalidArgument("candidate does not match the structure".into())),
        }
    }

    fn evaluate_form(&self, w: &DynamicsCandidate, dbase: &[f64]) -> f64 {
        match (self.structure, w) {
            (Structure::Single(s), DynamicsCandidate::Single(w)) => s.evaluate(w, dbase),
            (Structure::Product { outer, inner }, DynamicsCandidate::Product(w2, w1)) => {
                let h = 2 * self.dim;
                outer.evaluate(w2, &dbase[..h]) - inner.evaluate(w1, &dbase[h..])
            }
            _ => f64::NAN,
        }
    }

    /// Constraint maps on the total space: the defining map of `X` and those of the family.
    pub(crate) fn total_constraints(&self) -> Vec<SmoothMap> {
        let total = self.family.total_dim();
        let mut out = Vec::new();
        if let Some(c) = self.constraint.defining() {
            out.push(c.reindexed((0..self.base_dim()).collect(), total));
        }
        out.extend(self.family.constraints().cloned());
        out
    }
}

/// Membership of `w` in the Lagrangian submanifold generated by `go`.
///
/// The fiber witness is searched from `seeds`; a candidate is accepted only if
/// the stationarity residual vanishes and the pairing identity
/// `<theta, x> = <dF, z>` holds on a basis of the admissible variations.
pub fn a_membership(
    go: &GeneratingObject,
    w: &DynamicsCandidate,
    seeds: &[Vec<f64>],
    cfg: &SolverConfig,
) -> Result<MembershipResult> {
    let (base, psi) = go.project(w)?;
    if !go.constraint.contains(&base, cfg.tolerance * (1.0 + inf_norm(&base))) {
        return Ok(MembershipResult::rejected(f64::INFINITY, 0));
    }
    let fam = &go.family;
    let mut target = psi.clone();
    target.resize(fam.total_dim(), 0.0);
    let cond = Conditions { constraints: go.total_constraints(), rows: (0..fam.total_dim()).collect(), target, sign: 1.0 };
    let mut result = cond.search(fam, &base, seeds, cfg);
    if let Some(cp) = &result.witness {
        let x = cp.total();
        let worst = pairing_defect(go, &cond, w, &x, cfg);
        let bound = cond.threshold(cfg) * (fam.total_dim() as f64).sqrt() * 10.0;
        if worst > bound {
            result = MembershipResult::rejected(worst, result.seeds_tried);
        }
    }
    Ok(result)
}

/// Largest `|<theta, x> - <dF, z>|` over an orthonormal basis `z` of `T_r R`.
fn pairing_defect(go: &GeneratingObject, cond: &Conditions, w: &DynamicsCandidate, x: &[f64], cfg: &SolverConfig) -> f64 {
    let n = x.len();
    let jac = stacked_jacobian(&cond.constraints, x);
    let basis = kernel_basis(&jac, n, cfg.rank_threshold);
    let grad = go.family.gradient_at(x);
    let b = go.base_dim();
    let mut worst: f64 = 0.0;
    for c in 0..basis.ncols() {
        let z: Vec<f64> = basis.column(c).iter().copied().collect();
        let df: f64 = grad.iter().zip(&z).map(|(g, v)| g * v).sum();
        let theta = go.evaluate_form(w, &z[..b]);
        worst = worst.max((theta - df).abs());
    }
    worst
}

fn stacked_jacobian(parts: &[SmoothMap], x: &[f64]) -> DMatrix<f64> {
    let m: usize = parts.iter().map(|c| c.count).sum();
    let mut j = DMatrix::zeros(m, x.len());
    let mut row = 0;
    for c in parts {
        j.view_mut((row, 0), (c.count, x.len())).copy_from(&c.jacobian_at(x));
        row += c.count;
    }
    j
}

/// Composition of a generating object of a relation `P1 -> P2` with a generating object on `P1`.
///
/// The result lives over the base of `P2` (and of `P0` when `go1` is itself a
/// relation). Its total space has coordinates `[x2, x0, x1, phi21, phi1]`,
/// with base `[x2, x0]`; the matching point `x1` of `Q1` becomes a fiber
/// variable and the family is `F21 + F1`.
pub fn compose(go21: &GeneratingObject, go1: &GeneratingObject) -> Result<GeneratingObject> {
    let Structure::Product { outer: s2, inner: s1 } = go21.structure else {
        return Err(Error::InvalidArgument("the left factor must generate a relation".into()));
    };
    check_dim(go21.dim, go1.dim)?;
    let n = go21.dim;
    let (structure, b0) = match go1.structure {
        Structure::Single(s) if s == s1 => (Structure::Single(s2), 0),
        Structure::Product { outer, inner } if outer == s1 => (Structure::Product { outer: s2, inner }, 2 * n),
        _ => return Err(Error::InvalidArgument("structures of the factors do not match".into())),
    };
    let (b2, b1) = (2 * n, 2 * n);
    let f21 = go21.family.fiber_dim();
    let f1 = go1.family.fiber_dim();
    let base_dim = b2 + b0;
    let fiber_dim = b1 + f21 + f1;
    let total = base_dim + fiber_dim;
    let o1 = base_dim;
    let o21 = o1 + b1;
    let of1 = o21 + f21;
    let idx21: Vec<usize> = (0..b2).chain(o1..o1 + b1).chain(o21..o21 + f21).collect();
    let idx1: Vec<usize> = (o1..o1 + b1).chain(b2..b2 + b0).chain(of1..of1 + f1).collect();
    let n21 = b2 + b1;
    let n1 = b1 + b0;

    let fam21 = go21.family.clone();
    let fam1 = go1.family.clone();
    let (i21, i1) = (Arc::new(idx21.clone()), Arc::new(idx1.clone()));

    let value = {
        let (fam21, fam1, i21, i1) = (fam21.clone(), fam1.clone(), i21.clone(), i1.clone());
        move |x: &[f64]| fam21.value_unchecked(&gather(x, &i21)) + fam1.value_unchecked(&gather(x, &i1))
    };
    let gradient = {
        let (fam21, fam1, i21, i1) = (fam21.clone(), fam1.clone(), i21.clone(), i1.clone());
        move |x: &[f64]| {
            let mut g = vec![0.0; x.len()];
            for (k, v) in fam21.gradient_at(&gather(x, &i21)).into_iter().enumerate() {
                g[i21[k]] += v;
            }
            for (k, v) in fam1.gradient_at(&gather(x, &i1)).into_iter().enumerate() {
                g[i1[k]] += v;
            }
            g
        }
    };
    let hessian = {
        let (fam21, fam1, i21, i1) = (fam21.clone(), fam1.clone(), i21.clone(), i1.clone());
        move |x: &[f64]| {
            let mut h = DMatrix::zeros(x.len(), x.len());
            for (idx, fam) in [(&i21, &fam21), (&i1, &fam1)] {
                let local = fam.hessian_at(&gather(x, idx));
                for a in 0..idx.len() {
                    for b in 0..idx.len() {
                        h[(idx[a], idx[b])] += local[(a, b)];
                    }
                }
            }
            h
        }
    };
    let domain = {
        let (open21, open1) = (go21.constraint.open_fn(), go1.constraint.open_fn());
        move |x: &[f64]| {
            let y21 = gather(x, &i21);
            let y1 = gather(x, &i1);
            fam21.in_domain(&y21) && open21(&y21[..n21]) && fam1.in_domain(&y1) && open1(&y1[..n1])
        }
    };

    let mut parts = Vec::new();
    if let Some(c) = go21.constraint.defining() {
        parts.push(c.reindexed(idx21[..n21].to_vec(), total));
    }
    if let Some(c) = go21.family.constraints() {
        parts.push(c.reindexed(idx21.clone(), total));
    }
    if let Some(c) = go1.constraint.defining() {
        parts.push(c.reindexed(idx1[..n1].to_vec(), total));
    }
    if let Some(c) = go1.family.constraints() {
        parts.push(c.reindexed(idx1.clone(), total));
    }
    let constraints = SmoothMap::stacked(parts, total);

    let family = FamilyOfFunctions::from_parts(
        base_dim,
        fiber_dim,
        Arc::new(domain),
        Arc::new(value),
        Some(Arc::new(gradient)),
        Some(Arc::new(hessian)),
        constraints,
    );
    let sign = match structure {
        Structure::Single(Side::Hamiltonian) => FamilySign::Minus,
        _ => FamilySign::Plus,
    };
    GeneratingObject::new(structure, n, ConstraintSet::whole(base_dim), family, sign)
}

/// Data for eliminating fiber variables along a section of the critical set.
///
/// Reduced total-space coordinates are `[x, phi~]` with the same base `x`.
#[derive(Clone)]
pub struct SectionReduction {
    pub reduced_fiber_dim: usize,
    pub reduced_domain: Predicate,
    /// New constraint set in the base; `None` keeps the original one.
    pub reduced_constraint: Option<ConstraintSet>,
    /// `sigma`: reduced total space to total space.
    pub section: SmoothMap,
    /// `rho'`: total space to reduced total space, with `rho' o sigma = id`.
    pub projection: SmoothMap,
    /// Random points of the reduced total space used for verification.
    pub sampler: Sampler,
    pub samples: usize,
    pub seed: u64,
}

/// Data for passing to a quotient of the critical set of a finer projection.
///
/// `projection` is `rho'` from the total space onto the coordinates `[x, phi']`
/// of an intermediate space; the reduced total space is a subset of it.
#[derive(Clone)]
pub struct FibrationReduction {
    pub projection: SmoothMap,
    pub reduced_fiber_dim: usize,
    pub reduced_domain: Predicate,
    pub reduced_constraint: ConstraintSet,
    /// A point of the total space over each reduced point, inside the critical set.
    pub lift: SmoothMap,
    /// Random points of the reduced total space.
    pub base_sampler: Sampler,
    /// Random points of the critical set over a reduced point.
    pub fiber_sampler: FiberSampler,
    pub samples: usize,
    pub fiber_samples: usize,
    pub seed: u64,
}

/// Residual of `rho'`-criticality: the part of `dF` seen by `ker D rho' cap ker Dc`.
fn projection_criticality(go: &GeneratingObject, projection: &SmoothMap, x: &[f64], cfg: &SolverConfig) -> f64 {
    let mut parts = vec![projection.clone()];
    parts.extend(go.family.constraints().cloned());
    let jac = stacked_jacobian(&parts, x);
    let basis = kernel_basis(&jac, x.len(), cfg.rank_threshold);
    let grad = go.family.gradient_at(x);
    let scale = 1.0 + inf_norm(&grad);
    let mut worst: f64 = 0.0;
    for c in 0..basis.ncols() {
        let d: f64 = basis.column(c).iter().zip(&grad).map(|(v, g)| v * g).sum();
        worst = worst.max(d.abs() / scale);
    }
    worst
}

fn chained_family(
    go: &GeneratingObject,
    reduced_fiber_dim: usize,
    reduced_domain: Predicate,
    map: &SmoothMap,
) -> FamilyOfFunctions {
    let fam = go.family.clone();
    let (f1, f2, f3) = (fam.clone(), fam.clone(), fam);
    let (m1, m2, m3) = (map.clone(), map.clone(), map.clone());
    let value = move |y: &[f64]| f1.value_unchecked(&m1.eval(y));
    let gradient = move |y: &[f64]| {
        let x = m2.eval(y);
        let d = m2.jacobian_at(y);
        let g = nalgebra::DVector::from_vec(f2.gradient_at(&x));
        (d.transpose() * g).iter().copied().collect()
    };
    let domain = move |y: &[f64]| reduced_domain(y) && f3.in_domain(&m3.eval(y));
    let reduced = FamilyOfFunctions::new(go.base_dim(), reduced_fiber_dim, value)
        .with_gradient(gradient)
        .with_domain(domain);
    let total = reduced.total_dim();
    let g = reduced.clone();
    reduced.with_hessian(move |y: &[f64]| {
        let j = fd_jacobian(&|z| g.gradient_at(z), y, total);
        (&j + j.transpose()) * 0.5
    })
}

fn sample_in(sampler: &Sampler, rng: &mut ChaCha8Rng, domain: &Predicate, dim: usize) -> Result<Vec<f64>> {
    for _ in 0..1000 {
        let y = sampler(rng);
        if y.len() == dim && domain(&y) {
            return Ok(y);
        }
    }
    Err(Error::InvalidArgument("sampler does not produce points of the domain".into()))
}

/// Replace the family by `F o sigma` after checking that `sigma` parametrizes
/// `rho'`-critical points.
pub fn reduce_by_section(go: &GeneratingObject, red: &SectionReduction, cfg: &SolverConfig) -> Result<GeneratingObject> {
    let fam = go.family();
    let reduced_total = go.base_dim() + red.reduced_fiber_dim;
    let mut rng = ChaCha8Rng::seed_from_u64(red.seed);
    let mut worst = (0.0f64, String::from("section"));
    let mut note = |value: f64, what: &str| {
        if value > worst.0 || !value.is_finite() {
            worst = (if value.is_finite() { value } else { f64::INFINITY }, what.to_string());
        }
    };
    for _ in 0..red.samples {
        let y = sample_in(&red.sampler, &mut rng, &red.reduced_domain, reduced_total)?;
        let x = red.section.eval(&y);
        if x.len() != fam.total_dim() || !fam.in_domain(&x) {
            note(f64::INFINITY, "section leaves the total space");
            continue;
        }
        let c = fam.constraints().map(|c| inf_norm(&c.eval(&x))).unwrap_or(0.0);
        note(c / (1.0 + inf_norm(&x)), "section violates the constraints of the total space");
        if red.reduced_constraint.is_none() {
            let base = &x[..go.base_dim()];
            if !go.constraint.in_open_part(base) {
                note(f64::INFINITY, "section leaves the constraint set");
            }
            note(go.constraint.defining_residual(base), "section leaves the constraint set");
        }
        let back = red.projection.eval(&x);
        let defect = back.iter().zip(&y).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        note(defect / (1.0 + inf_norm(&y)), "projection is not a left inverse of the section");
        note(projection_criticality(go, &red.projection, &x, cfg), "section image is not critical");
    }
    if worst.0 > cfg.tolerance {
        return Err(Error::Verification { what: worst.1, worst_residual: worst.0 });
    }
    let family = chained_family(go, red.reduced_fiber_dim, Arc::clone(&red.reduced_domain), &red.section);
    let constraint = red.reduced_constraint.clone().unwrap_or_else(|| go.constraint.clone());
    GeneratingObject::new(go.structure, go.dim, constraint, family, go.sign)
}

/// Pass to the family induced on the image of the `rho'`-critical set, after
/// checking on sampled fibers that `F` is constant there.
///
/// The result generates a set containing the one generated by `go`.
pub fn reduce_by_fibration(
    go: &GeneratingObject,
    red: &FibrationReduction,
    cfg: &SolverConfig,
) -> Result<GeneratingObject> {
    let fam = go.family();
    let reduced_total = go.base_dim() + red.reduced_fiber_dim;
    check_dim(go.base_dim(), red.reduced_constraint.ambient_dim())?;
    let mut rng = ChaCha8Rng::seed_from_u64(red.seed);
    let mut worst = (0.0f64, String::from("fibration"));
    let mut note = |value: f64, what: &str| {
        if value > worst.0 || !value.is_finite() {
            worst = (if value.is_finite() { value } else { f64::INFINITY }, what.to_string());
        }
    };
    for _ in 0..red.samples {
        let y = sample_in(&red.base_sampler, &mut rng, &red.reduced_domain, reduced_total)?;
        let base = &y[..go.base_dim()];
        let tol = cfg.tolerance * (1.0 + inf_norm(base));
        if !red.reduced_constraint.contains(base, tol) {
            note(f64::INFINITY, "reduced point outside the reduced constraint set");
        }
        let lifted = red.lift.eval(&y);
        if !fam.in_domain(&lifted) {
            note(f64::INFINITY, "lift leaves the total space");
            continue;
        }
        let reference = fam.value_unchecked(&lifted);
        for k in 0..=red.fiber_samples {
            let x = if k == 0 { lifted.clone() } else { (red.fiber_sampler)(&mut rng, &y) };
            if !fam.in_domain(&x) {
                note(f64::INFINITY, "fiber sample outside the total space");
                continue;
            }
            let c = fam.constraints().map(|c| inf_norm(&c.eval(&x))).unwrap_or(0.0);
            note(c / (1.0 + inf_norm(&x)), "fiber sample violates the constraints");
            let image = red.projection.eval(&x);
            let defect = image.iter().zip(&y).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            note(defect / (1.0 + inf_norm(&y)), "fiber sample does not project to the reduced point");
            note(projection_criticality(go, &red.projection, &x, cfg), "fiber sample is not critical");
            let v = fam.value_unchecked(&x);
            note((v - reference).abs() / (1.0 + reference.abs()), "family is not constant on the fiber");
        }
    }
    if worst.0 > cfg.tolerance {
        return Err(Error::Verification { what: worst.1, worst_residual: worst.0 });
    }
    let family = chained_family(go, red.reduced_fiber_dim, Arc::clone(&red.reduced_domain), &red.lift);
    GeneratingObject::new(go.structure, go.dim, red.reduced_constraint.clone(), family, go.sign)
}

/// Assemble a `TT*Q` point from coordinate slices.
pub fn tts(q: &[f64], p: &[f64], qdot: &[f64], pdot: &[f64]) -> TTStarQPoint {
    TTStarQPoint::new(Point(q.to_vec()), Covector(p.to_vec()), Vector(qdot.to_vec()), Covector(pdot.to_vec()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minkowski::MinkowskiSpace;

    /// `L = <g(qdot), qdot> / 2` on all of `TQ`.
    fn quadratic_lagrangian(n: usize) -> GeneratingObject {
        let g = MinkowskiSpace::standard(n);
        let g2 = g.clone();
        let fam = FamilyOfFunctions::function(2 * n, move |x| 0.5 * g.quad_v(&x[n..]))
            .with_gradient(move |x| [vec![0.0; n], g2.lower(&x[n..])].concat());
        GeneratingObject::lagrangian(n, ConstraintSet::whole(2 * n), fam).unwrap()
    }

    #[test]
    fn constraint_set_membership() {
        let c = ConstraintSet::open(2, |x| x[0] > 0.0)
            .with_defining(SmoothMap::new(1, |x| vec![x[0] * x[0] + x[1] * x[1] - 1.0]))
            .with_parametrization(1, |t| vec![t[0].cos(), t[0].sin()]);
        assert!(c.contains(&[1.0, 0.0], 1e-12));
        assert!(!c.contains(&[-1.0, 0.0], 1e-12));
        assert!(!c.contains(&[0.5, 0.0], 1e-12));
        let p = c.point(&[0.3]).unwrap();
        assert!(c.contains(&p, 1e-12));
    }

    #[test]
    fn quadratic_lagrangian_dynamics() {
        let go = quadratic_lagrangian(2);
        let cfg = SolverConfig::default();
        // p = g(qdot), pdot = 0
        let w = tts(&[0.1, 0.2], &[2.0, -1.0], &[2.0, 1.0], &[0.0, 0.0]);
        assert!(a_membership(&go, &w.into(), &[], &cfg).unwrap().member);
        let w = tts(&[0.1, 0.2], &[2.0, -1.0], &[2.0, 1.0], &[0.0, 0.5]);
        assert!(!a_membership(&go, &w.into(), &[], &cfg).unwrap().member);
        let w = tts(&[0.1, 0.2], &[2.0, 1.0], &[2.0, 1.0], &[0.0, 0.0]);
        assert!(!a_membership(&go, &w.into(), &[], &cfg).unwrap().member);
    }

    #[test]
    fn candidate_shape_must_match() {
        let go = quadratic_lagrangian(2);
        let w = tts(&[0.1, 0.2], &[2.0, -1.0], &[2.0, 1.0], &[0.0, 0.0]);
        let pair = DynamicsCandidate::Product(w.clone(), w);
        assert!(a_membership(&go, &pair, &[], &SolverConfig::default()).is_err());
    }

    #[test]
    fn compose_rejects_non_relation() {
        let go = quadratic_lagrangian(2);
        assert!(matches!(compose(&go, &go), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn section_off_critical_set_is_rejected() {
        // F(x; a, b) = a^2 + b, eliminate a by the non-critical section a = 1
        let fam = FamilyOfFunctions::new(2, 2, |x| x[2] * x[2] + x[3]).with_gradient(|x| vec![0.0, 0.0, 2.0 * x[2], 1.0]);
        let go = GeneratingObject::lagrangian(1, ConstraintSet::whole(2), fam).unwrap();
        let make = |a: f64| SectionReduction {
            reduced_fiber_dim: 1,
            reduced_domain: Arc::new(|_| true),
            reduced_constraint: None,
            section: SmoothMap::new(4, move |y| vec![y[0], y[1], a, y[2]]),
            projection: SmoothMap::new(3, |x| vec![x[0], x[1], x[3]])
                .with_jacobian(|_| DMatrix::from_row_slice(3, 4, &[1., 0., 0., 0., 0., 1., 0., 0., 0., 0., 0., 1.])),
            sampler: Arc::new(|rng: &mut ChaCha8Rng| {
                use rand::Rng;
                (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect()
            }),
            samples: 20,
            seed: 7,
        };
        let cfg = SolverConfig::default();
        let err = reduce_by_section(&go, &make(1.0), &cfg).unwrap_err();
        match err {
            Error::Verification { worst_residual, .. } => assert!(worst_residual > 0.1),
            other => panic!("unexpected {other:?}"),
        }
        let ok = reduce_by_section(&go, &make(0.0), &cfg).unwrap();
        let v = ok.family().value(&[0.0, 0.0, 3.0]).unwrap();
        assert_eq!(v, 3.0);
    }
}
