//! Lagrangian and Hamiltonian systems, the Legendre transformations between
//! them and the Legendre relations.

use nalgebra::DMatrix;

use crate::bundle::{TQPoint, TStarQPoint};
use crate::error::{check_dim, Error, Result};
use crate::family::{Conditions, FamilyOfFunctions, MembershipResult, SmoothMap, SolverConfig};
use crate::linalg::{fd_jacobian, inf_norm, kernel_basis, numerical_rank};
use crate::object::{compose, ConstraintSet, FamilySign, GeneratingObject, Side, Structure};

/// A generating object over `(TT*Q, d_T theta_Q)` with family `+L`.
#[derive(Clone, Debug)]
pub struct LagrangianSystem {
    object: GeneratingObject,
}

/// A generating object over `(TT*Q, i_T d theta_Q)` whose family is `-H`.
#[derive(Clone, Debug)]
pub struct HamiltonianSystem {
    object: GeneratingObject,
}

impl LagrangianSystem {
    pub fn new(object: GeneratingObject) -> Result<Self> {
        if object.structure() != Structure::Single(Side::Lagrangian) || object.sign() != FamilySign::Plus {
            return Err(Error::InvalidArgument("not a Lagrangian generating object".into()));
        }
        Ok(Self { object })
    }

    /// `C` with a family `L: Y -> R` over it.
    pub fn from_parts(dim: usize, constraint: ConstraintSet, family: FamilyOfFunctions) -> Result<Self> {
        Self::new(GeneratingObject::lagrangian(dim, constraint, family)?)
    }

    pub fn object(&self) -> &GeneratingObject {
        &self.object
    }

    pub fn dim(&self) -> usize {
        self.object.dim()
    }

    /// `L(y)` at a point of the total space `Y`.
    pub fn lagrangian(&self, y: &[f64]) -> Result<f64> {
        self.object.family().value(y)
    }
}

impl HamiltonianSystem {
    pub fn new(object: GeneratingObject) -> Result<Self> {
        if object.structure() != Structure::Single(Side::Hamiltonian) || object.sign() != FamilySign::Minus {
            return Err(Error::InvalidArgument("not a Hamiltonian generating object".into()));
        }
        Ok(Self { object })
    }

    /// `K` with a family over it; `negated_h` is the family `-H`.
    pub fn from_parts(dim: usize, constraint: ConstraintSet, negated_h: FamilyOfFunctions) -> Result<Self> {
        Self::new(GeneratingObject::hamiltonian(dim, constraint, negated_h)?)
    }

    pub fn object(&self) -> &GeneratingObject {
        &self.object
    }

    pub fn dim(&self) -> usize {
        self.object.dim()
    }

    /// `H(z)`, the negative of the stored family.
    pub fn hamiltonian(&self, z: &[f64]) -> Result<f64> {
        Ok(-self.object.family().value(z)?)
    }
}

fn matching_constraint(n: usize) -> SmoothMap {
    SmoothMap::new(n, move |x| (0..n).map(|i| x[i] - x[2 * n + i]).collect()).with_jacobian(move |_| {
        let mut j = DMatrix::zeros(n, 4 * n);
        for i in 0..n {
            j[(i, i)] = 1.0;
            j[(i, 2 * n + i)] = -1.0;
        }
        j
    })
}

/// Bilinear pairing family `s <x[o1..], x[o2..]>` on a `4n` base, with constant Hessian.
fn pairing_family(n: usize, o1: usize, o2: usize, s: f64) -> FamilyOfFunctions {
    FamilyOfFunctions::function(4 * n, move |x| s * (0..n).map(|i| x[o1 + i] * x[o2 + i]).sum::<f64>())
        .with_gradient(move |x| {
            let mut g = vec![0.0; 4 * n];
            for i in 0..n {
                g[o1 + i] = s * x[o2 + i];
                g[o2 + i] = s * x[o1 + i];
            }
            g
        })
        .with_hessian(move |_| {
            let mut h = DMatrix::zeros(4 * n, 4 * n);
            for i in 0..n {
                h[(o1 + i, o2 + i)] = s;
                h[(o2 + i, o1 + i)] = s;
            }
            h
        })
}

/// The generating object of the identity of `TT*Q`, read as a relation from
/// the Lagrangian to the Hamiltonian structure.
///
/// Base `T*Q x TQ` with coordinates `[q, p, q', v]`, constraint `q = q'`,
/// family `-<p, v>`.
pub fn legendre_object(n: usize) -> GeneratingObject {
    let constraint = ConstraintSet::whole(4 * n).with_defining(matching_constraint(n));
    GeneratingObject::new(
        Structure::Product { outer: Side::Hamiltonian, inner: Side::Lagrangian },
        n,
        constraint,
        pairing_family(n, n, 3 * n, -1.0),
        FamilySign::Plus,
    )
    .expect("dimensions are consistent by construction")
}

/// The generating object of the identity read in the opposite direction.
///
/// Base `TQ x T*Q` with coordinates `[q, v, q', p]`, constraint `q = q'`,
/// family `<p, v>`.
pub fn inverse_legendre_object(n: usize) -> GeneratingObject {
    let constraint = ConstraintSet::whole(4 * n).with_defining(matching_constraint(n));
    GeneratingObject::new(
        Structure::Product { outer: Side::Lagrangian, inner: Side::Hamiltonian },
        n,
        constraint,
        pairing_family(n, n, 3 * n, 1.0),
        FamilySign::Plus,
    )
    .expect("dimensions are consistent by construction")
}

/// The Hamiltonian system obtained by composing with [`legendre_object`].
///
/// Its total space has coordinates `[q, p, q', v, y_fiber]` and family
/// `-H = -<p, v> + L(q', v, y_fiber)` on `q = q'`.
pub fn legendre_transform(lag: &LagrangianSystem) -> Result<HamiltonianSystem> {
    HamiltonianSystem::new(compose(&legendre_object(lag.dim()), lag.object())?)
}

/// The Lagrangian system obtained by composing with [`inverse_legendre_object`].
///
/// Its total space has coordinates `[q, qdot, q', p, z_fiber]` and family
/// `L = <p, qdot> - H(q', p, z_fiber)` on `q = q'`.
pub fn inverse_legendre(ham: &HamiltonianSystem) -> Result<LagrangianSystem> {
    LagrangianSystem::new(compose(&inverse_legendre_object(ham.dim()), ham.object())?)
}

fn same_point(a: &[f64], b: &[f64], cfg: &SolverConfig) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= cfg.tolerance * (1.0 + x.abs()))
}

/// Conditions of a Legendre relation: stationarity in the fiber of the
/// total space, and `sign * dF = target` on the rows `n..2n` of the base
/// (velocity or momentum). Position rows are left free.
fn relation_conditions(go: &GeneratingObject, target: &[f64], sign: f64) -> Conditions {
    let n = go.dim();
    let fam = go.family();
    let mut full = vec![0.0; fam.total_dim()];
    full[n..2 * n].copy_from_slice(target);
    Conditions {
        constraints: go.total_constraints(),
        rows: (n..2 * n).chain(2 * n..fam.total_dim()).collect(),
        target: full,
        sign,
    }
}

fn base_admissible(go: &GeneratingObject, base: &[f64], cfg: &SolverConfig) -> bool {
    go.constraint().contains(base, cfg.tolerance * (1.0 + inf_norm(base)))
}

fn check_at(cond: &Conditions, go: &GeneratingObject, x: &[f64], cfg: &SolverConfig) -> MembershipResult {
    let fam = go.family();
    match cond.eval(fam, x, cfg) {
        Some(r) => {
            let norm = inf_norm(&r);
            if norm <= cond.threshold(cfg) {
                let (base, fiber) = x.split_at(fam.base_dim());
                let witness = crate::family::CriticalPoint { base: base.to_vec(), fiber: fiber.to_vec(), residual: norm };
                MembershipResult { member: true, witness: Some(witness), residual: norm, seeds_tried: 0 }
            } else {
                MembershipResult::rejected(norm, 0)
            }
        }
        None => MembershipResult::rejected(f64::INFINITY, 0),
    }
}

/// `(p, y)` in the graph of the first Legendre relation; `y` is a point of the total space `Y`.
pub fn lambda1_membership(lag: &LagrangianSystem, p: &TStarQPoint, y: &[f64], cfg: &SolverConfig) -> Result<MembershipResult> {
    let go = lag.object();
    let n = go.dim();
    check_dim(n, p.dim())?;
    check_dim(go.family().total_dim(), y.len())?;
    if !same_point(&p.q.0, &y[..n], cfg) || !base_admissible(go, &y[..2 * n], cfg) {
        return Ok(MembershipResult::rejected(f64::INFINITY, 0));
    }
    Ok(check_at(&relation_conditions(go, &p.p.0, 1.0), go, y, cfg))
}

/// `(p, v)` in the graph of the second Legendre relation; the fiber of `Y` over `v` is searched from `seeds`.
pub fn lambda2_membership(
    lag: &LagrangianSystem,
    p: &TStarQPoint,
    v: &TQPoint,
    seeds: &[Vec<f64>],
    cfg: &SolverConfig,
) -> Result<MembershipResult> {
    let go = lag.object();
    let n = go.dim();
    check_dim(n, p.dim())?;
    check_dim(n, v.dim())?;
    let base = v.coords();
    if !same_point(&p.q.0, &v.q.0, cfg) || !base_admissible(go, &base, cfg) {
        return Ok(MembershipResult::rejected(f64::INFINITY, 0));
    }
    Ok(relation_conditions(go, &p.p.0, 1.0).search(go.family(), &base, seeds, cfg))
}

/// `(v, z)` in the graph of the first inverse Legendre relation; `z` is a point of the total space `Z`.
pub fn omega1_membership(ham: &HamiltonianSystem, v: &TQPoint, z: &[f64], cfg: &SolverConfig) -> Result<MembershipResult> {
    let go = ham.object();
    let n = go.dim();
    check_dim(n, v.dim())?;
    check_dim(go.family().total_dim(), z.len())?;
    if !same_point(&v.q.0, &z[..n], cfg) || !base_admissible(go, &z[..2 * n], cfg) {
        return Ok(MembershipResult::rejected(f64::INFINITY, 0));
    }
    Ok(check_at(&relation_conditions(go, &v.qdot.0, -1.0), go, z, cfg))
}

/// `(v, p)` in the graph of the second inverse Legendre relation.
pub fn omega2_membership(
    ham: &HamiltonianSystem,
    v: &TQPoint,
    p: &TStarQPoint,
    seeds: &[Vec<f64>],
    cfg: &SolverConfig,
) -> Result<MembershipResult> {
    let go = ham.object();
    let n = go.dim();
    check_dim(n, p.dim())?;
    check_dim(n, v.dim())?;
    let base = p.coords();
    if !same_point(&p.q.0, &v.q.0, cfg) || !base_admissible(go, &base, cfg) {
        return Ok(MembershipResult::rejected(f64::INFINITY, 0));
    }
    Ok(relation_conditions(go, &v.qdot.0, -1.0).search(go.family(), &base, seeds, cfg))
}

/// Local test that the second Legendre relation is the graph of a
/// diffeomorphism near `(p, v)`.
///
/// The relation is linearized at fixed `q` in the unknowns `(qdot, p, y_fiber)`;
/// its tangent space must have dimension `n` and project onto both the
/// velocity and the momentum directions. Returns `false` when `(p, v)` is not
/// in the graph.
pub fn hyperregular_at(
    lag: &LagrangianSystem,
    p: &TStarQPoint,
    v: &TQPoint,
    seeds: &[Vec<f64>],
    cfg: &SolverConfig,
) -> Result<bool> {
    let hit = lambda2_membership(lag, p, v, seeds, cfg)?;
    let Some(witness) = hit.witness else {
        return Ok(false);
    };
    let go = lag.object();
    let fam = go.family();
    let n = go.dim();
    let q = v.q.0.clone();
    let f = fam.fiber_dim();
    let unknowns = [v.qdot.0.as_slice(), p.p.0.as_slice(), witness.fiber.as_slice()].concat();
    let probe = relation_conditions(go, &p.p.0, 1.0);
    let rows = probe.eval(fam, &witness.total(), cfg).map(|r| r.len()).unwrap_or(0);
    let equations = |u: &[f64]| -> Vec<f64> {
        let x = [q.as_slice(), &u[..n], &u[2 * n..]].concat();
        relation_conditions(go, &u[n..2 * n], 1.0)
            .eval(fam, &x, cfg)
            .unwrap_or_else(|| vec![f64::NAN; rows])
    };
    let jac = fd_jacobian(&equations, &unknowns, rows);
    if jac.iter().any(|v| !v.is_finite()) {
        return Ok(false);
    }
    let tangent = kernel_basis(&jac, 2 * n + f, cfg.rank_threshold);
    if tangent.ncols() != n {
        return Ok(false);
    }
    let velocity = tangent.rows(0, n).into_owned();
    let momentum = tangent.rows(n, n).into_owned();
    Ok(numerical_rank(&velocity, cfg.rank_threshold) == n && numerical_rank(&momentum, cfg.rank_threshold) == n)
}
