//! Light rays: `L(q, qdot, mu) = <g(qdot), qdot> / (2 mu)` with a positive multiplier `mu`.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{
    block_weights, random_null, random_offset, random_point, random_positive, random_spacelike, random_timelike,
    relative_gap, require_lorentzian, sampler, set_identity, FamilyFixture,
};
use crate::bundle::{TQPoint, TStarQPoint, TTStarQPoint};
use crate::error::Result;
use crate::family::{FamilyOfFunctions, SmoothMap, SolverConfig};
use crate::legendre::{inverse_legendre, legendre_transform, HamiltonianSystem, LagrangianSystem};
use crate::linalg::{inf_norm, two_norm};
use crate::minkowski::{Covector, MinkowskiSpace, Point, Vector};
use crate::object::{reduce_by_section, tts, ConstraintSet, SectionReduction};

#[derive(Debug, Clone)]
pub struct OpticsModel {
    space: MinkowskiSpace,
}

#[derive(Debug, Clone)]
pub struct OpticsSystems {
    pub lagrangian: LagrangianSystem,
    /// Total space `[q, p, q', v, mu]`, family `-<p, v> + <g(v), v> / (2 mu)` on `q = q'`.
    pub hamiltonian_full: HamiltonianSystem,
    /// Total space `[q, p, mu]`, `H = mu <p, g^{-1}(p)> / 2`.
    pub hamiltonian_reduced: HamiltonianSystem,
}

const REDUCTION_SAMPLES: usize = 64;

fn nonzero(x: &[f64]) -> bool {
    x.iter().any(|c| *c != 0.0)
}

impl OpticsModel {
    pub fn new(space: MinkowskiSpace) -> Result<Self> {
        require_lorentzian(&space)?;
        Ok(Self { space })
    }

    pub fn space(&self) -> &MinkowskiSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    /// `|<g(v), v>| <= tol * sum |d_i| v_i^2` and `v != 0`.
    pub fn is_null_vector(&self, v: &[f64], tol: f64) -> bool {
        let scale: f64 = v.iter().zip(self.space.diagonal()).map(|(x, d)| d.abs() * x * x).sum();
        v.len() == self.dim() && scale > 0.0 && self.space.quad_v(v).abs() <= tol * scale
    }

    pub fn is_null_covector(&self, p: &[f64], tol: f64) -> bool {
        p.len() == self.dim() && self.is_null_vector(&self.space.raise(p), tol)
    }

    /// The least-squares `mu` in `p = g(v) / mu`, when it is positive.
    pub fn fit_multiplier(&self, v: &[f64], p: &[f64]) -> Option<f64> {
        let gv = self.space.lower(v);
        let s: f64 = gv.iter().zip(p).map(|(a, b)| a * b).sum();
        let mu = gv.iter().map(|a| a * a).sum::<f64>() / s;
        (s > 0.0 && mu.is_finite()).then_some(mu)
    }

    pub fn reduced_hamiltonian(&self, p: &[f64], mu: f64) -> f64 {
        0.5 * mu * self.space.quad_p(p)
    }

    /// `C`: nonzero velocities.
    pub fn velocity_set(&self) -> ConstraintSet {
        let n = self.dim();
        ConstraintSet::open(2 * n, move |y| nonzero(&y[n..]))
    }

    /// `K~`: nonzero momenta.
    pub fn momentum_set(&self) -> ConstraintSet {
        let n = self.dim();
        ConstraintSet::open(2 * n, move |z| nonzero(&z[n..]))
    }

    pub fn lagrangian_family(&self) -> FamilyOfFunctions {
        let n = self.dim();
        let (g1, g2, g3) = (self.space.clone(), self.space.clone(), self.space.clone());
        FamilyOfFunctions::new(2 * n, 1, move |x| g1.quad_v(&x[n..2 * n]) / (2.0 * x[2 * n]))
            .with_domain(move |x| nonzero(&x[n..2 * n]) && x[2 * n] > 0.0)
            .with_gradient(move |x| {
                let (v, mu) = (&x[n..2 * n], x[2 * n]);
                let mut out = vec![0.0; n];
                out.extend(g2.lower(v).into_iter().map(|c| c / mu));
                out.push(-g2.quad_v(v) / (2.0 * mu * mu));
                out
            })
            .with_hessian(move |x| {
                let (v, mu) = (&x[n..2 * n], x[2 * n]);
                let gv = g3.lower(v);
                let mut h = DMatrix::zeros(2 * n + 1, 2 * n + 1);
                for i in 0..n {
                    h[(n + i, n + i)] = g3.diagonal()[i] / mu;
                    h[(n + i, 2 * n)] = -gv[i] / (mu * mu);
                    h[(2 * n, n + i)] = -gv[i] / (mu * mu);
                }
                h[(2 * n, 2 * n)] = g3.quad_v(v) / (mu * mu * mu);
                h
            })
    }

    pub fn lagrangian(&self) -> LagrangianSystem {
        LagrangianSystem::from_parts(self.dim(), self.velocity_set(), self.lagrangian_family())
            .expect("the optics Lagrangian has consistent dimensions")
    }

    pub fn hamiltonian_full(&self) -> Result<HamiltonianSystem> {
        legendre_transform(&self.lagrangian())
    }

    /// `xi(q, p, mu) = (q, p, q, mu g^{-1}(p), mu)` with `rho'(q, p, q', v, mu) = (q, p, mu)`.
    fn reduction(&self) -> SectionReduction {
        let n = self.dim();
        let (g1, g2, g3) = (self.space.clone(), self.space.clone(), self.space.clone());
        let section = SmoothMap::new(4 * n + 1, move |y| {
            let (q, p, mu) = (&y[..n], &y[n..2 * n], y[2 * n]);
            let v: Vec<f64> = g1.raise(p).into_iter().map(|c| mu * c).collect();
            [q, p, q, &v, &[mu]].concat()
        })
        .with_jacobian(move |y| {
            let (p, mu) = (&y[n..2 * n], y[2 * n]);
            let d = g2.diagonal();
            let mut j = DMatrix::zeros(4 * n + 1, 2 * n + 1);
            set_identity(&mut j, 0, 0, 2 * n);
            set_identity(&mut j, 2 * n, 0, n);
            for i in 0..n {
                j[(3 * n + i, n + i)] = mu / d[i];
                j[(3 * n + i, 2 * n)] = p[i] / d[i];
            }
            j[(4 * n, 2 * n)] = 1.0;
            j
        });
        let projection = SmoothMap::new(2 * n + 1, move |x| [&x[..2 * n], &[x[4 * n]]].concat()).with_jacobian(move |_| {
            let mut j = DMatrix::zeros(2 * n + 1, 4 * n + 1);
            set_identity(&mut j, 0, 0, 2 * n);
            j[(2 * n, 4 * n)] = 1.0;
            j
        });
        SectionReduction {
            reduced_fiber_dim: 1,
            reduced_domain: Arc::new(move |y| nonzero(&y[n..2 * n]) && y[2 * n] > 0.0),
            reduced_constraint: Some(self.momentum_set()),
            section,
            projection,
            sampler: sampler(move |rng| {
                let p = g3.lower(&random_timelike(&g3, rng));
                let p = if rng.gen_bool(0.5) { p } else { g3.lower(&random_spacelike(&g3, rng)) };
                [random_point(rng, n), p, vec![random_positive(rng, 0.2, 5.0)]].concat()
            }),
            samples: REDUCTION_SAMPLES,
            seed: 0x0971_c500,
        }
    }

    pub fn hamiltonian_reduced(&self, cfg: &SolverConfig) -> Result<HamiltonianSystem> {
        HamiltonianSystem::new(reduce_by_section(self.hamiltonian_full()?.object(), &self.reduction(), cfg)?)
    }

    pub fn systems(&self, cfg: &SolverConfig) -> Result<OpticsSystems> {
        let hamiltonian_full = self.hamiltonian_full()?;
        let hamiltonian_reduced =
            HamiltonianSystem::new(reduce_by_section(hamiltonian_full.object(), &self.reduction(), cfg)?)?;
        Ok(OpticsSystems { lagrangian: self.lagrangian(), hamiltonian_full, hamiltonian_reduced })
    }

    /// The inverse Legendre transform of the reduced system, with total
    /// space `[q, qdot, q'', p, mu]` and `L~ = <p, qdot> - mu <p, g^{-1}(p)> / 2`.
    pub fn inverse_composed(&self, cfg: &SolverConfig) -> Result<LagrangianSystem> {
        inverse_legendre(&self.hamiltonian_reduced(cfg)?)
    }

    /// [`Self::inverse_composed`] reduced along `(q, qdot, mu) -> (q, qdot, q, g(qdot) / mu, mu)`.
    pub fn inverse_round_trip(&self, cfg: &SolverConfig) -> Result<LagrangianSystem> {
        self.round_trip_from(&self.inverse_composed(cfg)?, cfg)
    }

    fn round_trip_from(&self, composed: &LagrangianSystem, cfg: &SolverConfig) -> Result<LagrangianSystem> {
        let n = self.dim();
        let (g1, g2, g3) = (self.space.clone(), self.space.clone(), self.space.clone());
        let section = SmoothMap::new(4 * n + 1, move |y| {
            let (q, v, mu) = (&y[..n], &y[n..2 * n], y[2 * n]);
            let p: Vec<f64> = g1.lower(v).into_iter().map(|c| c / mu).collect();
            [q, v, q, &p, &[mu]].concat()
        })
        .with_jacobian(move |y| {
            let (v, mu) = (&y[n..2 * n], y[2 * n]);
            let d = g2.diagonal();
            let mut j = DMatrix::zeros(4 * n + 1, 2 * n + 1);
            set_identity(&mut j, 0, 0, 2 * n);
            set_identity(&mut j, 2 * n, 0, n);
            for i in 0..n {
                j[(3 * n + i, n + i)] = d[i] / mu;
                j[(3 * n + i, 2 * n)] = -d[i] * v[i] / (mu * mu);
            }
            j[(4 * n, 2 * n)] = 1.0;
            j
        });
        let projection = SmoothMap::new(2 * n + 1, move |x| [&x[..2 * n], &[x[4 * n]]].concat()).with_jacobian(move |_| {
            let mut j = DMatrix::zeros(2 * n + 1, 4 * n + 1);
            set_identity(&mut j, 0, 0, 2 * n);
            j[(2 * n, 4 * n)] = 1.0;
            j
        });
        let red = SectionReduction {
            reduced_fiber_dim: 1,
            reduced_domain: Arc::new(move |y| nonzero(&y[n..2 * n]) && y[2 * n] > 0.0),
            reduced_constraint: Some(self.velocity_set()),
            section,
            projection,
            sampler: sampler(move |rng| {
                [random_point(rng, n), random_timelike(&g3, rng), vec![random_positive(rng, 0.2, 5.0)]].concat()
            }),
            samples: REDUCTION_SAMPLES,
            seed: 0x0971_c501,
        };
        LagrangianSystem::new(reduce_by_section(composed.object(), &red, cfg)?)
    }

    /// Scale-aware distance of `w` from the set
    /// `{ <g(qdot), qdot> = 0, p = g(qdot) / mu for some mu > 0, pdot = 0 }`, with `qdot != 0`.
    pub fn dynamics_residual(&self, w: &TTStarQPoint) -> f64 {
        if w.dim() != self.dim() || !nonzero(&w.qdot.0) {
            return f64::INFINITY;
        }
        let v = &w.qdot.0;
        let scale: f64 = v.iter().zip(self.space.diagonal()).map(|(x, d)| d.abs() * x * x).sum();
        let null = self.space.quad_v(v).abs() / scale;
        let Some(mu) = self.fit_multiplier(v, &w.p.0) else {
            return f64::INFINITY;
        };
        let expected: Vec<f64> = self.space.lower(v).into_iter().map(|c| c / mu).collect();
        null.max(relative_gap(&w.p.0, &expected)).max(inf_norm(&w.pdot.0) / (1.0 + inf_norm(&expected)))
    }

    pub fn dynamics_membership(&self, w: &TTStarQPoint, cfg: &SolverConfig) -> bool {
        self.dynamics_residual(w) <= cfg.tolerance
    }

    /// Graph of the first Legendre relation at `(p, y)` with `y = [q', qdot, mu]`:
    /// `q' = q`, `qdot` null and nonzero, `mu > 0`, `mu p = g(qdot)`.
    pub fn lambda1_graph_contains(&self, p: &TStarQPoint, y: &[f64], cfg: &SolverConfig) -> bool {
        let n = self.dim();
        if p.dim() != n || y.len() != 2 * n + 1 || relative_gap(&y[..n], &p.q.0) > cfg.tolerance {
            return false;
        }
        let (v, mu) = (&y[n..2 * n], y[2 * n]);
        if mu.is_nan() || mu <= 0.0 || !self.is_null_vector(v, cfg.tolerance) {
            return false;
        }
        let mup: Vec<f64> = p.p.0.iter().map(|c| mu * c).collect();
        relative_gap(&mup, &self.space.lower(v)) <= cfg.tolerance
    }

    /// Graph of the second Legendre relation: `q' = q`, `qdot` null and
    /// nonzero, `mu p = g(qdot)` for some `mu > 0`.
    pub fn lambda2_graph_contains(&self, p: &TStarQPoint, v: &TQPoint, cfg: &SolverConfig) -> bool {
        if p.dim() != self.dim() || v.dim() != self.dim() || relative_gap(&v.q.0, &p.q.0) > cfg.tolerance {
            return false;
        }
        match self.fit_multiplier(&v.qdot.0, &p.p.0) {
            Some(mu) => self.lambda1_graph_contains(p, &[v.coords(), vec![mu]].concat(), cfg),
            None => false,
        }
    }

    /// Graph of the first inverse Legendre relation of the reduced system at
    /// `(v, z)` with `z = [q', p, mu]`: `q' = q`, `p` null and nonzero, `qdot = mu g^{-1}(p)`.
    pub fn omega1_graph_contains(&self, v: &TQPoint, z: &[f64], cfg: &SolverConfig) -> bool {
        let n = self.dim();
        if v.dim() != n || z.len() != 2 * n + 1 || relative_gap(&z[..n], &v.q.0) > cfg.tolerance {
            return false;
        }
        let (p, mu) = (&z[n..2 * n], z[2 * n]);
        if mu.is_nan() || mu <= 0.0 || !self.is_null_covector(p, cfg.tolerance) {
            return false;
        }
        let expected: Vec<f64> = self.space.raise(p).into_iter().map(|c| mu * c).collect();
        relative_gap(&v.qdot.0, &expected) <= cfg.tolerance
    }

    /// Candidate multipliers for `p = g(qdot) / mu`.
    pub fn multiplier_seeds(&self, p: &[f64], qdot: &[f64]) -> Vec<f64> {
        let mut out = Vec::new();
        if let Some(mu) = self.fit_multiplier(qdot, p) {
            out.push(mu);
        }
        let (a, b) = (two_norm(&self.space.lower(qdot)), two_norm(p));
        if a > 0.0 && b > 0.0 {
            out.push(a / b);
        }
        out.push(1.0);
        out
    }

    /// Starting values `[mu]` in the fiber of the Lagrangian or the reduced Hamiltonian system.
    pub fn scalar_seeds(&self, p: &[f64], qdot: &[f64]) -> Vec<Vec<f64>> {
        self.multiplier_seeds(p, qdot).into_iter().map(|mu| vec![mu]).collect()
    }

    /// Starting points `[q', v, mu]` in the fiber of the full Hamiltonian system.
    pub fn full_seeds(&self, q: &[f64], p: &[f64], qdot: &[f64]) -> Vec<Vec<f64>> {
        let mut seeds = Vec::new();
        for mu in self.multiplier_seeds(p, qdot) {
            if nonzero(qdot) {
                seeds.push([q, qdot, &[mu]].concat());
            }
            if nonzero(p) {
                let v: Vec<f64> = self.space.raise(p).into_iter().map(|c| mu * c).collect();
                seeds.push([q, &v, &[mu]].concat());
            }
        }
        seeds
    }

    fn null_member(&self, rng: &mut ChaCha8Rng) -> (Vec<f64>, Vec<f64>, Vec<f64>, f64) {
        let n = self.dim();
        let qdot = random_null(&self.space, rng);
        let mu = random_positive(rng, 0.2, 5.0);
        let p = self.space.lower(&qdot).into_iter().map(|c| c / mu).collect();
        (random_point(rng, n), p, qdot, mu)
    }

    /// A point of the dynamics together with its multiplier.
    pub fn sample_member_with_multiplier(&self, rng: &mut ChaCha8Rng) -> (TTStarQPoint, f64) {
        let (q, p, qdot, mu) = self.null_member(rng);
        (tts(&q, &p, &qdot, &vec![0.0; self.dim()]), mu)
    }

    pub fn sample_member(&self, rng: &mut ChaCha8Rng) -> TTStarQPoint {
        self.sample_member_with_multiplier(rng).0
    }

    /// A point outside the dynamics, at a distance well above the solver tolerance.
    pub fn sample_non_member(&self, rng: &mut ChaCha8Rng) -> TTStarQPoint {
        let n = self.dim();
        let (mut w, mu) = self.sample_member_with_multiplier(rng);
        let lowered = |v: &[f64]| -> Covector { Covector(self.space.lower(v).into_iter().map(|c| c / mu).collect()) };
        match rng.gen_range(0..5) {
            0 => w.p = Covector(w.p.0.iter().zip(random_offset(rng, n)).map(|(a, b)| a + b).collect()),
            1 => w.pdot = Covector(random_offset(rng, n)),
            2 => {
                w.qdot = Vector(random_timelike(&self.space, rng));
                w.p = lowered(&w.qdot.0);
            }
            3 => w.p = w.p.scaled(-1.0),
            _ => {
                w.qdot = Vector(random_spacelike(&self.space, rng));
                w.p = lowered(&w.qdot.0);
            }
        }
        w
    }

    /// A point `(p, [q', qdot, mu])` for the first Legendre relation.
    pub fn sample_lambda1(&self, rng: &mut ChaCha8Rng, member: bool) -> (TStarQPoint, Vec<f64>) {
        let n = self.dim();
        let (q, mut p, mut qdot, mut mu) = self.null_member(rng);
        let mut q2 = q.clone();
        if !member {
            match rng.gen_range(0..5) {
                0 => mu *= random_positive(rng, 1.05, 2.0),
                1 => {
                    qdot = random_timelike(&self.space, rng);
                    p = self.space.lower(&qdot).into_iter().map(|c| c / mu).collect();
                }
                2 => q2 = q2.iter().zip(random_offset(rng, n)).map(|(a, b)| a + b).collect(),
                3 => p = p.iter().zip(random_offset(rng, n)).map(|(a, b)| a + b).collect(),
                _ => mu = -mu,
            }
        }
        (TStarQPoint::new(Point(q), Covector(p)), [q2, qdot, vec![mu]].concat())
    }

    /// A pair `(p, v)` for the second Legendre relation.
    pub fn sample_lambda2(&self, rng: &mut ChaCha8Rng, member: bool) -> (TStarQPoint, TQPoint) {
        let n = self.dim();
        let (q, mut p, mut qdot, mu) = self.null_member(rng);
        let mut q2 = q.clone();
        if !member {
            let lower = |v: &[f64]| -> Vec<f64> { self.space.lower(v).into_iter().map(|c| c / mu).collect() };
            match rng.gen_range(0..5) {
                0 => p = p.iter().map(|c| -c).collect(),
                1 => {
                    qdot = random_timelike(&self.space, rng);
                    p = lower(&qdot);
                }
                2 => p = p.iter().zip(random_offset(rng, n)).map(|(a, b)| a + b).collect(),
                3 => q2 = q2.iter().zip(random_offset(rng, n)).map(|(a, b)| a + b).collect(),
                _ => {
                    qdot = random_spacelike(&self.space, rng);
                    p = lower(&qdot);
                }
            }
        }
        (TStarQPoint::new(Point(q), Covector(p)), TQPoint::new(Point(q2), Vector(qdot)))
    }

    /// A point `(v, [q', p, mu])` for the first inverse Legendre relation of the reduced system.
    pub fn sample_omega1(&self, rng: &mut ChaCha8Rng, member: bool) -> (TQPoint, Vec<f64>) {
        let n = self.dim();
        let (q, mut p, mut qdot, mut mu) = self.null_member(rng);
        let mut q2 = q.clone();
        if !member {
            match rng.gen_range(0..5) {
                0 => {
                    p = self.space.lower(&random_timelike(&self.space, rng));
                    qdot = self.space.raise(&p).into_iter().map(|c| mu * c).collect();
                }
                1 => qdot = qdot.iter().map(|c| c * 1.5).collect(),
                2 => mu *= random_positive(rng, 1.05, 2.0),
                3 => q2 = q2.iter().zip(random_offset(rng, n)).map(|(a, b)| a + b).collect(),
                _ => qdot = qdot.iter().zip(random_offset(rng, n)).map(|(a, b)| a + b).collect(),
            }
        }
        (TQPoint::new(Point(q), Vector(qdot)), [q2, p, vec![mu]].concat())
    }

    /// A critical point `[q, qdot, mu]` of the Lagrangian family.
    pub fn sample_critical_point(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let n = self.dim();
        [random_point(rng, n), random_null(&self.space, rng), vec![random_positive(rng, 0.2, 5.0)]].concat()
    }

    /// `<g(qdot), qdot>` on `TQ`: homogeneous of degree two.
    pub fn degree_two_control(&self) -> FamilyOfFunctions {
        let n = self.dim();
        let (g1, g2) = (self.space.clone(), self.space.clone());
        FamilyOfFunctions::function(2 * n, move |x| g1.quad_v(&x[n..]))
            .with_gradient(move |x| [vec![0.0; n], g2.lower(&x[n..]).into_iter().map(|c| 2.0 * c).collect()].concat())
    }

    /// `<g(qdot), qdot> / (2 mu) + (mu - 1)^2 / 2`, whose critical points
    /// `(q, null qdot, 1)` do not scale with `mu`.
    pub fn scale_breaking_control(&self) -> FamilyOfFunctions {
        let n = self.dim();
        let base = self.lagrangian_family();
        let (b1, b2) = (base.clone(), base);
        FamilyOfFunctions::new(2 * n, 1, move |x| b1.value_unchecked(x) + 0.5 * (x[2 * n] - 1.0).powi(2))
            .with_domain(move |x| nonzero(&x[n..2 * n]) && x[2 * n] > 0.0)
            .with_gradient(move |x| {
                let mut g = b2.gradient_at(x);
                g[2 * n] += x[2 * n] - 1.0;
                g
            })
    }

    /// Every optics family with a sampler of its total space.
    pub fn fixtures(&self, cfg: &SolverConfig) -> Result<Vec<FamilyFixture>> {
        let n = self.dim();
        let sys = self.systems(cfg)?;
        let inverse = inverse_legendre(&sys.hamiltonian_reduced)?;
        let round_trip = self.round_trip_from(&inverse, cfg)?;
        let vector = move |rng: &mut ChaCha8Rng| -> Vec<f64> {
            let mut v: Vec<f64> = random_point(rng, n).into_iter().map(|c| 0.4 * c).collect();
            v[0] += if v[0] >= 0.0 { 0.1 } else { -0.1 };
            v
        };
        let mu = |rng: &mut ChaCha8Rng| vec![random_positive(rng, 0.2, 5.0)];
        Ok(vec![
            FamilyFixture {
                name: "optics.lagrangian",
                family: sys.lagrangian.object().family().clone(),
                sampler: sampler(move |rng| [random_point(rng, n), vector(rng), mu(rng)].concat()),
                action: Some(block_weights(&[(n, 0), (n, 1), (1, 1)])),
            },
            FamilyFixture {
                name: "optics.hamiltonian_full",
                family: sys.hamiltonian_full.object().family().clone(),
                sampler: sampler(move |rng| {
                    let q = random_point(rng, n);
                    [q.clone(), vector(rng), q, vector(rng), mu(rng)].concat()
                }),
                action: Some(block_weights(&[(3 * n, 0), (n, 1), (1, 1)])),
            },
            FamilyFixture {
                name: "optics.hamiltonian_reduced",
                family: sys.hamiltonian_reduced.object().family().clone(),
                sampler: sampler(move |rng| [random_point(rng, n), vector(rng), mu(rng)].concat()),
                action: Some(block_weights(&[(2 * n, 0), (1, 1)])),
            },
            FamilyFixture {
                name: "optics.inverse_composed",
                family: inverse.object().family().clone(),
                sampler: sampler(move |rng| {
                    let q = random_point(rng, n);
                    [q.clone(), vector(rng), q, vector(rng), mu(rng)].concat()
                }),
                action: Some(block_weights(&[(n, 0), (n, 1), (2 * n, 0), (1, 1)])),
            },
            FamilyFixture {
                name: "optics.inverse_reduced",
                family: round_trip.object().family().clone(),
                sampler: sampler(move |rng| [random_point(rng, n), vector(rng), mu(rng)].concat()),
                action: Some(block_weights(&[(n, 0), (n, 1), (1, 1)])),
            },
        ])
    }
}
