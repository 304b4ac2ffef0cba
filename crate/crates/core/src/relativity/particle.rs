//! Free particle of mass `m`: `L(q, qdot) = m sqrt(<g(qdot), qdot>)` on the timelike cones.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{
    block_weights, random_null, random_offset, random_point, random_positive, random_spacelike, random_timelike,
    relative_gap, require_lorentzian, sampler, set_identity, FamilyFixture,
};
use crate::bundle::{TQPoint, TStarQPoint, TTStarQPoint};
use crate::error::{Error, Result};
use crate::family::{FamilyOfFunctions, SmoothMap, SolverConfig};
use crate::legendre::{inverse_legendre, legendre_transform, HamiltonianSystem, LagrangianSystem};
use crate::linalg::{inf_norm, two_norm};
use crate::minkowski::{Covector, MinkowskiSpace, Point, Vector};
use crate::object::{reduce_by_fibration, reduce_by_section, tts, ConstraintSet, FibrationReduction, SectionReduction};

#[derive(Debug, Clone)]
pub struct ParticleModel {
    space: MinkowskiSpace,
    m: f64,
}

/// The systems generating the particle dynamics, and the Dirac system on the mass shell.
#[derive(Debug, Clone)]
pub struct ParticleSystems {
    pub lagrangian: LagrangianSystem,
    /// Total space `[q, p, q', v]`, family `-<p, v> + m ||v||` on `q = q'`.
    pub hamiltonian_full: HamiltonianSystem,
    /// Total space `[q, p, lambda]`, `H = lambda (||p|| - m)`.
    pub hamiltonian_reduced: HamiltonianSystem,
    /// The mass shell `K_m` with the zero function.
    pub dirac: HamiltonianSystem,
}

const REDUCTION_SAMPLES: usize = 64;

impl ParticleModel {
    pub fn new(space: MinkowskiSpace, m: f64) -> Result<Self> {
        require_lorentzian(&space)?;
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::InvalidArgument(format!("mass must be positive, got {m}")));
        }
        Ok(Self { space, m })
    }

    pub fn space(&self) -> &MinkowskiSpace {
        &self.space
    }

    pub fn mass(&self) -> f64 {
        self.m
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    /// `||v||` for timelike `v`.
    pub fn norm_v(&self, v: &[f64]) -> Option<f64> {
        let q = self.space.quad_v(v);
        (q > 0.0).then(|| q.sqrt())
    }

    /// `||p||` for timelike `p`.
    pub fn norm_p(&self, p: &[f64]) -> Option<f64> {
        let q = self.space.quad_p(p);
        (q > 0.0).then(|| q.sqrt())
    }

    pub fn on_mass_shell(&self, p: &[f64], tol: f64) -> bool {
        p.len() == self.dim() && self.norm_p(p).is_some_and(|r| (r - self.m).abs() <= tol * self.m)
    }

    /// `L(q, qdot)`, or `None` off the cone.
    pub fn lagrangian_value(&self, qdot: &[f64]) -> Option<f64> {
        self.norm_v(qdot).map(|r| self.m * r)
    }

    pub fn reduced_hamiltonian_plus(&self, p: &[f64], lambda: f64) -> Option<f64> {
        self.norm_p(p).map(|r| lambda * (r - self.m))
    }

    pub fn reduced_hamiltonian_minus(&self, p: &[f64], lambda: f64) -> Option<f64> {
        self.norm_p(p).map(|r| -lambda * (r + self.m))
    }

    /// `m g(qdot) / ||qdot||`.
    pub fn momentum_of(&self, qdot: &[f64]) -> Option<Vec<f64>> {
        let r = self.norm_v(qdot)?;
        Some(self.space.lower(qdot).into_iter().map(|c| self.m * c / r).collect())
    }

    /// `C`: positions with a timelike velocity, in either cone.
    pub fn velocity_cone(&self) -> ConstraintSet {
        let (g, n) = (self.space.clone(), self.dim());
        ConstraintSet::open(2 * n, move |y| g.quad_v(&y[n..]) > 0.0)
    }

    /// `K~`: covectors with `<p, g^{-1}(p)> > 0`.
    pub fn momentum_cone(&self) -> ConstraintSet {
        let (g, n) = (self.space.clone(), self.dim());
        ConstraintSet::open(2 * n, move |z| g.quad_p(&z[n..]) > 0.0)
    }

    /// `K_m = { ||p|| = m }`, with defining function `<p, g^{-1}(p)> - m^2`.
    pub fn mass_shell(&self) -> ConstraintSet {
        let (g, g2, n, m) = (self.space.clone(), self.space.clone(), self.dim(), self.m);
        let defining = SmoothMap::new(1, move |z| vec![g.quad_p(&z[n..]) - m * m]).with_jacobian(move |z| {
            let mut j = DMatrix::zeros(1, 2 * n);
            for (i, u) in g2.raise(&z[n..]).into_iter().enumerate() {
                j[(0, n + i)] = 2.0 * u;
            }
            j
        });
        self.momentum_cone().with_defining(defining)
    }

    pub fn lagrangian_family(&self) -> FamilyOfFunctions {
        let (n, m) = (self.dim(), self.m);
        let (g1, g2, g3, g4) = (self.space.clone(), self.space.clone(), self.space.clone(), self.space.clone());
        FamilyOfFunctions::function(2 * n, move |x| m * g1.quad_v(&x[n..]).sqrt())
            .with_domain(move |x| g2.quad_v(&x[n..]) > 0.0)
            .with_gradient(move |x| {
                let r = g3.quad_v(&x[n..]).sqrt();
                let mut out = vec![0.0; 2 * n];
                for (o, c) in out[n..].iter_mut().zip(g3.lower(&x[n..])) {
                    *o = m * c / r;
                }
                out
            })
            .with_hessian(move |x| {
                let v = &x[n..];
                let r = g4.quad_v(v).sqrt();
                let gv = g4.lower(v);
                let d = g4.diagonal();
                let mut h = DMatrix::zeros(2 * n, 2 * n);
                for i in 0..n {
                    for j in 0..n {
                        let diag = if i == j { d[i] / r } else { 0.0 };
                        h[(n + i, n + j)] = m * (diag - gv[i] * gv[j] / (r * r * r));
                    }
                }
                h
            })
    }

    pub fn lagrangian(&self) -> LagrangianSystem {
        LagrangianSystem::from_parts(self.dim(), self.velocity_cone(), self.lagrangian_family())
            .expect("the particle Lagrangian has consistent dimensions")
    }

    pub fn hamiltonian_full(&self) -> Result<HamiltonianSystem> {
        legendre_transform(&self.lagrangian())
    }

    /// `xi_(+/-)(q, p, lambda) = (q, p, q, +/- lambda g^{-1}(p) / ||p||)` with `rho'(q, p, q', v) = (q, p, ||v||)`.
    fn branch_reduction(&self, s: f64) -> SectionReduction {
        let n = self.dim();
        let (g1, g2, g3, g4, g5, g6) = (
            self.space.clone(),
            self.space.clone(),
            self.space.clone(),
            self.space.clone(),
            self.space.clone(),
            self.space.clone(),
        );
        let section = SmoothMap::new(4 * n, move |y| {
            let (q, p, lam) = (&y[..n], &y[n..2 * n], y[2 * n]);
            let r = g1.quad_p(p).sqrt();
            let v: Vec<f64> = g1.raise(p).into_iter().map(|c| s * lam * c / r).collect();
            [q, p, q, &v].concat()
        })
        .with_jacobian(move |y| {
            let (p, lam) = (&y[n..2 * n], y[2 * n]);
            let r = g2.quad_p(p).sqrt();
            let u = g2.raise(p);
            let d = g2.diagonal();
            let mut j = DMatrix::zeros(4 * n, 2 * n + 1);
            set_identity(&mut j, 0, 0, n);
            set_identity(&mut j, n, n, n);
            set_identity(&mut j, 2 * n, 0, n);
            for i in 0..n {
                for k in 0..n {
                    let diag = if i == k { 1.0 / (d[i] * r) } else { 0.0 };
                    j[(3 * n + i, n + k)] = s * lam * (diag - u[i] * u[k] / (r * r * r));
                }
                j[(3 * n + i, 2 * n)] = s * u[i] / r;
            }
            j
        });
        let projection = SmoothMap::new(2 * n + 1, move |x| {
            let mut out = x[..2 * n].to_vec();
            out.push(g3.quad_v(&x[3 * n..]).sqrt());
            out
        })
        .with_jacobian(move |x| {
            let v = &x[3 * n..];
            let r = g4.quad_v(v).sqrt();
            let mut j = DMatrix::zeros(2 * n + 1, 4 * n);
            set_identity(&mut j, 0, 0, 2 * n);
            for (i, c) in g4.lower(v).into_iter().enumerate() {
                j[(2 * n, 3 * n + i)] = c / r;
            }
            j
        });
        SectionReduction {
            reduced_fiber_dim: 1,
            reduced_domain: Arc::new(move |y| g5.quad_p(&y[n..2 * n]) > 0.0 && y[2 * n] > 0.0),
            reduced_constraint: Some(self.momentum_cone()),
            section,
            projection,
            sampler: sampler(move |rng| {
                let p = g6.lower(&random_timelike(&g6, rng));
                [random_point(rng, n), p, vec![random_positive(rng, 0.1, 10.0)]].concat()
            }),
            samples: REDUCTION_SAMPLES,
            seed: if s > 0.0 { 0x5ec7_0001 } else { 0x5ec7_0002 },
        }
    }

    /// The reduced system on `Z~ = K~ x R+` along the section `xi_+`.
    pub fn hamiltonian_reduced(&self, cfg: &SolverConfig) -> Result<HamiltonianSystem> {
        let full = self.hamiltonian_full()?;
        HamiltonianSystem::new(reduce_by_section(full.object(), &self.branch_reduction(1.0), cfg)?)
    }

    /// The family `-H~_-` along the section `xi_-`; it generates the empty set.
    pub fn hamiltonian_minus_branch(&self, cfg: &SolverConfig) -> Result<HamiltonianSystem> {
        let full = self.hamiltonian_full()?;
        HamiltonianSystem::new(reduce_by_section(full.object(), &self.branch_reduction(-1.0), cfg)?)
    }

    /// The Dirac system on `K_m`, obtained from the reduced system by
    /// passing to the quotient `(q, p, lambda) -> (q, p)` of its critical set.
    pub fn dirac(&self, cfg: &SolverConfig) -> Result<HamiltonianSystem> {
        self.dirac_from(&self.hamiltonian_reduced(cfg)?, cfg)
    }

    fn dirac_from(&self, reduced: &HamiltonianSystem, cfg: &SolverConfig) -> Result<HamiltonianSystem> {
        let n = self.dim();
        let g1 = self.space.clone();
        let model = self.clone();
        let red = FibrationReduction {
            projection: SmoothMap::new(2 * n, move |x| x[..2 * n].to_vec()).with_jacobian(move |_| {
                let mut j = DMatrix::zeros(2 * n, 2 * n + 1);
                set_identity(&mut j, 0, 0, 2 * n);
                j
            }),
            reduced_fiber_dim: 0,
            reduced_domain: Arc::new(move |y| g1.quad_p(&y[n..2 * n]) > 0.0),
            reduced_constraint: self.mass_shell(),
            lift: SmoothMap::new(2 * n + 1, move |y| [y, &[1.0]].concat()).with_jacobian(move |_| {
                let mut j = DMatrix::zeros(2 * n + 1, 2 * n);
                set_identity(&mut j, 0, 0, 2 * n);
                j
            }),
            base_sampler: sampler(move |rng| [random_point(rng, n), model.sample_shell(rng)].concat()),
            fiber_sampler: Arc::new(move |rng, y| [y, &[random_positive(rng, 0.1, 10.0)]].concat()),
            samples: REDUCTION_SAMPLES / 2,
            fiber_samples: 4,
            seed: 0xd12a_c000,
        };
        HamiltonianSystem::new(reduce_by_fibration(reduced.object(), &red, cfg)?)
    }

    pub fn systems(&self, cfg: &SolverConfig) -> Result<ParticleSystems> {
        let hamiltonian_full = self.hamiltonian_full()?;
        let hamiltonian_reduced =
            HamiltonianSystem::new(reduce_by_section(hamiltonian_full.object(), &self.branch_reduction(1.0), cfg)?)?;
        let dirac = self.dirac_from(&hamiltonian_reduced, cfg)?;
        Ok(ParticleSystems { lagrangian: self.lagrangian(), hamiltonian_full, hamiltonian_reduced, dirac })
    }

    /// The inverse Legendre transform of the reduced system, with total
    /// space `[q, qdot, q'', r, lambda]` and `L~ = <r, qdot> - lambda (||r|| - m)`.
    pub fn inverse_composed(&self, cfg: &SolverConfig) -> Result<LagrangianSystem> {
        inverse_legendre(&self.hamiltonian_reduced(cfg)?)
    }

    /// [`Self::inverse_composed`] reduced along `(q, qdot) -> (q, qdot, q, m g(qdot) / ||qdot||, ||qdot||)`.
    pub fn inverse_round_trip(&self, cfg: &SolverConfig) -> Result<LagrangianSystem> {
        self.round_trip_from(&self.inverse_composed(cfg)?, cfg)
    }

    fn round_trip_from(&self, composed: &LagrangianSystem, cfg: &SolverConfig) -> Result<LagrangianSystem> {
        let (n, m) = (self.dim(), self.m);
        let (g1, g2, g3, g4) = (self.space.clone(), self.space.clone(), self.space.clone(), self.space.clone());
        let section = SmoothMap::new(4 * n + 1, move |y| {
            let (q, v) = (&y[..n], &y[n..2 * n]);
            let r = g1.quad_v(v).sqrt();
            let p: Vec<f64> = g1.lower(v).into_iter().map(|c| m * c / r).collect();
            [q, v, q, &p, &[r]].concat()
        })
        .with_jacobian(move |y| {
            let v = &y[n..2 * n];
            let r = g2.quad_v(v).sqrt();
            let gv = g2.lower(v);
            let d = g2.diagonal();
            let mut j = DMatrix::zeros(4 * n + 1, 2 * n);
            set_identity(&mut j, 0, 0, 2 * n);
            set_identity(&mut j, 2 * n, 0, n);
            for i in 0..n {
                for k in 0..n {
                    let diag = if i == k { d[i] / r } else { 0.0 };
                    j[(3 * n + i, n + k)] = m * (diag - gv[i] * gv[k] / (r * r * r));
                }
                j[(4 * n, n + i)] = gv[i] / r;
            }
            j
        });
        let projection = SmoothMap::new(2 * n, move |x| x[..2 * n].to_vec()).with_jacobian(move |_| {
            let mut j = DMatrix::zeros(2 * n, 4 * n + 1);
            set_identity(&mut j, 0, 0, 2 * n);
            j
        });
        let red = SectionReduction {
            reduced_fiber_dim: 0,
            reduced_domain: Arc::new(move |y| g3.quad_v(&y[n..2 * n]) > 0.0),
            reduced_constraint: Some(self.velocity_cone()),
            section,
            projection,
            sampler: sampler(move |rng| [random_point(rng, n), random_timelike(&g4, rng)].concat()),
            samples: REDUCTION_SAMPLES,
            seed: 0x1e6e_0001,
        };
        LagrangianSystem::new(reduce_by_section(composed.object(), &red, cfg)?)
    }

    /// Scale-aware distance of `w` from the set
    /// `{ <g(qdot), qdot> > 0, p = m g(qdot) / ||qdot||, pdot = 0 }`; infinite off the cone.
    pub fn dynamics_residual(&self, w: &TTStarQPoint) -> f64 {
        if w.dim() != self.dim() {
            return f64::INFINITY;
        }
        let Some(expected) = self.momentum_of(&w.qdot.0) else {
            return f64::INFINITY;
        };
        relative_gap(&w.p.0, &expected).max(inf_norm(&w.pdot.0) / (1.0 + inf_norm(&expected)))
    }

    pub fn dynamics_membership(&self, w: &TTStarQPoint, cfg: &SolverConfig) -> bool {
        self.dynamics_residual(w) <= cfg.tolerance
    }

    /// Closed form of the set generated by the Dirac system:
    /// `p` on the mass shell, `pdot = 0` and `qdot` a real multiple of `g^{-1}(p)`.
    pub fn dirac_dynamics_membership(&self, w: &TTStarQPoint, cfg: &SolverConfig) -> bool {
        if w.dim() != self.dim() || !self.on_mass_shell(&w.p.0, cfg.tolerance) {
            return false;
        }
        let u = self.space.raise(&w.p.0);
        let kappa = w.qdot.0.iter().zip(&u).map(|(a, b)| a * b).sum::<f64>() / u.iter().map(|b| b * b).sum::<f64>();
        let along: Vec<f64> = u.iter().map(|b| kappa * b).collect();
        let scale = 1.0 + inf_norm(&w.p.0) + inf_norm(&w.qdot.0);
        let gap = w.qdot.0.iter().zip(&along).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        gap <= cfg.tolerance * scale && inf_norm(&w.pdot.0) <= cfg.tolerance * scale
    }

    /// Graph of the second Legendre relation: `q' = q`, `p = m g(qdot) / ||qdot||`.
    pub fn lambda2_graph_contains(&self, p: &TStarQPoint, v: &TQPoint, cfg: &SolverConfig) -> bool {
        if p.dim() != self.dim() || v.dim() != self.dim() || relative_gap(&v.q.0, &p.q.0) > cfg.tolerance {
            return false;
        }
        self.momentum_of(&v.qdot.0).is_some_and(|e| relative_gap(&p.p.0, &e) <= cfg.tolerance)
    }

    /// Starting points `[q', v]` in the fiber of the full Hamiltonian system.
    pub fn full_seeds(&self, q: &[f64], p: &[f64], qdot: &[f64]) -> Vec<Vec<f64>> {
        let mut seeds = Vec::new();
        if self.norm_v(qdot).is_some() {
            seeds.push([q, qdot].concat());
        }
        if let Some(r) = self.norm_p(p) {
            let v: Vec<f64> = self.space.raise(p).into_iter().map(|c| c / r).collect();
            seeds.push([q, &v].concat());
        }
        let mut e0 = vec![0.0; self.dim()];
        e0[0] = 1.0 / self.space.diagonal()[0].sqrt();
        seeds.push([q, &e0].concat());
        seeds
    }

    /// Starting values of `lambda` in the fiber of the reduced system.
    pub fn reduced_seeds(&self, qdot: &[f64]) -> Vec<Vec<f64>> {
        let mut seeds = Vec::new();
        if let Some(r) = self.norm_v(qdot) {
            seeds.push(vec![r]);
        }
        let e = two_norm(qdot);
        if e > 0.0 {
            seeds.push(vec![e]);
        }
        seeds.push(vec![1.0]);
        seeds
    }

    /// Starting points `[q'', r, lambda]` in the fiber of [`Self::inverse_composed`].
    pub fn inverse_seeds(&self, q: &[f64], qdot: &[f64]) -> Vec<Vec<f64>> {
        let mut seeds = Vec::new();
        if let (Some(p), Some(r)) = (self.momentum_of(qdot), self.norm_v(qdot)) {
            seeds.push([q, &p, &[r]].concat());
        }
        for sign in [1.0, -1.0] {
            let mut p = vec![0.0; self.dim()];
            p[0] = sign * self.m * self.space.diagonal()[0].sqrt();
            seeds.push([q, &p, &[two_norm(qdot).max(1e-3)]].concat());
        }
        seeds
    }

    /// Random covector on the mass shell, in either cone.
    pub fn sample_shell(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let v = random_timelike(&self.space, rng);
        self.momentum_of(&v).expect("timelike by construction")
    }

    /// A point of the dynamics with `||qdot||` in `[0.2, 3]`.
    pub fn sample_member(&self, rng: &mut ChaCha8Rng) -> TTStarQPoint {
        let n = self.dim();
        let qdot = random_timelike(&self.space, rng);
        let p = self.momentum_of(&qdot).expect("timelike by construction");
        tts(&random_point(rng, n), &p, &qdot, &vec![0.0; n])
    }

    /// A point outside the dynamics, at a distance well above the solver tolerance.
    pub fn sample_non_member(&self, rng: &mut ChaCha8Rng) -> TTStarQPoint {
        let n = self.dim();
        let mut w = self.sample_member(rng);
        match rng.gen_range(0..6) {
            0 => w.p = Covector(w.p.0.iter().zip(random_offset(rng, n)).map(|(a, b)| a + b).collect()),
            1 => w.pdot = Covector(random_offset(rng, n)),
            2 => w.qdot = Vector(random_spacelike(&self.space, rng)),
            3 => {
                let k = random_positive(rng, 1.05, 2.0);
                w.p = w.p.scaled(if rng.gen_bool(0.5) { k } else { 1.0 / k });
            }
            4 => w.p = w.p.scaled(-1.0),
            _ => w.qdot = Vector(random_null(&self.space, rng)),
        }
        w
    }

    /// A pair in the graph of the second Legendre relation.
    pub fn sample_relation_member(&self, rng: &mut ChaCha8Rng) -> (TStarQPoint, TQPoint) {
        let w = self.sample_member(rng);
        (w.cotangent_base(), w.tangent_projection())
    }

    pub fn sample_relation_non_member(&self, rng: &mut ChaCha8Rng) -> (TStarQPoint, TQPoint) {
        let n = self.dim();
        let (mut p, mut v) = self.sample_relation_member(rng);
        match rng.gen_range(0..5) {
            0 => p.p = Covector(p.p.0.iter().zip(random_offset(rng, n)).map(|(a, b)| a + b).collect()),
            1 => v.qdot = Vector(random_spacelike(&self.space, rng)),
            2 => v.q = Point(v.q.0.iter().zip(random_offset(rng, n)).map(|(a, b)| a + b).collect()),
            3 => p.p = p.p.scaled(random_positive(rng, 1.05, 2.0)),
            _ => p.p = p.p.scaled(-1.0),
        }
        (p, v)
    }

    /// Every particle family with a sampler of its total space.
    pub fn fixtures(&self, cfg: &SolverConfig) -> Result<Vec<FamilyFixture>> {
        let n = self.dim();
        let sys = self.systems(cfg)?;
        let minus = self.hamiltonian_minus_branch(cfg)?;
        let inverse = inverse_legendre(&sys.hamiltonian_reduced)?;
        let round_trip = self.round_trip_from(&inverse, cfg)?;
        let (g1, g2, g3, g4, g5, g6) = (
            self.space.clone(),
            self.space.clone(),
            self.space.clone(),
            self.space.clone(),
            self.space.clone(),
            self.space.clone(),
        );
        let reduced_sampler = sampler(move |rng| {
            let p = g3.lower(&random_timelike(&g3, rng));
            [random_point(rng, n), p, vec![random_positive(rng, 0.1, 10.0)]].concat()
        });
        Ok(vec![
            FamilyFixture {
                name: "particle.lagrangian",
                family: sys.lagrangian.object().family().clone(),
                sampler: sampler(move |rng| [random_point(rng, n), random_timelike(&g1, rng)].concat()),
                action: Some(block_weights(&[(n, 0), (n, 1)])),
            },
            FamilyFixture {
                name: "particle.hamiltonian_full",
                family: sys.hamiltonian_full.object().family().clone(),
                sampler: sampler(move |rng| {
                    let q = random_point(rng, n);
                    let p: Vec<f64> = random_point(rng, n).into_iter().map(|c| 0.4 * c).collect();
                    [q.clone(), p, q, random_timelike(&g2, rng)].concat()
                }),
                action: Some(block_weights(&[(3 * n, 0), (n, 1)])),
            },
            FamilyFixture {
                name: "particle.hamiltonian_reduced",
                family: sys.hamiltonian_reduced.object().family().clone(),
                sampler: Arc::clone(&reduced_sampler),
                action: Some(block_weights(&[(2 * n, 0), (1, 1)])),
            },
            FamilyFixture {
                name: "particle.hamiltonian_minus",
                family: minus.object().family().clone(),
                sampler: Arc::clone(&reduced_sampler),
                action: Some(block_weights(&[(2 * n, 0), (1, 1)])),
            },
            FamilyFixture {
                name: "particle.dirac",
                family: sys.dirac.object().family().clone(),
                sampler: sampler(move |rng| [random_point(rng, n), g4.lower(&random_timelike(&g4, rng))].concat()),
                action: None,
            },
            FamilyFixture {
                name: "particle.inverse_composed",
                family: inverse.object().family().clone(),
                sampler: sampler(move |rng| {
                    let q = random_point(rng, n);
                    let qdot: Vec<f64> = random_point(rng, n).into_iter().map(|c| 0.4 * c).collect();
                    let r = g5.lower(&random_timelike(&g5, rng));
                    [q.clone(), qdot, q, r, vec![random_positive(rng, 0.1, 10.0)]].concat()
                }),
                action: Some(block_weights(&[(n, 0), (n, 1), (2 * n, 0), (1, 1)])),
            },
            FamilyFixture {
                name: "particle.inverse_reduced",
                family: round_trip.object().family().clone(),
                sampler: sampler(move |rng| [random_point(rng, n), random_timelike(&g6, rng)].concat()),
                action: Some(block_weights(&[(n, 0), (n, 1)])),
            },
        ])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{check_gradient, solve_critical, vertical_gradient};
    use crate::object::{a_membership, DynamicsCandidate};
    use rand::SeedableRng;

    fn model() -> ParticleModel {
        ParticleModel::new(MinkowskiSpace::standard(4), 1.0).unwrap()
    }

    #[test]
    fn momentum_map_is_not_locally_invertible() {
        // p(qdot) is homogeneous of degree zero, so qdot spans its kernel
        let m = model();
        let cfg = SolverConfig::default();
        let q = Point(vec![0.0; 4]);
        let qdot = vec![2.0, 1.0, 0.0, 0.5];
        let v = TQPoint::new(q.clone(), Vector(qdot.clone()));
        let p = TStarQPoint::new(q, Covector(m.momentum_of(&qdot).unwrap()));
        assert!(crate::legendre::lambda2_membership(&m.lagrangian(), &p, &v, &[], &cfg).unwrap().member);
        assert!(!crate::legendre::hyperregular_at(&m.lagrangian(), &p, &v, &[], &cfg).unwrap());
    }

    #[test]
    fn reduced_values() {
        let cfg = SolverConfig::default();
        let m = model();
        let plus = m.hamiltonian_reduced(&cfg).unwrap();
        let z = [0.1, 0.2, 0.3, 0.4, 2.0, 0.0, 0.0, 0.0, 3.0];
        assert!((plus.hamiltonian(&z).unwrap() - 3.0).abs() < 1e-12);
        let minus = m.hamiltonian_minus_branch(&cfg).unwrap();
        assert!((minus.hamiltonian(&z).unwrap() + 9.0).abs() < 1e-12);
        assert!(m.on_mass_shell(&[1.0, 0.0, 0.0, 0.0], 1e-12));
        assert!(!m.on_mass_shell(&[0.0, 1.0, 0.0, 0.0], 1e-12));
    }

    #[test]
    fn closed_form_dynamics() {
        let m = model();
        let cfg = SolverConfig::default();
        let e0 = [1.0, 0.0, 0.0, 0.0];
        assert!(m.dynamics_membership(&tts(&[0.0; 4], &e0, &e0, &[0.0; 4]), &cfg));
        assert!(!m.dynamics_membership(&tts(&[0.0; 4], &e0, &e0, &[0.1, 0.0, 0.0, 0.0]), &cfg));
        assert!(!m.dynamics_membership(&tts(&[0.0; 4], &e0, &[0.0, 1.0, 0.0, 0.0], &[0.0; 4]), &cfg));
        // p is unchanged when qdot is rescaled
        assert!(m.dynamics_membership(&tts(&[0.0; 4], &e0, &[7.0, 0.0, 0.0, 0.0], &[0.0; 4]), &cfg));
    }

    #[test]
    fn generic_and_closed_form_dynamics_agree() {
        let m = model();
        let cfg = SolverConfig::default().with_tolerance(1e-8);
        let sys = m.systems(&cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for i in 0..40 {
            let w = if i % 2 == 0 { m.sample_member(&mut rng) } else { m.sample_non_member(&mut rng) };
            let expected = m.dynamics_membership(&w, &cfg);
            assert_eq!(expected, i % 2 == 0);
            let cand = DynamicsCandidate::Single(w.clone());
            let lag = a_membership(sys.lagrangian.object(), &cand, &[], &cfg).unwrap();
            assert_eq!(lag.member, expected, "lagrangian at {w:?}");
            let seeds = m.full_seeds(&w.q.0, &w.p.0, &w.qdot.0);
            let full = a_membership(sys.hamiltonian_full.object(), &cand, &seeds, &cfg).unwrap();
            assert_eq!(full.member, expected, "full hamiltonian at {w:?}");
            let red = a_membership(sys.hamiltonian_reduced.object(), &cand, &m.reduced_seeds(&w.qdot.0), &cfg).unwrap();
            assert_eq!(red.member, expected, "reduced hamiltonian at {w:?}");
            if expected {
                assert!(a_membership(sys.dirac.object(), &cand, &[], &cfg).unwrap().member);
            }
        }
    }

    #[test]
    fn dirac_system_is_strictly_larger() {
        let m = model();
        let cfg = SolverConfig::default();
        let dirac = m.dirac(&cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let p = m.sample_shell(&mut rng);
        let w = tts(&[1.0, 2.0, 3.0, 4.0], &p, &[0.0; 4], &[0.0; 4]);
        assert!(a_membership(dirac.object(), &DynamicsCandidate::Single(w.clone()), &[], &cfg).unwrap().member);
        assert!(m.dirac_dynamics_membership(&w, &cfg));
        assert!(!m.dynamics_membership(&w, &cfg));
        assert!(dirac.hamiltonian(&[0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0]).unwrap().abs() < 1e-15);
    }

    #[test]
    fn minus_branch_is_never_stationary() {
        let m = model();
        let cfg = SolverConfig::default();
        let minus = m.hamiltonian_minus_branch(&cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let fam = minus.object().family();
        for _ in 0..50 {
            let p = m.space().lower(&random_timelike(m.space(), &mut rng));
            let z = [random_point(&mut rng, 4), p, vec![random_positive(&mut rng, 0.1, 10.0)]].concat();
            let g = vertical_gradient(fam, &z).unwrap();
            assert!(g[0].abs() >= m.mass());
        }
    }

    #[test]
    fn inverse_transform_recovers_the_lagrangian() {
        let m = model();
        let cfg = SolverConfig::default();
        let composed = m.inverse_composed(&cfg).unwrap();
        let back = m.round_trip_from(&composed, &cfg).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..50 {
            let y = [random_point(&mut rng, 4), random_timelike(m.space(), &mut rng)].concat();
            let l = back.lagrangian(&y).unwrap();
            let expected = m.lagrangian_value(&y[4..]).unwrap();
            assert!((l - expected).abs() <= 1e-9 * (1.0 + expected.abs()));
        }
        // spacelike velocities have no critical point above them
        for _ in 0..10 {
            let q = random_point(&mut rng, 4);
            let qdot = random_spacelike(m.space(), &mut rng);
            for seed in m.inverse_seeds(&q, &qdot) {
                let base = [q.clone(), qdot.clone()].concat();
                let hit = solve_critical(composed.object().family(), &base, &seed, &cfg).unwrap_or(None);
                assert!(hit.is_none());
            }
        }
    }

    #[test]
    fn fixture_gradients() {
        let m = model();
        let cfg = SolverConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for fx in m.fixtures(&cfg).unwrap() {
            let points: Vec<Vec<f64>> = (0..20).map(|_| (fx.sampler)(&mut rng)).collect();
            let check = check_gradient(&fx.family, &points).unwrap();
            assert!(check.max_relative_error <= 1e-6, "{}: {}", fx.name, check.max_relative_error);
        }
    }

    #[test]
    fn relation_graph_oracle() {
        let m = model();
        let cfg = SolverConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..20 {
            let (p, v) = m.sample_relation_member(&mut rng);
            assert!(m.lambda2_graph_contains(&p, &v, &cfg));
            let (p, v) = m.sample_relation_non_member(&mut rng);
            assert!(!m.lambda2_graph_contains(&p, &v, &cfg));
        }
    }
}
