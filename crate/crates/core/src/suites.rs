//! Sampled verification suites over the bundle maps, the example families,
//! the Legendre relations, homogeneity and the two relativistic examples.
//!
//! Every check draws from its own generator seeded by the run seed and the
//! check id, so a report depends only on the configuration.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bundle::{
    alpha_q, alpha_q_inv, beta, beta_inv, eval_dt_theta, eval_it_dtheta, kappa_q, TQPoint, TStarQPoint, TTQPoint,
    TTStarQPoint, TTTStarQPoint,
};
use crate::error::{Error, Result};
use crate::family::{check_gradient, classify_at, solve_critical, vertical_gradient, CriticalPoint, SolverConfig};
use crate::homogeneity::{
    check_critical_set_homogeneous, check_family_homogeneous, check_set_homogeneous, hat_kappa, lifted_cotangent_action,
    sample_scale, HomogeneityReport, ScalingAction,
};
use crate::legendre::{lambda1_membership, lambda2_membership, omega1_membership, omega2_membership};
use crate::linalg::inf_norm;
use crate::minkowski::{Covector, MinkowskiSpace, Point, Vector};
use crate::object::{a_membership, tts, DynamicsCandidate, Sampler};
use crate::relativity::{
    block_weights, random_point, random_positive, random_spacelike, random_timelike, trajectory_sample, FamilyFixture,
    ModelKind, OpticsModel, ParticleModel,
};
use crate::report::{CheckRecord, VerificationReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    All,
    Bundles,
    Families,
    Legendre,
    Homogeneity,
    Particle,
    Optics,
}

impl Suite {
    pub const EACH: [Suite; 6] =
        [Suite::Bundles, Suite::Families, Suite::Legendre, Suite::Homogeneity, Suite::Particle, Suite::Optics];

    pub fn name(self) -> &'static str {
        match self {
            Suite::All => "all",
            Suite::Bundles => "bundles",
            Suite::Families => "families",
            Suite::Legendre => "legendre",
            Suite::Homogeneity => "homogeneity",
            Suite::Particle => "particle",
            Suite::Optics => "optics",
        }
    }

    /// Sample count used when none is configured.
    pub fn default_samples(self) -> usize {
        match self {
            Suite::All => 0,
            Suite::Bundles => 1000,
            Suite::Families | Suite::Homogeneity => 100,
            Suite::Legendre => 200,
            Suite::Particle | Suite::Optics => 500,
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        std::iter::once(Suite::All)
            .chain(Suite::EACH)
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown suite `{s}`")))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteConfig {
    pub suite: Suite,
    pub dim: usize,
    pub mass: f64,
    /// Overrides the per-suite sample counts.
    pub samples: Option<usize>,
    /// Overrides the tolerance of every check.
    pub tolerance: Option<f64>,
    pub seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self { suite: Suite::All, dim: 4, mass: 1.0, samples: None, tolerance: None, seed: 0 }
    }
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::InvalidArgument(format!("dimension must be at least 2, got {}", self.dim)));
        }
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(Error::InvalidArgument(format!("mass must be positive, got {}", self.mass)));
        }
        if self.samples == Some(0) {
            return Err(Error::InvalidArgument("sample count must be positive".into()));
        }
        if let Some(t) = self.tolerance {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::InvalidArgument(format!("tolerance must be positive, got {t}")));
            }
        }
        Ok(())
    }
}

/// Run the configured suites.
pub fn run(cfg: &SuiteConfig) -> Result<VerificationReport> {
    cfg.validate()?;
    let mut ctx = Ctx::new(cfg)?;
    let suites: Vec<Suite> = if cfg.suite == Suite::All { Suite::EACH.to_vec() } else { vec![cfg.suite] };
    for suite in suites {
        ctx.samples = cfg.samples.unwrap_or(suite.default_samples());
        match suite {
            Suite::Bundles => bundles(&mut ctx),
            Suite::Families => families(&mut ctx)?,
            Suite::Legendre => legendre(&mut ctx)?,
            Suite::Homogeneity => homogeneity(&mut ctx)?,
            Suite::Particle => particle(&mut ctx)?,
            Suite::Optics => optics(&mut ctx)?,
            Suite::All => unreachable!("expanded above"),
        }
    }
    Ok(VerificationReport::new(cfg.clone(), ctx.records))
}

fn fnv1a(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// Largest residual seen, with the sample that produced it.
#[derive(Default)]
struct Worst {
    value: f64,
    witness: Option<Vec<f64>>,
    samples: usize,
}

impl Worst {
    fn note(&mut self, r: f64, x: impl FnOnce() -> Vec<f64>) {
        self.samples += 1;
        let r = if r.is_nan() { f64::INFINITY } else { r };
        if r > self.value || (self.witness.is_none() && r > 0.0) {
            self.value = self.value.max(r);
            self.witness = Some(x());
        }
    }
}

/// Number of failed samples, with the first one.
#[derive(Default)]
struct Tally {
    failures: usize,
    witness: Option<Vec<f64>>,
    samples: usize,
}

impl Tally {
    fn note(&mut self, ok: bool, x: impl FnOnce() -> Vec<f64>) {
        self.samples += 1;
        if !ok {
            self.failures += 1;
            if self.witness.is_none() {
                self.witness = Some(x());
            }
        }
    }
}

struct Ctx<'a> {
    cfg: &'a SuiteConfig,
    samples: usize,
    n: usize,
    space: MinkowskiSpace,
    particle: ParticleModel,
    optics: OpticsModel,
    /// Solver settings for critical sets.
    exact: SolverConfig,
    /// Solver settings for membership comparisons.
    loose: SolverConfig,
    records: Vec<CheckRecord>,
}

impl<'a> Ctx<'a> {
    fn new(cfg: &'a SuiteConfig) -> Result<Self> {
        let space = MinkowskiSpace::standard(cfg.dim);
        Ok(Self {
            cfg,
            samples: 0,
            n: cfg.dim,
            particle: ParticleModel::new(space.clone(), cfg.mass)?,
            optics: OpticsModel::new(space.clone())?,
            space,
            exact: SolverConfig::default(),
            loose: SolverConfig::default().with_tolerance(1e-8),
            records: Vec::new(),
        })
    }

    fn rng(&self, id: &str) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.cfg.seed ^ fnv1a(id))
    }

    fn tol(&self, default: f64) -> f64 {
        self.cfg.tolerance.unwrap_or(default)
    }

    fn worst(&mut self, id: &str, anchor: &str, w: Worst, tol: f64) {
        let t = self.tol(tol);
        self.records.push(CheckRecord::new(id, anchor, w.samples, w.value, t, w.witness));
    }

    fn tally(&mut self, id: &str, anchor: &str, t: Tally) {
        let tol = self.tol(0.0);
        self.records.push(CheckRecord::new(id, anchor, t.samples, t.failures as f64, tol, t.witness));
    }

    fn homogeneity_report(&mut self, id: &str, anchor: &str, r: HomogeneityReport, tol: f64) {
        let t = self.tol(tol);
        self.records.push(CheckRecord::new(id, anchor, r.samples, r.max_residual, t, r.witness));
    }

    /// An expected failure: passes when `observed` reaches `required`.
    fn control(&mut self, id: &str, anchor: &str, samples: usize, observed: f64, required: f64, witness: Option<Vec<f64>>) {
        let tol = self.tol(0.0);
        let residual = (required - observed).max(0.0);
        self.records.push(CheckRecord::new(id, anchor, samples, residual, tol, witness));
    }
}

fn uniform(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect()
}

fn random_tts(rng: &mut ChaCha8Rng, n: usize) -> TTStarQPoint {
    tts(&uniform(rng, n), &uniform(rng, n), &uniform(rng, n), &uniform(rng, n))
}

fn dot_scale(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x * y).abs()).sum()
}

fn point_gap(a: &[f64], b: &[f64]) -> f64 {
    let gap = a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    gap / (1.0 + inf_norm(b))
}

fn relative(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + b.abs())
}

fn bundles(ctx: &mut Ctx) {
    let (n, s) = (ctx.n, ctx.samples);

    let id = "bundles.alpha_pairing";
    let mut rng = ctx.rng(id);
    let mut w = Worst::default();
    for _ in 0..s {
        let base = random_tts(&mut rng, n);
        let x = TTTStarQPoint {
            dq: Vector(uniform(&mut rng, n)),
            dp: Covector(uniform(&mut rng, n)),
            dqdot: Vector(uniform(&mut rng, n)),
            dpdot: Covector(uniform(&mut rng, n)),
            base,
        };
        let lhs = alpha_q(&x.base).pair(&x.dq, &x.dqdot);
        let rhs = eval_dt_theta(&x);
        let scale = dot_scale(&x.base.pdot.0, &x.dq.0) + dot_scale(&x.base.p.0, &x.dqdot.0);
        w.note((lhs - rhs).abs() / scale.max(1e-300), || x.base.coords());
    }
    ctx.worst(id, "<alpha_Q(w), (dq, dqdot)> = <pdot, dq> + <p, dqdot>", w, 1e-12);

    let id = "bundles.beta_pairing";
    let mut rng = ctx.rng(id);
    let mut w = Worst::default();
    for _ in 0..s {
        let base = random_tts(&mut rng, n);
        let x = TTTStarQPoint {
            dq: Vector(uniform(&mut rng, n)),
            dp: Covector(uniform(&mut rng, n)),
            dqdot: Vector(uniform(&mut rng, n)),
            dpdot: Covector(uniform(&mut rng, n)),
            base,
        };
        let lhs = beta(&x.base).pair(&x.dq, &x.dp);
        let rhs = eval_it_dtheta(&x);
        let scale = dot_scale(&x.base.pdot.0, &x.dq.0) + dot_scale(&x.dp.0, &x.base.qdot.0);
        w.note((lhs - rhs).abs() / scale.max(1e-300), || x.base.coords());
    }
    ctx.worst(id, "<beta_Q(w), (dq, dp)> = <pdot, dq> - <dp, qdot>", w, 1e-12);

    let id = "bundles.alpha_beta_inverse";
    let mut rng = ctx.rng(id);
    let mut w = Worst::default();
    for _ in 0..s {
        let x = random_tts(&mut rng, n);
        let c = x.coords();
        let r = point_gap(&alpha_q_inv(&alpha_q(&x)).coords(), &c).max(point_gap(&beta_inv(&beta(&x)).coords(), &c));
        w.note(r, || c.clone());
    }
    ctx.worst(id, "alpha_Q^{-1} o alpha_Q = id, beta_Q^{-1} o beta_Q = id", w, 1e-12);

    let id = "bundles.kappa_involution";
    let mut rng = ctx.rng(id);
    let mut w = Worst::default();
    for _ in 0..s {
        let u = TTQPoint {
            q: Point(uniform(&mut rng, n)),
            v: Vector(uniform(&mut rng, n)),
            qdot: Vector(uniform(&mut rng, n)),
            vdot: Vector(uniform(&mut rng, n)),
        };
        let k = kappa_q(&u);
        let swapped = [u.q.as_slice(), u.qdot.as_slice(), u.v.as_slice(), u.vdot.as_slice()].concat();
        let r = point_gap(&kappa_q(&k).coords(), &u.coords()).max(point_gap(&k.coords(), &swapped));
        w.note(r, || u.coords());
    }
    ctx.worst(id, "kappa_Q o kappa_Q = id, kappa_Q(q, v, qdot, vdot) = (q, qdot, v, vdot)", w, 1e-12);

    let id = "bundles.hat_kappa_scaling";
    let mut rng = ctx.rng(id);
    let mut w = Worst::default();
    for i in 0..s {
        let x = random_tts(&mut rng, n);
        let k = sample_scale(&mut rng, i);
        let r = match hat_kappa(k, &x) {
            Ok(h) => point_gap(&h.coords(), &x.fiber_scaled(k).coords()),
            Err(_) => f64::INFINITY,
        };
        w.note(r, || x.coords());
    }
    ctx.worst(id, "alpha_Q^{-1} o kappa_bar(k) o alpha_Q (w) = (q, p, k qdot, k pdot)", w, 1e-12);
}

fn all_fixtures(ctx: &Ctx) -> Result<Vec<FamilyFixture>> {
    let mut out = ctx.particle.fixtures(&ctx.exact)?;
    out.extend(ctx.optics.fixtures(&ctx.exact)?);
    let n = ctx.n;
    out.push(FamilyFixture {
        name: "control.degree_two",
        family: ctx.optics.degree_two_control(),
        sampler: Arc::new(move |rng| [random_point(rng, n), uniform(rng, n)].concat()),
        action: None,
    });
    let g = ctx.space.clone();
    out.push(FamilyFixture {
        name: "control.scale_breaking",
        family: ctx.optics.scale_breaking_control(),
        sampler: Arc::new(move |rng| {
            [random_point(rng, n), random_timelike(&g, rng), vec![random_positive(rng, 0.2, 5.0)]].concat()
        }),
        action: None,
    });
    Ok(out)
}

fn families(ctx: &mut Ctx) -> Result<()> {
    let s = ctx.samples;
    for fx in all_fixtures(ctx)? {
        let id = format!("families.gradient.{}", fx.name);
        let mut rng = ctx.rng(&id);
        let points: Vec<Vec<f64>> = (0..s).map(|_| (fx.sampler)(&mut rng)).collect();
        let check = check_gradient(&fx.family, &points)?;
        let w = Worst { value: check.max_relative_error, witness: check.worst_point, samples: points.len() };
        ctx.worst(&id, "analytic dF against central differences", w, 1e-6);
    }

    let n = ctx.n;
    let id = "families.morse.optics_lagrangian";
    let mut rng = ctx.rng(id);
    let fam = ctx.optics.lagrangian_family();
    let mut t = Tally::default();
    for _ in 0..s {
        let x = ctx.optics.sample_critical_point(&mut rng);
        let cp = CriticalPoint { base: x[..2 * n].to_vec(), fiber: x[2 * n..].to_vec(), residual: 0.0 };
        let ok = classify_at(&fam, &cp, &ctx.exact).map(|c| c.morse_at_point).unwrap_or(false);
        t.note(ok, || x.clone());
    }
    ctx.tally(id, "W(F, r) has maximal rank on S(L, eta), L = <g(qdot), qdot> / (2 mu)", t);

    let id = "families.morse.particle_reduced";
    let mut rng = ctx.rng(id);
    let reduced = ctx.particle.hamiltonian_reduced(&ctx.exact)?;
    let fam = reduced.object().family();
    let mut t = Tally::default();
    for _ in 0..s {
        let base = [random_point(&mut rng, n), ctx.particle.sample_shell(&mut rng)].concat();
        let cp = CriticalPoint { base: base.clone(), fiber: vec![random_positive(&mut rng, 0.1, 10.0)], residual: 0.0 };
        let ok = classify_at(fam, &cp, &ctx.exact).map(|c| c.morse_at_point).unwrap_or(false);
        t.note(ok, || cp.total());
    }
    ctx.tally(id, "W(F, r) has maximal rank on S(H~_+, zeta~) = { ||p|| = m }", t);
    Ok(())
}

fn legendre(ctx: &mut Ctx) -> Result<()> {
    let s = ctx.samples;
    let loose = ctx.loose;
    let (pm, om) = (ctx.particle.clone(), ctx.optics.clone());
    let ps = pm.systems(&ctx.exact)?;
    let os = om.systems(&ctx.exact)?;
    let pair_coords = |p: &TStarQPoint, v: &TQPoint| [p.coords(), v.coords()].concat();

    let id = "legendre.lambda2.particle";
    let mut rng = ctx.rng(id);
    let mut t = Tally::default();
    for i in 0..2 * s {
        let member = i % 2 == 0;
        let (p, v) = if member { pm.sample_relation_member(&mut rng) } else { pm.sample_relation_non_member(&mut rng) };
        let oracle = pm.lambda2_graph_contains(&p, &v, &loose);
        let generic = lambda2_membership(&ps.lagrangian, &p, &v, &[], &loose)?.member;
        t.note(oracle == member && generic == oracle, || pair_coords(&p, &v));
    }
    ctx.tally(id, "graph(Lambda_2(L)) = { q' = q, p = m g(qdot) / ||qdot|| }", t);

    let id = "legendre.lambda1.optics";
    let mut rng = ctx.rng(id);
    let mut t = Tally::default();
    for i in 0..2 * s {
        let member = i % 2 == 0;
        let (p, y) = om.sample_lambda1(&mut rng, member);
        let oracle = om.lambda1_graph_contains(&p, &y, &loose);
        let generic = lambda1_membership(&os.lagrangian, &p, &y, &loose)?.member;
        t.note(oracle == member && generic == oracle, || [p.coords(), y.clone()].concat());
    }
    ctx.tally(id, "graph(Lambda_1(L)) = { q' = q, <g(qdot), qdot> = 0, mu p = g(qdot) }", t);

    let id = "legendre.lambda2.optics";
    let mut rng = ctx.rng(id);
    let mut t = Tally::default();
    for i in 0..2 * s {
        let member = i % 2 == 0;
        let (p, v) = om.sample_lambda2(&mut rng, member);
        let oracle = om.lambda2_graph_contains(&p, &v, &loose);
        let seeds = om.scalar_seeds(&p.p.0, &v.qdot.0);
        let generic = lambda2_membership(&os.lagrangian, &p, &v, &seeds, &loose)?.member;
        t.note(oracle == member && generic == oracle, || pair_coords(&p, &v));
    }
    ctx.tally(id, "graph(Lambda_2(L)) = { q' = q, <g(qdot), qdot> = 0, mu p = g(qdot) for some mu > 0 }", t);

    let id = "legendre.omega1.optics";
    let mut rng = ctx.rng(id);
    let mut t = Tally::default();
    for i in 0..2 * s {
        let member = i % 2 == 0;
        let (v, z) = om.sample_omega1(&mut rng, member);
        let oracle = om.omega1_graph_contains(&v, &z, &loose);
        let generic = omega1_membership(&os.hamiltonian_reduced, &v, &z, &loose)?.member;
        t.note(oracle == member && generic == oracle, || [v.coords(), z.clone()].concat());
    }
    ctx.tally(id, "graph(Omega_1(H~)) = { q' = q, <p, g^{-1}(p)> = 0, qdot = mu g^{-1}(p) }", t);

    for (id, reduced) in [("legendre.omega2_transpose.particle_full", false), ("legendre.omega2_transpose.particle_reduced", true)] {
        let ham = if reduced { &ps.hamiltonian_reduced } else { &ps.hamiltonian_full };
        let mut rng = ctx.rng(id);
        let mut t = Tally::default();
        for i in 0..2 * s {
            let member = i % 2 == 0;
            let (p, v) = if member { pm.sample_relation_member(&mut rng) } else { pm.sample_relation_non_member(&mut rng) };
            let lambda = lambda2_membership(&ps.lagrangian, &p, &v, &[], &loose)?.member;
            let seeds = if reduced { pm.reduced_seeds(&v.qdot.0) } else { pm.full_seeds(&p.q.0, &p.p.0, &v.qdot.0) };
            let omega = omega2_membership(ham, &v, &p, &seeds, &loose)?.member;
            t.note(lambda == member && omega == lambda, || pair_coords(&p, &v));
        }
        ctx.tally(id, "graph(Omega_2(H)) is the transpose of graph(Lambda_2(L))", t);
    }

    for (id, reduced) in [("legendre.omega2_transpose.optics_full", false), ("legendre.omega2_transpose.optics_reduced", true)] {
        let ham = if reduced { &os.hamiltonian_reduced } else { &os.hamiltonian_full };
        let mut rng = ctx.rng(id);
        let mut t = Tally::default();
        for i in 0..2 * s {
            let member = i % 2 == 0;
            let (p, v) = om.sample_lambda2(&mut rng, member);
            let scalar = om.scalar_seeds(&p.p.0, &v.qdot.0);
            let lambda = lambda2_membership(&os.lagrangian, &p, &v, &scalar, &loose)?.member;
            let seeds = if reduced { scalar } else { om.full_seeds(&p.q.0, &p.p.0, &v.qdot.0) };
            let omega = omega2_membership(ham, &v, &p, &seeds, &loose)?.member;
            t.note(lambda == member && omega == lambda, || pair_coords(&p, &v));
        }
        ctx.tally(id, "graph(Omega_2(H)) is the transpose of graph(Lambda_2(L))", t);
    }
    Ok(())
}

fn homogeneity(ctx: &mut Ctx) -> Result<()> {
    let (n, s) = (ctx.n, ctx.samples);
    let fixtures = all_fixtures(ctx)?;

    let id = "homogeneity.action_axioms";
    let mut rng = ctx.rng(id);
    let mut w = Worst::default();
    let mut actions: Vec<(ScalingAction, Sampler)> = fixtures
        .iter()
        .filter_map(|f| f.action.clone().map(|a| (a, Arc::clone(&f.sampler))))
        .collect();
    actions.push((ScalingAction::TangentScaling { n }, Arc::new(move |rng| uniform(rng, 2 * n))));
    actions.push((hat_kappa_action(n), Arc::new(move |rng| uniform(rng, 4 * n))));
    for i in 0..s {
        for (a, sampler) in &actions {
            let x = sampler(&mut rng);
            let (k1, k2) = (sample_scale(&mut rng, i), sample_scale(&mut rng, i + 2));
            w.note(a.axioms_residual(&x, k1, k2).unwrap_or(f64::INFINITY), || x.clone());
        }
    }
    ctx.worst(id, "action(1, .) = id, action(k, action(k', .)) = action(k k', .)", w, 1e-12);

    let id = "homogeneity.lifted_action";
    let mut rng = ctx.rng(id);
    let mut w = Worst::default();
    let mu = ScalingAction::TangentScaling { n };
    for i in 0..s {
        let x = uniform(&mut rng, 2 * n);
        let f = uniform(&mut rng, 2 * n);
        let (k1, k2) = (sample_scale(&mut rng, i), sample_scale(&mut rng, i + 2));
        let r = (|| -> Result<f64> {
            let (y, g) = lifted_cotangent_action(&mu, k1, &x, &f)?;
            let expected: Vec<f64> = [&x[..n], &x[n..].iter().map(|v| k1 * v).collect::<Vec<_>>()[..]].concat();
            let expected_f: Vec<f64> = [&f[..n].iter().map(|a| k1 * a).collect::<Vec<_>>()[..], &f[n..]].concat();
            let (y2, g2) = lifted_cotangent_action(&mu, k2, &y, &g)?;
            let (y3, g3) = lifted_cotangent_action(&mu, k1 * k2, &x, &f)?;
            Ok(point_gap(&y, &expected)
                .max(point_gap(&g, &expected_f))
                .max(point_gap(&[y2, g2].concat(), &[y3, g3].concat())))
        })()
        .unwrap_or(f64::INFINITY);
        w.note(r, || [x.clone(), f.clone()].concat());
    }
    ctx.worst(id, "mu_bar(k, f) = k T*mu(1/k, f): (q, v; a, b) -> (q, k v; k a, b)", w, 1e-12);

    for fx in fixtures.iter().filter(|f| f.action.is_some()) {
        let id = format!("homogeneity.family.{}", fx.name);
        let mut rng = ctx.rng(&id);
        let action = fx.action.as_ref().expect("filtered");
        let tol = ctx.tol(1e-10);
        let rep = check_family_homogeneous(&fx.family, action, fx.sampler.as_ref(), s, &mut rng, tol)?;
        ctx.homogeneity_report(&id, "F(nu(k, r)) = k F(r)", rep, 1e-10);
    }

    let exact = ctx.exact;
    let pm = ctx.particle.clone();
    let om = ctx.optics.clone();
    let ps = pm.systems(&exact)?;
    let os = om.systems(&exact)?;
    let g = ctx.space.clone();

    let id = "homogeneity.critical_set.optics_lagrangian";
    let mut rng = ctx.rng(id);
    let on = om.clone();
    let rep = check_critical_set_homogeneous(
        &om.lagrangian_family(),
        &block_weights(&[(n, 0), (n, 1), (1, 1)]),
        &move |r| on.sample_critical_point(r),
        s,
        &mut rng,
        &exact,
    )?;
    ctx.homogeneity_report(id, "S(F, rho) of a homogeneous family is homogeneous", rep, exact.tolerance);

    let id = "homogeneity.critical_set.optics_full";
    let mut rng = ctx.rng(id);
    let on = om.clone();
    let rep = check_critical_set_homogeneous(
        os.hamiltonian_full.object().family(),
        &block_weights(&[(3 * n, 0), (n, 1), (1, 1)]),
        &move |r| {
            let (w, mu) = on.sample_member_with_multiplier(r);
            let v: Vec<f64> = on.space().raise(&w.p.0).into_iter().map(|c| mu * c).collect();
            [w.q.0.clone(), w.p.0, w.q.0, v, vec![mu]].concat()
        },
        s,
        &mut rng,
        &exact,
    )?;
    ctx.homogeneity_report(id, "S(F, rho) of a homogeneous family is homogeneous", rep, exact.tolerance);

    let id = "homogeneity.critical_set.particle_full";
    let mut rng = ctx.rng(id);
    let (pn, g1) = (pm.clone(), g.clone());
    let rep = check_critical_set_homogeneous(
        ps.hamiltonian_full.object().family(),
        &block_weights(&[(3 * n, 0), (n, 1)]),
        &move |r| {
            let q = random_point(r, n);
            let v = random_timelike(&g1, r);
            let p = pn.momentum_of(&v).expect("timelike");
            [q.clone(), p, q, v].concat()
        },
        s,
        &mut rng,
        &exact,
    )?;
    ctx.homogeneity_report(id, "S(F, rho) of a homogeneous family is homogeneous", rep, exact.tolerance);

    let id = "homogeneity.critical_set.particle_reduced";
    let mut rng = ctx.rng(id);
    let pn = pm.clone();
    let rep = check_critical_set_homogeneous(
        ps.hamiltonian_reduced.object().family(),
        &block_weights(&[(2 * n, 0), (1, 1)]),
        &move |r| [random_point(r, n), pn.sample_shell(r), vec![random_positive(r, 0.1, 10.0)]].concat(),
        s,
        &mut rng,
        &exact,
    )?;
    ctx.homogeneity_report(id, "S(F, rho) of a homogeneous family is homogeneous", rep, exact.tolerance);

    let loose = ctx.loose;
    let kappa = hat_kappa_action(n);
    let coords_of = |x: &[f64]| TTStarQPoint::from_coords(x).ok();

    let id = "homogeneity.dynamics.particle";
    let mut rng = ctx.rng(id);
    let (pa, pb) = (pm.clone(), pm.clone());
    let rep = check_set_homogeneous(
        &|x| coords_of(x).is_some_and(|w| pa.dynamics_membership(&w, &loose)),
        &kappa,
        &move |r| pb.sample_member(r).coords(),
        s,
        &mut rng,
    )?;
    ctx.homogeneity_report(id, "D is invariant under kappa_hat(k, w) = k w", rep, 0.0);

    let id = "homogeneity.dynamics.particle_generic";
    let mut rng = ctx.rng(id);
    let pb = pm.clone();
    let lag = ps.lagrangian.clone();
    let rep = check_set_homogeneous(
        &|x| {
            coords_of(x).is_some_and(|w| {
                a_membership(lag.object(), &DynamicsCandidate::Single(w), &[], &loose).is_ok_and(|m| m.member)
            })
        },
        &kappa,
        &move |r| pb.sample_member(r).coords(),
        s,
        &mut rng,
    )?;
    ctx.homogeneity_report(id, "D is invariant under kappa_hat(k, w) = k w", rep, 0.0);

    let id = "homogeneity.dynamics.optics";
    let mut rng = ctx.rng(id);
    let (oa, ob) = (om.clone(), om.clone());
    let rep = check_set_homogeneous(
        &|x| coords_of(x).is_some_and(|w| oa.dynamics_membership(&w, &loose)),
        &kappa,
        &move |r| ob.sample_member(r).coords(),
        s,
        &mut rng,
    )?;
    ctx.homogeneity_report(id, "D is invariant under kappa_hat(k, w) = k w", rep, 0.0);

    let id = "homogeneity.dynamics.optics_generic";
    let mut rng = ctx.rng(id);
    let (oa, ob) = (om.clone(), om.clone());
    let lag = os.lagrangian.clone();
    let rep = check_set_homogeneous(
        &|x| {
            coords_of(x).is_some_and(|w| {
                let seeds = oa.scalar_seeds(&w.p.0, &w.qdot.0);
                a_membership(lag.object(), &DynamicsCandidate::Single(w), &seeds, &loose).is_ok_and(|m| m.member)
            })
        },
        &kappa,
        &move |r| ob.sample_member(r).coords(),
        s,
        &mut rng,
    )?;
    ctx.homogeneity_report(id, "D is invariant under kappa_hat(k, w) = k w", rep, 0.0);

    let split_pair = move |x: &[f64]| -> Option<(TStarQPoint, TQPoint)> {
        Some((TStarQPoint::from_coords(&x[..2 * n]).ok()?, TQPoint::from_coords(&x[2 * n..]).ok()?))
    };
    let velocity_scaling = block_weights(&[(3 * n, 0), (n, 1)]);

    let id = "homogeneity.graph.lambda2_particle";
    let mut rng = ctx.rng(id);
    let (pa, pb) = (pm.clone(), pm.clone());
    let rep = check_set_homogeneous(
        &|x| split_pair(x).is_some_and(|(p, v)| pa.lambda2_graph_contains(&p, &v, &loose)),
        &velocity_scaling,
        &move |r| {
            let (p, v) = pb.sample_relation_member(r);
            [p.coords(), v.coords()].concat()
        },
        s,
        &mut rng,
    )?;
    ctx.homogeneity_report(id, "graph(Lambda_2(L)) is invariant under (p, v) -> (p, k v)", rep, 0.0);

    let id = "homogeneity.graph.lambda2_optics";
    let mut rng = ctx.rng(id);
    let (oa, ob) = (om.clone(), om.clone());
    let rep = check_set_homogeneous(
        &|x| split_pair(x).is_some_and(|(p, v)| oa.lambda2_graph_contains(&p, &v, &loose)),
        &velocity_scaling,
        &move |r| {
            let (p, v) = ob.sample_lambda2(r, true);
            [p.coords(), v.coords()].concat()
        },
        s,
        &mut rng,
    )?;
    ctx.homogeneity_report(id, "graph(Lambda_2(L)) is invariant under (p, v) -> (p, k v)", rep, 0.0);

    let id = "homogeneity.graph.lambda2_optics_generic";
    let mut rng = ctx.rng(id);
    let (oa, ob) = (om.clone(), om.clone());
    let lag = os.lagrangian.clone();
    let rep = check_set_homogeneous(
        &|x| {
            split_pair(x).is_some_and(|(p, v)| {
                let seeds = oa.scalar_seeds(&p.p.0, &v.qdot.0);
                lambda2_membership(&lag, &p, &v, &seeds, &loose).is_ok_and(|m| m.member)
            })
        },
        &velocity_scaling,
        &move |r| {
            let (p, v) = ob.sample_lambda2(r, true);
            [p.coords(), v.coords()].concat()
        },
        s,
        &mut rng,
    )?;
    ctx.homogeneity_report(id, "graph(Lambda_2(L)) is invariant under (p, v) -> (p, k v)", rep, 0.0);

    let id = "homogeneity.graph.omega1_optics";
    let mut rng = ctx.rng(id);
    let (oa, ob) = (om.clone(), om.clone());
    let rep = check_set_homogeneous(
        &|x| TQPoint::from_coords(&x[..2 * n]).is_ok_and(|v| oa.omega1_graph_contains(&v, &x[2 * n..], &loose)),
        &block_weights(&[(n, 0), (n, 1), (2 * n, 0), (1, 1)]),
        &move |r| {
            let (v, z) = ob.sample_omega1(r, true);
            [v.coords(), z].concat()
        },
        s,
        &mut rng,
    )?;
    ctx.homogeneity_report(id, "graph(Omega_1(H~)) is invariant under (v, z) -> (k v, sigma(k, z))", rep, 0.0);

    let id = "homogeneity.graph.omega2_optics_generic";
    let mut rng = ctx.rng(id);
    let (oa, ob) = (om.clone(), om.clone());
    let ham = os.hamiltonian_reduced.clone();
    let split_vp = move |x: &[f64]| -> Option<(TQPoint, TStarQPoint)> {
        Some((TQPoint::from_coords(&x[..2 * n]).ok()?, TStarQPoint::from_coords(&x[2 * n..]).ok()?))
    };
    let rep = check_set_homogeneous(
        &|x| {
            split_vp(x).is_some_and(|(v, p)| {
                let seeds = oa.scalar_seeds(&p.p.0, &v.qdot.0);
                omega2_membership(&ham, &v, &p, &seeds, &loose).is_ok_and(|m| m.member)
            })
        },
        &block_weights(&[(n, 0), (n, 1), (2 * n, 0)]),
        &move |r| {
            let (p, v) = ob.sample_lambda2(r, true);
            [v.coords(), p.coords()].concat()
        },
        s,
        &mut rng,
    )?;
    ctx.homogeneity_report(id, "graph(Omega_2(H~)) is invariant under (v, p) -> (k v, p)", rep, 0.0);

    let id = "homogeneity.control.degree_two";
    let mut rng = ctx.rng(id);
    let control = om.degree_two_control();
    let g2 = g.clone();
    let rep = check_family_homogeneous(
        &control,
        &ScalingAction::TangentScaling { n },
        &move |r| [random_point(r, n), random_timelike(&g2, r)].concat(),
        s,
        &mut rng,
        1e-10,
    )?;
    ctx.control(id, "<g(qdot), qdot> is not homogeneous of degree one", rep.samples, rep.max_residual, 0.5, rep.witness);

    let id = "homogeneity.control.critical_set";
    let mut rng = ctx.rng(id);
    let control = om.scale_breaking_control();
    let g3 = g.clone();
    let rep = check_critical_set_homogeneous(
        &control,
        &block_weights(&[(n, 0), (n, 1), (1, 1)]),
        &move |r| [random_point(r, n), crate::relativity::random_null(&g3, r), vec![1.0]].concat(),
        s,
        &mut rng,
        &exact,
    )?;
    ctx.control(
        id,
        "critical points of <g(qdot), qdot> / (2 mu) + (mu - 1)^2 / 2 do not scale",
        rep.samples,
        rep.max_residual,
        1e-3,
        rep.witness,
    );
    Ok(())
}

fn hat_kappa_action(n: usize) -> ScalingAction {
    ScalingAction::Custom {
        dim: 4 * n,
        map: Arc::new(|k, x| {
            let w = TTStarQPoint::from_coords(x).expect("length checked by the action");
            hat_kappa(k, &w).expect("positive scale").coords()
        }),
    }
}

fn particle(ctx: &mut Ctx) -> Result<()> {
    let (n, s) = (ctx.n, ctx.samples);
    let loose = ctx.loose;
    let exact = ctx.exact;
    let pm = ctx.particle.clone();
    let sys = pm.systems(&exact)?;
    let minus = pm.hamiltonian_minus_branch(&exact)?;

    let id = "particle.dynamics";
    let mut rng = ctx.rng(id);
    let (mut lag_t, mut full_t, mut red_t) = (Tally::default(), Tally::default(), Tally::default());
    for i in 0..s {
        let member = i % 2 == 0;
        let w = if member { pm.sample_member(&mut rng) } else { pm.sample_non_member(&mut rng) };
        let oracle = pm.dynamics_membership(&w, &loose);
        let cand = DynamicsCandidate::Single(w.clone());
        let lag = a_membership(sys.lagrangian.object(), &cand, &[], &loose)?.member;
        let seeds = pm.full_seeds(&w.q.0, &w.p.0, &w.qdot.0);
        let full = a_membership(sys.hamiltonian_full.object(), &cand, &seeds, &loose)?.member;
        let red = a_membership(sys.hamiltonian_reduced.object(), &cand, &pm.reduced_seeds(&w.qdot.0), &loose)?.member;
        lag_t.note(oracle == member && lag == oracle, || w.coords());
        full_t.note(full == lag && full == oracle, || w.coords());
        red_t.note(red == oracle, || w.coords());
    }
    ctx.tally("particle.dynamics.lagrangian", "D = { <g(qdot), qdot> > 0, p = m g(qdot) / ||qdot||, pdot = 0 }", lag_t);
    ctx.tally("particle.dynamics.hamiltonian_full", "the Legendre transform generates the same dynamics", full_t);
    ctx.tally("particle.dynamics.hamiltonian_reduced", "the reduced system -H~_+ generates D", red_t);

    let id = "particle.reduced_values";
    let mut rng = ctx.rng(id);
    let mut w = Worst::default();
    for _ in 0..s {
        let p = pm.space().lower(&random_timelike(pm.space(), &mut rng));
        let z = [random_point(&mut rng, n), p, vec![random_positive(&mut rng, 0.1, 10.0)]].concat();
        let expected = pm.reduced_hamiltonian_plus(&z[n..2 * n], z[2 * n]).unwrap_or(f64::NAN);
        let got = sys.hamiltonian_reduced.hamiltonian(&z).unwrap_or(f64::NAN);
        w.note(relative(got, expected), || z.clone());
    }
    ctx.worst(id, "H o xi_+ = H~_+ = lambda (||p|| - m)", w, 1e-10);

    let id = "particle.minus_branch.stationarity";
    let mut rng = ctx.rng(id);
    let mut smallest = f64::INFINITY;
    let mut witness = None;
    for _ in 0..s {
        let p = pm.space().lower(&random_timelike(pm.space(), &mut rng));
        let z = [random_point(&mut rng, n), p, vec![random_positive(&mut rng, 0.1, 10.0)]].concat();
        let expected = pm.reduced_hamiltonian_minus(&z[n..2 * n], z[2 * n]).unwrap_or(f64::NAN);
        let value_gap = relative(minus.hamiltonian(&z).unwrap_or(f64::NAN), expected);
        let d = vertical_gradient(minus.object().family(), &z).map(|g| g[0].abs()).unwrap_or(0.0);
        let d = if value_gap <= 1e-10 { d } else { 0.0 };
        if d < smallest {
            smallest = d;
            witness = Some(z.clone());
        }
    }
    ctx.control(id, "dH~_-/dlambda = -(||p|| + m) never vanishes", s, smallest, pm.mass(), witness);

    let id = "particle.minus_branch.members";
    let mut rng = ctx.rng(id);
    let mut t = Tally::default();
    for _ in 0..s {
        let w = pm.sample_member(&mut rng);
        let cand = DynamicsCandidate::Single(w.clone());
        let hit = a_membership(minus.object(), &cand, &pm.reduced_seeds(&w.qdot.0), &loose)?.member;
        t.note(!hit, || w.coords());
    }
    ctx.tally(id, "the family H~_- generates an empty set", t);

    let id = "particle.dirac.contains_dynamics";
    let mut rng = ctx.rng(id);
    let mut t = Tally::default();
    for _ in 0..s {
        let w = pm.sample_member(&mut rng);
        let generic = a_membership(sys.dirac.object(), &DynamicsCandidate::Single(w.clone()), &[], &loose)?.member;
        t.note(generic && pm.dirac_dynamics_membership(&w, &loose), || w.coords());
    }
    ctx.tally(id, "D is contained in the set D^ generated by the Dirac system on K_m", t);

    let id = "particle.dirac.strict_witness";
    let mut rng = ctx.rng(id);
    let mut t = Tally::default();
    for _ in 0..s.div_ceil(10) {
        let p = pm.sample_shell(&mut rng);
        let w = tts(&random_point(&mut rng, n), &p, &vec![0.0; n], &vec![0.0; n]);
        let cand = DynamicsCandidate::Single(w.clone());
        let in_hat = a_membership(sys.dirac.object(), &cand, &[], &loose)?.member;
        let in_d = a_membership(sys.lagrangian.object(), &cand, &[], &loose)?.member || pm.dynamics_membership(&w, &loose);
        t.note(in_hat && !in_d, || w.coords());
    }
    ctx.tally(id, "(q, p, 0, 0) with ||p|| = m lies in D^ but not in D", t);

    let id = "particle.dirac.values";
    let mut rng = ctx.rng(id);
    let mut w = Worst::default();
    for _ in 0..s {
        let z = [random_point(&mut rng, n), pm.sample_shell(&mut rng)].concat();
        let v = sys.dirac.hamiltonian(&z).unwrap_or(f64::NAN);
        w.note(v.abs(), || z.clone());
    }
    ctx.worst(id, "the Dirac family vanishes on K_m", w, 1e-10);

    let composed = pm.inverse_composed(&exact)?;
    let round_trip = pm.inverse_round_trip(&exact)?;
    let id = "particle.round_trip";
    let mut rng = ctx.rng(id);
    let mut w = Worst::default();
    for _ in 0..s {
        let y = [random_point(&mut rng, n), random_timelike(pm.space(), &mut rng)].concat();
        let expected = pm.lagrangian_value(&y[n..]).unwrap_or(f64::NAN);
        w.note(relative(round_trip.lagrangian(&y).unwrap_or(f64::NAN), expected), || y.clone());
    }
    ctx.worst(id, "L~ o xi = m sqrt(<g(qdot), qdot>)", w, 1e-9);

    let id = "particle.round_trip.spacelike";
    let mut rng = ctx.rng(id);
    let mut t = Tally::default();
    for _ in 0..s.div_ceil(10) {
        let q = random_point(&mut rng, n);
        let qdot = random_spacelike(pm.space(), &mut rng);
        let base = [q.clone(), qdot.clone()].concat();
        let found = pm
            .inverse_seeds(&q, &qdot)
            .iter()
            .any(|seed| matches!(solve_critical(composed.object().family(), &base, seed, &exact), Ok(Some(_))));
        t.note(!found, || base.clone());
    }
    ctx.tally(id, "S(L~, eta~) lies over timelike velocities only", t);

    let id = "particle.trajectory";
    let mut rng = ctx.rng(id);
    let kind = ModelKind::Particle(pm.clone());
    let mut t = Tally::default();
    for _ in 0..s.div_ceil(10) {
        let q0 = random_point(&mut rng, n);
        let p0 = pm.sample_shell(&mut rng);
        let step = rng.gen_range(0.01..1.0);
        for w in trajectory_sample(&kind, &q0, &p0, 10, step, &exact)? {
            t.note(pm.dynamics_membership(&w, &exact), || w.coords());
        }
    }
    ctx.tally(id, "straight lines with qdot = g^{-1}(p) / m lie in D", t);
    Ok(())
}

fn optics(ctx: &mut Ctx) -> Result<()> {
    let (n, s) = (ctx.n, ctx.samples);
    let loose = ctx.loose;
    let exact = ctx.exact;
    let om = ctx.optics.clone();
    let sys = om.systems(&exact)?;

    let id = "optics.dynamics";
    let mut rng = ctx.rng(id);
    let (mut lag_t, mut full_t, mut red_t) = (Tally::default(), Tally::default(), Tally::default());
    for i in 0..s {
        let member = i % 2 == 0;
        let w = if member { om.sample_member(&mut rng) } else { om.sample_non_member(&mut rng) };
        let oracle = om.dynamics_membership(&w, &loose);
        let cand = DynamicsCandidate::Single(w.clone());
        let scalar = om.scalar_seeds(&w.p.0, &w.qdot.0);
        let lag = a_membership(sys.lagrangian.object(), &cand, &scalar, &loose)?.member;
        let full_seeds = om.full_seeds(&w.q.0, &w.p.0, &w.qdot.0);
        let full = a_membership(sys.hamiltonian_full.object(), &cand, &full_seeds, &loose)?.member;
        let red = a_membership(sys.hamiltonian_reduced.object(), &cand, &scalar, &loose)?.member;
        lag_t.note(oracle == member && lag == oracle, || w.coords());
        full_t.note(full == lag && full == oracle, || w.coords());
        red_t.note(red == oracle, || w.coords());
    }
    ctx.tally("optics.dynamics.lagrangian", "D = { <g(qdot), qdot> = 0, p = g(qdot) / mu, mu > 0, pdot = 0 }", lag_t);
    ctx.tally("optics.dynamics.hamiltonian_full", "the Legendre transform generates the same dynamics", full_t);
    ctx.tally("optics.dynamics.hamiltonian_reduced", "the reduced system -H~ generates D", red_t);

    let id = "optics.reduced_values";
    let mut rng = ctx.rng(id);
    let mut w = Worst::default();
    for _ in 0..s {
        let z = [random_point(&mut rng, n), uniform(&mut rng, n), vec![random_positive(&mut rng, 0.2, 5.0)]].concat();
        let expected = om.reduced_hamiltonian(&z[n..2 * n], z[2 * n]);
        w.note(relative(sys.hamiltonian_reduced.hamiltonian(&z).unwrap_or(f64::NAN), expected), || z.clone());
    }
    ctx.worst(id, "H o xi = H~ = (mu / 2) <p, g^{-1}(p)>", w, 1e-10);

    let round_trip = om.inverse_round_trip(&exact)?;
    let id = "optics.round_trip";
    let mut rng = ctx.rng(id);
    let mut w = Worst::default();
    for _ in 0..s {
        let y = [random_point(&mut rng, n), uniform(&mut rng, n), vec![random_positive(&mut rng, 0.2, 5.0)]].concat();
        let expected = sys.lagrangian.lagrangian(&y).unwrap_or(f64::NAN);
        w.note(relative(round_trip.lagrangian(&y).unwrap_or(f64::NAN), expected), || y.clone());
    }
    ctx.worst(id, "the inverse Legendre transform of H~ reduces to L = <g(qdot), qdot> / (2 mu)", w, 1e-10);

    let id = "optics.trajectory";
    let mut rng = ctx.rng(id);
    let mut t = Tally::default();
    for _ in 0..s.div_ceil(10) {
        let q0 = random_point(&mut rng, n);
        let (w0, _) = om.sample_member_with_multiplier(&mut rng);
        let kind = ModelKind::Optics { model: om.clone(), mu: random_positive(&mut rng, 0.2, 5.0) };
        let step = rng.gen_range(0.01..1.0);
        for w in trajectory_sample(&kind, &q0, &w0.p.0, 10, step, &exact)? {
            t.note(om.dynamics_membership(&w, &exact), || w.coords());
        }
    }
    ctx.tally(id, "null lines with qdot = mu g^{-1}(p) lie in D", t);
    Ok(())
}
