//! The free relativistic particle and space-time geometric optics over
//! affine Minkowski space-time, with closed-form oracles for their dynamics
//! and Legendre relations.
//!
//! Metrics are taken with the time direction first: `g = diag(d_0, ..., d_{n-1})`
//! with `d_0 > 0` and `d_i < 0` otherwise.

mod optics;
mod particle;

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::bundle::TTStarQPoint;
use crate::error::{check_dim, Error, Result};
use crate::family::{FamilyOfFunctions, SolverConfig};
use crate::homogeneity::ScalingAction;
use crate::linalg::inf_norm;
use crate::minkowski::MinkowskiSpace;
use crate::object::{tts, Sampler};

pub use optics::{OpticsModel, OpticsSystems};
pub use particle::{ParticleModel, ParticleSystems};

/// A named example family with a sampler of its total space and, when it
/// exists, an action under which it is homogeneous of degree one.
#[derive(Clone)]
pub struct FamilyFixture {
    pub name: &'static str,
    pub family: FamilyOfFunctions,
    pub sampler: Sampler,
    pub action: Option<ScalingAction>,
}

fn require_lorentzian(space: &MinkowskiSpace) -> Result<()> {
    let d = space.diagonal();
    if d.len() < 2 || d[0] <= 0.0 || d[1..].iter().any(|x| *x >= 0.0) {
        return Err(Error::InvalidArgument("metric must have signature (+, -, ..., -) with dim >= 2".into()));
    }
    Ok(())
}

/// `x -> k^{w} x` on consecutive blocks `(len, w)`.
pub(crate) fn block_weights(blocks: &[(usize, i32)]) -> ScalingAction {
    ScalingAction::Weighted(blocks.iter().flat_map(|(len, w)| std::iter::repeat_n(*w, *len)).collect())
}

pub(crate) fn set_identity(j: &mut DMatrix<f64>, row: usize, col: usize, n: usize) {
    for i in 0..n {
        j[(row + i, col + i)] = 1.0;
    }
}

/// Uniform point of the cube `[-5, 5]^n`.
pub fn random_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect()
}

/// Log-uniform number in `[lo, hi]`.
pub fn random_positive(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..=hi.ln())).exp()
}

fn random_spatial(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (1..n).map(|_| rng.gen_range(-2.0..2.0)).collect()
}

fn spatial_quad(space: &MinkowskiSpace, s: &[f64]) -> f64 {
    s.iter().zip(&space.diagonal()[1..]).map(|(x, d)| -d * x * x).sum()
}

fn with_time(t: f64, s: Vec<f64>) -> Vec<f64> {
    std::iter::once(t).chain(s).collect()
}

/// Timelike vector in either cone with `||v||` in `[0.2, 3]`.
pub fn random_timelike(space: &MinkowskiSpace, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let s = random_spatial(rng, space.dim());
    let c = random_positive(rng, 0.2, 3.0);
    let t = ((c * c + spatial_quad(space, &s)) / space.diagonal()[0]).sqrt();
    with_time(if rng.gen_bool(0.5) { t } else { -t }, s)
}

/// Nonzero null vector in either cone.
pub fn random_null(space: &MinkowskiSpace, rng: &mut ChaCha8Rng) -> Vec<f64> {
    loop {
        let s = random_spatial(rng, space.dim());
        let q = spatial_quad(space, &s);
        if q > 0.01 {
            let t = (q / space.diagonal()[0]).sqrt();
            return with_time(if rng.gen_bool(0.5) { t } else { -t }, s);
        }
    }
}

/// Spacelike vector with `-<g(v), v>` in `[0.04, 9]`.
pub fn random_spacelike(space: &MinkowskiSpace, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let d0 = space.diagonal()[0];
    let t: f64 = rng.gen_range(-1.0..1.0);
    let c = random_positive(rng, 0.2, 3.0);
    loop {
        let u = random_spatial(rng, space.dim());
        let q = spatial_quad(space, &u);
        if q > 0.01 {
            let r = ((d0 * t * t + c * c) / q).sqrt();
            return with_time(t, u.into_iter().map(|x| r * x).collect());
        }
    }
}

/// Random nonzero offset with `|.|_inf` log-uniform in `[1e-3, 0.5]`.
pub fn random_offset(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let size = random_positive(rng, 1e-3, 0.5);
    let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-size..size)).collect();
    let i = rng.gen_range(0..n);
    v[i] = if rng.gen_bool(0.5) { size } else { -size };
    v
}

/// Which dynamics a trajectory follows.
#[derive(Debug, Clone)]
pub enum ModelKind {
    Particle(ParticleModel),
    /// Light rays with the gauge `qdot = mu g^{-1}(p)`.
    Optics { model: OpticsModel, mu: f64 },
}

impl ModelKind {
    pub fn dim(&self) -> usize {
        match self {
            ModelKind::Particle(m) => m.dim(),
            ModelKind::Optics { model, .. } => model.dim(),
        }
    }

    pub fn dynamics_membership(&self, w: &TTStarQPoint, cfg: &SolverConfig) -> bool {
        match self {
            ModelKind::Particle(m) => m.dynamics_membership(w, cfg),
            ModelKind::Optics { model, .. } => model.dynamics_membership(w, cfg),
        }
    }

    pub fn dynamics_residual(&self, w: &TTStarQPoint) -> f64 {
        match self {
            ModelKind::Particle(m) => m.dynamics_residual(w),
            ModelKind::Optics { model, .. } => model.dynamics_residual(w),
        }
    }
}

/// Straight-line flow with constant momentum started at `(q0, p0)`.
///
/// Emits `steps` points `(q0 + i h qdot, p0, qdot, 0)`. The velocity is
/// `g^{-1}(p0) / m` for the particle and `mu g^{-1}(p0)` for optics. `p0` must
/// lie on the mass shell, respectively be a nonzero null covector, within
/// `cfg.tolerance`.
pub fn trajectory_sample(
    kind: &ModelKind,
    q0: &[f64],
    p0: &[f64],
    steps: usize,
    step: f64,
    cfg: &SolverConfig,
) -> Result<Vec<TTStarQPoint>> {
    let n = kind.dim();
    check_dim(n, q0.len())?;
    check_dim(n, p0.len())?;
    if !step.is_finite() || q0.iter().chain(p0).any(|x| !x.is_finite()) {
        return Err(Error::InvalidArgument("initial data and step must be finite".into()));
    }
    let qdot = match kind {
        ModelKind::Particle(m) => {
            if !m.on_mass_shell(p0, cfg.tolerance) {
                return Err(Error::InvalidArgument(format!("momentum {p0:?} is not on the mass shell ||p|| = {}", m.mass())));
            }
            m.space().raise(p0).into_iter().map(|v| v / m.mass()).collect::<Vec<_>>()
        }
        ModelKind::Optics { model, mu } => {
            if !(*mu > 0.0 && mu.is_finite()) {
                return Err(Error::InvalidArgument(format!("gauge factor must be positive, got {mu}")));
            }
            if !model.is_null_covector(p0, cfg.tolerance) {
                return Err(Error::InvalidArgument(format!("momentum {p0:?} is not a nonzero null covector")));
            }
            model.space().raise(p0).into_iter().map(|v| mu * v).collect()
        }
    };
    let zero = vec![0.0; n];
    Ok((0..steps)
        .map(|i| {
            let t = i as f64 * step;
            let q: Vec<f64> = q0.iter().zip(&qdot).map(|(a, v)| a + t * v).collect();
            tts(&q, p0, &qdot, &zero)
        })
        .collect())
}

/// Scale-aware maximum deviation `|a - b|_inf / (1 + |b|_inf)`.
pub(crate) fn relative_gap(a: &[f64], b: &[f64]) -> f64 {
    let gap = a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()));
    gap / (1.0 + inf_norm(b))
}

pub(crate) fn sampler(f: impl Fn(&mut ChaCha8Rng) -> Vec<f64> + Send + Sync + 'static) -> Sampler {
    Arc::new(f)
}
