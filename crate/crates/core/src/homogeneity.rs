//! Actions of the multiplicative group of positive reals and homogeneity tests.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bundle::{alpha_q, alpha_q_inv, TStarTQPoint, TTStarQPoint};
use crate::error::{check_dim, Error, Result};
use crate::family::{Conditions, FamilyOfFunctions, SolverConfig};
use crate::linalg::{fd_jacobian, inf_norm};
use crate::minkowski::{Covector, Point, Vector};

pub type ActionFn = Arc<dyn Fn(f64, &[f64]) -> Vec<f64> + Send + Sync>;

/// An action of `(R+, *)` on a coordinate space.
#[derive(Clone)]
pub enum ScalingAction {
    Trivial { dim: usize },
    /// `(q, v) -> (q, k v)` on `TQ` with `dim Q = n`.
    TangentScaling { n: usize },
    /// `x_i -> k^{w_i} x_i`.
    Weighted(Vec<i32>),
    /// Independent actions on consecutive blocks of coordinates.
    Product(Vec<ScalingAction>),
    Custom { dim: usize, map: ActionFn },
}

impl fmt::Debug for ScalingAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalingAction::Trivial { dim } => write!(f, "Trivial({dim})"),
            ScalingAction::TangentScaling { n } => write!(f, "TangentScaling({n})"),
            ScalingAction::Weighted(w) => write!(f, "Weighted({w:?})"),
            ScalingAction::Product(parts) => f.debug_list().entries(parts).finish(),
            ScalingAction::Custom { dim, .. } => write!(f, "Custom({dim})"),
        }
    }
}

fn check_scale(k: f64) -> Result<()> {
    if k > 0.0 && k.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("scale factor must be positive, got {k}")))
    }
}

impl ScalingAction {
    pub fn dim(&self) -> usize {
        match self {
            ScalingAction::Trivial { dim } | ScalingAction::Custom { dim, .. } => *dim,
            ScalingAction::TangentScaling { n } => 2 * n,
            ScalingAction::Weighted(w) => w.len(),
            ScalingAction::Product(parts) => parts.iter().map(|p| p.dim()).sum(),
        }
    }

    pub fn apply(&self, k: f64, x: &[f64]) -> Result<Vec<f64>> {
        check_scale(k)?;
        check_dim(self.dim(), x.len())?;
        Ok(self.apply_unchecked(k, x))
    }

    fn apply_unchecked(&self, k: f64, x: &[f64]) -> Vec<f64> {
        match self {
            ScalingAction::Trivial { .. } => x.to_vec(),
            ScalingAction::TangentScaling { n } => {
                x.iter().enumerate().map(|(i, v)| if i < *n { *v } else { k * v }).collect()
            }
            ScalingAction::Weighted(w) => x.iter().zip(w).map(|(v, e)| k.powi(*e) * v).collect(),
            ScalingAction::Product(parts) => {
                let mut out = Vec::with_capacity(x.len());
                let mut at = 0;
                for p in parts {
                    out.extend(p.apply_unchecked(k, &x[at..at + p.dim()]));
                    at += p.dim();
                }
                out
            }
            ScalingAction::Custom { map, .. } => map(k, x),
        }
    }

    /// Jacobian of `x -> action(k, x)`.
    pub fn jacobian(&self, k: f64, x: &[f64]) -> Result<DMatrix<f64>> {
        check_scale(k)?;
        check_dim(self.dim(), x.len())?;
        Ok(match self {
            ScalingAction::Custom { map, dim } => fd_jacobian(&|y| map(k, y), x, *dim),
            _ => {
                let ones = vec![1.0; x.len()];
                DMatrix::from_diagonal(&DVector::from_vec(self.apply_unchecked(k, &ones)))
            }
        })
    }

    /// Worst violation of `action(1, x) = x` and `action(k, action(k2, x)) = action(k k2, x)`.
    pub fn axioms_residual(&self, x: &[f64], k: f64, k2: f64) -> Result<f64> {
        let id = self.apply(1.0, x)?;
        let a = self.apply(k, &self.apply(k2, x)?)?;
        let b = self.apply(k * k2, x)?;
        let scale = 1.0 + inf_norm(x).max(inf_norm(&b));
        let e1 = id.iter().zip(x).fold(0.0f64, |m, (u, v)| m.max((u - v).abs()));
        let e2 = a.iter().zip(&b).fold(0.0f64, |m, (u, v)| m.max((u - v).abs()));
        Ok(e1.max(e2) / scale)
    }
}

/// The lift `k T* mu(1/k)` of a base action to covectors.
///
/// Returns the new base point `mu(k, x)` and the transported covector
/// `k * D mu(1/k)(mu(k, x))^T f`.
pub fn lifted_cotangent_action(mu: &ScalingAction, k: f64, x: &[f64], f: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    check_scale(k)?;
    check_dim(mu.dim(), f.len())?;
    let y = mu.apply(k, x)?;
    let d = mu.jacobian(1.0 / k, &y)?;
    let g = d.transpose() * DVector::from_column_slice(f) * k;
    Ok((y, g.iter().copied().collect()))
}

/// `alpha_Q^{-1} o kappa_bar(k) o alpha_Q` with `kappa_bar` the lift of tangent scaling.
pub fn hat_kappa(k: f64, w: &TTStarQPoint) -> Result<TTStarQPoint> {
    let n = w.dim();
    let a = alpha_q(w);
    let base = [a.q.as_slice(), a.qdot.as_slice()].concat();
    let cov = [a.a.as_slice(), a.b.as_slice()].concat();
    let (y, g) = lifted_cotangent_action(&ScalingAction::TangentScaling { n }, k, &base, &cov)?;
    Ok(alpha_q_inv(&TStarTQPoint {
        q: Point(y[..n].to_vec()),
        qdot: Vector(y[n..].to_vec()),
        a: Covector(g[..n].to_vec()),
        b: Covector(g[n..].to_vec()),
    }))
}

/// Scale factors for homogeneity sampling: the two extreme decades first,
/// then log-uniform in `[1e-3, 1e3]`.
pub fn sample_scale(rng: &mut ChaCha8Rng, index: usize) -> f64 {
    match index {
        0 => 1e-3,
        1 => 1e3,
        _ => 10f64.powf(rng.gen_range(-3.0..=3.0)),
    }
}

/// Summary of a sampled homogeneity test.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomogeneityReport {
    pub samples: usize,
    pub max_residual: f64,
    /// Samples whose residual exceeded the tolerance of the test.
    pub failures: usize,
    pub witness: Option<Vec<f64>>,
    pub worst_scale: Option<f64>,
}

impl HomogeneityReport {
    fn new() -> Self {
        Self { samples: 0, max_residual: 0.0, failures: 0, witness: None, worst_scale: None }
    }

    fn record(&mut self, residual: f64, tol: f64, x: &[f64], k: f64) {
        self.samples += 1;
        let r = if residual.is_nan() { f64::INFINITY } else { residual };
        if r > tol {
            self.failures += 1;
        }
        if r > self.max_residual || (self.witness.is_none() && r > tol) {
            self.max_residual = self.max_residual.max(r);
            self.witness = Some(x.to_vec());
            self.worst_scale = Some(k);
        }
    }
}

/// `F(nu(k, r)) = k F(r)` at sampled `r` and `k`; residuals are relative.
pub fn check_family_homogeneous(
    fam: &FamilyOfFunctions,
    action: &ScalingAction,
    sampler: &dyn Fn(&mut ChaCha8Rng) -> Vec<f64>,
    samples: usize,
    rng: &mut ChaCha8Rng,
    tol: f64,
) -> Result<HomogeneityReport> {
    check_dim(fam.total_dim(), action.dim())?;
    let mut report = HomogeneityReport::new();
    for i in 0..samples {
        let x = sampler(rng);
        let k = sample_scale(rng, i);
        let f = fam.value(&x)?;
        let y = action.apply(k, &x)?;
        let residual = match fam.value(&y) {
            Ok(fy) => {
                let scale = fy.abs().max((k * f).abs());
                if scale < 1e-300 {
                    0.0
                } else {
                    (fy - k * f).abs() / scale
                }
            }
            Err(_) => f64::INFINITY,
        };
        report.record(residual, tol, &x, k);
    }
    Ok(report)
}

/// Critical points stay critical under the action.
///
/// `critical_sampler` must return points of the critical set; points that are
/// not critical within the solver tolerance are reported as failures.
pub fn check_critical_set_homogeneous(
    fam: &FamilyOfFunctions,
    action: &ScalingAction,
    critical_sampler: &dyn Fn(&mut ChaCha8Rng) -> Vec<f64>,
    samples: usize,
    rng: &mut ChaCha8Rng,
    cfg: &SolverConfig,
) -> Result<HomogeneityReport> {
    check_dim(fam.total_dim(), action.dim())?;
    let cond = Conditions::criticality(fam);
    let tol = cond.threshold(cfg);
    let residual_at = |x: &[f64]| cond.eval(fam, x, cfg).map(|r| inf_norm(&r)).unwrap_or(f64::INFINITY);
    let mut report = HomogeneityReport::new();
    for i in 0..samples {
        let x = critical_sampler(rng);
        let k = sample_scale(rng, i);
        let before = residual_at(&x);
        let after = residual_at(&action.apply(k, &x)?);
        report.record(before.max(after), tol, &x, k);
    }
    Ok(report)
}

/// Sampled members of a set remain members after the action.
///
/// The residual of a sample is 0 or 1; the report tolerance is 0.
pub fn check_set_homogeneous(
    membership: &dyn Fn(&[f64]) -> bool,
    action: &ScalingAction,
    member_sampler: &dyn Fn(&mut ChaCha8Rng) -> Vec<f64>,
    samples: usize,
    rng: &mut ChaCha8Rng,
) -> Result<HomogeneityReport> {
    let mut report = HomogeneityReport::new();
    for i in 0..samples {
        let x = member_sampler(rng);
        let k = sample_scale(rng, i);
        let ok = membership(&x) && membership(&action.apply(k, &x)?);
        report.record(if ok { 0.0 } else { 1.0 }, 0.0, &x, k);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::object::tts;
    use rand::SeedableRng;

    #[test]
    fn lifted_tangent_scaling() {
        let mu = ScalingAction::TangentScaling { n: 2 };
        let x = [1.0, 2.0, 3.0, 4.0];
        let f = [5.0, 6.0, 7.0, 8.0];
        let (y, g) = lifted_cotangent_action(&mu, 2.0, &x, &f).unwrap();
        assert_eq!(y, vec![1.0, 2.0, 6.0, 8.0]);
        assert_eq!(g, vec![10.0, 12.0, 7.0, 8.0]);
        let (y, g) = lifted_cotangent_action(&mu, 1.0, &x, &f).unwrap();
        assert_eq!((y.as_slice(), g.as_slice()), (&x[..], &f[..]));
        assert!(lifted_cotangent_action(&mu, 0.0, &x, &f).is_err());
        assert!(lifted_cotangent_action(&mu, -1.0, &x, &f).is_err());
    }

    #[test]
    fn lifted_action_group_law() {
        let mu = ScalingAction::Weighted(vec![0, 1, 2]);
        let x = [0.3, -1.2, 2.0];
        let f = [1.0, 0.5, -0.25];
        let (y1, g1) = lifted_cotangent_action(&mu, 3.0, &x, &f).unwrap();
        let (y2, g2) = lifted_cotangent_action(&mu, 0.5, &y1, &g1).unwrap();
        let (y3, g3) = lifted_cotangent_action(&mu, 1.5, &x, &f).unwrap();
        for (a, b) in y2.iter().chain(&g2).zip(y3.iter().chain(&g3)) {
            assert!((a - b).abs() < 1e-12 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn custom_action_lift_matches_weighted() {
        let weighted = ScalingAction::Weighted(vec![0, 1]);
        let custom = ScalingAction::Custom { dim: 2, map: Arc::new(|k, x| vec![x[0], k * x[1]]) };
        let (_, g1) = lifted_cotangent_action(&weighted, 2.5, &[1.0, 1.0], &[1.0, 1.0]).unwrap();
        let (_, g2) = lifted_cotangent_action(&custom, 2.5, &[1.0, 1.0], &[1.0, 1.0]).unwrap();
        for (a, b) in g1.iter().zip(&g2) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn hat_kappa_is_fiber_scaling() {
        let w = tts(&[1.0, 2.0, 3.0, 4.0], &[0.5, 0.1, 0.0, -0.2], &[1.0, 0.0, 0.0, 0.0], &[0.3, 0.0, 1.0, 0.0]);
        let h = hat_kappa(2.0, &w).unwrap();
        assert_eq!(h, w.fiber_scaled(2.0));
        assert_eq!(hat_kappa(1.0, &w).unwrap(), w);
    }

    #[test]
    fn action_axioms() {
        let a = ScalingAction::Product(vec![
            ScalingAction::Trivial { dim: 1 },
            ScalingAction::TangentScaling { n: 1 },
            ScalingAction::Weighted(vec![-1, 2]),
        ]);
        assert_eq!(a.dim(), 5);
        let x = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert!(a.axioms_residual(&x, 7.0, 0.01).unwrap() < 1e-12);
        assert_eq!(a.apply(2.0, &x).unwrap(), vec![1.0, 2.0, 6.0, 2.0, 20.0]);
    }

    #[test]
    fn degree_two_family_fails() {
        let fam = FamilyOfFunctions::function(2, |x| x[1] * x[1]);
        let action = ScalingAction::TangentScaling { n: 1 };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let sampler = |r: &mut ChaCha8Rng| vec![r.gen_range(-1.0..1.0), r.gen_range(0.5..2.0)];
        let rep = check_family_homogeneous(&fam, &action, &sampler, 20, &mut rng, 1e-10).unwrap();
        assert!(rep.max_residual > 0.5);
        assert_eq!(rep.failures, 20);
        let lin = FamilyOfFunctions::function(2, |x| 3.0 * x[1]);
        let rep = check_family_homogeneous(&lin, &action, &sampler, 20, &mut rng, 1e-10).unwrap();
        assert!(rep.max_residual < 1e-14);
        assert_eq!(rep.failures, 0);
    }

    #[test]
    fn scales_cover_the_extremes() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert_eq!(sample_scale(&mut rng, 0), 1e-3);
        assert_eq!(sample_scale(&mut rng, 1), 1e3);
        for i in 2..200 {
            let k = sample_scale(&mut rng, i);
            assert!((1e-3..=1e3).contains(&k));
        }
    }
}
