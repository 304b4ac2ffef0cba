//! Damped Gauss-Newton iteration for small dense systems.

use nalgebra::{DMatrix, DVector};

use crate::family::SolverConfig;
use crate::linalg::{inf_norm, lstsq, two_norm};

/// Result of a Gauss-Newton run.
#[derive(Debug, Clone)]
pub(crate) struct Outcome {
    pub x: Vec<f64>,
    pub residual: f64,
    pub converged: bool,
}

/// Drive `residual(x)` to zero starting at `x0`.
///
/// `residual` returns `None` outside the admissible region. Convergence means
/// `||r||_inf <= threshold`.
pub(crate) fn gauss_newton(
    residual: &dyn Fn(&[f64]) -> Option<Vec<f64>>,
    x0: &[f64],
    threshold: f64,
    cfg: &SolverConfig,
) -> Outcome {
    let fail = |x: Vec<f64>, r: f64| Outcome { x, residual: r, converged: false };
    let Some(mut r) = residual(x0) else {
        return fail(x0.to_vec(), f64::INFINITY);
    };
    let mut x = x0.to_vec();
    let radius = cfg.divergence_radius * (1.0 + two_norm(x0));
    for _ in 0..=cfg.max_iterations {
        let norm = inf_norm(&r);
        if norm <= threshold {
            return Outcome { x, residual: norm, converged: true };
        }
        if x.is_empty() {
            return fail(x, norm);
        }
        let jac = jacobian(residual, &x, &r, cfg.fd_step);
        let step = lstsq(&jac, &DVector::from_column_slice(&r), 1e-13);
        let merit = two_norm(&r);
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..30 {
            let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, s)| a - t * s).collect();
            if let Some(rt) = residual(&trial) {
                if two_norm(&rt) < merit {
                    accepted = Some((trial, rt));
                    break;
                }
            }
            t *= 0.5;
        }
        let Some((xn, rn)) = accepted else {
            return fail(x, norm);
        };
        x = xn;
        r = rn;
        let drift = two_norm(&x.iter().zip(x0).map(|(a, b)| a - b).collect::<Vec<_>>());
        if drift > radius {
            return fail(x, inf_norm(&r));
        }
    }
    let norm = inf_norm(&r);
    Outcome { converged: norm <= threshold, x, residual: norm }
}

fn jacobian(
    residual: &dyn Fn(&[f64]) -> Option<Vec<f64>>,
    x: &[f64],
    r0: &[f64],
    fd_step: f64,
) -> DMatrix<f64> {
    let m = r0.len();
    let n = x.len();
    let mut jac = DMatrix::zeros(m, n);
    let mut y = x.to_vec();
    for j in 0..n {
        let h = fd_step * (1.0 + x[j].abs());
        y[j] = x[j] + h;
        let plus = residual(&y);
        y[j] = x[j] - h;
        let minus = residual(&y);
        y[j] = x[j];
        let col: Option<Vec<f64>> = match (plus, minus) {
            (Some(p), Some(q)) => Some(p.iter().zip(&q).map(|(a, b)| (a - b) / (2.0 * h)).collect()),
            (Some(p), None) => Some(p.iter().zip(r0).map(|(a, b)| (a - b) / h).collect()),
            (None, Some(q)) => Some(r0.iter().zip(&q).map(|(a, b)| (a - b) / h).collect()),
            (None, None) => None,
        };
        if let Some(col) = col {
            for i in 0..m {
                jac[(i, j)] = col[i];
            }
        }
    }
    jac
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_nonlinear_system() {
        let cfg = SolverConfig::default();
        let res = |x: &[f64]| Some(vec![x[0] * x[0] - 2.0, x[1] - x[0]]);
        let out = gauss_newton(&res, &[1.0, 0.0], 1e-12, &cfg);
        assert!(out.converged);
        assert!((out.x[0] - 2f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn respects_domain() {
        let cfg = SolverConfig::default();
        // root at x = -1 is outside the admissible half line
        let res = |x: &[f64]| if x[0] > 0.0 { Some(vec![x[0] + 1.0]) } else { None };
        let out = gauss_newton(&res, &[1.0], 1e-12, &cfg);
        assert!(!out.converged);
    }

    #[test]
    fn stops_on_divergence() {
        let cfg = SolverConfig::default();
        let res = |x: &[f64]| if x[0] > 0.0 { Some(vec![-0.5 / (x[0] * x[0])]) } else { None };
        let out = gauss_newton(&res, &[1.0], 1e-10, &cfg);
        assert!(!out.converged);
    }

    #[test]
    fn empty_unknowns() {
        let cfg = SolverConfig::default();
        assert!(gauss_newton(&|_| Some(vec![0.0]), &[], 1e-12, &cfg).converged);
        assert!(!gauss_newton(&|_| Some(vec![1.0]), &[], 1e-12, &cfg).converged);
    }
}
