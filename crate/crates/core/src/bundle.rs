//! Iterated tangent and cotangent bundles of an affine space in flat coordinates.
//!
//! With `TQ = Q x V` and `T*Q = Q x V*` every bundle in play is a product of
//! copies of `Q`, `V` and `V*`. This module fixes the coordinate layouts and
//! implements the canonical maps between them.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::minkowski::{dot, Covector, Point, Vector};

/// A tangent vector `(q, qdot)` in `TQ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TQPoint {
    pub q: Point,
    pub qdot: Vector,
}

/// A covector `(q, p)` in `T*Q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TStarQPoint {
    pub q: Point,
    pub p: Covector,
}

/// An element `(q, p, qdot, pdot)` of `TT*Q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TTStarQPoint {
    pub q: Point,
    pub p: Covector,
    pub qdot: Vector,
    pub pdot: Covector,
}

/// A tangent vector to `TT*Q`: a base element together with its variations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TTTStarQPoint {
    pub base: TTStarQPoint,
    pub dq: Vector,
    pub dp: Covector,
    pub dqdot: Vector,
    pub dpdot: Covector,
}

/// An element `(q, v, qdot, vdot)` of `TTQ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TTQPoint {
    pub q: Point,
    pub v: Vector,
    pub qdot: Vector,
    pub vdot: Vector,
}

/// A covector on `TQ` at `(q, qdot)`, pairing as `<a, dq> + <b, dqdot>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TStarTQPoint {
    pub q: Point,
    pub qdot: Vector,
    pub a: Covector,
    pub b: Covector,
}

/// A covector on `T*Q` at `(q, p)`, pairing as `<a, dq> + <dp, b>`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TStarTStarQPoint {
    pub q: Point,
    pub p: Covector,
    pub a: Covector,
    pub b: Vector,
}

impl TQPoint {
    pub fn new(q: Point, qdot: Vector) -> Self {
        Self { q, qdot }
    }

    pub fn dim(&self) -> usize {
        self.q.dim()
    }

    pub fn coords(&self) -> Vec<f64> {
        [self.q.as_slice(), self.qdot.as_slice()].concat()
    }

    pub fn from_coords(c: &[f64]) -> Result<Self> {
        let n = half(c.len())?;
        Ok(Self { q: c[..n].into(), qdot: c[n..].into() })
    }
}

impl TStarQPoint {
    pub fn new(q: Point, p: Covector) -> Self {
        Self { q, p }
    }

    pub fn dim(&self) -> usize {
        self.q.dim()
    }

    pub fn coords(&self) -> Vec<f64> {
        [self.q.as_slice(), self.p.as_slice()].concat()
    }

    pub fn from_coords(c: &[f64]) -> Result<Self> {
        let n = half(c.len())?;
        Ok(Self { q: c[..n].into(), p: c[n..].into() })
    }
}

impl TTStarQPoint {
    pub fn new(q: Point, p: Covector, qdot: Vector, pdot: Covector) -> Self {
        Self { q, p, qdot, pdot }
    }

    pub fn dim(&self) -> usize {
        self.q.dim()
    }

    /// Layout `[q, p, qdot, pdot]`.
    pub fn coords(&self) -> Vec<f64> {
        [self.q.as_slice(), self.p.as_slice(), self.qdot.as_slice(), self.pdot.as_slice()].concat()
    }

    pub fn from_coords(c: &[f64]) -> Result<Self> {
        if !c.len().is_multiple_of(4) || c.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "TT*Q coordinates need a positive multiple of 4 entries, got {}",
                c.len()
            )));
        }
        let n = c.len() / 4;
        Ok(Self {
            q: c[..n].into(),
            p: c[n..2 * n].into(),
            qdot: c[2 * n..3 * n].into(),
            pdot: c[3 * n..].into(),
        })
    }

    /// `tau_{T*Q}`: the base covector `(q, p)`.
    pub fn cotangent_base(&self) -> TStarQPoint {
        TStarQPoint::new(self.q.clone(), self.p.clone())
    }

    /// `T pi_Q`: the tangent vector `(q, qdot)`.
    pub fn tangent_projection(&self) -> TQPoint {
        TQPoint::new(self.q.clone(), self.qdot.clone())
    }

    /// Scaling of the fiber of `tau_{T*Q}`: `(q, p, k qdot, k pdot)`.
    pub fn fiber_scaled(&self, k: f64) -> Self {
        Self::new(self.q.clone(), self.p.clone(), self.qdot.scaled(k), self.pdot.scaled(k))
    }
}

impl TTTStarQPoint {
    pub fn zero_variation(base: TTStarQPoint) -> Self {
        let n = base.dim();
        Self {
            base,
            dq: Vector::zeros(n),
            dp: Covector::zeros(n),
            dqdot: Vector::zeros(n),
            dpdot: Covector::zeros(n),
        }
    }
}

impl TTQPoint {
    pub fn coords(&self) -> Vec<f64> {
        [self.q.as_slice(), self.v.as_slice(), self.qdot.as_slice(), self.vdot.as_slice()].concat()
    }
}

impl TStarTQPoint {
    /// Pairing with a tangent vector `(dq, dqdot)` of `TQ` at the same base.
    pub fn pair(&self, dq: &Vector, dqdot: &Vector) -> f64 {
        dot(&self.a.0, &dq.0) + dot(&self.b.0, &dqdot.0)
    }
}

impl TStarTStarQPoint {
    /// Pairing with a tangent vector `(dq, dp)` of `T*Q` at the same base.
    pub fn pair(&self, dq: &Vector, dp: &Covector) -> f64 {
        dot(&self.a.0, &dq.0) + dot(&dp.0, &self.b.0)
    }
}

fn half(len: usize) -> Result<usize> {
    if !len.is_multiple_of(2) || len == 0 {
        return Err(Error::InvalidArgument(format!("expected an even positive length, got {len}")));
    }
    Ok(len / 2)
}

/// `<d_T theta_Q, x> = <pdot, dq> + <p, dqdot>`.
pub fn eval_dt_theta(x: &TTTStarQPoint) -> f64 {
    dot(&x.base.pdot.0, &x.dq.0) + dot(&x.base.p.0, &x.dqdot.0)
}

/// `<i_T d theta_Q, x> = <pdot, dq> - <dp, qdot>`.
pub fn eval_it_dtheta(x: &TTTStarQPoint) -> f64 {
    dot(&x.base.pdot.0, &x.dq.0) - dot(&x.dp.0, &x.base.qdot.0)
}

/// `alpha_Q: TT*Q -> T*TQ`, `(q, p, qdot, pdot) -> ((q, qdot); pdot, p)`.
pub fn alpha_q(w: &TTStarQPoint) -> TStarTQPoint {
    TStarTQPoint { q: w.q.clone(), qdot: w.qdot.clone(), a: w.pdot.clone(), b: w.p.clone() }
}

pub fn alpha_q_inv(f: &TStarTQPoint) -> TTStarQPoint {
    TTStarQPoint::new(f.q.clone(), f.b.clone(), f.qdot.clone(), f.a.clone())
}

/// `beta: TT*Q -> T*T*Q`, `(q, p, qdot, pdot) -> ((q, p); pdot, -qdot)`.
pub fn beta(w: &TTStarQPoint) -> TStarTStarQPoint {
    TStarTStarQPoint { q: w.q.clone(), p: w.p.clone(), a: w.pdot.clone(), b: w.qdot.scaled(-1.0) }
}

pub fn beta_inv(f: &TStarTStarQPoint) -> TTStarQPoint {
    TTStarQPoint::new(f.q.clone(), f.p.clone(), f.b.scaled(-1.0), f.a.clone())
}

/// The canonical involution of `TTQ`: swaps the two middle slots.
pub fn kappa_q(u: &TTQPoint) -> TTQPoint {
    TTQPoint { q: u.q.clone(), v: u.qdot.clone(), qdot: u.v.clone(), vdot: u.vdot.clone() }
}

/// Vertical lift of `v'` at `v`: the velocity of `s -> v + s v'` at `s = 0`.
pub fn chi_tq(v: &TQPoint, v_prime: &TQPoint) -> Result<TTQPoint> {
    check_dim(v.dim(), v_prime.dim())?;
    if v.q != v_prime.q {
        return Err(Error::BaseMismatch);
    }
    let n = v.dim();
    Ok(TTQPoint { q: v.q.clone(), v: v.qdot.clone(), qdot: Vector::zeros(n), vdot: v_prime.qdot.clone() })
}

/// Vertical lift of `p'` at `p` in `TT*Q`.
pub fn chi_tstar_q(p: &TStarQPoint, p_prime: &TStarQPoint) -> Result<TTStarQPoint> {
    check_dim(p.dim(), p_prime.dim())?;
    if p.q != p_prime.q {
        return Err(Error::BaseMismatch);
    }
    let n = p.dim();
    Ok(TTStarQPoint::new(p.q.clone(), p.p.clone(), Vector::zeros(n), p_prime.p.clone()))
}
