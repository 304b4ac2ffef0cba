//! Minkowski linear algebra over the affine model of space-time.
//!
//! Points of `Q`, vectors of `V` and covectors of `V*` are all stored as plain
//! coordinate arrays; the newtypes keep the three roles apart at the type
//! level. The metric is diagonal.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};

macro_rules! coord_newtype {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
        pub struct $name(pub Vec<f64>);

        impl $name {
            pub fn new(coords: Vec<f64>) -> Self {
                Self(coords)
            }

            pub fn zeros(dim: usize) -> Self {
                Self(vec![0.0; dim])
            }

            pub fn dim(&self) -> usize {
                self.0.len()
            }

            pub fn as_slice(&self) -> &[f64] {
                &self.0
            }

            pub fn scaled(&self, k: f64) -> Self {
                Self(self.0.iter().map(|x| k * x).collect())
            }

            pub fn add(&self, other: &Self) -> Self {
                Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
            }

            pub fn sub(&self, other: &Self) -> Self {
                Self(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
            }

            pub fn max_abs(&self) -> f64 {
                self.0.iter().fold(0.0, |m, x| f64::max(m, x.abs()))
            }
        }

        impl From<Vec<f64>> for $name {
            fn from(v: Vec<f64>) -> Self {
                Self(v)
            }
        }

        impl From<&[f64]> for $name {
            fn from(v: &[f64]) -> Self {
                Self(v.to_vec())
            }
        }
    };
}

coord_newtype!(
    /// Coordinates of a point of the affine space `Q`.
    Point
);
coord_newtype!(
    /// An element of the model vector space `V`.
    Vector
);
coord_newtype!(
    /// An element of the dual space `V*`.
    Covector
);

/// The canonical pairing of a covector with a vector.
pub fn pair(p: &Covector, v: &Vector) -> Result<f64> {
    check_dim(p.dim(), v.dim())?;
    Ok(dot(&p.0, &v.0))
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A finite-dimensional Minkowski space with a diagonal metric `g: V -> V*`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinkowskiSpace {
    diagonal: Vec<f64>,
}

impl Default for MinkowskiSpace {
    fn default() -> Self {
        Self::standard(4)
    }
}

impl MinkowskiSpace {
    /// Signature `(+, -, ..., -)` with unit entries.
    pub fn standard(dim: usize) -> Self {
        assert!(dim >= 1, "Minkowski space needs at least one dimension");
        let mut diagonal = vec![-1.0; dim];
        diagonal[0] = 1.0;
        Self { diagonal }
    }

    pub fn with_diagonal(diagonal: Vec<f64>) -> Result<Self> {
        if diagonal.is_empty() {
            return Err(Error::InvalidArgument("empty metric".into()));
        }
        if diagonal.iter().any(|d| *d == 0.0 || !d.is_finite()) {
            return Err(Error::InvalidArgument(
                "metric diagonal entries must be finite and nonzero".into(),
            ));
        }
        Ok(Self { diagonal })
    }

    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    /// Signs of the diagonal entries.
    pub fn signature(&self) -> Vec<i8> {
        self.diagonal
            .iter()
            .map(|d| if *d > 0.0 { 1 } else { -1 })
            .collect()
    }

    pub fn metric_apply(&self, v: &Vector) -> Covector {
        debug_assert_eq!(v.dim(), self.dim());
        Covector(self.lower(&v.0))
    }

    pub fn metric_inverse_apply(&self, p: &Covector) -> Vector {
        debug_assert_eq!(p.dim(), self.dim());
        Vector(self.raise(&p.0))
    }

    /// `g` acting on raw coordinates.
    pub fn lower(&self, v: &[f64]) -> Vec<f64> {
        v.iter().zip(&self.diagonal).map(|(x, d)| d * x).collect()
    }

    /// `g^-1` acting on raw coordinates.
    pub fn raise(&self, p: &[f64]) -> Vec<f64> {
        p.iter().zip(&self.diagonal).map(|(x, d)| x / d).collect()
    }

    /// `<g(v), v>` on raw coordinates.
    pub fn quad_v(&self, v: &[f64]) -> f64 {
        v.iter().zip(&self.diagonal).map(|(x, d)| d * x * x).sum()
    }

    /// `<p, g^-1(p)>` on raw coordinates.
    pub fn quad_p(&self, p: &[f64]) -> f64 {
        p.iter().zip(&self.diagonal).map(|(x, d)| x * x / d).sum()
    }

    /// `sqrt(<g(v), v>)`, defined only inside the open cone of timelike vectors.
    pub fn v_norm(&self, v: &Vector) -> Result<f64> {
        check_dim(self.dim(), v.dim())?;
        let q = self.quad_v(&v.0);
        if q > 0.0 {
            Ok(q.sqrt())
        } else {
            Err(Error::Domain(format!("<g(v), v> = {q:e} is not positive")))
        }
    }

    /// `sqrt(<p, g^-1(p)>)`, defined only inside the open cone of timelike covectors.
    pub fn p_norm(&self, p: &Covector) -> Result<f64> {
        check_dim(self.dim(), p.dim())?;
        let q = self.quad_p(&p.0);
        if q > 0.0 {
            Ok(q.sqrt())
        } else {
            Err(Error::Domain(format!("<p, g^-1(p)> = {q:e} is not positive")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn space() -> MinkowskiSpace {
        MinkowskiSpace::standard(4)
    }

    #[test]
    fn pairing_examples() {
        let p = Covector::new(vec![2.0, 0.0, 0.0, 0.0]);
        let v = Vector::new(vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(pair(&p, &v).unwrap(), 2.0);
        assert_eq!(pair(&Covector::zeros(4), &Vector::new(vec![3.0, -1.0, 7.0, 2.0])).unwrap(), 0.0);
        let p = Covector::new(vec![1.0, 2.0, 3.0, 4.0]);
        let v = Vector::new(vec![4.0, 3.0, 2.0, 1.0]);
        assert_eq!(pair(&p, &v).unwrap(), 20.0);
    }

    #[test]
    fn pairing_dimension_mismatch() {
        let err = pair(&Covector::zeros(3), &Vector::zeros(4)).unwrap_err();
        assert_eq!(err, Error::DimensionMismatch { expected: 3, found: 4 });
    }

    #[test]
    fn metric_examples() {
        let g = space();
        assert_eq!(g.metric_apply(&Vector::new(vec![1.0, 0.0, 0.0, 0.0])).0, vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(g.metric_apply(&Vector::new(vec![0.0, 1.0, 0.0, 0.0])).0, vec![0.0, -1.0, 0.0, 0.0]);
    }

    #[test]
    fn norms() {
        let g = space();
        assert_eq!(g.v_norm(&Vector::new(vec![1.0, 0.0, 0.0, 0.0])).unwrap(), 1.0);
        assert_eq!(g.v_norm(&Vector::new(vec![2.0, 0.0, 0.0, 0.0])).unwrap(), 2.0);
        assert!(matches!(g.v_norm(&Vector::new(vec![1.0, 1.0, 0.0, 0.0])), Err(Error::Domain(_))));
        assert_eq!(g.p_norm(&Covector::new(vec![1.0, 0.0, 0.0, 0.0])).unwrap(), 1.0);
        assert_eq!(g.p_norm(&Covector::new(vec![3.0, 0.0, 0.0, 0.0])).unwrap(), 3.0);
        assert!(matches!(g.p_norm(&Covector::new(vec![0.0, 1.0, 0.0, 0.0])), Err(Error::Domain(_))));
    }

    #[test]
    fn rejects_degenerate_metric() {
        assert!(MinkowskiSpace::with_diagonal(vec![1.0, 0.0]).is_err());
        assert!(MinkowskiSpace::with_diagonal(vec![]).is_err());
    }

    fn coords() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-5.0f64..5.0, 4)
    }

    proptest! {
        #[test]
        fn metric_round_trip(v in coords()) {
            let g = space();
            let back = g.metric_inverse_apply(&g.metric_apply(&Vector(v.clone())));
            for (a, b) in back.0.iter().zip(&v) {
                prop_assert!((a - b).abs() <= 1e-15 * (1.0 + b.abs()));
            }
        }

        #[test]
        fn pairing_is_bilinear(p in coords(), q in coords(), v in coords(), a in -3.0f64..3.0, b in -3.0f64..3.0) {
            let (p, q, v) = (Covector(p), Covector(q), Vector(v));
            let lhs = pair(&p.scaled(a).add(&q.scaled(b)), &v).unwrap();
            let rhs = a * pair(&p, &v).unwrap() + b * pair(&q, &v).unwrap();
            let scale = 1.0 + lhs.abs().max(rhs.abs()) + (a.abs() + b.abs()) * 100.0;
            prop_assert!((lhs - rhs).abs() <= 1e-12 * scale);
        }

        #[test]
        fn norms_agree_and_scale(s in prop::collection::vec(-2.0f64..2.0, 3), extra in 0.1f64..3.0, k in 1e-3f64..1e3) {
            let g = space();
            let spatial: f64 = s.iter().map(|x| x * x).sum();
            let v = Vector(vec![(spatial + extra * extra).sqrt(), s[0], s[1], s[2]]);
            let nv = g.v_norm(&v).unwrap();
            let np = g.p_norm(&g.metric_apply(&v)).unwrap();
            assert_relative_eq!(nv, np, max_relative = 1e-12);
            assert_relative_eq!(g.v_norm(&v.scaled(k)).unwrap(), k * nv, max_relative = 1e-12);
        }
    }
}
