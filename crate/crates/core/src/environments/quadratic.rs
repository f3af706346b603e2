use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::{hoelder_scan, Minimizer};
use crate::error::{Error, Result, Witness};
use crate::geometry::ConvexBody;
use crate::randomness::SeedStream;

/// Sampled `(x, c, c')` triples used to certify the declared Hölder constant.
const CONSTRUCTION_PAIRS: usize = 2000;

/// Parameters of `f(x, c) = (α/2)‖x − m(c)‖² + b`, where
/// `m(c) = clip(A φ(c) + v)` and `φ(c)_j = c_j^γ`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticSpec {
    pub alpha: f64,
    pub gamma: f64,
    /// `A`, of shape `d × p`.
    pub map: DMatrix<f64>,
    /// `v`
    pub shift: DVector<f64>,
    /// `b`
    pub offset: f64,
    /// Radial clip factor about the body's interior point; `None` leaves `m(c)` unclipped.
    pub clip: Option<f64>,
    /// Declared Hölder constant in the context.
    pub lipschitz: f64,
    /// Declared `M`; derived from the geometry when absent.
    pub sup_bound: Option<f64>,
}

impl QuadraticSpec {
    pub const DEFAULT_CLIP: f64 = 0.9;
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContextualQuadratic {
    spec: QuadraticSpec,
    sup_bound: f64,
    body: Arc<ConvexBody>,
}

impl ContextualQuadratic {
    /// Validates the parameters and certifies the declared Hölder constant on
    /// sampled context pairs.
    pub fn new(body: Arc<ConvexBody>, spec: QuadraticSpec) -> Result<Self> {
        let d = body.dim();
        if spec.map.nrows() != d || spec.shift.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: if spec.map.nrows() != d {
                    spec.map.nrows()
                } else {
                    spec.shift.len()
                },
            });
        }
        if spec.map.ncols() == 0 {
            return Err(Error::InvalidParameter(
                "context map needs at least one column".into(),
            ));
        }
        if !(spec.alpha > 0.0) || !spec.alpha.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "alpha must be positive, got {}",
                spec.alpha
            )));
        }
        if !(spec.gamma > 0.0 && spec.gamma <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "gamma must lie in (0, 1], got {}",
                spec.gamma
            )));
        }
        if !(spec.lipschitz >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "L must be nonnegative, got {}",
                spec.lipschitz
            )));
        }
        if let Some(k) = spec.clip {
            if !(k > 0.0) || !k.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "clip factor must be positive, got {k}"
                )));
            }
        }
        let reach = match spec.clip {
            Some(k) => k * body.radius_bound(),
            None => {
                let p = spec.map.ncols() as f64;
                spec.map.norm() * p.sqrt() + (&spec.shift - body.interior_point()).norm()
            }
        };
        let derived = 0.5 * spec.alpha * (body.radius_bound() + reach).powi(2) + spec.offset.abs();
        let sup_bound = spec.sup_bound.unwrap_or(derived);
        if !(sup_bound > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "M must be positive, got {sup_bound}"
            )));
        }
        let model = Self {
            spec,
            sup_bound,
            body,
        };
        let mut rng = SeedStream::new(0).child("quadratic-certify").rng();
        let (ratio, witness) = hoelder_scan(
            |x, c| model.value(x, c),
            &model.body,
            model.context_dim(),
            model.spec.gamma,
            CONSTRUCTION_PAIRS,
            &mut rng,
        );
        let limit = model.spec.lipschitz * (1.0 + 1e-6);
        if ratio > limit {
            let (x, c, c_prime) = witness.expect("a positive ratio has a witness");
            return Err(Error::CertificationFailed(Box::new(Witness {
                check: "hoelder",
                x,
                c,
                c_prime: Some(c_prime),
                observed: ratio,
                limit,
            })));
        }
        Ok(model)
    }

    pub fn spec(&self) -> &QuadraticSpec {
        &self.spec
    }

    pub fn body(&self) -> &ConvexBody {
        &self.body
    }

    pub fn dim(&self) -> usize {
        self.body.dim()
    }

    pub fn context_dim(&self) -> usize {
        self.spec.map.ncols()
    }

    pub fn sup_bound(&self) -> f64 {
        self.sup_bound
    }

    /// `m(c)`, the unconstrained minimizer.
    pub fn target(&self, c: &DVector<f64>) -> DVector<f64> {
        let phi = c.map(|v| v.max(0.0).powf(self.spec.gamma));
        let raw = &self.spec.map * phi + &self.spec.shift;
        match self.spec.clip {
            Some(k) => self.body.radial_clip(&raw, k),
            None => raw,
        }
    }

    pub fn value(&self, x: &DVector<f64>, c: &DVector<f64>) -> f64 {
        0.5 * self.spec.alpha * (x - self.target(c)).norm_squared() + self.spec.offset
    }

    pub fn gradient(&self, x: &DVector<f64>, c: &DVector<f64>) -> DVector<f64> {
        (x - self.target(c)) * self.spec.alpha
    }

    pub fn minimize(&self, c: &DVector<f64>) -> Result<Minimizer> {
        let x = self.body.project(&self.target(c))?;
        let value = self.value(&x, c);
        Ok(Minimizer { x, value })
    }

    /// The sum of quadratics is a quadratic centred at the mean target, so the
    /// comparator is the projection of that mean.
    pub fn static_minimize(&self, contexts: &[DVector<f64>]) -> Result<Minimizer> {
        let targets: Vec<_> = contexts.iter().map(|c| self.target(c)).collect();
        let mean = targets
            .iter()
            .fold(DVector::zeros(self.dim()), |acc, m| acc + m)
            / targets.len() as f64;
        let x = self.body.project(&mean)?;
        let value = targets
            .iter()
            .map(|m| 0.5 * self.spec.alpha * (&x - m).norm_squared() + self.spec.offset)
            .sum();
        Ok(Minimizer { x, value })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(xs)
    }

    fn spec(map: &[f64], shift: &[f64], clip: Option<f64>, lipschitz: f64) -> QuadraticSpec {
        QuadraticSpec {
            alpha: 1.0,
            gamma: 1.0,
            map: DMatrix::from_column_slice(shift.len(), map.len() / shift.len(), map),
            shift: v(shift),
            offset: 0.25,
            clip,
            lipschitz,
            sup_bound: None,
        }
    }

    #[test]
    fn minimizer_value_is_offset() {
        let q = ContextualQuadratic::new(
            Arc::new(ConvexBody::unit_ball(2)),
            spec(&[0.5, 0.0], &[-0.25, 0.1], Some(0.9), 1.0),
        )
        .unwrap();
        let c = v(&[0.4]);
        assert!((q.target(&c) - v(&[-0.05, 0.1])).norm() < 1e-15);
        assert_eq!(q.value(&q.target(&c), &c), 0.25);
        let m = q.minimize(&c).unwrap();
        assert_eq!(m.x, q.target(&c));
        assert_eq!(m.value, 0.25);
    }

    #[test]
    fn unclipped_target_outside_ball_projects_to_sphere() {
        let q = ContextualQuadratic::new(
            Arc::new(ConvexBody::unit_ball(2)),
            spec(&[1.0, 1.0], &[0.5, 0.5], None, 10.0),
        )
        .unwrap();
        let c = v(&[1.0]);
        let m = q.target(&c);
        assert_eq!(m, v(&[1.5, 1.5]));
        let best = q.minimize(&c).unwrap();
        let expect = &m / m.norm();
        assert!((&best.x - &expect).norm() < 1e-15);
        // Line search over the unit circle as an independent check.
        let n = 100_000;
        let mut grid_best = (f64::INFINITY, 0.0);
        for k in 0..n {
            let th = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            let val = q.value(&v(&[th.cos(), th.sin()]), &c);
            if val < grid_best.0 {
                grid_best = (val, th);
            }
        }
        assert!((grid_best.1 - std::f64::consts::FRAC_PI_4).abs() < 1e-4);
        assert!(best.value <= grid_best.0 + 1e-12);
    }

    #[test]
    fn clipping_keeps_targets_inside_shrunken_body() {
        let q = ContextualQuadratic::new(
            Arc::new(ConvexBody::unit_ball(2)),
            spec(&[2.0, 0.0], &[0.0, 0.0], Some(0.9), 10.0),
        )
        .unwrap();
        let m = q.target(&v(&[1.0]));
        assert!((m.norm() - 0.9).abs() < 1e-15);
    }

    #[test]
    fn understated_lipschitz_is_rejected() {
        let err = ContextualQuadratic::new(
            Arc::new(ConvexBody::unit_ball(2)),
            spec(&[0.5, 0.0], &[0.0, 0.0], Some(0.9), 0.1),
        )
        .unwrap_err();
        match err {
            Error::CertificationFailed(w) => assert_eq!(w.check, "hoelder"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn static_comparator_of_symmetric_targets_is_origin() {
        let q = ContextualQuadratic::new(
            Arc::new(ConvexBody::unit_ball(2)),
            spec(&[1.0, 0.0], &[-0.5, 0.0], None, 10.0),
        )
        .unwrap();
        let cs = [v(&[0.0]), v(&[1.0])];
        let m = q.static_minimize(&cs).unwrap();
        assert!(m.x.norm() < 1e-15);
        assert!((m.value - 2.0 * (0.5 * 0.25 + 0.25)).abs() < 1e-15);
    }
}
