use nalgebra::DVector;

use super::body::ConvexBody;
use super::matrix::SymmetricMatrix;
use super::newton::{damped_newton, NEWTON_MAX_ITER, NEWTON_TOL};
use crate::error::Result;

/// Logarithmic self-concordant barrier of a ball or polytope, shifted so that
/// its minimum over the interior is zero.
///
/// `mu` is 2 for a ball and the row count for a polytope.
#[derive(Debug, Clone, PartialEq)]
pub struct Barrier {
    body: ConvexBody,
    mu: f64,
    center: DVector<f64>,
    shift: f64,
}

impl Barrier {
    pub fn new(body: ConvexBody) -> Result<Self> {
        let mu = body.barrier_parameter();
        let center = center_of(&body, NEWTON_TOL)?;
        let shift = body.log_barrier(&center)?;
        Ok(Self {
            body,
            mu,
            center,
            shift,
        })
    }

    pub fn body(&self) -> &ConvexBody {
        &self.body
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn dim(&self) -> usize {
        self.body.dim()
    }

    /// The cached analytic center (minimizer of the barrier).
    pub fn center(&self) -> &DVector<f64> {
        &self.center
    }

    pub fn value(&self, x: &DVector<f64>) -> Result<f64> {
        Ok(self.body.log_barrier(x)? - self.shift)
    }

    pub fn gradient(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.body.log_barrier_derivatives(x).map(|(g, _)| g)
    }

    pub fn hessian(&self, x: &DVector<f64>) -> Result<SymmetricMatrix> {
        self.body.log_barrier_derivatives(x).map(|(_, h)| h)
    }

    pub fn derivatives(&self, x: &DVector<f64>) -> Result<(DVector<f64>, SymmetricMatrix)> {
        self.body.log_barrier_derivatives(x)
    }
}

fn center_of(body: &ConvexBody, tol: f64) -> Result<DVector<f64>> {
    if let ConvexBody::Ball { center, .. } = body {
        return Ok(center.clone());
    }
    damped_newton(
        body.interior_point().clone(),
        |u| body.log_barrier_derivatives(u),
        |u| body.is_interior(u),
        tol,
        NEWTON_MAX_ITER,
    )
}

/// Minimizer of the barrier over the interior, by damped Newton from the
/// body's certified interior point, stopped once the decrement is at most `tol`.
pub fn analytic_center(bar: &Barrier, tol: f64) -> Result<DVector<f64>> {
    damped_newton(
        bar.body().interior_point().clone(),
        |u| bar.derivatives(u),
        |u| bar.body().is_interior(u),
        tol,
        NEWTON_MAX_ITER,
    )
}
