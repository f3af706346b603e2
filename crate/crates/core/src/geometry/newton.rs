//! Damped Newton iterations for self-concordant objectives and a short-step
//! barrier path follower built on them.

use nalgebra::{DMatrix, DVector};

use super::body::ConvexBody;
use super::matrix::{newton_step, SymmetricMatrix};
use crate::error::{Error, Result};

/// Stopping threshold on the Newton decrement.
pub const NEWTON_TOL: f64 = 1e-10;
/// Iteration cap for a single damped Newton run.
pub const NEWTON_MAX_ITER: usize = 200;

/// Minimizes a self-concordant function given its gradient/Hessian oracle.
///
/// Step length is 1 once the decrement is at most 1/4 and `1/(1+λ)` before
/// that. `in_domain` guards the iterate; a step that leaves the domain is
/// halved until it does not.
pub fn damped_newton<F, D>(
    x0: DVector<f64>,
    mut oracle: F,
    in_domain: D,
    tol: f64,
    max_iter: usize,
) -> Result<DVector<f64>>
where
    F: FnMut(&DVector<f64>) -> Result<(DVector<f64>, SymmetricMatrix)>,
    D: Fn(&DVector<f64>) -> bool,
{
    let mut x = x0;
    let mut lambda = f64::INFINITY;
    for _ in 0..max_iter {
        let (g, h) = oracle(&x)?;
        let (lam, dir) = newton_step(&g, &h)?;
        lambda = lam;
        if lambda <= tol {
            return Ok(x);
        }
        let mut step = if lambda <= 0.25 {
            1.0
        } else {
            1.0 / (1.0 + lambda)
        };
        let mut next = &x - &dir * step;
        let mut halvings = 0;
        while !in_domain(&next) {
            halvings += 1;
            if halvings > 60 {
                return Err(Error::NotInterior);
            }
            step *= 0.5;
            next = &x - &dir * step;
        }
        x = next;
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        decrement: lambda,
    })
}

/// Minimizes a smooth convex objective over `body` by following the central
/// path of `s·F(x) + R(x)` for increasing `s`, where `R` is the body's
/// logarithmic barrier. Stops once the duality-gap bound `μ/s` is below `gap`.
pub fn barrier_path<F>(
    body: &ConvexBody,
    start: DVector<f64>,
    mut objective: F,
    gap: f64,
) -> Result<DVector<f64>>
where
    F: FnMut(&DVector<f64>) -> (DVector<f64>, DMatrix<f64>),
{
    let mu = body.barrier_parameter();
    let mut s = 1.0;
    let mut x = start;
    loop {
        let last = mu / s <= gap;
        let tol = if last { 1e-9 } else { 1e-3 };
        x = damped_newton(
            x,
            |u| {
                let (gr, hr) = body.log_barrier_derivatives(u)?;
                let (gf, hf) = objective(u);
                Ok((gf * s + gr, SymmetricMatrix::new(hf * s + hr.into_inner())?))
            },
            |u| body.is_interior(u),
            tol,
            NEWTON_MAX_ITER,
        )?;
        if last {
            return Ok(x);
        }
        s *= 8.0;
    }
}
