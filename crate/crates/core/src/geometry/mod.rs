//! Convex bodies, their logarithmic barriers, and the Newton-decrement and
//! Dikin-ellipsoid machinery built on them.

mod barrier;
mod body;
mod matrix;
mod newton;

pub use barrier::{analytic_center, Barrier};
pub use body::{ConvexBody, HalfSpace, Polytope};
pub use matrix::{
    dikin_contains, inv_sqrt_psd, newton_decrement, SymmetricMatrix, DIKIN_SLACK, EIGEN_FLOOR,
};
pub use newton::{barrier_path, damped_newton, NEWTON_MAX_ITER, NEWTON_TOL};

pub(crate) use matrix::inv_sqrt_and_sqrt;
