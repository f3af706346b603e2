//! Fixtures shared by the benchmarks.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use ctxband_core::bco::{Bco, BcoConfig};
use ctxband_core::conversion::{Partition, Router};
use ctxband_core::environments::{
    ContextualQuadratic, LowerBoundFamily, LowerBoundSpec, QuadraticSpec,
};
use ctxband_core::geometry::{Barrier, ConvexBody};
use ctxband_core::randomness::SeedStream;
use ctxband_core::Result;

/// Unit ball in `d` dimensions with a noisy, well-conditioned setup.
pub fn ball_config(d: usize, horizon: u64) -> Arc<BcoConfig> {
    let barrier = Arc::new(Barrier::new(ConvexBody::unit_ball(d)).expect("unit ball"));
    Arc::new(BcoConfig::new(1.0, 1.0, 2.0, 0.1, horizon, barrier).expect("valid constants"))
}

/// A quadratic whose minimizer moves with a scalar context.
pub fn moving_quadratic(d: usize) -> ContextualQuadratic {
    let mut map = DMatrix::zeros(d, 1);
    map[(0, 0)] = 0.6;
    let mut shift = DVector::zeros(d);
    shift[0] = -0.3;
    ContextualQuadratic::new(
        Arc::new(ConvexBody::unit_ball(d)),
        QuadraticSpec {
            alpha: 1.0,
            gamma: 1.0,
            map,
            shift,
            offset: 0.0,
            clip: Some(QuadraticSpec::DEFAULT_CLIP),
            lipschitz: 1.0,
            sup_bound: None,
        },
    )
    .expect("certifies")
}

pub fn bare_bco(d: usize, horizon: u64) -> Bco {
    Bco::new(ball_config(d, horizon), &SeedStream::new(0))
}

pub type BcoRouter = Router<Bco, Box<dyn FnMut(usize, &SeedStream) -> Result<Bco>>>;

pub fn bco_router(d: usize, k: usize, horizon: u64) -> BcoRouter {
    let cfg = ball_config(d, horizon);
    Router::new(
        Partition::new(1, k).expect("valid partition"),
        SeedStream::new(0),
        Box::new(move |_, s: &SeedStream| Ok(Bco::new(cfg.clone(), s))),
    )
}

/// Smooth hard instance in the unit ball.
pub fn hard_instance(d: usize, k: usize) -> LowerBoundFamily {
    LowerBoundFamily::new(
        Arc::new(ConvexBody::unit_ball(d)),
        LowerBoundSpec {
            alpha: 1.0,
            lipschitz: 1.0,
            gamma: 1.0,
            k,
            p: 1,
            horizon: 10_000,
            r1: 0.3,
            r2: 0.3,
            omega_seed: 0,
            tau_seed: 1,
            sup_bound: None,
        },
    )
    .expect("admissible")
}
