use nalgebra::DVector;
use proptest::prelude::*;

use ctxband_core::conversion::{choose_k, ConversionParams, Partition};
use ctxband_core::geometry::{newton_decrement, Barrier, ConvexBody};
use ctxband_core::randomness::{sample_sphere, SeedStream};
use ctxband_core::regret::{rate_fit, RatePoints};

proptest! {
    #[test]
    fn cell_lookup_contains_the_context(p in 1usize..4, k in 1usize..9, seed in any::<u64>()) {
        let part = Partition::new(p, k).unwrap();
        let mut rng = SeedStream::new(seed).rng();
        let c = sample_sphere(p, &mut rng).map(|v| v.abs());
        let cell = part.cell_of(&c).unwrap();
        let (lo, hi) = part.cell_bounds(cell);
        for j in 0..p {
            prop_assert!(lo[j] <= c[j] && c[j] <= hi[j]);
        }
        prop_assert_eq!(part.flat_index(&part.axis_index(cell)), cell);
    }

    #[test]
    fn decrement_within_barrier_parameter(d in 1usize..6, seed in any::<u64>()) {
        let body = ConvexBody::unit_ball(d);
        let bar = Barrier::new(body.clone()).unwrap();
        let x = body.sample_uniform(&mut SeedStream::new(seed).rng()) * 0.999;
        let (g, h) = bar.derivatives(&x).unwrap();
        prop_assert!(newton_decrement(&g, &h).unwrap() <= bar.mu().sqrt());
    }

    #[test]
    fn fit_slope_ignores_scale(s in 0.01f64..100.0, a in 0.1f64..1.5) {
        let ts: Vec<f64> = (8..14).map(|e| 2f64.powi(e)).collect();
        let base: Vec<f64> = ts.iter().enumerate().map(|(j, t)| t.powf(a) * (1.0 + 0.05 * (j % 2) as f64)).collect();
        let scaled = base.iter().map(|r| r * s).collect();
        let f1 = rate_fit(&RatePoints::new(ts.clone(), base).unwrap()).unwrap();
        let f2 = rate_fit(&RatePoints::new(ts, scaled).unwrap()).unwrap();
        prop_assert!((f1.slope - f2.slope).abs() <= 1e-9);
    }

    #[test]
    fn tuned_k_never_decreases_with_horizon(e in 4u32..30) {
        let params = ConversionParams::strongly_convex(0.0, 2.0, 1.0, 1.0, 1.0).unwrap();
        let t = 1u64 << e;
        prop_assert!(choose_k(&params, 2, 1, t) <= choose_k(&params, 2, 1, 4 * t));
    }
}

#[test]
fn sphere_samples_are_unit() {
    let mut rng = SeedStream::new(3).child("sphere").rng();
    for d in [1, 2, 7] {
        for _ in 0..100 {
            let u: DVector<f64> = sample_sphere(d, &mut rng);
            assert!((u.norm() - 1.0).abs() < 1e-14);
        }
    }
}
