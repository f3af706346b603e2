//! Bandit convex optimization with a self-concordant barrier, for strongly
//! convex and smooth losses observed under sub-Gaussian noise.
//!
//! Each round: build the perturbation `P_t = (∇²R(x_{t−1}) + η_t α t I)^{-1/2}`,
//! query `z_t = x_{t−1} + P_t ζ_t` for a uniform unit `ζ_t`, form the one-point
//! estimate `g_t = d y_t P_t⁻¹ ζ_t`, and move to the minimizer of
//! `η_t Σ_k (⟨g_k, x⟩ + α/2 ‖x − x_{k−1}‖²) + R(x)`.
//!
//! The quadratic terms are carried as three running sums rather than as history.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::conversion::InputAlgorithm;
use crate::error::{Error, Result};
use crate::geometry::{
    damped_newton, inv_sqrt_and_sqrt, Barrier, SymmetricMatrix, NEWTON_MAX_ITER, NEWTON_TOL,
};
use crate::randomness::{sample_sphere, SeedStream, StreamRng};

#[derive(Debug, Clone)]
pub struct BcoConfig {
    alpha: f64,
    beta: f64,
    sup_bound: f64,
    sigma: f64,
    horizon: u64,
    q_t: f64,
    barrier: Arc<Barrier>,
}

impl BcoConfig {
    /// `alpha`/`beta`: strong convexity and smoothness; `sup_bound`: M ≥ sup |f|;
    /// `sigma`: noise proxy; `horizon`: T, which only enters through `q_T`.
    pub fn new(
        alpha: f64,
        beta: f64,
        sup_bound: f64,
        sigma: f64,
        horizon: u64,
        barrier: Arc<Barrier>,
    ) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "alpha must be positive, got {alpha}"
            )));
        }
        if !(beta >= alpha) || !beta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "beta must be at least alpha, got {beta}"
            )));
        }
        if !(sup_bound > 0.0) || !sup_bound.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "M must be positive, got {sup_bound}"
            )));
        }
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "sigma must be nonnegative, got {sigma}"
            )));
        }
        if horizon == 0 {
            return Err(Error::InvalidParameter("horizon must be at least 1".into()));
        }
        let q_t = sup_bound + 2.0 * sigma * ((horizon as f64) + 1.0).ln().sqrt();
        Ok(Self {
            alpha,
            beta,
            sup_bound,
            sigma,
            horizon,
            q_t,
            barrier,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn sup_bound(&self) -> f64 {
        self.sup_bound
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    /// `q_T = M + 2σ√log(T+1)`; equals `M` when σ = 0 regardless of T.
    pub fn q_t(&self) -> f64 {
        self.q_t
    }

    /// `ν = 16(μ + β/α)`.
    pub fn nu(&self) -> f64 {
        16.0 * (self.barrier.mu() + self.beta / self.alpha)
    }

    pub fn dim(&self) -> usize {
        self.barrier.dim()
    }

    pub fn barrier(&self) -> &Barrier {
        &self.barrier
    }
}

/// `(4 d q)⁻¹ · min(1, √(ν log(t+1) / t))`, natural log.
pub fn step_schedule(t: u64, d: usize, q: f64, nu: f64) -> f64 {
    assert!(t >= 1, "step size is defined for rounds t >= 1");
    let t = t as f64;
    let ratio = (nu * (t + 1.0).ln() / t).sqrt();
    ratio.min(1.0) / (4.0 * d as f64 * q)
}

pub fn step_size(t: u64, cfg: &BcoConfig) -> f64 {
    step_schedule(t, cfg.dim(), cfg.q_t(), cfg.nu())
}

/// The matrix `P_t` together with its inverse, from one eigendecomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct Perturbation {
    matrix: SymmetricMatrix,
    inverse: SymmetricMatrix,
}

impl Perturbation {
    pub fn matrix(&self) -> &SymmetricMatrix {
        &self.matrix
    }

    pub fn inverse(&self) -> &SymmetricMatrix {
        &self.inverse
    }
}

/// `P_t = (∇²R(x_{t−1}) + η_t α t I)^{-1/2}`.
pub fn perturbation(
    hess_at_prev: &SymmetricMatrix,
    eta: f64,
    cfg: &BcoConfig,
    t: u64,
) -> Result<Perturbation> {
    let shifted = hess_at_prev.add_identity(eta * cfg.alpha * t as f64);
    let (matrix, inverse) = inv_sqrt_and_sqrt(&shifted)?;
    Ok(Perturbation { matrix, inverse })
}

/// A proposed query awaiting its observation.
#[derive(Debug, Clone, PartialEq)]
pub struct PendingQuery {
    pub z: DVector<f64>,
    pub zeta: DVector<f64>,
    pub perturbation: Perturbation,
    pub eta: f64,
}

/// `g_t = d · y_t · P_t⁻¹ ζ_t`.
pub fn gradient_estimate(y: f64, pending: &PendingQuery, d: usize) -> DVector<f64> {
    pending.perturbation.inverse().mul_vec(&pending.zeta) * (d as f64 * y)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BcoState {
    /// Completed rounds.
    pub t: u64,
    pub x_prev: DVector<f64>,
    /// `Σ_{k≤t} g_k`
    pub sum_g: DVector<f64>,
    /// `Σ_{k≤t} x_{k−1}`
    pub sum_x: DVector<f64>,
    /// `Σ_{k≤t} ‖x_{k−1}‖²`
    pub sum_xx: f64,
    pub pending: Option<PendingQuery>,
}

impl BcoState {
    pub fn at(x0: DVector<f64>) -> Self {
        let d = x0.len();
        Self {
            t: 0,
            x_prev: x0,
            sum_g: DVector::zeros(d),
            sum_x: DVector::zeros(d),
            sum_xx: 0.0,
            pending: None,
        }
    }
}

/// Value of the regularized objective `Φ_t(u)` described by `state`'s sums.
pub fn ftrl_objective(
    state: &BcoState,
    eta: f64,
    cfg: &BcoConfig,
    u: &DVector<f64>,
) -> Result<f64> {
    let t = state.t as f64;
    let lin = state.sum_g.dot(u);
    let quad = 0.5 * cfg.alpha * (t * u.norm_squared() - 2.0 * state.sum_x.dot(u) + state.sum_xx);
    Ok(eta * (lin + quad) + cfg.barrier.value(u)?)
}

/// Gradient and Hessian of `Φ_t` at `u`.
pub fn ftrl_derivatives(
    state: &BcoState,
    eta: f64,
    cfg: &BcoConfig,
    u: &DVector<f64>,
) -> Result<(DVector<f64>, SymmetricMatrix)> {
    let t = state.t as f64;
    let (gr, hr) = cfg.barrier.derivatives(u)?;
    let g = (&state.sum_g + (u * t - &state.sum_x) * cfg.alpha) * eta + gr;
    Ok((g, hr.add_identity(eta * cfg.alpha * t)))
}

/// Minimizes `Φ_t` by damped Newton, warm-started at `state.x_prev`.
pub fn ftrl_solve(state: &BcoState, eta: f64, cfg: &BcoConfig) -> Result<DVector<f64>> {
    damped_newton(
        state.x_prev.clone(),
        |u| ftrl_derivatives(state, eta, cfg, u),
        |u| cfg.barrier.body().is_interior(u),
        NEWTON_TOL,
        NEWTON_MAX_ITER,
    )
}

/// One completed round.
#[derive(Debug, Clone, PartialEq)]
pub struct BcoRound {
    pub t: u64,
    pub z: DVector<f64>,
    pub y: f64,
    pub g: DVector<f64>,
    pub x: DVector<f64>,
}

/// A single instance: configuration, state, and its private random stream.
#[derive(Debug, Clone)]
pub struct Bco {
    cfg: Arc<BcoConfig>,
    state: BcoState,
    rng: StreamRng,
}

impl Bco {
    pub fn new(cfg: Arc<BcoConfig>, stream: &SeedStream) -> Self {
        let x0 = cfg.barrier.center().clone();
        Self {
            state: BcoState::at(x0),
            rng: stream.rng(),
            cfg,
        }
    }

    pub fn config(&self) -> &BcoConfig {
        &self.cfg
    }

    pub fn state(&self) -> &BcoState {
        &self.state
    }

    /// Draws `ζ_t` and returns the query point.
    pub fn propose(&mut self) -> Result<DVector<f64>> {
        if self.state.pending.is_some() {
            return Err(Error::PendingQuery);
        }
        let zeta = sample_sphere(self.cfg.dim(), &mut self.rng);
        self.propose_with(zeta)
    }

    /// Proposes with a caller-supplied unit direction instead of a random one.
    pub fn propose_with(&mut self, zeta: DVector<f64>) -> Result<DVector<f64>> {
        if self.state.pending.is_some() {
            return Err(Error::PendingQuery);
        }
        if zeta.len() != self.cfg.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.cfg.dim(),
                got: zeta.len(),
            });
        }
        let t = self.state.t + 1;
        let eta = step_size(t, &self.cfg);
        let hess = self.cfg.barrier.hessian(&self.state.x_prev)?;
        let perturbation = perturbation(&hess, eta, &self.cfg, t)?;
        let z = &self.state.x_prev + perturbation.matrix().mul_vec(&zeta);
        self.state.pending = Some(PendingQuery {
            z: z.clone(),
            zeta,
            perturbation,
            eta,
        });
        Ok(z)
    }

    /// Consumes the observation for the pending query and advances the iterate.
    pub fn feed(&mut self, y: f64) -> Result<BcoRound> {
        let pending = self.state.pending.take().ok_or(Error::NoPendingQuery)?;
        let g = gradient_estimate(y, &pending, self.cfg.dim());
        let st = &mut self.state;
        st.t += 1;
        st.sum_g += &g;
        st.sum_x += &st.x_prev;
        st.sum_xx += st.x_prev.norm_squared();
        let x = ftrl_solve(st, pending.eta, &self.cfg)?;
        st.x_prev = x.clone();
        Ok(BcoRound {
            t: st.t,
            z: pending.z,
            y,
            g,
            x,
        })
    }

    /// propose → observe → feed.
    pub fn round<F: FnOnce(&DVector<f64>) -> f64>(&mut self, observe: F) -> Result<BcoRound> {
        let z = self.propose()?;
        let y = observe(&z);
        self.feed(y)
    }
}

impl InputAlgorithm for Bco {
    fn propose(&mut self) -> Result<DVector<f64>> {
        Bco::propose(self)
    }

    fn feed(&mut self, y: f64) -> Result<()> {
        Bco::feed(self, y).map(|_| ())
    }

    fn rounds_completed(&self) -> u64 {
        self.state.t
    }
}

/// Monte Carlo estimate of a smoothed gradient with per-component standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateEstimate {
    pub mean: DVector<f64>,
    pub std_error: DVector<f64>,
}

/// Averages `d · f(x + Aζ) · A⁻ᵀζ` over `n` uniform unit `ζ`, which estimates the
/// gradient of the ball-smoothed surrogate `x ↦ E f(x + A U)`. For the symmetric
/// perturbation matrices used by [`Bco`], `A⁻ᵀ = A⁻¹`.
pub fn mc_surrogate_gradient<F, R>(
    f: F,
    x: &DVector<f64>,
    a: &DMatrix<f64>,
    n: usize,
    rng: &mut R,
) -> Result<SurrogateEstimate>
where
    F: Fn(&DVector<f64>) -> f64,
    R: Rng + ?Sized,
{
    let d = x.len();
    if n == 0 {
        return Err(Error::InvalidParameter(
            "sample count must be at least 1".into(),
        ));
    }
    if a.nrows() != d || a.ncols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: a.nrows(),
        });
    }
    let lu = a.transpose().lu();
    if !lu.is_invertible() {
        return Err(Error::InvalidParameter("shape matrix is singular".into()));
    }
    let mut sum = DVector::zeros(d);
    let mut sum_sq = DVector::zeros(d);
    for _ in 0..n {
        let zeta = sample_sphere(d, rng);
        let y = f(&(x + a * &zeta));
        let dir = lu.solve(&zeta).ok_or(Error::NotPositiveDefinite)?;
        let g = dir * (d as f64 * y);
        sum_sq += g.component_mul(&g);
        sum += g;
    }
    let nf = n as f64;
    let mean = &sum / nf;
    let std_error = if n > 1 {
        let var = (sum_sq - mean.component_mul(&mean) * nf) / (nf - 1.0);
        var.map(|v| (v.max(0.0) / nf).sqrt())
    } else {
        DVector::from_element(d, f64::INFINITY)
    };
    Ok(SurrogateEstimate { mean, std_error })
}

/// A base loss smoothed over the ellipsoid `x + A·B^d`, sampled `samples` times per query.
pub struct MonteCarloSurrogate<F> {
    base: F,
    shape: DMatrix<f64>,
    samples: usize,
}

impl<F: Fn(&DVector<f64>) -> f64> MonteCarloSurrogate<F> {
    pub fn new(base: F, shape: DMatrix<f64>, samples: usize) -> Result<Self> {
        if samples == 0 {
            return Err(Error::InvalidParameter(
                "sample count must be at least 1".into(),
            ));
        }
        if !shape.is_square() || !shape.clone().lu().is_invertible() {
            return Err(Error::InvalidParameter(
                "shape matrix must be square and invertible".into(),
            ));
        }
        Ok(Self {
            base,
            shape,
            samples,
        })
    }

    pub fn gradient<R: Rng + ?Sized>(
        &self,
        x: &DVector<f64>,
        rng: &mut R,
    ) -> Result<SurrogateEstimate> {
        mc_surrogate_gradient(&self.base, x, &self.shape, self.samples, rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{newton_decrement, ConvexBody};
    use approx::assert_relative_eq;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(xs)
    }

    fn ball_cfg(
        d: usize,
        alpha: f64,
        beta: f64,
        m: f64,
        sigma: f64,
        horizon: u64,
    ) -> Arc<BcoConfig> {
        let bar = Arc::new(Barrier::new(ConvexBody::unit_ball(d)).unwrap());
        Arc::new(BcoConfig::new(alpha, beta, m, sigma, horizon, bar).unwrap())
    }

    #[test]
    fn step_size_examples() {
        let cfg = ball_cfg(1, 1.0, 1.0, 1.0, 0.0, 100);
        assert_eq!(cfg.nu(), 48.0);
        assert_eq!(step_size(1, &cfg), 0.25);
        // σ = 0 collapses q_T to M for every horizon.
        for horizon in [1, 10, 1_000_000] {
            assert_eq!(ball_cfg(2, 1.0, 1.0, 1.0, 0.0, horizon).q_t(), 1.0);
        }
        let cfg = ball_cfg(2, 1.0, 2.0, 2.0, 0.0, 10);
        assert_eq!(cfg.nu(), 64.0);
        assert_relative_eq!(step_size(1_000_000, &cfg), 0.0018585, epsilon = 5e-8);
        let direct = (64.0 * (1_000_001f64).ln() / 1e6).sqrt() / 16.0;
        assert_relative_eq!(step_size(1_000_000, &cfg), direct, epsilon = 1e-15);
    }

    #[test]
    fn q_t_includes_noise_term() {
        let cfg = ball_cfg(2, 1.0, 1.0, 1.0, 0.5, 99);
        assert_relative_eq!(cfg.q_t(), 1.0 + 100f64.ln().sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn config_validation() {
        let bar = Arc::new(Barrier::new(ConvexBody::unit_ball(2)).unwrap());
        assert!(BcoConfig::new(0.0, 1.0, 1.0, 0.0, 10, bar.clone()).is_err());
        assert!(BcoConfig::new(2.0, 1.0, 1.0, 0.0, 10, bar.clone()).is_err());
        assert!(BcoConfig::new(1.0, 1.0, 1.0, -0.1, 10, bar.clone()).is_err());
        assert!(BcoConfig::new(1.0, 1.0, 1.0, 0.0, 0, bar).is_err());
    }

    #[test]
    fn perturbation_at_center() {
        let cfg = ball_cfg(2, 1.0, 1.0, 1.0, 0.0, 10);
        let h = cfg.barrier().hessian(&v(&[0.0, 0.0])).unwrap();
        let p = perturbation(&h, 0.25, &cfg, 1).unwrap();
        assert_relative_eq!(p.matrix().as_matrix()[(0, 0)], 2.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(p.matrix().as_matrix()[(1, 1)], 2.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(p.inverse().as_matrix()[(0, 0)], 1.5, epsilon = 1e-15);
        // η → 0 recovers the plain inverse square root.
        let p0 = perturbation(&h, 0.0, &cfg, 1).unwrap();
        let plain = crate::geometry::inv_sqrt_psd(&h).unwrap();
        assert_eq!(p0.matrix(), &plain);
    }

    #[test]
    fn first_query_from_center() {
        let cfg = ball_cfg(2, 1.0, 1.0, 1.0, 0.0, 10);
        assert_eq!(step_size(1, &cfg), 1.0 / 8.0);
        // Use d = 2 with q_T = 1/2 so that η₁ = 0.25 as in the worked example.
        let bar = Arc::new(Barrier::new(ConvexBody::unit_ball(2)).unwrap());
        let cfg = Arc::new(BcoConfig::new(1.0, 1.0, 0.5, 0.0, 10, bar).unwrap());
        assert_eq!(step_size(1, &cfg), 0.25);
        let mut bco = Bco::new(cfg.clone(), &SeedStream::new(0));
        let z = bco.propose_with(v(&[1.0, 0.0])).unwrap();
        assert_relative_eq!(z[0], 2.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(z[1], 0.0, epsilon = 1e-15);
        assert!(matches!(bco.propose(), Err(Error::PendingQuery)));
        let pending = bco.state().pending.clone().unwrap();
        let g = gradient_estimate(1.5, &pending, 2);
        assert_relative_eq!(g[0], 4.5, epsilon = 1e-14);
        assert_relative_eq!(g[1], 0.0, epsilon = 1e-14);
        assert_eq!(gradient_estimate(0.0, &pending, 2), v(&[0.0, 0.0]));
    }

    #[test]
    fn opposite_directions_are_symmetric() {
        let cfg = ball_cfg(3, 1.0, 2.0, 1.0, 0.0, 10);
        let zeta = v(&[0.6, 0.0, 0.8]);
        let mut a = Bco::new(cfg.clone(), &SeedStream::new(0));
        let mut b = Bco::new(cfg, &SeedStream::new(0));
        let za = a.propose_with(zeta.clone()).unwrap();
        let zb = b.propose_with(-zeta).unwrap();
        let x = &a.state().x_prev;
        let mid = (&za + &zb) * 0.5;
        assert!((mid - x).norm() < 1e-15);
    }

    #[test]
    fn feed_without_pending_fails() {
        let cfg = ball_cfg(2, 1.0, 1.0, 1.0, 0.0, 10);
        let mut bco = Bco::new(cfg, &SeedStream::new(0));
        assert!(matches!(bco.feed(0.3), Err(Error::NoPendingQuery)));
    }

    #[test]
    fn ftrl_reduces_to_analytic_center_without_data() {
        let bar =
            Arc::new(Barrier::new(ConvexBody::cube(&[0.0, -1.0], &[2.0, 3.0]).unwrap()).unwrap());
        let cfg = BcoConfig::new(1.0, 1.0, 1.0, 0.0, 10, bar.clone()).unwrap();
        let mut state = BcoState::at(v(&[0.3, 0.3]));
        state.t = 0;
        let x = ftrl_solve(&state, 0.5, &cfg).unwrap();
        assert!((&x - bar.center()).norm() < 1e-9);
    }

    #[test]
    fn ftrl_first_step_matches_scalar_root() {
        let cfg = ball_cfg(2, 1.0, 1.0, 1.0, 0.0, 10);
        let mut state = BcoState::at(v(&[0.0, 0.0]));
        state.t = 1;
        state.sum_g = v(&[1.0, 0.0]);
        state.sum_x = v(&[0.0, 0.0]);
        state.sum_xx = 0.0;
        let x = ftrl_solve(&state, 0.25, &cfg).unwrap();
        // Oracle: bisection on 0.25(1 + u) + 2u/(1 − u²) = 0 over (−1, 0).
        let phi = |u: f64| 0.25 * (1.0 + u) + 2.0 * u / (1.0 - u * u);
        let (mut lo, mut hi) = (-0.999_999, 0.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if phi(mid) > 0.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let root = 0.5 * (lo + hi);
        assert_relative_eq!(x[0], root, epsilon = 1e-10);
        assert_relative_eq!(x[0], -0.1099, epsilon = 1e-4);
        assert!(x[1].abs() < 1e-12);
        let (g, h) = ftrl_derivatives(&state, 0.25, &cfg, &x).unwrap();
        assert!(newton_decrement(&g, &h).unwrap() <= 1e-10);
    }

    #[test]
    fn zero_losses_keep_iterate_at_center() {
        let cfg = ball_cfg(2, 1.0, 1.0, 1.0, 0.0, 500);
        let mut bco = Bco::new(cfg.clone(), &SeedStream::new(4));
        for _ in 0..500 {
            let r = bco.round(|_| 0.0).unwrap();
            assert_eq!(r.g, v(&[0.0, 0.0]));
            // The proximal terms pull toward the center too, so the iterate stays put.
            let (g, h) = cfg.barrier().derivatives(&r.x).unwrap();
            assert!(newton_decrement(&g, &h).unwrap() <= 1e-10);
        }
    }

    #[test]
    fn replay_is_deterministic() {
        let cfg = ball_cfg(2, 1.0, 1.0, 1.0, 0.0, 200);
        let f = |z: &DVector<f64>| 0.5 * (z - v(&[0.3, -0.2])).norm_squared();
        let run = |seed| {
            let mut bco = Bco::new(cfg.clone(), &SeedStream::new(seed).child("cell:0"));
            (0..200).map(|_| bco.round(f).unwrap()).collect::<Vec<_>>()
        };
        assert_eq!(run(5), run(5));
        assert_ne!(run(5), run(6));
    }

    #[test]
    fn losses_trend_down_on_a_quadratic() {
        let target = v(&[0.4, -0.3]);
        let f = |z: &DVector<f64>| 0.5 * (z - &target).norm_squared();
        let cfg = ball_cfg(2, 1.0, 1.0, 1.0, 0.0, 1000);
        let (mut first, mut last) = (0.0, 0.0);
        for seed in 0..20 {
            let mut bco = Bco::new(cfg.clone(), &SeedStream::new(seed));
            for t in 0..1000 {
                let r = bco.round(f).unwrap();
                let loss = f(&r.z);
                if t < 100 {
                    first += loss;
                } else if t >= 900 {
                    last += loss;
                }
            }
        }
        assert!(last < first, "first {first} last {last}");
    }

    #[test]
    fn queries_stay_in_body_over_long_runs() {
        let cfg = ball_cfg(2, 1.0, 1.0, 1.0, 0.1, 10_000);
        let mut noise = SeedStream::new(1).child("noise").rng();
        let f = |z: &DVector<f64>| 0.5 * (z - v(&[0.6, 0.5])).norm_squared();
        let mut bco = Bco::new(cfg.clone(), &SeedStream::new(1));
        for _ in 0..10_000 {
            let r = bco
                .round(|z| {
                    f(z) + crate::randomness::draw_noise(
                        &crate::randomness::NoiseModel::Gaussian { sigma: 0.1 },
                        &mut noise,
                    )
                })
                .unwrap();
            assert!(cfg.barrier().body().contains(&r.z, 1e-12));
            assert!(cfg.barrier().body().is_interior(&r.x));
        }
    }

    #[test]
    fn surrogate_gradient_of_linear_and_quadratic() {
        let mut rng = SeedStream::new(8).rng();
        let a_vec = v(&[0.7, -1.2]);
        let x = v(&[0.1, 0.2]);
        let shape = DMatrix::from_row_slice(2, 2, &[0.5, 0.1, 0.0, 0.3]);
        let est = mc_surrogate_gradient(|u| a_vec.dot(u), &x, &shape, 200_000, &mut rng).unwrap();
        for i in 0..2 {
            assert!((est.mean[i] - a_vec[i]).abs() <= 3.0 * est.std_error[i]);
        }
        let r = DMatrix::identity(2, 2) * 0.4;
        let est = mc_surrogate_gradient(|u| u.norm_squared(), &x, &r, 200_000, &mut rng).unwrap();
        for i in 0..2 {
            assert!((est.mean[i] - 2.0 * x[i]).abs() <= 3.0 * est.std_error[i]);
        }
        let one = mc_surrogate_gradient(|u| u.norm_squared(), &x, &r, 1, &mut rng).unwrap();
        assert!(one.mean.iter().all(|v| v.is_finite()));
        assert!(mc_surrogate_gradient(|u| u[0], &x, &DMatrix::zeros(2, 2), 10, &mut rng).is_err());
    }
}
