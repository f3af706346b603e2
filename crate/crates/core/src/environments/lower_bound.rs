//! The hard contextual family
//!
//! `f(x, c) = α‖x‖² + r₁ L η(x₁ δ^{−γ/2}) S(c) + r₂ h² Σ_{i≥2} τ_i η(x_i / h)`,
//!
//! with `S(c) = ω_j d(c, ∂B_j)^γ` for the cell `B_j` holding `c`, `δ = 1/(2K)`
//! and `h = min(d^{−1/2}, T^{−1/4})`. With `γ = 0` the distance factor is 1 and
//! `f` jumps by at most `L` across cells.

use std::sync::Arc;

use nalgebra::DVector;
use rand::Rng;

use super::mollifier::{eta, eta0, eta0_derivative, eta0_derivative_bound, ETA_TOTAL};
use super::{dist_to_cell_boundary, minimize_smooth, Minimizer};
use crate::conversion::Partition;
use crate::error::{Error, Result};
use crate::geometry::{ConvexBody, SymmetricMatrix};
use crate::randomness::SeedStream;

/// Construction parameters. `omega_seed` and `tau_seed` fix the sign vectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowerBoundSpec {
    pub alpha: f64,
    pub lipschitz: f64,
    /// In `[0, 1]`; `0` selects the bounded-jump variant.
    pub gamma: f64,
    pub k: usize,
    pub p: usize,
    pub horizon: u64,
    pub r1: f64,
    pub r2: f64,
    pub omega_seed: u64,
    pub tau_seed: u64,
    pub sup_bound: Option<f64>,
}

/// Largest `r₁` accepted by [`LowerBoundFamily::new`].
///
/// Keeps the `x₁` curvature within `α` of `2α`, the context oscillation below
/// `L`, and `r₁ ≤ α / (2 max(1, L))`.
pub fn max_admissible_r1(alpha: f64, lipschitz: f64) -> f64 {
    let curvature = if lipschitz > 0.0 {
        alpha / (lipschitz * eta0_derivative_bound())
    } else {
        f64::INFINITY
    };
    curvature
        .min(alpha / (2.0 * lipschitz.max(1.0)))
        .min(1.0 / (2.0 * ETA_TOTAL))
}

/// Largest `r₂` accepted by [`LowerBoundFamily::new`].
pub fn max_admissible_r2(alpha: f64) -> f64 {
    (alpha / eta0_derivative_bound()).min(alpha / 2.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LowerBoundFamily {
    spec: LowerBoundSpec,
    partition: Partition,
    omega: Vec<f64>,
    tau: Vec<f64>,
    delta: f64,
    h: f64,
    sup_bound: f64,
    body: Arc<ConvexBody>,
}

fn signs(n: usize, stream: &SeedStream) -> Vec<f64> {
    let mut rng = stream.rng();
    (0..n)
        .map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 })
        .collect()
}

impl LowerBoundFamily {
    /// Builds the family, rejecting `(r₁, r₂)` outside the admissible range.
    pub fn new(body: Arc<ConvexBody>, spec: LowerBoundSpec) -> Result<Self> {
        let family = Self::new_unchecked(body, spec)?;
        let r1_max = max_admissible_r1(spec.alpha, spec.lipschitz);
        if spec.r1 > r1_max {
            return Err(Error::InvalidParameter(format!(
                "r1 = {} exceeds the admissible {r1_max}",
                spec.r1
            )));
        }
        let r2_max = max_admissible_r2(spec.alpha);
        if spec.r2 > r2_max {
            return Err(Error::InvalidParameter(format!(
                "r2 = {} exceeds the admissible {r2_max}",
                spec.r2
            )));
        }
        Ok(family)
    }

    /// Builds the family with only structural checks; `(r₁, r₂)` may be
    /// inadmissible, so the declared constants need not hold.
    pub fn new_unchecked(body: Arc<ConvexBody>, spec: LowerBoundSpec) -> Result<Self> {
        if !(spec.alpha > 0.0) || !spec.alpha.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "alpha must be positive, got {}",
                spec.alpha
            )));
        }
        if !(spec.lipschitz >= 0.0) || !spec.lipschitz.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "L must be nonnegative, got {}",
                spec.lipschitz
            )));
        }
        if !(0.0..=1.0).contains(&spec.gamma) {
            return Err(Error::InvalidParameter(format!(
                "gamma must lie in [0, 1], got {}",
                spec.gamma
            )));
        }
        if !(spec.r1 > 0.0) || !(spec.r2 > 0.0) {
            return Err(Error::InvalidParameter("r1 and r2 must be positive".into()));
        }
        if spec.horizon == 0 {
            return Err(Error::InvalidParameter("horizon must be at least 1".into()));
        }
        let partition = Partition::new(spec.p, spec.k)?;
        let d = body.dim();
        let omega = signs(
            partition.num_cells(),
            &SeedStream::new(spec.omega_seed).child("omega"),
        );
        let tau = signs(d - 1, &SeedStream::new(spec.tau_seed).child("tau"));
        let delta = 0.5 / spec.k as f64;
        let h = (d as f64).powf(-0.5).min((spec.horizon as f64).powf(-0.25));
        let reach = body.interior_point().norm() + body.radius_bound();
        let derived = spec.alpha * reach * reach
            + spec.r1 * spec.lipschitz * ETA_TOTAL * delta.powf(spec.gamma)
            + spec.r2 * h * h * ETA_TOTAL * (d - 1) as f64;
        let sup_bound = spec.sup_bound.unwrap_or(derived);
        Ok(Self {
            spec,
            partition,
            omega,
            tau,
            delta,
            h,
            sup_bound,
            body,
        })
    }

    pub fn spec(&self) -> &LowerBoundSpec {
        &self.spec
    }

    pub fn body(&self) -> &ConvexBody {
        &self.body
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn tau(&self) -> &[f64] {
        &self.tau
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn sup_bound(&self) -> f64 {
        self.sup_bound
    }

    pub fn dim(&self) -> usize {
        self.body.dim()
    }

    /// `S(c) = ω_j d(c, ∂B_j)^γ` for the cell `j` containing `c`.
    pub fn context_term(&self, c: &DVector<f64>) -> Result<f64> {
        let cell = self.partition.cell_of(c)?;
        let dist = dist_to_cell_boundary(&self.partition, cell, c)?;
        Ok(self.omega[cell] * dist.powf(self.spec.gamma))
    }

    fn scale(&self) -> f64 {
        self.delta.powf(-self.spec.gamma / 2.0)
    }

    fn coupling(&self) -> f64 {
        self.spec.r1 * self.spec.lipschitz
    }

    /// `f` with the context entering only through `s = S(c)`.
    pub fn value_at(&self, x: &DVector<f64>, s: f64) -> f64 {
        let mut v =
            self.spec.alpha * x.norm_squared() + self.coupling() * eta(x[0] * self.scale()) * s;
        let hh = self.h * self.h;
        for (i, t) in self.tau.iter().enumerate() {
            v += self.spec.r2 * hh * t * eta(x[i + 1] / self.h);
        }
        v
    }

    pub fn gradient_at(&self, x: &DVector<f64>, s: f64) -> DVector<f64> {
        let mut g = x * (2.0 * self.spec.alpha);
        let sc = self.scale();
        g[0] += self.coupling() * sc * eta0(x[0] * sc) * s;
        for (i, t) in self.tau.iter().enumerate() {
            g[i + 1] += self.spec.r2 * self.h * t * eta0(x[i + 1] / self.h);
        }
        g
    }

    /// The Hessian is diagonal.
    pub fn hessian_at(&self, x: &DVector<f64>, s: f64) -> SymmetricMatrix {
        let a2 = 2.0 * self.spec.alpha;
        let sc = self.scale();
        let mut diag = DVector::from_element(self.dim(), a2);
        diag[0] += self.coupling() * sc * sc * eta0_derivative(x[0] * sc) * s;
        for (i, t) in self.tau.iter().enumerate() {
            diag[i + 1] += self.spec.r2 * t * eta0_derivative(x[i + 1] / self.h);
        }
        SymmetricMatrix::from_diagonal(&diag)
    }

    pub fn value(&self, x: &DVector<f64>, c: &DVector<f64>) -> Result<f64> {
        Ok(self.value_at(x, self.context_term(c)?))
    }

    pub fn gradient(&self, x: &DVector<f64>, c: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(self.gradient_at(x, self.context_term(c)?))
    }

    /// Stationary point assuming every mollifier argument sits on the unit
    /// plateau, and whether that assumption holds there.
    pub fn closed_form(&self, s: f64) -> (DVector<f64>, bool) {
        let a = self.spec.alpha;
        let sc = self.scale();
        let mut x = DVector::zeros(self.dim());
        x[0] = -0.5 / a * sc * self.coupling() * s;
        for (i, t) in self.tau.iter().enumerate() {
            x[i + 1] = -0.5 * t * self.spec.r2 / a * self.h;
        }
        let mut linear = (x[0] * sc).abs() <= 0.25;
        for i in 1..self.dim() {
            linear &= (x[i] / self.h).abs() <= 0.25;
        }
        (x, linear)
    }

    /// Minimizer of `x ↦ value_at(x, s)` over the body.
    pub fn minimize_at(&self, s: f64) -> Result<Minimizer> {
        let (candidate, linear) = self.closed_form(s);
        if linear && self.body.contains(&candidate, 0.0) {
            let value = self.value_at(&candidate, s);
            return Ok(Minimizer {
                x: candidate,
                value,
            });
        }
        let starts = [candidate, self.body.interior_point().clone()];
        let x = minimize_smooth(
            &self.body,
            &starts,
            |u| self.value_at(u, s),
            |u| (self.gradient_at(u, s), self.hessian_at(u, s)),
        )?;
        let value = self.value_at(&x, s);
        Ok(Minimizer { x, value })
    }

    pub fn minimize(&self, c: &DVector<f64>) -> Result<Minimizer> {
        self.minimize_at(self.context_term(c)?)
    }

    /// `Σ_t f(x, c_t) = T · value_at(x, mean S)`, so the comparator minimizes at
    /// the mean context term.
    pub fn static_minimize(&self, contexts: &[DVector<f64>]) -> Result<Minimizer> {
        let mut total = 0.0;
        for c in contexts {
            total += self.context_term(c)?;
        }
        let n = contexts.len() as f64;
        let m = self.minimize_at(total / n)?;
        Ok(Minimizer {
            x: m.x,
            value: m.value * n,
        })
    }
}
