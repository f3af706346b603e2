use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::matrix::SymmetricMatrix;
use super::newton::{barrier_path, damped_newton, NEWTON_MAX_ITER, NEWTON_TOL};
use crate::error::{Error, Result};

/// A half-space `⟨normal, u⟩ ≥ offset`.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfSpace {
    pub normal: DVector<f64>,
    pub offset: f64,
}

impl HalfSpace {
    pub fn new(normal: DVector<f64>, offset: f64) -> Self {
        Self { normal, offset }
    }

    fn slack(&self, u: &DVector<f64>) -> f64 {
        self.normal.dot(u) - self.offset
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Polytope {
    rows: Vec<HalfSpace>,
    center: DVector<f64>,
    lo: DVector<f64>,
    hi: DVector<f64>,
}

impl Polytope {
    pub fn rows(&self) -> &[HalfSpace] {
        &self.rows
    }
}

/// A compact convex body with nonempty interior.
#[derive(Debug, Clone, PartialEq)]
pub enum ConvexBody {
    Ball { center: DVector<f64>, radius: f64 },
    Polytope(Polytope),
}

impl ConvexBody {
    pub fn ball(center: DVector<f64>, radius: f64) -> Result<Self> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "ball radius must be positive, got {radius}"
            )));
        }
        if center.is_empty() || center.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "ball center must be a finite, nonempty point".into(),
            ));
        }
        Ok(ConvexBody::Ball { center, radius })
    }

    pub fn unit_ball(d: usize) -> Self {
        ConvexBody::Ball {
            center: DVector::zeros(d),
            radius: 1.0,
        }
    }

    /// The axis-aligned box `[lo, hi]`, as a polytope with `2d` rows.
    pub fn cube(lo: &[f64], hi: &[f64]) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch {
                expected: lo.len(),
                got: hi.len(),
            });
        }
        let d = lo.len();
        let mut rows = Vec::with_capacity(2 * d);
        for i in 0..d {
            let mut e = DVector::zeros(d);
            e[i] = 1.0;
            rows.push(HalfSpace::new(e.clone(), lo[i]));
            rows.push(HalfSpace::new(-e, -hi[i]));
        }
        Self::polytope(rows)
    }

    /// `{u : ⟨a_j, u⟩ ≥ b_j for all j}`. The interior is certified by a
    /// phase-one search for a strictly feasible point; the polytope must be bounded.
    pub fn polytope(rows: Vec<HalfSpace>) -> Result<Self> {
        let d = rows
            .first()
            .map(|r| r.normal.len())
            .ok_or_else(|| Error::InvalidParameter("polytope needs at least one row".into()))?;
        if d == 0 {
            return Err(Error::InvalidParameter(
                "polytope dimension must be positive".into(),
            ));
        }
        for r in &rows {
            if r.normal.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: r.normal.len(),
                });
            }
            if r.normal.norm() == 0.0 || !r.offset.is_finite() {
                return Err(Error::InvalidParameter(
                    "polytope rows need nonzero normals and finite offsets".into(),
                ));
            }
        }
        let start = phase_one(&rows)?;
        let mut body = ConvexBody::Polytope(Polytope {
            rows,
            center: start.clone(),
            lo: DVector::zeros(d),
            hi: DVector::zeros(d),
        });
        let center = damped_newton(
            start,
            |u| body.log_barrier_derivatives(u),
            |u| body.is_interior(u),
            NEWTON_TOL,
            NEWTON_MAX_ITER,
        )
        .map_err(|e| match e {
            Error::NoConvergence { .. } => {
                Error::InvalidParameter("polytope appears to be unbounded".into())
            }
            other => other,
        })?;
        if let ConvexBody::Polytope(p) = &mut body {
            p.center = center;
        }
        let (lo, hi) = body.solve_bounding_box()?;
        if let ConvexBody::Polytope(p) = &mut body {
            p.lo = lo;
            p.hi = hi;
        }
        Ok(body)
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexBody::Ball { center, .. } => center.len(),
            ConvexBody::Polytope(p) => p.center.len(),
        }
    }

    /// Self-concordance parameter of this body's logarithmic barrier.
    pub fn barrier_parameter(&self) -> f64 {
        match self {
            ConvexBody::Ball { .. } => 2.0,
            ConvexBody::Polytope(p) => p.rows.len() as f64,
        }
    }

    /// A fixed interior point: the ball center, or the polytope's analytic center.
    pub fn interior_point(&self) -> &DVector<f64> {
        match self {
            ConvexBody::Ball { center, .. } => center,
            ConvexBody::Polytope(p) => &p.center,
        }
    }

    pub fn is_interior(&self, x: &DVector<f64>) -> bool {
        if x.len() != self.dim() || x.iter().any(|v| !v.is_finite()) {
            return false;
        }
        match self {
            ConvexBody::Ball { center, radius } => (x - center).norm_squared() < radius * radius,
            ConvexBody::Polytope(p) => p.rows.iter().all(|r| r.slack(x) > 0.0),
        }
    }

    /// Closed-body membership with a relative `slack`.
    pub fn contains(&self, x: &DVector<f64>, slack: f64) -> bool {
        if x.len() != self.dim() || x.iter().any(|v| !v.is_finite()) {
            return false;
        }
        match self {
            ConvexBody::Ball { center, radius } => {
                (x - center).norm_squared() <= radius * radius * (1.0 + slack)
            }
            ConvexBody::Polytope(p) => p.rows.iter().all(|r| {
                let n = r.normal.norm();
                r.slack(x) / n >= -slack * (1.0 + (r.offset / n).abs())
            }),
        }
    }

    /// Unnormalized log barrier `−log(r² − ‖x−c‖²)` or `−Σ log(⟨a_j,x⟩ − b_j)`.
    pub fn log_barrier(&self, x: &DVector<f64>) -> Result<f64> {
        self.check_dim(x)?;
        match self {
            ConvexBody::Ball { center, radius } => {
                let s = radius * radius - (x - center).norm_squared();
                if !(s > 0.0) {
                    return Err(Error::NotInterior);
                }
                Ok(-s.ln())
            }
            ConvexBody::Polytope(p) => {
                let mut v = 0.0;
                for r in &p.rows {
                    let s = r.slack(x);
                    if !(s > 0.0) {
                        return Err(Error::NotInterior);
                    }
                    v -= s.ln();
                }
                Ok(v)
            }
        }
    }

    /// Gradient and Hessian of the unnormalized log barrier.
    pub fn log_barrier_derivatives(
        &self,
        x: &DVector<f64>,
    ) -> Result<(DVector<f64>, SymmetricMatrix)> {
        self.check_dim(x)?;
        let d = self.dim();
        match self {
            ConvexBody::Ball { center, radius } => {
                let dx = x - center;
                let s = radius * radius - dx.norm_squared();
                if !(s > 0.0) {
                    return Err(Error::NotInterior);
                }
                let g = &dx * (2.0 / s);
                let mut h = &dx * dx.transpose() * (4.0 / (s * s));
                for i in 0..d {
                    h[(i, i)] += 2.0 / s;
                }
                Ok((g, SymmetricMatrix::new(h)?))
            }
            ConvexBody::Polytope(p) => {
                let mut g = DVector::zeros(d);
                let mut h = DMatrix::zeros(d, d);
                for r in &p.rows {
                    let s = r.slack(x);
                    if !(s > 0.0) {
                        return Err(Error::NotInterior);
                    }
                    g -= &r.normal / s;
                    h += &r.normal * r.normal.transpose() / (s * s);
                }
                Ok((g, SymmetricMatrix::new(h)?))
            }
        }
    }

    /// Axis-aligned bounding box.
    pub fn bounding_box(&self) -> (DVector<f64>, DVector<f64>) {
        match self {
            ConvexBody::Ball { center, radius } => {
                (center.add_scalar(-radius), center.add_scalar(*radius))
            }
            ConvexBody::Polytope(p) => (p.lo.clone(), p.hi.clone()),
        }
    }

    /// Upper bound on `‖x − interior_point()‖` over the body.
    pub fn radius_bound(&self) -> f64 {
        match self {
            ConvexBody::Ball { radius, .. } => *radius,
            ConvexBody::Polytope(p) => {
                p.lo.iter()
                    .zip(p.hi.iter())
                    .zip(p.center.iter())
                    .map(|((l, h), c)| (c - l).abs().max((h - c).abs()).powi(2))
                    .sum::<f64>()
                    .sqrt()
            }
        }
    }

    /// Euclidean projection onto the body. Closed form for balls; barrier path
    /// following on `½‖u − y‖²` for polytopes.
    pub fn project(&self, y: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_dim(y)?;
        match self {
            ConvexBody::Ball { center, radius } => {
                let dy = y - center;
                let n = dy.norm();
                if n <= *radius {
                    Ok(y.clone())
                } else {
                    Ok(center + dy * (radius / n))
                }
            }
            ConvexBody::Polytope(_) => {
                if self.contains(y, 0.0) {
                    return Ok(y.clone());
                }
                let d = self.dim();
                barrier_path(
                    self,
                    self.interior_point().clone(),
                    |u| (u - y, DMatrix::identity(d, d)),
                    1e-12,
                )
            }
        }
    }

    /// Pulls `y` toward the interior point along the connecting ray until it lies
    /// in the copy of the body scaled by `factor` about that point.
    pub fn radial_clip(&self, y: &DVector<f64>, factor: f64) -> DVector<f64> {
        let c = self.interior_point();
        let w = y - c;
        let s = match self {
            ConvexBody::Ball { radius, .. } => {
                let n = w.norm();
                let lim = factor * radius;
                if n <= lim {
                    1.0
                } else {
                    lim / n
                }
            }
            ConvexBody::Polytope(p) => p.rows.iter().fold(1.0_f64, |s, r| {
                let aw = r.normal.dot(&w);
                if aw < 0.0 {
                    s.min(factor * r.slack(c) / -aw)
                } else {
                    s
                }
            }),
        };
        c + w * s
    }

    /// A point drawn uniformly from the body.
    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        let d = self.dim();
        match self {
            ConvexBody::Ball { center, radius } => {
                let dir = crate::randomness::sample_sphere(d, rng);
                let u: f64 = rng.random();
                center + dir * (radius * u.powf(1.0 / d as f64))
            }
            ConvexBody::Polytope(p) => loop {
                let x = DVector::from_fn(d, |i, _| {
                    let t: f64 = rng.random();
                    p.lo[i] + t * (p.hi[i] - p.lo[i])
                });
                if self.is_interior(&x) {
                    return x;
                }
            },
        }
    }

    fn solve_bounding_box(&self) -> Result<(DVector<f64>, DVector<f64>)> {
        let d = self.dim();
        let mut lo = DVector::zeros(d);
        let mut hi = DVector::zeros(d);
        for i in 0..d {
            for sign in [1.0, -1.0] {
                let mut e = DVector::zeros(d);
                e[i] = sign;
                let x = barrier_path(
                    self,
                    self.interior_point().clone(),
                    |_| (e.clone(), DMatrix::zeros(d, d)),
                    1e-10,
                )?;
                if sign > 0.0 {
                    lo[i] = x[i] - 1e-9 * (1.0 + x[i].abs());
                } else {
                    hi[i] = x[i] + 1e-9 * (1.0 + x[i].abs());
                }
            }
        }
        Ok((lo, hi))
    }

    fn check_dim(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(())
    }
}

/// Maximizes the smallest normalized slack through a log-sum-exp smoothing,
/// sharpening the smoothing until a strictly feasible point appears.
fn phase_one(rows: &[HalfSpace]) -> Result<DVector<f64>> {
    let d = rows[0].normal.len();
    let normals: Vec<DVector<f64>> = rows.iter().map(|r| &r.normal / r.normal.norm()).collect();
    let offsets: Vec<f64> = rows.iter().map(|r| r.offset / r.normal.norm()).collect();
    let min_slack = |u: &DVector<f64>| {
        normals
            .iter()
            .zip(&offsets)
            .map(|(a, b)| a.dot(u) - b)
            .fold(f64::INFINITY, f64::min)
    };
    let scale = 1.0 + offsets.iter().fold(0.0_f64, |m, b| m.max(b.abs()));
    let smooth_max = |u: &DVector<f64>, kappa: f64| -> f64 {
        let z: Vec<f64> = normals
            .iter()
            .zip(&offsets)
            .map(|(a, b)| -kappa * (a.dot(u) - b))
            .collect();
        let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        (m + z.iter().map(|v| (v - m).exp()).sum::<f64>().ln()) / kappa
    };

    let mut u = DVector::zeros(d);
    for kappa in [1.0, 4.0, 16.0, 64.0, 256.0, 1024.0].map(|k| k / scale) {
        for _ in 0..100 {
            let z: Vec<f64> = normals
                .iter()
                .zip(&offsets)
                .map(|(a, b)| -kappa * (a.dot(&u) - b))
                .collect();
            let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let w: Vec<f64> = z.iter().map(|v| (v - m).exp()).collect();
            let total: f64 = w.iter().sum();
            let mut mean = DVector::zeros(d);
            let mut second = DMatrix::zeros(d, d);
            for (a, wj) in normals.iter().zip(&w) {
                let p = wj / total;
                mean += a * p;
                second += a * a.transpose() * p;
            }
            let grad = -&mean;
            let mut hess = (second - &mean * mean.transpose()) * kappa;
            for i in 0..d {
                hess[(i, i)] += 1e-8;
            }
            let Some(chol) = hess.cholesky() else { break };
            let dir = chol.solve(&grad);
            let decrease = grad.dot(&dir);
            if decrease < 1e-20 {
                break;
            }
            let f0 = smooth_max(&u, kappa);
            let mut t = 1.0;
            loop {
                let next = &u - &dir * t;
                if smooth_max(&next, kappa) <= f0 - 1e-4 * t * decrease {
                    u = next;
                    break;
                }
                t *= 0.5;
                if t < 1e-12 {
                    break;
                }
            }
            if t < 1e-12 {
                break;
            }
        }
        if min_slack(&u) > 1e-9 * scale {
            return Ok(u);
        }
    }
    Err(Error::EmptyInterior)
}
