//! Contextual loss families, context processes, and per-context minimizer oracles.

pub mod context;
pub mod lower_bound;
pub mod mollifier;
pub mod quadratic;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

pub use context::ContextProcess;
pub use lower_bound::{max_admissible_r1, max_admissible_r2, LowerBoundFamily, LowerBoundSpec};
pub use quadratic::{ContextualQuadratic, QuadraticSpec};

use crate::conversion::Partition;
use crate::error::{Error, Result, Witness};
use crate::geometry::{ConvexBody, SymmetricMatrix};
use crate::randomness::SeedStream;

/// First-order stationarity demanded of interior minimizers.
pub const STATIONARITY_TOL: f64 = 1e-8;

/// A minimizer and the objective value there.
#[derive(Debug, Clone, PartialEq)]
pub struct Minimizer {
    pub x: DVector<f64>,
    pub value: f64,
}

/// The constants a loss model is declared to satisfy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constants {
    pub alpha: f64,
    pub beta: f64,
    pub sup_bound: f64,
    pub lipschitz: f64,
    pub gamma: f64,
}

/// `min_j min(c_j − lo_j, hi_j − c_j)` over the closed cell.
pub fn dist_to_cell_boundary(part: &Partition, cell: usize, c: &DVector<f64>) -> Result<f64> {
    if cell >= part.num_cells() {
        return Err(Error::NotInCell { cell });
    }
    if c.len() != part.p() {
        return Err(Error::DimensionMismatch {
            expected: part.p(),
            got: c.len(),
        });
    }
    let (lo, hi) = part.cell_bounds(cell);
    let mut best = f64::INFINITY;
    for j in 0..c.len() {
        if c[j] < lo[j] || c[j] > hi[j] {
            return Err(Error::NotInCell { cell });
        }
        best = best.min(c[j] - lo[j]).min(hi[j] - c[j]);
    }
    Ok(best)
}

/// Newton with Armijo backtracking. Points where `value` is `None` are treated
/// as outside the domain and backtracked away from.
fn newton_armijo<V, D>(x0: &DVector<f64>, value: V, derivs: D, tol: f64) -> Result<DVector<f64>>
where
    V: Fn(&DVector<f64>) -> Option<f64>,
    D: Fn(&DVector<f64>) -> Result<(DVector<f64>, SymmetricMatrix)>,
{
    let mut x = x0.clone();
    let mut fx = value(&x).ok_or(Error::NotInterior)?;
    for _ in 0..200 {
        let (g, h) = derivs(&x)?;
        // fall back to a gradient step when the Hessian is not positive definite
        let dir = h.solve(&g).unwrap_or_else(|_| g.clone());
        let slope = g.dot(&dir);
        if slope.sqrt() <= tol || !(slope > 0.0) {
            return Ok(x);
        }
        let mut step = 1.0;
        loop {
            let next = &x - &dir * step;
            match value(&next) {
                Some(fn_) if fn_ <= fx - 1e-4 * step * slope => {
                    x = next;
                    fx = fn_;
                    break;
                }
                _ => {}
            }
            step *= 0.5;
            if step < 1e-20 {
                return Ok(x);
            }
        }
    }
    Ok(x)
}

/// Minimizes a smooth, strongly convex objective over `body`.
///
/// Runs unconstrained Newton from every start and keeps the best point; if it
/// lies in the body it is checked for stationarity. Otherwise the constrained
/// minimizer is found by following the central path of `s·F + R` with
/// backtracking Newton, stopping once `μ/s ≤ 1e−12`.
pub fn minimize_smooth<V, D>(
    body: &ConvexBody,
    starts: &[DVector<f64>],
    value: V,
    derivs: D,
) -> Result<DVector<f64>>
where
    V: Fn(&DVector<f64>) -> f64,
    D: Fn(&DVector<f64>) -> (DVector<f64>, SymmetricMatrix),
{
    let mut best: Option<(f64, DVector<f64>)> = None;
    for s in starts {
        let x = newton_armijo(s, |u| Some(value(u)), |u| Ok(derivs(u)), 1e-14)?;
        let fx = value(&x);
        if best.as_ref().is_none_or(|(fb, _)| fx < *fb) {
            best = Some((fx, x));
        }
    }
    let (_, x) = best.ok_or_else(|| Error::OracleFailure("no starting points".into()))?;
    if body.contains(&x, 0.0) {
        let g = derivs(&x).0;
        if g.norm() > STATIONARITY_TOL {
            return Err(Error::OracleFailure(format!(
                "gradient norm {:e} at interior minimizer",
                g.norm()
            )));
        }
        return Ok(x);
    }
    let mu = body.barrier_parameter();
    let mut x = body.interior_point().clone();
    let mut s = 1.0;
    loop {
        x = newton_armijo(
            &x,
            |u| body.log_barrier(u).ok().map(|r| s * value(u) + r),
            |u| {
                let (gr, hr) = body.log_barrier_derivatives(u)?;
                let (gf, hf) = derivs(u);
                Ok((
                    gf * s + gr,
                    SymmetricMatrix::new(hf.into_inner() * s + hr.into_inner())?,
                ))
            },
            1e-9,
        )
        .map_err(|e| Error::OracleFailure(format!("constrained polish failed: {e}")))?;
        if mu / s <= 1e-12 {
            return Ok(x);
        }
        s *= 8.0;
    }
}

fn uniform_context<R: Rng + ?Sized>(p: usize, rng: &mut R) -> DVector<f64> {
    DVector::from_fn(p, |_, _| rng.random::<f64>())
}

/// A second context near `c`, at a log-uniform distance in `[1e−6, 1e−1]`.
fn nearby_context<R: Rng + ?Sized>(c: &DVector<f64>, rng: &mut R) -> DVector<f64> {
    let scale = 10f64.powf(rng.random_range(-6.0..-1.0));
    let dir = crate::randomness::sample_sphere(c.len(), rng);
    (c + dir * scale).map(|v| v.clamp(0.0, 1.0))
}

/// `(x, c, c')` at which a ratio was observed.
pub(crate) type HoelderWitness = (Vec<f64>, Vec<f64>, Vec<f64>);

/// Largest sampled `|f(x,c) − f(x,c')| / ‖c − c'‖^γ`; half the pairs are
/// global, half local.
pub(crate) fn hoelder_scan<F, R>(
    f: F,
    body: &ConvexBody,
    p: usize,
    gamma: f64,
    n: usize,
    rng: &mut R,
) -> (f64, Option<HoelderWitness>)
where
    F: Fn(&DVector<f64>, &DVector<f64>) -> f64,
    R: Rng + ?Sized,
{
    let mut worst = 0.0;
    let mut witness = None;
    for k in 0..n {
        let x = body.sample_uniform(rng);
        let c = uniform_context(p, rng);
        let c2 = if k % 2 == 0 {
            uniform_context(p, rng)
        } else {
            nearby_context(&c, rng)
        };
        let dist = (&c - &c2).norm();
        if dist == 0.0 {
            continue;
        }
        let ratio = (f(&x, &c) - f(&x, &c2)).abs() / dist.powf(gamma);
        if ratio > worst {
            worst = ratio;
            witness = Some((
                x.as_slice().to_vec(),
                c.as_slice().to_vec(),
                c2.as_slice().to_vec(),
            ));
        }
    }
    (worst, witness)
}

/// An evaluatable contextual loss.
#[derive(Debug, Clone, PartialEq)]
pub enum LossModel {
    Quadratic(ContextualQuadratic),
    LowerBound(LowerBoundFamily),
}

impl LossModel {
    pub fn body(&self) -> &ConvexBody {
        match self {
            LossModel::Quadratic(q) => q.body(),
            LossModel::LowerBound(l) => l.body(),
        }
    }

    pub fn dim(&self) -> usize {
        self.body().dim()
    }

    pub fn context_dim(&self) -> usize {
        match self {
            LossModel::Quadratic(q) => q.context_dim(),
            LossModel::LowerBound(l) => l.partition().p(),
        }
    }

    pub fn constants(&self) -> Constants {
        match self {
            LossModel::Quadratic(q) => Constants {
                alpha: q.spec().alpha,
                beta: q.spec().alpha,
                sup_bound: q.sup_bound(),
                lipschitz: q.spec().lipschitz,
                gamma: q.spec().gamma,
            },
            LossModel::LowerBound(l) => Constants {
                alpha: l.spec().alpha,
                beta: 3.0 * l.spec().alpha,
                sup_bound: l.sup_bound(),
                lipschitz: l.spec().lipschitz,
                gamma: l.spec().gamma,
            },
        }
    }

    pub fn value(&self, x: &DVector<f64>, c: &DVector<f64>) -> Result<f64> {
        match self {
            LossModel::Quadratic(q) => Ok(q.value(x, c)),
            LossModel::LowerBound(l) => l.value(x, c),
        }
    }

    pub fn gradient(&self, x: &DVector<f64>, c: &DVector<f64>) -> Result<DVector<f64>> {
        match self {
            LossModel::Quadratic(q) => Ok(q.gradient(x, c)),
            LossModel::LowerBound(l) => l.gradient(x, c),
        }
    }

    /// Per-context minimizer over the body.
    pub fn minimize(&self, c: &DVector<f64>) -> Result<Minimizer> {
        match self {
            LossModel::Quadratic(q) => q.minimize(c),
            LossModel::LowerBound(l) => l.minimize(c),
        }
    }

    /// Minimizer of `x ↦ Σ_t f(x, c_t)`; `value` is that sum.
    pub fn static_minimize(&self, contexts: &[DVector<f64>]) -> Result<Minimizer> {
        if contexts.is_empty() {
            return Err(Error::InvalidParameter(
                "static comparator needs at least one context".into(),
            ));
        }
        match self {
            LossModel::Quadratic(q) => q.static_minimize(contexts),
            LossModel::LowerBound(l) => l.static_minimize(contexts),
        }
    }
}

/// Worst sampled values behind a passed certification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CertificationReport {
    pub samples: usize,
    pub max_hoelder_ratio: f64,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    pub max_abs_value: f64,
}

/// Central differences of the analytic gradient, symmetrized.
fn numerical_hessian(
    model: &LossModel,
    x: &DVector<f64>,
    c: &DVector<f64>,
) -> Result<DMatrix<f64>> {
    let d = x.len();
    let e = 1e-6;
    let mut h = DMatrix::zeros(d, d);
    for j in 0..d {
        let mut up = x.clone();
        let mut dn = x.clone();
        up[j] += e;
        dn[j] -= e;
        let col = (model.gradient(&up, c)? - model.gradient(&dn, c)?) / (2.0 * e);
        h.set_column(j, &col);
    }
    Ok((&h + h.transpose()) * 0.5)
}

/// Samples the declared constants: Hölder ratio in the context at most
/// `L(1 + 1e−6)`, Hessian spectrum within `[α, β]`, and `|f| ≤ M`.
pub fn certify_constants(
    model: &LossModel,
    n: usize,
    stream: &SeedStream,
) -> Result<CertificationReport> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "certification needs at least one sample".into(),
        ));
    }
    let k = model.constants();
    let body = model.body();
    let p = model.context_dim();
    let mut rng = stream.rng();
    let fail =
        |check, x: &DVector<f64>, c: &DVector<f64>, c_prime: Option<Vec<f64>>, observed, limit| {
            Error::CertificationFailed(Box::new(Witness {
                check,
                x: x.as_slice().to_vec(),
                c: c.as_slice().to_vec(),
                c_prime,
                observed,
                limit,
            }))
        };

    let mut report = CertificationReport {
        samples: n,
        max_hoelder_ratio: 0.0,
        min_eigenvalue: f64::INFINITY,
        max_eigenvalue: f64::NEG_INFINITY,
        max_abs_value: 0.0,
    };
    let eig_slack = 1e-6 * k.alpha;
    for i in 0..n {
        let x = body.sample_uniform(&mut rng);
        let c = uniform_context(p, &mut rng);
        let c2 = if i % 2 == 0 {
            uniform_context(p, &mut rng)
        } else {
            nearby_context(&c, &mut rng)
        };

        let f1 = model.value(&x, &c)?;
        if f1.abs() > report.max_abs_value {
            report.max_abs_value = f1.abs();
            if f1.abs() > k.sup_bound {
                return Err(fail("sup_bound", &x, &c, None, f1.abs(), k.sup_bound));
            }
        }

        let dist = (&c - &c2).norm();
        if dist > 0.0 {
            let ratio = (f1 - model.value(&x, &c2)?).abs() / dist.powf(k.gamma);
            report.max_hoelder_ratio = report.max_hoelder_ratio.max(ratio);
            let limit = k.lipschitz * (1.0 + 1e-6);
            if ratio > limit {
                return Err(fail(
                    "hoelder",
                    &x,
                    &c,
                    Some(c2.as_slice().to_vec()),
                    ratio,
                    limit,
                ));
            }
        }

        let eig = numerical_hessian(model, &x, &c)?.symmetric_eigenvalues();
        let (lo, hi) = (eig.min(), eig.max());
        report.min_eigenvalue = report.min_eigenvalue.min(lo);
        report.max_eigenvalue = report.max_eigenvalue.max(hi);
        if lo < k.alpha - eig_slack {
            return Err(fail("hessian_min", &x, &c, None, lo, k.alpha));
        }
        if hi > k.beta + eig_slack {
            return Err(fail("hessian_max", &x, &c, None, hi, k.beta));
        }
    }
    Ok(report)
}
