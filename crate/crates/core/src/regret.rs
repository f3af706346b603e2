//! Contextual and static regret bookkeeping and power-law rate fits.

use nalgebra::DVector;

use crate::environments::LossModel;
use crate::error::{Error, Result};

/// Increments below this are treated as oracle slack rather than a bug.
pub const ORACLE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub t: u64,
    pub c: DVector<f64>,
    pub z: DVector<f64>,
    pub y: f64,
    /// Noiseless `f(z_t, c_t)`.
    pub f_value: f64,
    /// `min_x f(x, c_t)`.
    pub f_star: f64,
}

impl RoundRecord {
    pub fn regret(&self) -> f64 {
        self.f_value - self.f_star
    }
}

/// Per-round records with the running contextual regret.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RegretLedger {
    records: Vec<RoundRecord>,
    cumulative: f64,
}

impl RegretLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn records(&self) -> &[RoundRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Cumulative contextual regret `Σ (f(z_t, c_t) − f*(c_t))`.
    pub fn cumulative(&self) -> f64 {
        self.cumulative
    }

    /// Appends a record with precomputed values.
    pub fn push(&mut self, record: RoundRecord) -> Result<&RoundRecord> {
        let inc = record.regret();
        if !(inc >= -ORACLE_SLACK) {
            return Err(Error::InvariantViolation(format!(
                "round {} has regret increment {inc:e} below the oracle slack",
                record.t
            )));
        }
        self.cumulative += inc;
        self.records.push(record);
        Ok(self.records.last().expect("just pushed"))
    }

    /// Evaluates `f(z, c)` and the per-context minimum, then appends the round.
    pub fn record_round(
        &mut self,
        model: &LossModel,
        c: &DVector<f64>,
        z: &DVector<f64>,
        y: f64,
    ) -> Result<&RoundRecord> {
        let f_value = model.value(z, c)?;
        let f_star = model.minimize(c)?.value;
        let t = self.records.len() as u64 + 1;
        self.push(RoundRecord {
            t,
            c: c.clone(),
            z: z.clone(),
            y,
            f_value,
            f_star,
        })
    }
}

/// `Σ_t f(z_t, c_t) − min_z Σ_t f(z, c_t)`.
pub fn static_regret(records: &[RoundRecord], model: &LossModel) -> Result<f64> {
    if records.is_empty() {
        return Err(Error::InvalidParameter(
            "static regret of an empty trace".into(),
        ));
    }
    let contexts: Vec<_> = records.iter().map(|r| r.c.clone()).collect();
    let comparator = model.static_minimize(&contexts)?;
    let played: f64 = records.iter().map(|r| r.f_value).sum();
    Ok(played - comparator.value)
}

/// `(T_j, R_j)` pairs for a log-log fit.
#[derive(Debug, Clone, PartialEq)]
pub struct RatePoints {
    horizons: Vec<f64>,
    regrets: Vec<f64>,
}

impl RatePoints {
    pub fn new(horizons: Vec<f64>, regrets: Vec<f64>) -> Result<Self> {
        if horizons.len() != regrets.len() {
            return Err(Error::DimensionMismatch {
                expected: horizons.len(),
                got: regrets.len(),
            });
        }
        Ok(Self { horizons, regrets })
    }

    pub fn horizons(&self) -> &[f64] {
        &self.horizons
    }

    pub fn regrets(&self) -> &[f64] {
        &self.regrets
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// Largest absolute residual in log space.
    pub max_residual: f64,
}

/// Least-squares fit of `log R = intercept + slope · log T`.
pub fn rate_fit(points: &RatePoints) -> Result<RateFit> {
    let n = points.horizons.len();
    if n < 3 {
        return Err(Error::DegenerateFit(format!(
            "need at least 3 points, got {n}"
        )));
    }
    if points
        .horizons
        .iter()
        .chain(&points.regrets)
        .any(|v| !(*v > 0.0) || !v.is_finite())
    {
        return Err(Error::DegenerateFit(
            "horizons and regrets must be positive and finite".into(),
        ));
    }
    let xs: Vec<f64> = points.horizons.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = points.regrets.iter().map(|r| r.ln()).collect();
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::DegenerateFit("horizons are not distinct".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let max_residual = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).abs())
        .fold(0.0, f64::max);
    Ok(RateFit {
        slope,
        intercept,
        max_residual,
    })
}
