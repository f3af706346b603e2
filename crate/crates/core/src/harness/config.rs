//! Experiment configuration, read from a single TOML document.

use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{ConvexBody, HalfSpace};
use crate::randomness::NoiseModel;

pub const SPEC_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub spec_version: u32,
    pub horizon: u64,
    pub seeds: Seeds,
    pub body: BodySpec,
    pub loss: LossSpec,
    pub context: ContextSpec,
    #[serde(default = "zero_noise")]
    pub noise: NoiseModel,
    pub algorithm: AlgorithmSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline: Option<BaselineSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSpec>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

fn zero_noise() -> NoiseModel {
    NoiseModel::Zero
}

/// Either a count `n` (seeds `0..n`) or an explicit list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Seeds {
    Count(u64),
    List(Vec<u64>),
}

impl Seeds {
    pub fn resolve(&self) -> Vec<u64> {
        match self {
            Seeds::Count(n) => (0..*n).collect(),
            Seeds::List(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BodySpec {
    Ball { center: Vec<f64>, radius: f64 },
    Box { lo: Vec<f64>, hi: Vec<f64> },
    Polytope { rows: Vec<RowSpec> },
}

/// `⟨normal, u⟩ ≥ offset`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RowSpec {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl BodySpec {
    pub fn build(&self) -> Result<ConvexBody> {
        match self {
            BodySpec::Ball { center, radius } => {
                ConvexBody::ball(DVector::from_column_slice(center), *radius)
            }
            BodySpec::Box { lo, hi } => ConvexBody::cube(lo, hi),
            BodySpec::Polytope { rows } => ConvexBody::polytope(
                rows.iter()
                    .map(|r| HalfSpace::new(DVector::from_column_slice(&r.normal), r.offset))
                    .collect(),
            ),
        }
    }
}

/// A cell count: explicit, or resolved from the horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CellCount {
    Fixed(usize),
    Policy(CellPolicy),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellPolicy {
    /// The tuned choice from the conversion exponents.
    Auto,
    /// `⌊(min(1, L²) T)^{1/(p+2γ)}⌋`, the hard-instance scale.
    LowerBound,
}

impl Default for CellCount {
    fn default() -> Self {
        CellCount::Policy(CellPolicy::Auto)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LossSpec {
    Quadratic {
        alpha: f64,
        #[serde(default = "one")]
        gamma: f64,
        lipschitz: f64,
        /// `d` rows of `p` entries.
        map: Vec<Vec<f64>>,
        shift: Vec<f64>,
        #[serde(default)]
        offset: f64,
        /// Radial clip factor; `0` disables clipping.
        #[serde(default = "default_clip")]
        clip: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sup_bound: Option<f64>,
    },
    LowerBound {
        alpha: f64,
        lipschitz: f64,
        gamma: f64,
        p: usize,
        r1: f64,
        r2: f64,
        #[serde(default)]
        omega_seed: u64,
        #[serde(default)]
        tau_seed: u64,
        #[serde(default, rename = "K")]
        k: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sup_bound: Option<f64>,
    },
    LowerBoundGamma0 {
        alpha: f64,
        lipschitz: f64,
        p: usize,
        r1: f64,
        r2: f64,
        #[serde(default)]
        omega_seed: u64,
        #[serde(default)]
        tau_seed: u64,
        #[serde(default, rename = "K")]
        k: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sup_bound: Option<f64>,
    },
}

fn one() -> f64 {
    1.0
}

fn default_clip() -> f64 {
    crate::environments::QuadraticSpec::DEFAULT_CLIP
}

impl LossSpec {
    pub fn context_dim(&self) -> usize {
        match self {
            LossSpec::Quadratic { map, .. } => map.first().map_or(0, |r| r.len()),
            LossSpec::LowerBound { p, .. } | LossSpec::LowerBoundGamma0 { p, .. } => *p,
        }
    }

    pub fn alpha(&self) -> f64 {
        match self {
            LossSpec::Quadratic { alpha, .. }
            | LossSpec::LowerBound { alpha, .. }
            | LossSpec::LowerBoundGamma0 { alpha, .. } => *alpha,
        }
    }

    /// `β/α` of the family.
    pub fn condition(&self) -> f64 {
        match self {
            LossSpec::Quadratic { .. } => 1.0,
            _ => 3.0,
        }
    }

    pub fn lipschitz(&self) -> f64 {
        match self {
            LossSpec::Quadratic { lipschitz, .. }
            | LossSpec::LowerBound { lipschitz, .. }
            | LossSpec::LowerBoundGamma0 { lipschitz, .. } => *lipschitz,
        }
    }

    pub fn gamma(&self) -> f64 {
        match self {
            LossSpec::Quadratic { gamma, .. } | LossSpec::LowerBound { gamma, .. } => *gamma,
            LossSpec::LowerBoundGamma0 { .. } => 0.0,
        }
    }

    pub(crate) fn quadratic_map(map: &[Vec<f64>], d: usize) -> Result<DMatrix<f64>> {
        let p = map.first().map_or(0, |r| r.len());
        if map.len() != d || p == 0 || map.iter().any(|r| r.len() != p) {
            return Err(Error::Config(format!(
                "loss.map must have {d} rows of equal, nonzero length"
            )));
        }
        Ok(DMatrix::from_fn(d, p, |i, j| map[i][j]))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ContextSpec {
    Fixed {
        values: Vec<Vec<f64>>,
    },
    IidUniform {
        p: usize,
    },
    Pk {
        p: usize,
        /// Defaults to the algorithm's cell count.
        #[serde(default, rename = "K", skip_serializing_if = "Option::is_none")]
        k: Option<usize>,
    },
}

impl ContextSpec {
    pub fn dim(&self) -> usize {
        match self {
            ContextSpec::Fixed { values } => values.first().map_or(0, |c| c.len()),
            ContextSpec::IidUniform { p } | ContextSpec::Pk { p, .. } => *p,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgorithmKind {
    Bco,
    RouterBco,
    RouterEpsNetUcb,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmSpec {
    pub kind: AlgorithmKind,
    #[serde(default, rename = "K")]
    pub k: CellCount,
    /// Exponents `(τ1, τ2, τ3)`; the strongly convex preset `(1 + ρ/2, 1/2, 1)` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<[f64; 3]>,
    #[serde(default)]
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BaselineSpec {
    pub eps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    pub dir: PathBuf,
    #[serde(default)]
    pub transcript: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Slack allowed when auditing that queries lie in the body.
    #[serde(default = "default_feasibility")]
    pub feasibility: f64,
}

fn default_feasibility() -> f64 {
    1e-12
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            feasibility: default_feasibility(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.spec_version != SPEC_VERSION {
            return Err(Error::Config(format!(
                "unsupported spec_version {} (expected {SPEC_VERSION})",
                self.spec_version
            )));
        }
        if self.horizon == 0 {
            return Err(Error::Config("horizon must be at least 1".into()));
        }
        if self.seeds.resolve().is_empty() {
            return Err(Error::Config("seeds must be nonempty".into()));
        }
        let p = self.loss.context_dim();
        if p == 0 {
            return Err(Error::Config("context dimension must be at least 1".into()));
        }
        if self.context.dim() != p {
            return Err(Error::Config(format!(
                "context dimension {} does not match the loss ({p})",
                self.context.dim()
            )));
        }
        if self.algorithm.kind == AlgorithmKind::RouterEpsNetUcb && self.baseline.is_none() {
            return Err(Error::Config(
                "router_eps_net_ucb needs a [baseline] table with eps".into(),
            ));
        }
        self.noise
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        Ok(())
    }
}
