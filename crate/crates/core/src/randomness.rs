//! Reproducible random sources.
//!
//! A [`SeedStream`] names a substream by `(master_seed, path)`. Each distinct
//! path hashes to its own ChaCha20 key, so draws on one path never depend on how
//! many draws happened on another. The router relies on this: a cell's
//! randomness is the same no matter how contexts from other cells interleave.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub type StreamRng = ChaCha20Rng;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SeedStream {
    master_seed: u64,
    path: Vec<String>,
}

impl SeedStream {
    pub fn new(master_seed: u64) -> Self {
        Self {
            master_seed,
            path: Vec::new(),
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn path(&self) -> &[String] {
        &self.path
    }

    /// The substream one label below this one.
    pub fn child(&self, label: impl Into<String>) -> Self {
        let mut path = self.path.clone();
        path.push(label.into());
        Self {
            master_seed: self.master_seed,
            path,
        }
    }

    /// A fresh generator positioned at the start of this substream.
    pub fn rng(&self) -> StreamRng {
        let mut h = Sha256::new();
        h.update(b"ctxband-seed-stream\0");
        h.update(self.master_seed.to_le_bytes());
        for label in &self.path {
            h.update((label.len() as u64).to_le_bytes());
            h.update(label.as_bytes());
        }
        let digest = h.finalize();
        let mut key = [0u8; 32];
        key.copy_from_slice(&digest);
        ChaCha20Rng::from_seed(key)
    }
}

/// Uniform draw from the unit sphere in `R^d` (normalized Gaussian; the zero
/// vector is redrawn).
pub fn sample_sphere<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DVector<f64> {
    assert!(d >= 1, "sphere dimension must be at least 1");
    loop {
        let g = DVector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
        let n = g.norm();
        if n > 0.0 && n.is_finite() {
            return g / n;
        }
    }
}

/// Zero-mean observation noise with its sub-Gaussian proxy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseModel {
    Gaussian { sigma: f64 },
    BoundedUniform { half_width: f64 },
    Zero,
}

impl NoiseModel {
    /// The σ for which the noise is σ-sub-Gaussian.
    pub fn sub_gaussian_proxy(&self) -> f64 {
        match *self {
            NoiseModel::Gaussian { sigma } => sigma,
            NoiseModel::BoundedUniform { half_width } => half_width,
            NoiseModel::Zero => 0.0,
        }
    }

    pub fn validate(&self) -> crate::Result<()> {
        let v = self.sub_gaussian_proxy();
        if !(v >= 0.0) || !v.is_finite() {
            return Err(crate::Error::InvalidParameter(format!(
                "noise scale must be finite and nonnegative, got {v}"
            )));
        }
        Ok(())
    }
}

pub fn draw_noise<R: Rng + ?Sized>(model: &NoiseModel, rng: &mut R) -> f64 {
    match *model {
        NoiseModel::Zero => 0.0,
        NoiseModel::Gaussian { sigma } => sigma * rng.sample::<f64, _>(StandardNormal),
        NoiseModel::BoundedUniform { half_width } => {
            if half_width == 0.0 {
                0.0
            } else {
                rng.random_range(-half_width..=half_width)
            }
        }
    }
}
