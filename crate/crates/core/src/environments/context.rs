use nalgebra::DVector;
use rand::Rng;

use crate::conversion::Partition;
use crate::error::{Error, Result};

/// How the context `c_t ∈ [0,1]^p` is generated each round.
#[derive(Debug, Clone, PartialEq)]
pub enum ContextProcess {
    /// Replays a list; round `t` (0-based) gets element `t`.
    Fixed(Vec<DVector<f64>>),
    IidUniform {
        p: usize,
    },
    /// Uniform cell, then uniform on the half-size sub-cube `G_i = (B_i + b_i)/2`.
    Pk {
        partition: Partition,
    },
}

impl ContextProcess {
    pub fn fixed(seq: Vec<DVector<f64>>) -> Result<Self> {
        let p = seq
            .first()
            .map(|c| c.len())
            .ok_or_else(|| Error::InvalidParameter("fixed context sequence is empty".into()))?;
        for c in &seq {
            if c.len() != p {
                return Err(Error::DimensionMismatch {
                    expected: p,
                    got: c.len(),
                });
            }
            if let Some(&v) = c.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(Error::OutOfCube { value: v });
            }
        }
        Ok(ContextProcess::Fixed(seq))
    }

    pub fn iid_uniform(p: usize) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidParameter(
                "context dimension must be at least 1".into(),
            ));
        }
        Ok(ContextProcess::IidUniform { p })
    }

    pub fn pk(p: usize, k: usize) -> Result<Self> {
        Ok(ContextProcess::Pk {
            partition: Partition::new(p, k)?,
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            ContextProcess::Fixed(seq) => seq[0].len(),
            ContextProcess::IidUniform { p } => *p,
            ContextProcess::Pk { partition } => partition.p(),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, t: usize, rng: &mut R) -> Result<DVector<f64>> {
        match self {
            ContextProcess::Fixed(seq) => seq.get(t).cloned().ok_or(Error::ExhaustedSequence(t)),
            ContextProcess::IidUniform { p } => {
                Ok(DVector::from_fn(*p, |_, _| rng.random::<f64>()))
            }
            ContextProcess::Pk { partition } => {
                let cell = rng.random_range(0..partition.num_cells());
                let b = partition.barycenter(cell);
                let half = 0.25 * partition.edge();
                Ok(b.map(|bj| rng.random_range(bj - half..=bj + half)))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::randomness::SeedStream;

    #[test]
    fn pk_single_cell_support() {
        let proc = ContextProcess::pk(1, 1).unwrap();
        let mut rng = SeedStream::new(1).rng();
        for t in 0..10_000 {
            let c = proc.sample(t, &mut rng).unwrap();
            assert!((0.25..=0.75).contains(&c[0]));
        }
    }

    #[test]
    fn pk_support_and_cell_frequencies() {
        let proc = ContextProcess::pk(2, 3).unwrap();
        let part = Partition::new(2, 3).unwrap();
        let mut rng = SeedStream::new(2).rng();
        let n = 1_000_000;
        let mut counts = vec![0usize; 9];
        for t in 0..n {
            let c = proc.sample(t, &mut rng).unwrap();
            let cell = part.cell_of(&c).unwrap();
            let off = (c - part.barycenter(cell)).amax();
            assert!(off <= 1.0 / 12.0 + 1e-15);
            counts[cell] += 1;
        }
        let p = 1.0 / 9.0;
        let sd = (n as f64 * p * (1.0 - p)).sqrt();
        for &k in &counts {
            assert!((k as f64 - n as f64 * p).abs() <= 4.0 * sd, "{counts:?}");
        }
    }

    #[test]
    fn fixed_sequence() {
        let c0 = DVector::from_row_slice(&[0.3, 0.7]);
        let proc = ContextProcess::fixed(vec![c0.clone()]).unwrap();
        let mut rng = SeedStream::new(0).rng();
        assert_eq!(proc.sample(0, &mut rng).unwrap(), c0);
        assert!(matches!(
            proc.sample(1, &mut rng),
            Err(Error::ExhaustedSequence(1))
        ));
        assert!(ContextProcess::fixed(vec![DVector::from_row_slice(&[1.5])]).is_err());
        assert!(ContextProcess::fixed(vec![]).is_err());
    }

    #[test]
    fn uniform_stays_in_cube() {
        let proc = ContextProcess::iid_uniform(3).unwrap();
        let mut rng = SeedStream::new(5).rng();
        for t in 0..1000 {
            let c = proc.sample(t, &mut rng).unwrap();
            assert!(c.iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }
}
