//! A finite-arm input algorithm: UCB over an axis grid of the body.

use std::sync::Arc;

use nalgebra::DVector;

use crate::conversion::InputAlgorithm;
use crate::error::{Error, Result};
use crate::geometry::ConvexBody;

const MAX_NET_POINTS: usize = 1_000_000;

/// Grid points of spacing `eps`, anchored at the body's interior point, that
/// lie in the body.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsNet {
    points: Vec<DVector<f64>>,
    eps: f64,
}

impl EpsNet {
    pub fn new(body: &ConvexBody, eps: f64) -> Result<Self> {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "eps must be positive, got {eps}"
            )));
        }
        let anchor = body.interior_point();
        let (lo, hi) = body.bounding_box();
        let d = body.dim();
        // integer offsets from the anchor along each axis
        let ranges: Vec<(i64, i64)> = (0..d)
            .map(|j| {
                let a = ((lo[j] - anchor[j]) / eps).ceil() as i64;
                let b = ((hi[j] - anchor[j]) / eps).floor() as i64;
                (a, b)
            })
            .collect();
        let total = ranges
            .iter()
            .try_fold(1usize, |acc, (a, b)| acc.checked_mul((b - a + 1) as usize))
            .filter(|&n| n <= MAX_NET_POINTS)
            .ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "eps = {eps} gives more than {MAX_NET_POINTS} grid points"
                ))
            })?;
        let mut points = Vec::new();
        let mut idx: Vec<i64> = ranges.iter().map(|r| r.0).collect();
        for _ in 0..total {
            let x = DVector::from_fn(d, |j, _| anchor[j] + idx[j] as f64 * eps);
            if body.contains(&x, 0.0) {
                points.push(x);
            }
            for j in (0..d).rev() {
                if idx[j] < ranges[j].1 {
                    idx[j] += 1;
                    break;
                }
                idx[j] = ranges[j].0;
            }
        }
        Ok(Self { points, eps })
    }

    pub fn points(&self) -> &[DVector<f64>] {
        &self.points
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Per-arm pull counts and running mean losses.
#[derive(Debug, Clone, PartialEq)]
pub struct UcbState {
    counts: Vec<u64>,
    means: Vec<f64>,
    t: u64,
}

impl UcbState {
    pub fn new(arms: usize) -> Self {
        assert!(arms >= 1, "UCB needs at least one arm");
        Self {
            counts: vec![0; arms],
            means: vec![0.0; arms],
            t: 0,
        }
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn rounds(&self) -> u64 {
        self.t
    }

    /// Unpulled arms first (lowest index); then the smallest lower confidence
    /// bound `mean − √(2 log t / count)`, ties to the lowest index.
    pub fn select_arm(&self, t_local: u64) -> usize {
        assert!(t_local >= 1, "rounds are 1-based");
        if let Some(i) = self.counts.iter().position(|&n| n == 0) {
            return i;
        }
        let log_t = (t_local as f64).ln();
        let mut best = 0;
        let mut best_index = f64::INFINITY;
        for (i, (&m, &n)) in self.means.iter().zip(&self.counts).enumerate() {
            let index = m - (2.0 * log_t / n as f64).sqrt();
            if index < best_index {
                best_index = index;
                best = i;
            }
        }
        best
    }

    pub fn update_arm(&mut self, arm: usize, y: f64) {
        self.counts[arm] += 1;
        self.means[arm] += (y - self.means[arm]) / self.counts[arm] as f64;
        self.t += 1;
    }
}

/// UCB over an [`EpsNet`], usable as an input algorithm.
#[derive(Debug, Clone)]
pub struct EpsNetUcb {
    net: Arc<EpsNet>,
    state: UcbState,
    pending: Option<usize>,
}

impl EpsNetUcb {
    pub fn new(net: Arc<EpsNet>) -> Result<Self> {
        if net.is_empty() {
            return Err(Error::InvalidParameter(
                "eps-net has no points in the body".into(),
            ));
        }
        let state = UcbState::new(net.len());
        Ok(Self {
            net,
            state,
            pending: None,
        })
    }

    pub fn state(&self) -> &UcbState {
        &self.state
    }
}

impl InputAlgorithm for EpsNetUcb {
    fn propose(&mut self) -> Result<DVector<f64>> {
        if self.pending.is_some() {
            return Err(Error::PendingQuery);
        }
        let arm = self.state.select_arm(self.state.rounds() + 1);
        self.pending = Some(arm);
        Ok(self.net.points()[arm].clone())
    }

    fn feed(&mut self, y: f64) -> Result<()> {
        let arm = self.pending.take().ok_or(Error::NoPendingQuery)?;
        self.state.update_arm(arm, y);
        Ok(())
    }

    fn rounds_completed(&self) -> u64 {
        self.state.rounds()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::randomness::{draw_noise, NoiseModel, SeedStream};

    #[test]
    fn selection_rules() {
        let mut s = UcbState::new(3);
        assert_eq!(s.select_arm(1), 0);
        s.update_arm(0, 0.2);
        assert_eq!(s.select_arm(2), 1);

        let mut two = UcbState::new(2);
        for _ in 0..100 {
            two.update_arm(0, 0.1);
            two.update_arm(1, 0.9);
        }
        assert_eq!(two.select_arm(1000), 0);

        let mut tie = UcbState::new(3);
        for a in 0..3 {
            tie.update_arm(a, 0.5);
        }
        assert_eq!(tie.select_arm(10), 0);
    }

    #[test]
    fn running_means() {
        let mut s = UcbState::new(1);
        s.update_arm(0, 0.5);
        assert_eq!((s.means()[0], s.counts()[0]), (0.5, 1));
        let mut s = UcbState::new(1);
        s.update_arm(0, 0.0);
        s.update_arm(0, 1.0);
        assert_eq!(s.means()[0], 0.5);
        let mut s = UcbState::new(1);
        for _ in 0..10_000 {
            s.update_arm(0, 1.0);
        }
        assert!((s.means()[0] - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn net_points_lie_in_body() {
        let body = ConvexBody::unit_ball(2);
        let net = EpsNet::new(&body, 0.25).unwrap();
        assert!(net.points().iter().all(|p| body.contains(p, 0.0)));
        assert!(net.points().iter().any(|p| p.norm() == 0.0));
        // lattice points of the radius-4 disc
        assert_eq!(net.len(), 49);
        assert!(EpsNet::new(&body, 0.0).is_err());
        assert!(EpsNet::new(&body, 1e-5).is_err());
    }

    #[test]
    fn two_arm_gap_is_found() {
        let noise = NoiseModel::Gaussian { sigma: 0.1 };
        let mut frac = 0.0;
        for seed in 0..20 {
            let mut rng = SeedStream::new(seed).rng();
            let mut s = UcbState::new(2);
            let mut bad = 0;
            for t in 1..=10_000u64 {
                let a = s.select_arm(t);
                if a == 1 {
                    bad += 1;
                }
                let mean = if a == 0 { 0.0 } else { 0.5 };
                s.update_arm(a, mean + draw_noise(&noise, &mut rng));
            }
            frac += bad as f64 / 10_000.0;
        }
        assert!(frac / 20.0 < 0.05, "{}", frac / 20.0);
    }

    #[test]
    fn protocol_errors() {
        let net = Arc::new(EpsNet::new(&ConvexBody::unit_ball(1), 0.5).unwrap());
        let mut alg = EpsNetUcb::new(net).unwrap();
        assert!(matches!(alg.feed(0.0), Err(Error::NoPendingQuery)));
        alg.propose().unwrap();
        assert!(matches!(alg.propose(), Err(Error::PendingQuery)));
        alg.feed(0.3).unwrap();
        assert_eq!(alg.rounds_completed(), 1);
    }
}
