//! Static-to-contextual conversion: tile the context cube `[0,1]^p` into `K^p`
//! cells and run an independent input algorithm in each visited cell.

use std::collections::BTreeMap;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::randomness::SeedStream;

/// A static-regret algorithm driven one round at a time.
pub trait InputAlgorithm {
    fn propose(&mut self) -> Result<DVector<f64>>;
    fn feed(&mut self, y: f64) -> Result<()>;
    fn rounds_completed(&self) -> u64;
}

/// `K` cells per axis over `[0,1]^p`. Cells are half-open `[i/K, (i+1)/K)`
/// except the last on each axis, which is closed. Flat indices are row-major
/// with the first coordinate most significant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Partition {
    p: usize,
    k: usize,
    cells: usize,
}

impl Partition {
    pub fn new(p: usize, k: usize) -> Result<Self> {
        if p == 0 {
            return Err(Error::InvalidParameter(
                "context dimension must be at least 1".into(),
            ));
        }
        if k == 0 {
            return Err(Error::InvalidParameter("K must be at least 1".into()));
        }
        let cells = u32::try_from(p)
            .ok()
            .and_then(|p| k.checked_pow(p))
            .ok_or_else(|| Error::InvalidParameter(format!("K^p overflows for K={k}, p={p}")))?;
        Ok(Self { p, k, cells })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn num_cells(&self) -> usize {
        self.cells
    }

    pub fn edge(&self) -> f64 {
        1.0 / self.k as f64
    }

    pub fn axis_of(&self, c: &DVector<f64>) -> Result<Vec<usize>> {
        if c.len() != self.p {
            return Err(Error::DimensionMismatch {
                expected: self.p,
                got: c.len(),
            });
        }
        c.iter()
            .map(|&v| {
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::OutOfCube { value: v });
                }
                Ok(((self.k as f64 * v).floor() as usize).min(self.k - 1))
            })
            .collect()
    }

    pub fn cell_of(&self, c: &DVector<f64>) -> Result<usize> {
        Ok(self.flat_index(&self.axis_of(c)?))
    }

    pub fn flat_index(&self, axes: &[usize]) -> usize {
        axes.iter().fold(0, |acc, &i| acc * self.k + i)
    }

    pub fn axis_index(&self, cell: usize) -> Vec<usize> {
        assert!(cell < self.cells, "cell {cell} out of range");
        let mut out = vec![0; self.p];
        let mut rest = cell;
        for slot in out.iter_mut().rev() {
            *slot = rest % self.k;
            rest /= self.k;
        }
        out
    }

    pub fn barycenter(&self, cell: usize) -> DVector<f64> {
        let k = self.k as f64;
        DVector::from_iterator(
            self.p,
            self.axis_index(cell)
                .into_iter()
                .map(|i| (i as f64 + 0.5) / k),
        )
    }

    /// Closed bounds `(lo, hi)` of a cell.
    pub fn cell_bounds(&self, cell: usize) -> (DVector<f64>, DVector<f64>) {
        let k = self.k as f64;
        let axes = self.axis_index(cell);
        let lo = DVector::from_iterator(self.p, axes.iter().map(|&i| i as f64 / k));
        let hi = DVector::from_iterator(self.p, axes.iter().map(|&i| (i + 1) as f64 / k));
        (lo, hi)
    }
}

/// Exponents and constants entering the tuned number of cells per axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConversionParams {
    pub tau1: f64,
    pub tau2: f64,
    pub tau3: f64,
    pub t0: f64,
    pub lipschitz: f64,
    pub gamma: f64,
}

impl ConversionParams {
    pub fn new(
        tau1: f64,
        tau2: f64,
        tau3: f64,
        t0: f64,
        lipschitz: f64,
        gamma: f64,
    ) -> Result<Self> {
        if !(0.0..1.0).contains(&tau2) {
            return Err(Error::InvalidParameter(format!(
                "tau2 must lie in [0, 1), got {tau2}"
            )));
        }
        if !(t0 >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "T0 must be at least 1, got {t0}"
            )));
        }
        if !(lipschitz >= 0.0) || !lipschitz.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "L must be finite and nonnegative, got {lipschitz}"
            )));
        }
        if !(gamma > 0.0 && gamma <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "gamma must lie in (0, 1], got {gamma}"
            )));
        }
        Ok(Self {
            tau1,
            tau2,
            tau3,
            t0,
            lipschitz,
            gamma,
        })
    }

    /// Exponents `(1 + ρ/2, 1/2, 1)` of the barrier method, with
    /// `T0 = 16(μ + β/α)²`.
    pub fn strongly_convex(
        rho: f64,
        mu: f64,
        beta_over_alpha: f64,
        lipschitz: f64,
        gamma: f64,
    ) -> Result<Self> {
        let t0 = (16.0 * (mu + beta_over_alpha)).powi(2);
        Self::new(1.0 + rho / 2.0, 0.5, 1.0, t0, lipschitz, gamma)
    }
}

/// Largest integer `k ≥ 1` with `k^exponent ≤ inner`, robust to rounding in `powf`.
fn floor_root(inner: f64, exponent: f64) -> usize {
    if !(inner >= 1.0) || !inner.is_finite() {
        return 1;
    }
    let mut k = inner.powf(1.0 / exponent).floor().max(1.0) as usize;
    while ((k + 1) as f64).powf(exponent) <= inner {
        k += 1;
    }
    while k > 1 && (k as f64).powf(exponent) > inner {
        k -= 1;
    }
    k
}

/// Tuned cells per axis:
/// `max(1, ⌊(L p^{γ/2} d^{−τ1} T^{1−τ2} log^{−τ3}(T+1))^{1/(p(1−τ2)+γ)}⌋)`.
pub fn choose_k(params: &ConversionParams, d: usize, p: usize, horizon: u64) -> usize {
    assert!(horizon >= 1, "horizon must be at least 1");
    let t = horizon as f64;
    let inner = params.lipschitz
        * (p as f64).powf(params.gamma / 2.0)
        * (d as f64).powf(-params.tau1)
        * t.powf(1.0 - params.tau2)
        * (t + 1.0).ln().powf(-params.tau3);
    floor_root(inner, p as f64 * (1.0 - params.tau2) + params.gamma)
}

/// Cells per axis used by the hard instances: `max(1, ⌊(min(1, L²) T)^{1/(p+2γ)}⌋)`.
pub fn lower_bound_k(lipschitz: f64, gamma: f64, p: usize, horizon: u64) -> usize {
    let inner = lipschitz.powi(2).min(1.0) * horizon as f64;
    floor_root(inner, p as f64 + 2.0 * gamma)
}

/// Per-round discretization bias `2L(√p/K)^γ`.
pub fn expected_bias_bound(lipschitz: f64, gamma: f64, p: usize, k: usize) -> f64 {
    assert!(k >= 1, "K must be at least 1");
    2.0 * lipschitz * ((p as f64).sqrt() / k as f64).powf(gamma)
}

/// Outcome of one routed round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoutedRound {
    /// Global round, 1-based.
    pub t: u64,
    pub cell: usize,
    /// The cell's own round counter after this round, 1-based.
    pub local_t: u64,
    pub z: DVector<f64>,
    pub y: f64,
}

/// One input-algorithm instance per visited cell, each with its own random
/// substream `cell:<index>` under `root`.
pub struct Router<A, F> {
    partition: Partition,
    root: SeedStream,
    factory: F,
    instances: BTreeMap<usize, (A, u64)>,
    total_rounds: u64,
}

impl<A, F> Router<A, F>
where
    A: InputAlgorithm,
    F: FnMut(usize, &SeedStream) -> Result<A>,
{
    pub fn new(partition: Partition, root: SeedStream, factory: F) -> Self {
        Self {
            partition,
            root,
            factory,
            instances: BTreeMap::new(),
            total_rounds: 0,
        }
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn total_rounds(&self) -> u64 {
        self.total_rounds
    }

    /// Instantiated cells with their visit counts `N_i`, by cell index.
    pub fn visits(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.instances.iter().map(|(&i, (_, n))| (i, *n))
    }

    pub fn instance(&self, cell: usize) -> Option<&A> {
        self.instances.get(&cell).map(|(a, _)| a)
    }

    pub fn instantiated(&self) -> usize {
        self.instances.len()
    }

    /// Routes context `c` to its cell and advances that cell's instance by one
    /// of its own rounds.
    pub fn route_round<O>(&mut self, c: &DVector<f64>, observe: O) -> Result<RoutedRound>
    where
        O: FnOnce(&DVector<f64>) -> f64,
    {
        let cell = self.partition.cell_of(c)?;
        let (inst, visits) = match self.instances.entry(cell) {
            std::collections::btree_map::Entry::Occupied(e) => e.into_mut(),
            std::collections::btree_map::Entry::Vacant(e) => {
                let stream = self.root.child(format!("cell:{cell}"));
                e.insert(((self.factory)(cell, &stream)?, 0))
            }
        };
        let z = inst.propose()?;
        let y = observe(&z);
        inst.feed(y)?;
        *visits += 1;
        self.total_rounds += 1;
        Ok(RoutedRound {
            t: self.total_rounds,
            cell,
            local_t: *visits,
            z,
            y,
        })
    }
}
