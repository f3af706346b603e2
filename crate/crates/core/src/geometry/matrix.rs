use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Relative eigenvalue floor below which `inv_sqrt_psd` refuses to invert.
pub const EIGEN_FLOOR: f64 = 1e-12;

/// Slack on the unit quadratic form in `dikin_contains`.
pub const DIKIN_SLACK: f64 = 1e-12;

/// Dense symmetric matrix. Construction symmetrizes, so `self == self^T` holds exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix(DMatrix<f64>);

impl SymmetricMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                got: m.ncols(),
            });
        }
        let sym = (&m + m.transpose()) * 0.5;
        Ok(Self(sym))
    }

    pub fn identity(d: usize) -> Self {
        Self(DMatrix::identity(d, d))
    }

    pub fn scaled_identity(d: usize, s: f64) -> Self {
        Self(DMatrix::identity(d, d) * s)
    }

    pub fn from_diagonal(diag: &DVector<f64>) -> Self {
        Self(DMatrix::from_diagonal(diag))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    /// `self + s * I`.
    pub fn add_identity(&self, s: f64) -> Self {
        let mut m = self.0.clone();
        for i in 0..m.nrows() {
            m[(i, i)] += s;
        }
        Self(m)
    }

    /// `vᵀ · self · v`.
    pub fn quad_form(&self, v: &DVector<f64>) -> f64 {
        v.dot(&(&self.0 * v))
    }

    pub fn mul_vec(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.0 * v
    }

    /// Solves `self · x = b` through a Cholesky factorization.
    pub fn solve(&self, b: &DVector<f64>) -> Result<DVector<f64>> {
        let chol = self
            .0
            .clone()
            .cholesky()
            .ok_or(Error::NotPositiveDefinite)?;
        Ok(chol.solve(b))
    }
}

impl std::ops::Add for &SymmetricMatrix {
    type Output = SymmetricMatrix;
    fn add(self, rhs: &SymmetricMatrix) -> SymmetricMatrix {
        SymmetricMatrix(&self.0 + &rhs.0)
    }
}

/// `√(gradᵀ hess⁻¹ grad)`, via Cholesky.
pub fn newton_decrement(grad: &DVector<f64>, hess: &SymmetricMatrix) -> Result<f64> {
    newton_step(grad, hess).map(|(lambda, _)| lambda)
}

/// Newton decrement together with the Newton direction `hess⁻¹ grad`.
pub(crate) fn newton_step(
    grad: &DVector<f64>,
    hess: &SymmetricMatrix,
) -> Result<(f64, DVector<f64>)> {
    if grad.len() != hess.dim() {
        return Err(Error::DimensionMismatch {
            expected: hess.dim(),
            got: grad.len(),
        });
    }
    let chol = hess
        .as_matrix()
        .clone()
        .cholesky()
        .ok_or(Error::NotPositiveDefinite)?;
    let dir = chol.solve(grad);
    let sq = grad.dot(&dir).max(0.0);
    Ok((sq.sqrt(), dir))
}

/// `M^{-1/2}` together with `M^{1/2}`, sharing one eigendecomposition.
pub(crate) fn inv_sqrt_and_sqrt(m: &SymmetricMatrix) -> Result<(SymmetricMatrix, SymmetricMatrix)> {
    let eig = SymmetricEigen::new(m.as_matrix().clone());
    let max = eig
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    if !(max > 0.0) || !max.is_finite() {
        return Err(Error::NotPositiveDefinite);
    }
    let floor = EIGEN_FLOOR * max;
    if eig.eigenvalues.iter().any(|&l| l < floor) {
        return Err(Error::NotPositiveDefinite);
    }
    let v = &eig.eigenvectors;
    let inv_root = eig.eigenvalues.map(|l| 1.0 / l.sqrt());
    let root = eig.eigenvalues.map(f64::sqrt);
    let p = v * DMatrix::from_diagonal(&inv_root) * v.transpose();
    let q = v * DMatrix::from_diagonal(&root) * v.transpose();
    Ok((SymmetricMatrix::new(p)?, SymmetricMatrix::new(q)?))
}

/// Symmetric inverse square root of a positive definite matrix.
///
/// Fails with `NotPositiveDefinite` when any eigenvalue falls below
/// `EIGEN_FLOOR` times the largest one; no clamping is attempted.
pub fn inv_sqrt_psd(m: &SymmetricMatrix) -> Result<SymmetricMatrix> {
    inv_sqrt_and_sqrt(m).map(|(p, _)| p)
}

/// Whether `z` lies in the unit Dikin ellipsoid `{z : (z−x)ᵀ H (z−x) ≤ 1}`.
pub fn dikin_contains(hess_at_x: &SymmetricMatrix, x: &DVector<f64>, z: &DVector<f64>) -> bool {
    let dz = z - x;
    hess_at_x.quad_form(&dz) <= 1.0 + DIKIN_SLACK
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_spd(d: usize, rng: &mut ChaCha8Rng) -> SymmetricMatrix {
        let a = DMatrix::from_fn(d, d, |_, _| rng.random_range(-1.0..1.0));
        SymmetricMatrix::new(&a * a.transpose() + DMatrix::identity(d, d) * 0.1).unwrap()
    }

    fn max_abs(m: &DMatrix<f64>) -> f64 {
        m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    #[test]
    fn inverse_square_root_of_identity_and_scalar() {
        let p = inv_sqrt_psd(&SymmetricMatrix::identity(3)).unwrap();
        assert!(max_abs(&(p.as_matrix() - DMatrix::identity(3, 3))) < 1e-15);
        let p = inv_sqrt_psd(&SymmetricMatrix::scaled_identity(2, 2.25)).unwrap();
        assert_relative_eq!(p.as_matrix()[(0, 0)], 2.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(p.as_matrix()[(1, 1)], 2.0 / 3.0, epsilon = 1e-15);
        assert_eq!(p.as_matrix()[(0, 1)], 0.0);
    }

    #[test]
    fn inverse_square_root_reconstructs_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for d in 1..=16 {
            for _ in 0..5 {
                let m = random_spd(d, &mut rng);
                let p = inv_sqrt_psd(&m).unwrap();
                let r = p.as_matrix() * m.as_matrix() * p.as_matrix() - DMatrix::identity(d, d);
                assert!(max_abs(&r) <= 1e-10, "d={d}: residual {}", max_abs(&r));
            }
        }
    }

    #[test]
    fn inverse_square_root_rejects_indefinite_and_near_singular() {
        let m =
            SymmetricMatrix::new(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0])).unwrap();
        assert!(matches!(inv_sqrt_psd(&m), Err(Error::NotPositiveDefinite)));
        let m =
            SymmetricMatrix::new(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1e-13])).unwrap();
        assert!(matches!(inv_sqrt_psd(&m), Err(Error::NotPositiveDefinite)));
        let m =
            SymmetricMatrix::new(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1e-11])).unwrap();
        assert!(inv_sqrt_psd(&m).is_ok());
    }

    #[test]
    fn newton_decrement_examples() {
        let h = SymmetricMatrix::scaled_identity(2, 3.0);
        assert_eq!(newton_decrement(&DVector::zeros(2), &h).unwrap(), 0.0);
        // Ball(0,1) barrier at (0.5, 0): gradient (4/3, 0), Hessian diag(40/9, 8/3).
        let g = DVector::from_vec(vec![4.0 / 3.0, 0.0]);
        let h = SymmetricMatrix::from_diagonal(&DVector::from_vec(vec![40.0 / 9.0, 8.0 / 3.0]));
        assert_relative_eq!(
            newton_decrement(&g, &h).unwrap(),
            0.4_f64.sqrt(),
            epsilon = 1e-14
        );
        let bad = SymmetricMatrix::scaled_identity(2, -1.0);
        assert!(matches!(
            newton_decrement(&g, &bad),
            Err(Error::NotPositiveDefinite)
        ));
    }

    #[test]
    fn dikin_examples() {
        let h = SymmetricMatrix::scaled_identity(2, 2.0);
        let x = DVector::zeros(2);
        assert!(dikin_contains(&h, &x, &x));
        let z = DVector::from_vec(vec![1.0 / 2f64.sqrt(), 0.0]);
        assert!(dikin_contains(&h, &x, &z));
        let z = DVector::from_vec(vec![1.0, 0.0]);
        assert!(!dikin_contains(&h, &x, &z));
    }

    #[test]
    fn symmetrized_on_construction() {
        let m = SymmetricMatrix::new(DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0])).unwrap();
        assert_eq!(m.as_matrix(), &m.as_matrix().transpose());
        assert!(SymmetricMatrix::new(DMatrix::zeros(2, 3)).is_err());
    }

    proptest::proptest! {
        #[test]
        fn dikin_is_translation_invariant(
            x in proptest::collection::vec(-5.0f64..5.0, 3),
            z in proptest::collection::vec(-5.0f64..5.0, 3),
            s in proptest::collection::vec(-100.0f64..100.0, 3),
            diag in proptest::collection::vec(0.01f64..4.0, 3),
        ) {
            let h = SymmetricMatrix::from_diagonal(&DVector::from_vec(diag));
            let x = DVector::from_vec(x);
            let z = DVector::from_vec(z);
            let s = DVector::from_vec(s);
            // Translation by s can perturb the displacement by rounding, so compare only
            // away from the decision boundary.
            let q = h.quad_form(&(&z - &x));
            proptest::prop_assume!((q - 1.0).abs() > 1e-9);
            proptest::prop_assert_eq!(dikin_contains(&h, &x, &z), dikin_contains(&h, &(&x + &s), &(&z + &s)));
        }
    }
}
