//! Dense symmetric-positive-definite helpers used by the Gaussian-process
//! predictors: Cholesky solve, log-determinant, and inverse square root.
//!
//! Factorizations escalate a diagonal jitter (1e-12 then 1e-8) before
//! declaring failure; AR(1) kernels with rho near 1 are ill-conditioned at
//! context lengths in the hundreds.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

const JITTERS: [f64; 3] = [0.0, 1e-12, 1e-8];

fn cholesky_with_jitter(a: &DMatrix<f64>) -> Result<Cholesky<f64, nalgebra::Dyn>> {
    for &eps in &JITTERS {
        let mut m = a.clone();
        if eps > 0.0 {
            for i in 0..m.nrows() {
                m[(i, i)] += eps;
            }
        }
        if let Some(chol) = Cholesky::new(m) {
            return Ok(chol);
        }
    }
    Err(Error::Numerical(format!(
        "matrix of size {} is not positive definite (jitter up to 1e-8 tried)",
        a.nrows()
    )))
}

/// Solve `A x = b` for SPD `A`.
pub fn spd_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    Ok(cholesky_with_jitter(a)?.solve(b))
}

/// Solve `A X = B` column-wise for SPD `A`.
pub fn spd_solve_mat(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let chol = cholesky_with_jitter(a)?;
    let mut x = b.clone();
    chol.solve_mut(&mut x);
    Ok(x)
}

/// Log-determinant of an SPD matrix from its Cholesky factor diagonal.
pub fn spd_logdet(a: &DMatrix<f64>) -> Result<f64> {
    let chol = cholesky_with_jitter(a)?;
    Ok(2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>())
}

/// Inverse of an SPD matrix.
pub fn spd_inverse(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    spd_solve_mat(a, &DMatrix::identity(n, n))
}

/// Symmetric inverse square root via eigendecomposition.
pub fn spd_inv_sqrt(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = SymmetricEigen::new(a.clone());
    if eig.eigenvalues.iter().any(|&v| v <= 0.0) {
        return Err(Error::Numerical(
            "non-positive eigenvalue in inverse square root".into(),
        ));
    }
    let inv_sqrt = DMatrix::from_diagonal(&eig.eigenvalues.map(|v| 1.0 / v.sqrt()));
    Ok(&eig.eigenvectors * inv_sqrt * eig.eigenvectors.transpose())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_chacha::{rand_core::SeedableRng, ChaCha8Rng};

    #[test]
    fn identity_cases() {
        let a = DMatrix::identity(3, 3);
        let b = DVector::from_vec(vec![1.0, -2.0, 3.0]);
        assert_eq!(spd_solve(&a, &b).unwrap(), b);
        assert!(spd_logdet(&a).unwrap().abs() < 1e-14);
        assert!((spd_inv_sqrt(&a).unwrap() - &a).norm() < 1e-12);
    }

    #[test]
    fn diagonal_case() {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 8.0]));
        let b = DVector::from_vec(vec![2.0, 8.0]);
        let x = spd_solve(&a, &b).unwrap();
        assert!((x - DVector::from_vec(vec![1.0, 1.0])).norm() < 1e-14);
        assert!((spd_logdet(&a).unwrap() - 16.0f64.ln()).abs() < 1e-12);
    }

    fn random_spd(n: usize, seed: u64) -> DMatrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        &g * g.transpose() + DMatrix::identity(n, n) * 0.5
    }

    #[test]
    fn inv_sqrt_reconstructs() {
        let a = random_spd(5, 42);
        let s = spd_inv_sqrt(&a).unwrap();
        let recon = &s * &s * &a;
        assert!((recon - DMatrix::identity(5, 5)).norm() < 1e-8);
    }

    #[test]
    fn solve_residual_small() {
        let a = random_spd(8, 7);
        let b = DVector::from_fn(8, |i, _| (i as f64 + 1.0).sin());
        let x = spd_solve(&a, &b).unwrap();
        assert!((&a * x - &b).norm() <= 1e-8 * b.norm());
    }

    #[test]
    fn non_spd_rejected() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(spd_logdet(&a).is_err());
    }
}
