//! Dense complex matrices and the Hermitian eigensolver everything else is
//! built on.
//!
//! Sizes are small (blocks of at most a few dozen rows), so the matrix is a
//! plain row-major `Vec<Complex64>`. All spectral work goes through
//! [`herm_eig`]; singular values come from the eigenvalues of the Hermitian
//! dilation `[[0, A], [A*, 0]]`, which resolves small singular values to
//! absolute accuracy `eps * ||A||` instead of the `sqrt(eps) * ||A||` that
//! squaring through `A*A` would give.

mod eigen;
mod matrix;
mod solve;

pub use eigen::{herm_eig, HermEigen};
pub use matrix::CMatrix;
pub use solve::{inverse, solve};

use num_complex::Complex64;
use thiserror::Error;

use crate::tol::Tolerances;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is not Hermitian (defect {defect:.3e})")]
    NonHermitian { defect: f64 },
    #[error("matrix contains NaN or infinite entries")]
    NonFinite,
    #[error("matrix is singular (smallest singular value {smallest:.3e})")]
    Singular { smallest: f64 },
    #[error("expected a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("solve residual {residual:.3e} exceeds bound {bound:.3e}")]
    IllConditioned { residual: f64, bound: f64 },
}

/// Operator (spectral) norm, `sqrt(lambda_max(A*A))`.
///
/// The Gram matrix is formed on the smaller side, so `op_norm(A) ==
/// op_norm(A*)` holds up to rounding in the eigensolver.
pub fn op_norm(a: &CMatrix) -> Result<f64, LinalgError> {
    if !a.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    if a.rows() == 0 || a.cols() == 0 {
        return Ok(0.0);
    }
    let gram = if a.cols() <= a.rows() { a.adjoint().matmul(a) } else { a.matmul(&a.adjoint()) };
    let eig = herm_eig(&gram, &Tolerances::default())?;
    let top = eig.eigenvalues.last().copied().unwrap_or(0.0);
    Ok(top.max(0.0).sqrt())
}

/// Singular values in descending order, `min(rows, cols)` of them.
pub fn singular_values(a: &CMatrix, tol: &Tolerances) -> Result<Vec<f64>, LinalgError> {
    if !a.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let (m, n) = (a.rows(), a.cols());
    let k = m.min(n);
    if k == 0 {
        return Ok(Vec::new());
    }
    let mut dil = CMatrix::zeros(m + n, m + n);
    for i in 0..m {
        for j in 0..n {
            dil[(i, m + j)] = a[(i, j)];
            dil[(m + j, i)] = a[(i, j)].conj();
        }
    }
    let eig = herm_eig(&dil, tol)?;
    Ok(eig.eigenvalues.iter().rev().take(k).map(|&s| s.max(0.0)).collect())
}

/// Smallest singular value of a square matrix (0 for the empty matrix is
/// never reported: the empty operator is trivially invertible).
pub fn smallest_singular_value(a: &CMatrix, tol: &Tolerances) -> Result<f64, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare { rows: a.rows(), cols: a.cols() });
    }
    let sv = singular_values(a, tol)?;
    Ok(sv.last().copied().unwrap_or(f64::INFINITY))
}

/// `u v*` for column vectors given as slices.
pub fn outer(u: &[Complex64], v: &[Complex64]) -> CMatrix {
    CMatrix::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    fn random(rng: &mut Rng, m: usize, n: usize) -> CMatrix {
        CMatrix::from_fn(m, n, |_, _| rng.complex_normal())
    }

    /// Largest singular value by power iteration on `A*A` with a Rayleigh
    /// quotient readout. Independent of the Jacobi path.
    fn power_norm(a: &CMatrix) -> f64 {
        let g = a.adjoint().matmul(a);
        let n = g.rows();
        let mut v: Vec<Complex64> = (0..n).map(|i| Complex64::new(1.0 + i as f64 * 0.37, 0.11 * i as f64)).collect();
        let mut lambda = 0.0;
        for _ in 0..20_000 {
            let w = g.mul_vec(&v);
            let nw = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if nw == 0.0 {
                return 0.0;
            }
            v = w.iter().map(|z| z / nw).collect();
            let gv = g.mul_vec(&v);
            let next: f64 = v.iter().zip(&gv).map(|(x, y)| (x.conj() * y).re).sum();
            if (next - lambda).abs() <= 1e-16 * next.abs() {
                lambda = next;
                break;
            }
            lambda = next;
        }
        lambda.sqrt()
    }

    #[test]
    fn op_norm_identity_and_rank_one() {
        assert!((op_norm(&CMatrix::identity(4)).unwrap() - 1.0).abs() < 1e-14);
        let u = [Complex64::new(1.0, 2.0), Complex64::new(0.0, -1.0), Complex64::new(3.0, 0.0)];
        let v = [Complex64::new(2.0, 0.0), Complex64::new(0.5, 0.5)];
        let nu = u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let nv = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let got = op_norm(&outer(&u, &v)).unwrap();
        assert!((got - nu * nv).abs() < 1e-12 * nu * nv);
    }

    #[test]
    fn op_norm_matches_power_iteration() {
        let mut rng = Rng::new(5);
        let a = random(&mut rng, 5, 4);
        let expected = power_norm(&a);
        let got = op_norm(&a).unwrap();
        assert!((got - expected).abs() <= 1e-9, "{got} vs {expected}");
        assert!((op_norm(&a.adjoint()).unwrap() - got).abs() <= 1e-11 * got);
    }

    #[test]
    fn op_norm_is_submultiplicative() {
        let mut rng = Rng::new(6);
        for _ in 0..200 {
            let n = rng.range(1, 7);
            let a = random(&mut rng, n, n);
            let b = random(&mut rng, n, n);
            let ab = op_norm(&a.matmul(&b)).unwrap();
            assert!(ab <= op_norm(&a).unwrap() * op_norm(&b).unwrap() + 1e-9);
        }
    }

    #[test]
    fn empty_matrix_has_zero_norm() {
        assert_eq!(op_norm(&CMatrix::zeros(0, 0)).unwrap(), 0.0);
        assert!(singular_values(&CMatrix::zeros(0, 3), &Tolerances::default()).unwrap().is_empty());
    }

    #[test]
    fn singular_values_of_diagonal() {
        let a = CMatrix::from_real_diag(&[3.0, -2.0, 0.0]);
        let sv = singular_values(&a, &Tolerances::default()).unwrap();
        assert!((sv[0] - 3.0).abs() < 1e-14 && (sv[1] - 2.0).abs() < 1e-14 && sv[2].abs() < 1e-14);
    }

    #[test]
    fn non_finite_is_rejected() {
        let mut a = CMatrix::identity(2);
        a[(0, 1)] = Complex64::new(f64::NAN, 0.0);
        assert_eq!(op_norm(&a), Err(LinalgError::NonFinite));
    }
}
