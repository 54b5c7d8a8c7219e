use num_complex::Complex64;

use super::{smallest_singular_value, CMatrix, LinalgError};
use crate::tol::Tolerances;

/// Solve `A X = B` by LU factorisation with partial pivoting.
///
/// Refuses matrices whose smallest singular value is at most `sing_tol`, and
/// checks `||A X - B||_F <= solve_tol * ||B||_F` before returning.
pub fn solve(a: &CMatrix, b: &CMatrix, tol: &Tolerances) -> Result<CMatrix, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare { rows: a.rows(), cols: a.cols() });
    }
    if a.rows() != b.rows() {
        return Err(LinalgError::DimensionMismatch(format!(
            "solve: A is {}x{}, B has {} rows",
            a.rows(),
            a.cols(),
            b.rows()
        )));
    }
    if !a.is_finite() || !b.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let smallest = smallest_singular_value(a, tol)?;
    if smallest <= tol.sing_tol {
        return Err(LinalgError::Singular { smallest });
    }

    let n = a.rows();
    let mut lu = a.clone();
    let mut x = b.clone();
    for k in 0..n {
        let pivot = (k..n).max_by(|&i, &j| lu[(i, k)].norm().total_cmp(&lu[(j, k)].norm())).unwrap_or(k);
        if pivot != k {
            swap_rows(&mut lu, k, pivot);
            swap_rows(&mut x, k, pivot);
        }
        let d = lu[(k, k)];
        for i in k + 1..n {
            let f = lu[(i, k)] / d;
            if f == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in k..n {
                let v = lu[(k, j)];
                lu[(i, j)] -= f * v;
            }
            for j in 0..x.cols() {
                let v = x[(k, j)];
                x[(i, j)] -= f * v;
            }
        }
    }
    for k in (0..n).rev() {
        let d = lu[(k, k)];
        for j in 0..x.cols() {
            let mut acc = x[(k, j)];
            for i in k + 1..n {
                acc -= lu[(k, i)] * x[(i, j)];
            }
            x[(k, j)] = acc / d;
        }
    }

    let residual = (&a.matmul(&x) - b).frobenius_norm();
    let bound = tol.solve_tol * b.frobenius_norm().max(f64::MIN_POSITIVE);
    if residual > bound {
        return Err(LinalgError::IllConditioned { residual, bound });
    }
    Ok(x)
}

pub fn inverse(a: &CMatrix, tol: &Tolerances) -> Result<CMatrix, LinalgError> {
    solve(a, &CMatrix::identity(a.rows()), tol)
}

fn swap_rows(m: &mut CMatrix, r1: usize, r2: usize) {
    for j in 0..m.cols() {
        let t = m[(r1, j)];
        m[(r1, j)] = m[(r2, j)];
        m[(r2, j)] = t;
    }
}
