use num_complex::Complex64;

use super::{CMatrix, LinalgError};
use crate::tol::Tolerances;

/// Eigen-decomposition `A = U diag(eigenvalues) U*` of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermEigen {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Unitary; column `k` belongs to `eigenvalues[k]`.
    pub eigenvectors: CMatrix,
}

impl HermEigen {
    pub fn reconstruct(&self) -> CMatrix {
        let u = &self.eigenvectors;
        let lam: Vec<Complex64> = self.eigenvalues.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        u.matmul(&CMatrix::diag(&lam)).matmul(&u.adjoint())
    }
}

const MAX_SWEEPS: usize = 100;
/// Entries below this magnitude count as "not significant" when choosing the
/// phase and tie-break key of an eigenvector.
const SIGNIFICANT: f64 = 1e-8;

/// Cyclic Jacobi eigensolver for Hermitian matrices.
///
/// Each rotation first removes the phase of the pivot `a_pq` with a diagonal
/// unitary and then applies the real symmetric Jacobi rotation. Sweeps stop
/// once the off-diagonal Frobenius mass drops below
/// `eig_tol * max(1, ||A||_F) * 1e-3` or a sweep makes no rotation.
///
/// Output is deterministic: eigenvalues ascend; each eigenvector is scaled so
/// its first significant component is real and positive; eigenvalues equal
/// within `eig_tol * max(1, ||A||_F)` are ordered by the index of that
/// component (then by its size, larger first).
pub fn herm_eig(a: &CMatrix, tol: &Tolerances) -> Result<HermEigen, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NotSquare { rows: a.rows(), cols: a.cols() });
    }
    if !a.is_finite() {
        return Err(LinalgError::NonFinite);
    }
    let n = a.rows();
    let scale = a.frobenius_norm().max(1.0);
    let defect = a.hermitian_defect();
    if defect > tol.herm_tol * scale {
        return Err(LinalgError::NonHermitian { defect });
    }

    let mut m = a.hermitian_part();
    let mut v = CMatrix::identity(n);
    let stop = tol.eig_tol * scale * 1e-3;

    for _ in 0..MAX_SWEEPS {
        if off_diagonal(&m) <= stop {
            break;
        }
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                let r = apq.norm();
                if r == 0.0 || r < f64::EPSILON * 1e-3 * (m[(p, p)].re.abs() + m[(q, q)].re.abs()) {
                    m[(p, q)] = Complex64::new(0.0, 0.0);
                    m[(q, p)] = Complex64::new(0.0, 0.0);
                    continue;
                }
                rotated = true;
                rotate(&mut m, &mut v, p, q, apq / r, r);
            }
        }
        if !rotated {
            break;
        }
    }

    let values: Vec<f64> = (0..n).map(|i| m[(i, i)].re).collect();
    let mut columns: Vec<Vec<Complex64>> = (0..n).map(|j| normalise_phase(v.column(j))).collect();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    // Resolve near-ties with the eigenvector key.
    let tie = tol.eig_tol * scale;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[order[end]] - values[order[end - 1]] <= tie {
            end += 1;
        }
        order[start..end].sort_by(|&i, &j| tie_key(&columns[i]).cmp_key(&tie_key(&columns[j])));
        start = end;
    }

    let eigenvalues = order.iter().map(|&i| values[i]).collect();
    let eigenvectors = CMatrix::from_fn(n, n, |r, c| columns[order[c]][r]);
    columns.clear();
    Ok(HermEigen { eigenvalues, eigenvectors })
}

fn off_diagonal(m: &CMatrix) -> f64 {
    let n = m.rows();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += m[(i, j)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// Annihilate `m[p][q]` with `J = diag(1, conj(w)) R`, `m <- J* m J`, `v <- v J`.
fn rotate(m: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize, w: Complex64, r: f64) {
    let n = m.rows();
    let app = m[(p, p)].re;
    let aqq = m[(q, q)].re;
    let theta = (aqq - app) / (2.0 * r);
    let t = if theta == 0.0 { 1.0 } else { theta.signum() / (theta.abs() + theta.hypot(1.0)) };
    let c = 1.0 / t.hypot(1.0);
    let s = t * c;
    let wc = w.conj();

    // columns: m <- m J
    for k in 0..n {
        let mkp = m[(k, p)];
        let mkq = m[(k, q)];
        m[(k, p)] = mkp * c - mkq * wc * s;
        m[(k, q)] = mkp * s + mkq * wc * c;
    }
    // rows: m <- J* m
    for k in 0..n {
        let mpk = m[(p, k)];
        let mqk = m[(q, k)];
        m[(p, k)] = mpk * c - mqk * w * s;
        m[(q, k)] = mpk * s + mqk * w * c;
    }
    m[(p, q)] = Complex64::new(0.0, 0.0);
    m[(q, p)] = Complex64::new(0.0, 0.0);
    m[(p, p)] = Complex64::new(app - t * r, 0.0);
    m[(q, q)] = Complex64::new(aqq + t * r, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c - vkq * wc * s;
        v[(k, q)] = vkp * s + vkq * wc * c;
    }
}

fn normalise_phase(mut col: Vec<Complex64>) -> Vec<Complex64> {
    if let Some(z) = col.iter().copied().find(|z| z.norm() > SIGNIFICANT) {
        let phase = z.conj() / z.norm();
        for x in &mut col {
            *x *= phase;
        }
    }
    col
}

struct TieKey {
    index: usize,
    magnitude: f64,
}

impl TieKey {
    fn cmp_key(&self, other: &Self) -> std::cmp::Ordering {
        self.index.cmp(&other.index).then(other.magnitude.total_cmp(&self.magnitude))
    }
}

fn tie_key(col: &[Complex64]) -> TieKey {
    col.iter()
        .enumerate()
        .find(|(_, z)| z.norm() > SIGNIFICANT)
        .map(|(index, z)| TieKey { index, magnitude: z.norm() })
        .unwrap_or(TieKey { index: usize::MAX, magnitude: 0.0 })
}
