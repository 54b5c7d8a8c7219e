//! Block model of a unital C*-algebra with a dual ideal.
//!
//! `A = C e + J_all` where `J_all` is the direct sum of full matrix algebras
//! `M_{n_t}` over a conceptually infinite index set. Only finitely many
//! indices are registered in a [`DimensionTable`]; every other index carries
//! the tail block `gamma I`. Consequently `|gamma|` takes part in norms,
//! spectra and invertibility, and no element with `gamma != 0` lies in a
//! proper ideal.

mod element;
mod ideal;

pub use element::{BlockElement, ZERO_TOL};
pub use ideal::{DimensionTable, DualIdeal};

use std::collections::BTreeMap;

use num_complex::Complex64;
use thiserror::Error;

use crate::linalg::{self, herm_eig, op_norm, CMatrix, LinalgError};
use crate::tol::Tolerances;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgebraError {
    #[error("block index {0} is not registered in the dimension table")]
    UnregisteredIndex(usize),
    #[error("block {index} has shape {rows}x{cols}, expected {expected}x{expected}")]
    DimensionMismatch { index: usize, rows: usize, cols: usize, expected: usize },
    #[error("element has non-finite entries")]
    NonFinite,
    #[error("element is not self-adjoint (defect {defect:.3e})")]
    NonHermitian { defect: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Witness of invertibility modulo an ideal: `a b = e + j`, `b a = e + k`.
#[derive(Debug, Clone, serde::Serialize)]
pub struct CosetWitness {
    pub b: BlockElement,
    pub j: BlockElement,
    pub k: BlockElement,
    /// `max(||ab - e - j||, ||ba - e - k||)`.
    pub residual: f64,
}

/// Residual bound for invertibility witnesses.
pub const WITNESS_TOL: f64 = 1e-8;

/// The ambient algebra: a dimension table plus the tolerances that turn
/// exact statements into floating-point decisions.
#[derive(Debug, Clone)]
pub struct Algebra {
    dims: DimensionTable,
    tol: Tolerances,
}

impl Algebra {
    pub fn new(dims: DimensionTable, tol: Tolerances) -> Self {
        Self { dims, tol }
    }

    pub fn with_dims(dims: DimensionTable) -> Self {
        Self::new(dims, Tolerances::default())
    }

    pub fn dims(&self) -> &DimensionTable {
        &self.dims
    }

    pub fn tol(&self) -> &Tolerances {
        &self.tol
    }

    /// Check that every block sits at a registered index with the right shape.
    pub fn check(&self, a: &BlockElement) -> Result<(), AlgebraError> {
        if !a.is_finite() {
            return Err(AlgebraError::NonFinite);
        }
        for (&t, m) in a.blocks() {
            let n = self.dims.dim(t).ok_or(AlgebraError::UnregisteredIndex(t))?;
            if m.rows() != n || m.cols() != n {
                return Err(AlgebraError::DimensionMismatch { index: t, rows: m.rows(), cols: m.cols(), expected: n });
            }
        }
        Ok(())
    }

    pub fn mul(&self, a: &BlockElement, b: &BlockElement) -> Result<BlockElement, AlgebraError> {
        self.check(a)?;
        self.check(b)?;
        Ok(a * b)
    }

    /// `W_t(a) = gamma I + a_t` for a registered index `t`.
    pub fn rep(&self, a: &BlockElement, t: usize) -> CMatrix {
        let n = self.dims.dim(t).expect("rep: unregistered index");
        match a.block(t) {
            Some(m) => m.add_identity(a.gamma()),
            None => CMatrix::identity(n).scale(a.gamma()),
        }
    }

    /// Inverse of [`Algebra::rep`]: the element with scalar part `gamma` whose
    /// representation at each listed index is the given matrix.
    pub fn from_reps(&self, gamma: Complex64, reps: BTreeMap<usize, CMatrix>) -> BlockElement {
        BlockElement::new(gamma, reps.into_iter().map(|(t, w)| (t, w.add_identity(-gamma))).collect())
    }

    /// `||a|| = max(|gamma|, sup_t ||W_t(a)||)`.
    pub fn norm(&self, a: &BlockElement) -> f64 {
        a.norm()
    }

    /// Equality up to `1e-9 * max(1, ||a||, ||b||)`.
    pub fn approx_eq(&self, a: &BlockElement, b: &BlockElement) -> bool {
        let scale = self.norm(a).max(self.norm(b)).max(1.0);
        self.norm(&(a - b)) <= 1e-9 * scale
    }

    pub fn self_adjoint_defect(&self, a: &BlockElement) -> f64 {
        self.norm(&(a - &a.adjoint()))
    }

    pub fn require_self_adjoint(&self, a: &BlockElement) -> Result<(), AlgebraError> {
        let defect = self.self_adjoint_defect(a);
        if defect > self.tol.herm_tol * self.norm(a).max(1.0) {
            return Err(AlgebraError::NonHermitian { defect });
        }
        Ok(())
    }

    /// Spectrum of a self-adjoint element, ascending, with eigenvalues closer
    /// than `cluster_tol * max(1, ||a||)` merged. The scalar part is always a
    /// spectral point because of the tail blocks.
    pub fn spectrum(&self, a: &BlockElement) -> Result<Vec<f64>, AlgebraError> {
        self.check(a)?;
        self.require_self_adjoint(a)?;
        let mut points = vec![(a.gamma().re, true)];
        for &t in a.blocks().keys() {
            let eig = herm_eig(&self.rep(a, t).hermitian_part(), &self.tol)?;
            points.extend(eig.eigenvalues.into_iter().map(|x| (x, false)));
        }
        let width = self.tol.cluster_tol * self.norm(a).max(1.0);
        Ok(merge_points(points, width).into_iter().map(|c| c.value).collect())
    }

    /// Invertibility in `A`, with the inverse as witness.
    ///
    /// Requires `|gamma| > sing_tol` (tail blocks) and every supported block to
    /// have smallest singular value above `sing_tol`.
    pub fn invertible(&self, a: &BlockElement) -> Option<BlockElement> {
        let gamma = a.gamma();
        if gamma.norm() <= self.tol.sing_tol {
            return None;
        }
        let gamma_inv = gamma.inv();
        let mut reps = BTreeMap::new();
        for &t in a.blocks().keys() {
            let inv = linalg::inverse(&self.rep(a, t), &self.tol).ok()?;
            reps.insert(t, inv);
        }
        let b = self.from_reps(gamma_inv, reps);
        let e = BlockElement::identity();
        let ok = self.norm(&(&(a * &b) - &e)) <= WITNESS_TOL && self.norm(&(&(&b * a) - &e)) <= WITNESS_TOL;
        ok.then_some(b)
    }

    /// Invertibility of the coset `a + J` in `A / J`.
    ///
    /// The tail indices never belong to `J`, so `gamma` must be invertible;
    /// every registered block outside the support of `J` must be invertible.
    /// The witness takes the inverse outside `J` and the block pseudoinverse
    /// inside it.
    pub fn coset_invertible(&self, a: &BlockElement, ideal: &DualIdeal) -> Option<CosetWitness> {
        let gamma = a.gamma();
        if gamma.norm() <= self.tol.sing_tol {
            return None;
        }
        let mut reps = BTreeMap::new();
        let mut j_reps = BTreeMap::new();
        let mut k_reps = BTreeMap::new();
        for &t in a.blocks().keys() {
            let w = self.rep(a, t);
            if ideal.contains(t) {
                let pinv = crate::moore_penrose::matrix_pseudoinverse(&w, &self.tol).ok()?;
                let n = w.rows();
                j_reps.insert(t, &w.matmul(&pinv) - &CMatrix::identity(n));
                k_reps.insert(t, &pinv.matmul(&w) - &CMatrix::identity(n));
                reps.insert(t, pinv);
            } else {
                reps.insert(t, linalg::inverse(&w, &self.tol).ok()?);
            }
        }
        let b = self.from_reps(gamma.inv(), reps);
        let zero = Complex64::new(0.0, 0.0);
        let j = self.from_reps(zero, j_reps);
        let k = self.from_reps(zero, k_reps);
        let e = BlockElement::identity();
        let r1 = self.norm(&(&(&(a * &b) - &e) - &j));
        let r2 = self.norm(&(&(&(&b * a) - &e) - &k));
        let residual = r1.max(r2);
        (residual <= WITNESS_TOL).then_some(CosetWitness { b, j, k, residual })
    }

    /// Exact membership: zero scalar part (at `zero_tol`) and support inside `J`.
    pub fn in_ideal(&self, a: &BlockElement, ideal: &DualIdeal) -> bool {
        a.gamma().norm() <= self.tol.zero_tol && a.blocks().keys().all(|&t| ideal.contains(t))
    }

    /// Quotient norm `||a + J|| = max(|gamma|, max_{t not in J} ||W_t(a)||)`,
    /// i.e. the distance from `a` to `J`.
    pub fn distance_to_ideal(&self, a: &BlockElement, ideal: &DualIdeal) -> f64 {
        a.blocks()
            .keys()
            .filter(|&&t| !ideal.contains(t))
            .map(|&t| op_norm(&self.rep(a, t)).expect("finite element"))
            .fold(a.gamma().norm(), f64::max)
    }

    /// Nearest element of `J`: the representations of `a` at the indices of `J`.
    pub fn ideal_part(&self, a: &BlockElement, ideal: &DualIdeal) -> BlockElement {
        let reps = a.blocks().keys().filter(|&&t| ideal.contains(t)).map(|&t| (t, self.rep(a, t))).collect();
        self.from_reps(Complex64::new(0.0, 0.0), reps)
    }

    /// All block representations are invertible and `|gamma| > sing_tol`.
    pub fn all_reps_invertible(&self, a: &BlockElement) -> bool {
        a.gamma().norm() > self.tol.sing_tol
            && a.blocks().keys().all(|&t| {
                linalg::smallest_singular_value(&self.rep(a, t), &self.tol).is_ok_and(|s| s > self.tol.sing_tol)
            })
    }
}

/// A merged group of nearby spectral values.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct MergedPoint {
    pub value: f64,
    /// Number of finite (block) eigenvalues in the group.
    pub count: usize,
    /// The group contains the tail value.
    pub tail: bool,
}

/// Merge sorted points into clusters: consecutive points within `width`
/// join the same cluster. The representative is the tail value when present
/// (it is exact), otherwise the mean.
pub(crate) fn merge_points(mut points: Vec<(f64, bool)>, width: f64) -> Vec<MergedPoint> {
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(Vec<f64>, Option<f64>)> = Vec::new();
    let mut last = f64::NEG_INFINITY;
    for (x, tail) in points {
        if out.is_empty() || x - last > width {
            out.push((Vec::new(), None));
        }
        let cur = out.last_mut().unwrap();
        if tail {
            cur.1 = Some(x);
        } else {
            cur.0.push(x);
        }
        last = x;
    }
    out.into_iter()
        .map(|(finite, tail)| {
            let value = tail.unwrap_or_else(|| finite.iter().sum::<f64>() / finite.len() as f64);
            MergedPoint { value, count: finite.len(), tail: tail.is_some() }
        })
        .collect()
}

#[cfg(test)]
mod tests;
