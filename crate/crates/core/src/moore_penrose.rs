//! Moore-Penrose inversion on matrices and block elements, together with the
//! five equivalent characterisations of Moore-Penrose invertibility.
//!
//! Rank decision: a singular value `s` counts as zero when
//! `s <= rank_tol * max(1, s_max)`, where `s_max` is the norm of the input.
//! Every verdict below is taken relative to this single decision; "0 is an
//! isolated point of the spectrum of `a*a`" becomes "the smallest singular
//! value above the threshold is separated from the ones below it".
//!
//! The pseudoinverse itself is assembled from singular vectors read off the
//! Hermitian dilation `[[0, a], [a*, 0]]`. The verdicts recompute the same
//! objects along independent routes:
//!
//! * (a) a generalised inverse `b = a* (a a* + q_r)^-1` from the row space,
//! * (b) the four Penrose relations for `X`,
//! * (c) the eigenvalues of `a*a` split at half the smallest nonzero point,
//! * (d) `p = chi_[0, tau](a*a)` from the eigendecomposition of `a*a`,
//! * (e) `q` is a projection with `a q = 0`, `a*a + q` invertible, and
//!   `(a*a + q) X = a*`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::algebra::{Algebra, AlgebraError, BlockElement, DimensionTable};
use crate::calculus::{self, CalculusError};
use crate::linalg::{herm_eig, op_norm, outer, CMatrix, LinalgError};
use crate::tol::Tolerances;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MpError {
    #[error("0 is not an isolated point of the spectrum of a*a (smallest nonzero point {gap:.3e})")]
    NotMPInvertible { gap: f64 },
    #[error("element is not in the generated subalgebra (distance {distance:.3e})")]
    NotInSubalgebra { distance: f64 },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Calculus(CalculusError),
}

impl From<LinalgError> for MpError {
    fn from(e: LinalgError) -> Self {
        Self::Algebra(AlgebraError::Linalg(e))
    }
}

impl From<CalculusError> for MpError {
    fn from(e: CalculusError) -> Self {
        match e {
            CalculusError::Algebra(a) => Self::Algebra(a),
            other => Self::Calculus(other),
        }
    }
}

/// Operations shared by matrices and block elements.
pub trait Star: Clone {
    fn star_mul(&self, other: &Self) -> Self;
    fn star_adjoint(&self) -> Self;
    fn star_sub(&self, other: &Self) -> Self;
    fn star_norm(&self) -> f64;
}

impl Star for CMatrix {
    fn star_mul(&self, other: &Self) -> Self {
        self.matmul(other)
    }
    fn star_adjoint(&self) -> Self {
        self.adjoint()
    }
    fn star_sub(&self, other: &Self) -> Self {
        self - other
    }
    fn star_norm(&self) -> f64 {
        op_norm(self).expect("finite matrix")
    }
}

impl Star for BlockElement {
    fn star_mul(&self, other: &Self) -> Self {
        self * other
    }
    fn star_adjoint(&self) -> Self {
        self.adjoint()
    }
    fn star_sub(&self, other: &Self) -> Self {
        self - other
    }
    fn star_norm(&self) -> f64 {
        self.norm()
    }
}

/// Residuals of `aXa = a`, `XaX = X`, `(aX)* = aX`, `(Xa)* = Xa`.
pub fn penrose_residuals<T: Star>(a: &T, x: &T) -> [f64; 4] {
    let ax = a.star_mul(x);
    let xa = x.star_mul(a);
    [
        ax.star_mul(a).star_sub(a).star_norm(),
        xa.star_mul(x).star_sub(x).star_norm(),
        ax.star_adjoint().star_sub(&ax).star_norm(),
        xa.star_adjoint().star_sub(&xa).star_norm(),
    ]
}

/// Per-characterisation verdicts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Verdicts {
    pub a: bool,
    pub b: bool,
    pub c: bool,
    pub d: bool,
    pub e: bool,
}

impl Verdicts {
    pub fn agree(&self) -> bool {
        let v = [self.a, self.b, self.c, self.d, self.e];
        v.iter().all(|&x| x == v[0])
    }

    pub fn all(&self) -> bool {
        self.a && self.b && self.c && self.d && self.e
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MpResult<T> {
    pub pseudoinverse: T,
    pub mp_projection: T,
    /// Smallest nonzero point of the spectrum of `a*a`; `None` stands for
    /// `+inf` (the case `a = 0`).
    pub spectral_gap: Option<f64>,
    pub verdicts: Verdicts,
    /// `| ||a+||^2 * gap - 1 |`.
    pub norm_formula_residual: f64,
    /// Largest Penrose residual.
    pub penrose_residual: f64,
    /// Bound the Penrose residuals were compared with.
    pub penrose_bound: f64,
}

/// Witnesses behind each verdict.
#[derive(Debug, Clone, Serialize)]
pub struct EquivalenceReport<T> {
    pub verdicts: Verdicts,
    /// (a): `b` with `a b a = a`.
    pub generalized_inverse: T,
    pub generalized_residual: f64,
    /// (b): the Moore-Penrose inverse and its Penrose residuals.
    pub pseudoinverse: T,
    pub penrose: [f64; 4],
    pub penrose_bound: f64,
    /// (c): smallest nonzero point of `sigma(a*a)` and the split threshold.
    pub spectral_gap: Option<f64>,
    pub split_threshold: f64,
    /// (d): spectral projection of `a*a` at 0.
    pub functional_projection: T,
    /// (e): `q = e - X a`.
    pub mp_projection: T,
    /// `||a q||`, `||q^2 - q||`, `||q - q*||`, `||q - (e - X a)||`, `||(a*a + q) X - a*||`.
    pub projection_residuals: [f64; 5],
    /// Smallest eigenvalue of `a*a + q`.
    pub shifted_min_eigenvalue: f64,
    /// `||p - q||` between the (d) and (e) projections.
    pub uniqueness_residual: f64,
    pub norm_formula_residual: f64,
    pub rank: usize,
}

impl<T: Clone> EquivalenceReport<T> {
    pub fn to_result(&self) -> MpResult<T> {
        MpResult {
            pseudoinverse: self.pseudoinverse.clone(),
            mp_projection: self.mp_projection.clone(),
            spectral_gap: self.spectral_gap,
            verdicts: self.verdicts,
            norm_formula_residual: self.norm_formula_residual,
            penrose_residual: self.penrose.iter().copied().fold(0.0, f64::max),
            penrose_bound: self.penrose_bound,
        }
    }
}

/// Tolerance for the projection checks of (d) and (e).
const PROJ_TOL: f64 = 1e-9;

/// Matrix-level ingredients, computed with an externally chosen rank threshold.
struct MatrixParts {
    rank: usize,
    /// Nonzero singular values, descending.
    sigma: Vec<f64>,
    x: CMatrix,
    /// Kernel projection of `a` (right side).
    q: CMatrix,
    /// Generalised inverse from the row formula.
    b: CMatrix,
    /// Eigenvalues of `a*a`, ascending, with the eigenvectors.
    gram_eigenvalues: Vec<f64>,
    gram_vectors: CMatrix,
}

/// Pseudoinverse and kernel projections from the Hermitian dilation.
fn matrix_parts(a: &CMatrix, threshold: f64, tol: &Tolerances) -> Result<MatrixParts, MpError> {
    if !a.is_finite() {
        return Err(LinalgError::NonFinite.into());
    }
    let (m, n) = (a.rows(), a.cols());
    let mut dil = CMatrix::zeros(m + n, m + n);
    for i in 0..m {
        for j in 0..n {
            dil[(i, m + j)] = a[(i, j)];
            dil[(m + j, i)] = a[(i, j)].conj();
        }
    }
    let eig = herm_eig(&dil, tol)?;
    let sqrt2 = std::f64::consts::SQRT_2;
    let mut x = CMatrix::zeros(n, m);
    let mut range_right = CMatrix::zeros(n, n);
    let mut range_left = CMatrix::zeros(m, m);
    let mut sigma = Vec::new();
    for k in (0..m + n).rev() {
        let s = eig.eigenvalues[k];
        if s <= threshold {
            break;
        }
        let w = eig.eigenvectors.column(k);
        let u: Vec<Complex64> = w[..m].iter().map(|z| z * sqrt2).collect();
        let v: Vec<Complex64> = w[m..].iter().map(|z| z * sqrt2).collect();
        x = &x + &outer(&v, &u).scale(Complex64::new(1.0 / s, 0.0));
        range_right = &range_right + &outer(&v, &v);
        range_left = &range_left + &outer(&u, &u);
        sigma.push(s);
    }
    let rank = sigma.len();
    let q = (&CMatrix::identity(n) - &range_right).hermitian_part();
    let q_row = (&CMatrix::identity(m) - &range_left).hermitian_part();

    // (a): b = a* (a a* + q_r)^-1, inverted through its eigendecomposition.
    let floor = shift_floor(&sigma);
    let row_gram = &a.matmul(&a.adjoint()).hermitian_part() + &q_row;
    let b = match herm_inverse(&row_gram, floor, tol)? {
        Some(inv) => a.adjoint().matmul(&inv),
        None => CMatrix::zeros(n, m),
    };

    let gram = a.adjoint().matmul(a).hermitian_part();
    let ge = herm_eig(&gram, tol)?;
    Ok(MatrixParts { rank, sigma, x, q, b, gram_eigenvalues: ge.eigenvalues, gram_vectors: ge.eigenvectors })
}

/// Invertibility floor for `a*a + q`: its eigenvalues are the nonzero `s^2`
/// and `1`, so half their minimum separates success from failure.
fn shift_floor(sigma: &[f64]) -> f64 {
    0.5 * sigma.last().map_or(1.0, |s| (s * s).min(1.0))
}

/// `g^-1` for Hermitian `g` whose eigenvalues all exceed `floor`.
fn herm_inverse(g: &CMatrix, floor: f64, tol: &Tolerances) -> Result<Option<CMatrix>, MpError> {
    let eig = herm_eig(g, tol)?;
    if eig.eigenvalues.first().is_some_and(|&x| x < floor) {
        return Ok(None);
    }
    let inv: Vec<Complex64> = eig.eigenvalues.iter().map(|&x| Complex64::new(1.0 / x, 0.0)).collect();
    let u = &eig.eigenvectors;
    Ok(Some(u.matmul(&CMatrix::diag(&inv)).matmul(&u.adjoint())))
}

fn min_eigenvalue(g: &CMatrix, tol: &Tolerances) -> Result<f64, MpError> {
    Ok(herm_eig(&g.hermitian_part(), tol)?.eigenvalues.first().copied().unwrap_or(f64::INFINITY))
}

fn norm_formula_residual(x_norm: f64, gap: Option<f64>) -> f64 {
    match gap {
        Some(g) => (x_norm * x_norm * g - 1.0).abs(),
        None => x_norm,
    }
}

/// Half the smallest nonzero point of `sigma(a*a)`.
fn split_threshold(gap: Option<f64>) -> f64 {
    gap.map_or(f64::INFINITY, |g| 0.5 * g)
}

/// The Moore-Penrose inverse of a matrix.
pub fn matrix_pseudoinverse(a: &CMatrix, tol: &Tolerances) -> Result<CMatrix, MpError> {
    let threshold = tol.rank_tol * op_norm(a)?.max(1.0);
    Ok(matrix_parts(a, threshold, tol)?.x)
}

/// Orthogonal projection onto the kernel of a matrix, under the rank
/// decision relative to `max(1, scale)`.
pub fn kernel_projection(a: &CMatrix, scale: f64, tol: &Tolerances) -> Result<CMatrix, MpError> {
    Ok(matrix_parts(a, tol.rank_tol * scale.max(1.0), tol)?.q)
}

pub fn matrix_equivalence_report(a: &CMatrix, tol: &Tolerances) -> Result<EquivalenceReport<CMatrix>, MpError> {
    let a_norm = op_norm(a)?;
    let threshold = tol.rank_tol * a_norm.max(1.0);
    let parts = matrix_parts(a, threshold, tol)?;
    let n = a.cols();
    let x = parts.x.clone();
    let x_norm = op_norm(&x)?;
    let bound = tol.mp_tol * a_norm.max(x_norm).max(1.0);
    let scale = a_norm.max(1.0);

    let gap = parts.sigma.last().map(|s| s * s);
    let tau = split_threshold(gap);

    // (a)
    let generalized_residual = op_norm(&(&a.matmul(&parts.b).matmul(a) - a))?;
    let verdict_a = generalized_residual <= bound * scale;

    // (b)
    let penrose = penrose_residuals(a, &x);
    let verdict_b = penrose.iter().all(|&r| r <= bound);

    // (c)
    let above = parts.gram_eigenvalues.iter().filter(|&&l| l > tau).count();
    let verdict_c = above == parts.rank;

    // (d)
    let indicator: Vec<Complex64> =
        parts.gram_eigenvalues.iter().map(|&l| Complex64::new(if l <= tau { 1.0 } else { 0.0 }, 0.0)).collect();
    let u = &parts.gram_vectors;
    let p = u.matmul(&CMatrix::diag(&indicator)).matmul(&u.adjoint());
    let gram = a.adjoint().matmul(a);
    let floor = shift_floor(&parts.sigma);
    let verdict_d = op_norm(&a.matmul(&p))? <= bound
        && op_norm(&(&p.matmul(&p) - &p))? <= PROJ_TOL
        && min_eigenvalue(&(&gram + &p), tol)? >= floor;

    // (e)
    let q = &parts.q;
    let id = CMatrix::identity(n);
    let shifted = &gram + q;
    let shifted_min = min_eigenvalue(&shifted, tol)?;
    let projection_residuals = [
        op_norm(&a.matmul(q))?,
        op_norm(&(&q.matmul(q) - q))?,
        q.hermitian_defect(),
        op_norm(&(q - &(&id - &x.matmul(a))))?,
        op_norm(&(&shifted.matmul(&x) - &a.adjoint()))?,
    ];
    let verdict_e = projection_residuals[0] <= bound
        && projection_residuals[1] <= PROJ_TOL
        && projection_residuals[2] <= PROJ_TOL
        && projection_residuals[3] <= bound
        && projection_residuals[4] <= bound * scale
        && shifted_min >= floor;

    Ok(EquivalenceReport {
        verdicts: Verdicts { a: verdict_a, b: verdict_b, c: verdict_c, d: verdict_d, e: verdict_e },
        generalized_inverse: parts.b,
        generalized_residual,
        pseudoinverse: x,
        penrose,
        penrose_bound: bound,
        spectral_gap: gap,
        split_threshold: tau,
        uniqueness_residual: op_norm(&(&p - q))?,
        functional_projection: p,
        mp_projection: parts.q,
        projection_residuals,
        shifted_min_eigenvalue: shifted_min,
        norm_formula_residual: norm_formula_residual(x_norm, gap),
        rank: parts.rank,
    })
}

pub fn matrix_mp_inverse(a: &CMatrix, tol: &Tolerances) -> Result<MpResult<CMatrix>, MpError> {
    Ok(matrix_equivalence_report(a, tol)?.to_result())
}

/// Block-element report: the matrix construction is applied to every
/// supported `W_t(a)` and to the scalar tail, then every verdict is checked
/// on the assembled elements.
pub fn equivalence_report(alg: &Algebra, a: &BlockElement) -> Result<EquivalenceReport<BlockElement>, MpError> {
    alg.check(a)?;
    let tol = alg.tol();
    let a_norm = alg.norm(a);
    let threshold = tol.rank_tol * a_norm.max(1.0);
    let gamma = a.gamma();
    let tail_nonzero = gamma.norm() > threshold;
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);

    let mut x_reps = BTreeMap::new();
    let mut q_reps = BTreeMap::new();
    let mut b_reps = BTreeMap::new();
    let mut sigma_min: Option<f64> = tail_nonzero.then(|| gamma.norm());
    let mut ranks = BTreeMap::new();
    for &t in a.blocks().keys() {
        let parts = matrix_parts(&alg.rep(a, t), threshold, tol)?;
        if let Some(&s) = parts.sigma.last() {
            sigma_min = Some(sigma_min.map_or(s, |m: f64| m.min(s)));
        }
        ranks.insert(t, parts.rank);
        x_reps.insert(t, parts.x);
        q_reps.insert(t, parts.q);
        b_reps.insert(t, parts.b);
    }
    let (gamma_x, gamma_q) = if tail_nonzero { (gamma.inv(), zero) } else { (zero, one) };
    let x = alg.from_reps(gamma_x, x_reps);
    let q = alg.from_reps(gamma_q, q_reps);
    let b = alg.from_reps(gamma_x, b_reps);
    let x_norm = alg.norm(&x);
    let bound = tol.mp_tol * a_norm.max(x_norm).max(1.0);
    let scale = a_norm.max(1.0);
    let e = BlockElement::identity();

    let gap = sigma_min.map(|s| s * s);
    let tau = split_threshold(gap);
    let sigma_floor = sigma_min.map_or(1.0, |s| (s * s).min(1.0)) * 0.5;

    // (a)
    let generalized_residual = alg.norm(&(&(&(a * &b) * a) - a));
    let verdict_a = generalized_residual <= bound * scale;

    // (b)
    let penrose = penrose_residuals(a, &x);
    let verdict_b = penrose.iter().all(|&r| r <= bound);

    // (c): per block, the eigenvalues of W_t(a*a) above tau match the rank.
    let gram = &a.adjoint() * a;
    let mut verdict_c = (gram.gamma().re > tau) == tail_nonzero;
    for (&t, &rank) in &ranks {
        let eig = herm_eig(&alg.rep(&gram, t).hermitian_part(), tol)?;
        verdict_c &= eig.eigenvalues.iter().filter(|&&l| l > tau).count() == rank;
    }

    // (d): spectral projection of a*a at 0 via the functional calculus.
    let p = calculus::real_function(alg, &gram.hermitian_part(), |l| if l <= tau { 1.0 } else { 0.0 })?;
    let verdict_d = alg.norm(&(a * &p)) <= bound
        && alg.norm(&(&(&p * &p) - &p)) <= PROJ_TOL
        && element_min_eigenvalue(alg, &(&gram + &p))? >= sigma_floor;

    // (e)
    let shifted = &gram + &q;
    let shifted_min = element_min_eigenvalue(alg, &shifted)?;
    let projection_residuals = [
        alg.norm(&(a * &q)),
        alg.norm(&(&(&q * &q) - &q)),
        alg.self_adjoint_defect(&q),
        alg.norm(&(&q - &(&e - &(&x * a)))),
        alg.norm(&(&(&shifted * &x) - &a.adjoint())),
    ];
    let verdict_e = projection_residuals[0] <= bound
        && projection_residuals[1] <= PROJ_TOL
        && projection_residuals[2] <= PROJ_TOL
        && projection_residuals[3] <= bound
        && projection_residuals[4] <= bound * scale
        && shifted_min >= sigma_floor;

    let rank = ranks.values().sum();
    Ok(EquivalenceReport {
        verdicts: Verdicts { a: verdict_a, b: verdict_b, c: verdict_c, d: verdict_d, e: verdict_e },
        generalized_inverse: b,
        generalized_residual,
        pseudoinverse: x.clone(),
        penrose,
        penrose_bound: bound,
        spectral_gap: gap,
        split_threshold: tau,
        uniqueness_residual: alg.norm(&(&p - &q)),
        functional_projection: p,
        mp_projection: q,
        projection_residuals,
        shifted_min_eigenvalue: shifted_min,
        norm_formula_residual: norm_formula_residual(x_norm, gap),
        rank,
    })
}

/// Smallest spectral value of a self-adjoint element (tail included).
fn element_min_eigenvalue(alg: &Algebra, h: &BlockElement) -> Result<f64, MpError> {
    let mut m = h.gamma().re;
    for &t in h.blocks().keys() {
        m = m.min(min_eigenvalue(&alg.rep(h, t), alg.tol())?);
    }
    Ok(m)
}

pub fn mp_inverse(alg: &Algebra, a: &BlockElement) -> Result<MpResult<BlockElement>, MpError> {
    Ok(equivalence_report(alg, a)?.to_result())
}

/// Result of the inverse-closedness check.
#[derive(Debug, Clone, Serialize)]
pub struct ClosednessReport {
    pub closed: bool,
    /// Distance from `a+` to the span of words of length `<= word_length`.
    pub distance: f64,
    /// Shortest word length at which `a+` is reached, if it is.
    pub word_length: Option<usize>,
    pub span_dimension: usize,
}

/// Membership tolerance for the word span, relative to `max(1, ||x||)`.
pub const SPAN_TOL: f64 = 1e-7;

/// Coordinates `(gamma, entries of every registered block)` of an element.
fn coordinates(dims: &DimensionTable, a: &BlockElement) -> Vec<Complex64> {
    let mut v = vec![a.gamma()];
    for (t, n) in dims.iter() {
        match a.block(t) {
            Some(m) => v.extend_from_slice(m.data()),
            None => v.extend(std::iter::repeat_n(Complex64::new(0.0, 0.0), n * n)),
        }
    }
    v
}

fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Remove the components along an orthonormal basis (modified Gram-Schmidt,
/// two passes).
fn residual(basis: &[Vec<Complex64>], v: &[Complex64]) -> Vec<Complex64> {
    let mut r = v.to_vec();
    for _ in 0..2 {
        for b in basis {
            let c: Complex64 = b.iter().zip(&r).map(|(x, y)| x.conj() * y).sum();
            for (ri, bi) in r.iter_mut().zip(b) {
                *ri -= c * bi;
            }
        }
    }
    r
}

/// Check that `a+` lies in the unital C*-subalgebra generated by the given
/// elements, by growing the span of words in the generators and their
/// adjoints until it stops growing or `max_length` is reached.
pub fn inverse_closedness_check(
    alg: &Algebra,
    a: &BlockElement,
    generators: &[BlockElement],
    max_length: usize,
) -> Result<ClosednessReport, MpError> {
    alg.check(a)?;
    for g in generators {
        alg.check(g)?;
    }
    let dims = alg.dims();
    let mut gens: Vec<BlockElement> = generators.to_vec();
    gens.extend(generators.iter().map(BlockElement::adjoint));

    let a_dagger = mp_inverse(alg, a)?.pseudoinverse;
    let target = coordinates(dims, &a_dagger);
    let target_scale = vec_norm(&target).max(1.0);
    let a_coords = coordinates(dims, a);
    let a_scale = vec_norm(&a_coords).max(1.0);

    let e = BlockElement::identity();
    let mut basis = vec![{
        let c = coordinates(dims, &e);
        let n = vec_norm(&c);
        c.into_iter().map(|z| z / n).collect::<Vec<_>>()
    }];
    let mut frontier = vec![e];
    let mut word_length = (vec_norm(&residual(&basis, &target)) <= SPAN_TOL * target_scale).then_some(0);
    let mut length = 0;
    while !frontier.is_empty() && length < max_length {
        length += 1;
        let mut next = Vec::new();
        for w in &frontier {
            for g in &gens {
                let word = w * g;
                let c = coordinates(dims, &word);
                let size = vec_norm(&c);
                if size == 0.0 {
                    continue;
                }
                let r = residual(&basis, &c);
                let rn = vec_norm(&r);
                if rn > 1e-10 * size {
                    basis.push(r.into_iter().map(|z| z / rn).collect());
                    next.push(word.scale_re(1.0 / size));
                }
            }
        }
        frontier = next;
        if word_length.is_none() && vec_norm(&residual(&basis, &target)) <= SPAN_TOL * target_scale {
            word_length = Some(length);
        }
    }

    let a_distance = vec_norm(&residual(&basis, &a_coords));
    if a_distance > SPAN_TOL * a_scale {
        return Err(MpError::NotInSubalgebra { distance: a_distance });
    }
    let distance = vec_norm(&residual(&basis, &target));
    Ok(ClosednessReport {
        closed: distance <= SPAN_TOL * target_scale,
        distance,
        word_length,
        span_dimension: basis.len(),
    })
}

#[cfg(test)]
mod tests;
