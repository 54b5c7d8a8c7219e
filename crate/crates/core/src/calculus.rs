//! Continuous functional calculus for self-adjoint block elements, spectral
//! projections, and the minimal-projection machinery.
//!
//! A self-adjoint element has finite spectrum in this model: the eigenvalues
//! of its block representations plus the scalar part (carried by the
//! infinitely many tail blocks). Eigenvalues within
//! `cluster_tol * max(1, ||a||)` of each other are merged into one cluster,
//! and a continuous function on the spectrum is just a value per cluster.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{merge_points, Algebra, AlgebraError, BlockElement, DimensionTable, DualIdeal};
use crate::linalg::{herm_eig, outer, singular_values, CMatrix, HermEigen, LinalgError};
use crate::tol::Tolerances;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CalculusError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("function is undefined on the spectral cluster at {0}")]
    UndefinedOnCluster(f64),
    #[error("{lambda} is not an isolated spectral point (nearest other cluster {neighbor})")]
    NotIsolated { lambda: f64, neighbor: f64 },
    #[error("{0} is not in the spectrum")]
    NotInSpectrum(f64),
    #[error("element is not positive (smallest spectral value {0:.3e})")]
    NotPositive(f64),
    #[error("element does not lie in the ideal")]
    NotInIdeal,
    #[error("element is zero")]
    ZeroElement,
    #[error("element is not a projection (defect {0:.3e})")]
    NotProjection(f64),
}

impl From<LinalgError> for CalculusError {
    fn from(e: LinalgError) -> Self {
        Self::Algebra(AlgebraError::Linalg(e))
    }
}

/// One cluster of the spectrum with its spectral projection.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralCluster {
    pub lambda: f64,
    /// Number of block eigenvalues in the cluster.
    pub multiplicity: usize,
    /// The cluster contains the scalar part, i.e. it has infinite multiplicity.
    #[serde(default)]
    pub tail: bool,
    pub projection: BlockElement,
}

/// Clusters in strictly decreasing order of `lambda`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralDecomposition {
    pub clusters: Vec<SpectralCluster>,
}

/// Eigen-data of a self-adjoint element with every eigenvalue assigned to a
/// cluster.
struct Resolved {
    /// Ascending cluster representatives.
    values: Vec<f64>,
    multiplicity: Vec<usize>,
    tail_cluster: usize,
    blocks: BTreeMap<usize, (HermEigen, Vec<usize>)>,
    scale: f64,
}

fn resolve(alg: &Algebra, a: &BlockElement) -> Result<Resolved, CalculusError> {
    alg.check(a)?;
    alg.require_self_adjoint(a)?;
    let tol = alg.tol();
    let scale = alg.norm(a).max(1.0);
    let width = tol.cluster_tol * scale;
    let gamma = a.gamma().re;

    let mut eigs = BTreeMap::new();
    let mut points = vec![(gamma, true)];
    for &t in a.blocks().keys() {
        let eig = herm_eig(&alg.rep(a, t).hermitian_part(), tol)?;
        points.extend(eig.eigenvalues.iter().map(|&x| (x, false)));
        eigs.insert(t, eig);
    }
    let merged = merge_points(points.clone(), width);

    // Recover each point's cluster from the sorted merge order.
    let mut sorted: Vec<f64> = points.iter().map(|p| p.0).collect();
    sorted.sort_by(f64::total_cmp);
    let mut bounds = Vec::with_capacity(merged.len());
    let mut idx = 0;
    for m in &merged {
        let size = m.count + usize::from(m.tail);
        bounds.push((sorted[idx], sorted[idx + size - 1]));
        idx += size;
    }
    let locate =
        |x: f64| bounds.iter().position(|&(lo, hi)| x >= lo && x <= hi).expect("every point belongs to a cluster");

    let tail_cluster = locate(gamma);
    let blocks = eigs
        .into_iter()
        .map(|(t, eig)| {
            let ids = eig.eigenvalues.iter().map(|&x| locate(x)).collect();
            (t, (eig, ids))
        })
        .collect();
    Ok(Resolved {
        values: merged.iter().map(|m| m.value).collect(),
        multiplicity: merged.iter().map(|m| m.count).collect(),
        tail_cluster,
        blocks,
        scale,
    })
}

impl Resolved {
    fn apply(&self, alg: &Algebra, values: &[Complex64]) -> BlockElement {
        let gamma = values[self.tail_cluster];
        let reps = self
            .blocks
            .iter()
            .map(|(&t, (eig, ids))| {
                let diag: Vec<Complex64> = ids.iter().map(|&c| values[c]).collect();
                let u = &eig.eigenvectors;
                (t, u.matmul(&CMatrix::diag(&diag)).matmul(&u.adjoint()))
            })
            .collect();
        alg.from_reps(gamma, reps)
    }
}

/// `f(a)` for self-adjoint `a`, where `f` is evaluated once per spectral
/// cluster. Returning `None` marks `f` as undefined on that cluster.
pub fn functional_calculus(
    alg: &Algebra,
    a: &BlockElement,
    f: impl Fn(f64) -> Option<Complex64>,
) -> Result<BlockElement, CalculusError> {
    let res = resolve(alg, a)?;
    let values =
        res.values.iter().map(|&x| f(x).ok_or(CalculusError::UndefinedOnCluster(x))).collect::<Result<Vec<_>, _>>()?;
    Ok(res.apply(alg, &values))
}

/// Real-valued convenience wrapper around [`functional_calculus`].
pub fn real_function(alg: &Algebra, a: &BlockElement, f: impl Fn(f64) -> f64) -> Result<BlockElement, CalculusError> {
    functional_calculus(alg, a, |x| Some(Complex64::new(f(x), 0.0)))
}

pub fn spectral_decomposition(alg: &Algebra, a: &BlockElement) -> Result<SpectralDecomposition, CalculusError> {
    let res = resolve(alg, a)?;
    let n = res.values.len();
    let mut clusters = Vec::with_capacity(n);
    for c in (0..n).rev() {
        let indicator: Vec<Complex64> = (0..n).map(|i| Complex64::new(if i == c { 1.0 } else { 0.0 }, 0.0)).collect();
        clusters.push(SpectralCluster {
            lambda: res.values[c],
            multiplicity: res.multiplicity[c],
            tail: c == res.tail_cluster,
            projection: res.apply(alg, &indicator),
        });
    }
    Ok(SpectralDecomposition { clusters })
}

/// Spectral projection of `a` for the isolated cluster at `lambda`.
pub fn spectral_projection(alg: &Algebra, a: &BlockElement, lambda: f64) -> Result<BlockElement, CalculusError> {
    let res = resolve(alg, a)?;
    let tol = alg.tol();
    let gap = tol.cluster_gap * res.scale;
    let (c, dist) = res
        .values
        .iter()
        .enumerate()
        .map(|(i, &v)| (i, (v - lambda).abs()))
        .min_by(|x, y| x.1.total_cmp(&y.1))
        .expect("spectrum is never empty");
    if dist > gap {
        return Err(CalculusError::NotInSpectrum(lambda));
    }
    let rep = res.values[c];
    if let Some(&neighbor) = res
        .values
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != c)
        .map(|(_, v)| v)
        .min_by(|x, y| (*x - rep).abs().total_cmp(&(*y - rep).abs()))
    {
        if (neighbor - rep).abs() <= gap {
            return Err(CalculusError::NotIsolated { lambda: rep, neighbor });
        }
    }
    let values: Vec<Complex64> =
        (0..res.values.len()).map(|i| Complex64::new(if i == c { 1.0 } else { 0.0 }, 0.0)).collect();
    Ok(res.apply(alg, &values))
}

/// `f(h)` for a Hermitian matrix, applying `f` eigenvalue by eigenvalue.
pub fn matrix_function(h: &CMatrix, f: impl Fn(f64) -> Complex64, tol: &Tolerances) -> Result<CMatrix, LinalgError> {
    let eig = herm_eig(h, tol)?;
    let diag: Vec<Complex64> = eig.eigenvalues.iter().map(|&x| f(x)).collect();
    let u = &eig.eigenvectors;
    Ok(u.matmul(&CMatrix::diag(&diag)).matmul(&u.adjoint()))
}

/// A rank-one projection `v v*` in block `index`, weighted by `lambda`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RankOneTerm {
    pub lambda: f64,
    pub index: usize,
    pub vector: Vec<[f64; 2]>,
    pub projection: BlockElement,
}

/// Decompose a positive element of `J` as `sum lambda_i p_i` with rank-one
/// (minimal) projections `p_i`.
///
/// Terms come in the peeling order: the largest spectral value first, each
/// cluster split into rank-one pieces by block index and then by
/// eigenvector order. After `n` terms the remainder has norm equal to the
/// next `lambda`.
pub fn minimal_projection_decompose(
    alg: &Algebra,
    j: &BlockElement,
    ideal: &DualIdeal,
) -> Result<Vec<RankOneTerm>, CalculusError> {
    alg.check(j)?;
    if !alg.in_ideal(j, ideal) {
        return Err(CalculusError::NotInIdeal);
    }
    let res = resolve(alg, j)?;
    let tol = alg.tol();
    let zero_width = tol.cluster_tol * res.scale;
    let smallest = res.values.first().copied().unwrap_or(0.0);
    if smallest < -tol.herm_tol * res.scale {
        return Err(CalculusError::NotPositive(smallest));
    }

    let mut terms = Vec::new();
    for c in (0..res.values.len()).rev() {
        let lambda = res.values[c];
        if lambda <= zero_width {
            break;
        }
        for (&t, (eig, ids)) in &res.blocks {
            for (k, _) in ids.iter().enumerate().filter(|&(_, &id)| id == c) {
                let v = eig.eigenvectors.column(k);
                terms.push(RankOneTerm {
                    lambda,
                    index: t,
                    vector: v.iter().map(|z| [z.re, z.im]).collect(),
                    projection: BlockElement::single(t, outer(&v, &v)),
                });
            }
        }
    }
    Ok(terms)
}

/// Outcome of the algebraic rank-one test `k a k = alpha_a k`.
#[derive(Debug, Clone, Serialize)]
pub struct RankOneReport {
    pub rank_one: bool,
    /// Zero scalar part, a single supported block, and block rank one.
    pub structural: bool,
    pub alphas: Vec<[f64; 2]>,
    pub worst_residual: f64,
    pub failing_probe: Option<usize>,
}

/// Frobenius pairing on the stored coordinates (scalar part and blocks).
fn pairing(x: &BlockElement, y: &BlockElement) -> Complex64 {
    let mut acc = x.gamma() * y.gamma().conj();
    for (t, xm) in x.blocks() {
        if let Some(ym) = y.block(*t) {
            acc += xm.frobenius_inner(ym);
        }
    }
    acc
}

/// Test whether `k` has algebraic rank one against the given probes: for
/// every probe `a`, `||k a k - alpha k|| <= 1e-8 ||k||^2 ||a||` with
/// `alpha = <kak, k> / <k, k>`.
pub fn is_rank_one(alg: &Algebra, k: &BlockElement, probes: &[BlockElement]) -> Result<RankOneReport, CalculusError> {
    alg.check(k)?;
    if k.is_zero() {
        return Err(CalculusError::ZeroElement);
    }
    let knorm = alg.norm(k);
    let kk = pairing(k, k);
    let mut alphas = Vec::with_capacity(probes.len());
    let mut worst: f64 = 0.0;
    let mut failing = None;
    for (i, a) in probes.iter().enumerate() {
        let kak = &(k * a) * k;
        let alpha = pairing(&kak, k) / kk;
        let residual = alg.norm(&(&kak - &k.scale(alpha)));
        let bound = 1e-8 * knorm * knorm * alg.norm(a).max(f64::MIN_POSITIVE);
        worst = worst.max(residual / (knorm * knorm));
        if residual > bound && failing.is_none() {
            failing = Some(i);
        }
        alphas.push([alpha.re, alpha.im]);
    }
    Ok(RankOneReport {
        rank_one: failing.is_none(),
        structural: structurally_rank_one(k, alg.tol()),
        alphas,
        worst_residual: worst,
        failing_probe: failing,
    })
}

fn structurally_rank_one(k: &BlockElement, tol: &Tolerances) -> bool {
    if k.gamma().norm() > tol.zero_tol || k.blocks().len() != 1 {
        return false;
    }
    let m = k.blocks().values().next().unwrap();
    let sv = singular_values(m, tol).unwrap_or_default();
    let thr = tol.rank_tol * sv.first().copied().unwrap_or(0.0).max(1.0);
    sv.iter().filter(|&&s| s > thr).count() == 1
}

/// Matrix units `E_ij` of every registered block, plus the identity.
pub fn matrix_unit_probes(dims: &DimensionTable) -> Vec<BlockElement> {
    let mut probes = vec![BlockElement::identity()];
    for (t, n) in dims.iter() {
        for i in 0..n {
            for j in 0..n {
                let mut m = CMatrix::zeros(n, n);
                m[(i, j)] = Complex64::new(1.0, 0.0);
                probes.push(BlockElement::single(t, m));
            }
        }
    }
    probes
}

/// Maximal strictly decreasing chain `q = q_0 > q_1 > ... > q_m` ending in a
/// minimal projection. Each step removes one rank-one subprojection, so the
/// chain has as many members as `q` has total rank; the zero projection has
/// the empty chain.
pub fn decreasing_chain(alg: &Algebra, q: &BlockElement) -> Result<Vec<BlockElement>, CalculusError> {
    alg.check(q)?;
    let defect = alg.norm(&(&(q * q) - q)).max(alg.self_adjoint_defect(q));
    if defect > 1e-9 * alg.norm(q).max(1.0) {
        return Err(CalculusError::NotProjection(defect));
    }
    if q.gamma().norm() > alg.tol().zero_tol {
        // A projection with nonzero scalar part has infinite rank.
        return Err(CalculusError::NotInIdeal);
    }
    let mut pieces = Vec::new();
    for (&t, m) in q.blocks() {
        let eig = herm_eig(&m.hermitian_part(), alg.tol())?;
        for (k, &x) in eig.eigenvalues.iter().enumerate() {
            if x > 0.5 {
                let v = eig.eigenvectors.column(k);
                pieces.push(BlockElement::single(t, outer(&v, &v)));
            }
        }
    }
    let mut chain = Vec::with_capacity(pieces.len());
    let mut current = q.clone();
    for piece in pieces.iter().take(pieces.len().saturating_sub(1)) {
        let next = &current - piece;
        chain.push(current);
        current = next;
    }
    if !pieces.is_empty() {
        chain.push(current);
    }
    Ok(chain)
}

/// `a = (h+ - h-) + i (k+ - k-)` with `h = (a + a*)/2`, `k = (a - a*)/(2i)`,
/// and positive/negative parts from the functional calculus.
pub fn four_positive_parts(alg: &Algebra, a: &BlockElement) -> Result<[BlockElement; 4], CalculusError> {
    let h = a.hermitian_part();
    let k = (a - &a.adjoint()).scale(Complex64::new(0.0, -0.5));
    let hp = real_function(alg, &h, |x| x.max(0.0))?;
    let hm = real_function(alg, &h, |x| (-x).max(0.0))?;
    let kp = real_function(alg, &k, |x| x.max(0.0))?;
    let km = real_function(alg, &k, |x| (-x).max(0.0))?;
    Ok([hp, hm, kp, km])
}
