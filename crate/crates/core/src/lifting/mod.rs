//! Lifting constructions modulo a dual ideal `J`: Moore-Penrose lifting of
//! cosets that are invertible mod `J`, the two-ideal generalised inverse
//! identity, projection lifting, the split of an element into an ideal part
//! plus a Moore-Penrose invertible part, and the compact spectral report.

pub mod generators;

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::algebra::{Algebra, AlgebraError, BlockElement, DualIdeal};
use crate::calculus::{self, CalculusError};
use crate::linalg::{self, herm_eig};
use crate::moore_penrose::{self, penrose_residuals, MpError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LiftError {
    #[error("the coset a + J is not invertible")]
    NotCosetInvertible,
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("the coset is not a projection (defect {defect:.3e})")]
    NotProjectionCoset { defect: f64 },
    #[error("peeled spectral piece at {lambda} is not in the ideal (distance {distance:.3e})")]
    PeelNotInIdeal { lambda: f64, distance: f64 },
    #[error("spectral cluster {lambda} lies on the splitting threshold")]
    DegenerateCluster { lambda: f64 },
    #[error("the coset is not Moore-Penrose invertible (spectral point {point:.3e} accumulates at 0)")]
    NotCosetMPInvertible { point: f64 },
    #[error("element does not lie in the ideal")]
    NotInIdeal,
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Calculus(#[from] CalculusError),
    #[error(transparent)]
    Mp(#[from] MpError),
}

impl From<linalg::LinalgError> for LiftError {
    fn from(e: linalg::LinalgError) -> Self {
        Self::Algebra(AlgebraError::Linalg(e))
    }
}

/// Certificate bundle of a lifting construction.
#[derive(Debug, Clone, Serialize)]
pub struct LiftReport {
    pub theorem: String,
    pub success: bool,
    pub residuals: BTreeMap<String, f64>,
    pub lift: BlockElement,
}

impl LiftReport {
    fn new(theorem: &str, lift: BlockElement, checks: &[(&str, f64, f64)]) -> Self {
        Self {
            theorem: theorem.to_string(),
            success: checks.iter().all(|&(_, value, bound)| value <= bound),
            residuals: checks.iter().map(|&(name, value, _)| (name.to_string(), value)).collect(),
            lift,
        }
    }
}

/// Residual bound for lifting certificates.
pub const LIFT_TOL: f64 = 1e-8;
/// Projection defect bound.
pub const PROJECTION_TOL: f64 = 1e-9;
/// Margin around the splitting thresholds `|x| = 1/2`, `|1 - x| = 1/2`.
pub const THRESHOLD_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, Serialize)]
pub struct MpLift {
    pub projection: BlockElement,
    pub pseudoinverse: BlockElement,
    pub report: LiftReport,
}

/// Moore-Penrose inverse of an element whose coset is invertible mod `J`:
/// `p` is the sum of the kernel projections of the singular
/// representations (all inside `J`), and `a+ = (a*a + p)^-1 a*`.
pub fn mp_lift(alg: &Algebra, a: &BlockElement, ideal: &DualIdeal) -> Result<MpLift, LiftError> {
    alg.check(a)?;
    if alg.coset_invertible(a, ideal).is_none() {
        return Err(LiftError::NotCosetInvertible);
    }
    let tol = alg.tol();
    let a_norm = alg.norm(a);
    let mut kernels = BTreeMap::new();
    for &t in a.blocks().keys() {
        if ideal.contains(t) {
            kernels.insert(t, moore_penrose::kernel_projection(&alg.rep(a, t), a_norm, tol)?);
        }
    }
    let p = alg.from_reps(Complex64::new(0.0, 0.0), kernels);
    let gram = &a.adjoint() * a;
    let shifted = &gram + &p;
    let a_adj = a.adjoint();
    let mut reps = BTreeMap::new();
    for &t in shifted.blocks().keys().chain(a_adj.blocks().keys()) {
        if let std::collections::btree_map::Entry::Vacant(e) = reps.entry(t) {
            e.insert(linalg::solve(&alg.rep(&shifted, t), &alg.rep(&a_adj, t), tol)?);
        }
    }
    let gamma = a.gamma();
    let x = alg.from_reps(gamma.conj() / shifted.gamma(), reps);

    let x_norm = alg.norm(&x);
    let mp_bound = tol.mp_tol * a_norm.max(x_norm).max(1.0);
    let scale = a_norm.max(1.0).powi(2);
    let penrose = penrose_residuals(a, &x).into_iter().fold(0.0, f64::max);
    let membership = if alg.in_ideal(&p, ideal) { 0.0 } else { f64::INFINITY };
    let shifted_inverse = if alg.invertible(&shifted).is_some() { 0.0 } else { f64::INFINITY };
    let projection = alg.norm(&(&(&p * &p) - &p)).max(alg.self_adjoint_defect(&p));
    let report = LiftReport::new(
        "mp-lift",
        x.clone(),
        &[
            ("projection_in_ideal", membership, 0.0),
            ("projection_defect", projection, PROJECTION_TOL),
            ("gram_times_projection", alg.norm(&(&gram * &p)), LIFT_TOL * scale),
            ("shifted_gram_not_invertible", shifted_inverse, 0.0),
            ("penrose", penrose, mp_bound),
        ],
    );
    Ok(MpLift { projection: p, pseudoinverse: x, report })
}

#[derive(Debug, Clone, Serialize)]
pub struct NIdealsCertificate {
    /// `g = b + c - b a c`.
    pub generalized_inverse: BlockElement,
    /// `a g a - a`.
    pub defect: BlockElement,
    /// `in_ideal(a g a - a, J1 & J2)` on the canonical support.
    pub support_exact: bool,
    /// Distance of `a g a - a` to `J1 & J2`.
    pub residual: f64,
    pub intersection: DualIdeal,
}

/// Generalised-inverse identity for two ideals: if `a b a - a` lies in `J1`
/// and `e - c a` in `J2`, then `a (b + c - b a c) a - a` lies in `J1 & J2`.
pub fn n_ideals_identity(
    alg: &Algebra,
    a: &BlockElement,
    b: &BlockElement,
    c: &BlockElement,
    j1: &DualIdeal,
    j2: &DualIdeal,
) -> Result<NIdealsCertificate, LiftError> {
    for x in [a, b, c] {
        alg.check(x)?;
    }
    let scale = alg.norm(a).max(alg.norm(b)).max(alg.norm(c)).max(1.0).powi(3);
    let first = &(&(a * b) * a) - a;
    let d1 = alg.distance_to_ideal(&first, j1);
    if d1 > LIFT_TOL * scale {
        return Err(LiftError::PreconditionFailed(format!("a b a - a is not in J1 (distance {d1:.3e})")));
    }
    let second = &BlockElement::identity() - &(c * a);
    let d2 = alg.distance_to_ideal(&second, j2);
    if d2 > LIFT_TOL * scale {
        return Err(LiftError::PreconditionFailed(format!("e - c a is not in J2 (distance {d2:.3e})")));
    }
    let g = &(b + c) - &(&(b * a) * c);
    let defect = &(&(a * &g) * a) - a;
    let intersection = j1.intersection(j2);
    Ok(NIdealsCertificate {
        support_exact: alg.in_ideal(&defect, &intersection),
        residual: alg.distance_to_ideal(&defect, &intersection),
        generalized_inverse: g,
        defect,
        intersection,
    })
}

/// Checks that `a + J` is a projection in `A / J`.
fn require_projection_coset(alg: &Algebra, a: &BlockElement, ideal: &DualIdeal) -> Result<(), LiftError> {
    let scale = alg.norm(a).max(1.0).powi(2);
    let defect = alg.distance_to_ideal(&(a - &a.adjoint()), ideal).max(alg.distance_to_ideal(&(a - &(a * a)), ideal));
    if defect > LIFT_TOL * scale {
        return Err(LiftError::NotProjectionCoset { defect });
    }
    Ok(())
}

fn in_sigma1(x: f64) -> bool {
    (1.0 - x).abs() < 0.5
}

#[derive(Debug, Clone, Serialize)]
pub struct ProjectionLift {
    pub projection: BlockElement,
    /// Self-adjoint representative after peeling, with spectrum in `Sigma0 u Sigma1`.
    pub representative: BlockElement,
    /// Spectral values removed from the representative.
    pub peeled: Vec<f64>,
    pub report: LiftReport,
}

/// Lift a projection coset to a projection.
///
/// The representative is symmetrised, every spectral cluster outside
/// `Sigma0 = {|x| < 1/2}` and `Sigma1 = {|1 - x| < 1/2}` is removed (such
/// pieces lie in `J`), and the projection is the indicator of `Sigma1`. The
/// certificate includes the factorisation `b - p = c (b - b^2)` with
/// `c = 1/(1-x)` on `Sigma0` and `-1/x` on `Sigma1`.
pub fn projection_lift(alg: &Algebra, a: &BlockElement, ideal: &DualIdeal) -> Result<ProjectionLift, LiftError> {
    alg.check(a)?;
    require_projection_coset(alg, a, ideal)?;
    let mut b = a.hermitian_part();
    let decomposition = calculus::spectral_decomposition(alg, &b)?;
    let mut peeled = Vec::new();
    for cluster in &decomposition.clusters {
        let lambda = cluster.lambda;
        let near_threshold = |x: f64| (x - 0.5).abs() <= THRESHOLD_MARGIN;
        if near_threshold(lambda.abs()) || near_threshold((1.0 - lambda).abs()) {
            return Err(LiftError::DegenerateCluster { lambda });
        }
        if lambda.abs() >= 0.5 && (1.0 - lambda).abs() >= 0.5 {
            let piece = cluster.projection.scale_re(lambda);
            let distance = alg.distance_to_ideal(&piece, ideal);
            if distance > LIFT_TOL * lambda.abs().max(1.0) {
                return Err(LiftError::PeelNotInIdeal { lambda, distance });
            }
            b = &b - &piece;
            peeled.push(lambda);
        }
    }
    let p = calculus::real_function(alg, &b, |x| if in_sigma1(x) { 1.0 } else { 0.0 })?;
    let c = calculus::real_function(alg, &b, |x| if in_sigma1(x) { -1.0 / x } else { 1.0 / (1.0 - x) })?;

    let b_scale = alg.norm(&b).max(1.0).powi(2);
    let factorisation = alg.norm(&(&(&b - &p) - &(&c * &(&b - &(&b * &b)))));
    let report = LiftReport::new(
        "projection-lift",
        p.clone(),
        &[
            ("idempotent", alg.norm(&(&(&p * &p) - &p)), PROJECTION_TOL),
            ("self_adjoint", alg.self_adjoint_defect(&p), PROJECTION_TOL),
            ("difference_to_ideal", alg.distance_to_ideal(&(a - &p), ideal), LIFT_TOL * alg.norm(a).max(1.0)),
            ("factorisation", factorisation, LIFT_TOL * b_scale),
        ],
    );
    Ok(ProjectionLift { projection: p, representative: b, peeled, report })
}

/// Projection lift routed through Moore-Penrose inversion: the
/// representative `a~ = b chi_Sigma1(b)` of the coset is Moore-Penrose
/// invertible, its projection `r = e - a~+ a~` is computed by
/// [`moore_penrose::mp_inverse`], and `e - r` is returned.
pub fn mp_lift_via_projection(alg: &Algebra, a: &BlockElement, ideal: &DualIdeal) -> Result<LiftReport, LiftError> {
    alg.check(a)?;
    require_projection_coset(alg, a, ideal)?;
    let b = a.hermitian_part();
    let representative = calculus::real_function(alg, &b, |x| if in_sigma1(x) { x } else { 0.0 })?;
    let mp = moore_penrose::mp_inverse(alg, &representative)?;
    let lift = &BlockElement::identity() - &mp.mp_projection;
    Ok(LiftReport::new(
        "mp-lift-via-projection",
        lift.clone(),
        &[
            (
                "representative_to_ideal",
                alg.distance_to_ideal(&(a - &representative), ideal),
                LIFT_TOL * alg.norm(a).max(1.0),
            ),
            ("mp_verdicts_failed", if mp.verdicts.all() { 0.0 } else { 1.0 }, 0.0),
            ("idempotent", alg.norm(&(&(&lift * &lift) - &lift)), PROJECTION_TOL),
            ("self_adjoint", alg.self_adjoint_defect(&lift), PROJECTION_TOL),
            ("difference_to_ideal", alg.distance_to_ideal(&(a - &lift), ideal), LIFT_TOL * alg.norm(a).max(1.0)),
        ],
    ))
}

#[derive(Debug, Clone, Serialize)]
pub struct MpSum {
    /// Ideal part `k = a p`.
    pub ideal_part: BlockElement,
    /// Moore-Penrose invertible part `m = a (e - p)`.
    pub invertible_part: BlockElement,
    pub projection: BlockElement,
    pub report: LiftReport,
}

/// Split `a = k + m` with `k` in `J` and `m` Moore-Penrose invertible.
///
/// The spectral points of `a*a` seen by `A / J` are those of the
/// representations outside `J` and the scalar part. If 0 is among them, the
/// projection `pi = chi_[0, delta)(a*a)` with `delta` half the smallest
/// nonzero such point lifts the Moore-Penrose projection of the coset of
/// `a*a`; it is passed through [`projection_lift`] and `k = a p`.
pub fn mp_sum_decompose(alg: &Algebra, a: &BlockElement, ideal: &DualIdeal) -> Result<MpSum, LiftError> {
    alg.check(a)?;
    let tol = alg.tol();
    let gram = (&a.adjoint() * a).hermitian_part();
    let scale = alg.norm(&gram).max(1.0);
    let zero_width = tol.cluster_tol * scale;

    let mut points = vec![gram.gamma().re];
    for &t in gram.blocks().keys() {
        if !ideal.contains(t) {
            points.extend(herm_eig(&alg.rep(&gram, t), tol)?.eigenvalues);
        }
    }
    let has_zero = points.iter().any(|&x| x <= zero_width);
    let smallest_nonzero = points.iter().copied().filter(|&x| x > zero_width).fold(f64::INFINITY, f64::min);
    if has_zero && smallest_nonzero < tol.cluster_gap * scale {
        return Err(LiftError::NotCosetMPInvertible { point: smallest_nonzero });
    }

    let projection = if has_zero {
        let delta = 0.5 * smallest_nonzero;
        let pi = calculus::real_function(alg, &gram, |x| if x < delta { 1.0 } else { 0.0 })?;
        projection_lift(alg, &pi, ideal)?.projection
    } else {
        BlockElement::zero()
    };
    let k = a * &projection;
    let m = a * &(&BlockElement::identity() - &projection);
    let mp = moore_penrose::mp_inverse(alg, &m)?;
    let report = LiftReport::new(
        "mp-sum",
        m.clone(),
        &[
            ("ideal_part_outside_ideal", if alg.in_ideal(&k, ideal) { 0.0 } else { 1.0 }, 0.0),
            ("mp_verdicts_failed", if mp.verdicts.all() { 0.0 } else { 1.0 }, 0.0),
            ("penrose", mp.penrose_residual, mp.penrose_bound),
            ("reassembly", alg.norm(&(&(a - &k) - &m)), 1e-10),
        ],
    );
    Ok(MpSum { ideal_part: k, invertible_part: m, projection, report })
}

#[derive(Debug, Clone, Serialize)]
pub struct CompactSpectralReport {
    /// `(epsilon, number of spectral points with |lambda| >= epsilon)`.
    pub counts: Vec<(f64, usize)>,
    /// Nonzero spectral points, ascending.
    pub nonzero_points: Vec<f64>,
    /// Smallest distance between a nonzero point and any other spectral point.
    pub min_gap: Option<f64>,
    pub isolated: bool,
    /// `j - lambda e` passed every Moore-Penrose verdict, per nonzero point.
    pub shifted_mp_invertible: Vec<bool>,
}

/// Spectral counts of a self-adjoint element of `J` with the Moore-Penrose
/// invertibility of every `j - lambda e`.
pub fn compact_spectral_report(
    alg: &Algebra,
    j: &BlockElement,
    ideal: &DualIdeal,
    epsilons: &[f64],
) -> Result<CompactSpectralReport, LiftError> {
    alg.check(j)?;
    if !alg.in_ideal(j, ideal) {
        return Err(LiftError::NotInIdeal);
    }
    let spectrum = alg.spectrum(j)?;
    let tol = alg.tol();
    let scale = alg.norm(j).max(1.0);
    let zero_width = tol.cluster_tol * scale;
    let nonzero: Vec<f64> = spectrum.iter().copied().filter(|x| x.abs() > zero_width).collect();
    let counts = epsilons.iter().map(|&eps| (eps, nonzero.iter().filter(|x| x.abs() >= eps).count())).collect();
    let mut min_gap: Option<f64> = None;
    for &x in &nonzero {
        let gap = spectrum.iter().filter(|&&y| y != x).map(|y| (y - x).abs()).fold(f64::INFINITY, f64::min);
        min_gap = Some(min_gap.map_or(gap, |g| g.min(gap)));
    }
    let mut shifted_mp_invertible = Vec::with_capacity(nonzero.len());
    for &x in &nonzero {
        let shifted = j - &BlockElement::scalar(Complex64::new(x, 0.0));
        shifted_mp_invertible.push(moore_penrose::mp_inverse(alg, &shifted)?.verdicts.all());
    }
    Ok(CompactSpectralReport {
        counts,
        isolated: min_gap.is_none_or(|g| g > tol.cluster_gap * scale),
        nonzero_points: nonzero,
        min_gap,
        shifted_mp_invertible,
    })
}
