//! Sampled model of commutative C*-algebras `C(X)` for `X` an interval, the
//! unit circle, or the closed unit disk.
//!
//! A [`GridFunction`] stores samples in a fixed traversal order and must
//! satisfy a discrete continuity contract: neighbouring samples differ by at
//! most `10 * (diameter / n) * L`, with `L` the declared Lipschitz constant
//! (default 4) and `n` the resolution of the grid. For the disk, `n` is the
//! coarser of the radial and angular resolutions and the diameter is 2.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::moore_penrose::MpError;
use crate::tol::Tolerances;

pub const MIN_SAMPLES: usize = 16;
pub const DEFAULT_LIPSCHITZ: f64 = 4.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("expected {expected} samples, got {got}")]
    SampleCount { expected: usize, got: usize },
    #[error("domain needs at least {MIN_SAMPLES} samples per direction")]
    TooFewSamples,
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("sample values must be finite")]
    NonFinite,
    #[error("jump {jump:.3e} between samples {from} and {to} exceeds the continuity bound {bound:.3e}")]
    Discontinuous { from: usize, to: usize, jump: f64, bound: f64 },
    #[error("operation needs a function on {0}")]
    WrongDomain(&'static str),
    #[error("function vanishes at sample {index}")]
    VanishingValue { index: usize },
    #[error("argument jump at sample {index} is too large for the grid resolution")]
    InsufficientResolution { index: usize },
    #[error("the coset is not Moore-Penrose invertible: {0}")]
    NotCosetMPInvertible(String),
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("boundary values are near both 0 and 1")]
    MixedBoundary,
    #[error("invalid vanishing set: {0}")]
    InvalidIdeal(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    Interval {
        left: f64,
        right: f64,
        n_samples: usize,
    },
    Circle {
        n_samples: usize,
    },
    /// Radii `i / (n_radii - 1)`; the centre is a single sample, every other
    /// circle has `n_angles` samples at angles `2 pi k / n_angles`.
    Disk {
        n_radii: usize,
        n_angles: usize,
    },
}

impl Domain {
    pub fn validate(&self) -> Result<(), GridError> {
        match *self {
            Domain::Interval { left, right, n_samples } => {
                if !(left.is_finite() && right.is_finite() && left < right) {
                    return Err(GridError::InvalidDomain(format!("interval [{left}, {right}]")));
                }
                if n_samples < MIN_SAMPLES {
                    return Err(GridError::TooFewSamples);
                }
            }
            Domain::Circle { n_samples } if n_samples < MIN_SAMPLES => return Err(GridError::TooFewSamples),
            Domain::Disk { n_radii, n_angles } if n_radii < 2 || n_angles < MIN_SAMPLES => {
                return Err(GridError::TooFewSamples)
            }
            _ => {}
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        match *self {
            Domain::Interval { n_samples, .. } | Domain::Circle { n_samples } => n_samples,
            Domain::Disk { n_radii, n_angles } => 1 + (n_radii - 1) * n_angles,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Sample points as complex numbers: `x` on the real axis for an
    /// interval, `e^{i theta}` for the circle, `r e^{i theta}` for the disk.
    pub fn points(&self) -> Vec<Complex64> {
        match *self {
            Domain::Interval { left, right, n_samples } => {
                let h = (right - left) / (n_samples - 1) as f64;
                (0..n_samples).map(|i| Complex64::new(left + i as f64 * h, 0.0)).collect()
            }
            Domain::Circle { n_samples } => {
                (0..n_samples).map(|k| Complex64::from_polar(1.0, TAU * k as f64 / n_samples as f64)).collect()
            }
            Domain::Disk { n_radii, n_angles } => {
                let mut pts = vec![Complex64::new(0.0, 0.0)];
                for i in 1..n_radii {
                    let r = i as f64 / (n_radii - 1) as f64;
                    pts.extend((0..n_angles).map(|k| Complex64::from_polar(r, TAU * k as f64 / n_angles as f64)));
                }
                pts
            }
        }
    }

    fn continuity_bound(&self, lipschitz: f64) -> f64 {
        let (diameter, n) = match *self {
            Domain::Interval { left, right, n_samples } => (right - left, n_samples),
            Domain::Circle { n_samples } => (2.0, n_samples),
            Domain::Disk { n_radii, n_angles } => (2.0, (n_radii - 1).min(n_angles)),
        };
        10.0 * diameter / n as f64 * lipschitz
    }

    /// Pairs of neighbouring sample indices.
    fn edges(&self) -> Vec<(usize, usize)> {
        match *self {
            Domain::Interval { n_samples, .. } => (1..n_samples).map(|i| (i - 1, i)).collect(),
            Domain::Circle { n_samples } => (0..n_samples).map(|i| (i, (i + 1) % n_samples)).collect(),
            Domain::Disk { n_radii, n_angles } => {
                let ring = |i: usize, k: usize| 1 + (i - 1) * n_angles + k % n_angles;
                let mut e: Vec<(usize, usize)> = (0..n_angles).map(|k| (0, ring(1, k))).collect();
                for i in 1..n_radii {
                    for k in 0..n_angles {
                        e.push((ring(i, k), ring(i, k + 1)));
                        if i + 1 < n_radii {
                            e.push((ring(i, k), ring(i + 1, k)));
                        }
                    }
                }
                e
            }
        }
    }

    /// Sample indices of the circle of radius `i / (n_radii - 1)` (the
    /// centre for `i = 0`).
    pub fn ring(&self, i: usize) -> Option<std::ops::Range<usize>> {
        match *self {
            Domain::Disk { n_radii, n_angles } if i < n_radii => {
                Some(if i == 0 { 0..1 } else { 1 + (i - 1) * n_angles..1 + i * n_angles })
            }
            _ => None,
        }
    }
}

/// A sampled continuous function.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    domain: Domain,
    values: Vec<Complex64>,
    lipschitz: f64,
}

impl GridFunction {
    /// Validate sample count, finiteness, and the continuity contract.
    pub fn new(domain: Domain, values: Vec<Complex64>, lipschitz: f64) -> Result<Self, GridError> {
        domain.validate()?;
        if values.len() != domain.len() {
            return Err(GridError::SampleCount { expected: domain.len(), got: values.len() });
        }
        if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) || !(lipschitz > 0.0 && lipschitz.is_finite())
        {
            return Err(GridError::NonFinite);
        }
        let bound = domain.continuity_bound(lipschitz);
        for (from, to) in domain.edges() {
            let jump = (values[from] - values[to]).norm();
            if jump > bound {
                return Err(GridError::Discontinuous { from, to, jump, bound });
            }
        }
        Ok(Self { domain, values, lipschitz })
    }

    pub fn sample(domain: Domain, lipschitz: f64, f: impl Fn(Complex64) -> Complex64) -> Result<Self, GridError> {
        domain.validate()?;
        let values = domain.points().into_iter().map(f).collect();
        Self::new(domain, values, lipschitz)
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn min_modulus(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min)
    }

    pub fn max_modulus(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

#[derive(Serialize, Deserialize)]
struct GridRepr {
    domain: Domain,
    values: Vec<[f64; 2]>,
    #[serde(default = "default_lipschitz")]
    lipschitz: f64,
}

fn default_lipschitz() -> f64 {
    DEFAULT_LIPSCHITZ
}

impl Serialize for GridFunction {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        GridRepr {
            domain: self.domain,
            values: self.values.iter().map(|z| [z.re, z.im]).collect(),
            lipschitz: self.lipschitz,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for GridFunction {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let r = GridRepr::deserialize(deserializer)?;
        let values = r.values.into_iter().map(|[re, im]| Complex64::new(re, im)).collect();
        GridFunction::new(r.domain, values, r.lipschitz).map_err(serde::de::Error::custom)
    }
}

/// Closed set on which the functions of the ideal vanish.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VanishingSet {
    SubInterval {
        lo: f64,
        hi: f64,
    },
    /// The unit circle bounding the disk.
    Boundary,
    /// Both endpoints of an interval.
    Endpoints,
}

/// `J = { f : f = 0 on the vanishing set }`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridIdeal {
    pub vanishing: VanishingSet,
}

impl GridIdeal {
    pub fn new(vanishing: VanishingSet) -> Self {
        Self { vanishing }
    }

    /// Membership mask over the samples of `domain`; the set must be
    /// nonempty and proper.
    pub fn mask(&self, domain: &Domain) -> Result<Vec<bool>, GridError> {
        let mask: Vec<bool> = match (self.vanishing, *domain) {
            (VanishingSet::SubInterval { lo, hi }, Domain::Interval { left, right, .. }) => {
                let eps = 1e-12 * (right - left);
                domain.points().iter().map(|z| z.re >= lo - eps && z.re <= hi + eps).collect()
            }
            (VanishingSet::Endpoints, Domain::Interval { n_samples, .. }) => {
                (0..n_samples).map(|i| i == 0 || i + 1 == n_samples).collect()
            }
            (VanishingSet::Boundary, Domain::Disk { n_radii, .. }) => {
                let ring = domain.ring(n_radii - 1).unwrap();
                (0..domain.len()).map(|i| ring.contains(&i)).collect()
            }
            (v, d) => return Err(GridError::InvalidIdeal(format!("{v:?} does not apply to {d:?}"))),
        };
        if !mask.iter().any(|&m| m) || mask.iter().all(|&m| m) {
            return Err(GridError::InvalidIdeal("vanishing set must be nonempty and proper".into()));
        }
        Ok(mask)
    }

    /// Largest modulus of `f` on the vanishing set, i.e. the quotient norm.
    pub fn quotient_norm(&self, f: &GridFunction) -> Result<f64, GridError> {
        let mask = self.mask(f.domain())?;
        Ok(f.values().iter().zip(mask).filter(|(_, m)| *m).map(|(z, _)| z.norm()).fold(0.0, f64::max))
    }
}

/// Winding number of a closed sampled curve around 0 from principal
/// argument increments. Every increment must stay below `pi / 2`.
pub fn winding_of_samples(values: &[Complex64], wind_tol: f64) -> Result<i64, GridError> {
    if let Some(index) = values.iter().position(|z| z.norm() <= wind_tol) {
        return Err(GridError::VanishingValue { index });
    }
    let n = values.len();
    let mut total = 0.0;
    for k in 0..n {
        let step = (values[(k + 1) % n] / values[k]).arg();
        if step.abs() >= PI / 2.0 {
            return Err(GridError::InsufficientResolution { index: k });
        }
        total += step;
    }
    Ok((total / TAU).round() as i64)
}

pub fn winding_number(f: &GridFunction, tol: &Tolerances) -> Result<i64, GridError> {
    match f.domain() {
        Domain::Circle { .. } => winding_of_samples(f.values(), tol.wind_tol),
        _ => Err(GridError::WrongDomain("the circle")),
    }
}

/// Moore-Penrose status of a function on a connected domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GridMpStatus {
    Invertible,
    Zero,
    NotMpInvertible,
}

/// On a connected space, `f` is Moore-Penrose invertible iff `f` is
/// invertible or `f = 0`: otherwise `|f|^2` takes every value between 0 and
/// its maximum, so 0 is not isolated.
pub fn grid_mp_status(values: &[Complex64], tol: f64) -> GridMpStatus {
    if values.iter().all(|z| z.norm() <= tol) {
        GridMpStatus::Zero
    } else if values.iter().all(|z| z.norm() > tol) {
        GridMpStatus::Invertible
    } else {
        GridMpStatus::NotMpInvertible
    }
}

/// Pointwise Moore-Penrose inverse (`1/f` or `0`).
pub fn grid_mp_inverse(f: &GridFunction, tol: &Tolerances) -> Result<GridFunction, MpError> {
    let values: Vec<Complex64> = match grid_mp_status(f.values(), tol.lift_tol) {
        GridMpStatus::Zero => vec![Complex64::new(0.0, 0.0); f.values().len()],
        GridMpStatus::Invertible => f.values().iter().map(|z| z.inv()).collect(),
        GridMpStatus::NotMpInvertible => {
            let gap = f
                .values()
                .iter()
                .map(|z| z.norm_sqr())
                .filter(|&x| x > tol.lift_tol * tol.lift_tol)
                .fold(f64::INFINITY, f64::min);
            return Err(MpError::NotMPInvertible { gap: gap.min(tol.lift_tol * tol.lift_tol) });
        }
    };
    let lipschitz =
        values.iter().zip(f.values()).fold(f.lipschitz(), |l, (inv, _)| l.max(f.lipschitz() * inv.norm_sqr()));
    Ok(GridFunction::new(*f.domain(), values, lipschitz).expect("inverse of a continuous nonvanishing function"))
}

#[derive(Debug, Clone, Serialize)]
pub struct IntervalLift {
    pub lift: GridFunction,
    /// `max |g - f|` on the vanishing set.
    pub residual: f64,
    pub status: GridMpStatus,
}

/// Moore-Penrose invertible lift of `f + J` for `J` the functions vanishing
/// on a subinterval `S`: the zero function if `f = 0` on `S`, otherwise `f`
/// on `S` continued by its boundary values of `S` outside.
pub fn mp_lift_interval(f: &GridFunction, ideal: &GridIdeal, tol: &Tolerances) -> Result<IntervalLift, GridError> {
    if !matches!(f.domain(), Domain::Interval { .. }) || !matches!(ideal.vanishing, VanishingSet::SubInterval { .. }) {
        return Err(GridError::WrongDomain("an interval with a subinterval ideal"));
    }
    let mask = ideal.mask(f.domain())?;
    let on_set: Vec<usize> = (0..mask.len()).filter(|&i| mask[i]).collect();
    let sup = on_set.iter().map(|&i| f.values()[i].norm()).fold(0.0, f64::max);
    let inf = on_set.iter().map(|&i| f.values()[i].norm()).fold(f64::INFINITY, f64::min);
    let values = if sup <= tol.lift_tol {
        vec![Complex64::new(0.0, 0.0); f.values().len()]
    } else if inf > tol.lift_tol {
        let (first, last) = (on_set[0], *on_set.last().unwrap());
        (0..f.values().len()).map(|i| f.values()[i.clamp(first, last)]).collect()
    } else {
        return Err(GridError::NotCosetMPInvertible(format!(
            "f vanishes somewhere on the set (min {inf:.3e}) without vanishing identically (max {sup:.3e})"
        )));
    };
    let lift = GridFunction::new(*f.domain(), values, f.lipschitz())?;
    let residual = on_set.iter().map(|&i| (lift.values()[i] - f.values()[i]).norm()).fold(0.0, f64::max);
    let status = grid_mp_status(lift.values(), tol.lift_tol);
    Ok(IntervalLift { lift, residual, status })
}

#[derive(Debug, Clone, Serialize)]
pub struct NonLiftWitness {
    pub index: usize,
    pub x: f64,
    pub value: f64,
    /// `|g(x)^2 - g(x)|` at the witness.
    pub defect: f64,
    /// Moore-Penrose status of the candidate.
    pub status: GridMpStatus,
}

/// For `a` with `a(0) = 0`, `a(1) = 1` and a real candidate lift `g` (`a`
/// itself by default), find a sample where `|g^2 - g| >= 1/8`; such a sample
/// exists because `g` passes through `[1/4, 3/4]`.
pub fn projection_nonlift_witness(
    a: &GridFunction,
    candidate: Option<&GridFunction>,
    tol: &Tolerances,
) -> Result<NonLiftWitness, GridError> {
    if !matches!(a.domain(), Domain::Interval { .. }) {
        return Err(GridError::WrongDomain("an interval"));
    }
    let av = a.values();
    let n = av.len();
    let lt = tol.lift_tol;
    if av[0].norm() > lt || (av[n - 1] - 1.0).norm() > lt {
        return Err(GridError::PreconditionFailed("a must be 0 at the left and 1 at the right endpoint".into()));
    }
    if av.iter().any(|z| z.im.abs() > lt) {
        return Err(GridError::PreconditionFailed("a must be real-valued".into()));
    }
    let g = candidate.unwrap_or(a);
    if g.domain() != a.domain() {
        return Err(GridError::PreconditionFailed("candidate lives on a different grid".into()));
    }
    let gv = g.values();
    if gv.iter().any(|z| z.im.abs() > lt) {
        return Err(GridError::PreconditionFailed("candidate must be real-valued".into()));
    }
    if (gv[0] - av[0]).norm() > lt || (gv[n - 1] - av[n - 1]).norm() > lt {
        return Err(GridError::PreconditionFailed("candidate differs from a at an endpoint".into()));
    }
    let defect = |z: Complex64| (z * z - z).norm();
    let index = (0..n).max_by(|&i, &j| defect(gv[i]).total_cmp(&defect(gv[j]))).unwrap();
    if defect(gv[index]) < 0.125 {
        return Err(GridError::InsufficientResolution { index });
    }
    Ok(NonLiftWitness {
        index,
        x: a.domain().points()[index].re,
        value: gv[index].re,
        defect: defect(gv[index]),
        status: grid_mp_status(gv, lt),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct WindingSample {
    pub radius: f64,
    /// `None` when the restriction to the circle vanishes somewhere.
    pub winding: Option<i64>,
    pub vanishes: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DiskVerdict {
    Obstructed,
    Consistent,
}

#[derive(Debug, Clone, Serialize)]
pub struct DiskReport {
    pub verdict: DiskVerdict,
    pub profile: Vec<WindingSample>,
    /// `max |candidate - z|` on the boundary.
    pub boundary_residual: f64,
}

/// Winding profile `r -> w(r)` of a candidate lift of the coset of `z` modulo
/// the functions vanishing on the boundary circle.
///
/// The centre is the degenerate constant loop, whose winding number is 0
/// (it has no argument increments); it is flagged as vanishing when the
/// candidate is 0 there. The verdict is "obstructed" when some circle
/// carries a zero or the profile is not constant: an invertible lift would
/// have a constant profile, equal to 0 at the centre and 1 on the boundary.
pub fn disk_obstruction_check(
    candidate: &GridFunction,
    ideal: &GridIdeal,
    tol: &Tolerances,
) -> Result<DiskReport, GridError> {
    let Domain::Disk { n_radii, .. } = *candidate.domain() else {
        return Err(GridError::WrongDomain("the disk"));
    };
    if ideal.vanishing != VanishingSet::Boundary {
        return Err(GridError::PreconditionFailed("the ideal must vanish on the boundary circle".into()));
    }
    let pts = candidate.domain().points();
    let mask = ideal.mask(candidate.domain())?;
    let boundary_residual =
        (0..pts.len()).filter(|&i| mask[i]).map(|i| (candidate.values()[i] - pts[i]).norm()).fold(0.0, f64::max);
    if boundary_residual > tol.lift_tol {
        return Err(GridError::PreconditionFailed(format!(
            "candidate differs from z on the boundary by {boundary_residual:.3e}"
        )));
    }
    let mut profile = Vec::with_capacity(n_radii);
    for i in 0..n_radii {
        let ring = candidate.domain().ring(i).unwrap();
        let values = &candidate.values()[ring.clone()];
        let radius = i as f64 / (n_radii - 1) as f64;
        let sample = if i == 0 {
            WindingSample { radius, winding: Some(0), vanishes: values[0].norm() <= tol.wind_tol }
        } else {
            match winding_of_samples(values, tol.wind_tol) {
                Ok(w) => WindingSample { radius, winding: Some(w), vanishes: false },
                Err(GridError::VanishingValue { .. }) => WindingSample { radius, winding: None, vanishes: true },
                Err(GridError::InsufficientResolution { index }) => {
                    return Err(GridError::InsufficientResolution { index: ring.start + index })
                }
                Err(e) => return Err(e),
            }
        };
        profile.push(sample);
    }
    let mut windings = profile.iter().filter_map(|s| s.winding);
    let first = windings.next();
    let constant = windings.all(|w| Some(w) == first);
    let vanishes = profile.iter().any(|s| s.vanishes);
    let verdict = if vanishes || !constant { DiskVerdict::Obstructed } else { DiskVerdict::Consistent };
    Ok(DiskReport { verdict, profile, boundary_residual })
}

#[derive(Debug, Clone, Serialize)]
pub struct GridProjectionLift {
    pub lift: GridFunction,
    pub constant: f64,
    /// `max |kappa - p|` on the boundary.
    pub residual: f64,
}

/// Lift a projection of `C(D) / J` (boundary ideal) to a constant projection:
/// the boundary is connected, so its values all sit near the same `kappa`.
pub fn grid_projection_lift(
    p: &GridFunction,
    ideal: &GridIdeal,
    tol: &Tolerances,
) -> Result<GridProjectionLift, GridError> {
    if !matches!(p.domain(), Domain::Disk { .. }) || ideal.vanishing != VanishingSet::Boundary {
        return Err(GridError::WrongDomain("the disk with the boundary ideal"));
    }
    let mask = ideal.mask(p.domain())?;
    let boundary: Vec<Complex64> = p.values().iter().zip(&mask).filter(|(_, &m)| m).map(|(z, _)| *z).collect();
    let near_zero = boundary.iter().any(|z| z.norm() < 0.5);
    let near_one = boundary.iter().any(|z| (z - 1.0).norm() < 0.5);
    if near_zero && near_one {
        return Err(GridError::MixedBoundary);
    }
    let defect = boundary.iter().map(|z| (z - z * z).norm().max(2.0 * z.im.abs())).fold(0.0, f64::max);
    if defect > tol.lift_tol {
        return Err(GridError::PreconditionFailed(format!(
            "p is not a projection on the boundary (defect {defect:.3e})"
        )));
    }
    let constant = if near_one { 1.0 } else { 0.0 };
    let kappa = Complex64::new(constant, 0.0);
    let residual = boundary.iter().map(|z| (z - kappa).norm()).fold(0.0, f64::max);
    let lift = GridFunction::new(*p.domain(), vec![kappa; p.values().len()], p.lipschitz())?;
    Ok(GridProjectionLift { lift, constant, residual })
}

pub mod families;

#[cfg(test)]
mod tests;
