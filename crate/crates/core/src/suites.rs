//! Seeded verification suites behind `mpideals verify`.
//!
//! Every check draws trial `i` from `Rng::for_trial(seed, tag, i)`, so a
//! report depends only on the suite name, the seed, the trial count, the
//! tolerances and the block profile.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::algebra::{Algebra, BlockElement, DimensionTable};
use crate::calculus;
use crate::commutative::{self, families, DiskVerdict, GridFunction, GridIdeal, GridMpStatus, VanishingSet};
use crate::lifting::{self, generators::*};
use crate::linalg::CMatrix;
use crate::moore_penrose;
use crate::rng::Rng;
use crate::tol::Tolerances;

pub const SCHEMA_VERSION: u32 = 1;

pub const SUITE_NAMES: [&str; 8] =
    ["t31-2", "lifting", "mp-ideal", "projections", "mp-sum", "minimal-projections", "counterexamples", "all"];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SuiteError {
    #[error("unknown suite `{0}` (expected one of: {names})", names = SUITE_NAMES.join(", "))]
    UnknownSuite(String),
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
}

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub seed: u64,
    /// Trials per check; `None` uses each check's default count.
    pub trials: Option<usize>,
    pub tol: Tolerances,
    pub dims: DimensionTable,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self { seed: 0, trials: None, tol: Tolerances::default(), dims: DimensionTable::default_profile() }
    }
}

impl SuiteConfig {
    pub fn validate(&self) -> Result<(), SuiteError> {
        if self.trials == Some(0) {
            return Err(SuiteError::ConfigInvalid("trials must be at least 1".into()));
        }
        if self.dims.is_empty() {
            return Err(SuiteError::ConfigInvalid("the block profile is empty".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TrialRecord {
    pub trial: usize,
    pub pass: bool,
    pub residuals: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub name: String,
    pub passed: usize,
    pub total: usize,
    pub max_residuals: BTreeMap<String, f64>,
    pub trials: Vec<TrialRecord>,
}

impl CheckReport {
    pub fn ok(&self) -> bool {
        self.passed == self.total
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<CheckReport>,
}

impl SuiteReport {
    pub fn check(&self, name: &str) -> Option<&CheckReport> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Versioned JSON document; `timestamp` is the only nondeterministic field.
    pub fn to_json(&self, config: &SuiteConfig, timestamp: u64) -> serde_json::Value {
        serde_json::json!({
            "schema": SCHEMA_VERSION,
            "timestamp": timestamp,
            "suite": self.suite,
            "seed": self.seed,
            "trials": config.trials,
            "tolerances": config.tol,
            "blocks": config.dims.iter().collect::<Vec<_>>(),
            "passed": self.passed,
            "checks": self.checks,
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "suite {} (seed {})", self.suite, self.seed);
        for c in &self.checks {
            let status = if c.ok() { "PASS" } else { "FAIL" };
            let _ = write!(out, "  {status} {:<28} {:>5}/{:<5}", c.name, c.passed, c.total);
            for (k, v) in &c.max_residuals {
                let _ = write!(out, " {k}={v:.2e}");
            }
            out.push('\n');
            for t in c.trials.iter().filter(|t| !t.pass).take(5) {
                let _ = writeln!(
                    out,
                    "       trial {} failed{}",
                    t.trial,
                    t.note.as_deref().map(|n| format!(": {n}")).unwrap_or_default()
                );
            }
        }
        let _ = writeln!(out, "{}", if self.passed { "all checks passed" } else { "some checks FAILED" });
        out
    }
}

/// Outcome of one trial before it is numbered.
struct Outcome {
    pass: bool,
    residuals: BTreeMap<String, f64>,
    note: Option<String>,
}

impl Outcome {
    fn new<K: ToString>(pass: bool, residuals: impl IntoIterator<Item = (K, f64)>) -> Self {
        Self { pass, residuals: residuals.into_iter().map(|(k, v)| (k.to_string(), v)).collect(), note: None }
    }

    fn failed(note: impl ToString) -> Self {
        Self { pass: false, residuals: BTreeMap::new(), note: Some(note.to_string()) }
    }

    fn with_note(mut self, note: impl ToString) -> Self {
        self.note = Some(note.to_string());
        self
    }
}

type TrialFn = fn(&Algebra, &mut Rng, usize) -> Outcome;

struct Check {
    name: &'static str,
    tag: u64,
    default_trials: usize,
    run: TrialFn,
}

fn suite_checks(name: &str) -> Option<Vec<Check>> {
    let t312 = vec![
        Check { name: "mp-lift", tag: 1, default_trials: 300, run: mp_lift_trial },
        Check { name: "n-ideals-identity", tag: 2, default_trials: 200, run: n_ideals_trial },
    ];
    let lifting = vec![
        Check { name: "invertibility-lifting", tag: 3, default_trials: 500, run: invertibility_trial },
        Check { name: "norm-supremum", tag: 4, default_trials: 500, run: norm_trial },
    ];
    let mp_ideal = vec![
        Check { name: "equivalence-matrices", tag: 5, default_trials: 1000, run: matrix_equivalence_trial },
        Check { name: "equivalence-blocks", tag: 6, default_trials: 200, run: block_equivalence_trial },
        Check { name: "compact-spectral", tag: 7, default_trials: 100, run: compact_spectral_trial },
    ];
    let projections = vec![Check { name: "projection-lift", tag: 8, default_trials: 300, run: projection_trial }];
    let mp_sum = vec![Check { name: "mp-sum", tag: 9, default_trials: 300, run: mp_sum_trial }];
    let minimal = vec![Check { name: "minimal-projections", tag: 10, default_trials: 200, run: minimal_trial }];
    let counter = vec![
        Check { name: "disk-z", tag: 11, default_trials: 1, run: disk_z_trial },
        Check { name: "disk-candidates", tag: 12, default_trials: 20, run: disk_candidate_trial },
        Check { name: "interval-mp-lift", tag: 13, default_trials: 20, run: interval_lift_trial },
        Check { name: "interval-nonlift", tag: 14, default_trials: 20, run: nonlift_trial },
        Check { name: "disk-projection-lift", tag: 15, default_trials: 1, run: disk_projection_trial },
    ];
    Some(match name {
        "t31-2" => t312,
        "lifting" => lifting,
        "mp-ideal" => mp_ideal,
        "projections" => projections,
        "mp-sum" => mp_sum,
        "minimal-projections" => minimal,
        "counterexamples" => counter,
        "all" => [lifting, t312, mp_ideal, projections, mp_sum, minimal, counter].into_iter().flatten().collect(),
        _ => return None,
    })
}

pub fn run_suite(name: &str, config: &SuiteConfig) -> Result<SuiteReport, SuiteError> {
    let checks = suite_checks(name).ok_or_else(|| SuiteError::UnknownSuite(name.to_string()))?;
    config.validate()?;
    let alg = Algebra::new(config.dims.clone(), config.tol);
    let mut reports = Vec::with_capacity(checks.len());
    for check in checks {
        let n = match (config.trials, check.default_trials) {
            // single-instance demos are not repeated
            (_, 1) => 1,
            (Some(n), _) => n,
            (None, d) => d,
        };
        let mut trials = Vec::with_capacity(n);
        for i in 0..n {
            let mut rng = Rng::for_trial(config.seed, check.tag, i as u64);
            let o = (check.run)(&alg, &mut rng, i);
            trials.push(TrialRecord { trial: i, pass: o.pass, residuals: o.residuals, note: o.note });
        }
        let mut max_residuals = BTreeMap::new();
        for t in &trials {
            for (k, &v) in &t.residuals {
                let e = max_residuals.entry(k.clone()).or_insert(0.0_f64);
                *e = e.max(v);
            }
        }
        reports.push(CheckReport {
            name: check.name.to_string(),
            passed: trials.iter().filter(|t| t.pass).count(),
            total: n,
            max_residuals,
            trials,
        });
    }
    Ok(SuiteReport {
        suite: name.to_string(),
        seed: config.seed,
        passed: reports.iter().all(CheckReport::ok),
        checks: reports,
    })
}

fn mp_lift_trial(alg: &Algebra, rng: &mut Rng, _: usize) -> Outcome {
    let (a, ideal) = coset_invertible_instance(rng, alg);
    match lifting::mp_lift(alg, &a, &ideal) {
        Ok(l) => Outcome::new(l.report.success, l.report.residuals.clone()),
        Err(e) => Outcome::failed(e),
    }
}

fn n_ideals_trial(alg: &Algebra, rng: &mut Rng, _: usize) -> Outcome {
    let (a, b, c, j1, j2) = lemma_triple(rng, alg);
    match lifting::n_ideals_identity(alg, &a, &b, &c, &j1, &j2) {
        Ok(cert) => Outcome::new(
            cert.support_exact && cert.residual <= 1e-9,
            vec![
                ("distance_to_intersection", cert.residual),
                ("support_violation", if cert.support_exact { 0.0 } else { 1.0 }),
            ],
        ),
        Err(e) => Outcome::failed(e),
    }
}

fn invertibility_trial(alg: &Algebra, rng: &mut Rng, _: usize) -> Outcome {
    let a = mixed_element(rng, alg);
    let ideal = random_ideal(rng, alg.dims());
    let lhs = alg.invertible(&a).is_some();
    let rhs = alg.coset_invertible(&a, &ideal).is_some() && alg.all_reps_invertible(&a);
    Outcome::new(lhs == rhs, vec![("disagreement", if lhs == rhs { 0.0 } else { 1.0 })])
}

/// Largest singular value by power iteration on `M*M`.
fn power_norm(m: &CMatrix, rng: &mut Rng) -> f64 {
    let g = m.adjoint().matmul(m);
    let mut v: Vec<Complex64> = (0..m.cols()).map(|_| rng.complex_normal()).collect();
    let mut lambda = 0.0;
    for _ in 0..5000 {
        let w = g.mul_vec(&v);
        let n = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if n == 0.0 {
            return 0.0;
        }
        let next = n / v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v = w.into_iter().map(|z| z / n).collect();
        let done = (next - lambda).abs() <= 1e-15 * next;
        lambda = next;
        if done {
            break;
        }
    }
    lambda.sqrt()
}

fn norm_trial(alg: &Algebra, rng: &mut Rng, _: usize) -> Outcome {
    let a = random_element(rng, alg.dims());
    let oracle = a.blocks().keys().map(|&t| power_norm(&alg.rep(&a, t), rng)).fold(a.gamma().norm(), f64::max);
    let err = (alg.norm(&a) - oracle).abs() / oracle.max(1.0);
    Outcome::new(err <= 1e-8, vec![("relative_error", err)])
}

fn matrix_equivalence_trial(alg: &Algebra, rng: &mut Rng, i: usize) -> Outcome {
    let m = equivalence_matrix(rng, i % 2 == 1);
    match moore_penrose::matrix_equivalence_report(&m, alg.tol()) {
        Ok(r) => {
            let penrose = r.penrose.iter().copied().fold(0.0, f64::max);
            let pass =
                r.verdicts.agree() && r.verdicts.all() && penrose <= r.penrose_bound && r.norm_formula_residual <= 1e-6;
            Outcome::new(
                pass,
                vec![
                    ("penrose", penrose),
                    ("norm_formula", r.norm_formula_residual),
                    ("uniqueness", r.uniqueness_residual),
                ],
            )
            .with_note(format!("{}x{} rank {}", m.rows(), m.cols(), r.rank))
        }
        Err(e) => Outcome::failed(e),
    }
}

fn block_equivalence_trial(alg: &Algebra, rng: &mut Rng, _: usize) -> Outcome {
    let a = mixed_element(rng, alg);
    match moore_penrose::equivalence_report(alg, &a) {
        Ok(r) => {
            let penrose = r.penrose.iter().copied().fold(0.0, f64::max);
            let pass =
                r.verdicts.agree() && r.verdicts.all() && penrose <= r.penrose_bound && r.norm_formula_residual <= 1e-6;
            Outcome::new(
                pass,
                vec![
                    ("penrose", penrose),
                    ("norm_formula", r.norm_formula_residual),
                    ("uniqueness", r.uniqueness_residual),
                ],
            )
        }
        Err(e) => Outcome::failed(e),
    }
}

fn compact_spectral_trial(alg: &Algebra, rng: &mut Rng, _: usize) -> Outcome {
    let ideal = random_nonempty_ideal(rng, alg.dims());
    let h = random_self_adjoint(rng, alg.dims());
    let j = alg.ideal_part(&h, &ideal);
    match lifting::compact_spectral_report(alg, &j, &ideal, &[1.0, 0.1, 0.01]) {
        Ok(r) => {
            let shifted = r.shifted_mp_invertible.iter().all(|&x| x);
            Outcome::new(r.isolated && shifted, vec![("min_gap_inverse", r.min_gap.map_or(0.0, |g| 1.0 / g))])
        }
        Err(e) => Outcome::failed(e),
    }
}

fn projection_trial(alg: &Algebra, rng: &mut Rng, _: usize) -> Outcome {
    let (a, ideal) = projection_coset_instance(rng, alg);
    let lift = match lifting::projection_lift(alg, &a, &ideal) {
        Ok(l) => l,
        Err(e) => return Outcome::failed(e),
    };
    let via = match lifting::mp_lift_via_projection(alg, &a, &ideal) {
        Ok(v) => v,
        Err(e) => return Outcome::failed(e),
    };
    let agreement = alg.norm(&(&via.lift - &lift.projection));
    let mut residuals = lift.report.residuals.clone();
    residuals.insert("cross_method".into(), agreement);
    residuals.insert("peeled".into(), lift.peeled.len() as f64);
    Outcome::new(lift.report.success && via.success && agreement <= 1e-7, residuals)
}

fn mp_sum_trial(alg: &Algebra, rng: &mut Rng, _: usize) -> Outcome {
    let (a, ideal) = mp_sum_instance(rng, alg);
    match lifting::mp_sum_decompose(alg, &a, &ideal) {
        Ok(s) => Outcome::new(s.report.success, s.report.residuals.clone()),
        Err(e) => Outcome::failed(e),
    }
}

fn minimal_trial(alg: &Algebra, rng: &mut Rng, _: usize) -> Outcome {
    let ideal = random_nonempty_ideal(rng, alg.dims());
    let j = positive_ideal_element(rng, alg, &ideal);
    let terms = match calculus::minimal_projection_decompose(alg, &j, &ideal) {
        Ok(t) => t,
        Err(e) => return Outcome::failed(e),
    };
    let mut partial = BlockElement::zero();
    let mut tail_excess: f64 = 0.0;
    for (k, term) in terms.iter().enumerate() {
        partial = &partial + &term.projection.scale_re(term.lambda);
        let next = terms.get(k + 1).map_or(0.0, |t| t.lambda);
        tail_excess = tail_excess.max(alg.norm(&(&j - &partial)) - next);
    }
    let reconstruction = alg.norm(&(&j - &partial));
    let probes: Vec<BlockElement> = (0..50).map(|_| random_element(rng, alg.dims())).collect();
    let mut rank_one = true;
    for term in &terms {
        match calculus::is_rank_one(alg, &term.projection, &probes) {
            Ok(r) => rank_one &= r.rank_one,
            Err(e) => return Outcome::failed(e),
        }
    }
    Outcome::new(
        reconstruction <= 1e-8 && tail_excess <= 1e-8 && rank_one,
        vec![
            ("reconstruction", reconstruction),
            ("partial_sum_excess", tail_excess.max(0.0)),
            ("terms", terms.len() as f64),
        ],
    )
}

fn boundary_ideal() -> GridIdeal {
    GridIdeal::new(VanishingSet::Boundary)
}

fn disk_z_trial(alg: &Algebra, _: &mut Rng, _: usize) -> Outcome {
    let z = GridFunction::sample(families::disk(), commutative::DEFAULT_LIPSCHITZ, |z| z).expect("z is 1-Lipschitz");
    match commutative::disk_obstruction_check(&z, &boundary_ideal(), alg.tol()) {
        Ok(r) => {
            let windings: Vec<i64> = r.profile.iter().filter_map(|s| s.winding).collect();
            let pass = r.verdict == DiskVerdict::Obstructed && windings.contains(&0) && windings.contains(&1);
            Outcome::new(pass, vec![("boundary_residual", r.boundary_residual)]).with_note(format!(
                "verdict {:?}, windings {:?}",
                r.verdict,
                dedup(&windings)
            ))
        }
        Err(e) => Outcome::failed(e),
    }
}

fn dedup(w: &[i64]) -> Vec<i64> {
    let mut v = w.to_vec();
    v.dedup();
    v
}

fn disk_candidate_trial(alg: &Algebra, rng: &mut Rng, _: usize) -> Outcome {
    let g = families::disk_candidate(rng);
    match commutative::disk_obstruction_check(&g, &boundary_ideal(), alg.tol()) {
        Ok(r) => Outcome::new(r.verdict == DiskVerdict::Obstructed, vec![("boundary_residual", r.boundary_residual)]),
        Err(e) => Outcome::failed(e),
    }
}

fn interval_lift_trial(alg: &Algebra, rng: &mut Rng, _: usize) -> Outcome {
    let f = families::nonvanishing_on_unit(rng);
    let ideal = GridIdeal::new(VanishingSet::SubInterval { lo: 0.0, hi: 1.0 });
    match commutative::mp_lift_interval(&f, &ideal, alg.tol()) {
        Ok(l) => Outcome::new(
            l.residual <= alg.tol().lift_tol && l.status == GridMpStatus::Invertible,
            vec![("residual", l.residual), ("min_modulus_inverse", 1.0 / l.lift.min_modulus())],
        ),
        Err(e) => Outcome::failed(e),
    }
}

fn nonlift_trial(alg: &Algebra, rng: &mut Rng, _: usize) -> Outcome {
    let a = GridFunction::sample(families::interval_0_1(), commutative::DEFAULT_LIPSCHITZ, |z| z)
        .expect("x is 1-Lipschitz");
    let g = families::interval_candidate(rng);
    match commutative::projection_nonlift_witness(&a, Some(&g), alg.tol()) {
        Ok(w) => Outcome::new(w.defect >= 0.125, vec![("defect", w.defect)]).with_note(format!("x = {:.4}", w.x)),
        Err(e) => Outcome::failed(e),
    }
}

fn disk_projection_trial(alg: &Algebra, _: &mut Rng, _: usize) -> Outcome {
    let bump = GridFunction::sample(families::disk(), commutative::DEFAULT_LIPSCHITZ, |z| {
        Complex64::new(0.6 * (1.0 - z.norm_sqr()), 0.0)
    })
    .expect("bump is Lipschitz");
    match commutative::grid_projection_lift(&bump, &boundary_ideal(), alg.tol()) {
        Ok(l) => Outcome::new(l.constant == 0.0 && l.residual <= alg.tol().lift_tol, vec![("residual", l.residual)]),
        Err(e) => Outcome::failed(e),
    }
}
