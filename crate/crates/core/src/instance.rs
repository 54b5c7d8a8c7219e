//! Single-instance queries behind `mpideals query <op> <file>`.
//!
//! Block operations read
//!
//! ```json
//! {"dims": {"0": 1, "1": 2}, "a": <BlockElement>, "ideal": {"support": [1]},
//!  "b": <BlockElement>, "c": <BlockElement>, "ideal2": <DualIdeal>, "epsilons": [0.1]}
//! ```
//!
//! where only `a` is required (`dims` defaults to the configured profile,
//! `ideal` to the zero ideal). Grid operations read a bare `GridFunction` or
//! `{"function": <GridFunction>, "ideal": <GridIdeal>, "candidate": <GridFunction>}`.

use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::algebra::{Algebra, BlockElement, DimensionTable, DualIdeal};
use crate::calculus;
use crate::commutative::{self, Domain, GridFunction, GridIdeal, VanishingSet};
use crate::lifting;
use crate::moore_penrose;
use crate::tol::Tolerances;

pub const BLOCK_OPS: [&str; 14] = [
    "norm",
    "spectrum",
    "spectral-decomposition",
    "invertible",
    "coset-invertible",
    "mp-inverse",
    "equivalence",
    "mp-lift",
    "projection-lift",
    "mp-lift-via-projection",
    "mp-sum",
    "minimal-projections",
    "n-ideals",
    "compact-spectral",
];

pub const GRID_OPS: [&str; 6] =
    ["winding", "grid-mp-inverse", "interval-mp-lift", "nonlift-witness", "disk-obstruction", "grid-projection-lift"];

#[derive(Debug, Error)]
pub enum QueryError {
    #[error("unknown operation `{0}`")]
    UnknownOp(String),
    #[error("parse error: {0}")]
    Parse(String),
    /// The input is well-formed but the operation's hypotheses fail.
    #[error("{0}")]
    Math(String),
}

impl QueryError {
    /// Process exit status: 1 for mathematical failures, 2 for bad input.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Math(_) => 1,
            Self::UnknownOp(_) | Self::Parse(_) => 2,
        }
    }
}

fn math(e: impl ToString) -> QueryError {
    QueryError::Math(e.to_string())
}

#[derive(Debug, Clone)]
pub struct QueryOutcome {
    pub op: String,
    /// Every certificate of the operation passed.
    pub success: bool,
    pub report: Value,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BlockInstance {
    #[serde(default)]
    dims: Option<std::collections::BTreeMap<usize, usize>>,
    a: BlockElement,
    #[serde(default)]
    ideal: Option<DualIdeal>,
    #[serde(default)]
    b: Option<BlockElement>,
    #[serde(default)]
    c: Option<BlockElement>,
    #[serde(default)]
    ideal2: Option<DualIdeal>,
    #[serde(default)]
    epsilons: Option<Vec<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GridInstance {
    function: GridFunction,
    #[serde(default)]
    ideal: Option<GridIdeal>,
    #[serde(default)]
    candidate: Option<GridFunction>,
}

/// Deserialize with the JSON path and position of the first error.
fn parse<T: DeserializeOwned>(text: &str) -> Result<T, QueryError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let value: T = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        if path == "." || path.is_empty() {
            QueryError::Parse(inner.to_string())
        } else {
            QueryError::Parse(format!("at `{path}`: {inner}"))
        }
    })?;
    de.end().map_err(|e| QueryError::Parse(e.to_string()))?;
    Ok(value)
}

pub fn run_query(op: &str, text: &str, tol: &Tolerances, dims: &DimensionTable) -> Result<QueryOutcome, QueryError> {
    if BLOCK_OPS.contains(&op) {
        let inst: BlockInstance = parse(text)?;
        let dims = match inst.dims.clone() {
            Some(d) => DimensionTable::new(d)
                .ok_or_else(|| QueryError::Parse("at `dims`: block sizes must be at least 1".into()))?,
            None => dims.clone(),
        };
        let alg = Algebra::new(dims, *tol);
        for (name, x) in [("a", Some(&inst.a)), ("b", inst.b.as_ref()), ("c", inst.c.as_ref())] {
            if let Some(x) = x {
                alg.check(x).map_err(|e| QueryError::Parse(format!("at `{name}`: {e}")))?;
            }
        }
        for (name, j) in [("ideal", inst.ideal.as_ref()), ("ideal2", inst.ideal2.as_ref())] {
            if let Some(j) = j {
                if !j.is_valid_for(alg.dims()) {
                    return Err(QueryError::Parse(format!("at `{name}`: index not in the block profile")));
                }
            }
        }
        block_query(op, &alg, &inst)
    } else if GRID_OPS.contains(&op) {
        let probe: Value = serde_json::from_str(text).map_err(|e| QueryError::Parse(e.to_string()))?;
        let inst = if probe.get("domain").is_some() {
            GridInstance { function: parse(text)?, ideal: None, candidate: None }
        } else {
            parse(text)?
        };
        grid_query(op, tol, &inst)
    } else {
        Err(QueryError::UnknownOp(op.to_string()))
    }
}

fn outcome(op: &str, success: bool, report: Value) -> Result<QueryOutcome, QueryError> {
    Ok(QueryOutcome { op: op.to_string(), success, report })
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("reports serialize")
}

fn block_query(op: &str, alg: &Algebra, inst: &BlockInstance) -> Result<QueryOutcome, QueryError> {
    let a = &inst.a;
    let ideal = inst.ideal.clone().unwrap_or_else(DualIdeal::zero);
    let need = |x: &Option<BlockElement>, name: &str| {
        x.clone().ok_or_else(|| QueryError::Parse(format!("operation `{op}` needs field `{name}`")))
    };
    match op {
        "norm" => outcome(op, true, json!({ "norm": alg.norm(a) })),
        "spectrum" => outcome(op, true, json!({ "spectrum": alg.spectrum(a).map_err(math)? })),
        "spectral-decomposition" => {
            let d = calculus::spectral_decomposition(alg, a).map_err(math)?;
            outcome(op, true, to_value(&d))
        }
        "invertible" => match alg.invertible(a) {
            Some(inv) => outcome(op, true, json!({ "invertible": true, "inverse": inv })),
            None => Err(math("element is not invertible")),
        },
        "coset-invertible" => match alg.coset_invertible(a, &ideal) {
            Some(w) => outcome(op, true, json!({ "coset_invertible": true, "witness": to_value(&w) })),
            None => Err(math("the coset a + J is not invertible")),
        },
        "mp-inverse" => {
            let r = moore_penrose::mp_inverse(alg, a).map_err(math)?;
            outcome(op, r.verdicts.all(), to_value(&r))
        }
        "equivalence" => {
            let r = moore_penrose::equivalence_report(alg, a).map_err(math)?;
            outcome(op, r.verdicts.agree(), to_value(&r))
        }
        "mp-lift" => {
            let r = lifting::mp_lift(alg, a, &ideal).map_err(math)?;
            outcome(op, r.report.success, to_value(&r))
        }
        "projection-lift" => {
            let r = lifting::projection_lift(alg, a, &ideal).map_err(math)?;
            outcome(op, r.report.success, to_value(&r))
        }
        "mp-lift-via-projection" => {
            let r = lifting::mp_lift_via_projection(alg, a, &ideal).map_err(math)?;
            outcome(op, r.success, to_value(&r))
        }
        "mp-sum" => {
            let r = lifting::mp_sum_decompose(alg, a, &ideal).map_err(math)?;
            outcome(op, r.report.success, to_value(&r))
        }
        "minimal-projections" => {
            let terms = calculus::minimal_projection_decompose(alg, a, &ideal).map_err(math)?;
            let partial = terms.iter().fold(BlockElement::zero(), |s, t| &s + &t.projection.scale_re(t.lambda));
            let residual = alg.norm(&(a - &partial));
            outcome(op, residual <= 1e-8, json!({ "terms": terms, "reconstruction_residual": residual }))
        }
        "n-ideals" => {
            let b = need(&inst.b, "b")?;
            let c = need(&inst.c, "c")?;
            let j2 = inst.ideal2.clone().unwrap_or_else(|| ideal.clone());
            let cert = lifting::n_ideals_identity(alg, a, &b, &c, &ideal, &j2).map_err(math)?;
            outcome(op, cert.support_exact, to_value(&cert))
        }
        "compact-spectral" => {
            let eps = inst.epsilons.clone().unwrap_or_else(|| vec![1.0, 0.1, 0.01]);
            let r = lifting::compact_spectral_report(alg, a, &ideal, &eps).map_err(math)?;
            outcome(op, r.isolated, to_value(&r))
        }
        _ => Err(QueryError::UnknownOp(op.to_string())),
    }
}

fn default_grid_ideal(domain: &Domain) -> GridIdeal {
    GridIdeal::new(match *domain {
        Domain::Disk { .. } => VanishingSet::Boundary,
        Domain::Interval { left, right, .. } if left < 1.0 && right > 1.0 => {
            VanishingSet::SubInterval { lo: left, hi: 1.0 }
        }
        _ => VanishingSet::Endpoints,
    })
}

fn grid_query(op: &str, tol: &Tolerances, inst: &GridInstance) -> Result<QueryOutcome, QueryError> {
    let f = &inst.function;
    let ideal = inst.ideal.unwrap_or_else(|| default_grid_ideal(f.domain()));
    match op {
        "winding" => outcome(op, true, json!({ "winding": commutative::winding_number(f, tol).map_err(math)? })),
        "grid-mp-inverse" => {
            let inv = commutative::grid_mp_inverse(f, tol).map_err(math)?;
            outcome(
                op,
                true,
                json!({ "status": commutative::grid_mp_status(f.values(), tol.lift_tol), "inverse": inv }),
            )
        }
        "interval-mp-lift" => {
            let r = commutative::mp_lift_interval(f, &ideal, tol).map_err(math)?;
            outcome(op, r.residual <= tol.lift_tol, to_value(&r))
        }
        "nonlift-witness" => {
            let w = commutative::projection_nonlift_witness(f, inst.candidate.as_ref(), tol).map_err(math)?;
            outcome(op, true, to_value(&w))
        }
        "disk-obstruction" => {
            let r = commutative::disk_obstruction_check(f, &ideal, tol).map_err(math)?;
            outcome(op, r.verdict == commutative::DiskVerdict::Obstructed, to_value(&r))
        }
        "grid-projection-lift" => {
            let r = commutative::grid_projection_lift(f, &ideal, tol).map_err(math)?;
            outcome(op, r.residual <= tol.lift_tol, to_value(&r))
        }
        _ => Err(QueryError::UnknownOp(op.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(op: &str, text: &str) -> Result<QueryOutcome, QueryError> {
        run_query(op, text, &Tolerances::default(), &DimensionTable::default_profile())
    }

    #[test]
    fn mp_inverse_of_diag() {
        let text = r#"{"a": {"gamma": [0, 0], "blocks": {"1": {"rows": 2, "cols": 2, "data": [[2, 0], [0, 0], [0, 0], [0, 0]]}}}}"#;
        let r = run("mp-inverse", text).unwrap();
        assert!(r.success);
        let data = &r.report["pseudoinverse"]["blocks"]["1"]["data"];
        assert_eq!(data[0][0].as_f64(), Some(0.5));
        assert_eq!(data[3][0].as_f64(), Some(0.0));
    }

    #[test]
    fn parse_errors_carry_position() {
        let err = run("mp-inverse", r#"{"a": {"gamma": [0, 0], "blocks": {"#).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        let err = run("mp-inverse", r#"{"a": {"gamma": [0, "x"]}}"#).unwrap_err();
        assert!(err.to_string().contains("a.gamma"), "{err}");
        assert!(err.to_string().contains("line 1"), "{err}");
        let err = run("mp-inverse", r#"{"a": {"gamma": [0, 0], "blocks": {"1": {"rows": 3, "cols": 3, "data": [[1, 0], [0, 0], [0, 0], [0, 0], [1, 0], [0, 0], [0, 0], [0, 0], [1, 0]]}}}}"#)
            .unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(matches!(run("frobnicate", "{}"), Err(QueryError::UnknownOp(_))));
    }

    #[test]
    fn math_failures_exit_one() {
        let text = r#"{"a": {"gamma": [1, 0], "blocks": {"1": {"rows": 2, "cols": 2, "data": [[-1, 0], [0, 0], [0, 0], [0, 0]]}}}, "ideal": {"support": [2]}}"#;
        let err = run("mp-lift", text).unwrap_err();
        assert_eq!(err.exit_code(), 1);
        assert!(run("mp-lift", &text.replace("[2]", "[1, 2]")).unwrap().success);
    }

    #[test]
    fn grid_queries() {
        let f = GridFunction::sample(Domain::Circle { n_samples: 32 }, 4.0, |z| z * z).unwrap();
        let r = run("winding", &serde_json::to_string(&f).unwrap()).unwrap();
        assert_eq!(r.report["winding"], 2);
        let g =
            GridFunction::sample(Domain::Interval { left: 0.0, right: 2.0, n_samples: 101 }, 4.0, |z| z + 1.0).unwrap();
        let text = json!({ "function": g }).to_string();
        assert!(run("interval-mp-lift", &text).unwrap().success);
    }
}
