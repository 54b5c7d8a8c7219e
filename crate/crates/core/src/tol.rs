//! Numerical tolerances.
//!
//! Every threshold used by the crate lives here. The four base tolerances
//! (`eig_tol`, `herm_tol`, `sing_tol`, `solve_tol`) govern the dense linear
//! algebra; the remaining ones are expressed relative to the scale of the
//! data they judge, as documented on each field.
//!
//! The central decision is the **rank tolerance**: a singular value `s` of a
//! matrix is treated as zero when `s <= rank_tol * max(1, s_max)`. In exact
//! arithmetic "0 is an isolated point of the spectrum of a*a" is a
//! topological statement; in floating point it becomes this relative gap
//! test, and every Moore-Penrose construction inherits it.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum TolError {
    #[error("unknown tolerance `{0}`")]
    UnknownName(String),
    #[error("tolerance `{name}` must be a positive finite number, got {value}")]
    InvalidValue { name: String, value: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Jacobi stopping threshold (off-diagonal Frobenius mass, relative to `max(1, ||A||_F)`).
    pub eig_tol: f64,
    /// Admissible `||A - A*||` relative to `max(1, ||A||)` for Hermitian input.
    pub herm_tol: f64,
    /// Absolute smallest-singular-value threshold for invertibility.
    pub sing_tol: f64,
    /// Residual bound of `solve`, relative to `||B||`.
    pub solve_tol: f64,
    /// Relative rank decision for singular values.
    pub rank_tol: f64,
    /// Eigenvalues closer than `cluster_tol * max(1, ||a||)` form one cluster.
    pub cluster_tol: f64,
    /// Minimal separation `cluster_gap * max(1, ||a||)` for an isolated cluster.
    pub cluster_gap: f64,
    /// Blocks whose entries are all at most this size are dropped.
    pub zero_tol: f64,
    /// Penrose residual scale: residuals must stay below `mp_tol * max(1, ||a||, ||a+||)`.
    pub mp_tol: f64,
    /// Grid functions: vanishing and matching tolerance.
    pub lift_tol: f64,
    /// Grid functions: minimal modulus for a winding number.
    pub wind_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            eig_tol: 1e-11,
            herm_tol: 1e-9,
            sing_tol: 1e-10,
            solve_tol: 1e-9,
            rank_tol: 1e-9,
            cluster_tol: 1e-8,
            cluster_gap: 1e-6,
            zero_tol: 1e-13,
            mp_tol: 1e-8,
            lift_tol: 1e-6,
            wind_tol: 1e-6,
        }
    }
}

impl Tolerances {
    pub const NAMES: [&'static str; 11] = [
        "eig_tol",
        "herm_tol",
        "sing_tol",
        "solve_tol",
        "rank_tol",
        "cluster_tol",
        "cluster_gap",
        "zero_tol",
        "mp_tol",
        "lift_tol",
        "wind_tol",
    ];

    /// Override one tolerance by name, as accepted by `--tol name=value`.
    pub fn set(&mut self, name: &str, value: f64) -> Result<(), TolError> {
        if !(value.is_finite() && value > 0.0) {
            return Err(TolError::InvalidValue { name: name.to_string(), value });
        }
        let slot = match name {
            "eig_tol" => &mut self.eig_tol,
            "herm_tol" => &mut self.herm_tol,
            "sing_tol" => &mut self.sing_tol,
            "solve_tol" => &mut self.solve_tol,
            "rank_tol" => &mut self.rank_tol,
            "cluster_tol" => &mut self.cluster_tol,
            "cluster_gap" => &mut self.cluster_gap,
            "zero_tol" => &mut self.zero_tol,
            "mp_tol" => &mut self.mp_tol,
            "lift_tol" => &mut self.lift_tol,
            "wind_tol" => &mut self.wind_tol,
            _ => return Err(TolError::UnknownName(name.to_string())),
        };
        *slot = value;
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        Some(match name {
            "eig_tol" => self.eig_tol,
            "herm_tol" => self.herm_tol,
            "sing_tol" => self.sing_tol,
            "solve_tol" => self.solve_tol,
            "rank_tol" => self.rank_tol,
            "cluster_tol" => self.cluster_tol,
            "cluster_gap" => self.cluster_gap,
            "zero_tol" => self.zero_tol,
            "mp_tol" => self.mp_tol,
            "lift_tol" => self.lift_tol,
            "wind_tol" => self.wind_tol,
            _ => return None,
        })
    }
}
