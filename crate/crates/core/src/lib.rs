//! Numerical model of Moore-Penrose ideals in C*-algebras.
//!
//! The algebra is `A = C e + (direct sum over t of M_{n_t})` with finitely
//! supported elements and an infinite index tail where every block equals
//! the scalar part. Dual ideals are sets of block indices. On top of that
//! model the crate provides Moore-Penrose inversion with its equivalent
//! characterisations, lifting constructions modulo a dual ideal, minimal
//! projection decompositions, and a sampled model of `C(X)` for the
//! commutative counterexamples.

pub mod algebra;
pub mod calculus;
pub mod commutative;
pub mod instance;
pub mod lifting;
pub mod linalg;
pub mod moore_penrose;
pub mod rng;
pub mod suites;
pub mod tol;
