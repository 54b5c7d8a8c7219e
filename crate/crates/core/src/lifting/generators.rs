//! Seeded random instances. Each constructor establishes the hypotheses of
//! the construction it feeds by building the block representations directly.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::algebra::{Algebra, BlockElement, DimensionTable, DualIdeal};
use crate::linalg::CMatrix;
use crate::rng::Rng;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

pub fn random_matrix(rng: &mut Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| rng.complex_normal())
}

pub fn random_hermitian(rng: &mut Rng, n: usize) -> CMatrix {
    random_matrix(rng, n, n).hermitian_part()
}

/// Haar-like unitary: Gram-Schmidt on a Gaussian matrix.
pub fn random_unitary(rng: &mut Rng, n: usize) -> CMatrix {
    loop {
        let g = random_matrix(rng, n, n);
        let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(n);
        let mut ok = true;
        for j in 0..n {
            let mut v = g.column(j);
            for _ in 0..2 {
                for u in &cols {
                    let p: Complex64 = u.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
                    for (vi, ui) in v.iter_mut().zip(u) {
                        *vi -= p * ui;
                    }
                }
            }
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-6 {
                ok = false;
                break;
            }
            cols.push(v.into_iter().map(|z| z / norm).collect());
        }
        if ok {
            return CMatrix::from_fn(n, n, |i, j| cols[j][i]);
        }
    }
}

/// `U diag(s) V*` with random unitaries; `s` is padded with zeros.
pub fn with_singular_values(rng: &mut Rng, rows: usize, cols: usize, s: &[f64]) -> CMatrix {
    let u = random_unitary(rng, rows);
    let v = random_unitary(rng, cols);
    let mut d = CMatrix::zeros(rows, cols);
    for (i, &x) in s.iter().enumerate().take(rows.min(cols)) {
        d[(i, i)] = c(x);
    }
    u.matmul(&d).matmul(&v.adjoint())
}

/// `U diag(lambda) U*`.
pub fn with_eigenvalues(rng: &mut Rng, lambda: &[f64]) -> CMatrix {
    let u = random_unitary(rng, lambda.len());
    let d = CMatrix::from_real_diag(lambda);
    u.matmul(&d).matmul(&u.adjoint()).hermitian_part()
}

/// Singular values drawn from `[lo, hi]`, with `zeros` of them set to 0.
pub fn spread_singular_values(rng: &mut Rng, k: usize, zeros: usize, lo: f64, hi: f64) -> Vec<f64> {
    let mut s: Vec<f64> = (0..k).map(|i| if i < zeros { 0.0 } else { rng.uniform_in(lo, hi) }).collect();
    s = rng.shuffled(&s);
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Matrices for the equivalence suite: sizes 1..=8, every second one rank
/// deficient.
pub fn equivalence_matrix(rng: &mut Rng, rank_deficient: bool) -> CMatrix {
    let m = rng.range(1, 9);
    let n = rng.range(1, 9);
    let k = m.min(n);
    if rank_deficient {
        let zeros = rng.range(1, k + 1);
        let s = spread_singular_values(rng, k, zeros, 0.05, 4.0);
        with_singular_values(rng, m, n, &s)
    } else {
        random_matrix(rng, m, n)
    }
}

/// Random subset of the registered indices (possibly empty).
pub fn random_ideal(rng: &mut Rng, dims: &DimensionTable) -> DualIdeal {
    DualIdeal::from_indices(dims.indices().filter(|_| rng.coin(0.5)))
}

/// Random nonempty subset of the registered indices.
pub fn random_nonempty_ideal(rng: &mut Rng, dims: &DimensionTable) -> DualIdeal {
    loop {
        let j = random_ideal(rng, dims);
        if !j.indices(dims).is_empty() {
            return j;
        }
    }
}

/// Gaussian scalar part and Gaussian blocks on a random subset of indices.
pub fn random_element(rng: &mut Rng, dims: &DimensionTable) -> BlockElement {
    let gamma = rng.complex_normal();
    let mut blocks = BTreeMap::new();
    for (t, n) in dims.iter() {
        if rng.coin(0.6) {
            blocks.insert(t, random_matrix(rng, n, n));
        }
    }
    BlockElement::new(gamma, blocks)
}

pub fn random_self_adjoint(rng: &mut Rng, dims: &DimensionTable) -> BlockElement {
    random_element(rng, dims).hermitian_part()
}

/// Element whose representations are drawn from a mix of invertible and
/// singular matrices, with `gamma = 0` one time in five.
pub fn mixed_element(rng: &mut Rng, alg: &Algebra) -> BlockElement {
    let gamma = if rng.coin(0.2) { c(0.0) } else { unit_scalar(rng) };
    let mut reps = BTreeMap::new();
    for (t, n) in alg.dims().iter() {
        if !rng.coin(0.7) {
            continue;
        }
        let zeros = if rng.coin(0.3) { rng.range(1, n + 1) } else { 0 };
        let s = spread_singular_values(rng, n, zeros, 0.2, 2.0);
        reps.insert(t, with_singular_values(rng, n, n, &s));
    }
    alg.from_reps(gamma, reps)
}

/// Scalar of modulus in `[0.5, 2]` with a random phase.
pub fn unit_scalar(rng: &mut Rng) -> Complex64 {
    Complex64::from_polar(rng.uniform_in(0.5, 2.0), rng.uniform_in(0.0, std::f64::consts::TAU))
}

/// `(a, J)` with `a + J` invertible: invertible representations outside
/// `J`, at least one singular representation inside `J` when `J` is nonempty.
pub fn coset_invertible_instance(rng: &mut Rng, alg: &Algebra) -> (BlockElement, DualIdeal) {
    let dims = alg.dims();
    let ideal = random_nonempty_ideal(rng, dims);
    let gamma = unit_scalar(rng);
    let inside: Vec<usize> = ideal.indices(dims).into_iter().collect();
    let forced: Vec<usize> = rng.shuffled(&inside).into_iter().take(2).collect();
    let mut reps = BTreeMap::new();
    for (t, n) in dims.iter() {
        let in_j = ideal.contains(t);
        if !forced.contains(&t) && !rng.coin(0.7) {
            continue;
        }
        let zeros = if forced.contains(&t) || (in_j && rng.coin(0.5)) { rng.range(1, n + 1) } else { 0 };
        let s = spread_singular_values(rng, n, zeros, 0.2, 2.0);
        reps.insert(t, with_singular_values(rng, n, n, &s));
    }
    (alg.from_reps(gamma, reps), ideal)
}

/// `(a, J)` with `a + J` a projection in `A / J`.
///
/// Outside `J` the representations are exact orthogonal projections. Inside
/// `J` the Hermitian part has eigenvalues within 0.2 of 0 or 1 except for
/// injected outliers in `[1.6, 4]` or `[-3, -0.6]` (which must be peeled),
/// and a skew-Hermitian perturbation of norm at most 0.1 is added.
pub fn projection_coset_instance(rng: &mut Rng, alg: &Algebra) -> (BlockElement, DualIdeal) {
    let dims = alg.dims();
    let ideal = random_nonempty_ideal(rng, dims);
    let gamma = if rng.coin(0.5) { c(1.0) } else { c(0.0) };
    let mut reps = BTreeMap::new();
    let mut outlier_placed = false;
    for (t, n) in dims.iter() {
        if !rng.coin(0.75) {
            continue;
        }
        let mut lambda: Vec<f64> = (0..n).map(|_| if rng.coin(0.5) { 1.0 } else { 0.0 }).collect();
        if ideal.contains(t) {
            for x in lambda.iter_mut() {
                *x += rng.uniform_in(-0.2, 0.2);
            }
            if !outlier_placed || rng.coin(0.3) {
                let k = rng.range(0, n);
                lambda[k] = if rng.coin(0.5) { rng.uniform_in(1.6, 4.0) } else { rng.uniform_in(-3.0, -0.6) };
                outlier_placed = true;
            }
            let h = with_eigenvalues(rng, &lambda);
            let skew = random_hermitian(rng, n);
            let size = crate::linalg::op_norm(&skew).unwrap_or(1.0).max(1e-12);
            let skew = skew.scale(Complex64::new(0.0, rng.uniform_in(0.0, 0.1) / size));
            reps.insert(t, &h + &skew);
        } else {
            reps.insert(t, with_eigenvalues(rng, &lambda));
        }
    }
    (alg.from_reps(gamma, reps), ideal)
}

/// `a = m0 + j0` with well-separated singular values in every
/// representation and `j0` supported in `J`.
pub fn mp_sum_instance(rng: &mut Rng, alg: &Algebra) -> (BlockElement, DualIdeal) {
    let dims = alg.dims();
    let ideal = random_nonempty_ideal(rng, dims);
    let m0 = mixed_element(rng, alg);
    let mut j0 = BlockElement::zero();
    for t in ideal.indices(dims) {
        if rng.coin(0.5) {
            let n = dims.dim(t).unwrap();
            j0 = &j0 + &BlockElement::single(t, random_matrix(rng, n, n).scale(c(0.5)));
        }
    }
    (&m0 + &j0, ideal)
}

/// Positive element of `J`: `sum_t W_t W_t*` over a random part of `J`.
pub fn positive_ideal_element(rng: &mut Rng, alg: &Algebra, ideal: &DualIdeal) -> BlockElement {
    let mut blocks = BTreeMap::new();
    let indices: Vec<usize> = ideal.indices(alg.dims()).into_iter().collect();
    for &t in &indices {
        if blocks.is_empty() && t == *indices.last().unwrap() || rng.coin(0.6) {
            let n = alg.dims().dim(t).unwrap();
            let zeros = if rng.coin(0.3) { rng.range(0, n) } else { 0 };
            let s = spread_singular_values(rng, n, zeros, 0.1, 2.0);
            let w = with_singular_values(rng, n, n, &s);
            blocks.insert(t, w.matmul(&w.adjoint()).hermitian_part());
        }
    }
    BlockElement::new(c(0.0), blocks)
}

/// `(a, b, c, J1, J2)` with `a b a - a` in `J1` and `e - c a` in `J2`.
pub fn lemma_triple(rng: &mut Rng, alg: &Algebra) -> (BlockElement, BlockElement, BlockElement, DualIdeal, DualIdeal) {
    let dims = alg.dims();
    let j1 = random_ideal(rng, dims);
    let j2 = random_ideal(rng, dims);
    let gamma = unit_scalar(rng);
    let (mut a_reps, mut b_reps, mut c_reps) = (BTreeMap::new(), BTreeMap::new(), BTreeMap::new());
    for (t, n) in dims.iter() {
        if !rng.coin(0.7) {
            continue;
        }
        let zeros = if j2.contains(t) && rng.coin(0.5) { rng.range(1, n + 1) } else { 0 };
        let s = spread_singular_values(rng, n, zeros, 0.2, 2.0);
        let w = with_singular_values(rng, n, n, &s);
        let pinv = crate::moore_penrose::matrix_pseudoinverse(&w, alg.tol()).expect("finite matrix");
        let b = if j1.contains(t) { random_matrix(rng, n, n) } else { pinv.clone() };
        let cm = if j2.contains(t) { random_matrix(rng, n, n) } else { pinv };
        a_reps.insert(t, w);
        b_reps.insert(t, b);
        c_reps.insert(t, cm);
    }
    let inv = gamma.inv();
    (alg.from_reps(gamma, a_reps), alg.from_reps(inv, b_reps), alg.from_reps(inv, c_reps), j1, j2)
}
