use super::*;
use crate::lifting::generators::{mixed_element, random_element, random_ideal, random_self_adjoint};
use crate::linalg::outer;
use crate::rng::Rng;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn profile() -> Algebra {
    Algebra::with_dims(DimensionTable::default_profile())
}

/// Largest singular value by power iteration on `M*M`.
fn power_norm(m: &CMatrix, seed: u64) -> f64 {
    let mut rng = Rng::new(seed);
    let g = m.adjoint().matmul(m);
    let mut v: Vec<Complex64> = (0..m.cols()).map(|_| rng.complex_normal()).collect();
    let mut lambda = 0.0;
    for _ in 0..2000 {
        let w = g.mul_vec(&v);
        let n = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if n == 0.0 {
            return 0.0;
        }
        let next = n / v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v = w.into_iter().map(|z| z / n).collect();
        if (next - lambda).abs() <= 1e-15 * next {
            lambda = next;
            break;
        }
        lambda = next;
    }
    lambda.sqrt()
}

#[test]
fn identity_law_and_orthogonality() {
    let alg = profile();
    let mut rng = Rng::new(1);
    let x = random_element(&mut rng, alg.dims());
    assert_eq!(alg.mul(&BlockElement::identity(), &x).unwrap(), x);
    let a = BlockElement::single(1, CMatrix::from_real_diag(&[1.0, 2.0]));
    let b = BlockElement::single(3, CMatrix::from_real_diag(&[1.0, 2.0, 3.0]));
    assert!(alg.mul(&a, &b).unwrap().is_zero());
}

#[test]
fn product_matches_representations() {
    let alg = profile();
    let mut rng = Rng::new(2);
    for _ in 0..50 {
        let a = random_element(&mut rng, alg.dims());
        let b = random_element(&mut rng, alg.dims());
        let ab = alg.mul(&a, &b).unwrap();
        assert_eq!(ab.gamma(), a.gamma() * b.gamma());
        for t in alg.dims().indices() {
            let direct = alg.rep(&a, t).matmul(&alg.rep(&b, t));
            let block = direct.add_identity(-a.gamma() * b.gamma());
            let got = ab.block(t).cloned().unwrap_or_else(|| CMatrix::zeros(block.rows(), block.cols()));
            assert!((&got - &block).max_abs() < 1e-12);
        }
    }
}

#[test]
fn mul_rejects_wrong_shape() {
    let alg = profile();
    let bad = BlockElement::single(1, CMatrix::identity(3));
    assert!(matches!(alg.mul(&bad, &bad), Err(AlgebraError::DimensionMismatch { index: 1, .. })));
    let unknown = BlockElement::single(99, CMatrix::identity(1));
    assert!(matches!(alg.check(&unknown), Err(AlgebraError::UnregisteredIndex(99))));
}

#[test]
fn norm_examples() {
    let alg = profile();
    assert_eq!(alg.norm(&BlockElement::identity()), 1.0);
    let a = BlockElement::single(1, CMatrix::from_real_diag(&[3.0, 1.0]));
    assert!((alg.norm(&a) - 3.0).abs() < 1e-12);
    // the tail counts: gamma = -5 with a block that cancels it at t = 0
    let b = BlockElement::scalar(c(-5.0)).with_block(0, CMatrix::from_real_diag(&[5.0]));
    assert!((alg.norm(&b) - 5.0).abs() < 1e-12);
}

#[test]
fn norm_is_supremum_of_representations() {
    let alg = profile();
    let mut rng = Rng::new(3);
    for i in 0..500 {
        let a = random_element(&mut rng, alg.dims());
        let oracle = a.blocks().keys().map(|&t| power_norm(&alg.rep(&a, t), i)).fold(a.gamma().norm(), f64::max);
        assert!((alg.norm(&a) - oracle).abs() <= 1e-8 * oracle.max(1.0), "trial {i}");
    }
}

#[test]
fn c_star_identity() {
    let alg = profile();
    let mut rng = Rng::new(4);
    for _ in 0..500 {
        let a = random_element(&mut rng, alg.dims());
        let n = alg.norm(&a);
        assert!((alg.norm(&(&a.adjoint() * &a)) - n * n).abs() <= 1e-8 * n.max(1.0).powi(2));
    }
}

#[test]
fn spectrum_examples() {
    let alg = profile();
    assert_eq!(alg.spectrum(&BlockElement::identity()).unwrap(), vec![1.0]);
    let a = BlockElement::single(1, CMatrix::from_real_diag(&[1.0, 2.0]));
    let s = alg.spectrum(&a).unwrap();
    assert_eq!(s.len(), 3);
    for (x, y) in s.iter().zip([0.0, 1.0, 2.0]) {
        assert!((x - y).abs() < 1e-12);
    }
    let skew = BlockElement::single(1, CMatrix::from_real_rows(&[&[0.0, 1.0], &[-1.0, 0.0]]));
    assert!(matches!(alg.spectrum(&skew), Err(AlgebraError::NonHermitian { .. })));
}

#[test]
fn spectrum_is_union_of_block_spectra() {
    let alg = profile();
    let mut rng = Rng::new(5);
    for _ in 0..100 {
        let a = random_self_adjoint(&mut rng, alg.dims());
        let s = alg.spectrum(&a).unwrap();
        let mut oracle = vec![a.gamma().re];
        for &t in a.blocks().keys() {
            oracle.extend(herm_eig(&alg.rep(&a, t), alg.tol()).unwrap().eigenvalues);
        }
        for x in &oracle {
            assert!(s.iter().any(|y| (x - y).abs() <= 1e-8 * alg.norm(&a).max(1.0)));
        }
        for y in &s {
            assert!(oracle.iter().any(|x| (x - y).abs() <= 1e-8 * alg.norm(&a).max(1.0)));
        }
    }
}

#[test]
fn invertibility_examples() {
    let alg = profile();
    let e = BlockElement::identity();
    assert_eq!(alg.invertible(&e).unwrap(), e);
    let mut rng = Rng::new(6);
    let mut a = random_element(&mut rng, alg.dims());
    a = &a - &BlockElement::scalar(a.gamma());
    assert!(alg.invertible(&a).is_none());
    // gamma = 1 with I + a_t singular
    let v = vec![c(0.6), Complex64::new(0.0, 0.8), c(0.0)];
    let a = &e - &BlockElement::single(3, outer(&v, &v));
    assert!(crate::linalg::smallest_singular_value(&alg.rep(&a, 3), alg.tol()).unwrap() < 1e-12);
    assert!(alg.invertible(&a).is_none());
}

#[test]
fn coset_invertibility_examples() {
    let alg = profile();
    let e = BlockElement::identity();
    assert!(alg.coset_invertible(&e, &DualIdeal::from_indices([2])).is_some());
    let v = vec![c(1.0), c(0.0), c(0.0)];
    let a = &e - &BlockElement::single(3, outer(&v, &v));
    let w = alg.coset_invertible(&a, &DualIdeal::from_indices([1, 3])).unwrap();
    assert!(w.residual <= WITNESS_TOL);
    assert!(alg.in_ideal(&w.j, &DualIdeal::from_indices([3])));
    assert!(alg.in_ideal(&w.k, &DualIdeal::from_indices([3])));
    assert!(alg.coset_invertible(&a, &DualIdeal::from_indices([1])).is_none());
    assert!(alg.coset_invertible(&BlockElement::single(3, CMatrix::identity(3)), &DualIdeal::All).is_none());
}

#[test]
fn ideal_membership() {
    let alg = profile();
    let j = DualIdeal::from_indices([1, 2, 3]);
    assert!(alg.in_ideal(&BlockElement::zero(), &j));
    assert!(!alg.in_ideal(&BlockElement::identity(), &DualIdeal::All));
    let a = BlockElement::single(1, CMatrix::identity(2)).with_block(3, CMatrix::identity(3));
    assert!(alg.in_ideal(&a, &j));
    assert!(!alg.in_ideal(&a, &DualIdeal::from_indices([1])));
}

#[test]
fn separation_and_trivial_intersection() {
    let alg = profile();
    let mut rng = Rng::new(7);
    for t in alg.dims().indices() {
        let n = alg.dims().dim(t).unwrap();
        let a = BlockElement::single(t, crate::lifting::generators::random_matrix(&mut rng, n, n));
        for s in alg.dims().indices().filter(|&s| s != t) {
            assert!(a.block(s).is_none());
            assert_eq!(alg.rep(&a, s).max_abs(), 0.0);
            assert!(!alg.in_ideal(&a, &DualIdeal::from_indices([s])));
        }
    }
    let x = BlockElement::single(0, CMatrix::identity(1));
    let both = alg.in_ideal(&x, &DualIdeal::from_indices([1, 2])) && alg.in_ideal(&x, &DualIdeal::from_indices([0]));
    assert!(!both);
}

#[test]
fn lifting_theorem_equivalence() {
    let alg = profile();
    let mut rng = Rng::new(8);
    for i in 0..500 {
        let a = mixed_element(&mut rng, &alg);
        let ideal = random_ideal(&mut rng, alg.dims());
        let lhs = alg.invertible(&a).is_some();
        let rhs = alg.coset_invertible(&a, &ideal).is_some() && alg.all_reps_invertible(&a);
        assert_eq!(lhs, rhs, "trial {i}");
    }
}

#[test]
fn distance_to_ideal_is_quotient_norm() {
    let alg = profile();
    let mut rng = Rng::new(9);
    for _ in 0..50 {
        let a = random_element(&mut rng, alg.dims());
        let ideal = random_ideal(&mut rng, alg.dims());
        let d = alg.distance_to_ideal(&a, &ideal);
        let rest = &a - &alg.ideal_part(&a, &ideal);
        assert!((alg.norm(&rest) - d).abs() <= 1e-10 * d.max(1.0));
        assert!(alg.in_ideal(&alg.ideal_part(&a, &ideal), &ideal));
    }
}

#[test]
fn merge_keeps_tail_value() {
    let m = merge_points(vec![(1.0, false), (0.5, true), (0.5 + 1e-10, false), (3.0, false)], 1e-8);
    assert_eq!(m.len(), 3);
    assert_eq!(m[0], MergedPoint { value: 0.5, count: 1, tail: true });
    assert_eq!(m[2].count, 1);
}
