use super::*;
use crate::algebra::DimensionTable;
use crate::lifting::generators::{equivalence_matrix, random_matrix, random_self_adjoint, with_singular_values};
use crate::linalg::{singular_values, solve};
use crate::rng::Rng;
use proptest::prelude::*;

fn tol() -> Tolerances {
    Tolerances::default()
}

/// `V diag(1/lambda) V* a*` over the nonzero eigenvalues of `a*a`.
fn svd_oracle(a: &CMatrix) -> CMatrix {
    let eig = herm_eig(&a.adjoint().matmul(a).hermitian_part(), &tol()).unwrap();
    let top = eig.eigenvalues.last().copied().unwrap_or(0.0).max(1.0);
    let mut acc = CMatrix::zeros(a.cols(), a.cols());
    for (k, &l) in eig.eigenvalues.iter().enumerate() {
        if l > 1e-12 * top {
            let v = eig.eigenvectors.column(k);
            acc = &acc + &outer(&v, &v).scale(Complex64::new(1.0 / l, 0.0));
        }
    }
    acc.matmul(&a.adjoint())
}

fn dist(a: &CMatrix, b: &CMatrix) -> f64 {
    op_norm(&(a - b)).unwrap()
}

#[test]
fn zero_matrix() {
    let r = matrix_mp_inverse(&CMatrix::zeros(2, 3), &tol()).unwrap();
    assert_eq!(r.pseudoinverse, CMatrix::zeros(3, 2));
    assert!(dist(&r.mp_projection, &CMatrix::identity(3)) < 1e-15);
    assert_eq!(r.spectral_gap, None);
    assert!(r.verdicts.all());
}

#[test]
fn diagonal_rank_one() {
    let r = matrix_mp_inverse(&CMatrix::from_real_diag(&[2.0, 0.0]), &tol()).unwrap();
    assert!(dist(&r.pseudoinverse, &CMatrix::from_real_diag(&[0.5, 0.0])) < 1e-14);
    assert!(dist(&r.mp_projection, &CMatrix::from_real_diag(&[0.0, 1.0])) < 1e-14);
    assert!((r.spectral_gap.unwrap() - 4.0).abs() < 1e-12);
    assert!(r.verdicts.all());
}

#[test]
fn random_rank_two_matches_oracle() {
    let mut rng = Rng::new(11);
    let a = with_singular_values(&mut rng, 4, 3, &[2.5, 0.7, 0.0]);
    let r = matrix_mp_inverse(&a, &tol()).unwrap();
    assert!(dist(&r.pseudoinverse, &svd_oracle(&a)) <= 1e-8);
    let rep = matrix_equivalence_report(&a, &tol()).unwrap();
    assert_eq!(rep.rank, 2);
}

#[test]
fn invertible_has_zero_projection() {
    let mut rng = Rng::new(5);
    let a = random_matrix(&mut rng, 4, 4).add_identity(Complex64::new(5.0, 0.0));
    let rep = matrix_equivalence_report(&a, &tol()).unwrap();
    assert!(rep.verdicts.all());
    assert!(rep.mp_projection.max_abs() < 1e-12);
    let inv = crate::linalg::inverse(&a, &tol()).unwrap();
    assert!(dist(&rep.pseudoinverse, &inv) < 1e-10);
}

#[test]
fn partial_isometry_complement() {
    let mut rng = Rng::new(8);
    let unit = |rng: &mut Rng, n: usize| {
        let v: Vec<Complex64> = (0..n).map(|_| rng.complex_normal()).collect();
        let s = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v.into_iter().map(|z| z / s).collect::<Vec<_>>()
    };
    let u = unit(&mut rng, 3);
    let v = unit(&mut rng, 3);
    let a = outer(&u, &v);
    let rep = matrix_equivalence_report(&a, &tol()).unwrap();
    assert!(rep.verdicts.all());
    let complement = &CMatrix::identity(3) - &outer(&v, &v);
    assert!(dist(&rep.mp_projection, &complement) < 1e-12);
    // a partial isometry is inverted by its adjoint
    assert!(dist(&rep.pseudoinverse, &a.adjoint()) < 1e-12);
}

#[test]
fn thousand_matrices_agree() {
    let mut rng = Rng::new(2024);
    let mut worst_oracle: f64 = 0.0;
    for i in 0..1000 {
        let a = equivalence_matrix(&mut rng, i % 2 == 1);
        let rep = matrix_equivalence_report(&a, &tol()).unwrap();
        assert!(rep.verdicts.agree() && rep.verdicts.all(), "trial {i}: {:?}", rep.verdicts);
        assert!(rep.norm_formula_residual <= 1e-6, "trial {i}");
        assert!(rep.uniqueness_residual <= 1e-7, "trial {i}: {}", rep.uniqueness_residual);
        let x_norm = op_norm(&rep.pseudoinverse).unwrap().max(1.0);
        worst_oracle = worst_oracle.max(dist(&rep.pseudoinverse, &svd_oracle(&a)) / x_norm);
    }
    assert!(worst_oracle <= 1e-8, "{worst_oracle}");
}

#[test]
fn formula_route_agrees() {
    let mut rng = Rng::new(77);
    for i in 0..200 {
        let a = equivalence_matrix(&mut rng, i % 2 == 0);
        let rep = matrix_equivalence_report(&a, &tol()).unwrap();
        let shifted = &a.adjoint().matmul(&a) + &rep.mp_projection;
        let via_solve = solve(&shifted, &a.adjoint(), &tol()).unwrap();
        let scale = op_norm(&rep.pseudoinverse).unwrap().max(1.0);
        assert!(dist(&via_solve, &rep.pseudoinverse) <= 1e-8 * scale, "trial {i}");
    }
}

#[test]
fn projection_fixes_kernel() {
    let mut rng = Rng::new(31);
    for _ in 0..50 {
        let a = equivalence_matrix(&mut rng, true);
        let q = matrix_mp_inverse(&a, &tol()).unwrap().mp_projection;
        let eig = herm_eig(&a.adjoint().matmul(&a).hermitian_part(), &tol()).unwrap();
        for (k, &l) in eig.eigenvalues.iter().enumerate() {
            if l < 1e-12 {
                let v = eig.eigenvectors.column(k);
                let qv = q.mul_vec(&v);
                let err: f64 = qv.iter().zip(&v).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt();
                assert!(err <= 1e-7);
            }
        }
    }
}

#[test]
fn projections_are_self_inverse() {
    let mut rng = Rng::new(4);
    for n in 1..=6 {
        let s: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { 1.0 } else { 0.0 }).collect();
        let u = crate::lifting::generators::random_unitary(&mut rng, n);
        let p = u.matmul(&CMatrix::from_real_diag(&s)).matmul(&u.adjoint());
        let x = matrix_pseudoinverse(&p, &tol()).unwrap();
        assert!(dist(&x, &p) <= 1e-9);
    }
}

#[test]
fn block_element_inverse() {
    let dims = DimensionTable::from_sizes(&[2, 3]).unwrap();
    let alg = Algebra::with_dims(dims);
    let a = BlockElement::scalar(Complex64::new(2.0, 0.0)).with_block(0, CMatrix::from_real_diag(&[-2.0, 1.0]));
    let r = mp_inverse(&alg, &a).unwrap();
    // W_0(a) = diag(0, 3), tail 2
    let expected = alg.from_reps(Complex64::new(0.5, 0.0), [(0, CMatrix::from_real_diag(&[0.0, 1.0 / 3.0]))].into());
    assert!(alg.approx_eq(&r.pseudoinverse, &expected));
    assert!(r.verdicts.all());
    assert!((r.spectral_gap.unwrap() - 4.0).abs() < 1e-12);
    let q = alg.from_reps(Complex64::new(0.0, 0.0), [(0, CMatrix::from_real_diag(&[1.0, 0.0]))].into());
    assert!(alg.approx_eq(&r.mp_projection, &q));
}

#[test]
fn block_element_without_tail() {
    let alg = Algebra::with_dims(DimensionTable::default_profile());
    let mut rng = Rng::new(19);
    for _ in 0..100 {
        let mut a = crate::lifting::generators::mixed_element(&mut rng, &alg);
        if rng.coin(0.5) {
            a = &a - &BlockElement::scalar(a.gamma());
        }
        let rep = equivalence_report(&alg, &a).unwrap();
        assert!(rep.verdicts.all(), "{:?}", rep.verdicts);
        assert!(rep.penrose.iter().all(|&r| r <= rep.penrose_bound));
        assert!(rep.uniqueness_residual <= 1e-7);
        assert!(rep.norm_formula_residual <= 1e-6);
        if a.gamma().norm() == 0.0 {
            assert_eq!(rep.pseudoinverse.gamma(), Complex64::new(0.0, 0.0));
            assert_eq!(rep.mp_projection.gamma(), Complex64::new(1.0, 0.0));
        }
    }
}

#[test]
fn zero_element() {
    let alg = Algebra::with_dims(DimensionTable::default_profile());
    let r = mp_inverse(&alg, &BlockElement::zero()).unwrap();
    assert!(r.pseudoinverse.is_zero());
    assert!(alg.approx_eq(&r.mp_projection, &BlockElement::identity()));
    assert_eq!(r.spectral_gap, None);
}

#[test]
fn closedness_self_adjoint() {
    let alg = Algebra::with_dims(DimensionTable::from_sizes(&[3, 2]).unwrap());
    let a = BlockElement::single(0, CMatrix::from_real_diag(&[2.0, 0.0, -1.0]))
        .with_block(1, CMatrix::from_real_rows(&[&[1.0, 1.0], &[1.0, 1.0]]));
    let r = inverse_closedness_check(&alg, &a, std::slice::from_ref(&a), 12).unwrap();
    assert!(r.closed, "{r:?}");
}

#[test]
fn closedness_normal_element() {
    let alg = Algebra::with_dims(DimensionTable::from_sizes(&[3]).unwrap());
    let mut rng = Rng::new(3);
    let u = crate::lifting::generators::random_unitary(&mut rng, 3);
    let d = CMatrix::diag(&[Complex64::new(1.0, 1.0), Complex64::new(0.0, 0.0), Complex64::new(-2.0, 0.5)]);
    let a = BlockElement::single(0, u.matmul(&d).matmul(&u.adjoint()));
    let r = inverse_closedness_check(&alg, &a, std::slice::from_ref(&a), 12).unwrap();
    assert!(r.closed);
    // compare with the functional-calculus form: a+ = f(a) with f(z) = 1/z off 0
    let dinv =
        CMatrix::diag(&[Complex64::new(1.0, 1.0).inv(), Complex64::new(0.0, 0.0), Complex64::new(-2.0, 0.5).inv()]);
    let expected = BlockElement::single(0, u.matmul(&dinv).matmul(&u.adjoint()));
    assert!(alg.approx_eq(&mp_inverse(&alg, &a).unwrap().pseudoinverse, &expected));
}

#[test]
fn closedness_word_length_bound() {
    let alg = Algebra::with_dims(DimensionTable::from_sizes(&[4]).unwrap());
    let mut rng = Rng::new(9);
    let m = with_singular_values(&mut rng, 4, 4, &[3.0, 1.5, 1.5, 0.0]);
    let a = BlockElement::single(0, m.clone());
    let gram = &a.adjoint() * &a;
    let r = inverse_closedness_check(&alg, &a, &[gram, a.clone()], 12).unwrap();
    assert!(r.closed);
    let sv = singular_values(&m, &tol()).unwrap();
    let mut distinct: Vec<f64> = Vec::new();
    for s in sv {
        if !distinct.iter().any(|d| (d - s).abs() < 1e-6) {
            distinct.push(s);
        }
    }
    assert!(r.word_length.unwrap() <= 2 * distinct.len());
}

#[test]
fn closedness_rejects_foreign_element() {
    let alg = Algebra::with_dims(DimensionTable::from_sizes(&[2]).unwrap());
    let a = BlockElement::single(0, CMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]));
    let g = BlockElement::single(0, CMatrix::from_real_diag(&[1.0, 2.0]));
    assert!(matches!(inverse_closedness_check(&alg, &a, &[g], 8), Err(MpError::NotInSubalgebra { .. })));
}

#[test]
fn self_adjoint_block_elements_closed() {
    let alg = Algebra::with_dims(DimensionTable::from_sizes(&[1, 2, 3]).unwrap());
    let mut rng = Rng::new(12);
    for _ in 0..10 {
        let a = random_self_adjoint(&mut rng, alg.dims());
        let r = inverse_closedness_check(&alg, &a, std::slice::from_ref(&a), 16).unwrap();
        assert!(r.closed, "{r:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]
    #[test]
    fn penrose_relations_hold(seed in any::<u64>(), deficient in any::<bool>()) {
        let mut rng = Rng::new(seed);
        let a = equivalence_matrix(&mut rng, deficient);
        let r = matrix_mp_inverse(&a, &tol()).unwrap();
        prop_assert!(r.penrose_residual <= r.penrose_bound);
        prop_assert!(r.verdicts.all());
    }
}
