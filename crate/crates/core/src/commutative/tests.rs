use std::f64::consts::TAU;

use super::families::*;
use super::*;
use crate::rng::Rng;

fn tol() -> Tolerances {
    Tolerances::default()
}

fn circle(n: usize, f: impl Fn(f64) -> Complex64) -> GridFunction {
    GridFunction::sample(Domain::Circle { n_samples: n }, 16.0, |z| f(z.arg())).unwrap()
}

/// Total argument change along a finely sampled closed curve.
fn winding_oracle(f: impl Fn(f64) -> Complex64) -> i64 {
    let n = 4096;
    let mut total = 0.0;
    for k in 0..n {
        let a = f(TAU * k as f64 / n as f64);
        let b = f(TAU * (k + 1) as f64 / n as f64);
        total += (b / a).arg();
    }
    (total / TAU).round() as i64
}

#[test]
fn winding_examples() {
    assert_eq!(winding_number(&circle(64, |_| Complex64::new(1.0, 0.0)), &tol()).unwrap(), 0);
    assert_eq!(winding_number(&circle(64, |t| Complex64::from_polar(1.0, t)), &tol()).unwrap(), 1);
    let cube = |t: f64| Complex64::from_polar(1.0, 3.0 * t);
    assert_eq!(winding_number(&circle(64, cube), &tol()).unwrap(), winding_oracle(cube));
    assert_eq!(winding_oracle(cube), 3);
}

#[test]
fn winding_errors() {
    let vanishing = circle(64, |t| Complex64::new(t.cos(), 0.0));
    assert!(matches!(winding_number(&vanishing, &tol()), Err(GridError::VanishingValue { .. })));
    let fast: Vec<Complex64> = (0..16).map(|k| Complex64::from_polar(1.0, 5.0 * TAU * k as f64 / 16.0)).collect();
    assert!(matches!(winding_of_samples(&fast, 1e-6), Err(GridError::InsufficientResolution { .. })));
    let f = GridFunction::sample(interval_0_1(), 4.0, |z| z).unwrap();
    assert!(matches!(winding_number(&f, &tol()), Err(GridError::WrongDomain(_))));
}

#[test]
fn winding_is_rotation_invariant() {
    let f = |t: f64| Complex64::from_polar(1.5 + t.sin(), 2.0 * t) + Complex64::new(0.3, 0.0);
    let values: Vec<Complex64> = (0..128).map(|k| f(TAU * k as f64 / 128.0)).collect();
    let w = winding_of_samples(&values, 1e-6).unwrap();
    for shift in 0..128 {
        let mut v = values.clone();
        v.rotate_left(shift);
        assert_eq!(winding_of_samples(&v, 1e-6).unwrap(), w);
    }
}

#[test]
fn winding_is_homotopy_invariant() {
    let mut rng = Rng::new(11);
    for _ in 0..20 {
        let w = rng.range(1, 4) as f64;
        let (a0, a1) = (rng.uniform_in(0.0, 0.4), rng.uniform_in(0.0, 0.4));
        let f0 = |t: f64| Complex64::from_polar(1.0 + a0 * t.cos(), w * t);
        let f1 = |t: f64| Complex64::from_polar(2.0 - a1 * (2.0 * t).sin(), w * t + 0.5 * t.sin());
        let mut seen = Vec::new();
        for s in 0..=10 {
            let s = s as f64 / 10.0;
            let g = circle(256, |t| f0(t) * (1.0 - s) + f1(t) * s);
            assert!(g.min_modulus() > 1e-3);
            seen.push(winding_number(&g, &tol()).unwrap());
        }
        assert!(seen.iter().all(|&x| x == w as i64), "{seen:?}");
    }
}

#[test]
fn continuity_contract() {
    let d = Domain::Interval { left: 0.0, right: 1.0, n_samples: 32 };
    let step = |z: Complex64| Complex64::new(if z.re < 0.5 { 0.0 } else { 1.0 }, 0.0);
    assert!(matches!(GridFunction::sample(d, 1.0, step), Err(GridError::Discontinuous { .. })));
    assert!(matches!(
        GridFunction::new(d, vec![Complex64::new(0.0, 0.0); 10], 4.0),
        Err(GridError::SampleCount { expected: 32, got: 10 })
    ));
    assert!(matches!(GridFunction::sample(Domain::Circle { n_samples: 8 }, 4.0, |z| z), Err(GridError::TooFewSamples)));
}

#[test]
fn json_round_trip() {
    let f = GridFunction::sample(disk(), 4.0, |z| z * z).unwrap();
    let s = serde_json::to_string(&f).unwrap();
    let g: GridFunction = serde_json::from_str(&s).unwrap();
    assert_eq!(f, g);
    let bad = r#"{"domain": {"kind": "circle", "n_samples": 16}, "values": [[1, 0]]}"#;
    assert!(serde_json::from_str::<GridFunction>(bad).is_err());
}

#[test]
fn mp_lift_interval_examples() {
    let j = GridIdeal::new(VanishingSet::SubInterval { lo: 0.0, hi: 1.0 });
    let zero = GridFunction::sample(interval_0_2(), 4.0, |_| Complex64::new(0.0, 0.0)).unwrap();
    let lift = mp_lift_interval(&zero, &j, &tol()).unwrap();
    assert_eq!(lift.status, GridMpStatus::Zero);

    let f = GridFunction::sample(interval_0_2(), 4.0, |z| z + 1.0).unwrap();
    let lift = mp_lift_interval(&f, &j, &tol()).unwrap();
    assert_eq!(lift.status, GridMpStatus::Invertible);
    assert!(lift.residual <= 1e-12);
    for (z, g) in interval_0_2().points().iter().zip(lift.lift.values()) {
        let expected = if z.re <= 1.0 { z.re + 1.0 } else { 2.0 };
        assert!((g.re - expected).abs() < 1e-12 && g.im == 0.0);
    }
    assert!((lift.lift.min_modulus() - 1.0).abs() < 1e-12);

    let sign_change = GridFunction::sample(interval_0_2(), 4.0, |z| z - 0.5).unwrap();
    assert!(matches!(mp_lift_interval(&sign_change, &j, &tol()), Err(GridError::NotCosetMPInvertible(_))));
}

#[test]
fn mp_lift_interval_random() {
    let j = GridIdeal::new(VanishingSet::SubInterval { lo: 0.0, hi: 1.0 });
    let mut rng = Rng::new(12);
    for _ in 0..20 {
        let f = nonvanishing_on_unit(&mut rng);
        let lift = mp_lift_interval(&f, &j, &tol()).unwrap();
        assert!(lift.residual <= tol().lift_tol);
        assert_eq!(lift.status, GridMpStatus::Invertible);
        let inv = grid_mp_inverse(&lift.lift, &tol()).unwrap();
        for (g, h) in lift.lift.values().iter().zip(inv.values()) {
            assert!((g * h - 1.0).norm() < 1e-12);
        }
    }
}

#[test]
fn grid_mp_inverse_rejects_interior_zero() {
    let f = GridFunction::sample(interval_0_1(), 4.0, |z| z).unwrap();
    assert!(matches!(grid_mp_inverse(&f, &tol()), Err(MpError::NotMPInvertible { .. })));
}

#[test]
fn nonlift_witness_examples() {
    let a = GridFunction::sample(interval_0_1(), 4.0, |z| z).unwrap();
    let w = projection_nonlift_witness(&a, None, &tol()).unwrap();
    assert!((w.x - 0.5).abs() < 1e-12 && (w.defect - 0.25).abs() < 1e-12);
    assert_eq!(w.status, GridMpStatus::NotMpInvertible);

    let step =
        GridFunction::sample(interval_0_1(), 40.0, |z| Complex64::new(smoothed_step(0.5, 0.1, z.re), 0.0)).unwrap();
    let w = projection_nonlift_witness(&a, Some(&step), &tol()).unwrap();
    // grid scan: maximiser of |g^2 - g| over the samples
    let scan = step.values().iter().map(|g| (g * g - g).norm()).fold(0.0, f64::max);
    assert!((w.defect - scan).abs() < 1e-15 && w.defect >= 0.125);
    assert!(w.x > 0.45 && w.x < 0.55);

    let sq = GridFunction::sample(interval_0_1(), 4.0, |z| z * z).unwrap();
    let w = projection_nonlift_witness(&sq, None, &tol()).unwrap();
    assert!(w.value >= 0.25 && w.value <= 0.75 && w.defect >= 0.125);
    assert!((w.x * w.x - w.value).abs() < 1e-12);

    let bad = GridFunction::sample(interval_0_1(), 4.0, |z| z + 0.1).unwrap();
    assert!(matches!(projection_nonlift_witness(&bad, None, &tol()), Err(GridError::PreconditionFailed(_))));
}

#[test]
fn nonlift_witness_for_candidates() {
    let a = GridFunction::sample(interval_0_1(), 4.0, |z| z).unwrap();
    let mut rng = Rng::new(13);
    for _ in 0..20 {
        let g = interval_candidate(&mut rng);
        let w = projection_nonlift_witness(&a, Some(&g), &tol()).unwrap();
        assert!(w.defect >= 0.125);
    }
}

#[test]
fn disk_examples() {
    let j = GridIdeal::new(VanishingSet::Boundary);
    let z = GridFunction::sample(disk(), 4.0, |z| z).unwrap();
    let r = disk_obstruction_check(&z, &j, &tol()).unwrap();
    assert_eq!(r.verdict, DiskVerdict::Obstructed);
    assert_eq!(r.profile[0].winding, Some(0));
    assert!(r.profile[0].vanishes);
    assert!(r.profile[1..].iter().all(|s| s.winding == Some(1)));

    let d = Domain::Disk { n_radii: 33, n_angles: 64 };
    let patched = GridFunction::sample(d, 1.0, |z| if z.norm() <= 0.5 { Complex64::new(1.0, 0.0) } else { z });
    assert!(matches!(patched, Err(GridError::Discontinuous { .. })));

    let radial =
        GridFunction::sample(disk(), 4.0, |z| z * (2.0 + (3.0 * z.norm()).cos()) / (2.0 + 3f64.cos())).unwrap();
    let r = disk_obstruction_check(&radial, &j, &tol()).unwrap();
    assert_eq!(r.verdict, DiskVerdict::Obstructed);
    for (i, s) in r.profile.iter().enumerate().skip(1) {
        let ring = disk().ring(i).unwrap();
        assert_eq!(
            s.winding,
            Some(winding_oracle(|t| Complex64::from_polar(s.radius, t) * (2.0 + (3.0 * s.radius).cos())))
        );
        assert_eq!(ring.len(), 128);
    }

    let off = GridFunction::sample(disk(), 4.0, |z| z * 2.0).unwrap();
    assert!(matches!(disk_obstruction_check(&off, &j, &tol()), Err(GridError::PreconditionFailed(_))));
}

#[test]
fn disk_candidates_are_all_obstructed() {
    let j = GridIdeal::new(VanishingSet::Boundary);
    let mut rng = Rng::new(14);
    for _ in 0..20 {
        let g = disk_candidate(&mut rng);
        let r = disk_obstruction_check(&g, &j, &tol()).unwrap();
        assert_eq!(r.verdict, DiskVerdict::Obstructed);
        assert_eq!(r.profile.last().unwrap().winding, Some(1));
    }
}

#[test]
fn grid_projection_lift_examples() {
    let j = GridIdeal::new(VanishingSet::Boundary);
    let one = GridFunction::sample(disk(), 4.0, |_| Complex64::new(1.0, 0.0)).unwrap();
    let lift = grid_projection_lift(&one, &j, &tol()).unwrap();
    assert_eq!(lift.constant, 1.0);
    assert_eq!(lift.residual, 0.0);

    let bump = GridFunction::sample(disk(), 4.0, |z| Complex64::new(0.6 * (1.0 - z.norm_sqr()), 0.0)).unwrap();
    let lift = grid_projection_lift(&bump, &j, &tol()).unwrap();
    let boundary_max = j.quotient_norm(&bump).unwrap();
    assert_eq!(lift.constant, 0.0);
    assert!(lift.residual <= boundary_max + 1e-15);

    let mixed = GridFunction::sample(disk(), 4.0, |z| Complex64::new(smoothed_step(0.0, 1.0, z.re), 0.0)).unwrap();
    assert!(matches!(grid_projection_lift(&mixed, &j, &tol()), Err(GridError::MixedBoundary)));
}

#[test]
fn ideal_masks() {
    let d = interval_0_2();
    let m = GridIdeal::new(VanishingSet::SubInterval { lo: 0.0, hi: 1.0 }).mask(&d).unwrap();
    assert_eq!(m.iter().filter(|&&x| x).count(), 101);
    assert!(GridIdeal::new(VanishingSet::SubInterval { lo: -1.0, hi: 3.0 }).mask(&d).is_err());
    assert!(GridIdeal::new(VanishingSet::Boundary).mask(&d).is_err());
}
