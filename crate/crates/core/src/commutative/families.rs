//! Seeded function families for the commutative examples.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use super::{Domain, GridFunction, DEFAULT_LIPSCHITZ};
use crate::rng::Rng;

pub fn interval_0_2() -> Domain {
    Domain::Interval { left: 0.0, right: 2.0, n_samples: 201 }
}

pub fn interval_0_1() -> Domain {
    Domain::Interval { left: 0.0, right: 1.0, n_samples: 201 }
}

pub fn disk() -> Domain {
    Domain::Disk { n_radii: 33, n_angles: 128 }
}

/// `f` on `[0, 2]` with `|f| >= 0.15` on `[0, 1]`.
pub fn nonvanishing_on_unit(rng: &mut Rng) -> GridFunction {
    let scale = Complex64::from_polar(rng.uniform_in(0.5, 2.0), rng.uniform_in(0.0, TAU));
    let slope = rng.uniform_in(-0.4, 0.4);
    let amp = rng.uniform_in(-0.3, 0.3);
    let freq = rng.uniform_in(1.0, 4.0);
    let phase = rng.uniform_in(0.0, TAU);
    let tail = rng.uniform_in(-1.0, 1.0);
    GridFunction::sample(interval_0_2(), DEFAULT_LIPSCHITZ, |z| {
        let x = z.re;
        let bend = if x > 1.0 { tail * (x - 1.0) } else { 0.0 };
        scale * (1.0 + slope * x + amp * (freq * x + phase).sin() + bend)
    })
    .expect("family is Lipschitz")
}

/// Smoothstep from 0 to 1 centred at `center` over `width`.
pub fn smoothed_step(center: f64, width: f64, x: f64) -> f64 {
    let t = ((x - center) / width + 0.5).clamp(0.0, 1.0);
    t * t * (3.0 - 2.0 * t)
}

/// Real candidate lifts of `x + J` for `J` the endpoint ideal of `C([0, 1])`:
/// either `x` plus a sine perturbation fixing the endpoints or a smoothed
/// step.
pub fn interval_candidate(rng: &mut Rng) -> GridFunction {
    let lipschitz = 40.0;
    if rng.coin(0.5) {
        let b: Vec<f64> = (0..3).map(|_| rng.uniform_in(-0.1, 0.1)).collect();
        GridFunction::sample(interval_0_1(), lipschitz, |z| {
            let x = z.re;
            let bump: f64 = b.iter().enumerate().map(|(k, bk)| bk * ((k + 1) as f64 * PI * x).sin()).sum();
            Complex64::new(x + bump, 0.0)
        })
    } else {
        let center = rng.uniform_in(0.2, 0.8);
        let width = rng.uniform_in(0.05, 0.3);
        GridFunction::sample(interval_0_1(), lipschitz, |z| Complex64::new(smoothed_step(center, width, z.re), 0.0))
    }
    .expect("family is Lipschitz")
}

/// Candidate lifts of `z + J` for `J` the boundary ideal of `C(D)`:
/// `z` times a positive radial factor, a radial phase twist and an angular
/// modulation, all trivial on the boundary.
pub fn disk_candidate(rng: &mut Rng) -> GridFunction {
    let alpha = rng.uniform_in(-0.5, 1.0);
    let twist = rng.uniform_in(-PI, PI);
    let eps = rng.uniform_in(0.0, 0.4);
    let k = rng.range(1, 4) as f64;
    GridFunction::sample(disk(), DEFAULT_LIPSCHITZ, |z| {
        let r = z.norm();
        let inner = 1.0 - r * r;
        let modulation = 1.0 + eps * inner * (k * z.arg()).cos();
        z * (1.0 + alpha * inner) * modulation * Complex64::from_polar(1.0, twist * (1.0 - r))
    })
    .expect("family is Lipschitz")
}
