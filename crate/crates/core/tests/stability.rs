use eos::engine::{empirical_blowup_check, run, Method, RunConfig};
use eos::sources::{DipoleBlob, Drive, ManufacturedSolution, Pulse};
use eos::stability::{spectral_radius, stability_report, TOL_EIG};
use eos::types::{GridSpec, MaterialParams, Vec3};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn finds_dominant_diagonal_entry(entries in prop::collection::vec(-3.0f64..3.0, 2..40)) {
        let a = DMatrix::from_diagonal(&DVector::from_vec(entries.clone()));
        let want = entries.iter().map(|x| x.abs()).fold(0.0, f64::max);
        let e = spectral_radius(&a, 1e-12, 200);
        prop_assert!((e.radius - want).abs() < 1e-9 * (1.0 + want));
    }

    #[test]
    fn finds_dominant_complex_pair(modulus in 0.5f64..2.0, angle in 0.1f64..3.0, n in 4usize..30) {
        let mut a = DMatrix::<f64>::zeros(n, n);
        for i in 2..n {
            a[(i, i)] = 0.45 * modulus * ((i as f64) / n as f64 - 0.5);
        }
        a[(0, 0)] = modulus * angle.cos();
        a[(0, 1)] = -modulus * angle.sin();
        a[(1, 0)] = modulus * angle.sin();
        a[(1, 1)] = modulus * angle.cos();
        let e = spectral_radius(&a, 1e-12, 200);
        prop_assert!((e.radius - modulus).abs() < 1e-9);
    }
}

#[test]
fn stable_and_unstable_panels() {
    let spec = GridSpec::cube(7, 1.0).unwrap();
    let stable = stability_report(&spec, 0.45, 1.0, 1.5).unwrap();
    assert!(stable.converged && stable.stable, "{stable:?}");
    let unstable = stability_report(&spec, 0.49, 1.0, 1.0).unwrap();
    assert!(unstable.spectral_radius > 1.0 + TOL_EIG, "{unstable:?}");
}

#[test]
fn radius_tends_to_one_as_tau_shrinks() {
    let spec = GridSpec::cube(5, 1.0).unwrap();
    for tau in [0.04, 0.02, 0.01] {
        let r = stability_report(&spec, tau, 1.0, 1.0).unwrap();
        assert!((r.spectral_radius - 1.0).abs() <= 0.05 * tau, "{r:?}");
    }
}

fn outside(eps1: f64, steps: usize) -> RunConfig {
    let src = DipoleBlob::new(Vec3::new(-2.0, 0.0, 0.0), 0.5, Vec3::new(0.0, 0.0, 1.0), Pulse::new(1.5, 1.0).unwrap()).unwrap();
    RunConfig {
        method: Method::Eos,
        spec: GridSpec::cube(9, 1.0).unwrap(),
        mat: MaterialParams::inside(1.0, eps1).unwrap(),
        tau: 0.45,
        steps,
        probes: vec![Vec3::new(0.1, 0.05, -0.05)],
        drive: Drive::Outside(src),
        workers: 1,
    }
}

#[test]
fn raising_eps1_narrows_the_stable_set() {
    let ladder = [1.2, 1.5];
    let flags: Vec<bool> = ladder
        .iter()
        .map(|&e| empirical_blowup_check(&outside(e, 300), 300).unwrap().unstable)
        .collect();
    assert!(!flags[0]);
    assert!(flags[1]);
    assert!(flags.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn zero_drive_gives_exactly_zero_fields() {
    let spec = GridSpec::cube(5, 1.0).unwrap();
    let mat = MaterialParams::inside(1.0, 1.5).unwrap();
    let m = ManufacturedSolution::bubble(&spec, Vec3::zeros(), Pulse::new(0.0, 1.0).unwrap(), mat);
    let cfg = RunConfig {
        method: Method::Eos,
        spec,
        mat,
        tau: 0.45,
        steps: 30,
        probes: vec![Vec3::zeros()],
        drive: Drive::Manufactured(m),
        workers: 2,
    };
    let rep = empirical_blowup_check(&cfg, 30).unwrap();
    assert_eq!(rep.exponent, 0.0);
    assert!(!rep.unstable);
    let r = run(&cfg).unwrap();
    assert!(r.final_state.q.iter().all(|x| *x == 0.0));
    assert!(r.probes[0].iter().all(|v| v.iter().all(|x| *x == 0.0)));
    assert_eq!(r.manufactured_error, Some(0.0));
}
