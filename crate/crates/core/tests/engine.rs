use eos::engine::{
    exact_probe_series, run, run_manufactured_test, run_three_method_comparison, Method, RunConfig,
};
use eos::sources::{DipoleBlob, Drive, ManufacturedSolution, Pulse};
use eos::types::{GridSpec, MaterialParams, Vec3};
use eos::EosError;

fn blob(moment: f64) -> DipoleBlob {
    DipoleBlob::new(Vec3::new(-2.0, 0.0, 0.0), 0.5, Vec3::new(0.0, moment, moment), Pulse::new(1.5, 1.0).unwrap()).unwrap()
}

fn outside(method: Method, mat: MaterialParams, moment: f64, steps: usize, workers: usize) -> RunConfig {
    RunConfig {
        method,
        spec: GridSpec::cube(5, 1.0).unwrap(),
        mat,
        tau: 0.45,
        steps,
        probes: vec![Vec3::new(0.1, 0.05, -0.05), Vec3::new(-0.3, 0.2, 0.25)],
        drive: Drive::Outside(blob(moment)),
        workers,
    }
}

#[test]
fn zero_source_gives_zero_probes_for_every_method() {
    for m in [Method::Eos, Method::LwExact, Method::Representation] {
        let r = run(&outside(m, MaterialParams::vacuum(), 0.0, 40, 1)).unwrap();
        assert!(r.probes.iter().flatten().all(|v| v.iter().all(|x| *x == 0.0)), "{m:?}");
        assert!(r.final_state.q.iter().all(|x| *x == 0.0));
    }
}

#[test]
fn series_lengths_equal_step_count() {
    for m in [Method::Eos, Method::LwExact, Method::Representation] {
        let r = run(&outside(m, MaterialParams::vacuum(), 1.0, 17, 1)).unwrap();
        assert_eq!(r.times.len(), 17);
        assert_eq!(r.norms.len(), 17);
        assert!(r.probes.iter().all(|p| p.len() == 17));
        assert!(r.blowup_step.is_none());
    }
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let mat = MaterialParams::inside(1.0, 1.2).unwrap();
    let base = run(&outside(Method::Eos, mat, 1.0, 60, 1)).unwrap();
    for w in [2, 3, 4] {
        assert_eq!(run(&outside(Method::Eos, mat, 1.0, 60, w)).unwrap(), base, "workers = {w}");
    }
    let rep = run(&outside(Method::Representation, MaterialParams::vacuum(), 1.0, 30, 1)).unwrap();
    assert_eq!(run(&outside(Method::Representation, MaterialParams::vacuum(), 1.0, 30, 4)).unwrap(), rep);
}

#[test]
fn doubling_the_source_doubles_the_fields() {
    let mat = MaterialParams::inside(1.3, 1.1).unwrap();
    let a = run(&outside(Method::Eos, mat, 1.0, 60, 1)).unwrap();
    let b = run(&outside(Method::Eos, mat, 2.0, 60, 1)).unwrap();
    let scale = a.final_state.q.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    assert!(scale > 0.0);
    for (x, y) in a.final_state.q.iter().zip(&b.final_state.q) {
        assert!((2.0 * x - y).abs() <= 1e-12 * scale);
    }
    for (p, q) in a.probes[0].iter().zip(&b.probes[0]) {
        for k in 0..6 {
            assert!((2.0 * p[k] - q[k]).abs() <= 1e-12 * (scale + p[k].abs()));
        }
    }
}

#[test]
fn vacuum_full_scheme_equals_exact_boundary_scheme() {
    let e = run(&outside(Method::Eos, MaterialParams::vacuum(), 1.0, 50, 1)).unwrap();
    let l = run(&outside(Method::LwExact, MaterialParams::vacuum(), 1.0, 50, 1)).unwrap();
    assert_eq!(e.final_state, l.final_state);
}

#[test]
fn stable_step_tracks_the_exact_field() {
    let cfg = RunConfig {
        drive: Drive::Outside(DipoleBlob::new(Vec3::new(-2.0, 0.0, 0.0), 0.5, Vec3::new(0.0, 0.0, 1.0), Pulse::new(1.5, 4.0).unwrap()).unwrap()),
        spec: GridSpec::cube(7, 1.0).unwrap(),
        ..outside(Method::LwExact, MaterialParams::vacuum(), 1.0, 150, 1)
    };
    let exact = exact_probe_series(&cfg).unwrap();
    assert_eq!(exact[0].len(), 150);
    for s in run_three_method_comparison(&cfg).unwrap() {
        assert!(s.error.rel_l2 < 0.1, "{:?} {:?}", s.method, s.error);
        assert!(s.blowup_step.is_none());
    }
}

#[test]
fn zero_amplitude_manufactured_fields_have_zero_error() {
    let spec = GridSpec::cube(5, 1.0).unwrap();
    let mat = MaterialParams::inside(1.0, 2.5).unwrap();
    let m = ManufacturedSolution::bubble(&spec, Vec3::zeros(), Pulse::new(0.0, 1.0).unwrap(), mat);
    let cfg = RunConfig {
        method: Method::Eos,
        spec,
        mat,
        tau: 0.45,
        steps: 20,
        probes: vec![],
        drive: Drive::Manufactured(m),
        workers: 1,
    };
    for s in run_manufactured_test(&cfg).unwrap() {
        assert_eq!(s.error, 0.0);
        assert!(s.bounded);
    }
}

#[test]
fn manufactured_methods_agree_inside_the_stable_window() {
    let spec = GridSpec::cube(7, 1.0).unwrap();
    let mat = MaterialParams::inside(1.0, 1.2).unwrap();
    let m = ManufacturedSolution::bubble(&spec, Vec3::new(0.3, -0.5, 1.0), Pulse::new(0.0, 1.0).unwrap(), mat);
    let cfg = RunConfig {
        method: Method::Eos,
        spec,
        mat,
        tau: 0.45,
        steps: 60,
        probes: vec![],
        drive: Drive::Manufactured(m),
        workers: 1,
    };
    let s = run_manufactured_test(&cfg).unwrap();
    assert!(s.iter().all(|x| x.bounded), "{s:?}");
    assert!((s[0].error - s[1].error).abs() < 0.25 * s[1].error, "{s:?}");
}

#[test]
fn invalid_configs_rejected() {
    let mut cfg = outside(Method::LwExact, MaterialParams::vacuum(), 1.0, 5, 1);
    cfg.probes = vec![Vec3::new(0.6, 0.0, 0.0)];
    assert!(matches!(run(&cfg), Err(EosError::NotInside(_))));

    let cfg = outside(Method::LwExact, MaterialParams::inside(1.0, 2.0).unwrap(), 1.0, 5, 1);
    assert!(matches!(run(&cfg), Err(EosError::Config(_))));

    let mut cfg = outside(Method::Eos, MaterialParams::vacuum(), 1.0, 5, 1);
    cfg.drive = Drive::Outside(DipoleBlob::new(Vec3::new(-0.7, 0.0, 0.0), 0.5, Vec3::z(), Pulse::new(0.0, 1.0).unwrap()).unwrap());
    assert!(matches!(run(&cfg), Err(EosError::Config(_))));

    let mut cfg = outside(Method::Eos, MaterialParams::vacuum(), 1.0, 5, 0);
    assert!(run(&cfg).is_err());
    cfg.workers = 1;
    cfg.tau = -0.1;
    assert!(matches!(run(&cfg), Err(EosError::InvalidStep(_))));

    let cfg = outside(Method::Eos, MaterialParams::inside(1.0, 1.5).unwrap(), 1.0, 5, 1);
    assert!(run_three_method_comparison(&cfg).is_err());
    assert!(run_manufactured_test(&cfg).is_err());
}
