use eos::boundary::{eval_inside, BoundaryOperator, SurfaceInputs};
use eos::history::History;
use eos::quadrature::LineQuadrature;
use eos::sources::{DipoleBlob, Pulse};
use eos::types::{build_grid, Grid, GridSpec, MaterialParams, Vec3};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand::rngs::StdRng;

fn blob() -> DipoleBlob {
    DipoleBlob::new(Vec3::new(-2.0, 0.0, 0.0), 0.5, Vec3::new(0.0, 0.0, 1.0), Pulse::new(1.5, 1.0).unwrap()).unwrap()
}

fn exact_history(grid: &Grid, dt: f64, steps: usize) -> History {
    let q = LineQuadrature::new(16);
    let mat = MaterialParams::vacuum();
    let mut h = History::new(6 * grid.num_surface(), steps + 1, dt);
    for n in 0..=steps {
        let mut lv = Vec::with_capacity(6 * grid.num_surface());
        for sp in &grid.surface {
            let (e, b) = blob().fields(&sp.position, n as f64 * dt, &mat, &q).unwrap();
            lv.extend_from_slice(&[e[0], e[1], e[2], b[0], b[1], b[2]]);
        }
        h.push(lv).unwrap();
    }
    h
}

#[test]
fn representation_reproduces_incident_field() {
    let grid = build_grid(&GridSpec::cube(9, 1.0).unwrap()).unwrap();
    let dt = 0.05;
    let steps = 100;
    let h = exact_history(&grid, dt, steps);
    let q = LineQuadrature::new(4);
    let q16 = LineQuadrature::new(16);
    let mat = MaterialParams::vacuum();
    let x = Vec3::new(0.05, 0.02, -0.03);
    let (mut num, mut den, mut bnum, mut bden) = (0.0, 0.0, 0.0, 0.0);
    for n in 0..=steps {
        let (e, b) = eval_inside(&grid, &x, n, &h, 1.0, &q).unwrap();
        let (ee, be) = blob().fields(&x, n as f64 * dt, &mat, &q16).unwrap();
        num += (e - ee).norm_squared();
        den += ee.norm_squared();
        bnum += (b - be).norm_squared();
        bden += be.norm_squared();
    }
    assert!((num / den).sqrt() < 0.05);
    assert!((bnum / bden).sqrt() < 0.05);
}

#[test]
fn representation_of_zero_history_is_zero() {
    let grid = build_grid(&GridSpec::cube(5, 1.0).unwrap()).unwrap();
    let mut h = History::new(6 * grid.num_surface(), 32, 0.1);
    for _ in 0..20 {
        h.push(vec![0.0; 6 * grid.num_surface()]).unwrap();
    }
    let (e, b) = eval_inside(&grid, &Vec3::new(0.1, -0.2, 0.05), 19, &h, 1.0, &LineQuadrature::new(4)).unwrap();
    assert_eq!((e, b), (Vec3::zeros(), Vec3::zeros()));
}

#[test]
fn representation_is_time_shift_covariant() {
    let grid = build_grid(&GridSpec::cube(5, 1.0).unwrap()).unwrap();
    let dt = 0.1;
    let base = exact_history(&grid, dt, 40);
    let shift = 7;
    let mut shifted = History::new(6 * grid.num_surface(), 64, dt);
    for _ in 0..shift {
        shifted.push(vec![0.0; 6 * grid.num_surface()]).unwrap();
    }
    for k in 0..=40 {
        shifted.push(base.level(k).unwrap().to_vec()).unwrap();
    }
    let q = LineQuadrature::new(4);
    let x = Vec3::new(-0.1, 0.2, 0.0);
    for n in [10, 25, 40] {
        let a = eval_inside(&grid, &x, n, &base, 1.0, &q).unwrap();
        let b = eval_inside(&grid, &x, n + shift, &shifted, 1.0, &q).unwrap();
        assert_eq!(a, b);
    }
}

struct Setup {
    op: BoundaryOperator,
    interior: History,
    surface: History,
    incident: Vec<[f64; 6]>,
}

fn random_setup(mat: MaterialParams, n: usize, seed: u64, scale: f64) -> Setup {
    let grid = build_grid(&GridSpec::new([5, 6, 5], [-0.5; 3], [1.0, 1.2, 0.9]).unwrap()).unwrap();
    let dt = 0.04;
    let op = BoundaryOperator::new(&grid, &mat, dt).unwrap();
    let mut rng = StdRng::seed_from_u64(seed);
    let ns = grid.num_surface();
    let l1 = grid.spec.lambda1();
    let depth = History::depth_for(grid.spec.diameter(), mat.c0, dt);
    let mut interior = History::new(3 * l1, depth, dt);
    let mut surface = History::new(6 * ns, depth, dt);
    for k in 0..=n {
        interior.push((0..3 * l1).map(|_| scale * rng.gen_range(-1.0..1.0)).collect()).unwrap();
        if k < n {
            surface.push((0..6 * ns).map(|_| scale * rng.gen_range(-1.0..1.0)).collect()).unwrap();
        }
    }
    let incident = (0..ns).map(|_| [0; 6].map(|_| scale * rng.gen_range(-1.0..1.0))).collect();
    Setup { op, interior, surface, incident }
}

fn update_all(s: &Setup, n: usize) -> Vec<[f64; 6]> {
    let inp = SurfaceInputs {
        n,
        interior: &s.interior,
        surface: &s.surface,
        incident: &s.incident,
        volume: None,
    };
    (0..s.op.grid.num_surface()).map(|p| s.op.update_surface_point(p, &inp).unwrap()).collect()
}

#[test]
fn vacuum_limit_returns_incident_field() {
    let s = random_setup(MaterialParams::vacuum(), 12, 3, 1.0);
    assert_eq!(update_all(&s, 12), s.incident);
}

#[test]
fn zero_inputs_give_zero() {
    let s = random_setup(MaterialParams::inside(1.3, 2.0).unwrap(), 9, 5, 0.0);
    assert!(update_all(&s, 9).iter().all(|v| v.iter().all(|x| *x == 0.0)));
}

#[test]
fn surface_update_is_linear() {
    let mat = MaterialParams::inside(1.4, 1.8).unwrap();
    let n = 10;
    let a = random_setup(mat, n, 11, 1.0);
    let b = random_setup(mat, n, 12, 1.0);
    let (alpha, beta) = (0.7, -1.9);
    let mut c = random_setup(mat, n, 13, 0.0);
    let ns = c.op.grid.num_surface();
    let l1 = c.op.grid.spec.lambda1();
    let comb = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| alpha * p + beta * q).collect::<Vec<_>>();
    c.interior = History::new(3 * l1, 64, c.op.dt);
    c.surface = History::new(6 * ns, 64, c.op.dt);
    for k in 0..=n as i64 {
        c.interior.push(comb(a.interior.level(k).unwrap(), b.interior.level(k).unwrap())).unwrap();
        if k < n as i64 {
            c.surface.push(comb(a.surface.level(k).unwrap(), b.surface.level(k).unwrap())).unwrap();
        }
    }
    c.incident = a.incident.iter().zip(&b.incident).map(|(x, y)| {
        let v = comb(x, y);
        [v[0], v[1], v[2], v[3], v[4], v[5]]
    }).collect();
    let (ua, ub, uc) = (update_all(&a, n), update_all(&b, n), update_all(&c, n));
    for p in 0..ns {
        for k in 0..6 {
            let want = alpha * ua[p][k] + beta * ub[p][k];
            assert!((uc[p][k] - want).abs() < 1e-9 * (1.0 + want.abs()), "point {p} comp {k}");
        }
    }
}

#[test]
fn self_matrix_is_diagonally_dominant() {
    let grid = build_grid(&GridSpec::cube(9, 1.0).unwrap()).unwrap();
    for (mu1, eps1) in [(1.0, 1.2), (1.0, 2.5), (1.5, 1.0), (0.8, 1.7)] {
        let mat = MaterialParams::inside(mu1, eps1).unwrap();
        let op = BoundaryOperator::new(&grid, &mat, 0.45 / 9.0 / mat.c1).unwrap();
        for p in 0..grid.num_surface() {
            let m = op.m1(p).unwrap();
            for r in 0..6 {
                let off: f64 = (0..6).filter(|&c| c != r).map(|c| m[(r, c)].abs()).sum();
                assert!(m[(r, r)].abs() > off, "mu1={mu1} eps1={eps1} point {p} row {r}");
            }
        }
    }
}

fn interpolation_residual(dt: f64) -> [f64; 3] {
    let f = |t: f64| (1.3 * t).sin() + 0.2 * (0.4 * t).cos();
    let df = |t: f64| 1.3 * (1.3 * t).cos() - 0.08 * (0.4 * t).sin();
    let ddf = |t: f64| -1.69 * (1.3 * t).sin() - 0.032 * (0.4 * t).cos();
    let levels = (4.0 / dt).round() as usize;
    let mut h = History::new(1, levels + 1, dt);
    for k in 0..=levels {
        h.push(vec![f(k as f64 * dt)]).unwrap();
    }
    let mut worst = [0.0f64; 3];
    for &t in &[1.13, 2.071, 2.9] {
        let v = h.sample(0, t, levels).unwrap();
        let want = [f(t), df(t), ddf(t)];
        for d in 0..3 {
            worst[d] = worst[d].max((v[d] - want[d]).abs());
        }
    }
    worst
}

#[test]
fn retarded_interpolation_is_at_least_second_order() {
    let coarse = interpolation_residual(0.1);
    let fine = interpolation_residual(0.05);
    for d in 0..3 {
        assert!(coarse[d] / fine[d] > 3.5, "derivative {d}: {} -> {}", coarse[d], fine[d]);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn surface_update_never_reads_newer_levels(n in 1usize..12, p in 0usize..40) {
        let mat = MaterialParams::inside(1.0, 1.5).unwrap();
        let s = random_setup(mat, n, n as u64, 1.0);
        let mut ahead = s.surface.clone();
        ahead.push(vec![0.0; 6 * s.op.grid.num_surface()]).unwrap();
        let inp = SurfaceInputs { n, interior: &s.interior, surface: &ahead, incident: &s.incident, volume: None };
        prop_assert!(s.op.update_surface_point(p, &inp).is_err());
    }
}
