#![allow(dead_code)]

use eos::quadrature::LineQuadrature;
use eos::types::GridSpec;
use std::collections::BTreeMap;

/// Tensor Gauss rule on a box.
fn box_gauss<F: Fn(f64, f64, f64) -> f64>(f: &F, lo: [f64; 3], hi: [f64; 3], q: &LineQuadrature) -> f64 {
    let mut s = 0.0;
    for (x, wx) in q.mapped(lo[0], hi[0]) {
        for (y, wy) in q.mapped(lo[1], hi[1]) {
            for (z, wz) in q.mapped(lo[2], hi[2]) {
                s += wx * wy * wz * f(x, y, z);
            }
        }
    }
    s
}

fn dist_to_origin(lo: [f64; 3], hi: [f64; 3]) -> f64 {
    (0..3)
        .map(|a| (0.0f64).clamp(lo[a], hi[a]).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Splits along the longest side until every piece is no larger than its
/// distance to the singular point, then applies tensor Gauss.
fn adaptive<F: Fn(f64, f64, f64) -> f64>(f: &F, lo: [f64; 3], hi: [f64; 3], q: &LineQuadrature) -> f64 {
    let side = [hi[0] - lo[0], hi[1] - lo[1], hi[2] - lo[2]];
    let (ax, longest) = side
        .iter()
        .enumerate()
        .fold((0, 0.0), |m, (i, &s)| if s > m.1 { (i, s) } else { m });
    if longest <= dist_to_origin(lo, hi) {
        return box_gauss(f, lo, hi, q);
    }
    let mid = 0.5 * (lo[ax] + hi[ax]);
    let mut h1 = hi;
    h1[ax] = mid;
    let mut l2 = lo;
    l2[ax] = mid;
    adaptive(f, lo, h1, q) + adaptive(f, l2, hi, q)
}

pub const LEVELS: i32 = 12;

/// Brute-force integral of `f` over [0,a] x [-b/2,b/2] x [-c/2,c/2] with the
/// singular point at the origin. The cell is split into dyadic shells
/// B_k \ B_{k+1} (B_k the cell scaled by 2^-k); each shell is 17 boxes. The
/// innermost box B_LEVELS is the cell scaled by 2^-LEVELS, so its integral is
/// 2^(-deg LEVELS) times the total, with deg the homogeneity degree of the
/// integrand over the volume.
pub fn graded_volume<F: Fn(f64, f64, f64) -> f64>(f: F, deg: i32, a: f64, b: f64, c: f64) -> f64 {
    let q = LineQuadrature::new(12);
    let mut total = 0.0;
    for k in 0..LEVELS {
        let s = 0.5f64.powi(k);
        let (a, b, c) = (a * s, b * s, c * s);
        let xs = [0.0, a / 2.0, a];
        let ys = [-b / 2.0, -b / 4.0, b / 4.0, b / 2.0];
        let zs = [-c / 2.0, -c / 4.0, c / 4.0, c / 2.0];
        for i in 0..2 {
            for j in 0..3 {
                for l in 0..3 {
                    if i == 0 && j == 1 && l == 1 {
                        continue;
                    }
                    total += adaptive(&f, [xs[i], ys[j], zs[l]], [xs[i + 1], ys[j + 1], zs[l + 1]], &q);
                }
            }
        }
    }
    total / (1.0 - 0.5f64.powi(deg * LEVELS))
}

pub fn oracle_f1(a: f64, b: f64, c: f64) -> f64 {
    graded_volume(|x, y, z| 1.0 / (x * x + y * y + z * z).sqrt(), 2, a, b, c)
}

pub fn oracle_f2x(a: f64, b: f64, c: f64) -> f64 {
    graded_volume(|x, y, z| x / (x * x + y * y + z * z), 2, a, b, c)
}

pub fn oracle_f3x(a: f64, b: f64, c: f64) -> f64 {
    graded_volume(|x, y, z| x / (x * x + y * y + z * z).powf(1.5), 1, a, b, c)
}

/// Integral of 1/r over a centred b x c rectangle in polar coordinates,
/// evaluated in closed form.
pub fn g1_closed_form(b: f64, c: f64) -> f64 {
    2.0 * b * (c / b).asinh() + 2.0 * c * (b / c).asinh()
}

fn adaptive2<F: Fn(f64, f64) -> f64>(f: &F, lo: [f64; 2], hi: [f64; 2], q: &LineQuadrature) -> f64 {
    let side = [hi[0] - lo[0], hi[1] - lo[1]];
    let ax = if side[0] >= side[1] { 0 } else { 1 };
    let d = ((0.0f64).clamp(lo[0], hi[0]).powi(2) + (0.0f64).clamp(lo[1], hi[1]).powi(2)).sqrt();
    if side[ax] <= d {
        let mut s = 0.0;
        for (y, wy) in q.mapped(lo[0], hi[0]) {
            for (z, wz) in q.mapped(lo[1], hi[1]) {
                s += wy * wz * f(y, z);
            }
        }
        return s;
    }
    let mid = 0.5 * (lo[ax] + hi[ax]);
    let mut h1 = hi;
    h1[ax] = mid;
    let mut l2 = lo;
    l2[ax] = mid;
    adaptive2(f, lo, h1, q) + adaptive2(f, l2, hi, q)
}

/// Same integral by graded 2D quadrature (dyadic rings, analytic tail).
pub fn g1_graded(b: f64, c: f64) -> f64 {
    let q = LineQuadrature::new(16);
    let kernel = |y: f64, z: f64| 1.0 / (y * y + z * z).sqrt();
    let mut total = 0.0;
    for k in 0..LEVELS {
        let s = 0.5f64.powi(k);
        let (b, c) = (b * s, c * s);
        let ys = [-b / 2.0, -b / 4.0, b / 4.0, b / 2.0];
        let zs = [-c / 2.0, -c / 4.0, c / 4.0, c / 2.0];
        for j in 0..3 {
            for l in 0..3 {
                if j == 1 && l == 1 {
                    continue;
                }
                total += adaptive2(&kernel, [ys[j], zs[l]], [ys[j + 1], zs[l + 1]], &q);
            }
        }
    }
    total / (1.0 - 0.5f64.powi(LEVELS))
}

/// Symmetric-node quadrature of the g2 and g3 kernels over a centred patch.
pub fn g23_symmetric(b: f64, c: f64) -> ([f64; 2], [f64; 2]) {
    let q = LineQuadrature::new(20);
    let (mut g2, mut g3) = ([0.0; 2], [0.0; 2]);
    for (y, wy) in q.mapped(-b / 2.0, b / 2.0) {
        for (z, wz) in q.mapped(-c / 2.0, c / 2.0) {
            let r2 = y * y + z * z;
            let w = wy * wz;
            g2[0] += w * y / r2;
            g2[1] += w * z / r2;
            g3[0] += w * y / r2.powf(1.5);
            g3[1] += w * z / r2.powf(1.5);
        }
    }
    (g2, g3)
}

/// Column -> value of the e1 row at node (0, 0, 0), written out term by term
/// from the Lax-Wendroff expansion with the one-sided corner weights.
pub fn corner_row_listing(spec: &GridSpec, dt: f64) -> BTreeMap<usize, f64> {
    let [dx, dy, dz] = spec.spacing();
    let (l1, l2, nz) = (spec.lambda1(), spec.lambda2(), spec.n[2]);
    let w1 = dt * dt / 2.0;
    let w2 = dt;
    let (u1, u2, u3) = (w1 / (dy * dy), w2 / dy, w1 / (3.0 * dx * dy));
    let (v1, v2, v3) = (w1 / (dz * dz), w2 / dz, w1 / (3.0 * dx * dz));
    let g1 = 0;
    let (g2, g3, g5, g6) = (l1, 2 * l1, 4 * l1, 5 * l1);
    let mut want = BTreeMap::new();
    want.insert(g1, 1.0 - 5.0 * u1 - 5.0 * v1);
    want.insert(g1 + nz, 2.0 * u1);
    want.insert(g1 + 2 * nz, -u1 / 5.0);
    want.insert(g6, 0.5 * u2);
    want.insert(g6 + nz, 2.0 / 3.0 * u2);
    want.insert(g6 + 2 * nz, -u2 / 10.0);
    want.insert(g2, 9.0 * u3);
    want.insert(g2 + nz, -5.0 * u3);
    want.insert(g2 + l2, -5.0 * u3);
    want.insert(g2 + l2 + nz, u3);
    want.insert(g1 + 1, 2.0 * v1);
    want.insert(g1 + 2, -v1 / 5.0);
    // sign follows the -w2 (b2)_z term of the row equation
    want.insert(g5, -0.5 * v2);
    want.insert(g5 + 1, -2.0 / 3.0 * v2);
    want.insert(g5 + 2, v2 / 10.0);
    want.insert(g3, 9.0 * v3);
    want.insert(g3 + 1, -5.0 * v3);
    want.insert(g3 + l2, -5.0 * v3);
    want.insert(g3 + l2 + 1, v3);
    want
}
