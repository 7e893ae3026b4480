//! Weakly singular cell and patch integrals with the singular point at the
//! centre of a cell face.
//!
//! Local frame: the cell is [0, dx] x [-dy/2, dy/2] x [-dz/2, dz/2] and the
//! singular point x_p is the origin, the centre of face S1 (normal (-1, 0, 0)).
//! Every volume integral is reduced by the divergence theorem to surface
//! integrals, and each surface integral in turn to line integrals around the
//! face boundary plus an exact core from the excluded circle or half-circle.

use crate::quadrature::LineQuadrature;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularCell {
    pub dx: f64,
    pub dy: f64,
    pub dz: f64,
}

impl SingularCell {
    pub fn new(dx: f64, dy: f64, dz: f64) -> Option<Self> {
        if dx > 0.0 && dy > 0.0 && dz > 0.0 && (dx + dy + dz).is_finite() {
            Some(Self { dx, dy, dz })
        } else {
            None
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            dx: s * self.dx,
            dy: s * self.dy,
            dz: s * self.dz,
        }
    }
}

/// Integral of g over [lo, hi] after s = w tan(theta), which flattens a
/// 1/(w^2 + s^2) peak at s = 0.
fn peaked<F: Fn(f64) -> f64>(q: &LineQuadrature, w: f64, lo: f64, hi: f64, g: F) -> f64 {
    q.integrate((lo / w).atan(), (hi / w).atan(), |th| {
        let c = th.cos();
        g(w * th.tan()) * w / (c * c)
    })
}

/// l21 = -pi dy / 2, the half-circle core on faces S2 and S5.
pub fn l21(cell: &SingularCell) -> f64 {
    -PI * cell.dy / 2.0
}

/// l31 = -pi dz / 2, the half-circle core on faces S3 and S6.
pub fn l31(cell: &SingularCell) -> f64 {
    -PI * cell.dz / 2.0
}

/// Full-circle core on the face S4 opposite x_p: s4 = 2 dx (l41 + l42) - 2 pi dx^2.
pub fn f1_face4_core(cell: &SingularCell) -> f64 {
    -2.0 * PI * cell.dx * cell.dx
}

/// Integral of 1/r over the cell.
pub fn f1(cell: &SingularCell, q: &LineQuadrature) -> f64 {
    let SingularCell { dx: a, dy: b, dz: c } = *cell;
    let (a2, b2, c2) = (a * a, b * b / 4.0, c * c / 4.0);
    // faces y = -+dy/2
    let l22 = (c / 2.0) * peaked(q, c / 2.0, 0.0, a, |x| (x * x + b2 + c2).sqrt() / (x * x + c2));
    let l23 = a * peaked(q, a, -c / 2.0, c / 2.0, |z| (a2 + b2 + z * z).sqrt() / (a2 + z * z));
    // faces z = -+dz/2
    let l32 = (b / 2.0) * peaked(q, b / 2.0, 0.0, a, |x| (x * x + b2 + c2).sqrt() / (x * x + b2));
    let l33 = a * peaked(q, a, -b / 2.0, b / 2.0, |y| (a2 + c2 + y * y).sqrt() / (a2 + y * y));
    // face x = dx
    let l41 = (b / 2.0) * peaked(q, b / 2.0, -c / 2.0, c / 2.0, |z| (a2 + b2 + z * z).sqrt() / (b2 + z * z));
    let l42 = (c / 2.0) * peaked(q, c / 2.0, -b / 2.0, b / 2.0, |y| (a2 + c2 + y * y).sqrt() / (c2 + y * y));
    (b / 2.0) * (l21(cell) + 2.0 * l22 + l23)
        + (c / 2.0) * (l31(cell) + 2.0 * l32 + l33)
        + a * (l41 + l42)
        + f1_face4_core(cell) / 2.0
}

/// -pi ln(dx^2), the circle core of the x = dx face in f2.
pub fn f2_core(cell: &SingularCell) -> f64 {
    -PI * (cell.dx * cell.dx).ln()
}

/// Integral of (x' - x_p)/|x' - x_p|^2 over the cell; only the x component is nonzero.
pub fn f2(cell: &SingularCell, q: &LineQuadrature) -> [f64; 3] {
    let SingularCell { dx: a, dy: b, dz: c } = *cell;
    let a2 = a * a;
    let phi = |r: f64, big_a: f64| 1.0 / (r * r) - big_a * (r / big_a).atan() / (r * r * r);
    // I1 on the faces y = -+dy/2 (A = dy/2), I2 on z = -+dz/2 (A = dz/2)
    let side = |t: f64, s: f64| {
        let big_a = t / 2.0;
        let edge = s * peaked(q, s / 2.0, 0.0, a, |x| x * phi((x * x + s * s / 4.0).sqrt(), big_a));
        let far = a2 * peaked(q, a, -s / 2.0, s / 2.0, |z| phi((a2 + z * z).sqrt(), big_a));
        edge + far
    };
    let i1 = side(b, c);
    let i2 = side(c, b);
    let (b2, c2) = (b * b / 4.0, c * c / 4.0);
    let i3 = (b / 2.0) * peaked(q, b / 2.0, -c / 2.0, c / 2.0, |z| (b2 + a2 + z * z).ln() / (b2 + z * z))
        + (c / 2.0) * peaked(q, c / 2.0, -b / 2.0, b / 2.0, |y| (c2 + a2 + y * y).ln() / (c2 + y * y));
    [0.5 * (b * i1 + c * i2 + a2 * (i3 + f2_core(cell))), 0.0, 0.0]
}

/// -2 dy ln(dy/2) - 2 dz ln(dz/2), the half-circle cores of the side faces in f3.
pub fn f3_log_core(cell: &SingularCell) -> f64 {
    -2.0 * cell.dy * (cell.dy / 2.0).ln() - 2.0 * cell.dz * (cell.dz / 2.0).ln()
}

/// 2 pi dx, the circle core of the x = dx face in f3.
pub fn f3_face4_core(cell: &SingularCell) -> f64 {
    2.0 * PI * cell.dx
}

/// Integral of (x' - x_p)/|x' - x_p|^3 over the cell; only the x component is nonzero.
pub fn f3(cell: &SingularCell, q: &LineQuadrature) -> [f64; 3] {
    let SingularCell { dx: a, dy: b, dz: c } = *cell;
    let a2 = a * a;
    let phi = |r: f64, big_a: f64| {
        let s = (r * r + big_a * big_a).sqrt();
        (s + r).ln() / (r * r * r) - 1.0 / (r * r * s)
    };
    let side = |t: f64, s: f64| {
        let big_a = t / 2.0;
        let edge = s * peaked(q, s / 2.0, 0.0, a, |x| x * phi((x * x + s * s / 4.0).sqrt(), big_a));
        let far = a2 * peaked(q, a, -s / 2.0, s / 2.0, |z| phi((a2 + z * z).sqrt(), big_a));
        edge + far
    };
    let i1 = side(b, c);
    let i2 = side(c, b);
    let (b2, c2) = (b * b / 4.0, c * c / 4.0);
    let i3 = -b * peaked(q, b / 2.0, -c / 2.0, c / 2.0, |z| 1.0 / ((b2 + z * z) * (a2 + b2 + z * z).sqrt()))
        - c * peaked(q, c / 2.0, -b / 2.0, b / 2.0, |y| 1.0 / ((c2 + y * y) * (a2 + c2 + y * y).sqrt()));
    [
        b * i1 + c * i2 + f3_log_core(cell) + a2 * i3 + f3_face4_core(cell),
        0.0,
        0.0,
    ]
}

/// Integral of 1/|x' - x_p| over a dy x dz patch centred at x_p, as the sum of
/// the four edge integrals of (x' - x_p).n / |x' - x_p|.
pub fn g1(dy: f64, dz: f64, q: &LineQuadrature) -> f64 {
    let (b2, c2) = (dy * dy / 4.0, dz * dz / 4.0);
    let ey = (dy / 2.0) * peaked(q, dy / 2.0, -dz / 2.0, dz / 2.0, |z| 1.0 / (b2 + z * z).sqrt());
    let ez = (dz / 2.0) * peaked(q, dz / 2.0, -dy / 2.0, dy / 2.0, |y| 1.0 / (c2 + y * y).sqrt());
    2.0 * ey + 2.0 * ez
}

/// Principal value of (x' - x_p)/|x' - x_p|^2 over a centred patch: zero by symmetry.
pub fn g2(_dy: f64, _dz: f64) -> [f64; 3] {
    [0.0; 3]
}

/// Principal value of (x' - x_p)/|x' - x_p|^3 over a centred patch: zero by symmetry.
pub fn g3(_dy: f64, _dz: f64) -> [f64; 3] {
    [0.0; 3]
}

/// All singular values for one cell; the patch is the cell's S1 face.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularValues {
    pub f1: f64,
    pub f2x: f64,
    pub f3x: f64,
    pub g1: f64,
}

pub fn tabulate(cell: &SingularCell, q: &LineQuadrature) -> SingularValues {
    SingularValues {
        f1: f1(cell, q),
        f2x: f2(cell, q)[0],
        f3x: f3(cell, q)[0],
        g1: g1(cell.dy, cell.dz, q),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn degenerate_cells_rejected() {
        assert!(SingularCell::new(0.0, 1.0, 1.0).is_none());
        assert!(SingularCell::new(1.0, -1.0, 1.0).is_none());
        assert!(SingularCell::new(1.0, 1.0, f64::INFINITY).is_none());
    }

    #[test]
    fn square_patch_closed_form() {
        let q = LineQuadrature::production();
        let h = 0.37;
        let want = 4.0 * h * (1.0 + 2f64.sqrt()).ln();
        assert!((g1(h, h, &q) - want).abs() < 1e-13 * want);
    }

    #[test]
    fn f1_positive_for_thin_cells() {
        let q = LineQuadrature::production();
        for c in [(0.01, 1.0, 1.0), (1.0, 0.01, 3.0), (5.0, 5.0, 0.02)] {
            let cell = SingularCell::new(c.0, c.1, c.2).unwrap();
            assert!(f1(&cell, &q) > 0.0);
        }
    }
}
