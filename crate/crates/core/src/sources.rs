use crate::error::{EosError, Result};
use crate::poly::{Poly3, PolyVec};
use crate::quadrature::LineQuadrature;
use crate::types::{GridSpec, MaterialParams, Vec3};
use std::f64::consts::PI;

/// s(t) = sin^4(pi (t - t0) / w) on [t0, t0 + w], zero elsewhere. Three times
/// continuously differentiable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pulse {
    pub t0: f64,
    pub width: f64,
}

impl Pulse {
    pub fn new(t0: f64, width: f64) -> Result<Self> {
        if !(width > 0.0 && width.is_finite() && t0.is_finite()) {
            return Err(EosError::Config(format!("pulse width {width} must be positive")));
        }
        Ok(Self { t0, width })
    }

    /// Derivative of order `m` (m = -1 is the antiderivative from t0).
    pub fn eval(&self, t: f64, m: i32) -> f64 {
        let k = PI / self.width;
        let th = k * (t - self.t0);
        if th <= 0.0 {
            return 0.0;
        }
        if th >= PI {
            return if m == -1 { 3.0 * self.width / 8.0 } else { 0.0 };
        }
        // sin^4 = 3/8 - cos(2 th)/2 + cos(4 th)/8
        let shift = m as f64 * PI / 2.0;
        let n2 = 2f64.powi(m);
        let n4 = 4f64.powi(m);
        let mut v = -0.5 * n2 * (2.0 * th + shift).cos() + 0.125 * n4 * (4.0 * th + shift).cos();
        if m == 0 {
            v += 0.375;
        }
        if m == -1 {
            v += 0.375 * th;
            // cos(n th - pi/2)/n vanishes at th = 0, so no constant is needed
        }
        v * k.powi(m)
    }

    pub fn end(&self) -> f64 {
        self.t0 + self.width
    }
}

/// Compactly supported dipole pulse in potential form: P = p g(|x - c|) s(t)
/// with g = (1 - r^2/a^2)^4 inside radius a, J = dP/dt and rho = -div P, so
/// the continuity equation holds identically.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DipoleBlob {
    pub center: Vec3,
    pub radius: f64,
    pub moment: Vec3,
    pub pulse: Pulse,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceSample {
    pub j: Vec3,
    pub rho: f64,
    pub dj: Vec3,
    pub drho: f64,
}

impl DipoleBlob {
    pub fn new(center: Vec3, radius: f64, moment: Vec3, pulse: Pulse) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(EosError::Config(format!("source radius {radius} must be positive")));
        }
        Ok(Self { center, radius, moment, pulse })
    }

    pub fn profile(&self, r: f64) -> f64 {
        let u = 1.0 - r * r / (self.radius * self.radius);
        if u <= 0.0 {
            0.0
        } else {
            u.powi(4)
        }
    }

    fn grad_profile(&self, d: &Vec3) -> Vec3 {
        let a2 = self.radius * self.radius;
        let u = 1.0 - d.norm_squared() / a2;
        if u <= 0.0 {
            Vec3::zeros()
        } else {
            d * (-8.0 * u.powi(3) / a2)
        }
    }

    pub fn eval(&self, x: &Vec3, t: f64) -> SourceSample {
        let d = x - self.center;
        let g = self.profile(d.norm());
        let pg = -self.moment.dot(&self.grad_profile(&d));
        SourceSample {
            j: self.moment * (g * self.pulse.eval(t, 1)),
            rho: pg * self.pulse.eval(t, 0),
            dj: self.moment * (g * self.pulse.eval(t, 2)),
            drho: pg * self.pulse.eval(t, 1),
        }
    }

    /// Minimum distance from the support to the box; positive when disjoint.
    pub fn clearance(&self, spec: &GridSpec) -> f64 {
        let hi = spec.hi();
        let mut d2 = 0.0;
        for a in 0..3 {
            let c = self.center[a];
            let e = if c < spec.lo[a] {
                spec.lo[a] - c
            } else if c > hi[a] {
                c - hi[a]
            } else {
                0.0
            };
            d2 += e * e;
        }
        d2.sqrt() - self.radius
    }

    /// F^(m)(u) with F(u) = c0 * int_0^a r g(r) [S(u + r/c0) - S(u - r/c0)] dr,
    /// S the pulse antiderivative. Outside the support the retarded potential
    /// (1/4pi) int g(x') s(t - R/c0)/R dV' equals F(t - r/c0)/(2r).
    fn radial_wave(&self, u: f64, m: i32, c0: f64, q: &LineQuadrature) -> f64 {
        let a = self.radius;
        let (t0, t1) = (self.pulse.t0, self.pulse.end());
        let mut cuts = vec![0.0, a];
        for v in [c0 * (u - t0), c0 * (t0 - u), c0 * (u - t1), c0 * (t1 - u)] {
            if v > 0.0 && v < a {
                cuts.push(v);
            }
        }
        cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let order = m - 1;
        let mut sum = 0.0;
        for w in cuts.windows(2) {
            sum += q.integrate(w[0], w[1], |r| {
                r * self.profile(r) * (self.pulse.eval(u + r / c0, order) - self.pulse.eval(u - r / c0, order))
            });
        }
        c0 * sum
    }

    /// Incident (E, B) radiated into the outside medium, evaluated in closed
    /// form outside the support.
    pub fn fields(&self, x: &Vec3, t: f64, mat: &MaterialParams, q: &LineQuadrature) -> Result<(Vec3, Vec3)> {
        let d = x - self.center;
        let r = d.norm();
        if r <= self.radius {
            return Err(EosError::Config(format!(
                "field point {:?} lies inside the source support",
                [x[0], x[1], x[2]]
            )));
        }
        let c0 = mat.c0;
        let u = t - r / c0;
        let f0 = self.radial_wave(u, 0, c0, q);
        let f1 = self.radial_wave(u, 1, c0, q);
        let f2 = self.radial_wave(u, 2, c0, q);
        let rh = d / r;
        let p = self.moment;
        let pr = p.dot(&rh);
        let psi_tt = f2 / (2.0 * r);
        let psi_r = -f1 / (2.0 * r * c0) - f0 / (2.0 * r * r);
        let psi_rr = f2 / (2.0 * r * c0 * c0) + f1 / (r * r * c0) + f0 / (r * r * r);
        let grad_p_grad = rh * (psi_rr * pr) + (p - rh * pr) * (psi_r / r);
        let e = -p * (mat.mu0 * psi_tt) + grad_p_grad / mat.eps0;
        let psi_tr = -f2 / (2.0 * r * c0) - f1 / (2.0 * r * r);
        let b = (rh * psi_tr).cross(&p) * mat.mu0;
        Ok((e, b))
    }
}

/// Manufactured interior solution from a polynomial vector potential:
/// E* = -s'(t) a(x), B* = s(t) curl a(x). The required interior sources follow
/// from the inside Maxwell equations.
#[derive(Debug, Clone, PartialEq)]
pub struct ManufacturedSolution {
    pub pulse: Pulse,
    pub mat: MaterialParams,
    pub a: PolyVec,
    pub curl_a: PolyVec,
    pub curl2_a: PolyVec,
    pub curl3_a: PolyVec,
    pub div_a: Poly3,
}

impl ManufacturedSolution {
    /// Fields vanish at every face of the box with their first derivatives.
    pub fn bubble(spec: &GridSpec, alpha: Vec3, pulse: Pulse, mat: MaterialParams) -> Self {
        let hi = spec.hi();
        let mut b = Poly3::constant(1.0);
        for ax in 0..3 {
            b = b.mul(&Poly3::bump(ax, spec.lo[ax], hi[ax]));
        }
        // normalise so that max |bubble| = 1 at the box centre
        let scale = (0..3).map(|ax| (spec.extent[ax] / 2.0).powi(4)).product::<f64>();
        let b = b.scale(1.0 / scale);
        manufacture(PolyVec([b.scale(alpha[0]), b.scale(alpha[1]), b.scale(alpha[2])]), pulse, mat)
    }

    pub fn e(&self, x: &Vec3, t: f64) -> Vec3 {
        self.a.eval(x) * -self.pulse.eval(t, 1)
    }

    pub fn b(&self, x: &Vec3, t: f64) -> Vec3 {
        self.curl_a.eval(x) * self.pulse.eval(t, 0)
    }

    /// J = (1/mu) curl B - eps dE/dt.
    pub fn j(&self, x: &Vec3, t: f64) -> Vec3 {
        self.j_order(x, t, 0)
    }

    pub fn dj(&self, x: &Vec3, t: f64) -> Vec3 {
        self.j_order(x, t, 1)
    }

    fn j_order(&self, x: &Vec3, t: f64, m: i32) -> Vec3 {
        self.curl2_a.eval(x) * (self.pulse.eval(t, m) / self.mat.mu1)
            + self.a.eval(x) * (self.mat.eps1 * self.pulse.eval(t, m + 2))
    }

    pub fn curl_j(&self, x: &Vec3, t: f64) -> Vec3 {
        self.curl3_a.eval(x) * (self.pulse.eval(t, 0) / self.mat.mu1)
            + self.curl_a.eval(x) * (self.mat.eps1 * self.pulse.eval(t, 2))
    }

    /// rho = eps div E.
    pub fn rho(&self, x: &Vec3, t: f64) -> f64 {
        -self.mat.eps1 * self.pulse.eval(t, 1) * self.div_a.eval(x)
    }

    pub fn drho(&self, x: &Vec3, t: f64) -> f64 {
        -self.mat.eps1 * self.pulse.eval(t, 2) * self.div_a.eval(x)
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero()
    }

    /// Spatial factors (P, Q, r) with J = s P + s'' Q and rho = s' r.
    pub fn separable(&self, x: &Vec3) -> (Vec3, Vec3, f64) {
        (
            self.curl2_a.eval(x) / self.mat.mu1,
            self.a.eval(x) * self.mat.eps1,
            -self.mat.eps1 * self.div_a.eval(x),
        )
    }
}

pub fn manufacture(a: PolyVec, pulse: Pulse, mat: MaterialParams) -> ManufacturedSolution {
    let curl_a = a.curl();
    let curl2_a = curl_a.curl();
    let curl3_a = curl2_a.curl();
    let div_a = a.div();
    ManufacturedSolution { pulse, mat, a, curl_a, curl2_a, curl3_a, div_a }
}

/// What drives a run.
#[derive(Debug, Clone, PartialEq)]
pub enum Drive {
    Outside(DipoleBlob),
    Manufactured(ManufacturedSolution),
}
