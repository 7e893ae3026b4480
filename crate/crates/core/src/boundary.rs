use crate::error::{EosError, Result};
use crate::history::{History, Retard};
use crate::quadrature::LineQuadrature;
use crate::singular::{self, SingularCell};
use crate::sources::{DipoleBlob, ManufacturedSolution};
use crate::types::{Grid, MaterialParams, SurfacePoint, Vec3};
use nalgebra::{Matrix3, Matrix6};
use std::f64::consts::PI;

/// Cells and patches whose centres lie closer than this many spacings to the
/// collocation point get tensor Gauss quadrature instead of the centroid rule.
pub const NEAR_RADIUS: f64 = 2.0;
pub const NEAR_NODES: usize = 4;

/// E+ at a surface point: the outside source radiating into the outside medium.
pub fn eval_e_plus(src: &DipoleBlob, x: &Vec3, t: f64, mat: &MaterialParams, q: &LineQuadrature) -> Result<Vec3> {
    Ok(src.fields(x, t, mat, q)?.0)
}

/// B+ at a surface point.
pub fn eval_b_plus(src: &DipoleBlob, x: &Vec3, t: f64, mat: &MaterialParams, q: &LineQuadrature) -> Result<Vec3> {
    Ok(src.fields(x, t, mat, q)?.1)
}

/// Integrals of R^/R^2, R^/R and 1/R over a cell or patch, R^ = (x - x')/R.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct KernelWeights {
    pub r2: Vec3,
    pub r1: Vec3,
    pub one: f64,
}

impl KernelWeights {
    fn point(x: &Vec3, y: &Vec3, w: f64) -> Self {
        let d = x - y;
        let r = d.norm();
        Self {
            r2: d * (w / (r * r * r)),
            r1: d * (w / (r * r)),
            one: w / r,
        }
    }

    fn add(&mut self, o: &Self) {
        self.r2 += o.r2;
        self.r1 += o.r1;
        self.one += o.one;
    }
}

fn box_weights(x: &Vec3, center: &Vec3, size: [f64; 3], q: &LineQuadrature) -> KernelWeights {
    let mut acc = KernelWeights::default();
    for (a, wa) in q.mapped(-0.5 * size[0], 0.5 * size[0]) {
        for (b, wb) in q.mapped(-0.5 * size[1], 0.5 * size[1]) {
            for (c, wc) in q.mapped(-0.5 * size[2], 0.5 * size[2]) {
                acc.add(&KernelWeights::point(x, &(center + Vec3::new(a, b, c)), wa * wb * wc));
            }
        }
    }
    acc
}

/// Gauss points and weights on a surface patch.
fn patch_points(sp: &SurfacePoint, q: &LineQuadrature) -> Vec<(Vec3, f64)> {
    let [u, v] = sp.face.tangents();
    let mut out = Vec::with_capacity(q.len() * q.len());
    for (a, wa) in q.mapped(-0.5 * sp.size[0], 0.5 * sp.size[0]) {
        for (b, wb) in q.mapped(-0.5 * sp.size[1], 0.5 * sp.size[1]) {
            let mut y = sp.position;
            y[u] += a;
            y[v] += b;
            out.push((y, wa * wb));
        }
    }
    out
}

fn cross_matrix(n: &Vec3) -> Matrix3<f64> {
    Matrix3::new(0.0, -n[2], n[1], n[2], 0.0, -n[0], -n[1], n[0], 0.0)
}

/// Surface history layout: entry 6 p + c holds component c (E1..E3, B1..B3)
/// of surface point p.
pub fn surface_fields(h: &[f64], p: usize) -> (Vec3, Vec3) {
    let s = &h[6 * p..6 * p + 6];
    (Vec3::new(s[0], s[1], s[2]), Vec3::new(s[3], s[4], s[5]))
}

/// Interior representation of (E, B) at an interior point from the inside
/// limits of the surface fields, retarded with speed `c`.
pub fn eval_inside(
    grid: &Grid,
    x: &Vec3,
    n: usize,
    history: &History,
    c: f64,
    q: &LineQuadrature,
) -> Result<(Vec3, Vec3)> {
    if !grid.spec.contains_strictly(x) {
        return Err(EosError::NotInside([x[0], x[1], x[2]]));
    }
    let dt = history.dt();
    let near = NEAR_RADIUS * grid.spec.spacing().iter().cloned().fold(0.0, f64::max);
    let mut e = Vec3::zeros();
    let mut b = Vec3::zeros();
    for (p, sp) in grid.surface.iter().enumerate() {
        let pts = if (sp.position - x).norm() < near {
            patch_points(sp, q)
        } else {
            vec![(sp.position, sp.area)]
        };
        for (y, w) in pts {
            let d = y - x;
            let r = d.norm();
            let rt = Retard::new(r / c, dt, 0);
            let lv = history.stencil(n, &rt)?;
            let mut f = [[0.0; 6]; 2];
            for (k, l) in lv.iter().enumerate() {
                let s = &l[6 * p..6 * p + 6];
                for i in 0..6 {
                    f[0][i] += rt.w[0][k] * s[i];
                    f[1][i] += rt.w[1][k] * s[i];
                }
            }
            let ev = Vec3::new(f[0][0], f[0][1], f[0][2]);
            let bv = Vec3::new(f[0][3], f[0][4], f[0][5]);
            let ed = Vec3::new(f[1][0], f[1][1], f[1][2]);
            let bd = Vec3::new(f[1][3], f[1][4], f[1][5]);
            let nn = &sp.normal;
            let grad_r = d / r;
            let grad_inv = -d / (r * r * r);
            let k = w / (4.0 * PI);
            e += (nn.cross(&ed).cross(&grad_r) / (c * r) + grad_r * (nn.dot(&ed) / (c * r)) + nn.cross(&bd) / r) * k;
            e -= (nn.cross(&ev).cross(&grad_inv) + grad_inv * nn.dot(&ev)) * k;
            b += (nn.cross(&bd).cross(&grad_r) / (c * r) + grad_r * (nn.dot(&bd) / (c * r))
                - nn.cross(&ed) / (c * c * r))
                * k;
            b -= (nn.cross(&bv).cross(&grad_inv) + grad_inv * nn.dot(&bv)) * k;
        }
    }
    Ok((e, b))
}

/// Interior volume sources J1 = s P + s'' Q, rho1 = s' r, sampled per node,
/// with the pulse tabulated on the time levels.
#[derive(Debug, Clone)]
pub struct VolumeDrive {
    p: Vec<Vec3>,
    q: Vec<Vec3>,
    r: Vec<f64>,
    first: i64,
    table: Vec<[f64; 4]>,
}

impl VolumeDrive {
    pub fn new(grid: &Grid, m: &ManufacturedSolution, dt: f64) -> Self {
        let mut p = Vec::with_capacity(grid.points.len());
        let mut q = Vec::with_capacity(grid.points.len());
        let mut r = Vec::with_capacity(grid.points.len());
        for x in &grid.points {
            let (a, b, c) = m.separable(x);
            p.push(a);
            q.push(b);
            r.push(c);
        }
        let pulse = m.pulse;
        let first = (pulse.t0 / dt).floor() as i64 - 1;
        let last = (pulse.end() / dt).ceil() as i64 + 1;
        let table = (first..=last)
            .map(|k| [0, 1, 2, 3].map(|d| pulse.eval(k as f64 * dt, d)))
            .collect();
        Self { p, q, r, first, table }
    }

    /// s, s', s'', s''' at level k.
    fn pulse_at(&self, k: i64) -> [f64; 4] {
        usize::try_from(k - self.first)
            .ok()
            .and_then(|i| self.table.get(i))
            .copied()
            .unwrap_or([0.0; 4])
    }
}

#[derive(Debug, Clone)]
struct SelfTerm {
    g1: f64,
    m1_inv: Matrix6<f64>,
}

/// Everything needed to evaluate inputs to one surface update at level n.
pub struct SurfaceInputs<'a> {
    pub n: usize,
    /// Interior E through level n, layout c Lambda1 + node.
    pub interior: &'a History,
    /// Surface fields through level n - 1.
    pub surface: &'a History,
    /// Incident (E, B) at every surface point at level n.
    pub incident: &'a [[f64; 6]],
    pub volume: Option<&'a VolumeDrive>,
}

/// The discretized boundary identities: per surface point, the 6x6 system
/// M1 (E_p, B_p) = (E_R, B_R) with all retarded contributions on the right.
#[derive(Debug, Clone)]
pub struct BoundaryOperator {
    pub grid: Grid,
    pub mat: MaterialParams,
    pub dt: f64,
    near: f64,
    selfs: Vec<SelfTerm>,
    near_cells: Vec<Vec<(usize, KernelWeights)>>,
    near_patches: Vec<Vec<(usize, KernelWeights)>>,
}

impl BoundaryOperator {
    pub fn new(grid: &Grid, mat: &MaterialParams, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(EosError::InvalidStep(format!("dt = {dt} must be positive")));
        }
        let spec = &grid.spec;
        let h = spec.spacing();
        let near = NEAR_RADIUS * h.iter().cloned().fold(0.0, f64::max);
        let q = LineQuadrature::new(NEAR_NODES);
        let qs = LineQuadrature::production();
        let kappa = 1.0 / mat.mu1 - 1.0 / mat.mu0;
        let alpha = (mat.eps1 - mat.eps0) / (2.0 * mat.eps0);
        let mut selfs = Vec::with_capacity(grid.num_surface());
        let mut near_cells = Vec::with_capacity(grid.num_surface());
        let mut near_patches = Vec::with_capacity(grid.num_surface());
        for (pi, sp) in grid.surface.iter().enumerate() {
            let a = sp.face.axis();
            let [u, v] = sp.face.tangents();
            let node = spec.node(sp.cell[0], sp.cell[1], sp.cell[2]);
            let cell = SingularCell::new(h[a], h[u], h[v]).ok_or_else(|| EosError::InvalidGrid("degenerate cell".into()))?;
            let sv = singular::tabulate(&cell, &qs);
            let g1 = sv.g1;
            let n = sp.normal;
            let mut m = Matrix6::<f64>::identity();
            let nn = n * n.transpose();
            m.fixed_view_mut::<3, 3>(0, 0).copy_from(&(Matrix3::identity() + nn * alpha));
            let beta = mat.mu0 * g1 * kappa / (4.0 * PI * dt);
            m.fixed_view_mut::<3, 3>(0, 3).copy_from(&(cross_matrix(&n) * beta));
            m.fixed_view_mut::<3, 3>(3, 3)
                .copy_from(&(Matrix3::identity() + (Matrix3::identity() - nn) * (0.5 * mat.mu0 * kappa)));
            let m1_inv = m.try_inverse().ok_or_else(|| EosError::SingularSystem {
                patch: pi,
                detail: format!("M1 not invertible at {:?}", [sp.position[0], sp.position[1], sp.position[2]]),
            })?;
            selfs.push(SelfTerm { g1, m1_inv });

            let mut cells = Vec::new();
            for (ci, xc) in grid.points.iter().enumerate() {
                if ci == node {
                    cells.push((
                        ci,
                        KernelWeights {
                            r2: n * sv.f3x,
                            r1: n * sv.f2x,
                            one: sv.f1,
                        },
                    ));
                } else if (xc - sp.position).norm() < near {
                    cells.push((ci, box_weights(&sp.position, xc, h, &q)));
                }
            }
            near_cells.push(cells);
            let mut patches = Vec::new();
            for (pj, so) in grid.surface.iter().enumerate() {
                if pj != pi && (so.position - sp.position).norm() < near {
                    let mut acc = KernelWeights::default();
                    for (y, w) in patch_points(so, &q) {
                        acc.add(&KernelWeights::point(&sp.position, &y, w));
                    }
                    patches.push((pj, acc));
                }
            }
            near_patches.push(patches);
        }
        Ok(Self {
            grid: grid.clone(),
            mat: *mat,
            dt,
            near,
            selfs,
            near_cells,
            near_patches,
        })
    }

    /// The 6x6 self-term matrix of point p.
    pub fn m1(&self, p: usize) -> Option<Matrix6<f64>> {
        self.selfs.get(p).and_then(|s| s.m1_inv.try_inverse())
    }

    pub fn g1(&self, p: usize) -> f64 {
        self.selfs[p].g1
    }

    /// Inside-limit (E, B) at surface point p and level n.
    pub fn update_surface_point(&self, p: usize, inp: &SurfaceInputs) -> Result<[f64; 6]> {
        let sp = self.grid.surface.get(p).ok_or(EosError::DimensionMismatch {
            expected: self.grid.num_surface(),
            got: p,
        })?;
        if inp.incident.len() != self.grid.num_surface() {
            return Err(EosError::DimensionMismatch {
                expected: self.grid.num_surface(),
                got: inp.incident.len(),
            });
        }
        let n = inp.n;
        if inp.surface.newest() != n.checked_sub(1) || inp.interior.newest() != Some(n) {
            return Err(EosError::Causality {
                requested: n as f64 * self.dt,
                newest: inp.interior.newest().map_or(f64::NEG_INFINITY, |k| k as f64 * self.dt),
            });
        }
        let mat = &self.mat;
        let x = sp.position;
        let l1 = self.grid.spec.lambda1();
        let vol = self.grid.spec.spacing().iter().product::<f64>();
        let chi = (mat.mu1 * mat.eps1 - mat.mu0 * mat.eps0) / mat.mu0;
        let jscale = mat.mu1 / mat.mu0;
        let rscale = mat.eps0 / mat.eps1;
        let c0 = mat.c0;
        let ke = 1.0 / (4.0 * PI * mat.eps0);
        let kb = mat.mu0 / (4.0 * PI);

        let mut e = Vec3::zeros();
        let mut b = Vec3::zeros();
        let mut near = self.near_cells[p].iter().peekable();
        for (ci, xc) in self.grid.points.iter().enumerate() {
            let w = match near.peek() {
                Some((k, w)) if *k == ci => {
                    near.next();
                    *w
                }
                _ => KernelWeights::point(&x, xc, vol),
            };
            let delay = (x - xc).norm() / c0;
            let rt = Retard::new(delay, self.dt, 1);
            let lv = inp.interior.stencil(n, &rt)?;
            let mut ed = Vec3::zeros();
            let mut edd = Vec3::zeros();
            for (k, l) in lv.iter().enumerate() {
                for c in 0..3 {
                    let v = l[c * l1 + ci];
                    ed[c] += rt.w[1][k] * v;
                    edd[c] += rt.w[2][k] * v;
                }
            }
            let mut j = ed * chi;
            let mut jd = edd * chi;
            let (mut rho, mut rhod) = (0.0, 0.0);
            if let Some(vd) = inp.volume {
                let base = n as i64 - rt.lag as i64;
                let mut s = [0.0; 4];
                for k in 0..4 {
                    let pk = vd.pulse_at(base + k as i64);
                    for m in 0..4 {
                        s[m] += rt.w[0][k] * pk[m];
                    }
                }
                j += (vd.p[ci] * s[0] + vd.q[ci] * s[2]) * jscale;
                jd += (vd.p[ci] * s[1] + vd.q[ci] * s[3]) * jscale;
                rho = vd.r[ci] * s[1] * rscale;
                rhod = vd.r[ci] * s[2] * rscale;
            }
            e += (w.r2 * rho + w.r1 * (rhod / c0)) * ke - jd * (w.one * kb);
            b += (j.cross(&w.r2) + jd.cross(&w.r1) / c0) * kb;
        }

        let kappa = 1.0 / mat.mu1 - 1.0 / mat.mu0;
        let dsig = mat.eps1 - mat.eps0;
        let mut near = self.near_patches[p].iter().peekable();
        for (pj, so) in self.grid.surface.iter().enumerate() {
            if pj == p {
                continue;
            }
            let w = match near.peek() {
                Some((k, w)) if *k == pj => {
                    near.next();
                    *w
                }
                _ => KernelWeights::point(&x, &so.position, so.area),
            };
            let delay = (x - so.position).norm() / c0;
            let rt = Retard::new(delay, self.dt, 1);
            let lv = inp.surface.stencil(n, &rt)?;
            let mut f = [[0.0; 6]; 2];
            for (k, l) in lv.iter().enumerate() {
                let s = &l[6 * pj..6 * pj + 6];
                for i in 0..6 {
                    f[0][i] += rt.w[0][k] * s[i];
                    f[1][i] += rt.w[1][k] * s[i];
                }
            }
            let nn = &so.normal;
            let sig = dsig * (nn[0] * f[0][0] + nn[1] * f[0][1] + nn[2] * f[0][2]);
            let sigd = dsig * (nn[0] * f[1][0] + nn[1] * f[1][1] + nn[2] * f[1][2]);
            let kk = nn.cross(&Vec3::new(f[0][3], f[0][4], f[0][5])) * kappa;
            let kd = nn.cross(&Vec3::new(f[1][3], f[1][4], f[1][5])) * kappa;
            e += (w.r2 * sig + w.r1 * (sigd / c0)) * ke - kd * (w.one * kb);
            b += (kk.cross(&w.r2) + kd.cross(&w.r1) / c0) * kb;
        }

        let st = &self.selfs[p];
        let inc = &inp.incident[p];
        let (_, b_prev) = if n >= 1 {
            surface_fields(inp.surface.level(n as i64 - 1)?, p)
        } else {
            (Vec3::zeros(), Vec3::zeros())
        };
        let k_prev = sp.normal.cross(&b_prev) * kappa;
        e += Vec3::new(inc[0], inc[1], inc[2]) + k_prev * (-kb * st.g1 / self.dt);
        b += Vec3::new(inc[3], inc[4], inc[5]);
        let rhs = nalgebra::Vector6::new(e[0], e[1], e[2], b[0], b[1], b[2]);
        let sol = st.m1_inv * rhs;
        Ok([sol[0], sol[1], sol[2], sol[3], sol[4], sol[5]])
    }

    pub fn near_radius(&self) -> f64 {
        self.near
    }
}
