use crate::error::Result;
use crate::stencil::{assemble_update_matrix, SparseOperator};
use crate::types::{build_grid, GridSpec, MaterialParams};
use nalgebra::DMatrix;
use nalgebra::Complex;

type Complex64 = Complex<f64>;

pub const TOL_EIG: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralEstimate {
    pub radius: f64,
    pub converged: bool,
    pub iterations: usize,
}

/// Anything that can form y = A x for a square A.
pub trait LinearMap {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

impl LinearMap for SparseOperator {
    fn dim(&self) -> usize {
        self.dim
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.matvec(x, y)
    }
}

impl LinearMap for DMatrix<f64> {
    fn dim(&self) -> usize {
        self.nrows()
    }
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (r, yr) in y.iter_mut().enumerate() {
            *yr = (0..self.ncols()).map(|c| self[(r, c)] * x[c]).sum();
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Deterministic start vector with no special alignment to grid modes.
fn start_vector(n: usize) -> Vec<f64> {
    let mut s: u64 = 0x9E37_79B9_7F4A_7C15;
    (0..n)
        .map(|_| {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        })
        .collect()
}

/// Dominant eigenvalue magnitude by explicitly restarted Arnoldi. Each cycle
/// builds a Krylov basis of size `m`, picks the largest-modulus Ritz value and
/// restarts from the real span of its Ritz vector, so a dominant complex pair
/// is captured together. Converged when the Ritz residual is below `tol`
/// relative to the Ritz value; `max_iter` bounds the number of cycles.
pub fn spectral_radius<A: LinearMap>(op: &A, tol: f64, max_iter: usize) -> SpectralEstimate {
    let n = op.dim();
    if n == 0 {
        return SpectralEstimate { radius: 0.0, converged: true, iterations: 0 };
    }
    let m = n.min(60);
    let mut v0 = start_vector(n);
    let mut radius = 0.0;
    for it in 1..=max_iter.max(1) {
        let nv = norm(&v0);
        if nv == 0.0 {
            return SpectralEstimate { radius: 0.0, converged: true, iterations: it };
        }
        let mut basis: Vec<Vec<f64>> = vec![v0.iter().map(|x| x / nv).collect()];
        let mut h = DMatrix::<f64>::zeros(m + 1, m);
        let mut w = vec![0.0; n];
        let mut k = m;
        for j in 0..m {
            op.apply(&basis[j], &mut w);
            for _ in 0..2 {
                for (i, b) in basis.iter().enumerate() {
                    let c = dot(b, &w);
                    h[(i, j)] += c;
                    for (wx, bx) in w.iter_mut().zip(b) {
                        *wx -= c * bx;
                    }
                }
            }
            let hn = norm(&w);
            h[(j + 1, j)] = hn;
            let scale = h.view((0, 0), (j + 1, j + 1)).iter().fold(0.0f64, |a, x| a.max(x.abs()));
            if hn <= 1e-14 * scale.max(f64::MIN_POSITIVE) {
                k = j + 1;
                break;
            }
            if j + 1 < m {
                basis.push(w.iter().map(|x| x / hn).collect());
            }
        }
        let hk = h.view((0, 0), (k, k)).into_owned();
        let (theta, y) = dominant_ritz(&hk);
        radius = theta.norm();
        if radius == 0.0 {
            return SpectralEstimate { radius: 0.0, converged: true, iterations: it };
        }
        let invariant = k < m || k == n;
        let resid = if invariant { 0.0 } else { h[(k, k - 1)] * y[k - 1].norm() };
        if resid <= tol * radius {
            return SpectralEstimate { radius, converged: true, iterations: it };
        }
        v0 = vec![0.0; n];
        for (i, b) in basis.iter().take(k).enumerate() {
            let c = y[i].re + y[i].im;
            for (vx, bx) in v0.iter_mut().zip(b) {
                *vx += c * bx;
            }
        }
    }
    SpectralEstimate { radius, converged: false, iterations: max_iter }
}

/// Largest-modulus eigenvalue of a small Hessenberg matrix and its unit eigenvector.
fn dominant_ritz(h: &DMatrix<f64>) -> (Complex64, Vec<Complex64>) {
    let k = h.nrows();
    let eig = h.complex_eigenvalues();
    let mut theta = eig[0];
    for e in eig.iter() {
        if e.norm() > theta.norm() || (e.norm() == theta.norm() && e.im > theta.im) {
            theta = *e;
        }
    }
    // inverse iteration on (H - theta I) for the eigenvector
    let hc: DMatrix<Complex64> = h.map(|x| Complex64::new(x, 0.0));
    let shift = theta + Complex64::new(1e-10 * theta.norm().max(1e-300), 0.0);
    let a = &hc - DMatrix::<Complex64>::identity(k, k) * shift;
    let lu = a.lu();
    let mut y = nalgebra::DVector::<Complex64>::from_element(k, Complex64::new(1.0, 0.0));
    for _ in 0..3 {
        if let Some(z) = lu.solve(&y) {
            let nz = z.norm();
            if nz.is_finite() && nz > 0.0 {
                y = z / Complex64::new(nz, 0.0);
            }
        }
    }
    (theta, y.iter().copied().collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityReport {
    pub tau: f64,
    pub mu1: f64,
    pub eps1: f64,
    pub spectral_radius: f64,
    pub stable: bool,
    pub converged: bool,
    pub iterations_used: usize,
    pub growth_exponent: Option<f64>,
}

pub const SCAN_MAX_ITER: usize = 400;

/// Spectral radius of the interior operator at one (tau, mu1, eps1) tuple;
/// dt follows from tau = c1 dt / dx.
pub fn stability_report(spec: &GridSpec, tau: f64, mu1: f64, eps1: f64) -> Result<StabilityReport> {
    let grid = build_grid(spec)?;
    let mat = MaterialParams::inside(mu1, eps1)?;
    let dt = tau * spec.spacing()[0] / mat.c1;
    let op = assemble_update_matrix(&grid, &mat, dt)?;
    let est = spectral_radius(&op, TOL_EIG, SCAN_MAX_ITER);
    Ok(StabilityReport {
        tau,
        mu1,
        eps1,
        spectral_radius: est.radius,
        stable: est.radius <= 1.0 + TOL_EIG,
        converged: est.converged,
        iterations_used: est.iterations,
        growth_exponent: None,
    })
}

/// One report per (tau, mu1, eps1) in scan order; a failing tuple is reported
/// with a NaN radius rather than aborting the scan.
pub fn stability_scan(
    spec: &GridSpec,
    tau_values: &[f64],
    mu1_values: &[f64],
    eps1_values: &[f64],
) -> Vec<StabilityReport> {
    let mut out = Vec::new();
    for &tau in tau_values {
        for &mu1 in mu1_values {
            for &eps1 in eps1_values {
                out.push(stability_report(spec, tau, mu1, eps1).unwrap_or(StabilityReport {
                    tau,
                    mu1,
                    eps1,
                    spectral_radius: f64::NAN,
                    stable: false,
                    converged: false,
                    iterations_used: 0,
                    growth_exponent: None,
                }));
            }
        }
    }
    out
}

/// Bisection for the largest stable tau in [lo, hi], assuming lo stable and hi unstable.
pub fn upper_stability_edge(spec: &GridSpec, mut lo: f64, mut hi: f64, width: f64) -> Result<f64> {
    while hi - lo > width {
        let mid = 0.5 * (lo + hi);
        if stability_report(spec, mid, 1.0, 1.0)?.stable {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Least-squares slope of ln(norm) against step index over the final half of
/// the history; zero norms are skipped.
pub fn growth_exponent(norms: &[f64]) -> f64 {
    let start = norms.len() / 2;
    let pts: Vec<(f64, f64)> = norms[start..]
        .iter()
        .enumerate()
        .filter(|(_, v)| **v > 0.0 && v.is_finite())
        .map(|(i, v)| ((start + i) as f64, v.ln()))
        .collect();
    if pts.len() < 2 {
        return 0.0;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}
