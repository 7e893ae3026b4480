use crate::boundary::{eval_inside, BoundaryOperator, SurfaceInputs, VolumeDrive};
use crate::error::{EosError, Result};
use crate::history::History;
use crate::quadrature::LineQuadrature;
use crate::sources::Drive;
use crate::stability::growth_exponent;
use crate::stencil::{assemble_update_matrix, SparseOperator};
use crate::types::{build_grid, FieldState, Grid, GridSpec, MaterialParams, Vec3};

/// A run stops once ||Q||_inf exceeds this multiple of the drive's scale.
pub const BLOWUP_FACTOR: f64 = 1e12;
/// Largest per-step growth exponent still counted as bounded.
pub const GROWTH_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Full scheme: boundary identities update the surface, Lax-Wendroff the interior.
    Eos,
    /// Lax-Wendroff interior fed by exact boundary values.
    LwExact,
    /// Interior representation evaluated from exact surface values.
    Representation,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Eos => "eos",
            Method::LwExact => "lw-exact",
            Method::Representation => "representation",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub method: Method,
    pub spec: GridSpec,
    pub mat: MaterialParams,
    pub tau: f64,
    pub steps: usize,
    pub probes: Vec<Vec3>,
    pub drive: Drive,
    pub workers: usize,
}

impl RunConfig {
    pub fn dt(&self) -> f64 {
        let h = self.spec.spacing().iter().cloned().fold(f64::INFINITY, f64::min);
        self.tau * h / self.mat.c1
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0 && self.tau.is_finite()) {
            return Err(EosError::InvalidStep(format!("tau = {} must be positive", self.tau)));
        }
        if self.workers == 0 {
            return Err(EosError::Config("workers must be at least 1".into()));
        }
        for p in &self.probes {
            if !self.spec.contains_strictly(p) {
                return Err(EosError::NotInside([p[0], p[1], p[2]]));
            }
        }
        if let Drive::Outside(src) = &self.drive {
            if src.clearance(&self.spec) <= 0.0 {
                return Err(EosError::Config("outside source overlaps the scatterer".into()));
            }
            if self.method != Method::Eos && !self.mat.is_homogeneous() {
                return Err(EosError::Config(format!(
                    "method {} needs exact boundary values, available for an outside source only when mu1 = mu0 and eps1 = eps0",
                    self.method.name()
                )));
            }
        }
        if let Drive::Manufactured(_) = &self.drive {
            if self.method == Method::Representation {
                return Err(EosError::Config("the representation method takes no interior sources".into()));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub times: Vec<f64>,
    /// probes[k][n] = (E, B) at probe k after step n.
    pub probes: Vec<Vec<[f64; 6]>>,
    pub final_state: FieldState,
    /// Surface (E, B) at the last completed level.
    pub surface: Vec<[f64; 6]>,
    /// ||Q||_2 after each step (probe vector norm for the representation method).
    pub norms: Vec<f64>,
    pub blowup_step: Option<usize>,
    /// Relative L2 error of E over all nodes and steps, for manufactured drives.
    pub manufactured_error: Option<f64>,
}

impl RunResult {
    pub fn growth_exponent(&self) -> f64 {
        growth_exponent(&self.norms)
    }
}

fn drive_scale(drive: &Drive) -> f64 {
    match drive {
        Drive::Outside(s) => s.moment.norm() / s.radius.powi(3),
        Drive::Manufactured(m) => {
            let peak = (0..=64)
                .map(|i| m.pulse.eval(m.pulse.t0 + m.pulse.width * i as f64 / 64.0, 1).abs())
                .fold(0.0, f64::max);
            let a = m.a.eval(&Vec3::zeros()).norm();
            (peak * a).max(f64::MIN_POSITIVE)
        }
    }
}

/// Contiguous blocks of `len / workers` items, the remainder going to the last worker.
pub fn partition(len: usize, workers: usize) -> Vec<std::ops::Range<usize>> {
    let workers = workers.max(1);
    let block = len / workers;
    (0..workers)
        .map(|w| {
            let start = w * block;
            let end = if w + 1 == workers { len } else { start + block };
            start..end
        })
        .collect()
}

/// Runs `f` over `0..len` split across scoped workers, gathering in index order.
fn parallel_map<T: Send, F: Fn(usize) -> Result<T> + Sync>(len: usize, workers: usize, f: F) -> Result<Vec<T>> {
    let parts = partition(len, workers);
    if parts.len() == 1 {
        return (0..len).map(&f).collect();
    }
    let chunks: Vec<Result<Vec<T>>> = std::thread::scope(|s| {
        let handles: Vec<_> = parts
            .into_iter()
            .map(|r| {
                let f = &f;
                s.spawn(move || r.map(f).collect::<Result<Vec<T>>>())
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let mut out = Vec::with_capacity(len);
    for c in chunks {
        out.extend(c?);
    }
    Ok(out)
}

/// Trilinear interpolation of the node values, clamped to the node hull.
pub fn probe_fields(grid: &Grid, q: &[f64], x: &Vec3) -> [f64; 6] {
    let spec = &grid.spec;
    let h = spec.spacing();
    let mut base = [0usize; 3];
    let mut frac = [0.0; 3];
    for a in 0..3 {
        let s = ((x[a] - spec.lo[a]) / h[a] - 0.5).clamp(0.0, (spec.n[a] - 1) as f64);
        let i = (s.floor() as usize).min(spec.n[a] - 2);
        base[a] = i;
        frac[a] = s - i as f64;
    }
    let l = spec.lambda1();
    let mut out = [0.0; 6];
    for corner in 0..8 {
        let d = [corner >> 2 & 1, corner >> 1 & 1, corner & 1];
        let mut w = 1.0;
        for a in 0..3 {
            w *= if d[a] == 1 { frac[a] } else { 1.0 - frac[a] };
        }
        let node = spec.node(base[0] + d[0], base[1] + d[1], base[2] + d[2]);
        for (c, o) in out.iter_mut().enumerate() {
            *o += w * q[c * l + node];
        }
    }
    out
}

fn six(e: Vec3, b: Vec3) -> [f64; 6] {
    [e[0], e[1], e[2], b[0], b[1], b[2]]
}

/// Exact boundary values at the surface points, level time t.
fn exact_surface(grid: &Grid, cfg: &RunConfig, t: f64, q: &LineQuadrature, workers: usize) -> Result<Vec<[f64; 6]>> {
    match &cfg.drive {
        Drive::Outside(src) => parallel_map(grid.num_surface(), workers, |p| {
            let (e, b) = src.fields(&grid.surface[p].position, t, &cfg.mat, q)?;
            Ok(six(e, b))
        }),
        Drive::Manufactured(m) => Ok(grid
            .surface
            .iter()
            .map(|sp| six(m.e(&sp.position, t), m.b(&sp.position, t)))
            .collect()),
    }
}

/// Spatial factors of a manufactured drive at every node.
struct ManufacturedNodes {
    a: Vec<Vec3>,
    curl_a: Vec<Vec3>,
    curl2_a: Vec<Vec3>,
    curl3_a: Vec<Vec3>,
}

impl ManufacturedNodes {
    fn new(grid: &Grid, drive: &Drive) -> Option<Self> {
        let Drive::Manufactured(m) = drive else { return None };
        let tab = |p: &crate::poly::PolyVec| grid.points.iter().map(|x| p.eval(x)).collect();
        Some(Self {
            a: tab(&m.a),
            curl_a: tab(&m.curl_a),
            curl2_a: tab(&m.curl2_a),
            curl3_a: tab(&m.curl3_a),
        })
    }

    /// Lax-Wendroff source terms at time t.
    fn add_sources(&self, cfg: &RunConfig, t: f64, dt: f64, q: &mut [f64]) {
        let Drive::Manufactured(m) = &cfg.drive else { return };
        let l = self.a.len();
        let (mu, eps) = (cfg.mat.mu1, cfg.mat.eps1);
        let s: Vec<f64> = (0..4).map(|k| m.pulse.eval(t, k)).collect();
        for node in 0..l {
            let j = self.curl2_a[node] * (s[0] / mu) + self.a[node] * (eps * s[2]);
            let dj = self.curl2_a[node] * (s[1] / mu) + self.a[node] * (eps * s[3]);
            let cj = self.curl3_a[node] * (s[0] / mu) + self.curl_a[node] * (eps * s[2]);
            for c in 0..3 {
                q[c * l + node] -= dt * j[c] / eps + 0.5 * dt * dt * dj[c] / eps;
                q[(c + 3) * l + node] += 0.5 * dt * dt * cj[c] / eps;
            }
        }
    }
}

/// Relative L2 error of E over all nodes and steps.
struct ErrorAccumulator {
    num: f64,
    den: f64,
}

impl ErrorAccumulator {
    fn add(&mut self, nodes: &ManufacturedNodes, cfg: &RunConfig, q: &[f64], t: f64) {
        let Drive::Manufactured(m) = &cfg.drive else { return };
        let l = nodes.a.len();
        let s1 = m.pulse.eval(t, 1);
        for node in 0..l {
            let e = nodes.a[node] * -s1;
            for c in 0..3 {
                self.num += (q[c * l + node] - e[c]).powi(2);
                self.den += e[c] * e[c];
            }
        }
    }

    fn value(&self, cfg: &RunConfig) -> Option<f64> {
        match cfg.drive {
            Drive::Manufactured(_) if self.den > 0.0 => Some((self.num / self.den).sqrt()),
            Drive::Manufactured(_) => Some(self.num.sqrt()),
            _ => None,
        }
    }
}

pub fn run(cfg: &RunConfig) -> Result<RunResult> {
    cfg.validate()?;
    let grid = build_grid(&cfg.spec)?;
    match cfg.method {
        Method::Representation => run_representation(&grid, cfg),
        _ => run_stepper(&grid, cfg),
    }
}

fn run_stepper(grid: &Grid, cfg: &RunConfig) -> Result<RunResult> {
    let dt = cfg.dt();
    let op: SparseOperator = assemble_update_matrix(grid, &cfg.mat, dt)?;
    let workers = cfg.workers;
    let ns = grid.num_surface();
    let l1 = grid.spec.lambda1();
    let q16 = LineQuadrature::new(16);
    let depth = History::depth_for(grid.spec.diameter(), cfg.mat.c0, dt);
    let mut interior = History::new(3 * l1, depth, dt);
    let mut surface_hist = History::new(6 * ns, depth, dt);
    let (bop, volume) = if cfg.method == Method::Eos {
        let bop = BoundaryOperator::new(grid, &cfg.mat, dt)?;
        let vol = match &cfg.drive {
            Drive::Manufactured(m) => Some(VolumeDrive::new(grid, m, dt)),
            Drive::Outside(_) => None,
        };
        (Some(bop), vol)
    } else {
        (None, None)
    };
    let scale = drive_scale(&cfg.drive);
    let mut state = FieldState::zeros(&grid.spec);
    let mut next = vec![0.0; state.q.len()];
    let mut result = RunResult {
        times: Vec::with_capacity(cfg.steps),
        probes: vec![Vec::with_capacity(cfg.steps); cfg.probes.len()],
        final_state: state.clone(),
        surface: vec![[0.0; 6]; ns],
        norms: Vec::with_capacity(cfg.steps),
        blowup_step: None,
        manufactured_error: None,
    };
    let mut err = ErrorAccumulator { num: 0.0, den: 0.0 };
    let nodes = ManufacturedNodes::new(grid, &cfg.drive);
    for n in 0..cfg.steps {
        let t = n as f64 * dt;
        let surf = match &bop {
            None => exact_surface(grid, cfg, t, &q16, workers)?,
            Some(bop) => {
                interior.push(state.q[..3 * l1].to_vec())?;
                let incident = match &cfg.drive {
                    Drive::Outside(_) => exact_surface(grid, cfg, t, &q16, workers)?,
                    Drive::Manufactured(_) => vec![[0.0; 6]; ns],
                };
                let inp = SurfaceInputs {
                    n,
                    interior: &interior,
                    surface: &surface_hist,
                    incident: &incident,
                    volume: volume.as_ref(),
                };
                let s = parallel_map(ns, workers, |p| bop.update_surface_point(p, &inp))?;
                surface_hist.push(s.iter().flatten().copied().collect())?;
                s
            }
        };
        op.apply_into(&state.q, &surf, &mut next, workers)?;
        if let Some(nodes) = &nodes {
            nodes.add_sources(cfg, t, dt, &mut next);
        }
        std::mem::swap(&mut state.q, &mut next);
        state.t = t + dt;
        result.surface = surf;
        result.times.push(state.t);
        for (k, x) in cfg.probes.iter().enumerate() {
            result.probes[k].push(probe_fields(grid, &state.q, x));
        }
        result.norms.push(state.norm_l2());
        if let Some(nodes) = &nodes {
            err.add(nodes, cfg, &state.q, state.t);
        }
        if !state.all_finite() || state.norm_inf() > BLOWUP_FACTOR * scale {
            result.blowup_step = Some(n + 1);
            break;
        }
    }
    result.final_state = state;
    result.manufactured_error = err.value(cfg);
    Ok(result)
}

fn run_representation(grid: &Grid, cfg: &RunConfig) -> Result<RunResult> {
    let dt = cfg.dt();
    let ns = grid.num_surface();
    let q16 = LineQuadrature::new(16);
    let q4 = LineQuadrature::new(4);
    let c = cfg.mat.c1;
    let depth = History::depth_for(grid.spec.diameter(), c, dt);
    let mut hist = History::new(6 * ns, depth, dt);
    hist.push(exact_surface(grid, cfg, 0.0, &q16, cfg.workers)?.concat())?;
    let mut result = RunResult {
        times: Vec::with_capacity(cfg.steps),
        probes: vec![Vec::with_capacity(cfg.steps); cfg.probes.len()],
        final_state: FieldState::zeros(&grid.spec),
        surface: vec![[0.0; 6]; ns],
        norms: Vec::with_capacity(cfg.steps),
        blowup_step: None,
        manufactured_error: None,
    };
    for n in 1..=cfg.steps {
        let t = n as f64 * dt;
        let s = exact_surface(grid, cfg, t, &q16, cfg.workers)?;
        hist.push(s.concat())?;
        result.surface = s;
        result.times.push(t);
        let vals = parallel_map(cfg.probes.len(), cfg.workers, |k| {
            let (e, b) = eval_inside(grid, &cfg.probes[k], n, &hist, c, &q4)?;
            Ok(six(e, b))
        })?;
        let mut norm = 0.0;
        for (k, v) in vals.into_iter().enumerate() {
            norm += v.iter().map(|x| x * x).sum::<f64>();
            result.probes[k].push(v);
        }
        result.norms.push(norm.sqrt());
    }
    let l = grid.spec.lambda1();
    let n = cfg.steps;
    let nodes = parallel_map(l, cfg.workers, |node| {
        let (e, b) = eval_inside(grid, &grid.points[node], n, &hist, c, &q4)?;
        Ok(six(e, b))
    })?;
    for (node, v) in nodes.iter().enumerate() {
        for comp in 0..6 {
            result.final_state.q[comp * l + node] = v[comp];
        }
    }
    result.final_state.t = n as f64 * dt;
    Ok(result)
}

/// Relative L2 and max errors of a probe series against a reference series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesError {
    pub rel_l2: f64,
    pub max_abs: f64,
}

pub fn series_error(got: &[[f64; 6]], want: &[[f64; 6]]) -> SeriesError {
    let (mut num, mut den, mut max_abs) = (0.0, 0.0, 0.0f64);
    for (g, w) in got.iter().zip(want) {
        for c in 0..3 {
            let d = g[c] - w[c];
            num += d * d;
            den += w[c] * w[c];
            max_abs = max_abs.max(d.abs());
        }
    }
    let missing: f64 = want[got.len().min(want.len())..]
        .iter()
        .map(|w| w[..3].iter().map(|x| x * x).sum::<f64>())
        .sum();
    num += missing;
    SeriesError {
        rel_l2: if den + missing > 0.0 { (num / (den + missing)).sqrt() } else { num.sqrt() },
        max_abs,
    }
}

/// Exact incident (E, B) series at every probe for an outside drive.
pub fn exact_probe_series(cfg: &RunConfig) -> Result<Vec<Vec<[f64; 6]>>> {
    let dt = cfg.dt();
    let q = LineQuadrature::new(16);
    cfg.probes
        .iter()
        .map(|x| {
            (1..=cfg.steps)
                .map(|n| {
                    let t = n as f64 * dt;
                    match &cfg.drive {
                        Drive::Outside(src) => src.fields(x, t, &cfg.mat, &q).map(|(e, b)| six(e, b)),
                        Drive::Manufactured(m) => Ok(six(m.e(x, t), m.b(x, t))),
                    }
                })
                .collect()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodSummary {
    pub method: Method,
    pub error: SeriesError,
    pub growth_exponent: f64,
    pub blowup_step: Option<usize>,
    pub result: RunResult,
}

/// Methods 2 and 3 against the exact interior field, at every probe (errors
/// of the first probe reported; all probes kept in the results).
pub fn run_three_method_comparison(cfg: &RunConfig) -> Result<Vec<MethodSummary>> {
    if !cfg.mat.is_homogeneous() {
        return Err(EosError::Config("three-method comparison needs mu1 = mu0 and eps1 = eps0".into()));
    }
    if cfg.probes.is_empty() {
        return Err(EosError::Config("at least one probe is required".into()));
    }
    let exact = exact_probe_series(cfg)?;
    [Method::LwExact, Method::Representation]
        .into_iter()
        .map(|m| {
            let c = RunConfig { method: m, ..cfg.clone() };
            let r = run(&c)?;
            Ok(MethodSummary {
                method: m,
                error: series_error(&r.probes[0], &exact[0]),
                growth_exponent: r.growth_exponent(),
                blowup_step: r.blowup_step,
                result: r,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManufacturedSummary {
    pub method: Method,
    pub error: f64,
    pub growth_exponent: f64,
    pub blowup_step: Option<usize>,
    pub bounded: bool,
}

/// Full scheme (Method 1) and Lax-Wendroff with exact boundary (Method 2)
/// against the manufactured fields.
pub fn run_manufactured_test(cfg: &RunConfig) -> Result<Vec<ManufacturedSummary>> {
    if !matches!(cfg.drive, Drive::Manufactured(_)) {
        return Err(EosError::Config("manufactured test needs a manufactured drive".into()));
    }
    [Method::Eos, Method::LwExact]
        .into_iter()
        .map(|m| {
            let r = run(&RunConfig { method: m, ..cfg.clone() })?;
            let g = r.growth_exponent();
            Ok(ManufacturedSummary {
                method: m,
                error: r.manufactured_error.unwrap_or(f64::NAN),
                growth_exponent: g,
                blowup_step: r.blowup_step,
                bounded: r.blowup_step.is_none() && g <= GROWTH_TOL,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthReport {
    pub exponent: f64,
    pub blowup_step: Option<usize>,
    pub unstable: bool,
}

/// Runs `horizon` steps and fits the growth of ||Q|| over the final half.
pub fn empirical_blowup_check(cfg: &RunConfig, horizon: usize) -> Result<GrowthReport> {
    let r = run(&RunConfig { steps: horizon, ..cfg.clone() })?;
    let exponent = r.growth_exponent();
    Ok(GrowthReport {
        exponent,
        blowup_step: r.blowup_step,
        unstable: r.blowup_step.is_some() || exponent > GROWTH_TOL,
    })
}
