use crate::error::{EosError, Result};
use nalgebra::Vector3;

pub type Vec3 = Vector3<f64>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialParams {
    pub mu0: f64,
    pub eps0: f64,
    pub mu1: f64,
    pub eps1: f64,
    pub c0: f64,
    pub c1: f64,
}

impl MaterialParams {
    pub fn new(mu0: f64, eps0: f64, mu1: f64, eps1: f64) -> Result<Self> {
        for (name, v) in [("mu0", mu0), ("eps0", eps0), ("mu1", mu1), ("eps1", eps1)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(EosError::InvalidMaterial(format!("{name} = {v} must be positive")));
            }
        }
        Ok(Self {
            mu0,
            eps0,
            mu1,
            eps1,
            c0: 1.0 / (mu0 * eps0).sqrt(),
            c1: 1.0 / (mu1 * eps1).sqrt(),
        })
    }

    /// Vacuum outside, (mu1, eps1) inside.
    pub fn inside(mu1: f64, eps1: f64) -> Result<Self> {
        Self::new(1.0, 1.0, mu1, eps1)
    }

    pub fn vacuum() -> Self {
        Self::new(1.0, 1.0, 1.0, 1.0).unwrap()
    }

    pub fn is_homogeneous(&self) -> bool {
        self.mu1 == self.mu0 && self.eps1 == self.eps0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Component {
    E1,
    E2,
    E3,
    B1,
    B2,
    B3,
}

impl Component {
    pub const ALL: [Component; 6] = [
        Component::E1,
        Component::E2,
        Component::E3,
        Component::B1,
        Component::B2,
        Component::B3,
    ];

    pub fn rank(self) -> usize {
        self as usize
    }

    pub fn from_rank(r: usize) -> Option<Self> {
        Self::ALL.get(r).copied()
    }
}

/// Uniform cell-centred grid on an axis-aligned box. Interior point `i` along an
/// axis sits at `lo + (i + 1/2) d`, so the first point is half a cell from each
/// face and the cells tile the box exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub n: [usize; 3],
    pub lo: [f64; 3],
    pub extent: [f64; 3],
}

impl GridSpec {
    pub const MIN_POINTS: usize = 5;
    /// Offset of the first interior point from its face, in units of the spacing.
    pub const FIRST_OFFSET: f64 = 0.5;

    pub fn new(n: [usize; 3], lo: [f64; 3], extent: [f64; 3]) -> Result<Self> {
        for a in 0..3 {
            if n[a] < Self::MIN_POINTS {
                return Err(EosError::InvalidGrid(format!(
                    "axis {a} has {} points, need at least {}",
                    n[a],
                    Self::MIN_POINTS
                )));
            }
            if !(extent[a] > 0.0 && extent[a].is_finite()) || !lo[a].is_finite() {
                return Err(EosError::InvalidGrid(format!(
                    "axis {a} has degenerate extent {}",
                    extent[a]
                )));
            }
        }
        Ok(Self { n, lo, extent })
    }

    /// Cube of side `side` centred at the origin with `n` points per axis.
    pub fn cube(n: usize, side: f64) -> Result<Self> {
        Self::new([n; 3], [-0.5 * side; 3], [side; 3])
    }

    pub fn spacing(&self) -> [f64; 3] {
        [
            self.extent[0] / self.n[0] as f64,
            self.extent[1] / self.n[1] as f64,
            self.extent[2] / self.n[2] as f64,
        ]
    }

    pub fn hi(&self) -> [f64; 3] {
        [
            self.lo[0] + self.extent[0],
            self.lo[1] + self.extent[1],
            self.lo[2] + self.extent[2],
        ]
    }

    pub fn lambda1(&self) -> usize {
        self.n[0] * self.n[1] * self.n[2]
    }

    pub fn lambda2(&self) -> usize {
        self.n[1] * self.n[2]
    }

    pub fn dim(&self) -> usize {
        6 * self.lambda1()
    }

    pub fn coord(&self, axis: usize, i: usize) -> f64 {
        self.lo[axis] + (i as f64 + Self::FIRST_OFFSET) * self.spacing()[axis]
    }

    pub fn point(&self, i: usize, j: usize, k: usize) -> Vec3 {
        Vec3::new(self.coord(0, i), self.coord(1, j), self.coord(2, k))
    }

    pub fn node(&self, i: usize, j: usize, k: usize) -> usize {
        self.lambda2() * i + self.n[2] * j + k
    }

    pub fn unflatten_node(&self, g: usize) -> [usize; 3] {
        let l2 = self.lambda2();
        [g / l2, (g % l2) / self.n[2], g % self.n[2]]
    }

    pub fn contains_strictly(&self, x: &Vec3) -> bool {
        let hi = self.hi();
        (0..3).all(|a| x[a] > self.lo[a] && x[a] < hi[a])
    }

    pub fn diameter(&self) -> f64 {
        (self.extent[0].powi(2) + self.extent[1].powi(2) + self.extent[2].powi(2)).sqrt()
    }
}

pub fn flatten_index(spec: &GridSpec, i: usize, j: usize, k: usize, c: Component) -> Result<usize> {
    let [nx, ny, nz] = spec.n;
    if i >= nx || j >= ny || k >= nz {
        return Err(EosError::IndexOutOfBounds { i, j, k, nx, ny, nz });
    }
    Ok(c.rank() * spec.lambda1() + spec.node(i, j, k))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub q: Vec<f64>,
    pub t: f64,
}

impl FieldState {
    pub fn zeros(spec: &GridSpec) -> Self {
        Self {
            q: vec![0.0; spec.dim()],
            t: 0.0,
        }
    }

    pub fn all_finite(&self) -> bool {
        self.q.iter().all(|v| v.is_finite())
    }

    pub fn norm_l2(&self) -> f64 {
        self.q.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn norm_inf(&self) -> f64 {
        self.q.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn e(&self, spec: &GridSpec, node: usize) -> Vec3 {
        let l = spec.lambda1();
        Vec3::new(self.q[node], self.q[l + node], self.q[2 * l + node])
    }

    pub fn b(&self, spec: &GridSpec, node: usize) -> Vec3 {
        let l = spec.lambda1();
        Vec3::new(self.q[3 * l + node], self.q[4 * l + node], self.q[5 * l + node])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Face {
    XLo,
    XHi,
    YLo,
    YHi,
    ZLo,
    ZHi,
}

impl Face {
    pub const ALL: [Face; 6] = [Face::XLo, Face::XHi, Face::YLo, Face::YHi, Face::ZLo, Face::ZHi];

    pub fn new(axis: usize, high: bool) -> Self {
        Self::ALL[2 * axis + high as usize]
    }

    pub fn axis(self) -> usize {
        self as usize / 2
    }

    pub fn is_high(self) -> bool {
        self as usize % 2 == 1
    }

    pub fn normal(self) -> Vec3 {
        let mut n = Vec3::zeros();
        n[self.axis()] = if self.is_high() { 1.0 } else { -1.0 };
        n
    }

    /// The two tangential axes in increasing order.
    pub fn tangents(self) -> [usize; 2] {
        match self.axis() {
            0 => [1, 2],
            1 => [0, 2],
            _ => [0, 1],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfacePoint {
    pub position: Vec3,
    pub normal: Vec3,
    pub face: Face,
    pub area: f64,
    /// Patch extents along the face's two tangential axes.
    pub size: [f64; 2],
    /// Interior grid point whose projection onto the face is this point.
    pub cell: [usize; 3],
}

#[derive(Debug, Clone)]
pub struct Grid {
    pub spec: GridSpec,
    pub points: Vec<Vec3>,
    pub surface: Vec<SurfacePoint>,
    face_offset: [usize; 6],
}

impl Grid {
    pub fn num_surface(&self) -> usize {
        self.surface.len()
    }

    /// Index of the patch on `face` whose tangential grid indices match those of `p`.
    pub fn patch_index(&self, face: Face, p: [usize; 3]) -> usize {
        let [u, v] = face.tangents();
        self.face_offset[face as usize] + p[u] * self.spec.n[v] + p[v]
    }

    pub fn face_range(&self, face: Face) -> std::ops::Range<usize> {
        let start = self.face_offset[face as usize];
        let [u, v] = face.tangents();
        start..start + self.spec.n[u] * self.spec.n[v]
    }
}

pub fn build_grid(spec: &GridSpec) -> Result<Grid> {
    let spec = GridSpec::new(spec.n, spec.lo, spec.extent)?;
    let [nx, ny, nz] = spec.n;
    let d = spec.spacing();
    let hi = spec.hi();
    let mut points = Vec::with_capacity(spec.lambda1());
    for i in 0..nx {
        for j in 0..ny {
            for k in 0..nz {
                points.push(spec.point(i, j, k));
            }
        }
    }
    let mut surface = Vec::new();
    let mut face_offset = [0; 6];
    for face in Face::ALL {
        face_offset[face as usize] = surface.len();
        let a = face.axis();
        let [u, v] = face.tangents();
        for iu in 0..spec.n[u] {
            for iv in 0..spec.n[v] {
                let mut cell = [0; 3];
                cell[a] = if face.is_high() { spec.n[a] - 1 } else { 0 };
                cell[u] = iu;
                cell[v] = iv;
                let mut pos = spec.point(cell[0], cell[1], cell[2]);
                pos[a] = if face.is_high() { hi[a] } else { spec.lo[a] };
                surface.push(SurfacePoint {
                    position: pos,
                    normal: face.normal(),
                    face,
                    area: d[u] * d[v],
                    size: [d[u], d[v]],
                    cell,
                });
            }
        }
    }
    Ok(Grid {
        spec,
        points,
        surface,
        face_offset,
    })
}
