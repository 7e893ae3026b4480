use crate::error::{EosError, Result};
use crate::types::{Face, Grid, GridSpec, MaterialParams};
use num_rational::Rational64;
use std::collections::BTreeMap;
use std::io::Write;

pub type R = Rational64;

const fn r(n: i64, d: i64) -> R {
    R::new_raw(n, d)
}

const fn ri(n: i64) -> R {
    R::new_raw(n, 1)
}

/// Position class of a point along one axis, selecting its one-sided weight row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pos1 {
    Lo,
    Hi,
    Mid,
}

impl Pos1 {
    pub fn of(j: usize, eta: usize) -> Self {
        if j == 0 {
            Pos1::Lo
        } else if j == eta - 1 {
            Pos1::Hi
        } else {
            Pos1::Mid
        }
    }
}

/// (delta_-2..delta_2, xi_-2..xi_2)
pub fn table1(pos: Pos1) -> ([R; 5], [R; 5]) {
    match pos {
        Pos1::Lo => (
            [ri(0), ri(0), ri(-5), ri(2), r(-1, 5)],
            [ri(0), ri(0), r(1, 2), r(2, 3), r(-1, 10)],
        ),
        Pos1::Hi => (
            [r(-1, 5), ri(2), ri(-5), ri(0), ri(0)],
            [r(1, 10), r(-2, 3), r(-1, 2), ri(0), ri(0)],
        ),
        Pos1::Mid => (
            [ri(0), ri(1), ri(-2), ri(1), ri(0)],
            [ri(0), r(-1, 2), ri(0), r(1, 2), ri(0)],
        ),
    }
}

/// Weight of the face value in the one-sided second and first derivative
/// stencils; `None` for rows away from the faces.
pub fn table1_face(pos: Pos1) -> Option<(R, R)> {
    match pos {
        Pos1::Lo => Some((r(16, 5), r(-16, 15))),
        Pos1::Hi => Some((r(16, 5), r(16, 15))),
        Pos1::Mid => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IClass {
    Zero,
    N1,
    N2,
    Inner,
}

impl IClass {
    pub fn of(i: usize, n: usize) -> Self {
        if i == 0 {
            IClass::Zero
        } else if i == n - 1 {
            IClass::N1
        } else if i == n - 2 {
            IClass::N2
        } else {
            IClass::Inner
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JClass {
    Lo,
    Hi,
    MidLo,
    MidHi,
    Mid,
}

impl JClass {
    /// The split of the middle range for i on a face uses floor(eta/2).
    pub fn of(j: usize, eta: usize, ic: IClass) -> Self {
        if j == 0 {
            JClass::Lo
        } else if j == eta - 1 {
            JClass::Hi
        } else if matches!(ic, IClass::Zero | IClass::N1) {
            if j < eta / 2 {
                JClass::MidLo
            } else {
                JClass::MidHi
            }
        } else {
            JClass::Mid
        }
    }
}

/// (di, dj) offsets of omega_-4 .. omega_4.
pub const OMEGA_OFFSETS: [(i64, i64); 9] = [
    (-1, -1),
    (-1, 0),
    (-1, 1),
    (0, -1),
    (0, 0),
    (0, 1),
    (1, -1),
    (1, 0),
    (1, 1),
];

/// Mixed-derivative weights for a position class pair; they sum against the offsets to -3 da db d_ab.
pub fn table2(ic: IClass, jc: JClass) -> Option<[R; 9]> {
    let q = r(3, 4);
    let z = ri(0);
    let row = |v: [i64; 9]| Some(v.map(ri));
    match (ic, jc) {
        (IClass::Zero, JClass::Lo) => row([0, 0, 0, 0, 9, -5, 0, -5, 1]),
        (IClass::Zero, JClass::Hi) => row([0, 0, 0, 5, -9, 0, -1, 5, 0]),
        (IClass::Zero, JClass::MidLo) => row([0, 0, 0, 0, 3, -3, 1, -1, 0]),
        (IClass::Zero, JClass::MidHi) => row([0, 0, 0, 3, -3, 0, 0, 1, -1]),
        (IClass::N1, JClass::Lo) => row([0, 5, -1, 0, -9, 5, 0, 0, 0]),
        (IClass::N1, JClass::Hi) => row([1, -5, 0, -5, 9, 0, 0, 0, 0]),
        (IClass::N1, JClass::MidLo) => row([-1, 1, 0, 0, -3, 3, 0, 0, 0]),
        (IClass::N1, JClass::MidHi) => row([0, -1, 1, -3, 3, 0, 0, 0, 0]),
        (IClass::Inner, JClass::Lo) => row([0, 0, 1, 0, 3, -1, 0, -3, 0]),
        (IClass::Inner, JClass::Hi) => row([-1, 0, 0, 1, -3, 0, 0, 3, 0]),
        (IClass::N2, JClass::Lo) => row([0, 3, 0, 0, -3, 1, 0, 0, -1]),
        (IClass::N2, JClass::Hi) => row([0, -3, 0, -1, 3, 0, 1, 0, 0]),
        (IClass::Inner | IClass::N2, JClass::Mid) => Some([-q, z, q, z, z, z, q, z, -q]),
        _ => None,
    }
}

/// Face node of a mixed stencil: on the face normal to the first axis at
/// tangential offset `dj`, or on the face normal to the second axis at `di`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MixedFaceNode {
    AFace { dj: i64 },
    BFace { di: i64 },
}

/// Face-value weights completing each mixed-derivative row so that the stencil is exact
/// on all polynomials of degree two (same normalisation as `table2`).
pub fn table2_face(ic: IClass, jc: JClass) -> &'static [(MixedFaceNode, i64)] {
    use MixedFaceNode::{AFace as A, BFace as B};
    match (ic, jc) {
        (IClass::Zero, JClass::Lo) => &[(B { di: 0 }, -4), (B { di: 1 }, 4), (A { dj: 0 }, -4), (A { dj: 1 }, 4)],
        (IClass::Zero, JClass::Hi) => &[(B { di: 0 }, 4), (B { di: 1 }, -4), (A { dj: -1 }, -4), (A { dj: 0 }, 4)],
        (IClass::Zero, JClass::MidLo) => &[(A { dj: -1 }, -1), (A { dj: 0 }, -2), (A { dj: 1 }, 3)],
        (IClass::Zero, JClass::MidHi) => &[(A { dj: -1 }, -3), (A { dj: 0 }, 2), (A { dj: 1 }, 1)],
        (IClass::N1, JClass::Lo) => &[(B { di: -1 }, -4), (B { di: 0 }, 4), (A { dj: 0 }, 4), (A { dj: 1 }, -4)],
        (IClass::N1, JClass::Hi) => &[(B { di: -1 }, 4), (B { di: 0 }, -4), (A { dj: -1 }, 4), (A { dj: 0 }, -4)],
        (IClass::N1, JClass::MidLo) => &[(A { dj: -1 }, 1), (A { dj: 0 }, 2), (A { dj: 1 }, -3)],
        (IClass::N1, JClass::MidHi) => &[(A { dj: -1 }, 3), (A { dj: 0 }, -2), (A { dj: 1 }, -1)],
        (IClass::Inner, JClass::Lo) => &[(B { di: -1 }, -1), (B { di: 0 }, -2), (B { di: 1 }, 3)],
        (IClass::Inner, JClass::Hi) => &[(B { di: -1 }, 1), (B { di: 0 }, 2), (B { di: 1 }, -3)],
        (IClass::N2, JClass::Lo) => &[(B { di: -1 }, -3), (B { di: 0 }, 2), (B { di: 1 }, 1)],
        (IClass::N2, JClass::Hi) => &[(B { di: -1 }, 3), (B { di: 0 }, -2), (B { di: 1 }, -1)],
        _ => &[],
    }
}

fn f(x: R) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}

/// Node of a derivative stencil: an interior grid point or a surface patch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Node {
    Interior([usize; 3]),
    Surface(usize),
}

/// Weights of the d^2/d(axis)^2 stencil at interior point `p`.
pub fn second_derivative(grid: &Grid, axis: usize, p: [usize; 3]) -> Vec<(Node, f64)> {
    one_axis(grid, axis, p, true)
}

/// Weights of the d/d(axis) stencil at interior point `p`.
pub fn first_derivative(grid: &Grid, axis: usize, p: [usize; 3]) -> Vec<(Node, f64)> {
    one_axis(grid, axis, p, false)
}

fn one_axis(grid: &Grid, axis: usize, p: [usize; 3], second: bool) -> Vec<(Node, f64)> {
    let n = grid.spec.n[axis];
    let d = grid.spec.spacing()[axis];
    let scale = if second { 1.0 / (d * d) } else { 1.0 / d };
    let pos = Pos1::of(p[axis], n);
    let (delta, xi) = table1(pos);
    let coef = if second { delta } else { xi };
    let mut out = Vec::new();
    for (slot, c) in coef.iter().enumerate() {
        if *c.numer() == 0 {
            continue;
        }
        let mut q = p;
        q[axis] = (p[axis] as i64 + slot as i64 - 2) as usize;
        out.push((Node::Interior(q), f(*c) * scale));
    }
    if let Some((fd, fx)) = table1_face(pos) {
        let face = Face::new(axis, pos == Pos1::Hi);
        let c = if second { fd } else { fx };
        out.push((Node::Surface(grid.patch_index(face, p)), f(c) * scale));
    }
    out
}

/// Weights of the d^2/(da db) stencil at interior point `p`, rows chosen by
/// the position class along `a` and along `b`.
pub fn mixed_derivative(grid: &Grid, a: usize, b: usize, p: [usize; 3]) -> Vec<(Node, f64)> {
    let n = grid.spec.n;
    let d = grid.spec.spacing();
    let scale = -1.0 / (3.0 * d[a] * d[b]);
    let ic = IClass::of(p[a], n[a]);
    let jc = JClass::of(p[b], n[b], ic);
    let w = table2(ic, jc).expect("every interior position has a mixed-derivative row");
    let mut out = Vec::new();
    for (c, (di, dj)) in w.iter().zip(OMEGA_OFFSETS) {
        if *c.numer() == 0 {
            continue;
        }
        let mut q = p;
        q[a] = (p[a] as i64 + di) as usize;
        q[b] = (p[b] as i64 + dj) as usize;
        out.push((Node::Interior(q), f(*c) * scale));
    }
    for &(node, c) in table2_face(ic, jc) {
        let (face, q) = match node {
            MixedFaceNode::AFace { dj } => {
                let mut q = p;
                q[b] = (p[b] as i64 + dj) as usize;
                (Face::new(a, ic == IClass::N1), q)
            }
            MixedFaceNode::BFace { di } => {
                let mut q = p;
                q[a] = (p[a] as i64 + di) as usize;
                (Face::new(b, jc == JClass::Hi), q)
            }
        };
        out.push((Node::Surface(grid.patch_index(face, q)), c as f64 * scale));
    }
    out
}

/// Scalars of the Lax-Wendroff update. `u*` use the y spacing and `v*` the z
/// spacing as in the e1 row; the other rows use the cyclic analogues.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StencilTable {
    pub dt: f64,
    pub c: f64,
    pub w1: f64,
    pub w2: f64,
    pub u1: f64,
    pub u2: f64,
    pub u3: f64,
    pub v1: f64,
    pub v2: f64,
    pub v3: f64,
}

impl StencilTable {
    pub fn new(spec: &GridSpec, mat: &MaterialParams, dt: f64) -> Self {
        let [dx, dy, dz] = spec.spacing();
        let c = mat.c1;
        let w1 = c * c * dt * dt / 2.0;
        let w2 = c * c * dt;
        Self {
            dt,
            c,
            w1,
            w2,
            u1: w1 / (dy * dy),
            u2: w2 / dy,
            u3: w1 / (3.0 * dx * dy),
            v1: w1 / (dz * dz),
            v2: w2 / dz,
            v3: w1 / (3.0 * dx * dz),
        }
    }
}

/// Compressed-row operator with a separate map from surface values to rows.
/// Surface columns are `6 * patch + component`.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator {
    pub dim: usize,
    pub num_surface: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    brow_ptr: Vec<usize>,
    bcols: Vec<usize>,
    bvals: Vec<f64>,
}

impl SparseOperator {
    pub fn from_rows(
        dim: usize,
        num_surface: usize,
        rows: Vec<BTreeMap<usize, f64>>,
        brows: Vec<BTreeMap<usize, f64>>,
    ) -> Self {
        let mut op = Self {
            dim,
            num_surface,
            row_ptr: vec![0],
            cols: Vec::new(),
            vals: Vec::new(),
            brow_ptr: vec![0],
            bcols: Vec::new(),
            bvals: Vec::new(),
        };
        for row in rows {
            for (c, v) in row {
                if v != 0.0 {
                    op.cols.push(c);
                    op.vals.push(v);
                }
            }
            op.row_ptr.push(op.cols.len());
        }
        for row in brows {
            for (c, v) in row {
                if v != 0.0 {
                    op.bcols.push(c);
                    op.bvals.push(v);
                }
            }
            op.brow_ptr.push(op.bcols.len());
        }
        op
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let s = self.row_ptr[r]..self.row_ptr[r + 1];
        self.cols[s.clone()].iter().copied().zip(self.vals[s].iter().copied())
    }

    pub fn boundary_row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let s = self.brow_ptr[r]..self.brow_ptr[r + 1];
        self.bcols[s.clone()].iter().copied().zip(self.bvals[s].iter().copied())
    }

    pub fn entry(&self, r: usize, c: usize) -> f64 {
        self.row(r).find(|&(cc, _)| cc == c).map_or(0.0, |(_, v)| v)
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row_nnz(&self, r: usize) -> usize {
        self.row_ptr[r + 1] - self.row_ptr[r]
    }

    /// y = M x (boundary coupling excluded).
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for (r, yr) in y.iter_mut().enumerate() {
            *yr = self.row(r).map(|(c, v)| v * x[c]).sum();
        }
    }

    fn apply_rows(&self, rows: std::ops::Range<usize>, x: &[f64], s: &[[f64; 6]], out: &mut [f64]) {
        for (o, r) in out.iter_mut().zip(rows) {
            let mut acc: f64 = self.row(r).map(|(c, v)| v * x[c]).sum();
            acc += self
                .boundary_row(r)
                .map(|(c, v)| v * s[c / 6][c % 6])
                .sum::<f64>();
            *o = acc;
        }
    }

    /// Q^{n+1} = M Q^n + B s^n.
    pub fn apply(&self, x: &[f64], s: &[[f64; 6]]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim];
        self.apply_into(x, s, &mut out, 1)?;
        Ok(out)
    }

    /// Row-block parallel apply; every row is computed identically whatever
    /// the partition, so the result does not depend on `workers`.
    pub fn apply_into(&self, x: &[f64], s: &[[f64; 6]], out: &mut [f64], workers: usize) -> Result<()> {
        if x.len() != self.dim {
            return Err(EosError::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        if out.len() != self.dim {
            return Err(EosError::DimensionMismatch { expected: self.dim, got: out.len() });
        }
        if s.len() != self.num_surface {
            return Err(EosError::DimensionMismatch { expected: self.num_surface, got: s.len() });
        }
        let workers = workers.max(1);
        if workers == 1 {
            self.apply_rows(0..self.dim, x, s, out);
            return Ok(());
        }
        let block = self.dim / workers;
        std::thread::scope(|scope| {
            let mut rest = out;
            for w in 0..workers {
                let start = w * block;
                let end = if w + 1 == workers { self.dim } else { start + block };
                let (mine, tail) = rest.split_at_mut(end - start);
                rest = tail;
                scope.spawn(move || self.apply_rows(start..end, x, s, mine));
            }
        });
        Ok(())
    }

    /// One "row col value" line per nonzero of M, then one
    /// "row s<patch>.<component> value" line per boundary coupling.
    pub fn dump<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for r in 0..self.dim {
            for (c, v) in self.row(r) {
                writeln!(w, "{r} {c} {v:e}")?;
            }
        }
        for r in 0..self.dim {
            for (c, v) in self.boundary_row(r) {
                writeln!(w, "{r} s{}.{} {v:e}", c / 6, c % 6)?;
            }
        }
        Ok(())
    }
}

/// Assemble the linear update operator of the interior Lax-Wendroff scheme.
pub fn assemble_update_matrix(grid: &Grid, mat: &MaterialParams, dt: f64) -> Result<SparseOperator> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(EosError::InvalidStep(format!("dt = {dt} must be positive")));
    }
    let spec = &grid.spec;
    if spec.n.iter().any(|&n| n < GridSpec::MIN_POINTS) {
        return Err(EosError::InvalidGrid("grid too small for the stencil footprint".into()));
    }
    let l1 = spec.lambda1();
    let c2 = mat.c1 * mat.c1;
    let w1 = c2 * dt * dt / 2.0;
    let mut rows = Vec::with_capacity(6 * l1);
    let mut brows = Vec::with_capacity(6 * l1);
    for field in 0..2 {
        for a in 0..3 {
            let b = (a + 1) % 3;
            let c = (a + 2) % 3;
            let me = 3 * field;
            let other = 3 * (1 - field);
            let k2 = if field == 0 { c2 * dt } else { -dt };
            for node in 0..l1 {
                let p = spec.unflatten_node(node);
                let mut row = BTreeMap::new();
                let mut brow = BTreeMap::new();
                row.insert((me + a) * l1 + node, 1.0);
                let mut add = |comp: usize, weights: Vec<(Node, f64)>, s: f64| {
                    for (n, w) in weights {
                        match n {
                            Node::Interior(q) => {
                                *row.entry(comp * l1 + spec.node(q[0], q[1], q[2])).or_insert(0.0) += s * w
                            }
                            Node::Surface(sp) => *brow.entry(6 * sp + comp).or_insert(0.0) += s * w,
                        }
                    }
                };
                add(me + a, second_derivative(grid, b, p), w1);
                add(me + a, second_derivative(grid, c, p), w1);
                add(me + b, mixed_derivative(grid, a, b, p), -w1);
                add(me + c, mixed_derivative(grid, a, c, p), -w1);
                add(other + c, first_derivative(grid, b, p), k2);
                add(other + b, first_derivative(grid, c, p), -k2);
                rows.push(row);
                brows.push(brow);
            }
        }
    }
    Ok(SparseOperator::from_rows(6 * l1, grid.num_surface(), rows, brows))
}
