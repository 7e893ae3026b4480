use crate::types::Vec3;
use std::collections::BTreeMap;

/// Sparse polynomial in (x, y, z) with exact differentiation.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Poly3 {
    terms: BTreeMap<[u32; 3], f64>,
}

impl Poly3 {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: f64) -> Self {
        Self::monomial(c, [0, 0, 0])
    }

    pub fn monomial(c: f64, e: [u32; 3]) -> Self {
        let mut p = Self::zero();
        if c != 0.0 {
            p.terms.insert(e, c);
        }
        p
    }

    /// (x_axis - lo)^2 (hi - x_axis)^2, vanishing with its first derivative at lo and hi.
    pub fn bump(axis: usize, lo: f64, hi: f64) -> Self {
        let lin = |c0: f64, c1: f64| {
            let mut e = [0; 3];
            e[axis] = 1;
            Self::constant(c0).add(&Self::monomial(c1, e))
        };
        let a = lin(-lo, 1.0);
        let b = lin(hi, -1.0);
        let ab = a.mul(&b);
        ab.mul(&ab)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &o.terms {
            *out.terms.entry(*e).or_insert(0.0) += c;
        }
        out.terms.retain(|_, c| *c != 0.0);
        out
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = Self::zero();
        if s != 0.0 {
            for (e, c) in &self.terms {
                out.terms.insert(*e, c * s);
            }
        }
        out
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut out = Self::zero();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let e = [e1[0] + e2[0], e1[1] + e2[1], e1[2] + e2[2]];
                *out.terms.entry(e).or_insert(0.0) += c1 * c2;
            }
        }
        out.terms.retain(|_, c| *c != 0.0);
        out
    }

    pub fn deriv(&self, axis: usize) -> Self {
        let mut out = Self::zero();
        for (e, c) in &self.terms {
            if e[axis] > 0 {
                let mut d = *e;
                d[axis] -= 1;
                *out.terms.entry(d).or_insert(0.0) += c * e[axis] as f64;
            }
        }
        out
    }

    pub fn eval(&self, x: &Vec3) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| c * x[0].powi(e[0] as i32) * x[1].powi(e[1] as i32) * x[2].powi(e[2] as i32))
            .sum()
    }
}

/// Vector of three polynomials.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PolyVec(pub [Poly3; 3]);

impl PolyVec {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn eval(&self, x: &Vec3) -> Vec3 {
        Vec3::new(self.0[0].eval(x), self.0[1].eval(x), self.0[2].eval(x))
    }

    pub fn scale(&self, s: f64) -> Self {
        PolyVec(self.0.clone().map(|p| p.scale(s)))
    }

    pub fn curl(&self) -> Self {
        let [a, b, c] = &self.0;
        PolyVec([
            c.deriv(1).sub(&b.deriv(2)),
            a.deriv(2).sub(&c.deriv(0)),
            b.deriv(0).sub(&a.deriv(1)),
        ])
    }

    pub fn div(&self) -> Poly3 {
        self.0[0].deriv(0).add(&self.0[1].deriv(1)).add(&self.0[2].deriv(2))
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Poly3::is_zero)
    }
}
