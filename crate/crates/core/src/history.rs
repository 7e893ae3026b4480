use crate::error::{EosError, Result};
use std::collections::VecDeque;

/// Cubic Lagrange weights for value, first and second time derivative at a
/// fixed delay behind the current level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Retard {
    /// Offset of the oldest of the four stencil levels behind the current level.
    pub lag: usize,
    pub w: [[f64; 4]; 3],
}

const OTHERS: [[f64; 3]; 4] = [[1.0, 2.0, 3.0], [0.0, 2.0, 3.0], [0.0, 1.0, 3.0], [0.0, 1.0, 2.0]];

impl Retard {
    /// `delay` in time units; the newest level the stencil may touch is
    /// `current - newest_offset`. Points closer than that are extrapolated.
    pub fn new(delay: f64, dt: f64, newest_offset: usize) -> Self {
        let s = (delay / dt).max(0.0);
        let m = s.floor() as usize;
        let lag = (m + 2).max(newest_offset + 3);
        let x = lag as f64 - s;
        let mut w = [[0.0; 4]; 3];
        for i in 0..4 {
            let o = OTHERS[i];
            let den = (i as f64 - o[0]) * (i as f64 - o[1]) * (i as f64 - o[2]);
            let (a, b, c) = (x - o[0], x - o[1], x - o[2]);
            w[0][i] = a * b * c / den;
            w[1][i] = (b * c + a * c + a * b) / den / dt;
            w[2][i] = 2.0 * (a + b + c) / den / (dt * dt);
        }
        Self { lag, w }
    }
}

/// Ring buffer of time levels t_k = k dt, k = 0, 1, ...; levels before 0 are
/// the quiescent zero state.
#[derive(Debug, Clone)]
pub struct History {
    width: usize,
    depth: usize,
    dt: f64,
    oldest: usize,
    levels: VecDeque<Vec<f64>>,
    zeros: Vec<f64>,
}

impl History {
    pub fn new(width: usize, depth: usize, dt: f64) -> Self {
        Self {
            width,
            depth: depth.max(4),
            dt,
            oldest: 0,
            levels: VecDeque::new(),
            zeros: vec![0.0; width],
        }
    }

    /// Depth needed to reach back over `span` at speed `c`, plus stencil margin.
    pub fn depth_for(span: f64, c: f64, dt: f64) -> usize {
        (span / (c * dt)).ceil() as usize + 6
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.oldest + self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Newest stored level index, if any.
    pub fn newest(&self) -> Option<usize> {
        self.len().checked_sub(1)
    }

    pub fn push(&mut self, data: Vec<f64>) -> Result<()> {
        if data.len() != self.width {
            return Err(EosError::DimensionMismatch {
                expected: self.width,
                got: data.len(),
            });
        }
        if self.levels.len() == self.depth {
            let mut old = self.levels.pop_front().unwrap();
            self.oldest += 1;
            old.copy_from_slice(&data);
            self.levels.push_back(old);
        } else {
            self.levels.push_back(data);
        }
        Ok(())
    }

    /// Level `k` (may be negative for the zero pre-history).
    pub fn level(&self, k: i64) -> Result<&[f64]> {
        if k < 0 {
            return Ok(&self.zeros);
        }
        let k = k as usize;
        if k >= self.len() {
            return Err(EosError::Causality {
                requested: k as f64 * self.dt,
                newest: self.newest().map_or(f64::NEG_INFINITY, |n| n as f64 * self.dt),
            });
        }
        if k < self.oldest {
            return Err(EosError::HistoryDepth {
                requested: k as f64 * self.dt,
                oldest: self.oldest as f64 * self.dt,
            });
        }
        Ok(&self.levels[k - self.oldest])
    }

    /// The four levels of a retarded stencil ending `r.lag - 3` levels behind `current`.
    pub fn stencil(&self, current: usize, r: &Retard) -> Result<[&[f64]; 4]> {
        let base = current as i64 - r.lag as i64;
        Ok([
            self.level(base)?,
            self.level(base + 1)?,
            self.level(base + 2)?,
            self.level(base + 3)?,
        ])
    }

    /// Value and derivatives of entry `i` at time t, reading no level newer
    /// than `newest_allowed`.
    pub fn sample(&self, i: usize, t: f64, newest_allowed: usize) -> Result<[f64; 3]> {
        let delay = newest_allowed as f64 * self.dt - t;
        if delay < -self.dt * (1.0 + 1e-9) {
            return Err(EosError::Causality {
                requested: t,
                newest: newest_allowed as f64 * self.dt,
            });
        }
        let r = Retard::new(delay + self.dt, self.dt, 1);
        let lvl = self.stencil(newest_allowed + 1, &r)?;
        Ok(combine(&r, &lvl, i))
    }
}

fn combine(r: &Retard, lvl: &[&[f64]; 4], i: usize) -> [f64; 3] {
    let mut out = [0.0; 3];
    for (d, o) in out.iter_mut().enumerate() {
        *o = (0..4).map(|k| r.w[d][k] * lvl[k][i]).sum();
    }
    out
}
