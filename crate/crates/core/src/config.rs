use crate::engine::{Method, RunConfig};
use crate::error::{EosError, Result};
use crate::sources::{DipoleBlob, Drive, ManufacturedSolution, Pulse};
use crate::types::{GridSpec, MaterialParams, Vec3};
use serde::{Deserialize, Serialize};
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub grid: GridSection,
    #[serde(default)]
    pub material: MaterialSection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<SourceSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manufactured: Option<ManufacturedSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub singular: Option<SingularSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n: [usize; 3],
    #[serde(default = "default_lo")]
    pub lo: [f64; 3],
    #[serde(default = "default_extent")]
    pub extent: [f64; 3],
}

fn default_lo() -> [f64; 3] {
    [-0.5; 3]
}

fn default_extent() -> [f64; 3] {
    [1.0; 3]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialSection {
    pub mu0: f64,
    pub eps0: f64,
    pub mu1: f64,
    pub eps1: f64,
}

impl Default for MaterialSection {
    fn default() -> Self {
        Self { mu0: 1.0, eps0: 1.0, mu1: 1.0, eps1: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodKey {
    Eos,
    LwExact,
    Representation,
}

impl From<MethodKey> for Method {
    fn from(m: MethodKey) -> Self {
        match m {
            MethodKey::Eos => Method::Eos,
            MethodKey::LwExact => Method::LwExact,
            MethodKey::Representation => Method::Representation,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub method: MethodKey,
    pub tau: f64,
    pub steps: usize,
    pub workers: usize,
    #[serde(default)]
    pub probes: Vec<[f64; 3]>,
}

impl Default for RunSection {
    fn default() -> Self {
        Self { method: MethodKey::Eos, tau: 0.45, steps: 200, workers: 1, probes: Vec::new() }
    }
}

/// Dipole blob outside the box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSection {
    pub center: [f64; 3],
    pub radius: f64,
    pub moment: [f64; 3],
    pub t0: f64,
    pub width: f64,
}

/// Polynomial bubble with a compact pulse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManufacturedSection {
    pub alpha: [f64; 3],
    pub t0: f64,
    pub width: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSection {
    pub tau: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu1: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps1: Option<Vec<f64>>,
    /// Steps of the empirical growth run per tuple; zero skips it.
    #[serde(default)]
    pub growth_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SingularSection {
    pub cells: Vec<[f64; 3]>,
}

/// Command-line overrides applied on top of a loaded config.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub workers: Option<usize>,
    pub steps: Option<usize>,
    pub tau: Option<f64>,
    pub mu1: Option<f64>,
    pub eps1: Option<f64>,
}

fn v3(a: [f64; 3]) -> Vec3 {
    Vec3::new(a[0], a[1], a[2])
}

impl Config {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| EosError::Config(e.message().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| EosError::Io { path: path.display().to_string(), msg: e.to_string() })?;
        toml::from_str(&text).map_err(|e| EosError::Config(format!("{}: {}", path.display(), e.message())))
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(w) = o.workers {
            self.run.workers = w;
        }
        if let Some(s) = o.steps {
            self.run.steps = s;
        }
        if let Some(t) = o.tau {
            self.run.tau = t;
            if let Some(scan) = &mut self.scan {
                scan.tau = vec![t];
            }
        }
        if let Some(m) = o.mu1 {
            self.material.mu1 = m;
            if let Some(scan) = &mut self.scan {
                scan.mu1 = Some(vec![m]);
            }
        }
        if let Some(e) = o.eps1 {
            self.material.eps1 = e;
            if let Some(scan) = &mut self.scan {
                scan.eps1 = Some(vec![e]);
            }
        }
    }

    /// Single-line JSON rendering used as the metadata header of output files.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serialises")
    }

    pub fn grid_spec(&self) -> Result<GridSpec> {
        GridSpec::new(self.grid.n, self.grid.lo, self.grid.extent)
    }

    pub fn material(&self) -> Result<MaterialParams> {
        let m = &self.material;
        MaterialParams::new(m.mu0, m.eps0, m.mu1, m.eps1)
    }

    pub fn drive(&self, spec: &GridSpec, mat: MaterialParams) -> Result<Drive> {
        match (&self.source, &self.manufactured) {
            (Some(s), None) => Ok(Drive::Outside(DipoleBlob::new(
                v3(s.center),
                s.radius,
                v3(s.moment),
                Pulse::new(s.t0, s.width)?,
            )?)),
            (None, Some(m)) => Ok(Drive::Manufactured(ManufacturedSolution::bubble(
                spec,
                v3(m.alpha),
                Pulse::new(m.t0, m.width)?,
                mat,
            ))),
            (Some(_), Some(_)) => Err(EosError::Config("give either [source] or [manufactured], not both".into())),
            (None, None) => Err(EosError::Config("a [source] or [manufactured] section is required".into())),
        }
    }

    pub fn run_config(&self) -> Result<RunConfig> {
        let spec = self.grid_spec()?;
        let mat = self.material()?;
        let cfg = RunConfig {
            method: self.run.method.into(),
            drive: self.drive(&spec, mat)?,
            spec,
            mat,
            tau: self.run.tau,
            steps: self.run.steps,
            probes: self.run.probes.iter().map(|p| v3(*p)).collect(),
            workers: self.run.workers,
        };
        if cfg.steps == 0 {
            return Err(EosError::Config("steps must be at least 1".into()));
        }
        cfg.validate()?;
        Ok(cfg)
    }
}
