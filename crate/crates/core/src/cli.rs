use crate::config::{Config, Overrides};
use crate::engine::{
    empirical_blowup_check, exact_probe_series, run, run_manufactured_test, run_three_method_comparison, Method,
    RunConfig,
};
use crate::error::EosError;
use crate::quadrature::LineQuadrature;
use crate::singular::{tabulate, SingularCell};
use crate::stability::stability_scan;
use clap::{Parser, Subcommand};
use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_OUTPUT: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "eos", version, about = "Transient Maxwell scattering from a box")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Sectioned key = value config file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[arg(long, global = true)]
    pub steps: Option<usize>,
    #[arg(long, global = true)]
    pub tau: Option<f64>,
    #[arg(long, global = true)]
    pub mu1: Option<f64>,
    #[arg(long, global = true)]
    pub eps1: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Spectral radius of the interior operator over the [scan] grid.
    StabilityScan,
    /// Self-cell singular integrals for the [singular] cell list.
    SingularTable,
    /// One time-stepping run with probe series.
    Run,
    /// Lax-Wendroff with exact boundary and the interior representation against the exact field.
    ThreeMethod,
    /// Full scheme and Lax-Wendroff with exact boundary against the manufactured fields.
    Manufactured,
}

impl Command {
    fn name(self) -> &'static str {
        match self {
            Command::StabilityScan => "stability-scan",
            Command::SingularTable => "singular-table",
            Command::Run => "run",
            Command::ThreeMethod => "three-method",
            Command::Manufactured => "manufactured",
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Eos(#[from] EosError),
    #[error("cannot write {path}: {source}")]
    Output { path: String, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Output { .. } => EXIT_OUTPUT,
            CliError::Eos(e) => match e {
                EosError::Config(_)
                | EosError::Io { .. }
                | EosError::InvalidGrid(_)
                | EosError::InvalidMaterial(_)
                | EosError::InvalidStep(_)
                | EosError::NotInside(_) => EXIT_CONFIG,
                _ => EXIT_NUMERICAL,
            },
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the exit status.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("eos: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    let overrides = Overrides { workers: cli.workers, steps: cli.steps, tau: cli.tau, mu1: cli.mu1, eps1: cli.eps1 };
    let config = match &cli.config {
        Some(path) => {
            let mut c = Config::load(path)?;
            c.apply(&overrides);
            Some(c)
        }
        None if cli.command == Command::SingularTable => None,
        None => return Err(EosError::Config(format!("{} needs --config", cli.command.name())).into()),
    };
    let out = Output::new(&cli.out, cli.command, config.as_ref())?;
    match (cli.command, config) {
        (Command::SingularTable, c) => singular_table(&out, c.as_ref()),
        (Command::StabilityScan, Some(c)) => stability(&out, &c),
        (Command::Run, Some(c)) => single_run(&out, &c),
        (Command::ThreeMethod, Some(c)) => three_method(&out, &c),
        (Command::Manufactured, Some(c)) => manufactured(&out, &c),
        (_, None) => unreachable!("config checked above"),
    }
}

struct Output {
    dir: PathBuf,
    header: String,
}

impl Output {
    fn new(dir: &Path, cmd: Command, config: Option<&Config>) -> Result<Self, CliError> {
        std::fs::create_dir_all(dir)
            .map_err(|source| CliError::Output { path: dir.display().to_string(), source })?;
        let json = config.map(Config::to_json).unwrap_or_else(|| "{}".into());
        Ok(Self { dir: dir.to_path_buf(), header: format!("# eos {} {}\n", cmd.name(), json) })
    }

    /// Writes through a temporary file in the target directory and renames it into place.
    fn write(&self, name: &str, body: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        let err = |source| CliError::Output { path: path.display().to_string(), source };
        let mut tmp = tempfile::NamedTempFile::new_in(&self.dir).map_err(err)?;
        tmp.write_all(self.header.as_bytes()).map_err(err)?;
        tmp.write_all(body.as_bytes()).map_err(err)?;
        tmp.flush().map_err(err)?;
        tmp.persist(&path).map_err(|e| err(e.error))?;
        Ok(())
    }
}

fn num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 {
        "0".into()
    } else if (1e-4..1e15).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn opt_step(s: Option<usize>) -> String {
    s.map(|n| n.to_string()).unwrap_or_default()
}

fn probe_csv(times: &[f64], series: &[[f64; 6]]) -> String {
    let mut s = String::from("t,Ex,Ey,Ez,Bx,By,Bz,|E|^2\n");
    for (t, v) in times.iter().zip(series) {
        let e2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
        let cols: Vec<String> = std::iter::once(*t).chain(v.iter().copied()).chain([e2]).map(num).collect();
        writeln!(s, "{}", cols.join(",")).unwrap();
    }
    s
}

fn note_blowup(method: Method, step: Option<usize>) {
    if let Some(n) = step {
        eprintln!("eos: {} blew up at step {n}", method.name());
    }
}

fn singular_table(out: &Output, config: Option<&Config>) -> Result<(), CliError> {
    let default = [[1.0, 1.0, 1.0], [2.0, 1.0, 1.0], [1.0, 2.0, 0.5], [0.25, 1.0, 4.0], [4.0, 4.0, 1.0]];
    let cells: Vec<[f64; 3]> = config
        .and_then(|c| c.singular.as_ref())
        .map(|s| s.cells.clone())
        .unwrap_or_else(|| default.to_vec());
    let q = LineQuadrature::production();
    let mut s = String::from("dx,dy,dz,f1,f2x,f3x,g1\n");
    for [dx, dy, dz] in cells {
        let cell = SingularCell::new(dx, dy, dz)
            .ok_or_else(|| EosError::Config(format!("cell ({dx}, {dy}, {dz}) needs positive finite sides")))?;
        let v = tabulate(&cell, &q);
        let cols: Vec<String> = [dx, dy, dz, v.f1, v.f2x, v.f3x, v.g1].into_iter().map(num).collect();
        writeln!(s, "{}", cols.join(",")).unwrap();
    }
    out.write("singular.csv", &s)
}

fn stability(out: &Output, c: &Config) -> Result<(), CliError> {
    let scan = c.scan.as_ref().ok_or_else(|| EosError::Config("stability-scan needs a [scan] section".into()))?;
    let spec = c.grid_spec()?;
    let mu1 = scan.mu1.clone().unwrap_or_else(|| vec![c.material.mu1]);
    let eps1 = scan.eps1.clone().unwrap_or_else(|| vec![c.material.eps1]);
    let mut reports = stability_scan(&spec, &scan.tau, &mu1, &eps1);
    if scan.growth_steps > 0 {
        for r in &mut reports {
            let mut tuple = c.clone();
            tuple.run.tau = r.tau;
            tuple.material.mu1 = r.mu1;
            tuple.material.eps1 = r.eps1;
            let cfg = RunConfig { method: Method::Eos, ..tuple.run_config()? };
            r.growth_exponent = Some(empirical_blowup_check(&cfg, scan.growth_steps)?.exponent);
        }
    }
    let mut s = String::from("tau,mu1,eps1,spectral_radius,stable,growth_exponent,converged\n");
    for r in &reports {
        let g = r.growth_exponent.map(num).unwrap_or_default();
        writeln!(
            s,
            "{},{},{},{},{},{},{}",
            num(r.tau),
            num(r.mu1),
            num(r.eps1),
            num(r.spectral_radius),
            r.stable,
            g,
            r.converged
        )
        .unwrap();
    }
    out.write("stability.csv", &s)
}

fn single_run(out: &Output, c: &Config) -> Result<(), CliError> {
    let cfg = c.run_config()?;
    let r = run(&cfg)?;
    note_blowup(cfg.method, r.blowup_step);
    for (k, series) in r.probes.iter().enumerate() {
        out.write(&format!("probe_{k}.csv"), &probe_csv(&r.times, series))?;
    }
    let mut s = String::from("step,t,norm\n");
    for (n, (t, v)) in r.times.iter().zip(&r.norms).enumerate() {
        writeln!(s, "{},{},{}", n + 1, num(*t), num(*v)).unwrap();
    }
    out.write("norms.csv", &s)?;
    let err = r.manufactured_error.map(num).unwrap_or_default();
    let summary = format!(
        "method,steps,dt,blowup_step,growth_exponent,manufactured_error\n{},{},{},{},{},{}\n",
        cfg.method.name(),
        r.times.len(),
        num(cfg.dt()),
        opt_step(r.blowup_step),
        num(r.growth_exponent()),
        err
    );
    out.write("summary.csv", &summary)
}

fn three_method(out: &Output, c: &Config) -> Result<(), CliError> {
    let cfg = c.run_config()?;
    let rows = run_three_method_comparison(&cfg)?;
    let exact = exact_probe_series(&cfg)?;
    let times: Vec<f64> = (1..=cfg.steps).map(|n| n as f64 * cfg.dt()).collect();
    for (k, series) in exact.iter().enumerate() {
        out.write(&format!("probe_{k}_exact.csv"), &probe_csv(&times, series))?;
    }
    let mut s = String::from("method,rel_l2,max_abs,growth_exponent,blowup_step\n");
    for m in &rows {
        note_blowup(m.method, m.blowup_step);
        for (k, series) in m.result.probes.iter().enumerate() {
            out.write(&format!("probe_{k}_{}.csv", m.method.name()), &probe_csv(&m.result.times, series))?;
        }
        writeln!(
            s,
            "{},{},{},{},{}",
            m.method.name(),
            num(m.error.rel_l2),
            num(m.error.max_abs),
            num(m.growth_exponent),
            opt_step(m.blowup_step)
        )
        .unwrap();
    }
    out.write("three_method.csv", &s)
}

fn manufactured(out: &Output, c: &Config) -> Result<(), CliError> {
    let cfg = c.run_config()?;
    let rows = run_manufactured_test(&cfg)?;
    let mut s = String::from("method,error,growth_exponent,blowup_step,bounded\n");
    for m in &rows {
        note_blowup(m.method, m.blowup_step);
        writeln!(
            s,
            "{},{},{},{},{}",
            m.method.name(),
            num(m.error),
            num(m.growth_exponent),
            opt_step(m.blowup_step),
            m.bounded
        )
        .unwrap();
    }
    out.write("manufactured.csv", &s)
}
