//! Command-line front end: argument parsing, sweeps and table output.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod emit;

use std::f64::consts::PI;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dirac_delta::casimir::{classify_unitary, default_epsilon, mode_sum_oracle, vacuum_energy};
use dirac_delta::scattering::{unitarity_defect, Model};
use dirac_delta::spectrum::{count_map, find_bound_states, Plane};
use dirac_delta::{Coupling, ParticleKind};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use emit::{emit, sibling_path, Format, Row, Table};

/// Environment variable that fixes the worker-thread count.
pub const THREADS_ENV: &str = "DIRAC_DELTA_THREADS";
/// Scatter rows whose unitarity defect exceeds this abort the run.
pub const UNITARITY_GUARD: f64 = 1e-10;

#[derive(Debug, Parser, Serialize)]
#[command(
    name = "dirac-delta",
    version,
    about = "Dirac fermions on a line with delta interactions"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args, Serialize)]
pub struct OutputArgs {
    /// Output file; the primary table goes to stdout when omitted and
    /// secondary tables are skipped.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv, global = true)]
    pub format: FormatArg,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FormatArg {
    Csv,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelArg {
    Single,
    DoubleElectric,
    DoubleMass,
    DoubleGeneric,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KindArg {
    Electron,
    Positron,
}

impl From<KindArg> for ParticleKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Electron => ParticleKind::Electron,
            KindArg::Positron => ParticleKind::Positron,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PlaneArg {
    Electric,
    Mass,
}

/// Couplings and geometry shared by `scatter` and `bound`.
#[derive(Debug, Clone, Args, Serialize)]
pub struct ModelArgs {
    #[arg(long, value_enum)]
    pub model: ModelArg,
    #[arg(long, value_enum, default_value_t = KindArg::Electron)]
    pub kind: KindArg,
    /// Electric coupling of a single delta.
    #[arg(long, allow_hyphen_values = true)]
    pub q: Option<f64>,
    /// Mass coupling of a single delta.
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub q1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub q2: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda1: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub lambda2: Option<f64>,
    /// Half-separation of a double delta (deltas at ±a).
    #[arg(short = 'a', long = "a")]
    pub a: Option<f64>,
    #[arg(short = 'm', long = "m", default_value_t = 1.0)]
    pub m: f64,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "subcommand", rename_all = "lowercase")]
pub enum Command {
    /// Transmission and reflection amplitudes over a momentum range.
    Scatter {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 0.01)]
        k_min: f64,
        #[arg(long, default_value_t = 10.0)]
        k_max: f64,
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
    /// Bound states of a double delta and their spinor profiles.
    Bound {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, allow_hyphen_values = true, default_value_t = -5.0)]
        z_min: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 5.0)]
        z_max: f64,
        #[arg(long, default_value_t = 201)]
        z_samples: usize,
    },
    /// Bound-state counts over a coupling plane, with boundary curves.
    Map {
        #[arg(long, value_enum)]
        plane: PlaneArg,
        #[arg(long, default_value_t = 200)]
        grid: usize,
        #[arg(short = 'a', long = "a", default_value_t = 1.0)]
        a: f64,
        #[arg(short = 'm', long = "m", default_value_t = 1.0)]
        m: f64,
        #[arg(long, value_enum, default_value_t = KindArg::Electron)]
        kind: KindArg,
        /// Mass plane spans [-w, w] in both couplings.
        #[arg(long, default_value_t = 3.0)]
        half_width: f64,
    },
    /// Vacuum interaction energy between confining plates over a range of a.
    Casimir {
        /// Plate coupling; must give a matching matrix of ±1.
        #[arg(long, allow_hyphen_values = true, default_value_t = PI)]
        q: f64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
        lambda: f64,
        #[arg(short = 'm', long = "m", default_value_t = 1.0)]
        m: f64,
        #[arg(long, default_value_t = 0.1)]
        a_min: f64,
        #[arg(long, default_value_t = 5.0)]
        a_max: f64,
        #[arg(long, default_value_t = 50)]
        samples: usize,
        /// Add the mode-sum estimate as an extra column.
        #[arg(long)]
        oracle: bool,
    },
}

/// Why a run stopped.
#[derive(Debug, Clone, PartialEq)]
pub enum Failure {
    /// Invalid or incomplete parameters (exit status 2).
    Usage(String),
    /// Numerical or I/O failure (exit status 1).
    Runtime(String),
}

impl Failure {
    pub fn exit_code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Runtime(_) => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Runtime(m) => m,
        }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn runtime(e: impl ToString) -> Failure {
    Failure::Runtime(e.to_string())
}

fn need(value: Option<f64>, flag: &str, model: ModelArg) -> Result<f64, Failure> {
    let model = serde_json::to_value(model)
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_default();
    value.ok_or_else(|| usage(format!("--{flag} is required for --model {model}")))
}

impl ModelArgs {
    pub fn build(&self) -> Result<Model, Failure> {
        let m = self.model;
        let model = match m {
            ModelArg::Single => Model::Single(Coupling::new(self.q.unwrap_or(0.0), self.lambda.unwrap_or(0.0))),
            ModelArg::DoubleElectric => Model::DoubleElectric {
                q1: need(self.q1, "q1", m)?,
                q2: need(self.q2, "q2", m)?,
                a: need(self.a, "a", m)?,
            },
            ModelArg::DoubleMass => Model::DoubleMass {
                l1: need(self.lambda1, "lambda1", m)?,
                l2: need(self.lambda2, "lambda2", m)?,
                a: need(self.a, "a", m)?,
            },
            ModelArg::DoubleGeneric => Model::DoubleGeneric {
                c1: Coupling::new(self.q1.unwrap_or(0.0), self.lambda1.unwrap_or(0.0)),
                c2: Coupling::new(self.q2.unwrap_or(0.0), self.lambda2.unwrap_or(0.0)),
                a: need(self.a, "a", m)?,
            },
        };
        let values = [
            self.q,
            self.lambda,
            self.q1,
            self.q2,
            self.lambda1,
            self.lambda2,
            self.a,
            Some(self.m),
        ];
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(usage("parameters must be finite"));
        }
        model.config(self.m).map_err(|e| usage(e.to_string()))?;
        Ok(model)
    }
}

/// `n ≥ 2` evenly spaced points on `[lo, hi]`, endpoints included.
pub fn linspace(lo: f64, hi: f64, n: usize, what: &str) -> Result<Vec<f64>, Failure> {
    if n < 2 {
        return Err(usage(format!("{what}: need at least 2 samples, got {n}")));
    }
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(usage(format!("{what}: empty range [{lo}, {hi}]")));
    }
    let step = (hi - lo) / (n - 1) as f64;
    Ok((0..n)
        .map(|i| if i + 1 == n { hi } else { lo + step * i as f64 })
        .collect())
}

/// Tables produced by one run: the primary one plus named secondaries.
pub struct RunOutput {
    pub primary: Table,
    pub secondary: Vec<(&'static str, Table)>,
}

pub fn compute(cmd: &Command) -> Result<RunOutput, Failure> {
    match cmd {
        Command::Scatter {
            model,
            k_min,
            k_max,
            samples,
        } => scatter(model, *k_min, *k_max, *samples),
        Command::Bound {
            model,
            z_min,
            z_max,
            z_samples,
        } => bound(model, *z_min, *z_max, *z_samples),
        Command::Map {
            plane,
            grid,
            a,
            m,
            kind,
            half_width,
        } => map(*plane, *grid, *a, *m, (*kind).into(), *half_width),
        Command::Casimir {
            q,
            lambda,
            m,
            a_min,
            a_max,
            samples,
            oracle,
        } => casimir(Coupling::new(*q, *lambda), *m, *a_min, *a_max, *samples, *oracle),
    }
}

fn scatter(args: &ModelArgs, k_min: f64, k_max: f64, samples: usize) -> Result<RunOutput, Failure> {
    let model = args.build()?;
    if !(k_min > 0.0) {
        return Err(usage(format!("--k-min must be positive, got {k_min}")));
    }
    let ks = linspace(k_min, k_max, samples, "k range")?;
    let kind: ParticleKind = args.kind.into();
    let rows = ks
        .par_iter()
        .map(|&k| {
            let s = model.amplitudes(args.m, k, kind).map_err(runtime)?;
            let defect = unitarity_defect(&s);
            if !(defect <= UNITARITY_GUARD) {
                return Err(runtime(format!(
                    "unitarity defect {defect:e} at k = {k} exceeds {UNITARITY_GUARD:e}"
                )));
            }
            let mut row = Row::new()
                .put("k", k)
                .complex("sigma", s.sigma)
                .complex("sigma_l", s.sigma_l)
                .complex("rho_r", s.rho_r)
                .complex("rho_l", s.rho_l);
            if let Some(i) = s.interior {
                row = row
                    .complex("a_r", i.a_r)
                    .complex("b_r", i.b_r)
                    .complex("a_l", i.a_l)
                    .complex("b_l", i.b_l);
            }
            Ok(row.put("unitarity_defect", defect))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(RunOutput {
        primary: Table::from_rows(Row::new(), rows),
        secondary: Vec::new(),
    })
}

fn bound(args: &ModelArgs, z_min: f64, z_max: f64, z_samples: usize) -> Result<RunOutput, Failure> {
    if args.model == ModelArg::Single {
        return Err(usage("bound needs a double-delta model"));
    }
    let cfg = args.build()?.config(args.m).map_err(runtime)?;
    let zs = linspace(z_min, z_max, z_samples, "z range")?;
    let kind: ParticleKind = args.kind.into();
    let spectrum = find_bound_states(&cfg, kind).map_err(runtime)?;

    let c0 = dirac_delta::Complex64::new(0.0, 0.0);
    let header = Row::new()
        .put("index", 0usize)
        .put("kind", kind.name())
        .put("kappa", 0.0)
        .put("omega", 0.0)
        .complex("a1", c0)
        .complex("b2", c0)
        .complex("c2", c0)
        .complex("d3", c0)
        .put("norm_const", 0.0)
        .put("norm_sq", 0.0)
        .put("residual", 0.0)
        .put("matching_residual", 0.0)
        .put("zero_mode", false);
    let states = spectrum
        .states
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let [a1, b2, c2, d3] = s.coefficients;
            Row::new()
                .put("index", i)
                .put("kind", kind.name())
                .put("kappa", s.kappa)
                .put("omega", s.omega)
                .complex("a1", a1)
                .complex("b2", b2)
                .complex("c2", c2)
                .complex("d3", d3)
                .put("norm_const", s.norm_const)
                .put("norm_sq", s.norm_sq())
                .put("residual", s.residual)
                .put("matching_residual", s.matching_residual)
                .put("zero_mode", spectrum.zero_mode)
        })
        .collect();

    let profile_header = Row::new()
        .put("index", 0usize)
        .put("z", 0.0)
        .complex("psi1", c0)
        .complex("psi2", c0)
        .put("density", 0.0);
    let profiles = spectrum
        .states
        .iter()
        .enumerate()
        .flat_map(|(i, s)| {
            zs.iter().map(move |&z| {
                let psi = s.spinor_at(z);
                Row::new()
                    .put("index", i)
                    .put("z", z)
                    .complex("psi1", psi[0])
                    .complex("psi2", psi[1])
                    .put("density", psi.norm_squared())
            })
        })
        .collect();
    if spectrum.zero_mode {
        eprintln!("note: a zero mode (omega = 0) sits at the gap edge");
    }
    Ok(RunOutput {
        primary: Table::from_rows(header, states),
        secondary: vec![("profiles", Table::from_rows(profile_header, profiles))],
    })
}

fn map(
    plane: PlaneArg,
    grid: usize,
    a: f64,
    m: f64,
    kind: ParticleKind,
    half_width: f64,
) -> Result<RunOutput, Failure> {
    if !(a > 0.0 && m > 0.0 && a.is_finite() && m.is_finite()) {
        return Err(usage(format!("map needs positive a and m, got a = {a}, m = {m}")));
    }
    if grid < 2 {
        return Err(usage(format!("--grid must be at least 2, got {grid}")));
    }
    let plane = match plane {
        PlaneArg::Electric => Plane::Electric,
        PlaneArg::Mass => {
            if !(half_width > 0.0 && half_width.is_finite()) {
                return Err(usage(format!("--half-width must be positive, got {half_width}")));
            }
            Plane::Mass { half_width }
        }
    };
    let region = count_map(plane, a * m, grid, kind).map_err(runtime)?;
    let cells = region
        .cells
        .iter()
        .enumerate()
        .map(|(idx, c)| {
            Row::new()
                .put("i", idx / grid)
                .put("j", idx % grid)
                .put("c1", c.c1)
                .put("c2", c.c2)
                // −1 marks a degenerate cell
                .put("count", c.count.map_or(-1, |n| n as i64))
                .put("zero_mode", c.zero_mode)
        })
        .collect();
    let curves = region
        .overlays
        .iter()
        .flat_map(|(curve, pts)| {
            pts.iter().map(move |&(c1, c2)| {
                Row::new()
                    .put("curve", curve.kind.name())
                    .put("p_inv", curve.p_inv)
                    .put("c1", c1)
                    .put("c2", c2)
            })
        })
        .collect();
    let cell_header = Row::new()
        .put("i", 0usize)
        .put("j", 0usize)
        .put("c1", 0.0)
        .put("c2", 0.0)
        .put("count", 0i64)
        .put("zero_mode", false);
    let curve_header = Row::new()
        .put("curve", "")
        .put("p_inv", 0.0)
        .put("c1", 0.0)
        .put("c2", 0.0);
    Ok(RunOutput {
        primary: Table::from_rows(cell_header, cells),
        secondary: vec![("curves", Table::from_rows(curve_header, curves))],
    })
}

fn casimir(
    coupling: Coupling,
    m: f64,
    a_min: f64,
    a_max: f64,
    samples: usize,
    oracle: bool,
) -> Result<RunOutput, Failure> {
    let case = classify_unitary(coupling);
    if case.sign().is_none() {
        return Err(usage(format!(
            "coupling (q = {}, lambda = {}) does not confine the field; the vacuum-energy method does not apply",
            coupling.q, coupling.lambda
        )));
    }
    if !(a_min > 0.0) {
        return Err(usage(format!("--a-min must be positive, got {a_min}")));
    }
    if !(m >= 0.0 && m.is_finite()) {
        return Err(usage(format!("mass must be non-negative, got {m}")));
    }
    let grid = linspace(a_min, a_max, samples, "a range")?;
    let rows = grid
        .par_iter()
        .map(|&a| {
            let r = vacuum_energy(&case, a, m).map_err(runtime)?;
            let mut row = Row::new()
                .put("a", a)
                .put("e_int", r.e_int)
                .put("error", r.quadrature_error)
                .put("case", case.name());
            if oracle {
                let o = mode_sum_oracle(&case, a, m, default_epsilon(a)).map_err(runtime)?;
                row = row.put("mode_sum", o.energy);
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(RunOutput {
        primary: Table::from_rows(Row::new(), rows),
        secondary: Vec::new(),
    })
}

/// Apply [`THREADS_ENV`] to the global pool.
pub fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| usage(format!("{THREADS_ENV} must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(runtime)
}

/// Compute and write every table of a run.
pub fn run(cli: &Cli) -> Result<(), Failure> {
    let output = compute(&cli.command)?;
    let format: Format = cli.output.format.into();
    let spec: Value = serde_json::to_value(cli).map_err(runtime)?;
    let out = cli.output.out.as_deref();
    emit(&output.primary, format, &spec, out).map_err(Failure::Runtime)?;
    if let Some(path) = out {
        for (suffix, table) in &output.secondary {
            emit(table, format, &spec, Some(&sibling_path(path, suffix, format))).map_err(Failure::Runtime)?;
        }
    }
    Ok(())
}
