//! JSON run configuration.
//!
//! Complex numbers are `[re, im]` pairs and matrices are arrays of rows.
//! Every section is optional; the subcommand decides which one is read and
//! unspecified fields fall back to the preset defaults.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Deserialize;

use qe_teleport::linalg::ComplexMatrix;
use qe_teleport::model::{BellOutcome, ConditionalOp, DephasingInteraction, EnvDensity, PureQubit};
use qe_teleport::scenarios::{linspace, Fig1Params, Fig2Params, PhaseCoupling, ScenarioConfig};
use qe_teleport::verify::Tolerances;

/// A rejected configuration; maps to exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn field_error(field: &str, err: impl fmt::Display) -> ConfigError {
    ConfigError(format!("{field}: {err}"))
}

type Complex = [f64; 2];
type Matrix = Vec<Vec<Complex>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Fig1,
    Fig2,
    Custom,
    Verify,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Fig1 => "fig1",
            Mode::Fig2 => "fig2",
            Mode::Custom => "custom",
            Mode::Verify => "verify",
        })
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// When present it must agree with the subcommand.
    pub mode: Option<Mode>,
    pub psi: Option<[Complex; 2]>,
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    pub fig1: Option<Fig1Section>,
    pub fig2: Option<Fig2Section>,
    pub custom: Option<CustomSection>,
    pub verify: Option<VerifySection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub start: f64,
    pub end: f64,
    pub points: usize,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fig1Section {
    pub c0: Option<f64>,
    pub phi1_tau: Option<f64>,
    pub x2_values: Option<Vec<f64>>,
    pub grid: Option<GridSection>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fig2Section {
    pub c0_values: Option<Vec<f64>>,
    pub grid: Option<GridSection>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    pub count: Option<usize>,
    pub env_dims: Option<Vec<usize>>,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum OpSpec {
    Unitary(Matrix),
    Generator(Matrix),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingSpec {
    pub x: Complex,
    pub y: Complex,
    pub phase_a: f64,
    pub phase_b: f64,
}

/// The single-qubit environment preset with explicit couplings.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub c0: f64,
    pub first: CouplingSpec,
    pub second: CouplingSpec,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomSection {
    pub env: Option<Matrix>,
    /// Conditional operators of the first window keyed by two-bit label.
    pub interaction1: Option<BTreeMap<String, OpSpec>>,
    pub interaction2: Option<BTreeMap<String, OpSpec>>,
    pub scenario: Option<ScenarioSection>,
    pub tau: f64,
    pub t: Option<f64>,
    /// Forward and return outcomes; sampled from `seed` when absent.
    pub outcomes: Option<[String; 2]>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| field_error(&path.display().to_string(), e))?;
        serde_json::from_str(&text).map_err(|e| field_error(&path.display().to_string(), e))
    }

    pub fn check_mode(&self, mode: Mode) -> Result<(), ConfigError> {
        match self.mode {
            Some(m) if m != mode => Err(ConfigError(format!(
                "config is for mode `{m}` but `{mode}` was requested"
            ))),
            _ => Ok(()),
        }
    }

    /// Config tolerances first, then the command-line overrides.
    pub fn tolerances(&self, overrides: &[(String, f64)]) -> Result<Tolerances, ConfigError> {
        let mut tol = Tolerances::default();
        let from_config = self.tolerances.iter().map(|(k, v)| (k.as_str(), *v));
        let from_cli = overrides.iter().map(|(k, v)| (k.as_str(), *v));
        for (name, value) in from_config.chain(from_cli) {
            tol.set(name, value).map_err(|e| field_error("tolerances", e))?;
        }
        Ok(tol)
    }

    pub fn psi(&self) -> Result<Option<PureQubit>, ConfigError> {
        self.psi
            .map(|[a, b]| PureQubit::new(complex(a), complex(b)).map_err(|e| field_error("psi", e)))
            .transpose()
    }

    pub fn fig1_params(&self) -> Result<Fig1Params, ConfigError> {
        let mut params = Fig1Params::default();
        if let Some(s) = &self.fig1 {
            if let Some(c0) = s.c0 {
                params.c0 = c0;
            }
            if let Some(p) = s.phi1_tau {
                params.phi1_tau = p;
            }
            if let Some(x2) = &s.x2_values {
                params.x2_values = x2.clone();
            }
            if let Some(g) = &s.grid {
                params.grid = grid(g, "fig1.grid")?;
            }
        }
        if !(0.0..=1.0).contains(&params.c0) {
            return Err(field_error("fig1.c0", format!("{} outside [0, 1]", params.c0)));
        }
        if let Some(x2) = params.x2_values.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(field_error("fig1.x2_values", format!("{x2} outside [0, 1]")));
        }
        Ok(params)
    }

    pub fn fig2_params(&self) -> Result<Fig2Params, ConfigError> {
        let mut params = Fig2Params::default();
        if let Some(s) = &self.fig2 {
            if let Some(c0) = &s.c0_values {
                params.c0_values = c0.clone();
            }
            if let Some(g) = &s.grid {
                params.grid = grid(g, "fig2.grid")?;
            }
        }
        if let Some(c0) = params.c0_values.iter().find(|c| !(0.0..=1.0).contains(*c)) {
            return Err(field_error("fig2.c0_values", format!("{c0} outside [0, 1]")));
        }
        Ok(params)
    }
}

fn grid(g: &GridSection, field: &str) -> Result<Vec<f64>, ConfigError> {
    if !(g.start.is_finite() && g.end.is_finite()) || g.points == 0 {
        return Err(field_error(field, "needs finite bounds and at least one point"));
    }
    Ok(linspace(g.start, g.end, g.points))
}

fn complex([re, im]: Complex) -> Complex64 {
    Complex64::new(re, im)
}

fn matrix(rows: &Matrix, field: &str) -> Result<ComplexMatrix, ConfigError> {
    let rows: Vec<Vec<Complex64>> = rows.iter().map(|r| r.iter().copied().map(complex).collect()).collect();
    ComplexMatrix::from_rows(&rows).map_err(|e| field_error(field, e))
}

fn interaction(ops: &BTreeMap<String, OpSpec>, field: &str) -> Result<DephasingInteraction, ConfigError> {
    let mut entries = Vec::new();
    for (label, op) in ops {
        let name = format!("{field}.{label}");
        let op = match op {
            OpSpec::Unitary(m) => ConditionalOp::Unitary(matrix(m, &name)?),
            OpSpec::Generator(m) => ConditionalOp::Generator(matrix(m, &name)?),
        };
        // validate each operator on its own so the error names the label
        DephasingInteraction::new(vec![(label.clone(), op.clone())]).map_err(|e| field_error(&name, e))?;
        entries.push((label.clone(), op));
    }
    let built = DephasingInteraction::new(entries).map_err(|e| field_error(field, e))?;
    let missing: Vec<&str> = ["00", "01", "10", "11"]
        .into_iter()
        .filter(|l| built.op(l).is_none())
        .collect();
    if built.width() != 2 || !missing.is_empty() {
        return Err(field_error(
            field,
            format!("needs an operator for each of 00, 01, 10, 11 (missing {missing:?})"),
        ));
    }
    Ok(built)
}

fn coupling(c: &CouplingSpec, field: &str) -> Result<PhaseCoupling, ConfigError> {
    PhaseCoupling::new(complex(c.x), complex(c.y), c.phase_a, c.phase_b).map_err(|e| field_error(field, e))
}

/// Environment, first interaction and the optional second window.
type Parts = (EnvDensity, DephasingInteraction, Option<(DephasingInteraction, f64)>);

/// A fully validated custom run.
#[derive(Debug)]
pub struct CustomRun {
    pub psi: PureQubit,
    pub env: EnvDensity,
    pub interaction1: DephasingInteraction,
    pub tau: f64,
    pub second: Option<(DephasingInteraction, f64)>,
    pub outcomes: Option<[BellOutcome; 2]>,
}

impl CustomSection {
    pub fn build(&self, psi: Option<PureQubit>) -> Result<CustomRun, ConfigError> {
        let psi = psi.ok_or_else(|| ConfigError("custom mode needs `psi`".into()))?;
        if !self.tau.is_finite() {
            return Err(field_error("custom.tau", "must be finite"));
        }
        if let Some(t) = self.t {
            if !t.is_finite() {
                return Err(field_error("custom.t", "must be finite"));
            }
        }
        let outcomes = self
            .outcomes
            .as_ref()
            .map(|[a, b]| -> Result<[BellOutcome; 2], ConfigError> {
                let parse = |s: &String| s.parse::<BellOutcome>().map_err(|e| field_error("custom.outcomes", e));
                Ok([parse(a)?, parse(b)?])
            })
            .transpose()?;

        let explicit = self.env.is_some() || self.interaction1.is_some() || self.interaction2.is_some();
        let (env, interaction1, second) = match (&self.scenario, explicit) {
            (Some(_), true) => {
                return Err(ConfigError(
                    "custom: give either `scenario` or explicit `env`/`interaction1`, not both".into(),
                ))
            }
            (Some(s), false) => self.scenario_parts(s, psi)?,
            (None, _) => self.matrix_parts()?,
        };
        Ok(CustomRun {
            psi,
            env,
            interaction1,
            tau: self.tau,
            second,
            outcomes,
        })
    }

    fn scenario_parts(&self, s: &ScenarioSection, psi: PureQubit) -> Result<Parts, ConfigError> {
        let t = self.t.unwrap_or(0.0);
        let cfg = ScenarioConfig {
            c0: s.c0,
            first: coupling(&s.first, "custom.scenario.first")?,
            second: coupling(&s.second, "custom.scenario.second")?,
            tau: self.tau,
            t_grid: vec![t],
            psi,
        };
        let env = cfg.env().map_err(|e| field_error("custom.scenario.c0", e))?;
        let (first, second) =
            qe_teleport::scenarios::build_interactions(&cfg, t).map_err(|e| field_error("custom.scenario", e))?;
        Ok((env, first, self.t.map(|t| (second, t))))
    }

    fn matrix_parts(&self) -> Result<Parts, ConfigError> {
        let env_rows = self
            .env
            .as_ref()
            .ok_or_else(|| ConfigError("custom mode needs `env`".into()))?;
        let env = EnvDensity::new(matrix(env_rows, "custom.env")?).map_err(|e| field_error("custom.env", e))?;
        let spec1 = self
            .interaction1
            .as_ref()
            .ok_or_else(|| ConfigError("custom mode needs `interaction1`".into()))?;
        let interaction1 = interaction(spec1, "custom.interaction1")?;
        let second = match (&self.interaction2, self.t) {
            (Some(ops), Some(t)) => Some((interaction(ops, "custom.interaction2")?, t)),
            (None, None) => None,
            _ => {
                return Err(ConfigError(
                    "custom: `interaction2` and `t` must be given together".into(),
                ))
            }
        };
        for (name, dim) in std::iter::once(("interaction1", interaction1.env_dim()))
            .chain(second.as_ref().map(|(i, _)| ("interaction2", i.env_dim())))
        {
            if dim != env.dim() {
                return Err(field_error(
                    &format!("custom.{name}"),
                    format!("operators are {dim}x{dim} but the environment is {0}x{0}", env.dim()),
                ));
            }
        }
        Ok((env, interaction1, second))
    }
}
