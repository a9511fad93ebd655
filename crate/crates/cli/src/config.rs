//! Flat `key = value` run configuration.
//!
//! Every key is declared in [`KEYS`] with its type and optional default. Model
//! parameters are resolved from `preset` unless given explicitly, so the
//! effective configuration is always complete and `dump` re-parses to an equal
//! value.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use predprey_core::{
    cos2_perturbation, cosine_mode, interior_equilibrium, linearization_coeffs, DiffusionScheme, Diffusivities, Grid,
    Mat2, ModelParameters, PdeControl, SpatialField, StateVector, StepControl,
};

use crate::sweep::SweepAxis;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Kind {
    Float,
    Int,
    Bool,
    Choice(&'static [&'static str]),
    Axis,
}

struct KeySpec {
    name: &'static str,
    kind: Kind,
    default: Option<&'static str>,
}

const fn key(name: &'static str, kind: Kind, default: Option<&'static str>) -> KeySpec {
    KeySpec { name, kind, default }
}

use Kind::*;

pub const MODEL_KEYS: [&str; 10] = ["r", "K", "omega", "D", "d", "c", "omega1", "D1", "m", "tau"];

pub const SWEEP_TASKS: &[&str] = &["simulate", "pde", "dispersion", "turing", "hopf", "threshold"];

const KEYS: &[KeySpec] = &[
    key("preset", Choice(&["baseline", "pattern"]), Some("baseline")),
    key("r", Float, None),
    key("K", Float, None),
    key("omega", Float, None),
    key("D", Float, None),
    key("d", Float, None),
    key("c", Float, None),
    key("omega1", Float, None),
    key("D1", Float, None),
    key("m", Float, None),
    key("tau", Float, None),
    key("d1", Float, None),
    key("d2", Float, None),
    key("j11", Float, None),
    key("j12", Float, None),
    key("j21", Float, None),
    key("j22", Float, None),
    key("t_end", Float, None),
    key("rel_tol", Float, Some("1e-9")),
    key("abs_tol", Float, Some("1e-12")),
    key("h_max", Float, Some("1")),
    key("blowup_threshold", Float, Some("1e8")),
    key("sample_dt", Float, None),
    key("ic", Choice(&["constant", "equilibrium", "cos2", "cosine"]), Some("constant")),
    key("x0", Float, None),
    key("y0", Float, None),
    key("ic_amp_x", Float, Some("0.005")),
    key("ic_amp_y", Float, Some("0.005")),
    key("ic_wave", Float, Some("10")),
    key("ic_open", Bool, Some("true")),
    key("ic_mode", Int, Some("1")),
    key("dim", Int, Some("1")),
    key("nx", Int, None),
    key("ny", Int, None),
    key("lx", Float, Some("3.141592653589793")),
    key("ly", Float, Some("3.141592653589793")),
    key("dt", Float, Some("0.01")),
    key("snapshot_dt", Float, None),
    key("scheme", Choice(&["implicit", "explicit"]), Some("implicit")),
    key("wavenumber_min", Float, Some("0")),
    key("wavenumber_max", Float, Some("10")),
    key("wavenumber_count", Int, Some("201")),
    key("mode_max", Int, Some("0")),
    key("variant", Choice(&["standard", "literal"]), Some("standard")),
    key("delta1", Float, None),
    key("delta1_scan_count", Int, Some("99")),
    key("scale_min", Float, None),
    key("scale_max", Float, None),
    key("sweep1", Axis, None),
    key("sweep2", Axis, None),
    key("sweep_task", Choice(SWEEP_TASKS), None),
    key("capacity_min", Float, None),
    key("capacity_max", Float, None),
    key("capacity_count", Int, None),
];

fn spec(name: &str) -> Option<&'static KeySpec> {
    KEYS.iter().find(|k| k.name == name)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Float(f64),
    Int(u64),
    Bool(bool),
    Text(String),
    Axis(SweepAxis),
}

impl std::fmt::Display for Value {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Value::Float(v) => write!(f, "{v}"),
            Value::Int(v) => write!(f, "{v}"),
            Value::Bool(v) => write!(f, "{v}"),
            Value::Text(v) => write!(f, "{v}"),
            Value::Axis(a) => write!(f, "{a}"),
        }
    }
}

fn parse_value(kind: Kind, name: &str, raw: &str) -> Result<Value, CliError> {
    let bad = |what: &str| CliError::Config(format!("{name}: expected {what}, got `{raw}`"));
    match kind {
        Float => {
            let v: f64 = raw.parse().map_err(|_| bad("a number"))?;
            if v.is_finite() {
                Ok(Value::Float(v))
            } else {
                Err(bad("a finite number"))
            }
        }
        Int => raw.parse().map(Value::Int).map_err(|_| bad("a non-negative integer")),
        Bool => match raw {
            "true" => Ok(Value::Bool(true)),
            "false" => Ok(Value::Bool(false)),
            _ => Err(bad("true or false")),
        },
        Choice(options) => {
            if options.contains(&raw) {
                Ok(Value::Text(raw.to_string()))
            } else {
                Err(bad(&format!("one of {}", options.join("|"))))
            }
        }
        Axis => raw.parse::<SweepAxis>().map(Value::Axis).map_err(|e| CliError::Config(format!("{name}: {e}"))),
    }
}

/// Effective configuration: defaults, preset-resolved model parameters and
/// explicit entries, keyed by name.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    values: BTreeMap<&'static str, Value>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut explicit: BTreeMap<&'static str, Value> = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((k, v)) = content.split_once('=') else {
                return Err(CliError::Config(format!("line {}: expected `key = value`", lineno + 1)));
            };
            let (k, v) = (k.trim(), v.trim());
            let s = spec(k).ok_or_else(|| CliError::Config(format!("line {}: unknown key `{k}`", lineno + 1)))?;
            let value = parse_value(s.kind, k, v)?;
            if explicit.insert(s.name, value).is_some() {
                return Err(CliError::Config(format!("line {}: duplicate key `{k}`", lineno + 1)));
            }
        }
        Self::resolve(explicit)
    }

    fn resolve(mut values: BTreeMap<&'static str, Value>) -> Result<Self, CliError> {
        for s in KEYS {
            if let (false, Some(d)) = (values.contains_key(s.name), s.default) {
                values.insert(s.name, parse_value(s.kind, s.name, d)?);
            }
        }
        let preset = match &values["preset"] {
            Value::Text(t) => t.clone(),
            _ => unreachable!("preset is a choice"),
        };
        let base = match preset.as_str() {
            "pattern" => {
                let Some(Value::Float(k)) = values.get("K") else {
                    return Err(CliError::Config("preset = pattern needs an explicit K".into()));
                };
                ModelParameters::pattern_set(*k)
            }
            _ => ModelParameters::baseline(),
        };
        let fill = [
            base.r,
            base.capacity,
            base.omega,
            base.refuge,
            base.refuge_slope,
            base.mating,
            base.omega1,
            base.residual,
            base.exponent,
            base.tau,
        ];
        for (name, v) in MODEL_KEYS.iter().zip(fill) {
            let name = spec(name).expect("model key declared").name;
            values.entry(name).or_insert(Value::Float(v));
        }
        Ok(Self { values })
    }

    /// Text form listing every effective key in declaration order.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for s in KEYS {
            if let Some(v) = self.values.get(s.name) {
                let _ = writeln!(out, "{} = {v}", s.name);
            }
        }
        out
    }

    /// Copy with `name` overridden by a float (used by sweeps).
    pub fn with_float(&self, name: &str, v: f64) -> Result<Self, CliError> {
        let s = spec(name).ok_or_else(|| CliError::Config(format!("unknown key `{name}`")))?;
        let value = match s.kind {
            Float => Value::Float(v),
            Int if v >= 0.0 && v.fract() == 0.0 => Value::Int(v as u64),
            _ => return Err(CliError::Config(format!("`{name}` cannot take the swept value {v}"))),
        };
        let mut values = self.values.clone();
        values.insert(s.name, value);
        Ok(Self { values })
    }

    pub fn is_numeric(name: &str) -> bool {
        matches!(spec(name).map(|s| s.kind), Some(Float) | Some(Int))
    }

    pub fn has(&self, name: &str) -> bool {
        self.values.contains_key(name)
    }

    /// Fail unless every key in `names` has a value.
    pub fn require(&self, command: &str, names: &[&str]) -> Result<(), CliError> {
        let missing: Vec<&str> = names.iter().copied().filter(|n| !self.has(n)).collect();
        if missing.is_empty() {
            Ok(())
        } else {
            Err(CliError::Config(format!("`{command}` needs {}", missing.join(", "))))
        }
    }

    fn missing(name: &str) -> CliError {
        CliError::Config(format!("missing key `{name}`"))
    }

    pub fn float(&self, name: &str) -> Result<f64, CliError> {
        match self.values.get(name) {
            Some(Value::Float(v)) => Ok(*v),
            Some(Value::Int(v)) => Ok(*v as f64),
            _ => Err(Self::missing(name)),
        }
    }

    pub fn float_opt(&self, name: &str) -> Option<f64> {
        self.float(name).ok()
    }

    pub fn int(&self, name: &str) -> Result<usize, CliError> {
        match self.values.get(name) {
            Some(Value::Int(v)) => Ok(*v as usize),
            _ => Err(Self::missing(name)),
        }
    }

    pub fn flag(&self, name: &str) -> Result<bool, CliError> {
        match self.values.get(name) {
            Some(Value::Bool(v)) => Ok(*v),
            _ => Err(Self::missing(name)),
        }
    }

    pub fn text(&self, name: &str) -> Result<&str, CliError> {
        match self.values.get(name) {
            Some(Value::Text(v)) => Ok(v),
            _ => Err(Self::missing(name)),
        }
    }

    pub fn axis(&self, name: &str) -> Option<&SweepAxis> {
        match self.values.get(name) {
            Some(Value::Axis(a)) => Some(a),
            _ => None,
        }
    }

    pub fn params(&self) -> Result<ModelParameters, CliError> {
        let p = ModelParameters {
            r: self.float("r")?,
            capacity: self.float("K")?,
            omega: self.float("omega")?,
            refuge: self.float("D")?,
            refuge_slope: self.float("d")?,
            mating: self.float("c")?,
            omega1: self.float("omega1")?,
            residual: self.float("D1")?,
            exponent: self.float("m")?,
            tau: self.float("tau")?,
        };
        p.validate()?;
        Ok(p)
    }

    /// Diffusivities, zero when absent.
    pub fn diffusivities(&self) -> Result<Diffusivities, CliError> {
        Ok(Diffusivities::new(
            self.float_opt("d1").unwrap_or(0.0),
            self.float_opt("d2").unwrap_or(0.0),
        )?)
    }

    /// Explicit Jacobian if all four entries are set, else the non-delayed
    /// Jacobian of the model at its interior equilibrium.
    pub fn jacobian(&self) -> Result<Mat2, CliError> {
        let entries = ["j11", "j12", "j21", "j22"];
        let given = entries.iter().filter(|k| self.has(k)).count();
        match given {
            4 => Ok([
                [self.float("j11")?, self.float("j12")?],
                [self.float("j21")?, self.float("j22")?],
            ]),
            0 => {
                let p = self.params()?;
                let eq = interior_equilibrium(&p)?;
                Ok(linearization_coeffs(&eq, &p)?.nondelayed_jacobian())
            }
            _ => Err(CliError::Config("give all of j11, j12, j21, j22 or none".into())),
        }
    }

    pub fn step_control(&self) -> Result<StepControl, CliError> {
        let ctl = StepControl {
            rel_tol: self.float("rel_tol")?,
            abs_tol: self.float("abs_tol")?,
            h_max: self.float("h_max")?,
            blowup_threshold: self.float("blowup_threshold")?,
            t_end: self.float("t_end")?,
            sample_dt: self.float_opt("sample_dt"),
            ..StepControl::default()
        };
        ctl.validate()?;
        Ok(ctl)
    }

    fn equilibrium_base(&self) -> Result<[f64; 2], CliError> {
        let p = self.params()?;
        let eq = interior_equilibrium(&p)?.point;
        Ok([eq.x, eq.y])
    }

    fn amplitudes(&self) -> Result<[f64; 2], CliError> {
        Ok([self.float("ic_amp_x")?, self.float("ic_amp_y")?])
    }

    /// Initial state for ODE/DDE runs: `constant` uses (x0, y0);
    /// `equilibrium` offsets the interior equilibrium by the amplitudes.
    pub fn initial_state(&self) -> Result<StateVector, CliError> {
        let [x, y] = match self.text("ic")? {
            "constant" => [self.float("x0")?, self.float("y0")?],
            "equilibrium" => {
                let [ex, ey] = self.equilibrium_base()?;
                let [ax, ay] = self.amplitudes()?;
                [ex + ax, ey + ay]
            }
            other => return Err(CliError::Config(format!("ic = {other} applies to pde runs only"))),
        };
        Ok(StateVector::new(x, y)?)
    }

    pub fn grid(&self) -> Result<Grid, CliError> {
        let nx = self.int("nx")?;
        Ok(match self.int("dim")? {
            1 => Grid::line(nx, self.float("lx")?)?,
            2 => Grid::square(nx, self.int("ny").unwrap_or(nx), self.float("lx")?, self.float("ly")?)?,
            other => return Err(CliError::Config(format!("dim must be 1 or 2, got {other}"))),
        })
    }

    pub fn initial_field(&self, grid: &Grid) -> Result<SpatialField, CliError> {
        let amp = self.amplitudes()?;
        Ok(match self.text("ic")? {
            "constant" => SpatialField::uniform(grid, [self.float("x0")?, self.float("y0")?]),
            "equilibrium" => {
                let [ex, ey] = self.equilibrium_base()?;
                SpatialField::uniform(grid, [ex + amp[0], ey + amp[1]])
            }
            "cos2" => cos2_perturbation(grid, self.equilibrium_base()?, amp, self.float("ic_wave")?, self.flag("ic_open")?),
            "cosine" => {
                if grid.dim() != 1 {
                    return Err(CliError::Config("ic = cosine needs dim = 1".into()));
                }
                cosine_mode(grid, self.equilibrium_base()?, amp, self.int("ic_mode")?)
            }
            other => unreachable!("ic choice {other}"),
        })
    }

    pub fn pde_control(&self) -> Result<PdeControl, CliError> {
        let ctl = PdeControl {
            dt: self.float("dt")?,
            t_end: self.float("t_end")?,
            snapshot_dt: self.float_opt("snapshot_dt"),
            scheme: match self.text("scheme")? {
                "explicit" => DiffusionScheme::Explicit,
                _ => DiffusionScheme::Implicit,
            },
            blowup_threshold: self.float("blowup_threshold")?,
        };
        ctl.validate()?;
        Ok(ctl)
    }

    pub fn wavenumbers(&self) -> Result<Vec<f64>, CliError> {
        let (lo, hi, n) = (self.float("wavenumber_min")?, self.float("wavenumber_max")?, self.int("wavenumber_count")?);
        if !(n >= 2 && hi > lo && lo >= 0.0) {
            return Err(CliError::Config(format!("bad wavenumber range [{lo}, {hi}] x {n}")));
        }
        Ok((0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect())
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        Self::parse("").expect("defaults are valid")
    }
}
