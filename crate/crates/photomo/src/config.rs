//! Run configuration: a JSON file whose fields command-line flags override.

use std::path::{Path, PathBuf};

use photomo_core::{
    admissible_s_range, Complex64, GridSpec, KernelParams, Locking, RadialRule, SRange, Shots, SqueezeSpec, StateSpec,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::io::{parse_locking, NumOrWord};

pub const DEFAULT_DIM: usize = 20;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridFile {
    pub r_max: Option<f64>,
    pub n_r: Option<usize>,
    pub n_theta: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SqueezeFile {
    pub mag: Option<f64>,
    pub phase: Option<f64>,
}

/// Partially specified configuration, as read from a file or collected from flags.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    /// State descriptor, e.g. `"coherent:1,0.5"`; see [`parse_state`].
    pub state: Option<String>,
    pub dim: Option<usize>,
    pub grid: Option<GridFile>,
    pub eta: Option<f64>,
    pub squeeze: Option<SqueezeFile>,
    /// `"fixed"` or `"synthesized"`.
    pub squeeze_mode: Option<String>,
    pub s: Option<NumOrWord<f64>>,
    pub n_max: Option<usize>,
    pub shots: Option<NumOrWord<u64>>,
    pub seed: Option<u64>,
    /// `"product"`, `"product:N"` or `"nodal"`.
    pub rule: Option<String>,
    pub out: Option<PathBuf>,
}

fn pick<T>(over: Option<T>, base: Option<T>) -> Option<T> {
    over.or(base)
}

impl ConfigFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Invalid(format!("{}: {e}", path.display())))
    }

    /// Fields set in `over` replace those in `self`.
    pub fn overridden_by(self, over: ConfigFile) -> ConfigFile {
        let grid = match (self.grid, over.grid) {
            (Some(b), Some(o)) => Some(GridFile {
                r_max: pick(o.r_max, b.r_max),
                n_r: pick(o.n_r, b.n_r),
                n_theta: pick(o.n_theta, b.n_theta),
            }),
            (b, o) => pick(o, b),
        };
        let squeeze = match (self.squeeze, over.squeeze) {
            (Some(b), Some(o)) => Some(SqueezeFile {
                mag: pick(o.mag, b.mag),
                phase: pick(o.phase, b.phase),
            }),
            (b, o) => pick(o, b),
        };
        ConfigFile {
            state: pick(over.state, self.state),
            dim: pick(over.dim, self.dim),
            grid,
            eta: pick(over.eta, self.eta),
            squeeze,
            squeeze_mode: pick(over.squeeze_mode, self.squeeze_mode),
            s: pick(over.s, self.s),
            n_max: pick(over.n_max, self.n_max),
            shots: pick(over.shots, self.shots),
            seed: pick(over.seed, self.seed),
            rule: pick(over.rule, self.rule),
            out: pick(over.out, self.out),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SChoice {
    Auto,
    Value(f64),
}

/// Fully resolved and validated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub state: StateSpec,
    pub dim: usize,
    /// `None` radius: chosen from the state amplitude.
    pub r_max: Option<f64>,
    pub n_r: usize,
    pub n_theta: usize,
    pub eta: f64,
    pub squeeze: SqueezeSpec,
    pub locking: Locking,
    pub s: SChoice,
    pub n_max: usize,
    pub shots: Shots,
    pub seed: u64,
    pub rule: RadialRule,
    pub out: Option<PathBuf>,
}

fn parse_numbers(kind: &str, args: &str, min: usize, max: usize) -> CliResult<Vec<f64>> {
    let parts: Vec<&str> = if args.is_empty() { Vec::new() } else { args.split(',').collect() };
    if parts.len() < min || parts.len() > max {
        return Err(CliError::Invalid(format!(
            "state `{kind}` takes {min} to {max} comma-separated numbers, got `{args}`"
        )));
    }
    parts
        .iter()
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Invalid(format!("state `{kind}`: `{p}` is not a number")))
        })
        .collect()
}

/// Parses `vacuum`, `fock:N`, `coherent:RE,IM`, `thermal:NBAR`, `cat:RE,IM[,PHASE]` or
/// `squeezed:MAG[,PHASE]`.
pub fn parse_state(text: &str) -> CliResult<StateSpec> {
    let (kind, args) = text.split_once(':').unwrap_or((text, ""));
    let spec = match kind.trim() {
        "vacuum" if args.is_empty() => StateSpec::Fock(0),
        "fock" => StateSpec::Fock(
            args.trim()
                .parse()
                .map_err(|_| CliError::Invalid(format!("state `fock`: `{args}` is not a photon number")))?,
        ),
        "coherent" => {
            let v = parse_numbers("coherent", args, 1, 2)?;
            StateSpec::Coherent(Complex64::new(v[0], v.get(1).copied().unwrap_or(0.0)))
        }
        "thermal" => StateSpec::Thermal(parse_numbers("thermal", args, 1, 1)?[0]),
        "cat" => {
            let v = parse_numbers("cat", args, 1, 3)?;
            StateSpec::Cat {
                beta: Complex64::new(v[0], v.get(1).copied().unwrap_or(0.0)),
                phase: v.get(2).copied().unwrap_or(0.0),
            }
        }
        "squeezed" => {
            let v = parse_numbers("squeezed", args, 1, 2)?;
            StateSpec::SqueezedVacuum(SqueezeSpec::new(v[0], v.get(1).copied().unwrap_or(0.0))?)
        }
        _ => return Err(CliError::Invalid(format!("unknown state `{text}`"))),
    };
    spec.validate()?;
    Ok(spec)
}

fn parse_rule(text: &str) -> CliResult<RadialRule> {
    match text.split_once(':') {
        None if text == "nodal" => Ok(RadialRule::Nodal),
        None if text == "product" => Ok(RadialRule::default()),
        Some(("product", n)) => match n.parse::<usize>() {
            Ok(fine_nodes) if fine_nodes > 0 => Ok(RadialRule::Product { fine_nodes }),
            _ => Err(CliError::Invalid(format!("radial rule `{text}`: bad node count"))),
        },
        _ => Err(CliError::Invalid(format!(
            "unknown radial rule `{text}` (expected nodal, product or product:N)"
        ))),
    }
}

/// Parses `auto` or a number.
pub fn parse_s(text: &str) -> CliResult<NumOrWord<f64>> {
    if text == "auto" {
        return Ok(NumOrWord::Word(text.into()));
    }
    text.parse()
        .map(NumOrWord::Num)
        .map_err(|_| CliError::Invalid(format!("--s expects a number or `auto`, got `{text}`")))
}

/// Parses `exact` or a positive count.
pub fn parse_shots(text: &str) -> CliResult<NumOrWord<u64>> {
    if text == "exact" {
        return Ok(NumOrWord::Word(text.into()));
    }
    text.parse()
        .map(NumOrWord::Num)
        .map_err(|_| CliError::Invalid(format!("--shots expects a count or `exact`, got `{text}`")))
}

/// Explains an empty admissible interval in terms of the squeeze it would take to fix it.
pub fn empty_range_message(eta: f64, delta: f64) -> String {
    let need = 1.0 / eta - 1.0;
    format!(
        "no admissible ordering parameter for eta = {eta}, Delta^2 = {}: the efficiency kernel needs \
         Delta^2 > (1 - eta)/eta = {need} (without squeezing, eta > 0.5)",
        delta * delta
    )
}

impl RunConfig {
    pub fn resolve(file: ConfigFile) -> CliResult<Self> {
        let state = match file.state {
            Some(ref s) => parse_state(s)?,
            None => StateSpec::Fock(0),
        };
        let dim = file.dim.unwrap_or(DEFAULT_DIM);
        let grid = file.grid.unwrap_or_default();
        let default_grid = GridSpec::for_amplitude(0.0);
        let squeeze = file.squeeze.unwrap_or_default();
        let squeeze = SqueezeSpec::new(squeeze.mag.unwrap_or(0.0), squeeze.phase.unwrap_or(0.0))?;
        let locking = match file.squeeze_mode {
            Some(ref m) => parse_locking(m)?,
            None => Locking::Fixed,
        };
        let s = match file.s {
            None => SChoice::Auto,
            Some(NumOrWord::Num(v)) => SChoice::Value(v),
            Some(NumOrWord::Word(ref w)) if w == "auto" => SChoice::Auto,
            Some(NumOrWord::Word(w)) => return Err(CliError::Invalid(format!("s must be a number or `auto`, got `{w}`"))),
        };
        let shots = match file.shots {
            None => Shots::Exact,
            Some(NumOrWord::Num(n)) => Shots::Count(n),
            Some(NumOrWord::Word(ref w)) if w == "exact" => Shots::Exact,
            Some(NumOrWord::Word(w)) => {
                return Err(CliError::Invalid(format!("shots must be a count or `exact`, got `{w}`")))
            }
        };
        let rule = match file.rule {
            Some(ref r) => parse_rule(r)?,
            None => RadialRule::default(),
        };
        let cfg = RunConfig {
            state,
            dim,
            r_max: grid.r_max,
            n_r: grid.n_r.unwrap_or(default_grid.n_r),
            n_theta: grid.n_theta.unwrap_or(default_grid.n_theta),
            eta: file.eta.unwrap_or(1.0),
            squeeze,
            locking,
            s,
            n_max: file.n_max.unwrap_or(dim.saturating_sub(1)),
            shots,
            seed: file.seed.unwrap_or(0),
            rule,
            out: file.out,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Cross-field checks: `eta` in (0, 1], `n_max < dim`, a usable grid, nonzero shots and an
    /// explicit `s` inside the admissible interval.
    pub fn validate(&self) -> CliResult<()> {
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(CliError::Invalid(format!("eta = {} must lie in (0, 1]", self.eta)));
        }
        if self.dim == 0 {
            return Err(CliError::Invalid("dim must be at least 1".into()));
        }
        if self.n_max >= self.dim {
            return Err(CliError::Invalid(format!(
                "n_max = {} must be smaller than dim = {}",
                self.n_max, self.dim
            )));
        }
        if self.shots == Shots::Count(0) {
            return Err(CliError::Invalid("shots must be positive".into()));
        }
        self.grid_for(0.0)?;
        if let SChoice::Value(s) = self.s {
            self.kernel_params_for(s, self.eta, self.squeeze.delta())?;
        }
        Ok(())
    }

    /// Grid with the configured radius, or `4 + amplitude` when none was given.
    pub fn grid_for(&self, amplitude: f64) -> CliResult<GridSpec> {
        let r_max = self.r_max.unwrap_or(GridSpec::for_amplitude(amplitude).r_max);
        Ok(GridSpec::new(r_max, self.n_r, self.n_theta)?)
    }

    fn kernel_params_for(&self, s: f64, eta: f64, delta: f64) -> CliResult<KernelParams> {
        let p = KernelParams::new(s, eta, delta)?;
        match p.check_admissible() {
            Ok(_) => Ok(p),
            Err(photomo_core::Error::Inadmissible { range: SRange::Empty, .. }) => {
                Err(CliError::Invalid(empty_range_message(eta, delta)))
            }
            Err(e) => Err(e.into()),
        }
    }

    /// Kernel parameters for a table measured at `eta` with stretch `delta`.
    pub fn kernel_params(&self, eta: f64, delta: f64) -> CliResult<KernelParams> {
        let s = match self.s {
            SChoice::Value(s) => s,
            SChoice::Auto => match admissible_s_range(eta, delta)?.midpoint() {
                Some(s) => s,
                None => return Err(CliError::Invalid(empty_range_message(eta, delta))),
            },
        };
        self.kernel_params_for(s, eta, delta)
    }
}
