//! Run configuration: JSON file format, defaults, overrides and validation.

use std::path::PathBuf;

use num_complex::Complex64;
use qamp_core::oracle::{LeakagePolicy, DEFAULT_LEAKAGE_THRESHOLD};
use qamp_core::phase_space::{QuasiOrder, DEFAULT_GRID_POINTS};
use qamp_core::{AmplifierParams, InputField};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Gain,
    Noise,
    Mandel,
    Squeezing,
    Wigner,
    Thermal,
    Oracle,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Gain => "gain",
            Self::Noise => "noise",
            Self::Mandel => "mandel",
            Self::Squeezing => "squeezing",
            Self::Wigner => "wigner",
            Self::Thermal => "thermal",
            Self::Oracle => "oracle",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// A single number or a list, so `"a_prime": 1` and `"a_prime": [1, 2]`
/// both parse.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

impl OneOrMany {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Self::One(x) => vec![*x],
            Self::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsBlock {
    /// Asymptotic gain factor; a list runs one cell per value.
    pub a_prime: OneOrMany,
    /// Thermal floor `B'`; give this or `n_b`, not both.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b_prime: Option<f64>,
    /// Medium occupation `n_B = B'/A'`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_b: Option<f64>,
    pub tau0: f64,
    /// Field angular frequency in s^-1; enables Kelvin temperatures.
    #[serde(default)]
    pub omega0: Option<f64>,
    /// `omega0 / epsilon`; zero works in the rotating frame.
    #[serde(default)]
    pub phase_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TauRange {
    #[serde(default)]
    pub start: f64,
    /// Defaults to `2 tau0 + 6`.
    #[serde(default)]
    pub end: Option<f64>,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_samples() -> usize {
    401
}

impl Default for TauRange {
    fn default() -> Self {
        Self {
            start: 0.0,
            end: None,
            samples: default_samples(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    /// Defaults to `<command>.csv` or `<command>.json`.
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WignerOptions {
    /// Times to render; defaults to `0, tau0, 2 tau0`.
    #[serde(default)]
    pub times: Option<Vec<f64>>,
    #[serde(default = "default_points")]
    pub points: usize,
    /// Half width of a square grid centered on the output mean; automatic
    /// when absent.
    #[serde(default)]
    pub half_width: Option<f64>,
    #[serde(default = "default_order")]
    pub order: QuasiOrder,
}

fn default_points() -> usize {
    DEFAULT_GRID_POINTS
}

fn default_order() -> QuasiOrder {
    QuasiOrder::Wigner
}

impl Default for WignerOptions {
    fn default() -> Self {
        Self {
            times: None,
            points: default_points(),
            half_width: None,
            order: default_order(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleOptions {
    /// Fock levels; sized from the expected occupation when absent.
    #[serde(default)]
    pub dim: Option<usize>,
    /// Defaults to the largest accepted step.
    #[serde(default)]
    pub step: Option<f64>,
    #[serde(default = "default_leakage")]
    pub leakage_threshold: f64,
    #[serde(default = "default_policy")]
    pub leakage_policy: LeakagePolicy,
}

fn default_leakage() -> f64 {
    DEFAULT_LEAKAGE_THRESHOLD
}

fn default_policy() -> LeakagePolicy {
    LeakagePolicy::Abort
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            dim: None,
            step: None,
            leakage_threshold: default_leakage(),
            leakage_policy: default_policy(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalOptions {
    /// Emit the late-time entropy slope per `A'` instead of time series.
    #[serde(default)]
    pub slope_table: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanOptions {
    /// Bracketing samples for crossing searches over the tau range.
    #[serde(default = "default_scan")]
    pub samples: usize,
}

fn default_scan() -> usize {
    2001
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self {
            samples: default_scan(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: CommandKind,
    pub params: ParamsBlock,
    #[serde(default)]
    pub input: Option<InputField>,
    #[serde(default)]
    pub tau: TauRange,
    #[serde(default)]
    pub output: OutputBlock,
    #[serde(default)]
    pub wigner: WignerOptions,
    #[serde(default)]
    pub oracle: OracleOptions,
    #[serde(default)]
    pub thermal: ThermalOptions,
    #[serde(default)]
    pub scan: ScanOptions,
}

impl RunConfig {
    /// Built-in starting point when neither a preset nor a file is given.
    pub fn default_for(command: CommandKind) -> Self {
        Self {
            command,
            params: ParamsBlock {
                a_prime: OneOrMany::One(1.0),
                b_prime: None,
                n_b: Some(0.0),
                tau0: 4.0,
                omega0: None,
                phase_rate: 0.0,
            },
            input: None,
            tau: TauRange::default(),
            output: OutputBlock::default(),
            wigner: WignerOptions::default(),
            oracle: OracleOptions::default(),
            thermal: ThermalOptions::default(),
            scan: ScanOptions::default(),
        }
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::config(format!("invalid config: {e}")))
    }

    /// Fills every default, validates, and returns the parameter cells.
    pub fn resolve(mut self) -> CliResult<Resolved> {
        let p = &self.params;
        let a_values = p.a_prime.values();
        if a_values.is_empty() {
            return Err(CliError::config("params.a_prime: at least one value is needed"));
        }
        let (b_prime, n_b) = match (p.b_prime, p.n_b) {
            (Some(_), Some(_)) => return Err(CliError::config("params: give b_prime or n_b, not both")),
            (b, n) => (b, n),
        };
        let mut cells = Vec::with_capacity(a_values.len());
        for &a in &a_values {
            let params = match (b_prime, n_b) {
                (Some(b), None) => AmplifierParams::new(a, b, p.tau0),
                (None, Some(n)) => AmplifierParams::from_occupation(a, n, p.tau0),
                _ => AmplifierParams::new(a, 0.0, p.tau0),
            }
            .map_err(|e| CliError::config(format!("params: {e}")))?
            .with_phase_rate(p.phase_rate);
            params
                .validate()
                .map_err(|e| CliError::config(format!("params: {e}")))?;
            cells.push(params);
        }
        if let Some(w) = p.omega0 {
            if !(w > 0.0 && w.is_finite()) {
                return Err(CliError::config(format!("params.omega0: must be positive, got {w}")));
            }
        }
        if b_prime.is_none() && n_b.is_none() {
            self.params.n_b = Some(0.0);
        }

        let t = &mut self.tau;
        if !(t.start >= 0.0) || !t.start.is_finite() {
            return Err(CliError::config(format!("tau.start: must be >= 0, got {}", t.start)));
        }
        let end = t.end.unwrap_or(2.0 * self.params.tau0 + 6.0);
        if !(end > t.start) || !end.is_finite() {
            return Err(CliError::config(format!("tau.end: must exceed tau.start, got {end}")));
        }
        t.end = Some(end);
        if t.samples < 2 {
            return Err(CliError::config(format!(
                "tau.samples: need at least 2, got {}",
                t.samples
            )));
        }
        if self.scan.samples < 2 {
            return Err(CliError::config("scan.samples: need at least 2"));
        }

        let input = match self.input {
            Some(i) => i,
            None => self.default_input(&cells[0]),
        };
        input.validate().map_err(|e| CliError::config(format!("input: {e}")))?;
        self.input = Some(input);
        self.check_command(&input, &cells)?;

        if self.output.path.is_none() {
            let ext = match self.output.format {
                Format::Csv => "csv",
                Format::Json => "json",
            };
            self.output.path = Some(PathBuf::from(format!("{}.{ext}", self.command.name())));
        }
        if self.command == CommandKind::Wigner && self.wigner.times.is_none() {
            let t0 = self.params.tau0;
            self.wigner.times = Some(if t0 > 0.0 {
                vec![0.0, t0, 2.0 * t0]
            } else {
                vec![0.0, 1.0, 2.0]
            });
        }
        Ok(Resolved {
            config: self,
            input,
            cells,
        })
    }

    fn default_input(&self, first: &AmplifierParams) -> InputField {
        match self.command {
            CommandKind::Gain | CommandKind::Noise => InputField::coherent(0.0, 0.0),
            CommandKind::Mandel => InputField::fock(5),
            CommandKind::Squeezing => InputField::squeezed_vacuum(1.0),
            CommandKind::Wigner | CommandKind::Oracle => InputField::coherent(2.0, 0.0),
            // in equilibrium with the medium
            CommandKind::Thermal => InputField::thermal(first.n_medium()),
        }
    }

    fn check_command(&self, input: &InputField, cells: &[AmplifierParams]) -> CliResult<()> {
        match self.command {
            CommandKind::Squeezing if !matches!(input, InputField::Squeezed { .. }) => {
                Err(CliError::config("squeezing: input must be squeezed"))
            }
            CommandKind::Thermal if !matches!(input, InputField::Thermal { .. }) => {
                Err(CliError::config("thermal: input must be thermal"))
            }
            CommandKind::Wigner => {
                if !input.is_gaussian() {
                    return Err(CliError::config(format!(
                        "wigner: grids are closed-form for Gaussian inputs only, got {}",
                        input.kind()
                    )));
                }
                let w = &self.wigner;
                if w.points < 2 {
                    return Err(CliError::config("wigner.points: need at least 2"));
                }
                if let Some(h) = w.half_width {
                    if !(h > 0.0) {
                        return Err(CliError::config("wigner.half_width: must be positive"));
                    }
                }
                if let Some(times) = &w.times {
                    if times.is_empty() || times.iter().any(|t| !(*t >= 0.0)) {
                        return Err(CliError::config("wigner.times: need non-negative times"));
                    }
                }
                Ok(())
            }
            CommandKind::Oracle => {
                if cells.len() != 1 {
                    return Err(CliError::config(
                        "oracle: runs one parameter cell, give a single a_prime",
                    ));
                }
                if self.tau.start != 0.0 {
                    return Err(CliError::config("oracle: evolution starts at tau = 0"));
                }
                if let Some(d) = self.oracle.dim {
                    if d < 2 {
                        return Err(CliError::config("oracle.dim: need at least 2 levels"));
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// Validated configuration with defaults filled in.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub config: RunConfig,
    pub input: InputField,
    pub cells: Vec<AmplifierParams>,
}

impl Resolved {
    pub fn taus(&self) -> Vec<f64> {
        let t = &self.config.tau;
        let end = t.end.expect("resolved");
        let n = t.samples;
        (0..n)
            .map(|i| {
                if i + 1 == n {
                    end
                } else {
                    t.start + (end - t.start) * i as f64 / (n - 1) as f64
                }
            })
            .collect()
    }

    pub fn tau_end(&self) -> f64 {
        self.config.tau.end.expect("resolved")
    }

    pub fn output_path(&self) -> PathBuf {
        self.config.output.path.clone().expect("resolved")
    }
}

/// Parses `coherent:RE,IM`, `fock:N`, `squeezed:R,PHI[,RE,IM]` or
/// `thermal:NBAR`.
pub fn parse_input(spec: &str) -> Result<InputField, String> {
    let (kind, rest) = spec
        .split_once(':')
        .ok_or_else(|| format!("expected KIND:VALUES, got `{spec}`"))?;
    let nums = || -> Result<Vec<f64>, String> {
        rest.split(',')
            .map(|s| s.trim().parse::<f64>().map_err(|e| format!("`{s}`: {e}")))
            .collect()
    };
    let field = match kind {
        "coherent" => match nums()?.as_slice() {
            [re, im] => InputField::coherent(*re, *im),
            [re] => InputField::coherent(*re, 0.0),
            _ => return Err("coherent takes RE,IM".into()),
        },
        "fock" => InputField::fock(rest.trim().parse().map_err(|e| format!("fock level `{rest}`: {e}"))?),
        "squeezed" => match nums()?.as_slice() {
            [r, phi] => InputField::Squeezed {
                r: *r,
                phi: *phi,
                alpha: Complex64::new(0.0, 0.0),
            },
            [r, phi, re, im] => InputField::Squeezed {
                r: *r,
                phi: *phi,
                alpha: Complex64::new(*re, *im),
            },
            _ => return Err("squeezed takes R,PHI or R,PHI,RE,IM".into()),
        },
        "thermal" => match nums()?.as_slice() {
            [n] => InputField::thermal(*n),
            _ => return Err("thermal takes NBAR".into()),
        },
        other => return Err(format!("unknown input kind `{other}`")),
    };
    field.validate().map_err(|e| e.to_string())?;
    Ok(field)
}
