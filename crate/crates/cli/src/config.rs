//! TOML run configuration: parsing, defaults and validation.
//!
//! Every section has usable reference defaults, so an empty document plus a mode is
//! a complete run specification. Unknown keys are rejected everywhere.

use serde::{Deserialize, Serialize};
use std::fmt;

use qphase_core::floquet::{Backend, Cutoff};

/// What a run computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Phases over the full (epsilon, omega) grid.
    SingleSweep,
    /// Phases at one (epsilon, omega) point.
    SinglePoint,
    /// Composite survival probability over time, plus the Rabi period.
    Composite,
    /// Composite phases versus coupling strength.
    KappaSweep,
    /// Composite phases versus the kick time.
    T0Sweep,
    /// Conditional-phase-gate report.
    Gate,
    /// Series propagator versus the ODE integrator.
    OracleCheck,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Mode::SingleSweep => "single-sweep",
            Mode::SinglePoint => "single-point",
            Mode::Composite => "composite",
            Mode::KappaSweep => "kappa-sweep",
            Mode::T0Sweep => "t0-sweep",
            Mode::Gate => "gate",
            Mode::OracleCheck => "oracle-check",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DriveConfig {
    pub f0: f64,
    pub amplitude: f64,
}

impl Default for DriveConfig {
    fn default() -> Self {
        DriveConfig { f0: 0.0, amplitude: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub eps_start: f64,
    pub eps_stop: f64,
    pub eps_step: f64,
    pub omega_start: f64,
    pub omega_stop: f64,
    pub omega_step: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            eps_start: 0.01,
            eps_stop: 0.40,
            eps_step: 0.01,
            omega_start: 1.0,
            omega_stop: 10.0,
            omega_step: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PointConfig {
    pub epsilon: f64,
    pub omega: f64,
}

impl Default for PointConfig {
    fn default() -> Self {
        PointConfig { epsilon: 0.10, omega: 2.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Coupling {
    None,
    Delta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CompositeConfig {
    pub eps_a: f64,
    pub eps_b: f64,
    pub omega_a: f64,
    pub omega_b: f64,
    pub kappa: f64,
    pub t0: f64,
    pub coupling: Coupling,
}

impl Default for CompositeConfig {
    fn default() -> Self {
        CompositeConfig {
            eps_a: 0.01,
            eps_b: 0.01,
            omega_a: 1.0,
            omega_b: 2.0,
            kappa: 0.1,
            t0: 0.5,
            coupling: Coupling::Delta,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepRange {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

/// Coupling-strength sweep default: 0 to 0.2 in steps of 0.01.
pub fn default_kappa_sweep() -> SweepRange {
    SweepRange { start: 0.0, stop: 0.2, step: 0.01 }
}

/// Kick-time sweep default: 0.1 to 3.0 in steps of 0.1.
pub fn default_t0_sweep() -> SweepRange {
    SweepRange { start: 0.1, stop: 3.0, step: 0.1 }
}

impl Default for SweepRange {
    fn default() -> Self {
        default_kappa_sweep()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BackendSetting {
    Hill,
    Series,
}

impl BackendSetting {
    pub fn to_backend(self) -> Backend {
        match self {
            BackendSetting::Hill => Backend::HillMatrix,
            BackendSetting::Series => Backend::EpsilonSeries,
        }
    }
}

/// Fourier cutoff: a fixed order or `"auto"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CutoffSetting {
    Fixed(u32),
    Named(String),
}

impl CutoffSetting {
    pub fn to_cutoff(&self) -> Cutoff {
        match self {
            CutoffSetting::Fixed(m) => Cutoff::Fixed(*m),
            CutoffSetting::Named(_) => Cutoff::Auto,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NumericsConfig {
    pub cutoff: CutoffSetting,
    pub backend: BackendSetting,
    /// Relative tolerance of the verification integrator.
    pub oracle_tol: f64,
}

impl Default for NumericsConfig {
    fn default() -> Self {
        NumericsConfig {
            cutoff: CutoffSetting::Fixed(32),
            backend: BackendSetting::Hill,
            oracle_tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub mode: Mode,
    pub drive: DriveConfig,
    pub grid: GridConfig,
    pub point: PointConfig,
    pub composite: CompositeConfig,
    #[serde(rename = "kappa-sweep")]
    pub kappa_sweep: SweepRange,
    #[serde(rename = "t0-sweep")]
    pub t0_sweep: SweepRange,
    pub numerics: NumericsConfig,
    /// Seed for any randomized diagnostics; fixed default keeps runs
    /// reproducible.
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mode: Mode::SingleSweep,
            drive: DriveConfig::default(),
            grid: GridConfig::default(),
            point: PointConfig::default(),
            composite: CompositeConfig::default(),
            kappa_sweep: default_kappa_sweep(),
            t0_sweep: default_t0_sweep(),
            numerics: NumericsConfig::default(),
            seed: 0,
        }
    }
}

/// Configuration failure: either the document does not parse, or a named
/// field is out of domain.
#[derive(Debug)]
pub enum ConfigError {
    Syntax(String),
    Domain { field: &'static str, reason: String },
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Syntax(msg) => write!(f, "config syntax error: {msg}"),
            ConfigError::Domain { field, reason } => {
                write!(f, "config field '{field}': {reason}")
            }
        }
    }
}

impl std::error::Error for ConfigError {}

fn finite(field: &'static str, value: f64) -> Result<(), ConfigError> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::Domain { field, reason: format!("must be finite, got {value}") })
    }
}

fn well_ordered(
    field: &'static str,
    start: f64,
    stop: f64,
    step: f64,
) -> Result<(), ConfigError> {
    finite(field, start)?;
    finite(field, stop)?;
    finite(field, step)?;
    if !(step > 0.0) {
        return Err(ConfigError::Domain { field, reason: format!("step must be > 0, got {step}") });
    }
    if start > stop {
        return Err(ConfigError::Domain {
            field,
            reason: format!("range [{start}, {stop}] is not well-ordered"),
        });
    }
    Ok(())
}

fn positive(field: &'static str, value: f64) -> Result<(), ConfigError> {
    finite(field, value)?;
    if value > 0.0 {
        Ok(())
    } else {
        Err(ConfigError::Domain { field, reason: format!("must be > 0, got {value}") })
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        finite("f0", self.drive.f0)?;
        finite("amplitude", self.drive.amplitude)?;
        well_ordered("eps", self.grid.eps_start, self.grid.eps_stop, self.grid.eps_step)?;
        well_ordered("omega", self.grid.omega_start, self.grid.omega_stop, self.grid.omega_step)?;
        positive("omega", self.grid.omega_start)?;
        finite("epsilon", self.point.epsilon)?;
        positive("omega", self.point.omega)?;
        finite("eps_a", self.composite.eps_a)?;
        finite("eps_b", self.composite.eps_b)?;
        positive("omega_a", self.composite.omega_a)?;
        positive("omega_b", self.composite.omega_b)?;
        finite("kappa", self.composite.kappa)?;
        positive("t0", self.composite.t0)?;
        well_ordered(
            "kappa-sweep",
            self.kappa_sweep.start,
            self.kappa_sweep.stop,
            self.kappa_sweep.step,
        )?;
        well_ordered("t0-sweep", self.t0_sweep.start, self.t0_sweep.stop, self.t0_sweep.step)?;
        if self.t0_sweep.start <= 0.0 {
            return Err(ConfigError::Domain {
                field: "t0-sweep",
                reason: "kick times must be > 0".into(),
            });
        }
        positive("oracle_tol", self.numerics.oracle_tol)?;
        if let CutoffSetting::Named(name) = &self.numerics.cutoff {
            if name != "auto" {
                return Err(ConfigError::Domain {
                    field: "cutoff",
                    reason: format!("expected an integer or \"auto\", got \"{name}\""),
                });
            }
        }
        // TOML integers are signed 64-bit, so larger seeds cannot round-trip
        if self.seed > i64::MAX as u64 {
            return Err(ConfigError::Domain {
                field: "seed",
                reason: format!("must be at most {}, got {}", i64::MAX, self.seed),
            });
        }
        if let CutoffSetting::Fixed(m) = self.numerics.cutoff {
            if m < 8 {
                return Err(ConfigError::Domain {
                    field: "cutoff",
                    reason: format!("must be at least 8, got {m}"),
                });
            }
        }
        Ok(())
    }
}

/// Parse and validate a TOML run configuration.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let config: RunConfig =
        toml::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
    config.validate()?;
    Ok(config)
}

/// Serialize a configuration back to TOML; `parse_config` of the output
/// returns an equal config.
pub fn serialize_config(config: &RunConfig) -> String {
    toml::to_string_pretty(config).expect("config is always serializable")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_reference_defaults() {
        let c = parse_config("").unwrap();
        assert_eq!(c.mode, Mode::SingleSweep);
        assert_eq!(c.grid, GridConfig::default());
        let n_eps = ((c.grid.eps_stop - c.grid.eps_start) / c.grid.eps_step).round() as usize + 1;
        let n_om =
            ((c.grid.omega_stop - c.grid.omega_start) / c.grid.omega_step).round() as usize + 1;
        assert_eq!((n_eps, n_om), (40, 19));
    }

    #[test]
    fn negative_omega_names_the_field() {
        let err = parse_config("[point]\nomega = -1.0\n").unwrap_err();
        match err {
            ConfigError::Domain { field, .. } => assert_eq!(field, "omega"),
            other => panic!("expected domain error, got {other}"),
        }
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(matches!(
            parse_config("[grid]\nbogus = 1.0\n"),
            Err(ConfigError::Syntax(_))
        ));
    }

    #[test]
    fn syntax_error_reported_with_position() {
        let err = parse_config("mode = ").unwrap_err();
        assert!(matches!(err, ConfigError::Syntax(_)));
    }

    #[test]
    fn cutoff_accepts_auto_and_rejects_other_names() {
        let c = parse_config("[numerics]\ncutoff = \"auto\"\n").unwrap();
        assert_eq!(c.numerics.cutoff.to_cutoff(), Cutoff::Auto);
        assert!(parse_config("[numerics]\ncutoff = \"huge\"\n").is_err());
        assert!(parse_config("[numerics]\ncutoff = 4\n").is_err());
    }

    #[test]
    fn serialize_round_trips() {
        let mut c = RunConfig::default();
        c.mode = Mode::Gate;
        c.composite.omega_b = 5.0;
        c.numerics.cutoff = CutoffSetting::Named("auto".into());
        let text = serialize_config(&c);
        assert_eq!(parse_config(&text).unwrap(), c);
    }
}
