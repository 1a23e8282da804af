//! Run configuration shared by the sweep driver, the verification suite and the CLI.
//!
//! All frequencies are angular frequencies in rad/s; all times in s.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::FrequencyGrid;
use crate::povm::OutcomeGrid;
use crate::teleport::{AcceptanceWindow, MirrorConvention};

/// A configuration field that failed validation.
#[derive(Debug, Clone, PartialEq, Error)]
#[error("{field}: {message}")]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub omega_min: f64,
    pub omega_max: f64,
    pub n_points: usize,
}

/// How the `mu` and `sigma` lists combine into sweep points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pairing {
    /// Every `mu` with every `sigma`, `mu` outermost.
    #[default]
    Product,
    /// `mu[i]` with `sigma[i]`; lists must have equal length.
    Zip,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EprSpec {
    /// Photon-1 center frequency `Ω1`.
    pub omega1: f64,
    /// Photon-2 center frequency `Ω2`.
    pub omega2: f64,
    pub mu: Vec<f64>,
    pub sigma: Vec<f64>,
    #[serde(default)]
    pub pairing: Pairing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputSpec {
    pub center: f64,
    /// Standard deviation of `|f(ω)|²`.
    pub width: f64,
    #[serde(default)]
    pub t0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Completeness and probability-conservation residual.
    #[serde(default = "defaults::completeness")]
    pub completeness: f64,
    #[serde(default = "defaults::normalization")]
    pub normalization: f64,
    #[serde(default = "defaults::parseval")]
    pub parseval: f64,
    /// Relative error for the sum/difference frequency variance identities.
    #[serde(default = "defaults::variance")]
    pub variance: f64,
    /// Relative error for spectral/temporal variance reciprocity.
    #[serde(default = "defaults::reciprocity")]
    pub reciprocity: f64,
    /// L2 distance between conditional states for different inputs at `mu = 0`.
    #[serde(default = "defaults::independence")]
    pub independence: f64,
    /// Trace distance for the no-signaling and dense cross-checks.
    #[serde(default = "defaults::no_signaling")]
    pub no_signaling: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            completeness: defaults::completeness(),
            normalization: defaults::normalization(),
            parseval: defaults::parseval(),
            variance: defaults::variance(),
            reciprocity: defaults::reciprocity(),
            independence: defaults::independence(),
            no_signaling: defaults::no_signaling(),
        }
    }
}

mod defaults {
    pub fn completeness() -> f64 {
        1e-9
    }
    pub fn normalization() -> f64 {
        1e-10
    }
    pub fn parseval() -> f64 {
        1e-12
    }
    pub fn variance() -> f64 {
        0.005
    }
    pub fn reciprocity() -> f64 {
        0.01
    }
    pub fn independence() -> f64 {
        1e-8
    }
    pub fn no_signaling() -> f64 {
        1e-8
    }
    pub fn time_fraction() -> f64 {
        1.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PovmSpec {
    /// Fraction of the time grid kept as measurement outcomes. Values below
    /// one make the measurement incomplete; only useful as a planted defect.
    #[serde(default = "defaults::time_fraction")]
    pub time_fraction: f64,
}

impl Default for PovmSpec {
    fn default() -> Self {
        Self {
            time_fraction: defaults::time_fraction(),
        }
    }
}

/// Outcome reported in detail by `simulate`; the maximum-density outcome when unset.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSpec {
    pub t: Option<f64>,
    pub omega_minus: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default)]
    pub mirror: MirrorConvention,
    pub grid: GridSpec,
    pub epr: EprSpec,
    pub input: InputSpec,
    pub window: AcceptanceWindow,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub povm: PovmSpec,
    #[serde(default)]
    pub simulate: SimulateSpec,
}

impl Default for SweepConfig {
    /// 256-point grid with the anticorrelation schedule
    /// `mu ∈ {−0.9, −0.99, −0.999}` paired with `sigma ∈ {3, 3.5, 4}` rad/s.
    fn default() -> Self {
        Self {
            mirror: MirrorConvention::default(),
            grid: GridSpec {
                omega_min: 0.0,
                omega_max: 256.0,
                n_points: 256,
            },
            epr: EprSpec {
                omega1: 128.0,
                omega2: 128.0,
                mu: vec![-0.9, -0.99, -0.999],
                sigma: vec![3.0, 3.5, 4.0],
                pairing: Pairing::Zip,
            },
            input: InputSpec {
                center: 128.0,
                width: 1.0,
                t0: 0.0,
            },
            window: AcceptanceWindow {
                t_width: 1.0,
                omega_width: 16.0,
            },
            tolerances: Tolerances::default(),
            povm: PovmSpec::default(),
            simulate: SimulateSpec::default(),
        }
    }
}

impl SweepConfig {
    /// Checks everything that can be checked without numerical work. Tail
    /// conditions are evaluated per sweep point instead.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let g = &self.grid;
        if !(g.omega_min >= 0.0) {
            return Err(ConfigError::new("grid.omega_min", "must be >= 0 (frequencies are positive)"));
        }
        if !(g.omega_max > g.omega_min) || !g.omega_max.is_finite() {
            return Err(ConfigError::new("grid.omega_max", "must be finite and exceed grid.omega_min"));
        }
        if g.n_points < 2 {
            return Err(ConfigError::new("grid.n_points", "must be at least 2"));
        }
        let e = &self.epr;
        for (field, v) in [("epr.omega1", e.omega1), ("epr.omega2", e.omega2)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(ConfigError::new(field, "must be a positive frequency"));
            }
        }
        if e.mu.is_empty() {
            return Err(ConfigError::new("epr.mu", "needs at least one value"));
        }
        if e.sigma.is_empty() {
            return Err(ConfigError::new("epr.sigma", "needs at least one value"));
        }
        for (i, mu) in e.mu.iter().enumerate() {
            if !(mu.abs() < 1.0) {
                return Err(ConfigError::new(format!("epr.mu[{i}]"), format!("{mu} violates |mu| < 1")));
            }
        }
        for (i, s) in e.sigma.iter().enumerate() {
            if !(*s > 0.0) || !s.is_finite() {
                return Err(ConfigError::new(format!("epr.sigma[{i}]"), format!("{s} must be positive")));
            }
        }
        if e.pairing == Pairing::Zip && e.mu.len() != e.sigma.len() {
            return Err(ConfigError::new(
                "epr.pairing",
                format!("zip needs equal list lengths, got {} mu and {} sigma", e.mu.len(), e.sigma.len()),
            ));
        }
        let inp = &self.input;
        if !(inp.width > 0.0) || !inp.width.is_finite() {
            return Err(ConfigError::new("input.width", "must be positive"));
        }
        if !inp.center.is_finite() || !inp.t0.is_finite() {
            return Err(ConfigError::new("input", "center and t0 must be finite"));
        }
        let w = &self.window;
        if !(w.t_width > 0.0) || !(w.omega_width > 0.0) {
            return Err(ConfigError::new("window", "t_width and omega_width must be positive"));
        }
        let f = self.povm.time_fraction;
        if !(f > 0.0 && f <= 1.0) {
            return Err(ConfigError::new("povm.time_fraction", "must lie in (0, 1]"));
        }
        let t = &self.tolerances;
        for (field, v) in [
            ("tolerances.completeness", t.completeness),
            ("tolerances.normalization", t.normalization),
            ("tolerances.parseval", t.parseval),
            ("tolerances.variance", t.variance),
            ("tolerances.reciprocity", t.reciprocity),
            ("tolerances.independence", t.independence),
            ("tolerances.no_signaling", t.no_signaling),
        ] {
            if !(v > 0.0) {
                return Err(ConfigError::new(field, "must be positive"));
            }
        }
        if self.simulate.t.is_some() != self.simulate.omega_minus.is_some() {
            return Err(ConfigError::new("simulate", "set both t and omega_minus, or neither"));
        }
        let outcomes = self.outcome_grid()?;
        w.cells(&outcomes)
            .map_err(|_| ConfigError::new("window", "larger than the outcome grid"))?;
        if let (Some(t), Some(om)) = (self.simulate.t, self.simulate.omega_minus) {
            outcomes
                .locate(t, om)
                .map_err(|e| ConfigError::new("simulate", e.to_string()))?;
        }
        Ok(())
    }

    pub fn frequency_grid(&self) -> Result<FrequencyGrid, ConfigError> {
        FrequencyGrid::new(self.grid.omega_min, self.grid.omega_max, self.grid.n_points)
            .map_err(|e| ConfigError::new("grid", e.to_string()))
    }

    /// Outcome lattice of the entangled measurement, truncated by `povm.time_fraction`.
    pub fn outcome_grid(&self) -> Result<OutcomeGrid, ConfigError> {
        Ok(OutcomeGrid::new(&self.frequency_grid()?).with_time_fraction(self.povm.time_fraction))
    }

    /// Sweep points `(mu, sigma)` in output order.
    pub fn points(&self) -> Vec<(f64, f64)> {
        match self.epr.pairing {
            Pairing::Product => self
                .epr
                .mu
                .iter()
                .flat_map(|&mu| self.epr.sigma.iter().map(move |&s| (mu, s)))
                .collect(),
            Pairing::Zip => self.epr.mu.iter().copied().zip(self.epr.sigma.iter().copied()).collect(),
        }
    }
}
