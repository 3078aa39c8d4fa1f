//! Experiment configuration and report records.
//!
//! A report is a pure function of its config (including the seed): reruns
//! with any thread count serialize to identical bytes, which the test suite
//! checks. Schema lives in `schemas/report.schema.json`.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub const SCHEMA_VERSION: &str = "1";

/// One configuration record shared by all experiment kinds; fields that a
/// given experiment does not use stay `None` and are echoed as given.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub s: f64,
    pub d: usize,
    pub seed: u64,
    pub trials: usize,
    /// Separation stratum for tail/net experiments.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub m: Option<u32>,
    /// Inclusive level range `[n_lo, n_hi]`.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub n_range: Option<(usize, usize)>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub theta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub xi: Option<f64>,
    /// Fixed explicit line, as (x, r) coordinate lists.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub line_x: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub line_r: Option<Vec<f64>>,
    /// log2 of the (x, r) net spacing.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub net_spacing_log2: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub net_points_per_axis: Option<usize>,
    /// log2 of the x-grid resolution (phi functional, maximal operator).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub x_grid_log2: Option<u32>,
    /// log2 of the r-grid resolution (maximal operator, phi search).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub r_grid_log2: Option<u32>,
    /// Random-search budget (phi search).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub budget: Option<usize>,
    /// Lebesgue exponents for operator-norm experiments.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub q: Option<f64>,
    /// delta exponents (sharpness): delta = 2^-j for j in this list.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub delta_log2_list: Option<Vec<u32>>,
    /// Fourier scan limits (salem).
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub xi_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub eps: Option<f64>,
    /// Worker threads used for the run (0 = library default). Reports do
    /// not depend on it.
    pub threads: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub out_dir: Option<String>,
}

impl ExperimentConfig {
    pub fn new(s: f64, d: usize, seed: u64, trials: usize) -> Self {
        ExperimentConfig {
            s,
            d,
            seed,
            trials,
            m: None,
            n_range: None,
            theta: None,
            xi: None,
            line_x: None,
            line_r: None,
            net_spacing_log2: None,
            net_points_per_axis: None,
            x_grid_log2: None,
            r_grid_log2: None,
            budget: None,
            p: None,
            q: None,
            delta_log2_list: None,
            xi_max: None,
            eps: None,
            threads: 0,
            out_dir: None,
        }
    }
}

/// Per-level summary statistics of one monitored quantity.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelStats {
    pub n: usize,
    /// Whether `sigma_n` is nonzero at this level (keep-one step follows).
    pub active: bool,
    pub q50: f64,
    pub q95: f64,
    pub max_abs: f64,
    /// Threshold used for the exceedance counts (0 when not applicable).
    pub threshold: f64,
    pub exceed_x: f64,
    pub exceed_z: f64,
}

/// Ordinary least squares fit of `log2(value)` against the level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub residual_rms: f64,
    /// Levels that entered the fit (positive data only).
    pub levels: Vec<usize>,
}

/// A named pass/fail check with detail text.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

impl Verdict {
    pub fn new(name: &str, pass: bool, detail: impl Into<String>) -> Self {
        Verdict {
            name: name.to_string(),
            pass,
            detail: detail.into(),
        }
    }
}

/// The reproducible output record of one experiment run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: String,
    pub kind: String,
    pub config: ExperimentConfig,
    pub per_level: Vec<LevelStats>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub fit: Option<SlopeFit>,
    /// Fitted or calibrated constants, keyed by name.
    pub constants: BTreeMap<String, f64>,
    pub verdicts: Vec<Verdict>,
}

impl ExperimentReport {
    pub fn new(kind: &str, config: ExperimentConfig) -> Self {
        ExperimentReport {
            schema_version: SCHEMA_VERSION.to_string(),
            kind: kind.to_string(),
            config,
            per_level: Vec::new(),
            fit: None,
            constants: BTreeMap::new(),
            verdicts: Vec::new(),
        }
    }

    pub fn all_pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}
