//! Declarative sweep configuration, read from a single JSON document.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Deserializer, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("cannot parse config {path}: {source}")]
    Parse { path: PathBuf, source: serde_json::Error },
    #[error("invalid sweep for task {task}: {reason}")]
    Invalid { task: Task, reason: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    KernelBounds,
    EpsStar,
    BandedL1,
    PeriodicC3,
    Decay,
    Bernstein,
    Poincare,
    Maximal,
    Counterexample,
    DerivativeCheck,
}

impl Task {
    pub fn as_str(&self) -> &'static str {
        match self {
            Task::KernelBounds => "kernel_bounds",
            Task::EpsStar => "eps_star",
            Task::BandedL1 => "banded_l1",
            Task::PeriodicC3 => "periodic_c3",
            Task::Decay => "decay",
            Task::Bernstein => "bernstein",
            Task::Poincare => "poincare",
            Task::Maximal => "maximal",
            Task::Counterexample => "counterexample",
            Task::DerivativeCheck => "derivative_check",
        }
    }

    pub fn parse(s: &str) -> Option<Task> {
        ALL_TASKS.iter().copied().find(|t| t.as_str() == s)
    }

    /// Whether cells of this task range over `q_list`.
    pub fn uses_q(&self) -> bool {
        matches!(self, Task::Decay | Task::Bernstein | Task::Poincare | Task::DerivativeCheck)
    }

    /// Whether cells of this task range over `N_list`.
    pub fn uses_n(&self) -> bool {
        matches!(self, Task::Decay | Task::Bernstein | Task::DerivativeCheck)
    }

    /// Whether every time of `t_spec` is a cell of its own (rather than a
    /// grid shared inside one cell).
    pub fn cell_per_time(&self) -> bool {
        matches!(self, Task::BandedL1)
    }

    pub fn uses_ensemble(&self) -> bool {
        matches!(self, Task::Decay | Task::Bernstein | Task::Poincare | Task::Maximal | Task::DerivativeCheck)
    }
}

pub const ALL_TASKS: [Task; 10] = [
    Task::KernelBounds,
    Task::EpsStar,
    Task::BandedL1,
    Task::PeriodicC3,
    Task::Decay,
    Task::Bernstein,
    Task::Poincare,
    Task::Maximal,
    Task::Counterexample,
    Task::DerivativeCheck,
];

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A Lebesgue exponent; JSON has no infinity, so `"inf"` is accepted as well.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Exponent(pub f64);

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(de)? {
            Raw::Num(v) => Ok(Exponent(v)),
            Raw::Text(s) if matches!(s.as_str(), "inf" | "infinity" | "∞") => Ok(Exponent(f64::INFINITY)),
            Raw::Text(s) => Err(serde::de::Error::custom(format!("unrecognized exponent {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TimeSpec {
    Dyadic(DyadicTimes),
    List(Vec<f64>),
}

/// `t = 2^{-k}` for `k_min ≤ k ≤ k_max`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename = "dyadic")]
pub struct DyadicTimes {
    pub k_min: i32,
    pub k_max: i32,
}

impl TimeSpec {
    pub fn times(&self) -> Vec<f64> {
        match self {
            TimeSpec::Dyadic(d) => (d.k_min..=d.k_max).map(|k| 2f64.powi(-k)).collect(),
            TimeSpec::List(v) => v.clone(),
        }
    }
}

impl Default for TimeSpec {
    fn default() -> Self {
        TimeSpec::Dyadic(DyadicTimes { k_min: 0, k_max: 12 })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleConfig {
    #[serde(default = "default_samples")]
    pub n_samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_box_len")]
    pub box_len: f64,
    #[serde(default = "default_grid_n")]
    pub n: usize,
    /// Fixed `[A₁, A₂]`; when absent, `[N/2, 2N]` for band-limited tasks
    /// and `[1, 4]` otherwise.
    #[serde(default)]
    pub annulus: Option<[f64; 2]>,
}

fn default_samples() -> usize {
    64
}
fn default_box_len() -> f64 {
    4.0
}
fn default_grid_n() -> usize {
    1024
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self { n_samples: default_samples(), seed: 0, box_len: default_box_len(), n: default_grid_n(), annulus: None }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Absolute accuracy of point evaluations of kernels.
    #[serde(default = "default_kernel_tol")]
    pub kernel: f64,
    /// Accuracy of L¹ norms.
    #[serde(default = "default_l1_tol")]
    pub l1: f64,
    /// Relative accuracy of the positivity certificate evaluations.
    #[serde(default = "default_rel_tol")]
    pub certificate_rel: f64,
    /// Rounds of local refinement for ensemble minima.
    #[serde(default = "default_rounds")]
    pub refine_rounds: usize,
    /// Plateau half-width of the counterexample function.
    #[serde(default = "default_delta0")]
    pub delta0: f64,
}

fn default_kernel_tol() -> f64 {
    1e-10
}
fn default_l1_tol() -> f64 {
    1e-6
}
fn default_rel_tol() -> f64 {
    1e-6
}
fn default_rounds() -> usize {
    1
}
fn default_delta0() -> f64 {
    0.1
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            kernel: default_kernel_tol(),
            l1: default_l1_tol(),
            certificate_rel: default_rel_tol(),
            refine_rounds: default_rounds(),
            delta0: default_delta0(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn from_path(path: &Path) -> Option<Format> {
        match path.extension()?.to_str()? {
            "csv" => Some(Format::Csv),
            "json" => Some(Format::Json),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub task: Task,
    pub alpha_list: Vec<f64>,
    pub dim_list: Vec<usize>,
    #[serde(default = "default_q_list")]
    pub q_list: Vec<Exponent>,
    #[serde(default = "default_n_list", rename = "N_list")]
    pub n_list: Vec<f64>,
    #[serde(default)]
    pub t_spec: TimeSpec,
    #[serde(default)]
    pub ensemble: EnsembleConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output_path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

fn default_q_list() -> Vec<Exponent> {
    vec![Exponent(2.0)]
}
fn default_n_list() -> Vec<f64> {
    vec![4.0]
}

/// A config file holds one sweep or a list of sweeps run in order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SweepPlan {
    Single(SweepConfig),
    Many(Vec<SweepConfig>),
}

impl SweepPlan {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.into(), source })?;
        serde_json::from_str(&text).map_err(|source| ConfigError::Parse { path: path.into(), source })
    }

    pub fn sweeps(&self) -> &[SweepConfig] {
        match self {
            SweepPlan::Single(c) => std::slice::from_ref(c),
            SweepPlan::Many(v) => v,
        }
    }
}

impl SweepConfig {
    pub fn times(&self) -> Vec<f64> {
        self.t_spec.times()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |reason: String| Err(ConfigError::Invalid { task: self.task, reason });
        if self.alpha_list.is_empty() || self.dim_list.is_empty() {
            return bad("alpha_list and dim_list must be nonempty".into());
        }
        if let Some(a) = self.alpha_list.iter().find(|&&a| !(a > 0.0 && a <= 2.0)) {
            return bad(format!("alpha {a} outside (0, 2]"));
        }
        if let Some(d) = self.dim_list.iter().find(|&&d| !(1..=3).contains(&d)) {
            return bad(format!("dimension {d} outside 1..=3"));
        }
        if self.task.uses_q() {
            if self.q_list.is_empty() {
                return bad("q_list must be nonempty".into());
            }
            if let Some(q) = self.q_list.iter().find(|q| !(q.0 >= 1.0)) {
                return bad(format!("exponent {} below 1", q.0));
            }
        }
        if self.task.uses_n() {
            if self.n_list.is_empty() {
                return bad("N_list must be nonempty".into());
            }
            if let Some(n) = self.n_list.iter().find(|&&n| !(n > 0.0 && n.log2().fract() == 0.0)) {
                return bad(format!("N = {n} is not a positive power of two"));
            }
        }
        let times = self.times();
        if times.is_empty() {
            return bad("t_spec yields no times".into());
        }
        let zero_ok = matches!(self.task, Task::BandedL1 | Task::Maximal);
        if let Some(t) = times.iter().find(|&&t| !(t > 0.0 || (zero_ok && t == 0.0)) || !t.is_finite()) {
            return bad(format!("time {t} is not admissible"));
        }
        if matches!(self.task, Task::EpsStar | Task::PeriodicC3) {
            if let Some(t) = times.iter().find(|&&t| t > 1.0) {
                return bad(format!("time {t} exceeds 1"));
            }
        }
        if self.task.uses_ensemble() {
            let e = &self.ensemble;
            if e.n_samples == 0 || e.n < 4 || !e.n.is_power_of_two() || !(e.box_len > 0.0) {
                return bad("ensemble needs n_samples ≥ 1, a power-of-two n ≥ 4 and box_len > 0".into());
            }
        }
        let tol = &self.tolerances;
        if !(tol.kernel > 0.0 && tol.l1 > 0.0 && tol.certificate_rel > 0.0) {
            return bad("tolerances must be positive".into());
        }
        Ok(())
    }
}
