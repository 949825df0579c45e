//! Configuration-driven command layer: strict key-value configs, named
//! presets reproducing the reference figures, deterministic CSV/JSON tables
//! stamped with the config hash, and a brute-force cross-check runner.

use clap::{Args, Parser, Subcommand};
use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use thiserror::Error;

use crate::coincidence::{
    coincidence_probs, pair_distribution, visibility, CoincidenceError, DetectorModel,
};
use crate::fock::{self, FockError};
use crate::hom::{hom_dip_curve, hom_max_from_matrix, hom_probability, HomError};
use crate::homodyne::{
    charge_variance_extrema, charge_variance_for_lo, cw_variance_spectrum, variance_db,
    HomodyneError,
};
use crate::jsa::{
    oversample, sample_r_matrix, BandlimitPreset, BetaMatrix, JointAmplitude, JsaError,
    SamplingGrid,
};
use crate::matcalc::{moments, BetaSvd, MatcalcError, Regime};
use crate::wsdecomp::{WindowSpec, WsdecompError};
use crate::C64;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_IO: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad configuration, bad parameters, or a failed tolerance check.
    #[error("{0}")]
    Invalid(String),
    /// Filesystem trouble.
    #[error("{0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => EXIT_INVALID,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

macro_rules! invalid_from {
    ($($ty:ty),*) => {$(
        impl From<$ty> for CliError {
            fn from(e: $ty) -> Self {
                CliError::Invalid(e.to_string())
            }
        }
    )*};
}
invalid_from!(
    JsaError,
    MatcalcError,
    WsdecompError,
    CoincidenceError,
    HomodyneError,
    HomError,
    FockError
);

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Peak squeezing strength of the sampled matrix.
    pub beta_circ: f64,
    pub model: ModelConfig,
    pub window: WindowConfig,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub detector: DetectorConfig,
    #[serde(default)]
    pub sweep: SweepConfig,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub oracle: OracleConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    /// "pulsed" or "cw".
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pulse_duration: Option<f64>,
    pub coherence_time: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowConfig {
    #[serde(default)]
    pub t_center: f64,
    /// Number of samples on the working (oversampled) grid.
    pub size: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// "two-pi" (Ω = 2π/T_c) or "two-sqrt-pi" (Ω = 2√π/T_c).
    #[serde(default = "default_bandlimit")]
    pub bandlimit: String,
    #[serde(default = "one_u32")]
    pub oversample: u32,
}

fn default_bandlimit() -> String {
    "two-pi".into()
}
fn one_u32() -> u32 {
    1
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { bandlimit: default_bandlimit(), oversample: 1 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorConfig {
    #[serde(default = "one_f64")]
    pub alpha: f64,
    #[serde(default = "default_s_max")]
    pub s_max: usize,
    #[serde(default = "default_tail_tol")]
    pub tail_tol: f64,
}

fn one_f64() -> f64 {
    1.0
}
fn default_s_max() -> usize {
    40
}
fn default_tail_tol() -> f64 {
    1e-10
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self { alpha: 1.0, s_max: 40, tail_tol: 1e-10 }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// Local-oscillator phases for the variance spectrum; empty means {0, π/2}.
    #[serde(default)]
    pub theta: Vec<f64>,
    /// Number of sideband frequencies across the working band; 0 skips the
    /// spectrum table.
    #[serde(default)]
    pub omega_points: usize,
    #[serde(default)]
    pub beta_circ: Vec<f64>,
    #[serde(default)]
    pub alpha: Vec<f64>,
    /// Interference delays in integer steps of the working sample time.
    #[serde(default)]
    pub q_min: i64,
    #[serde(default)]
    pub q_max: i64,
    /// Pulse-to-coherence-time ratios for the visibility table.
    #[serde(default)]
    pub pulse_ratios: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_dir")]
    pub dir: String,
    /// "csv" or "json".
    #[serde(default = "default_format")]
    pub format: String,
}

fn default_dir() -> String {
    ".".into()
}
fn default_format() -> String {
    "csv".into()
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: default_dir(), format: default_format() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_cutoff")]
    pub cutoff: usize,
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Deliberately perturb the analytic inputs; every comparison must then
    /// fail. Negative control for the checker itself.
    #[serde(default)]
    pub corrupt: bool,
}

fn default_seed() -> u64 {
    7
}
fn default_cutoff() -> usize {
    8
}
fn default_trials() -> usize {
    6
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self { seed: default_seed(), cutoff: default_cutoff(), trials: default_trials(), corrupt: false }
    }
}

impl ModelConfig {
    pub fn build(&self) -> Result<JointAmplitude, CliError> {
        match self.kind.as_str() {
            "pulsed" => {
                let tp = self.pulse_duration.ok_or_else(|| {
                    CliError::Invalid("model.pulse_duration is required for kind = \"pulsed\"".into())
                })?;
                Ok(JointAmplitude::double_gaussian_pulsed(tp, self.coherence_time)?)
            }
            "cw" => {
                if self.pulse_duration.is_some() {
                    return Err(CliError::Invalid(
                        "model.pulse_duration must be omitted for kind = \"cw\"".into(),
                    ));
                }
                Ok(JointAmplitude::double_gaussian_cw(self.coherence_time)?)
            }
            other => Err(CliError::Invalid(format!(
                "model.kind must be \"pulsed\" or \"cw\", got \"{other}\""
            ))),
        }
    }
}

impl GridConfig {
    pub fn preset(&self) -> Result<BandlimitPreset, CliError> {
        match self.bandlimit.as_str() {
            "two-pi" => Ok(BandlimitPreset::TwoPiOverTc),
            "two-sqrt-pi" => Ok(BandlimitPreset::TwoSqrtPiOverTc),
            other => Err(CliError::Invalid(format!(
                "grid.bandlimit must be \"two-pi\" or \"two-sqrt-pi\", got \"{other}\""
            ))),
        }
    }
}

fn check_range(name: &str, v: f64, lo: f64, hi: f64) -> Result<(), CliError> {
    if !v.is_finite() || v < lo || v > hi {
        return Err(CliError::Invalid(format!(
            "{name} must lie in [{lo}, {hi}], got {v}"
        )));
    }
    Ok(())
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let config: RunConfig =
            toml::from_str(text).map_err(|e| CliError::Invalid(format!("config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        check_range("beta_circ", self.beta_circ, 0.0, 4.0)?;
        check_range("model.coherence_time", self.model.coherence_time, 1e-9, 1e9)?;
        self.model.build()?;
        if self.window.size == 0 || self.window.size > 4096 {
            return Err(CliError::Invalid(format!(
                "window.size must lie in [1, 4096], got {}",
                self.window.size
            )));
        }
        check_range("window.t_center", self.window.t_center, -1e9, 1e9)?;
        self.grid.preset()?;
        if self.grid.oversample == 0 || self.grid.oversample > 64 {
            return Err(CliError::Invalid(format!(
                "grid.oversample must lie in [1, 64], got {}",
                self.grid.oversample
            )));
        }
        check_range("detector.alpha", self.detector.alpha, 1e-12, 1.0)?;
        if self.detector.s_max == 0 || self.detector.s_max > 5000 {
            return Err(CliError::Invalid(format!(
                "detector.s_max must lie in [1, 5000], got {}",
                self.detector.s_max
            )));
        }
        check_range("detector.tail_tol", self.detector.tail_tol, 1e-300, 1e-2)?;
        for (i, &t) in self.sweep.theta.iter().enumerate() {
            check_range(&format!("sweep.theta[{i}]"), t, -1e3, 1e3)?;
        }
        if self.sweep.omega_points > 100_001 {
            return Err(CliError::Invalid("sweep.omega_points exceeds 100001".into()));
        }
        for (i, &b) in self.sweep.beta_circ.iter().enumerate() {
            check_range(&format!("sweep.beta_circ[{i}]"), b, 0.0, 4.0)?;
        }
        for (i, &a) in self.sweep.alpha.iter().enumerate() {
            check_range(&format!("sweep.alpha[{i}]"), a, 1e-12, 1.0)?;
        }
        if self.sweep.q_min > self.sweep.q_max {
            return Err(CliError::Invalid(format!(
                "sweep.q_min = {} exceeds sweep.q_max = {}",
                self.sweep.q_min, self.sweep.q_max
            )));
        }
        if self.sweep.q_max - self.sweep.q_min > 20_000 {
            return Err(CliError::Invalid("delay sweep exceeds 20001 points".into()));
        }
        for (i, &r) in self.sweep.pulse_ratios.iter().enumerate() {
            check_range(&format!("sweep.pulse_ratios[{i}]"), r, 1.0, 1e3)?;
        }
        match self.output.format.as_str() {
            "csv" | "json" => {}
            other => {
                return Err(CliError::Invalid(format!(
                    "output.format must be \"csv\" or \"json\", got \"{other}\""
                )))
            }
        }
        if self.oracle.cutoff == 0 || self.oracle.cutoff > 14 {
            return Err(CliError::Invalid(format!(
                "oracle.cutoff must lie in [1, 14], got {}",
                self.oracle.cutoff
            )));
        }
        if self.oracle.trials == 0 || self.oracle.trials > 100 {
            return Err(CliError::Invalid(format!(
                "oracle.trials must lie in [1, 100], got {}",
                self.oracle.trials
            )));
        }
        Ok(())
    }

    /// Hash of the effective configuration, stamped into every output table.
    pub fn sha256(&self) -> String {
        let canonical = toml::to_string(self).expect("validated config always serializes");
        let mut hasher = Sha256::new();
        hasher.update(canonical.as_bytes());
        let digest = hasher.finalize();
        let mut hex = String::with_capacity(64);
        for byte in digest {
            let _ = write!(hex, "{byte:02x}");
        }
        hex
    }
}

// ---------------------------------------------------------------------------
// Presets
// ---------------------------------------------------------------------------

pub const PRESET_NAMES: [&str; 8] =
    ["fig1", "fig3", "fig5", "fig6", "fig7", "fig8", "fig9", "fig10"];

/// Source text of a named builtin preset.
pub fn preset_text(name: &str) -> Option<&'static str> {
    match name {
        "fig1" => Some(include_str!("../presets/fig1.toml")),
        "fig3" => Some(include_str!("../presets/fig3.toml")),
        "fig5" => Some(include_str!("../presets/fig5.toml")),
        "fig6" => Some(include_str!("../presets/fig6.toml")),
        "fig7" => Some(include_str!("../presets/fig7.toml")),
        "fig8" => Some(include_str!("../presets/fig8.toml")),
        "fig9" => Some(include_str!("../presets/fig9.toml")),
        "fig10" => Some(include_str!("../presets/fig10.toml")),
        _ => None,
    }
}

// ---------------------------------------------------------------------------
// Output tables
// ---------------------------------------------------------------------------

struct Table {
    columns: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl Table {
    fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

fn write_table(
    dir: &Path,
    name: &str,
    format: &str,
    hash: &str,
    table: &Table,
) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir)?;
    match format {
        "csv" => {
            let path = dir.join(format!("{name}.csv"));
            let mut text = format!("# config sha256: {hash}\n");
            text.push_str(&table.columns.join(","));
            text.push('\n');
            for row in &table.rows {
                let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
                text.push_str(&cells.join(","));
                text.push('\n');
            }
            fs::write(&path, text)?;
            Ok(path)
        }
        "json" => {
            let path = dir.join(format!("{name}.json"));
            let doc = serde_json::json!({
                "config_sha256": hash,
                "columns": table.columns,
                "rows": table.rows,
            });
            fs::write(&path, serde_json::to_string_pretty(&doc).expect("plain data"))?;
            Ok(path)
        }
        other => Err(CliError::Invalid(format!("unsupported output format \"{other}\""))),
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![0.5 * (lo + hi)];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

// ---------------------------------------------------------------------------
// Shared construction
// ---------------------------------------------------------------------------

/// The working window: the squeezing matrix on the (possibly refined) grid
/// restricted to the configured window, with the peak strength rescaled so
/// the refinement describes the same physical source.
fn working_beta(config: &RunConfig, beta_circ: f64) -> Result<BetaMatrix, CliError> {
    let model = config.model.build()?;
    let preset = config.grid.preset()?;
    let k = config.grid.oversample;
    let tau0 = preset.tau(config.model.coherence_time);
    let fine_tau = tau0 / k as f64;
    let window = WindowSpec::new(config.window.t_center, config.window.size)?;
    let j = window.index_range(fine_tau);
    let scale = if k == 1 {
        1.0
    } else {
        let kk = k as i64;
        let half = (j.start().abs().max(j.end().abs()) + kk - 1) / kk;
        let coarse = SamplingGrid::centered(tau0, half.max(1))?;
        oversample(&model, &coarse, k)?.1
    };
    let grid = SamplingGrid::new(fine_tau, *j.start(), *j.end())?;
    Ok(BetaMatrix::sample(&model, grid, C64::new(beta_circ * scale, 0.0))?)
}

fn strength_axis(config: &RunConfig) -> Vec<f64> {
    if config.sweep.beta_circ.is_empty() {
        vec![config.beta_circ]
    } else {
        config.sweep.beta_circ.clone()
    }
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

pub fn cmd_decompose(config: &RunConfig, out_dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let hash = config.sha256();
    let model = config.model.build()?;
    let beta = working_beta(config, config.beta_circ)?;
    let grid = &beta.grid;
    let format = config.output.format.as_str();
    let mut written = Vec::new();

    if model.evaluate_spectral(0.0, 0.0).is_some() {
        let omega_half = 0.5 * grid.omega();
        let axis = linspace(-omega_half, omega_half, 101);
        let mut table = Table::new(&["omega1", "omega2", "density"]);
        for &w1 in &axis {
            for &w2 in &axis {
                let g = model.evaluate_spectral(w1, w2).expect("kind checked above");
                table.push(vec![w1, w2, g.norm_sqr()]);
            }
        }
        written.push(write_table(out_dir, "spectral_density", format, &hash, &table)?);
    }

    {
        let t_lo = grid.time_of(grid.n_min());
        let t_hi = grid.time_of(grid.n_max());
        let axis = linspace(t_lo, t_hi, 101);
        let mut table = Table::new(&["t1", "t2", "density"]);
        for &t1 in &axis {
            for &t2 in &axis {
                table.push(vec![t1, t2, model.evaluate(t1, t2).norm_sqr()]);
            }
        }
        written.push(write_table(out_dir, "temporal_density", format, &hash, &table)?);
    }

    {
        let r = sample_r_matrix(&model, grid)?;
        let mut table = Table::new(&["n", "m", "re", "im"]);
        for (i, n) in grid.indices().enumerate() {
            for (j, m) in grid.indices().enumerate() {
                table.push(vec![n as f64, m as f64, r[[i, j]].re, r[[i, j]].im]);
            }
        }
        written.push(write_table(out_dir, "mode_amplitudes", format, &hash, &table)?);
    }
    Ok(written)
}

pub fn cmd_homodyne(config: &RunConfig, out_dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let hash = config.sha256();
    let format = config.output.format.as_str();
    let mut written = Vec::new();

    if config.sweep.omega_points > 0 {
        if config.model.kind != "cw" {
            return Err(CliError::Invalid(
                "the variance spectrum assumes a stationary source; use kind = \"cw\"".into(),
            ));
        }
        let beta = working_beta(config, config.beta_circ)?;
        let thetas = if config.sweep.theta.is_empty() {
            vec![0.0, std::f64::consts::FRAC_PI_2]
        } else {
            config.sweep.theta.clone()
        };
        let names: Vec<String> = thetas
            .iter()
            .map(|t| format!("variance[theta={t:.6}]"))
            .collect();
        let mut columns = vec!["omega".to_string()];
        columns.extend(names);
        let mut table = Table { columns, rows: Vec::new() };
        let half = 0.49 * beta.grid.omega();
        for w in linspace(-half, half, config.sweep.omega_points) {
            let mut row = vec![w];
            for &theta in &thetas {
                row.push(cw_variance_spectrum(&beta.values, theta, w, &beta.grid)?);
            }
            table.push(row);
        }
        written.push(write_table(out_dir, "variance_spectrum", format, &hash, &table)?);
    }

    {
        let mut table = Table::new(&["beta_circ", "db_min", "db_max"]);
        for &b in &strength_axis(config) {
            let beta = working_beta(config, b)?;
            let mom = moments(&beta.values, Regime::Degenerate)?;
            let res = charge_variance_extrema(&mom)?;
            table.push(vec![b, variance_db(res.sigma2_min)?, variance_db(res.sigma2_max)?]);
        }
        written.push(write_table(out_dir, "squeezing_strength", format, &hash, &table)?);
    }
    Ok(written)
}

pub fn cmd_coincidence(config: &RunConfig, out_dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let hash = config.sha256();
    let format = config.output.format.as_str();
    let mut written = Vec::new();
    let det = DetectorModel::new(config.detector.alpha)?
        .with_truncation(config.detector.s_max, config.detector.tail_tol);

    {
        let mut table = Table::new(&["beta_circ", "s", "prob", "cumulative"]);
        for &b in &strength_axis(config) {
            let beta = working_beta(config, b)?;
            let dist = pair_distribution(&beta.values, det.s_max())?;
            let mut cum = 0.0;
            for (s, &p) in dist.probs().iter().enumerate() {
                cum += p;
                table.push(vec![b, s as f64, p, cum]);
            }
        }
        written.push(write_table(out_dir, "pair_distribution", format, &hash, &table)?);
    }

    {
        // Unit-efficiency detectors versus the vanishing-efficiency limit.
        let mut table = Table::new(&["beta_circ", "v_unit_detector", "v_weak_detector"]);
        for &b in &strength_axis(config) {
            let beta = working_beta(config, b)?;
            let probs = coincidence_probs(&beta.values, &det)?;
            let v1 = visibility(probs.hh, probs.hv)?;
            let svd = BetaSvd::new(&beta.values)?;
            let n = svd.sum_over_singulars(|s| s.sinh().powi(2));
            let s4 = svd.sum_over_singulars(|s| s.sinh().powi(4));
            let v2 = (n + s4) / (n + 2.0 * n * n + s4);
            table.push(vec![b, v1, v2]);
        }
        written.push(write_table(out_dir, "visibility_strength", format, &hash, &table)?);
    }

    if !config.sweep.alpha.is_empty() {
        let beta = working_beta(config, config.beta_circ)?;
        let mut table = Table::new(&["alpha", "visibility"]);
        for &a in &config.sweep.alpha {
            let det_a = DetectorModel::new(a)?
                .with_truncation(config.detector.s_max, config.detector.tail_tol);
            let probs = coincidence_probs(&beta.values, &det_a)?;
            table.push(vec![a, visibility(probs.hh, probs.hv)?]);
        }
        written.push(write_table(out_dir, "visibility_efficiency", format, &hash, &table)?);
    }
    Ok(written)
}

pub fn cmd_hom(config: &RunConfig, out_dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let hash = config.sha256();
    let format = config.output.format.as_str();
    if config.grid.preset()? != BandlimitPreset::TwoPiOverTc {
        return Err(CliError::Invalid(
            "delay sweeps use the two-pi bandlimit; set grid.bandlimit = \"two-pi\"".into(),
        ));
    }
    let model = config.model.build()?;
    let window = WindowSpec::new(config.window.t_center, config.window.size)?;
    let k = config.grid.oversample;
    let tau0 = config.model.coherence_time;
    let mut written = Vec::new();

    {
        let mut table =
            Table::new(&["beta_circ", "delay_over_tau", "prob", "prob_normalized"]);
        for &b in &strength_axis(config) {
            let curve = hom_dip_curve(
                &model,
                C64::new(b, 0.0),
                &window,
                k,
                config.sweep.q_min..=config.sweep.q_max,
            )?;
            for (delay, prob) in curve.delays.iter().zip(&curve.probs) {
                let norm = if curve.p_max > 0.0 { prob / curve.p_max } else { 0.0 };
                table.push(vec![b, delay / tau0, *prob, norm]);
            }
        }
        written.push(write_table(out_dir, "dip", format, &hash, &table)?);
    }

    if !config.sweep.pulse_ratios.is_empty() {
        let mut table = Table::new(&["pulse_ratio", "beta_circ", "visibility"]);
        for &ratio in &config.sweep.pulse_ratios {
            let ratio_model = JointAmplitude::double_gaussian_pulsed(ratio * tau0, tau0)?;
            for &b in &strength_axis(config) {
                let curve = hom_dip_curve(
                    &ratio_model,
                    C64::new(b, 0.0),
                    &window,
                    k,
                    config.sweep.q_min..=config.sweep.q_max,
                )?;
                table.push(vec![ratio, b, curve.visibility]);
            }
        }
        written.push(write_table(out_dir, "dip_visibility", format, &hash, &table)?);
    }
    Ok(written)
}

// ---------------------------------------------------------------------------
// Brute-force cross-checks
// ---------------------------------------------------------------------------

struct CheckResult {
    name: &'static str,
    max_err: f64,
    tol: f64,
}

impl CheckResult {
    fn passed(&self) -> bool {
        self.max_err <= self.tol
    }
}

fn random_beta(rng: &mut ChaCha8Rng, dim: usize, amp: f64) -> Array2<C64> {
    let raw = Array2::from_shape_fn((dim, dim), |_| {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    let max = raw.iter().map(|v| v.norm()).fold(0.0_f64, f64::max).max(1e-300);
    raw.mapv(|v| v * (amp / max))
}

fn symmetrize(beta: &Array2<C64>) -> Array2<C64> {
    (beta + &beta.t()).mapv(|v| 0.5 * v)
}

/// Cross-check the matrix formulas against the truncated number-state
/// simulator on seeded random inputs. With `oracle.corrupt` the analytic
/// side is perturbed and every comparison must fail.
pub fn cmd_oracle_check(config: &RunConfig, out_dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let hash = config.sha256();
    let mut rng = ChaCha8Rng::seed_from_u64(config.oracle.seed);
    let cutoff = config.oracle.cutoff;
    let amp = config.beta_circ.min(0.3);
    let nudge = if config.oracle.corrupt { 0.05 } else { 0.0 };
    let mut checks: Vec<CheckResult> = Vec::new();

    // Second moments and pair-number distribution, two-beam states.
    let mut moment_err = 0.0_f64;
    let mut pair_err = 0.0_f64;
    let mut complete_err = 0.0_f64;
    for trial in 0..config.oracle.trials {
        let dim = 1 + trial % 3;
        let beta = random_beta(&mut rng, dim, amp / dim as f64);
        let state = fock::build_squeezed_state(&beta, cutoff)?;
        let mut analytic = beta.clone();
        analytic[[0, 0]] += nudge;

        let brute = fock::oracle_moments(&state);
        let slow = moments(&analytic, Regime::Nondegenerate)?;
        if let (
            crate::matcalc::MomentSet::Nondegenerate { n_a, n_b, m_ab },
            crate::matcalc::MomentSet::Nondegenerate { n_a: oa, n_b: ob, m_ab: om },
        ) = (&slow, &brute)
        {
            for (x, y) in [(n_a, oa), (n_b, ob), (m_ab, om)] {
                for (u, v) in x.iter().zip(y.iter()) {
                    moment_err = moment_err.max((u - v).norm());
                }
            }
        }

        let brute_pairs = fock::oracle_pair_probs(&state, 4);
        let dist = pair_distribution(&analytic, 4)?;
        for s in 0..=4 {
            pair_err = pair_err.max((brute_pairs.prob(s) - dist.prob(s)).abs());
        }
        let total: f64 = fock::oracle_pair_probs(&state, dim * cutoff).probs().iter().sum();
        complete_err = complete_err.max((total + state.leakage() - 1.0).abs());
    }
    checks.push(CheckResult { name: "second-moments", max_err: moment_err, tol: 1e-6 });
    checks.push(CheckResult { name: "pair-distribution", max_err: pair_err, tol: 1e-6 });
    checks.push(CheckResult { name: "pair-completeness", max_err: complete_err, tol: 1e-10 });

    // Optimal charge measurement, single-beam state.
    let mut quad_err = 0.0_f64;
    for _ in 0..2 {
        let beta = symmetrize(&random_beta(&mut rng, 2, amp.min(0.12)));
        let state = fock::build_degenerate_state(&beta, 14)?;
        let mut analytic = beta.clone();
        analytic[[0, 0]] += nudge;
        let mom = moments(&analytic, Regime::Degenerate)?;
        let res = charge_variance_extrema(&mom)?;
        let xi =
            Array1::from_shape_fn(2, |j| C64::new(res.phi_min[j], res.phi_min[2 + j]));
        let brute = fock::oracle_quadrature_variance(&state, &xi)?;
        let again = charge_variance_for_lo(&mom, xi.view())?;
        quad_err = quad_err.max((brute - res.sigma2_min).abs()).max((again - res.sigma2_min).abs());
    }
    checks.push(CheckResult { name: "charge-variance", max_err: quad_err, tol: 1e-5 });

    // Beam-splitter interference at zero and full separation.
    let mut hom_err = 0.0_f64;
    for _ in 0..2 {
        let beta = symmetrize(&random_beta(&mut rng, 2, amp.min(0.15)));
        let state = fock::build_squeezed_state(&beta, cutoff.max(8))?;
        let mut analytic = beta.clone();
        analytic[[0, 0]] += nudge;
        let svd = BetaSvd::new(&analytic)?;
        let t = svd.fn_of_q_times_unitary(f64::tanh);
        let overlapped = hom_probability(t.view(), svd.det_sech())?;
        hom_err = hom_err.max((fock::oracle_hom(&state, 0, 4)? - overlapped).abs());
        let separated = hom_max_from_matrix(analytic.view())?;
        hom_err = hom_err.max((fock::oracle_hom(&state, 4, 6)? - separated).abs());
    }
    checks.push(CheckResult { name: "interference", max_err: hom_err, tol: 1e-5 });

    fs::create_dir_all(out_dir)?;
    let path = out_dir.join("oracle_report.csv");
    let mut text = format!("# config sha256: {hash}\n");
    text.push_str("check,max_abs_err,tolerance,status\n");
    let mut all_pass = true;
    for check in &checks {
        let status = if check.passed() { "pass" } else { "fail" };
        all_pass &= check.passed();
        let _ = writeln!(
            text,
            "{},{:.16e},{:.16e},{}",
            check.name, check.max_err, check.tol, status
        );
        println!("{:<20} max err {:>12.3e}  tol {:>9.1e}  {}", check.name, check.max_err, check.tol, status);
    }
    fs::write(&path, text)?;
    if !all_pass {
        return Err(CliError::Invalid("brute-force cross-check failed".into()));
    }
    Ok(vec![path])
}

// ---------------------------------------------------------------------------
// Entry points
// ---------------------------------------------------------------------------

#[derive(Debug, Parser)]
#[command(
    name = "wsqueeze",
    version,
    about = "Sinc-mode analysis of squeezed light: decomposition, homodyne \
             variances, coincidence counting, and two-photon interference"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Emit the joint amplitude densities and the sampled mode matrix.
    Decompose(RunArgs),
    /// Emit variance spectra and squeezing levels in decibels.
    Homodyne(RunArgs),
    /// Emit pair-number distributions and coincidence visibilities.
    Coincidence(RunArgs),
    /// Emit interference dip curves and dip visibilities.
    Hom(RunArgs),
    /// Compare the matrix formulas against a truncated number-state
    /// simulator and write a pass/fail report.
    #[command(name = "oracle-check")]
    OracleCheck(RunArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// Path to a key-value config file.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Name of a builtin preset (fig1, fig3, fig5, fig6, fig7, fig8, fig9, fig10).
    #[arg(long, value_name = "NAME")]
    pub preset: Option<String>,
    /// Output directory; defaults to the config's output.dir.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Size of the worker pool; defaults to the number of cores.
    #[arg(long, value_name = "N")]
    pub threads: Option<usize>,
    /// Override the cross-check seed.
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
}

impl RunArgs {
    pub fn load(&self) -> Result<RunConfig, CliError> {
        let text = match (&self.config, &self.preset) {
            (Some(path), None) => fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?,
            (None, Some(name)) => preset_text(name)
                .ok_or_else(|| {
                    CliError::Invalid(format!(
                        "unknown preset \"{name}\"; available: {}",
                        PRESET_NAMES.join(", ")
                    ))
                })?
                .to_string(),
            _ => {
                return Err(CliError::Invalid(
                    "pass exactly one of --config PATH or --preset NAME".into(),
                ))
            }
        };
        let mut config = RunConfig::parse(&text)?;
        if let Some(seed) = self.seed {
            config.oracle.seed = seed;
        }
        Ok(config)
    }

    fn out_dir(&self, config: &RunConfig) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from(&config.output.dir))
    }
}

pub fn run(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    let args = match &cli.command {
        Command::Decompose(a)
        | Command::Homodyne(a)
        | Command::Coincidence(a)
        | Command::Hom(a)
        | Command::OracleCheck(a) => a,
    };
    if let Some(n) = args.threads {
        if n == 0 {
            return Err(CliError::Invalid("--threads must be at least 1".into()));
        }
        // First caller wins; later invocations in the same process reuse the
        // existing pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let config = args.load()?;
    let out_dir = args.out_dir(&config);
    match &cli.command {
        Command::Decompose(_) => cmd_decompose(&config, &out_dir),
        Command::Homodyne(_) => cmd_homodyne(&config, &out_dir),
        Command::Coincidence(_) => cmd_coincidence(&config, &out_dir),
        Command::Hom(_) => cmd_hom(&config, &out_dir),
        Command::OracleCheck(_) => cmd_oracle_check(&config, &out_dir),
    }
}

/// Process-style entry: returns the exit code instead of exiting, so tests
/// can call it in-process.
pub fn main_entry<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            // clap prints its own message; --help and --version exit cleanly.
            let _ = e.print();
            return if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
        }
    };
    match run(&cli) {
        Ok(paths) => {
            for p in paths {
                println!("wrote {}", p.display());
            }
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
