//! Joint two-photon amplitudes and their sampled squeezing matrices.
//!
//! A parametric source pumped below threshold is described by a joint
//! amplitude kernel. Sampling that kernel on the Whittaker-Shannon grid of a
//! chosen bandlimit produces the complex matrix that drives every other
//! module in this crate.
//!
//! The sampling convention: for a bandlimit `Ω` the grid step is
//! `τ = 2π/Ω`, the normalized shape matrix is `r_nm = γ(nτ, mτ) / max|γ|`
//! over the sampled window, and the working squeezing matrix is
//! `β_nm = β̊ · r_nm` with `β̊` the peak squeezing strength per sample.

use ndarray::{Array2, ArrayView2};
use thiserror::Error;

use crate::wsdecomp::ws_mode;
use crate::C64;

/// Errors from model construction and kernel sampling.
#[derive(Debug, Error)]
pub enum JsaError {
    /// Model parameters outside their documented ranges.
    #[error("invalid model parameter: {0}")]
    InvalidModel(String),
    /// A tabulated kernel that should be symmetric is not.
    #[error("tabulated kernel asymmetric: relative asymmetry {0:.3e}")]
    AsymmetricTable(f64),
    /// Every kernel sample in the window is indistinguishable from zero, so
    /// the normalized shape matrix is undefined.
    #[error("all kernel samples in the window are zero; cannot normalize")]
    AllZeroWindow,
    /// Grid construction with a non-positive step or an empty index range.
    #[error("invalid sampling grid: {0}")]
    BadGrid(String),
    /// Operation that needs a finite-duration model was given a stationary
    /// one (or vice versa).
    #[error("operation not defined for this amplitude kind: {0}")]
    UnsupportedKind(String),
}

/// Choice of bandlimit for the sinc-mode grid, in units of the coherence
/// time `T_c`.
///
/// `TwoPiOverTc` is the conservative default (`τ = T_c`). `TwoSqrtPiOverTc`
/// is the tighter limit matched to the Gaussian spectral width
/// (`τ = √π · T_c`); sweeps that use it are expected to oversample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BandlimitPreset {
    #[default]
    TwoPiOverTc,
    TwoSqrtPiOverTc,
}

impl BandlimitPreset {
    /// Angular bandlimit `Ω` for coherence time `t_c`.
    pub fn omega(self, t_c: f64) -> f64 {
        match self {
            Self::TwoPiOverTc => 2.0 * std::f64::consts::PI / t_c,
            Self::TwoSqrtPiOverTc => 2.0 * std::f64::consts::PI.sqrt() / t_c,
        }
    }

    /// Grid step `τ = 2π/Ω` for coherence time `t_c`.
    pub fn tau(self, t_c: f64) -> f64 {
        2.0 * std::f64::consts::PI / self.omega(t_c)
    }
}

/// Which analytic family a [`JointAmplitude`] belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AmplitudeKind {
    DoubleGaussianPulsed,
    DoubleGaussianCw,
    TabulatedSymmetric,
}

impl AmplitudeKind {
    /// Stationary kernels have unbounded support and a unit-peak convention.
    pub fn is_cw(self) -> bool {
        matches!(self, Self::DoubleGaussianCw)
    }
}

/// A joint two-photon amplitude kernel `γ(t₁, t₂)`.
#[derive(Debug, Clone)]
pub enum JointAmplitude {
    /// `γ = (T_p T_c)^{-1/2} exp(-π(t₁-t₂)²/4T_c²) exp(-π(t₁+t₂)²/4T_p²)`,
    /// normalized to unit squared integral.
    DoubleGaussianPulsed { pulse_duration: f64, coherence_time: f64 },
    /// Long-pump limit of the double Gaussian. The divergent overall
    /// normalization is dropped: the kernel is evaluated with unit peak,
    /// `γ = exp(-π(t₁-t₂)²/4T_c²)`.
    DoubleGaussianCw { coherence_time: f64 },
    /// A symmetric kernel given by its samples `values[n][m] = γ(nτ, mτ)`
    /// starting at index `first_index`. Off-grid evaluation uses the exact
    /// sinc interpolation of the bandlimited kernel.
    TabulatedSymmetric {
        tau: f64,
        first_index: i64,
        values: Array2<C64>,
    },
}

impl JointAmplitude {
    /// Pulsed double Gaussian; requires `T_p ≥ T_c > 0`.
    pub fn double_gaussian_pulsed(
        pulse_duration: f64,
        coherence_time: f64,
    ) -> Result<Self, JsaError> {
        if !(coherence_time > 0.0) || !coherence_time.is_finite() {
            return Err(JsaError::InvalidModel(format!(
                "coherence time must be positive and finite, got {coherence_time}"
            )));
        }
        if !(pulse_duration >= coherence_time) || !pulse_duration.is_finite() {
            return Err(JsaError::InvalidModel(format!(
                "pulse duration must satisfy T_p >= T_c, got T_p = {pulse_duration}, T_c = {coherence_time}"
            )));
        }
        Ok(Self::DoubleGaussianPulsed { pulse_duration, coherence_time })
    }

    /// Stationary (continuous-wave) Gaussian kernel; requires `T_c > 0`.
    pub fn double_gaussian_cw(coherence_time: f64) -> Result<Self, JsaError> {
        if !(coherence_time > 0.0) || !coherence_time.is_finite() {
            return Err(JsaError::InvalidModel(format!(
                "coherence time must be positive and finite, got {coherence_time}"
            )));
        }
        Ok(Self::DoubleGaussianCw { coherence_time })
    }

    /// Tabulated symmetric kernel. The table must be square and symmetric to
    /// a relative Frobenius tolerance of 1e-10.
    pub fn tabulated_symmetric(
        tau: f64,
        first_index: i64,
        values: Array2<C64>,
    ) -> Result<Self, JsaError> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(JsaError::BadGrid(format!("tau must be positive, got {tau}")));
        }
        let (rows, cols) = values.dim();
        if rows != cols || rows == 0 {
            return Err(JsaError::InvalidModel(format!(
                "tabulated kernel must be square and nonempty, got {rows}x{cols}"
            )));
        }
        let norm: f64 = values.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let asym: f64 = (&values - &values.t())
            .iter()
            .map(|v| v.norm_sqr())
            .sum::<f64>()
            .sqrt();
        if asym > 1e-10 * norm.max(1e-300) {
            return Err(JsaError::AsymmetricTable(asym / norm.max(1e-300)));
        }
        Ok(Self::TabulatedSymmetric { tau, first_index, values })
    }

    pub fn kind(&self) -> AmplitudeKind {
        match self {
            Self::DoubleGaussianPulsed { .. } => AmplitudeKind::DoubleGaussianPulsed,
            Self::DoubleGaussianCw { .. } => AmplitudeKind::DoubleGaussianCw,
            Self::TabulatedSymmetric { .. } => AmplitudeKind::TabulatedSymmetric,
        }
    }

    /// Coherence time for the analytic kernels, if defined.
    pub fn coherence_time(&self) -> Option<f64> {
        match self {
            Self::DoubleGaussianPulsed { coherence_time, .. }
            | Self::DoubleGaussianCw { coherence_time } => Some(*coherence_time),
            Self::TabulatedSymmetric { .. } => None,
        }
    }

    /// Pulse duration for the pulsed kernel, if defined.
    pub fn pulse_duration(&self) -> Option<f64> {
        match self {
            Self::DoubleGaussianPulsed { pulse_duration, .. } => Some(*pulse_duration),
            _ => None,
        }
    }

    /// Evaluate the temporal kernel `γ(t₁, t₂)`.
    pub fn evaluate(&self, t1: f64, t2: f64) -> C64 {
        match self {
            Self::DoubleGaussianPulsed { pulse_duration: tp, coherence_time: tc } => {
                let pi = std::f64::consts::PI;
                let amp = (1.0 / (tp * tc)).sqrt();
                let diff = t1 - t2;
                let sum = t1 + t2;
                let arg = -pi * diff * diff / (4.0 * tc * tc) - pi * sum * sum / (4.0 * tp * tp);
                C64::new(amp * arg.exp(), 0.0)
            }
            Self::DoubleGaussianCw { coherence_time: tc } => {
                let pi = std::f64::consts::PI;
                let diff = t1 - t2;
                C64::new((-pi * diff * diff / (4.0 * tc * tc)).exp(), 0.0)
            }
            Self::TabulatedSymmetric { tau, first_index, values } => {
                // Exact reconstruction of a bandlimited kernel from its
                // samples: γ(t₁,t₂) = τ Σ values_nm χ̄_n(t₁) χ̄_m(t₂).
                let d = values.nrows();
                let mut chi1 = vec![0.0; d];
                let mut chi2 = vec![0.0; d];
                for i in 0..d {
                    let n = first_index + i as i64;
                    chi1[i] = ws_mode(n, *tau, t1);
                    chi2[i] = ws_mode(n, *tau, t2);
                }
                let mut acc = C64::new(0.0, 0.0);
                for i in 0..d {
                    for j in 0..d {
                        acc += values[[i, j]] * chi1[i] * chi2[j];
                    }
                }
                acc * *tau
            }
        }
    }

    /// Evaluate the spectral kernel `γ(ω₁, ω₂)` where it has a closed form.
    ///
    /// Defined only for the pulsed double Gaussian; the stationary limit is a
    /// distribution in `ω₁ + ω₂` and tabulated kernels carry no spectral
    /// closed form.
    pub fn evaluate_spectral(&self, w1: f64, w2: f64) -> Option<C64> {
        match self {
            Self::DoubleGaussianPulsed { pulse_duration: tp, coherence_time: tc } => {
                let pi = std::f64::consts::PI;
                let amp = (tp * tc / (pi * pi)).sqrt();
                let diff = w1 - w2;
                let sum = w1 + w2;
                let arg = -tc * tc * diff * diff / (4.0 * pi) - tp * tp * sum * sum / (4.0 * pi);
                Some(C64::new(amp * arg.exp(), 0.0))
            }
            _ => None,
        }
    }
}

/// An evenly spaced Whittaker-Shannon sampling grid: step `τ`, bandlimit
/// `Ω = 2π/τ`, and an inclusive index range `n_min..=n_max` (sample `n` sits
/// at time `nτ`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingGrid {
    tau: f64,
    oversample: u32,
    n_min: i64,
    n_max: i64,
}

impl SamplingGrid {
    pub fn new(tau: f64, n_min: i64, n_max: i64) -> Result<Self, JsaError> {
        if !(tau > 0.0) || !tau.is_finite() {
            return Err(JsaError::BadGrid(format!("tau must be positive, got {tau}")));
        }
        if n_min > n_max {
            return Err(JsaError::BadGrid(format!(
                "empty index range {n_min}..={n_max}"
            )));
        }
        Ok(Self { tau, oversample: 1, n_min, n_max })
    }

    /// Grid symmetric about t = 0 with indices `-half..=half`.
    pub fn centered(tau: f64, half: i64) -> Result<Self, JsaError> {
        if half < 0 {
            return Err(JsaError::BadGrid(format!("negative half-width {half}")));
        }
        Self::new(tau, -half, half)
    }

    /// Minimal-bandlimit grid for a pulsed model, wide enough to hold the
    /// pulse: indices out to `|nτ| ≤ pad · T_p` (pad defaults to 4 in the
    /// runners). Stationary and tabulated kernels need an explicit range.
    pub fn for_pulsed(
        model: &JointAmplitude,
        preset: BandlimitPreset,
        pad: f64,
    ) -> Result<Self, JsaError> {
        let (tp, tc) = match model {
            JointAmplitude::DoubleGaussianPulsed { pulse_duration, coherence_time } => {
                (*pulse_duration, *coherence_time)
            }
            _ => {
                return Err(JsaError::UnsupportedKind(
                    "automatic grid sizing needs a pulsed model".into(),
                ))
            }
        };
        if !(pad > 0.0) {
            return Err(JsaError::BadGrid(format!("pad must be positive, got {pad}")));
        }
        let tau = preset.tau(tc);
        let half = (pad * tp / tau).ceil() as i64;
        Self::centered(tau, half)
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// Angular bandlimit `Ω = 2π/τ`.
    pub fn omega(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.tau
    }

    /// Oversampling factor relative to the grid this one was refined from.
    pub fn oversample(&self) -> u32 {
        self.oversample
    }

    pub fn n_min(&self) -> i64 {
        self.n_min
    }

    pub fn n_max(&self) -> i64 {
        self.n_max
    }

    pub fn len(&self) -> usize {
        (self.n_max - self.n_min + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn indices(&self) -> impl Iterator<Item = i64> {
        self.n_min..=self.n_max
    }

    pub fn contains(&self, n: i64) -> bool {
        n >= self.n_min && n <= self.n_max
    }

    /// Sample time of index `n`.
    pub fn time_of(&self, n: i64) -> f64 {
        n as f64 * self.tau
    }

    /// Row/column offset of index `n` in matrices sampled on this grid.
    pub fn offset_of(&self, n: i64) -> Option<usize> {
        self.contains(n).then(|| (n - self.n_min) as usize)
    }

    /// Index stored at matrix offset `i`.
    pub fn index_at(&self, i: usize) -> i64 {
        self.n_min + i as i64
    }
}

/// Refine a grid by an integer factor `k`, covering the same time span with
/// step `τ′ = τ/k` and bandlimit `kΩ`.
///
/// Returns the refined grid together with the factor by which a peak
/// squeezing strength `β̊` quoted on the coarse grid must be multiplied to
/// describe the same physical source on the fine grid. Since
/// `β̊ = β τ γ_max`, the factor is `(τ′/τ) · (γ′_max/γ_max)` with the peaks
/// taken over the respective sample sets; for kernels whose peak lies on
/// both grids it is exactly `1/k`.
pub fn oversample(
    model: &JointAmplitude,
    grid: &SamplingGrid,
    k: u32,
) -> Result<(SamplingGrid, f64), JsaError> {
    if k == 0 {
        return Err(JsaError::BadGrid("oversampling factor must be >= 1".into()));
    }
    let fine = SamplingGrid {
        tau: grid.tau / k as f64,
        oversample: grid.oversample * k,
        n_min: grid.n_min * k as i64,
        n_max: grid.n_max * k as i64,
    };
    if k == 1 {
        return Ok((fine, 1.0));
    }
    let coarse_peak = peak_sample(model, grid)?;
    let fine_peak = peak_sample(model, &fine)?;
    Ok((fine, (1.0 / k as f64) * (fine_peak / coarse_peak)))
}

fn peak_sample(model: &JointAmplitude, grid: &SamplingGrid) -> Result<f64, JsaError> {
    let mut max = 0.0_f64;
    for n in grid.indices() {
        let t1 = grid.time_of(n);
        for m in grid.indices() {
            max = max.max(model.evaluate(t1, grid.time_of(m)).norm());
        }
    }
    if max <= 1e-150 {
        return Err(JsaError::AllZeroWindow);
    }
    Ok(max)
}

/// Sample the kernel on the grid and normalize by the largest modulus in the
/// window, so `max |r_nm| = 1`.
pub fn sample_r_matrix(
    model: &JointAmplitude,
    grid: &SamplingGrid,
) -> Result<Array2<C64>, JsaError> {
    let d = grid.len();
    let mut r = Array2::zeros((d, d));
    let mut max = 0.0_f64;
    for (i, n) in grid.indices().enumerate() {
        let t1 = grid.time_of(n);
        for (j, m) in grid.indices().enumerate() {
            let v = model.evaluate(t1, grid.time_of(m));
            max = max.max(v.norm());
            r[[i, j]] = v;
        }
    }
    if max <= 1e-150 {
        return Err(JsaError::AllZeroWindow);
    }
    r.mapv_inplace(|v| v / max);
    Ok(r)
}

/// A sampled squeezing matrix `β_nm = β̊ r_nm` with its grid bookkeeping.
#[derive(Debug, Clone)]
pub struct BetaMatrix {
    pub values: Array2<C64>,
    pub beta_circ: C64,
    pub grid: SamplingGrid,
    pub kind: AmplitudeKind,
}

impl BetaMatrix {
    /// Scale a normalized shape matrix by the peak strength `β̊`.
    ///
    /// The shape matrix must be square, match the grid, and satisfy
    /// `max |r_nm| ≤ 1` (up to roundoff).
    pub fn from_shape(
        r: ArrayView2<C64>,
        beta_circ: C64,
        grid: SamplingGrid,
        kind: AmplitudeKind,
    ) -> Result<Self, JsaError> {
        let (rows, cols) = r.dim();
        if rows != cols || rows != grid.len() {
            return Err(JsaError::BadGrid(format!(
                "shape matrix is {rows}x{cols} but the grid has {} samples",
                grid.len()
            )));
        }
        let max = r.iter().map(|v| v.norm()).fold(0.0_f64, f64::max);
        if max > 1.0 + 1e-12 {
            return Err(JsaError::InvalidModel(format!(
                "shape matrix exceeds unit modulus: max |r| = {max}"
            )));
        }
        Ok(Self { values: r.mapv(|v| v * beta_circ), beta_circ, grid, kind })
    }

    /// Sample a model on a grid and scale in one step.
    pub fn sample(
        model: &JointAmplitude,
        grid: SamplingGrid,
        beta_circ: C64,
    ) -> Result<Self, JsaError> {
        let r = sample_r_matrix(model, &grid)?;
        Self::from_shape(r.view(), beta_circ, grid, model.kind())
    }

    pub fn dim(&self) -> usize {
        self.values.nrows()
    }
}
