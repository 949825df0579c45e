//! Whittaker-Shannon mode machinery: evaluating the sinc modes, carving a
//! time window out of a sampled squeezing matrix, reconstructing
//! continuous-time covariances from mode-space moments, and the small set of
//! weak-squeezing quantities (pair number, normalized two-photon amplitudes).

use std::f64::consts::PI;
use std::ops::RangeInclusive;

use ndarray::{Array1, Array2};
use thiserror::Error;

use crate::jsa::{BetaMatrix, SamplingGrid};
use crate::matcalc::{BetaSvd, MatcalcError, MomentSet};
use crate::C64;

#[derive(Debug, Error)]
pub enum WsdecompError {
    /// The requested window contains indices outside the sampled grid.
    #[error("window index {index} outside sampled range {min}..={max}")]
    WindowOutOfRange { index: i64, min: i64, max: i64 },
    /// A window must contain at least one index.
    #[error("window size must be positive")]
    EmptyWindow,
    /// The two-photon amplitudes vanish identically.
    #[error("two-photon amplitude matrix is zero")]
    ZeroState,
    #[error(transparent)]
    Matcalc(#[from] MatcalcError),
}

/// Whittaker-Shannon mode `χ̄_n(t) = (1/√τ) sinc(π(t−nτ)/τ)` with
/// `sinc(0) = 1`.
///
/// The argument is reduced to its nearest-integer offset before the sine is
/// taken, so grid samples come out exact: `χ̄_n(mτ) = δ_nm/√τ` whenever
/// `t/τ − n` is exactly an integer in floating point.
pub fn ws_mode(n: i64, tau: f64, t: f64) -> f64 {
    let u = t / tau - n as f64;
    let k = u.round();
    let r = u - k;
    let norm = 1.0 / tau.sqrt();
    if r == 0.0 {
        return if k == 0.0 { norm } else { 0.0 };
    }
    // sin(πu) = (−1)^k sin(πr) with r ∈ (−1/2, 1/2].
    let sign = if (k as i64) % 2 == 0 { 1.0 } else { -1.0 };
    norm * sign * (PI * r).sin() / (PI * u)
}

/// A contiguous block of Whittaker-Shannon indices around a target time.
///
/// The center index is the nearest integer to `t_center/τ` (ties round away
/// from zero) and the block holds exactly `size` indices, with the extra
/// index on the high side when `size` is even.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowSpec {
    t_center: f64,
    size: usize,
}

impl WindowSpec {
    pub fn new(t_center: f64, size: usize) -> Result<Self, WsdecompError> {
        if size == 0 {
            return Err(WsdecompError::EmptyWindow);
        }
        Ok(Self { t_center, size })
    }

    pub fn t_center(&self) -> f64 {
        self.t_center
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Center index `n_J = round(t_center/τ)`, ties away from zero.
    pub fn center_index(&self, tau: f64) -> i64 {
        (self.t_center / tau).round() as i64
    }

    /// The window's absolute index set, `n_J − ⌊(d−1)/2⌋ ..= n_J + ⌊d/2⌋`.
    pub fn index_range(&self, tau: f64) -> RangeInclusive<i64> {
        let n_j = self.center_index(tau);
        let d = self.size as i64;
        (n_j - (d - 1) / 2)..=(n_j + d / 2)
    }

    /// Positions of the window indices within a grid's storage order.
    pub fn offsets_in(&self, grid: &SamplingGrid) -> Result<Vec<usize>, WsdecompError> {
        self.index_range(grid.tau())
            .map(|n| {
                grid.offset_of(n).ok_or(WsdecompError::WindowOutOfRange {
                    index: n,
                    min: grid.n_min(),
                    max: grid.n_max(),
                })
            })
            .collect()
    }
}

/// Copy the `offsets × offsets` block out of a square matrix.
pub fn extract_block(m: &Array2<C64>, offsets: &[usize]) -> Array2<C64> {
    Array2::from_shape_fn((offsets.len(), offsets.len()), |(i, j)| {
        m[[offsets[i], offsets[j]]]
    })
}

/// Restrict a sampled squeezing matrix to a window.
///
/// Returns the `d_J × d_J` block `β^J` together with the fraction of squared
/// matrix mass sitting in the off-window coupling blocks (rows or columns
/// that touch the window without lying inside it). That fraction is the
/// diagnostic for treating the window as self-contained.
pub fn window_partition(
    beta: &BetaMatrix,
    spec: &WindowSpec,
) -> Result<(Array2<C64>, f64), WsdecompError> {
    let offsets = spec.offsets_in(&beta.grid)?;
    let block = extract_block(&beta.values, &offsets);
    let mut in_window = vec![false; beta.dim()];
    for &i in &offsets {
        in_window[i] = true;
    }
    let mut total = 0.0;
    let mut coupling = 0.0;
    for ((i, j), v) in beta.values.indexed_iter() {
        let w = v.norm_sqr();
        total += w;
        if in_window[i] != in_window[j] {
            coupling += w;
        }
    }
    let neglected = if total > 0.0 { coupling / total } else { 0.0 };
    Ok((block, neglected))
}

/// Continuous-time covariances at a single pair of times, reconstructed from
/// mode-space moments via `N(t,t') = Σ_nm χ̄_n(t) N_nm χ̄_m(t')` and the same
/// pattern for the anomalous moments.
#[derive(Debug, Clone, Copy)]
pub enum CovariancePoint {
    Nondegenerate { n_a: C64, n_b: C64, m_ab: C64 },
    Degenerate { n: C64, m: C64 },
}

/// Evaluate the continuous-time covariances of a squeezed state at `(t, t2)`
/// from moment matrices sampled on `grid`.
///
/// Panics if the moment matrices do not match the grid size.
pub fn covariance(
    moments: &MomentSet,
    grid: &SamplingGrid,
    t: f64,
    t2: f64,
) -> CovariancePoint {
    assert_eq!(
        moments.dim(),
        grid.len(),
        "moment matrices must be sampled on the supplied grid"
    );
    let tau = grid.tau();
    let chi = |time: f64| {
        Array1::from_iter(grid.indices().map(|n| C64::new(ws_mode(n, tau, time), 0.0)))
    };
    let chi1 = chi(t);
    let chi2 = chi(t2);
    let form = |m: &Array2<C64>| chi1.dot(&m.dot(&chi2));
    match moments {
        MomentSet::Nondegenerate { n_a, n_b, m_ab } => CovariancePoint::Nondegenerate {
            n_a: form(n_a),
            n_b: form(n_b),
            m_ab: form(m_ab),
        },
        MomentSet::Degenerate { n, m } => CovariancePoint::Degenerate {
            n: form(n),
            m: form(m),
        },
    }
}

/// Mean pair number of a windowed squeezing matrix, `N_J = tr sinh²Q^J`.
pub fn pair_count(beta_j: &Array2<C64>) -> Result<f64, WsdecompError> {
    let svd = BetaSvd::new(beta_j)?;
    Ok(svd.sum_over_singulars(|s| s.sinh() * s.sinh()))
}

/// The normalized two-photon component of the windowed squeezed state.
#[derive(Debug, Clone)]
pub struct TwoPhotonKet {
    /// Unit-norm amplitude matrix `T^J/√norm`.
    pub amps: Array2<C64>,
    /// `Σ|T^J_nm|² = tr tanh²Q^J`, the squared norm of the raw amplitudes.
    pub norm: f64,
    /// Vacuum prefactor `det W`, which approaches `1 − N_J/2` for weak
    /// squeezing.
    pub prefactor: f64,
}

/// Normalize the two-photon amplitudes `T^J = (tanh Q^J) U^J` to unit norm.
///
/// The exact normalization `tr tanh²Q^J` is used rather than the pair number
/// `N_J = tr sinh²Q^J`; the two agree to leading order in the squeezing
/// strength and the exact choice keeps the ket normalized at any strength.
pub fn two_photon_amplitudes(beta_j: &Array2<C64>) -> Result<TwoPhotonKet, WsdecompError> {
    let svd = BetaSvd::new(beta_j)?;
    let t = svd.fn_of_q_times_unitary(f64::tanh);
    let norm = svd.sum_over_singulars(|s| {
        let th = s.tanh();
        th * th
    });
    if norm < 1e-300 {
        return Err(WsdecompError::ZeroState);
    }
    let scale = C64::new(1.0 / norm.sqrt(), 0.0);
    Ok(TwoPhotonKet {
        amps: t.mapv(|v| v * scale),
        norm,
        prefactor: svd.det_sech(),
    })
}
