//! Quadrature variances of degenerate squeezed light: the spectral variance
//! measured by a continuous-wave homodyne setup, and the total-charge
//! variance together with the local-oscillator waveform that extremizes it.

use ndarray::{Array1, Array2, ArrayView1};
use ndarray_linalg::{Eigh, UPLO};
use thiserror::Error;

use crate::jsa::SamplingGrid;
use crate::matcalc::{BetaSvd, MatcalcError, MomentSet};
use crate::wsdecomp::ws_mode;
use crate::C64;

#[derive(Debug, Error)]
pub enum HomodyneError {
    /// Degenerate-regime squeezing matrices must be symmetric.
    #[error("squeezing matrix not symmetric: relative asymmetry {0:.3e}")]
    AsymmetricBeta(f64),
    /// The spectral formula loses meaning outside the sampling band.
    #[error("frequency {omega:.6} outside the accurate band |ω| < {limit:.6}")]
    OmegaOutOfBand { omega: f64, limit: f64 },
    /// Charge-variance analysis needs single-family moments.
    #[error("expected degenerate-regime moments")]
    NotDegenerate,
    /// Decibel conversion of a non-positive variance.
    #[error("variance must be positive, got {0}")]
    NonPositive(f64),
    #[error("local-oscillator coefficient count {got} does not match {expect} modes")]
    LoSizeMismatch { got: usize, expect: usize },
    #[error(transparent)]
    Matcalc(#[from] MatcalcError),
}

fn rel_transpose_asymmetry(m: &Array2<C64>) -> f64 {
    let num: f64 = (m - &m.t()).iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    let den: f64 = m.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    num / den.max(1e-300)
}

/// Vacuum-normalized variance of the spectral quadrature at local-oscillator
/// phase `theta` and sideband frequency `omega`, for a continuous-wave
/// window `betaJ` sampled on `grid`.
///
/// Evaluates `1 + (1/d_J)·tr[E N + Eᵀ N + 2 Re{e^{2iθ} Eᵀ M}]` with
/// `E_nm = e^{i(n−m)ωτ}`, `N = sinh²Q` and `M = (sinh Q)(cosh Q)U`. Since
/// `E` is a rank-one phase outer product, the traces reduce to quadratic
/// forms with the phase vector.
pub fn cw_variance_spectrum(
    beta_j: &Array2<C64>,
    theta: f64,
    omega: f64,
    grid: &SamplingGrid,
) -> Result<f64, HomodyneError> {
    let asym = rel_transpose_asymmetry(beta_j);
    if asym > 1e-10 {
        return Err(HomodyneError::AsymmetricBeta(asym));
    }
    let limit = grid.omega() / 2.0;
    if omega.abs() >= limit {
        return Err(HomodyneError::OmegaOutOfBand { omega, limit });
    }
    let svd = BetaSvd::new(beta_j)?;
    let n = svd.fn_of_q(|s| s.sinh() * s.sinh());
    let m = svd.fn_of_q_times_unitary(|s| s.sinh() * s.cosh());
    let d = beta_j.nrows();
    let u = Array1::from_shape_fn(d, |k| C64::from_polar(1.0, k as f64 * omega * grid.tau()));
    let ubar = u.mapv(|v| v.conj());
    // tr(E X) = u† X u and tr(Eᵀ X) = ū† X ū.
    let quad = |v: &Array1<C64>, x: &Array2<C64>| -> C64 {
        let xv = x.dot(v);
        v.iter().zip(xv.iter()).map(|(a, b)| a.conj() * b).sum()
    };
    let tr_en = quad(&u, &n).re;
    let tr_etn = quad(&ubar, &n).re;
    let tr_etm = quad(&ubar, &m);
    let phase = C64::from_polar(1.0, 2.0 * theta);
    Ok(1.0 + (tr_en + tr_etn + 2.0 * (phase * tr_etm).re) / d as f64)
}

/// Extreme total-charge variances over all unit local-oscillator waveforms,
/// with their eigenvectors.
///
/// The quadratic form `σ²(ξ) = 1 + 2ΦᵀKΦ` over real stacked vectors
/// `Φ = (Re ξ, Im ξ)` uses the symmetric block matrix
/// `K = [[N_R+M_R, N_I+M_I], [M_I−N_I, N_R−M_R]]`, so the extrema are its
/// edge eigenpairs.
#[derive(Debug, Clone)]
pub struct ChargeVarianceResult {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub sigma2_min: f64,
    pub sigma2_max: f64,
    /// Stacked `(Re ξ, Im ξ)` coefficients of the minimizing waveform.
    pub phi_min: Array1<f64>,
    /// Stacked coefficients of the maximizing waveform.
    pub phi_max: Array1<f64>,
    /// Set when the edge eigenvalues are (numerically) repeated, in which
    /// case the reported eigenvectors are an arbitrary basis choice.
    pub spectrum_degenerate: bool,
}

fn charge_matrix(moments: &MomentSet) -> Result<Array2<f64>, HomodyneError> {
    let MomentSet::Degenerate { n, m } = moments else {
        return Err(HomodyneError::NotDegenerate);
    };
    let d = n.nrows();
    let mut k = Array2::<f64>::zeros((2 * d, 2 * d));
    for i in 0..d {
        for j in 0..d {
            let (nr, ni) = (n[[i, j]].re, n[[i, j]].im);
            let (mr, mi) = (m[[i, j]].re, m[[i, j]].im);
            k[[i, j]] = nr + mr;
            k[[i, d + j]] = ni + mi;
            k[[d + i, j]] = mi - ni;
            k[[d + i, d + j]] = nr - mr;
        }
    }
    Ok(k)
}

pub fn charge_variance_extrema(
    moments: &MomentSet,
) -> Result<ChargeVarianceResult, HomodyneError> {
    let k = charge_matrix(moments)?;
    let (vals, vecs) = k
        .eigh(UPLO::Lower)
        .map_err(|e| HomodyneError::Matcalc(MatcalcError::Backend(e.to_string())))?;
    let last = vals.len() - 1;
    let lambda_min = vals[0];
    let lambda_max = vals[last];
    let near = 1e-12 * (1.0 + lambda_min.abs().max(lambda_max.abs()));
    let spectrum_degenerate = vals.len() > 1
        && ((vals[1] - lambda_min).abs() < near || (lambda_max - vals[last - 1]).abs() < near);
    Ok(ChargeVarianceResult {
        lambda_min,
        lambda_max,
        sigma2_min: 1.0 + 2.0 * lambda_min,
        sigma2_max: 1.0 + 2.0 * lambda_max,
        phi_min: vecs.column(0).to_owned(),
        phi_max: vecs.column(last).to_owned(),
        spectrum_degenerate,
    })
}

/// Variance of the total charge for an explicit local-oscillator coefficient
/// vector (one complex weight per mode), normalized internally.
pub fn charge_variance_for_lo(
    moments: &MomentSet,
    lo_coeffs: ArrayView1<C64>,
) -> Result<f64, HomodyneError> {
    let k = charge_matrix(moments)?;
    let d = k.nrows() / 2;
    if lo_coeffs.len() != d {
        return Err(HomodyneError::LoSizeMismatch { got: lo_coeffs.len(), expect: d });
    }
    let norm: f64 = lo_coeffs.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    if norm < 1e-300 {
        return Err(HomodyneError::LoSizeMismatch { got: 0, expect: d });
    }
    let mut phi = Array1::<f64>::zeros(2 * d);
    for (j, v) in lo_coeffs.iter().enumerate() {
        phi[j] = v.re / norm;
        phi[d + j] = v.im / norm;
    }
    Ok(1.0 + 2.0 * phi.dot(&k.dot(&phi)))
}

/// The continuous-time waveform of a stacked eigenvector: with
/// `ξ_j = φ_j + i·φ_{d+j}`, returns `ξ(t) = Σ_j ξ_j χ̄_{n_j}(t)` over the
/// grid's mode indices.
pub fn lo_waveform(phi: ArrayView1<f64>, grid: &SamplingGrid, t: f64) -> C64 {
    let d = grid.len();
    assert_eq!(phi.len(), 2 * d, "stacked coefficient vector must be twice the mode count");
    let tau = grid.tau();
    let mut acc = C64::new(0.0, 0.0);
    for (j, n) in grid.indices().enumerate() {
        let chi = ws_mode(n, tau, t);
        acc += C64::new(phi[j], phi[d + j]) * chi;
    }
    acc
}

/// The minimizing local-oscillator waveform at time `t`.
pub fn optimal_lo_waveform(result: &ChargeVarianceResult, grid: &SamplingGrid, t: f64) -> C64 {
    lo_waveform(result.phi_min.view(), grid, t)
}

/// `10·log₁₀ σ²`.
pub fn variance_db(sigma2: f64) -> Result<f64, HomodyneError> {
    if sigma2 <= 0.0 {
        return Err(HomodyneError::NonPositive(sigma2));
    }
    Ok(10.0 * sigma2.log10())
}
