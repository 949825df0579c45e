//! Brute-force simulator on a truncated multimode Fock space.
//!
//! States are dense amplitude vectors over all occupation tuples with at
//! most `cutoff` photons per mode. The squeeze operator is applied to the
//! vacuum by exponentiating its generator action (scaled Taylor series, no
//! matrix ever materialized), and every observable is read off by direct
//! operator application. Nothing here reuses the analytic machinery in the
//! rest of the crate; agreement between the two is the strongest check the
//! test suite has.

use std::collections::HashMap;

use ndarray::{Array1, Array2};
use thiserror::Error;

use crate::coincidence::PairDistribution;
use crate::matcalc::MomentSet;
use crate::C64;

/// Hard cap on basis size (amplitude count), about 320 MB of state.
const MAX_STATES: usize = 20_000_000;

/// Default acceptable truncation loss.
pub const DEFAULT_LEAK_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum FockError {
    #[error("truncated basis would need {states} amplitudes (limit {limit}); lower cutoff or modes")]
    TooLarge { states: usize, limit: usize },
    #[error("probability mass {leakage:.3e} reached the occupation cutoff (tolerance {tol:.3e}); raise the cutoff")]
    LeakageExceeded { leakage: f64, tol: f64 },
    #[error("generator exponential failed to converge; squeezing too strong for this basis")]
    NoConvergence,
    #[error("{0}")]
    BadInput(String),
}

/// Mixed-radix bookkeeping for occupation tuples. Mode 0 varies fastest.
#[derive(Debug, Clone)]
struct Basis {
    modes: usize,
    radix: usize,
    strides: Vec<usize>,
    dim: usize,
}

impl Basis {
    fn new(modes: usize, cutoff: usize) -> Result<Self, FockError> {
        let radix = cutoff + 1;
        let mut strides = Vec::with_capacity(modes);
        let mut dim: usize = 1;
        for _ in 0..modes {
            strides.push(dim);
            dim = dim
                .checked_mul(radix)
                .filter(|&d| d <= MAX_STATES)
                .ok_or(FockError::TooLarge { states: usize::MAX, limit: MAX_STATES })?;
        }
        if dim > MAX_STATES {
            return Err(FockError::TooLarge { states: dim, limit: MAX_STATES });
        }
        Ok(Self { modes, radix, strides, dim })
    }

    #[inline]
    fn occupation(&self, idx: usize, mode: usize) -> usize {
        (idx / self.strides[mode]) % self.radix
    }

    fn occupations(&self, idx: usize, out: &mut [usize]) {
        let mut rest = idx;
        for o in out.iter_mut().take(self.modes) {
            *o = rest % self.radix;
            rest /= self.radix;
        }
        debug_assert_eq!(rest, 0);
    }
}

/// A squeezed state expanded over the truncated number basis.
///
/// For a nondegenerate state the first `n_signal` modes are the signal
/// family and the next `n_idler` the idler family; a degenerate state has
/// `n_idler = 0` and a single family. `leakage` is the probability mass
/// that reached the occupation cutoff during construction and was removed,
/// so `Σ|amplitudes|² + leakage = 1`.
#[derive(Debug, Clone)]
pub struct FockState {
    n_signal: usize,
    n_idler: usize,
    cutoff: usize,
    amplitudes: Array1<C64>,
    leakage: f64,
    basis: Basis,
}

impl FockState {
    pub fn n_signal(&self) -> usize {
        self.n_signal
    }

    pub fn n_idler(&self) -> usize {
        self.n_idler
    }

    pub fn is_degenerate(&self) -> bool {
        self.n_idler == 0
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn leakage(&self) -> f64 {
        self.leakage
    }

    pub fn amplitudes(&self) -> &Array1<C64> {
        &self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn vacuum_amplitude(&self) -> C64 {
        self.amplitudes[0]
    }

    /// Occupation of `mode` in basis state `idx`.
    pub fn occupation(&self, idx: usize, mode: usize) -> usize {
        self.basis.occupation(idx, mode)
    }
}

fn check_beta(beta: &Array2<C64>) -> Result<usize, FockError> {
    let (rows, cols) = beta.dim();
    if rows != cols || rows == 0 {
        return Err(FockError::BadInput(format!("need a square nonempty matrix, got {rows}x{cols}")));
    }
    if beta.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(FockError::BadInput("matrix contains non-finite entries".into()));
    }
    Ok(rows)
}

fn sqrt_table(radix: usize) -> Vec<f64> {
    (0..=radix + 1).map(|k| (k as f64).sqrt()).collect()
}

/// y += (Σ β_nm A†_n B†_m − h.c.) x for signal modes 0..d and idler modes
/// d..2d.
fn apply_pair_generator(
    beta: &Array2<C64>,
    basis: &Basis,
    sq: &[f64],
    x: &Array1<C64>,
    y: &mut Array1<C64>,
) {
    let d = beta.nrows();
    let cutoff = basis.radix - 1;
    let mut occ = vec![0usize; basis.modes];
    for idx in 0..basis.dim {
        let xv = x[idx];
        if xv.norm_sqr() == 0.0 {
            continue;
        }
        basis.occupations(idx, &mut occ);
        for n in 0..d {
            let jn = occ[n];
            let sn = basis.strides[n];
            for m in 0..d {
                let km = occ[d + m];
                let sm = basis.strides[d + m];
                let b = beta[[n, m]];
                if jn < cutoff && km < cutoff {
                    y[idx + sn + sm] += b * sq[jn + 1] * sq[km + 1] * xv;
                }
                if jn > 0 && km > 0 {
                    y[idx - sn - sm] -= b.conj() * sq[jn] * sq[km] * xv;
                }
            }
        }
    }
}

/// y += (½ Σ β_nm A†_n A†_m − h.c.) x on a single mode family.
fn apply_degenerate_generator(
    beta: &Array2<C64>,
    basis: &Basis,
    sq: &[f64],
    x: &Array1<C64>,
    y: &mut Array1<C64>,
) {
    let d = beta.nrows();
    let cutoff = basis.radix - 1;
    let mut occ = vec![0usize; basis.modes];
    for idx in 0..basis.dim {
        let xv = x[idx];
        if xv.norm_sqr() == 0.0 {
            continue;
        }
        basis.occupations(idx, &mut occ);
        for n in 0..d {
            let jn = occ[n];
            let sn = basis.strides[n];
            for m in 0..d {
                let half_b = 0.5 * beta[[n, m]];
                if n == m {
                    if jn + 2 <= cutoff {
                        y[idx + 2 * sn] += half_b * sq[jn + 1] * sq[jn + 2] * xv;
                    }
                    if jn >= 2 {
                        y[idx - 2 * sn] -= half_b.conj() * sq[jn] * sq[jn - 1] * xv;
                    }
                } else {
                    let jm = occ[m];
                    let sm = basis.strides[m];
                    if jn < cutoff && jm < cutoff {
                        y[idx + sn + sm] += half_b * sq[jn + 1] * sq[jm + 1] * xv;
                    }
                    if jn > 0 && jm > 0 {
                        y[idx - sn - sm] -= half_b.conj() * sq[jn] * sq[jm] * xv;
                    }
                }
            }
        }
    }
}

/// Apply `exp(G)` to `v` by splitting into substeps small enough for a
/// plain Taylor series. The generator is anti-Hermitian so the result keeps
/// unit norm; if the series stalls the step count doubles, up to a limit.
fn expm_apply(
    mut apply: impl FnMut(&Array1<C64>, &mut Array1<C64>),
    v: &Array1<C64>,
    initial_steps: usize,
) -> Result<Array1<C64>, FockError> {
    let mut steps = initial_steps.max(1);
    'restart: for _ in 0..8 {
        let inv = 1.0 / steps as f64;
        let mut w = v.clone();
        for _ in 0..steps {
            let mut acc = w.clone();
            let mut term = w.clone();
            let mut converged = false;
            for k in 1..=90 {
                let mut next = Array1::<C64>::zeros(term.len());
                apply(&term, &mut next);
                next.mapv_inplace(|val| val * (inv / k as f64));
                term = next;
                acc += &term;
                let term_norm: f64 = term.iter().map(|c| c.norm_sqr()).sum();
                let acc_norm: f64 = acc.iter().map(|c| c.norm_sqr()).sum();
                if term_norm <= 1e-34 * acc_norm {
                    converged = true;
                    break;
                }
            }
            if !converged {
                steps *= 2;
                continue 'restart;
            }
            w = acc;
        }
        return Ok(w);
    }
    Err(FockError::NoConvergence)
}

fn finish_state(
    mut amplitudes: Array1<C64>,
    basis: Basis,
    n_signal: usize,
    n_idler: usize,
    cutoff: usize,
    leak_tol: f64,
) -> Result<FockState, FockError> {
    // Mass that reached the occupation boundary is counted as truncation
    // loss and removed, so downstream raising operators stay inside the
    // basis.
    let mut leakage = 0.0;
    let mut occ = vec![0usize; basis.modes];
    for idx in 0..basis.dim {
        basis.occupations(idx, &mut occ);
        if occ.iter().any(|&o| o == cutoff) {
            leakage += amplitudes[idx].norm_sqr();
            amplitudes[idx] = C64::new(0.0, 0.0);
        }
    }
    if leakage > leak_tol {
        return Err(FockError::LeakageExceeded { leakage, tol: leak_tol });
    }
    Ok(FockState { n_signal, n_idler, cutoff, amplitudes, leakage, basis })
}

fn vacuum_vector(dim: usize) -> Array1<C64> {
    let mut v = Array1::<C64>::zeros(dim);
    v[0] = C64::new(1.0, 0.0);
    v
}

fn step_estimate(beta: &Array2<C64>, cutoff: usize) -> usize {
    let frob: f64 = beta.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    (2.0 * frob * (cutoff as f64 + 1.0)).ceil().max(1.0) as usize
}

/// Apply the nondegenerate squeeze operator `exp(Σ β_nm A†_nB†_m − h.c.)`
/// to the vacuum of `2·dim(β)` modes.
pub fn build_squeezed_state(beta: &Array2<C64>, cutoff: usize) -> Result<FockState, FockError> {
    build_squeezed_state_with_tol(beta, cutoff, DEFAULT_LEAK_TOL)
}

pub fn build_squeezed_state_with_tol(
    beta: &Array2<C64>,
    cutoff: usize,
    leak_tol: f64,
) -> Result<FockState, FockError> {
    let d = check_beta(beta)?;
    if cutoff == 0 {
        return Err(FockError::BadInput("cutoff must be at least 1".into()));
    }
    let basis = Basis::new(2 * d, cutoff)?;
    let sq = sqrt_table(basis.radix);
    let evolved = expm_apply(
        |x, y| apply_pair_generator(beta, &basis, &sq, x, y),
        &vacuum_vector(basis.dim),
        step_estimate(beta, cutoff),
    )?;
    finish_state(evolved, basis, d, d, cutoff, leak_tol)
}

/// Apply the degenerate squeeze operator `exp(½ Σ β_nm A†_nA†_m − h.c.)`
/// (symmetric `β`) to the vacuum of `dim(β)` modes.
pub fn build_degenerate_state(beta: &Array2<C64>, cutoff: usize) -> Result<FockState, FockError> {
    build_degenerate_state_with_tol(beta, cutoff, DEFAULT_LEAK_TOL)
}

pub fn build_degenerate_state_with_tol(
    beta: &Array2<C64>,
    cutoff: usize,
    leak_tol: f64,
) -> Result<FockState, FockError> {
    let d = check_beta(beta)?;
    if cutoff == 0 {
        return Err(FockError::BadInput("cutoff must be at least 1".into()));
    }
    let asym: f64 = (beta - &beta.t()).iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    let scale: f64 = beta.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    if asym > 1e-10 * scale.max(1.0) {
        return Err(FockError::BadInput(
            "degenerate squeezing needs a symmetric matrix".into(),
        ));
    }
    let basis = Basis::new(d, cutoff)?;
    let sq = sqrt_table(basis.radix);
    let evolved = expm_apply(
        |x, y| apply_degenerate_generator(beta, &basis, &sq, x, y),
        &vacuum_vector(basis.dim),
        step_estimate(beta, cutoff),
    )?;
    finish_state(evolved, basis, d, 0, cutoff, leak_tol)
}

/// `a_mode |ψ⟩` as a fresh amplitude vector.
fn lowered(state: &FockState, mode: usize, amps: &Array1<C64>) -> Array1<C64> {
    let basis = &state.basis;
    let stride = basis.strides[mode];
    let mut out = Array1::<C64>::zeros(basis.dim);
    for idx in 0..basis.dim {
        let occ = basis.occupation(idx, mode);
        if occ < basis.radix - 1 {
            let src = idx + stride;
            let v = amps[src];
            if v.norm_sqr() != 0.0 {
                out[idx] = ((occ + 1) as f64).sqrt() * v;
            }
        }
    }
    out
}

/// `a†_mode |ψ⟩`; amplitude raised past the cutoff is dropped.
fn raised(state: &FockState, mode: usize, amps: &Array1<C64>) -> Array1<C64> {
    let basis = &state.basis;
    let stride = basis.strides[mode];
    let mut out = Array1::<C64>::zeros(basis.dim);
    for idx in 0..basis.dim {
        let occ = basis.occupation(idx, mode);
        if occ > 0 {
            let v = amps[idx - stride];
            if v.norm_sqr() != 0.0 {
                out[idx] = (occ as f64).sqrt() * v;
            }
        }
    }
    out
}

fn inner(a: &Array1<C64>, b: &Array1<C64>) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Second moments measured directly on the state.
pub fn oracle_moments(state: &FockState) -> MomentSet {
    let psi = &state.amplitudes;
    if state.is_degenerate() {
        let d = state.n_signal;
        let low: Vec<Array1<C64>> = (0..d).map(|m| lowered(state, m, psi)).collect();
        let n = Array2::from_shape_fn((d, d), |(i, j)| inner(&low[i], &low[j]));
        let m = Array2::from_shape_fn((d, d), |(i, j)| inner(psi, &lowered(state, i, &low[j])));
        MomentSet::Degenerate { n, m }
    } else {
        let d = state.n_signal;
        let low_a: Vec<Array1<C64>> = (0..d).map(|m| lowered(state, m, psi)).collect();
        let low_b: Vec<Array1<C64>> = (0..d).map(|m| lowered(state, d + m, psi)).collect();
        let n_a = Array2::from_shape_fn((d, d), |(i, j)| inner(&low_a[i], &low_a[j]));
        let n_b = Array2::from_shape_fn((d, d), |(i, j)| inner(&low_b[i], &low_b[j]));
        let m_ab =
            Array2::from_shape_fn((d, d), |(i, j)| inner(psi, &lowered(state, i, &low_b[j])));
        MomentSet::Nondegenerate { n_a, n_b, m_ab }
    }
}

/// Distribution of the pair number by projection onto total-number
/// subspaces: total signal photons for a nondegenerate state, total photons
/// halved for a degenerate one (odd totals carry no mass there).
pub fn oracle_pair_probs(state: &FockState, s_max: usize) -> PairDistribution {
    let basis = &state.basis;
    let signal_modes = state.n_signal;
    let max_total = signal_modes * state.cutoff;
    let mut by_total = vec![0.0; max_total + 1];
    let mut occ = vec![0usize; basis.modes];
    for idx in 0..basis.dim {
        let w = state.amplitudes[idx].norm_sqr();
        if w == 0.0 {
            continue;
        }
        basis.occupations(idx, &mut occ);
        let total: usize = occ[..signal_modes].iter().sum();
        by_total[total] += w;
    }
    let probs: Vec<f64> = if state.is_degenerate() {
        // Photons are created in pairs; odd totals are empty.
        (0..=s_max).map(|s| by_total.get(2 * s).copied().unwrap_or(0.0)).collect()
    } else {
        (0..=s_max).map(|s| by_total.get(s).copied().unwrap_or(0.0)).collect()
    };
    PairDistribution::from_probs(probs)
}

/// Variance of the quadrature `x_ξ = Σ_j ξ_j* A_j + ξ_j A†_j` for a
/// degenerate state, normalized so the vacuum gives 1. The local-oscillator
/// coefficients are normalized internally.
pub fn oracle_quadrature_variance(
    state: &FockState,
    lo_coeffs: &Array1<C64>,
) -> Result<f64, FockError> {
    if !state.is_degenerate() {
        return Err(FockError::BadInput("quadrature oracle expects a degenerate state".into()));
    }
    if lo_coeffs.len() != state.n_signal {
        return Err(FockError::BadInput(format!(
            "need {} local-oscillator coefficients, got {}",
            state.n_signal,
            lo_coeffs.len()
        )));
    }
    let norm: f64 = lo_coeffs.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    if norm < 1e-300 {
        return Err(FockError::BadInput("local-oscillator coefficients are all zero".into()));
    }
    let psi = &state.amplitudes;
    let mut x_psi = Array1::<C64>::zeros(psi.len());
    for j in 0..state.n_signal {
        let xi = lo_coeffs[j] / norm;
        let low = lowered(state, j, psi);
        let high = raised(state, j, psi);
        for i in 0..psi.len() {
            x_psi[i] += xi.conj() * low[i] + xi * high[i];
        }
    }
    let mean = inner(psi, &x_psi).re;
    let second = inner(&x_psi, &x_psi).re;
    Ok(second - mean * mean)
}

/// Hong-Ou-Mandel coincidence probability after delaying the idler modes by
/// `q` Whittaker-Shannon slots and mixing each signal/idler pair on a 50:50
/// beam splitter: `1 − p(vac_c) − p(vac_d) + p(vac_c ∧ vac_d)`.
///
/// `grid_modes` is the size of the zero-padded mode set; the shifted idler
/// family must stay inside it. The port-vacuum projections are evaluated by
/// grouping basis states by their per-slot photon totals, which keeps the
/// interference between configurations while never building the output
/// space explicitly.
pub fn oracle_hom(state: &FockState, q: i64, grid_modes: usize) -> Result<f64, FockError> {
    if state.is_degenerate() {
        return Err(FockError::BadInput("interference oracle expects a nondegenerate state".into()));
    }
    let d = state.n_signal as i64;
    let span = d + q.abs();
    if span as usize > grid_modes {
        return Err(FockError::BadInput(format!(
            "shift {q} pushes modes outside the {grid_modes}-slot padded set",
        )));
    }
    // Slot p holds signal mode p and idler mode p − q (where those exist).
    let offset = (-q).max(0);
    let slots = span as usize;
    let basis = &state.basis;
    let n_sig = state.n_signal;
    let cutoff = state.cutoff;

    let max_fact = 2 * cutoff;
    let mut fact = vec![1.0f64; max_fact + 1];
    for k in 1..=max_fact {
        fact[k] = fact[k - 1] * k as f64;
    }

    let mut proj_c: HashMap<Vec<u8>, C64> = HashMap::new();
    let mut proj_d: HashMap<Vec<u8>, C64> = HashMap::new();
    let mut occ = vec![0usize; basis.modes];
    let mut key = vec![0u8; slots];
    for idx in 0..basis.dim {
        let amp = state.amplitudes[idx];
        if amp.norm_sqr() == 0.0 {
            continue;
        }
        basis.occupations(idx, &mut occ);
        let mut weight = 1.0f64;
        let mut idler_total = 0usize;
        for (slot, k) in key.iter_mut().enumerate() {
            let pos = slot as i64 - offset;
            let j = if (0..d).contains(&pos) { occ[pos as usize] } else { 0 };
            let ip = pos - q;
            let kk = if (0..d).contains(&ip) { occ[n_sig + ip as usize] } else { 0 };
            let s = j + kk;
            *k = s as u8;
            idler_total += kk;
            // Amplitude for all s photons exiting one port: 2^{-s/2}·√(s!/(j!k!)).
            weight *= (fact[s] / (fact[j] * fact[kk])).sqrt() * 0.5f64.powi(s as i32 / 2)
                * if s % 2 == 1 { std::f64::consts::FRAC_1_SQRT_2 } else { 1.0 };
        }
        let contrib = amp * weight;
        let signed = if idler_total % 2 == 1 { -contrib } else { contrib };
        *proj_c.entry(key.clone()).or_insert(C64::new(0.0, 0.0)) += signed;
        *proj_d.entry(key.clone()).or_insert(C64::new(0.0, 0.0)) += contrib;
    }
    let p_vac_c: f64 = proj_c.values().map(|v| v.norm_sqr()).sum();
    let p_vac_d: f64 = proj_d.values().map(|v| v.norm_sqr()).sum();
    let p_both = state.vacuum_amplitude().norm_sqr();
    Ok(1.0 - p_vac_c - p_vac_d + p_both)
}
