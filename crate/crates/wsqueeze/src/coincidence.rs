//! Pair-number statistics of a windowed squeezed state and the coincidence
//! probabilities seen by a pair of threshold detectors behind a polarizing
//! splitter.
//!
//! The photon-pair number distribution follows from the singular values of
//! the windowed squeezing matrix: with `x_i = tanh²σ_i`,
//! `𝒫_s = det(W)² · h_s(x)` where `h_s` is the complete homogeneous
//! symmetric polynomial. Two equivalent evaluators are provided: the
//! explicit integer-partition trace sum (readable, used for spot checks) and
//! a power-sum recurrence with all-positive terms (stable out to thousands
//! of pairs, used for the distributions fed to the detectors).

use ndarray::Array2;
use thiserror::Error;

use crate::matcalc::{BetaSvd, MatcalcError};
use crate::C64;

#[derive(Debug, Error)]
pub enum CoincidenceError {
    #[error("detector efficiency must lie in [0,1], got {0}")]
    AlphaOutOfRange(f64),
    #[error("pair distribution truncated at s_max={s_max} leaves tail mass {tail:.3e} > {tol:.3e}")]
    TruncationFailure { s_max: usize, tail: f64, tol: f64 },
    #[error("visibility undefined when both coincidence probabilities vanish")]
    BothZero,
    #[error(transparent)]
    Matcalc(#[from] MatcalcError),
}

/// Probability that a threshold detector of efficiency `alpha` fires on `x`
/// incident photons: `D_x = 1 − (1−α)^x`.
pub fn detection_prob(x: u64, alpha: f64) -> Result<f64, CoincidenceError> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(CoincidenceError::AlphaOutOfRange(alpha));
    }
    if x == 0 {
        return Ok(0.0);
    }
    if alpha == 1.0 {
        return Ok(1.0);
    }
    // 1 − (1−α)^x without cancellation for small α.
    Ok(-f64::exp_m1(x as f64 * f64::ln_1p(-alpha)))
}

/// A threshold (click / no-click) detector together with the truncation
/// budget used when summing over pair numbers.
#[derive(Debug, Clone, Copy)]
pub struct DetectorModel {
    alpha: f64,
    s_max: usize,
    tail_tol: f64,
}

impl DetectorModel {
    /// Detector with efficiency `alpha` and the default truncation
    /// (`s_max = 40`, tail tolerance `1e-10`), suitable for weak squeezing.
    pub fn new(alpha: f64) -> Result<Self, CoincidenceError> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(CoincidenceError::AlphaOutOfRange(alpha));
        }
        Ok(Self { alpha, s_max: 40, tail_tol: 1e-10 })
    }

    pub fn with_truncation(mut self, s_max: usize, tail_tol: f64) -> Self {
        self.s_max = s_max;
        self.tail_tol = tail_tol;
        self
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn s_max(&self) -> usize {
        self.s_max
    }

    pub fn tail_tol(&self) -> f64 {
        self.tail_tol
    }

    /// `D_s` for this detector.
    pub fn prob(&self, s: u64) -> f64 {
        detection_prob(s, self.alpha).expect("alpha validated at construction")
    }
}

/// Distribution of the number of photon pairs in the detection window.
#[derive(Debug, Clone)]
pub struct PairDistribution {
    probs: Vec<f64>,
    truncation_mass: f64,
}

impl PairDistribution {
    /// Wrap explicitly computed probabilities; the truncation mass is
    /// whatever they fail to account for.
    pub fn from_probs(probs: Vec<f64>) -> Self {
        let total: f64 = probs.iter().sum();
        Self { probs, truncation_mass: (1.0 - total).max(0.0) }
    }

    /// `𝒫_s`, zero beyond the truncation.
    pub fn prob(&self, s: usize) -> f64 {
        self.probs.get(s).copied().unwrap_or(0.0)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn s_max(&self) -> usize {
        self.probs.len().saturating_sub(1)
    }

    /// Probability mass beyond `s_max`.
    pub fn truncation_mass(&self) -> f64 {
        self.truncation_mass
    }

    /// Mean pair number of the truncated distribution.
    pub fn mean(&self) -> f64 {
        self.probs.iter().enumerate().map(|(s, p)| s as f64 * p).sum()
    }
}

/// All integer partitions of `s` as multiplicity pairs `(u, q_u)` with
/// `Σ u·q_u = s`, parts in increasing order, no zero multiplicities.
pub fn integer_partitions(s: usize) -> Vec<Vec<(usize, usize)>> {
    fn recurse(
        remaining: usize,
        min_part: usize,
        current: &mut Vec<(usize, usize)>,
        out: &mut Vec<Vec<(usize, usize)>>,
    ) {
        if remaining == 0 {
            out.push(current.clone());
            return;
        }
        for part in min_part..=remaining {
            let max_count = remaining / part;
            for count in 1..=max_count {
                current.push((part, count));
                recurse(remaining - part * count, part + 1, current, out);
                current.pop();
            }
        }
    }
    let mut out = Vec::new();
    recurse(s, 1, &mut Vec::new(), &mut out);
    out
}

/// Powers of `tanh²σ_i` summed over singular values: `p_k = tr (tanh²Q)^k`.
fn power_sums(svd: &BetaSvd, k_max: usize) -> Vec<f64> {
    let xs: Vec<f64> = svd
        .singular_values()
        .iter()
        .map(|&s| {
            let t = s.tanh();
            t * t
        })
        .collect();
    let mut sums = vec![0.0; k_max + 1];
    let mut powers = xs.clone();
    for k in 1..=k_max {
        sums[k] = powers.iter().sum();
        for (p, &x) in powers.iter_mut().zip(&xs) {
            *p *= x;
        }
    }
    sums
}

fn det_w_squared(svd: &BetaSvd) -> f64 {
    let d = svd.det_sech();
    d * d
}

/// Probability of exactly `s` photon pairs in the window, evaluated by the
/// explicit partition sum
/// `𝒫_s = Σ_{q⊢s} detW² ∏_u tr((tanh²Q)^u)^{q_u} / (u^{q_u} q_u!)`.
///
/// Terms are taken to log space beyond `s = 20` where the factorials
/// overflow; all terms are positive so no cancellation occurs either way.
pub fn pair_probability(beta_j: &Array2<C64>, s: usize) -> Result<f64, CoincidenceError> {
    let svd = BetaSvd::new(beta_j)?;
    let w2 = det_w_squared(&svd);
    if s == 0 {
        return Ok(w2);
    }
    let p = power_sums(&svd, s);
    let mut total = 0.0;
    if s <= 20 {
        for partition in integer_partitions(s) {
            let mut term = w2;
            for &(u, q) in &partition {
                for _ in 0..q {
                    term *= p[u] / u as f64;
                }
                for k in 1..=q {
                    term /= k as f64;
                }
            }
            total += term;
        }
    } else {
        let mut ln_fact = vec![0.0; s + 1];
        for k in 2..=s {
            ln_fact[k] = ln_fact[k - 1] + (k as f64).ln();
        }
        for partition in integer_partitions(s) {
            let mut ln_term = w2.ln();
            let mut vanishes = false;
            for &(u, q) in &partition {
                if p[u] <= 0.0 {
                    vanishes = true;
                    break;
                }
                ln_term += q as f64 * (p[u].ln() - (u as f64).ln()) - ln_fact[q];
            }
            if !vanishes {
                total += ln_term.exp();
            }
        }
    }
    Ok(total)
}

/// The full distribution up to `s_max`, via the power-sum recurrence
/// `s·𝒫_s = Σ_{k=1}^{s} p_k 𝒫_{s−k}` seeded with `𝒫_0 = detW²`.
///
/// Mathematically identical to [`pair_probability`] but O(s_max²) with
/// positive updates throughout, so it stays accurate at pair numbers far
/// beyond where partition enumeration is feasible.
pub fn pair_distribution(
    beta_j: &Array2<C64>,
    s_max: usize,
) -> Result<PairDistribution, CoincidenceError> {
    let svd = BetaSvd::new(beta_j)?;
    let p = power_sums(&svd, s_max);
    let mut probs = vec![0.0; s_max + 1];
    probs[0] = det_w_squared(&svd);
    for s in 1..=s_max {
        let mut acc = 0.0;
        for k in 1..=s {
            acc += p[k] * probs[s - k];
        }
        probs[s] = acc / s as f64;
    }
    Ok(PairDistribution::from_probs(probs))
}

/// Coincidence probabilities for two threshold detectors watching the two
/// output polarizations.
///
/// `hh` is the same-pulse coincidence `Σ_{s≥1} D_s² 𝒫_s` (signal and idler
/// pair numbers are perfectly correlated); `hv` is the accidental rate
/// between independent pulses, `(Σ_{s≥1} D_s 𝒫_s)²`.
#[derive(Debug, Clone, Copy)]
pub struct CoincidenceProbs {
    pub hh: f64,
    pub hv: f64,
}

pub fn coincidence_probs(
    beta_j: &Array2<C64>,
    det: &DetectorModel,
) -> Result<CoincidenceProbs, CoincidenceError> {
    let dist = pair_distribution(beta_j, det.s_max())?;
    coincidence_from_distribution(&dist, det)
}

/// The same sums evaluated on an explicitly supplied pair distribution.
pub fn coincidence_from_distribution(
    dist: &PairDistribution,
    det: &DetectorModel,
) -> Result<CoincidenceProbs, CoincidenceError> {
    let tail = dist.truncation_mass();
    if tail > det.tail_tol() {
        return Err(CoincidenceError::TruncationFailure {
            s_max: dist.s_max(),
            tail,
            tol: det.tail_tol(),
        });
    }
    let mut hh = 0.0;
    let mut single = 0.0;
    for (s, &p) in dist.probs().iter().enumerate().skip(1) {
        let d = det.prob(s as u64);
        hh += d * d * p;
        single += d * p;
    }
    Ok(CoincidenceProbs { hh, hv: single * single })
}

/// Closed-form coincidence probabilities when at most one pair occupies the
/// window: `P_HH = D₁²N_J + (D₂²/2 − D₁²)N_J²`, `P_HV = D₁²N_J²`.
///
/// Valid for `N_J ≪ 1` at any detector efficiency; above `N_J ≈ 0.1` the
/// neglected O(N_J³) terms become visible.
pub fn weak_window_probs(n_j: f64, alpha: f64) -> Result<CoincidenceProbs, CoincidenceError> {
    let d1 = detection_prob(1, alpha)?;
    let d2 = detection_prob(2, alpha)?;
    Ok(CoincidenceProbs {
        hh: d1 * d1 * n_j + (0.5 * d2 * d2 - d1 * d1) * n_j * n_j,
        hv: d1 * d1 * n_j * n_j,
    })
}

/// Coincidence visibility `(P_HH − P_HV)/(P_HH + P_HV)`.
pub fn visibility(hh: f64, hv: f64) -> Result<f64, CoincidenceError> {
    let sum = hh + hv;
    if sum <= 0.0 {
        return Err(CoincidenceError::BothZero);
    }
    Ok((hh - hv) / sum)
}
