//! Matrix calculus on sampled squeezing matrices.
//!
//! Everything here is driven by one singular value decomposition
//! `β = A Σ B†`, which yields the polar factors `U = A B†`, `P = B Σ B†`,
//! `Q = A Σ A†` (so `β = U P = Q U`), the disentangled squeeze factors, the
//! Bogoliubov transformation, and the second moments of the squeezed state.
//! Hermitian functions like `sinh Q` are evaluated by applying the scalar
//! function to `Σ` inside the factorization.

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, SVD, UPLO};
use thiserror::Error;

use crate::C64;

#[derive(Debug, Error)]
pub enum MatcalcError {
    /// Input contains NaN or infinity.
    #[error("matrix contains non-finite entries")]
    NonFinite,
    /// Input is not square or has an unexpected dimension.
    #[error("bad matrix shape: {0}")]
    BadShape(String),
    /// A matrix that must be Hermitian is not, beyond tolerance.
    #[error("matrix not Hermitian: relative asymmetry {0:.3e}")]
    NotHermitian(f64),
    /// Degenerate-regime input must be symmetric (`β = βᵀ`), beyond tolerance.
    #[error("squeezing matrix not symmetric: relative asymmetry {0:.3e}")]
    AsymmetricBeta(f64),
    /// The underlying LAPACK routine failed to converge.
    #[error("linear algebra backend failure: {0}")]
    Backend(String),
}

/// Relative Frobenius tolerance for Hermiticity and symmetry checks.
const SYMMETRY_TOL: f64 = 1e-10;

fn check_square_finite(m: &Array2<C64>) -> Result<usize, MatcalcError> {
    let (rows, cols) = m.dim();
    if rows != cols || rows == 0 {
        return Err(MatcalcError::BadShape(format!("expected square nonempty, got {rows}x{cols}")));
    }
    if m.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(MatcalcError::NonFinite);
    }
    Ok(rows)
}

fn frobenius(m: &Array2<C64>) -> f64 {
    m.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
}

/// Relative asymmetry `‖m - mᵀ‖_F / max(1, ‖m‖_F)`-style measure with a
/// floor so the zero matrix counts as symmetric.
fn rel_transpose_asymmetry(m: &Array2<C64>) -> f64 {
    let asym = frobenius(&(m - &m.t()));
    asym / frobenius(m).max(1e-300)
}

fn rel_adjoint_asymmetry(m: &Array2<C64>) -> f64 {
    let adj = m.t().mapv(|v| v.conj());
    let asym = frobenius(&(m - &adj));
    asym / frobenius(m).max(1e-300)
}

/// Cached SVD `β = A Σ B†` of a squeezing matrix, the common engine behind
/// the public operations in this module.
#[derive(Debug, Clone)]
pub struct BetaSvd {
    /// Left singular vectors `A`.
    left: Array2<C64>,
    /// Singular values, descending.
    sigma: Array1<f64>,
    /// Adjoint of the right singular vectors, `B†`.
    right_h: Array2<C64>,
}

impl BetaSvd {
    pub fn new(beta: &Array2<C64>) -> Result<Self, MatcalcError> {
        check_square_finite(beta)?;
        let (u, s, vt) = beta
            .svd(true, true)
            .map_err(|e| MatcalcError::Backend(e.to_string()))?;
        Ok(Self { left: u.unwrap(), sigma: s, right_h: vt.unwrap() })
    }

    pub fn dim(&self) -> usize {
        self.sigma.len()
    }

    pub fn singular_values(&self) -> &Array1<f64> {
        &self.sigma
    }

    /// `Σ f(σ_i)`.
    pub fn sum_over_singulars(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.sigma.iter().map(|&s| f(s)).sum()
    }

    /// `det sech Q = exp(Σ ln sech σ_i)`, the vacuum overlap factor.
    pub fn det_sech(&self) -> f64 {
        self.sum_over_singulars(|s| -s.cosh().ln()).exp()
    }

    /// Polar unitary `U = A B†`.
    pub fn unitary(&self) -> Array2<C64> {
        self.left.dot(&self.right_h)
    }

    fn scaled_by(&self, basis: &Array2<C64>, f: impl Fn(f64) -> f64) -> Array2<C64> {
        // basis · diag(f(σ)) computed by column scaling.
        let mut m = basis.clone();
        for (j, col) in m.columns_mut().into_iter().enumerate() {
            let s = C64::new(f(self.sigma[j]), 0.0);
            for v in col {
                *v *= s;
            }
        }
        m
    }

    /// `f(Q) = A f(Σ) A†`.
    pub fn fn_of_q(&self, f: impl Fn(f64) -> f64) -> Array2<C64> {
        let scaled = self.scaled_by(&self.left, f);
        scaled.dot(&self.left.t().mapv(|v| v.conj()))
    }

    /// `f(P) = B f(Σ) B†`.
    pub fn fn_of_p(&self, f: impl Fn(f64) -> f64) -> Array2<C64> {
        let b = self.right_h.t().mapv(|v| v.conj());
        let scaled = self.scaled_by(&b, f);
        scaled.dot(&self.right_h)
    }

    /// `f(Q) U = A f(Σ) B†`.
    pub fn fn_of_q_times_unitary(&self, f: impl Fn(f64) -> f64) -> Array2<C64> {
        self.scaled_by(&self.left, f).dot(&self.right_h)
    }
}

/// Polar factors of `β = U P = Q U`.
#[derive(Debug, Clone)]
pub struct PolarFactors {
    /// Unitary factor.
    pub u: Array2<C64>,
    /// Right Hermitian factor `P = (β†β)^{1/2}`.
    pub p: Array2<C64>,
    /// Left Hermitian factor `Q = (ββ†)^{1/2}`.
    pub q: Array2<C64>,
}

/// Polar-decompose a complex square matrix via its SVD.
pub fn polar_decompose(beta: &Array2<C64>) -> Result<PolarFactors, MatcalcError> {
    let svd = BetaSvd::new(beta)?;
    Ok(PolarFactors {
        u: svd.unitary(),
        p: svd.fn_of_p(|s| s),
        q: svd.fn_of_q(|s| s),
    })
}

/// Apply a real scalar function to a Hermitian matrix through its
/// eigendecomposition. The input must be Hermitian to a relative Frobenius
/// tolerance of 1e-10.
pub fn hermitian_matfun(
    h: &Array2<C64>,
    f: impl Fn(f64) -> f64,
) -> Result<Array2<C64>, MatcalcError> {
    check_square_finite(h)?;
    let asym = rel_adjoint_asymmetry(h);
    if asym > SYMMETRY_TOL {
        return Err(MatcalcError::NotHermitian(asym));
    }
    let (vals, vecs) = h
        .eigh(UPLO::Lower)
        .map_err(|e| MatcalcError::Backend(e.to_string()))?;
    let mut scaled = vecs.clone();
    for (j, col) in scaled.columns_mut().into_iter().enumerate() {
        let s = C64::new(f(vals[j]), 0.0);
        for v in col {
            *v *= s;
        }
    }
    Ok(scaled.dot(&vecs.t().mapv(|v| v.conj())))
}

/// Disentangled factors of the squeeze operator: acting on vacuum,
/// `S|vac⟩ = det(W)^{1/2 per regime} · exp(ā† T b̄†)|vac⟩` with
/// `W = sech Q` and `T = (tanh Q) U`; `L`, `Y`, `V` are the normal-ordering
/// exponents `ln sech Q`, `ln sech Pᵀ` and `((U†)(tanh Q))ᵀ`.
#[derive(Debug, Clone)]
pub struct DisentangledSet {
    pub w: Array2<C64>,
    /// `det W = exp(Σ ln sech σ_i)`, real in (0, 1].
    pub det_w: f64,
    pub t: Array2<C64>,
    pub l: Array2<C64>,
    pub y: Array2<C64>,
    pub v: Array2<C64>,
}

pub fn disentangle(beta: &Array2<C64>) -> Result<DisentangledSet, MatcalcError> {
    let svd = BetaSvd::new(beta)?;
    Ok(disentangle_from_svd(&svd))
}

pub fn disentangle_from_svd(svd: &BetaSvd) -> DisentangledSet {
    let ln_sech = |s: f64| -s.cosh().ln();
    // V = ((U†)(tanh Q))ᵀ = (B tanh(Σ) A†)ᵀ.
    let b = svd.right_h.t().mapv(|v| v.conj());
    let v_inner = svd
        .scaled_by(&b, f64::tanh)
        .dot(&svd.left.t().mapv(|v| v.conj()));
    DisentangledSet {
        w: svd.fn_of_q(|s| 1.0 / s.cosh()),
        det_w: svd.det_sech(),
        t: svd.fn_of_q_times_unitary(f64::tanh),
        l: svd.fn_of_q(ln_sech),
        y: svd.fn_of_p(ln_sech).t().to_owned(),
        v: v_inner.t().to_owned(),
    }
}

/// Bogoliubov transformation induced by the squeeze operator on the signal
/// (`a`) and idler (`b`) mode families:
/// `S† A_r S = Σ_s μ^a_rs A_s + ν^a_rs B†_s` and likewise for `B_r` with the
/// roles of the families swapped.
#[derive(Debug, Clone)]
pub struct BogoliubovTransform {
    pub mu_a: Array2<C64>,
    pub nu_a: Array2<C64>,
    pub mu_b: Array2<C64>,
    pub nu_b: Array2<C64>,
}

pub fn bogoliubov(beta: &Array2<C64>) -> Result<BogoliubovTransform, MatcalcError> {
    let svd = BetaSvd::new(beta)?;
    let nu_a = svd.fn_of_q_times_unitary(f64::sinh);
    Ok(BogoliubovTransform {
        mu_a: svd.fn_of_q(f64::cosh),
        mu_b: svd.fn_of_p(f64::cosh).t().to_owned(),
        nu_b: nu_a.t().to_owned(),
        nu_a,
    })
}

/// Whether the squeezed pairs live in one mode family or two.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// One family; requires a symmetric `β`.
    Degenerate,
    /// Distinct signal/idler families; `β` unrestricted.
    Nondegenerate,
}

/// Second moments of the squeezed state over the sampled modes.
///
/// Nondegenerate: `N^a_nm = ⟨A†_n A_m⟩ = (sinh²Q)ᵀ`,
/// `N^b_nm = ⟨B†_n B_m⟩ = sinh²P` and
/// `M^{ab}_nm = ⟨A_n B_m⟩ = (sinh Q)(cosh Q) U`.
/// Degenerate: `N_nm = ⟨A†_n A_m⟩ = sinh²P`,
/// `M_nm = ⟨A_n A_m⟩ = (sinh Q)(cosh Q) U`.
#[derive(Debug, Clone)]
pub enum MomentSet {
    Nondegenerate {
        n_a: Array2<C64>,
        n_b: Array2<C64>,
        m_ab: Array2<C64>,
    },
    Degenerate {
        n: Array2<C64>,
        m: Array2<C64>,
    },
}

impl MomentSet {
    pub fn dim(&self) -> usize {
        match self {
            Self::Nondegenerate { n_a, .. } => n_a.nrows(),
            Self::Degenerate { n, .. } => n.nrows(),
        }
    }

    pub fn regime(&self) -> Regime {
        match self {
            Self::Nondegenerate { .. } => Regime::Nondegenerate,
            Self::Degenerate { .. } => Regime::Degenerate,
        }
    }
}

pub fn moments(beta: &Array2<C64>, regime: Regime) -> Result<MomentSet, MatcalcError> {
    match regime {
        Regime::Nondegenerate => {
            let svd = BetaSvd::new(beta)?;
            let sinh2 = |s: f64| s.sinh() * s.sinh();
            Ok(MomentSet::Nondegenerate {
                n_a: svd.fn_of_q(sinh2).t().to_owned(),
                n_b: svd.fn_of_p(sinh2),
                m_ab: svd.fn_of_q_times_unitary(|s| s.sinh() * s.cosh()),
            })
        }
        Regime::Degenerate => {
            check_square_finite(beta)?;
            let asym = rel_transpose_asymmetry(beta);
            if asym > SYMMETRY_TOL {
                return Err(MatcalcError::AsymmetricBeta(asym));
            }
            let sym = (beta + &beta.t()).mapv(|v| 0.5 * v);
            let svd = BetaSvd::new(&sym)?;
            Ok(MomentSet::Degenerate {
                n: svd.fn_of_p(|s| s.sinh() * s.sinh()),
                m: svd.fn_of_q_times_unitary(|s| s.sinh() * s.cosh()),
            })
        }
    }
}
