//! Whittaker-Shannon mode analysis of (non)degenerate squeezed light.
//!
//! A bandlimited field can be expanded exactly over time-shifted sinc modes,
//! which turns the continuous-time squeezing kernel of a parametric source
//! into an ordinary complex matrix. Everything downstream of that matrix is
//! finite-dimensional linear algebra: disentangled squeeze factors, Bogoliubov
//! transforms, field moments, homodyne variances, threshold-detector
//! coincidence statistics, and Hong-Ou-Mandel interference.
//!
//! Modules, in dependency order:
//!
//! - [`jsa`]: joint temporal/spectral amplitudes and their sampled matrices
//! - [`matcalc`]: polar decomposition, matrix functions, squeeze factors,
//!   Bogoliubov transforms, moment matrices
//! - [`wsdecomp`]: sinc modes, detection windows, covariances, pair counts
//! - [`homodyne`]: spectral and total-charge quadrature variances
//! - [`coincidence`]: pair-number distributions and two-detector coincidences
//! - [`hom`]: Hong-Ou-Mandel dip curves and visibilities
//! - [`fock`]: an independent truncated-Fock-space simulator used to
//!   cross-check all of the above by brute force
//! - [`cli`]: config-file driven runners that write CSV/JSON sweeps
//!
//! The `examples/` directory exercises one capability per file and is the
//! best starting point; `wsqueeze --help` exposes the same runners as a
//! command-line tool.

pub mod cli;
pub mod coincidence;
pub mod fock;
pub mod hom;
pub mod homodyne;
pub mod jsa;
pub mod matcalc;
pub mod wsdecomp;

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

pub use coincidence::{CoincidenceProbs, DetectorModel, PairDistribution};
pub use hom::HomCurve;
pub use homodyne::ChargeVarianceResult;
pub use jsa::{AmplitudeKind, BandlimitPreset, BetaMatrix, JointAmplitude, SamplingGrid};
pub use matcalc::{BetaSvd, BogoliubovTransform, DisentangledSet, MomentSet, PolarFactors, Regime};
pub use wsdecomp::WindowSpec;
