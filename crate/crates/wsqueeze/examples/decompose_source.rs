//! From a physical source model to a finite squeezing matrix and its
//! independently squeezed supermodes.
//!
//! Run with `cargo run --example decompose_source`.

use wsqueeze::jsa::{BandlimitPreset, BetaMatrix, JointAmplitude, SamplingGrid};
use wsqueeze::matcalc::{disentangle_from_svd, BetaSvd};
use wsqueeze::C64;

fn main() {
    // A pulse ten times longer than the coherence time of the generated
    // light. Sampling at the coherence time resolves the band exactly.
    let model = JointAmplitude::double_gaussian_pulsed(10.0, 1.0).unwrap();
    let grid = SamplingGrid::for_pulsed(&model, BandlimitPreset::TwoPiOverTc, 2.5).unwrap();
    println!(
        "grid: tau = {}, indices {}..={} ({} modes)",
        grid.tau(),
        grid.n_min(),
        grid.n_max(),
        grid.len()
    );

    let beta = BetaMatrix::sample(&model, grid, C64::new(0.5, 0.0)).unwrap();
    let svd = BetaSvd::new(&beta.values).unwrap();

    println!("\nlargest singular values of the squeezing matrix:");
    for (i, s) in svd.singular_values().iter().take(8).enumerate() {
        println!("  sigma_{i} = {s:.6}");
    }

    let set = disentangle_from_svd(&svd);
    let pairs = svd.sum_over_singulars(|s| s.sinh().powi(2));
    println!("\ndisentangled form:");
    println!("  vacuum weight det W      = {:.6}", set.det_w);
    println!("  mean pairs in the window = {pairs:.6}");
    println!(
        "  effective mode number    = {:.3}",
        pairs.powi(2) / svd.sum_over_singulars(|s| s.sinh().powi(4))
    );

    // The two-photon kernel T drives every interference formula downstream.
    let t = svd.fn_of_q_times_unitary(f64::tanh);
    let t_norm: f64 = t.iter().map(|v| v.norm_sqr()).sum();
    println!("  pair kernel  tr T^H T    = {t_norm:.6}");
}
