//! Broadband charge detection of a degenerate pulsed source: the local-
//! oscillator shapes that reach the best and worst variance, and the
//! waveform the optimum corresponds to.
//!
//! Run with `cargo run --example charge_variance`.

use wsqueeze::homodyne::{charge_variance_extrema, optimal_lo_waveform, variance_db};
use wsqueeze::jsa::{BetaMatrix, JointAmplitude, SamplingGrid};
use wsqueeze::matcalc::{moments, Regime};
use wsqueeze::C64;

fn main() {
    let model = JointAmplitude::double_gaussian_pulsed(5.0, 1.0).unwrap();
    let grid = SamplingGrid::centered(1.0, 20).unwrap();

    println!("strength, best variance (dB), worst variance (dB):");
    for strength in [0.05, 0.1, 0.2, 0.4] {
        let beta = BetaMatrix::sample(&model, grid.clone(), C64::new(strength, 0.0)).unwrap();
        let mom = moments(&beta.values, Regime::Degenerate).unwrap();
        let res = charge_variance_extrema(&mom).unwrap();
        println!(
            "  {strength:.2}   {:+.4}   {:+.4}",
            variance_db(res.sigma2_min).unwrap(),
            variance_db(res.sigma2_max).unwrap()
        );
    }

    // The optimal local oscillator is a concrete pulse shape, not just a
    // coefficient vector. It tracks the dominant supermode of the source.
    let beta = BetaMatrix::sample(&model, grid, C64::new(0.2, 0.0)).unwrap();
    let mom = moments(&beta.values, Regime::Degenerate).unwrap();
    let res = charge_variance_extrema(&mom).unwrap();
    println!("\noptimal local-oscillator magnitude |xi(t)|:");
    for t in [0.0, 2.0, 4.0, 8.0, 12.0] {
        let v = optimal_lo_waveform(&res, &beta.grid, t);
        println!("  t = {t:>4.1}: {:.6}", v.norm());
    }
    if res.spectrum_degenerate {
        println!("\n(note: the optimum is degenerate, any mix attains it)");
    }
}
