//! Threshold-detector coincidence counting on a two-beam source: the
//! pair-number distribution in the window and the polarization visibility
//! it produces at different detector efficiencies.
//!
//! Run with `cargo run --example pair_statistics`.

use wsqueeze::coincidence::{coincidence_probs, pair_distribution, visibility, DetectorModel};
use wsqueeze::jsa::{BetaMatrix, JointAmplitude, SamplingGrid};
use wsqueeze::C64;

fn main() {
    let model = JointAmplitude::double_gaussian_pulsed(10.0, 1.0).unwrap();
    let grid = SamplingGrid::centered(1.0, 30).unwrap();

    for strength in [0.2, 0.6] {
        let beta = BetaMatrix::sample(&model, grid.clone(), C64::new(strength, 0.0)).unwrap();
        let dist = pair_distribution(&beta.values, 60).unwrap();
        println!("strength {strength}: pair-number distribution");
        for (s, &p) in dist.probs().iter().take(6).enumerate() {
            println!("  P({s} pairs) = {p:.6}");
        }
        let mean: f64 = dist
            .probs()
            .iter()
            .enumerate()
            .map(|(s, &p)| s as f64 * p)
            .sum();
        println!("  mean pairs = {mean:.4}");

        // Multi-pair events fire both detectors behind the splitting
        // polarizer, so the visibility degrades as the source brightens
        // and recovers somewhat for lossy detectors.
        for alpha in [1.0, 0.3, 0.05] {
            let det = DetectorModel::new(alpha).unwrap().with_truncation(200, 1e-12);
            let probs = coincidence_probs(&beta.values, &det).unwrap();
            let v = visibility(probs.hh, probs.hv).unwrap();
            println!("  alpha = {alpha:.2}: HH = {:.3e}, HV = {:.3e}, V = {v:.4}", probs.hh, probs.hv);
        }
        println!();
    }
}
