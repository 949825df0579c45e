//! A Hong-Ou-Mandel dip for a pulsed two-beam source: coincidence
//! probability against the delay between the beams.
//!
//! Run with `cargo run --example hom_dip`.

use wsqueeze::hom::hom_dip_curve;
use wsqueeze::wsdecomp::WindowSpec;
use wsqueeze::{JointAmplitude, C64};

fn main() {
    let model = JointAmplitude::double_gaussian_pulsed(5.0, 1.0).unwrap();
    let window = WindowSpec::new(0.0, 81).unwrap();
    let curve =
        hom_dip_curve(&model, C64::new(0.2, 0.0), &window, 1, -25..=25).unwrap();

    println!("delay, coincidence probability, normalized:");
    for (delay, prob) in curve.delays.iter().zip(&curve.probs).step_by(5) {
        let bar_len = (40.0 * prob / curve.p_max).round() as usize;
        println!(
            "  {delay:>6.1}  {prob:.6}  {:.4}  {}",
            prob / curve.p_max,
            "#".repeat(bar_len)
        );
    }
    println!("\ndip bottom          = {:.6e}", curve.p_min);
    println!("separated limit     = {:.6e}", curve.p_max);
    println!("visibility          = {:.6}", curve.visibility);
}
