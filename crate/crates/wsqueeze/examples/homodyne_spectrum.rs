//! Sideband-resolved homodyne variance of a stationary squeezed beam, at the
//! squeezed and antisqueezed local-oscillator phases.
//!
//! Run with `cargo run --example homodyne_spectrum`.

use wsqueeze::homodyne::{cw_variance_spectrum, variance_db};
use wsqueeze::jsa::{BetaMatrix, JointAmplitude, SamplingGrid};
use wsqueeze::C64;

fn main() {
    let model = JointAmplitude::double_gaussian_cw(1.0).unwrap();
    let grid = SamplingGrid::centered(1.0, 30).unwrap();
    let beta = BetaMatrix::sample(&model, grid, C64::new(0.1, 0.0)).unwrap();
    let band = beta.grid.omega();

    println!("omega/band, variance(theta = 0), variance(theta = pi/2):");
    for i in 0..10 {
        let frac = 0.05 * i as f64;
        let omega = frac * band;
        let v0 = cw_variance_spectrum(&beta.values, 0.0, omega, &beta.grid).unwrap();
        let v1 = cw_variance_spectrum(
            &beta.values,
            std::f64::consts::FRAC_PI_2,
            omega,
            &beta.grid,
        )
        .unwrap();
        println!("  {frac:.2}   {v0:.6}   {v1:.6}");
    }

    // At the carrier the two phases sit symmetrically around shot noise.
    let v0 = cw_variance_spectrum(&beta.values, 0.0, 0.0, &beta.grid).unwrap();
    let v1 =
        cw_variance_spectrum(&beta.values, std::f64::consts::FRAC_PI_2, 0.0, &beta.grid).unwrap();
    println!("\nat the carrier:");
    println!("  squeezed     {:.4} ({:+.3} dB)", v1, variance_db(v1).unwrap());
    println!("  antisqueezed {:.4} ({:+.3} dB)", v0, variance_db(v0).unwrap());
    println!("  uncertainty product {:.6}", v0 * v1);
}
