//! Restricting a stationary source to a finite detection window: how much
//! coupling the cut neglects, how many pairs the window holds, and what the
//! continuous-time covariance looks like.
//!
//! Run with `cargo run --example window_and_pairs`.

use wsqueeze::jsa::{BetaMatrix, JointAmplitude, SamplingGrid};
use wsqueeze::matcalc::{moments, Regime};
use wsqueeze::wsdecomp::{covariance, pair_count, window_partition, CovariancePoint, WindowSpec};
use wsqueeze::C64;

fn main() {
    let model = JointAmplitude::double_gaussian_cw(1.0).unwrap();
    let grid = SamplingGrid::centered(1.0, 60).unwrap();
    let beta = BetaMatrix::sample(&model, grid, C64::new(0.2, 0.0)).unwrap();

    // The sampled matrix is banded, so a window only talks to its edges:
    // the neglected coupling stays pinned at the boundary scale while the
    // pairs inside grow linearly with the window.
    println!("window size, neglected coupling, mean pairs inside:");
    for size in [10usize, 20, 40, 80] {
        let spec = WindowSpec::new(0.0, size).unwrap();
        let (block, neglected) = window_partition(&beta, &spec).unwrap();
        let pairs = pair_count(&block).unwrap();
        println!("  {size:>3}   {neglected:.3e}   {pairs:.6}");
    }

    // Pairs per sample approach a constant: the stationary pair rate.
    let spec = WindowSpec::new(0.0, 100).unwrap();
    let (block, _) = window_partition(&beta, &spec).unwrap();
    println!(
        "\npair rate per sample time at size 100: {:.6}",
        pair_count(&block).unwrap() / 100.0
    );

    // Mode-space moments reconstruct continuous-time covariances anywhere,
    // including between sample points.
    let mom = moments(&beta.values, Regime::Nondegenerate).unwrap();
    println!("\nsignal autocovariance N(t, t') along a time slice:");
    for dt in [0.0, 0.5, 1.0, 2.0, 4.0] {
        if let CovariancePoint::Nondegenerate { n_a, .. } =
            covariance(&mom, &beta.grid, 0.0, dt)
        {
            println!("  t' - t = {dt:.1}: {:.6e}", n_a.re);
        }
    }
}
