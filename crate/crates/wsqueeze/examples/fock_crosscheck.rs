//! The whole point of the brute-force simulator: every matrix formula in
//! the library can be checked against direct truncated-basis quantum
//! mechanics on small inputs. This runs the comparison on one random
//! matrix and prints the errors.
//!
//! Run with `cargo run --example fock_crosscheck`.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wsqueeze::coincidence::pair_distribution;
use wsqueeze::fock;
use wsqueeze::hom::{hom_max_from_matrix, hom_probability};
use wsqueeze::matcalc::{moments, BetaSvd, MomentSet, Regime};
use wsqueeze::C64;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let beta = Array2::from_shape_fn((2, 2), |_| {
        C64::new(rng.gen_range(-0.15..0.15), rng.gen_range(-0.15..0.15))
    });
    println!("random squeezing matrix:");
    for row in beta.rows() {
        println!("  [{:+.4}{:+.4}i, {:+.4}{:+.4}i]", row[0].re, row[0].im, row[1].re, row[1].im);
    }

    let state = fock::build_squeezed_state(&beta, 10).unwrap();
    println!(
        "\ntruncated state: {} amplitudes, leakage {:.3e}",
        state.amplitudes().len(),
        state.leakage()
    );

    // Second moments.
    let analytic = moments(&beta, Regime::Nondegenerate).unwrap();
    let brute = fock::oracle_moments(&state);
    if let (
        MomentSet::Nondegenerate { n_a, n_b, m_ab },
        MomentSet::Nondegenerate { n_a: oa, n_b: ob, m_ab: om },
    ) = (&analytic, &brute)
    {
        let err = |x: &Array2<C64>, y: &Array2<C64>| {
            x.iter()
                .zip(y.iter())
                .map(|(u, v)| (u - v).norm())
                .fold(0.0_f64, f64::max)
        };
        println!("\nmoment errors (analytic vs brute force):");
        println!("  signal numbers   {:.3e}", err(n_a, oa));
        println!("  idler numbers    {:.3e}", err(n_b, ob));
        println!("  anomalous block  {:.3e}", err(m_ab, om));
    }

    // Pair-number distribution.
    let dist = pair_distribution(&beta, 5).unwrap();
    let brute_dist = fock::oracle_pair_probs(&state, 5);
    let pair_err = (0..=5)
        .map(|s| (dist.prob(s) - brute_dist.prob(s)).abs())
        .fold(0.0_f64, f64::max);
    println!("  pair distribution {:.3e}", pair_err);

    // Interference at zero delay and at full separation.
    let svd = BetaSvd::new(&beta).unwrap();
    let t = svd.fn_of_q_times_unitary(f64::tanh);
    let overlapped = hom_probability(t.view(), svd.det_sech()).unwrap();
    let separated = hom_max_from_matrix(beta.view()).unwrap();
    println!("  overlapped beams  {:.3e}", (overlapped - fock::oracle_hom(&state, 0, 4).unwrap()).abs());
    println!("  separated beams   {:.3e}", (separated - fock::oracle_hom(&state, 4, 6).unwrap()).abs());
}
