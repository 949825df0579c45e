//! The acceptance gate: one test per stated criterion, each printing a
//! single pass/fail verdict. Failing tests panic with the measured value so
//! the verdict is auditable.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;
use wsqueeze::coincidence::{
    coincidence_probs, pair_distribution, pair_probability, weak_window_probs, DetectorModel,
};
use wsqueeze::fock;
use wsqueeze::hom::{hom_dip_curve, hom_max_from_matrix, hom_probability};
use wsqueeze::homodyne::{charge_variance_extrema, cw_variance_spectrum, variance_db};
use wsqueeze::jsa::{oversample, BetaMatrix, JointAmplitude, SamplingGrid};
use wsqueeze::matcalc::{moments, BetaSvd, MomentSet, Regime};
use wsqueeze::wsdecomp::{pair_count, WindowSpec};
use wsqueeze::C64;

/// Random complex matrix with max modulus `amp`, deterministic in the seed.
fn random_beta(rng: &mut ChaCha8Rng, dim: usize, amp: f64) -> Array2<C64> {
    let raw = Array2::from_shape_fn((dim, dim), |_| {
        C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    let max = raw.iter().map(|v| v.norm()).fold(0.0_f64, f64::max);
    raw.mapv(|v| v * (amp / max))
}

/// The shared random matrix set: 20 draws cycling through dimensions 1-3,
/// peak modulus at most 0.3 (scaled down with dimension so the truncated
/// simulator keeps its tail below the comparison tolerances).
fn beta_set() -> Vec<Array2<C64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(424242);
    (0..20)
        .map(|trial| {
            let dim = 1 + trial % 3;
            let amp = 0.3 / dim as f64 * (0.4 + 0.6 * rng.gen::<f64>());
            random_beta(&mut rng, dim, amp)
        })
        .collect()
}

fn max_entry_err(x: &Array2<C64>, y: &Array2<C64>) -> f64 {
    x.iter()
        .zip(y.iter())
        .map(|(u, v)| (u - v).norm())
        .fold(0.0_f64, f64::max)
}

fn cw_block(beta_circ: f64, size: usize) -> BetaMatrix {
    let model = JointAmplitude::double_gaussian_cw(1.0).unwrap();
    let half = (size as i64 - 1) / 2 + 1;
    let grid = SamplingGrid::new(1.0, -half, size as i64 - half - 1).unwrap();
    assert_eq!(grid.len(), size);
    BetaMatrix::sample(&model, grid, C64::new(beta_circ, 0.0)).unwrap()
}

#[test]
fn acceptance_01_moments_match_brute_force() {
    let start = Instant::now();
    let mut worst = 0.0_f64;
    for beta in beta_set() {
        let state = fock::build_squeezed_state(&beta, 8).unwrap();
        let brute = fock::oracle_moments(&state);
        let formula = moments(&beta, Regime::Nondegenerate).unwrap();
        if let (
            MomentSet::Nondegenerate { n_a, n_b, m_ab },
            MomentSet::Nondegenerate { n_a: oa, n_b: ob, m_ab: om },
        ) = (&formula, &brute)
        {
            worst = worst
                .max(max_entry_err(n_a, oa))
                .max(max_entry_err(n_b, ob))
                .max(max_entry_err(m_ab, om));
        } else {
            panic!("criterion 1: FAIL - unexpected moment layout");
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(
        worst <= 1e-6,
        "criterion 1: FAIL - worst moment error {worst:.3e} > 1e-6"
    );
    assert!(
        elapsed < 60.0,
        "criterion 1: FAIL - runtime {elapsed:.1} s exceeds 60 s"
    );
    println!("criterion 1: PASS (worst error {worst:.3e}, {elapsed:.1} s)");
}

#[test]
fn acceptance_02_pair_statistics_match_brute_force() {
    let mut worst = 0.0_f64;
    let mut worst_complete = 0.0_f64;
    for beta in beta_set() {
        let dim = beta.nrows();
        let state = fock::build_squeezed_state(&beta, 8).unwrap();
        let brute = fock::oracle_pair_probs(&state, dim * 8);
        for s in 0..=4 {
            let p = pair_probability(&beta, s).unwrap();
            worst = worst.max((p - brute.prob(s)).abs());
        }
        // The pair projectors partition the truncated space: their
        // probabilities sum to the retained norm, and together with the
        // removed tail they account for every bit of probability.
        let total: f64 = brute.probs().iter().sum();
        worst_complete = worst_complete
            .max((total - state.norm_sqr()).abs())
            .max((total + state.leakage() - 1.0).abs());
    }
    assert!(
        worst <= 1e-6,
        "criterion 2: FAIL - worst pair probability error {worst:.3e} > 1e-6"
    );
    assert!(
        worst_complete <= 1e-10,
        "criterion 2: FAIL - completeness defect {worst_complete:.3e} > 1e-10"
    );
    println!("criterion 2: PASS (pair error {worst:.3e}, completeness {worst_complete:.3e})");
}

#[test]
fn acceptance_03_scalar_charge_variance_closed_form() {
    let mut worst = 0.0_f64;
    for r in [0.1, 0.5, 1.0] {
        let beta = Array2::from_elem((1, 1), C64::new(r, 0.0));
        let mom = moments(&beta, Regime::Degenerate).unwrap();
        let res = charge_variance_extrema(&mom).unwrap();
        worst = worst
            .max((res.sigma2_min - (-2.0 * r).exp()).abs())
            .max((res.sigma2_max - (2.0 * r).exp()).abs());
    }
    assert!(
        worst <= 1e-10,
        "criterion 3: FAIL - worst deviation from e^(+/-2r) is {worst:.3e} > 1e-10"
    );
    println!("criterion 3: PASS (worst deviation {worst:.3e})");
}

#[test]
fn acceptance_04_db_linearity_and_spectrum_bound() {
    let strengths: Vec<f64> = (0..15).map(|i| 0.02 + 0.28 * i as f64 / 14.0).collect();
    let mut dbs = Vec::new();
    for &b in &strengths {
        let beta = cw_block(b, 60);
        let mom = moments(&beta.values, Regime::Degenerate).unwrap();
        let res = charge_variance_extrema(&mom).unwrap();
        dbs.push(variance_db(res.sigma2_min).unwrap());

        // The best sideband variance of a stationary measurement cannot
        // beat the best variance over all local-oscillator shapes.
        let spectral = cw_variance_spectrum(
            &beta.values,
            std::f64::consts::FRAC_PI_2,
            0.0,
            &beta.grid,
        )
        .unwrap();
        assert!(
            spectral >= res.sigma2_min - 1e-12,
            "criterion 4: FAIL - spectrum {spectral:.6e} beats optimum {:.6e} at strength {b}",
            res.sigma2_min
        );
    }
    let n = strengths.len() as f64;
    let mx = strengths.iter().sum::<f64>() / n;
    let my = dbs.iter().sum::<f64>() / n;
    let sxy: f64 = strengths.iter().zip(&dbs).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = strengths.iter().map(|x| (x - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let ss_res: f64 = strengths
        .iter()
        .zip(&dbs)
        .map(|(x, y)| (y - (my + slope * (x - mx))).powi(2))
        .sum();
    let ss_tot: f64 = dbs.iter().map(|y| (y - my).powi(2)).sum();
    let r2 = 1.0 - ss_res / ss_tot;
    assert!(
        r2 >= 0.999,
        "criterion 4: FAIL - R^2 of dB vs strength is {r2:.6} < 0.999"
    );
    println!("criterion 4: PASS (R^2 = {r2:.6}, slope {slope:.3} dB per unit strength)");
}

#[test]
fn acceptance_05_unit_efficiency_closed_form() {
    let det = DetectorModel::new(1.0).unwrap().with_truncation(250, 1e-12);
    let mut worst = 0.0_f64;
    for b in [0.1, 0.3, 0.5] {
        let beta = cw_block(b, 60);
        let det_w = BetaSvd::new(&beta.values).unwrap().det_sech();
        let probs = coincidence_probs(&beta.values, &det).unwrap();
        let click = 1.0 - det_w * det_w;
        worst = worst
            .max((probs.hh - click).abs())
            .max((probs.hv - click * click).abs());
    }
    assert!(
        worst <= 1e-8,
        "criterion 5: FAIL - worst deviation from the determinant forms {worst:.3e} > 1e-8"
    );
    println!("criterion 5: PASS (worst deviation {worst:.3e})");
}

#[test]
fn acceptance_06_weak_detector_scalar_reduction() {
    let alpha = 1e-3;
    let det = DetectorModel::new(alpha).unwrap().with_truncation(60, 1e-14);
    let mut worst = 0.0_f64;
    // Up to mean pair number sinh^2 = 0.5 exactly.
    for b in [0.3, 0.5, 0.5_f64.sqrt().asinh()] {
        let beta = Array2::from_elem((1, 1), C64::new(b, 0.0));
        let probs = coincidence_probs(&beta, &det).unwrap();
        let mu = 2.0 * b.sinh().powi(2);
        let hh_ref = alpha * alpha * (mu / 2.0 + mu * mu / 2.0);
        let hv_ref = alpha * alpha * mu * mu / 4.0;
        let hh_dev = (probs.hh - hh_ref).abs() / hh_ref;
        let hv_dev = (probs.hv - hv_ref).abs() / hv_ref;
        println!(
            "sinh^2 = {:.4}: same-polarization dev {hh_dev:.4e}, crossed dev {hv_dev:.4e}",
            b.sinh().powi(2)
        );
        worst = worst.max(hh_dev).max(hv_dev);
    }
    assert!(
        worst <= 1e-3,
        "criterion 6: FAIL - worst relative deviation {worst:.4e} > 1e-3; the exact \
         threshold-detector sums differ from the leading-order reference by the discarded \
         third-order efficiency terms, relative alpha*N*(4+6N)/(1+2N) with N = sinh^2 for \
         the same-polarization probability, which is 1.75e-3 at N = 0.5 for this efficiency; \
         the bound only holds up to N of about 0.27"
    );
    println!("criterion 6: PASS (worst relative deviation {worst:.4e})");
}

#[test]
fn acceptance_07_weak_window_residual_is_cubic() {
    let alpha = 0.5;
    let det = DetectorModel::new(alpha).unwrap().with_truncation(40, 1e-14);
    // Calibrate the strength to hit the target pair numbers exactly.
    let strength_for = |target: f64| -> f64 {
        let (mut lo, mut hi) = (1e-4_f64, 0.1_f64);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            let n = pair_count(&cw_block(mid, 120).values).unwrap();
            if n < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let residual_at = |target: f64| -> f64 {
        let beta = cw_block(strength_for(target), 120);
        let n_j = pair_count(&beta.values).unwrap();
        let exact = coincidence_probs(&beta.values, &det).unwrap();
        let series = weak_window_probs(n_j, alpha).unwrap();
        (exact.hh - series.hh).abs().max((exact.hv - series.hv).abs())
    };
    let big = residual_at(0.02);
    let small = residual_at(0.01);
    let ratio = big / small;
    assert!(
        ratio >= 7.0,
        "criterion 7: FAIL - halving the pair number shrinks the residual by {ratio:.2}x < 7x"
    );
    println!("criterion 7: PASS (residual ratio {ratio:.2}x, cubic predicts 8x)");
}

#[test]
fn acceptance_08_interference_closed_forms() {
    // Symmetric kernel at zero delay: the determinant form is exact.
    let model = JointAmplitude::double_gaussian_pulsed(5.0, 1.0).unwrap();
    let grid = SamplingGrid::centered(1.0, 20).unwrap();
    let beta = BetaMatrix::sample(&model, grid, C64::new(0.3, 0.0)).unwrap();
    let svd = BetaSvd::new(&beta.values).unwrap();
    let t = svd.fn_of_q_times_unitary(f64::tanh);
    let p0 = hom_probability(t.view(), svd.det_sech()).unwrap();
    let closed0 = (1.0 - svd.det_sech()).powi(2);
    assert!(
        (p0 - closed0).abs() <= 1e-10,
        "criterion 8: FAIL - zero-delay probability {p0:.12e} vs closed form {closed0:.12e}"
    );

    // Pulsed separated limit matches the end of an explicit delay sweep.
    let window = WindowSpec::new(0.0, 81).unwrap();
    let curve = hom_dip_curve(&model, C64::new(0.3, 0.0), &window, 1, -30..=30).unwrap();
    let edge = *curve.probs.last().unwrap();
    assert!(
        (edge - curve.p_max).abs() <= 1e-6,
        "criterion 8: FAIL - plateau {edge:.9e} vs separated closed form {:.9e}",
        curve.p_max
    );

    // Brute force on a small random two-beam state, overlapped and separated.
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let raw = random_beta(&mut rng, 2, 0.15);
    let sym = (&raw + &raw.t()).mapv(|v| 0.5 * v);
    let state = fock::build_squeezed_state(&sym, 8).unwrap();
    let svd2 = BetaSvd::new(&sym).unwrap();
    let t2 = svd2.fn_of_q_times_unitary(f64::tanh);
    let analytic0 = hom_probability(t2.view(), svd2.det_sech()).unwrap();
    let brute0 = fock::oracle_hom(&state, 0, 4).unwrap();
    let analytic_sep = hom_max_from_matrix(sym.view()).unwrap();
    let brute_sep = fock::oracle_hom(&state, 4, 6).unwrap();
    let worst = (analytic0 - brute0).abs().max((analytic_sep - brute_sep).abs());
    assert!(
        worst <= 1e-5,
        "criterion 8: FAIL - brute-force interference deviation {worst:.3e} > 1e-5"
    );
    println!("criterion 8: PASS (closed forms and brute force agree)");
}

/// Dip curve for the long-pulse model at tenfold refinement. The window
/// covers the pulse; the minimum of a symmetric kernel sits at zero delay,
/// and the separated value has a closed form, so three delays suffice.
fn fine_dip_floor(beta_circ: f64) -> f64 {
    let model = JointAmplitude::double_gaussian_pulsed(10.0, 1.0).unwrap();
    let window = WindowSpec::new(0.0, 561).unwrap();
    let curve = hom_dip_curve(&model, C64::new(beta_circ, 0.0), &window, 10, -1..=1).unwrap();
    curve.p_min / curve.p_max
}

#[test]
fn acceptance_09a_weak_source_dip_floor() {
    let floor = fine_dip_floor(0.05);
    assert!(
        floor < 1e-3,
        "criterion 9a: FAIL - normalized dip minimum {floor:.4e} >= 1e-3 at strength 0.05 \
         (the windowed floor scales linearly with the mean pair number, \
         about half of it, which is 2.5e-2 here)"
    );
    println!("criterion 9a: PASS (normalized floor {floor:.4e})");
}

#[test]
fn acceptance_09b_strong_source_dip_floor() {
    let floor = fine_dip_floor(1.0);
    assert!(
        floor > 0.1,
        "criterion 9b: FAIL - normalized dip minimum {floor:.4e} <= 0.1 at strength 1.0"
    );
    println!("criterion 9b: PASS (normalized floor {floor:.4e})");
}

fn dip_visibility(ratio: f64, beta_circ: f64) -> f64 {
    let model = JointAmplitude::double_gaussian_pulsed(ratio, 1.0).unwrap();
    let window = WindowSpec::new(0.0, 151).unwrap();
    hom_dip_curve(&model, C64::new(beta_circ, 0.0), &window, 2, -1..=1)
        .unwrap()
        .visibility
}

#[test]
fn acceptance_09c_visibility_decreases_with_strength() {
    let strengths = [0.05, 0.2, 0.5, 1.0];
    let vis: Vec<f64> = strengths.iter().map(|&b| dip_visibility(10.0, b)).collect();
    for pair in vis.windows(2) {
        assert!(
            pair[1] < pair[0],
            "criterion 9c: FAIL - visibility not strictly decreasing: {vis:?}"
        );
    }
    println!("criterion 9c: PASS (visibilities {vis:?})");
}

#[test]
fn acceptance_09d_visibility_favors_short_pulses() {
    let short = dip_visibility(5.0, 0.5);
    let long = dip_visibility(15.0, 0.5);
    assert!(
        short > long,
        "criterion 9d: FAIL - visibility {short:.4} at ratio 5 not above {long:.4} at ratio 15"
    );
    println!("criterion 9d: PASS (ratio 5: {short:.4}, ratio 15: {long:.4})");
}

#[test]
fn acceptance_10_refinement_invariance() {
    let model = JointAmplitude::double_gaussian_pulsed(10.0, 1.0).unwrap();
    // The same physical span sampled at three refinements.
    let observe = |k: u32| -> (f64, f64) {
        let coarse = SamplingGrid::centered(1.0, 30).unwrap();
        let (grid, scale) = oversample(&model, &coarse, k).unwrap();
        let beta =
            BetaMatrix::sample(&model, grid, C64::new(0.1 * scale, 0.0)).unwrap();
        let svd = BetaSvd::new(&beta.values).unwrap();
        let t = svd.fn_of_q_times_unitary(f64::tanh);
        let p0 = hom_probability(t.view(), svd.det_sech()).unwrap();
        (pair_count(&beta.values).unwrap(), p0)
    };
    let (n1, p1) = observe(1);
    let (n2, p2) = observe(2);
    let (n4, p4) = observe(4);

    // Successive refinements converge extremely fast once the kernel's
    // spectral tail is inside the band.
    let fine_n = (n2 - n4).abs() / n4;
    let fine_p = (p2 - p4).abs() / p4;
    println!("refinement 2 -> 4: pair number moves {fine_n:.3e}, zero-delay probability {fine_p:.3e}");
    assert!(fine_n < 1e-3 && fine_p < 1e-3);

    let dev_n = (n1 - n2).abs() / n2;
    let dev_p = (p1 - p2).abs() / p2;
    assert!(
        dev_n <= 1e-3 && dev_p <= 1e-3,
        "criterion 10: FAIL - base sampling vs twofold refinement moves the pair number by \
         {dev_n:.3e} and the zero-delay probability by {dev_p:.3e} (> 1e-3); the sampled \
         Gaussian kernel is not strictly bandlimited and its alias weight 2e^(-2pi) = 3.7e-3 \
         sets exactly this gap"
    );
    println!("criterion 10: PASS (deviations {dev_n:.3e}, {dev_p:.3e})");
}

#[test]
fn acceptance_11_distribution_mass_and_monotonicity() {
    let model = JointAmplitude::double_gaussian_pulsed(10.0, 1.0).unwrap();
    let grid = SamplingGrid::centered(1.0, 40).unwrap();
    let mut means = Vec::new();
    for b in [0.1, 0.3, 0.5, 0.7, 1.0] {
        let beta = BetaMatrix::sample(&model, grid.clone(), C64::new(b, 0.0)).unwrap();
        let dist = pair_distribution(&beta.values, 300).unwrap();
        let total: f64 = dist.probs().iter().sum();
        assert!(
            (1.0 - 1e-10..=1.0 + 1e-12).contains(&total),
            "criterion 11: FAIL - distribution mass {total:.15} outside [1-1e-10, 1] at strength {b}"
        );
        let mean: f64 = dist
            .probs()
            .iter()
            .enumerate()
            .map(|(s, &p)| s as f64 * p)
            .sum();
        means.push(mean);
    }
    for pair in means.windows(2) {
        assert!(
            pair[1] > pair[0],
            "criterion 11: FAIL - mean pair number not increasing: {means:?}"
        );
    }
    println!("criterion 11: PASS (means {means:?})");
}
