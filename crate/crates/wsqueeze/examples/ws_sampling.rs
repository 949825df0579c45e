//! The sampling modes themselves: interpolating, orthonormal, and complete
//! for bandlimited signals.
//!
//! Run with `cargo run --example ws_sampling`.

use wsqueeze::wsdecomp::ws_mode;

fn main() {
    let tau = 1.0;

    // Each mode is 1/sqrt(tau) at its own sample time and zero at every
    // other one, so sampling a bandlimited field *is* a mode expansion.
    println!("mode n evaluated at sample time m (tau = {tau}):");
    for n in [-2i64, 0, 3] {
        for m in [-2i64, 0, 3] {
            let v = ws_mode(n, tau, m as f64 * tau);
            println!("  chi_{n:>2}({m:>2} tau) = {v:+.6}");
        }
    }

    // Orthonormality, checked by plain quadrature on a long interval. The
    // sinc tails die off like 1/t, so the truncation error shrinks slowly;
    // the point here is the structure, not spectral accuracy.
    let h = 0.05;
    let half = 2000.0;
    let steps = (2.0 * half / h) as i64;
    let mut gram = [[0.0_f64; 2]; 2];
    for i in 0..=steps {
        let t = -half + i as f64 * h;
        let v = [ws_mode(0, tau, t), ws_mode(5, tau, t)];
        for a in 0..2 {
            for b in 0..2 {
                gram[a][b] += v[a] * v[b] * h;
            }
        }
    }
    println!("\nquadrature Gram matrix of modes 0 and 5:");
    for row in gram {
        println!("  [{:+.6}, {:+.6}]", row[0], row[1]);
    }

    // Shannon reconstruction: a signal whose spectrum fits inside the band
    // is rebuilt exactly from its samples. This one occupies 80% of the
    // band, and the truncated sum converges as the window grows.
    let a = 0.4 * std::f64::consts::PI / tau;
    let f = |t: f64| {
        if t.abs() < 1e-12 {
            1.0
        } else {
            ((a * t).sin() / (a * t)).powi(2)
        }
    };
    println!("\nreconstruction error of a bandlimited test signal at t = 0.37:");
    let t = 0.37;
    for n_terms in [50i64, 200, 800, 3200] {
        let mut rec = 0.0;
        for n in -n_terms..=n_terms {
            rec += f(n as f64 * tau) * tau.sqrt() * ws_mode(n, tau, t);
        }
        println!("  |n| <= {n_terms:>4}: error = {:.3e}", (rec - f(t)).abs());
    }
}
