//! Schrödinger–Newton fidelity against the LOCC bound, analytic and Monte
//! Carlo, with the window where the bound is violated.

use gravbench::bounds::{crossing_window_fn, locc_bound};
use gravbench::quantum_dynamics::CoupledPairParams;
use gravbench::sn_dynamics::{sn_quantum_fidelity, FidelityMethod, SNParams};

fn main() -> gravbench::Result<()> {
    let lambda = 1e-3;
    let pair = CoupledPairParams::reference();
    let sn = SNParams::from_pair(&pair, 1.0)?;
    let t_end = 2.0 * pair.swap_time(0);
    let times: Vec<f64> = (0..=2000).map(|k| t_end * k as f64 / 2000.0).collect();

    let analytic = |t: f64| {
        sn_quantum_fidelity(&sn, &pair, lambda, t, FidelityMethod::Analytic)
            .map(|e| e.value)
            .unwrap_or(f64::NAN)
    };
    match crossing_window_fn(|t| analytic(t) - locc_bound(lambda, pair.gamma_g, t), &times) {
        Some(w) => {
            println!(
                "F_SN > F_cl for γ_g t in [{:.4}, {:.4}]",
                w.start * pair.gamma_g,
                w.end * pair.gamma_g
            );
            let mid = 0.5 * (w.start + w.end);
            let mc = sn_quantum_fidelity(
                &sn,
                &pair,
                lambda,
                mid,
                FidelityMethod::MonteCarlo { n: 100_000, seed: 7 },
            )?;
            println!(
                "at the window centre: analytic {:.5}, Monte Carlo {:.5} ± {:.5}, bound {:.5}",
                analytic(mid),
                mc.value,
                mc.stderr,
                locc_bound(lambda, pair.gamma_g, mid)
            );
        }
        None => println!("no violation on this grid"),
    }
    Ok(())
}
