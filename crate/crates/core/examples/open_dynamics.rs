//! Damped, thermally driven evolution: the numeric Lyapunov pipeline next
//! to the closed-form open-vs-closed fidelity.

use gravbench::quantum_dynamics::{
    default_dt, fidelity_open_closed, fidelity_open_closed_numeric, CoupledPairParams, NoiseParams,
};
use gravbench::Complex64;

fn main() -> gravbench::Result<()> {
    let pair = CoupledPairParams::reference();
    let t_s = pair.swap_time(0);
    let times: Vec<f64> = (0..=8).map(|k| t_s * k as f64 / 8.0).collect();
    for gamma in [1e-13, 1e-12, 1.5e-12] {
        let noise = NoiseParams::new(gamma, 1e10, 0.1)?;
        let numeric =
            fidelity_open_closed_numeric(Complex64::new(1.5, -0.5), &pair, &noise, &times, default_dt(&pair))?;
        println!("γ = {gamma:e}");
        for (t, f) in times.iter().zip(&numeric) {
            let closed = fidelity_open_closed(&noise, gamma, *t);
            println!("  t = {t:>8.1} s  numeric {f:.9}  closed form {closed:.9}");
        }
    }
    Ok(())
}
