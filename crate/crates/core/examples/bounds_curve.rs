//! LOCC bound curves over one swap time, and the time a target fidelity
//! is reached.

use gravbench::bounds::{locc_bound, teleportation_bound, time_to_fidelity};
use gravbench::quantum_dynamics::swap_time;

fn main() -> gravbench::Result<()> {
    let gamma_g = 4.74e-4;
    let t_s = swap_time(gamma_g, 0);
    println!("swap time t_s = {t_s:.1} s");
    println!("{:>10} {:>12} {:>12} {:>12}", "t/t_s", "λ=1e-3", "λ=1e-2", "λ=1e-1");
    for k in 0..=10 {
        let t = t_s * k as f64 / 10.0;
        let row: Vec<String> = [1e-3, 1e-2, 1e-1]
            .iter()
            .map(|&l| format!("{:>12.6}", locc_bound(l, gamma_g, t)))
            .collect();
        println!("{:>10.1} {}", k as f64 / 10.0, row.join(" "));
    }
    for lambda in [1e-3, 1e-2, 1e-1] {
        println!("λ = {lambda:e}: teleportation floor {:.6}", teleportation_bound(lambda));
    }
    let t90 = time_to_fidelity(1e-3, 0.9, gamma_g)?;
    println!("bound falls to F = 0.9 at t = {t90:.1} s");
    Ok(())
}
