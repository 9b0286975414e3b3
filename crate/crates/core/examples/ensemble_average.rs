//! Reproducible Monte-Carlo prior averages against the closed form.

use gravbench::ensemble::{gaussian_average, mc_average_fidelity, PriorEnsemble};
use gravbench::Complex64;

fn main() -> gravbench::Result<()> {
    let lambda = 0.2;
    let (c1, c2) = (Complex64::new(0.3, 0.1), Complex64::new(-0.1, 0.25));
    let exact = gaussian_average(c1, c2, lambda)?;
    let kernel = |a: Complex64| (-(c1 * a + c2 * a.conj()).norm_sqr()).exp();
    for n in [1_000, 10_000, 100_000] {
        let est = mc_average_fidelity(kernel, &PriorEnsemble::new(lambda, 11)?, n)?;
        println!(
            "n = {n:>6}: {:.6} ± {:.6}  (exact {exact:.6}, {:.2} σ)",
            est.mean,
            est.stderr,
            (est.mean - exact).abs() / est.stderr
        );
    }
    Ok(())
}
