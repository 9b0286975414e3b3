//! Truncated-Fock cross-checks: overlaps, beam-splitter marginals, and the
//! norm of the quadrature-assembled A_τ.

use gravbench::bounds::amplification_bound;
use gravbench::fock_oracle::{
    build_a_tau, coherent_ket, fock_coherent, fock_overlap, fock_rwa_unitary, fock_squeezed, reduced_from_ket,
    total_variation,
};
use gravbench::gaussian::{beamsplitter_map, overlap, GaussianState, SqueezingSpec};
use gravbench::Complex64;

fn main() -> gravbench::Result<()> {
    let alpha = Complex64::new(0.8, -0.4);
    let spec = SqueezingSpec::new(0.4, 1.0);
    let gauss = overlap(&GaussianState::coherent(alpha), &GaussianState::squeezed_vacuum(spec))?;
    let fock = fock_overlap(&fock_coherent(alpha, 60)?, &fock_squeezed(spec, 60)?)?;
    println!("coherent·squeezed overlap: Gaussian {gauss:.12}, Fock {fock:.12}");

    let theta = 0.7;
    let dim = 30;
    let input = coherent_ket(alpha, dim).kronecker(&coherent_ket(Complex64::new(0.0, 0.0), dim));
    let out = reduced_from_ket(&(&fock_rwa_unitary(theta, dim)?.matrix * input), dim, 1)?;
    let g_out = GaussianState::coherent(alpha)
        .tensor(&GaussianState::vacuum(1))
        .apply(&beamsplitter_map(theta))?
        .partial_trace(1)?;
    // The Gaussian marginal is coherent, so its photon statistics are Poisson.
    let expected = fock_coherent(g_out.amplitude(0)?, dim)?.photon_distribution();
    println!(
        "beam-splitter mode-2 photon statistics, total variation {:.2e}",
        total_variation(&out.photon_distribution(), &expected)
    );

    for (lambda, g) in [(0.5, 0.5), (1.0, 0.9)] {
        let a = build_a_tau(lambda, g, 40, 64, 64)?;
        println!(
            "A_τ(λ = {lambda}, g = {g}): max eigenvalue {:.10}, closed form {:.10}",
            a.max_eigenvalue(),
            amplification_bound(lambda, g)?
        );
    }
    Ok(())
}
