//! Gaussian state basics: the beam splitter, state swap, and overlaps.

use gravbench::gaussian::{beamsplitter_map, overlap_report, GaussianState, SqueezingSpec};
use gravbench::quantum_dynamics::{closed_evolve, CoupledPairParams};
use gravbench::Complex64;

fn main() -> gravbench::Result<()> {
    let alpha = Complex64::new(1.0, 0.5);
    let input = GaussianState::coherent(alpha).tensor(&GaussianState::vacuum(1));
    let bs = beamsplitter_map(std::f64::consts::FRAC_PI_4);
    println!("beam splitter symplectic error {:.1e}", bs.symplectic_error());
    let out = input.apply(&bs)?;
    println!(
        "50:50 output amplitudes {:.4} and {:.4}",
        out.amplitude(0)?,
        out.amplitude(1)?
    );

    let pair = CoupledPairParams::reference();
    let swapped = closed_evolve(&input, &pair, pair.swap_time(0))?;
    println!(
        "after one swap time mode 2 holds {:.6}",
        swapped.reduced_mode2.amplitude(0)?
    );

    let thermal = GaussianState::thermal(0.3)?;
    let squeezed = GaussianState::squeezed_vacuum(SqueezingSpec::new(0.6, 0.0));
    let r = overlap_report(&thermal, &squeezed)?;
    println!("Tr[ρ_th ρ_sq] = {:.6} (fidelity: {})", r.value, r.is_fidelity);
    Ok(())
}
