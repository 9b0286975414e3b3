//! Squeezing reaches the partner under the quantum beam splitter but not
//! under mean-field dynamics.

use gravbench::gaussian::SqueezingSpec;
use gravbench::quantum_dynamics::{squeezing_transfer_curve, CoupledPairParams};
use gravbench::sn_dynamics::{sn_reduced_mode2, SNParams};
use gravbench::Complex64;

fn main() -> gravbench::Result<()> {
    let pair = CoupledPairParams::reference();
    let sn = SNParams::from_pair(&pair, 1.0)?;
    let spec = SqueezingSpec::new(0.5, 0.3);
    let times: Vec<f64> = (0..=6).map(|k| pair.swap_time(0) * k as f64 / 6.0).collect();
    println!("{:>10} {:>12} {:>12}", "t [s]", "quantum", "SN");
    for (t, v) in squeezing_transfer_curve(spec, &pair, &times)? {
        let v_sn = sn_reduced_mode2(&sn, Complex64::new(0.0, 0.0), t).min_quadrature_variance(0)?;
        println!("{t:>10.1} {v:>12.8} {v_sn:>12.8}");
    }
    println!("e^(-2s)/2 = {:.8}", 0.5 * (-1.0f64).exp());
    Ok(())
}
