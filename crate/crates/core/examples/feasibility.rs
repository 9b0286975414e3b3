//! Feasibility report for the reference osmium mirror pair, with both
//! geometric-factor presets.

use gravbench::experiment::{
    feasibility_report, interaction_strength, EnvironmentSpec, MirrorSpec, LAMBDA_GEOMETRIC_TEXT,
};

fn main() -> gravbench::Result<()> {
    let mirror = MirrorSpec::reference();
    let report = feasibility_report(&mirror, &EnvironmentSpec::reference(), 1e-3, 0.9)?;
    print!("{report}");
    let alt = interaction_strength(&mirror.with_geometric_factor(LAMBDA_GEOMETRIC_TEXT), 1e-2)?;
    println!("with Λ = 2 instead: γ_g = {:.4e} rad/s", alt.gamma_g);
    Ok(())
}
