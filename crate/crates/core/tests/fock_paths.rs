use gravbench::bounds::amplification_bound;
use gravbench::fock_oracle::{
    a_tau_rank_one_sum, build_a_tau, coherent_ket, fock_beamsplitter, fock_rwa_unitary, fock_squeezed, fock_thermal,
    reduced_from_ket, squeezed_ket, total_variation, FockOperator,
};
use gravbench::gaussian::SqueezingSpec;
use gravbench::Complex64;

#[test]
fn thermal_input_splits_into_attenuated_thermal() {
    let (dim, nbar) = (24, 0.5);
    let vac = fock_thermal(0.0, dim).unwrap();
    let input = fock_thermal(nbar, dim).unwrap().tensor(&vac).unwrap();
    for theta in [0.3, 0.9, std::f64::consts::FRAC_PI_2] {
        let u = fock_beamsplitter(theta, dim).unwrap();
        let out = input.conjugate_by(&u).unwrap();
        assert!(out.hermiticity_error() < 1e-12);
        assert!((out.trace().re - input.trace().re).abs() < 1e-10);
        let mode2 = out.partial_trace(1).unwrap();
        let expected = fock_thermal(nbar * theta.sin().powi(2), dim).unwrap();
        let diff = (&mode2.matrix - &expected.matrix).camax();
        assert!(diff < 1e-9, "θ = {theta}: {diff}");
    }
}

fn mode2_distribution(u: &FockOperator, ket: &nalgebra::DVector<Complex64>, dim: usize) -> Vec<f64> {
    reduced_from_ket(&(&u.matrix * ket), dim, 1)
        .unwrap()
        .photon_distribution()
}

#[test]
fn real_and_rwa_splitters_give_equal_photon_statistics() {
    // The generators differ by a phase rotation of mode 1. With mode 2 in
    // vacuum that rotation only moves the phase of the output, which photon
    // counting cannot see.
    let dim = 30;
    let vac = coherent_ket(Complex64::new(0.0, 0.0), dim);
    let inputs = [
        coherent_ket(Complex64::new(1.1, 0.6), dim).kronecker(&vac),
        squeezed_ket(SqueezingSpec::new(0.5, 0.4), dim).kronecker(&vac),
    ];
    for theta in [0.2, 0.8, 1.3] {
        let real = fock_beamsplitter(theta, dim).unwrap();
        let rwa = fock_rwa_unitary(theta, dim).unwrap();
        for ket in &inputs {
            let tv = total_variation(
                &mode2_distribution(&real, ket, dim),
                &mode2_distribution(&rwa, ket, dim),
            );
            assert!(tv < 1e-10, "θ = {theta}: {tv}");
        }
    }
}

#[test]
fn ket_and_density_routes_agree() {
    let dim = 12;
    let ket = squeezed_ket(SqueezingSpec::new(0.3, 0.0), dim).kronecker(&coherent_ket(Complex64::new(0.4, -0.2), dim));
    let u = fock_rwa_unitary(0.6, dim).unwrap();
    let rho = FockOperator::from_ket(&ket, dim, 2).unwrap().conjugate_by(&u).unwrap();
    let evolved = &u.matrix * &ket;
    for keep in [0, 1] {
        let dense = rho.partial_trace(keep).unwrap();
        let fast = reduced_from_ket(&evolved, dim, keep).unwrap();
        assert!((&dense.matrix - &fast.matrix).camax() < 1e-13);
    }
}

#[test]
fn squeezed_state_trace_converges_with_dimension() {
    let spec = SqueezingSpec::new(0.8, 0.0);
    let mut prev = 0.0;
    assert!(fock_squeezed(spec, 30).is_err());
    for dim in [60, 80, 100] {
        let s = fock_squeezed(spec, dim).unwrap();
        let err = (s.trace().re - 1.0).abs();
        assert!(dim == 60 || err <= prev + 1e-15);
        prev = err;
    }
    assert!(prev < 1e-10);
}

#[test]
fn a_tau_eigenvalue_converges_over_dimensions() {
    let (lambda, g) = (0.5, 0.5);
    let bound = amplification_bound(lambda, g).unwrap();
    let errors: Vec<f64> = [10, 20, 30, 40]
        .into_iter()
        .map(|dim| {
            let a = build_a_tau(lambda, g, dim, 64, 64).unwrap();
            (a.max_eigenvalue_complete_blocks() - bound).abs() / bound
        })
        .collect();
    assert!(errors.iter().all(|&e| e < 1e-6), "{errors:?}");
    let a = build_a_tau(lambda, g, 40, 64, 64).unwrap();
    assert!((a.vacuum_element() - bound).abs() < 1e-10);
}

#[test]
fn block_assembly_matches_rank_one_sum() {
    let (lambda, g, dim) = (0.7, 0.8, 8);
    let blocks = build_a_tau(lambda, g, dim, 48, 48).unwrap().to_dense();
    let literal = a_tau_rank_one_sum(lambda, g, dim, 48, 48).unwrap();
    let diff = (&blocks.matrix - &literal.matrix).camax();
    assert!(diff < 1e-8, "{diff}");
}
