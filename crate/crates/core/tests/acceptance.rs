//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Runs without the libtest harness so the lines are
//! always printed.

use std::f64::consts::PI;
use std::fs;
use std::time::{Duration, Instant};

use gravbench::bounds::{locc_bound, time_to_fidelity};
use gravbench::experiment::{
    interaction_strength, nbar_max, t_eff_for_nbar, MirrorSpec, LAMBDA_GEOMETRIC_PRINTED, LAMBDA_GEOMETRIC_TEXT,
};
use gravbench::fock_oracle::{
    build_a_tau, coherent_ket, fock_coherent, fock_overlap, fock_rwa_unitary, fock_squeezed, fock_thermal,
    reduced_from_ket, total_variation, FockOperator,
};
use gravbench::gaussian::{beamsplitter_map, overlap, GaussianState, SqueezingSpec};
use gravbench::quantum_dynamics::{
    default_dt, fidelity_open_closed, fidelity_open_closed_numeric, squeezing_transfer_curve, swap_time,
    CoupledPairParams, NoiseParams,
};
use gravbench::sn_dynamics::{
    coherent_initial_moments, moments_coherent_init, moments_zero_init, sn_quantum_fidelity, sn_reduced_mode2,
    FidelityMethod, SNParams,
};
use gravbench::{cli, Complex64};

struct Outcome {
    pass: bool,
    detail: String,
}

fn grid(t_end: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| t_end * k as f64 / (n - 1) as f64).collect()
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn locc_curves() -> Outcome {
    let gamma_g = 4.74e-4;
    let t_s = swap_time(gamma_g, 0);
    let lambdas = [1e-3, 1e-2, 1e-1];
    let mut worst: f64 = 0.0;
    for &l in &lambdas {
        worst = worst.max((locc_bound(l, gamma_g, 0.0) - 1.0).abs());
        worst = worst.max((locc_bound(l, gamma_g, t_s) - (1.0 + l) / (2.0 + l)).abs());
    }
    let times = grid(t_s, 201);
    let ordered = times.iter().all(|&t| {
        lambdas
            .windows(2)
            .all(|w| locc_bound(w[0], gamma_g, t) <= locc_bound(w[1], gamma_g, t))
    });
    Outcome {
        pass: worst < 1e-12 && ordered,
        detail: format!("endpoint error {worst:.1e}, ordered by λ: {ordered}"),
    }
}

fn run_time_target() -> Outcome {
    let t = time_to_fidelity(1e-3, 0.9, 4.74e-4).unwrap();
    let rel = (t - 723.0).abs() / 723.0;
    Outcome {
        pass: rel <= 0.02,
        detail: format!("t = {t:.2} s vs 723 s ({:.2}%)", 100.0 * rel),
    }
}

fn feasibility_numbers() -> Outcome {
    let nbar = nbar_max(0.9).unwrap();
    let nbar_rel = (nbar - 0.1111).abs() / 0.1111;
    let t_eff = t_eff_for_nbar(1e-2, 0.111).unwrap();
    let t_rel = (t_eff - 3.3e-14).abs() / 3.3e-14;
    let mirror = MirrorSpec::reference();
    let g_pi = interaction_strength(&mirror.with_geometric_factor(LAMBDA_GEOMETRIC_PRINTED), 1e-2)
        .unwrap()
        .gamma_g;
    let g_two = interaction_strength(&mirror.with_geometric_factor(LAMBDA_GEOMETRIC_TEXT), 1e-2)
        .unwrap()
        .gamma_g;
    let pi_rel = (g_pi - 4.74e-4).abs() / 4.74e-4;
    let two_rel = (g_two - 3.02e-4).abs() / 3.02e-4;
    Outcome {
        pass: nbar_rel <= 0.01 && t_rel <= 0.05 && pi_rel <= 0.01 && two_rel <= 0.01,
        detail: format!(
            "n̄max = {nbar:.5}, T_eff = {t_eff:.4e} K ({:.1}%), γ_g(Λ=π) = {g_pi:.4e}, γ_g(Λ=2) = {g_two:.4e}",
            100.0 * t_rel
        ),
    }
}

fn open_closed_form() -> Outcome {
    let pair = CoupledPairParams::reference();
    let times = grid(pair.swap_time(0), 50);
    let mut worst: f64 = 0.0;
    for bath in [1e10, 1e11] {
        for gamma in [1e-13, 1e-12, 1.5e-12] {
            let noise = NoiseParams::new(gamma, bath, 0.1).unwrap();
            let numeric = fidelity_open_closed_numeric(c(1.2, -0.7), &pair, &noise, &times, default_dt(&pair)).unwrap();
            for (t, f) in times.iter().zip(&numeric) {
                worst = worst.max((f - fidelity_open_closed(&noise, gamma, *t)).abs());
            }
        }
    }
    Outcome {
        pass: worst < 1e-6,
        detail: format!("max |numeric − closed form| = {worst:.2e} over 6 × 50 points"),
    }
}

/// Matching Gaussian and Fock descriptions of one single-mode state.
fn state_pair(kind: usize, k: usize, dim: usize) -> (GaussianState, FockOperator) {
    let x = k as f64;
    match kind {
        0 => {
            let a = c(3.0 * (0.37 * x).cos() * (0.2 + 0.8 * (x / 9.0)), 2.0 * (1.3 * x).sin());
            let a = a * (3.0 / a.norm()).min(1.0);
            (GaussianState::coherent(a), fock_coherent(a, dim).unwrap())
        }
        1 => {
            let n = 2.0 * x / 9.0;
            (GaussianState::thermal(n).unwrap(), fock_thermal(n, dim).unwrap())
        }
        _ => {
            let s = SqueezingSpec::new(0.8 * (x + 1.0) / 10.0, 0.7 * x);
            (GaussianState::squeezed_vacuum(s), fock_squeezed(s, dim).unwrap())
        }
    }
}

fn fock_equivalence() -> Outcome {
    let dim = 60;
    let mut worst_overlap: f64 = 0.0;
    let mut cases = 0;
    for (ka, kb) in [(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)] {
        for k in 0..5 {
            let (ga, fa) = state_pair(ka, 2 * k, dim);
            let (gb, fb) = state_pair(kb, 2 * k + 1, dim);
            let g = overlap(&ga, &gb).unwrap();
            let f = fock_overlap(&fa, &fb).unwrap();
            worst_overlap = worst_overlap.max((g - f).abs());
            cases += 1;
        }
    }

    let dim = 40;
    let vacuum = coherent_ket(c(0.0, 0.0), dim);
    let mut worst_tv: f64 = 0.0;
    for (alpha, theta) in [
        (c(2.0, 0.0), 0.4),
        (c(-1.0, 1.5), 1.1),
        (c(0.3, -1.9), PI / 2.0),
        (c(1.2, 1.2), 2.5),
    ] {
        let input = coherent_ket(alpha, dim).kronecker(&vacuum);
        let out = &fock_rwa_unitary(theta, dim).unwrap().matrix * input;
        let g = GaussianState::coherent(alpha)
            .tensor(&GaussianState::vacuum(1))
            .apply(&beamsplitter_map(theta))
            .unwrap();
        for mode in 0..2 {
            let beta = g.partial_trace(mode).unwrap().amplitude(0).unwrap();
            let fock_marginal = reduced_from_ket(&out, dim, mode).unwrap();
            let from_gauss = fock_coherent(beta, dim).unwrap();
            worst_tv = worst_tv.max(total_variation(
                &fock_marginal.photon_distribution(),
                &from_gauss.photon_distribution(),
            ));
            worst_tv = worst_tv.max((1.0 - fock_overlap(&fock_marginal, &from_gauss).unwrap()).abs());
        }
    }
    Outcome {
        pass: worst_overlap < 1e-6 && worst_tv < 1e-6,
        detail: format!(
            "{cases} overlap cases, max diff {worst_overlap:.1e}; beam-splitter marginals TV {worst_tv:.1e}"
        ),
    }
}

fn a_tau_bound() -> Outcome {
    let mut worst_eig: f64 = 0.0;
    let mut worst_vac: f64 = 0.0;
    for lambda in [0.25, 0.5, 1.0] {
        for g in [0.25, 0.5, 0.9] {
            let exact = (1.0 + lambda) / (1.0 + lambda + g * g);
            let a = build_a_tau(lambda, g, 40, 64, 64).unwrap();
            worst_eig = worst_eig.max((a.max_eigenvalue() - exact).abs() / exact);
            worst_vac = worst_vac.max((a.vacuum_element() - exact).abs());
        }
    }
    Outcome {
        pass: worst_eig < 1e-3 && worst_vac < 1e-6,
        detail: format!("max eigenvalue rel error {worst_eig:.1e}, vacuum element error {worst_vac:.1e}"),
    }
}

fn squeezing_transfer() -> Outcome {
    let pair = CoupledPairParams::reference();
    let sn = SNParams::from_pair(&pair, 1.0).unwrap();
    let t_s = pair.swap_time(0);
    let mut worst_q: f64 = 0.0;
    for (s, phi) in [(0.5, 0.0), (0.9, 1.3), (0.2, -2.0)] {
        let curve = squeezing_transfer_curve(SqueezingSpec::new(s, phi), &pair, &[0.0, t_s]).unwrap();
        worst_q = worst_q.max((curve[1].1 - 0.5 * (-2.0 * s).exp()).abs());
    }
    let mut worst_sn: f64 = 0.0;
    for alpha in [c(0.0, 0.0), c(1.0, -2.0), c(30.0, 5.0)] {
        for t in grid(3.0 * t_s, 25) {
            let v = sn_reduced_mode2(&sn, alpha, t).min_quadrature_variance(0).unwrap();
            worst_sn = worst_sn.max((v - 0.5).abs());
        }
    }
    Outcome {
        pass: worst_q < 1e-10 && worst_sn < 1e-12,
        detail: format!("quantum at t_s error {worst_q:.1e}, SN deviation from 1/2 {worst_sn:.1e}"),
    }
}

/// Classical RK4 on `y' = f(t, y)` for a 4-vector.
fn rk4(
    f: impl Fn(f64, [f64; 4]) -> [f64; 4],
    y0: [f64; 4],
    t_end: f64,
    steps: usize,
    mut observe: impl FnMut(f64, &[f64; 4]),
) {
    let h = t_end / steps as f64;
    let mut y = y0;
    let add = |y: [f64; 4], k: [f64; 4], s: f64| [y[0] + s * k[0], y[1] + s * k[1], y[2] + s * k[2], y[3] + s * k[3]];
    for i in 0..steps {
        let t = i as f64 * h;
        let k1 = f(t, y);
        let k2 = f(t + h / 2.0, add(y, k1, h / 2.0));
        let k3 = f(t + h / 2.0, add(y, k2, h / 2.0));
        let k4 = f(t + h, add(y, k3, h));
        for j in 0..4 {
            y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        observe(t + h, &y);
    }
}

/// Max error over a trajectory, positions and momenta each relative to their
/// own peak magnitude.
fn relative_error(pairs: &[([f64; 4], [f64; 4])]) -> f64 {
    let peak = |idx: [usize; 2]| {
        pairs
            .iter()
            .flat_map(|(a, _)| idx.map(|i| a[i].abs()))
            .fold(0.0, f64::max)
    };
    let (px, pp) = (peak([0, 2]), peak([1, 3]));
    pairs
        .iter()
        .flat_map(|(a, b)| (0..4).map(move |i| ((a[i] - b[i]).abs(), i)))
        .map(|(d, i)| d / if i % 2 == 0 { px } else { pp })
        .fold(0.0, f64::max)
}

fn sn_ode_closed_forms() -> Outcome {
    let pair = CoupledPairParams::reference();
    let sn = SNParams::from_pair(&pair, 1.0).unwrap();
    let (m, w2) = (sn.mass, sn.omega * sn.omega);
    let t_end = 3.0 * 2.0 * PI / (sn.omega_g_plus - sn.omega_g_minus);
    let steps = (t_end * sn.omega / 1e-3).ceil() as usize;
    let every = steps / 2000;

    let mut zero = Vec::new();
    let mut count = 0;
    rk4(
        |_, y| {
            let pull = sn.c1 + sn.c2 * (y[0] - y[2]);
            [y[1] / m, -m * w2 * y[0] + pull, y[3] / m, -m * w2 * y[2] - pull]
        },
        [0.0; 4],
        t_end,
        steps,
        |t, y| {
            count += 1;
            if count % every == 0 {
                zero.push((moments_zero_init(&sn, t).as_array(), *y));
            }
        },
    );

    let alpha = c(0.8, -1.3);
    let k = sn.coupling_factor * sn.c2;
    let mut coherent = Vec::new();
    count = 0;
    rk4(
        |_, y| [y[1] / m, -m * w2 * y[0] - k * y[2], y[3] / m, -m * w2 * y[2] - k * y[0]],
        coherent_initial_moments(&sn, alpha).as_array(),
        t_end,
        steps,
        |t, y| {
            count += 1;
            if count % every == 0 {
                coherent.push((moments_coherent_init(&sn, alpha, t).as_array(), *y));
            }
        },
    );
    let (e0, e1) = (relative_error(&zero), relative_error(&coherent));
    Outcome {
        pass: e0 < 1e-8 && e1 < 1e-8,
        detail: format!("zero-init {e0:.1e}, coherent-init {e1:.1e} over {t_end:.0} s ({steps} RK4 steps)"),
    }
}

fn sn_violation() -> Outcome {
    let lambda = 1e-3;
    let pair = CoupledPairParams::reference();
    let sn = SNParams::from_pair(&pair, 1.0).unwrap();
    let t_s = pair.swap_time(0);
    let analytic = |t: f64| {
        sn_quantum_fidelity(&sn, &pair, lambda, t, FidelityMethod::Analytic)
            .unwrap()
            .value
    };
    let fine = grid(2.0 * t_s, 801);
    let violating: Vec<f64> = fine
        .iter()
        .copied()
        .filter(|&t| t > 0.0 && analytic(t) > locc_bound(lambda, pair.gamma_g, t))
        .collect();
    let mut worst_sigma: f64 = 0.0;
    for t in grid(2.0 * t_s, 11).into_iter().skip(1) {
        let mc = sn_quantum_fidelity(
            &sn,
            &pair,
            lambda,
            t,
            FidelityMethod::MonteCarlo { n: 100_000, seed: 2024 },
        )
        .unwrap();
        worst_sigma = worst_sigma.max((mc.value - analytic(t)).abs() / mc.stderr);
    }
    let window = match (violating.first(), violating.last()) {
        (Some(a), Some(b)) => format!("γ_g t ∈ [{:.3}, {:.3}]", a * pair.gamma_g, b * pair.gamma_g),
        _ => "none".to_string(),
    };
    Outcome {
        pass: !violating.is_empty() && worst_sigma <= 5.0,
        detail: format!("violation window {window}; MC vs analytic max {worst_sigma:.2} σ on 10 points"),
    }
}

fn cli_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    fs::write(
        &config,
        "seed = 99\n[bounds]\nlambda = [1e-3, 1e-1]\npoints = 41\n[open]\npoints = 21\n\
         [sn]\nmethod = \"mc\"\nsamples = 20000\npoints = 21\n[squeeze]\npoints = 21\n\
         [oracle]\ndim = 16\nnodes = 48\n",
    )
    .unwrap();
    let mut mismatched = Vec::new();
    for command in ["bounds", "open", "sn", "squeeze", "feasibility", "oracle"] {
        let mut outputs = Vec::new();
        for threads in ["1", "4", "1"] {
            let out = dir.path().join(format!("{command}_{threads}_{}.csv", outputs.len()));
            let args = [
                "gravbench",
                command,
                "--config",
                config.to_str().unwrap(),
                "--threads",
                threads,
                "--out",
                out.to_str().unwrap(),
            ];
            let (mut so, mut se) = (Vec::new(), Vec::new());
            let code = cli::run(args, &mut so, &mut se);
            assert_eq!(code, 0, "{command}: {}", String::from_utf8_lossy(&se));
            let mut files: Vec<_> = fs::read_dir(dir.path())
                .unwrap()
                .map(|e| e.unwrap().path())
                .filter(|p| {
                    let name = p.file_name().unwrap().to_string_lossy().into_owned();
                    let stem = out.file_stem().unwrap().to_string_lossy().into_owned();
                    name.starts_with(&stem) && name.ends_with(".csv")
                })
                .collect();
            files.sort();
            outputs.push(files.iter().map(|p| fs::read(p).unwrap()).collect::<Vec<_>>());
        }
        if outputs.windows(2).any(|w| w[0] != w[1]) || outputs[0].is_empty() {
            mismatched.push(command);
        }
    }
    Outcome {
        pass: mismatched.is_empty(),
        detail: if mismatched.is_empty() {
            "6 commands byte-identical across reruns with 1 and 4 threads".to_string()
        } else {
            format!("differing output: {mismatched:?}")
        },
    }
}

/// Name, check and wall-clock limit in seconds.
type Criterion = (&'static str, fn() -> Outcome, u64);

fn main() {
    let criteria: [Criterion; 10] = [
        ("LOCC bound curves", locc_curves, 1),
        ("run-time target", run_time_target, 1),
        ("feasibility numbers", feasibility_numbers, 1),
        ("open dynamics closed form", open_closed_form, 30),
        ("Fock oracle equivalence", fock_equivalence, 60),
        ("A_tau norm bound", a_tau_bound, 300),
        ("squeezing transfer", squeezing_transfer, 5),
        ("SN ODE closed forms", sn_ode_closed_forms, 10),
        ("SN LOCC violation", sn_violation, 120),
        ("CLI determinism", cli_determinism, 120),
    ];
    let mut failures = 0;
    for (i, (name, check, limit)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(*limit);
        let pass = outcome.pass && in_time;
        if !pass {
            failures += 1;
        }
        println!(
            "criterion {:>2} {} {name}: {} [{:.2?}, limit {limit} s]",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            outcome.detail,
            elapsed
        );
    }
    if failures > 0 {
        eprintln!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
}
