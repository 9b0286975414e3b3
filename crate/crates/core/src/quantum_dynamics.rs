//! Closed and open evolution of the coupled pair in the interaction frame.
//!
//! Closed dynamics is the rotating-wave beam splitter with angle `γ_g t`.
//! Open dynamics integrates the Markovian moment equations
//!
//! ```text
//! dσ/dt = Aσ + σAᵀ + D,   dr̄/dt = A r̄,
//! A = ΩH − (γ/2) I,       D = (2N̄ + 1) γ I,
//! ```
//!
//! where `H = γ_g [[0, I], [I, 0]]` couples `x₁↔x₂` and `p₁↔p₂`.
//! The free-evolution phase `e^{-iωt}` is dropped throughout.

use nalgebra::{DMatrix, DVector, Matrix4, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::G;
use crate::gaussian::{beamsplitter_map, symmetrize, symplectic_eigenvalues, GaussianState, SqueezingSpec};
use crate::{Error, Result};

/// Symplectic eigenvalues below `1/2 − UNPHYSICAL_TOL` abort integration.
pub const UNPHYSICAL_TOL: f64 = 1e-6;
/// Upper limit on `dt · max(γ, γ_g)`.
pub const MAX_STEP_RATE: f64 = 1e-2;
/// Default number of integration steps per swap time.
pub const DEFAULT_STEPS_PER_SWAP: f64 = 1e4;

/// Physical parameters of the two oscillators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoupledPairParams {
    /// Mechanical frequency, rad/s.
    pub omega: f64,
    /// Gravitational coupling rate, rad/s.
    pub gamma_g: f64,
    /// Oscillator mass, kg.
    pub mass: f64,
    /// Equilibrium separation, m.
    pub separation_d: f64,
}

impl CoupledPairParams {
    /// Builds from explicit rates. Mass and separation only enter SI
    /// conversions.
    pub fn new(omega: f64, gamma_g: f64, mass: f64, separation_d: f64) -> Result<Self> {
        let p = Self {
            omega,
            gamma_g,
            mass,
            separation_d,
        };
        p.validate()?;
        Ok(p)
    }

    /// `γ_g = G m / (ω d³)`.
    pub fn from_geometry(mass: f64, separation_d: f64, omega: f64) -> Result<Self> {
        let gamma_g = G * mass / (omega * separation_d.powi(3));
        Self::new(omega, gamma_g, mass, separation_d)
    }

    /// Osmium mirror pair (R = d = 200 µm, R/L = 3/2) at ω = 10⁻² rad/s,
    /// with the coupling rate fixed to 4.74×10⁻⁴ rad/s.
    pub fn reference() -> Self {
        let radius = 2e-4;
        let mass = crate::experiment::MirrorSpec::reference().mass();
        Self {
            omega: 1e-2,
            gamma_g: 4.74e-4,
            mass,
            separation_d: radius,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0) {
            return Err(Error::param("omega", format!("{} must be positive", self.omega)));
        }
        if !(self.gamma_g > 0.0) {
            return Err(Error::param("gamma_g", format!("{} must be positive", self.gamma_g)));
        }
        if !(self.mass > 0.0) {
            return Err(Error::param("mass", format!("{} must be positive", self.mass)));
        }
        if !(self.separation_d > 0.0) {
            return Err(Error::param(
                "separation_d",
                format!("{} must be positive", self.separation_d),
            ));
        }
        Ok(())
    }

    /// True when `γ_g / ω < 0.1`.
    pub fn rwa_valid(&self) -> bool {
        self.gamma_g / self.omega < 0.1
    }

    pub fn swap_time(&self, k: u32) -> f64 {
        swap_time(self.gamma_g, k)
    }
}

/// Damping and thermal-occupation parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    /// Phonon decay rate, rad/s.
    pub gamma: f64,
    /// Bath occupation N̄.
    pub bath_nbar: f64,
    /// Initial thermal occupation n̄ of each oscillator.
    pub initial_nbar: f64,
}

impl NoiseParams {
    pub fn new(gamma: f64, bath_nbar: f64, initial_nbar: f64) -> Result<Self> {
        for (name, v) in [("gamma", gamma), ("Nbar", bath_nbar), ("nbar", initial_nbar)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::param(name, format!("{v} must be finite and non-negative")));
            }
        }
        Ok(Self {
            gamma,
            bath_nbar,
            initial_nbar,
        })
    }

    pub fn noiseless() -> Self {
        Self {
            gamma: 0.0,
            bath_nbar: 0.0,
            initial_nbar: 0.0,
        }
    }
}

/// Evolved two-mode state and its mode-2 marginal.
#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionResult {
    pub time: f64,
    pub state: GaussianState,
    pub reduced_mode2: GaussianState,
}

impl EvolutionResult {
    fn new(time: f64, state: GaussianState) -> Self {
        let reduced_mode2 = state.partial_trace(1).expect("two-mode state");
        Self {
            time,
            state,
            reduced_mode2,
        }
    }
}

/// Odd multiples of the full swap time, `(2k+1)π / (2γ_g)`.
pub fn swap_time(gamma_g: f64, k: u32) -> f64 {
    (2 * k + 1) as f64 * std::f64::consts::PI / (2.0 * gamma_g)
}

fn require_two_modes(state: &GaussianState) -> Result<()> {
    if state.n_modes() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            actual: state.n_modes(),
        });
    }
    Ok(())
}

/// Closed RWA evolution for time `t`.
pub fn closed_evolve(input: &GaussianState, pair: &CoupledPairParams, t: f64) -> Result<EvolutionResult> {
    require_two_modes(input)?;
    let state = input.apply(&beamsplitter_map(pair.gamma_g * t))?;
    Ok(EvolutionResult::new(t, state))
}

/// Initial state of the noisy protocol: thermal(n̄) displaced by `α` on
/// mode 1, thermal(n̄) on mode 2.
pub fn noisy_initial_state(alpha: Complex64, initial_nbar: f64) -> Result<GaussianState> {
    let th = GaussianState::thermal(initial_nbar)?;
    th.tensor(&th).displace(0, alpha)
}

/// Drift and diffusion matrices of the moment equations.
pub fn drift_diffusion(pair: &CoupledPairParams, noise: &NoiseParams) -> (Matrix4<f64>, Matrix4<f64>) {
    let g = pair.gamma_g;
    #[rustfmt::skip]
    let h = Matrix4::new(
        0.0, 0.0, g,   0.0,
        0.0, 0.0, 0.0, g,
        g,   0.0, 0.0, 0.0,
        0.0, g,   0.0, 0.0,
    );
    #[rustfmt::skip]
    let omega = Matrix4::new(
        0.0,  1.0, 0.0,  0.0,
        -1.0, 0.0, 0.0,  0.0,
        0.0,  0.0, 0.0,  1.0,
        0.0,  0.0, -1.0, 0.0,
    );
    let drift = omega * h - Matrix4::identity() * (0.5 * noise.gamma);
    let diffusion = Matrix4::identity() * ((2.0 * noise.bath_nbar + 1.0) * noise.gamma);
    (drift, diffusion)
}

/// Fixed-step RK4 integrator for the moment equations.
#[derive(Debug, Clone)]
pub struct LyapunovIntegrator {
    drift: Matrix4<f64>,
    diffusion: Matrix4<f64>,
    dt: f64,
}

impl LyapunovIntegrator {
    pub fn new(pair: &CoupledPairParams, noise: &NoiseParams, dt: f64) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::param("dt", format!("{dt} must be positive")));
        }
        let rate = dt * noise.gamma.max(pair.gamma_g);
        if rate >= MAX_STEP_RATE {
            return Err(Error::StepTooLarge(rate));
        }
        let (drift, diffusion) = drift_diffusion(pair, noise);
        Ok(Self { drift, diffusion, dt })
    }

    /// Right-hand side of `dσ/dt`.
    pub fn cov_rate(&self, cov: &Matrix4<f64>) -> Matrix4<f64> {
        self.drift * cov + cov * self.drift.transpose() + self.diffusion
    }

    fn step(&self, mean: &mut Vector4<f64>, cov: &mut Matrix4<f64>, h: f64) {
        let a = &self.drift;
        let m1 = a * *mean;
        let m2 = a * (*mean + m1 * (0.5 * h));
        let m3 = a * (*mean + m2 * (0.5 * h));
        let m4 = a * (*mean + m3 * h);
        *mean += (m1 + m2 * 2.0 + m3 * 2.0 + m4) * (h / 6.0);

        let k1 = self.cov_rate(cov);
        let k2 = self.cov_rate(&(*cov + k1 * (0.5 * h)));
        let k3 = self.cov_rate(&(*cov + k2 * (0.5 * h)));
        let k4 = self.cov_rate(&(*cov + k3 * h));
        *cov += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        *cov = (*cov + cov.transpose()) * 0.5;
    }

    /// Integrates from `input` at t = 0 and records the state at each of
    /// `times` (sorted, non-negative). Each interval is split into
    /// `ceil(Δt/dt)` equal steps so the output times are hit exactly.
    pub fn trajectory(&self, input: &GaussianState, times: &[f64]) -> Result<Vec<EvolutionResult>> {
        require_two_modes(input)?;
        let mut mean = Vector4::from_iterator(input.mean().iter().copied());
        let mut cov = Matrix4::from_iterator(input.cov().iter().copied());
        let mut now = 0.0;
        let mut out = Vec::with_capacity(times.len());
        for &target in times {
            if !(target >= now) {
                return Err(Error::param("times", "must be sorted and non-negative"));
            }
            let span = target - now;
            let n_steps = (span / self.dt).ceil() as usize;
            if n_steps > 0 {
                let h = span / n_steps as f64;
                for _ in 0..n_steps {
                    self.step(&mut mean, &mut cov, h);
                    now += h;
                    let dyn_cov = DMatrix::from_iterator(4, 4, cov.iter().copied());
                    let nu = symplectic_eigenvalues(&dyn_cov)[0];
                    if nu < 0.5 - UNPHYSICAL_TOL {
                        return Err(Error::Unphysical { nu, time: now });
                    }
                }
            }
            now = target;
            let state = GaussianState::from_parts_unchecked(
                DVector::from_iterator(4, mean.iter().copied()),
                symmetrize(DMatrix::from_iterator(4, 4, cov.iter().copied())),
            );
            out.push(EvolutionResult::new(target, state));
        }
        Ok(out)
    }
}

/// Default step: `t_s / 10⁴`.
pub fn default_dt(pair: &CoupledPairParams) -> f64 {
    swap_time(pair.gamma_g, 0) / DEFAULT_STEPS_PER_SWAP
}

/// Open (damped, thermally driven) evolution for time `t` with RK4 step `dt`.
pub fn open_evolve(
    input: &GaussianState,
    pair: &CoupledPairParams,
    noise: &NoiseParams,
    t: f64,
    dt: f64,
) -> Result<EvolutionResult> {
    let integrator = LyapunovIntegrator::new(pair, noise, dt)?;
    let mut traj = integrator.trajectory(input, &[t])?;
    Ok(traj.pop().expect("one output time"))
}

/// Displacement `α̃ = −iα sin(γ_g t)(1 − e^{−γt/2})` that restores the
/// ideal mode-2 amplitude after damping.
pub fn compensation_displacement(alpha: Complex64, pair: &CoupledPairParams, gamma: f64, t: f64) -> Complex64 {
    -Complex64::i() * alpha * (pair.gamma_g * t).sin() * (1.0 - (-0.5 * gamma * t).exp())
}

/// Closed-form open-vs-closed overlap after compensation:
/// `2e^{γt} / (2n̄ + (4N̄+3)e^{γt} − 4N̄ − 1)`.
pub fn fidelity_open_closed(noise: &NoiseParams, gamma: f64, t: f64) -> f64 {
    // Rearranged as 2 / (2n̄e^{−γt} + 2 + (4N̄+1)(1 − e^{−γt})): finite for
    // any γt ≥ 0 and free of the large-N̄ cancellation.
    let decay = (-gamma * t).exp();
    let loss = -(-gamma * t).exp_m1();
    let nbar = noise.initial_nbar;
    let bath = noise.bath_nbar;
    2.0 / (2.0 * nbar * decay + 2.0 + (4.0 * bath + 1.0) * loss)
}

/// Open-vs-closed fidelity along the full numeric route: integrate the
/// moment equations from the noisy initial state, trace out mode 1, apply
/// the compensation displacement, and overlap with the ideal closed output
/// `|−iα sin(γ_g t)⟩`.
pub fn fidelity_open_closed_numeric(
    alpha: Complex64,
    pair: &CoupledPairParams,
    noise: &NoiseParams,
    times: &[f64],
    dt: f64,
) -> Result<Vec<f64>> {
    let integrator = LyapunovIntegrator::new(pair, noise, dt)?;
    let input = noisy_initial_state(alpha, noise.initial_nbar)?;
    let traj = integrator.trajectory(&input, times)?;
    traj.iter()
        .map(|r| {
            let shift = compensation_displacement(alpha, pair, noise.gamma, r.time);
            let compensated = r.reduced_mode2.displace(0, shift)?;
            let ideal = closed_evolve(
                &GaussianState::coherent(alpha).tensor(&GaussianState::vacuum(1)),
                pair,
                r.time,
            )?;
            crate::gaussian::overlap(&ideal.reduced_mode2, &compensated)
        })
        .collect()
}

/// Mode-2 minimum quadrature variance under closed dynamics from
/// `squeezed(s, φ) ⊗ |0⟩`.
pub fn squeezing_transfer_curve(
    spec: SqueezingSpec,
    pair: &CoupledPairParams,
    times: &[f64],
) -> Result<Vec<(f64, f64)>> {
    let input = GaussianState::squeezed_vacuum(spec).tensor(&GaussianState::vacuum(1));
    let mut prev = 0.0;
    times
        .iter()
        .map(|&t| {
            if !(t >= prev) {
                return Err(Error::param("times", "must be sorted and non-negative"));
            }
            prev = t;
            let out = closed_evolve(&input, pair, t)?;
            Ok((t, out.reduced_mode2.min_quadrature_variance(0)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::SymplecticMap;
    use std::f64::consts::{FRAC_PI_2, SQRT_2};

    fn pair(gamma_g: f64) -> CoupledPairParams {
        CoupledPairParams::new(1e-2, gamma_g, 1e-6, 2e-4).unwrap()
    }

    #[test]
    fn swap_times() {
        assert!((swap_time(4.74e-4, 0) - 3313.9).abs() < 0.1);
        assert!((swap_time(FRAC_PI_2, 0) - 1.0).abs() < 1e-15);
        assert!((swap_time(0.3, 1) - 3.0 * swap_time(0.3, 0)).abs() < 1e-12);
    }

    #[test]
    fn closed_coherent_product_state() {
        let p = pair(4.74e-4);
        let alpha = Complex64::new(0.6, -1.1);
        let input = GaussianState::coherent(alpha).tensor(&GaussianState::vacuum(1));
        for t in [0.0, 500.0, 1700.0, p.swap_time(0)] {
            let out = closed_evolve(&input, &p, t).unwrap();
            let th = p.gamma_g * t;
            let m1 = GaussianState::coherent(alpha * th.cos());
            let m2 = GaussianState::coherent(-Complex64::i() * alpha * th.sin());
            assert!((out.state.partial_trace(0).unwrap().mean() - m1.mean()).amax() < 1e-12);
            assert!((out.reduced_mode2.mean() - m2.mean()).amax() < 1e-12);
            assert!((out.reduced_mode2.cov() - m2.cov()).amax() < 1e-12);
        }
        let out = closed_evolve(&input, &p, 0.0).unwrap();
        assert_eq!(out.state, input);
        assert!(closed_evolve(&GaussianState::vacuum(1), &p, 1.0).is_err());
    }

    #[test]
    fn noiseless_open_matches_closed() {
        let p = pair(4.74e-4);
        let ts = p.swap_time(0);
        let input = GaussianState::coherent(Complex64::new(1.5, 0.5)).tensor(&GaussianState::vacuum(1));
        let integ = LyapunovIntegrator::new(&p, &NoiseParams::noiseless(), ts / 1e4).unwrap();
        let times: Vec<f64> = (0..=10).map(|k| ts * k as f64 / 10.0).collect();
        for r in integ.trajectory(&input, &times).unwrap() {
            let closed = closed_evolve(&input, &p, r.time).unwrap();
            assert!((r.state.mean() - closed.state.mean()).amax() < 1e-8);
            assert!((r.state.cov() - closed.state.cov()).amax() < 1e-8);
        }
    }

    #[test]
    fn thermal_identity_cov_stays_proportional() {
        let p = pair(4.74e-4);
        let noise = NoiseParams::new(1e-5, 2.0, 0.3).unwrap();
        let input = noisy_initial_state(Complex64::new(0.0, 0.0), noise.initial_nbar).unwrap();
        let t = 2000.0;
        let out = open_evolve(&input, &p, &noise, t, 0.5).unwrap();
        let e = (-noise.gamma * t).exp();
        let k = e * (noise.initial_nbar + 0.5) + (1.0 - e) * (2.0 * noise.bath_nbar + 1.0);
        assert!((out.state.cov() - DMatrix::identity(4, 4) * k).amax() < 1e-8);
    }

    #[test]
    fn damped_mode2_mean() {
        let p = pair(4.74e-4);
        let noise = NoiseParams::new(2e-4, 0.0, 0.0).unwrap();
        let alpha = Complex64::new(0.9, 0.4);
        let input = noisy_initial_state(alpha, 0.0).unwrap();
        let t = 1234.5;
        let out = open_evolve(&input, &p, &noise, t, 0.2).unwrap();
        let amp = SQRT_2 * (-0.5 * noise.gamma * t).exp() * (p.gamma_g * t).sin();
        assert!((out.reduced_mode2.mean()[0] - amp * alpha.im).abs() < 1e-9);
        assert!((out.reduced_mode2.mean()[1] + amp * alpha.re).abs() < 1e-9);
    }

    #[test]
    fn step_size_guard() {
        let p = pair(4.74e-4);
        assert!(matches!(
            LyapunovIntegrator::new(&p, &NoiseParams::noiseless(), 100.0),
            Err(Error::StepTooLarge(_))
        ));
        assert!(LyapunovIntegrator::new(&p, &NoiseParams::noiseless(), 0.0).is_err());
    }

    #[test]
    fn unphysical_intermediate_aborts() {
        let p = pair(4.74e-4);
        let noise = NoiseParams::new(1e-4, 0.0, 0.0).unwrap();
        // Below-vacuum covariance smuggled in: damping pulls it up, but the
        // state starts (and stays for a while) unphysical.
        let bad = GaussianState::from_parts_unchecked(DVector::zeros(4), DMatrix::identity(4, 4) * 0.3);
        let r = LyapunovIntegrator::new(&p, &noise, 1.0)
            .unwrap()
            .trajectory(&bad, &[10.0]);
        assert!(matches!(r, Err(Error::Unphysical { .. })));
    }

    #[test]
    fn compensation_restores_ideal_mean() {
        let p = pair(4.74e-4);
        assert_eq!(
            compensation_displacement(Complex64::new(1.0, 1.0), &p, 0.0, 100.0),
            Complex64::new(0.0, 0.0)
        );
        assert_eq!(
            compensation_displacement(Complex64::new(1.0, 1.0), &p, 1e-3, 0.0).norm(),
            0.0
        );
        let gamma: f64 = 3e-4;
        for (alpha, t) in [(Complex64::new(1.0, -0.5), 800.0), (Complex64::new(-2.0, 0.3), 3000.0)] {
            let damped = (-0.5 * gamma * t).exp() * (p.gamma_g * t).sin();
            let mode2 = GaussianState::coherent(-Complex64::i() * alpha * damped);
            let fixed = mode2
                .displace(0, compensation_displacement(alpha, &p, gamma, t))
                .unwrap();
            let ideal = SQRT_2 * (p.gamma_g * t).sin();
            assert!((fixed.mean()[0] - ideal * alpha.im).abs() < 1e-13);
            assert!((fixed.mean()[1] + ideal * alpha.re).abs() < 1e-13);
        }
    }

    #[test]
    fn open_closed_fidelity_at_t0() {
        let n = NoiseParams::new(1e-12, 1e10, 0.1).unwrap();
        assert!((fidelity_open_closed(&n, n.gamma, 0.0) - 2.0 / 2.2).abs() < 1e-14);
        let n0 = NoiseParams::new(1e-12, 1e10, 0.0).unwrap();
        assert!((fidelity_open_closed(&n0, n0.gamma, 0.0) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn open_closed_fidelity_decreases_with_gamma() {
        let n = NoiseParams::new(0.0, 1e10, 0.1).unwrap();
        let t = 1000.0;
        let f1 = fidelity_open_closed(&n, 1e-13, t);
        let f2 = fidelity_open_closed(&n, 1e-12, t);
        assert!(f2 < f1 && f1 < fidelity_open_closed(&n, 0.0, t));
    }

    #[test]
    fn squeezing_transfer_endpoints() {
        let p = pair(4.74e-4);
        let ts = p.swap_time(0);
        let curve = squeezing_transfer_curve(SqueezingSpec::new(0.5, 0.0), &p, &[0.0, ts]).unwrap();
        assert!((curve[0].1 - 0.5).abs() < 1e-14);
        assert!((curve[1].1 - 0.5 * (-1.0f64).exp()).abs() < 1e-12);
        let flat = squeezing_transfer_curve(SqueezingSpec::new(0.0, 0.0), &p, &[0.0, 100.0, ts]).unwrap();
        assert!(flat.iter().all(|&(_, v)| (v - 0.5).abs() < 1e-14));
        assert!(squeezing_transfer_curve(SqueezingSpec::new(0.5, 0.0), &p, &[10.0, 5.0]).is_err());
    }

    #[test]
    fn state_swap_rotates_by_minus_half_pi() {
        let p = pair(0.01);
        let ts = p.swap_time(0);
        let singles = [
            GaussianState::coherent(Complex64::new(0.7, 1.3)),
            GaussianState::thermal(0.8).unwrap(),
            GaussianState::squeezed_vacuum(SqueezingSpec::new(0.6, 0.9)),
        ];
        for s in singles {
            let out = closed_evolve(&s.tensor(&GaussianState::vacuum(1)), &p, ts).unwrap();
            let expected = s.apply(&SymplecticMap::phase_rotation(1, 0, FRAC_PI_2)).unwrap();
            assert!((out.reduced_mode2.mean() - expected.mean()).amax() < 1e-12);
            assert!((out.reduced_mode2.cov() - expected.cov()).amax() < 1e-12);
        }
    }
}
