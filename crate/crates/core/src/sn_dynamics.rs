//! Schrödinger–Newton mean-field dynamics of the coupled pair.
//!
//! Each oscillator feels the other only through its mean position, so
//! product states stay product, second moments never change and every
//! coherent input stays coherent. Only the first moments evolve.
//!
//! Two first-moment problems are solved in closed form:
//!
//! - vanishing initial moments with the constant `C₁` pull retained
//!   ([`moments_zero_init`]), where the pair oscillates antisymmetrically at
//!   `ω_g = √(ω² − 2C₂/m)`;
//! - coherent initial moments `(x₀, p₀, 0, 0)` with only the mean-position
//!   cross term `κ C₂ (x₁⟨x₂⟩ + x₂⟨x₁⟩)` kept ([`moments_coherent_init`]),
//!   which beats at `ω_g^± = ω √(1 ± κ γ_g/ω)`.
//!
//! `C₂/m = ω γ_g` is used throughout, so the parameters stay consistent with
//! the quantum coupling rate of the same [`CoupledPairParams`].

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::HBAR;
use crate::ensemble::{gaussian_average, mc_average_fidelity, PriorEnsemble};
use crate::gaussian::GaussianState;
use crate::quantum_dynamics::CoupledPairParams;
use crate::{Error, Result};

/// Mean-field parameters, SI units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SNParams {
    /// `G m² / d²`, N.
    pub c1: f64,
    /// `G m² / d³`, N/m.
    pub c2: f64,
    pub mass: f64,
    pub omega: f64,
    pub gamma_g: f64,
    /// `√(ω² − 2C₂/m)`.
    pub omega_g: f64,
    /// `√(ω² − C₂/m)`.
    pub omega_g_tilde: f64,
    /// `ω √(1 + κ γ_g/ω)`.
    pub omega_g_plus: f64,
    /// `ω √(1 − κ γ_g/ω)`.
    pub omega_g_minus: f64,
    /// Scale of the mean-position cross coupling.
    pub coupling_factor: f64,
}

impl SNParams {
    pub fn from_pair(pair: &CoupledPairParams, coupling_factor: f64) -> Result<Self> {
        pair.validate()?;
        if !(coupling_factor > 0.0) {
            return Err(Error::param("kappa", format!("{coupling_factor} must be positive")));
        }
        let (omega, m) = (pair.omega, pair.mass);
        let c2 = m * omega * pair.gamma_g;
        let c1 = c2 * pair.separation_d;
        if omega * omega <= 2.0 * c2 / m {
            return Err(Error::param("gamma_g", "ω² must exceed 2C₂/m (γ_g < ω/2)"));
        }
        let ratio = coupling_factor * pair.gamma_g / omega;
        if ratio >= 1.0 {
            return Err(Error::param("kappa", "κ γ_g must be below ω"));
        }
        Ok(Self {
            c1,
            c2,
            mass: m,
            omega,
            gamma_g: pair.gamma_g,
            omega_g: (omega * omega - 2.0 * c2 / m).sqrt(),
            omega_g_tilde: (omega * omega - c2 / m).sqrt(),
            omega_g_plus: omega * (1.0 + ratio).sqrt(),
            omega_g_minus: omega * (1.0 - ratio).sqrt(),
            coupling_factor,
        })
    }

    /// Position scale `√(2ħ/(mω))`: `⟨x⟩ = scale · Re β`.
    pub fn position_scale(&self) -> f64 {
        (2.0 * HBAR / (self.mass * self.omega)).sqrt()
    }

    /// Momentum scale `√(2ħmω)`: `⟨p⟩ = scale · Im β`.
    pub fn momentum_scale(&self) -> f64 {
        (2.0 * HBAR * self.mass * self.omega).sqrt()
    }
}

/// First moments `⟨x₁⟩, ⟨p₁⟩, ⟨x₂⟩, ⟨p₂⟩` in SI units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FirstMoments {
    pub x1: f64,
    pub p1: f64,
    pub x2: f64,
    pub p2: f64,
}

impl FirstMoments {
    pub fn as_array(&self) -> [f64; 4] {
        [self.x1, self.p1, self.x2, self.p2]
    }
}

/// Mean displacement of oscillator 1 for vanishing initial moments.
fn zero_init_offset(params: &SNParams, t: f64) -> f64 {
    params.c1 / (params.mass * params.omega_g.powi(2)) * (1.0 - (params.omega_g * t).cos())
}

/// Drive felt by oscillator 1 once `⟨x₂⟩ = −⟨x₁⟩` is substituted:
/// `J(t) = C₁ + C₂ ⟨x₁⟩(t)`, so that `d⟨p₁⟩/dt = −m ω̃_g² ⟨x₁⟩ + J(t)`.
/// Oscillator 2 feels `−J(t)`.
pub fn drive(params: &SNParams, t: f64) -> f64 {
    params.c1 + params.c2 * zero_init_offset(params, t)
}

/// Closed-form moments from vanishing initial moments.
pub fn moments_zero_init(params: &SNParams, t: f64) -> FirstMoments {
    let x1 = zero_init_offset(params, t);
    let p1 = params.c1 / params.omega_g * (params.omega_g * t).sin();
    FirstMoments {
        x1,
        p1,
        x2: -x1,
        p2: -p1,
    }
}

/// Initial first moments of `|α⟩ ⊗ |0⟩`.
pub fn coherent_initial_moments(params: &SNParams, alpha: Complex64) -> FirstMoments {
    FirstMoments {
        x1: params.position_scale() * alpha.re,
        p1: params.momentum_scale() * alpha.im,
        x2: 0.0,
        p2: 0.0,
    }
}

/// Closed-form beat-mode moments from `|α⟩ ⊗ |0⟩`.
pub fn moments_coherent_init(params: &SNParams, alpha: Complex64, t: f64) -> FirstMoments {
    let init = coherent_initial_moments(params, alpha);
    let (x0, p0, m) = (init.x1, init.p1, params.mass);
    let (wp, wm) = (params.omega_g_plus, params.omega_g_minus);
    let (sp, cp) = (wp * t).sin_cos();
    let (sm, cm) = (wm * t).sin_cos();
    FirstMoments {
        x1: 0.5 * x0 * (cp + cm) + p0 / (2.0 * m) * (sp / wp + sm / wm),
        p1: 0.5 * p0 * (cp + cm) - 0.5 * x0 * m * (wp * sp + wm * sm),
        x2: 0.5 * x0 * (cp - cm) + p0 / (2.0 * m) * (sp / wp - sm / wm),
        p2: 0.5 * p0 * (cp - cm) - 0.5 * x0 * m * (wp * sp - wm * sm),
    }
}

/// Interaction-frame coherent amplitude of one oscillator from its lab-frame
/// moments: `β = (x/scale_x + i p/scale_p) e^{iωt}`.
fn interaction_frame_amplitude(params: &SNParams, x: f64, p: f64, t: f64) -> Complex64 {
    let lab = Complex64::new(x / params.position_scale(), p / params.momentum_scale());
    lab * Complex64::from_polar(1.0, params.omega * t)
}

/// Interaction-frame amplitudes `(β₁, β₂)` of both oscillators.
pub fn sn_amplitudes(params: &SNParams, alpha: Complex64, t: f64) -> (Complex64, Complex64) {
    let m = moments_coherent_init(params, alpha, t);
    (
        interaction_frame_amplitude(params, m.x1, m.p1, t),
        interaction_frame_amplitude(params, m.x2, m.p2, t),
    )
}

/// Oscillator-2 state under SN dynamics from `|α⟩ ⊗ |0⟩`: a coherent state
/// in the interaction frame, covariance fixed at `I/2`.
pub fn sn_reduced_mode2(params: &SNParams, alpha: Complex64, t: f64) -> GaussianState {
    GaussianState::coherent(sn_amplitudes(params, alpha, t).1)
}

/// How `F_SN` is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FidelityMethod {
    Analytic,
    MonteCarlo { n: usize, seed: u64 },
}

/// `F_SN(t)` with a standard error (zero for the analytic route).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FidelityEstimate {
    pub value: f64,
    pub stderr: f64,
}

/// `β_Q(α) − β_SN(α) = c₁ α + c₂ ᾱ` at time `t`.
pub fn amplitude_mismatch(params: &SNParams, pair: &CoupledPairParams, t: f64) -> (Complex64, Complex64) {
    let diff = |alpha: Complex64| {
        let quantum = -Complex64::i() * alpha * (pair.gamma_g * t).sin();
        quantum - sn_amplitudes(params, alpha, t).1
    };
    let f1 = diff(Complex64::new(1.0, 0.0));
    let fi = diff(Complex64::i());
    let i = Complex64::i();
    (0.5 * (f1 - i * fi), 0.5 * (f1 + i * fi))
}

/// Prior-averaged overlap between the quantum and SN states of oscillator 2.
///
/// Both states are coherent, so the integrand is `exp(−|c₁α + c₂ᾱ|²)`.
pub fn sn_quantum_fidelity(
    params: &SNParams,
    pair: &CoupledPairParams,
    lambda: f64,
    t: f64,
    method: FidelityMethod,
) -> Result<FidelityEstimate> {
    if !(lambda > 0.0) {
        return Err(Error::param("lambda", format!("{lambda} must be positive")));
    }
    let (c1, c2) = amplitude_mismatch(params, pair, t);
    match method {
        FidelityMethod::Analytic => Ok(FidelityEstimate {
            value: gaussian_average(c1, c2, lambda)?,
            stderr: 0.0,
        }),
        FidelityMethod::MonteCarlo { n, seed } => {
            let ensemble = PriorEnsemble::new(lambda, seed)?;
            let est = mc_average_fidelity(|a| (-(c1 * a + c2 * a.conj()).norm_sqr()).exp(), &ensemble, n)?;
            Ok(FidelityEstimate {
                value: est.mean,
                stderr: est.stderr,
            })
        }
    }
}
