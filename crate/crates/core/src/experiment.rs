//! SI-unit feasibility numbers for a tabletop mirror pair.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bounds::{locc_bound, teleportation_bound, time_to_fidelity};
use crate::constants::{G, HBAR, K_B, PLANCK_LENGTH, PLANCK_MASS};
use crate::quantum_dynamics::swap_time;
use crate::{Error, Result};

/// Geometric factor presets for `γ_g = Λ G ϱ / ω`.
pub const LAMBDA_GEOMETRIC_TEXT: f64 = 2.0;
/// Preset that reproduces the printed `γ_g ≈ 4.74×10⁻⁴`.
pub const LAMBDA_GEOMETRIC_PRINTED: f64 = PI;
/// Weak-field ratio below which the check passes.
pub const WEAK_FIELD_LIMIT: f64 = 1e-3;
/// Mechanical quality factors above this are treated as out of reach.
pub const TECHNICAL_Q_LIMIT: f64 = 1e9;
/// Default RMS-displacement margin relative to `d`.
pub const DEFAULT_MARGIN: f64 = 10.0;
/// `γ_g/ω` must stay below this for the rotating-wave approximation.
pub const RWA_LIMIT: f64 = 0.1;

/// Cylindrical mirror geometry and material.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MirrorSpec {
    /// kg/m³.
    pub density: f64,
    pub radius: f64,
    pub thickness: f64,
    /// Centre-to-centre separation, m.
    pub separation_d: f64,
    pub geometric_factor: f64,
}

impl MirrorSpec {
    pub fn new(density: f64, radius: f64, thickness: f64, separation_d: f64, geometric_factor: f64) -> Result<Self> {
        let spec = Self {
            density,
            radius,
            thickness,
            separation_d,
            geometric_factor,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Osmium, `R = d = 200 µm`, `R/L = 3/2`, `Λ = π`.
    pub fn reference() -> Self {
        Self {
            density: 2.26e4,
            radius: 2e-4,
            thickness: 2e-4 / 1.5,
            separation_d: 2e-4,
            geometric_factor: LAMBDA_GEOMETRIC_PRINTED,
        }
    }

    pub fn with_geometric_factor(self, geometric_factor: f64) -> Self {
        Self {
            geometric_factor,
            ..self
        }
    }

    /// Density may be zero (no coupling); lengths and `Λ` must be positive.
    pub fn validate(&self) -> Result<()> {
        if !(self.density >= 0.0) || !self.density.is_finite() {
            return Err(Error::param(
                "density",
                format!("{} must be non-negative", self.density),
            ));
        }
        for (name, v) in [
            ("radius", self.radius),
            ("thickness", self.thickness),
            ("separation_d", self.separation_d),
            ("geometric_factor", self.geometric_factor),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::param(name, format!("{v} must be positive")));
            }
        }
        Ok(())
    }

    /// `ϱ π R² L`.
    pub fn mass(&self) -> f64 {
        self.density * PI * self.radius * self.radius * self.thickness
    }

    /// True for `R/L = 3/2` and `R = d`.
    pub fn is_reference_aspect(&self) -> bool {
        let rel = |a: f64, b: f64| (a - b).abs() <= 1e-9 * b.abs();
        rel(self.radius / self.thickness, 1.5) && rel(self.radius, self.separation_d)
    }
}

/// Thermal environment of one oscillator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentSpec {
    /// Bath temperature, K.
    pub t_env: f64,
    pub quality_factor: f64,
    /// rad/s.
    pub omega: f64,
    /// kg.
    pub mass: f64,
}

impl EnvironmentSpec {
    pub fn new(t_env: f64, quality_factor: f64, omega: f64, mass: f64) -> Result<Self> {
        let env = Self {
            t_env,
            quality_factor,
            omega,
            mass,
        };
        for (name, v) in [
            ("t_env", t_env),
            ("quality_factor", quality_factor),
            ("omega", omega),
            ("mass", mass),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::param(name, format!("{v} must be positive")));
            }
        }
        Ok(env)
    }

    /// 1 mK dilution-fridge bath, `Q = 10¹¹`, `ω = 10⁻² rad/s`, reference mass.
    pub fn reference() -> Self {
        Self {
            t_env: 1e-3,
            quality_factor: 1e11,
            omega: 1e-2,
            mass: MirrorSpec::reference().mass(),
        }
    }

    /// `T_env / Q`.
    pub fn effective_temperature(&self) -> f64 {
        self.t_env / self.quality_factor
    }
}

/// `γ_g` in rad/s together with the rotating-wave ratio `γ_g/ω`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InteractionStrength {
    pub gamma_g: f64,
    pub rwa_ratio: f64,
}

/// `γ_g = Λ G ϱ / ω`.
pub fn interaction_strength(spec: &MirrorSpec, omega: f64) -> Result<InteractionStrength> {
    spec.validate()?;
    if !(omega > 0.0) {
        return Err(Error::param("omega", format!("{omega} must be positive")));
    }
    let gamma_g = spec.geometric_factor * G * spec.density / omega;
    Ok(InteractionStrength {
        gamma_g,
        rwa_ratio: gamma_g / omega,
    })
}

/// Smallest `λ` keeping the prior's RMS displacement `√(2ħ/(mωλ))` a factor
/// `margin` below `d`: `2ħ margin² / (m ω d²)`.
pub fn lambda_floor(mass: f64, omega: f64, d: f64, margin: f64) -> Result<f64> {
    if !(margin > 1.0) {
        return Err(Error::param("margin", format!("{margin} must exceed 1")));
    }
    for (name, v) in [("mass", mass), ("omega", omega), ("d", d)] {
        if !(v > 0.0) {
            return Err(Error::param(name, format!("{v} must be positive")));
        }
    }
    Ok(2.0 * HBAR * margin * margin / (mass * omega * d * d))
}

/// Thermal occupation that keeps vacuum fidelity above `F`: `(1 − F)/F`.
pub fn nbar_max(fidelity: f64) -> Result<f64> {
    if !(fidelity > 0.0 && fidelity < 1.0) {
        return Err(Error::param("F", format!("{fidelity} outside (0, 1)")));
    }
    Ok((1.0 - fidelity) / fidelity)
}

/// Bose–Einstein temperature for occupation `n̄`: `ħω / (k_B ln(1 + 1/n̄))`.
pub fn t_eff_for_nbar(omega: f64, nbar: f64) -> Result<f64> {
    if !(nbar > 0.0) {
        return Err(Error::param("nbar", format!("{nbar} must be positive")));
    }
    if !(omega > 0.0) {
        return Err(Error::param("omega", format!("{omega} must be positive")));
    }
    Ok(HBAR * omega / (K_B * (1.0 / nbar).ln_1p()))
}

/// `Q = T_env / T_eff`.
pub fn required_q(t_env: f64, t_eff: f64) -> Result<f64> {
    if !(t_env > 0.0 && t_eff > 0.0) {
        return Err(Error::param(
            "temperature",
            format!("T_env = {t_env}, T_eff = {t_eff} must be positive"),
        ));
    }
    Ok(t_env / t_eff)
}

/// `(m/d) / (m_P/ℓ_P)`.
pub fn weak_field_check(mass: f64, d: f64) -> Result<f64> {
    if !(mass > 0.0 && d > 0.0) {
        return Err(Error::param("mass, d", "must be positive"));
    }
    Ok((mass / d) / (PLANCK_MASS / PLANCK_LENGTH))
}

/// One named pass/fail line of a [`FeasibilityReport`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Aggregated feasibility numbers. Failed sub-checks are recorded, not thrown.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibilityReport {
    pub mirror: MirrorSpec,
    pub environment: EnvironmentSpec,
    pub lambda: f64,
    pub target_fidelity: f64,
    pub mass: f64,
    pub gamma_g: f64,
    pub rwa_ratio: f64,
    pub swap_time: Option<f64>,
    pub time_to_fidelity: Option<f64>,
    pub lambda_floor: f64,
    pub margin: f64,
    pub nbar_max: Option<f64>,
    pub t_eff: Option<f64>,
    pub required_q: Option<f64>,
    pub weak_field_ratio: f64,
    pub checks: Vec<Check>,
}

impl FeasibilityReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Runs every sub-check at the default displacement margin.
pub fn feasibility_report(
    mirror: &MirrorSpec,
    env: &EnvironmentSpec,
    lambda: f64,
    target_fidelity: f64,
) -> Result<FeasibilityReport> {
    feasibility_report_with_margin(mirror, env, lambda, target_fidelity, DEFAULT_MARGIN)
}

pub fn feasibility_report_with_margin(
    mirror: &MirrorSpec,
    env: &EnvironmentSpec,
    lambda: f64,
    target_fidelity: f64,
    margin: f64,
) -> Result<FeasibilityReport> {
    if !(lambda > 0.0) {
        return Err(Error::param("lambda", format!("{lambda} must be positive")));
    }
    let strength = interaction_strength(mirror, env.omega)?;
    let gamma_g = strength.gamma_g;
    let mass = mirror.mass();
    let mut checks = Vec::new();
    let mut push = |name: &str, passed: bool, detail: String| {
        checks.push(Check {
            name: name.to_string(),
            passed,
            detail,
        })
    };

    push("coupling", gamma_g > 0.0, format!("γ_g = {gamma_g:.4e} rad/s"));
    push(
        "rwa",
        gamma_g > 0.0 && strength.rwa_ratio < RWA_LIMIT,
        format!("γ_g/ω = {:.3e} (limit {RWA_LIMIT})", strength.rwa_ratio),
    );

    let (t_swap, t_target) = if gamma_g > 0.0 {
        let t_target = time_to_fidelity(lambda, target_fidelity, gamma_g).ok();
        (Some(swap_time(gamma_g, 0)), t_target)
    } else {
        (None, None)
    };
    push(
        "target_reachable",
        t_target.is_some(),
        match t_target {
            Some(t) => format!("bound reaches F = {target_fidelity} at t = {t:.4e} s"),
            None => format!(
                "F = {target_fidelity} not in [{:.6}, 1] or no coupling",
                teleportation_bound(lambda)
            ),
        },
    );

    let floor = lambda_floor(mass.max(f64::MIN_POSITIVE), env.omega, mirror.separation_d, margin)?;
    push(
        "displacement",
        mass > 0.0 && lambda >= floor,
        format!("λ = {lambda:.3e} vs floor {floor:.3e} (margin {margin})"),
    );

    let weak = if mass > 0.0 {
        weak_field_check(mass, mirror.separation_d)?
    } else {
        0.0
    };
    push(
        "weak_field",
        weak < WEAK_FIELD_LIMIT,
        format!("(m/d)/(m_P/ℓ_P) = {weak:.3e}"),
    );

    let nbar = nbar_max(target_fidelity).ok();
    let t_eff = nbar
        .filter(|&n| n > 0.0)
        .and_then(|n| t_eff_for_nbar(env.omega, n).ok());
    let q = t_eff.and_then(|t| required_q(env.t_env, t).ok());
    push(
        "thermal_occupation",
        t_eff.is_some_and(|t| env.effective_temperature() <= t),
        match (nbar, t_eff) {
            (Some(n), Some(t)) => format!(
                "n̄ < {n:.4}; need T_env/Q ≤ {t:.3e} K, have {:.3e} K",
                env.effective_temperature()
            ),
            _ => "target fidelity outside (0, 1)".to_string(),
        },
    );
    push(
        "quality_factor",
        q.is_some_and(|q| q <= TECHNICAL_Q_LIMIT),
        match q {
            Some(q) if q > TECHNICAL_Q_LIMIT => {
                format!("required Q = {q:.3e} is beyond current technical capabilities (> {TECHNICAL_Q_LIMIT:.0e})")
            }
            Some(q) => format!("required Q = {q:.3e}"),
            None => "undefined".to_string(),
        },
    );

    Ok(FeasibilityReport {
        mirror: *mirror,
        environment: *env,
        lambda,
        target_fidelity,
        mass,
        gamma_g,
        rwa_ratio: strength.rwa_ratio,
        swap_time: t_swap,
        time_to_fidelity: t_target,
        lambda_floor: floor,
        margin,
        nbar_max: nbar,
        t_eff,
        required_q: q,
        weak_field_ratio: weak,
        checks,
    })
}

fn opt(v: Option<f64>, unit: &str) -> String {
    match v {
        Some(x) => format!("{x:.4e}{unit}"),
        None => "n/a".to_string(),
    }
}

impl fmt::Display for FeasibilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "mirror mass           {:.4e} kg", self.mass)?;
        writeln!(f, "gamma_g               {:.4e} rad/s", self.gamma_g)?;
        writeln!(f, "gamma_g / omega       {:.4e}", self.rwa_ratio)?;
        writeln!(f, "swap time             {}", opt(self.swap_time, " s"))?;
        writeln!(
            f,
            "time to F = {:<10} {}",
            self.target_fidelity,
            opt(self.time_to_fidelity, " s")
        )?;
        if let Some(t) = self.time_to_fidelity {
            writeln!(
                f,
                "bound at that time    {:.6}",
                locc_bound(self.lambda, self.gamma_g, t)
            )?;
        }
        writeln!(f, "lambda floor          {:.4e}", self.lambda_floor)?;
        writeln!(f, "nbar max              {}", opt(self.nbar_max, ""))?;
        writeln!(f, "T_eff                 {}", opt(self.t_eff, " K"))?;
        writeln!(f, "required Q            {}", opt(self.required_q, ""))?;
        writeln!(f, "weak-field ratio      {:.4e}", self.weak_field_ratio)?;
        for c in &self.checks {
            writeln!(
                f,
                "[{}] {:<18} {}",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.detail
            )?;
        }
        Ok(())
    }
}
