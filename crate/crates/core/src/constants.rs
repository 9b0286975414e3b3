//! CODATA 2018 constants, SI units.

/// Newton's gravitational constant, m³ kg⁻¹ s⁻².
pub const G: f64 = 6.67430e-11;
/// Reduced Planck constant, J s.
pub const HBAR: f64 = 1.054571817e-34;
/// Boltzmann constant, J K⁻¹.
pub const K_B: f64 = 1.380649e-23;
/// Planck mass, kg.
pub const PLANCK_MASS: f64 = 2.176434e-8;
/// Planck length, m.
pub const PLANCK_LENGTH: f64 = 1.616255e-35;
