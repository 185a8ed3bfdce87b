//! Physical constants (CODATA 2018, 12 significant digits) and unit helpers.

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.05457181765e-34;

/// Speed of light in vacuum, m/s (exact).
pub const C_LIGHT: f64 = 2.99792458e8;

/// Vacuum permittivity, F/m.
pub const EPSILON_0: f64 = 8.85418781280e-12;

/// 2π, for ordinary-frequency ↔ angular-frequency conversion.
pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Convert an ordinary frequency or rate (Hz) to angular units (rad/s).
///
/// Configuration files and the public rate structs carry ordinary
/// frequencies ("value/2π" style); all Hamiltonian and Liouvillian math is
/// done in angular units. This is the single declared conversion boundary.
#[inline]
pub fn to_angular(ordinary_hz: f64) -> f64 {
    TWO_PI * ordinary_hz
}

/// Convert an angular rate (rad/s) to ordinary frequency units (Hz).
#[inline]
pub fn to_ordinary(angular_rad_s: f64) -> f64 {
    angular_rad_s / TWO_PI
}
