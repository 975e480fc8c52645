//! CODATA constants used throughout.

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K.
pub const K_B: f64 = 1.380_649e-23;
/// Speed of light in vacuum, m/s.
pub const C_LIGHT: f64 = 2.997_924_58e8;

pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Hz to rad/s.
pub fn hz(nu: f64) -> f64 {
    TWO_PI * nu
}

/// rad/s to Hz.
pub fn to_hz(omega: f64) -> f64 {
    omega / TWO_PI
}
