//! Physical constants and wavelength/frequency conversions.
//!
//! Everything inside the crate is SI: rad/s, rad/m, s/m, m. Wavelengths only
//! show up at I/O boundaries.

use std::f64::consts::PI;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Angular frequency (rad/s) of light with vacuum wavelength `lambda_m` (m).
pub fn omega_from_wavelength(lambda_m: f64) -> f64 {
    2.0 * PI * SPEED_OF_LIGHT / lambda_m
}

/// Vacuum wavelength (m) of light with angular frequency `omega` (rad/s).
pub fn wavelength_from_omega(omega: f64) -> f64 {
    2.0 * PI * SPEED_OF_LIGHT / omega
}

/// Parses a length with an optional unit suffix (`m`, `mm`, `cm`, `um`, `μm`,
/// `nm`). A bare number is taken as metres.
pub fn parse_length(text: &str) -> Option<f64> {
    let text = text.trim();
    let units: [(&str, f64); 6] = [
        ("nm", 1e9),
        ("um", 1e6),
        ("μm", 1e6),
        ("mm", 1e3),
        ("cm", 1e2),
        ("m", 1.0),
    ];
    for (suffix, divisor) in units {
        if let Some(number) = text.strip_suffix(suffix) {
            return number.trim().parse::<f64>().ok().map(|v| v / divisor);
        }
    }
    text.parse::<f64>().ok()
}
