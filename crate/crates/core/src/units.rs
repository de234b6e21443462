//! Conversions between `ω/2π` values as quoted in configs and output files,
//! and the angular SI values used everywhere else.

use std::f64::consts::TAU;

pub fn mhz(x: f64) -> f64 {
    TAU * x * 1e6
}

pub fn ghz(x: f64) -> f64 {
    TAU * x * 1e9
}

pub fn khz(x: f64) -> f64 {
    TAU * x * 1e3
}

pub fn to_mhz(omega: f64) -> f64 {
    omega / TAU / 1e6
}

pub fn to_ghz(omega: f64) -> f64 {
    omega / TAU / 1e9
}

pub fn ns(x: f64) -> f64 {
    x / 1e9
}

pub fn us(x: f64) -> f64 {
    x / 1e6
}

pub fn to_ns(t: f64) -> f64 {
    t * 1e9
}

/// Fixed 17-significant-digit rendering used by every CSV writer.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 {
        // avoid "-0" drifting between platforms
        return "0.0000000000000000e0".to_string();
    }
    format!("{x:.16e}")
}
