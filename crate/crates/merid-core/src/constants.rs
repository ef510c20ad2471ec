//! CODATA 2018 constants and unit conversions. Everything is SI.

use crate::error::{domain, Result};

pub const HBAR: f64 = 1.054_571_817e-34;
pub const K_B: f64 = 1.380_649e-23;
pub const C: f64 = 299_792_458.0;
pub const G: f64 = 6.674_30e-11;
pub const AMU: f64 = 1.660_539_066_60e-27;
/// Reference nucleon mass used by the collapse models.
pub const M_NUCLEON: f64 = AMU;

pub const PASCAL_PER_TORR: f64 = 133.322_368;

/// Riemann zeta(9).
pub const ZETA_9: f64 = 1.002_008_392_826_082;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub k_b: f64,
    pub c: f64,
    pub g: f64,
    pub amu: f64,
    pub m_nucleon: f64,
    pub m_planck: f64,
    pub l_planck: f64,
}

impl PhysicalConstants {
    pub fn codata2018() -> Self {
        PhysicalConstants {
            hbar: HBAR,
            k_b: K_B,
            c: C,
            g: G,
            amu: AMU,
            m_nucleon: M_NUCLEON,
            m_planck: planck_mass(),
            l_planck: planck_length(),
        }
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::codata2018()
    }
}

pub fn planck_mass() -> f64 {
    (HBAR * C / G).sqrt()
}

pub fn planck_length() -> f64 {
    (G * HBAR / (C * C * C)).sqrt()
}

pub fn torr_to_pascal(p: f64) -> Result<f64> {
    if !(p >= 0.0) {
        return Err(domain(format!("pressure must be non-negative, got {p} Torr")));
    }
    Ok(p * PASCAL_PER_TORR)
}

pub fn pascal_to_torr(p: f64) -> Result<f64> {
    if !(p >= 0.0) {
        return Err(domain(format!("pressure must be non-negative, got {p} Pa")));
    }
    Ok(p / PASCAL_PER_TORR)
}
