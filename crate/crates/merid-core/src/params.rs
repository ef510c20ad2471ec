//! Sphere, environment and trap descriptions plus the default experimental parameter set.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constants::AMU;
use crate::error::{ensure, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphereSpec {
    pub radius: f64,
    pub density: f64,
    pub eps_optical: Complex64,
    pub eps_bb: Complex64,
    pub t_internal: f64,
}

impl SphereSpec {
    pub fn new(
        radius: f64,
        density: f64,
        eps_optical: Complex64,
        eps_bb: Complex64,
        t_internal: f64,
    ) -> Result<Self> {
        ensure(radius > 0.0 && radius.is_finite(), "sphere radius must be positive")?;
        ensure(density > 0.0 && density.is_finite(), "sphere density must be positive")?;
        ensure(t_internal >= 0.0, "internal temperature must be non-negative")?;
        ensure(
            eps_optical.im >= 0.0 && eps_bb.im >= 0.0,
            "dielectric constants must have non-negative imaginary part",
        )?;
        Ok(SphereSpec { radius, density, eps_optical, eps_bb, t_internal })
    }

    pub fn volume(&self) -> f64 {
        4.0 / 3.0 * PI * self.radius.powi(3)
    }

    pub fn mass(&self) -> f64 {
        self.density * self.volume()
    }

    pub fn with_radius(&self, radius: f64) -> Result<Self> {
        Self::new(radius, self.density, self.eps_optical, self.eps_bb, self.t_internal)
    }
}

/// Mass of a homogeneous sphere.
pub fn sphere_mass(s: &SphereSpec) -> f64 {
    s.mass()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvironmentSpec {
    /// Pa
    pub pressure: f64,
    pub t_env: f64,
    pub gas_mass: f64,
}

impl EnvironmentSpec {
    pub fn new(pressure: f64, t_env: f64, gas_mass: f64) -> Result<Self> {
        ensure(pressure >= 0.0 && pressure.is_finite(), "pressure must be non-negative")?;
        ensure(t_env > 0.0 && t_env.is_finite(), "environment temperature must be positive")?;
        ensure(gas_mass > 0.0 && gas_mass.is_finite(), "gas molecule mass must be positive")?;
        Ok(EnvironmentSpec { pressure, t_env, gas_mass })
    }

    pub fn from_torr(pressure_torr: f64, t_env: f64, gas_mass: f64) -> Result<Self> {
        Self::new(crate::constants::torr_to_pascal(pressure_torr)?, t_env, gas_mass)
    }

    pub fn pressure_torr(&self) -> f64 {
        self.pressure / crate::constants::PASCAL_PER_TORR
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapSpec {
    pub omega: f64,
    pub nbar: f64,
}

impl TrapSpec {
    pub fn new(omega: f64, nbar: f64) -> Result<Self> {
        ensure(omega > 0.0 && omega.is_finite(), "trap frequency must be positive")?;
        ensure(nbar >= 0.0 && nbar.is_finite(), "phonon occupation must be non-negative")?;
        Ok(TrapSpec { omega, nbar })
    }
}

/// The experimental parameter table. Field names double as configuration keys.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DefaultParameterSet {
    /// kg/m³
    pub density: f64,
    pub eps_optical_re: f64,
    pub eps_optical_im: f64,
    /// rad/s
    pub omega: f64,
    pub nbar: f64,
    /// K
    pub t_env: f64,
    /// kg
    pub gas_mass: f64,
    pub eps_bb_re: f64,
    pub eps_bb_im: f64,
    /// m
    pub delta_x: f64,
    pub finesse: f64,
    /// m
    pub cavity_length: f64,
    /// m
    pub wavelength: f64,
    /// m
    pub waist: f64,
}

impl Default for DefaultParameterSet {
    fn default() -> Self {
        DefaultParameterSet {
            density: 2201.0,
            eps_optical_re: 2.1,
            eps_optical_im: 1e-10,
            omega: 2.0 * PI * 1e5,
            nbar: 0.1,
            t_env: 4.5,
            gas_mass: 28.97 * AMU,
            eps_bb_re: 2.1,
            eps_bb_im: 0.57,
            delta_x: 0.1e-9,
            finesse: 1.3e5,
            cavity_length: 2e-6,
            wavelength: 1064e-9,
            waist: 1.5e-6,
        }
    }
}

impl DefaultParameterSet {
    pub fn eps_optical(&self) -> Complex64 {
        Complex64::new(self.eps_optical_re, self.eps_optical_im)
    }

    pub fn eps_bb(&self) -> Complex64 {
        Complex64::new(self.eps_bb_re, self.eps_bb_im)
    }

    pub fn sphere(&self, radius: f64, t_internal: f64) -> Result<SphereSpec> {
        SphereSpec::new(radius, self.density, self.eps_optical(), self.eps_bb(), t_internal)
    }

    pub fn environment(&self, pressure_pa: f64) -> Result<EnvironmentSpec> {
        EnvironmentSpec::new(pressure_pa, self.t_env, self.gas_mass)
    }

    pub fn trap(&self) -> Result<TrapSpec> {
        TrapSpec::new(self.omega, self.nbar)
    }

    pub fn cavity(&self) -> Result<crate::optomech::CavitySpec> {
        crate::optomech::CavitySpec::new(
            self.finesse,
            self.cavity_length,
            self.wavelength,
            self.waist,
        )
    }
}
