//! Cavity-optomechanical squared-position measurement: coupling, linewidth,
//! photon budget, measurement strength and the bounds on t₁ and χ.

use std::f64::consts::PI;
use std::fmt;

use crate::constants::C;
use crate::error::{ensure, Result};
use crate::gaussian::zero_point_motion;
use crate::params::{SphereSpec, TrapSpec};
use crate::standard::clausius_mossotti;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavitySpec {
    pub finesse: f64,
    /// m
    pub length: f64,
    /// m
    pub wavelength: f64,
    /// m
    pub waist: f64,
}

impl CavitySpec {
    pub fn new(finesse: f64, length: f64, wavelength: f64, waist: f64) -> Result<Self> {
        ensure(
            finesse > 0.0 && length > 0.0 && wavelength > 0.0 && waist > 0.0,
            "cavity parameters must be positive",
        )?;
        Ok(CavitySpec { finesse, length, wavelength, waist })
    }

    /// V_c = πW²L/4
    pub fn mode_volume(&self) -> f64 {
        PI * self.waist * self.waist * self.length / 4.0
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * PI / self.wavelength
    }
}

/// ε_c = 3 Re[(ε−1)/(ε+2)]
pub fn eps_c(sphere: &SphereSpec) -> f64 {
    3.0 * clausius_mossotti(sphere.eps_optical).re
}

/// g₀ = ε_c x₀² k³ c V/(4V_c)
pub fn coupling_g0(sphere: &SphereSpec, cavity: &CavitySpec, trap: &TrapSpec) -> Result<f64> {
    let x0 = zero_point_motion(sphere.mass(), trap.omega)?;
    let k = cavity.wavenumber();
    Ok(eps_c(sphere) * x0 * x0 * k.powi(3) * C * sphere.volume() / (4.0 * cavity.mode_volume()))
}

/// πc/(FL) from the mirrors.
pub fn kappa_empty(cavity: &CavitySpec) -> f64 {
    PI * C / (cavity.finesse * cavity.length)
}

/// Loss by scattering off the sphere, c ε_c² V² k⁴/(16π V_c).
pub fn kappa_scattering(sphere: &SphereSpec, cavity: &CavitySpec) -> f64 {
    let e = eps_c(sphere);
    let v = sphere.volume();
    C * e * e * v * v * cavity.wavenumber().powi(4) / (16.0 * PI * cavity.mode_volume())
}

pub fn cavity_kappa(sphere: &SphereSpec, cavity: &CavitySpec) -> f64 {
    kappa_empty(cavity) + kappa_scattering(sphere, cavity)
}

/// Photons needed so that φ_ds cancels φ_tof: ωt₁κx₀²/(8g₀σ²).
pub fn photon_number(t1: f64, trap: &TrapSpec, g0: f64, kappa: f64) -> Result<f64> {
    ensure(t1 > 0.0 && g0 > 0.0 && kappa > 0.0, "t1, g0 and kappa must be positive")?;
    let wt = trap.omega * t1;
    Ok(wt * kappa / (8.0 * g0 * (1.0 + wt * wt)))
}

/// κ/(8g₀t₁ω), valid for t₁ω ≫ 1.
pub fn photon_number_approx(t1: f64, trap: &TrapSpec, g0: f64, kappa: f64) -> Result<f64> {
    ensure(t1 > 0.0 && g0 > 0.0 && kappa > 0.0, "t1, g0 and kappa must be positive")?;
    Ok(kappa / (8.0 * g0 * t1 * trap.omega))
}

/// ḡ = g₀σ²/x₀² at the measurement time.
pub fn effective_coupling(t1: f64, trap: &TrapSpec, g0: f64) -> f64 {
    let wt = trap.omega * t1;
    g0 * (1.0 + wt * wt)
}

/// φ_ds ≈ −2ḡ n_ph/κ
pub fn phase_ds(gbar: f64, n_ph: f64, kappa: f64) -> f64 {
    -2.0 * gbar * n_ph / kappa
}

/// χ ≈ 2√2 ḡ√n_ph/κ
pub fn measurement_strength_pulsed(gbar: f64, n_ph: f64, kappa: f64) -> f64 {
    2.0 * 2f64.sqrt() * gbar * n_ph.sqrt() / kappa
}

/// Phase-compensated χ = (t₁ω)^{3/2}√(g₀/κ).
pub fn measurement_strength(t1: f64, trap: &TrapSpec, g0: f64, kappa: f64) -> Result<f64> {
    ensure(t1 >= 0.0 && g0 > 0.0 && kappa > 0.0, "t1 must be non-negative, g0 and kappa positive")?;
    Ok((t1 * trap.omega).powf(1.5) * (g0 / kappa).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringLocalization {
    /// Λ⁰_sc (m⁻² s⁻¹)
    pub lambda0: f64,
    /// Γ⁰_sc = Λ⁰_sc x₀² (s⁻¹)
    pub gamma0: f64,
}

/// Λ⁰_sc = ε_c² c V² k⁶/(6π V_c)
pub fn scattering_localization(
    sphere: &SphereSpec,
    cavity: &CavitySpec,
    trap: &TrapSpec,
) -> Result<ScatteringLocalization> {
    let e = eps_c(sphere);
    let v = sphere.volume();
    let lambda0 = e * e * C * v * v * cavity.wavenumber().powi(6) / (6.0 * PI * cavity.mode_volume());
    let x0 = zero_point_motion(sphere.mass(), trap.omega)?;
    Ok(ScatteringLocalization { lambda0, gamma0: lambda0 * x0 * x0 })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OmBranch {
    /// κ ≫ ḡ, bound √(κ/g₀)/ω
    Adiabatic,
    /// ∫Γ_sc dt ≪ 1, bound 4g₀/(Γ⁰_sc ω)
    Scattering,
}

impl fmt::Display for OmBranch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OmBranch::Adiabatic => "adiabatic",
            OmBranch::Scattering => "scattering",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct T1Bound {
    pub t1_om: f64,
    pub adiabatic: f64,
    pub scattering: f64,
    pub branch: OmBranch,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiBound {
    pub chi_max: f64,
    pub adiabatic: f64,
    pub scattering: f64,
    pub branch: OmBranch,
}

pub fn t1_bound(sphere: &SphereSpec, cavity: &CavitySpec, trap: &TrapSpec) -> Result<T1Bound> {
    let g0 = coupling_g0(sphere, cavity, trap)?;
    let kappa = cavity_kappa(sphere, cavity);
    let sc = scattering_localization(sphere, cavity, trap)?;
    let adiabatic = (kappa / g0).sqrt() / trap.omega;
    let scattering = 4.0 * g0 / (sc.gamma0 * trap.omega);
    let (t1_om, branch) =
        if adiabatic <= scattering { (adiabatic, OmBranch::Adiabatic) } else { (scattering, OmBranch::Scattering) };
    Ok(T1Bound { t1_om, adiabatic, scattering, branch })
}

/// χ_max = min{(κ/g₀)^{1/4}, 8g₀²/√(κ Γ⁰³)}
pub fn chi_upper_bound(sphere: &SphereSpec, cavity: &CavitySpec, trap: &TrapSpec) -> Result<ChiBound> {
    let g0 = coupling_g0(sphere, cavity, trap)?;
    let kappa = cavity_kappa(sphere, cavity);
    let sc = scattering_localization(sphere, cavity, trap)?;
    let adiabatic = (kappa / g0).powf(0.25);
    let scattering = 8.0 * g0 * g0 / (kappa * sc.gamma0.powi(3)).sqrt();
    let (chi_max, branch) =
        if adiabatic <= scattering { (adiabatic, OmBranch::Adiabatic) } else { (scattering, OmBranch::Scattering) };
    Ok(ChiBound { chi_max, adiabatic, scattering, branch })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulsedCheck {
    pub value: f64,
    pub pass: bool,
}

/// (2n̄+1)ωT/4 against 0.1.
pub fn pulsed_regime_check(trap: &TrapSpec, t_pulse: f64) -> Result<PulsedCheck> {
    ensure(t_pulse > 0.0, "pulse length must be positive")?;
    let value = (2.0 * trap.nbar + 1.0) * trap.omega * t_pulse / 4.0;
    Ok(PulsedCheck { value, pass: value <= 0.1 })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptomechBounds {
    pub g0: f64,
    pub kappa: f64,
    pub gamma0_sc: f64,
    pub t1_om: f64,
    pub chi_max: f64,
    pub branch: OmBranch,
    omega: f64,
}

impl OptomechBounds {
    pub fn compute(sphere: &SphereSpec, cavity: &CavitySpec, trap: &TrapSpec) -> Result<Self> {
        let t1 = t1_bound(sphere, cavity, trap)?;
        let chi = chi_upper_bound(sphere, cavity, trap)?;
        Ok(OptomechBounds {
            g0: coupling_g0(sphere, cavity, trap)?,
            kappa: cavity_kappa(sphere, cavity),
            gamma0_sc: scattering_localization(sphere, cavity, trap)?.gamma0,
            t1_om: t1.t1_om,
            chi_max: chi.chi_max,
            branch: t1.branch,
            omega: trap.omega,
        })
    }

    pub fn n_ph(&self, t1: f64) -> Result<f64> {
        let trap = TrapSpec { omega: self.omega, nbar: 0.0 };
        photon_number(t1, &trap, self.g0, self.kappa)
    }
}
