//! Collapse-model localization parameters for a homogeneous solid sphere:
//! CSL, quantum-gravity (QG), Diósi–Penrose (DP) and Károlyházy (K).

use std::fmt;
use std::str::FromStr;

use crate::constants::{planck_length, planck_mass, C, G, HBAR, M_NUCLEON};
use crate::error::{domain, ensure, Error, Result};
use crate::localization::LocalizationModel;
use crate::params::SphereSpec;

pub const GRW_GAMMA0: f64 = 1e-16;
pub const GRW_A: f64 = 100e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CslParams {
    pub gamma0: f64,
    pub a_csl: f64,
}

impl Default for CslParams {
    fn default() -> Self {
        CslParams { gamma0: GRW_GAMMA0, a_csl: GRW_A }
    }
}

impl CslParams {
    pub fn new(gamma0: f64, a_csl: f64) -> Result<Self> {
        ensure(gamma0 > 0.0 && a_csl > 0.0, "CSL parameters must be positive")?;
        Ok(CslParams { gamma0, a_csl })
    }

    /// GRW values with γ⁰ enhanced by `multiplier`.
    pub fn adler(multiplier: f64) -> Result<Self> {
        Self::new(GRW_GAMMA0 * multiplier, GRW_A)
    }
}

/// Which a_c expression the K-model uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KBranch {
    /// a_c = (R/l_P)^{2/3} l_C
    #[default]
    Macroscopic,
    /// a_c = l_C³/l_P²
    Microscopic,
    /// Macroscopic above the radius where both expressions coincide.
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CollapseModelId {
    Csl(CslParams),
    Qg,
    Dp,
    DpMicroscopic { r0: f64 },
    K(KBranch),
}

/// f(x) = (6/x⁴)[1 − 2/x² + (1 + 2/x²)e^{−x²}]
pub fn csl_shape_f(x: f64) -> f64 {
    let x = x.abs();
    if x < 0.1 {
        csl_shape_series(x)
    } else {
        csl_shape_direct(x)
    }
}

/// Taylor branch used below x = 0.1.
pub fn csl_shape_series(x: f64) -> f64 {
    // Σ_j 6(−1)^j (j+1)/(j+3)! x^{2j}
    let z = x * x;
    let mut pow = 1.0;
    let mut fact = 6.0; // (j+3)!
    let mut sum = 0.0;
    for j in 0..12 {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * 6.0 * (j + 1) as f64 / fact * pow;
        pow *= z;
        fact *= (j + 4) as f64;
    }
    sum
}

/// Closed form, arranged so the cancellation stays mild down to x = 0.1.
pub fn csl_shape_direct(x: f64) -> f64 {
    let z = x * x;
    6.0 / (z * z) * (2.0 + (1.0 + 2.0 / z) * (-z).exp_m1())
}

pub fn csl_model(sphere: &SphereSpec, p: &CslParams) -> Result<LocalizationModel> {
    let n = sphere.mass() / M_NUCLEON;
    let gamma = n * n * p.gamma0 * csl_shape_f(sphere.radius / p.a_csl);
    LocalizationModel::saturating(gamma, p.a_csl, "csl")
}

/// Λ_CSL = (m/m₀)² γ⁰ f(R/a) / (4a²)
pub fn csl_lambda(sphere: &SphereSpec, p: &CslParams) -> f64 {
    let n = sphere.mass() / M_NUCLEON;
    n * n * p.gamma0 / (4.0 * p.a_csl * p.a_csl) * csl_shape_f(sphere.radius / p.a_csl)
}

pub fn qg_localization_distance() -> f64 {
    HBAR * planck_mass() / (2.0 * C * M_NUCLEON * M_NUCLEON)
}

pub fn qg_model(sphere: &SphereSpec) -> Result<LocalizationModel> {
    let m = sphere.mass();
    let mp = planck_mass();
    let lambda = C.powi(4) * m * m * M_NUCLEON.powi(4) / (HBAR.powi(3) * mp.powi(3));
    LocalizationModel::from_lambda(lambda, qg_localization_distance(), "qg")
}

/// Gm²/(2R³ħ)
pub fn dp_lambda(sphere: &SphereSpec) -> f64 {
    let m = sphere.mass();
    G * m * m / (2.0 * sphere.radius.powi(3) * HBAR)
}

/// Saturating at 6Gm²/(5Rħ) with a = √(3/5)·R so that γ/(4a²) = Λ_DP.
pub fn dp_model(sphere: &SphereSpec) -> Result<LocalizationModel> {
    let m = sphere.mass();
    let r = sphere.radius;
    let gamma = 6.0 * G * m * m / (5.0 * r * HBAR);
    LocalizationModel::saturating(gamma, (0.6f64).sqrt() * r, "dp")
}

pub fn dp_microscopic_model(sphere: &SphereSpec, r0: f64) -> Result<LocalizationModel> {
    ensure(r0 > 0.0, "mass-density resolution r0 must be positive")?;
    if r0 > sphere.radius {
        return Err(domain(format!(
            "r0 = {r0:e} m exceeds the sphere radius {:e} m",
            sphere.radius
        )));
    }
    let lambda = (sphere.radius / r0).powi(3) * dp_lambda(sphere);
    LocalizationModel::from_lambda(lambda, r0 / 2.0, "dp-micro")
}

pub fn compton_wavelength(mass: f64) -> f64 {
    HBAR / (mass * C)
}

/// Radius at which the two K-model a_c expressions coincide (R = l_C³/l_P²).
pub fn k_crossover_radius(density: f64) -> f64 {
    // l_C = ħ/(ρ·4π/3·R³·c) so R^{10} = (ħ/(ρ·4π/3·c))³ / l_P²
    let k = HBAR / (density * 4.0 / 3.0 * std::f64::consts::PI * C);
    (k.powi(3) / planck_length().powi(2)).powf(0.1)
}

pub fn k_cutoff(sphere: &SphereSpec, branch: KBranch) -> f64 {
    let lc = compton_wavelength(sphere.mass());
    let lp = planck_length();
    let macro_ac = (sphere.radius / lp).powf(2.0 / 3.0) * lc;
    let micro_ac = lc.powi(3) / (lp * lp);
    match branch {
        KBranch::Macroscopic => macro_ac,
        KBranch::Microscopic => micro_ac,
        KBranch::Auto => {
            if sphere.radius >= k_crossover_radius(sphere.density) {
                macro_ac
            } else {
                micro_ac
            }
        }
    }
}

/// Λ_K = ħ/(8 m a_c⁴), pure-quadratic.
pub fn k_model(sphere: &SphereSpec, branch: KBranch) -> Result<LocalizationModel> {
    let ac = k_cutoff(sphere, branch);
    LocalizationModel::pure_quadratic(HBAR / (8.0 * sphere.mass() * ac.powi(4)), "k")
}

pub fn model_for(id: &CollapseModelId, sphere: &SphereSpec) -> Result<LocalizationModel> {
    let m = match id {
        CollapseModelId::Csl(p) => csl_model(sphere, p)?,
        CollapseModelId::Qg => qg_model(sphere)?,
        CollapseModelId::Dp => dp_model(sphere)?,
        CollapseModelId::DpMicroscopic { r0 } => dp_microscopic_model(sphere, *r0)?,
        CollapseModelId::K(b) => k_model(sphere, *b)?,
    };
    Ok(m.with_label(id.to_string()))
}

pub const MODEL_GRAMMAR: &str =
    "csl | csl:adler=<mult> | qg | dp | dp-micro:r0=<length nm> | k | k:branch=<macro|micro|auto>";

impl fmt::Display for CollapseModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CollapseModelId::Csl(p) => {
                // strip the rounding residue of gamma0 = 1e-16 * mult
                let mult: f64 = format!("{:.12e}", p.gamma0 / GRW_GAMMA0).parse().unwrap_or(f64::NAN);
                if p.a_csl == GRW_A && mult == 1.0 {
                    write!(f, "csl")
                } else if p.a_csl == GRW_A {
                    write!(f, "csl:adler={mult}")
                } else {
                    write!(f, "csl:gamma0={},a={}", p.gamma0, p.a_csl)
                }
            }
            CollapseModelId::Qg => write!(f, "qg"),
            CollapseModelId::Dp => write!(f, "dp"),
            CollapseModelId::DpMicroscopic { r0 } => write!(f, "dp-micro:r0={}", r0 / 1e-9),
            CollapseModelId::K(KBranch::Macroscopic) => write!(f, "k"),
            CollapseModelId::K(KBranch::Microscopic) => write!(f, "k:branch=micro"),
            CollapseModelId::K(KBranch::Auto) => write!(f, "k:branch=auto"),
        }
    }
}

impl FromStr for CollapseModelId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || domain(format!("unknown model '{s}', expected {MODEL_GRAMMAR}"));
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n.trim(), Some(a.trim())),
            None => (s.trim(), None),
        };
        let kv = |key: &str| -> Result<f64> {
            let a = arg.ok_or_else(bad)?;
            let (k, v) = a.split_once('=').ok_or_else(bad)?;
            if k.trim() != key {
                return Err(bad());
            }
            v.trim().parse::<f64>().map_err(|_| bad())
        };
        match (name.to_ascii_lowercase().as_str(), arg) {
            ("csl", None) => Ok(CollapseModelId::Csl(CslParams::default())),
            ("csl", Some(_)) => Ok(CollapseModelId::Csl(CslParams::adler(kv("adler")?)?)),
            ("qg", None) => Ok(CollapseModelId::Qg),
            ("dp", None) => Ok(CollapseModelId::Dp),
            ("dp-micro", Some(_)) => {
                let r0 = kv("r0")? * 1e-9;
                ensure(r0 > 0.0, "r0 must be positive")?;
                Ok(CollapseModelId::DpMicroscopic { r0 })
            }
            ("k", None) => Ok(CollapseModelId::K(KBranch::Macroscopic)),
            ("k", Some(a)) => {
                let (k, v) = a.split_once('=').ok_or_else(bad)?;
                if k.trim() != "branch" {
                    return Err(bad());
                }
                match v.trim() {
                    "macro" => Ok(CollapseModelId::K(KBranch::Macroscopic)),
                    "micro" => Ok(CollapseModelId::K(KBranch::Microscopic)),
                    "auto" => Ok(CollapseModelId::K(KBranch::Auto)),
                    _ => Err(bad()),
                }
            }
            _ => Err(bad()),
        }
    }
}
