//! Environmental decoherence: residual gas scattering and blackbody radiation.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::constants::{C, HBAR, K_B, ZETA_9};
use crate::error::{domain, Error, Result};
use crate::localization::LocalizationModel;
use crate::params::{EnvironmentSpec, SphereSpec};

pub fn air_thermal_wavelength(env: &EnvironmentSpec) -> f64 {
    2.0 * PI * HBAR / (2.0 * PI * env.gas_mass * K_B * env.t_env).sqrt()
}

/// Root-mean-square gas speed.
pub fn air_mean_velocity(env: &EnvironmentSpec) -> f64 {
    (3.0 * K_B * env.t_env / env.gas_mass).sqrt()
}

pub fn air_localization_parameter(env: &EnvironmentSpec, sphere: &SphereSpec) -> f64 {
    let v = air_mean_velocity(env);
    8.0 * (2.0 * PI).sqrt() * env.gas_mass * v * env.pressure * sphere.radius.powi(2)
        / (3.0 * 3f64.sqrt() * HBAR * HBAR)
}

pub fn air_saturation_rate(env: &EnvironmentSpec, sphere: &SphereSpec) -> f64 {
    let v = air_mean_velocity(env);
    16.0 * PI * (2.0 * PI).sqrt() / 3f64.sqrt() * env.pressure * sphere.radius.powi(2)
        / (v * env.gas_mass)
}

pub fn air_model(env: &EnvironmentSpec, sphere: &SphereSpec) -> Result<LocalizationModel> {
    let lam = air_thermal_wavelength(env);
    let gamma = air_saturation_rate(env, sphere);
    let m = LocalizationModel::saturating(gamma, lam / 2.0, "air")?;
    let direct = air_localization_parameter(env, sphere);
    if direct > 0.0 && ((m.lambda() - direct) / direct).abs() > 1e-6 {
        return Err(Error::Numerical(format!(
            "air rates inconsistent: gamma/(4a^2) = {:e}, Lambda_air = {direct:e}",
            m.lambda()
        )));
    }
    Ok(m)
}

pub fn bb_thermal_wavelength(t_env: f64) -> Result<f64> {
    if !(t_env > 0.0) {
        return Err(domain("blackbody temperature must be positive"));
    }
    Ok(PI.powf(2.0 / 3.0) * HBAR * C / (K_B * t_env))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlackbodyBreakdown {
    pub lambda_sc: f64,
    pub lambda_emit: f64,
    pub lambda_abs: f64,
    pub total: f64,
}

/// (ε − 1)/(ε + 2)
pub fn clausius_mossotti(eps: Complex64) -> Complex64 {
    (eps - 1.0) / (eps + 2.0)
}

pub fn blackbody_localization(sphere: &SphereSpec, env: &EnvironmentSpec) -> Result<BlackbodyBreakdown> {
    let cm = clausius_mossotti(sphere.eps_bb);
    if cm.im < 0.0 {
        return Err(domain("blackbody Clausius-Mossotti factor has negative imaginary part"));
    }
    let r = sphere.radius;
    let thermal = |t: f64| K_B * t / (HBAR * C);
    let fact8 = 40320.0;
    let lambda_sc =
        fact8 * 8.0 * ZETA_9 * C * r.powi(6) / (9.0 * PI) * thermal(env.t_env).powi(9) * cm.re * cm.re;
    let ea = 16.0 * PI.powi(5) * C * r.powi(3) / 189.0 * cm.im;
    let lambda_emit = ea * thermal(sphere.t_internal).powi(6);
    let lambda_abs = ea * thermal(env.t_env).powi(6);
    Ok(BlackbodyBreakdown {
        lambda_sc,
        lambda_emit,
        lambda_abs,
        total: lambda_sc + lambda_emit + lambda_abs,
    })
}

/// Blackbody decoherence in the long-wavelength (pure-quadratic) limit.
pub fn blackbody_model(sphere: &SphereSpec, env: &EnvironmentSpec) -> Result<LocalizationModel> {
    let b = blackbody_localization(sphere, env)?;
    LocalizationModel::pure_quadratic(b.total, "blackbody")
}

/// Saturating variant with a = λ_th^bb / 2.
pub fn blackbody_model_saturating(
    sphere: &SphereSpec,
    env: &EnvironmentSpec,
) -> Result<LocalizationModel> {
    let b = blackbody_localization(sphere, env)?;
    LocalizationModel::from_lambda(b.total, bb_thermal_wavelength(env.t_env)? / 2.0, "blackbody")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::{torr_to_pascal, AMU};
    use crate::localization::ModelKind;
    use crate::params::DefaultParameterSet;
    use proptest::prelude::*;

    fn env(p_torr: f64) -> EnvironmentSpec {
        DefaultParameterSet::default().environment(torr_to_pascal(p_torr).unwrap()).unwrap()
    }

    fn sphere(r: f64, ti: f64) -> SphereSpec {
        DefaultParameterSet::default().sphere(r, ti).unwrap()
    }

    #[test]
    fn air_scales() {
        let e = env(1e-12);
        let lam = air_thermal_wavelength(&e);
        assert!((lam / 0.15e-9 - 1.0).abs() < 0.05, "{lam}");
        // frozen, mpmath: 2 pi hbar / sqrt(2 pi m_a k_B 4.5)
        assert!((lam / 1.529_042e-10 - 1.0).abs() < 1e-4);
        let hot = EnvironmentSpec::new(e.pressure, 4.0 * e.t_env, e.gas_mass).unwrap();
        assert!((air_thermal_wavelength(&hot) * 2.0 / lam - 1.0).abs() < 1e-14);
        let heavy = EnvironmentSpec::new(e.pressure, e.t_env, 4.0 * e.gas_mass).unwrap();
        assert!((air_thermal_wavelength(&heavy) * 2.0 / lam - 1.0).abs() < 1e-14);
        let v = air_mean_velocity(&e);
        assert!((v / 62.246 - 1.0).abs() < 1e-4, "{v}");
        assert!((air_mean_velocity(&hot) / v - 2.0).abs() < 1e-14);
        assert!((air_mean_velocity(&heavy) / v - 0.5).abs() < 1e-14);
    }

    #[test]
    fn air_rates() {
        let e = env(1e-12);
        let s = sphere(50e-9, 200.0);
        let g = air_saturation_rate(&e, &s);
        assert!((g / 8.097 - 1.0).abs() < 1e-3, "{g}");
        assert_eq!(air_localization_parameter(&env(0.0), &s), 0.0);
        let s2 = sphere(100e-9, 200.0);
        assert!((air_localization_parameter(&e, &s2) / air_localization_parameter(&e, &s) - 4.0).abs() < 1e-12);
        assert!((air_saturation_rate(&e, &s2) / g - 4.0).abs() < 1e-12);
        assert!((air_saturation_rate(&env(2e-12), &s) / g - 2.0).abs() < 1e-12);
        let lam = air_thermal_wavelength(&e);
        let id = lam * lam * air_localization_parameter(&e, &s);
        assert!((id / g - 1.0).abs() < 1e-9);
    }

    #[test]
    fn air_model_fields() {
        let e = env(1e-12);
        let s = sphere(50e-9, 200.0);
        let m = air_model(&e, &s).unwrap();
        assert_eq!(m.kind, ModelKind::Saturating);
        assert_eq!(m.a, air_thermal_wavelength(&e) / 2.0);
        assert!((m.lambda() / air_localization_parameter(&e, &s) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn blackbody_wavelength() {
        let l = bb_thermal_wavelength(4.5).unwrap();
        assert!(l > 0.9e-3 && l < 1.2e-3);
        assert!((l / 1.0915e-3 - 1.0).abs() < 1e-3, "{l}");
        assert!((bb_thermal_wavelength(9.0).unwrap() * 2.0 / l - 1.0).abs() < 1e-14);
        assert!(bb_thermal_wavelength(0.0).is_err());
    }

    #[test]
    fn blackbody_breakdown() {
        let e = env(1e-12);
        let b = blackbody_localization(&sphere(50e-9, 4.5), &e).unwrap();
        assert_eq!(b.lambda_emit, b.lambda_abs);
        assert_eq!(b.total, b.lambda_sc + b.lambda_emit + b.lambda_abs);
        let hot = blackbody_localization(&sphere(50e-9, 200.0), &e).unwrap();
        assert!(hot.lambda_emit >= 1e3 * (hot.lambda_sc + hot.lambda_abs));
        // frozen: direct evaluation of the three closed forms
        assert!((hot.lambda_sc / 1.86e-3 - 1.0).abs() < 5e-3, "{}", hot.lambda_sc);
        assert!((hot.lambda_emit / 4.30e16 - 1.0).abs() < 5e-3, "{}", hot.lambda_emit);
        assert!((hot.lambda_abs / 5.58e6 - 1.0).abs() < 5e-3, "{}", hot.lambda_abs);
        let big = blackbody_localization(&sphere(100e-9, 200.0), &e).unwrap();
        assert!((big.lambda_sc / hot.lambda_sc - 64.0).abs() < 1e-9);
        assert!((big.lambda_emit / hot.lambda_emit - 8.0).abs() < 1e-9);
        let e2 = DefaultParameterSet { t_env: 9.0, ..Default::default() }.environment(e.pressure).unwrap();
        let warm = blackbody_localization(&sphere(50e-9, 200.0), &e2).unwrap();
        assert!((warm.lambda_sc / hot.lambda_sc - 512.0).abs() < 1e-9);
        let ti2 = blackbody_localization(&sphere(50e-9, 400.0), &e).unwrap();
        assert!((ti2.lambda_emit / hot.lambda_emit - 64.0).abs() < 1e-9);
    }

    #[test]
    fn blackbody_rejects_gain_medium() {
        let mut s = sphere(50e-9, 200.0);
        s.eps_bb = Complex64::new(2.1, -0.5);
        assert!(blackbody_localization(&s, &env(1e-12)).is_err());
    }

    #[test]
    fn blackbody_models() {
        let e = env(1e-12);
        let s = sphere(50e-9, 200.0);
        let m = blackbody_model(&s, &e).unwrap();
        assert_eq!(m.kind, ModelKind::PureQuadratic);
        assert_eq!(m.lambda(), blackbody_localization(&s, &e).unwrap().total);
        let ms = blackbody_model_saturating(&s, &e).unwrap();
        assert!((ms.a / 0.546e-3 - 1.0).abs() < 2e-3, "{}", ms.a);
        assert!((ms.lambda() / m.lambda() - 1.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn connection_identity(lp in -16.0f64..-6.0, lr in -8.5f64..-5.5, t in 0.5f64..300.0, ma in 2.0f64..100.0) {
            let e = EnvironmentSpec::from_torr(10f64.powf(lp), t, ma * AMU).unwrap();
            let s = sphere(10f64.powf(lr), 200.0);
            let lam = air_thermal_wavelength(&e);
            let g = air_saturation_rate(&e, &s);
            prop_assert!((lam * lam * air_localization_parameter(&e, &s) / g - 1.0).abs() < 1e-9);
        }

        #[test]
        fn monotone_in_inputs(lp in -16.0f64..-6.0, lr in -8.5f64..-5.5, t in 0.5f64..300.0, ti in 0.0f64..400.0, k in 1.001f64..2.0) {
            let e = EnvironmentSpec::from_torr(10f64.powf(lp), t, 28.97 * AMU).unwrap();
            let r = 10f64.powf(lr);
            let s = sphere(r, ti);
            let b = blackbody_localization(&s, &e).unwrap();
            let ep = EnvironmentSpec::new(e.pressure * k, t, e.gas_mass).unwrap();
            let et = EnvironmentSpec::new(e.pressure, t * k, e.gas_mass).unwrap();
            prop_assert!(air_saturation_rate(&ep, &s) >= air_saturation_rate(&e, &s));
            prop_assert!(air_localization_parameter(&et, &s) >= air_localization_parameter(&e, &s));
            prop_assert!(blackbody_localization(&s, &et).unwrap().total >= b.total);
            prop_assert!(blackbody_localization(&sphere(r * k, ti), &e).unwrap().total >= b.total);
            prop_assert!(blackbody_localization(&sphere(r, ti * k), &e).unwrap().total >= b.total);
            prop_assert!(b.lambda_sc >= 0.0 && b.lambda_emit >= 0.0 && b.lambda_abs >= 0.0);
        }
    }
}
