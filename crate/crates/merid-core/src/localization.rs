//! Position-localization decoherence: Γ(x), the free-flight kernel F(p,x,t),
//! the normalized correlation function and the visibility exponent Θ.

use crate::constants::HBAR;
use crate::error::{domain, ensure, Result};
use crate::gaussian::GaussianState;
use crate::quadrature::integrate_with_breaks;
use crate::special::erf_deficit;

/// Absolute tolerance for every kernel and correlation integral.
pub const QUAD_TOL: f64 = 1e-10;
/// Gaussian weight below which the momentum integral is truncated.
pub const GAUSS_CUTOFF: f64 = 1e-16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Saturating,
    /// a → ∞ with finite Λ; γ and a are limit markers (0 and ∞).
    PureQuadratic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalizationModel {
    pub gamma: f64,
    pub a: f64,
    pub kind: ModelKind,
    pub source_label: String,
    lambda: f64,
}

impl LocalizationModel {
    pub fn saturating(gamma: f64, a: f64, label: impl Into<String>) -> Result<Self> {
        ensure(gamma >= 0.0 && gamma.is_finite(), "saturation rate must be non-negative")?;
        ensure(a > 0.0 && a.is_finite(), "localization distance must be positive")?;
        Ok(LocalizationModel {
            gamma,
            a,
            kind: ModelKind::Saturating,
            source_label: label.into(),
            lambda: gamma / (4.0 * a * a),
        })
    }

    /// Saturating model specified by (Λ, a); γ = 4a²Λ.
    pub fn from_lambda(lambda: f64, a: f64, label: impl Into<String>) -> Result<Self> {
        ensure(lambda >= 0.0 && lambda.is_finite(), "localization parameter must be non-negative")?;
        ensure(a > 0.0 && a.is_finite(), "localization distance must be positive")?;
        Ok(LocalizationModel {
            gamma: 4.0 * a * a * lambda,
            a,
            kind: ModelKind::Saturating,
            source_label: label.into(),
            lambda,
        })
    }

    pub fn pure_quadratic(lambda: f64, label: impl Into<String>) -> Result<Self> {
        ensure(lambda >= 0.0 && lambda.is_finite(), "localization parameter must be non-negative")?;
        Ok(LocalizationModel {
            gamma: 0.0,
            a: f64::INFINITY,
            kind: ModelKind::PureQuadratic,
            source_label: label.into(),
            lambda,
        })
    }

    /// Λ = γ/(4a²).
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// Distance 2a beyond which the decoherence rate saturates (∞ for pure-quadratic).
    pub fn saturation_distance(&self) -> f64 {
        2.0 * self.a
    }

    /// Whether superpositions of size `d` fall in the short-distance regime.
    pub fn is_short_distance(&self, d: f64) -> bool {
        match self.kind {
            ModelKind::PureQuadratic => true,
            ModelKind::Saturating => d < 2.0 * self.a,
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.source_label = label.into();
        self
    }
}

/// Γ(x) = γ(1 − e^{−x²/4a²}), or Λx² for pure-quadratic models.
pub fn gamma_of_x(m: &LocalizationModel, x: f64) -> f64 {
    match m.kind {
        ModelKind::PureQuadratic => m.lambda * x * x,
        ModelKind::Saturating => -m.gamma * (-(x * x) / (4.0 * m.a * m.a)).exp_m1(),
    }
}

/// −ln F(p,x,t) = ∫₀ᵗ Γ(x − pτ/m) dτ.
pub fn kernel_exponent(m: &LocalizationModel, p: f64, x: f64, t: f64, mass: f64) -> Result<f64> {
    ensure(t >= 0.0, "time must be non-negative")?;
    ensure(mass > 0.0, "mass must be positive")?;
    if t == 0.0 || m.lambda == 0.0 {
        return Ok(0.0);
    }
    let v = p / mass;
    match m.kind {
        ModelKind::PureQuadratic => {
            let e = x * x * t - x * v * t * t + v * v * t.powi(3) / 3.0;
            Ok(m.lambda * e.max(0.0))
        }
        ModelKind::Saturating => {
            // dimensionless u = τ/t; s(u) = (x − v t u)/(2a)
            let two_a = 2.0 * m.a;
            let g = |u: f64| {
                let s = (x - v * t * u) / two_a;
                -(-s * s).exp_m1()
            };
            let mut pts = vec![0.0, 1.0];
            if v != 0.0 {
                let centre = x / (v * t);
                let width = (two_a / (v * t)).abs();
                for k in [-8.0, -4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0, 8.0] {
                    let u = centre + k * width;
                    if u > 0.0 && u < 1.0 {
                        pts.push(u);
                    }
                }
            }
            pts.sort_by(f64::total_cmp);
            pts.dedup();
            let r = integrate_with_breaks(g, &pts, QUAD_TOL)?;
            Ok(m.gamma * t * r.value.clamp(0.0, 1.0))
        }
    }
}

/// F(p,x,t) = e^{−γt} exp[γ ∫₀ᵗ e^{−[(x−pτ/m)/2a]²} dτ].
pub fn kernel_f(m: &LocalizationModel, p: f64, x: f64, t: f64, mass: f64) -> Result<f64> {
    Ok((-kernel_exponent(m, p, x, t, mass)?).exp())
}

/// F(p,0,t) in closed form; this is the factor that multiplies the Fourier
/// transform of the position distribution.
pub fn kernel_f_origin(m: &LocalizationModel, p: f64, t: f64, mass: f64) -> f64 {
    match m.kind {
        ModelKind::PureQuadratic => (-m.lambda * p * p * t.powi(3) / (3.0 * mass * mass)).exp(),
        ModelKind::Saturating => {
            let u = p * t / (2.0 * m.a * mass);
            (-m.gamma * t * erf_deficit(u)).exp()
        }
    }
}

/// C(x,t)/C(0,t). `s` must be the decoherence-free (Schrödinger) state at time `s.t`;
/// the kernel adds the decoherence accumulated over that time.
pub fn coherence_function(m: &LocalizationModel, s: &GaussianState, x: f64) -> Result<f64> {
    ensure(x >= 0.0, "separation must be non-negative")?;
    s.check_heisenberg()?;
    if x == 0.0 {
        return Ok(1.0);
    }
    let gaussian = (-x * x * s.det4 / (8.0 * HBAR * HBAR * s.xx)).exp();
    let num = kernel_average(m, s, x)?;
    let den = kernel_average(m, s, 0.0)?;
    if !(den > 0.0) {
        return Err(crate::error::Error::Numerical(format!(
            "correlation normalization underflowed at t = {:e}",
            s.t
        )));
    }
    Ok((gaussian * num / den).clamp(0.0, 1.0))
}

/// ⟨F(p,x,t)⟩ over the momentum Gaussian attached to separation x.
fn kernel_average(m: &LocalizationModel, s: &GaussianState, x: f64) -> Result<f64> {
    let width = HBAR / s.xx.sqrt();
    let centre = s.xp_sym * x / (2.0 * s.xx);
    let mut half = 1.0f64;
    while (-0.5 * half * half).exp() >= GAUSS_CUTOFF {
        half *= 2.0;
    }
    let norm = 1.0 / (2.0 * std::f64::consts::PI).sqrt();
    let mut pts = vec![-half, half, 0.0];
    let mut k = 1.0;
    while k < half {
        pts.push(k);
        pts.push(-k);
        k *= 2.0;
    }
    pts.sort_by(f64::total_cmp);
    let failure = std::cell::RefCell::new(None);
    let r = integrate_with_breaks(
        |q| {
            let p = centre + q * width;
            match kernel_f(m, p, x, s.t, s.mass) {
                Ok(f) => norm * (-0.5 * q * q).exp() * f,
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    f64::NAN
                }
            }
        },
        &pts,
        QUAD_TOL,
    );
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(r?.value)
}

/// Θ(d) = γ − γ(√π a/d)·erf(d/2a); Λd²/3 for pure-quadratic models.
pub fn visibility_exponent(m: &LocalizationModel, d: f64) -> Result<f64> {
    if !(d > 0.0) {
        return Err(domain("superposition size must be positive"));
    }
    Ok(match m.kind {
        ModelKind::PureQuadratic => m.lambda * d * d / 3.0,
        ModelKind::Saturating => m.gamma * erf_deficit(d / (2.0 * m.a)),
    })
}

pub fn visibility(theta: f64, t2: f64) -> Result<f64> {
    ensure(theta >= 0.0 && t2 >= 0.0, "rate and time must be non-negative")?;
    Ok((-theta * t2).exp())
}

/// Several independent sources acting at once.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CompositeModel {
    pub components: Vec<LocalizationModel>,
}

impl CompositeModel {
    pub fn new(components: Vec<LocalizationModel>) -> Self {
        CompositeModel { components }
    }

    pub fn push(&mut self, m: LocalizationModel) {
        self.components.push(m);
    }

    pub fn lambda(&self) -> f64 {
        self.components.iter().map(LocalizationModel::lambda).sum()
    }

    pub fn visibility_exponent(&self, d: f64) -> Result<f64> {
        self.components.iter().map(|m| visibility_exponent(m, d)).sum()
    }

    pub fn kernel_f_origin(&self, p: f64, t: f64, mass: f64) -> f64 {
        self.components.iter().map(|m| kernel_f_origin(m, p, t, mass)).product()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.components.iter().map(|m| m.source_label.as_str()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{evolve_with_decoherence, thermal_initial_state};
    use crate::special::erf;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn sat(gamma: f64, a: f64) -> LocalizationModel {
        LocalizationModel::saturating(gamma, a, "test").unwrap()
    }

    /// Independent closed form of ∫₀ᵗ e^{−((x−vτ)/2a)²} dτ.
    fn bump_integral(x: f64, v: f64, t: f64, a: f64) -> f64 {
        if v == 0.0 {
            return t * (-(x / (2.0 * a)).powi(2)).exp();
        }
        a * PI.sqrt() / v * (erf(x / (2.0 * a)) - erf((x - v * t) / (2.0 * a)))
    }

    #[test]
    fn gamma_of_x_examples() {
        let m = sat(3.0, 2e-9);
        assert_eq!(gamma_of_x(&m, 0.0), 0.0);
        assert!((gamma_of_x(&m, 4e-9) / (3.0 * (1.0 - (-1f64).exp())) - 1.0).abs() < 1e-15);
        assert!((gamma_of_x(&m, 400e-9) - 3.0).abs() < 1e-12);
        let x = m.a / 1000.0;
        assert!((gamma_of_x(&m, x) / (x * x) / m.lambda() - 1.0).abs() < 1e-6);
        let q = LocalizationModel::pure_quadratic(5.0, "q").unwrap();
        assert_eq!(gamma_of_x(&q, 2.0), 20.0);
    }

    #[test]
    fn model_constructors() {
        let m = sat(8.0, 1e-9);
        assert!((m.lambda() - 8.0 / 4e-18).abs() < 1e-3);
        let r = LocalizationModel::from_lambda(2e18, 1e-9, "r").unwrap();
        assert!((r.gamma - 8.0).abs() < 1e-12);
        let q = LocalizationModel::pure_quadratic(1.0, "q").unwrap();
        assert!(q.a.is_infinite() && q.gamma == 0.0);
        assert!(q.is_short_distance(1e3));
        assert!(m.is_short_distance(1.9e-9) && !m.is_short_distance(2.1e-9));
        assert!(LocalizationModel::saturating(1.0, 0.0, "x").is_err());
        assert!(LocalizationModel::pure_quadratic(-1.0, "x").is_err());
    }

    #[test]
    fn kernel_trivial_cases() {
        let m = sat(5.0, 1e-9);
        assert_eq!(kernel_f(&m, 1e-20, 3e-9, 0.0, 1e-18).unwrap(), 1.0);
        assert_eq!(kernel_f(&sat(0.0, 1e-9), 1e-20, 3e-9, 1.0, 1e-18).unwrap(), 1.0);
        assert!((kernel_f(&m, 0.0, 0.0, 1.0, 1e-18).unwrap() - 1.0).abs() < 1e-15);
        assert!(kernel_f(&m, 0.0, 0.0, -1.0, 1e-18).is_err());
    }

    #[test]
    fn kernel_matches_erf_closed_form() {
        let (gamma, a, mass, t) = (2.5, 1e-9, 1e-18, 0.7);
        let m = sat(gamma, a);
        for &(p, x) in &[
            (0.0, 0.0),
            (1e-27, 0.0),
            (3e-27, 1e-9),
            (-2e-27, 5e-9),
            (1e-24, 2e-7),
            (4e-26, 1e-8),
            (1e-30, 3e-9),
        ] {
            let v = p / mass;
            let exact = (-gamma * t + gamma * bump_integral(x, v, t, a)).exp();
            let got = kernel_f(&m, p, x, t, mass).unwrap();
            assert!((got - exact).abs() < 1e-9, "p={p} x={x}: {got} vs {exact}");
        }
        for &p in &[0.0, 1e-28, 1e-27, 1e-26, 1e-24] {
            let a0 = kernel_f(&m, p, 0.0, t, mass).unwrap();
            let b0 = kernel_f_origin(&m, p, t, mass);
            assert!((a0 - b0).abs() < 1e-10);
        }
    }

    #[test]
    fn fringe_momentum_gives_theta() {
        let (gamma, a, mass, t) = (2.0, 1e-9, 1e-18, 0.3);
        let m = sat(gamma, a);
        for &d in &[1e-11, 1e-9, 3e-9, 5e-8] {
            let p = mass * d / t;
            let f = kernel_f_origin(&m, p, t, mass);
            let th = visibility_exponent(&m, d).unwrap();
            assert!((f / (-t * th).exp() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn pure_quadratic_kernel() {
        let q = LocalizationModel::pure_quadratic(1e12, "q").unwrap();
        let (p, x, t, mass) = (3e-26, 2e-9, 0.5, 1e-18);
        let v: f64 = p / mass;
        let e = 1e12 * (x * x * t - x * v * t * t + v * v * t.powi(3) / 3.0);
        assert!((kernel_f(&q, p, x, t, mass).unwrap() / (-e).exp() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn theta_limits_and_monotonicity() {
        let m = sat(7.0, 1e-9);
        let d = 2.0 * m.a / 100.0;
        let th = visibility_exponent(&m, d).unwrap();
        assert!(((th - m.lambda() * d * d / 3.0) / th).abs() < 1e-3);
        let mut prev = 0.0;
        for i in 1..400 {
            let th = visibility_exponent(&m, 1e-12 * 1.05f64.powi(i)).unwrap();
            assert!(th >= prev);
            prev = th;
        }
        assert!(visibility_exponent(&m, 0.0).is_err());
        let q = LocalizationModel::pure_quadratic(3.0, "q").unwrap();
        assert_eq!(visibility_exponent(&q, 2.0).unwrap(), 4.0);
    }

    #[test]
    fn visibility_values() {
        assert_eq!(visibility(3.0, 0.0).unwrap(), 1.0);
        assert_eq!(visibility(0.0, 3.0).unwrap(), 1.0);
        assert!((visibility(2f64.ln(), 1.0).unwrap() - 0.5).abs() < 1e-15);
        assert!(visibility(-1.0, 1.0).is_err());
    }

    #[test]
    fn composite_additivity() {
        let c = CompositeModel::new(vec![
            LocalizationModel::pure_quadratic(2.0, "a").unwrap(),
            LocalizationModel::pure_quadratic(5.0, "b").unwrap(),
        ]);
        assert_eq!(c.lambda(), 7.0);
        let d = 3.0;
        assert!((c.visibility_exponent(d).unwrap() - 7.0 * d * d / 3.0).abs() < 1e-12);
        assert_eq!(c.labels(), vec!["a", "b"]);
    }

    /// Dimensionless-ish setup: x0 ~ 1e-12 m, a = 10 x0, ωt = 1000.
    fn regime() -> (GaussianState, f64) {
        let (mass, omega, nbar) = (1e-18, 2.0 * PI * 1e5, 0.1);
        let s0 = thermal_initial_state(mass, omega, nbar).unwrap();
        let t = 1000.0 / omega;
        (evolve_with_decoherence(&s0, t, 0.0).unwrap(), t)
    }

    #[test]
    fn short_distance_limit() {
        let (s, t) = regime();
        let x0 = (s.xx / 1.2).sqrt() / 1000.0;
        let a = 3e3 * x0;
        let m = sat(100.0 / t, a);
        let decohered = evolve_with_decoherence(
            &thermal_initial_state(s.mass, 2.0 * PI * 1e5, 0.1).unwrap(),
            t,
            m.lambda(),
        )
        .unwrap();
        let xi = crate::gaussian::coherence_length(&decohered).unwrap();
        for frac in [0.05, 0.1, 0.2] {
            let x = frac * a;
            let c = coherence_function(&m, &s, x).unwrap();
            let expect = (-x * x / (xi * xi)).exp();
            assert!((c / expect - 1.0).abs() < 0.01, "x={x}: {c} vs {expect}");
            let free = (-x * x * s.det4 / (8.0 * HBAR * HBAR * s.xx)).exp();
            if frac == 0.2 {
                assert!(free / c > 1.3);
            }
        }
    }

    #[test]
    fn long_distance_limit() {
        let (s, t) = regime();
        let x0 = (s.xx / 1.2).sqrt() / 1000.0;
        let a = 10.0 * x0;
        // corrections are O(γt·√π a/x) for a ballistically expanded state
        let m = sat(0.1 / t, a);
        let xi_s2 = 8.0 * HBAR * HBAR * s.xx / s.det4;
        for mult in [20.0, 40.0, 100.0] {
            let x = mult * a;
            let c = coherence_function(&m, &s, x).unwrap();
            let expect = (-x * x / xi_s2 - m.gamma * t).exp();
            assert!((c / expect - 1.0).abs() < 0.01, "x={x}: {c} vs {expect}");
        }
        assert_eq!(coherence_function(&m, &s, 0.0).unwrap(), 1.0);
    }

    #[test]
    fn coherence_non_increasing() {
        let (s, t) = regime();
        let x0 = (s.xx / 1.2).sqrt() / 1000.0;
        let m = sat(0.8 / t, 30.0 * x0);
        let mut prev = 1.0;
        for i in 1..40 {
            let c = coherence_function(&m, &s, x0 * 10.0 * i as f64).unwrap();
            assert!(c <= prev + 1e-9);
            prev = c;
        }
    }

    proptest! {
        #[test]
        fn kernel_non_increasing_in_time(x in 1e-10f64..1e-8, t in 1e-3f64..1.0, k in 1.01f64..3.0) {
            let m = sat(3.0, 1e-9);
            let f1 = kernel_f(&m, 0.0, x, t, 1e-18).unwrap();
            let f2 = kernel_f(&m, 0.0, x, t * k, 1e-18).unwrap();
            prop_assert!(f2 <= f1 + 1e-12);
            prop_assert!(f1 > 0.0 && f1 <= 1.0);
        }

        #[test]
        fn pure_quadratic_visibility_additive(l1 in 0.0f64..1e15, l2 in 0.0f64..1e15, d in 1e-9f64..1e-6) {
            let c = CompositeModel::new(vec![
                LocalizationModel::pure_quadratic(l1, "a").unwrap(),
                LocalizationModel::pure_quadratic(l2, "b").unwrap(),
            ]);
            let sum = visibility_exponent(&c.components[0], d).unwrap() + visibility_exponent(&c.components[1], d).unwrap();
            prop_assert!((c.visibility_exponent(d).unwrap() - sum).abs() <= 1e-12 * sum.max(1e-300));
            let direct = LocalizationModel::pure_quadratic(l1 + l2, "s").unwrap();
            prop_assert!((visibility_exponent(&direct, d).unwrap() - sum).abs() <= 1e-12 * sum.max(1e-300));
        }
    }
}
