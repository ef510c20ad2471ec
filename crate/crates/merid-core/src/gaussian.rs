//! Second-moment dynamics of the centre of mass under free flight with
//! position-localization decoherence.

use crate::constants::HBAR;
use crate::error::{domain, ensure, Result};

/// Outcome of an extremum query that may not exist.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Extremum {
    Finite(f64),
    /// No decoherence: ξ(t) grows without bound.
    Unbounded,
}

impl Extremum {
    pub fn finite(self) -> Option<f64> {
        match self {
            Extremum::Finite(v) => Some(v),
            Extremum::Unbounded => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianState {
    pub mass: f64,
    /// ⟨x²⟩
    pub xx: f64,
    /// ⟨p²⟩
    pub pp: f64,
    /// ⟨{x,p}₊⟩
    pub xp_sym: f64,
    pub t: f64,
    /// 4⟨x²⟩⟨p²⟩ − ⟨{x,p}₊⟩², carried in closed form because the direct
    /// difference cancels catastrophically once ωt ≫ 1.
    pub det4: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionRecord {
    pub sigma2: f64,
    pub phi_tof: f64,
    pub t1: f64,
}

pub fn zero_point_motion(mass: f64, omega: f64) -> Result<f64> {
    ensure(mass > 0.0 && omega > 0.0, "mass and trap frequency must be positive")?;
    Ok((HBAR / (2.0 * mass * omega)).sqrt())
}

impl GaussianState {
    pub fn new(mass: f64, xx: f64, pp: f64, xp_sym: f64, t: f64) -> Result<Self> {
        ensure(mass > 0.0, "mass must be positive")?;
        ensure(xx > 0.0 && pp > 0.0, "variances must be positive")?;
        let det4 = 4.0 * xx * pp - xp_sym * xp_sym;
        let s = GaussianState { mass, xx, pp, xp_sym, t, det4 };
        s.check_heisenberg()?;
        Ok(s)
    }

    pub fn check_heisenberg(&self) -> Result<()> {
        if self.det4 >= HBAR * HBAR * (1.0 - 1e-9) {
            Ok(())
        } else {
            Err(domain(format!(
                "state violates the uncertainty relation: 4<x²><p²>-<xp>² = {:e} < ħ²",
                self.det4
            )))
        }
    }
}

pub fn thermal_initial_state(mass: f64, omega: f64, nbar: f64) -> Result<GaussianState> {
    ensure(nbar >= 0.0, "phonon occupation must be non-negative")?;
    let x0 = zero_point_motion(mass, omega)?;
    let k = 2.0 * nbar + 1.0;
    let xx = k * x0 * x0;
    let pp = k * HBAR * HBAR / (4.0 * x0 * x0);
    Ok(GaussianState { mass, xx, pp, xp_sym: 0.0, t: 0.0, det4: k * k * HBAR * HBAR })
}

pub fn expand_free_coherent(mass: f64, omega: f64, t1: f64) -> Result<ExpansionRecord> {
    ensure(t1 >= 0.0, "expansion time must be non-negative")?;
    let x0 = zero_point_motion(mass, omega)?;
    let wt = omega * t1;
    Ok(ExpansionRecord { sigma2: x0 * x0 * (1.0 + wt * wt), phi_tof: wt / 4.0, t1 })
}

/// Free flight for time `t` with localization parameter `lambda`.
pub fn evolve_with_decoherence(s: &GaussianState, t: f64, lambda: f64) -> Result<GaussianState> {
    ensure(t >= 0.0, "evolution time must be non-negative")?;
    ensure(lambda >= 0.0, "localization parameter must be non-negative")?;
    let m = s.mass;
    let (x, q, p) = (s.xx, s.xp_sym, s.pp);
    let k = 2.0 * lambda * HBAR * HBAR;
    let xx = x + q * t / m + p * t * t / (m * m) + k * t.powi(3) / (3.0 * m * m);
    let xp_sym = q + 2.0 * p * t / m + k * t * t / m;
    let pp = p + k * t;
    let det4 = s.det4
        + 4.0 * k * t * x
        + 2.0 * k * q * t * t / m
        + 4.0 * k * p * t.powi(3) / (3.0 * m * m)
        + k * k * t.powi(4) / (3.0 * m * m);
    Ok(GaussianState { mass: m, xx, pp, xp_sym, t: s.t + t, det4 })
}

/// ξ² = 8ħ²⟨x²⟩ / (4⟨x²⟩⟨p²⟩ − ⟨{x,p}₊⟩²)
pub fn coherence_length(s: &GaussianState) -> Result<f64> {
    s.check_heisenberg()?;
    Ok((8.0 * HBAR * HBAR * s.xx / s.det4).sqrt())
}

pub fn coherence_length_schrodinger(sigma2: f64, nbar: f64) -> Result<f64> {
    ensure(sigma2 > 0.0, "wave-packet variance must be positive")?;
    Ok((8.0 * sigma2 / (2.0 * nbar + 1.0)).sqrt())
}

pub fn t_max_coherence(mass: f64, nbar: f64, omega: f64, lambda: f64) -> Extremum {
    if lambda <= 0.0 {
        return Extremum::Unbounded;
    }
    Extremum::Finite((3.0 * mass * (2.0 * nbar + 1.0) / (2.0 * lambda * HBAR * omega)).cbrt())
}

pub fn xi_max(mass: f64, nbar: f64, omega: f64, lambda: f64) -> Extremum {
    if lambda <= 0.0 {
        return Extremum::Unbounded;
    }
    let inner = 2.0 * HBAR * omega / (3.0 * mass * lambda * lambda * (2.0 * nbar + 1.0));
    Extremum::Finite(std::f64::consts::SQRT_2 * inner.powf(1.0 / 6.0))
}

/// ξ(t) for a thermal state released at t = 0.
pub fn coherence_length_at(
    mass: f64,
    omega: f64,
    nbar: f64,
    lambda: f64,
    t: f64,
) -> Result<f64> {
    let s0 = thermal_initial_state(mass, omega, nbar)?;
    coherence_length(&evolve_with_decoherence(&s0, t, lambda)?)
}

/// Golden-section search for the maximiser of `f` on `[ln lo, ln hi]`.
pub fn argmax_log<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, iters: usize) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo.ln(), hi.ln());
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c.exp());
    let mut fd = f(d.exp());
    for _ in 0..iters {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c.exp());
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d.exp());
        }
    }
    (0.5 * (a + b)).exp()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    const W: f64 = 2.0 * PI * 1e5;

    #[test]
    fn zero_point_examples() {
        // sqrt(hbar / (2 * 1.152e-18 * 2pi*1e5))
        let x0 = zero_point_motion(1.152e-18, W).unwrap();
        assert!((x0 / 8.535_066_5e-12 - 1.0).abs() < 1e-6);
        assert!((zero_point_motion(4.0, W).unwrap() * 2.0 / zero_point_motion(1.0, W).unwrap() - 1.0).abs() < 1e-15);
        assert!((zero_point_motion(1.0, 4.0 * W).unwrap() * 2.0 / zero_point_motion(1.0, W).unwrap() - 1.0).abs() < 1e-15);
        assert!(zero_point_motion(0.0, W).is_err());
        assert!(zero_point_motion(1.0, -1.0).is_err());
    }

    #[test]
    fn thermal_moments() {
        let m = 1e-18;
        let x0 = zero_point_motion(m, W).unwrap();
        let g = thermal_initial_state(m, W, 0.0).unwrap();
        assert!((4.0 * g.xx * g.pp / (HBAR * HBAR) - 1.0).abs() < 1e-14);
        let s = thermal_initial_state(m, W, 0.1).unwrap();
        assert!((s.xx / (1.2 * x0 * x0) - 1.0).abs() < 1e-14);
        assert_eq!(s.xp_sym, 0.0);
        assert!(thermal_initial_state(m, W, -0.1).is_err());
    }

    #[test]
    fn expansion() {
        let m = 1e-18;
        let x0 = zero_point_motion(m, W).unwrap();
        let e = expand_free_coherent(m, W, 0.0).unwrap();
        assert_eq!((e.sigma2, e.phi_tof), (x0 * x0, 0.0));
        let e = expand_free_coherent(m, W, 1.0 / W).unwrap();
        assert!((e.sigma2 / (2.0 * x0 * x0) - 1.0).abs() < 1e-14);
        let e = expand_free_coherent(m, W, 10.0 / W).unwrap();
        assert!((e.sigma2 / (100.0 * x0 * x0) - 1.0).abs() < 0.01);
        assert!(expand_free_coherent(m, W, -1.0).is_err());
    }

    #[test]
    fn schrodinger_limit() {
        let m = 1e-18;
        let s0 = thermal_initial_state(m, W, 0.3).unwrap();
        let t = 0.37;
        let s = evolve_with_decoherence(&s0, t, 0.0).unwrap();
        assert!((s.xx / (s0.xx + s0.pp * t * t / (m * m)) - 1.0).abs() < 1e-14);
        assert_eq!(s.pp, s0.pp);
        let sig2 = expand_free_coherent(m, W, t).unwrap().sigma2;
        let xs = coherence_length_schrodinger(sig2, 0.3).unwrap();
        assert!((coherence_length(&s).unwrap() / xs - 1.0).abs() < 1e-12);
    }

    #[test]
    fn diffusive_excess() {
        let m = 1e-18;
        let (t, l) = (0.2, 3e20);
        let s0 = thermal_initial_state(m, W, 0.1).unwrap();
        let a = evolve_with_decoherence(&s0, t, 0.0).unwrap();
        let b = evolve_with_decoherence(&s0, t, l).unwrap();
        let excess = 2.0 * l * HBAR * HBAR * t.powi(3) / (3.0 * m * m);
        assert!(((b.xx - a.xx) / excess - 1.0).abs() < 1e-9);
        assert!(((b.pp - a.pp) / (2.0 * l * HBAR * HBAR * t) - 1.0).abs() < 1e-9);
        assert!(evolve_with_decoherence(&s0, -1.0, l).is_err());
        assert!(evolve_with_decoherence(&s0, 1.0, -l).is_err());
    }

    #[test]
    fn coherence_length_examples() {
        let m = 1e-18;
        let x0 = zero_point_motion(m, W).unwrap();
        let g = thermal_initial_state(m, W, 0.0).unwrap();
        assert!((coherence_length(&g).unwrap() / (8f64.sqrt() * x0) - 1.0).abs() < 1e-14);
        let s = thermal_initial_state(m, W, 0.1).unwrap();
        assert!((coherence_length(&s).unwrap() / ((8.0 / 1.2f64).sqrt() * x0) - 1.0).abs() < 1e-14);
        assert!((coherence_length_schrodinger(x0 * x0, 0.0).unwrap() / (8f64.sqrt() * x0) - 1.0).abs() < 1e-15);
        let bad = GaussianState { det4: 0.5 * HBAR * HBAR, ..g };
        assert!(coherence_length(&bad).is_err());
        assert!(GaussianState::new(m, x0 * x0, 0.1 * HBAR * HBAR / (x0 * x0), 0.0, 0.0).is_err());
    }

    #[test]
    fn t_max_example_and_signals() {
        // frozen, mpmath: (3e-18 / (2e10 hbar 2pi 1e5))^(1/3)
        let t = t_max_coherence(1e-18, 0.0, W, 1e10).finite().unwrap();
        assert!((t / 1.313_041_37 - 1.0).abs() < 1e-5, "{t}");
        assert_eq!(t_max_coherence(1e-18, 0.0, W, 0.0), Extremum::Unbounded);
        assert_eq!(xi_max(1e-18, 0.0, W, 0.0), Extremum::Unbounded);
        let r = t_max_coherence(1e-18, 0.0, W, 8e10).finite().unwrap() / t;
        assert!((r - 0.5).abs() < 1e-12);
        let r = xi_max(1e-18, 0.0, W, 8e10).finite().unwrap() / xi_max(1e-18, 0.0, W, 1e10).finite().unwrap();
        assert!((r - 0.5).abs() < 1e-12);
        let r = xi_max(1e-18, 0.5, W, 1e10).finite().unwrap() / xi_max(1e-18, 0.0, W, 1e10).finite().unwrap();
        assert!((r - 2f64.powf(-1.0 / 6.0)).abs() < 1e-12);
    }

    #[test]
    fn argmax_matches_closed_form() {
        let (m, nbar, l) = (1e-18, 0.1, 1e10);
        let tm = t_max_coherence(m, nbar, W, l).finite().unwrap();
        let f = |t| coherence_length_at(m, W, nbar, l, t).unwrap();
        let t = argmax_log(f, tm / 20.0, tm * 20.0, 200);
        assert!((t / tm - 1.0).abs() < 5e-3);
        let xm = xi_max(m, nbar, W, l).finite().unwrap();
        assert!((f(tm) / xm - 1.0).abs() < 5e-3);
    }

    #[test]
    fn unimodal_on_log_grid() {
        let (m, nbar, l) = (1e-17, 0.1, 1e12);
        let tm = t_max_coherence(m, nbar, W, l).finite().unwrap();
        let xs: Vec<f64> = (0..200)
            .map(|i| coherence_length_at(m, W, nbar, l, tm * 10f64.powf(-4.0 + 8.0 * i as f64 / 199.0)).unwrap())
            .collect();
        let peak = xs.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        assert!(xs[..=peak].windows(2).all(|w| w[1] >= w[0]));
        assert!(xs[peak..].windows(2).all(|w| w[1] <= w[0]));
        assert!(peak > 0 && peak < 199);
    }

    proptest! {
        #[test]
        fn semigroup(lm in -20.0f64..-14.0, nbar in 0.0f64..3.0, t1 in 1e-4f64..1.0, t2 in 1e-4f64..1.0, ll in 0.0f64..16.0) {
            let m = 10f64.powf(lm);
            let l = 10f64.powf(ll);
            let s0 = thermal_initial_state(m, W, nbar).unwrap();
            let a = evolve_with_decoherence(&evolve_with_decoherence(&s0, t1, l).unwrap(), t2, l).unwrap();
            let b = evolve_with_decoherence(&s0, t1 + t2, l).unwrap();
            for (u, v) in [(a.xx, b.xx), (a.pp, b.pp), (a.xp_sym, b.xp_sym), (a.det4, b.det4), (a.t, b.t)] {
                prop_assert!((u / v - 1.0).abs() < 1e-9, "{} vs {}", u, v);
            }
        }

        #[test]
        fn heisenberg_preserved_and_no_shrinking(lm in -20.0f64..-14.0, nbar in 0.0f64..3.0, t in 0.0f64..10.0, ll in 0.0f64..18.0) {
            let m = 10f64.powf(lm);
            let l = 10f64.powf(ll);
            let s0 = thermal_initial_state(m, W, nbar).unwrap();
            let s = evolve_with_decoherence(&s0, t, l).unwrap();
            prop_assert!(s.check_heisenberg().is_ok());
            let u = evolve_with_decoherence(&s0, t, 0.0).unwrap();
            prop_assert!(s.xx >= u.xx && s.pp >= u.pp);
            prop_assert_eq!(u.pp, s0.pp);
        }

        #[test]
        fn det4_matches_direct_when_well_conditioned(lm in -20.0f64..-14.0, nbar in 0.0f64..3.0, wt in 0.0f64..3.0, ll in 0.0f64..18.0) {
            let m = 10f64.powf(lm);
            let s0 = thermal_initial_state(m, W, nbar).unwrap();
            let s = evolve_with_decoherence(&s0, wt / W, 10f64.powf(ll)).unwrap();
            let direct = 4.0 * s.xx * s.pp - s.xp_sym * s.xp_sym;
            prop_assert!((s.det4 / direct - 1.0).abs() < 1e-9);
        }
    }
}
