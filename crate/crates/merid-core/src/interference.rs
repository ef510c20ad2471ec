//! Grid simulation of the double-slit state, its free flight, position-localization
//! decoherence applied in the Fourier domain, and fringe analysis.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::constants::HBAR;
use crate::error::{domain, ensure, Error, Result};
use crate::localization::CompositeModel;
use crate::params::{SphereSpec, TrapSpec};
use crate::protocol::ProtocolPlan;

/// Largest grid any stage will allocate.
pub const MAX_POINTS: usize = 1 << 24;

#[derive(Debug, Clone, PartialEq)]
pub enum GridData {
    Amplitude(Vec<Complex64>),
    Density(Vec<f64>),
}

/// Uniform grid centred on the origin: x_j = (j − N/2)·dx.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternGrid {
    pub dx: f64,
    pub t: f64,
    pub data: GridData,
}

impl PatternGrid {
    pub fn len(&self) -> usize {
        match &self.data {
            GridData::Amplitude(v) => v.len(),
            GridData::Density(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn x(&self, j: usize) -> f64 {
        (j as f64 - (self.len() / 2) as f64) * self.dx
    }

    pub fn x_axis(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.x(j)).collect()
    }

    pub fn span(&self) -> f64 {
        self.len() as f64 * self.dx
    }

    pub fn probability(&self) -> Vec<f64> {
        match &self.data {
            GridData::Amplitude(v) => v.iter().map(|z| z.norm_sqr()).collect(),
            GridData::Density(v) => v.clone(),
        }
    }

    pub fn norm(&self) -> f64 {
        self.probability().iter().sum::<f64>() * self.dx
    }

    pub fn mean(&self) -> f64 {
        let p = self.probability();
        p.iter().enumerate().map(|(j, w)| w * self.x(j)).sum::<f64>() * self.dx / self.norm()
    }

    pub fn second_moment(&self) -> f64 {
        let p = self.probability();
        p.iter().enumerate().map(|(j, w)| w * self.x(j).powi(2)).sum::<f64>() * self.dx / self.norm()
    }

    pub fn variance(&self) -> f64 {
        self.second_moment() - self.mean().powi(2)
    }

    fn amplitudes(&self) -> Result<&[Complex64]> {
        match &self.data {
            GridData::Amplitude(v) => Ok(v),
            GridData::Density(_) => Err(domain("operation needs amplitudes, got a density")),
        }
    }

    fn density(&self) -> Result<&[f64]> {
        match &self.data {
            GridData::Density(v) => Ok(v),
            GridData::Amplitude(_) => Err(domain("operation needs a density, got amplitudes")),
        }
    }

    pub fn to_density(&self) -> PatternGrid {
        PatternGrid { dx: self.dx, t: self.t, data: GridData::Density(self.probability()) }
    }
}

/// Grid size and step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub n: usize,
    pub dx: f64,
}

impl GridSpec {
    /// Power-of-two grid with step ≤ `dx_max` covering at least `span`.
    pub fn covering(span: f64, dx_max: f64) -> Result<Self> {
        ensure(span > 0.0 && dx_max > 0.0, "grid span and step must be positive")?;
        let n = ((span / dx_max).ceil() as usize).max(16).next_power_of_two();
        if n > MAX_POINTS {
            return Err(domain(format!("grid of {n} points exceeds the limit of {MAX_POINTS}")));
        }
        Ok(GridSpec { n, dx: dx_max })
    }

    /// Sizing rule for the double-slit state: dx ≤ σ_d/8, span ≥ 8× the state
    /// width and ≥ 8d so that the far-field grid resolves x_f/8.
    pub fn for_double_slit(d: f64, sigma_d: f64) -> Result<Self> {
        let rms = (d * d / 4.0 + sigma_d * sigma_d).sqrt();
        Self::covering((8.0 * rms).max(8.0 * d) + 16.0 * sigma_d, sigma_d / 8.0)
    }

    pub fn span(&self) -> f64 {
        self.n as f64 * self.dx
    }
}

fn fft(buf: &mut [Complex64], inverse: bool) {
    let mut planner = FftPlanner::new();
    let plan = if inverse { planner.plan_fft_inverse(buf.len()) } else { planner.plan_fft_forward(buf.len()) };
    plan.process(buf);
    let s = 1.0 / (buf.len() as f64).sqrt();
    for z in buf.iter_mut() {
        *z *= s;
    }
}

/// Physical momentum of DFT bin k on an N-point grid of step dx.
fn bin_momentum(k: usize, n: usize, dx: f64) -> f64 {
    let ks = if k < n / 2 { k as f64 } else { k as f64 - n as f64 };
    2.0 * PI * HBAR * ks / (n as f64 * dx)
}

/// ψ(x) ∝ exp[−x²/4σ² + iφ x²/σ²]·{exp[−(x−d/2)²/4σ_d²] + exp[−(x+d/2)²/4σ_d²]},
/// σ_d = σ²/(2χd), normalized on the grid.
pub fn double_slit_state(sigma: f64, d: f64, chi: f64, phi_total: f64, grid: GridSpec) -> Result<PatternGrid> {
    ensure(sigma > 0.0 && d > 0.0 && chi > 0.0, "sigma, d and chi must be positive")?;
    let sigma_d = sigma * sigma / (2.0 * chi * d);
    if grid.dx > sigma_d / 8.0 * (1.0 + 1e-12) {
        return Err(domain(format!("grid step {:e} m exceeds sigma_d/8 = {:e} m", grid.dx, sigma_d / 8.0)));
    }
    let rms = (d * d / 4.0 + sigma_d * sigma_d).sqrt();
    if grid.span() < 8.0 * rms {
        return Err(domain(format!("grid span {:e} m below 8x the state width {:e} m", grid.span(), rms)));
    }
    let h = d / 2.0;
    let mut psi: Vec<Complex64> = (0..grid.n)
        .map(|j| {
            let x = (j as f64 - (grid.n / 2) as f64) * grid.dx;
            let env = -x * x / (4.0 * sigma * sigma);
            let slits = (env - (x - h).powi(2) / (4.0 * sigma_d * sigma_d)).exp()
                + (env - (x + h).powi(2) / (4.0 * sigma_d * sigma_d)).exp();
            Complex64::from_polar(slits, phi_total * x * x / (sigma * sigma))
        })
        .collect();
    let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>() * grid.dx;
    ensure(norm > 0.0, "state underflowed on the grid")?;
    let s = 1.0 / norm.sqrt();
    psi.iter_mut().for_each(|z| *z *= s);
    Ok(PatternGrid { dx: grid.dx, t: 0.0, data: GridData::Amplitude(psi) })
}

/// ψ(p) on p_k = (k − N/2)·2πħ/(N dx), normalized so that Σ|ψ(p)|² dp = 1.
pub fn momentum_distribution(g: &PatternGrid) -> Result<PatternGrid> {
    let psi = g.amplitudes()?;
    let n = psi.len();
    let mut buf = psi.to_vec();
    fft(&mut buf, false);
    let dp = 2.0 * PI * HBAR / (n as f64 * g.dx);
    let x_start = g.x(0);
    let scale = (g.dx / dp).sqrt();
    let out = (0..n)
        .map(|i| {
            // shift so that p = 0 sits at index N/2
            let k = (i + n / 2) % n;
            let p = bin_momentum(k, n, g.dx);
            buf[k] * scale * Complex64::from_polar(1.0, -p * x_start / HBAR)
        })
        .collect();
    Ok(PatternGrid { dx: dp, t: g.t, data: GridData::Amplitude(out) })
}

fn momentum_spread(g: &PatternGrid) -> Result<(f64, f64)> {
    let m = momentum_distribution(g)?;
    Ok((m.mean(), m.variance().max(0.0).sqrt()))
}

/// Exact free evolution for time t.
///
/// Short flights use the spectral propagator on a zero-padded copy of the
/// grid; long flights use the single-transform Fresnel integral, whose output
/// grid has step 2πħt/(m·span).
pub fn free_propagate(g: &PatternGrid, t: f64, mass: f64) -> Result<PatternGrid> {
    ensure(t >= 0.0 && mass > 0.0, "time must be non-negative and mass positive")?;
    let psi = g.amplitudes()?;
    if t == 0.0 {
        return Ok(g.clone());
    }
    let (p_mean, p_std) = momentum_spread(g)?;
    let x_mean = g.mean() + p_mean * t / mass;
    let width = g.variance().max(0.0).sqrt() + p_std * t / mass;
    let need = 2.0 * x_mean.abs() + 8.0 * width;
    let span_in = g.span();
    let span_fresnel = 2.0 * PI * HBAR * t / (mass * g.dx);
    let out = if span_fresnel >= 2.0 * span_in && span_fresnel >= need {
        fresnel(psi, g.dx, t, mass)
    } else {
        let spec = GridSpec::covering(need.max(span_in), g.dx)?;
        spectral(psi, g.dx, spec.n, t, mass)
    };
    Ok(PatternGrid { t: g.t + t, ..out })
}

fn spectral(psi: &[Complex64], dx: f64, n: usize, t: f64, mass: f64) -> PatternGrid {
    let n0 = psi.len();
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    let off = n / 2 - n0 / 2;
    buf[off..off + n0].copy_from_slice(psi);
    fft(&mut buf, false);
    for (k, z) in buf.iter_mut().enumerate() {
        let p = bin_momentum(k, n, dx);
        *z *= Complex64::from_polar(1.0, -p * p * t / (2.0 * mass * HBAR));
    }
    fft(&mut buf, true);
    PatternGrid { dx, t: 0.0, data: GridData::Amplitude(buf) }
}

fn fresnel(psi: &[Complex64], dx: f64, t: f64, mass: f64) -> PatternGrid {
    let n = psi.len();
    let c = mass / (2.0 * HBAR * t);
    let half = (n / 2) as f64;
    let sign = |j: usize| if j % 2 == 0 { 1.0 } else { -1.0 };
    let mut buf: Vec<Complex64> = psi
        .iter()
        .enumerate()
        .map(|(j, z)| {
            let y = (j as f64 - half) * dx;
            z * Complex64::from_polar(sign(j), c * y * y)
        })
        .collect();
    fft(&mut buf, false);
    let dx_out = 2.0 * PI * HBAR * t / (mass * n as f64 * dx);
    // unitary DFT already carries 1/√N; the rest of the prefactor is √(dx/dx_out)
    let amp = (dx / dx_out).sqrt();
    let phase0 = Complex64::from_polar(amp, -PI / 4.0);
    for (k, z) in buf.iter_mut().enumerate() {
        let x = (k as f64 - half) * dx_out;
        *z *= phase0 * Complex64::from_polar(sign(k), c * x * x);
    }
    PatternGrid { dx: dx_out, t: 0.0, data: GridData::Amplitude(buf) }
}

/// P(x) → F⁻¹[F(p)·P̃_s(p)] with F(p) the product of F(p,0,t) over `models`.
pub fn apply_localization_to_pattern(p_s: &PatternGrid, models: &CompositeModel, t: f64, mass: f64) -> Result<PatternGrid> {
    ensure(t >= 0.0 && mass > 0.0, "time must be non-negative and mass positive")?;
    let p = p_s.density()?;
    let n = p.len();
    let mut buf: Vec<Complex64> = p.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft(&mut buf, false);
    for (k, z) in buf.iter_mut().enumerate() {
        *z *= models.kernel_f_origin(bin_momentum(k, n, p_s.dx), t, mass);
    }
    fft(&mut buf, true);
    Ok(PatternGrid { dx: p_s.dx, t: p_s.t, data: GridData::Density(buf.iter().map(|z| z.re).collect()) })
}

/// Final position distribution for a phase-compensated plan (φ_ds + φ_tof = 0).
pub fn simulate_pattern(
    plan: &ProtocolPlan,
    sphere: &SphereSpec,
    trap: &TrapSpec,
    models: &CompositeModel,
) -> Result<PatternGrid> {
    simulate_pattern_with_phase(plan, sphere, trap, models, 0.0)
}

pub fn simulate_pattern_with_phase(
    plan: &ProtocolPlan,
    sphere: &SphereSpec,
    _trap: &TrapSpec,
    models: &CompositeModel,
    phi_total: f64,
) -> Result<PatternGrid> {
    let mass = sphere.mass();
    if !(plan.d < 8f64.sqrt() * plan.sigma) {
        return Err(domain("condition i: d must be below sqrt(8) sigma"));
    }
    if !(plan.d > plan.sigma / plan.chi.sqrt()) {
        return Err(domain("condition ii: d must exceed sigma/sqrt(chi)"));
    }
    let grid = GridSpec::for_double_slit(plan.d, plan.sigma_d)?;
    let psi = double_slit_state(plan.sigma, plan.d, plan.chi, phi_total, grid)?;
    let out = free_propagate(&psi, plan.t2, mass)?.to_density();
    apply_localization_to_pattern(&out, models, plan.t2, mass)
}

/// |∫P(x) e^{−ipx/ħ} dx| evaluated directly.
fn density_transform(x: &[f64], p_dens: &[f64], dx: f64, p: f64) -> f64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (xi, w) in x.iter().zip(p_dens) {
        acc += Complex64::from_polar(*w, -p * xi / HBAR);
    }
    acc.norm() * dx
}

/// Peak of |P̃(p)| within ±20% of p_hint: strongest DFT bin, then golden refinement.
fn fringe_component(x: &[f64], dens: &[f64], dx: f64, p_hint: f64) -> f64 {
    let n = dens.len();
    let mut buf: Vec<Complex64> = dens.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft(&mut buf, false);
    let dp = 2.0 * PI * HBAR / (n as f64 * dx);
    let k_lo = ((0.8 * p_hint / dp).floor() as usize).max(1);
    let k_hi = ((1.2 * p_hint / dp).ceil() as usize).min(n / 2 - 1);
    let k_best = (k_lo..=k_hi.max(k_lo)).max_by(|&a, &b| buf[a].norm().total_cmp(&buf[b].norm())).unwrap_or(k_lo);
    let f = |p: f64| density_transform(x, dens, dx, p);
    let (mut a, mut b) = ((k_best as f64 - 1.0) * dp, (k_best as f64 + 1.0) * dp);
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let (mut c, mut d) = (b - r * (b - a), a + r * (b - a));
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..40 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    f(0.5 * (a + b)).max(f(k_best as f64 * dp))
}

/// Grid points carrying the density, dropping the empty margins.
fn support(g: &PatternGrid) -> (Vec<f64>, Vec<f64>) {
    let dens = g.probability();
    let top = dens.iter().cloned().fold(0.0, f64::max);
    let keep = |v: &f64| v.abs() > 1e-16 * top;
    let lo = dens.iter().position(keep).unwrap_or(0);
    let hi = dens.iter().rposition(keep).unwrap_or(dens.len() - 1);
    ((lo..=hi).map(|j| g.x(j)).collect(), dens[lo..=hi].to_vec())
}

/// Fringe contrast 2|P̃(p_f)|/P̃(0), with p_f the strongest component near 2πħ/x_f.
/// When a decoherence-free `reference` is given the result is divided by its
/// contrast, so an unperturbed pattern reads 1.
pub fn extract_visibility(p: &PatternGrid, x_f_hint: f64, reference: Option<&PatternGrid>) -> Result<f64> {
    ensure(x_f_hint > 0.0, "fringe spacing hint must be positive")?;
    let raw = |g: &PatternGrid| -> Result<f64> {
        let (x, dens) = support(g);
        let dc = density_transform(&x, &dens, g.dx, 0.0);
        let width = g.variance().max(0.0).sqrt();
        if !(dc > 0.0) || 4.0 * width < 3.0 * x_f_hint || g.dx > x_f_hint / 4.0 {
            return Err(Error::Domain("no fringes: pattern does not resolve three fringes".into()));
        }
        let v = fringe_component(&x, &dens, g.dx, 2.0 * PI * HBAR / x_f_hint);
        Ok(2.0 * v / dc)
    };
    let v = raw(p)?;
    match reference {
        Some(r) => Ok(v / raw(r)?),
        None => Ok(v),
    }
}

/// Local maxima of the density within the central region holding `mass_frac` of the
/// probability, refined by parabolic interpolation.
pub fn fringe_peaks(p: &PatternGrid, mass_frac: f64) -> Vec<f64> {
    let dens = p.probability();
    let n = dens.len();
    let total: f64 = dens.iter().sum();
    let tail = 0.5 * (1.0 - mass_frac) * total;
    let (mut lo, mut acc) = (0, 0.0);
    while lo < n && acc + dens[lo] < tail {
        acc += dens[lo];
        lo += 1;
    }
    let (mut hi, mut acc) = (n - 1, 0.0);
    while hi > 0 && acc + dens[hi] < tail {
        acc += dens[hi];
        hi -= 1;
    }
    let mut out = Vec::new();
    for j in lo.max(1)..hi.min(n - 2) + 1 {
        let (a, b, c) = (dens[j - 1], dens[j], dens[j + 1]);
        if b > a && b >= c {
            let denom = a - 2.0 * b + c;
            let shift = if denom != 0.0 { 0.5 * (a - c) / denom } else { 0.0 };
            out.push(p.x(j) + shift * p.dx);
        }
    }
    out
}

/// Mean spacing between adjacent fringe peaks.
pub fn measured_fringe_spacing(p: &PatternGrid) -> Result<f64> {
    let peaks = fringe_peaks(p, 0.9);
    if peaks.len() < 3 {
        return Err(Error::Domain("no fringes: fewer than three peaks".into()));
    }
    Ok((peaks[peaks.len() - 1] - peaks[0]) / (peaks.len() - 1) as f64)
}
