//! Feasibility conditions, protocol timing, allowed superposition sizes and
//! d-versus-D diagrams including the collapse-model falsification region.

use std::f64::consts::PI;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::collapse::{model_for, CollapseModelId};
use crate::constants::HBAR;
use crate::error::{domain, ensure, Result};
use crate::gaussian::{
    coherence_length, evolve_with_decoherence, expand_free_coherent, t_max_coherence,
    thermal_initial_state, Extremum,
};
use crate::localization::{CompositeModel, LocalizationModel, ModelKind};
use crate::optomech::OptomechBounds;
use crate::params::{DefaultParameterSet, EnvironmentSpec, SphereSpec, TrapSpec};
use crate::standard::{air_model, air_saturation_rate, blackbody_model};

/// Numerical meaning of the "≪" and "≲" relations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Thresholds {
    /// t₁γ ≤ this for long-distance sources
    pub t1_gamma: f64,
    /// t₂γ ≤ this for long-distance sources
    pub t2_gamma: f64,
    pub phase: f64,
    /// Θ_CM·t₂ required for the collapse signal to be resolvable
    pub detect: f64,
    /// operating point t₁ = factor · t₁^OM
    pub om_factor: f64,
    /// relative slack on ≤ comparisons that sit exactly on a threshold by construction
    pub slack: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds { t1_gamma: 0.05, t2_gamma: 0.1, phase: 0.1, detect: 1.0, om_factor: 0.25, slack: 1e-12 }
    }
}

impl Thresholds {
    fn le(&self, value: f64, bound: f64) -> bool {
        value <= bound * (1.0 + self.slack)
    }
}

/// Closed interval on the d-axis; `None` is used for the empty set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Option<Interval> {
        if lo < hi {
            Some(Interval { lo, hi })
        } else {
            None
        }
    }

    pub fn contains(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        Interval::new(self.lo.max(other.lo), self.hi.min(other.hi))
    }

    /// `self \ other`, as up to two pieces.
    pub fn minus(&self, other: Option<&Interval>) -> Vec<Interval> {
        let Some(o) = other else { return vec![*self] };
        let mut out = Vec::new();
        if let Some(i) = Interval::new(self.lo, self.hi.min(o.lo)) {
            out.push(i);
        }
        if let Some(i) = Interval::new(self.lo.max(o.hi), self.hi) {
            out.push(i);
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolPlan {
    pub t1: f64,
    pub t2: f64,
    pub d: f64,
    pub chi: f64,
    pub delta_x: f64,
    pub sigma: f64,
    pub sigma_d: f64,
}

impl ProtocolPlan {
    /// Builds a plan, deriving σ from the expansion and σ_d = σ²/(2χd).
    pub fn new(mass: f64, trap: &TrapSpec, t1: f64, t2: f64, d: f64, chi: f64, delta_x: f64) -> Result<Self> {
        ensure(t1 > 0.0 && t2 > 0.0 && d > 0.0 && chi > 0.0 && delta_x > 0.0, "plan entries must be positive")?;
        let sigma = expand_free_coherent(mass, trap.omega, t1)?.sigma2.sqrt();
        Ok(ProtocolPlan { t1, t2, d, chi, delta_x, sigma, sigma_d: sigma * sigma / (2.0 * chi * d) })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ConditionId {
    I,
    II,
    III,
    IV,
    V,
    VI,
    VII,
    VIII,
    IX,
}

impl fmt::Display for ConditionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ConditionId::I => "i",
            ConditionId::II => "ii",
            ConditionId::III => "iii",
            ConditionId::IV => "iv",
            ConditionId::V => "v",
            ConditionId::VI => "vi",
            ConditionId::VII => "vii",
            ConditionId::VIII => "viii",
            ConditionId::IX => "ix",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionResult {
    pub id: ConditionId,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionReport {
    pub conditions: Vec<ConditionResult>,
    pub overall_pass: bool,
}

impl ConditionReport {
    pub fn get(&self, id: ConditionId) -> Option<&ConditionResult> {
        self.conditions.iter().find(|c| c.id == id)
    }

    pub fn first_failure(&self) -> Option<&ConditionResult> {
        self.conditions.iter().find(|c| !c.pass)
    }
}

/// x_f = 2πħt₂/(md)
pub fn fringe_spacing(mass: f64, d: f64, t2: f64) -> Result<f64> {
    ensure(mass > 0.0 && d > 0.0 && t2 > 0.0, "fringe spacing needs positive mass, d and t2")?;
    Ok(2.0 * PI * HBAR * t2 / (mass * d))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseCheck {
    pub value: f64,
    pub pass: bool,
}

/// |φ_ds + φ_tof|·d²/(4σ²) against the threshold.
pub fn phase_condition(phi_total: f64, d: f64, sigma: f64, threshold: f64) -> Result<PhaseCheck> {
    ensure(sigma > 0.0, "sigma must be positive")?;
    let value = phi_total.abs() * d * d / (4.0 * sigma * sigma);
    Ok(PhaseCheck { value, pass: value < threshold })
}

/// Splits components into those in the short-distance regime at `d` and the rest.
fn split_regimes(models: &CompositeModel, d: f64) -> (f64, f64) {
    let mut lambda_short = 0.0;
    let mut gamma_long = 0.0;
    for m in &models.components {
        if m.is_short_distance(d) {
            lambda_short += m.lambda();
        } else {
            gamma_long += m.gamma;
        }
    }
    (lambda_short, gamma_long)
}

fn xi_at(mass: f64, trap: &TrapSpec, t1: f64, lambda: f64) -> Result<f64> {
    let s0 = thermal_initial_state(mass, trap.omega, trap.nbar)?;
    coherence_length(&evolve_with_decoherence(&s0, t1, lambda)?)
}

pub fn check_conditions(
    plan: &ProtocolPlan,
    sphere: &SphereSpec,
    trap: &TrapSpec,
    models: &CompositeModel,
    optomech: Option<&OptomechBounds>,
    th: &Thresholds,
) -> Result<ConditionReport> {
    let m = sphere.mass();
    let p = plan;
    let mut out = Vec::new();
    let mut push = |id, value: f64, bound: f64, pass: bool, detail: String| {
        out.push(ConditionResult { id, value, bound, pass, detail })
    };
    let b = 8f64.sqrt() * p.sigma;
    push(ConditionId::I, p.d, b, p.d < b, "d < sqrt(8) sigma".into());
    let b = p.sigma / p.chi.sqrt();
    push(ConditionId::II, p.d, b, p.d > b, "d > sigma/sqrt(chi)".into());
    let b = (2.0 * p.t2 * p.chi / trap.omega).sqrt();
    push(ConditionId::III, p.t1, b, th.le(p.t1, b), "t1 <= sqrt(2 t2 chi/omega)".into());
    let b = fringe_spacing(m, p.d, p.t2)? * p.d / p.delta_x;
    push(ConditionId::IV, p.d, b, p.d < b, "d < 2 pi hbar t2/(m delta_x)".into());

    let (lambda_short, gamma_long) = split_regimes(models, p.d);
    let xi = xi_at(m, trap, p.t1, lambda_short)?;
    push(ConditionId::V, p.d, xi, p.d < xi, format!("d < xi(t1), Lambda_short = {lambda_short:e}"));
    let xi_s = xi_at(m, trap, p.t1, 0.0)?;
    let ok = th.le(p.t1 * gamma_long, th.t1_gamma) && p.d < xi_s;
    push(
        ConditionId::VI,
        p.t1 * gamma_long,
        th.t1_gamma,
        ok,
        format!("t1 gamma_long <= {} and d < xi_s(t1) = {xi_s:e}", th.t1_gamma),
    );
    let b = if lambda_short > 0.0 { (3.0 / (lambda_short * p.t2)).sqrt() } else { f64::INFINITY };
    push(ConditionId::VII, p.d, b, p.d < b, "d < sqrt(3/(Lambda_short t2))".into());
    push(
        ConditionId::VIII,
        p.t2 * gamma_long,
        th.t2_gamma,
        th.le(p.t2 * gamma_long, th.t2_gamma),
        "t2 gamma_long".into(),
    );
    if let Some(om) = optomech {
        let b = th.om_factor * om.t1_om;
        let pass = th.le(p.t1, b) && p.chi <= om.chi_max;
        push(
            ConditionId::IX,
            p.t1,
            b,
            pass,
            format!("t1 <= {} t1_OM and chi <= chi_max = {:e}", th.om_factor, om.chi_max),
        );
    }
    let overall_pass = out.iter().all(|c| c.pass);
    Ok(ConditionReport { conditions: out, overall_pass })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum T1Binding {
    Overlap,
    CoherenceMax,
    Saturation,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolTimes {
    pub t1: f64,
    pub t2: f64,
    pub t_max: Extremum,
    pub binding: T1Binding,
}

/// t₂ = 0.1/γ_air and t₁ = min{√(2t₂χ/ω), t_max, 0.05/γ_air}.
///
/// `standard` holds the non-collapse sources. t_max uses the Λ of those in the
/// short-distance regime at the smallest resolvable d; saturated sources
/// (air, with 2a below a nanometre) enter only through γ.
pub fn select_times(
    sphere: &SphereSpec,
    trap: &TrapSpec,
    env: &EnvironmentSpec,
    chi: f64,
    standard: &CompositeModel,
    th: &Thresholds,
) -> Result<ProtocolTimes> {
    let gamma_air = air_saturation_rate(env, sphere);
    if !(gamma_air > 0.0) {
        return Err(domain("air saturation rate is zero: supply an explicit t2 cap"));
    }
    select_times_with_t2(sphere, trap, chi, standard, th.t2_gamma / gamma_air, th.t1_gamma / gamma_air)
}

/// Same recipe with explicit caps for t₂ and for the saturation bound on t₁.
pub fn select_times_with_t2(
    sphere: &SphereSpec,
    trap: &TrapSpec,
    chi: f64,
    standard: &CompositeModel,
    t2: f64,
    t1_cap: f64,
) -> Result<ProtocolTimes> {
    ensure(chi > 0.0 && t2 > 0.0 && t1_cap > 0.0, "chi, t2 and t1 cap must be positive")?;
    let mass = sphere.mass();
    let overlap = (2.0 * t2 * chi / trap.omega).sqrt();
    let (mut t1, mut binding) =
        if overlap <= t1_cap { (overlap, T1Binding::Overlap) } else { (t1_cap, T1Binding::Saturation) };
    let d_min = expand_free_coherent(mass, trap.omega, t1)?.sigma2.sqrt() / chi.sqrt();
    let lambda: f64 = standard
        .components
        .iter()
        .filter(|m| m.is_short_distance(d_min))
        .map(LocalizationModel::lambda)
        .sum();
    let t_max = t_max_coherence(mass, trap.nbar, trap.omega, lambda);
    if let Extremum::Finite(tm) = t_max {
        if tm < t1 {
            t1 = tm;
            binding = T1Binding::CoherenceMax;
        }
    }
    Ok(ProtocolTimes { t1, t2, t_max, binding })
}

/// Allowed d under rows (ii), (iv), (v)–(viii) and (i), for fixed times.
///
/// Each saturating component switches from the short- to the long-distance
/// rows at d = 2a, so the d-axis is split at those points and every piece is
/// solved exactly. Returns the lowest connected allowed interval.
pub fn allowed_d_interval(
    mass: f64,
    trap: &TrapSpec,
    times: &ProtocolTimes,
    chi: f64,
    delta_x: f64,
    models: &CompositeModel,
    th: &Thresholds,
) -> Result<Option<Interval>> {
    let (t1, t2) = (times.t1, times.t2);
    let sigma = expand_free_coherent(mass, trap.omega, t1)?.sigma2.sqrt();
    let d_lo = sigma / chi.sqrt();
    let geo_hi = (8f64.sqrt() * sigma).min(2.0 * PI * HBAR * t2 / (mass * delta_x));
    let Some(outer) = Interval::new(d_lo, geo_hi) else { return Ok(None) };

    let mut cuts: Vec<f64> = models
        .components
        .iter()
        .filter(|m| m.kind == ModelKind::Saturating)
        .map(|m| 2.0 * m.a)
        .filter(|&x| x > outer.lo && x < outer.hi)
        .collect();
    cuts.push(outer.lo);
    cuts.push(outer.hi);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let xi_s = xi_at(mass, trap, t1, 0.0)?;
    let mut pieces: Vec<Interval> = Vec::new();
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        // regime is constant on (lo, hi); classify at the midpoint
        let (lambda_short, gamma_long) = split_regimes(models, 0.5 * (lo + hi));
        let mut top = hi;
        if gamma_long > 0.0 {
            if !th.le(t1 * gamma_long, th.t1_gamma) || !th.le(t2 * gamma_long, th.t2_gamma) {
                continue;
            }
            top = top.min(xi_s);
        }
        if lambda_short > 0.0 {
            top = top.min(xi_at(mass, trap, t1, lambda_short)?);
            top = top.min((3.0 / (lambda_short * t2)).sqrt());
        } else {
            top = top.min(xi_s);
        }
        if let Some(piece) = Interval::new(lo, top) {
            match pieces.last_mut() {
                Some(last) if last.hi >= piece.lo => last.hi = last.hi.max(piece.hi),
                _ => pieces.push(piece),
            }
        }
    }
    Ok(pieces.first().copied())
}

/// Smallest d with Θ_CM(d)·t₂ ≥ `level`, if any.
pub fn detectable_threshold(models_cm: &CompositeModel, t2: f64, level: f64) -> Result<Option<f64>> {
    let g = |d: f64| -> Result<f64> { Ok(models_cm.visibility_exponent(d)? * t2 - level) };
    let saturated: f64 = models_cm
        .components
        .iter()
        .map(|m| match m.kind {
            ModelKind::PureQuadratic if m.lambda() > 0.0 => f64::INFINITY,
            ModelKind::PureQuadratic => 0.0,
            ModelKind::Saturating => m.gamma,
        })
        .sum();
    if saturated * t2 <= level {
        return Ok(None);
    }
    let (mut lo, mut hi) = (1e-15f64, 1e-15f64);
    while g(hi)? < 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 1e6 {
            return Ok(None);
        }
    }
    if g(lo)? >= 0.0 {
        return Ok(Some(lo));
    }
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if g(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi / lo - 1.0 < 1e-14 {
            break;
        }
    }
    Ok(Some(hi))
}

/// [1/Θ_CM(d), 1/γ_air], open only when 1/Θ_CM(d) < threshold/γ_air.
/// For pure-quadratic models the lower end is 3/(Λ_CM d²).
pub fn falsification_time_window(
    models_cm: &CompositeModel,
    d: f64,
    gamma_air: f64,
    threshold: f64,
) -> Result<Option<Interval>> {
    ensure(d > 0.0, "superposition size must be positive")?;
    let theta = models_cm.visibility_exponent(d)?;
    if !(theta > 0.0) {
        return Ok(None);
    }
    let lo = 1.0 / theta;
    if gamma_air <= 0.0 {
        return Ok(Some(Interval { lo, hi: f64::INFINITY }));
    }
    if lo >= threshold / gamma_air {
        return Ok(None);
    }
    Ok(Some(Interval { lo, hi: 1.0 / gamma_air }))
}

/// Inputs shared by every D sample of a diagram.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagramSettings {
    pub params: DefaultParameterSet,
    /// Pa
    pub pressure: f64,
    pub t_internal: f64,
    pub chi: f64,
    pub thresholds: Thresholds,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagramRow {
    pub diameter: f64,
    pub t1: f64,
    pub t2: f64,
    pub standard: Option<Interval>,
    pub with_collapse: Option<Interval>,
    /// standard-allowed minus collapse-allowed
    pub green: Option<Interval>,
    /// part of `green` where Θ_CM·t₂ reaches the detection level
    pub green_detectable: Option<Interval>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityDiagram {
    pub collapse: Option<String>,
    pub rows: Vec<DiagramRow>,
}

impl FeasibilityDiagram {
    fn extent(&self, pick: impl Fn(&DiagramRow) -> Option<Interval>) -> Option<(f64, f64)> {
        let ds: Vec<f64> = self.rows.iter().filter(|r| pick(r).is_some()).map(|r| r.diameter).collect();
        Some((*ds.first()?, *ds.last()?))
    }

    /// D-range over which the collapse model is both excluded and resolvable.
    pub fn green_extent(&self) -> Option<(f64, f64)> {
        self.extent(|r| r.green_detectable)
    }

    pub fn raw_green_extent(&self) -> Option<(f64, f64)> {
        self.extent(|r| r.green)
    }
}

/// `per_decade` log-spaced samples covering [lo, hi], endpoints included.
pub fn log_axis(lo: f64, hi: f64, per_decade: usize) -> Result<Vec<f64>> {
    ensure(lo > 0.0 && hi > lo, "axis range must be positive and increasing")?;
    ensure(per_decade >= 1, "need at least one sample per decade")?;
    let n = ((hi / lo).log10() * per_decade as f64).ceil().max(1.0) as usize + 1;
    Ok((0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect())
}

pub fn standard_models(sphere: &SphereSpec, env: &EnvironmentSpec) -> Result<CompositeModel> {
    Ok(CompositeModel::new(vec![air_model(env, sphere)?, blackbody_model(sphere, env)?]))
}

pub fn diagram_row(
    diameter: f64,
    s: &DiagramSettings,
    collapse: Option<&CollapseModelId>,
) -> Result<DiagramRow> {
    let sphere = s.params.sphere(diameter / 2.0, s.t_internal)?;
    let env = s.params.environment(s.pressure)?;
    let trap = s.params.trap()?;
    let th = &s.thresholds;
    let standard = standard_models(&sphere, &env)?;
    let times = select_times(&sphere, &trap, &env, s.chi, &standard, th)?;
    let mass = sphere.mass();
    let std_iv = allowed_d_interval(mass, &trap, &times, s.chi, s.params.delta_x, &standard, th)?;
    let mut row = DiagramRow {
        diameter,
        t1: times.t1,
        t2: times.t2,
        standard: std_iv,
        with_collapse: std_iv,
        green: None,
        green_detectable: None,
    };
    let Some(id) = collapse else { return Ok(row) };
    let cm = CompositeModel::new(vec![model_for(id, &sphere)?]);
    let mut all = standard.clone();
    all.components.extend(cm.components.iter().cloned());
    let cm_iv = allowed_d_interval(mass, &trap, &times, s.chi, s.params.delta_x, &all, th)?;
    row.with_collapse = cm_iv;
    if let Some(sv) = std_iv {
        row.green = sv.minus(cm_iv.as_ref()).last().copied();
        if let Some(g) = row.green {
            if let Some(d_star) = detectable_threshold(&cm, times.t2, th.detect)? {
                row.green_detectable = Interval::new(g.lo.max(d_star), g.hi);
            }
        }
    }
    Ok(row)
}

/// Data-parallel over D; output order follows `diameters`.
pub fn sweep_diagram(
    diameters: &[f64],
    s: &DiagramSettings,
    collapse: Option<&CollapseModelId>,
) -> Result<FeasibilityDiagram> {
    ensure(diameters.len() >= 2, "diagram needs at least two diameters")?;
    ensure(diameters.iter().all(|&d| d > 0.0), "diameters must be positive")?;
    let rows = diameters
        .par_iter()
        .map(|&d| diagram_row(d, s, collapse))
        .collect::<Result<Vec<_>>>()?;
    Ok(FeasibilityDiagram { collapse: collapse.map(|c| c.to_string()), rows })
}
