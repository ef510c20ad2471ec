use merid_core::collapse::{model_for, CollapseModelId, MODEL_GRAMMAR};
use merid_core::gaussian::{argmax_log, coherence_length_at, t_max_coherence, xi_max, Extremum};
use merid_core::interference::{
    apply_localization_to_pattern, extract_visibility, measured_fringe_spacing, simulate_pattern, PatternGrid,
};
use merid_core::localization::{CompositeModel, LocalizationModel, ModelKind};
use merid_core::optomech::{chi_upper_bound, measurement_strength, t1_bound, OptomechBounds};
use merid_core::params::{EnvironmentSpec, SphereSpec};
use merid_core::protocol::{
    check_conditions, fringe_spacing, log_axis, select_times, standard_models, sweep_diagram, ConditionId,
    DiagramSettings, Interval, ProtocolPlan,
};
use merid_core::standard::{air_model, blackbody_model};
use merid_core::Error as CoreError;
use serde::Serialize;

use crate::config::Resolved;
use crate::error::{usage, CliError, CliResult};
use crate::output::{num, opt_num, Csv, OutputFile};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Rates,
    Coherence,
    Diagram,
    Interfere,
    Optomech,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Rates => "rates",
            Command::Coherence => "coherence",
            Command::Diagram => "diagram",
            Command::Interfere => "interfere",
            Command::Optomech => "optomech",
        }
    }

    fn default_models(self) -> &'static str {
        match self {
            Command::Rates => "air,bb,csl,qg,dp,k",
            Command::Interfere => "csl,qg",
            _ => "none",
        }
    }
}

/// Files to write plus the lines to print on standard output.
pub struct CommandOutput {
    pub files: Vec<OutputFile>,
    pub summary: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Air,
    Blackbody,
    Collapse(CollapseModelId),
}

pub const SOURCE_GRAMMAR: &str = "comma-separated list of: none | air | bb | ";

pub fn parse_sources(list: &str) -> CliResult<Vec<Source>> {
    let mut out = Vec::new();
    for tok in list.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        match tok.to_ascii_lowercase().as_str() {
            "none" => {}
            "air" => out.push(Source::Air),
            "bb" | "blackbody" => out.push(Source::Blackbody),
            _ => out.push(Source::Collapse(tok.parse().map_err(|_| {
                usage(format!("unknown model '{tok}'; expected {SOURCE_GRAMMAR}{MODEL_GRAMMAR}"))
            })?)),
        }
    }
    Ok(out)
}

/// Collapse models only; the standard sources are always part of the protocol.
fn collapse_models(list: &str, cmd: Command) -> CliResult<Vec<CollapseModelId>> {
    parse_sources(list)?
        .into_iter()
        .map(|s| match s {
            Source::Collapse(id) => Ok(id),
            _ => Err(usage(format!(
                "'{}' accepts collapse models only (air and blackbody are always included); expected {MODEL_GRAMMAR}",
                cmd.name()
            ))),
        })
        .collect()
}

/// Replaces the empty model list by the command default, so the manifest
/// records what actually ran.
pub fn fill_defaults(r: &mut Resolved, cmd: Command) {
    if r.run.models.trim().is_empty() {
        r.run.models = cmd.default_models().to_string();
    }
}

pub fn run(cmd: Command, r: &Resolved) -> CliResult<CommandOutput> {
    match cmd {
        Command::Rates => cmd_rates(r),
        Command::Coherence => cmd_coherence(r),
        Command::Diagram => cmd_diagram(r),
        Command::Interfere => cmd_interfere(r),
        Command::Optomech => cmd_optomech(r),
    }
}

fn sphere_env(r: &Resolved, diameter: f64) -> CliResult<(SphereSpec, EnvironmentSpec)> {
    Ok((r.params.sphere(diameter / 2.0, r.run.t_internal)?, r.params.environment(r.run.pressure)?))
}

fn slug(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }).collect()
}

pub fn cmd_rates(r: &Resolved) -> CliResult<CommandOutput> {
    let sources = parse_sources(&r.run.models)?;
    if sources.is_empty() {
        return Err(usage("rates needs at least one source"));
    }
    let (sphere, env) = sphere_env(r, r.run.diameter)?;
    let lambda_bb = blackbody_model(&sphere, &env)?.lambda();
    let mut csv = Csv::with_meta(
        &[
            ("diameter_m", num(r.run.diameter)),
            ("pressure_torr", num(r.pressure_torr())),
            ("t_internal_k", num(r.run.t_internal)),
            ("t_env_k", num(r.params.t_env)),
        ],
        &["source", "gamma_per_s", "a_m", "lambda_per_m2_s", "lambda_over_bb"],
    );
    let mut summary = Vec::new();
    for s in &sources {
        let m: LocalizationModel = match s {
            Source::Air => air_model(&env, &sphere)?,
            Source::Blackbody => blackbody_model(&sphere, &env)?,
            Source::Collapse(id) => model_for(id, &sphere)?,
        };
        let (g, a) = match m.kind {
            ModelKind::Saturating => (Some(m.gamma), Some(m.a)),
            ModelKind::PureQuadratic => (None, None),
        };
        let label = match s {
            Source::Air => "air".to_string(),
            Source::Blackbody => "bb".to_string(),
            Source::Collapse(id) => id.to_string(),
        };
        csv.row([label.clone(), opt_num(g), opt_num(a), num(m.lambda()), num(m.lambda() / lambda_bb)]);
        summary.push(format!("{label}: Lambda = {:.4e} m^-2 s^-1", m.lambda()));
    }
    Ok(CommandOutput { files: vec![OutputFile::csv("rates.csv", csv)], summary })
}

#[derive(Serialize)]
struct CoherenceSummary {
    diameter_m: f64,
    lambda_per_m2_s: f64,
    sources: Vec<String>,
    /// closed form; null when ξ grows without bound
    t_max_s: Option<f64>,
    xi_max_m: Option<f64>,
    /// golden-section maximiser of ξ(t) over the time grid
    t_argmax_s: Option<f64>,
    xi_at_argmax_m: Option<f64>,
    unbounded: bool,
}

/// ξ(t) under the short-distance sources: blackbody plus any collapse models.
/// Air saturates below the nanometre and acts only through γ.
pub fn cmd_coherence(r: &Resolved) -> CliResult<CommandOutput> {
    let cms = collapse_models(&r.run.models, Command::Coherence)?;
    let (sphere, env) = sphere_env(r, r.run.diameter)?;
    let trap = r.params.trap()?;
    let mass = sphere.mass();
    let mut labels = vec!["blackbody".to_string()];
    let mut lambda = blackbody_model(&sphere, &env)?.lambda();
    for id in &cms {
        lambda += model_for(id, &sphere)?.lambda();
        labels.push(id.to_string());
    }
    let (t_lo, t_hi, n) = (r.run.t_min, r.run.t_max, r.run.t_points);
    if !(t_lo > 0.0 && t_hi > t_lo && n >= 2) {
        return Err(usage("time grid needs 0 < t_min < t_max and t_points >= 2"));
    }
    let mut csv = Csv::new(&["t_s", "xi_m", "xi_s_m"]);
    for i in 0..n {
        let t = t_lo * (t_hi / t_lo).powf(i as f64 / (n - 1) as f64);
        let xi = coherence_length_at(mass, trap.omega, trap.nbar, lambda, t)?;
        let xi_s = coherence_length_at(mass, trap.omega, trap.nbar, 0.0, t)?;
        csv.row([num(t), num(xi), num(xi_s)]);
    }
    let tm = t_max_coherence(mass, trap.nbar, trap.omega, lambda);
    let xm = xi_max(mass, trap.nbar, trap.omega, lambda);
    let (t_arg, xi_arg) = match tm {
        Extremum::Finite(_) => {
            let f = |t: f64| coherence_length_at(mass, trap.omega, trap.nbar, lambda, t).unwrap_or(0.0);
            let t = argmax_log(f, t_lo, t_hi, 200);
            (Some(t), Some(f(t)))
        }
        Extremum::Unbounded => (None, None),
    };
    let s = CoherenceSummary {
        diameter_m: r.run.diameter,
        lambda_per_m2_s: lambda,
        sources: labels,
        t_max_s: tm.finite(),
        xi_max_m: xm.finite(),
        t_argmax_s: t_arg,
        xi_at_argmax_m: xi_arg,
        unbounded: tm == Extremum::Unbounded,
    };
    let line = match (s.t_max_s, s.xi_max_m) {
        (Some(t), Some(x)) => format!("t_max = {t:.6e} s, xi_max = {x:.6e} m"),
        _ => "t_max unbounded (no short-distance decoherence)".to_string(),
    };
    Ok(CommandOutput {
        files: vec![OutputFile::csv("coherence.csv", csv), OutputFile::json("coherence_summary.json", &s)],
        summary: vec![line],
    })
}

#[derive(Serialize)]
struct DiagramSummaryEntry {
    collapse: Option<String>,
    file: String,
    /// D-range where the model is excluded and its signal resolvable
    green_extent_m: Option<[f64; 2]>,
    raw_green_extent_m: Option<[f64; 2]>,
}

fn interval_cols(i: Option<Interval>) -> [String; 2] {
    match i {
        Some(v) => [num(v.lo), num(v.hi)],
        None => [String::new(), String::new()],
    }
}

pub fn diagram_settings(r: &Resolved) -> DiagramSettings {
    DiagramSettings {
        params: r.params,
        pressure: r.run.pressure,
        t_internal: r.run.t_internal,
        chi: r.run.chi,
        thresholds: r.thresholds,
    }
}

pub fn diameter_axis(r: &Resolved) -> CliResult<Vec<f64>> {
    let (lo, hi) = (r.run.diameter_min, r.run.diameter_max);
    if !(lo > 0.0 && hi > lo) {
        return Err(usage(format!("empty diameter range [{lo:e}, {hi:e}] m")));
    }
    Ok(log_axis(lo, hi, r.run.per_decade)?)
}

pub fn cmd_diagram(r: &Resolved) -> CliResult<CommandOutput> {
    let cms = collapse_models(&r.run.models, Command::Diagram)?;
    let ds = diameter_axis(r)?;
    let settings = diagram_settings(r);
    let runs: Vec<Option<&CollapseModelId>> = if cms.is_empty() { vec![None] } else { cms.iter().map(Some).collect() };
    let mut files = Vec::new();
    let mut entries = Vec::new();
    let mut summary = Vec::new();
    for id in runs {
        let diagram = sweep_diagram(&ds, &settings, id)?;
        let mut csv = Csv::new(&[
            "D_m",
            "d_lo_std_m",
            "d_hi_std_m",
            "d_lo_cm_m",
            "d_hi_cm_m",
            "green_lo_m",
            "green_hi_m",
            "green_detect_lo_m",
            "green_detect_hi_m",
        ]);
        for row in &diagram.rows {
            let cm = if id.is_some() { row.with_collapse } else { None };
            let mut f = vec![num(row.diameter)];
            f.extend(interval_cols(row.standard));
            f.extend(interval_cols(cm));
            f.extend(interval_cols(row.green));
            f.extend(interval_cols(row.green_detectable));
            csv.row(f);
        }
        let name = match id {
            Some(m) => format!("diagram_{}.csv", slug(&m.to_string())),
            None => "diagram.csv".to_string(),
        };
        let ext = diagram.green_extent();
        summary.push(match (id, ext) {
            (None, _) => "standard sources only: no green region".to_string(),
            (Some(m), Some((a, b))) => format!("green region D-extent ({m}): [{a:.4e}, {b:.4e}] m"),
            (Some(m), None) => format!("green region D-extent ({m}): empty"),
        });
        entries.push(DiagramSummaryEntry {
            collapse: diagram.collapse.clone(),
            file: name.clone(),
            green_extent_m: ext.map(|(a, b)| [a, b]),
            raw_green_extent_m: diagram.raw_green_extent().map(|(a, b)| [a, b]),
        });
        files.push(OutputFile::csv(name, csv));
    }
    files.push(OutputFile::json("diagram_summary.json", &entries));
    Ok(CommandOutput { files, summary })
}

#[derive(Serialize)]
struct ConditionEntry {
    id: String,
    value: f64,
    bound: f64,
    pass: bool,
}

#[derive(Serialize)]
struct StackEntry {
    stack: String,
    sources: Vec<String>,
    file: String,
    /// fringe contrast of the pattern itself
    visibility_raw: f64,
    /// contrast relative to the decoherence-free pattern
    visibility: f64,
    /// exp(−Σ Θ(d) t₂)
    visibility_closed_form: f64,
}

#[derive(Serialize)]
struct InterfereSummary {
    diameter_m: f64,
    d_m: f64,
    t1_s: f64,
    t2_s: f64,
    sigma_m: f64,
    sigma_d_m: f64,
    x_f_m: f64,
    x_f_measured_m: Option<f64>,
    grid_points: usize,
    grid_step_m: f64,
    conditions: Vec<ConditionEntry>,
    stacks: Vec<StackEntry>,
}

fn pattern_csv(p: &PatternGrid, meta: &[(&str, String)]) -> Csv {
    let dens = p.probability();
    let top = dens.iter().cloned().fold(0.0, f64::max);
    let keep = |v: &f64| *v > 1e-12 * top;
    let lo = dens.iter().position(keep).unwrap_or(0);
    let hi = dens.iter().rposition(keep).unwrap_or(0);
    let mut csv = Csv::with_meta(meta, &["x_m", "probability_density_per_m"]);
    for (j, v) in dens.iter().enumerate().take(hi + 1).skip(lo) {
        csv.row([num(p.x(j)), num(*v)]);
    }
    csv
}

fn numerical(e: CoreError) -> CliError {
    match e {
        CoreError::Domain(m) | CoreError::Numerical(m) => CliError::Numerical(m),
    }
}

pub fn cmd_interfere(r: &Resolved) -> CliResult<CommandOutput> {
    let cms = collapse_models(&r.run.models, Command::Interfere)?;
    let (sphere, env) = sphere_env(r, r.run.diameter)?;
    let trap = r.params.trap()?;
    let mass = sphere.mass();
    let standard = standard_models(&sphere, &env)?;
    let times = select_times(&sphere, &trap, &env, r.run.chi, &standard, &r.thresholds)?;
    let plan = ProtocolPlan::new(mass, &trap, times.t1, times.t2, r.run.d, r.run.chi, r.params.delta_x)?;
    let om = OptomechBounds::compute(&sphere, &r.params.cavity()?, &trap)?;
    let report = check_conditions(&plan, &sphere, &trap, &standard, Some(&om), &r.thresholds)?;
    for id in [ConditionId::I, ConditionId::II] {
        let c = report.get(id).expect("geometric rows are always evaluated");
        if !c.pass {
            return Err(CliError::Precondition {
                id: id.to_string(),
                message: format!("{} (value {:e}, bound {:e})", c.detail, c.value, c.bound),
            });
        }
    }
    let x_f = fringe_spacing(mass, plan.d, plan.t2)?;
    let free = simulate_pattern(&plan, &sphere, &trap, &CompositeModel::default()).map_err(numerical)?;

    let mut stacks: Vec<(String, CompositeModel)> = vec![("none".into(), CompositeModel::default())];
    stacks.push(("standard".into(), standard.clone()));
    for id in &cms {
        let mut s = standard.clone();
        s.push(model_for(id, &sphere)?);
        stacks.push((format!("standard+{id}"), s));
    }
    let meta_base = [
        ("diameter_m", num(r.run.diameter)),
        ("d_m", num(plan.d)),
        ("t2_s", num(plan.t2)),
        ("x_f_m", num(x_f)),
    ];
    let mut files = Vec::new();
    let mut entries = Vec::new();
    let mut summary = vec![format!("x_f = {x_f:.6e} m, t1 = {:.4e} s, t2 = {:.4e} s", plan.t1, plan.t2)];
    for (name, stack) in &stacks {
        let p = apply_localization_to_pattern(&free, stack, plan.t2, mass).map_err(numerical)?;
        let raw = extract_visibility(&p, x_f, None).map_err(numerical)?;
        let rel = extract_visibility(&p, x_f, Some(&free)).map_err(numerical)?;
        let closed = (-stack.visibility_exponent(plan.d)? * plan.t2).exp();
        let file = format!("pattern_{}.csv", slug(name));
        let mut meta = meta_base.to_vec();
        meta.push(("stack", name.clone()));
        meta.push(("visibility", num(rel)));
        files.push(OutputFile::csv(file.clone(), pattern_csv(&p, &meta)));
        summary.push(format!("{name}: visibility = {rel:.6} (closed form {closed:.6})"));
        entries.push(StackEntry {
            stack: name.clone(),
            sources: stack.labels().iter().map(|s| s.to_string()).collect(),
            file,
            visibility_raw: raw,
            visibility: rel,
            visibility_closed_form: closed,
        });
    }
    let s = InterfereSummary {
        diameter_m: r.run.diameter,
        d_m: plan.d,
        t1_s: plan.t1,
        t2_s: plan.t2,
        sigma_m: plan.sigma,
        sigma_d_m: plan.sigma_d,
        x_f_m: x_f,
        x_f_measured_m: measured_fringe_spacing(&free).ok(),
        grid_points: free.len(),
        grid_step_m: free.dx,
        conditions: report
            .conditions
            .iter()
            .map(|c| ConditionEntry { id: c.id.to_string(), value: c.value, bound: c.bound, pass: c.pass })
            .collect(),
        stacks: entries,
    };
    files.push(OutputFile::json("interfere_summary.json", &s));
    Ok(CommandOutput { files, summary })
}

pub fn cmd_optomech(r: &Resolved) -> CliResult<CommandOutput> {
    let ds = diameter_axis(r)?;
    let trap = r.params.trap()?;
    let cavity = r.params.cavity()?;
    let mut csv = Csv::new(&[
        "D_m",
        "g0_per_s",
        "kappa_per_s",
        "gamma0_sc_per_s",
        "t1_om_s",
        "t1_adiabatic_s",
        "t1_scattering_s",
        "t1_branch",
        "chi_max",
        "chi_adiabatic",
        "chi_scattering",
        "chi_branch",
        "chi_at_t1_om",
    ]);
    let mut small = (f64::INFINITY, 0.0f64, f64::INFINITY, 0.0f64);
    for &d in &ds {
        let sphere = r.params.sphere(d / 2.0, r.run.t_internal)?;
        let b = OptomechBounds::compute(&sphere, &cavity, &trap)?;
        let t1 = t1_bound(&sphere, &cavity, &trap)?;
        let chi = chi_upper_bound(&sphere, &cavity, &trap)?;
        let chi_t1 = measurement_strength(t1.t1_om, &trap, b.g0, b.kappa)?;
        csv.row([
            num(d),
            num(b.g0),
            num(b.kappa),
            num(b.gamma0_sc),
            num(t1.t1_om),
            num(t1.adiabatic),
            num(t1.scattering),
            t1.branch.to_string(),
            num(chi.chi_max),
            num(chi.adiabatic),
            num(chi.scattering),
            chi.branch.to_string(),
            num(chi_t1),
        ]);
        if d < 100e-9 {
            small = (small.0.min(t1.t1_om), small.1.max(t1.t1_om), small.2.min(chi.chi_max), small.3.max(chi.chi_max));
        }
    }
    let mut summary = Vec::new();
    if small.1 > 0.0 {
        summary.push(format!(
            "D < 100 nm: t1_OM in [{:.3e}, {:.3e}] s, chi_max in [{:.3}, {:.3}]",
            small.0, small.1, small.2, small.3
        ));
    }
    Ok(CommandOutput { files: vec![OutputFile::csv("optomech.csv", csv)], summary })
}
