use merid_core::collapse::{model_for, CollapseModelId};
use merid_core::constants::torr_to_pascal;
use merid_core::interference::{apply_localization_to_pattern, extract_visibility, simulate_pattern};
use merid_core::localization::CompositeModel;
use merid_core::params::DefaultParameterSet;
use merid_core::protocol::{
    check_conditions, diagram_row, fringe_spacing, select_times, standard_models, DiagramSettings, ProtocolPlan,
    Thresholds,
};

fn settings() -> DiagramSettings {
    DiagramSettings {
        params: DefaultParameterSet::default(),
        pressure: torr_to_pascal(1e-14).unwrap(),
        t_internal: 100.0,
        chi: 1000.0,
        thresholds: Thresholds::default(),
    }
}

#[test]
fn green_point_passes_standard_rows_and_fails_with_collapse() {
    let s = settings();
    let csl: CollapseModelId = "csl".parse().unwrap();
    let dia = 200e-9;
    let row = diagram_row(dia, &s, Some(&csl)).unwrap();
    let green = row.green_detectable.expect("200 nm lies inside the CSL green region");
    let d = (green.lo * green.hi).sqrt();

    let sphere = s.params.sphere(dia / 2.0, s.t_internal).unwrap();
    let env = s.params.environment(s.pressure).unwrap();
    let trap = s.params.trap().unwrap();
    let standard = standard_models(&sphere, &env).unwrap();
    let times = select_times(&sphere, &trap, &env, s.chi, &standard, &s.thresholds).unwrap();
    assert_eq!((times.t1, times.t2), (row.t1, row.t2));
    let plan = ProtocolPlan::new(sphere.mass(), &trap, times.t1, times.t2, d, s.chi, s.params.delta_x).unwrap();

    let r = check_conditions(&plan, &sphere, &trap, &standard, None, &s.thresholds).unwrap();
    assert!(r.overall_pass, "{:?}", r.first_failure());
    let mut all = standard.clone();
    all.push(model_for(&csl, &sphere).unwrap());
    let r = check_conditions(&plan, &sphere, &trap, &all, None, &s.thresholds).unwrap();
    assert!(!r.overall_pass);
}

#[test]
fn simulated_visibility_tracks_closed_form_in_green_region() {
    let s = settings();
    let sphere = s.params.sphere(50e-9, s.t_internal).unwrap();
    let env = s.params.environment(s.pressure).unwrap();
    let trap = s.params.trap().unwrap();
    let standard = standard_models(&sphere, &env).unwrap();
    let times = select_times(&sphere, &trap, &env, s.chi, &standard, &s.thresholds).unwrap();
    let plan = ProtocolPlan::new(sphere.mass(), &trap, times.t1, times.t2, 30e-9, s.chi, s.params.delta_x).unwrap();
    let x_f = fringe_spacing(sphere.mass(), plan.d, plan.t2).unwrap();
    let free = simulate_pattern(&plan, &sphere, &trap, &CompositeModel::default()).unwrap();
    let mut prev = 1.0 + 1e-9;
    for id in ["csl", "qg"] {
        let mut stack = standard.clone();
        stack.push(model_for(&id.parse().unwrap(), &sphere).unwrap());
        let p = simulate_pattern(&plan, &sphere, &trap, &stack).unwrap();
        let again = apply_localization_to_pattern(&free, &stack, plan.t2, sphere.mass()).unwrap();
        // `free` went through one extra FFT round trip
        let (a, b) = (p.probability(), again.probability());
        let top = a.iter().cloned().fold(0.0, f64::max);
        assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() <= 1e-12 * top));
        let v = extract_visibility(&p, x_f, Some(&free)).unwrap();
        let closed = (-stack.visibility_exponent(plan.d).unwrap() * plan.t2).exp();
        assert!((v / closed - 1.0).abs() < 0.05, "{id}: {v} vs {closed}");
        assert!(v < prev);
        prev = v;
    }
}

#[test]
fn parameter_sets_round_trip_through_json() {
    let p = DefaultParameterSet { density: 1850.0, ..Default::default() };
    let back: DefaultParameterSet = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
    assert_eq!(back, p);
    let t = Thresholds { detect: 2.0, ..Default::default() };
    let back: Thresholds = serde_json::from_str(&serde_json::to_string(&t).unwrap()).unwrap();
    assert_eq!(back, t);
    assert!(serde_json::from_str::<DefaultParameterSet>(r#"{"density": 1.0, "colour": 2}"#).is_err());
}
