use crflow::flow::{
    boundary_value, build_alpha, chern_laplacian_radial, from_unnormalized, homogeneous_potential, ma_log_ratio,
    potential_integral, regularize_initial, run, state_from_unnormalized, state_to_unnormalized, step_unnormalized,
    to_unnormalized, FlowProblem, Frame, Regularization, RunSpec, SchemeConfig,
};
use crflow::geometry::{Background, EigenField, InitialData, Profile};
use crflow::{FlowError, RadialGrid};

fn disc() -> Background {
    Background::poincare_disc()
}

fn init(p: Profile) -> InitialData {
    InitialData::new(p).unwrap()
}

/// Composite Simpson on `n` (even) panels; independent of the library quadrature.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        let w = if k % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + k as f64 * h);
    }
    s * h / 3.0
}

/// `u(t) = e^{-t} ∫₀ᵗ e^σ log(1 - (1-c)e^{-σ}) dσ`
fn homogeneous_oracle(t: f64, c: f64) -> f64 {
    (-t).exp() * simpson(|s| s.exp() * (1.0 - (1.0 - c) * (-s).exp()).ln(), 0.0, t, 20_000)
}

#[test]
fn laplacian_of_r_squared_matches_closed_form() {
    let bg = disc();
    let mut errors = Vec::new();
    for n in [129, 257] {
        let grid = RadialGrid::new(n, 4.0).unwrap();
        let x = grid.nodes();
        let u: Vec<f64> = x.iter().map(|x| x.tanh().powi(2)).collect();
        let lap = chern_laplacian_radial(&u, &grid, &bg).unwrap();
        let err = grid
            .interior()
            .map(|i| {
                let r2 = x[i].tanh().powi(2);
                (lap[i] - 0.5 * (1.0 - r2).powi(2)).abs()
            })
            .fold(0.0, f64::max);
        errors.push(err);
    }
    let ratio = errors[0] / errors[1];
    assert!(errors[1] < 1e-4, "{errors:?}");
    assert!((3.5..=4.5).contains(&ratio), "refinement ratio {ratio}");
}

#[test]
fn laplacian_of_constant_vanishes() {
    let grid = RadialGrid::new(65, 5.0).unwrap();
    let lap = chern_laplacian_radial(&vec![3.7; 65], &grid, &disc()).unwrap();
    assert!(grid.interior().all(|i| lap[i].abs() < 1e-12));
}

#[test]
fn alpha_closed_forms() {
    let bg = disc();
    let g0 = EigenField::uniform(8, 0.3);
    assert_eq!(build_alpha(0.0, &g0, &bg), g0);
    let half = build_alpha(2f64.ln(), &EigenField::uniform(8, 0.0), &bg);
    assert!(half.radial.iter().all(|a| (a - 0.5).abs() < 1e-15));
    let late = build_alpha(50.0, &g0, &bg);
    assert!(late.radial.iter().all(|a| (a - 1.0).abs() < 1e-15));
}

#[test]
fn log_ratio_of_homogeneous_data() {
    let bg = disc();
    let grid = RadialGrid::new(65, 5.0).unwrap();
    for t in [0.0, 0.3, 1.0, 4.0] {
        let alpha = build_alpha(t, &EigenField::uniform(65, 0.5), &bg);
        let l = ma_log_ratio(&vec![0.25; 65], &alpha, &bg, &grid).unwrap();
        let expected = (1.0 - 0.5 * (-t).exp()).ln();
        assert!(l.iter().all(|v| (v - expected).abs() < 1e-14), "t = {t}");
    }
    let unit = ma_log_ratio(&vec![0.0; 65], &EigenField::uniform(65, 1.0), &bg, &grid).unwrap();
    assert!(unit.iter().all(|&v| v == 0.0));
}

#[test]
fn log_ratio_rejects_nonpositive_metric() {
    let bg = disc();
    let grid = RadialGrid::new(33, 3.0).unwrap();
    let err = ma_log_ratio(&vec![0.0; 33], &EigenField::uniform(33, 0.0), &bg, &grid).unwrap_err();
    assert!(matches!(err, FlowError::Positivity { .. }));
}

#[test]
fn regularization_plateau_and_tail() {
    let bg = disc();
    let grid = RadialGrid::new(257, 10.0).unwrap();
    let reg = Regularization {
        eps: 0.01,
        rho0: Some(2.0),
    };
    let g = regularize_initial(&init(Profile::TailDecay), reg, &bg, &grid).unwrap();
    for (i, x) in grid.nodes().into_iter().enumerate() {
        let rho = bg.exhaustion(x);
        if rho <= 2.0 {
            assert!((g.radial[i] - ((-rho).exp() + 0.01)).abs() < 1e-14);
        }
        if rho >= 4.0 {
            assert!((g.radial[i] - 1.01).abs() < 1e-14);
        }
    }
    let unit = regularize_initial(&init(Profile::Stationary), reg, &bg, &grid).unwrap();
    assert!(unit.radial.iter().all(|v| (v - 1.01).abs() < 1e-14));
}

#[test]
fn boundary_value_against_quadrature() {
    assert_eq!(boundary_value(1.0, 0.0), 0.0);
    // u̇ = log(1 + ε e^{-t}) - u for the (1+ε) tail
    let oracle = (-1.0f64).exp() * simpson(|s| s.exp() * (0.1 * (-s).exp()).ln_1p(), 0.0, 1.0, 20_000);
    assert!((boundary_value(1.0, 0.1) - oracle).abs() < 1e-10);
    assert!(boundary_value(40.0, 0.1).abs() < 1e-12);
}

#[test]
fn homogeneous_potential_matches_independent_quadrature() {
    for t in [0.1, 1.0, 3.0] {
        assert!((homogeneous_potential(t, 0.5, 1) - homogeneous_oracle(t, 0.5)).abs() < 1e-10);
    }
}

#[test]
fn stationary_run_stays_fixed() {
    let spec = RunSpec::new(disc(), RadialGrid::new(129, 8.0).unwrap(), init(Profile::Stationary), 5.0);
    let traj = run(&spec).unwrap();
    assert!(traj.states.iter().all(|s| s.u.iter().all(|u| u.abs() <= 1e-10)));
    assert!(traj.steps.iter().all(|r| r.newton_iters <= 1));
}

#[test]
fn homogeneous_run_matches_ode() {
    let spec = RunSpec::new(disc(), RadialGrid::new(129, 8.0).unwrap(), init(Profile::Homogeneous(0.5)), 3.0)
        .with_checkpoints(vec![0.5, 1.0, 2.0]);
    let traj = run(&spec).unwrap();
    assert_eq!(traj.times(), vec![0.0, 0.5, 1.0, 2.0, 3.0]);
    for s in &traj.states[1..] {
        let exact = homogeneous_oracle(s.t, 0.5);
        assert!(s.u.iter().all(|u| (u - exact).abs() < 0.02), "t = {}", s.t);
    }
}

#[test]
fn degenerate_first_step_stays_positive() {
    for eps in [1e-1, 1e-2, 1e-3] {
        let spec = RunSpec::new(disc(), RadialGrid::new(129, 8.0).unwrap(), init(Profile::Degenerate), 0.01)
            .with_reg(eps, Some(2.0))
            .recording_all();
        let traj = run(&spec).unwrap();
        assert!((traj.states[1].t - 1e-4).abs() < 1e-18);
        for s in &traj.states[1..] {
            assert!(s.metric_ratio.min_with_node(1).1 > 0.0, "eps {eps}");
        }
    }
}

#[test]
fn unregularized_degenerate_start_needs_ladder() {
    let spec = RunSpec::new(disc(), RadialGrid::new(65, 5.0).unwrap(), init(Profile::Degenerate), 1.0);
    assert!(matches!(run(&spec), Err(FlowError::LadderRequired)));
}

#[test]
fn runs_are_deterministic() {
    let spec = RunSpec::new(disc(), RadialGrid::new(129, 8.0).unwrap(), init(Profile::InteriorBump { inner: 1.5, outer: 2.5 }), 1.0)
        .with_reg(1e-2, Some(2.0));
    let a = run(&spec).unwrap();
    let b = rayon::ThreadPoolBuilder::new()
        .num_threads(3)
        .build()
        .unwrap()
        .install(|| run(&spec).unwrap());
    assert_eq!(a, b);
}

#[test]
fn halved_scheme_halves_every_step() {
    let cfg = SchemeConfig::default();
    let half = cfg.halved();
    for t in [0.0, 1e-3, 0.05, 0.2, 3.0] {
        let full = cfg.next_time(t) - t;
        let halved = half.next_time(t) - t;
        assert!((halved - 0.5 * full).abs() < 1e-15, "t = {t}");
    }
}

#[test]
fn potential_reconstruction() {
    let g = RadialGrid::new(65, 5.0).unwrap();
    let stationary = run(&RunSpec::new(disc(), g.clone(), init(Profile::Stationary), 1.0).recording_all()).unwrap();
    let rec = potential_integral(&stationary).unwrap();
    assert!(rec.u.iter().flatten().all(|u| u.abs() < 1e-12));

    let mut diffs = Vec::new();
    let mut scheme = SchemeConfig::default();
    for _ in 0..3 {
        let spec = RunSpec::new(disc(), g.clone(), init(Profile::Homogeneous(0.5)), 2.0)
            .with_scheme(scheme.clone())
            .recording_all();
        let rec = potential_integral(&run(&spec).unwrap()).unwrap();
        let last = rec.u.last().unwrap();
        assert!((last[10] - homogeneous_oracle(2.0, 0.5)).abs() < 0.02);
        diffs.push(rec.sup_difference);
        scheme = scheme.halved();
    }
    for w in diffs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(order > 0.8, "{diffs:?}");
    }
}

#[test]
fn potential_reconstruction_needs_enough_states() {
    let g = RadialGrid::new(65, 5.0).unwrap();
    let traj = run(&RunSpec::new(disc(), g, init(Profile::Stationary), 1.0).with_checkpoints(vec![0.5])).unwrap();
    assert!(matches!(potential_integral(&traj), Err(FlowError::Resolution { .. })));
}

#[test]
fn conversion_closed_forms() {
    let g = RadialGrid::new(65, 5.0).unwrap();
    let traj = run(&RunSpec::new(disc(), g, init(Profile::Homogeneous(0.5)), 1.0).with_checkpoints(vec![2f64.ln()]))
        .unwrap();
    let un = to_unnormalized(&traj).unwrap();
    assert_eq!(un.states[0].t, 0.0);
    assert_eq!(un.states[0].metric_ratio, traj.states[0].metric_ratio);
    let at = traj.states.iter().position(|s| s.t == 2f64.ln()).unwrap();
    assert!((un.states[at].t - 1.0).abs() < 1e-15);
    for (a, b) in un.states[at].metric_ratio.radial.iter().zip(&traj.states[at].metric_ratio.radial) {
        assert!((a - 2.0 * b).abs() <= 4.0 * f64::EPSILON * a.abs());
    }
    assert!(to_unnormalized(&un).is_err());
    assert!(from_unnormalized(&traj).is_err());

    let back = from_unnormalized(&un).unwrap();
    for (a, b) in traj.states.iter().zip(&back.states) {
        assert_eq!(a.t, b.t);
        let state = state_from_unnormalized(&state_to_unnormalized(a, 1), 1);
        assert_eq!(state.t, a.t);
    }
}

#[test]
fn unnormalized_step_from_background() {
    // ω(s) = (1+s)θ₀ so φ̇ = n log(1+s)
    let bg = Background::ball(2).unwrap();
    let grid = RadialGrid::new(65, 5.0).unwrap();
    let problem = FlowProblem::new(bg, grid, &init(Profile::Stationary), Regularization::default(), Frame::Unnormalized)
        .unwrap();
    let cfg = SchemeConfig::default();
    let mut state = problem.initial_state();
    assert!(state.udot.iter().all(|v| v.abs() < 1e-14));
    for _ in 0..20 {
        state = step_unnormalized(&problem, &state, 0.05, &cfg).unwrap().0;
    }
    let s = state.t;
    assert!((s - 1.0).abs() < 1e-12);
    for i in 0..60 {
        assert!((state.udot[i] - 2.0 * s.ln_1p()).abs() < 0.05, "node {i}");
        assert!((state.metric_ratio.radial[i] - (1.0 + s)).abs() < 0.05);
    }
    let normalized = FlowProblem::new(
        Background::ball(2).unwrap(),
        RadialGrid::new(65, 5.0).unwrap(),
        &init(Profile::Stationary),
        Regularization::default(),
        Frame::Normalized,
    )
    .unwrap();
    assert!(step_unnormalized(&normalized, &normalized.initial_state(), 0.1, &cfg).is_err());
}
