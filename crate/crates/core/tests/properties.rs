use crflow::flow::{cutoff_eta, cutoff_eta_derivatives, state_from_unnormalized, state_to_unnormalized, FlowState, CUTOFF_C1};
use crflow::geometry::EigenField;
use crflow::stencil::solve_tridiagonal;
use proptest::prelude::*;

proptest! {
    #[test]
    fn cutoff_is_a_monotone_unit_interval_map(a in -1.0f64..4.0, b in -1.0f64..4.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let (el, eh) = (cutoff_eta(lo), cutoff_eta(hi));
        prop_assert!((0.0..=1.0).contains(&el));
        prop_assert!(eh <= el);
        let (d1, d2) = cutoff_eta_derivatives(a);
        prop_assert!(d1.abs() + d2.abs() <= CUTOFF_C1);
    }

    #[test]
    fn thomas_solves_diagonally_dominant_systems(
        rows in prop::collection::vec((-1.0f64..0.0, 0.1f64..3.0, -1.0f64..0.0, -5.0f64..5.0), 2..40)
    ) {
        let n = rows.len();
        let sub: Vec<f64> = rows.iter().map(|r| r.0).collect();
        let sup: Vec<f64> = rows.iter().map(|r| r.2).collect();
        let diag: Vec<f64> = rows.iter().map(|r| r.1 + 2.0).collect();
        let rhs: Vec<f64> = rows.iter().map(|r| r.3).collect();
        let mut x = rhs.clone();
        solve_tridiagonal(&sub, &diag, &sup, &mut x);
        for i in 0..n {
            let mut ax = diag[i] * x[i];
            if i > 0 { ax += sub[i] * x[i - 1]; }
            if i + 1 < n { ax += sup[i] * x[i + 1]; }
            prop_assert!((ax - rhs[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn conversion_round_trip_within_an_ulp(
        t in 0.0f64..10.0,
        ratios in prop::collection::vec(1e-6f64..10.0, 4..16),
        dim in 1usize..4,
    ) {
        let n = ratios.len();
        let state = FlowState {
            t,
            u: vec![0.0; n],
            udot: vec![0.0; n],
            metric_ratio: EigenField { radial: ratios.clone(), spherical: ratios },
            eps: 0.0,
            rho0: None,
        };
        let back = state_from_unnormalized(&state_to_unnormalized(&state, dim), dim);
        let ulp = |a: f64, b: f64| (a.to_bits() as i64).abs_diff(b.to_bits() as i64);
        prop_assert!(ulp(back.t, t) <= 1);
        for (a, b) in back.metric_ratio.radial.iter().zip(&state.metric_ratio.radial) {
            prop_assert!(ulp(*a, *b) <= 1, "{} vs {}", a, b);
        }
    }
}
