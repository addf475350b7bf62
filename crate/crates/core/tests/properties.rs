use duhem::curves::{anhysteresis_implicit, traversing_curve};
use duhem::storage::{omega_dahl_closed_form, StorageOptions};
use duhem::{
    anhysteresis, cw_supply_integral, intersect_lambda, lambda_dahl_closed_form, rate_reparameterize, simulate,
    storage_cw, storage_dahl_closed_form, Anhysteresis, Domain, DuhemModel, InputSignal, PhasePoint,
};
use proptest::prelude::*;

const RHO: f64 = 1.5;
const FC: f64 = 0.75;

fn dahl() -> DuhemModel {
    DuhemModel::dahl(RHO, FC, 1.0).unwrap()
}

/// Piecewise-linear inputs starting at 0 with 2..8 segments.
fn input_strategy() -> impl Strategy<Value = InputSignal> {
    prop::collection::vec((0.2f64..2.0, -2.0f64..2.0), 2..8).prop_map(|steps| {
        let mut t = 0.0;
        let mut pts = vec![(0.0, 0.0)];
        for (dt, u) in steps {
            t += dt;
            pts.push((t, u));
        }
        InputSignal::new(pts).unwrap()
    })
}

/// Increasing warp knots covering `[0, end]`.
fn warp_knots(end: f64, slopes: &[f64]) -> Vec<(f64, f64)> {
    let n = slopes.len();
    let mut knots = vec![(0.0, 0.0)];
    let mut s = 0.0;
    for (i, &slope) in slopes.iter().enumerate() {
        let t0 = end * i as f64 / n as f64;
        let t1 = if i + 1 == n {
            end
        } else {
            end * (i + 1) as f64 / n as f64
        };
        s += slope * (t1 - t0);
        knots.push((t1, s));
    }
    knots
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn rate_independence(input in input_strategy(), slopes in prop::collection::vec(0.1f64..10.0, 1..6), y0 in -0.7f64..0.7) {
        let m = dahl();
        let warp = warp_knots(input.end_time(), &slopes);
        let warped = rate_reparameterize(&input, &warp).unwrap();
        let a = simulate(&m, &input, y0, 1e-3).unwrap();
        let b = simulate(&m, &warped, y0, 1e-3).unwrap();
        let tb: Vec<_> = b.at_breakpoints().collect();
        for s in a.at_breakpoints() {
            let hit = tb.iter().find(|x| x.u == s.u && (x.y - s.y).abs() < 1e-8);
            prop_assert!(hit.is_some(), "no warped sample matches u = {}, y = {}", s.u, s.y);
        }
        prop_assert!((a.last().y - b.last().y).abs() < 1e-8);
    }

    #[test]
    fn dahl_output_stays_inside_the_band(input in input_strategy(), y0 in -0.749f64..0.749, r in 1.0f64..4.0, scale in 0.5f64..20.0) {
        let m = DuhemModel::dahl(RHO, FC, r).unwrap();
        let big = InputSignal::new(input.breakpoints().iter().map(|&(t, u)| (t, u * scale)).collect()).unwrap();
        let tr = simulate(&m, &big, y0, 1e-2).unwrap();
        prop_assert!(tr.max_abs_output() < FC);
    }

    #[test]
    fn lambda_is_constant_along_the_ride(y in -0.7f64..0.7, u in -3.0f64..3.0, frac in 0.0f64..0.95) {
        let m = dahl();
        let p = PhasePoint::new(y, u);
        let lambda = intersect_lambda(&m, p).unwrap();
        let tau = u + frac * (lambda - u);
        let y_tau = omega_dahl_closed_form(tau, y, u, RHO, FC).unwrap();
        let again = intersect_lambda(&m, PhasePoint::new(y_tau, tau)).unwrap();
        prop_assert!((again - lambda).abs() < 1e-6, "{again} vs {lambda}");
        prop_assert!((lambda - lambda_dahl_closed_form(y, u, RHO, FC).unwrap()).abs() < 1e-6);
    }

    #[test]
    fn implicit_anhysteresis_matches_the_explicit_line(xi in -5.0f64..5.0) {
        let explicit = DuhemModel::exp_example_default();
        let implicit = DuhemModel::custom(
            "exp_implicit",
            |s: f64, x: f64| (0.5 * (-1.2 * s + x)).exp() + 0.83,
            |s: f64, x: f64| (0.5 * (1.2 * s - x)).exp() + 0.83,
            Domain::Plane,
            Anhysteresis::Implicit,
        );
        let a = anhysteresis(&explicit, xi).unwrap();
        let b = anhysteresis_implicit(&implicit, xi).unwrap();
        prop_assert!((a - xi / 1.2).abs() < 1e-12);
        prop_assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        prop_assert!(implicit.odd_part(b, xi).abs() < 1e-9);
    }

    #[test]
    fn dahl_storage_ignores_the_input(y in -0.7f64..0.7, u1 in -4.0f64..4.0, u2 in -4.0f64..4.0) {
        let m = dahl();
        let h1 = storage_cw(&m, PhasePoint::new(y, u1), 1e-8).unwrap().value;
        let h2 = storage_cw(&m, PhasePoint::new(y, u2), 1e-8).unwrap().value;
        let exact = storage_dahl_closed_form(y, RHO, FC).unwrap();
        prop_assert!((h1 - h2).abs() < 1e-6);
        prop_assert!((h1 - exact).abs() < 1e-6);
    }

    #[test]
    fn storage_dominates_extracted_energy(input in input_strategy(), y0 in -0.7f64..0.7) {
        // H(p) + ∫ y·u̇ ≥ H(end) ≥ 0, so no input extracts more than H(p)
        for m in [dahl(), DuhemModel::bouc_wen(1.0, 1.0, 1.0, 3.0).unwrap()] {
            let tr = simulate(&m, &input, y0, 1e-3).unwrap();
            let h0 = storage_cw(&m, PhasePoint::new(y0, 0.0), 1e-8).unwrap().value;
            let supply = cw_supply_integral(&tr).unwrap();
            prop_assert!(h0 >= 0.0);
            prop_assert!(-supply.min() <= h0 + 1e-6, "{} > {h0}", -supply.min());
        }
    }

    #[test]
    fn traversing_curve_matches_the_exponential(y in -0.7f64..0.7, u in -2.0f64..2.0) {
        let m = dahl();
        let c = traversing_curve(&m, PhasePoint::new(y, u), u - 2.0, u + 2.0).unwrap();
        for k in 0..=20 {
            let tau = (u - 2.0 + 0.2 * k as f64).min(u + 2.0);
            let exact = omega_dahl_closed_form(tau, y, u, RHO, FC).unwrap();
            let got = c.eval(tau).unwrap();
            prop_assert!((got - exact).abs() <= 1e-6 * exact.abs().max(1e-3));
        }
    }

    #[test]
    fn exp_example_storage_is_nonnegative_and_vanishes_on_the_curve(sigma in -2.0f64..2.0, xi in -2.0f64..2.0) {
        let m = DuhemModel::exp_example_default();
        let opts = StorageOptions::default();
        let h = duhem::storage::storage_cw_with(&m, PhasePoint::new(sigma, xi), &opts).unwrap();
        prop_assert!(h.value >= -1e-9);
        let on = duhem::storage::storage_cw_with(&m, PhasePoint::new(xi / 1.2, xi), &opts).unwrap();
        prop_assert!((on.value - on.anhysteresis_integral).abs() < 1e-9);
    }
}
