use nnlif::delay::DelayBuffer;
use nnlif::diagnostics::{classify_signal, ClassifyOptions, OutcomeKind};
use nnlif::grid::{gaussian_initial, stationary_profile, total_mass, Grid, DEFAULT_N_CELLS, DEFAULT_V_LEFT};
use nnlif::params::{Model, ModelParameters, Population};
use nnlif::spatial::SpatialOperator;
use nnlif::steady::{f_of_ne, find_steady_states, DEFAULT_SCAN_POINTS};
use proptest::prelude::*;

fn grid() -> Grid {
    Grid::new(DEFAULT_V_LEFT, 2.0, 1.0, DEFAULT_N_CELLS).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gaussian_carries_requested_mass(v0 in -3.0..1.95f64, sigma in 0.0003..1.0f64, mass in 0.01..1.0f64) {
        let g = grid();
        let rho = gaussian_initial(&g, v0, sigma, mass).unwrap();
        prop_assert!((total_mass(&rho, &g) - mass).abs() <= 1e-12 * mass);
        prop_assert_eq!(*rho.values().last().unwrap(), 0.0);
        prop_assert!(rho.values().iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn stationary_profile_is_linear_in_rate(n in 0.001..50.0f64, v0 in -5.0..5.0f64, a in 0.2..3.0f64) {
        let g = grid();
        let one = stationary_profile(&g, 1.0, n, v0, a).unwrap();
        let two = stationary_profile(&g, 1.0, 2.0 * n, v0, a).unwrap();
        for (x, y) in one.values().iter().zip(two.values()) {
            prop_assert_eq!(2.0 * x, *y);
        }
        prop_assert_eq!(*one.values().last().unwrap(), 0.0);
    }

    #[test]
    fn discrete_mass_budget_closes(
        center in -2.0..1.5f64,
        width in 0.1..0.5f64,
        v0 in -10.0..10.0f64,
        a in 0.1..2.0f64,
        m in 0.0..5.0f64,
    ) {
        let g = grid();
        let rho = gaussian_initial(&g, center, width, 1.0).unwrap();
        let mut op = SpatialOperator::new(&g);
        let mut out = vec![0.0; g.len()];
        op.rhs(rho.values(), v0, a, m, &mut out);
        let outflow = op.threshold_outflow(rho.values(), a);
        let budget = g.integrate(&out);
        prop_assert!((budget - (m - outflow)).abs() <= 1e-9 * (1.0 + m + outflow.abs()), "{} vs {}", budget, m - outflow);
    }

    #[test]
    fn delay_is_exact_on_affine_rates(
        c0 in -5.0..5.0f64,
        c1 in -20.0..20.0f64,
        delay in 0.01..0.5f64,
        steps in proptest::collection::vec(1e-4..5e-3f64, 50..400),
    ) {
        let mut buf = DelayBuffer::new(delay, None).unwrap();
        prop_assert_eq!(buf.query(-1.0).unwrap(), 0.0);
        prop_assert_eq!(buf.lookback(0.5 * delay).unwrap(), 0.0);
        let mut t = 0.0;
        buf.record(t, c0).unwrap();
        for dt in steps {
            t += dt;
            buf.record(t, c0 + c1 * t).unwrap();
            let q = t - delay;
            let got = buf.lookback(t).unwrap();
            let want = if q <= 0.0 { 0.0 } else { c0 + c1 * q };
            prop_assert!((got - want).abs() <= 1e-9 * (1.0 + c0.abs() + c1.abs()), "t={} got {} want {}", t, got, want);
        }
    }

    #[test]
    fn classification_separates_flat_and_periodic(level in 0.1..10.0f64, period in 0.05..0.5f64, amp in 0.05..0.5f64) {
        let t: Vec<f64> = (0..4000).map(|k| k as f64 * 0.0025).collect();
        let opts = ClassifyOptions::default();
        let flat: Vec<f64> = t.iter().map(|_| level).collect();
        prop_assert_eq!(classify_signal(&t, &flat, &opts).kind, OutcomeKind::Steady);
        let wave: Vec<f64> = t.iter().map(|&x| level * (1.0 + amp * (2.0 * std::f64::consts::PI * x / period).sin())).collect();
        let c = classify_signal(&t, &wave, &opts);
        prop_assert_eq!(c.kind, OutcomeKind::Periodic);
        prop_assert!((c.period.unwrap() - period).abs() <= 0.02 * period);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn steady_states_are_consistent(
        b_ee in 0.0..4.0f64,
        b_ie in 0.0..6.0f64,
        b_ii in 0.0..3.0f64,
        b_ei in 0.0..1.0f64,
        tau_e in 0.05..0.4f64,
        tau_i in 0.05..0.4f64,
    ) {
        let p = ModelParameters { b_ee, b_ie, b_ii, b_ei, tau_e, tau_i, ..Default::default() };
        let model = Model::Two(p);
        prop_assert_eq!(f_of_ne(0.0, &model).unwrap(), 0.0);
        prop_assert!(f_of_ne(1.0 / tau_e, &model).unwrap() > 1.0);
        let g = grid();
        let states = find_steady_states(&model, &g, DEFAULT_SCAN_POINTS).unwrap();
        if !states.tangency_warning {
            prop_assert_eq!(states.solutions.len() % 2, 1);
        }
        for s in &states.solutions {
            prop_assert!(s.residual <= 1e-8, "residual {}", s.residual);
            for pop in &s.populations {
                let tau = model.tau(pop.population);
                prop_assert!(pop.rate > 0.0 && pop.rate < 1.0 / tau);
                let mass = total_mass(&pop.profile, &g);
                prop_assert!((mass - (1.0 - tau * pop.rate)).abs() <= 5e-4, "{:?} mass {} vs {}", pop.population, mass, 1.0 - tau * pop.rate);
            }
            prop_assert!(s.population(Population::Inhibitory).is_some());
        }
    }
}
