use std::collections::BTreeMap;
use std::f64::consts::PI;

use levinson2d_core::analysis::{centrifugal_phase_exact, cross_sections, predicted_jump, PartialWaves};
use levinson2d_core::potential::{centrifugal_model, make_partial, RadialPotential, Side, Tabulated, Term};
use levinson2d_core::solver::{bound_state, count_bound_states, scattering_phase, PhaseOptions};
use proptest::prelude::*;

const INDICES: &[f64] = &[0.0, 0.5, 1.0, 1.7, 2.0, 3.0];

fn mod_pi(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(PI);
    d.min(PI - d)
}

fn well(depth: f64) -> RadialPotential {
    RadialPotential::new(vec![Term::Well { depth, radius: 1.0 }], 1.0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sum_rule_for_any_phases(k in 0.05f64..30.0, raw in prop::collection::vec(-3.0f64..3.0, 1..12)) {
        let mut deltas = BTreeMap::new();
        for (m, d) in raw.iter().enumerate() {
            deltas.insert(m as i32, *d);
            deltas.insert(-(m as i32), *d + 0.1 * m as f64);
        }
        let s = cross_sections(&PartialWaves::new(k, deltas).unwrap(), None).unwrap();
        prop_assert!(s.sum_rule_residual() < 1e-12, "residual {}", s.sum_rule_residual());
    }

    #[test]
    fn solver_matches_centrifugal_oracle(
        i in 0..INDICES.len(),
        j in 0..INDICES.len(),
        m in -2i32..=2,
        log_kr in (0.1f64).ln()..(50.0f64).ln(),
    ) {
        let (nu, mu) = (INDICES[i], INDICES[j]);
        let x = log_kr.exp();
        let u = centrifugal_model(nu, mu, m, 1.0).unwrap();
        let got = scattering_phase(&u, x, &PhaseOptions::default()).unwrap().delta;
        let want = centrifugal_phase_exact(nu, mu, m, x).unwrap();
        prop_assert!(mod_pi(got, want) <= 1e-6, "({nu}, {mu}, {m}, {x}): {got} vs {want}");
    }

    #[test]
    fn sign_of_m_is_irrelevant(depth in 0.0f64..40.0, m in 1i32..4, k in 0.2f64..10.0) {
        let opts = PhaseOptions::default();
        let a = scattering_phase(&make_partial(well(depth), m).unwrap(), k, &opts).unwrap();
        let b = scattering_phase(&make_partial(well(depth), -m).unwrap(), k, &opts).unwrap();
        prop_assert_eq!(a.delta, b.delta);
    }

    #[test]
    fn bound_states_have_index_many_nodes(depth in 5.0f64..120.0, m in 0i32..3) {
        let u = make_partial(well(depth), m).unwrap();
        let n = count_bound_states(&u).unwrap().count();
        for index in 0..n {
            prop_assert_eq!(bound_state(&u, index).unwrap().node_count(), index);
        }
    }

    #[test]
    fn piecewise_constant_table_reproduces_centrifugal_model(
        i in 0..INDICES.len(),
        j in 0..INDICES.len(),
        m in -2i32..=2,
        x in 0.2f64..20.0,
    ) {
        let (nu, mu) = (INDICES[i], INDICES[j]);
        let abs_m = f64::from(m.abs());
        let (b0, binf) = (nu * nu - abs_m * abs_m, mu * mu - abs_m * abs_m);
        let rho = [0.01, 0.5, 1.0, 1.0, 2.0, 4.0];
        let y = [b0, b0, b0, binf, binf, binf];
        let table = Tabulated::from_rho2v(&rho, &y).unwrap().with_tail(binf);
        let u = make_partial(RadialPotential::new(vec![Term::Tabulated(table)], 1.0).unwrap(), m).unwrap();
        let got = scattering_phase(&u, x, &PhaseOptions::default()).unwrap().delta;
        prop_assert!(mod_pi(got, centrifugal_phase_exact(nu, mu, m, x).unwrap()) <= 1e-6);
    }

    #[test]
    fn each_bound_state_adds_pi(n in 0usize..20, nu in 0.0f64..5.0, mu in 0.0f64..5.0) {
        prop_assert!((predicted_jump(n + 1, nu, mu) - predicted_jump(n, nu, mu) - PI).abs() < 1e-12);
    }
}

#[test]
fn dense_table_of_a_smooth_core_tracks_the_analytic_term() {
    let analytic = RadialPotential::new(vec![Term::ScreenedCore { beta: 2.0, length: 0.7 }], 1.0).unwrap();
    let rho: Vec<f64> = (0..=600).map(|i| 1e-3 * (4e4f64).powf(i as f64 / 600.0)).collect();
    let y: Vec<f64> = rho.iter().map(|&r| analytic.rho2v(r, Side::Left)).collect();
    let table = Tabulated::from_rho2v(&rho, &y).unwrap().with_tail(0.0);
    let sampled = RadialPotential::new(vec![Term::Tabulated(table)], 1.0).unwrap();
    for m in [0, 1, 2] {
        for k in [0.3, 2.0, 8.0] {
            let a = scattering_phase(&make_partial(analytic.clone(), m).unwrap(), k, &PhaseOptions::default()).unwrap();
            let b = scattering_phase(&make_partial(sampled.clone(), m).unwrap(), k, &PhaseOptions::default()).unwrap();
            assert!(mod_pi(a.delta, b.delta) < 1e-6, "m={m} k={k}: {} vs {}", a.delta, b.delta);
        }
    }
}
