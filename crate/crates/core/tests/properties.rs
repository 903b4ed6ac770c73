use proptest::prelude::*;
use tempcorr_core::diversity::{div_poly, div_poly_binomial_dd, div_poly_delta_form, div_poly_one_minus_delta};
use tempcorr_core::joint_stats::{at_least_one_success, joint_outage, joint_success, LinkModel};
use tempcorr_core::two_threshold::{psi_two, AsymmetricLink};
use tempcorr_core::Error;

proptest! {
    #[test]
    fn diversity_forms_agree(n in 1u32..12, p in 0.0f64..=1.0, delta in 0.05f64..0.95) {
        let d = div_poly(n, p, delta);
        let b = div_poly_binomial_dd(n, p, delta).to_f64();
        let one = div_poly_one_minus_delta(n, p, delta);
        let dl = div_poly_delta_form(n, p, delta);
        let tol = 1e-11 * d.max(1e-300);
        prop_assert!((d - b).abs() <= tol, "{d} vs {b}");
        prop_assert!((d - one).abs() <= tol.max(1e-13), "{d} vs {one}");
        prop_assert!((d - dl).abs() <= tol.max(1e-13), "{d} vs {dl}");
    }

    #[test]
    fn diversity_between_limits(n in 1u32..20, p in 0.0f64..=1.0, delta in 0.05f64..0.95) {
        // Between full correlation (p) and independent slots (np).
        let d = div_poly(n, p, delta);
        prop_assert!(d >= p * (1.0 - 1e-12) && d <= n as f64 * p * (1.0 + 1e-12));
        prop_assert!(div_poly(n + 1, p, delta) >= d);
    }

    #[test]
    fn slot_events_are_probabilities(n in 1u32..10, c in 0.01f64..3.0, p in 0.0f64..=1.0, delta in 0.1f64..0.9) {
        let link = LinkModel::new(c, p, delta).unwrap();
        let s = joint_success(&link, n);
        prop_assert!((0.0..=1.0).contains(&s));
        // Tiny outages may be beyond double-double; that must be reported, not returned.
        match (joint_outage(&link, n), at_least_one_success(&link, n)) {
            (Ok(o), Ok(a)) => {
                prop_assert!((0.0..=1.0).contains(&o));
                prop_assert!((a - (1.0 - o)).abs() < 1e-12);
            }
            (Err(Error::Instability(_)), _) | (_, Err(Error::Instability(_))) => {}
            other => prop_assert!(false, "{other:?}"),
        }
        // Successes are positively correlated.
        prop_assert!(s >= joint_success(&link, 1).powi(n as i32) * (1.0 - 1e-12));
    }

    #[test]
    fn psi_two_minimal_at_equal_thresholds(dh in 0.05f64..2.0, p in 0.05f64..1.0, delta in 0.1f64..0.9, nu in -2.0f64..2.0) {
        let link = AsymmetricLink::new(dh, p, delta).unwrap();
        let at = |v: f64| psi_two(&link, 1.0, v);
        prop_assert!(at(nu) >= at(0.0) - 1e-14);
        prop_assert!((at(nu) - at(-nu)).abs() < 1e-13);
    }
}
