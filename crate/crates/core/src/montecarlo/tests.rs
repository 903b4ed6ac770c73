use super::*;
use crate::joint_stats::{correlation_coefficient, joint_success, joint_success_bounded, LinkModel};
use crate::local_delay::{delay_tail_fixed, delay_tail_independent};
use crate::two_threshold::{joint_success_two, AsymmetricLink, TwoThresholdSpec};

fn params(big_delta: f64, p: f64, delta: f64) -> NetworkParams {
    NetworkParams::new(1.0, 1.0, 1.0, delta, p)
        .unwrap()
        .with_contention(big_delta)
        .unwrap()
}

fn assert_z(est: &SimEstimate, target: f64, what: &str) {
    let z = est.z_score(target);
    assert!(z.abs() <= 3.0, "{what}: {} vs {target}, z = {z}", est.mean);
}

#[test]
fn empty_field_always_succeeds() {
    let cfg = SimConfig::new(params(0.5, 0.5, 0.5).with_lambda(0.0), 3, 200, 1);
    let e = run(&cfg).unwrap();
    assert_eq!(e.mean, 1.0);
    assert_eq!(e.std_error, 0.0);
}

#[test]
fn two_slot_joint_success() {
    let cfg = SimConfig::new(params(0.5, 0.5, 0.5), 2, 100_000, 11);
    assert_z(&run(&cfg).unwrap(), (-0.4375f64).exp(), "p_s^(2)");
}

#[test]
fn curve_matches_closed_form_and_single_runs() {
    let p = params(0.5, 0.2, 0.5);
    let link = LinkModel::from_params(&p).unwrap();
    let cfg = SimConfig::new(p, 4, 50_000, 5);
    let curve = joint_success_curve(&cfg).unwrap();
    for (j, e) in curve.iter().enumerate() {
        assert_z(e, joint_success(&link, j as u32 + 1), "curve");
    }
    // The curve's last point and a direct run see the same realizations.
    assert_eq!(run(&cfg).unwrap().mean, curve[3].mean);
}

#[test]
fn near_hard_core_surrogate() {
    // α = 50, p = 1: a success is almost surely followed by another.
    let p = NetworkParams::from_alpha(1.0, 1.0, 1.0, 50.0, 1.0)
        .unwrap()
        .with_contention(0.5)
        .unwrap();
    let curve = joint_success_curve(&SimConfig::new(p, 2, 50_000, 3)).unwrap();
    let cond = curve[1].mean / curve[0].mean;
    assert!(cond > 0.97, "{cond}");
    let link = LinkModel::from_params(&p).unwrap();
    assert_z(&curve[1], joint_success(&link, 2), "p_s^(2) at α = 50");
}

#[test]
fn determinism_across_thread_counts() {
    let cfg = SimConfig::new(params(0.5, 0.5, 0.5), 3, 5_000, 99);
    let one = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| run(&cfg).unwrap());
    let four = rayon::ThreadPoolBuilder::new()
        .num_threads(4)
        .build()
        .unwrap()
        .install(|| run(&cfg).unwrap());
    assert_eq!(one, four);
    assert_eq!(one, run(&cfg).unwrap());
    assert_ne!(one, run(&cfg.with_seed(100)).unwrap());
}

#[test]
fn independent_toggle() {
    let p = params(0.5, 0.5, 0.5);
    let cfg = SimConfig::new(p, 2, 100_000, 21);
    let ind = run(&independent_interference_toggle(cfg)).unwrap();
    assert_z(&ind, (-2.0 * 0.25f64).exp(), "independent p_s^(2)");
    let dep = run(&cfg).unwrap();
    // The gap is the factor e^{Δ(1−δ)p²}.
    let ratio = dep.mean / ind.mean;
    let se = ratio * ((dep.std_error / dep.mean).powi(2) + (ind.std_error / ind.mean).powi(2)).sqrt();
    let target = (0.5f64 * 0.5 * 0.25).exp();
    assert!((ratio - target).abs() < 3.0 * se, "{ratio} vs {target} ± {se}");
    let silent = SimConfig::new(p.with_p(0.0), 2, 500, 1);
    assert_eq!(run(&silent).unwrap().mean, 1.0);
    assert_eq!(run(&independent_interference_toggle(silent)).unwrap().mean, 1.0);
}

#[test]
fn doubling_the_window_changes_little() {
    let cfg = SimConfig::new(params(0.5, 0.5, 0.5), 2, 20_000, 8);
    let w = cfg.window_for(1.0);
    let a = run(&cfg.with_window(w)).unwrap();
    let b = run(&cfg.with_window(2.0 * w)).unwrap();
    assert!((a.mean - b.mean).abs() < a.std_error, "{} vs {}", a.mean, b.mean);
    assert!(window_bias(&cfg, 1.0) <= 1e-3 * (1.0 + 1e-12));
}

#[test]
fn interference_tail_is_stable_with_exponent_delta() {
    let delta = 0.5;
    let cfg = SimConfig::new(NetworkParams::new(1.0, 1.0, 1.0, delta, 1.0).unwrap(), 1, 40_000, 4);
    let mut xs = interference_samples(&cfg).unwrap();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len() as f64;
    // Levels where the tail probability is 5% and 0.5%.
    let t1 = xs[(0.95 * n) as usize];
    let t2 = xs[(0.995 * n) as usize];
    let slope = (0.005f64 / 0.05).ln() / (t2 / t1).ln();
    assert!((slope + delta).abs() < 0.1, "{slope}");
}

#[test]
fn correlation_estimator() {
    let p = params(1.0, 0.8, 0.5);
    let cfg = SimConfig::new(p, 2, 100_000, 17).with_estimator(Estimator::Correlation);
    let link = LinkModel::from_params(&p).unwrap();
    assert_z(&run(&cfg).unwrap(), correlation_coefficient(&link), "correlation");
}

#[test]
fn local_delay_fixed_tail() {
    let p = params(0.5, 0.5, 0.5);
    let cfg = SimConfig::new(p, 10, 100_000, 2).with_estimator(Estimator::LocalDelay { max_slots: 10 });
    let tail = local_delay_samples(&cfg).unwrap();
    assert_eq!(tail.survival[0].mean, 1.0);
    for n in 1..=10u32 {
        assert_z(&tail.survival[n as usize], delay_tail_fixed(&p, n).unwrap(), "P(M > n)");
    }
}

#[test]
fn local_delay_rayleigh_independent_tail() {
    // Δ″p = 1/2 with λ = μ = 1/π, θ = 1, δ = 1/2.
    let lambda = 1.0 / std::f64::consts::PI;
    let base = NetworkParams::new(lambda, 1.0, 1.0, 0.5, 1.0 / std::f64::consts::PI).unwrap();
    let model = crate::DelayModel::rayleigh(base, lambda).unwrap();
    let beta = model.delta_prime_ratio().unwrap() * base.p;
    assert!((beta - 0.5).abs() < 1e-14);
    let cfg = SimConfig::new(base, 32, 20_000, 6)
        .with_distance(model.distance)
        .with_estimator(Estimator::LocalDelay { max_slots: 32 });
    let tail = local_delay_samples(&independent_interference_toggle(cfg)).unwrap();
    for n in [1usize, 2, 4, 8, 16, 32] {
        assert_z(&tail.survival[n], delay_tail_independent(beta, n as u32).unwrap(), "independent P(M > n)");
    }
    let slope = (tail.survival[32].mean / tail.survival[8].mean).ln() / 4f64.ln();
    assert!((slope + 1.0 / beta).abs() < 0.4, "{slope}");
}

#[test]
fn bounded_path_gain() {
    let pi = std::f64::consts::PI;
    let p = NetworkParams::new(1.0 / (pi * pi), 1.0, 1.0, 0.5, 0.5).unwrap();
    let cfg = SimConfig::new(p, 2, 50_000, 13).with_path_loss(PathLoss::Bounded);
    assert_z(&run(&cfg).unwrap(), joint_success_bounded(&p, 2).unwrap(), "bounded p_s^(2)");
}

#[test]
fn two_threshold_success_and_cdf() {
    let p = params(0.5, 1.0 / 3.0, 0.4);
    let link = AsymmetricLink::from_params(&p).unwrap();
    let spec = TwoThresholdSpec::new(2.0, 0.5).unwrap();
    let grid = [(2.0, 0.5), (1.0, 1.0), (0.5, 3.0)];
    let cfg = SimConfig::new(p, 2, 50_000, 31);
    let succ = joint_grid(&cfg, &grid, GridEvent::Success).unwrap();
    for (e, &(a, b)) in succ.iter().zip(&grid) {
        assert_z(e, joint_success_two(&link, &TwoThresholdSpec::new(a, b).unwrap()), "P2");
    }
    let direct = run(&cfg.with_estimator(Estimator::JointSuccessTwo {
        theta1: spec.theta1,
        theta2: spec.theta2,
    }))
    .unwrap();
    assert_z(&direct, joint_success_two(&link, &spec), "P2 direct");
    let cdf = joint_grid(&cfg, &grid, GridEvent::Cdf).unwrap();
    for (e, &(a, b)) in cdf.iter().zip(&grid) {
        let s = TwoThresholdSpec::new(a, b).unwrap();
        assert_z(e, crate::two_threshold::joint_sir_cdf(&link, &s), "joint cdf");
    }
}

#[test]
fn z_scores_look_standard_normal() {
    let p = params(0.5, 0.5, 0.5);
    let target = (-0.25f64).exp();
    let zs: Vec<f64> = (0..50)
        .map(|s| run(&SimConfig::new(p, 1, 2_000, 1000 + s)).unwrap().z_score(target))
        .collect();
    let mean = zs.iter().sum::<f64>() / 50.0;
    let wild = zs.iter().filter(|z| z.abs() > 3.0).count();
    assert!(mean.abs() < 0.5, "{mean}");
    assert!(wild <= 1, "{wild}");
}

#[test]
fn raw_records_are_consistent() {
    let cfg = SimConfig::new(params(0.5, 0.5, 0.5), 4, 300, 5);
    let recs = raw_records(&cfg).unwrap();
    assert_eq!(recs.len(), 300);
    for (i, r) in recs.iter().enumerate() {
        assert_eq!(r.realization_id, i as u64);
        assert_eq!(r.success_bits.len(), 4);
        assert_eq!(r.delay, r.success_bits.find('1').map(|k| k as u32 + 1));
    }
    let all = recs.iter().filter(|r| r.success_bits == "1111").count() as f64 / 300.0;
    assert!((all - run(&cfg).unwrap().mean).abs() < 1e-12);
}

#[test]
fn configuration_errors() {
    let p = params(0.5, 0.5, 0.5);
    assert!(run(&SimConfig::new(p, 2, 99, 1)).is_err());
    assert!(run(&SimConfig::new(p, 0, 1000, 1)).is_err());
    let mut bad = SimConfig::new(p, 2, 1000, 1).with_estimator(Estimator::Correlation);
    bad.n_slots = 3;
    assert!(run(&bad).is_err());
    assert!(local_delay_samples(&SimConfig::new(p, 2, 1000, 1)).is_err());
    assert!(run(&SimConfig::new(p, 2, 1000, 1).with_window(1e6)).is_err());
}
