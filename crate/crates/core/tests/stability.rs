use approx::assert_relative_eq;
use proptest::prelude::*;
use qstab::presets::{january_2022_like, SigmaPreset};
use qstab::qsim::build_bv_circuit;
use qstab::stability::{
    hellinger_max, mean_observable, month_label, perturb_model, run_experiment, stability_bound, stability_metric,
    PerturbSettings,
};
use qstab::{ChannelConfig, CopulaModel, CorrelationMatrix, Error, ExperimentConfig, MarginalDistribution, Secret};

fn small_model() -> CopulaModel {
    let sigma = CorrelationMatrix::from_rows(vec![vec![1.0, 0.5], vec![0.5, 1.0]]).unwrap();
    let margs = vec![MarginalDistribution::beta(1300.0, 15.8).unwrap(), MarginalDistribution::gamma(19.0, 5.0).unwrap()];
    CopulaModel::new(margs, sigma, "2022-01").unwrap()
}

#[test]
fn tolerance_to_distance_examples() {
    let h = hellinger_max(0.2f64, 1.0).unwrap();
    assert!((h - 0.0709).abs() < 5e-4);
    // the bound at H_max gives back s_tol
    assert_relative_eq!(stability_bound(h, 1.0f64), 0.2, epsilon = 1e-14);
    assert!(hellinger_max(0.2f64, 2.0).unwrap() < h);
    assert!(hellinger_max(0.3f64, 1.0).unwrap() > h);
    assert!(matches!(hellinger_max(2.5f64, 1.0), Err(Error::Domain(_))));
}

#[test]
fn stability_is_absolute_difference() {
    assert_eq!(stability_metric(0.7f64, 0.7), 0.0);
    assert_relative_eq!(stability_metric(0.71f64, 0.7), 0.01, epsilon = 1e-15);
    assert_relative_eq!(stability_metric(0.69f64, 0.7), 0.01, epsilon = 1e-15);
}

#[test]
fn month_labels_roll_over_years() {
    assert_eq!(month_label("2022-01", 1), "2022-02");
    assert_eq!(month_label("2022-01", 12), "2023-01");
    assert_eq!(month_label("2022-11", 15), "2024-02");
    assert_eq!(month_label("baseline", 2), "baseline+2");
}

#[test]
fn zero_step_leaves_model_unchanged() {
    let m = small_model();
    let settings = PerturbSettings { metric: 0, step: 0.0f64, h_cap: 0.0709, hellinger_samples: 10_000 };
    let p = perturb_model(&m, &settings, 1).unwrap();
    assert_eq!(p.model.marginals(), m.marginals());
    assert_eq!(p.hellinger.estimate, 0.0);
    assert_eq!(p.attempts, 0);
}

#[test]
fn small_step_is_accepted_below_cap() {
    let m = small_model();
    let settings = PerturbSettings { metric: 0, step: 0.05, h_cap: 0.0709, hellinger_samples: 10_000 };
    let p = perturb_model(&m, &settings, 3).unwrap();
    assert!(p.hellinger.estimate + p.hellinger.stderr <= 0.0709);
    assert_ne!(p.model.marginals()[0], m.marginals()[0]);
    assert_eq!(p.model.marginals()[1], m.marginals()[1]);
    assert_eq!(p.model.sigma(), m.sigma());
    // same seed, same outcome
    let again = perturb_model(&m, &settings, 3).unwrap();
    assert_eq!(again.model.marginals(), p.model.marginals());
}

#[test]
fn impossible_cap_exhausts_attempts() {
    let m = small_model();
    let settings = PerturbSettings { metric: 1, step: 0.9, h_cap: 1e-6, hellinger_samples: 10_000 };
    assert!(matches!(perturb_model(&m, &settings, 3), Err(Error::PerturbationExhausted { attempts: 100 })));
    let bad = PerturbSettings { metric: 7, step: 0.1, h_cap: 0.07, hellinger_samples: 10_000 };
    assert!(perturb_model(&m, &bad, 3).is_err());
}

#[test]
fn mean_observable_single_and_many_samples() {
    let model = january_2022_like::<f64>(SigmaPreset::WashingtonLike);
    let circuit = build_bv_circuit(&"0011".parse::<Secret>().unwrap());
    let cfg = ChannelConfig::default();
    let one = mean_observable(&model, &circuit, &cfg, 1, 0, 5).unwrap();
    assert_eq!(one.stderr, 0.0);
    assert_eq!(one.mean, one.max_abs);
    assert!(one.mean > 0.5 && one.mean < 1.0);
    let many = mean_observable(&model, &circuit, &cfg, 200, 0, 5).unwrap();
    assert_eq!(many, mean_observable(&model, &circuit, &cfg, 200, 0, 5).unwrap());
    assert!(many.stderr > 0.0 && many.stderr < 0.01);
    let shots = mean_observable(&model, &circuit, &cfg, 200, 8192, 5).unwrap();
    assert!((shots.mean - many.mean).abs() < 0.01, "{} vs {}", shots.mean, many.mean);
    assert!(mean_observable(&model, &circuit, &cfg, 0, 0, 5).is_err());
}

fn quick_config() -> ExperimentConfig {
    ExperimentConfig {
        hellinger_samples: 10_000,
        circuit_samples: 30,
        shots: 0,
        months: 3,
        seed: 9,
        ..ExperimentConfig::default()
    }
}

#[test]
fn experiment_report_is_consistent() {
    let model = january_2022_like::<f64>(SigmaPreset::WashingtonLike);
    let cfg = quick_config();
    let report = run_experiment(&cfg, &model).unwrap();
    assert_eq!(report.schema_version, 1);
    assert_eq!(report.baseline.label, "2022-01");
    let labels: Vec<&str> = report.epochs.iter().map(|e| e.label.as_str()).collect();
    assert_eq!(labels, ["2022-02", "2022-03", "2022-04"]);
    for e in &report.epochs {
        assert!(e.hellinger <= report.summary.hellinger_max);
        assert_relative_eq!(e.stability, (e.mean_obs - report.baseline.mean_obs).abs(), epsilon = 1e-15);
        assert_relative_eq!(e.bound, stability_bound(e.hellinger, 1.0), epsilon = 1e-15);
        assert_eq!(e.satisfied, e.stability <= cfg.s_tol);
        assert!(e.bound_slack(report.baseline.mean_obs_stderr, 1.0) >= 0.0);
    }
    assert_eq!(report.summary.epochs, 3);
    assert!(report.summary.max_observable <= 1.0);
    assert_eq!(report, run_experiment(&cfg, &model).unwrap());
    let json = serde_json::to_string(&report).unwrap();
    let back: qstab::StabilityReport = serde_json::from_str(&json).unwrap();
    assert_eq!(back, report);
}

#[test]
fn experiment_rejects_bad_config() {
    let model = january_2022_like::<f64>(SigmaPreset::Identity);
    let cfg = ExperimentConfig { s_tol: -0.1, ..quick_config() };
    assert!(run_experiment(&cfg, &model).is_err());
    let cfg = ExperimentConfig { circuit_samples: 0, ..quick_config() };
    assert!(run_experiment(&cfg, &model).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn bound_and_inverse_round_trip(h in 0.0..0.999f64, c in 0.1..10.0f64) {
        let s = stability_bound(h, c);
        let back = hellinger_max(s, c).unwrap();
        prop_assert!((back - h).abs() < 1e-12, "{h} -> {s} -> {back}");
    }

    #[test]
    fn hellinger_max_is_monotone(s1 in 0.0..1.0f64, ds in 0.0..0.5f64, c in 0.75..2.0f64) {
        let a = hellinger_max(s1, c).unwrap();
        let b = hellinger_max(s1 + ds, c).unwrap();
        prop_assert!(a <= b);
        prop_assert!((0.0..=1.0).contains(&a));
    }
}
