mod common;

use approx::assert_relative_eq;
use proptest::prelude::*;
use qstab::marginals::{fit_moments, hellinger_1d};
use qstab::{Family, MarginalDistribution};

use common::{oracle_cdf, oracle_hellinger, Kernel};

fn law(k: Kernel) -> MarginalDistribution {
    match k {
        Kernel::Beta(a, b) => MarginalDistribution::beta(a, b).unwrap(),
        Kernel::Gamma(s, t) => MarginalDistribution::gamma(s, t).unwrap(),
    }
}

#[test]
fn beta_cdf_at_known_point() {
    // P(Beta(2, 5) <= 0.2) = P(Bin(6, 0.2) >= 2)
    let exact = 1.0 - 0.8f64.powi(6) - 6.0 * 0.2 * 0.8f64.powi(5);
    let d = law(Kernel::Beta(2.0, 5.0));
    assert_relative_eq!(d.cdf(0.2), exact, epsilon = 1e-12);
    assert_relative_eq!(oracle_cdf(Kernel::Beta(2.0, 5.0), 0.2), exact, epsilon = 1e-10);
}

#[test]
fn gamma_cdf_against_quadrature() {
    for &(k, t, x) in &[(3.0, 2.0, 4.5), (11.0, 9.0, 120.0), (2.5, 0.1, 0.05), (40.0, 3.0, 100.0)] {
        let d = law(Kernel::Gamma(k, t));
        assert_relative_eq!(d.cdf(x), oracle_cdf(Kernel::Gamma(k, t), x), epsilon = 1e-9);
    }
}

#[test]
fn beta_hellinger_against_quadrature() {
    let a = Kernel::Beta(2.0, 5.0);
    let b = Kernel::Beta(3.0, 5.0);
    let oracle = oracle_hellinger(a, b);
    let h = hellinger_1d(&law(a), &law(b)).unwrap();
    assert_relative_eq!(h, oracle, epsilon = 1e-9);
    assert!((h - 0.2076).abs() < 5e-4, "{h}");
}

#[test]
fn identical_laws_have_zero_distance() {
    for k in [Kernel::Beta(1300.0, 15.8), Kernel::Gamma(19.4, 5.7), Kernel::Beta(0.5, 0.5)] {
        assert_eq!(hellinger_1d(&law(k), &law(k)).unwrap(), 0.0);
    }
}

#[test]
fn far_apart_laws_approach_one() {
    let a = law(Kernel::Beta(2000.0, 2.0));
    let b = law(Kernel::Beta(2.0, 2000.0));
    let h = hellinger_1d(&a, &b).unwrap();
    assert!(h > 1.0 - 1e-12 && h <= 1.0, "{h}");
}

#[test]
fn mixed_families_are_rejected() {
    let a = law(Kernel::Beta(2.0, 2.0));
    let b = law(Kernel::Gamma(2.0, 0.2));
    assert!(hellinger_1d(&a, &b).is_err());
}

#[test]
fn fit_recovers_simple_moments() {
    let xs = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8];
    let d = fit_moments(&xs, Family::Beta).unwrap();
    let mean = 0.45;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / 7.0;
    assert_relative_eq!(d.mean(), mean, epsilon = 1e-14);
    assert_relative_eq!(d.variance(), var, epsilon = 1e-14);
    assert!(fit_moments(&xs[..7], Family::Beta).is_err());
    assert!(fit_moments(&[0.5; 10], Family::Beta).is_err());
    assert!(fit_moments(&[1.5; 10], Family::Beta).is_err());
    assert!(fit_moments(&[-1.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0], Family::Gamma).is_err());
}

#[test]
fn infeasible_beta_moments_fail() {
    // variance >= mean (1 - mean) has no Beta law
    assert!(MarginalDistribution::from_moments(Family::Beta, 0.5, 0.25).is_err());
    assert!(MarginalDistribution::from_moments(Family::Gamma, -1.0, 0.25).is_err());
    assert!(MarginalDistribution::beta(0.0, 1.0).is_err());
    assert!(MarginalDistribution::gamma(1.0, f64::NAN).is_err());
}

#[test]
fn quantile_rejects_bad_levels() {
    let d = law(Kernel::Gamma(3.0, 1.0));
    assert!(d.quantile(-0.1).is_err());
    assert!(d.quantile(1.1).is_err());
    assert!(d.quantile(f64::NAN).is_err());
}

#[test]
fn single_precision_agrees_with_double() {
    let a32 = qstab::MarginalDistribution32::beta(2.0, 5.0).unwrap();
    let b32 = qstab::MarginalDistribution32::beta(3.0, 5.0).unwrap();
    let h32 = hellinger_1d(&a32, &b32).unwrap();
    let h64 = hellinger_1d(&law(Kernel::Beta(2.0, 5.0)), &law(Kernel::Beta(3.0, 5.0))).unwrap();
    assert!((h32 as f64 - h64).abs() < 1e-4);
}

fn kernel_pair() -> impl Strategy<Value = (Kernel, Kernel)> {
    prop_oneof![
        (1.5..40.0f64, 1.5..40.0f64, 1.5..40.0f64, 1.5..40.0f64)
            .prop_map(|(a, b, c, d)| (Kernel::Beta(a, b), Kernel::Beta(c, d))),
        (1.5..40.0f64, 0.1..10.0f64, 1.5..40.0f64, 0.1..10.0f64)
            .prop_map(|(a, b, c, d)| (Kernel::Gamma(a, b), Kernel::Gamma(c, d))),
    ]
}

fn any_law() -> impl Strategy<Value = MarginalDistribution> {
    prop_oneof![
        (0.3..3000.0f64, 0.3..3000.0f64).prop_map(|(a, b)| law(Kernel::Beta(a, b))),
        (0.3..5000.0f64, 1e-3..100.0f64).prop_map(|(k, t)| law(Kernel::Gamma(k, t))),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn closed_form_hellinger_matches_quadrature((k1, k2) in kernel_pair()) {
        let h = hellinger_1d(&law(k1), &law(k2)).unwrap();
        let oracle = oracle_hellinger(k1, k2);
        prop_assert!((h - oracle).abs() < 1e-6, "{h} vs {oracle} for {k1:?} {k2:?}");
    }

    #[test]
    fn hellinger_is_symmetric_and_bounded((k1, k2) in kernel_pair()) {
        let (a, b) = (law(k1), law(k2));
        let ab = hellinger_1d(&a, &b).unwrap();
        let ba = hellinger_1d(&b, &a).unwrap();
        prop_assert!((ab - ba).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&ab));
    }

    #[test]
    fn quantile_inverts_cdf(d in any_law(), u in 1e-6..(1.0 - 1e-6)) {
        let x = d.quantile(u).unwrap();
        prop_assert!(d.in_support(x));
        prop_assert!((d.cdf(x) - u).abs() < 1e-9 * u.max(1e-3), "u = {u}, cdf = {}", d.cdf(x));
    }

    #[test]
    fn moments_round_trip(d in any_law()) {
        let back = MarginalDistribution::from_moments(d.family(), d.mean(), d.variance()).unwrap();
        let ((p0, p1), (q0, q1)) = (d.params(), back.params());
        prop_assert!((p0 - q0).abs() <= 1e-8 * p0);
        prop_assert!((p1 - q1).abs() <= 1e-8 * p1);
    }

    #[test]
    fn cdf_is_monotone(d in any_law(), u in 0.01..0.98f64, gap in 1e-3..0.01f64) {
        let (x1, x2) = (d.quantile(u).unwrap(), d.quantile(u + gap).unwrap());
        prop_assert!(x1 <= x2);
        prop_assert!(d.cdf(x1) <= d.cdf(x2));
    }
}
