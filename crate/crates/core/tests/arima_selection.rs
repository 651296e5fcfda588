use mortcast_core::arima::poly::min_root_modulus;
use mortcast_core::arima::{auto_select, fit_arima, kpss_test, ArimaFit, ArimaSpec, ROOT_MARGIN};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::Deserialize;

#[derive(Deserialize)]
struct KpssCase {
    kind: String,
    seed: u64,
    lags: usize,
    statistic: f64,
    reject: bool,
    series: Vec<f64>,
}

#[derive(Deserialize)]
struct KpssFixture {
    cases: Vec<KpssCase>,
}

fn rw_drift(seed: u64, n: usize, drift: f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 1.0).unwrap();
    let mut level = 0.0;
    (0..n)
        .map(|_| {
            level += drift + noise.sample(&mut rng);
            level
        })
        .collect()
}

fn assert_admissible(fit: &ArimaFit) {
    let ar: Vec<f64> = fit.ar.iter().map(|c| -c).collect();
    assert!(min_root_modulus(&ar) >= 1.0 + ROOT_MARGIN, "{fit:?}");
    assert!(min_root_modulus(&fit.ma) >= 1.0 + ROOT_MARGIN, "{fit:?}");
    let k = (fit.spec.p + fit.spec.q + usize::from(fit.spec.with_drift) + 1) as f64;
    assert!((fit.aic - (-2.0 * fit.loglik + 2.0 * k)).abs() < 1e-9);
}

#[test]
fn kpss_matches_reference_implementation() {
    let fixture: KpssFixture = serde_json::from_str(include_str!("fixtures/kpss_reference.json")).unwrap();
    assert_eq!(fixture.cases.len(), 10);
    for case in &fixture.cases {
        let r = kpss_test(&case.series).unwrap();
        assert_eq!(r.lags, case.lags);
        assert_eq!(r.reject_stationarity, case.reject, "{} seed {}", case.kind, case.seed);
        assert!(
            (r.statistic - case.statistic).abs() <= 1e-9 * case.statistic,
            "{} seed {}: {} vs {}",
            case.kind,
            case.seed,
            r.statistic,
            case.statistic
        );
    }
}

#[test]
fn random_walks_with_drift_are_differenced_once() {
    let hits = (0..20u64)
        .filter(|&seed| auto_select(&rw_drift(seed, 200, 0.3)).unwrap().spec.d == 1)
        .count();
    assert!(hits >= 18, "d=1 chosen in {hits} of 20 runs");
}

#[test]
fn trend_with_tiny_noise_is_differenced() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let noise = Normal::new(0.0, 1e-3).unwrap();
    let k: Vec<f64> = (0..60).map(|t| 5.0 - 0.8 * t as f64 + noise.sample(&mut rng)).collect();
    assert!(auto_select(&k).unwrap().spec.d >= 1);
}

#[test]
fn selected_fits_are_stationary_and_invertible() {
    for seed in 0..8u64 {
        let fit = auto_select(&rw_drift(100 + seed, 80, -1.0)).unwrap();
        assert_admissible(&fit);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let noise = Normal::new(0.0, 1.0).unwrap();
    let mut prev = 0.0;
    let ar1: Vec<f64> = (0..150)
        .map(|_| {
            prev = 0.6 * prev + noise.sample(&mut rng);
            prev
        })
        .collect();
    assert_admissible(&auto_select(&ar1).unwrap());
}

#[test]
fn differenced_likelihood_ignores_level_shifts() {
    let k = rw_drift(9, 120, 0.5);
    let shifted: Vec<f64> = k.iter().map(|v| v + 1234.5).collect();
    for spec in [
        ArimaSpec::new(0, 1, 0, true),
        ArimaSpec::new(1, 1, 0, true),
        ArimaSpec::new(0, 1, 1, false),
        ArimaSpec::new(1, 2, 1, false),
    ] {
        let a = fit_arima(&k, spec).unwrap();
        let b = fit_arima(&shifted, spec).unwrap();
        assert!((a.aic - b.aic).abs() < 1e-9 * a.aic.abs().max(1.0), "{spec}: {} vs {}", a.aic, b.aic);
    }
}

#[test]
fn drift_forecast_steps_equal_the_drift() {
    let k = rw_drift(3, 50, -0.7);
    let fit = fit_arima(&k, ArimaSpec::rw_drift()).unwrap();
    let f = mortcast_core::arima::forecast(&fit, &k, 12);
    let mut prev = *k.last().unwrap();
    for v in f {
        assert!((v - prev - fit.drift).abs() < 1e-12);
        prev = v;
    }
}
