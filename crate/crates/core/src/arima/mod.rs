//! ARIMA models for the mortality index: random walk with drift, general
//! ARIMA(p,d,q) by conditional sum of squares, KPSS testing and stepwise
//! AIC order selection.
//!
//! The model for the `d`-times differenced series `w` is
//! `(w[t] - mu) = sum_j ar[j] (w[t-j] - mu) + e[t] + sum_j ma[j] e[t-j]`
//! with `mu` the drift (zero when the spec has no drift).

mod auto;
mod kpss;
pub mod optim;
pub mod poly;

pub use auto::{auto_select, select_differencing};
pub use kpss::{kpss_test, KpssResult, KPSS_CRITICAL_5PCT};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use optim::NelderMead;

pub const MAX_P: usize = 5;
pub const MAX_Q: usize = 5;
pub const MAX_D: usize = 2;

/// Floor applied to the innovation variance of a perfect fit.
pub const SIGMA2_FLOOR: f64 = 1e-300;

/// Every AR and MA root must lie at least this far outside the unit circle.
pub const ROOT_MARGIN: f64 = 1e-3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ArimaError {
    #[error("insufficient data: {needed} observations needed, {got} available")]
    InsufficientData { needed: usize, got: usize },
    #[error("order ({p},{d},{q}) outside the search bounds")]
    BadOrder { p: usize, d: usize, q: usize },
    #[error("ARIMA{spec} did not converge: {reason}")]
    NonConvergence { spec: ArimaSpec, reason: String },
    #[error("no candidate model could be fitted; attempts: {}", .attempts.join("; "))]
    SelectionFailed { attempts: Vec<String> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ArimaSpec {
    pub p: usize,
    pub d: usize,
    pub q: usize,
    pub with_drift: bool,
}

impl ArimaSpec {
    pub fn new(p: usize, d: usize, q: usize, with_drift: bool) -> Self {
        Self { p, d, q, with_drift }
    }

    pub fn rw_drift() -> Self {
        Self::new(0, 1, 0, true)
    }

    fn n_params(&self) -> usize {
        self.p + self.q + usize::from(self.with_drift) + 1
    }
}

impl std::fmt::Display for ArimaSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{})", self.p, self.d, self.q)?;
        if self.with_drift {
            f.write_str("+drift")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArimaFit {
    pub spec: ArimaSpec,
    pub ar: Vec<f64>,
    pub ma: Vec<f64>,
    pub drift: f64,
    pub sigma2: f64,
    pub loglik: f64,
    pub aic: f64,
    pub n_obs: usize,
    /// The residual variance underflowed and was clamped to [`SIGMA2_FLOOR`].
    pub exact_fit: bool,
}

impl ArimaFit {
    /// JSON document `{p,d,q,drift?,ar,ma,sigma2,loglik,aic}`.
    pub fn to_json(&self) -> serde_json::Value {
        let mut doc = serde_json::json!({
            "p": self.spec.p,
            "d": self.spec.d,
            "q": self.spec.q,
            "ar": self.ar,
            "ma": self.ma,
            "sigma2": self.sigma2,
            "loglik": self.loglik,
            "aic": self.aic,
        });
        if self.spec.with_drift {
            doc["drift"] = serde_json::json!(self.drift);
        }
        doc
    }
}

/// `d`-th order differences.
pub fn difference(series: &[f64], d: usize) -> Vec<f64> {
    let mut out = series.to_vec();
    for _ in 0..d {
        out = out.windows(2).map(|w| w[1] - w[0]).collect();
    }
    out
}

/// Random walk with drift: ARIMA(0,1,0) with a constant.
pub fn fit_rw_drift(k: &[f64]) -> Result<ArimaFit, ArimaError> {
    if k.len() < 2 {
        return Err(ArimaError::InsufficientData { needed: 2, got: k.len() });
    }
    Ok(closed_form(ArimaSpec::rw_drift(), &difference(k, 1)))
}

/// Conditional-sum-of-squares estimate of `spec` on `k`.
pub fn fit_arima(k: &[f64], spec: ArimaSpec) -> Result<ArimaFit, ArimaError> {
    if spec.p > MAX_P || spec.q > MAX_Q || spec.d > MAX_D {
        return Err(ArimaError::BadOrder {
            p: spec.p,
            d: spec.d,
            q: spec.q,
        });
    }
    let needed = spec.d + spec.p + spec.q + 2;
    if k.len() < needed {
        return Err(ArimaError::InsufficientData { needed, got: k.len() });
    }
    let w = difference(k, spec.d);
    if spec.p == 0 && spec.q == 0 {
        return Ok(closed_form(spec, &w));
    }

    let mean = w.iter().sum::<f64>() / w.len() as f64;
    let sd = (w.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / w.len() as f64).sqrt();
    let n_coef = spec.p + spec.q;
    let dim = n_coef + usize::from(spec.with_drift);

    let unpack = |x: &[f64]| {
        let ar = poly::constrain(&x[..spec.p]);
        let ma: Vec<f64> = poly::constrain(&x[spec.p..n_coef]).iter().map(|c| -c).collect();
        let mu = if spec.with_drift { x[n_coef] } else { 0.0 };
        (ar, ma, mu)
    };
    let objective = |x: &[f64]| {
        let (ar, ma, mu) = unpack(x);
        let ss = css_residuals(&w, &ar, &ma, mu).iter().skip(spec.p).map(|e| e * e).sum::<f64>();
        (ss + f64::MIN_POSITIVE).ln()
    };

    let mut x0 = vec![0.0; dim];
    let mut step = vec![0.3; dim];
    if spec.with_drift {
        x0[n_coef] = mean;
        step[n_coef] = if sd > 0.0 { 0.1 * sd } else { 0.1 * mean.abs().max(1e-3) };
    }
    let nm = NelderMead {
        max_iter: 4000 * dim,
        ..Default::default()
    };
    let mut best = nm.minimize(objective, &x0, &step);
    // restarts shake the simplex loose from premature collapse
    for _ in 0..3 {
        let restep: Vec<f64> = step.iter().map(|s| s * 0.5).collect();
        let again = nm.minimize(objective, &best.x, &restep);
        let improved = again.f < best.f - 1e-12 * best.f.abs().max(1.0);
        best = if again.f <= best.f { again } else { best };
        if !improved {
            break;
        }
    }

    let (ar, ma, mu) = unpack(&best.x);
    let non_conv = |reason: String| ArimaError::NonConvergence { spec, reason };
    if !best.f.is_finite() {
        return Err(non_conv("objective is not finite".into()));
    }
    let ar_lag: Vec<f64> = ar.iter().map(|c| -c).collect();
    let ar_root = poly::min_root_modulus(&ar_lag);
    if ar_root < 1.0 + ROOT_MARGIN {
        return Err(non_conv(format!("AR polynomial root modulus {ar_root:.6} too close to the unit circle")));
    }
    let ma_root = poly::min_root_modulus(&ma);
    if ma_root < 1.0 + ROOT_MARGIN {
        return Err(non_conv(format!("MA polynomial root modulus {ma_root:.6} too close to the unit circle")));
    }

    let resid = css_residuals(&w, &ar, &ma, mu);
    let n_obs = w.len() - spec.p;
    let ss: f64 = resid.iter().skip(spec.p).map(|e| e * e).sum();
    Ok(finish(spec, ar, ma, mu, ss / n_obs as f64, n_obs))
}

fn closed_form(spec: ArimaSpec, w: &[f64]) -> ArimaFit {
    let n = w.len();
    let mu = if spec.with_drift {
        w.iter().sum::<f64>() / n as f64
    } else {
        0.0
    };
    let sigma2 = w.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / n as f64;
    finish(spec, Vec::new(), Vec::new(), mu, sigma2, n)
}

fn finish(spec: ArimaSpec, ar: Vec<f64>, ma: Vec<f64>, drift: f64, sigma2: f64, n_obs: usize) -> ArimaFit {
    let exact_fit = sigma2 <= SIGMA2_FLOOR;
    let sigma2 = sigma2.max(SIGMA2_FLOOR);
    let loglik = -0.5 * n_obs as f64 * ((2.0 * std::f64::consts::PI * sigma2).ln() + 1.0);
    let aic = -2.0 * loglik + 2.0 * spec.n_params() as f64;
    ArimaFit {
        spec,
        ar,
        ma,
        drift,
        sigma2,
        loglik,
        aic,
        n_obs,
        exact_fit,
    }
}

/// One-step prediction errors of the differenced series. Errors before
/// index `ar.len()` are conditioned to zero.
fn css_residuals(w: &[f64], ar: &[f64], ma: &[f64], mu: f64) -> Vec<f64> {
    let p = ar.len();
    let mut e = vec![0.0; w.len()];
    for t in p..w.len() {
        let mut pred = mu;
        for (j, phi) in ar.iter().enumerate() {
            pred += phi * (w[t - 1 - j] - mu);
        }
        for (j, theta) in ma.iter().enumerate() {
            if t > j {
                pred += theta * e[t - 1 - j];
            }
        }
        e[t] = w[t] - pred;
    }
    e
}

/// Mean forecast `horizon` steps past the end of `k` (future innovations zero).
pub fn forecast(fit: &ArimaFit, k: &[f64], horizon: usize) -> Vec<f64> {
    if horizon == 0 || k.is_empty() {
        return Vec::new();
    }
    let d = fit.spec.d.min(k.len() - 1);
    let mut levels: Vec<Vec<f64>> = vec![k.to_vec()];
    for _ in 0..d {
        let last = levels.last().expect("nonempty");
        levels.push(difference(last, 1));
    }
    let w = levels.pop().expect("differenced series");
    let e = css_residuals(&w, &fit.ar, &fit.ma, fit.drift);

    let mut wx = w.clone();
    let mut ex = e;
    for _ in 0..horizon {
        let t = wx.len();
        let mut pred = fit.drift;
        for (j, phi) in fit.ar.iter().enumerate() {
            if t > j {
                pred += phi * (wx[t - 1 - j] - fit.drift);
            }
        }
        for (j, theta) in fit.ma.iter().enumerate() {
            if t > j {
                pred += theta * ex[t - 1 - j];
            }
        }
        wx.push(pred);
        ex.push(0.0);
    }

    // integrate back up through each differencing level
    let mut path: Vec<f64> = wx[w.len()..].to_vec();
    for level in levels.iter().rev() {
        let mut acc = *level.last().expect("nonempty level");
        path = path
            .iter()
            .map(|step| {
                acc += step;
                acc
            })
            .collect();
    }
    path
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn noise(seed: u64, n: usize) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    }

    #[test]
    fn rw_drift_linear_series_is_exact() {
        let f = fit_rw_drift(&[0.0, 1.0, 2.0, 3.0]).unwrap();
        assert_eq!(f.drift, 1.0);
        assert!(f.exact_fit);
        assert_eq!(f.sigma2, SIGMA2_FLOOR);
        assert!(f.loglik.is_finite());
    }

    #[test]
    fn rw_drift_hand_values() {
        assert_eq!(fit_rw_drift(&[-2.0, 2.0]).unwrap().drift, 4.0);
        let f = fit_rw_drift(&[0.0, 2.0, 1.0, 3.0]).unwrap();
        assert_eq!(f.drift, 1.0);
        assert!((f.sigma2 - 2.0).abs() < 1e-15);
        assert!(!f.exact_fit);
        assert!(matches!(fit_rw_drift(&[1.0]), Err(ArimaError::InsufficientData { .. })));
    }

    #[test]
    fn aic_counts_sigma2() {
        let f = fit_rw_drift(&[0.0, 2.0, 1.0, 3.0, 3.5]).unwrap();
        assert!((f.aic - (-2.0 * f.loglik + 2.0 * 2.0)).abs() < 1e-9);
    }

    #[test]
    fn rw_forecast_extrapolates() {
        let k = [0.0, 1.0, 2.0, 3.0];
        let f = fit_rw_drift(&k).unwrap();
        assert_eq!(forecast(&f, &k, 3), vec![4.0, 5.0, 6.0]);
        assert!(forecast(&f, &k, 0).is_empty());
    }

    #[test]
    fn ar1_forecast_by_hand() {
        let fit = ArimaFit {
            spec: ArimaSpec::new(1, 0, 0, false),
            ar: vec![0.5],
            ma: vec![],
            drift: 0.0,
            sigma2: 1.0,
            loglik: 0.0,
            aic: 0.0,
            n_obs: 3,
            exact_fit: false,
        };
        assert_eq!(forecast(&fit, &[3.0, 5.0, 8.0], 2), vec![4.0, 2.0]);
    }

    #[test]
    fn pure_ar_forecast_is_recursive() {
        let fit = ArimaFit {
            spec: ArimaSpec::new(2, 1, 0, true),
            ar: vec![0.4, -0.2],
            ma: vec![],
            drift: 0.3,
            sigma2: 1.0,
            loglik: 0.0,
            aic: 0.0,
            n_obs: 10,
            exact_fit: false,
        };
        let k: Vec<f64> = (0..12).map(|i| (i as f64 * 0.7).sin() + 0.2 * i as f64).collect();
        let direct = forecast(&fit, &k, 2);
        let mut extended = k.clone();
        extended.push(forecast(&fit, &k, 1)[0]);
        let stepped = forecast(&fit, &extended, 1)[0];
        assert!((direct[1] - stepped).abs() < 1e-12);
    }

    #[test]
    fn arima_010_matches_rw_drift() {
        let k: Vec<f64> = noise(3, 40).iter().scan(0.0, |s, e| {
            *s += e - 0.5;
            Some(*s)
        }).collect();
        assert_eq!(fit_arima(&k, ArimaSpec::rw_drift()).unwrap(), fit_rw_drift(&k).unwrap());
    }

    #[test]
    fn white_noise_null_model() {
        let y: Vec<f64> = noise(11, 300).iter().map(|e| 2.0 + e).collect();
        let f = fit_arima(&y, ArimaSpec::new(0, 0, 0, true)).unwrap();
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        let var = y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / y.len() as f64;
        assert!((f.drift - mean).abs() < 1e-9);
        assert!((f.sigma2 - var).abs() < 1e-9);
    }

    #[test]
    fn recovers_ar1_coefficient() {
        let e = noise(42, 500);
        let mut x = vec![0.0; 500];
        for t in 1..500 {
            x[t] = 0.7 * x[t - 1] + e[t];
        }
        let f = fit_arima(&x, ArimaSpec::new(1, 0, 0, false)).unwrap();
        assert!((f.ar[0] - 0.7).abs() < 0.1, "phi = {}", f.ar[0]);
        assert!((f.sigma2 - 1.0).abs() < 0.2);
    }

    #[test]
    fn recovers_ma1_coefficient() {
        let e = noise(7, 800);
        let x: Vec<f64> = (0..800).map(|t| e[t] + if t > 0 { 0.5 * e[t - 1] } else { 0.0 }).collect();
        let f = fit_arima(&x, ArimaSpec::new(0, 0, 1, true)).unwrap();
        assert!((f.ma[0] - 0.5).abs() < 0.1, "theta = {}", f.ma[0]);
    }

    #[test]
    fn noiseless_recursion_fits_exactly() {
        let mut x = vec![5.0];
        for _ in 1..40 {
            let prev = *x.last().unwrap();
            x.push(1.0 + 0.6 * (prev - 1.0));
        }
        let f = fit_arima(&x, ArimaSpec::new(1, 0, 0, true)).unwrap();
        assert!(f.sigma2 <= 1e-12, "sigma2 = {}", f.sigma2);
    }

    #[test]
    fn rejects_short_series_and_bad_orders() {
        assert!(matches!(
            fit_arima(&[1.0, 2.0, 3.0], ArimaSpec::new(1, 1, 1, false)),
            Err(ArimaError::InsufficientData { needed: 5, got: 3 })
        ));
        assert!(matches!(
            fit_arima(&[0.0; 50], ArimaSpec::new(6, 0, 0, false)),
            Err(ArimaError::BadOrder { .. })
        ));
    }

    #[test]
    fn json_has_expected_fields() {
        let doc = fit_rw_drift(&[0.0, 2.0, 1.0, 3.0]).unwrap().to_json();
        for key in ["p", "d", "q", "drift", "ar", "ma", "sigma2", "loglik", "aic"] {
            assert!(doc.get(key).is_some(), "missing {key}");
        }
        let no_drift = fit_arima(&[0.0, 2.0, 1.0, 3.0], ArimaSpec::new(0, 1, 0, false)).unwrap();
        assert!(no_drift.to_json().get("drift").is_none());
    }

    #[test]
    fn second_difference_forecast_continues_quadratic() {
        let k: Vec<f64> = (0..10).map(|t| (t * t) as f64).collect();
        let f = fit_arima(&k, ArimaSpec::new(0, 2, 0, true)).unwrap();
        assert_eq!(forecast(&f, &k, 2), vec![100.0, 121.0]);
    }
}
