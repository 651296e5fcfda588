use serde::{Deserialize, Serialize};

use super::ArimaError;

/// 5% critical value of the level-stationarity KPSS statistic.
pub const KPSS_CRITICAL_5PCT: f64 = 0.463;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KpssResult {
    pub statistic: f64,
    pub lags: usize,
    pub reject_stationarity: bool,
}

/// Level-stationarity KPSS test with a Bartlett-kernel long-run variance
/// and lag truncation `floor(4 (T/100)^(1/4))`.
pub fn kpss_test(y: &[f64]) -> Result<KpssResult, ArimaError> {
    let n = y.len();
    if n < 10 {
        return Err(ArimaError::InsufficientData { needed: 10, got: n });
    }
    let nf = n as f64;
    let mean = y.iter().sum::<f64>() / nf;
    let resid: Vec<f64> = y.iter().map(|v| v - mean).collect();
    let lags = (4.0 * (nf / 100.0).powf(0.25)).floor() as usize;

    let eta = resid
        .iter()
        .scan(0.0, |s, e| {
            *s += e;
            Some(*s * *s)
        })
        .sum::<f64>()
        / (nf * nf);

    let mut long_run = resid.iter().map(|e| e * e).sum::<f64>();
    for lag in 1..=lags.min(n - 1) {
        let weight = 1.0 - lag as f64 / (lags as f64 + 1.0);
        let cov: f64 = resid[lag..].iter().zip(&resid[..n - lag]).map(|(a, b)| a * b).sum();
        long_run += 2.0 * weight * cov;
    }
    long_run /= nf;

    let statistic = if long_run > 0.0 && eta > 0.0 { eta / long_run } else { 0.0 };
    Ok(KpssResult {
        statistic,
        lags,
        reject_stationarity: statistic > KPSS_CRITICAL_5PCT,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_series_is_stationary() {
        let r = kpss_test(&[3.0; 50]).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert!(!r.reject_stationarity);
    }

    #[test]
    fn lag_truncation() {
        assert_eq!(kpss_test(&vec![0.0; 200]).unwrap().lags, 4);
        assert_eq!(kpss_test(&vec![0.0; 100]).unwrap().lags, 4);
        assert_eq!(kpss_test(&[0.0; 10]).unwrap().lags, 2);
    }

    #[test]
    fn trend_rejects() {
        let y: Vec<f64> = (0..80).map(|t| t as f64 + 0.01 * ((t * 7) % 5) as f64).collect();
        assert!(kpss_test(&y).unwrap().reject_stationarity);
    }

    #[test]
    fn too_short() {
        assert!(kpss_test(&[1.0; 9]).is_err());
    }
}
