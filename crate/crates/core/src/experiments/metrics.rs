use serde::{Deserialize, Serialize};

use super::ExperimentError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Rmse,
    Mae,
    Medae,
    Smape,
    Me,
}

impl Metric {
    pub const ALL: [Metric; 5] = [Metric::Rmse, Metric::Mae, Metric::Medae, Metric::Smape, Metric::Me];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Rmse => "rmse",
            Metric::Mae => "mae",
            Metric::Medae => "medae",
            Metric::Smape => "smape",
            Metric::Me => "me",
        }
    }
}

/// Point-forecast errors over one evaluation window. `me` is signed
/// `predicted - actual`, so positive means over-forecasting; `smape` is
/// in percent.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Metrics {
    pub rmse: f64,
    pub mae: f64,
    pub medae: f64,
    pub smape: f64,
    pub me: f64,
}

impl Metrics {
    pub fn get(&self, metric: Metric) -> f64 {
        match metric {
            Metric::Rmse => self.rmse,
            Metric::Mae => self.mae,
            Metric::Medae => self.medae,
            Metric::Smape => self.smape,
            Metric::Me => self.me,
        }
    }

    /// Unweighted mean of each metric.
    pub fn mean<'a>(items: impl IntoIterator<Item = &'a Metrics>) -> Metrics {
        let mut sum = Metrics::default();
        let mut n = 0usize;
        for m in items {
            sum.rmse += m.rmse;
            sum.mae += m.mae;
            sum.medae += m.medae;
            sum.smape += m.smape;
            sum.me += m.me;
            n += 1;
        }
        let n = n.max(1) as f64;
        Metrics {
            rmse: sum.rmse / n,
            mae: sum.mae / n,
            medae: sum.medae / n,
            smape: sum.smape / n,
            me: sum.me / n,
        }
    }
}

pub fn compute_metrics(actual: &[f64], predicted: &[f64]) -> Result<Metrics, ExperimentError> {
    if actual.len() != predicted.len() {
        return Err(ExperimentError::Dimension(format!(
            "{} actual values, {} predictions",
            actual.len(),
            predicted.len()
        )));
    }
    if actual.is_empty() {
        return Err(ExperimentError::Dimension("no values to compare".into()));
    }
    let n = actual.len() as f64;
    let errors: Vec<f64> = predicted.iter().zip(actual).map(|(p, a)| p - a).collect();
    let mut abs: Vec<f64> = errors.iter().map(|e| e.abs()).collect();

    let rmse = (errors.iter().map(|e| e * e).sum::<f64>() / n).sqrt();
    let mae = abs.iter().sum::<f64>() / n;
    let me = errors.iter().sum::<f64>() / n;
    let smape = 100.0 / n
        * actual
            .iter()
            .zip(predicted)
            .zip(&abs)
            .map(|((a, p), e)| {
                let denom = (a.abs() + p.abs()) / 2.0;
                if denom == 0.0 {
                    0.0
                } else {
                    e / denom
                }
            })
            .sum::<f64>();
    abs.sort_by(f64::total_cmp);
    let mid = abs.len() / 2;
    let medae = if abs.len() % 2 == 1 {
        abs[mid]
    } else {
        (abs[mid - 1] + abs[mid]) / 2.0
    };
    Ok(Metrics {
        rmse,
        mae,
        medae,
        smape,
        me,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_series_score_zero() {
        let m = compute_metrics(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(m, Metrics::default());
    }

    #[test]
    fn zero_over_zero_smape_term() {
        assert_eq!(compute_metrics(&[0.0], &[0.0]).unwrap().smape, 0.0);
    }

    #[test]
    fn odd_median() {
        let m = compute_metrics(&[0.0, 0.0, 0.0], &[3.0, -1.0, 2.0]).unwrap();
        assert_eq!(m.medae, 2.0);
    }

    #[test]
    fn length_checks() {
        assert!(compute_metrics(&[1.0], &[1.0, 2.0]).is_err());
        assert!(compute_metrics(&[], &[]).is_err());
    }

    #[test]
    fn mean_of_metrics() {
        let a = Metrics {
            rmse: 1.0,
            mae: 2.0,
            medae: 3.0,
            smape: 4.0,
            me: -1.0,
        };
        let b = Metrics::default();
        let m = Metrics::mean([&a, &b]);
        assert_eq!(m.rmse, 0.5);
        assert_eq!(m.me, -0.5);
    }
}
