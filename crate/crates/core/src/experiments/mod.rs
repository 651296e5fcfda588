//! Out-of-sample evaluation: holdout split, forecast pipelines, error
//! metrics and their aggregation into report tables.

mod metrics;
mod pipeline;
mod report;

pub use metrics::{compute_metrics, Metric, Metrics};
pub use pipeline::{
    forecast_lc, run_experiment, run_lc_pipeline, run_lc_model, run_lstm_pipeline, train_registry, CountryForecast,
    ExperimentOutcome, ExperimentPlan, Failure, ForecastSet, LcForecast, OrderRecord,
};
pub use report::{aggregate, evaluate, write_reports, Axis, EvaluationReport, MetricRow, WinCount};

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arima::ArimaError;
use crate::hmd::MortalityMatrix;
use crate::leecarter::LeeCarterError;
use crate::lstm::LstmError;

/// Years held out at the end of every series.
pub const HORIZON: usize = 10;

/// Training years needed beyond the horizon: one 16-step window plus its target.
pub const MIN_TRAIN_YEARS: usize = 17;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("{country}: {years} years cannot hold a {horizon}-year holdout plus {min_train} training years")]
    TooShort {
        country: String,
        years: usize,
        horizon: usize,
        min_train: usize,
    },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("{country}: Lee-Carter fit failed: {source}")]
    LeeCarter {
        country: String,
        #[source]
        source: LeeCarterError,
    },
    #[error("{country}: index {series}: {source}")]
    Arima {
        country: String,
        series: String,
        #[source]
        source: ArimaError,
    },
    #[error("{context}: {source}")]
    Lstm {
        context: String,
        #[source]
        source: LstmError,
    },
    #[error("{0} has no total-population table")]
    MissingCountry(String),
    #[error("metric grid is ragged: {}", .0.join("; "))]
    Ragged(Vec<String>),
    #[error("nothing to evaluate: {0}")]
    Empty(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

/// Training years followed by the last `horizon` years.
#[derive(Debug, Clone, PartialEq)]
pub struct HoldoutSplit {
    pub train: MortalityMatrix,
    pub test: MortalityMatrix,
}

pub fn split_holdout(m: &MortalityMatrix, horizon: usize) -> Result<HoldoutSplit, ExperimentError> {
    let years = m.n_years();
    if horizon == 0 || years < horizon + MIN_TRAIN_YEARS {
        return Err(ExperimentError::TooShort {
            country: m.country().to_string(),
            years,
            horizon,
            min_train: MIN_TRAIN_YEARS,
        });
    }
    let n_train = years - horizon;
    Ok(HoldoutSplit {
        train: m.slice_years(0, n_train),
        test: m.slice_years(n_train, horizon),
    })
}

/// How each mortality index is extrapolated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Selection {
    RwDrift,
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModelKind {
    Lc,
    LcAuto,
    LcHigher(usize),
    LcAutoHigher(usize),
    LstmCountry,
    LstmWorld,
    LstmCoed,
}

impl ModelKind {
    /// The Lee-Carter variant of the given order; order 1 is the basic model.
    pub fn lee_carter(order: usize, selection: Selection) -> Self {
        match (order, selection) {
            (1, Selection::RwDrift) => ModelKind::Lc,
            (1, Selection::Auto) => ModelKind::LcAuto,
            (n, Selection::RwDrift) => ModelKind::LcHigher(n),
            (n, Selection::Auto) => ModelKind::LcAutoHigher(n),
        }
    }

    /// `(order, selection)` for Lee-Carter variants.
    pub fn lc_params(self) -> Option<(usize, Selection)> {
        match self {
            ModelKind::Lc => Some((1, Selection::RwDrift)),
            ModelKind::LcAuto => Some((1, Selection::Auto)),
            ModelKind::LcHigher(n) => Some((n, Selection::RwDrift)),
            ModelKind::LcAutoHigher(n) => Some((n, Selection::Auto)),
            _ => None,
        }
    }

    pub fn is_lstm(self) -> bool {
        matches!(self, ModelKind::LstmCountry | ModelKind::LstmWorld | ModelKind::LstmCoed)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelKind::Lc => f.write_str("LC"),
            ModelKind::LcAuto => f.write_str("LC Auto"),
            ModelKind::LcHigher(n) => write!(f, "LC Higher({n})"),
            ModelKind::LcAutoHigher(n) => write!(f, "LC Auto Higher({n})"),
            ModelKind::LstmCountry => f.write_str("LSTM Country"),
            ModelKind::LstmWorld => f.write_str("LSTM World"),
            ModelKind::LstmCoed => f.write_str("LSTM Coed"),
        }
    }
}

impl FromStr for ModelKind {
    type Err = String;

    /// Accepts `lc`, `lc-auto`, `lc-higher[:n]`, `lc-auto-higher[:n]`
    /// (order 3 when `n` is omitted), `lstm-country`, `lstm-world`, `lstm-coed`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (name, order) = match s.trim().split_once(':') {
            Some((name, n)) => (name, Some(n.parse::<usize>().map_err(|_| format!("bad order in `{s}`"))?)),
            None => (s.trim(), None),
        };
        let higher = |sel| match order.unwrap_or(3) {
            0 => Err(format!("order must be positive in `{s}`")),
            n => Ok(ModelKind::lee_carter(n, sel)),
        };
        let plain = |kind| match order {
            None => Ok(kind),
            Some(_) => Err(format!("`{name}` takes no order")),
        };
        match name.to_ascii_lowercase().as_str() {
            "lc" => plain(ModelKind::Lc),
            "lc-auto" => plain(ModelKind::LcAuto),
            "lc-higher" => higher(Selection::RwDrift),
            "lc-auto-higher" => higher(Selection::Auto),
            "lstm-country" => plain(ModelKind::LstmCountry),
            "lstm-world" => plain(ModelKind::LstmWorld),
            "lstm-coed" => plain(ModelKind::LstmCoed),
            _ => Err(format!("unknown model `{s}`")),
        }
    }
}
