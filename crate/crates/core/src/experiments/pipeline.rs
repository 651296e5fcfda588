use std::collections::{BTreeMap, BTreeSet};

use ndarray::Array2;

use super::report::{aggregate, evaluate, EvaluationReport, MetricRow};
use super::{split_holdout, ExperimentError, HoldoutSplit, ModelKind, Selection, HORIZON};
use crate::arima::{auto_select, fit_rw_drift, forecast, ArimaFit, ArimaSpec};
use crate::hmd::{DatasetRegistry, MortalityMatrix, Sex};
use crate::leecarter::{self, log_transform, LeeCarterFit, DEFAULT_FLOOR};
use crate::lstm::{self, build_dataset_with, RateTransform, Regime, TrainEnd, TrainedLstm, TrainingConfig};
use crate::par::Exec;

/// Forecast rates for one country's total population.
#[derive(Debug, Clone, PartialEq)]
pub struct CountryForecast {
    pub first_year: i32,
    /// `ages x horizon`
    pub rates: Array2<f64>,
}

/// Order chosen for one mortality index.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderRecord {
    pub model: ModelKind,
    pub country: String,
    /// `k` for a first-order model, `k1..kn` otherwise.
    pub series: String,
    pub spec: ArimaSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub model: Option<ModelKind>,
    /// `None` when the whole model failed.
    pub country: Option<String>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForecastSet {
    pub model: ModelKind,
    pub forecasts: BTreeMap<String, CountryForecast>,
    pub orders: Vec<OrderRecord>,
    pub failures: Vec<Failure>,
}

impl ForecastSet {
    fn new(model: ModelKind) -> Self {
        Self {
            model,
            forecasts: BTreeMap::new(),
            orders: Vec::new(),
            failures: Vec::new(),
        }
    }

    fn record(&mut self, country: &str, result: Result<CountryForecast, ExperimentError>) {
        match result {
            Ok(f) => {
                self.forecasts.insert(country.to_string(), f);
            }
            Err(e) => self.failures.push(Failure {
                model: Some(self.model),
                country: Some(country.to_string()),
                message: e.to_string(),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LcForecast {
    pub fit: LeeCarterFit,
    /// One index model per non-padded component.
    pub index_models: Vec<(String, ArimaFit)>,
    /// `ages x horizon`, in rate space.
    pub rates: Array2<f64>,
}

fn series_label(order: usize, i: usize) -> String {
    if order == 1 {
        "k".to_string()
    } else {
        format!("k{}", i + 1)
    }
}

/// Fits Lee-Carter to the training years, extrapolates each index and
/// maps the projection back to rates.
pub fn forecast_lc(
    train: &MortalityMatrix,
    order: usize,
    selection: Selection,
    horizon: usize,
) -> Result<LcForecast, ExperimentError> {
    let country = train.country();
    let logm = log_transform(train, DEFAULT_FLOOR);
    let fit = leecarter::fit(&logm, order).map_err(|source| ExperimentError::LeeCarter {
        country: country.to_string(),
        source,
    })?;
    let mut kt_future = Array2::zeros((order, horizon));
    let mut index_models = Vec::with_capacity(order);
    for i in (0..order).filter(|&i| !fit.padded[i]) {
        let series = series_label(order, i);
        let k = fit.kt.row(i).to_vec();
        let model = match selection {
            Selection::RwDrift => fit_rw_drift(&k),
            Selection::Auto => auto_select(&k),
        }
        .map_err(|source| ExperimentError::Arima {
            country: country.to_string(),
            series: series.clone(),
            source,
        })?;
        for (dst, v) in kt_future.row_mut(i).iter_mut().zip(forecast(&model, &k, horizon)) {
            *dst = v;
        }
        index_models.push((series, model));
    }
    let log_rates = leecarter::project(&fit, &kt_future).map_err(|source| ExperimentError::LeeCarter {
        country: country.to_string(),
        source,
    })?;
    Ok(LcForecast {
        fit,
        index_models,
        rates: log_rates.mapv(f64::exp),
    })
}

/// [`forecast_lc`] on the training part of `split`, over the test horizon.
pub fn run_lc_pipeline(split: &HoldoutSplit, order: usize, selection: Selection) -> Result<LcForecast, ExperimentError> {
    forecast_lc(&split.train, order, selection, split.test.n_years())
}

fn totals(train: &DatasetRegistry) -> Vec<&MortalityMatrix> {
    train.iter().filter(|m| m.sex() == Sex::Total).collect()
}

/// Runs a Lee-Carter variant on every country's total population.
pub fn run_lc_model(train: &DatasetRegistry, model: ModelKind, horizon: usize, exec: Exec) -> ForecastSet {
    let mut set = ForecastSet::new(model);
    let Some((order, selection)) = model.lc_params() else {
        set.failures.push(Failure {
            model: Some(model),
            country: None,
            message: format!("{model} is not a Lee-Carter model"),
        });
        return set;
    };
    let matrices = totals(train);
    let results = exec.map(&matrices, |m| forecast_lc(m, order, selection, horizon));
    for (m, result) in matrices.iter().zip(results) {
        let result = result.map(|lc| {
            set.orders.extend(lc.index_models.iter().map(|(series, fit)| OrderRecord {
                model,
                country: m.country().to_string(),
                series: series.clone(),
                spec: fit.spec,
            }));
            CountryForecast {
                first_year: m.last_year() + 1,
                rates: lc.rates,
            }
        });
        set.record(m.country(), result);
    }
    set
}

fn lstm_error(context: impl Into<String>) -> impl FnOnce(lstm::LstmError) -> ExperimentError {
    let context = context.into();
    move |source| ExperimentError::Lstm { context, source }
}

fn forecast_country(
    model: &TrainedLstm,
    m: &MortalityMatrix,
    horizon: usize,
    transform: RateTransform,
) -> Result<CountryForecast, ExperimentError> {
    let mut rates = Array2::zeros((m.n_ages(), horizon));
    for age in m.ages() {
        let history: Vec<f64> = m.age_series(age).iter().map(|r| transform.apply(*r)).collect();
        let values = model
            .forecast(&history, horizon)
            .map_err(lstm_error(format!("{} age {age}", m.country())))?;
        for (dst, v) in rates.row_mut(age as usize).iter_mut().zip(values) {
            *dst = transform.invert(v);
        }
    }
    Ok(CountryForecast {
        first_year: m.last_year() + 1,
        rates,
    })
}

fn train_regime(train: &DatasetRegistry, regime: &Regime, config: &TrainingConfig) -> Result<TrainedLstm, ExperimentError> {
    let context = match regime {
        Regime::Country(c) => c.clone(),
        other => format!("{other:?}").to_lowercase(),
    };
    let dataset = build_dataset_with(train, regime, TrainEnd::Holdout(0), config.unroll, config.transform).map_err(lstm_error(context.clone()))?;
    lstm::train(&dataset, config).map_err(lstm_error(context))
}

/// Trains the LSTM regime of `model` on `train` (training years only) and
/// forecasts every country's total population recursively. A failure in
/// one country of the country regime is recorded and skipped; a failure
/// of a pooled regime fails the whole model.
pub fn run_lstm_pipeline(
    train: &DatasetRegistry,
    model: ModelKind,
    config: &TrainingConfig,
    horizon: usize,
    exec: Exec,
) -> Result<ForecastSet, ExperimentError> {
    let mut set = ForecastSet::new(model);
    let matrices = totals(train);
    match model {
        ModelKind::LstmCountry => {
            let results = exec.map(&matrices, |m| {
                let trained = train_regime(train, &Regime::Country(m.country().to_string()), config)?;
                forecast_country(&trained, m, horizon, config.transform)
            });
            for (m, result) in matrices.iter().zip(results) {
                set.record(m.country(), result);
            }
        }
        ModelKind::LstmWorld | ModelKind::LstmCoed => {
            let regime = if model == ModelKind::LstmWorld {
                Regime::World
            } else {
                Regime::Coed
            };
            let trained = train_regime(train, &regime, config)?;
            let results = exec.map(&matrices, |m| forecast_country(&trained, m, horizon, config.transform));
            for (m, result) in matrices.iter().zip(results) {
                set.record(m.country(), result);
            }
        }
        other => return Err(ExperimentError::Empty(format!("{other} is not an LSTM model"))),
    }
    Ok(set)
}

/// Training years of every entry and the held-out total-population years
/// of every country. Countries too short to split are reported and left out.
pub fn train_registry(
    registry: &DatasetRegistry,
    horizon: usize,
) -> (DatasetRegistry, BTreeMap<String, MortalityMatrix>, Vec<Failure>) {
    let mut train = DatasetRegistry::new(1);
    let mut test = BTreeMap::new();
    let mut failures = Vec::new();
    let mut short = BTreeSet::new();
    for m in registry.iter() {
        match split_holdout(m, horizon) {
            Ok(split) => {
                if m.sex() == Sex::Total {
                    test.insert(m.country().to_string(), split.test);
                }
                train.insert(split.train).expect("a split keeps at least one training year");
            }
            Err(e) => {
                if short.insert(m.country().to_string()) {
                    failures.push(Failure {
                        model: None,
                        country: Some(m.country().to_string()),
                        message: e.to_string(),
                    });
                }
            }
        }
    }
    let keep: Vec<String> = train
        .countries()
        .into_iter()
        .filter(|c| !short.contains(c) && test.contains_key(c))
        .collect();
    for c in train.countries().into_iter().filter(|c| !keep.contains(c)) {
        if short.insert(c.clone()) {
            failures.push(Failure {
                model: None,
                country: Some(c.clone()),
                message: ExperimentError::MissingCountry(c).to_string(),
            });
        }
    }
    train.retain_countries(&keep);
    test.retain(|c, _| keep.contains(c));
    (train, test, failures)
}

#[derive(Debug, Clone)]
pub struct ExperimentPlan {
    pub horizon: usize,
    pub models: Vec<ModelKind>,
    pub training: TrainingConfig,
    pub exec: Exec,
}

impl Default for ExperimentPlan {
    fn default() -> Self {
        Self {
            horizon: HORIZON,
            models: vec![ModelKind::Lc],
            training: TrainingConfig::default(),
            exec: Exec::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub horizon: usize,
    /// Models that produced forecasts, in plan order.
    pub sets: Vec<ForecastSet>,
    pub failures: Vec<Failure>,
    /// Countries left out of the evaluation because some model failed on them.
    pub excluded: BTreeSet<String>,
    pub rows: Vec<MetricRow>,
    /// `None` when no model produced any forecast.
    pub report: Option<EvaluationReport>,
}

/// Runs every planned model on the holdout protocol and evaluates the
/// countries that all successful models could forecast.
pub fn run_experiment(registry: &DatasetRegistry, plan: &ExperimentPlan) -> Result<ExperimentOutcome, ExperimentError> {
    let (train, test, mut failures) = train_registry(registry, plan.horizon);
    if test.is_empty() {
        return Err(ExperimentError::Empty("no country has a usable holdout split".into()));
    }
    let mut sets = Vec::new();
    let mut seen = BTreeSet::new();
    for &model in &plan.models {
        if !seen.insert(model) {
            continue;
        }
        let result = if model.is_lstm() {
            let config = TrainingConfig {
                exec: plan.exec,
                ..plan.training.clone()
            };
            run_lstm_pipeline(&train, model, &config, plan.horizon, plan.exec)
        } else {
            Ok(run_lc_model(&train, model, plan.horizon, plan.exec))
        };
        match result {
            Ok(mut set) => {
                failures.append(&mut set.failures);
                if set.forecasts.is_empty() {
                    failures.push(Failure {
                        model: Some(model),
                        country: None,
                        message: "no country could be forecast".into(),
                    });
                } else {
                    sets.push(set);
                }
            }
            Err(e) => failures.push(Failure {
                model: Some(model),
                country: None,
                message: e.to_string(),
            }),
        }
    }

    let excluded: BTreeSet<String> = test
        .keys()
        .filter(|c| sets.iter().any(|s| !s.forecasts.contains_key(*c)))
        .cloned()
        .collect();
    let mut rows = Vec::new();
    for set in &sets {
        rows.extend(evaluate(set, &test, &excluded)?);
    }
    let report = if sets.is_empty() || rows.is_empty() {
        None
    } else {
        Some(aggregate(&rows)?)
    };
    Ok(ExperimentOutcome {
        horizon: plan.horizon,
        sets,
        failures,
        excluded,
        rows,
        report,
    })
}
