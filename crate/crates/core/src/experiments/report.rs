use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use super::metrics::{compute_metrics, Metric, Metrics};
use super::pipeline::{ExperimentOutcome, ForecastSet};
use super::{ExperimentError, ModelKind};
use crate::hmd::MortalityMatrix;

/// Errors of one model for one (country, age) cell over the test years.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricRow {
    pub model: ModelKind,
    pub country: String,
    pub age: u32,
    pub metrics: Metrics,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axis {
    Country,
    Age,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::Country => "country",
            Axis::Age => "age",
        }
    }
}

/// How often `model` beat `versus` on `metric` across the units of `axis`
/// (countries or ages). Lower is better; ME is compared by magnitude;
/// ties count for neither side.
#[derive(Debug, Clone, PartialEq)]
pub struct WinCount {
    pub model: ModelKind,
    pub versus: ModelKind,
    pub axis: Axis,
    pub metric: Metric,
    pub wins: usize,
    pub ties: usize,
    pub total: usize,
}

impl WinCount {
    pub fn percent(&self) -> f64 {
        100.0 * self.wins as f64 / self.total as f64
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub models: Vec<ModelKind>,
    /// Unweighted mean over all (country, age) cells.
    pub overall: BTreeMap<ModelKind, Metrics>,
    /// Mean over countries, per age.
    pub by_age: BTreeMap<ModelKind, BTreeMap<u32, Metrics>>,
    /// Mean over ages, per country.
    pub by_country: BTreeMap<ModelKind, BTreeMap<String, Metrics>>,
    pub wins: Vec<WinCount>,
    pub n_cells: usize,
}

impl EvaluationReport {
    pub fn overall(&self, model: ModelKind) -> Option<&Metrics> {
        self.overall.get(&model)
    }
}

/// Metrics of every (country, age) cell of `set` against the held-out
/// total-population rates, skipping `excluded` countries.
pub fn evaluate(
    set: &ForecastSet,
    test: &BTreeMap<String, MortalityMatrix>,
    excluded: &BTreeSet<String>,
) -> Result<Vec<MetricRow>, ExperimentError> {
    let mut rows = Vec::new();
    for (country, forecast) in set.forecasts.iter().filter(|(c, _)| !excluded.contains(*c)) {
        let actual = test
            .get(country)
            .ok_or_else(|| ExperimentError::MissingCountry(country.clone()))?;
        if actual.rates().dim() != forecast.rates.dim() || actual.first_year() != forecast.first_year {
            return Err(ExperimentError::Dimension(format!(
                "{} forecast for {country} covers {:?} from {}, test covers {:?} from {}",
                set.model,
                forecast.rates.dim(),
                forecast.first_year,
                actual.rates().dim(),
                actual.first_year()
            )));
        }
        for age in actual.ages() {
            let a = actual.age_series(age).to_vec();
            let p = forecast.rates.row(age as usize).to_vec();
            rows.push(MetricRow {
                model: set.model,
                country: country.clone(),
                age,
                metrics: compute_metrics(&a, &p)?,
            });
        }
    }
    Ok(rows)
}

fn marginal<K: Ord + Clone>(cells: &BTreeMap<(String, u32), Metrics>, key: impl Fn(&(String, u32)) -> K) -> BTreeMap<K, Metrics> {
    let mut groups: BTreeMap<K, Vec<&Metrics>> = BTreeMap::new();
    for (k, m) in cells {
        groups.entry(key(k)).or_default().push(m);
    }
    groups.into_iter().map(|(k, ms)| (k, Metrics::mean(ms))).collect()
}

fn score(m: &Metrics, metric: Metric) -> f64 {
    match metric {
        Metric::Me => m.me.abs(),
        other => m.get(other),
    }
}

fn count_wins<K: Ord>(a: &BTreeMap<K, Metrics>, b: &BTreeMap<K, Metrics>, metric: Metric) -> (usize, usize, usize) {
    let (mut wins, mut ties, mut total) = (0, 0, 0);
    for (k, ma) in a {
        if let Some(mb) = b.get(k) {
            let (sa, sb) = (score(ma, metric), score(mb, metric));
            total += 1;
            if sa < sb {
                wins += 1;
            } else if sa == sb {
                ties += 1;
            }
        }
    }
    (wins, ties, total)
}

/// Means per model, per age and per country, and pairwise win counts.
/// Every model must cover the same (country, age) cells.
pub fn aggregate(rows: &[MetricRow]) -> Result<EvaluationReport, ExperimentError> {
    if rows.is_empty() {
        return Err(ExperimentError::Empty("no metric rows".into()));
    }
    let mut models = Vec::new();
    let mut grid: BTreeMap<ModelKind, BTreeMap<(String, u32), Metrics>> = BTreeMap::new();
    for r in rows {
        if !models.contains(&r.model) {
            models.push(r.model);
        }
        grid.entry(r.model).or_default().insert((r.country.clone(), r.age), r.metrics);
    }

    let all_cells: BTreeSet<&(String, u32)> = grid.values().flat_map(|g| g.keys()).collect();
    let mut gaps = Vec::new();
    for model in &models {
        for (country, age) in all_cells.iter().filter(|c| !grid[model].contains_key(**c)) {
            gaps.push(format!("{model} lacks {country} age {age}"));
        }
    }
    if !gaps.is_empty() {
        return Err(ExperimentError::Ragged(gaps));
    }

    let overall = grid.iter().map(|(m, cells)| (*m, Metrics::mean(cells.values()))).collect();
    let by_age: BTreeMap<ModelKind, BTreeMap<u32, Metrics>> =
        grid.iter().map(|(m, cells)| (*m, marginal(cells, |(_, age)| *age))).collect();
    let by_country: BTreeMap<ModelKind, BTreeMap<String, Metrics>> =
        grid.iter().map(|(m, cells)| (*m, marginal(cells, |(c, _)| c.clone()))).collect();

    let mut wins = Vec::new();
    for &model in &models {
        for &versus in models.iter().filter(|v| **v != model) {
            for metric in Metric::ALL {
                for axis in [Axis::Country, Axis::Age] {
                    let (w, ties, total) = match axis {
                        Axis::Country => count_wins(&by_country[&model], &by_country[&versus], metric),
                        Axis::Age => count_wins(&by_age[&model], &by_age[&versus], metric),
                    };
                    wins.push(WinCount {
                        model,
                        versus,
                        axis,
                        metric,
                        wins: w,
                        ties,
                        total,
                    });
                }
            }
        }
    }
    Ok(EvaluationReport {
        models,
        overall,
        by_age,
        by_country,
        wins,
        n_cells: all_cells.len(),
    })
}

fn metric_fields(m: &Metrics) -> impl Iterator<Item = String> + '_ {
    Metric::ALL.into_iter().map(|k| m.get(k).to_string())
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>, ExperimentError> {
    let file = fs::File::create(path).map_err(|source| ExperimentError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(csv::Writer::from_writer(file))
}

fn finish(mut w: csv::Writer<fs::File>, path: &Path) -> Result<PathBuf, ExperimentError> {
    w.flush().map_err(|source| ExperimentError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(path.to_path_buf())
}

fn metric_header<'a>(lead: &[&'a str]) -> Vec<&'a str> {
    lead.iter().copied().chain(Metric::ALL.iter().map(|m| m.name())).collect()
}

/// Writes `metrics.csv`, `summary.csv`, `by_age.csv`, `by_country.csv`,
/// `wins.csv`, `arima_orders.csv`, `forecasts.csv`, `errors.csv` and
/// `metadata.csv` into `dir`. Files that need an evaluation report are
/// skipped when there is none.
pub fn write_reports(outcome: &ExperimentOutcome, dir: &Path) -> Result<Vec<PathBuf>, ExperimentError> {
    fs::create_dir_all(dir).map_err(|source| ExperimentError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut written = Vec::new();

    let path = dir.join("metrics.csv");
    let mut w = csv_writer(&path)?;
    w.write_record(metric_header(&["model", "country", "age"]))?;
    for r in &outcome.rows {
        let lead = [r.model.to_string(), r.country.clone(), r.age.to_string()];
        w.write_record(lead.into_iter().chain(metric_fields(&r.metrics)))?;
    }
    written.push(finish(w, &path)?);

    if let Some(report) = &outcome.report {
        let path = dir.join("summary.csv");
        let mut w = csv_writer(&path)?;
        w.write_record(std::iter::once("metric".to_string()).chain(report.models.iter().map(|m| m.to_string())))?;
        for metric in Metric::ALL {
            let values = report.models.iter().map(|m| report.overall[m].get(metric).to_string());
            w.write_record(std::iter::once(metric.name().to_string()).chain(values))?;
        }
        written.push(finish(w, &path)?);

        let path = dir.join("by_age.csv");
        let mut w = csv_writer(&path)?;
        w.write_record(metric_header(&["model", "age"]))?;
        for model in &report.models {
            for (age, m) in &report.by_age[model] {
                w.write_record([model.to_string(), age.to_string()].into_iter().chain(metric_fields(m)))?;
            }
        }
        written.push(finish(w, &path)?);

        let path = dir.join("by_country.csv");
        let mut w = csv_writer(&path)?;
        w.write_record(metric_header(&["model", "country"]))?;
        for model in &report.models {
            for (country, m) in &report.by_country[model] {
                w.write_record([model.to_string(), country.clone()].into_iter().chain(metric_fields(m)))?;
            }
        }
        written.push(finish(w, &path)?);

        let path = dir.join("wins.csv");
        let mut w = csv_writer(&path)?;
        w.write_record(["model", "versus", "axis", "metric", "wins", "ties", "total", "percent"])?;
        for c in &report.wins {
            w.write_record([
                c.model.to_string(),
                c.versus.to_string(),
                c.axis.name().to_string(),
                c.metric.name().to_string(),
                c.wins.to_string(),
                c.ties.to_string(),
                c.total.to_string(),
                c.percent().to_string(),
            ])?;
        }
        written.push(finish(w, &path)?);
    }

    let path = dir.join("arima_orders.csv");
    let mut w = csv_writer(&path)?;
    w.write_record(["model", "country", "series", "p", "d", "q", "drift"])?;
    for set in &outcome.sets {
        for o in &set.orders {
            w.write_record([
                o.model.to_string(),
                o.country.clone(),
                o.series.clone(),
                o.spec.p.to_string(),
                o.spec.d.to_string(),
                o.spec.q.to_string(),
                o.spec.with_drift.to_string(),
            ])?;
        }
    }
    written.push(finish(w, &path)?);

    let path = dir.join("forecasts.csv");
    let mut w = csv_writer(&path)?;
    w.write_record(["country", "age", "year", "model", "rate"])?;
    for set in &outcome.sets {
        for (country, f) in &set.forecasts {
            for ((age, h), rate) in f.rates.indexed_iter() {
                w.write_record([
                    country.clone(),
                    age.to_string(),
                    (f.first_year + h as i32).to_string(),
                    set.model.to_string(),
                    rate.to_string(),
                ])?;
            }
        }
    }
    written.push(finish(w, &path)?);

    let path = dir.join("errors.csv");
    let mut w = csv_writer(&path)?;
    w.write_record(["model", "country", "message"])?;
    for f in &outcome.failures {
        w.write_record([
            f.model.map(|m| m.to_string()).unwrap_or_default(),
            f.country.clone().unwrap_or_default(),
            f.message.clone(),
        ])?;
    }
    written.push(finish(w, &path)?);

    let path = dir.join("metadata.csv");
    let mut w = csv_writer(&path)?;
    w.write_record(["key", "value"])?;
    let models: Vec<String> = outcome.sets.iter().map(|s| s.model.to_string()).collect();
    let countries: BTreeSet<&String> = outcome.rows.iter().map(|r| &r.country).collect();
    let excluded: Vec<&str> = outcome.excluded.iter().map(String::as_str).collect();
    for (k, v) in [
        ("weighting", "unweighted_cells".to_string()),
        ("rate_space", "raw".to_string()),
        ("horizon", outcome.horizon.to_string()),
        ("models", models.join(";")),
        ("countries_evaluated", countries.len().to_string()),
        ("countries_excluded", excluded.join(";")),
        ("cells", outcome.report.as_ref().map_or(0, |r| r.n_cells).to_string()),
    ] {
        w.write_record([k.to_string(), v])?;
    }
    written.push(finish(w, &path)?);

    Ok(written)
}
