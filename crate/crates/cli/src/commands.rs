use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use mortcast_core::experiments::{
    forecast_lc, run_experiment, run_lstm_pipeline, split_holdout, train_registry, write_reports, ExperimentOutcome, Metric,
    ModelKind,
};
use mortcast_core::hmd::{load_directory, write_canonical_csv, DatasetRegistry, IngestVerdict, Sex, AGE_GROUPS};
use mortcast_core::synth;

use crate::config::ExperimentConfig;
use crate::UsageError;

fn require_dir(dir: &Path) -> Result<()> {
    if dir.is_dir() {
        Ok(())
    } else {
        Err(UsageError(format!("data directory {} does not exist", dir.display())).into())
    }
}

/// Runs `f` on a dedicated pool of `jobs` threads; `0` uses the global pool.
#[cfg(feature = "parallel")]
fn with_jobs<R: Send>(jobs: usize, f: impl FnOnce() -> R + Send) -> Result<R> {
    if jobs == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?;
    Ok(pool.install(f))
}

#[cfg(not(feature = "parallel"))]
fn with_jobs<R: Send>(_jobs: usize, f: impl FnOnce() -> R + Send) -> Result<R> {
    Ok(f())
}

pub struct IngestSummary {
    pub verdicts: Vec<IngestVerdict>,
    pub registry: DatasetRegistry,
    pub written: Vec<PathBuf>,
}

/// Loads every country file in `data_dir`, prints one verdict line per
/// file and, when `output` is given, dumps each included country as
/// `{country}.csv` in canonical long format.
pub fn cmd_ingest(data_dir: &Path, output: Option<&Path>, min_years: usize, out: &mut dyn Write) -> Result<IngestSummary> {
    require_dir(data_dir)?;
    let (registry, verdicts) = load_directory(data_dir, min_years)?;
    writeln!(out, "{:<8} {:>5} {:>6} {:>6}  verdict", "country", "years", "first", "last")?;
    for v in &verdicts {
        let (years, first, last) = match (v.n_years, v.first_year) {
            (Some(n), Some(y)) => (n.to_string(), y.to_string(), (y + n as i32 - 1).to_string()),
            _ => ("-".into(), "-".into(), "-".into()),
        };
        let verdict = match &v.excluded {
            None => "included".to_string(),
            Some(reason) => format!("excluded: {reason}"),
        };
        writeln!(out, "{:<8} {years:>5} {first:>6} {last:>6}  {verdict}", v.country)?;
    }
    let countries = registry.countries();
    writeln!(out, "{} of {} files included", countries.len(), verdicts.len())?;
    if countries.is_empty() {
        bail!("no datasets loaded from {}", data_dir.display());
    }

    let mut written = Vec::new();
    if let Some(dir) = output {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        for c in &countries {
            let path = dir.join(format!("{c}.csv"));
            let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
            let matrices = Sex::ALL.iter().filter_map(|&s| registry.get(c, s));
            write_canonical_csv(BufWriter::new(file), matrices)?;
            written.push(path);
        }
    }
    Ok(IngestSummary {
        verdicts,
        registry,
        written,
    })
}

/// Writes the seeded synthetic countries as HMD-style text files.
pub fn cmd_synth(config: &ExperimentConfig, output: &Path, out: &mut dyn Write) -> Result<Vec<PathBuf>> {
    let cfg = config.synth();
    let countries = synth::generate(&cfg)?;
    let paths = synth::write_hmd_files(&countries, output)?;
    writeln!(
        out,
        "wrote {} countries x {} years (seed {}, noise {}) to {}",
        countries.len(),
        cfg.n_years,
        cfg.seed,
        cfg.noise_sd,
        output.display()
    )?;
    Ok(paths)
}

/// Loads the configured data directory and applies the country filter.
pub fn load_registry(config: &ExperimentConfig) -> Result<DatasetRegistry> {
    require_dir(&config.data_dir)?;
    let (mut registry, _) = load_directory(&config.data_dir, config.min_years)?;
    if let Some(wanted) = config.country_filter() {
        let available = registry.countries();
        let missing: Vec<&String> = wanted.iter().filter(|c| !available.contains(c)).collect();
        if !missing.is_empty() {
            let list: Vec<&str> = missing.iter().map(|c| c.as_str()).collect();
            return Err(UsageError(format!("countries not available: {}", list.join(", "))).into());
        }
        registry.retain_countries(&wanted);
    }
    if registry.is_empty() {
        bail!("no datasets loaded from {}", config.data_dir.display());
    }
    Ok(registry)
}

pub struct RunSummary {
    pub outcome: ExperimentOutcome,
    pub written: Vec<PathBuf>,
}

/// Runs every configured model, writes the reports and the resolved
/// config into `output_dir`. Fails only when no model produced a report.
pub fn cmd_run(config: &ExperimentConfig, out: &mut dyn Write) -> Result<RunSummary> {
    let registry = load_registry(config)?;
    let plan = config.plan();
    writeln!(
        out,
        "{} countries, models: {}",
        registry.countries().len(),
        plan.models.iter().map(|m| m.to_string()).collect::<Vec<_>>().join(", ")
    )?;
    let outcome = with_jobs(config.jobs, || run_experiment(&registry, &plan))??;

    let mut written = write_reports(&outcome, &config.output_dir)?;
    let cfg_path = config.output_dir.join("config.toml");
    fs::write(&cfg_path, config.to_toml()?).with_context(|| format!("writing {}", cfg_path.display()))?;
    written.push(cfg_path);

    for f in &outcome.failures {
        let model = f.model.map_or("-".to_string(), |m| m.to_string());
        writeln!(out, "failed: {model} {}: {}", f.country.as_deref().unwrap_or("*"), f.message)?;
    }
    let Some(report) = &outcome.report else {
        bail!(
            "every model failed; see {}",
            config.output_dir.join("errors.csv").display()
        );
    };
    writeln!(out, "{} cells, {} countries excluded", report.n_cells, outcome.excluded.len())?;
    write!(out, "{:<8}", "metric")?;
    for m in &report.models {
        write!(out, " {:>14}", m.to_string())?;
    }
    writeln!(out)?;
    for metric in Metric::ALL {
        write!(out, "{:<8}", metric.name())?;
        for m in &report.models {
            write!(out, " {:>14.6}", report.overall[m].get(metric))?;
        }
        writeln!(out)?;
    }
    writeln!(out, "reports in {}", config.output_dir.display())?;
    Ok(RunSummary { outcome, written })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForecastRow {
    pub year: i32,
    /// `history` or `forecast`.
    pub kind: &'static str,
    pub rate: f64,
    /// Held-out rate for forecast years.
    pub observed: Option<f64>,
}

fn slug(model: ModelKind) -> String {
    model.to_string().to_ascii_lowercase().replace([' ', '(', ')'], "-").trim_end_matches('-').replace("--", "-")
}

/// Fits one model on the training years of `country` and lists its
/// history followed by the `horizon` forecast years. The CSV goes to
/// `out` and, when `output` is given, to a file in that directory.
pub fn cmd_forecast(
    config: &ExperimentConfig,
    country: &str,
    age: u32,
    model: &str,
    output: Option<&Path>,
    out: &mut dyn Write,
) -> Result<Vec<ForecastRow>> {
    let model: ModelKind = model.parse().map_err(UsageError)?;
    if age as usize >= AGE_GROUPS {
        return Err(UsageError(format!("age {age} outside 0..={}", AGE_GROUPS - 1)).into());
    }
    let country = country.to_ascii_lowercase();
    let mut registry = load_registry(config)?;
    let total = registry
        .get(&country, Sex::Total)
        .ok_or_else(|| UsageError(format!("unknown country `{country}`")))?
        .clone();
    let split = split_holdout(&total, config.horizon)?;

    let predicted: Vec<f64> = if let Some((order, selection)) = model.lc_params() {
        let lc = forecast_lc(&split.train, order, selection, config.horizon)?;
        lc.rates.row(age as usize).to_vec()
    } else {
        if model == ModelKind::LstmCountry {
            registry.retain_countries(std::slice::from_ref(&country));
        }
        let (train, _, _) = train_registry(&registry, config.horizon);
        let training = config.training();
        let set = with_jobs(config.jobs, || {
            run_lstm_pipeline(&train, model, &training, config.horizon, config.exec())
        })??;
        let f = set.forecasts.get(&country).ok_or_else(|| {
            let reason = set.failures.iter().find(|f| f.country.as_deref() == Some(country.as_str()));
            anyhow!("{model} produced no forecast for {country}: {}", reason.map_or("excluded", |f| &f.message))
        })?;
        f.rates.row(age as usize).to_vec()
    };

    let mut rows: Vec<ForecastRow> = split
        .train
        .years()
        .zip(split.train.age_series(age))
        .map(|(year, &rate)| ForecastRow {
            year,
            kind: "history",
            rate,
            observed: None,
        })
        .collect();
    rows.extend(split.test.years().zip(split.test.age_series(age)).zip(predicted).map(|((year, &obs), rate)| {
        ForecastRow {
            year,
            kind: "forecast",
            rate,
            observed: Some(obs),
        }
    }));

    let render = |w: &mut dyn Write| -> Result<()> {
        writeln!(w, "year,kind,rate,observed")?;
        for r in &rows {
            let obs = r.observed.map_or(String::new(), |v| v.to_string());
            writeln!(w, "{},{},{},{obs}", r.year, r.kind, r.rate)?;
        }
        Ok(())
    };
    render(out)?;
    if let Some(dir) = output {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let path = dir.join(format!("forecast_{country}_{age}_{}.csv", slug(model)));
        let mut file = BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?);
        render(&mut file)?;
        file.flush()?;
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_slugs() {
        assert_eq!(slug(ModelKind::LcHigher(3)), "lc-higher-3");
        assert_eq!(slug(ModelKind::LstmWorld), "lstm-world");
        assert_eq!(slug(ModelKind::Lc), "lc");
    }
}
