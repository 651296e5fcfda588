//! Experiment configuration: one flat TOML table.
//!
//! ```toml
//! data_dir = "data"
//! countries = "all"            # or ["hun", "usa"]
//! min_years = 27
//! horizon = 10
//! lc_orders = [1, 3]
//! lc_selection = ["rw-drift"]  # and/or "auto"
//! lstm_regimes = ["country", "world", "coed"]
//! lstm_epochs = 300
//! lstm_transform = "log"       # or "raw"
//! output_dir = "out"
//! seed = 0
//! jobs = 0                     # 0: one thread per core
//! ```
//!
//! Every key is optional; unknown keys are rejected. `synth_*` keys drive
//! the `synth` subcommand.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use mortcast_core::experiments::{ExperimentPlan, ModelKind, Selection, HORIZON, MIN_TRAIN_YEARS};
use mortcast_core::hmd::AGE_GROUPS;
use mortcast_core::lstm::{RateTransform, TrainingConfig};
use mortcast_core::par::Exec;
use mortcast_core::synth::SynthConfig;
use serde::{Deserialize, Serialize};

use crate::UsageError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Countries {
    /// Only `"all"` is accepted.
    Keyword(String),
    List(Vec<String>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RegimeName {
    Country,
    World,
    Coed,
}

impl RegimeName {
    pub fn model(self) -> ModelKind {
        match self {
            RegimeName::Country => ModelKind::LstmCountry,
            RegimeName::World => ModelKind::LstmWorld,
            RegimeName::Coed => ModelKind::LstmCoed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub data_dir: PathBuf,
    pub countries: Countries,
    pub min_years: usize,
    pub horizon: usize,
    /// Empty disables the Lee-Carter models.
    pub lc_orders: Vec<usize>,
    pub lc_selection: Vec<Selection>,
    /// Empty disables the LSTM models.
    pub lstm_regimes: Vec<RegimeName>,
    pub lstm_hidden_dim: usize,
    pub lstm_unroll: usize,
    pub lstm_batch_size: usize,
    pub lstm_learning_rate: f64,
    pub lstm_epochs: usize,
    pub lstm_adam_beta1: f64,
    pub lstm_adam_beta2: f64,
    pub lstm_adam_eps: f64,
    pub lstm_transform: RateTransform,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub jobs: usize,
    pub synth_countries: usize,
    pub synth_first_year: i32,
    pub synth_years: usize,
    pub synth_noise_sd: f64,
    pub synth_drift_scale: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let lstm = TrainingConfig::default();
        let synth = SynthConfig::default();
        Self {
            data_dir: PathBuf::from("data"),
            countries: Countries::Keyword("all".into()),
            min_years: HORIZON + MIN_TRAIN_YEARS,
            horizon: HORIZON,
            lc_orders: vec![1, 3],
            lc_selection: vec![Selection::RwDrift],
            lstm_regimes: vec![RegimeName::Country, RegimeName::World, RegimeName::Coed],
            lstm_hidden_dim: lstm.hidden_dim,
            lstm_unroll: lstm.unroll,
            lstm_batch_size: lstm.batch_size,
            lstm_learning_rate: lstm.learning_rate,
            lstm_epochs: lstm.epochs,
            lstm_adam_beta1: lstm.adam_beta1,
            lstm_adam_beta2: lstm.adam_beta2,
            lstm_adam_eps: lstm.adam_eps,
            lstm_transform: lstm.transform,
            output_dir: PathBuf::from("out"),
            seed: 0,
            jobs: 0,
            synth_countries: synth.countries,
            synth_first_year: synth.first_year,
            synth_years: synth.n_years,
            synth_noise_sd: synth.noise_sd,
            synth_drift_scale: synth.drift_scale,
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub output: Option<PathBuf>,
    pub data_dir: Option<PathBuf>,
    pub raw_rates: bool,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| UsageError(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads `path`, or returns the defaults when `path` is `None`.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            Some(p) => {
                let text = fs::read_to_string(p)
                    .map_err(|e| UsageError(format!("cannot read config {}: {e}", p.display())))?;
                Self::from_toml(&text).with_context(|| format!("in {}", p.display()))
            }
            None => Ok(Self::default()),
        }
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        if let Some(seed) = o.seed {
            self.seed = seed;
        }
        if let Some(jobs) = o.jobs {
            self.jobs = jobs;
        }
        if let Some(dir) = &o.output {
            self.output_dir = dir.clone();
        }
        if let Some(dir) = &o.data_dir {
            self.data_dir = dir.clone();
        }
        if o.raw_rates {
            self.lstm_transform = RateTransform::Raw;
        }
        self.validate()
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(UsageError(msg).into());
        if self.horizon == 0 {
            return fail("horizon must be at least 1".into());
        }
        if let Some(&n) = self.lc_orders.iter().find(|&&n| n == 0 || n > AGE_GROUPS) {
            return fail(format!("lc_orders: order {n} outside 1..={AGE_GROUPS}"));
        }
        if !self.lc_orders.is_empty() && self.lc_selection.is_empty() {
            return fail("lc_selection must name at least one method when lc_orders is set".into());
        }
        if self.models().is_empty() {
            return fail("no models configured: lc_orders and lstm_regimes are both empty".into());
        }
        if let Countries::Keyword(k) = &self.countries {
            if k != "all" {
                return fail(format!("countries must be \"all\" or a list, got \"{k}\""));
            }
        }
        if self.synth_countries == 0 || self.synth_years == 0 {
            return fail("synth_countries and synth_years must be positive".into());
        }
        if !(self.synth_noise_sd >= 0.0 && self.synth_drift_scale.is_finite()) {
            return fail("synth_noise_sd must be non-negative and synth_drift_scale finite".into());
        }
        Ok(())
    }

    /// `None` for every country.
    pub fn country_filter(&self) -> Option<Vec<String>> {
        match &self.countries {
            Countries::Keyword(_) => None,
            Countries::List(list) => Some(list.iter().map(|c| c.to_ascii_lowercase()).collect()),
        }
    }

    /// Lee-Carter variants (selection-major, then order) followed by LSTM regimes.
    pub fn models(&self) -> Vec<ModelKind> {
        let mut out = Vec::new();
        for &sel in &self.lc_selection {
            for &order in &self.lc_orders {
                out.push(ModelKind::lee_carter(order, sel));
            }
        }
        out.extend(self.lstm_regimes.iter().map(|r| r.model()));
        let mut seen = std::collections::BTreeSet::new();
        out.retain(|m| seen.insert(*m));
        out
    }

    pub fn exec(&self) -> Exec {
        if self.jobs == 1 {
            Exec::Sequential
        } else {
            Exec::default()
        }
    }

    pub fn training(&self) -> TrainingConfig {
        TrainingConfig {
            hidden_dim: self.lstm_hidden_dim,
            unroll: self.lstm_unroll,
            batch_size: self.lstm_batch_size,
            learning_rate: self.lstm_learning_rate,
            epochs: self.lstm_epochs,
            adam_beta1: self.lstm_adam_beta1,
            adam_beta2: self.lstm_adam_beta2,
            adam_eps: self.lstm_adam_eps,
            seed: self.seed,
            transform: self.lstm_transform,
            exec: self.exec(),
        }
    }

    pub fn plan(&self) -> ExperimentPlan {
        ExperimentPlan {
            horizon: self.horizon,
            models: self.models(),
            training: self.training(),
            exec: self.exec(),
        }
    }

    pub fn synth(&self) -> SynthConfig {
        SynthConfig {
            countries: self.synth_countries,
            first_year: self.synth_first_year,
            n_years: self.synth_years,
            noise_sd: self.synth_noise_sd,
            drift_scale: self.synth_drift_scale,
            seed: self.seed,
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_give_the_five_headline_models() {
        let cfg = ExperimentConfig::from_toml("").unwrap();
        let names: Vec<String> = cfg.models().iter().map(|m| m.to_string()).collect();
        assert_eq!(names, ["LC", "LC Higher(3)", "LSTM Country", "LSTM World", "LSTM Coed"]);
    }

    #[test]
    fn keys_parse() {
        let cfg = ExperimentConfig::from_toml(
            r#"
            countries = ["HUN", "usa"]
            lc_orders = [2]
            lc_selection = ["auto", "rw-drift"]
            lstm_regimes = []
            lstm_transform = "raw"
            seed = 9
            "#,
        )
        .unwrap();
        assert_eq!(cfg.country_filter().unwrap(), ["hun", "usa"]);
        assert_eq!(cfg.models(), [ModelKind::LcAutoHigher(2), ModelKind::LcHigher(2)]);
        assert_eq!(cfg.training().transform, RateTransform::Raw);
        assert_eq!(cfg.synth().seed, 9);
    }

    #[test]
    fn bad_configs_are_usage_errors() {
        for text in [
            "horizon = 0",
            "lc_orders = [0]",
            "lc_orders = []\nlstm_regimes = []",
            "countries = \"some\"",
            "typo_key = 1",
            "lc_selection = [\"arima\"]",
        ] {
            let err = ExperimentConfig::from_toml(text).unwrap_err();
            assert!(err.is::<UsageError>(), "{text}: {err:#}");
        }
    }

    #[test]
    fn overrides_win_and_round_trip() {
        let mut cfg = ExperimentConfig::default();
        cfg.apply(&Overrides {
            seed: Some(4),
            jobs: Some(1),
            raw_rates: true,
            ..Default::default()
        })
        .unwrap();
        assert_eq!((cfg.seed, cfg.exec()), (4, Exec::Sequential));
        assert_eq!(ExperimentConfig::from_toml(&cfg.to_toml().unwrap()).unwrap(), cfg);
    }
}
