use serde::{Deserialize, Serialize};

use super::LstmError;
use crate::hmd::{DatasetRegistry, MortalityMatrix, Sex};
use crate::leecarter::DEFAULT_FLOOR;

/// Which series are pooled into one training set.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    /// Every age of one country's total population.
    Country(String),
    /// Every age of every country's total population.
    World,
    /// Every age of every country, female, male and total.
    Coed,
}

/// Scale on which series are modelled, before standardization.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RateTransform {
    /// Natural log with the 1e-12 floor.
    #[default]
    Log,
    /// Untransformed rates; forecasts are clipped at zero.
    Raw,
}

impl RateTransform {
    pub fn apply(self, rate: f64) -> f64 {
        match self {
            RateTransform::Log => rate.max(DEFAULT_FLOOR).ln(),
            RateTransform::Raw => rate,
        }
    }

    pub fn invert(self, value: f64) -> f64 {
        match self {
            RateTransform::Log => value.exp(),
            RateTransform::Raw => value.max(0.0),
        }
    }
}

/// Last year that may enter the training windows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrainEnd {
    Year(i32),
    /// Each series' last year minus this many years.
    Holdout(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeriesOrigin {
    pub country: String,
    pub sex: Sex,
    pub age: u32,
    pub first_year: i32,
}

/// Pooled univariate log-rate series and the `(unroll inputs, 1 target)`
/// windows cut from them. Values are raw log rates; standardization happens
/// in [`super::train`], using every value held here.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceDataset {
    unroll: usize,
    series: Vec<(SeriesOrigin, Vec<f64>)>,
    /// (series index, start offset)
    windows: Vec<(usize, usize)>,
}

impl SequenceDataset {
    /// Cuts every contiguous window out of `series`.
    pub fn from_series(unroll: usize, series: Vec<(SeriesOrigin, Vec<f64>)>) -> Result<Self, LstmError> {
        if unroll == 0 {
            return Err(LstmError::Config("unroll must be at least 1".into()));
        }
        let windows: Vec<(usize, usize)> = series
            .iter()
            .enumerate()
            .flat_map(|(s, (_, values))| (0..values.len().saturating_sub(unroll)).map(move |start| (s, start)))
            .collect();
        if windows.is_empty() {
            return Err(LstmError::EmptyDataset(format!(
                "{} series, none longer than {unroll} values",
                series.len()
            )));
        }
        Ok(Self { unroll, series, windows })
    }

    pub fn unroll(&self) -> usize {
        self.unroll
    }

    pub fn len(&self) -> usize {
        self.windows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.windows.is_empty()
    }

    pub fn series(&self) -> &[(SeriesOrigin, Vec<f64>)] {
        &self.series
    }

    /// Inputs and target of window `i`.
    pub fn window(&self, i: usize) -> (&[f64], f64) {
        let (s, start) = self.windows[i];
        let values = &self.series[s].1;
        (&values[start..start + self.unroll], values[start + self.unroll])
    }

    /// Origin series of window `i` and the year of its target.
    pub fn window_origin(&self, i: usize) -> (&SeriesOrigin, i32) {
        let (s, start) = self.windows[i];
        let origin = &self.series[s].0;
        (origin, origin.first_year + (start + self.unroll) as i32)
    }

    pub(crate) fn window_index(&self) -> &[(usize, usize)] {
        &self.windows
    }

    /// Every value of every series, for standardization.
    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.series.iter().flat_map(|(_, v)| v.iter().copied())
    }
}

fn selected<'a>(registry: &'a DatasetRegistry, regime: &Regime) -> Vec<&'a MortalityMatrix> {
    registry
        .iter()
        .filter(|m| match regime {
            Regime::Country(code) => m.country() == code && m.sex() == Sex::Total,
            Regime::World => m.sex() == Sex::Total,
            Regime::Coed => true,
        })
        .collect()
}

/// Log-transforms (floor 1e-12) every selected age series up to the
/// training cutoff and cuts its windows.
pub fn build_dataset(
    registry: &DatasetRegistry,
    regime: &Regime,
    train_end: TrainEnd,
    unroll: usize,
) -> Result<SequenceDataset, LstmError> {
    build_dataset_with(registry, regime, train_end, unroll, RateTransform::Log)
}

pub fn build_dataset_with(
    registry: &DatasetRegistry,
    regime: &Regime,
    train_end: TrainEnd,
    unroll: usize,
    transform: RateTransform,
) -> Result<SequenceDataset, LstmError> {
    let mut series = Vec::new();
    for m in selected(registry, regime) {
        let cutoff = match train_end {
            TrainEnd::Year(y) => y,
            TrainEnd::Holdout(h) => m.last_year() - h as i32,
        };
        if cutoff > m.last_year() {
            return Err(LstmError::SeriesTooShort {
                country: m.country().to_string(),
                last_year: m.last_year(),
                cutoff,
            });
        }
        if cutoff < m.first_year() {
            continue;
        }
        let len = (cutoff - m.first_year() + 1) as usize;
        for age in m.ages() {
            let values: Vec<f64> = m
                .age_series(age)
                .iter()
                .take(len)
                .map(|r| transform.apply(*r))
                .collect();
            series.push((
                SeriesOrigin {
                    country: m.country().to_string(),
                    sex: m.sex(),
                    age,
                    first_year: m.first_year(),
                },
                values,
            ));
        }
    }
    if series.is_empty() {
        return Err(LstmError::EmptyDataset(format!("no series selected for {regime:?}")));
    }
    SequenceDataset::from_series(unroll, series)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hmd::AGE_GROUPS;
    use ndarray::Array2;

    fn origin() -> SeriesOrigin {
        SeriesOrigin {
            country: "aaa".into(),
            sex: Sex::Total,
            age: 0,
            first_year: 1950,
        }
    }

    fn registry(countries: &[(&str, usize)]) -> DatasetRegistry {
        let mut reg = DatasetRegistry::new(1);
        for &(c, t) in countries {
            for sex in Sex::ALL {
                let rates = Array2::from_shape_fn((AGE_GROUPS, t), |(x, y)| 0.001 * (x + 1) as f64 * 0.99f64.powi(y as i32));
                reg.insert(MortalityMatrix::new(c, sex, 1950, rates).unwrap()).unwrap();
            }
        }
        reg
    }

    #[test]
    fn seventeen_values_make_one_window() {
        let ds = SequenceDataset::from_series(16, vec![(origin(), (0..17).map(f64::from).collect())]).unwrap();
        assert_eq!(ds.len(), 1);
        let (input, target) = ds.window(0);
        assert_eq!(input.len(), 16);
        assert_eq!(target, 16.0);
        assert_eq!(ds.window_origin(0).1, 1966);
    }

    #[test]
    fn too_short_series_give_empty_dataset() {
        let err = SequenceDataset::from_series(16, vec![(origin(), vec![0.0; 16])]).unwrap_err();
        assert!(matches!(err, LstmError::EmptyDataset(_)));
    }

    #[test]
    fn country_regime_window_count() {
        let reg = registry(&[("aaa", 40), ("bbb", 50)]);
        let ds = build_dataset(&reg, &Regime::Country("aaa".into()), TrainEnd::Year(1979), 16).unwrap();
        assert_eq!(ds.len(), AGE_GROUPS * (30 - 16));
        assert!(ds.series().iter().all(|(o, _)| o.country == "aaa" && o.sex == Sex::Total));
    }

    #[test]
    fn world_and_coed_counts() {
        let reg = registry(&[("aaa", 40), ("bbb", 50)]);
        let world = build_dataset(&reg, &Regime::World, TrainEnd::Holdout(10), 16).unwrap();
        assert_eq!(world.len(), AGE_GROUPS * ((40 - 16 - 10) + (50 - 16 - 10)));
        let coed = build_dataset(&reg, &Regime::Coed, TrainEnd::Holdout(10), 16).unwrap();
        assert_eq!(coed.len(), 3 * world.len());
    }

    #[test]
    fn cutoff_past_series_end_is_rejected() {
        let reg = registry(&[("aaa", 40)]);
        assert!(matches!(
            build_dataset(&reg, &Regime::World, TrainEnd::Year(2100), 16),
            Err(LstmError::SeriesTooShort { .. })
        ));
    }

    #[test]
    fn zero_rates_are_clipped() {
        let mut reg = DatasetRegistry::new(1);
        reg.insert(MortalityMatrix::new("aaa", Sex::Total, 1950, Array2::zeros((2, 20))).unwrap()).unwrap();
        let ds = build_dataset(&reg, &Regime::World, TrainEnd::Holdout(0), 16).unwrap();
        assert!(ds.values().all(|v| (v - 1e-12f64.ln()).abs() < 1e-12));
    }

    #[test]
    fn raw_transform_keeps_rates() {
        let reg = registry(&[("aaa", 20)]);
        let ds = build_dataset_with(&reg, &Regime::World, TrainEnd::Holdout(0), 16, RateTransform::Raw).unwrap();
        assert_eq!(ds.series()[3].1[5], reg.get("aaa", Sex::Total).unwrap().rate(3, 1955).unwrap());
        assert_eq!(RateTransform::Raw.invert(-0.2), 0.0);
        assert!((RateTransform::Log.invert(RateTransform::Log.apply(0.03)) - 0.03).abs() < 1e-15);
    }
}
