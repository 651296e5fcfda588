//! Seeded multi-country mortality data drawn from a rank-3 log-bilinear
//! model with drifting indices and log-normal noise.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::hmd::{format_life_table, DatasetRegistry, IngestError, MortalityMatrix, Sex, AGE_GROUPS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub countries: usize,
    pub first_year: i32,
    pub n_years: usize,
    /// Standard deviation of the iid noise added to every log rate.
    pub noise_sd: f64,
    /// Multiplies the linear drift of every index.
    pub drift_scale: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            countries: 20,
            first_year: 1970,
            n_years: 40,
            noise_sd: 0.01,
            drift_scale: 1.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthCountry {
    pub code: String,
    pub female: MortalityMatrix,
    pub male: MortalityMatrix,
    pub total: MortalityMatrix,
}

impl SynthCountry {
    pub fn matrices(&self) -> [&MortalityMatrix; 3] {
        [&self.female, &self.male, &self.total]
    }
}

/// `saa`, `sab`, ... for country index `i`.
pub fn country_label(i: usize) -> String {
    let hi = (b'a' + (i / 26 % 26) as u8) as char;
    let lo = (b'a' + (i % 26) as u8) as char;
    format!("s{hi}{lo}")
}

fn normalized(shape: impl Fn(f64) -> f64) -> Vec<f64> {
    let raw: Vec<f64> = (0..AGE_GROUPS).map(|x| shape(x as f64 / (AGE_GROUPS - 1) as f64)).collect();
    let sum: f64 = raw.iter().sum();
    raw.iter().map(|v| v / sum).collect()
}

/// `slope * t + bend * t^2 / 100` plus a random walk with step sd `sd`.
fn index_path(rng: &mut ChaCha8Rng, n: usize, slope: f64, bend: f64, sd: f64) -> Vec<f64> {
    let step = Normal::new(0.0, sd).expect("finite sd");
    let mut level = 0.0;
    (0..n)
        .map(|t| {
            if t > 0 {
                level += step.sample(rng);
            }
            let t = t as f64;
            slope * t + bend * t * t / 100.0 + level
        })
        .collect()
}

const BEND: (f64, f64) = (0.6, 1.2);

fn country(rng: &mut ChaCha8Rng, code: String, cfg: &SynthConfig) -> Result<SynthCountry, IngestError> {
    let t = cfg.n_years;
    let level = rng.random_range(-0.25..0.25);
    let senescence = 0.095 + rng.random_range(-0.005..0.005);
    let hump = rng.random_range(0.5..1.5);
    let phase = rng.random_range(-0.3..0.3);

    let ax: Vec<f64> = (0..AGE_GROUPS)
        .map(|x| {
            let x = x as f64;
            (0.004 * (-2.0 * x).exp() + 3e-4 + 3e-5 * (senescence * x).exp()).ln() + level
        })
        .collect();
    let bx = [
        normalized(|u| 1.2 - 0.8 * u + 0.3 * hump * (PI * u).sin()),
        normalized(|u| 0.5 + (2.0 * PI * u + phase).sin()),
        normalized(|u| 0.5 + (3.0 * PI * u - phase).cos()),
    ];
    let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let slopes = [
        -rng.random_range(1.0..2.0) * cfg.drift_scale,
        sign * rng.random_range(0.5..1.5) * cfg.drift_scale,
        -sign * rng.random_range(0.3..0.8) * cfg.drift_scale,
    ];
    let bends = [sign * rng.random_range(BEND.0..BEND.1), -sign * rng.random_range(BEND.0..BEND.1)];
    let kt = [
        index_path(rng, t, slopes[0], 0.0, 0.3),
        index_path(rng, t, slopes[1], bends[0], 0.2),
        index_path(rng, t, slopes[2], bends[1], 0.2),
    ];

    let noise = Normal::new(0.0, cfg.noise_sd).map_err(|e| IngestError::InvalidMatrix {
        country: code.clone(),
        sex: Sex::Total,
        reason: e.to_string(),
    })?;
    let mut female = Array2::zeros((AGE_GROUPS, t));
    let mut male = Array2::zeros((AGE_GROUPS, t));
    for x in 0..AGE_GROUPS {
        for y in 0..t {
            let log_m = ax[x] + (0..3).map(|i| bx[i][x] * kt[i][y]).sum::<f64>();
            female[[x, y]] = (log_m - 0.12 + noise.sample(rng)).exp();
            male[[x, y]] = (log_m + 0.12 + noise.sample(rng)).exp();
        }
    }
    let total = (&female + &male) * 0.5;
    Ok(SynthCountry {
        female: MortalityMatrix::new(code.clone(), Sex::Female, cfg.first_year, female)?,
        male: MortalityMatrix::new(code.clone(), Sex::Male, cfg.first_year, male)?,
        total: MortalityMatrix::new(code.clone(), Sex::Total, cfg.first_year, total)?,
        code,
    })
}

/// Draws `cfg.countries` countries from one seeded stream.
pub fn generate(cfg: &SynthConfig) -> Result<Vec<SynthCountry>, IngestError> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    (0..cfg.countries).map(|i| country(&mut rng, country_label(i), cfg)).collect()
}

pub fn registry(countries: &[SynthCountry], min_years: usize) -> Result<DatasetRegistry, IngestError> {
    let mut reg = DatasetRegistry::new(min_years);
    for c in countries {
        for m in c.matrices() {
            reg.insert(m.clone())?;
        }
    }
    Ok(reg)
}

/// Writes one `{CODE}.Mx_1x1.txt` file per country.
pub fn write_hmd_files(countries: &[SynthCountry], dir: &Path) -> Result<Vec<PathBuf>, IngestError> {
    let io_err = |path: &Path| {
        let path = path.to_path_buf();
        move |source| IngestError::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    countries
        .iter()
        .map(|c| {
            let path = dir.join(format!("{}.Mx_1x1.txt", c.code.to_ascii_uppercase()));
            let text = format_life_table(&format!("Synthetic country {}", c.code), &c.female, &c.male, &c.total);
            fs::write(&path, text).map_err(io_err(&path))?;
            Ok(path)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hmd::load_directory;

    fn small() -> SynthConfig {
        SynthConfig {
            countries: 3,
            n_years: 32,
            ..Default::default()
        }
    }

    #[test]
    fn labels_are_three_letters() {
        assert_eq!(country_label(0), "saa");
        assert_eq!(country_label(27), "sbb");
    }

    #[test]
    fn same_seed_same_data() {
        assert_eq!(generate(&small()).unwrap(), generate(&small()).unwrap());
        let other = SynthConfig { seed: 1, ..small() };
        assert_ne!(generate(&small()).unwrap(), generate(&other).unwrap());
    }

    #[test]
    fn total_lies_between_sexes() {
        for c in generate(&small()).unwrap() {
            for ((f, m), t) in c.female.rates().iter().zip(c.male.rates()).zip(c.total.rates()) {
                assert!(*t >= f.min(*m) && *t <= f.max(*m));
            }
        }
    }

    #[test]
    fn files_load_back() {
        let countries = generate(&small()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        write_hmd_files(&countries, dir.path()).unwrap();
        let (reg, verdicts) = load_directory(dir.path(), 30).unwrap();
        assert_eq!(verdicts.len(), 3);
        assert_eq!(reg.countries(), vec!["saa", "sab", "sac"]);
        let loaded = reg.get("sab", Sex::Male).unwrap();
        assert_eq!(loaded.n_years(), 32);
        assert_eq!(loaded, &countries[1].male);
    }
}
