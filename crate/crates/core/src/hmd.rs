//! Human Mortality Database period life tables ("Mx 1x1" layout).
//!
//! A 1x1 death-rate file has a free-form preamble, a header row starting
//! with `Year Age`, and whitespace-delimited rows
//! `Year Age Female Male Total`. The open age bucket is written `110+`
//! and missing values are written `.`.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Number of single-year age groups in a 1x1 table (0..=109 plus `110+`).
pub const AGE_GROUPS: usize = 111;

/// Age label of the open `110+` bucket.
pub const OPEN_AGE: u32 = 110;

/// Default inclusion threshold, in years of history.
pub const DEFAULT_MIN_YEARS: usize = 30;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{country}: line {line}: {reason}")]
    Malformed {
        country: String,
        line: usize,
        reason: String,
    },
    #[error("{country}: no header row (`Year Age Female Male Total`) found")]
    MissingHeader { country: String },
    #[error("{country}: data section is empty")]
    EmptyData { country: String },
    #[error("{country} ({sex}): incomplete table, first missing cell at year {year}, age {age}")]
    Incomplete {
        country: String,
        sex: Sex,
        year: i32,
        age: u32,
    },
    #[error("{country}: duplicate row for year {year}, age {age}")]
    Duplicate { country: String, year: i32, age: u32 },
    #[error("{country}: year {year} is absent inside the covered range")]
    YearGap { country: String, year: i32 },
    #[error("{country} ({sex}): {reason}")]
    InvalidMatrix {
        country: String,
        sex: Sex,
        reason: String,
    },
    #[error("{country} ({sex}): {years} years of history, need at least {min_years}")]
    TooShort {
        country: String,
        sex: Sex,
        years: usize,
        min_years: usize,
    },
    #[error("canonical csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sex {
    Female,
    Male,
    Total,
}

impl Sex {
    pub const ALL: [Sex; 3] = [Sex::Female, Sex::Male, Sex::Total];

    pub fn as_str(self) -> &'static str {
        match self {
            Sex::Female => "female",
            Sex::Male => "male",
            Sex::Total => "total",
        }
    }
}

impl fmt::Display for Sex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Sex {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "female" | "f" => Ok(Sex::Female),
            "male" | "m" => Ok(Sex::Male),
            "total" | "t" => Ok(Sex::Total),
            other => Err(format!("unknown sex `{other}`")),
        }
    }
}

/// One data row of a 1x1 life table. `None` marks a missing (`.`) value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LifeTableRecord {
    pub year: i32,
    pub age: u32,
    pub female: Option<f64>,
    pub male: Option<f64>,
    pub total: Option<f64>,
}

impl LifeTableRecord {
    pub fn rate(&self, sex: Sex) -> Option<f64> {
        match sex {
            Sex::Female => self.female,
            Sex::Male => self.male,
            Sex::Total => self.total,
        }
    }
}

/// Parses the text of a 1x1 death-rate file. Every data row yields exactly
/// one record, in file order.
pub fn parse_life_table(text: &str, country: &str) -> Result<Vec<LifeTableRecord>, IngestError> {
    let malformed = |line: usize, reason: String| IngestError::Malformed {
        country: country.to_string(),
        line,
        reason,
    };

    let mut lines = text.lines().enumerate();
    let mut found_header = false;
    for (_, line) in lines.by_ref() {
        let mut tokens = line.split_whitespace();
        if tokens.next().is_some_and(|t| t.eq_ignore_ascii_case("year"))
            && tokens.next().is_some_and(|t| t.eq_ignore_ascii_case("age"))
        {
            found_header = true;
            break;
        }
    }
    if !found_header {
        return Err(IngestError::MissingHeader {
            country: country.to_string(),
        });
    }

    let mut records = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        if tokens.len() != 5 {
            return Err(malformed(
                lineno,
                format!("expected 5 columns, found {}", tokens.len()),
            ));
        }
        let year: i32 = tokens[0]
            .parse()
            .map_err(|_| malformed(lineno, format!("bad year `{}`", tokens[0])))?;
        if year <= 0 {
            return Err(malformed(lineno, format!("year {year} is not positive")));
        }
        let age = parse_age(tokens[1]).ok_or_else(|| malformed(lineno, format!("bad age `{}`", tokens[1])))?;
        let mut rates = [None; 3];
        for (slot, token) in rates.iter_mut().zip(&tokens[2..]) {
            *slot = parse_rate(token).map_err(|reason| malformed(lineno, reason))?;
        }
        records.push(LifeTableRecord {
            year,
            age,
            female: rates[0],
            male: rates[1],
            total: rates[2],
        });
    }

    if records.is_empty() {
        return Err(IngestError::EmptyData {
            country: country.to_string(),
        });
    }
    Ok(records)
}

fn parse_age(token: &str) -> Option<u32> {
    if token == "110+" {
        return Some(OPEN_AGE);
    }
    token.parse::<u32>().ok().filter(|&age| age <= OPEN_AGE)
}

fn parse_rate(token: &str) -> Result<Option<f64>, String> {
    if token == "." {
        return Ok(None);
    }
    let value: f64 = token.parse().map_err(|_| format!("bad rate `{token}`"))?;
    if !value.is_finite() || value < 0.0 {
        return Err(format!("rate `{token}` is not a non-negative number"));
    }
    Ok(Some(value))
}

/// Ages x years grid of death rates for one (country, sex) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MortalityMatrix {
    country: String,
    sex: Sex,
    first_year: i32,
    /// Indexed `[age, year - first_year]`.
    rates: Array2<f64>,
}

impl MortalityMatrix {
    /// Ages are labelled `0..rates.nrows()`, years `first_year..` in steps of one.
    pub fn new(
        country: impl Into<String>,
        sex: Sex,
        first_year: i32,
        rates: Array2<f64>,
    ) -> Result<Self, IngestError> {
        let country = country.into();
        let invalid = |reason: String| IngestError::InvalidMatrix {
            country: country.clone(),
            sex,
            reason,
        };
        if rates.nrows() == 0 || rates.ncols() == 0 {
            return Err(invalid("empty rate grid".into()));
        }
        if first_year <= 0 {
            return Err(invalid(format!("first year {first_year} is not positive")));
        }
        if let Some(((age, col), v)) = rates.indexed_iter().find(|(_, v)| !v.is_finite() || **v < 0.0) {
            return Err(invalid(format!(
                "rate {v} at age {age}, year {} is not a non-negative number",
                first_year + col as i32
            )));
        }
        Ok(Self {
            country,
            sex,
            first_year,
            rates,
        })
    }

    pub fn country(&self) -> &str {
        &self.country
    }

    pub fn sex(&self) -> Sex {
        self.sex
    }

    pub fn n_ages(&self) -> usize {
        self.rates.nrows()
    }

    /// Number of years T.
    pub fn n_years(&self) -> usize {
        self.rates.ncols()
    }

    pub fn first_year(&self) -> i32 {
        self.first_year
    }

    pub fn last_year(&self) -> i32 {
        self.first_year + self.n_years() as i32 - 1
    }

    pub fn ages(&self) -> impl Iterator<Item = u32> {
        0..self.n_ages() as u32
    }

    pub fn years(&self) -> impl Iterator<Item = i32> {
        self.first_year..=self.last_year()
    }

    pub fn rates(&self) -> &Array2<f64> {
        &self.rates
    }

    pub fn rate(&self, age: u32, year: i32) -> Option<f64> {
        let col = usize::try_from(year - self.first_year).ok()?;
        self.rates.get((age as usize, col)).copied()
    }

    /// The series of one age across all years.
    pub fn age_series(&self, age: u32) -> ArrayView1<'_, f64> {
        self.rates.row(age as usize)
    }

    /// Years `[start, start + len)` as a new matrix.
    pub fn slice_years(&self, start: usize, len: usize) -> MortalityMatrix {
        MortalityMatrix {
            country: self.country.clone(),
            sex: self.sex,
            first_year: self.first_year + start as i32,
            rates: self.rates.slice(ndarray::s![.., start..start + len]).to_owned(),
        }
    }
}

/// Assembles the grid for one sex from parsed records.
pub fn build_matrix(records: &[LifeTableRecord], country: &str, sex: Sex) -> Result<MortalityMatrix, IngestError> {
    let first_year = records.iter().map(|r| r.year).min().ok_or_else(|| IngestError::EmptyData {
        country: country.to_string(),
    })?;
    let last_year = records.iter().map(|r| r.year).max().unwrap_or(first_year);
    let n_years = (last_year - first_year + 1) as usize;

    // None: no row seen. Some(None): row seen, value missing.
    let mut cells: Vec<Option<Option<f64>>> = vec![None; AGE_GROUPS * n_years];
    let mut year_seen = vec![false; n_years];
    for r in records {
        let col = (r.year - first_year) as usize;
        let idx = r.age as usize * n_years + col;
        if cells[idx].is_some() {
            return Err(IngestError::Duplicate {
                country: country.to_string(),
                year: r.year,
                age: r.age,
            });
        }
        cells[idx] = Some(r.rate(sex));
        year_seen[col] = true;
    }
    if let Some(col) = year_seen.iter().position(|seen| !seen) {
        return Err(IngestError::YearGap {
            country: country.to_string(),
            year: first_year + col as i32,
        });
    }

    for col in 0..n_years {
        for age in 0..AGE_GROUPS {
            if !matches!(cells[age * n_years + col], Some(Some(_))) {
                return Err(IngestError::Incomplete {
                    country: country.to_string(),
                    sex,
                    year: first_year + col as i32,
                    age: age as u32,
                });
            }
        }
    }
    let rates = Array2::from_shape_fn((AGE_GROUPS, n_years), |(age, col)| {
        cells[age * n_years + col].flatten().unwrap_or_default()
    });
    MortalityMatrix::new(country, sex, first_year, rates)
}

/// Matrices keyed by (country, sex), all with at least `min_years` years.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetRegistry {
    entries: BTreeMap<(String, Sex), MortalityMatrix>,
    min_years: usize,
}

impl Default for DatasetRegistry {
    fn default() -> Self {
        Self::new(1)
    }
}

impl DatasetRegistry {
    pub fn new(min_years: usize) -> Self {
        Self {
            entries: BTreeMap::new(),
            min_years: min_years.max(1),
        }
    }

    pub fn min_years(&self) -> usize {
        self.min_years
    }

    pub fn insert(&mut self, matrix: MortalityMatrix) -> Result<(), IngestError> {
        if matrix.n_years() < self.min_years {
            return Err(IngestError::TooShort {
                country: matrix.country().to_string(),
                sex: matrix.sex(),
                years: matrix.n_years(),
                min_years: self.min_years,
            });
        }
        self.entries
            .insert((matrix.country().to_string(), matrix.sex()), matrix);
        Ok(())
    }

    pub fn get(&self, country: &str, sex: Sex) -> Option<&MortalityMatrix> {
        self.entries.get(&(country.to_string(), sex))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &MortalityMatrix> {
        self.entries.values()
    }

    /// Distinct country codes, sorted.
    pub fn countries(&self) -> Vec<String> {
        let mut out: Vec<String> = self.entries.keys().map(|(c, _)| c.clone()).collect();
        out.dedup();
        out
    }

    /// Keeps only the named countries.
    pub fn retain_countries(&mut self, keep: &[String]) {
        self.entries.retain(|(c, _), _| keep.contains(c));
    }
}

/// Drops every entry shorter than `min_years`.
pub fn apply_exclusions(registry: DatasetRegistry, min_years: usize) -> DatasetRegistry {
    let min_years = min_years.max(1);
    let entries = registry
        .entries
        .into_iter()
        .filter(|(_, m)| m.n_years() >= min_years)
        .collect();
    DatasetRegistry { entries, min_years }
}

/// Outcome of loading one country file.
#[derive(Debug)]
pub struct IngestVerdict {
    pub country: String,
    pub path: PathBuf,
    pub n_years: Option<usize>,
    pub first_year: Option<i32>,
    pub excluded: Option<String>,
}

/// Country code from a file name such as `HUN.Mx_1x1.txt`.
pub fn country_code(path: &Path) -> String {
    path.file_name()
        .and_then(|n| n.to_str())
        .and_then(|n| n.split('.').next())
        .unwrap_or_default()
        .to_ascii_lowercase()
}

/// Reads one country file into its female, male and total matrices.
pub fn load_country_file(path: &Path) -> Result<Vec<MortalityMatrix>, IngestError> {
    let country = country_code(path);
    let text = fs::read_to_string(path).map_err(|source| IngestError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let records = parse_life_table(&text, &country)?;
    Sex::ALL
        .iter()
        .map(|&sex| build_matrix(&records, &country, sex))
        .collect()
}

/// Loads every `*.txt` file in `dir`. A country whose table has missing
/// cells in any sex is left out entirely; countries shorter than
/// `min_years` are then dropped.
pub fn load_directory(dir: &Path, min_years: usize) -> Result<(DatasetRegistry, Vec<IngestVerdict>), IngestError> {
    let io_err = |source| IngestError::Io {
        path: dir.to_path_buf(),
        source,
    };
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(io_err)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|ext| ext == "txt"))
        .collect();
    paths.sort();

    let mut registry = DatasetRegistry::new(1);
    let mut verdicts = Vec::with_capacity(paths.len());
    for path in paths {
        let country = country_code(&path);
        let mut verdict = IngestVerdict {
            country: country.clone(),
            path: path.clone(),
            n_years: None,
            first_year: None,
            excluded: None,
        };
        match load_country_file(&path) {
            Ok(matrices) => {
                verdict.n_years = Some(matrices[0].n_years());
                verdict.first_year = Some(matrices[0].first_year());
                if matrices[0].n_years() < min_years {
                    verdict.excluded = Some(format!(
                        "too few observations: {} years, need {min_years}",
                        matrices[0].n_years()
                    ));
                }
                for m in matrices {
                    registry.insert(m)?;
                }
            }
            Err(e) => verdict.excluded = Some(e.to_string()),
        }
        verdicts.push(verdict);
    }
    Ok((apply_exclusions(registry, min_years), verdicts))
}

/// Writes matrices as `country,sex,age,year,rate` rows.
pub fn write_canonical_csv<'a, W: Write>(
    writer: W,
    matrices: impl IntoIterator<Item = &'a MortalityMatrix>,
) -> Result<(), IngestError> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(["country", "sex", "age", "year", "rate"])?;
    for m in matrices {
        for age in m.ages() {
            for (col, year) in m.years().enumerate() {
                out.write_record([
                    m.country().to_string(),
                    m.sex().to_string(),
                    age.to_string(),
                    year.to_string(),
                    m.rates[[age as usize, col]].to_string(),
                ])?;
            }
        }
    }
    out.flush().map_err(|e| IngestError::Csv(e.into()))?;
    Ok(())
}

#[derive(Deserialize)]
struct CanonicalRow {
    country: String,
    sex: Sex,
    age: u32,
    year: i32,
    rate: f64,
}

/// Inverse of [`write_canonical_csv`].
pub fn read_canonical_csv<R: Read>(reader: R) -> Result<Vec<MortalityMatrix>, IngestError> {
    let mut grouped: BTreeMap<(String, Sex), Vec<CanonicalRow>> = BTreeMap::new();
    let mut order = Vec::new();
    for row in csv::Reader::from_reader(reader).into_deserialize::<CanonicalRow>() {
        let row = row?;
        let key = (row.country.clone(), row.sex);
        if !grouped.contains_key(&key) {
            order.push(key.clone());
        }
        grouped.entry(key).or_default().push(row);
    }
    order
        .into_iter()
        .map(|key| {
            let rows = &grouped[&key];
            let (country, sex) = key;
            let first_year = rows.iter().map(|r| r.year).min().unwrap_or(1);
            let n_years = (rows.iter().map(|r| r.year).max().unwrap_or(first_year) - first_year + 1) as usize;
            let n_ages = rows.iter().map(|r| r.age as usize + 1).max().unwrap_or(0);
            let mut rates = Array2::from_elem((n_ages, n_years), f64::NAN);
            for r in rows {
                rates[[r.age as usize, (r.year - first_year) as usize]] = r.rate;
            }
            MortalityMatrix::new(country, sex, first_year, rates)
        })
        .collect()
}

/// Renders female, male and total matrices of one country in the 1x1
/// text layout, readable by [`parse_life_table`].
pub fn format_life_table(
    title: &str,
    female: &MortalityMatrix,
    male: &MortalityMatrix,
    total: &MortalityMatrix,
) -> String {
    let mut out = format!("{title}, Death rates (period 1x1)\n\n");
    out.push_str("  Year          Age             Female            Male           Total\n");
    for (col, year) in total.years().enumerate() {
        for age in total.ages() {
            let label = if age == OPEN_AGE {
                "110+".to_string()
            } else {
                age.to_string()
            };
            let a = age as usize;
            out.push_str(&format!(
                "  {year}  {label:>10}  {:>16}  {:>16}  {:>16}\n",
                female.rates[[a, col]],
                male.rates[[a, col]],
                total.rates[[a, col]],
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "Hungary, Death rates (period 1x1)\n\
        \n  Year          Age             Female            Male           Total\n\
        1990  0  0.009837  0.012322  0.011097\n\
        1990  110+  .  0.500000  0.450000\n";

    fn complete_records(years: std::ops::RangeInclusive<i32>) -> Vec<LifeTableRecord> {
        years
            .flat_map(|year| {
                (0..AGE_GROUPS as u32).map(move |age| LifeTableRecord {
                    year,
                    age,
                    female: Some(0.001 * (age + 1) as f64),
                    male: Some(0.002 * (age + 1) as f64),
                    total: Some(0.0015 * (age + 1) as f64),
                })
            })
            .collect()
    }

    #[test]
    fn parses_plain_row() {
        let recs = parse_life_table(SAMPLE, "hun").unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(
            recs[0],
            LifeTableRecord {
                year: 1990,
                age: 0,
                female: Some(0.009837),
                male: Some(0.012322),
                total: Some(0.011097)
            }
        );
    }

    #[test]
    fn maps_open_age_and_missing_values() {
        let recs = parse_life_table(SAMPLE, "hun").unwrap();
        assert_eq!(recs[1].age, 110);
        assert_eq!(recs[1].female, None);
        assert_eq!(recs[1].male, Some(0.5));
        assert_eq!(recs[1].total, Some(0.45));
    }

    #[test]
    fn rejects_bad_age_with_line_number() {
        let text = "Year Age Female Male Total\n1990  0  0.1 0.1 0.1\n1990  abc  0.1 0.1 0.1\n";
        match parse_life_table(text, "xyz") {
            Err(IngestError::Malformed { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected malformed error, got {other:?}"),
        }
    }

    #[test]
    fn rejects_wrong_column_count() {
        let text = "Year Age Female Male Total\n1990 0 0.1 0.1\n";
        assert!(matches!(
            parse_life_table(text, "xyz"),
            Err(IngestError::Malformed { line: 2, .. })
        ));
    }

    #[test]
    fn rejects_empty_data_and_missing_header() {
        assert!(matches!(
            parse_life_table("Year Age Female Male Total\n\n", "x"),
            Err(IngestError::EmptyData { .. })
        ));
        assert!(matches!(
            parse_life_table("1990 0 0.1 0.1 0.1\n", "x"),
            Err(IngestError::MissingHeader { .. })
        ));
    }

    #[test]
    fn builds_complete_matrix() {
        let m = build_matrix(&complete_records(1990..=1991), "aus", Sex::Total).unwrap();
        assert_eq!(m.n_years(), 2);
        assert_eq!(m.n_ages(), AGE_GROUPS);
        assert_eq!(m.rate(5, 1991), Some(0.0015 * 6.0));
    }

    #[test]
    fn incomplete_table_names_first_missing_cell() {
        let mut recs = complete_records(1990..=1995);
        let idx = recs.iter().position(|r| r.year == 1995 && r.age == 40).unwrap();
        recs[idx].total = None;
        match build_matrix(&recs, "aus", Sex::Total) {
            Err(IngestError::Incomplete { year, age, .. }) => assert_eq!((year, age), (1995, 40)),
            other => panic!("expected incomplete error, got {other:?}"),
        }
        // other sexes of the same rows are still complete
        assert!(build_matrix(&recs, "aus", Sex::Male).is_ok());
    }

    #[test]
    fn absent_row_is_incomplete() {
        let mut recs = complete_records(1990..=1991);
        recs.retain(|r| !(r.year == 1991 && r.age == 7));
        assert!(matches!(
            build_matrix(&recs, "aus", Sex::Female),
            Err(IngestError::Incomplete { year: 1991, age: 7, .. })
        ));
    }

    #[test]
    fn year_gap_is_contiguity_error() {
        let mut recs = complete_records(1990..=1995);
        recs.retain(|r| r.year != 1993);
        assert!(matches!(
            build_matrix(&recs, "aus", Sex::Total),
            Err(IngestError::YearGap { year: 1993, .. })
        ));
    }

    #[test]
    fn duplicate_row_rejected() {
        let mut recs = complete_records(1990..=1990);
        recs.push(recs[3]);
        assert!(matches!(
            build_matrix(&recs, "aus", Sex::Total),
            Err(IngestError::Duplicate { year: 1990, age: 3, .. })
        ));
    }

    fn matrix_with_years(country: &str, years: usize) -> MortalityMatrix {
        MortalityMatrix::new(country, Sex::Total, 1900, Array2::from_elem((AGE_GROUPS, years), 0.01)).unwrap()
    }

    #[test]
    fn exclusions_keep_long_entries() {
        let mut reg = DatasetRegistry::new(1);
        for (c, t) in [("aaa", 90), ("bbb", 25), ("ccc", 60)] {
            reg.insert(matrix_with_years(c, t)).unwrap();
        }
        let kept = apply_exclusions(reg.clone(), 30);
        assert_eq!(kept.countries(), vec!["aaa".to_string(), "ccc".to_string()]);
        assert_eq!(apply_exclusions(reg.clone(), 1), reg);
        assert_eq!(apply_exclusions(kept.clone(), 30), kept);
    }

    #[test]
    fn registry_rejects_short_insert() {
        let mut reg = DatasetRegistry::new(30);
        assert!(matches!(
            reg.insert(matrix_with_years("aaa", 10)),
            Err(IngestError::TooShort { years: 10, .. })
        ));
    }

    #[test]
    fn zero_rates_accepted() {
        let m = MortalityMatrix::new("aaa", Sex::Total, 1950, Array2::zeros((AGE_GROUPS, 3)));
        assert!(m.is_ok());
        let neg = MortalityMatrix::new("aaa", Sex::Total, 1950, Array2::from_elem((2, 2), -1.0));
        assert!(neg.is_err());
    }

    #[test]
    fn life_table_text_reparses() {
        let f = build_matrix(&complete_records(2000..=2002), "aus", Sex::Female).unwrap();
        let m = build_matrix(&complete_records(2000..=2002), "aus", Sex::Male).unwrap();
        let t = build_matrix(&complete_records(2000..=2002), "aus", Sex::Total).unwrap();
        let text = format_life_table("Synthetic", &f, &m, &t);
        let recs = parse_life_table(&text, "aus").unwrap();
        assert_eq!(recs.len(), 3 * AGE_GROUPS);
        assert_eq!(build_matrix(&recs, "aus", Sex::Male).unwrap(), m);
    }
}
