use std::fs;

use mortcast_core::hmd::{
    apply_exclusions, format_life_table, load_directory, parse_life_table, read_canonical_csv, write_canonical_csv,
    DatasetRegistry, MortalityMatrix, Sex, AGE_GROUPS,
};
use ndarray::Array2;
use proptest::prelude::*;

fn matrix(country: &str, sex: Sex, first_year: i32, years: usize, scale: f64) -> MortalityMatrix {
    let rates = Array2::from_shape_fn((AGE_GROUPS, years), |(x, t)| scale * 1e-4 * (1.09f64).powi(x as i32) * 0.98f64.powi(t as i32));
    MortalityMatrix::new(country, sex, first_year, rates).unwrap()
}

fn country_text(code: &str, first_year: i32, years: usize) -> String {
    let f = matrix(code, Sex::Female, first_year, years, 0.8);
    let m = matrix(code, Sex::Male, first_year, years, 1.2);
    let t = matrix(code, Sex::Total, first_year, years, 1.0);
    format_life_table(code, &f, &m, &t)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn canonical_csv_round_trip(
        ages in 1usize..6,
        years in 1usize..8,
        first_year in 1800i32..2020,
        values in prop::collection::vec(prop_oneof![Just(0.0), 0.0f64..3.0, 1e-300f64..1e-250], 48),
    ) {
        let rates = Array2::from_shape_fn((ages, years), |(x, t)| values[(x * years + t) % values.len()]);
        let m = MortalityMatrix::new("abc", Sex::Male, first_year, rates).unwrap();
        let mut buf = Vec::new();
        write_canonical_csv(&mut buf, [&m]).unwrap();
        let back = read_canonical_csv(buf.as_slice()).unwrap();
        prop_assert_eq!(back.len(), 1);
        prop_assert_eq!(&back[0], &m);
        for (a, b) in back[0].rates().iter().zip(m.rates()) {
            prop_assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn parser_keeps_every_data_row(
        rows in prop::collection::vec((1900i32..2000, 0u32..111, prop::option::of(0.0f64..2.0)), 1..60),
    ) {
        let mut text = String::from("Somewhere, Death rates\n\n  Year  Age  Female  Male  Total\n");
        for (y, a, v) in &rows {
            let age = if *a == 110 { "110+".to_string() } else { a.to_string() };
            let cell = v.map_or(".".to_string(), |v| v.to_string());
            text.push_str(&format!("{y} {age} {cell} 0.5 {cell}\n"));
        }
        let records = parse_life_table(&text, "xyz").unwrap();
        prop_assert_eq!(records.len(), rows.len());
        for (r, (y, a, v)) in records.iter().zip(&rows) {
            prop_assert_eq!((r.year, r.age, r.female, r.total), (*y, *a, *v, *v));
        }
    }
}

#[test]
fn exclusions_are_idempotent() {
    let mut reg = DatasetRegistry::new(1);
    for (c, t) in [("aaa", 90), ("bbb", 25), ("ccc", 60)] {
        reg.insert(matrix(c, Sex::Total, 1900, t, 1.0)).unwrap();
    }
    let once = apply_exclusions(reg.clone(), 30);
    assert_eq!(once.countries(), vec!["aaa", "ccc"]);
    assert_eq!(apply_exclusions(once.clone(), 30), once);
    assert_eq!(apply_exclusions(reg.clone(), 1).len(), reg.len());
}

#[test]
fn forty_candidates_leave_thirty_five() {
    let dir = tempfile::tempdir().unwrap();
    for i in 0..40 {
        let code = format!("c{i:02}");
        let years = if i < 4 { 20 } else { 35 };
        let mut text = country_text(&code, 1970, years);
        if i == 4 {
            text = text
                .lines()
                .map(|line| match line.split_whitespace().collect::<Vec<_>>().as_slice() {
                    ["1980", "40", f, m, _] => format!("1980 40 {f} {m} ."),
                    _ => line.to_string(),
                })
                .collect::<Vec<_>>()
                .join("\n");
        }
        fs::write(dir.path().join(format!("{}.Mx_1x1.txt", code.to_uppercase())), text).unwrap();
    }
    let (reg, verdicts) = load_directory(dir.path(), 30).unwrap();
    assert_eq!(verdicts.len(), 40);
    assert_eq!(reg.countries().len(), 35);
    assert_eq!(reg.len(), 35 * 3);
    let excluded: Vec<&str> = verdicts.iter().filter(|v| v.excluded.is_some()).map(|v| v.country.as_str()).collect();
    assert_eq!(excluded, vec!["c00", "c01", "c02", "c03", "c04"]);
    let incomplete = verdicts.iter().find(|v| v.country == "c04").unwrap();
    assert!(incomplete.excluded.as_ref().unwrap().contains("incomplete"));
}
