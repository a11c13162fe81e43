use std::fs;

use hrris::experiment::{
    preset, read_csv, run_experiment, write_csv, write_manifest, ExperimentSpec, Manifest, Scheme,
    SweepResult, SweepRow, SweepVariable, CSV_HEADER,
};

fn small_spec() -> ExperimentSpec {
    let mut spec = preset("fig4_pa0dBm").unwrap().remove(0);
    spec.sweep_values = vec![10.0, 25.0];
    spec.trials = 3;
    spec.scenario.n = 12;
    spec
}

#[test]
fn empty_result_writes_only_the_header() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nested/empty.csv");
    let empty = SweepResult {
        figure_id: "empty".into(),
        rows: Vec::new(),
        records: Vec::new(),
    };
    write_csv(&empty, &path).unwrap();
    assert_eq!(
        fs::read_to_string(&path).unwrap(),
        format!("{}\n", CSV_HEADER.join(","))
    );
    assert!(read_csv(&path).unwrap().is_empty());
}

#[test]
fn one_row_is_two_lines() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("one.csv");
    let row = SweepRow {
        scheme: Scheme::DynamicHr,
        sweep_variable: SweepVariable::K,
        sweep_value: 3.0,
        mean_se_bpshz: 11.123456789012,
        mean_power_w: 329.8,
        mean_ee_bpj: 337_263.5,
        trials: 100,
        seed: 2021,
    };
    let result = SweepResult {
        figure_id: "one".into(),
        rows: vec![row],
        records: Vec::new(),
    };
    write_csv(&result, &path).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    assert_eq!(
        text,
        "scheme,sweep_variable,sweep_value,mean_se_bpshz,mean_power_w,mean_ee_bpj,trials,seed\n\
         dynamic_hr,k,3,11.12345679,329.8,337263.5,100,2021\n"
    );
}

#[test]
fn csv_round_trip_reproduces_rows() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rt.csv");
    let result = run_experiment(&small_spec()).unwrap();
    write_csv(&result, &path).unwrap();
    let back = read_csv(&path).unwrap();
    assert_eq!(back.len(), result.rows.len());
    let close = |a: f64, b: f64| (a - b).abs() <= 5e-10 * a.abs().max(b.abs());
    for (a, b) in result.rows.iter().zip(&back) {
        assert_eq!(
            (a.scheme, a.sweep_variable, a.trials, a.seed),
            (b.scheme, b.sweep_variable, b.trials, b.seed)
        );
        assert_eq!(a.sweep_value, b.sweep_value);
        assert!(close(a.mean_se_bpshz, b.mean_se_bpshz));
        assert!(close(a.mean_power_w, b.mean_power_w));
        assert!(close(a.mean_ee_bpj, b.mean_ee_bpj));
    }
}

#[test]
fn rerun_with_one_trial_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = small_spec();
    spec.trials = 1;
    let mut files = Vec::new();
    for name in ["a.csv", "b.csv"] {
        let path = dir.path().join(name);
        write_csv(&run_experiment(&spec).unwrap(), &path).unwrap();
        files.push(fs::read(path).unwrap());
    }
    assert_eq!(files[0], files[1]);
}

#[test]
fn manifest_echoes_the_spec() {
    let dir = tempfile::tempdir().unwrap();
    let spec = small_spec();
    let result = run_experiment(&spec).unwrap();
    let path = dir.path().join("m.toml");
    write_manifest(&Manifest::new(&spec, &result, "x.csv", true), &path).unwrap();
    let table: toml::Table = fs::read_to_string(&path).unwrap().parse().unwrap();
    assert_eq!(table["seed"].as_integer(), Some(spec.seed as i64));
    assert_eq!(table["csv"].as_str(), Some("x.csv"));
    assert_eq!(table["version"].as_str(), Some(env!("CARGO_PKG_VERSION")));
    let echoed = ExperimentSpec::from_toml(&toml::to_string(&table["spec"]).unwrap()).unwrap();
    assert_eq!(echoed, spec);
}

#[test]
fn doubling_trials_stays_within_the_standard_error() {
    let mut spec = preset("fig4_pa0dBm").unwrap().remove(0);
    spec.sweep_values = vec![20.0];
    spec.trials = 20;
    let short = run_experiment(&spec).unwrap();
    spec.trials = 40;
    let long = run_experiment(&spec).unwrap();
    for scheme in &spec.schemes {
        let se: Vec<f64> = long.records_for(*scheme, 20.0).map(|r| r.se).collect();
        let n = se.len() as f64;
        let mean = se.iter().sum::<f64>() / n;
        let var = se.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let std_err = (var / n).sqrt();
        let a = short.row(*scheme, 20.0).unwrap().mean_se_bpshz;
        let b = long.row(*scheme, 20.0).unwrap().mean_se_bpshz;
        assert!(
            (a - b).abs() < 3.0 * std_err,
            "{scheme}: {a} vs {b}, standard error {std_err}"
        );
    }
}
