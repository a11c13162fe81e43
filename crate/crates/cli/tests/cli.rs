use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn hrris_sim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hrris-sim"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn csv_lines(path: &Path) -> Vec<String> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(str::to_owned)
        .collect()
}

#[test]
fn run_writes_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("results");
    let o = hrris_sim(&[
        "run",
        "--figure",
        "fig4_pa0dBm",
        "--out",
        out.to_str().unwrap(),
        "--trials",
        "1",
        "--sweep",
        "0,20",
        "--scheme",
        "random_ris,fixed_hr",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let lines = csv_lines(&out.join("fig4_pa0dBm.csv"));
    assert_eq!(
        lines[0],
        "scheme,sweep_variable,sweep_value,mean_se_bpshz,mean_power_w,mean_ee_bpj,trials,seed"
    );
    assert_eq!(lines.len(), 5);
    assert!(lines[1].starts_with("random_ris,p_bs_dbm,0,"));
    assert!(lines[4].starts_with("fixed_hr,p_bs_dbm,20,"));
    assert!(lines[1..].iter().all(|l| l.ends_with(",1,2021")));

    let manifest: toml::Table = fs::read_to_string(out.join("fig4_pa0dBm.manifest.toml"))
        .unwrap()
        .parse()
        .unwrap();
    assert_eq!(manifest["seed"].as_integer(), Some(2021));
    assert_eq!(manifest["csv"].as_str(), Some("fig4_pa0dBm.csv"));
    assert_eq!(
        manifest["version"].as_str(),
        Some(env!("CARGO_PKG_VERSION"))
    );
    assert_eq!(manifest["spec"]["trials"].as_integer(), Some(1));
}

#[test]
fn figure_runs_every_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let o = hrris_sim(&[
        "run",
        "--figure",
        "fig5",
        "--out-dir",
        dir.path().to_str().unwrap(),
        "--trials",
        "1",
        "--sweep",
        "50",
        "--scheme",
        "ao_ris",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for id in ["fig5_ms40", "fig5_ms100"] {
        assert_eq!(csv_lines(&dir.path().join(format!("{id}.csv"))).len(), 2);
        assert!(dir.path().join(format!("{id}.manifest.toml")).exists());
    }
}

#[test]
fn sequential_and_parallel_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let mut files = Vec::new();
    for (sub, extra) in [("a", None), ("b", Some("--sequential")), ("c", None)] {
        let out = dir.path().join(sub);
        let mut args = vec![
            "run",
            "--figure",
            "fig6_pa0dBm",
            "--out",
            out.to_str().unwrap(),
            "--trials",
            "1",
        ];
        args.extend(["--sweep", "1,3", "--seed", "9"]);
        args.extend(extra);
        assert!(hrris_sim(&args).status.success());
        files.push(fs::read(out.join("fig6_pa0dBm.csv")).unwrap());
    }
    assert_eq!(files[0], files[1]);
    assert_eq!(files[0], files[2]);
}

#[test]
fn sweep_reads_a_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.cfg");
    fs::write(
        &cfg,
        "preset = \"fig7_pa10dBm\"\nfigure_id = \"small\"\nschemes = [\"ao_ris\", \"dynamic_hr\"]\nsweep_values = [20]\ntrials = 4\npower.p_switch = 0.01\n",
    )
    .unwrap();
    let out = dir.path().join("out");
    let o = hrris_sim(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--trials",
        "2",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let lines = csv_lines(&out.join("small.csv"));
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("ao_ris,n,20,"));
    assert!(lines[2].starts_with("dynamic_hr,n,20,"));
    assert!(lines[1].ends_with(",2,2021"));
}

#[test]
fn fast_flag_lowers_trials() {
    let dir = tempfile::tempdir().unwrap();
    let o = hrris_sim(&[
        "run",
        "--figure",
        "fig9_pa0dBm",
        "--out",
        dir.path().to_str().unwrap(),
        "--fast",
        "--sweep",
        "1",
        "--scheme",
        "random_ris",
    ]);
    assert!(o.status.success());
    assert!(csv_lines(&dir.path().join("fig9_pa0dBm.csv"))[1].ends_with(",25,2021"));
}

#[test]
fn bad_input_fails_with_a_message() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    for args in [
        vec!["run", "--figure", "fig12", "--out", d],
        vec!["run", "--figure", "fig4", "--out", d, "--trials", "0"],
        vec![
            "run", "--figure", "fig4", "--out", d, "--scheme", "teleport",
        ],
        vec!["sweep", "--config", "/nonexistent.cfg", "--out", d],
    ] {
        let o = hrris_sim(&args);
        assert!(!o.status.success(), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
    assert_eq!(fs::read_dir(d).unwrap().count(), 0);
}
