//! CSV figure data and the run manifest.

use std::fs;
use std::path::Path;

use serde::Serialize;

use super::{ExperimentError, ExperimentSpec, Scheme, SweepResult, SweepRow, SweepVariable};

pub const CSV_HEADER: [&str; 8] = [
    "scheme",
    "sweep_variable",
    "sweep_value",
    "mean_se_bpshz",
    "mean_power_w",
    "mean_ee_bpj",
    "trials",
    "seed",
];

/// `x` rounded to `digits` significant digits, printed like C's `%.{digits}g`.
pub fn format_sig(x: f64, digits: usize) -> String {
    assert!(digits >= 1);
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { "0".into() } else { x.to_string() };
    }
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        let m = trim_zeros(mantissa);
        return format!("{m}e{exp}");
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{:.*}", decimals, x)).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

const SIG_DIGITS: usize = 10;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> ExperimentError + '_ {
    move |source| ExperimentError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> ExperimentError + '_ {
    move |source| ExperimentError::Csv {
        path: path.to_path_buf(),
        source,
    }
}

pub fn write_csv(result: &SweepResult, path: &Path) -> Result<(), ExperimentError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(CSV_HEADER).map_err(csv_err(path))?;
    for r in &result.rows {
        w.write_record([
            r.scheme.name().to_string(),
            r.sweep_variable.name().to_string(),
            format_sig(r.sweep_value, SIG_DIGITS),
            format_sig(r.mean_se_bpshz, SIG_DIGITS),
            format_sig(r.mean_power_w, SIG_DIGITS),
            format_sig(r.mean_ee_bpj, SIG_DIGITS),
            r.trials.to_string(),
            r.seed.to_string(),
        ])
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

pub fn read_csv(path: &Path) -> Result<Vec<SweepRow>, ExperimentError> {
    let mut rdr = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let header = rdr.headers().map_err(csv_err(path))?.clone();
    if header.iter().ne(CSV_HEADER) {
        return Err(ExperimentError::Parse {
            path: path.to_path_buf(),
            message: format!("unexpected header {header:?}"),
        });
    }
    let parse_err = |message: String| ExperimentError::Parse {
        path: path.to_path_buf(),
        message,
    };
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err(path))?;
        let num = |i: usize| -> Result<f64, ExperimentError> {
            rec[i]
                .parse()
                .map_err(|e| parse_err(format!("{}: {e}", CSV_HEADER[i])))
        };
        rows.push(SweepRow {
            scheme: rec[0]
                .parse::<Scheme>()
                .map_err(|e| parse_err(e.to_string()))?,
            sweep_variable: rec[1]
                .parse::<SweepVariable>()
                .map_err(|e| parse_err(e.to_string()))?,
            sweep_value: num(2)?,
            mean_se_bpshz: num(3)?,
            mean_power_w: num(4)?,
            mean_ee_bpj: num(5)?,
            trials: rec[6]
                .parse()
                .map_err(|e| parse_err(format!("trials: {e}")))?,
            seed: rec[7]
                .parse()
                .map_err(|e| parse_err(format!("seed: {e}")))?,
        });
    }
    Ok(rows)
}

/// What produced a CSV file.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub figure_id: String,
    pub seed: u64,
    pub csv: String,
    pub resamples: u64,
    pub parallel: bool,
    pub spec: ExperimentSpec,
}

impl Manifest {
    pub fn new(
        spec: &ExperimentSpec,
        result: &SweepResult,
        csv_name: &str,
        parallel: bool,
    ) -> Self {
        Self {
            tool: "hrris-sim".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            figure_id: spec.figure_id.clone(),
            seed: spec.seed,
            csv: csv_name.into(),
            resamples: result.total_resamples(),
            parallel,
            spec: spec.clone(),
        }
    }
}

pub fn write_manifest(manifest: &Manifest, path: &Path) -> Result<(), ExperimentError> {
    let text = toml::to_string(manifest).map_err(|e| ExperimentError::Config(e.to_string()))?;
    fs::write(path, text).map_err(io_err(path))
}
