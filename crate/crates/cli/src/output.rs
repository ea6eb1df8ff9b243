//! CSV and JSON emission.
//!
//! `analyze` CSV columns:
//! `axis, value, policy, m_tilde, rub, psi, mbar, lfu_rate, uniform_rub`.
//! `simulate` appends `mean_rate, ci95, decode_pass_rate, trials, B`.
//!
//! `axis` is `none` and `value` empty for a single point; `m_tilde` and
//! `decode_pass_rate` are empty when undefined. CSV numbers carry 6
//! significant digits; the JSON summary keeps full precision.

use std::fs;
use std::path::{Path, PathBuf};

use coded_caching_core::sim::{describe_policy, SweepRow};
use serde::Serialize;

use crate::error::CliError;

pub const ANALYZE_COLUMNS: [&str; 9] = [
    "axis",
    "value",
    "policy",
    "m_tilde",
    "rub",
    "psi",
    "mbar",
    "lfu_rate",
    "uniform_rub",
];
pub const SIMULATE_COLUMNS: [&str; 5] = ["mean_rate", "ci95", "decode_pass_rate", "trials", "B"];

/// Formats `x` with 6 significant digits and no trailing zeros.
pub fn sig6(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let rounded: f64 = format!("{x:.5e}").parse().expect("formatted float parses");
    rounded.to_string()
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

/// Renders the CSV for `rows`; `simulate` adds the empirical columns.
pub fn csv_table(
    rows: &[SweepRow],
    simulate: bool,
    single_point: bool,
) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header: Vec<&str> = ANALYZE_COLUMNS.to_vec();
    if simulate {
        header.extend(SIMULATE_COLUMNS);
    }
    let csv_err = |e: csv::Error| CliError::Other(format!("csv: {e}"));
    w.write_record(&header).map_err(csv_err)?;
    for row in rows {
        let a = &row.analytic;
        let (axis, value) = if single_point {
            ("none".to_string(), String::new())
        } else {
            (row.axis.name().to_string(), sig6(row.value))
        };
        let mut record = vec![
            axis,
            value,
            describe_policy(&row.spec.policy),
            opt(a.m_tilde),
            sig6(a.bound.rub),
            sig6(a.bound.psi),
            sig6(a.bound.mbar),
            sig6(a.lfu_rate),
            sig6(a.uniform_rub),
        ];
        if simulate {
            let r = row
                .result
                .as_ref()
                .ok_or_else(|| CliError::Other("row without simulation".into()))?;
            record.extend([
                sig6(r.mean_rate),
                sig6(r.ci95),
                opt(r.decode_pass_rate().map(sig6)),
                r.trials.to_string(),
                row.spec.params.packets.to_string(),
            ]);
        }
        w.write_record(&record).map_err(csv_err)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| CliError::Other(format!("csv: {e}")))?;
    String::from_utf8(bytes).map_err(|e| CliError::Other(e.to_string()))
}

#[derive(Debug, Serialize)]
struct JsonSummary<'a> {
    command: &'a str,
    axis: Option<&'static str>,
    points: Vec<JsonPoint>,
}

#[derive(Debug, Serialize)]
struct JsonPoint {
    value: Option<f64>,
    users: usize,
    files: usize,
    cache_size: f64,
    packets: usize,
    seed: u64,
    policy: String,
    m_tilde: Option<usize>,
    caching_dist: Option<Vec<f64>>,
    rub: f64,
    psi: f64,
    mbar: f64,
    lfu_rate: f64,
    uniform_rub: f64,
    simulation: Option<JsonSimulation>,
}

#[derive(Debug, Serialize)]
struct JsonSimulation {
    trials: usize,
    mean_rate: f64,
    std_dev: f64,
    ci95: f64,
    decode_passes: Option<usize>,
    decode_pass_rate: Option<f64>,
    trial_rates: Option<Vec<f64>>,
}

/// Full-precision summary. Wall-clock times are left out so repeated runs are
/// byte-identical.
pub fn json_summary(
    command: &str,
    rows: &[SweepRow],
    single_point: bool,
) -> Result<String, CliError> {
    let points = rows
        .iter()
        .map(|row| {
            let a = &row.analytic;
            let p = &row.spec.params;
            JsonPoint {
                value: (!single_point).then_some(row.value),
                users: p.users,
                files: p.files,
                cache_size: p.cache_size,
                packets: p.packets,
                seed: p.seed,
                policy: describe_policy(&row.spec.policy),
                m_tilde: a.m_tilde,
                caching_dist: a.dist.as_ref().map(|d| d.probs().to_vec()),
                rub: a.bound.rub,
                psi: a.bound.psi,
                mbar: a.bound.mbar,
                lfu_rate: a.lfu_rate,
                uniform_rub: a.uniform_rub,
                simulation: row.result.as_ref().map(|r| JsonSimulation {
                    trials: r.trials,
                    mean_rate: r.mean_rate,
                    std_dev: r.std_dev,
                    ci95: r.ci95,
                    decode_passes: r.verified.then_some(r.decode_passes),
                    decode_pass_rate: r.decode_pass_rate(),
                    trial_rates: r.trial_rates.clone(),
                }),
            }
        })
        .collect();
    let summary = JsonSummary {
        command,
        axis: if single_point {
            None
        } else {
            rows.first().map(|r| r.axis.name())
        },
        points,
    };
    let mut text =
        serde_json::to_string_pretty(&summary).map_err(|e| CliError::Other(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

/// Writes all `files` into `dir`, removing the ones already written if any
/// write fails.
pub fn write_all(dir: &Path, files: &[(String, String)]) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::io(format!("cannot create {}", dir.display()), e))?;
    let mut written = Vec::new();
    for (name, contents) in files {
        let path = dir.join(name);
        if let Err(e) = fs::write(&path, contents) {
            for p in &written {
                let _ = fs::remove_file(p);
            }
            let _ = fs::remove_file(&path);
            return Err(CliError::io(format!("cannot write {}", path.display()), e));
        }
        written.push(path);
    }
    Ok(written)
}
