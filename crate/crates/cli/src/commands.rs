//! The `analyze`, `simulate` and `verify` commands.

use std::path::{Path, PathBuf};

use coded_caching_core::delivery::build_conflict_graph;
use coded_caching_core::sim::{analyze, Experiment, SweepAxis, SweepRow};

use crate::config::Plan;
use crate::error::CliError;
use crate::exec;
use crate::output::{csv_table, json_summary, write_all};
use crate::verify::{run_all, VerifyOptions, VerifyReport};

fn single_row(plan: &Plan, simulate: bool) -> Result<SweepRow, CliError> {
    let spec = plan.template.clone();
    let (analytic, result) = if simulate {
        let result = exec::run_parallel(&spec)?;
        (result.analytic.clone(), Some(result))
    } else {
        let q = spec.popularity.build(spec.params.files)?;
        (analyze(&spec.params, &q, spec.policy)?, None)
    };
    Ok(SweepRow {
        axis: SweepAxis::CacheSize,
        value: spec.params.cache_size,
        spec,
        analytic,
        result,
    })
}

fn rows(plan: &Plan, simulate: bool) -> Result<(Vec<SweepRow>, bool), CliError> {
    match &plan.sweep {
        None => Ok((vec![single_row(plan, simulate)?], true)),
        Some((axis, values)) if simulate => {
            Ok((exec::simulate_sweep(&plan.template, *axis, values)?, false))
        }
        Some((axis, values)) => Ok((exec::analyze_sweep(&plan.template, *axis, values)?, false)),
    }
}

/// Analytic bounds per sweep point: `<name>.analyze.csv` and `.json`.
pub fn cmd_analyze(plan: &Plan, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let (rows, single) = rows(plan, false)?;
    let files = vec![
        (
            format!("{}.analyze.csv", plan.name),
            csv_table(&rows, false, single)?,
        ),
        (
            format!("{}.analyze.json", plan.name),
            json_summary("analyze", &rows, single)?,
        ),
    ];
    write_all(out, &files)
}

/// Simulation plus bounds per sweep point: `<name>.simulate.csv` and `.json`,
/// and with `dump_first_trial` the graph and caches of the first point's
/// first trial.
pub fn cmd_simulate(plan: &Plan, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let (rows, single) = rows(plan, true)?;
    for row in &rows {
        if let Some(r) = &row.result {
            eprintln!(
                "{} = {}: mean rate {:.6} +- {:.6}, bound {:.6}, {:.2}s",
                row.axis.name(),
                row.value,
                r.mean_rate,
                r.ci95,
                r.analytic.bound.rub,
                r.wall_clock.unwrap_or(0.0)
            );
        }
    }
    let mut files = vec![
        (
            format!("{}.simulate.csv", plan.name),
            csv_table(&rows, true, single)?,
        ),
        (
            format!("{}.simulate.json", plan.name),
            json_summary("simulate", &rows, single)?,
        ),
    ];
    if plan.dump_first_trial {
        if let Some(row) = rows.first() {
            let experiment = Experiment::prepare(&row.spec)?;
            let caches = experiment.caches_for(0)?;
            let graph = build_conflict_graph(&caches, &experiment.demands_for(0))?;
            files.push((
                format!("{}.trial1.graph", plan.name),
                crate::dump::write_metis(&graph),
            ));
            files.push((
                format!("{}.trial1.caches", plan.name),
                crate::dump::write_caches(&caches),
            ));
        }
    }
    let undecoded = rows
        .iter()
        .filter_map(|r| r.result.as_ref())
        .any(|r| r.verified && r.decode_passes != r.trials);
    let written = write_all(out, &files)?;
    if undecoded {
        return Err(CliError::Verification(
            "decode verification failed on some trials".into(),
        ));
    }
    Ok(written)
}

/// Runs the oracle suites and fails unless all pass.
pub fn cmd_verify(opts: &VerifyOptions) -> Result<VerifyReport, CliError> {
    let report = run_all(opts);
    print!("{}", report.render());
    if report.passed() {
        Ok(report)
    } else {
        let failed: Vec<&str> = report
            .suites
            .iter()
            .filter(|s| !s.passed())
            .map(|s| s.name)
            .collect();
        Err(CliError::Verification(format!(
            "failing suites: {}",
            failed.join(", ")
        )))
    }
}
