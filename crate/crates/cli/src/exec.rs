//! Parallel execution of experiments and sweeps.

use std::time::Instant;

use coded_caching_core::sim::{
    analyze, apply_axis, Experiment, ExperimentResult, ExperimentSpec, SweepAxis, SweepRow,
};
use coded_caching_core::Result;
type CliResult<T> = std::result::Result<T, CliError>;
use rayon::prelude::*;

use crate::error::CliError;

/// Runs the trials of `spec` on the current rayon pool.
///
/// Trials draw from their own substreams and are collected in trial order, so
/// the result equals the sequential `run_experiment` apart from `wall_clock`.
pub fn run_parallel(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    let start = Instant::now();
    let experiment = Experiment::prepare(spec)?;
    let outcomes = (0..spec.trials)
        .into_par_iter()
        .map(|t| experiment.run_trial(t))
        .collect::<Result<Vec<_>>>()?;
    let mut result = experiment.aggregate(&outcomes);
    result.wall_clock = Some(start.elapsed().as_secs_f64());
    Ok(result)
}

/// Analytic rows for every value, evaluated in parallel.
pub fn analyze_sweep(
    template: &ExperimentSpec,
    axis: SweepAxis,
    values: &[f64],
) -> Result<Vec<SweepRow>> {
    values
        .par_iter()
        .map(|&value| {
            let spec = apply_axis(template, axis, value)?;
            let q = spec.popularity.build(spec.params.files)?;
            let analytic = analyze(&spec.params, &q, spec.policy)?;
            Ok(SweepRow {
                axis,
                value,
                spec,
                analytic,
                result: None,
            })
        })
        .collect()
}

/// Simulated rows; points run one after another, trials within a point in
/// parallel.
pub fn simulate_sweep(
    template: &ExperimentSpec,
    axis: SweepAxis,
    values: &[f64],
) -> Result<Vec<SweepRow>> {
    coded_caching_core::sim::sweep_with(template, axis, values, run_parallel)
}

/// Runs `f` on a pool of `threads` workers, or the global pool when `None`.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> CliResult<T> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(CliError::Config("--threads must be positive".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| CliError::Other(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use coded_caching_core::model::SystemParams;
    use coded_caching_core::sim::{run_experiment, Policy, Popularity};

    #[test]
    fn parallel_matches_sequential() {
        let mut spec = ExperimentSpec::new(
            SystemParams::new(6, 8, 2.0, 6, 31).unwrap(),
            Popularity::Zipf { alpha: 0.7 },
            Policy::Uniform,
        );
        spec.trials = 24;
        spec.keep_trial_rates = true;
        let seq = run_experiment(&spec).unwrap();
        for threads in [1, 3] {
            let mut par = with_threads(Some(threads), || run_parallel(&spec))
                .unwrap()
                .unwrap();
            assert!(par.wall_clock.is_some());
            par.wall_clock = None;
            assert_eq!(par, seq);
        }
    }
}
