//! Monte-Carlo estimation of the delivery rate.
//!
//! A trial places caches, draws demands, colors the conflict graph and records
//! `min(K / B, D)`. With decode verification on, random payloads are encoded
//! and every user decodes its request. Each trial draws from its own
//! [`Substream`], so trials can run in any order or in parallel and aggregate
//! to the same result.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::analysis::{self, RateBound, DEFAULT_RAP_BUDGET};
use crate::delivery::{
    build_conflict_graph, decode, delivery_rate, encode, greedy_color, OrderPolicy, PayloadTable,
};
use crate::error::{invalid, Error, Result};
use crate::math::{self, Substream};
use crate::model::{sample_demands, zipf, DemandRealization, PopularityDist, SystemParams};
use crate::placement::{
    fill_caches, lfu_dist, random_lfu_dist, uniform_dist, CacheConfig, CachingDist,
};

/// Default cap on the projected conflict-graph size `n * B`.
pub const DEFAULT_MAX_VERTICES: usize = 2_000_000;
/// Default payload block size for decode verification, in bytes.
pub const DEFAULT_PAYLOAD_LEN: usize = 32;
pub const DEFAULT_TRIALS: usize = 200;

const STREAM_PLACEMENT: u64 = 1;
const STREAM_DEMANDS: u64 = 2;
const STREAM_PAYLOADS: u64 = 3;

/// How the popularity distribution is specified.
#[derive(Debug, Clone, PartialEq)]
pub enum Popularity {
    Zipf { alpha: f64 },
    Explicit(Vec<f64>),
}

impl Popularity {
    pub fn build(&self, files: usize) -> Result<PopularityDist> {
        match self {
            Popularity::Zipf { alpha } => zipf(files, *alpha),
            Popularity::Explicit(q) if q.len() == files => PopularityDist::from_probs(q.clone()),
            Popularity::Explicit(q) => Err(invalid(format!(
                "explicit popularity lists {} files but m = {files}",
                q.len()
            ))),
        }
    }
}

/// Support size of Random LFU.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MTilde {
    /// Minimize the rate upper bound by one-dimensional search.
    Auto,
    Fixed(usize),
}

/// Caching policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Policy {
    /// Caching distribution optimized over the whole feasible set.
    Rap {
        budget: usize,
    },
    RandomLfu(MTilde),
    Lfu,
    Uniform,
    /// No caching; every distinct requested file is sent once.
    NaiveMulticast,
}

impl Policy {
    pub fn name(&self) -> &'static str {
        match self {
            Policy::Rap { .. } => "rap",
            Policy::RandomLfu(_) => "random_lfu",
            Policy::Lfu => "lfu",
            Policy::Uniform => "uniform",
            Policy::NaiveMulticast => "naive",
        }
    }

    pub fn rap() -> Self {
        Policy::Rap {
            budget: DEFAULT_RAP_BUDGET,
        }
    }
}

/// Whether caches are re-drawn for every trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PlacementMode {
    /// One placement shared by all trials; trials are then i.i.d. given it.
    Fixed,
    #[default]
    FreshPerTrial,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub params: SystemParams,
    pub popularity: Popularity,
    pub policy: Policy,
    pub trials: usize,
    pub placement: PlacementMode,
    pub coloring: OrderPolicy,
    pub verify_decode: bool,
    pub payload_len: usize,
    pub max_vertices: usize,
    /// Keep every trial's rate in the result.
    pub keep_trial_rates: bool,
}

impl ExperimentSpec {
    pub fn new(params: SystemParams, popularity: Popularity, policy: Policy) -> Self {
        Self {
            params,
            popularity,
            policy,
            trials: DEFAULT_TRIALS,
            placement: PlacementMode::default(),
            coloring: OrderPolicy::default(),
            verify_decode: true,
            payload_len: DEFAULT_PAYLOAD_LEN,
            max_vertices: DEFAULT_MAX_VERTICES,
            keep_trial_rates: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.trials == 0 {
            return Err(invalid("trials must be at least 1"));
        }
        if let Policy::RandomLfu(MTilde::Fixed(mt)) = self.policy {
            if mt < crate::placement::min_m_tilde(self.params.cache_size) || mt > self.params.files
            {
                return Err(invalid(format!("m_tilde = {mt} outside [ceil(M), m]")));
            }
        }
        if let Popularity::Zipf { alpha } = self.popularity {
            if !alpha.is_finite() || alpha < 0.0 {
                return Err(invalid(format!(
                    "alpha = {alpha} must be finite and non-negative"
                )));
            }
        }
        Ok(())
    }
}

/// Analytic view of one parameter point.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticPoint {
    /// Caching distribution of the policy; `None` when nothing is cached.
    pub dist: Option<CachingDist>,
    /// Rate upper bound of the policy.
    pub bound: RateBound,
    /// Random LFU support size, where the policy has one.
    pub m_tilde: Option<usize>,
    pub lfu_rate: f64,
    pub uniform_rub: f64,
}

/// Caching distribution, bound and support size of `policy` at one point.
pub fn analyze(params: &SystemParams, q: &PopularityDist, policy: Policy) -> Result<AnalyticPoint> {
    let (n, m, cache) = (params.users, params.files, params.cache_size);
    let mbar = analysis::mbar(q, n);
    let naive = RateBound {
        psi: n as f64,
        mbar,
        rub: mbar,
    };
    let lfu_rate = analysis::lfu_rate(q, n, cache);
    let uniform_rub = if cache > 0.0 {
        analysis::uniform_rub(q, n, cache)?.rub
    } else {
        mbar
    };
    let point = |dist: Option<CachingDist>, bound, m_tilde| AnalyticPoint {
        dist,
        bound,
        m_tilde,
        lfu_rate,
        uniform_rub,
    };
    if cache == 0.0 || policy == Policy::NaiveMulticast {
        return Ok(point(None, naive, None));
    }
    let with_dist = |dist: CachingDist, m_tilde| -> Result<AnalyticPoint> {
        let bound = analysis::rate_upper_bound(&dist, q, n)?;
        Ok(point(Some(dist), bound, m_tilde))
    };
    match policy {
        Policy::Rap { budget } => {
            let sol = analysis::optimize_rap(q, n, cache, budget)?;
            Ok(point(Some(sol.dist), sol.bound, Some(sol.m_tilde)))
        }
        Policy::RandomLfu(MTilde::Auto) => {
            let (mt, _) = analysis::search_mtilde(q, n, cache)?;
            with_dist(random_lfu_dist(m, cache, mt)?, Some(mt))
        }
        Policy::RandomLfu(MTilde::Fixed(mt)) => with_dist(random_lfu_dist(m, cache, mt)?, Some(mt)),
        Policy::Lfu => {
            let dist = lfu_dist(m, cache)?;
            let mt = crate::placement::min_m_tilde(cache);
            with_dist(dist, Some(mt))
        }
        Policy::Uniform => with_dist(uniform_dist(m, cache)?, Some(m)),
        Policy::NaiveMulticast => unreachable!("handled above"),
    }
}

/// Outcome of one trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub rate: f64,
    pub colors: usize,
    pub vertices: usize,
    pub distinct_files: usize,
    /// `None` when verification is off.
    pub decoded: Option<bool>,
}

/// Aggregated experiment statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub trials: usize,
    pub mean_rate: f64,
    pub std_dev: f64,
    /// Half-width of the 95% normal-approximation confidence interval.
    pub ci95: f64,
    pub trial_rates: Option<Vec<f64>>,
    pub analytic: AnalyticPoint,
    /// Trials in which every user decoded its request; equals `trials` when
    /// verification is on and delivery is correct, `0` when it is off.
    pub decode_passes: usize,
    pub verified: bool,
    /// Seconds; filled in by runners that measure time.
    pub wall_clock: Option<f64>,
}

impl ExperimentResult {
    pub fn decode_pass_rate(&self) -> Option<f64> {
        self.verified
            .then(|| self.decode_passes as f64 / self.trials as f64)
    }
}

/// A validated experiment with its analytic point resolved.
#[derive(Debug, Clone)]
pub struct Experiment {
    spec: ExperimentSpec,
    popularity: PopularityDist,
    analytic: AnalyticPoint,
    fixed_caches: Option<CacheConfig>,
}

impl Experiment {
    pub fn prepare(spec: &ExperimentSpec) -> Result<Self> {
        spec.validate()?;
        let params = &spec.params;
        let projected = params.users.saturating_mul(params.packets);
        if projected > spec.max_vertices {
            return Err(Error::ResourceGuard {
                vertices: projected,
                n: params.users,
                packets: params.packets,
                cap: spec.max_vertices,
            });
        }
        let popularity = spec.popularity.build(params.files)?;
        let analytic = analyze(params, &popularity, spec.policy)?;
        let mut experiment = Self {
            spec: spec.clone(),
            popularity,
            analytic,
            fixed_caches: None,
        };
        if spec.placement == PlacementMode::Fixed {
            experiment.fixed_caches = Some(experiment.place(0)?);
        }
        Ok(experiment)
    }

    pub fn spec(&self) -> &ExperimentSpec {
        &self.spec
    }

    pub fn popularity(&self) -> &PopularityDist {
        &self.popularity
    }

    pub fn analytic(&self) -> &AnalyticPoint {
        &self.analytic
    }

    fn root(&self) -> Substream {
        Substream::new(self.spec.params.seed)
    }

    fn place(&self, trial: usize) -> Result<CacheConfig> {
        match &self.analytic.dist {
            None => Ok(CacheConfig::empty(&self.spec.params)),
            Some(dist) => fill_caches(
                dist,
                &self.spec.params,
                self.root().child(STREAM_PLACEMENT).child(trial as u64),
            ),
        }
    }

    /// Cache placement used by `trial`.
    pub fn caches_for(&self, trial: usize) -> Result<CacheConfig> {
        match &self.fixed_caches {
            Some(c) => Ok(c.clone()),
            None => self.place(trial),
        }
    }

    /// Demands drawn in `trial`. Independent of the packet count and placement.
    pub fn demands_for(&self, trial: usize) -> DemandRealization {
        let mut rng = self.root().child(STREAM_DEMANDS).child(trial as u64).rng();
        sample_demands(&self.popularity, self.spec.params.users, &mut rng)
    }

    pub fn run_trial(&self, trial: usize) -> Result<TrialOutcome> {
        let params = &self.spec.params;
        let owned;
        let caches = match &self.fixed_caches {
            Some(c) => c,
            None => {
                owned = self.place(trial)?;
                &owned
            }
        };
        let demands = self.demands_for(trial);
        let graph = build_conflict_graph(caches, &demands)?;
        let coloring = greedy_color(&graph, self.spec.coloring);
        let rate = delivery_rate(&coloring, &demands, params.packets);
        let decoded = if self.spec.verify_decode {
            let mut rng = self.root().child(STREAM_PAYLOADS).child(trial as u64).rng();
            let payloads = PayloadTable::random(
                params.files,
                params.packets,
                self.spec.payload_len,
                &mut rng,
            );
            let code = encode(&graph, &coloring, &payloads)?;
            let ok =
                (0..params.users).all(|u| match decode(u, &code, caches, &demands, &payloads) {
                    Ok(got) => got
                        .iter()
                        .all(|(p, data)| payloads.get(*p) == Some(data.as_slice())),
                    Err(_) => false,
                });
            Some(ok)
        } else {
            None
        };
        use crate::delivery::Graph;
        Ok(TrialOutcome {
            rate,
            colors: coloring.count(),
            vertices: graph.order(),
            distinct_files: demands.distinct_files(),
            decoded,
        })
    }

    /// Combines trial outcomes given in trial order.
    pub fn aggregate(&self, outcomes: &[TrialOutcome]) -> ExperimentResult {
        let rates: Vec<f64> = outcomes.iter().map(|o| o.rate).collect();
        let (mean_rate, std_dev, ci95) = math::mean_std_ci95(&rates);
        ExperimentResult {
            trials: outcomes.len(),
            mean_rate,
            std_dev,
            ci95,
            trial_rates: self.spec.keep_trial_rates.then_some(rates),
            analytic: self.analytic.clone(),
            decode_passes: outcomes.iter().filter(|o| o.decoded == Some(true)).count(),
            verified: self.spec.verify_decode,
            wall_clock: None,
        }
    }
}

/// Runs every trial sequentially.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    let experiment = Experiment::prepare(spec)?;
    let outcomes = (0..spec.trials)
        .map(|t| experiment.run_trial(t))
        .collect::<Result<Vec<_>>>()?;
    Ok(experiment.aggregate(&outcomes))
}

/// Parameter varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    CacheSize,
    Users,
    Files,
    Alpha,
    /// Packets per file; a diagnostic axis for finite-packetization effects.
    Packets,
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::CacheSize => "M",
            SweepAxis::Users => "n",
            SweepAxis::Files => "m",
            SweepAxis::Alpha => "alpha",
            SweepAxis::Packets => "B",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "M" | "cache_size" => SweepAxis::CacheSize,
            "n" | "users" => SweepAxis::Users,
            "m" | "files" => SweepAxis::Files,
            "alpha" => SweepAxis::Alpha,
            "B" | "packets" => SweepAxis::Packets,
            _ => return None,
        })
    }
}

fn as_count(axis: SweepAxis, value: f64) -> Result<usize> {
    if value >= 1.0 && libm::trunc(value) == value && value <= u32::MAX as f64 {
        Ok(value as usize)
    } else {
        Err(invalid(format!(
            "{} = {value} must be a positive integer",
            axis.name()
        )))
    }
}

/// Copy of `template` with `axis` set to `value`.
pub fn apply_axis(
    template: &ExperimentSpec,
    axis: SweepAxis,
    value: f64,
) -> Result<ExperimentSpec> {
    let mut spec = template.clone();
    match axis {
        SweepAxis::CacheSize => spec.params.cache_size = value,
        SweepAxis::Users => spec.params.users = as_count(axis, value)?,
        SweepAxis::Files => {
            if matches!(spec.popularity, Popularity::Explicit(_)) {
                return Err(invalid("cannot sweep m with an explicit popularity list"));
            }
            spec.params.files = as_count(axis, value)?;
        }
        SweepAxis::Packets => spec.params.packets = as_count(axis, value)?,
        SweepAxis::Alpha => match &mut spec.popularity {
            Popularity::Zipf { alpha } => *alpha = value,
            Popularity::Explicit(_) => {
                return Err(invalid(
                    "cannot sweep alpha with an explicit popularity list",
                ))
            }
        },
    }
    spec.validate()?;
    Ok(spec)
}

/// One sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub axis: SweepAxis,
    pub value: f64,
    pub spec: ExperimentSpec,
    pub analytic: AnalyticPoint,
    pub result: Option<ExperimentResult>,
}

/// Analytic pipeline only, one row per value.
pub fn sweep_analytic(
    template: &ExperimentSpec,
    axis: SweepAxis,
    values: &[f64],
) -> Result<Vec<SweepRow>> {
    values
        .iter()
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

/// Simulation plus analytics for every value, using `runner` for each point.
pub fn sweep_with<F>(
    template: &ExperimentSpec,
    axis: SweepAxis,
    values: &[f64],
    mut runner: F,
) -> Result<Vec<SweepRow>>
where
    F: FnMut(&ExperimentSpec) -> Result<ExperimentResult>,
{
    values
        .iter()
        .map(|&value| {
            let spec = apply_axis(template, axis, value)?;
            let result = runner(&spec)?;
            Ok(SweepRow {
                axis,
                value,
                analytic: result.analytic.clone(),
                spec,
                result: Some(result),
            })
        })
        .collect()
}

/// [`sweep_with`] using the sequential [`run_experiment`].
pub fn sweep(template: &ExperimentSpec, axis: SweepAxis, values: &[f64]) -> Result<Vec<SweepRow>> {
    sweep_with(template, axis, values, run_experiment)
}

/// Short human-readable description of a policy, e.g. `random_lfu(auto)`.
pub fn describe_policy(policy: &Policy) -> String {
    match policy {
        Policy::RandomLfu(MTilde::Auto) => String::from("random_lfu(auto)"),
        Policy::RandomLfu(MTilde::Fixed(mt)) => format!("random_lfu({mt})"),
        other => String::from(other.name()),
    }
}
