//! Oracle suites behind the `verify` command.

use std::fmt::Write as _;

use coded_caching_core::analysis::{psi, rate_upper_bound, rho_matrix};
use coded_caching_core::delivery::{
    build_conflict_graph, exact_chromatic, greedy_color, DenseGraph, Graph, OrderPolicy,
    DEFAULT_EXACT_CAP,
};
use coded_caching_core::math::Substream;
use coded_caching_core::model::{DemandRealization, FileId, PopularityDist, SystemParams};
use coded_caching_core::placement::{random_lfu_dist, CacheConfig, CachingDist};
use coded_caching_core::sim::{run_experiment, ExperimentSpec, MTilde, Policy, Popularity};
use rand::Rng;

use crate::oracle;

/// Deliberate defects for checking that the suites can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Fault {
    #[default]
    None,
    /// Toggles one vertex pair of the implementation's edge set.
    EdgeFlip,
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub seeds: u64,
    pub base_seed: u64,
    pub rho_samples: usize,
    pub fault: Fault,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            seeds: 20,
            base_seed: 0,
            rho_samples: 200_000,
            fault: Fault::None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub cases: usize,
    pub failures: Vec<String>,
}

impl SuiteResult {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            cases: 0,
            failures: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub suites: Vec<SuiteResult>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(SuiteResult::passed)
    }

    /// One line per suite, followed by up to five counterexamples each.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for s in &self.suites {
            let status = if s.passed() { "PASS" } else { "FAIL" };
            let _ = writeln!(
                out,
                "{status} {} ({} cases, {} failures)",
                s.name,
                s.cases,
                s.failures.len()
            );
            for f in s.failures.iter().take(5) {
                let _ = writeln!(out, "    {f}");
            }
        }
        out
    }
}

pub fn run_all(opts: &VerifyOptions) -> VerifyReport {
    VerifyReport {
        suites: vec![
            edge_rule_suite(opts),
            coloring_suite(opts),
            rho_suite(opts),
            psi_suite(opts),
            decode_suite(opts),
        ],
    }
}

fn stream(opts: &VerifyOptions, suite: u64, seed: u64) -> Substream {
    Substream::new(opts.base_seed).child(suite).child(seed)
}

/// Caches with every packet held independently with probability `density`.
fn random_caches<R: Rng>(params: &SystemParams, density: f64, rng: &mut R) -> CacheConfig {
    let sets = (0..params.users)
        .map(|_| {
            (0..params.files)
                .map(|_| {
                    (0..params.packets as u32)
                        .filter(|_| rng.gen_bool(density))
                        .collect()
                })
                .collect()
        })
        .collect();
    CacheConfig::from_sets(params, sets).expect("budget M = m admits any cache")
}

fn random_popularity<R: Rng>(files: usize, rng: &mut R) -> PopularityDist {
    let w: Vec<f64> = (0..files).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = w.iter().sum();
    let mut q: Vec<f64> = w.iter().map(|x| x / total).collect();
    if rng.gen_bool(0.2) {
        // Exercise zero-probability files too.
        let last = files - 1;
        if files > 1 {
            q[0] += q[last];
            q[last] = 0.0;
        }
    }
    PopularityDist::from_probs(q).expect("normalized")
}

/// A feasible caching distribution: either a Random LFU corner or a random
/// point reached from uniform by capacity-respecting mass transfers.
fn random_caching<R: Rng>(files: usize, cache: f64, rng: &mut R) -> CachingDist {
    let lo = coded_caching_core::placement::min_m_tilde(cache);
    if rng.gen_bool(0.3) {
        let mt = rng.gen_range(lo..=files);
        return random_lfu_dist(files, cache, mt).expect("feasible support");
    }
    let mut x = vec![cache / files as f64; files];
    for _ in 0..3 * files {
        let (i, j) = (rng.gen_range(0..files), rng.gen_range(0..files));
        if i != j {
            let room = x[i].min(1.0 - x[j]);
            let t = if rng.gen_bool(0.3) {
                room
            } else {
                rng.gen_range(0.0..=room)
            };
            x[i] -= t;
            x[j] += t;
        }
    }
    let p = x.iter().map(|xf| (xf / cache).max(0.0)).collect();
    CachingDist::new(p, cache).expect("transfers keep the distribution feasible")
}

fn describe(l: oracle::Label) -> String {
    format!("(user {}, file {}, packet {})", l.0 + 1, l.1, l.2 + 1)
}

/// Edge set of random small conflict graphs against the brute-force rule.
pub fn edge_rule_suite(opts: &VerifyOptions) -> SuiteResult {
    let mut res = SuiteResult::new("edge-rule");
    let mut injected = opts.fault != Fault::EdgeFlip;
    for seed in 0..opts.seeds {
        let mut rng = stream(opts, 1, seed).rng();
        let n = rng.gen_range(1..=4);
        let m = rng.gen_range(1..=3);
        let b = rng.gen_range(1..=3);
        let params = SystemParams::new(n, m, m as f64, b, seed).expect("valid sizes");
        let caches = random_caches(&params, rng.gen_range(0.0..=1.0), &mut rng);
        let demands: Vec<FileId> = (0..n)
            .map(|_| FileId::from_index(rng.gen_range(0..m)))
            .collect();
        let demands = DemandRealization::new(demands, m).expect("files in range");
        let graph = build_conflict_graph(&caches, &demands).expect("consistent instance");
        let mut got = oracle::labeled_edges(&graph);
        if !injected && graph.order() >= 2 {
            let pair = (oracle::label(&graph, 0), oracle::label(&graph, 1));
            if !got.remove(&pair) {
                got.insert(pair);
            }
            injected = true;
        }
        let want = oracle::brute_force_edges(&caches, &demands);
        res.cases += 1;
        for &(a, b) in got.symmetric_difference(&want) {
            let claim = if got.contains(&(a, b)) {
                "edge"
            } else {
                "no edge"
            };
            res.failures.push(format!(
                "seed {seed}: {} and {}: implementation has {claim}, rule says otherwise",
                describe(a),
                describe(b)
            ));
        }
    }
    res
}

/// Greedy colorings are proper and never beat the chromatic number; the exact
/// solver agrees with plain enumeration.
pub fn coloring_suite(opts: &VerifyOptions) -> SuiteResult {
    let mut res = SuiteResult::new("coloring");
    for seed in 0..opts.seeds {
        let mut rng = stream(opts, 2, seed).rng();
        let order = rng.gen_range(0..=12);
        let density = rng.gen_range(0.0..=1.0);
        let mut g = DenseGraph::new(order);
        for a in 0..order {
            for b in a + 1..order {
                if rng.gen_bool(density) {
                    g.add_edge(a, b);
                }
            }
        }
        let chi = oracle::brute_force_chromatic(&g);
        res.cases += 1;
        match exact_chromatic(&g, DEFAULT_EXACT_CAP) {
            Ok(k) if k == chi => {}
            other => res.failures.push(format!(
                "seed {seed}: exact solver {other:?}, enumeration {chi}"
            )),
        }
        let policies = [
            OrderPolicy::DegreeDescending,
            OrderPolicy::Dsatur,
            OrderPolicy::RandomRestarts { restarts: 8, seed },
        ];
        for policy in policies {
            let c = greedy_color(&g, policy);
            if let Some((a, b)) = c.conflict(&g) {
                res.failures.push(format!(
                    "seed {seed}: {policy:?} colors edge ({a}, {b}) alike"
                ));
            }
            if c.count() < chi {
                res.failures.push(format!(
                    "seed {seed}: {policy:?} used {} colors, below chi = {chi}",
                    c.count()
                ));
            }
        }
    }
    res
}

/// Closed-form `rho` against sampled argmax frequencies, 5 sigma per entry.
pub fn rho_suite(opts: &VerifyOptions) -> SuiteResult {
    let mut res = SuiteResult::new("rho-monte-carlo");
    for seed in 0..opts.seeds {
        let mut rng = stream(opts, 3, seed).rng();
        let m = rng.gen_range(1..=4);
        let n = rng.gen_range(1..=6);
        let cache = rng.gen_range(1..=m) as f64 * if rng.gen_bool(0.5) { 1.0 } else { 0.5 };
        let q = random_popularity(m, &mut rng);
        let p = random_caching(m, cache, &mut rng);
        let rho = rho_matrix(&p, &q, n).expect("valid inputs");
        let x: Vec<f64> = p.probs().iter().map(|pf| (pf * cache).min(1.0)).collect();
        let freq = oracle::rho_monte_carlo(&x, q.probs(), n, opts.rho_samples, &mut rng);
        res.cases += 1;
        for l in 1..=n {
            for (f, &got) in freq[l - 1].iter().enumerate() {
                let exact = rho.row(l)[f];
                let sigma = (exact * (1.0 - exact) / opts.rho_samples as f64)
                    .max(0.0)
                    .sqrt();
                if (got - exact).abs() > 5.0 * sigma + 1e-12 {
                    res.failures.push(format!(
                        "seed {seed}: rho[file {}, l = {l}] = {exact}, sampled {got} (n = {n}, x = {x:?}, q = {:?})",
                        f + 1,
                        q.probs()
                    ));
                }
            }
        }
    }
    res
}

/// Floating-point `psi` and bound against exact rational evaluation.
pub fn psi_suite(opts: &VerifyOptions) -> SuiteResult {
    let mut res = SuiteResult::new("psi-rational");
    for seed in 0..opts.seeds {
        let mut rng = stream(opts, 4, seed).rng();
        let m = rng.gen_range(1..=5);
        let n = rng.gen_range(1..=8);
        let cache = rng.gen_range(0.5..=m as f64);
        let q = random_popularity(m, &mut rng);
        let p = random_caching(m, cache, &mut rng);
        let x: Vec<_> = p
            .probs()
            .iter()
            .map(|pf| oracle::rational((pf * cache).min(1.0)))
            .collect();
        let qr = oracle::rational_dist(q.probs());
        let want = oracle::to_f64(&oracle::psi_rational(&x, &qr, n));
        let want_rub = oracle::to_f64(&oracle::rub_rational(&x, &qr, n));
        let got = psi(&p, &q, n).expect("valid inputs");
        let got_rub = rate_upper_bound(&p, &q, n).expect("valid inputs").rub;
        res.cases += 1;
        for (what, g, w) in [("psi", got, want), ("rub", got_rub, want_rub)] {
            if (g - w).abs() > 1e-9 * w.abs().max(1.0) {
                res.failures.push(format!(
                    "seed {seed}: {what} = {g}, exact {w} (n = {n}, M = {cache}, p = {:?}, q = {:?})",
                    p.probs(),
                    q.probs()
                ));
            }
        }
        if m <= 3 && n <= 5 {
            for l in 1..=n {
                if oracle::rho_rational(&x, &qr, n, l) != oracle::rho_enumerated(&x, &qr, n, l) {
                    res.failures.push(format!(
                        "seed {seed}: rho ranking disagrees with enumeration at l = {l}"
                    ));
                }
            }
        }
    }
    res
}

/// Every policy at a random small point: every user decodes every trial.
pub fn decode_suite(opts: &VerifyOptions) -> SuiteResult {
    let mut res = SuiteResult::new("decode");
    for seed in 0..opts.seeds {
        let mut rng = stream(opts, 5, seed).rng();
        let spec = random_decode_spec(&mut rng, seed, 5);
        res.cases += 1;
        match run_experiment(&spec) {
            Ok(r) if r.decode_passes == r.trials => {}
            Ok(r) => res.failures.push(format!(
                "seed {seed}: {}/{} trials decoded ({:?})",
                r.decode_passes, r.trials, spec
            )),
            Err(e) => res.failures.push(format!("seed {seed}: {e} ({spec:?})")),
        }
    }
    res
}

/// Random point with `n, m <= 10`, `B <= 8`, `M in {0, 1, 2}` and a random
/// policy, decode verification on.
pub fn random_decode_spec<R: Rng>(rng: &mut R, seed: u64, trials: usize) -> ExperimentSpec {
    let n = rng.gen_range(1..=10);
    let m = rng.gen_range(2..=10);
    let b = rng.gen_range(1..=8);
    let cache = [0.0, 1.0, 2.0][rng.gen_range(0..3)];
    let policy = match rng.gen_range(0..6) {
        0 => Policy::Rap { budget: 2_000 },
        1 => Policy::RandomLfu(MTilde::Auto),
        2 => Policy::RandomLfu(MTilde::Fixed(rng.gen_range(2..=m))),
        3 => Policy::Lfu,
        4 => Policy::Uniform,
        _ => Policy::NaiveMulticast,
    };
    let popularity = if rng.gen_bool(0.5) {
        Popularity::Zipf {
            alpha: rng.gen_range(0.0..2.0),
        }
    } else {
        Popularity::Explicit(random_popularity(m, rng).probs().to_vec())
    };
    let params = SystemParams::new(n, m, cache, b, seed).expect("valid sizes");
    let mut spec = ExperimentSpec::new(params, popularity, policy);
    spec.trials = trials;
    spec.verify_decode = true;
    spec
}
