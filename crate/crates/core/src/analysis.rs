//! Closed-form expected-rate bounds and caching-distribution search.
//!
//! The expected rate of coloring-based delivery under caching distribution `p`
//! is bounded by `min(psi(p, q), mbar)`:
//!
//! * `mbar = sum_f 1 - (1 - q_f)^n` is the expected number of distinct
//!   requested files, i.e. the rate of naive multicast;
//! * `psi(p, q) = sum_l C(n, l) sum_f rho_{f,l} (1 - p_f M)^(n-l+1) (p_f M)^(l-1)`,
//!   where `rho_{f,l}` is the probability that `f` maximizes
//!   `(p_j M)^(l-1) (1 - p_j M)^(n-l+1)` among the files requested by `l`
//!   random users.
//!
//! `rho` has an exact closed form: rank files by that term (ties to the
//! smaller id); `f` wins iff it is requested and no higher-ranked file is, so
//! `rho_{f,l} = (1 - T_f)^l - (1 - T_f - q_f)^l` with `T_f` the popularity mass
//! ranked above `f`. Files sharing the same `p_f` share the same term, so
//! `psi` only needs the popularity mass of each distinct `p` value; this keeps
//! Random LFU evaluations at `O(n)` even for large libraries.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::math::{
    self, ln_choose, ln_pow, ln_pow_complement, one_minus_pow_complement, pow_difference,
};
use crate::model::{FileId, PopularityDist};
use crate::placement::{min_m_tilde, random_lfu_dist, uniform_dist, CachingDist};

/// Both branches of the rate upper bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateBound {
    pub psi: f64,
    pub mbar: f64,
    /// `min(psi, mbar)`.
    pub rub: f64,
}

/// Expected number of distinct files requested by `n` i.i.d. users.
pub fn mbar(q: &PopularityDist, users: usize) -> f64 {
    math::sum(
        q.probs()
            .iter()
            .map(|&qf| one_minus_pow_complement(qf, users as f64)),
    )
}

/// `rho_{f,l}` for `l = 1..=n` and every file.
#[derive(Debug, Clone, PartialEq)]
pub struct RhoMatrix {
    users: usize,
    files: usize,
    data: Vec<f64>,
}

impl RhoMatrix {
    pub fn users(&self) -> usize {
        self.users
    }

    pub fn files(&self) -> usize {
        self.files
    }

    /// `rho_{f,l}` for `l` in `1..=n`.
    pub fn get(&self, file: FileId, level: usize) -> f64 {
        self.row(level)[file.index()]
    }

    /// All files at subset size `level`, indexed by 0-based file position.
    pub fn row(&self, level: usize) -> &[f64] {
        assert!(
            (1..=self.users).contains(&level),
            "subset size out of range"
        );
        &self.data[(level - 1) * self.files..level * self.files]
    }
}

fn check_inputs(p: &CachingDist, q: &PopularityDist, users: usize) -> Result<()> {
    if p.files() != q.files() {
        return Err(invalid(format!(
            "caching distribution has {} files, popularity has {}",
            p.files(),
            q.files()
        )));
    }
    if users == 0 {
        return Err(invalid("n must be at least 1"));
    }
    Ok(())
}

/// Log of the per-file term `(x)^(l-1) (1 - x)^(n-l+1)` with `x = p_f M`.
fn ln_term(x: f64, users: usize, level: usize) -> f64 {
    ln_pow(x, (level - 1) as u64) + ln_pow_complement(x, (users - level + 1) as u64)
}

/// Exact `rho_{f,l}` via the ranking argument.
pub fn rho_matrix(p: &CachingDist, q: &PopularityDist, users: usize) -> Result<RhoMatrix> {
    check_inputs(p, q, users)?;
    let m = q.files();
    let xs: Vec<f64> = p
        .probs()
        .iter()
        .map(|&pf| (pf * p.cache_size()).min(1.0))
        .collect();
    let mut data = vec![0.0; users * m];
    let mut order: Vec<usize> = (0..m).collect();
    let mut keys = vec![0.0; m];
    for level in 1..=users {
        for f in 0..m {
            keys[f] = ln_term(xs[f], users, level);
        }
        order.sort_by(|&a, &b| keys[b].total_cmp(&keys[a]).then(a.cmp(&b)));
        let row = &mut data[(level - 1) * m..level * m];
        let mut above = math::CompensatedSum::new();
        for &f in &order {
            let remaining = (1.0 - above.value()).max(0.0);
            row[f] = pow_difference(remaining, q.probs()[f].min(remaining), level as u64);
            above.add(q.probs()[f]);
        }
    }
    Ok(RhoMatrix {
        users,
        files: m,
        data,
    })
}

/// Files grouped by identical caching probability.
struct Group {
    x: f64,
    mass: f64,
    first_file: usize,
}

fn groups(p: &[f64], cache_size: f64, q: &[f64]) -> Vec<Group> {
    let mut idx: Vec<usize> = (0..p.len()).filter(|&f| q[f] > 0.0).collect();
    idx.sort_by(|&a, &b| p[a].total_cmp(&p[b]).then(a.cmp(&b)));
    let mut out: Vec<(f64, math::CompensatedSum, usize)> = Vec::new();
    for f in idx {
        match out.last_mut() {
            Some((pv, mass, first)) if *pv == p[f] => {
                mass.add(q[f]);
                *first = (*first).min(f);
            }
            _ => {
                let mut mass = math::CompensatedSum::new();
                mass.add(q[f]);
                out.push((p[f], mass, f));
            }
        }
    }
    out.into_iter()
        .map(|(pv, mass, first)| Group {
            x: (pv * cache_size).min(1.0),
            mass: mass.value(),
            first_file: first,
        })
        .collect()
}

/// Per-level contributions `C(n, l) sum_f rho_{f,l} x_f^(l-1) (1 - x_f)^(n-l+1)`.
fn psi_levels_raw(p: &[f64], cache_size: f64, q: &[f64], users: usize) -> Vec<Vec<f64>> {
    let groups = groups(p, cache_size, q);
    let mut order: Vec<usize> = (0..groups.len()).collect();
    let mut keys = vec![0.0; groups.len()];
    (1..=users)
        .map(|level| {
            for (g, key) in groups.iter().zip(keys.iter_mut()) {
                *key = ln_term(g.x, users, level);
            }
            order.sort_by(|&a, &b| {
                keys[b]
                    .total_cmp(&keys[a])
                    .then(groups[a].first_file.cmp(&groups[b].first_file))
            });
            let ln_binom = ln_choose(users as u64, level as u64);
            let mut above = math::CompensatedSum::new();
            let mut terms = Vec::new();
            for &g in &order {
                let remaining = (1.0 - above.value()).max(0.0);
                let rho = pow_difference(remaining, groups[g].mass.min(remaining), level as u64);
                above.add(groups[g].mass);
                if rho > 0.0 && keys[g] > f64::NEG_INFINITY {
                    terms.push(libm::exp(ln_binom + keys[g] + libm::log(rho)));
                }
            }
            terms
        })
        .collect()
}

fn psi_raw(p: &[f64], cache_size: f64, q: &[f64], users: usize) -> f64 {
    let terms: Vec<f64> = psi_levels_raw(p, cache_size, q, users)
        .into_iter()
        .flatten()
        .collect();
    math::sum_descending(terms)
}

/// `psi(p, q)` evaluated term by term in the log domain.
pub fn psi(p: &CachingDist, q: &PopularityDist, users: usize) -> Result<f64> {
    check_inputs(p, q, users)?;
    Ok(psi_raw(p.probs(), p.cache_size(), q.probs(), users))
}

/// Contribution of each subset size `l = 1..=n` to `psi`.
pub fn psi_by_level(p: &CachingDist, q: &PopularityDist, users: usize) -> Result<Vec<f64>> {
    check_inputs(p, q, users)?;
    Ok(psi_levels_raw(p.probs(), p.cache_size(), q.probs(), users)
        .into_iter()
        .map(math::sum_descending)
        .collect())
}

/// `min(psi, mbar)` with both branches.
pub fn rate_upper_bound(p: &CachingDist, q: &PopularityDist, users: usize) -> Result<RateBound> {
    let psi = psi(p, q, users)?;
    let mbar = mbar(q, users);
    Ok(RateBound {
        psi,
        mbar,
        rub: psi.min(mbar),
    })
}

/// Rate of LFU: the `floor(M)` most popular files are cached whole and every
/// other requested file is multicast once.
pub fn lfu_rate(q: &PopularityDist, users: usize, cache_size: f64) -> f64 {
    let cached = libm::floor(cache_size + 1e-9).max(0.0) as usize;
    math::sum(
        q.probs()
            .iter()
            .skip(cached)
            .map(|&qf| one_minus_pow_complement(qf, users as f64)),
    )
}

/// Rate upper bound of uniform caching over the whole library.
pub fn uniform_rub(q: &PopularityDist, users: usize, cache_size: f64) -> Result<RateBound> {
    rate_upper_bound(&uniform_dist(q.files(), cache_size)?, q, users)
}

/// Support size suggested for `0 <= alpha < 1`:
/// `min((n (1 - alpha) M / m)^(1/alpha) m, m)`, rounded to the nearest integer
/// and clamped into `[ceil(M), m]`.
///
/// At `alpha = 0` the expression is taken at its limit: `m` when `n M / m >= 1`,
/// otherwise `0` (clamped up to `ceil(M)`).
pub fn mtilde_theorem1(users: usize, files: usize, cache_size: f64, alpha: f64) -> Result<usize> {
    if !alpha.is_finite() || !(0.0..1.0).contains(&alpha) {
        return Err(Error::WrongRegime { alpha });
    }
    if files == 0 || users == 0 || !(0.0..=files as f64).contains(&cache_size) {
        return Err(invalid("mtilde needs n, m >= 1 and 0 <= M <= m"));
    }
    let m = files as f64;
    let base = users as f64 * (1.0 - alpha) * cache_size / m;
    let raw = if alpha == 0.0 {
        if base >= 1.0 {
            m
        } else {
            0.0
        }
    } else {
        libm::pow(base, 1.0 / alpha) * m
    };
    let raw = if raw.is_finite() { raw.min(m) } else { m };
    let rounded = libm::round(raw) as usize;
    Ok(rounded.clamp(min_m_tilde(cache_size), files))
}

/// The sub-unit-exponent rate bound and its coarse cap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Theorem1Bound {
    /// `(m~/M - 1)(1 - (1 - M/m~)^(n sum_{f<=m~} q_f)) + n sum_{f>m~} q_f`.
    pub expression: f64,
    /// `min(expression, m)`.
    pub value: f64,
    /// `min(m/M - 1, n, m)`.
    pub cap: f64,
}

pub fn theorem1_bound(
    users: usize,
    files: usize,
    cache_size: f64,
    q: &PopularityDist,
    m_tilde: usize,
) -> Result<Theorem1Bound> {
    if q.files() != files {
        return Err(invalid("popularity size differs from m"));
    }
    if cache_size <= 0.0 || m_tilde < min_m_tilde(cache_size) || m_tilde > files {
        return Err(invalid(format!(
            "m_tilde = {m_tilde} must lie in [ceil(M), m] with M = {cache_size} > 0"
        )));
    }
    let n = users as f64;
    let mt = m_tilde as f64;
    let head = math::sum(q.probs()[..m_tilde].iter().copied());
    let tail = math::sum(q.probs()[m_tilde..].iter().copied());
    let fill = (cache_size / mt).min(1.0);
    let coded = (mt / cache_size - 1.0) * one_minus_pow_complement(fill, n * head);
    let expression = coded + n * tail;
    Ok(Theorem1Bound {
        expression,
        value: expression.min(files as f64),
        cap: theorem1_cap(users, files, cache_size),
    })
}

/// `min(m/M - 1, n, m)`.
pub fn theorem1_cap(users: usize, files: usize, cache_size: f64) -> f64 {
    (files as f64 / cache_size - 1.0)
        .min(users as f64)
        .min(files as f64)
}

/// Support size for `alpha > 1` when the user count dominates `m^alpha`:
/// uniform caching over the whole library.
pub fn mtilde_theorem2(files: usize) -> usize {
    files
}

/// `min(m/M - 1 + slack, m)`. The vanishing term of the asymptotic bound is
/// not computable, so callers supply an explicit `slack`.
pub fn theorem2_cap(files: usize, cache_size: f64, slack: f64) -> f64 {
    (files as f64 / cache_size - 1.0 + slack).min(files as f64)
}

/// Exhaustive scan of the Random LFU support size `m~ in [ceil(M), m]`.
/// Returns the minimizer of the rate upper bound (ties to the smallest `m~`)
/// and its value.
pub fn search_mtilde(q: &PopularityDist, users: usize, cache_size: f64) -> Result<(usize, f64)> {
    let m = q.files();
    let mut best: Option<(usize, f64)> = None;
    for m_tilde in min_m_tilde(cache_size)..=m {
        let rub = rate_upper_bound(&random_lfu_dist(m, cache_size, m_tilde)?, q, users)?.rub;
        if best.is_none_or(|(_, v)| rub < v) {
            best = Some((m_tilde, rub));
        }
    }
    best.ok_or_else(|| {
        invalid(format!(
            "no admissible m_tilde for m = {m}, M = {cache_size}"
        ))
    })
}

/// Result of [`optimize_rap`].
#[derive(Debug, Clone, PartialEq)]
pub struct RapSolution {
    pub dist: CachingDist,
    pub bound: RateBound,
    /// Random LFU support size the search started from.
    pub m_tilde: usize,
    pub evaluations: usize,
}

/// Default evaluation budget of [`optimize_rap`].
pub const DEFAULT_RAP_BUDGET: usize = 400_000;

const GRID_MAX_FILES: usize = 4;
const GRID_STEPS: usize = 100;
const ALL_PAIRS_MAX_FILES: usize = 16;
const MIN_STEP: f64 = 1e-7;

struct Objective<'a> {
    q: &'a [f64],
    users: usize,
    cache_size: f64,
    mbar: f64,
    evaluations: usize,
}

impl Objective<'_> {
    /// `(rub, psi)`: ties of `rub` on the `mbar` plateau are broken by `psi`.
    fn eval(&mut self, p: &[f64]) -> (f64, f64) {
        self.evaluations += 1;
        let psi = psi_raw(p, self.cache_size, self.q, self.users);
        (psi.min(self.mbar), psi)
    }
}

fn better(a: (f64, f64), b: (f64, f64)) -> bool {
    a.0 < b.0 || (a.0 == b.0 && a.1 < b.1 - 1e-15)
}

/// Approximate minimizer of the rate upper bound over the feasible set
/// `{p : sum p = 1, 0 <= p_f <= 1/M}`.
///
/// Starts from the best Random LFU distribution. For `m <= 4` a grid of
/// resolution 0.01 over the simplex is scanned as well. The incumbent is then
/// refined by pairwise mass transfers with shrinking step size (all pairs for
/// small libraries, neighboring files otherwise); only strict improvements are
/// accepted, so the result never does worse than its starting point.
/// `budget` bounds the number of objective evaluations.
pub fn optimize_rap(
    q: &PopularityDist,
    users: usize,
    cache_size: f64,
    budget: usize,
) -> Result<RapSolution> {
    if cache_size <= 0.0 {
        return Err(invalid("RAP optimization needs M > 0"));
    }
    let m = q.files();
    let cap = 1.0 / cache_size;
    let (m_tilde, _) = search_mtilde(q, users, cache_size)?;
    let mut obj = Objective {
        q: q.probs(),
        users,
        cache_size,
        mbar: mbar(q, users),
        evaluations: 0,
    };
    let mut best_p = random_lfu_dist(m, cache_size, m_tilde)?.probs().to_vec();
    let mut best = obj.eval(&best_p);

    if m <= GRID_MAX_FILES {
        let mut counts = vec![0usize; m];
        let mut p = vec![0.0; m];
        grid_scan(&mut counts, 0, GRID_STEPS, &mut |counts| {
            if obj.evaluations >= budget {
                return;
            }
            for (pf, &c) in p.iter_mut().zip(counts) {
                *pf = c as f64 / GRID_STEPS as f64;
            }
            if p.iter().any(|&pf| pf > cap + 1e-12) {
                return;
            }
            let value = obj.eval(&p);
            if better(value, best) {
                best = value;
                best_p.copy_from_slice(&p);
            }
        });
    }

    let pairs: Vec<(usize, usize)> = if m <= ALL_PAIRS_MAX_FILES {
        (0..m)
            .flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j)))
            .collect()
    } else {
        (0..m - 1).flat_map(|i| [(i, i + 1), (i + 1, i)]).collect()
    };
    let mut step = 0.01;
    let mut trial = best_p.clone();
    'outer: while step >= MIN_STEP {
        let mut improved = true;
        while improved {
            improved = false;
            for &(from, to) in &pairs {
                if obj.evaluations >= budget {
                    break 'outer;
                }
                let delta = step.min(best_p[from]).min(cap - best_p[to]);
                if delta <= 0.0 {
                    continue;
                }
                trial.copy_from_slice(&best_p);
                trial[from] -= delta;
                trial[to] += delta;
                let value = obj.eval(&trial);
                if better(value, best) {
                    best = value;
                    best_p.copy_from_slice(&trial);
                    improved = true;
                }
            }
        }
        step /= 2.0;
    }

    let dist = CachingDist::new(best_p, cache_size)?;
    let bound = RateBound {
        psi: best.1,
        mbar: obj.mbar,
        rub: best.0,
    };
    Ok(RapSolution {
        dist,
        bound,
        m_tilde,
        evaluations: obj.evaluations,
    })
}

/// Visits every composition of `total` into `counts.len()` non-negative parts.
fn grid_scan(counts: &mut [usize], pos: usize, total: usize, visit: &mut dyn FnMut(&[usize])) {
    if pos + 1 == counts.len() {
        counts[pos] = total;
        visit(counts);
        return;
    }
    for c in 0..=total {
        counts[pos] = c;
        grid_scan(counts, pos + 1, total - c, visit);
    }
}
