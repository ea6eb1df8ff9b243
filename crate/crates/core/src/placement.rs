//! Caching distributions and randomized packet-level cache placement.
//!
//! Each user independently caches, for every file `f`, a uniformly random
//! subset of `p_f * M * B` distinct packets. When `p_f * M * B` is not an
//! integer the per-file quotas are apportioned from the integer budget
//! `floor(M * B)` by largest remainders (see [`packet_quotas`]).

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{invalid, Error, Result};
use crate::math::{self, Substream};
use crate::model::{FileId, SystemParams};

/// One packet of the library. `index` is 0-based within the file; text dumps
/// print it 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Packet {
    pub file: FileId,
    pub index: u32,
}

impl fmt::Display for Packet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.file, self.index + 1)
    }
}

const DIST_SUM_TOL: f64 = 1e-9;
const DIST_CAP_TOL: f64 = 1e-12;

/// Caching distribution `p`: the fraction of every user's cache devoted to each file.
#[derive(Debug, Clone, PartialEq)]
pub struct CachingDist {
    probs: Vec<f64>,
    cache_size: f64,
}

impl CachingDist {
    /// Validates `sum p = 1` and `0 <= p_f <= 1/M`.
    pub fn new(probs: Vec<f64>, cache_size: f64) -> Result<Self> {
        if probs.is_empty() {
            return Err(invalid("caching distribution needs at least one file"));
        }
        if !cache_size.is_finite() || cache_size < 0.0 || cache_size > probs.len() as f64 {
            return Err(invalid(format!(
                "cache size M = {cache_size} must lie in [0, m]"
            )));
        }
        let cap = if cache_size > 0.0 {
            1.0 / cache_size
        } else {
            1.0
        };
        for (i, &p) in probs.iter().enumerate() {
            if !p.is_finite() || p < -DIST_CAP_TOL || p > cap + DIST_CAP_TOL {
                return Err(invalid(format!(
                    "p_{} = {p} is outside [0, 1/M = {cap}]",
                    i + 1
                )));
            }
        }
        let total = math::sum(probs.iter().copied());
        if libm::fabs(total - 1.0) > DIST_SUM_TOL {
            return Err(invalid(format!(
                "caching distribution sums to {total}, not 1"
            )));
        }
        let probs = probs.into_iter().map(|p| p.clamp(0.0, cap)).collect();
        Ok(Self { probs, cache_size })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn cache_size(&self) -> f64 {
        self.cache_size
    }

    pub fn files(&self) -> usize {
        self.probs.len()
    }
}

fn ceil_cache(cache_size: f64) -> usize {
    // Tolerate M = 2.0000000001 style noise from config arithmetic.
    libm::ceil(cache_size - 1e-9).max(0.0) as usize
}

/// Random LFU: uniform caching over the `m_tilde` most popular files.
pub fn random_lfu_dist(files: usize, cache_size: f64, m_tilde: usize) -> Result<CachingDist> {
    let lower = ceil_cache(cache_size).max(1);
    if m_tilde < lower || m_tilde > files {
        return Err(invalid(format!(
            "m_tilde = {m_tilde} must lie in [{lower}, {files}] for M = {cache_size}"
        )));
    }
    let share = 1.0 / m_tilde as f64;
    let probs = (0..files)
        .map(|f| if f < m_tilde { share } else { 0.0 })
        .collect();
    CachingDist::new(probs, cache_size)
}

/// LFU steady state: the `ceil(M)` most popular files.
pub fn lfu_dist(files: usize, cache_size: f64) -> Result<CachingDist> {
    random_lfu_dist(files, cache_size, ceil_cache(cache_size).max(1))
}

/// Uniform caching over the whole library.
pub fn uniform_dist(files: usize, cache_size: f64) -> Result<CachingDist> {
    random_lfu_dist(files, cache_size, files)
}

/// Smallest admissible Random LFU support size, `max(1, ceil(M))`.
pub fn min_m_tilde(cache_size: f64) -> usize {
    ceil_cache(cache_size).max(1)
}

/// Per-file packet quotas for one user.
///
/// The budget `floor(M * B)` is apportioned proportionally to `p` by the
/// largest-remainder method, capped at `B` per file. Files with `p_f = 0`
/// receive nothing; ties on the remainder go to the smaller file id.
pub fn packet_quotas(dist: &CachingDist, params: &SystemParams) -> Result<Vec<usize>> {
    if dist.files() != params.files {
        return Err(invalid(format!(
            "caching distribution has {} files, parameters have {}",
            dist.files(),
            params.files
        )));
    }
    let budget = params.packet_budget();
    let packets = params.packets;
    let mut quotas = vec![0usize; params.files];
    if budget == 0 {
        return Ok(quotas);
    }
    let mut remainders: Vec<(f64, usize)> = Vec::new();
    for (f, &p) in dist.probs().iter().enumerate() {
        let ideal = p * budget as f64;
        let nearest = libm::round(ideal);
        let ideal = if libm::fabs(ideal - nearest) < 1e-9 {
            nearest
        } else {
            ideal
        };
        let base = (libm::floor(ideal) as usize).min(packets);
        quotas[f] = base;
        if p > 0.0 && base < packets {
            remainders.push((ideal - base as f64, f));
        }
    }
    let assigned: usize = quotas.iter().sum();
    if assigned > budget {
        return Err(Error::QuotaInfeasible {
            requested: assigned,
            budget,
        });
    }
    let mut leftover = budget - assigned;
    remainders.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    for &(_, f) in &remainders {
        if leftover == 0 {
            break;
        }
        quotas[f] += 1;
        leftover -= 1;
    }
    // Leftover can only survive when the budget exceeds what p can place;
    // that is a shortfall, not an overflow, so the quotas stay feasible.
    Ok(quotas)
}

/// Cached packets of one user.
#[derive(Debug, Clone, PartialEq, Eq)]
struct UserCache {
    /// Sorted 0-based packet indices per file.
    sets: Vec<Vec<u32>>,
    /// Membership bitmap over global packet ids `file_index * B + packet`.
    bits: Vec<u64>,
}

impl UserCache {
    fn empty(files: usize, packets: usize) -> Self {
        Self {
            sets: vec![Vec::new(); files],
            bits: vec![0; (files * packets).div_ceil(64)],
        }
    }

    fn contains(&self, global: usize) -> bool {
        self.bits[global / 64] >> (global % 64) & 1 == 1
    }

    fn set(&mut self, global: usize) {
        self.bits[global / 64] |= 1 << (global % 64);
    }

    fn total(&self) -> usize {
        self.sets.iter().map(Vec::len).sum()
    }
}

/// Packet-level cache contents of every user.
#[derive(Debug, Clone, PartialEq)]
pub struct CacheConfig {
    params: SystemParams,
    users: Vec<UserCache>,
}

impl CacheConfig {
    /// All caches empty.
    pub fn empty(params: &SystemParams) -> Self {
        Self {
            params: params.clone(),
            users: (0..params.users)
                .map(|_| UserCache::empty(params.files, params.packets))
                .collect(),
        }
    }

    /// Builds a configuration from explicit 0-based packet index sets,
    /// `sets[user][file_index]`.
    pub fn from_sets(params: &SystemParams, sets: Vec<Vec<Vec<u32>>>) -> Result<Self> {
        if sets.len() != params.users {
            return Err(invalid(format!(
                "{} user caches given for n = {}",
                sets.len(),
                params.users
            )));
        }
        let mut config = Self::empty(params);
        for (u, files) in sets.into_iter().enumerate() {
            if files.len() != params.files {
                return Err(invalid(format!(
                    "user {} lists {} files, expected {}",
                    u + 1,
                    files.len(),
                    params.files
                )));
            }
            for (f, packets) in files.into_iter().enumerate() {
                for index in packets {
                    config.insert(u, FileId::from_index(f), index)?;
                }
            }
        }
        Ok(config)
    }

    /// Adds one packet to a user's cache. Returns `false` if it was already cached.
    pub fn insert(&mut self, user: usize, file: FileId, index: u32) -> Result<bool> {
        let b = self.params.packets;
        if user >= self.params.users
            || file.0 == 0
            || file.index() >= self.params.files
            || index as usize >= b
        {
            return Err(invalid(format!(
                "packet {file}:{} for user {} is out of range",
                index + 1,
                user + 1
            )));
        }
        let budget = self.params.packet_budget();
        let cache = &mut self.users[user];
        let global = file.index() * b + index as usize;
        if cache.contains(global) {
            return Ok(false);
        }
        if cache.total() + 1 > budget {
            return Err(Error::QuotaInfeasible {
                requested: cache.total() + 1,
                budget,
            });
        }
        cache.set(global);
        let set = &mut cache.sets[file.index()];
        let pos = set.partition_point(|&x| x < index);
        set.insert(pos, index);
        Ok(true)
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn users(&self) -> usize {
        self.users.len()
    }

    /// Sorted 0-based indices of the packets of `file` cached by `user`.
    pub fn packets(&self, user: usize, file: FileId) -> &[u32] {
        &self.users[user].sets[file.index()]
    }

    pub fn contains(&self, user: usize, packet: Packet) -> bool {
        self.contains_global(user, self.global_id(packet))
    }

    /// Membership test on the global packet id `file_index * B + index`.
    pub fn contains_global(&self, user: usize, global: usize) -> bool {
        self.users[user].contains(global)
    }

    pub fn global_id(&self, packet: Packet) -> usize {
        packet.file.index() * self.params.packets + packet.index as usize
    }

    /// Number of packets cached by `user`.
    pub fn user_total(&self, user: usize) -> usize {
        self.users[user].total()
    }
}

/// Fills one user's cache from its own random stream.
pub fn fill_user(
    quotas: &[usize],
    params: &SystemParams,
    stream: Substream,
) -> Result<Vec<Vec<u32>>> {
    let budget = params.packet_budget();
    let requested: usize = quotas.iter().sum();
    if requested > budget {
        return Err(Error::QuotaInfeasible { requested, budget });
    }
    let mut rng = stream.rng();
    Ok(quotas
        .iter()
        .map(|&k| {
            let mut picked: Vec<u32> = rand::seq::index::sample(&mut rng, params.packets, k)
                .into_iter()
                .map(|i| i as u32)
                .collect();
            picked.sort_unstable();
            picked
        })
        .collect())
}

/// Randomized decentralized placement: user `u` draws its cache from
/// `stream.child(u)`, independently of every other user.
pub fn fill_caches(
    dist: &CachingDist,
    params: &SystemParams,
    stream: Substream,
) -> Result<CacheConfig> {
    params.validate()?;
    if params.cache_size == 0.0 {
        return Ok(CacheConfig::empty(params));
    }
    if libm::fabs(dist.cache_size() - params.cache_size) > 1e-12 {
        return Err(invalid(format!(
            "caching distribution built for M = {}, parameters have M = {}",
            dist.cache_size(),
            params.cache_size
        )));
    }
    let quotas = packet_quotas(dist, params)?;
    let b = params.packets;
    let mut config = CacheConfig::empty(params);
    for (u, cache) in config.users.iter_mut().enumerate() {
        let sets = fill_user(&quotas, params, stream.child(u as u64))?;
        for (f, set) in sets.iter().enumerate() {
            for &i in set {
                cache.set(f * b + i as usize);
            }
        }
        cache.sets = sets;
    }
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize, m: usize, cache: f64, b: usize) -> SystemParams {
        SystemParams::new(n, m, cache, b, 11).unwrap()
    }

    #[test]
    fn random_lfu_corners() {
        assert_eq!(
            random_lfu_dist(5, 1.0, 1).unwrap().probs(),
            &[1.0, 0.0, 0.0, 0.0, 0.0]
        );
        assert_eq!(random_lfu_dist(5, 1.0, 5).unwrap().probs(), &[0.2; 5]);
        assert!(random_lfu_dist(4, 2.0, 1).is_err());
        assert!(random_lfu_dist(4, 2.0, 5).is_err());
    }

    #[test]
    fn lfu_and_uniform_conveniences() {
        let third = 1.0 / 3.0;
        let lfu = lfu_dist(10, 3.0).unwrap();
        assert_eq!(&lfu.probs()[..3], &[third; 3]);
        assert!(lfu.probs()[3..].iter().all(|&p| p == 0.0));
        assert_eq!(uniform_dist(10, 3.0).unwrap().probs(), &[0.1; 10]);
        assert_eq!(lfu_dist(10, 10.0).unwrap().probs(), &[0.1; 10]);
        assert_eq!(lfu_dist(10, 2.5).unwrap().probs()[..3], [third; 3]);
    }

    #[test]
    fn caching_dist_enforces_cap() {
        assert!(CachingDist::new(vec![0.6, 0.4], 2.0).is_err());
        assert!(CachingDist::new(vec![0.5, 0.5], 2.0).is_ok());
        assert!(CachingDist::new(vec![0.5, 0.4], 1.0).is_err());
    }

    #[test]
    fn full_file_quota() {
        let p = CachingDist::new(vec![1.0, 0.0], 1.0).unwrap();
        let params = params(2, 2, 1.0, 4);
        let caches = fill_caches(&p, &params, Substream::new(1)).unwrap();
        for u in 0..2 {
            assert_eq!(caches.packets(u, FileId(1)), &[0, 1, 2, 3]);
            assert!(caches.packets(u, FileId(2)).is_empty());
        }
    }

    #[test]
    fn half_half_quota() {
        let p = CachingDist::new(vec![0.5, 0.5], 1.0).unwrap();
        let caches = fill_caches(&p, &params(1, 2, 1.0, 4), Substream::new(5)).unwrap();
        for f in [FileId(1), FileId(2)] {
            let set = caches.packets(0, f);
            assert_eq!(set.len(), 2);
            assert_ne!(set[0], set[1]);
        }
    }

    #[test]
    fn zero_cache_is_empty() {
        let p = uniform_dist(3, 0.0).unwrap();
        let caches = fill_caches(&p, &params(3, 3, 0.0, 5), Substream::new(0)).unwrap();
        assert!((0..3).all(|u| caches.user_total(u) == 0));
    }

    #[test]
    fn largest_remainder_apportionment() {
        // floor(M B) = 4 packets across p = [0.5, 0.3, 0.2]: ideal 2, 1.2, 0.8.
        let p = CachingDist::new(vec![0.5, 0.3, 0.2], 1.0).unwrap();
        let q = packet_quotas(&p, &params(1, 3, 1.0, 4)).unwrap();
        assert_eq!(q, vec![2, 1, 1]);
        // Fractional M: floor(1.5 * 3) = 4 over three equal shares -> ties to smaller ids.
        let p = uniform_dist(3, 1.5).unwrap();
        let q = packet_quotas(&p, &params(1, 3, 1.5, 3)).unwrap();
        assert_eq!(q, vec![2, 1, 1]);
    }

    #[test]
    fn integral_quotas_match_exact_products() {
        let p = random_lfu_dist(6, 2.0, 4).unwrap();
        let q = packet_quotas(&p, &params(1, 6, 2.0, 10)).unwrap();
        assert_eq!(q, vec![5, 5, 5, 5, 0, 0]);
    }

    #[test]
    fn decentralized_placement() {
        let p = random_lfu_dist(6, 2.0, 4).unwrap();
        let small = fill_caches(&p, &params(2, 6, 2.0, 10), Substream::new(3)).unwrap();
        let large = fill_caches(&p, &params(7, 6, 2.0, 10), Substream::new(3)).unwrap();
        for f in 1..=6 {
            assert_eq!(small.packets(1, FileId(f)), large.packets(1, FileId(f)));
        }
    }

    #[test]
    fn insert_respects_budget() {
        let params = params(1, 2, 0.5, 2);
        let mut caches = CacheConfig::empty(&params);
        assert!(caches.insert(0, FileId(1), 0).unwrap());
        assert!(!caches.insert(0, FileId(1), 0).unwrap());
        assert!(caches.insert(0, FileId(2), 1).is_err());
        assert!(caches.insert(0, FileId(3), 0).is_err());
    }
}
