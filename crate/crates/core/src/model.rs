//! System parameters, popularity model and demand sampling.

use alloc::format;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

use crate::error::{invalid, Result};
use crate::math;

/// Library file identifier. File ids are 1-based: the most popular file is `FileId(1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FileId(pub u32);

impl FileId {
    /// Builds the id of the file stored at a 0-based position.
    pub fn from_index(index: usize) -> Self {
        FileId(index as u32 + 1)
    }

    /// 0-based position of the file in per-file sequences.
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }
}

impl fmt::Display for FileId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Network size, library size, cache size and packetization of one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    /// Number of users `n`.
    pub users: usize,
    /// Number of library files `m`.
    pub files: usize,
    /// Per-user cache size `M`, in files. May be fractional.
    pub cache_size: f64,
    /// Packets per file `B`.
    pub packets: usize,
    pub seed: u64,
}

impl SystemParams {
    pub fn new(
        users: usize,
        files: usize,
        cache_size: f64,
        packets: usize,
        seed: u64,
    ) -> Result<Self> {
        let params = Self {
            users,
            files,
            cache_size,
            packets,
            seed,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.users == 0 {
            return Err(invalid("n must be at least 1"));
        }
        if self.files == 0 {
            return Err(invalid("m must be at least 1"));
        }
        if self.packets == 0 {
            return Err(invalid("B must be at least 1"));
        }
        if !self.cache_size.is_finite()
            || self.cache_size < 0.0
            || self.cache_size > self.files as f64
        {
            return Err(invalid(format!(
                "cache size M = {} must lie in [0, m = {}]",
                self.cache_size, self.files
            )));
        }
        if u32::try_from(self.files).is_err() || u32::try_from(self.packets).is_err() {
            return Err(invalid("m and B must fit in 32 bits"));
        }
        Ok(())
    }

    /// Total per-user packet budget `floor(M * B)`.
    pub fn packet_budget(&self) -> usize {
        let raw = self.cache_size * self.packets as f64;
        // Absorb representation error such as 0.1 * 30 = 3.0000000000000004.
        libm::floor(raw + 1e-9) as usize
    }
}

/// Per-file request probabilities `q`.
#[derive(Debug, Clone, PartialEq)]
pub struct PopularityDist {
    probs: Vec<f64>,
    cdf: Vec<f64>,
}

const PROB_SUM_TOL: f64 = 1e-12;

impl PopularityDist {
    /// Wraps an explicit probability vector, indexed by 0-based file position.
    pub fn from_probs(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(invalid("popularity needs at least one file"));
        }
        if let Some((i, q)) = probs
            .iter()
            .enumerate()
            .find(|(_, q)| !q.is_finite() || **q < 0.0)
        {
            return Err(invalid(format!("q_{} = {q} is not a probability", i + 1)));
        }
        let total = math::sum(probs.iter().copied());
        if libm::fabs(total - 1.0) > PROB_SUM_TOL {
            return Err(invalid(format!("popularity sums to {total}, not 1")));
        }
        let mut acc = math::CompensatedSum::new();
        let mut cdf: Vec<f64> = probs
            .iter()
            .map(|&q| {
                acc.add(q);
                acc.value()
            })
            .collect();
        // Zero-probability tail files must stay unreachable.
        let last_positive = probs.iter().rposition(|&q| q > 0.0).unwrap_or(0);
        for c in &mut cdf[last_positive..] {
            *c = 1.0;
        }
        Ok(Self { probs, cdf })
    }

    pub fn files(&self) -> usize {
        self.probs.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn prob(&self, file: FileId) -> f64 {
        self.probs[file.index()]
    }

    /// Draws one file id by inverse-CDF sampling.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> FileId {
        let u: f64 = rng.gen();
        let idx = self.cdf.partition_point(|&c| c <= u);
        FileId::from_index(idx.min(self.probs.len() - 1))
    }
}

/// Zipf popularity `q_f = f^-alpha / sum_i i^-alpha` over `m` files.
pub fn zipf(files: usize, alpha: f64) -> Result<PopularityDist> {
    if files == 0 {
        return Err(invalid("m must be at least 1"));
    }
    if !alpha.is_finite() || alpha < 0.0 {
        return Err(invalid(format!(
            "Zipf exponent alpha = {alpha} must be finite and non-negative"
        )));
    }
    let weights: Vec<f64> = (1..=files).map(|f| libm::pow(f as f64, -alpha)).collect();
    let norm = math::sum(weights.iter().copied());
    PopularityDist::from_probs(weights.into_iter().map(|w| w / norm).collect())
}

/// File requested by every user.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DemandRealization {
    files: Vec<FileId>,
}

impl DemandRealization {
    pub fn new(files: Vec<FileId>, library_size: usize) -> Result<Self> {
        if let Some(bad) = files.iter().find(|f| f.0 == 0 || f.index() >= library_size) {
            return Err(invalid(format!(
                "requested file {bad} is outside 1..={library_size}"
            )));
        }
        Ok(Self { files })
    }

    pub fn users(&self) -> usize {
        self.files.len()
    }

    /// File requested by the 0-based user `user`.
    pub fn file_of(&self, user: usize) -> FileId {
        self.files[user]
    }

    pub fn as_slice(&self) -> &[FileId] {
        &self.files
    }

    /// Number of distinct requested files.
    pub fn distinct_files(&self) -> usize {
        let mut files = self.files.clone();
        files.sort_unstable();
        files.dedup();
        files.len()
    }
}

/// Draws `n` i.i.d. demands from `q`, one draw per user in user order.
pub fn sample_demands<R: Rng + ?Sized>(
    q: &PopularityDist,
    users: usize,
    rng: &mut R,
) -> DemandRealization {
    DemandRealization {
        files: (0..users).map(|_| q.sample(rng)).collect(),
    }
}
