//! Independent reference implementations used by `verify` and the tests.
//!
//! Each oracle recomputes a quantity from its definition with no shared code
//! path: edges from the pairwise rule over explicit cache sets, chromatic
//! numbers by plain assignment enumeration, `rho` by sampling request sets,
//! and `psi` in exact rational arithmetic.

use std::collections::BTreeSet;

use coded_caching_core::delivery::{ConflictGraph, Graph};
use coded_caching_core::model::{DemandRealization, FileId};
use coded_caching_core::placement::CacheConfig;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, Zero};
use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;

/// Vertex label `(user, file id, packet index)`, all as stored in the core.
pub type Label = (usize, u32, u32);

/// Edge set keyed by vertex labels, each pair ordered.
pub type LabeledEdges = BTreeSet<(Label, Label)>;

fn ordered(a: Label, b: Label) -> (Label, Label) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Conflict edges by the pairwise rule, from scratch.
pub fn brute_force_edges(caches: &CacheConfig, demands: &DemandRealization) -> LabeledEdges {
    let p = caches.params();
    let held: Vec<BTreeSet<(u32, u32)>> = (0..p.users)
        .map(|u| {
            (0..p.files)
                .flat_map(|f| {
                    let file = FileId::from_index(f);
                    caches.packets(u, file).iter().map(move |&i| (file.0, i))
                })
                .collect()
        })
        .collect();
    let mut vertices = Vec::new();
    for (u, file) in demands.as_slice().iter().enumerate() {
        for i in 0..p.packets as u32 {
            if !held[u].contains(&(file.0, i)) {
                vertices.push((u, file.0, i));
            }
        }
    }
    let mut edges = BTreeSet::new();
    for (k, &a) in vertices.iter().enumerate() {
        for &b in &vertices[k + 1..] {
            let same_packet = (a.1, a.2) == (b.1, b.2);
            let a_lacks_b = !held[a.0].contains(&(b.1, b.2));
            let b_lacks_a = !held[b.0].contains(&(a.1, a.2));
            if !same_packet && (a_lacks_b || b_lacks_a) {
                edges.insert(ordered(a, b));
            }
        }
    }
    edges
}

pub fn label(graph: &ConflictGraph, v: usize) -> Label {
    let vx = graph.vertex(v);
    (vx.user, vx.packet.file.0, vx.packet.index)
}

/// The implementation's edges, relabeled for comparison with
/// [`brute_force_edges`].
pub fn labeled_edges(graph: &ConflictGraph) -> LabeledEdges {
    graph
        .edges()
        .into_iter()
        .map(|(a, b)| ordered(label(graph, a), label(graph, b)))
        .collect()
}

/// Chromatic number by enumerating color assignments in vertex order, with
/// color ids in first-use order so each partition is visited once.
pub fn brute_force_chromatic<G: Graph + ?Sized>(graph: &G) -> usize {
    let n = graph.order();
    if n == 0 {
        return 0;
    }
    let mut colors = vec![0usize; n];
    (1..=n)
        .find(|&k| assign(graph, &mut colors, 0, 0, k))
        .unwrap_or(n)
}

fn assign<G: Graph + ?Sized>(
    graph: &G,
    colors: &mut [usize],
    v: usize,
    used: usize,
    k: usize,
) -> bool {
    if v == colors.len() {
        return true;
    }
    for c in 0..k.min(used + 1) {
        if (0..v).all(|w| colors[w] != c || !graph.adjacent(v, w)) {
            colors[v] = c;
            if assign(graph, colors, v + 1, used.max(c + 1), k) {
                return true;
            }
        }
    }
    false
}

/// Log of the per-file term `x^(l-1) (1-x)^(n-l+1)` with `0^0 = 1`.
fn log_term(x: f64, n: usize, l: usize) -> f64 {
    let part = |base: f64, exp: usize| {
        if exp == 0 {
            0.0
        } else {
            exp as f64 * base.ln()
        }
    };
    part(x, l - 1) + part(1.0 - x, n - l + 1)
}

/// Monte-Carlo frequencies `freq[l - 1][f]` that file `f` attains the maximum
/// per-file term among the files requested by `l` i.i.d. users, ties to the
/// smaller file id. `x[f] = p_f M`.
///
/// One sample draws `n` requests; its first `l` requests serve level `l`.
pub fn rho_monte_carlo<R: Rng + ?Sized>(
    x: &[f64],
    q: &[f64],
    n: usize,
    samples: usize,
    rng: &mut R,
) -> Vec<Vec<f64>> {
    let m = x.len();
    assert!(m <= 16, "winner table limited to 16 files");
    // winner[l][mask]: argmax over the file set `mask` at level l + 1.
    let winner: Vec<Vec<usize>> = (1..=n)
        .map(|l| {
            let terms: Vec<f64> = x.iter().map(|&xf| log_term(xf, n, l)).collect();
            (0..1usize << m)
                .map(|mask| {
                    let mut best = usize::MAX;
                    for f in (0..m).filter(|f| mask >> f & 1 == 1) {
                        if best == usize::MAX || terms[f] > terms[best] {
                            best = f;
                        }
                    }
                    best
                })
                .collect()
        })
        .collect();
    let requests = WeightedIndex::new(q).expect("valid popularity weights");
    let mut counts = vec![vec![0u64; m]; n];
    for _ in 0..samples {
        let mut mask = 0usize;
        for level in counts.iter_mut().zip(&winner) {
            mask |= 1 << requests.sample(rng);
            level.0[level.1[mask]] += 1;
        }
    }
    counts
        .into_iter()
        .map(|row| row.into_iter().map(|c| c as f64 / samples as f64).collect())
        .collect()
}

pub fn rational(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite value")
}

/// Exact copy of a floating-point distribution, rescaled to sum to one.
pub fn rational_dist(q: &[f64]) -> Vec<BigRational> {
    let exact: Vec<BigRational> = q.iter().map(|&x| rational(x)).collect();
    let total: BigRational = exact.iter().sum();
    exact.into_iter().map(|x| x / &total).collect()
}

fn binomial(n: usize, k: usize) -> BigInt {
    (0..k).fold(BigInt::one(), |acc, i| {
        acc * BigInt::from(n - i) / BigInt::from(i + 1)
    })
}

fn term(x: &BigRational, n: usize, l: usize) -> BigRational {
    let one = BigRational::one();
    Pow::pow(x, (l - 1) as u32) * Pow::pow(&(one - x), (n - l + 1) as u32)
}

/// `rho_{f,l}` for every file from the ranking argument, in exact arithmetic.
pub fn rho_rational(x: &[BigRational], q: &[BigRational], n: usize, l: usize) -> Vec<BigRational> {
    let terms: Vec<BigRational> = x.iter().map(|xf| term(xf, n, l)).collect();
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| terms[b].cmp(&terms[a]).then(a.cmp(&b)));
    let mut rho = vec![BigRational::zero(); x.len()];
    let mut above = BigRational::zero();
    let one = BigRational::one();
    for f in order {
        let rest = &one - &above;
        rho[f] = Pow::pow(&rest, l as u32) - Pow::pow(&(&rest - &q[f]), l as u32);
        above += &q[f];
    }
    rho
}

/// `rho_{f,l}` by enumerating all `m^l` request tuples. Tiny cases only.
pub fn rho_enumerated(
    x: &[BigRational],
    q: &[BigRational],
    n: usize,
    l: usize,
) -> Vec<BigRational> {
    let m = x.len();
    let terms: Vec<BigRational> = x.iter().map(|xf| term(xf, n, l)).collect();
    let mut rho = vec![BigRational::zero(); m];
    let mut tuple = vec![0usize; l];
    loop {
        let prob = tuple.iter().fold(BigRational::one(), |acc, &f| acc * &q[f]);
        let mut best = tuple[0];
        for &f in &tuple[1..] {
            if terms[f] > terms[best] || (terms[f] == terms[best] && f < best) {
                best = f;
            }
        }
        rho[best] += prob;
        let Some(pos) = tuple.iter().rposition(|&f| f + 1 < m) else {
            break;
        };
        tuple[pos] += 1;
        tuple[pos + 1..].iter_mut().for_each(|f| *f = 0);
    }
    rho
}

/// The coded-delivery rate expression, term by term in exact arithmetic.
pub fn psi_rational(x: &[BigRational], q: &[BigRational], n: usize) -> BigRational {
    let mut total = BigRational::zero();
    for l in 1..=n {
        let rho = rho_rational(x, q, n, l);
        let mut level = BigRational::zero();
        for (f, xf) in x.iter().enumerate() {
            level += &rho[f] * term(xf, n, l);
        }
        total += BigRational::from_integer(binomial(n, l)) * level;
    }
    total
}

pub fn mbar_rational(q: &[BigRational], n: usize) -> BigRational {
    let one = BigRational::one();
    q.iter()
        .map(|qf| &one - Pow::pow(&(&one - qf), n as u32))
        .sum()
}

/// `min(psi, mbar)` in exact arithmetic.
pub fn rub_rational(x: &[BigRational], q: &[BigRational], n: usize) -> BigRational {
    psi_rational(x, q, n).min(mbar_rational(q, n))
}

pub fn to_f64(r: &BigRational) -> f64 {
    num_traits::ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use coded_caching_core::delivery::DenseGraph;

    fn rats(v: &[f64]) -> Vec<BigRational> {
        v.iter().map(|&x| rational(x)).collect()
    }

    #[test]
    fn chromatic_by_enumeration() {
        assert_eq!(brute_force_chromatic(&DenseGraph::complete(5)), 5);
        assert_eq!(brute_force_chromatic(&DenseGraph::cycle(7)), 3);
        assert_eq!(brute_force_chromatic(&DenseGraph::cycle(8)), 2);
        assert_eq!(brute_force_chromatic(&DenseGraph::new(4)), 1);
        assert_eq!(brute_force_chromatic(&DenseGraph::new(0)), 0);
    }

    #[test]
    fn rational_rho_matches_enumeration() {
        let x = rats(&[0.6, 0.4, 0.0]);
        let q = rational_dist(&[0.5, 0.3, 0.2]);
        for l in 1..=4 {
            assert_eq!(rho_rational(&x, &q, 4, l), rho_enumerated(&x, &q, 4, l));
        }
    }

    #[test]
    fn psi_limits() {
        let q = rational_dist(&[0.7, 0.21, 0.09]);
        // Nothing cached: only l = 1 survives and psi = n.
        assert_eq!(
            psi_rational(&rats(&[0.0, 0.0, 0.0]), &q, 5),
            BigRational::from_integer(5.into())
        );
        // Everything cached.
        assert!(psi_rational(&rats(&[1.0, 1.0, 1.0]), &q, 5).is_zero());
        // Most popular file only, three users: 3*(0.09 + 0.21) = 0.9 at l = 1.
        let psi = to_f64(&psi_rational(&rats(&[1.0, 0.0, 0.0]), &q, 3));
        assert!((psi - 0.9).abs() < 1e-12);
    }

    #[test]
    fn monte_carlo_rho_is_close() {
        let mut rng = coded_caching_core::math::Substream::new(5).rng();
        let freq = rho_monte_carlo(&[0.6, 0.4], &[0.8, 0.2], 3, 100_000, &mut rng);
        let exact = rho_rational(&rats(&[0.6, 0.4]), &rational_dist(&[0.8, 0.2]), 3, 2);
        for f in 0..2 {
            assert!((freq[1][f] - to_f64(&exact[f])).abs() < 0.01);
        }
        assert!((freq[0][0] - 0.8).abs() < 0.01);
    }
}
