use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use super::graph::Graph;
use crate::error::{Error, Result};
use crate::math::Substream;

/// Default vertex cap for [`exact_chromatic`].
pub const DEFAULT_EXACT_CAP: usize = 20;

/// A vertex coloring. Colors are stored 0-based; `count` is the number of
/// distinct colors used.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Coloring {
    colors: Vec<u32>,
    count: usize,
}

impl Coloring {
    /// Wraps a color assignment. Color ids must be dense in `0..K`.
    pub fn new(colors: Vec<u32>) -> Self {
        let count = colors.iter().map(|&c| c as usize + 1).max().unwrap_or(0);
        Self { colors, count }
    }

    pub fn color(&self, v: usize) -> u32 {
        self.colors[v]
    }

    pub fn colors(&self) -> &[u32] {
        &self.colors
    }

    /// Number of colors `K`.
    pub fn count(&self) -> usize {
        self.count
    }

    /// Vertices of every color class, in color order.
    pub fn classes(&self) -> Vec<Vec<usize>> {
        let mut classes = vec![Vec::new(); self.count];
        for (v, &c) in self.colors.iter().enumerate() {
            classes[c as usize].push(v);
        }
        classes
    }

    /// Returns the first monochromatic edge, if any.
    pub fn conflict<G: Graph + ?Sized>(&self, graph: &G) -> Option<(usize, usize)> {
        let n = graph.order();
        if self.colors.len() != n {
            return Some((n, n));
        }
        for class in self.classes() {
            for (i, &a) in class.iter().enumerate() {
                if let Some(&b) = class[i + 1..].iter().find(|&&b| graph.adjacent(a, b)) {
                    return Some((a, b));
                }
            }
        }
        None
    }

    pub fn is_proper<G: Graph + ?Sized>(&self, graph: &G) -> bool {
        self.conflict(graph).is_none()
    }

    pub fn check_proper<G: Graph + ?Sized>(&self, graph: &G) -> Result<()> {
        match self.conflict(graph) {
            Some((a, b)) => Err(Error::ImproperColoring(a, b)),
            None => Ok(()),
        }
    }
}

/// Vertex ordering used by [`greedy_color`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OrderPolicy {
    /// First fit in descending degree order; ties broken by
    /// [`TieKey::tie_key`].
    #[default]
    DegreeDescending,
    /// Saturation-degree (DSATUR) ordering.
    Dsatur,
    /// The degree order plus `restarts` seeded random orders; the coloring with
    /// the fewest colors wins.
    RandomRestarts { restarts: u32, seed: u64 },
}

/// Deterministic tie-break key for vertex ordering.
pub trait TieKey {
    fn tie_key(&self, v: usize) -> (u64, u64, u64) {
        (0, 0, v as u64)
    }
}

impl TieKey for super::graph::DenseGraph {}

impl TieKey for super::graph::ConflictGraph {
    /// `(file id, packet index, user id)`.
    fn tie_key(&self, v: usize) -> (u64, u64, u64) {
        let vx = self.vertex(v);
        (
            vx.packet.file.0 as u64,
            vx.packet.index as u64,
            vx.user as u64,
        )
    }
}

/// Proper coloring by a greedy heuristic. Uses at most `max degree + 1` colors.
pub fn greedy_color<G: Graph + TieKey + ?Sized>(graph: &G, policy: OrderPolicy) -> Coloring {
    match policy {
        OrderPolicy::DegreeDescending => first_fit(graph, &degree_order(graph)),
        OrderPolicy::Dsatur => dsatur(graph),
        OrderPolicy::RandomRestarts { restarts, seed } => {
            let mut order = degree_order(graph);
            let mut best = first_fit(graph, &order);
            let mut rng = Substream::new(seed).rng();
            for _ in 0..restarts {
                if best.count() <= 1 {
                    break;
                }
                order.shuffle(&mut rng);
                let candidate = first_fit(graph, &order);
                if candidate.count() < best.count() {
                    best = candidate;
                }
            }
            best
        }
    }
}

/// Vertices by descending degree, then ascending tie key.
pub fn degree_order<G: Graph + TieKey + ?Sized>(graph: &G) -> Vec<usize> {
    let degrees = graph.degrees();
    let mut order: Vec<usize> = (0..graph.order()).collect();
    order.sort_by(|&a, &b| {
        degrees[b]
            .cmp(&degrees[a])
            .then_with(|| graph.tie_key(a).cmp(&graph.tie_key(b)))
    });
    order
}

/// Colors vertices in `order`, each with the smallest color unused by its
/// already-colored neighbors.
pub fn first_fit<G: Graph + ?Sized>(graph: &G, order: &[usize]) -> Coloring {
    let n = graph.order();
    let mut colors = vec![u32::MAX; n];
    let mut stamp = vec![usize::MAX; n + 1];
    for (step, &v) in order.iter().enumerate() {
        for &w in &order[..step] {
            if graph.adjacent(v, w) {
                stamp[colors[w] as usize] = step;
            }
        }
        let c = (0..=n).find(|&c| stamp[c] != step).unwrap_or(n);
        colors[v] = c as u32;
    }
    Coloring::new(colors)
}

fn dsatur<G: Graph + TieKey + ?Sized>(graph: &G) -> Coloring {
    let n = graph.order();
    let degrees = graph.degrees();
    let words = n.div_ceil(64).max(1);
    let mut seen = vec![0u64; n * words];
    let mut saturation = vec![0usize; n];
    let mut colors = vec![u32::MAX; n];
    for _ in 0..n {
        let v = (0..n)
            .filter(|&v| colors[v] == u32::MAX)
            .max_by(|&a, &b| {
                saturation[a]
                    .cmp(&saturation[b])
                    .then(degrees[a].cmp(&degrees[b]))
                    .then_with(|| graph.tie_key(b).cmp(&graph.tie_key(a)))
            })
            .expect("an uncolored vertex remains");
        let row = &seen[v * words..(v + 1) * words];
        let c = (0..n)
            .find(|&c| row[c / 64] >> (c % 64) & 1 == 0)
            .unwrap_or(0);
        colors[v] = c as u32;
        for w in 0..n {
            if colors[w] == u32::MAX && graph.adjacent(v, w) {
                let word = &mut seen[w * words + c / 64];
                if *word >> (c % 64) & 1 == 0 {
                    *word |= 1 << (c % 64);
                    saturation[w] += 1;
                }
            }
        }
    }
    Coloring::new(colors)
}

/// Chromatic number by exhaustive search over color counts.
///
/// Tries `k = clique lower bound, ...` with DSATUR-ordered backtracking until a
/// proper `k`-coloring is found. Refuses graphs above `cap` vertices.
pub fn exact_chromatic<G: Graph + TieKey + ?Sized>(graph: &G, cap: usize) -> Result<usize> {
    let n = graph.order();
    if n > cap || n > 64 {
        return Err(Error::SizeLimit { vertices: n, cap });
    }
    if n == 0 {
        return Ok(0);
    }
    let adj: Vec<u64> = (0..n)
        .map(|a| {
            (0..n)
                .filter(|&b| b != a && graph.adjacent(a, b))
                .fold(0u64, |m, b| m | 1 << b)
        })
        .collect();
    let upper = dsatur(graph).count();
    let lower = greedy_clique(&adj);
    for k in lower..upper {
        let mut colors = vec![u32::MAX; n];
        if extend(&adj, &mut colors, k, 0) {
            return Ok(k);
        }
    }
    Ok(upper)
}

fn greedy_clique(adj: &[u64]) -> usize {
    let n = adj.len();
    let mut best = 1;
    for start in 0..n {
        let mut clique = 1u64 << start;
        let mut candidates = adj[start];
        while candidates != 0 {
            let v = (0..n)
                .filter(|&v| candidates >> v & 1 == 1)
                .max_by_key(|&v| (adj[v] & candidates).count_ones())
                .expect("non-empty candidate set");
            clique |= 1 << v;
            candidates &= adj[v];
        }
        best = best.max(clique.count_ones() as usize);
    }
    best
}

fn extend(adj: &[u64], colors: &mut [u32], k: usize, used: usize) -> bool {
    let n = adj.len();
    let mut pick = None;
    let mut pick_sat = 0;
    for v in (0..n).filter(|&v| colors[v] == u32::MAX) {
        let mut mask = 0u64;
        for (w, &c) in colors.iter().enumerate() {
            if adj[v] >> w & 1 == 1 && c != u32::MAX {
                mask |= 1 << c;
            }
        }
        let sat = mask.count_ones() as usize;
        if pick.is_none() || sat > pick_sat {
            pick = Some((v, mask));
            pick_sat = sat;
        }
    }
    let Some((v, mask)) = pick else {
        return true;
    };
    // Only one fresh color is worth trying: unused colors are interchangeable.
    for c in 0..k.min(used + 1) {
        if mask >> c & 1 == 0 {
            colors[v] = c as u32;
            if extend(adj, colors, k, used.max(c + 1)) {
                return true;
            }
            colors[v] = u32::MAX;
        }
    }
    false
}
