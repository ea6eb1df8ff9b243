use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Result};
use crate::model::{DemandRealization, FileId};
use crate::placement::{CacheConfig, Packet};

/// Undirected simple graph over vertices `0..order()`.
pub trait Graph {
    fn order(&self) -> usize;

    /// Must be symmetric and irreflexive.
    fn adjacent(&self, a: usize, b: usize) -> bool;

    fn degree(&self, v: usize) -> usize {
        (0..self.order())
            .filter(|&w| w != v && self.adjacent(v, w))
            .count()
    }

    fn degrees(&self) -> Vec<usize> {
        let n = self.order();
        let mut deg = vec![0; n];
        for a in 0..n {
            for b in a + 1..n {
                if self.adjacent(a, b) {
                    deg[a] += 1;
                    deg[b] += 1;
                }
            }
        }
        deg
    }

    /// Edges `(a, b)` with `a < b`, in lexicographic order.
    fn edges(&self) -> Vec<(usize, usize)> {
        let n = self.order();
        let mut out = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                if self.adjacent(a, b) {
                    out.push((a, b));
                }
            }
        }
        out
    }
}

/// Graph stored as a dense bit matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DenseGraph {
    order: usize,
    words: usize,
    rows: Vec<u64>,
}

impl DenseGraph {
    pub fn new(order: usize) -> Self {
        let words = order.div_ceil(64).max(1);
        Self {
            order,
            words,
            rows: vec![0; order * words],
        }
    }

    pub fn from_edges(order: usize, edges: &[(usize, usize)]) -> Self {
        let mut g = Self::new(order);
        for &(a, b) in edges {
            g.add_edge(a, b);
        }
        g
    }

    pub fn complete(order: usize) -> Self {
        let mut g = Self::new(order);
        for a in 0..order {
            for b in a + 1..order {
                g.add_edge(a, b);
            }
        }
        g
    }

    pub fn cycle(order: usize) -> Self {
        let mut g = Self::new(order);
        for a in 0..order {
            g.add_edge(a, (a + 1) % order);
        }
        g
    }

    /// Copies any graph into dense form.
    pub fn from_graph<G: Graph + ?Sized>(graph: &G) -> Self {
        Self::from_edges(graph.order(), &graph.edges())
    }

    /// Ignores self-loops.
    pub fn add_edge(&mut self, a: usize, b: usize) {
        if a != b {
            self.set(a, b, true);
            self.set(b, a, true);
        }
    }

    pub fn remove_edge(&mut self, a: usize, b: usize) {
        self.set(a, b, false);
        self.set(b, a, false);
    }

    fn set(&mut self, a: usize, b: usize, on: bool) {
        assert!(a < self.order && b < self.order, "vertex out of range");
        let word = &mut self.rows[a * self.words + b / 64];
        if on {
            *word |= 1 << (b % 64);
        } else {
            *word &= !(1 << (b % 64));
        }
    }
}

impl Graph for DenseGraph {
    fn order(&self) -> usize {
        self.order
    }

    fn adjacent(&self, a: usize, b: usize) -> bool {
        self.rows[a * self.words + b / 64] >> (b % 64) & 1 == 1
    }
}

/// A requested packet together with the user requesting it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Vertex {
    pub packet: Packet,
    /// 0-based requesting user.
    pub user: usize,
}

/// Conflict graph of one caching and demand configuration.
///
/// There is one vertex per (requested packet, requesting user) pair, where a
/// user requests exactly the packets of its demanded file that are missing
/// from its cache. Two vertices conflict when they carry different packets
/// and at least one requester lacks the other vertex's packet. Adjacency is
/// evaluated on demand from the requesters' cache bitmaps, so memory stays
/// linear in the number of vertices.
#[derive(Debug, Clone)]
pub struct ConflictGraph {
    vertices: Vec<Vertex>,
    /// Global packet id of every vertex.
    globals: Vec<usize>,
    caches: CacheConfig,
}

impl ConflictGraph {
    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn vertex(&self, v: usize) -> Vertex {
        self.vertices[v]
    }

    pub fn caches(&self) -> &CacheConfig {
        &self.caches
    }
}

impl Graph for ConflictGraph {
    fn order(&self) -> usize {
        self.vertices.len()
    }

    fn adjacent(&self, a: usize, b: usize) -> bool {
        let (pa, pb) = (self.globals[a], self.globals[b]);
        if pa == pb {
            return false;
        }
        let (ua, ub) = (self.vertices[a].user, self.vertices[b].user);
        !(self.caches.contains_global(ub, pa) && self.caches.contains_global(ua, pb))
    }
}

/// Packets of `demands.file_of(user)` that `user` does not hold.
pub fn requested_packets(
    caches: &CacheConfig,
    demands: &DemandRealization,
    user: usize,
) -> Vec<Packet> {
    let file = demands.file_of(user);
    let cached = caches.packets(user, file);
    let mut next_cached = cached.iter().peekable();
    let mut out = Vec::with_capacity(caches.params().packets - cached.len());
    for index in 0..caches.params().packets as u32 {
        if next_cached.peek() == Some(&&index) {
            next_cached.next();
        } else {
            out.push(Packet { file, index });
        }
    }
    out
}

/// Number of conflict-graph vertices, `sum_u (B - |cached packets of d_u|)`.
pub fn vertex_count(caches: &CacheConfig, demands: &DemandRealization) -> usize {
    let b = caches.params().packets;
    (0..demands.users())
        .map(|u| b - caches.packets(u, demands.file_of(u)).len())
        .sum()
}

/// Builds the conflict graph. Vertices are ordered by user, then packet index.
pub fn build_conflict_graph(
    caches: &CacheConfig,
    demands: &DemandRealization,
) -> Result<ConflictGraph> {
    let params = caches.params();
    if demands.users() != params.users {
        return Err(invalid("demand count differs from the number of users"));
    }
    if let Some(f) = demands
        .as_slice()
        .iter()
        .find(|f| f.0 == 0 || f.index() >= params.files)
    {
        return Err(invalid(alloc::format!(
            "demanded file {f} is outside the library"
        )));
    }
    let mut vertices = Vec::with_capacity(vertex_count(caches, demands));
    for user in 0..demands.users() {
        vertices.extend(
            requested_packets(caches, demands, user)
                .into_iter()
                .map(|packet| Vertex { packet, user }),
        );
    }
    let globals = vertices
        .iter()
        .map(|v| caches.global_id(v.packet))
        .collect();
    Ok(ConflictGraph {
        vertices,
        globals,
        caches: caches.clone(),
    })
}

/// Distinct files among the vertices' packets, ascending.
pub fn requested_files(graph: &ConflictGraph) -> Vec<FileId> {
    let mut files: Vec<FileId> = graph.vertices.iter().map(|v| v.packet.file).collect();
    files.sort_unstable();
    files.dedup();
    files
}
