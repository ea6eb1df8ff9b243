//! Coded multicast delivery by conflict-graph coloring.
//!
//! Every color class of a proper coloring of the conflict graph becomes one
//! XOR codeword. Properness guarantees that a user sharing a class with other
//! packets already holds all of them, so it can strip them off and recover its
//! own packet. The number of colors divided by `B` is the rate in file units.

mod code;
mod coloring;
mod graph;

pub use code::{decode, delivery_rate, encode, Codeword, MulticastCode, PayloadTable};
pub use coloring::{
    degree_order, exact_chromatic, first_fit, greedy_color, Coloring, OrderPolicy, TieKey,
    DEFAULT_EXACT_CAP,
};
pub use graph::{
    build_conflict_graph, requested_files, requested_packets, vertex_count, ConflictGraph,
    DenseGraph, Graph, Vertex,
};
