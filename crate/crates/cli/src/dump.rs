//! Plain-text dumps of one trial: the conflict graph in METIS adjacency
//! format and the cache contents. Both carry 1-based ids.
//!
//! Graph dump: `%` comment lines label each vertex as
//! `% v <vertex> user <u> file <f> packet <i>`, then a `<vertices> <edges>`
//! header and one line of neighbors per vertex.
//!
//! Cache dump: a header `caches <n> <m> <M> <B>` and one line per non-empty
//! (user, file) pair, `<user> <file>: <packet> <packet> ...`.

use std::fmt::Write as _;

use coded_caching_core::delivery::{ConflictGraph, DenseGraph, Graph};
use coded_caching_core::model::{FileId, SystemParams};
use coded_caching_core::placement::CacheConfig;

use crate::error::CliError;

pub fn write_metis(graph: &ConflictGraph) -> String {
    let n = graph.order();
    let mut adjacency = vec![Vec::new(); n];
    let mut edges = 0usize;
    for (a, b) in graph.edges() {
        adjacency[a].push(b + 1);
        adjacency[b].push(a + 1);
        edges += 1;
    }
    let mut out = String::new();
    for (v, vx) in graph.vertices().iter().enumerate() {
        let _ = writeln!(
            out,
            "% v {} user {} file {} packet {}",
            v + 1,
            vx.user + 1,
            vx.packet.file.0,
            vx.packet.index + 1
        );
    }
    let _ = writeln!(out, "{n} {edges}");
    for row in adjacency {
        let line: Vec<String> = row.iter().map(usize::to_string).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}

fn parse_err(line: usize, msg: impl std::fmt::Display) -> CliError {
    CliError::Other(format!("line {line}: {msg}"))
}

fn numbers(line: usize, text: &str) -> Result<Vec<usize>, CliError> {
    text.split_whitespace()
        .map(|t| {
            t.parse()
                .map_err(|_| parse_err(line, format!("bad number {t:?}")))
        })
        .collect()
}

/// Reads a METIS adjacency file without edge or vertex weights.
pub fn read_metis(text: &str) -> Result<DenseGraph, CliError> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.starts_with('%'));
    let (hl, header) = lines.next().ok_or_else(|| parse_err(0, "missing header"))?;
    let head = numbers(hl + 1, header)?;
    let [n, m] = head[..] else {
        return Err(parse_err(hl + 1, "header must be `<vertices> <edges>`"));
    };
    let mut graph = DenseGraph::new(n);
    let mut count = 0;
    let mut listed = 0;
    for v in 0..n {
        let (i, line) = lines
            .next()
            .ok_or_else(|| parse_err(0, format!("missing row for vertex {}", v + 1)))?;
        for w in numbers(i + 1, line)? {
            listed += 1;
            if w == 0 || w > n || w == v + 1 {
                return Err(parse_err(i + 1, format!("bad neighbor {w}")));
            }
            if w > v + 1 {
                graph.add_edge(v, w - 1);
                count += 1;
            } else if !graph.adjacent(v, w - 1) {
                return Err(parse_err(i + 1, "adjacency is not symmetric"));
            }
        }
    }
    if listed != 2 * count {
        return Err(parse_err(hl + 1, "adjacency is not symmetric"));
    }
    if count != m {
        return Err(parse_err(
            hl + 1,
            format!("header announces {m} edges, found {count}"),
        ));
    }
    Ok(graph)
}

pub fn write_caches(caches: &CacheConfig) -> String {
    let p = caches.params();
    let mut out = format!(
        "caches {} {} {} {}\n",
        p.users, p.files, p.cache_size, p.packets
    );
    for u in 0..p.users {
        for f in 0..p.files {
            let set = caches.packets(u, FileId::from_index(f));
            if set.is_empty() {
                continue;
            }
            let ids: Vec<String> = set.iter().map(|i| (i + 1).to_string()).collect();
            let _ = writeln!(out, "{} {}: {}", u + 1, f + 1, ids.join(" "));
        }
    }
    out
}

pub fn read_caches(text: &str) -> Result<CacheConfig, CliError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "missing header"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let ["caches", n, m, cache, b] = fields[..] else {
        return Err(parse_err(1, "header must be `caches <n> <m> <M> <B>`"));
    };
    let num = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| parse_err(1, format!("bad number {s:?}")))
    };
    let cache: f64 = cache.parse().map_err(|_| parse_err(1, "bad cache size"))?;
    let params = SystemParams::new(num(n)?, num(m)?, cache, num(b)?, 0)?;
    let mut sets = vec![vec![Vec::new(); params.files]; params.users];
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let (key, rest) = line
            .split_once(':')
            .ok_or_else(|| parse_err(i + 1, "expected `<user> <file>:`"))?;
        let key = numbers(i + 1, key)?;
        let [u, f] = key[..] else {
            return Err(parse_err(i + 1, "expected `<user> <file>:`"));
        };
        if u == 0 || u > params.users || f == 0 || f > params.files {
            return Err(parse_err(i + 1, "user or file out of range"));
        }
        for k in numbers(i + 1, rest)? {
            if k == 0 {
                return Err(parse_err(i + 1, "packet ids are 1-based"));
            }
            sets[u - 1][f - 1].push((k - 1) as u32);
        }
    }
    Ok(CacheConfig::from_sets(&params, sets)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use coded_caching_core::delivery::build_conflict_graph;
    use coded_caching_core::math::Substream;
    use coded_caching_core::model::{sample_demands, zipf};
    use coded_caching_core::placement::{fill_caches, uniform_dist};

    fn instance() -> (CacheConfig, ConflictGraph) {
        let params = SystemParams::new(4, 5, 2.0, 4, 0).unwrap();
        let caches =
            fill_caches(&uniform_dist(5, 2.0).unwrap(), &params, Substream::new(3)).unwrap();
        let q = zipf(5, 0.5).unwrap();
        let demands = sample_demands(&q, 4, &mut Substream::new(4).rng());
        let g = build_conflict_graph(&caches, &demands).unwrap();
        (caches, g)
    }

    #[test]
    fn metis_round_trip() {
        let (_, g) = instance();
        let text = write_metis(&g);
        let back = read_metis(&text).unwrap();
        assert_eq!(back, DenseGraph::from_graph(&g));
        assert!(text.starts_with("% v 1 user 1 file "));
    }

    #[test]
    fn cache_round_trip() {
        let (caches, _) = instance();
        let back = read_caches(&write_caches(&caches)).unwrap();
        assert_eq!(back, caches);
    }

    #[test]
    fn malformed_dumps_are_rejected() {
        assert!(read_metis("2 1\n2\n\n").is_err());
        assert!(read_metis("2 1\n3\n1\n").is_err());
        assert!(read_caches("caches 1 1 1 2\n1 1: 0\n").is_err());
        assert!(read_caches("caches 1 1 1 2\n1 1: 1 2 1\n").is_ok());
        assert!(read_caches("caches 1 1 0.5 2\n1 1: 1 2\n").is_err());
    }
}
