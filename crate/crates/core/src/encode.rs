//! Encodings of plain graphs into colored complete digraphs.
//!
//! The encodings use fixed ID layouts so that two graphs encoded
//! independently share a color namespace (needed by [`distinguish`]):
//!
//! * undirected: loop of `v` gets its vertex label, adjacent pairs get
//!   `L`, non-adjacent pairs `L + 1`, where `L` is the label count;
//! * directed: loops 0, both arcs 1, forward only 2, backward only 3, neither 4.
//!
//! [`distinguish`]: crate::refine::distinguish

use crate::error::{Error, Result};
use crate::graph::{Color, ColoredGraph};

pub const DIRECTED_LOOP: Color = 0;
pub const DIRECTED_BOTH: Color = 1;
pub const DIRECTED_FORWARD: Color = 2;
pub const DIRECTED_BACKWARD: Color = 3;
pub const DIRECTED_NEITHER: Color = 4;

fn adjacency_matrix(n: usize, arcs: &[(usize, usize)]) -> Result<Vec<bool>> {
    let mut adj = vec![false; n * n];
    for &(u, v) in arcs {
        for x in [u, v] {
            if x >= n {
                return Err(Error::VertexOutOfRange { vertex: x, n });
            }
        }
        if u == v {
            return Err(Error::SelfLoop(u));
        }
        adj[u * n + v] = true;
    }
    Ok(adj)
}

/// Encodes a symmetric, loop-free adjacency relation given as ordered pairs.
/// Every `(u, v)` must be accompanied by `(v, u)`.
pub fn encode_undirected(
    n: usize,
    arcs: &[(usize, usize)],
    vertex_labels: Option<&[u32]>,
) -> Result<ColoredGraph> {
    let label_count = vertex_labels.map_or(1, |l| l.iter().max().map_or(1, |&m| m + 1));
    encode_undirected_with_palette(n, arcs, vertex_labels, label_count)
}

/// As [`encode_undirected`] with an explicit label count, so that several
/// graphs can be encoded against one palette.
pub fn encode_undirected_with_palette(
    n: usize,
    arcs: &[(usize, usize)],
    vertex_labels: Option<&[u32]>,
    label_count: u32,
) -> Result<ColoredGraph> {
    let adj = adjacency_matrix(n, arcs)?;
    for u in 0..n {
        for v in 0..n {
            if adj[u * n + v] && !adj[v * n + u] {
                return Err(Error::AsymmetricAdjacency(u, v));
            }
        }
    }
    if let Some(labels) = vertex_labels {
        if labels.len() != n {
            return Err(Error::InvalidParameter(format!(
                "{} vertex labels for {n} vertices",
                labels.len()
            )));
        }
        if let Some(&l) = labels.iter().find(|&&l| l >= label_count) {
            return Err(Error::InvalidParameter(format!(
                "vertex label {l} outside palette of {label_count} labels"
            )));
        }
    }
    let edge = label_count;
    let non_edge = label_count + 1;
    let colors = (0..n * n)
        .map(|i| {
            let (u, v) = (i / n, i % n);
            if u == v {
                vertex_labels.map_or(0, |l| l[u])
            } else if adj[i] {
                edge
            } else {
                non_edge
            }
        })
        .collect();
    ColoredGraph::new(n, colors)
}

/// Symmetrizes an undirected edge list and encodes it.
pub fn encode_edges(
    n: usize,
    edges: &[(usize, usize)],
    vertex_labels: Option<&[u32]>,
) -> Result<ColoredGraph> {
    let arcs: Vec<_> = edges.iter().flat_map(|&(u, v)| [(u, v), (v, u)]).collect();
    encode_undirected(n, &arcs, vertex_labels)
}

/// Encodes a loop-free arc set by the arc pattern of each ordered pair.
pub fn encode_directed(n: usize, arcs: &[(usize, usize)]) -> Result<ColoredGraph> {
    let adj = adjacency_matrix(n, arcs)?;
    let colors = (0..n * n)
        .map(|i| {
            let (u, v) = (i / n, i % n);
            if u == v {
                return DIRECTED_LOOP;
            }
            match (adj[u * n + v], adj[v * n + u]) {
                (true, true) => DIRECTED_BOTH,
                (true, false) => DIRECTED_FORWARD,
                (false, true) => DIRECTED_BACKWARD,
                (false, false) => DIRECTED_NEITHER,
            }
        })
        .collect();
    ColoredGraph::new(n, colors)
}
