//! Graph ingestion and emission.
//!
//! Accepted inputs:
//!
//! * graph6 strings (undirected, optional `>>graph6<<` header);
//! * edge lists: one `u v` pair per line, an optional `n N` line fixing the
//!   vertex count, optional `v ID COLOR` lines giving vertex colors, `#`
//!   comments;
//! * the JSON document `{"n": N, "colors": [...]}` with a row-major table.
//!
//! Undirected inputs are encoded with [`encode_undirected`]. Output is always
//! the JSON document of the canonically renumbered graph.
//!
//! [`encode_undirected`]: crate::encode::encode_undirected

use serde::{Deserialize, Serialize};

use crate::encode::encode_edges;
use crate::error::{Error, Result};
use crate::graph::{canonical_renumber, Color, ColoredGraph};

const GRAPH6_HEADER: &str = ">>graph6<<";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphDocument {
    pub n: usize,
    pub colors: Vec<Color>,
}

impl GraphDocument {
    pub fn from_graph(g: &ColoredGraph) -> Self {
        let g = canonical_renumber(g);
        Self {
            n: g.n(),
            colors: g.table().to_vec(),
        }
    }

    pub fn into_graph(self) -> Result<ColoredGraph> {
        ColoredGraph::new(self.n, self.colors)
    }
}

pub fn to_json(g: &ColoredGraph) -> String {
    serde_json::to_string(&GraphDocument::from_graph(g)).expect("document serializes")
}

pub fn from_json(text: &str) -> Result<ColoredGraph> {
    serde_json::from_str::<GraphDocument>(text)?.into_graph()
}

/// Undirected simple graph as decoded from graph6.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimpleGraph {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
}

impl SimpleGraph {
    pub fn encode(&self) -> Result<ColoredGraph> {
        encode_edges(self.n, &self.edges, None)
    }
}

fn graph6_bytes(s: &str) -> Result<&[u8]> {
    let s = s.trim();
    let s = s.strip_prefix(GRAPH6_HEADER).unwrap_or(s);
    let bytes = s.as_bytes();
    if bytes.is_empty() {
        return Err(Error::Parse("empty graph6 string".into()));
    }
    if let Some(&b) = bytes.iter().find(|&&b| !(63..=126).contains(&b)) {
        return Err(Error::Parse(format!("byte {b} outside the graph6 range 63..=126")));
    }
    Ok(bytes)
}

fn read_sextets(bytes: &[u8], count: usize) -> Result<usize> {
    if bytes.len() < count {
        return Err(Error::Parse("truncated graph6 size field".into()));
    }
    Ok(bytes[..count].iter().fold(0, |acc, &b| (acc << 6) | (b - 63) as usize))
}

pub fn parse_graph6(s: &str) -> Result<SimpleGraph> {
    let bytes = graph6_bytes(s)?;
    let (n, rest) = if bytes[0] != 126 {
        ((bytes[0] - 63) as usize, &bytes[1..])
    } else if bytes.get(1) != Some(&126) {
        (read_sextets(&bytes[1..], 3)?, bytes.get(4..).unwrap_or_default())
    } else {
        (read_sextets(&bytes[2..], 6)?, bytes.get(8..).unwrap_or_default())
    };
    let bits = n * n.saturating_sub(1) / 2;
    let needed = bits.div_ceil(6);
    if rest.len() != needed {
        return Err(Error::Parse(format!(
            "graph6 body has {} bytes, {n} vertices need {needed}",
            rest.len()
        )));
    }
    let mut edges = Vec::new();
    let mut k = 0;
    for j in 1..n {
        for i in 0..j {
            let byte = rest[k / 6] - 63;
            if byte >> (5 - k % 6) & 1 == 1 {
                edges.push((i, j));
            }
            k += 1;
        }
    }
    Ok(SimpleGraph { n, edges })
}

pub fn write_graph6(g: &SimpleGraph) -> Result<String> {
    let n = g.n;
    let mut out: Vec<u8> = Vec::new();
    if n <= 62 {
        out.push(n as u8 + 63);
    } else if n <= 258_047 {
        out.push(126);
        out.extend((0..3).rev().map(|k| ((n >> (6 * k)) & 63) as u8 + 63));
    } else {
        out.extend([126, 126]);
        out.extend((0..6).rev().map(|k| ((n >> (6 * k)) & 63) as u8 + 63));
    }
    let mut adj = vec![false; n * n];
    for &(u, v) in &g.edges {
        if u >= n || v >= n {
            return Err(Error::VertexOutOfRange { vertex: u.max(v), n });
        }
        adj[u * n + v] = true;
        adj[v * n + u] = true;
    }
    let bits: Vec<bool> = (1..n).flat_map(|j| (0..j).map(move |i| (i, j))).map(|(i, j)| adj[i * n + j]).collect();
    for chunk in bits.chunks(6) {
        let byte = chunk.iter().enumerate().fold(0u8, |acc, (k, &b)| acc | ((b as u8) << (5 - k)));
        out.push(byte + 63);
    }
    Ok(String::from_utf8(out).expect("graph6 bytes are ASCII"))
}

fn parse_usize(token: &str, line: usize) -> Result<usize> {
    token
        .parse()
        .map_err(|_| Error::Parse(format!("line {line}: expected a non-negative integer, got {token:?}")))
}

pub fn parse_edge_list(text: &str) -> Result<ColoredGraph> {
    let mut declared_n = None;
    let mut edges = Vec::new();
    let mut labels: Vec<(usize, u32)> = Vec::new();
    for (index, raw) in text.lines().enumerate() {
        let line = index + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        let tokens: Vec<&str> = content.split_whitespace().collect();
        match tokens.as_slice() {
            [] => {}
            ["n", count] => declared_n = Some(parse_usize(count, line)?),
            ["v", id, color] => {
                let color = parse_usize(color, line)?;
                let color = u32::try_from(color).map_err(|_| Error::Parse(format!("line {line}: color too large")))?;
                labels.push((parse_usize(id, line)?, color));
            }
            [u, v] => edges.push((parse_usize(u, line)?, parse_usize(v, line)?)),
            _ => return Err(Error::Parse(format!("line {line}: cannot parse {content:?}"))),
        }
    }
    let inferred = edges
        .iter()
        .flat_map(|&(u, v)| [u, v])
        .chain(labels.iter().map(|&(v, _)| v))
        .max()
        .map_or(0, |m| m + 1);
    let n = declared_n.unwrap_or(inferred);
    if inferred > n {
        return Err(Error::VertexOutOfRange { vertex: inferred - 1, n });
    }
    let mut unique: Vec<(usize, usize)> = edges.iter().map(|&(u, v)| (u.min(v), u.max(v))).collect();
    unique.sort_unstable();
    unique.dedup();
    let vertex_labels = if labels.is_empty() {
        None
    } else {
        // compress the given colors to 0..L, unlabeled vertices share color 0
        let mut distinct: Vec<u32> = labels.iter().map(|&(_, c)| c).collect();
        distinct.sort_unstable();
        distinct.dedup();
        let mut out = vec![0u32; n];
        for &(v, c) in &labels {
            out[v] = distinct.binary_search(&c).expect("color is listed") as u32;
        }
        Some(out)
    };
    encode_edges(n, &unique, vertex_labels.as_deref())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InputFormat {
    Graph6,
    EdgeList,
    Json,
}

pub fn detect_format(text: &str) -> InputFormat {
    let t = text.trim();
    if t.starts_with('{') {
        InputFormat::Json
    } else if t.starts_with(GRAPH6_HEADER)
        || (!t.is_empty() && !t.contains(char::is_whitespace) && t.bytes().all(|b| (63..=126).contains(&b)))
    {
        InputFormat::Graph6
    } else {
        InputFormat::EdgeList
    }
}

/// Parses any supported format, detected from the content.
pub fn parse_graph(text: &str) -> Result<ColoredGraph> {
    match detect_format(text) {
        InputFormat::Json => from_json(text),
        InputFormat::Graph6 => parse_graph6(text)?.encode(),
        InputFormat::EdgeList => parse_edge_list(text),
    }
}
