//! Seeded graph families.
//!
//! Random bits come from xoshiro256** seeded through SplitMix64
//! (`Xoshiro256StarStar::seed_from_u64`), a portable 64-bit xorshift-family
//! generator. Random graphs draw one `f64` per unordered pair `u < v` in
//! row-major order and keep the edge when it is below `p`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;
use serde::{Deserialize, Serialize};

use crate::encode::{encode_edges, encode_undirected};
use crate::error::{Error, Result};
use crate::graph::{Color, ColoredGraph};

pub type GraphRng = Xoshiro256StarStar;

pub fn rng(seed: u64) -> GraphRng {
    Xoshiro256StarStar::seed_from_u64(seed)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    Path { n: usize },
    Cycle { n: usize },
    DisjointCycles { count: usize, length: usize },
    Complete { n: usize },
    Gnp { n: usize, p: f64 },
    /// `G(n, p)` with vertices grouped into consecutive classes of size `t`.
    BoundedColorClass { n: usize, t: usize, p: f64 },
    /// Stable under counting refinement yet not converse-equivalent; `2t` vertices.
    SeparatedLoops { t: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    #[serde(flatten)]
    pub family: Family,
    #[serde(default)]
    pub seed: u64,
}

impl FamilySpec {
    pub fn new(family: Family, seed: u64) -> Self {
        Self { family, seed }
    }

    pub fn name(&self) -> &'static str {
        self.family.name()
    }

    pub fn n(&self) -> usize {
        self.family.n()
    }

    pub fn generate(&self) -> Result<ColoredGraph> {
        generate(self)
    }
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Path { .. } => "path",
            Self::Cycle { .. } => "cycle",
            Self::DisjointCycles { .. } => "disjoint_cycles",
            Self::Complete { .. } => "complete",
            Self::Gnp { .. } => "gnp",
            Self::BoundedColorClass { .. } => "bounded_color_class",
            Self::SeparatedLoops { .. } => "appendix_a",
        }
    }

    /// Vertex count of the generated graph.
    pub fn n(&self) -> usize {
        match *self {
            Self::Path { n } | Self::Cycle { n } | Self::Complete { n } => n,
            Self::Gnp { n, .. } | Self::BoundedColorClass { n, .. } => n,
            Self::DisjointCycles { count, length } => count * length,
            Self::SeparatedLoops { t } => 2 * t,
        }
    }

    /// Same family with a different size parameter, where that makes sense.
    pub fn with_n(&self, n: usize) -> Self {
        match *self {
            Self::Path { .. } => Self::Path { n },
            Self::Cycle { .. } => Self::Cycle { n },
            Self::Complete { .. } => Self::Complete { n },
            Self::Gnp { p, .. } => Self::Gnp { n, p },
            Self::BoundedColorClass { t, p, .. } => Self::BoundedColorClass { n, t, p },
            Self::DisjointCycles { length, .. } => Self::DisjointCycles {
                count: (n / length.max(1)).max(1),
                length,
            },
            Self::SeparatedLoops { .. } => Self::SeparatedLoops { t: (n / 2).max(1) },
        }
    }
}

fn invalid(msg: String) -> Error {
    Error::InvalidParameter(msg)
}

fn check_p(p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(invalid(format!("edge probability {p} outside [0, 1]")))
    }
}

fn random_edges(n: usize, p: f64, seed: u64) -> Vec<(usize, usize)> {
    let mut r = rng(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if r.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    edges
}

fn cycle_edges(offset: usize, length: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..length).map(move |i| (offset + i, offset + (i + 1) % length))
}

pub fn generate(spec: &FamilySpec) -> Result<ColoredGraph> {
    match spec.family {
        Family::Path { n } => {
            if n == 0 {
                return Err(invalid("path needs n ≥ 1".into()));
            }
            let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
            encode_edges(n, &edges, None)
        }
        Family::Cycle { n } => {
            if n < 3 {
                return Err(invalid("cycle needs n ≥ 3".into()));
            }
            encode_edges(n, &cycle_edges(0, n).collect::<Vec<_>>(), None)
        }
        Family::DisjointCycles { count, length } => {
            if count == 0 || length < 3 {
                return Err(invalid("disjoint cycles need count ≥ 1 and length ≥ 3".into()));
            }
            let edges: Vec<_> = (0..count)
                .flat_map(|k| cycle_edges(k * length, length))
                .collect();
            encode_edges(count * length, &edges, None)
        }
        Family::Complete { n } => {
            if n == 0 {
                return Err(invalid("complete graph needs n ≥ 1".into()));
            }
            let edges: Vec<_> = (0..n)
                .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
                .collect();
            encode_edges(n, &edges, None)
        }
        Family::Gnp { n, p } => {
            if n == 0 {
                return Err(invalid("gnp needs n ≥ 1".into()));
            }
            check_p(p)?;
            encode_edges(n, &random_edges(n, p, spec.seed), None)
        }
        Family::BoundedColorClass { n, t, p } => {
            if n == 0 || t == 0 {
                return Err(invalid("bounded color class needs n ≥ 1 and t ≥ 1".into()));
            }
            check_p(p)?;
            let labels: Vec<u32> = (0..n).map(|v| (v / t) as u32).collect();
            let arcs: Vec<_> = random_edges(n, p, spec.seed)
                .into_iter()
                .flat_map(|(u, v)| [(u, v), (v, u)])
                .collect();
            encode_undirected(n, &arcs, Some(&labels))
        }
        Family::SeparatedLoops { t } => {
            if t == 0 {
                return Err(invalid("appendix_a needs t ≥ 1".into()));
            }
            Ok(separated_loops(t))
        }
    }
}

/// Vertices `a_i = i` and `b_j = t + j`. Loops 0, `a→a′` 1, `b→b′` 2,
/// `b→a` 3, and `a_i→b_j` 4 when `i = j` or `i = j + 1 (mod t)`, else 5.
fn separated_loops(t: usize) -> ColoredGraph {
    let n = 2 * t;
    let colors: Vec<Color> = (0..n * n)
        .map(|k| {
            let (u, v) = (k / n, k % n);
            match (u < t, v < t) {
                _ if u == v => 0,
                (true, true) => 1,
                (false, false) => 2,
                (false, true) => 3,
                (true, false) => {
                    let (i, j) = (u, v - t);
                    if i == j || i == (j + 1) % t {
                        4
                    } else {
                        5
                    }
                }
            }
        })
        .collect();
    ColoredGraph::new(n, colors).expect("table size is n²")
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let params = match self.family {
            Family::Path { n } | Family::Cycle { n } | Family::Complete { n } => format!("n={n}"),
            Family::DisjointCycles { count, length } => format!("count={count},length={length}"),
            Family::Gnp { n, p } => format!("n={n},p={p}"),
            Family::BoundedColorClass { n, t, p } => format!("n={n},t={t},p={p}"),
            Family::SeparatedLoops { t } => format!("t={t}"),
        };
        write!(f, "{}:{params},seed={}", self.name(), self.seed)
    }
}

/// Parses `name:key=value,...`, e.g. `gnp:n=12,p=0.5,seed=3`.
impl FromStr for FamilySpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, rest) = s.split_once(':').unwrap_or((s, ""));
        let mut params = std::collections::BTreeMap::new();
        for kv in rest.split(',').filter(|kv| !kv.is_empty()) {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got {kv:?}")))?;
            params.insert(k.trim().to_string(), v.trim().to_string());
        }
        let take = |key: &str| -> Result<Option<&str>> { Ok(params.get(key).map(String::as_str)) };
        let int = |key: &str| -> Result<usize> {
            take(key)?
                .ok_or_else(|| Error::Parse(format!("{name} needs {key}=")))?
                .parse()
                .map_err(|e| Error::Parse(format!("{key}: {e}")))
        };
        let real = |key: &str| -> Result<f64> {
            take(key)?
                .ok_or_else(|| Error::Parse(format!("{name} needs {key}=")))?
                .parse()
                .map_err(|e| Error::Parse(format!("{key}: {e}")))
        };
        let family = match name.replace('-', "_").as_str() {
            "path" => Family::Path { n: int("n")? },
            "cycle" => Family::Cycle { n: int("n")? },
            "complete" => Family::Complete { n: int("n")? },
            "disjoint_cycles" => Family::DisjointCycles {
                count: int("count")?,
                length: int("length")?,
            },
            "gnp" => Family::Gnp {
                n: int("n")?,
                p: real("p")?,
            },
            "bounded_color_class" => Family::BoundedColorClass {
                n: int("n")?,
                t: int("t")?,
                p: real("p")?,
            },
            "appendix_a" => Family::SeparatedLoops { t: int("t")? },
            other => return Err(Error::Parse(format!("unknown family {other:?}"))),
        };
        let seed = match take("seed")? {
            Some(s) => s.parse().map_err(|e| Error::Parse(format!("seed: {e}")))?,
            None => 0,
        };
        Ok(Self { family, seed })
    }
}

/// Uniformly random permutation of `0..n`.
pub fn random_permutation(n: usize, r: &mut impl Rng) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        perm.swap(i, r.random_range(0..=i));
    }
    perm
}
