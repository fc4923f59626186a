//! Colored complete digraphs with loops, pair partitions and the refinement order.
//!
//! A [`ColoredGraph`] assigns a color to every ordered pair `(u, v)` of its
//! vertices, loops included. Only the induced partition of `V²` carries
//! meaning; color IDs are labels. Graphs produced by refinement are always
//! [canonically renumbered](canonical_renumber), so two graphs with the same
//! partition have bit-identical tables.

use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Color identifier of an ordered vertex pair.
pub type Color = u32;

/// An ordered vertex pair `(tail, head)`.
pub type Pair = (usize, usize);

/// A complete digraph with loops and a total pair coloring.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ColoredGraph {
    n: usize,
    colors: Vec<Color>,
    palette_size: usize,
}

impl ColoredGraph {
    /// Builds a graph from a row-major `n × n` color table.
    pub fn new(n: usize, colors: Vec<Color>) -> Result<Self> {
        if colors.len() != n * n {
            return Err(Error::TableSize {
                n,
                expected: n * n,
                got: colors.len(),
            });
        }
        let palette_size = colors.iter().collect::<HashSet<_>>().len();
        Ok(Self {
            n,
            colors,
            palette_size,
        })
    }

    /// Loops colored 0, all other pairs colored 1.
    pub fn uniform(n: usize) -> Self {
        let colors = (0..n * n)
            .map(|i| if i / n == i % n { 0 } else { 1 })
            .collect();
        Self::new(n, colors).expect("table size is n²")
    }

    /// Every ordered pair in its own class.
    pub fn discrete(n: usize) -> Self {
        canonical_renumber(&Self::new(n, (0..(n * n) as Color).collect()).expect("table size is n²"))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn color(&self, u: usize, v: usize) -> Color {
        self.colors[u * self.n + v]
    }

    #[inline]
    pub fn loop_color(&self, v: usize) -> Color {
        self.colors[v * (self.n + 1)]
    }

    /// Row-major color table.
    pub fn table(&self) -> &[Color] {
        &self.colors
    }

    pub fn row(&self, u: usize) -> &[Color] {
        &self.colors[u * self.n..(u + 1) * self.n]
    }

    /// Number of distinct color IDs in use.
    pub fn palette_size(&self) -> usize {
        self.palette_size
    }

    /// True when the IDs in use are exactly `0..palette_size`.
    pub fn is_dense(&self) -> bool {
        self.colors
            .iter()
            .all(|&c| (c as usize) < self.palette_size)
    }

    pub fn vertex_colors(&self) -> Vec<Color> {
        (0..self.n).map(|v| self.loop_color(v)).collect()
    }

    /// `(vertex classes, edge classes)`. A color shared by loops and arcs is
    /// counted on the vertex side only.
    pub fn class_counts(&self) -> (usize, usize) {
        let loops: HashSet<Color> = (0..self.n).map(|v| self.loop_color(v)).collect();
        (loops.len(), self.palette_size - loops.len())
    }

    pub fn vertex_class_count(&self) -> usize {
        self.class_counts().0
    }

    /// Every ordered pair is its own class.
    pub fn is_discrete(&self) -> bool {
        self.palette_size == self.n * self.n
    }

    pub fn partition(&self) -> PartitionSummary {
        PartitionSummary::of(self)
    }

    /// Relabels vertices: vertex `v` of `self` becomes vertex `perm[v]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.n;
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::InvalidParameter(format!(
                "not a permutation of 0..{n}"
            )));
        }
        let mut colors = vec![0; n * n];
        for u in 0..n {
            for v in 0..n {
                colors[perm[u] * n + perm[v]] = self.color(u, v);
            }
        }
        Self::new(n, colors)
    }

    /// Disjoint union in a shared color namespace. Vertices of `other` are
    /// shifted by `self.n()`; all cross pairs get one fresh color.
    pub fn disjoint_union(&self, other: &Self) -> Self {
        let (a, b) = (self.n, other.n);
        let n = a + b;
        let cross = self
            .colors
            .iter()
            .chain(other.colors.iter())
            .copied()
            .max()
            .map_or(0, |m| m + 1);
        let mut colors = vec![cross; n * n];
        for u in 0..a {
            colors[u * n..u * n + a].copy_from_slice(self.row(u));
        }
        for u in 0..b {
            let r = (a + u) * n + a;
            colors[r..r + b].copy_from_slice(other.row(u));
        }
        Self::new(n, colors).expect("table size is n²")
    }

    /// Restriction to the vertex range `range` (used to split unions).
    pub fn induced(&self, range: std::ops::Range<usize>) -> Self {
        let m = range.len();
        let mut colors = Vec::with_capacity(m * m);
        for u in range.clone() {
            colors.extend_from_slice(&self.row(u)[range.clone()]);
        }
        Self::new(m, colors).expect("table size is m²")
    }

    /// Maps IDs onto `0..palette_size`, preserving their relative order.
    pub(crate) fn densified(&self) -> Vec<Color> {
        if self.is_dense() {
            return self.colors.clone();
        }
        let mut ids: Vec<Color> = self.colors.clone();
        ids.sort_unstable();
        ids.dedup();
        let rank: HashMap<Color, Color> = ids
            .iter()
            .enumerate()
            .map(|(i, &c)| (c, i as Color))
            .collect();
        self.colors.iter().map(|c| rank[c]).collect()
    }
}

/// Whether a color class holds loops, arcs, or (only in invalid colorings) both.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassKind {
    Vertex,
    Edge,
    Mixed,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColorClass {
    pub color: Color,
    pub kind: ClassKind,
    /// Member pairs in row-major order.
    pub pairs: Vec<Pair>,
}

impl ColorClass {
    pub fn size(&self) -> usize {
        self.pairs.len()
    }
}

/// The partition `π(χ)` of `V²` induced by a coloring.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionSummary {
    /// Classes ordered by color ID.
    pub classes: Vec<ColorClass>,
}

impl PartitionSummary {
    fn of(g: &ColoredGraph) -> Self {
        let mut by_color: HashMap<Color, Vec<Pair>> = HashMap::new();
        for u in 0..g.n {
            for v in 0..g.n {
                by_color.entry(g.color(u, v)).or_default().push((u, v));
            }
        }
        let mut classes: Vec<ColorClass> = by_color
            .into_iter()
            .map(|(color, pairs)| {
                let loops = pairs.iter().filter(|(u, v)| u == v).count();
                let kind = match loops {
                    0 => ClassKind::Edge,
                    l if l == pairs.len() => ClassKind::Vertex,
                    _ => ClassKind::Mixed,
                };
                ColorClass { color, kind, pairs }
            })
            .collect();
        classes.sort_by_key(|c| c.color);
        Self { classes }
    }

    pub fn vertex_classes(&self) -> impl Iterator<Item = &ColorClass> {
        self.classes.iter().filter(|c| c.kind == ClassKind::Vertex)
    }

    pub fn edge_classes(&self) -> impl Iterator<Item = &ColorClass> {
        self.classes.iter().filter(|c| c.kind == ClassKind::Edge)
    }
}

/// Relation between two pair partitions on the same vertex set, read from the
/// first argument's side: `StrictlyCoarser` means the first is coarser.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RefinementOrder {
    Equal,
    StrictlyFiner,
    StrictlyCoarser,
    Incomparable,
}

impl RefinementOrder {
    /// The first argument is coarser than or equal to the second (`a ⪰ b`).
    pub fn is_coarser_or_equal(self) -> bool {
        matches!(self, Self::Equal | Self::StrictlyCoarser)
    }

    pub fn is_finer_or_equal(self) -> bool {
        matches!(self, Self::Equal | Self::StrictlyFiner)
    }

    pub fn reversed(self) -> Self {
        match self {
            Self::StrictlyFiner => Self::StrictlyCoarser,
            Self::StrictlyCoarser => Self::StrictlyFiner,
            other => other,
        }
    }
}

/// True when every class of `fine` lies inside a class of `coarse`.
fn refines(fine: &ColoredGraph, coarse: &ColoredGraph) -> bool {
    let mut image: HashMap<Color, Color> = HashMap::with_capacity(fine.palette_size);
    fine.colors
        .iter()
        .zip(&coarse.colors)
        .all(|(&f, &c)| *image.entry(f).or_insert(c) == c)
}

/// Compares `π(χ_a)` with `π(χ_b)`.
pub fn compare(a: &ColoredGraph, b: &ColoredGraph) -> Result<RefinementOrder> {
    if a.n != b.n {
        return Err(Error::SizeMismatch {
            left: a.n,
            right: b.n,
        });
    }
    let a_finer = a.palette_size >= b.palette_size && refines(a, b);
    let b_finer = b.palette_size >= a.palette_size && refines(b, a);
    Ok(match (a_finer, b_finer) {
        (true, true) => RefinementOrder::Equal,
        (true, false) => RefinementOrder::StrictlyFiner,
        (false, true) => RefinementOrder::StrictlyCoarser,
        (false, false) => RefinementOrder::Incomparable,
    })
}

/// `a ⪰ b`: `b` refines `a` (or they are equal). Sizes must agree.
pub fn is_coarser_or_equal(a: &ColoredGraph, b: &ColoredGraph) -> Result<bool> {
    Ok(compare(a, b)?.is_coarser_or_equal())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    In,
    Out,
}

/// `N⁺_colors(v)` or `N⁻_colors(v)`, sorted. Contains `v` iff its loop color is listed.
pub fn neighborhood(
    g: &ColoredGraph,
    v: usize,
    colors: &[Color],
    direction: Direction,
) -> Result<Vec<usize>> {
    if v >= g.n {
        return Err(Error::VertexOutOfRange { vertex: v, n: g.n });
    }
    let wanted: HashSet<Color> = colors.iter().copied().collect();
    Ok((0..g.n)
        .filter(|&u| {
            let c = match direction {
                Direction::Out => g.color(v, u),
                Direction::In => g.color(u, v),
            };
            wanted.contains(&c)
        })
        .collect())
}

/// Renumbers colors deterministically: classes containing loops first, then
/// arc classes, each in order of their first member pair (row-major). Since
/// classes are disjoint, that is the order of their sorted member lists.
pub fn canonical_renumber(g: &ColoredGraph) -> ColoredGraph {
    let n = g.n;
    let mut map: HashMap<Color, Color> = HashMap::with_capacity(g.palette_size);
    for v in 0..n {
        let next = map.len() as Color;
        map.entry(g.loop_color(v)).or_insert(next);
    }
    for u in 0..n {
        for v in 0..n {
            if u != v {
                let next = map.len() as Color;
                map.entry(g.color(u, v)).or_insert(next);
            }
        }
    }
    let colors = g.colors.iter().map(|c| map[c]).collect();
    ColoredGraph {
        n,
        colors,
        palette_size: g.palette_size,
    }
}

/// A structural property violated by a coloring, with witnesses.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum Violation {
    /// A loop and an arc share a color.
    LoopArcShared {
        color: Color,
        loop_vertex: usize,
        arc: Pair,
    },
    /// Two pairs share a color but their reverses do not.
    ConverseMismatch {
        color: Color,
        first: Pair,
        second: Pair,
        first_reverse_color: Color,
        second_reverse_color: Color,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub loop_edge_disjoint: bool,
    pub converse_equivalent: bool,
    pub offending_pairs: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.offending_pairs.is_empty()
    }
}

/// Checks loop/arc color disjointness and converse equivalence, reporting one
/// witness per offending color.
pub fn validate(g: &ColoredGraph) -> ValidationReport {
    let n = g.n;
    let mut offending = Vec::new();

    let loop_owner: HashMap<Color, usize> =
        (0..n).rev().map(|v| (g.loop_color(v), v)).collect();
    let mut reported: HashSet<Color> = HashSet::new();
    for u in 0..n {
        for v in 0..n {
            let c = g.color(u, v);
            if u != v {
                if let Some(&lv) = loop_owner.get(&c) {
                    if reported.insert(c) {
                        offending.push(Violation::LoopArcShared {
                            color: c,
                            loop_vertex: lv,
                            arc: (u, v),
                        });
                    }
                }
            }
        }
    }
    let loop_edge_disjoint = offending.is_empty();

    // color -> (first witness, color of its reverse)
    let mut reverse_of: HashMap<Color, (Pair, Color)> = HashMap::new();
    let mut reported: HashSet<Color> = HashSet::new();
    let mut converse_equivalent = true;
    for u in 0..n {
        for v in 0..n {
            let c = g.color(u, v);
            let r = g.color(v, u);
            let (first, first_r) = *reverse_of.entry(c).or_insert(((u, v), r));
            if first_r != r {
                converse_equivalent = false;
                if reported.insert(c) {
                    offending.push(Violation::ConverseMismatch {
                        color: c,
                        first,
                        second: (u, v),
                        first_reverse_color: first_r,
                        second_reverse_color: r,
                    });
                }
            }
        }
    }

    ValidationReport {
        loop_edge_disjoint,
        converse_equivalent,
        offending_pairs: offending,
    }
}

/// The converse map `color(u,v) ↦ color(v,u)`, if the coloring is converse-equivalent.
pub fn converse_map(g: &ColoredGraph) -> Option<HashMap<Color, Color>> {
    let mut map = HashMap::new();
    for u in 0..g.n {
        for v in 0..g.n {
            if *map.entry(g.color(u, v)).or_insert(g.color(v, u)) != g.color(v, u) {
                return None;
            }
        }
    }
    Some(map)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> ColoredGraph {
        // loops 0, edges 1, non-edges 2
        ColoredGraph::new(3, vec![0, 1, 2, 1, 0, 1, 2, 1, 0]).unwrap()
    }

    #[test]
    fn uniform_k3_is_valid() {
        let r = validate(&ColoredGraph::uniform(3));
        assert!(r.loop_edge_disjoint && r.converse_equivalent);
        assert!(r.offending_pairs.is_empty());
    }

    #[test]
    fn shared_loop_arc_color_is_reported() {
        let g = ColoredGraph::new(2, vec![0, 0, 1, 0]).unwrap();
        let r = validate(&g);
        assert!(!r.loop_edge_disjoint);
        assert!(r
            .offending_pairs
            .iter()
            .any(|v| matches!(v, Violation::LoopArcShared { color: 0, .. })));
    }

    #[test]
    fn directional_coloring_is_not_converse_equivalent() {
        // (0,1)=1 with reverse 2, (0,2)=1 with reverse 3
        let g = ColoredGraph::new(3, vec![0, 1, 1, 2, 0, 4, 3, 4, 0]).unwrap();
        let r = validate(&g);
        assert!(r.loop_edge_disjoint);
        assert!(!r.converse_equivalent);
        assert!(!r.is_valid());
    }

    #[test]
    fn compare_examples() {
        let g = path3();
        assert_eq!(compare(&g, &g).unwrap(), RefinementOrder::Equal);
        let u = ColoredGraph::uniform(3);
        let d = ColoredGraph::discrete(3);
        assert_eq!(compare(&u, &d).unwrap(), RefinementOrder::StrictlyCoarser);
        assert_eq!(compare(&d, &u).unwrap(), RefinementOrder::StrictlyFiner);

        let split0 = ColoredGraph::new(3, vec![0, 2, 2, 2, 1, 2, 2, 2, 1]).unwrap();
        let split2 = ColoredGraph::new(3, vec![0, 2, 2, 2, 0, 2, 2, 2, 1]).unwrap();
        assert_eq!(
            compare(&split0, &split2).unwrap(),
            RefinementOrder::Incomparable
        );
        assert!(matches!(
            compare(&g, &ColoredGraph::uniform(4)),
            Err(Error::SizeMismatch { .. })
        ));
    }

    #[test]
    fn compare_ignores_color_names() {
        let g = path3();
        let renamed = ColoredGraph::new(3, g.table().iter().map(|c| 10 - c).collect()).unwrap();
        assert_eq!(compare(&g, &renamed).unwrap(), RefinementOrder::Equal);
    }

    #[test]
    fn neighborhood_examples() {
        let g = path3();
        assert!(neighborhood(&g, 1, &[], Direction::Out).unwrap().is_empty());
        assert_eq!(neighborhood(&g, 1, &[1], Direction::Out).unwrap(), vec![0, 2]);
        assert_eq!(
            neighborhood(&g, 0, &[0, 1, 2], Direction::In).unwrap(),
            vec![0, 1, 2]
        );
        assert_eq!(neighborhood(&g, 2, &[0], Direction::Out).unwrap(), vec![2]);
        assert!(neighborhood(&g, 3, &[0], Direction::Out).is_err());
    }

    #[test]
    fn canonical_renumber_orders_loops_first() {
        let g = ColoredGraph::new(2, vec![7, 3, 3, 9]).unwrap();
        let c = canonical_renumber(&g);
        assert_eq!(c.table(), &[0, 2, 2, 1]);
        assert_eq!(canonical_renumber(&c), c);
        assert!(c.is_dense());
    }

    #[test]
    fn permuted_colors_canonicalize_identically() {
        let g = path3();
        let shuffled = ColoredGraph::new(3, g.table().iter().map(|c| (c + 1) % 3).collect()).unwrap();
        assert_eq!(canonical_renumber(&shuffled), canonical_renumber(&g));
    }

    #[test]
    fn union_and_induced_round_trip() {
        let g = path3();
        let u = g.disjoint_union(&ColoredGraph::uniform(2));
        assert_eq!(u.n(), 5);
        assert_eq!(u.induced(0..3), g);
        assert_eq!(u.color(0, 4), 3);
        assert!(validate(&u).is_valid());
    }

    #[test]
    fn discrete_has_n_squared_classes() {
        let d = ColoredGraph::discrete(4);
        assert!(d.is_discrete());
        assert_eq!(d.class_counts(), (4, 12));
        assert!(ColoredGraph::discrete(1).is_discrete());
        assert!(ColoredGraph::uniform(1).is_discrete());
    }
}
