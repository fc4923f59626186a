//! Small/large vertex classes, the potential `f`, and auxiliary graphs.
//!
//! The auxiliary graph of a game graph `G` has an upper and a lower copy of
//! every pair `(C, M)` where `C` is a vertex set that formed a small vertex
//! class in some graph played so far (the tracker `𝒯`) and `M ⊆ C`. With
//!
//! ```text
//! cond(C, M; D, N)  :⟺  ∃ color set S  ∀ v ∈ C :  v ∈ M ⟺ N⁺_S(v) = N
//! ```
//!
//! upper `(C,M)` and lower `(D,N)` are adjacent iff `cond(C,M;D,N)`, and two
//! upper vertices iff the condition holds in both directions. Upper vertices
//! with `M = ∅` are kept as vertices but never get edges: `S = ∅` satisfies
//! `cond(C,∅;D,N)` for every nonempty `N`, which would tie every component
//! together and no auxiliary graph would ever be triangle-stable.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Color, ColoredGraph};

/// Largest class size the auxiliary graph materializes (`2^16` subsets).
pub const MAX_AUX_CLASS: usize = 16;

/// Rule for the large/small threshold `t(n)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ThresholdConfig {
    /// Fixed `t` for every `n`; `None` means `log₂(n)/2`.
    pub fixed: Option<f64>,
}

impl ThresholdConfig {
    pub fn fixed(t: f64) -> Self {
        Self { fixed: Some(t) }
    }

    pub fn t(&self, n: usize) -> f64 {
        self.fixed.unwrap_or_else(|| (n.max(1) as f64).log2() / 2.0)
    }

    pub fn is_large(&self, size: usize, n: usize) -> bool {
        size as f64 >= self.t(n)
    }
}

/// Vertex classes as sorted member lists, split by size.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassSizeReport {
    pub large: Vec<Vec<usize>>,
    pub small: Vec<Vec<usize>>,
}

/// Vertex classes of `g` ordered by their first member.
pub fn vertex_classes(g: &ColoredGraph) -> Vec<Vec<usize>> {
    let mut by_color: BTreeMap<Color, Vec<usize>> = BTreeMap::new();
    for v in 0..g.n() {
        by_color.entry(g.loop_color(v)).or_default().push(v);
    }
    let mut classes: Vec<_> = by_color.into_values().collect();
    classes.sort();
    classes
}

pub fn classify_classes(g: &ColoredGraph, cfg: &ThresholdConfig) -> ClassSizeReport {
    let (large, small) = vertex_classes(g)
        .into_iter()
        .partition(|c| cfg.is_large(c.len(), g.n()));
    ClassSizeReport { large, small }
}

/// `f(χ) = Σ_v |{χ(v,w) : w ∈ V}|`.
pub fn potential_f(g: &ColoredGraph) -> usize {
    (0..g.n())
        .map(|v| {
            let mut row = g.row(v).to_vec();
            row.sort_unstable();
            row.dedup();
            row.len()
        })
        .sum()
}

/// The collection `𝒯` of vertex sets that were small classes at some point.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistoryTracker {
    pub classes: BTreeSet<Vec<usize>>,
}

impl HistoryTracker {
    pub fn register(&mut self, g: &ColoredGraph, cfg: &ThresholdConfig) {
        self.classes.extend(classify_classes(g, cfg).small);
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }
}

pub fn register_history(
    mut tracker: HistoryTracker,
    g: &ColoredGraph,
    cfg: &ThresholdConfig,
) -> HistoryTracker {
    tracker.register(g, cfg);
    tracker
}

/// Square bit matrix with row-wise OR operations.
#[derive(Clone, Debug, PartialEq, Eq)]
struct BitMatrix {
    size: usize,
    words: usize,
    bits: Vec<u64>,
}

impl BitMatrix {
    fn new(size: usize) -> Self {
        let words = size.div_ceil(64).max(1);
        Self {
            size,
            words,
            bits: vec![0; size * words],
        }
    }

    fn row(&self, i: usize) -> &[u64] {
        &self.bits[i * self.words..(i + 1) * self.words]
    }

    fn get(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.words + j / 64] >> (j % 64) & 1 == 1
    }

    fn set(&mut self, i: usize, j: usize) {
        self.bits[i * self.words + j / 64] |= 1 << (j % 64);
    }

    fn clear(&mut self, i: usize, j: usize) {
        self.bits[i * self.words + j / 64] &= !(1 << (j % 64));
    }

    fn ones(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.row(i).iter().enumerate().flat_map(|(w, &word)| {
            (0..64)
                .filter(move |b| word >> b & 1 == 1)
                .map(move |b| w * 64 + b)
        })
    }

    fn or_row_into(&self, i: usize, acc: &mut [u64]) {
        for (a, b) in acc.iter_mut().zip(self.row(i)) {
            *a |= b;
        }
    }

    fn count(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn transposed(&self) -> Self {
        let mut t = Self::new(self.size);
        for i in 0..self.size {
            for j in self.ones(i).collect::<Vec<_>>() {
                t.set(j, i);
            }
        }
        t
    }

    fn is_subset_of(&self, other: &Self) -> bool {
        self.bits.iter().zip(&other.bits).all(|(a, b)| a & !b == 0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Upper,
    Lower,
}

/// A vertex of an auxiliary graph: side plus index into [`AuxGraph::vertex`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AuxNode {
    pub side: Side,
    pub index: usize,
}

impl AuxNode {
    pub fn upper(index: usize) -> Self {
        Self { side: Side::Upper, index }
    }

    pub fn lower(index: usize) -> Self {
        Self { side: Side::Lower, index }
    }
}

/// The auxiliary graph over a fixed list of vertex sets. Each side has one
/// vertex per `(class, mask)`, where bit `i` of `mask` selects the `i`-th
/// smallest member of the class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuxGraph {
    classes: Vec<Vec<usize>>,
    offsets: Vec<usize>,
    upper_upper: BitMatrix,
    upper_lower: BitMatrix,
}

impl AuxGraph {
    /// Edgeless graph over the given vertex sets (sorted and deduplicated).
    pub fn edgeless(classes: impl IntoIterator<Item = Vec<usize>>) -> Result<Self> {
        let set: BTreeSet<Vec<usize>> = classes
            .into_iter()
            .map(|mut c| {
                c.sort_unstable();
                c.dedup();
                c
            })
            .collect();
        let classes: Vec<Vec<usize>> = set.into_iter().collect();
        if let Some(c) = classes.iter().find(|c| c.len() > MAX_AUX_CLASS) {
            return Err(Error::InvalidParameter(format!(
                "class of size {} exceeds the auxiliary graph limit of {MAX_AUX_CLASS}",
                c.len()
            )));
        }
        let mut offsets = vec![0];
        for c in &classes {
            offsets.push(offsets.last().unwrap() + (1usize << c.len()));
        }
        let m = *offsets.last().unwrap();
        Ok(Self {
            classes,
            offsets,
            upper_upper: BitMatrix::new(m),
            upper_lower: BitMatrix::new(m),
        })
    }

    /// Vertices per side.
    pub fn side_len(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn classes(&self) -> &[Vec<usize>] {
        &self.classes
    }

    /// `(class members, mask)` of the vertex at `index` (either side).
    pub fn vertex(&self, index: usize) -> (&[usize], u64) {
        let k = self.offsets.partition_point(|&o| o <= index) - 1;
        (&self.classes[k], (index - self.offsets[k]) as u64)
    }

    /// Members of the subset selected by the vertex at `index`.
    pub fn subset(&self, index: usize) -> Vec<usize> {
        let (class, mask) = self.vertex(index);
        class
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, &v)| v)
            .collect()
    }

    pub fn index_of(&self, class: &[usize], mask: u64) -> Option<usize> {
        let k = self.classes.binary_search_by(|c| c.as_slice().cmp(class)).ok()?;
        (mask < 1 << class.len()).then(|| self.offsets[k] + mask as usize)
    }

    pub fn has_edge(&self, a: AuxNode, b: AuxNode) -> bool {
        match (a.side, b.side) {
            (Side::Upper, Side::Upper) => self.upper_upper.get(a.index, b.index),
            (Side::Upper, Side::Lower) => self.upper_lower.get(a.index, b.index),
            (Side::Lower, Side::Upper) => self.upper_lower.get(b.index, a.index),
            (Side::Lower, Side::Lower) => false,
        }
    }

    /// Inserts an undirected edge; lower–lower edges and loops are rejected.
    pub fn add_edge(&mut self, a: AuxNode, b: AuxNode) -> Result<()> {
        let m = self.side_len();
        if a.index >= m || b.index >= m {
            return Err(Error::InvalidParameter("aux vertex out of range".into()));
        }
        match (a.side, b.side) {
            (Side::Upper, Side::Upper) if a.index != b.index => {
                self.upper_upper.set(a.index, b.index);
                self.upper_upper.set(b.index, a.index);
            }
            (Side::Upper, Side::Lower) => self.upper_lower.set(a.index, b.index),
            (Side::Lower, Side::Upper) => self.upper_lower.set(b.index, a.index),
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "no aux edge allowed between {a:?} and {b:?}"
                )))
            }
        }
        Ok(())
    }

    pub fn edge_count(&self) -> usize {
        self.upper_upper.count() / 2 + self.upper_lower.count()
    }

    /// Every edge once: upper–upper with the smaller index first, then
    /// upper–lower.
    pub fn edges(&self) -> Vec<(AuxNode, AuxNode)> {
        let m = self.side_len();
        let mut edges = Vec::new();
        for a in 0..m {
            edges.extend(
                self.upper_upper
                    .ones(a)
                    .filter(|&b| b > a)
                    .map(|b| (AuxNode::upper(a), AuxNode::upper(b))),
            );
        }
        for a in 0..m {
            edges.extend(
                self.upper_lower
                    .ones(a)
                    .map(|b| (AuxNode::upper(a), AuxNode::lower(b))),
            );
        }
        edges
    }

    fn translate(&self, index: usize, other: &Self) -> Option<usize> {
        let (class, mask) = self.vertex(index);
        other.index_of(class, mask)
    }

    /// Vertex and edge containment, matching vertices by `(class, subset)`.
    pub fn is_subgraph_of(&self, other: &Self) -> bool {
        if self.classes == other.classes {
            return self.upper_upper.is_subset_of(&other.upper_upper)
                && self.upper_lower.is_subset_of(&other.upper_lower);
        }
        if !self.classes.iter().all(|c| other.classes.binary_search(c).is_ok()) {
            return false;
        }
        self.edges().into_iter().all(|(a, b)| {
            let map = |x: AuxNode| AuxNode {
                side: x.side,
                index: self.translate(x.index, other).expect("class present"),
            };
            other.has_edge(map(a), map(b))
        })
    }

    /// One simultaneous application of both completion rules: upper vertices
    /// with a common neighbor become adjacent, and an upper and a lower vertex
    /// with a common upper neighbor become adjacent.
    pub fn triangle_complete(&self) -> Self {
        let m = self.side_len();
        let lower_upper = self.upper_lower.transposed();
        let mut next = self.clone();
        for a in 0..m {
            let mut uu = self.upper_upper.row(a).to_vec();
            let mut ul = self.upper_lower.row(a).to_vec();
            for u in self.upper_upper.ones(a) {
                self.upper_upper.or_row_into(u, &mut uu);
                self.upper_lower.or_row_into(u, &mut ul);
            }
            for l in self.upper_lower.ones(a) {
                lower_upper.or_row_into(l, &mut uu);
            }
            let w = next.upper_upper.words;
            next.upper_upper.bits[a * w..(a + 1) * w].copy_from_slice(&uu);
            next.upper_lower.bits[a * w..(a + 1) * w].copy_from_slice(&ul);
            next.upper_upper.clear(a, a);
        }
        next
    }

    /// Components over both sides; each is a list of nodes in sorted order.
    pub fn components(&self) -> Vec<Vec<AuxNode>> {
        let m = self.side_len();
        let lower_upper = self.upper_lower.transposed();
        let id = |x: AuxNode| x.index + if x.side == Side::Lower { m } else { 0 };
        let mut seen = vec![false; 2 * m];
        let mut out = Vec::new();
        for start in (0..m).map(AuxNode::upper).chain((0..m).map(AuxNode::lower)) {
            if std::mem::replace(&mut seen[id(start)], true) {
                continue;
            }
            let mut comp = vec![start];
            let mut stack = vec![start];
            while let Some(x) = stack.pop() {
                let nbrs: Vec<AuxNode> = match x.side {
                    Side::Upper => self
                        .upper_upper
                        .ones(x.index)
                        .map(AuxNode::upper)
                        .chain(self.upper_lower.ones(x.index).map(AuxNode::lower))
                        .collect(),
                    Side::Lower => lower_upper.ones(x.index).map(AuxNode::upper).collect(),
                };
                for y in nbrs {
                    if !std::mem::replace(&mut seen[id(y)], true) {
                        comp.push(y);
                        stack.push(y);
                    }
                }
            }
            comp.sort();
            out.push(comp);
        }
        out
    }

    /// Structural test: in every component the upper vertices form a clique
    /// that is completely joined to the component's lower vertices.
    pub fn is_structurally_stable(&self) -> bool {
        self.components().iter().all(|comp| {
            let uppers: Vec<usize> = comp
                .iter()
                .filter(|x| x.side == Side::Upper)
                .map(|x| x.index)
                .collect();
            let lowers: Vec<usize> = comp
                .iter()
                .filter(|x| x.side == Side::Lower)
                .map(|x| x.index)
                .collect();
            uppers.iter().all(|&a| {
                uppers.iter().all(|&b| a == b || self.upper_upper.get(a, b))
                    && lowers.iter().all(|&l| self.upper_lower.get(a, l))
            })
        })
    }

    /// `△(H) = H`, cross-checked against the structural characterization.
    pub fn is_triangle_stable(&self) -> Result<bool> {
        let fixpoint = self.triangle_complete() == *self;
        let structural = self.is_structurally_stable();
        if fixpoint != structural {
            return Err(Error::Inconsistent(format!(
                "triangle fixpoint test says {fixpoint}, structural test says {structural}"
            )));
        }
        Ok(fixpoint)
    }

    pub fn dump(&self) -> AuxDump {
        let m = self.side_len();
        let vertices: Vec<AuxDumpVertex> = (0..m)
            .map(|i| {
                let (class, mask) = self.vertex(i);
                AuxDumpVertex {
                    class: class.to_vec(),
                    subset_mask: mask,
                }
            })
            .collect();
        AuxDump {
            upper: vertices.clone(),
            lower: vertices,
            edges: self
                .edges()
                .into_iter()
                .map(|(a, b)| [(a.side, a.index), (b.side, b.index)])
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuxDumpVertex {
    pub class: Vec<usize>,
    pub subset_mask: u64,
}

/// Serialized auxiliary graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuxDump {
    pub upper: Vec<AuxDumpVertex>,
    pub lower: Vec<AuxDumpVertex>,
    pub edges: Vec<[(Side, usize); 2]>,
}

/// Color constraints of one source vertex against a target set `N`:
/// the colors it uses towards `N` and towards `V ∖ N`.
struct RowSplit {
    inside: Vec<Color>,
    outside: Vec<Color>,
}

fn row_split(g: &ColoredGraph, v: usize, in_target: &[bool]) -> RowSplit {
    let mut inside = Vec::new();
    let mut outside = Vec::new();
    for (w, &c) in g.row(v).iter().enumerate() {
        if in_target[w] {
            inside.push(c);
        } else {
            outside.push(c);
        }
    }
    for s in [&mut inside, &mut outside] {
        s.sort_unstable();
        s.dedup();
    }
    RowSplit { inside, outside }
}

const FREE: u8 = 0;
const IN: u8 = 1;
const OUT: u8 = 2;

/// Partial assignment of colors to `S` with an undo log.
struct Assignment {
    state: Vec<u8>,
    touched: Vec<usize>,
}

impl Assignment {
    fn new(palette: usize) -> Self {
        Self {
            state: vec![FREE; palette],
            touched: Vec::new(),
        }
    }

    /// False on a clash with an earlier assignment.
    fn force(&mut self, c: Color, value: u8) -> bool {
        let s = &mut self.state[c as usize];
        if *s == FREE {
            *s = value;
            self.touched.push(c as usize);
            true
        } else {
            *s == value
        }
    }

    fn rollback(&mut self, mark: usize) {
        for c in self.touched.drain(mark..) {
            self.state[c] = FREE;
        }
    }
}

/// Searches for an assignment satisfying every clause. A literal `(c, true)`
/// means `c ∈ S`.
fn satisfy(clauses: &[Vec<(Color, bool)>], asg: &mut Assignment) -> bool {
    let open = clauses.iter().position(|clause| {
        !clause.iter().any(|&(c, pos)| asg.state[c as usize] == if pos { IN } else { OUT })
    });
    let Some(k) = open else { return true };
    for &(c, pos) in &clauses[k] {
        if asg.state[c as usize] != FREE {
            continue;
        }
        let mark = asg.touched.len();
        asg.force(c, if pos { IN } else { OUT });
        // earlier clauses stay satisfied since assignments only grow
        let found = satisfy(&clauses[k + 1..], asg);
        asg.rollback(mark);
        if found {
            return true;
        }
    }
    false
}

/// Decides `cond(C, M; D, N)` from the precomputed row splits of `C`'s
/// members against `N`.
fn condition_holds(splits: &[RowSplit], mask: u64, asg: &mut Assignment) -> bool {
    let mark = asg.touched.len();
    let mut ok = true;
    'forced: for (i, s) in splits.iter().enumerate() {
        if mask >> i & 1 == 1 {
            for &c in &s.inside {
                if !asg.force(c, IN) {
                    ok = false;
                    break 'forced;
                }
            }
            for &c in &s.outside {
                if !asg.force(c, OUT) {
                    ok = false;
                    break 'forced;
                }
            }
        }
    }
    if ok {
        let mut clauses = Vec::new();
        for (i, s) in splits.iter().enumerate() {
            if mask >> i & 1 == 1 {
                continue;
            }
            // a color towards both N and V ∖ N makes the clause a tautology
            let tautology = s.inside.iter().any(|c| s.outside.binary_search(c).is_ok());
            if !tautology {
                let clause: Vec<(Color, bool)> = s
                    .inside
                    .iter()
                    .map(|&c| (c, false))
                    .chain(s.outside.iter().map(|&c| (c, true)))
                    .collect();
                clauses.push(clause);
            }
        }
        ok = satisfy(&clauses, asg);
    }
    asg.rollback(mark);
    ok
}

/// Brute-force `cond` by enumerating subsets of the colors seen from `C`;
/// kept for cross-checking the constraint solver.
pub fn condition_by_enumeration(g: &ColoredGraph, c: &[usize], m: &[usize], n_set: &[usize]) -> bool {
    let mut relevant: Vec<Color> = c.iter().flat_map(|&v| g.row(v).iter().copied()).collect();
    relevant.sort_unstable();
    relevant.dedup();
    assert!(relevant.len() <= 20, "too many colors to enumerate");
    (0u32..1 << relevant.len()).any(|bits| {
        c.iter().all(|&v| {
            let nbhd: Vec<usize> = (0..g.n())
                .filter(|&w| {
                    let k = relevant.binary_search(&g.color(v, w)).unwrap();
                    bits >> k & 1 == 1
                })
                .collect();
            m.contains(&v) == (nbhd == n_set)
        })
    })
}

/// `cond(C, M; D, N)` for explicit vertex sets, via the constraint solver.
pub fn condition(g: &ColoredGraph, c: &[usize], m: &[usize], n_set: &[usize]) -> bool {
    let dense = ColoredGraph::new(g.n(), g.densified()).expect("same size");
    let mut in_target = vec![false; g.n()];
    for &w in n_set {
        in_target[w] = true;
    }
    let splits: Vec<RowSplit> = c.iter().map(|&v| row_split(&dense, v, &in_target)).collect();
    let mask = c
        .iter()
        .enumerate()
        .filter(|(_, v)| m.contains(v))
        .fold(0u64, |acc, (i, _)| acc | 1 << i);
    condition_holds(&splits, mask, &mut Assignment::new(dense.palette_size()))
}

/// Builds `Aux(G)` over the tracker's vertex sets.
pub fn build_aux(g: &ColoredGraph, tracker: &HistoryTracker) -> Result<AuxGraph> {
    let mut aux = AuxGraph::edgeless(tracker.classes.iter().cloned())?;
    if let Some(v) = aux.classes.iter().flatten().find(|&&v| v >= g.n()) {
        return Err(Error::VertexOutOfRange { vertex: *v, n: g.n() });
    }
    let dense = ColoredGraph::new(g.n(), g.densified()).expect("same size");
    let m = aux.side_len();
    let mut asg = Assignment::new(dense.palette_size());
    let mut in_target = vec![false; g.n()];
    // reach[a][b]: cond(upper a; target b)
    let mut reach = BitMatrix::new(m);
    for b in 0..m {
        let target = aux.subset(b);
        for &w in &target {
            in_target[w] = true;
        }
        for (k, class) in aux.classes.iter().enumerate() {
            let splits: Vec<RowSplit> = class.iter().map(|&v| row_split(&dense, v, &in_target)).collect();
            for mask in 1..1u64 << class.len() {
                if condition_holds(&splits, mask, &mut asg) {
                    reach.set(aux.offsets[k] + mask as usize, b);
                }
            }
        }
        for &w in &target {
            in_target[w] = false;
        }
    }
    for a in 0..m {
        for b in reach.ones(a).collect::<Vec<_>>() {
            aux.upper_lower.set(a, b);
            if a != b && reach.get(b, a) {
                aux.upper_upper.set(a, b);
            }
        }
    }
    Ok(aux)
}

/// Index mapping of one aux graph's vertices into a larger one, for callers
/// that compare graphs built over different trackers.
pub fn vertex_map(from: &AuxGraph, to: &AuxGraph) -> Option<HashMap<usize, usize>> {
    (0..from.side_len())
        .map(|i| from.translate(i, to).map(|j| (i, j)))
        .collect()
}
