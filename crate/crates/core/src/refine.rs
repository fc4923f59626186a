//! 2-dimensional Weisfeiler-Leman refinement, stabilization, 1-dimensional
//! color refinement and the two-graph distinguisher.
//!
//! One refinement step recolors every pair `(v₁, v₂)` by its old color
//! together with a multiset over all third vertices `w`:
//!
//! | variant          | element for `w`                                   | aggregate |
//! |------------------|---------------------------------------------------|-----------|
//! | `Counting`       | `(χ(w,v₂), χ(v₁,w))`                               | multiset  |
//! | `ConverseAware`  | `(χ(w,v₂), χ(v₂,w), χ(v₁,w), χ(w,v₁))`             | multiset  |
//! | `Set`            | `(χ(w,v₂), χ(v₁,w))`                               | set       |
//!
//! Keeping the old color in the signature makes every step a refinement.

use std::collections::HashMap;
use std::hash::Hash;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{canonical_renumber, compare, validate, Color, ColoredGraph, RefinementOrder};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RefinementVariant {
    #[default]
    Counting,
    ConverseAware,
    Set,
}

impl RefinementVariant {
    pub fn requires_converse_equivalence(self) -> bool {
        !matches!(self, Self::ConverseAware)
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Counting => "counting",
            Self::ConverseAware => "converse-aware",
            Self::Set => "set",
        }
    }
}

impl std::fmt::Display for RefinementVariant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for RefinementVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "counting" => Ok(Self::Counting),
            "converse-aware" | "converse_aware" => Ok(Self::ConverseAware),
            "set" => Ok(Self::Set),
            other => Err(Error::InvalidParameter(format!("unknown variant {other:?}"))),
        }
    }
}

/// Rejects colorings the variant cannot refine soundly.
pub fn check_preconditions(g: &ColoredGraph, variant: RefinementVariant) -> Result<()> {
    let report = validate(g);
    if !report.loop_edge_disjoint {
        return Err(Error::LoopArcOverlap { report });
    }
    if variant.requires_converse_equivalence() && !report.converse_equivalent {
        return Err(Error::NotConverseEquivalent { report });
    }
    Ok(())
}

/// One refinement step, canonically renumbered.
pub fn refine_step(g: &ColoredGraph, variant: RefinementVariant) -> Result<ColoredGraph> {
    check_preconditions(g, variant)?;
    Ok(refine_unchecked(g, variant))
}

/// [`refine_step`] without the precondition check, for examining colorings
/// the variant is not meant for.
pub fn refine_unchecked(g: &ColoredGraph, variant: RefinementVariant) -> ColoredGraph {
    let n = g.n();
    let old = g.densified();
    let mut transposed = vec![0 as Color; n * n];
    for u in 0..n {
        for v in 0..n {
            transposed[v * n + u] = old[u * n + v];
        }
    }
    let new = match variant {
        RefinementVariant::Counting | RefinementVariant::Set => {
            let dedup = variant == RefinementVariant::Set;
            recolor(n, &old, dedup, |v1, v2, out: &mut Vec<u64>| {
                let row = &old[v1 * n..(v1 + 1) * n];
                let col = &transposed[v2 * n..(v2 + 1) * n];
                out.extend(
                    col.iter()
                        .zip(row)
                        .map(|(&a, &b)| (a as u64) << 32 | b as u64),
                );
            })
        }
        RefinementVariant::ConverseAware => recolor(n, &old, false, |v1, v2, out: &mut Vec<u128>| {
            let row1 = &old[v1 * n..(v1 + 1) * n];
            let col1 = &transposed[v1 * n..(v1 + 1) * n];
            let row2 = &old[v2 * n..(v2 + 1) * n];
            let col2 = &transposed[v2 * n..(v2 + 1) * n];
            out.extend((0..n).map(|w| {
                (col2[w] as u128) << 96
                    | (row2[w] as u128) << 64
                    | (row1[w] as u128) << 32
                    | col1[w] as u128
            }));
        }),
    };
    canonical_renumber(&ColoredGraph::new(n, new).expect("table size is n²"))
}

/// Groups pairs by `(old color, sorted elements)`. Rows are signed in
/// parallel and interned in row order, so the result is deterministic.
fn recolor<K, F>(n: usize, old: &[Color], dedup: bool, fill: F) -> Vec<Color>
where
    K: Copy + Ord + Hash + Send + Sync + From<u32>,
    F: Fn(usize, usize, &mut Vec<K>) + Sync,
{
    let mut interned: HashMap<Vec<K>, Color> = HashMap::new();
    let mut new = Vec::with_capacity(n * n);
    const CHUNK: usize = 16;
    for start in (0..n).step_by(CHUNK) {
        let rows: Vec<Vec<Vec<K>>> = (start..(start + CHUNK).min(n))
            .into_par_iter()
            .map(|v1| {
                (0..n)
                    .map(|v2| {
                        let mut sig = Vec::with_capacity(n + 1);
                        fill(v1, v2, &mut sig);
                        sig.sort_unstable();
                        if dedup {
                            sig.dedup();
                        }
                        sig.insert(0, K::from(old[v1 * n + v2]));
                        sig
                    })
                    .collect()
            })
            .collect();
        for sig in rows.into_iter().flatten() {
            let next = interned.len() as Color;
            new.push(*interned.entry(sig).or_insert(next));
        }
    }
    new
}

/// Outcome of iterating a refinement to its fixpoint.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StabilizationResult {
    /// `G̃`, canonically renumbered.
    #[serde(skip)]
    pub stable_graph: Option<ColoredGraph>,
    /// Smallest `k` with `G⁽ᵏ⁾ ≡ G⁽ᵏ⁺¹⁾`.
    pub iterations: usize,
    /// `(vertex classes, edge classes)` of `G⁽⁰⁾ … G⁽ᵏ⁾`.
    pub trace: Vec<(usize, usize)>,
}

impl StabilizationResult {
    pub fn stable(&self) -> &ColoredGraph {
        self.stable_graph.as_ref().expect("populated by stabilize")
    }

    pub fn into_stable(self) -> ColoredGraph {
        self.stable_graph.expect("populated by stabilize")
    }
}

/// Iterates [`refine_step`] until the partition stops changing.
pub fn stabilize(g: &ColoredGraph, variant: RefinementVariant) -> Result<StabilizationResult> {
    check_preconditions(g, variant)?;
    let n = g.n();
    let mut current = canonical_renumber(g);
    let mut trace = vec![current.class_counts()];
    loop {
        let next = refine_unchecked(&current, variant);
        // a refinement with the same class count is the same partition
        if next.palette_size() == current.palette_size() {
            if compare(&current, &next)? != RefinementOrder::Equal {
                return Err(Error::Inconsistent(
                    "refinement kept the class count but changed the partition".into(),
                ));
            }
            break;
        }
        current = next;
        trace.push(current.class_counts());
    }
    let iterations = trace.len() - 1;
    debug_assert!(iterations <= (n * n).saturating_sub(1));
    Ok(StabilizationResult {
        stable_graph: Some(current),
        iterations,
        trace,
    })
}

/// The sequence `G⁽⁰⁾, G⁽¹⁾, …, G⁽ᵏ⁾` up to the stabilization.
pub fn refinement_sequence(g: &ColoredGraph, variant: RefinementVariant) -> Result<Vec<ColoredGraph>> {
    check_preconditions(g, variant)?;
    let mut seq = vec![canonical_renumber(g)];
    loop {
        let last = seq.last().expect("nonempty");
        let next = refine_unchecked(last, variant);
        if next.palette_size() == last.palette_size() {
            return Ok(seq);
        }
        seq.push(next);
    }
}

/// Smallest `j` with `target ⪰ G⁽ʲ⁾`; `target` must satisfy `g ⪰ target ⪰ G̃`.
pub fn min_wl_cover(
    g: &ColoredGraph,
    target: &ColoredGraph,
    variant: RefinementVariant,
) -> Result<usize> {
    if !compare(g, target)?.is_coarser_or_equal() {
        return Err(Error::OutsideSandwich(
            "target is not a refinement of the graph".into(),
        ));
    }
    let seq = refinement_sequence(g, variant)?;
    for (j, gj) in seq.iter().enumerate() {
        if compare(target, gj)?.is_coarser_or_equal() {
            return Ok(j);
        }
    }
    Err(Error::OutsideSandwich(
        "target is strictly finer than the stabilization".into(),
    ))
}

/// Result of 1-dimensional color refinement.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Wl1Result {
    /// Canonical vertex colors (first occurrence order).
    pub vertex_colors: Vec<Color>,
    pub classes: usize,
    pub iterations: usize,
}

fn first_occurrence_ids<T: Hash + Eq>(items: impl IntoIterator<Item = T>) -> (Vec<Color>, usize) {
    let mut map = HashMap::new();
    let ids = items
        .into_iter()
        .map(|x| {
            let next = map.len() as Color;
            *map.entry(x).or_insert(next)
        })
        .collect();
    (ids, map.len())
}

/// Color refinement on vertices: each vertex is recolored by its old color
/// and the multiset of `(χ(v,w), color(w))` over all `w`.
pub fn wl1_stabilize(g: &ColoredGraph) -> Wl1Result {
    let n = g.n();
    let (mut colors, mut classes) = first_occurrence_ids((0..n).map(|v| g.loop_color(v)));
    let mut iterations = 0;
    loop {
        let (next, next_classes) = first_occurrence_ids((0..n).map(|v| {
            let mut m: Vec<(Color, Color)> = (0..n).map(|w| (g.color(v, w), colors[w])).collect();
            m.sort_unstable();
            (colors[v], m)
        }));
        if next_classes == classes {
            break;
        }
        colors = next;
        classes = next_classes;
        iterations += 1;
    }
    Wl1Result {
        vertex_colors: colors,
        classes,
        iterations,
    }
}

/// Verdict of comparing two stabilizations by their color-class sizes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DistinguishVerdict {
    pub distinguished: bool,
    /// A stable color whose class size differs between the two graphs, in the
    /// shared namespace of their disjoint union.
    pub witness_color: Option<Color>,
    pub iterations_used: usize,
}

fn first_count_difference(left: &[Color], right: &[Color]) -> Option<Color> {
    let mut counts: HashMap<Color, (usize, usize)> = HashMap::new();
    for &c in left {
        counts.entry(c).or_default().0 += 1;
    }
    for &c in right {
        counts.entry(c).or_default().1 += 1;
    }
    counts
        .into_iter()
        .filter(|(_, (a, b))| a != b)
        .map(|(c, _)| c)
        .min()
}

fn half_colors(u: &ColoredGraph, range: std::ops::Range<usize>) -> Vec<Color> {
    range
        .clone()
        .flat_map(|a| range.clone().map(move |b| (a, b)))
        .map(|(a, b)| u.color(a, b))
        .collect()
}

/// 2-WL isomorphism test: stabilizes the disjoint union and compares the
/// pair counts of every color between the two halves. Colors of `g` and `h`
/// are read in one shared namespace. Different sizes short-circuit without
/// refinement.
pub fn distinguish(
    g: &ColoredGraph,
    h: &ColoredGraph,
    variant: RefinementVariant,
) -> Result<DistinguishVerdict> {
    check_preconditions(g, variant)?;
    check_preconditions(h, variant)?;
    let union = canonical_renumber(&g.disjoint_union(h));
    let (a, b) = (g.n(), h.n());
    if a != b {
        let witness = first_count_difference(&half_colors(&union, 0..a), &half_colors(&union, a..a + b));
        return Ok(DistinguishVerdict {
            distinguished: true,
            witness_color: witness,
            iterations_used: 0,
        });
    }
    let stab = stabilize(&union, variant)?;
    let stable = stab.stable();
    let witness = first_count_difference(&half_colors(stable, 0..a), &half_colors(stable, a..a + b));
    Ok(DistinguishVerdict {
        distinguished: witness.is_some(),
        witness_color: witness,
        iterations_used: stab.iterations,
    })
}

/// 1-WL counterpart of [`distinguish`], comparing vertex color counts.
pub fn distinguish_wl1(g: &ColoredGraph, h: &ColoredGraph) -> DistinguishVerdict {
    let union = g.disjoint_union(h);
    let (a, b) = (g.n(), h.n());
    if a != b {
        return DistinguishVerdict {
            distinguished: true,
            witness_color: first_count_difference(&union.vertex_colors()[..a], &union.vertex_colors()[a..]),
            iterations_used: 0,
        };
    }
    let r = wl1_stabilize(&union);
    let witness = first_count_difference(&r.vertex_colors[..a], &r.vertex_colors[a..]);
    DistinguishVerdict {
        distinguished: witness.is_some(),
        witness_color: witness,
        iterations_used: r.iterations,
    }
}
