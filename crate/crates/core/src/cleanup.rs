//! Conditions C1/C2 and the clean-up procedure.
//!
//! * C1: the color of an arc determines the loop colors of its tail and head.
//! * C2: for every arc color `c` and vertex classes `A`, `B`, all `v ∈ A` have
//!   the same number of `c`-colored arcs to `B` and from `B`. The set variant
//!   compares color sets `{χ(v,u) : u ∈ B}` (and the reverse) instead of counts.
//!
//! A clean-up step is two moves: recolor every pair by
//! `(χ(u,v), χ(v,v), χ(u,u))`, then split vertex classes by their full color
//! degree profile. [`ccu`] repeats steps until both conditions hold.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::graph::{canonical_renumber, compare, Color, ColoredGraph, Pair, RefinementOrder};
use crate::refine::RefinementVariant;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct C1Violation {
    pub color: Color,
    pub first: Pair,
    pub second: Pair,
}

/// Two members of `class` whose `edge_color` degrees towards `target_class`
/// differ. Degrees are `(out, in)`; in the set variant only presence matters.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct C2Violation {
    pub edge_color: Color,
    pub class: Color,
    pub target_class: Color,
    pub first: usize,
    pub second: usize,
    pub first_degree: (usize, usize),
    pub second_degree: (usize, usize),
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub c1_violations: Vec<C1Violation>,
    pub c2_violations: Vec<C2Violation>,
}

impl ConditionReport {
    pub fn is_clean(&self) -> bool {
        self.c1_violations.is_empty() && self.c2_violations.is_empty()
    }
}

fn counts_only_presence(variant: RefinementVariant) -> bool {
    variant == RefinementVariant::Set
}

/// Color degrees of a vertex: `(edge color, target loop color) → (out, in)`.
type DegreeProfile = BTreeMap<(Color, Color), (usize, usize)>;

fn degree_profile(g: &ColoredGraph, v: usize, presence: bool) -> DegreeProfile {
    let mut profile = DegreeProfile::new();
    for w in (0..g.n()).filter(|&w| w != v) {
        let b = g.loop_color(w);
        profile.entry((g.color(v, w), b)).or_default().0 += 1;
        profile.entry((g.color(w, v), b)).or_default().1 += 1;
    }
    if presence {
        for d in profile.values_mut() {
            *d = ((d.0 > 0) as usize, (d.1 > 0) as usize);
        }
    }
    profile
}

pub fn check_conditions(g: &ColoredGraph, variant: RefinementVariant) -> ConditionReport {
    let n = g.n();
    let mut report = ConditionReport::default();

    let mut ends: HashMap<Color, (Pair, (Color, Color))> = HashMap::new();
    let mut reported = HashSet::new();
    for u in 0..n {
        for v in (0..n).filter(|&v| v != u) {
            let c = g.color(u, v);
            let here = (g.loop_color(u), g.loop_color(v));
            let (first, there) = *ends.entry(c).or_insert(((u, v), here));
            if there != here && reported.insert(c) {
                report.c1_violations.push(C1Violation {
                    color: c,
                    first,
                    second: (u, v),
                });
            }
        }
    }

    let presence = counts_only_presence(variant);
    let mut representative: HashMap<Color, (usize, DegreeProfile)> = HashMap::new();
    let mut reported = HashSet::new();
    for v in 0..n {
        let class = g.loop_color(v);
        let profile = degree_profile(g, v, presence);
        let (first, first_profile) = representative.entry(class).or_insert_with(|| (v, profile.clone()));
        if *first_profile == profile {
            continue;
        }
        let keys: std::collections::BTreeSet<_> = first_profile.keys().chain(profile.keys()).collect();
        for &key in keys {
            let a = first_profile.get(&key).copied().unwrap_or_default();
            let b = profile.get(&key).copied().unwrap_or_default();
            if a != b && reported.insert((key.0, class, key.1)) {
                report.c2_violations.push(C2Violation {
                    edge_color: key.0,
                    class,
                    target_class: key.1,
                    first: *first,
                    second: v,
                    first_degree: a,
                    second_degree: b,
                });
            }
        }
    }
    report
}

/// Move 1: recolor `(u,v)` by `(χ(u,v), χ(v,v), χ(u,u))`.
pub fn recolor_by_ends(g: &ColoredGraph) -> ColoredGraph {
    let n = g.n();
    let mut ids: HashMap<(Color, Color, Color), Color> = HashMap::new();
    let colors = (0..n * n)
        .map(|i| {
            let (u, v) = (i / n, i % n);
            let key = (g.color(u, v), g.loop_color(v), g.loop_color(u));
            let next = ids.len() as Color;
            *ids.entry(key).or_insert(next)
        })
        .collect();
    canonical_renumber(&ColoredGraph::new(n, colors).expect("table size is n²"))
}

/// Move 2: split vertex classes by their color degree profiles; arcs keep
/// their colors.
pub fn split_by_degrees(g: &ColoredGraph, variant: RefinementVariant) -> ColoredGraph {
    let n = g.n();
    let presence = counts_only_presence(variant);
    let mut ids: HashMap<(Color, DegreeProfile), Color> = HashMap::new();
    let loops: Vec<Color> = (0..n)
        .map(|v| {
            let key = (g.loop_color(v), degree_profile(g, v, presence));
            let next = ids.len() as Color;
            *ids.entry(key).or_insert(next)
        })
        .collect();
    // keep arc IDs apart from the new loop IDs
    let offset = ids.len() as Color;
    let colors = (0..n * n)
        .map(|i| {
            let (u, v) = (i / n, i % n);
            if u == v {
                loops[u]
            } else {
                offset + g.color(u, v)
            }
        })
        .collect();
    canonical_renumber(&ColoredGraph::new(n, colors).expect("table size is n²"))
}

/// One clean-up step (both moves).
pub fn cleanup_step(g: &ColoredGraph, variant: RefinementVariant) -> ColoredGraph {
    split_by_degrees(&recolor_by_ends(g), variant)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CleanupResult {
    pub graph: ColoredGraph,
    pub clean_up_steps: usize,
    pub vertex_splits: usize,
    /// Game cost of the clean-up: two moves per step.
    pub moves: usize,
    /// Vertex class count increase of each step.
    pub splits_per_step: Vec<usize>,
}

/// Complete clean-up: steps until C1 and C2 hold. An already clean graph
/// takes no steps.
pub fn ccu(g: &ColoredGraph, variant: RefinementVariant) -> CleanupResult {
    let mut current = canonical_renumber(g);
    let start_classes = current.vertex_class_count();
    let mut splits_per_step = Vec::new();
    while !check_conditions(&current, variant).is_clean() {
        let before = current.vertex_class_count();
        let next = cleanup_step(&current, variant);
        debug_assert!(matches!(
            compare(&current, &next),
            Ok(RefinementOrder::Equal | RefinementOrder::StrictlyCoarser)
        ));
        let split = next.vertex_class_count() - before;
        current = next;
        splits_per_step.push(split);
        // a step without a vertex split leaves both conditions satisfied
        assert!(
            split > 0 || check_conditions(&current, variant).is_clean(),
            "clean-up step without vertex split did not finish"
        );
    }
    let steps = splits_per_step.len();
    CleanupResult {
        vertex_splits: current.vertex_class_count() - start_classes,
        graph: current,
        clean_up_steps: steps,
        moves: 2 * steps,
        splits_per_step,
    }
}

/// `ccu(g) = g`.
pub fn is_cleaned_up(g: &ColoredGraph, variant: RefinementVariant) -> bool {
    check_conditions(g, variant).is_clean()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encode::encode_edges;
    use crate::refine::stabilize;

    const COUNTING: RefinementVariant = RefinementVariant::Counting;

    fn c1_broken_k3() -> ColoredGraph {
        // loops {0}, {1,2}; every arc one color
        ColoredGraph::new(3, vec![0, 2, 2, 2, 1, 2, 2, 2, 1]).unwrap()
    }

    /// Vertex 0 has one neighbor in {3,4,5}, vertex 1 has two.
    fn c2_broken() -> ColoredGraph {
        let labels = [0, 0, 0, 1, 1, 1];
        encode_edges(6, &[(0, 3), (1, 4), (1, 5)], Some(&labels)).unwrap()
    }

    #[test]
    fn stable_graphs_are_clean() {
        for g in [encode_edges(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)], None).unwrap(), c2_broken()] {
            let s = stabilize(&g, COUNTING).unwrap().into_stable();
            assert!(check_conditions(&s, COUNTING).is_clean());
            let r = ccu(&s, COUNTING);
            assert_eq!(r.clean_up_steps, 0);
            assert_eq!(r.vertex_splits, 0);
            assert_eq!(r.graph, s);
        }
    }

    #[test]
    fn c1_violation_detected_and_repaired() {
        let g = c1_broken_k3();
        let report = check_conditions(&g, COUNTING);
        assert_eq!(report.c1_violations.len(), 1);
        assert_eq!(report.c1_violations[0].color, 2);

        let step = recolor_by_ends(&g);
        assert!(check_conditions(&step, COUNTING).c1_violations.is_empty());
        // arcs out of 0, into 0, and within {1,2}
        assert_eq!(step.class_counts(), (2, 3));
        assert_ne!(step.color(0, 1), step.color(1, 2));
        assert_ne!(step.color(0, 1), step.color(1, 0));
        assert_eq!(step.color(0, 1), step.color(0, 2));

        let r = ccu(&g, COUNTING);
        assert!(check_conditions(&r.graph, COUNTING).is_clean());
        assert_eq!(r.clean_up_steps, 1);
        assert_eq!(r.moves, 2);
    }

    #[test]
    fn c2_violation_has_witnesses() {
        let g = c2_broken();
        let report = check_conditions(&g, COUNTING);
        let v = report
            .c2_violations
            .iter()
            .find(|v| v.edge_color == 2 && v.class == 0 && v.target_class == 1)
            .expect("edge degree violation from class 0 to class 1");
        assert_eq!((v.first, v.second), (0, 1));
        assert_eq!(v.first_degree, (1, 1));
        assert_eq!(v.second_degree, (2, 2));

        let r = ccu(&g, COUNTING);
        assert!(r.vertex_splits >= 1);
        assert!(check_conditions(&r.graph, COUNTING).is_clean());
    }

    #[test]
    fn set_variant_ignores_multiplicities() {
        // 0 and 1 both see an edge into {3,4,5}; counts differ, sets agree on
        // the out side, but 2 sees none
        let labels = [0, 0, 0, 1, 1, 1];
        let g = encode_edges(6, &[(0, 3), (1, 4), (1, 5), (2, 3)], Some(&labels)).unwrap();
        let set = check_conditions(&g, RefinementVariant::Set);
        let counting = check_conditions(&g, COUNTING);
        assert!(set.c2_violations.iter().all(|v| v.class == 1));
        assert!(counting.c2_violations.iter().any(|v| v.class == 0));
    }

    #[test]
    fn ccu_is_idempotent_and_sandwiched() {
        for g in [c1_broken_k3(), c2_broken()] {
            let r = ccu(&g, COUNTING);
            let again = ccu(&r.graph, COUNTING);
            assert_eq!(again.clean_up_steps, 0);
            assert_eq!(again.graph, r.graph);
            let stable = stabilize(&g, COUNTING).unwrap().into_stable();
            assert!(compare(&g, &r.graph).unwrap().is_coarser_or_equal());
            assert!(compare(&r.graph, &stable).unwrap().is_coarser_or_equal());
        }
    }
}
