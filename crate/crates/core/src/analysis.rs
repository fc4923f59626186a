//! Instrumented checks on auxiliary-graph sequences.
//!
//! * [`aux_trace`] runs the aux-guided loop on its own and checks
//!   `Aux(G⁽¹⁾) ⊇ △(Aux(G))` at every iteration.
//! * [`nesting_checks`] compares consecutive cleaned-up graphs `G ⪰ G′` of a
//!   game: `Aux(G) ⊆ Aux(G′)` always, and strictly when a class of `G` that is
//!   only incident with small vertex classes is refined in `G′`.

use serde::{Deserialize, Serialize};

use crate::aux::{build_aux, classify_classes, AuxDump, HistoryTracker, ThresholdConfig};
use crate::cleanup::ccu;
use crate::error::{Error, Result};
use crate::game::{algorithm1_cap, CleanedSnapshot};
use crate::graph::{ColoredGraph, Color};
use crate::refine::{check_preconditions, refine_unchecked, RefinementVariant};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuxTraceStep {
    pub iteration: usize,
    pub before: AuxDump,
    /// `Aux(G⁽¹⁾)`, before the clean-up that follows the refinement step.
    pub after_step: AuxDump,
    pub stable_before: bool,
    pub completion_contained: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuxTrace {
    pub steps: Vec<AuxTraceStep>,
    pub final_aux: AuxDump,
    pub stable: bool,
    pub cap_exceeded: bool,
    pub iterations: usize,
    pub completion_all_contained: bool,
    #[serde(skip)]
    pub final_graph: Option<ColoredGraph>,
}

/// The aux-guided loop on `g` with a fresh tracker. A hit loop cap is
/// reported in the result rather than as an error.
pub fn aux_trace(g: &ColoredGraph, variant: RefinementVariant, threshold: ThresholdConfig) -> Result<AuxTrace> {
    check_preconditions(g, variant)?;
    let cap = algorithm1_cap(g.n(), &threshold);
    let mut tracker = HistoryTracker::default();
    tracker.register(g, &threshold);
    let mut current = ccu(g, variant).graph;
    tracker.register(&current, &threshold);
    let mut steps = Vec::new();
    loop {
        let aux = build_aux(&current, &tracker)?;
        let stable = aux.is_triangle_stable()?;
        if stable || steps.len() >= cap {
            let iterations = steps.len();
            return Ok(AuxTrace {
                completion_all_contained: steps.iter().all(|s: &AuxTraceStep| s.completion_contained),
                steps,
                final_aux: aux.dump(),
                stable,
                cap_exceeded: !stable,
                iterations,
                final_graph: Some(current),
            });
        }
        let next = refine_unchecked(&current, variant);
        if next.palette_size() == current.palette_size() {
            return Err(Error::Inconsistent(
                "auxiliary graph of a stable cleaned-up graph is not triangle-stable".into(),
            ));
        }
        tracker.register(&next, &threshold);
        let after = build_aux(&next, &tracker)?;
        steps.push(AuxTraceStep {
            iteration: steps.len() + 1,
            before: aux.dump(),
            after_step: after.dump(),
            stable_before: false,
            completion_contained: aux.triangle_complete().is_subgraph_of(&after),
        });
        current = ccu(&next, variant).graph;
        tracker.register(&current, &threshold);
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NestingCheck {
    /// Index of the earlier snapshot.
    pub index: usize,
    pub subset: bool,
    /// A class only incident with small vertex classes was refined.
    pub small_refinement: bool,
    pub strict: bool,
}

impl NestingCheck {
    pub fn holds(&self) -> bool {
        self.subset && (!self.small_refinement || self.strict)
    }
}

/// Whether some vertex class of `g`, or arc class of `g` between two small
/// vertex classes, is split in the refinement `h`.
pub fn refines_small_class(g: &ColoredGraph, h: &ColoredGraph, threshold: &ThresholdConfig) -> bool {
    let n = g.n();
    let small: Vec<bool> = {
        let mut out = vec![false; n];
        for class in classify_classes(g, threshold).small {
            for v in class {
                out[v] = true;
            }
        }
        out
    };
    let mut first: std::collections::HashMap<Color, Color> = std::collections::HashMap::new();
    let mut arc_small: std::collections::HashMap<Color, bool> = std::collections::HashMap::new();
    for u in 0..n {
        for v in 0..n {
            let c = g.color(u, v);
            let incident_small = small[u] && small[v];
            let entry = arc_small.entry(c).or_insert(true);
            *entry &= incident_small;
            first.entry(c).or_insert(h.color(u, v));
        }
    }
    (0..n * n).any(|i| {
        let (u, v) = (i / n, i % n);
        let c = g.color(u, v);
        arc_small[&c] && first[&c] != h.color(u, v)
    })
}

pub fn nesting_checks(snapshots: &[CleanedSnapshot], threshold: &ThresholdConfig) -> Result<Vec<NestingCheck>> {
    snapshots
        .windows(2)
        .enumerate()
        .map(|(index, pair)| {
            let (a, b) = (&pair[0], &pair[1]);
            let aux_a = build_aux(&a.graph, &a.tracker)?;
            let aux_b = build_aux(&b.graph, &b.tracker)?;
            let subset = aux_a.is_subgraph_of(&aux_b);
            let strict = subset && !aux_b.is_subgraph_of(&aux_a);
            Ok(NestingCheck {
                index,
                subset,
                small_refinement: refines_small_class(&a.graph, &b.graph, threshold),
                strict,
            })
        })
        .collect()
}
