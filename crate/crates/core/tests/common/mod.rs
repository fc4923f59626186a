//! Reference implementations shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use wlrefine::generators::GraphRng;
use wlrefine::{Color, ColoredGraph};

type Signature = (Color, Vec<(Color, Color)>);

/// One refinement step written straight from the definition: the new color of
/// `(v1, v2)` is `(χ(v1,v2), {{(χ(w,v2), χ(v1,w)) : w ∈ V}})`.
pub fn oracle_step(n: usize, chi: &[Color]) -> Vec<Color> {
    let mut signatures: Vec<Signature> = Vec::with_capacity(n * n);
    for v1 in 0..n {
        for v2 in 0..n {
            let mut multiset: Vec<(Color, Color)> = (0..n).map(|w| (chi[w * n + v2], chi[v1 * n + w])).collect();
            multiset.sort();
            signatures.push((chi[v1 * n + v2], multiset));
        }
    }
    let ids: BTreeMap<&Signature, Color> = signatures
        .iter()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .enumerate()
        .map(|(i, s)| (s, i as Color))
        .collect();
    signatures.iter().map(|s| ids[s]).collect()
}

pub fn class_count(chi: &[Color]) -> usize {
    chi.iter().collect::<BTreeSet<_>>().len()
}

/// Iterates [`oracle_step`] to the fixpoint; returns the stable coloring and
/// the number of steps that changed the partition.
pub fn oracle_stabilize(n: usize, chi: &[Color]) -> (Vec<Color>, usize) {
    let mut current = chi.to_vec();
    let mut iterations = 0;
    loop {
        let next = oracle_step(n, &current);
        // the old color is part of the signature, so equal counts mean equal partitions
        if class_count(&next) == class_count(&current) {
            return (current, iterations);
        }
        current = next;
        iterations += 1;
    }
}

/// Same partition of the index set, independent of the color names.
pub fn same_partition(a: &[Color], b: &[Color]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let mut fwd = BTreeMap::new();
    let mut back = BTreeMap::new();
    a.iter().zip(b).all(|(x, y)| *fwd.entry(x).or_insert(y) == y && *back.entry(y).or_insert(x) == x)
}

/// Random coloring with disjoint loop and arc colors and converse equivalence.
/// Each unordered pair gets one of `kinds` orbit types; odd types are
/// directed and color the two directions differently.
pub fn random_ce_digraph(n: usize, loop_colors: u32, kinds: u32, r: &mut GraphRng) -> ColoredGraph {
    let mut colors = vec![0; n * n];
    for v in 0..n {
        colors[v * n + v] = r.random_range(0..loop_colors);
    }
    let base = loop_colors;
    for u in 0..n {
        for v in u + 1..n {
            let kind = r.random_range(0..kinds);
            let (forward, backward) = if kind % 2 == 0 {
                (base + 2 * kind, base + 2 * kind)
            } else {
                (base + 2 * kind, base + 2 * kind + 1)
            };
            let (forward, backward) = if r.random::<bool>() { (forward, backward) } else { (backward, forward) };
            colors[u * n + v] = forward;
            colors[v * n + u] = backward;
        }
    }
    ColoredGraph::new(n, colors).expect("table size is n²")
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..n {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

/// One representative edge list per isomorphism class of simple graphs on `n` vertices.
pub fn graphs_up_to_isomorphism(n: usize) -> Vec<Vec<(usize, usize)>> {
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|j| (0..j).map(move |i| (i, j))).collect();
    let index: BTreeMap<(usize, usize), usize> = pairs.iter().enumerate().map(|(k, &p)| (p, k)).collect();
    let perms = permutations(n);
    let images: Vec<Vec<usize>> = perms
        .iter()
        .map(|p| {
            pairs
                .iter()
                .map(|&(i, j)| index[&(p[i].min(p[j]), p[i].max(p[j]))])
                .collect()
        })
        .collect();
    let mut seen = BTreeSet::new();
    let mut reps = Vec::new();
    for mask in 0u64..1 << pairs.len() {
        let canon = images
            .iter()
            .map(|img| {
                img.iter()
                    .enumerate()
                    .filter(|&(k, _)| mask >> k & 1 == 1)
                    .fold(0u64, |acc, (_, &t)| acc | 1 << t)
            })
            .min()
            .expect("at least one permutation");
        if seen.insert(canon) {
            reps.push(
                pairs
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| mask >> k & 1 == 1)
                    .map(|(_, &p)| p)
                    .collect(),
            );
        }
    }
    reps
}
