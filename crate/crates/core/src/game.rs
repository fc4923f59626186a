//! The two-player refinement game.
//!
//! Player 1 plays a proper, converse-closed refinement at cost 1. Player 2
//! answers with any `G′` satisfying `G ⪰ G′ ⪰ G̃` at cost
//! `min{ j : G′ ⪰ G⁽ʲ⁾ }`. The game ends at the discrete partition.
//!
//! Player 2's aux-guided turn is recorded as a sequence of segments: each
//! complete clean-up as a `cleanup` move costing two per clean-up step, and
//! each refinement iteration as a `p2-algorithm1` move.

use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::aux::{build_aux, potential_f, HistoryTracker, ThresholdConfig};
use crate::cleanup::ccu;
use crate::error::{Error, Result};
use crate::generators::{rng, GraphRng};
use crate::graph::{canonical_renumber, compare, converse_map, validate, Color, ColoredGraph, RefinementOrder};
use crate::refine::{check_preconditions, min_wl_cover, refine_unchecked, stabilize, RefinementVariant};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MoveKind {
    P1Split,
    P1WlStep,
    P2Stabilize,
    P2Algorithm1,
    P2Move,
    Cleanup,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Move {
    pub player: u8,
    pub kind: MoveKind,
    pub cost: usize,
    pub class_counts: (usize, usize),
    pub graph_hash: String,
    #[serde(skip)]
    pub resulting_graph: Option<ColoredGraph>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GameConfig {
    pub variant: RefinementVariant,
    pub threshold: ThresholdConfig,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum P1Strategy {
    WlStep,
    RandomSplit,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum P2Strategy {
    Stabilize,
    Algorithm1,
}

impl std::str::FromStr for P1Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "wl-step" => Ok(Self::WlStep),
            "random-split" => Ok(Self::RandomSplit),
            other => Err(Error::InvalidParameter(format!("unknown player-1 strategy {other:?}"))),
        }
    }
}

impl std::str::FromStr for P2Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stabilize" => Ok(Self::Stabilize),
            "algorithm1" => Ok(Self::Algorithm1),
            other => Err(Error::InvalidParameter(format!("unknown player-2 strategy {other:?}"))),
        }
    }
}

/// A completely cleaned-up graph together with the tracker at that time.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CleanedSnapshot {
    pub graph: ColoredGraph,
    pub tracker: HistoryTracker,
}

/// Instrumentation of one Player-1 move for the large-class potential bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialStep {
    /// The move refines a row of a large-class vertex and the following
    /// complete clean-up splits no large class.
    pub applicable: bool,
    pub f_before: usize,
    pub f_after_cleanup: usize,
    pub threshold: f64,
}

impl PotentialStep {
    pub fn holds(&self) -> bool {
        !self.applicable || (self.f_after_cleanup as f64 - self.f_before as f64) >= self.threshold
    }
}

#[derive(Clone, Debug)]
pub struct GameState {
    pub current: ColoredGraph,
    /// Every graph played, clean-up results included, starting with the input.
    pub history: Vec<ColoredGraph>,
    pub moves: Vec<Move>,
    pub total_cost: usize,
    pub next_player: u8,
    pub vertex_split_count: usize,
    pub tracker: HistoryTracker,
    pub config: GameConfig,
    /// Cleaned-up graphs in order of appearance.
    pub cleaned: Vec<CleanedSnapshot>,
    /// Refinement iterations run inside the aux-guided strategy so far.
    pub algorithm1_iterations: usize,
    pub potential_steps: Vec<PotentialStep>,
}

/// Hex prefix of the SHA-256 of the canonical color table.
pub fn graph_hash(g: &ColoredGraph) -> String {
    let canon = canonical_renumber(g);
    let mut h = Sha256::new();
    h.update((canon.n() as u64).to_le_bytes());
    for &c in canon.table() {
        h.update(c.to_le_bytes());
    }
    h.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// Upper bound on aux-guided iterations per game: `8·n·2^⌈t(n)⌉ + 64`.
pub fn algorithm1_cap(n: usize, threshold: &ThresholdConfig) -> usize {
    let t = threshold.t(n).max(0.0).ceil() as u32;
    8 * n * 2usize.saturating_pow(t) + 64
}

pub fn start_game(g: &ColoredGraph, config: GameConfig) -> Result<GameState> {
    let report = validate(g);
    if !report.loop_edge_disjoint {
        return Err(Error::LoopArcOverlap { report });
    }
    if !report.converse_equivalent {
        return Err(Error::NotConverseEquivalent { report });
    }
    let g = canonical_renumber(g);
    let mut tracker = HistoryTracker::default();
    tracker.register(&g, &config.threshold);
    Ok(GameState {
        history: vec![g.clone()],
        current: g,
        moves: Vec::new(),
        total_cost: 0,
        next_player: 1,
        vertex_split_count: 0,
        tracker,
        config,
        cleaned: Vec::new(),
        algorithm1_iterations: 0,
        potential_steps: Vec::new(),
    })
}

impl GameState {
    pub fn n(&self) -> usize {
        self.current.n()
    }

    pub fn is_over(&self) -> bool {
        self.current.is_discrete()
    }

    fn expect_turn(&self, player: u8) -> Result<()> {
        if self.is_over() {
            return Err(Error::IllegalMove("the game is over".into()));
        }
        if self.next_player != player {
            return Err(Error::IllegalMove(format!(
                "player {player} moved but player {} is to move",
                self.next_player
            )));
        }
        Ok(())
    }

    fn record(&mut self, player: u8, kind: MoveKind, cost: usize, g: ColoredGraph) {
        let g = canonical_renumber(&g);
        let before = self.current.vertex_class_count();
        self.vertex_split_count += g.vertex_class_count() - before;
        self.tracker.register(&g, &self.config.threshold);
        self.total_cost += cost;
        self.moves.push(Move {
            player,
            kind,
            cost,
            class_counts: g.class_counts(),
            graph_hash: graph_hash(&g),
            resulting_graph: Some(g.clone()),
        });
        self.history.push(g.clone());
        self.current = g;
    }

    fn snapshot_cleaned(&mut self) {
        self.cleaned.push(CleanedSnapshot {
            graph: self.current.clone(),
            tracker: self.tracker.clone(),
        });
    }

    /// Player 1 plays `g2`, a proper converse-closed refinement of the current graph.
    pub fn apply_p1_move(self, g2: &ColoredGraph) -> Result<Self> {
        self.apply_p1_move_as(g2, MoveKind::P1Split)
    }

    pub fn apply_p1_move_as(mut self, g2: &ColoredGraph, kind: MoveKind) -> Result<Self> {
        self.expect_turn(1)?;
        match compare(&self.current, g2)? {
            RefinementOrder::StrictlyCoarser => {}
            other => {
                return Err(Error::IllegalMove(format!(
                    "player 1 must play a proper refinement, got {other:?} relation"
                )))
            }
        }
        let report = validate(g2);
        if !report.is_valid() {
            return Err(Error::IllegalMove(format!(
                "player-1 graph violates {}",
                if report.loop_edge_disjoint { "converse equivalence" } else { "loop/arc disjointness" }
            )));
        }
        self.record(1, kind, 1, g2.clone());
        self.next_player = 2;
        Ok(self)
    }

    /// Player 2 plays `g2` with `current ⪰ g2 ⪰ stabilization(current)`.
    pub fn apply_p2_move(self, g2: &ColoredGraph) -> Result<Self> {
        self.apply_p2_move_as(g2, MoveKind::P2Move)
    }

    pub fn apply_p2_move_as(mut self, g2: &ColoredGraph, kind: MoveKind) -> Result<Self> {
        self.expect_turn(2)?;
        self.check_sandwich(&self.current, g2)?;
        let cost = min_wl_cover(&self.current, g2, self.config.variant)?;
        self.record(2, kind, cost, g2.clone());
        self.next_player = 1;
        Ok(self)
    }

    fn check_sandwich(&self, start: &ColoredGraph, g2: &ColoredGraph) -> Result<()> {
        if !compare(start, g2)?.is_coarser_or_equal() {
            return Err(Error::OutsideSandwich("not a refinement of the current graph".into()));
        }
        let stable = stabilize(start, self.config.variant)?.into_stable();
        if !compare(g2, &stable)?.is_coarser_or_equal() {
            return Err(Error::OutsideSandwich(
                "strictly finer than the stabilization of the current graph".into(),
            ));
        }
        Ok(())
    }

    fn is_stable(&self, g: &ColoredGraph) -> bool {
        refine_unchecked(g, self.config.variant).palette_size() == g.palette_size()
    }

    /// Player 2's aux-guided turn: complete clean-up, then refinement
    /// iterations with clean-up until the auxiliary graph is triangle-stable.
    pub fn play_algorithm1(mut self) -> Result<Self> {
        self.expect_turn(2)?;
        let variant = self.config.variant;
        let start = self.current.clone();
        let cap = algorithm1_cap(self.n(), &self.config.threshold);
        let moves_before = self.moves.len();

        let r = ccu(&self.current, variant);
        if r.clean_up_steps > 0 {
            self.record(2, MoveKind::Cleanup, r.moves, r.graph);
        }
        self.snapshot_cleaned();
        loop {
            let aux = build_aux(&self.current, &self.tracker)?;
            if aux.is_triangle_stable()? {
                break;
            }
            if self.algorithm1_iterations >= cap {
                return Err(Error::LoopCapExceeded { cap });
            }
            self.algorithm1_iterations += 1;
            if self.is_stable(&self.current) {
                return Err(Error::Inconsistent(
                    "auxiliary graph of a stable cleaned-up graph is not triangle-stable".into(),
                ));
            }
            let next = refine_unchecked(&self.current, variant);
            let cost = min_wl_cover(&self.current, &next, variant)?;
            self.record(2, MoveKind::P2Algorithm1, cost, next);
            let r = ccu(&self.current, variant);
            if r.clean_up_steps > 0 {
                self.record(2, MoveKind::Cleanup, r.moves, r.graph);
            }
            self.snapshot_cleaned();
        }
        if self.moves.len() == moves_before {
            let same = self.current.clone();
            self.record(2, MoveKind::P2Algorithm1, 0, same);
        }
        let result = self.current.clone();
        self.check_sandwich(&start, &result)?;
        self.next_player = 1;
        Ok(self)
    }

    pub fn play_p2(self, strategy: P2Strategy) -> Result<Self> {
        match strategy {
            P2Strategy::Stabilize => {
                let stable = stabilize(&self.current, self.config.variant)?.into_stable();
                let mut s = self.apply_p2_move_as(&stable, MoveKind::P2Stabilize)?;
                s.snapshot_cleaned();
                Ok(s)
            }
            P2Strategy::Algorithm1 => self.play_algorithm1(),
        }
    }

    /// Player 1's move under `strategy`, including the potential instrumentation.
    pub fn play_p1(self, strategy: P1Strategy, r: &mut GraphRng) -> Result<Self> {
        let (g2, kind) = strategy_p1(&self, strategy, r)?;
        let before = self.current.clone();
        let cfg = self.config;
        let mut s = self.apply_p1_move_as(&g2, kind)?;
        let cleaned = ccu(&s.current, cfg.variant).graph;
        s.potential_steps.push(potential_step(&before, &s.current, &cleaned, &cfg.threshold));
        Ok(s)
    }
}

/// Large-class potential instrumentation of one move from `before` to
/// `after_move`, followed by a complete clean-up ending in `after_cleanup`.
pub fn potential_step(
    before: &ColoredGraph,
    after_move: &ColoredGraph,
    after_cleanup: &ColoredGraph,
    threshold: &ThresholdConfig,
) -> PotentialStep {
    let n = before.n();
    let classes = crate::aux::classify_classes(before, threshold);
    let large_split = classes.large.iter().any(|c| {
        c.iter().any(|&v| after_cleanup.loop_color(v) != after_cleanup.loop_color(c[0]))
    });
    let row_refined = classes.large.iter().flatten().any(|&v| {
        let distinct = |g: &ColoredGraph| {
            let mut row = g.row(v).to_vec();
            row.sort_unstable();
            row.dedup();
            row.len()
        };
        // rows only refine, so more colors means a strictly finer row partition
        distinct(after_move) > distinct(before)
    });
    PotentialStep {
        applicable: row_refined && !large_split && crate::cleanup::is_cleaned_up(before, RefinementVariant::Counting),
        f_before: potential_f(before),
        f_after_cleanup: potential_f(after_cleanup),
        threshold: threshold.t(n),
    }
}

/// Player 1's strategies. `wl-step` falls back to a random split on stable graphs.
pub fn strategy_p1(s: &GameState, kind: P1Strategy, r: &mut GraphRng) -> Result<(ColoredGraph, MoveKind)> {
    if s.is_over() {
        return Err(Error::IllegalMove("no proper refinement of a discrete graph".into()));
    }
    if kind == P1Strategy::WlStep {
        let next = refine_unchecked(&s.current, s.config.variant);
        if next.palette_size() > s.current.palette_size() {
            return Ok((next, MoveKind::P1WlStep));
        }
    }
    Ok((random_split(&s.current, r)?, MoveKind::P1Split))
}

/// Random nonempty proper subset of `k ≥ 2` items, as a membership mask.
fn random_bipartition(k: usize, r: &mut impl Rng) -> Vec<bool> {
    loop {
        let bits: Vec<bool> = (0..k).map(|_| r.random()).collect();
        if bits.iter().any(|&b| b) && bits.iter().any(|&b| !b) {
            return bits;
        }
    }
}

/// Splits one non-singleton color class, chosen uniformly, into two nonempty
/// parts while keeping the coloring converse-equivalent:
///
/// * a loop class splits its loops;
/// * a self-converse arc class splits its orbits `{(u,v),(v,u)}`, or, when it
///   is a single orbit, separates `(u,v)` from `(v,u)`;
/// * any other arc class splits its pairs and mirrors the split on the
///   converse class.
pub fn random_split(g: &ColoredGraph, r: &mut impl Rng) -> Result<ColoredGraph> {
    let g = canonical_renumber(g);
    let n = g.n();
    let conv = converse_map(&g).ok_or_else(|| Error::IllegalMove("input is not converse-equivalent".into()))?;
    let partition = g.partition();
    let candidates: Vec<_> = partition.classes.iter().filter(|c| c.size() >= 2).collect();
    if candidates.is_empty() {
        return Err(Error::IllegalMove("no proper refinement of a discrete graph".into()));
    }
    let class = candidates[r.random_range(0..candidates.len())];
    let c = class.color;
    let fresh = g.palette_size() as Color;
    let mut colors = g.table().to_vec();
    let is_loop = class.pairs[0].0 == class.pairs[0].1;
    if is_loop {
        for (&(v, _), take) in class.pairs.iter().zip(random_bipartition(class.size(), r)) {
            if take {
                colors[v * n + v] = fresh;
            }
        }
    } else if conv[&c] == c {
        let orbits: Vec<_> = class.pairs.iter().copied().filter(|&(u, v)| u < v).collect();
        if orbits.len() == 1 {
            let (u, v) = orbits[0];
            colors[v * n + u] = fresh;
        } else {
            for (&(u, v), take) in orbits.iter().zip(random_bipartition(orbits.len(), r)) {
                if take {
                    colors[u * n + v] = fresh;
                    colors[v * n + u] = fresh;
                }
            }
        }
    } else {
        for (&(u, v), take) in class.pairs.iter().zip(random_bipartition(class.size(), r)) {
            if take {
                colors[u * n + v] = fresh;
                colors[v * n + u] = fresh + 1;
            }
        }
    }
    Ok(canonical_renumber(&ColoredGraph::new(n, colors)?))
}

#[derive(Clone, Debug)]
pub struct GameTranscript {
    pub moves: Vec<Move>,
    pub total_cost: usize,
    pub final_graph: ColoredGraph,
    /// Stabilization count of the input.
    pub iterations_equivalent: usize,
    pub n: usize,
    pub vertex_splits: usize,
    pub algorithm1_iterations: usize,
    pub cleaned: Vec<CleanedSnapshot>,
    pub potential_steps: Vec<PotentialStep>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptSummary {
    pub total_cost: usize,
    pub wl_iterations: usize,
    pub n: usize,
    pub vertex_splits: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptDocument {
    pub moves: Vec<Move>,
    pub summary: TranscriptSummary,
}

impl GameTranscript {
    pub fn summary(&self) -> TranscriptSummary {
        TranscriptSummary {
            total_cost: self.total_cost,
            wl_iterations: self.iterations_equivalent,
            n: self.n,
            vertex_splits: self.vertex_splits,
        }
    }

    pub fn document(&self) -> TranscriptDocument {
        TranscriptDocument {
            moves: self.moves.clone(),
            summary: self.summary(),
        }
    }

    fn from_state(s: GameState, iterations_equivalent: usize) -> Self {
        Self {
            n: s.n(),
            moves: s.moves,
            total_cost: s.total_cost,
            final_graph: s.current,
            iterations_equivalent,
            vertex_splits: s.vertex_split_count,
            algorithm1_iterations: s.algorithm1_iterations,
            cleaned: s.cleaned,
            potential_steps: s.potential_steps,
        }
    }
}

/// Plays strategies against each other until the partition is discrete.
pub fn run_game(
    g: &ColoredGraph,
    p1: P1Strategy,
    p2: P2Strategy,
    seed: u64,
    config: GameConfig,
) -> Result<GameTranscript> {
    check_preconditions(g, config.variant)?;
    let iterations = stabilize(g, config.variant)?.iterations;
    let mut s = start_game(g, config)?;
    let mut r = rng(seed);
    let n = s.n();
    while !s.is_over() {
        let index = s.moves.len();
        s = s
            .play_p1(p1, &mut r)
            .map_err(|e| Error::IllegalMove(format!("player 1 at move {index}: {e}")))?;
        if s.is_over() {
            break;
        }
        let index = s.moves.len();
        s = s.play_p2(p2).map_err(|e| match e {
            Error::LoopCapExceeded { .. } | Error::Inconsistent(_) => e,
            other => Error::IllegalMove(format!("player 2 at move {index}: {other}")),
        })?;
    }
    if s.vertex_split_count > n.saturating_sub(1) {
        return Err(Error::Inconsistent(format!(
            "{} vertex splits on {n} vertices",
            s.vertex_split_count
        )));
    }
    Ok(GameTranscript::from_state(s, iterations))
}
