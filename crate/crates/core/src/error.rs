use thiserror::Error;

use crate::graph::ValidationReport;

#[derive(Debug, Error)]
pub enum Error {
    #[error("color table has {got} entries, expected {expected} for n = {n}")]
    TableSize { n: usize, expected: usize, got: usize },

    #[error("vertex {vertex} out of range for n = {n}")]
    VertexOutOfRange { vertex: usize, n: usize },

    #[error("graphs have different vertex counts ({left} vs {right})")]
    SizeMismatch { left: usize, right: usize },

    #[error("coloring does not respect converse equivalence: {}", witnesses(.report))]
    NotConverseEquivalent { report: ValidationReport },

    #[error("loop and arc colors overlap: {}", witnesses(.report))]
    LoopArcOverlap { report: ValidationReport },

    #[error("asymmetric adjacency: ({0}, {1}) present without ({1}, {0})")]
    AsymmetricAdjacency(usize, usize),

    #[error("self-loop at vertex {0} in adjacency")]
    SelfLoop(usize),

    #[error("target is not between the graph and its stabilization: {0}")]
    OutsideSandwich(String),

    #[error("illegal move: {0}")]
    IllegalMove(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("loop cap of {cap} iterations exceeded")]
    LoopCapExceeded { cap: usize },

    #[error("internal consistency failure: {0}")]
    Inconsistent(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn witnesses(report: &ValidationReport) -> String {
    report
        .offending_pairs
        .iter()
        .take(3)
        .map(|v| serde_json::to_string(v).unwrap_or_default())
        .collect::<Vec<_>>()
        .join(", ")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
