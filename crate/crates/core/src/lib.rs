//! Weisfeiler-Leman refinement of colored complete digraphs, the clean-up
//! procedure, the auxiliary-graph analysis and the refinement game.

pub mod analysis;
pub mod aux;
pub mod cleanup;
pub mod encode;
pub mod error;
pub mod game;
pub mod experiment;
pub mod generators;
pub mod graph;
pub mod io;
pub mod refine;

pub use error::{Error, Result};
pub use graph::{compare, validate, Color, ColoredGraph, RefinementOrder};
pub use refine::{
    distinguish, min_wl_cover, refine_step, stabilize, wl1_stabilize, RefinementVariant,
};
