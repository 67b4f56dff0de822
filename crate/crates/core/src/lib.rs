//! Exact permissiveness functions for acyclic timed automata and turn-based
//! timed games.

pub mod error;
pub mod numerics;
pub mod polyhedra;
pub mod symbolic;
pub mod optimizer;
pub mod paf;
pub mod model;
pub mod engine;
pub mod oracle;
pub mod document;
