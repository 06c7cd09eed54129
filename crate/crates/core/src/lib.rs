//! Branch-decompositions of subspace arrangements over prime fields.
//!
//! Given subspaces V_1, ..., V_n of GF(p)^r and a parameter k, this crate
//! decides whether a branch-decomposition of width at most k exists and
//! constructs one when it does. The solver runs iterative compression over
//! a dynamic program whose states are decorated subcubic trees ("namus")
//! recording the shadow of a partial decomposition on a boundary subspace.
//!
//! Frontends reduce matroid branch-width, graph rank-width, hypergraph
//! branch-width and carving-width to the same core problem.

pub mod arrangement;
pub mod bdtree;
pub mod field;
pub mod frontends;
pub mod fullset;
pub mod io;
pub mod linalg;
pub mod namu;
pub mod oracle;
pub mod transcript;
