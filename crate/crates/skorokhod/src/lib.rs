//! Exact computation in the Skorokhod space on `[0, 1]` and its completion.
//!
//! The crate represents piecewise-linear càdlàg functions, time changes, and
//! homeomorphisms by finite node lists and computes distances, equivalence,
//! visualizations, and constructive limits exactly on that structure.

pub mod completion;
pub mod doc;
pub mod gen;
pub mod metric;
pub mod piecewise;
pub mod svg;
pub mod turbo;

pub use piecewise::{
    sup_distance, CadlagFunction, CadlagNode, Homeomorphism, PiecewiseError, TimeChange,
};
pub use turbo::Turbofunction;
