//! G-sequents, grammar-constrained rule schemas, and the calculus
//! transformations that trade Horn rules for richer constraints.

pub mod calculus;
pub mod depgraph;
pub mod fixtures;
pub mod g3i;
pub mod gen;
pub mod gsequent;
pub mod io;
pub mod lattice;
pub mod proof;
pub mod reach;
pub mod rewriting;
pub mod rules;
pub mod search;
pub mod transform;
