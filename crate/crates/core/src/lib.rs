//! Dimension theory of presheaf toposes on finite sites.
//!
//! A finite site (monoid, category, poset or finite space) determines a
//! presheaf topos. This crate computes its n-pure topologies, the chain of
//! smallest n-pure subtoposes, and from it the dimension, content and
//! boundary of the topos, with explicit certification levels wherever a
//! verdict depends on a search budget.

pub mod fincat;
pub mod presheaf;
pub mod homology;
pub mod pi1;
pub mod purity;
pub mod dimension;
pub mod cli;
