//! Search-space reduction for depth-optimal sorting-network search.
//!
//! A sorting network on `n` channels is built from levels of disjoint
//! min-max comparators. Deciding the minimal depth by exhaustive search is
//! only feasible after aggressive symmetry breaking: two prefixes whose
//! output sets are related by a channel permutation (or by the
//! reverse-and-complement reflection) extend to sorting networks of exactly
//! the same depths, so only one representative per equivalence class needs
//! to be explored.
//!
//! This crate computes those representatives. It enumerates comparator
//! levels ([`levels`]), evaluates networks over full or restricted binary
//! input universes ([`model`]), decides permutation subsumption between
//! output sets ([`subsume`]), reduces candidate datasets to minimal
//! representatives up to permutation and reflection ([`minrep`]), chains the
//! stages into the depth-1/2/3 filter pipelines with persistence
//! ([`pipeline`], [`format`]), and proves small-`n` filter completeness by
//! brute-force extension search ([`verify`]).

pub mod format;
pub mod levels;
pub mod minrep;
pub mod model;
pub mod pipeline;
pub mod subsume;
pub mod verify;

pub use model::{Level, Network, OutputSet, Perm, Word};
