//! Brute-force extension prover: can a given output set be sorted by
//! appending at most `k` more levels?
//!
//! This is the correctness harness for the filter pipeline at small `n`: a
//! filter set is complete for target depth `D` exactly when some member
//! extends to a sorting network within `D` levels. The search walks level
//! sequences depth-first, memoizing verdicts per (output set, remaining
//! budget). Levels that change nothing are skipped — a shortest witness
//! never needs one, and a skipped-level witness can always be padded back to
//! exact length with empty levels.

use std::collections::HashMap;

use thiserror::Error;

use crate::levels::{nonempty_levels, LevelCatalog};
use crate::model::{apply_level, canonicalize, concat, is_sorted, Level, Network, OutputSet, Word};
use crate::pipeline::{FilterSet, Universe};

/// Verdict cache keyed by (canonical output set, remaining depth).
#[derive(Debug, Default)]
pub struct SearchMemo {
    map: HashMap<(OutputSet, u8), bool>,
}

impl SearchMemo {
    pub fn new() -> SearchMemo {
        SearchMemo::default()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

fn all_sorted(set: &[Word], n: u8) -> bool {
    set.iter().all(|&x| is_sorted(x, n))
}

fn solvable(set: &[Word], k: u8, catalog: &LevelCatalog, memo: &mut SearchMemo) -> bool {
    let n = catalog.n;
    if all_sorted(set, n) {
        return true;
    }
    if k == 0 {
        return false;
    }
    let key = (set.to_vec(), k);
    if let Some(&v) = memo.map.get(&key) {
        return v;
    }
    let mut child: Vec<Word> = Vec::with_capacity(set.len());
    let mut found = false;
    for level in catalog.levels.iter().filter(|l| !l.is_empty()) {
        child.clear();
        child.extend(set.iter().map(|&x| apply_level(x, level)));
        canonicalize(&mut child);
        if child[..] == *set {
            continue;
        }
        if solvable(&child, k - 1, catalog, memo) {
            found = true;
            break;
        }
    }
    memo.map.insert(key, found);
    found
}

/// Searches for a `k`-level suffix sorting every vector of `set`. Shorter
/// solutions are padded with trailing empty levels, so a returned suffix has
/// exactly `k` levels. Returns `None` when no level sequence of length `k`
/// works.
pub fn dfs_extend(
    set: &[Word],
    k: u8,
    catalog: &LevelCatalog,
    memo: &mut SearchMemo,
) -> Option<Vec<Level>> {
    if !solvable(set, k, catalog, memo) {
        return None;
    }
    let n = catalog.n;
    let mut suffix = Vec::with_capacity(k as usize);
    let mut state: Vec<Word> = set.to_vec();
    let mut budget = k;
    while !all_sorted(&state, n) {
        let next = catalog
            .levels
            .iter()
            .filter(|l| !l.is_empty())
            .find_map(|level| {
                let mut child: Vec<Word> = state.iter().map(|&x| apply_level(x, level)).collect();
                canonicalize(&mut child);
                if child[..] == state[..] {
                    return None;
                }
                solvable(&child, budget - 1, catalog, memo).then_some((level.clone(), child))
            })
            .expect("solvable state has a solvable child");
        suffix.push(next.0);
        state = next.1;
        budget -= 1;
    }
    suffix.resize(k as usize, Level::empty());
    Some(suffix)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Exists,
    NotExists,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Exists => write!(f, "exists"),
            Verdict::NotExists => write!(f, "not-exists"),
        }
    }
}

/// Per-prefix outcome plus the overall verdict and a verified witness.
#[derive(Debug)]
pub struct CompletenessReport {
    pub verdict: Verdict,
    /// Prefix ⊕ suffix for the first extendable prefix, checked to sort the
    /// filter set's whole input universe.
    pub witness: Option<Network>,
    /// `extendable[i]` answers: does record `i` extend within the budget?
    pub extendable: Vec<bool>,
}

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("target depth {target} is below the filter depth {depth}")]
    TargetBelowFilters { target: u8, depth: u8 },
    #[error(
        "suffix search space ≈{estimate} nodes exceeds the {limit}-node guard \
         (n={n}, budget {budget} levels over {prefixes} prefixes)"
    )]
    SearchSpaceGuard {
        estimate: u128,
        limit: u128,
        n: u8,
        budget: u8,
        prefixes: usize,
    },
    #[error(transparent)]
    Model(#[from] crate::model::ModelError),
    #[error("witness failed the direct sortedness re-check (internal error)")]
    WitnessBroken,
}

/// Worst-case node guard for the exhaustive suffix search; memoization
/// usually stays far below this, but the bound is honest.
pub const SEARCH_NODE_LIMIT: u128 = 200_000_000;

/// Decides whether any prefix in the filter set extends to a network sorting
/// the filter's input universe within `target_depth` total levels. The
/// existence witness is re-checked by direct evaluation before it is
/// returned; for the full universe that check is exactly the zero-one
/// sorting-network test.
pub fn prove_filter_complete(
    filters: &FilterSet,
    target_depth: u8,
    threads: usize,
) -> Result<CompletenessReport, VerifyError> {
    use rayon::prelude::*;

    if target_depth < filters.depth {
        return Err(VerifyError::TargetBelowFilters {
            target: target_depth,
            depth: filters.depth,
        });
    }
    let budget = target_depth - filters.depth;
    let n = filters.n;
    let catalog = nonempty_levels(n)?;
    let estimate =
        (catalog.len() as u128).pow(budget as u32) * filters.records.len().max(1) as u128;
    if estimate > SEARCH_NODE_LIMIT {
        return Err(VerifyError::SearchSpaceGuard {
            estimate,
            limit: SEARCH_NODE_LIMIT,
            n,
            budget,
            prefixes: filters.records.len(),
        });
    }

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .expect("building a rayon thread pool");
    let suffixes: Vec<Option<Vec<Level>>> = pool.install(|| {
        filters
            .records
            .par_iter()
            .map(|rec| {
                let mut memo = SearchMemo::new();
                dfs_extend(&rec.set, budget, &catalog, &mut memo)
            })
            .collect()
    });

    let extendable: Vec<bool> = suffixes.iter().map(Option::is_some).collect();
    let hit = suffixes.iter().position(Option::is_some);
    let witness = match hit {
        Some(i) => {
            let suffix = Network::new(n, suffixes[i].clone().unwrap())?;
            let full = concat(&filters.records[i].net, &suffix)?;
            let inputs = filters.universe.inputs(n)?;
            let out = crate::model::output_set(&full, &inputs);
            if !all_sorted(&out, n) {
                return Err(VerifyError::WitnessBroken);
            }
            if filters.universe == Universe::Full {
                debug_assert!(crate::model::is_sorting_network(&full));
            }
            Some(full)
        }
        None => None,
    };
    Ok(CompletenessReport {
        verdict: if witness.is_some() {
            Verdict::Exists
        } else {
            Verdict::NotExists
        },
        witness,
        extendable,
    })
}
