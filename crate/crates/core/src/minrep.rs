//! Reduction of a candidate dataset to its minimal representatives up to
//! channel permutation and reflection.
//!
//! A record is discarded when an earlier-ranked record's output set embeds
//! into it under some permutation (it can never extend to a shallower
//! sorting network than the earlier one), or when its reflection resolves to
//! a representative of earlier rank. Rank is dataset order; reflections that
//! are missing from the dataset are appended after all originals so that
//! originals always win ties.
//!
//! The scan processes records grouped by output-set size, ascending. That
//! ordering is sound because a strict subsumer never has a larger set, and
//! it makes the parallel phase deterministic: within one size block every
//! record is matched against the already-fixed representatives in parallel
//! (read-only), and the block's residue is resolved sequentially in index
//! order, exactly reproducing the single-threaded result.

use std::collections::HashMap;

use crate::model::{reflect_network, reflect_set, Network, OutputSet};
use crate::subsume::{find_embedding, signature, weights_compatible, SetSignature};

/// One candidate: a network together with its output set over the dataset's
/// input universe.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Record {
    pub net: Network,
    pub set: OutputSet,
}

/// An ordered list of candidates sharing a channel count and input universe.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dataset {
    pub n: u8,
    pub records: Vec<Record>,
}

/// `reflect[i]` = index of the record whose set is the reflection of record
/// `i`'s set (an involution up to duplicate sets).
#[derive(Debug, Clone)]
pub struct ReflectIndex(pub Vec<u32>);

/// `subset_of[i] = i` marks a permutation-minimal record; otherwise some
/// permutation embeds record `subset_of[i]`'s set into record `i`'s set, and
/// following the chain reaches a fixed point in finitely many steps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsetOfMap(pub Vec<u32>);

impl SubsetOfMap {
    /// Follows the chain from `i` to its fixed point.
    pub fn resolve(&self, mut i: u32) -> u32 {
        while self.0[i as usize] != i {
            i = self.0[i as usize];
        }
        i
    }
}

/// Appends the reflection of every record whose reflected set is not already
/// present, and returns the reflection index over the widened dataset.
/// Appended records carry the reflected network and rank after all originals.
pub fn close_under_reflection(f: Dataset) -> (Dataset, ReflectIndex) {
    let n = f.n;
    let r0 = f.records.len();
    let mut first_of: HashMap<&[u16], u32> = HashMap::with_capacity(r0);
    for (i, rec) in f.records.iter().enumerate() {
        first_of.entry(&rec.set).or_insert(i as u32);
    }
    let mut reflect = vec![0u32; r0];
    let mut appended: Vec<Record> = Vec::new();
    let mut appended_reflect: Vec<u32> = Vec::new();
    let mut appended_of: HashMap<OutputSet, u32> = HashMap::new();
    for (i, rec) in f.records.iter().enumerate() {
        let rset = reflect_set(&rec.set, n);
        reflect[i] = if let Some(&j) = first_of.get(rset.as_slice()) {
            j
        } else if let Some(&j) = appended_of.get(&rset) {
            j
        } else {
            let idx = (r0 + appended.len()) as u32;
            appended_of.insert(rset.clone(), idx);
            appended_reflect.push(first_of[rec.set.as_slice()]);
            appended.push(Record {
                net: reflect_network(&rec.net),
                set: rset,
            });
            idx
        };
    }
    drop(first_of);
    drop(appended_of);
    reflect.extend(appended_reflect);
    let mut records = f.records;
    records.extend(appended);
    (Dataset { n, records }, ReflectIndex(reflect))
}

/// Least-index representative scan. For every record, finds the smallest
/// index `j` such that record `j` is itself a fixed point and some
/// permutation embeds set `j` into the record's set; records with no such
/// `j` become fixed points themselves. Result is a pure function of the
/// dataset — `threads` only sets the degree of parallelism.
pub fn find_min_rep_perm(f: &Dataset, threads: usize) -> SubsetOfMap {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .expect("building a rayon thread pool");
    pool.install(|| reduce_in_pool(f))
}

fn reduce_in_pool(f: &Dataset) -> SubsetOfMap {
    use rayon::prelude::*;

    let n = f.n;
    let records = &f.records;
    let r = records.len();
    let mut subset_of: Vec<u32> = (0..r as u32).collect();

    // Exact-duplicate sets inherit the resolution of their first occurrence.
    let mut dup_of: Vec<u32> = (0..r as u32).collect();
    {
        let mut first_of: HashMap<&[u16], u32> = HashMap::with_capacity(r);
        for (i, rec) in records.iter().enumerate() {
            dup_of[i] = *first_of.entry(&rec.set).or_insert(i as u32);
        }
    }

    // Process in ascending set-size order; a strict subsumer is never larger.
    let mut order: Vec<u32> = (0..r as u32).collect();
    order.sort_by_key(|&i| records[i as usize].set.len());

    // Representatives found so far, ascending by index.
    let mut reps: Vec<(u32, SetSignature)> = Vec::new();

    let mut start = 0;
    while start < r {
        let size = records[order[start] as usize].set.len();
        let mut end = start;
        while end < r && records[order[end] as usize].set.len() == size {
            end += 1;
        }
        let block = &order[start..end];

        let mut sigs: Vec<Option<SetSignature>> = block
            .par_iter()
            .map(|&i| (dup_of[i as usize] == i).then(|| signature(&records[i as usize].set, n)))
            .collect();

        // Phase A (parallel, read-only): least already-fixed representative
        // embedding into each block record.
        let pre_hits: Vec<Option<u32>> = block
            .par_iter()
            .zip(&sigs)
            .map(|(&i, sig)| {
                let sig = sig.as_ref()?;
                scan_reps(&reps, records, sig, &records[i as usize].set, n)
            })
            .collect();

        // Phase B (sequential in index order): representatives that appeared
        // earlier in this same block can beat a phase-A hit on index.
        let mut block_new: Vec<(u32, SetSignature)> = Vec::new();
        for (k, &i) in block.iter().enumerate() {
            let iu = i as usize;
            if dup_of[iu] != i {
                let fst = dup_of[iu] as usize;
                subset_of[iu] = if subset_of[fst] != fst as u32 {
                    subset_of[fst]
                } else {
                    fst as u32
                };
                continue;
            }
            let sig = sigs[k]
                .take()
                .expect("non-duplicate records carry a signature");
            let pre = pre_hits[k];
            let bound = pre.unwrap_or(u32::MAX);
            let in_block = block_new
                .iter()
                .take_while(|&&(j, _)| j < bound)
                .find(|(j, rep_sig)| {
                    weights_compatible(rep_sig, &sig)
                        && find_embedding(
                            &records[*j as usize].set,
                            rep_sig,
                            &records[iu].set,
                            &sig,
                            n,
                        )
                        .is_some()
                })
                .map(|&(j, _)| j);
            match in_block.or(pre) {
                Some(j) => subset_of[iu] = j,
                None => block_new.push((i, sig)),
            }
        }

        reps.extend(block_new);
        reps.sort_by_key(|&(j, _)| j);
        start = end;
    }
    SubsetOfMap(subset_of)
}

fn scan_reps(
    reps: &[(u32, SetSignature)],
    records: &[Record],
    sig: &SetSignature,
    set: &[u16],
    n: u8,
) -> Option<u32> {
    reps.iter()
        .find(|(j, rep_sig)| {
            weights_compatible(rep_sig, sig)
                && find_embedding(&records[*j as usize].set, rep_sig, set, sig, n).is_some()
        })
        .map(|&(j, _)| j)
}

/// Full reduction state, for callers that need the discard witnesses.
#[derive(Debug)]
pub struct ReductionTrace {
    /// Number of records before reflection closure.
    pub original_len: usize,
    /// The reflection-closed dataset the maps index into.
    pub closed: Dataset,
    pub reflect: ReflectIndex,
    pub subset_of: SubsetOfMap,
    /// Indices (into `closed`) of the kept representatives, ascending.
    pub kept: Vec<u32>,
}

/// Runs the whole reduction: reflection closure, permutation scan, then the
/// reflection walk that discards any original whose reflected class resolves
/// to an earlier rank. Only original records can be kept.
pub fn reduce_with_trace(f: Dataset, threads: usize) -> ReductionTrace {
    let original_len = f.records.len();
    let (closed, reflect) = close_under_reflection(f);
    let subset_of = find_min_rep_perm(&closed, threads);
    let mut kept = Vec::new();
    for i in 0..original_len as u32 {
        if subset_of.0[i as usize] != i {
            continue;
        }
        let mirror = subset_of.resolve(reflect.0[i as usize]);
        if mirror >= i {
            kept.push(i);
        }
    }
    ReductionTrace {
        original_len,
        closed,
        reflect,
        subset_of,
        kept,
    }
}

/// Minimal representatives up to permutation and reflection, in dataset
/// order. Idempotent: reducing the output returns it unchanged.
pub fn min_rep_perm_refl(f: Dataset, threads: usize) -> Dataset {
    let trace = reduce_with_trace(f, threads);
    let n = trace.closed.n;
    let mut keep_flag = vec![false; trace.closed.records.len()];
    for &i in &trace.kept {
        keep_flag[i as usize] = true;
    }
    let records = trace
        .closed
        .records
        .into_iter()
        .zip(keep_flag)
        .filter_map(|(rec, keep)| keep.then_some(rec))
        .collect();
    Dataset { n, records }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levels::{all_levels, maximal_first_level, nonempty_levels};
    use crate::model::{
        all_inputs, apply_level, canonicalize, output_set, permute_set, sorted_inputs, Level,
        Network, Perm,
    };
    use crate::subsume::brute_force_embedding;

    fn one_level_net(n: u8, level: &Level) -> Network {
        Network::new(n, vec![level.clone()]).unwrap()
    }

    /// All two-layer candidates from the maximal first layer, in catalog
    /// order (the generation order the pipeline uses).
    fn two_layer_dataset(n: u8) -> Dataset {
        let seed_level = maximal_first_level(n);
        let seed_set = output_set(&one_level_net(n, &seed_level), &all_inputs(n));
        let records = nonempty_levels(n)
            .unwrap()
            .levels
            .iter()
            .map(|l| {
                let mut set: Vec<u16> = seed_set.iter().map(|&x| apply_level(x, l)).collect();
                canonicalize(&mut set);
                Record {
                    net: Network::new(n, vec![seed_level.clone(), l.clone()]).unwrap(),
                    set,
                }
            })
            .collect();
        Dataset { n, records }
    }

    #[test]
    fn least_index_wins_between_equivalent_records() {
        let s: OutputSet = vec![0b001, 0b011, 0b111];
        let sigma = Perm::from_one_based(vec![2, 3, 1]).unwrap();
        let f = Dataset {
            n: 3,
            records: vec![
                Record {
                    net: Network::empty(3),
                    set: s.clone(),
                },
                Record {
                    net: Network::empty(3),
                    set: permute_set(&sigma, &s),
                },
            ],
        };
        let map = find_min_rep_perm(&f, 1);
        assert_eq!(map.0, vec![0, 0]);
    }

    #[test]
    fn identity_subset_subsumes() {
        let n = 4;
        let mut small = sorted_inputs(n);
        small.push(0b0010);
        canonicalize(&mut small);
        let mut big = small.clone();
        big.push(0b0100);
        canonicalize(&mut big);
        let f = Dataset {
            n,
            records: vec![
                Record {
                    net: Network::empty(n),
                    set: small,
                },
                Record {
                    net: Network::empty(n),
                    set: big,
                },
            ],
        };
        assert_eq!(find_min_rep_perm(&f, 1).0, vec![0, 0]);
    }

    #[test]
    fn reflection_closure_shapes() {
        let n = 4;
        // The maximal level is palindromic: its output set is self-reflective.
        let max = one_level_net(n, &maximal_first_level(n));
        let self_refl = Record {
            net: max.clone(),
            set: output_set(&max, &all_inputs(n)),
        };
        let (closed, reflect) = close_under_reflection(Dataset {
            n,
            records: vec![self_refl.clone()],
        });
        assert_eq!(closed.records.len(), 1);
        assert_eq!(reflect.0, vec![0]);

        // A lopsided level is not: closure appends its mirror image.
        let lop = one_level_net(n, &Level::new(vec![(1, 2)], n).unwrap());
        let rec = Record {
            net: lop.clone(),
            set: output_set(&lop, &all_inputs(n)),
        };
        let (closed, reflect) = close_under_reflection(Dataset {
            n,
            records: vec![rec],
        });
        assert_eq!(closed.records.len(), 2);
        assert_eq!(reflect.0, vec![1, 0]);
        assert_eq!(closed.records[1].net, reflect_network(&lop));
        assert_eq!(
            closed.records[1].set,
            reflect_set(&closed.records[0].set, n)
        );
    }

    #[test]
    fn self_reflective_minimal_record_is_kept() {
        let n = 4;
        let max = one_level_net(n, &maximal_first_level(n));
        let f = Dataset {
            n,
            records: vec![Record {
                net: max.clone(),
                set: output_set(&max, &all_inputs(n)),
            }],
        };
        let out = min_rep_perm_refl(f.clone(), 1);
        assert_eq!(out, f);
    }

    #[test]
    fn two_layer_reduction_count_n5() {
        let reduced = min_rep_perm_refl(two_layer_dataset(5), 1);
        assert_eq!(reduced.records.len(), 4);
        // Permutation-only fixed points can only shrink further under the
        // reflection walk.
        let f = two_layer_dataset(5);
        let perm_only = find_min_rep_perm(&f, 1);
        let fixed = (0..f.records.len() as u32)
            .filter(|&i| perm_only.0[i as usize] == i)
            .count();
        assert!(fixed >= 4, "perm-only fixed points {fixed}");
    }

    #[test]
    fn two_layer_reduction_count_n6() {
        let reduced = min_rep_perm_refl(two_layer_dataset(6), 1);
        assert_eq!(reduced.records.len(), 5);
    }

    #[test]
    fn depth_one_reduces_to_single_maximal_class() {
        // Reducing every one-level network (identity included) keeps exactly
        // the maximal-level class, which justifies seeding depth 1 with it.
        for n in 4..=6u8 {
            let records: Vec<Record> = all_levels(n)
                .unwrap()
                .levels
                .iter()
                .map(|l| {
                    let net = one_level_net(n, l);
                    let set = output_set(&net, &all_inputs(n));
                    Record { net, set }
                })
                .collect();
            let reduced = min_rep_perm_refl(Dataset { n, records }, 1);
            assert_eq!(reduced.records.len(), 1, "n={n}");
            assert_eq!(
                reduced.records[0].net.levels(),
                &[maximal_first_level(n)],
                "n={n}"
            );
        }
    }

    #[test]
    fn reduction_is_idempotent() {
        for n in 4..=6u8 {
            let once = min_rep_perm_refl(two_layer_dataset(n), 1);
            let twice = min_rep_perm_refl(once.clone(), 1);
            assert_eq!(once, twice, "n={n}");
        }
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let f = two_layer_dataset(6);
        let base_map = find_min_rep_perm(&f, 1);
        let base = min_rep_perm_refl(f.clone(), 1);
        for threads in [2, 8] {
            assert_eq!(
                find_min_rep_perm(&f, threads),
                base_map,
                "threads={threads}"
            );
            assert_eq!(
                min_rep_perm_refl(f.clone(), threads),
                base,
                "threads={threads}"
            );
        }
    }

    #[test]
    fn every_discard_has_a_verifiable_witness() {
        let n = 5;
        let trace = reduce_with_trace(two_layer_dataset(n), 1);
        let records = &trace.closed.records;
        for i in 0..trace.original_len as u32 {
            if trace.kept.contains(&i) {
                continue;
            }
            let j = trace.subset_of.0[i as usize];
            if j != i {
                // Permutation discard: re-check with the exhaustive oracle.
                let witness =
                    brute_force_embedding(&records[j as usize].set, &records[i as usize].set, n)
                        .unwrap();
                assert!(witness.is_some(), "record {i}: no embedding from {j}");
            } else {
                // Reflection discard: the mirror's chain ends strictly earlier
                // at a permutation-minimal record.
                let fp = trace.subset_of.resolve(trace.reflect.0[i as usize]);
                assert!(fp < i, "record {i}: reflection chain ends at {fp}");
                assert_eq!(trace.subset_of.0[fp as usize], fp);
            }
        }
    }

    #[test]
    fn subset_chains_terminate() {
        let f = two_layer_dataset(6);
        let (closed, _) = close_under_reflection(f);
        let len = closed.records.len() as u32;
        let map = find_min_rep_perm(&closed, 1);
        for i in 0..len {
            let fp = map.resolve(i); // would loop forever on a cycle
            assert_eq!(map.0[fp as usize], fp);
        }
    }
}
