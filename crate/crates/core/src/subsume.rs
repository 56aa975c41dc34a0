//! The subsumption predicate: does some channel permutation π map output set
//! A into output set B (π(A) ⊆ B)?
//!
//! Permutations preserve popcount, which yields cheap necessary conditions:
//! a per-weight histogram for whole-set rejection and a per-channel,
//! per-weight profile for pruning individual channel images. The remaining
//! search is a fewest-candidates-first backtracking over injective channel
//! maps, with every partial assignment checked by comparing the multiset of
//! projected A-words against the multiset of masked B-words. A brute-force
//! oracle over all n! permutations backs the tests.

use crate::model::{ModelError, Perm, Word, MAX_CHANNELS};

/// Popcount statistics of an output set, used to prune the embedding search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetSignature {
    pub size: u32,
    /// `weight_hist[k]` = number of vectors with popcount `k`; length `n+1`.
    pub weight_hist: Vec<u16>,
    /// Row-major `n × (n+1)`: entry `(i, k)` = number of weight-`k` vectors
    /// with channel `i+1` set.
    pub channel_profile: Vec<u16>,
}

impl SetSignature {
    #[inline]
    pub fn profile(&self, channel: usize, weight: usize) -> u16 {
        let cols = self.weight_hist.len();
        self.channel_profile[channel * cols + weight]
    }
}

/// Computes the signature in one pass over the set.
pub fn signature(set: &[Word], n: u8) -> SetSignature {
    let cols = n as usize + 1;
    let mut weight_hist = vec![0u16; cols];
    let mut channel_profile = vec![0u16; n as usize * cols];
    for &x in set {
        let k = x.count_ones() as usize;
        weight_hist[k] += 1;
        let mut bits = x;
        while bits != 0 {
            let i = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            channel_profile[i * cols + k] += 1;
        }
    }
    SetSignature {
        size: set.len() as u32,
        weight_hist,
        channel_profile,
    }
}

/// Cheap whole-set rejection: a permutation preserves weights, so an
/// embedding forces `weight_hist_A ≤ weight_hist_B` pointwise.
#[inline]
pub fn weights_compatible(a: &SetSignature, b: &SetSignature) -> bool {
    a.size <= b.size
        && a.weight_hist
            .iter()
            .zip(&b.weight_hist)
            .all(|(&wa, &wb)| wa <= wb)
}

struct Search<'s> {
    a: &'s [Word],
    b: &'s [Word],
    n: usize,
    /// Candidate images per source channel, as a bitmask over target channels.
    cand: [u16; MAX_CHANNELS],
    /// Source channels in assignment order (fewest candidates first).
    order: [u8; MAX_CHANNELS],
    /// dst[i] = assigned image of source channel i (0-based).
    dst: [u8; MAX_CHANNELS],
    used: u16,
    b_bits: Vec<u64>,
    keys_a: Vec<Word>,
    keys_b: Vec<Word>,
}

impl Search<'_> {
    fn b_contains(&self, x: Word) -> bool {
        self.b_bits[x as usize >> 6] & (1 << (x & 63)) != 0
    }

    /// Multiset check for the partial map: every projection of A onto the
    /// assigned channels must occur at least as often among the B words
    /// masked to the assigned images.
    fn projection_ok(&mut self, depth: usize) -> bool {
        let assigned = &self.order[..depth];
        let mut target_mask: Word = 0;
        for &i in assigned {
            target_mask |= 1 << self.dst[i as usize];
        }
        self.keys_a.clear();
        for &x in self.a {
            let mut key: Word = 0;
            for &i in assigned {
                key |= ((x >> i) & 1) << self.dst[i as usize];
            }
            self.keys_a.push(key);
        }
        self.keys_b.clear();
        self.keys_b.extend(self.b.iter().map(|&x| x & target_mask));
        self.keys_a.sort_unstable();
        self.keys_b.sort_unstable();
        // Multiset inclusion over sorted runs.
        let (ka, kb) = (&self.keys_a, &self.keys_b);
        let mut j = 0;
        let mut i = 0;
        while i < ka.len() {
            let v = ka[i];
            let run_a = ka[i..].iter().take_while(|&&x| x == v).count();
            while j < kb.len() && kb[j] < v {
                j += 1;
            }
            let run_b = kb[j..].iter().take_while(|&&x| x == v).count();
            if run_b < run_a {
                return false;
            }
            i += run_a;
            j += run_b;
        }
        true
    }

    fn dfs(&mut self, depth: usize) -> bool {
        if depth == self.n {
            return self
                .a
                .iter()
                .all(|&x| self.b_contains(apply_map(x, &self.dst, self.n)));
        }
        let i = self.order[depth] as usize;
        let mut avail = self.cand[i] & !self.used;
        while avail != 0 {
            let j = avail.trailing_zeros() as u8;
            avail &= avail - 1;
            self.dst[i] = j;
            self.used |= 1 << j;
            if self.projection_ok(depth + 1) && self.dfs(depth + 1) {
                return true;
            }
            self.used &= !(1 << j);
        }
        false
    }
}

#[inline]
fn apply_map(x: Word, dst: &[u8; MAX_CHANNELS], n: usize) -> Word {
    let mut out = 0;
    for (i, &d) in dst.iter().enumerate().take(n) {
        out |= ((x >> i) & 1) << d;
    }
    out
}

fn bitset_of(set: &[Word], n: u8) -> Vec<u64> {
    let words = (1usize << n).div_ceil(64);
    let mut bits = vec![0u64; words];
    for &x in set {
        bits[x as usize >> 6] |= 1 << (x & 63);
    }
    bits
}

fn subset_sorted(a: &[Word], b: &[Word]) -> bool {
    let mut it = b.iter();
    'outer: for &x in a {
        for &y in it.by_ref() {
            match y.cmp(&x) {
                std::cmp::Ordering::Less => continue,
                std::cmp::Ordering::Equal => continue 'outer,
                std::cmp::Ordering::Greater => return false,
            }
        }
        return false;
    }
    true
}

/// Searches for a permutation π with π(A) ⊆ B. Both sets must be canonical
/// (sorted, deduplicated) over the same channel count. Any returned
/// permutation has been verified by a direct subset check. Which witness is
/// returned is unspecified; callers rely only on existence.
pub fn find_embedding(
    a: &[Word],
    sig_a: &SetSignature,
    b: &[Word],
    sig_b: &SetSignature,
    n: u8,
) -> Option<Perm> {
    if a.is_empty() {
        return Some(Perm::identity(n));
    }
    if !weights_compatible(sig_a, sig_b) {
        return None;
    }
    if subset_sorted(a, b) {
        return Some(Perm::identity(n));
    }
    let nu = n as usize;
    let cols = nu + 1;
    let mut cand = [0u16; MAX_CHANNELS];
    for (i, c) in cand.iter_mut().enumerate().take(nu) {
        let mut m: u16 = 0;
        'target: for j in 0..nu {
            for k in 0..cols {
                let pa = sig_a.channel_profile[i * cols + k];
                let pb = sig_b.channel_profile[j * cols + k];
                // Ones on channel i must fit among ones on channel j, and
                // zeros among zeros, weight class by weight class.
                if pa > pb || sig_a.weight_hist[k] - pa > sig_b.weight_hist[k] - pb {
                    continue 'target;
                }
            }
            m |= 1 << j;
        }
        if m == 0 {
            return None;
        }
        *c = m;
    }
    let mut order: [u8; MAX_CHANNELS] = [0; MAX_CHANNELS];
    for (i, o) in order.iter_mut().enumerate().take(nu) {
        *o = i as u8;
    }
    order[..nu].sort_by_key(|&i| (cand[i as usize].count_ones(), i));

    let mut search = Search {
        a,
        b,
        n: nu,
        cand,
        order,
        dst: [0; MAX_CHANNELS],
        used: 0,
        b_bits: bitset_of(b, n),
        keys_a: Vec::with_capacity(a.len()),
        keys_b: Vec::with_capacity(b.len()),
    };
    if !search.dfs(0) {
        return None;
    }
    let map = (0..nu).map(|i| search.dst[i] + 1).collect();
    let perm = Perm::from_one_based(map).expect("search assigns a bijection");
    debug_assert!(subset_sorted(&crate::model::permute_set(&perm, a), b));
    Some(perm)
}

/// Exhaustive oracle: tries all n! permutations in lexicographic order.
/// Guarded to n ≤ 8 where the factorial is harmless.
pub fn brute_force_embedding(a: &[Word], b: &[Word], n: u8) -> Result<Option<Perm>, ModelError> {
    if n == 0 || n > 8 {
        return Err(ModelError::BadChannelCount(n as usize));
    }
    if a.is_empty() {
        return Ok(Some(Perm::identity(n)));
    }
    let b_bits = bitset_of(b, n);
    let nu = n as usize;
    let mut dst = [0u8; MAX_CHANNELS];
    fn rec(
        depth: usize,
        nu: usize,
        used: u16,
        dst: &mut [u8; MAX_CHANNELS],
        a: &[Word],
        b_bits: &[u64],
    ) -> bool {
        if depth == nu {
            return a.iter().all(|&x| {
                let y = apply_map(x, dst, nu);
                b_bits[y as usize >> 6] & (1 << (y & 63)) != 0
            });
        }
        for j in 0..nu as u8 {
            if used & (1 << j) == 0 {
                dst[depth] = j;
                if rec(depth + 1, nu, used | (1 << j), dst, a, b_bits) {
                    return true;
                }
            }
        }
        false
    }
    if rec(0, nu, 0, &mut dst, a, &b_bits) {
        let map = (0..nu).map(|i| dst[i] + 1).collect();
        Ok(Some(
            Perm::from_one_based(map).expect("bijection by construction"),
        ))
    } else {
        Ok(None)
    }
}
