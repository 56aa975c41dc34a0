//! Core object model: binary vectors on `n` channels, comparator levels,
//! networks, input universes, and the two symmetry actions (channel
//! permutation and reflection).
//!
//! Encoding convention, shared by every module and by the text format:
//! an `n`-channel binary vector is a [`Word`] whose bit `i-1` holds the value
//! of channel `i` (LSB = channel 1). A vector is sorted when the channel
//! values are non-decreasing left to right, i.e. the word looks like a block
//! of clear low bits followed by a block of set high bits.

use thiserror::Error;

/// One binary vector on up to 16 channels; bit `i-1` is channel `i`.
pub type Word = u16;

/// A canonical output set: strictly ascending, deduplicated words.
pub type OutputSet = Vec<Word>;

pub const MAX_CHANNELS: usize = 16;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("channel count {0} outside supported range 1..=16")]
    BadChannelCount(usize),
    #[error("comparator {0}-{1} invalid: channels must satisfy 1 <= lo < hi <= n")]
    BadComparator(u8, u8),
    #[error("comparators overlap on channel {0}")]
    OverlappingChannels(u8),
    #[error("restriction width {w} exceeds channel count {n}")]
    BadRestriction { w: usize, n: usize },
    #[error("channel map is not a permutation of 1..={0}")]
    NotAPermutation(usize),
    #[error("channel counts differ: {0} vs {1}")]
    ChannelMismatch(u8, u8),
}

/// All `n` bits set: the all-ones vector, also the top sorted word.
#[inline]
pub fn mask(n: u8) -> Word {
    debug_assert!(n >= 1 && n as usize <= MAX_CHANNELS);
    if n as usize == MAX_CHANNELS {
        Word::MAX
    } else {
        (1u16 << n) - 1
    }
}

/// One parallel layer of comparators on pairwise-disjoint channels.
///
/// Pairs are 1-based `(lo, hi)` with `lo < hi`, kept sorted by `lo`; two
/// levels are equal exactly when they perform the same comparisons, so the
/// derived `Ord` gives a deterministic total order on levels.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Level {
    pairs: Vec<(u8, u8)>,
}

impl Level {
    /// Builds a level after validating bounds and disjointness against `n`.
    pub fn new(mut pairs: Vec<(u8, u8)>, n: u8) -> Result<Level, ModelError> {
        if n == 0 || n as usize > MAX_CHANNELS {
            return Err(ModelError::BadChannelCount(n as usize));
        }
        pairs.sort_unstable();
        let mut seen: u32 = 0;
        for &(lo, hi) in &pairs {
            if lo == 0 || lo >= hi || hi > n {
                return Err(ModelError::BadComparator(lo, hi));
            }
            for ch in [lo, hi] {
                if seen & (1 << ch) != 0 {
                    return Err(ModelError::OverlappingChannels(ch));
                }
                seen |= 1 << ch;
            }
        }
        Ok(Level { pairs })
    }

    pub fn empty() -> Level {
        Level { pairs: Vec::new() }
    }

    /// Caller guarantees the invariant (sorted, disjoint, in-bounds).
    pub(crate) fn from_sorted_unchecked(pairs: Vec<(u8, u8)>) -> Level {
        Level { pairs }
    }

    pub fn pairs(&self) -> &[(u8, u8)] {
        &self.pairs
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    /// Largest channel mentioned, or 0 for the empty level.
    pub fn max_channel(&self) -> u8 {
        self.pairs.iter().map(|&(_, hi)| hi).max().unwrap_or(0)
    }
}

/// A comparator network: an ordered list of levels on `n` channels.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Network {
    pub n: u8,
    levels: Vec<Level>,
}

impl Network {
    pub fn new(n: u8, levels: Vec<Level>) -> Result<Network, ModelError> {
        if n == 0 || n as usize > MAX_CHANNELS {
            return Err(ModelError::BadChannelCount(n as usize));
        }
        for level in &levels {
            if level.max_channel() > n {
                let &(lo, hi) = level
                    .pairs()
                    .iter()
                    .find(|&&(_, hi)| hi > n)
                    .expect("max_channel > n implies an out-of-range pair");
                return Err(ModelError::BadComparator(lo, hi));
            }
        }
        Ok(Network { n, levels })
    }

    pub fn empty(n: u8) -> Network {
        Network {
            n,
            levels: Vec::new(),
        }
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    /// Depth: the number of levels (empty levels count).
    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn push_level(&mut self, level: Level) {
        debug_assert!(level.max_channel() <= self.n);
        self.levels.push(level);
    }
}

/// A permutation of channels `1..=n`; `image_of(i)` is where channel `i`'s
/// value ends up.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Perm {
    map: Vec<u8>, // map[i-1] = image of channel i, 1-based
}

impl Perm {
    pub fn from_one_based(map: Vec<u8>) -> Result<Perm, ModelError> {
        let n = map.len();
        if n == 0 || n > MAX_CHANNELS {
            return Err(ModelError::BadChannelCount(n));
        }
        let mut seen = vec![false; n + 1];
        for &v in &map {
            if v == 0 || v as usize > n || seen[v as usize] {
                return Err(ModelError::NotAPermutation(n));
            }
            seen[v as usize] = true;
        }
        Ok(Perm { map })
    }

    pub fn identity(n: u8) -> Perm {
        Perm {
            map: (1..=n).collect(),
        }
    }

    pub fn n(&self) -> u8 {
        self.map.len() as u8
    }

    /// Image of channel `i` (1-based).
    pub fn image_of(&self, i: u8) -> u8 {
        self.map[i as usize - 1]
    }

    pub fn as_one_based(&self) -> &[u8] {
        &self.map
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0u8; self.map.len()];
        for (i, &v) in self.map.iter().enumerate() {
            inv[v as usize - 1] = i as u8 + 1;
        }
        Perm { map: inv }
    }

    /// `self` after `other`: `(self ∘ other)(i) = self(other(i))`.
    pub fn compose(&self, other: &Perm) -> Perm {
        debug_assert_eq!(self.map.len(), other.map.len());
        let map = other
            .map
            .iter()
            .map(|&v| self.map[v as usize - 1])
            .collect();
        Perm { map }
    }
}

/// Applies one level to a vector: every comparator `(lo, hi)` leaves the min
/// of the two channel values on `lo` and the max on `hi`.
#[inline]
pub fn apply_level(x: Word, level: &Level) -> Word {
    let mut w = x;
    for &(lo, hi) in level.pairs() {
        let a = (lo - 1) as u32;
        let b = (hi - 1) as u32;
        // Swap exactly when channel lo holds 1 and channel hi holds 0.
        let swap = ((w >> a) & !(w >> b)) & 1;
        w ^= (swap << a) | (swap << b);
    }
    w
}

/// Runs the network on one input, returning the output vector together with
/// the coordinate permutation it induces: `perm.image_of(i)` is the output
/// channel holding the value that entered on channel `i`. Comparators between
/// equal values keep both coordinates in place, so the permutation is a
/// deterministic function of the input.
pub fn evaluate(net: &Network, x: Word) -> (Word, Perm) {
    let n = net.n;
    let mut w = x;
    // origin[p] = input channel currently sitting at position p (0-based).
    let mut origin: [u8; MAX_CHANNELS] = [0; MAX_CHANNELS];
    for (p, o) in origin.iter_mut().enumerate().take(n as usize) {
        *o = p as u8;
    }
    for level in net.levels() {
        for &(lo, hi) in level.pairs() {
            let a = (lo - 1) as usize;
            let b = (hi - 1) as usize;
            let va = (w >> a) & 1;
            let vb = (w >> b) & 1;
            if va > vb {
                w ^= (1 << a) | (1 << b);
                origin.swap(a, b);
            }
        }
    }
    let mut dest = vec![0u8; n as usize];
    for (p, &ch) in origin.iter().enumerate().take(n as usize) {
        dest[ch as usize] = p as u8 + 1;
    }
    (w, Perm { map: dest })
}

/// Output set of the network over an arbitrary input collection.
pub fn output_set(net: &Network, inputs: &[Word]) -> OutputSet {
    let mut out: Vec<Word> = inputs
        .iter()
        .map(|&x| net.levels().iter().fold(x, apply_level))
        .collect();
    canonicalize(&mut out);
    out
}

/// Sorts and dedups in place, establishing the canonical output-set form.
pub fn canonicalize(set: &mut Vec<Word>) {
    set.sort_unstable();
    set.dedup();
}

/// True when the channel values are non-decreasing: low channels 0, high
/// channels 1.
#[inline]
pub fn is_sorted(x: Word, n: u8) -> bool {
    x == 0 || (x | (x - 1)) == mask(n)
}

/// Zero-one principle check: the network sorts every binary input.
pub fn is_sorting_network(net: &Network) -> bool {
    let n = net.n;
    (0..=mask(n)).all(|x| {
        let out = net.levels().iter().fold(x, apply_level);
        is_sorted(out, n)
    })
}

/// Concatenation `A ⊕ B`: the levels of `A` followed by the levels of `B`.
pub fn concat(a: &Network, b: &Network) -> Result<Network, ModelError> {
    if a.n != b.n {
        return Err(ModelError::ChannelMismatch(a.n, b.n));
    }
    let mut levels = a.levels.clone();
    levels.extend(b.levels.iter().cloned());
    Ok(Network { n: a.n, levels })
}

/// The `n+1` sorted vectors `0^l 1^r` in ascending word order.
pub fn sorted_inputs(n: u8) -> OutputSet {
    let m = mask(n);
    (0..=n).map(|l| m ^ mask_or_zero(l)).rev().collect()
}

#[inline]
fn mask_or_zero(l: u8) -> Word {
    if l == 0 {
        0
    } else {
        mask(l)
    }
}

/// Every binary vector on `n` channels.
pub fn all_inputs(n: u8) -> OutputSet {
    (0..=mask(n)).collect()
}

/// The restricted input universe: the union, over all splits `l + r = w`,
/// of the vectors whose first `l` channels are 0 and last `r` channels are 1
/// (middle channels free). `w = 0` gives every vector back.
pub fn restricted_inputs(n: u8, w: u8) -> Result<OutputSet, ModelError> {
    if w > n {
        return Err(ModelError::BadRestriction {
            w: w as usize,
            n: n as usize,
        });
    }
    let free = n - w;
    let mut out = Vec::new();
    for l in 0..=w {
        let r = w - l;
        let high_ones = mask(n) ^ mask_or_zero(n - r);
        for mid in 0..(1u32 << free) {
            out.push(high_ones | ((mid as Word) << l));
        }
    }
    canonicalize(&mut out);
    Ok(out)
}

/// Reflection of a vector: reverse the channel order, then complement.
#[inline]
pub fn reflect_vector(x: Word, n: u8) -> Word {
    (x.reverse_bits() >> (16 - n as u32)) ^ mask(n)
}

/// Reflection of a level: each comparator `(lo, hi)` becomes
/// `(n - hi + 1, n - lo + 1)`.
pub fn reflect_level(level: &Level, n: u8) -> Level {
    let mut pairs: Vec<(u8, u8)> = level
        .pairs()
        .iter()
        .map(|&(lo, hi)| (n - hi + 1, n - lo + 1))
        .collect();
    pairs.sort_unstable();
    Level::from_sorted_unchecked(pairs)
}

/// Level-wise reflection of a network, preserving level order.
pub fn reflect_network(net: &Network) -> Network {
    let levels = net
        .levels()
        .iter()
        .map(|l| reflect_level(l, net.n))
        .collect();
    Network { n: net.n, levels }
}

/// Reflection of a whole output set, in canonical form.
pub fn reflect_set(set: &[Word], n: u8) -> OutputSet {
    let mut out: Vec<Word> = set.iter().map(|&x| reflect_vector(x, n)).collect();
    canonicalize(&mut out);
    out
}

/// Moves channel `i`'s value to channel `perm.image_of(i)`.
#[inline]
pub fn permute_vector(perm: &Perm, x: Word) -> Word {
    let mut out = 0;
    for i in 0..perm.n() {
        out |= ((x >> i) & 1) << (perm.image_of(i + 1) - 1);
    }
    out
}

/// Maps every vector of the set and re-canonicalizes.
pub fn permute_set(perm: &Perm, set: &[Word]) -> OutputSet {
    let mut out: Vec<Word> = set.iter().map(|&x| permute_vector(perm, x)).collect();
    canonicalize(&mut out);
    out
}
