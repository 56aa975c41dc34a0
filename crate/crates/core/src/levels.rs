//! Enumeration of all comparator levels on `n` channels — the matchings of
//! the complete graph, counted by the telephone numbers.
//!
//! The generation order doubles as the tie-breaking order everywhere
//! downstream, so it is part of the library's contract: recurse on the
//! smallest free channel, trying each partner in ascending order before
//! leaving the channel unpaired. That puts the maximal level
//! `{(1,2),(3,4),…}` first and the empty level last.

use crate::model::{Level, ModelError, MAX_CHANNELS};

/// The full, ordered list of levels for one channel count.
#[derive(Debug, Clone)]
pub struct LevelCatalog {
    pub n: u8,
    pub levels: Vec<Level>,
}

impl LevelCatalog {
    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }
}

/// Number of levels on `n` channels (matchings including the empty one),
/// via the telephone recurrence T(n) = T(n-1) + (n-1)·T(n-2).
pub fn count_levels(n: u8) -> Result<u64, ModelError> {
    if n == 0 || n as usize > MAX_CHANNELS {
        return Err(ModelError::BadChannelCount(n as usize));
    }
    let (mut prev, mut cur) = (1u64, 1u64); // T(0), T(1)
    for k in 2..=n as u64 {
        let next = cur + (k - 1) * prev;
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// Every level on `n` channels, empty level included, in generation order.
pub fn all_levels(n: u8) -> Result<LevelCatalog, ModelError> {
    let expected = count_levels(n)? as usize;
    let mut levels = Vec::with_capacity(expected);
    let mut pairs: Vec<(u8, u8)> = Vec::with_capacity(n as usize / 2);
    let free = if n as usize == MAX_CHANNELS {
        u16::MAX
    } else {
        (1u16 << n) - 1
    };
    recurse(free, &mut pairs, &mut levels);
    debug_assert_eq!(levels.len(), expected);
    Ok(LevelCatalog { n, levels })
}

fn recurse(free: u16, pairs: &mut Vec<(u8, u8)>, out: &mut Vec<Level>) {
    if free == 0 {
        out.push(Level::from_sorted_unchecked(pairs.clone()));
        return;
    }
    let c = free.trailing_zeros() as u8; // smallest free channel, 0-based
    let rest = free & !(1 << c);
    // Pair the smallest free channel with each larger partner first…
    let mut partners = rest;
    while partners != 0 {
        let p = partners.trailing_zeros() as u8;
        partners &= partners - 1;
        pairs.push((c + 1, p + 1));
        recurse(rest & !(1 << p), pairs, out);
        pairs.pop();
    }
    // …then leave it unpaired.
    recurse(rest, pairs, out);
}

/// All levels except the empty one; extension never benefits from a level
/// that compares nothing.
pub fn nonempty_levels(n: u8) -> Result<LevelCatalog, ModelError> {
    let mut catalog = all_levels(n)?;
    catalog.levels.retain(|l| !l.is_empty());
    Ok(catalog)
}

/// The maximal level `{(1,2),(3,4),…}` with ⌊n/2⌋ comparators — the canonical
/// first layer, and the single depth-1 representative.
pub fn maximal_first_level(n: u8) -> Level {
    let pairs = (0..n / 2).map(|k| (2 * k + 1, 2 * k + 2)).collect();
    Level::from_sorted_unchecked(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    const TELEPHONE: [(u8, u64); 15] = [
        (2, 2),
        (3, 4),
        (4, 10),
        (5, 26),
        (6, 76),
        (7, 232),
        (8, 764),
        (9, 2620),
        (10, 9496),
        (11, 35696),
        (12, 140152),
        (13, 568504),
        (14, 2390480),
        (15, 10349536),
        (16, 46206736),
    ];

    #[test]
    fn counts_match_telephone_numbers() {
        for (n, want) in TELEPHONE {
            assert_eq!(count_levels(n).unwrap(), want, "n={n}");
        }
        assert_eq!(count_levels(1).unwrap(), 1);
        assert!(count_levels(0).is_err());
        assert!(count_levels(17).is_err());
    }

    #[test]
    fn enumeration_agrees_with_recurrence() {
        for n in 1..=12u8 {
            let catalog = all_levels(n).unwrap();
            assert_eq!(catalog.len() as u64, count_levels(n).unwrap(), "n={n}");
            let distinct: HashSet<_> = catalog.levels.iter().collect();
            assert_eq!(distinct.len(), catalog.len(), "duplicates at n={n}");
        }
    }

    #[test]
    fn generation_order_is_frozen() {
        let catalog = all_levels(4).unwrap();
        let got: Vec<Vec<(u8, u8)>> = catalog.levels.iter().map(|l| l.pairs().to_vec()).collect();
        let want: Vec<Vec<(u8, u8)>> = vec![
            vec![(1, 2), (3, 4)],
            vec![(1, 2)],
            vec![(1, 3), (2, 4)],
            vec![(1, 3)],
            vec![(1, 4), (2, 3)],
            vec![(1, 4)],
            vec![(2, 3)],
            vec![(2, 4)],
            vec![(3, 4)],
            vec![],
        ];
        assert_eq!(got, want);
    }

    #[test]
    fn first_is_maximal_last_is_empty() {
        for n in 2..=10u8 {
            let catalog = all_levels(n).unwrap();
            assert_eq!(catalog.levels[0], maximal_first_level(n), "n={n}");
            assert!(catalog.levels.last().unwrap().is_empty(), "n={n}");
        }
    }

    #[test]
    fn nonempty_drops_exactly_the_empty_level() {
        for n in 2..=10u8 {
            let all = all_levels(n).unwrap();
            let ne = nonempty_levels(n).unwrap();
            assert_eq!(ne.len() + 1, all.len());
            assert!(ne.levels.iter().all(|l| !l.is_empty()));
        }
        assert_eq!(nonempty_levels(5).unwrap().len(), 25);
        assert_eq!(nonempty_levels(6).unwrap().len(), 75);
        let n3: Vec<_> = nonempty_levels(3)
            .unwrap()
            .levels
            .iter()
            .map(|l| l.pairs().to_vec())
            .collect();
        assert_eq!(n3, vec![vec![(1, 2)], vec![(1, 3)], vec![(2, 3)]]);
    }

    #[test]
    fn maximal_level_shape() {
        assert_eq!(maximal_first_level(4).pairs(), &[(1, 2), (3, 4)]);
        assert_eq!(maximal_first_level(5).pairs(), &[(1, 2), (3, 4)]);
        assert_eq!(maximal_first_level(2).pairs(), &[(1, 2)]);
        for n in 2..=16u8 {
            assert_eq!(maximal_first_level(n).len(), n as usize / 2);
        }
    }
}
