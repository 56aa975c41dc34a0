//! Line-oriented text serialization of filter sets.
//!
//! ```text
//! SNDS v1 n=<n> d=<d> universe=<full|omega:<w>> count=<r>
//! N 1-2 3-4;1-3 2-4        (levels ;-separated, comparators lo-hi, "-" = empty)
//! S 0000,0011,1111          (vectors channel-1-leftmost, ascending word order)
//! ```
//!
//! The writer emits exactly one canonical form; the parser rejects anything
//! non-canonical (unsorted vectors, wrong level counts, stray content) with
//! the offending line number, so a load/save round trip is byte-identical.

use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::minrep::Record;
use crate::model::{Level, Network, Word};
use crate::pipeline::{FilterSet, Universe};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormatError {
    #[error("line {line}: malformed header: {detail}")]
    BadHeader { line: usize, detail: String },
    #[error("line {line}: expected a record {expected} line")]
    BadRecordLine { line: usize, expected: &'static str },
    #[error("line {line}: bad comparator token '{token}'")]
    BadComparator { line: usize, token: String },
    #[error("line {line}: channel {channel} out of range for n={n}")]
    ChannelOutOfRange { line: usize, channel: u8, n: u8 },
    #[error("line {line}: comparators overlap on channel {channel}")]
    OverlappingChannels { line: usize, channel: u8 },
    #[error("line {line}: network has {got} levels but the header says d={want}")]
    WrongDepth { line: usize, got: usize, want: u8 },
    #[error("line {line}: bad vector token '{token}' for n={n}")]
    BadVector { line: usize, token: String, n: u8 },
    #[error("line {line}: vectors not in strictly ascending word order")]
    VectorsOutOfOrder { line: usize },
    #[error("line {line}: file ends before record {at} of {want}")]
    UnexpectedEnd { line: usize, at: usize, want: usize },
    #[error("line {line}: content after the final record")]
    TrailingContent { line: usize },
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Parse(#[from] FormatError),
}

pub fn universe_token(u: Universe) -> String {
    match u {
        Universe::Full => "full".into(),
        Universe::Omega(w) => format!("omega:{w}"),
    }
}

pub fn level_str(level: &Level) -> String {
    if level.is_empty() {
        return "-".into();
    }
    level
        .pairs()
        .iter()
        .map(|&(lo, hi)| format!("{lo}-{hi}"))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Text form of one network, without the `N ` tag.
pub fn network_str(net: &Network) -> String {
    if net.levels().is_empty() {
        return "-".into();
    }
    net.levels()
        .iter()
        .map(level_str)
        .collect::<Vec<_>>()
        .join(";")
}

fn vector_str(x: Word, n: u8) -> String {
    (0..n)
        .map(|i| if (x >> i) & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Canonical serialization.
pub fn write_filterset(fs: &FilterSet) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "SNDS v1 n={} d={} universe={} count={}",
        fs.n,
        fs.depth,
        universe_token(fs.universe),
        fs.records.len()
    )
    .unwrap();
    for rec in &fs.records {
        writeln!(out, "N {}", network_str(&rec.net)).unwrap();
        let vectors: Vec<String> = rec.set.iter().map(|&x| vector_str(x, fs.n)).collect();
        writeln!(out, "S {}", vectors.join(",")).unwrap();
    }
    out
}

fn parse_header(line: &str, lineno: usize) -> Result<(u8, u8, Universe, usize), FormatError> {
    let bad = |detail: &str| FormatError::BadHeader {
        line: lineno,
        detail: detail.into(),
    };
    let tokens: Vec<&str> = line.split(' ').collect();
    if tokens.len() != 6 || tokens[0] != "SNDS" || tokens[1] != "v1" {
        return Err(bad("expected 'SNDS v1 n=<n> d=<d> universe=<u> count=<r>'"));
    }
    let field = |tok: &str, key: &str| -> Result<String, FormatError> {
        tok.strip_prefix(key)
            .and_then(|rest| rest.strip_prefix('='))
            .map(str::to_owned)
            .ok_or_else(|| bad(&format!("expected '{key}=...', found '{tok}'")))
    };
    let n: u8 = field(tokens[2], "n")?
        .parse()
        .map_err(|_| bad("n is not a number"))?;
    if !(1..=16).contains(&n) {
        return Err(bad(&format!("n={n} outside 1..=16")));
    }
    let d: u8 = field(tokens[3], "d")?
        .parse()
        .map_err(|_| bad("d is not a number"))?;
    let u = field(tokens[4], "universe")?;
    let universe = if u == "full" {
        Universe::Full
    } else if let Some(w) = u.strip_prefix("omega:") {
        let w: u8 = w
            .parse()
            .map_err(|_| bad("restriction width is not a number"))?;
        if w > n {
            return Err(bad(&format!("restriction width {w} exceeds n={n}")));
        }
        Universe::Omega(w)
    } else {
        return Err(bad(&format!("unknown universe '{u}'")));
    };
    let count: usize = field(tokens[5], "count")?
        .parse()
        .map_err(|_| bad("count is not a number"))?;
    Ok((n, d, universe, count))
}

fn parse_level(seg: &str, n: u8, lineno: usize) -> Result<Level, FormatError> {
    if seg == "-" {
        return Ok(Level::empty());
    }
    let mut pairs = Vec::new();
    let mut seen: u32 = 0;
    for token in seg.split(' ') {
        let bad = || FormatError::BadComparator {
            line: lineno,
            token: token.into(),
        };
        let (lo_s, hi_s) = token.split_once('-').ok_or_else(bad)?;
        let lo: u8 = lo_s.parse().map_err(|_| bad())?;
        let hi: u8 = hi_s.parse().map_err(|_| bad())?;
        if lo == 0 || lo >= hi {
            return Err(bad());
        }
        if hi > n {
            return Err(FormatError::ChannelOutOfRange {
                line: lineno,
                channel: hi,
                n,
            });
        }
        for ch in [lo, hi] {
            if seen & (1 << ch) != 0 {
                return Err(FormatError::OverlappingChannels {
                    line: lineno,
                    channel: ch,
                });
            }
            seen |= 1 << ch;
        }
        pairs.push((lo, hi));
    }
    pairs.sort_unstable();
    Ok(Level::from_sorted_unchecked(pairs))
}

fn parse_network(body: &str, n: u8, d: u8, lineno: usize) -> Result<Network, FormatError> {
    let levels: Vec<Level> = if body == "-" && d == 0 {
        Vec::new()
    } else {
        body.split(';')
            .map(|seg| parse_level(seg, n, lineno))
            .collect::<Result<_, _>>()?
    };
    if levels.len() != d as usize {
        return Err(FormatError::WrongDepth {
            line: lineno,
            got: levels.len(),
            want: d,
        });
    }
    Ok(Network::new(n, levels).expect("validated while parsing"))
}

fn parse_set(body: &str, n: u8, lineno: usize) -> Result<Vec<Word>, FormatError> {
    let mut set: Vec<Word> = Vec::new();
    for token in body.split(',') {
        if token.len() != n as usize || !token.bytes().all(|b| b == b'0' || b == b'1') {
            return Err(FormatError::BadVector {
                line: lineno,
                token: token.into(),
                n,
            });
        }
        let mut x: Word = 0;
        for (i, b) in token.bytes().enumerate() {
            if b == b'1' {
                x |= 1 << i;
            }
        }
        if let Some(&last) = set.last() {
            if last >= x {
                return Err(FormatError::VectorsOutOfOrder { line: lineno });
            }
        }
        set.push(x);
    }
    Ok(set)
}

/// Strict parse of the canonical form.
pub fn parse_filterset(text: &str) -> Result<FilterSet, FormatError> {
    let mut lines = text.split('\n').enumerate();
    let (_, header) = lines.next().ok_or(FormatError::BadHeader {
        line: 1,
        detail: "empty file".into(),
    })?;
    let (n, d, universe, count) = parse_header(header, 1)?;

    fn take(
        item: Option<(usize, &str)>,
        last_line: usize,
        at: usize,
        want: usize,
    ) -> Result<(usize, &str), FormatError> {
        match item {
            // A record line must hold content, not the empty tail after the
            // final newline.
            Some((idx, line)) if !line.is_empty() => Ok((idx + 1, line)),
            _ => Err(FormatError::UnexpectedEnd {
                line: last_line,
                at,
                want,
            }),
        }
    }

    let mut records = Vec::with_capacity(count);
    let mut consumed = 1;
    for k in 0..count {
        let (lineno, net_line) = take(lines.next(), consumed, k + 1, count)?;
        consumed = lineno;
        let body = net_line
            .strip_prefix("N ")
            .ok_or(FormatError::BadRecordLine {
                line: lineno,
                expected: "network (N …)",
            })?;
        let net = parse_network(body, n, d, lineno)?;

        let (lineno, set_line) = take(lines.next(), consumed, k + 1, count)?;
        consumed = lineno;
        let body = set_line
            .strip_prefix("S ")
            .ok_or(FormatError::BadRecordLine {
                line: lineno,
                expected: "set (S …)",
            })?;
        let set = parse_set(body, n, lineno)?;
        records.push(Record { net, set });
    }
    // Only the trailing newline's empty remainder may follow.
    for (idx, line) in lines {
        if !line.is_empty() {
            return Err(FormatError::TrailingContent { line: idx + 1 });
        }
    }
    Ok(FilterSet {
        n,
        depth: d,
        universe,
        records,
    })
}

pub fn save(fs: &FilterSet, path: &Path) -> std::io::Result<()> {
    std::fs::write(path, write_filterset(fs))
}

pub fn load(path: &Path) -> Result<FilterSet, LoadError> {
    let text = std::fs::read_to_string(path)?;
    Ok(parse_filterset(&text)?)
}
