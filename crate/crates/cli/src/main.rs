//! Command-line frontend for the sorting-network filter pipeline.
//!
//! Subcommands: `levels` (count or enumerate comparator levels), `pipeline`
//! (compute minimal representative prefix sets and save them), `reduce`
//! (re-run the reduction on a stored dataset), `verify` (brute-force
//! extension prover), `stats` (dataset summary), `table` (representative
//! counts across a range of channel counts).
//!
//! Exit codes: 0 success, 1 verdict mismatch (`verify --expect` contradicted
//! by the computed verdict), 2 resource-guard refusal, 64 usage error
//! (including malformed dataset files).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use sortnet_core::format::{level_str, load, network_str, save, universe_token, LoadError};
use sortnet_core::levels::{all_levels, count_levels, nonempty_levels};
use sortnet_core::minrep::{min_rep_perm_refl, Dataset};
use sortnet_core::pipeline::{
    compute_r, compute_r_omega, format_ratio, omega_default, run_stage, seed, speedup, FilterSet,
    Limits, PipelineError, Universe, DEFAULT_MEM_CAP,
};
use sortnet_core::verify::{prove_filter_complete, Verdict, VerifyError};

#[derive(Parser)]
#[command(
    name = "sortnet",
    version,
    about = "Minimal representative comparator-network prefixes, up to permutation and reflection",
    after_help = "Memory cap resolution: --mem-cap flag, then SORTNET_MEM_CAP environment \
                  variable, then the 4G default. Values take an optional K/M/G suffix."
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Count or enumerate the comparator levels (matchings) on n channels
    Levels(LevelsArgs),
    /// Compute minimal representative filter sets, printing the count kept
    Pipeline(PipelineArgs),
    /// Re-run the reduction on a stored dataset (idempotent when already reduced)
    Reduce(ReduceArgs),
    /// Decide whether any stored prefix extends to sort its universe within a target depth
    Verify(VerifyArgs),
    /// Print summary statistics for a dataset file
    Stats(StatsArgs),
    /// Representative counts across a range of channel counts
    Table(TableArgs),
}

#[derive(Args)]
struct LevelsArgs {
    /// Channel count
    #[arg(long, value_parser = clap::value_parser!(u8).range(2..=16))]
    n: u8,
    /// Count only levels with at least one comparator
    #[arg(long)]
    nonempty: bool,
    /// Enumerate levels instead of using the counting recurrence (n <= 14)
    #[arg(long)]
    enumerate: bool,
    /// Print one level per line (implies --enumerate)
    #[arg(long)]
    print: bool,
}

#[derive(Args)]
struct PipelineArgs {
    /// Channel count
    #[arg(long, value_parser = clap::value_parser!(u8).range(2..=16))]
    n: u8,
    /// Prefix depth to compute
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    depth: u8,
    /// Restrict the input universe to width w (0 restricts nothing)
    #[arg(long)]
    omega: Option<u8>,
    /// Write the resulting dataset to this path
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for extension and reduction
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    threads: u32,
    /// Memory cap in bytes, with optional K/M/G suffix
    #[arg(long)]
    mem_cap: Option<String>,
}

#[derive(Args)]
struct ReduceArgs {
    /// Input dataset file
    #[arg(long = "in")]
    input: PathBuf,
    /// Output dataset file
    #[arg(long)]
    out: PathBuf,
    /// Worker threads
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    threads: u32,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Expect {
    Exists,
    NotExists,
}

#[derive(Args)]
struct VerifyArgs {
    /// Input dataset file holding the prefixes to extend
    #[arg(long = "in")]
    input: PathBuf,
    /// Total depth the extended network may use
    #[arg(long)]
    target_depth: u8,
    /// Fail (exit 1) unless the verdict matches
    #[arg(long, value_enum)]
    expect: Option<Expect>,
    /// Worker threads
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    threads: u32,
}

#[derive(Args)]
struct StatsArgs {
    /// Input dataset file
    #[arg(long = "in")]
    input: PathBuf,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum TableFormat {
    /// Aligned columns for reading
    Text,
    /// Tab-separated values, one row label per line
    Tsv,
}

#[derive(Args)]
struct TableArgs {
    /// Channel-count range, half-open like 5..13 or inclusive like 5..=12
    #[arg(long)]
    n_range: String,
    /// Also compute the depth-3 rows and the search-space ratios
    #[arg(long)]
    depth3: bool,
    /// Also compute the restricted-universe rows (per-n default widths)
    #[arg(long)]
    restricted: bool,
    #[arg(long, value_enum, default_value_t = TableFormat::Text)]
    format: TableFormat,
    /// Worker threads
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    threads: u32,
    /// Memory cap in bytes, with optional K/M/G suffix
    #[arg(long)]
    mem_cap: Option<String>,
}

/// A subcommand failure carrying its exit code.
enum Failure {
    /// Exit 1: a --expect assertion contradicted the computed verdict.
    Mismatch(String),
    /// Exit 2: a resource guard declined the computation.
    Guard(String),
    /// Exit 64: bad arguments, bad files, or malformed input.
    Usage(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Mismatch(_) => 1,
            Failure::Guard(_) => 2,
            Failure::Usage(_) => 64,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Mismatch(m) | Failure::Guard(m) | Failure::Usage(m) => m,
        }
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Failure {
        match e {
            PipelineError::MemoryGuard { .. } => Failure::Guard(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<VerifyError> for Failure {
    fn from(e: VerifyError) -> Failure {
        match e {
            VerifyError::SearchSpaceGuard { .. } => Failure::Guard(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<LoadError> for Failure {
    fn from(e: LoadError) -> Failure {
        Failure::Usage(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Failure {
        Failure::Usage(e.to_string())
    }
}

impl From<sortnet_core::model::ModelError> for Failure {
    fn from(e: sortnet_core::model::ModelError) -> Failure {
        Failure::Usage(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 64,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.cmd) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn run(cmd: Cmd) -> Result<(), Failure> {
    match cmd {
        Cmd::Levels(a) => run_levels(a),
        Cmd::Pipeline(a) => run_pipeline_cmd(a),
        Cmd::Reduce(a) => run_reduce(a),
        Cmd::Verify(a) => run_verify(a),
        Cmd::Stats(a) => run_stats(a),
        Cmd::Table(a) => run_table(a),
    }
}

/// Parses a byte count with an optional K/M/G suffix (powers of 1024).
fn parse_mem_cap(s: &str) -> Result<u64, String> {
    let s = s.trim();
    let (digits, shift) = match s.as_bytes().last() {
        Some(b'k') | Some(b'K') => (&s[..s.len() - 1], 10),
        Some(b'm') | Some(b'M') => (&s[..s.len() - 1], 20),
        Some(b'g') | Some(b'G') => (&s[..s.len() - 1], 30),
        _ => (s, 0),
    };
    let base: u64 = digits
        .parse()
        .map_err(|_| format!("bad memory cap {s:?}: expected digits with optional K/M/G suffix"))?;
    base.checked_shl(shift)
        .filter(|&v| v >> shift == base)
        .ok_or_else(|| format!("memory cap {s:?} overflows"))
}

/// Flag beats environment beats the built-in default.
fn resolve_limits(flag: Option<&str>) -> Result<Limits, Failure> {
    let cap = match flag {
        Some(s) => parse_mem_cap(s).map_err(Failure::Usage)?,
        None => match std::env::var("SORTNET_MEM_CAP") {
            Ok(s) => {
                parse_mem_cap(&s).map_err(|m| Failure::Usage(format!("SORTNET_MEM_CAP: {m}")))?
            }
            Err(_) => DEFAULT_MEM_CAP,
        },
    };
    Ok(Limits { mem_cap_bytes: cap })
}

fn universe_for(n: u8, omega: Option<u8>) -> Result<Universe, Failure> {
    match omega {
        None => Ok(Universe::Full),
        Some(w) if w <= n => Ok(Universe::Omega(w)),
        Some(w) => Err(Failure::Usage(format!(
            "--omega {w} exceeds the channel count {n}"
        ))),
    }
}

fn run_levels(a: LevelsArgs) -> Result<(), Failure> {
    let enumerate = a.enumerate || a.print;
    if !enumerate {
        let total = count_levels(a.n).map_err(|e| Failure::Usage(e.to_string()))?;
        println!("{}", if a.nonempty { total - 1 } else { total });
        return Ok(());
    }
    if a.n > 14 {
        return Err(Failure::Guard(format!(
            "enumerating all levels for n={} materializes {} of them; use the \
             counting mode (drop --enumerate/--print)",
            a.n,
            count_levels(a.n).map_err(|e| Failure::Usage(e.to_string()))?
        )));
    }
    let catalog = if a.nonempty {
        nonempty_levels(a.n)
    } else {
        all_levels(a.n)
    }
    .map_err(|e| Failure::Usage(e.to_string()))?;
    if a.print {
        let mut out = String::new();
        for level in &catalog.levels {
            out.push_str(&level_str(level));
            out.push('\n');
        }
        print!("{out}");
    } else {
        println!("{}", catalog.len());
    }
    Ok(())
}

fn run_pipeline_cmd(a: PipelineArgs) -> Result<(), Failure> {
    let limits = resolve_limits(a.mem_cap.as_deref())?;
    let universe = universe_for(a.n, a.omega)?;
    let threads = a.threads as usize;

    let mut fs = seed(a.n, universe)?;
    eprintln!("stage depth=1: {} representative(s)", fs.records.len());
    if a.depth > 1 {
        let catalog = nonempty_levels(a.n).map_err(PipelineError::from)?;
        for d in 2..=a.depth {
            let candidates = fs.records.len() * catalog.len();
            fs = run_stage(fs, &catalog, d, threads, &limits)?;
            eprintln!(
                "stage depth={d}: {candidates} candidate(s) -> {} kept",
                fs.records.len()
            );
        }
    }
    if let Some(path) = &a.out {
        save(&fs, path)?;
    }
    println!("{}", fs.records.len());
    Ok(())
}

fn run_reduce(a: ReduceArgs) -> Result<(), Failure> {
    let fs = load(&a.input)?;
    let (n, depth, universe) = (fs.n, fs.depth, fs.universe);
    let before = fs.records.len();
    let reduced = min_rep_perm_refl(
        Dataset {
            n,
            records: fs.records,
        },
        a.threads as usize,
    );
    eprintln!(
        "reduce: {before} record(s) -> {} kept",
        reduced.records.len()
    );
    let out = FilterSet {
        n,
        depth,
        universe,
        records: reduced.records,
    };
    save(&out, &a.out)?;
    println!("{}", out.records.len());
    Ok(())
}

fn run_verify(a: VerifyArgs) -> Result<(), Failure> {
    let fs = load(&a.input)?;
    let report = prove_filter_complete(&fs, a.target_depth, a.threads as usize)?;
    println!("verdict: {}", report.verdict);
    let extendable = report.extendable.iter().filter(|&&b| b).count();
    println!("extendable: {extendable} of {}", report.extendable.len());
    if let Some(witness) = &report.witness {
        println!("witness: {}", network_str(witness));
    }
    if let Some(expect) = a.expect {
        let want = match expect {
            Expect::Exists => Verdict::Exists,
            Expect::NotExists => Verdict::NotExists,
        };
        if want != report.verdict {
            return Err(Failure::Mismatch(format!(
                "expected {want}, computed {}",
                report.verdict
            )));
        }
    }
    Ok(())
}

fn run_stats(a: StatsArgs) -> Result<(), Failure> {
    let fs = load(&a.input)?;
    let sizes: Vec<usize> = fs.records.iter().map(|r| r.set.len()).collect();
    let total: usize = sizes.iter().sum();
    println!(
        "n={} depth={} universe={} count={} set-min={} set-max={} set-total={}",
        fs.n,
        fs.depth,
        universe_token(fs.universe),
        fs.records.len(),
        sizes.iter().min().copied().unwrap_or(0),
        sizes.iter().max().copied().unwrap_or(0),
        total
    );
    Ok(())
}

/// Accepts `A..B` (half-open) and `A..=B` (inclusive); returns the inclusive
/// channel range.
fn parse_n_range(s: &str) -> Result<(u8, u8), String> {
    let (a, rest) = s
        .split_once("..")
        .ok_or_else(|| format!("bad range {s:?}: expected A..B or A..=B"))?;
    let (incl, b) = match rest.strip_prefix('=') {
        Some(b) => (true, b),
        None => (false, rest),
    };
    let lo: u8 = a
        .trim()
        .parse()
        .map_err(|_| format!("bad range start {a:?}"))?;
    let hi_raw: u8 = b
        .trim()
        .parse()
        .map_err(|_| format!("bad range end {b:?}"))?;
    let hi = if incl {
        hi_raw
    } else {
        hi_raw.saturating_sub(1)
    };
    if lo < 2 || hi > 16 || lo > hi {
        return Err(format!(
            "range {s:?} must stay within channel counts 2..=16 and be nonempty"
        ));
    }
    Ok((lo, hi))
}

fn run_table(a: TableArgs) -> Result<(), Failure> {
    let (lo, hi) = parse_n_range(&a.n_range).map_err(Failure::Usage)?;
    let limits = resolve_limits(a.mem_cap.as_deref())?;
    let threads = a.threads as usize;
    let ns: Vec<u8> = (lo..=hi).collect();

    let mut rows: Vec<(String, Vec<String>)> = Vec::new();
    let mut row = |label: &str, cells: Vec<String>| rows.push((label.to_string(), cells));

    row("n", ns.iter().map(|n| n.to_string()).collect());

    let widths: Vec<Option<u8>> = ns.iter().map(|&n| omega_default(n)).collect();
    if a.restricted {
        row(
            "omega",
            widths
                .iter()
                .map(|w| w.map_or_else(|| "-".into(), |w| w.to_string()))
                .collect(),
        );
    }

    let mut g = Vec::new();
    for &n in &ns {
        g.push(count_levels(n).map_err(|e| Failure::Usage(e.to_string()))?);
    }
    row("|G_n|", g.iter().map(|v| v.to_string()).collect());

    let mut r1 = Vec::new();
    let mut r2 = Vec::new();
    for &n in &ns {
        r1.push(compute_r(n, 1, threads, &limits)?.records.len() as u64);
        let v = compute_r(n, 2, threads, &limits)?.records.len() as u64;
        eprintln!("table: n={n} depth=2 -> {v}");
        r2.push(v);
    }
    row("|R_{n,1}|", r1.iter().map(|v| v.to_string()).collect());
    row("|R_{n,2}|", r2.iter().map(|v| v.to_string()).collect());

    if a.restricted {
        let mut cells = Vec::new();
        for (&n, w) in ns.iter().zip(&widths) {
            cells.push(match w {
                Some(w) => {
                    let v = compute_r_omega(n, 2, *w, threads, &limits)?.records.len();
                    eprintln!("table: n={n} depth=2 width={w} -> {v}");
                    v.to_string()
                }
                None => "-".into(),
            });
        }
        row("|R_{n,2}|w", cells);
    }

    if a.depth3 {
        let mut r3 = Vec::new();
        for &n in &ns {
            let v = compute_r(n, 3, threads, &limits)?.records.len() as u64;
            eprintln!("table: n={n} depth=3 -> {v}");
            r3.push(v);
        }
        row("|R_{n,3}|", r3.iter().map(|v| v.to_string()).collect());
        row(
            "speedup",
            ns.iter()
                .enumerate()
                .map(|(i, _)| format_ratio(speedup(r2[i], g[i], r3[i])))
                .collect(),
        );

        if a.restricted {
            let mut r3w = Vec::new();
            for (&n, w) in ns.iter().zip(&widths) {
                r3w.push(match w {
                    Some(w) => {
                        let v = compute_r_omega(n, 3, *w, threads, &limits)?.records.len() as u64;
                        eprintln!("table: n={n} depth=3 width={w} -> {v}");
                        Some(v)
                    }
                    None => None,
                });
            }
            row(
                "|R_{n,3}^w|",
                r3w.iter()
                    .map(|v| v.map_or_else(|| "-".into(), |v| v.to_string()))
                    .collect(),
            );
            row(
                "speedup^w",
                r3w.iter()
                    .enumerate()
                    .map(|(i, v)| match v {
                        Some(v) => format_ratio(speedup(r2[i], g[i], *v)),
                        None => "-".into(),
                    })
                    .collect(),
            );
        }
    }

    print!("{}", render_table(&rows, a.format));
    Ok(())
}

fn render_table(rows: &[(String, Vec<String>)], format: TableFormat) -> String {
    let mut out = String::new();
    match format {
        TableFormat::Tsv => {
            for (label, cells) in rows {
                out.push_str(label);
                for cell in cells {
                    out.push('\t');
                    out.push_str(cell);
                }
                out.push('\n');
            }
        }
        TableFormat::Text => {
            let label_w = rows.iter().map(|(l, _)| l.len()).max().unwrap_or(0);
            let cols = rows.first().map_or(0, |(_, c)| c.len());
            let col_w: Vec<usize> = (0..cols)
                .map(|i| rows.iter().map(|(_, c)| c[i].len()).max().unwrap_or(0))
                .collect();
            for (label, cells) in rows {
                out.push_str(&format!("{label:<label_w$}"));
                for (i, cell) in cells.iter().enumerate() {
                    out.push_str(&format!("  {cell:>w$}", w = col_w[i]));
                }
                out.push('\n');
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mem_cap_suffixes() {
        assert_eq!(parse_mem_cap("1024").unwrap(), 1024);
        assert_eq!(parse_mem_cap("4K").unwrap(), 4096);
        assert_eq!(parse_mem_cap("2m").unwrap(), 2 << 20);
        assert_eq!(parse_mem_cap("4G").unwrap(), 4 << 30);
        assert!(parse_mem_cap("fourG").is_err());
        assert!(parse_mem_cap("").is_err());
        assert!(parse_mem_cap("99999999999999999999G").is_err());
    }

    #[test]
    fn n_range_forms() {
        assert_eq!(parse_n_range("5..13").unwrap(), (5, 12));
        assert_eq!(parse_n_range("5..=12").unwrap(), (5, 12));
        assert_eq!(parse_n_range("2..3").unwrap(), (2, 2));
        assert!(parse_n_range("5").is_err());
        assert!(parse_n_range("1..4").is_err());
        assert!(parse_n_range("9..8").is_err());
        assert!(parse_n_range("5..18").is_err());
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
