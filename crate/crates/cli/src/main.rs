use std::collections::BTreeSet;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{ArgAction, Parser, Subcommand, ValueEnum};
use halfcube_core::face::expected_counts;
use halfcube_core::morse::{rule_applicability, verify_acyclic};
use halfcube_core::snf::{class_independence, homology_report};
use halfcube_core::subcomplex::{homology_basis, subcomplex_members, BettiRow};
use halfcube_core::{
    betti_eq11, betti_eq12, build_matching, build_subcomplex, enumerate_faces, match_face,
    parse_seq, ChainComplex, FaceRecord, FaceSeq, FaceTable,
};
use log::{info, warn};
use num_bigint::BigUint;
use rayon::prelude::*;
use serde_json::{json, Value};

/// Largest n for which the Smith normal form oracle runs without `--force`.
const ORACLE_MAX: usize = 6;
/// Largest n for which `betti` fills the unmatched column.
const UNMATCHED_MAX: usize = 9;

#[derive(Parser, Debug)]
#[command(name = "halfcube", version, about = "Faces, Morse matching and homology bases of the half cube")]
struct Cli {
    /// Ambient dimension (at least 4).
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Subcomplex parameter: half cube faces of dimension >= k are removed.
    #[arg(long, global = true)]
    k: Option<usize>,
    /// Only list faces of this dimension (-1 for the empty face).
    #[arg(long, global = true, allow_hyphen_values = true)]
    dim: Option<i32>,
    /// Look up a single face, e.g. 1110010 or EMPTY.
    #[arg(long, global = true)]
    face: Option<String>,
    /// Print the verification report instead of the full dump.
    #[arg(long, global = true)]
    verify: bool,
    /// Certify the basis with the Smith normal form oracle.
    #[arg(long, global = true)]
    certify: bool,
    /// Fill the oracle column of the Betti table.
    #[arg(long, global = true)]
    oracle: bool,
    /// Run the oracle above n = 6.
    #[arg(long, global = true)]
    force: bool,
    /// Also tabulate k = n.
    #[arg(long, global = true)]
    include_k_eq_n: bool,
    /// Largest n in the Betti table.
    #[arg(long, global = true)]
    n_max: Option<usize>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Write data here instead of stdout. The RESULT line always goes to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    #[arg(short, long, global = true, action = ArgAction::Count)]
    verbose: u8,
    #[arg(short, long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// List the faces of the half cube and check the census.
    Enum,
    /// Dump and verify the Morse matching.
    Match,
    /// Homology basis of the subcomplex C(n, k).
    Basis,
    /// Betti numbers of C(n, k) from every available pipeline.
    Betti,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Jsonl,
    Csv,
}

#[derive(Debug)]
struct RunConfig {
    n: Option<usize>,
    k: Option<usize>,
    command: Command,
    format: Format,
    out: Option<PathBuf>,
    jobs: usize,
    dim: Option<i32>,
    face: Option<String>,
    verify: bool,
    certify: bool,
    oracle: bool,
    force: bool,
    include_k_eq_n: bool,
    n_max: usize,
}

enum Failure {
    Usage(String),
    Verify(String),
    Io(io::Error),
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

type Outcome = Result<String, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn check_n(n: usize) -> Result<(), Failure> {
    if n < 4 {
        return Err(usage(format!("--n must be at least 4, got {n}")));
    }
    if n > 31 {
        return Err(usage(format!("--n must be at most 31, got {n}")));
    }
    Ok(())
}

impl RunConfig {
    fn from_cli(cli: Cli) -> Result<Self, Failure> {
        if cli.jobs == 0 {
            return Err(usage("--jobs must be at least 1"));
        }
        let needs_n = cli.command != Command::Betti
            && !(cli.command == Command::Match && cli.face.as_deref().is_some_and(|f| f != "EMPTY"));
        match cli.n {
            Some(n) => check_n(n)?,
            None if needs_n => return Err(usage("--n is required")),
            None => {}
        }
        if let (Some(n), Some(k)) = (cli.n, cli.k) {
            let top = if cli.include_k_eq_n { n } else { n - 1 };
            if k < 3 || k > top {
                return Err(usage(format!("--k must satisfy 3 <= k < n, got n = {n}, k = {k}")));
            }
        }
        if cli.command == Command::Basis && cli.k.is_none() {
            return Err(usage("basis needs --k"));
        }
        if cli.command == Command::Basis && cli.k == cli.n {
            return Err(usage("basis needs k < n"));
        }
        let n_max = cli.n_max.unwrap_or(8);
        if cli.command == Command::Betti && cli.n.is_none() {
            check_n(n_max)?;
        }
        let default_format = if cli.command == Command::Betti { Format::Csv } else { Format::Jsonl };
        Ok(RunConfig {
            n: cli.n,
            k: cli.k,
            command: cli.command,
            format: cli.format.unwrap_or(default_format),
            out: cli.out,
            jobs: cli.jobs,
            dim: cli.dim,
            face: cli.face,
            verify: cli.verify,
            certify: cli.certify,
            oracle: cli.oracle,
            force: cli.force,
            include_k_eq_n: cli.include_k_eq_n,
            n_max,
        })
    }

    fn sink(&self) -> io::Result<Box<dyn Write>> {
        Ok(match &self.out {
            Some(path) => Box::new(BufWriter::new(File::create(path)?)),
            None => Box::new(BufWriter::new(io::stdout())),
        })
    }
}

fn table(n: usize) -> Result<FaceTable, Failure> {
    enumerate_faces(n).map_err(|e| usage(e.to_string()))
}

fn cmd_enum(cfg: &RunConfig) -> Outcome {
    let n = cfg.n.unwrap();
    let t = table(n)?;
    let mut out = cfg.sink()?;
    if cfg.format == Format::Csv {
        writeln!(out, "seq,dim,kind")?;
    }
    let mut listed = 0;
    for face in t.faces() {
        if cfg.dim.is_some_and(|d| d != face.dim()) {
            continue;
        }
        let record = FaceRecord::from(face);
        match cfg.format {
            Format::Jsonl => writeln!(out, "{}", serde_json::to_string(&record).unwrap())?,
            Format::Csv => writeln!(out, "{},{},{}", record.seq, record.dim, record.kind)?,
        }
        listed += 1;
    }
    out.flush()?;

    let expected = expected_counts(n);
    let mut bad = Vec::new();
    info!("dim  simplex  half  expected");
    for (d, &(es, eh)) in expected.iter().enumerate() {
        let (s, h) = t.shape_counts(d as i32);
        info!("{d:>3}  {s:>7}  {h:>4}  {es}+{eh}");
        if s as u128 != es || h as u128 != eh {
            bad.push(d);
        }
    }
    let cells = t.len() - 1;
    if bad.is_empty() {
        Ok(format!("n={n} cells={cells} listed={listed}"))
    } else {
        Err(Failure::Verify(format!("n={n} census mismatch in dimensions {bad:?}")))
    }
}

fn lookup_face(cfg: &RunConfig, text: &str) -> Outcome {
    let face = if text == "EMPTY" {
        FaceSeq::Empty
    } else {
        parse_seq(text, text.chars().count()).map_err(|e| usage(e.to_string()))?
    };
    let n = match &face {
        FaceSeq::Empty => cfg.n.unwrap(),
        seq => seq.symbols().len(),
    };
    if cfg.n.is_some_and(|m| m != n) {
        warn!("{text} has {n} symbols; matching it in dimension {n}");
    }
    let (partner, rule) = match_face(&face, n);
    let (back, back_rule) = match_face(&partner, n);
    let record = json!({ "face": face.to_string(), "partner": partner.to_string(), "rule": rule });
    let mut out = cfg.sink()?;
    writeln!(out, "{record}")?;
    out.flush()?;
    if back != face || back_rule != halfcube_core::morse::inverse_rule(rule) {
        return Err(Failure::Verify(format!("{partner} matches back to {back}, not {face}")));
    }
    Ok(format!("face={face} partner={partner} rule={rule}"))
}

fn cmd_match(cfg: &RunConfig) -> Outcome {
    if let Some(text) = &cfg.face {
        return lookup_face(cfg, text);
    }
    let n = cfg.n.unwrap();
    let t = table(n)?;
    let started = Instant::now();
    let m = build_matching(&t).map_err(|e| Failure::Verify(e.to_string()))?;
    let clash = (0..t.len()).into_par_iter().find_first(|&id| {
        rule_applicability(t.face(id)) != BTreeSet::from([m.rule(id)])
    });
    if let Some(id) = clash {
        let rules = rule_applicability(t.face(id));
        return Err(Failure::Verify(format!("rules {rules:?} apply to {}", t.face(id))));
    }
    let report = verify_acyclic(&m, &t);
    info!("matching built and checked in {:.2?}", started.elapsed());

    let mut out = cfg.sink()?;
    if cfg.verify {
        writeln!(out, "{}", serde_json::to_string(&report).unwrap())?;
    } else {
        if cfg.format == Format::Csv {
            writeln!(out, "face,partner,rule")?;
        }
        for r in m.records(&t) {
            match cfg.format {
                Format::Jsonl => writeln!(out, "{}", serde_json::to_string(&r).unwrap())?,
                Format::Csv => writeln!(out, "{},{},{}", r.face, r.partner, r.rule)?,
            }
        }
    }
    out.flush()?;

    let unpaired = (0..t.len()).filter(|&id| m.partner(id).is_none()).count();
    if let Some(layer) = report.layers.iter().find(|l| l.cycle.is_some()) {
        let cycle = layer.cycle.as_ref().unwrap().join(" ");
        return Err(Failure::Verify(format!("closed V-path in layer {}: {cycle}", layer.p)));
    }
    Ok(format!("pairs: {}, unpaired: {unpaired}, cycles: none", m.pair_count()))
}

fn cmd_basis(cfg: &RunConfig) -> Outcome {
    let (n, k) = (cfg.n.unwrap(), cfg.k.unwrap());
    if cfg.certify && n > ORACLE_MAX && !cfg.force {
        return Err(usage(format!("--certify above n = {ORACLE_MAX} needs --force")));
    }
    let t = table(n)?;
    let cx = ChainComplex::new(&t).map_err(|e| Failure::Verify(e.to_string()))?;
    let full = build_matching(&t).map_err(|e| Failure::Verify(e.to_string()))?;
    let spec = build_subcomplex(&t, &full, k).map_err(|e| Failure::Verify(e.to_string()))?;
    let basis = homology_basis(&spec, &cx).map_err(|e| Failure::Verify(e.to_string()))?;

    let mut out = cfg.sink()?;
    match cfg.format {
        Format::Jsonl => {
            for record in basis.records(&t) {
                writeln!(out, "{record}")?;
            }
        }
        Format::Csv => {
            writeln!(out, "bface,face,coeff")?;
            for (&b, chain) in basis.faces.iter().zip(&basis.chains) {
                for (id, c) in chain.terms() {
                    writeln!(out, "{},{},{c}", t.face(b), t.face(id))?;
                }
            }
        }
    }
    out.flush()?;

    let want = betti_eq12(n, k);
    if BigUint::from(basis.len()) != want {
        return Err(Failure::Verify(format!("{} chains, expected {want}", basis.len())));
    }
    let mut summary = format!("{}: chains: {}", spec.label(), basis.len());
    if cfg.certify {
        let verdict = class_independence(&basis.chains, &cx, &spec.members, k as i32 - 1)
            .map_err(|e| Failure::Verify(e.to_string()))?;
        info!("{verdict:?}");
        summary.push_str(&format!(", independent and generating: {}", verdict.is_basis()));
        if !verdict.is_basis() {
            return Err(Failure::Verify(summary));
        }
    }
    Ok(summary)
}

fn betti_rows(cfg: &RunConfig, n: usize) -> Result<Vec<BettiRow>, Failure> {
    let top = if cfg.include_k_eq_n { n } else { n - 1 };
    let ks: Vec<usize> = match cfg.k {
        Some(k) => vec![k],
        None => (3..=top).collect(),
    };
    let need_table = n <= UNMATCHED_MAX || (cfg.oracle && (n <= ORACLE_MAX || cfg.force));
    let t = if need_table { Some(table(n)?) } else { None };
    let full = match (&t, n <= UNMATCHED_MAX) {
        (Some(t), true) => Some(build_matching(t).map_err(|e| Failure::Verify(e.to_string()))?),
        _ => None,
    };
    let cx = match (&t, cfg.oracle && (n <= ORACLE_MAX || cfg.force)) {
        (Some(t), true) => Some(ChainComplex::new(t).map_err(|e| Failure::Verify(e.to_string()))?),
        _ => None,
    };
    let mut rows = Vec::new();
    for k in ks {
        let unmatched = match (&t, &full) {
            (Some(t), Some(full)) if k < n => {
                let spec = build_subcomplex(t, full, k).map_err(|e| Failure::Verify(e.to_string()))?;
                Some(spec.unmatched.len())
            }
            _ => None,
        };
        let oracle = match (&t, &cx) {
            (Some(t), Some(cx)) => {
                let report = homology_report(cx, &subcomplex_members(t, k), true, "")
                    .map_err(|e| Failure::Verify(e.to_string()))?;
                if report.support().iter().any(|&d| d != k as i32 - 1) || !report.is_torsion_free() {
                    return Err(Failure::Verify(format!(
                        "C_{{{n},{k}}} homology is not free and concentrated in degree {}",
                        k - 1
                    )));
                }
                Some(report.betti(k as i32 - 1))
            }
            _ => None,
        };
        rows.push(BettiRow {
            n,
            k,
            eq11: betti_eq11(n, k),
            eq12: betti_eq12(n, k),
            unmatched,
            oracle,
        });
    }
    Ok(rows)
}

fn number(v: &BigUint) -> Value {
    u64::try_from(v).map_or_else(|_| Value::String(v.to_string()), |x| json!(x))
}

fn cmd_betti(cfg: &RunConfig) -> Outcome {
    let ns: Vec<usize> = match cfg.n {
        Some(n) => vec![n],
        None => (4..=cfg.n_max).collect(),
    };
    if cfg.oracle && !cfg.force && ns.iter().any(|&n| n > ORACLE_MAX) {
        warn!("oracle column left blank above n = {ORACLE_MAX}; pass --force to fill it");
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| usage(e.to_string()))?;
    let per_n: Vec<Result<Vec<BettiRow>, Failure>> =
        pool.install(|| ns.par_iter().map(|&n| betti_rows(cfg, n)).collect());
    let mut rows = Vec::new();
    for r in per_n {
        rows.extend(r?);
    }

    let mut out = cfg.sink()?;
    match cfg.format {
        Format::Csv => {
            writeln!(out, "{}", BettiRow::CSV_HEADER)?;
            for row in &rows {
                writeln!(out, "{}", row.to_csv())?;
            }
        }
        Format::Jsonl => {
            for row in &rows {
                let record = json!({
                    "n": row.n,
                    "k": row.k,
                    "eq11": number(&row.eq11),
                    "eq12": number(&row.eq12),
                    "unmatched_count": row.unmatched,
                    "oracle_rank": row.oracle,
                });
                writeln!(out, "{record}")?;
            }
        }
    }
    out.flush()?;

    if let Some(row) = rows.iter().find(|r| !r.consistent()) {
        return Err(Failure::Verify(format!("columns disagree at n={}, k={}", row.n, row.k)));
    }
    Ok(format!("rows: {}, all columns agree", rows.len()))
}

fn run(cfg: &RunConfig) -> Outcome {
    match cfg.command {
        Command::Enum => cmd_enum(cfg),
        Command::Match => cmd_match(cfg),
        Command::Basis => cmd_basis(cfg),
        Command::Betti => cmd_betti(cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match (cli.quiet, cli.verbose) {
        (true, _) => log::LevelFilter::Error,
        (false, 0) => log::LevelFilter::Warn,
        (false, 1) => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).init();

    let outcome = RunConfig::from_cli(cli).and_then(|cfg| run(&cfg));
    match outcome {
        Ok(summary) => {
            println!("RESULT pass {summary}");
            ExitCode::SUCCESS
        }
        Err(Failure::Verify(msg)) => {
            println!("RESULT fail {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            println!("RESULT fail io error");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
