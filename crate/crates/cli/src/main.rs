use std::fs;
use std::io::{self, Write};
use std::ops::RangeInclusive;
use std::path::PathBuf;
use std::process::ExitCode;

use atomnet::network::{expand, parse_h, AtomicNetworkSpec, ExpandedGraph};
use atomnet::packing::{packing_count_bins, packing_count_formula, packing_count_oracle, DEFAULT_ORACLE_CAP};
use atomnet::scheme::{verify_transcript, SweepLevel, DEFAULT_PAYLOAD_LEN, DEFAULT_SWEEP_CAP};
use atomnet::{bounds_report, build_schedule, rate_lower, BoundsReport, Error, Field, Rate, SchemeParams, SweepMode};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

const SWEEP_CAP_VAR: &str = "ATOMNET_SWEEP_CAP";

#[derive(Parser)]
#[command(name = "atomnet", version, about = "Secrecy bounds and secure transmission on 1-2-1 atomic networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// New and baseline secrecy-rate bounds for one (h, M, K).
    Bounds {
        #[arg(long, value_parser = parse_h_arg)]
        h: HArg,
        #[arg(long = "M")]
        m: Option<usize>,
        #[arg(long = "K")]
        k: usize,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Bounds over a grid of M and K values, one CSV row per (M, K).
    Sweep {
        #[arg(long, value_parser = parse_h_arg)]
        h: HArg,
        #[arg(long = "M", value_parser = parse_range)]
        m: RangeInclusive<usize>,
        #[arg(long = "K", value_parser = parse_range)]
        k: RangeInclusive<usize>,
    },
    /// Round schedule of vertex-disjoint path groups as JSON.
    Schedule {
        #[arg(long, value_parser = parse_h_arg)]
        h: HArg,
        #[arg(long = "M")]
        m: Option<usize>,
        /// Number of decreasing-size rounds; defaults to c* for --K.
        #[arg(long)]
        c: Option<usize>,
        #[arg(long = "K", default_value_t = 0)]
        k: usize,
    },
    /// Run the keyed scheme and write its transcript.
    Simulate {
        #[arg(long, value_parser = parse_h_arg)]
        h: HArg,
        #[arg(long = "M")]
        m: Option<usize>,
        #[arg(long = "K")]
        k: usize,
        #[arg(long)]
        c: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "gf257", value_parser = parse_field)]
        field: Field,
        #[arg(long, default_value_t = DEFAULT_PAYLOAD_LEN)]
        payload_len: usize,
        #[arg(long, default_value = "transcript.json")]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Check a transcript against every eavesdropper set of K edges.
    Verify {
        #[arg(long)]
        transcript: PathBuf,
        /// Eavesdropper budget; defaults to the K the transcript was built for.
        #[arg(long = "K")]
        k: Option<usize>,
        /// Enumerate edge sets even when a path-level sweep would suffice.
        #[arg(long)]
        exhaustive: bool,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Compare the three path-packing counts for one group size.
    Oracle {
        #[arg(long, value_parser = parse_h_arg)]
        h: HArg,
        #[arg(long)]
        ell: usize,
        /// Largest number of paths the brute-force search accepts.
        #[arg(long, default_value_t = DEFAULT_ORACLE_CAP)]
        cap: usize,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Explicit graph of the network.
    Graph {
        #[arg(long, value_parser = parse_h_arg)]
        h: HArg,
        #[arg(long, value_enum, default_value_t = GraphFormat::Json)]
        format: GraphFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GraphFormat {
    Json,
    Dot,
}

enum Failure {
    Verification(String),
    Usage(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Verification(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Io(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Verification(m) | Failure::Usage(m) | Failure::Io(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

/// Comma-separated `h`, kept as one clap value.
#[derive(Clone)]
struct HArg(Vec<usize>);

fn parse_h_arg(s: &str) -> Result<HArg, String> {
    parse_h(s).map(HArg).map_err(|e| e.to_string())
}

fn parse_field(s: &str) -> Result<Field, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// `"3"`, `"1..4"` (inclusive) or `"1..=4"`.
fn parse_range(s: &str) -> Result<RangeInclusive<usize>, String> {
    let num = |x: &str| x.trim().parse::<usize>().map_err(|e| format!("bad range bound {x:?}: {e}"));
    let (lo, hi) = match s.split_once("..") {
        Some((lo, hi)) => (num(lo)?, num(hi.strip_prefix('=').unwrap_or(hi))?),
        None => {
            let v = num(s)?;
            (v, v)
        }
    };
    if lo > hi {
        return Err(format!("empty range {s:?}"));
    }
    Ok(lo..=hi)
}

fn make_spec(h: &[usize], m: Option<usize>) -> Result<AtomicNetworkSpec, Failure> {
    Ok(AtomicNetworkSpec::new(h.to_vec(), m.unwrap_or(h.len()))?)
}

fn sweep_cap() -> Result<u128, Failure> {
    match std::env::var(SWEEP_CAP_VAR) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::Usage(format!("{SWEEP_CAP_VAR} must be a non-negative integer, got {v:?}"))),
        Err(_) => Ok(DEFAULT_SWEEP_CAP),
    }
}

fn decimal(r: Rate) -> String {
    format!("{:.6}", r.to_f64())
}

fn rate_json(r: Rate) -> serde_json::Value {
    json!({ "fraction": r.to_string(), "decimal": r.to_f64() })
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

const CSV_HEADER: [&str; 14] = [
    "h",
    "M",
    "K",
    "c_star",
    "lower_new",
    "lower_new_decimal",
    "upper_new",
    "upper_new_decimal",
    "lower_baseline",
    "lower_baseline_decimal",
    "upper_baseline",
    "upper_baseline_decimal",
    "matched",
    "k_vector",
];

fn csv_row(r: &BoundsReport) -> Vec<String> {
    let lo = r.lower_new.rate;
    let up = r.upper_new.rate;
    vec![
        join(&r.h),
        r.m.to_string(),
        r.k.to_string(),
        r.lower_new.c_star.to_string(),
        lo.to_string(),
        decimal(lo),
        up.to_string(),
        decimal(up),
        r.lower_baseline.to_string(),
        decimal(r.lower_baseline),
        r.upper_baseline.to_string(),
        decimal(r.upper_baseline),
        r.matched().to_string(),
        join(&r.upper_new.k_vector),
    ]
}

fn write_csv(rows: &[BoundsReport]) -> CmdResult {
    let mut w = csv::Writer::from_writer(io::stdout().lock());
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record(csv_row(r))?;
    }
    w.flush()?;
    Ok(())
}

fn bounds_json(r: &BoundsReport) -> serde_json::Value {
    json!({
        "h": r.h,
        "M": r.m,
        "K": r.k,
        "lower_new": {
            "rate": rate_json(r.lower_new.rate),
            "c_star": r.lower_new.c_star,
            "per_c": r.lower_new.per_c.iter().map(|&x| rate_json(x)).collect::<Vec<_>>(),
        },
        "upper_new": {
            "rate": rate_json(r.upper_new.rate),
            "k_vector": r.upper_new.k_vector,
            "k_exceeds_edges": r.upper_new.k_exceeds_edges,
        },
        "lower_baseline": rate_json(r.lower_baseline),
        "upper_baseline": rate_json(r.upper_baseline),
        "matched": r.matched(),
        "capacity": r.capacity.map(rate_json),
    })
}

fn print_json<T: Serialize>(v: &T) -> CmdResult {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, v).map_err(|e| Failure::Io(e.to_string()))?;
    writeln!(out)?;
    Ok(())
}

fn cmd_bounds(h: &[usize], m: Option<usize>, k: usize, format: Format) -> CmdResult {
    let spec = make_spec(h, m)?;
    let r = bounds_report(&spec, k);
    match format {
        Format::Json => print_json(&bounds_json(&r)),
        Format::Csv => write_csv(std::slice::from_ref(&r)),
        Format::Table => {
            let line = |name: &str, rate: Rate, extra: String| {
                println!("{name:<16} {:>8}  {:>10}  {extra}", rate.to_string(), decimal(rate));
            };
            println!("h = [{}]  M = {}  K = {}", join(spec.h()), spec.m(), k);
            line("lower_new", r.lower_new.rate, format!("c* = {}", r.lower_new.c_star));
            line("upper_new", r.upper_new.rate, format!("K_i = [{}]", join(&r.upper_new.k_vector)));
            line("lower_baseline", r.lower_baseline, String::new());
            line("upper_baseline", r.upper_baseline, String::new());
            match r.capacity {
                Some(c) => println!("matched          capacity = {c} ({})", decimal(c)),
                None => println!("not matched"),
            }
            Ok(())
        }
    }
}

fn cmd_sweep(h: &[usize], ms: RangeInclusive<usize>, ks: RangeInclusive<usize>) -> CmdResult {
    let mut rows = Vec::new();
    for m in ms {
        let spec = make_spec(h, Some(m))?;
        for k in ks.clone() {
            rows.push(bounds_report(&spec, k));
        }
    }
    rows.sort_by_key(|r| (r.m, r.k));
    write_csv(&rows)
}

fn cmd_schedule(h: &[usize], m: Option<usize>, c: Option<usize>, k: usize) -> CmdResult {
    let spec = make_spec(h, m)?;
    let c = c.unwrap_or_else(|| rate_lower(&spec, k).c_star);
    let schedule = build_schedule(&spec, c)?;
    let graph = expand(&spec);
    let rounds: Vec<_> = schedule
        .rounds
        .iter()
        .map(|round| {
            json!({
                "eta": round.eta,
                "group_size": round.group_size,
                "groups": round.groups.iter().map(|g| {
                    g.iter().map(|&p| path_json(&graph, p)).collect::<Vec<_>>()
                }).collect::<Vec<_>>(),
            })
        })
        .collect();
    print_json(&json!({
        "h": spec.h(),
        "M": spec.m(),
        "m_hat": schedule.m_hat,
        "c": schedule.c,
        "round_sizes": schedule.round_sizes(),
        "network_uses": schedule.network_uses(),
        "scheduled_paths": schedule.scheduled_paths(),
        "rounds": rounds,
    }))
}

fn path_json(graph: &ExpandedGraph, p: atomnet::PathId) -> serde_json::Value {
    json!({ "subgraph": p.subgraph, "branch": p.branch, "label": graph.path_label(p) })
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    h: &[usize],
    m: Option<usize>,
    k: usize,
    c: Option<usize>,
    seed: u64,
    field: Field,
    payload_len: usize,
    out: &PathBuf,
    format: Format,
) -> CmdResult {
    let spec = make_spec(h, m)?;
    let c = c.unwrap_or_else(|| rate_lower(&spec, k).c_star);
    let mut params = SchemeParams::new(k, c, seed);
    params.field = field;
    params.payload_len = payload_len;
    let t = atomnet::run_scheme(&spec, &params)?;
    fs::write(out, t.to_json()).map_err(|e| Failure::Io(format!("{}: {e}", out.display())))?;
    let decoded = t.destination_decode().map(|w| w == t.coding.w).unwrap_or(false);
    let rate = atomnet::scheme::empirical_rate(&t);
    match format {
        Format::Json | Format::Csv => print_json(&json!({
            "transcript": out.display().to_string(),
            "c": c,
            "seed": seed,
            "field": field.to_string(),
            "packets": t.packet_count(),
            "messages": t.message_count(),
            "network_uses": t.network_uses(),
            "rate": rate_json(rate),
            "decode_ok": decoded,
            "notes": t.notes,
        }))?,
        Format::Table => {
            println!("transcript   {}", out.display());
            println!("c            {c}");
            println!("seed         {seed}");
            println!("field        {field}");
            println!("packets      {} ({} keys, {} messages)", t.packet_count(), t.key_count(), t.message_count());
            println!("network uses {}", t.network_uses());
            println!("rate         {rate} ({})", decimal(rate));
            println!("decode       {}", if decoded { "OK" } else { "FAILED" });
            for n in &t.notes {
                println!("note         {n}");
            }
        }
    }
    if decoded {
        Ok(())
    } else {
        Err(Failure::Verification("destination failed to decode".into()))
    }
}

fn cmd_verify(path: &PathBuf, k: Option<usize>, exhaustive: bool, format: Format) -> CmdResult {
    let text = fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    let t = atomnet::Transcript::from_json(&text)?;
    let k = k.unwrap_or(t.k);
    let mode = if exhaustive { SweepMode::Exhaustive } else { SweepMode::Auto };
    let cap = sweep_cap()?;
    let cap_hint = |e: Error| match e {
        Error::SweepCapExceeded { .. } => Failure::Usage(format!("{e}; raise {SWEEP_CAP_VAR} or drop --exhaustive")),
        other => other.into(),
    };
    let report = verify_transcript(&t, k, mode, cap).map_err(cap_hint)?;
    let worst = &report.sweep.worst;
    let worst_z: Vec<String> = worst.adversary_set.iter().map(|e| e.to_string()).collect();
    match format {
        Format::Json | Format::Csv => print_json(&json!({
            "K": k,
            "passed": report.passed(),
            "secure": report.sweep.secure,
            "decoded": report.decoded,
            "issues": report.issues,
            "rate": rate_json(report.rate),
            "network_uses": report.network_uses,
            "sweep": report.sweep,
        }))?,
        Format::Table => {
            let level = match report.sweep.level {
                SweepLevel::Edge => "edge",
                SweepLevel::Path => "path",
            };
            println!("K            {k}");
            println!(
                "sweep        {} {level}-level sets of size {} ({} distinct observations)",
                report.sweep.sets_checked, report.sweep.budget, report.sweep.distinct_observations
            );
            println!("max leakage  {} symbol(s)", worst.leaked_symbols);
            println!("decode       {}", if report.decoded { "OK" } else { "FAILED" });
            println!("rate         {} ({}) over {} uses", report.rate, decimal(report.rate), report.network_uses);
            for issue in &report.issues {
                println!("issue        {issue}");
            }
            println!("{}", if report.passed() { "SECURE" } else { "INSECURE" });
            if !report.sweep.secure {
                println!("worst Z      {{{}}}", worst_z.join(", "));
            }
        }
    }
    if report.passed() {
        Ok(())
    } else if !report.sweep.secure {
        Err(Failure::Verification(format!(
            "leakage of {} symbol(s) at Z = {{{}}}",
            worst.leaked_symbols,
            worst_z.join(", ")
        )))
    } else {
        Err(Failure::Verification("transcript failed structural or decoding checks".into()))
    }
}

fn cmd_oracle(h: &[usize], ell: usize, cap: usize, format: Format) -> CmdResult {
    let spec = make_spec(h, None)?;
    let formula = packing_count_formula(spec.h(), ell)?;
    let bins = packing_count_bins(spec.h(), ell)?;
    let oracle = packing_count_oracle(&expand(&spec), ell, cap)?;
    let agree = formula == bins && bins == oracle;
    match format {
        Format::Json => print_json(&json!({
            "h": spec.h(), "ell": ell, "formula": formula, "bins": bins, "oracle": oracle, "agree": agree,
        }))?,
        Format::Csv => {
            let mut w = csv::Writer::from_writer(io::stdout().lock());
            w.write_record(["h", "ell", "formula", "bins", "oracle", "agree"])?;
            w.write_record([join(spec.h()), ell.to_string(), formula.to_string(), bins.to_string(), oracle.to_string(), agree.to_string()])?;
            w.flush()?;
        }
        Format::Table => {
            println!("h = [{}]  ell = {ell}", join(spec.h()));
            println!("formula {formula}  bins {bins}  oracle {oracle}  {}", if agree { "agree" } else { "DISAGREE" });
        }
    }
    if agree {
        Ok(())
    } else {
        Err(Failure::Verification(format!("counts disagree: ({formula}, {bins}, {oracle})")))
    }
}

fn cmd_graph(h: &[usize], format: GraphFormat, out: Option<&PathBuf>) -> CmdResult {
    let graph = expand(&make_spec(h, None)?);
    let text = match format {
        GraphFormat::Json => graph.to_json(),
        GraphFormat::Dot => graph.to_dot(),
    };
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Io(format!("{}: {e}", p.display()))),
        None => {
            let mut o = io::stdout().lock();
            writeln!(o, "{text}")?;
            Ok(())
        }
    }
}

fn run(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Bounds { h, m, k, format } => cmd_bounds(&h.0, m, k, format),
        Command::Sweep { h, m, k } => cmd_sweep(&h.0, m, k),
        Command::Schedule { h, m, c, k } => cmd_schedule(&h.0, m, c, k),
        Command::Simulate { h, m, k, c, seed, field, payload_len, out, format } => {
            cmd_simulate(&h.0, m, k, c, seed, field, payload_len, &out, format)
        }
        Command::Verify { transcript, k, exhaustive, format } => cmd_verify(&transcript, k, exhaustive, format),
        Command::Oracle { h, ell, cap, format } => cmd_oracle(&h.0, ell, cap, format),
        Command::Graph { h, format, out } => cmd_graph(&h.0, format, out.as_ref()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("atomnet: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
