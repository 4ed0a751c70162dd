//! Command-line front end. `run` parses argv, executes one subcommand and
//! returns the process exit code: 0 for a decided verdict or a report, 2 for
//! Undecided, 1 for usage and resource errors.

use std::io::Write;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::arith::{factorize, Instance};
use crate::cascade::{decide, DecideOptions};
use crate::error::{Error, Result};
use crate::global::{decide_star0, decide_star0_tilde};
use crate::local::{everywhere_locally_solvable, local_solvable_at, LocalVerdict};
use crate::oracle::{search_primitive, PointFilter, SearchBound};
use crate::qforms::{class_group, Discriminant, QForm};
use crate::stats::{kappa1, kappa2, sweep, write_csv, ConstantEnclosure, SweepMode, SweepResult};
use crate::verdict::{Status, Verdict};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Parser)]
#[command(name = "gfe", version, about = "Primitive solutions of x^2 + B y^2 = C z^n", allow_negative_numbers = true)]
struct Cli {
    /// Emit a JSON envelope instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Worker threads for parallel sections (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Args)]
struct Coeffs {
    #[arg(allow_negative_numbers = true)]
    b: i128,
    #[arg(allow_negative_numbers = true)]
    c: i128,
    /// Odd exponent n >= 3.
    #[arg(long, default_value_t = 3)]
    n: u32,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Run the full decision procedure.
    Solve {
        #[command(flatten)]
        co: Coeffs,
        /// Record every cascade leaf with its trail.
        #[arg(long)]
        trace: bool,
        /// Search bound on |z|.
        #[arg(long, default_value_t = 200)]
        bound: i128,
        /// Search bound on |y|.
        #[arg(long, default_value_t = 100_000)]
        ymax: i128,
        /// Skip the witness search when the criterion already decides.
        #[arg(long)]
        no_witness: bool,
    },
    /// Local solubility at every prime.
    Local {
        #[command(flatten)]
        co: Coeffs,
    },
    /// Class group criterion for a base case.
    Global {
        #[command(flatten)]
        co: Coeffs,
        /// Use the odd-x odd-fy condition at 2.
        #[arg(long)]
        tilde: bool,
        /// Modulus M of the allowed factor.
        #[arg(long, default_value_t = 1)]
        m: i128,
    },
    /// Brute-force search for primitive solutions.
    Oracle {
        #[command(flatten)]
        co: Coeffs,
        #[arg(long, default_value_t = 50)]
        zmax: i128,
        #[arg(long, default_value_t = 100_000)]
        ymax: i128,
        /// Point filter: comma-separated items star0:P, tilde0, y:P (p does
        /// not divide y), z:P, f:F, b0:B0.
        #[arg(long)]
        filter: Option<String>,
        /// With --json, write one hit per line instead of an envelope.
        #[arg(long)]
        lines: bool,
    },
    /// Class group of a discriminant.
    Classgroup {
        #[arg(allow_negative_numbers = true)]
        d: i128,
    },
    /// Counting experiments and constants.
    Stats {
        #[command(subcommand)]
        cmd: StatsCmd,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Local,
    Global,
}

#[derive(Debug, Subcommand)]
enum StatsCmd {
    /// Count pairs with 0 < |B|, |C| < T.
    Sweep {
        #[arg(long, default_value_t = 3)]
        n: u32,
        #[arg(long = "T")]
        t: u32,
        #[arg(long, value_enum, default_value_t = ModeArg::Local)]
        mode: ModeArg,
        /// CSV output file.
        #[arg(long)]
        out: Option<std::path::PathBuf>,
        #[arg(long, default_value_t = 200)]
        zmax: i128,
        #[arg(long, default_value_t = 100_000)]
        ymax: i128,
    },
    /// Certified enclosures of kappa1 and kappa2.
    Constants {
        #[arg(long = "X", default_value_t = 50_000)]
        x: u64,
    },
}

/// Parses a `--filter` value.
pub fn parse_filter(s: &str, inst: &Instance) -> Result<PointFilter> {
    let split = crate::arith::squarefree_split(inst.b)?;
    let mut f = PointFilter { f: split.f, b0: split.b0, ..Default::default() };
    let num = |v: &str| -> Result<i128> {
        v.parse().map_err(|_| Error::InvalidInput(format!("filter value {v:?} is not an integer")))
    };
    for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        match item.split_once(':') {
            None if item == "tilde0" => f.tilde0_2 = true,
            Some(("star0", v)) => f.star0.push(num(v)?),
            Some(("y", v)) => f.y_coprime.push(num(v)?),
            Some(("z", v)) => f.z_coprime.push(num(v)?),
            Some(("f", v)) => f.f = num(v)?,
            Some(("b0", v)) => f.b0 = num(v)?,
            _ => return Err(Error::InvalidInput(format!("unknown filter item {item:?}"))),
        }
    }
    Ok(f)
}

/// Rewrites every JSON integer as a decimal string.
pub fn stringify_integers(v: Value) -> Value {
    match v {
        Value::Number(n) => {
            let s = n.to_string();
            if s.bytes().all(|b| b.is_ascii_digit() || b == b'-') {
                Value::String(s)
            } else {
                Value::Number(n)
            }
        }
        Value::Array(a) => Value::Array(a.into_iter().map(stringify_integers).collect()),
        Value::Object(o) => Value::Object(o.into_iter().map(|(k, v)| (k, stringify_integers(v))).collect()),
        other => other,
    }
}

fn to_value<T: Serialize>(t: &T) -> Result<Value> {
    serde_json::to_value(t).map(stringify_integers).map_err(|e| Error::Internal(format!("json: {e}")))
}

struct Outcome {
    command: &'static str,
    input: Value,
    result: Value,
    text: String,
    code: i32,
}

fn verdict_code(v: &Verdict) -> i32 {
    if v.status == Status::Undecided {
        2
    } else {
        0
    }
}

fn status_str(s: Status) -> &'static str {
    match s {
        Status::Solvable => "solvable",
        Status::Unsolvable => "unsolvable",
        Status::Undecided => "undecided",
    }
}

fn verdict_text(inst: &Instance, v: &Verdict) -> String {
    let mut s = format!("{inst}\nstatus:  {}\nreason:  {}\n", status_str(v.status), v.reason);
    if let Some((x, y, z)) = v.witness {
        s += &format!("witness: ({x}, {y}, {z})\n");
    }
    if let Some(p) = v.excluded_prime {
        s += &format!("excluded at p = {p}\n");
    }
    if let Some(lf) = &v.local_failure {
        s += &format!("local failure at p = {} ({})\n", lf.p, lf.case_label);
    }
    for node in &v.open_nodes {
        s += &format!("open node: B' = {}, C' = {}, y avoids {:?}\n", node.bp, node.cp, node.y_coprime);
    }
    if let Some(c) = &v.certificate {
        s += &format!(
            "order:   {} (D = {}), Cl = {:?}, membership {}\n",
            c.order.ring(),
            c.order.disc.value(),
            c.class_group.elementary_divisors,
            c.membership
        );
    }
    for r in &v.nodes {
        s += &format!("leaf ({}, {}): {} ({})\n", r.node.bp, r.node.cp, status_str(r.status), r.reason);
    }
    s
}

fn coeff_input(co: &Coeffs) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("B".into(), co.b.to_string().into());
    m.insert("C".into(), co.c.to_string().into());
    m.insert("n".into(), co.n.to_string().into());
    m
}

fn solve(co: &Coeffs, trace: bool, bound: i128, ymax: i128, no_witness: bool) -> Result<Outcome> {
    let inst = Instance::new(co.b, co.c, co.n)?;
    let opts = DecideOptions { bound: SearchBound::new(bound, ymax)?, want_witness: !no_witness, trace };
    let v = decide(co.b, co.c, co.n, &opts)?;
    let mut input = coeff_input(co);
    input.insert("bound".into(), bound.to_string().into());
    input.insert("ymax".into(), ymax.to_string().into());
    Ok(Outcome { command: "solve", input: input.into(), result: to_value(&v)?, text: verdict_text(&inst, &v), code: verdict_code(&v) })
}

#[derive(Serialize)]
struct LocalReport {
    solvable: bool,
    failure: Option<LocalVerdict>,
    primes: Vec<LocalVerdict>,
}

fn local(co: &Coeffs) -> Result<Outcome> {
    let inst = Instance::new(co.b, co.c, co.n)?;
    let (ok, failure) = everywhere_locally_solvable(&inst)?;
    let mut ps: Vec<i128> = vec![2];
    ps.extend(factorize(co.b)?.primes());
    ps.extend(factorize(co.c)?.primes());
    ps.sort();
    ps.dedup();
    let primes: Vec<LocalVerdict> = ps.iter().map(|&p| local_solvable_at(&inst, p)).collect();
    let mut text = format!("{inst}\n  p  k  l  soluble  case\n");
    for v in &primes {
        text += &format!("  {}  {}  {}  {}  {}\n", v.p, v.k, v.ell, v.solvable, v.case_label);
    }
    text += &format!("everywhere locally soluble: {ok}\n");
    let rep = LocalReport { solvable: ok, failure, primes };
    Ok(Outcome { command: "local", input: coeff_input(co).into(), result: to_value(&rep)?, text, code: 0 })
}

fn global(co: &Coeffs, tilde: bool, m: i128) -> Result<Outcome> {
    let inst = Instance::new(co.b, co.c, co.n)?;
    let v = if tilde { decide_star0_tilde(co.b, co.c, co.n, m)? } else { decide_star0(co.b, co.c, co.n, m)? };
    let mut input = coeff_input(co);
    input.insert("tilde".into(), tilde.into());
    input.insert("M".into(), m.to_string().into());
    Ok(Outcome { command: "global", input: input.into(), result: to_value(&v)?, text: verdict_text(&inst, &v), code: verdict_code(&v) })
}

fn oracle(co: &Coeffs, zmax: i128, ymax: i128, filter: Option<&str>) -> Result<(Outcome, Vec<Value>)> {
    let inst = Instance::new(co.b, co.c, co.n)?;
    let mut bound = SearchBound::new(zmax, ymax)?;
    if let Some(f) = filter {
        bound = bound.with_filter(parse_filter(f, &inst)?);
    }
    let hits = search_primitive(&inst, &bound)?;
    let mut text = format!("{inst}: {} primitive solutions with |z| <= {zmax}, |y| <= {ymax}\n", hits.len());
    for (x, y, z) in &hits {
        text += &format!("  ({x}, {y}, {z})\n");
    }
    let rows: Vec<Value> = hits.iter().map(|(x, y, z)| json!([x.to_string(), y.to_string(), z.to_string()])).collect();
    let mut input = coeff_input(co);
    input.insert("zmax".into(), zmax.to_string().into());
    input.insert("ymax".into(), ymax.to_string().into());
    input.insert("filter".into(), filter.map(Value::from).unwrap_or(Value::Null));
    let result = json!({ "count": hits.len().to_string(), "hits": rows });
    Ok((Outcome { command: "oracle", input: input.into(), result, text, code: 0 }, rows))
}

#[derive(Serialize)]
struct ClassGroupReport {
    disc: i128,
    class_number: usize,
    elementary_divisors: Vec<i64>,
    generators: Vec<QForm>,
    reduced_forms: Vec<QForm>,
}

fn classgroup(d: i128) -> Result<Outcome> {
    let cg = class_group(Discriminant::new(d)?)?;
    let rep = ClassGroupReport {
        disc: d,
        class_number: cg.order(),
        elementary_divisors: cg.elementary_divisors.clone(),
        generators: cg.generators.clone(),
        reduced_forms: cg.reduced_forms(),
    };
    let mut text = format!("D = {d}\nclass number: {}\nstructure: {:?}\ngenerators:", rep.class_number, rep.elementary_divisors);
    for g in &rep.generators {
        text += &format!(" {g}");
    }
    text += &format!("\nreduced forms: {}\n", rep.reduced_forms.len());
    Ok(Outcome { command: "classgroup", input: json!({ "D": d.to_string() }), result: to_value(&rep)?, text, code: 0 })
}

fn sweep_cmd(n: u32, t: u32, mode: ModeArg, out: Option<&std::path::Path>, zmax: i128, ymax: i128) -> Result<Outcome> {
    let mode = match mode {
        ModeArg::Local => SweepMode::Local,
        ModeArg::Global => SweepMode::Global,
    };
    let opts = DecideOptions { bound: SearchBound::new(zmax, ymax)?, want_witness: false, trace: false };
    let mut rows = Vec::new();
    let r: SweepResult = sweep(n, t, mode, &opts, out.map(|_| &mut rows))?;
    if let Some(path) = out {
        let f = std::fs::File::create(path).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
        write_csv(&rows, std::io::BufWriter::new(f))?;
    }
    let mut text = format!("n = {n}, T = {t}, pairs = {}, locally soluble = {}\n", r.total_pairs, r.locally_soluble);
    if let (Some(a), Some(b), Some(c)) = (r.decided_solvable, r.decided_unsolvable, r.undecided) {
        text += &format!("solvable = {a}, unsolvable = {b}, undecided = {c}\n");
    }
    let input = json!({
        "n": n.to_string(),
        "T": t.to_string(),
        "mode": format!("{mode:?}").to_lowercase(),
        "out": out.map(|p| p.display().to_string()),
    });
    Ok(Outcome { command: "stats sweep", input, result: to_value(&r)?, text, code: 0 })
}

fn enclosure_value(e: &ConstantEnclosure) -> Result<Value> {
    let mut v = to_value(e)?;
    let (lo, hi) = e.decimal(12);
    v["lower_decimal"] = lo.into();
    v["upper_decimal"] = hi.into();
    Ok(v)
}

fn constants(x: u64) -> Result<Outcome> {
    let k1 = kappa1(x)?;
    let k2 = kappa2(x)?;
    let mut text = String::new();
    for e in [&k1, &k2] {
        let (lo, hi) = e.decimal(10);
        text += &format!("{} in [{lo}, {hi}] (X = {x})\n", e.name);
    }
    let result = json!({ "kappa1": enclosure_value(&k1)?, "kappa2": enclosure_value(&k2)? });
    Ok(Outcome { command: "stats constants", input: json!({ "X": x.to_string() }), result, text, code: 0 })
}

fn write_out(out: &mut dyn Write, s: &str) {
    // a closed pipe is not worth a panic
    let _ = out.write_all(s.as_bytes());
}

/// Runs one command with output to the given streams.
pub fn run_with<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let msg = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    write_out(out, &msg);
                    0
                }
                _ => {
                    write_out(err, &msg);
                    1
                }
            };
        }
    };
    if let Some(t) = cli.threads {
        if t == 0 {
            write_out(err, "error: --threads must be positive\n");
            return 1;
        }
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let start = Instant::now();
    let mut lines: Option<Vec<Value>> = None;
    let res = match &cli.cmd {
        Cmd::Solve { co, trace, bound, ymax, no_witness } => solve(co, *trace, *bound, *ymax, *no_witness),
        Cmd::Local { co } => local(co),
        Cmd::Global { co, tilde, m } => global(co, *tilde, *m),
        Cmd::Oracle { co, zmax, ymax, filter, lines: as_lines } => oracle(co, *zmax, *ymax, filter.as_deref()).map(|(o, rows)| {
            if *as_lines {
                lines = Some(rows);
            }
            o
        }),
        Cmd::Classgroup { d } => classgroup(*d),
        Cmd::Stats { cmd: StatsCmd::Sweep { n, t, mode, out: path, zmax, ymax } } => {
            sweep_cmd(*n, *t, *mode, path.as_deref(), *zmax, *ymax)
        }
        Cmd::Stats { cmd: StatsCmd::Constants { x } } => constants(*x),
    };
    let o = match res {
        Ok(o) => o,
        Err(e) => {
            if cli.json {
                let env = json!({ "schema_version": SCHEMA_VERSION, "error": e.to_string() });
                write_out(out, &format!("{env}\n"));
            }
            write_out(err, &format!("error: {e}\n"));
            return 1;
        }
    };
    if cli.json {
        if let Some(rows) = lines {
            for r in rows {
                write_out(out, &format!("{r}\n"));
            }
        } else {
            let env = json!({
                "schema_version": SCHEMA_VERSION,
                "command": o.command,
                "input": o.input,
                "result": o.result,
                "timings": { "elapsed_ms": start.elapsed().as_secs_f64() * 1e3 },
            });
            write_out(out, &format!("{env}\n"));
        }
    } else {
        write_out(out, &o.text);
    }
    o.code
}

/// Runs one command against the process streams.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    run_with(argv, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}
