use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use syncstr::codec::{codec_demo, DemoConfig};
use syncstr::det::{build_long_distance_with, DetOptions};
use syncstr::ecc::{decode_half_errors, greedy_code, materialize, rs_code, BlockCode, Code};
use syncstr::random::{construct_lll, SamplerParams};
use syncstr::search::{run_search, Checkpoint, SearchConfig};
use syncstr::small_alphabet::{four_letter, morphism_degradation_report, thue_square_free, weak_binary, Morphism, WeakBinaryPlan};
use syncstr::stream::{locate, Stream, StreamConfig};
use syncstr::verify::{self, SampledCheck};
use syncstr::{Error, ExactFraction, SyncString, TextFormat, Verdict};

const SCHEMA: &str = "syncstr.report/1";

#[derive(Parser)]
#[command(name = "syncstr", version, about = "Construct and verify synchronization strings")]
struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, env = "SYNCSTR_SEED", default_value_t = 0)]
    seed: u64,
    /// Layout of emitted string files.
    #[arg(long, global = true, value_enum, default_value_t = Format::Lines)]
    format: Format,
    /// Worker threads (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Compact,
    Lines,
}

impl From<Format> for TextFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Compact => TextFormat::Compact,
            Format::Lines => TextFormat::Lines,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Check a string file against a property.
    Verify(VerifyArgs),
    /// Build a string.
    #[command(subcommand)]
    Construct(Construct),
    /// Build or use block codes.
    #[command(subcommand)]
    Ecc(Ecc),
    /// Random access into the infinite string.
    Stream(StreamArgs),
    /// Exhaustive search for the longest synchronization string over k letters.
    SearchBk(SearchArgs),
    /// Index-coded deletion channel experiments.
    #[command(subcommand)]
    Codec(Codec),
    #[command(subcommand)]
    Report(Report),
}

#[derive(Clone, Copy, ValueEnum)]
enum PropertyArg {
    Sync,
    Weak,
    Circle,
    LongDistance,
    SquareFree,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(value_enum)]
    property: PropertyArg,
    #[arg(long)]
    eps: Option<ExactFraction>,
    /// Long-distance constant.
    #[arg(long)]
    c: Option<ExactFraction>,
    /// Long-distance: check every pair instead of the bounded default classes.
    #[arg(long)]
    exhaustive: bool,
    /// Check this many random triples instead of all of them (sync, long-distance).
    #[arg(long)]
    samples: Option<usize>,
    file: PathBuf,
}

#[derive(Args)]
struct Output {
    /// String file destination; stdout when absent.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Also write the JSON report here.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Construct {
    /// Randomized sampler with resampling of bad intervals.
    Random {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        eps: ExactFraction,
        #[arg(long)]
        c1: Option<ExactFraction>,
        #[arg(long)]
        c2: Option<ExactFraction>,
        /// Default 50 n.
        #[arg(long)]
        max_rounds: Option<usize>,
        #[command(flatten)]
        out: Output,
    },
    /// Code-indexed synchronization circle with the long-distance property.
    Det {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        eps: ExactFraction,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        delta: Option<ExactFraction>,
        #[arg(long)]
        c: Option<ExactFraction>,
        #[command(flatten)]
        out: Output,
    },
    SquareFree {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        out: Output,
    },
    WeakBinary {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        eps_prime: ExactFraction,
        #[command(flatten)]
        out: Output,
    },
    FourLetter {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        eps: ExactFraction,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Subcommand)]
enum Ecc {
    /// Greedy code with relative distance 1 - eps.
    Greedy {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        eps: ExactFraction,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Reed-Solomon code over a prime field, listed explicitly.
    Rs {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        q: u32,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Nearest-codeword decoding; `_` marks an erasure.
    Decode {
        #[arg(long)]
        code: PathBuf,
        /// Comma-separated received symbols.
        #[arg(long)]
        word: String,
    },
}

#[derive(Args)]
struct StreamArgs {
    #[arg(long, default_value = "1/2")]
    eps: ExactFraction,
    #[command(subcommand)]
    op: StreamOp,
}

#[derive(Subcommand)]
enum StreamOp {
    At {
        #[arg(long)]
        pos: u128,
    },
    Window {
        #[arg(long)]
        pos: u128,
        #[arg(long)]
        len: usize,
    },
    Prefix {
        #[arg(long)]
        n: usize,
    },
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long)]
    k: usize,
    #[arg(long)]
    eps: ExactFraction,
    /// Maximum extensions attempted.
    #[arg(long, default_value_t = 1_000_000_000)]
    budget: u64,
    /// Where to save the pending search state if the budget runs out.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Continue from a saved checkpoint.
    #[arg(long)]
    resume: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Codec {
    Demo {
        #[arg(long, default_value_t = 60)]
        n: usize,
        #[arg(long, default_value = "3/4")]
        eps: ExactFraction,
        #[arg(long, default_value = "2/15")]
        delta: ExactFraction,
        #[arg(long, default_value_t = 1000)]
        traces: usize,
        /// Reed-Solomon dimension.
        #[arg(long)]
        dimension: Option<usize>,
        /// Include one line per trace.
        #[arg(long)]
        verbose: bool,
    },
}

#[derive(Subcommand)]
enum Report {
    /// LCS between iterated images of distinct letters under Leech's morphism.
    Morphism {
        #[arg(long, default_value_t = 4)]
        max_m: usize,
    },
}

/// Outcome of a subcommand: the JSON report plus the exit status it implies.
struct Done {
    report: Value,
    code: u8,
}

impl Done {
    fn ok(report: Value) -> Self {
        Done { report, code: 0 }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::GateFailed(_) | Error::DecodeFailure(_) => 1,
        Error::RoundBudgetExhausted { .. } | Error::RetryBudgetExhausted(_) | Error::BudgetExhausted => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global().expect("thread pool configured once");
    }
    match run(&cli) {
        Ok(done) => {
            if !done.report.is_null() {
                println!("{}", serde_json::to_string_pretty(&done.report).unwrap());
            }
            ExitCode::from(done.code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn read_string(path: &PathBuf) -> Result<SyncString, Error> {
    SyncString::parse_text(&fs::read_to_string(path)?)
}

fn need(eps: &Option<ExactFraction>, flag: &str) -> Result<ExactFraction, Error> {
    eps.clone().ok_or_else(|| Error::Parameter(format!("--{flag} is required for this property")))
}

fn verdict_json(v: &Verdict) -> Value {
    serde_json::to_value(v).unwrap()
}

/// Writes the string file (with `# key=value` metadata lines) and the report.
fn emit(s: &SyncString, meta: &Value, out: &Output, format: Format) -> Result<Done, Error> {
    let mut text = String::new();
    if let Value::Object(map) = meta {
        for (k, v) in map {
            if !v.is_object() && !v.is_array() {
                let v = v.as_str().map(str::to_owned).unwrap_or_else(|| v.to_string());
                text.push_str(&format!("# {k}={v}\n"));
            }
        }
    }
    text.push_str(&s.to_text(format.into()));
    let report = json!({ "schema": SCHEMA, "length": s.len(), "alphabet": s.alphabet_size(), "meta": meta });
    if let Some(path) = &out.report {
        fs::write(path, serde_json::to_string_pretty(&report).unwrap())?;
    }
    match &out.output {
        Some(path) => {
            fs::write(path, text)?;
            Ok(Done::ok(report))
        }
        None => {
            print!("{text}");
            Ok(Done::ok(Value::Null))
        }
    }
}

fn run(cli: &Cli) -> Result<Done, Error> {
    match &cli.command {
        Command::Verify(a) => run_verify(a),
        Command::Construct(c) => run_construct(c, cli.seed, cli.format),
        Command::Ecc(e) => run_ecc(e),
        Command::Stream(s) => run_stream(s, cli.seed, cli.format),
        Command::SearchBk(s) => run_search_cmd(s),
        Command::Codec(Codec::Demo { n, eps, delta, traces, dimension, verbose }) => {
            let cfg = DemoConfig { n: *n, eps: eps.clone(), delta: delta.clone(), traces: *traces, seed: cli.seed, dimension: *dimension };
            let mut rep = codec_demo(&cfg)?;
            let failed = rep.successes != rep.traces;
            if !verbose {
                rep.results.clear();
            }
            let mut report = serde_json::to_value(&rep).unwrap();
            report["schema"] = json!(SCHEMA);
            report["success_rate"] = json!(format!("{}/{}", rep.successes, rep.traces));
            Ok(Done { report, code: if failed { 1 } else { 0 } })
        }
        Command::Report(Report::Morphism { max_m }) => {
            let rows = morphism_degradation_report(&Morphism::leech(), *max_m)?;
            let increasing = rows.windows(2).all(|w| w[0].ratio.as_big() < w[1].ratio.as_big());
            Ok(Done::ok(json!({ "schema": SCHEMA, "morphism": "leech-13", "rows": rows, "strictly_increasing": increasing })))
        }
    }
}

fn run_verify(a: &VerifyArgs) -> Result<Done, Error> {
    let s = read_string(&a.file)?;
    let sampled = a.samples.map(|samples| SampledCheck { samples, ..SampledCheck::default() });
    let (name, verdict) = match a.property {
        PropertyArg::Sync => {
            let eps = need(&a.eps, "eps")?;
            let v = match &sampled {
                Some(check) => verify::verify_sync_sampled(&s, &eps, check)?,
                None => verify::verify_sync(&s, &eps)?,
            };
            ("sync", v)
        }
        PropertyArg::Weak => ("weak", verify::verify_weak(&s, &need(&a.eps, "eps")?)?),
        PropertyArg::Circle => ("circle", verify::verify_circle(&s, &need(&a.eps, "eps")?)?),
        PropertyArg::LongDistance => {
            let eps = need(&a.eps, "eps")?;
            let c = need(&a.c, "c")?;
            let v = match &sampled {
                Some(check) => verify::verify_long_distance_sampled(&s, &eps, &c, check)?,
                None => verify::verify_long_distance(&s, &eps, &c, a.exhaustive)?,
            };
            ("long-distance", v)
        }
        PropertyArg::SquareFree => ("square-free", verify::verify_square_free(&s)),
    };
    let code = if verdict.is_pass() { 0 } else { 1 };
    let report = json!({
        "schema": SCHEMA,
        "property": name,
        "eps": a.eps.as_ref().map(|e| e.to_string()),
        "length": s.len(),
        "mode": if sampled.is_some() { "sampled" } else { "exact" },
        "result": verdict_json(&verdict),
    });
    Ok(Done { report, code })
}

fn run_construct(c: &Construct, seed: u64, format: Format) -> Result<Done, Error> {
    match c {
        Construct::Random { n, eps, c1, c2, max_rounds, out } => {
            let params = match (c1, c2) {
                (None, None) => SamplerParams::new(eps.clone(), seed)?,
                (c1, c2) => SamplerParams::with_constants(
                    eps.clone(),
                    c1.clone().unwrap_or(ExactFraction::from_integer(32)),
                    c2.clone().unwrap_or(ExactFraction::from_integer(16)),
                    seed,
                )?,
            };
            let o = construct_lll(*n, &params, max_rounds.unwrap_or(50 * n))?;
            let meta = json!({
                "construction": "random", "eps": eps.to_string(), "seed": seed, "prng": o.prng,
                "rounds": o.rounds, "gate": o.gate, "alphabet_size": params.alphabet_size(), "memory": params.memory(),
            });
            emit(&o.string, &meta, out, format)
        }
        Construct::Det { n, eps, m, delta, c, out } => {
            let opts = DetOptions { m: *m, delta: delta.clone(), c: c.clone(), gate: None };
            let b = build_long_distance_with(*n, eps, seed, &opts)?;
            let meta = json!({
                "construction": "det", "eps": eps.to_string(), "seed": seed, "m": b.m, "c": b.c.to_string(),
                "gate": b.gate, "circle_attempts": b.circle_attempts, "circle_alphabet": b.circle_alphabet,
                "plan": b.plan, "code": b.code,
            });
            emit(&b.string, &meta, out, format)
        }
        Construct::SquareFree { n, out } => {
            let s = thue_square_free(*n)?;
            emit(&s, &json!({ "construction": "square-free", "letters": "symbols 0,1,2 stand for 1,2,3" }), out, format)
        }
        Construct::WeakBinary { n, eps_prime, out } => {
            let plan = WeakBinaryPlan::new(eps_prime.clone())?;
            let o = weak_binary(*n, &plan, seed)?;
            let meta = json!({
                "construction": "weak-binary", "eps_prime": eps_prime.to_string(), "eps": plan.eps.to_string(),
                "k": plan.k, "inner_alphabet": plan.inner_alphabet, "seed": seed,
            });
            emit(&o.string, &meta, out, format)
        }
        Construct::FourLetter { n, eps, out } => {
            let o = four_letter(*n, eps, seed)?;
            let meta = json!({
                "construction": "four-letter", "eps": eps.to_string(), "eps_prime": o.eps_prime.to_string(),
                "binary_eps": o.binary_plan.eps.to_string(), "attempts": o.attempts, "seed": seed,
                "letters": "symbols 0,1,2,3 stand for 1,2,3,4",
            });
            emit(&o.string, &meta, out, format)
        }
    }
}

fn write_code(code: &BlockCode, output: &Option<PathBuf>, meta: Value) -> Result<Done, Error> {
    match output {
        Some(path) => {
            fs::write(path, code.to_text())?;
            Ok(Done::ok(json!({ "schema": SCHEMA, "count": code.len(), "meta": meta })))
        }
        None => {
            print!("{}", code.to_text());
            Ok(Done::ok(Value::Null))
        }
    }
}

fn run_ecc(e: &Ecc) -> Result<Done, Error> {
    match e {
        Ecc::Greedy { m, eps, output } => {
            let g = greedy_code(*m, eps)?;
            let meta = json!({ "target": g.target, "achieved": g.achieved });
            write_code(&g.code, output, meta)
        }
        Ecc::Rs { m, k, q, output } => {
            let code = materialize(&rs_code(*m, *k, *q)?)?;
            write_code(&code, output, json!({ "kind": "reed-solomon", "k": k }))
        }
        Ecc::Decode { code, word } => {
            let code = BlockCode::parse_text(&fs::read_to_string(code)?)?;
            let received = word
                .split(',')
                .map(|t| match t.trim() {
                    "_" => Ok(None),
                    t => t.parse().map(Some).map_err(|_| Error::Parameter(format!("bad symbol {t:?} in --word"))),
                })
                .collect::<Result<Vec<_>, _>>()?;
            let msg = decode_half_errors(&code, &received)?;
            let codeword = code.encode(msg)?;
            Ok(Done::ok(json!({ "schema": SCHEMA, "message": msg.to_string(), "codeword": codeword })))
        }
    }
}

fn run_stream(a: &StreamArgs, seed: u64, format: Format) -> Result<Done, Error> {
    let cfg = StreamConfig::new(a.eps.clone(), seed)?;
    let stream = Stream::new(cfg.clone());
    let (pos, s) = match a.op {
        StreamOp::At { pos } => (pos, stream.window(pos, 1)?),
        StreamOp::Window { pos, len } => (pos, stream.window(pos, len)?),
        StreamOp::Prefix { n } => (1, stream.prefix(n)?),
    };
    let at = locate(pos.max(1), &cfg)?;
    let meta = json!({
        "construction": "stream", "eps": cfg.eps.to_string(), "k": cfg.k, "bank_size": cfg.q, "seed": seed,
        "pos": pos.to_string(), "block": at.block, "offset": at.offset,
    });
    emit(&s, &meta, &Output { output: None, report: None }, format)
}

fn run_search_cmd(a: &SearchArgs) -> Result<Done, Error> {
    let mut cfg = SearchConfig::new(a.k, a.eps.clone(), a.budget)?;
    cfg.parallel = true;
    let resume = match &a.resume {
        Some(p) => Some(serde_json::from_str::<Checkpoint>(&fs::read_to_string(p)?).map_err(|e| Error::Format(e.to_string()))?),
        None => None,
    };
    let out = run_search(&cfg, resume)?;
    if let (Some(cp), Some(path)) = (&out.checkpoint, &a.checkpoint) {
        fs::write(path, serde_json::to_string(cp).unwrap())?;
    }
    let mut report = serde_json::to_value(&out.certificate).unwrap();
    report["schema"] = json!(SCHEMA);
    let code = if out.certificate.terminated { 0 } else { 3 };
    Ok(Done { report, code })
}
