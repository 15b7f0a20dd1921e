//! `jonqfpe`: key generation, encryption, self-tests and keyspace reports.

use std::fmt::Write as _;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use jonqfpe::analysis::{self, bit_length, coefficient_count, floor_log2};
use jonqfpe::cipher::effective_degree;
use jonqfpe::{keyfile, keygen, CipherKey, Factorization, KeySeed, NumeralFormat, PrimeModulus};
use num_bigint::BigUint;

const USAGE: u8 = 2;
const KEY: u8 = 3;
const INPUT: u8 = 4;
const SELFTEST: u8 = 5;

#[derive(Parser)]
#[command(name = "jonqfpe", version, about = "Format-preserving block cipher over Z/N")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a key file for a block size.
    Keygen {
        #[command(flatten)]
        block: BlockArgs,
        #[arg(long, default_value_t = 5)]
        degree: u32,
        /// 32-byte seed as 64 hex characters; omit for system entropy.
        #[arg(long)]
        seed: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Encrypt decimal values given as arguments or one per stdin line.
    Encrypt(CryptArgs),
    /// Decrypt decimal values given as arguments or one per stdin line.
    Decrypt(CryptArgs),
    /// Exhaustively check a key: bijection on [0, N) and exact round trip.
    Selftest {
        #[command(flatten)]
        block: BlockArgs,
        #[arg(long, default_value_t = 5)]
        degree: u32,
        #[arg(long)]
        seed: Option<String>,
        /// Refuse block sizes above this many points.
        #[arg(long, default_value_t = 1_000_000)]
        max_n: u64,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Keyspace counts and the published-constants check.
    Analyze {
        /// Emit `key value` lines instead of aligned text.
        #[arg(long, global = true)]
        machine: bool,
        #[command(subcommand)]
        report: Report,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false, id = "block_source")]
struct BlockSource {
    /// Prime powers, e.g. `2^3,5^4`.
    #[arg(long)]
    factors: Option<String>,
    /// Named block size: pan16 (10^16) or n128 (163^5 509^5 613^5).
    #[arg(long)]
    preset: Option<String>,
}

#[derive(Args)]
struct BlockArgs {
    #[command(flatten)]
    source: BlockSource,
    /// Block size the factors must multiply to.
    #[arg(long = "n", value_name = "N")]
    n: Option<String>,
}

#[derive(Args)]
struct CryptArgs {
    #[arg(long, env = "JONQFPE_KEY")]
    key: PathBuf,
    #[arg(long)]
    workers: Option<usize>,
    /// Fixed-width numerals `digits:<base>:<width>` instead of decimal.
    #[arg(long)]
    format: Option<String>,
    values: Vec<String>,
}

#[derive(Subcommand)]
enum Report {
    /// Number of triangular automorphisms of F_p^n.
    Count(FieldArgs),
    /// Exhaustive check that distinct keys give distinct maps.
    Census(FieldArgs),
    /// Keyspace lower bound for a block size.
    Keyspace {
        #[command(flatten)]
        block: BlockArgs,
        #[arg(long, default_value_t = 5)]
        degree: u32,
    },
    /// Recompute the published 128-bit example.
    PaperComparison,
}

#[derive(Args)]
struct FieldArgs {
    #[arg(long)]
    prime: u64,
    #[arg(long)]
    dim: usize,
    #[arg(long)]
    degree: u32,
}

struct Failure {
    code: u8,
    message: String,
}

fn fail(code: u8, message: impl ToString) -> Failure {
    Failure { code, message: message.to_string() }
}

type Outcome = Result<String, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Keygen { block, degree, seed, out } => cmd_keygen(&block, degree, seed.as_deref(), out.as_deref()),
        Command::Encrypt(args) => cmd_crypt(&args, true),
        Command::Decrypt(args) => cmd_crypt(&args, false),
        Command::Selftest { block, degree, seed, max_n, workers } => {
            cmd_selftest(&block, degree, seed.as_deref(), max_n, workers_or_default(workers))
        }
        Command::Analyze { machine, report } => cmd_analyze(report, machine),
    };
    match result {
        Ok(text) => {
            let mut stdout = io::stdout().lock();
            match stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()) {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) if e.kind() == io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::FAILURE
                }
            }
        }
        Err(Failure { code, message }) => {
            eprintln!("error: {message}");
            ExitCode::from(code)
        }
    }
}

fn workers_or_default(workers: Option<usize>) -> usize {
    workers
        .filter(|&w| w > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn resolve_block(args: &BlockArgs) -> Result<Factorization, Failure> {
    let fac = match (&args.source.factors, &args.source.preset) {
        (Some(list), _) => Factorization::from_str(list),
        (None, Some(name)) => Factorization::preset(name),
        (None, None) => unreachable!("clap enforces one block source"),
    }
    .map_err(|e| fail(USAGE, e))?;
    if let Some(n) = &args.n {
        let n = parse_decimal(n).ok_or_else(|| fail(USAGE, format!("`{n}` is not a decimal block size")))?;
        // Re-validate against the claimed N.
        return Factorization::new(&n, &fac.pairs()).map_err(|e| fail(USAGE, e));
    }
    Ok(fac)
}

fn parse_seed(seed: Option<&str>) -> Result<KeySeed, Failure> {
    let Some(text) = seed else {
        return Ok(KeySeed::random());
    };
    let bytes = hex::decode(text).map_err(|e| fail(KEY, format!("bad seed: {e}")))?;
    let bytes: [u8; 32] = bytes
        .try_into()
        .map_err(|b: Vec<u8>| fail(KEY, format!("bad seed: expected 32 bytes, got {}", b.len())))?;
    Ok(KeySeed(bytes))
}

fn warn_mixing(key: &CipherKey) {
    for warning in key.mixing_warnings() {
        eprintln!("warning: {warning}");
    }
}

fn cmd_keygen(block: &BlockArgs, degree: u32, seed: Option<&str>, out: Option<&Path>) -> Outcome {
    let fac = resolve_block(block)?;
    let seed = parse_seed(seed)?;
    let key = keygen(&fac, degree, seed);
    warn_mixing(&key);
    let text = keyfile::serialize(&key);
    match out {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| fail(KEY, format!("cannot write {}: {e}", path.display())))?;
            Ok(String::new())
        }
        None => Ok(text),
    }
}

fn load_key(path: &Path) -> Result<CipherKey, Failure> {
    let bytes = std::fs::read(path).map_err(|e| fail(KEY, format!("cannot read key {}: {e}", path.display())))?;
    keyfile::parse(&bytes).map_err(|e| fail(KEY, format!("key {}: {e}", path.display())))
}

fn parse_decimal(s: &str) -> Option<BigUint> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    BigUint::parse_bytes(s.as_bytes(), 10)
}

fn read_inputs(values: &[String]) -> Result<Vec<String>, Failure> {
    if !values.is_empty() {
        return Ok(values.to_vec());
    }
    let mut raw = String::new();
    io::stdin()
        .lock()
        .read_to_string(&mut raw)
        .map_err(|e| fail(INPUT, format!("cannot read standard input: {e}")))?;
    Ok(raw.lines().map(|l| l.trim().to_string()).collect())
}

fn cmd_crypt(args: &CryptArgs, forward: bool) -> Outcome {
    let key = load_key(&args.key)?;
    let n = key.n();
    let format = match &args.format {
        Some(spec) => {
            let format = NumeralFormat::from_str(spec).map_err(|e| fail(USAGE, e))?;
            format.check_block(key.factorization()).map_err(|e| fail(USAGE, e))?;
            Some(format)
        }
        None => None,
    };
    let inputs = read_inputs(&args.values)?;
    let mut values = Vec::with_capacity(inputs.len());
    for (line, text) in inputs.iter().enumerate() {
        let value = match format {
            Some(format) => format.decode(text).map_err(|e| fail(INPUT, format!("input {}: {e}", line + 1)))?,
            None => parse_decimal(text)
                .ok_or_else(|| fail(INPUT, format!("input {}: `{text}` is not a decimal integer", line + 1)))?,
        };
        if &value >= n {
            return Err(fail(INPUT, format!("input {}: value {value} is outside [0, {n})", line + 1)));
        }
        values.push(value);
    }
    let workers = workers_or_default(args.workers);
    let results = if forward {
        key.encrypt_batch(&values, workers)
    } else {
        key.decrypt_batch(&values, workers)
    }
    .map_err(|e| fail(INPUT, e))?;
    let mut out = String::new();
    for value in &results {
        match format {
            Some(format) => out.push_str(&format.encode(value)),
            None => write!(out, "{value}").expect("writing to a String"),
        }
        out.push('\n');
    }
    Ok(out)
}

fn cmd_selftest(block: &BlockArgs, degree: u32, seed: Option<&str>, max_n: u64, workers: usize) -> Outcome {
    let fac = resolve_block(block)?;
    let size = u64::try_from(fac.n())
        .ok()
        .filter(|&size| size <= max_n)
        .ok_or_else(|| {
            fail(
                USAGE,
                format!("N = {} exceeds the exhaustive-test guard {max_n}; raise --max-n to run it", fac.n()),
            )
        })?;
    let key = keygen(&fac, degree, parse_seed(seed)?);
    warn_mixing(&key);
    let points: Vec<BigUint> = (0..size).map(BigUint::from).collect();
    let images = key.encrypt_batch(&points, workers).map_err(|e| fail(SELFTEST, e))?;
    let mut preimage: Vec<Option<u64>> = vec![None; size as usize];
    for (m, c) in images.iter().enumerate() {
        let slot = u64::try_from(c)
            .ok()
            .filter(|&c| c < size)
            .ok_or_else(|| fail(SELFTEST, format!("E({m}) = {c} is outside [0, {size})")))?;
        if let Some(earlier) = preimage[slot as usize] {
            return Err(fail(SELFTEST, format!("collision: E({earlier}) = E({m}) = {c}")));
        }
        preimage[slot as usize] = Some(m as u64);
    }
    let recovered = key.decrypt_batch(&images, workers).map_err(|e| fail(SELFTEST, e))?;
    if let Some((m, back)) = recovered.iter().enumerate().find(|(m, back)| **back != points[*m]) {
        return Err(fail(SELFTEST, format!("round trip: D(E({m})) = {back}")));
    }
    Ok(format!(
        "N = {} ({}), degree {degree}: pass, {size}/{size}\n",
        fac.n(),
        fac.factor_text()
    ))
}

fn render(pairs: &[(String, String)], machine: bool) -> String {
    let width = pairs.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    let mut out = String::new();
    for (key, value) in pairs {
        if machine {
            writeln!(out, "{key} {value}")
        } else {
            writeln!(out, "{key:<width$}  {value}")
        }
        .expect("writing to a String");
    }
    out
}

fn field(prime: u64) -> Result<PrimeModulus, Failure> {
    PrimeModulus::new(prime).map_err(|e| fail(USAGE, e))
}

fn cmd_analyze(report: Report, machine: bool) -> Outcome {
    match report {
        Report::Count(FieldArgs { prime, dim, degree }) => {
            let p = field(prime)?;
            if dim == 0 {
                return Err(fail(USAGE, "--dim must be at least 1"));
            }
            let eff = effective_degree(degree, prime);
            let count = analysis::count_triangular_autos(p, dim, degree);
            let exponent = coefficient_count(dim, eff);
            let pairs = vec![
                ("prime".to_string(), prime.to_string()),
                ("dim".to_string(), dim.to_string()),
                ("degree".to_string(), degree.to_string()),
                ("effective_degree".to_string(), eff.to_string()),
                ("form".to_string(), format!("{prime}^{exponent}*{}^{dim}", prime - 1)),
                ("count".to_string(), count.to_string()),
                ("bits".to_string(), bit_length(&count).to_string()),
                ("floor_log2".to_string(), floor_log2(&count).to_string()),
            ];
            Ok(render(&pairs, machine))
        }
        Report::Census(FieldArgs { prime, dim, degree }) => {
            let p = field(prime)?;
            if dim == 0 {
                return Err(fail(USAGE, "--dim must be at least 1"));
            }
            let census = analysis::distinctness_census(p, dim, degree).map_err(|e| fail(USAGE, e))?;
            if machine {
                Ok(format!("syntactic {}\nfunctional {}\n", census.syntactic, census.functional))
            } else {
                Ok(format!("{census}\n"))
            }
        }
        Report::Keyspace { block, degree } => {
            let fac = resolve_block(&block)?;
            let report = analysis::keyspace_lower_bound(&fac, degree);
            if machine {
                Ok(render(&report.lines(), true))
            } else {
                Ok(format!("{report}\n"))
            }
        }
        Report::PaperComparison => {
            let report = analysis::paper_comparison_report();
            if machine {
                Ok(render(&report.lines(), true))
            } else {
                Ok(format!("{report}\n"))
            }
        }
    }
}
