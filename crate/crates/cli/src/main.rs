//! `logwitness`: reproducible experiments on short non-solutions of word
//! equations in free groups.
//!
//! Exit codes: 0 success, 1 usage or validation error, 2 every prime window
//! exhausted, 3 oracle unresolved within the radius, 4 resource cap hit.

mod flags;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Serialize;

use logwitness::cayley::{self, injectivity_radius};
use logwitness::intmat::{IntMatrix, MatrixGenerators};
use logwitness::modp::{is_prime, sl_order, ReducedGenerators};
use logwitness::oracle::{self, exact_complexity, Chi};
use logwitness::pipeline::{self, GrowthConfig, PipelineConfig, GROWTH_CSV_HEADER};
use logwitness::words::{parse_const_word, GeneratorSet};
use logwitness::{par, Error};

use flags::{parse_u64_list, Flags, Format};

#[derive(Parser)]
#[command(name = "logwitness", version, about = "Short non-solutions of word equations in free groups")]
struct Cli {
    /// JSON object supplying default values for any flag.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Find a short g with w(g) != e by reduction mod a prime.
    Witness(Flags),
    /// Exact complexity of a word by enumerating a ball.
    Complexity(Flags),
    /// Pipeline bounds and oracle values for random words of given lengths.
    Growth(Flags),
    /// Exact Cayley-graph diameters of SL_d(p).
    Diameter(Flags),
    /// Injectivity radius of reduction mod p on free-group balls.
    Injrad(Flags),
    /// Exhaustive search for short mixed identities of a finite group.
    Mifcheck(Flags),
}

const USAGE: u8 = 1;
const EXHAUSTED: u8 = 2;
const UNRESOLVED: u8 = 3;
const RESOURCE: u8 = 4;

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::WindowExhausted { .. } => EXHAUSTED,
            Error::Resource(_) | Error::PartialBall => RESOURCE,
            _ => USAGE,
        };
        let mut message = e.to_string();
        if let Error::WindowExhausted { diagnostics, .. } = &e {
            message.push_str("\nrejected primes: ");
            message.push_str(&serde_json::to_string(diagnostics).unwrap_or_default());
        }
        Failure { code, message }
    }
}

type Outcome = Result<(), Failure>;
type Handler = fn(&Flags) -> Outcome;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(USAGE) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Outcome {
    if let Ok(t) = std::env::var("LOGWITNESS_THREADS") {
        let n: usize = t
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| Failure::usage(format!("LOGWITNESS_THREADS={t:?} is not a positive integer")))?;
        par::configure_threads(n);
    }
    let (name, flags, allowed, handler): (&str, Flags, &[&str], Handler) = match cli.command {
        Command::Witness(f) => ("witness", f, WITNESS_FLAGS, cmd_witness),
        Command::Complexity(f) => ("complexity", f, COMPLEXITY_FLAGS, cmd_complexity),
        Command::Growth(f) => ("growth", f, GROWTH_FLAGS, cmd_growth),
        Command::Diameter(f) => ("diameter", f, DIAMETER_FLAGS, cmd_diameter),
        Command::Injrad(f) => ("injrad", f, INJRAD_FLAGS, cmd_injrad),
        Command::Mifcheck(f) => ("mifcheck", f, MIFCHECK_FLAGS, cmd_mifcheck),
    };
    if let Some(bad) = flags.present().into_iter().find(|f| !allowed.contains(f)) {
        return Err(Failure::usage(format!("--{bad} does not apply to {name}")));
    }
    let flags = match &cli.config {
        Some(path) => flags.merge_config(path).map_err(Failure::usage)?,
        None => flags,
    };
    handler(&flags)
}

const GENERATOR_FLAGS: [&str; 2] = ["preset", "matrix-file"];

const WITNESS_FLAGS: &[&str] = &[
    "word", "preset", "matrix-file", "c0", "c0-max", "cap-elements", "cap-bits", "seed", "out", "format", "timings",
];
const COMPLEXITY_FLAGS: &[&str] = &["word", "preset", "matrix-file", "radius", "cap-elements", "out", "format"];
const GROWTH_FLAGS: &[&str] = &[
    "n", "samples", "seed", "preset", "matrix-file", "c0", "c0-max", "cap-elements", "cap-bits", "radius", "out",
    "format", "timings",
];
const DIAMETER_FLAGS: &[&str] = &["primes", "preset", "matrix-file", "cap-elements", "out", "format", "timings"];
const INJRAD_FLAGS: &[&str] = &["primes", "preset", "matrix-file", "radius", "cap-elements", "out", "format", "timings"];
const MIFCHECK_FLAGS: &[&str] = &["group", "max-length", "cap-elements", "out", "format"];

fn generators(flags: &Flags) -> Result<MatrixGenerators, Failure> {
    match (&flags.preset, &flags.matrix_file) {
        (Some(_), Some(_)) => Err(Failure::usage(format!(
            "give only one of --{} and --{}",
            GENERATOR_FLAGS[0], GENERATOR_FLAGS[1]
        ))),
        (None, Some(path)) => load_matrix_file(path),
        (Some(p), None) => preset(p),
        (None, None) => Ok(MatrixGenerators::sanov()),
    }
}

fn preset(name: &str) -> Result<MatrixGenerators, Failure> {
    if name == "sanov" {
        return Ok(MatrixGenerators::sanov());
    }
    if let Some(d) = name.strip_prefix("elementary").and_then(|d| d.parse::<usize>().ok()) {
        return Ok(MatrixGenerators::elementary(d)?);
    }
    Err(Failure::usage(format!("unknown preset {name:?} (expected sanov or elementaryN)")))
}

#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixFile {
    #[serde(default)]
    names: Option<Vec<String>>,
    generators: Vec<Vec<Vec<String>>>,
}

fn load_matrix_file(path: &PathBuf) -> Result<MatrixGenerators, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    let file: MatrixFile =
        serde_json::from_str(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    if file.generators.is_empty() {
        return Err(Failure::usage("matrix file lists no generators"));
    }
    let gens = file
        .generators
        .iter()
        .map(|m| IntMatrix::from_literal(m))
        .collect::<Result<Vec<_>, _>>()?;
    let names = match file.names {
        Some(ns) => GeneratorSet::new(ns)?,
        None => GeneratorSet::standard(gens.len()),
    };
    Ok(MatrixGenerators::new(names, gens)?)
}

fn required<'a, T>(value: &'a Option<T>, flag: &str) -> Result<&'a T, Failure> {
    value.as_ref().ok_or_else(|| Failure::usage(format!("--{flag} is required")))
}

fn pipeline_config(flags: &Flags) -> Result<PipelineConfig, Failure> {
    let d = PipelineConfig::default();
    let cfg = PipelineConfig {
        c0: flags.c0.unwrap_or(d.c0),
        c0_max: flags.c0_max.unwrap_or(d.c0_max.max(flags.c0.unwrap_or(0))),
        element_cap: flags.cap_elements.unwrap_or(d.element_cap),
        max_bits: flags.cap_bits.unwrap_or(d.max_bits),
        seed: flags.seed.unwrap_or(d.seed),
        record_timings: flags.timings,
        ..d
    };
    if cfg.c0 == 0 || cfg.c0 > cfg.c0_max {
        return Err(Failure::usage(format!("need 1 <= c0 <= c0-max, got {} and {}", cfg.c0, cfg.c0_max)));
    }
    Ok(cfg)
}

fn emit(flags: &Flags, body: &str) -> Outcome {
    let write = |w: &mut dyn Write| w.write_all(body.as_bytes()).and_then(|()| w.flush());
    let res = match &flags.out {
        Some(path) => std::fs::File::create(path).and_then(|mut f| write(&mut f)),
        None => write(&mut std::io::stdout().lock()),
    };
    res.map_err(|e| Failure::usage(format!("writing output: {e}")))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serialisable");
    s.push('\n');
    s
}

fn json_only(flags: &Flags, name: &str) -> Outcome {
    match flags.format {
        Some(Format::Csv) => Err(Failure::usage(format!("{name} writes JSON only"))),
        _ => Ok(()),
    }
}

fn cmd_witness(flags: &Flags) -> Outcome {
    json_only(flags, "witness")?;
    let gens = generators(flags)?;
    let w = parse_const_word(required(&flags.word, "word")?, gens.names())?;
    let cfg = pipeline_config(flags)?;
    let report = pipeline::find_witness(&w, &gens, &cfg)?;
    emit(flags, &to_json(&report))
}

#[derive(Serialize)]
struct ComplexityOutput {
    word: String,
    chi: Chi,
    witness: Option<String>,
    radius: u32,
    examined: u64,
}

fn cmd_complexity(flags: &Flags) -> Outcome {
    json_only(flags, "complexity")?;
    let gens = generators(flags)?;
    let w = parse_const_word(required(&flags.word, "word")?, gens.names())?;
    let radius = flags.radius.unwrap_or(6);
    let rec = exact_complexity(&w, gens.rank(), radius, flags.cap_elements.unwrap_or(1 << 27))?;
    let out = ComplexityOutput {
        word: w.render(gens.names()),
        chi: rec.chi,
        witness: rec.witness.as_ref().map(|g| g.render(gens.names())),
        radius,
        examined: rec.examined,
    };
    emit(flags, &to_json(&out))?;
    if rec.chi.is_resolved() {
        Ok(())
    } else {
        Err(Failure {
            code: UNRESOLVED,
            message: format!("complexity exceeds the search radius {radius}"),
        })
    }
}

fn cmd_growth(flags: &Flags) -> Outcome {
    let gens = generators(flags)?;
    let seed = *required(&flags.seed, "seed")?;
    let lengths = parse_u64_list(required(&flags.n, "n")?, "--n").map_err(Failure::usage)?;
    if lengths.contains(&0) {
        return Err(Failure::usage("--n: word lengths must be positive"));
    }
    let cfg = GrowthConfig {
        lengths,
        samples: flags.samples.unwrap_or(50),
        oracle_radius: flags.radius.unwrap_or(6),
        pipeline: PipelineConfig {
            seed,
            ..pipeline_config(flags)?
        },
    };
    let rows = pipeline::growth_experiment(&gens, &cfg)?;
    let body = match flags.format.unwrap_or(Format::Csv) {
        Format::Json => to_json(&rows),
        Format::Csv => {
            let mut s = format!("{GROWTH_CSV_HEADER}\n");
            for r in &rows {
                s.push_str(&r.csv_line());
                s.push('\n');
            }
            s
        }
    };
    emit(flags, &body)
}

const SWEEP_CSV_HEADER: &str = "p,group_order,diameter,injectivity_radius,seconds";

#[derive(Serialize)]
struct SweepRow {
    p: u64,
    group_order: u128,
    #[serde(skip_serializing_if = "Option::is_none")]
    diameter: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ball_sizes: Option<Vec<u64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    injectivity_radius: Option<u64>,
    /// Set when no collision appeared within the radius limit.
    #[serde(skip_serializing_if = "Option::is_none")]
    injectivity_capped: Option<bool>,
    seconds: f64,
}

impl SweepRow {
    fn csv_line(&self) -> String {
        let opt = |v: Option<u64>| v.map(|v| v.to_string()).unwrap_or_default();
        let inj = match (self.injectivity_radius, self.injectivity_capped) {
            (Some(r), Some(true)) => format!(">={r}"),
            (r, _) => opt(r),
        };
        format!(
            "{},{},{},{},{:.3}",
            self.p,
            self.group_order,
            opt(self.diameter),
            inj,
            self.seconds
        )
    }
}

fn prime_list(flags: &Flags) -> Result<Vec<u64>, Failure> {
    let mut out = Vec::new();
    for item in required(&flags.primes, "primes")?.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if let Some((lo, hi)) = item.split_once("..") {
            let parse = |s: &str| {
                s.trim()
                    .parse::<u64>()
                    .map_err(|_| Failure::usage(format!("--primes: bad range {item:?}")))
            };
            let (lo, hi) = (parse(lo)?, parse(hi)?);
            out.extend((lo..=hi).filter(|&p| is_prime(p)));
        } else {
            let p: u64 = item
                .parse()
                .map_err(|_| Failure::usage(format!("--primes: {item:?} is not an integer")))?;
            if !is_prime(p) {
                return Err(Failure::usage(format!("{p} is not prime")));
            }
            out.push(p);
        }
    }
    Ok(out)
}

fn sweep<F>(flags: &Flags, row: F) -> Outcome
where
    F: Fn(u64, &MatrixGenerators) -> Result<SweepRow, Failure>,
{
    let gens = generators(flags)?;
    let primes = prime_list(flags)?;
    let mut rows = Vec::with_capacity(primes.len());
    for p in primes {
        let start = Instant::now();
        let mut r = row(p, &gens)?;
        if flags.timings {
            r.seconds = start.elapsed().as_secs_f64();
        }
        rows.push(r);
    }
    let body = match flags.format.unwrap_or(Format::Csv) {
        Format::Json => to_json(&rows),
        Format::Csv => {
            let mut s = format!("{SWEEP_CSV_HEADER}\n");
            for r in &rows {
                s.push_str(&r.csv_line());
                s.push('\n');
            }
            s
        }
    };
    emit(flags, &body)
}

fn group_order(d: usize, p: u64) -> Result<u128, Failure> {
    sl_order(d, p).ok_or_else(|| Failure::usage(format!("|SL_{d}({p})| overflows 128 bits")))
}

fn cmd_diameter(flags: &Flags) -> Outcome {
    let cap = flags.cap_elements.unwrap_or(cayley::DEFAULT_CAP);
    sweep(flags, |p, gens| {
        let reduced = ReducedGenerators::new(gens, p)?;
        let ball = cayley::explore(&reduced.gens, cap)?;
        let rec = cayley::diameter(&ball)?;
        let order = sl_order(gens.dim(), p);
        if order != Some(ball.len() as u128) {
            return Err(Failure::usage(format!(
                "the generators reduced mod {p} span {} elements, not all of SL_{}({p})",
                ball.len(),
                gens.dim()
            )));
        }
        Ok(SweepRow {
            p,
            group_order: group_order(gens.dim(), p)?,
            diameter: Some(rec.diameter),
            ball_sizes: Some(rec.ball_sizes),
            injectivity_radius: None,
            injectivity_capped: None,
            seconds: 0.0,
        })
    })
}

fn cmd_injrad(flags: &Flags) -> Outcome {
    let cap = flags.cap_elements.unwrap_or(cayley::DEFAULT_CAP);
    let max_radius = flags.radius.unwrap_or(12);
    sweep(flags, |p, gens| {
        let rec = injectivity_radius(p, gens, max_radius, cap)?;
        Ok(SweepRow {
            p,
            group_order: group_order(gens.dim(), p)?,
            diameter: None,
            ball_sizes: None,
            injectivity_radius: Some(rec.radius),
            injectivity_capped: Some(rec.capped),
            seconds: 0.0,
        })
    })
}

fn cmd_mifcheck(flags: &Flags) -> Outcome {
    json_only(flags, "mifcheck")?;
    let group = oracle::load_group(required(&flags.group, "group")?)?;
    let max_length = *required(&flags.max_length, "max-length")?;
    let report = oracle::mixed_identity_search(&group, max_length, flags.cap_elements.unwrap_or(1 << 30))?;
    emit(flags, &to_json(&report.identities))
}
