//! Command-line driver: generate codes and channels, evaluate and search
//! repair/beamforming strategies, run the alignment constructions, map
//! between the two settings, compute bounds, verify the equivalences, and
//! sweep finite-SNR rates. All file I/O uses the library's JSON schemas.

mod render;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use render::{render, Format};
use repair_align_core::bridge::{
    channel_to_code, code_to_channel, lemma3_bounds, lemma5_bounds, verify_theorem1,
    verify_theorem2,
};
use repair_align_core::constructions::{
    eq13_guarantee, inverse_alignment_beamforming, inverse_alignment_repair,
    symbol_extension_beamforming, symbol_extension_repair,
};
use repair_align_core::domain::{format_rational, parse_rational};
use repair_align_core::mds::{self, MdsCode};
use repair_align_core::repair::{
    self, RepairStrategy, SearchMode, DEFAULT_SEARCH_BUDGET,
};
use repair_align_core::wiretap::{
    self, empirical_dof, generate_random_channel, secrecy_rate, BeamformingSet, ChannelInstance,
    Structure,
};
use repair_align_core::ScalarDomain;

/// Seed used when neither `--seed` nor `REPAIR_ALIGN_SEED` is given.
const DEFAULT_SEED: u64 = 42;

/// Environment variable overriding the default seed.
const SEED_ENV: &str = "REPAIR_ALIGN_SEED";

#[derive(Parser)]
#[command(name = "repair-align", version, about = "Exact-arithmetic toolkit for MDS repair overhead and compound-wiretap S-DoF, linked by interference alignment")]
struct Cli {
    /// Report format on stdout
    #[arg(long, global = true, value_enum, default_value = "table")]
    format: Format,
    /// Cap on search worker threads (default: all cores)
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate random codes and channels
    #[command(subcommand)]
    Gen(GenCmd),
    /// Structural checks
    #[command(subcommand)]
    Check(CheckCmd),
    /// Evaluate, search, or construct repair strategies
    #[command(subcommand)]
    Repair(RepairCmd),
    /// Evaluate, search, or construct beamforming sets
    #[command(subcommand)]
    Sdof(SdofCmd),
    /// Map codes to channels and back
    #[command(subcommand)]
    Map(MapCmd),
    /// Bound calculators
    #[command(subcommand)]
    Bounds(BoundsCmd),
    /// Run both searches on a mapped pair and compare
    #[command(subcommand)]
    Verify(VerifyCmd),
    /// Finite-SNR secrecy rates
    #[command(subcommand)]
    Rate(RateCmd),
}

#[derive(Subcommand)]
enum GenCmd {
    /// Generate a systematic MDS storage code
    Code {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        beta: usize,
        /// Scalar domain: gf:<p>, rational, or float:<tau>
        #[arg(long)]
        field: String,
        /// Draw diagonal coding blocks
        #[arg(long)]
        diagonal: bool,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
    /// Generate a multiple-access compound wiretap channel
    Channel {
        /// Number of users L
        #[arg(long)]
        l: usize,
        /// Symbols per user N
        #[arg(long)]
        n: usize,
        /// Total receiver count K (one legitimate + K-1 eavesdroppers)
        #[arg(long)]
        k: usize,
        #[arg(long)]
        field: String,
        #[arg(long, default_value = "generic")]
        structure: StructureArg,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(short = 'o', long = "output")]
        output: PathBuf,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum StructureArg {
    Generic,
    Diagonal,
}

#[derive(Subcommand)]
enum CheckCmd {
    /// Verify the any-k-of-n reconstruction property
    Mds {
        code: PathBuf,
        /// Exit with an error when the property fails
        #[arg(long)]
        fatal: bool,
    },
}

#[derive(Subcommand)]
enum RepairCmd {
    /// Measure feasibility, interference ranks, and overhead of a strategy
    Eval {
        code: PathBuf,
        #[arg(long)]
        strategy: PathBuf,
    },
    /// Minimize the total interference rank for one failed node
    Search {
        code: PathBuf,
        #[arg(long)]
        node: usize,
        /// Enumerate all column-space representatives (prime fields)
        #[arg(long, conflicts_with = "trials")]
        exhaustive: bool,
        /// Sample this many random strategies instead
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long, default_value_t = DEFAULT_SEARCH_BUDGET)]
        budget: u64,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
    /// Build an alignment strategy rather than searching for one
    Construct {
        code: PathBuf,
        #[arg(long)]
        node: usize,
        #[arg(long)]
        method: MethodArg,
        /// Extension parameter for the symbol-extension method
        #[arg(long)]
        delta: Option<u32>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum MethodArg {
    InverseAlignment,
    SymbolExtension,
}

#[derive(Subcommand)]
enum SdofCmd {
    /// Compute ranks and the total S-DoF of a beamforming set
    Eval {
        channel: PathBuf,
        #[arg(long)]
        bf: PathBuf,
    },
    /// Minimize the worst eavesdropper rank (prime fields)
    Search {
        channel: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SEARCH_BUDGET)]
        budget: u64,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
    /// Build an alignment beamforming set
    Construct {
        channel: PathBuf,
        #[arg(long)]
        method: MethodArg,
        #[arg(long)]
        delta: Option<u32>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum MapCmd {
    /// Read a code with one failed node as a wiretap channel
    CodeToChannel {
        code: PathBuf,
        #[arg(long)]
        node: usize,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
    /// Read a channel as a storage code with node 1 failed
    ChannelToCode {
        channel: PathBuf,
        /// Exit with an error when the mapped code is not MDS
        #[arg(long)]
        fatal: bool,
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum BoundsCmd {
    /// S-DoF range of the channel mapped from a code with overhead delta
    Lemma3 {
        #[arg(long)]
        k: usize,
        /// Measured repair overhead as num/den
        #[arg(long)]
        overhead: String,
    },
    /// Overhead range of the code mapped from a channel with S-DoF eta
    Lemma5 {
        #[arg(long)]
        k: usize,
        /// Measured S-DoF as num/den
        #[arg(long)]
        eta: String,
    },
    /// Guaranteed S-DoF of the symbol-extension construction
    Eq13 {
        #[arg(long)]
        l: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        delta: u32,
    },
}

#[derive(Subcommand)]
enum VerifyCmd {
    /// Repair search vs beamforming search on the mapped channel
    Theorem1 {
        code: PathBuf,
        #[arg(long)]
        node: usize,
        #[arg(long, default_value_t = DEFAULT_SEARCH_BUDGET)]
        budget: u64,
    },
    /// Beamforming search vs repair search on the mapped code
    Theorem2 {
        channel: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SEARCH_BUDGET)]
        budget: u64,
    },
}

#[derive(Subcommand)]
enum RateCmd {
    /// Secrecy rate and empirical S-DoF at one operating point
    Eval {
        channel: PathBuf,
        #[arg(long)]
        bf: PathBuf,
        #[command(flatten)]
        snr: SnrArgs,
        /// Pivot tolerance when lifting rational inputs to floats
        #[arg(long, default_value_t = 1e-9)]
        tau: f64,
    },
    /// Rates over a list of transmit powers
    Sweep {
        channel: PathBuf,
        #[arg(long)]
        bf: PathBuf,
        /// Comma-separated transmit powers
        #[arg(long, value_delimiter = ',')]
        powers: Vec<f64>,
        #[arg(long, default_value_t = 1.0)]
        noise: f64,
        /// Pivot tolerance when lifting rational inputs to floats
        #[arg(long, default_value_t = 1e-9)]
        tau: f64,
    },
}

#[derive(Args)]
struct SnrArgs {
    /// Transmit power P
    #[arg(long)]
    power: f64,
    /// Noise variance sigma^2
    #[arg(long, default_value_t = 1.0)]
    noise: f64,
}

/// A rendered report plus an optional failure that still exits nonzero
/// after the report has been printed.
struct Outcome {
    report: Value,
    failure: Option<String>,
}

impl Outcome {
    fn ok(report: Value) -> Self {
        Outcome { report, failure: None }
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global();
    }
    match run(cli.command) {
        Ok(outcome) => {
            print!("{}", render(&outcome.report, cli.format));
            match outcome.failure {
                None => ExitCode::SUCCESS,
                Some(msg) => {
                    eprintln!("error: {msg}");
                    ExitCode::from(1)
                }
            }
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> anyhow::Result<Outcome> {
    match command {
        Command::Gen(cmd) => run_gen(cmd),
        Command::Check(cmd) => run_check(cmd),
        Command::Repair(cmd) => run_repair(cmd),
        Command::Sdof(cmd) => run_sdof(cmd),
        Command::Map(cmd) => run_map(cmd),
        Command::Bounds(cmd) => run_bounds(cmd),
        Command::Verify(cmd) => run_verify(cmd),
        Command::Rate(cmd) => run_rate(cmd),
    }
}

fn run_gen(cmd: GenCmd) -> anyhow::Result<Outcome> {
    match cmd {
        GenCmd::Code { n, k, beta, field, diagonal, seed, output } => {
            let domain = parse_field(&field)?;
            let seed = resolve_seed(seed)?;
            let code = if diagonal {
                mds::generate_diagonal_code(n, k, beta, &domain, seed)?
            } else {
                mds::generate_random_code(n, k, beta, &domain, seed)?
            };
            write_json(&output, &code)?;
            Ok(Outcome::ok(json!({
                "generated": "code",
                "n": n, "k": k, "beta": beta,
                "domain": domain.to_string(),
                "diagonal": diagonal,
                "seed": seed,
                "is_mds": true,
                "output": output.display().to_string(),
            })))
        }
        GenCmd::Channel { l, n, k, field, structure, seed, output } => {
            let domain = parse_field(&field)?;
            let seed = resolve_seed(seed)?;
            let structure = match structure {
                StructureArg::Generic => Structure::Generic,
                StructureArg::Diagonal => Structure::Diagonal,
            };
            let chan = generate_random_channel(l, n, k, &domain, seed, structure)?;
            write_json(&output, &chan)?;
            Ok(Outcome::ok(json!({
                "generated": "channel",
                "L": l, "N": n, "K": k,
                "domain": domain.to_string(),
                "structure": serde_json::to_value(structure)?,
                "seed": seed,
                "output": output.display().to_string(),
            })))
        }
    }
}

fn run_check(cmd: CheckCmd) -> anyhow::Result<Outcome> {
    match cmd {
        CheckCmd::Mds { code, fatal } => {
            let code: MdsCode = read_json(&code)?;
            let ok = mds::is_mds(&code);
            let report = json!({
                "n": code.n(), "k": code.k(), "beta": code.beta(),
                "is_mds": ok,
            });
            let failure = (!ok && fatal).then(|| "code is not MDS".to_string());
            Ok(Outcome { report, failure })
        }
    }
}

fn run_repair(cmd: RepairCmd) -> anyhow::Result<Outcome> {
    match cmd {
        RepairCmd::Eval { code, strategy } => {
            let code: MdsCode = read_json(&code)?;
            let strategy: RepairStrategy = read_json(&strategy)?;
            let report = repair::evaluate(&code, &strategy)?;
            let failure = (!report.feasible)
                .then(|| "strategy is infeasible: useful-data matrix is rank deficient".to_string());
            Ok(Outcome {
                report: with_node(serde_json::to_value(&report)?, strategy.failed_node()),
                failure,
            })
        }
        RepairCmd::Search { code, node, exhaustive, trials, budget, seed, output } => {
            let code: MdsCode = read_json(&code)?;
            let mode = match trials {
                Some(trials) => SearchMode::Randomized { trials, seed: resolve_seed(seed)? },
                None => {
                    let _ = exhaustive; // exhaustive is the default mode
                    SearchMode::Exhaustive { budget }
                }
            };
            let (strategy, report) = repair::search_optimal_repair(&code, node, mode)?;
            if let Some(path) = &output {
                write_json(path, &strategy)?;
            }
            Ok(Outcome::ok(with_output(
                with_node(serde_json::to_value(&report)?, node),
                output.as_deref(),
            )))
        }
        RepairCmd::Construct { code, node, method, delta, seed, output } => {
            let code: MdsCode = read_json(&code)?;
            let seed = resolve_seed(seed)?;
            let (strategy, report) = match method {
                MethodArg::InverseAlignment => {
                    let strategy = inverse_alignment_repair(&code, node, seed)?;
                    let report = repair::evaluate(&code, &strategy)?;
                    (strategy, report)
                }
                MethodArg::SymbolExtension => {
                    let delta = delta
                        .ok_or_else(|| anyhow!("--delta is required for symbol-extension"))?;
                    symbol_extension_repair(&code, node, delta, seed)?
                }
            };
            if let Some(path) = &output {
                write_json(path, &strategy)?;
            }
            Ok(Outcome::ok(with_output(
                with_node(serde_json::to_value(&report)?, node),
                output.as_deref(),
            )))
        }
    }
}

fn run_sdof(cmd: SdofCmd) -> anyhow::Result<Outcome> {
    match cmd {
        SdofCmd::Eval { channel, bf } => {
            let chan: ChannelInstance = read_json(&channel)?;
            let set: BeamformingSet = read_json(&bf)?;
            let report = wiretap::sdof(&chan, &set)?;
            Ok(Outcome::ok(serde_json::to_value(&report)?))
        }
        SdofCmd::Search { channel, budget, output } => {
            let chan: ChannelInstance = read_json(&channel)?;
            let (set, report) = wiretap::search_optimal_beamforming(&chan, budget)?;
            if let Some(path) = &output {
                write_json(path, &set)?;
            }
            Ok(Outcome::ok(with_output(
                serde_json::to_value(&report)?,
                output.as_deref(),
            )))
        }
        SdofCmd::Construct { channel, method, delta, seed, output } => {
            let chan: ChannelInstance = read_json(&channel)?;
            let seed = resolve_seed(seed)?;
            let set = match method {
                MethodArg::InverseAlignment => inverse_alignment_beamforming(&chan, seed)?,
                MethodArg::SymbolExtension => {
                    let delta = delta
                        .ok_or_else(|| anyhow!("--delta is required for symbol-extension"))?;
                    symbol_extension_beamforming(&chan, delta, seed)?
                }
            };
            let report = wiretap::sdof(&chan, &set)?;
            if let Some(path) = &output {
                write_json(path, &set)?;
            }
            Ok(Outcome::ok(with_output(
                serde_json::to_value(&report)?,
                output.as_deref(),
            )))
        }
    }
}

fn run_map(cmd: MapCmd) -> anyhow::Result<Outcome> {
    match cmd {
        MapCmd::CodeToChannel { code, node, output } => {
            let code: MdsCode = read_json(&code)?;
            let (chan, record) = code_to_channel(&code, node)?;
            if let Some(path) = &output {
                write_json(path, &chan)?;
            }
            Ok(Outcome::ok(with_output(
                serde_json::to_value(&record)?,
                output.as_deref(),
            )))
        }
        MapCmd::ChannelToCode { channel, fatal, output } => {
            let chan: ChannelInstance = read_json(&channel)?;
            let (code, record) = channel_to_code(&chan)?;
            if let Some(path) = &output {
                write_json(path, &code)?;
            }
            let failure = (fatal && record.mds_verified == Some(false))
                .then(|| "mapped code is not MDS".to_string());
            Ok(Outcome {
                report: with_output(serde_json::to_value(&record)?, output.as_deref()),
                failure,
            })
        }
    }
}

fn run_bounds(cmd: BoundsCmd) -> anyhow::Result<Outcome> {
    match cmd {
        BoundsCmd::Lemma3 { k, overhead } => {
            let delta = parse_rational(&overhead)?;
            let (low, high) = lemma3_bounds(k, &delta)?;
            Ok(Outcome::ok(json!({
                "k": k,
                "overhead": format_rational(&delta),
                "sdof_low": format_rational(&low),
                "sdof_high": format_rational(&high),
            })))
        }
        BoundsCmd::Lemma5 { k, eta } => {
            let eta = parse_rational(&eta)?;
            let (low, high) = lemma5_bounds(k, &eta)?;
            Ok(Outcome::ok(json!({
                "K": k,
                "eta": format_rational(&eta),
                "overhead_low": format_rational(&low),
                "overhead_high": format_rational(&high),
            })))
        }
        BoundsCmd::Eq13 { l, k, delta } => {
            let guarantee = eq13_guarantee(l, k, delta)?;
            let bound = wiretap::outer_bound(l)?;
            Ok(Outcome::ok(json!({
                "L": l, "K": k, "delta": delta,
                "guaranteed_sdof": format_rational(&guarantee),
                "outer_bound": format_rational(&bound),
            })))
        }
    }
}

fn run_verify(cmd: VerifyCmd) -> anyhow::Result<Outcome> {
    match cmd {
        VerifyCmd::Theorem1 { code, node, budget } => {
            let code: MdsCode = read_json(&code)?;
            let report = verify_theorem1(&code, node, budget)?;
            Ok(Outcome::ok(serde_json::to_value(&report)?))
        }
        VerifyCmd::Theorem2 { channel, budget } => {
            let chan: ChannelInstance = read_json(&channel)?;
            let report = verify_theorem2(&chan, budget)?;
            Ok(Outcome::ok(serde_json::to_value(&report)?))
        }
    }
}

fn run_rate(cmd: RateCmd) -> anyhow::Result<Outcome> {
    match cmd {
        RateCmd::Eval { channel, bf, snr, tau } => {
            let (chan, set) = load_float_pair(&channel, &bf, tau)?;
            let rate = secrecy_rate(&chan, &set, snr.power, snr.noise)?;
            let dof = empirical_dof(&chan, &set, snr.power, snr.noise)?;
            Ok(Outcome::ok(json!({
                "power": snr.power,
                "noise": snr.noise,
                "rate_bits": rate,
                "empirical_dof": dof,
            })))
        }
        RateCmd::Sweep { channel, bf, powers, noise, tau } => {
            let (chan, set) = load_float_pair(&channel, &bf, tau)?;
            if powers.is_empty() {
                return Err(anyhow!("--powers needs at least one value"));
            }
            let mut rows = Vec::new();
            for power in powers {
                let rate = secrecy_rate(&chan, &set, power, noise)?;
                let dof = empirical_dof(&chan, &set, power, noise)?;
                rows.push(json!({
                    "power": power,
                    "rate_bits": rate,
                    "empirical_dof": dof,
                }));
            }
            Ok(Outcome::ok(json!({ "noise": noise, "rows": rows })))
        }
    }
}

/// Reads a channel/beamforming pair for rate evaluation, lifting rational
/// inputs into the float domain at tolerance `tau`.
fn load_float_pair(
    channel: &Path,
    bf: &Path,
    tau: f64,
) -> anyhow::Result<(ChannelInstance, BeamformingSet)> {
    let chan: ChannelInstance = read_json(channel)?;
    let set: BeamformingSet = read_json(bf)?;
    let chan = match chan.domain() {
        ScalarDomain::Float { .. } => chan,
        _ => chan.to_float(tau)?,
    };
    let set = match set.matrices()[0].domain() {
        ScalarDomain::Float { .. } => set,
        _ => set.to_float(tau)?,
    };
    Ok((chan, set))
}

/// Parses `gf:<p>`, `rational`, or `float:<tau>`.
fn parse_field(spec: &str) -> anyhow::Result<ScalarDomain> {
    if spec == "rational" {
        return Ok(ScalarDomain::rational());
    }
    if let Some(p) = spec.strip_prefix("gf:") {
        let p: u64 = p.parse().with_context(|| format!("bad prime in {spec:?}"))?;
        return Ok(ScalarDomain::prime_field(p)?);
    }
    if let Some(tau) = spec.strip_prefix("float:") {
        let tau: f64 = tau.parse().with_context(|| format!("bad tolerance in {spec:?}"))?;
        return Ok(ScalarDomain::float(tau)?);
    }
    Err(anyhow!(
        "unknown field {spec:?}; expected gf:<p>, rational, or float:<tau>"
    ))
}

/// Explicit flag, then the environment, then the documented default.
fn resolve_seed(flag: Option<u64>) -> anyhow::Result<u64> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var(SEED_ENV) {
        Ok(raw) => raw
            .parse()
            .with_context(|| format!("{SEED_ENV} must be a u64, got {raw:?}")),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

fn with_node(mut report: Value, node: usize) -> Value {
    if let Value::Object(map) = &mut report {
        map.insert("failed_node".into(), json!(node));
    }
    report
}

fn with_output(mut report: Value, output: Option<&Path>) -> Value {
    if let (Value::Object(map), Some(path)) = (&mut report, output) {
        map.insert("output".into(), json!(path.display().to_string()));
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn field_specs_parse() {
        assert!(matches!(
            parse_field("gf:5").unwrap(),
            ScalarDomain::PrimeField { p: 5 }
        ));
        assert!(matches!(parse_field("rational").unwrap(), ScalarDomain::Rational));
        assert!(matches!(
            parse_field("float:1e-9").unwrap(),
            ScalarDomain::Float { .. }
        ));
        assert!(parse_field("gf:4").is_err());
        assert!(parse_field("reals").is_err());
    }

    #[test]
    fn seed_resolution_prefers_flag() {
        assert_eq!(resolve_seed(Some(9)).unwrap(), 9);
    }

    #[test]
    fn rational_cli_args_parse() {
        let v = parse_rational("3/2").unwrap();
        assert_eq!(format_rational(&v), "3/2");
    }
}
