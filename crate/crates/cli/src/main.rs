//! `memchan`: command-line checks for quantum memory channels.
//!
//! Every command prints a JSON report on stdout (or to `--out`) and a short
//! summary on stderr. Exit status is 0 when the check passes, 1 when it
//! fails and 2 for usage or input errors.
//!
//! ```bash
//! memchan dilate spec.json > device.json
//! memchan repeat-check device.json spec.json --n 50
//! memchan bound channel.json 2
//! memchan demo-swap --shots 100 --seed 7
//! ```

use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use memchan::channel::random_unitary_channel;
use memchan::device::swap_device;
use memchan::random::{random_state, rng_from_seed};
use memchan::report::sig12;
use memchan::repeatability::{
    check_repeatable, controlled_u_device, entropy_chain_check, repeatability_bound, InputSource, DEFAULT_THRESHOLD,
};
use memchan::tomography::{compare_strategies, Mode, Reconstruction};
use memchan::{
    ComplexMatrix, DensityOperator, KrausChannel, MemoryDevice, RandomUnitarySpec, Record, UnitaryOperator,
    UsageTranscript, DEFAULT_TOLERANCE,
};
use serde::{Deserialize, Serialize};
use serde_json::Value;

const TOLERANCE_VAR: &str = "MEMCHAN_TOLERANCE";

#[derive(Parser, Debug)]
#[command(name = "memchan", version, about = "Simulate and check quantum memory channels")]
struct Cli {
    /// Seed for every random choice (decimal or 0x-prefixed hex)
    #[arg(long, global = true, default_value = "0xC0FFEE", value_parser = parse_seed)]
    seed: u64,

    /// Write the JSON report to this file instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Tomography of the SWAP device with sequential and randomized probe orders
    DemoSwap {
        /// Uses per probe state
        #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
        shots: u64,
        #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
        mode: ModeArg,
        /// Clip the reconstructed Choi matrix to the nearest CP map
        #[arg(long)]
        project_cp: bool,
    },
    /// Compare the channel a device induces on each use with a target
    RepeatCheck {
        device: PathBuf,
        /// Kraus channel, random unitary spec, or a `dilate` output
        target: PathBuf,
        #[arg(long, default_value_t = 50, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        #[arg(long, default_value_t = DEFAULT_THRESHOLD)]
        threshold: f64,
        /// Feed this state on every use instead of random inputs
        #[arg(long, conflicts_with = "worst_case")]
        input: Option<PathBuf>,
        /// Take the worst deviation over a fixed set of probe states
        #[arg(long)]
        worst_case: bool,
    },
    /// Entropy-deficit limit on how often a channel can be repeated
    Bound {
        channel: PathBuf,
        #[arg(value_parser = clap::value_parser!(u64).range(1..))]
        mem_dim: u64,
    },
    /// Controlled-U device implementing a random unitary channel
    Dilate {
        spec: PathBuf,
        /// Memory coherences (matrix JSON); the diagonal is replaced by the weights
        #[arg(long)]
        coherences: Option<PathBuf>,
    },
    /// Run a device and record its transcript
    Transcript {
        device: PathBuf,
        #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
        n: u64,
        /// Feed this state on every use instead of random inputs
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Check a transcript against the entropy chain inequalities
    EntropyAudit {
        transcript: PathBuf,
        #[arg(value_parser = clap::value_parser!(u64).range(1..))]
        mem_dim: u64,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Exact,
    Sampled,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Exact => Mode::Exact,
            ModeArg::Sampled => Mode::Sampled,
        }
    }
}

fn parse_seed(s: &str) -> Result<u64, String> {
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|e| format!("invalid seed {s:?}: {e}"))
}

/// Error carrying the exit status it should produce.
struct Failure {
    code: u8,
    message: String,
}

fn input_error(msg: impl Display) -> Failure {
    Failure {
        code: 2,
        message: msg.to_string(),
    }
}

impl From<memchan::Error> for Failure {
    fn from(e: memchan::Error) -> Self {
        input_error(e)
    }
}

struct Context {
    seed: u64,
    tolerance: f64,
}

#[derive(Serialize)]
struct Envelope<T: Serialize> {
    command: &'static str,
    seed: u64,
    tolerance: String,
    passed: bool,
    #[serde(flatten)]
    body: T,
}

struct Outcome {
    json: Value,
    passed: bool,
    summary: String,
}

fn tolerance_from_env() -> Result<f64, Failure> {
    match std::env::var(TOLERANCE_VAR) {
        Err(_) => Ok(DEFAULT_TOLERANCE),
        Ok(raw) => match raw.trim().parse::<f64>() {
            Ok(t) if t.is_finite() && t > 0.0 => Ok(t),
            _ => Err(input_error(format!("{TOLERANCE_VAR}={raw:?} is not a positive number"))),
        },
    }
}

fn read_json(path: &Path) -> Result<Value, Failure> {
    let text = fs::read_to_string(path).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| input_error(format!("{}: invalid JSON: {e}", path.display())))
}

fn field<T: for<'de> Deserialize<'de>>(v: &Value, name: &str, path: &Path) -> Result<T, Failure> {
    let raw = v
        .get(name)
        .ok_or_else(|| input_error(format!("{}: missing field `{name}`", path.display())))?;
    T::deserialize(raw).map_err(|e| input_error(format!("{}: field `{name}`: {e}", path.display())))
}

fn load_state(path: &Path, tol: f64) -> Result<DensityOperator, Failure> {
    let m: ComplexMatrix = serde_json::from_value(read_json(path)?)
        .map_err(|e| input_error(format!("{}: {e}", path.display())))?;
    DensityOperator::new(m, tol).map_err(|e| input_error(format!("{}: {e}", path.display())))
}

fn load_device(path: &Path, tol: f64) -> Result<MemoryDevice, Failure> {
    let v = read_json(path)?;
    let dim_m: usize = field(&v, "dim_m", path)?;
    let dim_s: usize = field(&v, "dim_s", path)?;
    let unitary = UnitaryOperator::new(field(&v, "unitary", path)?, tol)?;
    let memory = DensityOperator::new(field(&v, "memory", path)?, tol)?;
    Ok(MemoryDevice::new(unitary, dim_m, dim_s, memory)?)
}

fn spec_from(v: &Value, path: &Path, tol: f64) -> Result<RandomUnitarySpec, Failure> {
    let probs: Vec<f64> = field(v, "probs", path)?;
    let unitaries: Vec<ComplexMatrix> = field(v, "unitaries", path)?;
    let unitaries = unitaries
        .into_iter()
        .map(|m| UnitaryOperator::new(m, tol))
        .collect::<memchan::Result<Vec<_>>>()?;
    Ok(RandomUnitarySpec::new(probs, unitaries)?)
}

/// Accepts `{"dim","kraus"}`, `{"probs","unitaries"}` or any object with a
/// `target` field holding one of those.
fn load_channel(path: &Path, tol: f64) -> Result<KrausChannel, Failure> {
    let v = read_json(path)?;
    let v = v.get("target").cloned().unwrap_or(v);
    if v.get("kraus").is_some() {
        let kraus: Vec<ComplexMatrix> = field(&v, "kraus", path)?;
        let ch = KrausChannel::new(kraus, tol)?;
        if let Some(dim) = v.get("dim").and_then(Value::as_u64) {
            if dim as usize != ch.dim() {
                return Err(input_error(format!(
                    "{}: dim {dim} does not match {}x{} Kraus operators",
                    path.display(),
                    ch.dim(),
                    ch.dim()
                )));
            }
        }
        Ok(ch)
    } else if v.get("probs").is_some() {
        Ok(random_unitary_channel(&spec_from(&v, path, tol)?))
    } else {
        Err(input_error(format!(
            "{}: expected a Kraus channel (`kraus`) or a random unitary spec (`probs`, `unitaries`)",
            path.display()
        )))
    }
}

fn load_transcript(path: &Path, tol: f64) -> Result<UsageTranscript, Failure> {
    let v = read_json(path)?;
    let states = |name: &str| -> Result<Vec<DensityOperator>, Failure> {
        let raw: Vec<ComplexMatrix> = field(&v, name, path)?;
        raw.into_iter()
            .enumerate()
            .map(|(k, m)| {
                DensityOperator::new(m, tol).map_err(|e| input_error(format!("{}: {name}[{k}]: {e}", path.display())))
            })
            .collect()
    };
    let t = UsageTranscript {
        inputs: states("inputs")?,
        outputs: states("outputs")?,
        memory_states: states("memory_states")?,
        induced_channels: Vec::new(),
        entropies: field(&v, "entropies", path)?,
        joint_entropies: v
            .get("joint_entropies")
            .map(|_| field(&v, "joint_entropies", path))
            .transpose()?
            .unwrap_or_default(),
    };
    t.check_shape()?;
    if t.memory_states.is_empty() {
        return Err(input_error(format!("{}: transcript has no memory states", path.display())));
    }
    Ok(t)
}

fn envelope<T: Serialize>(ctx: &Context, command: &'static str, passed: bool, body: T) -> Result<Value, Failure> {
    serde_json::to_value(Envelope {
        command,
        seed: ctx.seed,
        tolerance: sig12(ctx.tolerance),
        passed,
        body,
    })
    .map_err(|e| input_error(format!("serializing report: {e}")))
}

fn demo_swap(ctx: &Context, shots: usize, mode: Mode, project_cp: bool) -> Result<Outcome, Failure> {
    let dev = swap_device(DensityOperator::basis(2, 0))?;
    let options = Reconstruction {
        project_to_cp: project_cp,
        tolerance: ctx.tolerance,
    };
    let c = compare_strategies(&dev, shots, ctx.seed, mode, options)?;
    let summary = format!(
        "SWAP tomography, {shots} uses per probe: sequential is {} from identity, randomized is {} from \
         complete depolarization, estimates differ by {}",
        sig12(c.sequential.dist_to_identity),
        sig12(c.randomized.dist_to_depolarizing),
        sig12(c.inter_estimate_distance)
    );
    Ok(Outcome {
        json: envelope(ctx, "demo-swap", true, &c)?,
        passed: true,
        summary,
    })
}

#[derive(Serialize)]
struct RepeatBody<'a> {
    inputs: &'a str,
    #[serde(flatten)]
    report: &'a memchan::repeatability::RepeatabilityReport,
}

fn repeat_check(
    ctx: &Context,
    device: &Path,
    target: &Path,
    n: usize,
    threshold: f64,
    input: Option<&Path>,
    worst_case: bool,
) -> Result<Outcome, Failure> {
    let dev = load_device(device, ctx.tolerance)?;
    let target = load_channel(target, ctx.tolerance)?;
    let (label, source) = match input {
        Some(p) => ("fixed", InputSource::Fixed(load_state(p, ctx.tolerance)?)),
        None if worst_case => ("worst-of-set", InputSource::WorstOfSet),
        None => ("random", InputSource::SeededRandom(ctx.seed)),
    };
    let report = check_repeatable(&dev, &target, n, &source, threshold)?;
    let summary = match report.first_deviating_step {
        None => format!(
            "repeatable for {n} uses ({label} inputs): max Choi deviation {}",
            sig12(report.max_choi_deviation)
        ),
        Some(k) => format!(
            "not repeatable ({label} inputs): use {k} deviates, max Choi deviation {}",
            sig12(report.max_choi_deviation)
        ),
    };
    let passed = report.passed();
    let body = RepeatBody {
        inputs: label,
        report: &report,
    };
    Ok(Outcome {
        json: envelope(ctx, "repeat-check", passed, body)?,
        passed,
        summary,
    })
}

fn bound(ctx: &Context, channel: &Path, mem_dim: usize) -> Result<Outcome, Failure> {
    let ch = load_channel(channel, ctx.tolerance)?;
    let report = repeatability_bound(&ch, mem_dim, ctx.tolerance)?;
    let limit = match report.n_max_mixture.value() {
        Some(n) => format!("at most {n} uses"),
        None => "no limit".to_string(),
    };
    let summary = format!(
        "entropy deficit at I/d is {} bits; memory of dimension {mem_dim} allows {limit}",
        sig12(report.delta_at_mixture)
    );
    Ok(Outcome {
        json: envelope(ctx, "bound", true, &report)?,
        passed: true,
        summary,
    })
}

#[derive(Serialize)]
struct DilateBody {
    #[serde(flatten)]
    device: MemoryDevice,
    target: KrausChannel,
}

fn dilate(ctx: &Context, spec: &Path, coherences: Option<&Path>) -> Result<Outcome, Failure> {
    let v = read_json(spec)?;
    let spec = spec_from(&v, spec, ctx.tolerance)?;
    let coherences = match coherences {
        Some(p) => Some(
            serde_json::from_value::<ComplexMatrix>(read_json(p)?)
                .map_err(|e| input_error(format!("{}: {e}", p.display())))?,
        ),
        None => None,
    };
    let cu = controlled_u_device(&spec, coherences.as_ref(), ctx.tolerance)?;
    let target = cu.target();
    let dev = cu.into_device();
    let summary = format!(
        "controlled-U device: memory dimension {}, system dimension {}, unitary {}x{}",
        dev.dim_m(),
        dev.dim_s(),
        dev.unitary().dim(),
        dev.unitary().dim()
    );
    let body = DilateBody { device: dev, target };
    Ok(Outcome {
        json: envelope(ctx, "dilate", true, body)?,
        passed: true,
        summary,
    })
}

fn transcript(ctx: &Context, device: &Path, n: usize, input: Option<&Path>) -> Result<Outcome, Failure> {
    let dev = load_device(device, ctx.tolerance)?;
    let inputs: Vec<DensityOperator> = match input {
        Some(p) => vec![load_state(p, ctx.tolerance)?; n],
        None => {
            let mut rng = rng_from_seed(ctx.seed);
            (0..n).map(|_| random_state(dev.dim_s(), &mut rng)).collect()
        }
    };
    let t = dev.run_sequence(&inputs, Record::default())?;
    let summary = format!(
        "{n} uses recorded; memory entropy {} -> {} bits",
        sig12(t.entropies[0]),
        sig12(t.entropies[n])
    );
    Ok(Outcome {
        json: envelope(ctx, "transcript", true, &t)?,
        passed: true,
        summary,
    })
}

fn entropy_audit(ctx: &Context, path: &Path, mem_dim: usize) -> Result<Outcome, Failure> {
    let t = load_transcript(path, ctx.tolerance)?;
    let report = entropy_chain_check(&t, mem_dim)?;
    let summary = match report.first_violation {
        None => format!("entropy chain holds for all {} prefixes", report.steps),
        Some(k) => format!("entropy chain violated at prefix n={k}"),
    };
    let passed = report.passed;
    Ok(Outcome {
        json: envelope(ctx, "entropy-audit", passed, &report)?,
        passed,
        summary,
    })
}

fn run(cli: Cli) -> Result<Outcome, Failure> {
    let ctx = Context {
        seed: cli.seed,
        tolerance: tolerance_from_env()?,
    };
    match cli.command {
        Command::DemoSwap { shots, mode, project_cp } => demo_swap(&ctx, shots as usize, mode.into(), project_cp),
        Command::RepeatCheck {
            device,
            target,
            n,
            threshold,
            input,
            worst_case,
        } => {
            if !(threshold.is_finite() && threshold >= 0.0) {
                return Err(input_error(format!("threshold {threshold} must be a nonnegative number")));
            }
            repeat_check(&ctx, &device, &target, n as usize, threshold, input.as_deref(), worst_case)
        }
        Command::Bound { channel, mem_dim } => bound(&ctx, &channel, mem_dim as usize),
        Command::Dilate { spec, coherences } => dilate(&ctx, &spec, coherences.as_deref()),
        Command::Transcript { device, n, input } => transcript(&ctx, &device, n as usize, input.as_deref()),
        Command::EntropyAudit { transcript, mem_dim } => entropy_audit(&ctx, &transcript, mem_dim as usize),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let out = cli.out.clone();
    let outcome = match run(cli) {
        Ok(o) => o,
        Err(f) => {
            eprintln!("error: {}", f.message);
            return ExitCode::from(f.code);
        }
    };
    let mut text = serde_json::to_string_pretty(&outcome.json).expect("JSON values always serialize");
    text.push('\n');
    match out {
        Some(path) => {
            if let Err(e) = fs::write(&path, &text) {
                eprintln!("error: {}: {e}", path.display());
                return ExitCode::from(2);
            }
        }
        None => print!("{text}"),
    }
    eprintln!("{}", outcome.summary);
    if outcome.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
