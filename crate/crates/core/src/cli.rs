//! Command-line front end. Every flag can also come from the `--config` JSON
//! document (same key names, with `-` replaced by `_`); flags win.
//!
//! Exit codes: 0 success, 2 input or configuration error, 3 domain error
//! (empty mask, step out of range), 4 numerical failure.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::mask::{
    augment_for_stage, read_pgm, write_pgm, AnnealingSchedule, AugmentConfig, Stage,
};
use crate::mot::{write_block, MoTBlock, Modality, MotConfig, TokenSequence};
use crate::numerics::{mix_seed, Matrix, SeededRng};
use crate::training::{run_toy, ToyRunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

/// LoRA factor spread for the demonstration block.
const DEMO_LORA_STD: f64 = 0.02;
const DEMO_TARGET_TOKENS: usize = 4;
const DEMO_REFERENCE_TOKENS: usize = 4;

#[derive(Debug, Parser)]
#[command(
    name = "motmask",
    version,
    about = "Expert-routed transformer block and mask annealing tools"
)]
pub struct Cli {
    /// Seed for every random choice.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// JSON document supplying defaults for any flag and the model shape.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Produce the fine, rough or bounding-box version of a PGM mask.
    AugmentMask(AugmentArgs),
    /// Route one random token sequence through a seeded block.
    RouteDemo,
    /// Train a block on the synthetic multi-category task.
    TrainToy(TrainArgs),
    /// Print the stage active at a step.
    Schedule(ScheduleArgs),
}

#[derive(Debug, Args)]
pub struct AugmentArgs {
    #[arg(long = "in")]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// fine, rough or bbox.
    #[arg(long)]
    pub stage: Option<String>,
    /// Dilation radius in pixels.
    #[arg(long)]
    pub a: Option<f64>,
    /// Maximum displacement per axis in pixels.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Noise frequency.
    #[arg(long)]
    pub scale: Option<f64>,
    /// Offset between the x and y noise lookups.
    #[arg(long)]
    pub delta: Option<f64>,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub categories: Option<usize>,
    /// Samples generated per category.
    #[arg(long)]
    pub per_category: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub learning_rate: Option<f64>,
    /// JSONL loss curve destination.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Optional destination for the trained block weights.
    #[arg(long)]
    pub weights: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScheduleArgs {
    #[arg(long)]
    pub fine: Option<usize>,
    #[arg(long)]
    pub rough: Option<usize>,
    #[arg(long)]
    pub bbox: Option<usize>,
    #[arg(long)]
    pub step: Option<usize>,
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::EmptyMask
        | Error::ScheduleExhausted { .. }
        | Error::Contour(_)
        | Error::Routing(_) => EXIT_DOMAIN,
        Error::Numerical(_) => EXIT_NUMERICAL,
        Error::Dimension(_)
        | Error::EmptyInput(_)
        | Error::Config(_)
        | Error::Format { .. }
        | Error::Io(_) => EXIT_INPUT,
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Diagnostics go to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
        }
    };
    let stdout = std::io::stdout();
    match execute(&cli, &mut stdout.lock()) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Runs a parsed command, writing its report to `out`.
pub fn execute(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    let doc = match &cli.config {
        Some(path) => Settings::load(path)?,
        None => Settings::default(),
    };
    let seed = doc.pick(cli.seed, "seed")?.unwrap_or(0);
    match &cli.command {
        Command::AugmentMask(args) => augment_mask(args, &doc, seed),
        Command::RouteDemo => route_demo(&doc, seed, out),
        Command::TrainToy(args) => train_toy(args, &doc, seed, out),
        Command::Schedule(args) => schedule(args, &doc, out),
    }
}

/// The `--config` document.
#[derive(Debug, Default)]
struct Settings {
    text: Option<String>,
    map: Map<String, Value>,
}

impl Settings {
    fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let value: Value = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        match value {
            Value::Object(map) => Ok(Self {
                text: Some(text),
                map,
            }),
            _ => Err(Error::Config(format!(
                "{}: expected a JSON object",
                path.display()
            ))),
        }
    }

    fn pick<T: DeserializeOwned>(&self, flag: Option<T>, key: &str) -> Result<Option<T>> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.map.get(key) {
            None | Some(Value::Null) => Ok(None),
            Some(v) => serde_json::from_value(v.clone())
                .map(Some)
                .map_err(|e| Error::Config(format!("config key `{key}`: {e}"))),
        }
    }

    fn require<T: DeserializeOwned>(&self, flag: Option<T>, key: &str) -> Result<T> {
        self.pick(flag, key)?
            .ok_or_else(|| Error::Config(format!("missing --{}", key.replace('_', "-"))))
    }

    fn model(&self, seed: u64) -> Result<MotConfig> {
        let mut cfg = match &self.text {
            Some(t) => MotConfig::from_json(t)?,
            None => MotConfig::default(),
        };
        cfg.seed = seed;
        Ok(cfg)
    }
}

fn augment_mask(args: &AugmentArgs, doc: &Settings, seed: u64) -> Result<()> {
    let input: PathBuf = doc.require(args.input.clone(), "in")?;
    let output: PathBuf = doc.require(args.out.clone(), "out")?;
    let stage_name: String = doc.require(args.stage.clone(), "stage")?;
    let stage = Stage::parse(&stage_name)
        .ok_or_else(|| Error::Config(format!("unknown stage `{stage_name}`")))?;
    let base = AugmentConfig::default();
    let cfg = AugmentConfig {
        a: doc.pick(args.a, "a")?.unwrap_or(base.a),
        alpha: doc.pick(args.alpha, "alpha")?.unwrap_or(base.alpha),
        scale: doc.pick(args.scale, "scale")?.unwrap_or(base.scale),
        delta: doc.pick(args.delta, "delta")?.unwrap_or(base.delta),
        seed,
    };
    cfg.validate()?;

    let fine = read_pgm(&fs::read(&input)?)?;
    let mask = augment_for_stage(&fine, stage, cfg.a, &cfg.perturb())?;
    fs::write(&output, write_pgm(&mask))?;
    Ok(())
}

#[derive(Serialize)]
struct RouteReport<'a> {
    weights: &'a [f64],
    active_set: &'a [usize],
    backbone_index: usize,
}

fn route_demo(doc: &Settings, seed: u64, out: &mut dyn Write) -> Result<()> {
    let cfg = doc.model(seed)?;
    let block = MoTBlock::random(&cfg, DEMO_LORA_STD)?;
    let mut rng = SeededRng::new(mix_seed(seed, &[0xDE30]));
    let mut tags = vec![Modality::Target; DEMO_TARGET_TOKENS];
    tags.resize(
        DEMO_TARGET_TOKENS + DEMO_REFERENCE_TOKENS,
        Modality::Reference,
    );
    let x = TokenSequence::new(
        Matrix::gaussian(tags.len(), cfg.d_model, 1.0, &mut rng),
        tags,
    )?;
    let routing = block.route(&x)?;
    let report = RouteReport {
        weights: routing.weights(),
        active_set: routing.active_set(),
        backbone_index: routing.backbone_index(),
    };
    emit_json(out, &report)
}

fn train_toy(args: &TrainArgs, doc: &Settings, seed: u64, out: &mut dyn Write) -> Result<()> {
    let base = ToyRunConfig::default();
    let steps: usize = doc.pick(args.steps, "steps")?.unwrap_or(base.steps);
    if steps == 0 {
        return Err(Error::Config("--steps must be at least 1".into()));
    }
    let cfg = ToyRunConfig {
        categories: doc
            .pick(args.categories, "categories")?
            .unwrap_or(base.categories),
        per_category: doc
            .pick(args.per_category, "per_category")?
            .unwrap_or(base.per_category),
        steps,
        batch_size: doc
            .pick(args.batch_size, "batch_size")?
            .unwrap_or(base.batch_size),
        learning_rate: doc
            .pick(args.learning_rate, "learning_rate")?
            .unwrap_or(base.learning_rate),
        seed,
        model: doc.model(seed)?,
        augment: base.augment,
    };
    let curve: PathBuf = doc.require(args.out.clone(), "out")?;
    let weights: Option<PathBuf> = doc.pick(args.weights.clone(), "weights")?;

    let run = run_toy(&cfg)?;
    let mut buf = Vec::new();
    run.write_jsonl(&mut buf)?;
    fs::write(&curve, buf)?;
    if let Some(path) = weights {
        let mut bytes = Vec::new();
        write_block(&run.block, &mut bytes)?;
        fs::write(path, bytes)?;
    }
    emit_json(out, &run.final_report)
}

fn schedule(args: &ScheduleArgs, doc: &Settings, out: &mut dyn Write) -> Result<()> {
    let base = AnnealingSchedule::default();
    let sched = AnnealingSchedule::new(
        doc.pick(args.fine, "fine")?.unwrap_or(base.fine_steps),
        doc.pick(args.rough, "rough")?.unwrap_or(base.rough_steps),
        doc.pick(args.bbox, "bbox")?.unwrap_or(base.bbox_steps),
    );
    let step: usize = doc.require(args.step, "step")?;
    writeln!(out, "{}", sched.stage(step)?)?;
    Ok(())
}

fn emit_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    serde_json::to_writer(&mut *out, value).map_err(std::io::Error::from)?;
    writeln!(out)?;
    Ok(())
}
