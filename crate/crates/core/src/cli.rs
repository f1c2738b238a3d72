//! The `tfnet` command line: `gen`, `train`, `eval` and `replay`.
//!
//! Every run writes `run.json`, the fully resolved configuration, into its
//! output directory; `tfnet replay <run.json>` executes it again.
//!
//! Exit codes: 0 on success, 1 on runtime failures (I/O, non-finite loss,
//! missing weights), 2 on invalid arguments. `TFNET_THREADS` caps the worker
//! pool.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::baselines::{L1ProxConfig, OmpConfig};
use crate::dataset::{self, Dataset, SignalClass};
use crate::dcnn::{self, AdamConfig, Network, TrainConfig};
use crate::eval::{self, CaseStudy, MethodKind, MethodSpec};
use crate::seed;
use crate::signals::NoiseLevel;
use crate::tfr;
use crate::{Error, Result};

pub const RUN_FILE: &str = "run.json";
pub const WEIGHTS_FILE: &str = "weights.tfw";
pub const LOSS_FILE: &str = "loss.csv";
pub const RESULTS_FILE: &str = "results.csv";

#[derive(Debug, Parser)]
#[command(name = "tfnet", version, about = "Crossterm-free time-frequency representations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, PartialEq, Subcommand, Serialize, Deserialize)]
#[serde(tag = "subcommand", rename_all = "lowercase")]
pub enum Command {
    /// Generate a labelled dataset.
    Gen(GenArgs),
    /// Train a network on one or more datasets.
    Train(TrainArgs),
    /// Score methods on the case studies.
    Eval(EvalArgs),
    /// Re-run a recorded `run.json`.
    #[serde(skip)]
    Replay { run_file: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct GenArgs {
    /// two-nlfm | lfm-plus-sfm
    #[arg(long)]
    pub class: SignalClass,
    /// Input SNR in dB, or `inf`.
    #[arg(long, default_value = "inf", allow_negative_numbers = true)]
    pub snr: NoiseLevel,
    #[arg(long, default_value_t = 1500)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct TrainArgs {
    /// Dataset directory; repeat to pool several.
    #[arg(long, required = true)]
    pub data: Vec<PathBuf>,
    #[arg(long, default_value_t = 50)]
    pub epochs: usize,
    #[arg(long, default_value_t = dcnn::DEFAULT_BATCH)]
    pub batch: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub lr: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = dcnn::DEFAULT_DEPTH)]
    pub depth: usize,
    #[arg(long, default_value_t = dcnn::DEFAULT_CHANNELS)]
    pub channels: usize,
    #[arg(long, default_value_t = dcnn::DEFAULT_KERNEL)]
    pub kernel: usize,
    /// Epochs without validation improvement before stopping.
    #[arg(long, default_value_t = 10)]
    pub patience: usize,
    /// Cap on optimizer steps.
    #[arg(long)]
    pub max_steps: Option<usize>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
pub struct EvalArgs {
    /// Case study 1, 2 or 3; repeatable (default: all).
    #[arg(long)]
    pub case: Vec<CaseStudy>,
    /// wvd | omp | l1prox | dcnn; repeatable (default: wvd, omp, l1prox).
    #[arg(long)]
    pub method: Vec<MethodKind>,
    /// DCNN weight file; repeat with one file per SNR.
    #[arg(long)]
    pub weights: Vec<PathBuf>,
    /// SNR in dB or `inf`; repeatable (default: inf).
    #[arg(long, allow_negative_numbers = true)]
    pub snr: Vec<NoiseLevel>,
    #[arg(long, default_value_t = eval::DEFAULT_TRIALS)]
    pub trials: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Write PGM renders of the last trial of every row.
    #[arg(long)]
    pub render: bool,
}

/// Failure of a subcommand, with its exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(msg) => CliError::Usage(msg),
            other => CliError::Runtime(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "invalid arguments: {m}"),
            CliError::Runtime(e) => write!(f, "{e}"),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn write_run_file(dir: &Path, command: &Command) -> Result<()> {
    fs::create_dir_all(dir).map_err(Error::io(dir))?;
    let path = dir.join(RUN_FILE);
    let text = serde_json::to_string_pretty(command).expect("run config serializes");
    fs::write(&path, text + "\n").map_err(Error::io(&path))
}

fn cmd_gen(args: &GenArgs) -> CliResult<()> {
    if args.count < dataset::MIN_COUNT {
        return Err(CliError::Usage(format!("--count {} is below the minimum of {}", args.count, dataset::MIN_COUNT)));
    }
    let manifest = dataset::generate_dataset(args.class, args.snr, args.count, args.seed, &args.out)?;
    println!(
        "{}: {} samples ({} train / {} val)",
        args.out.join(dataset::MANIFEST_FILE).display(),
        manifest.count,
        manifest.train_count,
        manifest.val_count
    );
    Ok(())
}

fn cmd_train(args: &TrainArgs) -> CliResult<()> {
    if args.epochs == 0 || args.batch == 0 || args.depth == 0 || args.channels == 0 || args.kernel % 2 == 0 {
        return Err(CliError::Usage("epochs, batch, depth and channels must be positive and the kernel odd".into()));
    }
    if !(args.lr > 0.0 && args.lr.is_finite()) {
        return Err(CliError::Usage(format!("--lr {} must be positive", args.lr)));
    }
    let mut train_set = Vec::new();
    let mut val_set = Vec::new();
    let mut levels = Vec::new();
    for dir in &args.data {
        let data = Dataset::load(dir)?;
        levels.push(data.manifest.noise_snr_db);
        train_set.extend(data.train_samples());
        val_set.extend(data.val_samples());
    }
    let noise_level = levels.iter().all(|l| *l == levels[0]).then_some(levels[0]);

    let init_seed = seed::derive(args.seed, &[0]);
    let mut net = Network::<f32>::init(args.depth, args.channels, args.kernel, init_seed)?;
    net.meta.noise_level = noise_level;
    net.meta.train_seed = Some(args.seed);
    let config = TrainConfig {
        batch_size: args.batch,
        epochs: args.epochs,
        adam: AdamConfig {
            lr: args.lr,
            ..Default::default()
        },
        patience: args.patience,
        shuffle_seed: seed::derive(args.seed, &[1]),
        max_steps: args.max_steps,
    };
    eprintln!(
        "training {} parameters on {} samples ({} validation)",
        net.parameter_count(),
        train_set.len(),
        val_set.len()
    );
    let outcome = dcnn::train(net, &train_set, &val_set, &config, |e| {
        eprintln!("epoch {:>3}  train {:.6e}  val {:.6e}", e.epoch, e.train_loss, e.val_loss);
    })?;

    let weights = args.out.join(WEIGHTS_FILE);
    dcnn::save_weights(&outcome.network, &weights)?;
    let loss = args.out.join(LOSS_FILE);
    fs::write(&loss, outcome.history.to_csv()).map_err(Error::io(&loss))?;
    println!(
        "{}: best epoch {} (val loss {:.6e}), {} steps",
        weights.display(),
        outcome.best_epoch,
        outcome.best_val_loss,
        outcome.steps
    );
    Ok(())
}

fn dcnn_spec(args: &EvalArgs, snrs: &[NoiseLevel]) -> CliResult<MethodSpec> {
    if args.weights.is_empty() {
        return Err(CliError::Runtime(Error::Empty("--method dcnn requires --weights")));
    }
    let nets = args
        .weights
        .iter()
        .map(|p| dcnn::load_weights(p).map(Arc::new))
        .collect::<Result<Vec<_>>>()?;
    if let [net] = nets.as_slice() {
        return Ok(MethodSpec::Dcnn(snrs.iter().map(|&s| (s, net.clone())).collect()));
    }
    let mut pairs = Vec::new();
    for &snr in snrs {
        let matching: Vec<_> = nets.iter().filter(|n| n.meta.noise_level == Some(snr)).collect();
        match matching.as_slice() {
            [net] => pairs.push((snr, (*net).clone())),
            [] => return Err(CliError::Runtime(Error::InvalidArgument(format!("no weight file trained at SNR {snr}")))),
            _ => return Err(CliError::Usage(format!("several weight files trained at SNR {snr}"))),
        }
    }
    Ok(MethodSpec::Dcnn(pairs))
}

fn render_trial(dir: &Path, row: &eval::NmseReport, spec: &MethodSpec, seed_value: u64) -> Result<()> {
    fs::create_dir_all(dir).map_err(Error::io(dir))?;
    let last = row.trials - 1;
    let series = eval::trial_series(row.case, row.snr_db, seed_value, last);
    let estimate = spec.resolve(row.snr_db)?.estimate(&series)?;
    let stem = format!("case{}_snr{}", row.case, row.snr_db);
    eval::render_log_image(&tfr::ideal_tfr(&row.case.model())?, &dir.join(format!("case{}_model.pgm", row.case)))?;
    eval::render_log_image(&tfr::wvd(&series)?, &dir.join(format!("{stem}_input.pgm")))?;
    eval::render_log_image(&estimate, &dir.join(format!("{stem}_{}.pgm", row.method)))
}

fn cmd_eval(args: &EvalArgs) -> CliResult<()> {
    let cases = if args.case.is_empty() { CaseStudy::ALL.to_vec() } else { args.case.clone() };
    let snrs = if args.snr.is_empty() { vec![NoiseLevel::NOISE_FREE] } else { args.snr.clone() };
    let kinds = if args.method.is_empty() {
        vec![MethodKind::Wvd, MethodKind::Omp, MethodKind::L1Prox]
    } else {
        args.method.clone()
    };
    if args.trials == 0 {
        return Err(CliError::Usage("--trials must be at least 1".into()));
    }
    let methods = kinds
        .iter()
        .map(|k| match k {
            MethodKind::Wvd => Ok(MethodSpec::Wvd),
            MethodKind::Omp => Ok(MethodSpec::Omp(OmpConfig::for_len(eval::CASE_LEN))),
            MethodKind::L1Prox => Ok(MethodSpec::L1Prox(L1ProxConfig::default())),
            MethodKind::Dcnn => dcnn_spec(args, &snrs),
        })
        .collect::<CliResult<Vec<_>>>()?;

    let rows = eval::comparison_table(&cases, &snrs, &methods, args.trials, args.seed)?;
    let csv = eval::to_csv(&rows);
    fs::create_dir_all(&args.out).map_err(Error::io(&args.out))?;
    let path = args.out.join(RESULTS_FILE);
    fs::write(&path, &csv).map_err(Error::io(&path))?;
    print!("{csv}");
    if args.render {
        let dir = args.out.join("render");
        for row in &rows {
            let spec = methods.iter().find(|m| m.kind() == row.method).expect("method of a row");
            render_trial(&dir, row, spec, args.seed)?;
        }
    }
    Ok(())
}

fn output_dir(command: &Command) -> &Path {
    match command {
        Command::Gen(a) => &a.out,
        Command::Train(a) => &a.out,
        Command::Eval(a) => &a.out,
        Command::Replay { run_file } => run_file.parent().unwrap_or(Path::new(".")),
    }
}

/// Executes one parsed command (after writing its `run.json`).
pub fn execute(command: &Command) -> CliResult<()> {
    if let Command::Replay { run_file } = command {
        let text = fs::read_to_string(run_file).map_err(Error::io(run_file))?;
        let recorded: Command = serde_json::from_str(&text).map_err(Error::json(run_file))?;
        return execute(&recorded);
    }
    if let Command::Gen(a) = command {
        if a.count < dataset::MIN_COUNT {
            return cmd_gen(a);
        }
    }
    write_run_file(output_dir(command), command)?;
    match command {
        Command::Gen(a) => cmd_gen(a),
        Command::Train(a) => cmd_train(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Replay { .. } => unreachable!("handled above"),
    }
}

fn configure_threads() -> CliResult<()> {
    let Some(value) = std::env::var_os("TFNET_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .to_str()
        .and_then(|s| s.parse().ok())
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("TFNET_THREADS={value:?} is not a positive integer")))?;
    // Fails only if a pool already exists, in which case it is kept.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match configure_threads().and_then(|_| execute(&cli.command)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
