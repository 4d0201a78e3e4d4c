//! Command-line jobs: `synth`, `augment`, `train`, `eval`, `ensemble`.
//!
//! Exit codes: 0 success, 1 runtime or data failure, 2 usage or config error.

pub mod config;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::audio::{
    augment_stream, maybe_augment, read_wav, resample, write_wav, AugmentChain, Augmentation,
    Waveform, DEFAULT_SAMPLE_RATE,
};
use crate::dataio::{
    gen_synthetic, load_manifest, stratified_split, write_features, ClassTable, Manifest,
    ManifestRecord, Sample, SyntheticSpec,
};
use crate::ensemble::{ensemble_evaluate, Ensemble, EnsembleMember};
use crate::error::Error;
use crate::model::Checkpoint;
use crate::numerics::Mode;
use crate::train::report::{confusion_csv, history_csv, metrics_table};
use crate::train::{evaluate, train_with_observer, Metrics};

pub use config::RunConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "emopool",
    version,
    about = "Attention-pooling emotion classifier toolkit"
)]
struct Cli {
    #[command(flatten)]
    shared: SharedArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct SharedArgs {
    /// Run configuration file (train only)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Data-pipeline threads; results do not depend on this
    #[arg(long, global = true, default_value_t = 1)]
    workers: usize,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic feature corpus with manifest and class table
    Synth(SynthArgs),
    /// Apply streaming augmentation to a directory of WAV files
    Augment(AugmentArgs),
    /// Train a head from a run configuration
    Train,
    /// Score one checkpoint on a manifest
    Eval(EvalArgs),
    /// Score a hard-voting ensemble of checkpoints on a manifest
    Ensemble(EnsembleArgs),
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 6)]
    classes: usize,
    /// Comma-separated per-class sample counts
    #[arg(long, value_delimiter = ',')]
    counts: Option<Vec<usize>>,
    #[arg(long, default_value_t = 64)]
    dim: usize,
    /// Speech frame-count range, `MIN-MAX`
    #[arg(long, default_value = "8-16", value_parser = parse_usize_range)]
    speech_frames: (usize, usize),
    /// Text frame-count range, `MIN-MAX`
    #[arg(long, default_value = "4-8", value_parser = parse_usize_range)]
    text_frames: (usize, usize),
    #[arg(long, default_value_t = 5.0)]
    separation: f64,
    #[arg(long, default_value_t = 1.0)]
    noise: f64,
}

#[derive(Debug, Args)]
struct AugmentArgs {
    /// Directory of input `.wav` files
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 0.3)]
    probability: f64,
    #[arg(long, value_delimiter = ',', default_value = "0.9,1.0,1.1")]
    speed_factors: Vec<f64>,
    /// Reverberation T60 range in seconds, `MIN-MAX`
    #[arg(long, default_value = "0.1-0.5", value_parser = parse_f64_range)]
    t60: (f64, f64),
    /// Noise SNR range in dB, `MIN-MAX`
    #[arg(long, default_value = "5-20", value_parser = parse_f64_range)]
    snr: (f64, f64),
    /// Directory of background-noise WAVs; white noise when omitted
    #[arg(long)]
    noise_dir: Option<PathBuf>,
    /// Epoch index mixed into each file's random stream
    #[arg(long, default_value_t = 0)]
    epoch: u64,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long)]
    manifest: PathBuf,
    /// Class table file; the six built-in emotions when omitted
    #[arg(long)]
    classes: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EnsembleArgs {
    /// Member checkpoints (odd count, at least 3)
    #[arg(required = true)]
    checkpoints: Vec<PathBuf>,
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    classes: Option<PathBuf>,
}

fn parse_range<T: std::str::FromStr + PartialOrd + Copy>(s: &str) -> Result<(T, T), String> {
    let (lo, hi) = s
        .split_once('-')
        .ok_or_else(|| format!("expected MIN-MAX, got {s:?}"))?;
    let lo: T = lo
        .trim()
        .parse()
        .map_err(|_| format!("bad range start in {s:?}"))?;
    let hi: T = hi
        .trim()
        .parse()
        .map_err(|_| format!("bad range end in {s:?}"))?;
    if lo > hi {
        return Err(format!("empty range {s:?}"));
    }
    Ok((lo, hi))
}

fn parse_usize_range(s: &str) -> Result<(usize, usize), String> {
    parse_range(s)
}

fn parse_f64_range(s: &str) -> Result<(f64, f64), String> {
    parse_range(s)
}

/// A failure with the exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn failure(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_FAILURE,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Config(_) => EXIT_USAGE,
            _ => EXIT_FAILURE,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult<T = ()> = Result<T, CliError>;

/// Parses `args` (program name first), runs the job and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

fn dispatch(cli: Cli) -> CliResult {
    let shared = cli.shared;
    if shared.workers == 0 {
        return Err(CliError::usage("--workers must be at least 1"));
    }
    if shared.config.is_some() && !matches!(cli.command, Command::Train) {
        return Err(CliError::usage("--config is only read by `train`"));
    }
    match cli.command {
        Command::Synth(args) => cmd_synth(&shared, args),
        Command::Augment(args) => cmd_augment(&shared, args),
        Command::Train => cmd_train(&shared),
        Command::Eval(args) => cmd_eval(&shared, args),
        Command::Ensemble(args) => cmd_ensemble(&shared, args),
    }
}

fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> CliResult {
    fs::write(path, contents).map_err(|e| Error::io(path, e).into())
}

fn create_dir(path: &Path) -> CliResult {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e).into())
}

fn cmd_synth(shared: &SharedArgs, args: SynthArgs) -> CliResult {
    let out = shared
        .out
        .clone()
        .ok_or_else(|| CliError::usage("synth needs --out"))?;
    let counts = match args.counts {
        Some(c) if c.len() == args.classes => c,
        Some(c) => {
            return Err(CliError::usage(format!(
                "--counts has {} entries for {} classes",
                c.len(),
                args.classes
            )))
        }
        None if args.classes == SyntheticSpec::default().classes() => {
            SyntheticSpec::default().counts
        }
        None => {
            return Err(CliError::usage(
                "--counts is required when --classes differs from 6",
            ))
        }
    };
    let spec = SyntheticSpec {
        counts,
        dim: args.dim,
        speech_frames: args.speech_frames,
        text_frames: args.text_frames,
        separation: args.separation,
        noise: args.noise,
        seed: shared.seed.unwrap_or(0),
    };
    let set = gen_synthetic(&spec)?;

    let features = out.join("features");
    create_dir(&features)?;
    let encoded = set
        .samples
        .iter()
        .map(|s| Ok((write_features(&s.speech)?, write_features(&s.text)?)))
        .collect::<Result<Vec<_>, Error>>()?;
    let mut records = Vec::with_capacity(set.samples.len());
    for (s, (speech, text)) in set.samples.iter().zip(encoded) {
        let speech_rel = PathBuf::from("features").join(format!("{}.speech.emof", s.id));
        let text_rel = PathBuf::from("features").join(format!("{}.text.emof", s.id));
        write_file(&out.join(&speech_rel), speech)?;
        write_file(&out.join(&text_rel), text)?;
        records.push(ManifestRecord {
            id: s.id.clone(),
            speech: speech_rel,
            text: text_rel,
            label: set.classes.name(s.label).to_string(),
        });
    }
    let manifest = Manifest {
        records,
        classes: set.classes.clone(),
    };
    write_file(&out.join("manifest.csv"), manifest.to_csv()?)?;
    write_file(&out.join("classes.txt"), set.classes.to_text())?;
    print!("{}", synth_summary(&set.samples, &set.classes));
    Ok(())
}

fn synth_summary(samples: &[Sample], classes: &ClassTable) -> String {
    let mut out = String::new();
    writeln!(out, "{} samples, {} classes", samples.len(), classes.len()).unwrap();
    for k in 0..classes.len() {
        let n = samples.iter().filter(|s| s.label == k).count();
        writeln!(out, "  {:<10} {n:>6}", classes.name(k)).unwrap();
    }
    let frames: Vec<usize> = samples
        .iter()
        .map(|s| s.speech.len() + s.text.len())
        .collect();
    let lo = *frames.iter().min().unwrap_or(&0);
    let hi = *frames.iter().max().unwrap_or(&0);
    let mean = frames.iter().sum::<usize>() as f64 / frames.len().max(1) as f64;
    writeln!(
        out,
        "fused frames per sample: min {lo}, max {hi}, mean {mean:.2}"
    )
    .unwrap();
    let bins = 8usize;
    let width = ((hi - lo) / bins + 1).max(1);
    let mut hist = vec![0usize; bins];
    for f in &frames {
        hist[((f - lo) / width).min(bins - 1)] += 1;
    }
    let peak = *hist.iter().max().unwrap_or(&1).max(&1);
    for (b, count) in hist.iter().enumerate() {
        let start = lo + b * width;
        let bar = "#".repeat(count * 40 / peak);
        writeln!(
            out,
            "  {:>4}-{:<4} {count:>6} {bar}",
            start,
            start + width - 1
        )
        .unwrap();
    }
    out
}

fn wav_files(dir: &Path) -> CliResult<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && p.extension()
                    .is_some_and(|ext| ext.eq_ignore_ascii_case("wav"))
        })
        .collect();
    files.sort();
    Ok(files)
}

fn load_wav_16k(path: &Path) -> Result<Waveform, Error> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    resample(&read_wav(&bytes)?, DEFAULT_SAMPLE_RATE)
}

fn cmd_augment(shared: &SharedArgs, args: AugmentArgs) -> CliResult {
    let out = shared
        .out
        .clone()
        .ok_or_else(|| CliError::usage("augment needs --out"))?;
    let noise_bank = match &args.noise_dir {
        Some(dir) => wav_files(dir)?
            .iter()
            .map(|p| load_wav_16k(p))
            .collect::<Result<Vec<_>, Error>>()?,
        None => Vec::new(),
    };
    let chain = AugmentChain {
        probability: args.probability,
        speed_factors: args.speed_factors,
        t60_range: args.t60,
        snr_range_db: args.snr,
        noise_bank,
    };
    chain.validate()?;
    let seed = shared.seed.unwrap_or(0);
    let files = wav_files(&args.input)?;
    create_dir(&out)?;

    let job = |path: &PathBuf| -> Result<(Vec<u8>, Option<Augmentation>), Error> {
        let name = path.file_name().unwrap().to_string_lossy();
        let wave = load_wav_16k(path)?;
        let mut rng = augment_stream(seed, args.epoch, &name);
        let (augmented, applied) = maybe_augment(&wave, &chain, &mut rng, Mode::Train)?;
        Ok((write_wav(&augmented), applied))
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(shared.workers)
        .build()
        .map_err(|e| CliError::failure(e.to_string()))?;
    let results: Vec<_> = pool.install(|| files.par_iter().map(job).collect());

    let mut log = String::from("file,transform,parameters\n");
    let mut failed = 0;
    for (path, result) in files.iter().zip(results) {
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        match result {
            Ok((bytes, applied)) => {
                write_file(&out.join(&name), bytes)?;
                match applied {
                    Some(a) => writeln!(log, "{name},{},{a}", a.name()).unwrap(),
                    None => writeln!(log, "{name},none,").unwrap(),
                }
            }
            Err(e) => {
                failed += 1;
                eprintln!("{name}: {e}");
                writeln!(log, "{name},error,").unwrap();
            }
        }
    }
    write_file(&out.join("augment_log.csv"), log)?;
    println!("{} files, {} failed", files.len(), failed);
    if failed > 0 {
        return Err(CliError::failure(format!(
            "{failed} file(s) could not be processed"
        )));
    }
    Ok(())
}

fn load_classes(path: Option<&Path>) -> Result<ClassTable, Error> {
    match path {
        Some(p) => ClassTable::load(p),
        None => Ok(ClassTable::default()),
    }
}

/// Writes a manifest for `samples` whose feature paths are absolute.
fn split_manifest(samples: &[Sample], source: &Manifest, base: &Path) -> Result<String, Error> {
    let base = fs::canonicalize(base).map_err(|e| Error::io(base, e))?;
    let records = samples
        .iter()
        .map(|s| {
            let r = source
                .records
                .iter()
                .find(|r| r.id == s.id)
                .expect("sample comes from this manifest");
            ManifestRecord {
                id: r.id.clone(),
                speech: base.join(&r.speech),
                text: base.join(&r.text),
                label: r.label.clone(),
            }
        })
        .collect();
    Manifest {
        records,
        classes: source.classes.clone(),
    }
    .to_csv()
}

fn cmd_train(shared: &SharedArgs) -> CliResult {
    let path = shared
        .config
        .as_ref()
        .ok_or_else(|| CliError::usage("train needs --config"))?;
    let mut config = RunConfig::load(path).map_err(|e| match e {
        Error::Io { .. } => CliError::usage(e.to_string()),
        e => e.into(),
    })?;
    if let Some(seed) = shared.seed {
        config.train.seed = seed;
    }
    if let Some(out) = &shared.out {
        config.out = out.clone();
    }
    config.train.workers = shared.workers;

    let classes = load_classes(config.classes.as_deref())?;
    let (manifest, samples) = load_manifest(&config.manifest, &classes)?;
    let manifest_dir = config.manifest.parent().unwrap_or(Path::new("."));
    let (train_set, val_set, split_files) = match &config.val_manifest {
        Some(val_path) => {
            let (_, val) = load_manifest(val_path, &classes)?;
            (samples, val, None)
        }
        None => {
            let (train, val) = stratified_split(
                &samples,
                classes.len(),
                config.split_fraction,
                config.train.seed,
            );
            let files = (
                split_manifest(&train, &manifest, manifest_dir)?,
                split_manifest(&val, &manifest, manifest_dir)?,
            );
            (train, val, Some(files))
        }
    };

    create_dir(&config.out)?;
    write_file(&config.out.join("resolved_config.txt"), config.resolved())?;
    if let Some((train_csv, val_csv)) = split_files {
        write_file(&config.out.join("train_split.csv"), train_csv)?;
        write_file(&config.out.join("val_split.csv"), val_csv)?;
    }
    println!(
        "training on {} samples, validating on {} ({} classes)",
        train_set.len(),
        val_set.len(),
        classes.len()
    );
    let outcome = train_with_observer(&train_set, &val_set, &classes, &config.train, |r| {
        println!(
            "epoch {:>3}  loss {:.5}  val macro F1 {:.4}  lr {:e}",
            r.epoch, r.train_loss, r.val_macro_f1, r.lr
        );
    })?;

    write_file(
        &config.out.join("history.csv"),
        history_csv(&outcome.history),
    )?;
    outcome.best.save(&config.out.join("best.emck"))?;
    write_report(&config.out, &outcome.best_metrics, &classes)?;
    println!(
        "best validation macro F1 {:.4} at epoch {}",
        outcome.best.meta.best_val_f1, outcome.best.meta.epoch
    );
    Ok(())
}

fn write_report(out: &Path, metrics: &Metrics, classes: &ClassTable) -> CliResult {
    let table = metrics_table(metrics, classes);
    print!("{table}");
    write_file(&out.join("metrics.txt"), table)?;
    write_file(
        &out.join("confusion.csv"),
        confusion_csv(&metrics.confusion, classes),
    )
}

fn check_compatible(ck: &Checkpoint, classes: &ClassTable, what: &str) -> CliResult {
    let dims = ck.params.dims();
    if dims.classes != classes.len() {
        return Err(CliError::failure(format!(
            "{what} predicts {} classes but the class table has {}",
            dims.classes,
            classes.len()
        )));
    }
    Ok(())
}

fn data_error(e: Error) -> CliError {
    // Mismatches between a checkpoint and the data are runtime failures.
    CliError::failure(e.to_string())
}

fn cmd_eval(shared: &SharedArgs, args: EvalArgs) -> CliResult {
    let out = shared.out.clone().unwrap_or_else(|| PathBuf::from("."));
    let classes = load_classes(args.classes.as_deref())?;
    let checkpoint = Checkpoint::load(&args.checkpoint)?;
    check_compatible(&checkpoint, &classes, "checkpoint")?;
    let (_, samples) = load_manifest(&args.manifest, &classes)?;
    let metrics = evaluate(&checkpoint.params, &samples, shared.workers).map_err(data_error)?;
    create_dir(&out)?;
    write_report(&out, &metrics, &classes)
}

fn cmd_ensemble(shared: &SharedArgs, args: EnsembleArgs) -> CliResult {
    let m = args.checkpoints.len();
    if m < 3 || m.is_multiple_of(2) {
        return Err(CliError::usage(format!(
            "hard voting needs an odd number of at least 3 checkpoints, got {m}"
        )));
    }
    let out = shared.out.clone().unwrap_or_else(|| PathBuf::from("."));
    let classes = load_classes(args.classes.as_deref())?;
    let checkpoints = args
        .checkpoints
        .iter()
        .map(|p| Checkpoint::load(p))
        .collect::<Result<Vec<_>, Error>>()?;
    let embed = checkpoints[0].params.dims().embed;
    for (i, ck) in checkpoints.iter().enumerate() {
        check_compatible(ck, &classes, &format!("checkpoint {}", i + 1))?;
        if ck.params.dims().embed != embed {
            return Err(CliError::failure(format!(
                "checkpoint {} expects {}-dimensional features, checkpoint 1 expects {embed}",
                i + 1,
                ck.params.dims().embed
            )));
        }
    }
    let ensemble = Ensemble::new(checkpoints.into_iter().map(EnsembleMember::new).collect())?;
    let (_, samples) = load_manifest(&args.manifest, &classes)?;
    let report = ensemble_evaluate(&ensemble, &samples, shared.workers).map_err(data_error)?;

    println!("{:<40} {:>10} {:>10}", "model", "val F1", "macro F1");
    for ((path, member), metrics) in args
        .checkpoints
        .iter()
        .zip(ensemble.members())
        .zip(&report.members)
    {
        println!(
            "{:<40} {:>10.4} {:>10.4}",
            path.display(),
            member.val_f1(),
            metrics.macro_f1
        );
    }
    println!(
        "{:<40} {:>10} {:>10.4}",
        "ensemble (hard voting)", "", report.ensemble.macro_f1
    );
    create_dir(&out)?;
    write_report(&out, &report.ensemble, &classes)
}
