use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use rdbev::baselines::BaselineMethod;
use rdbev::dataset::Split;
use rdbev::pipeline::{
    generate_dataset, run_ablation, run_baseline, run_digest, run_evaluate, AblationTransform, BaselineOptions,
    GenerateConfig, WORKERS_ENV,
};
use rdbev::{Chirp, Error};

#[derive(Parser)]
#[command(
    name = "rdbev",
    version,
    about = "Radar RD-to-BEV dataset generation, baselines and evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a dataset directory.
    Generate {
        /// `key = value` generation config; flags below override it.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        frames: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_parser = ["0.5", "0.4", "0.35"])]
        resolution: Option<String>,
        #[arg(long, allow_negative_numbers = true)]
        snr_db: Option<f64>,
        #[arg(long)]
        split_ratio: Option<f64>,
    },
    /// Write baseline predictions for one split.
    Baseline {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, value_enum)]
        method: MethodArg,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "val")]
        split: SplitArg,
        /// Chirp beamformed by the oracle.
        #[arg(long, value_enum, default_value = "a")]
        chirp: ChirpArg,
    },
    /// Copy a dataset with an RD input transform applied.
    Ablate {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, value_enum)]
        transform: TransformArg,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score predictions and write report, summary and PR curves.
    Evaluate {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        predictions: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "val")]
        split: SplitArg,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Prior,
    RangeEnergy,
    Beamform,
}

#[derive(Clone, Copy, ValueEnum)]
enum SplitArg {
    Train,
    Val,
}

#[derive(Clone, Copy, ValueEnum)]
enum ChirpArg {
    A,
    B,
}

#[derive(Clone, Copy, ValueEnum)]
enum TransformArg {
    Ab,
    AOnly,
    BOnly,
    CollapseDoppler,
    CollapseRange,
}

impl From<SplitArg> for Split {
    fn from(s: SplitArg) -> Self {
        match s {
            SplitArg::Train => Split::Train,
            SplitArg::Val => Split::Val,
        }
    }
}

const EXIT_CONFIG: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_VALIDATION: u8 = 4;

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::TooFewSequences(_) => EXIT_CONFIG,
        Error::Io { .. } => EXIT_IO,
        _ => EXIT_VALIDATION,
    }
}

fn run(cli: Cli) -> rdbev::Result<()> {
    if let Ok(w) = std::env::var(WORKERS_ENV) {
        eprintln!("workers: {w} ({WORKERS_ENV})");
    }
    match cli.command {
        Command::Generate {
            config,
            out,
            frames,
            seed,
            resolution,
            snr_db,
            split_ratio,
        } => {
            let mut cfg = match &config {
                Some(p) => GenerateConfig::read(p)?,
                None => GenerateConfig::default(),
            };
            if let Some(v) = frames {
                cfg.frames = v;
            }
            if let Some(v) = seed {
                cfg.seed = v;
            }
            if let Some(v) = resolution {
                cfg.resolution = v.parse().expect("clap restricts the choices");
            }
            if let Some(v) = snr_db {
                cfg.snr_db = v;
            }
            if let Some(v) = split_ratio {
                cfg.split_ratio = v;
            }
            cfg.validate()?;
            println!("config digest: {}", cfg.digest());
            let s = generate_dataset(&cfg, &out)?;
            let g = cfg.grid();
            println!(
                "wrote {} frames ({} sequences, {} train / {} val) on a {}x{} grid to {}",
                s.frames,
                s.sequences,
                s.train_frames,
                s.val_frames,
                g.height,
                g.width,
                out.display()
            );
            println!("pos_frac over supervised cells: {:.4}", s.pos_frac());
        }
        Command::Baseline {
            dataset,
            method,
            out,
            split,
            chirp,
        } => {
            let method = match method {
                MethodArg::Prior => BaselineMethod::Prior,
                MethodArg::RangeEnergy => BaselineMethod::RangeEnergy,
                MethodArg::Beamform => BaselineMethod::Beamform,
            };
            let opts = BaselineOptions {
                method,
                split: split.into(),
                chirp: match chirp {
                    ChirpArg::A => Chirp::A,
                    ChirpArg::B => Chirp::B,
                },
            };
            println!(
                "config digest: {}",
                run_digest(&format!("baseline {opts:?} {}", dataset.display()))
            );
            let index = run_baseline(&dataset, &opts, &out)?;
            println!(
                "wrote {} {} predictions to {}",
                index.files.len(),
                method.name(),
                out.display()
            );
            if let Some(p) = index.meta.get("train_pos_frac") {
                println!("train pos_frac: {p}");
            }
        }
        Command::Ablate {
            dataset,
            transform,
            out,
        } => {
            let t: AblationTransform = match transform {
                TransformArg::Ab => AblationTransform::Identity,
                TransformArg::AOnly => AblationTransform::AOnly,
                TransformArg::BOnly => AblationTransform::BOnly,
                TransformArg::CollapseDoppler => AblationTransform::CollapseDoppler,
                TransformArg::CollapseRange => AblationTransform::CollapseRange,
            };
            println!(
                "config digest: {}",
                run_digest(&format!("ablate {} {}", t.name(), dataset.display()))
            );
            let m = run_ablation(&dataset, t, &out)?;
            println!("wrote {} {} frames to {}", m.entries.len(), t.name(), out.display());
        }
        Command::Evaluate {
            dataset,
            predictions,
            out,
            split,
        } => {
            let split: Split = split.into();
            println!(
                "config digest: {}",
                run_digest(&format!(
                    "evaluate {} {} {}",
                    dataset.display(),
                    predictions.display(),
                    split.name()
                ))
            );
            let (method, report) = run_evaluate(&dataset, &predictions, &out, split)?;
            print!("{}", report.to_text(&method));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
