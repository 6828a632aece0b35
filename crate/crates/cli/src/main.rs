//! `xpcc`: encode, decode, analyze and evaluate point cloud sequences with
//! the cross-sectional codec.

mod commands;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use xpcc_core::PipelineConfig;

#[derive(Parser, Debug)]
#[command(name = "xpcc", version, about = "Cross-sectional dynamic point cloud codec")]
struct Cli {
    /// Worker threads (defaults to one per core). Output does not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Encode one PLY file or a glob of frames into a bitstream.
    Encode {
        /// PLY path or glob pattern (frames are taken in sorted order).
        input: String,
        #[arg(short, long)]
        output: PathBuf,
        #[command(flatten)]
        tuning: Tuning,
    },
    /// Decode a bitstream into `frame_%04d.ply` files.
    Decode {
        stream: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Merge radius for overlap duplicates (default 0 lossless, 1 lossy).
        #[arg(long)]
        dedup_radius: Option<u32>,
    },
    /// Print the segmentation and projection of one frame as JSON.
    Analyze {
        input: PathBuf,
        #[command(flatten)]
        tuning: Tuning,
        /// Write the JSON here instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Also dump the packed maps as PGM/PPM images into this directory.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Compute per-frame rate and quality, optionally over a qstep ladder.
    Evaluate {
        /// Original frames: PLY path or glob.
        #[arg(long)]
        original: String,
        /// Decoded frames (PLY path or glob). Reconstructed from the stream if omitted.
        #[arg(long)]
        decoded: Option<String>,
        /// Bitstream to evaluate. Not needed with `--ladder`.
        #[arg(long)]
        stream: Option<PathBuf>,
        /// Comma-separated qsteps; each is encoded, decoded and evaluated.
        #[arg(long, value_delimiter = ',')]
        ladder: Option<Vec<u32>>,
        #[arg(long)]
        csv: PathBuf,
        /// RD plot path for `--ladder` (defaults to the CSV path with `.svg`).
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Label written to the `sequence` column.
        #[arg(long)]
        sequence: Option<String>,
        #[command(flatten)]
        tuning: Tuning,
    },
}

/// Pipeline settings shared by the commands that run the encoder.
/// Flags override values from `--config`.
#[derive(Args, Debug, Default)]
struct Tuning {
    /// key=value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Manual segmentation into K sections.
    #[arg(long, conflicts_with = "auto")]
    sections: Option<u32>,
    /// Automatic segmentation.
    #[arg(long)]
    auto: bool,
    #[arg(long)]
    qstep_geom: Option<u32>,
    #[arg(long)]
    qstep_attr: Option<u32>,
    #[arg(long)]
    inter_period: Option<u32>,
    /// Reuse the previous frame's atlas placement when section sizes match.
    #[arg(long)]
    reuse_layout: bool,
    #[arg(long)]
    dedup_radius: Option<u32>,
    #[arg(long)]
    bit_depth: Option<u8>,
    #[arg(long)]
    frame_rate: Option<f64>,
}

impl Tuning {
    fn resolve(&self) -> Result<PipelineConfig> {
        let mut cfg = match &self.config {
            Some(path) => PipelineConfig::load(path).with_context(|| format!("reading config {}", path.display()))?,
            None => PipelineConfig::default(),
        };
        let mut overrides: Vec<(&str, String)> = Vec::new();
        if let Some(k) = self.sections {
            overrides.push(("sections", k.to_string()));
        }
        if self.auto {
            overrides.push(("auto", "true".into()));
        }
        if let Some(q) = self.qstep_geom {
            overrides.push(("geometry_qstep", q.to_string()));
        }
        if let Some(q) = self.qstep_attr {
            overrides.push(("attribute_qstep", q.to_string()));
        }
        if let Some(p) = self.inter_period {
            overrides.push(("inter_period", p.to_string()));
        }
        if self.reuse_layout {
            overrides.push(("reuse_layout", "true".into()));
        }
        if let Some(r) = self.dedup_radius {
            overrides.push(("dedup_radius", r.to_string()));
        }
        if let Some(b) = self.bit_depth {
            overrides.push(("bit_depth", b.to_string()));
        }
        if let Some(f) = self.frame_rate {
            overrides.push(("frame_rate", f.to_string()));
        }
        for (key, value) in overrides {
            cfg.set(key, &value).with_context(|| format!("--{} {value}", key.replace('_', "-")))?;
        }
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring the thread pool")?;
    }
    match cli.command {
        Command::Encode { input, output, tuning } => commands::encode(&input, &output, &tuning.resolve()?),
        Command::Decode { stream, output, dedup_radius } => commands::decode(&stream, &output, dedup_radius),
        Command::Analyze { input, tuning, output, dump } => {
            commands::analyze(&input, &tuning.resolve()?, output.as_deref(), dump.as_deref())
        }
        Command::Evaluate { original, decoded, stream, ladder, csv, svg, sequence, tuning } => {
            let cfg = tuning.resolve()?;
            let label = sequence.unwrap_or_else(|| commands::sequence_label(&original));
            match ladder {
                Some(qs) => {
                    let svg = svg.unwrap_or_else(|| csv.with_extension("svg"));
                    commands::evaluate_ladder(&original, &qs, &cfg, &label, &csv, &svg)
                }
                None => {
                    let stream = stream.context("--stream is required unless --ladder is given")?;
                    commands::evaluate_stream(&original, decoded.as_deref(), &stream, &cfg, &label, &csv)
                }
            }
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("XPCC_LOG", "warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
