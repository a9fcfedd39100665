//! `ged`: batch experiments with geodesic motion models on ERP video.

mod args;
mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use args::{parse_block, parse_q, parse_t, FrameArgs, ScalingArg, VariantArg};

#[derive(Debug, Parser)]
#[command(
    name = "ged",
    version,
    about = "Geodesic motion compensation toolkit for 360-degree video"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Render a synthetic dolly sequence with ground-truth flow and motion.
    Synth(SynthArgs),
    /// Predict a frame with one motion vector and report per-block SAD.
    Warp(WarpArgs),
    /// Run the block motion search for several predictors over a sequence.
    Compare(CompareArgs),
    /// Estimate per-frame camera motion directions.
    Camest(CamestArgs),
    /// Encode or decode camera-motion streams.
    Camcode {
        #[command(subcommand)]
        op: CamcodeOp,
    },
    /// Quality, BD-rate and complexity figures.
    Metrics {
        #[command(subcommand)]
        op: MetricsOp,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SceneArg {
    Sphere,
    Cylinder,
    Box,
}

#[derive(Debug, clap::Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 512)]
    width: usize,
    #[arg(long, default_value_t = 256)]
    height: usize,
    #[arg(long, default_value_t = 8)]
    frames: usize,
    #[arg(long = "bitdepth", default_value_t = 8)]
    bit_depth: u8,
    /// Write luma only.
    #[arg(long)]
    mono: bool,
    /// Initial heading x,y,z.
    #[arg(long, value_parser = parse_q, default_value = "0,0,1")]
    q: ged_core::UnitVector3,
    /// Camera displacement per frame (scene units).
    #[arg(long, default_value_t = 0.02)]
    step: f64,
    /// Heading rotation per frame, degrees.
    #[arg(long, default_value_t = 0.0)]
    drift: f64,
    #[arg(long, value_enum, default_value = "sphere")]
    scene: SceneArg,
    /// Sphere / cylinder radius, or box half-width.
    #[arg(long, default_value_t = 2.0)]
    size: f64,
    /// Cylinder / box half-length along the heading.
    #[arg(long, default_value_t = 4.0)]
    length: f64,
    #[arg(long, default_value_t = 12.0)]
    texture_scale: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value = "dolly")]
    name: String,
}

#[derive(Debug, clap::Args)]
struct ModelArgs {
    #[arg(long, value_enum, default_value = "gcg")]
    variant: VariantArg,
    #[arg(long, value_enum, default_value = "global")]
    scaling: ScalingArg,
    /// Radians per motion-vector unit (default pi/height).
    #[arg(long)]
    delta: Option<f64>,
}

#[derive(Debug, clap::Args)]
struct WarpArgs {
    #[command(flatten)]
    frame: FrameArgs,
    #[command(flatten)]
    model: ModelArgs,
    /// Reference sequence.
    #[arg(long = "ref")]
    reference: PathBuf,
    #[arg(long, default_value_t = 0)]
    ref_frame: usize,
    /// Sequence holding the frame to predict.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 0)]
    frame_index: usize,
    #[arg(long, value_parser = parse_q, default_value = "0,0,1")]
    q: ged_core::UnitVector3,
    #[arg(long, value_parser = parse_t, allow_hyphen_values = true, default_value = "0,0")]
    t: [f64; 2],
    #[arg(long, value_parser = parse_block, default_value = "16x16")]
    block: (usize, usize),
    /// Predicted frame (raw YUV).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-block SAD CSV.
    #[arg(long)]
    stats: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
struct CompareArgs {
    #[command(flatten)]
    frame: FrameArgs,
    #[arg(long)]
    input: PathBuf,
    /// Constant heading x,y,z (ignored with --q-csv).
    #[arg(long, value_parser = parse_q, default_value = "0,0,1")]
    q: ged_core::UnitVector3,
    /// Per-pair heading; row n is the motion from frame n to n + 1.
    #[arg(long)]
    q_csv: Option<PathBuf>,
    #[arg(long, value_parser = parse_block, default_value = "16x16")]
    block: (usize, usize),
    #[arg(long, default_value_t = 2.0)]
    range: f64,
    #[arg(long, default_value_t = 1.0)]
    step: f64,
    #[arg(long)]
    delta: Option<f64>,
    /// Predictors, in tie-break order.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "trans,orig,gcg,gcl")]
    models: Vec<VariantArg>,
    /// Use only the first N frames.
    #[arg(long)]
    frames: Option<usize>,
    /// Per-block CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
struct CamestArgs {
    /// Flow files, one per frame pair.
    #[arg(long)]
    flow: Vec<PathBuf>,
    /// Correspondence files ("u1 v1 u2 v2" per line), one per frame pair.
    #[arg(long, conflicts_with = "flow")]
    pairs: Vec<PathBuf>,
    /// Frame size, required with --pairs.
    #[arg(long)]
    width: Option<usize>,
    #[arg(long)]
    height: Option<usize>,
    /// Flow subsampling stride for the eight-point step.
    #[arg(long, default_value_t = 4)]
    stride: usize,
    /// Refine each estimate against the dense flow.
    #[arg(long, overrides_with = "no_finetune")]
    finetune: bool,
    #[arg(long)]
    no_finetune: bool,
    #[arg(long, default_value_t = 5.0)]
    grid_radius_deg: f64,
    #[arg(long, default_value_t = 6)]
    levels: u32,
    /// Ground-truth q CSV; adds angular-error columns.
    #[arg(long)]
    truth: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum CamcodeOp {
    /// q CSV → GCMH stream; prints the bit report.
    Encode {
        #[arg(long)]
        q: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// GCMH stream → q CSV.
    Decode {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
enum MetricsOp {
    /// Per-frame WS-PSNR between two sequences.
    Wspsnr {
        #[command(flatten)]
        frame: FrameArgs,
        #[arg(long = "ref")]
        reference: PathBuf,
        #[arg(long)]
        input: PathBuf,
        /// Combine Y, Cb, Cr with weights 6:1:1.
        #[arg(long)]
        yuv: bool,
    },
    /// BD-rate of test curves against anchor curves (RD CSV files).
    Bdrate {
        #[arg(long)]
        anchor: PathBuf,
        #[arg(long)]
        test: PathBuf,
    },
    /// Per-block operation counts of a model kernel.
    Opcount {
        #[arg(long, value_enum)]
        variant: VariantArg,
        #[arg(long, value_enum, default_value = "global")]
        scaling: ScalingArg,
        #[arg(long, value_parser = parse_block, default_value = "8x8")]
        block: (usize, usize),
    },
    /// BD-rate table from an RD CSV with labels "sequence/model".
    Report {
        #[arg(long)]
        rd: PathBuf,
        #[arg(long, default_value = "trans")]
        anchor: String,
        /// Camera-motion bits per model, e.g. gcg=1200.
        #[arg(long = "camera-bits", value_delimiter = ',')]
        camera_bits: Vec<String>,
        #[arg(long)]
        markdown: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
