//! Ground-depth pipelines: map generation, slope supervision, blending,
//! synthetic ground truth, and evaluation.

mod commands;
mod fileio;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use grounddepth::metrics::{CropSpec, DistanceBins};
use grounddepth::{Error, Result};

#[derive(Parser)]
#[command(
    name = "grounddepth",
    version,
    about = "Closed-form ground-depth maps, slope supervision, depth blending, and evaluation",
    after_help = "Set GROUNDDEPTH_THREADS to bound the worker-thread count.\n\
                  Exit codes: 0 success, 2 validation error, 3 I/O error, 4 numeric error."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct BinningArgs {
    /// Lowest slope bin in degrees
    #[arg(long, default_value_t = -5.0, allow_hyphen_values = true)]
    bin_min_deg: f64,
    /// Highest slope bin in degrees
    #[arg(long, default_value_t = 5.0, allow_hyphen_values = true)]
    bin_max_deg: f64,
    /// Number of evenly spaced slope bins
    #[arg(long, default_value_t = 11)]
    bin_count: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the ground-depth map for a calibration (planar, or sloped
    /// when a slope map is given)
    Ground {
        /// Calibration file (meters/pixels; see the format notes)
        calib: PathBuf,
        /// Optional slope map in radians (PFM) switching to the sloped formula
        #[arg(long)]
        slope: Option<PathBuf>,
        /// Output depth map (.pfm exact, or .png in the 16-bit KITTI convention)
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Render a synthetic terrain scene: depth, slope, and sparse samples
    Synth {
        /// Scene description (JSON: camera, terrain, frame size, meters)
        scene: PathBuf,
        /// Output directory for ground_depth.pfm, slope.pfm, sparse.txt
        #[arg(long)]
        out_dir: PathBuf,
        /// Number of sparse depth samples to draw
        #[arg(long, default_value_t = 200)]
        samples: usize,
        /// Seed for the reproducible sample draw
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Convert sparse ground depth (meters) into per-sample slope classes
    SlopeLabels {
        /// Calibration file
        calib: PathBuf,
        /// Sparse depth samples: lines of `u v z` (pixels, pixels, meters)
        sparse: PathBuf,
        /// Output label file: lines of `u v class alpha_deg flag`
        #[arg(short, long)]
        out: PathBuf,
        #[command(flatten)]
        binning: BinningArgs,
    },
    /// Blend ground depth with residual depth through an attention map
    Blend {
        /// Ground-depth map (.pfm or .png, meters)
        ground: PathBuf,
        /// Residual depth map (.pfm or .png, meters)
        residual: PathBuf,
        /// Attention weights in [0, 1] (PFM)
        attention: PathBuf,
        /// Output depth map (.pfm or .png)
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Evaluate a depth prediction against ground truth
    Eval {
        /// Predicted depth map (.pfm or .png, meters)
        pred: PathBuf,
        /// Ground truth: sparse text (`u v z`) or a dense map (.pfm/.png)
        gt: PathBuf,
        /// Depth cap in meters; ground truth beyond it is ignored
        #[arg(long, default_value_t = 80.0)]
        cap: f64,
        /// Evaluation crop: `garg`, `none`, or `top,bottom,left,right` fractions
        #[arg(long, default_value = "none")]
        crop: String,
        /// Distance-bin edges in meters, comma-separated (e.g. 0,20,40,60,80)
        #[arg(long)]
        bins: Option<String>,
        /// Point-cloud match distance in meters (used with --calib)
        #[arg(long, default_value_t = 0.1)]
        tau: f64,
        /// Calibration file enabling the 3D point-cloud metrics
        #[arg(long)]
        calib: Option<PathBuf>,
        /// Write the report as JSON to this path
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Rescale calibration intrinsics (and frame size) by per-axis factors
    Rescale {
        /// Calibration file
        calib: PathBuf,
        /// Horizontal scale factor (unitless, > 0)
        #[arg(allow_hyphen_values = true)]
        sx: f64,
        /// Vertical scale factor (unitless, > 0)
        #[arg(allow_hyphen_values = true)]
        sy: f64,
        /// Output calibration file
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Histogram slope labels over their classes
    SlopeHist {
        /// Label files (`u v class alpha_deg flag`)
        #[arg(required = true)]
        labels: Vec<PathBuf>,
        #[command(flatten)]
        binning: BinningArgs,
        /// Write the histogram as JSON to this path
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ground { calib, slope, out } => {
            commands::run_ground(&calib, slope.as_deref(), &out)
        }
        Command::Synth {
            scene,
            out_dir,
            samples,
            seed,
        } => commands::run_synth(&scene, &out_dir, samples, seed),
        Command::SlopeLabels {
            calib,
            sparse,
            out,
            binning,
        } => {
            let bins = commands::binning_from_degrees(
                binning.bin_min_deg,
                binning.bin_max_deg,
                binning.bin_count,
            )?;
            commands::run_slope_labels(&calib, &sparse, &out, &bins)
        }
        Command::Blend {
            ground,
            residual,
            attention,
            out,
        } => commands::run_blend(&ground, &residual, &attention, &out),
        Command::Eval {
            pred,
            gt,
            cap,
            crop,
            bins,
            tau,
            calib,
            json,
        } => {
            let opts = commands::EvalOptions {
                cap,
                crop: parse_crop(&crop)?,
                bins: bins.as_deref().map(parse_bins).transpose()?,
                tau,
                calib,
                json,
            };
            commands::run_eval(&pred, &gt, &opts)
        }
        Command::Rescale { calib, sx, sy, out } => commands::run_rescale(&calib, sx, sy, &out),
        Command::SlopeHist {
            labels,
            binning,
            json,
        } => {
            let bins = commands::binning_from_degrees(
                binning.bin_min_deg,
                binning.bin_max_deg,
                binning.bin_count,
            )?;
            commands::run_slope_hist(&labels, &bins, json.as_deref())
        }
    }
}

fn parse_crop(spec: &str) -> Result<Option<CropSpec<f64>>> {
    match spec {
        "none" => Ok(None),
        "garg" => Ok(Some(CropSpec::garg())),
        other => {
            let parts: Vec<&str> = other.split(',').collect();
            if parts.len() != 4 {
                return Err(Error::Validation(format!(
                    "crop must be 'garg', 'none', or four comma-separated fractions, got {other:?}"
                )));
            }
            let mut vals = [0.0f64; 4];
            for (v, part) in vals.iter_mut().zip(&parts) {
                *v = part.trim().parse().map_err(|_| {
                    Error::Validation(format!("crop fraction {part:?} is not a number"))
                })?;
            }
            CropSpec::new(vals[0], vals[1], vals[2], vals[3]).map(Some)
        }
    }
}

fn parse_bins(spec: &str) -> Result<DistanceBins<f64>> {
    let edges = spec
        .split(',')
        .map(|part| {
            part.trim()
                .parse::<f64>()
                .map_err(|_| Error::Validation(format!("bin edge {part:?} is not a number")))
        })
        .collect::<Result<Vec<f64>>>()?;
    DistanceBins::new(edges)
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Validation(_) | Error::DimensionMismatch(_) | Error::Parse(_) | Error::Format(_) => {
            2
        }
        Error::Io(_) => 3,
        Error::Numeric(_) => 4,
    }
}

fn init_thread_pool() -> Result<()> {
    if let Ok(raw) = std::env::var("GROUNDDEPTH_THREADS") {
        let threads: usize = raw.parse().map_err(|_| {
            Error::Validation(format!(
                "GROUNDDEPTH_THREADS must be a positive integer, got {raw:?}"
            ))
        })?;
        if threads == 0 {
            return Err(Error::Validation(
                "GROUNDDEPTH_THREADS must be at least 1".to_string(),
            ));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::Validation(format!("thread pool setup failed: {e}")))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = init_thread_pool().and_then(|()| run(cli));
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
