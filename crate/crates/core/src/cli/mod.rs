//! The `qloc` command-line tool.
//!
//! Every command prints `key=value` lines on stdout, writes its files through
//! an [`OutputGuard`] and exits with 0 only when all of them were written.

mod commands;
mod config;
mod output;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::{CliConfig, Overrides};
pub use output::OutputGuard;

use crate::error::{Error, Result};
use crate::hamiltonian::LaplacianMode;
use crate::image::BitDepth;
use crate::noisebench::PhantomKind;

/// Exit status for failures inside a command; clap uses 2 for usage errors.
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "qloc", version, about = "Image denoising by quantum localization")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Denoise an image and write a report.
    Denoise(DenoiseArgs),
    /// Write the PR spectrum, histogram and their plots for an image.
    Analyze(AnalyzeArgs),
    /// Add Poisson noise at a target SNR.
    Noise(NoiseArgs),
    /// Print PSNR, SSIM and SNR of a test image against a reference.
    Metrics(MetricsArgs),
    /// Compare all-modes and selected-modes reconstructions on a phantom.
    Bench(BenchArgs),
    /// Repeat the analysis for several multipliers of the Planck constant.
    SweepHbar(SweepArgs),
    /// Write a synthetic phantom image.
    Phantom(PhantomArgs),
}

/// Pipeline settings shared by the commands that run it.
#[derive(Debug, Clone, Default, Args)]
pub struct PipelineFlags {
    /// Flat key=value file; flags given here override it.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// `literal` couples row ends to the next row start; `no_row_wrap` does not.
    #[arg(long, value_parser = parse_laplacian)]
    pub laplacian_mode: Option<LaplacianMode>,
    /// Multiplier on the estimated Planck constant.
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub mass: Option<f64>,
    /// `c` in the PR threshold `lambda0 - c * gamma`.
    #[arg(short = 'c', long = "threshold-multiplier")]
    pub threshold_multiplier: Option<f64>,
    /// Histogram bins for the Lorentzian fit.
    #[arg(long)]
    pub bins: Option<usize>,
    /// Smooth with this Gaussian sigma before building the basis.
    #[arg(long, value_name = "SIGMA")]
    pub smooth_sigma: Option<f64>,
    #[arg(long, value_name = "PIXELS")]
    pub smooth_radius: Option<usize>,
    /// Disable smoothing even if the config file enables it.
    #[arg(long)]
    pub no_smooth: bool,
    /// Largest operator dimension (pixel count) the eigensolver accepts.
    #[arg(long)]
    pub max_dim: Option<usize>,
}

impl PipelineFlags {
    fn overrides(&self, seed: Option<u64>) -> Overrides {
        Overrides {
            laplacian_mode: self.laplacian_mode,
            alpha: self.alpha,
            mass: self.mass,
            threshold_multiplier: self.threshold_multiplier,
            bin_count: self.bins,
            smoothing_sigma: self.smooth_sigma,
            smoothing_radius: self.smooth_radius,
            no_smoothing: self.no_smooth,
            max_dim: self.max_dim,
            seed,
        }
    }

    /// Defaults, then the config file, then flags.
    pub fn resolve(&self, seed: Option<u64>) -> Result<CliConfig> {
        let mut config = match &self.config {
            Some(path) => CliConfig::from_file(path)?,
            None => CliConfig::default(),
        };
        config.apply_overrides(&self.overrides(seed));
        Ok(config)
    }
}

#[derive(Debug, Args)]
pub struct DenoiseArgs {
    pub input: PathBuf,
    pub output: PathBuf,
    #[command(flatten)]
    pub pipeline: PipelineFlags,
    /// Reconstruct from every mode (the unfiltered baseline).
    #[arg(long)]
    pub all_modes: bool,
    /// Report file; defaults to the output path with a `.report.txt` extension.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Also write `mode_index,eigenvalue,participation_ratio,kept`.
    #[arg(long, value_name = "FILE")]
    pub spectrum_csv: Option<PathBuf>,
    /// Clean image; adds PSNR and SSIM of the output to the report.
    #[arg(long, value_name = "FILE")]
    pub reference: Option<PathBuf>,
    #[arg(long, default_value = "8", value_parser = parse_depth)]
    pub depth: BitDepth,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    pub input: PathBuf,
    #[command(flatten)]
    pub pipeline: PipelineFlags,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// File name prefix; defaults to the input file stem.
    #[arg(long)]
    pub prefix: Option<String>,
}

#[derive(Debug, Args)]
pub struct NoiseArgs {
    pub input: PathBuf,
    pub output: PathBuf,
    #[arg(long)]
    pub snr_db: f64,
    /// Overrides `seed` from the config file (default 0).
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
    #[arg(long, default_value = "8", value_parser = parse_depth)]
    pub depth: BitDepth,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    pub reference: PathBuf,
    pub test: PathBuf,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, default_value = "blocks", value_parser = parse_phantom)]
    pub phantom: PhantomKind,
    /// Comma-separated target SNRs in dB.
    #[arg(long, required = true, value_delimiter = ',', num_args = 1..)]
    pub snrs: Vec<f64>,
    /// Comma-separated noise seeds.
    #[arg(long, default_value = "1,2,3", value_delimiter = ',', num_args = 1..)]
    pub seeds: Vec<u64>,
    #[arg(long, default_value_t = 64)]
    pub side: usize,
    #[arg(long, default_value_t = 7)]
    pub phantom_seed: u64,
    #[command(flatten)]
    pub pipeline: PipelineFlags,
    /// CSV destination; stdout when absent.
    #[arg(long, short = 'o')]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    pub input: PathBuf,
    /// Comma-separated multipliers of the Planck constant.
    #[arg(long, default_value = "0.25,0.5,1,2,4", value_delimiter = ',', num_args = 1..)]
    pub alphas: Vec<f64>,
    #[command(flatten)]
    pub pipeline: PipelineFlags,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long)]
    pub prefix: Option<String>,
}

#[derive(Debug, Args)]
pub struct PhantomArgs {
    pub output: PathBuf,
    #[arg(long, default_value = "blocks", value_parser = parse_phantom)]
    pub kind: PhantomKind,
    #[arg(long, default_value_t = 64)]
    pub side: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[arg(long, default_value = "8", value_parser = parse_depth)]
    pub depth: BitDepth,
}

fn parse_laplacian(s: &str) -> std::result::Result<LaplacianMode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_phantom(s: &str) -> std::result::Result<PhantomKind, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_depth(s: &str) -> std::result::Result<BitDepth, String> {
    match s {
        "8" => Ok(BitDepth::Eight),
        "16" => Ok(BitDepth::Sixteen),
        _ => Err(format!("bit depth must be 8 or 16, got `{s}`")),
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = if e.use_stderr() {
                write!(stderr, "{}", e.render())
            } else {
                write!(stdout, "{}", e.render())
            };
            return code;
        }
    };
    match commands::execute(cli.command, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_FAILURE
        }
    }
}

pub fn run() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}
