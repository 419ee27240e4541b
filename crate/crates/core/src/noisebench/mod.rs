//! Noise synthesis, image-quality metrics, synthetic phantoms and the
//! benchmark grid.

mod bench;
mod metrics;
mod noise;
mod phantom;

pub use bench::{bench_cell, bench_run, write_bench_csv, BenchCell, BenchConfig, BenchRow, BENCH_CSV_HEADER};
pub use metrics::{psnr, quality, snr_db, ssim, QualityMetrics, SSIM_K1, SSIM_K2, SSIM_SIGMA, SSIM_WINDOW};
pub use noise::{add_poisson_noise, NoiseSpec, NoisyImage, SCALE_RANGE, SNR_TOLERANCE_DB};
pub use phantom::{make_phantom, PhantomKind, MIN_PHANTOM_SIDE};
