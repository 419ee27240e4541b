//! All-modes versus selected-modes comparison over an SNR x seed grid.

use std::io::Write;

use super::{add_poisson_noise, make_phantom, psnr, quality, NoiseSpec, PhantomKind};
use crate::denoise::{adaptive_basis, filter, localize, DenoiseConfig, Method};
use crate::error::{Error, Result};
use crate::image::ImageGrid;
use crate::localization::ModeSelection;

pub const BENCH_CSV_HEADER: &str =
    "snr_db,seed,method,ssim,psnr_db,compression_ratio,t_eigen_s,t_fit_s,t_reconstruct_s";

#[derive(Clone, Debug, PartialEq)]
pub struct BenchConfig {
    pub phantom: PhantomKind,
    pub side: usize,
    /// Seed of the phantom itself; `seeds` drive the noise.
    pub phantom_seed: u64,
    pub snrs_db: Vec<f64>,
    pub seeds: Vec<u64>,
    /// Shared by both methods; its `method` field is ignored.
    pub denoise: DenoiseConfig,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            phantom: PhantomKind::Blocks,
            side: 64,
            phantom_seed: 7,
            snrs_db: vec![2.0, 5.0, 15.0],
            seeds: vec![1, 2, 3],
            denoise: DenoiseConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRow {
    pub snr_db: f64,
    pub seed: u64,
    pub method: Method,
    pub ssim: f64,
    pub psnr_db: f64,
    pub compression_ratio: f64,
    pub t_eigen_s: f64,
    pub t_fit_s: f64,
    pub t_reconstruct_s: f64,
}

impl BenchRow {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.snr_db,
            self.seed,
            self.method,
            self.ssim,
            self.psnr_db,
            self.compression_ratio,
            self.t_eigen_s,
            self.t_fit_s,
            self.t_reconstruct_s
        )
    }
}

/// One noise realization denoised both ways from a single eigenbasis.
#[derive(Clone, Debug, PartialEq)]
pub struct BenchCell {
    pub snr_db: f64,
    pub seed: u64,
    pub achieved_snr_db: f64,
    pub noisy_psnr_db: f64,
    pub noisy_ssim: f64,
    pub selection_fallback: bool,
    pub all_modes: BenchRow,
    pub selected_modes: BenchRow,
}

/// Adds noise to `clean`, builds the basis of the noisy image once and
/// reconstructs with every mode and with the selected modes.
///
/// Both methods see the same realization: the noise stream depends on seed
/// and SNR only.
pub fn bench_cell(clean: &ImageGrid<f64>, snr_db: f64, seed: u64, config: &DenoiseConfig) -> Result<BenchCell> {
    let noisy = add_poisson_noise(clean, &NoiseSpec::new(snr_db, seed))?;
    let adaptive = adaptive_basis(&noisy.image, config)?;
    let localization = localize(&adaptive.basis, config)?;
    let noisy_quality = quality(clean, &noisy.image)?;

    let row = |method: Method, selection: &ModeSelection<f64>, t_fit_s: f64| -> Result<BenchRow> {
        let (out, _, t_reconstruct_s) = filter(&noisy.image, &adaptive.basis, selection)?;
        let q = quality(clean, &out)?;
        Ok(BenchRow {
            snr_db,
            seed,
            method,
            ssim: q.ssim,
            psnr_db: q.psnr_db,
            compression_ratio: selection.compression_ratio(),
            t_eigen_s: adaptive.eigensolve_s,
            t_fit_s,
            t_reconstruct_s,
        })
    };
    let all_modes = row(Method::AllModes, &ModeSelection::all(adaptive.basis.dim()), 0.0)?;
    let selected_modes = row(Method::SelectedModes, &localization.selection, localization.fit_s)?;
    Ok(BenchCell {
        snr_db,
        seed,
        achieved_snr_db: noisy.achieved_snr_db,
        noisy_psnr_db: psnr(clean, &noisy.image)?,
        noisy_ssim: noisy_quality.ssim,
        selection_fallback: localization.selection_fallback,
        all_modes,
        selected_modes,
    })
}

/// Runs every (SNR, seed) cell in list order.
pub fn bench_run(config: &BenchConfig) -> Result<Vec<BenchCell>> {
    if config.snrs_db.is_empty() || config.seeds.is_empty() {
        return Err(Error::InvalidParameter(
            "bench needs at least one SNR and one seed".into(),
        ));
    }
    let clean = make_phantom(config.phantom, config.side, config.phantom_seed)?;
    let mut cells = Vec::with_capacity(config.snrs_db.len() * config.seeds.len());
    for &snr in &config.snrs_db {
        for &seed in &config.seeds {
            cells.push(bench_cell(&clean, snr, seed, &config.denoise)?);
        }
    }
    Ok(cells)
}

/// Header plus two rows per cell, all-modes first.
pub fn write_bench_csv<W: Write>(mut out: W, cells: &[BenchCell]) -> std::io::Result<()> {
    writeln!(out, "{BENCH_CSV_HEADER}")?;
    for cell in cells {
        writeln!(out, "{}", cell.all_modes.csv_row())?;
        writeln!(out, "{}", cell.selected_modes.csv_row())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_config() -> BenchConfig {
        BenchConfig {
            side: 16,
            snrs_db: vec![5.0, 15.0],
            seeds: vec![1, 2],
            ..BenchConfig::default()
        }
    }

    #[test]
    fn rows_and_csv() {
        let cells = bench_run(&small_config()).unwrap();
        assert_eq!(cells.len(), 4);
        let mut buf = Vec::new();
        write_bench_csv(&mut buf, &cells).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(BENCH_CSV_HEADER));
        let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
        assert_eq!(rows.len(), 2 * 2 * 2);
        for row in &rows {
            assert_eq!(row.len(), 9);
            if row[2] == "all_modes" {
                assert_eq!(row[5], "0");
                assert_eq!(row[7], "0");
            } else {
                assert_eq!(row[2], "selected_modes");
            }
        }
        for cell in &cells {
            assert!((cell.achieved_snr_db - cell.snr_db).abs() <= 0.3);
            // The unfiltered reconstruction reproduces the noisy input.
            assert!((cell.all_modes.psnr_db - cell.noisy_psnr_db).abs() < 1e-6);
        }
    }

    #[test]
    fn deterministic_apart_from_timings() {
        let strip = |cells: Vec<BenchCell>| -> Vec<(f64, f64, f64)> {
            cells
                .into_iter()
                .flat_map(|c| [c.all_modes, c.selected_modes])
                .map(|r| (r.psnr_db, r.ssim, r.compression_ratio))
                .collect()
        };
        let config = BenchConfig {
            snrs_db: vec![5.0],
            seeds: vec![3],
            ..small_config()
        };
        assert_eq!(strip(bench_run(&config).unwrap()), strip(bench_run(&config).unwrap()));
    }

    #[test]
    fn empty_grid_is_an_error() {
        let config = BenchConfig {
            snrs_db: vec![],
            ..small_config()
        };
        assert!(bench_run(&config).is_err());
    }
}
