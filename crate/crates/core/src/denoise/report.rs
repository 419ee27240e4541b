use std::io::Write;

use super::{AdaptiveBasis, DenoiseConfig, Localization, Method};
use crate::error::Result;
use crate::hamiltonian::LaplacianMode;
use crate::image::ImageGrid;
use crate::localization::ModeSelection;
use crate::noisebench::{psnr, ssim};
use crate::scalar::Scalar;

/// Wall-clock seconds per pipeline stage.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StageTimings {
    pub eigensolve_s: f64,
    pub pr_fit_s: f64,
    pub projection_s: f64,
    pub reconstruction_s: f64,
}

/// Fit parameters recorded in a report.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FitSummary {
    pub lambda0: f64,
    pub gamma: f64,
    pub amplitude: f64,
    pub residual: f64,
    pub pr_threshold: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DenoiseReport {
    pub side: usize,
    pub method: Method,
    pub laplacian_mode: LaplacianMode,
    pub alpha: f64,
    pub hbar: f64,
    pub effective_hbar: f64,
    pub coupling: f64,
    pub kept_count: usize,
    pub discarded_count: usize,
    /// Discarded modes over all modes.
    pub compression_ratio: f64,
    pub fit: Option<FitSummary>,
    pub selection_fallback: bool,
    pub psnr_db: Option<f64>,
    pub ssim: Option<f64>,
    pub timings: StageTimings,
}

impl DenoiseReport {
    pub(super) fn new<T: Scalar>(
        side: usize,
        config: &DenoiseConfig,
        adaptive: &AdaptiveBasis<T>,
        localization: Option<&Localization<T>>,
        selection: &ModeSelection<T>,
        projection_s: f64,
        reconstruction_s: f64,
    ) -> Self {
        let p = &adaptive.params;
        Self {
            side,
            method: config.method,
            laplacian_mode: config.laplacian_mode,
            alpha: config.alpha,
            hbar: p.hbar().to_f64_lossy(),
            effective_hbar: p.effective_hbar().to_f64_lossy(),
            coupling: p.coupling().to_f64_lossy(),
            kept_count: selection.kept_count(),
            discarded_count: selection.discarded_count(),
            compression_ratio: selection.compression_ratio(),
            fit: localization.map(|l| FitSummary {
                lambda0: l.fit.lambda0.to_f64_lossy(),
                gamma: l.fit.gamma.to_f64_lossy(),
                amplitude: l.fit.amplitude.to_f64_lossy(),
                residual: l.fit.residual.to_f64_lossy(),
                pr_threshold: l.pr_threshold.to_f64_lossy(),
            }),
            selection_fallback: localization.is_some_and(|l| l.selection_fallback),
            psnr_db: None,
            ssim: None,
            timings: StageTimings {
                eigensolve_s: adaptive.eigensolve_s,
                pr_fit_s: localization.map_or(0.0, |l| l.fit_s),
                projection_s,
                reconstruction_s,
            },
        }
    }

    /// Fills PSNR and SSIM of `output` against a clean reference.
    pub fn attach_reference<T: Scalar>(&mut self, clean: &ImageGrid<T>, output: &ImageGrid<T>) -> Result<()> {
        self.psnr_db = Some(psnr(clean, output)?);
        self.ssim = Some(ssim(clean, output)?);
        Ok(())
    }

    /// Ordered `key=value` pairs. Timing fields vary between runs and can be
    /// left out for comparisons.
    pub fn key_values(&self, include_timings: bool) -> Vec<(&'static str, String)> {
        let mut kv = vec![
            ("side", self.side.to_string()),
            ("method", self.method.to_string()),
            ("laplacian_mode", self.laplacian_mode.to_string()),
            ("alpha", self.alpha.to_string()),
            ("hbar", self.hbar.to_string()),
            ("effective_hbar", self.effective_hbar.to_string()),
            ("coupling", self.coupling.to_string()),
            ("kept_count", self.kept_count.to_string()),
            ("discarded_count", self.discarded_count.to_string()),
            ("compression_ratio", self.compression_ratio.to_string()),
        ];
        if let Some(fit) = &self.fit {
            kv.extend([
                ("lambda0", fit.lambda0.to_string()),
                ("gamma", fit.gamma.to_string()),
                ("fit_amplitude", fit.amplitude.to_string()),
                ("fit_residual", fit.residual.to_string()),
                ("pr_threshold", fit.pr_threshold.to_string()),
            ]);
        }
        kv.push(("selection_fallback", self.selection_fallback.to_string()));
        if let Some(v) = self.psnr_db {
            kv.push(("psnr_db", v.to_string()));
        }
        if let Some(v) = self.ssim {
            kv.push(("ssim", v.to_string()));
        }
        if include_timings {
            let t = &self.timings;
            kv.extend([
                ("t_eigen_s", t.eigensolve_s.to_string()),
                ("t_fit_s", t.pr_fit_s.to_string()),
                ("t_project_s", t.projection_s.to_string()),
                ("t_reconstruct_s", t.reconstruction_s.to_string()),
            ]);
        }
        kv
    }

    pub fn write_key_values<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (k, v) in self.key_values(true) {
            writeln!(out, "{k}={v}")?;
        }
        Ok(())
    }

    pub const CSV_HEADER: &'static str = "side,method,alpha,kept_count,discarded_count,compression_ratio,\
lambda0,gamma,pr_threshold,selection_fallback,psnr_db,ssim,t_eigen_s,t_fit_s,t_project_s,t_reconstruct_s";

    /// One row matching [`DenoiseReport::CSV_HEADER`]; absent values are empty.
    pub fn csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        let t = &self.timings;
        [
            self.side.to_string(),
            self.method.to_string(),
            self.alpha.to_string(),
            self.kept_count.to_string(),
            self.discarded_count.to_string(),
            self.compression_ratio.to_string(),
            opt(self.fit.map(|f| f.lambda0)),
            opt(self.fit.map(|f| f.gamma)),
            opt(self.fit.map(|f| f.pr_threshold)),
            self.selection_fallback.to_string(),
            opt(self.psnr_db),
            opt(self.ssim),
            t.eigensolve_s.to_string(),
            t.pr_fit_s.to_string(),
            t.projection_s.to_string(),
            t.reconstruction_s.to_string(),
        ]
        .join(",")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report() -> DenoiseReport {
        DenoiseReport {
            side: 4,
            method: Method::SelectedModes,
            laplacian_mode: LaplacianMode::Literal,
            alpha: 1.0,
            hbar: 0.5,
            effective_hbar: 0.5,
            coupling: 0.125,
            kept_count: 6,
            discarded_count: 10,
            compression_ratio: 0.625,
            fit: Some(FitSummary {
                lambda0: 0.6,
                gamma: 0.05,
                amplitude: 3.0,
                residual: 0.0,
                pr_threshold: 0.55,
            }),
            selection_fallback: false,
            psnr_db: Some(20.0),
            ssim: None,
            timings: StageTimings::default(),
        }
    }

    #[test]
    fn key_value_lines() {
        let mut buf = Vec::new();
        report().write_key_values(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("kept_count=6\n"));
        assert!(text.contains("compression_ratio=0.625\n"));
        assert!(text.contains("pr_threshold=0.55\n"));
        assert!(text.contains("psnr_db=20\n"));
        assert!(!text.contains("ssim="));
        assert!(text.lines().all(|l| l.split_once('=').is_some()));
    }

    #[test]
    fn csv_row_matches_header() {
        let r = report();
        let cols = DenoiseReport::CSV_HEADER.split(',').count();
        assert_eq!(r.csv_row().split(',').count(), cols);
        assert!(r
            .csv_row()
            .starts_with("4,selected_modes,1,6,10,0.625,0.6,0.05,0.55,false,20,,"));
    }

    #[test]
    fn timings_can_be_excluded() {
        let r = report();
        assert!(r.key_values(false).iter().all(|(k, _)| !k.starts_with("t_")));
        assert_eq!(r.key_values(true).len(), r.key_values(false).len() + 4);
    }
}
