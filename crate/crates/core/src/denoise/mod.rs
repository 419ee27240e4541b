//! Projection onto the adaptive basis, selective reconstruction and the
//! end-to-end denoising pipeline.

mod report;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::eigen::{EigenBasis, Eigensolver, DEFAULT_MAX_DIM};
use crate::error::{Error, Result};
use crate::hamiltonian::{Hamiltonian, LaplacianMode, PlanckParams};
use crate::image::{gaussian_smooth, ImageGrid, SmoothingSpec};
use crate::localization::{
    fit_lorentzian, participation_ratios, pr_histogram, select_modes, LorentzianFit, ModeSelection, ModeSpectrum,
    PrHistogram, DEFAULT_BIN_COUNT,
};
use crate::scalar::{axpy, dot, Scalar};

pub use report::{DenoiseReport, StageTimings};

/// Expansion coefficients `c_n = e_n . x`, in basis order.
#[derive(Clone, Debug, PartialEq)]
pub struct Coefficients<T> {
    values: Vec<T>,
}

impl<T: Scalar> Coefficients<T> {
    pub fn from_values(values: Vec<T>) -> Self {
        Self { values }
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `sum_n c_n^2`, equal to `|x|^2` for a complete orthonormal basis.
    pub fn energy(&self) -> T {
        self.values.iter().map(|&c| c * c).sum()
    }
}

/// Coefficients of the row-major vectorized image in `basis`.
pub fn project<T: Scalar>(img: &ImageGrid<T>, basis: &EigenBasis<T>) -> Result<Coefficients<T>> {
    if img.len() != basis.dim() {
        return Err(Error::DimensionMismatch {
            expected: basis.dim(),
            found: img.len(),
        });
    }
    let x = img.pixels();
    Ok(Coefficients {
        values: basis.vectors().map(|v| dot(v, x)).collect(),
    })
}

/// `sum over kept n of c_n e_n`, reshaped to an image. Values are not
/// clamped; negative intensities survive until the image is saved.
pub fn reconstruct<T: Scalar>(
    coeffs: &Coefficients<T>,
    basis: &EigenBasis<T>,
    selection: &ModeSelection<T>,
) -> Result<ImageGrid<T>> {
    let dim = basis.dim();
    for found in [coeffs.len(), selection.total()] {
        if found != dim {
            return Err(Error::DimensionMismatch { expected: dim, found });
        }
    }
    let mut out = vec![T::zero(); dim];
    for n in selection.kept_indices() {
        axpy(coeffs.values[n], basis.vector(n), &mut out);
    }
    let side = (dim as f64).sqrt().round() as usize;
    ImageGrid::new(side, out)
}

/// Which modes the reconstruction uses.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Method {
    /// Every mode: the unfiltered baseline.
    AllModes,
    /// Only the localized modes picked from the participation-ratio fit.
    #[default]
    SelectedModes,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::AllModes => "all_modes",
            Method::SelectedModes => "selected_modes",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all_modes" => Ok(Method::AllModes),
            "selected_modes" => Ok(Method::SelectedModes),
            other => Err(Error::InvalidParameter(format!(
                "unknown method `{other}` (expected all_modes or selected_modes)"
            ))),
        }
    }
}

/// Pipeline knobs. Scalars are kept in `f64` and converted per run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DenoiseConfig {
    pub laplacian_mode: LaplacianMode,
    /// Multiplier on the estimated Planck constant.
    pub alpha: f64,
    pub mass: f64,
    /// `c` in the threshold `lambda0 - c * gamma`.
    pub threshold_multiplier: f64,
    pub bin_count: usize,
    /// Applied before the basis is built; the unsmoothed image is projected.
    pub smoothing: SmoothingSpec,
    pub max_dim: usize,
    pub method: Method,
}

impl Default for DenoiseConfig {
    fn default() -> Self {
        Self {
            laplacian_mode: LaplacianMode::default(),
            alpha: 1.0,
            mass: 1.0,
            threshold_multiplier: 1.0,
            bin_count: DEFAULT_BIN_COUNT,
            smoothing: SmoothingSpec::default(),
            max_dim: DEFAULT_MAX_DIM,
            method: Method::default(),
        }
    }
}

impl DenoiseConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("alpha", self.alpha),
            ("mass", self.mass),
            ("threshold multiplier", self.threshold_multiplier),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        if self.smoothing.enabled {
            self.smoothing.validate()?;
        }
        Ok(())
    }
}

/// Eigenbasis of the image Hamiltonian together with the constants used.
#[derive(Clone, Debug)]
pub struct AdaptiveBasis<T> {
    pub params: PlanckParams<T>,
    pub basis: EigenBasis<T>,
    /// Wall time of the Hamiltonian build and eigensolve, in seconds.
    pub eigensolve_s: f64,
}

/// Smooths (if enabled), estimates the Planck constant, builds the
/// Hamiltonian and diagonalizes it.
pub fn adaptive_basis<T: Scalar>(img: &ImageGrid<T>, config: &DenoiseConfig) -> Result<AdaptiveBasis<T>> {
    config.validate()?;
    let solver = Eigensolver::new(config.max_dim);
    if img.len() > solver.max_dim {
        // Reject before smoothing or allocating the dense operator.
        return Err(Error::DimensionTooLarge {
            dim: img.len(),
            cap: solver.max_dim,
            max_side: (solver.max_dim as f64).sqrt().floor() as usize,
        });
    }
    let smoothed;
    let source = if config.smoothing.enabled {
        smoothed = gaussian_smooth(img, &config.smoothing)?;
        &smoothed
    } else {
        img
    };
    let params = PlanckParams::from_image(source, T::of(config.alpha))?.with_mass(T::of(config.mass))?;
    let start = Instant::now();
    let h = Hamiltonian::build(source, &params, config.laplacian_mode);
    let basis = solver.solve_hamiltonian(&h)?;
    Ok(AdaptiveBasis {
        params,
        basis,
        eigensolve_s: start.elapsed().as_secs_f64(),
    })
}

/// Participation ratios, their histogram and fit, and the resulting mask.
#[derive(Clone, Debug)]
pub struct Localization<T> {
    pub spectrum: ModeSpectrum<T>,
    pub histogram: PrHistogram<T>,
    pub fit: LorentzianFit<T>,
    pub selection: ModeSelection<T>,
    /// `max(min PR, lambda0 - c gamma)`, also when the fallback kept every mode.
    pub pr_threshold: T,
    /// Set when no mode fell below the threshold and every mode was kept.
    pub selection_fallback: bool,
    /// Wall time of PR, histogram, fit and selection, in seconds.
    pub fit_s: f64,
}

impl<T: Scalar> Localization<T> {
    /// Fraction of modes with PR strictly below the threshold; zero when the
    /// fallback kept everything.
    pub fn localized_fraction(&self) -> f64 {
        if self.selection_fallback || self.spectrum.is_empty() {
            return 0.0;
        }
        self.selection.kept_count() as f64 / self.spectrum.len() as f64
    }
}

pub fn localize<T: Scalar>(basis: &EigenBasis<T>, config: &DenoiseConfig) -> Result<Localization<T>> {
    let start = Instant::now();
    let spectrum = participation_ratios(basis)?;
    let histogram = pr_histogram(&spectrum, config.bin_count)?;
    let fit = fit_lorentzian(&histogram)?;
    let (selection, selection_fallback) = match select_modes(&spectrum, &fit, T::of(config.threshold_multiplier)) {
        Ok(sel) => (sel, false),
        Err(Error::EmptySelection { .. }) => (ModeSelection::all(spectrum.len()), true),
        Err(e) => return Err(e),
    };
    let pr_threshold = fit
        .lower_bound(T::of(config.threshold_multiplier))
        .max(spectrum.min_pr());
    Ok(Localization {
        spectrum,
        histogram,
        fit,
        selection,
        pr_threshold,
        selection_fallback,
        fit_s: start.elapsed().as_secs_f64(),
    })
}

/// Projects `img` and reconstructs from the modes kept by `selection`,
/// returning the image and the projection and reconstruction times.
pub fn filter<T: Scalar>(
    img: &ImageGrid<T>,
    basis: &EigenBasis<T>,
    selection: &ModeSelection<T>,
) -> Result<(ImageGrid<T>, f64, f64)> {
    let start = Instant::now();
    let coeffs = project(img, basis)?;
    let projection_s = start.elapsed().as_secs_f64();
    let start = Instant::now();
    let out = reconstruct(&coeffs, basis, selection)?;
    Ok((out, projection_s, start.elapsed().as_secs_f64()))
}

/// Everything a pipeline run produced, for callers that need more than the
/// output image.
#[derive(Clone, Debug)]
pub struct PipelineRun<T> {
    pub output: ImageGrid<T>,
    pub report: DenoiseReport,
    pub adaptive: AdaptiveBasis<T>,
    /// `None` for [`Method::AllModes`].
    pub localization: Option<Localization<T>>,
}

pub fn run_pipeline<T: Scalar>(img: &ImageGrid<T>, config: &DenoiseConfig) -> Result<PipelineRun<T>> {
    let adaptive = adaptive_basis(img, config)?;
    let localization = match config.method {
        Method::AllModes => None,
        Method::SelectedModes => Some(localize(&adaptive.basis, config)?),
    };
    let all;
    let selection = match &localization {
        Some(loc) => &loc.selection,
        None => {
            all = ModeSelection::all(adaptive.basis.dim());
            &all
        }
    };
    let (output, projection_s, reconstruction_s) = filter(img, &adaptive.basis, selection)?;
    let report = DenoiseReport::new(
        img.side(),
        config,
        &adaptive,
        localization.as_ref(),
        selection,
        projection_s,
        reconstruction_s,
    );
    Ok(PipelineRun {
        output,
        report,
        adaptive,
        localization,
    })
}

/// Full pipeline. With [`Method::AllModes`] no participation ratios are
/// computed and the output reproduces the input.
pub fn denoise_pipeline<T: Scalar>(
    img: &ImageGrid<T>,
    config: &DenoiseConfig,
) -> Result<(ImageGrid<T>, DenoiseReport)> {
    let run = run_pipeline(img, config)?;
    Ok((run.output, run.report))
}
