use super::{LorentzianFit, ModeSpectrum};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Eigenvalue extent of a contiguous group of kept modes (diagnostic only).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenvalueBand<T> {
    pub min: T,
    pub max: T,
    pub count: usize,
}

/// Keep/discard mask over modes, in spectrum order.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeSelection<T> {
    keep_mask: Vec<bool>,
    pr_threshold: T,
    kept_count: usize,
    threshold_multiplier: T,
    /// Kept modes in the lower half of the eigenvalue ranks.
    pub low_band: Option<EigenvalueBand<T>>,
    /// Kept modes in the upper half of the eigenvalue ranks.
    pub high_band: Option<EigenvalueBand<T>>,
}

impl<T: Scalar> ModeSelection<T> {
    /// Keeps every mode.
    pub fn all(total: usize) -> Self {
        Self::from_mask(vec![true; total])
    }

    /// Wraps an explicit mask; threshold fields are set to infinity and zero.
    pub fn from_mask(keep_mask: Vec<bool>) -> Self {
        let kept_count = keep_mask.iter().filter(|&&k| k).count();
        Self {
            keep_mask,
            pr_threshold: T::infinity(),
            kept_count,
            threshold_multiplier: T::zero(),
            low_band: None,
            high_band: None,
        }
    }

    pub fn keep_mask(&self) -> &[bool] {
        &self.keep_mask
    }

    pub fn pr_threshold(&self) -> T {
        self.pr_threshold
    }

    pub fn threshold_multiplier(&self) -> T {
        self.threshold_multiplier
    }

    pub fn total(&self) -> usize {
        self.keep_mask.len()
    }

    pub fn kept_count(&self) -> usize {
        self.kept_count
    }

    pub fn discarded_count(&self) -> usize {
        self.keep_mask.len() - self.kept_count
    }

    /// Fraction of modes discarded.
    pub fn compression_ratio(&self) -> f64 {
        if self.keep_mask.is_empty() {
            0.0
        } else {
            self.discarded_count() as f64 / self.keep_mask.len() as f64
        }
    }

    pub fn kept_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.keep_mask.iter().enumerate().filter(|(_, &k)| k).map(|(i, _)| i)
    }
}

/// Keeps the localized modes: those with PR strictly below
/// `max(min PR, lambda0 - c * gamma)`.
pub fn select_modes<T: Scalar>(
    spectrum: &ModeSpectrum<T>,
    fit: &LorentzianFit<T>,
    multiplier: T,
) -> Result<ModeSelection<T>> {
    if !(multiplier.is_finite() && multiplier > T::zero()) {
        return Err(Error::InvalidParameter(format!(
            "threshold multiplier must be positive, got {multiplier}"
        )));
    }
    let threshold = fit.lower_bound(multiplier).max(spectrum.min_pr());
    let keep_mask: Vec<bool> = spectrum.records().iter().map(|r| r.pr < threshold).collect();
    let kept_count = keep_mask.iter().filter(|&&k| k).count();
    if kept_count == 0 {
        return Err(Error::EmptySelection {
            threshold: threshold.to_f64_lossy(),
        });
    }

    let half = spectrum.len() / 2;
    let band = |range: std::ops::Range<usize>| {
        let mut out: Option<EigenvalueBand<T>> = None;
        for r in &spectrum.records()[range.clone()] {
            if !keep_mask[r.mode_index.min(keep_mask.len() - 1)] {
                continue;
            }
            let b = out.get_or_insert(EigenvalueBand {
                min: r.eigenvalue,
                max: r.eigenvalue,
                count: 0,
            });
            b.min = b.min.min(r.eigenvalue);
            b.max = b.max.max(r.eigenvalue);
            b.count += 1;
        }
        out
    };
    let low_band = band(0..half);
    let high_band = band(half..spectrum.len());

    Ok(ModeSelection {
        keep_mask,
        pr_threshold: threshold,
        kept_count,
        threshold_multiplier: multiplier,
        low_band,
        high_band,
    })
}
