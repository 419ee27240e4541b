use std::io::Write;

use super::{LorentzianFit, ModeSpectrum};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const DEFAULT_BIN_COUNT: usize = 64;
/// Smallest bin count accepted for a spectrum histogram.
pub const MIN_BIN_COUNT: usize = 8;

/// Equal-width histogram of participation ratios over `[min, max]`.
/// The last bin is closed on the right.
#[derive(Clone, Debug, PartialEq)]
pub struct PrHistogram<T> {
    edges: Vec<T>,
    counts: Vec<usize>,
}

impl<T: Scalar> PrHistogram<T> {
    /// Bins arbitrary values; at least one bin and a non-degenerate range.
    pub fn from_values(values: &[T], bin_count: usize) -> Result<Self> {
        if bin_count == 0 {
            return Err(Error::TooFewBins { required: 1, found: 0 });
        }
        if values.is_empty() {
            return Err(Error::InvalidParameter("cannot histogram an empty spectrum".into()));
        }
        let lo = values.iter().copied().fold(T::infinity(), T::min);
        let hi = values.iter().copied().fold(T::neg_infinity(), T::max);
        if !(hi > lo) {
            return Err(Error::DegeneratePrRange);
        }
        let bins = T::of_usize(bin_count);
        let width = (hi - lo) / bins;
        let mut edges: Vec<T> = (0..=bin_count)
            .map(|k| lo + (hi - lo) * T::of_usize(k) / bins)
            .collect();
        edges[bin_count] = hi;

        let mut counts = vec![0usize; bin_count];
        for &v in values {
            let mut k = ((v - lo) / width).floor().to_usize().unwrap_or(0).min(bin_count - 1);
            // Guard against rounding at interior edges.
            while k > 0 && v < edges[k] {
                k -= 1;
            }
            while k + 1 < bin_count && v >= edges[k + 1] {
                k += 1;
            }
            counts[k] += 1;
        }
        Ok(Self { edges, counts })
    }

    pub fn edges(&self) -> &[T] {
        &self.edges
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn bin_count(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn centers(&self) -> Vec<T> {
        let half = T::of(0.5);
        self.edges.windows(2).map(|w| (w[0] + w[1]) * half).collect()
    }

    pub fn nonempty_bins(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }

    /// `bin_center,count,fit_value` (fit column empty without a fit).
    pub fn write_csv<W: Write>(&self, mut out: W, fit: Option<&LorentzianFit<T>>) -> std::io::Result<()> {
        writeln!(out, "bin_center,count,fit_value")?;
        for (c, &n) in self.centers().into_iter().zip(&self.counts) {
            match fit {
                Some(f) => writeln!(out, "{c},{n},{}", f.eval(c))?,
                None => writeln!(out, "{c},{n},")?,
            }
        }
        Ok(())
    }
}

/// Histogram of the spectrum's participation ratios.
pub fn pr_histogram<T: Scalar>(spectrum: &ModeSpectrum<T>, bin_count: usize) -> Result<PrHistogram<T>> {
    if bin_count < MIN_BIN_COUNT {
        return Err(Error::TooFewBins {
            required: MIN_BIN_COUNT,
            found: bin_count,
        });
    }
    PrHistogram::from_values(&spectrum.prs(), bin_count)
}
