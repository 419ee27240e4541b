//! Mode localization: participation ratios, their histogram, a Lorentzian fit
//! to the delocalized peak, and the resulting keep/discard mask.

mod histogram;
mod lorentzian;
mod selection;

use std::io::Write;

use crate::eigen::EigenBasis;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub use histogram::{pr_histogram, PrHistogram, DEFAULT_BIN_COUNT, MIN_BIN_COUNT};
pub use lorentzian::{fit_lorentzian, fit_lorentzian_points, lorentzian, LorentzianFit, MIN_NONEMPTY_BINS};
pub use selection::{select_modes, EigenvalueBand, ModeSelection};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModeRecord<T> {
    pub mode_index: usize,
    pub eigenvalue: T,
    /// Participation ratio, between `1 / N_pix` (one pixel) and 1 (uniform).
    pub pr: T,
}

/// Per-mode participation ratios in ascending-eigenvalue order.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeSpectrum<T> {
    records: Vec<ModeRecord<T>>,
}

impl<T: Scalar> ModeSpectrum<T> {
    pub fn from_records(records: Vec<ModeRecord<T>>) -> Self {
        Self { records }
    }

    pub fn records(&self) -> &[ModeRecord<T>] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn prs(&self) -> Vec<T> {
        self.records.iter().map(|r| r.pr).collect()
    }

    pub fn min_pr(&self) -> T {
        self.records.iter().map(|r| r.pr).fold(T::infinity(), T::min)
    }

    pub fn max_pr(&self) -> T {
        self.records.iter().map(|r| r.pr).fold(T::neg_infinity(), T::max)
    }

    pub fn median_pr(&self) -> T {
        let mut prs = self.prs();
        if prs.is_empty() {
            return T::nan();
        }
        prs.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        let m = prs.len() / 2;
        if prs.len() % 2 == 1 {
            prs[m]
        } else {
            (prs[m - 1] + prs[m]) / T::of(2.0)
        }
    }

    /// Mean PR of the modes whose eigenvalue rank lies in `[lo, hi)` as
    /// fractions of the spectrum (e.g. `0.0..0.05` for the bottom 5%).
    pub fn mean_pr_in_rank_range(&self, lo: f64, hi: f64) -> T {
        let n = self.len();
        let start = ((lo * n as f64).floor() as usize).min(n);
        let end = ((hi * n as f64).ceil() as usize).clamp(start, n);
        let slice = &self.records[start..end];
        if slice.is_empty() {
            return T::nan();
        }
        slice.iter().map(|r| r.pr).sum::<T>() / T::of_usize(slice.len())
    }

    /// `mode_index,eigenvalue,participation_ratio,kept`; `kept` is 1 for every
    /// mode when no selection is given.
    pub fn write_csv<W: Write>(&self, mut out: W, selection: Option<&ModeSelection<T>>) -> std::io::Result<()> {
        writeln!(out, "mode_index,eigenvalue,participation_ratio,kept")?;
        for (i, r) in self.records.iter().enumerate() {
            let kept = selection.is_none_or(|s| s.keep_mask()[i]);
            writeln!(out, "{},{},{},{}", r.mode_index, r.eigenvalue, r.pr, u8::from(kept))?;
        }
        Ok(())
    }
}

/// `(sum e_i^2)^2 / (len * sum e_i^4)` for a single vector.
pub fn participation_ratio<T: Scalar>(v: &[T]) -> Result<T> {
    let mut s2 = T::zero();
    let mut s4 = T::zero();
    for &x in v {
        let x2 = x * x;
        s2 = s2 + x2;
        s4 = s4 + x2 * x2;
    }
    if !(s4 > T::zero()) {
        return Err(Error::InvalidBasis("zero-norm eigenvector".into()));
    }
    Ok(s2 * s2 / (T::of_usize(v.len()) * s4))
}

/// Participation ratio of every mode of the basis.
pub fn participation_ratios<T: Scalar>(basis: &EigenBasis<T>) -> Result<ModeSpectrum<T>> {
    let records = basis
        .vectors()
        .enumerate()
        .map(|(n, v)| {
            Ok(ModeRecord {
                mode_index: n,
                eigenvalue: basis.eigenvalue(n),
                pr: participation_ratio(v)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ModeSpectrum { records })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn limiting_cases() {
        let n = 16;
        let uniform = vec![1.0 / (n as f64).sqrt(); n];
        assert!((participation_ratio(&uniform).unwrap() - 1.0).abs() < 1e-15);

        let mut delta = vec![0.0; n];
        delta[5] = 1.0;
        assert_eq!(participation_ratio(&delta).unwrap(), 1.0 / 16.0);

        let mut pair = vec![0.0; n];
        pair[2] = 0.5f64.sqrt();
        pair[9] = 0.5f64.sqrt();
        assert!((participation_ratio(&pair).unwrap() - 0.125).abs() < 1e-15);

        assert!(participation_ratio(&[0.0f64; 4]).is_err());
    }

    #[test]
    fn scale_invariant() {
        let v = [0.3, -0.1, 0.7, 0.2];
        let w: Vec<f64> = v.iter().map(|x| x * 17.0).collect();
        let a = participation_ratio(&v).unwrap();
        let b = participation_ratio(&w).unwrap();
        assert!((a - b).abs() < 1e-14);
    }

    #[test]
    fn spectrum_from_basis() {
        // Identity basis: every mode is a delta.
        let dim = 4;
        let mut vecs = vec![0.0f64; dim * dim];
        for i in 0..dim {
            vecs[i * dim + i] = 1.0;
        }
        let basis = EigenBasis::from_parts(dim, vec![0.0, 1.0, 2.0, 3.0], vecs).unwrap();
        let s = participation_ratios(&basis).unwrap();
        assert_eq!(s.len(), 4);
        assert!(s.records().iter().all(|r| r.pr == 0.25));
        assert_eq!(s.records()[2].eigenvalue, 2.0);
        assert_eq!(s.median_pr(), 0.25);
    }

    #[test]
    fn rank_range_means() {
        let recs = (0..10)
            .map(|i| ModeRecord {
                mode_index: i,
                eigenvalue: i as f64,
                pr: i as f64 / 10.0,
            })
            .collect();
        let s = ModeSpectrum::from_records(recs);
        assert!((s.mean_pr_in_rank_range(0.0, 0.2) - 0.05).abs() < 1e-15);
        assert!((s.mean_pr_in_rank_range(0.9, 1.0) - 0.9).abs() < 1e-15);
        assert!((s.median_pr() - 0.45).abs() < 1e-15);
    }

    fn vector_strategy() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-1.0f64..1.0, 2..40).prop_filter("nonzero", |v| v.iter().any(|x| x.abs() > 1e-3))
    }

    proptest! {
        #[test]
        fn bounded_and_invariant(v in vector_strategy(), seed in any::<u64>()) {
            let n = v.len() as f64;
            let pr = participation_ratio(&v).unwrap();
            prop_assert!(pr >= 1.0 / n - 1e-15 && pr <= 1.0 + 1e-12);

            let flipped: Vec<f64> = v.iter().map(|x| -x).collect();
            prop_assert_eq!(participation_ratio(&flipped).unwrap(), pr);

            // Deterministic shuffle.
            let mut perm: Vec<usize> = (0..v.len()).collect();
            let mut s = seed | 1;
            for i in (1..perm.len()).rev() {
                s ^= s << 13; s ^= s >> 7; s ^= s << 17;
                perm.swap(i, (s % (i as u64 + 1)) as usize);
            }
            let shuffled: Vec<f64> = perm.iter().map(|&i| v[i]).collect();
            prop_assert!((participation_ratio(&shuffled).unwrap() - pr).abs() <= 1e-12 * pr);
        }
    }
}
