//! Separable Gaussian pre-smoothing.

use super::ImageGrid;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmoothingSpec {
    pub enabled: bool,
    /// Standard deviation in pixels.
    pub sigma: f64,
    /// Half-width of the sampled kernel in pixels.
    pub kernel_radius: usize,
}

impl Default for SmoothingSpec {
    fn default() -> Self {
        Self {
            enabled: false,
            sigma: 1.0,
            kernel_radius: 3,
        }
    }
}

impl SmoothingSpec {
    /// Enabled spec with the minimal radius `ceil(3 sigma)`.
    pub fn with_sigma(sigma: f64) -> Self {
        Self {
            enabled: true,
            sigma,
            kernel_radius: (3.0 * sigma).ceil().max(1.0) as usize,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "smoothing sigma must be positive, got {}",
                self.sigma
            )));
        }
        if self.kernel_radius == 0 || (self.kernel_radius as f64) < (3.0 * self.sigma).ceil() {
            return Err(Error::InvalidParameter(format!(
                "kernel radius {} must be at least ceil(3 sigma) = {}",
                self.kernel_radius,
                (3.0 * self.sigma).ceil()
            )));
        }
        Ok(())
    }
}

/// Sampled Gaussian of length `2 radius + 1`, normalized to unit sum.
pub fn gaussian_kernel<T: Scalar>(sigma: f64, radius: usize) -> Vec<T> {
    let r = radius as i64;
    let raw: Vec<f64> = (-r..=r)
        .map(|k| (-((k * k) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| T::of(w / total)).collect()
}

/// Half-sample symmetric reflection (`... b a | a b ... y z | z y ...`),
/// i.e. the 2N-periodic even extension, which keeps the image mean exactly.
#[inline]
fn reflect(p: i64, n: usize) -> usize {
    let period = 2 * n as i64;
    let m = p.rem_euclid(period);
    if m < n as i64 {
        m as usize
    } else {
        (period - 1 - m) as usize
    }
}

/// Separable Gaussian blur with symmetric border reflection, clamped to `[0, 1]`.
pub fn gaussian_smooth<T: Scalar>(img: &ImageGrid<T>, spec: &SmoothingSpec) -> Result<ImageGrid<T>> {
    if !spec.enabled {
        return Err(Error::SmoothingDisabled);
    }
    spec.validate()?;
    let n = img.side();
    let kernel: Vec<T> = gaussian_kernel(spec.sigma, spec.kernel_radius);
    let r = spec.kernel_radius as i64;
    let src = img.pixels();

    let mut horizontal = vec![T::zero(); n * n];
    for row in 0..n {
        let line = &src[row * n..(row + 1) * n];
        for col in 0..n {
            let mut acc = T::zero();
            for (k, &w) in kernel.iter().enumerate() {
                acc = acc + w * line[reflect(col as i64 + k as i64 - r, n)];
            }
            horizontal[row * n + col] = acc;
        }
    }
    let mut out = vec![T::zero(); n * n];
    for row in 0..n {
        for col in 0..n {
            let mut acc = T::zero();
            for (k, &w) in kernel.iter().enumerate() {
                acc = acc + w * horizontal[reflect(row as i64 + k as i64 - r, n) * n + col];
            }
            out[row * n + col] = acc.max(T::zero()).min(T::one());
        }
    }
    ImageGrid::new(n, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reflection_indices() {
        let got: Vec<usize> = (-3..7).map(|p| reflect(p, 4)).collect();
        assert_eq!(got, vec![2, 1, 0, 0, 1, 2, 3, 3, 2, 1]);
        // Radius larger than the image wraps through the period.
        assert_eq!(reflect(9, 4), 1);
        assert_eq!(reflect(5, 1), 0);
    }

    #[test]
    fn constant_image_unchanged() {
        let img = ImageGrid::filled(9, 0.37f64).unwrap();
        let out = gaussian_smooth(&img, &SmoothingSpec::with_sigma(1.3)).unwrap();
        for &v in out.pixels() {
            assert!((v - 0.37).abs() < 1e-15);
        }
    }

    #[test]
    fn delta_gives_centre_weight() {
        let n = 15;
        let mut px = vec![0.0f64; n * n];
        px[7 * n + 7] = 1.0;
        let img = ImageGrid::new(n, px).unwrap();
        let out = gaussian_smooth(&img, &SmoothingSpec::with_sigma(1.0)).unwrap();
        // Normalized 1-D sampled Gaussian at offset 0, radius 3.
        let norm: f64 = (-3i32..=3).map(|k| (-(k * k) as f64 / 2.0).exp()).sum();
        let w0 = 1.0 / norm;
        assert!((out.get(7, 7) - w0 * w0).abs() < 1e-15);
    }

    #[test]
    fn disabled_or_bad_spec_is_error() {
        let img = ImageGrid::filled(4, 0.5f64).unwrap();
        assert!(matches!(
            gaussian_smooth(&img, &SmoothingSpec::default()),
            Err(Error::SmoothingDisabled)
        ));
        let bad = SmoothingSpec {
            enabled: true,
            sigma: 2.0,
            kernel_radius: 5,
        };
        assert!(gaussian_smooth(&img, &bad).is_err());
    }

    proptest! {
        #[test]
        fn preserves_mean_and_max(
            side in 1usize..12,
            seed in any::<u64>(),
            sigma in 0.3f64..3.0,
        ) {
            let mut state = seed | 1;
            let px: Vec<f64> = (0..side * side).map(|_| {
                state ^= state << 13; state ^= state >> 7; state ^= state << 17;
                (state >> 11) as f64 / (1u64 << 53) as f64
            }).collect();
            let img = ImageGrid::new(side, px).unwrap();
            let out = gaussian_smooth(&img, &SmoothingSpec::with_sigma(sigma)).unwrap();
            prop_assert!((out.mean() - img.mean()).abs() <= 1e-10);
            prop_assert!(out.max() <= img.max() + 1e-12);
        }
    }
}
