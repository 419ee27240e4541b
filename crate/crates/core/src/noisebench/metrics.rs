//! PSNR and SSIM on the unit intensity scale.

use crate::error::{Error, Result};
use crate::image::{gaussian_kernel, ImageGrid};
use crate::scalar::Scalar;

/// Side of the SSIM window.
pub const SSIM_WINDOW: usize = 11;
pub const SSIM_SIGMA: f64 = 1.5;
pub const SSIM_K1: f64 = 0.01;
pub const SSIM_K2: f64 = 0.03;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QualityMetrics {
    /// `+inf` for identical images.
    pub psnr_db: f64,
    pub ssim: f64,
}

/// PSNR and SSIM of `test` against `reference`.
pub fn quality<T: Scalar>(reference: &ImageGrid<T>, test: &ImageGrid<T>) -> Result<QualityMetrics> {
    Ok(QualityMetrics {
        psnr_db: psnr(reference, test)?,
        ssim: ssim(reference, test)?,
    })
}

fn check_same_size<T: Scalar>(a: &ImageGrid<T>, b: &ImageGrid<T>) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    Ok(())
}

/// Signal-to-noise ratio `10 log10(sum x^2 / sum (x - y)^2)` in dB.
///
/// Returns `+inf` when the images are identical.
pub fn snr_db<T: Scalar>(clean: &ImageGrid<T>, noisy: &ImageGrid<T>) -> Result<f64> {
    check_same_size(clean, noisy)?;
    let (mut signal, mut noise) = (0.0, 0.0);
    for (&x, &y) in clean.pixels().iter().zip(noisy.pixels()) {
        let (x, y) = (x.to_f64_lossy(), y.to_f64_lossy());
        signal += x * x;
        noise += (x - y) * (x - y);
    }
    if signal == 0.0 {
        return Err(Error::ZeroSignal);
    }
    Ok(10.0 * (signal / noise).log10())
}

/// Peak signal-to-noise ratio with peak 1, in dB; `+inf` when identical.
pub fn psnr<T: Scalar>(reference: &ImageGrid<T>, test: &ImageGrid<T>) -> Result<f64> {
    check_same_size(reference, test)?;
    let sse: f64 = reference
        .pixels()
        .iter()
        .zip(test.pixels())
        .map(|(&a, &b)| {
            let d = a.to_f64_lossy() - b.to_f64_lossy();
            d * d
        })
        .sum();
    let mse = sse / reference.len() as f64;
    Ok(10.0 * (1.0 / mse).log10())
}

/// Mean structural similarity over every window position fully inside the
/// image (11x11 Gaussian window, sigma 1.5, dynamic range 1).
pub fn ssim<T: Scalar>(reference: &ImageGrid<T>, test: &ImageGrid<T>) -> Result<f64> {
    check_same_size(reference, test)?;
    let n = reference.side();
    if n < SSIM_WINDOW {
        return Err(Error::ImageTooSmall {
            side: n,
            window: SSIM_WINDOW,
        });
    }
    let w: Vec<f64> = gaussian_kernel(SSIM_SIGMA, SSIM_WINDOW / 2);
    let x: Vec<f64> = reference.pixels().iter().map(|v| v.to_f64_lossy()).collect();
    let y: Vec<f64> = test.pixels().iter().map(|v| v.to_f64_lossy()).collect();
    let xx: Vec<f64> = x.iter().map(|a| a * a).collect();
    let yy: Vec<f64> = y.iter().map(|a| a * a).collect();
    let xy: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a * b).collect();

    let m = n - SSIM_WINDOW + 1;
    // Valid-region separable filter: rows first, then columns.
    let filter = |src: &[f64]| -> Vec<f64> {
        let mut rows = vec![0.0; n * m];
        for r in 0..n {
            for c in 0..m {
                rows[r * m + c] = w.iter().enumerate().map(|(k, wk)| wk * src[r * n + c + k]).sum();
            }
        }
        let mut out = vec![0.0; m * m];
        for r in 0..m {
            for c in 0..m {
                out[r * m + c] = w.iter().enumerate().map(|(k, wk)| wk * rows[(r + k) * m + c]).sum();
            }
        }
        out
    };
    let (mx, my, exx, eyy, exy) = (filter(&x), filter(&y), filter(&xx), filter(&yy), filter(&xy));

    let c1 = SSIM_K1 * SSIM_K1;
    let c2 = SSIM_K2 * SSIM_K2;
    let total: f64 = (0..m * m)
        .map(|i| {
            let (ux, uy) = (mx[i], my[i]);
            let vx = exx[i] - ux * ux;
            let vy = eyy[i] - uy * uy;
            let cov = exy[i] - ux * uy;
            ((2.0 * ux * uy + c1) * (2.0 * cov + c2)) / ((ux * ux + uy * uy + c1) * (vx + vy + c2))
        })
        .sum();
    Ok(total / (m * m) as f64)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    fn grid(side: usize, f: impl Fn(usize, usize) -> f64) -> ImageGrid<f64> {
        ImageGrid::new(side, (0..side * side).map(|i| f(i / side, i % side)).collect()).unwrap()
    }

    /// Window-by-window SSIM with explicit 2D weights and centred moments.
    #[allow(clippy::needless_range_loop)]
    pub(crate) fn ssim_oracle(a: &ImageGrid<f64>, b: &ImageGrid<f64>) -> f64 {
        let n = a.side();
        let half = 5i64;
        let mut w2 = [[0.0f64; 11]; 11];
        let mut total_w = 0.0;
        for (i, row) in w2.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                let (di, dj) = (i as i64 - half, j as i64 - half);
                *v = (-((di * di + dj * dj) as f64) / (2.0 * 1.5 * 1.5)).exp();
                total_w += *v;
            }
        }
        let (c1, c2) = (0.01f64.powi(2), 0.03f64.powi(2));
        let mut acc = 0.0;
        let mut count = 0;
        for r in 0..=n - 11 {
            for c in 0..=n - 11 {
                let px = |img: &ImageGrid<f64>, i: usize, j: usize| img.get(r + i, c + j);
                let (mut ux, mut uy) = (0.0, 0.0);
                for i in 0..11 {
                    for j in 0..11 {
                        let wij = w2[i][j] / total_w;
                        ux += wij * px(a, i, j);
                        uy += wij * px(b, i, j);
                    }
                }
                let (mut vx, mut vy, mut cov) = (0.0, 0.0, 0.0);
                for i in 0..11 {
                    for j in 0..11 {
                        let wij = w2[i][j] / total_w;
                        let dx = px(a, i, j) - ux;
                        let dy = px(b, i, j) - uy;
                        vx += wij * dx * dx;
                        vy += wij * dy * dy;
                        cov += wij * dx * dy;
                    }
                }
                acc += ((2.0 * ux * uy + c1) * (2.0 * cov + c2)) / ((ux * ux + uy * uy + c1) * (vx + vy + c2));
                count += 1;
            }
        }
        acc / count as f64
    }

    #[test]
    fn snr_cases() {
        let clean = ImageGrid::new(2, vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        let noisy = ImageGrid::new(2, vec![0.9, 0.0, 0.0, 0.0]).unwrap();
        assert!((snr_db(&clean, &noisy).unwrap() - 20.0).abs() < 1e-9);
        assert_eq!(snr_db(&clean, &clean).unwrap(), f64::INFINITY);
        let zero = ImageGrid::filled(2, 0.0).unwrap();
        // Noise power equal to signal power.
        assert!(snr_db(&clean, &zero).unwrap().abs() < 1e-12);
        assert!(matches!(snr_db(&zero, &clean), Err(Error::ZeroSignal)));
    }

    #[test]
    fn psnr_cases() {
        let a = grid(4, |r, c| (r * 4 + c) as f64 / 20.0);
        assert_eq!(psnr(&a, &a).unwrap(), f64::INFINITY);
        let shifted = a.map(|v| v + 0.1);
        assert!((psnr(&a, &shifted).unwrap() - 20.0).abs() < 1e-9);
        let zero = ImageGrid::filled(4, 0.0).unwrap();
        let one = ImageGrid::filled(4, 1.0).unwrap();
        assert!(psnr(&zero, &one).unwrap().abs() < 1e-12);
        assert!(psnr(&a, &ImageGrid::filled(3, 0.0).unwrap()).is_err());
    }

    #[test]
    fn ssim_identity_and_small_image() {
        let a = grid(16, |r, c| ((r * 7 + c * 3) % 11) as f64 / 10.0);
        assert!((ssim(&a, &a).unwrap() - 1.0).abs() < 1e-12);
        let small = grid(10, |_, _| 0.5);
        assert!(matches!(
            ssim(&small, &small),
            Err(Error::ImageTooSmall { side: 10, window: 11 })
        ));
    }

    #[test]
    fn ssim_matches_oracle() {
        let constant = grid(16, |_, _| 0.4);
        let shifted = constant.map(|v| v + 0.15);
        let textured = grid(16, |r, c| (((r * 31 + c * 17) % 23) as f64 / 22.0).powi(2));
        let inverted = textured.map(|v| 1.0 - v);
        for (a, b) in [(&constant, &shifted), (&textured, &inverted), (&textured, &shifted)] {
            let got = ssim(a, b).unwrap();
            assert!((got - ssim_oracle(a, b)).abs() < 1e-9);
            assert!((-1.0..=1.0).contains(&got));
        }
    }
}
