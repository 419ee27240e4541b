//! Poisson noise at a requested signal-to-noise ratio.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use super::snr_db;
use crate::error::{Error, Result};
use crate::image::ImageGrid;
use crate::scalar::Scalar;

/// Photon-scale search range.
pub const SCALE_RANGE: (f64, f64) = (1e-2, 1e8);
/// Accepted distance between achieved and requested SNR, in dB.
pub const SNR_TOLERANCE_DB: f64 = 0.3;
/// The search stops early once this close to the target.
const SNR_GOAL_DB: f64 = 0.02;
const MAX_BISECTIONS: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseSpec {
    pub target_snr_db: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(target_snr_db: f64, seed: u64) -> Self {
        Self { target_snr_db, seed }
    }

    /// ChaCha8 keyed by the seed, on a stream chosen by the target SNR.
    fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.target_snr_db.to_bits());
        rng
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NoisyImage<T> {
    pub image: ImageGrid<T>,
    pub achieved_snr_db: f64,
    /// Photon-count scale `q`.
    pub scale: f64,
}

/// Draws `y_i = Poisson(q x_i) / q` with `q` chosen by bisection on
/// `log q` so the SNR lands within [`SNR_TOLERANCE_DB`] of the target.
///
/// Every candidate `q` replays the same random stream, so the SNR varies
/// smoothly with `q` and the result depends only on image, seed and target.
pub fn add_poisson_noise<T: Scalar>(img: &ImageGrid<T>, spec: &NoiseSpec) -> Result<NoisyImage<T>> {
    if !spec.target_snr_db.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "target SNR must be finite, got {}",
            spec.target_snr_db
        )));
    }
    let clean: Vec<f64> = img.pixels().iter().map(|v| v.to_f64_lossy()).collect();
    if clean.iter().any(|&v| v < 0.0) {
        return Err(Error::InvalidImage(
            "Poisson noise needs nonnegative intensities".into(),
        ));
    }
    if clean.iter().all(|&v| v == 0.0) {
        return Err(Error::ZeroSignal);
    }

    let draw = |q: f64| -> Result<(ImageGrid<T>, f64)> {
        let mut rng = spec.rng();
        let mut px = Vec::with_capacity(clean.len());
        for &x in &clean {
            let lambda = q * x;
            let count = if lambda > 0.0 {
                Poisson::new(lambda)
                    .map_err(|e| Error::InvalidParameter(format!("Poisson rate {lambda}: {e}")))?
                    .sample(&mut rng)
            } else {
                0.0
            };
            px.push(T::of(count / q));
        }
        let noisy = ImageGrid::new(img.side(), px)?;
        let snr = snr_db(img, &noisy)?;
        Ok((noisy, snr))
    };

    let target = spec.target_snr_db;
    let (mut lo, mut hi) = (SCALE_RANGE.0.ln(), SCALE_RANGE.1.ln());
    let mut best: Option<(f64, ImageGrid<T>, f64)> = None;
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        let q = mid.exp();
        let (noisy, snr) = draw(q)?;
        let err = snr - target;
        if best.as_ref().is_none_or(|b| err.abs() < (b.2 - target).abs()) {
            best = Some((q, noisy, snr));
        }
        if err.abs() <= SNR_GOAL_DB || hi - lo < 1e-12 {
            break;
        }
        // More photons, less relative noise.
        if err < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    match best {
        Some((scale, image, achieved)) if (achieved - target).abs() <= SNR_TOLERANCE_DB => Ok(NoisyImage {
            image,
            achieved_snr_db: achieved,
            scale,
        }),
        _ => Err(Error::SnrUnreachable { target_db: target }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(side: usize) -> ImageGrid<f64> {
        ImageGrid::new(side, (0..side * side).map(|i| (i % 7) as f64 / 6.0).collect()).unwrap()
    }

    #[test]
    fn zero_image_is_rejected() {
        let zero = ImageGrid::filled(8, 0.0).unwrap();
        assert!(matches!(
            add_poisson_noise(&zero, &NoiseSpec::new(15.0, 1)),
            Err(Error::ZeroSignal)
        ));
    }

    #[test]
    fn constant_image_hits_target() {
        let img = ImageGrid::filled(16, 0.5).unwrap();
        let out = add_poisson_noise(&img, &NoiseSpec::new(15.0, 42)).unwrap();
        assert!((14.7..=15.3).contains(&out.achieved_snr_db));
        assert!((snr_db(&img, &out.image).unwrap() - out.achieved_snr_db).abs() < 1e-12);
    }

    #[test]
    fn deterministic_per_seed() {
        let img = ramp(12);
        let a = add_poisson_noise(&img, &NoiseSpec::new(5.0, 3)).unwrap();
        let b = add_poisson_noise(&img, &NoiseSpec::new(5.0, 3)).unwrap();
        let c = add_poisson_noise(&img, &NoiseSpec::new(5.0, 4)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.image, c.image);
    }

    #[test]
    fn high_snr_converges_to_clean() {
        let img = ramp(16);
        let out = add_poisson_noise(&img, &NoiseSpec::new(40.0, 9)).unwrap();
        let diff: f64 = img
            .pixels()
            .iter()
            .zip(out.image.pixels())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        assert!(diff / img.l2_norm() <= 0.01);
    }

    #[test]
    fn mean_is_preserved() {
        // At the scale found for 15 dB the noisy mean stays within three
        // standard errors: Var(y_i) = x_i / q.
        let img = ramp(32);
        let out = add_poisson_noise(&img, &NoiseSpec::new(15.0, 5)).unwrap();
        let n = img.len() as f64;
        let se = (img.pixels().iter().sum::<f64>() / out.scale).sqrt() / n;
        assert!((out.image.mean() - img.mean()).abs() <= 3.0 * se);
    }

    #[test]
    fn unreachable_and_invalid_targets() {
        let img = ramp(8);
        assert!(matches!(
            add_poisson_noise(&img, &NoiseSpec::new(200.0, 1)),
            Err(Error::SnrUnreachable { .. })
        ));
        assert!(add_poisson_noise(&img, &NoiseSpec::new(f64::NAN, 1)).is_err());
        let negative = ImageGrid::new(2, vec![0.5, -0.1, 0.2, 0.3]).unwrap();
        assert!(add_poisson_noise(&negative, &NoiseSpec::new(5.0, 1)).is_err());
    }
}
