//! Square grayscale images, file I/O and optional pre-smoothing.

mod pgm;
mod png_io;
mod smooth;

use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub use pgm::{read_pgm, write_pgm, PgmEncoding};
pub use png_io::{read_png, write_png};
pub use smooth::{gaussian_kernel, gaussian_smooth, SmoothingSpec};

/// Square intensity field stored row-major; pixel `(r, c)` is at `r * side + c`.
///
/// Images loaded from disk are normalized to `[0, 1]`. Intermediate results
/// (noisy or reconstructed images) may leave that range; they are clamped
/// only when written.
#[derive(Clone, Debug, PartialEq)]
pub struct ImageGrid<T> {
    side: usize,
    pixels: Vec<T>,
}

impl<T: Scalar> ImageGrid<T> {
    pub fn new(side: usize, pixels: Vec<T>) -> Result<Self> {
        if side == 0 {
            return Err(Error::EmptyImage);
        }
        if pixels.len() != side * side {
            return Err(Error::InvalidImage(format!(
                "expected {} pixels for side {side}, found {}",
                side * side,
                pixels.len()
            )));
        }
        if pixels.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidImage("non-finite intensity".into()));
        }
        Ok(Self { side, pixels })
    }

    pub fn filled(side: usize, value: T) -> Result<Self> {
        Self::new(side, vec![value; side * side])
    }

    pub fn side(&self) -> usize {
        self.side
    }

    /// Number of pixels, `side * side`.
    pub fn len(&self) -> usize {
        self.pixels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pixels.is_empty()
    }

    pub fn pixels(&self) -> &[T] {
        &self.pixels
    }

    pub fn into_pixels(self) -> Vec<T> {
        self.pixels
    }

    pub fn get(&self, row: usize, col: usize) -> T {
        self.pixels[row * self.side + col]
    }

    pub fn max(&self) -> T {
        self.pixels.iter().copied().fold(T::neg_infinity(), T::max)
    }

    pub fn min(&self) -> T {
        self.pixels.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn mean(&self) -> T {
        self.pixels.iter().copied().sum::<T>() / T::of_usize(self.len())
    }

    /// Euclidean norm of the vectorized image.
    pub fn l2_norm(&self) -> T {
        self.pixels.iter().map(|&v| v * v).sum::<T>().sqrt()
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            side: self.side,
            pixels: self.pixels.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn clamped(&self) -> Self {
        self.map(|v| v.max(T::zero()).min(T::one()))
    }

    /// Converts to another precision.
    pub fn cast<U: Scalar>(&self) -> ImageGrid<U> {
        ImageGrid {
            side: self.side,
            pixels: self.pixels.iter().map(|&v| U::of(v.to_f64_lossy())).collect(),
        }
    }
}

/// On-disk formats recognized by extension.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ImageFormat {
    Pgm,
    Png,
}

impl ImageFormat {
    pub fn from_path(path: &Path) -> Result<Self> {
        match path
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| e.to_ascii_lowercase())
            .as_deref()
        {
            Some("pgm") | Some("pnm") => Ok(Self::Pgm),
            Some("png") => Ok(Self::Png),
            other => Err(Error::UnsupportedFormat(format!(
                "unrecognized extension {:?} for {}",
                other.unwrap_or(""),
                path.display()
            ))),
        }
    }
}

/// Output sample depth.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum BitDepth {
    #[default]
    Eight,
    Sixteen,
}

impl BitDepth {
    pub fn maxval(self) -> u32 {
        match self {
            BitDepth::Eight => 255,
            BitDepth::Sixteen => 65535,
        }
    }
}

/// Raw decoded samples before normalization.
pub(crate) struct RawGray {
    pub width: usize,
    pub height: usize,
    pub maxval: u32,
    pub samples: Vec<u32>,
}

impl RawGray {
    fn into_grid<T: Scalar>(self) -> Result<ImageGrid<T>> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::EmptyImage);
        }
        if self.width != self.height {
            return Err(Error::NonSquare {
                width: self.width,
                height: self.height,
            });
        }
        let max = T::of(self.maxval as f64);
        let pixels = self.samples.iter().map(|&s| T::of(s as f64) / max).collect();
        ImageGrid::new(self.width, pixels)
    }
}

/// Quantizes `[0, 1]` intensities: clamp, scale by `maxval`, round half up.
pub(crate) fn quantize<T: Scalar>(img: &ImageGrid<T>, maxval: u32) -> Vec<u32> {
    let max = maxval as f64;
    img.pixels()
        .iter()
        .map(|&v| {
            let v = v.to_f64_lossy().clamp(0.0, 1.0);
            ((v * max + 0.5).floor() as u32).min(maxval)
        })
        .collect()
}

/// Loads a PGM (P2/P5) or grayscale PNG and normalizes to `[0, 1]`.
pub fn load_image<T: Scalar>(path: impl AsRef<Path>) -> Result<ImageGrid<T>> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let raw = match ImageFormat::from_path(path) {
        Ok(ImageFormat::Png) => png_io::decode_png(&bytes)?,
        Ok(ImageFormat::Pgm) => pgm::decode_pgm(&bytes)?,
        // Sniff the magic when the extension is unhelpful.
        Err(_) if bytes.starts_with(b"\x89PNG") => png_io::decode_png(&bytes)?,
        Err(_) if bytes.starts_with(b"P2") || bytes.starts_with(b"P5") => pgm::decode_pgm(&bytes)?,
        Err(e) => return Err(e),
    };
    raw.into_grid()
}

/// Writes `img` with 8-bit depth; the format follows the extension.
pub fn save_image<T: Scalar>(img: &ImageGrid<T>, path: impl AsRef<Path>) -> Result<()> {
    save_image_with_depth(img, path, BitDepth::Eight)
}

pub fn save_image_with_depth<T: Scalar>(img: &ImageGrid<T>, path: impl AsRef<Path>, depth: BitDepth) -> Result<()> {
    let path = path.as_ref();
    match ImageFormat::from_path(path)? {
        ImageFormat::Pgm => write_pgm(img, path, depth, PgmEncoding::Binary),
        ImageFormat::Png => write_png(img, path, depth),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_invariants() {
        assert!(matches!(ImageGrid::<f64>::new(0, vec![]), Err(Error::EmptyImage)));
        assert!(ImageGrid::<f64>::new(2, vec![0.0; 3]).is_err());
        assert!(ImageGrid::<f64>::new(1, vec![f64::NAN]).is_err());
        let img = ImageGrid::new(2, vec![0.0, 0.25, 0.5, 1.0]).unwrap();
        assert_eq!(img.get(1, 0), 0.5);
        assert_eq!(img.max(), 1.0);
        assert_eq!(img.mean(), 0.4375);
    }

    #[test]
    fn quantization_rounds_half_up_and_clamps() {
        let img = ImageGrid::new(2, vec![0.5, 1.2, -0.3, 1.0]).unwrap();
        assert_eq!(quantize(&img, 255), vec![128, 255, 0, 255]);
        // 0.5 * 65535 = 32767.5
        assert_eq!(quantize(&img, 65535)[0], 32768);
    }

    #[test]
    fn format_from_extension() {
        assert_eq!(ImageFormat::from_path(Path::new("a.PGM")).unwrap(), ImageFormat::Pgm);
        assert_eq!(ImageFormat::from_path(Path::new("a.png")).unwrap(), ImageFormat::Png);
        assert!(ImageFormat::from_path(Path::new("a.jpg")).is_err());
    }
}
