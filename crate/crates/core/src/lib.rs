//! Image denoising by quantum localization.
//!
//! An image is read as the potential of a discrete Schrödinger operator. The
//! eigenmodes of that operator form an image-adapted orthonormal basis;
//! modes spread over the whole image (high participation ratio) are treated
//! as noise and dropped, while localized modes are kept for reconstruction.
//!
//! The numerical core is generic over `f32`/`f64`; the aliases below fix the
//! double-precision types used by the command-line tool.

// Negated comparisons are used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod denoise;
pub mod eigen;
pub mod error;
pub mod hamiltonian;
pub mod image;
pub mod localization;
pub mod noisebench;
pub mod plot;
pub mod scalar;

pub use error::{Error, Result};

pub type Image = image::ImageGrid<f64>;
pub type Basis = eigen::EigenBasis<f64>;
pub type Spectrum = localization::ModeSpectrum<f64>;
pub type Selection = localization::ModeSelection<f64>;
