//! Synthetic piecewise-constant test images.
//!
//! Randomness comes from ChaCha8 seeded with `seed_from_u64`, mapped to
//! numbers by the helpers below rather than by `rand`'s distributions, so a
//! phantom is the same on every platform and crate version.

use std::fmt;
use std::str::FromStr;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::image::ImageGrid;
use crate::scalar::Scalar;

pub const MIN_PHANTOM_SIDE: usize = 16;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum PhantomKind {
    /// Bright non-overlapping rectangles on a black background.
    #[default]
    Blocks,
    /// Bright non-overlapping disks on a black background.
    Disks,
    /// Modified Shepp-Logan head with seed-jittered small features.
    SheppLoganLike,
}

impl fmt::Display for PhantomKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PhantomKind::Blocks => "blocks",
            PhantomKind::Disks => "disks",
            PhantomKind::SheppLoganLike => "shepp_logan_like",
        })
    }
}

impl FromStr for PhantomKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "blocks" => Ok(PhantomKind::Blocks),
            "disks" => Ok(PhantomKind::Disks),
            "shepp_logan_like" => Ok(PhantomKind::SheppLoganLike),
            other => Err(Error::InvalidParameter(format!(
                "unknown phantom `{other}` (expected blocks, disks or shepp_logan_like)"
            ))),
        }
    }
}

struct Stream(ChaCha8Rng);

impl Stream {
    fn new(seed: u64) -> Self {
        Self(ChaCha8Rng::seed_from_u64(seed))
    }

    /// Uniform in `[0, 1)` from the top 53 bits.
    fn unit(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform integer in `lo..=hi`.
    fn int(&mut self, lo: usize, hi: usize) -> usize {
        lo + ((self.unit() * (hi - lo + 1) as f64) as usize).min(hi - lo)
    }
}

pub fn make_phantom<T: Scalar>(kind: PhantomKind, side: usize, seed: u64) -> Result<ImageGrid<T>> {
    if side < MIN_PHANTOM_SIDE {
        return Err(Error::InvalidParameter(format!(
            "phantom side must be at least {MIN_PHANTOM_SIDE}, got {side}"
        )));
    }
    let mut rng = Stream::new(seed);
    let px = match kind {
        PhantomKind::Blocks => blocks(side, &mut rng),
        PhantomKind::Disks => disks(side, &mut rng),
        PhantomKind::SheppLoganLike => shepp_logan(side, &mut rng),
    };
    ImageGrid::new(side, px.into_iter().map(T::of).collect())
}

const PLACEMENT_ATTEMPTS: usize = 500;

/// Four to six rectangles, sides in `[N/8, N/4]`, kept one
/// pixel apart, intensities in `[0.55, 1)`. Coverage therefore stays
/// between roughly 6% and 38% of the image.
fn blocks(n: usize, rng: &mut Stream) -> Vec<f64> {
    let mut px = vec![0.0; n * n];
    let count = rng.int(4, 6);
    let (min_side, max_side) = (n / 8, n / 4);
    let mut placed: Vec<(usize, usize, usize, usize)> = Vec::new();
    for _ in 0..count {
        let h = rng.int(min_side, max_side);
        let w = rng.int(min_side, max_side);
        let value = 0.55 + 0.45 * rng.unit();
        for _ in 0..PLACEMENT_ATTEMPTS {
            let r = rng.int(1, n - h - 1);
            let c = rng.int(1, n - w - 1);
            let clear = placed
                .iter()
                .all(|&(pr, pc, ph, pw)| r > pr + ph || pr > r + h || c > pc + pw || pc > c + w);
            if clear {
                placed.push((r, c, h, w));
                for row in r..r + h {
                    px[row * n + c..row * n + c + w].fill(value);
                }
                break;
            }
        }
    }
    px
}

/// Three to five disks, radii in `[N/12, N/6]`, intensities in `[0.5, 1)`.
fn disks(n: usize, rng: &mut Stream) -> Vec<f64> {
    let mut px = vec![0.0; n * n];
    let count = rng.int(3, 5);
    let nf = n as f64;
    let mut placed: Vec<(f64, f64, f64)> = Vec::new();
    for _ in 0..count {
        let radius = nf / 12.0 + rng.unit() * (nf / 6.0 - nf / 12.0);
        let value = 0.5 + 0.5 * rng.unit();
        for _ in 0..PLACEMENT_ATTEMPTS {
            let cy = radius + 1.0 + rng.unit() * (nf - 2.0 * radius - 2.0);
            let cx = radius + 1.0 + rng.unit() * (nf - 2.0 * radius - 2.0);
            let clear = placed
                .iter()
                .all(|&(py, pxc, pr)| (py - cy).hypot(pxc - cx) > pr + radius + 1.0);
            if clear {
                placed.push((cy, cx, radius));
                for r in 0..n {
                    for c in 0..n {
                        let (dy, dx) = (r as f64 + 0.5 - cy, c as f64 + 0.5 - cx);
                        if dy * dy + dx * dx <= radius * radius {
                            px[r * n + c] = value;
                        }
                    }
                }
                break;
            }
        }
    }
    px
}

/// Modified Shepp-Logan ellipses: (value, semi-axis a, semi-axis b, x0, y0,
/// rotation in degrees), on `[-1, 1]^2`.
const SHEPP_LOGAN: [(f64, f64, f64, f64, f64, f64); 10] = [
    (1.0, 0.69, 0.92, 0.0, 0.0, 0.0),
    (-0.8, 0.6624, 0.874, 0.0, -0.0184, 0.0),
    (-0.2, 0.11, 0.31, 0.22, 0.0, -18.0),
    (-0.2, 0.16, 0.41, -0.22, 0.0, 18.0),
    (0.1, 0.21, 0.25, 0.0, 0.35, 0.0),
    (0.1, 0.046, 0.046, 0.0, 0.1, 0.0),
    (0.1, 0.046, 0.046, 0.0, -0.1, 0.0),
    (0.1, 0.046, 0.023, -0.08, -0.605, 0.0),
    (0.1, 0.023, 0.023, 0.0, -0.606, 0.0),
    (0.1, 0.023, 0.046, 0.06, -0.605, 0.0),
];

/// The first four ellipses are fixed; the small ones move by up to 0.02.
fn shepp_logan(n: usize, rng: &mut Stream) -> Vec<f64> {
    let ellipses: Vec<_> = SHEPP_LOGAN
        .iter()
        .enumerate()
        .map(|(k, &(v, a, b, x0, y0, deg))| {
            if k < 4 {
                (v, a, b, x0, y0, deg)
            } else {
                let jx = (rng.unit() - 0.5) * 0.04;
                let jy = (rng.unit() - 0.5) * 0.04;
                (v, a, b, x0 + jx, y0 + jy, deg)
            }
        })
        .collect();
    let mut px = vec![0.0; n * n];
    for r in 0..n {
        for c in 0..n {
            let x = (2.0 * c as f64 + 1.0) / n as f64 - 1.0;
            let y = 1.0 - (2.0 * r as f64 + 1.0) / n as f64;
            let mut v: f64 = 0.0;
            for &(val, a, b, x0, y0, deg) in &ellipses {
                let (s, co) = deg.to_radians().sin_cos();
                let (dx, dy) = (x - x0, y - y0);
                let u = dx * co + dy * s;
                let w = -dx * s + dy * co;
                if (u / a).powi(2) + (w / b).powi(2) <= 1.0 {
                    v += val;
                }
            }
            px[r * n + c] = v.clamp(0.0, 1.0);
        }
    }
    px
}
