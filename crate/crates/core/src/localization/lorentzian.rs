//! Least-squares Lorentzian fit to a participation-ratio histogram.
//!
//! The model is `amplitude * (1/pi) * gamma / ((x - center)^2 + gamma^2)`.
//! For fixed `(center, gamma)` the amplitude enters linearly, so it is
//! eliminated in closed form and only the two nonlinear parameters are
//! searched: first on a fixed grid, then by damped Gauss-Newton on the
//! projected residual.

use super::PrHistogram;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A fit needs at least this many non-empty bins.
pub const MIN_NONEMPTY_BINS: usize = 8;

const CENTER_GRID_PER_BIN: usize = 4;
const WIDTH_GRID: usize = 64;
const MAX_ITERATIONS: usize = 200;

/// Unit-area Lorentzian density at `x`.
#[inline]
pub fn lorentzian<T: Scalar>(x: T, center: T, gamma: T) -> T {
    let dx = x - center;
    gamma / (T::PI() * (dx * dx + gamma * gamma))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LorentzianFit<T> {
    /// Peak location (PR units).
    pub lambda0: T,
    /// Half width at half maximum (PR units).
    pub gamma: T,
    /// Count-scale factor multiplying the unit-area profile.
    pub amplitude: T,
    /// Root-mean-square misfit over all bins, in counts.
    pub residual: T,
}

impl<T: Scalar> LorentzianFit<T> {
    pub fn eval(&self, x: T) -> T {
        self.amplitude * lorentzian(x, self.lambda0, self.gamma)
    }

    /// Curve value at the peak, `amplitude / (pi gamma)`.
    pub fn peak(&self) -> T {
        self.amplitude / (T::PI() * self.gamma)
    }

    /// `lambda0 - c gamma`
    pub fn lower_bound(&self, c: T) -> T {
        self.lambda0 - c * self.gamma
    }
}

/// Fits the histogram counts at the bin centers.
pub fn fit_lorentzian<T: Scalar>(hist: &PrHistogram<T>) -> Result<LorentzianFit<T>> {
    let values: Vec<T> = hist.counts().iter().map(|&c| T::of_usize(c)).collect();
    fit_lorentzian_points(&hist.centers(), &values)
}

/// Closed-form amplitude and projected sum of squares for fixed shape.
struct Projection<T> {
    amplitude: T,
    sse: T,
}

fn project<T: Scalar>(xs: &[T], ys: &[T], center: T, gamma: T, y_sq: T) -> Option<Projection<T>> {
    let mut phi_y = T::zero();
    let mut phi_phi = T::zero();
    for (&x, &y) in xs.iter().zip(ys) {
        let p = lorentzian(x, center, gamma);
        phi_y = phi_y + p * y;
        phi_phi = phi_phi + p * p;
    }
    if !(phi_phi > T::zero()) || !(phi_y > T::zero()) {
        return None;
    }
    let amplitude = phi_y / phi_phi;
    let sse = (y_sq - phi_y * amplitude).max(T::zero());
    Some(Projection { amplitude, sse })
}

fn exact_sse<T: Scalar>(xs: &[T], ys: &[T], center: T, gamma: T, amplitude: T) -> T {
    xs.iter()
        .zip(ys)
        .map(|(&x, &y)| {
            let r = amplitude * lorentzian(x, center, gamma) - y;
            r * r
        })
        .sum()
}

/// Fits `ys ~ amplitude * lorentzian(xs; center, gamma)`; `xs` ascending.
pub fn fit_lorentzian_points<T: Scalar>(xs: &[T], ys: &[T]) -> Result<LorentzianFit<T>> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch {
            expected: xs.len(),
            found: ys.len(),
        });
    }
    let nonempty = ys.iter().filter(|&&y| y > T::zero()).count();
    if nonempty < MIN_NONEMPTY_BINS {
        return Err(Error::TooFewBins {
            required: MIN_NONEMPTY_BINS,
            found: nonempty,
        });
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::FitDiverged);
    }
    let lo = xs.iter().copied().fold(T::infinity(), T::min);
    let hi = xs.iter().copied().fold(T::neg_infinity(), T::max);
    let span = hi - lo;
    if !(span > T::zero()) {
        return Err(Error::DegeneratePrRange);
    }
    let y_sq: T = ys.iter().map(|&y| y * y).sum();
    let spacing = span / T::of_usize(xs.len() - 1);

    // Coarse grid: centers at a quarter of the bin spacing, widths geometric
    // from a quarter bin to the whole span.
    let centers = (xs.len() - 1) * CENTER_GRID_PER_BIN + 1;
    let w_min = spacing / T::of(4.0);
    let ratio = (span / w_min).ln() / T::of_usize(WIDTH_GRID - 1);
    let mut best: Option<(T, T, Projection<T>)> = None;
    for ci in 0..centers {
        let center = lo + span * T::of_usize(ci) / T::of_usize(centers - 1);
        for wi in 0..WIDTH_GRID {
            let gamma = w_min * (ratio * T::of_usize(wi)).exp();
            if let Some(p) = project(xs, ys, center, gamma, y_sq) {
                if best.as_ref().is_none_or(|b| p.sse < b.2.sse) {
                    best = Some((center, gamma, p));
                }
            }
        }
    }
    let (mut center, mut gamma, _) = best.ok_or(Error::FitDiverged)?;

    // Damped Gauss-Newton on the projected residual r = A*(c, g) phi - y.
    let mut amplitude = project(xs, ys, center, gamma, y_sq)
        .ok_or(Error::FitDiverged)?
        .amplitude;
    let mut sse = exact_sse(xs, ys, center, gamma, amplitude);
    let mut damping = T::of(1e-3);
    let n = xs.len();
    let mut phi = vec![T::zero(); n];
    let mut d_center = vec![T::zero(); n];
    let mut d_gamma = vec![T::zero(); n];
    for _ in 0..MAX_ITERATIONS {
        let two = T::of(2.0);
        let inv_pi = T::FRAC_1_PI();
        let (mut pp, mut py, mut pc, mut pg, mut yc, mut yg) =
            (T::zero(), T::zero(), T::zero(), T::zero(), T::zero(), T::zero());
        for k in 0..n {
            let dx = xs[k] - center;
            let denom = dx * dx + gamma * gamma;
            phi[k] = gamma * inv_pi / denom;
            d_center[k] = gamma * inv_pi * two * dx / (denom * denom);
            d_gamma[k] = inv_pi * (dx * dx - gamma * gamma) / (denom * denom);
            pp = pp + phi[k] * phi[k];
            py = py + phi[k] * ys[k];
            pc = pc + phi[k] * d_center[k];
            pg = pg + phi[k] * d_gamma[k];
            yc = yc + ys[k] * d_center[k];
            yg = yg + ys[k] * d_gamma[k];
        }
        if !(pp > T::zero()) {
            return Err(Error::FitDiverged);
        }
        amplitude = py / pp;
        let da_dc = (yc - two * amplitude * pc) / pp;
        let da_dg = (yg - two * amplitude * pg) / pp;

        // Normal equations for the 2x2 problem.
        let (mut a11, mut a12, mut a22, mut b1, mut b2) = (T::zero(), T::zero(), T::zero(), T::zero(), T::zero());
        for k in 0..n {
            let r = amplitude * phi[k] - ys[k];
            let jc = amplitude * d_center[k] + phi[k] * da_dc;
            let jg = amplitude * d_gamma[k] + phi[k] * da_dg;
            a11 = a11 + jc * jc;
            a12 = a12 + jc * jg;
            a22 = a22 + jg * jg;
            b1 = b1 - jc * r;
            b2 = b2 - jg * r;
        }

        let mut improved = false;
        for _ in 0..30 {
            let m11 = a11 * (T::one() + damping);
            let m22 = a22 * (T::one() + damping);
            let det = m11 * m22 - a12 * a12;
            if !(det.abs() > T::zero()) {
                damping = damping * T::of(10.0);
                continue;
            }
            let step_c = (b1 * m22 - a12 * b2) / det;
            let step_g = (m11 * b2 - a12 * b1) / det;
            let new_center = (center + step_c).max(lo).min(hi);
            let new_gamma = gamma + step_g;
            if !(new_gamma > T::zero()) || !new_center.is_finite() {
                damping = damping * T::of(10.0);
                continue;
            }
            let Some(p) = project(xs, ys, new_center, new_gamma, y_sq) else {
                damping = damping * T::of(10.0);
                continue;
            };
            let new_sse = exact_sse(xs, ys, new_center, new_gamma, p.amplitude);
            if new_sse <= sse {
                let converged = (sse - new_sse) <= T::epsilon() * sse
                    && step_c.abs() <= T::epsilon().sqrt() * span
                    && step_g.abs() <= T::epsilon().sqrt() * gamma;
                center = new_center;
                gamma = new_gamma;
                amplitude = p.amplitude;
                sse = new_sse;
                damping = (damping / T::of(3.0)).max(T::of(1e-12));
                improved = !converged;
                break;
            }
            damping = damping * T::of(4.0);
        }
        if !improved {
            break;
        }
    }

    let residual = (sse / T::of_usize(n)).sqrt();
    if ![center, gamma, amplitude, residual].iter().all(|v| v.is_finite()) {
        return Err(Error::FitDiverged);
    }
    Ok(LorentzianFit {
        lambda0: center,
        gamma,
        amplitude,
        residual,
    })
}
