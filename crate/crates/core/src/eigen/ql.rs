//! Implicit QL on a symmetric tridiagonal matrix, with the plane rotations
//! recorded for later replay on the Householder product.

use super::simd::{dispatch, mul_add};
use super::{MAX_QL_ITERATIONS, ROW_BLOCK};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Plane rotations in the order QL produced them.
///
/// Sweep `k` covers `sweeps[k] = (low, high)` and applies rotations on
/// columns `(i, i + 1)` for `i = high - 1` down to `low`, reading `(c, s)`
/// pairs sequentially from `cs`.
#[derive(Debug, Default)]
pub(super) struct RotationLog<T> {
    sweeps: Vec<(usize, usize)>,
    cs: Vec<T>,
}

impl<T: Scalar> RotationLog<T> {
    /// Applies every rotation to the rows of the row-major `n x n` matrix `z`.
    pub(super) fn apply_to_rows(&self, n: usize, z: &mut [T]) {
        replay(&self.sweeps, &self.cs, n, z);
    }
}

dispatch! {
    fn replay<T: Scalar>(sweeps: &[(usize, usize)], cs: &[T], n: usize, z: &mut [T]) -> () => replay_body
}

#[inline(always)]
fn replay_body<T: Scalar, const FMA: bool>(sweeps: &[(usize, usize)], cs: &[T], n: usize, z: &mut [T]) {
    const RB: usize = ROW_BLOCK;
    let mut block = vec![T::zero(); n * RB];
    let mut row0 = 0;
    while row0 < n {
        let rows = RB.min(n - row0);
        // Interleave: block[col * RB + r] = z[row0 + r][col].
        block.fill(T::zero());
        for r in 0..rows {
            let src = &z[(row0 + r) * n..(row0 + r + 1) * n];
            for (col, &v) in src.iter().enumerate() {
                block[col * RB + r] = v;
            }
        }

        let mut at = 0;
        for &(low, high) in sweeps {
            let len = high - low;
            let pairs = &cs[2 * at..2 * (at + len)];
            at += len;
            let mut carry = [T::zero(); RB];
            carry.copy_from_slice(&block[high * RB..(high + 1) * RB]);
            for (k, i) in (low..high).rev().enumerate() {
                let c = pairs[2 * k];
                let s = pairs[2 * k + 1];
                let (lo, hi) = block[i * RB..(i + 2) * RB].split_at_mut(RB);
                for r in 0..RB {
                    let zi = lo[r];
                    hi[r] = mul_add::<T, FMA>(s, zi, c * carry[r]);
                    carry[r] = mul_add::<T, FMA>(c, zi, -(s * carry[r]));
                }
            }
            block[low * RB..(low + 1) * RB].copy_from_slice(&carry);
        }

        for r in 0..rows {
            let dst = &mut z[(row0 + r) * n..(row0 + r + 1) * n];
            for (col, v) in dst.iter_mut().enumerate() {
                *v = block[col * RB + r];
            }
        }
        row0 += RB;
    }
}

/// Diagonalizes the tridiagonal matrix with diagonal `d` and sub-diagonal
/// `e` (`e[i]` couples `i - 1` and `i`, `e[0]` unused).
///
/// Returns the unsorted eigenvalues and the rotations that map the
/// tridiagonal basis onto the eigenbasis.
pub(super) fn implicit_ql<T: Scalar>(mut d: Vec<T>, mut e: Vec<T>) -> Result<(Vec<T>, RotationLog<T>)> {
    let n = d.len();
    let mut log = RotationLog::default();
    if n == 0 {
        return Ok((d, log));
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = T::zero();

    let two = T::one() + T::one();
    let eps = T::epsilon();
    let mut f = T::zero();
    let mut tst1 = T::zero();
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n - 1 && e[m].abs() > eps * tst1 {
            m += 1;
        }
        if m > l {
            let mut iterations = 0;
            loop {
                iterations += 1;
                if iterations > MAX_QL_ITERATIONS {
                    return Err(Error::NoConvergence { index: l });
                }
                let g = d[l];
                let mut p = (d[l + 1] - g) / (two * e[l]);
                let mut r = p.hypot(T::one());
                if p < T::zero() {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let h = g - d[l];
                for v in &mut d[l + 2..n] {
                    *v = *v - h;
                }
                f = f + h;

                p = d[m];
                let mut c = T::one();
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = T::zero();
                let mut s2 = T::zero();
                log.sweeps.push((l, m));
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    let h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    log.cs.push(c);
                    log.cs.push(s);
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if !(p.is_finite() && d[l].is_finite()) {
                    return Err(Error::NonFinite);
                }
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] = d[l] + f;
        e[l] = T::zero();
    }
    Ok((d, log))
}
