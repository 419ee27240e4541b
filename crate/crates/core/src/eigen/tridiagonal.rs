//! Householder reduction to tridiagonal form and explicit accumulation of the
//! orthogonal factor.
//!
//! Both stages are blocked so that most of the work happens in
//! register-tiled rank-k updates rather than in memory-bound rank-1 or
//! rank-2 sweeps.

use super::simd::{dispatch, mul_add};
use crate::scalar::Scalar;

const LANES: usize = 8;
/// Householder steps gathered before the trailing matrix is updated.
const PANEL: usize = 32;
/// Register tile: rows of the matrix being updated.
const TILE_R: usize = 4;
/// Register tile: columns of the matrix being updated.
const TILE_J: usize = 16;

dispatch! {
    /// Reduces the symmetric matrix `a` (row-major `n x n`, lower triangle
    /// read) to tridiagonal form.
    ///
    /// Returns `(d, e)` with `e[i]` coupling `i` and `i - 1` (`e[0] = 0`).
    /// On return row `i` of `a` holds the Householder vector of step `i` in
    /// its first `i` entries and `a[i][i]` holds `h_i = |u|^2 / 2` (zero when
    /// the step is skipped). Entries above the diagonal are left undefined.
    pub(super) fn tridiagonalize<T: Scalar>(n: usize, a: &mut [T]) -> (Vec<T>, Vec<T>) => tridiagonalize_body
}

/// Adds row `j` of a symmetric product over the lower triangle:
/// `p[k] += row[k] * v[j]` for `k < j`, and returns `row[..j] . v[..j]`.
#[inline(always)]
fn symv_row<T: Scalar, const FMA: bool>(row: &[T], j: usize, v: &[T], p: &mut [T]) -> T {
    let vj = v[j];
    let mut acc = [T::zero(); LANES];
    let mut rc = row[..j].chunks_exact(LANES);
    let mut vc = v[..j].chunks_exact(LANES);
    let mut pc = p[..j].chunks_exact_mut(LANES);
    for ((r, v), p) in (&mut rc).zip(&mut vc).zip(&mut pc) {
        for l in 0..LANES {
            acc[l] = mul_add::<T, FMA>(r[l], v[l], acc[l]);
            p[l] = mul_add::<T, FMA>(r[l], vj, p[l]);
        }
    }
    for ((r, v), p) in rc.remainder().iter().zip(vc.remainder()).zip(pc.into_remainder()) {
        acc[0] = mul_add::<T, FMA>(*r, *v, acc[0]);
        *p = mul_add::<T, FMA>(*r, vj, *p);
    }
    ((acc[0] + acc[1]) + (acc[2] + acc[3])) + ((acc[4] + acc[5]) + (acc[6] + acc[7]))
}

/// `sum_p x[p] * y[p]` over one panel row.
#[inline(always)]
fn panel_dot<T: Scalar, const FMA: bool>(x: &[T], y: &[T]) -> T {
    let mut acc = T::zero();
    for (&a, &b) in x[..PANEL].iter().zip(&y[..PANEL]) {
        acc = mul_add::<T, FMA>(a, b, acc);
    }
    acc
}

/// Panel-blocked reduction. Within a panel the stored matrix is left
/// untouched; the effective matrix is `A - U Q^T - Q U^T` with `U`, `Q` the
/// Householder and update vectors gathered so far (row-major, `PANEL` wide).
#[inline(always)]
fn tridiagonalize_body<T: Scalar, const FMA: bool>(n: usize, a: &mut [T]) -> (Vec<T>, Vec<T>) {
    let mut d = vec![T::zero(); n];
    let mut e = vec![T::zero(); n];
    if n == 0 {
        return (d, e);
    }
    let mut u_panel = vec![T::zero(); n * PANEL];
    let mut q_panel = vec![T::zero(); n * PANEL];
    let mut p = vec![T::zero(); n];
    let mut coefs = vec![T::zero(); n * 2 * PANEL];
    let mut w = vec![T::zero(); 2 * PANEL * w_stride(n)];

    let mut top = n - 1;
    while top >= 1 {
        let bottom = top.saturating_sub(PANEL - 1).max(1);
        u_panel[..(top + 1) * PANEL].fill(T::zero());
        q_panel[..(top + 1) * PANEL].fill(T::zero());

        for (slot, i) in (bottom..=top).rev().enumerate() {
            let (rows, rest) = a.split_at_mut(i * n);
            let row_i = &mut rest[..i + 1];
            if slot > 0 {
                let ui = &u_panel[i * PANEL..(i + 1) * PANEL];
                let qi = &q_panel[i * PANEL..(i + 1) * PANEL];
                for (k, x) in row_i.iter_mut().enumerate() {
                    let uk = &u_panel[k * PANEL..(k + 1) * PANEL];
                    let qk = &q_panel[k * PANEL..(k + 1) * PANEL];
                    *x = *x - panel_dot::<T, FMA>(ui, qk) - panel_dot::<T, FMA>(qi, uk);
                }
            }
            d[i] = row_i[i];

            let scale: T = row_i[..i].iter().map(|v| v.abs()).sum();
            if i == 1 || scale == T::zero() {
                e[i] = row_i[i - 1];
                row_i[i] = T::zero();
                continue;
            }

            let u = &mut row_i[..i];
            for v in u.iter_mut() {
                *v = *v / scale;
            }
            let mut h: T = u.iter().map(|&v| v * v).sum();
            let f = u[i - 1];
            let g = if f > T::zero() { -h.sqrt() } else { h.sqrt() };
            e[i] = scale * g;
            h = h - f * g;
            u[i - 1] = f - g;
            let u: &[T] = u;

            // p = A u over the stored (panel-stale) leading block.
            let p = &mut p[..i];
            p.fill(T::zero());
            for j in 0..i {
                let row = &rows[j * n..j * n + j + 1];
                let dot = symv_row::<T, FMA>(row, j, u, p);
                p[j] = p[j] + dot + row[j] * u[j];
            }
            // Correct for the panel updates not yet applied:
            // p -= U (Q^T u) + Q (U^T u).
            if slot > 0 {
                let mut qtu = [T::zero(); PANEL];
                let mut utu = [T::zero(); PANEL];
                for (k, &uk) in u.iter().enumerate() {
                    let urow = &u_panel[k * PANEL..(k + 1) * PANEL];
                    let qrow = &q_panel[k * PANEL..(k + 1) * PANEL];
                    for s in 0..slot {
                        qtu[s] = mul_add::<T, FMA>(qrow[s], uk, qtu[s]);
                        utu[s] = mul_add::<T, FMA>(urow[s], uk, utu[s]);
                    }
                }
                for (k, pk) in p.iter_mut().enumerate() {
                    let urow = &u_panel[k * PANEL..(k + 1) * PANEL];
                    let qrow = &q_panel[k * PANEL..(k + 1) * PANEL];
                    *pk = *pk - panel_dot::<T, FMA>(urow, &qtu) - panel_dot::<T, FMA>(qrow, &utu);
                }
            }
            for v in p.iter_mut() {
                *v = *v / h;
            }
            let k = p.iter().zip(u).map(|(&x, &y)| x * y).sum::<T>() / (h + h);
            for (idx, (&pv, &uv)) in p.iter().zip(u).enumerate() {
                u_panel[idx * PANEL + slot] = uv;
                q_panel[idx * PANEL + slot] = pv - k * uv;
            }
            row_i[i] = h;
        }

        // Trailing update A[0..bottom, 0..bottom] -= U Q^T + Q U^T.
        if bottom > 0 {
            let cols = (bottom.div_ceil(TILE_J) * TILE_J).min(n);
            let ws = w_stride(cols);
            for k in 0..bottom {
                let c = &mut coefs[k * 2 * PANEL..(k + 1) * 2 * PANEL];
                c[..PANEL].copy_from_slice(&u_panel[k * PANEL..(k + 1) * PANEL]);
                c[PANEL..].copy_from_slice(&q_panel[k * PANEL..(k + 1) * PANEL]);
            }
            for col in 0..cols {
                for s in 0..PANEL {
                    w[s * ws + col] = q_panel[col * PANEL + s];
                    w[(PANEL + s) * ws + col] = u_panel[col * PANEL + s];
                }
            }
            subtract_product::<T, FMA, { 2 * PANEL }>(a, n, bottom, &coefs, &w, ws, |k0, rows| {
                ((k0 + rows).div_ceil(TILE_J) * TILE_J).min(cols)
            });
        }
        if bottom == 1 {
            break;
        }
        top = bottom - 1;
    }
    d[0] = a[0];
    (d, e)
}

/// Row stride for the wide operand of a rank-k update: a multiple of the
/// tile width plus half a tile, so tiles in consecutive rows do not share
/// cache sets.
fn w_stride(m: usize) -> usize {
    m.div_ceil(TILE_J) * TILE_J + TILE_J / 2
}

/// `target[k][..cols(k0, r)] -= sum_r coefs[k][r] * w[r][..]` for rows
/// `k < rows`, where `coefs` is row-major with `KD` columns and `w` has
/// `KD` rows of stride `ws`. `cols` gives the column extent for a tile of
/// `r` rows starting at `k0`.
#[inline(always)]
fn subtract_product<T: Scalar, const FMA: bool, const KD: usize>(
    target: &mut [T],
    stride: usize,
    rows: usize,
    coefs: &[T],
    w: &[T],
    ws: usize,
    cols: impl Fn(usize, usize) -> usize,
) {
    let full_k = rows - rows % TILE_R;
    let mut k0 = 0;
    while k0 < rows {
        let tile_rows = if k0 < full_k { TILE_R } else { 1 };
        let m = cols(k0, tile_rows);
        let full_j = m - m % TILE_J;
        let mut j0 = 0;
        while j0 < full_j {
            if tile_rows == TILE_R {
                update_tile::<T, FMA, KD, TILE_R, TILE_J>(target, stride, coefs, w, ws, k0, j0);
            } else {
                update_tile::<T, FMA, KD, 1, TILE_J>(target, stride, coefs, w, ws, k0, j0);
            }
            j0 += TILE_J;
        }
        for j in full_j..m {
            if tile_rows == TILE_R {
                update_tile::<T, FMA, KD, TILE_R, 1>(target, stride, coefs, w, ws, k0, j);
            } else {
                update_tile::<T, FMA, KD, 1, 1>(target, stride, coefs, w, ws, k0, j);
            }
        }
        k0 += tile_rows;
    }
}

#[inline(always)]
fn update_tile<T: Scalar, const FMA: bool, const KD: usize, const K: usize, const J: usize>(
    target: &mut [T],
    stride: usize,
    coefs: &[T],
    w: &[T],
    ws: usize,
    k0: usize,
    j0: usize,
) {
    let mut acc = [[T::zero(); J]; K];
    for x in 0..K {
        acc[x].copy_from_slice(&target[(k0 + x) * stride + j0..(k0 + x) * stride + j0 + J]);
    }
    for r in 0..KD {
        let wr: &[T; J] = w[r * ws + j0..r * ws + j0 + J].try_into().unwrap();
        for x in 0..K {
            let coef = -coefs[(k0 + x) * KD + r];
            for l in 0..J {
                acc[x][l] = mul_add::<T, FMA>(coef, wr[l], acc[x][l]);
            }
        }
    }
    for x in 0..K {
        target[(k0 + x) * stride + j0..(k0 + x) * stride + j0 + J].copy_from_slice(&acc[x]);
    }
}

/// Reflectors folded into one compact-WY block when forming Q.
const WY_BLOCK: usize = 32;

dispatch! {
    /// Forms `Q = P_{n-1} ... P_2` (row-major) from the vectors left in
    /// `reduced` by [`tridiagonalize`], so that `A = Q T Q^T`.
    pub(super) fn accumulate_reflectors<T: Scalar>(n: usize, reduced: &[T]) -> Vec<T> => accumulate_body
}

/// Applies consecutive reflectors `P_s, ..., P_{e-1}` at once as
/// `Q <- (I - V S V^T) Q`, with `S` the upper-triangular compact-WY factor
/// of `P_{e-1} ... P_s`.
#[inline(always)]
fn accumulate_body<T: Scalar, const FMA: bool>(n: usize, reduced: &[T]) -> Vec<T> {
    let mut q = vec![T::zero(); n * n];
    for i in 0..n {
        q[i * n + i] = T::one();
    }
    if n < 3 {
        return q;
    }

    // `vt` is V stored row-major (m x WY_BLOCK); column c is the c-th factor
    // of the product, counted from the left. Unused columns stay zero.
    let mut vt = vec![T::zero(); n * WY_BLOCK];
    let mut s = [T::zero(); WY_BLOCK * WY_BLOCK];
    let mut w = vec![T::zero(); WY_BLOCK * w_stride(n)];
    let mut pack = vec![T::zero(); PROJECT_ROWS * n];
    let mut col = vec![T::zero(); n];
    let mut vtv = [T::zero(); WY_BLOCK];

    let mut block_start = 2;
    while block_start < n {
        let end = (block_start + WY_BLOCK).min(n);
        let reflectors: Vec<usize> = (block_start..end)
            .rev()
            .filter(|&i| reduced[i * n + i] != T::zero())
            .collect();
        block_start = end;
        let b = reflectors.len();
        if b == 0 {
            continue;
        }
        let m = end - 1;
        let vt = &mut vt[..m * WY_BLOCK];
        vt.fill(T::zero());
        for (c, &i) in reflectors.iter().enumerate() {
            for (k, &x) in reduced[i * n..i * n + i].iter().enumerate() {
                vt[k * WY_BLOCK + c] = x;
            }
        }

        s.fill(T::zero());
        for c in 0..b {
            let tau = T::one() / reduced[reflectors[c] * n + reflectors[c]];
            let len = reflectors[c];
            for (k, x) in col[..len].iter_mut().enumerate() {
                *x = vt[k * WY_BLOCK + c];
            }
            vtv[..c].fill(T::zero());
            for k in 0..len {
                let ck = col[k];
                let row = &vt[k * WY_BLOCK..k * WY_BLOCK + c];
                for (acc, &v) in vtv[..c].iter_mut().zip(row) {
                    *acc = mul_add::<T, FMA>(v, ck, *acc);
                }
            }
            for r in 0..c {
                let mut acc = T::zero();
                for k in r..c {
                    acc = acc + s[r * WY_BLOCK + k] * vtv[k];
                }
                s[r * WY_BLOCK + c] = -tau * acc;
            }
            s[c * WY_BLOCK + c] = tau;
        }

        let ws = w_stride(m);
        let w = &mut w[..WY_BLOCK * ws];
        project::<T, FMA>(m, n, &q, vt, w, &mut pack);
        // W <- S W, top-down so each row reads only rows not yet overwritten.
        for r in 0..b {
            let (upper, lower) = w.split_at_mut((r + 1) * ws);
            let wr = &mut upper[r * ws..r * ws + m];
            let srr = s[r * WY_BLOCK + r];
            for x in wr.iter_mut() {
                *x = *x * srr;
            }
            for c in r + 1..b {
                let src = &lower[(c - r - 1) * ws..(c - r - 1) * ws + m];
                let coef = s[r * WY_BLOCK + c];
                for (x, &y) in wr.iter_mut().zip(src) {
                    *x = mul_add::<T, FMA>(coef, y, *x);
                }
            }
        }
        subtract_product::<T, FMA, WY_BLOCK>(&mut q, n, m, vt, w, ws, |_, _| m);
    }
    q
}

/// Rows of Q packed per pass when projecting.
const PROJECT_ROWS: usize = 64;

/// `W = V^T Q[0..m, 0..m]` with `W` stored `WY_BLOCK x w_stride(m)`.
///
/// Panels of Q are packed tile by tile first; walking Q in place would stride
/// through rows whose length is often a multiple of a large power of two.
#[inline(always)]
fn project<T: Scalar, const FMA: bool>(m: usize, n: usize, q: &[T], vt: &[T], w: &mut [T], pack: &mut [T]) {
    let ws = w_stride(m);
    w.fill(T::zero());
    let full = m - m % TILE_J;
    for k0 in (0..m).step_by(PROJECT_ROWS) {
        let rows = (m - k0).min(PROJECT_ROWS);
        for kk in 0..rows {
            let src = &q[(k0 + kk) * n..(k0 + kk) * n + full];
            for (t, chunk) in src.chunks_exact(TILE_J).enumerate() {
                let at = (t * PROJECT_ROWS + kk) * TILE_J;
                pack[at..at + TILE_J].copy_from_slice(chunk);
            }
        }
        for (t, j0) in (0..full).step_by(TILE_J).enumerate() {
            let panel = &pack[t * PROJECT_ROWS * TILE_J..(t * PROJECT_ROWS + rows) * TILE_J];
            for r0 in (0..WY_BLOCK).step_by(TILE_R) {
                project_tile::<T, FMA, TILE_J>(ws, panel, TILE_J, &vt[k0 * WY_BLOCK..], w, r0, j0);
            }
        }
        for j in full..m {
            for r0 in (0..WY_BLOCK).step_by(TILE_R) {
                let panel = &q[k0 * n + j..(k0 + rows - 1) * n + j + 1];
                project_tile::<T, FMA, 1>(ws, panel, n, &vt[k0 * WY_BLOCK..], w, r0, j);
            }
        }
    }
}

/// Accumulates one `TILE_R x J` tile of W from a panel whose rows are
/// `stride` apart, starting at the panel's first row.
#[inline(always)]
fn project_tile<T: Scalar, const FMA: bool, const J: usize>(
    ws: usize,
    panel: &[T],
    stride: usize,
    vt: &[T],
    w: &mut [T],
    r0: usize,
    j0: usize,
) {
    let mut acc = [[T::zero(); J]; TILE_R];
    for x in 0..TILE_R {
        acc[x].copy_from_slice(&w[(r0 + x) * ws + j0..(r0 + x) * ws + j0 + J]);
    }
    let rows = (panel.len() - J) / stride + 1;
    for k in 0..rows {
        let z: &[T; J] = panel[k * stride..k * stride + J].try_into().unwrap();
        let coefs: &[T; TILE_R] = vt[k * WY_BLOCK + r0..k * WY_BLOCK + r0 + TILE_R].try_into().unwrap();
        for x in 0..TILE_R {
            for l in 0..J {
                acc[x][l] = mul_add::<T, FMA>(coefs[x], z[l], acc[x][l]);
            }
        }
    }
    for x in 0..TILE_R {
        w[(r0 + x) * ws + j0..(r0 + x) * ws + j0 + J].copy_from_slice(&acc[x]);
    }
}
