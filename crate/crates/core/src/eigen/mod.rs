//! Full-spectrum symmetric eigensolver.
//!
//! Householder reduction to tridiagonal form followed by implicit QL with
//! Wilkinson-style shifts (the EISPACK `tred2`/`tql2` pair), reorganised for
//! a single core:
//!
//! * the reduction gathers panels of reflectors and applies them to the
//!   trailing matrix as one rank-2k update;
//! * the orthogonal factor is formed from compact-WY blocks;
//! * QL runs on the tridiagonal alone and records its plane rotations, which
//!   are then replayed on blocks of rows held in an interleaved layout, so a
//!   block stays in cache for the whole spectrum.
//!
//! The hot kernels are compiled for AVX-512 and AVX2 and chosen at run time.

use crate::error::{Error, Result};
use crate::hamiltonian::Hamiltonian;
use crate::scalar::{axpy, dot, Scalar};

mod ql;
mod simd;
mod tridiagonal;

use ql::implicit_ql;
use tridiagonal::{accumulate_reflectors, tridiagonalize};

/// Default cap on the operator dimension (128x128 images).
pub const DEFAULT_MAX_DIM: usize = 16384;

/// Rows processed together when replaying rotations.
const ROW_BLOCK: usize = 32;

/// QL iterations allowed per eigenvalue before giving up.
const MAX_QL_ITERATIONS: usize = 60;

/// Dense symmetric matrix in row-major order with both triangles stored.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricMatrix<T> {
    dim: usize,
    data: Vec<T>,
}

impl<T: Scalar> SymmetricMatrix<T> {
    /// Wraps a row-major buffer, checking exact symmetry and finiteness.
    pub fn from_row_major(dim: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: data.len(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        for i in 0..dim {
            for j in 0..i {
                if data[i * dim + j] != data[j * dim + i] {
                    return Err(Error::NotSymmetric { row: i, col: j });
                }
            }
        }
        Ok(Self { dim, data })
    }

    pub fn from_diagonal(diag: &[T]) -> Self {
        let dim = diag.len();
        let mut data = vec![T::zero(); dim * dim];
        for (i, &v) in diag.iter().enumerate() {
            data[i * dim + i] = v;
        }
        Self { dim, data }
    }

    pub(crate) fn from_parts_unchecked(dim: usize, data: Vec<T>) -> Self {
        debug_assert_eq!(data.len(), dim * dim);
        Self { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> T {
        self.data[row * self.dim + col]
    }

    pub fn row(&self, row: usize) -> &[T] {
        &self.data[row * self.dim..(row + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    /// `y = M x`
    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        (0..self.dim).map(|i| dot(self.row(i), x)).collect()
    }
}

/// Complete orthonormal eigenbasis, eigenvalues ascending.
///
/// Eigenvectors are stored mode-major: mode `n` occupies
/// `vectors[n * dim..(n + 1) * dim]`. Each vector's entry of largest magnitude
/// is positive (lowest index wins ties), which makes the basis reproducible.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenBasis<T> {
    dim: usize,
    eigenvalues: Vec<T>,
    vectors: Vec<T>,
}

impl<T: Scalar> EigenBasis<T> {
    /// Assembles a basis from explicit parts. Only shapes and ordering are
    /// validated; orthonormality is the caller's responsibility (see
    /// [`EigenBasis::orthonormality_error`]).
    pub fn from_parts(dim: usize, eigenvalues: Vec<T>, vectors: Vec<T>) -> Result<Self> {
        if eigenvalues.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: eigenvalues.len(),
            });
        }
        if vectors.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: vectors.len(),
            });
        }
        if eigenvalues.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidBasis("eigenvalues must be non-decreasing".into()));
        }
        Ok(Self {
            dim,
            eigenvalues,
            vectors,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eigenvalues(&self) -> &[T] {
        &self.eigenvalues
    }

    pub fn eigenvalue(&self, mode: usize) -> T {
        self.eigenvalues[mode]
    }

    pub fn vector(&self, mode: usize) -> &[T] {
        &self.vectors[mode * self.dim..(mode + 1) * self.dim]
    }

    pub fn vectors(&self) -> impl ExactSizeIterator<Item = &[T]> {
        self.vectors.chunks_exact(self.dim.max(1)).take(self.dim)
    }

    /// max |e_m . e_n - delta_mn| over all pairs.
    pub fn orthonormality_error(&self) -> T {
        let mut worst = T::zero();
        for m in 0..self.dim {
            let vm = self.vector(m);
            for n in m..self.dim {
                let d = dot(vm, self.vector(n));
                let target = if m == n { T::one() } else { T::zero() };
                worst = worst.max((d - target).abs());
            }
        }
        worst
    }

    /// Relative residual ||M e_n - lambda_n e_n|| / max(1, |lambda_n|) per mode.
    pub fn residuals(&self, matrix: &SymmetricMatrix<T>) -> Vec<T> {
        (0..self.dim)
            .map(|n| {
                let v = self.vector(n);
                let lambda = self.eigenvalues[n];
                let mv = matrix.matvec(v);
                let norm = mv
                    .iter()
                    .zip(v)
                    .map(|(&a, &b)| (a - lambda * b) * (a - lambda * b))
                    .sum::<T>()
                    .sqrt();
                norm / lambda.abs().max(T::one())
            })
            .collect()
    }

    /// Rebuilds `sum_n lambda_n e_n e_n^T` as a dense row-major matrix.
    pub fn recompose(&self) -> Vec<T> {
        let n = self.dim;
        let mut out = vec![T::zero(); n * n];
        for (mode, v) in self.vectors().enumerate() {
            let lambda = self.eigenvalues[mode];
            for i in 0..n {
                let scale = lambda * v[i];
                axpy(scale, v, &mut out[i * n..(i + 1) * n]);
            }
        }
        out
    }
}

/// Dense full-spectrum solver with a dimension cap.
#[derive(Clone, Copy, Debug)]
pub struct Eigensolver {
    pub max_dim: usize,
}

impl Default for Eigensolver {
    fn default() -> Self {
        Self {
            max_dim: DEFAULT_MAX_DIM,
        }
    }
}

impl Eigensolver {
    pub fn new(max_dim: usize) -> Self {
        Self { max_dim }
    }

    pub fn solve_hamiltonian<T: Scalar>(&self, h: &Hamiltonian<T>) -> Result<EigenBasis<T>> {
        self.check_dim(h.dim())?;
        if h.diagonal().iter().any(|v| !v.is_finite()) || !h.coupling().is_finite() {
            return Err(Error::NonFinite);
        }
        self.solve(&h.to_dense())
    }

    pub fn solve<T: Scalar>(&self, matrix: &SymmetricMatrix<T>) -> Result<EigenBasis<T>> {
        self.check_dim(matrix.dim())?;
        if matrix.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        let n = matrix.dim();
        if n == 0 {
            return EigenBasis::from_parts(0, Vec::new(), Vec::new());
        }

        let mut work = matrix.as_slice().to_vec();
        let (diag, offdiag) = tridiagonalize(n, &mut work);
        let mut q = accumulate_reflectors(n, &work);
        drop(work);
        let (eigenvalues, rotations) = implicit_ql(diag, offdiag)?;
        rotations.apply_to_rows(n, &mut q);
        Ok(finish_basis(n, eigenvalues, &q))
    }

    fn check_dim(&self, dim: usize) -> Result<()> {
        if dim > self.max_dim {
            let max_side = (self.max_dim as f64).sqrt().floor() as usize;
            return Err(Error::DimensionTooLarge {
                dim,
                cap: self.max_dim,
                max_side,
            });
        }
        Ok(())
    }
}

/// Eigendecomposition with the default dimension cap.
pub fn eigendecompose<T: Scalar>(h: &Hamiltonian<T>) -> Result<EigenBasis<T>> {
    Eigensolver::default().solve_hamiltonian(h)
}

/// Sorts eigenpairs ascending, transposes to mode-major storage and applies
/// the sign convention.
fn finish_basis<T: Scalar>(n: usize, eigenvalues: Vec<T>, v: &[T]) -> EigenBasis<T> {
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eigenvalues[a]
            .partial_cmp(&eigenvalues[b])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });

    let mut vectors = vec![T::zero(); n * n];
    let mut sorted = Vec::with_capacity(n);
    for (mode, &src) in order.iter().enumerate() {
        sorted.push(eigenvalues[src]);
        let out = &mut vectors[mode * n..(mode + 1) * n];
        for (k, o) in out.iter_mut().enumerate() {
            *o = v[k * n + src];
        }
        normalize_sign(out);
    }
    EigenBasis {
        dim: n,
        eigenvalues: sorted,
        vectors,
    }
}

/// Flips `v` so its largest-magnitude entry (first on ties) is positive.
pub(crate) fn normalize_sign<T: Scalar>(v: &mut [T]) {
    let mut best = 0;
    let mut best_abs = T::neg_infinity();
    for (i, x) in v.iter().enumerate() {
        if x.abs() > best_abs {
            best_abs = x.abs();
            best = i;
        }
    }
    if !v.is_empty() && v[best] < T::zero() {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
}
