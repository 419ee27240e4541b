//! Image-derived Hamiltonian: the pixel intensities act as an on-site
//! potential and a five-point kinetic stencil couples neighbouring pixels.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use crate::eigen::SymmetricMatrix;
use crate::error::{Error, Result};
use crate::image::ImageGrid;
use crate::scalar::Scalar;

/// Planck-constant estimate `2 sqrt(sum (x_i / max x)^2) / N`.
pub fn estimate_hbar<T: Scalar>(img: &ImageGrid<T>) -> Result<T> {
    let max = img.max();
    if !(max > T::zero()) {
        return Err(Error::ZeroImage);
    }
    let energy: T = img.pixels().iter().map(|&x| (x / max) * (x / max)).sum();
    Ok(T::of(2.0) * energy.sqrt() / T::of_usize(img.side()))
}

/// Kinetic-term scale. Only `t = (alpha hbar)^2 / (2 mass)` enters the operator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlanckParams<T> {
    hbar: T,
    alpha: T,
    mass: T,
}

impl<T: Scalar> PlanckParams<T> {
    pub fn new(hbar: T, alpha: T, mass: T) -> Result<Self> {
        for (name, v) in [("hbar", hbar), ("alpha", alpha), ("mass", mass)] {
            if !(v.is_finite() && v > T::zero()) {
                return Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(Self { hbar, alpha, mass })
    }

    /// Estimates hbar from the image, with the given scale factor and unit mass.
    pub fn from_image(img: &ImageGrid<T>, alpha: T) -> Result<Self> {
        Self::new(estimate_hbar(img)?, alpha, T::one())
    }

    pub fn with_mass(self, mass: T) -> Result<Self> {
        Self::new(self.hbar, self.alpha, mass)
    }

    pub fn hbar(&self) -> T {
        self.hbar
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    pub fn mass(&self) -> T {
        self.mass
    }

    /// `alpha * hbar`
    pub fn effective_hbar(&self) -> T {
        self.alpha * self.hbar
    }

    pub fn coupling(&self) -> T {
        let h = self.effective_hbar();
        h * h / (T::of(2.0) * self.mass)
    }
}

/// How the horizontal `i +/- 1` band treats the end of an image row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum LaplacianMode {
    /// Couple every consecutive index pair of the vectorized image, including
    /// the last pixel of a row with the first pixel of the next.
    #[default]
    Literal,
    /// Drop the row-end/next-row-start coupling (true 2-D neighbours only).
    NoRowWrap,
}

impl fmt::Display for LaplacianMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LaplacianMode::Literal => "literal",
            LaplacianMode::NoRowWrap => "no_row_wrap",
        })
    }
}

impl FromStr for LaplacianMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "literal" => Ok(LaplacianMode::Literal),
            "no_row_wrap" | "no-row-wrap" => Ok(LaplacianMode::NoRowWrap),
            _ => Err(Error::InvalidParameter(format!(
                "unknown laplacian mode {s:?} (expected literal or no_row_wrap)"
            ))),
        }
    }
}

/// Sparse symmetric operator of dimension `side^2`:
/// `H(i,i) = x_i + 4t`, `H(i,j) = -t` for horizontal and vertical neighbours.
#[derive(Clone, Debug, PartialEq)]
pub struct Hamiltonian<T> {
    side: usize,
    diagonal: Vec<T>,
    coupling: T,
    mode: LaplacianMode,
}

impl<T: Scalar> Hamiltonian<T> {
    pub fn build(img: &ImageGrid<T>, params: &PlanckParams<T>, mode: LaplacianMode) -> Self {
        let t = params.coupling();
        let four_t = T::of(4.0) * t;
        Self {
            side: img.side(),
            diagonal: img.pixels().iter().map(|&x| x + four_t).collect(),
            coupling: t,
            mode,
        }
    }

    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn diagonal(&self) -> &[T] {
        &self.diagonal
    }

    pub fn coupling(&self) -> T {
        self.coupling
    }

    pub fn mode(&self) -> LaplacianMode {
        self.mode
    }

    /// Whether the horizontal bond `(i, i + 1)` is present.
    fn has_horizontal_bond(&self, i: usize) -> bool {
        i + 1 < self.dim() && (self.mode == LaplacianMode::Literal || i % self.side != self.side - 1)
    }

    /// Upper-triangle off-diagonal bonds `(i, j)` with `i < j`, ascending.
    pub fn bonds(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.side;
        (0..self.dim()).flat_map(move |i| {
            let h = self.has_horizontal_bond(i).then_some((i, i + 1));
            let v = (i + n < self.dim()).then_some((i, i + n));
            h.into_iter().chain(v)
        })
    }

    pub fn entry(&self, row: usize, col: usize) -> T {
        let (i, j) = if row <= col { (row, col) } else { (col, row) };
        if i == j {
            return self.diagonal[i];
        }
        let bonded = (j == i + 1 && self.has_horizontal_bond(i)) || j == i + self.side;
        if bonded && j < self.dim() {
            -self.coupling
        } else {
            T::zero()
        }
    }

    /// All nonzero entries as `(row, col, value)`, both triangles, row-major order.
    pub fn triplets(&self) -> Vec<(usize, usize, T)> {
        let mut out: Vec<(usize, usize, T)> = self.diagonal.iter().enumerate().map(|(i, &d)| (i, i, d)).collect();
        for (i, j) in self.bonds() {
            out.push((i, j, -self.coupling));
            out.push((j, i, -self.coupling));
        }
        out.sort_by_key(|&(r, c, _)| (r, c));
        out
    }

    pub fn to_dense(&self) -> SymmetricMatrix<T> {
        let n = self.dim();
        let mut data = vec![T::zero(); n * n];
        for (i, &d) in self.diagonal.iter().enumerate() {
            data[i * n + i] = d;
        }
        for (i, j) in self.bonds() {
            data[i * n + j] = -self.coupling;
            data[j * n + i] = -self.coupling;
        }
        SymmetricMatrix::from_parts_unchecked(n, data)
    }

    /// Sparse `y = H x`.
    pub fn apply(&self, x: &[T]) -> Vec<T> {
        let mut y: Vec<T> = self.diagonal.iter().zip(x).map(|(&d, &v)| d * v).collect();
        for (i, j) in self.bonds() {
            y[i] = y[i] - self.coupling * x[j];
            y[j] = y[j] - self.coupling * x[i];
        }
        y
    }

    /// Debug dump as `row,col,value` CSV.
    pub fn write_triplets_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "row,col,value")?;
        for (r, c, v) in self.triplets() {
            writeln!(out, "{r},{c},{v}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(t_hbar: f64) -> PlanckParams<f64> {
        PlanckParams::new(t_hbar, 1.0, 1.0).unwrap()
    }

    #[test]
    fn hbar_constant_image_is_two() {
        for n in [1, 3, 8] {
            let img = ImageGrid::filled(n, 0.3f64).unwrap();
            assert!((estimate_hbar(&img).unwrap() - 2.0).abs() < 1e-14);
        }
    }

    #[test]
    fn hbar_hand_example() {
        let img = ImageGrid::new(2, vec![1.0, 0.5, 0.25, 0.0]).unwrap();
        let h = estimate_hbar(&img).unwrap();
        assert!((h - 1.3125f64.sqrt()).abs() < 1e-15);
        assert!((h - 1.145644).abs() < 1e-6);
    }

    #[test]
    fn hbar_zero_image_errors() {
        let img = ImageGrid::filled(3, 0.0f64).unwrap();
        assert!(matches!(estimate_hbar(&img), Err(Error::ZeroImage)));
    }

    #[test]
    fn coupling_formula() {
        let p = PlanckParams::new(0.5f64, 2.0, 4.0).unwrap();
        assert_eq!(p.coupling(), 1.0 / 8.0);
        assert!(PlanckParams::new(0.0f64, 1.0, 1.0).is_err());
        assert!(PlanckParams::new(1.0f64, -1.0, 1.0).is_err());
        assert!(PlanckParams::new(1.0f64, 1.0, f64::NAN).is_err());
    }

    #[test]
    fn one_pixel() {
        let img = ImageGrid::new(1, vec![0.7f64]).unwrap();
        let p = params(1.0);
        let h = Hamiltonian::build(&img, &p, LaplacianMode::Literal);
        assert_eq!(h.to_dense().as_slice(), &[0.7 + 4.0 * 0.5]);
        assert_eq!(h.bonds().count(), 0);
    }

    #[test]
    fn two_by_two_literal_and_no_wrap() {
        let (a, b, c, d) = (0.1, 0.2, 0.3, 0.4);
        let img = ImageGrid::new(2, vec![a, b, c, d]).unwrap();
        let p = params(2.0f64.sqrt()); // t = 1
        let t = p.coupling();
        assert!((t - 1.0).abs() < 1e-15);

        let lit = Hamiltonian::build(&img, &p, LaplacianMode::Literal).to_dense();
        #[rustfmt::skip]
        let expect = [
            a + 4.0 * t, -t, -t, 0.0,
            -t, b + 4.0 * t, -t, -t,
            -t, -t, c + 4.0 * t, -t,
            0.0, -t, -t, d + 4.0 * t,
        ];
        assert_eq!(lit.as_slice(), &expect);

        let nowrap = Hamiltonian::build(&img, &p, LaplacianMode::NoRowWrap).to_dense();
        let mut expect_nowrap = expect;
        // The wrap bond joins pixel 1 (end of row 0) and pixel 2; entries (1, 2) and (2, 1).
        expect_nowrap[4 + 2] = 0.0;
        expect_nowrap[2 * 4 + 1] = 0.0;
        assert_eq!(nowrap.as_slice(), &expect_nowrap);
    }

    #[test]
    fn entry_apply_and_dense_agree() {
        let px: Vec<f64> = (0..16).map(|i| (i as f64 * 0.37).sin().abs()).collect();
        let img = ImageGrid::new(4, px).unwrap();
        for mode in [LaplacianMode::Literal, LaplacianMode::NoRowWrap] {
            let h = Hamiltonian::build(&img, &params(0.8), mode);
            let dense = h.to_dense();
            for r in 0..16 {
                for c in 0..16 {
                    assert_eq!(h.entry(r, c), dense.get(r, c));
                    assert_eq!(dense.get(r, c), dense.get(c, r));
                }
            }
            let x: Vec<f64> = (0..16).map(|i| i as f64 - 7.5).collect();
            let y1 = h.apply(&x);
            let y2 = dense.matvec(&x);
            for (u, v) in y1.iter().zip(&y2) {
                assert!((u - v).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn alpha_doubling_quadruples_offdiagonal() {
        let px: Vec<f64> = (0..9).map(|i| i as f64 / 8.0).collect();
        let img = ImageGrid::new(3, px).unwrap();
        let p1 = PlanckParams::new(0.6, 1.0, 1.0).unwrap();
        let p2 = PlanckParams::new(0.6, 2.0, 1.0).unwrap();
        let h1 = Hamiltonian::build(&img, &p1, LaplacianMode::Literal);
        let h2 = Hamiltonian::build(&img, &p2, LaplacianMode::Literal);
        assert!((h2.coupling() - 4.0 * h1.coupling()).abs() < 1e-15);
        for (i, (&d1, &d2)) in h1.diagonal().iter().zip(h2.diagonal()).enumerate() {
            let x = img.pixels()[i];
            assert!((d1 - (x + 4.0 * h1.coupling())).abs() < 1e-15);
            assert!((d2 - (x + 4.0 * h2.coupling())).abs() < 1e-15);
        }
    }

    #[test]
    fn triplet_csv() {
        let img = ImageGrid::new(2, vec![0.0f64; 4]).unwrap();
        let h = Hamiltonian::build(&img, &params(2.0f64.sqrt()), LaplacianMode::NoRowWrap);
        let mut buf = Vec::new();
        h.write_triplets_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "row,col,value");
        // 4 diagonal + 2 * 4 bonds (two horizontal, two vertical).
        assert_eq!(lines.len(), 1 + 4 + 8);
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("literal".parse::<LaplacianMode>().unwrap(), LaplacianMode::Literal);
        assert_eq!(
            "no_row_wrap".parse::<LaplacianMode>().unwrap(),
            LaplacianMode::NoRowWrap
        );
        assert!("periodic".parse::<LaplacianMode>().is_err());
        assert_eq!(LaplacianMode::NoRowWrap.to_string(), "no_row_wrap");
    }
}
