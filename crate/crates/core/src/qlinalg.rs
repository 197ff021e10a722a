//! Small complex matrices, qubit states and entropies.
//!
//! Everything here works on matrices of size at most 3×3. Qubit states are
//! 2×2; the only 3×3 states that occur are erasure-channel outputs, which are
//! block diagonal (a 2×2 block plus one scalar), and that is the only 3×3
//! shape the eigenvalue routine accepts.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Tolerance for Hermiticity and unit trace of a density matrix.
pub const STATE_TOL: f64 = 1e-12;
/// Most negative eigenvalue a density matrix may have.
pub const PSD_TOL: f64 = 1e-10;

const MAX_DIM: usize = 3;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// A complex matrix with 2 or 3 rows and columns.
///
/// Square matrices carry states and qubit Kraus operators; the 3×2 shape
/// carries the erasure channel's Kraus operators.
#[derive(Clone, Copy, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: [[Complex64; MAX_DIM]; MAX_DIM],
}

pub const IDENTITY_2: ComplexMatrix = ComplexMatrix::from_2x2([[ONE, ZERO], [ZERO, ONE]]);
pub const PAULI_X: ComplexMatrix = ComplexMatrix::from_2x2([[ZERO, ONE], [ONE, ZERO]]);
pub const PAULI_Y: ComplexMatrix =
    ComplexMatrix::from_2x2([[ZERO, Complex64::new(0.0, -1.0)], [I, ZERO]]);
pub const PAULI_Z: ComplexMatrix =
    ComplexMatrix::from_2x2([[ONE, ZERO], [ZERO, Complex64::new(-1.0, 0.0)]]);

/// σ1, σ2, σ3 in order.
pub const PAULIS: [ComplexMatrix; 3] = [PAULI_X, PAULI_Y, PAULI_Z];

impl ComplexMatrix {
    pub const fn from_2x2(m: [[Complex64; 2]; 2]) -> Self {
        Self {
            rows: 2,
            cols: 2,
            data: [
                [m[0][0], m[0][1], ZERO],
                [m[1][0], m[1][1], ZERO],
                [ZERO, ZERO, ZERO],
            ],
        }
    }

    /// Real 2×2 matrix.
    pub fn real_2x2(m: [[f64; 2]; 2]) -> Self {
        Self::from_2x2([
            [Complex64::new(m[0][0], 0.0), Complex64::new(m[0][1], 0.0)],
            [Complex64::new(m[1][0], 0.0), Complex64::new(m[1][1], 0.0)],
        ])
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        check_extent(rows)?;
        check_extent(cols)?;
        Ok(Self {
            rows,
            cols,
            data: [[ZERO; MAX_DIM]; MAX_DIM],
        })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        let mut m = Self::zeros(dim, dim)?;
        for i in 0..dim {
            m.data[i][i] = ONE;
        }
        Ok(m)
    }

    /// Builds a matrix from row slices; every row must have the same length.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let ncols = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(rows.len(), ncols)?;
        for (i, row) in rows.iter().enumerate() {
            if row.len() != ncols {
                return Err(Error::Structural(format!(
                    "row {i} has {} entries, expected {ncols}",
                    row.len()
                )));
            }
            m.data[i][..ncols].copy_from_slice(row);
        }
        Ok(m)
    }

    /// Diagonal matrix with real entries.
    pub fn diagonal(values: &[f64]) -> Result<Self> {
        let mut m = Self::zeros(values.len(), values.len())?;
        for (i, &v) in values.iter().enumerate() {
            m.data[i][i] = Complex64::new(v, 0.0);
        }
        Ok(m)
    }

    /// `|row⟩⟨col|` in a `rows × cols` matrix.
    pub fn unit(rows: usize, cols: usize, row: usize, col: usize) -> Result<Self> {
        let mut m = Self::zeros(rows, cols)?;
        if row >= rows || col >= cols {
            return Err(Error::Structural(format!(
                "entry ({row}, {col}) outside a {rows}×{cols} matrix"
            )));
        }
        m.data[row][col] = ONE;
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Row count of a square matrix.
    pub fn dim(&self) -> usize {
        self.rows
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        assert!(row < self.rows && col < self.cols, "index out of range");
        self.data[row][col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        assert!(row < self.rows && col < self.cols, "index out of range");
        self.data[row][col] = value;
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self {
            rows: self.cols,
            cols: self.rows,
            data: [[ZERO; MAX_DIM]; MAX_DIM],
        };
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j][i] = self.data[i][j].conj();
            }
        }
        out
    }

    pub fn scale(&self, factor: f64) -> Self {
        self.map(|z| z * factor)
    }

    pub fn scale_complex(&self, factor: Complex64) -> Self {
        self.map(|z| z * factor)
    }

    fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        let mut out = *self;
        for row in out.data.iter_mut().take(self.rows) {
            for z in row.iter_mut().take(self.cols) {
                *z = f(*z);
            }
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self.data[i][i]).sum()
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.entries().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self − other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        (*self - *other).max_abs()
    }

    /// Largest `|m[i][j] − conj(m[j][i])|`; infinite for non-square input.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut dev: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                dev = dev.max((self.data[i][j] - self.data[j][i].conj()).norm());
            }
        }
        dev
    }

    fn entries(&self) -> impl Iterator<Item = Complex64> + '_ {
        self.data[..self.rows]
            .iter()
            .flat_map(move |row| row[..self.cols].iter().copied())
    }

    /// `(m + m†) / 2`.
    fn hermitian_part(&self) -> Self {
        (*self + self.adjoint()).scale(0.5)
    }
}

fn check_extent(n: usize) -> Result<()> {
    if (2..=MAX_DIM).contains(&n) {
        Ok(())
    } else {
        Err(Error::Structural(format!(
            "matrix extent {n} not supported (must be 2 or 3)"
        )))
    }
}

impl Add for ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: Self) -> Self {
        assert_eq!(
            (self.rows, self.cols),
            (rhs.rows, rhs.cols),
            "shape mismatch"
        );
        let mut out = self;
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[i][j] += rhs.data[i][j];
            }
        }
        out
    }
}

impl Sub for ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: Self) -> Self {
        self + rhs.scale(-1.0)
    }
}

impl Mul for ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "shape mismatch");
        let mut out = Self {
            rows: self.rows,
            cols: rhs.cols,
            data: [[ZERO; MAX_DIM]; MAX_DIM],
        };
        for i in 0..self.rows {
            for j in 0..rhs.cols {
                out.data[i][j] = (0..self.cols)
                    .map(|k| self.data[i][k] * rhs.data[k][j])
                    .sum();
            }
        }
        out
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<Vec<Complex64>> = self.data[..self.rows]
            .iter()
            .map(|r| r[..self.cols].to_vec())
            .collect();
        f.debug_struct("ComplexMatrix")
            .field("entries", &rows)
            .finish()
    }
}

/// Real eigenvalues of a Hermitian matrix, in descending order.
///
/// 2×2 matrices use the closed form `½tr ± ½√(tr² − 4det)`, evaluated as
/// `mean ± hypot((a − d)/2, |b|)` to avoid cancellation. 3×3 matrices must
/// be a 2×2 block on levels 0–1 plus a decoupled scalar on level 2.
pub fn eigenvalues_hermitian(m: &ComplexMatrix) -> Result<Vec<f64>> {
    let deviation = m.hermitian_deviation();
    if deviation > STATE_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    let mut values = match m.dim() {
        2 => eig_2x2(m).to_vec(),
        3 => {
            let coupling = [(0, 2), (1, 2), (2, 0), (2, 1)]
                .iter()
                .map(|&(i, j)| m.get(i, j).norm())
                .fold(0.0, f64::max);
            if coupling > STATE_TOL {
                return Err(Error::UnsupportedShape);
            }
            let [a, b] = eig_2x2(m);
            vec![a, b, m.get(2, 2).re]
        }
        _ => unreachable!("matrix extents are 2 or 3"),
    };
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}

fn eig_2x2(m: &ComplexMatrix) -> [f64; 2] {
    let a = m.get(0, 0).re;
    let d = m.get(1, 1).re;
    let b = m.get(0, 1);
    let mean = 0.5 * (a + d);
    let radius = (0.5 * (a - d)).hypot(b.norm());
    [mean + radius, mean - radius]
}

/// A Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Clone, Copy, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    eigenvalues: [f64; MAX_DIM],
}

impl DensityMatrix {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::InvalidDensity(format!(
                "{}×{} matrix is not square",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let trace = matrix.trace();
        if (trace - ONE).norm() > STATE_TOL {
            return Err(Error::InvalidDensity(format!(
                "trace {trace} differs from 1"
            )));
        }
        let raw = eigenvalues_hermitian(&matrix)?;
        if let Some(&lowest) = raw.last() {
            if lowest < -PSD_TOL {
                return Err(Error::InvalidDensity(format!(
                    "negative eigenvalue {lowest:e}"
                )));
            }
        }
        let mut eigenvalues = [0.0; MAX_DIM];
        for (slot, &value) in eigenvalues.iter_mut().zip(&raw) {
            *slot = clamp_probability(value);
        }
        Ok(Self {
            matrix: matrix.hermitian_part(),
            eigenvalues,
        })
    }

    /// Pure qubit state at Bloch angles `(theta, phi)`.
    pub fn pure_qubit(theta: f64, phi: f64) -> Self {
        bloch_to_density(&BlochVector::from_angles(theta, phi))
            .expect("unit Bloch vectors are valid states")
    }

    /// `I / dim`.
    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        Self::new(ComplexMatrix::identity(dim)?.scale(1.0 / dim as f64))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Eigenvalues in descending order, clamped into `[0, 1]`.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues[..self.dim()]
    }
}

impl fmt::Debug for DensityMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("DensityMatrix").field(&self.matrix).finish()
    }
}

fn clamp_probability(x: f64) -> f64 {
    if (-PSD_TOL..0.0).contains(&x) {
        0.0
    } else if x > 1.0 && x <= 1.0 + PSD_TOL {
        1.0
    } else {
        x
    }
}

/// `−x log2 x`, with `0 log 0 = 0`.
fn entropy_term(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -x * x.log2()
    }
}

/// von Neumann entropy in bits.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    rho.eigenvalues().iter().copied().map(entropy_term).sum()
}

/// Binary entropy `H(x) = −x log2 x − (1−x) log2(1−x)`.
pub fn binary_entropy(x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain {
            name: "x",
            value: x,
            range: "[0, 1]",
        });
    }
    Ok(entropy_term(x) + entropy_term(1.0 - x))
}

/// A real vector `w` with `ρ = ½(I + w·σ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector([f64; 3]);

impl BlochVector {
    pub fn new(w: [f64; 3]) -> Result<Self> {
        let norm = norm3(&w);
        if norm > 1.0 + STATE_TOL || !norm.is_finite() {
            return Err(Error::OutsideBlochBall { norm });
        }
        Ok(Self(w))
    }

    /// Unit vector at polar angle `theta` from +z and azimuth `phi`.
    pub fn from_angles(theta: f64, phi: f64) -> Self {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        Self([st * cp, st * sp, ct])
    }

    pub fn components(&self) -> [f64; 3] {
        self.0
    }

    pub fn norm(&self) -> f64 {
        norm3(&self.0)
    }

    /// Spherical angles `(theta, phi)` with `theta ∈ [0, π]`, `phi ∈ [0, 2π)`.
    pub fn angles(&self) -> (f64, f64) {
        let [x, y, z] = self.0;
        let theta = x.hypot(y).atan2(z);
        let phi = y.atan2(x).rem_euclid(std::f64::consts::TAU);
        (theta, phi)
    }
}

pub(crate) fn norm3(w: &[f64; 3]) -> f64 {
    (w[0] * w[0] + w[1] * w[1] + w[2] * w[2]).sqrt()
}

/// `ρ = ½(I + w·σ)`.
pub fn bloch_to_density(w: &BlochVector) -> Result<DensityMatrix> {
    let [x, y, z] = w.0;
    let m = ComplexMatrix::from_2x2([
        [
            Complex64::new(0.5 * (1.0 + z), 0.0),
            Complex64::new(0.5 * x, -0.5 * y),
        ],
        [
            Complex64::new(0.5 * x, 0.5 * y),
            Complex64::new(0.5 * (1.0 - z), 0.0),
        ],
    ]);
    DensityMatrix::new(m)
}

/// Components `w_i = tr(ρ σ_i)` of a qubit state.
pub fn density_to_bloch(rho: &DensityMatrix) -> Result<BlochVector> {
    if rho.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: rho.dim(),
        });
    }
    let w = PAULIS.map(|s| (*rho.matrix() * s).trace().re);
    BlochVector::new(w)
}
