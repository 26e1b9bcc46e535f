//! Dense complex matrix kernel.
//!
//! Everything here works on small row-major complex matrices (total dimension
//! up to a few dozen). Tensor structure is always bipartite, `H_A ⊗ H_B`, with
//! the A index major: basis element `|i⟩_A ⊗ |k⟩_B` sits at `i * m + k`.

mod eig;
pub(crate) mod real;

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use eig::{hermitian_eig, HermitianEig};

pub type C64 = num_complex::Complex64;

pub(crate) const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub(crate) const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Relative Hermiticity defect (per unit of total dimension) below which
/// inputs are silently symmetrized before use.
pub const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("shape mismatch: {left_rows}x{left_cols} vs {right_rows}x{right_cols}")]
    ShapeMismatch {
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("expected a {expected}x{expected} operator, got {rows}x{cols}")]
    DimensionMismatch {
        expected: usize,
        rows: usize,
        cols: usize,
    },
    #[error("matrix is not Hermitian (defect {defect:.3e} exceeds {tolerance:.3e})")]
    NotHermitian { defect: f64, tolerance: f64 },
    #[error("vector length {len} is not a valid Hermitian vectorization")]
    BadVectorLength { len: usize },
    #[error("invalid bipartite dimensions {n}x{m}: both factors need dimension >= 2")]
    BadDims { n: usize, m: usize },
    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:.3e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },
}

pub type Result<T> = std::result::Result<T, LinalgError>;

/// Dimensions of the two tensor factors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BipartiteDims {
    pub n: usize,
    pub m: usize,
}

impl BipartiteDims {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        if n < 2 || m < 2 {
            return Err(LinalgError::BadDims { n, m });
        }
        Ok(Self { n, m })
    }

    /// Total dimension `n * m`.
    pub fn total(&self) -> usize {
        self.n * self.m
    }

    /// Carathéodory bound for full-rank operators, `(n m)^2`.
    pub fn caratheodory_bound(&self) -> usize {
        self.total() * self.total()
    }

    fn check_operator(&self, mat: &ComplexMatrix) -> Result<()> {
        let d = self.total();
        if mat.rows != d || mat.cols != d {
            return Err(LinalgError::DimensionMismatch {
                expected: d,
                rows: mat.rows,
                cols: mat.cols,
            });
        }
        Ok(())
    }
}

impl fmt::Display for BipartiteDims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.n, self.m)
    }
}

/// Which tensor factor an operation acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Subsystem {
    A,
    B,
}

#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut out = Self::zeros(dim, dim);
        for i in 0..dim {
            out[(i, i)] = ONE;
        }
        out
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row-major entries. Panics if the length is wrong.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<C64>) -> Self {
        assert_eq!(data.len(), rows * cols, "entry count must equal rows*cols");
        Self { rows, cols, data }
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        Self::from_fn(r, c, |i, j| C64::new(rows[i][j], 0.0))
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut out = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            out[(i, i)] = C64::new(v, 0.0);
        }
        out
    }

    /// `|v⟩⟨w|`.
    pub fn outer(v: &[C64], w: &[C64]) -> Self {
        Self::from_fn(v.len(), w.len(), |i, j| v[i] * w[j].conj())
    }

    /// Rank-one projector `|v⟩⟨v|`.
    pub fn projector(v: &[C64]) -> Self {
        Self::outer(v, v)
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

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_complex(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(self.shape_error(rhs));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == ZERO {
                    continue;
                }
                let row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let dst = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// `⟨v|A|v⟩`.
    pub fn expectation(&self, v: &[C64]) -> C64 {
        let av = self.mul_vec(v);
        inner(v, &av)
    }

    /// Largest entrywise deviation from Hermiticity, `max |A_ij - conj(A_ji)|`.
    pub fn hermitian_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// `(A + A†) / 2`.
    pub fn symmetrized(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + self[(j, i)].conj()) * 0.5
        })
    }

    /// Symmetrizes if the Hermiticity defect is within `tol * d`, errors otherwise.
    pub fn to_hermitian(&self, tol: f64) -> Result<Self> {
        if !self.is_square() {
            return Err(LinalgError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let tolerance = tol * self.rows as f64 * self.max_abs().max(1.0);
        let defect = self.hermitian_defect();
        if defect > tolerance || !defect.is_finite() {
            return Err(LinalgError::NotHermitian { defect, tolerance });
        }
        Ok(self.symmetrized())
    }

    /// Tolerance-based equality; the tolerance bounds every entrywise difference.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self
                .data
                .iter()
                .zip(&other.data)
                .all(|(a, b)| (a - b).norm() <= tol)
    }

    fn shape_error(&self, rhs: &Self) -> LinalgError {
        LinalgError::ShapeMismatch {
            left_rows: self.rows,
            left_cols: self.cols,
            right_rows: rhs.rows,
            right_cols: rhs.cols,
        }
    }

    fn check_same_shape(&self, rhs: &Self) -> Result<()> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(self.shape_error(rhs));
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

// The arithmetic operators panic on shape mismatch, like slice indexing does.
impl<'a> Add<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl<'a> Sub<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl AddAssign<&ComplexMatrix> for ComplexMatrix {
    fn add_assign(&mut self, rhs: &ComplexMatrix) {
        self.check_same_shape(rhs).expect("matrix addition");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl SubAssign<&ComplexMatrix> for ComplexMatrix {
    fn sub_assign(&mut self, rhs: &ComplexMatrix) {
        self.check_same_shape(rhs).expect("matrix subtraction");
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a -= b;
        }
    }
}

impl<'a> Mul<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs).expect("matrix product")
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn neg(self) -> ComplexMatrix {
        self.scale(-1.0)
    }
}

/// `⟨v|w⟩`, conjugate-linear in the first argument.
pub fn inner(v: &[C64], w: &[C64]) -> C64 {
    v.iter().zip(w).map(|(a, b)| a.conj() * b).sum()
}

pub fn vector_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn normalized(v: &[C64]) -> Vec<C64> {
    let norm = vector_norm(v);
    v.iter().map(|z| z / norm).collect()
}

/// Kronecker product of vectors.
pub fn kron_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            out.push(x * y);
        }
    }
    out
}

/// Kronecker product: entry `(i*rB + k, j*cB + l)` equals `A[i,j] * B[k,l]`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (rb, cb) = (b.rows, b.cols);
    let mut out = ComplexMatrix::zeros(a.rows * rb, a.cols * cb);
    for i in 0..a.rows {
        for j in 0..a.cols {
            let x = a[(i, j)];
            if x == ZERO {
                continue;
            }
            for k in 0..rb {
                for l in 0..cb {
                    out[(i * rb + k, j * cb + l)] = x * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Reduced operator on the kept subsystem.
pub fn partial_trace(
    rho: &ComplexMatrix,
    dims: BipartiteDims,
    keep: Subsystem,
) -> Result<ComplexMatrix> {
    partial_trace_raw(rho, dims.n, dims.m, keep)
}

/// Partial trace for arbitrary factor sizes (either factor may be 1).
pub(crate) fn partial_trace_raw(
    rho: &ComplexMatrix,
    n: usize,
    m: usize,
    keep: Subsystem,
) -> Result<ComplexMatrix> {
    let d = n * m;
    if rho.rows != d || rho.cols != d {
        return Err(LinalgError::DimensionMismatch {
            expected: d,
            rows: rho.rows,
            cols: rho.cols,
        });
    }
    Ok(match keep {
        Subsystem::A => ComplexMatrix::from_fn(n, n, |i, j| {
            (0..m).map(|k| rho[(i * m + k, j * m + k)]).sum()
        }),
        Subsystem::B => ComplexMatrix::from_fn(m, m, |k, l| {
            (0..n).map(|i| rho[(i * m + k, i * m + l)]).sum()
        }),
    })
}

/// Transposes the chosen tensor factor: `⟨ik|ρ^{T_B}|jl⟩ = ⟨il|ρ|jk⟩` for side B.
pub fn partial_transpose(
    rho: &ComplexMatrix,
    dims: BipartiteDims,
    side: Subsystem,
) -> Result<ComplexMatrix> {
    dims.check_operator(rho)?;
    Ok(partial_transpose_raw(rho, dims.n, dims.m, side))
}

pub(crate) fn partial_transpose_raw(
    rho: &ComplexMatrix,
    n: usize,
    m: usize,
    side: Subsystem,
) -> ComplexMatrix {
    let d = n * m;
    ComplexMatrix::from_fn(d, d, |r, c| {
        let (i, k) = (r / m, r % m);
        let (j, l) = (c / m, c % m);
        match side {
            Subsystem::B => rho[(i * m + l, j * m + k)],
            Subsystem::A => rho[(j * m + k, i * m + l)],
        }
    })
}

/// Hilbert–Schmidt distance `sqrt(Tr[(a-b)†(a-b)])`.
pub fn hs_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    a.check_same_shape(b)?;
    Ok(a.data
        .iter()
        .zip(&b.data)
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt())
}

/// Hilbert–Schmidt inner product `Tr[a† b]`.
pub fn hs_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<C64> {
    a.check_same_shape(b)?;
    Ok(a.data.iter().zip(&b.data).map(|(x, y)| x.conj() * y).sum())
}

/// Isometric real coordinates of a Hermitian operator.
///
/// Layout: the `d` diagonal entries first, then for every `i < j` (row-major)
/// the pair `(√2 Re H_ij, √2 Im H_ij)`. Euclidean distances between images
/// equal Hilbert–Schmidt distances between operators.
pub fn vectorize_hermitian(h: &ComplexMatrix) -> Result<Vec<f64>> {
    let h = h.to_hermitian(HERMITIAN_TOL)?;
    Ok(vectorize_unchecked(&h))
}

pub(crate) fn vectorize_unchecked(h: &ComplexMatrix) -> Vec<f64> {
    let d = h.rows;
    let mut out = Vec::with_capacity(d * d);
    for i in 0..d {
        out.push(h[(i, i)].re);
    }
    let s = std::f64::consts::SQRT_2;
    for i in 0..d {
        for j in (i + 1)..d {
            let z = h[(i, j)];
            out.push(s * z.re);
            out.push(s * z.im);
        }
    }
    out
}

/// Inverse of [`vectorize_hermitian`].
pub fn devectorize_hermitian(v: &[f64]) -> Result<ComplexMatrix> {
    let d = (v.len() as f64).sqrt().round() as usize;
    if d * d != v.len() {
        return Err(LinalgError::BadVectorLength { len: v.len() });
    }
    let mut out = ComplexMatrix::zeros(d, d);
    for i in 0..d {
        out[(i, i)] = C64::new(v[i], 0.0);
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut pos = d;
    for i in 0..d {
        for j in (i + 1)..d {
            let z = C64::new(v[pos] * s, v[pos + 1] * s);
            out[(i, j)] = z;
            out[(j, i)] = z.conj();
            pos += 2;
        }
    }
    Ok(out)
}

/// Reshapes a vector on `H_A ⊗ H_B` into its `n x m` coefficient matrix.
pub fn reshape_bipartite(psi: &[C64], dims: BipartiteDims) -> ComplexMatrix {
    ComplexMatrix::from_row_major(dims.n, dims.m, psi.to_vec())
}
