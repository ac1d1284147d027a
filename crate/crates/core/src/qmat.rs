//! Dense complex matrices sized for two-copy problems (at most 16×16).
//!
//! Everything here is a pure function of its inputs. Storage is row-major and
//! dense; there is no attempt at sparsity or blocking.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Index, IndexMut};

use num_complex::Complex64;
#[allow(unused_imports)] // f64 math under no_std
use num_traits::Float;
use num_traits::Zero;
use thiserror::Error;

/// Complex scalar used throughout the crate.
pub type ComplexScalar = Complex64;

/// Absolute per-entry tolerance for Hermiticity checks.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Off-diagonal Frobenius mass at which a Jacobi sweep is considered converged.
pub const JACOBI_TOL: f64 = 1e-14;

const MAX_SWEEPS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum QmatError {
    #[error("dimension mismatch: {left_rows}x{left_cols} vs {right_rows}x{right_cols}")]
    DimensionMismatch {
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("matrix has a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("matrix dimensions must be at least 1x1")]
    Empty,
    #[error("Jacobi eigen-solver did not converge (off-diagonal mass {residual:e})")]
    NoConvergence { residual: f64 },
}

/// Builds a finite complex scalar.
pub fn cscalar(re: f64, im: f64) -> Option<ComplexScalar> {
    (re.is_finite() && im.is_finite()).then_some(Complex64::new(re, im))
}

#[inline]
pub(crate) fn c(re: f64, im: f64) -> ComplexScalar {
    Complex64::new(re, im)
}

/// Dense row-major complex matrix.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<ComplexScalar>,
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.6}{:+.6}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = ComplexScalar;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &ComplexScalar {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut ComplexScalar {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows >= 1 && cols >= 1, "matrix dimensions must be at least 1x1");
        Self {
            rows,
            cols,
            data: vec![Complex64::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = c(1.0, 0.0);
        }
        m
    }

    /// Builds a matrix from a row-major entry list, rejecting non-finite entries.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<ComplexScalar>) -> Result<Self, QmatError> {
        if rows == 0 || cols == 0 {
            return Err(QmatError::Empty);
        }
        if data.len() != rows * cols {
            return Err(QmatError::DimensionMismatch {
                left_rows: rows,
                left_cols: cols,
                right_rows: data.len(),
                right_cols: 1,
            });
        }
        if let Some(idx) = data.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(QmatError::NonFinite {
                row: idx / cols,
                col: idx % cols,
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from nested rows. All rows must have equal length.
    pub fn from_rows<R: AsRef<[ComplexScalar]>>(rows: &[R]) -> Result<Self, QmatError> {
        let nrows = rows.len();
        let ncols = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut data = Vec::with_capacity(nrows * ncols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != ncols {
                return Err(QmatError::DimensionMismatch {
                    left_rows: nrows,
                    left_cols: ncols,
                    right_rows: 1,
                    right_cols: r.len(),
                });
            }
            data.extend_from_slice(r);
        }
        Self::from_row_major(nrows, ncols, data)
    }

    /// Real-valued convenience constructor, mostly for tests and fixed gates.
    pub fn from_real_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self, QmatError> {
        let cr: Vec<Vec<ComplexScalar>> = rows
            .iter()
            .map(|r| r.as_ref().iter().map(|&x| c(x, 0.0)).collect())
            .collect();
        Self::from_rows(&cr)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> ComplexScalar) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn diag_real(values: &[f64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| if i == j { c(values[i], 0.0) } else { Complex64::zero() })
    }

    /// Outer product |a⟩⟨b|.
    pub fn outer(a: &[ComplexScalar], b: &[ComplexScalar]) -> Self {
        Self::from_fn(a.len(), b.len(), |i, j| a[i] * b[j].conj())
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

    pub fn as_slice(&self) -> &[ComplexScalar] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[ComplexScalar] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<ComplexScalar> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    fn require_square(&self) -> Result<usize, QmatError> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(QmatError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            })
        }
    }

    pub fn matmul(&self, other: &CMatrix) -> Result<CMatrix, QmatError> {
        if self.cols != other.rows {
            return Err(QmatError::DimensionMismatch {
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: other.rows,
                right_cols: other.cols,
            });
        }
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.data[k * other.cols + j];
                }
            }
        }
        Ok(out)
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[ComplexScalar]) -> Result<Vec<ComplexScalar>, QmatError> {
        if v.len() != self.cols {
            return Err(QmatError::DimensionMismatch {
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: v.len(),
                right_cols: 1,
            });
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// Kronecker product; entry (i·b.rows + k, j·b.cols + l) = a(i,j)·b(k,l).
    pub fn kron(&self, other: &CMatrix) -> CMatrix {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut out = CMatrix::zeros(rows, cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                if a.is_zero() {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out[(i * other.rows + k, j * other.cols + l)] = a * other[(k, l)];
                    }
                }
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> CMatrix {
        CMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> CMatrix {
        CMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn trace(&self) -> ComplexScalar {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, s: ComplexScalar) -> CMatrix {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> CMatrix {
        self.scale(c(s, 0.0))
    }

    fn zip_with(&self, other: &CMatrix, f: impl Fn(ComplexScalar, ComplexScalar) -> ComplexScalar) -> Result<CMatrix, QmatError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(QmatError::DimensionMismatch {
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: other.rows,
                right_cols: other.cols,
            });
        }
        Ok(CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn add(&self, other: &CMatrix) -> Result<CMatrix, QmatError> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &CMatrix) -> Result<CMatrix, QmatError> {
        self.zip_with(other, |a, b| a - b)
    }

    /// Largest entrywise modulus, ‖A‖_max.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// ‖A − B‖_max. Panics on shape mismatch.
    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest |A(i,j) − conj(A(j,i))|. Non-square matrices report infinity.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut dev = 0.0f64;
        for i in 0..n {
            for j in i..n {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol
    }

    /// (A + A†)/2.
    pub fn symmetrized(&self) -> CMatrix {
        CMatrix::from_fn(self.rows, self.cols, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5)
    }

    fn require_hermitian(&self) -> Result<CMatrix, QmatError> {
        self.require_square()?;
        let deviation = self.hermitian_deviation();
        if deviation > HERMITIAN_TOL {
            return Err(QmatError::NotHermitian { deviation });
        }
        Ok(self.symmetrized())
    }

    /// Determinant by LU factorisation with partial pivoting.
    pub fn determinant(&self) -> Result<ComplexScalar, QmatError> {
        let n = self.require_square()?;
        let mut lu = self.data.clone();
        let mut det = c(1.0, 0.0);
        for col in 0..n {
            let pivot = (col..n)
                .max_by(|&a, &b| lu[a * n + col].norm().total_cmp(&lu[b * n + col].norm()))
                .unwrap_or(col);
            if lu[pivot * n + col].is_zero() {
                return Ok(Complex64::zero());
            }
            if pivot != col {
                for j in 0..n {
                    lu.swap(col * n + j, pivot * n + j);
                }
                det = -det;
            }
            let d = lu[col * n + col];
            det *= d;
            for i in col + 1..n {
                let f = lu[i * n + col] / d;
                if f.is_zero() {
                    continue;
                }
                for j in col + 1..n {
                    let t = lu[col * n + j];
                    lu[i * n + j] -= f * t;
                }
            }
        }
        Ok(det)
    }

    /// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi rotations.
    pub fn hermitian_eigen(&self) -> Result<HermitianEigen, QmatError> {
        let a = self.require_hermitian()?;
        jacobi_eigen(a)
    }

    /// Sum of singular values.
    pub fn trace_norm(&self) -> Result<f64, QmatError> {
        self.require_square()?;
        if self.is_hermitian(HERMITIAN_TOL) {
            let eig = self.hermitian_eigen()?;
            return Ok(eig.values.iter().map(|l| l.abs()).sum());
        }
        // singular values are square roots of the spectrum of A†A
        let gram = self.adjoint().matmul(self)?;
        let eig = jacobi_eigen(gram.symmetrized())?;
        Ok(eig.values.iter().map(|l| l.max(0.0).sqrt()).sum())
    }

    /// exp(scale · A) for Hermitian A, via its eigendecomposition.
    pub fn expm_hermitian(&self, scale: ComplexScalar) -> Result<CMatrix, QmatError> {
        let eig = self.hermitian_eigen()?;
        Ok(eig.map_spectrum(|l| (scale * l).exp()))
    }
}

/// Result of a Hermitian eigendecomposition: ascending real eigenvalues and
/// the unitary whose columns are the matching eigenvectors.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermitianEigen {
    /// V · diag(f(λ)) · V†.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> ComplexScalar) -> CMatrix {
        let n = self.values.len();
        let fl: Vec<ComplexScalar> = self.values.iter().map(|&l| f(l)).collect();
        let v = &self.vectors;
        CMatrix::from_fn(n, n, |i, j| {
            (0..n).map(|k| v[(i, k)] * fl[k] * v[(j, k)].conj()).sum()
        })
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.map_spectrum(|l| c(l, 0.0))
    }

    pub fn min_value(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn vector(&self, k: usize) -> Vec<ComplexScalar> {
        self.vectors.column(k)
    }
}

fn off_diagonal_mass(a: &CMatrix) -> f64 {
    let n = a.rows;
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

fn jacobi_eigen(mut a: CMatrix) -> Result<HermitianEigen, QmatError> {
    let n = a.rows;
    let mut v = CMatrix::identity(n);
    let threshold = JACOBI_TOL * a.frobenius_norm().max(1.0);

    let mut converged = off_diagonal_mass(&a) <= threshold;
    let mut sweeps = 0;
    while !converged && sweeps < MAX_SWEEPS {
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let r = apq.norm();
                if r == 0.0 {
                    continue;
                }
                let phase = apq / r;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let tau = (aqq - app) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = t * cs;
                // W = D·G with D = diag(1, e^{-iφ}) on (p, q) and G the real rotation
                let w_pp = c(cs, 0.0);
                let w_pq = c(sn, 0.0);
                let w_qp = -phase.conj() * sn;
                let w_qq = phase.conj() * cs;

                for i in 0..n {
                    let aip = a[(i, p)];
                    let aiq = a[(i, q)];
                    a[(i, p)] = aip * w_pp + aiq * w_qp;
                    a[(i, q)] = aip * w_pq + aiq * w_qq;
                    let vip = v[(i, p)];
                    let viq = v[(i, q)];
                    v[(i, p)] = vip * w_pp + viq * w_qp;
                    v[(i, q)] = vip * w_pq + viq * w_qq;
                }
                for j in 0..n {
                    let apj = a[(p, j)];
                    let aqj = a[(q, j)];
                    a[(p, j)] = w_pp.conj() * apj + w_qp.conj() * aqj;
                    a[(q, j)] = w_pq.conj() * apj + w_qq.conj() * aqj;
                }
                a[(p, q)] = Complex64::zero();
                a[(q, p)] = Complex64::zero();
                a[(p, p)] = c(a[(p, p)].re, 0.0);
                a[(q, q)] = c(a[(q, q)].re, 0.0);
            }
        }
        sweeps += 1;
        converged = off_diagonal_mass(&a) <= threshold;
    }
    if !converged {
        return Err(QmatError::NoConvergence {
            residual: off_diagonal_mass(&a),
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    Ok(HermitianEigen { values, vectors })
}

/// Pauli matrices and a few fixed single-qubit operators.
pub mod pauli {
    use super::{c, CMatrix};

    pub fn identity() -> CMatrix {
        CMatrix::identity(2)
    }

    pub fn x() -> CMatrix {
        CMatrix::from_fn(2, 2, |i, j| if i != j { c(1.0, 0.0) } else { c(0.0, 0.0) })
    }

    pub fn y() -> CMatrix {
        CMatrix::from_fn(2, 2, |i, j| match (i, j) {
            (0, 1) => c(0.0, -1.0),
            (1, 0) => c(0.0, 1.0),
            _ => c(0.0, 0.0),
        })
    }

    pub fn z() -> CMatrix {
        CMatrix::diag_real(&[1.0, -1.0])
    }

    /// Hadamard, |0⟩⟨+| + |1⟩⟨−|.
    pub fn hadamard() -> CMatrix {
        let h = core::f64::consts::FRAC_1_SQRT_2;
        CMatrix::from_fn(2, 2, |i, j| if i == 1 && j == 1 { c(-h, 0.0) } else { c(h, 0.0) })
    }
}
