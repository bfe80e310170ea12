//! Dense linear algebra for small symmetric problems.
//!
//! Everything here is sized for desk-scale instances: matrices are stored
//! row-major in a `Vec<f64>` and the symmetric eigensolver is cyclic Jacobi,
//! which is slow for large `n` but accurate to a few ulps of `‖M‖` and fully
//! deterministic.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{invalid, Result};

/// Clustering tolerance (relative) used to identify the eigenspace of the
/// smallest eigenvalue.
pub const CLUSTER_TOL: f64 = 1e-9;

const JACOBI_MAX_SWEEPS: usize = 100;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm_sq(a: &[f64]) -> f64 {
    dot(a, a)
}

pub fn norm(a: &[f64]) -> f64 {
    libm::sqrt(norm_sq(a))
}

/// `a - b`
pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn scaled(alpha: f64, x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| alpha * v).collect()
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// A general dense `rows × cols` matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(invalid("matrix dimensions must be positive"));
        }
        if data.len() != rows * cols {
            return Err(invalid("matrix data length does not match its shape"));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(invalid("matrix has non-finite entries"));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_diag(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, v) in d.iter().enumerate() {
            m.data[i * d.len() + i] = *v;
        }
        m
    }

    /// Builds a matrix from a slice of equally long rows.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map(|row| row.as_ref().len()).unwrap_or(0);
        if rows.iter().any(|row| row.as_ref().len() != c) {
            return Err(invalid("ragged matrix rows"));
        }
        let data = rows.iter().flat_map(|row| row.as_ref().iter().copied()).collect();
        Self::new(r, c, data)
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[Vec<f64>]) -> Result<Self> {
        let c = cols.len();
        let r = cols.first().map(Vec::len).unwrap_or(0);
        if cols.iter().any(|col| col.len() != r) {
            return Err(invalid("ragged matrix columns"));
        }
        let mut m = Self::zeros(r, c);
        for (j, col) in cols.iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                m.data[i * c + j] = *v;
            }
        }
        Self::new(r, c, m.data)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.set(j, i, self.get(i, j));
            }
        }
        t
    }

    /// `M x`
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `Mᵀ y`
    pub fn tr_mul_vec(&self, y: &[f64]) -> Vec<f64> {
        debug_assert_eq!(y.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (i, yi) in y.iter().enumerate() {
            axpy(*yi, self.row(i), &mut out);
        }
        out
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        debug_assert_eq!(self.cols, other.rows);
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    /// `MᵀM`
    pub fn gram(&self) -> SymMatrix {
        let n = self.cols;
        let mut g = Matrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v: f64 = (0..self.rows).map(|k| self.get(k, i) * self.get(k, j)).sum();
                g.set(i, j, v);
                g.set(j, i, v);
            }
        }
        SymMatrix(g)
    }

    pub fn scale(&self, c: f64) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: scaled(c, &self.data) }
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.data)
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm(&self.data)
    }
}

/// A symmetric matrix. Construction symmetrizes as `(M + Mᵀ)/2`, so the
/// stored entries satisfy `m[i][j] == m[j][i]` exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix(Matrix);

impl SymMatrix {
    pub fn from_matrix(m: &Matrix) -> Result<Self> {
        if m.rows != m.cols {
            return Err(invalid("symmetric matrix must be square"));
        }
        if m.data.iter().any(|v| !v.is_finite()) {
            return Err(invalid("matrix has non-finite entries"));
        }
        let n = m.rows;
        let mut s = m.clone();
        for i in 0..n {
            for j in i + 1..n {
                let v = 0.5 * (m.get(i, j) + m.get(j, i));
                s.set(i, j, v);
                s.set(j, i, v);
            }
        }
        Ok(Self(s))
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        Self::from_matrix(&Matrix::from_rows(rows)?)
    }

    pub fn identity(n: usize) -> Self {
        Self(Matrix::identity(n))
    }

    pub fn from_diag(d: &[f64]) -> Self {
        Self(Matrix::from_diag(d))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.0.rows
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0.get(i, j)
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        self.0.mul_vec(x)
    }

    /// `xᵀ M x`
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        dot(x, &self.mul_vec(x))
    }

    /// `M + s I`
    pub fn shifted(&self, s: f64) -> SymMatrix {
        let mut m = self.0.clone();
        for i in 0..m.rows {
            let v = m.get(i, i) + s;
            m.set(i, i, v);
        }
        SymMatrix(m)
    }

    pub fn scale(&self, c: f64) -> SymMatrix {
        SymMatrix(self.0.scale(c))
    }

    pub fn max_abs(&self) -> f64 {
        self.0.max_abs()
    }

    /// Congruence `U M Uᵀ` for a square `U`.
    pub fn congruence(&self, u: &Matrix) -> SymMatrix {
        let m = u.matmul(&self.0).matmul(&u.transpose());
        SymMatrix::from_matrix(&m).expect("congruence of a finite symmetric matrix")
    }

    /// Assembles the bordered matrix `[[M, v], [vᵀ, corner]]`.
    pub fn bordered(&self, v: &[f64], corner: f64) -> Result<SymMatrix> {
        let n = self.dim();
        if v.len() != n {
            return Err(invalid("border vector has the wrong length"));
        }
        let mut out = Matrix::zeros(n + 1, n + 1);
        for (i, vi) in v.iter().enumerate() {
            for j in 0..n {
                out.set(i, j, self.get(i, j));
            }
            out.set(i, n, *vi);
            out.set(n, i, *vi);
        }
        out.set(n, n, corner);
        SymMatrix::from_matrix(&out)
    }
}

/// Eigendecomposition of a symmetric matrix with eigenvalues ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct SymEig {
    pub eigenvalues: Vec<f64>,
    /// Column `i` pairs with `eigenvalues[i]`.
    pub eigenvectors: Matrix,
}

impl SymEig {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max_eigenvalue(&self) -> f64 {
        *self.eigenvalues.last().expect("non-empty spectrum")
    }

    pub fn vector(&self, i: usize) -> Vec<f64> {
        self.eigenvectors.column(i)
    }

    /// Coordinates `Qᵀ v` of `v` in the eigenbasis.
    pub fn coords(&self, v: &[f64]) -> Vec<f64> {
        self.eigenvectors.tr_mul_vec(v)
    }

    /// Maps eigen-coordinates back: `Q y`.
    pub fn from_coords(&self, y: &[f64]) -> Vec<f64> {
        self.eigenvectors.mul_vec(y)
    }

    /// `max(1, max_i |λ_i|)`
    pub fn scale(&self) -> f64 {
        self.eigenvalues.iter().fold(1.0_f64, |m, v| m.max(v.abs()))
    }

    /// Number of leading eigenvalues belonging to the smallest-eigenvalue
    /// cluster `{λ_i ≤ λ_min + CLUSTER_TOL·scale}`.
    pub fn min_cluster_len(&self) -> usize {
        let cut = self.min_eigenvalue() + CLUSTER_TOL * self.scale();
        self.eigenvalues.iter().take_while(|l| **l <= cut).count()
    }

    /// Norm of the projection of `v` onto the smallest-eigenvalue cluster.
    pub fn min_eigenspace_projection_norm(&self, v: &[f64]) -> f64 {
        let k = self.min_cluster_len();
        let y = self.coords(v);
        libm::sqrt(y[..k].iter().map(|c| c * c).sum())
    }

    pub fn apply_shifted_pinv(&self, shift: f64, v: &[f64], tol: f64) -> Vec<f64> {
        apply_shifted_pinv(self, shift, v, tol)
    }
}

/// Verdict of a positive-semidefiniteness test.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PsdVerdict {
    pub is_psd: bool,
    pub min_eigenvalue: f64,
    pub tolerance_used: f64,
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Eigenvectors are normalized so that their first component with magnitude
/// above `1e-10` is positive.
pub fn eigh(m: &SymMatrix) -> Result<SymEig> {
    let n = m.dim();
    if m.0.data.iter().any(|v| !v.is_finite()) {
        return Err(invalid("matrix has non-finite entries"));
    }
    let mut a = m.0.data.clone();
    let mut v = Matrix::identity(n).data;
    let frob = norm(&a);

    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[p * n + q] * a[p * n + q];
            }
        }
        if off == 0.0 || libm::sqrt(off) <= 1e-17 * frob {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + libm::sqrt(theta * theta + 1.0))
                } else {
                    -1.0 / (-theta + libm::sqrt(theta * theta + 1.0))
                };
                let c = 1.0 / libm::sqrt(t * t + 1.0);
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]).then(i.cmp(&j)));

    let eigenvalues: Vec<f64> = order.iter().map(|&i| a[i * n + i]).collect();
    let mut vecs = Matrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        let mut q: Vec<f64> = (0..n).map(|k| v[k * n + src]).collect();
        let nq = norm(&q);
        for x in q.iter_mut() {
            *x /= nq;
        }
        if let Some(first) = q.iter().find(|x| x.abs() > 1e-10) {
            if *first < 0.0 {
                for x in q.iter_mut() {
                    *x = -*x;
                }
            }
        }
        for (k, x) in q.iter().enumerate() {
            vecs.set(k, col, *x);
        }
    }
    Ok(SymEig { eigenvalues, eigenvectors: vecs })
}

/// `(M + shift·I)⁺ v` from an eigendecomposition of `M`.
///
/// Components with `|λ_i + shift| ≤ tol·max(1, max_i |λ_i + shift|)` are
/// treated as the numerical null space and dropped.
pub fn apply_shifted_pinv(eig: &SymEig, shift: f64, v: &[f64], tol: f64) -> Vec<f64> {
    let scale = eig
        .eigenvalues
        .iter()
        .fold(1.0_f64, |m, l| m.max((l + shift).abs()));
    let y = eig.coords(v);
    let z: Vec<f64> = eig
        .eigenvalues
        .iter()
        .zip(&y)
        .map(|(l, c)| {
            let d = l + shift;
            if d.abs() > tol * scale {
                c / d
            } else {
                0.0
            }
        })
        .collect();
    eig.from_coords(&z)
}

/// Whether `v` lies in `Range(M − λ_min I)`, i.e. its projection onto the
/// smallest-eigenvalue cluster has norm at most `tol·(1 + ‖v‖)`.
pub fn range_membership(eig: &SymEig, v: &[f64], tol: f64) -> bool {
    eig.min_eigenspace_projection_norm(v) <= tol * (1.0 + norm(v))
}

/// Spectral norm `√λ_max(MᵀM)` of a general matrix.
pub fn spectral_norm(m: &Matrix) -> f64 {
    let g = if m.rows < m.cols { m.transpose().gram() } else { m.gram() };
    let eig = eigh(&g).expect("gram matrix of a finite matrix");
    libm::sqrt(eig.max_eigenvalue().max(0.0))
}

/// PSD test with tolerance `tol·max(1, ‖M‖_max)`.
pub fn psd_check(m: &SymMatrix, tol: f64) -> PsdVerdict {
    let eig = eigh(m).expect("symmetric matrices are validated at construction");
    let tolerance_used = tol * m.max_abs().max(1.0);
    let min_eigenvalue = eig.min_eigenvalue();
    PsdVerdict { is_psd: min_eigenvalue >= -tolerance_used, min_eigenvalue, tolerance_used }
}
