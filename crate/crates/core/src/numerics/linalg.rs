use std::ops::{Index, IndexMut};

use super::RngStream;
use crate::{Error, Result};

/// Dense row-major real matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::invalid(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Fills column by column from `values`.
    fn from_columns_iter(rows: usize, cols: usize, mut values: impl Iterator<Item = f64>) -> Self {
        let mut m = Self::zeros(rows, cols);
        for j in 0..cols {
            for i in 0..rows {
                m[(i, j)] = values.next().expect("infinite draw stream");
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::invalid(format!(
                "shape mismatch {}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let src = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d += a * s;
                }
            }
        }
        Ok(out)
    }

    /// Top-left `rows x cols` block.
    pub fn block(&self, rows: usize, cols: usize) -> Matrix {
        let mut b = Matrix::zeros(rows, cols);
        for i in 0..rows {
            b.data[i * cols..(i + 1) * cols].copy_from_slice(&self.row(i)[..cols]);
        }
        b
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn scale(&mut self, s: f64) {
        self.data.iter_mut().for_each(|x| *x *= s);
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Symmetric matrix stored as its packed lower triangle, so `(i, j)` and
/// `(j, i)` read the same stored value.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix {
    order: usize,
    packed: Vec<f64>,
}

impl SymmetricMatrix {
    pub fn zeros(order: usize) -> Self {
        Self {
            order,
            packed: vec![0.0; order * (order + 1) / 2],
        }
    }

    /// Builds from a full square matrix, reading only the lower triangle.
    pub fn from_lower(m: &Matrix) -> Result<Self> {
        if m.rows() != m.cols() {
            return Err(Error::invalid("symmetric matrix must be square"));
        }
        let mut s = Self::zeros(m.rows());
        for i in 0..m.rows() {
            for j in 0..=i {
                s.set(i, j, m[(i, j)]);
            }
        }
        Ok(s)
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let mut s = Self::zeros(values.len());
        for (i, v) in values.iter().enumerate() {
            s.set(i, i, *v);
        }
        s
    }

    fn slot(i: usize, j: usize) -> usize {
        let (hi, lo) = if i >= j { (i, j) } else { (j, i) };
        hi * (hi + 1) / 2 + lo
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.packed[Self::slot(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.packed[Self::slot(i, j)] = v;
    }

    pub fn trace(&self) -> f64 {
        (0..self.order).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.order {
            for j in 0..=i {
                let v = self.get(i, j);
                s += if i == j { v * v } else { 2.0 * v * v };
            }
        }
        s.sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.packed.iter().all(|v| v.is_finite())
    }

    pub fn to_full(&self) -> Matrix {
        let n = self.order;
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = self.get(i, j);
            }
        }
        m
    }
}

/// Eigenvalues of a symmetric matrix in descending order.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    values: Vec<f64>,
}

impl Spectrum {
    /// Relative size of negative eigenvalues that are treated as roundoff
    /// of a positive semidefinite matrix and clamped to zero.
    pub const CLAMP_RELATIVE_TOL: f64 = 1e-10;

    pub fn from_values(mut values: Vec<f64>, frobenius_norm: f64) -> Self {
        let tol = Self::CLAMP_RELATIVE_TOL * frobenius_norm;
        for v in values.iter_mut() {
            if *v < 0.0 && *v >= -tol {
                *v = 0.0;
            }
        }
        values.sort_by(|a, b| b.total_cmp(a));
        Self { values }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }
}

pub const JACOBI_MAX_SWEEPS: usize = 50;
const JACOBI_RELATIVE_RESIDUAL: f64 = 1e-12;

/// Cyclic Jacobi eigenvalues.
///
/// Sweeps over all off-diagonal pairs until the off-diagonal Frobenius norm
/// falls below `1e-12` times the Frobenius norm of the input. Negative values
/// within `1e-10 * ||m||_F` of zero are clamped (see [`Spectrum`]).
pub fn symmetric_eigenvalues(m: &SymmetricMatrix) -> Result<Spectrum> {
    if !m.is_finite() {
        return Err(Error::invalid("matrix has non-finite entries"));
    }
    let n = m.order();
    let fro = m.frobenius_norm();
    let mut a = m.to_full();
    let target = JACOBI_RELATIVE_RESIDUAL * fro;
    let mut sweeps = 0;
    loop {
        let off = off_diagonal_norm(&a);
        if off <= target || off == 0.0 {
            break;
        }
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence {
                sweeps,
                off_norm: off,
            });
        }
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, p, q);
            }
        }
        sweeps += 1;
    }
    Ok(Spectrum::from_values(
        (0..n).map(|i| a[(i, i)]).collect(),
        fro,
    ))
}

fn off_diagonal_norm(a: &Matrix) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            s += a[(i, j)] * a[(i, j)];
        }
    }
    (2.0 * s).sqrt()
}

/// One Jacobi rotation annihilating `a[p][q]` (Rutishauser's formulas).
fn rotate(a: &mut Matrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    if apq == 0.0 {
        return;
    }
    let app = a[(p, p)];
    let aqq = a[(q, q)];
    let theta = (aqq - app) / (2.0 * apq);
    // an overflowing theta gives t = 0: apq is negligible against the diagonal gap
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let n = a.rows();
    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        let new_p = c * akp - s * akq;
        let new_q = s * akp + c * akq;
        a[(k, p)] = new_p;
        a[(p, k)] = new_p;
        a[(k, q)] = new_q;
        a[(q, k)] = new_q;
    }
    a[(p, p)] = app - t * apq;
    a[(q, q)] = aqq + t * apq;
    a[(p, q)] = 0.0;
    a[(q, p)] = 0.0;
}

/// `p x q` matrix of iid standard normals drawn from `rng`, column by column.
pub fn gaussian_block(p: usize, q: usize, rng: &RngStream) -> Matrix {
    Matrix::from_columns_iter(p, q, rng.normals())
}

/// `xᵀx` for a `p x q` matrix `x`.
pub fn gram(x: &Matrix) -> SymmetricMatrix {
    let q = x.cols();
    let mut s = SymmetricMatrix::zeros(q);
    for i in 0..q {
        for j in 0..=i {
            let mut acc = 0.0;
            for r in 0..x.rows() {
                let row = x.row(r);
                acc += row[i] * row[j];
            }
            s.set(i, j, acc);
        }
    }
    s
}

/// Haar distributed element of O(n): the Q factor of an `n x n` Gaussian
/// matrix with column `j` multiplied by `sign(R_jj)`.
pub fn haar_orthogonal(n: usize, rng: &RngStream) -> Matrix {
    haar_columns(n, n, rng)
}

/// First `cols` columns of a Haar orthogonal matrix (same draws as
/// [`haar_orthogonal`] on the same stream), at `O(n cols²)` cost.
pub fn haar_columns(n: usize, cols: usize, rng: &RngStream) -> Matrix {
    let a = Matrix::from_columns_iter(n, cols, rng.normals());
    sign_fixed_q(a)
}

/// Householder QR of `a` (n x m, m <= n); returns the n x m factor Q with
/// the sign of each column matched to the corresponding diagonal of R.
fn sign_fixed_q(a: Matrix) -> Matrix {
    let (n, m) = (a.rows(), a.cols());
    let mut cols: Vec<Vec<f64>> = (0..m).map(|j| a.column(j)).collect();
    let mut reflectors: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut r_signs = vec![1.0; m];
    for k in 0..m {
        let x = &cols[k][k..];
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if k + 1 == n || norm == 0.0 {
            // nothing below the diagonal to eliminate
            r_signs[k] = if cols[k][k] < 0.0 { -1.0 } else { 1.0 };
            reflectors.push(Vec::new());
            continue;
        }
        let alpha = if x[0] >= 0.0 { -norm } else { norm };
        let mut v = x.to_vec();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|t| t * t).sum();
        r_signs[k] = alpha.signum();
        if vnorm2 > 0.0 {
            for col in cols.iter_mut().skip(k) {
                apply_reflector(&v, vnorm2, &mut col[k..]);
            }
        }
        reflectors.push(v);
    }
    let mut q = Matrix::zeros(n, m);
    for j in 0..m {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        for k in (0..m).rev() {
            let v = &reflectors[k];
            if v.is_empty() {
                continue;
            }
            let vnorm2: f64 = v.iter().map(|t| t * t).sum();
            if vnorm2 > 0.0 {
                apply_reflector(v, vnorm2, &mut e[k..]);
            }
        }
        for i in 0..n {
            q[(i, j)] = e[i] * r_signs[j];
        }
    }
    q
}

fn apply_reflector(v: &[f64], vnorm2: f64, x: &mut [f64]) {
    let dot: f64 = v.iter().zip(x.iter()).map(|(a, b)| a * b).sum();
    if dot == 0.0 {
        return;
    }
    let f = 2.0 * dot / vnorm2;
    for (xi, vi) in x.iter_mut().zip(v) {
        *xi -= f * vi;
    }
}
