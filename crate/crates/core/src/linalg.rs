//! Dense linear algebra for small `d`.
//!
//! Matrices are row-major `f64` buffers. Everything the samplers need is
//! here: Cholesky with a relative pivot floor, Householder QR (plain and
//! column-pivoted), the Moore-Penrose pseudoinverse with a Jacobi SVD
//! fallback, cofactor adjugates, symmetric eigenvalues and the
//! Sherman-Morrison downdate.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Deref, DerefMut, Index, IndexMut};

use crate::error::{Error, Result};
use crate::math;

/// Pivots at or below this fraction of the largest diagonal entry fail.
pub const CHOLESKY_PIVOT_FLOOR: f64 = 1e-12;
/// `1 - xᵀA⁻¹x` at or below this fails a downdate.
pub const DOWNDATE_FLOOR: f64 = 1e-10;
/// Relative `R`-diagonal threshold below which QR declares rank deficiency.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// A dense column vector.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn zeros(len: usize) -> Self {
        Vector(vec![0.0; len])
    }

    pub fn filled(len: usize, value: f64) -> Self {
        Vector(vec![value; len])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn dot(&self, other: &[f64]) -> f64 {
        dot(&self.0, other)
    }

    pub fn norm_sq(&self) -> f64 {
        dot(&self.0, &self.0)
    }

    pub fn scaled(&self, c: f64) -> Vector {
        Vector(self.0.iter().map(|v| v * c).collect())
    }

    pub fn sub(&self, other: &[f64]) -> Vector {
        assert_eq!(self.len(), other.len(), "vector length mismatch");
        Vector(self.0.iter().zip(other).map(|(a, b)| a - b).collect())
    }

    pub fn add(&self, other: &[f64]) -> Vector {
        assert_eq!(self.len(), other.len(), "vector length mismatch");
        Vector(self.0.iter().zip(other).map(|(a, b)| a + b).collect())
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(math::abs(*v)))
    }
}

impl From<Vec<f64>> for Vector {
    fn from(v: Vec<f64>) -> Self {
        Vector(v)
    }
}

impl From<&[f64]> for Vector {
    fn from(v: &[f64]) -> Self {
        Vector(v.to_vec())
    }
}

impl AsRef<[f64]> for Vector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

impl Deref for Vector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for Vector {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl FromIterator<f64> for Vector {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        Vector(iter.into_iter().collect())
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Dense row-major matrix.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            writeln!(f, "  {:?}", self.row(r))?;
        }
        write!(f, "]")
    }
}

impl Matrix {
    /// Builds a matrix from a row-major buffer, rejecting wrong lengths and
    /// non-finite entries.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                expected: rows * cols,
                found: data.len(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Matrix { rows, cols, data }
    }

    /// Stacks equal-length rows. Panics on ragged input.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend_from_slice(r);
        }
        Matrix {
            rows: rows.len(),
            cols,
            data,
        }
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Matrix::zeros(values.len(), values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
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

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn col(&self, c: usize) -> Vector {
        (0..self.rows).map(|r| self[(r, c)]).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn matmul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let orow = other.row(k);
                let dst = out.row_mut(i);
                for (d, b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vector {
        assert_eq!(self.cols, v.len(), "matvec shape mismatch");
        (0..self.rows).map(|r| dot(self.row(r), v)).collect()
    }

    /// `selfᵀ v`.
    pub fn t_mul_vec(&self, v: &[f64]) -> Vector {
        assert_eq!(self.rows, v.len(), "matvec shape mismatch");
        let mut out = vec![0.0; self.cols];
        for r in 0..self.rows {
            let w = v[r];
            for (o, x) in out.iter_mut().zip(self.row(r)) {
                *o += w * x;
            }
        }
        Vector(out)
    }

    /// `selfᵀ self`.
    pub fn gram(&self) -> Matrix {
        let d = self.cols;
        let mut g = Matrix::zeros(d, d);
        for r in 0..self.rows {
            let row = self.row(r);
            for i in 0..d {
                let xi = row[i];
                if xi == 0.0 {
                    continue;
                }
                for j in i..d {
                    g.data[i * d + j] += xi * row[j];
                }
            }
        }
        for i in 0..d {
            for j in 0..i {
                g.data[i * d + j] = g.data[j * d + i];
            }
        }
        g
    }

    pub fn scaled(&self, c: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * c).collect(),
        }
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        self.zip_with(other, |a, b| a - b)
    }

    fn zip_with(&self, other: &Matrix, f: impl Fn(f64, f64) -> f64) -> Matrix {
        assert_eq!(
            (self.rows, self.cols),
            (other.rows, other.cols),
            "shape mismatch"
        );
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        }
    }

    pub fn add_assign(&mut self, other: &Matrix) {
        assert_eq!(
            (self.rows, self.cols),
            (other.rows, other.cols),
            "shape mismatch"
        );
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    /// `self += c · u vᵀ`.
    pub fn rank_one_update(&mut self, c: f64, u: &[f64], v: &[f64]) {
        assert_eq!(u.len(), self.rows);
        assert_eq!(v.len(), self.cols);
        for (i, ui) in u.iter().enumerate() {
            let s = c * ui;
            for (a, vj) in self.row_mut(i).iter_mut().zip(v) {
                *a += s * vj;
            }
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        math::sqrt(self.data.iter().map(|v| v * v).sum())
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(math::abs(*v)))
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn select_rows(&self, idx: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(idx.len() * self.cols);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Matrix {
            rows: idx.len(),
            cols: self.cols,
            data,
        }
    }

    /// Copy with row `r` and column `c` removed.
    pub fn minor(&self, r: usize, c: usize) -> Matrix {
        let mut data = Vec::with_capacity((self.rows - 1) * (self.cols - 1));
        for i in (0..self.rows).filter(|&i| i != r) {
            for j in (0..self.cols).filter(|&j| j != c) {
                data.push(self[(i, j)]);
            }
        }
        Matrix {
            rows: self.rows - 1,
            cols: self.cols - 1,
            data,
        }
    }

    /// Scales row `i` by `s[i]`.
    pub fn scale_rows(&self, s: &[f64]) -> Matrix {
        assert_eq!(s.len(), self.rows);
        let mut out = self.clone();
        for (i, si) in s.iter().enumerate() {
            for v in out.row_mut(i) {
                *v *= si;
            }
        }
        out
    }

    pub fn append_rows(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.cols, "column mismatch");
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Matrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn max_asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in 0..i {
                worst = worst.max(math::abs(self[(i, j)] - self[(j, i)]));
            }
        }
        worst
    }

    fn symmetric_within(&self, rel: f64) -> bool {
        self.is_square() && self.max_asymmetry() <= rel * self.max_abs().max(f64::MIN_POSITIVE)
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &f64 {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut f64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

/// Lower-triangular factor `L` with `L Lᵀ = A`.
#[derive(Clone, Debug, PartialEq)]
pub struct CholeskyFactor {
    lower: Matrix,
    logdet: f64,
}

impl CholeskyFactor {
    pub fn lower(&self) -> &Matrix {
        &self.lower
    }

    /// `log det A`.
    pub fn logdet(&self) -> f64 {
        self.logdet
    }

    pub fn dim(&self) -> usize {
        self.lower.rows
    }

    /// Solves `L z = b`.
    pub fn solve_lower(&self, b: &[f64]) -> Vector {
        let n = self.dim();
        assert_eq!(b.len(), n);
        let mut z = vec![0.0; n];
        for i in 0..n {
            let row = self.lower.row(i);
            let s = b[i] - dot(&row[..i], &z[..i]);
            z[i] = s / row[i];
        }
        Vector(z)
    }

    /// Solves `Lᵀ z = b`.
    pub fn solve_upper(&self, b: &[f64]) -> Vector {
        let n = self.dim();
        assert_eq!(b.len(), n);
        let mut z = vec![0.0; n];
        for i in (0..n).rev() {
            let mut s = b[i];
            for j in i + 1..n {
                s -= self.lower[(j, i)] * z[j];
            }
            z[i] = s / self.lower[(i, i)];
        }
        Vector(z)
    }

    /// Solves `A z = b`.
    pub fn solve(&self, b: &[f64]) -> Vector {
        let y = self.solve_lower(b);
        self.solve_upper(&y)
    }

    /// `xᵀ A⁻¹ x`.
    pub fn inv_quad_form(&self, x: &[f64]) -> f64 {
        self.solve_lower(x).norm_sq()
    }

    pub fn inverse(&self) -> Matrix {
        let n = self.dim();
        let mut inv = Matrix::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[j] = 1.0;
            let col = self.solve(&e);
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        // Symmetrize round-off.
        for i in 0..n {
            for j in 0..i {
                let m = 0.5 * (inv[(i, j)] + inv[(j, i)]);
                inv[(i, j)] = m;
                inv[(j, i)] = m;
            }
        }
        inv
    }

    /// `L⁻¹ M` column by column.
    pub fn solve_lower_mat(&self, m: &Matrix) -> Matrix {
        assert_eq!(m.rows, self.dim());
        let mut out = Matrix::zeros(m.rows, m.cols);
        for c in 0..m.cols {
            let z = self.solve_lower(&m.col(c));
            for r in 0..m.rows {
                out[(r, c)] = z[r];
            }
        }
        out
    }
}

/// Cholesky factorization of a symmetric positive definite matrix.
///
/// No jitter is added: a pivot at or below `1e-12 · max diag` is an error.
pub fn cholesky(a: &Matrix) -> Result<CholeskyFactor> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            expected: a.rows,
            found: a.cols,
        });
    }
    if !a.symmetric_within(1e-12) {
        return Err(Error::NotSymmetric);
    }
    let n = a.rows;
    let max_diag = (0..n).map(|i| a[(i, i)]).fold(0.0_f64, f64::max);
    let floor = CHOLESKY_PIVOT_FLOOR * max_diag;
    let mut l = Matrix::zeros(n, n);
    let mut logdet = 0.0;
    for j in 0..n {
        let mut pivot = a[(j, j)];
        for k in 0..j {
            pivot -= l[(j, k)] * l[(j, k)];
        }
        if !(pivot > floor) || max_diag <= 0.0 {
            return Err(Error::NotPositiveDefinite { index: j, pivot });
        }
        let ljj = math::sqrt(pivot);
        l[(j, j)] = ljj;
        logdet += 2.0 * math::ln(ljj);
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / ljj;
        }
    }
    Ok(CholeskyFactor { lower: l, logdet })
}

/// Inverse of an SPD matrix.
pub fn spd_inverse(a: &Matrix) -> Result<Matrix> {
    Ok(cholesky(a)?.inverse())
}

struct Lu {
    lu: Matrix,
    perm: Vec<usize>,
    sign: f64,
    singular: bool,
}

fn lu(a: &Matrix) -> Lu {
    assert!(a.is_square(), "LU needs a square matrix");
    let n = a.rows;
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut sign = 1.0;
    let mut singular = false;
    for k in 0..n {
        let (p, pmax) = (k..n)
            .map(|i| (i, math::abs(lu[(i, k)])))
            .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if pmax == 0.0 {
            singular = true;
            continue;
        }
        if p != k {
            for c in 0..n {
                lu.data.swap(k * n + c, p * n + c);
            }
            perm.swap(k, p);
            sign = -sign;
        }
        let piv = lu[(k, k)];
        for i in k + 1..n {
            let f = lu[(i, k)] / piv;
            lu[(i, k)] = f;
            if f != 0.0 {
                for c in k + 1..n {
                    let v = lu[(k, c)];
                    lu[(i, c)] -= f * v;
                }
            }
        }
    }
    Lu {
        lu,
        perm,
        sign,
        singular,
    }
}

/// Determinant via partially pivoted LU.
pub fn det(a: &Matrix) -> f64 {
    if a.rows == 0 {
        return 1.0;
    }
    let f = lu(a);
    if f.singular {
        return 0.0;
    }
    (0..a.rows).fold(f.sign, |acc, i| acc * f.lu[(i, i)])
}

/// `(sign, log|det A|)`; sign is 0 for singular input.
pub fn slogdet(a: &Matrix) -> (f64, f64) {
    if a.rows == 0 {
        return (1.0, 0.0);
    }
    let f = lu(a);
    if f.singular {
        return (0.0, f64::NEG_INFINITY);
    }
    let mut sign = f.sign;
    let mut logabs = 0.0;
    for i in 0..a.rows {
        let v = f.lu[(i, i)];
        if v < 0.0 {
            sign = -sign;
        }
        logabs += math::ln(math::abs(v));
    }
    (sign, logabs)
}

/// General inverse via LU; errors on exact singularity.
pub fn inverse(a: &Matrix) -> Result<Matrix> {
    let n = a.rows;
    let f = lu(a);
    if f.singular {
        return Err(Error::RankDeficient);
    }
    let mut inv = Matrix::zeros(n, n);
    for j in 0..n {
        // Solve A x = e_j using P A = L U.
        let mut b: Vec<f64> = f
            .perm
            .iter()
            .map(|&p| if p == j { 1.0 } else { 0.0 })
            .collect();
        for i in 0..n {
            for k in 0..i {
                b[i] -= f.lu[(i, k)] * b[k];
            }
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                b[i] -= f.lu[(i, k)] * b[k];
            }
            b[i] /= f.lu[(i, i)];
        }
        for i in 0..n {
            inv[(i, j)] = b[i];
        }
    }
    if !inv.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok(inv)
}

/// Adjugate by cofactor expansion: `adj(A)_{ij} = (-1)^{i+j} det(A_{-j,-i})`.
pub fn adjugate(a: &Matrix) -> Matrix {
    assert!(a.is_square(), "adjugate needs a square matrix");
    let n = a.rows;
    if n == 1 {
        return Matrix::identity(1);
    }
    Matrix::from_fn(n, n, |i, j| {
        let s = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
        s * det(&a.minor(j, i))
    })
}

/// Householder QR of an `m x n` matrix, optionally with column pivoting.
struct Qr {
    /// Packed: R in the upper triangle, reflector tails below.
    qr: Matrix,
    /// Reflector scalars `beta_j` with `H_j = I - beta_j v_j v_jᵀ`, `v_j[j] = 1`.
    betas: Vec<f64>,
    rdiag: Vec<f64>,
    perm: Vec<usize>,
}

fn householder_qr(a: &Matrix, pivoting: bool) -> Qr {
    let (m, n) = (a.rows, a.cols);
    let mut qr = a.clone();
    let steps = m.min(n);
    let mut betas = vec![0.0; steps];
    let mut rdiag = vec![0.0; steps];
    let mut perm: Vec<usize> = (0..n).collect();
    for j in 0..steps {
        if pivoting {
            let mut best = j;
            let mut best_norm = -1.0;
            for c in j..n {
                let s: f64 = (j..m).map(|r| qr[(r, c)] * qr[(r, c)]).sum();
                if s > best_norm {
                    best_norm = s;
                    best = c;
                }
            }
            if best != j {
                for r in 0..m {
                    qr.data.swap(r * n + j, r * n + best);
                }
                perm.swap(j, best);
            }
        }
        let norm = math::sqrt((j..m).map(|r| qr[(r, j)] * qr[(r, j)]).sum());
        if norm == 0.0 {
            betas[j] = 0.0;
            rdiag[j] = 0.0;
            continue;
        }
        let x0 = qr[(j, j)];
        let alpha = if x0 >= 0.0 { -norm } else { norm };
        let v0 = x0 - alpha;
        // Normalize so that v[j] = 1.
        for r in j + 1..m {
            qr[(r, j)] /= v0;
        }
        let beta = -v0 / alpha;
        betas[j] = beta;
        rdiag[j] = alpha;
        qr[(j, j)] = alpha;
        for c in j + 1..n {
            let mut s = qr[(j, c)];
            for r in j + 1..m {
                s += qr[(r, j)] * qr[(r, c)];
            }
            s *= beta;
            qr[(j, c)] -= s;
            for r in j + 1..m {
                let vr = qr[(r, j)];
                qr[(r, c)] -= s * vr;
            }
        }
    }
    Qr {
        qr,
        betas,
        rdiag,
        perm,
    }
}

impl Qr {
    /// Thin `Q` (`m x min(m, n)`).
    fn thin_q(&self) -> Matrix {
        let (m, n) = (self.qr.rows, self.qr.cols);
        let steps = m.min(n);
        let mut q = Matrix::zeros(m, steps);
        for i in 0..steps {
            q[(i, i)] = 1.0;
        }
        for j in (0..steps).rev() {
            let beta = self.betas[j];
            if beta == 0.0 {
                continue;
            }
            for c in 0..steps {
                let mut s = q[(j, c)];
                for r in j + 1..m {
                    s += self.qr[(r, j)] * q[(r, c)];
                }
                s *= beta;
                q[(j, c)] -= s;
                for r in j + 1..m {
                    let vr = self.qr[(r, j)];
                    q[(r, c)] -= s * vr;
                }
            }
        }
        q
    }

    fn numerical_rank(&self) -> usize {
        let top = self.rdiag.first().map_or(0.0, |v| math::abs(*v));
        if top == 0.0 {
            return 0;
        }
        self.rdiag
            .iter()
            .take_while(|v| math::abs(**v) > RANK_TOLERANCE * top)
            .count()
    }
}

/// `log det(XᵀX)` from the `R` diagonal of a Householder QR; `-inf` when
/// `X` has fewer rows than columns or an exactly zero pivot.
pub fn logdet_gram(x: &Matrix) -> f64 {
    if x.rows < x.cols {
        return f64::NEG_INFINITY;
    }
    if x.cols == 0 {
        return 0.0;
    }
    let f = householder_qr(x, false);
    f.rdiag.iter().map(|r| 2.0 * math::ln(math::abs(*r))).sum()
}

/// `det(XᵀX)`, computed as the product of squared `R` diagonal entries.
pub fn det_gram(x: &Matrix) -> f64 {
    if x.rows < x.cols {
        return 0.0;
    }
    if x.cols == 0 {
        return 1.0;
    }
    let f = householder_qr(x, false);
    f.rdiag.iter().map(|r| r * r).product()
}

/// Numerical column rank via pivoted QR.
pub fn rank(x: &Matrix) -> usize {
    if x.rows == 0 || x.cols == 0 {
        return 0;
    }
    householder_qr(x, true).numerical_rank()
}

/// Moore-Penrose pseudoinverse (`cols x rows`).
///
/// Full column rank goes through pivoted QR (`X P = Q R`, `X† = P R⁻¹ Qᵀ`);
/// anything else falls back to a one-sided Jacobi SVD.
pub fn pseudoinverse(x: &Matrix) -> Matrix {
    let (m, n) = (x.rows, x.cols);
    if m == 0 || n == 0 {
        return Matrix::zeros(n, m);
    }
    if m >= n {
        let f = householder_qr(x, true);
        if f.numerical_rank() == n {
            let q = f.thin_q();
            // R⁻¹ Qᵀ by back substitution, then undo the permutation.
            let mut rinv_qt = Matrix::zeros(n, m);
            for c in 0..m {
                let mut z = vec![0.0; n];
                for i in (0..n).rev() {
                    let mut s = q[(c, i)];
                    for j in i + 1..n {
                        s -= f.qr[(i, j)] * z[j];
                    }
                    z[i] = s / f.qr[(i, i)];
                }
                for i in 0..n {
                    rinv_qt[(i, c)] = z[i];
                }
            }
            let mut out = Matrix::zeros(n, m);
            for (i, &p) in f.perm.iter().enumerate() {
                out.row_mut(p).copy_from_slice(rinv_qt.row(i));
            }
            return out;
        }
    }
    svd_pseudoinverse(x)
}

/// Thin SVD `X = U diag(s) Vᵀ` by one-sided Jacobi, for `rows >= cols`.
pub struct Svd {
    pub u: Matrix,
    pub s: Vec<f64>,
    pub v: Matrix,
}

pub fn jacobi_svd(x: &Matrix) -> Svd {
    assert!(x.rows >= x.cols, "jacobi_svd expects rows >= cols");
    let (m, n) = (x.rows, x.cols);
    let mut a = x.clone();
    let mut v = Matrix::identity(n);
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for r in 0..m {
                    let ap = a[(r, p)];
                    let aq = a[(r, q)];
                    alpha += ap * ap;
                    beta += aq * aq;
                    gamma += ap * aq;
                }
                if gamma == 0.0 || math::abs(gamma) <= 1e-15 * math::sqrt(alpha * beta) {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (math::abs(zeta) + math::sqrt(1.0 + zeta * zeta));
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / math::sqrt(1.0 + t * t);
                let s = c * t;
                for r in 0..m {
                    let ap = a[(r, p)];
                    let aq = a[(r, q)];
                    a[(r, p)] = c * ap - s * aq;
                    a[(r, q)] = s * ap + c * aq;
                }
                for r in 0..n {
                    let vp = v[(r, p)];
                    let vq = v[(r, q)];
                    v[(r, p)] = c * vp - s * vq;
                    v[(r, q)] = s * vp + c * vq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut s = vec![0.0; n];
    let mut u = Matrix::zeros(m, n);
    for c in 0..n {
        let norm = math::sqrt((0..m).map(|r| a[(r, c)] * a[(r, c)]).sum());
        s[c] = norm;
        if norm > 0.0 {
            for r in 0..m {
                u[(r, c)] = a[(r, c)] / norm;
            }
        }
    }
    Svd { u, s, v }
}

fn svd_pseudoinverse(x: &Matrix) -> Matrix {
    if x.rows < x.cols {
        return svd_pseudoinverse(&x.transpose()).transpose();
    }
    let Svd { u, s, v } = jacobi_svd(x);
    let smax = s.iter().cloned().fold(0.0, f64::max);
    let tol = RANK_TOLERANCE * smax.max(f64::MIN_POSITIVE) * (x.rows.max(x.cols) as f64);
    let (m, n) = (x.rows, x.cols);
    let mut out = Matrix::zeros(n, m);
    for (k, sk) in s.iter().enumerate() {
        if *sk <= tol {
            continue;
        }
        let inv = 1.0 / sk;
        for i in 0..n {
            let vik = v[(i, k)] * inv;
            if vik == 0.0 {
                continue;
            }
            for j in 0..m {
                out[(i, j)] += vik * u[(j, k)];
            }
        }
    }
    out
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
/// Returns eigenvalues (ascending) and eigenvectors as columns.
pub fn symmetric_eigen(a: &Matrix) -> (Vec<f64>, Matrix) {
    assert!(a.is_square(), "symmetric_eigen needs a square matrix");
    let n = a.rows;
    let mut m = a.clone();
    let mut v = Matrix::identity(n);
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)] * m[(i, j)])
            .sum();
        if off <= 1e-30 * math::powi(m.frobenius_norm().max(f64::MIN_POSITIVE), 2) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[(q, q)] - m[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (math::abs(theta) + math::hypot(1.0, theta));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / math::sqrt(1.0 + t * t);
                let s = t * c;
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = c * mkp - s * mkq;
                    m[(k, q)] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = c * mpk - s * mqk;
                    m[(q, k)] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        m[(i, i)]
            .partial_cmp(&m[(j, j)])
            .unwrap_or(core::cmp::Ordering::Equal)
    });
    let values = order.iter().map(|&i| m[(i, i)]).collect();
    let vectors = Matrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    (values, vectors)
}

/// Given `inv = A⁻¹` for SPD `A`, returns `(A - x xᵀ)⁻¹`.
pub fn sherman_morrison_downdate(inv: &Matrix, x: &[f64]) -> Result<Matrix> {
    if !inv.is_square() || inv.rows != x.len() {
        return Err(Error::DimensionMismatch {
            expected: inv.rows,
            found: x.len(),
        });
    }
    let u = inv.mul_vec(x);
    let margin = 1.0 - dot(x, &u);
    if !(margin > DOWNDATE_FLOOR) {
        return Err(Error::DowndateSingular { margin });
    }
    let mut out = inv.clone();
    out.rank_one_update(1.0 / margin, &u, &u);
    Ok(out)
}

/// Falling factorial `k (k-1) ... (k-d+1)`.
pub fn falling_factorial(k: usize, d: usize) -> f64 {
    (0..d).map(|i| k as f64 - i as f64).product()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn max_abs_diff(a: &Matrix, b: &Matrix) -> f64 {
        a.sub(b).max_abs()
    }

    fn lcg_matrix(rows: usize, cols: usize, seed: u64) -> Matrix {
        let mut s = seed;
        Matrix::from_fn(rows, cols, |_, _| {
            s = s
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        })
    }

    #[test]
    fn cholesky_identity_and_diagonal() {
        let c = cholesky(&Matrix::identity(2)).unwrap();
        assert_eq!(c.lower(), &Matrix::identity(2));
        assert_abs_diff_eq!(c.logdet(), 0.0);

        let c = cholesky(&Matrix::diag(&[4.0, 9.0])).unwrap();
        assert_eq!(c.lower(), &Matrix::diag(&[2.0, 3.0]));
        assert_abs_diff_eq!(c.logdet(), 36f64.ln(), epsilon = 1e-14);
    }

    #[test]
    fn cholesky_random_spd_reconstructs() {
        let g = lcg_matrix(3, 3, 7);
        let a = g.gram().add(&Matrix::identity(3));
        let c = cholesky(&a).unwrap();
        let l = c.lower();
        let back = l.matmul(&l.transpose());
        assert!(max_abs_diff(&back, &a) <= 1e-10 * a.max_abs());
        for i in 0..3 {
            assert!(l[(i, i)] > 0.0);
            for j in i + 1..3 {
                assert_eq!(l[(i, j)], 0.0);
            }
        }
    }

    #[test]
    fn cholesky_rejects_indefinite_and_semidefinite() {
        let a = Matrix::from_rows(&[[1.0, 2.0], [2.0, 1.0]]);
        assert!(matches!(
            cholesky(&a),
            Err(Error::NotPositiveDefinite { .. })
        ));
        let a = Matrix::from_rows(&[[1.0, 1.0], [1.0, 1.0]]);
        assert!(matches!(
            cholesky(&a),
            Err(Error::NotPositiveDefinite { .. })
        ));
        let a = Matrix::from_rows(&[[1.0, 0.5], [0.4, 1.0]]);
        assert_eq!(cholesky(&a), Err(Error::NotSymmetric));
    }

    #[test]
    fn det_gram_examples() {
        assert_abs_diff_eq!(
            det_gram(&Matrix::from_rows(&[[1.0], [2.0]])),
            5.0,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(det_gram(&Matrix::identity(4)), 1.0, epsilon = 1e-12);
        let x = Matrix::from_rows(&[[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [2.0, 0.0]]);
        assert_abs_diff_eq!(det_gram(&x), 11.0, epsilon = 1e-12);
        // Rank-deficient input.
        let x = Matrix::from_rows(&[[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]]);
        assert!(det_gram(&x).abs() < 1e-12);
        assert_eq!(det_gram(&Matrix::from_rows(&[[1.0, 2.0]])), 0.0);
    }

    #[test]
    fn pseudoinverse_examples() {
        let x = Matrix::from_rows(&[[1.0], [2.0]]);
        let w = pseudoinverse(&x).mul_vec(&[1.0, 1.0]);
        assert_abs_diff_eq!(w[0], 0.6, epsilon = 1e-14);
        assert!(max_abs_diff(&pseudoinverse(&Matrix::identity(3)), &Matrix::identity(3)) < 1e-14);
    }

    fn penrose_residual(x: &Matrix, p: &Matrix) -> f64 {
        let xpx = x.matmul(p).matmul(x);
        let pxp = p.matmul(x).matmul(p);
        let xp = x.matmul(p);
        let px = p.matmul(x);
        max_abs_diff(&xpx, x)
            .max(max_abs_diff(&pxp, p))
            .max(max_abs_diff(&xp, &xp.transpose()))
            .max(max_abs_diff(&px, &px.transpose()))
    }

    #[test]
    fn pseudoinverse_penrose_full_rank_and_deficient() {
        let x = lcg_matrix(5, 3, 11);
        let p = pseudoinverse(&x);
        assert!(penrose_residual(&x, &p) < 1e-8);
        // Agrees with (XᵀX)⁻¹Xᵀ.
        let alt = spd_inverse(&x.gram()).unwrap().matmul(&x.transpose());
        assert!(max_abs_diff(&p, &alt) < 1e-10);

        let mut y = lcg_matrix(6, 3, 3);
        for r in 0..6 {
            let v = y[(r, 0)] - 2.0 * y[(r, 1)];
            y[(r, 2)] = v;
        }
        let p = pseudoinverse(&y);
        assert!(penrose_residual(&y, &p) < 1e-8);

        let wide = lcg_matrix(2, 4, 5);
        let p = pseudoinverse(&wide);
        assert!(penrose_residual(&wide, &p) < 1e-8);

        let zero = Matrix::zeros(3, 2);
        assert_eq!(pseudoinverse(&zero), Matrix::zeros(2, 3));
    }

    #[test]
    fn adjugate_examples() {
        let a = Matrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]);
        assert_eq!(adjugate(&a), Matrix::from_rows(&[[4.0, -2.0], [-3.0, 1.0]]));
        assert_eq!(adjugate(&Matrix::identity(3)), Matrix::identity(3));
        let s = Matrix::from_rows(&[[1.0, 2.0], [2.0, 4.0]]);
        let adj = adjugate(&s);
        assert_eq!(adj, Matrix::from_rows(&[[4.0, -2.0], [-2.0, 1.0]]));
        assert_eq!(adj.matmul(&s), Matrix::zeros(2, 2));
    }

    #[test]
    fn adjugate_matches_det_times_inverse() {
        let a = lcg_matrix(4, 4, 19);
        let adj = adjugate(&a);
        let alt = inverse(&a).unwrap().scaled(det(&a));
        assert!(max_abs_diff(&adj, &alt) < 1e-8 * alt.max_abs().max(1.0));
        let prod = adj.matmul(&a);
        assert!(max_abs_diff(&prod, &Matrix::identity(4).scaled(det(&a))) < 1e-8);
    }

    #[test]
    fn downdate_examples() {
        let inv = Matrix::identity(2).scaled(0.5);
        let out = sherman_morrison_downdate(&inv, &[1.0, 0.0]).unwrap();
        assert!(max_abs_diff(&out, &Matrix::diag(&[1.0, 0.5])) < 1e-14);

        let g = lcg_matrix(4, 3, 23);
        let a = g.gram().add(&Matrix::identity(3));
        let ainv = spd_inverse(&a).unwrap();
        let mut x = vec![0.3, -0.2, 0.5];
        // Shrink until leverage is below 0.9.
        while dot(&x, &ainv.mul_vec(&x)) >= 0.9 {
            x.iter_mut().for_each(|v| *v *= 0.5);
        }
        let direct = spd_inverse(&a.sub(&Matrix::from_fn(3, 3, |i, j| x[i] * x[j]))).unwrap();
        let sm = sherman_morrison_downdate(&ainv, &x).unwrap();
        assert!(max_abs_diff(&direct, &sm) < 1e-8);

        // xᵀA⁻¹x = 1 exactly.
        let err = sherman_morrison_downdate(&Matrix::identity(2), &[1.0, 0.0]);
        assert!(matches!(err, Err(Error::DowndateSingular { .. })));
    }

    #[test]
    fn symmetric_eigen_reconstructs() {
        let g = lcg_matrix(5, 4, 31);
        let a = g.gram();
        let (vals, vecs) = symmetric_eigen(&a);
        let back = vecs.matmul(&Matrix::diag(&vals)).matmul(&vecs.transpose());
        assert!(max_abs_diff(&back, &a) < 1e-10);
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn slogdet_and_inverse() {
        let a = Matrix::from_rows(&[[0.0, 2.0], [3.0, 1.0]]);
        assert_abs_diff_eq!(det(&a), -6.0, epsilon = 1e-14);
        let (s, l) = slogdet(&a);
        assert_eq!(s, -1.0);
        assert_abs_diff_eq!(l, 6f64.ln(), epsilon = 1e-14);
        let inv = inverse(&a).unwrap();
        assert!(max_abs_diff(&inv.matmul(&a), &Matrix::identity(2)) < 1e-14);
        assert_eq!(inverse(&Matrix::zeros(2, 2)), Err(Error::RankDeficient));
    }

    #[test]
    fn matrix_new_validates() {
        assert!(Matrix::new(2, 2, vec![1.0; 3]).is_err());
        assert_eq!(Matrix::new(1, 1, vec![f64::NAN]), Err(Error::NonFinite));
    }
}
