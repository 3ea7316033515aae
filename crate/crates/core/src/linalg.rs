//! Dense and sparse complex matrices.
//!
//! `ComplexMatrix` is the value type for every operator and state. States are
//! dense; the model operators (ladder, rotor phase, spot position) have a few
//! nonzeros per row, so the steppers work with their `SparseOp` (CSR) form and
//! only ever multiply sparse-by-dense.

use std::fmt;
use std::ops::{Add, AddAssign, Mul, Sub};

use faer::Mat;
use num_complex::Complex64;

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);

/// Square complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})", self.dim, self.dim)?;
        if self.dim <= 8 {
            for i in 0..self.dim {
                let row: Vec<String> = self
                    .row(i)
                    .iter()
                    .map(|z| format!("{:+.4}{:+.4}i", z.re, z.im))
                    .collect();
                writeln!(f, "  [{}]", row.join(", "))?;
            }
        }
        Ok(())
    }
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "matrix dimension must be positive");
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        m
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let dim = diag.len();
        let mut m = Self::zeros(dim);
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * dim + i] = C64::new(d, 0.0);
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.data[i * dim + j] = f(i, j);
            }
        }
        m
    }

    /// Builds a matrix from row-major entries. Panics unless `data.len()` is a
    /// positive perfect square.
    pub fn from_row_major(data: Vec<C64>) -> Self {
        let dim = (data.len() as f64).sqrt().round() as usize;
        assert!(dim >= 1 && dim * dim == data.len(), "not a square matrix");
        Self { dim, data }
    }

    /// Outer product |v⟩⟨v|.
    pub fn projector(v: &[C64]) -> Self {
        Self::from_fn(v.len(), |i, j| v[i] * v[j].conj())
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, z: C64) {
        self.data[i * self.dim + j] = z;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.dim).map(|i| self.get(i, i)).collect()
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        adjoint_into(&self.data, &mut out.data, n);
        out
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self.get(j, i))
    }

    pub fn scale(&self, z: C64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&a| a * z).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&a| a * s).collect(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "matmul dimension mismatch");
        let a = self.to_faer();
        let b = other.to_faer();
        Self::from_faer(&(a * b))
    }

    /// `self·other − other·self`.
    pub fn commutator(&self, other: &Self) -> Self {
        &self.matmul(other) - &other.matmul(self)
    }

    /// Kronecker product with `self` as the slow (outer) index.
    pub fn kron(&self, other: &Self) -> Self {
        let (na, nb) = (self.dim, other.dim);
        let n = na * nb;
        let mut out = Self::zeros(n);
        for i1 in 0..na {
            for j1 in 0..na {
                let a = self.get(i1, j1);
                if a == ZERO {
                    continue;
                }
                for i2 in 0..nb {
                    let row = (i1 * nb + i2) * n + j1 * nb;
                    for j2 in 0..nb {
                        out.data[row + j2] = a * other.get(i2, j2);
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Entrywise comparison at an absolute tolerance.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.dim == other.dim && self.max_abs_diff(other) <= tol
    }

    /// `max |a_ij − conj(a_ji)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    /// `(A + A†)/2`.
    pub fn hermitian_part(&self) -> Self {
        let mut out = self.clone();
        symmetrize_in_place(&mut out.data, self.dim);
        out
    }

    /// Frobenius inner product `Tr(A·B)` without forming the product.
    pub fn trace_of_product(&self, other: &Self) -> C64 {
        let n = self.dim;
        let mut acc = ZERO;
        for i in 0..n {
            for k in 0..n {
                acc += self.data[i * n + k] * other.data[k * n + i];
            }
        }
        acc
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub(crate) fn to_faer(&self) -> Mat<faer::c64> {
        let n = self.dim;
        Mat::from_fn(n, n, |i, j| {
            let z = self.data[i * n + j];
            faer::c64::new(z.re, z.im)
        })
    }

    pub(crate) fn from_faer(m: &Mat<faer::c64>) -> Self {
        let n = m.nrows();
        Self::from_fn(n, |i, j| {
            let z = m[(i, j)];
            C64::new(z.re, z.im)
        })
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: Self) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim);
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: Self) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim);
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl AddAssign<&ComplexMatrix> for ComplexMatrix {
    fn add_assign(&mut self, rhs: &ComplexMatrix) {
        assert_eq!(self.dim, rhs.dim);
        for (a, b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: Self) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

/// Compressed-sparse-row complex operator.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseOp {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<C64>,
}

impl SparseOp {
    /// Keeps every entry that is not exactly zero.
    pub fn from_dense(m: &ComplexMatrix) -> Self {
        let n = m.dim();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for i in 0..n {
            for (j, &z) in m.row(i).iter().enumerate() {
                if z != ZERO {
                    cols.push(j);
                    vals.push(z);
                }
            }
            row_ptr.push(cols.len());
        }
        Self {
            dim: n,
            row_ptr,
            cols,
            vals,
        }
    }

    /// Union of the sparsity patterns of `ops` (plus the diagonal), with all
    /// values zero. Used as the fixed layout for assembling linear
    /// combinations of `ops` in O(nnz).
    pub fn union_pattern(dim: usize, ops: &[&SparseOp]) -> Self {
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        row_ptr.push(0);
        let mut scratch: Vec<usize> = Vec::new();
        for i in 0..dim {
            scratch.clear();
            scratch.push(i);
            for op in ops {
                assert_eq!(op.dim, dim, "pattern dimension mismatch");
                scratch.extend_from_slice(op.row_cols(i));
            }
            scratch.sort_unstable();
            scratch.dedup();
            cols.extend_from_slice(&scratch);
            row_ptr.push(cols.len());
        }
        let vals = vec![ZERO; cols.len()];
        Self {
            dim,
            row_ptr,
            cols,
            vals,
        }
    }

    /// Values of `self` laid out on `pattern`, which must contain self's
    /// pattern.
    pub fn values_on(&self, pattern: &SparseOp) -> Vec<C64> {
        let mut out = vec![ZERO; pattern.nnz()];
        for i in 0..self.dim {
            let prow = pattern.row_ptr[i]..pattern.row_ptr[i + 1];
            let pcols = &pattern.cols[prow.clone()];
            for (c, v) in self.row_cols(i).iter().zip(self.row_vals(i)) {
                let pos = pcols
                    .binary_search(c)
                    .expect("pattern does not cover operator");
                out[prow.start + pos] = *v;
            }
        }
        out
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    #[inline]
    fn row_cols(&self, i: usize) -> &[usize] {
        &self.cols[self.row_ptr[i]..self.row_ptr[i + 1]]
    }

    #[inline]
    fn row_vals(&self, i: usize) -> &[C64] {
        &self.vals[self.row_ptr[i]..self.row_ptr[i + 1]]
    }

    pub fn values_mut(&mut self) -> &mut [C64] {
        &mut self.vals
    }

    pub fn to_dense(&self) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(self.dim);
        for i in 0..self.dim {
            for (&c, &v) in self.row_cols(i).iter().zip(self.row_vals(i)) {
                m.set(i, c, v);
            }
        }
        m
    }

    pub fn adjoint(&self) -> Self {
        Self::from_dense(&self.to_dense().adjoint())
    }

    /// `out = self · dense`, all row-major `dim×dim`.
    pub fn mul_dense_into(&self, dense: &[C64], out: &mut [C64]) {
        let n = self.dim;
        debug_assert_eq!(dense.len(), n * n);
        debug_assert_eq!(out.len(), n * n);
        for i in 0..n {
            let out_row = &mut out[i * n..(i + 1) * n];
            out_row.fill(ZERO);
            for (&k, &v) in self.row_cols(i).iter().zip(self.row_vals(i)) {
                axpy(v, &dense[k * n..(k + 1) * n], out_row);
            }
        }
    }

    /// `out += scale · self · dense`.
    pub fn mul_dense_acc(&self, scale: C64, dense: &[C64], out: &mut [C64]) {
        let n = self.dim;
        for i in 0..n {
            let out_row = &mut out[i * n..(i + 1) * n];
            for (&k, &v) in self.row_cols(i).iter().zip(self.row_vals(i)) {
                axpy(scale * v, &dense[k * n..(k + 1) * n], out_row);
            }
        }
    }

    /// Upper triangle (j ≥ i) of `self · dense`, for products known to be
    /// Hermitian. The strict lower triangle of `out` is left untouched.
    pub fn mul_dense_upper_into(&self, dense: &[C64], out: &mut [C64]) {
        let n = self.dim;
        for i in 0..n {
            let out_row = &mut out[i * n + i..(i + 1) * n];
            out_row.fill(ZERO);
            for (&k, &v) in self.row_cols(i).iter().zip(self.row_vals(i)) {
                axpy(v, &dense[k * n + i..(k + 1) * n], out_row);
            }
        }
    }

    /// `out[upper] += scale · (self · dense)[upper]`.
    pub fn mul_dense_upper_acc(&self, scale: C64, dense: &[C64], out: &mut [C64]) {
        let n = self.dim;
        for i in 0..n {
            let out_row = &mut out[i * n + i..(i + 1) * n];
            for (&k, &v) in self.row_cols(i).iter().zip(self.row_vals(i)) {
                axpy(scale * v, &dense[k * n + i..(k + 1) * n], out_row);
            }
        }
    }

    /// `self · diag(d)`.
    pub fn scale_columns(&mut self, d: &[C64]) {
        for (c, v) in self.cols.iter().zip(self.vals.iter_mut()) {
            *v *= d[*c];
        }
    }

    /// Operator product `self · other`, exact pattern.
    pub fn matmul(&self, other: &SparseOp) -> SparseOp {
        SparseOp::from_dense(&self.to_dense().matmul(&other.to_dense()))
    }

    /// `out = dense · self`.
    pub fn dense_mul_into(&self, dense: &[C64], out: &mut [C64]) {
        out.fill(ZERO);
        self.dense_mul_acc(ONE, dense, out);
    }

    /// `out += scale · dense · self`.
    pub fn dense_mul_acc(&self, scale: C64, dense: &[C64], out: &mut [C64]) {
        let n = self.dim;
        for i in 0..n {
            let d_row = &dense[i * n..(i + 1) * n];
            let out_row = &mut out[i * n..(i + 1) * n];
            for k in 0..n {
                let a = d_row[k];
                if a == ZERO {
                    continue;
                }
                let a = a * scale;
                for (&c, &v) in self.row_cols(k).iter().zip(self.row_vals(k)) {
                    out_row[c] += a * v;
                }
            }
        }
    }

    pub fn mul_vec_into(&self, v: &[C64], out: &mut [C64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self
                .row_cols(i)
                .iter()
                .zip(self.row_vals(i))
                .map(|(&c, &a)| a * v[c])
                .sum();
        }
    }

    /// `Tr(self · dense)`.
    pub fn trace_with(&self, dense: &[C64]) -> C64 {
        let n = self.dim;
        let mut acc = ZERO;
        for i in 0..n {
            for (&c, &v) in self.row_cols(i).iter().zip(self.row_vals(i)) {
                acc += v * dense[c * n + i];
            }
        }
        acc
    }

    /// `⟨v|self|v⟩`.
    pub fn expectation_vec(&self, v: &[C64]) -> C64 {
        let mut acc = ZERO;
        for (i, vi) in v.iter().enumerate() {
            let row: C64 = self
                .row_cols(i)
                .iter()
                .zip(self.row_vals(i))
                .map(|(&c, &a)| a * v[c])
                .sum();
            acc += vi.conj() * row;
        }
        acc
    }
}

#[inline]
pub(crate) fn axpy(a: C64, x: &[C64], y: &mut [C64]) {
    let (ar, ai) = (a.re, a.im);
    for (yi, xi) in y.iter_mut().zip(x) {
        let (xr, xim) = (xi.re, xi.im);
        yi.re += ar * xr - ai * xim;
        yi.im += ar * xim + ai * xr;
    }
}

pub(crate) fn adjoint_into(src: &[C64], dst: &mut [C64], n: usize) {
    const BLOCK: usize = 16;
    for ib in (0..n).step_by(BLOCK) {
        for jb in (0..n).step_by(BLOCK) {
            for i in ib..(ib + BLOCK).min(n) {
                for j in jb..(jb + BLOCK).min(n) {
                    dst[j * n + i] = src[i * n + j].conj();
                }
            }
        }
    }
}

/// Replaces `a` by `(a + a†)/2`.
pub(crate) fn symmetrize_in_place(a: &mut [C64], n: usize) {
    for i in 0..n {
        a[i * n + i].im = 0.0;
        for j in (i + 1)..n {
            let avg = (a[i * n + j] + a[j * n + i].conj()) * 0.5;
            a[i * n + j] = avg;
            a[j * n + i] = avg.conj();
        }
    }
}

/// Fills the strict lower triangle from the upper one so that `a` is
/// Hermitian; the diagonal is made real.
pub(crate) fn mirror_upper(a: &mut [C64], n: usize) {
    for i in 0..n {
        a[i * n + i].im = 0.0;
        for j in (i + 1)..n {
            a[j * n + i] = a[i * n + j].conj();
        }
    }
}

pub(crate) fn trace_of(a: &[C64], n: usize) -> C64 {
    (0..n).map(|i| a[i * n + i]).sum()
}
