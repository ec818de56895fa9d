//! Dense matrices over any supported field.
//!
//! Matrices are values: every operation returns a fresh matrix. The
//! arithmetic operators on `&Matrix` panic on shape or field mismatch, the
//! same way slice indexing does; the `checked_*` methods report the
//! mismatch as an [`Error`] instead.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use rand::Rng;

use crate::error::{Error, Result};
use crate::fields::{Elem, Field, FieldValue};

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    field: Field,
    rows: usize,
    cols: usize,
    data: Vec<Elem>,
}

/// The four blocks of an `(m + n) x (m + n)` matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockView {
    /// `m x m`
    pub m1: Matrix,
    /// `m x n`
    pub m2: Matrix,
    /// `n x m`
    pub m3: Matrix,
    /// `n x n`
    pub m4: Matrix,
}

impl Matrix {
    pub fn zeros(field: Field, rows: usize, cols: usize) -> Matrix {
        Matrix {
            field,
            rows,
            cols,
            data: vec![field.zero(); rows * cols],
        }
    }

    pub fn identity(field: Field, n: usize) -> Matrix {
        let mut m = Matrix::zeros(field, n, n);
        for i in 0..n {
            m.data[i * n + i] = field.one();
        }
        m
    }

    pub fn from_fn(
        field: Field,
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> Elem,
    ) -> Matrix {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix {
            field,
            rows,
            cols,
            data,
        }
    }

    /// Builds a matrix from rows of payloads, checking shape and membership.
    pub fn from_rows(field: Field, rows: Vec<Vec<Elem>>) -> Result<Matrix> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != c {
                return Err(Error::DimensionMismatch(format!(
                    "row {i} has {} entries, expected {c}",
                    row.len()
                )));
            }
            for e in row {
                if !field.contains(&e) {
                    return Err(Error::InvalidLiteral {
                        field,
                        literal: format!("{e:?}"),
                    });
                }
                data.push(e);
            }
        }
        Ok(Matrix {
            field,
            rows: r,
            cols: c,
            data,
        })
    }

    /// Convenience constructor from small integers.
    pub fn from_ints(field: Field, rows: &[&[i64]]) -> Matrix {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Matrix::from_fn(field, r, c, |i, j| field.from_int(rows[i][j]))
    }

    pub fn diagonal(field: Field, diag: &[Elem]) -> Matrix {
        let n = diag.len();
        let mut m = Matrix::zeros(field, n, n);
        for (i, d) in diag.iter().enumerate() {
            m.data[i * n + i] = d.clone();
        }
        m
    }

    pub fn field(&self) -> Field {
        self.field
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

    pub fn get(&self, i: usize, j: usize) -> &Elem {
        &self.data[i * self.cols + j]
    }

    pub fn value(&self, i: usize, j: usize) -> FieldValue {
        FieldValue::new(self.field, self.get(i, j).clone()).expect("entries belong to the field")
    }

    pub fn set(&mut self, i: usize, j: usize, e: Elem) {
        debug_assert!(self.field.contains(&e));
        self.data[i * self.cols + j] = e;
    }

    pub fn entries(&self) -> &[Elem] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Elem] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<Elem>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn diag(&self) -> Vec<Elem> {
        (0..self.rows.min(self.cols))
            .map(|i| self.get(i, i).clone())
            .collect()
    }

    pub fn column(&self, j: usize) -> Vec<Elem> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(field: Field, rows: usize, cols: &[Vec<Elem>]) -> Matrix {
        Matrix::from_fn(field, rows, cols.len(), |i, j| cols[j][i].clone())
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|e| self.field.is_zero(e))
    }

    pub fn is_identity(&self) -> bool {
        self.is_square() && *self == Matrix::identity(self.field, self.rows)
    }

    pub fn is_diagonal(&self) -> bool {
        self.is_square()
            && (0..self.rows)
                .all(|i| (0..self.cols).all(|j| i == j || self.field.is_zero(self.get(i, j))))
    }

    /// `Some(c)` when the matrix is `c·I`.
    pub fn scalar_value(&self) -> Option<Elem> {
        if !self.is_diagonal() || self.rows == 0 {
            return None;
        }
        let c = self.get(0, 0).clone();
        self.diag().iter().all(|d| *d == c).then_some(c)
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.field, self.cols, self.rows, |i, j| {
            self.get(j, i).clone()
        })
    }

    pub fn scale(&self, c: &Elem) -> Matrix {
        let f = self.field;
        Matrix {
            field: f,
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|e| f.mul(c, e)).collect(),
        }
    }

    fn check_same_field(&self, other: &Matrix) -> Result<()> {
        if self.field != other.field {
            return Err(Error::FieldMismatch(self.field, other.field));
        }
        Ok(())
    }

    pub fn checked_mul(&self, other: &Matrix) -> Result<Matrix> {
        self.check_same_field(other)?;
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let f = self.field;
        let mut out = Matrix::zeros(f, self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if f.is_zero(a) {
                    continue;
                }
                for j in 0..other.cols {
                    let idx = i * other.cols + j;
                    out.data[idx] = f.add(&out.data[idx], &f.mul(a, other.get(k, j)));
                }
            }
        }
        Ok(out)
    }

    fn zip_with(&self, other: &Matrix, op: impl Fn(&Elem, &Elem) -> Elem) -> Result<Matrix> {
        self.check_same_field(other)?;
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(Matrix {
            field: self.field,
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| op(a, b))
                .collect(),
        })
    }

    pub fn checked_add(&self, other: &Matrix) -> Result<Matrix> {
        let f = self.field;
        self.zip_with(other, |a, b| f.add(a, b))
    }

    pub fn checked_sub(&self, other: &Matrix) -> Result<Matrix> {
        let f = self.field;
        self.zip_with(other, |a, b| f.sub(a, b))
    }

    fn require_square(&self) -> Result<()> {
        if self.is_square() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch(format!(
                "expected a square matrix, got {}x{}",
                self.rows, self.cols
            )))
        }
    }

    /// Index of the pivot row for `col`, searching rows `from..`. Exact
    /// fields take the first nonzero entry; floats take the largest.
    fn pivot_row(&self, col: usize, from: usize) -> Option<usize> {
        if self.field.is_exact() {
            (from..self.rows).find(|&r| !self.field.is_zero(self.get(r, col)))
        } else {
            let abs = |r: usize| match self.get(r, col) {
                Elem::Float(x) => x.abs(),
                _ => unreachable!(),
            };
            (from..self.rows)
                .filter(|&r| abs(r) != 0.0)
                .max_by(|&a, &b| abs(a).total_cmp(&abs(b)))
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    /// `row[target] -= factor * row[source]`, from column `start` on.
    fn eliminate(&mut self, target: usize, source: usize, factor: &Elem, start: usize) {
        let f = self.field;
        for j in start..self.cols {
            let s = f.mul(factor, self.get(source, j));
            let idx = target * self.cols + j;
            self.data[idx] = f.sub(&self.data[idx], &s);
        }
    }

    /// Reduced row echelon form and its pivot columns.
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let f = self.field;
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = m.pivot_row(c, r) else { continue };
            m.swap_rows(r, p);
            let inv = f.inv(m.get(r, c)).expect("pivot is nonzero");
            for j in c..m.cols {
                let idx = r * m.cols + j;
                m.data[idx] = f.mul(&inv, &m.data[idx]);
            }
            for i in 0..m.rows {
                if i != r && !f.is_zero(m.get(i, c)) {
                    let factor = m.get(i, c).clone();
                    m.eliminate(i, r, &factor, c);
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Gauss-Jordan inverse.
    pub fn inverse(&self) -> Result<Matrix> {
        self.require_square()?;
        let n = self.rows;
        let f = self.field;
        let mut aug = self.hstack(&Matrix::identity(f, n))?;
        for c in 0..n {
            let p = aug.pivot_row(c, c).ok_or(Error::SingularMatrix)?;
            aug.swap_rows(c, p);
            let inv = f.inv(aug.get(c, c))?;
            for j in c..aug.cols {
                let idx = c * aug.cols + j;
                aug.data[idx] = f.mul(&inv, &aug.data[idx]);
            }
            for i in 0..n {
                if i != c && !f.is_zero(aug.get(i, c)) {
                    let factor = aug.get(i, c).clone();
                    aug.eliminate(i, c, &factor, c);
                }
            }
        }
        Ok(aug.submatrix(0, n, n, n))
    }

    /// Determinant by Gaussian elimination (pivoting rules as in
    /// [`Matrix::inverse`]).
    pub fn det(&self) -> Result<FieldValue> {
        self.require_square()?;
        let f = self.field;
        let n = self.rows;
        let mut m = self.clone();
        let mut det = f.one();
        for c in 0..n {
            let Some(p) = m.pivot_row(c, c) else {
                return Ok(FieldValue::new(f, f.zero()).expect("zero"));
            };
            if p != c {
                m.swap_rows(c, p);
                det = f.neg(&det);
            }
            let piv = m.get(c, c).clone();
            det = f.mul(&det, &piv);
            let inv = f.inv(&piv)?;
            for i in c + 1..n {
                if !f.is_zero(m.get(i, c)) {
                    let factor = f.mul(m.get(i, c), &inv);
                    m.eliminate(i, c, &factor, c);
                }
            }
        }
        Ok(FieldValue::new(f, det).expect("det belongs to the field"))
    }

    pub fn is_invertible(&self) -> bool {
        self.is_square() && self.rank() == self.rows
    }

    /// Basis of the right null space.
    pub fn kernel_basis(&self) -> Result<Vec<Vec<Elem>>> {
        self.field.require_exact()?;
        let f = self.field;
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        Ok(free
            .iter()
            .map(|&fc| {
                let mut v = vec![f.zero(); self.cols];
                v[fc] = f.one();
                for (row, &pc) in pivots.iter().enumerate() {
                    v[pc] = f.neg(r.get(row, fc));
                }
                v
            })
            .collect())
    }

    /// Coefficients of `det(tI - A)`, highest degree first (so index 0 is
    /// the leading 1). Berkowitz's algorithm: no divisions, valid in every
    /// characteristic.
    pub fn charpoly(&self) -> Result<Vec<Elem>> {
        self.field.require_exact()?;
        self.require_square()?;
        let f = self.field;
        let mut poly = vec![f.one()];
        for k in 0..self.rows {
            // Leading k x k block A, column c = A[0..k][k], row r = A[k][0..k].
            let lead = self.submatrix(0, 0, k, k);
            let col: Vec<Elem> = (0..k).map(|i| self.get(i, k).clone()).collect();
            let row: Vec<Elem> = (0..k).map(|j| self.get(k, j).clone()).collect();
            let mut toeplitz = Vec::with_capacity(k + 2);
            toeplitz.push(f.one());
            toeplitz.push(f.neg(self.get(k, k)));
            let mut v = col;
            for _ in 0..k {
                let dot = row
                    .iter()
                    .zip(&v)
                    .fold(f.zero(), |acc, (a, b)| f.add(&acc, &f.mul(a, b)));
                toeplitz.push(f.neg(&dot));
                v = lead.mul_vec(&v);
            }
            let mut next = vec![f.zero(); k + 2];
            for (i, slot) in next.iter_mut().enumerate() {
                for (j, p) in poly.iter().enumerate().take(i + 1) {
                    *slot = f.add(slot, &f.mul(&toeplitz[i - j], p));
                }
            }
            poly = next;
        }
        Ok(poly)
    }

    pub fn mul_vec(&self, v: &[Elem]) -> Vec<Elem> {
        assert_eq!(v.len(), self.cols, "vector length");
        let f = self.field;
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(f.zero(), |acc, (a, b)| f.add(&acc, &f.mul(a, b)))
            })
            .collect()
    }

    pub fn submatrix(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Matrix {
        assert!(
            r0 + rows <= self.rows && c0 + cols <= self.cols,
            "submatrix out of range"
        );
        Matrix::from_fn(self.field, rows, cols, |i, j| {
            self.get(r0 + i, c0 + j).clone()
        })
    }

    pub fn hstack(&self, other: &Matrix) -> Result<Matrix> {
        self.check_same_field(other)?;
        if self.rows != other.rows {
            return Err(Error::DimensionMismatch("hstack row counts differ".into()));
        }
        Ok(Matrix::from_fn(
            self.field,
            self.rows,
            self.cols + other.cols,
            |i, j| {
                if j < self.cols {
                    self.get(i, j).clone()
                } else {
                    other.get(i, j - self.cols).clone()
                }
            },
        ))
    }

    pub fn vstack(&self, other: &Matrix) -> Result<Matrix> {
        self.check_same_field(other)?;
        if self.cols != other.cols {
            return Err(Error::DimensionMismatch(
                "vstack column counts differ".into(),
            ));
        }
        Ok(Matrix::from_fn(
            self.field,
            self.rows + other.rows,
            self.cols,
            |i, j| {
                if i < self.rows {
                    self.get(i, j).clone()
                } else {
                    other.get(i - self.rows, j).clone()
                }
            },
        ))
    }

    /// Splits an `(m + n) x (m + n)` matrix into its four blocks.
    pub fn block_split(&self, m: usize, n: usize) -> Result<BlockView> {
        if self.rows != m + n || self.cols != m + n {
            return Err(Error::DimensionMismatch(format!(
                "cannot split {}x{} into ({m}, {n}) blocks",
                self.rows, self.cols
            )));
        }
        Ok(BlockView {
            m1: self.submatrix(0, 0, m, m),
            m2: self.submatrix(0, m, m, n),
            m3: self.submatrix(m, 0, n, m),
            m4: self.submatrix(m, m, n, n),
        })
    }

    /// `P_π M P_{π⁻¹}`, where `P_π` sends basis vector `e_j` to `e_{π(j)}`,
    /// so entry `(i, j)` moves to `(π(i), π(j))`.
    pub fn permute_conjugate(&self, perm: &[usize]) -> Result<Matrix> {
        self.require_square()?;
        let n = self.rows;
        let mut seen = vec![false; n];
        if perm.len() != n
            || !perm
                .iter()
                .all(|&p| p < n && !std::mem::replace(&mut seen[p], true))
        {
            return Err(Error::DimensionMismatch(format!(
                "{perm:?} is not a permutation of 0..{n}"
            )));
        }
        let mut out = Matrix::zeros(self.field, n, n);
        for i in 0..n {
            for j in 0..n {
                out.set(perm[i], perm[j], self.get(i, j).clone());
            }
        }
        Ok(out)
    }

    /// Permutation matrix `P_π` (column `j` is `e_{π(j)}`).
    pub fn permutation(field: Field, perm: &[usize]) -> Matrix {
        let n = perm.len();
        let mut m = Matrix::zeros(field, n, n);
        for (j, &p) in perm.iter().enumerate() {
            m.set(p, j, field.one());
        }
        m
    }

    /// Evaluates a polynomial (highest degree first) at this matrix by Horner.
    pub fn eval_poly(&self, coeffs: &[Elem]) -> Matrix {
        let n = self.rows;
        let mut acc = Matrix::zeros(self.field, n, n);
        let id = Matrix::identity(self.field, n);
        for c in coeffs {
            acc = &(&acc * self) + &id.scale(c);
        }
        acc
    }

    /// Uniform random matrix (see [`Field::random`] for the entry law).
    pub fn random<R: Rng + ?Sized>(field: Field, rows: usize, cols: usize, rng: &mut R) -> Matrix {
        Matrix::from_fn(field, rows, cols, |_, _| field.random(rng))
    }

    pub fn random_invertible<R: Rng + ?Sized>(field: Field, n: usize, rng: &mut R) -> Matrix {
        loop {
            let m = Matrix::random(field, n, n, rng);
            if m.is_invertible() {
                return m;
            }
        }
    }

    /// Random determinant-one matrix: a random invertible matrix with its
    /// first row divided by the determinant.
    pub fn random_special<R: Rng + ?Sized>(field: Field, n: usize, rng: &mut R) -> Matrix {
        let mut m = Matrix::random_invertible(field, n, rng);
        let f = field;
        let inv = f.inv(m.det().expect("square").elem()).expect("invertible");
        for j in 0..n {
            let e = f.mul(&inv, m.get(0, j));
            m.set(0, j, e);
        }
        m
    }

    /// Infinity norm (max absolute row sum) of a float or rational matrix.
    pub fn norm_inf(&self) -> Result<f64> {
        let f = self.field;
        (0..self.rows).try_fold(0.0f64, |best, i| {
            let s = self
                .row(i)
                .iter()
                .map(|e| f.to_f64(e).map(f64::abs))
                .sum::<Result<f64>>()?;
            Ok(best.max(s))
        })
    }
}

impl BlockView {
    /// Reassembles the `(m + n) x (m + n)` matrix.
    pub fn join(&self) -> Result<Matrix> {
        let m = self.m1.rows;
        let n = self.m4.rows;
        let ok = self.m1.is_square()
            && self.m4.is_square()
            && (self.m2.rows, self.m2.cols) == (m, n)
            && (self.m3.rows, self.m3.cols) == (n, m);
        if !ok {
            return Err(Error::DimensionMismatch("inconsistent block shapes".into()));
        }
        self.m1.hstack(&self.m2)?.vstack(&self.m3.hstack(&self.m4)?)
    }
}

/// Joins four blocks into one matrix.
pub fn block_join(view: &BlockView) -> Result<Matrix> {
    view.join()
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $checked:ident) => {
        impl $trait<&Matrix> for &Matrix {
            type Output = Matrix;

            fn $method(self, rhs: &Matrix) -> Matrix {
                match self.$checked(rhs) {
                    Ok(m) => m,
                    Err(e) => panic!("{}: {e}", stringify!($method)),
                }
            }
        }
    };
}

forward_binop!(Mul, mul, checked_mul);
forward_binop!(Add, add, checked_add);
forward_binop!(Sub, sub, checked_sub);

impl Neg for &Matrix {
    type Output = Matrix;

    fn neg(self) -> Matrix {
        let f = self.field;
        Matrix {
            field: f,
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|e| f.neg(e)).collect(),
        }
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = self
                .row(i)
                .iter()
                .map(|e| self.field.format_elem(e))
                .collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// Checked product, the public form of `&a * &b`.
pub fn mat_mul(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    a.checked_mul(b)
}
