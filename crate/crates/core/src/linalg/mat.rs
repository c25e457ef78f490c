//! Dense matrices and Gauss-Jordan elimination.

use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{Field, Scalar};

/// A dense row-major matrix over one field.
///
/// Field agreement of the entries is enforced at construction, so the
/// elimination routines never have to re-check it.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Mat {
    rows: usize,
    cols: usize,
    field: Field,
    entries: Vec<Scalar>,
}

impl Mat {
    pub fn zero(field: Field, rows: usize, cols: usize) -> Mat {
        Mat {
            rows,
            cols,
            field,
            entries: vec![field.zero(); rows * cols],
        }
    }

    pub fn identity(field: Field, n: usize) -> Mat {
        let mut m = Mat::zero(field, n, n);
        for i in 0..n {
            m.set(i, i, field.one());
        }
        m
    }

    /// Build from explicit rows, checking shape and field agreement.
    pub fn from_rows(field: Field, rows: Vec<Vec<Scalar>>) -> Result<Mat> {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, |r| r.len());
        let mut entries = Vec::with_capacity(n_rows * n_cols);
        for row in &rows {
            if row.len() != n_cols {
                return Err(Error::BadMatrix(format!(
                    "ragged rows: {} vs {}",
                    row.len(),
                    n_cols
                )));
            }
            for s in row {
                if s.field() != field {
                    return Err(Error::FieldMismatch(
                        field.to_string(),
                        s.field().to_string(),
                    ));
                }
                entries.push(s.clone());
            }
        }
        Ok(Mat { rows: n_rows, cols: n_cols, field, entries })
    }

    /// Test/fixture helper: integer entries mapped into `field`.
    pub fn from_i64(field: Field, rows: &[&[i64]]) -> Mat {
        let data = rows
            .iter()
            .map(|r| r.iter().map(|&n| field.from_i64(n)).collect())
            .collect();
        Mat::from_rows(field, data).expect("integer rows are field-consistent")
    }

    pub fn from_fn(field: Field, rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Scalar) -> Mat {
        let mut entries = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                entries.push(f(r, c));
            }
        }
        Mat { rows, cols, field, entries }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn at(&self, r: usize, c: usize) -> &Scalar {
        &self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Scalar) {
        debug_assert_eq!(v.field(), self.field);
        self.entries[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[Scalar] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_vecs(&self) -> impl Iterator<Item = &[Scalar]> {
        (0..self.rows).map(|r| self.row(r))
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Scalar::is_zero)
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.field, self.cols, self.rows, |r, c| self.at(c, r).clone())
    }

    /// `self * rhs`; with row vectors this is "apply self, then rhs".
    pub fn matmul(&self, rhs: &Mat) -> Result<Mat> {
        if self.field != rhs.field {
            return Err(Error::FieldMismatch(
                self.field.to_string(),
                rhs.field.to_string(),
            ));
        }
        if self.cols != rhs.rows {
            return Err(Error::BadMatrix(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Mat::zero(self.field, self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let add = a.clone() * rhs.at(k, j).clone();
                    out.set(i, j, out.at(i, j).clone() + add);
                }
            }
        }
        Ok(out)
    }

    /// Row vector times matrix.
    pub fn apply_row(&self, v: &[Scalar]) -> Result<Vec<Scalar>> {
        if v.len() != self.rows {
            return Err(Error::BadMatrix(format!(
                "row of length {} against {} matrix rows",
                v.len(),
                self.rows
            )));
        }
        let mut out = vec![self.field.zero(); self.cols];
        for (i, s) in v.iter().enumerate() {
            if s.is_zero() {
                continue;
            }
            for j in 0..self.cols {
                out[j] = out[j].clone() + s.clone() * self.at(i, j).clone();
            }
        }
        Ok(out)
    }

    /// Stack `other` below `self`.
    pub fn vstack(&self, other: &Mat) -> Result<Mat> {
        if self.field != other.field {
            return Err(Error::FieldMismatch(
                self.field.to_string(),
                other.field.to_string(),
            ));
        }
        if self.cols != other.cols {
            return Err(Error::BadMatrix(format!(
                "cannot stack widths {} and {}",
                self.cols, other.cols
            )));
        }
        let mut entries = self.entries.clone();
        entries.extend(other.entries.iter().cloned());
        Ok(Mat {
            rows: self.rows + other.rows,
            cols: self.cols,
            field: self.field,
            entries,
        })
    }

    /// Place `other` to the right of `self`.
    pub fn hstack(&self, other: &Mat) -> Result<Mat> {
        if self.field != other.field {
            return Err(Error::FieldMismatch(
                self.field.to_string(),
                other.field.to_string(),
            ));
        }
        if self.rows != other.rows {
            return Err(Error::BadMatrix(format!(
                "cannot concatenate heights {} and {}",
                self.rows, other.rows
            )));
        }
        let mut entries = Vec::with_capacity((self.cols + other.cols) * self.rows);
        for r in 0..self.rows {
            entries.extend_from_slice(self.row(r));
            entries.extend_from_slice(other.row(r));
        }
        Ok(Mat {
            rows: self.rows,
            cols: self.cols + other.cols,
            field: self.field,
            entries,
        })
    }

    /// Keep only the listed columns, in the given order.
    pub fn select_cols(&self, cols: &[usize]) -> Mat {
        Mat::from_fn(self.field, self.rows, cols.len(), |r, j| {
            self.at(r, cols[j]).clone()
        })
    }
}

impl fmt::Display for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            write!(f, "[")?;
            for c in 0..self.cols {
                if c > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.at(r, c))?;
            }
            writeln!(f, "]")?;
        }
        Ok(())
    }
}

/// Result of Gauss-Jordan elimination: the unique reduced row-echelon
/// form, its pivot columns, and the rank.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rref {
    pub mat: Mat,
    pub pivots: Vec<usize>,
    pub rank: usize,
}

/// Reduced row-echelon form. Deterministic: pivots are chosen as the first
/// nonzero entry scanning down each column, so equal inputs give equal
/// outputs and row-permuted inputs give the same canonical form.
pub fn rref(m: &Mat) -> Rref {
    let (r, _) = rref_with_transform(m, false);
    r
}

/// As [`rref`], but also returns `u` with `u * input = rref`.
pub fn rref_tracked(m: &Mat) -> (Rref, Mat) {
    let (r, u) = rref_with_transform(m, true);
    (r, u.expect("transform requested"))
}

fn rref_with_transform(m: &Mat, track: bool) -> (Rref, Option<Mat>) {
    let mut a = m.clone();
    let mut u = if track {
        Some(Mat::identity(m.field(), m.rows()))
    } else {
        None
    };
    let mut pivots = Vec::new();
    let mut pivot_row = 0;
    for col in 0..a.cols() {
        if pivot_row >= a.rows() {
            break;
        }
        let found = (pivot_row..a.rows()).find(|&r| !a.at(r, col).is_zero());
        let src = match found {
            Some(r) => r,
            None => continue,
        };
        swap_rows(&mut a, pivot_row, src);
        if let Some(u) = u.as_mut() {
            swap_rows(u, pivot_row, src);
        }
        let inv = a.at(pivot_row, col).inverse().expect("pivot is nonzero");
        scale_row(&mut a, pivot_row, &inv);
        if let Some(u) = u.as_mut() {
            scale_row(u, pivot_row, &inv);
        }
        for r in 0..a.rows() {
            if r == pivot_row || a.at(r, col).is_zero() {
                continue;
            }
            let factor = a.at(r, col).clone();
            row_sub_scaled(&mut a, r, pivot_row, &factor);
            if let Some(u) = u.as_mut() {
                row_sub_scaled(u, r, pivot_row, &factor);
            }
        }
        pivots.push(col);
        pivot_row += 1;
    }
    let rank = pivots.len();
    (Rref { mat: a, pivots, rank }, u)
}

fn swap_rows(m: &mut Mat, a: usize, b: usize) {
    if a == b {
        return;
    }
    for c in 0..m.cols() {
        let va = m.at(a, c).clone();
        let vb = m.at(b, c).clone();
        m.set(a, c, vb);
        m.set(b, c, va);
    }
}

fn scale_row(m: &mut Mat, r: usize, by: &Scalar) {
    for c in 0..m.cols() {
        let v = m.at(r, c).clone() * by.clone();
        m.set(r, c, v);
    }
}

fn row_sub_scaled(m: &mut Mat, r: usize, pivot: usize, factor: &Scalar) {
    for c in 0..m.cols() {
        let v = m.at(r, c).clone() - factor.clone() * m.at(pivot, c).clone();
        m.set(r, c, v);
    }
}

/// Solve `x * m = target` for a row vector `x`, returning the canonical
/// solution (free coordinates zero in the tracked row basis) or `None`
/// when the system is inconsistent.
pub fn solve(m: &Mat, target: &[Scalar]) -> Option<Vec<Scalar>> {
    assert_eq!(target.len(), m.cols(), "target length must match map codomain");
    let field = m.field();
    let (r, u) = rref_tracked(m);
    let mut residue: Vec<Scalar> = target.to_vec();
    let mut coeffs = vec![field.zero(); m.rows()];
    for (i, &col) in r.pivots.iter().enumerate() {
        let c = residue[col].clone();
        if c.is_zero() {
            continue;
        }
        for j in 0..m.cols() {
            residue[j] = residue[j].clone() - c.clone() * r.mat.at(i, j).clone();
        }
        // x = sum of c_i * u_i reproduces the target through the original rows
        for j in 0..m.rows() {
            coeffs[j] = coeffs[j].clone() + c.clone() * u.at(i, j).clone();
        }
    }
    if residue.iter().all(Scalar::is_zero) {
        Some(coeffs)
    } else {
        None
    }
}
