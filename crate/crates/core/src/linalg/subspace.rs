//! Subspaces of k^n with canonical reduced row-echelon bases.

use crate::error::{Error, Result};
use crate::linalg::mat::{rref, Mat};
use crate::linalg::{Field, Scalar};

/// A subspace of the row space k^ambient, stored as the unique reduced
/// row-echelon basis. Two subspaces are equal iff their canonical bases
/// are equal entrywise, so `==` decides subspace equality.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Subspace {
    field: Field,
    ambient: usize,
    basis: Mat,
    pivots: Vec<usize>,
}

impl Subspace {
    pub fn zero(field: Field, ambient: usize) -> Subspace {
        Subspace {
            field,
            ambient,
            basis: Mat::zero(field, 0, ambient),
            pivots: Vec::new(),
        }
    }

    pub fn full(field: Field, ambient: usize) -> Subspace {
        Subspace {
            field,
            ambient,
            basis: Mat::identity(field, ambient),
            pivots: (0..ambient).collect(),
        }
    }

    /// Span of the rows of `m`, canonicalized.
    pub fn from_spanning(m: &Mat) -> Subspace {
        let r = rref(m);
        let basis = Mat::from_fn(m.field(), r.rank, m.cols(), |i, j| {
            r.mat.at(i, j).clone()
        });
        Subspace {
            field: m.field(),
            ambient: m.cols(),
            basis,
            pivots: r.pivots,
        }
    }

    pub fn from_rows(field: Field, ambient: usize, rows: Vec<Vec<Scalar>>) -> Result<Subspace> {
        for row in &rows {
            if row.len() != ambient {
                return Err(Error::AmbientMismatch(ambient, row.len()));
            }
        }
        if rows.is_empty() {
            return Ok(Subspace::zero(field, ambient));
        }
        Ok(Subspace::from_spanning(&Mat::from_rows(field, rows)?))
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    pub fn is_full(&self) -> bool {
        self.dim() == self.ambient
    }

    /// Canonical basis, one vector per row.
    pub fn basis(&self) -> &Mat {
        &self.basis
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Reduce `v` against the basis; the residue is zero iff `v` lies in
    /// the subspace, and the recorded coefficients express `v` in the
    /// canonical basis.
    fn reduce(&self, v: &[Scalar]) -> (Vec<Scalar>, Vec<Scalar>) {
        assert_eq!(v.len(), self.ambient, "vector must live in the ambient space");
        let mut residue = v.to_vec();
        let mut coeffs = vec![self.field.zero(); self.dim()];
        for (i, &col) in self.pivots.iter().enumerate() {
            let c = residue[col].clone();
            if c.is_zero() {
                continue;
            }
            for j in 0..self.ambient {
                residue[j] = residue[j].clone() - c.clone() * self.basis.at(i, j).clone();
            }
            coeffs[i] = c;
        }
        (coeffs, residue)
    }

    pub fn contains(&self, v: &[Scalar]) -> bool {
        let (_, residue) = self.reduce(v);
        residue.iter().all(Scalar::is_zero)
    }

    /// The part of `v` left after eliminating the pivot coordinates;
    /// zero iff `v` lies in the subspace. Used as the normal-form map
    /// modulo this subspace.
    pub fn residue(&self, v: &[Scalar]) -> Vec<Scalar> {
        self.reduce(v).1
    }

    /// Coefficients of `v` in the canonical basis, if `v` lies here.
    pub fn coordinates(&self, v: &[Scalar]) -> Option<Vec<Scalar>> {
        let (coeffs, residue) = self.reduce(v);
        if residue.iter().all(Scalar::is_zero) {
            Some(coeffs)
        } else {
            None
        }
    }

    pub fn leq(&self, other: &Subspace) -> bool {
        assert_eq!(self.ambient, other.ambient, "subspaces must share the ambient space");
        self.basis.row_vecs().all(|row| other.contains(row))
    }

    pub fn sum(&self, other: &Subspace) -> Subspace {
        assert_eq!(self.ambient, other.ambient, "subspaces must share the ambient space");
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let stacked = self.basis.vstack(&other.basis).expect("same ambient");
        Subspace::from_spanning(&stacked)
    }

    /// Intersection via the kernel of the stacked basis: a pair (a, b)
    /// with a*U + b*W = 0 yields the intersection element a*U.
    pub fn intersect(&self, other: &Subspace) -> Subspace {
        assert_eq!(self.ambient, other.ambient, "subspaces must share the ambient space");
        if self.is_zero() || other.is_zero() {
            return Subspace::zero(self.field, self.ambient);
        }
        let stacked = self.basis.vstack(&other.basis).expect("same ambient");
        let pairs = kernel_basis(&stacked.transpose());
        let mut rows = Vec::with_capacity(pairs.dim());
        for pair in pairs.basis().row_vecs() {
            let a = &pair[..self.dim()];
            rows.push(self.basis.apply_row(a).expect("length matches basis rows"));
        }
        Subspace::from_rows(self.field, self.ambient, rows).expect("ambient widths agree")
    }

    /// Standard basis vectors at the non-pivot columns. Together with the
    /// basis they span the ambient space, giving a deterministic
    /// complement made of coordinate vectors.
    pub fn complement_vectors(&self) -> Vec<Vec<Scalar>> {
        let mut out = Vec::new();
        let mut next_pivot = self.pivots.iter().peekable();
        for col in 0..self.ambient {
            if next_pivot.peek() == Some(&&col) {
                next_pivot.next();
                continue;
            }
            let mut e = vec![self.field.zero(); self.ambient];
            e[col] = self.field.one();
            out.push(e);
        }
        out
    }
}

/// The classical null space {x : x * m^T = 0}, i.e. solutions of
/// m x^T = 0, with the canonical basis read off the reduced echelon form.
pub fn kernel_basis(m: &Mat) -> Subspace {
    let field = m.field();
    let n = m.cols();
    let r = rref(m);
    let mut is_pivot = vec![false; n];
    for &p in &r.pivots {
        is_pivot[p] = true;
    }
    let mut rows = Vec::with_capacity(n - r.rank);
    for free in 0..n {
        if is_pivot[free] {
            continue;
        }
        let mut v = vec![field.zero(); n];
        v[free] = field.one();
        for (i, &p) in r.pivots.iter().enumerate() {
            v[p] = -r.mat.at(i, free).clone();
        }
        rows.push(v);
    }
    Subspace::from_rows(field, n, rows).expect("kernel vectors live in k^cols")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q() -> Field {
        Field::Rationals
    }

    fn qv(ns: &[i64]) -> Vec<Scalar> {
        ns.iter().map(|&n| q().from_i64(n)).collect()
    }

    #[test]
    fn kernel_extremes() {
        let z = Mat::zero(q(), 2, 3);
        let k = kernel_basis(&z);
        assert_eq!(k.dim(), 3);
        assert!(k.is_full());
        assert!(kernel_basis(&Mat::identity(q(), 4)).is_zero());
    }

    #[test]
    fn kernel_of_sum_functional() {
        // [[1,1]] has null space spanned by (1,-1)
        let m = Mat::from_i64(q(), &[&[1, 1]]);
        let k = kernel_basis(&m);
        assert_eq!(k.dim(), 1);
        assert_eq!(k.basis().row(0), &qv(&[1, -1])[..]);
    }

    #[test]
    fn kernel_dim_is_cols_minus_rank() {
        let m = Mat::from_i64(q(), &[&[1, 2, 3], &[2, 4, 6], &[0, 0, 1]]);
        let k = kernel_basis(&m);
        assert_eq!(k.dim(), 3 - rref(&m).rank);
        for v in k.basis().row_vecs() {
            // check m * v^T = 0 directly
            for r in 0..m.rows() {
                let mut acc = q().zero();
                for c in 0..m.cols() {
                    acc = acc + m.at(r, c).clone() * v[c].clone();
                }
                assert!(acc.is_zero());
            }
        }
    }

    #[test]
    fn intersection_cases() {
        let full = Subspace::full(q(), 3);
        let b = Subspace::from_rows(q(), 3, vec![qv(&[1, 0, 2])]).unwrap();
        assert_eq!(full.intersect(&b), b);

        let e1 = Subspace::from_rows(q(), 2, vec![qv(&[1, 0])]).unwrap();
        let e2 = Subspace::from_rows(q(), 2, vec![qv(&[0, 1])]).unwrap();
        assert!(e1.intersect(&e2).is_zero());

        let u = Subspace::from_rows(q(), 3, vec![qv(&[1, 1, 0]), qv(&[0, 0, 1])]).unwrap();
        let w = Subspace::from_rows(q(), 3, vec![qv(&[0, 1, 0]), qv(&[0, 0, 1])]).unwrap();
        let expected = Subspace::from_rows(q(), 3, vec![qv(&[0, 0, 1])]).unwrap();
        assert_eq!(u.intersect(&w), expected);
    }

    #[test]
    fn containment_and_sum() {
        let u = Subspace::from_rows(q(), 3, vec![qv(&[1, 0, 0])]).unwrap();
        let w = Subspace::from_rows(q(), 3, vec![qv(&[1, 0, 0]), qv(&[0, 1, 0])]).unwrap();
        assert!(u.leq(&w));
        assert!(!w.leq(&u));
        assert_eq!(u.sum(&w), w);
        assert!(u.contains(&qv(&[5, 0, 0])));
        assert!(!u.contains(&qv(&[5, 1, 0])));
    }

    #[test]
    fn canonical_basis_is_order_independent() {
        let a = Subspace::from_rows(q(), 3, vec![qv(&[1, 2, 3]), qv(&[0, 1, 1])]).unwrap();
        let b = Subspace::from_rows(q(), 3, vec![qv(&[0, 1, 1]), qv(&[1, 2, 3])]).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn complement_fills_ambient() {
        let u = Subspace::from_rows(q(), 4, vec![qv(&[1, 0, 2, 0]), qv(&[0, 1, 1, 0])]).unwrap();
        let comp = u.complement_vectors();
        assert_eq!(comp.len(), 2);
        let mut rows: Vec<Vec<Scalar>> = u.basis().row_vecs().map(<[Scalar]>::to_vec).collect();
        rows.extend(comp);
        let all = Subspace::from_rows(q(), 4, rows).unwrap();
        assert!(all.is_full());
    }

    #[test]
    fn coordinates_round_trip() {
        let u = Subspace::from_rows(q(), 3, vec![qv(&[1, 0, 1]), qv(&[0, 1, 2])]).unwrap();
        let v = qv(&[3, -2, -1]);
        let coeffs = u.coordinates(&v).unwrap();
        let rebuilt = u.basis().apply_row(&coeffs).unwrap();
        assert_eq!(rebuilt, v);
        assert!(u.coordinates(&qv(&[0, 0, 1])).is_none());
    }
}
