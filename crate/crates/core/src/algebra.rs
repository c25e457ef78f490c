//! Quotients of path algebras with exact monomial normal forms.
//!
//! An algebra is presented by a quiver, a field, a list of relations, and
//! a mode. Graded mode computes one layer per degree up to a hard bound D
//! and refuses (TruncationExceeded) to answer questions beyond it. FinDim
//! mode forcibly kills all paths of length >= N, works in the resulting
//! finite-dimensional quotient, and reports the actual nilpotency index.
//!
//! Normal forms come from linear elimination: per degree (graded) or on
//! the whole truncated path space (findim), the relation ideal is spanned,
//! echelonized, and the non-pivot monomials form the basis. Pivot choice
//! follows the monomial order on paths, so bases are reproducible.

use crate::error::{Error, Result};
use crate::linalg::{Field, Mat, Scalar, Subspace};
use crate::quiver::{Path, Quiver};
use crate::verdict::{Verdict, Witness};

/// One term per parallel path; construction checks parallelism, so a
/// relation always lives between one source and one target vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relation {
    terms: Vec<(Scalar, Path)>,
}

impl Relation {
    pub fn new(terms: Vec<(Scalar, Path)>) -> Result<Relation> {
        let nonzero: Vec<(Scalar, Path)> =
            terms.into_iter().filter(|(c, _)| !c.is_zero()).collect();
        let (_, first) = nonzero
            .first()
            .ok_or_else(|| Error::BadRelation("relation has no nonzero terms".into()))?;
        let (src, tgt) = (first.source(), first.target());
        for (_, p) in &nonzero {
            if p.source() != src || p.target() != tgt {
                return Err(Error::BadRelation(
                    "relation terms must be parallel paths".into(),
                ));
            }
            if p.len() < 2 {
                return Err(Error::BadRelation(
                    "relation terms must have length at least 2".into(),
                ));
            }
        }
        Ok(Relation { terms: nonzero })
    }

    pub fn terms(&self) -> &[(Scalar, Path)] {
        &self.terms
    }

    fn is_homogeneous(&self) -> bool {
        let len = self.terms[0].1.len();
        self.terms.iter().all(|(_, p)| p.len() == len)
    }

    fn degree(&self) -> usize {
        self.terms[0].1.len()
    }

    pub fn display(&self, q: &Quiver) -> String {
        let mut out = String::new();
        for (i, (c, p)) in self.terms.iter().enumerate() {
            if i > 0 {
                out.push_str(" + ");
            }
            out.push_str(&format!("{}*{}", c, p.display(q)));
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlgebraMode {
    /// Hard degree wall D: layers 0..=D are computed, nothing beyond.
    Graded { degree_bound: usize },
    /// All paths of length >= N are quotiented away.
    FinDim { nilpotency_bound: usize },
}

impl AlgebraMode {
    pub fn is_graded(&self) -> bool {
        matches!(self, AlgebraMode::Graded { .. })
    }
}

#[derive(Clone, Debug)]
pub struct AlgebraSpec {
    quiver: Quiver,
    relations: Vec<Relation>,
    mode: AlgebraMode,
    field: Field,
}

impl AlgebraSpec {
    pub fn new(
        quiver: Quiver,
        relations: Vec<Relation>,
        mode: AlgebraMode,
        field: Field,
    ) -> Result<AlgebraSpec> {
        match mode {
            AlgebraMode::Graded { degree_bound } if degree_bound < 2 => {
                return Err(Error::BadRelation(format!(
                    "graded degree bound must be at least 2, got {degree_bound}"
                )));
            }
            AlgebraMode::FinDim { nilpotency_bound } if nilpotency_bound < 2 => {
                return Err(Error::BadRelation(format!(
                    "nilpotency bound must be at least 2, got {nilpotency_bound}"
                )));
            }
            _ => {}
        }
        for r in &relations {
            for (c, p) in r.terms() {
                if c.field() != field {
                    return Err(Error::FieldMismatch(
                        field.to_string(),
                        c.field().to_string(),
                    ));
                }
                validate_path(&quiver, p)?;
            }
            if mode.is_graded() && !r.is_homogeneous() {
                return Err(Error::BadRelation(
                    "graded mode requires homogeneous relations".into(),
                ));
            }
        }
        Ok(AlgebraSpec { quiver, relations, mode, field })
    }

    pub fn quiver(&self) -> &Quiver {
        &self.quiver
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn mode(&self) -> AlgebraMode {
        self.mode
    }

    pub fn field(&self) -> Field {
        self.field
    }
}

fn validate_path(q: &Quiver, p: &Path) -> Result<()> {
    if p.is_idempotent() {
        if p.source() >= q.vertex_count() {
            return Err(Error::BadRelation("path vertex out of range".into()));
        }
        return Ok(());
    }
    for &a in p.arrows() {
        if a >= q.arrow_count() {
            return Err(Error::BadRelation("path arrow out of range".into()));
        }
    }
    let rebuilt = Path::from_arrows(q, p.arrows().to_vec())?;
    if rebuilt != *p {
        return Err(Error::BadRelation("path endpoints are inconsistent".into()));
    }
    Ok(())
}

/// One graded layer: the raw length-d paths, the ideal's span inside
/// their coordinate space, and the surviving (non-pivot) monomials.
#[derive(Clone, Debug)]
struct Layer {
    paths: Vec<Path>,
    ideal: Subspace,
    basis: Vec<usize>,
}

impl Layer {
    fn dim(&self) -> usize {
        self.basis.len()
    }
}

#[derive(Clone, Debug)]
enum TableData {
    Graded {
        layers: Vec<Layer>,
        /// mult[d][a]: right multiplication by arrow a, basis coords of
        /// degree d to basis coords of degree d+1.
        mult: Vec<Vec<Mat>>,
    },
    FinDim {
        paths: Vec<Path>,
        ideal: Subspace,
        basis: Vec<usize>,
        /// mult[a]: right multiplication by arrow a on basis coords.
        mult: Vec<Mat>,
        /// radical_chain[s] = J^s in basis coords; last entry is zero.
        radical_chain: Vec<Subspace>,
        nilpotency: usize,
    },
}

/// The computed algebra: normal-form bases, reducers, multiplication.
/// Immutable after construction.
#[derive(Clone, Debug)]
pub struct AlgebraTable {
    spec: AlgebraSpec,
    data: TableData,
}

/// An element in basis coordinates: one graded layer, or the whole
/// algebra in findim mode.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Element {
    pub degree: Option<usize>,
    pub coords: Vec<Scalar>,
}

impl Element {
    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Scalar::is_zero)
    }
}

pub fn build_algebra(spec: AlgebraSpec) -> Result<AlgebraTable> {
    let data = match spec.mode() {
        AlgebraMode::Graded { degree_bound } => build_graded(&spec, degree_bound)?,
        AlgebraMode::FinDim { nilpotency_bound } => build_findim(&spec, nilpotency_bound)?,
    };
    Ok(AlgebraTable { spec, data })
}

fn build_graded(spec: &AlgebraSpec, d_max: usize) -> Result<TableData> {
    let q = spec.quiver();
    let field = spec.field();
    let mut layers: Vec<Layer> = Vec::with_capacity(d_max + 1);
    for d in 0..=d_max {
        let paths = q.paths_of_length(d);
        let ambient = paths.len();
        let ideal = if d < 2 {
            Subspace::zero(field, ambient)
        } else {
            // I_d = A_1*I_{d-1} + I_{d-1}*A_1 + (relations of degree d):
            // peeling one arrow off the padding of p*r*q shows these spans
            // exhaust the degree-d piece of the ideal.
            let prev = &layers[d - 1];
            let mut rows: Vec<Vec<Scalar>> = Vec::new();
            for w in prev.ideal.basis().row_vecs() {
                for a in 0..q.arrow_count() {
                    rows.push(shift_by_arrow(q, field, &prev.paths, &paths, w, a, Side::Left));
                    rows.push(shift_by_arrow(q, field, &prev.paths, &paths, w, a, Side::Right));
                }
            }
            for r in spec.relations() {
                if r.degree() == d {
                    rows.push(raw_vector(&paths, r.terms()));
                }
            }
            Subspace::from_rows(field, ambient, rows)?
        };
        let basis = non_pivot_indices(ambient, ideal.pivots());
        layers.push(Layer { paths, ideal, basis });
    }
    let mut mult = Vec::with_capacity(d_max);
    for d in 0..d_max {
        let mut per_arrow = Vec::with_capacity(q.arrow_count());
        for a in 0..q.arrow_count() {
            per_arrow.push(right_mult_matrix(q, field, &layers[d], &layers[d + 1], a));
        }
        mult.push(per_arrow);
    }
    Ok(TableData::Graded { layers, mult })
}

fn build_findim(spec: &AlgebraSpec, n_bound: usize) -> Result<TableData> {
    let q = spec.quiver();
    let field = spec.field();
    let mut paths: Vec<Path> = Vec::new();
    for d in 0..n_bound {
        paths.extend(q.paths_of_length(d));
    }
    let ambient = paths.len();

    // Seed with the truncated relations, then close under one-arrow
    // multiplication on both sides until the span stabilizes. Products
    // raise every term length by one, so paths reaching N fall away.
    let mut rows: Vec<Vec<Scalar>> = spec
        .relations()
        .iter()
        .map(|r| raw_vector(&paths, r.terms()))
        .collect();
    let mut ideal = Subspace::from_rows(field, ambient, rows)?;
    loop {
        rows = Vec::new();
        for w in ideal.basis().row_vecs() {
            for a in 0..q.arrow_count() {
                rows.push(shift_by_arrow(q, field, &paths, &paths, w, a, Side::Left));
                rows.push(shift_by_arrow(q, field, &paths, &paths, w, a, Side::Right));
            }
        }
        let grown = ideal.sum(&Subspace::from_rows(field, ambient, rows)?);
        if grown.dim() == ideal.dim() {
            break;
        }
        ideal = grown;
    }

    let basis = non_pivot_indices(ambient, ideal.pivots());
    // ideal support sits on length >= 2 monomials, so every short one survives
    debug_assert!(ideal.pivots().iter().all(|&p| paths[p].len() >= 2));

    // every declared relation must die under the reducer by construction
    for r in spec.relations() {
        let reduced = reduce_against(&ideal, &basis, &raw_vector(&paths, r.terms()));
        if reduced.iter().any(|c| !c.is_zero()) {
            return Err(Error::ValidationFail(format!(
                "relation {} does not vanish in the truncated quotient",
                r.display(q)
            )));
        }
    }

    let dim = basis.len();
    let mut mult = Vec::with_capacity(q.arrow_count());
    for a in 0..q.arrow_count() {
        let arrow_path = Path::from_arrows(q, vec![a]).expect("arrow index is valid");
        let mut m = Mat::zero(field, dim, dim);
        for (row_i, &mono) in basis.iter().enumerate() {
            if let Some(prod) = paths[mono].compose(&arrow_path) {
                if let Ok(idx) = paths.binary_search(&prod) {
                    let mut raw = vec![field.zero(); ambient];
                    raw[idx] = field.one();
                    let reduced = reduce_against(&ideal, &basis, &raw);
                    for (col, v) in reduced.into_iter().enumerate() {
                        m.set(row_i, col, v);
                    }
                }
                // compose landing at length >= N is zero in the quotient
            }
        }
        mult.push(m);
    }

    // J^s as the span of normal forms of paths of length in [s, N);
    // equivalently J^{s+1} = J^s * (arrow span), computed iteratively.
    let mut radical_chain = vec![Subspace::full(field, dim)];
    let j1_rows: Vec<Vec<Scalar>> = basis
        .iter()
        .enumerate()
        .filter(|&(_, &mono)| paths[mono].len() >= 1)
        .map(|(i, _)| unit_vector(field, dim, i))
        .collect();
    let mut current = Subspace::from_rows(field, dim, j1_rows)?;
    loop {
        let stop = current.is_zero();
        radical_chain.push(current.clone());
        if stop {
            break;
        }
        let mut next_rows = Vec::new();
        for w in current.basis().row_vecs() {
            for m in &mult {
                next_rows.push(m.apply_row(w)?);
            }
        }
        current = Subspace::from_rows(field, dim, next_rows)?;
    }
    let nilpotency = radical_chain.len() - 1;

    Ok(TableData::FinDim { paths, ideal, basis, mult, radical_chain, nilpotency })
}

enum Side {
    Left,
    Right,
}

/// Multiply a raw coordinate vector by one arrow: each monomial is
/// prepended or appended; non-composable or out-of-range products vanish.
fn shift_by_arrow(
    q: &Quiver,
    field: Field,
    from_paths: &[Path],
    to_paths: &[Path],
    w: &[Scalar],
    arrow: usize,
    side: Side,
) -> Vec<Scalar> {
    let arrow_path = Path::from_arrows(q, vec![arrow]).expect("arrow index is valid");
    let mut out = vec![field.zero(); to_paths.len()];
    for (i, c) in w.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let prod = match side {
            Side::Left => arrow_path.compose(&from_paths[i]),
            Side::Right => from_paths[i].compose(&arrow_path),
        };
        if let Some(p) = prod {
            if let Ok(idx) = to_paths.binary_search(&p) {
                out[idx] = out[idx].clone() + c.clone();
            }
        }
    }
    out
}

fn raw_vector(paths: &[Path], terms: &[(Scalar, Path)]) -> Vec<Scalar> {
    let field = terms[0].0.field();
    let mut out = vec![field.zero(); paths.len()];
    for (c, p) in terms {
        if let Ok(idx) = paths.binary_search(p) {
            out[idx] = out[idx].clone() + c.clone();
        }
        // terms beyond the truncation do not appear in `paths` and vanish
    }
    out
}

fn non_pivot_indices(ambient: usize, pivots: &[usize]) -> Vec<usize> {
    let mut is_pivot = vec![false; ambient];
    for &p in pivots {
        is_pivot[p] = true;
    }
    (0..ambient).filter(|&i| !is_pivot[i]).collect()
}

fn unit_vector(field: Field, len: usize, at: usize) -> Vec<Scalar> {
    let mut v = vec![field.zero(); len];
    v[at] = field.one();
    v
}

/// Subtract the ideal component, then read off basis coordinates.
fn reduce_against(ideal: &Subspace, basis: &[usize], raw: &[Scalar]) -> Vec<Scalar> {
    let residue = ideal.residue(raw);
    basis.iter().map(|&i| residue[i].clone()).collect()
}

fn right_mult_matrix(q: &Quiver, field: Field, from: &Layer, to: &Layer, arrow: usize) -> Mat {
    let arrow_path = Path::from_arrows(q, vec![arrow]).expect("arrow index is valid");
    let mut m = Mat::zero(field, from.dim(), to.dim());
    for (row_i, &mono) in from.basis.iter().enumerate() {
        if let Some(prod) = from.paths[mono].compose(&arrow_path) {
            if let Ok(idx) = to.paths.binary_search(&prod) {
                let raw = unit_vector(field, to.paths.len(), idx);
                let reduced = reduce_against(&to.ideal, &to.basis, &raw);
                for (col, v) in reduced.into_iter().enumerate() {
                    m.set(row_i, col, v);
                }
            }
        }
    }
    m
}

impl AlgebraTable {
    pub fn spec(&self) -> &AlgebraSpec {
        &self.spec
    }

    pub fn quiver(&self) -> &Quiver {
        self.spec.quiver()
    }

    pub fn field(&self) -> Field {
        self.spec.field()
    }

    pub fn mode(&self) -> AlgebraMode {
        self.spec.mode()
    }

    pub fn is_graded(&self) -> bool {
        self.spec.mode().is_graded()
    }

    /// Graded: D. FinDim: none.
    pub fn degree_bound(&self) -> Option<usize> {
        match self.spec.mode() {
            AlgebraMode::Graded { degree_bound } => Some(degree_bound),
            AlgebraMode::FinDim { .. } => None,
        }
    }

    /// dim A_d (graded). Degrees beyond the wall are refused.
    pub fn dim_at(&self, d: usize) -> Result<usize> {
        match &self.data {
            TableData::Graded { layers, .. } => layers
                .get(d)
                .map(Layer::dim)
                .ok_or(Error::TruncationExceeded {
                    needed: d,
                    bound: layers.len() - 1,
                }),
            TableData::FinDim { .. } => Err(Error::ModeMismatch {
                expected: "graded".into(),
                found: "findim".into(),
            }),
        }
    }

    /// Total dimension of the findim quotient.
    pub fn total_dim(&self) -> Result<usize> {
        match &self.data {
            TableData::FinDim { basis, .. } => Ok(basis.len()),
            TableData::Graded { .. } => Err(Error::ModeMismatch {
                expected: "findim".into(),
                found: "graded".into(),
            }),
        }
    }

    /// Basis monomials of one graded layer, in monomial order.
    pub fn basis_monomials(&self, d: usize) -> Result<Vec<&Path>> {
        match &self.data {
            TableData::Graded { layers, .. } => {
                let layer = layers.get(d).ok_or(Error::TruncationExceeded {
                    needed: d,
                    bound: layers.len() - 1,
                })?;
                Ok(layer.basis.iter().map(|&i| &layer.paths[i]).collect())
            }
            TableData::FinDim { .. } => Err(Error::ModeMismatch {
                expected: "graded".into(),
                found: "findim".into(),
            }),
        }
    }

    /// All basis monomials of the findim quotient, in monomial order.
    pub fn basis_monomials_total(&self) -> Result<Vec<&Path>> {
        match &self.data {
            TableData::FinDim { paths, basis, .. } => {
                Ok(basis.iter().map(|&i| &paths[i]).collect())
            }
            TableData::Graded { .. } => Err(Error::ModeMismatch {
                expected: "findim".into(),
                found: "graded".into(),
            }),
        }
    }

    /// Right multiplication by an arrow, degree d -> d+1 (graded).
    pub fn right_mult(&self, d: usize, arrow: usize) -> Result<&Mat> {
        match &self.data {
            TableData::Graded { mult, .. } => {
                mult.get(d)
                    .map(|per| &per[arrow])
                    .ok_or(Error::TruncationExceeded { needed: d + 1, bound: mult.len() })
            }
            TableData::FinDim { .. } => Err(Error::ModeMismatch {
                expected: "graded".into(),
                found: "findim".into(),
            }),
        }
    }

    /// Right multiplication by an arrow on the whole findim quotient.
    pub fn right_mult_total(&self, arrow: usize) -> Result<&Mat> {
        match &self.data {
            TableData::FinDim { mult, .. } => Ok(&mult[arrow]),
            TableData::Graded { .. } => Err(Error::ModeMismatch {
                expected: "findim".into(),
                found: "graded".into(),
            }),
        }
    }

    /// Reduce a raw degree-d path vector to basis coordinates.
    pub fn reduce_graded(&self, d: usize, raw: &[Scalar]) -> Result<Vec<Scalar>> {
        match &self.data {
            TableData::Graded { layers, .. } => {
                let layer = layers.get(d).ok_or(Error::TruncationExceeded {
                    needed: d,
                    bound: layers.len() - 1,
                })?;
                if raw.len() != layer.paths.len() {
                    return Err(Error::AmbientMismatch(layer.paths.len(), raw.len()));
                }
                Ok(reduce_against(&layer.ideal, &layer.basis, raw))
            }
            TableData::FinDim { .. } => Err(Error::ModeMismatch {
                expected: "graded".into(),
                found: "findim".into(),
            }),
        }
    }

    /// Reduce a raw truncated-path vector to basis coordinates.
    pub fn reduce_findim(&self, raw: &[Scalar]) -> Result<Vec<Scalar>> {
        match &self.data {
            TableData::FinDim { paths, ideal, basis, .. } => {
                if raw.len() != paths.len() {
                    return Err(Error::AmbientMismatch(paths.len(), raw.len()));
                }
                Ok(reduce_against(ideal, basis, raw))
            }
            TableData::Graded { .. } => Err(Error::ModeMismatch {
                expected: "findim".into(),
                found: "graded".into(),
            }),
        }
    }

    /// The normal form of a single path, as an element.
    pub fn path_element(&self, p: &Path) -> Result<Element> {
        validate_path(self.quiver(), p)?;
        match &self.data {
            TableData::Graded { layers, .. } => {
                let d = p.len();
                let layer = layers.get(d).ok_or(Error::TruncationExceeded {
                    needed: d,
                    bound: layers.len() - 1,
                })?;
                let raw = match layer.paths.binary_search(p) {
                    Ok(idx) => unit_vector(self.field(), layer.paths.len(), idx),
                    Err(_) => vec![self.field().zero(); layer.paths.len()],
                };
                Ok(Element { degree: Some(d), coords: self.reduce_graded(d, &raw)? })
            }
            TableData::FinDim { paths, .. } => {
                let raw = match paths.binary_search(p) {
                    Ok(idx) => unit_vector(self.field(), paths.len(), idx),
                    Err(_) => vec![self.field().zero(); paths.len()],
                };
                Ok(Element { degree: None, coords: self.reduce_findim(&raw)? })
            }
        }
    }

    pub fn idempotent_element(&self, v: usize) -> Result<Element> {
        self.path_element(&Path::idempotent(v))
    }

    /// Multiply two elements; graded degrees add and must stay within
    /// the wall, findim elements multiply in the quotient.
    pub fn multiply(&self, x: &Element, y: &Element) -> Result<Element> {
        match &self.data {
            TableData::Graded { layers, .. } => {
                let (i, j) = match (x.degree, y.degree) {
                    (Some(i), Some(j)) => (i, j),
                    _ => {
                        return Err(Error::ModeMismatch {
                            expected: "graded element".into(),
                            found: "ungraded element".into(),
                        })
                    }
                };
                let d = i + j;
                if d >= layers.len() {
                    return Err(Error::TruncationExceeded { needed: d, bound: layers.len() - 1 });
                }
                let (li, lj, ld) = (&layers[i], &layers[j], &layers[d]);
                let mut raw = vec![self.field().zero(); ld.paths.len()];
                for (xi, xc) in x.coords.iter().enumerate() {
                    if xc.is_zero() {
                        continue;
                    }
                    let px = &li.paths[li.basis[xi]];
                    for (yj, yc) in y.coords.iter().enumerate() {
                        if yc.is_zero() {
                            continue;
                        }
                        let py = &lj.paths[lj.basis[yj]];
                        if let Some(prod) = px.compose(py) {
                            if let Ok(idx) = ld.paths.binary_search(&prod) {
                                raw[idx] = raw[idx].clone() + xc.clone() * yc.clone();
                            }
                        }
                    }
                }
                Ok(Element { degree: Some(d), coords: self.reduce_graded(d, &raw)? })
            }
            TableData::FinDim { paths, basis, .. } => {
                let mut raw = vec![self.field().zero(); paths.len()];
                for (xi, xc) in x.coords.iter().enumerate() {
                    if xc.is_zero() {
                        continue;
                    }
                    let px = &paths[basis[xi]];
                    for (yj, yc) in y.coords.iter().enumerate() {
                        if yc.is_zero() {
                            continue;
                        }
                        let py = &paths[basis[yj]];
                        if let Some(prod) = px.compose(py) {
                            if let Ok(idx) = paths.binary_search(&prod) {
                                raw[idx] = raw[idx].clone() + xc.clone() * yc.clone();
                            }
                        }
                    }
                }
                Ok(Element { degree: None, coords: self.reduce_findim(&raw)? })
            }
        }
    }

    /// J^s in one graded degree: everything at d >= s, nothing below.
    pub fn radical_full_at(&self, s: usize, d: usize) -> bool {
        d >= s
    }

    /// J^s of the findim quotient, in basis coordinates.
    pub fn radical_subspace(&self, s: usize) -> Result<Subspace> {
        match &self.data {
            TableData::FinDim { radical_chain, basis, .. } => {
                Ok(if s < radical_chain.len() {
                    radical_chain[s].clone()
                } else {
                    Subspace::zero(self.field(), basis.len())
                })
            }
            TableData::Graded { .. } => Err(Error::ModeMismatch {
                expected: "findim".into(),
                found: "graded".into(),
            }),
        }
    }

    /// Smallest s with J^s = 0 in the findim quotient.
    pub fn nilpotency_index(&self) -> Result<usize> {
        match &self.data {
            TableData::FinDim { nilpotency, .. } => Ok(*nilpotency),
            TableData::Graded { .. } => Err(Error::ModeMismatch {
                expected: "findim".into(),
                found: "graded".into(),
            }),
        }
    }

    /// Check A_1 * A_d spans A_{d+1} for every degree inside the wall.
    pub fn validate_standard_graded(&self) -> Result<Verdict> {
        let layers = match &self.data {
            TableData::Graded { layers, .. } => layers,
            TableData::FinDim { .. } => {
                return Err(Error::ModeMismatch {
                    expected: "graded".into(),
                    found: "findim".into(),
                })
            }
        };
        let q = self.quiver();
        for d in 0..layers.len() - 1 {
            let to = &layers[d + 1];
            let mut rows = Vec::new();
            for &mono in &layers[d].basis {
                for a in 0..q.arrow_count() {
                    let raw = unit_vector(self.field(), layers[d].paths.len(), mono);
                    rows.push(shift_by_arrow(
                        q,
                        self.field(),
                        &layers[d].paths,
                        &to.paths,
                        &raw,
                        a,
                        Side::Right,
                    ));
                }
            }
            let reduced: Vec<Vec<Scalar>> = rows
                .iter()
                .map(|w| reduce_against(&to.ideal, &to.basis, w))
                .collect();
            let image = Subspace::from_rows(self.field(), to.dim(), reduced)?;
            if image.dim() != to.dim() {
                return Ok(Verdict::Fails(Witness {
                    level: d + 1,
                    detail: format!(
                        "degree-1 times degree-{d} spans only {} of the {}-dimensional layer",
                        image.dim(),
                        to.dim()
                    ),
                }));
            }
        }
        Ok(Verdict::CertifiedUpTo(layers.len() - 1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn loop_quiver() -> Quiver {
        Quiver::new(
            vec!["v".into()],
            vec![("x".into(), "v".into(), "v".into())],
        )
        .unwrap()
    }

    fn x_power(q: &Quiver, n: usize) -> Path {
        Path::from_arrows(q, vec![0; n]).unwrap()
    }

    fn poly_algebra(field: Field, d: usize) -> AlgebraTable {
        let q = loop_quiver();
        let spec = AlgebraSpec::new(q, vec![], AlgebraMode::Graded { degree_bound: d }, field)
            .unwrap();
        build_algebra(spec).unwrap()
    }

    fn truncated_poly(field: Field, power: usize, n: usize) -> AlgebraTable {
        let q = loop_quiver();
        let rel = Relation::new(vec![(field.one(), x_power(&q, power))]).unwrap();
        let spec = AlgebraSpec::new(
            q,
            vec![rel],
            AlgebraMode::FinDim { nilpotency_bound: n },
            field,
        )
        .unwrap();
        build_algebra(spec).unwrap()
    }

    #[test]
    fn polynomial_algebra_dims() {
        let a = poly_algebra(Field::Rationals, 4);
        for d in 0..=4 {
            assert_eq!(a.dim_at(d).unwrap(), 1);
        }
        assert!(matches!(
            a.dim_at(5),
            Err(Error::TruncationExceeded { needed: 5, bound: 4 })
        ));
    }

    #[test]
    fn graded_truncated_poly_dims() {
        // relation x^2 in graded mode: one basis monomial below degree 2
        let q = loop_quiver();
        let f = Field::Rationals;
        let rel = Relation::new(vec![(f.one(), x_power(&q, 2))]).unwrap();
        let spec =
            AlgebraSpec::new(q, vec![rel], AlgebraMode::Graded { degree_bound: 4 }, f).unwrap();
        let a = build_algebra(spec).unwrap();
        assert_eq!(a.dim_at(0).unwrap(), 1);
        assert_eq!(a.dim_at(1).unwrap(), 1);
        for d in 2..=4 {
            assert_eq!(a.dim_at(d).unwrap(), 0);
        }
    }

    #[test]
    fn findim_dual_numbers() {
        let a = truncated_poly(Field::Rationals, 2, 2);
        assert_eq!(a.total_dim().unwrap(), 2);
        let basis = a.basis_monomials_total().unwrap();
        assert_eq!(basis.len(), 2);
        assert!(basis[0].is_idempotent());
        assert_eq!(basis[1].len(), 1);
        // x * x reduces to zero
        let x = a.path_element(&x_power(a.quiver(), 1)).unwrap();
        assert!(a.multiply(&x, &x).unwrap().is_zero());
    }

    #[test]
    fn one_arrow_two_vertices() {
        let q = Quiver::new(
            vec!["v1".into(), "v2".into()],
            vec![("a".into(), "v1".into(), "v2".into())],
        )
        .unwrap();
        let spec = AlgebraSpec::new(
            q,
            vec![],
            AlgebraMode::Graded { degree_bound: 3 },
            Field::Rationals,
        )
        .unwrap();
        let a = build_algebra(spec).unwrap();
        assert_eq!(a.dim_at(0).unwrap(), 2);
        assert_eq!(a.dim_at(1).unwrap(), 1);
        assert_eq!(a.dim_at(2).unwrap(), 0);
    }

    #[test]
    fn idempotent_products() {
        let q = Quiver::new(
            vec!["v1".into(), "v2".into()],
            vec![("a".into(), "v1".into(), "v2".into())],
        )
        .unwrap();
        let spec = AlgebraSpec::new(
            q,
            vec![],
            AlgebraMode::Graded { degree_bound: 2 },
            Field::Rationals,
        )
        .unwrap();
        let a = build_algebra(spec).unwrap();
        let e1 = a.idempotent_element(0).unwrap();
        let e2 = a.idempotent_element(1).unwrap();
        assert_eq!(a.multiply(&e1, &e1).unwrap(), e1);
        assert!(a.multiply(&e1, &e2).unwrap().is_zero());
    }

    #[test]
    fn free_monomials_multiply() {
        let a = poly_algebra(Field::Rationals, 5);
        let q = a.quiver().clone();
        let x2 = a.path_element(&x_power(&q, 2)).unwrap();
        let x1 = a.path_element(&x_power(&q, 1)).unwrap();
        let x3 = a.multiply(&x2, &x1).unwrap();
        assert_eq!(x3, a.path_element(&x_power(&q, 3)).unwrap());
    }

    #[test]
    fn findim_radical_chain() {
        let a = truncated_poly(Field::Rationals, 3, 3);
        assert_eq!(a.total_dim().unwrap(), 3);
        assert_eq!(a.radical_subspace(0).unwrap().dim(), 3);
        assert_eq!(a.radical_subspace(1).unwrap().dim(), 2);
        assert_eq!(a.radical_subspace(2).unwrap().dim(), 1);
        assert!(a.radical_subspace(3).unwrap().is_zero());
        assert_eq!(a.nilpotency_index().unwrap(), 3);
    }

    #[test]
    fn nilpotency_report_can_beat_declared_bound() {
        // mixed-length relation x^2 - x^3 collapses everything above x
        let q = loop_quiver();
        let f = Field::Rationals;
        let rel = Relation::new(vec![
            (f.one(), x_power(&q, 2)),
            (-f.one(), x_power(&q, 3)),
        ])
        .unwrap();
        let spec =
            AlgebraSpec::new(q, vec![rel], AlgebraMode::FinDim { nilpotency_bound: 5 }, f)
                .unwrap();
        let a = build_algebra(spec).unwrap();
        assert_eq!(a.total_dim().unwrap(), 2);
        assert_eq!(a.nilpotency_index().unwrap(), 2);
    }

    #[test]
    fn exterior_style_algebra() {
        let q = Quiver::new(
            vec!["v".into()],
            vec![
                ("x".into(), "v".into(), "v".into()),
                ("y".into(), "v".into(), "v".into()),
            ],
        )
        .unwrap();
        let f = Field::Rationals;
        let p = |arrows: Vec<usize>| Path::from_arrows(&q, arrows).unwrap();
        let rels = vec![
            Relation::new(vec![(f.one(), p(vec![0, 0]))]).unwrap(),
            Relation::new(vec![(f.one(), p(vec![1, 1]))]).unwrap(),
            Relation::new(vec![(f.one(), p(vec![0, 1])), (f.one(), p(vec![1, 0]))]).unwrap(),
        ];
        let spec =
            AlgebraSpec::new(q.clone(), rels, AlgebraMode::FinDim { nilpotency_bound: 3 }, f)
                .unwrap();
        let a = build_algebra(spec).unwrap();
        assert_eq!(a.total_dim().unwrap(), 4);
        // x*y = -y*x in the quotient; the surviving length-2 monomial is y.x
        let x = a.path_element(&p(vec![0])).unwrap();
        let y = a.path_element(&p(vec![1])).unwrap();
        let xy = a.multiply(&x, &y).unwrap();
        let yx = a.multiply(&y, &x).unwrap();
        assert!(!xy.is_zero());
        let mut neg = xy.clone();
        for c in &mut neg.coords {
            *c = -c.clone();
        }
        assert_eq!(neg, yx);
        assert_eq!(a.nilpotency_index().unwrap(), 3);
    }

    #[test]
    fn standard_graded_validation() {
        let a = poly_algebra(Field::Rationals, 4);
        assert_eq!(a.validate_standard_graded().unwrap(), Verdict::CertifiedUpTo(4));

        // two loops with all but y*y killed in degree 2
        let q = Quiver::new(
            vec!["v".into()],
            vec![
                ("x".into(), "v".into(), "v".into()),
                ("y".into(), "v".into(), "v".into()),
            ],
        )
        .unwrap();
        let f = Field::Rationals;
        let p = |arrows: Vec<usize>| Path::from_arrows(&q, arrows).unwrap();
        let rels = vec![
            Relation::new(vec![(f.one(), p(vec![0, 0]))]).unwrap(),
            Relation::new(vec![(f.one(), p(vec![0, 1]))]).unwrap(),
            Relation::new(vec![(f.one(), p(vec![1, 0]))]).unwrap(),
        ];
        let spec =
            AlgebraSpec::new(q, rels, AlgebraMode::Graded { degree_bound: 3 }, f).unwrap();
        let a = build_algebra(spec).unwrap();
        assert_eq!(a.dim_at(2).unwrap(), 1);
        assert_eq!(a.validate_standard_graded().unwrap(), Verdict::CertifiedUpTo(3));
    }

    #[test]
    fn associativity_spot_check() {
        let a = truncated_poly(Field::prime(7).unwrap(), 4, 4);
        let q = a.quiver().clone();
        let x = a.path_element(&x_power(&q, 1)).unwrap();
        let x2 = a.path_element(&x_power(&q, 2)).unwrap();
        let left = a.multiply(&a.multiply(&x, &x2).unwrap(), &x).unwrap();
        let right = a.multiply(&x, &a.multiply(&x2, &x).unwrap()).unwrap();
        assert_eq!(left, right);
    }

    #[test]
    fn relation_validation() {
        let q = loop_quiver();
        let f = Field::Rationals;
        assert!(Relation::new(vec![]).is_err());
        assert!(Relation::new(vec![(f.zero(), x_power(&q, 2))]).is_err());
        assert!(Relation::new(vec![(f.one(), x_power(&q, 1))]).is_err());
        // inhomogeneous relations are findim-only
        let mixed = Relation::new(vec![
            (f.one(), x_power(&q, 2)),
            (f.one(), x_power(&q, 3)),
        ])
        .unwrap();
        assert!(AlgebraSpec::new(
            q,
            vec![mixed],
            AlgebraMode::Graded { degree_bound: 4 },
            f
        )
        .is_err());
    }
}
