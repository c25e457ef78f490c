//! Finitely generated modules as quiver representations.
//!
//! A module stores one vector space per slot. Graded slots are (degree,
//! vertex) pairs with degrees 0..=validity and arrows acting degree d to
//! d+1; findim modules keep a single layer per vertex with arrows acting
//! inside it. Construction validates that every algebra relation (and, in
//! findim mode, every path at the nilpotency bound) acts as zero.
//!
//! Subobjects travel as per-slot [`Subspace`] families and are promoted
//! to standalone modules with canonical coordinates immediately, so
//! subobject equality stays syntactic.

use std::sync::Arc;

use crate::algebra::{AlgebraMode, AlgebraTable};
use crate::error::{Error, Result};
use crate::linalg::{kernel_basis, Field, Mat, Scalar, Subspace};
use crate::quiver::Path;
use crate::verdict::{Verdict, Witness};

/// Multiset of projective summands: (vertex, generator degree). FinDim
/// summands always carry degree 0.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProjectiveShape {
    summands: Vec<(usize, usize)>,
}

impl ProjectiveShape {
    pub fn new(mut summands: Vec<(usize, usize)>) -> ProjectiveShape {
        summands.sort_unstable();
        ProjectiveShape { summands }
    }

    pub fn empty() -> ProjectiveShape {
        ProjectiveShape { summands: Vec::new() }
    }

    pub fn summands(&self) -> &[(usize, usize)] {
        &self.summands
    }

    pub fn len(&self) -> usize {
        self.summands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.summands.is_empty()
    }

    /// Multiset union, the shape of a direct sum.
    pub fn union(&self, other: &ProjectiveShape) -> ProjectiveShape {
        let mut all = self.summands.clone();
        all.extend_from_slice(&other.summands);
        ProjectiveShape::new(all)
    }

    pub fn display(&self, table: &AlgebraTable) -> String {
        if self.summands.is_empty() {
            return "0".into();
        }
        let names: Vec<String> = self
            .summands
            .iter()
            .map(|&(v, s)| format!("({},{})", table.quiver().vertex_name(v), s))
            .collect();
        format!("{{{}}}", names.join(", "))
    }
}

/// Multiset equality of summands; the only isomorphism test offered for
/// projectives.
pub fn shapes_equal(a: &ProjectiveShape, b: &ProjectiveShape) -> bool {
    a.summands == b.summands
}

/// Same algebra (pointer identity), same dimension vectors, same action
/// matrices. Stricter than isomorphism: equality as representations.
pub fn same_representation(a: &Module, b: &Module) -> bool {
    Arc::ptr_eq(&a.algebra, &b.algebra) && a.dims == b.dims && a.action == b.action
}

/// Provenance of a projective module's coordinates: which summand and
/// which algebra monomial each slot basis vector came from, plus the
/// position of each summand's generator.
#[derive(Clone, Debug)]
struct ProjectiveData {
    shape: ProjectiveShape,
    /// summand order matches `shape.summands`
    /// generator i sits at slot (deg, vertex) index `position`
    generators: Vec<GeneratorPos>,
    /// slot_paths[d][v][i] = (summand, monomial path) for basis vector i
    slot_paths: Vec<Vec<Vec<(usize, Path)>>>,
}

#[derive(Clone, Copy, Debug)]
struct GeneratorPos {
    deg: usize,
    vertex: usize,
}

#[derive(Clone, Debug)]
pub struct Module {
    algebra: Arc<AlgebraTable>,
    /// dims[d][v]; findim modules have a single degree row
    dims: Vec<Vec<usize>>,
    /// action[d][a]: slot (d, src) -> (next_deg(d), tgt)
    action: Vec<Vec<Mat>>,
    projective: Option<ProjectiveData>,
}

impl Module {
    /// Validating constructor for externally supplied data.
    pub fn new(algebra: Arc<AlgebraTable>, dims: Vec<Vec<usize>>, action: Vec<Vec<Mat>>) -> Result<Module> {
        let m = Module::assemble(algebra, dims, action)?;
        if let Verdict::Fails(w) = m.validate() {
            return Err(Error::ValidationFail(w.to_string()));
        }
        Ok(m)
    }

    /// Shape checks only; used internally where annihilation holds by
    /// construction (restrictions and quotients of validated modules).
    fn assemble(algebra: Arc<AlgebraTable>, dims: Vec<Vec<usize>>, action: Vec<Vec<Mat>>) -> Result<Module> {
        let q = algebra.quiver();
        let graded = algebra.is_graded();
        if dims.is_empty() {
            return Err(Error::BadModule("a module needs at least one degree row".into()));
        }
        if !graded && dims.len() != 1 {
            return Err(Error::BadModule("findim modules have a single layer".into()));
        }
        for row in &dims {
            if row.len() != q.vertex_count() {
                return Err(Error::BadModule(format!(
                    "dimension row has {} entries for {} vertices",
                    row.len(),
                    q.vertex_count()
                )));
            }
        }
        let expected_layers = if graded { dims.len() - 1 } else { 1 };
        if action.len() != expected_layers {
            return Err(Error::BadModule(format!(
                "expected {} action layers, got {}",
                expected_layers,
                action.len()
            )));
        }
        for (d, layer) in action.iter().enumerate() {
            if layer.len() != q.arrow_count() {
                return Err(Error::BadModule(format!(
                    "action layer {d} covers {} of {} arrows",
                    layer.len(),
                    q.arrow_count()
                )));
            }
            for (a, mat) in layer.iter().enumerate() {
                let arrow = q.arrow(a);
                let to_deg = if graded { d + 1 } else { 0 };
                let want_rows = dims[d][arrow.source];
                let want_cols = dims[to_deg][arrow.target];
                if mat.rows() != want_rows || mat.cols() != want_cols {
                    return Err(Error::BadModule(format!(
                        "action of `{}` at degree {d} is {}x{}, expected {}x{}",
                        arrow.name,
                        mat.rows(),
                        mat.cols(),
                        want_rows,
                        want_cols
                    )));
                }
                if mat.field() != algebra.field() {
                    return Err(Error::FieldMismatch(
                        algebra.field().to_string(),
                        mat.field().to_string(),
                    ));
                }
            }
        }
        Ok(Module { algebra, dims, action, projective: None })
    }

    fn assemble_internal(algebra: Arc<AlgebraTable>, dims: Vec<Vec<usize>>, action: Vec<Vec<Mat>>) -> Module {
        let m = Module::assemble(algebra, dims, action).expect("internal module data is well-shaped");
        debug_assert!(m.validate().is_certified(), "internal module violates a relation");
        m
    }

    pub fn algebra(&self) -> &Arc<AlgebraTable> {
        &self.algebra
    }

    pub fn field(&self) -> Field {
        self.algebra.field()
    }

    pub fn is_graded(&self) -> bool {
        self.algebra.is_graded()
    }

    /// Max trusted degree (graded); findim modules report 0.
    pub fn validity(&self) -> usize {
        self.dims.len() - 1
    }

    pub fn dim(&self, deg: usize, vertex: usize) -> usize {
        self.dims.get(deg).map_or(0, |row| row[vertex])
    }

    pub fn dims(&self) -> &[Vec<usize>] {
        &self.dims
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().flatten().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.total_dim() == 0
    }

    /// Degree an arrow maps into from degree d.
    fn next_deg(&self, d: usize) -> usize {
        if self.is_graded() {
            d + 1
        } else {
            0
        }
    }

    /// Degrees that carry action matrices out of them.
    fn action_degrees(&self) -> std::ops::Range<usize> {
        0..self.action.len()
    }

    pub fn act(&self, deg: usize, arrow: usize) -> &Mat {
        &self.action[deg][arrow]
    }

    fn act_checked(&self, deg: usize, arrow: usize) -> Result<&Mat> {
        self.action
            .get(deg)
            .map(|layer| &layer[arrow])
            .ok_or(Error::TruncationExceeded { needed: deg + 1, bound: self.validity() })
    }

    /// Shape of the module if it was built as an explicit projective.
    pub fn projective_shape(&self) -> Option<&ProjectiveShape> {
        self.projective.as_ref().map(|p| &p.shape)
    }

    /// Where each summand generator of an explicit projective sits: one
    /// (degree, vertex, index within the slot) triple per summand, in
    /// shape order. None when the module has no monomial coordinates.
    pub fn generator_positions(&self) -> Option<Vec<(usize, usize, usize)>> {
        let data = self.projective.as_ref()?;
        if data.slot_paths.len() != self.dims.len() {
            return None;
        }
        data.generators
            .iter()
            .enumerate()
            .map(|(summand, g)| {
                data.slot_paths[g.deg][g.vertex]
                    .iter()
                    .position(|(s, p)| *s == summand && p.len() == 0)
                    .map(|i| (g.deg, g.vertex, i))
            })
            .collect()
    }

    /// Labels for an explicit projective's slot basis: summand index and
    /// monomial. None when the module has no monomial coordinates.
    pub fn slot_labels(&self, deg: usize, vertex: usize) -> Option<Vec<String>> {
        let data = self.projective.as_ref()?;
        if data.slot_paths.len() != self.dims.len() {
            return None;
        }
        let q = self.algebra.quiver();
        let many = data.shape.len() > 1;
        Some(
            data.slot_paths[deg][vertex]
                .iter()
                .map(|(s, p)| {
                    if many {
                        format!("g{s}*{}", p.display(q))
                    } else {
                        p.display(q)
                    }
                })
                .collect(),
        )
    }

    /// Apply the action of a whole path to a row vector sitting at
    /// (deg, vertex). Graded actions walk up one degree per arrow.
    pub fn act_on_row(
        &self,
        deg: usize,
        vertex: usize,
        row: &[Scalar],
        path: &Path,
    ) -> Result<(usize, usize, Vec<Scalar>)> {
        if path.source() != vertex {
            return Err(Error::BadVector(format!(
                "path starts at vertex {} but the row sits at {}",
                path.source(),
                vertex
            )));
        }
        let mut d = deg;
        let mut v = vertex;
        let mut current = row.to_vec();
        for &a in path.arrows() {
            let m = self.act_checked(d, a)?;
            current = m.apply_row(&current)?;
            d = self.next_deg(d);
            v = self.algebra.quiver().arrow(a).target;
        }
        Ok((d, v, current))
    }

    /// Matrix of the action of a path out of degree `deg`.
    fn path_action_matrix(&self, deg: usize, path: &Path) -> Result<Mat> {
        let mut m = Mat::identity(self.field(), self.dim(deg, path.source()));
        let mut d = deg;
        for &a in path.arrows() {
            m = m.matmul(self.act_checked(d, a)?)?;
            d = self.next_deg(d);
        }
        Ok(m)
    }

    /// Re-check the defining constraints: every relation acts as zero
    /// wherever both ends are in range and, in findim mode, every path
    /// at the nilpotency bound acts as zero.
    pub fn validate(&self) -> Verdict {
        let q = self.algebra.quiver();
        match self.algebra.mode() {
            AlgebraMode::Graded { .. } => {
                for r in self.algebra.spec().relations() {
                    let len = r.terms()[0].1.len();
                    let src = r.terms()[0].1.source();
                    for d in 0..self.dims.len().saturating_sub(len) {
                        let mut sum = Mat::zero(
                            self.field(),
                            self.dim(d, src),
                            self.dim(d + len, r.terms()[0].1.target()),
                        );
                        for (c, p) in r.terms() {
                            let m = self
                                .path_action_matrix(d, p)
                                .expect("relation stays within the dims range");
                            let scaled = Mat::from_fn(self.field(), m.rows(), m.cols(), |i, j| {
                                c.clone() * m.at(i, j).clone()
                            });
                            sum = Mat::from_fn(self.field(), sum.rows(), sum.cols(), |i, j| {
                                sum.at(i, j).clone() + scaled.at(i, j).clone()
                            });
                        }
                        if !sum.is_zero() {
                            return Verdict::Fails(Witness {
                                level: d,
                                detail: format!(
                                    "relation {} acts nontrivially out of degree {d}",
                                    r.display(q)
                                ),
                            });
                        }
                    }
                }
                Verdict::Certified
            }
            AlgebraMode::FinDim { nilpotency_bound } => {
                for r in self.algebra.spec().relations() {
                    let src = r.terms()[0].1.source();
                    let tgt = r.terms()[0].1.target();
                    let mut sum = Mat::zero(self.field(), self.dim(0, src), self.dim(0, tgt));
                    for (c, p) in r.terms() {
                        let m = self.path_action_matrix(0, p).expect("findim actions are total");
                        let scaled = Mat::from_fn(self.field(), m.rows(), m.cols(), |i, j| {
                            c.clone() * m.at(i, j).clone()
                        });
                        sum = Mat::from_fn(self.field(), sum.rows(), sum.cols(), |i, j| {
                            sum.at(i, j).clone() + scaled.at(i, j).clone()
                        });
                    }
                    if !sum.is_zero() {
                        return Verdict::Fails(Witness {
                            level: 0,
                            detail: format!("relation {} acts nontrivially", r.display(q)),
                        });
                    }
                }
                // the truncation's own relations: J^N must annihilate
                let full = SlotSubspaces::full(self);
                let jn = radical_power_of(self, &full, nilpotency_bound);
                if !jn.is_zero() {
                    return Verdict::Fails(Witness {
                        level: 0,
                        detail: format!(
                            "paths of length {nilpotency_bound} act nontrivially"
                        ),
                    });
                }
                Verdict::Certified
            }
        }
    }
}

/// A family of subspaces, one per slot of a fixed module.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SlotSubspaces {
    spaces: Vec<Vec<Subspace>>,
}

impl SlotSubspaces {
    pub fn zero(m: &Module) -> SlotSubspaces {
        SlotSubspaces {
            spaces: m
                .dims
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|&n| Subspace::zero(m.field(), n))
                        .collect()
                })
                .collect(),
        }
    }

    pub fn full(m: &Module) -> SlotSubspaces {
        SlotSubspaces {
            spaces: m
                .dims
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|&n| Subspace::full(m.field(), n))
                        .collect()
                })
                .collect(),
        }
    }

    pub fn at(&self, deg: usize, vertex: usize) -> &Subspace {
        &self.spaces[deg][vertex]
    }

    pub fn set(&mut self, deg: usize, vertex: usize, s: Subspace) {
        assert_eq!(self.spaces[deg][vertex].ambient(), s.ambient());
        self.spaces[deg][vertex] = s;
    }

    pub fn slots(&self) -> impl Iterator<Item = (usize, usize, &Subspace)> {
        self.spaces
            .iter()
            .enumerate()
            .flat_map(|(d, row)| row.iter().enumerate().map(move |(v, s)| (d, v, s)))
    }

    pub fn dim_total(&self) -> usize {
        self.slots().map(|(_, _, s)| s.dim()).sum()
    }

    pub fn dim(&self, deg: usize, vertex: usize) -> usize {
        self.spaces[deg][vertex].dim()
    }

    pub fn is_zero(&self) -> bool {
        self.dim_total() == 0
    }

    pub fn leq(&self, other: &SlotSubspaces) -> bool {
        self.spaces
            .iter()
            .zip(&other.spaces)
            .all(|(ra, rb)| ra.iter().zip(rb).all(|(a, b)| a.leq(b)))
    }

    pub fn intersect(&self, other: &SlotSubspaces) -> SlotSubspaces {
        self.zip_with(other, Subspace::intersect)
    }

    pub fn sum(&self, other: &SlotSubspaces) -> SlotSubspaces {
        self.zip_with(other, Subspace::sum)
    }

    fn zip_with(&self, other: &SlotSubspaces, f: impl Fn(&Subspace, &Subspace) -> Subspace) -> SlotSubspaces {
        SlotSubspaces {
            spaces: self
                .spaces
                .iter()
                .zip(&other.spaces)
                .map(|(ra, rb)| ra.iter().zip(rb).map(|(a, b)| f(a, b)).collect())
                .collect(),
        }
    }

    /// First slot where `self` and `other` differ, with both dims.
    pub fn first_gap(&self, other: &SlotSubspaces) -> Option<(usize, usize, usize, usize)> {
        for (d, v, s) in self.slots() {
            let o = other.at(d, v);
            if s != o {
                return Some((d, v, s.dim(), o.dim()));
            }
        }
        None
    }
}

/// Image of `u` under one layer of arrow actions.
fn one_arrow_image(m: &Module, u: &SlotSubspaces) -> SlotSubspaces {
    let q = m.algebra.quiver();
    let mut out = SlotSubspaces::zero(m);
    for d in m.action_degrees() {
        let to_deg = m.next_deg(d);
        for a in 0..q.arrow_count() {
            let arrow = q.arrow(a);
            let src_space = u.at(d, arrow.source);
            if src_space.is_zero() {
                continue;
            }
            let mapped = src_space
                .basis()
                .matmul(m.act(d, a))
                .expect("action dims agree");
            let image = Subspace::from_spanning(&mapped);
            let merged = out.at(to_deg, arrow.target).sum(&image);
            out.set(to_deg, arrow.target, merged);
        }
    }
    out
}

/// J^s u: the span of images of `u` under all paths of length >= s.
/// Computed as the action closure of the exact-length-s image, so the
/// loop is monotone and terminates on any input.
pub fn radical_power_of(m: &Module, u: &SlotSubspaces, s: usize) -> SlotSubspaces {
    let mut v = u.clone();
    for _ in 0..s {
        v = one_arrow_image(m, &v);
    }
    loop {
        let grown = v.sum(&one_arrow_image(m, &v));
        if grown.dim_total() == v.dim_total() {
            return v;
        }
        v = grown;
    }
}

/// J^s M as a subobject of M.
pub fn radical_multiple(m: &Module, s: usize) -> SlotSubspaces {
    radical_power_of(m, &SlotSubspaces::full(m), s)
}

/// The semisimple quotient M/JM: dimensions per slot and deterministic
/// lift vectors (standard basis vectors completing JM).
#[derive(Clone, Debug)]
pub struct Top {
    pub dims: Vec<Vec<usize>>,
    /// (deg, vertex, representative) sorted by slot then position
    pub lifts: Vec<(usize, usize, Vec<Scalar>)>,
}

pub fn top(m: &Module) -> Top {
    let jm = radical_multiple(m, 1);
    let mut dims: Vec<Vec<usize>> = m.dims.iter().map(|row| vec![0; row.len()]).collect();
    let mut lifts = Vec::new();
    for (d, v, s) in jm.slots() {
        for rep in s.complement_vectors() {
            dims[d][v] += 1;
            lifts.push((d, v, rep));
        }
    }
    Top { dims, lifts }
}

/// Explicit projective ⊕ Ae_v[-s] up to the given degree bound (graded)
/// or the whole finite-dimensional projective (findim).
pub fn projective(algebra: &Arc<AlgebraTable>, shape: &ProjectiveShape, bound: usize) -> Result<Module> {
    let q = algebra.quiver();
    let field = algebra.field();
    let graded = algebra.is_graded();

    let degs = if graded { bound + 1 } else { 1 };
    let mut slot_paths: Vec<Vec<Vec<(usize, Path)>>> =
        vec![vec![Vec::new(); q.vertex_count()]; degs];
    let mut generators = Vec::with_capacity(shape.len());

    for (summand, &(v, s)) in shape.summands().iter().enumerate() {
        if graded {
            if s > bound {
                return Err(Error::TruncationExceeded { needed: s, bound });
            }
            for d in s..=bound {
                let layer = d - s;
                if layer > algebra.degree_bound().expect("graded table") {
                    return Err(Error::TruncationExceeded {
                        needed: layer,
                        bound: algebra.degree_bound().expect("graded table"),
                    });
                }
                for mono in algebra.basis_monomials(layer)? {
                    if mono.source() == v {
                        slot_paths[d][mono.target()].push((summand, mono.clone()));
                    }
                }
            }
            generators.push(GeneratorPos { deg: s, vertex: v });
        } else {
            for mono in algebra.basis_monomials_total()? {
                if mono.source() == v {
                    slot_paths[0][mono.target()].push((summand, mono.clone()));
                }
            }
            generators.push(GeneratorPos { deg: 0, vertex: v });
        }
    }

    let dims: Vec<Vec<usize>> = slot_paths
        .iter()
        .map(|row| row.iter().map(Vec::len).collect())
        .collect();

    // action entries read off the algebra's right-multiplication tables,
    // restricted to the summand's block
    let action_layers = if graded { bound } else { 1 };
    let mut action = Vec::with_capacity(action_layers);
    for d in 0..action_layers {
        let to_deg = if graded { d + 1 } else { 0 };
        let mut per_arrow = Vec::with_capacity(q.arrow_count());
        for a in 0..q.arrow_count() {
            let arrow = q.arrow(a);
            let from = &slot_paths[d][arrow.source];
            let to = &slot_paths[to_deg][arrow.target];
            let mut mat = Mat::zero(field, from.len(), to.len());
            for (i, (summand, mono)) in from.iter().enumerate() {
                let layer = if graded { d - shape.summands()[*summand].1 } else { 0 };
                let mult = if graded {
                    algebra.right_mult(layer, a)?
                } else {
                    algebra.right_mult_total(a)?
                };
                // the monomial's row in the algebra table, re-indexed to
                // the target slot's monomial list
                let table_row = if graded {
                    algebra
                        .basis_monomials(layer)?
                        .iter()
                        .position(|p| *p == mono)
                        .expect("slot paths come from the table")
                } else {
                    algebra
                        .basis_monomials_total()?
                        .iter()
                        .position(|p| *p == mono)
                        .expect("slot paths come from the table")
                };
                let target_monos: Vec<&Path> = if graded {
                    algebra.basis_monomials(layer + 1)?
                } else {
                    algebra.basis_monomials_total()?
                };
                for (j, (t_summand, t_mono)) in to.iter().enumerate() {
                    if t_summand != summand {
                        continue;
                    }
                    let col = target_monos
                        .iter()
                        .position(|p| *p == t_mono)
                        .expect("slot paths come from the table");
                    mat.set(i, j, mult.at(table_row, col).clone());
                }
            }
            per_arrow.push(mat);
        }
        action.push(per_arrow);
    }

    let mut m = Module::assemble_internal(Arc::clone(algebra), dims, action);
    m.projective = Some(ProjectiveData {
        shape: shape.clone(),
        generators,
        slot_paths,
    });
    Ok(m)
}

/// The simple module concentrated at one vertex (and degree, if graded).
pub fn simple(algebra: &Arc<AlgebraTable>, vertex: usize, deg: usize, bound: usize) -> Result<Module> {
    let q = algebra.quiver();
    let graded = algebra.is_graded();
    let degs = if graded { bound + 1 } else { 1 };
    let slot_deg = if graded { deg } else { 0 };
    if slot_deg >= degs {
        return Err(Error::TruncationExceeded { needed: slot_deg, bound });
    }
    let mut dims = vec![vec![0; q.vertex_count()]; degs];
    dims[slot_deg][vertex] = 1;
    let field = algebra.field();
    let layers = if graded { bound } else { 1 };
    let action = (0..layers)
        .map(|d| {
            let to_deg = if graded { d + 1 } else { 0 };
            (0..q.arrow_count())
                .map(|a| {
                    let arrow = q.arrow(a);
                    Mat::zero(field, dims[d][arrow.source], dims[to_deg][arrow.target])
                })
                .collect()
        })
        .collect();
    Ok(Module::assemble_internal(Arc::clone(algebra), dims, action))
}

pub fn zero_module(algebra: &Arc<AlgebraTable>, bound: usize) -> Module {
    let q = algebra.quiver();
    let degs = if algebra.is_graded() { bound + 1 } else { 1 };
    let dims = vec![vec![0; q.vertex_count()]; degs];
    let layers = if algebra.is_graded() { bound } else { 1 };
    let action = (0..layers)
        .map(|_| {
            (0..q.arrow_count())
                .map(|_| Mat::zero(algebra.field(), 0, 0))
                .collect()
        })
        .collect();
    let mut m = Module::assemble_internal(Arc::clone(algebra), dims, action);
    m.projective = Some(ProjectiveData {
        shape: ProjectiveShape::empty(),
        generators: Vec::new(),
        slot_paths: vec![vec![Vec::new(); q.vertex_count()]; degs],
    });
    m
}

/// Grading-preserving morphism, one block per slot, commuting with all
/// arrow actions (validated).
#[derive(Clone, Debug)]
pub struct Morphism {
    domain: Module,
    codomain: Module,
    /// blocks[d][v]: dim_dom(d,v) x dim_cod(d,v)
    blocks: Vec<Vec<Mat>>,
}

impl Morphism {
    pub fn new(domain: Module, codomain: Module, blocks: Vec<Vec<Mat>>) -> Result<Morphism> {
        let f = Morphism::assemble(domain, codomain, blocks)?;
        if let Some((d, a)) = f.first_noncommuting_square() {
            let name = &f.domain.algebra.quiver().arrow(a).name;
            return Err(Error::BadMorphism(format!(
                "blocks do not commute with the action of `{name}` at degree {d}"
            )));
        }
        Ok(f)
    }

    fn assemble(domain: Module, codomain: Module, blocks: Vec<Vec<Mat>>) -> Result<Morphism> {
        if !Arc::ptr_eq(&domain.algebra, &codomain.algebra) {
            return Err(Error::BadMorphism("domain and codomain live over different algebra tables".into()));
        }
        if domain.dims.len() != codomain.dims.len() {
            return Err(Error::BadMorphism(format!(
                "domain trusted through degree {}, codomain through {}",
                domain.validity(),
                codomain.validity()
            )));
        }
        if blocks.len() != domain.dims.len() {
            return Err(Error::BadMorphism("one block row per degree required".into()));
        }
        for (d, row) in blocks.iter().enumerate() {
            if row.len() != domain.algebra.quiver().vertex_count() {
                return Err(Error::BadMorphism("one block per vertex required".into()));
            }
            for (v, b) in row.iter().enumerate() {
                if b.rows() != domain.dim(d, v) || b.cols() != codomain.dim(d, v) {
                    return Err(Error::BadMorphism(format!(
                        "block at degree {d} vertex {v} is {}x{}, expected {}x{}",
                        b.rows(),
                        b.cols(),
                        domain.dim(d, v),
                        codomain.dim(d, v)
                    )));
                }
                if b.field() != domain.field() {
                    return Err(Error::FieldMismatch(
                        domain.field().to_string(),
                        b.field().to_string(),
                    ));
                }
            }
        }
        Ok(Morphism { domain, codomain, blocks })
    }

    fn assemble_internal(domain: Module, codomain: Module, blocks: Vec<Vec<Mat>>) -> Morphism {
        let f = Morphism::assemble(domain, codomain, blocks).expect("internal morphism data is well-shaped");
        debug_assert!(f.first_noncommuting_square().is_none(), "internal morphism breaks a square");
        f
    }

    fn first_noncommuting_square(&self) -> Option<(usize, usize)> {
        let q = self.domain.algebra.quiver();
        for d in self.domain.action_degrees() {
            let to_deg = self.domain.next_deg(d);
            for a in 0..q.arrow_count() {
                let arrow = q.arrow(a);
                let via_dom = self.domain.act(d, a).matmul(&self.blocks[to_deg][arrow.target]);
                let via_cod = self.blocks[d][arrow.source].matmul(self.codomain.act(d, a));
                match (via_dom, via_cod) {
                    (Ok(x), Ok(y)) if x == y => {}
                    _ => return Some((d, a)),
                }
            }
        }
        None
    }

    pub fn domain(&self) -> &Module {
        &self.domain
    }

    pub fn codomain(&self) -> &Module {
        &self.codomain
    }

    pub fn block(&self, deg: usize, vertex: usize) -> &Mat {
        &self.blocks[deg][vertex]
    }

    pub fn identity(m: &Module) -> Morphism {
        let blocks = m
            .dims
            .iter()
            .map(|row| row.iter().map(|&n| Mat::identity(m.field(), n)).collect())
            .collect();
        Morphism::assemble_internal(m.clone(), m.clone(), blocks)
    }

    pub fn zero(domain: &Module, codomain: &Module) -> Morphism {
        let blocks = domain
            .dims
            .iter()
            .enumerate()
            .map(|(d, row)| {
                row.iter()
                    .enumerate()
                    .map(|(v, &n)| Mat::zero(domain.field(), n, codomain.dim(d, v)))
                    .collect()
            })
            .collect();
        Morphism::assemble_internal(domain.clone(), codomain.clone(), blocks)
    }

    /// self then other.
    pub fn compose(&self, other: &Morphism) -> Result<Morphism> {
        if self.codomain.dims != other.domain.dims {
            return Err(Error::BadMorphism("composition endpoints do not match".into()));
        }
        let blocks = self
            .blocks
            .iter()
            .enumerate()
            .map(|(d, row)| {
                row.iter()
                    .enumerate()
                    .map(|(v, b)| b.matmul(other.block(d, v)).expect("dims agree"))
                    .collect()
            })
            .collect();
        Ok(Morphism::assemble_internal(
            self.domain.clone(),
            other.codomain.clone(),
            blocks,
        ))
    }

    pub fn is_injective(&self) -> bool {
        self.blocks.iter().enumerate().all(|(d, row)| {
            row.iter()
                .enumerate()
                .all(|(v, b)| crate::linalg::rref(b).rank == self.domain.dim(d, v))
        })
    }

    pub fn is_surjective(&self) -> bool {
        self.blocks.iter().enumerate().all(|(d, row)| {
            row.iter()
                .enumerate()
                .all(|(v, b)| crate::linalg::rref(b).rank == self.codomain.dim(d, v))
        })
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.iter().all(|row| row.iter().all(Mat::is_zero))
    }

    /// Kernel as subspaces of the domain's slots.
    pub fn kernel_subspaces(&self) -> SlotSubspaces {
        let mut out = SlotSubspaces::zero(&self.domain);
        for (d, row) in self.blocks.iter().enumerate() {
            for (v, b) in row.iter().enumerate() {
                out.set(d, v, kernel_basis(&b.transpose()));
            }
        }
        out
    }

    /// Image as subspaces of the codomain's slots.
    pub fn image_subspaces(&self) -> SlotSubspaces {
        let mut out = SlotSubspaces::zero(&self.codomain);
        for (d, row) in self.blocks.iter().enumerate() {
            for (v, b) in row.iter().enumerate() {
                out.set(d, v, Subspace::from_spanning(b));
            }
        }
        out
    }
}

/// Canonical standalone module for an action-closed family of subspaces,
/// with the inclusion morphism. Panics if the family is not closed.
pub fn promote(parent: &Module, sub: &SlotSubspaces) -> (Module, Morphism) {
    let q = parent.algebra.quiver();
    let dims: Vec<Vec<usize>> = parent
        .dims
        .iter()
        .enumerate()
        .map(|(d, row)| (0..row.len()).map(|v| sub.dim(d, v)).collect())
        .collect();
    let mut action = Vec::with_capacity(parent.action.len());
    for d in parent.action_degrees() {
        let to_deg = parent.next_deg(d);
        let mut per_arrow = Vec::with_capacity(q.arrow_count());
        for a in 0..q.arrow_count() {
            let arrow = q.arrow(a);
            let from = sub.at(d, arrow.source);
            let to = sub.at(to_deg, arrow.target);
            let mut mat = Mat::zero(parent.field(), from.dim(), to.dim());
            for (i, row) in from.basis().row_vecs().enumerate() {
                let mapped = parent.act(d, a).apply_row(row).expect("dims agree");
                let coords = to
                    .coordinates(&mapped)
                    .expect("subspace family is closed under the action");
                for (j, c) in coords.into_iter().enumerate() {
                    mat.set(i, j, c);
                }
            }
            per_arrow.push(mat);
        }
        action.push(per_arrow);
    }
    let sub_module = Module::assemble_internal(Arc::clone(&parent.algebra), dims, action);
    let incl_blocks = parent
        .dims
        .iter()
        .enumerate()
        .map(|(d, row)| {
            (0..row.len())
                .map(|v| sub.at(d, v).basis().clone())
                .collect()
        })
        .collect();
    let incl = Morphism::assemble_internal(sub_module.clone(), parent.clone(), incl_blocks);
    (sub_module, incl)
}

/// Quotient by an action-closed family, with the projection morphism.
/// Coordinates are the non-pivot columns of each slot's subspace.
pub fn quotient(parent: &Module, sub: &SlotSubspaces) -> (Module, Morphism) {
    let q = parent.algebra.quiver();
    let field = parent.field();
    // per slot: the non-pivot columns give the quotient coordinates, and
    // residue against the subspace computes the projection
    let keep: Vec<Vec<Vec<usize>>> = parent
        .dims
        .iter()
        .enumerate()
        .map(|(d, row)| {
            (0..row.len())
                .map(|v| {
                    let s = sub.at(d, v);
                    let mut is_pivot = vec![false; s.ambient()];
                    for &p in s.pivots() {
                        is_pivot[p] = true;
                    }
                    (0..s.ambient()).filter(|&i| !is_pivot[i]).collect()
                })
                .collect()
        })
        .collect();
    let dims: Vec<Vec<usize>> = keep
        .iter()
        .map(|row| row.iter().map(Vec::len).collect())
        .collect();

    let proj_block = |d: usize, v: usize| -> Mat {
        let s = sub.at(d, v);
        let cols = &keep[d][v];
        let mut mat = Mat::zero(field, parent.dim(d, v), cols.len());
        for i in 0..parent.dim(d, v) {
            let mut e = vec![field.zero(); parent.dim(d, v)];
            e[i] = field.one();
            let residue = s.residue(&e);
            for (j, &c) in cols.iter().enumerate() {
                mat.set(i, j, residue[c].clone());
            }
        }
        mat
    };

    let mut action = Vec::with_capacity(parent.action.len());
    for d in parent.action_degrees() {
        let to_deg = parent.next_deg(d);
        let mut per_arrow = Vec::with_capacity(q.arrow_count());
        for a in 0..q.arrow_count() {
            let arrow = q.arrow(a);
            let from_cols = &keep[d][arrow.source];
            // quotient action: lift a quotient basis vector (a kept
            // coordinate), act, project; well-defined since sub is closed
            let to_proj = proj_block(to_deg, arrow.target);
            let mut mat = Mat::zero(field, from_cols.len(), dims[to_deg][arrow.target]);
            for (i, &c) in from_cols.iter().enumerate() {
                let mut e = vec![field.zero(); parent.dim(d, arrow.source)];
                e[c] = field.one();
                let mapped = parent.act(d, a).apply_row(&e).expect("dims agree");
                let projected = to_proj.apply_row(&mapped).expect("dims agree");
                for (j, val) in projected.into_iter().enumerate() {
                    mat.set(i, j, val);
                }
            }
            per_arrow.push(mat);
        }
        action.push(per_arrow);
    }

    let quot = Module::assemble_internal(Arc::clone(&parent.algebra), dims, action);
    let proj_blocks = parent
        .dims
        .iter()
        .enumerate()
        .map(|(d, row)| (0..row.len()).map(|v| proj_block(d, v)).collect())
        .collect();
    let proj = Morphism::assemble_internal(parent.clone(), quot.clone(), proj_blocks);
    (quot, proj)
}

pub fn kernel(f: &Morphism) -> (Module, Morphism) {
    promote(f.domain(), &f.kernel_subspaces())
}

pub fn image(f: &Morphism) -> (Module, Morphism) {
    promote(f.codomain(), &f.image_subspaces())
}

pub fn cokernel(f: &Morphism) -> (Module, Morphism) {
    quotient(f.codomain(), &f.image_subspaces())
}

/// Block-diagonal direct sum with the four canonical maps
/// (incl_a, incl_b, proj_a, proj_b). Slot coordinates list a first.
pub fn direct_sum(a: &Module, b: &Module) -> Result<(Module, Morphism, Morphism, Morphism, Morphism)> {
    if !Arc::ptr_eq(&a.algebra, &b.algebra) {
        return Err(Error::BadModule("direct sum over different algebra tables".into()));
    }
    if a.dims.len() != b.dims.len() {
        return Err(Error::BadModule(format!(
            "direct sum of modules trusted through degrees {} and {}",
            a.validity(),
            b.validity()
        )));
    }
    let field = a.field();
    let q = a.algebra.quiver();
    let dims: Vec<Vec<usize>> = a
        .dims
        .iter()
        .zip(&b.dims)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| x + y).collect())
        .collect();
    let mut action = Vec::with_capacity(a.action.len());
    for d in a.action_degrees() {
        let to_deg = a.next_deg(d);
        let mut per_arrow = Vec::with_capacity(q.arrow_count());
        for arr in 0..q.arrow_count() {
            let arrow = q.arrow(arr);
            let (ma, mb) = (a.act(d, arr), b.act(d, arr));
            let rows = dims[d][arrow.source];
            let cols = dims[to_deg][arrow.target];
            let mut mat = Mat::zero(field, rows, cols);
            for i in 0..ma.rows() {
                for j in 0..ma.cols() {
                    mat.set(i, j, ma.at(i, j).clone());
                }
            }
            for i in 0..mb.rows() {
                for j in 0..mb.cols() {
                    mat.set(a.dim(d, arrow.source) + i, a.dim(to_deg, arrow.target) + j, mb.at(i, j).clone());
                }
            }
            per_arrow.push(mat);
        }
        action.push(per_arrow);
    }
    let mut sum = Module::assemble_internal(Arc::clone(&a.algebra), dims, action);
    if let (Some(pa), Some(pb)) = (&a.projective, &b.projective) {
        let shape = pa.shape.union(&pb.shape);
        // summand provenance for the union is re-derived from scratch
        // only when needed (covers build their own data); keep the shape
        sum.projective = Some(ProjectiveData {
            shape,
            generators: Vec::new(),
            slot_paths: Vec::new(),
        });
    }

    let block_incl = |m: &Module, offset_of: &dyn Fn(usize, usize) -> usize| -> Vec<Vec<Mat>> {
        m.dims
            .iter()
            .enumerate()
            .map(|(d, row)| {
                row.iter()
                    .enumerate()
                    .map(|(v, &n)| {
                        let mut mat = Mat::zero(field, n, sum.dim(d, v));
                        for i in 0..n {
                            mat.set(i, offset_of(d, v) + i, field.one());
                        }
                        mat
                    })
                    .collect()
            })
            .collect()
    };
    let zero_off = |_: usize, _: usize| 0usize;
    let a_dims = a.dims.clone();
    let a_off = move |d: usize, v: usize| a_dims[d][v];
    let incl_a = Morphism::assemble_internal(a.clone(), sum.clone(), block_incl(a, &zero_off));
    let incl_b = Morphism::assemble_internal(b.clone(), sum.clone(), block_incl(b, &a_off));

    let proj_of = |m: &Module, offset_of: &dyn Fn(usize, usize) -> usize| -> Vec<Vec<Mat>> {
        sum.dims
            .iter()
            .enumerate()
            .map(|(d, row)| {
                row.iter()
                    .enumerate()
                    .map(|(v, &n)| {
                        let mut mat = Mat::zero(field, n, m.dim(d, v));
                        for i in 0..m.dim(d, v) {
                            mat.set(offset_of(d, v) + i, i, field.one());
                        }
                        mat
                    })
                    .collect()
            })
            .collect()
    };
    let a_dims2 = a.dims.clone();
    let a_off2 = move |d: usize, v: usize| a_dims2[d][v];
    let proj_a = Morphism::assemble_internal(sum.clone(), a.clone(), proj_of(a, &zero_off));
    let proj_b = Morphism::assemble_internal(sum.clone(), b.clone(), proj_of(b, &a_off2));

    Ok((sum, incl_a, incl_b, proj_a, proj_b))
}

/// Degree reindex per (M[n])_t = M_{n+t}; graded only. Positive n moves
/// support toward lower degrees and costs n degrees of validity.
pub fn shift(m: &Module, n: i64) -> Result<Module> {
    if !m.is_graded() {
        return Err(Error::ModeMismatch { expected: "graded", found: "findim" });
    }
    let old_v = m.validity() as i64;
    let new_v = old_v - n;
    if new_v < 0 {
        return Err(Error::TruncationExceeded { needed: n as usize, bound: m.validity() });
    }
    let q = m.algebra.quiver();
    let field = m.field();
    let old_deg = |t: i64| -> Option<usize> {
        let d = t + n;
        if d >= 0 && d <= old_v {
            Some(d as usize)
        } else {
            None
        }
    };
    let dims: Vec<Vec<usize>> = (0..=new_v)
        .map(|t| match old_deg(t) {
            Some(d) => m.dims[d].clone(),
            None => vec![0; q.vertex_count()],
        })
        .collect();
    let action = (0..new_v as usize)
        .map(|t| {
            (0..q.arrow_count())
                .map(|a| {
                    let arrow = q.arrow(a);
                    match old_deg(t as i64) {
                        Some(d) if d < m.action.len() => m.act(d, a).clone(),
                        _ => Mat::zero(
                            field,
                            dims[t][arrow.source],
                            dims[t + 1][arrow.target],
                        ),
                    }
                })
                .collect()
        })
        .collect();
    Ok(Module::assemble_internal(Arc::clone(&m.algebra), dims, action))
}

/// Morphism out of an explicit projective determined by generator images:
/// the basis vector for monomial mu in summand i maps to
/// targets[i] acted by mu. A-linear because the ideal acts as zero on any
/// validated module.
pub fn projective_map(p: &Module, m: &Module, targets: &[(usize, usize, Vec<Scalar>)]) -> Result<Morphism> {
    let data = p
        .projective
        .as_ref()
        .filter(|d| d.slot_paths.len() == p.dims.len())
        .ok_or_else(|| Error::BadModule("domain lacks explicit projective coordinates".into()))?;
    if targets.len() != data.generators.len() {
        return Err(Error::BadMorphism(format!(
            "{} generator images supplied for {} summands",
            targets.len(),
            data.generators.len()
        )));
    }
    for (gen, (deg, vertex, coords)) in data.generators.iter().zip(targets) {
        if gen.deg != *deg || gen.vertex != *vertex || coords.len() != m.dim(*deg, *vertex) {
            return Err(Error::BadMorphism("generator image sits in the wrong slot".into()));
        }
    }
    let field = p.field();
    let mut blocks: Vec<Vec<Mat>> = p
        .dims
        .iter()
        .enumerate()
        .map(|(d, row)| {
            row.iter()
                .enumerate()
                .map(|(v, &n)| Mat::zero(field, n, m.dim(d, v)))
                .collect()
        })
        .collect();
    for (d, row) in data.slot_paths.iter().enumerate() {
        for (v, monos) in row.iter().enumerate() {
            for (i, (summand, mono)) in monos.iter().enumerate() {
                let (t_deg, t_vertex, t_coords) = &targets[*summand];
                let (dd, vv, image) = m.act_on_row(*t_deg, *t_vertex, t_coords, mono)?;
                debug_assert_eq!((dd, vv), (d, v));
                for (j, val) in image.into_iter().enumerate() {
                    blocks[d][v].set(i, j, val);
                }
            }
        }
    }
    Ok(Morphism::assemble_internal(p.clone(), m.clone(), blocks))
}

/// Projective cover: one summand per top generator, epi sending each
/// generator to its chosen lift. Asserts minimality ker ⊆ J·P.
pub fn projective_cover(m: &Module) -> Result<(Module, Morphism)> {
    let t = top(m);
    if m.is_graded() {
        for (d, _, _) in &t.lifts {
            // one radical layer of headroom so the syzygy's generators
            // remain detectable
            if d + 1 > m.validity() {
                return Err(Error::TruncationExceeded { needed: d + 1, bound: m.validity() });
            }
        }
    }
    let shape = ProjectiveShape::new(
        t.lifts
            .iter()
            .map(|(d, v, _)| (*v, if m.is_graded() { *d } else { 0 }))
            .collect(),
    );
    let p = projective(&m.algebra, &shape, m.validity())?;
    // align targets with the shape's sorted summand order
    let mut sorted_lifts = t.lifts.clone();
    sorted_lifts.sort_by(|a, b| (a.1, a.0).cmp(&(b.1, b.0)));
    let targets: Vec<(usize, usize, Vec<Scalar>)> = sorted_lifts
        .into_iter()
        .map(|(d, v, coords)| (if m.is_graded() { d } else { 0 }, v, coords))
        .collect();
    let epi = projective_map(&p, m, &targets)?;
    assert!(epi.is_surjective(), "projective cover must surject");
    let ker = epi.kernel_subspaces();
    let jp = radical_multiple(&p, 1);
    assert!(ker.leq(&jp), "projective cover kernel must sit inside the radical");
    Ok((p, epi))
}

/// First syzygy: the kernel of the projective cover, with its inclusion
/// into the cover.
pub fn syzygy(m: &Module) -> Result<(Module, Morphism, Module, Morphism)> {
    let (p, epi) = projective_cover(m)?;
    let (omega, incl) = kernel(&epi);
    Ok((omega, incl, p, epi))
}

/// Smallest submodule containing the given vectors: close the spans
/// under all arrow actions, then promote.
pub fn submodule_generated(m: &Module, vectors: &[(usize, usize, Vec<Scalar>)]) -> Result<(Module, Morphism)> {
    let mut span = SlotSubspaces::zero(m);
    for (d, v, coords) in vectors {
        if *d >= m.dims.len() || *v >= m.dims[*d].len() || coords.len() != m.dim(*d, *v) {
            return Err(Error::BadVector(format!(
                "generator does not live in slot (degree {d}, vertex {v})"
            )));
        }
        let merged = span.at(*d, *v).sum(&Subspace::from_rows(
            m.field(),
            m.dim(*d, *v),
            vec![coords.clone()],
        )?);
        span.set(*d, *v, merged);
    }
    loop {
        let grown = span.sum(&one_arrow_image(m, &span));
        if grown.dim_total() == span.dim_total() {
            break;
        }
        span = grown;
    }
    Ok(promote(m, &span))
}
