//! Minimal projective resolutions by iterated covers.
//!
//! A resolution is a value even when partial: graded truncation or the
//! homological cap can stop the iteration, and every consumer quotes the
//! bounds it relied on instead of erroring.

use crate::error::{Error, Result};
use crate::module::{
    kernel, projective_cover, radical_multiple, Module, Morphism, SlotSubspaces,
};
use crate::verdict::{Verdict, Witness};

/// One Betti level: (vertex, generator degree) with multiplicity, sorted.
pub type BettiLevel = Vec<((usize, usize), usize)>;

#[derive(Clone, Debug)]
pub struct Resolution {
    pub(crate) target: Module,
    /// steps[n] = (P_n, d_n); d_0 is the augmentation onto the target,
    /// d_n for n >= 1 maps P_n -> P_{n-1}
    pub(crate) steps: Vec<(Module, Morphism)>,
    pub(crate) betti: Vec<BettiLevel>,
    pub(crate) terminated: bool,
    pub(crate) truncated: bool,
    pub(crate) hom_bound: usize,
    pub(crate) validity: usize,
}

pub(crate) fn shape_multiset(p: &Module) -> BettiLevel {
    let mut out: BettiLevel = Vec::new();
    for &(v, d) in p.projective_shape().expect("covers carry shapes").summands() {
        match out.last_mut() {
            Some(((lv, ld), count)) if *lv == v && *ld == d => *count += 1,
            _ => out.push(((v, d), 1)),
        }
    }
    out
}

/// Iterate projective covers of successive syzygies until the syzygy
/// vanishes, n_max levels are built, or graded truncation refuses a
/// cover. The truncation case is recorded, not raised.
pub fn minimal_resolution(m: &Module, n_max: usize) -> Result<Resolution> {
    let mut steps: Vec<(Module, Morphism)> = Vec::new();
    let mut betti: Vec<BettiLevel> = Vec::new();
    let mut terminated = false;
    let mut truncated = false;
    let mut current = m.clone();
    let mut incl_prev: Option<Morphism> = None;

    for _ in 0..=n_max {
        if current.is_zero() {
            terminated = true;
            break;
        }
        match projective_cover(&current) {
            Err(Error::TruncationExceeded { .. }) => {
                truncated = true;
                break;
            }
            Err(e) => return Err(e),
            Ok((p, epi)) => {
                let d = match &incl_prev {
                    None => epi.clone(),
                    Some(incl) => epi.compose(incl)?,
                };
                betti.push(shape_multiset(&p));
                steps.push((p, d));
                let (k, incl) = kernel(&epi);
                current = k;
                incl_prev = Some(incl);
            }
        }
    }
    if !terminated && !truncated && current.is_zero() {
        terminated = true;
    }

    let hom_bound = steps.len().saturating_sub(1);
    Ok(Resolution {
        validity: m.validity(),
        target: m.clone(),
        steps,
        betti,
        terminated,
        truncated,
        hom_bound,
    })
}

impl Resolution {
    pub fn target(&self) -> &Module {
        &self.target
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn projective(&self, n: usize) -> &Module {
        &self.steps[n].0
    }

    pub fn differential(&self, n: usize) -> &Morphism {
        &self.steps[n].1
    }

    pub fn betti(&self) -> &[BettiLevel] {
        &self.betti
    }

    pub fn terminated(&self) -> bool {
        self.terminated
    }

    /// True when a graded cover was refused for lack of degree headroom.
    pub fn truncated(&self) -> bool {
        self.truncated
    }

    pub fn hom_bound(&self) -> usize {
        self.hom_bound
    }

    pub fn validity(&self) -> usize {
        self.validity
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProjectiveDimension {
    Finite(usize),
    AtLeast(usize),
    /// Truncation stopped the iteration; the payload is the first level
    /// that could not be built.
    Undetermined(usize),
}

impl std::fmt::Display for ProjectiveDimension {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ProjectiveDimension::Finite(n) => write!(f, "pd = {n}"),
            ProjectiveDimension::AtLeast(n) => write!(f, "pd >= {n}"),
            ProjectiveDimension::Undetermined(n) => {
                write!(f, "pd undetermined (truncation at level {n})")
            }
        }
    }
}

pub fn projective_dimension(r: &Resolution) -> ProjectiveDimension {
    if r.terminated {
        return ProjectiveDimension::Finite(r.steps.len().saturating_sub(1));
    }
    if r.truncated {
        return ProjectiveDimension::Undetermined(r.steps.len());
    }
    ProjectiveDimension::AtLeast(r.steps.len())
}

/// Re-check exactness of every computed step without demanding
/// minimality: augmentation surjective, image(d_n) = kernel(d_{n-1}),
/// and a terminated complex really ends in a zero kernel.
pub fn verify_exactness(r: &Resolution) -> Verdict {
    if r.steps.is_empty() {
        return if r.target.is_zero() {
            Verdict::Certified
        } else {
            Verdict::Fails(Witness {
                level: 0,
                detail: "no steps but the target is nonzero".into(),
            })
        };
    }
    if !r.steps[0].1.is_surjective() {
        return Verdict::Fails(Witness {
            level: 0,
            detail: "augmentation does not surject onto the target".into(),
        });
    }
    for n in 1..r.steps.len() {
        let image = r.steps[n].1.image_subspaces();
        let ker = r.steps[n - 1].1.kernel_subspaces();
        if image != ker {
            let gap = describe_gap(&image, &ker);
            return Verdict::Fails(Witness {
                level: n,
                detail: format!("image(d_{n}) != kernel(d_{}) at {gap}", n - 1),
            });
        }
    }
    if r.terminated {
        let last = r.steps.len() - 1;
        if !r.steps[last].1.kernel_subspaces().is_zero() {
            return Verdict::Fails(Witness {
                level: last,
                detail: format!("marked terminated but kernel(d_{last}) is nonzero"),
            });
        }
        Verdict::Certified
    } else {
        Verdict::CertifiedUpTo(r.hom_bound)
    }
}

/// Re-check exactness and minimality of every computed step. Any output
/// of `minimal_resolution` passes; the point is auditing hand-built or
/// transported complexes.
pub fn verify_resolution(r: &Resolution) -> Verdict {
    let exact = verify_exactness(r);
    if matches!(exact, Verdict::Fails(_)) {
        return exact;
    }
    for n in 1..r.steps.len() {
        let image = r.steps[n].1.image_subspaces();
        let jp = radical_multiple(&r.steps[n - 1].0, 1);
        if !image.leq(&jp) {
            return Verdict::Fails(Witness {
                level: n,
                detail: format!("image(d_{n}) escapes the radical of P_{}", n - 1),
            });
        }
    }
    exact
}

fn describe_gap(a: &SlotSubspaces, b: &SlotSubspaces) -> String {
    match a.first_gap(b) {
        Some((d, v, da, db)) => {
            format!("(degree {d}, vertex {v}): dims {da} vs {db}")
        }
        None => "(no slot gap)".into(),
    }
}

/// Human-readable Betti table: one row per level, entries sorted by
/// degree then vertex. Vertex names are shown only for quivers with more
/// than one vertex.
pub fn betti_table(r: &Resolution) -> String {
    let q = r.target.algebra().quiver();
    let named = q.vertex_count() > 1;
    let mut rows = Vec::with_capacity(r.betti.len());
    for (n, level) in r.betti.iter().enumerate() {
        let mut entries = level.clone();
        entries.sort_by_key(|&((v, d), _)| (d, v));
        let cells: Vec<String> = entries
            .iter()
            .map(|&((v, d), count)| {
                let mut s = if named {
                    format!("{}:{d}", q.vertex_name(v))
                } else {
                    format!("{d}")
                };
                if count > 1 {
                    s.push_str(&format!("x{count}"));
                }
                s
            })
            .collect();
        rows.push(format!("{n}: {}", cells.join(", ")));
    }
    rows.join("\n")
}

/// Machine-readable lines "betti <n> <vertex>:<degree>x<count>".
pub fn betti_machine_lines(r: &Resolution) -> Vec<String> {
    let q = r.target.algebra().quiver();
    let mut out = Vec::new();
    for (n, level) in r.betti.iter().enumerate() {
        let mut entries = level.clone();
        entries.sort_by_key(|&((v, d), _)| (d, v));
        for ((v, d), count) in entries {
            out.push(format!("betti {n} {}:{d}x{count}", q.vertex_name(v)));
        }
    }
    out
}
