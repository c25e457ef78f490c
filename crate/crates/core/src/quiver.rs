//! Quivers and composable paths.
//!
//! Paths compose left to right: `p.compose(q)` is "p then q" and needs
//! target(p) = source(q). Length-0 paths are the vertex idempotents. The
//! derived `Ord` is the monomial order used everywhere for pivots and
//! canonical bases: length first, then lexicographic on the arrow-index
//! sequence.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Arrow {
    pub name: String,
    pub source: usize,
    pub target: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Quiver {
    vertices: Vec<String>,
    arrows: Vec<Arrow>,
}

impl Quiver {
    /// Arrows are given as (name, source vertex name, target vertex name).
    /// All names (vertices and arrows together) must be distinct.
    pub fn new(vertices: Vec<String>, arrows: Vec<(String, String, String)>) -> Result<Quiver> {
        if vertices.is_empty() {
            return Err(Error::BadQuiver("a quiver needs at least one vertex".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for v in &vertices {
            if !seen.insert(v.clone()) {
                return Err(Error::BadQuiver(format!("duplicate name `{v}`")));
            }
        }
        let mut resolved = Vec::with_capacity(arrows.len());
        for (name, src, tgt) in arrows {
            if !seen.insert(name.clone()) {
                return Err(Error::BadQuiver(format!("duplicate name `{name}`")));
            }
            let source = vertices
                .iter()
                .position(|v| *v == src)
                .ok_or_else(|| Error::BadQuiver(format!("arrow `{name}`: unknown vertex `{src}`")))?;
            let target = vertices
                .iter()
                .position(|v| *v == tgt)
                .ok_or_else(|| Error::BadQuiver(format!("arrow `{name}`: unknown vertex `{tgt}`")))?;
            resolved.push(Arrow { name, source, target });
        }
        Ok(Quiver { vertices, arrows: resolved })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn arrow_count(&self) -> usize {
        self.arrows.len()
    }

    pub fn vertex_name(&self, v: usize) -> &str {
        &self.vertices[v]
    }

    pub fn vertex_index(&self, name: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v == name)
    }

    pub fn arrow(&self, a: usize) -> &Arrow {
        &self.arrows[a]
    }

    pub fn arrows(&self) -> &[Arrow] {
        &self.arrows
    }

    pub fn arrow_index(&self, name: &str) -> Option<usize> {
        self.arrows.iter().position(|a| a.name == name)
    }

    /// All paths of the given length, in monomial order. Extension
    /// preserves the relative order of paths sharing a source, but
    /// sources interleave, so the listing is sorted at the end.
    pub fn paths_of_length(&self, len: usize) -> Vec<Path> {
        let mut level: Vec<Path> = (0..self.vertices.len()).map(Path::idempotent).collect();
        for _ in 0..len {
            let mut next = Vec::new();
            for p in &level {
                for (i, a) in self.arrows.iter().enumerate() {
                    if a.source == p.target {
                        next.push(p.extend(i, a.target));
                    }
                }
            }
            level = next;
        }
        level.sort_unstable();
        debug_assert!(level.windows(2).all(|w| w[0] < w[1]));
        level
    }
}

/// A composable sequence of arrows, or a vertex idempotent when empty.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Path {
    source: usize,
    target: usize,
    arrows: Vec<usize>,
}

impl Path {
    pub fn idempotent(v: usize) -> Path {
        Path { source: v, target: v, arrows: Vec::new() }
    }

    /// Validates composability of consecutive arrows against the quiver.
    pub fn from_arrows(q: &Quiver, arrows: Vec<usize>) -> Result<Path> {
        let first = *arrows.first().ok_or_else(|| {
            Error::BadRelation("empty arrow list has no source; use an idempotent".into())
        })?;
        let mut at = q.arrow(first).source;
        let source = at;
        for &i in &arrows {
            let a = q.arrow(i);
            if a.source != at {
                return Err(Error::BadRelation(format!(
                    "arrow `{}` does not start where the previous arrow ends",
                    a.name
                )));
            }
            at = a.target;
        }
        Ok(Path { source, target: at, arrows })
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn len(&self) -> usize {
        self.arrows.len()
    }

    pub fn is_idempotent(&self) -> bool {
        self.arrows.is_empty()
    }

    pub fn arrows(&self) -> &[usize] {
        &self.arrows
    }

    fn extend(&self, arrow: usize, new_target: usize) -> Path {
        let mut arrows = self.arrows.clone();
        arrows.push(arrow);
        Path { source: self.source, target: new_target, arrows }
    }

    /// "self then other"; None when the endpoints do not meet.
    pub fn compose(&self, other: &Path) -> Option<Path> {
        if self.target != other.source {
            return None;
        }
        let mut arrows = self.arrows.clone();
        arrows.extend_from_slice(&other.arrows);
        Some(Path { source: self.source, target: other.target, arrows })
    }

    pub fn display(&self, q: &Quiver) -> String {
        if self.arrows.is_empty() {
            format!("e_{}", q.vertex_name(self.source))
        } else {
            self.arrows
                .iter()
                .map(|&i| q.arrow(i).name.as_str())
                .collect::<Vec<_>>()
                .join(".")
        }
    }
}

impl Ord for Path {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.arrows.len(), &self.arrows, self.source).cmp(&(
            other.arrows.len(),
            &other.arrows,
            other.source,
        ))
    }
}

impl PartialOrd for Path {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
