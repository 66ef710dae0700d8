//! Cut forests of a subdivision graph: parent maps rooted at boundary corners, centers
//! of rotation and Tarasov monotonicity.

mod enumerate;
mod search;

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::geom::{serialize_opt_rational, serialize_rational, to_f64, PointR2, Rational};
use crate::subdivision::{VertexId, WeightedSubdivision};

pub use enumerate::{count_forests, enumerate_forests, ForestIter, ENUMERATION_LIMIT};
pub use search::{exists_monotone_forest, sample_forest, sample_forests, SearchOptions, SearchOutcome, SearchReport};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ForestError {
    #[error("node {0} is not on the forest")]
    NotOnForest(usize),
    #[error("invalid forest: {0}")]
    Invalid(String),
    #[error("{interior} interior vertices exceed the enumeration limit of {limit}; sample forests instead")]
    TooLarge { interior: usize, limit: usize },
}

/// A parent for every interior node. Node indices follow the subdivision: corners first.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CutForest {
    corner_count: usize,
    parent: Vec<usize>,
}

impl CutForest {
    /// `parent[i]` is the parent of interior node `corner_count + i`.
    pub fn new(corner_count: usize, parent: Vec<usize>) -> Self {
        CutForest { corner_count, parent }
    }

    pub fn from_ids(s: &WeightedSubdivision, map: &BTreeMap<VertexId, VertexId>) -> Result<Self, ForestError> {
        let node = |id: &VertexId| s.node_of(*id).map_err(|e| ForestError::Invalid(e.to_string()));
        let mut parent = vec![usize::MAX; s.node_count() - s.corner_count()];
        for (c, p) in map {
            let c = node(c)?;
            if c < s.corner_count() {
                return Err(ForestError::Invalid(format!("corner {} has a parent", s.node_id(c))));
            }
            parent[c - s.corner_count()] = node(p)?;
        }
        if let Some(i) = parent.iter().position(|&p| p == usize::MAX) {
            return Err(ForestError::Invalid(format!("{} has no parent", s.node_id(s.corner_count() + i))));
        }
        Ok(CutForest::new(s.corner_count(), parent))
    }

    pub fn to_ids(&self, s: &WeightedSubdivision) -> BTreeMap<VertexId, VertexId> {
        self.edges().map(|(c, p)| (s.node_id(c), s.node_id(p))).collect()
    }

    pub fn corner_count(&self) -> usize {
        self.corner_count
    }

    pub fn node_count(&self) -> usize {
        self.corner_count + self.parent.len()
    }

    pub fn is_root(&self, v: usize) -> bool {
        v < self.corner_count
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        v.checked_sub(self.corner_count).and_then(|i| self.parent.get(i).copied())
    }

    pub fn parents(&self) -> &[usize] {
        &self.parent
    }

    /// Child-parent pairs, in child order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.parent.iter().enumerate().map(|(i, &p)| (self.corner_count + i, p))
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.parent(a) == Some(b) || self.parent(b) == Some(a)
    }

    pub fn children(&self, v: usize) -> Vec<usize> {
        self.edges().filter(|&(_, p)| p == v).map(|(c, _)| c).collect()
    }

    /// `v` followed by its ancestors up to the root, or `None` on a cycle.
    pub fn ancestral_path(&self, v: usize) -> Option<Vec<usize>> {
        let mut path = vec![v];
        let mut cur = v;
        while let Some(p) = self.parent(cur) {
            if path.len() > self.node_count() {
                return None;
            }
            path.push(p);
            cur = p;
        }
        Some(path)
    }

    pub fn root_of(&self, v: usize) -> Option<usize> {
        self.ancestral_path(v).and_then(|p| p.last().copied())
    }

    /// Interior nodes in an order where every child precedes its parent.
    pub fn bottom_up(&self) -> Vec<usize> {
        let n = self.node_count();
        let mut depth = vec![0usize; n];
        for v in self.corner_count..n {
            depth[v] = self.ancestral_path(v).map_or(0, |p| p.len() - 1);
        }
        let mut order: Vec<usize> = (self.corner_count..n).collect();
        order.sort_by_key(|&v| std::cmp::Reverse(depth[v]));
        order
    }

    /// Interior nodes whose ancestral path passes through `x`.
    pub fn descendants(&self, x: usize) -> Result<Vec<usize>, ForestError> {
        if x >= self.node_count() {
            return Err(ForestError::NotOnForest(x));
        }
        let mut out: Vec<usize> =
            (self.corner_count..self.node_count()).filter(|&v| self.ancestral_path(v).is_some_and(|p| p.contains(&x))).collect();
        out.sort_unstable();
        Ok(out)
    }

    /// Descendants of a point interior to the forest edge from `child` to its parent.
    pub fn edge_descendants(&self, child: usize) -> Result<Vec<usize>, ForestError> {
        if self.parent(child).is_none() {
            return Err(ForestError::NotOnForest(child));
        }
        self.descendants(child)
    }

    /// Number of interior nodes in the tree of each corner.
    pub fn tree_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.corner_count];
        for v in self.corner_count..self.node_count() {
            if let Some(r) = self.root_of(v) {
                sizes[r] += 1;
            }
        }
        sizes
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ForestValidation {
    pub valid: bool,
    pub issues: Vec<String>,
}

pub fn validate_forest(s: &WeightedSubdivision, f: &CutForest) -> ForestValidation {
    let mut issues = Vec::new();
    if f.corner_count != s.corner_count() || f.node_count() != s.node_count() {
        issues.push(format!(
            "forest has {} corners and {} nodes, subdivision {} and {}",
            f.corner_count,
            f.node_count(),
            s.corner_count(),
            s.node_count()
        ));
        return ForestValidation { valid: false, issues };
    }
    for (c, p) in f.edges() {
        if p >= s.node_count() {
            issues.push(format!("{} has parent {p} out of range", s.node_id(c)));
        } else if c == p {
            issues.push(format!("{} is its own parent", s.node_id(c)));
        } else if !s.has_edge(c, p) {
            issues.push(format!("{}-{} is not an edge of G", s.node_id(c), s.node_id(p)));
        }
    }
    if issues.is_empty() {
        for v in s.interior_nodes() {
            if f.ancestral_path(v).is_none() {
                issues.push(format!("{} lies on a cycle or below one", s.node_id(v)));
            }
        }
    }
    ForestValidation { valid: issues.is_empty(), issues }
}

/// `c_x`: the weighted centroid of the descendants of node `x`, with `α_x`.
pub fn center_of_rotation(s: &WeightedSubdivision, f: &CutForest, x: usize) -> Result<(PointR2, Rational), ForestError> {
    let d = f.descendants(x)?;
    s.weighted_centroid(&d).ok_or(ForestError::NotOnForest(x))
}

/// Descendant weight sums `α_v` and weighted position sums for every node, exact.
pub fn subtree_sums(s: &WeightedSubdivision, f: &CutForest) -> (Vec<Rational>, Vec<PointR2>) {
    let n = s.node_count();
    let mut alpha = vec![Rational::zero(); n];
    let mut moment = vec![PointR2::origin(); n];
    for v in s.interior_nodes() {
        let w = s.node_weight(v).expect("interior");
        alpha[v] = w.clone();
        moment[v] = s.node_point(v).scale(w);
    }
    for v in f.bottom_up() {
        if let Some(p) = f.parent(v) {
            let (a, m) = (alpha[v].clone(), moment[v].clone());
            alpha[p] += a;
            moment[p] = &moment[p] + &m;
        }
    }
    (alpha, moment)
}

#[derive(Clone, Debug, Serialize)]
pub struct VertexCheck {
    pub vertex: VertexId,
    pub node: usize,
    pub parent: VertexId,
    pub center: PointR2,
    #[serde(serialize_with = "serialize_rational")]
    pub alpha: Rational,
    /// `⟨p* − p, p − c⟩`.
    #[serde(serialize_with = "serialize_rational")]
    pub product: Rational,
    pub holds: bool,
    /// `λ²` when the condition fails.
    #[serde(serialize_with = "serialize_opt_rational")]
    pub lambda_sq: Option<Rational>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Violation {
    pub vertex: VertexId,
    pub node: usize,
    /// `λ*² = ⟨p* − p, p − c⟩² / |p* − p|²`.
    #[serde(serialize_with = "serialize_rational")]
    pub lambda_sq: Rational,
    pub lambda: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct MonotonicityReport {
    pub monotone: bool,
    pub checks: Vec<VertexCheck>,
    /// The vertex with the largest margin `λ*`, when any condition fails.
    pub worst: Option<Violation>,
}

impl MonotonicityReport {
    /// Every failing vertex with its margin, strongest first.
    pub fn violations(&self) -> Vec<Violation> {
        let mut out: Vec<Violation> = self
            .checks
            .iter()
            .filter_map(|c| {
                let lambda_sq = c.lambda_sq.clone()?;
                Some(Violation { vertex: c.vertex, node: c.node, lambda: to_f64(&lambda_sq).sqrt(), lambda_sq })
            })
            .collect();
        out.sort_by(|a, b| b.lambda_sq.cmp(&a.lambda_sq).then(a.node.cmp(&b.node)));
        out
    }
}

/// Evaluates `⟨p_i* − p_i, p_i − c_i⟩ ≥ 0` exactly at every interior vertex.
pub fn is_monotone(s: &WeightedSubdivision, f: &CutForest) -> MonotonicityReport {
    let (alpha, moment) = subtree_sums(s, f);
    let mut checks = Vec::new();
    let mut worst: Option<Violation> = None;
    for v in s.interior_nodes() {
        let p = s.node_point(v);
        let parent = f.parent(v).expect("interior");
        let c = moment[v].scale(&(Rational::from_integer(1.into()) / &alpha[v]));
        let step = s.node_point(parent) - p;
        let product = step.dot(&(p - &c));
        let holds = !product.is_negative();
        let lambda_sq = (!holds).then(|| &product * &product / step.norm_sq());
        if let Some(l) = &lambda_sq {
            if worst.as_ref().is_none_or(|w| *l > w.lambda_sq) {
                worst = Some(Violation { vertex: s.node_id(v), node: v, lambda: to_f64(l).sqrt(), lambda_sq: l.clone() });
            }
        }
        checks.push(VertexCheck {
            vertex: s.node_id(v),
            node: v,
            parent: s.node_id(parent),
            center: c,
            alpha: alpha[v].clone(),
            product,
            holds,
            lambda_sq,
        });
    }
    MonotonicityReport { monotone: worst.is_none(), checks, worst }
}
