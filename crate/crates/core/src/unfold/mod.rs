//! Cutting a cap along a cut forest, laying the cut surface out in the plane, the
//! multivalued map `ψ`, approximate centers of rotation, simplicity and the overlap
//! witness at a violated vertex.

mod develop;
mod simple;
mod witness;

use std::collections::{BTreeMap, HashMap};

use petgraph::unionfind::UnionFind;

use crate::capsolver::CapError;
use crate::cutforest::{validate_forest, CutForest};
use crate::subdivision::WeightedSubdivision;
use crate::surface::{PseudoTriangulation, SurfaceError};

pub use develop::{develop, Development, RotationIdentity};
pub use simple::{faces_overlap, is_simple, snap, Simplicity, SNAP};
pub use witness::{
    beta_threshold, overlap_witness, unfold_cap, CapUnfolding, ThresholdOptions, ThresholdProbe, ThresholdReport,
    Witness,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum UnfoldError {
    #[error("forest edge {0} is not an edge of the triangulation")]
    MissingEdge(String),
    #[error("forest does not match the subdivision: {0}")]
    Forest(String),
    #[error("cut surface is not a disk: V - E + F = {0}")]
    NotDisk(i64),
    #[error("total angle {angle:.12} at a boundary copy of node {node} is not below 2π")]
    AngleTooLarge { node: usize, angle: f64 },
    #[error("glued edges disagree by {0:.3e}")]
    Inconsistent(f64),
    #[error("point ({0}, {1}) is not in face {2}")]
    NotInFace(f64, f64, usize),
    #[error("node {0} is not the child of a forest edge")]
    NotOnForest(usize),
    #[error("beta must be positive")]
    ZeroBeta,
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("cap solve did not converge (residual {0:.3e})")]
    Solve(f64),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error(transparent)]
    Cap(#[from] CapError),
}

/// `C_{β,F}`: the triangles of `Ḡ^T` glued along every interior edge that is not cut.
#[derive(Clone, Debug)]
pub struct CutSurface {
    pub triangulation: PseudoTriangulation,
    /// Forest edges as (child, parent).
    pub cuts: Vec<(usize, usize)>,
    /// Interior edges of `G^T` that stay glued, as sorted pairs.
    pub glued: Vec<(usize, usize)>,
    /// Sides of the polygon, counterclockwise.
    pub boundary: Vec<(usize, usize)>,
    /// The boundary edge `e₀` kept fixed by the development, counterclockwise.
    pub base: (usize, usize),
    /// Vertex copy at each corner of each face.
    pub corner_copies: Vec<[usize; 3]>,
    /// Node of `G^T` under each vertex copy.
    pub copy_nodes: Vec<usize>,
    left: HashMap<(usize, usize), usize>,
}

impl CutSurface {
    pub fn face_count(&self) -> usize {
        self.corner_copies.len()
    }

    pub fn copy_count(&self) -> usize {
        self.copy_nodes.len()
    }

    /// The face with `a -> b` on its counterclockwise boundary.
    pub fn face_left(&self, a: usize, b: usize) -> Option<usize> {
        self.left.get(&(a, b)).copied()
    }

    pub fn nodes(&self, t: usize) -> [usize; 3] {
        self.triangulation.planar.triangles[t].nodes
    }

    /// Position of node `n` among the corners of face `t`.
    pub fn corner_index(&self, t: usize, n: usize) -> Option<usize> {
        self.nodes(t).iter().position(|&m| m == n)
    }

    pub fn is_cut(&self, a: usize, b: usize) -> bool {
        self.cuts.iter().any(|&(c, p)| (c, p) == (a, b) || (c, p) == (b, a))
    }

    /// Copies of node `n`, one per sector between consecutive cuts.
    pub fn copies_of(&self, n: usize) -> Vec<usize> {
        (0..self.copy_count()).filter(|&c| self.copy_nodes[c] == n).collect()
    }

    /// Edges of the cut complex: each glued edge once, each cut edge twice.
    pub fn edge_count(&self) -> usize {
        self.glued.len() + self.boundary.len() + 2 * self.cuts.len()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.copy_count() as i64 - self.edge_count() as i64 + self.face_count() as i64
    }

    /// Boundary cycles of the cut complex as sequences of vertex copies, counterclockwise.
    /// A disk has exactly one.
    pub fn boundary_cycles(&self) -> Vec<Vec<usize>> {
        let mut next = BTreeMap::new();
        for (t, copies) in self.corner_copies.iter().enumerate() {
            let nodes = self.nodes(t);
            for k in 0..3 {
                let (a, b) = (nodes[k], nodes[(k + 1) % 3]);
                if self.face_left(b, a).is_none() || self.is_cut(a, b) {
                    next.insert(copies[k], copies[(k + 1) % 3]);
                }
            }
        }
        let mut cycles = Vec::new();
        while let Some((&start, _)) = next.iter().next() {
            let mut cycle = vec![start];
            let mut c = next.remove(&start).expect("present");
            while c != start {
                cycle.push(c);
                match next.remove(&c) {
                    Some(d) => c = d,
                    None => break,
                }
            }
            cycles.push(cycle);
        }
        cycles
    }
}

/// Cuts the cap along `f`. The triangulation carries the pseudo-edges and the flat
/// shapes of `Ḡ^T`.
pub fn cut_along(
    triangulation: PseudoTriangulation,
    s: &WeightedSubdivision,
    f: &CutForest,
) -> Result<CutSurface, UnfoldError> {
    let v = validate_forest(s, f);
    if !v.valid {
        return Err(UnfoldError::Forest(v.issues.join("; ")));
    }
    let tris = &triangulation.planar.triangles;
    let mut left = HashMap::new();
    for (i, t) in tris.iter().enumerate() {
        for k in 0..3 {
            left.insert((t.nodes[k], t.nodes[(k + 1) % 3]), i);
        }
    }
    let cuts: Vec<(usize, usize)> = f.edges().collect();
    for &(c, p) in &cuts {
        if !left.contains_key(&(c, p)) || !left.contains_key(&(p, c)) {
            return Err(UnfoldError::MissingEdge(format!("{}-{}", s.node_id(c), s.node_id(p))));
        }
    }
    let mut glued = Vec::new();
    let mut boundary = Vec::new();
    for (a, b) in triangulation.planar.edges() {
        match (left.contains_key(&(a, b)), left.contains_key(&(b, a))) {
            (true, true) if !f.has_edge(a, b) => glued.push((a, b)),
            (true, true) => {}
            (true, false) => boundary.push((a, b)),
            _ => boundary.push((b, a)),
        }
    }
    let mut uf = UnionFind::<usize>::new(3 * tris.len());
    for &(a, b) in &glued {
        let (t1, t2) = (left[&(a, b)], left[&(b, a)]);
        for n in [a, b] {
            let k1 = tris[t1].nodes.iter().position(|&m| m == n).expect("corner");
            let k2 = tris[t2].nodes.iter().position(|&m| m == n).expect("corner");
            uf.union(3 * t1 + k1, 3 * t2 + k2);
        }
    }
    let mut ids: BTreeMap<usize, usize> = BTreeMap::new();
    let mut copy_nodes = Vec::new();
    let corner_copies = tris
        .iter()
        .enumerate()
        .map(|(i, t)| {
            std::array::from_fn(|k| {
                let root = uf.find(3 * i + k);
                *ids.entry(root).or_insert_with(|| {
                    copy_nodes.push(t.nodes[k]);
                    copy_nodes.len() - 1
                })
            })
        })
        .collect();
    let (b0, b1) = s.base_edge();
    let cs = CutSurface { triangulation, cuts, glued, boundary, base: (b0, b1), corner_copies, copy_nodes, left };
    match cs.euler_characteristic() {
        1 => Ok(cs),
        chi => Err(UnfoldError::NotDisk(chi)),
    }
}
