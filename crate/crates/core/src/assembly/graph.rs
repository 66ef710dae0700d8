use std::collections::HashMap;

use petgraph::unionfind::UnionFind;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{AssemblyError, ClosedPolyhedron};
use crate::subdivision::WeightedSubdivision;
use crate::surface::PseudoEdgeGraph;

#[derive(Clone, Debug, Serialize)]
pub struct GlobalEdge {
    /// Global vertices, smaller first.
    pub ends: (usize, usize),
    /// Caps carrying the edge: two for a tetrahedron side, one otherwise.
    pub caps: Vec<usize>,
    /// Cap nodes of the ends, in the order of `ends`.
    pub local: (usize, usize),
    /// Length on the standalone cap.
    pub length: f64,
    /// Length of the placed polyline on `K`.
    pub placed_length: f64,
}

impl GlobalEdge {
    pub fn is_side(&self) -> bool {
        self.caps.len() > 1
    }

    pub fn other(&self, v: usize) -> usize {
        if self.ends.0 == v {
            self.ends.1
        } else {
            self.ends.0
        }
    }
}

/// `E = ∪ E_i`: the pseudo-edges of all four caps on `K`.
#[derive(Clone, Debug, Serialize)]
pub struct GlobalGraph {
    pub vertex_count: usize,
    pub edges: Vec<GlobalEdge>,
    #[serde(skip)]
    adjacency: Vec<Vec<usize>>,
    #[serde(skip)]
    index: HashMap<(usize, usize), usize>,
}

impl GlobalGraph {
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Indices of the edges at `v`.
    pub fn incident(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn find(&self, a: usize, b: usize) -> Option<usize> {
        self.index.get(&(a.min(b), a.max(b))).copied()
    }

    /// Largest difference between a pseudo-edge's length on `K` and on its cap.
    pub fn max_length_deviation(&self) -> f64 {
        self.edges.iter().map(|e| (e.placed_length - e.length).abs()).fold(0.0, f64::max)
    }
}

/// Builds `E` from the pseudo-edge graph `g` shared by the four congruent caps.
pub fn global_graph(k: &ClosedPolyhedron, s: &WeightedSubdivision, g: &PseudoEdgeGraph) -> Result<GlobalGraph, AssemblyError> {
    let mut edges: Vec<GlobalEdge> = Vec::new();
    let mut index = HashMap::new();
    for (cap, place) in k.placements.iter().enumerate() {
        for &(a, b) in s.edge_nodes() {
            let path = g.path(a, b).ok_or_else(|| AssemblyError::Graph(format!("{}-{}", s.node_id(a), s.node_id(b))))?;
            let pts: Vec<_> = path.positions.iter().map(|p| place.apply(p)).collect();
            let placed: f64 = pts.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
            let (ga, gb) = (k.global_node(cap, a), k.global_node(cap, b));
            let key = (ga.min(gb), ga.max(gb));
            match index.get(&key) {
                Some(&i) => {
                    let e: &mut GlobalEdge = &mut edges[i];
                    e.caps.push(cap);
                    if (placed - e.length).abs() > (e.placed_length - e.length).abs() {
                        e.placed_length = placed;
                    }
                }
                None => {
                    let local = if ga < gb { (a, b) } else { (b, a) };
                    index.insert(key, edges.len());
                    edges.push(GlobalEdge { ends: key, caps: vec![cap], local, length: path.length, placed_length: placed });
                }
            }
        }
    }
    let mut adjacency = vec![Vec::new(); k.vertex_count()];
    for (i, e) in edges.iter().enumerate() {
        adjacency[e.ends.0].push(i);
        adjacency[e.ends.1].push(i);
    }
    Ok(GlobalGraph { vertex_count: k.vertex_count(), edges, adjacency, index })
}

/// A spanning tree of `E`, as edge indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpanningTree {
    pub edges: Vec<usize>,
    pub root: usize,
}

impl SpanningTree {
    /// Checks that `edges` span every vertex without a cycle.
    pub fn new(e: &GlobalGraph, mut edges: Vec<usize>, root: usize) -> Result<Self, AssemblyError> {
        edges.sort_unstable();
        edges.dedup();
        if edges.len() + 1 != e.vertex_count {
            return Err(AssemblyError::NotSpanning(format!("{} edges for {} vertices", edges.len(), e.vertex_count)));
        }
        let mut uf = UnionFind::<usize>::new(e.vertex_count);
        for &i in &edges {
            let edge = e.edges.get(i).ok_or_else(|| AssemblyError::NotSpanning(format!("edge {i} is not in E")))?;
            if !uf.union(edge.ends.0, edge.ends.1) {
                return Err(AssemblyError::NotSpanning(format!("edge {:?} closes a cycle", edge.ends)));
            }
        }
        Ok(SpanningTree { edges, root })
    }

    pub fn contains(&self, edge: usize) -> bool {
        self.edges.binary_search(&edge).is_ok()
    }
}

/// A uniformly random spanning tree of `E` by loop-erased random walks.
pub fn wilson_tree<R: Rng>(e: &GlobalGraph, root: usize, rng: &mut R) -> SpanningTree {
    let n = e.vertex_count;
    let mut in_tree = vec![false; n];
    in_tree[root] = true;
    let mut next = vec![usize::MAX; n];
    for start in 0..n {
        let mut u = start;
        while !in_tree[u] {
            let inc = e.incident(u);
            next[u] = inc[rng.random_range(0..inc.len())];
            u = e.edges[next[u]].other(u);
        }
        let mut u = start;
        while !in_tree[u] {
            in_tree[u] = true;
            u = e.edges[next[u]].other(u);
        }
    }
    let mut edges: Vec<usize> = (0..n).filter(|&v| v != root).map(|v| next[v]).collect();
    edges.sort_unstable();
    SpanningTree { edges, root }
}

fn tree_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// `count` trees rooted at vertex 0; tree `i` depends only on `seed` and `i`.
pub fn sample_spanning_trees(e: &GlobalGraph, count: usize, seed: u64) -> Vec<SpanningTree> {
    (0..count).into_par_iter().map(|i| wilson_tree(e, 0, &mut tree_rng(seed, i))).collect()
}

/// Extends the forest `fixed` to a spanning tree, adding the remaining edges in a
/// seeded random order.
pub fn complete_tree(e: &GlobalGraph, fixed: &[usize], seed: u64) -> Result<SpanningTree, AssemblyError> {
    let mut uf = UnionFind::<usize>::new(e.vertex_count);
    let mut edges = Vec::new();
    for &i in fixed {
        let (a, b) = e.edges[i].ends;
        if !uf.union(a, b) {
            return Err(AssemblyError::NotSpanning(format!("fixed edge {:?} closes a cycle", (a, b))));
        }
        edges.push(i);
    }
    let mut rest: Vec<usize> = (0..e.edge_count()).collect();
    rest.shuffle(&mut tree_rng(seed, 0));
    for i in rest {
        let (a, b) = e.edges[i].ends;
        if uf.union(a, b) {
            edges.push(i);
        }
    }
    SpanningTree::new(e, edges, 0)
}
