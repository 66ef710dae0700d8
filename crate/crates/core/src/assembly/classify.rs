use std::collections::{BTreeSet, HashMap, VecDeque};

use petgraph::unionfind::UnionFind;
use serde::Serialize;

use super::{AssemblyError, CapModel, ClosedPolyhedron, GlobalGraph, SpanningTree};
use crate::cutforest::{is_monotone, validate_forest, CutForest};
use crate::geom::{triangles_overlap, PointF2, PointF3};
use crate::subdivision::VertexId;
use crate::unfold::{cut_along, develop, is_simple, overlap_witness, snap, Witness};

#[derive(Clone, Debug, Serialize)]
pub struct ArcLoopReport {
    pub cases: usize,
    pub with_loop: usize,
    /// Arc choices, one vertex pair per face, whose union has no cycle.
    pub without_loop: Vec<[(usize, usize); 4]>,
}

/// Every way of joining two vertices of each face of the tetrahedron by an arc gives
/// four edges on four vertices, so their union contains a cycle. Checks all 81 cases.
pub fn face_arc_loop_check() -> ArcLoopReport {
    let pairs: Vec<[(usize, usize); 3]> = (0..4)
        .map(|i| {
            let f: Vec<usize> = (0..4).filter(|&j| j != i).collect();
            [(f[0], f[1]), (f[1], f[2]), (f[0], f[2])]
        })
        .collect();
    let mut with_loop = 0;
    let mut without_loop = Vec::new();
    for case in 0..81 {
        let choice: [(usize, usize); 4] = std::array::from_fn(|i| pairs[i][case / 3usize.pow(i as u32) % 3]);
        let mut uf = UnionFind::<usize>::new(4);
        if choice.iter().any(|&(a, b)| !uf.union(a, b)) {
            with_loop += 1;
        } else {
            without_loop.push(choice);
        }
    }
    ArcLoopReport { cases: 81, with_loop, without_loop }
}

/// How a spanning tree meets the interior of one cap.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CapClass {
    /// A path of the tree through the interior joining two tetrahedron vertices.
    Arc { ends: (usize, usize), path: Vec<usize> },
    /// The tree restricts to a cut forest of the cap.
    Forest {
        links: Vec<(VertexId, VertexId)>,
        #[serde(skip)]
        forest: CutForest,
    },
}

impl CapClass {
    pub fn forest(&self) -> Option<&CutForest> {
        match self {
            CapClass::Forest { forest, .. } => Some(forest),
            CapClass::Arc { .. } => None,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Restriction {
    pub caps: Vec<CapClass>,
    pub arcs: usize,
    pub forest_caps: Vec<usize>,
}

/// Restricts `t` to the closure of the interior of each cap. A component joining two
/// corners is reported as an arc; otherwise every component holds exactly one corner
/// and the restriction is a cut forest of the cap's subdivision.
pub fn restrict_tree(
    k: &ClosedPolyhedron,
    e: &GlobalGraph,
    model: &CapModel,
    t: &SpanningTree,
) -> Result<Restriction, AssemblyError> {
    let s = &model.subdivision;
    let m = s.node_count();
    let nb = s.corner_count();
    let mut caps = Vec::new();
    for cap in 0..k.placements.len() {
        let mut adj = vec![Vec::new(); m];
        let mut uf = UnionFind::<usize>::new(m);
        for &i in &t.edges {
            let edge = &e.edges[i];
            if edge.is_side() || edge.caps[0] != cap {
                continue;
            }
            let (a, b) = edge.local;
            adj[a].push(b);
            adj[b].push(a);
            uf.union(a, b);
        }
        let mut arc = None;
        for v in s.interior_nodes() {
            let corners: Vec<usize> = (0..nb).filter(|&c| uf.equiv(c, v)).collect();
            match corners.len() {
                0 => {
                    return Err(AssemblyError::NotSpanning(format!(
                        "vertex {} of cap {cap} is cut off from the boundary",
                        s.node_id(v)
                    )))
                }
                1 => {}
                _ => {
                    arc = Some((corners[0], corners[1]));
                    break;
                }
            }
        }
        let parent = bfs_parents(&adj, 0..nb);
        caps.push(match arc {
            Some((a, b)) => {
                let mut path = vec![b];
                let mut parent = bfs_parents(&adj, [a]);
                parent[a] = usize::MAX;
                let mut v = b;
                while parent[v] != usize::MAX {
                    v = parent[v];
                    path.push(v);
                }
                path.reverse();
                CapClass::Arc {
                    ends: (k.global_node(cap, a), k.global_node(cap, b)),
                    path: path.into_iter().map(|v| k.global_node(cap, v)).collect(),
                }
            }
            None => {
                let forest = CutForest::new(nb, parent[nb..].to_vec());
                let check = validate_forest(s, &forest);
                if !check.valid {
                    return Err(AssemblyError::Graph(check.issues.join("; ")));
                }
                let links = s.interior_nodes().map(|v| (s.node_id(v), s.node_id(parent[v]))).collect();
                CapClass::Forest { links, forest }
            }
        });
    }
    let forest_caps: Vec<usize> = (0..caps.len()).filter(|&i| caps[i].forest().is_some()).collect();
    if forest_caps.is_empty() {
        return Err(AssemblyError::NoForestCap);
    }
    Ok(Restriction { arcs: caps.len() - forest_caps.len(), caps, forest_caps })
}

/// Breadth-first parents from `roots`; roots and unreached nodes keep `usize::MAX`.
fn bfs_parents(adj: &[Vec<usize>], roots: impl IntoIterator<Item = usize>) -> Vec<usize> {
    let mut parent = vec![usize::MAX; adj.len()];
    let mut seen = vec![false; adj.len()];
    let mut queue = VecDeque::new();
    for r in roots {
        seen[r] = true;
        queue.push_back(r);
    }
    while let Some(u) = queue.pop_front() {
        for &w in &adj[u] {
            if !seen[w] {
                seen[w] = true;
                parent[w] = u;
                queue.push_back(w);
            }
        }
    }
    parent
}

/// Layout of `K` cut along edges of its own triangulation.
#[derive(Clone, Debug, Serialize)]
pub struct MeshUnfolding {
    pub images: Vec<[PointF2; 3]>,
    pub pairs: Vec<(usize, usize)>,
    pub simple: bool,
}

fn place(p: PointF2, q: PointF2, a: &PointF3, b: &PointF3, c: &PointF3) -> PointF2 {
    let (u, w) = (b - a, c - a);
    let x = u.dot(&w) / u.norm();
    let y = u.cross(&w).norm() / u.norm();
    let d = (q - p).normalize();
    p + d * x + PointF2::new(-d.y, d.x) * y
}

/// Unfolds `K` cut along `cuts`, which must be edges of its triangulation whose
/// complement glues the faces into a disk, and tests the layout for overlaps exactly.
pub fn unfold_along_mesh_edges(k: &ClosedPolyhedron, cuts: &[(usize, usize)]) -> Result<MeshUnfolding, AssemblyError> {
    let cut: BTreeSet<(usize, usize)> = cuts.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
    let mut left = HashMap::new();
    for (i, t) in k.triangles.iter().enumerate() {
        for j in 0..3 {
            left.insert((t[j], t[(j + 1) % 3]), i);
        }
    }
    for &(a, b) in &cut {
        if !left.contains_key(&(a, b)) {
            return Err(AssemblyError::NotSpanning(format!("{a}-{b} is not an edge of the triangulation")));
        }
    }
    let v = &k.vertices;
    let n = k.face_count();
    let mut images: Vec<Option<[PointF2; 3]>> = vec![None; n];
    let t0 = k.triangles[0];
    let (p0, p1) = (PointF2::zeros(), PointF2::new((v[t0[1]] - v[t0[0]]).norm(), 0.0));
    images[0] = Some([p0, p1, place(p0, p1, &v[t0[0]], &v[t0[1]], &v[t0[2]])]);
    let mut queue = VecDeque::from([0]);
    while let Some(t) = queue.pop_front() {
        let (tri, img) = (k.triangles[t], images[t].expect("placed"));
        for j in 0..3 {
            let (a, b) = (tri[j], tri[(j + 1) % 3]);
            if cut.contains(&(a.min(b), a.max(b))) {
                continue;
            }
            let u = left[&(b, a)];
            if images[u].is_some() {
                continue;
            }
            let nt = k.triangles[u];
            let kb = nt.iter().position(|&x| x == b).expect("shared");
            let c = nt[(kb + 2) % 3];
            let (pb, pa) = (img[(j + 1) % 3], img[j]);
            let pc = place(pb, pa, &v[b], &v[a], &v[c]);
            let mut out = [PointF2::zeros(); 3];
            out[kb] = pb;
            out[(kb + 1) % 3] = pa;
            out[(kb + 2) % 3] = pc;
            images[u] = Some(out);
            queue.push_back(u);
        }
    }
    let images: Vec<[PointF2; 3]> = images
        .into_iter()
        .collect::<Option<_>>()
        .ok_or_else(|| AssemblyError::NotSpanning("the cut disconnects the surface".into()))?;
    let exact: Vec<_> = images.iter().map(|t| t.map(|p| snap(&p))).collect();
    let bbox = |t: &[PointF2; 3]| {
        let xs = t.map(|p| p.x);
        let ys = t.map(|p| p.y);
        let f = |a: [f64; 3], g: fn(f64, f64) -> f64| a.into_iter().reduce(g).expect("three");
        (f(xs, f64::min), f(xs, f64::max), f(ys, f64::min), f(ys, f64::max))
    };
    let boxes: Vec<_> = images.iter().map(bbox).collect();
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (boxes[i], boxes[j]);
            if a.0 > b.1 || b.0 > a.1 || a.2 > b.3 || b.2 > a.3 {
                continue;
            }
            if triangles_overlap(&exact[i], &exact[j]) == Ok(true) {
                pairs.push((i, j));
            }
        }
    }
    Ok(MeshUnfolding { images, simple: pairs.is_empty(), pairs })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckMethod {
    /// The overlap witness at a violated vertex of a forest-classified cap.
    CapWitness,
    /// No witness validated; the cap's development was scanned for overlaps.
    CapScan,
    /// Every tree edge is an edge of `K`, which was unfolded directly.
    MeshUnfolding,
    /// Every forest-classified cap is monotone and no overlap was found.
    Undecided,
}

#[derive(Clone, Debug, Serialize)]
pub struct GlobalUnfoldReport {
    pub restriction: Restriction,
    /// The forest-classified cap that decided the verdict.
    pub cap: Option<usize>,
    /// Violated vertices of that cap's forest.
    pub violations: usize,
    pub witness: Option<Witness>,
    pub simple: Option<bool>,
    /// Overlapping faces: of the cap's `Ḡ^T`, or of `K` for a mesh unfolding.
    pub overlap: Option<(usize, usize)>,
    pub method: CheckMethod,
}

/// Decides whether the unfolding of `K` along `t` is simple. When a forest-classified
/// cap is not monotone, its development along the restricted forest is a rigid copy of
/// part of the global layout, and an overlap there is an overlap of the whole unfolding.
pub fn global_unfold_check(
    k: &ClosedPolyhedron,
    e: &GlobalGraph,
    model: &CapModel,
    t: &SpanningTree,
) -> Result<GlobalUnfoldReport, AssemblyError> {
    let restriction = restrict_tree(k, e, model, t)?;
    let mut report = GlobalUnfoldReport {
        restriction,
        cap: None,
        violations: 0,
        witness: None,
        simple: None,
        overlap: None,
        method: CheckMethod::Undecided,
    };
    let mesh: BTreeSet<(usize, usize)> =
        k.triangles.iter().flat_map(|t| (0..3).map(move |j| (t[j].min(t[(j + 1) % 3]), t[j].max(t[(j + 1) % 3])))).collect();
    let ends: Vec<(usize, usize)> = t.edges.iter().map(|&i| e.edges[i].ends).collect();
    if ends.iter().all(|p| mesh.contains(p)) {
        let u = unfold_along_mesh_edges(k, &ends)?;
        report.simple = Some(u.simple);
        report.overlap = u.pairs.first().copied();
        report.method = CheckMethod::MeshUnfolding;
        return Ok(report);
    }
    let s = &model.subdivision;
    for &j in &report.restriction.forest_caps.clone() {
        let f = report.restriction.caps[j].forest().expect("forest cap").clone();
        let mono = is_monotone(s, &f);
        if mono.monotone {
            continue;
        }
        let violations = mono.violations();
        let dev = develop(cut_along(model.triangulation.clone(), s, &f)?)?;
        report.cap = Some(j);
        report.violations = violations.len();
        for v in &violations {
            let w = overlap_witness(&dev, s, &f, v.node, v.lambda, model.beta)?;
            if let (true, Some(pair)) = (w.valid, w.overlap) {
                report.simple = Some(false);
                report.overlap = Some(pair);
                report.witness = Some(w);
                report.method = CheckMethod::CapWitness;
                return Ok(report);
            }
        }
        let scan = is_simple(&dev);
        if !scan.simple {
            report.simple = Some(false);
            report.overlap = scan.overlap;
            report.method = CheckMethod::CapScan;
            return Ok(report);
        }
    }
    Ok(report)
}
