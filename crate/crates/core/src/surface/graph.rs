use std::collections::HashMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use super::{Corridor, GeodesicPath, Surface, SurfaceError};
use crate::geom::to_f64;
use crate::subdivision::{delta, VertexId, WeightedSubdivision};

#[derive(Clone, Debug, Serialize)]
pub struct PseudoEdge {
    pub ends: (VertexId, VertexId),
    pub nodes: (usize, usize),
    pub path: GeodesicPath,
    pub planar_length: f64,
    /// `δ` minus the largest sampled distance of the projected path from the edge.
    pub corridor_margin: f64,
}

impl PseudoEdge {
    /// `length / planar_length - 1`.
    pub fn relative_excess(&self) -> f64 {
        self.path.length / self.planar_length - 1.0
    }
}

/// Interior angle on the cap of a face of the pseudo-edge graph at one of its corners.
#[derive(Clone, Debug, Serialize)]
pub struct FaceCorner {
    pub face: usize,
    pub vertex: VertexId,
    pub angle: f64,
}

/// `Ḡ`: one geodesic per edge of the subdivision graph.
#[derive(Clone, Debug, Serialize)]
pub struct PseudoEdgeGraph {
    /// In the subdivision's edge order.
    pub edges: Vec<PseudoEdge>,
    pub delta: f64,
    /// Whether the pseudo-edges leave every vertex in the cyclic order of the planar edges.
    pub cyclic_order_ok: bool,
    pub order_issues: Vec<String>,
    pub face_corners: Vec<FaceCorner>,
    #[serde(skip)]
    index: HashMap<(usize, usize), usize>,
}

impl PseudoEdgeGraph {
    /// The pseudo-edge between two nodes, oriented from `a` to `b`.
    pub fn path(&self, a: usize, b: usize) -> Option<GeodesicPath> {
        let e = &self.edges[*self.index.get(&(a.min(b), a.max(b)))?];
        Some(if e.nodes.0 == a { e.path.clone() } else { e.path.reversed() })
    }

    pub fn edge(&self, a: usize, b: usize) -> Option<&PseudoEdge> {
        self.index.get(&(a.min(b), a.max(b))).map(|&i| &self.edges[i])
    }

    pub fn length(&self, a: usize, b: usize) -> Option<f64> {
        self.edge(a, b).map(|e| e.path.length)
    }

    /// Face corners whose angle on the cap is not below `π`.
    pub fn nonconvex_corners(&self) -> Vec<&FaceCorner> {
        self.face_corners.iter().filter(|c| c.angle >= PI).collect()
    }

    pub fn max_relative_excess(&self) -> f64 {
        self.edges.iter().map(PseudoEdge::relative_excess).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_corridor_margin(&self) -> f64 {
        self.edges.iter().map(|e| e.corridor_margin).fold(f64::INFINITY, f64::min)
    }
}

/// Angular position at `v` of the first segment of `path`, which starts at `v`.
fn departure(surface: &Surface, v: usize, path: &GeodesicPath) -> Option<f64> {
    let dir = path.positions[1] - path.positions[0];
    surface.angular_position(v, path.strip[0], &dir)
}

fn check_mesh(surface: &Surface, s: &WeightedSubdivision) -> Result<(), SurfaceError> {
    let mesh = &surface.mesh;
    if mesh.node_count() != s.node_count() || mesh.corner_count != s.corner_count() {
        return Err(SurfaceError::Mismatch(format!(
            "{} nodes and {} corners against {} and {}",
            mesh.node_count(),
            mesh.corner_count,
            s.node_count(),
            s.corner_count()
        )));
    }
    if let Some(v) = mesh.flagged().first() {
        return Err(SurfaceError::Mismatch(format!("node {v} is not a vertex of the cap")));
    }
    Ok(())
}

fn pseudo_edges(surface: &Surface, s: &WeightedSubdivision) -> Result<(Vec<PseudoEdge>, f64), SurfaceError> {
    check_mesh(surface, s)?;
    let d = delta(s).ok_or_else(|| SurfaceError::Mismatch("subdivision has no interior edges".into()))?;
    let delta_f = to_f64(&d.squared).sqrt();
    let edges = s
        .edge_nodes()
        .par_iter()
        .map(|&(a, b)| {
            let corridor = Corridor { a: s.node_point(a).clone(), b: s.node_point(b).clone(), delta_sq: d.squared.clone() };
            let path = surface.geodesic_between(&surface.vertex_point(a), &surface.vertex_point(b), None)?;
            let (dist, _) = corridor.check(&path);
            Ok(PseudoEdge {
                ends: (s.node_id(a), s.node_id(b)),
                nodes: (a, b),
                planar_length: (s.node_point(a).to_f64() - s.node_point(b).to_f64()).norm(),
                corridor_margin: delta_f - dist,
                path,
            })
        })
        .collect::<Result<Vec<_>, SurfaceError>>()?;
    Ok((edges, delta_f))
}

/// The geodesic over every edge of `G` without the corridor requirement. A negative
/// `corridor_margin` marks an edge whose geodesic leaves its corridor.
pub fn survey_pseudo_edges(surface: &Surface, s: &WeightedSubdivision) -> Result<Vec<PseudoEdge>, SurfaceError> {
    Ok(pseudo_edges(surface, s)?.0)
}

/// Induces `Ḡ` on the cap over `s`: a geodesic inside the `δ`-corridor of every edge.
/// Fails on the first edge, in edge order, whose geodesic leaves its corridor.
pub fn induce_pseudo_edge_graph(surface: &Surface, s: &WeightedSubdivision) -> Result<PseudoEdgeGraph, SurfaceError> {
    let (edges, delta_f) = pseudo_edges(surface, s)?;
    if let Some(e) = edges.iter().find(|e| e.corridor_margin <= 0.0) {
        return Err(SurfaceError::Corridor {
            edge: format!("{}-{}", e.ends.0, e.ends.1),
            distance: delta_f - e.corridor_margin,
            delta: delta_f,
        });
    }
    let index = edges.iter().enumerate().map(|(i, e)| ((e.nodes.0.min(e.nodes.1), e.nodes.0.max(e.nodes.1)), i)).collect();
    let mut g = PseudoEdgeGraph { edges, delta: delta_f, cyclic_order_ok: true, order_issues: Vec::new(), face_corners: Vec::new(), index };

    let mut position: HashMap<(usize, usize), f64> = HashMap::new();
    for v in 0..s.node_count() {
        let mut around: Vec<(f64, usize)> = Vec::new();
        for &w in s.neighbors(v) {
            let path = g.path(v, w).expect("edge of G");
            let p = departure(surface, v, &path)
                .ok_or_else(|| SurfaceError::Mismatch(format!("pseudo-edge {}-{} leaves outside the fan", s.node_id(v), s.node_id(w))))?;
            position.insert((v, w), p);
            around.push((p, w));
        }
        around.sort_by(|a, b| a.0.total_cmp(&b.0));
        let on_cap: Vec<usize> = around.iter().map(|x| x.1).collect();
        let planar = s.ccw_neighbors(v);
        if !same_cycle(&on_cap, &planar) {
            g.cyclic_order_ok = false;
            g.order_issues.push(format!("pseudo-edges at {} leave in a different cyclic order", s.node_id(v)));
        }
    }
    for (fi, f) in s.face_nodes().iter().enumerate() {
        let k = f.len();
        for i in 0..k {
            let (u, v, w) = (f[(i + k - 1) % k], f[i], f[(i + 1) % k]);
            let cone = surface.mesh.angle_sum(v);
            let mut angle = position[&(v, u)] - position[&(v, w)];
            if !s.is_corner_node(v) {
                angle = angle.rem_euclid(cone);
            }
            g.face_corners.push(FaceCorner { face: fi, vertex: s.node_id(v), angle });
        }
    }
    Ok(g)
}

fn same_cycle(a: &[usize], b: &[usize]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    if a.is_empty() {
        return true;
    }
    let Some(k) = b.iter().position(|&x| x == a[0]) else {
        return false;
    };
    (0..a.len()).all(|i| a[i] == b[(i + k) % b.len()])
}
