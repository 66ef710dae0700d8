//! Four congruent caps over the faces of a regular tetrahedron, the global pseudo-edge
//! graph `E`, spanning trees of `E` and the global unfoldability check.

mod classify;
mod graph;

use std::collections::HashMap;
use std::f64::consts::PI;

use serde::Serialize;

use crate::capsolver::{solve_cap, CapError, CapMesh, CapSpec, SolveReport};
use crate::geom::{PointF2, PointF3};
use crate::subdivision::WeightedSubdivision;
use crate::surface::{induce_pseudo_edge_graph, pseudo_triangulation, PseudoEdgeGraph, PseudoTriangulation, Surface, SurfaceError};
use crate::unfold::UnfoldError;

pub use classify::{
    face_arc_loop_check, global_unfold_check, restrict_tree, unfold_along_mesh_edges, ArcLoopReport, CapClass,
    CheckMethod, GlobalUnfoldReport, MeshUnfolding, Restriction,
};
pub use graph::{complete_tree, global_graph, sample_spanning_trees, wilson_tree, GlobalEdge, GlobalGraph, SpanningTree};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AssemblyError {
    #[error("cap boundary must be a triangle, found {0} corners")]
    NotTriangle(usize),
    #[error("cap boundary is not equilateral: sides {0:?}")]
    NotEquilateral([f64; 3]),
    #[error("total angle {angle:.9} at cap corner {corner} is not below 2π/3; solve the cap at a smaller β")]
    CornerAngle { corner: usize, angle: f64 },
    #[error("assembled surface is not closed: {0}")]
    NotClosed(String),
    #[error("assembled surface is not convex: a vertex lies {0:.3e} outside a face plane; solve the cap at a smaller β")]
    NotConvex(f64),
    #[error("Euler characteristic {0}, expected 2")]
    Euler(i64),
    #[error("cap graph does not match the subdivision: {0}")]
    Graph(String),
    #[error("not a spanning tree of E: {0}")]
    NotSpanning(String),
    #[error("no cap restricts to a spanning forest")]
    NoForestCap,
    #[error("no β in the halving sequence from {0} admits the pseudo-edge graph")]
    NoWorkingBeta(f64),
    #[error(transparent)]
    Unfold(#[from] UnfoldError),
    #[error(transparent)]
    Cap(#[from] CapError),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
}

/// A solved cap with its pseudo-edge graph and `Ḡ^T`.
#[derive(Clone, Debug)]
pub struct CapModel {
    pub subdivision: WeightedSubdivision,
    pub beta: f64,
    pub surface: Surface,
    pub graph: PseudoEdgeGraph,
    pub triangulation: PseudoTriangulation,
    pub solve: SolveReport,
}

/// A `β` at which the pseudo-edge graph could not be induced.
#[derive(Clone, Debug, Serialize)]
pub struct BetaAttempt {
    pub beta: f64,
    pub error: String,
}

impl CapModel {
    pub fn solve(s: &WeightedSubdivision, beta: f64, tol: f64) -> Result<Self, AssemblyError> {
        let spec = CapSpec::from_subdivision(s, beta)?;
        let (mesh, solve) = solve_cap(&spec, tol)?;
        if !solve.converged {
            return Err(UnfoldError::Solve(solve.residual).into());
        }
        let surface = Surface::new(mesh);
        let graph = induce_pseudo_edge_graph(&surface, s)?;
        let triangulation = pseudo_triangulation(&surface, s, &graph)?;
        Ok(CapModel { subdivision: s.clone(), beta, surface, graph, triangulation, solve })
    }

    /// Solves at `beta`, `beta/2`, … down to `beta_min` and keeps the first cap whose
    /// pseudo-edge graph can be induced.
    pub fn solve_working(
        s: &WeightedSubdivision,
        beta: f64,
        beta_min: f64,
        tol: f64,
    ) -> Result<(Self, Vec<BetaAttempt>), AssemblyError> {
        let mut attempts = Vec::new();
        let mut b = beta;
        while b >= beta_min {
            match CapModel::solve(s, b, tol) {
                Ok(m) => return Ok((m, attempts)),
                Err(AssemblyError::Surface(e)) => attempts.push(BetaAttempt { beta: b, error: e.to_string() }),
                Err(e) => return Err(e),
            }
            b /= 2.0;
        }
        Err(AssemblyError::NoWorkingBeta(beta))
    }

    pub fn mesh(&self) -> &CapMesh {
        &self.surface.mesh
    }
}

/// Rigid motion taking a cap, drawn over the plane, onto one face of the tetrahedron.
#[derive(Clone, Debug, Serialize)]
pub struct CapPlacement {
    /// Tetrahedron vertices under the cap corners `b0`, `b1`, `b2`.
    pub corners: [usize; 3],
    origin: PointF2,
    axis: PointF2,
    anchor: PointF3,
    frame: [PointF3; 3],
}

impl CapPlacement {
    pub fn apply(&self, p: &PointF3) -> PointF3 {
        let d = PointF2::new(p.x, p.y) - self.origin;
        let a = d.dot(&self.axis);
        let b = self.axis.perp(&d);
        self.anchor + self.frame[0] * a + self.frame[1] * b + self.frame[2] * p.z
    }

    /// Outward unit normal of the face.
    pub fn normal(&self) -> PointF3 {
        self.frame[2]
    }
}

/// `K`: a closed triangulated surface with the cap of every triangle.
#[derive(Clone, Debug, Serialize)]
pub struct ClosedPolyhedron {
    pub vertices: Vec<PointF3>,
    /// Counterclockwise seen from outside.
    pub triangles: Vec<[usize; 3]>,
    pub triangle_caps: Vec<usize>,
    /// Global vertex of each cap node, per cap.
    pub cap_nodes: Vec<Vec<usize>>,
    pub placements: Vec<CapPlacement>,
    pub edge_length: f64,
}

/// Vertices of the regular tetrahedron with side `l`, centred at the origin, and its
/// faces oriented outward; face `i` is opposite vertex `i`.
pub fn regular_tetrahedron(l: f64) -> ([PointF3; 4], [[usize; 3]; 4]) {
    let k = l / (2.0 * 2f64.sqrt());
    let v = [
        PointF3::new(k, k, k),
        PointF3::new(k, -k, -k),
        PointF3::new(-k, k, -k),
        PointF3::new(-k, -k, k),
    ];
    let faces = std::array::from_fn(|i| {
        let mut f: Vec<usize> = (0..4).filter(|&j| j != i).collect();
        let n = (v[f[1]] - v[f[0]]).cross(&(v[f[2]] - v[f[0]]));
        if n.dot(&v[f[0]]) < 0.0 {
            f.swap(1, 2);
        }
        [f[0], f[1], f[2]]
    });
    (v, faces)
}

impl ClosedPolyhedron {
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn face_count(&self) -> usize {
        self.triangles.len()
    }

    fn directed_edges(&self) -> HashMap<(usize, usize), usize> {
        let mut count = HashMap::new();
        for t in &self.triangles {
            for k in 0..3 {
                *count.entry((t[k], t[(k + 1) % 3])).or_insert(0) += 1;
            }
        }
        count
    }

    pub fn edge_count(&self) -> usize {
        let d = self.directed_edges();
        d.keys().filter(|&&(a, b)| a < b || !d.contains_key(&(b, a))).count()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertex_count() as i64 - self.edge_count() as i64 + self.face_count() as i64
    }

    /// Edges not shared by exactly two consistently oriented triangles.
    pub fn closure_defects(&self) -> Vec<String> {
        let d = self.directed_edges();
        let mut out: Vec<String> = d
            .iter()
            .filter(|&(&(a, b), &n)| n != 1 || d.get(&(b, a)) != Some(&1))
            .map(|(&(a, b), &n)| format!("{a}->{b} used {n} times, reverse {}", d.get(&(b, a)).unwrap_or(&0)))
            .collect();
        out.sort();
        out
    }

    pub fn is_closed(&self) -> bool {
        self.closure_defects().is_empty()
    }

    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for (i, p) in self.vertices.iter().enumerate() {
            for q in &self.vertices[i + 1..] {
                d = d.max((p - q).norm());
            }
        }
        d
    }

    /// Largest distance of a vertex outside the plane of a triangle.
    pub fn convexity_violation(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for t in &self.triangles {
            let a = self.vertices[t[0]];
            let n = (self.vertices[t[1]] - a).cross(&(self.vertices[t[2]] - a));
            let len = n.norm();
            if len == 0.0 {
                continue;
            }
            let n = n / len;
            for v in &self.vertices {
                worst = worst.max(n.dot(&(v - a)));
            }
        }
        worst
    }

    /// Every vertex on or inside every face plane, within `rel · diameter`.
    pub fn is_convex(&self, rel: f64) -> bool {
        self.convexity_violation() <= rel * self.diameter()
    }

    /// Global vertex of node `n` of cap `i`.
    pub fn global_node(&self, cap: usize, n: usize) -> usize {
        self.cap_nodes[cap][n]
    }
}

/// Places congruent copies of `cap` over the four faces of the regular tetrahedron
/// whose side is the cap's boundary side, welding the shared corners.
pub fn assemble_tetrahedron(cap: &CapMesh) -> Result<ClosedPolyhedron, AssemblyError> {
    if cap.corner_count != 3 {
        return Err(AssemblyError::NotTriangle(cap.corner_count));
    }
    let p: [PointF2; 3] = std::array::from_fn(|k| cap.projection(k));
    let sides: [f64; 3] = std::array::from_fn(|k| (p[(k + 1) % 3] - p[k]).norm());
    let l = sides.iter().sum::<f64>() / 3.0;
    if sides.iter().any(|s| (s - l).abs() > 1e-9 * l) {
        return Err(AssemblyError::NotEquilateral(sides));
    }
    for corner in 0..3 {
        let angle = cap.angle_sum(corner);
        if angle >= 2.0 * PI / 3.0 {
            return Err(AssemblyError::CornerAngle { corner, angle });
        }
    }
    let (tv, faces) = regular_tetrahedron(l);
    let mut vertices: Vec<PointF3> = tv.to_vec();
    let mut triangles = Vec::new();
    let mut triangle_caps = Vec::new();
    let mut cap_nodes = Vec::new();
    let mut placements = Vec::new();
    let axis = (p[1] - p[0]) / sides[0];
    for (i, face) in faces.iter().enumerate() {
        let anchor = tv[face[0]];
        let e1 = (tv[face[1]] - anchor).normalize();
        let n = e1.cross(&(tv[face[2]] - anchor)).normalize();
        let placement = CapPlacement { corners: *face, origin: p[0], axis, anchor, frame: [e1, n.cross(&e1), n] };
        let mut nodes: Vec<usize> = face.to_vec();
        for v in 3..cap.node_count() {
            nodes.push(vertices.len());
            vertices.push(placement.apply(&cap.vertices[v]));
        }
        for t in &cap.triangles {
            triangles.push(t.map(|v| nodes[v]));
            triangle_caps.push(i);
        }
        cap_nodes.push(nodes);
        placements.push(placement);
    }
    let k = ClosedPolyhedron { vertices, triangles, triangle_caps, cap_nodes, placements, edge_length: l };
    if let Some(d) = k.closure_defects().first() {
        return Err(AssemblyError::NotClosed(d.clone()));
    }
    match k.euler_characteristic() {
        2 => {}
        chi => return Err(AssemblyError::Euler(chi)),
    }
    let v = k.convexity_violation();
    if v > 1e-9 * k.diameter() {
        return Err(AssemblyError::NotConvex(v));
    }
    Ok(k)
}
