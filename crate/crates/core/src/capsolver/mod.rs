//! Convex caps over a convex polygon with prescribed curvature at given interior
//! points: upper hulls of lifted points, angle-deficit curvature and a damped Newton
//! solver for the heights.

mod hull;
mod solve;

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::geom::{to_f64, PointF2, PointF3};
use crate::subdivision::WeightedSubdivision;

pub use hull::lift_upper_hull;
pub use solve::{cone_heights, paraboloid_heights, solve_cap, solve_cap_from, Init, SolveOptions, SolveReport};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CapError {
    #[error("invalid cap spec: {0}")]
    InvalidSpec(String),
    #[error("degenerate hull: {0}")]
    Degenerate(String),
    #[error("vertex {0} is a boundary corner")]
    BoundaryVertex(usize),
    #[error("vertex {0} is out of range")]
    NoSuchVertex(usize),
    #[error("no convergence after {iterations} iterations (best residual {best_residual:.3e})")]
    NonConvergence { iterations: usize, best_residual: f64 },
}

/// Target curvatures at the interior points of a convex polygon.
#[derive(Clone, Debug, Serialize)]
pub struct CapSpec {
    pub boundary: Vec<PointF2>,
    pub points: Vec<PointF2>,
    pub beta: Vec<f64>,
    pub total: f64,
}

impl CapSpec {
    pub fn new(boundary: Vec<PointF2>, points: Vec<PointF2>, beta: Vec<f64>) -> Result<Self, CapError> {
        if points.len() != beta.len() {
            return Err(CapError::InvalidSpec(format!("{} points but {} curvatures", points.len(), beta.len())));
        }
        if beta.iter().any(|&b| !(b > 0.0) || !b.is_finite()) {
            return Err(CapError::InvalidSpec("curvatures must be positive".into()));
        }
        let total: f64 = beta.iter().sum();
        if total >= TAU {
            return Err(CapError::InvalidSpec(format!("total curvature {total} is not below 2*pi")));
        }
        Ok(CapSpec { boundary, points, beta, total })
    }

    /// `β_i = α_i β` from the subdivision's weights.
    pub fn from_subdivision(s: &WeightedSubdivision, beta: f64) -> Result<Self, CapError> {
        if !(beta > 0.0 && beta < TAU) {
            return Err(CapError::InvalidSpec(format!("total curvature {beta} outside (0, 2*pi)")));
        }
        let boundary = s.boundary.iter().map(|p| p.to_f64()).collect();
        let points = s.interior.iter().map(|v| v.point.to_f64()).collect();
        let b: Vec<f64> = s.interior.iter().map(|v| to_f64(&v.weight) * beta).collect();
        let mut spec = CapSpec::new(boundary, points, b)?;
        spec.total = beta;
        Ok(spec)
    }

    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for p in &self.boundary {
            for q in &self.boundary {
                d = d.max((p - q).norm());
            }
        }
        d
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HullStatus {
    /// A genuine vertex of the upper hull.
    Vertex,
    /// On the hull but inside a flat region; curvature zero.
    Coplanar,
    /// Strictly below the hull.
    Below,
}

/// A triangulated convex cap. Nodes are the polygon corners followed by the interior
/// points, in the order of the spec or subdivision.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(try_from = "CapMeshData")]
pub struct CapMesh {
    pub vertices: Vec<PointF3>,
    pub corner_count: usize,
    /// Counterclockwise when seen from above.
    pub triangles: Vec<[usize; 3]>,
    pub status: Vec<HullStatus>,
    /// Angle deficit per node; zero for corners and points below the hull.
    pub curvature: Vec<f64>,
    #[serde(skip)]
    vertex_faces: Vec<Vec<usize>>,
}

#[derive(Deserialize)]
struct CapMeshData {
    vertices: Vec<PointF3>,
    corner_count: usize,
    triangles: Vec<[usize; 3]>,
    status: Vec<HullStatus>,
}

impl TryFrom<CapMeshData> for CapMesh {
    type Error = CapError;

    fn try_from(d: CapMeshData) -> Result<Self, CapError> {
        let n = d.vertices.len();
        if d.corner_count < 3 || d.corner_count > n || d.status.len() != n {
            return Err(CapError::InvalidSpec(format!(
                "{n} vertices, {} corners and {} statuses do not fit together",
                d.corner_count,
                d.status.len()
            )));
        }
        if let Some(&v) = d.triangles.iter().flatten().find(|&&v| v >= n) {
            return Err(CapError::NoSuchVertex(v));
        }
        let mut mesh = CapMesh::from_parts(d.vertices, d.corner_count, d.triangles, d.status);
        mesh.refresh_curvature();
        Ok(mesh)
    }
}

/// Interior angle at `a` of the triangle `abc` in space.
pub fn corner_angle(a: &PointF3, b: &PointF3, c: &PointF3) -> f64 {
    let u = b - a;
    let w = c - a;
    u.cross(&w).norm().atan2(u.dot(&w))
}

impl CapMesh {
    pub(crate) fn from_parts(
        vertices: Vec<PointF3>,
        corner_count: usize,
        triangles: Vec<[usize; 3]>,
        status: Vec<HullStatus>,
    ) -> Self {
        let n = vertices.len();
        let mut vertex_faces = vec![Vec::new(); n];
        for (i, t) in triangles.iter().enumerate() {
            for &v in t {
                vertex_faces[v].push(i);
            }
        }
        CapMesh { vertices, corner_count, triangles, status, curvature: vec![0.0; n], vertex_faces }
    }

    pub(crate) fn refresh_curvature(&mut self) {
        for v in 0..self.vertices.len() {
            self.curvature[v] = if v < self.corner_count || self.status[v] == HullStatus::Below {
                0.0
            } else {
                self.angle_deficit(v)
            };
        }
    }

    pub fn node_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn interior_count(&self) -> usize {
        self.vertices.len() - self.corner_count
    }

    pub fn is_corner(&self, v: usize) -> bool {
        v < self.corner_count
    }

    pub fn faces_at(&self, v: usize) -> &[usize] {
        &self.vertex_faces[v]
    }

    pub fn projection(&self, v: usize) -> PointF2 {
        PointF2::new(self.vertices[v].x, self.vertices[v].y)
    }

    /// Sum of the face angles at `v`.
    pub fn angle_sum(&self, v: usize) -> f64 {
        self.vertex_faces[v]
            .iter()
            .map(|&t| {
                let tri = self.triangles[t];
                let k = tri.iter().position(|&x| x == v).expect("incident");
                corner_angle(&self.vertices[v], &self.vertices[tri[(k + 1) % 3]], &self.vertices[tri[(k + 2) % 3]])
            })
            .sum()
    }

    fn angle_deficit(&self, v: usize) -> f64 {
        TAU - self.angle_sum(v)
    }

    /// Neighbours of `v` in counterclockwise order around it.
    pub fn link(&self, v: usize) -> Vec<usize> {
        let mut next = std::collections::HashMap::new();
        for &t in &self.vertex_faces[v] {
            let tri = self.triangles[t];
            let k = tri.iter().position(|&x| x == v).expect("incident");
            next.insert(tri[(k + 1) % 3], tri[(k + 2) % 3]);
        }
        // open fans (corners) start at the neighbour with no predecessor
        let targets: std::collections::HashSet<usize> = next.values().copied().collect();
        let mut start = *next.keys().min().unwrap_or(&v);
        if let Some(&s) = next.keys().filter(|k| !targets.contains(k)).min() {
            start = s;
        }
        let mut ring = vec![start];
        let mut cur = start;
        while let Some(&n) = next.get(&cur) {
            if n == start || ring.len() > next.len() {
                break;
            }
            ring.push(n);
            cur = n;
        }
        ring
    }

    /// Angle deficit at an interior node.
    pub fn vertex_curvature(&self, v: usize) -> Result<f64, CapError> {
        if v >= self.vertices.len() {
            return Err(CapError::NoSuchVertex(v));
        }
        if self.is_corner(v) {
            return Err(CapError::BoundaryVertex(v));
        }
        Ok(self.curvature[v])
    }

    pub fn total_curvature(&self) -> f64 {
        (self.corner_count..self.vertices.len()).map(|v| self.curvature[v]).sum()
    }

    /// Geodesic turning of the boundary at corner `k`: `π` minus the total face angle.
    pub fn boundary_turning(&self, k: usize) -> f64 {
        PI - self.angle_sum(k)
    }

    /// `Σ deficits + Σ boundary turning`, which equals `2π` for a disk.
    pub fn gauss_bonnet_sum(&self) -> f64 {
        let deficits: f64 = (self.corner_count..self.vertices.len())
            .filter(|&v| self.status[v] != HullStatus::Below)
            .map(|v| self.angle_deficit(v))
            .sum();
        deficits + (0..self.corner_count).map(|k| self.boundary_turning(k)).sum::<f64>()
    }

    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for i in 0..self.corner_count {
            for j in 0..self.corner_count {
                d = d.max((self.projection(i) - self.projection(j)).norm());
            }
        }
        d
    }

    pub fn max_height(&self) -> f64 {
        self.vertices.iter().map(|p| p.z).fold(0.0, f64::max)
    }

    /// Nodes strictly below or flat on the hull.
    pub fn flagged(&self) -> Vec<usize> {
        (self.corner_count..self.vertices.len()).filter(|&v| self.status[v] != HullStatus::Vertex).collect()
    }

    /// Largest height of any node above the plane of a triangle not containing it,
    /// relative to the diameter; nonpositive up to rounding for a convex cap.
    pub fn convexity_violation(&self) -> f64 {
        let mut worst = f64::NEG_INFINITY;
        let diam = self.diameter().max(f64::MIN_POSITIVE);
        for t in &self.triangles {
            let [a, b, c] = t.map(|i| self.vertices[i]);
            let nrm = (b - a).cross(&(c - a));
            let len = nrm.norm();
            if len == 0.0 {
                continue;
            }
            let nrm = nrm / len;
            for (v, p) in self.vertices.iter().enumerate() {
                if t.contains(&v) || self.status[v] == HullStatus::Below {
                    continue;
                }
                worst = worst.max(nrm.dot(&(p - a)) / diam);
            }
        }
        worst
    }

    pub fn is_convex(&self, tol: f64) -> bool {
        self.convexity_violation() <= tol
    }

    /// Terrain check: every boundary corner at height zero, triangles counterclockwise
    /// in projection and their projected areas summing to the polygon's area.
    pub fn terrain_defects(&self, polygon_area: f64) -> Vec<String> {
        let mut bad = Vec::new();
        for k in 0..self.corner_count {
            if self.vertices[k].z != 0.0 {
                bad.push(format!("corner {k} at height {}", self.vertices[k].z));
            }
        }
        let mut area = 0.0;
        for (i, t) in self.triangles.iter().enumerate() {
            let [a, b, c] = t.map(|v| self.projection(v));
            if crate::geom::orient2d_f64(&a, &b, &c) <= 0 {
                bad.push(format!("triangle {i} is not counterclockwise in projection"));
            }
            area += (b - a).perp(&(c - a)) / 2.0;
        }
        if (area - polygon_area).abs() > 1e-9 * polygon_area.abs().max(1.0) {
            bad.push(format!("projected area {area} differs from {polygon_area}"));
        }
        bad
    }

    /// Unit upward normal of a triangle.
    pub fn normal(&self, t: usize) -> PointF3 {
        let [a, b, c] = self.triangles[t].map(|i| self.vertices[i]);
        (b - a).cross(&(c - a)).normalize()
    }
}
