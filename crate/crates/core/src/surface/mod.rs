//! Intrinsic geometry of a cap mesh: strip developments, shortest geodesics, the
//! induced pseudo-edge graph and the canonical map from the polygon onto the cap.

mod canonical;
mod geodesic;
mod graph;

use std::collections::HashMap;

use serde::Serialize;

use crate::capsolver::{CapError, CapMesh};
use crate::geom::{PlanarIsometry, PointF2, PointF3};

pub use canonical::{canonical_map, pseudo_triangulation, shape_deficits, CanonicalMap, PseudoTriangulation};
pub use geodesic::{Corridor, GeodesicPath};
pub use graph::{induce_pseudo_edge_graph, survey_pseudo_edges, FaceCorner, PseudoEdge, PseudoEdgeGraph};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SurfaceError {
    #[error("faces {0} and {1} do not share an edge")]
    NotAdjacent(usize, usize),
    #[error("point is not on the surface: {0}")]
    Outside(String),
    #[error("geodesic blocked at vertex {0}")]
    Blocked(usize),
    #[error("geodesic iteration did not converge after {0} pivots")]
    NoConvergence(usize),
    #[error("pseudo-edge {edge} leaves its corridor (distance {distance:.6} >= delta {delta:.6})")]
    Corridor { edge: String, distance: f64, delta: f64 },
    #[error("mesh does not match the subdivision: {0}")]
    Mismatch(String),
    #[error(transparent)]
    Cap(#[from] CapError),
}

/// A point of the cap given by a triangle and barycentric coordinates in it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SurfacePoint {
    pub triangle: usize,
    pub bary: [f64; 3],
}

/// Barycentric coordinates of `p` in the planar triangle `t`.
pub fn barycentric(t: &[PointF2; 3], p: &PointF2) -> [f64; 3] {
    let area = (t[1] - t[0]).perp(&(t[2] - t[0]));
    let l0 = (t[1] - p).perp(&(t[2] - p)) / area;
    let l1 = (t[2] - p).perp(&(t[0] - p)) / area;
    [l0, l1, 1.0 - l0 - l1]
}

/// A cap mesh with the adjacency needed to walk across it.
#[derive(Clone, Debug)]
pub struct Surface {
    pub mesh: CapMesh,
    across: Vec<[Option<usize>; 3]>,
    /// Triangles around each node, counterclockwise.
    fans: Vec<Vec<usize>>,
}

impl Surface {
    pub fn new(mesh: CapMesh) -> Self {
        let mut edge_tri = HashMap::new();
        for (i, t) in mesh.triangles.iter().enumerate() {
            for k in 0..3 {
                edge_tri.insert((t[k], t[(k + 1) % 3]), i);
            }
        }
        let across = mesh
            .triangles
            .iter()
            .map(|t| std::array::from_fn(|k| edge_tri.get(&(t[(k + 1) % 3], t[k])).copied()))
            .collect();
        let fans = (0..mesh.node_count())
            .map(|v| {
                let mut after = HashMap::new();
                for &f in mesh.faces_at(v) {
                    let t = mesh.triangles[f];
                    let k = t.iter().position(|&x| x == v).expect("incident");
                    after.insert(t[(k + 1) % 3], f);
                }
                mesh.link(v).iter().filter_map(|w| after.get(w).copied()).collect()
            })
            .collect();
        Surface { mesh, across, fans }
    }

    pub fn triangle_count(&self) -> usize {
        self.mesh.triangles.len()
    }

    /// Triangles around `v`, counterclockwise; open for boundary corners.
    pub fn fan(&self, v: usize) -> &[usize] {
        &self.fans[v]
    }

    pub fn fan_is_closed(&self, v: usize) -> bool {
        !self.mesh.is_corner(v)
    }

    pub fn neighbor(&self, t: usize, k: usize) -> Option<usize> {
        self.across[t][k]
    }

    pub fn corners(&self, t: usize) -> [PointF3; 3] {
        self.mesh.triangles[t].map(|i| self.mesh.vertices[i])
    }

    pub fn projected(&self, t: usize) -> [PointF2; 3] {
        self.mesh.triangles[t].map(|i| self.mesh.projection(i))
    }

    pub fn position(&self, p: &SurfacePoint) -> PointF3 {
        let c = self.corners(p.triangle);
        c[0] * p.bary[0] + c[1] * p.bary[1] + c[2] * p.bary[2]
    }

    pub fn vertex_point(&self, v: usize) -> SurfacePoint {
        let t = self.mesh.faces_at(v)[0];
        let k = self.mesh.triangles[t].iter().position(|&x| x == v).expect("incident");
        let mut bary = [0.0; 3];
        bary[k] = 1.0;
        SurfacePoint { triangle: t, bary }
    }

    /// The node at a surface point, when it sits exactly on one.
    pub fn vertex_at(&self, p: &SurfacePoint) -> Option<usize> {
        p.bary.iter().position(|&b| b == 1.0).map(|k| self.mesh.triangles[p.triangle][k])
    }

    /// The point of the cap above a planar point of the polygon.
    pub fn locate(&self, p: &PointF2) -> Option<SurfacePoint> {
        let mut best: Option<(f64, SurfacePoint)> = None;
        for t in 0..self.triangle_count() {
            let b = barycentric(&self.projected(t), p);
            let m = b.iter().copied().fold(f64::INFINITY, f64::min);
            if best.as_ref().is_none_or(|(bm, _)| m > *bm) {
                best = Some((m, SurfacePoint { triangle: t, bary: b }));
            }
        }
        best.filter(|(m, _)| *m >= -1e-12).map(|(_, mut sp)| {
            for x in &mut sp.bary {
                *x = x.max(0.0);
            }
            let s: f64 = sp.bary.iter().sum();
            sp.bary.iter_mut().for_each(|x| *x /= s);
            sp
        })
    }

    /// Coordinates of a point of the plane of triangle `t` in the triangle's frame: its
    /// lowest-index corner at the origin and the next corner on the positive x-axis.
    pub fn local(&self, t: usize, p: &PointF3) -> PointF2 {
        let (o, e1, e2) = self.frame(t);
        let d = p - o;
        PointF2::new(d.dot(&e1), d.dot(&e2))
    }

    fn frame(&self, t: usize) -> (PointF3, PointF3, PointF3) {
        let tri = self.mesh.triangles[t];
        let k = (0..3).min_by_key(|&k| tri[k]).expect("three");
        let o = self.mesh.vertices[tri[k]];
        let b = self.mesh.vertices[tri[(k + 1) % 3]];
        let c = self.mesh.vertices[tri[(k + 2) % 3]];
        let e1 = (b - o).normalize();
        let n = (b - o).cross(&(c - o)).normalize();
        (o, e1, n.cross(&e1))
    }

    /// The edge shared by two triangles, in the counterclockwise order of `a`.
    pub fn shared_edge(&self, a: usize, b: usize) -> Option<(usize, usize)> {
        let k = (0..3).find(|&k| self.across[a][k] == Some(b))?;
        let t = self.mesh.triangles[a];
        Some((t[k], t[(k + 1) % 3]))
    }

    /// Planar placements of a face sequence, each glued to its predecessor across
    /// their shared edge. The first face keeps its own frame.
    pub fn develop_strip(&self, faces: &[usize]) -> Result<Vec<PlanarIsometry>, SurfaceError> {
        let mut out: Vec<PlanarIsometry> = Vec::with_capacity(faces.len());
        for (i, &f) in faces.iter().enumerate() {
            if i == 0 {
                out.push(PlanarIsometry::identity());
                continue;
            }
            let prev = faces[i - 1];
            let (u, v) = self.shared_edge(prev, f).ok_or(SurfaceError::NotAdjacent(prev, f))?;
            let (pu, pv) = (self.mesh.vertices[u], self.mesh.vertices[v]);
            let iso = &out[i - 1];
            let (du, dv) = (iso.apply(&self.local(prev, &pu)), iso.apply(&self.local(prev, &pv)));
            out.push(PlanarIsometry::from_segments(&self.local(f, &pu), &self.local(f, &pv), &du, &dv));
        }
        Ok(out)
    }

    /// Image of node `v` of face `faces[i]` under a strip development.
    pub fn developed_vertex(&self, placement: &PlanarIsometry, face: usize, v: usize) -> PointF2 {
        placement.apply(&self.local(face, &self.mesh.vertices[v]))
    }

    /// Total face angle at `v` from the start of its fan up to `dir`, a direction in
    /// triangle `t` of the fan.
    pub fn angular_position(&self, v: usize, t: usize, dir: &PointF3) -> Option<f64> {
        let fan = &self.fans[v];
        let mut acc = 0.0;
        for &f in fan {
            let tri = self.mesh.triangles[f];
            let k = tri.iter().position(|&x| x == v).expect("incident");
            let p = self.mesh.vertices[v];
            let a = self.mesh.vertices[tri[(k + 1) % 3]] - p;
            if f == t {
                return Some(acc + a.cross(dir).norm().atan2(a.dot(dir)));
            }
            let b = self.mesh.vertices[tri[(k + 2) % 3]] - p;
            acc += a.cross(&b).norm().atan2(a.dot(&b));
        }
        None
    }
}
