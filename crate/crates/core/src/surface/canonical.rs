use std::collections::HashMap;
use std::f64::consts::TAU;

use rayon::prelude::*;

use super::{barycentric, GeodesicPath, PseudoEdgeGraph, Surface, SurfaceError, SurfacePoint};
use crate::geom::{PointF2, PointF3};
use crate::subdivision::{canonical_triangulation, Triangulation, WeightedSubdivision};

/// `Ḡ^T`: the pseudo-edge graph with geodesic spokes from the points above the face
/// centroids, and the flat shape of every triangle.
#[derive(Clone, Debug)]
pub struct PseudoTriangulation {
    pub planar: Triangulation,
    /// Surface point of every node of `G^T`.
    pub nodes: Vec<SurfacePoint>,
    /// Keyed by sorted node pairs, oriented from the smaller node.
    paths: HashMap<(usize, usize), GeodesicPath>,
    /// Flat triangle with the same side lengths as each triangle of `Ḡ^T`: first corner
    /// at the origin, second on the positive x-axis.
    pub shapes: Vec<[PointF2; 3]>,
}

impl PseudoTriangulation {
    /// The side between two nodes of `G^T`, oriented from `a`.
    pub fn side(&self, a: usize, b: usize) -> Option<GeodesicPath> {
        let p = self.paths.get(&(a.min(b), a.max(b)))?;
        Some(if a < b { p.clone() } else { p.reversed() })
    }

    pub fn side_length(&self, a: usize, b: usize) -> Option<f64> {
        self.paths.get(&(a.min(b), a.max(b))).map(|p| p.length)
    }

    pub fn triangle_count(&self) -> usize {
        self.shapes.len()
    }

    /// Sum of the shape angles at each node of `G^T`.
    pub fn angle_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.planar.node_count()];
        for (t, sh) in self.planar.triangles.iter().zip(&self.shapes) {
            for k in 0..3 {
                let u = sh[(k + 1) % 3] - sh[k];
                let w = sh[(k + 2) % 3] - sh[k];
                sums[t.nodes[k]] += u.perp(&w).atan2(u.dot(&w));
            }
        }
        sums
    }

    /// The triangle of `G^T` containing a planar point, with barycentric coordinates.
    pub fn locate(&self, p: &PointF2) -> Option<(usize, [f64; 3])> {
        let mut best: Option<(f64, usize, [f64; 3])> = None;
        for (i, t) in self.planar.triangles.iter().enumerate() {
            let tri = t.nodes.map(|n| self.planar.points[n].to_f64());
            let b = barycentric(&tri, p);
            let m = b.iter().copied().fold(f64::INFINITY, f64::min);
            if best.as_ref().is_none_or(|x| m > x.0) {
                best = Some((m, i, b));
            }
        }
        best.filter(|x| x.0 >= -1e-12).map(|(_, i, b)| (i, b))
    }
}

fn shape(ab: f64, bc: f64, ca: f64) -> [PointF2; 3] {
    let x = (ab * ab + ca * ca - bc * bc) / (2.0 * ab);
    let y = (ca * ca - x * x).max(0.0).sqrt();
    [PointF2::zeros(), PointF2::new(ab, 0.0), PointF2::new(x, y)]
}

/// Builds `Ḡ^T` on the cap from the pseudo-edge graph.
pub fn pseudo_triangulation(
    surface: &Surface,
    s: &WeightedSubdivision,
    graph: &PseudoEdgeGraph,
) -> Result<PseudoTriangulation, SurfaceError> {
    let planar = canonical_triangulation(s);
    let mut nodes: Vec<SurfacePoint> = (0..s.node_count()).map(|v| surface.vertex_point(v)).collect();
    for p in &planar.points[planar.original_nodes..] {
        let q = p.to_f64();
        nodes.push(surface.locate(&q).ok_or_else(|| SurfaceError::Outside(format!("centroid ({}, {})", q.x, q.y)))?);
    }
    let mut paths: HashMap<(usize, usize), GeodesicPath> = HashMap::new();
    for e in &graph.edges {
        let (a, b) = e.nodes;
        let p = if a < b { e.path.clone() } else { e.path.reversed() };
        paths.insert((a.min(b), a.max(b)), p);
    }
    let spokes: Vec<(usize, usize)> = planar.edges().into_iter().filter(|k| !paths.contains_key(k)).collect();
    let spoke_paths: Vec<GeodesicPath> =
        spokes.par_iter().map(|&(a, b)| surface.geodesic_between(&nodes[a], &nodes[b], None)).collect::<Result<_, _>>()?;
    paths.extend(spokes.into_iter().zip(spoke_paths));
    let len = |a: usize, b: usize| paths[&(a.min(b), a.max(b))].length;
    let shapes = planar
        .triangles
        .iter()
        .map(|t| {
            let [a, b, c] = t.nodes;
            shape(len(a, b), len(b, c), len(c, a))
        })
        .collect();
    Ok(PseudoTriangulation { planar, nodes, paths, shapes })
}

/// The canonical homeomorphism from the polygon onto the cap: affine on each triangle
/// of `G^T` into the flat shape of the corresponding triangle of `Ḡ^T`.
#[derive(Clone, Debug)]
pub struct CanonicalMap<'a> {
    pub surface: &'a Surface,
    pub triangulation: PseudoTriangulation,
}

impl CanonicalMap<'_> {
    /// The image of a planar point of the polygon.
    pub fn eval(&self, x: &PointF2) -> Result<SurfacePoint, SurfaceError> {
        let (t, b) = self
            .triangulation
            .locate(x)
            .ok_or_else(|| SurfaceError::Outside(format!("({}, {})", x.x, x.y)))?;
        self.eval_in(t, b)
    }

    pub fn eval_position(&self, x: &PointF2) -> Result<PointF3, SurfaceError> {
        Ok(self.surface.position(&self.eval(x)?))
    }

    /// The image of the point with barycentric coordinates `bary` in triangle `t` of `G^T`.
    pub fn eval_in(&self, t: usize, bary: [f64; 3]) -> Result<SurfacePoint, SurfaceError> {
        let tr = &self.triangulation;
        let [a, b, c] = tr.planar.triangles[t].nodes;
        let sh = &tr.shapes[t];
        let q = sh[0] * bary[0] + sh[1] * bary[1] + sh[2] * bary[2];
        let r = q.norm();
        if r <= 1e-15 * sh[1].norm() {
            return Ok(tr.nodes[a]);
        }
        let bc = sh[2] - sh[1];
        let s = (q.perp(&sh[1]) / bc.perp(&q)).clamp(0.0, 1.0);
        let y = sh[1] + bc * s;
        let path = if s <= 1e-12 {
            tr.side(a, b).expect("side")
        } else if s >= 1.0 - 1e-12 {
            tr.side(a, c).expect("side")
        } else {
            let side = tr.side(b, c).expect("side");
            let ys = side.surface_point_at(self.surface, s * side.length);
            self.surface.geodesic_between(&tr.nodes[a], &ys, None)?
        };
        Ok(path.surface_point_at(self.surface, path.length * (r / y.norm()).min(1.0)))
    }
}

/// `f` on the cap over `s`.
pub fn canonical_map<'a>(
    surface: &'a Surface,
    s: &WeightedSubdivision,
    graph: &PseudoEdgeGraph,
) -> Result<CanonicalMap<'a>, SurfaceError> {
    Ok(CanonicalMap { surface, triangulation: pseudo_triangulation(surface, s, graph)? })
}

/// Angle defect of a node of `G^T` measured on the flat shapes: `2π` minus the angle sum.
pub fn shape_deficits(t: &PseudoTriangulation) -> Vec<f64> {
    t.angle_sums().into_iter().map(|a| TAU - a).collect()
}
