use std::collections::BTreeSet;

use serde::Serialize;

use super::WeightedSubdivision;
use crate::geom::{int, PointR2};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TriRecord {
    /// Counterclockwise node indices.
    pub nodes: [usize; 3],
    /// Index of the parent face.
    pub face: usize,
}

/// `G^T`: faces of `G` fanned from their vertex centroids. Node indices agree with the
/// subdivision's nodes; centroids follow.
#[derive(Clone, Debug)]
pub struct Triangulation {
    pub points: Vec<PointR2>,
    pub original_nodes: usize,
    /// Parent face of each added centroid, in node order.
    pub centroid_faces: Vec<usize>,
    /// Added centroid node for each face, when the face is not a triangle.
    pub face_centroid: Vec<Option<usize>>,
    pub triangles: Vec<TriRecord>,
}

impl Triangulation {
    pub fn node_count(&self) -> usize {
        self.points.len()
    }

    pub fn is_centroid(&self, n: usize) -> bool {
        n >= self.original_nodes
    }

    /// Undirected edges as sorted pairs.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut set = BTreeSet::new();
        for t in &self.triangles {
            for k in 0..3 {
                let (a, b) = (t.nodes[k], t.nodes[(k + 1) % 3]);
                set.insert((a.min(b), a.max(b)));
            }
        }
        set.into_iter().collect()
    }
}

pub fn canonical_triangulation(s: &WeightedSubdivision) -> Triangulation {
    let mut points: Vec<PointR2> = (0..s.node_count()).map(|n| s.node_point(n).clone()).collect();
    let original_nodes = points.len();
    let mut centroid_faces = Vec::new();
    let mut face_centroid = Vec::new();
    let mut triangles = Vec::new();
    for (fi, f) in s.face_nodes().iter().enumerate() {
        if f.len() == 3 {
            face_centroid.push(None);
            triangles.push(TriRecord { nodes: [f[0], f[1], f[2]], face: fi });
            continue;
        }
        let mut acc = PointR2::origin();
        for &n in f {
            acc = &acc + s.node_point(n);
        }
        let c = points.len();
        points.push(acc.scale(&(int(1) / int(f.len() as i64))));
        centroid_faces.push(fi);
        face_centroid.push(Some(c));
        for k in 0..f.len() {
            triangles.push(TriRecord { nodes: [f[k], f[(k + 1) % f.len()], c], face: fi });
        }
    }
    Triangulation { points, original_nodes, centroid_faces, face_centroid, triangles }
}
