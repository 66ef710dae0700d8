use std::collections::VecDeque;
use std::f64::consts::TAU;

use petgraph::unionfind::UnionFind;
use serde::Serialize;

use super::{CutSurface, UnfoldError};
use crate::cutforest::{center_of_rotation, CutForest};
use crate::geom::{compose_rotations, to_f64, PlanarIsometry, PointF2, Rotation};
use crate::subdivision::WeightedSubdivision;
use crate::surface::barycentric;

/// Containment tolerance for barycentric coordinates.
const BARY_TOL: f64 = 1e-10;

/// The unfolding `u`: one planar isometry per face of the cut surface. Face `t` of the
/// cut surface covers triangle `t` of `Ḡ^T`.
#[derive(Clone, Debug)]
pub struct Development {
    pub cut: CutSurface,
    /// Carries the flat shape of each face into the plane.
    pub placements: Vec<PlanarIsometry>,
    /// Image of each vertex copy.
    pub copy_positions: Vec<PointF2>,
    /// Largest disagreement of two faces on a glued edge.
    pub residual: f64,
    /// Faces in layout order, starting at the face on `e₀`.
    pub order: Vec<usize>,
    /// Angle defect of each node of `G^T` measured on the flat shapes.
    pub deficits: Vec<f64>,
}

/// Lays out the cut surface breadth-first from the face on `e₀`, which keeps its place
/// in the polygon.
pub fn develop(cut: CutSurface) -> Result<Development, UnfoldError> {
    let tr = &cut.triangulation;
    let n_faces = cut.face_count();
    let shape_point = |t: usize, n: usize| tr.shapes[t][cut.corner_index(t, n).expect("corner")];
    let planar = |n: usize| tr.planar.points[n].to_f64();

    let mut angles = vec![0.0; cut.copy_count()];
    for (t, sh) in tr.shapes.iter().enumerate() {
        for k in 0..3 {
            angles[cut.corner_copies[t][k]] += shape_angle(sh, k);
        }
    }
    let mut on_boundary = vec![false; cut.copy_count()];
    let rim = cut.boundary.iter().chain(&cut.cuts).flat_map(|&(a, b)| [(a, b), (b, a)]);
    for (a, b) in rim {
        if let Some(t) = cut.face_left(a, b) {
            for n in [a, b] {
                on_boundary[cut.corner_copies[t][cut.corner_index(t, n).expect("corner")]] = true;
            }
        }
    }
    for c in 0..cut.copy_count() {
        if on_boundary[c] && angles[c] >= TAU {
            return Err(UnfoldError::AngleTooLarge { node: cut.copy_nodes[c], angle: angles[c] });
        }
    }

    let mut neighbors = vec![Vec::new(); n_faces];
    for &(a, b) in &cut.glued {
        let (t1, t2) = (cut.face_left(a, b).expect("glued"), cut.face_left(b, a).expect("glued"));
        neighbors[t1].push((t2, a, b));
        neighbors[t2].push((t1, a, b));
    }
    let (b0, b1) = cut.base;
    let start = cut.face_left(b0, b1).expect("base edge on a face");
    let mut placements: Vec<Option<PlanarIsometry>> = vec![None; n_faces];
    placements[start] =
        Some(PlanarIsometry::from_segments(&shape_point(start, b0), &shape_point(start, b1), &planar(b0), &planar(b1)));
    let mut order = vec![start];
    let mut queue = VecDeque::from([start]);
    while let Some(t) = queue.pop_front() {
        let iso = placements[t].expect("placed");
        for &(u, a, b) in &neighbors[t] {
            if placements[u].is_some() {
                continue;
            }
            let (da, db) = (iso.apply(&shape_point(t, a)), iso.apply(&shape_point(t, b)));
            placements[u] = Some(PlanarIsometry::from_segments(&shape_point(u, a), &shape_point(u, b), &da, &db));
            order.push(u);
            queue.push_back(u);
        }
    }
    let placements: Vec<PlanarIsometry> = placements
        .into_iter()
        .map(|p| p.ok_or(UnfoldError::NotDisk(0)))
        .collect::<Result<_, _>>()?;

    let mut residual: f64 = 0.0;
    for &(a, b) in &cut.glued {
        let (t1, t2) = (cut.face_left(a, b).expect("glued"), cut.face_left(b, a).expect("glued"));
        for n in [a, b] {
            let d = placements[t1].apply(&shape_point(t1, n)) - placements[t2].apply(&shape_point(t2, n));
            residual = residual.max(d.norm());
        }
    }
    let scale = tr.planar.points.iter().map(|p| p.to_f64().norm()).fold(1.0, f64::max);
    if residual > 1e-9 * scale {
        return Err(UnfoldError::Inconsistent(residual));
    }

    let mut copy_positions = vec![None; cut.copy_count()];
    for &t in &order {
        for k in 0..3 {
            let c = cut.corner_copies[t][k];
            if copy_positions[c].is_none() {
                copy_positions[c] = Some(placements[t].apply(&tr.shapes[t][k]));
            }
        }
    }
    let copy_positions = copy_positions.into_iter().map(|p| p.expect("every copy is on a face")).collect();
    let deficits = crate::surface::shape_deficits(tr);
    Ok(Development { cut, placements, copy_positions, residual, order, deficits })
}

/// Outcome of composing the descendant rotations of a forest edge.
#[derive(Clone, Debug, Serialize)]
pub struct RotationIdentity {
    pub rotations: Vec<Rotation>,
    /// Clockwise angle of the composite.
    pub angle: f64,
    /// `β_x = α_x β`.
    pub beta_x: f64,
    /// `|R(x′_L) − x′_R|`.
    pub residual: f64,
}

impl Development {
    pub fn face_count(&self) -> usize {
        self.placements.len()
    }

    /// The image of face `t`.
    pub fn face_image(&self, t: usize) -> [PointF2; 3] {
        self.cut.corner_copies[t].map(|c| self.copy_positions[c])
    }

    pub fn images(&self) -> Vec<[PointF2; 3]> {
        (0..self.face_count()).map(|t| self.face_image(t)).collect()
    }

    /// Largest relative difference between a side of a face image and the length of the
    /// corresponding side of `Ḡ^T`.
    pub fn congruence_error(&self) -> f64 {
        let tr = &self.cut.triangulation;
        let mut worst: f64 = 0.0;
        for t in 0..self.face_count() {
            let img = self.face_image(t);
            let nodes = self.cut.nodes(t);
            for k in 0..3 {
                let want = tr.side_length(nodes[k], nodes[(k + 1) % 3]).expect("side");
                let got = (img[(k + 1) % 3] - img[k]).norm();
                worst = worst.max((got - want).abs() / want);
            }
        }
        worst
    }

    /// Total angle of the faces meeting at a vertex copy.
    pub fn copy_angle(&self, c: usize) -> f64 {
        let mut acc = 0.0;
        for (t, copies) in self.cut.corner_copies.iter().enumerate() {
            for k in 0..3 {
                if copies[k] == c {
                    acc += shape_angle(&self.cut.triangulation.shapes[t], k);
                }
            }
        }
        acc
    }

    fn bary_in(&self, t: usize, x: &PointF2) -> [f64; 3] {
        let tri = self.cut.nodes(t).map(|n| self.cut.triangulation.planar.points[n].to_f64());
        barycentric(&tri, x)
    }

    /// `ψ_Φ(x)` for a point `x` of triangle `t` of `G^T`.
    pub fn psi_in(&self, t: usize, x: &PointF2) -> Result<PointF2, UnfoldError> {
        let b = self.bary_in(t, x);
        if b.iter().any(|&v| v < -BARY_TOL) {
            return Err(UnfoldError::NotInFace(x.x, x.y, t));
        }
        Ok(self.psi_extended(t, x))
    }

    /// The affine extension of `ψ_Φ` on face `t` to the whole plane.
    pub fn psi_extended(&self, t: usize, x: &PointF2) -> PointF2 {
        let b = self.bary_in(t, x);
        let sh = &self.cut.triangulation.shapes[t];
        self.placements[t].apply(&(sh[0] * b[0] + sh[1] * b[1] + sh[2] * b[2]))
    }

    /// Every image of `x` under `ψ`: one per sector of the faces around `x` that stay
    /// glued together.
    pub fn psi_images(&self, x: &PointF2) -> Vec<PointF2> {
        let faces: Vec<usize> = (0..self.face_count())
            .filter(|&t| self.bary_in(t, x).iter().all(|&v| v >= -BARY_TOL))
            .collect();
        let mut uf = UnionFind::<usize>::new(faces.len());
        for i in 0..faces.len() {
            for j in i + 1..faces.len() {
                if self.glued_through(faces[i], faces[j], x) {
                    uf.union(i, j);
                }
            }
        }
        let mut out = Vec::new();
        let mut seen = Vec::new();
        for (i, &t) in faces.iter().enumerate() {
            let r = uf.find(i);
            if !seen.contains(&r) {
                seen.push(r);
                out.push(self.psi_in(t, x).expect("contains x"));
            }
        }
        out
    }

    /// Whether faces `a` and `b` share a glued edge whose closure holds `x`.
    fn glued_through(&self, a: usize, b: usize, x: &PointF2) -> bool {
        let na = self.cut.nodes(a);
        let ba = self.bary_in(a, x);
        (0..3).any(|k| {
            let (u, v) = (na[k], na[(k + 1) % 3]);
            self.cut.face_left(v, u) == Some(b) && !self.cut.is_cut(u, v) && ba[(k + 2) % 3].abs() <= BARY_TOL
        })
    }

    /// `(x′_R, x′_L)` for a point on the forest edge `child -> parent`.
    pub fn psi_sides(&self, child: usize, parent: usize, x: &PointF2) -> Result<(PointF2, PointF2), UnfoldError> {
        let left = self.cut.face_left(child, parent).ok_or(UnfoldError::NotOnForest(child))?;
        let right = self.cut.face_left(parent, child).ok_or(UnfoldError::NotOnForest(child))?;
        Ok((self.psi_in(right, x)?, self.psi_in(left, x)?))
    }

    /// Image of node `n` in face `t`.
    fn image_in(&self, t: usize, n: usize) -> PointF2 {
        self.copy_positions[self.cut.corner_copies[t][self.cut.corner_index(t, n).expect("corner")]]
    }

    /// The clockwise rotations, about developed images of the descendants of `child`,
    /// whose composite carries the left side of the edge above `child` onto its right side.
    pub fn descendant_rotations(&self, f: &CutForest, child: usize) -> Result<Vec<Rotation>, UnfoldError> {
        let parent = f.parent(child).ok_or(UnfoldError::NotOnForest(child))?;
        let pts = &self.cut.triangulation.planar.points;
        let at = |n: usize| pts[n].to_f64();
        let base = at(parent) - at(child);
        let ccw = |d: usize| {
            let v = at(d) - at(child);
            (base.perp(&v)).atan2(base.dot(&v)).rem_euclid(TAU)
        };
        let mut kids = f.children(child);
        kids.sort_by(|&a, &b| ccw(b).total_cmp(&ccw(a)));
        let mut out = Vec::new();
        for d in kids {
            out.extend(self.descendant_rotations(f, d)?);
        }
        let face = self.cut.face_left(child, parent).ok_or(UnfoldError::NotOnForest(child))?;
        out.push(Rotation::new(self.image_in(face, child), self.deficits[child]));
        Ok(out)
    }

    /// Composes [`descendant_rotations`](Self::descendant_rotations) and compares the
    /// composite with `x′_R` at the point `t` of the way from `child` to its parent.
    pub fn rotation_identity(
        &self,
        s: &WeightedSubdivision,
        f: &CutForest,
        child: usize,
        t: f64,
        beta: f64,
    ) -> Result<RotationIdentity, UnfoldError> {
        let parent = f.parent(child).ok_or(UnfoldError::NotOnForest(child))?;
        let x = forest_point(s, child, parent, t);
        let (xr, xl) = self.psi_sides(child, parent, &x)?;
        let rotations = self.descendant_rotations(f, child)?;
        let composite = compose_rotations(&rotations).expect("at least one rotation");
        let (_, alpha) = center_of_rotation(s, f, child).map_err(|e| UnfoldError::Forest(e.to_string()))?;
        Ok(RotationIdentity {
            angle: composite.angle(),
            beta_x: to_f64(&alpha) * beta,
            residual: (composite.apply(&xl) - xr).norm(),
            rotations,
        })
    }

    /// `c̃_x = x + J(x′_R − x′_L)/β_x` at the point `t` of the way from `child` to its parent.
    pub fn tilde_c(
        &self,
        s: &WeightedSubdivision,
        f: &CutForest,
        child: usize,
        t: f64,
        beta: f64,
    ) -> Result<PointF2, UnfoldError> {
        if beta <= 0.0 {
            return Err(UnfoldError::ZeroBeta);
        }
        let parent = f.parent(child).ok_or(UnfoldError::NotOnForest(child))?;
        if !(t > 0.0 && t < 1.0) {
            return Err(UnfoldError::NotOnForest(child));
        }
        let x = forest_point(s, child, parent, t);
        let (xr, xl) = self.psi_sides(child, parent, &x)?;
        let (_, alpha) = center_of_rotation(s, f, child).map_err(|e| UnfoldError::Forest(e.to_string()))?;
        Ok(x + j(&(xr - xl)) / (to_f64(&alpha) * beta))
    }
}

fn shape_angle(sh: &[PointF2; 3], k: usize) -> f64 {
    let u = sh[(k + 1) % 3] - sh[k];
    let w = sh[(k + 2) % 3] - sh[k];
    u.perp(&w).atan2(u.dot(&w))
}

/// `J`, the clockwise quarter turn.
pub(crate) fn j(v: &PointF2) -> PointF2 {
    PointF2::new(v.y, -v.x)
}

pub(crate) fn forest_point(s: &WeightedSubdivision, child: usize, parent: usize, t: f64) -> PointF2 {
    let a = s.node_point(child).to_f64();
    a + (s.node_point(parent).to_f64() - a) * t
}
