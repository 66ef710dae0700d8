use std::collections::HashMap;

use super::{CapError, CapMesh, HullStatus};
use crate::geom::{orient3d_f64, point_in_triangle_f64, PointF2, PointF3};

/// Lifted point set with the perturbation data used to break ties.
struct Lifted {
    pts: Vec<PointF3>,
    /// `-|p - g|^2`: coplanar ties resolve as if the points were pushed onto a
    /// concave paraboloid.
    bowl: Vec<f64>,
    /// Per-index generic heights for the remaining ties.
    jitter: Vec<f64>,
}

fn jitter(i: usize) -> f64 {
    // splitmix64 mapped to (0, 1)
    let mut z = (i as u64).wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    ((z >> 11) as f64 + 0.5) / (1u64 << 53) as f64
}

impl Lifted {
    fn with_z(&self, i: usize, z: f64) -> PointF3 {
        PointF3::new(self.pts[i].x, self.pts[i].y, z)
    }

    /// Sign of the perturbed orientation of `d` against the plane of `abc`.
    fn orient(&self, a: usize, b: usize, c: usize, d: usize) -> i32 {
        let s = orient3d_f64(&self.pts[a], &self.pts[b], &self.pts[c], &self.pts[d]);
        if s != 0 {
            return s;
        }
        let q = |i: usize| self.with_z(i, self.bowl[i]);
        let s = orient3d_f64(&q(a), &q(b), &q(c), &q(d));
        if s != 0 {
            return s;
        }
        let r = |i: usize| self.with_z(i, self.jitter[i]);
        orient3d_f64(&r(a), &r(b), &r(c), &r(d))
    }
}

/// Upper convex hull of the lifted points. Corners are the first `boundary.len()` nodes
/// and sit at height zero; interior nodes follow.
pub fn lift_upper_hull(boundary: &[PointF2], interior: &[PointF2], heights: &[f64]) -> Result<CapMesh, CapError> {
    let nb = boundary.len();
    if nb < 3 {
        return Err(CapError::InvalidSpec("boundary needs at least three corners".into()));
    }
    if heights.len() != interior.len() {
        return Err(CapError::InvalidSpec(format!("{} heights for {} points", heights.len(), interior.len())));
    }
    if heights.iter().any(|h| !h.is_finite()) {
        return Err(CapError::Degenerate("non-finite height".into()));
    }
    let n = nb + interior.len();
    let mut pts: Vec<PointF3> = boundary.iter().map(|p| PointF3::new(p.x, p.y, 0.0)).collect();
    pts.extend(interior.iter().zip(heights).map(|(p, &h)| PointF3::new(p.x, p.y, h)));
    let g = boundary.iter().fold(PointF2::zeros(), |a, p| a + p) / nb as f64;
    let diam = boundary
        .iter()
        .flat_map(|p| boundary.iter().map(move |q| (p - q).norm()))
        .fold(0.0, f64::max);
    let top = heights.iter().fold(0.0f64, |a, &h| a.max(h.abs()));
    // virtual apex far below the centroid closes the hull
    pts.push(PointF3::new(g.x, g.y, -10.0 * (diam + top) - 1.0));
    let bottom = n;
    let mut bowl: Vec<f64> = pts.iter().map(|p| -(PointF2::new(p.x, p.y) - g).norm_squared()).collect();
    bowl[bottom] = 0.0;
    let mut jit: Vec<f64> = (0..=n).map(jitter).collect();
    jit[bottom] = 0.0;
    let lifted = Lifted { pts, bowl, jitter: jit };

    let mut faces: Vec<Option<[usize; 3]>> = Vec::new();
    let mut edge_face: HashMap<(usize, usize), usize> = HashMap::new();
    let add_face = |faces: &mut Vec<Option<[usize; 3]>>, edge_face: &mut HashMap<(usize, usize), usize>, f: [usize; 3]| {
        let id = faces.len();
        for k in 0..3 {
            edge_face.insert((f[k], f[(k + 1) % 3]), id);
        }
        faces.push(Some(f));
    };
    let (c0, c1, c2) = (0, 1, 2);
    if lifted.orient(c0, c1, c2, bottom) >= 0 {
        return Err(CapError::Degenerate("boundary is not counterclockwise".into()));
    }
    for f in [[c0, c1, c2], [c1, c0, bottom], [c2, c1, bottom], [c0, c2, bottom]] {
        add_face(&mut faces, &mut edge_face, f);
    }
    let order: Vec<usize> = (3..n).collect();
    for &p in &order {
        let visible: Vec<usize> = faces
            .iter()
            .enumerate()
            .filter_map(|(i, f)| f.and_then(|[a, b, c]| (lifted.orient(a, b, c, p) > 0).then_some(i)))
            .collect();
        if visible.is_empty() {
            continue;
        }
        let is_visible = |i: usize| visible.binary_search(&i).is_ok();
        let mut horizon = Vec::new();
        for &i in &visible {
            let f = faces[i].expect("live face");
            for k in 0..3 {
                let (u, v) = (f[k], f[(k + 1) % 3]);
                let twin = edge_face.get(&(v, u)).copied();
                if twin.is_none_or(|t| !is_visible(t)) {
                    horizon.push((u, v));
                }
            }
        }
        for &i in &visible {
            let f = faces[i].take().expect("live face");
            for k in 0..3 {
                let e = (f[k], f[(k + 1) % 3]);
                if edge_face.get(&e) == Some(&i) {
                    edge_face.remove(&e);
                }
            }
        }
        for (u, v) in horizon {
            add_face(&mut faces, &mut edge_face, [u, v, p]);
        }
    }

    let triangles: Vec<[usize; 3]> = faces.into_iter().flatten().filter(|f| !f.contains(&bottom)).collect();
    let mut on_hull = vec![false; n];
    for t in &triangles {
        for &v in t {
            on_hull[v] = true;
        }
    }
    if (0..nb).any(|k| !on_hull[k]) {
        return Err(CapError::Degenerate("boundary corner missing from the hull".into()));
    }
    let mut mesh = CapMesh::from_parts(lifted.pts[..n].to_vec(), nb, triangles, vec![HullStatus::Vertex; n]);
    for v in nb..n {
        mesh.status[v] = if !on_hull[v] {
            HullStatus::Below
        } else if is_coplanar(&mesh, v) {
            HullStatus::Coplanar
        } else {
            HullStatus::Vertex
        };
    }
    mesh.refresh_curvature();
    Ok(mesh)
}

/// A hull vertex lying, without perturbation, on a plane spanned by link vertices
/// whose projection contains it.
fn is_coplanar(mesh: &CapMesh, v: usize) -> bool {
    let link = mesh.link(v);
    let p = mesh.vertices[v];
    let p2 = PointF2::new(p.x, p.y);
    let proj = |i: usize| PointF2::new(mesh.vertices[i].x, mesh.vertices[i].y);
    for i in 0..link.len() {
        for j in i + 1..link.len() {
            let (a, b) = (mesh.vertices[link[i]], mesh.vertices[link[j]]);
            // collinear in space with the vertex between the two
            if (b - a).cross(&(p - a)).norm() == 0.0 && (p - a).dot(&(p - b)) < 0.0 {
                return true;
            }
            for &k in &link[j + 1..] {
                let c = mesh.vertices[k];
                let tri = [proj(link[i]), proj(link[j]), proj(k)];
                if crate::geom::orient2d_f64(&tri[0], &tri[1], &tri[2]) == 0 {
                    continue;
                }
                if point_in_triangle_f64(&p2, &tri) && orient3d_f64(&a, &b, &c, &p) == 0 {
                    return true;
                }
            }
        }
    }
    false
}
