//! Deterministic SVG drawings of planar layouts and OBJ meshes.

use std::collections::HashMap;
use std::fmt::Write;

use crate::assembly::ClosedPolyhedron;
use crate::capsolver::CapMesh;
use crate::geom::{PointF2, PointF3};
use crate::unfold::Development;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExportError {
    #[error("nothing to draw: the layout has no faces")]
    Empty,
    #[error("mesh is not closed: {0}")]
    NotClosed(String),
    #[error("mesh refers to vertex {0}, which does not exist")]
    BadIndex(usize),
}

/// Faces, cut segments and overlapping face pairs of a planar layout.
#[derive(Clone, Debug, Default)]
pub struct SvgLayout {
    pub faces: Vec<[PointF2; 3]>,
    pub cuts: Vec<[PointF2; 2]>,
    pub overlaps: Vec<(usize, usize)>,
}

impl SvgLayout {
    /// Face images of `dev` with both images of every cut edge.
    pub fn from_development(dev: &Development, overlaps: &[(usize, usize)]) -> Self {
        let cut = &dev.cut;
        let mut cuts = Vec::new();
        for &(c, p) in &cut.cuts {
            for (a, b) in [(c, p), (p, c)] {
                if let Some(t) = cut.face_left(a, b) {
                    let img = dev.face_image(t);
                    let (ka, kb) = (cut.corner_index(t, a).expect("corner"), cut.corner_index(t, b).expect("corner"));
                    cuts.push([img[ka], img[kb]]);
                }
            }
        }
        SvgLayout { faces: dev.images(), cuts, overlaps: overlaps.to_vec() }
    }
}

fn num(x: f64) -> String {
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        "0.000000".into()
    } else {
        s
    }
}

/// Renders the layout with the y axis pointing up. The view box is the bounding box
/// grown by 5% of its larger side on every edge. Faces are drawn in input order, faces
/// of overlapping pairs with a red stroke, and cuts as dashed lines on top.
pub fn render_svg(layout: &SvgLayout) -> Result<String, ExportError> {
    if layout.faces.is_empty() {
        return Err(ExportError::Empty);
    }
    let pts = layout.faces.iter().flatten().chain(layout.cuts.iter().flatten());
    let (mut lo, mut hi) = (PointF2::repeat(f64::INFINITY), PointF2::repeat(f64::NEG_INFINITY));
    for p in pts {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    let size = hi - lo;
    let margin = 0.05 * size.x.max(size.y).max(1e-9);
    let (x0, y0) = (lo.x - margin, -hi.y - margin);
    let (w, h) = (size.x + 2.0 * margin, size.y + 2.0 * margin);
    let stroke = num(w.max(h) / 1000.0);
    let flagged: std::collections::BTreeSet<usize> = layout.overlaps.iter().flat_map(|&(a, b)| [a, b]).collect();
    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{} {} {} {}">"#,
        num(x0),
        num(y0),
        num(w),
        num(h)
    )
    .expect("string");
    writeln!(out, r##"<g fill="#f2f2f2" stroke="#333333" stroke-width="{stroke}" stroke-linejoin="round">"##).expect("string");
    for (i, t) in layout.faces.iter().enumerate() {
        let d = format!(
            "M {} {} L {} {} L {} {} Z",
            num(t[0].x),
            num(-t[0].y),
            num(t[1].x),
            num(-t[1].y),
            num(t[2].x),
            num(-t[2].y)
        );
        if flagged.contains(&i) {
            writeln!(out, r##"<path d="{d}" fill="#f4b4b4" stroke="#cc0000" data-face="{i}"/>"##).expect("string");
        } else {
            writeln!(out, r#"<path d="{d}" data-face="{i}"/>"#).expect("string");
        }
    }
    writeln!(out, "</g>").expect("string");
    if !layout.cuts.is_empty() {
        writeln!(out, r##"<g stroke="#0044aa" stroke-width="{stroke}" stroke-dasharray="{} {}">"##, num(w.max(h) / 200.0), num(w.max(h) / 300.0))
            .expect("string");
        for c in &layout.cuts {
            writeln!(out, r#"<line x1="{}" y1="{}" x2="{}" y2="{}"/>"#, num(c[0].x), num(-c[0].y), num(c[1].x), num(-c[1].y))
                .expect("string");
        }
        writeln!(out, "</g>").expect("string");
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Directed edges not matched by exactly one reversed edge.
pub fn open_edges(triangles: &[[usize; 3]]) -> Vec<(usize, usize)> {
    let mut count: HashMap<(usize, usize), usize> = HashMap::new();
    for t in triangles {
        for k in 0..3 {
            *count.entry((t[k], t[(k + 1) % 3])).or_insert(0) += 1;
        }
    }
    let mut out: Vec<(usize, usize)> =
        count.iter().filter(|&(&(a, b), &n)| n != 1 || count.get(&(b, a)) != Some(&1)).map(|(&e, _)| e).collect();
    out.sort_unstable();
    out
}

/// Wavefront OBJ text: vertices with 12 decimals, then 1-indexed triangles.
pub fn obj_string(vertices: &[PointF3], triangles: &[[usize; 3]], require_closed: bool) -> Result<String, ExportError> {
    if let Some(&v) = triangles.iter().flatten().find(|&&v| v >= vertices.len()) {
        return Err(ExportError::BadIndex(v));
    }
    if require_closed {
        if let Some((a, b)) = open_edges(triangles).first() {
            return Err(ExportError::NotClosed(format!("edge {} -> {} is not matched", a + 1, b + 1)));
        }
    }
    let mut out = String::new();
    for v in vertices {
        writeln!(out, "v {:.12} {:.12} {:.12}", v.x, v.y, v.z).expect("string");
    }
    for t in triangles {
        writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1).expect("string");
    }
    Ok(out)
}

/// The cap's triangles, optionally closed by a fan over the boundary polygon facing down.
pub fn cap_triangles(cap: &CapMesh, with_base: bool) -> Vec<[usize; 3]> {
    let mut tris = cap.triangles.clone();
    if with_base {
        tris.extend((1..cap.corner_count - 1).map(|k| [0, k + 1, k]));
    }
    tris
}

pub fn cap_obj(cap: &CapMesh, with_base: bool, require_closed: bool) -> Result<String, ExportError> {
    obj_string(&cap.vertices, &cap_triangles(cap, with_base), require_closed)
}

pub fn polyhedron_obj(k: &ClosedPolyhedron, require_closed: bool) -> Result<String, ExportError> {
    obj_string(&k.vertices, &k.triangles, require_closed)
}
