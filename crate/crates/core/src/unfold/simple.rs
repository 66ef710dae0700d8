use std::collections::{BTreeSet, HashMap};

use num_bigint::BigInt;
use serde::Serialize;

use super::Development;
use crate::geom::{triangles_overlap, PointF2, PointR2, Rational};

/// Grid spacing for the rational approximations used by the exact overlap test.
pub const SNAP: f64 = 1e-12;

#[derive(Clone, Debug, Serialize)]
pub struct Simplicity {
    pub simple: bool,
    /// The first overlapping pair of faces in index order.
    pub overlap: Option<(usize, usize)>,
    /// Every overlapping pair found.
    pub pairs: Vec<(usize, usize)>,
    /// Pairs passed to the exact test by the grid filter.
    pub candidates: usize,
    pub snap: f64,
    /// Pairs skipped because a face collapsed under snapping.
    pub degenerate: usize,
}

fn snap_coord(x: f64) -> Rational {
    let n = (x / SNAP).round();
    Rational::new(BigInt::from(n as i128), BigInt::from(10i64.pow(12)))
}

/// The point of the `1e-12` grid nearest to `p`, as an exact rational point.
pub fn snap(p: &PointF2) -> PointR2 {
    PointR2::new(snap_coord(p.x), snap_coord(p.y))
}

/// Exact interior-overlap test of two face images after snapping.
pub fn faces_overlap(dev: &Development, a: usize, b: usize) -> Option<bool> {
    let ta = dev.face_image(a).map(|p| snap(&p));
    let tb = dev.face_image(b).map(|p| snap(&p));
    triangles_overlap(&ta, &tb).ok()
}

fn bbox(t: &[PointF2; 3]) -> (PointF2, PointF2) {
    let lo = PointF2::new(t.iter().map(|p| p.x).fold(f64::INFINITY, f64::min), t.iter().map(|p| p.y).fold(f64::INFINITY, f64::min));
    let hi = PointF2::new(
        t.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max),
        t.iter().map(|p| p.y).fold(f64::NEG_INFINITY, f64::max),
    );
    (lo, hi)
}

/// Whether `u` is injective: a uniform grid sized by the median face diameter selects
/// candidate pairs, which are decided exactly on snapped coordinates.
pub fn is_simple(dev: &Development) -> Simplicity {
    let images = dev.images();
    let boxes: Vec<_> = images.iter().map(bbox).collect();
    let mut diam: Vec<f64> = boxes.iter().map(|(lo, hi)| (hi - lo).norm()).collect();
    diam.sort_by(f64::total_cmp);
    let cell = diam.get(diam.len() / 2).copied().unwrap_or(1.0).max(1e-9);
    let key = |x: f64| (x / cell).floor() as i64;
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (i, (lo, hi)) in boxes.iter().enumerate() {
        for gx in key(lo.x)..=key(hi.x) {
            for gy in key(lo.y)..=key(hi.y) {
                grid.entry((gx, gy)).or_default().push(i);
            }
        }
    }
    let mut candidates = BTreeSet::new();
    for faces in grid.values() {
        for (k, &i) in faces.iter().enumerate() {
            for &j in &faces[k + 1..] {
                let (a, b) = (i.min(j), i.max(j));
                let ((la, ha), (lb, hb)) = (&boxes[a], &boxes[b]);
                if la.x <= hb.x && lb.x <= ha.x && la.y <= hb.y && lb.y <= ha.y {
                    candidates.insert((a, b));
                }
            }
        }
    }
    let mut pairs = Vec::new();
    let mut degenerate = 0;
    for &(a, b) in &candidates {
        match faces_overlap(dev, a, b) {
            Some(true) => pairs.push((a, b)),
            Some(false) => {}
            None => degenerate += 1,
        }
    }
    Simplicity {
        simple: pairs.is_empty(),
        overlap: pairs.first().copied(),
        pairs,
        candidates: candidates.len(),
        snap: SNAP,
        degenerate,
    }
}
