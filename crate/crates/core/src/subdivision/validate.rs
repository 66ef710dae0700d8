use std::cmp::Ordering;
use std::collections::HashMap;

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::{polygon_area2, strictly_inside_convex, WeightedSubdivision};
use crate::geom::{fmt_rational, orient2d, point_on_open_segment, segments_intersect, PointR2, Rational};

/// Outcome of a single invariant check.
#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    /// Structural checks must pass for a subdivision to load.
    pub structural: bool,
    pub passed: bool,
    pub message: String,
    pub offending: Vec<String>,
}

impl CheckResult {
    fn new(name: &'static str, structural: bool, message: &str, offending: Vec<String>) -> Self {
        CheckResult { name, structural, passed: offending.is_empty(), message: message.to_string(), offending }
    }

    pub fn detail(&self) -> String {
        const SHOWN: usize = 8;
        let mut s = self.message.clone();
        if !self.offending.is_empty() {
            let list: Vec<&str> = self.offending.iter().take(SHOWN).map(String::as_str).collect();
            s.push_str(&format!(" ({}", list.join("; ")));
            if self.offending.len() > SHOWN {
                s.push_str(&format!("; and {} more", self.offending.len() - SHOWN));
            }
            s.push(')');
        }
        s
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn structural_passed(&self) -> bool {
        self.checks.iter().filter(|c| c.structural).all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckResult> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failed(&self) -> Vec<&CheckResult> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

/// Runs every invariant check; failures are recorded, never raised.
pub fn validate(s: &WeightedSubdivision) -> ValidationReport {
    let faces_ok = check_faces_closed(s);
    let checks = vec![
        check_ids(s),
        check_boundary_convex(s),
        check_weights_positive(s),
        check_weights_sum(s),
        check_interior_inside(s),
        check_boundary_edges(s),
        check_planar_embedding(s),
        faces_ok.clone(),
        check_faces_ccw(s, faces_ok.passed),
        check_faces_tile(s, faces_ok.passed),
        check_euler(s),
        check_faces_convex(s, faces_ok.passed),
        check_vertex_angles(s),
    ];
    ValidationReport { checks }
}

fn check_ids(s: &WeightedSubdivision) -> CheckResult {
    let bad = (0..s.node_count())
        .filter(|&n| s.neighbors(n).is_empty())
        .map(|n| format!("vertex {} has no incident edge", s.node_id(n)))
        .collect();
    CheckResult::new("ids", true, "every vertex must be incident to an edge", bad)
}

fn check_boundary_convex(s: &WeightedSubdivision) -> CheckResult {
    let b = &s.boundary;
    let n = b.len();
    let bad = if n < 3 {
        vec![format!("boundary has {n} corners")]
    } else {
        (0..n)
            .filter(|&k| orient2d(&b[(k + n - 1) % n], &b[k], &b[(k + 1) % n]) <= 0)
            .map(|k| format!("corner b{k}"))
            .collect()
    };
    CheckResult::new("boundary_convex", true, "boundary must be strictly convex and counterclockwise", bad)
}

fn check_weights_positive(s: &WeightedSubdivision) -> CheckResult {
    let bad = s
        .interior
        .iter()
        .filter(|v| !v.weight.is_positive())
        .map(|v| format!("vertex {} has weight {}", v.id, fmt_rational(&v.weight)))
        .collect();
    CheckResult::new("weights_positive", true, "weights must be positive", bad)
}

fn check_weights_sum(s: &WeightedSubdivision) -> CheckResult {
    let sum: Rational = s.interior.iter().map(|v| v.weight.clone()).sum();
    let bad = if sum.is_one() { vec![] } else { vec![format!("sum = {}", fmt_rational(&sum))] };
    CheckResult::new("weights_sum", true, "weights must sum to 1", bad)
}

fn check_interior_inside(s: &WeightedSubdivision) -> CheckResult {
    let bad = s
        .interior
        .iter()
        .filter(|v| !strictly_inside_convex(&v.point, &s.boundary))
        .map(|v| format!("vertex {} at {}", v.id, v.point))
        .collect();
    CheckResult::new("interior_inside", true, "interior vertices must lie strictly inside the boundary", bad)
}

fn check_boundary_edges(s: &WeightedSubdivision) -> CheckResult {
    let n = s.corner_count();
    let bad = (0..n)
        .filter(|&k| !s.has_edge(k, (k + 1) % n))
        .map(|k| format!("side b{k}-b{}", (k + 1) % n))
        .collect();
    CheckResult::new("boundary_edges", true, "every side of the boundary must be an edge", bad)
}

fn check_planar_embedding(s: &WeightedSubdivision) -> CheckResult {
    let mut bad = Vec::new();
    let n = s.node_count();
    let mut seen: HashMap<&PointR2, usize> = HashMap::new();
    for v in 0..n {
        if let Some(&u) = seen.get(s.node_point(v)) {
            bad.push(format!("vertices {} and {} coincide", s.node_id(u), s.node_id(v)));
        } else {
            seen.insert(s.node_point(v), v);
        }
    }
    let edges = s.edge_nodes();
    let boxes: Vec<[f64; 4]> = edges
        .iter()
        .map(|&(a, b)| {
            let (p, q) = (s.node_point(a).to_f64(), s.node_point(b).to_f64());
            [p.x.min(q.x), p.y.min(q.y), p.x.max(q.x), p.y.max(q.y)]
        })
        .collect();
    // conservative slack: boxes are compared in doubles only to skip distant pairs
    let slack = 1e-9;
    let disjoint = |a: &[f64; 4], b: &[f64; 4]| {
        a[2] + slack < b[0] || b[2] + slack < a[0] || a[3] + slack < b[1] || b[3] + slack < a[1]
    };
    for (i, &(a, b)) in edges.iter().enumerate() {
        let (pa, pb) = (s.node_point(a), s.node_point(b));
        for v in 0..n {
            if v == a || v == b {
                continue;
            }
            let p = s.node_point(v).to_f64();
            let bx = &boxes[i];
            if p.x + slack < bx[0] || p.x - slack > bx[2] || p.y + slack < bx[1] || p.y - slack > bx[3] {
                continue;
            }
            if point_on_open_segment(s.node_point(v), pa, pb) {
                bad.push(format!("vertex {} lies on edge {}-{}", s.node_id(v), s.node_id(a), s.node_id(b)));
            }
        }
        for (j, &(c, d)) in edges.iter().enumerate().skip(i + 1) {
            if disjoint(&boxes[i], &boxes[j]) {
                continue;
            }
            if segments_intersect(pa, pb, s.node_point(c), s.node_point(d)) {
                bad.push(format!(
                    "edges {}-{} and {}-{} cross",
                    s.node_id(a),
                    s.node_id(b),
                    s.node_id(c),
                    s.node_id(d)
                ));
            }
        }
    }
    CheckResult::new("planar_embedding", true, "edges may meet only at shared endpoints", bad)
}

fn face_name(s: &WeightedSubdivision, f: &[usize]) -> String {
    let ids: Vec<String> = f.iter().map(|&n| s.node_id(n).to_string()).collect();
    format!("[{}]", ids.join(","))
}

fn check_faces_closed(s: &WeightedSubdivision) -> CheckResult {
    let mut bad = Vec::new();
    for f in s.face_nodes() {
        let k = f.len();
        let mut sorted = f.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if k < 3 || sorted.len() != k {
            bad.push(format!("face {} is not a simple cycle", face_name(s, f)));
            continue;
        }
        for i in 0..k {
            if !s.has_edge(f[i], f[(i + 1) % k]) {
                bad.push(format!(
                    "face {} uses non-edge {}-{}",
                    face_name(s, f),
                    s.node_id(f[i]),
                    s.node_id(f[(i + 1) % k])
                ));
            }
        }
    }
    CheckResult::new("faces_closed", true, "faces must be closed cycles of edges", bad)
}

fn face_points<'a>(s: &'a WeightedSubdivision, f: &[usize]) -> Vec<&'a PointR2> {
    f.iter().map(|&n| s.node_point(n)).collect()
}

fn check_faces_ccw(s: &WeightedSubdivision, closed: bool) -> CheckResult {
    let mut bad = Vec::new();
    if closed {
        for f in s.face_nodes() {
            let a = polygon_area2(&face_points(s, f));
            if a.is_zero() {
                bad.push(format!("degenerate face {}", face_name(s, f)));
            } else if a.is_negative() {
                bad.push(format!("clockwise face {}", face_name(s, f)));
            }
        }
    }
    CheckResult::new("faces_ccw", true, "faces must have positive counterclockwise area", bad)
}

fn check_faces_tile(s: &WeightedSubdivision, closed: bool) -> CheckResult {
    let mut bad = Vec::new();
    if closed {
        let mut used: HashMap<(usize, usize), usize> = HashMap::new();
        let mut total = Rational::zero();
        for f in s.face_nodes() {
            total += polygon_area2(&face_points(s, f));
            for i in 0..f.len() {
                *used.entry((f[i], f[(i + 1) % f.len()])).or_default() += 1;
            }
        }
        let area = s.boundary_area2();
        if total != area {
            bad.push(format!("face areas sum to {} but the boundary encloses {}", fmt_rational(&(total / crate::geom::int(2))), fmt_rational(&(area / crate::geom::int(2)))));
        }
        for (&(a, b), &count) in &used {
            if count > 1 {
                bad.push(format!("directed edge {}->{} used {count} times", s.node_id(a), s.node_id(b)));
            }
        }
        let nb = s.corner_count();
        let mut missing = Vec::new();
        for &(a, b) in s.edge_nodes() {
            let fwd = used.contains_key(&(a, b));
            let bwd = used.contains_key(&(b, a));
            let ok = if s.is_boundary_side(a, b) {
                let (p, q) = if (a + 1) % nb == b { (a, b) } else { (b, a) };
                used.contains_key(&(p, q)) && !used.contains_key(&(q, p))
            } else {
                fwd && bwd
            };
            if !ok {
                missing.push(format!("edge {}-{} not bordered correctly", s.node_id(a), s.node_id(b)));
            }
        }
        missing.sort();
        bad.extend(missing);
        bad.sort();
    }
    CheckResult::new("faces_tile", true, "faces must tile the polygon", bad)
}

fn check_euler(s: &WeightedSubdivision) -> CheckResult {
    let chi = s.node_count() as i64 - s.edge_nodes().len() as i64 + s.face_nodes().len() as i64;
    let bad = if chi == 1 { vec![] } else { vec![format!("V - E + F = {chi}")] };
    CheckResult::new("euler", true, "V - E + F must equal 1", bad)
}

fn check_faces_convex(s: &WeightedSubdivision, closed: bool) -> CheckResult {
    let mut bad = Vec::new();
    if closed {
        for f in s.face_nodes() {
            let k = f.len();
            for i in 0..k {
                let (a, b, c) = (f[(i + k - 1) % k], f[i], f[(i + 1) % k]);
                if orient2d(s.node_point(a), s.node_point(b), s.node_point(c)) <= 0 {
                    bad.push(format!("face {} at vertex {}", face_name(s, f), s.node_id(b)));
                }
            }
        }
    }
    CheckResult::new("faces_convex", false, "faces must be strictly convex", bad)
}

fn half(v: &PointR2) -> u8 {
    if v.y.is_positive() || (v.y.is_zero() && v.x.is_positive()) {
        0
    } else {
        1
    }
}

/// Counterclockwise angular order of nonzero vectors starting from the positive x-axis.
pub(crate) fn angular_cmp(a: &PointR2, b: &PointR2) -> Ordering {
    half(a).cmp(&half(b)).then_with(|| {
        let c = a.cross(b);
        if c.is_positive() {
            Ordering::Less
        } else if c.is_negative() {
            Ordering::Greater
        } else {
            Ordering::Equal
        }
    })
}

fn check_vertex_angles(s: &WeightedSubdivision) -> CheckResult {
    let mut bad = Vec::new();
    for v in s.interior_nodes() {
        let p = s.node_point(v);
        let mut dirs: Vec<(PointR2, usize)> = s.neighbors(v).iter().map(|&w| (s.node_point(w) - p, w)).collect();
        dirs.sort_by(|a, b| angular_cmp(&a.0, &b.0));
        let k = dirs.len();
        if k < 3 {
            bad.push(format!("vertex {} has degree {k}", s.node_id(v)));
            continue;
        }
        for i in 0..k {
            let (u, w) = (&dirs[i], &dirs[(i + 1) % k]);
            let c = u.0.cross(&w.0);
            let reflex = c.is_negative() || (c.is_zero() && u.0.dot(&w.0).is_negative());
            if reflex {
                bad.push(format!(
                    "vertex {}: gap from {} to {} is at least pi",
                    s.node_id(v),
                    s.node_id(u.1),
                    s.node_id(w.1)
                ));
            }
        }
    }
    CheckResult::new("vertex_angles", false, "angles between consecutive edges at interior vertices must be below pi", bad)
}
