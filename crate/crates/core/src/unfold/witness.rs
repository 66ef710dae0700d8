use serde::Serialize;

use super::develop::j;
use super::{cut_along, develop, faces_overlap, Development, UnfoldError};
use crate::capsolver::{solve_cap, CapSpec, SolveReport};
use crate::cutforest::{center_of_rotation, is_monotone, CutForest};
use crate::geom::{to_f64, PointF2};
use crate::subdivision::{VertexId, WeightedSubdivision};
use crate::surface::{barycentric, induce_pseudo_edge_graph, pseudo_triangulation, PseudoEdgeGraph, Surface};

/// Relative tolerance for a disk tangent to a side of `Δ`.
const TANGENCY: f64 = 1e-12;

/// The overlap construction at a violated vertex `p_i` with parent `p_i*`.
#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    pub vertex: VertexId,
    pub node: usize,
    pub parent: VertexId,
    pub lambda: f64,
    pub beta: f64,
    pub beta_x: f64,
    pub center: PointF2,
    /// Point of the edge `p_i p_i*` at distance `min(λ/2, |p_i* − p_i|/2)` from `p_i`.
    pub x: PointF2,
    /// The distance was capped at half the edge.
    pub clamped: bool,
    pub y: PointF2,
    pub r: f64,
    pub x_right: PointF2,
    pub x_left: PointF2,
    /// `y′`, from the affine extension of `ψ` on `Δ` when `y` lies outside it.
    pub y_image: PointF2,
    /// `|y′ − x′_R|`.
    pub distance: f64,
    /// `r − |y′ − x′_R|`.
    pub slack: f64,
    /// Distance from `y` to the sides of `Δ` minus `r`; negative when the disk leaves `Δ`.
    /// It vanishes when `λ` equals the full margin and `x` is not clamped.
    pub clearance: f64,
    /// Triangles of `G^T` on the left and right of the edge; `Δ` is the left one.
    pub left_face: usize,
    pub right_face: usize,
    pub near_vertex: bool,
    pub y_in_triangle: bool,
    pub disk_in_face: bool,
    pub valid: bool,
    pub reasons: Vec<String>,
    /// The faces shown to overlap by the exact test, when the witness is valid.
    pub overlap: Option<(usize, usize)>,
}

/// Builds the witness at `node`, whose monotonicity condition must fail, with margin
/// `lambda` and cap parameter `beta`.
pub fn overlap_witness(
    dev: &Development,
    s: &WeightedSubdivision,
    f: &CutForest,
    node: usize,
    lambda: f64,
    beta: f64,
) -> Result<Witness, UnfoldError> {
    if beta <= 0.0 {
        return Err(UnfoldError::ZeroBeta);
    }
    let report = is_monotone(s, f);
    let check = report
        .checks
        .iter()
        .find(|c| c.node == node)
        .ok_or_else(|| UnfoldError::Precondition(format!("node {node} is not an interior vertex")))?;
    if check.holds {
        return Err(UnfoldError::Precondition(format!("{} satisfies the monotonicity condition", check.vertex)));
    }
    if !(lambda > 0.0) {
        return Err(UnfoldError::Precondition("lambda must be positive".into()));
    }
    let parent = f.parent(node).ok_or(UnfoldError::NotOnForest(node))?;
    let p = s.node_point(node).to_f64();
    let ps = s.node_point(parent).to_f64();
    let len = (ps - p).norm();
    let clamped = len / 2.0 < lambda / 2.0;
    let x = p + (ps - p) * (lambda.min(len) / 2.0 / len);
    let (c, alpha) = center_of_rotation(s, f, node).map_err(|e| UnfoldError::Forest(e.to_string()))?;
    let center = c.to_f64();
    let beta_x = to_f64(&alpha) * beta;
    let y = x + j(&(x - center)) * beta_x;
    let r = beta_x * lambda / 2.0;

    let cut = &dev.cut;
    let left_face = cut.face_left(node, parent).ok_or(UnfoldError::NotOnForest(node))?;
    let right_face = cut.face_left(parent, node).ok_or(UnfoldError::NotOnForest(node))?;
    let (x_right, x_left) = dev.psi_sides(node, parent, &x)?;
    let tri = cut.nodes(left_face).map(|n| cut.triangulation.planar.points[n].to_f64());
    let y_in_triangle = barycentric(&tri, &y).iter().all(|&b| b >= 0.0);
    let side_distance = (0..3)
        .map(|k| {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            (b - a).perp(&(y - a)) / (b - a).norm()
        })
        .fold(f64::INFINITY, f64::min);
    let clearance = side_distance - r;
    let disk_in_face = y_in_triangle && clearance >= -TANGENCY * y.norm().max(1.0);
    let near_vertex = (x - p).norm() <= lambda / 2.0;

    let mut reasons = Vec::new();
    let y_image = dev.psi_extended(left_face, &y);
    let distance = (y_image - x_right).norm();
    if !y_in_triangle {
        reasons.push("y outside Δ".to_string());
    }
    if distance >= r {
        reasons.push(format!("|y' - x'_R| = {distance:.6e} is not below r = {r:.6e}"));
    }
    if y_in_triangle && !disk_in_face {
        reasons.push(format!("disk leaves Δ by {:.6e}", -clearance));
    }
    if !near_vertex {
        reasons.push("|x - p_i| exceeds λ/2".into());
    }
    let valid = reasons.is_empty();
    let overlap = if valid && faces_overlap(dev, right_face, left_face) == Some(true) {
        Some((right_face.min(left_face), right_face.max(left_face)))
    } else {
        None
    };
    Ok(Witness {
        vertex: s.node_id(node),
        node,
        parent: s.node_id(parent),
        lambda,
        beta,
        beta_x,
        center,
        x,
        clamped,
        y,
        r,
        x_right,
        x_left,
        y_image,
        distance,
        slack: r - distance,
        clearance,
        left_face,
        right_face,
        near_vertex,
        y_in_triangle,
        disk_in_face,
        valid,
        reasons,
        overlap,
    })
}

/// A cap solved at `beta`, its pseudo-edge graph, and its development along `f`.
#[derive(Clone, Debug)]
pub struct CapUnfolding {
    pub beta: f64,
    pub surface: Surface,
    pub graph: PseudoEdgeGraph,
    pub development: Development,
    pub solve: SolveReport,
}

/// Solves the cap of `s` at `beta` to tolerance `tol`, induces `Ḡ`, and develops the
/// cap cut along `f`.
pub fn unfold_cap(s: &WeightedSubdivision, f: &CutForest, beta: f64, tol: f64) -> Result<CapUnfolding, UnfoldError> {
    if beta <= 0.0 {
        return Err(UnfoldError::ZeroBeta);
    }
    let spec = CapSpec::from_subdivision(s, beta)?;
    let (mesh, solve) = solve_cap(&spec, tol)?;
    if !solve.converged {
        return Err(UnfoldError::Solve(solve.residual));
    }
    let surface = Surface::new(mesh);
    let graph = induce_pseudo_edge_graph(&surface, s)?;
    let tri = pseudo_triangulation(&surface, s, &graph)?;
    let development = develop(cut_along(tri, s, f)?)?;
    Ok(CapUnfolding { beta, surface, graph, development, solve })
}

#[derive(Clone, Debug)]
pub struct ThresholdOptions {
    /// Smallest `β` on the halving grid.
    pub beta_min: f64,
    /// Bisection steps between the first valid grid point and the one above it.
    pub refine: usize,
    /// Halvings of `β₀` checked after the threshold is found.
    pub below: usize,
    pub tol: f64,
}

impl Default for ThresholdOptions {
    fn default() -> Self {
        ThresholdOptions { beta_min: 1e-4, refine: 3, below: 2, tol: 1e-12 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ThresholdProbe {
    pub beta: f64,
    pub valid: bool,
    pub slack: Option<f64>,
    pub reasons: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ThresholdReport {
    /// Largest tested `β` at which the witness validates.
    pub beta0: Option<f64>,
    pub witness: Option<Witness>,
    pub probes: Vec<ThresholdProbe>,
    /// The witness also validated at every tested halving of `β₀`.
    pub monotone_below: bool,
}

fn probe(
    s: &WeightedSubdivision,
    f: &CutForest,
    node: usize,
    lambda: f64,
    beta: f64,
    tol: f64,
) -> Result<(ThresholdProbe, Option<Witness>), UnfoldError> {
    let dev = match unfold_cap(s, f, beta, tol) {
        Ok(u) => u.development,
        Err(e @ UnfoldError::Precondition(_)) => return Err(e),
        Err(e) => return Ok((ThresholdProbe { beta, valid: false, slack: None, reasons: vec![e.to_string()] }, None)),
    };
    let w = overlap_witness(&dev, s, f, node, lambda, beta)?;
    Ok((ThresholdProbe { beta, valid: w.valid, slack: Some(w.slack), reasons: w.reasons.clone() }, Some(w)))
}

/// Scans `β_hi, β_hi/2, …` down to `beta_min` for the first `β` where the witness at
/// `node` validates, then bisects towards the invalid grid point above it. Each probe
/// re-solves the cap and recomputes the pseudo-edges.
pub fn beta_threshold(
    s: &WeightedSubdivision,
    f: &CutForest,
    node: usize,
    lambda: f64,
    beta_hi: f64,
    opts: &ThresholdOptions,
) -> Result<ThresholdReport, UnfoldError> {
    let check = is_monotone(s, f);
    match check.checks.iter().find(|c| c.node == node) {
        Some(c) if !c.holds => {}
        _ => return Err(UnfoldError::Precondition(format!("node {node} is not a violated vertex"))),
    }
    let mut probes = Vec::new();
    let mut beta = beta_hi;
    let mut found: Option<(f64, Witness)> = None;
    let mut above: Option<f64> = None;
    while beta >= opts.beta_min {
        let (p, w) = probe(s, f, node, lambda, beta, opts.tol)?;
        let ok = p.valid;
        probes.push(p);
        if ok {
            found = Some((beta, w.expect("valid witness")));
            break;
        }
        above = Some(beta);
        beta /= 2.0;
    }
    let Some((grid, mut best)) = found else {
        return Ok(ThresholdReport { beta0: None, witness: None, probes, monotone_below: false });
    };
    let mut beta0 = grid;
    if let Some(mut hi) = above {
        let mut lo = grid;
        for _ in 0..opts.refine {
            let mid = (lo * hi).sqrt();
            let (p, w) = probe(s, f, node, lambda, mid, opts.tol)?;
            let ok = p.valid;
            probes.push(p);
            if ok {
                lo = mid;
                beta0 = mid;
                best = w.expect("valid witness");
            } else {
                hi = mid;
            }
        }
    }
    let mut monotone_below = true;
    let mut b = beta0;
    for _ in 0..opts.below {
        b /= 2.0;
        let (p, _) = probe(s, f, node, lambda, b, opts.tol)?;
        monotone_below &= p.valid;
        probes.push(p);
    }
    Ok(ThresholdReport { beta0: Some(beta0), witness: Some(best), probes, monotone_below })
}
