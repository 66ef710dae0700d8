use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::{lift_upper_hull, CapError, CapMesh, CapSpec, HullStatus};
use crate::geom::{point_in_triangle_f64, PointF2, PointF3};

#[derive(Clone, Debug, PartialEq)]
pub enum Init {
    /// `h_i = s (1 - |p_i - g|^2 / R^2)`.
    Paraboloid,
    /// `h_i = s (1 - |p_i - g| / R)`.
    Cone,
    Heights(Vec<f64>),
}

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iterations: usize,
    pub max_halvings: u32,
    pub init: Init,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { tol: 1e-9, max_iterations: 200, max_halvings: 30, init: Init::Paraboloid }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveReport {
    pub iterations: usize,
    pub residual: f64,
    /// Step halvings taken in each iteration.
    pub damping: Vec<u32>,
    pub finite_difference_jacobians: usize,
    pub init: String,
    pub converged: bool,
    #[serde(skip)]
    pub wall_time: Duration,
}

fn centroid_and_radius(spec: &CapSpec) -> (PointF2, f64) {
    let g = spec.boundary.iter().fold(PointF2::zeros(), |a, p| a + p) / spec.boundary.len() as f64;
    let r = spec.boundary.iter().map(|p| (p - g).norm()).fold(0.0, f64::max);
    (g, r)
}

fn shape(spec: &CapSpec, cone: bool) -> Vec<f64> {
    let (g, r) = centroid_and_radius(spec);
    spec.points
        .iter()
        .map(|p| {
            let t = (p - g).norm() / r;
            if cone {
                1.0 - t
            } else {
                1.0 - t * t
            }
        })
        .collect()
}

/// Scales `base` so the lifted cap has total curvature close to the spec's total.
fn scaled(spec: &CapSpec, base: &[f64]) -> Result<Vec<f64>, CapError> {
    let total = |s: f64| -> Result<f64, CapError> {
        let h: Vec<f64> = base.iter().map(|b| b * s).collect();
        Ok(lift_upper_hull(&spec.boundary, &spec.points, &h)?.total_curvature())
    };
    let mut hi = 1e-3 * spec.diameter();
    let mut doublings = 0;
    while total(hi)? < spec.total {
        hi *= 2.0;
        doublings += 1;
        if doublings > 80 {
            return Err(CapError::InvalidSpec("cannot reach the requested total curvature".into()));
        }
    }
    let mut lo = 0.0;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if total(mid)? < spec.total {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(base.iter().map(|b| b * hi).collect())
}

pub fn paraboloid_heights(spec: &CapSpec) -> Result<Vec<f64>, CapError> {
    scaled(spec, &shape(spec, false))
}

pub fn cone_heights(spec: &CapSpec) -> Result<Vec<f64>, CapError> {
    scaled(spec, &shape(spec, true))
}

/// Height of the hull above the projection of node `v`, with the barycentric weights of
/// the triangle containing it.
fn hull_height(mesh: &CapMesh, p: &PointF2) -> Option<(f64, [usize; 3], [f64; 3])> {
    for t in &mesh.triangles {
        let tri = t.map(|i| mesh.projection(i));
        if !point_in_triangle_f64(p, &tri) {
            continue;
        }
        let area = (tri[1] - tri[0]).perp(&(tri[2] - tri[0]));
        let l0 = (tri[1] - p).perp(&(tri[2] - p)) / area;
        let l1 = (tri[2] - p).perp(&(tri[0] - p)) / area;
        let l2 = 1.0 - l0 - l1;
        let z = l0 * mesh.vertices[t[0]].z + l1 * mesh.vertices[t[1]].z + l2 * mesh.vertices[t[2]].z;
        return Some((z, *t, [l0, l1, l2]));
    }
    None
}

fn residual(spec: &CapSpec, mesh: &CapMesh) -> DVector<f64> {
    let nb = mesh.corner_count;
    DVector::from_iterator(
        spec.points.len(),
        (0..spec.points.len()).map(|i| {
            let v = nb + i;
            match mesh.status[v] {
                HullStatus::Below => {
                    let gap = hull_height(mesh, &spec.points[i]).map(|(z, ..)| z - mesh.vertices[v].z).unwrap_or(0.0);
                    -spec.beta[i] - gap
                }
                _ => mesh.curvature[v] - spec.beta[i],
            }
        }),
    )
}

/// Gradients of the angle at `a` in triangle `abc` with respect to `a`, `b` and `c`.
fn angle_gradients(a: &PointF3, b: &PointF3, c: &PointF3) -> [PointF3; 3] {
    let u = b - a;
    let w = c - a;
    let (lu, lw) = (u.norm(), w.norm());
    let (uh, wh) = (u / lu, w / lw);
    let nu = w - uh * w.dot(&uh);
    let nw = u - wh * u.dot(&wh);
    let gb = -nu.normalize() / lu;
    let gc = -nw.normalize() / lw;
    [-(gb + gc), gb, gc]
}

fn analytic_jacobian(spec: &CapSpec, mesh: &CapMesh) -> DMatrix<f64> {
    let nb = mesh.corner_count;
    let n = spec.points.len();
    let mut j = DMatrix::zeros(n, n);
    for t in &mesh.triangles {
        for k in 0..3 {
            let a = t[k];
            if a < nb {
                continue;
            }
            let (b, c) = (t[(k + 1) % 3], t[(k + 2) % 3]);
            let g = angle_gradients(&mesh.vertices[a], &mesh.vertices[b], &mesh.vertices[c]);
            for (x, grad) in [a, b, c].into_iter().zip(g) {
                if x >= nb {
                    j[(a - nb, x - nb)] -= grad.z;
                }
            }
        }
    }
    for i in 0..n {
        let v = nb + i;
        if mesh.status[v] != HullStatus::Below {
            continue;
        }
        for c in 0..n {
            j[(i, c)] = 0.0;
        }
        j[(i, i)] = 1.0;
        if let Some((_, tri, bary)) = hull_height(mesh, &spec.points[i]) {
            for (x, l) in tri.into_iter().zip(bary) {
                if x >= nb {
                    j[(i, x - nb)] -= l;
                }
            }
        }
    }
    j
}

fn fd_jacobian(spec: &CapSpec, h: &[f64], r0: &DVector<f64>) -> Result<DMatrix<f64>, CapError> {
    let n = h.len();
    let step = 1e-7 * spec.diameter();
    let mut j = DMatrix::zeros(n, n);
    let mut hp = h.to_vec();
    for c in 0..n {
        hp[c] = h[c] + step;
        let mesh = lift_upper_hull(&spec.boundary, &spec.points, &hp)?;
        let r = residual(spec, &mesh);
        j.set_column(c, &((r - r0) / step));
        hp[c] = h[c];
    }
    Ok(j)
}

fn sorted_triangles(mesh: &CapMesh) -> Vec<[usize; 3]> {
    let mut t: Vec<[usize; 3]> = mesh
        .triangles
        .iter()
        .map(|t| {
            let k = (0..3).min_by_key(|&k| t[k]).expect("three");
            [t[k], t[(k + 1) % 3], t[(k + 2) % 3]]
        })
        .collect();
    t.sort_unstable();
    t
}

fn init_name(init: &Init) -> String {
    match init {
        Init::Paraboloid => "paraboloid".into(),
        Init::Cone => "cone".into(),
        Init::Heights(_) => "given".into(),
    }
}

/// Solves for the cap with the default options and the given tolerance.
pub fn solve_cap(spec: &CapSpec, tol: f64) -> Result<(CapMesh, SolveReport), CapError> {
    solve_cap_from(spec, &SolveOptions { tol, ..SolveOptions::default() })
}

pub fn solve_cap_from(spec: &CapSpec, opts: &SolveOptions) -> Result<(CapMesh, SolveReport), CapError> {
    let started = Instant::now();
    if spec.total >= std::f64::consts::TAU || spec.beta.iter().any(|&b| b <= 0.0) {
        return Err(CapError::InvalidSpec("curvatures must be positive with total below 2*pi".into()));
    }
    let mut h = match &opts.init {
        Init::Paraboloid => paraboloid_heights(spec)?,
        Init::Cone => cone_heights(spec)?,
        Init::Heights(h) => h.clone(),
    };
    let mut mesh = lift_upper_hull(&spec.boundary, &spec.points, &h)?;
    let mut r = residual(spec, &mesh);
    let mut damping = Vec::new();
    let mut fd_count = 0;
    let mut changed = false;
    let mut best = (r.amax(), mesh.clone());
    for it in 0..opts.max_iterations {
        let res = r.amax();
        if res <= opts.tol && mesh.flagged().is_empty() {
            return Ok((
                mesh,
                SolveReport {
                    iterations: it,
                    residual: res,
                    damping,
                    finite_difference_jacobians: fd_count,
                    init: init_name(&opts.init),
                    converged: true,
                    wall_time: started.elapsed(),
                },
            ));
        }
        let stalled = damping.last().is_some_and(|&k| k >= opts.max_halvings);
        let jac = if changed && stalled {
            fd_count += 1;
            fd_jacobian(spec, &h, &r)?
        } else {
            analytic_jacobian(spec, &mesh)
        };
        let delta = match jac.clone().lu().solve(&(-&r)) {
            Some(d) if d.iter().all(|x| x.is_finite()) => d,
            _ => DVector::from_iterator(r.len(), (0..r.len()).map(|i| -r[i] / jac[(i, i)].max(1e-12))),
        };
        let norm0 = r.norm();
        let mut t = 1.0;
        let mut halvings = 0;
        let (next_h, next_mesh, next_r) = loop {
            let cand: Vec<f64> = h.iter().zip(delta.iter()).map(|(a, d)| a + t * d).collect();
            let m = lift_upper_hull(&spec.boundary, &spec.points, &cand)?;
            let rc = residual(spec, &m);
            if rc.norm() < norm0 || halvings >= opts.max_halvings {
                break (cand, m, rc);
            }
            t *= 0.5;
            halvings += 1;
        };
        damping.push(halvings);
        changed = sorted_triangles(&next_mesh) != sorted_triangles(&mesh);
        h = next_h;
        mesh = next_mesh;
        r = next_r;
        if r.amax() < best.0 {
            best = (r.amax(), mesh.clone());
        }
    }
    let res = r.amax();
    if res <= opts.tol && mesh.flagged().is_empty() {
        return Ok((
            mesh,
            SolveReport {
                iterations: opts.max_iterations,
                residual: res,
                damping,
                finite_difference_jacobians: fd_count,
                init: init_name(&opts.init),
                converged: true,
                wall_time: started.elapsed(),
            },
        ));
    }
    Err(CapError::NonConvergence { iterations: opts.max_iterations, best_residual: best.0 })
}
