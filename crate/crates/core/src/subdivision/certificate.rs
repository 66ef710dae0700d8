use std::collections::BTreeSet;

use num_traits::{One, Signed, Zero};
use serde::Serialize;

use super::paths::{forced_path_with, PathInG, PathStatus, SuccessorRule};
use super::symmetry::central_symmetry_report;
use super::validate::validate;
use super::{SubdivisionError, VertexId, WeightedSubdivision};
use crate::geom::{fmt_rational, from_f64, int, rm_excluded, to_f64, PointR2, Rational};

/// The vertex labels the argument refers to.
#[derive(Clone, Debug, Serialize)]
pub struct CertificatePlan {
    pub source: i64,
    pub branches: Vec<i64>,
    /// Interior part of the path forced from `source`, starting at the first branch.
    pub expected_path: Vec<i64>,
    /// Vertex that the source paths visit before the meeting vertices.
    pub repeat_vertex: i64,
    pub meeting: i64,
    pub expected_spiral_prefix: Vec<i64>,
}

impl CertificatePlan {
    pub fn triangle84() -> Self {
        let mut expected_path: Vec<i64> = (2..=22).collect();
        expected_path.extend([-24, 24, 25, 26, 28, 29, 30, -42, -41]);
        let mut expected_spiral_prefix = vec![24, 25, 27];
        expected_spiral_prefix.extend(9..=15);
        CertificatePlan {
            source: 1,
            branches: vec![2, 10, 15],
            expected_path,
            repeat_vertex: 15,
            meeting: 24,
            expected_spiral_prefix,
        }
    }

    fn ids(&self) -> Vec<i64> {
        let mut v = vec![self.source, -self.source, self.repeat_vertex, self.meeting, -self.meeting];
        v.extend(&self.branches);
        v.extend(&self.expected_path);
        v
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Certified,
    Inconclusive,
    NotApplicable,
}

#[derive(Clone, Debug, Serialize)]
pub struct PathRecord {
    pub label: String,
    pub center: PointR2,
    pub rho: f64,
    pub vertices: Vec<VertexId>,
    pub status: PathStatus,
    pub accepted: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct StepRecord {
    pub step: String,
    pub passed: bool,
    pub detail: String,
}

/// Slack by which neighbour `excluded` of `at` fails the radial condition for every
/// reference point in the disk.
#[derive(Clone, Debug, Serialize)]
pub struct ExclusionMargin {
    pub path: String,
    pub at: VertexId,
    pub excluded: VertexId,
    /// `<w - v, v - c>` at the disk center, exact.
    pub inner_product: String,
    /// `<w - v, v - c>^2 - rho^2 |w - v|^2`, exact and positive when excluded.
    pub margin_sq: String,
    /// `-<w - v, v - c> - rho |w - v|`.
    pub margin: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    pub subdivision: String,
    pub eps: String,
    pub eps_f64: f64,
    pub source_weight: String,
    pub other_mass: String,
    pub diameter_bound: String,
    pub rho1: f64,
    pub rho0: f64,
    pub rho1_exact: String,
    pub rho0_exact: String,
    pub branch_paths: Vec<PathRecord>,
    pub mirror_paths: Vec<PathRecord>,
    pub spiral_paths: Vec<PathRecord>,
    pub symmetric: bool,
    pub symmetry_issues: Vec<String>,
    pub meeting_vertices: Vec<VertexId>,
    pub spiral_matches_expected: bool,
    pub steps: Vec<StepRecord>,
    pub margins: Vec<ExclusionMargin>,
    pub min_margin: Option<f64>,
    pub sqrt3_stable: Option<bool>,
    pub max_admissible_eps: Option<f64>,
    pub convexity_findings: Vec<String>,
    pub verdict: Verdict,
}

impl Certificate {
    fn not_applicable(s: &WeightedSubdivision, eps: &Rational, reason: String) -> Self {
        Certificate {
            subdivision: s.name.clone(),
            eps: fmt_rational(eps),
            eps_f64: to_f64(eps),
            source_weight: String::new(),
            other_mass: String::new(),
            diameter_bound: String::new(),
            rho1: 0.0,
            rho0: 0.0,
            rho1_exact: String::new(),
            rho0_exact: String::new(),
            branch_paths: vec![],
            mirror_paths: vec![],
            spiral_paths: vec![],
            symmetric: false,
            symmetry_issues: vec![],
            meeting_vertices: vec![],
            spiral_matches_expected: false,
            steps: vec![StepRecord { step: "precondition".into(), passed: false, detail: reason }],
            margins: vec![],
            min_margin: None,
            sqrt3_stable: None,
            max_admissible_eps: None,
            convexity_findings: vec![],
            verdict: Verdict::NotApplicable,
        }
    }

    pub fn step(&self, name: &str) -> Option<&StepRecord> {
        self.steps.iter().find(|s| s.step.starts_with(name))
    }
}

fn iv(i: i64) -> VertexId {
    VertexId::Interior(i)
}

fn fmt_path(v: &[VertexId]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
}

struct Radii {
    alpha: Rational,
    other: Rational,
    diameter: Rational,
    rho1: Rational,
    rho0: Rational,
}

fn radii(s: &WeightedSubdivision, plan: &CertificatePlan, diameter: &Rational) -> Result<Radii, String> {
    let w = |i: i64| -> Result<Rational, String> {
        let n = s.node_of(iv(i)).map_err(|e| e.to_string())?;
        Ok(s.node_weight(n).cloned().unwrap_or_else(Rational::zero))
    };
    let alpha = w(plan.source)?;
    let alpha_mirror = w(-plan.source)?;
    if alpha != alpha_mirror {
        return Err(format!("weights of {} and {} differ", plan.source, -plan.source));
    }
    if !alpha.is_positive() {
        return Err("source weight is not positive".into());
    }
    let other = Rational::one() - &alpha - &alpha_mirror;
    let rho1 = &other * diameter / &alpha;
    let rho0 = &rho1 / int(2);
    Ok(Radii { alpha, other, diameter: diameter.clone(), rho1, rho0 })
}

/// Outcome of one pass of the forced-path checks for a fixed geometry and radii.
struct Run {
    steps: Vec<StepRecord>,
    branch: Vec<PathRecord>,
    mirror: Vec<PathRecord>,
    spiral: Vec<PathRecord>,
    meeting: Vec<VertexId>,
    spiral_matches: bool,
    margins: Vec<ExclusionMargin>,
    ok: bool,
}

fn record(
    s: &WeightedSubdivision,
    label: String,
    center: &PointR2,
    rho: &Rational,
    path: &PathInG,
    status: &PathStatus,
    accepted: bool,
    margins: &mut Vec<ExclusionMargin>,
) -> PathRecord {
    let rho_f = to_f64(rho);
    for k in 0..path.vertices.len() {
        let v = path.vertices[k];
        let Ok(vn) = s.node_of(v) else { continue };
        if v.is_corner() {
            continue;
        }
        let p = s.node_point(vn);
        for &w in s.neighbors(vn) {
            let wid = s.node_id(w);
            if path.vertices[..=k].contains(&wid) || path.vertices.get(k + 1) == Some(&wid) {
                continue;
            }
            let q = s.node_point(w);
            if !rm_excluded(q, p, center, rho) {
                continue;
            }
            let d = q - p;
            let dot = d.dot(&(p - center));
            let msq = &dot * &dot - rho * rho * d.norm_sq();
            margins.push(ExclusionMargin {
                path: label.clone(),
                at: v,
                excluded: wid,
                inner_product: fmt_rational(&dot),
                margin_sq: fmt_rational(&msq),
                margin: -to_f64(&dot) - rho_f * to_f64(&d.norm_sq()).sqrt(),
            });
        }
    }
    PathRecord {
        label,
        center: center.clone(),
        rho: rho_f,
        vertices: path.vertices.clone(),
        status: status.clone(),
        accepted,
    }
}

/// True when the path ends at a corner or branches only into corners.
fn ends_at_boundary(path: &PathInG, status: &PathStatus) -> bool {
    match status {
        PathStatus::ReachedBoundary => path.last().is_corner(),
        PathStatus::Branched { options, .. } => options.iter().all(VertexId::is_corner),
        PathStatus::DeadEnd { .. } => false,
    }
}

fn interior_part(path: &PathInG) -> Vec<VertexId> {
    path.vertices.iter().copied().filter(|v| !v.is_corner()).collect()
}

fn run_checks(s: &WeightedSubdivision, plan: &CertificatePlan, r: &Radii) -> Result<Run, SubdivisionError> {
    let rule = SuccessorRule::Possible;
    let mut steps = Vec::new();
    let mut margins = Vec::new();
    let src = iv(plan.source);
    let p1 = s.point(src)?.clone();
    let pm1 = s.point(src.negated())?.clone();
    let expected: Vec<VertexId> = plan.expected_path.iter().copied().map(iv).collect();

    let mut branch = Vec::new();
    let mut mirror = Vec::new();
    let mut b_ok = true;
    let mut b_detail = Vec::new();
    let mut union = BTreeSet::new();
    for &l in &plan.branches {
        let (path, status) = forced_path_with(s, &[src, iv(l)], &p1, &r.rho1, true, rule)?;
        let Some(start) = expected.iter().position(|&v| v == iv(l)) else {
            return Err(SubdivisionError::UnknownVertex(format!("branch {l} not on the expected path")));
        };
        let mut want = vec![src];
        want.extend(&expected[start..]);
        let inner = interior_part(&path);
        let repeat = inner.iter().position(|&v| v == iv(plan.repeat_vertex));
        let meet = inner.iter().position(|&v| v == iv(plan.meeting) || v == iv(-plan.meeting));
        let order_ok = matches!((repeat, meet), (Some(a), Some(b)) if a < b);
        let accepted = inner == want && ends_at_boundary(&path, &status) && order_ok;
        if !accepted {
            b_ok = false;
            b_detail.push(format!("branch {l}: got {} ({:?})", fmt_path(&path.vertices), status));
        }
        union.extend(inner.iter().copied());
        branch.push(record(s, format!("source via {l}"), &p1, &r.rho1, &path, &status, accepted, &mut margins));

        let mprefix = [src.negated(), iv(-l)];
        let (mpath, mstatus) = forced_path_with(s, &mprefix, &pm1, &r.rho1, true, rule)?;
        let reflected: Vec<VertexId> = inner.iter().map(VertexId::negated).collect();
        let m_ok = interior_part(&mpath) == reflected && ends_at_boundary(&mpath, &mstatus);
        mirror.push(record(s, format!("mirror via {}", -l), &pm1, &r.rho1, &mpath, &mstatus, m_ok, &mut margins));
    }
    if b_detail.is_empty() {
        b_detail.push(format!(
            "each branch follows {} to the boundary, visiting {} before {}",
            fmt_path(&expected),
            plan.repeat_vertex,
            plan.meeting
        ));
    }
    steps.push(StepRecord { step: "b: source paths".into(), passed: b_ok, detail: b_detail.join("; ") });

    let issues = central_symmetry_report(s);
    let c_ok = issues.is_empty() && mirror.iter().all(|m| m.accepted);
    steps.push(StepRecord {
        step: "c: symmetry".into(),
        passed: c_ok,
        detail: if c_ok {
            "interior part symmetric and mirror paths are reflections".into()
        } else {
            format!("{} symmetry issues; mirror paths accepted: {}", issues.len(), mirror.iter().all(|m| m.accepted))
        },
    });

    let meeting: Vec<VertexId> = union.iter().copied().filter(|v| union.contains(&v.negated())).collect();
    let want_meet: BTreeSet<VertexId> = [iv(plan.meeting), iv(-plan.meeting)].into_iter().collect();
    let d_ok = meeting.iter().copied().collect::<BTreeSet<_>>() == want_meet;
    steps.push(StepRecord {
        step: "d: meeting vertices".into(),
        passed: d_ok,
        detail: format!("source and mirror paths share {}", fmt_path(&meeting)),
    });

    let o = PointR2::origin();
    let mut spiral = Vec::new();
    let mut e_ok = true;
    let mut spiral_matches = true;
    for sign in [1, -1] {
        let start = iv(sign * plan.meeting);
        let target = iv(sign * plan.repeat_vertex);
        let (path, status) = forced_path_with(s, &[start], &o, &r.rho0, true, rule)?;
        let accepted = path.contains(target);
        e_ok &= accepted;
        let want: Vec<VertexId> = plan.expected_spiral_prefix.iter().map(|&i| iv(sign * i)).collect();
        spiral_matches &= path.vertices.starts_with(&want);
        spiral.push(record(s, format!("spiral from {start}"), &o, &r.rho0, &path, &status, accepted, &mut margins));
    }
    steps.push(StepRecord {
        step: "e: spiral paths".into(),
        passed: e_ok,
        detail: format!(
            "paths from +-{} forced to +-{}: {}",
            plan.meeting,
            plan.repeat_vertex,
            spiral.iter().map(|p| fmt_path(&p.vertices)).collect::<Vec<_>>().join(" | ")
        ),
    });

    let ok = b_ok && c_ok && d_ok && e_ok;
    steps.push(StepRecord {
        step: "f: contradiction".into(),
        passed: ok,
        detail: if ok {
            format!(
                "the ancestral path of {} would pass {} twice, so no monotone cut forest exists",
                plan.source, plan.repeat_vertex
            )
        } else {
            "not established".into()
        },
    });
    Ok(Run { steps, branch, mirror, spiral, meeting, spiral_matches, margins, ok })
}

/// Subdivisions with every `sqrt(3)` corner coordinate moved to a rational bound.
fn sqrt3_variants(s: &WeightedSubdivision) -> Vec<WeightedSubdivision> {
    let mut out = Vec::new();
    for a in &s.sqrt3 {
        let (lo, hi) = a.bounds(160);
        out.push(s.with_corner_coordinate(a.corner, a.axis, lo));
        out.push(s.with_corner_coordinate(a.corner, a.axis, hi));
    }
    out
}

fn same_decisions(a: &Run, b: &Run) -> bool {
    let key = |r: &Run| -> Vec<(Vec<VertexId>, PathStatus)> {
        r.branch.iter().chain(&r.mirror).chain(&r.spiral).map(|p| (p.vertices.clone(), p.status.clone())).collect()
    };
    a.ok == b.ok && key(a) == key(b)
}

fn diameter(s: &WeightedSubdivision) -> Rational {
    sqrt3_variants(s).iter().map(|v| v.diameter_upper_bound()).fold(s.diameter_upper_bound(), |a, b| a.max(b))
}

fn passes(s: &WeightedSubdivision, plan: &CertificatePlan, eps: &Rational, d: &Rational) -> bool {
    let se = s.with_eps(eps);
    match radii(&se, plan, d) {
        Ok(r) => run_checks(&se, plan, &r).map(|run| run.ok).unwrap_or(false),
        Err(_) => false,
    }
}

/// Largest `ε` (to relative precision 1e-3) at which the checks pass, assuming
/// monotonicity in `ε`.
fn max_admissible(s: &WeightedSubdivision, plan: &CertificatePlan, eps: &Rational, d: &Rational) -> Option<f64> {
    let n_eps = s.interior.iter().filter(|v| matches!(v.spec, super::WeightSpec::AutoEps)).count() as i64;
    let cap = if n_eps > 0 { Rational::one() / int(n_eps) } else { return None };
    let ten = int(10);
    let (mut lo, mut hi);
    if passes(s, plan, eps, d) {
        lo = eps.clone();
        hi = eps * &ten;
        while hi < cap && passes(s, plan, &hi, d) {
            lo = hi.clone();
            hi = &hi * &ten;
        }
        if hi >= cap {
            hi = cap;
        }
    } else {
        hi = eps.clone();
        lo = eps / &ten;
        let mut tries = 0;
        while !passes(s, plan, &lo, d) {
            tries += 1;
            if tries > 30 {
                return None;
            }
            hi = lo.clone();
            lo = &lo / &ten;
        }
    }
    while to_f64(&hi) / to_f64(&lo) > 1.001 {
        let mid = from_f64((to_f64(&lo) * to_f64(&hi)).sqrt());
        if mid <= lo || mid >= hi {
            break;
        }
        if passes(s, plan, &mid, d) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(to_f64(&lo))
}

pub fn nonmonotonicity_certificate(s: &WeightedSubdivision, eps: &Rational) -> Result<Certificate, SubdivisionError> {
    nonmonotonicity_certificate_with(s, eps, &CertificatePlan::triangle84(), true)
}

/// Runs the certificate for an explicit plan; `search_eps` enables the bisection for
/// the largest admissible `ε`.
pub fn nonmonotonicity_certificate_with(
    s: &WeightedSubdivision,
    eps: &Rational,
    plan: &CertificatePlan,
    search_eps: bool,
) -> Result<Certificate, SubdivisionError> {
    let report = validate(s);
    if let Some(c) = report.checks.iter().find(|c| c.structural && !c.passed) {
        return Err(SubdivisionError::Invariant { check: c.name.to_string(), detail: c.detail() });
    }
    if !eps.is_positive() {
        return Err(SubdivisionError::Parse("eps must be positive".into()));
    }
    let missing: Vec<i64> = plan.ids().into_iter().filter(|&i| s.node_of(iv(i)).is_err()).collect();
    if !missing.is_empty() {
        let ids: Vec<String> = missing.iter().map(ToString::to_string).collect();
        return Ok(Certificate::not_applicable(s, eps, format!("vertices {} are absent", ids.join(", "))));
    }
    let se = s.with_eps(eps);
    let wreport = validate(&se);
    if !wreport.structural_passed() {
        return Ok(Certificate::not_applicable(s, eps, format!("weights invalid at eps = {}", fmt_rational(eps))));
    }
    let d = diameter(s);
    let r = match radii(&se, plan, &d) {
        Ok(r) => r,
        Err(e) => return Ok(Certificate::not_applicable(s, eps, e)),
    };
    let run = run_checks(&se, plan, &r)?;
    let mut steps = vec![StepRecord {
        step: "a: radii".into(),
        passed: true,
        detail: format!(
            "alpha = {}, other mass = {}, diameter bound = {:.9}, rho1 = {:.6e}, rho0 = {:.6e}",
            fmt_rational(&r.alpha),
            fmt_rational(&r.other),
            to_f64(&r.diameter),
            to_f64(&r.rho1),
            to_f64(&r.rho0)
        ),
    }];
    steps.extend(run.steps.iter().cloned());
    let variants = sqrt3_variants(&se);
    let sqrt3_stable = if variants.is_empty() {
        None
    } else {
        Some(variants.iter().all(|v| run_checks(v, plan, &r).map(|alt| same_decisions(&run, &alt)).unwrap_or(false)))
    };
    if let Some(stable) = sqrt3_stable {
        steps.push(StepRecord {
            step: "sqrt3 interval".into(),
            passed: stable,
            detail: "decisions repeated with irrational corner coordinates at both interval bounds".into(),
        });
    }
    let margins_positive = run.margins.iter().all(|m| !m.margin_sq.starts_with('-') && m.margin_sq != "0");
    let certified = run.ok && margins_positive && sqrt3_stable.unwrap_or(true);
    let min_margin = run.margins.iter().map(|m| m.margin).min_by(f64::total_cmp);
    let max_admissible_eps =
        if search_eps && s.uses_auto_weights() { max_admissible(s, plan, eps, &d) } else { None };
    let convexity_findings = report
        .checks
        .iter()
        .filter(|c| !c.structural && !c.passed)
        .flat_map(|c| c.offending.iter().map(move |o| format!("{}: {o}", c.name)))
        .collect();
    let issues = central_symmetry_report(s);
    Ok(Certificate {
        subdivision: s.name.clone(),
        eps: fmt_rational(eps),
        eps_f64: to_f64(eps),
        source_weight: fmt_rational(&r.alpha),
        other_mass: fmt_rational(&r.other),
        diameter_bound: fmt_rational(&r.diameter),
        rho1: to_f64(&r.rho1),
        rho0: to_f64(&r.rho0),
        rho1_exact: fmt_rational(&r.rho1),
        rho0_exact: fmt_rational(&r.rho0),
        branch_paths: run.branch,
        mirror_paths: run.mirror,
        spiral_paths: run.spiral,
        symmetric: issues.is_empty(),
        symmetry_issues: issues,
        meeting_vertices: run.meeting,
        spiral_matches_expected: run.spiral_matches,
        steps,
        margins: run.margins,
        min_margin,
        sqrt3_stable,
        max_admissible_eps,
        convexity_findings,
        verdict: if certified { Verdict::Certified } else { Verdict::Inconclusive },
    })
}
