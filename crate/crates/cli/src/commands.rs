//! One function per subcommand.

use std::collections::BTreeMap;
use std::path::Path;

use durer_forge::assembly::{assemble_tetrahedron, global_graph, AssemblyError};
use durer_forge::capsolver::{solve_cap, CapError, CapMesh, CapSpec};
use durer_forge::cutforest::{exists_monotone_forest, is_monotone, CutForest, SearchOptions, SearchOutcome, SearchReport, Violation};
use durer_forge::export::{cap_obj, polyhedron_obj, render_svg, ExportError, SvgLayout};
use durer_forge::geom::fmt_rational;
use durer_forge::pipeline::{reproduce as run_pipeline, PipelineError, ReproduceConfig, SCHEMA};
use durer_forge::subdivision::{nonmonotonicity_certificate, validate as validate_subdivision, Verdict, VertexId, WeightedSubdivision};
use durer_forge::surface::{
    induce_pseudo_edge_graph, pseudo_triangulation, survey_pseudo_edges, PseudoEdge, PseudoEdgeGraph, Surface, SurfaceError,
};
use durer_forge::unfold::{cut_along, develop, is_simple, overlap_witness, Development, UnfoldError, Witness};
use serde::Serialize;

use crate::files::{
    check_mesh, choose_forest, emit, forest_ids, input, internal, load_subdivision, load_subdivision_unchecked, parse_eps,
    read_graph, read_mesh, to_json, write_file, GraphEdge, GraphFile, MeshFile,
};
use crate::{CapInput, CliError, CliResult, Outcome};

fn surface_error(e: SurfaceError) -> CliError {
    match e {
        SurfaceError::Corridor { .. } => CliError::Inconclusive(e.to_string()),
        SurfaceError::Mismatch(_) => CliError::Input(e.to_string()),
        e => CliError::Internal(e.to_string()),
    }
}

fn unfold_error(e: UnfoldError) -> CliError {
    match e {
        UnfoldError::Surface(e) => surface_error(e),
        UnfoldError::Forest(_) | UnfoldError::MissingEdge(_) | UnfoldError::Precondition(_) | UnfoldError::ZeroBeta => {
            CliError::Input(e.to_string())
        }
        UnfoldError::Solve(_) => CliError::Inconclusive(e.to_string()),
        e => CliError::Internal(e.to_string()),
    }
}

fn cap_error(e: CapError) -> CliError {
    match e {
        CapError::InvalidSpec(_) => CliError::Input(e.to_string()),
        CapError::NonConvergence { .. } => CliError::Inconclusive(e.to_string()),
        e => CliError::Internal(e.to_string()),
    }
}

fn assembly_error(e: AssemblyError) -> CliError {
    match e {
        AssemblyError::Surface(e) => surface_error(e),
        AssemblyError::Unfold(e) => unfold_error(e),
        AssemblyError::Cap(e) => cap_error(e),
        AssemblyError::NoWorkingBeta(_) => CliError::Inconclusive(e.to_string()),
        AssemblyError::NotTriangle(_)
        | AssemblyError::NotEquilateral(_)
        | AssemblyError::CornerAngle { .. }
        | AssemblyError::NotConvex(_)
        | AssemblyError::Graph(_) => CliError::Input(e.to_string()),
        e => CliError::Internal(e.to_string()),
    }
}

fn export_error(e: ExportError) -> CliError {
    match e {
        ExportError::BadIndex(_) => CliError::Internal(e.to_string()),
        e => CliError::Input(e.to_string()),
    }
}

pub fn validate(subdivision: &str, eps: &str) -> CliResult {
    let s = load_subdivision_unchecked(subdivision, &parse_eps(eps)?)?;
    let report = validate_subdivision(&s);
    #[derive(Serialize)]
    struct Out<'a> {
        schema: &'a str,
        subdivision: &'a str,
        fixture_hash: &'a str,
        valid: bool,
        #[serde(flatten)]
        report: &'a durer_forge::subdivision::ValidationReport,
    }
    let valid = report.passed();
    emit(&Out { schema: SCHEMA, subdivision: &s.name, fixture_hash: &s.source_hash, valid, report: &report }, None)?;
    if valid {
        Ok(Outcome::Success)
    } else {
        for c in report.checks.iter().filter(|c| !c.passed) {
            eprintln!("failed: {}", c.detail());
        }
        Err(CliError::Input(format!("{} breaks its invariants", s.name)))
    }
}

pub fn certificate(subdivision: &str, eps: &str, out: Option<&Path>) -> CliResult {
    let eps = parse_eps(eps)?;
    let s = load_subdivision(subdivision, &eps)?;
    let cert = nonmonotonicity_certificate(&s, &eps).map_err(input)?;
    #[derive(Serialize)]
    struct Out<'a> {
        schema: &'a str,
        fixture_hash: &'a str,
        #[serde(flatten)]
        certificate: &'a durer_forge::subdivision::Certificate,
    }
    emit(&Out { schema: SCHEMA, fixture_hash: &s.source_hash, certificate: &cert }, out)?;
    Ok(match cert.verdict {
        Verdict::Certified => Outcome::Success,
        Verdict::Inconclusive | Verdict::NotApplicable => Outcome::Inconclusive,
    })
}

#[derive(Serialize)]
struct SolveSummary {
    schema: &'static str,
    subdivision: String,
    fixture_hash: String,
    beta: f64,
    converged: bool,
    iterations: usize,
    residual: f64,
    total_curvature: f64,
    convexity_violation: f64,
    max_height: f64,
    corner_angles: Vec<f64>,
    flagged: Vec<usize>,
}

pub fn solve_cap_cmd(spec: &str, beta: f64, tol: f64, eps: &str, out: Option<&Path>) -> CliResult {
    let s = load_subdivision(spec, &parse_eps(eps)?)?;
    let cap_spec = CapSpec::from_subdivision(&s, beta).map_err(cap_error)?;
    let (mesh, report) = solve_cap(&cap_spec, tol).map_err(cap_error)?;
    let summary = SolveSummary {
        schema: SCHEMA,
        subdivision: s.name.clone(),
        fixture_hash: s.source_hash.clone(),
        beta,
        converged: report.converged,
        iterations: report.iterations,
        residual: report.residual,
        total_curvature: mesh.total_curvature(),
        convexity_violation: mesh.convexity_violation(),
        max_height: mesh.max_height(),
        corner_angles: (0..mesh.corner_count).map(|c| mesh.angle_sum(c)).collect(),
        flagged: mesh.flagged(),
    };
    if let Some(p) = out {
        let text = if p.extension().is_some_and(|e| e.eq_ignore_ascii_case("obj")) {
            cap_obj(&mesh, false, false).map_err(export_error)?
        } else {
            let file = MeshFile {
                schema: SCHEMA.into(),
                subdivision: s.name.clone(),
                fixture_hash: s.source_hash.clone(),
                beta,
                mesh,
                solve: serde_json::to_value(&report).map_err(internal)?,
            };
            to_json(&file)?
        };
        write_file(p, &text)?;
    }
    emit(&summary, None)?;
    Ok(if report.converged { Outcome::Success } else { Outcome::Inconclusive })
}


fn graph_file(s: &WeightedSubdivision, beta: f64, delta: f64, edges: &[PseudoEdge], graph: Option<&PseudoEdgeGraph>, error: Option<String>) -> GraphFile {
    GraphFile {
        schema: SCHEMA.into(),
        subdivision: s.name.clone(),
        fixture_hash: s.source_hash.clone(),
        beta,
        induced: graph.is_some(),
        error,
        delta,
        nonconvex_corners: graph.map_or_else(Vec::new, |g| g.nonconvex_corners().iter().map(|c| c.vertex.to_string()).collect()),
        edges: edges
            .iter()
            .map(|e| GraphEdge {
                ends: [e.ends.0.to_string(), e.ends.1.to_string()],
                length: e.path.length,
                planar_length: e.planar_length,
                corridor_margin: e.corridor_margin,
                polyline: e.path.positions.iter().map(|p| [p.x, p.y, p.z]).collect(),
                projected: e.path.positions.iter().map(|p| [p.x, p.y]).collect(),
            })
            .collect(),
    }
}

struct Cap {
    s: WeightedSubdivision,
    beta: f64,
    surface: Surface,
    graph: PseudoEdgeGraph,
}

fn load_cap(cap: &CapInput) -> Result<Cap, CliError> {
    let m = read_mesh(&cap.mesh)?;
    let s = load_subdivision(&cap.subdivision, &durer_forge::subdivision::default_eps())?;
    check_mesh(&m, &s)?;
    let surface = Surface::new(m.mesh);
    let graph = induce_pseudo_edge_graph(&surface, &s).map_err(surface_error)?;
    if let Some(p) = &cap.graph {
        let g = read_graph(p)?;
        if g.fixture_hash != s.source_hash || g.edges.len() != graph.edges.len() || (g.beta - m.beta).abs() > 0.0 {
            return Err(CliError::Input(format!("{} does not belong to this mesh and subdivision", p.display())));
        }
    }
    Ok(Cap { s, beta: m.beta, surface, graph })
}

fn develop_forest(cap: &Cap, f: &CutForest) -> Result<Development, CliError> {
    let tri = pseudo_triangulation(&cap.surface, &cap.s, &cap.graph).map_err(surface_error)?;
    develop(cut_along(tri, &cap.s, f).map_err(unfold_error)?).map_err(unfold_error)
}

pub fn pseudo_edges(mesh: &Path, subdivision: &str, out: Option<&Path>) -> CliResult {
    let m = read_mesh(mesh)?;
    let s = load_subdivision(subdivision, &durer_forge::subdivision::default_eps())?;
    check_mesh(&m, &s)?;
    let surface = Surface::new(m.mesh);
    let (file, outcome) = match induce_pseudo_edge_graph(&surface, &s) {
        Ok(g) => (graph_file(&s, m.beta, g.delta, &g.edges, Some(&g), None), Outcome::Success),
        Err(e @ SurfaceError::Corridor { .. }) => {
            let edges = survey_pseudo_edges(&surface, &s).map_err(surface_error)?;
            let delta = durer_forge::subdivision::delta(&s).map_or(0.0, |d| d.value);
            eprintln!("error: {e}");
            (graph_file(&s, m.beta, delta, &edges, None, Some(e.to_string())), Outcome::Inconclusive)
        }
        Err(e) => return Err(surface_error(e)),
    };
    emit(&file, out)?;
    Ok(outcome)
}

#[derive(Serialize)]
struct ForestsReport {
    schema: &'static str,
    subdivision: String,
    fixture_hash: String,
    /// `found`, `none-exist` after full enumeration, or `none-found` among samples.
    outcome: &'static str,
    monotone_found: bool,
    forest: Option<BTreeMap<String, String>>,
    search: SearchReport,
}

pub fn forests(subdivision: &str, exhaustive: bool, samples: Option<usize>, seed: u64, out: Option<&Path>) -> CliResult {
    let s = load_subdivision(subdivision, &durer_forge::subdivision::default_eps())?;
    let defaults = SearchOptions::default();
    let opts = SearchOptions {
        samples: samples.unwrap_or(defaults.samples),
        seed,
        exhaustive: exhaustive || samples.is_none(),
        ..defaults
    };
    let outcome = exists_monotone_forest(&s, &opts);
    let (label, forest, code) = match &outcome {
        SearchOutcome::Found { forest, .. } => ("found", Some(forest_ids(&s, forest)), Outcome::Success),
        SearchOutcome::ExhaustedNone(_) => ("none-exist", None, Outcome::Success),
        SearchOutcome::Inconclusive(_) => ("none-found", None, Outcome::Inconclusive),
    };
    let report = ForestsReport {
        schema: SCHEMA,
        subdivision: s.name.clone(),
        fixture_hash: s.source_hash.clone(),
        outcome: label,
        monotone_found: outcome.is_found(),
        forest,
        search: outcome.report().clone(),
    };
    emit(&report, out)?;
    Ok(code)
}

#[derive(Serialize)]
struct UnfoldReport {
    schema: &'static str,
    subdivision: String,
    fixture_hash: String,
    beta: f64,
    forest: BTreeMap<String, String>,
    monotone: bool,
    violations: Vec<Violation>,
    faces: usize,
    congruence_error: f64,
    simple: bool,
    overlap: Option<(usize, usize)>,
    overlapping_pairs: usize,
}

fn unfold_layout(cap: &CapInput, forest: Option<&Path>, seed: Option<u64>) -> Result<(UnfoldReport, SvgLayout), CliError> {
    let c = load_cap(cap)?;
    let f = choose_forest(&c.s, forest, seed)?;
    let dev = develop_forest(&c, &f)?;
    let scan = is_simple(&dev);
    let mono = is_monotone(&c.s, &f);
    let report = UnfoldReport {
        schema: SCHEMA,
        subdivision: c.s.name.clone(),
        fixture_hash: c.s.source_hash.clone(),
        beta: c.beta,
        forest: forest_ids(&c.s, &f),
        monotone: mono.monotone,
        violations: mono.violations(),
        faces: dev.face_count(),
        congruence_error: dev.congruence_error(),
        simple: scan.simple,
        overlap: scan.overlap,
        overlapping_pairs: scan.pairs.len(),
    };
    Ok((report, SvgLayout::from_development(&dev, &scan.pairs)))
}

pub fn unfold(cap: &CapInput, forest: Option<&Path>, seed: Option<u64>, svg: Option<&Path>, out: Option<&Path>) -> CliResult {
    let (report, layout) = unfold_layout(cap, forest, seed)?;
    if let Some(p) = svg {
        write_file(p, &render_svg(&layout).map_err(export_error)?)?;
    }
    emit(&report, out)?;
    Ok(Outcome::Success)
}

pub fn export_svg(cap: &CapInput, forest: Option<&Path>, seed: Option<u64>, out: &Path) -> CliResult {
    let (_, layout) = unfold_layout(cap, forest, seed)?;
    write_file(out, &render_svg(&layout).map_err(export_error)?)?;
    Ok(Outcome::Success)
}

pub fn witness(cap: &CapInput, forest: Option<&Path>, seed: Option<u64>, vertex: Option<&str>, out: Option<&Path>) -> CliResult {
    let c = load_cap(cap)?;
    let f = choose_forest(&c.s, forest, seed)?;
    let violations = is_monotone(&c.s, &f).violations();
    let dev = develop_forest(&c, &f)?;
    let build = |v: &Violation| overlap_witness(&dev, &c.s, &f, v.node, v.lambda, c.beta).map_err(unfold_error);
    let w: Witness = match vertex {
        Some(id) => {
            let id: VertexId = id.parse().map_err(input)?;
            let v = violations
                .iter()
                .find(|v| v.vertex == id)
                .ok_or_else(|| CliError::Input(format!("the monotonicity condition holds at {id}; no witness exists there")))?;
            build(v)?
        }
        None => {
            let first = violations.first().ok_or_else(|| CliError::Input("the forest is monotone; there is nothing to witness".into()))?;
            let mut chosen = None;
            for v in &violations {
                let w = build(v)?;
                if w.valid {
                    chosen = Some(w);
                    break;
                }
            }
            match chosen {
                Some(w) => w,
                None => build(first)?,
            }
        }
    };
    #[derive(Serialize)]
    struct Out<'a> {
        schema: &'a str,
        fixture_hash: &'a str,
        forest: BTreeMap<String, String>,
        #[serde(flatten)]
        witness: &'a Witness,
    }
    emit(&Out { schema: SCHEMA, fixture_hash: &c.s.source_hash, forest: forest_ids(&c.s, &f), witness: &w }, out)?;
    if w.valid {
        Ok(Outcome::Success)
    } else {
        for r in &w.reasons {
            eprintln!("witness invalid: {r}");
        }
        Ok(Outcome::Inconclusive)
    }
}

#[derive(Serialize)]
struct AssembleReport {
    schema: &'static str,
    subdivision: String,
    beta: f64,
    vertices: usize,
    edges: usize,
    faces: usize,
    euler: i64,
    closed: bool,
    convexity_violation: f64,
    edge_length: f64,
    corner_angles: Vec<f64>,
    pseudo_edges: Option<usize>,
    max_length_deviation: Option<f64>,
}

fn assemble_mesh(mesh: &CapMesh) -> Result<durer_forge::assembly::ClosedPolyhedron, CliError> {
    assemble_tetrahedron(mesh).map_err(assembly_error)
}

pub fn assemble(cap: &Path, subdivision: Option<&str>, out: Option<&Path>) -> CliResult {
    let m = read_mesh(cap)?;
    let k = assemble_mesh(&m.mesh)?;
    let mut report = AssembleReport {
        schema: SCHEMA,
        subdivision: m.subdivision.clone(),
        beta: m.beta,
        vertices: k.vertex_count(),
        edges: k.edge_count(),
        faces: k.face_count(),
        euler: k.euler_characteristic(),
        closed: k.is_closed(),
        convexity_violation: k.convexity_violation(),
        edge_length: k.edge_length,
        corner_angles: (0..m.mesh.corner_count).map(|c| m.mesh.angle_sum(c)).collect(),
        pseudo_edges: None,
        max_length_deviation: None,
    };
    if let Some(sub) = subdivision {
        let s = load_subdivision(sub, &durer_forge::subdivision::default_eps())?;
        check_mesh(&m, &s)?;
        let surface = Surface::new(m.mesh.clone());
        let g = induce_pseudo_edge_graph(&surface, &s).map_err(surface_error)?;
        let e = global_graph(&k, &s, &g).map_err(assembly_error)?;
        report.pseudo_edges = Some(e.edge_count());
        report.max_length_deviation = Some(e.max_length_deviation());
    }
    if let Some(p) = out {
        write_file(p, &polyhedron_obj(&k, true).map_err(export_error)?)?;
    }
    emit(&report, None)?;
    Ok(Outcome::Success)
}

pub struct ReproduceArgs {
    pub eps: String,
    pub beta: f64,
    pub beta_min: f64,
    pub trees: usize,
    pub forests: usize,
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
}

pub fn reproduce(subdivision: &str, a: &ReproduceArgs, report: Option<&Path>, svg_dir: Option<&Path>) -> CliResult {
    let eps = parse_eps(&a.eps)?;
    let s = load_subdivision(subdivision, &eps)?;
    let cfg = ReproduceConfig {
        eps,
        beta: a.beta,
        beta_min: a.beta_min,
        trees: a.trees,
        forests: a.forests,
        samples: a.samples,
        seed: a.seed,
        tol: a.tol,
    };
    let out = run_pipeline(&s, &cfg).map_err(|e| match e {
        PipelineError::Config(_) | PipelineError::Subdivision(_) => CliError::Input(e.to_string()),
        PipelineError::Assembly(e) => assembly_error(e),
        PipelineError::Unfold(e) => unfold_error(e),
    })?;
    if let Some(dir) = svg_dir {
        for (name, text) in &out.svgs {
            write_file(&dir.join(name), text)?;
        }
    }
    let r = &out.report;
    eprintln!(
        "{}: eps {}, beta {} -> {}, certificate {:?}, search found monotone: {}, witnessed {}/{}, non-simple trees {}/{}: {}",
        r.fixture,
        fmt_rational(&cfg.eps),
        r.cap.beta_requested,
        r.cap.beta_used,
        r.certificate.verdict,
        r.conclusion.search_found_monotone,
        r.conclusion.witnessed_forests,
        r.witnesses.len(),
        r.conclusion.non_simple_trees,
        r.trees.count,
        r.conclusion.status
    );
    match report {
        Some(p) => write_file(p, &to_json(r)?)?,
        None => emit(r, None)?,
    }
    Ok(if r.conclusion.status == "certified" { Outcome::Success } else { Outcome::Inconclusive })
}

pub fn export_obj(mesh: &Path, with_base: bool, assembled: bool, require_closed: bool, out: &Path) -> CliResult {
    let m = read_mesh(mesh)?;
    let text = if assembled {
        polyhedron_obj(&assemble_mesh(&m.mesh)?, require_closed)
    } else {
        cap_obj(&m.mesh, with_base, require_closed)
    }
    .map_err(export_error)?;
    write_file(out, &text)?;
    Ok(Outcome::Success)
}
