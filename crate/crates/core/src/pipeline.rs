//! The end-to-end run: certificate, cap, pseudo-edges, forest search, witnesses,
//! assembly of `K` and sampled spanning trees, with a versioned JSON report.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::assembly::{
    assemble_tetrahedron, face_arc_loop_check, global_graph, global_unfold_check, sample_spanning_trees, AssemblyError,
    BetaAttempt, CapModel, CheckMethod,
};
use crate::cutforest::{exists_monotone_forest, is_monotone, sample_forests, SearchOptions, SearchReport};
use crate::export::{render_svg, SvgLayout};
use crate::geom::{fmt_rational, parse_decimal, Rational};
use crate::subdivision::{nonmonotonicity_certificate, SubdivisionError, Verdict, VertexId, WeightedSubdivision};
use crate::unfold::{cut_along, develop, is_simple, overlap_witness, UnfoldError};

pub const SCHEMA: &str = "durer-forge/1";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Subdivision(#[from] SubdivisionError),
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Unfold(#[from] UnfoldError),
    #[error("invalid configuration: {0}")]
    Config(String),
}

#[derive(Clone, Debug)]
pub struct ReproduceConfig {
    pub eps: Rational,
    /// Requested `β`; halved until the pseudo-edge graph can be induced.
    pub beta: f64,
    pub beta_min: f64,
    pub trees: usize,
    /// Sampled cut forests given an overlap witness.
    pub forests: usize,
    /// Samples of the monotone-forest search.
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
}

impl Default for ReproduceConfig {
    fn default() -> Self {
        ReproduceConfig {
            eps: parse_decimal("0.000001").expect("decimal"),
            beta: 0.05,
            beta_min: 1e-4,
            trees: 100,
            forests: 20,
            samples: 100_000,
            seed: 7,
            tol: 1e-12,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CertificateSummary {
    pub verdict: Verdict,
    pub min_margin: Option<f64>,
    pub max_admissible_eps: Option<f64>,
    pub sqrt3_stable: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CapSummary {
    pub beta_requested: f64,
    pub beta_used: f64,
    pub rejected: Vec<BetaAttempt>,
    pub iterations: usize,
    pub residual: f64,
    pub total_curvature: f64,
    pub convexity_violation: f64,
    pub max_height: f64,
    pub corner_angles: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GraphSummary {
    pub edges: usize,
    pub delta: f64,
    pub max_relative_excess: f64,
    pub min_corridor_margin: f64,
    pub nonconvex_corners: Vec<VertexId>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ForestWitness {
    pub index: usize,
    pub violations: usize,
    pub max_lambda: f64,
    /// The first violated vertex, strongest first, whose witness validates.
    pub vertex: Option<VertexId>,
    pub lambda: Option<f64>,
    pub slack: Option<f64>,
    pub overlap: Option<(usize, usize)>,
    pub simple: bool,
    pub overlapping_pairs: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct AssemblySummary {
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    pub euler: i64,
    pub closed: bool,
    pub convexity_violation: f64,
    pub pseudo_edges: usize,
    pub max_length_deviation: f64,
    pub arc_cases: usize,
    pub arc_cases_with_loop: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct TreeRecord {
    pub index: usize,
    pub arcs: usize,
    pub cap: Option<usize>,
    pub violations: usize,
    pub vertex: Option<VertexId>,
    pub overlap: Option<(usize, usize)>,
    pub simple: Option<bool>,
    pub method: CheckMethod,
}

#[derive(Clone, Debug, Serialize)]
pub struct TreeSummary {
    pub count: usize,
    /// Trees by number of boundary-to-boundary arcs, 0 to 4.
    pub arcs: [usize; 5],
    pub non_simple: usize,
    pub methods: BTreeMap<String, usize>,
    pub trees: Vec<TreeRecord>,
}

/// Certified facts and sampled evidence, kept apart.
#[derive(Clone, Debug, Serialize)]
pub struct Conclusion {
    /// The exact certificate says no cut forest of the subdivision is monotone.
    pub certified: bool,
    pub search_found_monotone: bool,
    pub witnessed_forests: usize,
    pub non_simple_trees: usize,
    pub status: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReproduceReport {
    pub schema: String,
    pub fixture: String,
    pub fixture_hash: String,
    pub eps: String,
    pub seed: u64,
    pub certificate: CertificateSummary,
    pub cap: CapSummary,
    pub pseudo_edges: GraphSummary,
    pub search: SearchReport,
    pub witnesses: Vec<ForestWitness>,
    pub assembly: AssemblySummary,
    pub trees: TreeSummary,
    pub conclusion: Conclusion,
}

#[derive(Clone, Debug)]
pub struct ReproduceOutput {
    pub report: ReproduceReport,
    /// File names and contents.
    pub svgs: Vec<(String, String)>,
}

fn witness_forest(model: &CapModel, index: usize, f: &crate::cutforest::CutForest) -> Result<(ForestWitness, SvgLayout), PipelineError> {
    let s = &model.subdivision;
    let violations = is_monotone(s, f).violations();
    let dev = develop(cut_along(model.triangulation.clone(), s, f)?)?;
    let scan = is_simple(&dev);
    let mut record = ForestWitness {
        index,
        violations: violations.len(),
        max_lambda: violations.first().map_or(0.0, |v| v.lambda),
        vertex: None,
        lambda: None,
        slack: None,
        overlap: None,
        simple: scan.simple,
        overlapping_pairs: scan.pairs.len(),
    };
    for v in &violations {
        let w = overlap_witness(&dev, s, f, v.node, v.lambda, model.beta)?;
        if w.valid && w.overlap.is_some() {
            record.vertex = Some(w.vertex);
            record.lambda = Some(w.lambda);
            record.slack = Some(w.slack);
            record.overlap = w.overlap;
            break;
        }
    }
    Ok((record, SvgLayout::from_development(&dev, &scan.pairs)))
}

/// Runs every stage on `s`. The output depends only on `s` and `cfg`.
pub fn reproduce(s: &WeightedSubdivision, cfg: &ReproduceConfig) -> Result<ReproduceOutput, PipelineError> {
    if !(cfg.beta > 0.0) || cfg.trees == 0 {
        return Err(PipelineError::Config("beta must be positive and at least one tree is required".into()));
    }
    let s = s.with_eps(&cfg.eps);
    let cert = nonmonotonicity_certificate(&s, &cfg.eps)?;
    let certificate = CertificateSummary {
        verdict: cert.verdict,
        min_margin: cert.min_margin,
        max_admissible_eps: cert.max_admissible_eps,
        sqrt3_stable: cert.sqrt3_stable,
    };

    let (model, rejected) = CapModel::solve_working(&s, cfg.beta, cfg.beta_min, cfg.tol)?;
    let mesh = model.mesh();
    let cap = CapSummary {
        beta_requested: cfg.beta,
        beta_used: model.beta,
        rejected,
        iterations: model.solve.iterations,
        residual: model.solve.residual,
        total_curvature: mesh.total_curvature(),
        convexity_violation: mesh.convexity_violation(),
        max_height: mesh.max_height(),
        corner_angles: (0..mesh.corner_count).map(|c| mesh.angle_sum(c)).collect(),
    };
    let g = &model.graph;
    let pseudo_edges = GraphSummary {
        edges: g.edges.len(),
        delta: g.delta,
        max_relative_excess: g.max_relative_excess(),
        min_corridor_margin: g.min_corridor_margin(),
        nonconvex_corners: g.nonconvex_corners().iter().map(|c| c.vertex).collect(),
    };

    let search_opts = SearchOptions { samples: cfg.samples, seed: cfg.seed, ..SearchOptions::default() };
    let search = exists_monotone_forest(&s, &search_opts);

    let forests = sample_forests(&s, cfg.forests, cfg.seed);
    let results: Vec<(ForestWitness, SvgLayout)> = forests
        .par_iter()
        .enumerate()
        .map(|(i, f)| witness_forest(&model, i, f))
        .collect::<Result<_, _>>()?;
    let mut svgs = Vec::new();
    if let Some((_, layout)) = results.first() {
        svgs.push(("forest_0.svg".to_string(), render_svg(layout).expect("non-empty layout")));
    }
    let witnesses: Vec<ForestWitness> = results.into_iter().map(|(w, _)| w).collect();

    let k = assemble_tetrahedron(mesh)?;
    let e = global_graph(&k, &s, g)?;
    let arc = face_arc_loop_check();
    let assembly = AssemblySummary {
        vertices: k.vertex_count(),
        edges: k.edge_count(),
        faces: k.face_count(),
        euler: k.euler_characteristic(),
        closed: k.is_closed(),
        convexity_violation: k.convexity_violation(),
        pseudo_edges: e.edge_count(),
        max_length_deviation: e.max_length_deviation(),
        arc_cases: arc.cases,
        arc_cases_with_loop: arc.with_loop,
    };

    let trees = sample_spanning_trees(&e, cfg.trees, cfg.seed);
    let checks = trees
        .par_iter()
        .map(|t| global_unfold_check(&k, &e, &model, t))
        .collect::<Result<Vec<_>, _>>()?;
    let mut summary = TreeSummary { count: trees.len(), arcs: [0; 5], non_simple: 0, methods: BTreeMap::new(), trees: Vec::new() };
    for (i, c) in checks.iter().enumerate() {
        summary.arcs[c.restriction.arcs] += 1;
        summary.non_simple += usize::from(c.simple == Some(false));
        let method = serde_json::to_value(c.method).expect("serializable").as_str().unwrap_or_default().to_string();
        *summary.methods.entry(method).or_insert(0) += 1;
        summary.trees.push(TreeRecord {
            index: i,
            arcs: c.restriction.arcs,
            cap: c.cap,
            violations: c.violations,
            vertex: c.witness.as_ref().map(|w| w.vertex),
            overlap: c.overlap,
            simple: c.simple,
            method: c.method,
        });
    }
    if let Some(c) = checks.first() {
        if let Some(j) = c.cap {
            let f = c.restriction.caps[j].forest().expect("forest cap");
            let dev = develop(cut_along(model.triangulation.clone(), &s, f)?)?;
            let pairs: Vec<_> = c.overlap.into_iter().collect();
            svgs.push(("tree_0_cap.svg".to_string(), render_svg(&SvgLayout::from_development(&dev, &pairs)).expect("non-empty")));
        }
    }

    let certified = cert.verdict == Verdict::Certified;
    let witnessed = witnesses.iter().filter(|w| w.overlap.is_some()).count();
    let consistent = !search.is_found() && witnessed == witnesses.len() && summary.non_simple == summary.count;
    let conclusion = Conclusion {
        certified,
        search_found_monotone: search.is_found(),
        witnessed_forests: witnessed,
        non_simple_trees: summary.non_simple,
        status: match (certified, consistent) {
            (true, true) => "certified",
            (true, false) => "certified-with-gaps",
            _ => "inconclusive",
        }
        .into(),
    };
    let report = ReproduceReport {
        schema: SCHEMA.into(),
        fixture: s.name.clone(),
        fixture_hash: s.source_hash.clone(),
        eps: fmt_rational(&cfg.eps),
        seed: cfg.seed,
        certificate,
        cap,
        pseudo_edges,
        search: search.report().clone(),
        witnesses,
        assembly,
        trees: summary,
        conclusion,
    };
    Ok(ReproduceOutput { report, svgs })
}
