use std::collections::BTreeMap;
use std::f64::consts::TAU;

use durer_forge::capsolver::{lift_upper_hull, solve_cap, CapSpec};
use durer_forge::cutforest::*;
use durer_forge::fixtures;
use durer_forge::geom::PointF2;
use durer_forge::subdivision::{default_eps, parse_subdivision_unchecked, VertexId, WeightedSubdivision};
use durer_forge::surface::{induce_pseudo_edge_graph, pseudo_triangulation, PseudoTriangulation, Surface};
use durer_forge::unfold::*;
use proptest::prelude::*;

fn load(name: &str) -> WeightedSubdivision {
    fixtures::load(name, &default_eps()).unwrap()
}

fn id(s: &str) -> VertexId {
    match s.strip_prefix('b') {
        Some(k) => VertexId::Corner(k.parse().unwrap()),
        None => VertexId::Interior(s.parse().unwrap()),
    }
}

fn forest(s: &WeightedSubdivision, links: &[(&str, &str)]) -> CutForest {
    let map: BTreeMap<VertexId, VertexId> = links.iter().map(|&(c, p)| (id(c), id(p))).collect();
    CutForest::from_ids(s, &map).unwrap()
}

fn node(s: &WeightedSubdivision, v: &str) -> usize {
    s.node_of(id(v)).unwrap()
}

/// A solved cap with its `Ḡ^T`, reusable across forests.
struct Cap {
    s: WeightedSubdivision,
    beta: f64,
    tri: PseudoTriangulation,
}

impl Cap {
    fn new(name: &str, beta: f64) -> Cap {
        let s = load(name);
        let (mesh, _) = solve_cap(&CapSpec::from_subdivision(&s, beta).unwrap(), 1e-12).unwrap();
        Cap::on(s, Surface::new(mesh), beta)
    }

    fn on(s: WeightedSubdivision, surface: Surface, beta: f64) -> Cap {
        let g = induce_pseudo_edge_graph(&surface, &s).unwrap();
        let tri = pseudo_triangulation(&surface, &s, &g).unwrap();
        Cap { s, beta, tri }
    }

    fn cut(&self, f: &CutForest) -> CutSurface {
        cut_along(self.tri.clone(), &self.s, f).unwrap()
    }

    fn develop(&self, f: &CutForest) -> Development {
        develop(self.cut(f)).unwrap()
    }
}

/// A square with one diagonal and no interior vertex, on a flat cap.
fn flat_square() -> Cap {
    let text = r#"{"name": "flat", "boundary": [["0", "0"], ["2", "0"], ["2", "2"], ["0", "2"]], "vertices": [],
        "edges": [["b0", "b1"], ["b1", "b2"], ["b2", "b3"], ["b3", "b0"], ["b0", "b2"]],
        "faces": [["b0", "b1", "b2"], ["b0", "b2", "b3"]]}"#;
    let s = parse_subdivision_unchecked(text, &default_eps()).unwrap();
    let corners: Vec<PointF2> = (0..4).map(|n| s.node_point(n).to_f64()).collect();
    let surface = Surface::new(lift_upper_hull(&corners, &[], &[]).unwrap());
    Cap::on(s, surface, 0.0)
}

fn all_forests(s: &WeightedSubdivision) -> Vec<CutForest> {
    enumerate_forests(s).unwrap().collect()
}

fn degree_in(f: &CutForest, v: usize) -> usize {
    f.children(v).len() + usize::from(f.parent(v).is_some())
}

#[test]
fn one_cut_leaves_a_fan_of_four_faces() {
    let cap = Cap::new("square1", 0.2);
    let cs = cap.cut(&forest(&cap.s, &[("1", "b0")]));
    assert_eq!(cs.face_count(), 4);
    assert_eq!(cs.cuts.len(), 1);
    assert_eq!(cs.glued.len(), 3);
    assert_eq!(cs.boundary.len(), 4);
    assert_eq!(cs.copies_of(node(&cap.s, "1")).len(), 1);
    assert_eq!(cs.copies_of(0).len(), 2);
    assert_eq!(cs.copy_count(), 6);
    assert_eq!(cs.euler_characteristic(), 1);
    assert_eq!(cs.boundary_cycles().len(), 1);
}

#[test]
fn flat_square_develops_onto_itself() {
    let cap = flat_square();
    let f = CutForest::new(4, vec![]);
    let dev = cap.develop(&f);
    assert!(dev.cut.cuts.is_empty());
    for c in 0..dev.cut.copy_count() {
        let want = cap.s.node_point(dev.cut.copy_nodes[c]).to_f64();
        assert!((dev.copy_positions[c] - want).norm() < 1e-12);
    }
    let cycles = dev.cut.boundary_cycles();
    assert_eq!(cycles.len(), 1);
    assert_eq!(cycles[0].len(), 4);
    assert!(is_simple(&dev).simple);
}

#[test]
fn sampled_forests_of_the_certified_graph_cut_to_a_disk() {
    let cap = Cap::new("triangle84", 0.0125);
    for f in sample_forests(&cap.s, 3, 11) {
        let cs = cap.cut(&f);
        assert_eq!(cs.euler_characteristic(), 1);
        assert_eq!(cs.boundary_cycles().len(), 1);
        assert_eq!(cs.cuts.len(), cap.s.node_count() - cap.s.corner_count());
    }
}

#[test]
fn forests_off_the_graph_are_rejected() {
    let cap = Cap::new("hook2", 0.1);
    let bad = CutForest::new(4, vec![0, node(&cap.s, "1")]);
    assert!(matches!(cut_along(cap.tri.clone(), &cap.s, &bad), Err(UnfoldError::Forest(_))));
}

#[test]
fn pyramid_unfolding_keeps_the_apex_defect() {
    for beta in [0.1, 0.4] {
        let cap = Cap::new("square1", beta);
        let apex = node(&cap.s, "1");
        for f in all_forests(&cap.s) {
            let dev = cap.develop(&f);
            assert_eq!(dev.face_count(), 4);
            let c = dev.cut.copies_of(apex);
            assert_eq!(c.len(), 1);
            assert!((dev.copy_angle(c[0]) - (TAU - beta)).abs() < 1e-9);
            assert!(dev.congruence_error() < 1e-9);
            assert!(is_simple(&dev).simple);
        }
    }
}

#[test]
fn base_edge_stays_in_place_with_the_layout_on_the_polygon_side() {
    let cap = Cap::new("hook2", 0.1);
    for f in all_forests(&cap.s) {
        let dev = cap.develop(&f);
        let (a, b) = dev.cut.base;
        let t = dev.cut.face_left(a, b).unwrap();
        assert_eq!(dev.order[0], t);
        let img = dev.face_image(t);
        let (pa, pb) = (cap.s.node_point(a).to_f64(), cap.s.node_point(b).to_f64());
        let ka = dev.cut.corner_index(t, a).unwrap();
        assert!((img[ka] - pa).norm() < 1e-12);
        assert!((img[(ka + 1) % 3] - pb).norm() < 1e-12);
        assert!((pb - pa).perp(&(img[(ka + 2) % 3] - pa)) > 0.0);
    }
}

#[test]
fn developments_are_isometric_and_consistent() {
    let cap = Cap::new("triangle84", 0.0125);
    for f in sample_forests(&cap.s, 2, 5) {
        let dev = cap.develop(&f);
        assert!(dev.congruence_error() < 1e-9);
        assert!(dev.residual < 1e-9);
    }
}

#[test]
fn psi_is_single_valued_off_the_cuts() {
    let cap = Cap::new("hook2", 0.1);
    let f = forest(&cap.s, &[("1", "-1"), ("-1", "b1")]);
    let dev = cap.develop(&f);
    for &(a, b) in &dev.cut.glued {
        let pts = &dev.cut.triangulation.planar.points;
        let x = (pts[a].to_f64() + pts[b].to_f64()) / 2.0;
        let (t1, t2) = (dev.cut.face_left(a, b).unwrap(), dev.cut.face_left(b, a).unwrap());
        assert!((dev.psi_in(t1, &x).unwrap() - dev.psi_in(t2, &x).unwrap()).norm() < 1e-9);
        assert_eq!(dev.psi_images(&x).len(), 1);
    }
    for &(c, p) in &dev.cut.cuts {
        let x = (cap.s.node_point(c).to_f64() + cap.s.node_point(p).to_f64()) / 2.0;
        assert_eq!(dev.psi_images(&x).len(), 2);
    }
}

#[test]
fn forest_vertices_have_one_image_per_incident_cut() {
    let cap = Cap::new("triangle84", 0.0125);
    let f = &sample_forests(&cap.s, 1, 3)[0];
    let dev = cap.develop(f);
    for v in cap.s.interior_nodes() {
        let images = dev.psi_images(&cap.s.node_point(v).to_f64());
        assert_eq!(images.len(), degree_in(f, v), "vertex {}", cap.s.node_id(v));
        assert_eq!(dev.cut.copies_of(v).len(), degree_in(f, v));
    }
}

#[test]
fn psi_approaches_the_identity() {
    let mut sups = Vec::new();
    for beta in [0.1, 0.05, 0.025] {
        let cap = Cap::new("square1", beta);
        let dev = cap.develop(&forest(&cap.s, &[("1", "b2")]));
        let mut sup: f64 = 0.0;
        for t in 0..dev.face_count() {
            let tri = dev.cut.nodes(t).map(|n| cap.s.node_point(n).to_f64());
            for (i, j) in [(1, 1), (2, 1), (1, 2), (4, 1), (1, 4)] {
                let w = [i as f64, j as f64, 2.0];
                let tot: f64 = w.iter().sum();
                let x = (tri[0] * w[0] + tri[1] * w[1] + tri[2] * w[2]) / tot;
                sup = sup.max((dev.psi_in(t, &x).unwrap() - x).norm());
            }
        }
        sups.push(sup);
    }
    assert!(sups[0] > sups[1] && sups[1] > sups[2], "{sups:?}");
}

#[test]
fn approximate_center_on_the_pyramid() {
    let errors: Vec<f64> = [0.1, 0.05, 0.025]
        .iter()
        .map(|&beta| {
            let cap = Cap::new("square1", beta);
            let f = forest(&cap.s, &[("1", "b0")]);
            let c = cap.develop(&f).tilde_c(&cap.s, &f, node(&cap.s, "1"), 0.5, beta).unwrap();
            c.norm()
        })
        .collect();
    assert!(errors[0] <= 0.02, "{errors:?}");
    for w in errors.windows(2) {
        assert!((1.5..=2.5).contains(&(w[0] / w[1])), "{errors:?}");
    }
}

#[test]
fn approximate_center_rejects_bad_input() {
    let cap = Cap::new("square1", 0.1);
    let f = forest(&cap.s, &[("1", "b0")]);
    let dev = cap.develop(&f);
    let v = node(&cap.s, "1");
    assert_eq!(dev.tilde_c(&cap.s, &f, v, 0.5, 0.0), Err(UnfoldError::ZeroBeta));
    assert!(dev.tilde_c(&cap.s, &f, v, 0.0, 0.1).is_err());
    assert!(dev.tilde_c(&cap.s, &f, 0, 0.5, 0.1).is_err());
}

/// `|c̃_x − c_x|` at every forest-edge midpoint of every forest.
fn center_errors(name: &str, beta: f64) -> Vec<f64> {
    let cap = Cap::new(name, beta);
    let mut out = Vec::new();
    for f in all_forests(&cap.s) {
        let dev = cap.develop(&f);
        for (c, _) in f.edges() {
            let (cx, _) = center_of_rotation(&cap.s, &f, c).unwrap();
            let t = dev.tilde_c(&cap.s, &f, c, 0.5, beta).unwrap();
            out.push((t - cx.to_f64()).norm());
        }
    }
    out
}

#[test]
fn approximate_centers_converge_on_two_vertex_fixtures() {
    let betas = [0.1, 0.05, 0.025];
    for name in ["hook2", "strip2"] {
        let runs: Vec<Vec<f64>> = betas.iter().map(|&b| center_errors(name, b)).collect();
        for k in 0..runs[0].len() {
            let errs: Vec<f64> = runs.iter().map(|r| r[k]).collect();
            for (w, b) in errs.windows(2).zip(betas) {
                let ratio = w[0] / w[1];
                let first = (1.4..=2.6).contains(&ratio);
                let second = (3.5..=4.5).contains(&ratio) && w[0] < b * b;
                assert!(first || second, "{name} edge {k}: {errs:?}");
            }
        }
    }
}

#[test]
fn descendant_rotations_compose_to_the_cut_transition() {
    for name in ["square1", "strip2", "hook2"] {
        let cap = Cap::new(name, 0.1);
        for f in all_forests(&cap.s) {
            let dev = cap.develop(&f);
            for (c, _) in f.edges() {
                for t in [0.25, 0.5, 0.75] {
                    let r = dev.rotation_identity(&cap.s, &f, c, t, cap.beta).unwrap();
                    assert!(r.residual < 1e-9, "{name}: {}", r.residual);
                    assert!((r.angle - r.beta_x).abs() < 1e-9, "{name}: {} vs {}", r.angle, r.beta_x);
                    assert_eq!(r.rotations.len(), f.descendants(c).unwrap().len());
                }
            }
        }
    }
}

#[test]
fn hook_witness_depends_on_beta() {
    let s = load("hook2");
    let f = forest(&s, &[("1", "-1"), ("-1", "b1")]);
    let v = is_monotone(&s, &f).worst.unwrap();
    assert_eq!(v.vertex, id("-1"));
    let small = unfold_cap(&s, &f, 0.02, 1e-12).unwrap();
    let w = overlap_witness(&small.development, &s, &f, v.node, v.lambda, 0.02).unwrap();
    assert!(w.valid, "{:?}", w.reasons);
    assert!(w.slack > 0.0 && w.near_vertex && w.disk_in_face);
    let (a, b) = w.overlap.unwrap();
    assert_eq!(faces_overlap(&small.development, a, b), Some(true));
    let simple = is_simple(&small.development);
    assert!(!simple.simple);
    assert!(simple.pairs.contains(&(a, b)));

    let large = unfold_cap(&s, &f, 2.0, 1e-12).unwrap();
    let w = overlap_witness(&large.development, &s, &f, v.node, v.lambda, 2.0).unwrap();
    assert!(!w.valid);
    assert!(w.reasons.iter().any(|r| r == "y outside Δ"));
    assert!(w.slack.is_finite());
    assert!(w.overlap.is_none());
}

#[test]
fn witness_requires_a_violated_vertex() {
    let cap = Cap::new("square1", 0.1);
    let f = forest(&cap.s, &[("1", "b0")]);
    let dev = cap.develop(&f);
    let r = overlap_witness(&dev, &cap.s, &f, node(&cap.s, "1"), 0.1, 0.1);
    assert!(matches!(r, Err(UnfoldError::Precondition(_))));
    let r = beta_threshold(&cap.s, &f, node(&cap.s, "1"), 0.1, 1.0, &ThresholdOptions::default());
    assert!(matches!(r, Err(UnfoldError::Precondition(_))));
}

#[test]
fn hook_threshold_is_found_and_holds_below() {
    let s = load("hook2");
    let f = forest(&s, &[("1", "-1"), ("-1", "b1")]);
    let v = is_monotone(&s, &f).worst.unwrap();
    let rep = beta_threshold(&s, &f, v.node, v.lambda, 2.0, &ThresholdOptions::default()).unwrap();
    let beta0 = rep.beta0.unwrap();
    assert!((0.02..2.0).contains(&beta0));
    assert!(rep.witness.as_ref().unwrap().valid);
    assert!(rep.monotone_below);
    assert!(rep.probes.iter().any(|p| (p.beta - beta0 / 2.0).abs() < 1e-15 && p.valid));
    assert!(!rep.probes[0].valid);
}

#[test]
fn certified_graph_forests_overlap_at_the_working_beta() {
    let cap = Cap::new("triangle84", 0.0125);
    for f in sample_forests(&cap.s, 2, 17) {
        let dev = cap.develop(&f);
        let report = is_monotone(&cap.s, &f);
        assert!(!report.monotone);
        let w = report
            .violations()
            .iter()
            .map(|v| overlap_witness(&dev, &cap.s, &f, v.node, v.lambda, cap.beta).unwrap())
            .find(|w| w.valid)
            .expect("a valid witness");
        let pair = w.overlap.expect("overlap confirmed");
        let simple = is_simple(&dev);
        assert!(!simple.simple);
        assert!(simple.pairs.contains(&pair));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn development_invariants(
        pick in 0usize..64,
        beta in 0.02f64..0.2,
        name in prop::sample::select(vec!["hook2", "strip2"]),
    ) {
        let cap = Cap::new(name, beta);
        let forests = all_forests(&cap.s);
        let f = &forests[pick % forests.len()];
        let dev = cap.develop(f);
        prop_assert!(dev.congruence_error() < 1e-9);
        prop_assert!(dev.residual < 1e-9);
        prop_assert_eq!(dev.cut.boundary_cycles().len(), 1);
        let pts = &dev.cut.triangulation.planar.points;
        for &(a, b) in &dev.cut.glued {
            let x = pts[a].to_f64() * 0.3 + pts[b].to_f64() * 0.7;
            let (t1, t2) = (dev.cut.face_left(a, b).unwrap(), dev.cut.face_left(b, a).unwrap());
            prop_assert!((dev.psi_in(t1, &x).unwrap() - dev.psi_in(t2, &x).unwrap()).norm() < 1e-9);
        }
        for (c, _) in f.edges() {
            let r = dev.rotation_identity(&cap.s, f, c, 0.5, beta).unwrap();
            prop_assert!(r.residual < 1e-9);
            prop_assert!((r.angle - r.beta_x).abs() < 1e-9);
        }
    }
}

