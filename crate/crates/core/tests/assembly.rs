use std::f64::consts::{FRAC_PI_3, PI};
use std::sync::OnceLock;

use durer_forge::assembly::*;
use durer_forge::capsolver::{lift_upper_hull, solve_cap, CapMesh, CapSpec};
use durer_forge::cutforest::{is_monotone, validate_forest};
use durer_forge::fixtures;
use durer_forge::geom::PointF2;
use durer_forge::subdivision::default_eps;
use durer_forge::unfold::{cut_along, develop, overlap_witness};
use petgraph::unionfind::UnionFind;
use proptest::prelude::*;

struct Flagship {
    model: CapModel,
    k: ClosedPolyhedron,
    e: GlobalGraph,
}

fn flagship() -> &'static Flagship {
    static CELL: OnceLock<Flagship> = OnceLock::new();
    CELL.get_or_init(|| {
        let s = fixtures::load("triangle84", &default_eps()).unwrap();
        let (model, _) = CapModel::solve_working(&s, 0.05, 1e-4, 1e-12).unwrap();
        let k = assemble_tetrahedron(model.mesh()).unwrap();
        let e = global_graph(&k, &s, &model.graph).unwrap();
        Flagship { model, k, e }
    })
}

fn triangle() -> Vec<PointF2> {
    (0..3).map(|k| {
        let a = PI / 2.0 + 2.0 * PI * k as f64 / 3.0;
        PointF2::new(a.cos(), a.sin())
    })
    .collect()
}

fn pyramid(beta: f64) -> CapMesh {
    let spec = CapSpec::new(triangle(), vec![PointF2::zeros()], vec![beta]).unwrap();
    solve_cap(&spec, 1e-13).unwrap().0
}

#[test]
fn flat_caps_give_the_regular_tetrahedron() {
    let cap = lift_upper_hull(&triangle(), &[], &[]).unwrap();
    let k = assemble_tetrahedron(&cap).unwrap();
    assert_eq!((k.vertex_count(), k.edge_count(), k.face_count()), (4, 6, 4));
    assert_eq!(k.euler_characteristic(), 2);
    assert!(k.is_closed());
    assert!(k.is_convex(1e-12));
    for i in 0..4 {
        for j in i + 1..4 {
            assert!(((k.vertices[i] - k.vertices[j]).norm() - 3f64.sqrt()).abs() < 1e-12);
        }
    }
    for (p, t) in k.placements.iter().zip(&k.triangles) {
        let c = (k.vertices[t[0]] + k.vertices[t[1]] + k.vertices[t[2]]) / 3.0;
        assert!(p.normal().dot(&c) > 0.0);
        assert_eq!(&p.corners, t);
    }
}

#[test]
fn pyramid_caps_bulge_outward() {
    let cap = pyramid(1.0);
    let k = assemble_tetrahedron(&cap).unwrap();
    assert_eq!(k.vertex_count(), 8);
    assert!(k.is_closed() && k.is_convex(1e-9));
    for (i, p) in k.placements.iter().enumerate() {
        let apex = k.vertices[k.global_node(i, 3)];
        let corner = k.vertices[p.corners[0]];
        assert!(((apex - corner).dot(&p.normal()) - cap.vertices[3].z).abs() < 1e-12);
    }
}

#[test]
fn steep_caps_are_rejected() {
    // Pyramid caps over the unit-circumradius triangle: the rigid placement stops being
    // convex at apex curvature π/2, where opposite lateral faces across a tetrahedron
    // edge become coplanar; the corner angle reaches 2π/3 at apex curvature π.
    assert!(assemble_tetrahedron(&pyramid(1.5)).is_ok());
    let cap = pyramid(1.65);
    assert!(cap.angle_sum(0) < 2.0 * FRAC_PI_3);
    assert!(matches!(assemble_tetrahedron(&cap), Err(AssemblyError::NotConvex(_))));
    let cap = pyramid(3.0);
    assert!(cap.angle_sum(0) < 2.0 * FRAC_PI_3);
    let cap = pyramid(3.3);
    let err = assemble_tetrahedron(&cap).unwrap_err();
    assert!(matches!(err, AssemblyError::CornerAngle { .. }));
    assert!(err.to_string().contains("smaller β"));
}

#[test]
fn only_equilateral_triangles_are_assembled() {
    let s = fixtures::load("square1", &default_eps()).unwrap();
    let (cap, _) = solve_cap(&CapSpec::from_subdivision(&s, 0.5).unwrap(), 1e-12).unwrap();
    assert_eq!(assemble_tetrahedron(&cap).unwrap_err(), AssemblyError::NotTriangle(4));
    let skew = [PointF2::new(0.0, 0.0), PointF2::new(2.0, 0.0), PointF2::new(0.0, 1.0)];
    let cap = lift_upper_hull(&skew, &[], &[]).unwrap();
    assert!(matches!(assemble_tetrahedron(&cap), Err(AssemblyError::NotEquilateral(_))));
}

#[test]
fn flagship_has_340_vertices() {
    let f = flagship();
    assert!(f.model.beta <= 0.0125);
    assert_eq!(f.k.vertex_count(), 340);
    assert!(f.k.is_closed());
    assert_eq!(f.k.euler_characteristic(), 2);
    assert!(f.k.is_convex(1e-9));
    assert!((f.k.edge_length - 280.0).abs() < 1e-9);
    let m = f.model.mesh();
    for c in 0..3 {
        assert!(m.angle_sum(c) < 2.0 * FRAC_PI_3);
    }
}

#[test]
fn global_graph_preserves_pseudo_edge_lengths() {
    let f = flagship();
    let s = &f.model.subdivision;
    assert_eq!(f.e.edge_count(), 4 * (s.edge_nodes().len() - 3) + 6);
    assert_eq!(f.e.edges.iter().filter(|e| e.is_side()).count(), 6);
    assert!(f.e.max_length_deviation() < 1e-9);
    for e in f.e.edges.iter().filter(|e| e.is_side()) {
        assert!((e.length - 280.0).abs() < 1e-9);
        assert!(e.ends.1 < 4);
    }
}

#[test]
fn every_arc_choice_closes_a_loop() {
    let r = face_arc_loop_check();
    assert_eq!((r.cases, r.with_loop), (81, 81));
    assert!(r.without_loop.is_empty());
}

#[test]
fn three_faces_can_carry_arcs_without_a_loop() {
    let mut acyclic = 0;
    for a in [(1, 2), (2, 3), (1, 3)] {
        for b in [(0, 2), (2, 3), (0, 3)] {
            for c in [(0, 1), (1, 3), (0, 3)] {
                let mut uf = UnionFind::<usize>::new(4);
                if [a, b, c].iter().all(|&(x, y)| uf.union(x, y)) {
                    acyclic += 1;
                }
            }
        }
    }
    assert_eq!(acyclic, 14);
}

#[test]
fn spanning_trees_are_validated() {
    let f = flagship();
    let t = &sample_spanning_trees(&f.e, 1, 3)[0];
    assert_eq!(t.edges.len(), 339);
    assert!(SpanningTree::new(&f.e, t.edges.clone(), 0).is_ok());
    assert!(SpanningTree::new(&f.e, t.edges[1..].to_vec(), 0).is_err());
    let mut longer = t.edges.clone();
    longer.push((0..f.e.edge_count()).find(|&i| !t.contains(i)).unwrap());
    assert!(SpanningTree::new(&f.e, longer, 0).is_err());
    let mut uf = UnionFind::<usize>::new(340);
    for &i in &t.edges[1..] {
        uf.union(f.e.edges[i].ends.0, f.e.edges[i].ends.1);
    }
    let chord = (0..f.e.edge_count()).find(|&i| !t.contains(i) && uf.equiv(f.e.edges[i].ends.0, f.e.edges[i].ends.1)).unwrap();
    let mut cyclic = t.edges[1..].to_vec();
    cyclic.push(chord);
    assert!(matches!(SpanningTree::new(&f.e, cyclic, 0), Err(AssemblyError::NotSpanning(m)) if m.contains("cycle")));
}

#[test]
fn tree_sampling_is_deterministic() {
    let f = flagship();
    assert_eq!(sample_spanning_trees(&f.e, 8, 5), sample_spanning_trees(&f.e, 8, 5));
    assert_ne!(sample_spanning_trees(&f.e, 8, 5), sample_spanning_trees(&f.e, 8, 6));
    let few = sample_spanning_trees(&f.e, 3, 5);
    assert_eq!(few[..], sample_spanning_trees(&f.e, 8, 5)[..3]);
}

fn arc_ends_are_acyclic(r: &Restriction) -> bool {
    let mut uf = UnionFind::<usize>::new(4);
    r.caps.iter().all(|c| match c {
        CapClass::Arc { ends, .. } => uf.union(ends.0, ends.1),
        CapClass::Forest { .. } => true,
    })
}

#[test]
fn sampled_trees_never_thread_all_four_caps() {
    let f = flagship();
    let mut arcs = [0usize; 5];
    for t in sample_spanning_trees(&f.e, 10_000, 7) {
        let r = restrict_tree(&f.k, &f.e, &f.model, &t).unwrap();
        assert!(r.arcs < 4);
        assert!(arc_ends_are_acyclic(&r));
        arcs[r.arcs] += 1;
    }
    assert_eq!(arcs[4], 0);
    assert_eq!(arcs.iter().sum::<usize>(), 10_000);
}

#[test]
fn restricted_forests_are_cut_forests() {
    let f = flagship();
    let s = &f.model.subdivision;
    for t in sample_spanning_trees(&f.e, 50, 9) {
        let r = restrict_tree(&f.k, &f.e, &f.model, &t).unwrap();
        for (i, c) in r.caps.iter().enumerate() {
            match c {
                CapClass::Forest { forest, links } => {
                    assert!(validate_forest(s, forest).valid);
                    assert_eq!(links.len(), s.node_count() - 3);
                    for (a, b) in forest.edges() {
                        let ga = f.k.global_node(i, a);
                        let gb = f.k.global_node(i, b);
                        assert!(t.contains(f.e.find(ga, gb).unwrap()));
                    }
                }
                CapClass::Arc { ends, path } => {
                    assert_eq!((path[0], *path.last().unwrap()), *ends);
                    assert!(path[1..path.len() - 1].iter().all(|&v| v >= 4));
                    for w in path.windows(2) {
                        assert!(t.contains(f.e.find(w[0], w[1]).unwrap()));
                    }
                }
            }
        }
    }
}

/// A path of `E` from corner `a` to corner `b` of cap `cap` through its interior.
fn interior_arc(f: &Flagship, cap: usize, a: usize, b: usize) -> Vec<usize> {
    let (ga, gb) = (f.k.global_node(cap, a), f.k.global_node(cap, b));
    let mut prev = vec![usize::MAX; 340];
    let mut queue = std::collections::VecDeque::from([ga]);
    prev[ga] = ga;
    while let Some(u) = queue.pop_front() {
        for &i in f.e.incident(u) {
            let e = &f.e.edges[i];
            let w = e.other(u);
            if e.is_side() || e.caps[0] != cap || prev[w] != usize::MAX || (w < 4 && w != gb) {
                continue;
            }
            prev[w] = i;
            queue.push_back(w);
        }
    }
    let mut edges = Vec::new();
    let mut v = gb;
    while v != ga {
        edges.push(prev[v]);
        v = f.e.edges[prev[v]].other(v);
    }
    edges
}

#[test]
fn threading_three_caps_leaves_a_forest_in_the_fourth() {
    let f = flagship();
    let mut uf = UnionFind::<usize>::new(4);
    let mut fixed = Vec::new();
    let mut threaded = Vec::new();
    for cap in 0..3 {
        let c = f.k.placements[cap].corners;
        let (a, b) = [(0, 1), (1, 2), (0, 2)].into_iter().find(|&(x, y)| !uf.equiv(c[x], c[y])).unwrap();
        uf.union(c[a], c[b]);
        fixed.extend(interior_arc(f, cap, a, b));
        threaded.push((c[a].min(c[b]), c[a].max(c[b])));
    }
    for seed in 0..5 {
        let t = complete_tree(&f.e, &fixed, seed).unwrap();
        let r = restrict_tree(&f.k, &f.e, &f.model, &t).unwrap();
        assert_eq!(r.arcs, 3);
        assert_eq!(r.forest_caps, vec![3]);
        let mut ends: Vec<_> = r.caps[..3]
            .iter()
            .map(|c| match c {
                CapClass::Arc { ends, .. } => (ends.0.min(ends.1), ends.0.max(ends.1)),
                CapClass::Forest { .. } => panic!("expected an arc"),
            })
            .collect();
        ends.sort();
        let mut want = threaded.clone();
        want.sort();
        assert_eq!(ends, want);
        let g = global_unfold_check(&f.k, &f.e, &f.model, &t).unwrap();
        assert_eq!(g.cap, Some(3));
        assert_eq!(g.simple, Some(false));
    }
}

#[test]
fn trees_through_three_sides_restrict_to_forests_everywhere() {
    let f = flagship();
    let mut uf = UnionFind::<usize>::new(4);
    let sides: Vec<usize> =
        (0..f.e.edge_count()).filter(|&i| f.e.edges[i].is_side() && uf.union(f.e.edges[i].ends.0, f.e.edges[i].ends.1)).collect();
    assert_eq!(sides.len(), 3);
    let t = complete_tree(&f.e, &sides, 1).unwrap();
    let r = restrict_tree(&f.k, &f.e, &f.model, &t).unwrap();
    assert_eq!(r.arcs, 0);
    assert_eq!(r.forest_caps, vec![0, 1, 2, 3]);
}

#[test]
fn flat_tetrahedron_unfolds_simply_along_every_spanning_tree() {
    let cap = lift_upper_hull(&triangle(), &[], &[]).unwrap();
    let k = assemble_tetrahedron(&cap).unwrap();
    let edges: Vec<(usize, usize)> = (0..4).flat_map(|a| (a + 1..4).map(move |b| (a, b))).collect();
    let mut trees = 0;
    for mask in 0u32..64 {
        if mask.count_ones() != 3 {
            continue;
        }
        let cut: Vec<_> = (0..6).filter(|&i| mask >> i & 1 == 1).map(|i| edges[i]).collect();
        let mut uf = UnionFind::<usize>::new(4);
        if !cut.iter().all(|&(a, b)| uf.union(a, b)) {
            continue;
        }
        trees += 1;
        let u = unfold_along_mesh_edges(&k, &cut).unwrap();
        assert!(u.simple, "{cut:?}");
        let area: f64 = u.images.iter().map(|t| (t[1] - t[0]).perp(&(t[2] - t[0])) / 2.0).sum();
        assert!((area - 3.0 * 3f64.sqrt()).abs() < 1e-12);
    }
    assert_eq!(trees, 16);
}

#[test]
fn sampled_trees_fail_through_the_cap_witness() {
    let f = flagship();
    let s = &f.model.subdivision;
    for t in sample_spanning_trees(&f.e, 25, 7) {
        let g = global_unfold_check(&f.k, &f.e, &f.model, &t).unwrap();
        assert_eq!(g.simple, Some(false));
        assert_eq!(g.method, CheckMethod::CapWitness);
        let j = g.cap.unwrap();
        let forest = g.restriction.caps[j].forest().unwrap();
        assert!(!is_monotone(s, forest).monotone);
        let w = g.witness.as_ref().unwrap();
        assert!(w.valid);
        assert_eq!(g.overlap, w.overlap);
    }
}

#[test]
fn global_verdict_matches_a_direct_witness() {
    let f = flagship();
    let s = &f.model.subdivision;
    let t = &sample_spanning_trees(&f.e, 1, 21)[0];
    let g = global_unfold_check(&f.k, &f.e, &f.model, t).unwrap();
    let forest = g.restriction.caps[g.cap.unwrap()].forest().unwrap();
    let dev = develop(cut_along(f.model.triangulation.clone(), s, forest).unwrap()).unwrap();
    let w = g.witness.as_ref().unwrap();
    let direct = overlap_witness(&dev, s, forest, w.node, w.lambda, f.model.beta).unwrap();
    assert!(direct.valid);
    assert_eq!(direct.overlap, w.overlap);
    assert_eq!(direct.y_image, w.y_image);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn random_trees_classify_consistently(seed in any::<u64>()) {
        let f = flagship();
        let t = &sample_spanning_trees(&f.e, 1, seed)[0];
        prop_assert!(SpanningTree::new(&f.e, t.edges.clone(), 0).is_ok());
        let r = restrict_tree(&f.k, &f.e, &f.model, t).unwrap();
        prop_assert!(r.arcs < 4);
        prop_assert!(arc_ends_are_acyclic(&r));
        prop_assert_eq!(r.arcs + r.forest_caps.len(), 4);
    }
}
