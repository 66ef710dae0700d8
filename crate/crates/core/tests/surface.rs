use std::f64::consts::TAU;

use durer_forge::capsolver::*;
use durer_forge::fixtures;
use durer_forge::geom::{PointF2, PointF3};
use durer_forge::subdivision::{default_eps, WeightedSubdivision};
use durer_forge::surface::*;

fn square2() -> Vec<PointF2> {
    vec![PointF2::new(-1.0, -1.0), PointF2::new(1.0, -1.0), PointF2::new(1.0, 1.0), PointF2::new(-1.0, 1.0)]
}

fn pyramid(h: f64) -> Surface {
    Surface::new(lift_upper_hull(&square2(), &[PointF2::zeros()], &[h]).unwrap())
}

fn cap(name: &str, beta: f64) -> (WeightedSubdivision, Surface) {
    let s = fixtures::load(name, &default_eps()).unwrap();
    let spec = CapSpec::from_subdivision(&s, beta).unwrap();
    let (m, _) = solve_cap(&spec, 1e-12).unwrap();
    (s, Surface::new(m))
}

fn on_surface(surface: &Surface, p: PointF2) -> SurfacePoint {
    surface.locate(&p).unwrap()
}

fn hausdorff(a: &GeodesicPath, b: &GeodesicPath) -> f64 {
    let sample = |p: &GeodesicPath| (0..=200).map(|k| p.point_at(p.length * k as f64 / 200.0)).collect::<Vec<_>>();
    let (sa, sb) = (sample(a), sample(b));
    let one = |x: &[PointF3], y: &[PointF3]| {
        x.iter().map(|p| y.iter().map(|q| (p - q).norm()).fold(f64::INFINITY, f64::min)).fold(0.0, f64::max)
    };
    one(&sa, &sb).max(one(&sb, &sa))
}

#[test]
fn single_face_strip_uses_the_identity() {
    let s = pyramid(1.0);
    let iso = s.develop_strip(&[2]).unwrap();
    assert_eq!(iso.len(), 1);
    let p = PointF2::new(0.3, -0.7);
    assert_eq!(iso[0].apply(&p), p);
}

#[test]
fn strip_development_is_isometric_on_each_face() {
    let s = pyramid(0.8);
    let fan = s.fan(4).to_vec();
    let iso = s.develop_strip(&fan).unwrap();
    for (i, &f) in fan.iter().enumerate() {
        let tri = s.mesh.triangles[f];
        for a in 0..3 {
            for b in 0..3 {
                let pa = s.developed_vertex(&iso[i], f, tri[a]);
                let pb = s.developed_vertex(&iso[i], f, tri[b]);
                let d3 = (s.mesh.vertices[tri[a]] - s.mesh.vertices[tri[b]]).norm();
                assert!(((pa - pb).norm() - d3).abs() < 1e-12);
            }
        }
        if i > 0 {
            let (u, v) = s.shared_edge(fan[i - 1], f).unwrap();
            for w in [u, v] {
                let p0 = s.developed_vertex(&iso[i - 1], fan[i - 1], w);
                let p1 = s.developed_vertex(&iso[i], f, w);
                assert!((p0 - p1).norm() < 1e-12);
            }
        }
    }
    assert!(matches!(s.develop_strip(&[fan[0], fan[2]]), Err(SurfaceError::NotAdjacent(..))));
}

#[test]
fn developed_fan_angle_is_the_cone_angle() {
    let s = pyramid(2f64.sqrt());
    let fan = s.fan(4).to_vec();
    assert_eq!(fan.len(), 4);
    let iso = s.develop_strip(&fan).unwrap();
    let apex = s.developed_vertex(&iso[0], fan[0], 4);
    let mut total = 0.0;
    for (i, &f) in fan.iter().enumerate() {
        let tri = s.mesh.triangles[f];
        let k = tri.iter().position(|&x| x == 4).unwrap();
        let a = s.developed_vertex(&iso[i], f, tri[(k + 1) % 3]) - apex;
        let b = s.developed_vertex(&iso[i], f, tri[(k + 2) % 3]) - apex;
        let turn = a.perp(&b).atan2(a.dot(&b));
        assert!(turn > 0.0);
        total += turn;
    }
    assert!((total - (TAU - TAU / 3.0)).abs() < 1e-12, "{total}");
}

#[test]
fn geodesic_inside_one_triangle_is_the_chord() {
    let s = pyramid(1.0);
    let t = s.mesh.triangles.iter().position(|t| t.contains(&0) && t.contains(&1)).unwrap();
    let u = SurfacePoint { triangle: t, bary: [0.2, 0.3, 0.5] };
    let v = SurfacePoint { triangle: t, bary: [0.6, 0.1, 0.3] };
    let g = s.geodesic_between(&u, &v, None).unwrap();
    assert_eq!(g.strip, vec![t]);
    assert!((g.length - (s.position(&u) - s.position(&v)).norm()).abs() < 1e-15);
}

/// Shortest path from `a` to `b` over the three-face routes through a lateral face,
/// found by refining a grid over the two crossing points on the lateral edges.
fn brute_force_around_apex(s: &Surface, a: PointF3, b: PointF3) -> f64 {
    let apex = s.mesh.vertices[4];
    let corner = |x: f64, y: f64| PointF3::new(x, y, 0.0);
    let mut best = (a - apex).norm() + (apex - b).norm();
    for side in [1.0, -1.0] {
        let (e1, e2) = (corner(side, -1.0), corner(side, 1.0));
        let len = |t1: f64, t2: f64| {
            let x1 = apex + (e1 - apex) * t1;
            let x2 = apex + (e2 - apex) * t2;
            (a - x1).norm() + (x1 - x2).norm() + (x2 - b).norm()
        };
        let (mut c1, mut c2, mut w) = (0.5, 0.5, 0.5);
        for _ in 0..12 {
            let mut local = (f64::INFINITY, c1, c2);
            for i in 0..100 {
                for j in 0..100 {
                    let t1 = (c1 - w + 2.0 * w * i as f64 / 99.0).clamp(0.0, 1.0);
                    let t2 = (c2 - w + 2.0 * w * j as f64 / 99.0).clamp(0.0, 1.0);
                    let l = len(t1, t2);
                    if l < local.0 {
                        local = (l, t1, t2);
                    }
                }
            }
            (c1, c2) = (local.1, local.2);
            w *= 0.1;
            best = best.min(local.0);
        }
    }
    best
}

#[test]
fn pyramid_geodesic_matches_brute_force() {
    let s = pyramid(2f64.sqrt());
    let (u, v) = (on_surface(&s, PointF2::new(0.2, -1.0)), on_surface(&s, PointF2::new(0.1, 1.0)));
    let g = s.geodesic_between(&u, &v, None).unwrap();
    let oracle = brute_force_around_apex(&s, s.position(&u), s.position(&v));
    assert!((g.length - oracle).abs() < 1e-6, "{} vs {oracle}", g.length);
    assert_eq!(g.strip.len(), 3);
    assert!(g.straightness(&s).unwrap() < 1e-9);
    assert!(g.projected().iter().all(|p| p.x > 0.0));
}

#[test]
fn geodesics_are_symmetric_and_straight() {
    for (name, beta) in [("strip2", 0.3), ("hook2", 0.3), ("triangle84", 0.0125)] {
        let (s, surf) = cap(name, beta);
        for &(a, b) in s.edge_nodes() {
            let (u, v) = (surf.vertex_point(a), surf.vertex_point(b));
            let f = surf.geodesic_between(&u, &v, None).unwrap();
            let r = surf.geodesic_between(&v, &u, None).unwrap();
            assert!((f.length - r.length).abs() <= 1e-12, "{name} {a}-{b}");
            assert!(f.straightness(&surf).unwrap() <= 1e-9, "{name} {a}-{b}");
            assert_eq!(f.strip.len() + 1, f.positions.len());
        }
    }
}

#[test]
fn perturbed_initial_strips_straighten_to_the_same_path() {
    for (name, beta) in [("strip2", 0.3), ("hook2", 0.3), ("triangle84", 0.0125)] {
        let (s, surf) = cap(name, beta);
        let mut probed = 0;
        for &(a, b) in s.edge_nodes() {
            let (u, v) = (surf.vertex_point(a), surf.vertex_point(b));
            let g = surf.geodesic_between(&u, &v, None).unwrap();
            let (pa, pb) = (surf.mesh.projection(a), surf.mesh.projection(b));
            let d = pb - pa;
            let offset = PointF2::new(-d.y, d.x) * (0.02 * 0.223 / d.norm().max(1.0));
            let Some(m) = surf.locate(&((pa + pb) * 0.5 + offset)) else { continue };
            if m.bary.iter().any(|&x| x < 1e-6) {
                continue;
            }
            let first = surf.geodesic_between(&u, &m, None).unwrap();
            let second = surf.geodesic_between(&m, &v, None).unwrap();
            let mut strip = first.strip.clone();
            let rest = if second.strip[0] == *strip.last().unwrap() { &second.strip[1..] } else { &second.strip[..] };
            strip.extend_from_slice(rest);
            let h = surf.geodesic_from_strip(&u, &v, strip).unwrap();
            assert!(hausdorff(&g, &h) <= 1e-8, "{name} {a}-{b}");
            probed += 1;
        }
        assert!(probed > 0);
    }
}

#[test]
fn square_pseudo_edges_are_hull_edges() {
    for beta in [0.2, 1.0, 3.0] {
        let (s, surf) = cap("square1", beta);
        let g = induce_pseudo_edge_graph(&surf, &s).unwrap();
        assert_eq!(g.edges.len(), 8);
        for e in &g.edges {
            assert_eq!(e.path.positions.len(), 2);
            let (a, b) = e.nodes;
            let chord = (surf.mesh.vertices[a] - surf.mesh.vertices[b]).norm();
            assert!((e.path.length - chord).abs() < 1e-12);
            assert!(surf.mesh.triangles.iter().any(|t| t.contains(&a) && t.contains(&b)));
        }
        assert!(g.cyclic_order_ok);
        assert!(g.nonconvex_corners().is_empty());
    }
}

#[test]
fn pseudo_edges_are_never_shorter_and_converge() {
    let mut last = f64::INFINITY;
    for beta in [0.05, 0.025, 0.0125] {
        let (s, surf) = cap("triangle84", beta);
        let edges = survey_pseudo_edges(&surf, &s).unwrap();
        assert_eq!(edges.len(), s.edge_nodes().len());
        let worst = edges.iter().map(PseudoEdge::relative_excess).fold(0.0, f64::max);
        assert!(edges.iter().all(|e| e.path.length >= e.planar_length * (1.0 - 1e-12)));
        assert!(worst < last, "{beta}: {worst}");
        last = worst;
    }
    assert!(last < 0.01);
}

#[test]
fn corridor_fails_for_large_beta() {
    let (s, surf) = cap("triangle84", 3.0);
    match induce_pseudo_edge_graph(&surf, &s) {
        Err(SurfaceError::Corridor { edge, distance, delta }) => {
            assert!(!edge.is_empty());
            assert!(distance >= delta);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn triangle84_graph_at_small_beta() {
    let (s, surf) = cap("triangle84", 0.0125);
    let g = induce_pseudo_edge_graph(&surf, &s).unwrap();
    assert!(g.min_corridor_margin() > 0.0);
    assert!(g.cyclic_order_ok, "{:?}", g.order_issues);
    assert!(g.max_relative_excess() < 0.01);
    let reflex: Vec<String> = g.nonconvex_corners().iter().map(|c| c.vertex.to_string()).collect();
    assert_eq!(reflex.len(), 2, "{reflex:?}");
    for e in &g.edges {
        let (a, b) = e.nodes;
        assert!((g.length(b, a).unwrap() - e.path.length).abs() == 0.0);
        assert_eq!(g.path(b, a).unwrap().positions[0], e.path.positions[e.path.positions.len() - 1]);
    }
}

#[test]
fn shape_angles_close_up_around_nodes() {
    for (name, beta) in [("strip2", 0.3), ("hook2", 0.5), ("triangle84", 0.0125)] {
        let (s, surf) = cap(name, beta);
        let g = induce_pseudo_edge_graph(&surf, &s).unwrap();
        let t = pseudo_triangulation(&surf, &s, &g).unwrap();
        let deficits = shape_deficits(&t);
        for v in s.interior_nodes() {
            assert!((deficits[v] - surf.mesh.vertex_curvature(v).unwrap()).abs() < 1e-9, "{name} node {v}");
        }
        for d in &deficits[s.node_count()..] {
            assert!(d.abs() < 1e-9, "{name}: centroid deficit {d}");
        }
    }
}

#[test]
fn canonical_map_fixes_the_boundary() {
    let (s, surf) = cap("triangle84", 0.0125);
    let g = induce_pseudo_edge_graph(&surf, &s).unwrap();
    let f = canonical_map(&surf, &s, &g).unwrap();
    let corners: Vec<PointF2> = (0..s.corner_count()).map(|i| s.node_point(i).to_f64()).collect();
    for k in 0..corners.len() {
        let (a, b) = (corners[k], corners[(k + 1) % corners.len()]);
        for i in 0..=20 {
            let x = a + (b - a) * (i as f64 / 20.0);
            let y = f.eval_position(&x).unwrap();
            assert!((PointF2::new(y.x, y.y) - x).norm() < 1e-9 && y.z.abs() < 1e-9, "{x:?} -> {y:?}");
        }
    }
}

#[test]
fn canonical_map_sends_square_center_to_apex() {
    let (s, surf) = cap("square1", 1.0);
    let g = induce_pseudo_edge_graph(&surf, &s).unwrap();
    let f = canonical_map(&surf, &s, &g).unwrap();
    let apex = surf.mesh.vertices[4];
    assert!((f.eval_position(&PointF2::zeros()).unwrap() - apex).norm() < 1e-12);
    let x = PointF2::new(0.1, -0.3);
    let (t, b) = f.triangulation.locate(&x).unwrap();
    let nodes = f.triangulation.planar.triangles[t].nodes;
    let expected: PointF3 = (0..3).map(|k| surf.mesh.vertices[nodes[k]] * b[k]).sum();
    assert!((f.eval_position(&x).unwrap() - expected).norm() < 1e-12);
}

#[test]
fn canonical_map_is_continuous_across_edges() {
    let (s, surf) = cap("hook2", 0.5);
    let g = induce_pseudo_edge_graph(&surf, &s).unwrap();
    let f = canonical_map(&surf, &s, &g).unwrap();
    let tris = &f.triangulation.planar.triangles;
    for (i, ti) in tris.iter().enumerate() {
        for (j, tj) in tris.iter().enumerate().skip(i + 1) {
            let shared: Vec<usize> = ti.nodes.iter().copied().filter(|n| tj.nodes.contains(n)).collect();
            if shared.len() != 2 {
                continue;
            }
            for w in [0.25, 0.5, 0.8] {
                let bary = |t: &[usize; 3]| t.map(|n| if n == shared[0] { w } else if n == shared[1] { 1.0 - w } else { 0.0 });
                let p = surf.position(&f.eval_in(i, bary(&ti.nodes)).unwrap());
                let q = surf.position(&f.eval_in(j, bary(&tj.nodes)).unwrap());
                assert!((p - q).norm() < 1e-9, "triangles {i} and {j}");
            }
        }
    }
}

#[test]
fn canonical_map_tends_to_the_identity() {
    let s = fixtures::load("triangle84", &default_eps()).unwrap();
    let samples: Vec<PointF2> = (0..12)
        .flat_map(|i| (0..12).map(move |j| PointF2::new(-120.0 + 20.0 * i as f64, 8.0 + 18.0 * j as f64)))
        .collect();
    let mut last = f64::INFINITY;
    for beta in [0.0125, 0.00625] {
        let (_, surf) = cap("triangle84", beta);
        let g = induce_pseudo_edge_graph(&surf, &s).unwrap();
        let f = canonical_map(&surf, &s, &g).unwrap();
        let worst = samples
            .iter()
            .filter_map(|x| f.eval_position(x).ok().map(|y| (PointF2::new(y.x, y.y) - x).norm()))
            .fold(0.0, f64::max);
        assert!(worst < last, "{beta}: {worst}");
        last = worst;
    }
    let spec = CapSpec::from_subdivision(&s, 0.1).unwrap();
    let tiny: Vec<f64> = paraboloid_heights(&spec).unwrap().iter().map(|h| h * 1e-7).collect();
    let flat = Surface::new(lift_upper_hull(&spec.boundary, &spec.points, &tiny).unwrap());
    let g = induce_pseudo_edge_graph(&flat, &s).unwrap();
    let f = canonical_map(&flat, &s, &g).unwrap();
    for x in &samples {
        if let Ok(y) = f.eval_position(x) {
            assert!((PointF2::new(y.x, y.y) - x).norm() < 1e-6, "{x:?}");
        }
    }
}
