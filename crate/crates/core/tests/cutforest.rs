use std::collections::{BTreeMap, HashSet, VecDeque};

use durer_forge::cutforest::*;
use durer_forge::fixtures;
use durer_forge::geom::{int, rat, PointR2, Rational};
use durer_forge::subdivision::{default_eps, parse_subdivision_unchecked, VertexId, WeightedSubdivision};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn load(name: &str) -> WeightedSubdivision {
    fixtures::load(name, &default_eps()).unwrap()
}

fn id(s: &WeightedSubdivision, label: &str) -> usize {
    s.node_of(label.parse::<VertexId>().unwrap()).unwrap()
}

/// A graph given only by vertices and edges; faces are not needed here.
fn graph(vertices: &[(i64, &str, &str, &str)], edges: &[(&str, &str)]) -> WeightedSubdivision {
    let v: Vec<String> =
        vertices.iter().map(|(i, x, y, w)| format!(r#"{{"id": {i}, "x": "{x}", "y": "{y}", "weight": "{w}"}}"#)).collect();
    let e: Vec<String> = edges.iter().map(|(a, b)| format!("[{}, {}]", json_id(a), json_id(b))).collect();
    let text = format!(
        r#"{{"boundary": [["-3","-3"],["3","-3"],["3","3"],["-3","3"]], "vertices": [{}], "edges": [{}], "faces": []}}"#,
        v.join(","),
        e.join(",")
    );
    parse_subdivision_unchecked(&text, &default_eps()).unwrap()
}

fn json_id(s: &str) -> String {
    if s.starts_with('b') {
        format!("\"{s}\"")
    } else {
        s.to_string()
    }
}

fn forest(s: &WeightedSubdivision, links: &[(&str, &str)]) -> CutForest {
    let map: BTreeMap<VertexId, VertexId> =
        links.iter().map(|(c, p)| (c.parse().unwrap(), p.parse().unwrap())).collect();
    CutForest::from_ids(s, &map).unwrap()
}

/// Completes fixed parent links to a cut forest, attaching every other vertex to the
/// first neighbour found already connected to a corner. `avoid` is never used as a
/// parent except through fixed links.
fn complete(s: &WeightedSubdivision, fixed: &[(usize, usize)], avoid: &[usize]) -> CutForest {
    let nb = s.corner_count();
    let mut given = vec![usize::MAX; s.node_count()];
    for &(c, p) in fixed {
        given[c] = p;
    }
    let mut parent = vec![usize::MAX; s.node_count()];
    let mut rooted: Vec<bool> = (0..s.node_count()).map(|v| v < nb).collect();
    let mut queue: VecDeque<usize> = (0..nb).collect();
    while let Some(u) = queue.pop_front() {
        for &w in s.neighbors(u) {
            let attach = if given[w] == usize::MAX { !avoid.contains(&u) } else { given[w] == u };
            if !rooted[w] && attach {
                rooted[w] = true;
                parent[w] = u;
                queue.push_back(w);
            }
        }
    }
    CutForest::new(nb, parent[nb..].to_vec())
}

#[test]
fn square_forests_validate() {
    let s = load("square1");
    assert!(validate_forest(&s, &forest(&s, &[("1", "b0")])).valid);
    let cyclic = CutForest::new(4, vec![4]);
    let v = validate_forest(&s, &cyclic);
    assert!(!v.valid);
    assert!(v.issues[0].contains("own parent"));
}

#[test]
fn non_edges_and_cycles_are_rejected() {
    let s = load("hook2");
    let v = validate_forest(&s, &forest(&s, &[("1", "b0"), ("-1", "b0")]));
    assert!(!v.valid && v.issues.iter().any(|i| i.contains("not an edge")));
    let v = validate_forest(&s, &forest(&s, &[("1", "-1"), ("-1", "1")]));
    assert!(!v.valid && v.issues.iter().any(|i| i.contains("cycle")));
    assert!(CutForest::from_ids(&s, &BTreeMap::from([("1".parse().unwrap(), "b2".parse().unwrap())])).is_err());
}

#[test]
fn spiral_forest_is_valid() {
    let s = load("triangle84");
    let mut path: Vec<i64> = vec![1];
    path.extend(2..=22);
    path.extend([-24, 24, 25, 26, 28, 29, 30, -42, -41]);
    let nodes: Vec<usize> = path.iter().map(|i| s.node_of(VertexId::Interior(*i)).unwrap()).collect();
    let last = *nodes.last().unwrap();
    let q = *s.neighbors(last).iter().find(|&&w| s.is_corner_node(w)).expect("the spiral ends next to a corner");
    let mut fixed: Vec<(usize, usize)> = nodes.windows(2).map(|w| (w[0], w[1])).collect();
    fixed.push((last, q));
    let f = complete(&s, &fixed, &[]);
    let v = validate_forest(&s, &f);
    assert!(v.valid, "{:?}", v.issues);
    assert_eq!(f.root_of(nodes[0]), Some(q));
    assert_eq!(f.ancestral_path(nodes[0]).unwrap()[..nodes.len()], nodes[..]);
    assert!(!is_monotone(&s, &f).monotone);
}

#[test]
fn descendants_of_small_forests() {
    let s = load("square1");
    let f = forest(&s, &[("1", "b2")]);
    assert_eq!(f.descendants(4).unwrap(), vec![4]);
    assert_eq!(f.descendants(2).unwrap(), vec![4]);
    assert!(f.descendants(0).unwrap().is_empty());
    assert!(f.descendants(5).is_err());
    assert!(f.edge_descendants(0).is_err());

    let s = graph(&[(1, "0", "0", "0.5"), (2, "2", "0", "0.5")], &[("1", "2"), ("2", "b1")]);
    let f = forest(&s, &[("1", "2"), ("2", "b1")]);
    let (a, b) = (id(&s, "1"), id(&s, "2"));
    assert_eq!(f.descendants(a).unwrap(), vec![a]);
    assert_eq!(f.descendants(b).unwrap(), vec![a, b]);
    assert_eq!(f.edge_descendants(b).unwrap(), vec![a, b]);
    let (c, alpha) = center_of_rotation(&s, &f, b).unwrap();
    assert_eq!(c, PointR2::from_ints(1, 0));
    assert_eq!(alpha, int(1));
    assert_eq!(center_of_rotation(&s, &f, a).unwrap().0, PointR2::from_ints(0, 0));
    assert_eq!(f.tree_sizes(), vec![0, 2, 0, 0]);
}

#[test]
fn merged_spirals_are_centred_near_the_origin() {
    let s = load("triangle84");
    let node = |i: i64| s.node_of(VertexId::Interior(i)).unwrap();
    assert_eq!(s.weighted_centroid(&[node(1), node(-1)]).unwrap().0, PointR2::origin());
    let mut fixed = Vec::new();
    let mut up: Vec<i64> = (1..=22).collect();
    up.extend([-24, 24]);
    let mut down: Vec<i64> = (1..=22).map(|i| -i).collect();
    down.push(24);
    for chain in [&up, &down] {
        fixed.extend(chain.windows(2).map(|w| (node(w[0]), node(w[1]))));
    }
    let f = complete(&s, &fixed, &[]);
    assert!(validate_forest(&s, &f).valid);
    let d = f.descendants(node(24)).unwrap();
    assert!(d.contains(&node(1)) && d.contains(&node(-1)));
    let (c, alpha) = center_of_rotation(&s, &f, node(24)).unwrap();
    assert!(c.to_f64().norm() < 82.0 * 1e-6 * 300.0, "{c}");
    assert!(alpha > rat(99, 100));
    for v in s.interior_nodes() {
        if f.children(v).is_empty() {
            assert_eq!(&center_of_rotation(&s, &f, v).unwrap().0, s.node_point(v));
        }
    }
}

#[test]
fn inner_products_by_hand() {
    let s = graph(
        &[(1, "0", "0", "1"), (2, "1", "0", "1"), (3, "1", "1", "0.5"), (4, "1", "-1", "0.5"), (5, "-1", "0", "1")],
        &[("1", "2"), ("1", "3"), ("1", "4"), ("1", "5"), ("2", "b1"), ("3", "b2"), ("4", "b1"), ("5", "b0"), ("5", "b3")],
    );
    let a = id(&s, "1");
    let check = |r: &MonotonicityReport| r.checks.iter().find(|c| c.node == a).unwrap().clone();

    let f = forest(&s, &[("1", "2"), ("2", "b1"), ("3", "1"), ("4", "1"), ("5", "b0")]);
    let r = is_monotone(&s, &f);
    let c = check(&r);
    assert_eq!(c.center, PointR2::new(rat(1, 2), int(0)));
    assert_eq!(c.product, rat(-1, 2));
    assert!(!r.monotone);
    let w = r.worst.unwrap();
    assert_eq!(w.node, a);
    assert_eq!(w.lambda_sq, rat(1, 4));
    assert!((w.lambda - 0.5).abs() < 1e-15);

    let f = forest(&s, &[("1", "5"), ("5", "b0"), ("3", "1"), ("4", "1"), ("2", "b1")]);
    let r = is_monotone(&s, &f);
    assert_eq!(check(&r).product, rat(1, 2));
    assert!(r.monotone && r.worst.is_none());
    assert!(r.violations().is_empty());
}

#[test]
fn square_forests_are_all_monotone() {
    let s = load("square1");
    let all: Vec<CutForest> = enumerate_forests(&s).unwrap().collect();
    assert_eq!(all.len(), 4);
    for f in &all {
        let r = is_monotone(&s, f);
        assert!(r.monotone);
        assert_eq!(r.checks[0].product, Rational::from_integer(0.into()));
    }
    assert!(exists_monotone_forest(&s, &SearchOptions::default()).is_found());
}

/// Every parent map over neighbours, filtered by validity.
fn brute_force(s: &WeightedSubdivision) -> HashSet<Vec<usize>> {
    let nb = s.corner_count();
    let choices: Vec<Vec<usize>> = s.interior_nodes().map(|v| s.neighbors(v).to_vec()).collect();
    let mut out = HashSet::new();
    let total: usize = choices.iter().map(Vec::len).product();
    for mut code in 0..total {
        let parent: Vec<usize> = choices
            .iter()
            .map(|c| {
                let p = c[code % c.len()];
                code /= c.len();
                p
            })
            .collect();
        let f = CutForest::new(nb, parent.clone());
        if validate_forest(s, &f).valid {
            out.insert(parent);
        }
    }
    out
}

#[test]
fn enumeration_matches_brute_force() {
    let cycle = graph(&[(1, "-1", "0", "1"), (2, "1", "0", "1")], &[("b0", "1"), ("1", "2"), ("2", "b1"), ("b1", "b0")]);
    assert_eq!(count_forests(&cycle).unwrap(), 3);
    for s in [cycle, load("strip2"), load("hook2"), load("square1")] {
        let listed: Vec<Vec<usize>> = enumerate_forests(&s).unwrap().map(|f| f.parents().to_vec()).collect();
        let unique: HashSet<Vec<usize>> = listed.iter().cloned().collect();
        assert_eq!(unique.len(), listed.len());
        assert_eq!(unique, brute_force(&s));
    }
}

#[test]
fn large_graphs_refuse_enumeration() {
    let s = load("triangle84");
    assert!(matches!(enumerate_forests(&s), Err(ForestError::TooLarge { interior: 84, limit: 14 })));
}

#[test]
fn small_fixtures_search_exhaustively() {
    for name in ["strip2", "hook2"] {
        let s = load(name);
        let out = exists_monotone_forest(&s, &SearchOptions::default());
        let any = enumerate_forests(&s).unwrap().any(|f| is_monotone(&s, &f).monotone);
        assert!(out.report().exhaustive);
        assert_eq!(out.is_found(), any, "{name}");
        assert_eq!(out.report().samples, count_forests(&s).unwrap());
    }
}

#[test]
fn sampled_forests_of_the_certified_graph_are_never_monotone() {
    let s = load("triangle84");
    let opts = SearchOptions { samples: 3000, seed: 11, ..SearchOptions::default() };
    let out = exists_monotone_forest(&s, &opts);
    assert!(matches!(out, SearchOutcome::Inconclusive(_)));
    let r = out.report();
    assert_eq!(r.monotone_found, 0);
    assert!(r.min_violations >= 1);
    assert_eq!(r.margin_histogram.iter().map(|b| b.count).sum::<usize>(), 3000);
    for f in sample_forests(&s, 300, 5) {
        assert!(validate_forest(&s, &f).valid);
        let rep = is_monotone(&s, &f);
        assert!(!rep.monotone);
        assert_eq!(rep.violations()[0].lambda_sq, rep.worst.unwrap().lambda_sq);
    }
}

#[test]
fn sampling_is_deterministic() {
    let s = load("triangle84");
    assert_eq!(sample_forests(&s, 1500, 3), sample_forests(&s, 1500, 3));
    assert_ne!(sample_forests(&s, 10, 3), sample_forests(&s, 10, 4));
    let a = exists_monotone_forest(&s, &SearchOptions { samples: 1200, seed: 9, ..SearchOptions::default() });
    let b = exists_monotone_forest(&s, &SearchOptions { samples: 1200, seed: 9, ..SearchOptions::default() });
    assert_eq!(serde_json::to_string(a.report()).unwrap(), serde_json::to_string(b.report()).unwrap());
}

/// A rational similarity: rotation from a Pythagorean triple, scale and translation.
#[derive(Clone, Debug)]
struct Similarity {
    cos: Rational,
    sin: Rational,
    scale: Rational,
    shift: PointR2,
}

impl Similarity {
    fn apply(&self, p: &PointR2) -> PointR2 {
        let x = &self.cos * &p.x - &self.sin * &p.y;
        let y = &self.sin * &p.x + &self.cos * &p.y;
        &PointR2::new(x * &self.scale, y * &self.scale) + &self.shift
    }
}

fn similarity() -> impl Strategy<Value = Similarity> {
    (1i64..6, 1i64..6, prop::bool::ANY, 1i64..9, 1i64..5, -50i64..50, -50i64..50).prop_map(|(m, n, flip, k, d, tx, ty)| {
        let (a, b, c) = (m * m - n * n, 2 * m * n, m * m + n * n);
        let (cos, sin) = if flip { (rat(b, c), rat(a, c)) } else { (rat(a, c), rat(b, c)) };
        Similarity { cos, sin, scale: rat(k, d), shift: PointR2::new(rat(tx, 3), rat(ty, 7)) }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn monotonicity_is_similarity_invariant(seed in any::<u64>(), t in similarity(), name in prop::sample::select(vec!["hook2", "strip2", "triangle84"])) {
        let s = load(name);
        let moved = s.map_points(|p| t.apply(p));
        let f = sample_forest(&s, &mut ChaCha8Rng::seed_from_u64(seed));
        let (r0, r1) = (is_monotone(&s, &f), is_monotone(&moved, &f));
        prop_assert_eq!(r0.monotone, r1.monotone);
        let k2 = &t.scale * &t.scale;
        for (a, b) in r0.checks.iter().zip(&r1.checks) {
            prop_assert_eq!(&a.product * &k2, b.product.clone());
            prop_assert_eq!(t.apply(&a.center), b.center.clone());
        }
        for v in s.interior_nodes() {
            let (c0, a0) = center_of_rotation(&s, &f, v).unwrap();
            let (c1, a1) = center_of_rotation(&moved, &f, v).unwrap();
            prop_assert_eq!(t.apply(&c0), c1);
            prop_assert_eq!(a0, a1);
        }
    }

    #[test]
    fn descendants_nest_along_ancestral_paths(seed in any::<u64>(), name in prop::sample::select(vec!["hook2", "strip2", "triangle84"])) {
        let s = load(name);
        let f = sample_forest(&s, &mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert!(validate_forest(&s, &f).valid);
        prop_assert_eq!(f.tree_sizes().iter().sum::<usize>(), s.node_count() - s.corner_count());
        for v in s.interior_nodes() {
            let path = f.ancestral_path(v).unwrap();
            prop_assert!(s.is_corner_node(*path.last().unwrap()));
            let mut inner = f.descendants(v).unwrap();
            prop_assert!(inner.contains(&v));
            for &x in &path[1..] {
                let outer: HashSet<usize> = f.descendants(x).unwrap().into_iter().collect();
                prop_assert!(inner.iter().all(|d| outer.contains(d)));
                inner = outer.into_iter().collect();
            }
        }
    }
}
