use std::collections::HashSet;

use super::{VertexId, WeightedSubdivision};

fn canonical_cycle(f: &[VertexId]) -> Vec<VertexId> {
    let k = f.iter().enumerate().min_by_key(|(_, v)| **v).map(|(i, _)| i).unwrap_or(0);
    f[k..].iter().chain(f[..k].iter()).copied().collect()
}

/// Mirror of an interior id: `-i` when present, otherwise `i` itself for a vertex at
/// the origin.
fn mirror(s: &WeightedSubdivision, v: VertexId) -> VertexId {
    let m = v.negated();
    if s.node_of(m).is_ok() {
        return m;
    }
    match s.point(v) {
        Ok(p) if p.is_origin() => v,
        _ => m,
    }
}

/// Every asymmetry found under the map `p_i -> -p_i`, `i -> -i`, restricted to
/// interior vertices, edges between them and faces made of them.
pub fn central_symmetry_report(s: &WeightedSubdivision) -> Vec<String> {
    let mut bad = Vec::new();
    for v in &s.interior {
        let m = mirror(s, VertexId::Interior(v.id));
        match s.point(m) {
            Ok(q) if *q == -&v.point => {}
            Ok(q) => bad.push(format!("vertex {} at {} but {} at {}", v.id, v.point, m, q)),
            Err(_) => bad.push(format!("vertex {} has no mirror {}", v.id, m)),
        }
    }
    let edges: HashSet<(VertexId, VertexId)> = s
        .edges
        .iter()
        .filter(|(a, b)| !a.is_corner() && !b.is_corner())
        .map(|&(a, b)| (a.min(b), a.max(b)))
        .collect();
    for &(a, b) in &edges {
        let (na, nb) = (mirror(s, a), mirror(s, b));
        if !edges.contains(&(na.min(nb), na.max(nb))) {
            bad.push(format!("edge {a}-{b} has no mirror {na}-{nb}"));
        }
    }
    let faces: HashSet<Vec<VertexId>> = s
        .faces
        .iter()
        .filter(|f| f.iter().all(|v| !v.is_corner()))
        .map(|f| canonical_cycle(f))
        .collect();
    for f in &faces {
        let m: Vec<VertexId> = f.iter().map(|&v| mirror(s, v)).collect();
        if !faces.contains(&canonical_cycle(&m)) {
            let ids: Vec<String> = f.iter().map(ToString::to_string).collect();
            bad.push(format!("face [{}] has no mirror", ids.join(",")));
        }
    }
    bad.sort();
    bad
}

/// True iff the interior part of the subdivision is centrally symmetric about the origin.
pub fn central_symmetry_check(s: &WeightedSubdivision) -> bool {
    central_symmetry_report(s).is_empty()
}
