use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{enumerate_forests, is_monotone, CutForest, ENUMERATION_LIMIT};
use crate::geom::{to_f64, PointF2};
use crate::subdivision::WeightedSubdivision;

const CHUNK: usize = 1000;

#[derive(Clone, Debug)]
pub struct SearchOptions {
    pub samples: usize,
    pub seed: u64,
    /// Passes of greedy re-parenting applied to each sample.
    pub greedy_passes: usize,
    /// Enumerate every forest when the graph is small enough.
    pub exhaustive: bool,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions { samples: 100_000, seed: 7, greedy_passes: 2, exhaustive: true }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct MarginBin {
    /// Upper edge of the bin, open for the last one. The first bin also holds forests
    /// with no violation.
    pub below: Option<f64>,
    pub count: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct SearchReport {
    pub samples: usize,
    pub seed: u64,
    pub exhaustive: bool,
    pub monotone_found: usize,
    /// Samples that passed the floating-point screen but failed the exact test.
    pub near_misses: usize,
    pub greedy_moves: usize,
    pub min_violations: usize,
    pub mean_violations: f64,
    /// Distribution of the largest violation margin per forest, on a decade scale.
    pub margin_histogram: Vec<MarginBin>,
}

#[derive(Clone, Debug)]
pub enum SearchOutcome {
    Found { forest: CutForest, report: SearchReport },
    ExhaustedNone(SearchReport),
    Inconclusive(SearchReport),
}

impl SearchOutcome {
    pub fn report(&self) -> &SearchReport {
        match self {
            SearchOutcome::Found { report, .. } | SearchOutcome::ExhaustedNone(report) | SearchOutcome::Inconclusive(report) => report,
        }
    }

    pub fn is_found(&self) -> bool {
        matches!(self, SearchOutcome::Found { .. })
    }
}

/// A uniformly random cut forest: Wilson's algorithm with every corner as a root.
pub fn sample_forest<R: Rng>(s: &WeightedSubdivision, rng: &mut R) -> CutForest {
    let nb = s.corner_count();
    let n = s.node_count();
    let mut in_tree: Vec<bool> = (0..n).map(|v| v < nb).collect();
    let mut next = vec![usize::MAX; n];
    for start in nb..n {
        let mut u = start;
        while !in_tree[u] {
            let nb_u = s.neighbors(u);
            next[u] = nb_u[rng.random_range(0..nb_u.len())];
            u = next[u];
        }
        let mut u = start;
        while !in_tree[u] {
            in_tree[u] = true;
            u = next[u];
        }
    }
    CutForest::new(nb, next[nb..].to_vec())
}

fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

/// `count` forests from `seed`; identical for any thread count.
pub fn sample_forests(s: &WeightedSubdivision, count: usize, seed: u64) -> Vec<CutForest> {
    (0..count.div_ceil(CHUNK))
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut rng = chunk_rng(seed, c);
            let len = CHUNK.min(count - c * CHUNK);
            (0..len).map(move |_| sample_forest(s, &mut rng)).collect::<Vec<_>>()
        })
        .collect()
}

/// Floating-point screen with incremental re-parenting.
struct Screen<'a> {
    s: &'a WeightedSubdivision,
    points: Vec<PointF2>,
    parent: Vec<usize>,
    alpha: Vec<f64>,
    moment: Vec<PointF2>,
    tol: f64,
}

impl<'a> Screen<'a> {
    fn new(s: &'a WeightedSubdivision, f: &CutForest) -> Self {
        let n = s.node_count();
        let points: Vec<PointF2> = (0..n).map(|v| s.node_point(v).to_f64()).collect();
        let scale = points.iter().map(|p| p.norm()).fold(1.0, f64::max);
        let mut alpha = vec![0.0; n];
        let mut moment = vec![PointF2::zeros(); n];
        for v in s.interior_nodes() {
            alpha[v] = to_f64(s.node_weight(v).expect("interior"));
            moment[v] = points[v] * alpha[v];
        }
        let mut parent = vec![usize::MAX; n];
        for (c, p) in f.edges() {
            parent[c] = p;
        }
        for v in f.bottom_up() {
            let p = parent[v];
            alpha[p] += alpha[v];
            let m = moment[v];
            moment[p] += m;
        }
        Screen { s, points, parent, alpha, moment, tol: 1e-12 * scale * scale }
    }

    fn is_interior(&self, v: usize) -> bool {
        v >= self.s.corner_count()
    }

    /// `⟨p* − p, p − c⟩`.
    fn product(&self, v: usize) -> f64 {
        let p = self.points[v];
        let c = self.moment[v] / self.alpha[v];
        (self.points[self.parent[v]] - p).dot(&(p - c))
    }

    fn violated(&self, v: usize) -> bool {
        self.product(v) < -self.tol
    }

    fn margin(&self, v: usize) -> f64 {
        -self.product(v) / (self.points[self.parent[v]] - self.points[v]).norm()
    }

    fn ancestors(&self, mut v: usize) -> Vec<usize> {
        let mut out = Vec::new();
        while self.is_interior(v) {
            v = self.parent[v];
            out.push(v);
        }
        out
    }

    fn shift(&mut self, path: &[usize], a: f64, m: PointF2) {
        for &u in path {
            if self.is_interior(u) {
                self.alpha[u] += a;
                self.moment[u] += m;
            }
        }
    }

    fn count_violated(&self, vs: &[usize]) -> usize {
        vs.iter().filter(|&&u| self.is_interior(u) && self.violated(u)).count()
    }

    /// Re-parents `v` to `w` when that lowers the number of violated vertices.
    fn try_move(&mut self, v: usize, w: usize) -> bool {
        let new_path = {
            let mut p = vec![w];
            p.extend(self.ancestors(w));
            p
        };
        if new_path.contains(&v) {
            return false;
        }
        let old_path = self.ancestors(v);
        let mut touched: Vec<usize> = old_path.iter().chain(&new_path).copied().chain([v]).collect();
        touched.sort_unstable();
        touched.dedup();
        let before = self.count_violated(&touched);
        let (a, m) = (self.alpha[v], self.moment[v]);
        let old = self.parent[v];
        self.shift(&old_path, -a, -m);
        self.shift(&new_path, a, m);
        self.parent[v] = w;
        if self.count_violated(&touched) < before {
            return true;
        }
        self.shift(&new_path, -a, -m);
        self.shift(&old_path, a, m);
        self.parent[v] = old;
        false
    }

    fn repair(&mut self, passes: usize) -> usize {
        let mut moves = 0;
        for _ in 0..passes {
            let mut moved = false;
            for v in self.s.interior_nodes() {
                if !self.violated(v) {
                    continue;
                }
                for &w in self.s.neighbors(v) {
                    if w != self.parent[v] && self.try_move(v, w) {
                        moves += 1;
                        moved = true;
                        break;
                    }
                }
            }
            if !moved {
                break;
            }
        }
        moves
    }

    fn forest(&self) -> CutForest {
        CutForest::new(self.s.corner_count(), self.parent[self.s.corner_count()..].to_vec())
    }
}

const BINS: [f64; 12] = [1e-8, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0, f64::INFINITY];

#[derive(Default)]
struct Tally {
    found: Option<(usize, CutForest)>,
    monotone: usize,
    near_misses: usize,
    moves: usize,
    min_violations: usize,
    total_violations: usize,
    bins: [usize; BINS.len()],
}

impl Tally {
    fn merge(mut self, o: Tally) -> Tally {
        self.found = match (self.found, o.found) {
            (Some(a), Some(b)) => Some(if a.0 <= b.0 { a } else { b }),
            (a, b) => a.or(b),
        };
        self.monotone += o.monotone;
        self.near_misses += o.near_misses;
        self.moves += o.moves;
        self.min_violations = self.min_violations.min(o.min_violations);
        self.total_violations += o.total_violations;
        for (x, y) in self.bins.iter_mut().zip(o.bins) {
            *x += y;
        }
        self
    }
}

fn screen_one(s: &WeightedSubdivision, index: usize, f: &CutForest, passes: usize, t: &mut Tally) {
    let mut sc = Screen::new(s, f);
    t.moves += sc.repair(passes);
    let bad: Vec<usize> = s.interior_nodes().filter(|&v| sc.violated(v)).collect();
    t.min_violations = t.min_violations.min(bad.len());
    t.total_violations += bad.len();
    if bad.is_empty() {
        let candidate = sc.forest();
        if is_monotone(s, &candidate).monotone {
            t.monotone += 1;
            if t.found.as_ref().is_none_or(|x| index < x.0) {
                t.found = Some((index, candidate));
            }
        } else {
            t.near_misses += 1;
        }
        t.bins[0] += 1;
        return;
    }
    let worst = bad.iter().map(|&v| sc.margin(v)).fold(0.0, f64::max);
    let bin = BINS.iter().position(|&b| worst < b).unwrap_or(BINS.len() - 1);
    t.bins[bin] += 1;
}

/// Searches for a monotone cut forest: by enumeration on small graphs, otherwise by
/// seeded random sampling with greedy repair. A sampled forest is reported only after
/// the exact test confirms it.
pub fn exists_monotone_forest(s: &WeightedSubdivision, opts: &SearchOptions) -> SearchOutcome {
    let interior = s.node_count() - s.corner_count();
    let empty = || Tally { min_violations: usize::MAX, ..Tally::default() };
    let exhaustive = opts.exhaustive && interior <= ENUMERATION_LIMIT;
    let (tally, samples) = if exhaustive {
        let mut t = empty();
        let mut n = 0;
        for (i, f) in enumerate_forests(s).expect("within the limit").enumerate() {
            screen_one(s, i, &f, 0, &mut t);
            n += 1;
        }
        (t, n)
    } else {
        let t = (0..opts.samples.div_ceil(CHUNK))
            .into_par_iter()
            .map(|c| {
                let mut rng = chunk_rng(opts.seed, c);
                let mut t = empty();
                for k in 0..CHUNK.min(opts.samples - c * CHUNK) {
                    let f = sample_forest(s, &mut rng);
                    screen_one(s, c * CHUNK + k, &f, opts.greedy_passes, &mut t);
                }
                t
            })
            .reduce(empty, Tally::merge);
        (t, opts.samples)
    };
    let report = SearchReport {
        samples,
        seed: opts.seed,
        exhaustive,
        monotone_found: tally.monotone,
        near_misses: tally.near_misses,
        greedy_moves: tally.moves,
        min_violations: if samples == 0 { 0 } else { tally.min_violations },
        mean_violations: if samples == 0 { 0.0 } else { tally.total_violations as f64 / samples as f64 },
        margin_histogram: BINS.iter().zip(tally.bins).map(|(&below, count)| MarginBin { below: below.is_finite().then_some(below), count }).collect(),
    };
    match tally.found {
        Some((_, forest)) => SearchOutcome::Found { forest, report },
        None if exhaustive => SearchOutcome::ExhaustedNone(report),
        None => SearchOutcome::Inconclusive(report),
    }
}
