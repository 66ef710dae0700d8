use std::collections::HashSet;

use serde::Serialize;

use super::{barycentric, Surface, SurfaceError, SurfacePoint};
use crate::geom::{dist_sq_point_segment, orient2d_f64, to_f64, PointF2, PointF3, PointR2, Rational};

const MAX_PIVOTS: usize = 200;

/// A locally shortest path across the cap.
#[derive(Clone, Debug, Serialize)]
pub struct GeodesicPath {
    /// Start, one point per crossed edge, end.
    pub points: Vec<SurfacePoint>,
    pub positions: Vec<PointF3>,
    /// Mesh edges crossed, as node pairs.
    pub crossed_edges: Vec<(usize, usize)>,
    /// Triangles traversed.
    pub strip: Vec<usize>,
    pub length: f64,
    /// Strip pivots taken before the chord fit.
    pub pivots: usize,
}

impl GeodesicPath {
    pub fn projected(&self) -> Vec<PointF2> {
        self.positions.iter().map(|p| PointF2::new(p.x, p.y)).collect()
    }

    pub fn reversed(&self) -> GeodesicPath {
        let mut p = self.clone();
        p.points.reverse();
        p.positions.reverse();
        p.crossed_edges.reverse();
        p.strip.reverse();
        p
    }

    /// The point at arclength `s` from the start, clamped to the path.
    pub fn point_at(&self, s: f64) -> PointF3 {
        let mut left = s.max(0.0);
        for w in self.positions.windows(2) {
            let d = (w[1] - w[0]).norm();
            if left <= d {
                return if d == 0.0 { w[0] } else { w[0] + (w[1] - w[0]) * (left / d) };
            }
            left -= d;
        }
        *self.positions.last().expect("nonempty")
    }

    /// The surface point at arclength `s`, with the triangle it lies in.
    pub fn surface_point_at(&self, surface: &Surface, s: f64) -> SurfacePoint {
        let mut left = s.max(0.0);
        for (i, w) in self.positions.windows(2).enumerate() {
            let d = (w[1] - w[0]).norm();
            if left <= d || i + 2 == self.positions.len() {
                let t = self.strip[i.min(self.strip.len() - 1)];
                let p = if d == 0.0 { w[0] } else { w[0] + (w[1] - w[0]) * (left.min(d) / d) };
                let q = PointF2::new(p.x, p.y);
                let mut bary = barycentric(&surface.projected(t), &q);
                for b in &mut bary {
                    *b = b.max(0.0);
                }
                let sum: f64 = bary.iter().sum();
                return SurfacePoint { triangle: t, bary: bary.map(|b| b / sum) };
            }
            left -= d;
        }
        *self.points.last().expect("nonempty")
    }

    /// Largest distance of a path point from the developed chord, relative to length.
    /// Zero up to rounding for a geodesic.
    pub fn straightness(&self, surface: &Surface) -> Result<f64, SurfaceError> {
        if self.strip.len() < 2 {
            return Ok(0.0);
        }
        let iso = surface.develop_strip(&self.strip)?;
        let last = self.strip.len() - 1;
        let dev = |i: usize, p: &PointF3| iso[i].apply(&surface.local(self.strip[i], p));
        let a = dev(0, &self.positions[0]);
        let b = dev(last, &self.positions[self.positions.len() - 1]);
        let d = b - a;
        let mut worst: f64 = 0.0;
        for (i, p) in self.positions[1..self.positions.len() - 1].iter().enumerate() {
            let q = dev(i, p);
            worst = worst.max((d.perp(&(q - a)) / d.norm()).abs());
        }
        Ok(worst / self.length.max(f64::MIN_POSITIVE))
    }
}

/// The open `δ`-neighbourhood of a planar segment.
#[derive(Clone, Debug)]
pub struct Corridor {
    pub a: PointR2,
    pub b: PointR2,
    pub delta_sq: Rational,
}

impl Corridor {
    pub fn distance_sq(&self, p: &PointF2) -> Rational {
        dist_sq_point_segment(&PointR2::from_f64(p), &self.a, &self.b)
    }

    /// Largest distance from the segment over 64 arclength samples of the projected
    /// path and all its crossing points, and whether every one lies inside.
    pub fn check(&self, path: &GeodesicPath) -> (f64, bool) {
        let mut pts = path.projected();
        for k in 0..64 {
            let p = path.point_at(path.length * k as f64 / 63.0);
            pts.push(PointF2::new(p.x, p.y));
        }
        let mut worst = Rational::from_integer(0.into());
        for p in &pts {
            let d = self.distance_sq(p);
            if d > worst {
                worst = d;
            }
        }
        (to_f64(&worst).sqrt(), worst < self.delta_sq)
    }
}

struct End {
    pos: PointF3,
    proj: PointF2,
    vertex: Option<usize>,
    home: usize,
}

impl Surface {
    fn end(&self, p: &SurfacePoint) -> End {
        let pos = self.position(p);
        End { pos, proj: PointF2::new(pos.x, pos.y), vertex: self.vertex_at(p), home: p.triangle }
    }

    fn holds(&self, t: usize, e: &End) -> bool {
        match e.vertex {
            Some(v) => self.mesh.triangles[t].contains(&v),
            None => barycentric(&self.projected(t), &e.proj).iter().all(|&b| b >= -1e-12),
        }
    }

    fn candidates(&self, e: &End) -> Vec<usize> {
        match e.vertex {
            Some(v) => self.fan(v).to_vec(),
            None => {
                let mut c = vec![e.home];
                c.extend((0..3).filter_map(|k| self.neighbor(e.home, k)).filter(|&t| self.holds(t, e)));
                c
            }
        }
    }

    /// Local index of the edge the directed line `s -> t` leaves triangle `tri` through.
    fn exit_edge(&self, tri: usize, s: &PointF2, t: &PointF2) -> Option<usize> {
        let nodes = self.mesh.triangles[tri];
        (0..3).find(|&k| {
            let u = self.mesh.projection(nodes[k]);
            let v = self.mesh.projection(nodes[(k + 1) % 3]);
            orient2d_f64(s, t, &u) < 0 && orient2d_f64(s, t, &v) > 0
        })
    }

    /// Triangles stabbed by the projected segment between the endpoints.
    fn initial_strip(&self, s: &End, t: &End) -> Result<Vec<usize>, SurfaceError> {
        let cs = self.candidates(s);
        if let Some(&c) = cs.iter().find(|&&c| self.holds(c, t)) {
            return Ok(vec![c]);
        }
        let start = cs
            .iter()
            .copied()
            .find(|&c| self.exit_edge(c, &s.proj, &t.proj).is_some())
            .ok_or_else(|| SurfaceError::Outside("no triangle leaves the start towards the end".into()))?;
        let mut strip = vec![start];
        let mut cur = start;
        for _ in 0..=self.triangle_count() {
            if self.holds(cur, t) {
                return Ok(strip);
            }
            let k = self
                .exit_edge(cur, &s.proj, &t.proj)
                .ok_or_else(|| SurfaceError::Blocked(self.mesh.triangles[cur][0]))?;
            cur = self.neighbor(cur, k).ok_or_else(|| SurfaceError::Outside("segment leaves the polygon".into()))?;
            strip.push(cur);
        }
        Err(SurfaceError::NoConvergence(0))
    }

    fn trim(&self, strip: &mut Vec<usize>, s: &End, t: &End) {
        if let Some(j) = strip.iter().rposition(|&x| self.holds(x, s)) {
            strip.drain(..j);
        }
        if let Some(j) = strip.iter().position(|&x| self.holds(x, t)) {
            strip.truncate(j + 1);
        }
    }

    /// Swaps the run of strip triangles around `w` containing crossing `k` for the
    /// triangles on the other side of `w`.
    fn pivot(&self, strip: &[usize], w: usize, k: usize) -> Result<Vec<usize>, SurfaceError> {
        if !self.fan_is_closed(w) {
            return Err(SurfaceError::Blocked(w));
        }
        let has = |i: usize| self.mesh.triangles[strip[i]].contains(&w);
        let mut a = k;
        while a > 0 && has(a - 1) {
            a -= 1;
        }
        let mut b = k + 1;
        while b + 1 < strip.len() && has(b + 1) {
            b += 1;
        }
        let fan = self.fan(w);
        let n = fan.len();
        let pos = |t: usize| fan.iter().position(|&x| x == t);
        let (Some(pa), Some(pn)) = (pos(strip[a]), pos(strip[a + 1])) else {
            return Err(SurfaceError::Blocked(w));
        };
        let step = if (pa + 1) % n == pn {
            n - 1
        } else if (pn + 1) % n == pa {
            1
        } else {
            return Err(SurfaceError::Blocked(w));
        };
        if b - a + 1 >= n {
            return Err(SurfaceError::Blocked(w));
        }
        let mut out = strip[..a].to_vec();
        let mut j = pa;
        out.push(fan[j]);
        while fan[j] != strip[b] {
            j = (j + step) % n;
            out.push(fan[j]);
        }
        out.extend_from_slice(&strip[b + 1..]);
        Ok(out)
    }

    /// Shortest path between two surface points by strip straightening, checked
    /// against `corridor` when given.
    pub fn geodesic_between(
        &self,
        u: &SurfacePoint,
        v: &SurfacePoint,
        corridor: Option<&Corridor>,
    ) -> Result<GeodesicPath, SurfaceError> {
        let (s, t) = (self.end(u), self.end(v));
        let strip = self.initial_strip(&s, &t)?;
        let path = self.straighten(&s, &t, strip)?;
        if let Some(c) = corridor {
            let (d, inside) = c.check(&path);
            if !inside {
                return Err(SurfaceError::Corridor {
                    edge: format!("{}-{}", c.a, c.b),
                    distance: d,
                    delta: to_f64(&c.delta_sq).sqrt(),
                });
            }
        }
        Ok(path)
    }

    /// Straightens a caller-supplied initial strip.
    pub fn geodesic_from_strip(
        &self,
        u: &SurfacePoint,
        v: &SurfacePoint,
        strip: Vec<usize>,
    ) -> Result<GeodesicPath, SurfaceError> {
        let (s, t) = (self.end(u), self.end(v));
        self.straighten(&s, &t, strip)
    }

    fn straighten(&self, s: &End, t: &End, mut strip: Vec<usize>) -> Result<GeodesicPath, SurfaceError> {
        let mut seen = HashSet::new();
        for pivots in 0..=MAX_PIVOTS {
            self.trim(&mut strip, s, t);
            if strip.is_empty() || !self.holds(strip[0], s) || !self.holds(*strip.last().expect("nonempty"), t) {
                return Err(SurfaceError::Outside("strip does not join the endpoints".into()));
            }
            if !seen.insert(strip.clone()) {
                return Err(SurfaceError::NoConvergence(pivots));
            }
            if strip.len() == 1 {
                return Ok(self.single(s, t, strip[0], pivots));
            }
            let iso = self.develop_strip(&strip)?;
            let last = strip.len() - 1;
            let a = iso[0].apply(&self.local(strip[0], &s.pos));
            let b = iso[last].apply(&self.local(strip[last], &t.pos));
            let d = b - a;
            let len = d.norm();
            let mut worst: Option<(f64, usize, usize)> = None;
            let mut crossings = Vec::with_capacity(last);
            let mut prev_param = 0.0;
            let mut ordered = true;
            for k in 0..last {
                let (ru, lv) = self.shared_edge(strip[k], strip[k + 1]).ok_or(SurfaceError::NotAdjacent(strip[k], strip[k + 1]))?;
                let r = self.developed_vertex(&iso[k], strip[k], ru);
                let l = self.developed_vertex(&iso[k], strip[k], lv);
                let (or, ol) = (orient2d_f64(&a, &b, &r), orient2d_f64(&a, &b, &l));
                let dr = d.perp(&(r - a)) / len;
                let dl = -d.perp(&(l - a)) / len;
                if or >= 0 && worst.is_none_or(|(x, ..)| dr > x) {
                    worst = Some((dr, ru, k));
                }
                if ol <= 0 && worst.is_none_or(|(x, ..)| dl > x) {
                    worst = Some((dl, lv, k));
                }
                let e = l - r;
                let mu = (a - r).perp(&d) / e.perp(&d);
                let param = (r + e * mu - a).dot(&d) / (len * len);
                if param < prev_param {
                    ordered = false;
                }
                prev_param = param;
                crossings.push((ru, lv, mu, k));
            }
            match worst {
                Some((_, w, k)) => strip = self.pivot(&strip, w, k)?,
                None if !ordered => return Err(SurfaceError::NoConvergence(pivots)),
                None => {
                    let mut points = vec![self.point_in(strip[0], &s.pos, s.vertex)];
                    let mut positions = vec![s.pos];
                    let mut crossed_edges = Vec::new();
                    for (ru, lv, mu, k) in crossings {
                        let p = self.mesh.vertices[ru] * (1.0 - mu) + self.mesh.vertices[lv] * mu;
                        let tri = self.mesh.triangles[strip[k]];
                        let mut bary = [0.0; 3];
                        for (i, &x) in tri.iter().enumerate() {
                            if x == ru {
                                bary[i] = 1.0 - mu;
                            } else if x == lv {
                                bary[i] = mu;
                            }
                        }
                        points.push(SurfacePoint { triangle: strip[k], bary });
                        positions.push(p);
                        crossed_edges.push((ru, lv));
                    }
                    points.push(self.point_in(strip[last], &t.pos, t.vertex));
                    positions.push(t.pos);
                    return Ok(GeodesicPath { points, positions, crossed_edges, strip, length: len, pivots });
                }
            }
        }
        Err(SurfaceError::NoConvergence(MAX_PIVOTS))
    }

    fn single(&self, s: &End, t: &End, tri: usize, pivots: usize) -> GeodesicPath {
        GeodesicPath {
            points: vec![self.point_in(tri, &s.pos, s.vertex), self.point_in(tri, &t.pos, t.vertex)],
            positions: vec![s.pos, t.pos],
            crossed_edges: Vec::new(),
            strip: vec![tri],
            length: (t.pos - s.pos).norm(),
            pivots,
        }
    }

    fn point_in(&self, tri: usize, p: &PointF3, vertex: Option<usize>) -> SurfacePoint {
        let nodes = self.mesh.triangles[tri];
        if let Some(k) = vertex.and_then(|v| nodes.iter().position(|&x| x == v)) {
            let mut bary = [0.0; 3];
            bary[k] = 1.0;
            return SurfacePoint { triangle: tri, bary };
        }
        let mut bary = barycentric(&self.projected(tri), &PointF2::new(p.x, p.y));
        for b in &mut bary {
            *b = b.max(0.0);
        }
        let sum: f64 = bary.iter().sum();
        SurfacePoint { triangle: tri, bary: bary.map(|b| b / sum) }
    }
}
