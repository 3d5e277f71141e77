//! Level-set extraction of piecewise-linear vertex functions.
//!
//! Vertices with value equal to the level count as above it. Every polyline is
//! oriented with higher values on its right (seen from the face normals).

use std::collections::HashMap;

use crate::geom::Vec3;
use crate::topology::Topology;

/// A point on the mesh edge `(a, b)` with `a < b`, at `(1 - t) * p[a] + t * p[b]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgePoint {
    pub a: usize,
    pub b: usize,
    pub t: f64,
    pub position: Vec3,
    /// A face containing the point.
    pub face: usize,
}

impl EdgePoint {
    /// Linear interpolation of a vertex attribute at this point.
    pub fn lerp(&self, values: &[f64]) -> f64 {
        (1.0 - self.t) * values[self.a] + self.t * values[self.b]
    }
}

#[derive(Debug, Clone)]
pub struct Isoline {
    pub points: Vec<EdgePoint>,
    pub closed: bool,
}

impl Isoline {
    pub fn length(&self) -> f64 {
        let mut len: f64 = self
            .points
            .windows(2)
            .map(|w| (w[1].position - w[0].position).norm())
            .sum();
        if self.closed && self.points.len() > 1 {
            len += (self.points[0].position - self.points[self.points.len() - 1].position).norm();
        }
        len
    }

    /// Positions, with the first point repeated at the end for closed loops.
    pub fn polyline(&self) -> Vec<Vec3> {
        let mut out: Vec<Vec3> = self.points.iter().map(|p| p.position).collect();
        if self.closed && !out.is_empty() {
            out.push(out[0]);
        }
        out
    }
}

fn crossing(
    positions: &[Vec3],
    values: &[f64],
    level: f64,
    u: usize,
    v: usize,
    face: usize,
) -> EdgePoint {
    let (a, b) = (u.min(v), u.max(v));
    let t = ((level - values[a]) / (values[b] - values[a])).clamp(0.0, 1.0);
    EdgePoint {
        a,
        b,
        t,
        position: positions[a] * (1.0 - t) + positions[b] * t,
        face,
    }
}

/// All components of `{values == level}`. Open polylines start and end on boundary edges.
pub fn extract_isolines(
    positions: &[Vec3],
    faces: &[[usize; 3]],
    topology: &Topology,
    values: &[f64],
    level: f64,
) -> Vec<Isoline> {
    // Per face: half-edge entered through and half-edge left through.
    let mut seg: HashMap<usize, (usize, usize)> = HashMap::new();
    let mut order = Vec::new();
    for (f, tri) in faces.iter().enumerate() {
        let high = [
            values[tri[0]] >= level,
            values[tri[1]] >= level,
            values[tri[2]] >= level,
        ];
        let count = high.iter().filter(|&&h| h).count();
        if count == 0 || count == 3 {
            continue;
        }
        // The odd vertex out: the single high one, or the single low one.
        let k = (0..3).find(|&k| high[k] == (count == 1)).unwrap();
        let into = 3 * f + (k + 2) % 3; // prev -> v
        let out = 3 * f + k; // v -> next
        let pair = if count == 1 { (into, out) } else { (out, into) };
        seg.insert(f, pair);
        order.push(f);
    }

    let point_of = |h: usize| {
        let (f, k) = (h / 3, h % 3);
        crossing(
            positions,
            values,
            level,
            faces[f][k],
            faces[f][(k + 1) % 3],
            f,
        )
    };

    let mut used: HashMap<usize, bool> = order.iter().map(|&f| (f, false)).collect();
    let mut lines = Vec::new();
    let trace = |start: usize, used: &mut HashMap<usize, bool>| -> Isoline {
        let mut points = vec![point_of(seg[&start].0)];
        let mut f = start;
        let closed;
        loop {
            used.insert(f, true);
            let (_, out) = seg[&f];
            match topology.twin(out) {
                Some(h) if seg.contains_key(&(h / 3)) => {
                    let g = h / 3;
                    if g == start {
                        closed = true;
                        break;
                    }
                    if used[&g] {
                        closed = false;
                        points.push(point_of(out));
                        break;
                    }
                    points.push(point_of(out));
                    f = g;
                }
                _ => {
                    points.push(point_of(out));
                    closed = false;
                    break;
                }
            }
        }
        Isoline { points, closed }
    };

    for &f in &order {
        let (into, _) = seg[&f];
        if !used[&f] && topology.twin(into).is_none() {
            let line = trace(f, &mut used);
            lines.push(line);
        }
    }
    for &f in &order {
        if !used[&f] {
            let line = trace(f, &mut used);
            lines.push(line);
        }
    }
    lines
}
