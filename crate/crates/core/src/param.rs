//! Cutting segments into disks and solving for the column function g.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::geom::{gradient_basis, tri_area, tri_normal, Vec3};
use crate::mesh::{CurvatureField, TriangleMesh};
use crate::patch::{Origin, Patch};
use crate::segmentation::Segment;
use crate::sparse::{SolveError, SpdSolver, Triplets};

/// Weight of the penalty on the along-gradient component of grad g.
pub const DRIFT_WEIGHT: f64 = 1e-3;
/// Scale of the curvature response of the column target.
pub const ALPHA: f64 = 10.0;

#[derive(Debug, thiserror::Error)]
pub enum ParamError {
    #[error("segment {0}: no path between cut endpoints")]
    NoPath(usize),
    #[error("segment {0}: cut does not open the segment into a disk")]
    NotDisk(usize),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

#[derive(Debug, Clone)]
pub struct CutSegment {
    pub segment: usize,
    /// The opened patch: a topological disk.
    pub patch: Patch,
    /// Cut path from start to end, as vertices of the uncut side.
    pub path: Vec<usize>,
    /// Vertices with g = 0: the duplicated side of the cut plus interior tips.
    pub boundary: Vec<usize>,
    /// `(original, copy)` for every duplicated path vertex.
    pub copies: Vec<(usize, usize)>,
}

#[derive(PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then(other.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Shortest edge path from any source to any target whose inner vertices avoid the boundary.
pub fn shortest_path(patch: &Patch, sources: &[usize], targets: &[usize]) -> Option<Vec<usize>> {
    let n = patch.n_vertices();
    let mut is_target = vec![false; n];
    for &t in targets {
        is_target[t] = true;
    }
    let mut dist = vec![f64::INFINITY; n];
    let mut prev = vec![usize::MAX; n];
    let mut heap = BinaryHeap::new();
    for &s in sources {
        dist[s] = 0.0;
        heap.push(Entry(0.0, s));
    }
    let is_source = |v: usize| sources.contains(&v);
    while let Some(Entry(d, u)) = heap.pop() {
        if d > dist[u] {
            continue;
        }
        if is_target[u] {
            let mut path = vec![u];
            let mut x = u;
            while prev[x] != usize::MAX {
                x = prev[x];
                path.push(x);
            }
            path.reverse();
            return Some(path);
        }
        if patch.topology.is_boundary_vertex(u) && !is_source(u) {
            continue;
        }
        for v in patch.topology.fan(u).neighbors() {
            let nd = d + (patch.positions[u] - patch.positions[v]).norm();
            if nd < dist[v] {
                dist[v] = nd;
                prev[v] = u;
                heap.push(Entry(nd, v));
            }
        }
    }
    None
}

/// One pass removing path vertices whose neighbours on the path share an edge.
pub fn straighten(patch: &Patch, path: &[usize]) -> Vec<usize> {
    if path.len() < 3 {
        return path.to_vec();
    }
    let mut out = vec![path[0]];
    let mut i = 1;
    while i < path.len() - 1 {
        let a = *out.last().unwrap();
        let c = path[i + 1];
        let both_boundary =
            patch.topology.is_boundary_vertex(a) && patch.topology.is_boundary_vertex(c);
        let adjacent = patch.topology.fan(a).neighbors().contains(&c);
        if adjacent && !both_boundary {
            out.push(c);
            i += 2;
        } else {
            out.push(path[i]);
            i += 1;
        }
    }
    if *out.last().unwrap() != path[path.len() - 1] {
        out.push(path[path.len() - 1]);
    }
    out
}

/// Faces on the left of the path at path position `i`.
fn left_faces(patch: &Patch, path: &[usize], i: usize) -> Vec<usize> {
    let v = path[i];
    let fan = patch.topology.fan(v);
    let pos_of = |u: usize| fan.corners.iter().position(|c| c.next == u);
    let n = fan.corners.len();
    let prev = if i > 0 { Some(path[i - 1]) } else { None };
    let next = path.get(i + 1).copied();
    match (prev, next) {
        (Some(p), Some(q)) => {
            let start = pos_of(q).expect("path edge in fan");
            let stop = pos_of(p);
            let mut out = Vec::new();
            let mut k = start;
            loop {
                if Some(k) == stop {
                    break;
                }
                out.push(fan.corners[k].face);
                k = (k + 1) % n;
                if k == start {
                    break;
                }
            }
            out
        }
        (None, Some(q)) => match pos_of(q) {
            Some(start) => fan.corners[start..].iter().map(|c| c.face).collect(),
            None => Vec::new(),
        },
        (Some(p), None) => {
            let stop = pos_of(p).unwrap_or(n);
            fan.corners[..stop].iter().map(|c| c.face).collect()
        }
        (None, None) => Vec::new(),
    }
}

/// Cuts a segment open along a shortest path between its low and high ends.
pub fn cut_segment(segment: &Segment, seed: usize) -> Result<CutSegment, ParamError> {
    let patch = &segment.patch;
    let topo = &patch.topology;
    let n = patch.n_vertices();
    let sources: Vec<usize> = if segment.contains_seed {
        (0..n)
            .filter(|&v| matches!(patch.origin[v], Origin::Vertex(s) if s == seed))
            .collect()
    } else {
        (0..n)
            .filter(|&v| topo.is_boundary_vertex(v) && patch.f[v] == segment.f_lo)
            .collect()
    };
    let targets: Vec<usize> = if segment.has_upper_boundary() {
        (0..n)
            .filter(|&v| topo.is_boundary_vertex(v) && patch.f[v] == segment.f_hi)
            .collect()
    } else {
        vec![segment.max_vertex()]
    };
    let raw = shortest_path(patch, &sources, &targets).ok_or(ParamError::NoPath(segment.id))?;
    let path = straighten(patch, &raw);

    let mut faces = patch.faces.clone();
    let mut positions = patch.positions.clone();
    let mut f = patch.f.clone();
    let mut origin = patch.origin.clone();
    let mut copies = Vec::new();
    let mut boundary = Vec::new();
    for i in 0..path.len() {
        let v = path[i];
        let tip = (i == 0 || i == path.len() - 1) && !topo.is_boundary_vertex(v);
        if tip {
            boundary.push(v);
            continue;
        }
        let copy = positions.len();
        positions.push(positions[v]);
        f.push(f[v]);
        origin.push(origin[v]);
        for face in left_faces(patch, &path, i) {
            for x in faces[face].iter_mut() {
                if *x == v {
                    *x = copy;
                }
            }
        }
        copies.push((v, copy));
        boundary.push(copy);
    }
    let opened = Patch::assemble(positions, faces, f, origin, patch.face_origin.clone());
    if opened.euler_characteristic() != 1 || opened.boundary_loops().len() != 1 {
        return Err(ParamError::NotDisk(segment.id));
    }
    Ok(CutSegment {
        segment: segment.id,
        patch: opened,
        path,
        boundary,
        copies,
    })
}

/// Column speed for normal curvature `k` along the isoline: `tanh(-k / alpha) / 2 + 1`.
pub fn column_speed(k: f64) -> f64 {
    (-k / ALPHA).tanh() / 2.0 + 1.0
}

/// Per-face target of `<J grad f, grad g>`. Faces whose source face has negative mean
/// and negative Gaussian curvature get `column_speed` of the isoline-direction normal
/// curvature measured against the inward normal; all others get 1.
pub fn curvature_target(mesh: &TriangleMesh, patch: &Patch, curv: &CurvatureField) -> Vec<f64> {
    let mut out = vec![1.0; patch.faces.len()];
    for (pf, tri) in patch.faces.iter().enumerate() {
        let src = mesh.faces()[patch.face_origin[pf]];
        let mean = src.iter().map(|&v| curv.mean[v]).sum::<f64>() / 3.0;
        let gauss = src.iter().map(|&v| curv.gaussian[v]).sum::<f64>() / 3.0;
        if mean >= 0.0 || gauss >= 0.0 {
            continue;
        }
        let p = [
            &patch.positions[tri[0]],
            &patch.positions[tri[1]],
            &patch.positions[tri[2]],
        ];
        let Some(basis) = gradient_basis(p) else {
            continue;
        };
        let grad =
            basis[0] * patch.f[tri[0]] + basis[1] * patch.f[tri[1]] + basis[2] * patch.f[tri[2]];
        if grad.norm() <= f64::MIN_POSITIVE {
            continue;
        }
        let dir = tri_normal(p[0], p[1], p[2]).cross(&grad);
        let k_out = src
            .iter()
            .map(|&v| curv.normal_curvature(v, &dir))
            .sum::<f64>()
            / 3.0;
        out[pf] = column_speed(-k_out);
    }
    out
}

/// Least-squares g with `<J grad f, grad g> = target` per face and `g = 0` on the cut boundary.
pub fn solve_column_function(cut: &CutSegment, target: &[f64]) -> Result<Vec<f64>, ParamError> {
    let patch = &cut.patch;
    let n = patch.n_vertices();
    let mut fixed = vec![false; n];
    for &v in &cut.boundary {
        fixed[v] = true;
    }
    let mut index = vec![None; n];
    let mut k = 0;
    for v in 0..n {
        if !fixed[v] {
            index[v] = Some(k);
            k += 1;
        }
    }
    let mut a = Triplets::new(k, k);
    let mut rhs = vec![0.0; k];
    for (fi, tri) in patch.faces.iter().enumerate() {
        let p = [
            &patch.positions[tri[0]],
            &patch.positions[tri[1]],
            &patch.positions[tri[2]],
        ];
        let Some(basis) = gradient_basis(p) else {
            continue;
        };
        let area = tri_area(p[0], p[1], p[2]);
        let grad: Vec3 =
            basis[0] * patch.f[tri[0]] + basis[1] * patch.f[tri[1]] + basis[2] * patch.f[tri[2]];
        let len = grad.norm();
        let mut terms: Vec<([f64; 3], f64, f64)> = Vec::with_capacity(3);
        if len > 1e-12 {
            let u = grad / len;
            let ju = tri_normal(p[0], p[1], p[2]).cross(&u);
            terms.push((
                [ju.dot(&basis[0]), ju.dot(&basis[1]), ju.dot(&basis[2])],
                target[fi],
                1.0,
            ));
            terms.push((
                [u.dot(&basis[0]), u.dot(&basis[1]), u.dot(&basis[2])],
                0.0,
                DRIFT_WEIGHT,
            ));
        } else {
            // No isoline direction: isotropic penalty only.
            let x = (p[1] - p[0]).normalize();
            let y = tri_normal(p[0], p[1], p[2]).cross(&x);
            for d in [x, y] {
                terms.push((
                    [d.dot(&basis[0]), d.dot(&basis[1]), d.dot(&basis[2])],
                    0.0,
                    DRIFT_WEIGHT,
                ));
            }
        }
        for (c, t, weight) in terms {
            let w = weight * area;
            for i in 0..3 {
                let Some(r) = index[tri[i]] else { continue };
                rhs[r] += w * t * c[i];
                for j in 0..3 {
                    if let Some(col) = index[tri[j]] {
                        a.push(r, col, w * c[i] * c[j]);
                    }
                }
            }
        }
    }
    let x = SpdSolver::factor(&a)?.solve(&rhs)?;
    Ok((0..n).map(|v| index[v].map_or(0.0, |r| x[r])).collect())
}
