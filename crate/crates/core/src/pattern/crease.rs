use std::collections::HashMap;

use crate::geom::{face_gradients, tri_area, Vec3};
use crate::graph::{CrochetGraph, Modifier};
use crate::mesh::{CurvatureField, TriangleMesh};

/// Largest angle between the crease direction and the column direction.
pub const CREASE_ANGLE_DEG: f64 = 20.0;
/// Lower bound of the default curvature threshold, in area-normalized units.
pub const CREASE_FLOOR: f64 = 2.0;
/// Dominant curvature must exceed the other principal curvature by this factor.
const ANISOTROPY: f64 = 2.0;

#[derive(Debug, Clone, PartialEq)]
pub struct CreaseReport {
    pub threshold: f64,
    /// Graph vertices on a crease with the sign of the crease curvature.
    pub crease_vertices: Vec<(usize, f64)>,
    pub marked_edges: usize,
}

/// Principal curvature of largest magnitude, its direction and the other curvature.
fn dominant(curv: &CurvatureField, v: usize) -> (f64, Vec3, f64) {
    if curv.k_max[v].abs() >= curv.k_min[v].abs() {
        (curv.k_max[v], curv.dir_max[v], curv.k_min[v])
    } else {
        (curv.k_min[v], curv.dir_min[v], curv.k_max[v])
    }
}

/// Default threshold: the 90th percentile of the dominant curvature magnitude, at least 2.
pub fn crease_threshold(curv: &CurvatureField) -> f64 {
    let mut mags: Vec<f64> = (0..curv.k_max.len())
        .map(|v| dominant(curv, v).0.abs())
        .collect();
    mags.sort_by(f64::total_cmp);
    let p90 = mags
        .get((0.9 * (mags.len() - 1) as f64).round() as usize)
        .copied()
        .unwrap_or(0.0);
    p90.max(CREASE_FLOOR)
}

/// Area-weighted vertex gradients of `f`.
fn vertex_gradients(mesh: &TriangleMesh, f: &[f64]) -> Vec<Vec3> {
    let grads = face_gradients(mesh.positions(), mesh.faces(), f);
    let mut out = vec![Vec3::zeros(); mesh.n_vertices()];
    for (fi, t) in mesh.faces().iter().enumerate() {
        let p = mesh.positions();
        let a = tri_area(&p[t[0]], &p[t[1]], &p[t[2]]);
        for &v in t {
            out[v] += grads[fi] * a;
        }
    }
    out
}

/// Marks column edges at creases with BLO (convex ridge) or FLO (concave ridge).
///
/// A graph vertex takes the most curved mesh vertex within `w / 2`, or the nearest one.
/// It is a crease vertex when that curvature exceeds the threshold, dominates the other
/// principal curvature and points within 20 degrees of the gradient of `f`. Column edges
/// based at a crease vertex with a crease neighbour in its row take the modifier.
pub fn mark_creases(
    graph: &mut CrochetGraph,
    mesh: &TriangleMesh,
    curv: &CurvatureField,
    f: &[f64],
    threshold: Option<f64>,
) -> CreaseReport {
    let tau = threshold.unwrap_or_else(|| crease_threshold(curv));
    let radius = graph.stitch_width / 2.0;
    let cell = |p: &Vec3| {
        (
            (p.x / radius).floor() as i64,
            (p.y / radius).floor() as i64,
            (p.z / radius).floor() as i64,
        )
    };
    let mut grid: HashMap<(i64, i64, i64), Vec<usize>> = HashMap::new();
    for (v, p) in mesh.positions().iter().enumerate() {
        grid.entry(cell(p)).or_default().push(v);
    }
    let grads = vertex_gradients(mesh, f);
    let cos_limit = CREASE_ANGLE_DEG.to_radians().cos();

    let mut sign: Vec<Option<f64>> = vec![None; graph.vertices.len()];
    let mut crease_vertices = Vec::new();
    for (gv, vertex) in graph.vertices.iter().enumerate() {
        let x = vertex.pos();
        let c = cell(&x);
        let mut best: Option<usize> = None;
        for dx in -1..=1 {
            for dy in -1..=1 {
                for dz in -1..=1 {
                    for &v in grid
                        .get(&(c.0 + dx, c.1 + dy, c.2 + dz))
                        .into_iter()
                        .flatten()
                    {
                        if (mesh.positions()[v] - x).norm() > radius {
                            continue;
                        }
                        let better = best.is_none_or(|b| {
                            dominant(curv, v).0.abs() > dominant(curv, b).0.abs()
                                || (dominant(curv, v).0.abs() == dominant(curv, b).0.abs() && v < b)
                        });
                        if better {
                            best = Some(v);
                        }
                    }
                }
            }
        }
        let v = best.unwrap_or_else(|| mesh.nearest_vertex(&x));
        let (k, dir, other) = dominant(curv, v);
        let g = grads[v];
        if k.abs() <= tau
            || k.abs() < ANISOTROPY * other.abs()
            || g.norm() == 0.0
            || dir.norm() == 0.0
        {
            continue;
        }
        if dir.normalize().dot(&g.normalize()).abs() < cos_limit {
            continue;
        }
        sign[gv] = Some(k);
        crease_vertices.push((gv, k));
    }

    let mut neighbour_crease = vec![false; graph.vertices.len()];
    for e in &graph.row_edges {
        if sign[e.a].is_some() && sign[e.b].is_some() {
            neighbour_crease[e.a] = true;
            neighbour_crease[e.b] = true;
        }
    }
    let mut marked_edges = 0;
    for e in &mut graph.column_edges {
        if let (Some(k), true) = (sign[e.from], neighbour_crease[e.from]) {
            e.modifier = if k > 0.0 {
                Modifier::Blo
            } else {
                Modifier::Flo
            };
            marked_edges += 1;
        }
    }
    CreaseReport {
        threshold: tau,
        crease_vertices,
        marked_edges,
    }
}
