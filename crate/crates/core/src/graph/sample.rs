use crate::geom::Vec3;
use crate::isoline::Isoline;
use crate::mesh::TriangleMesh;
use crate::param::CutSegment;
use crate::segmentation::Segment;

/// Smallest number of stitches in a ring row.
pub const MIN_RING: usize = 3;
/// Tip rows whose g-range is below this multiple of w collapse to one vertex.
pub const APEX_RATIO: f64 = 1.5;

#[derive(Debug, thiserror::Error)]
pub enum SampleError {
    #[error("segment {segment}: no isoline at f = {level}")]
    EmptyRow { segment: usize, level: f64 },
}

/// A sampled stitch position on the mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub position: Vec3,
    pub face: usize,
    pub bary: [f64; 3],
}

impl Sample {
    pub fn at_vertex(mesh: &TriangleMesh, v: usize) -> Sample {
        let face = mesh.topology().fan(v).corners[0].face;
        let k = mesh.faces()[face]
            .iter()
            .position(|&x| x == v)
            .expect("vertex in its face");
        let mut bary = [0.0; 3];
        bary[k] = 1.0;
        Sample {
            position: mesh.positions()[v],
            face,
            bary,
        }
    }
}

/// Row levels `k * w` strictly inside the segment's range.
pub fn row_levels(segment: &Segment, w: f64) -> Vec<f64> {
    let first = (segment.f_lo / w).floor() as i64 + 1;
    (first..)
        .map(|k| k as f64 * w)
        .take_while(|&l| l < segment.f_hi)
        .filter(|&l| l > segment.f_lo)
        .collect()
}

/// Point on the chain where g reaches `target`, searching forward from segment `k`.
fn walk_to(chain: &Isoline, g: &[f64], target: f64, k: &mut usize) -> (Vec3, usize) {
    let pts = &chain.points;
    while *k + 2 < pts.len() && pts[*k + 1].lerp(g) < target {
        *k += 1;
    }
    let (p, q) = (&pts[*k], &pts[*k + 1]);
    let (gp, gq) = (p.lerp(g), q.lerp(g));
    let s = if gq > gp {
        ((target - gp) / (gq - gp)).clamp(0.0, 1.0)
    } else {
        0.0
    };
    (p.position * (1.0 - s) + q.position * s, q.face)
}

fn sample_on(mesh: &TriangleMesh, cut: &CutSegment, face: usize, position: Vec3) -> Sample {
    let (face, bary) = cut.patch.source_coordinates(mesh, face, &position);
    Sample {
        position,
        face,
        bary,
    }
}

/// Rows of stitch positions for one segment, with their f levels.
///
/// Each row is the longest isoline of f on the cut patch, walked in increasing g and
/// split into `n = max(3, round(R / w))` equal g-steps of its g-range R. On a tip
/// segment the first row with `R < 1.5 w` becomes a single apex vertex and ends the
/// segment; if no row collapses the maximum of f is appended as the apex.
pub fn sample_rows(
    mesh: &TriangleMesh,
    segment: &Segment,
    cut: &CutSegment,
    g: &[f64],
    w: f64,
    seed: usize,
) -> Result<(Vec<Vec<Sample>>, Vec<f64>), SampleError> {
    let mut rows = Vec::new();
    let mut levels = Vec::new();
    if segment.contains_seed {
        rows.push(vec![Sample::at_vertex(mesh, seed)]);
        levels.push(segment.f_lo);
    }
    let tip = !segment.has_upper_boundary();
    let mut collapsed = false;
    for level in row_levels(segment, w) {
        let lines = cut.patch.isolines(&cut.patch.f, level);
        let mut chain = lines
            .into_iter()
            .filter(|l| l.points.len() >= 2)
            .max_by(|a, b| a.length().total_cmp(&b.length()))
            .ok_or(SampleError::EmptyRow {
                segment: segment.id,
                level,
            })?;
        if chain.points[0].lerp(g) > chain.points[chain.points.len() - 1].lerp(g) {
            chain.points.reverse();
        }
        let g0 = chain.points[0].lerp(g);
        let range = chain.points[chain.points.len() - 1].lerp(g) - g0;
        let mut k = 0;
        if tip && range < APEX_RATIO * w {
            let (p, face) = walk_to(&chain, g, g0 + range / 2.0, &mut k);
            rows.push(vec![sample_on(mesh, cut, face, p)]);
            levels.push(level);
            collapsed = true;
            break;
        }
        let n = ((range / w).round() as usize).max(MIN_RING);
        let row = (0..n)
            .map(|j| {
                let (p, face) = walk_to(&chain, g, g0 + j as f64 * range / n as f64, &mut k);
                sample_on(mesh, cut, face, p)
            })
            .collect();
        rows.push(row);
        levels.push(level);
    }
    if tip && !collapsed {
        let v = segment.max_vertex();
        let face = segment.patch.topology.fan(v).corners[0].face;
        let position = segment.patch.positions[v];
        let (face, bary) = segment.patch.source_coordinates(mesh, face, &position);
        rows.push(vec![Sample {
            position,
            face,
            bary,
        }]);
        levels.push(segment.patch.f[v]);
    }
    Ok((rows, levels))
}
