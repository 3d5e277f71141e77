use crate::geom::Vec3;
use crate::isoline::Isoline;
use crate::segmentation::SegmentDag;

use super::dtw::{dtw_couple, dtw_couple_constrained};
use super::sample::Sample;
use super::{ColumnEdge, CrochetGraph, GraphVertex, Joint, Modifier, RowEdge, SegmentRows};

/// Parent stitches farther than this multiple of w from a child's boundary stay out of its joint row.
pub const JOINT_RADIUS: f64 = 1.5;

#[derive(Debug, thiserror::Error)]
pub enum CoupleError {
    #[error("segment {0}: no parent stitch lies near its starting boundary")]
    EmptyJointRow(usize),
}

/// Sampled rows of one segment.
#[derive(Debug, Clone)]
pub struct SegmentSamples {
    pub rows: Vec<Vec<Sample>>,
    pub levels: Vec<f64>,
}

/// Distance from `p` to a closed polyline and the arc-length parameter of the nearest point.
fn project(loop_pts: &[Vec3], p: &Vec3) -> (f64, f64) {
    let n = loop_pts.len();
    let (mut best, mut best_s, mut s) = (f64::INFINITY, 0.0, 0.0);
    for i in 0..n {
        let (a, b) = (loop_pts[i], loop_pts[(i + 1) % n]);
        let e = b - a;
        let len2 = e.norm_squared();
        let t = if len2 > 0.0 {
            ((p - a).dot(&e) / len2).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let d = (a + e * t - p).norm();
        if d < best {
            best = d;
            best_s = s + t * len2.sqrt();
        }
        s += len2.sqrt();
    }
    (best, best_s)
}

fn loop_points(line: &Isoline) -> Vec<Vec3> {
    line.points.iter().map(|p| p.position).collect()
}

fn longest(lines: Vec<Isoline>) -> Option<Vec<Vec3>> {
    lines
        .into_iter()
        .max_by(|a, b| a.length().total_cmp(&b.length()))
        .map(|l| loop_points(&l))
}

/// Joint previous row of `child`: parent last-row stitches within `1.5 w` of the child's
/// lower boundary and nearer to it than to any sibling's, ordered along that boundary
/// starting from the child's first stitch. Returns the vertex ids and the break flags
/// marking consecutive entries that are not neighbours in one parent row.
pub fn joint_row(
    graph: &CrochetGraph,
    dag: &SegmentDag,
    child: usize,
) -> Result<(Vec<usize>, Vec<bool>), CoupleError> {
    let seg = &dag.segments[child];
    let boundary = |s: usize| longest(dag.segments[s].lower_loops(dag.f_max));
    let Some(own) = boundary(child) else {
        return Err(CoupleError::EmptyJointRow(child));
    };
    let mut siblings: Vec<(usize, Vec<Vec3>)> = Vec::new();
    for &p in &seg.parents {
        for &c in &dag.segments[p].children {
            if c != child && !graph.segment(c).skipped && siblings.iter().all(|(s, _)| *s != c) {
                if let Some(l) = boundary(c) {
                    siblings.push((c, l));
                }
            }
        }
    }
    let first = graph.vertices[graph.segment(child).rows[0][0]].pos();
    let total: f64 = (0..own.len())
        .map(|i| (own[(i + 1) % own.len()] - own[i]).norm())
        .sum();
    let s0 = project(&own, &first).1;
    let limit = JOINT_RADIUS * graph.stitch_width;

    let mut picked: Vec<(f64, usize, usize, usize)> = Vec::new();
    for &p in &seg.parents {
        let rows = &graph.segment(p).rows;
        if graph.segment(p).skipped || rows.is_empty() {
            continue;
        }
        for (idx, &v) in rows[rows.len() - 1].iter().enumerate() {
            let x = graph.vertices[v].pos();
            let (d, s) = project(&own, &x);
            if d > limit {
                continue;
            }
            let nearer_sibling = siblings.iter().any(|(c, l)| {
                let ds = project(l, &x).0;
                ds < d || (ds == d && *c < child)
            });
            if nearer_sibling {
                continue;
            }
            picked.push(((s - s0).rem_euclid(total), p, idx, v));
        }
    }
    if picked.is_empty() {
        return Err(CoupleError::EmptyJointRow(child));
    }
    picked.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let breaks = picked
        .windows(2)
        .map(|w| {
            let n = graph.segment(w[0].1).rows.last().map_or(0, |r| r.len());
            w[0].1 != w[1].1 || (w[0].2 + 1) % n != w[1].2
        })
        .collect();
    Ok((picked.iter().map(|e| e.3).collect(), breaks))
}

/// Builds the crochet graph from per-segment samples, indexed by segment id.
/// Segments that are skipped in the DAG or have no samples are marked skipped.
pub fn assemble_graph(
    dag: &SegmentDag,
    samples: &[Option<SegmentSamples>],
    w: f64,
    seed: usize,
) -> Result<CrochetGraph, CoupleError> {
    let mut graph = CrochetGraph {
        stitch_width: w,
        seed,
        order: dag.order.clone(),
        vertices: Vec::new(),
        segments: Vec::new(),
        row_edges: Vec::new(),
        column_edges: Vec::new(),
        joints: Vec::new(),
    };
    for seg in &dag.segments {
        let sampled = samples[seg.id].as_ref().filter(|s| !s.rows.is_empty());
        if !seg.skipped && sampled.is_none() {
            log::warn!("segment {} produced no rows; skipping it", seg.id);
        }
        graph.segments.push(SegmentRows {
            id: seg.id,
            parents: seg.parents.clone(),
            skipped: seg.skipped || sampled.is_none(),
            f_range: [seg.f_lo, seg.f_hi],
            levels: sampled.map_or(Vec::new(), |s| s.levels.clone()),
            rows: Vec::new(),
        });
    }
    for &s in &dag.order {
        if graph.segments[s].skipped {
            continue;
        }
        let sampled = samples[s].as_ref().expect("active segment has samples");
        let mut rows = Vec::new();
        for (i, row) in sampled.rows.iter().enumerate() {
            let ids: Vec<usize> = row
                .iter()
                .enumerate()
                .map(|(j, smp)| {
                    let id = graph.vertices.len();
                    graph.vertices.push(GraphVertex {
                        id,
                        segment: s,
                        row: i,
                        col: j,
                        position: smp.position.into(),
                        face: smp.face,
                        bary: smp.bary,
                    });
                    id
                })
                .collect();
            for k in 1..ids.len() {
                graph.row_edges.push(RowEdge {
                    a: ids[k - 1],
                    b: ids[k],
                    wrap: false,
                });
            }
            if ids.len() >= 3 {
                graph.row_edges.push(RowEdge {
                    a: ids[ids.len() - 1],
                    b: ids[0],
                    wrap: true,
                });
            }
            rows.push(ids);
        }
        graph.segments[s].rows = rows;
    }

    let positions = |g: &CrochetGraph, ids: &[usize]| -> Vec<Vec3> {
        ids.iter().map(|&v| g.vertices[v].pos()).collect()
    };
    let root = dag.root();
    for &s in &dag.order {
        if graph.segments[s].skipped {
            continue;
        }
        if s != root {
            let (joint, breaks) = joint_row(&graph, dag, s)?;
            let first = graph.segments[s].rows[0].clone();
            let c = dtw_couple_constrained(
                &positions(&graph, &joint),
                &positions(&graph, &first),
                &breaks,
            );
            for (i, j) in c.pairs {
                graph.column_edges.push(ColumnEdge {
                    from: joint[i],
                    to: first[j],
                    modifier: Modifier::Both,
                });
            }
            let mut skipped = Vec::new();
            for &p in &graph.segments[s].parents {
                if let Some(last) = graph.segments[p].rows.last() {
                    skipped.extend(last.iter().filter(|v| !joint.contains(v)));
                }
            }
            graph.joints.push(Joint {
                segment: s,
                vertices: joint,
                skipped,
            });
        }
        let rows = graph.segments[s].rows.clone();
        for r in 1..rows.len() {
            let c = dtw_couple(
                &positions(&graph, &rows[r - 1]),
                &positions(&graph, &rows[r]),
            );
            for (i, j) in c.pairs {
                graph.column_edges.push(ColumnEdge {
                    from: rows[r - 1][i],
                    to: rows[r][j],
                    modifier: Modifier::Both,
                });
            }
        }
    }
    Ok(graph)
}
