use std::collections::HashMap;

use crate::graph::{CrochetGraph, Modifier};

use super::{Instruction, Stitch};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TransducerError {
    #[error("segment {segment} row {row}: rows are not coupled at pair {at:?}")]
    NotCoupled {
        segment: usize,
        row: usize,
        at: (usize, usize),
    },
    #[error("segment {segment} row {row}: a decrease spans two parent rows or a gap")]
    SplitBase { segment: usize, row: usize },
    #[error("segment {segment} row {row}: column edge from outside the previous row")]
    Foreign { segment: usize, row: usize },
}

/// Flat instruction trace of one segment, one entry per round.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentTrace {
    pub segment: usize,
    pub joins: Vec<usize>,
    pub rounds: Vec<Vec<Instruction>>,
}

/// A stitch read off a coupling: kind, first base index and first top index.
pub type TransducedStitch = (Stitch, usize, usize);

/// Reads sc/inc/dec stitches off the sorted pairs of a coupling between rows of sizes
/// `n` and `m`. Every vertex of both rows is consumed exactly once; on failure returns the
/// pair at which the heads disagree with the coupling.
pub fn transduce_pairs(
    pairs: &[(usize, usize)],
    n: usize,
    m: usize,
) -> Result<Vec<TransducedStitch>, (usize, usize)> {
    let (mut i, mut j, mut k) = (0, 0, 0);
    let mut out = Vec::new();
    while k < pairs.len() {
        if pairs[k] != (i, j) {
            return Err(pairs[k]);
        }
        let x = pairs[k..].iter().take_while(|p| p.0 == i).count();
        let y = pairs[k..]
            .iter()
            .enumerate()
            .take_while(|&(d, p)| *p == (i + d, j))
            .count();
        if x > 1 && y > 1 {
            return Err(pairs[k]);
        }
        if x > 1 {
            out.push((Stitch::Inc(x), i, j));
            i += 1;
            j += x;
            k += x;
        } else if y > 1 {
            out.push((Stitch::Dec(y), i, j));
            i += y;
            j += 1;
            k += y;
        } else {
            out.push((Stitch::Sc, i, j));
            i += 1;
            j += 1;
            k += 1;
        }
    }
    if (i, j) != (n, m) {
        return Err((i, j));
    }
    Ok(out)
}

fn merged(mods: impl Iterator<Item = Modifier>) -> Modifier {
    mods.into_iter()
        .find(|&m| m != Modifier::Both)
        .unwrap_or(Modifier::Both)
}

/// Instruction traces for every active segment in crochet order.
///
/// The first round of the root is a magic ring; the first round of any other segment is
/// worked onto its joint row and opens with `attach` and `skip` instructions wherever the
/// next base is not the following stitch of the current parent row.
pub fn reconstruct_instructions(
    graph: &CrochetGraph,
) -> Result<Vec<SegmentTrace>, TransducerError> {
    let mut traces = Vec::new();
    for seg in graph.active() {
        let mut rounds = Vec::new();
        let mut joins = Vec::new();
        for (r, row) in seg.rows.iter().enumerate() {
            let Some(prev) = graph.previous_row(seg.id, r) else {
                continue;
            };
            let mut pairs = Vec::new();
            let mut modifier = HashMap::new();
            for (i, j, e) in graph.coupling_indices(prev, row) {
                let i = i.ok_or(TransducerError::Foreign {
                    segment: seg.id,
                    row: r,
                })?;
                pairs.push((i, j));
                modifier.insert((i, j), graph.column_edges[e].modifier);
            }
            pairs.sort_unstable();
            let stitches = transduce_pairs(&pairs, prev.len(), row.len()).map_err(|at| {
                TransducerError::NotCoupled {
                    segment: seg.id,
                    row: r,
                    at,
                }
            })?;
            let stitch_modifier = |&(s, i, j): &TransducedStitch| match s {
                Stitch::Inc(x) => merged((0..x).map(|d| modifier[&(i, j + d)])),
                Stitch::Dec(y) => merged((0..y).map(|d| modifier[&(i + d, j)])),
                _ => modifier[&(i, j)],
            };
            let joint = r == 0;
            let mut round = Vec::new();
            if r == 1 && prev.len() == 1 && graph.joint(seg.id).is_none() {
                round.push(Instruction {
                    stitch: Stitch::MagicRing(row.len()),
                    modifier: merged(stitches.iter().map(stitch_modifier)),
                });
                rounds.push(round);
                continue;
            }
            let mut parent = None;
            let mut cursor: HashMap<usize, usize> = HashMap::new();
            for st in &stitches {
                if joint {
                    let (s, i, _) = *st;
                    let span = s.consumes();
                    let bases: Vec<_> = (i..i + span).map(|b| &graph.vertices[prev[b]]).collect();
                    let p = bases[0].segment;
                    let n_parent = graph.segment(p).rows.last().map_or(0, |r| r.len());
                    let contiguous = bases
                        .windows(2)
                        .all(|w| w[1].segment == p && w[1].col == (w[0].col + 1) % n_parent);
                    if !contiguous {
                        return Err(TransducerError::SplitBase {
                            segment: seg.id,
                            row: r,
                        });
                    }
                    if parent != Some(p) {
                        round.push(Instruction::new(Stitch::Attach(p)));
                        parent = Some(p);
                        if !joins.contains(&p) {
                            joins.push(p);
                        }
                    }
                    let at = cursor.entry(p).or_insert(0);
                    let gap = (bases[0].col + n_parent - *at) % n_parent;
                    if gap > 0 {
                        round.push(Instruction::new(Stitch::Skip(gap)));
                    }
                    *at = (bases[span - 1].col + 1) % n_parent;
                }
                round.push(Instruction {
                    stitch: st.0,
                    modifier: stitch_modifier(st),
                });
            }
            rounds.push(round);
        }
        traces.push(SegmentTrace {
            segment: seg.id,
            joins,
            rounds,
        });
    }
    Ok(traces)
}
