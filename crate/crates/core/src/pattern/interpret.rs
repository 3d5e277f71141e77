use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::graph::CrochetGraph;

use super::fold::unfold_pattern;
use super::{Pattern, Stitch};

/// A stitch named by segment, row and column.
pub type Label = (usize, usize, usize);

/// Connectivity of a crochet graph with vertices named by position.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LabelledGraph {
    /// Stitch count of every row, per segment.
    pub rows: BTreeMap<usize, Vec<usize>>,
    pub column_edges: BTreeSet<(Label, Label)>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum InterpretError {
    #[error("round {round}: expected {expected} stitches to work into, the round uses {actual}")]
    StitchCountMismatch {
        round: usize,
        expected: usize,
        actual: usize,
    },
    #[error("round {round}: attach to unknown segment {segment}")]
    UnknownSegment { round: usize, segment: usize },
    #[error("round {round}: a magic ring only starts the first segment")]
    MisplacedMagicRing { round: usize },
    #[error("round {round}: stitches worked before attaching to a parent")]
    NotAttached { round: usize },
    #[error("segment {segment} has no rounds")]
    EmptySegment { segment: usize },
}

pub fn label_graph(graph: &CrochetGraph) -> LabelledGraph {
    let label = |v: usize| {
        let x = &graph.vertices[v];
        (x.segment, x.row, x.col)
    };
    LabelledGraph {
        rows: graph
            .active()
            .map(|s| (s.id, s.rows.iter().map(|r| r.len()).collect()))
            .collect(),
        column_edges: graph
            .column_edges
            .iter()
            .map(|e| (label(e.from), label(e.to)))
            .collect(),
    }
}

/// Crochets a pattern: every instruction consumes stitches of the previous round and
/// makes stitches of the current one. Rounds other than a segment's first must work
/// into every stitch of the previous round exactly once.
pub fn interpret_pattern(pattern: &Pattern) -> Result<LabelledGraph, InterpretError> {
    let mut out = LabelledGraph::default();
    let mut last_rows: HashMap<usize, Vec<Label>> = HashMap::new();
    for (k, seg) in pattern.segments.iter().enumerate() {
        let rounds = unfold_pattern(seg);
        let first_number = seg
            .rounds
            .first()
            .map(|r| r.first)
            .ok_or(InterpretError::EmptySegment { segment: seg.id })?;
        let mut sizes = Vec::new();
        let mut prev: Vec<Label> = Vec::new();
        let mut row = 0;
        for (r, flat) in rounds.iter().enumerate() {
            let round = first_number + r;
            let mut tops: Vec<Label> = Vec::new();
            if let Some(Stitch::MagicRing(n)) = flat.first().map(|i| i.stitch) {
                if k != 0 || r != 0 || flat.len() != 1 {
                    return Err(InterpretError::MisplacedMagicRing { round });
                }
                let seed = (seg.id, 0, 0);
                sizes.push(1);
                row = 1;
                for c in 0..n {
                    tops.push((seg.id, 1, c));
                    out.column_edges.insert((seed, (seg.id, 1, c)));
                }
                sizes.push(n);
                prev = tops;
                row += 1;
                continue;
            }
            let joint = r == 0;
            // Base row, per-parent cursors for joint rounds.
            let mut base: &[Label] = &prev;
            let mut parent: Option<usize> = None;
            let mut cursors: HashMap<usize, usize> = HashMap::new();
            let mut cursor = 0;
            let mut consumed = 0;
            for ins in flat {
                let s = ins.stitch;
                match s {
                    Stitch::MagicRing(_) => {
                        return Err(InterpretError::MisplacedMagicRing { round })
                    }
                    Stitch::Attach(p) => {
                        if let Some(q) = parent {
                            cursors.insert(q, cursor);
                        }
                        base = last_rows
                            .get(&p)
                            .ok_or(InterpretError::UnknownSegment { round, segment: p })?;
                        parent = Some(p);
                        cursor = cursors.get(&p).copied().unwrap_or(0);
                        continue;
                    }
                    _ => {}
                }
                if joint && parent.is_none() {
                    return Err(InterpretError::NotAttached { round });
                }
                let take = s.consumes();
                let bases: Vec<Label> = if joint {
                    (0..take).map(|d| base[(cursor + d) % base.len()]).collect()
                } else {
                    (cursor..cursor + take)
                        .filter_map(|i| base.get(i).copied())
                        .collect()
                };
                cursor = if joint {
                    (cursor + take) % base.len()
                } else {
                    cursor + take
                };
                consumed += take;
                if matches!(s, Stitch::Skip(_)) {
                    continue;
                }
                let first_top = tops.len();
                for c in 0..s.produces() {
                    tops.push((seg.id, row, first_top + c));
                }
                for &b in &bases {
                    for &t in &tops[first_top..] {
                        out.column_edges.insert((b, t));
                    }
                }
            }
            if !joint && consumed != prev.len() {
                return Err(InterpretError::StitchCountMismatch {
                    round,
                    expected: prev.len(),
                    actual: consumed,
                });
            }
            sizes.push(tops.len());
            prev = tops;
            row += 1;
        }
        last_rows.insert(seg.id, prev);
        out.rows.insert(seg.id, sizes);
    }
    Ok(out)
}
