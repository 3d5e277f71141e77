use std::fmt;

use super::CrochetGraph;

/// Relative tolerance on the mean embedded edge length.
pub const EDGE_LENGTH_TOLERANCE: f64 = 0.15;

#[derive(Debug, Clone, PartialEq)]
pub enum ViolationKind {
    /// The row has no column edges.
    Empty,
    /// The coupling does not start at the first pair or end at the last pair.
    Endpoint,
    /// Two column edges cross.
    Crossing,
    /// A pair appears twice.
    Distinct,
    /// Consecutive pairs are not one of the three unit steps.
    Step,
    /// A column edge starts outside the previous row.
    Foreign,
    /// Mean edge length deviates from w by more than the tolerance.
    EdgeLength { mean: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub segment: usize,
    /// Row whose coupling to the row below failed.
    pub row: usize,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "segment {} row {}: {:?}",
            self.segment, self.row, self.kind
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub mean_edge_length: f64,
    pub row_pairs: usize,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// First rule broken by a set of coupling pairs between rows of sizes `n` and `m`.
fn check_pairs(mut pairs: Vec<(usize, usize)>, n: usize, m: usize) -> Option<ViolationKind> {
    if pairs.is_empty() {
        return Some(ViolationKind::Empty);
    }
    pairs.sort_unstable();
    if !pairs.contains(&(0, 0)) || !pairs.contains(&(n - 1, m - 1)) {
        return Some(ViolationKind::Endpoint);
    }
    if pairs.windows(2).any(|w| w[1].1 < w[0].1) {
        return Some(ViolationKind::Crossing);
    }
    if pairs.windows(2).any(|w| w[0] == w[1]) {
        return Some(ViolationKind::Distinct);
    }
    let unit = |d: (usize, usize)| matches!(d, (1, 0) | (0, 1) | (1, 1));
    if pairs
        .windows(2)
        .any(|w| !unit((w[1].0 - w[0].0, w[1].1 - w[0].1)))
    {
        return Some(ViolationKind::Step);
    }
    None
}

/// Checks that every row is coupled to the row below it, joint rows included, and that
/// the mean embedded edge length is within 15% of w.
pub fn validate_graph(graph: &CrochetGraph) -> ValidationReport {
    let mut violations = Vec::new();
    let mut row_pairs = 0;
    for seg in graph.active() {
        for (r, row) in seg.rows.iter().enumerate() {
            let Some(prev) = graph.previous_row(seg.id, r) else {
                continue;
            };
            row_pairs += 1;
            let indexed = graph.coupling_indices(prev, row);
            let kind = if indexed.iter().any(|(i, _, _)| i.is_none()) {
                Some(ViolationKind::Foreign)
            } else {
                let pairs = indexed.iter().map(|&(i, j, _)| (i.unwrap(), j)).collect();
                check_pairs(pairs, prev.len(), row.len())
            };
            if let Some(kind) = kind {
                violations.push(Violation {
                    segment: seg.id,
                    row: r,
                    kind,
                });
            }
        }
    }
    let lengths = graph.edge_lengths();
    let mean = if lengths.is_empty() {
        0.0
    } else {
        lengths.iter().sum::<f64>() / lengths.len() as f64
    };
    if !lengths.is_empty() && (mean / graph.stitch_width - 1.0).abs() > EDGE_LENGTH_TOLERANCE {
        let root = graph.order.first().copied().unwrap_or(0);
        violations.push(Violation {
            segment: root,
            row: 0,
            kind: ViolationKind::EdgeLength { mean },
        });
    }
    ValidationReport {
        violations,
        mean_edge_length: mean,
        row_pairs,
    }
}
