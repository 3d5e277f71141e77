//! The crochet graph: stitch vertices sampled on the surface, row edges within
//! rounds and column edges (stitch stems) coupling consecutive rounds.

mod couple;
mod dtw;
mod sample;
mod validate;

use serde::{Deserialize, Serialize};

use crate::geom::Vec3;

pub use couple::{assemble_graph, joint_row, CoupleError, SegmentSamples};
pub use dtw::{brute_force_coupling, dtw_couple, dtw_couple_constrained, Coupling};
pub use sample::{sample_rows, Sample, SampleError, APEX_RATIO, MIN_RING};
pub use validate::{validate_graph, ValidationReport, Violation, ViolationKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Modifier {
    #[default]
    Both,
    Blo,
    Flo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphVertex {
    pub id: usize,
    pub segment: usize,
    pub row: usize,
    pub col: usize,
    /// Embedded position on the mesh.
    pub position: [f64; 3],
    /// Mesh face holding the position, with barycentric coordinates in it.
    pub face: usize,
    pub bary: [f64; 3],
}

impl GraphVertex {
    pub fn pos(&self) -> Vec3 {
        Vec3::from(self.position)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowEdge {
    pub a: usize,
    pub b: usize,
    /// Closes the round from the last stitch back to the first.
    pub wrap: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnEdge {
    /// Base vertex in the lower row.
    pub from: usize,
    /// Top vertex in the upper row.
    pub to: usize,
    #[serde(default)]
    pub modifier: Modifier,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentRows {
    pub id: usize,
    pub parents: Vec<usize>,
    pub skipped: bool,
    pub f_range: [f64; 2],
    /// Row function value of every row.
    pub levels: Vec<f64>,
    /// Vertex ids per row, ordered by column.
    pub rows: Vec<Vec<usize>>,
}

/// The previous row of a segment's first round: last-row stitches of its parents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Joint {
    pub segment: usize,
    pub vertices: Vec<usize>,
    /// Parent last-row vertices left out of this joint row.
    pub skipped: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrochetGraph {
    pub stitch_width: f64,
    /// Mesh vertex the first round starts from.
    pub seed: usize,
    /// Segment ids in crochet order.
    pub order: Vec<usize>,
    pub vertices: Vec<GraphVertex>,
    pub segments: Vec<SegmentRows>,
    pub row_edges: Vec<RowEdge>,
    pub column_edges: Vec<ColumnEdge>,
    pub joints: Vec<Joint>,
}

impl CrochetGraph {
    pub fn segment(&self, id: usize) -> &SegmentRows {
        self.segments
            .iter()
            .find(|s| s.id == id)
            .expect("segment id in graph")
    }

    pub fn joint(&self, segment: usize) -> Option<&Joint> {
        self.joints.iter().find(|j| j.segment == segment)
    }

    /// Segments in crochet order, skipping the ones left out.
    pub fn active(&self) -> impl Iterator<Item = &SegmentRows> {
        self.order
            .iter()
            .map(|&s| self.segment(s))
            .filter(|s| !s.skipped)
    }

    /// The row below `row` of `segment`: the previous row, or the joint row for a first row.
    /// `None` for the root's first row.
    pub fn previous_row(&self, segment: usize, row: usize) -> Option<&[usize]> {
        if row > 0 {
            Some(&self.segment(segment).rows[row - 1])
        } else {
            self.joint(segment).map(|j| j.vertices.as_slice())
        }
    }

    pub fn row_count(&self) -> usize {
        self.active().map(|s| s.rows.len()).sum()
    }

    /// Stitches worked: every vertex except the seed.
    pub fn stitch_count(&self) -> usize {
        self.vertices.len().saturating_sub(1)
    }

    /// Column edges whose top lies in `row`, as `(index in previous row, index in row)`.
    pub fn coupling_indices(
        &self,
        prev: &[usize],
        row: &[usize],
    ) -> Vec<(Option<usize>, usize, usize)> {
        let mut pos_prev = std::collections::HashMap::new();
        for (i, &v) in prev.iter().enumerate() {
            pos_prev.insert(v, i);
        }
        let mut pos_row = std::collections::HashMap::new();
        for (j, &v) in row.iter().enumerate() {
            pos_row.insert(v, j);
        }
        self.column_edges
            .iter()
            .enumerate()
            .filter_map(|(e, c)| {
                pos_row
                    .get(&c.to)
                    .map(|&j| (pos_prev.get(&c.from).copied(), j, e))
            })
            .collect()
    }

    pub fn edge_lengths(&self) -> Vec<f64> {
        let len = |a: usize, b: usize| (self.vertices[a].pos() - self.vertices[b].pos()).norm();
        self.row_edges
            .iter()
            .map(|e| len(e.a, e.b))
            .chain(self.column_edges.iter().map(|e| len(e.from, e.to)))
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("graph serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}
