//! Crochet instructions: reconstruction from a graph, loop folding, the text
//! grammar and an interpreter that crochets a pattern back into a graph.
//!
//! Grammar of the pattern text:
//!
//! ```text
//! pattern  := header-line* segment+
//! segment  := "Segment" ID join? NL round+
//! join     := "(join:" ID ("," ID)* ")"
//! round    := label ":" item ("," item)* NL
//! label    := ("Rnd" | "row") NUM | ("Rnds" | "rows") NUM "-" NUM
//! item     := [NUM] stitch | "(" item ("," item)* ")" "*" NUM
//! stitch   := ["BLO " | "FLO "] ("sc" | "inc" [NUM] | "dec" [NUM] | "MR" NUM | "skip" NUM | "attach" ID)
//! ```
//!
//! Lines starting with `#` are notes. `inc` and `dec` without a count mean 2.

mod crease;
mod fold;
mod interpret;
mod text;
mod transducer;

use crate::graph::Modifier;

pub use crease::{crease_threshold, mark_creases, CreaseReport, CREASE_ANGLE_DEG, CREASE_FLOOR};
pub use fold::{fold_round, fold_trace, unfold_items, unfold_pattern};
pub use interpret::{interpret_pattern, label_graph, InterpretError, LabelledGraph};
pub use text::{parse_pattern, render_pattern, render_round, Header, ParseError, RoundLabel};
pub use transducer::{reconstruct_instructions, transduce_pairs, SegmentTrace, TransducerError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stitch {
    MagicRing(usize),
    Sc,
    Inc(usize),
    Dec(usize),
    Skip(usize),
    Attach(usize),
}

impl Stitch {
    /// Bases consumed from the previous round.
    pub fn consumes(&self) -> usize {
        match *self {
            Stitch::MagicRing(_) | Stitch::Attach(_) => 0,
            Stitch::Sc | Stitch::Inc(_) => 1,
            Stitch::Dec(x) => x,
            Stitch::Skip(n) => n,
        }
    }

    /// Tops produced in the current round.
    pub fn produces(&self) -> usize {
        match *self {
            Stitch::MagicRing(n) | Stitch::Inc(n) => n,
            Stitch::Sc | Stitch::Dec(_) => 1,
            Stitch::Skip(_) | Stitch::Attach(_) => 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Instruction {
    pub stitch: Stitch,
    pub modifier: Modifier,
}

impl Instruction {
    pub fn new(stitch: Stitch) -> Instruction {
        Instruction {
            stitch,
            modifier: Modifier::Both,
        }
    }
}

impl From<Stitch> for Instruction {
    fn from(stitch: Stitch) -> Self {
        Instruction::new(stitch)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Item {
    Repeat {
        count: usize,
        instruction: Instruction,
    },
    Group {
        count: usize,
        items: Vec<Item>,
    },
}

/// One or more identical consecutive rounds, numbered globally.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Round {
    pub first: usize,
    pub last: usize,
    pub items: Vec<Item>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternSegment {
    pub id: usize,
    /// Segments whose last round this one is worked onto.
    pub joins: Vec<usize>,
    pub rounds: Vec<Round>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pattern {
    pub header: Header,
    pub segments: Vec<PatternSegment>,
}

/// Totals printed in the pattern header.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Totals {
    pub rows: usize,
    pub segments: usize,
    pub stitches: usize,
}

impl Totals {
    pub fn of(traces: &[SegmentTrace], graph: &crate::graph::CrochetGraph) -> Totals {
        Totals {
            rows: traces.iter().map(|t| t.rounds.len()).sum(),
            segments: traces.len(),
            stitches: graph.stitch_count(),
        }
    }
}

/// Folds the traces into a pattern with global round numbers and a header.
pub fn build_pattern(
    traces: &[SegmentTrace],
    graph: &crate::graph::CrochetGraph,
    model: &str,
) -> Pattern {
    let totals = Totals::of(traces, graph);
    let mut lines = vec![
        format!("model: {model}"),
        format!("stitch width: {:.6}", graph.stitch_width),
        format!(
            "rows: {}, segments: {}, stitches: {}",
            totals.rows, totals.segments, totals.stitches
        ),
    ];
    for &s in &graph.order {
        if graph.segment(s).skipped {
            lines.push(format!("segment {s} skipped: too thin to crochet"));
        }
    }
    let mut next = 1;
    let segments = traces
        .iter()
        .map(|t| {
            let seg = fold_trace(t, next);
            next += t.rounds.len();
            seg
        })
        .collect();
    Pattern {
        header: Header { lines },
        segments,
    }
}
