//! Stage-by-stage compilation of a mesh into a crochet graph, pattern and embedding.

use std::fmt;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::embed::{embed_sampled, EmbeddingState};
use crate::geodesic::{tune_time_parameter, GeodesicField};
use crate::graph::{
    assemble_graph, sample_rows, validate_graph, CrochetGraph, SegmentSamples, ValidationReport,
    ViolationKind,
};
use crate::mesh::{compute_curvatures, smooth_craters, CurvatureField, SmoothReport, TriangleMesh};
use crate::param::{curvature_target, cut_segment, solve_column_function};
use crate::pattern::{
    build_pattern, mark_creases, reconstruct_instructions, render_pattern, CreaseReport, Pattern,
    RoundLabel, SegmentTrace,
};
use crate::segmentation::{filter_thin_segments, segment_at_saddles, SegmentDag};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Mesh,
    Geodesic,
    Segmentation,
    Param,
    Graph,
    Pattern,
    Embed,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Mesh => "mesh-core",
            Stage::Geodesic => "geodesic-field",
            Stage::Segmentation => "segmentation",
            Stage::Param => "surface-param",
            Stage::Graph => "crochet-graph",
            Stage::Pattern => "pattern-compiler",
            Stage::Embed => "shape-embedder",
        })
    }
}

#[derive(Debug, thiserror::Error)]
#[error("{stage}: {message}")]
pub struct PipelineError {
    pub stage: Stage,
    pub message: String,
}

fn fail<E: fmt::Display>(stage: Stage) -> impl Fn(E) -> PipelineError {
    move |e| PipelineError {
        stage,
        message: e.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Options {
    pub width: f64,
    pub seed: usize,
    pub creases: bool,
    /// Crease curvature threshold; the default is derived from the mesh.
    pub crease_threshold: Option<f64>,
    pub smooth_craters: bool,
    pub adaptive: bool,
    pub label: RoundLabel,
}

impl Options {
    pub fn new(seed: usize, width: f64) -> Options {
        Options {
            width,
            seed,
            creases: false,
            crease_threshold: None,
            smooth_craters: true,
            adaptive: true,
            label: RoundLabel::Rnd,
        }
    }
}

/// Everything produced up to and including the validated graph.
#[derive(Debug, Clone)]
pub struct GraphBuild {
    /// The area-normalized, optionally smoothed mesh the graph lies on.
    pub mesh: TriangleMesh,
    pub smoothing: Option<SmoothReport>,
    pub curvature: CurvatureField,
    pub field: GeodesicField,
    pub dag: SegmentDag,
    pub graph: CrochetGraph,
    pub report: ValidationReport,
}

/// Runs mesh preprocessing through graph validation. A failed validation is reported, not raised.
pub fn build_graph(input: &TriangleMesh, options: &Options) -> Result<GraphBuild, PipelineError> {
    let w = options.width;
    if !(w > 0.0 && w.is_finite()) {
        return Err(PipelineError {
            stage: Stage::Mesh,
            message: format!("stitch width must be positive, got {w}"),
        });
    }
    if options.seed >= input.n_vertices() {
        return Err(PipelineError {
            stage: Stage::Mesh,
            message: format!(
                "seed {} out of range for {} vertices",
                options.seed,
                input.n_vertices()
            ),
        });
    }
    let mut mesh = input.normalize_area();
    let mut smoothing = None;
    if options.smooth_craters {
        let (smoothed, report) = smooth_craters(&mesh).map_err(fail(Stage::Mesh))?;
        if !report.flagged.is_empty() {
            log::info!(
                "smoothed {} crater vertices in {} steps",
                report.flagged.len(),
                report.iterations
            );
        }
        mesh = smoothed;
        smoothing = Some(report);
    }
    let curvature = compute_curvatures(&mesh).map_err(fail(Stage::Mesh))?;
    let field = tune_time_parameter(&mesh, options.seed).map_err(fail(Stage::Geodesic))?;
    let mut dag = segment_at_saddles(&mesh, &field);
    filter_thin_segments(&mut dag, w);

    let mut samples: Vec<Option<SegmentSamples>> = vec![None; dag.segments.len()];
    for seg in dag.active() {
        let cut = cut_segment(seg, options.seed).map_err(fail(Stage::Param))?;
        let target = if options.adaptive {
            curvature_target(&mesh, &cut.patch, &curvature)
        } else {
            vec![1.0; cut.patch.faces.len()]
        };
        let g = solve_column_function(&cut, &target).map_err(fail(Stage::Param))?;
        let (rows, levels) =
            sample_rows(&mesh, seg, &cut, &g, w, options.seed).map_err(fail(Stage::Graph))?;
        samples[seg.id] = Some(SegmentSamples { rows, levels });
    }
    let graph = assemble_graph(&dag, &samples, w, options.seed).map_err(fail(Stage::Graph))?;
    let report = validate_graph(&graph);
    for v in &report.violations {
        log::warn!("graph validation: {v}");
    }
    Ok(GraphBuild {
        mesh,
        smoothing,
        curvature,
        field,
        dag,
        graph,
        report,
    })
}

/// Summary numbers of a compiled model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub rows: usize,
    pub segments: usize,
    pub stitches: usize,
    pub skipped_segments: usize,
    pub wall_time_s: f64,
}

impl Stats {
    /// Counts read off a graph; the wall time is left at zero.
    pub fn of_graph(graph: &CrochetGraph) -> Stats {
        let active: Vec<_> = graph.active().collect();
        let rows: usize = active.iter().map(|s| s.rows.len()).sum();
        Stats {
            // The seed row of the root is not a round.
            rows: rows.saturating_sub(1),
            segments: active.len(),
            stitches: graph.stitch_count(),
            skipped_segments: graph.segments.len() - active.len(),
            wall_time_s: 0.0,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("stats serialize")
    }
}

#[derive(Debug, Clone)]
pub struct Compiled {
    pub build: GraphBuild,
    pub creases: Option<CreaseReport>,
    pub traces: Vec<SegmentTrace>,
    pub pattern: Pattern,
    pub pattern_text: String,
    pub embedding: EmbeddingState,
    pub stats: Stats,
}

/// Runs the whole pipeline: graph, creases, instructions, pattern text and embedding.
pub fn compile(
    input: &TriangleMesh,
    options: &Options,
    model: &str,
) -> Result<Compiled, PipelineError> {
    let start = Instant::now();
    let mut build = build_graph(input, options)?;
    if let Some(v) = build
        .report
        .violations
        .iter()
        .find(|v| !matches!(v.kind, ViolationKind::EdgeLength { .. }))
    {
        return Err(PipelineError {
            stage: Stage::Graph,
            message: format!("invalid coupling: {v}"),
        });
    }
    let creases = options.creases.then(|| {
        let f = build.dag.f.clone();
        mark_creases(
            &mut build.graph,
            &build.mesh,
            &build.curvature,
            &f,
            options.crease_threshold,
        )
    });
    let traces = reconstruct_instructions(&build.graph).map_err(fail(Stage::Pattern))?;
    let pattern = build_pattern(&traces, &build.graph, model);
    let pattern_text = render_pattern(&pattern, options.label);
    let embedding = embed_sampled(&build.graph).map_err(fail(Stage::Embed))?;
    if !embedding.converged {
        log::warn!(
            "embedding stopped after {} iterations without converging",
            embedding.iterations
        );
    }
    let mut stats = Stats::of_graph(&build.graph);
    stats.wall_time_s = start.elapsed().as_secs_f64();
    Ok(Compiled {
        build,
        creases,
        traces,
        pattern,
        pattern_text,
        embedding,
        stats,
    })
}
