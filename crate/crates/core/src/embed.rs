//! Predicted stuffed shape: projective-dynamics embedding of the crochet graph with
//! every edge pulled to the stitch width, plus OBJ and PLY export.

use std::fmt::Write;

use nalgebra::{DMatrix, DVector};

use crate::geom::Vec3;
use crate::graph::CrochetGraph;
use crate::sparse::{SolveError, SpdSolver, Triplets};

/// Weight of the uniform Laplacian smoothness term in the first stage.
pub const SMOOTHNESS: f64 = 0.1;
pub const MAX_ITERATIONS: usize = 1000;
/// Convergence of either stage: largest vertex move below this fraction of w.
pub const TOLERANCE: f64 = 1e-6;
/// Iteration budget of the smoothing stage.
const SMOOTH_ITERATIONS: usize = 200;
/// Number of previous steps mixed by the Anderson extrapolation.
const ANDERSON_DEPTH: usize = 10;

/// Anderson acceleration of the fixed-point map `x -> step(x)`.
struct Anderson {
    depth: usize,
    last: Option<(DVector<f64>, DVector<f64>)>,
    d_residual: Vec<DVector<f64>>,
    d_image: Vec<DVector<f64>>,
}

fn flatten(x: &[Vec3]) -> DVector<f64> {
    DVector::from_iterator(3 * x.len(), x.iter().flat_map(|p| [p.x, p.y, p.z]))
}

impl Anderson {
    fn new(depth: usize) -> Anderson {
        Anderson {
            depth,
            last: None,
            d_residual: Vec::new(),
            d_image: Vec::new(),
        }
    }

    /// Mixes the image `gx = step(x)` with the history; `gx` itself while the history is empty.
    fn extrapolate(&mut self, x: &[Vec3], gx: &[Vec3]) -> Vec<Vec3> {
        let g = flatten(gx);
        let f = &g - flatten(x);
        if let Some((f_prev, g_prev)) = self.last.take() {
            self.d_residual.push(&f - f_prev);
            self.d_image.push(&g - g_prev);
            if self.d_residual.len() > self.depth {
                self.d_residual.remove(0);
                self.d_image.remove(0);
            }
        }
        self.last = Some((f.clone(), g.clone()));
        if self.d_residual.is_empty() {
            return gx.to_vec();
        }
        let df = DMatrix::from_columns(&self.d_residual);
        let Ok(gamma) = df.clone().svd(true, true).solve(&f, 1e-12) else {
            return gx.to_vec();
        };
        let mixed = g - DMatrix::from_columns(&self.d_image) * gamma;
        mixed
            .as_slice()
            .chunks(3)
            .map(|c| Vec3::new(c[0], c[1], c[2]))
            .collect()
    }
}

#[derive(Debug, thiserror::Error)]
pub enum EmbedError {
    #[error("embedding diverged at iteration {0}")]
    Diverged(usize),
    #[error("graph has no vertices")]
    Empty,
    #[error(transparent)]
    Solve(#[from] SolveError),
}

#[derive(Debug, Clone)]
pub struct EmbeddingState {
    pub positions: Vec<Vec3>,
    pub iterations: usize,
    /// Constraint residual after every iteration.
    pub residuals: Vec<f64>,
    pub converged: bool,
}

impl EmbeddingState {
    /// Mean of `| |x_a - x_b| - w | / w` over all edges.
    pub fn mean_edge_deviation(&self, graph: &CrochetGraph) -> f64 {
        let edges = edge_list(graph);
        let w = graph.stitch_width;
        let sum: f64 = edges
            .iter()
            .map(|&(a, b)| ((self.positions[a] - self.positions[b]).norm() - w).abs() / w)
            .sum();
        sum / edges.len().max(1) as f64
    }
}

/// Row edges (wraps included) and column edges as vertex pairs.
pub fn edge_list(graph: &CrochetGraph) -> Vec<(usize, usize)> {
    graph
        .row_edges
        .iter()
        .map(|e| (e.a, e.b))
        .chain(graph.column_edges.iter().map(|e| (e.from, e.to)))
        .collect()
}

struct System {
    edges: Vec<(usize, usize)>,
    neighbours: Vec<Vec<usize>>,
    fixed: usize,
    index: Vec<Option<usize>>,
}

impl System {
    fn new(graph: &CrochetGraph, fixed: usize) -> System {
        let n = graph.vertices.len();
        let edges = edge_list(graph);
        let mut neighbours = vec![Vec::new(); n];
        for &(a, b) in &edges {
            if !neighbours[a].contains(&b) {
                neighbours[a].push(b);
                neighbours[b].push(a);
            }
        }
        let mut index = vec![None; n];
        let mut k = 0;
        for (v, slot) in index.iter_mut().enumerate() {
            if v != fixed {
                *slot = Some(k);
                k += 1;
            }
        }
        System {
            edges,
            neighbours,
            fixed,
            index,
        }
    }

    /// Uniform Laplacian rows `(v, [(u, weight)])`.
    fn laplacian(&self) -> Vec<Vec<(usize, f64)>> {
        self.neighbours
            .iter()
            .enumerate()
            .map(|(v, nb)| {
                let mut row = vec![(v, 1.0)];
                if !nb.is_empty() {
                    row.extend(nb.iter().map(|&u| (u, -1.0 / nb.len() as f64)));
                }
                row
            })
            .collect()
    }

    fn matrix(&self, lambda: f64) -> Triplets {
        let k = self.index.iter().flatten().count();
        let mut a = Triplets::new(k, k);
        let mut add = |i: usize, j: usize, v: f64| {
            if let (Some(r), Some(c)) = (self.index[i], self.index[j]) {
                a.push(r, c, v);
            }
        };
        for &(p, q) in &self.edges {
            add(p, p, 1.0);
            add(q, q, 1.0);
            add(p, q, -1.0);
            add(q, p, -1.0);
        }
        if lambda > 0.0 {
            for row in self.laplacian() {
                for &(i, wi) in &row {
                    for &(j, wj) in &row {
                        add(i, j, lambda * wi * wj);
                    }
                }
            }
        }
        a
    }

    fn residual(&self, x: &[Vec3], w: f64, lambda: f64) -> f64 {
        let mut r: f64 = self
            .edges
            .iter()
            .map(|&(a, b)| ((x[a] - x[b]).norm() - w).powi(2))
            .sum();
        if lambda > 0.0 {
            for row in self.laplacian() {
                let l: Vec3 = row.iter().map(|&(u, c)| x[u] * c).sum();
                r += lambda * l.norm_squared();
            }
        }
        r
    }

    /// One local-global step.
    fn step(
        &self,
        solver: &SpdSolver,
        x: &[Vec3],
        w: f64,
        lambda: f64,
    ) -> Result<Vec<Vec3>, SolveError> {
        let k = solver.dim();
        let mut rhs = vec![vec![0.0; k]; 3];
        let mut add = |v: usize, d: Vec3| {
            if let Some(r) = self.index[v] {
                for c in 0..3 {
                    rhs[c][r] += d[c];
                }
            }
        };
        let seed = x[self.fixed];
        for &(a, b) in &self.edges {
            let e = x[a] - x[b];
            let len = e.norm();
            let d = if len > 0.0 {
                e * (w / len)
            } else {
                Vec3::new(w, 0.0, 0.0)
            };
            add(a, d);
            add(b, -d);
            // Fixed-vertex columns move to the right-hand side.
            if b == self.fixed {
                add(a, seed);
            }
            if a == self.fixed {
                add(b, seed);
            }
        }
        if lambda > 0.0 {
            for row in self.laplacian() {
                if let Some(&(_, wf)) = row.iter().find(|(u, _)| *u == self.fixed) {
                    for &(i, wi) in &row {
                        add(i, -seed * (lambda * wi * wf));
                    }
                }
            }
        }
        let cols = solver.solve_columns(&rhs)?;
        let mut out = x.to_vec();
        for (v, slot) in self.index.iter().enumerate() {
            if let Some(r) = slot {
                out[v] = Vec3::new(cols[0][*r], cols[1][*r], cols[2][*r]);
            }
        }
        Ok(out)
    }
}

/// Local-global iterations from `init` with vertex `fixed` held in place.
///
/// A smoothing stage with Laplacian weight 0.1 runs to convergence, then a pure
/// edge-length stage runs until the largest move is below `1e-6 w` or the iteration
/// budget runs out. A start that already meets every length skips the smoothing stage.
/// Extrapolated steps that would raise the residual are replaced by the plain step,
/// so residuals never increase within a stage.
pub fn embed_graph(
    graph: &CrochetGraph,
    init: &[Vec3],
    fixed: usize,
) -> Result<EmbeddingState, EmbedError> {
    if init.is_empty() {
        return Err(EmbedError::Empty);
    }
    let w = graph.stitch_width;
    let system = System::new(graph, fixed);
    let mut x = init.to_vec();
    let feasible = system
        .edges
        .iter()
        .all(|&(a, b)| ((x[a] - x[b]).norm() - w).abs() <= 1e-9 * w);
    let stages: &[f64] = if feasible { &[0.0] } else { &[SMOOTHNESS, 0.0] };

    let mut residuals = Vec::new();
    let mut iterations = 0;
    let mut converged = false;
    if system.index.iter().flatten().count() == 0 {
        return Ok(EmbeddingState {
            positions: x,
            iterations,
            residuals,
            converged: true,
        });
    }
    for &lambda in stages {
        let final_stage = lambda == 0.0;
        let solver = SpdSolver::factor(&system.matrix(lambda))?;
        let mut accel = Anderson::new(ANDERSON_DEPTH);
        let mut current = system.residual(&x, w, lambda);
        let mut stage_iters = 0;
        while iterations < MAX_ITERATIONS {
            let plain = system.step(&solver, &x, w, lambda)?;
            iterations += 1;
            stage_iters += 1;
            let mut next = accel.extrapolate(&x, &plain);
            let mut energy = system.residual(&next, w, lambda);
            if !(energy <= current) {
                next = plain;
                energy = system.residual(&next, w, lambda);
            }
            if next.iter().any(|p| !p.iter().all(|c| c.is_finite())) {
                return Err(EmbedError::Diverged(iterations));
            }
            let moved = x
                .iter()
                .zip(&next)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            x = next;
            current = energy;
            residuals.push(energy);
            if moved < TOLERANCE * w {
                converged = final_stage;
                break;
            }
            if !final_stage && stage_iters == SMOOTH_ITERATIONS {
                break;
            }
        }
    }
    Ok(EmbeddingState {
        positions: x,
        iterations,
        residuals,
        converged,
    })
}

/// Graph vertex the first round starts from.
pub fn seed_vertex(graph: &CrochetGraph) -> usize {
    graph.active().next().map_or(0, |s| s.rows[0][0])
}

/// Embeds from the sampled positions with the seed held in place.
pub fn embed_sampled(graph: &CrochetGraph) -> Result<EmbeddingState, EmbedError> {
    let init: Vec<Vec3> = graph.vertices.iter().map(|v| v.pos()).collect();
    embed_graph(graph, &init, seed_vertex(graph))
}

/// Faces spanned by consecutive coupling pairs: quads for diagonal steps, triangles otherwise.
pub fn coupling_cells(graph: &CrochetGraph) -> Vec<Vec<usize>> {
    let mut cells = Vec::new();
    for seg in graph.active() {
        for (r, row) in seg.rows.iter().enumerate() {
            let Some(prev) = graph.previous_row(seg.id, r) else {
                continue;
            };
            let mut pairs: Vec<(usize, usize)> = graph
                .coupling_indices(prev, row)
                .into_iter()
                .filter_map(|(i, j, _)| i.map(|i| (i, j)))
                .collect();
            pairs.sort_unstable();
            let mut steps: Vec<((usize, usize), (usize, usize))> =
                pairs.windows(2).map(|w| (w[0], w[1])).collect();
            if r > 0 && pairs.len() > 1 {
                steps.push((pairs[pairs.len() - 1], pairs[0]));
            }
            for ((i, j), (i2, j2)) in steps {
                let mut cell = vec![prev[i], prev[i2], row[j2], row[j]];
                cell.dedup();
                if cell.first() == cell.last() {
                    cell.pop();
                }
                if cell.len() >= 3 {
                    cells.push(cell);
                }
            }
        }
    }
    cells
}

/// OBJ with the graph vertices, every edge as an `l` record and the coupling cells as faces.
pub fn embedding_obj(positions: &[Vec3], graph: &CrochetGraph) -> String {
    let mut out = String::from("# amigo crochet graph embedding\n");
    for p in positions {
        writeln!(out, "v {:.9} {:.9} {:.9}", p.x, p.y, p.z).unwrap();
    }
    for (a, b) in edge_list(graph) {
        writeln!(out, "l {} {}", a + 1, b + 1).unwrap();
    }
    for cell in coupling_cells(graph) {
        let ids: Vec<String> = cell.iter().map(|v| (v + 1).to_string()).collect();
        writeln!(out, "f {}", ids.join(" ")).unwrap();
    }
    out
}

const PALETTE: [[u8; 3]; 8] = [
    [228, 26, 28],
    [55, 126, 184],
    [77, 175, 74],
    [152, 78, 163],
    [255, 127, 0],
    [166, 86, 40],
    [247, 129, 191],
    [153, 153, 153],
];

/// ASCII PLY with one colour per segment.
pub fn embedding_ply(positions: &[Vec3], graph: &CrochetGraph) -> String {
    let cells = coupling_cells(graph);
    let mut out = String::new();
    writeln!(
        out,
        "ply\nformat ascii 1.0\nelement vertex {}",
        positions.len()
    )
    .unwrap();
    out.push_str("property float x\nproperty float y\nproperty float z\n");
    out.push_str("property uchar red\nproperty uchar green\nproperty uchar blue\n");
    writeln!(
        out,
        "element face {}\nproperty list uchar int vertex_indices\nend_header",
        cells.len()
    )
    .unwrap();
    for (p, v) in positions.iter().zip(&graph.vertices) {
        let c = PALETTE[v.segment % PALETTE.len()];
        writeln!(
            out,
            "{:.9} {:.9} {:.9} {} {} {}",
            p.x, p.y, p.z, c[0], c[1], c[2]
        )
        .unwrap();
    }
    for cell in cells {
        let ids: Vec<String> = cell.iter().map(|v| v.to_string()).collect();
        writeln!(out, "{} {}", cell.len(), ids.join(" ")).unwrap();
    }
    out
}
