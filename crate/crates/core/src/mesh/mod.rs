//! Closed triangle meshes: validation, normalization and derived quantities.

mod curvature;
mod obj;
pub mod primitives;
mod smooth;

use std::path::PathBuf;

pub use curvature::{compute_curvatures, mean_and_gaussian, CurvatureField, VertexCurvatures};
pub use obj::{parse_obj, read_obj, write_obj};
pub use smooth::{
    crater_vertices, smooth_craters, SmoothReport, SMOOTH_MAX_ITERS, SMOOTH_TIME_STEP,
};

use crate::geom::{self, Vec3};
use crate::topology::{Topology, TopologyIssue};

#[derive(Debug, thiserror::Error)]
pub enum MeshError {
    #[error("mesh is not closed: boundary edge ({0}, {1})")]
    NotClosed(usize, usize),
    #[error("non-manifold edge ({0}, {1})")]
    NonManifold(usize, usize),
    #[error("non-manifold vertex {0}")]
    NonManifoldVertex(usize),
    #[error("inconsistent face orientation at edge ({0}, {1})")]
    Orientation(usize, usize),
    #[error("degenerate face {0}")]
    DegenerateFace(usize),
    #[error("face {face} references vertex {vertex} out of range")]
    IndexOutOfRange { face: usize, vertex: usize },
    #[error("mesh has no faces")]
    Empty,
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("degenerate one-ring at vertex {0}")]
    DegenerateStar(usize),
    #[error("crater smoothing did not converge after {iterations} iterations ({remaining} crater vertices left)")]
    NotConverged { iterations: usize, remaining: usize },
    #[error(transparent)]
    Solve(#[from] crate::sparse::SolveError),
}

/// Closed, consistently oriented, vertex-manifold triangle mesh.
#[derive(Debug, Clone)]
pub struct TriangleMesh {
    positions: Vec<Vec3>,
    faces: Vec<[usize; 3]>,
    topology: Topology,
    scale: f64,
}

impl TriangleMesh {
    pub fn new(positions: Vec<Vec3>, faces: Vec<[usize; 3]>) -> Result<Self, MeshError> {
        if faces.is_empty() {
            return Err(MeshError::Empty);
        }
        for (f, tri) in faces.iter().enumerate() {
            for &v in tri {
                if v >= positions.len() {
                    return Err(MeshError::IndexOutOfRange { face: f, vertex: v });
                }
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(MeshError::DegenerateFace(f));
            }
        }
        let topology = Topology::build(positions.len(), &faces).map_err(|e| match e {
            TopologyIssue::NonManifoldEdge(a, b) => MeshError::NonManifold(a, b),
            TopologyIssue::Orientation(a, b) => MeshError::Orientation(a, b),
        })?;
        if let Some(h) = topology.boundary_half_edges().next() {
            let tri = faces[h / 3];
            return Err(MeshError::NotClosed(tri[h % 3], tri[(h % 3 + 1) % 3]));
        }
        if let Some(&v) = topology.pinched_vertices().first() {
            return Err(MeshError::NonManifoldVertex(v));
        }
        let area_scale = geom::total_area(&positions, &faces);
        for (f, tri) in faces.iter().enumerate() {
            let a = geom::tri_area(&positions[tri[0]], &positions[tri[1]], &positions[tri[2]]);
            if !(a > 1e-14 * area_scale) {
                return Err(MeshError::DegenerateFace(f));
            }
        }
        Ok(TriangleMesh {
            positions,
            faces,
            topology,
            scale: 1.0,
        })
    }

    pub fn positions(&self) -> &[Vec3] {
        &self.positions
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn n_vertices(&self) -> usize {
        self.positions.len()
    }

    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn n_edges(&self) -> usize {
        self.topology.edges().len()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.n_vertices() as i64 - self.n_edges() as i64 + self.n_faces() as i64
    }

    pub fn genus(&self) -> i64 {
        (2 - self.euler_characteristic()) / 2
    }

    /// Accumulated uniform scale applied by [`normalize_area`](Self::normalize_area).
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn area(&self) -> f64 {
        geom::total_area(&self.positions, &self.faces)
    }

    /// Ordered one-ring neighbours (CCW).
    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        self.topology.fan(v).neighbors()
    }

    pub fn mean_edge_length(&self) -> f64 {
        let edges = self.topology.edges();
        let sum: f64 = edges
            .iter()
            .map(|e| (self.positions[e[0]] - self.positions[e[1]]).norm())
            .sum();
        sum / edges.len() as f64
    }

    pub fn face_normal(&self, f: usize) -> Vec3 {
        let t = self.faces[f];
        geom::tri_normal(
            &self.positions[t[0]],
            &self.positions[t[1]],
            &self.positions[t[2]],
        )
    }

    /// Area-weighted vertex normals.
    pub fn vertex_normals(&self) -> Vec<Vec3> {
        let mut n = vec![Vec3::zeros(); self.positions.len()];
        for tri in &self.faces {
            let p = [
                &self.positions[tri[0]],
                &self.positions[tri[1]],
                &self.positions[tri[2]],
            ];
            let w = (p[1] - p[0]).cross(&(p[2] - p[0]));
            for &v in tri {
                n[v] += w;
            }
        }
        for x in &mut n {
            let len = x.norm();
            if len > 0.0 {
                *x /= len;
            }
        }
        n
    }

    pub fn nearest_vertex(&self, p: &Vec3) -> usize {
        let mut best = (f64::INFINITY, 0);
        for (i, q) in self.positions.iter().enumerate() {
            let d = (q - p).norm_squared();
            if d < best.0 {
                best = (d, i);
            }
        }
        best.1
    }

    /// Uniformly scaled copy with unit total area.
    pub fn normalize_area(&self) -> TriangleMesh {
        let s = 1.0 / self.area().sqrt();
        let mut out = self.with_positions(self.positions.iter().map(|p| p * s).collect());
        out.scale = self.scale * s;
        out
    }

    /// Same connectivity, new positions. Validity of the geometry is the caller's concern.
    pub fn with_positions(&self, positions: Vec<Vec3>) -> TriangleMesh {
        assert_eq!(positions.len(), self.positions.len());
        TriangleMesh {
            positions,
            faces: self.faces.clone(),
            topology: self.topology.clone(),
            scale: self.scale,
        }
    }
}
