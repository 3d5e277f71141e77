//! Open submeshes cut out of a closed mesh along level sets of a vertex function.

use std::collections::HashMap;

use crate::geom::{self, Vec3};
use crate::isoline::{extract_isolines, Isoline};
use crate::mesh::TriangleMesh;
use crate::topology::{Topology, TopologyIssue};

/// Where a patch vertex comes from on the source mesh.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Origin {
    Vertex(usize),
    /// Point on the source edge `(a, b)`, `a < b`, at parameter `t` from `a`.
    Edge {
        a: usize,
        b: usize,
        t: f64,
    },
}

#[derive(Debug, Clone)]
pub struct Patch {
    pub positions: Vec<Vec3>,
    pub faces: Vec<[usize; 3]>,
    /// Row function restricted to the patch.
    pub f: Vec<f64>,
    pub origin: Vec<Origin>,
    /// Source face of each patch face.
    pub face_origin: Vec<usize>,
    pub topology: Topology,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum Key {
    Vertex(usize),
    Edge(usize, usize, u64),
}

#[derive(Clone, Copy)]
struct PolyVertex {
    key: Key,
    /// Source vertices spanning the point: `(v, v)` or an edge.
    support: (usize, usize),
    t: f64,
    position: Vec3,
    value: f64,
}

fn common_edge(p: &PolyVertex, q: &PolyVertex) -> (usize, usize) {
    let mut s = [p.support.0, p.support.1, q.support.0, q.support.1];
    s.sort_unstable();
    let mut uniq: Vec<usize> = s.to_vec();
    uniq.dedup();
    debug_assert_eq!(uniq.len(), 2, "clip edge must lie on a source edge");
    (uniq[0], uniq[uniq.len() - 1])
}

/// Clips a convex polygon to `sign * (value - level) >= 0`.
fn clip(
    poly: &[PolyVertex],
    level: f64,
    sign: f64,
    mesh: &TriangleMesh,
    f: &[f64],
) -> Vec<PolyVertex> {
    let inside = |p: &PolyVertex| sign * (p.value - level) >= 0.0;
    let strictly_out = |p: &PolyVertex| sign * (p.value - level) < 0.0;
    let strictly_in = |p: &PolyVertex| sign * (p.value - level) > 0.0;
    let mut out = Vec::with_capacity(poly.len() + 2);
    for i in 0..poly.len() {
        let p = &poly[i];
        let q = &poly[(i + 1) % poly.len()];
        let crosses = (strictly_in(p) && strictly_out(q)) || (strictly_out(p) && strictly_in(q));
        if inside(p) {
            out.push(*p);
        }
        if crosses {
            let (a, b) = common_edge(p, q);
            let t = ((level - f[a]) / (f[b] - f[a])).clamp(0.0, 1.0);
            let pos = mesh.positions();
            out.push(PolyVertex {
                key: Key::Edge(a, b, level.to_bits()),
                support: (a, b),
                t,
                position: pos[a] * (1.0 - t) + pos[b] * t,
                value: level,
            });
        }
    }
    out
}

impl Patch {
    /// Part of `faces` with `lo <= f <= hi`. Pinched vertices are split so every vertex has one fan.
    pub fn clip(mesh: &TriangleMesh, f: &[f64], faces: &[usize], lo: f64, hi: f64) -> Patch {
        let mut index: HashMap<Key, usize> = HashMap::new();
        let mut positions = Vec::new();
        let mut values = Vec::new();
        let mut origin = Vec::new();
        let mut out_faces = Vec::new();
        let mut face_origin = Vec::new();
        for &face in faces {
            let tri = mesh.faces()[face];
            let mut poly: Vec<PolyVertex> = tri
                .iter()
                .map(|&v| PolyVertex {
                    key: Key::Vertex(v),
                    support: (v, v),
                    t: 0.0,
                    position: mesh.positions()[v],
                    value: f[v],
                })
                .collect();
            if lo.is_finite() {
                poly = clip(&poly, lo, 1.0, mesh, f);
            }
            if hi.is_finite() && poly.len() >= 3 {
                poly = clip(&poly, hi, -1.0, mesh, f);
            }
            if poly.len() < 3 {
                continue;
            }
            let ids: Vec<usize> = poly
                .iter()
                .map(|p| {
                    *index.entry(p.key).or_insert_with(|| {
                        positions.push(p.position);
                        values.push(p.value);
                        origin.push(match p.key {
                            Key::Vertex(v) => Origin::Vertex(v),
                            Key::Edge(a, b, _) => Origin::Edge { a, b, t: p.t },
                        });
                        positions.len() - 1
                    })
                })
                .collect();
            for k in 1..ids.len() - 1 {
                let t = [ids[0], ids[k], ids[k + 1]];
                if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
                    continue;
                }
                if geom::tri_area(&positions[t[0]], &positions[t[1]], &positions[t[2]]) <= 0.0 {
                    continue;
                }
                out_faces.push(t);
                face_origin.push(face);
            }
        }
        Patch::assemble(positions, out_faces, values, origin, face_origin)
    }

    /// Builds topology, duplicating vertices that have more than one fan.
    pub fn assemble(
        mut positions: Vec<Vec3>,
        mut faces: Vec<[usize; 3]>,
        mut f: Vec<f64>,
        mut origin: Vec<Origin>,
        face_origin: Vec<usize>,
    ) -> Patch {
        let topo = Topology::build(positions.len(), &faces).unwrap_or_else(|e| match e {
            TopologyIssue::NonManifoldEdge(a, b) | TopologyIssue::Orientation(a, b) => {
                panic!("clipped patch of a manifold mesh is manifold, edge ({a}, {b})")
            }
        });
        let pinched = topo.pinched_vertices();
        if pinched.is_empty() {
            return Patch {
                positions,
                faces,
                f,
                origin,
                face_origin,
                topology: topo,
            };
        }
        for v in pinched {
            for fan in &topo.fans(v)[1..] {
                let copy = positions.len();
                positions.push(positions[v]);
                f.push(f[v]);
                origin.push(origin[v]);
                for c in &fan.corners {
                    for x in faces[c.face].iter_mut() {
                        if *x == v {
                            *x = copy;
                        }
                    }
                }
            }
        }
        let topology =
            Topology::build(positions.len(), &faces).expect("splitting pinches keeps manifoldness");
        Patch {
            positions,
            faces,
            f,
            origin,
            face_origin,
            topology,
        }
    }

    pub fn n_vertices(&self) -> usize {
        self.positions.len()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.positions.len() as i64 - self.topology.edges().len() as i64 + self.faces.len() as i64
    }

    pub fn boundary_loops(&self) -> Vec<Vec<usize>> {
        self.topology.boundary_loops(&self.faces)
    }

    pub fn isolines(&self, values: &[f64], level: f64) -> Vec<Isoline> {
        extract_isolines(&self.positions, &self.faces, &self.topology, values, level)
    }

    pub fn area(&self) -> f64 {
        geom::total_area(&self.positions, &self.faces)
    }

    /// Barycentric coordinates of a point on this patch with respect to its source face.
    pub fn source_coordinates(
        &self,
        mesh: &TriangleMesh,
        patch_face: usize,
        p: &Vec3,
    ) -> (usize, [f64; 3]) {
        let face = self.face_origin[patch_face];
        let t = mesh.faces()[face];
        let pos = mesh.positions();
        (
            face,
            geom::barycentric(p, &pos[t[0]], &pos[t[1]], &pos[t[2]]),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::primitives;

    #[test]
    fn clipping_a_sphere_band_gives_an_annulus() {
        let m = primitives::icosphere(3, 1.0);
        let z: Vec<f64> = m.positions().iter().map(|p| p.z).collect();
        let all: Vec<usize> = (0..m.n_faces()).collect();
        let band = Patch::clip(&m, &z, &all, -0.3, 0.4);
        assert_eq!(band.euler_characteristic(), 0);
        assert_eq!(band.boundary_loops().len(), 2);
        assert!(band.f.iter().all(|&v| (-0.3..=0.4).contains(&v)));
        // Exact zone area 2 pi r h.
        let exact = 2.0 * std::f64::consts::PI * 0.7;
        assert!((band.area() / exact - 1.0).abs() < 0.02);
    }

    #[test]
    fn clip_pieces_partition_the_area() {
        let m = primitives::icosphere(2, 1.0);
        let z: Vec<f64> = m.positions().iter().map(|p| p.z + 0.01 * p.x).collect();
        let all: Vec<usize> = (0..m.n_faces()).collect();
        let lower = Patch::clip(&m, &z, &all, f64::NEG_INFINITY, 0.2);
        let upper = Patch::clip(&m, &z, &all, 0.2, f64::INFINITY);
        assert!((lower.area() + upper.area() - m.area()).abs() < 1e-12);
        assert_eq!(lower.euler_characteristic(), 1);
        assert_eq!(upper.euler_characteristic(), 1);
    }

    #[test]
    fn pinched_vertex_is_split() {
        // Two triangles meeting at vertex 0 of a closed tetrahedron-like fan.
        let p = vec![
            Vec3::new(0.0, 0.0, 0.0),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(1.0, 1.0, 0.0),
            Vec3::new(-1.0, 0.0, 0.0),
            Vec3::new(-1.0, -1.0, 0.0),
        ];
        let faces = vec![[0, 1, 2], [0, 3, 4]];
        let patch = Patch::assemble(
            p,
            faces,
            vec![0.0; 5],
            (0..5).map(Origin::Vertex).collect(),
            vec![0, 1],
        );
        assert_eq!(patch.n_vertices(), 6);
        assert!(patch.topology.pinched_vertices().is_empty());
        assert_eq!(patch.origin[5], Origin::Vertex(0));
    }
}
