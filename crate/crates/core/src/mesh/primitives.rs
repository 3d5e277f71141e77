//! Procedural closed meshes used by tests, benchmarks and the CLI demo inputs.

use std::collections::HashMap;
use std::f64::consts::PI;

use super::TriangleMesh;
use crate::geom::Vec3;

fn build(mut positions: Vec<Vec3>, mut faces: Vec<[usize; 3]>) -> TriangleMesh {
    let volume: f64 = faces
        .iter()
        .map(|t| positions[t[0]].dot(&positions[t[1]].cross(&positions[t[2]])))
        .sum();
    if volume < 0.0 {
        for f in &mut faces {
            f.swap(1, 2);
        }
    }
    for p in &mut positions {
        for c in p.iter_mut() {
            if c.abs() < 1e-15 {
                *c = 0.0;
            }
        }
    }
    TriangleMesh::new(positions, faces).expect("procedural mesh is valid")
}

pub fn tetrahedron() -> TriangleMesh {
    let s = 1.0 / 8f64.sqrt();
    let p = vec![
        Vec3::new(s, s, s),
        Vec3::new(s, -s, -s),
        Vec3::new(-s, s, -s),
        Vec3::new(-s, -s, s),
    ];
    build(p, vec![[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]])
}

/// Loop-subdivided icosahedron projected to a sphere: `10 * 4^k + 2` vertices.
pub fn icosphere(subdivisions: u32, radius: f64) -> TriangleMesh {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut p: Vec<Vec3> = [
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ]
    .iter()
    .map(|c| Vec3::new(c[0], c[1], c[2]).normalize())
    .collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        for f in &faces {
            let mut m = [0; 3];
            for k in 0..3 {
                let (a, b) = (f[k], f[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                m[k] = *mid.entry(key).or_insert_with(|| {
                    p.push(((p[a] + p[b]) * 0.5).normalize());
                    p.len() - 1
                });
            }
            next.push([f[0], m[0], m[2]]);
            next.push([f[1], m[1], m[0]]);
            next.push([f[2], m[2], m[1]]);
            next.push([m[0], m[1], m[2]]);
        }
        faces = next;
    }
    for x in &mut p {
        *x *= radius;
    }
    build(p, faces)
}

/// Surface of revolution about the z axis. `profile` lists `(r, z)` from bottom to top;
/// the first and last points must lie on the axis (`r = 0`).
pub fn revolution(profile: &[(f64, f64)], segments: usize) -> TriangleMesh {
    assert!(profile.len() >= 3 && segments >= 3);
    assert!(profile[0].0 == 0.0 && profile[profile.len() - 1].0 == 0.0);
    let rings = profile.len() - 2;
    let mut p = vec![Vec3::new(0.0, 0.0, profile[0].1)];
    for &(r, z) in &profile[1..profile.len() - 1] {
        for j in 0..segments {
            let a = 2.0 * PI * j as f64 / segments as f64;
            p.push(Vec3::new(r * a.cos(), r * a.sin(), z));
        }
    }
    let top = p.len();
    p.push(Vec3::new(0.0, 0.0, profile[profile.len() - 1].1));
    let ring = |k: usize, j: usize| 1 + k * segments + j % segments;
    let mut faces = Vec::new();
    for j in 0..segments {
        faces.push([0, ring(0, j + 1), ring(0, j)]);
    }
    for k in 0..rings - 1 {
        for j in 0..segments {
            faces.push([ring(k, j), ring(k, j + 1), ring(k + 1, j + 1)]);
            faces.push([ring(k, j), ring(k + 1, j + 1), ring(k + 1, j)]);
        }
    }
    for j in 0..segments {
        faces.push([ring(rings - 1, j), ring(rings - 1, j + 1), top]);
    }
    build(p, faces)
}

/// Cylinder of the given radius over `z in [0, height]` with flat caps.
pub fn capped_cylinder(
    radius: f64,
    height: f64,
    segments: usize,
    side_rings: usize,
    cap_rings: usize,
) -> TriangleMesh {
    let mut profile = vec![(0.0, 0.0)];
    for i in 1..=cap_rings {
        profile.push((radius * i as f64 / cap_rings as f64, 0.0));
    }
    for i in 1..side_rings {
        profile.push((radius, height * i as f64 / side_rings as f64));
    }
    for i in 0..cap_rings {
        profile.push((radius * (cap_rings - i) as f64 / cap_rings as f64, height));
    }
    profile.push((0.0, height));
    revolution(&profile, segments)
}

/// Wide cylinder below a narrower one, joined by a flat annular step.
/// The inner corner of the step is a concave ridge.
pub fn stepped_cylinder(
    r_low: f64,
    r_high: f64,
    h_low: f64,
    h_high: f64,
    segments: usize,
    density: usize,
) -> TriangleMesh {
    let n = |len: f64| ((len * density as f64).round() as usize).max(2);
    let mut profile = vec![(0.0, 0.0)];
    let k = n(r_low);
    for i in 1..=k {
        profile.push((r_low * i as f64 / k as f64, 0.0));
    }
    let k = n(h_low);
    for i in 1..=k {
        profile.push((r_low, h_low * i as f64 / k as f64));
    }
    let k = n(r_low - r_high);
    for i in 1..=k {
        profile.push((r_low - (r_low - r_high) * i as f64 / k as f64, h_low));
    }
    let k = n(h_high);
    for i in 1..=k {
        profile.push((r_high, h_low + h_high * i as f64 / k as f64));
    }
    let k = n(r_high);
    for i in 1..k {
        profile.push((r_high * (k - i) as f64 / k as f64, h_low + h_high));
    }
    profile.push((0.0, h_low + h_high));
    revolution(&profile, segments)
}

/// Two round lobes joined by a narrow waist (negative Gaussian and mean curvature there).
pub fn dumbbell(rings: usize, segments: usize) -> TriangleMesh {
    let mut profile = vec![(0.0, -1.6)];
    for i in 1..rings {
        let t = PI * i as f64 / rings as f64;
        let waist = 1.0 - 0.55 * (-((t - PI / 2.0) / 0.35).powi(2)).exp();
        profile.push((t.sin() * waist, -1.6 * t.cos()));
    }
    profile.push((0.0, 1.6));
    revolution(&profile, segments)
}

pub fn torus(major: f64, minor: f64, nu: usize, nv: usize) -> TriangleMesh {
    let mut p = Vec::with_capacity(nu * nv);
    for i in 0..nu {
        let u = 2.0 * PI * i as f64 / nu as f64;
        for j in 0..nv {
            let v = 2.0 * PI * j as f64 / nv as f64;
            let r = major + minor * v.cos();
            p.push(Vec3::new(r * u.cos(), r * u.sin(), minor * v.sin()));
        }
    }
    let id = |i: usize, j: usize| (i % nu) * nv + j % nv;
    let mut faces = Vec::with_capacity(2 * nu * nv);
    for i in 0..nu {
        for j in 0..nv {
            faces.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            faces.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    build(p, faces)
}

/// Scales each vertex radially: `p * (1 + offset[v])`.
pub fn displace_radial(mesh: &TriangleMesh, offset: impl Fn(usize, &Vec3) -> f64) -> TriangleMesh {
    let p: Vec<Vec3> = mesh
        .positions()
        .iter()
        .enumerate()
        .map(|(v, x)| x * (1.0 + offset(v, x)))
        .collect();
    TriangleMesh::new(p, mesh.faces().to_vec()).expect("displacement keeps the mesh valid")
}

fn bump(p: &Vec3, dir: &Vec3, width: f64) -> f64 {
    let angle = p.normalize().dot(dir).clamp(-1.0, 1.0).acos();
    (-(angle / width).powi(2)).exp()
}

/// Unit sphere with two finger-like protrusions near the north pole.
pub fn two_ear_sphere(subdivisions: u32) -> TriangleMesh {
    let tilt = 0.5f64;
    let ears = [
        Vec3::new(tilt.sin(), 0.0, tilt.cos()),
        Vec3::new(-tilt.sin(), 0.0, tilt.cos()),
    ];
    displace_radial(&icosphere(subdivisions, 1.0), |_, p| {
        ears.iter().map(|d| 1.2 * bump(p, d, 0.3)).sum()
    })
}

/// Unit sphere with a shallow pushed-in dimple on the +x side.
pub fn dimpled_sphere(subdivisions: u32) -> TriangleMesh {
    displace_radial(&icosphere(subdivisions, 1.0), |_, p| {
        -0.12 * bump(p, &Vec3::x(), 0.25)
    })
}
