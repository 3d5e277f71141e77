use std::f64::consts::PI;

use amigo_core::embed::{embed_graph, embed_sampled, embedding_obj, MAX_ITERATIONS};
use amigo_core::geom::Vec3;
use amigo_core::graph::*;
use amigo_core::mesh::primitives;
use amigo_core::pipeline::{build_graph, Options};
use nalgebra::{Rotation3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// One closed round of `n` stitches and nothing else.
fn ring_graph(n: usize, w: f64) -> CrochetGraph {
    let vertices = (0..n)
        .map(|col| GraphVertex {
            id: col,
            segment: 0,
            row: 0,
            col,
            position: [0.0; 3],
            face: 0,
            bary: [1.0, 0.0, 0.0],
        })
        .collect();
    let row_edges = (0..n)
        .map(|i| RowEdge {
            a: i,
            b: (i + 1) % n,
            wrap: i + 1 == n,
        })
        .collect();
    CrochetGraph {
        stitch_width: w,
        seed: 0,
        order: vec![0],
        vertices,
        segments: vec![SegmentRows {
            id: 0,
            parents: vec![],
            skipped: false,
            f_range: [0.0, 1.0],
            levels: vec![0.5],
            rows: vec![(0..n).collect()],
        }],
        row_edges,
        column_edges: vec![],
        joints: vec![],
    }
}

fn circle(n: usize, radius: f64) -> Vec<Vec3> {
    (0..n)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / n as f64;
            Vec3::new(radius * t.cos(), radius * t.sin(), 0.0)
        })
        .collect()
}

fn sphere_graph() -> CrochetGraph {
    let m = primitives::icosphere(4, 1.0).normalize_area();
    let seed = m.nearest_vertex(&Vec3::new(0.0, 0.0, -10.0));
    build_graph(&m, &Options::new(seed, 0.07)).unwrap().graph
}

#[test]
fn sphere_converges_with_monotone_residual() {
    let g = sphere_graph();
    let e = embed_sampled(&g).unwrap();
    assert!(
        e.converged && e.iterations <= 500,
        "{} iterations",
        e.iterations
    );
    assert!(e.mean_edge_deviation(&g) < 0.05);
    assert!(e.residuals.windows(2).all(|r| r[1] <= r[0]));
    let seed = g.active().next().unwrap().rows[0][0];
    assert_eq!(e.positions[seed], g.vertices[seed].pos());
}

#[test]
fn perturbed_ring_becomes_regular_polygon() {
    let (n, w) = (12, 0.05);
    let g = ring_graph(n, w);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let init: Vec<Vec3> = circle(n, 0.8 * w / (2.0 * (PI / n as f64).sin()))
        .into_iter()
        .map(|p| {
            p + Vec3::new(
                rng.gen_range(-0.2..0.2),
                rng.gen_range(-0.2..0.2),
                rng.gen_range(-0.2..0.2),
            ) * w
        })
        .collect();
    let e = embed_graph(&g, &init, 0).unwrap();
    assert!(e.converged);
    let radius = w / (2.0 * (PI / n as f64).sin());
    for i in 0..n {
        for j in i + 1..n {
            let exact = 2.0 * radius * (PI * (j - i) as f64 / n as f64).sin();
            let got = (e.positions[i] - e.positions[j]).norm();
            assert!((got - exact).abs() < 1e-4 * w, "{i}-{j}: {got} vs {exact}");
        }
    }
}

#[test]
fn feasible_start_is_a_fixed_point() {
    let (n, w) = (9, 0.1);
    let init = circle(n, w / (2.0 * (PI / n as f64).sin()));
    let e = embed_graph(&ring_graph(n, w), &init, 0).unwrap();
    assert!(e.converged);
    assert!(e.iterations < MAX_ITERATIONS);
    for (a, b) in init.iter().zip(&e.positions) {
        assert!((a - b).norm() < 1e-9 * w);
    }
}

#[test]
fn rigid_motion_of_start_moves_result() {
    let g = sphere_graph();
    let init: Vec<Vec3> = g.vertices.iter().map(|v| v.pos()).collect();
    let seed = g.active().next().unwrap().rows[0][0];
    let rot = Rotation3::from_axis_angle(&Vector3::y_axis(), 0.7);
    let shift = Vec3::new(0.3, -1.0, 2.0);
    let moved: Vec<Vec3> = init.iter().map(|p| rot * p + shift).collect();
    let a = embed_graph(&g, &init, seed).unwrap();
    let b = embed_graph(&g, &moved, seed).unwrap();
    for (p, q) in a.positions.iter().zip(&b.positions) {
        // Both runs stop once moves drop below 1e-6 w, so they agree to that order.
        assert!((rot * p + shift - q).norm() < 1e-4 * g.stitch_width);
    }
}

#[test]
fn obj_export_is_deterministic() {
    let g = sphere_graph();
    let a = embed_sampled(&g).unwrap();
    let b = embed_sampled(&g).unwrap();
    let text = embedding_obj(&a.positions, &g);
    assert_eq!(text, embedding_obj(&b.positions, &g));
    let vertices = text.lines().filter(|l| l.starts_with("v ")).count();
    assert_eq!(vertices, g.vertices.len());
    let lines = text.lines().filter(|l| l.starts_with("l ")).count();
    assert_eq!(lines, g.row_edges.len() + g.column_edges.len());
}

#[test]
fn sphere_keeps_its_size() {
    let g = sphere_graph();
    let e = embed_sampled(&g).unwrap();
    let n = e.positions.len() as f64;
    let centre = e.positions.iter().fold(Vec3::zeros(), |a, p| a + p) / n;
    let radius = e
        .positions
        .iter()
        .map(|p| (p - centre).norm())
        .fold(0.0, f64::max);
    let input = 1.0 / (2.0 * PI.sqrt());
    assert!((radius / input - 1.0).abs() < 0.1, "{radius} vs {input}");
}

#[test]
fn export_spans_segments() {
    let m = primitives::two_ear_sphere(4).normalize_area();
    let seed = m.nearest_vertex(&Vec3::new(0.0, 0.0, -10.0));
    let g = build_graph(&m, &Options::new(seed, 0.05)).unwrap().graph;
    let e = embed_sampled(&g).unwrap();
    let text = embedding_obj(&e.positions, &g);
    let records: Vec<(usize, usize)> = text
        .lines()
        .filter_map(|l| l.strip_prefix("l "))
        .map(|l| {
            let mut it = l
                .split_whitespace()
                .map(|x| x.parse::<usize>().unwrap() - 1);
            (it.next().unwrap(), it.next().unwrap())
        })
        .collect();
    let segments: std::collections::BTreeSet<usize> = g.active().map(|s| s.id).collect();
    let present: std::collections::BTreeSet<usize> = records
        .iter()
        .flat_map(|&(a, b)| [g.vertices[a].segment, g.vertices[b].segment])
        .collect();
    assert!(segments.len() >= 2);
    assert_eq!(present, segments);
    assert!(records
        .iter()
        .any(|&(a, b)| g.vertices[a].segment != g.vertices[b].segment));
}
