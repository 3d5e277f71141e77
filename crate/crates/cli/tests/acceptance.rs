//! End-to-end acceptance checks. Prints one PASS or FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::{Command, ExitCode};
use std::time::Instant;

use amigo_core::embed::{embed_graph, embed_sampled};
use amigo_core::geodesic::heat_geodesic;
use amigo_core::geom::Vec3;
use amigo_core::graph::*;
use amigo_core::mesh::{mean_and_gaussian, primitives, smooth_craters, write_obj, TriangleMesh};
use amigo_core::pattern::*;
use amigo_core::pipeline::{build_graph, compile, Compiled, Options};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn ensure(cond: bool, message: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(message())
    }
}

fn bottom(m: &TriangleMesh) -> usize {
    m.nearest_vertex(&Vec3::new(0.0, 0.0, -10.0))
}

fn sphere() -> TriangleMesh {
    primitives::icosphere(4, 1.0).normalize_area()
}

fn cylinder() -> TriangleMesh {
    primitives::capped_cylinder(0.5, 2.0, 64, 32, 8).normalize_area()
}

/// The five test models with their seeds.
fn models() -> Vec<(&'static str, TriangleMesh, usize)> {
    let torus = primitives::torus(1.0, 0.4, 64, 32).normalize_area();
    let torus_seed = torus.nearest_vertex(&Vec3::new(10.0, 0.0, 0.0));
    let mut out = vec![("torus", torus, torus_seed)];
    for (name, m) in [
        ("sphere", sphere()),
        ("capped cylinder", cylinder()),
        ("two-ear", primitives::two_ear_sphere(4).normalize_area()),
        ("dumbbell", primitives::dumbbell(80, 48).normalize_area()),
    ] {
        let seed = bottom(&m);
        out.push((name, m, seed));
    }
    out
}

fn round_trips(c: &Compiled) -> Result<(), String> {
    let parsed = parse_pattern(&c.pattern_text).map_err(|e| e.to_string())?;
    let rebuilt = interpret_pattern(&parsed).map_err(|e| e.to_string())?;
    ensure(rebuilt == label_graph(&c.build.graph), || {
        "interpreted pattern differs from the graph".into()
    })
}

/// Every round makes exactly the stitches of its row and works into every stitch below once.
fn consumes_each_vertex_once(c: &Compiled) -> Result<(), String> {
    let g = &c.build.graph;
    for trace in &c.traces {
        let seg = g.segment(trace.segment);
        let first = usize::from(g.joint(seg.id).is_none());
        for (k, round) in trace.rounds.iter().enumerate() {
            let r = first + k;
            let prev = g
                .previous_row(seg.id, r)
                .expect("worked rounds have a row below");
            let made: usize = round.iter().map(|i| i.stitch.produces()).sum();
            let used: usize = round
                .iter()
                .filter(|i| matches!(i.stitch, Stitch::Sc | Stitch::Inc(_) | Stitch::Dec(_)))
                .map(|i| i.stitch.consumes())
                .sum();
            let ring = matches!(round[0].stitch, Stitch::MagicRing(_));
            ensure(made == seg.rows[r].len(), || {
                format!(
                    "segment {} row {r}: made {made} of {}",
                    seg.id,
                    seg.rows[r].len()
                )
            })?;
            ensure(ring || used == prev.len(), || {
                format!("segment {} row {r}: used {used} of {}", seg.id, prev.len())
            })?;
        }
    }
    Ok(())
}

fn sphere_rows() -> Outcome {
    let m = sphere();
    let w = 0.07;
    let start = Instant::now();
    let c = compile(&m, &Options::new(bottom(&m), w), "sphere").map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let g = &c.build.graph;
    ensure(g.active().count() == 1, || {
        format!("{} segments", g.active().count())
    })?;
    let seg = g.active().next().unwrap();
    let r = 1.0 / (2.0 * PI.sqrt());
    let mut worst = 0.0f64;
    for (row, &f) in seg.rows.iter().zip(&seg.levels) {
        let expected = (2.0 * PI * r * (f / r).sin() / w).round();
        worst = worst.max((row.len() as f64 - expected).abs());
    }
    ensure(worst <= 2.0, || format!("stitch count off by {worst}"))?;
    ensure(secs < 10.0, || format!("took {secs:.2} s"))?;
    Ok(format!(
        "{} rounds, max count error {worst}, {secs:.2} s",
        seg.rows.len() - 1
    ))
}

fn heat_geodesics() -> Outcome {
    let m = primitives::icosphere(4, 1.0);
    let seed = m.nearest_vertex(&Vec3::new(0.0, 0.0, 10.0));
    let f = heat_geodesic(&m, seed, m.mean_edge_length().powi(2)).map_err(|e| e.to_string())?;
    let s = m.positions()[seed];
    let errors: Vec<f64> = m
        .positions()
        .iter()
        .enumerate()
        .filter(|&(v, _)| v != seed)
        .map(|(v, p)| {
            let exact = s.dot(p).clamp(-1.0, 1.0).acos();
            (f[v] - exact).abs() / exact
        })
        .collect();
    let mean = errors.iter().sum::<f64>() / errors.len() as f64;
    ensure(mean < 0.03, || format!("mean relative error {mean:.4}"))?;
    Ok(format!("mean relative error {:.3}%", 100.0 * mean))
}

fn dtw_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut row = |len: usize| -> Vec<Vec3> {
        (0..len)
            .map(|_| Vec3::new(rng.gen(), rng.gen(), rng.gen()))
            .collect()
    };
    let mut lens = ChaCha8Rng::seed_from_u64(7);
    for k in 0..200 {
        let a = row(lens.gen_range(1..=8));
        let b = row(lens.gen_range(1..=8));
        let (fast, exact) = (dtw_couple(&a, &b).cost, brute_force_coupling(&a, &b));
        ensure(fast == exact, || format!("pair {k}: {fast} vs {exact}"))?;
    }
    Ok("200 random pairs match exhaustive search".into())
}

fn folding_example() -> Outcome {
    let sc = Instruction::new(Stitch::Sc);
    let inc = Instruction::new(Stitch::Inc(2));
    let row: Vec<Instruction> = [sc, inc, sc, sc, sc, inc, sc, sc, sc, inc, sc, sc].to_vec();
    let trace = SegmentTrace {
        segment: 0,
        joins: vec![],
        rounds: vec![row.clone(), row],
    };
    let folded = fold_trace(&trace, 2);
    let text: Vec<String> = folded
        .rounds
        .iter()
        .map(|r| render_round(r, RoundLabel::Rows))
        .collect();
    ensure(text == ["rows 2-3: (sc, inc, 2sc)*3"], || {
        format!("{text:?}")
    })?;
    Ok(text[0].clone())
}

fn round_trip(compiled: &[(&str, Compiled)]) -> Outcome {
    for (name, c) in compiled {
        round_trips(c).map_err(|e| format!("{name}: {e}"))?;
        consumes_each_vertex_once(c).map_err(|e| format!("{name}: {e}"))?;
    }
    Ok(format!(
        "{} models isomorphic after interpret(render(fold(reconstruct)))",
        compiled.len()
    ))
}

const KINDS: [ViolationKind; 6] = [
    ViolationKind::Empty,
    ViolationKind::Endpoint,
    ViolationKind::Crossing,
    ViolationKind::Distinct,
    ViolationKind::Step,
    ViolationKind::Foreign,
];

/// Breaks the coupling of one row with `kind`; `false` if the row cannot host it.
fn inject(
    g: &mut CrochetGraph,
    seg: usize,
    r: usize,
    kind: &ViolationKind,
    rng: &mut ChaCha8Rng,
) -> bool {
    let prev = g.previous_row(seg, r).unwrap().to_vec();
    let row = g.segment(seg).rows[r].clone();
    let mut indexed = g.coupling_indices(&prev, &row);
    indexed.sort_unstable_by_key(|&(i, j, _)| (i, j));
    let pairs: Vec<(usize, usize)> = indexed.iter().map(|&(i, j, _)| (i.unwrap(), j)).collect();
    let (n, m) = (prev.len(), row.len());
    let edge = |from: usize, to: usize| ColumnEdge {
        from,
        to,
        modifier: Modifier::Both,
    };
    match kind {
        ViolationKind::Empty => {
            let mut doomed: Vec<usize> = indexed.iter().map(|x| x.2).collect();
            doomed.sort_unstable();
            for e in doomed.into_iter().rev() {
                g.column_edges.remove(e);
            }
        }
        ViolationKind::Endpoint if pairs.len() >= 2 => {
            g.column_edges.remove(indexed[0].2);
        }
        ViolationKind::Crossing if n >= 2 && m >= 2 && !pairs.contains(&(n - 1, 0)) => {
            g.column_edges.push(edge(prev[n - 1], row[0]));
        }
        ViolationKind::Distinct => {
            let dup = g.column_edges[indexed.choose(rng).unwrap().2].clone();
            g.column_edges.push(dup);
        }
        ViolationKind::Step => {
            let gaps: Vec<usize> = (1..pairs.len().saturating_sub(1))
                .filter(|&k| {
                    (
                        pairs[k + 1].0 - pairs[k - 1].0,
                        pairs[k + 1].1 - pairs[k - 1].1,
                    ) != (1, 1)
                })
                .collect();
            let Some(&k) = gaps.choose(rng) else {
                return false;
            };
            g.column_edges.remove(indexed[k].2);
        }
        ViolationKind::Foreign if m >= 2 => {
            g.column_edges.push(edge(row[0], row[m - 1]));
        }
        _ => return false,
    }
    true
}

fn coupling_validity(compiled: &[(&str, Compiled)]) -> Outcome {
    for (name, c) in compiled {
        let report = validate_graph(&c.build.graph);
        ensure(report.passed(), || {
            format!("{name}: {:?}", report.violations)
        })?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut done = 0;
    while done < 100 {
        let base = &compiled[done % compiled.len()].1.build.graph;
        let kind = &KINDS[done % KINDS.len()];
        let rows: Vec<(usize, usize)> = base
            .active()
            .flat_map(|s| (0..s.rows.len()).map(move |r| (s.id, r)))
            .filter(|&(s, r)| base.previous_row(s, r).is_some())
            .collect();
        let &(seg, r) = rows.choose(&mut rng).unwrap();
        let mut g = base.clone();
        if !inject(&mut g, seg, r, kind, &mut rng) {
            continue;
        }
        let found: Vec<Violation> = validate_graph(&g)
            .violations
            .into_iter()
            .filter(|v| !matches!(v.kind, ViolationKind::EdgeLength { .. }))
            .collect();
        let expected = vec![Violation {
            segment: seg,
            row: r,
            kind: kind.clone(),
        }];
        ensure(found == expected, || {
            format!("injected {expected:?}, diagnosed {found:?}")
        })?;
        done += 1;
    }
    Ok(format!(
        "{} pipeline graphs valid, 100 injected violations diagnosed",
        compiled.len()
    ))
}

fn branching(compiled: &[(&str, Compiled)]) -> Outcome {
    let c = &compiled.iter().find(|(n, _)| *n == "two-ear").unwrap().1;
    let b = &c.build;
    let saddles = b.field.critical.saddle_count();
    ensure(saddles >= 1, || "no saddle".into())?;
    let active = b.graph.active().count();
    ensure(active == 3, || format!("{active} segments"))?;
    let first = &b.dag.segments[b.dag.order[0]];
    ensure(first.contains_seed && first.parents.is_empty(), || {
        "body is not first in crochet order".into()
    })?;
    ensure(b.graph.joints.len() == 2, || {
        format!("{} joint rows", b.graph.joints.len())
    })?;
    round_trips(c)?;
    Ok(format!(
        "{saddles} saddles, {active} segments, body first, 2 joint rows round-trip"
    ))
}

/// Stitch count of the row nearest the waist plane.
fn waist_count(g: &CrochetGraph) -> usize {
    let seg = g.active().next().unwrap();
    let height = |row: &Vec<usize>| {
        row.iter().map(|&v| g.vertices[v].position[2]).sum::<f64>() / row.len() as f64
    };
    seg.rows
        .iter()
        .min_by(|a, b| height(a).abs().total_cmp(&height(b).abs()))
        .unwrap()
        .len()
}

fn curvature_adaptation(compiled: &[(&str, Compiled)]) -> Outcome {
    let adapted = &compiled.iter().find(|(n, _)| *n == "dumbbell").unwrap().1;
    let m = primitives::dumbbell(80, 48).normalize_area();
    let mut options = Options::new(bottom(&m), 0.05);
    options.adaptive = false;
    let plain = compile(&m, &options, "dumbbell").map_err(|e| e.to_string())?;
    round_trips(adapted)?;
    round_trips(&plain)?;
    let (a, p) = (
        waist_count(&adapted.build.graph),
        waist_count(&plain.build.graph),
    );
    let ratio = a as f64 / p as f64;
    ensure(ratio >= 1.1, || format!("waist {a} vs {p} stitches"))?;
    Ok(format!(
        "waist {a} vs {p} stitches ({ratio:.2}x), both patterns valid"
    ))
}

fn embedder() -> Outcome {
    let m = sphere();
    let g = build_graph(&m, &Options::new(bottom(&m), 0.07))
        .map_err(|e| e.to_string())?
        .graph;
    let e = embed_sampled(&g).map_err(|e| e.to_string())?;
    let dev = e.mean_edge_deviation(&g);
    ensure(e.converged && e.iterations <= 500, || {
        format!("{} iterations, converged {}", e.iterations, e.converged)
    })?;
    ensure(dev < 0.05, || format!("mean edge deviation {dev}"))?;
    ensure(e.residuals.windows(2).all(|r| r[1] <= r[0]), || {
        "residual increased".into()
    })?;

    let (n, w) = (10, 0.05);
    let ring = ring_graph(n, w);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let init: Vec<Vec3> = (0..n)
        .map(|i| {
            let t = 2.0 * PI * i as f64 / n as f64;
            Vec3::new(t.cos(), t.sin(), 0.0) * (0.7 * w)
                + Vec3::new(rng.gen(), rng.gen(), rng.gen()) * (0.3 * w)
        })
        .collect();
    let out = embed_graph(&ring, &init, 0).map_err(|e| e.to_string())?;
    let radius = w / (2.0 * (PI / n as f64).sin());
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            let exact = 2.0 * radius * (PI * (j - i) as f64 / n as f64).sin();
            worst = worst.max(((out.positions[i] - out.positions[j]).norm() - exact).abs());
        }
    }
    ensure(worst <= 1e-4 * w, || {
        format!("polygon distance error {:.2e} w", worst / w)
    })?;
    Ok(format!(
        "sphere: {} iterations, deviation {:.1e}; ring: polygon error {:.1e} w",
        e.iterations,
        dev,
        worst / w
    ))
}

fn ring_graph(n: usize, w: f64) -> CrochetGraph {
    CrochetGraph {
        stitch_width: w,
        seed: 0,
        order: vec![0],
        vertices: (0..n)
            .map(|col| GraphVertex {
                id: col,
                segment: 0,
                row: 0,
                col,
                position: [0.0; 3],
                face: 0,
                bary: [1.0, 0.0, 0.0],
            })
            .collect(),
        segments: vec![SegmentRows {
            id: 0,
            parents: vec![],
            skipped: false,
            f_range: [0.0, 1.0],
            levels: vec![0.5],
            rows: vec![(0..n).collect()],
        }],
        row_edges: (0..n)
            .map(|i| RowEdge {
                a: i,
                b: (i + 1) % n,
                wrap: i + 1 == n,
            })
            .collect(),
        column_edges: vec![],
        joints: vec![],
    }
}

fn craters() -> Outcome {
    let m = primitives::dimpled_sphere(4).normalize_area();
    let (smoothed, report) = smooth_craters(&m).map_err(|e| e.to_string())?;
    ensure(!report.flagged.is_empty(), || "no craters flagged".into())?;
    let (_, h, _) = mean_and_gaussian(&smoothed).map_err(|e| e.to_string())?;
    let low = report
        .flagged
        .iter()
        .map(|&v| h[v])
        .fold(f64::INFINITY, f64::min);
    ensure(low >= 0.0, || format!("flagged vertex with H = {low}"))?;
    let seed = m.nearest_vertex(&Vec3::new(-10.0, 0.0, 0.0));
    let c = compile(&m, &Options::new(seed, 0.05), "dimpled sphere").map_err(|e| e.to_string())?;
    round_trips(&c)?;
    Ok(format!(
        "{} flagged vertices, min H after {low:.3}, pipeline completed",
        report.flagged.len()
    ))
}

fn creases() -> Outcome {
    let m = cylinder();
    let scale = m.scale();
    let mut options = Options::new(bottom(&m), 0.05);
    options.creases = true;
    let c = compile(&m, &options, "capped cylinder").map_err(|e| e.to_string())?;
    let g = &c.build.graph;
    let seg = g.active().next().unwrap();
    let mut rim_edges = 0;
    // Rims sit at geodesic distance r and r + h from the bottom cap centre.
    for rim in [0.5 * scale, 2.5 * scale] {
        let r = (0..seg.rows.len())
            .min_by(|&a, &b| {
                (seg.levels[a] - rim)
                    .abs()
                    .total_cmp(&(seg.levels[b] - rim).abs())
            })
            .unwrap();
        let bases = &seg.rows[r];
        let edges: Vec<&ColumnEdge> = g
            .column_edges
            .iter()
            .filter(|e| bases.contains(&e.from))
            .collect();
        ensure(!edges.is_empty(), || {
            format!("rim row {r} has no stitches worked into it")
        })?;
        ensure(edges.iter().all(|e| e.modifier == Modifier::Blo), || {
            format!("round into rim row {r} is not all BLO")
        })?;
        rim_edges += edges.len();
    }
    round_trips(&c)?;
    let s = sphere();
    let mut options = Options::new(bottom(&s), 0.05);
    options.creases = true;
    let sc = compile(&s, &options, "sphere").map_err(|e| e.to_string())?;
    let marked = sc
        .build
        .graph
        .column_edges
        .iter()
        .filter(|e| e.modifier != Modifier::Both)
        .count();
    ensure(marked == 0, || {
        format!("sphere has {marked} crease stitches")
    })?;
    Ok(format!("{rim_edges} rim stitches all BLO, sphere has none"))
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mesh = dir.path().join("ears.obj");
    std::fs::write(&mesh, write_obj(&primitives::two_ear_sphere(3))).map_err(|e| e.to_string())?;
    let run = |out: &str| -> Result<(Vec<u8>, Vec<u8>), String> {
        let out = dir.path().join(out);
        let status = Command::new(env!("CARGO_BIN_EXE_amigo"))
            .arg("compile")
            .arg(&mesh)
            .args(["--seed", "0,0,-10", "--width", "0.06", "--creases", "-o"])
            .arg(&out)
            .status()
            .map_err(|e| e.to_string())?;
        ensure(status.success(), || {
            format!("amigo compile exited with {status}")
        })?;
        let read = |name: &str| std::fs::read(out.join(name)).map_err(|e| e.to_string());
        Ok((read("pattern.txt")?, read("graph.json")?))
    };
    let (a, b) = (run("a")?, run("b")?);
    ensure(a.0 == b.0, || "pattern.txt differs".into())?;
    ensure(a.1 == b.1, || "graph.json differs".into())?;
    Ok(format!(
        "pattern.txt ({} bytes) and graph.json ({} bytes) identical",
        a.0.len(),
        a.1.len()
    ))
}

fn main() -> ExitCode {
    let compiled: Vec<(&str, Compiled)> = models()
        .into_iter()
        .map(|(name, m, seed)| {
            (
                name,
                compile(&m, &Options::new(seed, 0.05), name).expect("test model compiles"),
            )
        })
        .collect();
    let criteria: Vec<Criterion> = vec![
        ("sphere analytic rows", Box::new(sphere_rows)),
        ("heat geodesics", Box::new(heat_geodesics)),
        ("DTW oracle", Box::new(dtw_oracle)),
        ("folding example", Box::new(folding_example)),
        ("round trip", Box::new(|| round_trip(&compiled))),
        (
            "coupling validity",
            Box::new(|| coupling_validity(&compiled)),
        ),
        ("branching", Box::new(|| branching(&compiled))),
        (
            "curvature adaptation",
            Box::new(|| curvature_adaptation(&compiled)),
        ),
        ("embedder", Box::new(embedder)),
        ("crater preprocessing", Box::new(craters)),
        ("crease marking", Box::new(creases)),
        ("determinism", Box::new(determinism)),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let outcome =
            catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", k + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
