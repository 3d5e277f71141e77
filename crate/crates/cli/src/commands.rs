use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use amigo_core::embed::{embed_sampled, embedding_obj, embedding_ply};
use amigo_core::graph::CrochetGraph;
use amigo_core::mesh::{read_obj, write_obj, MeshError};
use amigo_core::pattern::{interpret_pattern, label_graph, parse_pattern, LabelledGraph};
use amigo_core::pipeline::{compile as run_pipeline, Options, Stage, Stats};

use crate::config::CompileSettings;
use crate::Failure;

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text)
        .map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display())))
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))
}

fn read_graph(path: &Path) -> Result<CrochetGraph, Failure> {
    CrochetGraph::from_json(&read(path)?)
        .map_err(|e| Failure::input(format!("{}: invalid graph JSON: {e}", path.display())))
}

fn mesh_failure(e: MeshError) -> Failure {
    Failure::input(format!("{}: {e}", Stage::Mesh))
}

pub fn compile(mesh_path: &Path, s: &CompileSettings) -> Result<(), Failure> {
    let mesh = read_obj(mesh_path).map_err(mesh_failure)?;
    let seed = s.seed.resolve(&mesh)?;
    let width = s.width.resolve(&mesh)?;
    let options = Options {
        width,
        seed,
        creases: s.creases,
        crease_threshold: s.crease_threshold,
        smooth_craters: s.smooth_craters,
        adaptive: s.adaptive,
        label: s.label,
    };
    let model = mesh_path
        .file_stem()
        .map_or("model".into(), |n| n.to_string_lossy().into_owned());
    let out =
        run_pipeline(&mesh, &options, &model).map_err(|e| Failure::stage(e.stage, e.message))?;
    fs::create_dir_all(&s.output)
        .map_err(|e| Failure::input(format!("cannot create {}: {e}", s.output.display())))?;
    let graph = &out.build.graph;
    write(&s.output.join("pattern.txt"), &out.pattern_text)?;
    write(&s.output.join("graph.json"), &graph.to_json())?;
    write(
        &s.output.join("embedding.obj"),
        &embedding_obj(&out.embedding.positions, graph),
    )?;
    write(&s.output.join("stats.json"), &out.stats.to_json())?;
    if s.debug_exports {
        let debug = s.output.join("debug");
        fs::create_dir_all(&debug)
            .map_err(|e| Failure::input(format!("cannot create {}: {e}", debug.display())))?;
        write(&debug.join("mesh.obj"), &write_obj(&out.build.mesh))?;
        let f: String = out
            .build
            .dag
            .f
            .iter()
            .map(|v| format!("{v:.9}\n"))
            .collect();
        write(&debug.join("row_function.txt"), &f)?;
        let mut labels = vec![usize::MAX; out.build.mesh.n_faces()];
        for seg in &out.build.dag.segments {
            for &face in &seg.faces {
                labels[face] = seg.id;
            }
        }
        let labels: String = labels.iter().map(|l| format!("{l}\n")).collect();
        write(&debug.join("face_segments.txt"), &labels)?;
        write(
            &debug.join("embedding.ply"),
            &embedding_ply(&out.embedding.positions, graph),
        )?;
    }
    let st = &out.stats;
    println!(
        "rows {}  segments {}  stitches {}  time {:.2}s  -> {}",
        st.rows,
        st.segments,
        st.stitches,
        st.wall_time_s,
        s.output.display()
    );
    Ok(())
}

pub fn embed(graph_path: &Path, output: &Path, ply: Option<&Path>) -> Result<(), Failure> {
    let graph = read_graph(graph_path)?;
    let state = embed_sampled(&graph).map_err(|e| Failure::stage(Stage::Embed, e))?;
    write(output, &embedding_obj(&state.positions, &graph))?;
    if let Some(p) = ply {
        write(p, &embedding_ply(&state.positions, &graph))?;
    }
    println!(
        "{} iterations, converged: {}, mean edge deviation {:.3}%",
        state.iterations,
        state.converged,
        100.0 * state.mean_edge_deviation(&graph)
    );
    Ok(())
}

/// Global round number of a row, counting rounds in crochet order from 1.
fn round_number(graph: &CrochetGraph, segment: usize, row: usize) -> Option<usize> {
    let mut next = 1;
    for (k, seg) in graph.active().enumerate() {
        let first_row = usize::from(k == 0);
        if seg.id == segment {
            return (row >= first_row).then(|| next + row - first_row);
        }
        next += seg.rows.len() - first_row;
    }
    None
}

/// First row where the two graphs differ.
fn first_difference(graph: &CrochetGraph, ours: &LabelledGraph, theirs: &LabelledGraph) -> String {
    for seg in graph.active() {
        let a = ours.rows.get(&seg.id);
        let b = theirs.rows.get(&seg.id);
        let Some(b) = b else {
            return format!("segment {} is missing from the pattern", seg.id);
        };
        let a = a.expect("labelled from the graph");
        for row in 0..a.len().max(b.len()) {
            let edges = |g: &LabelledGraph| -> Vec<_> {
                g.column_edges
                    .iter()
                    .filter(|(_, t)| t.0 == seg.id && t.1 == row)
                    .copied()
                    .collect()
            };
            if a.get(row) != b.get(row) || edges(ours) != edges(theirs) {
                let where_ = match round_number(graph, seg.id, row) {
                    Some(r) => format!("round {r}"),
                    None => format!("segment {} row {row}", seg.id),
                };
                return format!(
                    "{where_}: graph has {} stitches, pattern makes {}",
                    a.get(row).map_or("no".into(), |n| n.to_string()),
                    b.get(row).map_or("no".into(), |n| n.to_string())
                );
            }
        }
    }
    "pattern has segments the graph lacks".into()
}

pub fn verify(pattern_path: &Path, graph_path: &Path) -> Result<(), Failure> {
    let pattern = parse_pattern(&read(pattern_path)?)
        .map_err(|e| Failure::input(format!("{}: {e}", pattern_path.display())))?;
    let graph = read_graph(graph_path)?;
    let theirs = match interpret_pattern(&pattern) {
        Ok(g) => g,
        Err(e) => {
            println!("FAIL: {e}");
            return Err(Failure::stage(Stage::Pattern, e));
        }
    };
    let ours = label_graph(&graph);
    if ours == theirs {
        println!("PASS: graphs isomorphic");
        Ok(())
    } else {
        let diff = first_difference(&graph, &ours, &theirs);
        println!("FAIL: {diff}");
        Err(Failure::stage(Stage::Pattern, diff))
    }
}

pub fn stats(graph_path: &Path) -> Result<(), Failure> {
    let graph = read_graph(graph_path)?;
    let st = Stats::of_graph(&graph);
    let mut out = String::new();
    writeln!(out, "rows      {}", st.rows).unwrap();
    writeln!(out, "segments  {}", st.segments).unwrap();
    writeln!(out, "stitches  {}", st.stitches).unwrap();
    if st.skipped_segments > 0 {
        writeln!(out, "skipped   {}", st.skipped_segments).unwrap();
    }
    writeln!(out, "stitch width {:.6}", graph.stitch_width).unwrap();
    for seg in graph.active() {
        let counts: Vec<String> = seg.rows.iter().map(|r| r.len().to_string()).collect();
        writeln!(out, "segment {}: {}", seg.id, counts.join(" ")).unwrap();
    }
    print!("{out}");
    Ok(())
}
