use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use amigo_core::mesh::{primitives, write_obj};

fn amigo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_amigo"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

fn sphere_obj(dir: &Path) -> PathBuf {
    let path = dir.join("ball.obj");
    fs::write(&path, write_obj(&primitives::icosphere(3, 1.0))).unwrap();
    path
}

fn compile_sphere(dir: &Path, out: &str, extra: &[&str]) -> (Output, PathBuf) {
    let mesh = sphere_obj(dir);
    let out = dir.join(out);
    let mut args = vec![
        "compile",
        mesh.to_str().unwrap(),
        "--seed",
        "0,0,-2",
        "--width",
        "0.08",
        "-o",
        out.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    (amigo(&args), out)
}

#[test]
fn compile_writes_all_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let (run, out) = compile_sphere(dir.path(), "out", &["--debug-exports"]);
    assert!(run.status.success(), "{}", text(&run.stderr));
    for name in ["pattern.txt", "graph.json", "embedding.obj", "stats.json"] {
        assert!(out.join(name).is_file(), "{name} missing");
    }
    for name in [
        "mesh.obj",
        "row_function.txt",
        "face_segments.txt",
        "embedding.ply",
    ] {
        assert!(
            out.join("debug").join(name).is_file(),
            "debug/{name} missing"
        );
    }
    let pattern = fs::read_to_string(out.join("pattern.txt")).unwrap();
    assert!(pattern.starts_with("# model: ball\n"));
    assert!(pattern.contains("Rnd 1: MR "));
    let stats: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("stats.json")).unwrap()).unwrap();
    assert_eq!(stats["segments"], 1);
    assert!(stats["stitches"].as_u64().unwrap() > 50);
}

#[test]
fn verify_accepts_own_pattern_and_rejects_tampered() {
    let dir = tempfile::tempdir().unwrap();
    let (run, out) = compile_sphere(dir.path(), "out", &[]);
    assert!(run.status.success());
    let (pattern, graph) = (out.join("pattern.txt"), out.join("graph.json"));
    let ok = amigo(&["verify", pattern.to_str().unwrap(), graph.to_str().unwrap()]);
    assert!(ok.status.success());
    assert_eq!(text(&ok.stdout), "PASS: graphs isomorphic\n");

    let original = fs::read_to_string(&pattern).unwrap();
    let ring = original
        .lines()
        .find(|l| l.starts_with("Rnd 1: MR "))
        .unwrap();
    let n: usize = ring["Rnd 1: MR ".len()..].parse().unwrap();
    let tampered = original.replace(ring, &format!("Rnd 1: MR {}", n + 1));
    let bad = dir.path().join("bad.txt");
    fs::write(&bad, tampered).unwrap();
    let fail = amigo(&["verify", bad.to_str().unwrap(), graph.to_str().unwrap()]);
    assert_eq!(fail.status.code(), Some(3));
    assert!(
        text(&fail.stdout).starts_with("FAIL: round 2"),
        "{}",
        text(&fail.stdout)
    );
}

#[test]
fn stats_and_embed_read_graph() {
    let dir = tempfile::tempdir().unwrap();
    let (_, out) = compile_sphere(dir.path(), "out", &[]);
    let graph = out.join("graph.json");
    let stats = amigo(&["stats", graph.to_str().unwrap()]);
    assert!(stats.status.success());
    let lines = text(&stats.stdout);
    assert!(lines.contains("segments  1\n"));
    assert!(lines.contains("segment 0: 1 "));

    let obj = dir.path().join("shape.obj");
    let ply = dir.path().join("shape.ply");
    let embed = amigo(&[
        "embed",
        graph.to_str().unwrap(),
        "-o",
        obj.to_str().unwrap(),
        "--ply",
        ply.to_str().unwrap(),
    ]);
    assert!(embed.status.success(), "{}", text(&embed.stderr));
    assert!(text(&embed.stdout).contains("converged: true"));
    // Embedding the same graph again reproduces the compiled shape.
    assert_eq!(
        fs::read(&obj).unwrap(),
        fs::read(out.join("embedding.obj")).unwrap()
    );
    assert!(fs::read_to_string(&ply).unwrap().starts_with("ply\n"));
}

#[test]
fn repeated_compiles_are_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (_, a) = compile_sphere(dir.path(), "a", &["--creases"]);
    let (_, b) = compile_sphere(dir.path(), "b", &["--creases"]);
    for name in ["pattern.txt", "graph.json", "embedding.obj"] {
        assert_eq!(
            fs::read(a.join(name)).unwrap(),
            fs::read(b.join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn config_file_and_row_labels() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = sphere_obj(dir.path());
    let out = dir.path().join("cfg");
    let config = dir.path().join("amigo.toml");
    fs::write(
        &config,
        format!(
            "seed = \"0,0,-2\"\nwidth = 0.08\nlabel = \"rows\"\noutput = {:?}\n",
            out.to_str().unwrap()
        ),
    )
    .unwrap();
    let run = amigo(&[
        "compile",
        mesh.to_str().unwrap(),
        "--config",
        config.to_str().unwrap(),
    ]);
    assert!(run.status.success(), "{}", text(&run.stderr));
    let pattern = fs::read_to_string(out.join("pattern.txt")).unwrap();
    assert!(pattern.contains("row 1: MR "));

    fs::write(&config, "seed = 0\nwidth = 0.08\ncolour = \"red\"\n").unwrap();
    let bad = amigo(&[
        "compile",
        mesh.to_str().unwrap(),
        "--config",
        config.to_str().unwrap(),
        "-o",
        "x",
    ]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn gauge_sets_width_from_toy_size() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = sphere_obj(dir.path());
    let out = dir.path().join("gauge");
    // A unit-area sphere spans 2r = 1/sqrt(pi), which the icosphere matches to 1%.
    let run = amigo(&[
        "compile",
        mesh.to_str().unwrap(),
        "--seed",
        "0,0,-2",
        "--gauge",
        "4",
        "--toy-height-cm",
        "7",
        "-o",
        out.to_str().unwrap(),
    ]);
    assert!(run.status.success(), "{}", text(&run.stderr));
    let pattern = fs::read_to_string(out.join("pattern.txt")).unwrap();
    let width = pattern
        .lines()
        .find_map(|l| l.strip_prefix("# stitch width: "))
        .unwrap();
    let expected = 1.0 / std::f64::consts::PI.sqrt() / 28.0;
    assert!(
        (width.parse::<f64>().unwrap() - expected).abs() < 1e-2 * expected,
        "{width} vs {expected}"
    );
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(amigo(&[]).status.code(), Some(1));
    assert_eq!(amigo(&["--help"]).status.code(), Some(0));
    assert_eq!(
        amigo(&[
            "compile",
            "nowhere.obj",
            "--seed",
            "0",
            "--width",
            "0.1",
            "-o",
            "x"
        ])
        .status
        .code(),
        Some(2)
    );
    let mesh = sphere_obj(dir.path());
    let m = mesh.to_str().unwrap();
    assert_eq!(
        amigo(&["compile", m, "--width", "0.1", "-o", "x"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        amigo(&["compile", m, "--seed", "99999", "--width", "0.1", "-o", "x"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        amigo(&["compile", m, "--seed", "0", "--width=-1", "-o", "x"])
            .status
            .code(),
        Some(2)
    );
    let open = dir.path().join("open.obj");
    fs::write(&open, "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n").unwrap();
    let run = amigo(&[
        "compile",
        open.to_str().unwrap(),
        "--seed",
        "0",
        "--width",
        "0.1",
        "-o",
        "x",
    ]);
    assert_eq!(run.status.code(), Some(2));
    assert!(
        text(&run.stderr).contains("mesh-core"),
        "{}",
        text(&run.stderr)
    );
    // A stitch wider than the model leaves nothing to crochet.
    let run = amigo(&[
        "compile",
        m,
        "--seed",
        "0",
        "--width",
        "5",
        "-o",
        dir.path().join("w").to_str().unwrap(),
    ]);
    assert_eq!(run.status.code(), Some(3), "{}", text(&run.stderr));
    assert!(text(&run.stderr).starts_with("error: stage "));
}

#[test]
fn pole_seeded_sphere_rows_follow_width() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = dir.path().join("ico.obj");
    fs::write(&mesh, write_obj(&primitives::icosphere(4, 1.0))).unwrap();
    let out = dir.path().join("out");
    let run = amigo(&[
        "compile",
        mesh.to_str().unwrap(),
        "--seed",
        "0,0,-2",
        "--width",
        "0.06",
        "-o",
        out.to_str().unwrap(),
    ]);
    assert!(run.status.success(), "{}", text(&run.stderr));
    let stats: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("stats.json")).unwrap()).unwrap();
    // Pole to pole on the unit-area sphere is sqrt(pi)/2, one row per width.
    let expected = (std::f64::consts::PI.sqrt() / (2.0 * 0.06)).round();
    let rows = stats["rows"].as_f64().unwrap();
    assert!((rows - expected).abs() <= 1.0, "{rows} vs {expected}");

    let report = amigo(&["stats", out.join("graph.json").to_str().unwrap()]);
    let lines = text(&report.stdout);
    let counts: usize = lines
        .lines()
        .filter_map(|l| {
            l.split_once(": ")
                .filter(|(k, _)| k.starts_with("segment "))
        })
        // The leading 1 is the seed point, not a stitch.
        .flat_map(|(_, v)| {
            v.split_whitespace()
                .skip(1)
                .map(|n| n.parse::<usize>().unwrap())
        })
        .sum();
    let total: usize = lines
        .lines()
        .find_map(|l| l.strip_prefix("stitches"))
        .unwrap()
        .trim()
        .parse()
        .unwrap();
    assert_eq!(total, counts);
}

#[test]
fn missing_mesh_names_stage() {
    let run = amigo(&[
        "compile",
        "nowhere.obj",
        "--seed",
        "0",
        "--width",
        "0.1",
        "-o",
        "x",
    ]);
    assert_eq!(run.status.code(), Some(2));
    assert!(
        text(&run.stderr).contains("mesh-core"),
        "{}",
        text(&run.stderr)
    );
}

#[test]
fn verify_reports_extra_stitch() {
    let dir = tempfile::tempdir().unwrap();
    let (run, out) = compile_sphere(dir.path(), "out", &[]);
    assert!(run.status.success());
    let original = fs::read_to_string(out.join("pattern.txt")).unwrap();
    let line = original
        .lines()
        .find(|l| l.starts_with("Rnd 3: "))
        .expect("round 3 is written alone");
    let tampered = original.replace(line, &format!("{line}, sc"));
    let bad = dir.path().join("bad.txt");
    fs::write(&bad, tampered).unwrap();
    let fail = amigo(&[
        "verify",
        bad.to_str().unwrap(),
        out.join("graph.json").to_str().unwrap(),
    ]);
    assert_eq!(fail.status.code(), Some(3));
    assert!(
        text(&fail.stdout).starts_with("FAIL: round "),
        "{}",
        text(&fail.stdout)
    );
}
