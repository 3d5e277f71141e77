use std::fmt::Write as _;
use std::path::Path;

use super::{MeshError, TriangleMesh};
use crate::geom::Vec3;

pub fn read_obj(path: &Path) -> Result<TriangleMesh, MeshError> {
    let text = std::fs::read_to_string(path).map_err(|source| MeshError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_obj(&text)
}

/// Parses `v` and `f` records. Polygons are fan-triangulated; other records are ignored.
pub fn parse_obj(text: &str) -> Result<TriangleMesh, MeshError> {
    let mut positions = Vec::new();
    let mut faces = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        let mut parts = content.split_whitespace();
        match parts.next() {
            Some("v") => {
                let coords: Vec<f64> = parts
                    .take(3)
                    .map(|s| s.parse::<f64>())
                    .collect::<Result<_, _>>()
                    .map_err(|e| MeshError::Parse {
                        line,
                        message: format!("bad vertex coordinate: {e}"),
                    })?;
                if coords.len() != 3 || coords.iter().any(|c| !c.is_finite()) {
                    return Err(MeshError::Parse {
                        line,
                        message: "vertex needs three finite coordinates".into(),
                    });
                }
                positions.push(Vec3::new(coords[0], coords[1], coords[2]));
            }
            Some("f") => {
                let mut idx = Vec::new();
                for token in parts {
                    let first = token.split('/').next().unwrap_or("");
                    let k: i64 = first.parse().map_err(|_| MeshError::Parse {
                        line,
                        message: format!("bad face index '{token}'"),
                    })?;
                    let resolved = if k > 0 {
                        k - 1
                    } else if k < 0 {
                        positions.len() as i64 + k
                    } else {
                        -1
                    };
                    if resolved < 0 {
                        return Err(MeshError::Parse {
                            line,
                            message: format!("face index {k} out of range"),
                        });
                    }
                    idx.push(resolved as usize);
                }
                if idx.len() < 3 {
                    return Err(MeshError::Parse {
                        line,
                        message: "face needs at least three vertices".into(),
                    });
                }
                for k in 1..idx.len() - 1 {
                    faces.push([idx[0], idx[k], idx[k + 1]]);
                }
            }
            _ => {}
        }
    }
    TriangleMesh::new(positions, faces)
}

pub fn write_obj(mesh: &TriangleMesh) -> String {
    let mut out = String::new();
    for p in mesh.positions() {
        let _ = writeln!(out, "v {:.9} {:.9} {:.9}", p.x, p.y, p.z);
    }
    for f in mesh.faces() {
        let _ = writeln!(out, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
    }
    out
}
