//! Compile settings from flags and an optional `key = value` config file. Flags win.

use std::path::{Path, PathBuf};

use amigo_core::geom::Vec3;
use amigo_core::mesh::TriangleMesh;
use amigo_core::pattern::RoundLabel;

use crate::Failure;

/// Where the first round starts.
#[derive(Debug, Clone, PartialEq)]
pub enum SeedSpec {
    Vertex(usize),
    Point(Vec3),
}

impl SeedSpec {
    pub fn parse(s: &str) -> Result<SeedSpec, String> {
        let s = s.trim();
        if let Ok(v) = s.parse::<usize>() {
            return Ok(SeedSpec::Vertex(v));
        }
        let parts: Vec<&str> = s.split(',').collect();
        if parts.len() == 3 {
            let c: Result<Vec<f64>, _> = parts.iter().map(|p| p.trim().parse::<f64>()).collect();
            if let Ok(c) = c {
                return Ok(SeedSpec::Point(Vec3::new(c[0], c[1], c[2])));
            }
        }
        Err(format!("seed must be a vertex id or x,y,z, got {s:?}"))
    }

    /// Vertex id, snapping points to the nearest vertex.
    pub fn resolve(&self, mesh: &TriangleMesh) -> Result<usize, Failure> {
        match *self {
            SeedSpec::Vertex(v) if v < mesh.n_vertices() => Ok(v),
            SeedSpec::Vertex(v) => Err(Failure::input(format!(
                "seed {v} out of range for {} vertices",
                mesh.n_vertices()
            ))),
            SeedSpec::Point(p) => Ok(mesh.nearest_vertex(&p)),
        }
    }
}

/// Stitch width either given directly or derived from a physical gauge.
#[derive(Debug, Clone, PartialEq)]
pub enum WidthSpec {
    Normalized(f64),
    /// Stitches per cm and the height of the finished toy in cm.
    Gauge {
        stitches_per_cm: f64,
        height_cm: f64,
    },
}

impl WidthSpec {
    /// Width in area-normalized units. The height is measured along the largest
    /// bounding-box extent of the normalized mesh.
    pub fn resolve(&self, mesh: &TriangleMesh) -> Result<f64, Failure> {
        let w = match *self {
            WidthSpec::Normalized(w) => w,
            WidthSpec::Gauge {
                stitches_per_cm,
                height_cm,
            } => {
                if !(stitches_per_cm > 0.0 && height_cm > 0.0) {
                    return Err(Failure::input("gauge and toy height must be positive"));
                }
                let m = mesh.normalize_area();
                let (mut lo, mut hi) =
                    (Vec3::repeat(f64::INFINITY), Vec3::repeat(f64::NEG_INFINITY));
                for p in m.positions() {
                    lo = lo.inf(p);
                    hi = hi.sup(p);
                }
                let extent = (hi - lo).max();
                extent / (stitches_per_cm * height_cm)
            }
        };
        if !(w > 0.0 && w.is_finite()) {
            return Err(Failure::input(format!(
                "stitch width must be positive, got {w}"
            )));
        }
        Ok(w)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompileSettings {
    pub seed: SeedSpec,
    pub width: WidthSpec,
    pub creases: bool,
    pub crease_threshold: Option<f64>,
    pub smooth_craters: bool,
    pub adaptive: bool,
    pub debug_exports: bool,
    pub label: RoundLabel,
    pub output: PathBuf,
}

/// Values read from a config file; absent keys are `None`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FileConfig {
    pub seed: Option<SeedSpec>,
    pub width: Option<f64>,
    pub gauge: Option<f64>,
    pub toy_height_cm: Option<f64>,
    pub creases: Option<bool>,
    pub crease_threshold: Option<f64>,
    pub smooth_craters: Option<bool>,
    pub adaptive: Option<bool>,
    pub debug_exports: Option<bool>,
    pub label: Option<RoundLabel>,
    pub output: Option<PathBuf>,
}

pub fn parse_label(s: &str) -> Result<RoundLabel, String> {
    match s {
        "rnd" => Ok(RoundLabel::Rnd),
        "rows" => Ok(RoundLabel::Rows),
        _ => Err(format!("label must be rnd or rows, got {s:?}")),
    }
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<FileConfig, String> {
        let table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| e.message().to_string())?;
        let mut cfg = FileConfig::default();
        let number = |key: &str, v: &toml::Value| -> Result<f64, String> {
            v.as_float()
                .or_else(|| v.as_integer().map(|i| i as f64))
                .ok_or(format!("{key} must be a number"))
        };
        let flag =
            |key: &str, v: &toml::Value| v.as_bool().ok_or(format!("{key} must be true or false"));
        for (key, v) in &table {
            match key.as_str() {
                "seed" => {
                    cfg.seed = Some(match v {
                        toml::Value::Integer(i) if *i >= 0 => SeedSpec::Vertex(*i as usize),
                        toml::Value::String(s) => SeedSpec::parse(s)?,
                        _ => return Err("seed must be a vertex id or \"x,y,z\"".into()),
                    })
                }
                "width" => cfg.width = Some(number(key, v)?),
                "gauge" => cfg.gauge = Some(number(key, v)?),
                "toy_height_cm" => cfg.toy_height_cm = Some(number(key, v)?),
                "creases" => cfg.creases = Some(flag(key, v)?),
                "crease_threshold" => cfg.crease_threshold = Some(number(key, v)?),
                "smooth_craters" => cfg.smooth_craters = Some(flag(key, v)?),
                "adaptive" => cfg.adaptive = Some(flag(key, v)?),
                "debug_exports" => cfg.debug_exports = Some(flag(key, v)?),
                "label" => {
                    cfg.label = Some(parse_label(v.as_str().ok_or("label must be a string")?)?)
                }
                "output" => {
                    cfg.output = Some(PathBuf::from(v.as_str().ok_or("output must be a string")?))
                }
                other => return Err(format!("unknown config key {other:?}")),
            }
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<FileConfig, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::input(format!("cannot read config {}: {e}", path.display())))?;
        FileConfig::parse(&text)
            .map_err(|e| Failure::input(format!("config {}: {e}", path.display())))
    }
}
