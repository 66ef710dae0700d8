//! Reading inputs and writing artifacts.

use std::collections::BTreeMap;
use std::path::Path;

use durer_forge::capsolver::CapMesh;
use durer_forge::cutforest::{sample_forests, CutForest};
use durer_forge::fixtures;
use durer_forge::geom::{parse_rational, Rational};
use durer_forge::pipeline::SCHEMA;
use durer_forge::subdivision::{
    load_subdivision_with_eps, parse_subdivision_unchecked, SubdivisionError, VertexId, WeightedSubdivision,
};
use serde::{Deserialize, Serialize};

use crate::CliError;

pub fn input<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Input(e.to_string())
}

pub fn internal<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Internal(e.to_string())
}

pub fn parse_eps(s: &str) -> Result<Rational, CliError> {
    let eps = parse_rational(s).map_err(|e| CliError::Input(format!("--eps: {e}")))?;
    if eps <= Rational::from_integer(0.into()) {
        return Err(CliError::Input(format!("--eps must be positive, got {s}")));
    }
    Ok(eps)
}

fn subdivision_error(e: SubdivisionError) -> CliError {
    CliError::Input(e.to_string())
}

/// Loads `arg` as a file, or else as a bundled fixture name.
pub fn load_subdivision(arg: &str, eps: &Rational) -> Result<WeightedSubdivision, CliError> {
    let path = Path::new(arg);
    if path.exists() {
        load_subdivision_with_eps(path, eps).map_err(subdivision_error)
    } else if fixtures::source(arg).is_some() {
        fixtures::load(arg, eps).map_err(subdivision_error)
    } else {
        Err(CliError::Input(format!("cannot read {arg}: no such file or bundled fixture")))
    }
}

/// Like [`load_subdivision`] but keeps subdivisions that break structural invariants.
pub fn load_subdivision_unchecked(arg: &str, eps: &Rational) -> Result<WeightedSubdivision, CliError> {
    let path = Path::new(arg);
    let text = if path.exists() {
        std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {arg}: {e}")))?
    } else if let Some(t) = fixtures::source(arg) {
        t.to_string()
    } else {
        return Err(CliError::Input(format!("cannot read {arg}: no such file or bundled fixture")));
    };
    parse_subdivision_unchecked(&text, eps).map_err(subdivision_error)
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Input(format!("cannot create {}: {e}", dir.display())))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
}

pub fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    write_text(path, text)
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(internal)?;
    s.push('\n');
    Ok(s)
}

/// Prints `value` as JSON and also writes it to `out` when given.
pub fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> Result<(), CliError> {
    let text = to_json(value)?;
    if let Some(p) = out {
        write_text(p, &text)?;
    }
    print!("{text}");
    Ok(())
}

/// A solved cap as written by `solve-cap`.
#[derive(Serialize, Deserialize)]
pub struct MeshFile {
    pub schema: String,
    pub subdivision: String,
    pub fixture_hash: String,
    pub beta: f64,
    pub mesh: CapMesh,
    #[serde(default)]
    pub solve: serde_json::Value,
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path, what: &str) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{} is not a {what}: {e}", path.display())))
}

pub fn read_mesh(path: &Path) -> Result<MeshFile, CliError> {
    let m: MeshFile = read_json(path, "mesh file")?;
    if m.schema != SCHEMA {
        return Err(CliError::Input(format!("{}: schema {} is not {SCHEMA}", path.display(), m.schema)));
    }
    Ok(m)
}

/// The mesh must have been solved for this exact subdivision.
pub fn check_mesh(m: &MeshFile, s: &WeightedSubdivision) -> Result<(), CliError> {
    if m.fixture_hash != s.source_hash {
        return Err(CliError::Input(format!(
            "mesh was solved for {} ({}), not for {} ({})",
            m.subdivision, m.fixture_hash, s.name, s.source_hash
        )));
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
pub struct GraphEdge {
    pub ends: [String; 2],
    pub length: f64,
    pub planar_length: f64,
    pub corridor_margin: f64,
    pub polyline: Vec<[f64; 3]>,
    pub projected: Vec<[f64; 2]>,
}

/// A pseudo-edge graph as written by `pseudo-edges`.
#[derive(Serialize, Deserialize)]
pub struct GraphFile {
    pub schema: String,
    pub subdivision: String,
    pub fixture_hash: String,
    pub beta: f64,
    /// Every pseudo-edge stays inside its corridor.
    pub induced: bool,
    pub error: Option<String>,
    pub delta: f64,
    pub nonconvex_corners: Vec<String>,
    pub edges: Vec<GraphEdge>,
}

pub fn read_graph(path: &Path) -> Result<GraphFile, CliError> {
    let g: GraphFile = read_json(path, "graph file")?;
    if g.schema != SCHEMA {
        return Err(CliError::Input(format!("{}: schema {} is not {SCHEMA}", path.display(), g.schema)));
    }
    Ok(g)
}

fn vertex_id(v: &serde_json::Value) -> Result<VertexId, CliError> {
    let text = match v {
        serde_json::Value::String(s) => s.clone(),
        serde_json::Value::Number(n) => n.to_string(),
        other => return Err(CliError::Input(format!("vertex id {other} is neither a string nor a number"))),
    };
    text.parse().map_err(input)
}

/// A forest file is a JSON object from child id to parent id, optionally under a
/// `"forest"` key.
pub fn read_forest(path: &Path, s: &WeightedSubdivision) -> Result<CutForest, CliError> {
    let v: serde_json::Value = read_json(path, "forest file")?;
    let obj = match v.get("forest").unwrap_or(&v) {
        serde_json::Value::Object(m) => m.clone(),
        _ => return Err(CliError::Input(format!("{}: expected an object of child -> parent ids", path.display()))),
    };
    let mut map = BTreeMap::new();
    for (child, parent) in &obj {
        map.insert(child.parse::<VertexId>().map_err(input)?, vertex_id(parent)?);
    }
    CutForest::from_ids(s, &map).map_err(input)
}

pub fn choose_forest(s: &WeightedSubdivision, file: Option<&Path>, seed: Option<u64>) -> Result<CutForest, CliError> {
    match (file, seed) {
        (Some(p), _) => read_forest(p, s),
        (None, Some(seed)) => Ok(sample_forests(s, 1, seed).remove(0)),
        (None, None) => Err(CliError::Input("give a forest with --forest <file> or --seed <n>".into())),
    }
}

pub fn forest_ids(s: &WeightedSubdivision, f: &CutForest) -> BTreeMap<String, String> {
    f.to_ids(s).into_iter().map(|(c, p)| (c.to_string(), p.to_string())).collect()
}
