use std::path::Path;

use serde::Deserialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use super::validate::validate;
use super::{default_eps, Axis, Sqrt3Coordinate, SubdivisionError, VertexId, WeightSpec, WeightedSubdivision};
use crate::geom::{parse_decimal, parse_rational, PointR2, Rational};

pub const DEFAULT_EPS: &str = "1e-6";

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    #[serde(default)]
    name: Option<String>,
    boundary: Vec<[String; 2]>,
    #[serde(default)]
    sqrt3_coordinates: Vec<RawSqrt3>,
    vertices: Vec<RawVertex>,
    edges: Vec<[Value; 2]>,
    faces: Vec<Vec<Value>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVertex {
    id: i64,
    x: String,
    y: String,
    weight: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSqrt3 {
    corner: String,
    axis: String,
    scale: String,
    offset: String,
}

fn parse_err<E: std::fmt::Display>(e: E) -> SubdivisionError {
    SubdivisionError::Parse(e.to_string())
}

fn vertex_id(v: &Value) -> Result<VertexId, SubdivisionError> {
    match v {
        Value::Number(n) => match n.as_i64() {
            Some(0) | None => Err(SubdivisionError::Parse(format!("bad vertex id {n}"))),
            Some(i) => Ok(VertexId::Interior(i)),
        },
        Value::String(s) => s.parse(),
        other => Err(SubdivisionError::Parse(format!("bad vertex id {other}"))),
    }
}

fn weight_spec(s: &str) -> Result<WeightSpec, SubdivisionError> {
    match s.trim() {
        "auto-eps" => Ok(WeightSpec::AutoEps),
        "auto-rest" => Ok(WeightSpec::AutoRest),
        t => parse_rational(t).map(WeightSpec::Fixed).map_err(parse_err),
    }
}

/// Parses the subdivision file format without checking any geometric invariant.
pub fn parse_subdivision_unchecked(text: &str, eps: &Rational) -> Result<WeightedSubdivision, SubdivisionError> {
    let raw: RawFile = serde_json::from_str(text).map_err(parse_err)?;
    let boundary = raw
        .boundary
        .iter()
        .map(|[x, y]| PointR2::parse(x, y).map_err(parse_err))
        .collect::<Result<Vec<_>, _>>()?;
    let interior = raw
        .vertices
        .iter()
        .map(|v| {
            if v.id == 0 {
                return Err(SubdivisionError::Parse("vertex id 0 is not allowed".into()));
            }
            Ok((v.id, PointR2::parse(&v.x, &v.y).map_err(parse_err)?, weight_spec(&v.weight)?))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let edges = raw
        .edges
        .iter()
        .map(|[a, b]| Ok((vertex_id(a)?, vertex_id(b)?)))
        .collect::<Result<Vec<_>, SubdivisionError>>()?;
    let faces = raw
        .faces
        .iter()
        .map(|f| f.iter().map(vertex_id).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()?;
    let sqrt3 = raw
        .sqrt3_coordinates
        .iter()
        .map(|s| {
            let corner = match s.corner.parse::<VertexId>()? {
                VertexId::Corner(k) => k,
                VertexId::Interior(_) => {
                    return Err(SubdivisionError::Parse(format!("sqrt3 annotation on non-corner {}", s.corner)))
                }
            };
            let axis = match s.axis.as_str() {
                "x" => Axis::X,
                "y" => Axis::Y,
                a => return Err(SubdivisionError::Parse(format!("bad axis {a:?}"))),
            };
            Ok(Sqrt3Coordinate {
                corner,
                axis,
                scale: parse_decimal(&s.scale).map_err(parse_err)?,
                offset: parse_decimal(&s.offset).map_err(parse_err)?,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let hash = hex::encode(Sha256::digest(text.as_bytes()));
    WeightedSubdivision::from_parts(
        raw.name.as_deref().unwrap_or("subdivision"),
        boundary,
        interior,
        edges,
        faces,
        sqrt3,
        eps.clone(),
        hash,
    )
}

/// Parses and rejects any structural invariant violation.
pub fn parse_subdivision(text: &str, eps: &Rational) -> Result<WeightedSubdivision, SubdivisionError> {
    let s = parse_subdivision_unchecked(text, eps)?;
    let report = validate(&s);
    if let Some(c) = report.checks.iter().find(|c| c.structural && !c.passed) {
        return Err(SubdivisionError::Invariant { check: c.name.to_string(), detail: c.detail() });
    }
    Ok(s)
}

pub fn load_subdivision(path: &Path) -> Result<WeightedSubdivision, SubdivisionError> {
    load_subdivision_with_eps(path, &default_eps())
}

pub fn load_subdivision_with_eps(path: &Path, eps: &Rational) -> Result<WeightedSubdivision, SubdivisionError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| SubdivisionError::Io { path: path.display().to_string(), message: e.to_string() })?;
    let mut s = parse_subdivision(&text, eps)?;
    if s.name == "subdivision" {
        if let Some(stem) = path.file_stem() {
            s.name = stem.to_string_lossy().into_owned();
        }
    }
    Ok(s)
}
