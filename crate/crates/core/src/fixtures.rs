//! Subdivision fixtures shipped with the crate.

use crate::geom::Rational;
use crate::subdivision::{parse_subdivision, SubdivisionError, WeightedSubdivision};

pub const TRIANGLE84: &str = include_str!("../fixtures/triangle84.json");
pub const SQUARE1: &str = include_str!("../fixtures/square1.json");
pub const STRIP2: &str = include_str!("../fixtures/strip2.json");
pub const HOOK2: &str = include_str!("../fixtures/hook2.json");

/// Source text of a bundled fixture by name, with or without the `.json` suffix.
pub fn source(name: &str) -> Option<&'static str> {
    match name.trim_end_matches(".json") {
        "triangle84" => Some(TRIANGLE84),
        "square1" => Some(SQUARE1),
        "strip2" => Some(STRIP2),
        "hook2" => Some(HOOK2),
        _ => None,
    }
}

pub fn load(name: &str, eps: &Rational) -> Result<WeightedSubdivision, SubdivisionError> {
    let text = source(name).ok_or_else(|| SubdivisionError::Io { path: name.into(), message: "no such fixture".into() })?;
    parse_subdivision(text, eps)
}
