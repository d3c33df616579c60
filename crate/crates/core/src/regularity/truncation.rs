use serde::{Deserialize, Serialize};

use crate::grid::GridFunction;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Part {
    Positive,
    Negative,
}

/// Nodal `(u - k)_+` or `(u - k)_-`.
pub fn truncate_level(u: &GridFunction, k: f64, part: Part) -> GridFunction {
    match part {
        Part::Positive => u.map(|v| (v - k).max(0.0)),
        Part::Negative => u.map(|v| (k - v).max(0.0)),
    }
}
