//! Lower-order seminorm of `(u - l)_-` on `B_{R/2}` against the measure of
//! the sublevel set `{u < l} ∩ B_R`.

use serde::Serialize;

use crate::error::{LabError, Result};
use crate::exponent::ExponentField;
use crate::geometry::Point;
use crate::grid::{Grid, GridFunction};

use super::pair_exponent_range;
use super::truncation::{truncate_level, Part};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SublevelReport {
    pub level: f64,
    pub lhs: f64,
    /// `l^q R^{-sigma q} max{|A|, |A|^{1+q/p_- - q/p_+}, |A|^{1+q/p_+ - q/p_-}}`
    pub shape: f64,
    pub sublevel_measure: f64,
    pub c_fit: f64,
    pub rhs: f64,
    pub pass: bool,
}

#[allow(clippy::too_many_arguments)]
pub fn sublevel_energy_check(
    grid: &Grid,
    field: &ExponentField,
    u: &GridFunction,
    x0: &Point,
    radius: f64,
    level: f64,
    sigma: f64,
    q: f64,
    constant: Option<f64>,
) -> Result<SublevelReport> {
    u.check_len(grid)?;
    grid.check_ball_inside(x0, radius)?;
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(LabError::argument("sigma", "sigma must lie in (0, 1)"));
    }
    if !(level > 0.0) {
        return Err(LabError::argument("level", "level must be positive"));
    }
    let n = grid.dim() as f64;
    let m = grid.measures();
    let ball = grid.ball_region(x0, radius).nodes;
    let half = grid.ball_region(x0, 0.5 * radius).nodes;
    let (p_minus, p_plus) = pair_exponent_range(grid, field, &ball);
    if !(q >= 1.0 && q < p_minus) {
        return Err(LabError::argument("q", format!("need 1 <= q < p_- = {p_minus}, got {q}")));
    }
    let w = truncate_level(u, level, Part::Negative);
    let mut lhs = 0.0;
    for &i in &half {
        for &j in &half {
            if i != j && w[i] != w[j] {
                let d = grid.node(i).dist(&grid.node(j));
                lhs += m[i] * m[j] * (w[i] - w[j]).abs().powf(q) / d.powf(n + sigma * q);
            }
        }
    }
    let measure: f64 = ball.iter().filter(|&&i| u[i] < level).map(|&i| m[i]).sum();
    let a = q / p_minus - q / p_plus;
    let shape = level.powf(q)
        * radius.powf(-sigma * q)
        * measure.max(measure.powf(1.0 + a)).max(measure.powf(1.0 - a));
    let c_fit = if lhs == 0.0 {
        0.0
    } else if shape > 0.0 {
        lhs / shape
    } else {
        f64::INFINITY
    };
    let rhs = constant.unwrap_or(c_fit) * shape;
    Ok(SublevelReport {
        level,
        lhs,
        shape,
        sublevel_measure: measure,
        c_fit,
        rhs,
        pass: lhs <= rhs * (1.0 + 1e-12),
    })
}
