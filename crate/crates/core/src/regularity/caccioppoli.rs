//! Energy estimate for level truncations of discrete solutions.
//!
//! Testing the discrete equation with `w_+ eta^{p_+}`, where `eta` is the
//! radial cutoff equal to 1 on `B_r` and vanishing outside `B_{(R+r)/2}`,
//! gives the estimate with
//! `C = max(2 C_alg 4^{p_+}, 2) / c`, `c = min(2^{p_- - 2}, 1) / 2`,
//! where `C_alg` is [`algebraic_constant`]. The halved `c` covers the pairs
//! where both values exceed the level, which the product inequality only
//! controls with the factor `1/2`. A nonzero nodal residual `rho` adds
//! `2 rho sum_{B_R} w_+ / c` to the right-hand side.

use serde::Serialize;

use crate::error::{LabError, Result};
use crate::exponent::ExponentField;
use crate::geometry::Point;
use crate::grid::{Grid, GridFunction};

use super::algebraic::algebraic_constant;
use super::pair_exponent_range;
use super::truncation::{truncate_level, Part};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CaccioppoliReport {
    pub k: f64,
    pub r: f64,
    pub outer_radius: f64,
    pub p_minus: f64,
    pub p_plus: f64,
    pub lhs_modular: f64,
    pub lhs_cross: f64,
    pub rhs_local: f64,
    pub rhs_tail: f64,
    pub c_explicit: f64,
    pub c_empirical: f64,
    pub slack: f64,
    pub satisfied: bool,
}

pub fn caccioppoli_constant(p_minus: f64, p_plus: f64) -> f64 {
    let c = 0.5 * 2f64.powf(p_minus - 2.0).min(1.0);
    (2.0 * algebraic_constant(p_minus, p_plus) * 4f64.powf(p_plus)).max(2.0) / c
}

/// Evaluate both sides for `w_± = (u - k)_±` on `B_r(x0) ⋐ B_R(x0)`.
/// `residual` is the nodal residual of `u` (zero for an exact discrete
/// solution); the guarantee behind `satisfied` only applies to solutions.
#[allow(clippy::too_many_arguments)]
pub fn caccioppoli_report(
    grid: &Grid,
    field: &ExponentField,
    s: f64,
    u: &GridFunction,
    x0: &Point,
    r: f64,
    big_r: f64,
    k: f64,
    residual: f64,
) -> Result<CaccioppoliReport> {
    u.check_len(grid)?;
    if !(r > 0.0 && r < big_r) {
        return Err(LabError::Geometry(format!("need 0 < r < R, got r = {r}, R = {big_r}")));
    }
    grid.check_ball_inside(x0, big_r)?;
    if 2.0 * big_r > grid.interaction_radius() {
        return Err(LabError::Geometry(format!(
            "ball diameter {} exceeds the interaction radius {}",
            2.0 * big_r,
            grid.interaction_radius()
        )));
    }
    let n = grid.dim() as f64;
    let m = grid.measures();
    let wp = truncate_level(u, k, Part::Positive);
    let wm = truncate_level(u, k, Part::Negative);
    let outer = grid.ball_region(x0, big_r).nodes;
    let inner = grid.ball_region(x0, r).nodes;
    let middle = grid.ball_region(x0, 0.5 * (big_r + r)).nodes;
    if inner.is_empty() {
        return Err(LabError::Resolution(format!("no node inside the inner ball of radius {r}")));
    }
    let (p_minus, p_plus) = pair_exponent_range(grid, field, &outer);
    let pair = |i: usize, j: usize| {
        let (xi, xj) = (grid.node(i), grid.node(j));
        (field.eval(&xi, &xj), xi.dist(&xj))
    };

    let mut lhs_modular = 0.0;
    for &i in &inner {
        for &j in &inner {
            if i != j && wp[i] != wp[j] {
                let (p, d) = pair(i, j);
                lhs_modular += m[i] * m[j] * (wp[i] - wp[j]).abs().powf(p) / d.powf(n + s * p);
            }
        }
    }
    let mut lhs_cross = 0.0;
    for &i in inner.iter().filter(|&&i| wp[i] > 0.0) {
        for &j in outer.iter().filter(|&&j| wm[j] > 0.0) {
            let (p, d) = pair(i, j);
            lhs_cross += m[i] * wp[i] * m[j] * wm[j].powf(p - 1.0) / d.powf(n + s * p);
        }
    }
    let gap = big_r - r;
    let mut rhs_local = 0.0;
    for &i in outer.iter().filter(|&&i| wp[i] > 0.0) {
        for &j in &outer {
            if i != j {
                let (p, d) = pair(i, j);
                rhs_local += m[i] * m[j] * (wp[i] / gap).powf(p) / d.powf(n - (1.0 - s) * p);
            }
        }
    }
    let exterior: Vec<usize> = (0..grid.len())
        .filter(|&j| wp[j] > 0.0 && grid.node(j).dist(x0) >= big_r)
        .collect();
    let ratio = 2.0 * big_r / gap;
    let sup_tail = middle
        .iter()
        .map(|&i| {
            exterior
                .iter()
                .map(|&j| {
                    let p = field.eval(&grid.node(i), &grid.node(j));
                    let dist = grid.node(j).dist(x0);
                    m[j] * wp[j].powf(p - 1.0) * (ratio / dist).powf(n + s * p)
                })
                .sum::<f64>()
        })
        .fold(0.0, f64::max);
    let mass: f64 = outer.iter().map(|&i| m[i] * wp[i]).sum();
    let rhs_tail = sup_tail * mass;

    let c_explicit = caccioppoli_constant(p_minus, p_plus);
    let c = 0.5 * 2f64.powf(p_minus - 2.0).min(1.0);
    let nodal_mass: f64 = outer.iter().map(|&i| wp[i]).sum();
    let lhs = lhs_modular + lhs_cross;
    let rhs = rhs_local + rhs_tail;
    let slack = 2.0 * residual.abs() * nodal_mass / c + 1e-12 * (lhs + c_explicit * rhs);
    let c_empirical = if rhs > 0.0 {
        lhs / rhs
    } else if lhs == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(CaccioppoliReport {
        k,
        r,
        outer_radius: big_r,
        p_minus,
        p_plus,
        lhs_modular,
        lhs_cross,
        rhs_local,
        rhs_tail,
        c_explicit,
        c_empirical,
        slack,
        satisfied: lhs <= c_explicit * rhs + slack,
    })
}
