//! Oscillation decay over balls `B_{4^{-j} R}(x0)` and the fitted exponent.

use serde::Serialize;

use crate::error::{LabError, Result};
use crate::geometry::Point;
use crate::grid::{Grid, GridFunction};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HolderFit {
    pub center: Point,
    pub radius: f64,
    pub radii: Vec<f64>,
    pub oscillations: Vec<f64>,
    pub alpha: Option<f64>,
    pub fit_residual: f64,
    pub defined: bool,
}

pub const MIN_LEVELS: usize = 3;

/// Levels are kept while the radius is at least two mesh widths, up to
/// `j_max`. Balls are closed.
pub fn holder_exponent_fit(grid: &Grid, u: &GridFunction, x0: &Point, radius: f64, j_max: usize) -> Result<HolderFit> {
    u.check_len(grid)?;
    grid.check_ball_inside(x0, radius)?;
    let mut radii = Vec::new();
    let mut oscillations = Vec::new();
    for j in 0..=j_max {
        let r = radius * 0.25f64.powi(j as i32);
        if r < 2.0 * grid.h() * (1.0 - 1e-9) {
            break;
        }
        let nodes = grid.closed_ball_nodes(x0, r);
        let hi = nodes.iter().map(|&i| u[i]).fold(f64::NEG_INFINITY, f64::max);
        let lo = nodes.iter().map(|&i| u[i]).fold(f64::INFINITY, f64::min);
        radii.push(r);
        oscillations.push(hi - lo);
    }
    if radii.len() < MIN_LEVELS {
        return Err(LabError::Resolution(format!(
            "only {} dyadic levels above twice the mesh width; need {MIN_LEVELS}",
            radii.len()
        )));
    }
    let defined = oscillations[0] > 0.0;
    let points: Vec<(f64, f64)> = radii
        .iter()
        .zip(&oscillations)
        .filter(|(_, &o)| o > 0.0)
        .map(|(&r, &o)| (r.ln(), o.ln()))
        .collect();
    let (alpha, fit_residual) = if defined && points.len() >= 2 {
        let k = points.len() as f64;
        let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
        let my = points.iter().map(|p| p.1).sum::<f64>() / k;
        let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
        let slope = sxy / sxx;
        let rms = (points
            .iter()
            .map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2))
            .sum::<f64>()
            / k)
            .sqrt();
        (Some(slope), rms)
    } else {
        (None, 0.0)
    };
    Ok(HolderFit {
        center: *x0,
        radius,
        radii,
        oscillations,
        alpha,
        fit_residual,
        defined,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::DomainBox;
    use crate::grid::GridSpec;

    fn grid() -> Grid {
        Grid::new(GridSpec { omega: DomainBox::interval(-1.0, 1.0), r_trunc: 2.0, nodes_per_axis: 401 }).unwrap()
    }

    #[test]
    fn linear_has_unit_exponent() {
        let g = grid();
        let fit = holder_exponent_fit(&g, &GridFunction::from_fn(&g, |p| p.x), &Point::ORIGIN, 0.64, 5).unwrap();
        assert_eq!(fit.radii.len(), 3);
        assert!((fit.alpha.unwrap() - 1.0).abs() < 1e-9);
        for (r, o) in fit.radii.iter().zip(&fit.oscillations) {
            assert!((o - 2.0 * r).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_is_undefined_and_coarse_grid_errors() {
        let g = grid();
        let fit = holder_exponent_fit(&g, &GridFunction::constant(&g, 1.0), &Point::ORIGIN, 0.64, 5).unwrap();
        assert!(!fit.defined && fit.alpha.is_none());
        let coarse = Grid::new(GridSpec { omega: DomainBox::interval(-1.0, 1.0), r_trunc: 2.0, nodes_per_axis: 41 }).unwrap();
        let u = GridFunction::from_fn(&coarse, |p| p.x);
        assert!(matches!(holder_exponent_fit(&coarse, &u, &Point::ORIGIN, 0.64, 5), Err(LabError::Resolution(_))));
    }
}
