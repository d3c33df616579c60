//! Quantitative regularity checks evaluated on grid functions.

pub mod algebraic;
pub mod caccioppoli;
pub mod degiorgi;
pub mod growth;
pub mod holder_fit;
pub mod sublevel;
pub mod sup_bound;
pub mod truncation;

use crate::exponent::ExponentField;
use crate::grid::Grid;

/// `p_-` and `p_+` over all node pairs (diagonal included) of a node set.
pub(crate) fn pair_exponent_range(grid: &Grid, field: &ExponentField, nodes: &[usize]) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &i in nodes {
        let xi = grid.node(i);
        for &j in nodes {
            let p = field.eval(&xi, &grid.node(j));
            lo = lo.min(p);
            hi = hi.max(p);
        }
    }
    (lo, hi)
}

/// Fractional Sobolev conjugate `n p / (n - sigma p)`, infinite when `sigma p >= n`.
pub fn critical_exponent(dim: usize, sigma: f64, p: f64) -> f64 {
    let n = dim as f64;
    if sigma * p >= n {
        f64::INFINITY
    } else {
        n * p / (n - sigma * p)
    }
}
