use serde::Serialize;

use crate::error::{LabError, Result};
use crate::grid::signed_power;

pub const ALGEBRAIC_SLACK: f64 = 1e-9;

/// `(p_+ / p_-) (2 p_+)^{p_+ - 1}`.
pub fn algebraic_constant(p_minus: f64, p_plus: f64) -> f64 {
    p_plus / p_minus * (2.0 * p_plus).powf(p_plus - 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct AlgebraicCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Discrete product-rule inequality for `a, b >= 0`, `tau1, tau2 in [0, 1]`:
///
/// `|a-b|^{p-2}(a-b)(a tau1^{p+} - b tau2^{p+})
///   >= |a-b|^p max(tau1, tau2)^{p+} / 2 - C max(a, b)^p |tau1 - tau2|^p`.
pub fn algebraic_inequality_check(
    a: f64,
    b: f64,
    tau1: f64,
    tau2: f64,
    p: f64,
    p_minus: f64,
    p_plus: f64,
) -> Result<AlgebraicCheck> {
    if !(a >= 0.0 && b >= 0.0) {
        return Err(LabError::argument("a", "a and b must be nonnegative"));
    }
    if !((0.0..=1.0).contains(&tau1) && (0.0..=1.0).contains(&tau2)) {
        return Err(LabError::argument("tau", "tau1 and tau2 must lie in [0, 1]"));
    }
    if !(p_minus > 1.0 && p_minus <= p && p <= p_plus && p_plus.is_finite()) {
        return Err(LabError::argument("p", format!("need 1 < p_- <= p <= p_+, got {p_minus}, {p}, {p_plus}")));
    }
    let d = a - b;
    let lhs = signed_power(d, p) * (a * tau1.powf(p_plus) - b * tau2.powf(p_plus));
    let rhs = 0.5 * d.abs().powf(p) * tau1.max(tau2).powf(p_plus)
        - algebraic_constant(p_minus, p_plus) * a.max(b).powf(p) * (tau1 - tau2).abs().powf(p);
    Ok(AlgebraicCheck {
        lhs,
        rhs,
        holds: lhs >= rhs - ALGEBRAIC_SLACK,
    })
}
