//! Worst-case simulation of the geometric recursion
//! `Y_{j+1} = C b^j max_i Y_j^{1 + beta_i}`, carried out in logarithms so
//! that neither overflow nor underflow limits `j`.

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeGiorgiParams {
    pub c: f64,
    pub b: f64,
    /// Nonincreasing, positive.
    pub betas: Vec<f64>,
    pub y0: f64,
}

impl DeGiorgiParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.c >= 1.0 && self.c.is_finite()) {
            return Err(LabError::argument("C", format!("need C >= 1, got {}", self.c)));
        }
        if !(self.b > 1.0 && self.b.is_finite()) {
            return Err(LabError::argument("b", format!("need b > 1, got {}", self.b)));
        }
        if self.betas.is_empty() || self.betas.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
            return Err(LabError::argument("betas", "need at least one positive exponent"));
        }
        if self.betas.windows(2).any(|w| w[0] < w[1]) {
            return Err(LabError::argument("betas", "exponents must be listed in nonincreasing order"));
        }
        if !(self.y0 >= 0.0 && self.y0.is_finite()) {
            return Err(LabError::argument("y0", "Y0 must be finite and nonnegative"));
        }
        Ok(())
    }

    fn beta_first(&self) -> f64 {
        self.betas[0]
    }

    fn beta_last(&self) -> f64 {
        *self.betas.last().unwrap()
    }

    /// `ln min{C^{-1/beta_N} b^{-1/beta_N^2}, C^{-1/beta_1}}`.
    pub fn ln_threshold(&self) -> f64 {
        let (lc, lb) = (self.c.ln(), self.b.ln());
        let bn = self.beta_last();
        (-lc / bn - lb / (bn * bn)).min(-lc / self.beta_first())
    }

    /// `ln (C^{-1/beta_N} b^{-1/beta_N^2 - j/beta_N})`.
    pub fn ln_bound(&self, j: usize) -> f64 {
        let bn = self.beta_last();
        -self.c.ln() / bn - self.b.ln() / (bn * bn) - j as f64 * self.b.ln() / bn
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IterationRow {
    pub j: usize,
    pub ln_y: f64,
    pub ln_bound: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IterationReport {
    pub rows: Vec<IterationRow>,
    pub threshold_met: bool,
    /// Only present when the threshold is met.
    pub bound_holds: Option<bool>,
    /// `max_j (ln Y_j - ln bound_j)`; nonpositive when the bound holds.
    pub max_log_excess: f64,
}

const LOG_SLACK: f64 = 1e-12;

pub fn degiorgi_iterate(params: &DeGiorgiParams, j_max: usize) -> Result<IterationReport> {
    params.validate()?;
    let beta_last = params.beta_last();
    // Track e_j = ln Y_j - ln bound_j. The recursion becomes
    // e_{j+1} = max_i [(1 + beta_i) e_j + (beta_i - beta_N) ln bound_j],
    // which keeps the equality case exact instead of doubling rounding
    // errors at every step.
    let mut excess = params.y0.ln() - params.ln_bound(0);
    let mut rows = Vec::with_capacity(j_max + 1);
    let mut max_log_excess = f64::NEG_INFINITY;
    let mut within = true;
    for j in 0..=j_max {
        let ln_bound = params.ln_bound(j);
        max_log_excess = max_log_excess.max(excess);
        within &= excess <= LOG_SLACK * ln_bound.abs().max(1.0);
        rows.push(IterationRow { j, ln_y: excess + ln_bound, ln_bound });
        if excess == f64::NEG_INFINITY {
            continue;
        }
        excess = params
            .betas
            .iter()
            .map(|beta| (1.0 + beta) * excess + (beta - beta_last) * ln_bound)
            .fold(f64::NEG_INFINITY, f64::max);
    }
    let ln_threshold = params.ln_threshold();
    let threshold_met = params.y0.ln() <= ln_threshold + LOG_SLACK * ln_threshold.abs().max(1.0);
    let bound_holds = threshold_met.then_some(within);
    Ok(IterationReport {
        rows,
        threshold_met,
        bound_holds,
        max_log_excess,
    })
}
