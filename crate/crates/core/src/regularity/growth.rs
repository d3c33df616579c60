//! Hypotheses and conclusion of the growth lemma for nonnegative
//! supersolutions, and calibration of its `delta`.

use serde::Serialize;

use crate::error::Result;
use crate::exponent::{check_p2, ExponentField};
use crate::geometry::Point;
use crate::grid::{Grid, GridFunction};

use super::{critical_exponent, pair_exponent_range};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GrowthScenario {
    pub height: f64,
    pub delta: f64,
    pub gamma: f64,
    pub radius: f64,
    pub center: Point,
    pub s: f64,
    pub sigma: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Hypothesis {
    pub name: &'static str,
    pub holds: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthReport {
    pub scenario: GrowthScenario,
    pub hypotheses: Vec<Hypothesis>,
    pub failed: Vec<&'static str>,
    /// Present when every hypothesis holds.
    pub conclusion: Option<bool>,
    pub min_inner: f64,
}

impl GrowthReport {
    pub fn hypotheses_hold(&self) -> bool {
        self.failed.is_empty()
    }
}

struct Quantities {
    lower: f64,
    upper: f64,
    fraction: f64,
    p_minus: f64,
    p_plus: f64,
    tail: f64,
    p2_pass: bool,
    min_inner: f64,
}

fn measure(grid: &Grid, field: &ExponentField, u: &GridFunction, sc: &GrowthScenario) -> Result<Quantities> {
    grid.check_ball_inside(&sc.center, sc.radius)?;
    let n = grid.dim() as f64;
    let m = grid.measures();
    let ball = grid.ball_region(&sc.center, sc.radius).nodes;
    let half = grid.ball_region(&sc.center, 0.5 * sc.radius).nodes;
    let quarter = grid.ball_region(&sc.center, 0.25 * sc.radius).nodes;
    let three_quarter = grid.ball_region(&sc.center, 0.75 * sc.radius).nodes;
    let lower = ball.iter().map(|&i| u[i]).fold(f64::INFINITY, f64::min);
    let upper = ball.iter().map(|&i| u[i]).fold(f64::NEG_INFINITY, f64::max);
    let half_measure: f64 = half.iter().map(|&i| m[i]).sum();
    let high: f64 = half.iter().filter(|&&i| u[i] >= sc.height).map(|&i| m[i]).sum();
    let (p_minus, p_plus) = pair_exponent_range(grid, field, &ball);
    let far: Vec<usize> = (0..grid.len())
        .filter(|&j| u[j] < 0.0 && grid.node(j).dist(&sc.center) >= sc.radius)
        .collect();
    let tail = three_quarter
        .iter()
        .map(|&i| {
            far.iter()
                .map(|&j| {
                    let p = field.eval(&grid.node(i), &grid.node(j));
                    m[j] * (-u[j]).powf(p - 1.0) / grid.node(j).dist(&sc.center).powf(n + sc.s * p)
                })
                .sum::<f64>()
        })
        .fold(0.0, f64::max);
    let outer = grid.spec().r_trunc;
    let p2 = check_p2(field, grid.omega(), &[sc.radius], &[sc.center], outer, 1e-12)?;
    let min_inner = quarter.iter().map(|&i| u[i]).fold(f64::INFINITY, f64::min);
    Ok(Quantities {
        lower,
        upper,
        fraction: if half_measure > 0.0 { high / half_measure } else { 0.0 },
        p_minus,
        p_plus,
        tail,
        p2_pass: p2.pass,
        min_inner,
    })
}

fn tail_allowance(sc: &GrowthScenario, p_minus: f64, p_plus: f64) -> f64 {
    let dh = sc.delta * sc.height;
    sc.radius.powf(-sc.s * p_plus) * dh.powf(p_plus - 1.0) + sc.radius.powf(-sc.s * p_minus) * dh.powf(p_minus - 1.0)
}

fn assess(grid: &Grid, q: &Quantities, sc: &GrowthScenario) -> GrowthReport {
    let critical = critical_exponent(grid.dim(), sc.sigma, q.p_minus);
    let allowance = tail_allowance(sc, q.p_minus, q.p_plus);
    let mut hypotheses = vec![
        Hypothesis {
            name: "0 <= u <= 2H on B_R",
            holds: q.lower >= 0.0 && q.upper <= 2.0 * sc.height,
            detail: format!("range [{}, {}]", q.lower, q.upper),
        },
        Hypothesis {
            name: "|B_{R/2} ∩ {u >= H}| >= gamma |B_{R/2}|",
            holds: q.fraction >= sc.gamma,
            detail: format!("fraction {}", q.fraction),
        },
        Hypothesis {
            name: "H^(p+ - p-) <= 2",
            holds: sc.height.powf(q.p_plus - q.p_minus) <= 2.0,
            detail: format!("p- = {}, p+ = {}", q.p_minus, q.p_plus),
        },
        Hypothesis {
            name: "p+ < critical exponent",
            holds: q.p_plus < critical,
            detail: format!("critical {critical}"),
        },
        Hypothesis {
            name: "R^s <= delta H",
            holds: sc.radius.powf(sc.s) <= sc.delta * sc.height,
            detail: format!("R^s = {}, delta H = {}", sc.radius.powf(sc.s), sc.delta * sc.height),
        },
        Hypothesis {
            name: "tail of u_- within allowance",
            holds: q.tail <= allowance,
            detail: format!("tail {}, allowance {allowance}", q.tail),
        },
        Hypothesis {
            name: "exterior exponent comparison on B_R",
            holds: q.p2_pass,
            detail: String::new(),
        },
    ];
    if !(sc.delta > 0.0 && sc.delta <= 0.125 && sc.gamma > 0.0 && sc.gamma < 1.0 && sc.radius < 1.0) {
        hypotheses.push(Hypothesis {
            name: "scenario ranges",
            holds: false,
            detail: "need delta in (0, 1/8], gamma in (0, 1), R < 1".into(),
        });
    }
    let failed: Vec<&'static str> = hypotheses.iter().filter(|h| !h.holds).map(|h| h.name).collect();
    let conclusion = failed.is_empty().then_some(q.min_inner >= sc.delta * sc.height);
    GrowthReport {
        scenario: *sc,
        hypotheses,
        failed,
        conclusion,
        min_inner: q.min_inner,
    }
}

/// Check every hypothesis on the grid; the conclusion `u >= delta H` on
/// `B_{R/4}` is evaluated only when all of them hold.
pub fn growth_lemma_check(
    grid: &Grid,
    field: &ExponentField,
    u: &GridFunction,
    scenario: &GrowthScenario,
) -> Result<GrowthReport> {
    u.check_len(grid)?;
    let q = measure(grid, field, u, scenario)?;
    Ok(assess(grid, &q, scenario))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeltaCalibration {
    /// Smallest `delta in (0, 1/8]` meeting every hypothesis, if any.
    pub delta: Option<f64>,
    pub report: GrowthReport,
}

/// Bisect for the smallest admissible `delta`: the hypotheses only get easier
/// as `delta` grows, while the conclusion only gets harder.
pub fn calibrate_delta(
    grid: &Grid,
    field: &ExponentField,
    u: &GridFunction,
    scenario: &GrowthScenario,
) -> Result<DeltaCalibration> {
    u.check_len(grid)?;
    let q = measure(grid, field, u, scenario)?;
    let at = |delta: f64| assess(grid, &q, &GrowthScenario { delta, ..*scenario });
    let top = at(0.125);
    if !top.hypotheses_hold() {
        return Ok(DeltaCalibration { delta: None, report: top });
    }
    let (mut lo, mut hi) = (0.0, 0.125);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if at(mid).hypotheses_hold() {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(DeltaCalibration { delta: Some(hi), report: at(hi) })
}
