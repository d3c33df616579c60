//! Energy minimization over interior nodal values with fixed exterior data.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::exponent::ExponentField;
use crate::geometry::Point;
use crate::grid::{Discretization, Grid, GridFunction, GridSpec};

/// Exterior (collar) data. Values on interior nodes are never read.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExteriorData {
    Constant { value: f64 },
    /// `slope * x`
    Linear { slope: f64 },
    /// `amplitude * sign(x)`
    Sign { amplitude: f64 },
    /// `amplitude * sin(frequency * x)`
    Sine { amplitude: f64, frequency: f64 },
    /// `|p|^2`
    Quadratic,
    /// `|x|^{1/2}`
    AbsSqrt,
    /// Piecewise constant on cells of side `cell`, with i.i.d. uniform values
    /// in `[lo, hi]`; independent of the mesh. Cells are half-open, so a cell
    /// edge on the domain boundary is resolved towards the exterior.
    Random { seed: u64, lo: f64, hi: f64, cell: f64 },
}

impl ExteriorData {
    pub fn eval(&self, p: &Point) -> f64 {
        match *self {
            ExteriorData::Constant { value } => value,
            ExteriorData::Linear { slope } => slope * p.x,
            ExteriorData::Sign { amplitude } => {
                if p.x > 0.0 {
                    amplitude
                } else if p.x < 0.0 {
                    -amplitude
                } else {
                    0.0
                }
            }
            ExteriorData::Sine { amplitude, frequency } => amplitude * (frequency * p.x).sin(),
            ExteriorData::Quadratic => p.x * p.x + p.y * p.y,
            ExteriorData::AbsSqrt => p.x.abs().sqrt(),
            ExteriorData::Random { seed, lo, hi, cell } => {
                let ix = (p.x / cell).floor() as i64 + (1 << 20);
                let iy = (p.y / cell).floor() as i64 + (1 << 20);
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(((ix as u64) << 32) | iy as u64);
                rng.gen_range(lo..=hi)
            }
        }
    }

    /// Values at every node of the grid. For piecewise constant data, nodes
    /// on the boundary of the domain take the value from the exterior side.
    pub fn values(&self, grid: &Grid) -> Vec<f64> {
        let omega = grid.omega();
        let tol = 1e-9 * grid.h();
        grid.nodes()
            .iter()
            .enumerate()
            .map(|(i, p)| {
                if !matches!(self, ExteriorData::Random { .. }) || grid.is_interior(i) {
                    return self.eval(p);
                }
                let mut q = [p.x, p.y];
                for (k, coord) in q.iter_mut().enumerate().take(grid.dim()) {
                    let offset = *coord - omega.center.coord(k);
                    if (offset.abs() - omega.half_width[k]).abs() <= tol {
                        *coord += offset.signum() * tol;
                    }
                }
                self.eval(&Point::new(q[0], q[1]))
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let finite = match *self {
            ExteriorData::Constant { value } => value.is_finite(),
            ExteriorData::Linear { slope } => slope.is_finite(),
            ExteriorData::Sign { amplitude } => amplitude.is_finite(),
            ExteriorData::Sine { amplitude, frequency } => amplitude.is_finite() && frequency.is_finite(),
            ExteriorData::Quadratic | ExteriorData::AbsSqrt => true,
            ExteriorData::Random { lo, hi, cell, .. } => lo.is_finite() && hi.is_finite() && lo <= hi && cell > 0.0,
        };
        if finite {
            Ok(())
        } else {
            Err(LabError::argument("exterior", "exterior data parameters must be finite, with lo <= hi and cell > 0"))
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolveConfig {
    pub s: f64,
    pub sigma: f64,
    pub q: Option<f64>,
    pub grid: GridSpec,
    pub field: ExponentField,
    pub exterior: ExteriorData,
    pub grad_tol: f64,
    pub max_iter: usize,
    pub step0: f64,
    pub backtrack: f64,
    pub seed: u64,
    /// Interior starting values (node order); replaces the default warm start.
    pub initial: Option<Vec<f64>>,
}

impl SolveConfig {
    pub fn new(grid: GridSpec, field: ExponentField, s: f64, exterior: ExteriorData) -> Self {
        SolveConfig {
            s,
            sigma: 0.5 * s,
            q: None,
            grid,
            field,
            exterior,
            grad_tol: 1e-8,
            max_iter: 20_000,
            step0: 1.0,
            backtrack: 0.5,
            seed: 0,
            initial: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.s > 0.0 && self.s < 1.0) {
            return Err(LabError::argument("s", format!("s must lie in (0, 1), got {}", self.s)));
        }
        if !(self.sigma > 0.0 && self.sigma < self.s) {
            return Err(LabError::argument("sigma", format!("sigma must lie in (0, s), got {}", self.sigma)));
        }
        if !(self.grad_tol > 0.0) {
            return Err(LabError::argument("grad_tol", "grad_tol must be positive"));
        }
        if !(self.step0 > 0.0) {
            return Err(LabError::argument("step0", "step0 must be positive"));
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return Err(LabError::argument("backtrack", "backtracking factor must lie in (0, 1)"));
        }
        if self.max_iter == 0 {
            return Err(LabError::argument("max_iter", "max_iter must be positive"));
        }
        if !(self.field.p_min() > 1.0) {
            return Err(LabError::argument(
                "field",
                format!("exponent lower bound must exceed 1, got {}", self.field.p_min()),
            ));
        }
        self.exterior.validate()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveResult {
    #[serde(skip)]
    pub u: GridFunction,
    pub iterations: usize,
    pub final_residual: f64,
    pub energy_history: Vec<f64>,
}

const ARMIJO: f64 = 1e-4;
const ROUNDOFF: f64 = 1e-14;
const WARM_START_STEPS: usize = 100;

struct Descent {
    iterations: usize,
    residual: f64,
    history: Vec<f64>,
    converged: bool,
}

/// Gradient descent with Barzilai-Borwein trial steps and monotone
/// backtracking. Updates the interior entries of `u` in place.
fn descend(
    disc: &Discretization,
    u: &mut GridFunction,
    tol: f64,
    max_iter: usize,
    step0: f64,
    factor: f64,
) -> Descent {
    let grid = disc.grid();
    let interior = grid.interior_indices();
    // gradient entries are 2 m_i (Lu)_i
    let weighted_residual = |g: &[f64]| g.iter().map(|gi| 0.5 * gi.abs()).fold(0.0, f64::max);

    let mut energy = disc.energy(u);
    let mut grad = disc.gradient(u);
    let mut residual = weighted_residual(&grad);
    let mut history = vec![energy];
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;
    let mut iterations = 0;

    loop {
        iterations += 1;
        if residual <= tol {
            return Descent { iterations, residual, history, converged: true };
        }
        if iterations > max_iter {
            return Descent { iterations: max_iter, residual, history, converged: false };
        }
        let x: Vec<f64> = interior.iter().map(|&i| u[i]).collect();
        let gnorm2: f64 = grad.iter().map(|g| g * g).sum();

        let mut step = match &prev {
            Some((x_old, g_old)) => {
                let (mut ss, mut sy) = (0.0, 0.0);
                for k in 0..x.len() {
                    let ds = x[k] - x_old[k];
                    ss += ds * ds;
                    sy += ds * (grad[k] - g_old[k]);
                }
                if sy > 0.0 && ss > 0.0 {
                    ss / sy
                } else {
                    step0
                }
            }
            None => step0,
        };

        let mut accepted = None;
        for _ in 0..80 {
            for (k, &i) in interior.iter().enumerate() {
                u.values_mut()[i] = x[k] - step * grad[k];
            }
            let trial = disc.energy(u);
            if trial.is_finite() {
                if trial <= energy - ARMIJO * step * gnorm2 {
                    accepted = Some((trial, disc.gradient(u)));
                    break;
                }
                // Near the minimum, energy differences drown in rounding;
                // accept if the energy does not grow beyond rounding and the
                // residual strictly improves.
                if trial <= energy + ROUNDOFF * energy.abs().max(1.0) {
                    let g_trial = disc.gradient(u);
                    if weighted_residual(&g_trial) < residual {
                        accepted = Some((trial.min(energy), g_trial));
                        break;
                    }
                }
            }
            step *= factor;
        }

        match accepted {
            Some((trial, g_new)) => {
                energy = trial;
                history.push(energy);
                prev = Some((x, std::mem::replace(&mut grad, g_new)));
                residual = weighted_residual(&grad);
            }
            None => {
                for (k, &i) in interior.iter().enumerate() {
                    u.values_mut()[i] = x[k];
                }
                return Descent { iterations, residual, history, converged: false };
            }
        }
    }
}

/// Minimize the discrete energy on an already discretized problem.
/// `u` carries the exterior data and the starting interior values.
pub fn minimize_on(
    disc: &Discretization,
    mut u: GridFunction,
    config: &SolveConfig,
) -> Result<SolveResult> {
    let d = descend(disc, &mut u, config.grad_tol, config.max_iter, config.step0, config.backtrack);
    let result = SolveResult {
        u,
        iterations: d.iterations,
        final_residual: d.residual,
        energy_history: d.history,
    };
    if d.converged {
        Ok(result)
    } else {
        Err(LabError::NonConvergence {
            iterations: d.iterations,
            residual: d.residual,
            partial: Box::new(result),
        })
    }
}

/// Exterior values from `g`, interior values set to the collar mean.
pub fn initial_state(grid: &Grid, exterior: &ExteriorData) -> GridFunction {
    let g = exterior.values(grid);
    let collar = grid.collar_indices();
    let lo = collar.iter().map(|&i| g[i]).fold(f64::INFINITY, f64::min);
    let hi = collar.iter().map(|&i| g[i]).fold(f64::NEG_INFINITY, f64::max);
    // clamped so that constant data start (and stay) exactly constant
    let mean = (collar.iter().map(|&i| g[i]).sum::<f64>() / collar.len() as f64).clamp(lo, hi);
    let values = (0..grid.len())
        .map(|i| if grid.is_interior(i) { mean } else { g[i] })
        .collect();
    GridFunction::new(values).expect("finite exterior data")
}

/// Solve the discrete Dirichlet problem described by `config`.
pub fn minimize(config: &SolveConfig) -> Result<(Grid, SolveResult)> {
    config.validate()?;
    let grid = Grid::new(config.grid)?;
    let mut u = initial_state(&grid, &config.exterior);
    if let Some(v) = u.values().iter().position(|v| !v.is_finite()) {
        return Err(LabError::argument("exterior", format!("exterior data not finite at node {v}")));
    }
    match &config.initial {
        Some(init) => {
            if init.len() != grid.interior_indices().len() {
                return Err(LabError::argument(
                    "initial",
                    format!("expected {} interior values, got {}", grid.interior_indices().len(), init.len()),
                ));
            }
            for (k, &i) in grid.interior_indices().iter().enumerate() {
                u.values_mut()[i] = init[k];
            }
        }
        None => {
            let quadratic = ExponentField::constant(2.0)?;
            let warm = Discretization::new(&grid, &quadratic, config.s)?;
            descend(&warm, &mut u, config.grad_tol, WARM_START_STEPS, config.step0, config.backtrack);
        }
    }
    let disc = Discretization::new(&grid, &config.field, config.s)?;
    let result = minimize_on(&disc, u, config)?;
    Ok((grid, result))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub pass: bool,
    pub lower: f64,
    pub upper: f64,
    pub worst_node: Option<usize>,
    /// Largest distance of an interior value outside `[lower, upper]`.
    pub worst_violation: f64,
}

pub const COMPARISON_TOL: f64 = 1e-8;

/// Discrete maximum principle: interior values lie within the collar range.
pub fn comparison_check(grid: &Grid, u: &GridFunction, g: &[f64]) -> ComparisonReport {
    let collar = grid.collar_indices();
    let lower = collar.iter().map(|&i| g[i]).fold(f64::INFINITY, f64::min);
    let upper = collar.iter().map(|&i| g[i]).fold(f64::NEG_INFINITY, f64::max);
    let mut worst_node = None;
    let mut worst_violation = 0.0;
    for &i in grid.interior_indices() {
        let v = (lower - u[i]).max(u[i] - upper);
        if v > worst_violation {
            worst_violation = v;
            worst_node = Some(i);
        }
    }
    ComparisonReport {
        pass: worst_violation <= COMPARISON_TOL,
        lower,
        upper,
        worst_node,
        worst_violation,
    }
}
