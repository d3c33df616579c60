use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};

use super::io::{fmt_num, read_grid_function, to_json, write_energy_history, write_grid_function, write_json};
use super::{Cli, Command, ErrorJson, NormKind, RunConfig};
use crate::error::{LabError, Result};
use crate::exponent::{check_log_holder, check_p1, check_p2, field_from_preset, ExponentField, ExponentKind};
use crate::geometry::{DomainBox, Point};
use crate::grid::{tail, Discretization, Grid, TailSign};
use crate::regularity::caccioppoli::caccioppoli_report;
use crate::regularity::degiorgi::{degiorgi_iterate, DeGiorgiParams};
use crate::regularity::growth::{calibrate_delta, GrowthScenario};
use crate::regularity::holder_fit::holder_exponent_fit;
use crate::regularity::sublevel::sublevel_energy_check;
use crate::regularity::sup_bound::{sup_bound_check, SupBoundInput};
use crate::solver::{comparison_check, minimize, ComparisonReport};
use crate::spaces::{combined_modular, combined_norm, gagliardo_modular, lebesgue_modular, lebesgue_norm, sobolev_seminorm};

const DEFAULT_OUT: &str = "out";

pub(super) fn dispatch(cli: &Cli, stdout: &mut dyn Write) -> Result<bool> {
    match &cli.command {
        Command::Solve => solve(&load(cli)?, &out_dir(cli)?, stdout),
        Command::Norms { input, kind } => norms(&load(cli)?, input, *kind, &out_dir(cli)?, stdout),
        Command::Diagnose { input } => diagnose(&load(cli)?, input, &out_dir(cli)?, stdout),
        Command::Iterate { c, b, betas, y0, jmax } => {
            let params = DeGiorgiParams { c: *c, b: *b, betas: betas.clone(), y0: *y0 };
            iterate(&params, *jmax, cli.out.as_deref(), stdout)
        }
        Command::CheckExponent { preset, value, table } => {
            let cfg = cli.config.as_ref().map(|_| load(cli)).transpose()?;
            check_exponent(cfg.as_ref(), cli.seed, preset.as_deref(), *value, table.as_deref(), cli.out.as_deref(), stdout)
        }
    }
}

fn load(cli: &Cli) -> Result<RunConfig> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| LabError::argument("config", "this subcommand needs --config PATH"))?;
    let cfg = RunConfig::parse_file(path)?;
    Ok(match cli.seed {
        Some(seed) => cfg.with_seed(seed),
        None => cfg,
    })
}

fn out_dir(cli: &Cli) -> Result<PathBuf> {
    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn emit<T: Serialize>(stdout: &mut dyn Write, value: &T) -> Result<()> {
    writeln!(stdout, "{}", to_json(value))?;
    Ok(())
}

#[derive(Serialize)]
struct SolveSummary {
    iterations: usize,
    final_residual: f64,
    energy_history_path: String,
    comparison: ComparisonReport,
}

const SOLUTION_FILE: &str = "solution.csv";
const HISTORY_FILE: &str = "energy_history.csv";

fn solve(cfg: &RunConfig, out: &Path, stdout: &mut dyn Write) -> Result<bool> {
    let config = cfg.solve_config();
    let (grid, result) = match minimize(&config) {
        Ok(ok) => ok,
        Err(LabError::NonConvergence { iterations, residual, partial }) => {
            // keep the partial iterate for inspection
            let grid = Grid::new(config.grid)?;
            write_grid_function(&out.join(SOLUTION_FILE), &grid, &partial.u)?;
            write_energy_history(&out.join(HISTORY_FILE), &partial.energy_history)?;
            return Err(LabError::NonConvergence { iterations, residual, partial });
        }
        Err(e) => return Err(e),
    };
    write_grid_function(&out.join(SOLUTION_FILE), &grid, &result.u)?;
    write_energy_history(&out.join(HISTORY_FILE), &result.energy_history)?;
    let comparison = comparison_check(&grid, &result.u, &config.exterior.values(&grid));
    let summary = SolveSummary {
        iterations: result.iterations,
        final_residual: result.final_residual,
        energy_history_path: HISTORY_FILE.to_string(),
        comparison,
    };
    write_json(&out.join("solve.json"), &summary)?;
    emit(stdout, &summary)?;
    Ok(summary.comparison.pass)
}

fn norms(cfg: &RunConfig, input: &Path, kind: NormKind, out: &Path, stdout: &mut dyn Write) -> Result<bool> {
    let grid = Grid::new(cfg.grid_spec())?;
    let u = read_grid_function(input, &grid)?;
    let field = cfg.exponent();
    let s = cfg.solve.s;
    let tol = cfg.diagnostics.norm_tol;
    let region = grid.box_region(grid.omega());
    let (modular, norm) = match kind {
        NormKind::Lebesgue => (
            lebesgue_modular(&grid, field, &u, &region)?,
            lebesgue_norm(&grid, field, &u, &region, tol)?,
        ),
        NormKind::Gagliardo => (
            gagliardo_modular(&grid, field, s, &u, &region, &region)?,
            sobolev_seminorm(&grid, field, s, &u, &region, tol)?,
        ),
        NormKind::Combined => (
            combined_modular(&grid, field, s, &u, &region)?,
            combined_norm(&grid, field, s, &u, &region, tol)?,
        ),
    };
    let report = json!({
        "kind": modular.kind,
        "modular": modular.value,
        "norm": norm.value,
        "bracket": [norm.bracket.0, norm.bracket.1],
        "iterations": norm.iterations,
    });
    write_json(&out.join("norms.json"), &report)?;
    emit(stdout, &report)?;
    Ok(true)
}

fn outcome<T: Serialize>(r: Result<T>) -> Value {
    match r {
        Ok(v) => serde_json::to_value(v).expect("serializable report"),
        Err(e) => json!({ "error": ErrorJson::from(&e) }),
    }
}

/// Value at fraction `t` of the sorted sample (nearest rank from below).
fn quantile(sorted: &[f64], t: f64) -> f64 {
    sorted[(t * (sorted.len() - 1) as f64) as usize]
}

fn diagnose(cfg: &RunConfig, input: &Path, out: &Path, stdout: &mut dyn Write) -> Result<bool> {
    let grid = Grid::new(cfg.grid_spec())?;
    let u = read_grid_function(input, &grid)?;
    let field = cfg.exponent();
    let (s, sigma) = (cfg.solve.s, cfg.solve.sigma);
    let d = &cfg.diagnostics;
    let x0 = cfg.center();
    let big_r = d.radius;
    let r = d.inner_ratio * big_r;

    let disc = Discretization::new(&grid, field, s)?;
    let residual = disc.residual_norm(&u);
    let comparison = comparison_check(&grid, &u, &cfg.solve.exterior.values(&grid));

    let mut interior: Vec<f64> = grid.interior_indices().iter().map(|&i| u[i]).collect();
    interior.sort_by(f64::total_cmp);
    let mut caccioppoli = Vec::new();
    let mut hard_pass = true;
    for t in [0.25, 0.5, 0.75] {
        let rep = caccioppoli_report(&grid, field, s, &u, &x0, r, big_r, quantile(&interior, t), residual)?;
        hard_pass &= rep.satisfied;
        caccioppoli.push(rep);
    }

    let tail_plus = tail(&grid, field, s, &u, &x0, big_r, TailSign::Plus)?;
    let tail_minus = tail(&grid, field, s, &u, &x0, big_r, TailSign::Minus)?;

    let sup_bound = sup_bound_check(
        &SupBoundInput {
            grid: &grid,
            field,
            s,
            sigma,
            x0,
            radius: big_r,
            q: cfg.solve.q,
            constant: d.sup_constant,
        },
        &u,
    );

    // The equation is invariant under constant shifts, so the shifted
    // solution is a nonnegative supersolution.
    let floor = u.values().iter().copied().fold(f64::INFINITY, f64::min);
    let shifted = u.map(|v| v - floor);
    let growth_nodes = grid.closed_ball_nodes(&x0, d.growth_radius);
    let growth = if growth_nodes.is_empty() {
        Err(LabError::Resolution("growth ball contains no grid nodes".into()))
    } else {
        let height = d.growth_height.unwrap_or_else(|| {
            let mut vals: Vec<f64> = growth_nodes.iter().map(|&i| shifted[i]).collect();
            vals.sort_by(f64::total_cmp);
            quantile(&vals, 0.5)
        });
        let scenario = GrowthScenario {
            height,
            delta: 0.125,
            gamma: d.growth_gamma,
            radius: d.growth_radius,
            center: x0,
            s,
            sigma,
        };
        calibrate_delta(&grid, field, &shifted, &scenario)
    };

    let level = quantile(&interior, 0.75) - floor;
    let q = cfg.solve.q.unwrap_or(1.0);
    let sublevel = sublevel_energy_check(&grid, field, &shifted, &x0, big_r, level, sigma, q, None);
    let holder = holder_exponent_fit(&grid, &u, &x0, d.holder_radius, d.holder_levels);

    let report = json!({
        "residual": residual,
        "comparison": comparison,
        "caccioppoli": caccioppoli,
        "tail_plus": tail_plus,
        "tail_minus": tail_minus,
        "sup_bound": outcome(sup_bound),
        "growth": outcome(growth),
        "sublevel": outcome(sublevel),
        "holder": outcome(holder),
        "hard_pass": hard_pass,
    });
    write_json(&out.join("diagnostics.json"), &report)?;
    emit(stdout, &report)?;
    Ok(hard_pass)
}

fn iterate(params: &DeGiorgiParams, jmax: usize, out: Option<&Path>, stdout: &mut dyn Write) -> Result<bool> {
    let report = degiorgi_iterate(params, jmax)?;
    let mut csv = String::from("j,y,bound\n");
    let beta_last = *params.betas.last().expect("validated");
    for row in &report.rows {
        // powers of the inputs directly, so exact cases print exactly
        let bound = params.c.powf(-1.0 / beta_last)
            * params.b.powf(-1.0 / (beta_last * beta_last) - row.j as f64 / beta_last);
        let y = bound * (row.ln_y - row.ln_bound).exp();
        csv.push_str(&format!("{},{},{}\n", row.j, fmt_num(y), fmt_num(bound)));
    }
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("iterate.csv"), &csv)?;
    }
    stdout.write_all(csv.as_bytes())?;
    Ok(report.bound_holds != Some(false))
}

fn check_exponent(
    cfg: Option<&RunConfig>,
    seed: Option<u64>,
    preset: Option<&str>,
    value: Option<f64>,
    table: Option<&Path>,
    out: Option<&Path>,
    stdout: &mut dyn Write,
) -> Result<bool> {
    let field: ExponentField = match preset {
        Some(name) => {
            let kind = ExponentKind::parse(name)
                .ok_or_else(|| LabError::argument("preset", format!("unknown preset `{name}`")))?;
            field_from_preset(kind, value, table)?
        }
        None => match cfg {
            Some(c) => c.exponent().clone(),
            None => return Err(LabError::argument("preset", "give --preset or --config")),
        },
    };
    let (domain, outer, seed) = match cfg {
        Some(c) => (c.grid.omega(), c.grid.r_trunc, seed.unwrap_or(c.seed)),
        None => (DomainBox::interval(-1.0, 1.0), 4.0, seed.unwrap_or(0)),
    };
    let half = if domain.dim == 2 { domain.half_width[0].min(domain.half_width[1]) } else { domain.half_width[0] };
    let c = domain.center;
    let centers = [c, Point::new(c.x + 0.4 * half, c.y), Point::new(c.x - 0.4 * half, c.y)];
    let radii: Vec<f64> = [0.01, 0.05, 0.1, 0.2, 0.4].iter().map(|t| t * half).collect();
    let p1 = check_p1(&field, &domain, &radii, &centers[..1], 3)?;
    let p2 = check_p2(&field, &domain, &radii[1..4], &centers[..2], outer, 1e-12)?;
    let log_holder = check_log_holder(&field, &domain, &[1e-1, 1e-2, 1e-3, 1e-4, 1e-6], seed, 0.05)?;
    let report = json!({
        "preset": field.kind().name(),
        "p_min": field.p_min(),
        "p_max": field.p_max(),
        "p1": p1,
        "p2": p2,
        "log_holder": log_holder,
    });
    if let Some(dir) = out {
        std::fs::create_dir_all(dir)?;
        write_json(&dir.join("exponent_report.json"), &report)?;
    }
    emit(stdout, &report)?;
    Ok(true)
}
