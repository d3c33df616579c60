//! Acceptance suite. Each criterion prints one PASS/FAIL line; the process
//! exits nonzero when any criterion fails.

use std::time::{Duration, Instant};

use nonlocal_lab::exponent::{check_log_holder, check_p1, check_p2, ExponentField};
use nonlocal_lab::geometry::{DomainBox, Point};
use nonlocal_lab::grid::{tail, Discretization, Grid, GridFunction, GridSpec, TailSign};
use nonlocal_lab::regularity::algebraic::algebraic_inequality_check;
use nonlocal_lab::regularity::caccioppoli::caccioppoli_report;
use nonlocal_lab::regularity::degiorgi::{degiorgi_iterate, DeGiorgiParams};
use nonlocal_lab::regularity::holder_fit::holder_exponent_fit;
use nonlocal_lab::solver::{comparison_check, minimize, ExteriorData, SolveConfig, COMPARISON_TOL};
use nonlocal_lab::spaces::{gagliardo_modular, lebesgue_modular, lebesgue_norm, sobolev_seminorm, DEFAULT_NORM_TOL};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn interval_grid(lo: f64, hi: f64, r_trunc: f64, nodes: usize) -> Grid {
    Grid::new(GridSpec {
        omega: DomainBox::interval(lo, hi),
        r_trunc,
        nodes_per_axis: nodes,
    })
    .unwrap()
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn iteration_exactness() -> Outcome {
    let start = Instant::now();
    let params = DeGiorgiParams { c: 1.0, b: 2.0, betas: vec![1.0], y0: 0.5 };
    let report = degiorgi_iterate(&params, 50).unwrap();
    let mut worst = f64::NEG_INFINITY;
    for row in &report.rows {
        let oracle = 0.5f64.powi(1 + row.j as i32);
        worst = worst.max(row.ln_y.exp() / oracle - 1.0);
    }
    let elapsed = start.elapsed();
    let pass = report.rows.len() == 51 && worst <= 1e-12 && elapsed < Duration::from_secs(1);
    outcome(pass, format!("max relative excess {worst:.3e} over j <= 50 in {elapsed:?}"))
}

fn oracle_product_inequality(a: f64, b: f64, t1: f64, t2: f64, p: f64, pm: f64, pp: f64) -> bool {
    let d = a - b;
    let lhs = d.abs().powf(p - 2.0) * d * (a * t1.powf(pp) - b * t2.powf(pp));
    let lhs = if d == 0.0 { 0.0 } else { lhs };
    let c = pp / pm * (2.0 * pp).powf(pp - 1.0);
    let rhs = 0.5 * d.abs().powf(p) * t1.max(t2).powf(pp) - c * a.max(b).powf(p) * (t1 - t2).abs().powf(p);
    lhs >= rhs - 1e-9
}

fn product_inequality_sweep() -> Outcome {
    let start = Instant::now();
    let ranges = [(1.1, 1.6), (1.5, 3.0), (2.5, 6.0)];
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut violations = 0usize;
    let mut disagreements = 0usize;
    let mut total = 0usize;
    for &(pm, pp) in &ranges {
        for _ in 0..100_000 {
            let a = 10f64.powf(rng.gen_range(-3.0..1.0));
            // every fourth sample puts b close to a
            let b = if rng.gen_bool(0.25) {
                a * (1.0 + rng.gen_range(-1e-3..1e-3))
            } else {
                10f64.powf(rng.gen_range(-3.0..1.0))
            };
            let (t1, t2) = (rng.gen_range(0.0..=1.0), rng.gen_range(0.0..=1.0));
            let p = rng.gen_range(pm..=pp);
            let check = algebraic_inequality_check(a, b, t1, t2, p, pm, pp).unwrap();
            let oracle = oracle_product_inequality(a, b, t1, t2, p, pm, pp);
            violations += usize::from(!check.holds);
            disagreements += usize::from(check.holds != oracle);
            total += 1;
        }
    }
    let elapsed = start.elapsed();
    let pass = violations == 0 && disagreements == 0 && elapsed < Duration::from_secs(10);
    outcome(
        pass,
        format!("{violations} violations, {disagreements} oracle disagreements in {total} samples, {elapsed:?}"),
    )
}

fn random_state(rng: &mut ChaCha8Rng, grid: &Grid, scale: f64) -> GridFunction {
    GridFunction::new((0..grid.len()).map(|_| scale * rng.gen_range(-1.0..1.0)).collect()).unwrap()
}

fn luxemburg_against_classical() -> Outcome {
    let grid = interval_grid(-1.0, 1.0, 2.0, 41);
    let region = grid.interior_region();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst_rel = 0.0f64;
    for p in [1.5, 2.0, 3.0] {
        let field = ExponentField::constant(p).unwrap();
        for _ in 0..100 {
            let scale = 10f64.powf(rng.gen_range(-2.0..2.0));
            let u = random_state(&mut rng, &grid, scale);
            let classical: f64 = region.iter().map(|(i, w)| w * u[i].abs().powf(p)).sum::<f64>().powf(1.0 / p);
            let norm = lebesgue_norm(&grid, &field, &u, &region, DEFAULT_NORM_TOL).unwrap().value;
            worst_rel = worst_rel.max(rel_err(norm, classical));
        }
    }

    let fields = [ExponentField::remark_i(), ExponentField::remark_ii(), ExponentField::constant(2.5).unwrap()];
    let slack = 1e-8;
    let mut failures = 0usize;
    for k in 0..1000 {
        let field = &fields[k % fields.len()];
        let scale = 10f64.powf(rng.gen_range(-1.5..1.5));
        let u = random_state(&mut rng, &grid, scale);
        let (pm, pp) = (field.p_min(), field.p_max());
        let (modular, norm) = if k % 2 == 0 {
            (
                lebesgue_modular(&grid, field, &u, &region).unwrap().value,
                lebesgue_norm(&grid, field, &u, &region, DEFAULT_NORM_TOL).unwrap().value,
            )
        } else {
            (
                gagliardo_modular(&grid, field, 0.5, &u, &region, &region).unwrap().value,
                sobolev_seminorm(&grid, field, 0.5, &u, &region, DEFAULT_NORM_TOL).unwrap().value,
            )
        };
        let trichotomy = if (norm - 1.0).abs() <= slack {
            (modular - 1.0).abs() <= slack * pp
        } else if norm < 1.0 {
            modular < 1.0 + slack
        } else {
            modular > 1.0 - slack
        };
        let lo = norm.powf(pm).min(norm.powf(pp));
        let hi = norm.powf(pm).max(norm.powf(pp));
        let sandwich = modular >= lo * (1.0 - slack) && modular <= hi * (1.0 + slack);
        failures += usize::from(!(trichotomy && sandwich));
    }
    let pass = worst_rel <= 1e-10 && failures == 0;
    outcome(
        pass,
        format!("max relative error {worst_rel:.3e}; {failures} trichotomy/sandwich failures in 1000 states"),
    )
}

fn gagliardo_closed_form() -> Outcome {
    let s = 0.25;
    let field = ExponentField::constant(2.0).unwrap();
    // base spacing 0.05, refined ten times
    let grid = interval_grid(0.0, 1.0, 1.0, 401);
    let u = GridFunction::from_fn(&grid, |p| p.x);
    let region = grid.box_region(&DomainBox::interval(0.0, 1.0));
    let modular = gagliardo_modular(&grid, &field, s, &u, &region, &region).unwrap().value;
    let exact = 2.0 / ((2.0 - 2.0 * s) * (3.0 - 2.0 * s));
    let rel = rel_err(modular, exact);
    outcome(rel <= 0.01, format!("grid {modular:.6} vs exact {exact:.6}, relative error {rel:.3e}"))
}

fn tail_closed_form() -> Outcome {
    let (s, radius, r_trunc) = (0.5, 0.5, 4.0);
    let field = ExponentField::constant(2.0).unwrap();
    // spacing 0.0025 over [-4, 4]
    let grid = interval_grid(-1.0, 1.0, r_trunc, 3201);
    let u = GridFunction::constant(&grid, 1.0);
    let rep = tail(&grid, &field, s, &u, &Point::ORIGIN, radius, TailSign::Abs).unwrap();
    let full = radius.powf(-2.0 * s) / s;
    let remainder = r_trunc.powf(-2.0 * s) / s;
    let err = (rep.value - (full - remainder)).abs();
    let remainder_ok = rel_err(rep.remainder_bound, remainder) <= 1e-12;
    outcome(
        err <= 1e-4 && remainder_ok,
        format!("grid tail {:.8} vs {:.8}, error {err:.3e}", rep.value, full - remainder),
    )
}

fn exponent_conditions() -> Outcome {
    let domain = DomainBox::interval(-1.0, 1.0);
    let radii = [0.01, 0.05, 0.1, 0.2, 0.4];
    let centers = [Point::ORIGIN, Point::on_line(0.4)];
    let scales = [1e-1, 1e-2, 1e-3, 1e-4, 1e-6];
    let smooth = ExponentField::remark_ii();
    let rough = ExponentField::remark_i();
    let constant = ExponentField::constant(2.5).unwrap();

    let p1_smooth = check_p1(&smooth, &domain, &radii, &centers, 3).unwrap().pass;
    let p2_smooth = check_p2(&smooth, &domain, &radii[1..4], &centers, 4.0, 1e-12).unwrap().pass;
    let p1_rough = check_p1(&rough, &domain, &radii, &centers, 3).unwrap().pass;
    let lh = check_log_holder(&rough, &domain, &scales, 1, 0.05).unwrap();
    let n = lh.levels.len();
    let rough_fails_last = !lh.pass && lh.witness.radius == 1e-6 && lh.levels[n - 1] > lh.levels[n - 2] * 1.05;
    let l_const = check_p1(&constant, &domain, &radii, &centers, 3).unwrap().l_est;
    let pass = p1_smooth && p2_smooth && p1_rough && rough_fails_last && l_const == Some(1.0);
    outcome(
        pass,
        format!(
            "smooth P1 {p1_smooth} P2 {p2_smooth}; rough P1 {p1_rough}, log-Holder fails at 1e-6 {rough_fails_last}; constant L_est {l_const:?}"
        ),
    )
}

fn gradient_against_differences() -> Outcome {
    let grid = interval_grid(-1.0, 1.0, 2.0, 41);
    let fields = [ExponentField::constant(2.5).unwrap(), ExponentField::remark_i(), ExponentField::remark_ii()];
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let step = 1e-5;
    let mut worst = 0.0f64;
    for field in &fields {
        let disc = Discretization::new(&grid, field, 0.5).unwrap();
        for _ in 0..20 {
            let u = random_state(&mut rng, &grid, 1.0);
            let grad = disc.gradient(&u);
            let scale = grad.iter().fold(0.0f64, |m, g| m.max(g.abs()));
            for (k, &i) in grid.interior_indices().iter().enumerate() {
                let mut plus = u.clone();
                plus.values_mut()[i] += step;
                let mut minus = u.clone();
                minus.values_mut()[i] -= step;
                let fd = (disc.energy(&plus) - disc.energy(&minus)) / (2.0 * step);
                worst = worst.max((fd - grad[k]).abs() / scale);
            }
        }
    }
    outcome(worst <= 1e-5, format!("max relative deviation {worst:.3e} over 60 states"))
}

fn line_solve(nodes: usize, field: ExponentField, s: f64, exterior: ExteriorData) -> (Grid, GridFunction, f64) {
    let spec = GridSpec {
        omega: DomainBox::interval(-1.0, 1.0),
        r_trunc: 4.0,
        nodes_per_axis: nodes,
    };
    let config = SolveConfig::new(spec, field.clone(), s, exterior);
    let (grid, result) = minimize(&config).unwrap();
    let residual = Discretization::new(&grid, &field, s).unwrap().residual_norm(&result.u);
    (grid, result.u, residual)
}

fn exact_linear_solution() -> Outcome {
    let start = Instant::now();
    let (grid, u, residual) = line_solve(401, ExponentField::remark_ii(), 0.5, ExteriorData::Linear { slope: 1.0 });
    let err = grid
        .interior_indices()
        .iter()
        .map(|&i| (u[i] - grid.node(i).x).abs())
        .fold(0.0, f64::max);
    let elapsed = start.elapsed();
    outcome(
        err <= 1e-6 && residual <= 1e-8 && elapsed < Duration::from_secs(60),
        format!("nodal error {err:.3e}, residual {residual:.3e}, {elapsed:?}"),
    )
}

struct RandomInstance {
    seed: u64,
    grid: Grid,
    u: GridFunction,
    g: Vec<f64>,
    residual: f64,
}

fn random_instances(nodes: usize) -> Vec<RandomInstance> {
    let field = ExponentField::constant(2.0).unwrap();
    (0..20)
        .map(|seed| {
            let exterior = ExteriorData::Random { seed, lo: -1.0, hi: 1.0, cell: 0.25 };
            let (grid, u, residual) = line_solve(nodes, field.clone(), 0.5, exterior.clone());
            let g = exterior.values(&grid);
            RandomInstance { seed, grid, u, g, residual }
        })
        .collect()
}

fn maximum_principle(coarse: &[RandomInstance], elapsed: Duration) -> Outcome {
    let mut worst = 0.0f64;
    let mut failures = 0;
    for inst in coarse {
        let rep = comparison_check(&inst.grid, &inst.u, &inst.g);
        // independent recomputation of the collar range
        let collar: Vec<f64> = (0..inst.grid.len()).filter(|&i| !inst.grid.is_interior(i)).map(|i| inst.g[i]).collect();
        let lo = collar.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = collar.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        for &i in inst.grid.interior_indices() {
            worst = worst.max(lo - inst.u[i]).max(inst.u[i] - hi);
        }
        failures += usize::from(!rep.pass);
    }
    outcome(
        failures == 0 && worst <= COMPARISON_TOL && elapsed < Duration::from_secs(300),
        format!("{failures} failing instances of 20, worst excursion {worst:.3e}, {elapsed:?}"),
    )
}

fn quartile_levels(inst: &RandomInstance) -> [f64; 3] {
    let mut vals: Vec<f64> = inst.grid.interior_indices().iter().map(|&i| inst.u[i]).collect();
    vals.sort_by(f64::total_cmp);
    let at = |t: f64| vals[(t * (vals.len() - 1) as f64) as usize];
    [at(0.25), at(0.5), at(0.75)]
}

fn fitted_constants(inst: &RandomInstance, failures: &mut usize) -> Vec<f64> {
    let field = ExponentField::constant(2.0).unwrap();
    let (big_r, r) = (0.5, 0.25);
    quartile_levels(inst)
        .iter()
        .map(|&k| {
            let rep = caccioppoli_report(&inst.grid, &field, 0.5, &inst.u, &Point::ORIGIN, r, big_r, k, inst.residual)
                .unwrap();
            if !rep.satisfied || rep.c_empirical > rep.c_explicit {
                *failures += 1;
            }
            rep.c_empirical
        })
        .collect()
}

fn caccioppoli_instances(coarse: &[RandomInstance], fine: &[RandomInstance]) -> Outcome {
    let mut failures = 0;
    let mut worst_ratio = 1.0f64;
    for (a, b) in coarse.iter().zip(fine) {
        assert_eq!(a.seed, b.seed);
        let ca = fitted_constants(a, &mut failures);
        let cb = fitted_constants(b, &mut failures);
        for (x, y) in ca.iter().zip(&cb) {
            let ratio = if *x == 0.0 && *y == 0.0 {
                1.0
            } else {
                (x / y).max(y / x)
            };
            worst_ratio = worst_ratio.max(ratio);
        }
    }
    outcome(
        failures == 0 && worst_ratio <= 2.0,
        format!("{failures} unsatisfied or over-constant reports; worst refinement ratio {worst_ratio:.4}"),
    )
}

fn holder_calibration() -> Outcome {
    let grid = interval_grid(-1.0, 1.0, 4.0, 401);
    let synthetic = GridFunction::from_fn(&grid, |p| p.x.abs().sqrt());
    let fit = holder_exponent_fit(&grid, &synthetic, &Point::ORIGIN, 0.64, 5).unwrap();
    let synthetic_alpha = fit.alpha.unwrap_or(f64::NAN);

    let field = ExponentField::constant(2.0).unwrap();
    let data = ExteriorData::Sine { amplitude: 1.0, frequency: 2.0 };
    let alphas: Vec<f64> = [401, 801]
        .iter()
        .map(|&n| {
            let (grid, u, _) = line_solve(n, field.clone(), 0.5, data.clone());
            holder_exponent_fit(&grid, &u, &Point::ORIGIN, 0.64, 5).unwrap().alpha.unwrap_or(f64::NAN)
        })
        .collect();
    let pass = (synthetic_alpha - 0.5).abs() <= 0.05
        && alphas.iter().all(|&a| a > 0.2)
        && (alphas[0] - alphas[1]).abs() <= 0.05;
    outcome(
        pass,
        format!("synthetic alpha {synthetic_alpha:.4}; solved alpha {:.4} -> {:.4}", alphas[0], alphas[1]),
    )
}

fn guarded(f: impl FnOnce() -> Outcome + std::panic::UnwindSafe) -> Outcome {
    std::panic::catch_unwind(f).unwrap_or_else(|e| {
        let msg = e
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        outcome(false, format!("panicked: {msg}"))
    })
}

fn main() {
    let mut results: Vec<(usize, &str, Outcome)> = Vec::new();
    results.push((1, "iteration lemma exactness", guarded(iteration_exactness)));
    results.push((2, "product inequality sweep", guarded(product_inequality_sweep)));
    results.push((3, "exact linear solution", guarded(exact_linear_solution)));

    let start = Instant::now();
    let coarse = random_instances(401);
    let coarse_time = start.elapsed();
    results.push((4, "discrete maximum principle", guarded(|| maximum_principle(&coarse, coarse_time))));

    results.push((5, "Luxemburg norm vs classical", guarded(luxemburg_against_classical)));
    results.push((6, "Gagliardo closed form", guarded(gagliardo_closed_form)));
    results.push((7, "tail closed form", guarded(tail_closed_form)));

    let fine = random_instances(801);
    results.push((8, "Caccioppoli estimate", guarded(|| caccioppoli_instances(&coarse, &fine))));

    results.push((9, "exponent conditions", guarded(exponent_conditions)));
    results.push((10, "Holder estimator calibration", guarded(holder_calibration)));
    results.push((11, "gradient correctness", guarded(gradient_against_differences)));

    results.sort_by_key(|r| r.0);
    let mut failed = 0;
    for (id, name, o) in &results {
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("{tag} criterion {id:>2} ({name}): {}", o.detail);
        failed += usize::from(!o.pass);
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
