use nonlocal_lab::exponent::ExponentField;
use nonlocal_lab::geometry::{DomainBox, Point};
use nonlocal_lab::grid::{Discretization, Grid, GridFunction, GridSpec};
use nonlocal_lab::spaces::{check_sandwich, lebesgue_modular, lebesgue_norm, DEFAULT_NORM_TOL};
use proptest::prelude::*;

fn small_grid() -> Grid {
    Grid::new(GridSpec {
        omega: DomainBox::interval(-1.0, 1.0),
        r_trunc: 2.0,
        nodes_per_axis: 41,
    })
    .unwrap()
}

fn field(which: usize) -> ExponentField {
    match which {
        0 => ExponentField::constant(2.5).unwrap(),
        1 => ExponentField::remark_i(),
        _ => ExponentField::remark_ii(),
    }
}

fn state(grid: &Grid) -> impl Strategy<Value = GridFunction> {
    prop::collection::vec(-2.0f64..2.0, grid.len()).prop_map(|v| GridFunction::new(v).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn exponent_is_symmetric(which in 0usize..3, a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let f = field(which);
        let (pa, pb) = (Point::on_line(a), Point::on_line(b));
        prop_assert_eq!(f.eval(&pa, &pb), f.eval(&pb, &pa));
    }

    #[test]
    fn weak_pairing_matches_gradient(which in 0usize..3, u in state(&small_grid()), seed in prop::collection::vec(-1.0f64..1.0, 41)) {
        let grid = small_grid();
        let f = field(which);
        let disc = Discretization::new(&grid, &f, 0.4).unwrap();
        let phi = GridFunction::new((0..grid.len()).map(|k| if grid.is_interior(k) { seed[k] } else { 0.0 }).collect()).unwrap();
        let weak = disc.weak_residual(&u, &phi).unwrap();
        let grad = disc.gradient(&u);
        let paired: f64 = grid.interior_indices().iter().zip(&grad).map(|(&i, g)| g * phi[i]).sum();
        prop_assert!((weak - paired).abs() <= 1e-10 * (1.0 + weak.abs()), "{} vs {}", weak, paired);
    }

    #[test]
    fn energy_ignores_constant_shifts(which in 0usize..3, u in state(&small_grid()), shift in -5.0f64..5.0) {
        let grid = small_grid();
        let f = field(which);
        let disc = Discretization::new(&grid, &f, 0.6).unwrap();
        let (e0, e1) = (disc.energy(&u), disc.energy(&u.map(|v| v + shift)));
        prop_assert!((e0 - e1).abs() <= 1e-9 * e0.max(1.0));
    }

    #[test]
    fn energy_is_midpoint_convex(which in 0usize..3, u in state(&small_grid()), v in state(&small_grid())) {
        let grid = small_grid();
        let f = field(which);
        let disc = Discretization::new(&grid, &f, 0.5).unwrap();
        let mid = GridFunction::new(u.values().iter().zip(v.values()).map(|(a, b)| 0.5 * (a + b)).collect()).unwrap();
        let (eu, ev, em) = (disc.energy(&u), disc.energy(&v), disc.energy(&mid));
        prop_assert!(em <= 0.5 * (eu + ev) * (1.0 + 1e-12) + 1e-12);
    }

    #[test]
    fn lebesgue_norm_sandwich(which in 0usize..3, u in state(&small_grid())) {
        let grid = small_grid();
        let f = field(which);
        let region = grid.interior_region();
        let modular = lebesgue_modular(&grid, &f, &u, &region).unwrap().value;
        let norm = lebesgue_norm(&grid, &f, &u, &region, DEFAULT_NORM_TOL).unwrap().value;
        prop_assert!(check_sandwich(modular, norm, f.p_min(), f.p_max(), 1e-8).holds());
    }

    #[test]
    fn lebesgue_norm_is_homogeneous(u in state(&small_grid()), scale in 0.1f64..10.0) {
        let grid = small_grid();
        let f = field(2);
        let region = grid.interior_region();
        let a = lebesgue_norm(&grid, &f, &u, &region, DEFAULT_NORM_TOL).unwrap().value;
        let b = lebesgue_norm(&grid, &f, &u.scaled(scale), &region, DEFAULT_NORM_TOL).unwrap().value;
        prop_assert!((b - scale * a).abs() <= 1e-8 * scale * a.max(1e-300));
    }
}
