//! Uniform tensor grids over a collar box, and the midpoint-rule
//! discretization of the energy, the nonlocal operator, weak pairings and
//! tail integrals.
//!
//! Nodes sit on a vertex lattice covering `center ± r_trunc`; cell measures
//! are `h^n`, halved along each axis at the box faces. Interior nodes are the
//! nodes strictly inside the open domain; all others carry exterior data.
//! Diagonal pairs are skipped in every double sum, which realizes the
//! principal value on the symmetric lattice.
//!
//! Pairs interact only within the interaction radius
//! `r_trunc - max half-width`. A ball of that radius about any interior node
//! lies inside the collar box, so every interior node sees a window that is
//! symmetric about itself and odd integrands cancel exactly.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::exponent::ExponentField;
use crate::geometry::{unit_sphere_area, DomainBox, Point};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub omega: DomainBox,
    pub r_trunc: f64,
    pub nodes_per_axis: usize,
}

impl GridSpec {
    pub fn dim(&self) -> usize {
        self.omega.dim
    }

    /// Spec with a given number of nodes per unit length (rounded to an odd
    /// total count per axis).
    pub fn with_density(omega: DomainBox, r_trunc: f64, per_unit: usize) -> Self {
        let n = (2.0 * r_trunc * per_unit as f64).round() as usize + 1;
        GridSpec {
            omega,
            r_trunc,
            nodes_per_axis: n | 1,
        }
    }

    /// Same geometry with the spacing halved.
    pub fn refined(&self) -> Self {
        GridSpec {
            nodes_per_axis: 2 * self.nodes_per_axis - 1,
            ..*self
        }
    }
}

#[derive(Clone, Debug)]
pub struct Grid {
    spec: GridSpec,
    h: f64,
    nodes: Vec<Point>,
    measures: Vec<f64>,
    interior: Vec<bool>,
    interior_idx: Vec<usize>,
}

impl Grid {
    pub fn new(spec: GridSpec) -> Result<Self> {
        let dim = spec.omega.dim;
        if dim != 1 && dim != 2 {
            return Err(LabError::argument("grid.dim", format!("dimension must be 1 or 2, got {dim}")));
        }
        if (0..dim).any(|k| !(spec.omega.half_width[k] > 0.0)) {
            return Err(LabError::argument("grid.half_width", "domain half-widths must be positive"));
        }
        if !(spec.r_trunc > spec.omega.circumradius()) {
            return Err(LabError::argument(
                "grid.r_trunc",
                format!(
                    "truncation radius {} must exceed the domain circumradius {}",
                    spec.r_trunc,
                    spec.omega.circumradius()
                ),
            ));
        }
        let n = spec.nodes_per_axis;
        if n < 9 || n.is_multiple_of(2) {
            return Err(LabError::argument("grid.nodes_per_axis", format!("need an odd count >= 9, got {n}")));
        }
        let mid = (n / 2) as i64;
        let h = 2.0 * spec.r_trunc / (n - 1) as f64;
        let c = spec.omega.center;
        let axis = |k: usize, cc: f64| cc + (k as i64 - mid) as f64 * h;
        let axis_weight = |k: usize| if k == 0 || k == n - 1 { 0.5 * h } else { h };

        let mut nodes = Vec::new();
        let mut measures = Vec::new();
        if dim == 1 {
            for i in 0..n {
                nodes.push(Point::on_line(axis(i, c.x)));
                measures.push(axis_weight(i));
            }
        } else {
            for i in 0..n {
                for j in 0..n {
                    nodes.push(Point::new(axis(i, c.x), axis(j, c.y)));
                    measures.push(axis_weight(i) * axis_weight(j));
                }
            }
        }
        let eps = 1e-9 * h;
        let interior: Vec<bool> = nodes
            .iter()
            .map(|p| (0..dim).all(|k| (p.coord(k) - c.coord(k)).abs() < spec.omega.half_width[k] - eps))
            .collect();
        let interior_idx = (0..nodes.len()).filter(|&i| interior[i]).collect();
        Ok(Grid {
            spec,
            h,
            nodes,
            measures,
            interior,
            interior_idx,
        })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.omega.dim
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn omega(&self) -> &DomainBox {
        &self.spec.omega
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> Point {
        self.nodes[i]
    }

    pub fn measures(&self) -> &[f64] {
        &self.measures
    }

    pub fn is_interior(&self, i: usize) -> bool {
        self.interior[i]
    }

    pub fn interior_indices(&self) -> &[usize] {
        &self.interior_idx
    }

    pub fn collar_indices(&self) -> Vec<usize> {
        (0..self.len()).filter(|&i| !self.interior[i]).collect()
    }

    /// Kernel cutoff: pairs farther apart than this are dropped.
    pub fn interaction_radius(&self) -> f64 {
        let w = &self.spec.omega.half_width;
        self.spec.r_trunc - w[..self.dim()].iter().copied().fold(0.0, f64::max)
    }

    /// Index of the node nearest to `p`.
    pub fn nearest(&self, p: &Point) -> usize {
        (0..self.len())
            .min_by(|&a, &b| self.nodes[a].dist(p).total_cmp(&self.nodes[b].dist(p)))
            .unwrap()
    }

    fn cell_interval(&self, i: usize, axis: usize) -> (f64, f64) {
        let c = self.spec.omega.center.coord(axis);
        let (lo, hi) = (c - self.spec.r_trunc, c + self.spec.r_trunc);
        let x = self.nodes[i].coord(axis);
        ((x - 0.5 * self.h).max(lo), (x + 0.5 * self.h).min(hi))
    }

    /// `|C_i ∩ b|` for the cell of node `i`.
    pub fn cell_overlap(&self, i: usize, b: &DomainBox) -> f64 {
        (0..self.dim())
            .map(|k| {
                let (lo, hi) = self.cell_interval(i, k);
                (hi.min(b.hi(k)) - lo.max(b.lo(k))).max(0.0)
            })
            .product()
    }

    /// Total measure of the domain covered by the cells.
    pub fn omega_measure(&self) -> f64 {
        let omega = self.spec.omega;
        (0..self.len()).map(|i| self.cell_overlap(i, &omega)).sum()
    }

    /// Nodes strictly inside the open domain, weighted by full cell measure.
    pub fn interior_region(&self) -> Region {
        Region {
            weights: self.interior_idx.iter().map(|&i| self.measures[i]).collect(),
            nodes: self.interior_idx.clone(),
        }
    }

    /// All nodes whose cells meet the box, weighted by `|C_i ∩ box|`.
    pub fn box_region(&self, b: &DomainBox) -> Region {
        let mut region = Region::default();
        for i in 0..self.len() {
            let w = self.cell_overlap(i, b);
            if w > 0.0 {
                region.nodes.push(i);
                region.weights.push(w);
            }
        }
        region
    }

    /// Nodes with `|x - center| < r`, weighted by full cell measure.
    pub fn ball_region(&self, center: &Point, r: f64) -> Region {
        let mut region = Region::default();
        for i in 0..self.len() {
            if self.nodes[i].dist(center) < r {
                region.nodes.push(i);
                region.weights.push(self.measures[i]);
            }
        }
        region
    }

    /// Nodes with `|x - center| >= r`, weighted by full cell measure.
    pub fn ball_complement(&self, center: &Point, r: f64) -> Region {
        let mut region = Region::default();
        for i in 0..self.len() {
            if self.nodes[i].dist(center) >= r {
                region.nodes.push(i);
                region.weights.push(self.measures[i]);
            }
        }
        region
    }

    /// Closed-ball node set `|x - center| <= r` (up to rounding), unweighted.
    pub fn closed_ball_nodes(&self, center: &Point, r: f64) -> Vec<usize> {
        let tol = 1e-9 * self.h;
        (0..self.len()).filter(|&i| self.nodes[i].dist(center) <= r + tol).collect()
    }

    /// Exterior cell weights `|C_y \ B_r(center)|`: exact for `dim = 1`,
    /// node membership for `dim = 2`.
    fn complement_weight(&self, i: usize, center: &Point, r: f64) -> f64 {
        if self.dim() == 1 {
            let (lo, hi) = self.cell_interval(i, 0);
            let inside = (hi.min(center.x + r) - lo.max(center.x - r)).max(0.0);
            (hi - lo - inside).max(0.0)
        } else if self.nodes[i].dist(center) >= r {
            self.measures[i]
        } else {
            0.0
        }
    }

    /// Check `B_r(x0) ⊂ Ω`.
    pub fn check_ball_inside(&self, x0: &Point, r: f64) -> Result<()> {
        let omega = &self.spec.omega;
        let ok = r > 0.0
            && (0..self.dim()).all(|k| (x0.coord(k) - omega.center.coord(k)).abs() + r <= omega.half_width[k] + 1e-12);
        if ok {
            Ok(())
        } else {
            Err(LabError::Geometry(format!(
                "ball of radius {r} about ({}, {}) is not contained in the domain",
                x0.x, x0.y
            )))
        }
    }
}

/// Weighted node subset used as a quadrature region.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Region {
    pub nodes: Vec<usize>,
    pub weights: Vec<f64>,
}

impl Region {
    pub fn measure(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    pub fn contains(&self, i: usize) -> bool {
        self.nodes.contains(&i)
    }
}

/// Nodal values over every node of a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(LabError::argument("u", format!("non-finite value at node {k}")));
        }
        Ok(GridFunction { values })
    }

    pub fn from_fn(grid: &Grid, f: impl Fn(&Point) -> f64) -> Self {
        GridFunction {
            values: grid.nodes().iter().map(f).collect(),
        }
    }

    pub fn constant(grid: &Grid, c: f64) -> Self {
        GridFunction {
            values: vec![c; grid.len()],
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction {
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scaled(&self, a: f64) -> GridFunction {
        self.map(|v| a * v)
    }

    pub fn check_len(&self, grid: &Grid) -> Result<()> {
        if self.len() == grid.len() {
            Ok(())
        } else {
            Err(LabError::argument(
                "u",
                format!("function has {} values but the grid has {} nodes", self.len(), grid.len()),
            ))
        }
    }
}

impl std::ops::Index<usize> for GridFunction {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.values[i]
    }
}

/// `|t|^{p-2} t`, continuous at 0 for `p > 1`.
#[inline]
pub fn signed_power(t: f64, p: f64) -> f64 {
    if t == 0.0 {
        0.0
    } else {
        t.signum() * t.abs().powf(p - 1.0)
    }
}

struct Row {
    node: usize,
    cols: Vec<u32>,
    exponent: Vec<f64>,
    /// `m_j / |x_i - x_j|^{n + s p_ij}`
    kernel: Vec<f64>,
    /// 1 for interior columns, 2 for exterior ones
    multiplicity: Vec<f64>,
}

/// Precomputed kernel rows for every interior node.
pub struct Discretization<'g> {
    grid: &'g Grid,
    s: f64,
    rows: Vec<Row>,
    row_of: Vec<Option<usize>>,
}

impl<'g> Discretization<'g> {
    pub fn new(grid: &'g Grid, field: &ExponentField, s: f64) -> Result<Self> {
        if !(s > 0.0 && s < 1.0) {
            return Err(LabError::argument("s", format!("s must lie in (0, 1), got {s}")));
        }
        field.check_covers(grid.dim(), grid.nodes())?;
        let n = grid.dim() as f64;
        let nodes = grid.nodes();
        let measures = grid.measures();
        let cutoff = grid.interaction_radius() + 1e-9 * grid.h();
        let rows: Vec<Row> = grid
            .interior_indices()
            .par_iter()
            .map(|&i| {
                let xi = nodes[i];
                let mut row = Row {
                    node: i,
                    cols: Vec::with_capacity(nodes.len() - 1),
                    exponent: Vec::with_capacity(nodes.len() - 1),
                    kernel: Vec::with_capacity(nodes.len() - 1),
                    multiplicity: Vec::with_capacity(nodes.len() - 1),
                };
                for (j, xj) in nodes.iter().enumerate() {
                    if j == i {
                        continue;
                    }
                    let d = xi.dist(xj);
                    if d > cutoff {
                        continue;
                    }
                    let p = field.eval(&xi, xj);
                    row.cols.push(j as u32);
                    row.exponent.push(p);
                    row.kernel.push(measures[j] * (-(n + s * p) * d.ln()).exp());
                    row.multiplicity.push(if grid.is_interior(j) { 1.0 } else { 2.0 });
                }
                row
            })
            .collect();
        let mut row_of = vec![None; grid.len()];
        for (r, row) in rows.iter().enumerate() {
            row_of[row.node] = Some(r);
        }
        Ok(Discretization { grid, s, rows, row_of })
    }

    pub fn grid(&self) -> &Grid {
        self.grid
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    /// Discrete energy: sum over unordered pairs not both exterior, within the
    /// interaction radius, of
    /// `2 m_i m_j |u_i - u_j|^p / (p |x_i - x_j|^{n+sp})`.
    pub fn energy(&self, u: &GridFunction) -> f64 {
        let m = self.grid.measures();
        let v = u.values();
        let parts: Vec<f64> = self
            .rows
            .par_iter()
            .map(|row| {
                let ui = v[row.node];
                let mut acc = 0.0;
                for k in 0..row.cols.len() {
                    let p = row.exponent[k];
                    let t = (ui - v[row.cols[k] as usize]).abs();
                    if t > 0.0 {
                        acc += row.multiplicity[k] * row.kernel[k] * t.powf(p) / p;
                    }
                }
                m[row.node] * acc
            })
            .collect();
        parts.iter().sum()
    }

    /// `sum_{j != i} m_j |u_i-u_j|^{p-2}(u_i-u_j) / |x_i-x_j|^{n+sp}` at interior node `i`.
    pub fn operator_apply(&self, u: &GridFunction, i: usize) -> Result<f64> {
        let r = self.row_of.get(i).copied().flatten().ok_or_else(|| {
            LabError::argument("i", format!("node {i} is not an interior node"))
        })?;
        Ok(self.row_operator(&self.rows[r], u.values()))
    }

    fn row_operator(&self, row: &Row, v: &[f64]) -> f64 {
        let ui = v[row.node];
        let mut acc = 0.0;
        for k in 0..row.cols.len() {
            acc += row.kernel[k] * signed_power(ui - v[row.cols[k] as usize], row.exponent[k]);
        }
        acc
    }

    /// Operator values at all interior nodes, in `interior_indices` order.
    pub fn operator_all(&self, u: &GridFunction) -> Vec<f64> {
        let v = u.values();
        self.rows.par_iter().map(|row| self.row_operator(row, v)).collect()
    }

    /// Gradient of the energy with respect to the interior values,
    /// `2 m_i (Lu)_i`, in `interior_indices` order.
    pub fn gradient(&self, u: &GridFunction) -> Vec<f64> {
        let m = self.grid.measures();
        self.operator_all(u)
            .into_iter()
            .zip(&self.rows)
            .map(|(op, row)| 2.0 * m[row.node] * op)
            .collect()
    }

    /// `max_i |m_i (Lu)_i|` over interior nodes.
    pub fn residual_norm(&self, u: &GridFunction) -> f64 {
        let m = self.grid.measures();
        self.operator_all(u)
            .into_iter()
            .zip(&self.rows)
            .map(|(op, row)| (m[row.node] * op).abs())
            .fold(0.0, f64::max)
    }

    /// Weak pairing `sum_{i<j} 2 m_i m_j |u_i-u_j|^{p-2}(u_i-u_j)(phi_i-phi_j)/|x_i-x_j|^{n+sp}`
    /// for a test function vanishing off the interior.
    pub fn weak_residual(&self, u: &GridFunction, phi: &GridFunction) -> Result<f64> {
        phi.check_len(self.grid)?;
        if let Some(k) = (0..self.grid.len()).find(|&k| !self.grid.is_interior(k) && phi[k] != 0.0) {
            return Err(LabError::argument("phi", format!("test function is nonzero at exterior node {k}")));
        }
        let m = self.grid.measures();
        let (v, w) = (u.values(), phi.values());
        let parts: Vec<f64> = self
            .rows
            .par_iter()
            .map(|row| {
                let (ui, fi) = (v[row.node], w[row.node]);
                let mut acc = 0.0;
                for k in 0..row.cols.len() {
                    let j = row.cols[k] as usize;
                    acc += row.multiplicity[k]
                        * row.kernel[k]
                        * signed_power(ui - v[j], row.exponent[k])
                        * (fi - w[j]);
                }
                m[row.node] * acc
            })
            .collect();
        Ok(parts.iter().sum())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailSign {
    Plus,
    Minus,
    Abs,
}

impl TailSign {
    pub fn apply(&self, v: f64) -> f64 {
        match self {
            TailSign::Plus => v.max(0.0),
            TailSign::Minus => (-v).max(0.0),
            TailSign::Abs => v.abs(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TailReport {
    /// sup over nodes of `B_R(x0)` of the truncated exterior sum
    pub value: f64,
    pub argmax: Point,
    /// Bound on the dropped part beyond the collar, for data bounded by the
    /// largest collar magnitude (constant envelope).
    pub remainder_bound: f64,
}

/// Nonlocal tail `sup_{x in B_R(x0)} ∫_{R^n \ B_R(x0)} u_±(y)^{p(x,y)-1} / |y-x0|^{n+s p(x,y)} dy`
/// on the truncated grid.
pub fn tail(
    grid: &Grid,
    field: &ExponentField,
    s: f64,
    u: &GridFunction,
    x0: &Point,
    r: f64,
    sign: TailSign,
) -> Result<TailReport> {
    u.check_len(grid)?;
    grid.check_ball_inside(x0, r)?;
    let n = grid.dim() as f64;
    let ball = grid.ball_region(x0, r);
    if ball.is_empty() {
        return Err(LabError::Resolution(format!("no grid node inside the ball of radius {r}")));
    }
    let exterior: Vec<(usize, f64)> = (0..grid.len())
        .map(|j| (j, grid.complement_weight(j, x0, r)))
        .filter(|&(j, w)| w > 0.0 && sign.apply(u[j]) > 0.0)
        .collect();
    let values: Vec<f64> = ball
        .nodes
        .par_iter()
        .map(|&i| {
            let xi = grid.node(i);
            exterior
                .iter()
                .map(|&(j, w)| {
                    let y = grid.node(j);
                    let p = field.eval(&xi, &y);
                    let d = y.dist(x0);
                    w * sign.apply(u[j]).powf(p - 1.0) / d.powf(n + s * p)
                })
                .sum()
        })
        .collect();
    let (k, &value) = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .unwrap();

    // Remainder beyond the collar: |S^{n-1}| M^{p-1} ρ^{-s p_min} / (s p_min),
    // with ρ the distance from x0 to the nearest collar face.
    let envelope = grid
        .collar_indices()
        .iter()
        .map(|&j| sign.apply(u[j]))
        .fold(0.0, f64::max);
    let c = grid.spec().omega.center;
    let rho = (0..grid.dim())
        .map(|k| grid.spec().r_trunc - (x0.coord(k) - c.coord(k)).abs())
        .fold(f64::INFINITY, f64::min);
    let (pmin, pmax) = (field.p_min(), field.p_max());
    let m_pow = envelope.powf(pmax - 1.0).max(envelope.powf(pmin - 1.0));
    let remainder_bound = unit_sphere_area(grid.dim()) * m_pow * rho.powf(-s * pmin) / (s * pmin);
    Ok(TailReport {
        value,
        argmax: grid.node(ball.nodes[k]),
        remainder_bound,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_grid(n: usize, r_trunc: f64) -> Grid {
        Grid::new(GridSpec {
            omega: DomainBox::interval(-1.0, 1.0),
            r_trunc,
            nodes_per_axis: n,
        })
        .unwrap()
    }

    #[test]
    fn omega_measure_recovered() {
        let spec = GridSpec::with_density(DomainBox::interval(-1.0, 1.0), 4.0, 33);
        assert_eq!(spec.nodes_per_axis, 265);
        let g = Grid::new(spec).unwrap();
        assert!((g.omega_measure() - 2.0).abs() < 1e-12);
        let total: f64 = g.measures().iter().sum();
        assert!((total - 8.0).abs() < 1e-12);
        assert!(g.interior_indices().iter().all(|&i| g.node(i).x.abs() < 1.0));
    }

    #[test]
    fn rejects_bad_specs() {
        let omega = DomainBox::interval(-1.0, 1.0);
        for (r, n) in [(4.0, 400), (4.0, 7), (0.9, 101)] {
            let e = Grid::new(GridSpec { omega, r_trunc: r, nodes_per_axis: n });
            assert!(matches!(e, Err(LabError::Argument { .. })), "{r} {n}");
        }
    }

    #[test]
    fn square_interior_count_matches_area() {
        let g = Grid::new(GridSpec {
            omega: DomainBox::square(Point::ORIGIN, 1.0),
            r_trunc: 3.0,
            nodes_per_axis: 61,
        })
        .unwrap();
        let h = g.h();
        let count = g.interior_indices().len() as f64;
        let area_cells = 4.0 / (h * h);
        // one cell layer around the boundary
        assert!((count - area_cells).abs() <= 4.0 * 2.0 / h + 4.0);
        assert!((g.omega_measure() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn constant_function_has_zero_energy_and_operator() {
        let g = line_grid(81, 3.0);
        let f = ExponentField::remark_ii();
        let d = Discretization::new(&g, &f, 0.4).unwrap();
        let u = GridFunction::constant(&g, 1.7);
        assert_eq!(d.energy(&u), 0.0);
        assert!(d.operator_all(&u).iter().all(|&v| v == 0.0));
        assert_eq!(d.residual_norm(&u), 0.0);
    }

    #[test]
    fn linear_function_cancels_at_center() {
        let g = line_grid(161, 4.0);
        let d = Discretization::new(&g, &ExponentField::remark_ii(), 0.5).unwrap();
        let u = GridFunction::from_fn(&g, |p| p.x);
        let c = g.nearest(&Point::ORIGIN);
        assert!(d.operator_apply(&u, c).unwrap().abs() < 1e-10);
        let mut phi = GridFunction::constant(&g, 0.0);
        phi.values_mut()[c] = 1.0;
        assert!(d.weak_residual(&u, &phi).unwrap().abs() < 1e-8);
    }

    #[test]
    fn quadratic_operator_negative_at_origin() {
        let g = line_grid(161, 4.0);
        let d = Discretization::new(&g, &ExponentField::constant(2.0).unwrap(), 0.5).unwrap();
        let u = GridFunction::from_fn(&g, |p| p.x * p.x);
        assert!(d.operator_apply(&u, g.nearest(&Point::ORIGIN)).unwrap() < 0.0);
        assert!(d.operator_apply(&u, 0).is_err());
    }

    #[test]
    fn weak_residual_rejects_exterior_support_and_is_linear() {
        let g = line_grid(81, 3.0);
        let d = Discretization::new(&g, &ExponentField::constant(1.6).unwrap(), 0.3).unwrap();
        let u = GridFunction::from_fn(&g, |p| (2.0 * p.x).sin());
        let mut phi = GridFunction::from_fn(&g, |p| if p.x.abs() < 1.0 { 1.0 - p.x * p.x } else { 0.0 });
        let e1 = d.weak_residual(&u, &phi).unwrap();
        let e3 = d.weak_residual(&u, &phi.scaled(3.0)).unwrap();
        assert!((e3 - 3.0 * e1).abs() <= 1e-12 * e1.abs().max(1.0));
        // identity with the operator: E(u, phi) = 2 sum m_i phi_i (Lu)_i
        let ops = d.operator_all(&u);
        let sum: f64 = g
            .interior_indices()
            .iter()
            .zip(&ops)
            .map(|(&i, op)| 2.0 * g.measures()[i] * phi[i] * op)
            .sum();
        assert!((sum - e1).abs() <= 1e-10 * e1.abs().max(1.0));
        phi.values_mut()[0] = 1.0;
        assert!(d.weak_residual(&u, &phi).is_err());
    }

    #[test]
    fn tail_zero_and_monotone() {
        let g = line_grid(161, 4.0);
        let f = ExponentField::constant(2.0).unwrap();
        let x0 = Point::ORIGIN;
        let zero_out = GridFunction::from_fn(&g, |p| if p.x.abs() < 0.5 { 3.0 } else { 0.0 });
        assert_eq!(tail(&g, &f, 0.5, &zero_out, &x0, 0.5, TailSign::Abs).unwrap().value, 0.0);
        let u = GridFunction::from_fn(&g, |p| 1.0 + p.x.abs());
        let t1 = tail(&g, &f, 0.5, &u, &x0, 0.5, TailSign::Plus).unwrap().value;
        let t2 = tail(&g, &f, 0.5, &u.scaled(2.0), &x0, 0.5, TailSign::Plus).unwrap().value;
        assert!(t2 >= t1 && t1 > 0.0);
        assert!(tail(&g, &f, 0.5, &u, &x0, 1.5, TailSign::Plus).is_err());
    }
}
