//! Variable exponents `p(x, y)` and the interior/exterior conditions they are
//! checked against.
//!
//! Every preset is written symmetrically, so `eval(x, y) == eval(y, x)` holds
//! bit for bit. Suprema and infima over products of balls are taken over
//! sampled points; when the two sets touch (share closure points) the value
//! `p(z, z)` at the contact point is included, because the continuum sup over
//! `B x B` is attained in the diagonal limit and no off-diagonal sample
//! reaches it.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::geometry::{DomainBox, Point};

const E: f64 = std::f64::consts::E;

/// Modulus used by the `remark_ii` preset: `3 + 1/log r` below `1/e`, and the
/// constant exterior branch `2` from `1/e` on.
pub fn remark_ii_modulus(r: f64) -> f64 {
    if r <= 0.0 {
        3.0
    } else if r < 1.0 / E {
        3.0 - (-1.0 / r.ln()).min(1.0)
    } else {
        2.0
    }
}

/// Bounded, increasing modulus with `1 / (log(1/r) * omega(r)) -> 0`, so that
/// exponents built from it are not log-Hölder continuous.
pub fn remark_i_modulus(r: f64) -> f64 {
    if r <= 0.0 {
        0.0
    } else {
        1.0 / (E + (1.0 + 1.0 / r).ln()).ln()
    }
}

/// Base level of the `remark_i` preset; the preset takes values in
/// `[REMARK_I_BASE, REMARK_I_BASE + 1]`.
pub const REMARK_I_BASE: f64 = 1.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExponentKind {
    Constant,
    RemarkI,
    RemarkIi,
    Tabulated,
}

impl ExponentKind {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "constant" => Some(ExponentKind::Constant),
            "remark_i" => Some(ExponentKind::RemarkI),
            "remark_ii" => Some(ExponentKind::RemarkIi),
            "tabulated" => Some(ExponentKind::Tabulated),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ExponentKind::Constant => "constant",
            ExponentKind::RemarkI => "remark_i",
            ExponentKind::RemarkIi => "remark_ii",
            ExponentKind::Tabulated => "tabulated",
        }
    }
}

/// Bilinear table over a rectangular lattice of `(x, y)` for one-dimensional
/// space. Evaluation symmetrizes the table.
#[derive(Clone, Debug)]
pub struct ExponentTable {
    xs: Vec<f64>,
    ys: Vec<f64>,
    /// Row-major, `values[ix * ys.len() + iy]`.
    values: Vec<f64>,
}

impl ExponentTable {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if xs.len() < 2 || ys.len() < 2 {
            return Err(LabError::argument("table", "need at least two x and two y values"));
        }
        if values.len() != xs.len() * ys.len() {
            return Err(LabError::argument("table", "value count does not match the lattice"));
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) || ys.windows(2).any(|w| w[1] <= w[0]) {
            return Err(LabError::argument("table", "coordinates must be strictly increasing"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(LabError::argument("table", "non-finite exponent value"));
        }
        Ok(ExponentTable { xs, ys, values })
    }

    /// Tabulate `f` on the lattice `xs x ys`.
    pub fn from_fn(xs: Vec<f64>, ys: Vec<f64>, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let values = xs
            .iter()
            .flat_map(|&x| ys.iter().map(move |&y| (x, y)))
            .map(|(x, y)| f(x, y))
            .collect();
        Self::new(xs, ys, values)
    }

    /// Load from CSV with header `x,y,p`; rows may come in any order but must
    /// fill the lattice.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let mut rdr = csv::Reader::from_path(path)?;
        let headers = rdr.headers()?.clone();
        let cols: Vec<&str> = headers.iter().map(str::trim).collect();
        if cols != ["x", "y", "p"] {
            return Err(LabError::argument("table", "expected CSV header `x,y,p`"));
        }
        let mut triples = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let parse = |k: usize| -> Result<f64> {
                rec[k]
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| LabError::argument("table", format!("bad number `{}`: {e}", &rec[k])))
            };
            triples.push((parse(0)?, parse(1)?, parse(2)?));
        }
        let mut xs: Vec<f64> = triples.iter().map(|t| t.0).collect();
        let mut ys: Vec<f64> = triples.iter().map(|t| t.1).collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        ys.sort_by(f64::total_cmp);
        ys.dedup();
        if triples.len() != xs.len() * ys.len() {
            return Err(LabError::argument("table", "rows do not form a full lattice"));
        }
        let mut values = vec![f64::NAN; xs.len() * ys.len()];
        for (x, y, p) in triples {
            let ix = xs.partition_point(|&v| v < x);
            let iy = ys.partition_point(|&v| v < y);
            values[ix * ys.len() + iy] = p;
        }
        Self::new(xs, ys, values)
    }

    fn covers(&self, x: f64, y: f64) -> bool {
        x >= self.xs[0] && x <= *self.xs.last().unwrap() && y >= self.ys[0] && y <= *self.ys.last().unwrap()
    }

    fn raw(&self, x: f64, y: f64) -> f64 {
        let locate = |grid: &[f64], v: f64| -> (usize, f64) {
            let v = v.clamp(grid[0], grid[grid.len() - 1]);
            let k = grid.partition_point(|&g| g <= v).clamp(1, grid.len() - 1) - 1;
            let t = (v - grid[k]) / (grid[k + 1] - grid[k]);
            (k, t)
        };
        let (ix, tx) = locate(&self.xs, x);
        let (iy, ty) = locate(&self.ys, y);
        let ny = self.ys.len();
        let v = |i: usize, j: usize| self.values[i * ny + j];
        (1.0 - tx) * ((1.0 - ty) * v(ix, iy) + ty * v(ix, iy + 1))
            + tx * ((1.0 - ty) * v(ix + 1, iy) + ty * v(ix + 1, iy + 1))
    }

    fn bounds(&self) -> (f64, f64) {
        let lo = self.values.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }
}

#[derive(Clone, Debug)]
enum Definition {
    Constant(f64),
    RemarkI,
    RemarkIi,
    Tabulated(ExponentTable),
}

/// A symmetric exponent `p(x, y)` with global bounds `1 < p_min <= p <= p_max`.
#[derive(Clone, Debug)]
pub struct ExponentField {
    def: Definition,
    p_min: f64,
    p_max: f64,
}

impl ExponentField {
    pub fn constant(p: f64) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(LabError::argument("p", format!("constant exponent must be in (1, inf), got {p}")));
        }
        Ok(ExponentField {
            def: Definition::Constant(p),
            p_min: p,
            p_max: p,
        })
    }

    /// `p(x, y) = 1.5 + (min(|x|,1) w(|y|) + min(|y|,1) w(|x|)) / 2` with the
    /// non-log-Hölder modulus [`remark_i_modulus`].
    pub fn remark_i() -> Self {
        ExponentField {
            def: Definition::RemarkI,
            p_min: REMARK_I_BASE,
            p_max: REMARK_I_BASE + 1.0,
        }
    }

    /// `p(x, y) = w(|x - y|)` with [`remark_ii_modulus`]; values in `[2, 3]`.
    pub fn remark_ii() -> Self {
        ExponentField {
            def: Definition::RemarkIi,
            p_min: 2.0,
            p_max: 3.0,
        }
    }

    pub fn tabulated(table: ExponentTable) -> Result<Self> {
        let (lo, hi) = table.bounds();
        if lo <= 1.0 {
            return Err(LabError::argument("p_min", format!("tabulated exponent must exceed 1, found {lo}")));
        }
        Ok(ExponentField {
            def: Definition::Tabulated(table),
            p_min: lo,
            p_max: hi,
        })
    }

    pub fn kind(&self) -> ExponentKind {
        match self.def {
            Definition::Constant(_) => ExponentKind::Constant,
            Definition::RemarkI => ExponentKind::RemarkI,
            Definition::RemarkIi => ExponentKind::RemarkIi,
            Definition::Tabulated(_) => ExponentKind::Tabulated,
        }
    }

    pub fn p_min(&self) -> f64 {
        self.p_min
    }

    pub fn p_max(&self) -> f64 {
        self.p_max
    }

    pub fn constant_value(&self) -> Option<f64> {
        match self.def {
            Definition::Constant(p) => Some(p),
            _ => None,
        }
    }

    /// Evaluate `p(a, b)`. Tabulated fields clamp to their table; use
    /// [`ExponentField::try_eval`] to reject points outside it.
    pub fn eval(&self, a: &Point, b: &Point) -> f64 {
        match &self.def {
            Definition::Constant(p) => *p,
            Definition::RemarkI => {
                let (ra, rb) = (a.norm(), b.norm());
                REMARK_I_BASE
                    + 0.5 * (ra.min(1.0) * remark_i_modulus(rb) + rb.min(1.0) * remark_i_modulus(ra))
            }
            Definition::RemarkIi => remark_ii_modulus(a.dist(b)),
            Definition::Tabulated(t) => 0.5 * (t.raw(a.x, b.x) + t.raw(b.x, a.x)),
        }
    }

    pub fn try_eval(&self, a: &Point, b: &Point) -> Result<f64> {
        if let Definition::Tabulated(t) = &self.def {
            if !t.covers(a.x, b.x) || !t.covers(b.x, a.x) {
                return Err(LabError::OutOfDomain { x: a.x, y: b.x });
            }
        }
        Ok(self.eval(a, b))
    }

    /// Check that every point of `pts` can be evaluated against every other.
    pub fn check_covers(&self, dim: usize, pts: &[Point]) -> Result<()> {
        if let Definition::Tabulated(t) = &self.def {
            if dim != 1 {
                return Err(LabError::argument("field", "tabulated exponents support dim = 1 only"));
            }
            for p in pts {
                if !t.covers(p.x, p.x) {
                    return Err(LabError::OutOfDomain { x: p.x, y: p.x });
                }
            }
        }
        Ok(())
    }

    /// `p_bar(x) = p(x, x)`.
    pub fn diagonal(&self, a: &Point) -> f64 {
        self.eval(a, a)
    }
}

/// Extremes of `p` over a product of sampled sets, with the pairs attaining them.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProductExtrema {
    pub p_minus: f64,
    pub p_plus: f64,
    pub argmin: (Point, Point),
    pub argmax: (Point, Point),
}

/// `p_-(A x B)` and `p_+(A x B)` over sample points. Points of `a` lying within
/// `contact_tol` of some point of `b` also contribute the diagonal value
/// `p(z, z)`; pass `contact_tol = 0` when `a` and `b` share points exactly.
pub fn extrema_over_product(
    field: &ExponentField,
    a: &[Point],
    b: &[Point],
    contact_tol: f64,
) -> Result<ProductExtrema> {
    if a.is_empty() || b.is_empty() {
        return Err(LabError::argument("sets", "extrema over an empty set"));
    }
    let mut ext = ProductExtrema {
        p_minus: f64::INFINITY,
        p_plus: f64::NEG_INFINITY,
        argmin: (a[0], b[0]),
        argmax: (a[0], b[0]),
    };
    let mut visit = |x: &Point, y: &Point, v: f64| {
        if v < ext.p_minus {
            ext.p_minus = v;
            ext.argmin = (*x, *y);
        }
        if v > ext.p_plus {
            ext.p_plus = v;
            ext.argmax = (*x, *y);
        }
    };
    for x in a {
        let mut touches = false;
        for y in b {
            let v = field.try_eval(x, y)?;
            visit(x, y, v);
            if x.dist(y) <= contact_tol {
                touches = true;
            }
        }
        if touches {
            let v = field.try_eval(x, x)?;
            visit(x, x, v);
        }
    }
    Ok(ext)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Condition {
    P1,
    P2,
    LogHolder,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub center: Point,
    pub radius: f64,
    pub value: f64,
}

/// Outcome of an exponent-condition check.
#[derive(Clone, Debug, Serialize)]
pub struct ConditionReport {
    pub condition: Condition,
    pub pass: bool,
    pub witness: Witness,
    /// Smallest admissible `L` on the finest sample (P1 only).
    pub l_est: Option<f64>,
    /// P1: `L_est` per refinement level. LogHolder: measure per scale.
    pub levels: Vec<f64>,
}

/// Sampling density for ball products: lattice points per radius at level 0.
pub const BASE_POINTS_PER_RADIUS: usize = 8;

/// Lattice points strictly inside `B_r(center)` with spacing `r / per_radius`.
pub fn ball_samples(dim: usize, center: &Point, r: f64, per_radius: usize) -> Vec<Point> {
    let k = per_radius as i64;
    let step = r / per_radius as f64;
    let mut pts = Vec::new();
    let ys: Vec<i64> = if dim == 1 { vec![0] } else { (-k..=k).collect() };
    for i in -k..=k {
        for &j in &ys {
            let p = Point::new(center.x + i as f64 * step, center.y + j as f64 * step);
            if p.dist(center) < r {
                pts.push(p);
            }
        }
    }
    pts
}

/// Samples of `R^n \ B_r(center)` out to `outer`: geometric shells starting
/// on the sphere of radius `r`.
pub fn complement_samples(dim: usize, center: &Point, r: f64, outer: f64) -> Vec<Point> {
    const SHELLS: usize = 48;
    let outer = outer.max(r * 1.5);
    let ratio = (outer / r).powf(1.0 / (SHELLS - 1) as f64);
    let dirs: Vec<(f64, f64)> = if dim == 1 {
        vec![(1.0, 0.0), (-1.0, 0.0)]
    } else {
        (0..16)
            .map(|k| {
                let t = k as f64 * std::f64::consts::PI / 8.0;
                (t.cos(), t.sin())
            })
            .collect()
    };
    let mut pts = Vec::with_capacity(SHELLS * dirs.len());
    for s in 0..SHELLS {
        let rad = r * ratio.powi(s as i32);
        for &(cx, cy) in &dirs {
            pts.push(Point::new(center.x + rad * cx, center.y + rad * cy));
        }
    }
    pts
}

fn contact_tol(dim: usize, r: f64, per_radius: usize) -> f64 {
    (r / per_radius as f64) * (dim as f64).sqrt() * (1.0 + 1e-9)
}

fn check_ball_geometry(domain: &DomainBox, radii: &[f64], centers: &[Point]) -> Result<()> {
    if radii.is_empty() || centers.is_empty() {
        return Err(LabError::argument("radii", "need at least one radius and one center"));
    }
    for c in centers {
        for &r in radii {
            if !(r > 0.0) {
                return Err(LabError::argument("radii", format!("radius must be positive, got {r}")));
            }
            if !domain.contains_closed_ball(c, r) {
                return Err(LabError::Geometry(format!(
                    "closed ball B_{r}(({}, {})) is not inside the domain",
                    c.x, c.y
                )));
            }
        }
    }
    Ok(())
}

/// `p_-(B x B)` and `p_+(B x B)` on the lattice at the given density.
pub fn ball_extrema(field: &ExponentField, dim: usize, center: &Point, r: f64, per_radius: usize) -> Result<ProductExtrema> {
    let pts = ball_samples(dim, center, r, per_radius);
    extrema_over_product(field, &pts, &pts, 0.0)
}

/// Interior condition: `R^{p_-(BxB) - p_+(BxB)} <= L` over the sampled balls.
///
/// `L_est` is computed at each refinement level `0..levels` (lattice density
/// doubles per level). The check passes when every `L_est` is finite and the
/// last level grew by at most a factor 2 over the previous one.
pub fn check_p1(
    field: &ExponentField,
    domain: &DomainBox,
    radii: &[f64],
    centers: &[Point],
    levels: usize,
) -> Result<ConditionReport> {
    check_ball_geometry(domain, radii, centers)?;
    let levels = levels.max(1);
    let mut per_level = Vec::with_capacity(levels);
    let mut witness = Witness {
        center: centers[0],
        radius: radii[0],
        value: f64::NEG_INFINITY,
    };
    for level in 0..levels {
        let per_radius = BASE_POINTS_PER_RADIUS << level;
        let mut worst = Witness {
            center: centers[0],
            radius: radii[0],
            value: f64::NEG_INFINITY,
        };
        for c in centers {
            for &r in radii {
                let ext = ball_extrema(field, domain.dim, c, r, per_radius)?;
                let val = r.powf(ext.p_minus - ext.p_plus);
                if val > worst.value {
                    worst = Witness { center: *c, radius: r, value: val };
                }
            }
        }
        per_level.push(worst.value);
        witness = worst;
    }
    let finite = per_level.iter().all(|v| v.is_finite());
    let stable = per_level
        .windows(2)
        .last()
        .is_none_or(|w| w[1] <= 2.0 * w[0]);
    Ok(ConditionReport {
        condition: Condition::P1,
        pass: finite && stable,
        l_est: Some(witness.value),
        witness,
        levels: per_level,
    })
}

/// Exterior condition: `p_+(B x B^c) <= p_+(B x B)` and
/// `p_-(B x B^c) <= p_-(B x B)` on every sampled ball. The complement is
/// sampled out to `outer` (the truncation radius of the collar).
pub fn check_p2(
    field: &ExponentField,
    domain: &DomainBox,
    radii: &[f64],
    centers: &[Point],
    outer: f64,
    tol: f64,
) -> Result<ConditionReport> {
    check_ball_geometry(domain, radii, centers)?;
    let per_radius = BASE_POINTS_PER_RADIUS * 4;
    let mut worst = Witness {
        center: centers[0],
        radius: radii[0],
        value: f64::NEG_INFINITY,
    };
    for c in centers {
        for &r in radii {
            let inside = ball_samples(domain.dim, c, r, per_radius);
            let outside = complement_samples(domain.dim, c, r, outer);
            let bb = extrema_over_product(field, &inside, &inside, 0.0)?;
            let bc = extrema_over_product(field, &inside, &outside, contact_tol(domain.dim, r, per_radius))?;
            let violation = (bc.p_plus - bb.p_plus).max(bc.p_minus - bb.p_minus);
            if violation > worst.value {
                worst = Witness { center: *c, radius: r, value: violation };
            }
        }
    }
    Ok(ConditionReport {
        condition: Condition::P2,
        pass: worst.value <= tol,
        witness: worst,
        l_est: None,
        levels: Vec::new(),
    })
}

/// Empirical log-Hölder measure `sup |p(z1) - p(z2)| * log(1/rho)` over pairs of
/// points of `domain x domain` at separation `rho` in `R^{2n}`, for each scale.
///
/// Pass when the measure is non-increasing (within relative `tol`) as the
/// scale shrinks. Anchors are a deterministic lattice plus seeded random points.
pub fn check_log_holder(
    field: &ExponentField,
    domain: &DomainBox,
    scales: &[f64],
    seed: u64,
    tol: f64,
) -> Result<ConditionReport> {
    let mut scales: Vec<f64> = scales.to_vec();
    scales.sort_by(|a, b| b.total_cmp(a));
    scales.dedup();
    if scales.len() < 2 {
        return Err(LabError::argument("scales", "need at least two distinct scales"));
    }
    if scales.iter().any(|&r| !(r > 0.0 && r < 1.0)) {
        return Err(LabError::argument("scales", "scales must lie in (0, 1)"));
    }
    let dim = domain.dim;
    let anchors = log_holder_anchors(domain, seed);
    let dirs = displacement_directions(dim, seed);
    let mut measures = Vec::with_capacity(scales.len());
    let mut witness = Witness {
        center: domain.center,
        radius: scales[0],
        value: 0.0,
    };
    for &rho in &scales {
        let mut best = 0.0f64;
        let mut best_at = domain.center;
        for (za, zb) in &anchors {
            let base = field.eval(za, zb);
            for d in &dirs {
                let (qa, qb) = if dim == 1 {
                    (Point::on_line(za.x + rho * d[0]), Point::on_line(zb.x + rho * d[1]))
                } else {
                    (
                        Point::new(za.x + rho * d[0], za.y + rho * d[1]),
                        Point::new(zb.x + rho * d[2], zb.y + rho * d[3]),
                    )
                };
                let diff = (field.eval(&qa, &qb) - base).abs();
                if diff > best {
                    best = diff;
                    best_at = *za;
                }
            }
        }
        let m = best * (1.0 / rho).ln();
        measures.push(m);
        witness = Witness { center: best_at, radius: rho, value: m };
    }
    let pass = measures.windows(2).all(|w| w[1] <= w[0] * (1.0 + tol) + 1e-12);
    Ok(ConditionReport {
        condition: Condition::LogHolder,
        pass,
        witness,
        l_est: None,
        levels: measures,
    })
}

fn log_holder_anchors(domain: &DomainBox, seed: u64) -> Vec<(Point, Point)> {
    let dim = domain.dim;
    let per_axis: usize = if dim == 1 { 41 } else { 7 };
    let axis_vals = |k: usize| -> Vec<f64> {
        (0..per_axis)
            .map(|i| domain.lo(k) + (domain.hi(k) - domain.lo(k)) * i as f64 / (per_axis - 1) as f64)
            .collect()
    };
    let pts: Vec<Point> = if dim == 1 {
        axis_vals(0).into_iter().map(Point::on_line).collect()
    } else {
        let (xs, ys) = (axis_vals(0), axis_vals(1));
        xs.iter().flat_map(|&x| ys.iter().map(move |&y| Point::new(x, y))).collect()
    };
    let mut anchors: Vec<(Point, Point)> = pts
        .iter()
        .flat_map(|a| pts.iter().map(move |b| (*a, *b)))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sample = |rng: &mut ChaCha8Rng| -> Point {
        let x = rng.gen_range(domain.lo(0)..domain.hi(0));
        let y = if dim == 2 { rng.gen_range(domain.lo(1)..domain.hi(1)) } else { 0.0 };
        Point::new(x, y)
    };
    for _ in 0..2000 {
        let a = sample(&mut rng);
        let b = sample(&mut rng);
        anchors.push((a, b));
    }
    anchors
}

/// Unit directions in `R^{2n}` (packed as `[ax, bx]` or `[ax, ay, bx, by]`).
fn displacement_directions(dim: usize, seed: u64) -> Vec<[f64; 4]> {
    let m = 2 * dim;
    let mut dirs = Vec::new();
    for k in 0..m {
        for sgn in [1.0, -1.0] {
            let mut d = [0.0; 4];
            d[k] = sgn;
            dirs.push(d);
        }
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    if dim == 1 {
        dirs.extend([[h, h, 0.0, 0.0], [h, -h, 0.0, 0.0], [-h, h, 0.0, 0.0], [-h, -h, 0.0, 0.0]]);
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
        for _ in 0..24 {
            let mut d = [0.0; 4];
            for v in d.iter_mut() {
                *v = rng.gen_range(-1.0..1.0);
            }
            let n = d.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
            d.iter_mut().for_each(|v| *v /= n);
            dirs.push(d);
        }
    }
    dirs
}

/// Parse an exponent field from a preset name plus its parameters.
pub fn field_from_preset(kind: ExponentKind, value: Option<f64>, table: Option<&Path>) -> Result<ExponentField> {
    match kind {
        ExponentKind::Constant => ExponentField::constant(value.unwrap_or(2.0)),
        ExponentKind::RemarkI => Ok(ExponentField::remark_i()),
        ExponentKind::RemarkIi => Ok(ExponentField::remark_ii()),
        ExponentKind::Tabulated => {
            let path = table.ok_or_else(|| LabError::argument("field.table", "tabulated preset needs a table path"))?;
            ExponentField::tabulated(ExponentTable::from_csv(path)?)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_interval() -> DomainBox {
        DomainBox::interval(-1.0, 1.0)
    }

    #[test]
    fn constant_field_is_constant() {
        let f = ExponentField::constant(2.0).unwrap();
        assert_eq!(f.eval(&Point::on_line(0.3), &Point::on_line(-2.0)), 2.0);
        assert!(ExponentField::constant(1.0).is_err());
    }

    #[test]
    fn remark_ii_value_at_e_minus_two() {
        let r = (-2.0f64).exp();
        assert!((remark_ii_modulus(r) - 2.5).abs() < 1e-14);
        let f = ExponentField::remark_ii();
        let v = f.eval(&Point::on_line(0.1), &Point::on_line(0.1 + r));
        assert!((v - 2.5).abs() < 1e-12);
    }

    #[test]
    fn remark_ii_junction_and_monotone() {
        assert!((remark_ii_modulus(1.0 / E) - 2.0).abs() < 1e-15);
        let mut prev = remark_ii_modulus(0.0);
        for k in 1..2000 {
            let v = remark_ii_modulus(k as f64 * 1e-3);
            assert!(v <= prev + 1e-15);
            prev = v;
        }
    }

    #[test]
    fn presets_are_symmetric_and_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let fields = [ExponentField::constant(1.7).unwrap(), ExponentField::remark_i(), ExponentField::remark_ii()];
        for f in &fields {
            for _ in 0..10_000 {
                let a = Point::new(rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0));
                let b = Point::new(rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0));
                let (pab, pba) = (f.eval(&a, &b), f.eval(&b, &a));
                assert_eq!(pab, pba);
                assert!(pab >= f.p_min() && pab <= f.p_max());
            }
        }
    }

    #[test]
    fn tabulated_out_of_range_is_rejected() {
        let xs = vec![-1.0, 0.0, 1.0];
        let t = ExponentTable::from_fn(xs.clone(), xs, |x, y| 2.0 + 0.1 * (x + y)).unwrap();
        let f = ExponentField::tabulated(t).unwrap();
        assert!(f.try_eval(&Point::on_line(0.0), &Point::on_line(2.0)).is_err());
        let v = f.try_eval(&Point::on_line(0.5), &Point::on_line(-0.5)).unwrap();
        assert!((v - 2.0).abs() < 1e-14);
    }

    #[test]
    fn extrema_constant_and_empty() {
        let f = ExponentField::constant(2.0).unwrap();
        let a = ball_samples(1, &Point::ORIGIN, 0.5, 8);
        let e = extrema_over_product(&f, &a, &a, 0.0).unwrap();
        assert_eq!((e.p_minus, e.p_plus), (2.0, 2.0));
        assert!(extrema_over_product(&f, &[], &a, 0.0).is_err());
    }

    #[test]
    fn remark_ii_ball_extrema() {
        let f = ExponentField::remark_ii();
        let r = 0.1;
        let ext = ball_extrema(&f, 1, &Point::ORIGIN, r, 64).unwrap();
        assert_eq!(ext.p_plus, 3.0);
        // lattice diameter is just under 2R
        assert!(ext.p_minus >= remark_ii_modulus(2.0 * r));
        assert!(ext.p_minus - remark_ii_modulus(2.0 * r) < 0.01);

        let inside = ball_samples(1, &Point::ORIGIN, 0.3, 32);
        let outside = complement_samples(1, &Point::ORIGIN, 0.3, 4.0);
        let bc = extrema_over_product(&f, &inside, &outside, contact_tol(1, 0.3, 32)).unwrap();
        assert_eq!((bc.p_minus, bc.p_plus), (2.0, 3.0));
    }

    #[test]
    fn p1_constant_gives_unit_l() {
        let f = ExponentField::constant(2.5).unwrap();
        let rep = check_p1(&f, &unit_interval(), &[0.1, 0.3, 0.5], &[Point::ORIGIN, Point::on_line(0.2)], 2).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.l_est, Some(1.0));
        assert!(rep.levels.iter().all(|&l| l == 1.0));
    }

    #[test]
    fn p1_rejects_ball_outside_domain() {
        let f = ExponentField::constant(2.0).unwrap();
        let err = check_p1(&f, &unit_interval(), &[0.9], &[Point::on_line(0.5)], 1);
        assert!(matches!(err, Err(LabError::Geometry(_))));
    }

    #[test]
    fn remark_ii_passes_p1_and_p2() {
        let f = ExponentField::remark_ii();
        let centers = [Point::ORIGIN, Point::on_line(0.4), Point::on_line(-0.5)];
        let radii = [0.01, 0.05, 0.1, 0.2, 0.4];
        let p1 = check_p1(&f, &unit_interval(), &radii, &centers[..1], 3).unwrap();
        assert!(p1.pass, "{p1:?}");
        // sup_r r^{-(p+ - p-)} = 2e, attained at 2r = 1/e
        assert!(p1.l_est.unwrap() <= 2.0 * E + 1e-9);
        let p2 = check_p2(&f, &unit_interval(), &[0.05, 0.1, 0.3], &centers[..2], 4.0, 1e-12).unwrap();
        assert!(p2.pass, "{p2:?}");
    }

    #[test]
    fn bump_on_mixed_region_fails_p2() {
        let ball = 0.3;
        let bump = |x: f64, y: f64| -> f64 {
            let inside = |t: f64| t.abs() < ball;
            // smooth bump supported where exactly one argument lies in the ball
            if inside(x) != inside(y) {
                let d = (x.abs() - ball).abs().max((y.abs() - ball).abs()).min(1.0);
                0.5 * (std::f64::consts::PI * d).sin().powi(2)
            } else {
                0.0
            }
        };
        let xs: Vec<f64> = (0..=400).map(|k| -5.0 + k as f64 * 0.025).collect();
        let t = ExponentTable::from_fn(xs.clone(), xs, |x, y| 2.0 + bump(x, y)).unwrap();
        let f = ExponentField::tabulated(t).unwrap();
        let rep = check_p2(&f, &unit_interval(), &[ball], &[Point::ORIGIN], 4.0, 1e-12).unwrap();
        assert!(!rep.pass);
        assert!(rep.witness.value > 0.1);
        assert_eq!(rep.witness.radius, ball);
    }

    #[test]
    fn log_holder_classification() {
        let scales = [1e-1, 1e-2, 1e-3, 1e-4, 1e-6];
        let c = check_log_holder(&ExponentField::constant(2.0).unwrap(), &unit_interval(), &scales, 1, 0.05).unwrap();
        assert!(c.pass);
        assert!(c.levels.iter().all(|&m| m == 0.0));
        let r2 = check_log_holder(&ExponentField::remark_ii(), &unit_interval(), &scales, 1, 0.05).unwrap();
        assert!(r2.pass, "{:?}", r2.levels);
        let r1 = check_log_holder(&ExponentField::remark_i(), &unit_interval(), &scales, 1, 0.05).unwrap();
        assert!(!r1.pass);
        let n = r1.levels.len();
        assert!(r1.levels[n - 1] > r1.levels[n - 2] * 1.05);
        assert!(check_log_holder(&ExponentField::remark_i(), &unit_interval(), &[0.1], 1, 0.05).is_err());
    }
}
