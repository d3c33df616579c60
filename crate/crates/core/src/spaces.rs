//! Modulars and Luxemburg norms of variable-exponent Lebesgue and fractional
//! Sobolev type on grid regions.
//!
//! Every modular here is a finite sum `sum_k w_k (t a_k)^{p_k}` in the scale
//! `t = 1/lambda`, represented by [`PowerSum`]; norms are found by bisection
//! on that scalar function.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{LabError, Result};
use crate::exponent::ExponentField;
use crate::geometry::unit_sphere_area;
use crate::grid::{Grid, GridFunction, Region};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModularKind {
    Lebesgue,
    Gagliardo,
    Combined,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ModularResult {
    pub value: f64,
    pub kind: ModularKind,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NormResult {
    pub value: f64,
    pub bracket: (f64, f64),
    pub iterations: usize,
}

pub const DEFAULT_NORM_TOL: f64 = 1e-10;
const MAX_BISECTIONS: usize = 200;
const MAX_EXPANSIONS: usize = 2100;

/// `rho(t) = sum_k weight_k * (t * base_k)^{exponent_k}`.
#[derive(Clone, Debug, Default)]
pub struct PowerSum {
    base: Vec<f64>,
    exponent: Vec<f64>,
    weight: Vec<f64>,
}

impl PowerSum {
    fn push(&mut self, base: f64, exponent: f64, weight: f64) {
        if base != 0.0 && weight != 0.0 {
            self.base.push(base.abs());
            self.exponent.push(exponent);
            self.weight.push(weight);
        }
    }

    fn extend(&mut self, other: PowerSum) {
        self.base.extend(other.base);
        self.exponent.extend(other.exponent);
        self.weight.extend(other.weight);
    }

    /// `sum_{i in region} m_i |u_i|^{p(x_i, x_i)}`.
    pub fn lebesgue(grid: &Grid, field: &ExponentField, u: &GridFunction, region: &Region) -> Result<Self> {
        u.check_len(grid)?;
        let mut sum = PowerSum::default();
        for (i, w) in region.iter() {
            sum.push(u[i], field.diagonal(&grid.node(i)), w);
        }
        Ok(sum)
    }

    /// `sum_{i in a, j in b, i != j} m_i m_j |u_i - u_j|^{p_ij} / |x_i - x_j|^{n + s p_ij}`.
    pub fn gagliardo(
        grid: &Grid,
        field: &ExponentField,
        s: f64,
        u: &GridFunction,
        a: &Region,
        b: &Region,
    ) -> Result<Self> {
        check_order(s)?;
        u.check_len(grid)?;
        let n = grid.dim() as f64;
        let parts: Vec<PowerSum> = a
            .nodes
            .par_iter()
            .zip(a.weights.par_iter())
            .map(|(&i, &wi)| {
                let xi = grid.node(i);
                let mut row = PowerSum::default();
                for (j, wj) in b.iter() {
                    if j == i {
                        continue;
                    }
                    let xj = grid.node(j);
                    let p = field.eval(&xi, &xj);
                    row.push(u[i] - u[j], p, wi * wj / xi.dist(&xj).powf(n + s * p));
                }
                row
            })
            .collect();
        let mut sum = PowerSum::default();
        for part in parts {
            sum.extend(part);
        }
        Ok(sum)
    }

    /// Lebesgue plus Gagliardo modular on one region.
    pub fn combined(grid: &Grid, field: &ExponentField, s: f64, u: &GridFunction, region: &Region) -> Result<Self> {
        let mut sum = PowerSum::lebesgue(grid, field, u, region)?;
        sum.extend(PowerSum::gagliardo(grid, field, s, u, region, region)?);
        Ok(sum)
    }

    /// Modular of `t * u`.
    pub fn eval(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for k in 0..self.base.len() {
            acc += self.weight[k] * (t * self.base[k]).powf(self.exponent[k]);
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.base.is_empty()
    }

    /// Smallest and largest exponent among the nonzero terms.
    pub fn exponent_range(&self) -> Option<(f64, f64)> {
        if self.exponent.is_empty() {
            return None;
        }
        let lo = self.exponent.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = self.exponent.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Some((lo, hi))
    }

    pub fn norm(&self, tol: f64) -> Result<NormResult> {
        if self.is_zero() {
            return Ok(NormResult { value: 0.0, bracket: (0.0, 0.0), iterations: 0 });
        }
        luxemburg_norm(|t| self.eval(t), tol)
    }
}

fn check_order(s: f64) -> Result<()> {
    if s > 0.0 && s < 1.0 {
        Ok(())
    } else {
        Err(LabError::argument("s", format!("order must lie in (0, 1), got {s}")))
    }
}

/// `inf { lambda > 0 : modular(1/lambda) <= 1 }` for a modular given as a
/// nondecreasing function of the scale `1/lambda` with `modular(t) > 0` for
/// `t > 0`.
///
/// The bracket is grown by doubling or halving from `lambda = 1` and then
/// bisected until its width is at most `0.1 * tol * lambda`, which keeps the
/// modular at the returned midpoint within `tol` of 1 for exponents up to 10.
pub fn luxemburg_norm(modular: impl Fn(f64) -> f64, tol: f64) -> Result<NormResult> {
    if !(tol > 0.0) {
        return Err(LabError::argument("tol", "tolerance must be positive"));
    }
    let below = |lambda: f64| {
        let v = modular(1.0 / lambda);
        v.is_finite() && v <= 1.0
    };
    let (mut lo, mut hi);
    let mut iterations = 0;
    if below(1.0) {
        hi = 1.0;
        lo = 0.5;
        while below(lo) {
            hi = lo;
            lo *= 0.5;
            iterations += 1;
            if iterations > MAX_EXPANSIONS || lo == 0.0 {
                return Err(LabError::Resolution("modular stays below 1 at every scale".into()));
            }
        }
    } else {
        lo = 1.0;
        hi = 2.0;
        while !below(hi) {
            lo = hi;
            hi *= 2.0;
            iterations += 1;
            if iterations > MAX_EXPANSIONS || !hi.is_finite() {
                return Err(LabError::Divergence);
            }
        }
    }
    for _ in 0..MAX_BISECTIONS {
        if hi - lo <= 0.1 * tol * lo {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if below(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
        iterations += 1;
    }
    Ok(NormResult {
        value: 0.5 * (lo + hi),
        bracket: (lo, hi),
        iterations,
    })
}

pub fn lebesgue_modular(grid: &Grid, field: &ExponentField, u: &GridFunction, region: &Region) -> Result<ModularResult> {
    nonempty(region)?;
    Ok(ModularResult {
        value: PowerSum::lebesgue(grid, field, u, region)?.eval(1.0),
        kind: ModularKind::Lebesgue,
    })
}

pub fn lebesgue_norm(
    grid: &Grid,
    field: &ExponentField,
    u: &GridFunction,
    region: &Region,
    tol: f64,
) -> Result<NormResult> {
    nonempty(region)?;
    PowerSum::lebesgue(grid, field, u, region)?.norm(tol)
}

pub fn gagliardo_modular(
    grid: &Grid,
    field: &ExponentField,
    s: f64,
    u: &GridFunction,
    a: &Region,
    b: &Region,
) -> Result<ModularResult> {
    Ok(ModularResult {
        value: PowerSum::gagliardo(grid, field, s, u, a, b)?.eval(1.0),
        kind: ModularKind::Gagliardo,
    })
}

/// Luxemburg seminorm built on the Gagliardo modular over `region x region`.
pub fn sobolev_seminorm(
    grid: &Grid,
    field: &ExponentField,
    s: f64,
    u: &GridFunction,
    region: &Region,
    tol: f64,
) -> Result<NormResult> {
    PowerSum::gagliardo(grid, field, s, u, region, region)?.norm(tol)
}

pub fn combined_modular(
    grid: &Grid,
    field: &ExponentField,
    s: f64,
    u: &GridFunction,
    region: &Region,
) -> Result<ModularResult> {
    nonempty(region)?;
    Ok(ModularResult {
        value: PowerSum::combined(grid, field, s, u, region)?.eval(1.0),
        kind: ModularKind::Combined,
    })
}

/// Luxemburg norm of the combined (Lebesgue plus Gagliardo) modular.
pub fn combined_norm(
    grid: &Grid,
    field: &ExponentField,
    s: f64,
    u: &GridFunction,
    region: &Region,
    tol: f64,
) -> Result<NormResult> {
    nonempty(region)?;
    PowerSum::combined(grid, field, s, u, region)?.norm(tol)
}

/// Sum norm `||u||_{L^{p_bar}} + [u]`.
pub fn sum_norm(grid: &Grid, field: &ExponentField, s: f64, u: &GridFunction, region: &Region, tol: f64) -> Result<f64> {
    Ok(lebesgue_norm(grid, field, u, region, tol)?.value + sobolev_seminorm(grid, field, s, u, region, tol)?.value)
}

fn nonempty(region: &Region) -> Result<()> {
    if region.is_empty() {
        Err(LabError::Geometry("empty region".into()))
    } else {
        Ok(())
    }
}

/// Outcome of the modular/norm relations for one function.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SandwichCheck {
    /// `norm > 1 <=> modular > 1` (and likewise for `< 1`), skipped inside the slack band.
    pub trichotomy: bool,
    /// `norm^{p_-} <= modular <= norm^{p_+}` above 1, reversed below 1.
    pub sandwich: bool,
}

impl SandwichCheck {
    pub fn holds(&self) -> bool {
        self.trichotomy && self.sandwich
    }
}

pub fn check_sandwich(modular: f64, norm: f64, p_minus: f64, p_plus: f64, slack: f64) -> SandwichCheck {
    let trichotomy = if (norm - 1.0).abs() <= slack || (modular - 1.0).abs() <= slack {
        true
    } else {
        (norm > 1.0) == (modular > 1.0)
    };
    let (lo, hi) = if norm >= 1.0 {
        (norm.powf(p_minus), norm.powf(p_plus))
    } else {
        (norm.powf(p_plus), norm.powf(p_minus))
    };
    let sandwich = modular >= lo * (1.0 - slack) && modular <= hi * (1.0 + slack);
    SandwichCheck { trichotomy, sandwich }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HolderCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub pass: bool,
}

/// `sum |u v| <= 2 ||u||_{L^{p_bar}} ||v||_{L^{p_bar'}}` on a region.
pub fn holder_product_check(
    grid: &Grid,
    field: &ExponentField,
    u: &GridFunction,
    v: &GridFunction,
    region: &Region,
) -> Result<HolderCheck> {
    nonempty(region)?;
    u.check_len(grid)?;
    v.check_len(grid)?;
    let mut su = PowerSum::default();
    let mut sv = PowerSum::default();
    let mut lhs = 0.0;
    for (i, w) in region.iter() {
        let p = field.diagonal(&grid.node(i));
        if !(p > 1.0) {
            return Err(LabError::argument("field", "exponent must exceed 1 on the region"));
        }
        su.push(u[i], p, w);
        sv.push(v[i], p / (p - 1.0), w);
        lhs += w * (u[i] * v[i]).abs();
    }
    let rhs = 2.0 * su.norm(DEFAULT_NORM_TOL)?.value * sv.norm(DEFAULT_NORM_TOL)?.value;
    let ratio = if rhs > 0.0 { lhs / rhs } else { 0.0 };
    Ok(HolderCheck {
        lhs,
        rhs,
        ratio,
        pass: lhs <= rhs * (1.0 + 1e-9),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EmbeddingReport {
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
    pub c_explicit: f64,
    /// Smallest constant making the inequality hold for this `u`.
    pub c_empirical: f64,
    pub p_minus: f64,
    pub p_plus: f64,
    pub seminorm: f64,
}

/// Lower-order embedding: the `W^{sigma, q}` double sum over `region x sub`
/// against the variable-exponent seminorm on `region`.
///
/// The constant is `2^{1/q} max(K^{a/q}, K^{b/q})` with
/// `K = (p_+ - q)|S^{n-1}| / ((s - sigma) p_+ q)`, `a = (p_+ - q)/p_+`,
/// `b = (p_- - q)/p_-`; it comes from the variable-exponent Hölder inequality
/// and the radial bound on `∫ |x-y|^{e-n}` over a set of diameter `d`.
#[allow(clippy::too_many_arguments)]
pub fn embedding_bound(
    grid: &Grid,
    field: &ExponentField,
    s: f64,
    sigma: f64,
    q: f64,
    u: &GridFunction,
    sub: &Region,
    region: &Region,
    d: f64,
) -> Result<EmbeddingReport> {
    check_order(s)?;
    if !(sigma > 0.0 && sigma < s) {
        return Err(LabError::argument("sigma", format!("sigma must lie in (0, s), got {sigma}")));
    }
    nonempty(region)?;
    nonempty(sub)?;
    let pts: Vec<_> = region.nodes.iter().map(|&i| grid.node(i)).collect();
    let mut diameter: f64 = 0.0;
    let (mut p_minus, mut p_plus) = (f64::INFINITY, f64::NEG_INFINITY);
    for x in &pts {
        for y in &pts {
            diameter = diameter.max(x.dist(y));
            let p = field.eval(x, y);
            p_minus = p_minus.min(p);
            p_plus = p_plus.max(p);
        }
    }
    if !(d <= 1.0 && d + 1e-12 >= diameter) {
        return Err(LabError::argument(
            "d",
            format!("need region diameter {diameter} <= d <= 1, got d = {d}"),
        ));
    }
    if !(q >= 1.0 && q < p_minus) {
        return Err(LabError::argument("q", format!("need 1 <= q < p_- = {p_minus}, got {q}")));
    }
    if sub.nodes.iter().any(|i| !region.contains(*i)) {
        return Err(LabError::argument("sub", "subregion must be contained in the region"));
    }

    let lhs = PowerSum::gagliardo(grid, &ExponentField::constant(q)?, sigma, u, region, sub)?
        .eval(1.0)
        .powf(1.0 / q);
    let seminorm = sobolev_seminorm(grid, field, s, u, region, DEFAULT_NORM_TOL)?.value;

    let a = (p_plus - q) / p_plus;
    let b = (p_minus - q) / p_minus;
    let k = (p_plus - q) * unit_sphere_area(grid.dim()) / ((s - sigma) * p_plus * q);
    let c_explicit = 2f64.powf(1.0 / q) * k.powf(a / q).max(k.powf(b / q));
    let x = sub.measure() * d.powf((s - sigma) * p_plus * q / (p_plus - q));
    let geometric = x.powf(a / q).max(x.powf(b / q));
    let rhs = c_explicit * geometric * seminorm;
    let c_empirical = if geometric * seminorm > 0.0 { lhs / (geometric * seminorm) } else { 0.0 };
    Ok(EmbeddingReport {
        lhs,
        rhs,
        pass: lhs <= rhs * (1.0 + 1e-9),
        c_explicit,
        c_empirical,
        p_minus,
        p_plus,
        seminorm,
    })
}
