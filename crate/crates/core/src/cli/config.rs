//! Sectioned key = value run configuration (TOML syntax, flat sections).
//!
//! Parsing collects every problem before failing, so one run reports all
//! unknown keys, type mismatches and range violations together.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use toml::{Table, Value};

use crate::error::{LabError, Result};
use crate::exponent::{field_from_preset, ExponentField, ExponentKind};
use crate::geometry::{DomainBox, Point};
use crate::grid::GridSpec;
use crate::solver::{ExteriorData, SolveConfig};

#[derive(Clone, Debug, PartialEq)]
pub struct GridSection {
    pub dim: usize,
    pub center_x: f64,
    pub center_y: f64,
    pub half_width: f64,
    pub half_width_y: f64,
    pub r_trunc: f64,
    pub nodes_per_axis: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FieldSection {
    pub preset: ExponentKind,
    pub value: Option<f64>,
    pub table: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveSection {
    pub s: f64,
    pub sigma: f64,
    pub q: Option<f64>,
    pub exterior: ExteriorData,
    pub grad_tol: f64,
    pub max_iter: usize,
    pub step0: f64,
    pub backtrack: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiagnosticsSection {
    pub x0: f64,
    pub x0_y: f64,
    pub radius: f64,
    pub inner_ratio: f64,
    pub holder_radius: f64,
    pub holder_levels: usize,
    pub growth_height: Option<f64>,
    pub growth_gamma: f64,
    pub growth_radius: f64,
    pub sup_constant: Option<f64>,
    pub norm_tol: f64,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub seed: u64,
    pub grid: GridSection,
    pub field: FieldSection,
    pub solve: SolveSection,
    pub diagnostics: DiagnosticsSection,
    exponent: ExponentField,
}

const SECTIONS: &[(&str, &[&str])] = &[
    ("run", &["seed"]),
    (
        "grid",
        &["dim", "center_x", "center_y", "half_width", "half_width_y", "r_trunc", "nodes_per_axis"],
    ),
    ("field", &["preset", "value", "table"]),
    (
        "solve",
        &[
            "s", "sigma", "q", "exterior", "value", "slope", "amplitude", "frequency", "lo", "hi", "cell",
            "grad_tol", "max_iter", "step0", "backtrack",
        ],
    ),
    (
        "diagnostics",
        &[
            "x0", "x0_y", "radius", "inner_ratio", "holder_radius", "holder_levels", "growth_height",
            "growth_gamma", "growth_radius", "sup_constant", "norm_tol",
        ],
    ),
];

struct Reader<'a> {
    root: &'a Table,
    errors: Vec<String>,
}

impl<'a> Reader<'a> {
    fn get(&self, section: &str, key: &str) -> Option<&'a Value> {
        self.root.get(section)?.as_table()?.get(key)
    }

    fn float(&mut self, section: &str, key: &str) -> Option<f64> {
        match self.get(section, key)? {
            Value::Float(v) => Some(*v),
            Value::Integer(v) => Some(*v as f64),
            other => {
                self.errors.push(format!("{section}.{key}: expected a number, found {}", other.type_str()));
                None
            }
        }
    }

    fn float_or(&mut self, section: &str, key: &str, default: f64) -> f64 {
        self.float(section, key).unwrap_or(default)
    }

    fn uint(&mut self, section: &str, key: &str) -> Option<u64> {
        match self.get(section, key)? {
            Value::Integer(v) if *v >= 0 => Some(*v as u64),
            Value::Integer(v) => {
                self.errors.push(format!("{section}.{key}: must be nonnegative, found {v}"));
                None
            }
            other => {
                self.errors.push(format!("{section}.{key}: expected an integer, found {}", other.type_str()));
                None
            }
        }
    }

    fn string(&mut self, section: &str, key: &str) -> Option<String> {
        match self.get(section, key)? {
            Value::String(v) => Some(v.clone()),
            other => {
                self.errors.push(format!("{section}.{key}: expected a string, found {}", other.type_str()));
                None
            }
        }
    }

    fn require(&mut self, ok: bool, field: &str, message: impl std::fmt::Display) {
        if !ok {
            self.errors.push(format!("{field}: {message}"));
        }
    }
}

fn check_keys(root: &Table, errors: &mut Vec<String>) {
    for (name, value) in root {
        match SECTIONS.iter().find(|(s, _)| s == name) {
            None => errors.push(format!("{name}: unknown section")),
            Some((_, keys)) => match value.as_table() {
                None => errors.push(format!("{name}: expected a section")),
                Some(table) => {
                    for key in table.keys() {
                        if !keys.contains(&key.as_str()) {
                            errors.push(format!("{name}.{key}: unknown key"));
                        }
                    }
                }
            },
        }
    }
}

impl RunConfig {
    pub fn parse_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Config(vec![format!("{}: {e}", path.display())]))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse_str(&text, base)
    }

    /// Parse and validate; relative table paths resolve against `base`.
    pub fn parse_str(text: &str, base: &Path) -> Result<Self> {
        let root: Table = text
            .parse()
            .map_err(|e: toml::de::Error| LabError::Config(vec![e.message().to_string()]))?;
        let mut errors = Vec::new();
        check_keys(&root, &mut errors);
        let mut rd = Reader { root: &root, errors };

        let seed = rd.uint("run", "seed").unwrap_or(0);

        let dim = rd.uint("grid", "dim").unwrap_or(1) as usize;
        rd.require(dim == 1 || dim == 2, "grid.dim", format!("must be 1 or 2, found {dim}"));
        let half_width = rd.float_or("grid", "half_width", 1.0);
        let grid = GridSection {
            dim,
            center_x: rd.float_or("grid", "center_x", 0.0),
            center_y: if dim == 2 { rd.float_or("grid", "center_y", 0.0) } else { 0.0 },
            half_width,
            half_width_y: if dim == 2 { rd.float_or("grid", "half_width_y", half_width) } else { 0.0 },
            r_trunc: rd.float_or("grid", "r_trunc", 4.0 * half_width),
            nodes_per_axis: rd.uint("grid", "nodes_per_axis").unwrap_or(if dim == 2 { 41 } else { 401 }) as usize,
        };
        rd.require(grid.half_width > 0.0, "grid.half_width", "must be positive");
        if dim == 2 {
            rd.require(grid.half_width_y > 0.0, "grid.half_width_y", "must be positive");
        }
        let omega = grid.omega();
        rd.require(
            grid.r_trunc > omega.circumradius(),
            "grid.r_trunc",
            format!("must exceed the domain circumradius {}", omega.circumradius()),
        );
        rd.require(
            grid.nodes_per_axis >= 9 && grid.nodes_per_axis % 2 == 1,
            "grid.nodes_per_axis",
            format!("must be odd and at least 9, found {}", grid.nodes_per_axis),
        );

        let preset_name = rd.string("field", "preset").unwrap_or_else(|| "constant".into());
        let preset = ExponentKind::parse(&preset_name);
        rd.require(preset.is_some(), "field.preset", format!("unknown preset `{preset_name}`"));
        let preset = preset.unwrap_or(ExponentKind::Constant);
        let value = match preset {
            ExponentKind::Constant => Some(rd.float_or("field", "value", 2.0)),
            _ => None,
        };
        let table = match preset {
            ExponentKind::Tabulated => {
                let t = rd.string("field", "table");
                rd.require(t.is_some(), "field.table", "tabulated preset needs a table path");
                rd.require(dim == 1, "field.preset", "tabulated exponents support dim = 1 only");
                t.map(PathBuf::from)
            }
            _ => None,
        };
        let field = FieldSection { preset, value, table };
        let exponent = match field.build(base) {
            Ok(f) => Some(f),
            Err(e) => {
                rd.errors.push(format!("field: {e}"));
                None
            }
        };

        let s = rd.float_or("solve", "s", 0.5);
        let sigma = rd.float_or("solve", "sigma", 0.5 * s);
        let q = rd.float("solve", "q");
        rd.require(s > 0.0 && s < 1.0, "solve.s", format!("must lie in (0, 1), found {s}"));
        rd.require(sigma > 0.0 && sigma < s, "solve.sigma", format!("must lie in (0, s), found {sigma}"));
        if let Some(q) = q {
            rd.require(q >= 1.0, "solve.q", format!("must be at least 1, found {q}"));
        }
        let kind = rd.string("solve", "exterior").unwrap_or_else(|| "linear".into());
        let exterior = match kind.as_str() {
            "constant" => ExteriorData::Constant { value: rd.float_or("solve", "value", 0.0) },
            "linear" => ExteriorData::Linear { slope: rd.float_or("solve", "slope", 1.0) },
            "sign" => ExteriorData::Sign { amplitude: rd.float_or("solve", "amplitude", 1.0) },
            "sine" => ExteriorData::Sine {
                amplitude: rd.float_or("solve", "amplitude", 1.0),
                frequency: rd.float_or("solve", "frequency", 1.0),
            },
            "quadratic" => ExteriorData::Quadratic,
            "abs_sqrt" => ExteriorData::AbsSqrt,
            "random" => ExteriorData::Random {
                seed,
                lo: rd.float_or("solve", "lo", -1.0),
                hi: rd.float_or("solve", "hi", 1.0),
                cell: rd.float_or("solve", "cell", 0.25),
            },
            other => {
                rd.errors.push(format!("solve.exterior: unknown kind `{other}`"));
                ExteriorData::Constant { value: 0.0 }
            }
        };
        if let Err(e) = exterior.validate() {
            rd.errors.push(format!("solve.exterior: {e}"));
        }
        let solve = SolveSection {
            s,
            sigma,
            q,
            exterior,
            grad_tol: rd.float_or("solve", "grad_tol", 1e-8),
            max_iter: rd.uint("solve", "max_iter").unwrap_or(20_000) as usize,
            step0: rd.float_or("solve", "step0", 1.0),
            backtrack: rd.float_or("solve", "backtrack", 0.5),
        };
        rd.require(solve.grad_tol > 0.0, "solve.grad_tol", "must be positive");
        rd.require(solve.max_iter > 0, "solve.max_iter", "must be positive");
        rd.require(solve.step0 > 0.0, "solve.step0", "must be positive");
        rd.require(
            solve.backtrack > 0.0 && solve.backtrack < 1.0,
            "solve.backtrack",
            "must lie in (0, 1)",
        );

        let min_half = if dim == 2 { grid.half_width.min(grid.half_width_y) } else { grid.half_width };
        let radius = rd.float_or("diagnostics", "radius", 0.5 * min_half);
        let diagnostics = DiagnosticsSection {
            x0: rd.float_or("diagnostics", "x0", grid.center_x),
            x0_y: if dim == 2 { rd.float_or("diagnostics", "x0_y", grid.center_y) } else { 0.0 },
            radius,
            inner_ratio: rd.float_or("diagnostics", "inner_ratio", 0.5),
            holder_radius: rd.float_or("diagnostics", "holder_radius", 0.64 * min_half),
            holder_levels: rd.uint("diagnostics", "holder_levels").unwrap_or(5) as usize,
            growth_height: rd.float("diagnostics", "growth_height"),
            growth_gamma: rd.float_or("diagnostics", "growth_gamma", 0.5),
            growth_radius: rd.float_or("diagnostics", "growth_radius", radius / 8.0),
            sup_constant: rd.float("diagnostics", "sup_constant"),
            norm_tol: rd.float_or("diagnostics", "norm_tol", 1e-10),
        };
        let d = &diagnostics;
        let x0 = Point::new(d.x0, d.x0_y);
        let fits = |r: f64| r > 0.0 && omega.contains_closed_ball(&x0, r) || fits_touching(&omega, &x0, r);
        rd.require(fits(d.radius), "diagnostics.radius", "ball B_R(x0) must lie inside the domain");
        rd.require(
            2.0 * d.radius <= grid.r_trunc - grid.max_half_width(),
            "diagnostics.radius",
            "ball diameter must not exceed the interaction radius r_trunc - half_width",
        );
        rd.require(
            d.inner_ratio > 0.0 && d.inner_ratio < 1.0,
            "diagnostics.inner_ratio",
            "must lie in (0, 1)",
        );
        rd.require(fits(d.holder_radius), "diagnostics.holder_radius", "ball must lie inside the domain");
        rd.require(fits(d.growth_radius) && d.growth_radius < 1.0, "diagnostics.growth_radius", "ball must lie inside the domain and R < 1");
        rd.require(
            d.growth_gamma > 0.0 && d.growth_gamma < 1.0,
            "diagnostics.growth_gamma",
            "must lie in (0, 1)",
        );
        if let Some(h) = d.growth_height {
            rd.require(h > 0.0, "diagnostics.growth_height", "must be positive");
        }
        rd.require(d.norm_tol > 0.0, "diagnostics.norm_tol", "must be positive");

        if !rd.errors.is_empty() {
            return Err(LabError::Config(rd.errors));
        }
        Ok(RunConfig {
            seed,
            grid,
            field,
            solve,
            diagnostics,
            exponent: exponent.expect("validated"),
        })
    }

    /// Replace the seed (and every seeded component).
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        if let ExteriorData::Random { seed: ref mut s, .. } = self.solve.exterior {
            *s = seed;
        }
        self
    }

    pub fn exponent(&self) -> &ExponentField {
        &self.exponent
    }

    pub fn grid_spec(&self) -> GridSpec {
        GridSpec {
            omega: self.grid.omega(),
            r_trunc: self.grid.r_trunc,
            nodes_per_axis: self.grid.nodes_per_axis,
        }
    }

    pub fn solve_config(&self) -> SolveConfig {
        let mut cfg = SolveConfig::new(self.grid_spec(), self.exponent.clone(), self.solve.s, self.solve.exterior.clone());
        cfg.sigma = self.solve.sigma;
        cfg.q = self.solve.q;
        cfg.grad_tol = self.solve.grad_tol;
        cfg.max_iter = self.solve.max_iter;
        cfg.step0 = self.solve.step0;
        cfg.backtrack = self.solve.backtrack;
        cfg.seed = self.seed;
        cfg
    }

    pub fn center(&self) -> Point {
        Point::new(self.diagnostics.x0, self.diagnostics.x0_y)
    }

    /// Canonical form: every key with its resolved value, fixed order.
    pub fn normalized(&self) -> String {
        let mut out = String::new();
        let f = |v: f64| format!("{v:?}");
        let g = &self.grid;
        let _ = writeln!(out, "[run]\nseed = {}\n", self.seed);
        let _ = writeln!(out, "[grid]\ndim = {}\ncenter_x = {}", g.dim, f(g.center_x));
        if g.dim == 2 {
            let _ = writeln!(out, "center_y = {}", f(g.center_y));
        }
        let _ = writeln!(out, "half_width = {}", f(g.half_width));
        if g.dim == 2 {
            let _ = writeln!(out, "half_width_y = {}", f(g.half_width_y));
        }
        let _ = writeln!(out, "r_trunc = {}\nnodes_per_axis = {}\n", f(g.r_trunc), g.nodes_per_axis);

        let _ = writeln!(out, "[field]\npreset = \"{}\"", self.field.preset.name());
        if let Some(v) = self.field.value {
            let _ = writeln!(out, "value = {}", f(v));
        }
        if let Some(t) = &self.field.table {
            let _ = writeln!(out, "table = \"{}\"", t.display());
        }
        out.push('\n');

        let s = &self.solve;
        let _ = writeln!(out, "[solve]\ns = {}\nsigma = {}", f(s.s), f(s.sigma));
        if let Some(q) = s.q {
            let _ = writeln!(out, "q = {}", f(q));
        }
        match &s.exterior {
            ExteriorData::Constant { value } => {
                let _ = writeln!(out, "exterior = \"constant\"\nvalue = {}", f(*value));
            }
            ExteriorData::Linear { slope } => {
                let _ = writeln!(out, "exterior = \"linear\"\nslope = {}", f(*slope));
            }
            ExteriorData::Sign { amplitude } => {
                let _ = writeln!(out, "exterior = \"sign\"\namplitude = {}", f(*amplitude));
            }
            ExteriorData::Sine { amplitude, frequency } => {
                let _ = writeln!(
                    out,
                    "exterior = \"sine\"\namplitude = {}\nfrequency = {}",
                    f(*amplitude),
                    f(*frequency)
                );
            }
            ExteriorData::Quadratic => {
                let _ = writeln!(out, "exterior = \"quadratic\"");
            }
            ExteriorData::AbsSqrt => {
                let _ = writeln!(out, "exterior = \"abs_sqrt\"");
            }
            ExteriorData::Random { lo, hi, cell, .. } => {
                let _ = writeln!(out, "exterior = \"random\"\nlo = {}\nhi = {}\ncell = {}", f(*lo), f(*hi), f(*cell));
            }
        }
        let _ = writeln!(
            out,
            "grad_tol = {}\nmax_iter = {}\nstep0 = {}\nbacktrack = {}\n",
            f(s.grad_tol),
            s.max_iter,
            f(s.step0),
            f(s.backtrack)
        );

        let d = &self.diagnostics;
        let _ = writeln!(out, "[diagnostics]\nx0 = {}", f(d.x0));
        if g.dim == 2 {
            let _ = writeln!(out, "x0_y = {}", f(d.x0_y));
        }
        let _ = writeln!(
            out,
            "radius = {}\ninner_ratio = {}\nholder_radius = {}\nholder_levels = {}",
            f(d.radius),
            f(d.inner_ratio),
            f(d.holder_radius),
            d.holder_levels
        );
        if let Some(h) = d.growth_height {
            let _ = writeln!(out, "growth_height = {}", f(h));
        }
        let _ = writeln!(out, "growth_gamma = {}\ngrowth_radius = {}", f(d.growth_gamma), f(d.growth_radius));
        if let Some(c) = d.sup_constant {
            let _ = writeln!(out, "sup_constant = {}", f(c));
        }
        let _ = writeln!(out, "norm_tol = {}", f(d.norm_tol));
        out
    }
}

fn fits_touching(omega: &DomainBox, x0: &Point, r: f64) -> bool {
    r > 0.0
        && (0..omega.dim).all(|k| (x0.coord(k) - omega.center.coord(k)).abs() + r <= omega.half_width[k] + 1e-12)
}

impl GridSection {
    pub fn omega(&self) -> DomainBox {
        if self.dim == 2 {
            DomainBox {
                dim: 2,
                center: Point::new(self.center_x, self.center_y),
                half_width: [self.half_width, self.half_width_y],
            }
        } else {
            DomainBox::interval(self.center_x - self.half_width, self.center_x + self.half_width)
        }
    }

    fn max_half_width(&self) -> f64 {
        if self.dim == 2 {
            self.half_width.max(self.half_width_y)
        } else {
            self.half_width
        }
    }
}

impl FieldSection {
    pub fn build(&self, base: &Path) -> Result<ExponentField> {
        let table = self.table.as_ref().map(|t| if t.is_absolute() { t.clone() } else { base.join(t) });
        field_from_preset(self.preset, self.value, table.as_deref())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<RunConfig> {
        RunConfig::parse_str(text, Path::new("."))
    }

    #[test]
    fn minimal_config_takes_defaults() {
        let cfg = parse("[grid]\ndim = 1\n").unwrap();
        assert_eq!(cfg.grid.nodes_per_axis, 401);
        assert_eq!(cfg.grid.r_trunc, 4.0);
        assert_eq!(cfg.solve.s, 0.5);
        assert_eq!(cfg.solve.sigma, 0.25);
        assert_eq!(cfg.field.preset, ExponentKind::Constant);
        assert_eq!(cfg.solve.exterior, ExteriorData::Linear { slope: 1.0 });
    }

    #[test]
    fn problems_are_aggregated() {
        let err = parse("[solve]\ns = 0.4\nsigma = 0.6\nbogus = 1\n[grid]\nnodes_per_axis = 10\n[extra]\n").unwrap_err();
        let LabError::Config(list) = err else { panic!() };
        assert!(list.iter().any(|e| e.starts_with("solve.sigma")));
        assert!(list.iter().any(|e| e.starts_with("solve.bogus")));
        assert!(list.iter().any(|e| e.starts_with("grid.nodes_per_axis")));
        assert!(list.iter().any(|e| e.starts_with("extra")));
    }

    #[test]
    fn type_mismatch_is_reported() {
        let err = parse("[solve]\ns = \"half\"\n").unwrap_err();
        assert!(err.to_string().contains("solve.s: expected a number"));
    }

    #[test]
    fn normalized_form_is_a_fixed_point() {
        let cfg = parse("[field]\npreset = \"remark_ii\"\n[solve]\nexterior = \"sine\"\nfrequency = 2\n").unwrap();
        let once = cfg.normalized();
        let twice = parse(&once).unwrap().normalized();
        assert_eq!(once, twice);
    }
}
