//! CSV and JSON artifacts.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{LabError, Result};
use crate::grid::{Grid, GridFunction};

/// Every float written by the CLI uses this format (17 significant digits).
pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_grid_function(path: &Path, grid: &Grid, u: &GridFunction) -> Result<()> {
    u.check_len(grid)?;
    let mut out = BufWriter::new(File::create(path)?);
    if grid.dim() == 2 {
        writeln!(out, "x,y,u")?;
    } else {
        writeln!(out, "x,u")?;
    }
    for (p, &v) in grid.nodes().iter().zip(u.values()) {
        if grid.dim() == 2 {
            writeln!(out, "{},{},{}", fmt_num(p.x), fmt_num(p.y), fmt_num(v))?;
        } else {
            writeln!(out, "{},{}", fmt_num(p.x), fmt_num(v))?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Read a grid function written by [`write_grid_function`], checking that
/// its nodes match `grid`.
pub fn read_grid_function(path: &Path, grid: &Grid) -> Result<GridFunction> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let expected: &[&str] = if grid.dim() == 2 { &["x", "y", "u"] } else { &["x", "u"] };
    if headers != expected {
        return Err(LabError::argument(
            "input",
            format!("expected header `{}`, found `{}`", expected.join(","), headers.join(",")),
        ));
    }
    let tol = 1e-9 * grid.h();
    let mut values = Vec::with_capacity(grid.len());
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        let nums: Vec<f64> = record
            .iter()
            .map(|c| c.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| LabError::argument("input", format!("row {}: {e}", row + 1)))?;
        if row >= grid.len() {
            return Err(LabError::argument("input", format!("more rows than the {} grid nodes", grid.len())));
        }
        let p = grid.node(row);
        let coords_match = (p.x - nums[0]).abs() <= tol && (grid.dim() == 1 || (p.y - nums[1]).abs() <= tol);
        if !coords_match {
            return Err(LabError::argument(
                "input",
                format!("row {} does not sit on grid node {row}", row + 1),
            ));
        }
        values.push(nums[nums.len() - 1]);
    }
    if values.len() != grid.len() {
        return Err(LabError::argument(
            "input",
            format!("expected {} rows, found {}", grid.len(), values.len()),
        ));
    }
    GridFunction::new(values)
}

pub fn write_energy_history(path: &Path, history: &[f64]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "iteration,energy")?;
    for (k, e) in history.iter().enumerate() {
        writeln!(out, "{k},{}", fmt_num(*e))?;
    }
    out.flush()?;
    Ok(())
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable report")
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = to_json(value);
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}
