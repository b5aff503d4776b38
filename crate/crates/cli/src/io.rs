//! Versioned CSV and JSON artifacts.
//!
//! Every CSV starts with one comment line `# mad <artifact> schema_version=N config=<json>`
//! followed by a column header. Numbers use the shortest round-trip form, so
//! reruns with equal inputs give byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;

use crate::failure::Failure;

pub const CSV_SCHEMA_VERSION: u32 = 1;

pub fn comment_line<C: Serialize>(artifact: &str, config: &C) -> Result<String> {
    Ok(format!(
        "# mad {artifact} schema_version={CSV_SCHEMA_VERSION} config={}\n",
        serde_json::to_string(config)?
    ))
}

pub fn coordinate_names(dim: usize) -> Vec<String> {
    (1..=dim).map(|k| format!("x{k}")).collect()
}

pub fn table<C: Serialize>(
    artifact: &str,
    config: &C,
    columns: &[String],
    rows: impl IntoIterator<Item = Vec<String>>,
) -> Result<String> {
    let mut out = comment_line(artifact, config)?;
    out.push_str(&columns.join(","));
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    Ok(out)
}

pub fn num(v: f64) -> String {
    let mut s = String::new();
    write!(s, "{v}").unwrap();
    s
}

pub fn points_csv<C: Serialize>(artifact: &str, config: &C, seeds: Option<&[u64]>, points: &[Vec<f64>]) -> Result<String> {
    let dim = points.first().map_or(0, Vec::len);
    let mut columns = Vec::new();
    if seeds.is_some() {
        columns.push("seed".to_string());
    }
    columns.extend(coordinate_names(dim));
    let rows = points.iter().enumerate().map(|(i, p)| {
        let mut row = Vec::with_capacity(dim + 1);
        if let Some(s) = seeds {
            row.push(s[i].to_string());
        }
        row.extend(p.iter().map(|&v| num(v)));
        row
    });
    table(artifact, config, &columns, rows)
}

pub fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write(path, &text)
}

/// Coordinates of a points CSV; a leading `seed` column is dropped.
pub fn read_points(path: &Path) -> Result<Vec<Vec<f64>>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_points(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn parse_points(text: &str) -> Result<Vec<Vec<f64>>> {
    let mut lines = text.lines().filter(|l| !l.starts_with('#') && !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Failure::bad_input("empty points file"))?;
    let columns: Vec<&str> = header.split(',').map(str::trim).collect();
    let skip = usize::from(columns.first() == Some(&"seed"));
    let dim = columns.len() - skip;
    if dim == 0 {
        return Err(Failure::bad_input("points file has no coordinate columns").into());
    }
    let mut points = Vec::new();
    for (i, line) in lines.enumerate() {
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != columns.len() {
            return Err(Failure::bad_input(format!("row {} has {} cells, expected {}", i + 1, cells.len(), columns.len())).into());
        }
        let row = cells[skip..]
            .iter()
            .map(|c| c.parse::<f64>().map_err(|_| Failure::bad_input(format!("row {}: '{c}' is not a number", i + 1))))
            .collect::<Result<Vec<f64>, _>>()?;
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Failure::bad_input(format!("row {} is not finite", i + 1)).into());
        }
        points.push(row);
    }
    if points.is_empty() {
        return Err(Failure::bad_input("points file has no rows").into());
    }
    Ok(points)
}
