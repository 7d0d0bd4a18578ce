//! Slices, manifests and other run artifacts.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use speclag::{RealField, VelocityGrid};

use crate::config::RunConfig;

const AXES: [&str; 3] = ["x", "y", "z"];

/// Off-axis node for slices: the node nearest 0.
pub fn slice_node(grid: &VelocityGrid) -> usize {
    grid.nearest_index(0.0)
}

/// Axis slices of `f` through the origin, with magnitude and sign split
/// out for log-scale plots.
pub fn slice_csv(f: &RealField, axis: usize) -> String {
    let grid = f.grid();
    let c = slice_node(grid);
    let mut out = format!("v_{},value,abs,sign\n", AXES[axis]);
    for i in 0..grid.n() {
        let mut k = [c, c, c];
        k[axis] = i;
        let x = f.at(k[0], k[1], k[2]);
        let sign = if x > 0.0 {
            1
        } else if x < 0.0 {
            -1
        } else {
            0
        };
        writeln!(out, "{},{:e},{:e},{}", grid.v(i), x, x.abs(), sign).expect("string write");
    }
    out
}

/// Writes `<stem>_x.csv`, `<stem>_y.csv`, `<stem>_z.csv` into `dir`.
pub fn write_slices(dir: &Path, stem: &str, f: &RealField) -> Result<Vec<PathBuf>> {
    (0..3)
        .map(|axis| {
            let path = dir.join(format!("{stem}_{}.csv", AXES[axis]));
            write_text(&path, &slice_csv(f, axis))?;
            Ok(path)
        })
        .collect()
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    write_text(path, &(text + "\n"))
}

pub fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

#[derive(Debug, Serialize)]
pub struct Derived {
    pub dv: f64,
    pub dzeta: f64,
    pub zeta_max: f64,
    /// Fixed off-axis velocity of every slice.
    pub slice_offaxis: f64,
}

impl Derived {
    pub fn of(grid: &VelocityGrid) -> Self {
        Self {
            dv: grid.dv(),
            dzeta: grid.dzeta(),
            zeta_max: grid.zeta_max(),
            slice_offaxis: grid.v(slice_node(grid)),
        }
    }
}

/// Everything needed to repeat a run.
#[derive(Debug, Serialize)]
pub struct Manifest<'a> {
    pub command: &'a str,
    pub version: &'static str,
    pub config: &'a RunConfig,
    pub input: Option<String>,
    pub derived: Derived,
    pub jobs: usize,
    pub deterministic: bool,
    pub wall_time_s: f64,
    pub outputs: Vec<String>,
    pub warnings: Vec<String>,
}

pub fn display_paths(paths: &[PathBuf]) -> Vec<String> {
    paths.iter().map(|p| p.display().to_string()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slice_columns() {
        let grid = VelocityGrid::new(4.0, 8).unwrap();
        let f = RealField::from_fn(grid, |v| v[1] + 10.0 * v[2]);
        let csv = slice_csv(&f, 1);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "v_y,value,abs,sign");
        assert_eq!(lines.len(), 9);
        assert_eq!(lines[1], "-4,-4e0,4e0,-1");
        assert_eq!(lines[5], "0,0e0,0e0,0");
        assert_eq!(lines[8], "3,3e0,3e0,1");
        let d = Derived::of(&grid);
        assert_eq!(d.slice_offaxis, 0.0);
    }
}
