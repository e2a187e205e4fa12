//! Regular field grids and their plain-text file format.
//!
//! ```text
//! width height cell_size origin_x origin_y
//! v00 v01 ... (one row per line, `width` values, row 0 at origin_y)
//! ```
//!
//! Infeasible cells are written as `inf`.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{Field, Vec2};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub cols: usize,
    pub rows: usize,
    pub cell_size: f64,
    /// Lower-left corner of cell (0, 0).
    pub origin: Vec2,
}

impl GridSpec {
    /// Square cells tiling the whole field, `cols` across its length.
    pub fn covering(field: &Field, cols: usize) -> Self {
        let cell_size = field.length / cols as f64;
        let rows = (field.width / cell_size).round().max(1.0) as usize;
        Self {
            cols,
            rows,
            cell_size,
            origin: Vec2::ZERO,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.cols < 4 || self.rows < 4 {
            return Err(Error::invalid("grid", "resolution must be at least 4x4"));
        }
        if !(self.cell_size.is_finite() && self.cell_size > 0.0) || !self.origin.is_finite() {
            return Err(Error::invalid("grid", "cell size must be positive and origin finite"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.cols * self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Center of the cell at flat row-major `index`.
    pub fn cell_center(&self, index: usize) -> Vec2 {
        let (row, col) = (index / self.cols, index % self.cols);
        Vec2::new(
            self.origin.x + (col as f64 + 0.5) * self.cell_size,
            self.origin.y + (row as f64 + 0.5) * self.cell_size,
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub spec: GridSpec,
    /// Row-major values; `f64::INFINITY` marks an infeasible cell.
    pub values: Vec<f64>,
}

impl Grid {
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.spec.cols + col]
    }

    pub fn to_text(&self) -> String {
        let s = &self.spec;
        let mut out = format!(
            "{} {} {} {} {}\n",
            s.cols, s.rows, s.cell_size, s.origin.x, s.origin.y
        );
        for row in self.values.chunks(s.cols) {
            for (i, v) in row.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                if v.is_infinite() {
                    out.push_str("inf");
                } else {
                    let _ = write!(out, "{v}");
                }
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> std::result::Result<Grid, String> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header: Vec<&str> = lines
            .next()
            .ok_or("empty grid file")?
            .split_whitespace()
            .collect();
        if header.len() != 5 {
            return Err(format!("header needs 5 fields, found {}", header.len()));
        }
        let cols: usize = header[0].parse().map_err(|e| format!("width: {e}"))?;
        let rows: usize = header[1].parse().map_err(|e| format!("height: {e}"))?;
        let num = |s: &str, what: &str| s.parse::<f64>().map_err(|e| format!("{what}: {e}"));
        let spec = GridSpec {
            cols,
            rows,
            cell_size: num(header[2], "cell_size")?,
            origin: Vec2::new(num(header[3], "origin_x")?, num(header[4], "origin_y")?),
        };
        let mut values = Vec::with_capacity(cols * rows);
        for (r, line) in lines.enumerate() {
            let before = values.len();
            for tok in line.split_whitespace() {
                values.push(num(tok, "cell")?);
            }
            if values.len() - before != cols {
                return Err(format!("row {r} has {} values, expected {cols}", values.len() - before));
            }
        }
        if values.len() != cols * rows {
            return Err(format!("expected {rows} rows, found {}", values.len() / cols.max(1)));
        }
        Ok(Grid { spec, values })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Grid> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Grid::parse(&text).map_err(|r| Error::parse(path, r))
    }
}
