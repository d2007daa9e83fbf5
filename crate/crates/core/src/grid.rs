//! Uniform centered grids and sampled functions on them.

use std::io::{self, Write};

use crate::error::{config, domain, Result};

/// Uniform grid on `[-L, L]^d` with the origin as a node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    dim: usize,
    half_cells: usize,
    dx: f64,
}

impl Grid {
    /// Nodes per axis are `2·round(L/dx) + 1`.
    pub fn new(dim: usize, half_width: f64, dx: f64) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return config(format!("grid dimension must be 1 or 2, got {dim}"));
        }
        if !(dx > 0.0) || !dx.is_finite() || !(half_width > 0.0) || !half_width.is_finite() {
            return config("grid spacing and half-width must be positive and finite");
        }
        let half_cells = (half_width / dx).round() as usize;
        if half_cells == 0 {
            return config("grid half-width is smaller than one cell");
        }
        Ok(Self { dim, half_cells, dx })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn half_cells(&self) -> usize {
        self.half_cells
    }

    /// Actual half-width `round(L/dx)·dx`.
    pub fn half_width(&self) -> f64 {
        self.half_cells as f64 * self.dx
    }

    /// Nodes per axis.
    pub fn n(&self) -> usize {
        2 * self.half_cells + 1
    }

    pub fn len(&self) -> usize {
        self.n().pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Coordinate of node `i` along any axis.
    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        (i as f64 - self.half_cells as f64) * self.dx
    }

    /// Flat index of the node with per-axis indices `(ix, iy)`; `iy` ignored in 1D.
    #[inline]
    pub fn index(&self, ix: usize, iy: usize) -> usize {
        if self.dim == 1 {
            ix
        } else {
            iy * self.n() + ix
        }
    }

    /// Per-axis indices `[ix, iy]` of a flat index.
    #[inline]
    pub fn axes_of(&self, idx: usize) -> [usize; 2] {
        if self.dim == 1 {
            [idx, 0]
        } else {
            [idx % self.n(), idx / self.n()]
        }
    }

    /// Coordinates of a flat index (second entry is 0 in 1D).
    pub fn point(&self, idx: usize) -> [f64; 2] {
        let [ix, iy] = self.axes_of(idx);
        if self.dim == 1 {
            [self.coord(ix), 0.0]
        } else {
            [self.coord(ix), self.coord(iy)]
        }
    }

    /// `‖z‖_∞` of a node.
    pub fn sup_norm_of(&self, idx: usize) -> f64 {
        let p = self.point(idx);
        p[0].abs().max(p[1].abs())
    }

    /// Nearest node to `point`; the point must lie within `dx/2` of it on every axis.
    pub fn node_at(&self, point: &[f64]) -> Result<usize> {
        if point.len() != self.dim {
            return domain(format!("point has {} coordinates, grid has {}", point.len(), self.dim));
        }
        let mut ids = [0usize; 2];
        for (a, &c) in point.iter().enumerate() {
            let f = c / self.dx + self.half_cells as f64;
            let i = f.round();
            if (f - i).abs() > 0.5 + 1e-9 || i < 0.0 || i > (self.n() - 1) as f64 {
                return domain(format!("point {point:?} is not on the grid"));
            }
            ids[a] = i as usize;
        }
        Ok(self.index(ids[0], ids[1]))
    }
}

/// Values of a function at every grid node.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return config(format!("expected {} values, got {}", grid.len(), values.len()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return config("grid values must be finite");
        }
        Ok(Self { grid, values })
    }

    pub(crate) fn from_raw(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    /// Samples `f` at every node; `f` receives `[x]` or `[x, y]`.
    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> f64) -> Self {
        let values = (0..grid.len())
            .map(|idx| {
                let p = grid.point(idx);
                f(&p[..grid.dim()])
            })
            .collect();
        Self { grid, values }
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        Self { grid, values: vec![c; grid.len()] }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Value at the node nearest to `point` (within `dx/2`).
    pub fn value_at(&self, point: &[f64]) -> Result<f64> {
        Ok(self.values[self.grid.node_at(point)?])
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn add_constant(&self, c: f64) -> Self {
        self.map(|v| v + c)
    }

    /// `max |self − other|` over nodes satisfying `keep`.
    pub fn sup_diff_where(&self, other: &Self, keep: impl Fn(usize) -> bool) -> f64 {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        self.values
            .iter()
            .zip(&other.values)
            .enumerate()
            .filter(|(i, _)| keep(*i))
            .map(|(_, (a, b))| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn sup_diff(&self, other: &Self) -> f64 {
        self.sup_diff_where(other, |_| true)
    }

    /// `max (self − other)`; nonpositive when `self ≤ other` everywhere.
    pub fn max_excess_over(&self, other: &Self) -> f64 {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// CSV dump, header `x,y,value` (or `x,value`), row-major with `x` fastest.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        if self.grid.dim() == 1 {
            writeln!(w, "x,value")?;
            for (i, v) in self.values.iter().enumerate() {
                writeln!(w, "{},{}", self.grid.coord(i), v)?;
            }
        } else {
            writeln!(w, "x,y,value")?;
            for (idx, v) in self.values.iter().enumerate() {
                let [x, y] = self.grid.point(idx);
                writeln!(w, "{x},{y},{v}")?;
            }
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("csv is ascii")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn node_counts_are_odd_and_include_origin() {
        let g = Grid::new(2, 1.0, 0.1).unwrap();
        assert_eq!(g.n(), 21);
        assert_eq!(g.len(), 441);
        assert_eq!(g.point(g.node_at(&[0.0, 0.0]).unwrap()), [0.0, 0.0]);
        let g1 = Grid::new(1, 0.33, 0.1).unwrap();
        assert_eq!(g1.n(), 7);
        assert!((g1.half_width() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid::new(3, 1.0, 0.1).is_err());
        assert!(Grid::new(2, 1.0, 0.0).is_err());
        assert!(Grid::new(2, 0.01, 0.1).is_err());
    }

    #[test]
    fn node_lookup() {
        let g = Grid::new(2, 1.0, 0.25).unwrap();
        let idx = g.node_at(&[0.5, -0.25]).unwrap();
        assert_eq!(g.point(idx), [0.5, -0.25]);
        assert_eq!(g.node_at(&[0.55, -0.25]).unwrap(), idx);
        assert!(g.node_at(&[2.0, 0.0]).is_err());
        assert!(g.node_at(&[0.0]).is_err());
    }

    #[test]
    fn csv_layout() {
        let g = Grid::new(2, 1.0, 1.0).unwrap();
        let f = GridFunction::from_fn(g, |p| p[0] + 10.0 * p[1]);
        let csv = f.to_csv_string();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "x,y,value");
        assert_eq!(lines[1], "-1,-1,-11");
        assert_eq!(lines[2], "0,-1,-10");
        assert_eq!(lines.len(), 10);
        let g1 = Grid::new(1, 1.0, 0.5).unwrap();
        let csv1 = GridFunction::from_fn(g1, |p| p[0] * 0.1).to_csv_string();
        assert!(csv1.starts_with("x,value\n-1,-0.1\n"));
    }

    #[test]
    fn rejects_non_finite_values() {
        let g = Grid::new(1, 1.0, 1.0).unwrap();
        assert!(GridFunction::new(g, vec![0.0, f64::NAN, 0.0]).is_err());
        assert!(GridFunction::new(g, vec![0.0; 2]).is_err());
    }
}
