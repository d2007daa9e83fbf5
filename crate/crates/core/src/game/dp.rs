//! Backward dynamic programming for the game value.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{config, Result};
use crate::grid::{Grid, GridFunction};
use crate::signal::DrivingPath;

use super::control::control_levels;

/// Discretization of the game.
#[derive(Debug, Clone)]
pub struct GameConfig {
    pub grid: Grid,
    /// Time steps per monotone stretch; each moves the state by at most
    /// `|delta| / substeps_per_segment` per coordinate.
    pub substeps_per_segment: usize,
    /// Number of equally spaced control values in `[-1, 1]`, odd and ≥ 3.
    pub control_levels: usize,
    pub terminal: GridFunction,
    /// Radius around the origin on which values are wanted.
    pub observation_radius: f64,
}

impl GameConfig {
    /// Three control levels and no observation radius beyond the origin.
    pub fn new(terminal: GridFunction, substeps_per_segment: usize) -> Self {
        Self {
            grid: *terminal.grid(),
            substeps_per_segment,
            control_levels: 3,
            terminal,
            observation_radius: 0.0,
        }
    }

    pub fn with_levels(mut self, levels: usize) -> Self {
        self.control_levels = levels;
        self
    }

    pub fn with_observation_radius(mut self, r: f64) -> Self {
        self.observation_radius = r;
        self
    }

    fn validate(&self, path: &DrivingPath) -> Result<Vec<f64>> {
        if self.grid.dim() != 2 {
            return config("the game lives on a 2-d grid");
        }
        if *self.terminal.grid() != self.grid {
            return config("terminal data is sampled on a different grid");
        }
        if self.substeps_per_segment == 0 {
            return config("substeps_per_segment must be at least 1");
        }
        let levels = control_levels(self.control_levels)?;
        let needed = self.observation_radius + path.total_variation() + 2.0 * self.grid.dx();
        if self.grid.half_width() < needed {
            return config(format!(
                "domain too small: trajectories from radius {} can travel {}; needs L >= {needed}",
                self.observation_radius,
                path.total_variation()
            ));
        }
        Ok(levels)
    }
}

/// Value slices at the segment boundaries, latest time first.
#[derive(Debug, Clone)]
pub struct ValueTable {
    pub times: Vec<f64>,
    pub slices: Vec<GridFunction>,
}

impl ValueTable {
    /// `v(0, ·)`.
    pub fn initial(&self) -> &GridFunction {
        self.slices.last().unwrap()
    }

    /// `v(0, 0, 0)`.
    pub fn value_at_origin(&self) -> f64 {
        self.initial().value_at(&[0.0, 0.0]).expect("the origin is a node")
    }
}

/// Fractional cell shift split into an integer part and a weight.
#[derive(Clone, Copy)]
struct Shift {
    cells: isize,
    weight: f64,
}

fn shift_of(displacement: f64, dx: f64) -> Shift {
    let s = displacement / dx;
    let mut cells = s.floor();
    let mut weight = s - cells;
    // Snap shifts that are whole cells up to rounding.
    if weight > 1.0 - 1e-12 {
        cells += 1.0;
        weight = 0.0;
    } else if weight < 1e-12 {
        weight = 0.0;
    }
    Shift { cells: cells as isize, weight }
}

#[inline]
fn clamp_idx(i: isize, n: usize) -> usize {
    i.clamp(0, n as isize - 1) as usize
}

#[inline]
fn lerp(a: f64, b: f64, w: f64) -> f64 {
    if w == 0.0 {
        a
    } else {
        a + w * (b - a)
    }
}

/// Bilinear lookup with constant extension beyond the grid.
#[inline]
fn lookup(v: &[f64], n: usize, ix: usize, iy: usize, sx: Shift, sy: Shift) -> f64 {
    let x0 = clamp_idx(ix as isize + sx.cells, n);
    let x1 = clamp_idx(ix as isize + sx.cells + 1, n);
    let y0 = clamp_idx(iy as isize + sy.cells, n);
    let y1 = clamp_idx(iy as isize + sy.cells + 1, n);
    let r0 = lerp(v[y0 * n + x0], v[y0 * n + x1], sx.weight);
    if sy.weight == 0.0 {
        return r0;
    }
    let r1 = lerp(v[y1 * n + x0], v[y1 * n + x1], sx.weight);
    lerp(r0, r1, sy.weight)
}

/// One backward step: `max_a min_b v(x + aδ̂, y + bδ̂)` on increasing
/// stretches and `max_a min_b v(x + bδ̂, y + aδ̂)` on decreasing ones.
pub(crate) fn dp_step(v: &GridFunction, up: bool, step: f64, levels: &[f64]) -> GridFunction {
    let grid = *v.grid();
    let n = grid.n();
    let shifts: Vec<Shift> = levels.iter().map(|&c| shift_of(c * step, grid.dx())).collect();
    let src = v.values();
    let mut out = vec![0.0; src.len()];
    out.par_chunks_mut(n).enumerate().for_each(|(iy, row)| {
        for (ix, o) in row.iter_mut().enumerate() {
            let mut best = f64::NEG_INFINITY;
            for &sa in &shifts {
                let mut worst = f64::INFINITY;
                for &sb in &shifts {
                    let val = if up {
                        lookup(src, n, ix, iy, sa, sb)
                    } else {
                        lookup(src, n, ix, iy, sb, sa)
                    };
                    worst = worst.min(val);
                    if worst <= best {
                        break;
                    }
                }
                best = best.max(worst);
            }
            *o = best;
        }
    });
    GridFunction::from_raw(grid, out)
}

/// Backward induction from the terminal data along `path`.
pub fn dp_value(path: &DrivingPath, cfg: &GameConfig) -> Result<ValueTable> {
    let levels = cfg.validate(path)?;
    let horizon = path.horizon();
    let mut times = vec![horizon];
    let mut slices = vec![cfg.terminal.clone()];
    let mut v = cfg.terminal.clone();
    for seg in path.monotone_decomposition().iter().rev() {
        if seg.t_end < *times.last().unwrap() {
            times.push(seg.t_end);
            slices.push(v.clone());
        }
        let step = seg.variation() / cfg.substeps_per_segment as f64;
        for _ in 0..cfg.substeps_per_segment {
            v = dp_step(&v, seg.is_up(), step, &levels);
        }
        times.push(seg.t_start);
        slices.push(v.clone());
    }
    if *times.last().unwrap() > 0.0 {
        times.push(0.0);
        slices.push(v);
    }
    Ok(ValueTable { times, slices })
}

/// Both sides of `(|p_x| − |p_y|)·ξ̇ = max_a min_b {ξ̇₊(a p_x + b p_y) + ξ̇₋(a p_y + b p_x)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IsaacsGap {
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
}

/// Compares the saddle Hamiltonian with its max-min over `levels` control values.
pub fn isaacs_identity(p: [f64; 2], xi_dot: f64, levels: usize) -> Result<IsaacsGap> {
    let controls = control_levels(levels)?;
    let (up, down) = (xi_dot.max(0.0), (-xi_dot).max(0.0));
    let lhs = (p[0].abs() - p[1].abs()) * xi_dot;
    let rhs = controls
        .iter()
        .map(|&a| {
            controls
                .iter()
                .map(|&b| up * (a * p[0] + b * p[1]) + down * (a * p[1] + b * p[0]))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(IsaacsGap { lhs, rhs, gap: (lhs - rhs).abs() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::{abs_diagonal, ic_paper};

    fn up_path() -> DrivingPath {
        DrivingPath::from_values(&[0.0, 1.0], 1.0).unwrap()
    }

    #[test]
    fn constants_are_preserved_exactly() {
        let g = Grid::new(2, 3.0, 0.1).unwrap();
        let path = DrivingPath::zigzag(0.7, 3, 1.0).unwrap();
        let cfg = GameConfig::new(GridFunction::constant(g, 2.5), 7);
        let table = dp_value(&path, &cfg).unwrap();
        assert_eq!(table.times, vec![1.0, 2.0 / 3.0, 1.0 / 3.0, 0.0]);
        for s in &table.slices {
            assert!(s.values().iter().all(|&v| v == 2.5));
        }
    }

    #[test]
    fn diagonal_data_has_value_zero() {
        let g = Grid::new(2, 1.5, 0.05).unwrap();
        let table = dp_value(&up_path(), &GameConfig::new(abs_diagonal(&g), 20)).unwrap();
        assert!(table.value_at_origin().abs() <= 0.05);
        let f = ic_paper(&Grid::new(2, 4.0, 0.05).unwrap(), 2.0).unwrap();
        let table = dp_value(&up_path(), &GameConfig::new(f, 20)).unwrap();
        assert!(table.value_at_origin().abs() <= 0.05);
    }

    #[test]
    fn unit_steps_match_window_operators() {
        // With δ̂ = Δx and three levels no interpolation happens.
        let g = Grid::new(2, 2.0, 0.25).unwrap();
        let f = GridFunction::from_fn(g, |p| (3.0 * p[0]).sin() + (p[0] * p[1]).cos());
        let v = dp_step(&f, true, 0.25, &[-1.0, 0.0, 1.0]);
        let e = crate::morphology::erode_axis_cells(&f, 1, 1);
        let de = crate::morphology::dilate_axis_cells(&e, 0, 1);
        assert_eq!(v, de);
        let v = dp_step(&f, false, 0.25, &[-1.0, 0.0, 1.0]);
        let e = crate::morphology::erode_axis_cells(&f, 0, 1);
        assert_eq!(v, crate::morphology::dilate_axis_cells(&e, 1, 1));
    }

    #[test]
    fn small_domain_is_rejected() {
        let g = Grid::new(2, 1.0, 0.1).unwrap();
        let err = dp_value(&up_path(), &GameConfig::new(abs_diagonal(&g), 4)).unwrap_err();
        assert!(matches!(err, crate::Error::Config(_)));
        let g = Grid::new(2, 3.0, 0.1).unwrap();
        assert!(dp_value(&up_path(), &GameConfig::new(abs_diagonal(&g), 4).with_levels(4)).is_err());
    }

    #[test]
    fn isaacs_examples() {
        let r = isaacs_identity([1.0, 0.0], 1.0, 3).unwrap();
        assert_eq!((r.lhs, r.rhs, r.gap), (1.0, 1.0, 0.0));
        let r = isaacs_identity([0.0, 1.0], -1.0, 3).unwrap();
        assert_eq!((r.lhs, r.rhs, r.gap), (1.0, 1.0, 0.0));
        assert!(isaacs_identity([0.0, 1.0], 1.0, 2).is_err());
    }
}
