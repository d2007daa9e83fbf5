//! Flat dilation and erosion along one axis.
//!
//! Windows are clamped at the array ends, so a node near the boundary sees a
//! one-sided window. Lines are processed with the van Herk / Gil–Werman
//! recurrence: three comparisons per sample whatever the window size.

use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::grid::GridFunction;

#[derive(Clone, Copy)]
enum Op {
    Max,
    Min,
}

impl Op {
    #[inline]
    fn apply(self, a: f64, b: f64) -> f64 {
        match self {
            Op::Max => a.max(b),
            Op::Min => a.min(b),
        }
    }

    fn identity(self) -> f64 {
        match self {
            Op::Max => f64::NEG_INFINITY,
            Op::Min => f64::INFINITY,
        }
    }
}

#[derive(Default)]
struct Scratch {
    padded: Vec<f64>,
    forward: Vec<f64>,
    backward: Vec<f64>,
}

fn window_line(op: Op, input: &[f64], k: usize, out: &mut [f64], s: &mut Scratch) {
    let n = input.len();
    if k == 0 || n == 0 {
        out.copy_from_slice(input);
        return;
    }
    if k == 1 {
        for i in 0..n {
            let mut v = input[i];
            if i > 0 {
                v = op.apply(v, input[i - 1]);
            }
            if i + 1 < n {
                v = op.apply(v, input[i + 1]);
            }
            out[i] = v;
        }
        return;
    }
    let w = 2 * k + 1;
    let m = n + 2 * k;
    let id = op.identity();
    s.padded.clear();
    s.padded.resize(k, id);
    s.padded.extend_from_slice(input);
    s.padded.resize(m, id);
    s.forward.resize(m, 0.0);
    s.backward.resize(m, 0.0);
    let a = &s.padded;
    for (i, &v) in a.iter().enumerate() {
        s.forward[i] = if i % w == 0 { v } else { op.apply(s.forward[i - 1], v) };
    }
    for i in (0..m).rev() {
        s.backward[i] = if i % w == w - 1 || i == m - 1 { a[i] } else { op.apply(s.backward[i + 1], a[i]) };
    }
    for (i, o) in out.iter_mut().enumerate() {
        *o = op.apply(s.backward[i], s.forward[i + w - 1]);
    }
}

fn window_1d(op: Op, input: &[f64], k: usize) -> Vec<f64> {
    let mut out = vec![0.0; input.len()];
    window_line(op, input, k, &mut out, &mut Scratch::default());
    out
}

/// Sliding maximum with half-width `k` cells.
pub fn dilate_1d(input: &[f64], k: usize) -> Vec<f64> {
    window_1d(Op::Max, input, k)
}

/// Sliding minimum with half-width `k` cells.
pub fn erode_1d(input: &[f64], k: usize) -> Vec<f64> {
    window_1d(Op::Min, input, k)
}

fn rows(op: Op, values: &[f64], width: usize, k: usize) -> Vec<f64> {
    let mut out = vec![0.0; values.len()];
    out.par_chunks_mut(width)
        .zip(values.par_chunks(width))
        .for_each_init(Scratch::default, |s, (o, i)| window_line(op, i, k, o, s));
    out
}

/// Below this half-width, windows across rows are taken row by row, which
/// keeps memory access contiguous.
const ROW_WINDOW_MAX: usize = 8;

fn across_rows(op: Op, values: &[f64], width: usize, k: usize) -> Vec<f64> {
    let n_rows = values.len() / width;
    let mut out = values.to_vec();
    out.par_chunks_mut(width).enumerate().for_each(|(r, row)| {
        let lo = r.saturating_sub(k);
        let hi = (r + k).min(n_rows - 1);
        for j in (lo..=hi).filter(|&j| j != r) {
            let other = &values[j * width..(j + 1) * width];
            for (o, &v) in row.iter_mut().zip(other) {
                *o = op.apply(*o, v);
            }
        }
    });
    out
}

fn transpose(values: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; values.len()];
    out.par_chunks_mut(n).enumerate().for_each(|(r, row)| {
        for (c, v) in row.iter_mut().enumerate() {
            *v = values[c * n + r];
        }
    });
    out
}

fn window_axis(op: Op, f: &GridFunction, axis: usize, k: usize) -> GridFunction {
    let grid = *f.grid();
    assert!(axis < grid.dim(), "axis {axis} out of range for a {}-d grid", grid.dim());
    if k == 0 {
        return f.clone();
    }
    let n = grid.n();
    let values = if axis == 0 {
        rows(op, f.values(), n, k)
    } else if k <= ROW_WINDOW_MAX {
        across_rows(op, f.values(), n, k)
    } else {
        transpose(&rows(op, &transpose(f.values(), n), n, k), n)
    };
    GridFunction::from_raw(grid, values)
}

/// Sliding maximum of half-width `k` cells along `axis`.
pub fn dilate_axis_cells(f: &GridFunction, axis: usize, k: usize) -> GridFunction {
    window_axis(Op::Max, f, axis, k)
}

/// Sliding minimum of half-width `k` cells along `axis`.
pub fn erode_axis_cells(f: &GridFunction, axis: usize, k: usize) -> GridFunction {
    window_axis(Op::Min, f, axis, k)
}

fn cells_for(f: &GridFunction, axis: usize, radius: f64) -> Result<usize> {
    if !(radius >= 0.0) || !radius.is_finite() {
        return domain(format!("window radius must be nonnegative, got {radius}"));
    }
    if axis >= f.grid().dim() {
        return domain(format!("axis {axis} out of range for a {}-d grid", f.grid().dim()));
    }
    Ok((radius / f.grid().dx()).round() as usize)
}

/// Exact semigroup of `∂_s u = |∂_axis u|` for time `radius`, with the
/// window rounded to `round(radius/dx)` cells.
pub fn dilate_axis(f: &GridFunction, axis: usize, radius: f64) -> Result<GridFunction> {
    let k = cells_for(f, axis, radius)?;
    Ok(dilate_axis_cells(f, axis, k))
}

/// Exact semigroup of `∂_s u = −|∂_axis u|`, window rounded as in [`dilate_axis`].
pub fn erode_axis(f: &GridFunction, axis: usize, radius: f64) -> Result<GridFunction> {
    let k = cells_for(f, axis, radius)?;
    Ok(erode_axis_cells(f, axis, k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use proptest::prelude::*;

    fn brute(op: Op, a: &[f64], k: usize) -> Vec<f64> {
        (0..a.len())
            .map(|i| {
                let lo = i.saturating_sub(k);
                let hi = (i + k).min(a.len() - 1);
                a[lo..=hi].iter().copied().fold(op.identity(), |x, y| op.apply(x, y))
            })
            .collect()
    }

    #[test]
    fn small_examples() {
        let a = [0.0, 1.0, 0.0, 3.0, 2.0];
        assert_eq!(dilate_1d(&a, 1), vec![1.0, 1.0, 3.0, 3.0, 3.0]);
        assert_eq!(erode_1d(&a, 1), vec![0.0, 0.0, 0.0, 0.0, 2.0]);
        assert_eq!(dilate_1d(&a, 0), a.to_vec());
        assert_eq!(dilate_1d(&a, 10), vec![3.0; 5]);
    }

    #[test]
    fn radius_is_rounded_to_cells() {
        let g = Grid::new(1, 2.0, 1.0).unwrap();
        let f = GridFunction::new(g, vec![0.0, 1.0, 0.0, 3.0, 2.0]).unwrap();
        assert_eq!(dilate_axis(&f, 0, 1.2).unwrap().values(), &[1.0, 1.0, 3.0, 3.0, 3.0]);
        assert_eq!(erode_axis(&f, 0, 0.6).unwrap().values(), &[0.0, 0.0, 0.0, 0.0, 2.0]);
        assert_eq!(dilate_axis(&f, 0, 0.4).unwrap(), f);
        assert!(matches!(dilate_axis(&f, 0, -1.0), Err(crate::Error::Domain(_))));
        assert!(erode_axis(&f, 1, 1.0).is_err());
    }

    #[test]
    fn axis_one_acts_on_columns() {
        let g = Grid::new(2, 1.0, 1.0).unwrap();
        let f = GridFunction::from_fn(g, |p| if p == [1.0, -1.0] { 5.0 } else { 0.0 });
        let d = dilate_axis_cells(&f, 1, 1);
        let hot: Vec<[f64; 2]> = (0..g.len()).filter(|&i| d.values()[i] == 5.0).map(|i| g.point(i)).collect();
        assert_eq!(hot, vec![[1.0, -1.0], [1.0, 0.0]]);
    }

    #[test]
    fn dilate_erode_dilate_equals_dilate_exhaustive_small() {
        // Every array over {0,1,2} of length 1..=6 and every window radius.
        for len in 1..=6usize {
            let count = 3usize.pow(len as u32);
            for code in 0..count {
                let mut c = code;
                let a: Vec<f64> = (0..len)
                    .map(|_| {
                        let d = (c % 3) as f64;
                        c /= 3;
                        d
                    })
                    .collect();
                for k in 0..=len {
                    let d = dilate_1d(&a, k);
                    assert_eq!(dilate_1d(&erode_1d(&d, k), k), d);
                    let e = erode_1d(&a, k);
                    assert_eq!(erode_1d(&dilate_1d(&e, k), k), e);
                }
            }
        }
    }

    #[test]
    fn both_column_paths_agree() {
        let g = Grid::new(2, 2.0, 0.1).unwrap();
        let f = GridFunction::from_fn(g, |p| (3.0 * p[0]).sin() * (2.0 * p[1]).cos() + p[1]);
        for k in [1, 5, ROW_WINDOW_MAX, ROW_WINDOW_MAX + 1, 15] {
            let n = g.n();
            let via_t = transpose(&rows(Op::Max, &transpose(f.values(), n), n, k), n);
            assert_eq!(across_rows(Op::Max, f.values(), n, k), via_t);
            assert_eq!(dilate_axis_cells(&f, 1, k).values(), &via_t[..]);
        }
    }

    proptest! {
        #[test]
        fn matches_brute_force(a in prop::collection::vec(-100.0f64..100.0, 1..80), k in 0usize..20) {
            prop_assert_eq!(dilate_1d(&a, k), brute(Op::Max, &a, k));
            prop_assert_eq!(erode_1d(&a, k), brute(Op::Min, &a, k));
        }

        #[test]
        fn dilation_dominates_erosion(a in prop::collection::vec(-1.0f64..1.0, 1..40), k in 0usize..6) {
            let d = dilate_1d(&a, k);
            let e = erode_1d(&a, k);
            for i in 0..a.len() {
                prop_assert!(e[i] <= a[i] && a[i] <= d[i]);
            }
        }
    }
}
