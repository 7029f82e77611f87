//! Uniform 1D grids and functions sampled on them.
//!
//! A [`GridFunction`] may carry *breaks*: interior nodes where the sampled
//! function has a kink or a jump (the delta site at `x = 0` is the typical
//! one). At a break the two one-sided limits are stored, the node value is
//! their mean, and every stencil below works segment by segment so that no
//! difference or quadrature rule reaches across a break.

use serde::Serialize;

use crate::error::{Error, Result};

/// Segments shorter than this (in nodes) cannot host the one-sided stencils.
const MIN_SEGMENT_NODES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    x_min: f64,
    x_max: f64,
    n_points: usize,
}

impl Grid {
    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if !(x_min.is_finite() && x_max.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "bounds must be finite, got [{x_min}, {x_max}]"
            )));
        }
        if x_max <= x_min {
            return Err(Error::InvalidGrid(format!(
                "x_max ({x_max}) must exceed x_min ({x_min})"
            )));
        }
        if n_points < 3 {
            return Err(Error::InvalidGrid(format!(
                "need at least 3 points, got {n_points}"
            )));
        }
        Ok(Self {
            x_min,
            x_max,
            n_points,
        })
    }

    /// Grid on `[-half_width, half_width]`; `n_points` must be odd so that
    /// the middle node sits exactly at the origin.
    pub fn symmetric(half_width: f64, n_points: usize) -> Result<Self> {
        if n_points.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "symmetric grid needs an odd point count, got {n_points}"
            )));
        }
        Self::new(-half_width, half_width, n_points)
    }

    /// Grid on `[x_min, x_max]` whose spacing is `h` (rounded to fit).
    pub fn with_spacing(x_min: f64, x_max: f64, h: f64) -> Result<Self> {
        if h.is_nan() || h <= 0.0 {
            return Err(Error::InvalidGrid(format!(
                "spacing must be positive, got {h}"
            )));
        }
        let intervals = ((x_max - x_min) / h).round() as usize;
        Self::new(x_min, x_max, intervals + 1)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_points - 1) as f64
    }

    /// Position of node `i`. Computed from the fraction `i/(n-1)` so the
    /// middle node of a symmetric grid is exactly zero.
    pub fn x(&self, i: usize) -> f64 {
        let t = i as f64 / (self.n_points - 1) as f64;
        let x = self.x_min + (self.x_max - self.x_min) * t;
        if i == self.n_points - 1 {
            self.x_max
        } else {
            x
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(move |i| self.x(i))
    }

    /// Index of the node at `x`, if one lies within a tiny fraction of `h`.
    pub fn index_of(&self, x: f64) -> Option<usize> {
        let h = self.spacing();
        let f = (x - self.x_min) / h;
        let i = f.round();
        if i < 0.0 || i > (self.n_points - 1) as f64 {
            return None;
        }
        let i = i as usize;
        ((self.x(i) - x).abs() <= 1e-9 * h).then_some(i)
    }

    pub fn origin_index(&self) -> Option<usize> {
        self.index_of(0.0)
    }

    /// Same interval, spacing halved.
    pub fn refined(&self) -> Grid {
        Grid {
            x_min: self.x_min,
            x_max: self.x_max,
            n_points: 2 * self.n_points - 1,
        }
    }
}

/// One-sided limits of a sampled function at an interior node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Break {
    pub index: usize,
    pub left: f64,
    pub right: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<f64>,
    breaks: Vec<Break>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        Ok(Self {
            grid,
            values,
            breaks: Vec::new(),
        })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().map(f).collect();
        Self {
            grid,
            values,
            breaks: Vec::new(),
        }
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        Self::from_fn(grid, |_| c)
    }

    /// Records a break at node `index`. The node value becomes the mean of
    /// the two limits.
    pub fn with_break(mut self, index: usize, left: f64, right: f64) -> Result<Self> {
        let n = self.grid.len();
        if index == 0 || index + 1 >= n {
            return Err(Error::InvalidGrid(format!(
                "break at node {index} must be interior"
            )));
        }
        let b = Break { index, left, right };
        match self.breaks.binary_search_by_key(&index, |b| b.index) {
            Ok(pos) => self.breaks[pos] = b,
            Err(pos) => self.breaks.insert(pos, b),
        }
        for seg in self.segments() {
            if seg.1 - seg.0 + 1 < MIN_SEGMENT_NODES {
                return Err(Error::InvalidGrid(format!(
                    "segment [{}, {}] between breaks is too short",
                    seg.0, seg.1
                )));
            }
        }
        self.values[index] = 0.5 * (left + right);
        Ok(self)
    }

    /// Break at the origin node with the given one-sided limits.
    pub fn with_origin_break(self, left: f64, right: f64) -> Result<Self> {
        let i0 = self.grid.origin_index().ok_or(Error::NoOriginNode)?;
        self.with_break(i0, left, right)
    }

    /// Marks a kink at `index`: the function is continuous there but no
    /// stencil may straddle the node.
    pub fn with_kink(self, index: usize) -> Result<Self> {
        let v = self.values[index];
        self.with_break(index, v, v)
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn breaks(&self) -> &[Break] {
        &self.breaks
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, i: usize) -> f64 {
        self.values[i]
    }

    pub fn break_at(&self, i: usize) -> Option<&Break> {
        self.breaks
            .binary_search_by_key(&i, |b| b.index)
            .ok()
            .map(|pos| &self.breaks[pos])
    }

    pub fn left_limit(&self, i: usize) -> f64 {
        self.break_at(i).map_or(self.values[i], |b| b.left)
    }

    pub fn right_limit(&self, i: usize) -> f64 {
        self.break_at(i).map_or(self.values[i], |b| b.right)
    }

    /// Inclusive node ranges between consecutive breaks.
    pub fn segments(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.breaks.len() + 1);
        let mut start = 0;
        for b in &self.breaks {
            out.push((start, b.index));
            start = b.index;
        }
        out.push((start, self.values.len() - 1));
        out
    }

    fn segment_samples(&self, (s, e): (usize, usize)) -> Vec<f64> {
        let mut v = self.values[s..=e].to_vec();
        v[0] = self.right_limit(s);
        let last = v.len() - 1;
        v[last] = self.left_limit(e);
        v
    }

    /// Applies `op` to every segment and stitches the pieces, writing
    /// one-sided results into the breaks of the output.
    fn per_segment(&self, op: impl Fn(&[f64]) -> Vec<f64>) -> GridFunction {
        let segs = self.segments();
        let mut values = vec![0.0; self.len()];
        let mut lefts = Vec::with_capacity(self.breaks.len());
        let mut rights = Vec::with_capacity(self.breaks.len());
        for (k, &seg) in segs.iter().enumerate() {
            let out = op(&self.segment_samples(seg));
            let (s, e) = seg;
            values[s + 1..e].copy_from_slice(&out[1..out.len() - 1]);
            if k == 0 {
                values[s] = out[0];
            } else {
                rights.push(out[0]);
            }
            if k + 1 == segs.len() {
                values[e] = out[out.len() - 1];
            } else {
                lefts.push(out[out.len() - 1]);
            }
        }
        let breaks: Vec<Break> = self
            .breaks
            .iter()
            .zip(lefts.into_iter().zip(rights))
            .map(|(b, (left, right))| Break {
                index: b.index,
                left,
                right,
            })
            .collect();
        for b in &breaks {
            values[b.index] = 0.5 * (b.left + b.right);
        }
        GridFunction {
            grid: self.grid,
            values,
            breaks,
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        let mut values: Vec<f64> = self.values.iter().map(|&v| f(v)).collect();
        let breaks: Vec<Break> = self
            .breaks
            .iter()
            .map(|b| Break {
                index: b.index,
                left: f(b.left),
                right: f(b.right),
            })
            .collect();
        for b in &breaks {
            values[b.index] = 0.5 * (b.left + b.right);
        }
        GridFunction {
            grid: self.grid,
            values,
            breaks,
        }
    }

    /// Pointwise combination; breaks of either operand survive.
    pub fn zip_with(
        &self,
        other: &GridFunction,
        f: impl Fn(f64, f64) -> f64,
    ) -> Result<GridFunction> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let mut values: Vec<f64> = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        let mut idx: Vec<usize> = self
            .breaks
            .iter()
            .chain(&other.breaks)
            .map(|b| b.index)
            .collect();
        idx.sort_unstable();
        idx.dedup();
        let breaks: Vec<Break> = idx
            .into_iter()
            .map(|i| Break {
                index: i,
                left: f(self.left_limit(i), other.left_limit(i)),
                right: f(self.right_limit(i), other.right_limit(i)),
            })
            .collect();
        for b in &breaks {
            values[b.index] = 0.5 * (b.left + b.right);
        }
        Ok(GridFunction {
            grid: self.grid,
            values,
            breaks,
        })
    }

    pub fn scale(&self, s: f64) -> GridFunction {
        self.map(|v| s * v)
    }

    /// First derivative: 2nd-order central differences, one-sided 2nd-order
    /// at domain ends and on both sides of every break.
    pub fn derivative(&self) -> GridFunction {
        let h = self.grid.spacing();
        self.per_segment(|f| diff1(f, h))
    }

    /// Second derivative with the 3-point stencil (one-sided 5-point at ends
    /// and breaks).
    pub fn second_derivative(&self) -> GridFunction {
        let h = self.grid.spacing();
        self.per_segment(|f| diff2(f, h))
    }

    /// `∫_{x(anchor)}^{x} f` by composite Simpson, piecewise over segments.
    /// The result is continuous; breaks are kept as kinks.
    pub fn cumulative_from(&self, anchor: usize) -> Result<GridFunction> {
        self.check_finite()?;
        let h = self.grid.spacing();
        let mut values = vec![0.0; self.len()];
        for seg in self.segments() {
            let local = cumulative(&self.segment_samples(seg), h);
            let base = values[seg.0];
            for (k, v) in local.into_iter().enumerate().skip(1) {
                values[seg.0 + k] = base + v;
            }
        }
        let offset = values[anchor];
        values.iter_mut().for_each(|v| *v -= offset);
        let breaks = self
            .breaks
            .iter()
            .map(|b| Break {
                index: b.index,
                left: values[b.index],
                right: values[b.index],
            })
            .collect();
        Ok(GridFunction {
            grid: self.grid,
            values,
            breaks,
        })
    }

    /// Integral over the whole grid.
    pub fn integral(&self) -> Result<f64> {
        let c = self.cumulative_from(0)?;
        Ok(c.values[c.len() - 1])
    }

    /// Linear-time refinement to spacing h/2; new midpoints come from cubic
    /// interpolation inside the owning segment.
    pub fn refined(&self) -> GridFunction {
        let grid = self.grid.refined();
        let mut values = vec![0.0; grid.len()];
        for (i, &v) in self.values.iter().enumerate() {
            values[2 * i] = v;
        }
        for seg in self.segments() {
            let f = self.segment_samples(seg);
            for j in 0..f.len() - 1 {
                values[2 * (seg.0 + j) + 1] = midpoint_cubic(&f, j);
            }
        }
        let breaks = self
            .breaks
            .iter()
            .map(|b| Break {
                index: 2 * b.index,
                ..*b
            })
            .collect();
        GridFunction {
            grid,
            values,
            breaks,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values
            .iter()
            .chain(self.breaks.iter().flat_map(|b| [&b.left, &b.right]))
            .filter(|v| v.is_finite())
            .fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Indices of non-finite samples (flagged singular nodes).
    pub fn singular_nodes(&self) -> Vec<usize> {
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_finite())
            .map(|(i, _)| i)
            .collect()
    }

    pub fn check_finite(&self) -> Result<()> {
        for (i, &v) in self.values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    x: self.grid.x(i),
                    value: v,
                });
            }
        }
        for b in &self.breaks {
            for v in [b.left, b.right] {
                if !v.is_finite() {
                    return Err(Error::NonFinite {
                        x: self.grid.x(b.index),
                        value: v,
                    });
                }
            }
        }
        Ok(())
    }
}

fn diff1(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    let mut d = vec![0.0; n];
    if n < 3 {
        let s = (f[n - 1] - f[0]) / h;
        d.iter_mut().for_each(|v| *v = s);
        return d;
    }
    for i in 1..n - 1 {
        d[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
    }
    d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
    d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
    d
}

fn diff2(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    let h2 = h * h;
    let mut d = vec![0.0; n];
    for i in 1..n - 1 {
        d[i] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) / h2;
    }
    if n >= 5 {
        let one_sided = |a: f64, b: f64, c: f64, e: f64, g: f64| {
            (35.0 * a - 104.0 * b + 114.0 * c - 56.0 * e + 11.0 * g) / (12.0 * h2)
        };
        d[0] = one_sided(f[0], f[1], f[2], f[3], f[4]);
        d[n - 1] = one_sided(f[n - 1], f[n - 2], f[n - 3], f[n - 4], f[n - 5]);
    } else if n == 4 {
        d[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / h2;
        d[n - 1] = (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) / h2;
    } else {
        d[0] = d[1];
        d[n - 1] = d[n - 2];
    }
    d
}

/// Cumulative composite Simpson. Even intervals use the forward three-point
/// piece, odd ones the backward piece, so pairs sum to Simpson's rule; a
/// trailing odd interval also takes the backward piece. Two samples fall
/// back to the trapezoid.
fn cumulative(f: &[f64], h: f64) -> Vec<f64> {
    let m = f.len() - 1;
    let mut out = vec![0.0; f.len()];
    if m == 1 {
        out[1] = 0.5 * h * (f[0] + f[1]);
        return out;
    }
    let w = h / 12.0;
    for j in 0..m {
        let piece = if j % 2 == 0 && j + 2 <= m {
            w * (5.0 * f[j] + 8.0 * f[j + 1] - f[j + 2])
        } else {
            w * (-f[j - 1] + 8.0 * f[j] + 5.0 * f[j + 1])
        };
        out[j + 1] = out[j] + piece;
    }
    out
}

/// Cubic Lagrange value halfway between samples `j` and `j + 1`, using the
/// four nearest samples of `f`.
fn midpoint_cubic(f: &[f64], j: usize) -> f64 {
    let n = f.len();
    if n < 4 {
        return 0.5 * (f[j] + f[j + 1]);
    }
    let start = j.saturating_sub(1).min(n - 4);
    let t = (j - start) as f64 + 0.5;
    let mut acc = 0.0;
    for a in 0..4 {
        let mut w = 1.0;
        for b in 0..4 {
            if a != b {
                w *= (t - b as f64) / (a as f64 - b as f64);
            }
        }
        acc += w * f[start + a];
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn symmetric_grid_has_exact_origin() {
        let g = Grid::symmetric(25.0, 5001).unwrap();
        let i0 = g.origin_index().unwrap();
        assert_eq!(i0, 2500);
        assert_eq!(g.x(i0), 0.0);
        assert_abs_diff_eq!(g.spacing(), 0.01, epsilon = 1e-15);
        assert_eq!(g.x(5000), 25.0);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid::new(0.0, 1.0, 2).is_err());
        assert!(Grid::new(1.0, 0.0, 11).is_err());
        assert!(Grid::symmetric(1.0, 10).is_err());
        assert!(Grid::new(0.0, f64::INFINITY, 11).is_err());
    }

    #[test]
    fn simpson_is_exact_for_cubics() {
        let g = Grid::new(-1.0, 2.0, 31).unwrap();
        let f = GridFunction::from_fn(g, |x| x * x * x - 2.0 * x + 1.0);
        let c = f.cumulative_from(0).unwrap();
        let exact = |t: f64| t.powi(4) / 4.0 - t * t + t;
        let h = g.spacing();
        for (i, x) in g.nodes().enumerate() {
            // panel ends are exact; half panels carry an O(h⁴) piece
            let tol = if i % 2 == 0 { 1e-12 } else { h.powi(4) };
            assert_abs_diff_eq!(c.value(i), exact(x) - exact(-1.0), epsilon = tol);
        }
    }

    #[test]
    fn jump_is_integrated_exactly_with_limits() {
        let g = Grid::symmetric(1.0, 21).unwrap();
        let f = GridFunction::from_fn(g, |x| if x < 0.0 { -0.5 } else { 0.5 })
            .with_origin_break(-0.5, 0.5)
            .unwrap();
        let c = f.cumulative_from(g.origin_index().unwrap()).unwrap();
        for (i, x) in g.nodes().enumerate() {
            assert_abs_diff_eq!(c.value(i), 0.5 * x.abs(), epsilon = 1e-14);
        }
    }

    #[test]
    fn derivative_respects_breaks() {
        let g = Grid::symmetric(2.0, 41).unwrap();
        let f = GridFunction::from_fn(g, |x| x.abs()).with_kink(20).unwrap();
        let d = f.derivative();
        let b = d.break_at(20).unwrap();
        assert_abs_diff_eq!(b.left, -1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(b.right, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d.value(20), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d.value(21), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(d.value(19), -1.0, epsilon = 1e-12);
    }

    #[test]
    fn second_derivative_of_quadratic() {
        let g = Grid::new(0.0, 1.0, 11).unwrap();
        let f = GridFunction::from_fn(g, |x| 3.0 * x * x);
        for v in f.second_derivative().values() {
            assert_abs_diff_eq!(*v, 6.0, epsilon = 1e-9);
        }
    }

    #[test]
    fn refinement_interpolates_cubics_exactly() {
        let g = Grid::new(0.0, 1.0, 11).unwrap();
        let f = GridFunction::from_fn(g, |x| x * x * x - x);
        let r = f.refined();
        assert_eq!(r.len(), 21);
        for (i, x) in r.grid().nodes().enumerate() {
            assert_abs_diff_eq!(r.value(i), x * x * x - x, epsilon = 1e-13);
        }
    }

    #[test]
    fn short_segments_are_rejected() {
        let g = Grid::new(0.0, 1.0, 11).unwrap();
        let f = GridFunction::constant(g, 1.0);
        assert!(f.clone().with_break(2, 0.0, 1.0).is_err());
        assert!(f.with_break(0, 0.0, 1.0).is_err());
    }

    #[test]
    fn non_finite_input_fails_integration() {
        let g = Grid::new(0.0, 1.0, 11).unwrap();
        let mut v = vec![1.0; 11];
        v[4] = f64::NAN;
        let f = GridFunction::new(g, v).unwrap();
        assert!(matches!(f.integral(), Err(Error::NonFinite { .. })));
        assert_eq!(f.singular_nodes(), vec![4]);
    }
}
