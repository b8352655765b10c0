//! Periodic uniform grids on the unit torus and real-valued fields over them.
//!
//! The torus side is fixed to 1: a grid has `n` points per axis with spacing
//! `h = 1/n`, and index arithmetic wraps mod `n`. Coordinates are split into
//! an x1-block (axes `0..d1`) and an x2-block (axes `d1..d1+d2`), with
//! `d1 + d2 in {1, 2}` and each block at most one-dimensional.

use crate::error::{Error, Result};
use std::io::{BufRead, Write};

/// Coordinate block selector: the x1 axes, the x2 axes, or all axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Block {
    X1,
    X2,
    Full,
}

impl Block {
    pub fn name(self) -> &'static str {
        match self {
            Block::X1 => "x1",
            Block::X2 => "x2",
            Block::Full => "full",
        }
    }
}

/// Uniform periodic lattice on [0,1)^d, d = d1 + d2 <= 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct TorusGrid {
    d1: usize,
    d2: usize,
    n: usize,
}

/// Builds a grid; `n` must be a power of two >= 8 so the spectral operators
/// can use a radix-2 transform.
pub fn make_grid(d1: usize, d2: usize, n: usize) -> Result<TorusGrid> {
    if d1 > 1 || d2 > 1 || !(1..=2).contains(&(d1 + d2)) {
        return Err(Error::DimensionOutOfRange { d1, d2 });
    }
    if n < 8 || !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    Ok(TorusGrid { d1, d2, n })
}

impl TorusGrid {
    pub fn d1(&self) -> usize {
        self.d1
    }
    pub fn d2(&self) -> usize {
        self.d2
    }
    pub fn dim(&self) -> usize {
        self.d1 + self.d2
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn h(&self) -> f64 {
        1.0 / self.n as f64
    }
    /// Total number of nodes.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim() as u32)
    }
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Axes belonging to a block, as indices into the row-major layout.
    pub fn block_axes(&self, block: Block) -> Vec<usize> {
        match block {
            Block::X1 => (0..self.d1).collect(),
            Block::X2 => (self.d1..self.d1 + self.d2).collect(),
            Block::Full => (0..self.dim()).collect(),
        }
    }

    /// Row-major linear index from per-axis indices (already in range).
    pub fn index(&self, ix: &[usize]) -> usize {
        match self.dim() {
            1 => ix[0],
            _ => ix[0] * self.n + ix[1],
        }
    }

    /// Per-axis indices from a linear index.
    pub fn coords(&self, idx: usize) -> [usize; 2] {
        match self.dim() {
            1 => [idx, 0],
            _ => [idx / self.n, idx % self.n],
        }
    }

    /// Node position in [0,1)^d.
    pub fn node(&self, idx: usize) -> [f64; 2] {
        let c = self.coords(idx);
        let h = self.h();
        [c[0] as f64 * h, c[1] as f64 * h]
    }

    /// Linear index of the node shifted by `delta` steps along `axis`, wrapping.
    pub fn shift(&self, idx: usize, axis: usize, delta: isize) -> usize {
        let mut c = self.coords(idx);
        let n = self.n as isize;
        c[axis] = (((c[axis] as isize + delta) % n + n) % n) as usize;
        self.index(&c[..self.dim()])
    }
}

/// Real values on a [`TorusGrid`], row-major over axes. Periodicity is
/// structural: all index arithmetic wraps, nothing is duplicated.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    grid: TorusGrid,
    values: Vec<f64>,
}

impl GridField {
    pub fn new(grid: TorusGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("field value {v}")));
        }
        Ok(GridField { grid, values })
    }

    pub fn zeros(grid: TorusGrid) -> Self {
        GridField {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: TorusGrid, c: f64) -> Self {
        GridField {
            grid,
            values: vec![c; grid.len()],
        }
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
    pub fn len(&self) -> usize {
        self.values.len()
    }
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// f(x) applied nodewise, in place.
    pub fn map_inplace(&mut self, f: impl Fn(f64) -> f64) {
        for v in &mut self.values {
            *v = f(*v);
        }
    }

    /// self + s * other, nodewise.
    pub fn axpy(&mut self, s: f64, other: &GridField) {
        debug_assert_eq!(self.grid, other.grid);
        for (v, w) in self.values.iter_mut().zip(&other.values) {
            *v += s * w;
        }
    }

    pub fn add_constant(&mut self, c: f64) {
        for v in &mut self.values {
            *v += c;
        }
    }

    /// Periodic linear interpolation along `axis` at real offset `x` (torus
    /// units) from node `idx`. Weights are nonnegative and sum to one, so the
    /// evaluation respects the comparison principle.
    pub fn interp_along(&self, idx: usize, axis: usize, x: f64) -> f64 {
        let n = self.grid.n as f64;
        let y = x * n;
        let base = y.floor();
        let frac = y - base;
        let i = base as isize;
        let a = self.values[self.grid.shift(idx, axis, i)];
        let b = self.values[self.grid.shift(idx, axis, i + 1)];
        a + frac * (b - a)
    }
}

/// Samples a function of the node position onto a grid.
pub fn sample(grid: TorusGrid, func: impl Fn(&[f64; 2]) -> f64) -> Result<GridField> {
    let mut values = Vec::with_capacity(grid.len());
    for idx in 0..grid.len() {
        let v = func(&grid.node(idx));
        if !v.is_finite() {
            return Err(Error::NonFinite(format!("sample at node {idx}")));
        }
        values.push(v);
    }
    Ok(GridField { grid, values })
}

pub fn sup_norm(u: &GridField) -> f64 {
    u.values.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// max - min over nodes.
pub fn oscillation(u: &GridField) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in &u.values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    hi - lo
}

pub fn mean(u: &GridField) -> f64 {
    u.values.iter().sum::<f64>() / u.values.len() as f64
}

pub fn max_value(u: &GridField) -> f64 {
    u.values.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v))
}

pub fn min_value(u: &GridField) -> f64 {
    u.values.iter().fold(f64::INFINITY, |m, &v| m.min(v))
}

/// Largest forward difference quotient |u(i+1) - u(i)|/h over nodes and axes,
/// with wrapped indexing. Discrete stand-in for the Lipschitz constant.
pub fn discrete_lipschitz(u: &GridField) -> f64 {
    let grid = u.grid;
    let h = grid.h();
    let mut lip: f64 = 0.0;
    for idx in 0..grid.len() {
        for axis in 0..grid.dim() {
            let d = (u.values[grid.shift(idx, axis, 1)] - u.values[idx]).abs() / h;
            lip = lip.max(d);
        }
    }
    lip
}

/// Writes a field as CSV: header `i0[,i1],value`, one row per node in
/// row-major order, 17 significant digits.
pub fn write_field_csv<W: Write>(u: &GridField, mut out: W) -> Result<()> {
    let grid = u.grid;
    if grid.dim() == 1 {
        writeln!(out, "i0,value")?;
    } else {
        writeln!(out, "i0,i1,value")?;
    }
    for idx in 0..grid.len() {
        let c = grid.coords(idx);
        if grid.dim() == 1 {
            writeln!(out, "{},{:.16e}", c[0], u.values[idx])?;
        } else {
            writeln!(out, "{},{},{:.16e}", c[0], c[1], u.values[idx])?;
        }
    }
    Ok(())
}

/// Reads a field in the CSV format produced by [`write_field_csv`].
///
/// The node count must be a full grid (n^d with d inferred from the header);
/// rows must appear in row-major order.
pub fn read_field_csv<R: BufRead>(grid: TorusGrid, input: R) -> Result<GridField> {
    let mut lines = input.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Precondition("empty CSV".into()))??;
    let expect = if grid.dim() == 1 { "i0,value" } else { "i0,i1,value" };
    if header.trim() != expect {
        return Err(Error::Precondition(format!(
            "bad CSV header '{header}', expected '{expect}'"
        )));
    }
    let mut values = Vec::with_capacity(grid.len());
    for (row, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.trim().split(',').collect();
        if cols.len() != grid.dim() + 1 {
            return Err(Error::Precondition(format!("row {row}: bad column count")));
        }
        let mut ix = [0usize; 2];
        for (a, col) in cols[..grid.dim()].iter().enumerate() {
            ix[a] = col
                .parse::<usize>()
                .map_err(|e| Error::Precondition(format!("row {row}: {e}")))?;
            if ix[a] >= grid.n() {
                return Err(Error::Precondition(format!("row {row}: index out of range")));
            }
        }
        if grid.index(&ix[..grid.dim()]) != values.len() {
            return Err(Error::Precondition(format!("row {row}: out of order")));
        }
        let v = cols[grid.dim()]
            .parse::<f64>()
            .map_err(|e| Error::Precondition(format!("row {row}: {e}")))?;
        values.push(v);
    }
    GridField::new(grid, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn make_grid_basic() {
        let g = make_grid(1, 1, 64).unwrap();
        assert_eq!(g.dim(), 2);
        assert_eq!(g.h(), 1.0 / 64.0);
        assert_eq!(g.h() * g.n() as f64, 1.0);

        let g = make_grid(0, 1, 32).unwrap();
        assert_eq!(g.dim(), 1);
        assert_eq!(g.block_axes(Block::X2), vec![0]);
        assert!(g.block_axes(Block::X1).is_empty());
    }

    #[test]
    fn make_grid_rejects_bad_n_and_dims() {
        assert!(matches!(make_grid(1, 1, 7), Err(Error::NotPowerOfTwo(7))));
        assert!(matches!(make_grid(1, 1, 4), Err(Error::NotPowerOfTwo(4))));
        assert!(matches!(
            make_grid(0, 0, 64),
            Err(Error::DimensionOutOfRange { .. })
        ));
        assert!(matches!(
            make_grid(2, 1, 64),
            Err(Error::DimensionOutOfRange { .. })
        ));
    }

    #[test]
    fn sample_constant_and_cos() {
        let g = make_grid(0, 1, 8).unwrap();
        let c = sample(g, |_| 3.0).unwrap();
        assert!(c.values().iter().all(|&v| v == 3.0));
        assert_eq!(sup_norm(&c), 3.0);
        assert_eq!(oscillation(&c), 0.0);
        assert_eq!(mean(&c), 3.0);

        let u = sample(g, |x| (2.0 * PI * x[0]).cos()).unwrap();
        for i in 0..8 {
            assert!((u.values()[i] - (2.0 * PI * i as f64 / 8.0).cos()).abs() < 1e-15);
        }
        // symmetric samples: mean is exactly 0 up to roundoff
        assert!(mean(&u).abs() < 1e-16);
    }

    #[test]
    fn sample_rejects_non_finite() {
        let g = make_grid(0, 1, 8).unwrap();
        assert!(matches!(
            sample(g, |x| 1.0 / (x[0] - 0.25)),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn lipschitz_examples() {
        let g = make_grid(0, 1, 8).unwrap();
        let c = GridField::constant(g, 4.0);
        assert_eq!(discrete_lipschitz(&c), 0.0);

        let mut spike = GridField::zeros(g);
        spike.values_mut()[1] = 1.0;
        assert_eq!(discrete_lipschitz(&spike), 8.0);

        let g = make_grid(0, 1, 64).unwrap();
        let u = sample(g, |x| (2.0 * PI * x[0]).cos()).unwrap();
        let l = discrete_lipschitz(&u);
        assert!(l >= 6.0 && l <= 2.0 * PI, "lip = {l}");
    }

    #[test]
    fn oscillation_shift_invariance() {
        let g = make_grid(1, 1, 8).unwrap();
        let u = sample(g, |x| (2.0 * PI * x[0]).sin() + 0.5 * x[1]).unwrap();
        let mut w = u.clone();
        w.add_constant(17.25);
        assert!((oscillation(&u) - oscillation(&w)).abs() < 1e-12);
        let mut centered = u.clone();
        centered.add_constant(-mean(&u));
        assert!(sup_norm(&centered) <= oscillation(&u) + 1e-15);
    }

    #[test]
    fn interp_along_matches_nodes_and_midpoints() {
        let g = make_grid(0, 1, 8).unwrap();
        let u = sample(g, |x| x[0]).unwrap();
        // at node offsets the interpolation is exact
        assert!((u.interp_along(0, 0, 3.0 / 8.0) - 3.0 / 8.0).abs() < 1e-15);
        // midpoint between last node and wrap: values 7/8 and 0
        let v = u.interp_along(0, 0, 7.0 / 8.0 + 1.0 / 16.0);
        assert!((v - (7.0 / 8.0 + 0.0) / 2.0).abs() < 1e-15);
    }

    #[test]
    fn csv_round_trip() {
        let g = make_grid(1, 1, 8).unwrap();
        let u = sample(g, |x| (2.0 * PI * x[0]).cos() * (2.0 * PI * x[1]).sin()).unwrap();
        let mut buf = Vec::new();
        write_field_csv(&u, &mut buf).unwrap();
        let back = read_field_csv(g, &buf[..]).unwrap();
        assert_eq!(u, back);
    }
}
