//! Regular grids and the scalar / tensor fields living on them.
//!
//! A [`Grid`] is a rectangular sampling of the unit cell `[0, 1)^d`, point
//! `(i1, .., id)` sitting at `x = (i1/N1, .., id/Nd)`. The same grid type
//! backs both periodic spectral fields and nodal maps for the bounded
//! solver; only the interpretation of the endpoints differs.
//!
//! Tensor fields store one contiguous plane per Mandel component so each
//! component can be transformed without striding.

use crate::error::{Error, Result};
use crate::tensor::{Dim, SymTensor2};

/// Rectangular grid over the unit cell, with `shape[a]` points along axis `a`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Grid {
    dim: Dim,
    shape: [usize; 3],
}

impl Grid {
    /// # Panics
    ///
    /// Panics if any axis has fewer than 2 points.
    pub fn new2(n1: usize, n2: usize) -> Self {
        assert!(n1 >= 2 && n2 >= 2, "grid axes need at least 2 points");
        Grid {
            dim: Dim::Two,
            shape: [n1, n2, 1],
        }
    }

    /// # Panics
    ///
    /// Panics if any axis has fewer than 2 points.
    pub fn new3(n1: usize, n2: usize, n3: usize) -> Self {
        assert!(
            n1 >= 2 && n2 >= 2 && n3 >= 2,
            "grid axes need at least 2 points"
        );
        Grid {
            dim: Dim::Three,
            shape: [n1, n2, n3],
        }
    }

    /// Square or cubic grid with `n` points per axis.
    pub fn cube(dim: Dim, n: usize) -> Self {
        match dim {
            Dim::Two => Self::new2(n, n),
            Dim::Three => Self::new3(n, n, n),
        }
    }

    pub fn dim(&self) -> Dim {
        self.dim
    }

    /// Points along each of the `d` axes.
    pub fn shape(&self) -> &[usize] {
        &self.shape[..self.dim.size()]
    }

    /// Total number of grid points.
    pub fn len(&self) -> usize {
        self.shape().iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Row-major (last axis fastest) flat index of a multi-index.
    pub fn flat(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.dim.size());
        let mut out = 0;
        for (a, &i) in idx.iter().enumerate() {
            debug_assert!(i < self.shape[a]);
            out = out * self.shape[a] + i;
        }
        out
    }

    /// Multi-index of a flat index.
    pub fn unflat(&self, mut flat: usize) -> [usize; 3] {
        let d = self.dim.size();
        let mut idx = [0usize; 3];
        for a in (0..d).rev() {
            idx[a] = flat % self.shape[a];
            flat /= self.shape[a];
        }
        idx
    }

    /// Coordinates `i/N` per axis of a flat index.
    pub fn coords(&self, flat: usize) -> [f64; 3] {
        let idx = self.unflat(flat);
        let mut x = [0.0f64; 3];
        for a in 0..self.dim.size() {
            x[a] = idx[a] as f64 / self.shape[a] as f64;
        }
        x
    }
}

/// Scalar field on a grid, row-major values.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    values: Vec<f64>,
}

impl ScalarField {
    /// Errors with [`Error::GridMismatch`] if the value count is wrong.
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        Ok(ScalarField { grid, values })
    }

    pub fn uniform(grid: Grid, value: f64) -> Self {
        ScalarField {
            grid,
            values: vec![value; grid.len()],
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn get(&self, flat: usize) -> f64 {
        self.values[flat]
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn min(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .cloned()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Shifts every value by a constant.
    pub fn shift(&mut self, delta: f64) {
        for v in &mut self.values {
            *v += delta;
        }
    }
}

/// Field of symmetric second-order tensors, stored one component plane at a
/// time (`component * npoints + flat`).
#[derive(Clone, Debug, PartialEq)]
pub struct TensorField {
    grid: Grid,
    data: Vec<f64>,
}

impl TensorField {
    pub fn zeros(grid: Grid) -> Self {
        let n = grid.len() * grid.dim().mandel_len();
        TensorField {
            grid,
            data: vec![0.0; n],
        }
    }

    /// Constant field equal to `value` everywhere.
    ///
    /// # Panics
    ///
    /// Panics if the tensor dimension differs from the grid dimension.
    pub fn uniform(grid: Grid, value: &SymTensor2) -> Self {
        assert_eq!(grid.dim(), value.dim(), "dimension mismatch");
        let n = grid.len();
        let mut f = Self::zeros(grid);
        for (c, &v) in value.mandel().iter().enumerate() {
            f.data[c * n..(c + 1) * n].fill(v);
        }
        f
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn ncomp(&self) -> usize {
        self.grid.dim().mandel_len()
    }

    /// Contiguous plane of one Mandel component.
    pub fn component(&self, c: usize) -> &[f64] {
        let n = self.grid.len();
        &self.data[c * n..(c + 1) * n]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [f64] {
        let n = self.grid.len();
        &mut self.data[c * n..(c + 1) * n]
    }

    pub fn get(&self, flat: usize) -> SymTensor2 {
        let n = self.grid.len();
        let m = self.ncomp();
        let mut comps = [0.0f64; 6];
        for c in 0..m {
            comps[c] = self.data[c * n + flat];
        }
        SymTensor2::from_mandel(self.grid.dim(), &comps[..m])
    }

    pub fn set(&mut self, flat: usize, value: &SymTensor2) {
        debug_assert_eq!(value.dim(), self.grid.dim());
        let n = self.grid.len();
        for (c, &v) in value.mandel().iter().enumerate() {
            self.data[c * n + flat] = v;
        }
    }

    /// Spatial mean tensor.
    pub fn mean(&self) -> SymTensor2 {
        let n = self.grid.len();
        let m = self.ncomp();
        let mut comps = [0.0f64; 6];
        for c in 0..m {
            comps[c] = self.component(c).iter().sum::<f64>() / n as f64;
        }
        SymTensor2::from_mandel(self.grid.dim(), &comps[..m])
    }

    /// Root mean square of the pointwise tensor norm.
    pub fn rms(&self) -> f64 {
        let n = self.grid.len();
        let sum: f64 = self.data.iter().map(|v| v * v).sum();
        (sum / n as f64).sqrt()
    }

    /// RMS of the pointwise difference between two fields.
    ///
    /// Errors with [`Error::GridMismatch`] when grids differ.
    pub fn rms_diff(&self, other: &TensorField) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let n = self.grid.len();
        let sum: f64 = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        Ok((sum / n as f64).sqrt())
    }

    /// Largest pointwise tensor norm of the difference.
    ///
    /// Errors with [`Error::GridMismatch`] when grids differ.
    pub fn sup_diff(&self, other: &TensorField) -> Result<f64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let n = self.grid.len();
        let m = self.ncomp();
        let mut worst = 0.0f64;
        for p in 0..n {
            let mut acc = 0.0;
            for c in 0..m {
                let d = self.data[c * n + p] - other.data[c * n + p];
                acc += d * d;
            }
            worst = worst.max(acc);
        }
        Ok(worst.sqrt())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn flat_index_is_row_major() {
        let g = Grid::new2(3, 4);
        assert_eq!(g.flat(&[0, 0]), 0);
        assert_eq!(g.flat(&[0, 3]), 3);
        assert_eq!(g.flat(&[1, 0]), 4);
        assert_eq!(g.flat(&[2, 3]), 11);
        assert_eq!(g.unflat(7)[..2], [1, 3]);
    }

    #[test]
    fn coords_are_fractions_of_axis_length() {
        let g = Grid::new2(4, 8);
        let x = g.coords(g.flat(&[1, 6]));
        assert_abs_diff_eq!(x[0], 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(x[1], 0.75, epsilon = 1e-15);
    }

    #[test]
    fn tensor_field_roundtrip_and_mean() {
        let g = Grid::new2(2, 2);
        let mut f = TensorField::zeros(g);
        let t0 = SymTensor2::from_mandel(Dim::Two, &[1.0, 2.0, 3.0]);
        let t1 = SymTensor2::from_mandel(Dim::Two, &[3.0, 0.0, -1.0]);
        f.set(0, &t0);
        f.set(3, &t1);
        assert_eq!(f.get(0).mandel(), t0.mandel());
        assert_eq!(f.get(3).mandel(), t1.mandel());
        let mean = f.mean();
        assert_abs_diff_eq!(mean.mandel()[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(mean.mandel()[2], 0.5, epsilon = 1e-15);
    }

    #[test]
    fn scalar_field_rejects_wrong_length() {
        let g = Grid::new2(2, 2);
        assert!(ScalarField::new(g, vec![0.0; 3]).is_err());
    }
}
