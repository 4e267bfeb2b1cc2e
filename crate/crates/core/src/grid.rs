use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 3;

/// Uniform rectangular lattice of cells, values stored at cell centers.
///
/// Storage is row-major with the last axis fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    n: Vec<usize>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    periodic: Vec<bool>,
}

impl Grid {
    pub fn new(n: &[usize], lo: &[f64], hi: &[f64], periodic: &[bool]) -> Result<Self> {
        let d = n.len();
        if d == 0 || d > MAX_DIM {
            return Err(Error::InvalidGrid(format!("dimension {d} not in 1..=3")));
        }
        if lo.len() != d || hi.len() != d || periodic.len() != d {
            return Err(Error::InvalidGrid("per-axis arrays differ in length".into()));
        }
        for axis in 0..d {
            if n[axis] < 2 {
                return Err(Error::InvalidGrid(format!("axis {axis} has {} < 2 points", n[axis])));
            }
            if !lo[axis].is_finite() || !hi[axis].is_finite() || hi[axis] <= lo[axis] {
                return Err(Error::InvalidGrid(format!(
                    "axis {axis} bounds [{}, {}] are not an interval",
                    lo[axis], hi[axis]
                )));
            }
            if n[axis] > u32::MAX as usize {
                return Err(Error::InvalidGrid(format!("axis {axis} too large")));
            }
        }
        let cells = n.iter().try_fold(1usize, |acc, &k| acc.checked_mul(k));
        if cells.is_none() {
            return Err(Error::InvalidGrid("cell count overflows".into()));
        }
        Ok(Self {
            n: n.to_vec(),
            lo: lo.to_vec(),
            hi: hi.to_vec(),
            periodic: periodic.to_vec(),
        })
    }

    /// `[lo, hi]^d` with `n` points per axis.
    pub fn cube(d: usize, n: usize, lo: f64, hi: f64, periodic: bool) -> Result<Self> {
        Self::new(&vec![n; d], &vec![lo; d], &vec![hi; d], &vec![periodic; d])
    }

    pub fn dim(&self) -> usize {
        self.n.len()
    }

    pub fn shape(&self) -> &[usize] {
        &self.n
    }

    pub fn lo(&self) -> &[f64] {
        &self.lo
    }

    pub fn hi(&self) -> &[f64] {
        &self.hi
    }

    pub fn periodic(&self) -> &[bool] {
        &self.periodic
    }

    pub fn is_periodic(&self, axis: usize) -> bool {
        self.periodic[axis]
    }

    pub fn all_periodic(&self) -> bool {
        self.periodic.iter().all(|&p| p)
    }

    pub fn any_periodic(&self) -> bool {
        self.periodic.iter().any(|&p| p)
    }

    /// Number of cells.
    pub fn len(&self) -> usize {
        self.n.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        (self.hi[axis] - self.lo[axis]) / self.n[axis] as f64
    }

    pub fn spacings(&self) -> Vec<f64> {
        (0..self.dim()).map(|a| self.spacing(a)).collect()
    }

    pub fn min_spacing(&self) -> f64 {
        self.spacings().into_iter().fold(f64::INFINITY, f64::min)
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacings().iter().product()
    }

    /// Physical measure of the whole box.
    pub fn volume(&self) -> f64 {
        (0..self.dim()).map(|a| self.hi[a] - self.lo[a]).product()
    }

    pub fn strides(&self) -> Vec<usize> {
        let d = self.dim();
        let mut s = vec![1; d];
        for a in (0..d.saturating_sub(1)).rev() {
            s[a] = s[a + 1] * self.n[a + 1];
        }
        s
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.n[axis + 1..].iter().product()
    }

    /// Cell-center coordinate along one axis.
    pub fn center(&self, axis: usize, k: usize) -> f64 {
        self.lo[axis] + (k as f64 + 0.5) * self.spacing(axis)
    }

    pub fn unravel(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for a in (0..self.dim()).rev() {
            idx[a] = flat % self.n[a];
            flat /= self.n[a];
        }
        idx
    }

    pub fn ravel(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.n).fold(0, |acc, (&i, &n)| acc * n + i)
    }

    /// Cell-center coordinates of a flat index.
    pub fn position(&self, flat: usize) -> Vec<f64> {
        self.unravel(flat)
            .iter()
            .enumerate()
            .map(|(a, &k)| self.center(a, k))
            .collect()
    }

    /// Flat offsets of the first cell of every line running along `axis`,
    /// in increasing order.
    pub fn line_starts(&self, axis: usize) -> Vec<usize> {
        let stride = self.stride(axis);
        let block = stride * self.n[axis];
        let mut starts = Vec::with_capacity(self.len() / self.n[axis]);
        for outer in (0..self.len()).step_by(block) {
            for inner in 0..stride {
                starts.push(outer + inner);
            }
        }
        starts
    }

    /// The grid with `axis` removed (the cross-section seen by lines along `axis`).
    pub fn without_axis(&self, axis: usize) -> Option<Grid> {
        if self.dim() == 1 {
            return None;
        }
        let keep = |v: &[f64]| -> Vec<f64> {
            v.iter()
                .enumerate()
                .filter(|&(a, _)| a != axis)
                .map(|(_, &x)| x)
                .collect()
        };
        let n: Vec<usize> = self
            .n
            .iter()
            .enumerate()
            .filter(|&(a, _)| a != axis)
            .map(|(_, &x)| x)
            .collect();
        let periodic: Vec<bool> = self
            .periodic
            .iter()
            .enumerate()
            .filter(|&(a, _)| a != axis)
            .map(|(_, &x)| x)
            .collect();
        Grid::new(&n, &keep(&self.lo), &keep(&self.hi), &periodic).ok()
    }

    pub fn check_axis(&self, axis: usize) -> Result<()> {
        if axis >= self.dim() {
            return Err(Error::InvalidParameter(format!(
                "axis {axis} out of range for a {}-d grid",
                self.dim()
            )));
        }
        Ok(())
    }
}
