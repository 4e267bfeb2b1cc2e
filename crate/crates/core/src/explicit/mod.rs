//! Explicit splittings `f = f_1 + ... + f_d` where each `f_j` has bounded
//! integrals along axis-`j` lines, so its running primitive along that axis
//! is a bounded component `u_j` with `div u = f`.

mod inductive;
mod onestep;
mod weak_l2;

use serde::{Deserialize, Serialize};

pub use inductive::split_inductive_nd;
pub use onestep::{split_disjoint_2d, split_onestep_2d};
pub use weak_l2::{decompose_weak_l2, StripDecompositionTrace, StripPass, DEFAULT_MAX_ITER};

use crate::error::{Error, Result};
use crate::field::{RegionMask, ScalarField, VectorField};
use crate::grid::Grid;
use crate::ops::cumulative_primitive;

/// Integral of `|f|` along one axis-`axis` line. Lines are numbered in
/// [`Grid::line_starts`] order; on a 2-D grid that is the other coordinate.
pub fn line_energy(f: &ScalarField, axis: usize, index: usize) -> Result<f64> {
    let grid = f.grid();
    grid.check_axis(axis)?;
    let lines = grid.len() / grid.shape()[axis];
    if index >= lines {
        return Err(Error::OutOfRange { index, len: lines });
    }
    let start = grid.line_starts(axis)[index];
    Ok(line_sum(grid, f.values(), axis, start))
}

pub(crate) fn line_sum(grid: &Grid, v: &[f64], axis: usize, start: usize) -> f64 {
    let s = grid.stride(axis);
    let vals: Vec<f64> = (0..grid.shape()[axis]).map(|k| v[start + k * s].abs()).collect();
    crate::sum::pairwise_sum(&vals) * grid.spacing(axis)
}

/// All line energies along `axis`, in line order.
pub(crate) fn line_energies(grid: &Grid, v: &[f64], axis: usize) -> Vec<f64> {
    grid.line_starts(axis)
        .into_iter()
        .map(|s| line_sum(grid, v, axis, s))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineCertificate {
    pub axis: usize,
    pub index: usize,
    pub value: f64,
    pub bound: f64,
}

impl LineCertificate {
    /// `value <= bound * (1 + rel)`.
    pub fn holds(&self, rel: f64) -> bool {
        self.value <= self.bound * (1.0 + rel)
    }
}

#[derive(Debug, Clone)]
pub struct SplitResult {
    pub parts: Vec<ScalarField>,
    /// Empty for weighted splits.
    pub masks: Vec<RegionMask>,
    pub u: VectorField,
    pub certificates: Vec<LineCertificate>,
}

impl SplitResult {
    pub fn max_certificate_excess(&self) -> f64 {
        self.certificates
            .iter()
            .map(|c| c.value - c.bound)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

pub(crate) fn require_bounded(grid: &Grid) -> Result<()> {
    match (0..grid.dim()).find(|&a| grid.is_periodic(a)) {
        Some(a) => Err(Error::PeriodicAxis(a)),
        None => Ok(()),
    }
}

pub(crate) fn require_2d(grid: &Grid) -> Result<()> {
    if grid.dim() != 2 {
        return Err(Error::Dimension { expected: "2".into(), found: grid.dim() });
    }
    Ok(())
}

/// Primitives of each part along its own axis plus all line certificates.
pub(crate) fn assemble(
    parts: Vec<ScalarField>,
    masks: Vec<RegionMask>,
    bound: f64,
) -> Result<SplitResult> {
    let grid = parts[0].grid().clone();
    let comps = parts
        .iter()
        .enumerate()
        .map(|(axis, p)| cumulative_primitive(p, axis))
        .collect::<Result<Vec<_>>>()?;
    let u = VectorField::new(comps)?;
    let mut certificates = Vec::new();
    for (axis, p) in parts.iter().enumerate() {
        for (index, value) in line_energies(&grid, p.values(), axis).into_iter().enumerate() {
            certificates.push(LineCertificate { axis, index, value, bound });
        }
    }
    Ok(SplitResult { parts, masks, u, certificates })
}

/// Masks from a per-cell axis label (`None` off the support).
pub(crate) fn masks_from_labels(grid: &Grid, labels: &[Option<usize>]) -> Vec<RegionMask> {
    (0..grid.dim())
        .map(|a| RegionMask::from_raw(grid.clone(), labels.iter().map(|&l| l == Some(a)).collect()))
        .collect()
}

pub(crate) fn parts_from_masks(f: &ScalarField, masks: &[RegionMask]) -> Result<Vec<ScalarField>> {
    masks.iter().map(|m| f.restrict(m)).collect()
}
