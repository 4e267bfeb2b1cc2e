//! Difference operators on the cell-centered lattice.
//!
//! Divergence is a backward difference and the gradient a forward difference.
//! Periodic axes wrap; bounded axes treat the field as zero outside the box,
//! which makes `discrete_divergence` the exact negative adjoint of
//! `forward_gradient` on every grid.

use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::grid::Grid;

/// Backward difference of `v` along `axis`, accumulated into `out`.
fn add_backward_diff(grid: &Grid, v: &[f64], axis: usize, out: &mut [f64]) {
    let n = grid.shape()[axis];
    let s = grid.stride(axis);
    let inv_h = 1.0 / grid.spacing(axis);
    let periodic = grid.is_periodic(axis);
    for start in grid.line_starts(axis) {
        let at = |k: usize| start + k * s;
        let prev0 = if periodic { v[at(n - 1)] } else { 0.0 };
        out[at(0)] += (v[at(0)] - prev0) * inv_h;
        for k in 1..n {
            out[at(k)] += (v[at(k)] - v[at(k - 1)]) * inv_h;
        }
    }
}

fn forward_diff(grid: &Grid, g: &[f64], axis: usize) -> Vec<f64> {
    let n = grid.shape()[axis];
    let s = grid.stride(axis);
    let inv_h = 1.0 / grid.spacing(axis);
    let periodic = grid.is_periodic(axis);
    let mut out = vec![0.0; g.len()];
    for start in grid.line_starts(axis) {
        let at = |k: usize| start + k * s;
        for k in 0..n - 1 {
            out[at(k)] = (g[at(k + 1)] - g[at(k)]) * inv_h;
        }
        let next = if periodic { g[at(0)] } else { 0.0 };
        out[at(n - 1)] = (next - g[at(n - 1)]) * inv_h;
    }
    out
}

pub fn discrete_divergence(v: &VectorField) -> ScalarField {
    let grid = v.grid();
    let mut out = vec![0.0; grid.len()];
    for (axis, c) in v.components().iter().enumerate() {
        add_backward_diff(grid, c.values(), axis, &mut out);
    }
    ScalarField::from_raw(grid.clone(), out)
}

/// Divergence of raw component arrays; used by the solvers' inner loops.
pub(crate) fn divergence_raw(grid: &Grid, comps: &[Vec<f64>]) -> Vec<f64> {
    let mut out = vec![0.0; grid.len()];
    for (axis, c) in comps.iter().enumerate() {
        add_backward_diff(grid, c, axis, &mut out);
    }
    out
}

pub(crate) fn gradient_raw(grid: &Grid, g: &[f64]) -> Vec<Vec<f64>> {
    (0..grid.dim()).map(|a| forward_diff(grid, g, a)).collect()
}

pub fn forward_gradient(g: &ScalarField) -> VectorField {
    VectorField::from_raw(g.grid().clone(), gradient_raw(g.grid(), g.values()))
}

/// `div(grad g)`.
pub fn laplacian(g: &ScalarField) -> ScalarField {
    discrete_divergence(&forward_gradient(g))
}

/// Running integral along a bounded axis: `u[k] = h * sum_{m <= k} f[m]`.
pub fn cumulative_primitive(f: &ScalarField, axis: usize) -> Result<ScalarField> {
    let grid = f.grid();
    grid.check_axis(axis)?;
    if grid.is_periodic(axis) {
        return Err(Error::PeriodicAxis(axis));
    }
    let n = grid.shape()[axis];
    let s = grid.stride(axis);
    let h = grid.spacing(axis);
    let v = f.values();
    let mut out = vec![0.0; v.len()];
    for start in grid.line_starts(axis) {
        let mut acc = 0.0;
        for k in 0..n {
            let i = start + k * s;
            acc += v[i];
            out[i] = h * acc;
        }
    }
    ScalarField::new(grid.clone(), out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn periodic_grid() -> Grid {
        Grid::new(&[3, 4], &[0.0, 0.0], &[1.0, 2.0], &[true, true]).unwrap()
    }

    #[test]
    fn constant_field_has_zero_divergence() {
        let g = periodic_grid();
        let v = VectorField::new(vec![
            ScalarField::constant(&g, 1.5).unwrap(),
            ScalarField::constant(&g, -2.0).unwrap(),
        ])
        .unwrap();
        assert!(discrete_divergence(&v).is_zero());
    }

    #[test]
    fn ramp_has_unit_backward_difference() {
        let g = Grid::new(&[5, 3], &[0.0, 0.0], &[1.0, 1.0], &[false, false]).unwrap();
        let h = g.spacing(0);
        let v1 = crate::field::sample_function(&g, |_| 0.0).unwrap();
        let mut vals = v1.into_values();
        for (i, val) in vals.iter_mut().enumerate() {
            *val = g.unravel(i)[0] as f64 * h;
        }
        let v = VectorField::single(ScalarField::new(g.clone(), vals).unwrap(), 0).unwrap();
        let d = discrete_divergence(&v);
        for (i, &x) in d.values().iter().enumerate() {
            let expect = if g.unravel(i)[0] == 0 { 0.0 } else { 1.0 };
            assert!((x - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn primitive_of_constant() {
        let g = Grid::new(&[4], &[0.0], &[2.0], &[false]).unwrap();
        let f = ScalarField::constant(&g, 1.0).unwrap();
        let u = cumulative_primitive(&f, 0).unwrap();
        assert_eq!(u.values(), &[0.5, 1.0, 1.5, 2.0]);
        let pg = Grid::new(&[4], &[0.0], &[2.0], &[true]).unwrap();
        assert!(matches!(
            cumulative_primitive(&ScalarField::zeros(&pg), 0),
            Err(Error::PeriodicAxis(0))
        ));
    }
}
