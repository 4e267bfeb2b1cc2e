use super::{assemble, masks_from_labels, parts_from_masks, require_bounded, SplitResult};
use crate::error::Result;
use crate::field::ScalarField;
use crate::grid::Grid;
use crate::norms::lp_norm;

/// Splitting for `L^d` data by induction on the dimension.
///
/// Along axis 0 the cells with `|f(x, y)| >= t(y)`, where
/// `t(y)^(d-1) = ∫ |f(s, y)|^d ds` for the unit-normalized field, go to
/// `f_1`; every axis-0 slice of the remainder is then split the same way in
/// one dimension less. Each level normalizes its own data, and the line
/// integrals of `f_j` along axis `j` are bounded by `||f||_{L^d}`.
pub fn split_inductive_nd(f: &ScalarField) -> Result<SplitResult> {
    let g = f.grid();
    require_bounded(g)?;
    let mut labels = vec![None; g.len()];
    label_cells(g, f.values(), 0, &mut labels);
    let masks = masks_from_labels(g, &labels);
    let parts = parts_from_masks(f, &masks)?;
    let bound = lp_norm(f, g.dim() as f64)?;
    assemble(parts, masks, bound)
}

/// Writes the axis label (offset by `first_axis`) of every nonzero cell.
fn label_cells(grid: &Grid, v: &[f64], first_axis: usize, labels: &mut [Option<usize>]) {
    let d = grid.dim();
    if d == 1 {
        for (l, &x) in labels.iter_mut().zip(v) {
            if x != 0.0 {
                *l = Some(first_axis);
            }
        }
        return;
    }
    let f = ScalarField::from_raw(grid.clone(), v.to_vec());
    let norm = lp_norm(&f, d as f64).expect("d >= 1");
    if norm == 0.0 {
        return;
    }
    let n0 = grid.shape()[0];
    let h0 = grid.spacing(0);
    let cross = grid.stride(0);
    let a: Vec<f64> = v.iter().map(|x| x.abs() / norm).collect();
    let mut rest = v.to_vec();
    // Lines along axis 0 start at the flat indices 0..cross.
    for y in 0..cross {
        let pow: Vec<f64> = (0..n0).map(|i| a[i * cross + y].powi(d as i32)).collect();
        let t = (crate::sum::pairwise_sum(&pow) * h0).powf(1.0 / (d - 1) as f64);
        for i in 0..n0 {
            let k = i * cross + y;
            if v[k] != 0.0 && a[k] >= t {
                labels[k] = Some(first_axis);
                rest[k] = 0.0;
            }
        }
    }
    let sub = grid.without_axis(0).expect("d >= 2");
    for i in 0..n0 {
        let block = i * cross..(i + 1) * cross;
        label_cells(&sub, &rest[block.clone()], first_axis + 1, &mut labels[block]);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ops::discrete_divergence;

    #[test]
    fn one_dimensional_case_is_the_primitive() {
        let g = Grid::new(&[8], &[0.0], &[2.0], &[false]).unwrap();
        let f = ScalarField::new(g, vec![1.0, -2.0, 0.0, 0.5, 3.0, -1.0, 0.0, 2.0]).unwrap();
        let r = split_inductive_nd(&f).unwrap();
        assert_eq!(r.parts[0], f);
        assert_eq!(r.masks[0], f.support());
        let l1 = lp_norm(&f, 1.0).unwrap();
        assert!(r.u.linf() <= l1 * (1.0 + 1e-14));
    }

    #[test]
    fn zero_field_has_empty_masks() {
        let g = Grid::cube(3, 4, 0.0, 1.0, false).unwrap();
        let r = split_inductive_nd(&ScalarField::zeros(&g)).unwrap();
        assert!(r.masks.iter().all(|m| m.is_empty()));
        assert!(r.u.is_zero());
    }

    #[test]
    fn small_cube_certificates() {
        let g = Grid::cube(3, 4, 0.0, 1.0, false).unwrap();
        let vals: Vec<f64> = (0..64).map(|k| ((k * 37 % 11) as f64 - 5.0) * 0.3).collect();
        let f = ScalarField::new(g, vals).unwrap();
        let r = split_inductive_nd(&f).unwrap();
        assert_eq!(r.certificates.len(), 48);
        assert!(r.certificates.iter().all(|c| c.holds(1e-12)));
        assert!(discrete_divergence(&r.u).sub(&f).unwrap().max_abs() < 1e-12);
    }
}
