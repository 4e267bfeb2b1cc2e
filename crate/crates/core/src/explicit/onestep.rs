use super::{assemble, masks_from_labels, parts_from_masks, require_2d, require_bounded, SplitResult};
use crate::error::Result;
use crate::field::ScalarField;
use crate::norms::l2;

/// `V(x_i)` (axis-1 lines) and `H(y_j)` (axis-0 lines) as L² line norms.
fn cross_energies(f: &ScalarField) -> (Vec<f64>, Vec<f64>) {
    let g = f.grid();
    let (n0, n1) = (g.shape()[0], g.shape()[1]);
    let (h0, h1) = (g.spacing(0), g.spacing(1));
    let v = f.values();
    let mut vv = vec![0.0; n0];
    let mut hh = vec![0.0; n1];
    for i in 0..n0 {
        for j in 0..n1 {
            let s = v[i * n1 + j] * v[i * n1 + j];
            vv[i] += s * h1;
            hh[j] += s * h0;
        }
    }
    (
        vv.into_iter().map(f64::sqrt).collect(),
        hh.into_iter().map(f64::sqrt).collect(),
    )
}

/// Weighted split `f_1 = V/(H+V) f`, `f_2 = f - f_1`.
pub fn split_onestep_2d(f: &ScalarField) -> Result<SplitResult> {
    let g = f.grid();
    require_2d(g)?;
    require_bounded(g)?;
    let (vv, hh) = cross_energies(f);
    let n1 = g.shape()[1];
    let v = f.values();
    let mut f1 = vec![0.0; v.len()];
    let mut f2 = vec![0.0; v.len()];
    for (k, &x) in v.iter().enumerate() {
        let (i, j) = (k / n1, k % n1);
        let den = hh[j] + vv[i];
        let alpha = if den > 0.0 { vv[i] / den } else { 0.0 };
        f1[k] = alpha * x;
        f2[k] = x - f1[k];
    }
    let parts = vec![
        ScalarField::new(g.clone(), f1)?,
        ScalarField::new(g.clone(), f2)?,
    ];
    assemble(parts, Vec::new(), l2(f))
}

/// Disjoint split: cells with `H(y) <= V(x)` go to `f_1`.
pub fn split_disjoint_2d(f: &ScalarField) -> Result<SplitResult> {
    let g = f.grid();
    require_2d(g)?;
    require_bounded(g)?;
    let (vv, hh) = cross_energies(f);
    let n1 = g.shape()[1];
    let labels: Vec<Option<usize>> = f
        .values()
        .iter()
        .enumerate()
        .map(|(k, &x)| {
            if x == 0.0 {
                None
            } else if hh[k % n1] <= vv[k / n1] {
                Some(0)
            } else {
                Some(1)
            }
        })
        .collect();
    let masks = masks_from_labels(g, &labels);
    let parts = parts_from_masks(f, &masks)?;
    assemble(parts, masks, l2(f))
}
