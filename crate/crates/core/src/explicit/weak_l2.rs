use serde::{Deserialize, Serialize};

use super::{assemble, masks_from_labels, parts_from_masks, require_2d, require_bounded, SplitResult};
use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::norms::weak_lp_setnorm;

pub const DEFAULT_MAX_ITER: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StripPass {
    /// Measure of the product set `rows × cols` entering the pass.
    pub measure: f64,
    /// Rows (axis-1 indices) with horizontal energy above `tau`.
    pub rows_kept: usize,
    /// Columns (axis-0 indices) with vertical energy above `tau`.
    pub cols_kept: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StripDecompositionTrace {
    pub tau: f64,
    pub passes: Vec<StripPass>,
    /// Measure of the set left when the loop stopped.
    pub final_measure: f64,
    /// False when `max_iter` ran out with data still unassigned; the
    /// leftover is then missing from both parts.
    pub complete: bool,
}

/// Row/column strip decomposition for weak-L² data.
///
/// Works on a shrinking product set `Ω^k`. Rows whose horizontal line energy
/// of `f χ_{Ω^k}` is at most `tau` go to `f_1`; columns whose vertical energy
/// is at most `tau` go to `f_2` (minus the cells already taken); the rest
/// becomes `Ω^{k+1}`. Energies are measured for `f` scaled to unit weak-L²
/// set norm.
pub fn decompose_weak_l2(
    f: &ScalarField,
    tau: f64,
    max_iter: usize,
) -> Result<(SplitResult, StripDecompositionTrace)> {
    let g = f.grid();
    require_2d(g)?;
    require_bounded(g)?;
    if !(tau > 1.0) || !tau.is_finite() {
        return Err(Error::InvalidParameter(format!("tau = {tau} must exceed 1")));
    }
    let (n0, n1) = (g.shape()[0], g.shape()[1]);
    let (h0, h1) = (g.spacing(0), g.spacing(1));
    let w = weak_lp_setnorm(f, 2.0)?;
    let v = f.values();
    let mut labels = vec![None; v.len()];
    let mut trace = StripDecompositionTrace { tau, passes: Vec::new(), final_measure: 0.0, complete: true };
    let mut rows: Vec<usize> = (0..n1).collect();
    let mut cols: Vec<usize> = (0..n0).collect();
    if w > 0.0 {
        let a: Vec<f64> = v.iter().map(|x| x.abs() / w).collect();
        loop {
            let measure = (rows.len() * cols.len()) as f64 * h0 * h1;
            if rows.is_empty() || cols.is_empty() {
                break;
            }
            if trace.passes.len() == max_iter {
                trace.complete = cols
                    .iter()
                    .all(|&i| rows.iter().all(|&j| v[i * n1 + j] == 0.0));
                trace.final_measure = measure;
                break;
            }
            let e_h: Vec<f64> = rows
                .iter()
                .map(|&j| cols.iter().map(|&i| a[i * n1 + j]).sum::<f64>() * h0)
                .collect();
            let e_v: Vec<f64> = cols
                .iter()
                .map(|&i| rows.iter().map(|&j| a[i * n1 + j]).sum::<f64>() * h1)
                .collect();
            let row_in_a: Vec<bool> = e_h.iter().map(|&e| e <= tau).collect();
            for (r, &j) in rows.iter().enumerate() {
                for (c, &i) in cols.iter().enumerate() {
                    let k = i * n1 + j;
                    if v[k] == 0.0 {
                        continue;
                    }
                    if row_in_a[r] {
                        labels[k] = Some(0);
                    } else if e_v[c] <= tau {
                        labels[k] = Some(1);
                    }
                }
            }
            let next_rows: Vec<usize> =
                rows.iter().zip(&row_in_a).filter(|(_, &ina)| !ina).map(|(&j, _)| j).collect();
            let next_cols: Vec<usize> =
                cols.iter().zip(&e_v).filter(|(_, &e)| e > tau).map(|(&i, _)| i).collect();
            trace.passes.push(StripPass {
                measure,
                rows_kept: next_rows.len(),
                cols_kept: next_cols.len(),
            });
            rows = next_rows;
            cols = next_cols;
        }
    }
    let masks = masks_from_labels(g, &labels);
    let parts = parts_from_masks(f, &masks)?;
    let result = assemble(parts, masks, tau * w)?;
    Ok((result, trace))
}
