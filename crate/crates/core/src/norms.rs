use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::ScalarField;
use crate::grid::Grid;
use crate::sum::{pairwise_sum, pairwise_sum_map};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TvVariant {
    Isotropic,
    Anisotropic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NormKind {
    Lp { p: f64 },
    Lorentz { p: f64, q: f64 },
    WeakLpSet { p: f64 },
    Morrey,
    Tv { variant: TvVariant },
    Linf,
}

impl NormKind {
    pub fn label(&self) -> String {
        match self {
            NormKind::Lp { p } => format!("L{p}"),
            NormKind::Lorentz { p, q } => format!("L({p},{q})"),
            NormKind::WeakLpSet { p } => format!("L({p},inf)"),
            NormKind::Morrey => "morrey".into(),
            NormKind::Tv { variant: TvVariant::Isotropic } => "tv_iso".into(),
            NormKind::Tv { variant: TvVariant::Anisotropic } => "tv_aniso".into(),
            NormKind::Linf => "Linf".into(),
        }
    }
}

pub fn norm(f: &ScalarField, kind: NormKind) -> Result<f64> {
    match kind {
        NormKind::Lp { p } => lp_norm(f, p),
        NormKind::Lorentz { p, q } => lorentz_norm(f, p, q),
        NormKind::WeakLpSet { p } => weak_lp_setnorm(f, p),
        NormKind::Morrey => morrey_norm(f, f.grid().dim()),
        NormKind::Tv { variant } => Ok(tv_norm(f, variant)),
        NormKind::Linf => Ok(f.max_abs()),
    }
}

/// `(sum |f|^p * cellvol)^(1/p)`; `p = inf` gives the max.
pub fn lp_norm(f: &ScalarField, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidParameter(format!("p = {p} must be >= 1")));
    }
    let m = f.max_abs();
    if p.is_infinite() || m == 0.0 {
        return Ok(m);
    }
    let cv = f.grid().cell_volume();
    let s = if p == 2.0 {
        pairwise_sum_map(f.values(), |v| (v / m) * (v / m))
    } else if p == 1.0 {
        pairwise_sum_map(f.values(), |v| (v / m).abs())
    } else {
        pairwise_sum_map(f.values(), |v| (v / m).abs().powf(p))
    };
    Ok(m * (s * cv).powf(1.0 / p))
}

/// Shorthand for the L² norm, used all over the solvers.
pub fn l2(f: &ScalarField) -> f64 {
    lp_norm(f, 2.0).expect("p = 2 is valid")
}

fn sorted_magnitudes(f: &ScalarField) -> Vec<f64> {
    let mut a: Vec<f64> = f.values().iter().map(|v| v.abs()).filter(|&v| v > 0.0).collect();
    a.sort_by(|x, y| y.total_cmp(x));
    a
}

/// `k^s - (k-1)^s` without cancellation for large `k`.
fn power_increment(k: f64, s: f64) -> f64 {
    if k == 1.0 {
        return 1.0;
    }
    -k.powf(s) * (s * (-1.0 / k).ln_1p()).exp_m1()
}

/// Lorentz quasi-norm via the decreasing rearrangement, integrated exactly
/// over the steps of `f*`.
pub fn lorentz_norm(f: &ScalarField, p: f64, q: f64) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!("Lorentz p = {p} must be finite and >= 1")));
    }
    if q.is_infinite() {
        return Err(Error::InvalidParameter(
            "q = inf: use the weak-Lp set norm".into(),
        ));
    }
    if !(q >= 1.0) {
        return Err(Error::InvalidParameter(format!("Lorentz q = {q} must be >= 1")));
    }
    let a = sorted_magnitudes(f);
    let Some(&m) = a.first() else {
        return Ok(0.0);
    };
    let cv = f.grid().cell_volume();
    let s = q / p;
    let terms: Vec<f64> = a
        .iter()
        .enumerate()
        .map(|(k, &v)| (v / m).powf(q) * power_increment(k as f64 + 1.0, s))
        .collect();
    let total = pairwise_sum(&terms) * (p / q) * cv.powf(s);
    Ok(m * total.powf(1.0 / q))
}

/// `sup_E |E|^{-(p-1)/p} ∫_E |f|` over unions of cells, attained on
/// super-level sets.
pub fn weak_lp_setnorm(f: &ScalarField, p: f64) -> Result<f64> {
    if !(p > 1.0) {
        return Err(Error::InvalidParameter(format!("weak-Lp needs p > 1, got {p}")));
    }
    let a = sorted_magnitudes(f);
    let cv = f.grid().cell_volume();
    let e = (p - 1.0) / p;
    let mut best = 0.0f64;
    let mut acc = 0.0;
    for (k, v) in a.iter().enumerate() {
        acc += v;
        let val = acc * cv / ((k as f64 + 1.0) * cv).powf(e);
        best = best.max(val);
    }
    Ok(best)
}

/// Distance along one axis, wrapping on periodic axes.
fn axis_distance(grid: &Grid, axis: usize, a: usize, b: usize) -> f64 {
    let n = grid.shape()[axis];
    let mut k = a.abs_diff(b);
    if grid.is_periodic(axis) {
        k = k.min(n - k);
    }
    k as f64 * grid.spacing(axis)
}

/// Morrey norm restricted to balls centered at cell centers with radii
/// `j * min(h)`. A lower bound for the continuum supremum. Cost is
/// quadratic in the number of cells.
pub fn morrey_norm(f: &ScalarField, dim: usize) -> Result<f64> {
    let grid = f.grid();
    if dim != grid.dim() {
        return Err(Error::Dimension { expected: grid.dim().to_string(), found: dim });
    }
    if f.is_zero() {
        return Ok(0.0);
    }
    let d = grid.dim();
    let hmin = grid.min_spacing();
    let cv = grid.cell_volume();
    let idx: Vec<Vec<usize>> = (0..grid.len()).map(|i| grid.unravel(i)).collect();
    let abs: Vec<f64> = f.values().iter().map(|v| v.abs()).collect();
    // Largest radius ever needed: the one that swallows the whole box.
    let reach: f64 = (0..d)
        .map(|a| {
            let n = grid.shape()[a];
            let far = if grid.is_periodic(a) { n / 2 } else { n - 1 };
            let l = far as f64 * grid.spacing(a);
            l * l
        })
        .sum::<f64>()
        .sqrt();
    let jmax = (reach / hmin).ceil() as usize + 1;
    let mut bins = vec![0.0; jmax + 1];
    let mut best = 0.0f64;
    for c in &idx {
        bins.iter_mut().for_each(|b| *b = 0.0);
        for (cell, &v) in idx.iter().zip(&abs) {
            if v == 0.0 {
                continue;
            }
            let r2: f64 = (0..d)
                .map(|a| {
                    let t = axis_distance(grid, a, c[a], cell[a]);
                    t * t
                })
                .sum();
            let j = ((r2.sqrt() / hmin) * (1.0 - 1e-12)).ceil().max(1.0) as usize;
            bins[j.min(jmax)] += v;
        }
        let mut acc = 0.0;
        for (j, b) in bins.iter().enumerate().skip(1) {
            acc += b;
            let r = j as f64 * hmin;
            best = best.max(acc * cv * r.powi(1 - d as i32));
        }
    }
    Ok(best)
}

/// Per-axis differences used by the total variation; on bounded axes the
/// difference across the upper wall is dropped.
fn tv_differences(g: &ScalarField, axis: usize) -> Vec<f64> {
    let grid = g.grid();
    let n = grid.shape()[axis];
    let s = grid.stride(axis);
    let inv_h = 1.0 / grid.spacing(axis);
    let v = g.values();
    let mut out = vec![0.0; v.len()];
    for start in grid.line_starts(axis) {
        for k in 0..n {
            let i = start + k * s;
            let next = if k + 1 < n {
                v[i + s]
            } else if grid.is_periodic(axis) {
                v[start]
            } else {
                v[i]
            };
            out[i] = (next - v[i]) * inv_h;
        }
    }
    out
}

pub fn tv_norm(g: &ScalarField, variant: TvVariant) -> f64 {
    let grid = g.grid();
    let cv = grid.cell_volume();
    let diffs: Vec<Vec<f64>> = (0..grid.dim()).map(|a| tv_differences(g, a)).collect();
    let pointwise: Vec<f64> = (0..grid.len())
        .map(|i| match variant {
            TvVariant::Anisotropic => diffs.iter().map(|d| d[i].abs()).sum(),
            TvVariant::Isotropic => diffs.iter().map(|d| d[i] * d[i]).sum::<f64>().sqrt(),
        })
        .collect();
    pairwise_sum(&pointwise) * cv
}

/// Derivative of `v -> ||v||_2^p`: `p ||v||^(p-2) v`.
pub fn frechet_derivative(v: &ScalarField, p: f64) -> Result<ScalarField> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!("p = {p} must be finite and >= 1")));
    }
    let n = l2(v);
    if n == 0.0 {
        return Err(Error::ZeroField);
    }
    let c = if p == 2.0 { 2.0 } else { p * n.powf(p - 2.0) };
    v.scale(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square(n: usize) -> Grid {
        Grid::cube(2, n, 0.0, 1.0, false).unwrap()
    }

    #[test]
    fn lp_of_ones_and_zero() {
        for n in [2, 5, 16] {
            let one = ScalarField::constant(&unit_square(n), 1.0).unwrap();
            for p in [1.0, 2.0, 3.5, f64::INFINITY] {
                assert!((lp_norm(&one, p).unwrap() - 1.0).abs() < 1e-14);
            }
        }
        assert_eq!(lp_norm(&ScalarField::zeros(&unit_square(3)), 2.0).unwrap(), 0.0);
        assert!(lp_norm(&ScalarField::zeros(&unit_square(3)), 0.5).is_err());
    }

    #[test]
    fn lorentz_of_indicator() {
        let g = unit_square(8);
        let mut v = vec![0.0; 64];
        for x in v.iter_mut().take(10) {
            *x = 1.0;
        }
        let f = ScalarField::new(g, v).unwrap();
        let m = 10.0 / 64.0;
        for (p, q) in [(2.0, 1.0), (3.0, 2.0), (2.0, 5.0)] {
            let expect = f64::powf(p / q, 1.0 / q) * f64::powf(m, 1.0 / p);
            let got = lorentz_norm(&f, p, q).unwrap();
            assert!((got - expect).abs() < 1e-13 * expect, "{p} {q}: {got} vs {expect}");
        }
        assert!(lorentz_norm(&f, 2.0, f64::INFINITY).is_err());
    }

    #[test]
    fn weak_of_indicator() {
        let g = unit_square(8);
        let v: Vec<f64> = (0..64).map(|i| if i % 3 == 0 { 1.0 } else { 0.0 }).collect();
        let count = v.iter().filter(|&&x| x == 1.0).count() as f64;
        let f = ScalarField::new(g, v).unwrap();
        let got = weak_lp_setnorm(&f, 2.0).unwrap();
        assert!((got - (count / 64.0).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn morrey_single_cell() {
        let g = unit_square(6);
        let mut v = vec![0.0; 36];
        v[14] = 2.0;
        let f = ScalarField::new(g.clone(), v).unwrap();
        let expect = 2.0 * g.cell_volume() / g.min_spacing();
        assert!((morrey_norm(&f, 2).unwrap() - expect).abs() < 1e-14);
        assert!(morrey_norm(&f, 3).is_err());
    }

    #[test]
    fn tv_constant_and_rectangle() {
        for periodic in [false, true] {
            let g = Grid::cube(2, 10, 0.0, 1.0, periodic).unwrap();
            let c = ScalarField::constant(&g, 4.0).unwrap();
            assert_eq!(tv_norm(&c, TvVariant::Anisotropic), 0.0);
            assert_eq!(tv_norm(&c, TvVariant::Isotropic), 0.0);
            // rows 2..5 (a = 0.3), columns 1..8 (b = 0.7)
            let r = crate::field::sample_function(&g, |x| {
                if (0.2..0.5).contains(&x[0]) && (0.1..0.8).contains(&x[1]) { 1.0 } else { 0.0 }
            })
            .unwrap();
            assert!((tv_norm(&r, TvVariant::Anisotropic) - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn frechet_cases() {
        let g = unit_square(3);
        let v = ScalarField::new(g.clone(), (0..9).map(|i| i as f64 - 3.0).collect()).unwrap();
        assert_eq!(frechet_derivative(&v, 2.0).unwrap(), v.scale(2.0).unwrap());
        let u = v.scale(1.0 / l2(&v)).unwrap();
        let d3 = frechet_derivative(&u, 3.0).unwrap();
        for (a, b) in d3.values().iter().zip(u.values()) {
            assert!((a - 3.0 * b).abs() < 1e-14);
        }
        assert!(matches!(
            frechet_derivative(&ScalarField::zeros(&g), 2.0),
            Err(Error::ZeroField)
        ));
    }
}
