use std::f64::consts::PI;

use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::fft::{backward_symbols, signed_frequency, FftNd};
use crate::error::{Error, Result};
use crate::field::{mean_zero, ScalarField, VectorField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HelmholtzSymbol {
    /// Symbols of the grid difference operators; `div u = f` exactly.
    #[default]
    Discrete,
    /// `-i k / |k|^2`, Nyquist modes dropped.
    Continuum,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct HelmholtzOptions {
    pub symbol: HelmholtzSymbol,
    /// Reject data with nonzero mean instead of projecting it out.
    pub strict_mean_zero: bool,
}

/// Relative size of a mean treated as zero.
pub(crate) const MEAN_TOL: f64 = 1e-10;

pub(crate) fn check_mean_zero(f: &ScalarField) -> Result<()> {
    let m = f.mean();
    if m.abs() > MEAN_TOL * f.max_abs().max(f64::MIN_POSITIVE) {
        return Err(Error::NotMeanZero(m));
    }
    Ok(())
}

/// Helmholtz solution `u = ∇Δ^{-1} f` on a periodic grid, discrete symbol.
pub fn helmholtz_solve(f: &ScalarField) -> Result<VectorField> {
    helmholtz_solve_with(f, HelmholtzOptions::default())
}

pub fn helmholtz_solve_with(f: &ScalarField, opts: HelmholtzOptions) -> Result<VectorField> {
    let grid = f.grid();
    if !grid.all_periodic() {
        return Err(Error::NotPeriodic);
    }
    let data = if opts.strict_mean_zero {
        check_mean_zero(f)?;
        f.clone()
    } else {
        mean_zero(f)
    };
    let d = grid.dim();
    let shape = grid.shape().to_vec();
    let mut fft = FftNd::new(grid);
    let fh = fft.forward_real(data.values());
    // Per-axis multipliers m_a(k) with û_a = m_a(k_a) / s(k) · f̂ where
    // s(k) = Σ_a w_a(k_a) is the Laplacian symbol.
    let (mult, lap): (Vec<Vec<Complex64>>, Vec<Vec<f64>>) = match opts.symbol {
        HelmholtzSymbol::Discrete => {
            // forward-gradient symbol (e^{iθ} - 1)/h = -conj(backward symbol)
            let back = backward_symbols(grid);
            let m: Vec<Vec<Complex64>> = back.iter().map(|b| b.iter().map(|z| -z.conj()).collect()).collect();
            let w = back.iter().map(|b| b.iter().map(|z| -z.norm_sqr()).collect()).collect();
            (m, w)
        }
        HelmholtzSymbol::Continuum => {
            let mut m = Vec::with_capacity(d);
            let mut w = Vec::with_capacity(d);
            for a in 0..d {
                let n = shape[a];
                let len = grid.hi()[a] - grid.lo()[a];
                let nyquist = n.is_multiple_of(2);
                let ks: Vec<f64> = (0..n)
                    .map(|k| 2.0 * PI * signed_frequency(k, n) as f64 / len)
                    .collect();
                m.push(
                    (0..n)
                        .map(|k| {
                            if nyquist && k == n / 2 {
                                Complex64::new(0.0, 0.0)
                            } else {
                                Complex64::new(0.0, ks[k])
                            }
                        })
                        .collect(),
                );
                w.push(ks.iter().map(|k| -k * k).collect());
            }
            (m, w)
        }
    };
    let strides = grid.strides();
    let mut comps = Vec::with_capacity(d);
    for a in 0..d {
        let mut spec = vec![Complex64::default(); fh.len()];
        for (i, s) in spec.iter_mut().enumerate() {
            let mut lapk = 0.0;
            let mut ka = 0;
            for b in 0..d {
                let k = (i / strides[b]) % shape[b];
                lapk += lap[b][k];
                if b == a {
                    ka = k;
                }
            }
            if lapk != 0.0 {
                *s = mult[a][ka] * fh[i] / lapk;
            }
        }
        let mut out = vec![0.0; fh.len()];
        fft.inverse_real(spec, &mut out);
        comps.push(ScalarField::new(grid.clone(), out)?);
    }
    VectorField::new(comps)
}
