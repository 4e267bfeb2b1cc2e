//! Generators for the concrete data sets.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{mean_zero, sample_function, ScalarField};
use crate::grid::Grid;
use crate::ops::laplacian;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "lowercase")]
pub enum RandomLaw {
    Gaussian,
    /// `count` cells of magnitude in `[amplitude, 2 amplitude)` over a
    /// background below `amplitude / 4`.
    Spikes { count: usize, amplitude: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ExampleSpec {
    Nirenberg { n: usize },
    Ball { alpha: f64, radius: f64, n: usize, half_width: f64 },
    Tatar { p: f64, levels: u32, n: usize },
    Random { seed: u64, n: usize, dim: usize, law: RandomLaw, periodic: bool },
}

pub const MIN_N: usize = 8;

impl ExampleSpec {
    /// Generates the field(s); Tatar yields `(f, g)`, the others one field.
    pub fn generate(&self) -> Result<Vec<ScalarField>> {
        match *self {
            ExampleSpec::Nirenberg { n } => Ok(vec![nirenberg_field(n)?]),
            ExampleSpec::Ball { alpha, radius, n, half_width } => {
                Ok(vec![ball_field(alpha, radius, n, half_width)?])
            }
            ExampleSpec::Tatar { p, levels, n } => {
                let (f, g) = tatar_pair(p, levels, n)?;
                Ok(vec![f, g])
            }
            ExampleSpec::Random { seed, n, dim, law, periodic } => {
                if n < MIN_N {
                    return Err(Error::InvalidParameter(format!("n = {n} below {MIN_N}")));
                }
                let grid = Grid::cube(dim, n, 0.0, 1.0, periodic)?;
                Ok(vec![random_field(seed, &grid, law)?])
            }
        }
    }
}

/// `v(x) = x_1 |log|x||^{1/3} exp(-1/(1-|x|^2))` inside the unit disk.
pub fn nirenberg_potential_at(x: &[f64]) -> f64 {
    let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
    if r <= 0.0 || r >= 1.0 {
        return 0.0;
    }
    x[0] * r.ln().abs().cbrt() * (-1.0 / (1.0 - r * r)).exp()
}

fn nirenberg_grid(n: usize) -> Result<Grid> {
    if n < 16 {
        return Err(Error::InvalidParameter(format!("nirenberg needs n >= 16, got {n}")));
    }
    Grid::cube(2, n, -1.0, 1.0, true)
}

/// The potential `v` on the periodic `n × n` grid over `[-1, 1]²`.
pub fn nirenberg_potential(n: usize) -> Result<ScalarField> {
    sample_function(&nirenberg_grid(n)?, nirenberg_potential_at)
}

/// Discrete Laplacian of the potential, projected to mean zero.
pub fn nirenberg_field(n: usize) -> Result<ScalarField> {
    Ok(mean_zero(&laplacian(&nirenberg_potential(n)?)))
}

/// `α χ_{|x| <= R}` on the periodic square `[-L, L]²` (center-in-ball).
pub fn ball_field(alpha: f64, radius: f64, n: usize, half_width: f64) -> Result<ScalarField> {
    if n < MIN_N {
        return Err(Error::InvalidParameter(format!("n = {n} below {MIN_N}")));
    }
    if !(radius > 0.0 && radius <= half_width) {
        return Err(Error::InvalidParameter(format!(
            "radius {radius} must lie in (0, {half_width}]"
        )));
    }
    if !alpha.is_finite() {
        return Err(Error::InvalidParameter("alpha must be finite".into()));
    }
    let grid = Grid::cube(2, n, -half_width, half_width, true)?;
    sample_function(&grid, |x| {
        if x[0] * x[0] + x[1] * x[1] <= radius * radius { alpha } else { 0.0 }
    })
}

/// `f(x) = x^{-1/p}` as exact cell averages and the dyadic sign pattern
/// `g = Σ_{k < levels} (-1)^k 2^{k/p} 1_{(2^{-k-1}, 2^{-k})}` on `(0, 1)`.
pub fn tatar_pair(p: f64, levels: u32, n: usize) -> Result<(ScalarField, ScalarField)> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!("tatar needs p > 1, got {p}")));
    }
    if levels < 4 {
        return Err(Error::InvalidParameter(format!("levels = {levels} below 4")));
    }
    let need = 1usize << (levels + 2).min(62);
    if n < need {
        return Err(Error::InvalidParameter(format!(
            "n = {n} too coarse for {levels} levels (need {need})"
        )));
    }
    let grid = Grid::new(&[n], &[0.0], &[1.0], &[false])?;
    let h = grid.spacing(0);
    let e = 1.0 - 1.0 / p;
    let f: Vec<f64> = (0..n)
        .map(|i| {
            let (a, b) = (i as f64 * h, (i + 1) as f64 * h);
            (b.powf(e) - a.powf(e)) / (e * h)
        })
        .collect();
    let g = sample_function(&grid, |x| {
        let x = x[0];
        for k in 0..levels {
            let (lo, hi) = (0.5f64.powi(k as i32 + 1), 0.5f64.powi(k as i32));
            if lo < x && x < hi {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                return sign * 2f64.powf(k as f64 / p);
            }
        }
        0.0
    })?;
    Ok((ScalarField::new(grid, f)?, g))
}

/// `ρ = 2^{-1+1/p}`, the ratio of consecutive dyadic integrals of `|g|`.
pub fn tatar_rho(p: f64) -> f64 {
    2f64.powf(-1.0 + 1.0 / p)
}

pub fn random_field(seed: u64, grid: &Grid, law: RandomLaw) -> Result<ScalarField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = grid.len();
    let values = match law {
        RandomLaw::Gaussian => (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect(),
        RandomLaw::Spikes { count, amplitude } => {
            if count > n {
                return Err(Error::InvalidParameter(format!("{count} spikes on {n} cells")));
            }
            if !(amplitude > 0.0 && amplitude.is_finite()) {
                return Err(Error::InvalidParameter("spike amplitude must be positive".into()));
            }
            let floor = 0.25 * amplitude;
            let mut v: Vec<f64> = (0..n).map(|_| floor * rng.random_range(-1.0..1.0)).collect();
            for i in sample(&mut rng, n, count) {
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                v[i] = sign * amplitude * (1.0 + rng.random::<f64>());
            }
            v
        }
    };
    ScalarField::new(grid.clone(), values)
}
