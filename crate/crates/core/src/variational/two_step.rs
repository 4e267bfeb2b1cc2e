use serde::{Deserialize, Serialize};

use super::minimize::{minimize_flambda, SolverReport, VariationalConfig};
use super::spectral::{check_mean_zero, helmholtz_solve};
use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::norms::l2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoStepReport {
    pub solver: SolverReport,
    /// `||u_1||_∞` of the minimizer.
    pub u1_linf: f64,
    /// `||u_2||_∞` of the Helmholtz correction.
    pub u2_linf: f64,
    /// `||u_1 + u_2||_∞ / ||f||_2`.
    pub ratio: f64,
}

/// Minimizer at `λ = 1/||f||_2` followed by the Helmholtz solution of its
/// residual; `div u = f` up to rounding.
pub fn two_step(f: &ScalarField) -> Result<(VectorField, TwoStepReport)> {
    two_step_with(f, VariationalConfig::new(1.0, 2))
}

/// As [`two_step`], taking solver settings from `base` (its `lambda` and `p`
/// are overridden).
pub fn two_step_with(f: &ScalarField, base: VariationalConfig) -> Result<(VectorField, TwoStepReport)> {
    let grid = f.grid();
    if grid.dim() != 2 {
        return Err(Error::Dimension { expected: "2".into(), found: grid.dim() });
    }
    if !grid.all_periodic() {
        return Err(Error::NotPeriodic);
    }
    check_mean_zero(f)?;
    let fnorm = l2(f);
    if fnorm == 0.0 {
        let solver = SolverReport {
            lambda: 0.0,
            p: 2,
            iterations: 0,
            objective: 0.0,
            objective_zero: 0.0,
            objective_history: vec![0.0],
            u_linf: 0.0,
            residual_norm: 0.0,
            residual_tv: 0.0,
            certificate: 0.0,
            converged: true,
            trivial: true,
        };
        let report = TwoStepReport { solver, u1_linf: 0.0, u2_linf: 0.0, ratio: 0.0 };
        return Ok((VectorField::zeros(grid), report));
    }
    let cfg = VariationalConfig { lambda: 1.0 / fnorm, p: 2, ..base };
    let (u1, r1, solver) = minimize_flambda(f, &cfg)?;
    let u2 = helmholtz_solve(&r1)?;
    let u = u1.add(&u2)?;
    let report = TwoStepReport {
        u1_linf: u1.linf(),
        u2_linf: u2.linf(),
        ratio: u.linf() / fnorm,
        solver,
    };
    Ok((u, report))
}
