use serde::{Deserialize, Serialize};

use super::minimize::{minimize_flambda, residual_tv, VariationalConfig};
use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::norms::l2;
use crate::ops::discrete_divergence;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HierarchyMode {
    P2Geometric,
    P1Contraction,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HierarchyConfig {
    pub mode: HierarchyMode,
    /// Closure constant; estimated from a probe solve when absent (p = 2).
    pub eta: Option<f64>,
    /// Overrides `λ_1 = 2η/||f||` (p = 2) or the fixed `λ` (p = 1).
    pub lambda1: Option<f64>,
    pub max_levels: usize,
    /// Stop once `||r_j|| <= stop_residual ||f||`.
    pub stop_residual: f64,
    /// Assumed solution constant `γ` (p = 1 only).
    pub gamma_assumed: Option<f64>,
    /// Settings for every level's solve; `lambda` and `p` are overridden.
    pub solver: VariationalConfig,
}

impl HierarchyConfig {
    pub fn p2() -> Self {
        Self {
            mode: HierarchyMode::P2Geometric,
            eta: None,
            lambda1: None,
            max_levels: 20,
            stop_residual: 1e-3,
            gamma_assumed: None,
            solver: VariationalConfig::new(1.0, 2),
        }
    }

    pub fn p1(gamma: f64) -> Self {
        Self {
            mode: HierarchyMode::P1Contraction,
            gamma_assumed: Some(gamma),
            solver: VariationalConfig::new(1.0, 1),
            ..Self::p2()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.max_levels == 0 {
            return Err(Error::InvalidParameter("max_levels must be at least 1".into()));
        }
        if let Some(eta) = self.eta {
            if !(eta > 0.0 && eta.is_finite()) {
                return Err(Error::InvalidParameter(format!("eta = {eta} must be positive")));
            }
        }
        if let Some(l) = self.lambda1 {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::InvalidParameter(format!("lambda = {l} must be positive")));
            }
        }
        if !(self.stop_residual >= 0.0) {
            return Err(Error::InvalidParameter("stop_residual must be >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelRecord {
    pub level: usize,
    pub lambda: f64,
    pub u_linf: f64,
    pub residual_norm: f64,
    /// `|φ_2(r_j)|_TV`, the quantity in the closure bound.
    pub residual_tv: f64,
    /// `||r_j|| / ||r_{j-1}||`.
    pub ratio: f64,
    pub cumulative_linf: f64,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierarchyTrace {
    pub mode: HierarchyMode,
    pub f_norm: f64,
    /// `η` used for `λ_1` (p = 2).
    pub eta: Option<f64>,
    pub eta_estimated: bool,
    pub levels: Vec<LevelRecord>,
    /// Residual stalled (p = 2: ratio > 0.95 for 3 levels; p = 1: ratio
    /// >= 1 for 3 levels, meaning `λ` is too small).
    pub stagnated: bool,
    pub reached_target: bool,
}

impl HierarchyTrace {
    /// `max_j ||r_j|| / |φ_2(r_j)|_TV` over the recorded levels, plus the
    /// data itself.
    pub fn eta_measured(&self, f: &ScalarField) -> f64 {
        let mut eta = l2(f) / residual_tv(f, 2).max(f64::MIN_POSITIVE);
        for l in &self.levels {
            if l.residual_tv > 0.0 {
                eta = eta.max(l.residual_norm / l.residual_tv);
            }
        }
        eta
    }
}

const STALL_LEVELS: usize = 3;

/// Multiples of the trivial threshold `1/|φ_2(f)|_TV` used as probe `λ`s.
/// The closure ratio grows along the hierarchy as residuals get smoother,
/// so the probes reach deep into it.
pub const ETA_PROBES: [f64; 3] = [2.0, 32.0, 1024.0];

/// Closure constant estimate: twice the largest `||r|| / |φ_2(r)|_TV`
/// over probe solves at [`ETA_PROBES`] times the trivial threshold.
pub fn estimate_eta(f: &ScalarField, solver: &VariationalConfig) -> Result<f64> {
    let tv = residual_tv(f, 2);
    if tv == 0.0 {
        return Err(Error::ZeroField);
    }
    let mut best = l2(f) / tv;
    for m in ETA_PROBES {
        let cfg = VariationalConfig { lambda: m / tv, p: 2, ..*solver };
        let (_, r, rep) = minimize_flambda(f, &cfg)?;
        if rep.residual_tv > 0.0 {
            best = best.max(l2(&r) / rep.residual_tv);
        }
    }
    Ok(2.0 * best)
}

/// `λ_j = λ_1 2^{j-1}` multiscale solve with squared fidelity.
pub fn hierarchical_p2(f: &ScalarField, cfg: &HierarchyConfig) -> Result<(VectorField, HierarchyTrace)> {
    cfg.validate()?;
    let fnorm = l2(f);
    let mut trace = HierarchyTrace {
        mode: HierarchyMode::P2Geometric,
        f_norm: fnorm,
        eta: cfg.eta,
        eta_estimated: false,
        levels: Vec::new(),
        stagnated: false,
        reached_target: fnorm == 0.0,
    };
    if fnorm == 0.0 {
        return Ok((VectorField::zeros(f.grid()), trace));
    }
    let eta = match cfg.eta {
        Some(e) => e,
        None => {
            trace.eta_estimated = true;
            estimate_eta(f, &cfg.solver)?
        }
    };
    trace.eta = Some(eta);
    let lambda1 = cfg.lambda1.unwrap_or(2.0 * eta / fnorm);
    run_levels(f, cfg, 2, |j| lambda1 * 2f64.powi(j as i32 - 1), 0.95, trace)
}

/// Fixed-`λ` multiscale solve with linear fidelity; contracts by
/// `γ/λ` per level when every residual admits a solution with
/// `||u||_∞ <= γ ||r||`.
pub fn hierarchical_p1(f: &ScalarField, cfg: &HierarchyConfig) -> Result<(VectorField, HierarchyTrace)> {
    cfg.validate()?;
    let gamma = cfg
        .gamma_assumed
        .ok_or_else(|| Error::InvalidParameter("p = 1 needs gamma_assumed".into()))?;
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidParameter(format!("gamma = {gamma} must be positive")));
    }
    let lambda = cfg.lambda1.unwrap_or(2.0 * gamma);
    if lambda <= gamma {
        return Err(Error::InvalidParameter(format!(
            "lambda = {lambda} must exceed gamma = {gamma} for a contraction"
        )));
    }
    let fnorm = l2(f);
    let trace = HierarchyTrace {
        mode: HierarchyMode::P1Contraction,
        f_norm: fnorm,
        eta: None,
        eta_estimated: false,
        levels: Vec::new(),
        stagnated: false,
        reached_target: fnorm == 0.0,
    };
    if fnorm == 0.0 {
        return Ok((VectorField::zeros(f.grid()), trace));
    }
    run_levels(f, cfg, 1, |_| lambda, 1.0, trace)
}

fn run_levels(
    f: &ScalarField,
    cfg: &HierarchyConfig,
    p: u32,
    lambda_at: impl Fn(usize) -> f64,
    stall_ratio: f64,
    mut trace: HierarchyTrace,
) -> Result<(VectorField, HierarchyTrace)> {
    let fnorm = trace.f_norm;
    let mut total = VectorField::zeros(f.grid());
    let mut r = f.clone();
    let mut rnorm = fnorm;
    let mut stalled = 0;
    for level in 1..=cfg.max_levels {
        let lambda = lambda_at(level);
        let solver = VariationalConfig { lambda, p, ..cfg.solver };
        let (u, _, rep) = minimize_flambda(&r, &solver)?;
        // Telescoping residual, kept exactly as r_{j-1} - div u_j.
        let next = r.sub(&discrete_divergence(&u))?;
        let next_norm = l2(&next);
        total = total.add(&u)?;
        let ratio = next_norm / rnorm;
        trace.levels.push(LevelRecord {
            level,
            lambda,
            u_linf: u.linf(),
            residual_norm: next_norm,
            residual_tv: residual_tv(&next, 2),
            ratio,
            cumulative_linf: total.linf(),
            iterations: rep.iterations,
            converged: rep.converged,
        });
        r = next;
        rnorm = next_norm;
        if rnorm <= cfg.stop_residual * fnorm {
            trace.reached_target = true;
            break;
        }
        let stalling = if p == 2 { ratio > stall_ratio } else { ratio >= stall_ratio };
        stalled = if stalling { stalled + 1 } else { 0 };
        if stalled >= STALL_LEVELS {
            trace.stagnated = true;
            break;
        }
    }
    Ok((total, trace))
}
