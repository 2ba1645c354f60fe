//! Empirical constants in the Caccioppoli-type estimates for negative powers
//! and for the logarithm, on a given nonnegative grid field.
//!
//! The field is extended by zero outside the grid box, so `E(u, phi)` is
//! `h^d phi . (A u)` with the assembled operator (tails included).

use nalgebra::DVector;
use serde::Serialize;

use super::EstimateError;
use crate::assumptions::BallSpec;
use crate::discretize::{sym_energy, CutoffProfile, DiscreteForm, PairSet};

/// Which bilinear form pairs `u` with the test function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "variant", rename_all = "kebab-case")]
pub enum AuditVariant {
    /// `E(u, phi)`.
    Primal,
    /// `E^(u, phi) = E(phi, u)`.
    Dual,
    /// `E^{K_a}(d, phi)` for a constant `d`; `u~` also carries
    /// `r^{(alpha - d/theta)/2} |d|`.
    DualExt { d: f64, theta: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaccioppoliReport {
    pub p: f64,
    pub eps: f64,
    pub variant: AuditVariant,
    /// `E^{K_s}_{B_{r+rho}}(tau u~^{(1-p)/2}, tau u~^{(1-p)/2})`.
    pub lhs: f64,
    /// Signed pairing with `-tau^2 u~^{-p}`.
    pub t1: f64,
    /// `rho^{-alpha} ||u~^{1-p}||_{L^1(B_{r+rho})}`.
    pub t2: f64,
    /// `1 v |p-1|` (primal) or `1 v p^gamma` (dual variants).
    pub weight: f64,
    /// `lhs / (|p-1| max(t1, 0) + weight t2)`.
    pub c_hat: f64,
    /// Dual-ext only: smallest `delta` with `-delta lhs <= |p-1| t1 + weight t2`.
    pub delta_needed: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogCaccioppoliReport {
    pub eps: f64,
    pub variant: AuditVariant,
    /// `sum min(tau_i^2, tau_j^2) (log(u~_i/tau_i) - log(u~_j/tau_j))^2 K^s_ij h^{2d}`.
    pub lhs: f64,
    pub t1: f64,
    /// `rho^{-alpha} |B_{r+rho}|` (lattice measure).
    pub t2: f64,
    /// `lhs / (max(t1, 0) + t2)`.
    pub c_hat: f64,
    /// `(lhs - t1) / t2`: the constant `c_2` needed with `c_1 = 1`.
    pub c2_needed: f64,
}

struct Setup {
    tau: Vec<f64>,
    mask: Vec<bool>,
    ut: Vec<f64>,
}

fn setup(u: &[f64], form: &DiscreteForm, alpha: f64, ball: &BallSpec, eps: f64, variant: AuditVariant) -> Result<Setup, EstimateError> {
    let g = form.grid();
    if u.len() != g.len() {
        return Err(EstimateError::Parameter(format!("field has {} values, grid has {}", u.len(), g.len())));
    }
    if !(eps > 0.0) {
        return Err(EstimateError::NotPositive("eps", eps));
    }
    let shift = match variant {
        AuditVariant::DualExt { d, theta } => {
            if !(theta > g.d() as f64 / alpha) {
                return Err(EstimateError::Parameter(format!("theta = {theta} must exceed d/alpha")));
            }
            ball.r.powf(0.5 * (alpha - g.d() as f64 / theta)) * d.abs()
        }
        _ => 0.0,
    };
    let ut: Vec<f64> = u.iter().map(|v| v + eps + shift).collect();
    if let Some(bad) = ut.iter().copied().find(|v| !(*v > 0.0)) {
        return Err(EstimateError::NotPositive("u + eps", bad));
    }
    let tau = CutoffProfile::new(ball.center, ball.r, 0.5 * ball.rho).sample(g);
    let mask = g.ball_mask(&ball.center, ball.r + ball.rho);
    Ok(Setup { tau, mask, ut })
}

/// Pairing of `u` with the test function `phi` in the chosen form.
fn pairing(form: &DiscreteForm, u: &[f64], phi: &[f64], variant: AuditVariant) -> f64 {
    let hd = form.grid().cell_volume();
    let (u, phi) = (DVector::from_column_slice(u), DVector::from_column_slice(phi));
    match variant {
        AuditVariant::Primal => hd * phi.dot(&form.apply(&u)),
        AuditVariant::Dual => hd * u.dot(&form.apply(&phi)),
        AuditVariant::DualExt { d, .. } => hd * 2.0 * d * phi.dot(form.drift_diag()),
    }
}

/// Caccioppoli audit for `p != 1`, `p >= 1 - 1/kappa`.
#[allow(clippy::too_many_arguments)]
pub fn caccioppoli_audit(
    u: &[f64],
    form: &DiscreteForm,
    alpha: f64,
    ball: &BallSpec,
    p: f64,
    eps: f64,
    variant: AuditVariant,
    gamma: f64,
) -> Result<CaccioppoliReport, EstimateError> {
    let d = form.grid().d() as f64;
    let p_min = alpha / (d + alpha);
    if !(p >= p_min - 1e-15) || p == 1.0 || !p.is_finite() {
        return Err(EstimateError::Parameter(format!("p = {p} must satisfy p >= {p_min}, p != 1")));
    }
    if !(gamma >= 1.0) {
        return Err(EstimateError::Parameter(format!("gamma = {gamma} must be at least 1")));
    }
    let s = setup(u, form, alpha, ball, eps, variant)?;
    let hd = form.grid().cell_volume();
    let w: Vec<f64> = s.tau.iter().zip(&s.ut).map(|(t, v)| t * v.powf(0.5 * (1.0 - p))).collect();
    let lhs = sym_energy(form, &PairSet::square(s.mask.clone()), &w, &w);
    let phi: Vec<f64> = s.tau.iter().zip(&s.ut).map(|(t, v)| -t * t * v.powf(-p)).collect();
    let t1 = pairing(form, u, &phi, variant);
    let l1: f64 = s.ut.iter().zip(&s.mask).filter(|(_, &m)| m).map(|(v, _)| v.powf(1.0 - p)).sum::<f64>() * hd;
    let t2 = ball.rho.powf(-alpha) * l1;
    let weight = match variant {
        AuditVariant::Primal => (p - 1.0).abs().max(1.0),
        _ => p.powf(gamma).max(1.0),
    };
    let c_hat = lhs / ((p - 1.0).abs() * t1.max(0.0) + weight * t2);
    let delta_needed = match variant {
        AuditVariant::DualExt { .. } => {
            let rhs = (p - 1.0).abs() * t1 + weight * t2;
            Some(if lhs > 0.0 { (-rhs / lhs).max(0.0) } else { 0.0 })
        }
        _ => None,
    };
    Ok(CaccioppoliReport { p, eps, variant, lhs, t1, t2, weight, c_hat, delta_needed })
}

/// Logarithmic Caccioppoli audit (`p = 1`).
pub fn log_caccioppoli_audit(
    u: &[f64],
    form: &DiscreteForm,
    alpha: f64,
    ball: &BallSpec,
    eps: f64,
    variant: AuditVariant,
) -> Result<LogCaccioppoliReport, EstimateError> {
    let s = setup(u, form, alpha, ball, eps, variant)?;
    let g = form.grid();
    let n = g.len();
    let w2 = g.cell_volume().powi(2);
    let lv: Vec<f64> = (0..n).map(|i| if s.tau[i] > 0.0 { (s.ut[i] / s.tau[i]).ln() } else { 0.0 }).collect();
    let mut lhs = 0.0;
    for i in (0..n).filter(|&i| s.mask[i] && s.tau[i] > 0.0) {
        for j in (0..n).filter(|&j| j != i && s.mask[j] && s.tau[j] > 0.0) {
            lhs += (s.tau[i] * s.tau[i]).min(s.tau[j] * s.tau[j]) * (lv[i] - lv[j]).powi(2) * form.k_sym(i, j);
        }
    }
    lhs *= w2;
    let phi: Vec<f64> = s.tau.iter().zip(&s.ut).map(|(t, v)| -t * t / v).collect();
    let t1 = pairing(form, u, &phi, variant);
    let vol = s.mask.iter().filter(|&&m| m).count() as f64 * g.cell_volume();
    let t2 = ball.rho.powf(-alpha) * vol;
    Ok(LogCaccioppoliReport {
        eps,
        variant,
        lhs,
        t1,
        t2,
        c_hat: lhs / (t1.max(0.0) + t2),
        c2_needed: (lhs - t1) / t2,
    })
}
