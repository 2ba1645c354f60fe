//! (K1) for time-modulated kernels: the spatial norm at each time, then an
//! `L^mu` norm in time.

use serde::{Deserialize, Serialize};

use super::{k1_profile, AssumptionError, AssumptionReport, BallSpec, Comparison};
use crate::discretize::Grid;
use crate::kernels::TimeKernel;
use crate::quadrature::PolarRule;

/// `steps + 1` equispaced times on `[t0, t1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeLattice {
    pub t0: f64,
    pub t1: f64,
    pub steps: usize,
}

impl TimeLattice {
    pub fn times(&self) -> Vec<f64> {
        let n = self.steps.max(1);
        (0..=n).map(|k| self.t0 + (self.t1 - self.t0) * k as f64 / n as f64).collect()
    }

    fn weight(&self) -> f64 {
        (self.t1 - self.t0) / self.steps.max(1) as f64
    }
}

/// The modulation is separable, so the spatial weight at time `t` is the
/// frozen weight times `s(t)^2 / a(t)` (against `K_s(t)`) or `s(t)^2`
/// (against a fixed `J`). Only the base kernel is integrated.
pub fn k1_time_profile(
    tk: &TimeKernel,
    cmp: &Comparison,
    ball: &BallSpec,
    theta: f64,
    mu: f64,
    lattice: &TimeLattice,
    grid: &Grid,
    rule: &PolarRule,
) -> Result<AssumptionReport, AssumptionError> {
    if !(mu >= 1.0) {
        return Err(AssumptionError::Parameter(format!("mu = {mu} must be at least 1")));
    }
    if !(lattice.t1 > lattice.t0) {
        return Err(AssumptionError::Parameter("empty time window".into()));
    }
    let mut rep = k1_profile(tk.base(), cmp, ball, theta, grid, rule)?;
    rep.assumption = "K1time".into();
    rep.mu = Some(mu);
    let base = rep.get("weight-norm").expect("set by k1_profile");
    let profile: Vec<f64> = lattice
        .times()
        .iter()
        .map(|&t| {
            let (a, s) = tk.factors(t);
            let f = match cmp {
                Comparison::SymmetricPart => s * s / a,
                Comparison::Kernel(_) => s * s,
            };
            if base == 0.0 {
                0.0
            } else {
                f * base
            }
        })
        .collect();
    let n = if mu.is_infinite() {
        profile.iter().copied().fold(0.0, f64::max)
    } else {
        let w = lattice.weight();
        // trapezoid weights in time
        let last = profile.len() - 1;
        profile
            .iter()
            .enumerate()
            .map(|(k, v)| v.powf(mu) * if k == 0 || k == last { 0.5 * w } else { w })
            .sum::<f64>()
            .powf(1.0 / mu)
    };
    rep.set("time-norm", n);
    rep.note(format!("{} time samples on [{}, {}]", profile.len(), lattice.t0, lattice.t1));
    Ok(rep)
}
