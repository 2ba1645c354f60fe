//! Numerical checks of the structural kernel assumptions on concrete balls.
//!
//! Every checker returns an [`AssumptionReport`] that records the measured
//! constants, the exponents used and the resolution, so reruns compare.

mod integrals;
mod spectral;
mod time;

pub use integrals::{
    cp_check, cutoff_profile, cutoff_sup, good_set_fraction, good_set_fraction_at, k1_glob_profile,
    k1_profile, k1_weight_at, k2_coefficient_d, suff_k1_check, tail_profile, tail_sup, Comparison,
    CutoffProfileFit, SuffK1Branch, TailProfile,
};
pub use spectral::{
    coercivity_ratio, domination_ratio, poincare_constant, sobolev_ratio, SobolevFamily, SobolevReport,
};
pub use time::{k1_time_profile, TimeLattice};

pub(crate) use integrals::least_squares;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::discretize::{DiscretizeError, Domain};
use crate::geometry::{dist, Point};
use crate::kernels::KernelError;
use crate::linalg::LinalgError;
use crate::quadrature::{PolarRule, QuadratureError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AssumptionError {
    #[error("invalid ball: {0}")]
    Ball(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("comparison kernel vanishes where K_a does not, at x = {x:?}, h = {h:?}")]
    Comparison { x: Point, h: Point },
    #[error("mass matrix is singular on the ball")]
    SingularMass,
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Discretize(#[from] DiscretizeError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Ball `B_r(z)` with a scale pair `(r, rho)` inside the domain `Omega`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BallSpec {
    pub center: Point,
    pub r: f64,
    pub rho: f64,
    pub domain: Domain,
}

impl BallSpec {
    /// Checks `0 < rho <= r <= 1` and `B_{2r}(z) ⊂ Omega`.
    pub fn new(center: Point, r: f64, rho: f64, domain: Domain, d: usize) -> Result<Self, AssumptionError> {
        let b = Self { center, r, rho, domain };
        b.validate(d)?;
        Ok(b)
    }

    pub fn validate(&self, d: usize) -> Result<(), AssumptionError> {
        if !(self.rho > 0.0 && self.rho <= self.r && self.r <= 1.0) {
            return Err(AssumptionError::Ball(format!(
                "need 0 < rho <= r <= 1, got r = {}, rho = {}",
                self.r, self.rho
            )));
        }
        let two_r = 2.0 * self.r;
        let inside = match self.domain {
            Domain::Box { center, half_width } => {
                (0..d).all(|k| (self.center[k] - center[k]).abs() + two_r <= half_width + 1e-12)
            }
            Domain::Ball { center, radius } => dist(&self.center, &center) + two_r <= radius + 1e-12,
        };
        if !inside {
            return Err(AssumptionError::Ball(format!("B_2r({:?}) with r = {} leaves the domain", self.center, self.r)));
        }
        Ok(())
    }
}

/// Outcome of a check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    /// Finite constant, no threshold given.
    Finite,
    /// An integral or norm diverges.
    Divergent,
    Pass,
    Fail,
}

/// Resolution of a report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Resolution {
    pub h: Option<f64>,
    pub lattice_points: usize,
    pub levels: Option<usize>,
    pub gauss_order: Option<usize>,
    pub n_theta: Option<usize>,
}

impl Resolution {
    pub fn lattice(h: f64, points: usize) -> Self {
        Self { h: Some(h), lattice_points: points, levels: None, gauss_order: None, n_theta: None }
    }

    pub fn with_rule(mut self, rule: &PolarRule) -> Self {
        self.levels = Some(rule.levels);
        self.gauss_order = Some(rule.gauss_order);
        self.n_theta = Some(rule.n_theta);
        self
    }
}

/// Measured constants for one assumption.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionReport {
    pub assumption: String,
    /// Named constants; `None` serializes divergent values.
    pub constants: BTreeMap<String, Option<f64>>,
    pub theta: Option<f64>,
    pub mu: Option<f64>,
    /// `1 + alpha / d`, kept for Moser-exponent bookkeeping.
    pub kappa: f64,
    pub resolution: Resolution,
    pub verdict: Verdict,
    pub threshold: Option<f64>,
    pub notes: Vec<String>,
}

impl AssumptionReport {
    pub fn new(assumption: &str, d: usize, alpha: f64, resolution: Resolution) -> Self {
        Self {
            assumption: assumption.to_string(),
            constants: BTreeMap::new(),
            theta: None,
            mu: None,
            kappa: 1.0 + alpha / d as f64,
            resolution,
            verdict: Verdict::Finite,
            threshold: None,
            notes: Vec::new(),
        }
    }

    /// Records a constant; non-finite values mark the report divergent.
    pub fn set(&mut self, name: &str, value: f64) {
        if value.is_finite() {
            self.constants.insert(name.to_string(), Some(value));
        } else {
            self.constants.insert(name.to_string(), None);
            self.verdict = Verdict::Divergent;
        }
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        match self.constants.get(name) {
            Some(Some(v)) => Some(*v),
            Some(None) => Some(f64::INFINITY),
            None => None,
        }
    }

    pub fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }

    /// Compares every finite constant against `threshold`.
    pub fn judge(mut self, threshold: Option<f64>) -> Self {
        self.threshold = threshold;
        if let Some(t) = threshold {
            if self.verdict != Verdict::Divergent {
                let ok = self.constants.values().all(|v| v.map(|x| x <= t).unwrap_or(false));
                self.verdict = if ok { Verdict::Pass } else { Verdict::Fail };
            } else {
                self.verdict = Verdict::Fail;
            }
        }
        self
    }

    pub fn is_finite(&self) -> bool {
        self.verdict != Verdict::Divergent
    }
}

/// Divergent integrals become `inf`; other quadrature failures are errors.
pub(crate) fn or_divergent<T>(r: Result<T, QuadratureError>, inf: T) -> Result<(T, bool), AssumptionError> {
    match r {
        Ok(v) => Ok((v, false)),
        Err(QuadratureError::DivergentOrigin { .. } | QuadratureError::DivergentInfinity { .. }) => Ok((inf, true)),
        Err(e) => Err(AssumptionError::Parameter(e.to_string())),
    }
}

/// `(sum_i |w_i|^theta h^d)^(1/theta)`, or the max for `theta = inf`.
pub fn lattice_norm(values: &[f64], cell: f64, theta: f64) -> f64 {
    if values.iter().any(|v| !v.is_finite()) {
        return f64::INFINITY;
    }
    if theta.is_infinite() {
        values.iter().fold(0.0, |m, v| m.max(v.abs()))
    } else {
        values.iter().map(|v| v.abs().powf(theta) * cell).sum::<f64>().powf(1.0 / theta)
    }
}
