//! Bounds on the source created by the far-away negative part of a solution
//! that grows at most like `|x|^beta`.

use serde::{Deserialize, Serialize};

use super::EstimateError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailVariant {
    /// `c R^{-alpha} sum_{j >= 1} (3^{j beta} - 1) 3^{-j m}`.
    Primal,
    /// `c R^{-alpha} (nu^{2 beta - m} + sum_{j >= 2} nu^{(2 beta - 2 m) j + 2 m})`.
    Dual,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailBound {
    /// `inf` when the series diverges.
    pub value: f64,
    pub divergent: bool,
    /// `m = sigma ^ alpha`.
    pub m: f64,
    pub terms: usize,
}

const MAX_TERMS: usize = 1_000_000;

fn sum_series(term: impl Fn(usize) -> f64, first: usize) -> (f64, usize) {
    let mut acc = 0.0;
    for j in first..first + MAX_TERMS {
        let t = term(j);
        acc += t;
        if t <= 1e-17 * acc {
            return (acc, j - first + 1);
        }
    }
    (acc, MAX_TERMS)
}

/// Direct summation of the bound. `sigma` is the measured tail exponent.
pub fn tail_source_bound(
    variant: TailVariant,
    alpha: f64,
    sigma: f64,
    beta: f64,
    r: f64,
    nu: f64,
    c: f64,
) -> Result<TailBound, EstimateError> {
    if !(beta >= 0.0 && r > 0.0 && c > 0.0 && alpha > 0.0 && sigma > 0.0) {
        return Err(EstimateError::Parameter("need beta >= 0 and positive alpha, sigma, R, c".into()));
    }
    if variant == TailVariant::Dual && !(nu > 1.0) {
        return Err(EstimateError::Parameter(format!("nu = {nu} must exceed 1")));
    }
    let m = sigma.min(alpha);
    let pre = c * r.powf(-alpha);
    if beta >= m {
        return Ok(TailBound { value: f64::INFINITY, divergent: true, m, terms: 0 });
    }
    let (s, terms) = match variant {
        TailVariant::Primal => {
            let l3 = 3f64.ln();
            sum_series(|j| (j as f64 * beta * l3).exp_m1() * (-(j as f64) * m * l3).exp(), 1)
        }
        TailVariant::Dual => {
            let (s, n) = sum_series(|j| nu.powf((2.0 * beta - 2.0 * m) * j as f64 + 2.0 * m), 2);
            (s + nu.powf(2.0 * beta - m), n + 1)
        }
    };
    Ok(TailBound { value: pre * s, divergent: false, m, terms })
}

/// Largest `beta` in `[0, m)` with bound `<= target`, by bisection (the bound
/// increases with `beta`).
pub fn tail_beta_threshold(
    variant: TailVariant,
    alpha: f64,
    sigma: f64,
    r: f64,
    nu: f64,
    c: f64,
    target: f64,
) -> Result<f64, EstimateError> {
    let m = sigma.min(alpha);
    let at = |b: f64| tail_source_bound(variant, alpha, sigma, b, r, nu, c).map(|t| t.value);
    if at(0.0)? > target {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (0.0, m);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if at(mid)? <= target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 * m {
            break;
        }
    }
    Ok(lo)
}
