//! Pointwise integral conditions: (K1) weights, good sets, tails and cutoff
//! sums, the Hölder criteria for `V` and the compatibility of exponents.

use std::cell::Cell;

use rayon::prelude::*;
use serde::Serialize;

use super::{lattice_norm, or_divergent, AssumptionError, AssumptionReport, BallSpec, Resolution};
use crate::discretize::Grid;
use crate::geometry::{add, dist, norm, Point};
use crate::kernels::{coefficient_d, Family, Kernel, Potential};
use crate::quadrature::{ray_exit_ball, PolarRule};

/// The symmetric kernel `J` that `K_a` is measured against.
#[derive(Debug, Clone)]
pub enum Comparison {
    /// `J = K_s`.
    SymmetricPart,
    Kernel(Kernel),
}

impl Comparison {
    fn eval(&self, k: &Kernel, x: &Point, y: &Point, r: f64) -> f64 {
        match self {
            Comparison::SymmetricPart => k.split_at(x, y, r).0,
            Comparison::Kernel(j) => j.eval_at(x, y, r),
        }
    }

    fn breaks(&self, k: &Kernel) -> Vec<f64> {
        let mut b = k.breakpoints();
        if let Comparison::Kernel(j) = self {
            b.extend(j.breakpoints());
        }
        b.sort_by(|a, c| a.partial_cmp(c).expect("finite"));
        b
    }
}

/// `int |K_a(x, y)|^2 / J(x, y) dy` over `B_radius(center)`, or over all of
/// `R^d` when `radius` is `None`. Divergent integrals give `inf`.
pub fn k1_weight_at(
    kernel: &Kernel,
    cmp: &Comparison,
    x: &Point,
    center: &Point,
    radius: Option<f64>,
    rule: &PolarRule,
) -> Result<f64, AssumptionError> {
    let d = kernel.d();
    let breaks = cmp.breaks(kernel);
    let bad = Cell::new(None);
    let f = |h: &Point| {
        let r = norm(h);
        let y = add(x, h);
        let (_, ka) = kernel.split_at(x, &y, r);
        if ka == 0.0 {
            return [0.0];
        }
        let j = cmp.eval(kernel, x, &y, r);
        if !(j > 0.0) {
            bad.set(Some(*h));
            return [0.0];
        }
        [ka * ka / j]
    };
    let res = match radius {
        Some(rad) => rule.integrate_near(d, &breaks, |w| ray_exit_ball(x, w, center, rad), f),
        None => rule.integrate_whole(d, &breaks, |_| 1.0, f),
    };
    if let Some(h) = bad.get() {
        return Err(AssumptionError::Comparison { x: *x, h });
    }
    Ok(or_divergent(res.map(|v| v[0]), f64::INFINITY)?.0)
}

fn check_theta(d: usize, alpha: f64, theta: f64) -> Result<(), AssumptionError> {
    if !(theta >= d as f64 / alpha) {
        return Err(AssumptionError::Parameter(format!("theta = {theta} below d/alpha = {}", d as f64 / alpha)));
    }
    Ok(())
}

fn ball_lattice(grid: &Grid, center: &Point, radius: f64) -> Result<Vec<usize>, AssumptionError> {
    let idx = grid.ball_indices(center, radius);
    if idx.is_empty() {
        return Err(AssumptionError::Ball(format!("no lattice point in B_{radius}({center:?})")));
    }
    Ok(idx)
}

/// Local (K1): the `L^theta(B_2r)` norm of the weight over `B_2r`, the weight
/// at the centre, and the form-domination ratio `sup E^J / E^{K_s}` on `B_2r`.
pub fn k1_profile(
    kernel: &Kernel,
    cmp: &Comparison,
    ball: &BallSpec,
    theta: f64,
    grid: &Grid,
    rule: &PolarRule,
) -> Result<AssumptionReport, AssumptionError> {
    let d = kernel.d();
    check_theta(d, kernel.alpha(), theta)?;
    ball.validate(d)?;
    let radius = 2.0 * ball.r;
    let idx = ball_lattice(grid, &ball.center, radius)?;
    let w: Vec<f64> = idx
        .par_iter()
        .map(|&i| k1_weight_at(kernel, cmp, grid.node(i), &ball.center, Some(radius), rule))
        .collect::<Result<_, _>>()?;
    let w0 = k1_weight_at(kernel, cmp, &ball.center, &ball.center, Some(radius), rule)?;
    let mut rep = AssumptionReport::new("K1", d, kernel.alpha(), Resolution::lattice(grid.h(), idx.len()).with_rule(rule));
    rep.theta = Some(theta);
    rep.set("weight-norm", lattice_norm(&w, grid.cell_volume(), theta));
    rep.set("weight-at-center", w0);
    rep.set("form-domination", domination(kernel, cmp, grid, &idx)?);
    Ok(rep)
}

fn domination(kernel: &Kernel, cmp: &Comparison, grid: &Grid, idx: &[usize]) -> Result<f64, AssumptionError> {
    match cmp {
        Comparison::SymmetricPart => Ok(1.0),
        Comparison::Kernel(j) => {
            let nodes = grid.nodes();
            let ks = |a: usize, b: usize| {
                let (x, y) = (&nodes[a], &nodes[b]);
                kernel.decompose_at(x, y, dist(x, y)).0
            };
            let jv = |a: usize, b: usize| {
                let (x, y) = (&nodes[a], &nodes[b]);
                j.eval_at(x, y, dist(x, y))
            };
            super::spectral::domination_ratio(idx, jv, ks)
        }
    }
}

/// Global (K1): the inner integral runs over `R^d`. The outer norm is the
/// lattice norm over the whole grid; for `theta < inf` and kernels whose
/// antisymmetric part is translation invariant the weight is constant in `x`
/// and the norm over `R^d` is infinite.
pub fn k1_glob_profile(
    kernel: &Kernel,
    cmp: &Comparison,
    ball: &BallSpec,
    theta: f64,
    grid: &Grid,
    rule: &PolarRule,
) -> Result<AssumptionReport, AssumptionError> {
    let d = kernel.d();
    check_theta(d, kernel.alpha(), theta)?;
    ball.validate(d)?;
    let all: Vec<usize> = (0..grid.len()).collect();
    let w: Vec<f64> = all
        .par_iter()
        .map(|&i| k1_weight_at(kernel, cmp, grid.node(i), &ball.center, None, rule))
        .collect::<Result<_, _>>()?;
    let w0 = k1_weight_at(kernel, cmp, &ball.center, &ball.center, None, rule)?;
    let mut rep =
        AssumptionReport::new("K1glob", d, kernel.alpha(), Resolution::lattice(grid.h(), all.len()).with_rule(rule));
    rep.theta = Some(theta);
    let mut norm_v = lattice_norm(&w, grid.cell_volume(), theta);
    if theta.is_finite() {
        let invariant = matches!(kernel.family(), Family::Cone { .. } | Family::Custom { .. });
        if invariant && w0 > 0.0 {
            norm_v = f64::INFINITY;
            rep.note("weight is constant in x: the L^theta norm over R^d is infinite");
        } else {
            rep.note("outer norm taken over the computational box");
        }
    }
    rep.set("weight-norm", norm_v);
    rep.set("weight-at-center", w0);
    rep.set("form-domination", domination(kernel, cmp, grid, &ball_lattice(grid, &ball.center, 2.0 * ball.r)?)?);
    Ok(rep)
}

/// `D = (Lambda - lambda) / (Lambda + lambda)`.
pub fn k2_coefficient_d(lambda: f64, big_lambda: f64) -> Result<f64, AssumptionError> {
    Ok(coefficient_d(lambda, big_lambda)?)
}

/// `|{y in B : |K_a(x, y)| <= D K_s(x, y)}| / |B|` on a uniform lattice of
/// `per_axis` points per axis over `B = B_radius(center)`.
pub fn good_set_fraction_at(
    kernel: &Kernel,
    x: &Point,
    center: &Point,
    radius: f64,
    dd: f64,
    per_axis: usize,
) -> f64 {
    let d = kernel.d();
    let n = per_axis.max(2);
    let step = 2.0 * radius / n as f64;
    let coord = |k: usize| -radius + (k as f64 + 0.5) * step;
    let (mut total, mut good) = (0usize, 0usize);
    let ny = if d == 1 { 1 } else { n };
    for b in 0..ny {
        for a in 0..n {
            let y = if d == 1 { [center[0] + coord(a), 0.0] } else { [center[0] + coord(a), center[1] + coord(b)] };
            if dist(&y, center) >= radius {
                continue;
            }
            total += 1;
            let r = dist(x, &y);
            if r < 1e-14 {
                good += 1;
                continue;
            }
            let (ks, ka) = kernel.split_at(x, &y, r);
            if ka.abs() <= dd * ks {
                good += 1;
            }
        }
    }
    good as f64 / total.max(1) as f64
}

/// Smallest good-set fraction over the grid nodes in `B_r(z)`.
pub fn good_set_fraction(
    kernel: &Kernel,
    ball: &BallSpec,
    dd: f64,
    grid: &Grid,
    per_axis: usize,
) -> Result<AssumptionReport, AssumptionError> {
    if !(dd > 0.0 && dd < 1.0) {
        return Err(AssumptionError::Parameter(format!("D = {dd} not in (0, 1)")));
    }
    let idx = ball_lattice(grid, &ball.center, ball.r)?;
    let fr: Vec<f64> = idx
        .par_iter()
        .map(|&i| good_set_fraction_at(kernel, grid.node(i), &ball.center, ball.r, dd, per_axis))
        .collect();
    let mut rep = AssumptionReport::new("K2", kernel.d(), kernel.alpha(), Resolution::lattice(grid.h(), idx.len()));
    rep.set("good-fraction", fr.iter().copied().fold(1.0, f64::min));
    rep.set("D", dd);
    rep.note(format!("y-lattice with {per_axis} points per axis"));
    Ok(rep)
}

/// `sup_{x in B_2r} int_{|h| > A r} K(x, x + h) dh` (or `K(x + h, x)` when dual).
pub fn tail_sup(
    kernel: &Kernel,
    ball: &BallSpec,
    a: f64,
    dual: bool,
    grid: &Grid,
    rule: &PolarRule,
) -> Result<f64, AssumptionError> {
    if !(a > 1.0 && a * ball.r >= 1.0 - 1e-12) {
        return Err(AssumptionError::Parameter(format!("need A > 1 and A r >= 1, got A = {a}, r = {}", ball.r)));
    }
    let idx = ball_lattice(grid, &ball.center, 2.0 * ball.r)?;
    let start = a * ball.r;
    let sign = if dual { -1.0 } else { 1.0 };
    let breaks = kernel.breakpoints();
    let vals: Vec<f64> = idx
        .par_iter()
        .map(|&i| {
            let x = grid.node(i);
            let res = rule.integrate_far(kernel.d(), &breaks, |_| start, |h| {
                let (ks, ka) = kernel.split_at(x, &add(x, h), norm(h));
                [ks + sign * ka]
            });
            or_divergent(res.map(|v| v[0]), f64::INFINITY).map(|v| v.0)
        })
        .collect::<Result<_, _>>()?;
    Ok(vals.into_iter().fold(0.0, f64::max))
}

/// Tails at several `A` and the decay exponent fitted from the last two.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailProfile {
    pub a: Vec<f64>,
    pub values: Vec<f64>,
    pub sigma: f64,
    pub dual: bool,
}

pub fn tail_profile(
    kernel: &Kernel,
    ball: &BallSpec,
    a_values: &[f64],
    dual: bool,
    grid: &Grid,
    rule: &PolarRule,
) -> Result<TailProfile, AssumptionError> {
    if a_values.len() < 2 {
        return Err(AssumptionError::Parameter("need at least two values of A".into()));
    }
    let values: Vec<f64> =
        a_values.iter().map(|&a| tail_sup(kernel, ball, a, dual, grid, rule)).collect::<Result<_, _>>()?;
    let k = values.len();
    let sigma = -(values[k - 1] / values[k - 2]).ln() / (a_values[k - 1] / a_values[k - 2]).ln();
    Ok(TailProfile { a: a_values.to_vec(), values, sigma, dual })
}

/// `sup_{x in B_{r+rho}} int_{|h| > zeta} K_s(x, x + h) dh`.
pub fn cutoff_sup(
    kernel: &Kernel,
    zeta: f64,
    ball: &BallSpec,
    grid: &Grid,
    rule: &PolarRule,
) -> Result<f64, AssumptionError> {
    if !(zeta > 0.0 && zeta <= ball.rho) {
        return Err(AssumptionError::Parameter(format!("need 0 < zeta <= rho, got zeta = {zeta}")));
    }
    let idx = ball_lattice(grid, &ball.center, ball.r + ball.rho)?;
    let breaks = kernel.breakpoints();
    let vals: Vec<f64> = idx
        .par_iter()
        .map(|&i| {
            let x = grid.node(i);
            let res = rule.integrate_far(kernel.d(), &breaks, |_| zeta, |h| {
                [kernel.split_at(x, &add(x, h), norm(h)).0]
            });
            or_divergent(res.map(|v| v[0]), f64::INFINITY).map(|v| v.0)
        })
        .collect::<Result<_, _>>()?;
    Ok(vals.into_iter().fold(0.0, f64::max))
}

/// `c zeta^{-e}` fitted by least squares in log-log over a sweep of `zeta`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutoffProfileFit {
    pub zetas: Vec<f64>,
    pub values: Vec<f64>,
    pub c: f64,
    pub exponent: f64,
}

pub fn cutoff_profile(
    kernel: &Kernel,
    ball: &BallSpec,
    zetas: &[f64],
    grid: &Grid,
    rule: &PolarRule,
) -> Result<CutoffProfileFit, AssumptionError> {
    if zetas.len() < 2 {
        return Err(AssumptionError::Parameter("need at least two values of zeta".into()));
    }
    let values: Vec<f64> =
        zetas.iter().map(|&z| cutoff_sup(kernel, z, ball, grid, rule)).collect::<Result<_, _>>()?;
    let xs: Vec<f64> = zetas.iter().map(|z| z.ln()).collect();
    let ys: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let (slope, icept) = least_squares(&xs, &ys);
    Ok(CutoffProfileFit { zetas: zetas.to_vec(), values, c: icept.exp(), exponent: -slope })
}

/// Slope and intercept of the least-squares line through `(x, y)`.
pub(crate) fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Which sufficient condition for (K1) to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "branch", rename_all = "kebab-case")]
pub enum SuffK1Branch {
    /// Local Hölder seminorm of order `gamma` in `L^{2 theta}`.
    Holder { gamma: f64 },
    /// Gradient and first-order remainder in `L^{2 theta}`.
    Gradient,
}

/// Lattice evaluation of the sufficient conditions on `V` over `B_2r`.
pub fn suff_k1_check(
    v: &Potential,
    alpha: f64,
    ball: &BallSpec,
    theta: f64,
    branch: SuffK1Branch,
    grid: &Grid,
) -> Result<AssumptionReport, AssumptionError> {
    let d = grid.d();
    check_theta(d, alpha, theta)?;
    let idx = ball_lattice(grid, &ball.center, 2.0 * ball.r)?;
    let nodes = grid.nodes();
    let q = 2.0 * theta;
    let mut rep = AssumptionReport::new("suffK1", d, alpha, Resolution::lattice(grid.h(), idx.len()));
    rep.theta = Some(theta);
    match branch {
        SuffK1Branch::Holder { gamma } => {
            if !(gamma > alpha / 2.0 && gamma <= 1.0) {
                return Err(AssumptionError::Parameter(format!("gamma = {gamma} not in (alpha/2, 1]")));
            }
            let semi: Vec<f64> = idx
                .iter()
                .map(|&i| {
                    let vx = v.value(&nodes[i]);
                    idx.iter()
                        .filter(|&&j| j != i)
                        .map(|&j| (vx - v.value(&nodes[j])).abs() / dist(&nodes[i], &nodes[j]).powf(gamma))
                        .fold(0.0, f64::max)
                })
                .collect();
            rep.set("holder-seminorm-norm", lattice_norm(&semi, grid.cell_volume(), q));
            rep.set("holder-seminorm-max", semi.iter().copied().fold(0.0, f64::max));
        }
        SuffK1Branch::Gradient => {
            let mut grad = Vec::with_capacity(idx.len());
            let mut rem = Vec::with_capacity(idx.len());
            for &i in &idx {
                let x = &nodes[i];
                let g = v.gradient(x);
                grad.push(norm(&g));
                let vx = v.value(x);
                let sup = idx
                    .iter()
                    .filter(|&&j| j != i)
                    .map(|&j| {
                        let y = &nodes[j];
                        let lin = g[0] * (x[0] - y[0]) + g[1] * (x[1] - y[1]);
                        (vx - v.value(y) - lin).abs() / dist(x, y)
                    })
                    .fold(0.0, f64::max);
                rem.push(sup);
            }
            let (gn, rn) = (lattice_norm(&grad, grid.cell_volume(), q), lattice_norm(&rem, grid.cell_volume(), q));
            rep.set("gradient-norm", gn);
            rep.set("remainder-norm", rn);
            rep.set("sum", gn + rn);
        }
    }
    Ok(rep)
}

/// `(CP, CP-hat)`: `d / (alpha theta) + 1 / mu <= 1`, and `< 1`.
pub fn cp_check(d: usize, alpha: f64, theta: f64, mu: f64) -> Result<(bool, bool), AssumptionError> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(AssumptionError::Parameter(format!("alpha = {alpha} not in (0, 2)")));
    }
    if !(theta > d as f64 / alpha) {
        return Err(AssumptionError::Parameter(format!(
            "theta = {theta} must exceed d/alpha = {}",
            d as f64 / alpha
        )));
    }
    if !(mu > 1.0) {
        return Err(AssumptionError::Parameter(format!("mu = {mu} must exceed 1")));
    }
    let s = d as f64 / (alpha * theta) + 1.0 / mu;
    Ok((s <= 1.0, s < 1.0))
}
