//! Quadratic-form comparisons on a ball: form domination, Poincaré,
//! coercivity and Sobolev constants, all as (generalized) eigenproblems on
//! the lattice nodes of the ball.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::{AssumptionError, AssumptionReport, BallSpec, Resolution};
use crate::discretize::DiscreteForm;
use crate::geometry::dist;
use crate::linalg::{congruence, energy_matrix, generalized_eigenvalues, helmert, LinalgError};

fn weights(idx: &[usize], k: impl Fn(usize, usize) -> f64) -> DMatrix<f64> {
    let m = idx.len();
    DMatrix::from_fn(m, m, |a, b| if a == b { 0.0 } else { k(idx[a], idx[b]) })
}

fn ball_nodes(form: &DiscreteForm, radius: f64, ball: &BallSpec) -> Result<Vec<usize>, AssumptionError> {
    let idx = form.grid().ball_indices(&ball.center, radius);
    if idx.len() < 2 {
        return Err(AssumptionError::Ball(format!("fewer than two lattice points in B_{radius}")));
    }
    Ok(idx)
}

/// `sup_v E^J(v, v) / E^{K_s}(v, v)` over mean-zero `v` on the index set.
/// Infinite when `E^{K_s}` degenerates on mean-zero functions.
pub fn domination_ratio(
    idx: &[usize],
    j: impl Fn(usize, usize) -> f64,
    ks: impl Fn(usize, usize) -> f64,
) -> Result<f64, AssumptionError> {
    let q = helmert(idx.len())?;
    let ej = congruence(&energy_matrix(&weights(idx, j)), &q);
    let es = congruence(&energy_matrix(&weights(idx, ks)), &q);
    match generalized_eigenvalues(&ej, &es) {
        Ok(v) => Ok(*v.last().expect("nonempty")),
        Err(LinalgError::NotPositiveDefinite) => Ok(f64::INFINITY),
        Err(e) => Err(e.into()),
    }
}

fn restricted_energy(form: &DiscreteForm, idx: &[usize]) -> DMatrix<f64> {
    let w2 = form.grid().cell_volume().powi(2);
    energy_matrix(&weights(idx, |a, b| form.k_sym(a, b) * w2))
}

/// Poincaré constant `c` in `||v - mean v||^2_{L^2(B_r)} <= c r^alpha E^{K_s}_{B_r}(v, v)`.
pub fn poincare_constant(form: &DiscreteForm, alpha: f64, ball: &BallSpec) -> Result<AssumptionReport, AssumptionError> {
    let g = form.grid();
    let idx = ball_nodes(form, ball.r, ball)?;
    let q = helmert(idx.len())?;
    let e = congruence(&restricted_energy(form, &idx), &q);
    let lam = nalgebra::SymmetricEigen::new(e).eigenvalues.min() / g.cell_volume();
    let mut rep = AssumptionReport::new("Poinc", g.d(), alpha, Resolution::lattice(g.h(), idx.len()));
    rep.set("spectral-gap", lam);
    rep.set("poincare", if lam > 0.0 { ball.r.powf(-alpha) / lam } else { f64::INFINITY });
    Ok(rep)
}

/// Two-sided comparison of `E^{K_s}_{B_r}` with the form of `|h|^{-d-alpha}`
/// on mean-zero functions: the extreme generalized eigenvalues.
pub fn coercivity_ratio(form: &DiscreteForm, alpha: f64, ball: &BallSpec) -> Result<AssumptionReport, AssumptionError> {
    let g = form.grid();
    let d = g.d();
    let idx = ball_nodes(form, ball.r, ball)?;
    let nodes = g.nodes();
    let w2 = g.cell_volume().powi(2);
    let q = helmert(idx.len())?;
    let es = congruence(&restricted_energy(form, &idx), &q);
    let eu = congruence(
        &energy_matrix(&weights(&idx, |a, b| dist(&nodes[a], &nodes[b]).powf(-(d as f64) - alpha) * w2)),
        &q,
    );
    let v = generalized_eigenvalues(&es, &eu)?;
    let mut rep = AssumptionReport::new("Coerc", d, alpha, Resolution::lattice(g.h(), idx.len()));
    rep.set("lower", v[0]);
    rep.set("upper", *v.last().expect("nonempty"));
    Ok(rep)
}

/// Test functions behind a Sobolev ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SobolevFamily {
    Constant,
    /// Single-node spikes and Gaussian bumps centred on lattice nodes of `B_r`.
    Bump,
    /// Independent normals averaged over nearest neighbours.
    SmoothedNoise,
    /// Nonlinear power iteration on the quotient, started from the best
    /// member of the other families.
    Extremal,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SobolevReport {
    /// `sup ||v^2||_{L^q(B_r)} / (E_{B_{r+rho}}(v, v) + rho^{-alpha} ||v^2||_{L^1(B_{r+rho})})`.
    pub ratio: f64,
    pub q: f64,
    pub family: SobolevFamily,
    pub per_family: Vec<(SobolevFamily, f64)>,
    pub iterations: usize,
    pub report: AssumptionReport,
}

/// Empirical Sobolev ratio with `q = d / (d - alpha)`; `alpha >= d` is
/// rejected. `noise` smoothed-noise samples are drawn from `seed`.
pub fn sobolev_ratio(
    form: &DiscreteForm,
    alpha: f64,
    ball: &BallSpec,
    noise: usize,
    seed: u64,
) -> Result<SobolevReport, AssumptionError> {
    let g = form.grid();
    let d = g.d();
    if !(alpha < d as f64) {
        return Err(AssumptionError::Parameter(format!("alpha = {alpha} >= d = {d}: no Sobolev exponent")));
    }
    let q = d as f64 / (d as f64 - alpha);
    let idx = ball_nodes(form, ball.r + ball.rho, ball)?;
    let nodes = g.nodes();
    let inner: Vec<bool> = idx.iter().map(|&i| dist(&nodes[i], &ball.center) < ball.r).collect();
    if !inner.iter().any(|&b| b) {
        return Err(AssumptionError::Ball("no lattice point in B_r".into()));
    }
    let cell = g.cell_volume();
    let mut b = restricted_energy(form, &idx);
    for i in 0..idx.len() {
        b[(i, i)] += ball.rho.powf(-alpha) * cell;
    }
    let chol = b.clone().cholesky().ok_or(AssumptionError::SingularMass)?;
    let p = 2.0 * q;
    let num = |v: &DVector<f64>| {
        (v.iter().zip(&inner).filter(|(_, &m)| m).map(|(x, _)| x.abs().powf(p)).sum::<f64>() * cell).powf(2.0 / p)
    };
    let ratio_of = |v: &DVector<f64>| num(v) / v.dot(&(&b * v));

    let m = idx.len();
    let mut best: Vec<(SobolevFamily, f64, DVector<f64>)> = Vec::new();
    let mut consider = |fam: SobolevFamily, v: DVector<f64>| {
        let r = ratio_of(&v);
        match best.iter_mut().find(|e| e.0 == fam) {
            Some(e) if e.1 >= r => {}
            Some(e) => *e = (fam, r, v),
            None => best.push((fam, r, v)),
        }
    };
    consider(SobolevFamily::Constant, DVector::from_element(m, 1.0));
    for (a, _) in inner.iter().enumerate().filter(|(_, &m)| m) {
        consider(SobolevFamily::Bump, DVector::from_fn(m, |k, _| if k == a { 1.0 } else { 0.0 }));
        for width in [ball.rho / 4.0, ball.rho / 2.0, ball.rho] {
            let c = nodes[idx[a]];
            consider(
                SobolevFamily::Bump,
                DVector::from_fn(m, |k, _| (-(dist(&nodes[idx[k]], &c) / width).powi(2)).exp()),
            );
        }
    }
    let mut rng = crate::random::stream(seed, 0);
    for _ in 0..noise {
        let z: Vec<f64> = (0..g.len()).map(|_| crate::random::standard_normal(&mut rng)).collect();
        let v = DVector::from_fn(m, |k, _| {
            let i = idx[k];
            let mut acc = z[i];
            let mut cnt = 1.0;
            for axis in 0..d {
                for sgn in [-1, 1] {
                    if let Some(j) = g.neighbor(i, axis, sgn) {
                        acc += z[j];
                        cnt += 1.0;
                    }
                }
            }
            acc / cnt
        });
        consider(SobolevFamily::SmoothedNoise, v);
    }

    let start = best.iter().max_by(|x, y| x.1.total_cmp(&y.1)).expect("nonempty");
    let mut v = start.2.clone();
    let mut r = start.1;
    let mut it = 0;
    while it < 500 {
        it += 1;
        let rhs = DVector::from_fn(m, |k, _| if inner[k] { v[k].abs().powf(p - 2.0) * v[k] } else { 0.0 });
        let mut w = chol.solve(&rhs);
        w /= w.amax();
        let rn = ratio_of(&w);
        v = w;
        let done = (rn - r).abs() <= 1e-12 * rn;
        r = rn;
        if done {
            break;
        }
    }
    let mut per_family: Vec<(SobolevFamily, f64)> = best.iter().map(|e| (e.0, e.1)).collect();
    per_family.push((SobolevFamily::Extremal, r));
    let (family, ratio) = per_family.iter().copied().max_by(|x, y| x.1.total_cmp(&y.1)).expect("nonempty");
    let mut rep = AssumptionReport::new("Sob", d, alpha, Resolution::lattice(g.h(), m));
    rep.set("sobolev", ratio);
    rep.note(format!("q = {q}, {noise} noise samples, {it} power iterations"));
    Ok(SobolevReport { ratio, q, family, per_family, iterations: it, report: rep })
}
