//! The local limit `alpha -> 2`: second moments `a_ij` and first moments
//! `b_i` of the kernels, convergence of forms and resolvents to the
//! diffusion-with-drift limit, and the Gårding and sector margins uniform in
//! `alpha`.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::discretize::{assemble, AssemblyOptions, DiscreteForm, DiscretizeError, Grid};
use crate::geometry::{add, norm, Point};
use crate::kernels::{Coefficient, Family, Kernel, KernelError, KernelSpec, Potential};
use crate::quadrature::{ray_exit_ball, PolarRule, QuadratureError};
use crate::solve::{resolvent_matrix_solve, SolveError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MoscoError {
    #[error("invalid family: {0}")]
    Family(String),
    #[error("moment quadrature did not settle at alpha = {alpha}: {coarse:e} vs {fine:e} on the last two levels")]
    Quadrature { alpha: f64, coarse: f64, fine: f64 },
    #[error(transparent)]
    Integrate(#[from] QuadratureError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Discretize(#[from] DiscretizeError),
    #[error(transparent)]
    Solve(#[from] SolveError),
}

/// Kernels of one family at increasing orders `alpha < 2`.
#[derive(Debug, Clone)]
pub struct AlphaFamily {
    kernels: Vec<Kernel>,
}

impl AlphaFamily {
    pub fn new(kernels: Vec<Kernel>) -> Result<Self, MoscoError> {
        if kernels.len() < 2 {
            return Err(MoscoError::Family("need at least two orders".into()));
        }
        let d = kernels[0].d();
        for w in kernels.windows(2) {
            if w[1].d() != d || !(w[1].alpha() > w[0].alpha()) {
                return Err(MoscoError::Family("orders must increase and share the dimension".into()));
            }
        }
        if kernels.last().map_or(true, |k| !(k.alpha() < 2.0)) {
            return Err(MoscoError::Family("orders must stay below 2".into()));
        }
        Ok(Self { kernels })
    }

    pub fn from_spec(spec: &KernelSpec, alphas: &[f64]) -> Result<Self, MoscoError> {
        let ks = alphas.iter().map(|&a| spec.with_alpha(a).build()).collect::<Result<Vec<_>, _>>()?;
        Self::new(ks)
    }

    pub fn d(&self) -> usize {
        self.kernels[0].d()
    }

    pub fn alphas(&self) -> Vec<f64> {
        self.kernels.iter().map(Kernel::alpha).collect()
    }

    pub fn kernels(&self) -> &[Kernel] {
        &self.kernels
    }

    /// Range of `K_s(x, x + h) |h|^{d + alpha} / (2 - alpha)` over sampled
    /// `h` with `|h| <= radius`, per order. The comparability assumption asks
    /// for `[Lambda^{-1}, Lambda]`.
    pub fn comparison_range(&self, x: &Point, radius: f64, rule: &PolarRule) -> Vec<(f64, f64)> {
        let d = self.d();
        self.kernels
            .iter()
            .map(|k| {
                let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
                for (w, _) in rule.directions(d) {
                    for s in 1..=16 {
                        let r = radius * s as f64 / 16.0;
                        let h = [w[0] * r, w[1] * r];
                        let v = k.split_at(x, &add(x, &h), r).0 * r.powf(d as f64 + k.alpha()) / (2.0 - k.alpha());
                        lo = lo.min(v);
                        hi = hi.max(v);
                    }
                }
                (lo, hi)
            })
            .collect()
    }
}

/// True when `K(x, x + h)` does not depend on `x`, so that the moments are
/// constant in space.
fn translation_invariant(k: &Kernel) -> bool {
    match k.family() {
        Family::Coefficient { g, .. } => matches!(g, Coefficient::Constant { .. }),
        Family::Drift { j, v, .. } => {
            matches!(j, Coefficient::Constant { .. }) && matches!(v, Potential::Zero | Potential::Linear { .. })
        }
        Family::Cone { .. } | Family::Custom { .. } => true,
    }
}

pub type Matrix2 = [[f64; 2]; 2];

/// `a_ij` and `b_i` at one point, per order, and their extrapolations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalCoefficients {
    pub x: Point,
    pub delta: f64,
    pub alphas: Vec<f64>,
    pub a: Vec<Matrix2>,
    pub b: Vec<Point>,
    /// Linear extrapolation in `2 - alpha` through the last two orders.
    pub a_limit: Matrix2,
    pub b_limit: Point,
    /// Largest change of the extrapolated values when the third-to-last
    /// order replaces the second-to-last (0 with two orders).
    pub extrapolation_spread: f64,
}

/// Inward shells for moments. Deeper shells only add roundoff: `V(x) - V(y)`
/// cancels near the diagonal and the weight `r^-alpha` amplifies the residue,
/// while the power-law closure already covers the homogeneous core.
const MOMENT_LEVELS: usize = 20;

fn moments(k: &Kernel, x: &Point, delta: f64, rule: &PolarRule) -> Result<[f64; 5], QuadratureError> {
    let rule = PolarRule::new(
        rule.levels.min(MOMENT_LEVELS),
        rule.ratio,
        rule.far_levels,
        rule.gauss_order,
        rule.n_theta,
    )?;
    rule.integrate_near(
        k.d(),
        &k.breakpoints(),
        |w| ray_exit_ball(x, w, x, delta),
        |h| {
            let (ks, ka) = k.split_at(x, &add(x, h), norm(h));
            [h[0] * h[0] * ks, h[0] * h[1] * ks, h[1] * h[1] * ks, -h[0] * ka, -h[1] * ka]
        },
    )
}

fn extrapolate(s1: f64, v1: f64, s2: f64, v2: f64) -> f64 {
    v2 - s2 * (v2 - v1) / (s2 - s1)
}

/// Moments on `B_delta(x)` for every order, checked against a refined rule.
pub fn local_coefficients(
    family: &AlphaFamily,
    x: &Point,
    delta: f64,
    rule: &PolarRule,
) -> Result<LocalCoefficients, MoscoError> {
    if !(delta > 0.0) {
        return Err(MoscoError::Family(format!("delta = {delta} must be positive")));
    }
    let fine = rule.refined();
    let raw: Vec<[f64; 5]> = family
        .kernels
        .par_iter()
        .map(|k| {
            let m = moments(k, x, delta, rule)?;
            let mf = moments(k, x, delta, &fine)?;
            let scale = m.iter().fold(0.0f64, |s, v| s.max(v.abs())).max(f64::MIN_POSITIVE);
            for c in 0..5 {
                if (m[c] - mf[c]).abs() > 1e-8 * scale {
                    return Err(MoscoError::Quadrature { alpha: k.alpha(), coarse: m[c], fine: mf[c] });
                }
            }
            Ok(mf)
        })
        .collect::<Result<_, MoscoError>>()?;
    let alphas = family.alphas();
    let a: Vec<Matrix2> = raw.iter().map(|m| [[m[0], m[1]], [m[1], m[2]]]).collect();
    let b: Vec<Point> = raw.iter().map(|m| [m[3], m[4]]).collect();
    let n = alphas.len();
    let lim = |i: usize, j: usize, c: usize| {
        extrapolate(2.0 - alphas[i], raw[i][c], 2.0 - alphas[j], raw[j][c])
    };
    let last: Vec<f64> = (0..5).map(|c| lim(n - 2, n - 1, c)).collect();
    let spread = if n >= 3 {
        (0..5).map(|c| (lim(n - 3, n - 1, c) - last[c]).abs()).fold(0.0, f64::max)
    } else {
        0.0
    };
    Ok(LocalCoefficients {
        x: *x,
        delta,
        alphas,
        a,
        b,
        a_limit: [[last[0], last[1]], [last[1], last[2]]],
        b_limit: [last[3], last[4]],
        extrapolation_spread: spread,
    })
}

/// Extrapolated `(a, b)` at every grid node (computed once for
/// translation-invariant families).
pub fn limit_field(
    family: &AlphaFamily,
    grid: &Grid,
    delta: f64,
    rule: &PolarRule,
) -> Result<Vec<(Matrix2, Point)>, MoscoError> {
    if family.kernels.iter().all(translation_invariant) {
        let c = local_coefficients(family, &[0.0, 0.0], delta, rule)?;
        return Ok(vec![(c.a_limit, c.b_limit); grid.len()]);
    }
    grid.nodes()
        .iter()
        .map(|x| local_coefficients(family, x, delta, rule).map(|c| (c.a_limit, c.b_limit)))
        .collect()
}

/// `-div(a grad u) + 2 b . grad u` by central differences on the full grid.
/// Rows of collar nodes are left zero; neighbours outside the box drop out.
pub fn local_operator(grid: &Grid, coeff: &[(Matrix2, Point)]) -> DMatrix<f64> {
    let n = grid.len();
    let d = grid.d();
    let h = grid.h();
    let mut m = DMatrix::zeros(n, n);
    for i in grid.interior_indices() {
        let (a, b) = coeff[i];
        for k in 0..d {
            for sgn in [-1i64, 1] {
                // face coefficient: mean of the two nodal values
                let (akk, j) = match grid.neighbor(i, k, sgn) {
                    Some(j) => (0.5 * (a[k][k] + coeff[j].0[k][k]), Some(j)),
                    None => (a[k][k], None),
                };
                m[(i, i)] += akk / (h * h);
                if let Some(j) = j {
                    m[(i, j)] -= akk / (h * h);
                    m[(i, j)] += sgn as f64 * 2.0 * b[k] / (2.0 * h);
                }
            }
        }
        if d == 2 {
            let cross = a[0][1] + a[1][0];
            for (s0, s1, w) in [(1i64, 1i64, 1.0), (1, -1, -1.0), (-1, 1, -1.0), (-1, -1, 1.0)] {
                if let Some(j) = grid.neighbor(i, 0, s0).and_then(|j| grid.neighbor(j, 1, s1)) {
                    m[(i, j)] -= cross * w / (4.0 * h * h);
                }
            }
        }
    }
    m
}

fn gradient(grid: &Grid, u: &[f64], i: usize) -> Point {
    let mut g = [0.0; 2];
    for (k, gk) in g.iter_mut().enumerate().take(grid.d()) {
        let up = grid.neighbor(i, k, 1).map_or(0.0, |j| u[j]);
        let dn = grid.neighbor(i, k, -1).map_or(0.0, |j| u[j]);
        *gk = (up - dn) / (2.0 * grid.h());
    }
    g
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FormConvergence {
    pub alphas: Vec<f64>,
    /// `h^d v . (A^(alpha) u)`.
    pub values: Vec<f64>,
    /// Antisymmetric part `h^d v . (A_a u + diag(q) u)` alone.
    pub drift_values: Vec<f64>,
    /// `int a grad u . grad v + 2 int (b . grad u) v`.
    pub local: f64,
    pub local_drift: f64,
    /// `|value - local| / |local|` (absolute when `local = 0`).
    pub gaps: Vec<f64>,
    pub monotone: bool,
}

/// Discrete forms of every order against the local limit, for grid profiles
/// `u`, `v` vanishing near the collar.
pub fn form_convergence(
    family: &AlphaFamily,
    grid: &Grid,
    u: &[f64],
    v: &[f64],
    opts: &AssemblyOptions,
    delta: f64,
) -> Result<FormConvergence, MoscoError> {
    let coeff = limit_field(family, grid, delta, &opts.rule)?;
    let hd = grid.cell_volume();
    let (mut local, mut local_drift) = (0.0, 0.0);
    for i in grid.interior_indices() {
        let (a, b) = coeff[i];
        let gu = gradient(grid, u, i);
        let gv = gradient(grid, v, i);
        for p in 0..2 {
            for q in 0..2 {
                local += a[p][q] * gu[p] * gv[q] * hd;
            }
            local_drift += 2.0 * b[p] * gu[p] * v[i] * hd;
        }
    }
    local += local_drift;
    let uu = DVector::from_column_slice(u);
    let vv = DVector::from_column_slice(v);
    let per: Vec<(f64, f64)> = family
        .kernels
        .par_iter()
        .map(|k| {
            let f = assemble(k, grid, opts)?;
            let total = hd * vv.dot(&f.apply(&uu));
            let sym = hd * vv.dot(&f.apply_sym(&uu));
            let q = f.drift_diag();
            let diag: f64 = (0..grid.len()).map(|i| vv[i] * q[i] * uu[i]).sum::<f64>() * hd;
            Ok((total, total - sym + diag))
        })
        .collect::<Result<_, MoscoError>>()?;
    let values: Vec<f64> = per.iter().map(|p| p.0).collect();
    let drift_values: Vec<f64> = per.iter().map(|p| p.1).collect();
    let gaps: Vec<f64> = values
        .iter()
        .map(|v| if local != 0.0 { (v - local).abs() / local.abs() } else { (v - local).abs() })
        .collect();
    let monotone = gaps.windows(2).all(|w| w[1] <= w[0]);
    Ok(FormConvergence { alphas: family.alphas(), values, drift_values, local, local_drift, gaps, monotone })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GardingReport {
    pub lambda_g: f64,
    /// `min_u E_B(u, u) - E^{K_s}_B(u, u)/2 + (lambda_G - 1) ||u||^2` over probes.
    pub garding_margin: f64,
    /// Smallest `lambda_G` making every probe margin nonnegative.
    pub lambda_probes: f64,
    /// Same over all grid functions on `B` (symmetric eigenproblem).
    pub lambda_exact: f64,
    /// `max |E^{K_a}_B(u, v)|^2 / (E^{K_s}_B(u, u) (E^{K_s}_B(v, v) + ||v||^2))`
    /// over probe pairs, i.e. the sector constant with `c_1 = c_2`.
    pub sector_constant: f64,
}

/// Gårding and sector margins of the restricted forms on the interior `B`.
pub fn garding_sector_check(form: &DiscreteForm, lambda_g: f64, probes: &[DVector<f64>]) -> GardingReport {
    let g = form.grid();
    let idx = g.interior_indices();
    let m = idx.len();
    let hd = g.cell_volume();
    let w2 = hd * hd;
    // E^{K_s}_B(u, v) = u' S v, E^{K_a}_B(u, v) = sum (u_i - u_j) v_i Ka_ij h^{2d} = v' N u
    let mut s = DMatrix::zeros(m, m);
    let mut nmat = DMatrix::zeros(m, m);
    for a in 0..m {
        for b in 0..m {
            if a != b {
                let ks = form.k_sym(idx[a], idx[b]) * w2;
                let ka = form.k_anti(idx[a], idx[b]) * w2;
                s[(a, b)] -= 2.0 * ks;
                s[(a, a)] += 2.0 * ks;
                nmat[(a, a)] += ka;
                nmat[(a, b)] -= ka;
            }
        }
    }
    // E_B(u, u) = E^{K_s}_B(u, u) + 2 E^{K_a}_B(u, u)
    let restrict = |u: &DVector<f64>| DVector::from_fn(m, |k, _| u[idx[k]]);
    let quad = |u: &DVector<f64>| {
        let es = u.dot(&(&s * u));
        let ea = u.dot(&(&nmat * u));
        (es + 2.0 * ea - 0.5 * es, es)
    };
    let mut margin = f64::INFINITY;
    let mut lambda_probes = f64::NEG_INFINITY;
    for p in probes {
        let u = restrict(p);
        let l2 = hd * u.norm_squared();
        if l2 == 0.0 {
            continue;
        }
        let (q, _) = quad(&u);
        margin = margin.min(q + (lambda_g - 1.0) * l2);
        lambda_probes = lambda_probes.max(1.0 - q / l2);
    }
    let sym = 0.5 * &s + (&nmat + nmat.transpose());
    let lmin = SymmetricEigen::new(sym).eigenvalues.min() / hd;
    let mut sector = 0.0f64;
    for p in probes {
        let u = restrict(p);
        let esu = u.dot(&(&s * &u));
        for q in probes {
            let v = restrict(q);
            let ea = v.dot(&(&nmat * &u));
            let den = esu * (v.dot(&(&s * &v)) + hd * v.norm_squared());
            if den > 0.0 {
                sector = sector.max(ea * ea / den);
            }
        }
    }
    GardingReport {
        lambda_g,
        garding_margin: margin,
        lambda_probes,
        lambda_exact: 1.0 - lmin,
        sector_constant: sector,
    }
}

/// Probe functions on a grid: sine modes of the box and Gaussian bumps.
pub fn default_probes(grid: &Grid, count: usize) -> Vec<DVector<f64>> {
    let x = grid.half_width();
    let mut out = Vec::with_capacity(count);
    for k in 1..=count.div_ceil(2) {
        let f = std::f64::consts::PI * k as f64 / (2.0 * x);
        out.push(DVector::from_vec(grid.sample(|p| ((p[0] + x) * f).sin() * if grid.d() == 2 { ((p[1] + x) * f).sin() } else { 1.0 })));
        let c = -0.5 * x + x * (k as f64) / (count as f64 + 1.0);
        out.push(DVector::from_vec(grid.sample(|p| (-((p[0] - c).powi(2) + p[1] * p[1]) / (0.05 * x * x)).exp())));
    }
    out.truncate(count);
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolventConvergence {
    pub alphas: Vec<f64>,
    pub lambda: f64,
    /// `||u_alpha - u_loc||_{L^2(B)}`.
    pub gaps: Vec<f64>,
    pub local_norm: f64,
}

/// `(lambda + A^(alpha)) u_alpha = f` against `(lambda + A_loc) u_loc = f`,
/// zero data outside `B`.
pub fn resolvent_convergence(
    family: &AlphaFamily,
    grid: &Grid,
    coeff: &[(Matrix2, Point)],
    f: &DVector<f64>,
    lambda: f64,
    opts: &AssemblyOptions,
) -> Result<ResolventConvergence, MoscoError> {
    let a_loc = local_operator(grid, coeff);
    let u_loc = resolvent_matrix_solve(&a_loc, grid, lambda, f)?;
    let hd = grid.cell_volume();
    let interior = grid.interior_indices();
    let l2 = |w: &DVector<f64>| (hd * interior.iter().map(|&i| w[i] * w[i]).sum::<f64>()).sqrt();
    let gaps: Vec<f64> = family
        .kernels
        .par_iter()
        .map(|k| {
            let form = assemble(k, grid, opts)?;
            let u = resolvent_matrix_solve(&form.a(), grid, lambda, f)?;
            Ok(l2(&(u - &u_loc)))
        })
        .collect::<Result<_, MoscoError>>()?;
    Ok(ResolventConvergence { alphas: family.alphas(), lambda, gaps, local_norm: l2(&u_loc) })
}
