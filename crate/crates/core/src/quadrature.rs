//! Polar quadrature for singular kernels.
//!
//! Integrals are taken ray by ray: a midpoint rule in the angle (two rays in
//! 1D) and composite Gauss-Legendre on geometrically graded radial shells.
//! The part of a ray that the shells do not reach (next to the origin, or
//! beyond the last outer shell) is closed with the exact integral of the
//! power law fitted through the last two samples. The fitted exponent doubles
//! as the integrability test.

use gauss_quad::GaussLegendre;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Point;

/// Tolerance on the radial exponent `e + d` below which a singularity at the
/// origin (or above which a tail at infinity) is declared divergent.
pub const EXPONENT_TOL: f64 = 1e-9;

/// Shells per window in the far-field envelope.
const FAR_WINDOW: usize = 4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadratureError {
    #[error("integrand is not integrable at the origin: radial exponent {exponent:.6} in dimension {d}")]
    DivergentOrigin { exponent: f64, d: usize },
    #[error("integrand is not integrable at infinity: radial exponent {exponent:.6} in dimension {d}")]
    DivergentInfinity { exponent: f64, d: usize },
    #[error("invalid quadrature rule: {0}")]
    InvalidRule(String),
}

/// Resolution of the polar rule. Recorded in every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarRule {
    /// Number of inward shells (each shrinks by `ratio`).
    pub levels: usize,
    pub ratio: f64,
    /// Number of outward shells (each doubles).
    pub far_levels: usize,
    pub gauss_order: usize,
    /// Angular cells in 2D. A multiple of 8 puts the edges on multiples of pi/4.
    pub n_theta: usize,
    #[serde(skip)]
    nodes: Vec<(f64, f64)>,
}

impl Default for PolarRule {
    fn default() -> Self {
        Self::new(40, 0.5, 40, 8, 256).expect("default rule is valid")
    }
}

impl PolarRule {
    pub fn new(
        levels: usize,
        ratio: f64,
        far_levels: usize,
        gauss_order: usize,
        n_theta: usize,
    ) -> Result<Self, QuadratureError> {
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(QuadratureError::InvalidRule(format!("ratio {ratio} not in (0,1)")));
        }
        if levels == 0 || gauss_order < 2 || n_theta < 4 {
            return Err(QuadratureError::InvalidRule(
                "need levels >= 1, gauss_order >= 2, n_theta >= 4".into(),
            ));
        }
        let gl = GaussLegendre::new(gauss_order.try_into().expect("order >= 2"));
        let nodes = gl.as_node_weight_pairs().to_vec();
        Ok(Self { levels, ratio, far_levels, gauss_order, n_theta, nodes })
    }

    /// Twice the angular and Gauss resolution. Used for self-convergence checks.
    pub fn refined(&self) -> Self {
        Self::new(
            self.levels,
            self.ratio,
            self.far_levels,
            self.gauss_order * 2,
            self.n_theta * 2,
        )
        .expect("refinement of a valid rule is valid")
    }

    /// Rebuilds the Gauss nodes after deserialization.
    pub fn rebuilt(&self) -> Result<Self, QuadratureError> {
        Self::new(self.levels, self.ratio, self.far_levels, self.gauss_order, self.n_theta)
    }

    fn gauss(&self) -> &[(f64, f64)] {
        &self.nodes
    }

    /// Unit directions and their angular weights.
    pub fn directions(&self, d: usize) -> Vec<(Point, f64)> {
        if d == 1 {
            return vec![([1.0, 0.0], 1.0), ([-1.0, 0.0], 1.0)];
        }
        let dt = 2.0 * std::f64::consts::PI / self.n_theta as f64;
        (0..self.n_theta)
            .map(|k| {
                let t = (k as f64 + 0.5) * dt;
                ([t.cos(), t.sin()], dt)
            })
            .collect()
    }

    /// Gauss-Legendre over [a, b] of `r^(d-1) f(r)`, accumulated into `acc`.
    fn segment<const N: usize>(
        &self,
        a: f64,
        b: f64,
        d: usize,
        f: &mut impl FnMut(f64) -> [f64; N],
        acc: &mut [f64; N],
    ) {
        if b <= a {
            return;
        }
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        for &(x, w) in self.gauss() {
            let r = mid + half * x;
            let jac = if d == 1 { 1.0 } else { r };
            let v = f(r);
            for k in 0..N {
                acc[k] += w * half * jac * v[k];
            }
        }
    }

    /// Splits [a, b] at the breakpoints that fall strictly inside.
    fn split_segment<const N: usize>(
        &self,
        a: f64,
        b: f64,
        d: usize,
        breaks: &[f64],
        f: &mut impl FnMut(f64) -> [f64; N],
        acc: &mut [f64; N],
    ) {
        let mut lo = a;
        for &p in breaks {
            if p > lo && p < b {
                self.segment(lo, p, d, f, acc);
                lo = p;
            }
        }
        self.segment(lo, b, d, f, acc);
    }

    /// `int_0^rmax r^(d-1) f(r) dr` with shells graded towards 0.
    pub fn radial_near<const N: usize>(
        &self,
        rmax: f64,
        d: usize,
        breaks: &[f64],
        mut f: impl FnMut(f64) -> [f64; N],
    ) -> Result<[f64; N], QuadratureError> {
        let mut acc = [0.0; N];
        if rmax <= 0.0 {
            return Ok(acc);
        }
        let mut hi = rmax;
        for _ in 0..self.levels {
            let lo = hi * self.ratio;
            self.split_segment(lo, hi, d, breaks, &mut f, &mut acc);
            hi = lo;
        }
        // Power-law closure on (0, eps).
        let eps = hi;
        let f1 = f(eps);
        let f2 = f(eps * self.ratio);
        let dd = d as f64;
        for k in 0..N {
            if f1[k] == 0.0 && f2[k] == 0.0 {
                continue;
            }
            if f1[k] * f2[k] > 0.0 {
                let e = (f1[k] / f2[k]).ln() / (-self.ratio.ln());
                if e + dd <= EXPONENT_TOL {
                    return Err(QuadratureError::DivergentOrigin { exponent: e, d });
                }
                acc[k] += f1[k] * eps.powf(dd) / (e + dd);
            } else {
                // Bounded but sign-changing: the remainder is below eps^d.
                acc[k] += f1[k] * eps.powf(dd) / dd;
            }
        }
        Ok(acc)
    }

    /// `int_rmin^inf r^(d-1) f(r) dr` with doubling shells. The remainder is
    /// a geometric continuation of the last shell, with the ratio taken from
    /// the envelope `max |shell|` over two windows of `FAR_WINDOW` shells.
    /// Point values (and single shells) are useless once a bounded factor
    /// like `sin y` oscillates faster than the Gauss nodes resolve; the
    /// envelope still decays at the rate of the power law.
    pub fn radial_far<const N: usize>(
        &self,
        rmin: f64,
        d: usize,
        breaks: &[f64],
        mut f: impl FnMut(f64) -> [f64; N],
    ) -> Result<[f64; N], QuadratureError> {
        let levels = self.far_levels.max(2 * FAR_WINDOW);
        let mut acc = [0.0; N];
        let mut shells: Vec<[f64; N]> = Vec::with_capacity(levels);
        let mut lo = rmin;
        for _ in 0..levels {
            let hi = 2.0 * lo;
            let mut shell = [0.0; N];
            self.split_segment(lo, hi, d, breaks, &mut f, &mut shell);
            for k in 0..N {
                acc[k] += shell[k];
            }
            shells.push(shell);
            lo = hi;
        }
        let (older, newer) = shells[levels - 2 * FAR_WINDOW..].split_at(FAR_WINDOW);
        for k in 0..N {
            let env = |w: &[[f64; N]]| w.iter().map(|s| s[k].abs()).fold(0.0, f64::max);
            let (a, b) = (env(older), env(newer));
            if a == 0.0 && b == 0.0 {
                continue;
            }
            // shells of a power law r^e scale by 2^(e + d)
            let q = (b / a).powf(1.0 / FAR_WINDOW as f64);
            let e = q.log2() - d as f64;
            if !(e + d as f64 <= -EXPONENT_TOL) {
                return Err(QuadratureError::DivergentInfinity { exponent: e, d });
            }
            acc[k] += shells[levels - 1][k] * q / (1.0 - q);
        }
        Ok(acc)
    }

    /// Integral over `{h : |h| < reach(omega)}` of `f(h)`.
    pub fn integrate_near<const N: usize>(
        &self,
        d: usize,
        breaks: &[f64],
        reach: impl Fn(&Point) -> f64,
        f: impl Fn(&Point) -> [f64; N],
    ) -> Result<[f64; N], QuadratureError> {
        let mut acc = [0.0; N];
        for (w, wt) in self.directions(d) {
            let rmax = reach(&w);
            let ray = self.radial_near(rmax, d, breaks, |r| f(&[w[0] * r, w[1] * r]))?;
            for k in 0..N {
                acc[k] += wt * ray[k];
            }
        }
        Ok(acc)
    }

    /// Integral over `{h : |h| > start(omega)}` of `f(h)`.
    pub fn integrate_far<const N: usize>(
        &self,
        d: usize,
        breaks: &[f64],
        start: impl Fn(&Point) -> f64,
        f: impl Fn(&Point) -> [f64; N],
    ) -> Result<[f64; N], QuadratureError> {
        let mut acc = [0.0; N];
        for (w, wt) in self.directions(d) {
            let rmin = start(&w);
            let ray = self.radial_far(rmin, d, breaks, |r| f(&[w[0] * r, w[1] * r]))?;
            for k in 0..N {
                acc[k] += wt * ray[k];
            }
        }
        Ok(acc)
    }

    /// Integral over all of R^d of `f(h)`, split at `|h| = split(omega)`.
    pub fn integrate_whole<const N: usize>(
        &self,
        d: usize,
        breaks: &[f64],
        split: impl Fn(&Point) -> f64,
        f: impl Fn(&Point) -> [f64; N],
    ) -> Result<[f64; N], QuadratureError> {
        let near = self.integrate_near(d, breaks, &split, &f)?;
        let far = self.integrate_far(d, breaks, &split, &f)?;
        let mut out = [0.0; N];
        for k in 0..N {
            out[k] = near[k] + far[k];
        }
        Ok(out)
    }
}

/// Distance from `p` along the unit direction `w` to the sphere of radius
/// `radius` around `c`. `p` must lie inside the ball.
pub fn ray_exit_ball(p: &Point, w: &Point, c: &Point, radius: f64) -> f64 {
    let q = [p[0] - c[0], p[1] - c[1]];
    let b = q[0] * w[0] + q[1] * w[1];
    let disc = b * b - (q[0] * q[0] + q[1] * q[1]) + radius * radius;
    (-b + disc.max(0.0).sqrt()).max(0.0)
}

/// Distance from `p` along `w` to the boundary of the box `[-x, x]^d`.
pub fn ray_exit_box(p: &Point, w: &Point, half_width: f64, d: usize) -> f64 {
    let mut t = f64::INFINITY;
    for k in 0..d {
        if w[k] > 1e-15 {
            t = t.min((half_width - p[k]) / w[k]);
        } else if w[k] < -1e-15 {
            t = t.min((-half_width - p[k]) / w[k]);
        }
    }
    t.max(0.0)
}

/// Gauss-Legendre nodes and weights mapped to [a, b].
pub fn gauss_on(order: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let gl = GaussLegendre::new(order.max(2).try_into().expect("order >= 2"));
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    gl.as_node_weight_pairs()
        .into_iter()
        .map(|(x, w)| (mid + half * x, w * half))
        .collect()
}
