//! Jumping kernels K(x, y), their symmetric and antisymmetric parts, and the
//! families used throughout the laboratory.
//!
//! Every kernel offers two routes to `(K_s, K_a)`: [`Kernel::decompose`]
//! evaluates `K` in both orders, [`Kernel::split`] uses the family's
//! closed-form split. Assembly uses the former so that symmetry of the
//! discrete parts is exact; quadrature uses the latter.

mod cone;
mod fields;
mod spec;
mod time;

pub use cone::{Cone, DoubleCone};
pub use fields::{Coefficient, Potential, SampledField, TimeProfile};
pub use spec::{FamilySpec, KernelSpec, TimeSpec};
pub use time::{time_modulate, TimeKernel};

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;
use thiserror::Error;

use crate::geometry::{dist, dot, sub, Point};

/// Smallest separation at which a kernel may be evaluated.
pub const DIAGONAL_EPS: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KernelError {
    #[error("order alpha = {0} is outside (0, 2)")]
    Alpha(f64),
    #[error("dimension {0} is not supported (expected 1 or 2)")]
    Dimension(usize),
    #[error("drift order beta = {beta} must satisfy 0 < 2 beta < alpha = {alpha}")]
    Beta { beta: f64, alpha: f64 },
    #[error("coefficient bounds must satisfy 0 < lambda <= Lambda < inf (got {lambda}, {big_lambda})")]
    Bounds { lambda: f64, big_lambda: f64 },
    #[error("field leaves [{lambda}, {big_lambda}] at x = {x:?}, y = {y:?}: value {value}")]
    Range { x: Point, y: Point, value: f64, lambda: f64, big_lambda: f64 },
    #[error("field is not symmetric at x = {x:?}, y = {y:?}")]
    NotSymmetric { x: Point, y: Point },
    #[error("potential violates |V(x) - V(y)| <= lambda for |x - y| <= L at x = {x:?}, y = {y:?} (gap {gap})")]
    Nonnegativity { x: Point, y: Point, gap: f64 },
    #[error("cones C and D overlap")]
    ConeOverlap,
    #[error("invalid cone: {0}")]
    Cone(String),
    #[error("kernel evaluated on the diagonal at x = {x:?}, y = {y:?}")]
    Diagonal { x: Point, y: Point },
    #[error("time modulation invalid at t = {t}: {reason}")]
    Modulation { t: f64, reason: String },
    #[error("invalid kernel parameter: {0}")]
    Invalid(String),
}

/// `c_{d,alpha} = 2^alpha Gamma((d + alpha)/2) / (pi^{d/2} |Gamma(-alpha/2)|)`.
pub fn c_alpha_norm(d: usize, alpha: f64) -> Result<f64, KernelError> {
    if !(alpha > 0.0 && alpha < 2.0) {
        return Err(KernelError::Alpha(alpha));
    }
    if d == 0 {
        return Err(KernelError::Dimension(d));
    }
    let df = d as f64;
    Ok(2f64.powf(alpha) * gamma(0.5 * (df + alpha))
        / (std::f64::consts::PI.powf(0.5 * df) * gamma(-0.5 * alpha).abs()))
}

/// Largest truncation radius for which a potential with Hoelder constant
/// `seminorm` and exponent `gamma` keeps the drift kernel nonnegative.
pub fn max_truncation(lambda: f64, seminorm: f64, gamma: f64) -> f64 {
    if seminorm <= 0.0 {
        return f64::INFINITY;
    }
    (lambda / seminorm).powf(1.0 / gamma)
}

/// `D = (Lambda - lambda) / (Lambda + lambda)`.
pub fn coefficient_d(lambda: f64, big_lambda: f64) -> Result<f64, KernelError> {
    if !(lambda > 0.0) || big_lambda < lambda || !big_lambda.is_finite() {
        return Err(KernelError::Bounds { lambda, big_lambda });
    }
    Ok((big_lambda - lambda) / (big_lambda + lambda))
}

/// Lattice of sample points on which constructor preconditions are checked.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Validation {
    pub half_width: f64,
    pub points_per_axis: usize,
}

impl Default for Validation {
    fn default() -> Self {
        Self { half_width: 4.0, points_per_axis: 17 }
    }
}

impl Validation {
    pub fn points(&self, d: usize) -> Vec<Point> {
        let n = self.points_per_axis.max(2);
        let step = 2.0 * self.half_width / (n - 1) as f64;
        let axis: Vec<f64> = (0..n).map(|i| -self.half_width + step * i as f64).collect();
        if d == 1 {
            axis.iter().map(|&x| [x, 0.0]).collect()
        } else {
            let mut pts = Vec::with_capacity(n * n);
            for &y in &axis {
                for &x in &axis {
                    pts.push([x, y]);
                }
            }
            pts
        }
    }
}

/// Symmetric base kernel `J^alpha = scale |h|^{-d-alpha}` (times `c_{d,alpha}`
/// when normalized).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Base {
    #[serde(default = "one")]
    pub scale: f64,
    #[serde(default)]
    pub normalized: bool,
}

fn one() -> f64 {
    1.0
}

impl Default for Base {
    fn default() -> Self {
        Self { scale: 1.0, normalized: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// `K = g(x, y) J^alpha(x, y)`.
    Coefficient { g: Coefficient, base: Base, lambda: f64, big_lambda: f64 },
    /// `K = (j(x, y) + (V(x) - V(y)) 1{|x-y| <= L}) c_{d,alpha} |x-y|^{-d-alpha}`.
    Drift { j: Coefficient, v: Potential, l: f64, lambda: f64, big_lambda: f64 },
    /// `K = |h|^{-d-alpha} 1_D(h) + |h|^{-d-beta} 1_C(h)`, `h = x - y`.
    Cone { beta: f64, c: Cone, dcone: DoubleCone },
    /// `K = scale |h|^{-d-alpha} + (b . h/|h|) |h|^{-d-beta} 1{|h| <= radius}`.
    Custom { scale: f64, drift: Point, beta: f64, radius: f64 },
}

impl Family {
    pub fn tag(&self) -> &'static str {
        match self {
            Family::Coefficient { .. } => "coefficient",
            Family::Drift { .. } => "drift",
            Family::Cone { .. } => "cone",
            Family::Custom { .. } => "custom",
        }
    }
}

/// An immutable jumping kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    d: usize,
    alpha: f64,
    family: Family,
    /// Normalization `c_{d,alpha}`, cached.
    c: f64,
    /// `K = sym * K_s + anti * K_a` of the underlying family.
    sym: f64,
    anti: f64,
    /// Evaluate `K(y, x)` instead of `K(x, y)`.
    swapped: bool,
}

fn check_common(d: usize, alpha: f64) -> Result<f64, KernelError> {
    if d != 1 && d != 2 {
        return Err(KernelError::Dimension(d));
    }
    c_alpha_norm(d, alpha)
}

fn check_bounds(lambda: f64, big_lambda: f64) -> Result<(), KernelError> {
    coefficient_d(lambda, big_lambda).map(|_| ())
}

fn check_range(
    g: &Coefficient,
    pts: &[Point],
    lambda: f64,
    big_lambda: f64,
) -> Result<(), KernelError> {
    for x in pts {
        for y in pts {
            let value = g.value(x, y);
            if !(value >= lambda - 1e-12 && value <= big_lambda + 1e-12) {
                return Err(KernelError::Range { x: *x, y: *y, value, lambda, big_lambda });
            }
        }
    }
    Ok(())
}

impl Kernel {
    /// `K = g J^alpha` with `g` validated against `[lambda, Lambda]`.
    pub fn coefficient(
        d: usize,
        alpha: f64,
        g: Coefficient,
        base: Base,
        lambda: f64,
        big_lambda: f64,
        validation: &Validation,
    ) -> Result<Self, KernelError> {
        let c = check_common(d, alpha)?;
        check_bounds(lambda, big_lambda)?;
        if !(base.scale > 0.0 && base.scale.is_finite()) {
            return Err(KernelError::Invalid(format!("base scale {} must be positive", base.scale)));
        }
        check_range(&g, &validation.points(d), lambda, big_lambda)?;
        Ok(Self::raw(d, alpha, c, Family::Coefficient { g, base, lambda, big_lambda }))
    }

    /// Symmetric stable kernel `|h|^{-d-alpha}`, optionally times `c_{d,alpha}`.
    pub fn stable(d: usize, alpha: f64, normalized: bool) -> Result<Self, KernelError> {
        let c = check_common(d, alpha)?;
        Ok(Self::raw(
            d,
            alpha,
            c,
            Family::Coefficient {
                g: Coefficient::Constant { value: 1.0 },
                base: Base { scale: 1.0, normalized },
                lambda: 1.0,
                big_lambda: 1.0,
            },
        ))
    }

    /// Drift family. `l = f64::INFINITY` means no truncation.
    pub fn drift(
        d: usize,
        alpha: f64,
        j: Coefficient,
        v: Potential,
        l: f64,
        lambda: f64,
        big_lambda: f64,
        validation: &Validation,
    ) -> Result<Self, KernelError> {
        let c = check_common(d, alpha)?;
        check_bounds(lambda, big_lambda)?;
        if !(l > 0.0) {
            return Err(KernelError::Invalid(format!("truncation L = {l} must be positive")));
        }
        if let Potential::Sampled(s) = &v {
            if !s.is_consistent() {
                return Err(KernelError::Invalid("sampled potential is malformed".into()));
            }
        }
        let pts = validation.points(d);
        check_range(&j, &pts, lambda, big_lambda)?;
        for x in &pts {
            for y in &pts {
                if (j.value(x, y) - j.value(y, x)).abs() > 1e-12 {
                    return Err(KernelError::NotSymmetric { x: *x, y: *y });
                }
                if dist(x, y) <= l {
                    let gap = (v.value(x) - v.value(y)).abs();
                    if gap > lambda * (1.0 + 1e-12) {
                        return Err(KernelError::Nonnegativity { x: *x, y: *y, gap });
                    }
                }
            }
        }
        Ok(Self::raw(d, alpha, c, Family::Drift { j, v, l, lambda, big_lambda }))
    }

    /// Cone family; `0 < 2 beta < alpha` and `C`, `D` disjoint unless `D` is
    /// the full space.
    pub fn cone(
        d: usize,
        alpha: f64,
        beta: f64,
        c: Cone,
        dcone: DoubleCone,
    ) -> Result<Self, KernelError> {
        let cn = check_common(d, alpha)?;
        if !(beta > 0.0 && 2.0 * beta < alpha) {
            return Err(KernelError::Beta { beta, alpha });
        }
        let c = Cone::new(c.axis, c.half_angle, d)?;
        let dcone = dcone.validated(d)?;
        if dcone != DoubleCone::Full && !dcone.disjoint_from(&c) {
            return Err(KernelError::ConeOverlap);
        }
        Ok(Self::raw(d, alpha, cn, Family::Cone { beta, c, dcone }))
    }

    /// Stable kernel plus a truncated odd drift of order beta. Requires
    /// `|b| radius^(alpha - beta) <= scale` so that `K >= 0`.
    pub fn custom(
        d: usize,
        alpha: f64,
        scale: f64,
        drift: Point,
        beta: f64,
        radius: f64,
    ) -> Result<Self, KernelError> {
        let c = check_common(d, alpha)?;
        if !(beta > 0.0 && beta < alpha) {
            return Err(KernelError::Beta { beta, alpha });
        }
        if !(scale > 0.0 && radius > 0.0 && radius.is_finite()) {
            return Err(KernelError::Invalid("custom kernel needs scale > 0, 0 < radius < inf".into()));
        }
        let b = if d == 1 { [drift[0], 0.0] } else { drift };
        if b[0].hypot(b[1]) * radius.powf(alpha - beta) > scale * (1.0 + 1e-12) {
            return Err(KernelError::Invalid(
                "custom drift too strong: |b| radius^(alpha - beta) > scale".into(),
            ));
        }
        Ok(Self::raw(d, alpha, c, Family::Custom { scale, drift: b, beta, radius }))
    }

    fn raw(d: usize, alpha: f64, c: f64, family: Family) -> Self {
        Self { d, alpha, family, c, sym: 1.0, anti: 1.0, swapped: false }
    }

    pub fn d(&self) -> usize {
        self.d
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn family(&self) -> &Family {
        &self.family
    }
    pub fn c_norm(&self) -> f64 {
        self.c
    }
    pub fn factors(&self) -> (f64, f64) {
        (self.sym, self.anti)
    }
    pub fn is_swapped(&self) -> bool {
        self.swapped
    }

    /// The dual kernel `(x, y) -> K(y, x)`.
    pub fn dual(&self) -> Self {
        let mut k = self.clone();
        k.swapped = !k.swapped;
        k
    }

    /// `factor * K`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut k = self.clone();
        k.sym *= factor;
        k.anti *= factor;
        k
    }

    /// `sym * K_s + anti * K_a`; caller guarantees `|anti| <= sym`.
    pub(crate) fn modulated(&self, sym: f64, anti: f64) -> Self {
        let mut k = self.clone();
        k.sym *= sym;
        k.anti *= anti;
        k
    }

    /// Drift order where the family has one.
    pub fn beta(&self) -> Option<f64> {
        match &self.family {
            Family::Cone { beta, .. } | Family::Custom { beta, .. } => Some(*beta),
            _ => None,
        }
    }

    /// `(lambda, Lambda)` of the coefficient and drift families.
    pub fn bounds(&self) -> Option<(f64, f64)> {
        match &self.family {
            Family::Coefficient { lambda, big_lambda, .. }
            | Family::Drift { lambda, big_lambda, .. } => Some((*lambda, *big_lambda)),
            _ => None,
        }
    }

    /// Radii where the kernel jumps along rays; quadrature splits there.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.family {
            Family::Drift { l, .. } if l.is_finite() => vec![*l],
            Family::Custom { radius, .. } => vec![*radius],
            _ => vec![],
        }
    }

    /// True when `K_s(x, x + h)` does not depend on `x`.
    pub fn symmetric_part_is_translation_invariant(&self) -> bool {
        match &self.family {
            Family::Coefficient { g, .. } => {
                matches!(g, Coefficient::Constant { .. } | Coefficient::SinCoefficient { .. })
            }
            Family::Drift { j, .. } => matches!(j, Coefficient::Constant { .. }),
            Family::Cone { .. } | Family::Custom { .. } => true,
        }
    }

    /// True when `K_a` vanishes identically by construction.
    pub fn is_symmetric(&self) -> bool {
        if self.anti == 0.0 {
            return true;
        }
        match &self.family {
            Family::Coefficient { g, .. } => g.is_symmetric_by_construction(),
            Family::Drift { v, j, .. } => {
                matches!(v, Potential::Zero) && j.is_symmetric_by_construction()
            }
            Family::Cone { .. } => false,
            Family::Custom { drift, .. } => drift[0] == 0.0 && drift[1] == 0.0,
        }
    }

    /// `K(x, y)` from the family formula (no symmetrization).
    fn raw_eval(&self, x: &Point, y: &Point, r: f64) -> f64 {
        let d = self.d as f64;
        match &self.family {
            Family::Coefficient { g, base, .. } => {
                let cn = if base.normalized { self.c } else { 1.0 };
                g.value(x, y) * base.scale * cn * r.powf(-d - self.alpha)
            }
            Family::Drift { j, v, l, .. } => {
                let dv = if r <= *l { v.value(x) - v.value(y) } else { 0.0 };
                (j.value(x, y) + dv) * self.c * r.powf(-d - self.alpha)
            }
            Family::Cone { beta, c, dcone } => {
                let h = sub(x, y);
                let mut k = 0.0;
                if dcone.contains(&h, r) {
                    k += r.powf(-d - self.alpha);
                }
                if c.contains(&h, r) {
                    k += r.powf(-d - beta);
                }
                k
            }
            Family::Custom { scale, drift, beta, radius } => {
                let h = sub(x, y);
                let mut k = scale * r.powf(-d - self.alpha);
                if r <= *radius {
                    k += dot(drift, &h) / r * r.powf(-d - beta);
                }
                k
            }
        }
    }

    /// Closed-form `(K_s, K_a)` of the underlying family at `(x, y)`.
    fn raw_split(&self, x: &Point, y: &Point, r: f64) -> (f64, f64) {
        let d = self.d as f64;
        match &self.family {
            Family::Coefficient { g, base, .. } => {
                let cn = if base.normalized { self.c } else { 1.0 };
                let j = base.scale * cn * r.powf(-d - self.alpha);
                let (gxy, gyx) = (g.value(x, y), g.value(y, x));
                (0.5 * (gxy + gyx) * j, 0.5 * (gxy - gyx) * j)
            }
            Family::Drift { j, v, l, .. } => {
                let s = self.c * r.powf(-d - self.alpha);
                let (jxy, jyx) = (j.value(x, y), j.value(y, x));
                let dv = if r <= *l { v.value(x) - v.value(y) } else { 0.0 };
                (0.5 * (jxy + jyx) * s, (0.5 * (jxy - jyx) + dv) * s)
            }
            Family::Cone { beta, c, dcone } => {
                let h = sub(x, y);
                let mh = [-h[0], -h[1]];
                let p = r.powf(-d - beta);
                let (cp, cm) = (c.contains(&h, r), c.contains(&mh, r));
                let ind = |b: bool| if b { 1.0 } else { 0.0 };
                let ks = if dcone.contains(&h, r) { r.powf(-d - self.alpha) } else { 0.0 }
                    + 0.5 * p * (ind(cp) + ind(cm));
                (ks, 0.5 * p * (ind(cp) - ind(cm)))
            }
            Family::Custom { scale, drift, beta, radius } => {
                let h = sub(x, y);
                let ka = if r <= *radius { dot(drift, &h) / r * r.powf(-d - beta) } else { 0.0 };
                (scale * r.powf(-d - self.alpha), ka)
            }
        }
    }

    fn separation(&self, x: &Point, y: &Point) -> Result<f64, KernelError> {
        let r = dist(x, y);
        if !(r >= DIAGONAL_EPS) {
            return Err(KernelError::Diagonal { x: *x, y: *y });
        }
        Ok(r)
    }

    fn unit_factors(&self) -> bool {
        self.sym == 1.0 && self.anti == 1.0
    }

    /// `K(x, y)`; rejects `|x - y| < 1e-14`.
    pub fn eval(&self, x: &Point, y: &Point) -> Result<f64, KernelError> {
        let r = self.separation(x, y)?;
        Ok(self.eval_at(x, y, r))
    }

    #[inline]
    pub(crate) fn eval_at(&self, x: &Point, y: &Point, r: f64) -> f64 {
        let (x, y) = if self.swapped { (y, x) } else { (x, y) };
        if self.unit_factors() {
            self.raw_eval(x, y, r)
        } else {
            let (ks, ka) = self.raw_split(x, y, r);
            self.sym * ks + self.anti * ka
        }
    }

    /// Closed-form split `(K_s(x, y), K_a(x, y))` of this kernel.
    pub fn split(&self, x: &Point, y: &Point) -> Result<(f64, f64), KernelError> {
        let r = self.separation(x, y)?;
        Ok(self.split_at(x, y, r))
    }

    #[inline]
    pub(crate) fn split_at(&self, x: &Point, y: &Point, r: f64) -> (f64, f64) {
        let (ks, ka) = self.raw_split(x, y, r);
        let ka = if self.swapped { -ka } else { ka };
        (self.sym * ks, self.anti * ka)
    }

    /// `K_s(x, y)` from the closed-form split.
    pub fn symmetric(&self, x: &Point, y: &Point) -> Result<f64, KernelError> {
        self.split(x, y).map(|s| s.0)
    }

    /// `K_a(x, y)` from the closed-form split.
    pub fn antisymmetric(&self, x: &Point, y: &Point) -> Result<f64, KernelError> {
        self.split(x, y).map(|s| s.1)
    }

    /// `((K(x,y) + K(y,x))/2, (K(x,y) - K(y,x))/2)` from two evaluations.
    pub fn decompose(&self, x: &Point, y: &Point) -> Result<(f64, f64), KernelError> {
        let r = self.separation(x, y)?;
        Ok(self.decompose_at(x, y, r))
    }

    #[inline]
    pub(crate) fn decompose_at(&self, x: &Point, y: &Point, r: f64) -> (f64, f64) {
        let kxy = self.eval_at(x, y, r);
        let kyx = self.eval_at(y, x, r);
        (0.5 * (kxy + kyx), 0.5 * (kxy - kyx))
    }

    /// Short human-readable description for reports.
    pub fn describe(&self) -> String {
        let mut s = format!("{} d={} alpha={}", self.family.tag(), self.d, self.alpha);
        if let Some(b) = self.beta() {
            s.push_str(&format!(" beta={b}"));
        }
        if !self.unit_factors() {
            s.push_str(&format!(" factors=({}, {})", self.sym, self.anti));
        }
        if self.swapped {
            s.push_str(" dual");
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_4, PI};

    fn cone2d() -> Kernel {
        Kernel::cone(
            2,
            1.5,
            0.5,
            Cone { axis: [1.0, 0.0], half_angle: FRAC_PI_4 },
            DoubleCone::Cone { axis: [0.0, 1.0], half_angle: FRAC_PI_4 },
        )
        .unwrap()
    }

    #[test]
    fn normalization_constant_oracles() {
        // Gamma(-1/2) = -2 sqrt(pi) gives c_{1,1} = 1/pi.
        assert!((c_alpha_norm(1, 1.0).unwrap() - 1.0 / PI).abs() < 1e-12);
        // Multiprecision value: 0.159154943091895335768883763372514362...
        assert_relative_eq!(c_alpha_norm(2, 1.0).unwrap(), 0.159_154_943_091_895_34, max_relative = 1e-13);
        // Gamma(-alpha/2) has a pole at alpha = 2, so c_{d,alpha} vanishes
        // there: c_{1,alpha} / (2 - alpha) -> 1 and c_{2,alpha} / (2 - alpha) -> 2/pi.
        let a = 2.0 - 1e-5;
        assert!((c_alpha_norm(1, a).unwrap() / (2.0 - a) - 1.0).abs() < 1e-4);
        assert!((c_alpha_norm(2, a).unwrap() / (2.0 - a) - 2.0 / PI).abs() < 1e-4);
        assert!(c_alpha_norm(1, 2.0).is_err());
        assert!(c_alpha_norm(1, 0.0).is_err());
    }

    #[test]
    fn coefficient_split_matches_formula() {
        let g = Coefficient::SinCoefficient { mean: 2.0, amplitude: 0.5 };
        let k = Kernel::coefficient(1, 1.0, g, Base::default(), 1.0, 3.0, &Validation::default())
            .unwrap();
        let (x, y) = ([0.7, 0.0], [-0.4, 0.0]);
        let j = (1.1f64).powf(-2.0);
        let (ks, ka) = k.decompose(&x, &y).unwrap();
        assert_relative_eq!(ka, 0.5 * (0.7f64.sin() - (-0.4f64).sin()) * j, max_relative = 1e-13);
        assert_relative_eq!(ks, 2.0 * j, max_relative = 1e-13);
    }

    #[test]
    fn full_amplitude_sin_rejected_on_1_3() {
        let g = Coefficient::SinCoefficient { mean: 2.0, amplitude: 1.0 };
        let r = Kernel::coefficient(1, 1.0, g, Base::default(), 1.0, 3.0, &Validation::default());
        assert!(matches!(r, Err(KernelError::Range { .. })));
    }

    #[test]
    fn decompose_arithmetic() {
        // a kernel with K(x,y) = 3, K(y,x) = 1 at a chosen pair
        let k = Kernel::custom(1, 1.0, 2.0, [1.0, 0.0], 0.5, 1.0).unwrap();
        let (x, y) = ([1.0, 0.0], [0.0, 0.0]);
        assert_eq!(k.eval(&x, &y).unwrap(), 3.0);
        assert_eq!(k.eval(&y, &x).unwrap(), 1.0);
        assert_eq!(k.decompose(&x, &y).unwrap(), (2.0, 1.0));
    }

    #[test]
    fn cone_pointwise_cases() {
        let k = cone2d();
        let o = [0.0, 0.0];
        // x - y in C
        let x = [0.5, 0.1];
        let r = 0.5f64.hypot(0.1);
        let (ks, ka) = k.decompose(&x, &o).unwrap();
        assert_relative_eq!(ka, 0.5 * r.powf(-2.5), max_relative = 1e-14);
        assert_relative_eq!(ks, 0.5 * r.powf(-2.5), max_relative = 1e-14);
        assert_eq!(k.split(&x, &o).unwrap(), (ks, ka));
        // y - x in C
        let (_, ka2) = k.decompose(&o, &x).unwrap();
        assert_relative_eq!(ka2, -0.5 * r.powf(-2.5), max_relative = 1e-14);
        // x - y in D only
        let x = [0.1, -0.5];
        let (ks, ka) = k.decompose(&x, &o).unwrap();
        assert_eq!(ka, 0.0);
        assert_relative_eq!(ks, r.powf(-3.5), max_relative = 1e-14);
        // x - y in -C and outside D: no support
        let x = [-0.5, 0.1];
        assert!(k.eval(&x, &o).unwrap() == 0.0);
    }

    #[test]
    fn cone_rejections() {
        let c = Cone { axis: [1.0, 0.0], half_angle: FRAC_PI_4 };
        let d = DoubleCone::Cone { axis: [0.0, 1.0], half_angle: FRAC_PI_4 };
        assert!(matches!(Kernel::cone(2, 1.0, 0.5, c, d), Err(KernelError::Beta { .. })));
        let wide = DoubleCone::Cone { axis: [0.0, 1.0], half_angle: 1.2 };
        assert!(matches!(Kernel::cone(2, 1.5, 0.5, c, wide), Err(KernelError::ConeOverlap)));
    }

    #[test]
    fn diagonal_rejected() {
        let k = Kernel::stable(1, 1.0, true).unwrap();
        assert!(matches!(k.eval(&[0.2, 0.0], &[0.2, 0.0]), Err(KernelError::Diagonal { .. })));
    }

    #[test]
    fn drift_lcond_and_linear_split() {
        // [V]_{C^{0,1/2}} = 1, lambda = 1: L <= 1.
        assert_eq!(max_truncation(1.0, 1.0, 0.5), 1.0);
        let v = Potential::Linear { b: [0.5, 0.0] };
        let k = Kernel::drift(
            1,
            1.0,
            Coefficient::Constant { value: 1.0 },
            v,
            1.0,
            1.0,
            1.0,
            &Validation::default(),
        )
        .unwrap();
        let (x, y) = ([0.3, 0.0], [-0.2, 0.0]);
        let (_, ka) = k.decompose(&x, &y).unwrap();
        let c = c_alpha_norm(1, 1.0).unwrap();
        assert_relative_eq!(ka, 0.5 * 0.5 * c * 0.5f64.powf(-2.0), max_relative = 1e-13);
        // beyond L the antisymmetric part vanishes
        let (_, ka) = k.decompose(&[1.5, 0.0], &[0.0, 0.0]).unwrap();
        assert_eq!(ka, 0.0);
    }

    #[test]
    fn drift_rejects_negative_kernel() {
        let v = Potential::Linear { b: [2.0, 0.0] };
        let r = Kernel::drift(
            1,
            1.0,
            Coefficient::Constant { value: 1.0 },
            v,
            1.0,
            1.0,
            1.0,
            &Validation::default(),
        );
        assert!(matches!(r, Err(KernelError::Nonnegativity { .. })));
    }

    #[test]
    fn dual_and_scaling() {
        let k = cone2d();
        let (x, y) = ([0.5, 0.1], [0.0, 0.0]);
        assert_eq!(k.dual().eval(&x, &y).unwrap(), k.eval(&y, &x).unwrap());
        assert_eq!(k.dual().dual(), k);
        let s = k.scaled(3.0);
        assert_relative_eq!(s.eval(&x, &y).unwrap(), 3.0 * k.eval(&x, &y).unwrap(), max_relative = 1e-15);
    }
}
