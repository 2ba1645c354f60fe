//! Chain-rule substitutes `g(t) = t^{-p}`, `G` with `G' = (-g')^{1/2}`, and
//! the elementary inequalities built on them, as checkable predicates.
//!
//! Differences `g(t) - g(s)` and `G(t) - G(s)` are evaluated through `expm1`
//! so that nearby arguments and exponents close to 1 do not cancel.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AlgebraError {
    #[error("exponent p = {0} must be positive and finite")]
    Exponent(f64),
    #[error("argument {0} must be positive")]
    NonPositive(f64),
    #[error("weight {0} must be nonnegative")]
    NegativeWeight(f64),
    #[error("delta = {0} must lie in (0, 1)")]
    Delta(f64),
    #[error("G(t) = G(s) with t = {t} != s = {s}; G is strictly monotone so this is a bug")]
    Collapse { t: f64, s: f64 },
}

/// The pair `(g, G)` for a fixed exponent `p > 0`. `p = 1` is the logarithm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChainRulePair {
    p: f64,
}

impl ChainRulePair {
    pub fn new(p: f64) -> Result<Self, AlgebraError> {
        if !(p > 0.0 && p.is_finite()) {
            return Err(AlgebraError::Exponent(p));
        }
        Ok(Self { p })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    fn is_log(&self) -> bool {
        self.p == 1.0
    }

    /// `(1 - p) / 2`, the exponent of `G`.
    fn q(&self) -> f64 {
        0.5 * (1.0 - self.p)
    }

    pub fn g(&self, t: f64) -> f64 {
        t.powf(-self.p)
    }

    #[allow(non_snake_case)]
    pub fn G(&self, t: f64) -> f64 {
        if self.is_log() {
            t.ln()
        } else {
            2.0 * self.p.sqrt() / (1.0 - self.p) * t.powf(self.q())
        }
    }

    /// `G'(t) = (-g'(t))^{1/2} = sqrt(p) t^{(-p-1)/2}`.
    #[allow(non_snake_case)]
    pub fn G_prime(&self, t: f64) -> f64 {
        (self.p * t.powf(-self.p - 1.0)).sqrt()
    }

    /// `g(t) - g(s)`.
    pub fn g_diff(&self, t: f64, s: f64) -> f64 {
        s.powf(-self.p) * (-self.p * (t / s).ln()).exp_m1()
    }

    /// `G(t) - G(s)`.
    #[allow(non_snake_case)]
    pub fn G_diff(&self, t: f64, s: f64) -> f64 {
        let l = (t / s).ln();
        if self.is_log() {
            l
        } else {
            // 2 sqrt(p)/(1-p) s^q (e^{q l} - 1) = sqrt(p) s^q l * expm1(q l)/(q l)
            let q = self.q();
            let ql = q * l;
            let ratio = if ql == 0.0 { 1.0 } else { ql.exp_m1() / ql };
            self.p.sqrt() * s.powf(q) * l * ratio
        }
    }
}

/// Value rows of the identity lemma at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[allow(non_snake_case)]
pub struct PairValues {
    pub g: f64,
    pub G: f64,
    pub G_prime: f64,
    pub t_g: f64,
    pub G_sq: f64,
    pub t_G_prime: f64,
    pub g_over_G_prime: f64,
    pub sqrt_t_g: f64,
}

/// Evaluates the pair and its composites from the definitions.
pub fn eval_pair(pair: &ChainRulePair, t: f64) -> Result<PairValues, AlgebraError> {
    if !(t > 0.0) {
        return Err(AlgebraError::NonPositive(t));
    }
    let g = pair.g(t);
    let big = pair.G(t);
    let gp = pair.G_prime(t);
    Ok(PairValues {
        g,
        G: big,
        G_prime: gp,
        t_g: t * g,
        G_sq: big * big,
        t_G_prime: t * gp,
        g_over_G_prime: g / gp,
        sqrt_t_g: (t * g).sqrt(),
    })
}

/// The printed closed forms of the same rows.
pub fn closed_forms(pair: &ChainRulePair, t: f64) -> Result<PairValues, AlgebraError> {
    if !(t > 0.0) {
        return Err(AlgebraError::NonPositive(t));
    }
    let p = pair.p;
    let q = 0.5 * (1.0 - p);
    if pair.is_log() {
        let l = t.ln();
        return Ok(PairValues {
            g: 1.0 / t,
            G: l,
            G_prime: 1.0 / t,
            t_g: 1.0,
            G_sq: l * l,
            t_G_prime: 1.0,
            g_over_G_prime: 1.0,
            sqrt_t_g: 1.0,
        });
    }
    let tq = t.powf(q);
    Ok(PairValues {
        g: t.powf(-p),
        G: 2.0 * p.sqrt() / (1.0 - p) * tq,
        G_prime: p.sqrt() * t.powf(0.5 * (-p - 1.0)),
        t_g: t.powf(1.0 - p),
        G_sq: 4.0 * p / ((p - 1.0) * (p - 1.0)) * t.powf(1.0 - p),
        t_G_prime: p.sqrt() * tq,
        g_over_G_prime: tq / p.sqrt(),
        sqrt_t_g: tq,
    })
}

/// One checked inequality `lesser <= greater`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Inequality {
    pub name: &'static str,
    pub lesser: f64,
    pub greater: f64,
    /// `(greater - lesser) / max(|greater|, |lesser|)`; 0 when both vanish.
    pub margin: f64,
}

impl Inequality {
    pub fn new(name: &'static str, lesser: f64, greater: f64) -> Self {
        let scale = greater.abs().max(lesser.abs());
        let margin = if scale == 0.0 { 0.0 } else { (greater - lesser) / scale };
        Self { name, lesser, greater, margin }
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.margin >= -tol
    }
}

/// The three two-point estimates for `(g, G)` at `(s, t)`.
pub fn check_genaux(pair: &ChainRulePair, s: f64, t: f64) -> Result<Vec<Inequality>, AlgebraError> {
    for v in [s, t] {
        if !(v > 0.0) {
            return Err(AlgebraError::NonPositive(v));
        }
    }
    let (gpt, gps) = (pair.G_prime(t), pair.G_prime(s));
    let (gt, gs) = (pair.g(t), pair.g(s));
    let lhs1 = (s - t) * pair.g_diff(t, s);
    let dg_big = pair.G_diff(t, s);
    let rhs1 = dg_big * dg_big;

    // Quotients, with their limits on the diagonal.
    let (q_ts, q_g) = if s == t {
        (1.0 / gpt, gpt)
    } else {
        if dg_big == 0.0 {
            return Err(AlgebraError::Collapse { t, s });
        }
        ((t - s).abs() / dg_big.abs(), pair.g_diff(t, s).abs() / dg_big.abs())
    };
    Ok(vec![
        Inequality::new("energy-lower", rhs1, lhs1),
        Inequality::new("increment-ratio", q_ts, (1.0 / gpt).max(1.0 / gps)),
        Inequality::new("increment-ratio-weighted", gt.min(gs) * q_ts, (gt / gpt).max(gs / gps)),
        Inequality::new("g-ratio", q_g, gpt.max(gps)),
        Inequality::new("g-ratio-weighted", t.min(s) * q_g, (t * gpt).max(s * gps)),
    ])
}

/// The two cutoff-weighted estimates and the Young-type estimate.
#[allow(non_snake_case)]
pub fn check_weighted(
    tau1: f64,
    tau2: f64,
    Gt: f64,
    Gs: f64,
    delta: f64,
) -> Result<Vec<Inequality>, AlgebraError> {
    for tau in [tau1, tau2] {
        if !(tau >= 0.0) {
            return Err(AlgebraError::NegativeWeight(tau));
        }
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(AlgebraError::Delta(delta));
    }
    let lo = (tau1 * tau1).min(tau2 * tau2);
    let hi = (tau1 * tau1).max(tau2 * tau2);
    let dg = (Gt - Gs) * (Gt - Gs);
    let mixed = (tau1 * Gt - tau2 * Gs).powi(2);
    let dtau = (tau1 - tau2) * (tau1 - tau2);
    let gmax = (Gt * Gt).max(Gs * Gs);
    Ok(vec![
        Inequality::new("cutoff-lower", 0.5 * mixed - dtau * gmax, lo * dg),
        Inequality::new("cutoff-upper", hi * dg, 2.0 * mixed + 2.0 * dtau * gmax),
        Inequality::new(
            "young-split",
            hi,
            (1.0 + delta) * lo + (1.0 + delta) / delta * dtau,
        ),
    ])
}

/// The logarithmic replacement of the lower cutoff estimate. A vanishing weight kills the
/// first term on the right.
pub fn check_log_weight(tau1: f64, tau2: f64, t: f64, s: f64) -> Result<Inequality, AlgebraError> {
    for tau in [tau1, tau2] {
        if !(tau >= 0.0) {
            return Err(AlgebraError::NegativeWeight(tau));
        }
    }
    for v in [t, s] {
        if !(v > 0.0) {
            return Err(AlgebraError::NonPositive(v));
        }
    }
    let lo = (tau1 * tau1).min(tau2 * tau2);
    let x = (t / s).ln();
    let weighted = if lo == 0.0 { 0.0 } else { 0.5 * lo * (x - (tau1 / tau2).ln()).powi(2) };
    Ok(Inequality::new("log-cutoff-lower", weighted - (tau1 - tau2).powi(2), lo * x * x))
}

/// Summary of a randomized sweep of one inequality or identity row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaSummary {
    pub lemma: String,
    pub samples: usize,
    pub min_margin: f64,
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

/// Randomized sweep over `p in [0.1, 10]` (every tenth sample at `p = 1`),
/// `t, s in [1e-3, 1e3]` log-uniform, weights in `[0, 2]` with occasional
/// zeros, `delta in (0, 1)`.
///
/// Identity rows report `-|relative error|` as their margin, and the
/// derivative row compares `G'` with a centered difference at step `1e-5 t`.
pub fn sweep(samples: usize, seed: u64) -> Result<Vec<LemmaSummary>, AlgebraError> {
    use std::collections::BTreeMap;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut table: BTreeMap<String, (usize, f64)> = BTreeMap::new();
    let mut record = |name: &str, margin: f64| {
        let e = table.entry(name.to_string()).or_insert((0, f64::INFINITY));
        e.0 += 1;
        e.1 = e.1.min(margin);
    };
    for k in 0..samples {
        let p = if k % 10 == 0 { 1.0 } else { log_uniform(&mut rng, 0.1, 10.0) };
        let pair = ChainRulePair::new(p)?;
        let t = log_uniform(&mut rng, 1e-3, 1e3);
        let s = log_uniform(&mut rng, 1e-3, 1e3);
        let weight = |rng: &mut ChaCha8Rng| {
            if rng.gen_bool(0.05) {
                0.0
            } else {
                rng.gen_range(0.0..2.0)
            }
        };
        let tau1 = weight(&mut rng);
        let tau2 = weight(&mut rng);
        let delta = rng.gen_range(1e-6..1.0);

        for ineq in check_genaux(&pair, s, t)? {
            record(ineq.name, ineq.margin);
        }
        for ineq in check_weighted(tau1, tau2, pair.G(t), pair.G(s), delta)? {
            record(ineq.name, ineq.margin);
        }
        let lw = check_log_weight(tau1, tau2, t, s)?;
        record(lw.name, lw.margin);

        let a = eval_pair(&pair, t)?;
        let b = closed_forms(&pair, t)?;
        let rows = [
            ("identity:g/G'", a.g_over_G_prime, b.g_over_G_prime),
            ("identity:G'", a.G_prime, b.G_prime),
            ("identity:t g", a.t_g, b.t_g),
            ("identity:G^2", a.G_sq, b.G_sq),
            ("identity:t G'", a.t_G_prime, b.t_G_prime),
            ("identity:sqrt(t g)", a.sqrt_t_g, b.sqrt_t_g),
        ];
        for (name, x, y) in rows {
            let scale = x.abs().max(y.abs());
            record(name, if scale == 0.0 { 0.0 } else { -(x - y).abs() / scale });
        }
        let hstep = 1e-5 * t;
        let fd = (pair.G(t + hstep) - pair.G(t - hstep)) / (2.0 * hstep);
        let gp = pair.G_prime(t);
        record("derivative:G'", -(fd - gp).abs() / gp);
    }
    Ok(table
        .into_iter()
        .map(|(lemma, (samples, min_margin))| LemmaSummary { lemma, samples, min_margin })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::E;

    #[test]
    fn log_pair_at_e() {
        let v = eval_pair(&ChainRulePair::new(1.0).unwrap(), E).unwrap();
        assert_relative_eq!(v.g, 1.0 / E, max_relative = 1e-15);
        assert_relative_eq!(v.G, 1.0, max_relative = 1e-15);
        assert_relative_eq!(v.G_prime, 1.0 / E, max_relative = 1e-15);
        assert_relative_eq!(v.t_g, 1.0, max_relative = 1e-15);
        assert_relative_eq!(v.G_sq, 1.0, max_relative = 1e-15);
        assert_relative_eq!(v.t_G_prime, 1.0, max_relative = 1e-15);
        assert_relative_eq!(v.g_over_G_prime, 1.0, max_relative = 1e-15);
    }

    #[test]
    fn square_pair_at_one() {
        let v = eval_pair(&ChainRulePair::new(2.0).unwrap(), 1.0).unwrap();
        assert_eq!(v.g, 1.0);
        assert_relative_eq!(v.G, -2.0 * 2f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(v.G_prime, 2f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(v.g_over_G_prime, 1.0 / 2f64.sqrt(), max_relative = 1e-15);
    }

    #[test]
    fn half_pair_t_gprime_at_four() {
        let v = eval_pair(&ChainRulePair::new(0.5).unwrap(), 4.0).unwrap();
        assert_relative_eq!(v.t_G_prime, 1.0, max_relative = 1e-15);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(ChainRulePair::new(0.0).is_err());
        assert!(eval_pair(&ChainRulePair::new(1.0).unwrap(), 0.0).is_err());
        assert!(check_weighted(-1.0, 0.0, 0.0, 0.0, 0.5).is_err());
        assert!(check_weighted(1.0, 0.0, 0.0, 0.0, 1.0).is_err());
        assert!(check_log_weight(1.0, 1.0, -1.0, 1.0).is_err());
    }

    #[test]
    fn energy_lower_log_case() {
        let r = check_genaux(&ChainRulePair::new(1.0).unwrap(), E, 1.0).unwrap();
        assert_relative_eq!(r[0].greater, (E - 1.0).powi(2) / E, max_relative = 1e-14);
        assert_relative_eq!(r[0].lesser, 1.0, max_relative = 1e-14);
    }

    #[test]
    fn two_point_diagonal_is_equality() {
        let r = check_genaux(&ChainRulePair::new(2.0).unwrap(), 3.0, 3.0).unwrap();
        for ineq in &r {
            assert!(ineq.margin.abs() < 1e-15, "{ineq:?}");
        }
        assert_eq!(r[0].lesser, 0.0);
        assert_eq!(r[0].greater, 0.0);
    }

    #[test]
    fn weighted_examples() {
        let r = check_weighted(1.0, 1.0, 3.0, 1.0, 0.5).unwrap();
        assert_eq!(r[0].greater, 4.0);
        assert_eq!(r[0].lesser, 2.0);
        let r = check_weighted(0.0, 1.0, 1.0, 1.0, 0.5).unwrap();
        assert_eq!(r[0].lesser, -0.5);
        assert_eq!(r[0].greater, 0.0);
    }

    #[test]
    fn log_weight_examples() {
        let r = check_log_weight(1.0, 2.0, 1.5, 1.5).unwrap();
        assert_eq!(r.greater, 0.0);
        assert_relative_eq!(r.lesser, 0.5 * 2f64.ln().powi(2) - 1.0, max_relative = 1e-14);
        let r = check_log_weight(0.7, 0.7, 5.0, 2.0).unwrap();
        let x = 2.5f64.ln();
        assert_relative_eq!(r.lesser, 0.5 * 0.49 * x * x, max_relative = 1e-14);
    }

    #[test]
    fn stable_differences_match_naive_ones() {
        let pair = ChainRulePair::new(0.37).unwrap();
        let (t, s) = (3.1, 0.02);
        assert_relative_eq!(pair.G_diff(t, s), pair.G(t) - pair.G(s), max_relative = 1e-13);
        assert_relative_eq!(pair.g_diff(t, s), pair.g(t) - pair.g(s), max_relative = 1e-13);
    }

    #[test]
    fn derivative_matches_finite_differences() {
        for p in [0.3, 0.5, 1.0, 2.0, 5.0] {
            let pair = ChainRulePair::new(p).unwrap();
            for k in 0..=24 {
                let t = 10f64.powf(-3.0 + 0.25 * k as f64);
                let h = 1e-5 * t;
                let fd = (pair.G(t + h) - pair.G(t - h)) / (2.0 * h);
                assert_relative_eq!(fd, pair.G_prime(t), max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn sweep_is_deterministic_and_clean() {
        let a = sweep(500, 3).unwrap();
        assert_eq!(a, sweep(500, 3).unwrap());
        for row in &a {
            let tol = if row.lemma.starts_with("derivative") { 1e-6 } else { 1e-12 };
            assert!(row.min_margin >= -tol, "{row:?}");
        }
    }
}
