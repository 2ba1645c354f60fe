use serde::{Deserialize, Serialize};

use super::EstimateError;
use crate::geometry::Point;
use crate::solve::Solution;

/// Space-time box `[t0, t1] x B_radius(center)`. Times within `1e-9` of an
/// end count as inside, so lattice times on the boundary are sampled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub t0: f64,
    pub t1: f64,
    pub center: Point,
    pub radius: f64,
}

impl Window {
    fn values<'a>(&self, sol: &'a Solution) -> impl Iterator<Item = f64> + 'a {
        let nodes = sol.grid().ball_indices(&self.center, self.radius);
        let (a, b) = (self.t0 - 1e-9, self.t1 + 1e-9);
        sol.times
            .iter()
            .zip(&sol.snapshots)
            .filter(move |(t, _)| **t >= a && **t <= b)
            .flat_map(move |(_, u)| nodes.clone().into_iter().map(move |i| u[i]))
    }

    fn describe(&self) -> String {
        format!("[{}, {}] x B_{}({:?})", self.t0, self.t1, self.radius, self.center)
    }
}

/// Parabolic cylinder of radius `r` and order `alpha` around `(t0, center)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cylinder {
    pub t0: f64,
    pub r: f64,
    pub alpha: f64,
    pub center: Point,
}

impl Cylinder {
    fn ra(&self) -> f64 {
        self.r.powf(self.alpha)
    }
    fn half(&self) -> f64 {
        (0.5 * self.r).powf(self.alpha)
    }
    fn window(&self, t0: f64, t1: f64, radius: f64) -> Window {
        Window { t0, t1, center: self.center, radius }
    }

    /// `I_R = (t0 - R^alpha, t0 + R^alpha)`.
    pub fn interval(&self) -> (f64, f64) {
        (self.t0 - self.ra(), self.t0 + self.ra())
    }

    /// `(t0 - R^alpha, t0 - R^alpha + (R/2)^alpha) x B_{R/2}`.
    pub fn early(&self) -> Window {
        let a = self.t0 - self.ra();
        self.window(a, a + self.half(), 0.5 * self.r)
    }

    /// `(t0 + R^alpha - (R/2)^alpha, t0 + R^alpha) x B_{R/2}`.
    pub fn late(&self) -> Window {
        let b = self.t0 + self.ra();
        self.window(b - self.half(), b, 0.5 * self.r)
    }

    /// `(t0 - 2 R^alpha, t0) x B_{2R}`.
    pub fn d_box(&self) -> Window {
        self.window(self.t0 - 2.0 * self.ra(), self.t0, 2.0 * self.r)
    }

    /// `D` with the ball widened to `B_{3R}`.
    pub fn d_hat(&self) -> Window {
        self.window(self.t0 - 2.0 * self.ra(), self.t0, 3.0 * self.r)
    }

    /// `(t0 - 2 R^alpha, t0 - 2 R^alpha + (R/2)^alpha) x B_{R/2}`.
    pub fn d_minus(&self) -> Window {
        let a = self.t0 - 2.0 * self.ra();
        self.window(a, a + self.half(), 0.5 * self.r)
    }

    /// `(t0 - (R/2)^alpha, t0) x B_{R/2}`.
    pub fn d_plus(&self) -> Window {
        self.window(self.t0 - self.half(), self.t0, 0.5 * self.r)
    }

    /// `(t0 - rho^alpha, t0] x B_rho`.
    pub fn backward(&self, rho: f64) -> Window {
        self.window(self.t0 - rho.powf(self.alpha), self.t0, rho)
    }
}

/// Lattice extrema over a window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Oscillation {
    pub max: f64,
    pub min: f64,
    pub osc: f64,
    pub points: usize,
}

pub fn oscillation(sol: &Solution, w: &Window) -> Result<Oscillation, EstimateError> {
    let (mut max, mut min, mut n) = (f64::NEG_INFINITY, f64::INFINITY, 0usize);
    for v in w.values(sol) {
        max = max.max(v);
        min = min.min(v);
        n += 1;
    }
    if n == 0 {
        return Err(EstimateError::Empty(w.describe()));
    }
    Ok(Oscillation { max, min, osc: max - min, points: n })
}

/// `inf_late u / (mean_early u - R^alpha f_inf)`, or `+inf` when the
/// denominator is not positive.
pub fn harnack_quotient(sol: &Solution, cyl: &Cylinder, f_inf: f64) -> Result<f64, EstimateError> {
    let late = cyl.late();
    let early = cyl.early();
    let inf = oscillation(sol, &late)?.min;
    let (sum, n) = early.values(sol).fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        return Err(EstimateError::Empty(early.describe()));
    }
    let den = sum / n as f64 - cyl.ra() * f_inf;
    Ok(if den > 0.0 { inf / den } else { f64::INFINITY })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HolderFit {
    pub radii: Vec<f64>,
    pub osc: Vec<f64>,
    /// Fitted slope clamped to `[0, 1]`; `None` when flat.
    pub gamma: Option<f64>,
    /// Unclamped least-squares slope.
    pub slope: Option<f64>,
    pub flat: bool,
}

/// Slope of `log osc(Q_k)` against `log rho_k` for `rho_k = nu^{-k} R`,
/// `Q_k = (t0 - rho_k^alpha, t0] x B_{rho_k}`.
pub fn holder_fit(sol: &Solution, cyl: &Cylinder, nu: f64, scales: usize) -> Result<HolderFit, EstimateError> {
    if !(nu > 1.0) || scales < 4 {
        return Err(EstimateError::Parameter(format!("need nu > 1 and at least 4 scales, got nu = {nu}, {scales}")));
    }
    let radii: Vec<f64> = (0..scales).map(|k| cyl.r * nu.powi(-(k as i32))).collect();
    let mut osc = Vec::with_capacity(scales);
    for &rho in &radii {
        let o = oscillation(sol, &cyl.backward(rho))?;
        if o.points < 8 {
            return Err(EstimateError::Parameter(format!("cylinder of radius {rho} has only {} lattice points", o.points)));
        }
        osc.push(o.osc);
    }
    if osc[0] < 1e-13 {
        return Ok(HolderFit { radii, osc, gamma: None, slope: None, flat: true });
    }
    // zero oscillation at small scales is floored at 1e-300 before the log
    let xs: Vec<f64> = radii.iter().map(|r| r.ln()).collect();
    let ys: Vec<f64> = osc.iter().map(|o| o.max(1e-300).ln()).collect();
    let (slope, _) = crate::assumptions::least_squares(&xs, &ys);
    Ok(HolderFit { radii, osc, gamma: Some(slope.clamp(0.0, 1.0)), slope: Some(slope), flat: false })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discretize::{Domain, Grid};

    fn grid(d: usize) -> Grid {
        let h = if d == 1 { 1.0 / 128.0 } else { 1.0 / 16.0 };
        Grid::new(d, 1.25, h, Domain::Box { center: [0.0, 0.0], half_width: 1.0 }).unwrap()
    }

    fn times(n: usize, t1: f64) -> Vec<f64> {
        (0..=n).map(|k| t1 * k as f64 / n as f64).collect()
    }

    #[test]
    fn boxes_are_ordered() {
        let c = Cylinder { t0: 1.0, r: 0.5, alpha: 1.5, center: [0.0, 0.0] };
        assert!(c.early().t1 < c.late().t0);
        assert!((c.d_plus().t1 - c.t0).abs() < 1e-15);
        assert!(c.d_minus().t1 < c.d_plus().t0);
        assert_eq!(c.d_hat().radius, 1.5);
    }

    #[test]
    fn harnack_on_constants_and_homogeneity() {
        let g = grid(1);
        let c = Cylinder { t0: 0.5f64.powf(1.5), r: 0.5, alpha: 1.5, center: [0.0, 0.0] };
        let ts = times(40, 2.0 * c.t0);
        let one = Solution::sampled(&g, &ts, |_, _| 3.0);
        assert_eq!(harnack_quotient(&one, &c, 0.0).unwrap(), 1.0);
        let f = |t: f64, x: &Point| (-t).exp() * (2.0 + x[0].cos());
        let u = Solution::sampled(&g, &ts, f);
        let u5 = Solution::sampled(&g, &ts, |t, x| 5.0 * f(t, x));
        let q = harnack_quotient(&u, &c, 0.1).unwrap();
        assert!(q > 0.0 && q < 1.0);
        assert!((harnack_quotient(&u5, &c, 0.5).unwrap() - q).abs() < 1e-14);
        assert!(harnack_quotient(&u, &c, 100.0).unwrap().is_infinite());
    }

    #[test]
    fn holder_of_linear_and_constant_fields() {
        let g = grid(1);
        let c = Cylinder { t0: 1.0, r: 0.5, alpha: 1.0, center: [0.0, 0.0] };
        let ts = times(64, 1.0);
        let lin = Solution::sampled(&g, &ts, |_, x| x[0]);
        let fit = holder_fit(&lin, &c, 2.0, 4).unwrap();
        assert!((fit.slope.unwrap() - 1.0).abs() < 0.05, "{fit:?}");
        let aff = Solution::sampled(&g, &ts, |_, x| 3.0 * x[0] - 7.0);
        let fa = holder_fit(&aff, &c, 2.0, 4).unwrap();
        assert!((fa.slope.unwrap() - fit.slope.unwrap()).abs() < 1e-12);
        let flat = Solution::sampled(&g, &ts, |_, _| 2.0);
        assert!(holder_fit(&flat, &c, 2.0, 4).unwrap().flat);
        assert!(holder_fit(&lin, &c, 2.0, 3).is_err());
    }

    #[test]
    fn oscillation_is_monotone_in_the_window() {
        let g = grid(1);
        let ts = times(10, 1.0);
        let u = Solution::sampled(&g, &ts, |t, x| t + x[0]);
        let w = Window { t0: 0.0, t1: 1.0, center: [0.0, 0.0], radius: 1.0 };
        let small = Window { t0: 0.5, t1: 1.0, center: [0.0, 0.0], radius: 0.5 };
        assert!(oscillation(&u, &small).unwrap().osc <= oscillation(&u, &w).unwrap().osc);
        let nowhere = Window { t0: 5.0, t1: 6.0, center: [0.0, 0.0], radius: 0.5 };
        assert!(oscillation(&u, &nowhere).is_err());
        let c = Solution::sampled(&g, &ts, |_, _| 1.0);
        assert_eq!(oscillation(&c, &w).unwrap().osc, 0.0);
    }
}
