use serde::{Deserialize, Serialize};

use super::Grid;
use crate::geometry::{dist, Point};

/// `tau(x) = clamp((r + rho - |x - z|) / rho, 0, 1)`: one on `B_r(z)`,
/// zero outside `B_{r+rho}(z)`, slope `1/rho` in between.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffProfile {
    pub center: Point,
    pub r: f64,
    pub rho: f64,
}

impl CutoffProfile {
    pub fn new(center: Point, r: f64, rho: f64) -> Self {
        assert!(r >= 0.0 && rho > 0.0, "cutoff needs r >= 0 and rho > 0");
        Self { center, r, rho }
    }

    pub fn value(&self, x: &Point) -> f64 {
        ((self.r + self.rho - dist(x, &self.center)) / self.rho).clamp(0.0, 1.0)
    }

    pub fn sample(&self, grid: &Grid) -> Vec<f64> {
        grid.sample(|x| self.value(x))
    }

    /// Outer radius of the support.
    pub fn outer(&self) -> f64 {
        self.r + self.rho
    }
}
