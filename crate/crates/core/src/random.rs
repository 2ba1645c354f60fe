//! Reproducible random data: one ChaCha8 stream per ensemble member, and
//! smooth lognormal fields defined at every point of space (so a refined grid
//! samples the same field).

use std::f64::consts::TAU;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::discretize::Grid;
use crate::geometry::Point;

/// Name written into run manifests.
pub const GENERATOR: &str = "ChaCha8 (rand_chacha 0.3), key = seed, stream = member";

/// Counter-based stream `member` under key `seed`.
pub fn stream(seed: u64, member: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(member);
    rng
}

pub fn standard_normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

/// Shape of a random field `exp(mean + sigma G(x))`, `G` a truncated Fourier
/// series with unit pointwise variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    /// Period of the lowest mode.
    #[serde(default = "default_length")]
    pub length: f64,
    /// Highest wavenumber per axis.
    #[serde(default = "default_modes")]
    pub modes: usize,
    #[serde(default)]
    pub mean: f64,
    #[serde(default = "default_sigma")]
    pub sigma: f64,
}

fn default_length() -> f64 {
    4.0
}
fn default_modes() -> usize {
    4
}
fn default_sigma() -> f64 {
    0.5
}

impl Default for FieldSpec {
    fn default() -> Self {
        Self { length: default_length(), modes: default_modes(), mean: 0.0, sigma: default_sigma() }
    }
}

/// A sampled smooth lognormal field.
#[derive(Debug, Clone, PartialEq)]
pub struct LognormalField {
    spec: FieldSpec,
    /// `(wave vector, cos coefficient, sin coefficient)`.
    modes: Vec<(Point, f64, f64)>,
}

impl LognormalField {
    pub fn sample(spec: FieldSpec, d: usize, rng: &mut ChaCha8Rng) -> Self {
        let m = spec.modes as i64;
        let mut waves = Vec::new();
        let ky_range = if d == 1 { 0..=0 } else { -m..=m };
        for ky in ky_range {
            for kx in 0..=m {
                // one representative of each +-k pair
                if kx == 0 && ky <= 0 {
                    continue;
                }
                waves.push([kx as f64, ky as f64]);
            }
        }
        // spectral weights (1 + |k|^2)^{-1}, then normalize to unit variance
        let w: Vec<f64> = waves.iter().map(|k| 1.0 / (1.0 + k[0] * k[0] + k[1] * k[1])).collect();
        let total: f64 = w.iter().sum();
        let modes = waves
            .iter()
            .zip(&w)
            .map(|(k, wk)| {
                let a = (wk / total).sqrt();
                let kk = [TAU * k[0] / spec.length, TAU * k[1] / spec.length];
                (kk, a * standard_normal(rng), a * standard_normal(rng))
            })
            .collect();
        Self { spec, modes }
    }

    /// The Gaussian part `G(x)`.
    pub fn gaussian(&self, x: &Point) -> f64 {
        self.modes
            .iter()
            .map(|(k, a, b)| {
                let ph = k[0] * x[0] + k[1] * x[1];
                a * ph.cos() + b * ph.sin()
            })
            .sum()
    }

    pub fn value(&self, x: &Point) -> f64 {
        (self.spec.mean + self.spec.sigma * self.gaussian(x)).exp()
    }

    pub fn on(&self, grid: &Grid) -> Vec<f64> {
        grid.sample(|x| self.value(x))
    }
}

/// The positive field of ensemble member `member`.
pub fn member_field(spec: FieldSpec, d: usize, seed: u64, member: u64) -> LognormalField {
    LognormalField::sample(spec, d, &mut stream(seed, member))
}
