//! Closed-form and sampled scalar fields that parametrize kernel families.

use serde::{Deserialize, Serialize};

use crate::geometry::{norm, Point};

fn default_mean() -> f64 {
    2.0
}
fn default_half() -> f64 {
    0.5
}
fn default_one() -> f64 {
    1.0
}

/// Values on a uniform lattice, multilinear in between, constant beyond the
/// last sample along each axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampledField {
    pub origin: [f64; 2],
    pub spacing: f64,
    /// Samples per axis; use 1 for the second axis in 1D.
    pub shape: [usize; 2],
    /// Row-major with the first axis fastest.
    pub values: Vec<f64>,
}

impl SampledField {
    pub fn is_consistent(&self) -> bool {
        self.spacing > 0.0
            && self.shape[0] >= 1
            && self.shape[1] >= 1
            && self.values.len() == self.shape[0] * self.shape[1]
            && self.values.iter().all(|v| v.is_finite())
    }

    fn locate(&self, x: f64, axis: usize) -> (usize, f64) {
        let n = self.shape[axis];
        if n == 1 {
            return (0, 0.0);
        }
        let s = ((x - self.origin[axis]) / self.spacing).clamp(0.0, (n - 1) as f64);
        let i = (s.floor() as usize).min(n - 2);
        (i, s - i as f64)
    }

    pub fn value(&self, x: &Point) -> f64 {
        let (i, fx) = self.locate(x[0], 0);
        let (j, fy) = self.locate(x[1], 1);
        let nx = self.shape[0];
        let at = |a: usize, b: usize| {
            let a = a.min(nx - 1);
            let b = b.min(self.shape[1] - 1);
            self.values[a + nx * b]
        };
        let v0 = at(i, j) * (1.0 - fx) + at(i + 1, j) * fx;
        let v1 = at(i, j + 1) * (1.0 - fx) + at(i + 1, j + 1) * fx;
        v0 * (1.0 - fy) + v1 * fy
    }
}

/// Potential V driving the drift family and the suffK1 criteria.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Potential {
    Zero,
    /// V(x) = b . x
    #[serde(rename = "linear-V")]
    Linear { b: [f64; 2] },
    /// V(x) = amplitude * sin(frequency * x1)
    #[serde(rename = "sin-V")]
    Sin {
        #[serde(default = "default_one")]
        amplitude: f64,
        #[serde(default = "default_one")]
        frequency: f64,
    },
    /// V(x) = scale * |x|^gamma0
    #[serde(rename = "power-V")]
    Power {
        gamma0: f64,
        #[serde(default = "default_one")]
        scale: f64,
    },
    Sampled(SampledField),
}

impl Potential {
    pub fn value(&self, x: &Point) -> f64 {
        match self {
            Potential::Zero => 0.0,
            Potential::Linear { b } => b[0] * x[0] + b[1] * x[1],
            Potential::Sin { amplitude, frequency } => amplitude * (frequency * x[0]).sin(),
            Potential::Power { gamma0, scale } => scale * norm(x).powf(*gamma0),
            Potential::Sampled(s) => s.value(x),
        }
    }

    /// Gradient; central differences for sampled fields. Infinite where V is
    /// not differentiable (the origin of a power potential with gamma0 < 1).
    pub fn gradient(&self, x: &Point) -> Point {
        match self {
            Potential::Zero => [0.0, 0.0],
            Potential::Linear { b } => *b,
            Potential::Sin { amplitude, frequency } => {
                [amplitude * frequency * (frequency * x[0]).cos(), 0.0]
            }
            Potential::Power { gamma0, scale } => {
                let r = norm(x);
                if r == 0.0 {
                    return if *gamma0 < 1.0 {
                        [f64::INFINITY, f64::INFINITY]
                    } else if *gamma0 == 1.0 {
                        [f64::NAN, f64::NAN]
                    } else {
                        [0.0, 0.0]
                    };
                }
                let c = scale * gamma0 * r.powf(gamma0 - 2.0);
                [c * x[0], c * x[1]]
            }
            Potential::Sampled(s) => {
                let e = 1e-6 * s.spacing;
                let g0 = (s.value(&[x[0] + e, x[1]]) - s.value(&[x[0] - e, x[1]])) / (2.0 * e);
                let g1 = (s.value(&[x[0], x[1] + e]) - s.value(&[x[0], x[1] - e])) / (2.0 * e);
                [g0, g1]
            }
        }
    }
}

/// Two-point coefficient field g(x, y).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Coefficient {
    Constant {
        #[serde(default = "default_one")]
        value: f64,
    },
    /// g(x, y) = mean + amplitude (sin x1 - sin y1)
    SinCoefficient {
        #[serde(default = "default_mean")]
        mean: f64,
        #[serde(default = "default_half")]
        amplitude: f64,
    },
    /// g(x, y) = V1(x) + V2(y); V2 defaults to V1 (then g is symmetric).
    SumPotential {
        first: Potential,
        #[serde(default)]
        second: Option<Potential>,
    },
    /// g(x, y) = V1(x) V2(y)
    ProductPotential { first: Potential, second: Potential },
}

impl Coefficient {
    pub fn value(&self, x: &Point, y: &Point) -> f64 {
        match self {
            Coefficient::Constant { value } => *value,
            Coefficient::SinCoefficient { mean, amplitude } => {
                mean + amplitude * (x[0].sin() - y[0].sin())
            }
            Coefficient::SumPotential { first, second } => {
                first.value(x) + second.as_ref().unwrap_or(first).value(y)
            }
            Coefficient::ProductPotential { first, second } => first.value(x) * second.value(y),
        }
    }

    pub fn is_symmetric_by_construction(&self) -> bool {
        match self {
            Coefficient::Constant { .. } => true,
            Coefficient::SinCoefficient { amplitude, .. } => *amplitude == 0.0,
            Coefficient::SumPotential { first, second } => {
                second.as_ref().map_or(true, |s| s == first)
            }
            Coefficient::ProductPotential { first, second } => first == second,
        }
    }
}

/// Scalar function of time used for modulations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "preset", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TimeProfile {
    Constant {
        #[serde(default = "default_one")]
        value: f64,
    },
    /// mean + amplitude sin(frequency t)
    SinTime {
        #[serde(default = "default_one")]
        mean: f64,
        #[serde(default = "default_half")]
        amplitude: f64,
        #[serde(default = "default_one")]
        frequency: f64,
    },
}

impl TimeProfile {
    pub fn value(&self, t: f64) -> f64 {
        match self {
            TimeProfile::Constant { value } => *value,
            TimeProfile::SinTime { mean, amplitude, frequency } => {
                mean + amplitude * (frequency * t).sin()
            }
        }
    }
}
