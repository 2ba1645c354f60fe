//! Declarative kernel descriptions, as found under `"kernel"` in scenario
//! configs, and the named presets.

use serde::{Deserialize, Serialize};

use super::{
    time_modulate, Base, Coefficient, Cone, DoubleCone, Kernel, KernelError, Potential,
    TimeKernel, TimeProfile, Validation,
};

fn unit_j() -> Coefficient {
    Coefficient::Constant { value: 1.0 }
}
fn one() -> f64 {
    1.0
}
fn infinity() -> f64 {
    f64::INFINITY
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum FamilySpec {
    Coefficient {
        g: Coefficient,
        #[serde(default)]
        base: Base,
        lambda: f64,
        #[serde(rename = "Lambda")]
        big_lambda: f64,
    },
    Drift {
        #[serde(default = "unit_j")]
        j: Coefficient,
        v: Potential,
        /// Truncation radius; omitted or `null` means no truncation.
        #[serde(default = "infinity", with = "opt_inf")]
        l: f64,
        #[serde(default = "one")]
        lambda: f64,
        #[serde(rename = "Lambda", default = "one")]
        big_lambda: f64,
    },
    Cone {
        beta: f64,
        #[serde(rename = "C")]
        c: Cone,
        #[serde(rename = "D")]
        dcone: DoubleCone,
    },
    Custom {
        scale: f64,
        drift: [f64; 2],
        beta: f64,
        radius: f64,
    },
}

/// Optional time modulation attached to a kernel spec.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeSpec {
    pub a: TimeProfile,
    #[serde(default)]
    pub s: Option<TimeProfile>,
    pub lambda: f64,
    #[serde(rename = "Lambda")]
    pub big_lambda: f64,
    /// Time window and sample count for the modulation checks.
    #[serde(default = "default_window")]
    pub window: (f64, f64),
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_window() -> (f64, f64) {
    (0.0, 10.0)
}
fn default_samples() -> usize {
    1001
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub d: usize,
    pub alpha: f64,
    #[serde(flatten)]
    pub family: FamilySpec,
    #[serde(default)]
    pub validation: Option<Validation>,
    #[serde(default)]
    pub time: Option<TimeSpec>,
}

mod opt_inf {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_some(v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

impl KernelSpec {
    pub fn build(&self) -> Result<Kernel, KernelError> {
        let val = self.validation.unwrap_or_default();
        match &self.family {
            FamilySpec::Coefficient { g, base, lambda, big_lambda } => {
                Kernel::coefficient(self.d, self.alpha, g.clone(), *base, *lambda, *big_lambda, &val)
            }
            FamilySpec::Drift { j, v, l, lambda, big_lambda } => Kernel::drift(
                self.d,
                self.alpha,
                j.clone(),
                v.clone(),
                *l,
                *lambda,
                *big_lambda,
                &val,
            ),
            FamilySpec::Cone { beta, c, dcone } => Kernel::cone(self.d, self.alpha, *beta, *c, *dcone),
            FamilySpec::Custom { scale, drift, beta, radius } => {
                Kernel::custom(self.d, self.alpha, *scale, *drift, *beta, *radius)
            }
        }
    }

    pub fn build_time(&self) -> Result<Option<TimeKernel>, KernelError> {
        let Some(ts) = &self.time else { return Ok(None) };
        let base = self.build()?;
        time_modulate(
            base,
            ts.a.clone(),
            ts.s.clone(),
            ts.lambda,
            ts.big_lambda,
            ts.window,
            ts.samples,
        )
        .map(Some)
    }

    /// Same spec at another order (used by alpha sweeps).
    pub fn with_alpha(&self, alpha: f64) -> Self {
        Self { alpha, ..self.clone() }
    }

    /// Named presets:
    ///
    /// * `stable-1d`, `stable-2d`: `c_{d,alpha} |h|^{-d-alpha}`
    /// * `cone-1d`: `|h|^{-1-alpha} + 1_C |h|^{-1-beta}`, C the positive half-line
    /// * `cone-2d`: C around e1 and D around e2, both with half-angle pi/4
    ///
    /// Cone presets use `beta = alpha / 3`.
    /// * `sin-coefficient`: `(2 + (sin x1 - sin y1)/2) |h|^{-d-alpha}`, `[1, 3]`
    /// * `linear-drift`: drift family with `V = x1/2`, `L = 1`, `j = 1`
    /// * `sin-drift`: drift family with `V = sin(x1)/2`, `L = 1`, `j = 1`
    pub fn preset(name: &str, d: usize, alpha: f64) -> Option<Self> {
        use std::f64::consts::FRAC_PI_4;
        let family = match name {
            "stable-1d" | "stable-2d" | "stable" => FamilySpec::Coefficient {
                g: Coefficient::Constant { value: 1.0 },
                base: Base { scale: 1.0, normalized: true },
                lambda: 1.0,
                big_lambda: 1.0,
            },
            "cone-1d" => FamilySpec::Cone {
                beta: alpha / 3.0,
                c: Cone { axis: [1.0, 0.0], half_angle: FRAC_PI_4 },
                dcone: DoubleCone::Full,
            },
            "cone-2d" => FamilySpec::Cone {
                beta: alpha / 3.0,
                c: Cone { axis: [1.0, 0.0], half_angle: FRAC_PI_4 },
                dcone: DoubleCone::Cone { axis: [0.0, 1.0], half_angle: FRAC_PI_4 },
            },
            "sin-coefficient" => FamilySpec::Coefficient {
                g: Coefficient::SinCoefficient { mean: 2.0, amplitude: 0.5 },
                base: Base::default(),
                lambda: 1.0,
                big_lambda: 3.0,
            },
            "linear-drift" => FamilySpec::Drift {
                j: unit_j(),
                v: Potential::Linear { b: [0.5, 0.0] },
                l: 1.0,
                lambda: 1.0,
                big_lambda: 1.0,
            },
            "sin-drift" => FamilySpec::Drift {
                j: unit_j(),
                v: Potential::Sin { amplitude: 0.5, frequency: 1.0 },
                l: 1.0,
                lambda: 1.0,
                big_lambda: 1.0,
            },
            _ => return None,
        };
        let d = match name {
            "stable-1d" | "cone-1d" => 1,
            "stable-2d" | "cone-2d" => 2,
            _ => d,
        };
        Some(Self { d, alpha, family, validation: None, time: None })
    }

    pub const PRESETS: &'static [&'static str] = &[
        "stable-1d",
        "stable-2d",
        "cone-1d",
        "cone-2d",
        "sin-coefficient",
        "linear-drift",
        "sin-drift",
    ];
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_cone_spec() {
        let s: KernelSpec = serde_json::from_str(
            r#"{"d":2,"alpha":1.5,"family":"cone","beta":0.5,
                "C":{"axis":[1,0],"half_angle":0.7853981633974483},
                "D":{"kind":"cone","axis":[0,1],"half_angle":0.7853981633974483}}"#,
        )
        .unwrap();
        assert_eq!(s.build().unwrap(), KernelSpec::preset("cone-2d", 2, 1.5).unwrap().build().unwrap());
    }

    #[test]
    fn parses_drift_without_truncation() {
        let s: KernelSpec = serde_json::from_str(
            r#"{"d":1,"alpha":1.0,"family":"drift","v":{"preset":"zero"}}"#,
        )
        .unwrap();
        match s.family {
            FamilySpec::Drift { l, .. } => assert!(l.is_infinite()),
            _ => panic!("wrong family"),
        }
        assert!(s.build().unwrap().is_symmetric());
    }

    #[test]
    fn every_preset_builds() {
        for name in KernelSpec::PRESETS {
            let s = KernelSpec::preset(name, 1, 1.5).unwrap();
            s.build().unwrap_or_else(|e| panic!("{name}: {e}"));
        }
        assert!(KernelSpec::preset("nope", 1, 1.0).is_none());
    }
}
