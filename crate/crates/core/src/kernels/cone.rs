//! Open cones given by a unit axis and a half-angle.

use serde::{Deserialize, Serialize};

use super::KernelError;
use crate::geometry::{dot, norm, Point};

/// `C = { h : angle(h, axis) < half_angle }`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Cone {
    pub axis: Point,
    pub half_angle: f64,
}

impl Cone {
    pub fn new(axis: Point, half_angle: f64, d: usize) -> Result<Self, KernelError> {
        let n = norm(&axis);
        if !(n > 0.0) || !n.is_finite() {
            return Err(KernelError::Cone("axis must be a nonzero finite vector".into()));
        }
        if d == 1 && axis[1] != 0.0 {
            return Err(KernelError::Cone("1D cone axis must be (+-1, 0)".into()));
        }
        if !(half_angle > 0.0 && half_angle <= std::f64::consts::FRAC_PI_2) {
            return Err(KernelError::Cone(format!("half-angle {half_angle} not in (0, pi/2]")));
        }
        Ok(Self { axis: [axis[0] / n, axis[1] / n], half_angle })
    }

    /// Membership of `h` with `|h| = r > 0`. Strict inequality: the boundary
    /// rays are outside.
    #[inline]
    pub fn contains(&self, h: &Point, r: f64) -> bool {
        dot(h, &self.axis) > r * self.half_angle.cos()
    }

    /// Angular measure of `C` (the two-ray count in 1D).
    pub fn measure(&self, d: usize) -> f64 {
        if d == 1 {
            1.0
        } else {
            2.0 * self.half_angle
        }
    }
}

/// Symmetric support of the order-alpha part of the cone family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DoubleCone {
    /// `D = C' u (-C')`.
    Cone { axis: Point, half_angle: f64 },
    /// `D = R^d`. The only choice in 1D, where a double cone cannot avoid `C`.
    Full,
}

impl DoubleCone {
    pub fn validated(&self, d: usize) -> Result<Self, KernelError> {
        match *self {
            DoubleCone::Cone { axis, half_angle } => {
                let c = Cone::new(axis, half_angle, d)?;
                Ok(DoubleCone::Cone { axis: c.axis, half_angle: c.half_angle })
            }
            DoubleCone::Full => Ok(DoubleCone::Full),
        }
    }

    #[inline]
    pub fn contains(&self, h: &Point, r: f64) -> bool {
        match self {
            DoubleCone::Cone { axis, half_angle } => dot(h, axis).abs() > r * half_angle.cos(),
            DoubleCone::Full => true,
        }
    }

    /// True when `C` and `D` share no direction. `Full` never qualifies.
    pub fn disjoint_from(&self, c: &Cone) -> bool {
        match self {
            DoubleCone::Full => false,
            DoubleCone::Cone { axis, half_angle } => {
                let cosang = dot(axis, &c.axis).clamp(-1.0, 1.0);
                let ang = cosang.acos();
                let sep = ang.min(std::f64::consts::PI - ang);
                sep >= c.half_angle + half_angle - 1e-12
            }
        }
    }
}
