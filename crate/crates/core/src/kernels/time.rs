//! Time-modulated kernels `k(t) = a(t) K_s + s(t) K_a`.

use serde::{Deserialize, Serialize};

use super::{Kernel, KernelError, TimeProfile};

/// A base kernel with a symmetric modulation `a(t)` in `[lambda, Lambda]` and
/// an optional antisymmetric modulation `s(t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeKernel {
    #[serde(skip)]
    base: Option<Kernel>,
    pub a: TimeProfile,
    pub s: Option<TimeProfile>,
    pub lambda: f64,
    pub big_lambda: f64,
}

/// Builds a [`TimeKernel`] after checking `a(t) in [lambda, Lambda]` and
/// `|s(t)| <= a(t)` on `samples` equispaced times of `[t0, t1]`. The second
/// check is skipped for symmetric bases.
pub fn time_modulate(
    base: Kernel,
    a: TimeProfile,
    s: Option<TimeProfile>,
    lambda: f64,
    big_lambda: f64,
    window: (f64, f64),
    samples: usize,
) -> Result<TimeKernel, KernelError> {
    super::coefficient_d(lambda, big_lambda)?;
    let n = samples.max(2);
    for k in 0..n {
        let t = window.0 + (window.1 - window.0) * k as f64 / (n - 1) as f64;
        let at = a.value(t);
        if !(at >= lambda - 1e-12 && at <= big_lambda + 1e-12) {
            return Err(KernelError::Modulation {
                t,
                reason: format!("a(t) = {at} outside [{lambda}, {big_lambda}]"),
            });
        }
        // Without an explicit s the antisymmetric part keeps weight 1.
        let st = s.as_ref().map_or(1.0, |s| s.value(t));
        if !base.is_symmetric() {
            if st.abs() > at * (1.0 + 1e-12) {
                return Err(KernelError::Modulation {
                    t,
                    reason: format!("|s(t)| = {} exceeds a(t) = {at}", st.abs()),
                });
            }
        }
    }
    Ok(TimeKernel { base: Some(base), a, s, lambda, big_lambda })
}

impl TimeKernel {
    pub fn base(&self) -> &Kernel {
        self.base.as_ref().expect("time kernel constructed through time_modulate")
    }

    /// `(a(t), s(t))` with `s = 1` when no antisymmetric modulation is set.
    pub fn factors(&self, t: f64) -> (f64, f64) {
        (self.a.value(t), self.s.as_ref().map_or(1.0, |s| s.value(t)))
    }

    /// The frozen kernel at time `t`.
    pub fn slice(&self, t: f64) -> Kernel {
        let (a, s) = self.factors(t);
        self.base().modulated(a, s)
    }
}
