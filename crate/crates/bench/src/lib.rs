//! Shared fixtures for the criterion benches.

use std::f64::consts::PI;

use nonsym_core::discretize::{Domain, Grid};
use nonsym_core::kernels::{Cone, DoubleCone};
use nonsym_core::Kernel;

/// The 2D cone kernel of the benches.
pub fn cone_2d() -> Kernel {
    Kernel::cone(
        2,
        1.5,
        0.5,
        Cone { axis: [1.0, 0.0], half_angle: PI / 4.0 },
        DoubleCone::Cone { axis: [0.0, 1.0], half_angle: PI / 4.0 },
    )
    .expect("valid cone kernel")
}

/// Box grid of half width 1.25 around `(-1, 1)^d`.
pub fn grid(d: usize, h: f64) -> Grid {
    Grid::new(d, 1.25, h, Domain::Box { center: [0.0, 0.0], half_width: 1.0 }).expect("valid grid")
}
