use std::f64::consts::PI;

use nalgebra::DVector;
use nonsym_core::discretize::{assemble, form_value, AssemblyOptions, DiscreteForm, Domain, Grid, PairSet, Part};
use nonsym_core::{Kernel, KernelSpec};
use proptest::prelude::*;

const ONE_D: [&str; 5] = ["stable-1d", "cone-1d", "sin-coefficient", "linear-drift", "sin-drift"];

fn grid(h: f64) -> Grid {
    Grid::new(1, 1.25, h, Domain::Box { center: [0.0, 0.0], half_width: 1.0 }).unwrap()
}

fn form(name: &str, alpha: f64, h: f64) -> Option<DiscreteForm> {
    let k = KernelSpec::preset(name, 1, alpha)?.build().ok()?;
    Some(assemble(&k, &grid(h), &AssemblyOptions::default()).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn structure_of_the_operator(
        name in prop::sample::select(&ONE_D[..]),
        alpha in 0.6..1.9f64,
        u in prop::collection::vec(-2.0..2.0f64, 40),
    ) {
        let Some(f) = form(name, alpha, 1.0 / 16.0) else { return Ok(()) };
        let (a, a_s, a_a) = (f.a(), f.a_s(), f.a_a());
        let scale = a.amax();
        prop_assert!((&a - &a_s - &a_a).amax() <= 1e-14 * scale);
        prop_assert_eq!((&a_s - a_s.transpose()).amax(), 0.0);
        prop_assert_eq!((&a_a + a_a.transpose()).amax(), 0.0);
        for i in 0..f.len() {
            for j in 0..f.len() {
                if i != j {
                    prop_assert!(a[(i, j)] <= 0.0, "A[{i}][{j}] = {}", a[(i, j)]);
                }
            }
        }
        let ones = DVector::from_element(f.len(), 1.0);
        prop_assert!((f.apply(&ones) - f.exterior_weights()).amax() <= 1e-6);

        // A_s carries the drift diagonal, so u^T A_s u is the full energy;
        // its grid part (tails removed) is the pair sum
        let uv = DVector::from_vec(u.clone());
        let mut grid_part = uv.dot(&f.apply_sym(&uv));
        let tails = f.tail_sym() + f.tail_anti();
        for i in 0..u.len() {
            grid_part -= tails[i] * u[i] * u[i];
        }
        let e = 2.0 * form_value(&f, Part::Full, &PairSet::All, &u, &u);
        prop_assert!((grid_part * f.grid().cell_volume() - e).abs() <= 1e-10 * e.abs().max(1e-300));
    }
}

/// `(A u)(x)` for the bump `(1 - x^2)^3_+` at `alpha = 1`: symmetrized
/// second difference over `r^2`, composite Simpson, exact far tail.
fn bump_reference(x: f64) -> f64 {
    let u = |s: f64| if s.abs() < 1.0 { (1.0 - s * s).powi(3) } else { 0.0 };
    let reach = x.abs() + 1.0;
    let f = |r: f64| {
        if r == 0.0 {
            6.0 * (1.0 - x * x).powi(2) - 24.0 * x * x * (1.0 - x * x)
        } else {
            (2.0 * u(x) - u(x + r) - u(x - r)) / (r * r)
        }
    };
    let mut breaks = vec![0.0, reach];
    breaks.extend([1.0 - x, 1.0 + x, x - 1.0, -1.0 - x].into_iter().filter(|b| *b > 0.0 && *b < reach));
    breaks.sort_by(f64::total_cmp);
    let mut total = 0.0;
    for w in breaks.windows(2) {
        let n = 4000;
        let h = (w[1] - w[0]) / n as f64;
        let mut s = f(w[0]) + f(w[1]);
        for k in 1..n {
            s += f(w[0] + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
        }
        total += s * h / 3.0;
    }
    2.0 / PI * (total + 2.0 * u(x) / reach)
}

#[test]
fn halving_h_converges_at_order_two_minus_alpha() {
    let k = Kernel::stable(1, 1.0, true).unwrap();
    let errors: Vec<f64> = [1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0]
        .iter()
        .map(|&h| {
            let g = grid(h);
            let f = assemble(&k, &g, &AssemblyOptions::default()).unwrap();
            let u = DVector::from_vec(g.sample(|x| if x[0].abs() < 1.0 { (1.0 - x[0] * x[0]).powi(3) } else { 0.0 }));
            let au = f.apply(&u);
            g.interior_indices().iter().map(|&i| (au[i] - bump_reference(g.node(i)[0])).abs()).fold(0.0, f64::max)
        })
        .collect();
    for w in errors.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(order >= 0.8, "errors {errors:?}, order {order}");
    }
}
