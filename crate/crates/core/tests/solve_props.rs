use nalgebra::DVector;
use nonsym_core::discretize::{assemble, AssemblyOptions, DiscreteForm, Domain, Grid};
use nonsym_core::solve::{solve_parabolic, Field, Operator, Problem};
use nonsym_core::{Kernel, KernelSpec};
use proptest::prelude::*;

const N: usize = 40;

fn form(name: &str, alpha: f64) -> DiscreteForm {
    let g = Grid::new(1, 1.25, 1.0 / 16.0, Domain::Box { center: [0.0, 0.0], half_width: 1.0 }).unwrap();
    let k = KernelSpec::preset(name, 1, alpha).unwrap().build().unwrap();
    assemble(&k, &g, &AssemblyOptions::default()).unwrap()
}

fn problem(f: &DiscreteForm, alpha: f64, u0: &[f64], source: f64, exterior: f64) -> Problem {
    let mut p = Problem::new(Operator::Static(f.clone()), alpha, 0.2);
    p.dt = 0.02;
    p.initial = DVector::from_column_slice(u0);
    p.collar = Field::Nodal(DVector::from_column_slice(u0));
    p.source = Field::Constant(source);
    p.exterior = exterior;
    p
}

fn nonsymmetric() -> impl Strategy<Value = &'static str> {
    prop::sample::select(&["cone-1d", "linear-drift", "sin-drift"][..])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn implicit_euler_preserves_sign(
        name in nonsymmetric(),
        alpha in 0.8..1.9f64,
        u0 in prop::collection::vec(0.0..3.0f64, N),
        source in 0.0..1.0f64,
        exterior in 0.0..1.0f64,
    ) {
        let f = form(name, alpha);
        let sol = solve_parabolic(&problem(&f, alpha, &u0, source, exterior)).unwrap();
        for u in &sol.snapshots {
            prop_assert!(u.min() >= -1e-13, "min {}", u.min());
        }
    }

    #[test]
    fn ordered_data_give_ordered_solutions(
        name in nonsymmetric(),
        alpha in 0.8..1.9f64,
        u0 in prop::collection::vec(-1.0..1.0f64, N),
        gap in prop::collection::vec(0.0..1.0f64, N),
        fs in (-1.0..1.0f64, 0.0..1.0f64),
        ext in (-1.0..1.0f64, 0.0..1.0f64),
    ) {
        let f = form(name, alpha);
        let v0: Vec<f64> = u0.iter().zip(&gap).map(|(a, b)| a + b).collect();
        let lo = solve_parabolic(&problem(&f, alpha, &u0, fs.0, ext.0)).unwrap();
        let hi = solve_parabolic(&problem(&f, alpha, &v0, fs.0 + fs.1, ext.0 + ext.1)).unwrap();
        for (u, v) in lo.snapshots.iter().zip(&hi.snapshots) {
            prop_assert!((v - u).min() >= -1e-12);
        }
    }

    #[test]
    fn symmetric_energy_decays(alpha in 0.6..1.9f64, u0 in prop::collection::vec(-1.0..1.0f64, N)) {
        let f = form("stable-1d", alpha);
        let mut u0 = u0;
        for i in f.grid().collar_indices() {
            u0[i] = 0.0;
        }
        let mut p = problem(&f, alpha, &u0, 0.0, 0.0);
        p.source = Field::Zero;
        p.collar = Field::Zero;
        let a_s = f.a_s();
        let energies: Vec<f64> = solve_parabolic(&p).unwrap().snapshots.iter().map(|u| u.dot(&(&a_s * u))).collect();
        for w in energies.windows(2) {
            prop_assert!(w[1] <= w[0] * (1.0 + 1e-12) + 1e-14, "{energies:?}");
        }
    }

    #[test]
    fn transpose_pairing(
        name in nonsymmetric(),
        alpha in 0.6..1.9f64,
        u in prop::collection::vec(-1.0..1.0f64, N),
        v in prop::collection::vec(-1.0..1.0f64, N),
    ) {
        let f = form(name, alpha);
        let (u, v) = (DVector::from_vec(u), DVector::from_vec(v));
        let lhs = f.apply(&u).dot(&v);
        let rhs = u.dot(&f.transpose_form().apply(&v));
        let scale = f.a().amax() * u.amax() * v.amax() * N as f64;
        prop_assert!((lhs - rhs).abs() <= 1e-12 * scale);
    }
}

#[test]
fn symmetric_kernels_have_symmetric_duals() {
    let k = Kernel::stable(1, 1.5, true).unwrap();
    let g = Grid::new(1, 1.25, 0.125, Domain::Box { center: [0.0, 0.0], half_width: 1.0 }).unwrap();
    let f = assemble(&k, &g, &AssemblyOptions::default()).unwrap();
    assert_eq!(f.a(), f.transpose_form().a());
}
