use nonsym_core::kernels::coefficient_d;
use nonsym_core::{c_alpha_norm, Kernel, KernelSpec, Point};
use proptest::prelude::*;

const REL: f64 = 1e-12;

fn preset() -> impl Strategy<Value = &'static str> {
    prop::sample::select(KernelSpec::PRESETS)
}

fn build(name: &str, alpha: f64) -> Option<Kernel> {
    let d = if name.ends_with("-1d") { 1 } else { 2 };
    KernelSpec::preset(name, d, alpha)?.build().ok()
}

fn pair(d: usize) -> impl Strategy<Value = (Point, Point)> {
    let c = -1.5..1.5f64;
    (c.clone(), c.clone(), c.clone(), c).prop_filter_map("distinct points", move |(a, b, e, f)| {
        let (x, y) = if d == 1 { ([a, 0.0], [e, 0.0]) } else { ([a, b], [e, f]) };
        ((x[0] - y[0]).hypot(x[1] - y[1]) > 1e-6).then_some((x, y))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn split_invariants(name in preset(), alpha in 0.6..1.9f64, p in pair(2)) {
        let Some(k) = build(name, alpha) else { return Ok(()) };
        let (x, y) = if k.d() == 1 { ([p.0[0], 0.0], [p.1[0], 0.0]) } else { p };
        prop_assume!((x[0] - y[0]).hypot(x[1] - y[1]) > 1e-6);
        let kxy = k.eval(&x, &y).unwrap();
        let (ks, ka) = k.split(&x, &y).unwrap();
        let (ks_yx, ka_yx) = k.split(&y, &x).unwrap();
        let scale = ks.abs().max(f64::MIN_POSITIVE);
        prop_assert!(kxy >= -REL * scale);
        prop_assert!((kxy - ks - ka).abs() <= REL * scale);
        prop_assert!((ks - ks_yx).abs() <= REL * scale);
        prop_assert!((ka + ka_yx).abs() <= REL * scale);
        prop_assert!(ka.abs() <= ks * (1.0 + REL));
        // two evaluations give the same split as the closed form
        let (ds, da) = k.decompose(&x, &y).unwrap();
        prop_assert!((ds - ks).abs() <= 1e-11 * scale && (da - ka).abs() <= 1e-11 * scale);
    }

    #[test]
    fn coefficient_family_respects_d(alpha in 0.6..1.9f64, p in pair(2)) {
        let k = build("sin-coefficient", alpha).unwrap();
        let (lo, hi) = k.bounds().unwrap();
        let dd = coefficient_d(lo, hi).unwrap();
        let (ks, ka) = k.split(&p.0, &p.1).unwrap();
        prop_assert!(ka.abs() <= dd * ks * (1.0 + REL));
    }

    #[test]
    fn linear_drift_lower_bound(alpha in 0.6..1.9f64, p in pair(2)) {
        // j = 1, |V(x) - V(y)| <= |b| L = 1/2 on the truncation ball
        let k = build("linear-drift", alpha).unwrap();
        let (x, y) = p;
        let r = (x[0] - y[0]).hypot(x[1] - y[1]);
        let floor = 0.5 * k.c_norm() * r.powf(-2.0 - alpha);
        prop_assert!(k.eval(&x, &y).unwrap() >= floor * (1.0 - REL));
    }

    #[test]
    fn dual_swaps_the_antisymmetric_part(name in preset(), alpha in 0.6..1.9f64, p in pair(2)) {
        let Some(k) = build(name, alpha) else { return Ok(()) };
        let (x, y) = if k.d() == 1 { ([p.0[0], 0.0], [p.1[0], 0.0]) } else { p };
        prop_assume!((x[0] - y[0]).hypot(x[1] - y[1]) > 1e-6);
        let (ks, ka) = k.split(&x, &y).unwrap();
        let (ds, da) = k.dual().split(&x, &y).unwrap();
        prop_assert_eq!(ks, ds);
        prop_assert_eq!(ka, -da);
        let kyx = k.eval(&y, &x).unwrap();
        prop_assert!((k.dual().eval(&x, &y).unwrap() - kyx).abs() <= REL * ks);
    }
}

#[test]
fn normalization_in_one_dimension() {
    assert!((c_alpha_norm(1, 1.0).unwrap() - 1.0 / std::f64::consts::PI).abs() < 1e-12);
}
