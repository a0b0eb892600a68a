//! Property tests for the identities and invariants that hold at every
//! state or along every run.

use proptest::prelude::*;
use solitonflow_core::analyze::{critical_points, f_hat_minimum, point_e, SKIP};
use solitonflow_core::integrate::{integrate, IntegratorConfig, XyMonitor, ZMonitor};
use solitonflow_core::model::{
    f_hat, lyapunov, script_g, script_h, scalars_from_z, two_summands_ricci, xy_from_z, Orbit, SolitonParams,
    TwoSummandsSpec, WarpedProductSpec, XyState, ZState,
};
use solitonflow_core::seed::{soliton_seed, SeedConfig};
use solitonflow_core::systems::{VectorField, XyField, ZField};

/// Warped products with a circle first and `r` in `2..=4`.
fn warped_spec() -> impl Strategy<Value = WarpedProductSpec> {
    (2usize..=4)
        .prop_flat_map(|r| (prop::collection::vec(2usize..=5, r - 1), prop::collection::vec(0.5f64..5.0, r - 1)))
        .prop_map(|(d, lambda)| {
            let d = [vec![1], d].concat();
            let lambda = [vec![0.0], lambda].concat();
            WarpedProductSpec::new(d, lambda).unwrap()
        })
}

fn z_state(r: usize) -> impl Strategy<Value = ZState> {
    (
        prop::collection::vec(0.2f64..5.0, r),
        prop::collection::vec(-2.0f64..2.0, r),
        -1.0f64..1.0,
        -3.0f64..0.0,
    )
        .prop_map(|(g, gdot, u, udot)| ZState { t: 1.0, g, gdot, u, udot })
}

fn spec_and_z() -> impl Strategy<Value = (WarpedProductSpec, ZState)> {
    warped_spec().prop_flat_map(|s| {
        let r = s.r();
        (Just(s), z_state(r))
    })
}

fn spec_and_xy() -> impl Strategy<Value = (WarpedProductSpec, XyState)> {
    warped_spec().prop_flat_map(|s| {
        let r = s.r();
        (
            Just(s),
            (prop::collection::vec(-1.5f64..1.5, r), prop::collection::vec(0.0f64..1.5, r))
                .prop_map(|(x, y)| XyState::new(x, y)),
        )
    })
}

fn rhs(spec: &WarpedProductSpec, v: &[f64]) -> Vec<f64> {
    let mut dv = vec![0.0; v.len()];
    XyField::new(spec).eval(0.0, v, &mut dv).unwrap();
    dv
}

/// Derivative of `q` along the phase-space flow. `q` is a polynomial of
/// degree at most two, for which the central difference is exact for any
/// step, so only rounding remains.
fn along_flow(spec: &WarpedProductSpec, xy: &XyState, q: impl Fn(&XyState) -> f64) -> f64 {
    let v = xy.to_vec();
    let f = rhs(spec, &v);
    let tau = 0.5;
    let shifted = |sign: f64| {
        let w: Vec<f64> = v.iter().zip(&f).map(|(a, b)| a + sign * tau * b).collect();
        q(&XyState::from_slice(0.0, &w))
    };
    (shifted(1.0) - shifted(-1.0)) / (2.0 * tau)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn lyapunov_is_the_first_integral_over_xi_squared((spec, z) in spec_and_z()) {
        let p = SolitonParams::steady(-1.0);
        let sc = scalars_from_z(&z, &spec, &p).unwrap();
        prop_assume!(sc.xi > 0.1);
        let xy = xy_from_z(&z, spec.d()).unwrap();
        let lhs = lyapunov(&xy, &spec) * sc.xi * sc.xi;
        let rhs = sc.s + sc.tr_l2 - sc.xi * sc.xi;
        let scale = sc.s.abs() + sc.tr_l2 + sc.xi * sc.xi;
        prop_assert!((lhs - rhs).abs() <= 1e-12 * scale, "{lhs} vs {rhs}");
        prop_assert!((script_h(&xy, spec.d()) - sc.tr_l / sc.xi).abs() <= 1e-12 * (1.0 + (sc.tr_l / sc.xi).abs()));
        prop_assert_eq!(sc.xi, sc.tr_l - z.udot);
        prop_assert!((sc.lcal.unwrap() * sc.xi * sc.xi - p.c).abs() <= 1e-12);
    }

    #[test]
    fn lyapunov_and_h_evolve_by_their_identities((spec, xy) in spec_and_xy()) {
        let l = lyapunov(&xy, &spec);
        let g = script_g(&xy);
        let h = script_h(&xy, spec.d());
        let dl = along_flow(&spec, &xy, |w| lyapunov(w, &spec));
        let dh = along_flow(&spec, &xy, |w| script_h(w, spec.d()));
        prop_assert!((dl - 2.0 * l * g).abs() < 1e-12 * (1.0 + (l * g).abs()) * 10.0, "{dl} vs {}", 2.0 * l * g);
        prop_assert!((dh - ((h - 1.0) * (g - 1.0) + l)).abs() < 1e-12 * (1.0 + g) * 10.0);
    }

    #[test]
    fn f_hat_at_e_is_the_minimum(spec in warped_spec()) {
        let e = point_e(&spec).unwrap();
        let fe = f_hat(&e, &spec).unwrap();
        prop_assert!((fe - f_hat_minimum(&spec)).abs() < 1e-12 * fe, "{fe}");
        prop_assert!(lyapunov(&e, &spec).abs() < 1e-12);
        prop_assert!((script_h(&e, spec.d()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn stationary_points_are_stationary(spec in warped_spec()) {
        let pts = critical_points(&spec).unwrap();
        let subsets = pts.iter().filter(|p| !p.subset.is_empty()).count();
        prop_assert_eq!(subsets, (1usize << (spec.r() - 1)) - 1);
        for p in &pts {
            prop_assert!(p.residual(&spec) < 1e-12, "{:?}", p.kind);
            prop_assert!((p.lyapunov(&spec) - p.kind.lyapunov_value()).abs() < 1e-12, "{:?}", p.kind);
        }
    }

    #[test]
    fn two_summands_ricci_is_homogeneous(
        d1 in 2usize..=4, d2 in 2usize..=8, a2 in 0.1f64..20.0, a3 in 0.1f64..5.0,
        g1 in 0.1f64..5.0, g2 in 0.1f64..5.0, c in 0.1f64..10.0,
    ) {
        let spec = TwoSummandsSpec::new(d1, d2, a2, a3).unwrap();
        let (r1, r2) = two_summands_ricci(g1, g2, &spec).unwrap();
        let (s1, s2) = two_summands_ricci(c * g1, c * g2, &spec).unwrap();
        prop_assert!((s1 * c * c - r1).abs() <= 1e-12 * (1.0 + r1.abs()));
        prop_assert!((s2 * c * c - r2).abs() <= 1e-12 * (1.0 + r2.abs()));
    }

    #[test]
    fn ricci_flat_runs_keep_udot_zero(a in 0.5f64..10.0, b in 0.5f64..10.0) {
        let spec = WarpedProductSpec::new(vec![1, 2, 3], vec![0.0, 1.0, 1.0]).unwrap();
        let p = SolitonParams::ricci_flat();
        let z0 = soliton_seed(&spec, &p, &SeedConfig::ricci_flat(vec![a, b])).unwrap();
        let tr = integrate(&ZField::warped(&spec, p), &ZMonitor::new(&spec, p), z0.t, &z0.to_vec(), &IntegratorConfig::new(0.001, 1.001)).unwrap();
        prop_assert!(tr.termination().is_complete());
        let k = tr.dim();
        for v in tr.states() {
            prop_assert_eq!(v[k - 1], 0.0);
            prop_assert_eq!(v[k - 2], z0.u);
        }
    }

    #[test]
    fn runs_are_deterministic_on_a_uniform_grid(a in 0.5f64..10.0, b in 0.5f64..10.0, decimate in 1usize..6) {
        let spec = WarpedProductSpec::new(vec![1, 2, 3], vec![0.0, 1.0, 1.0]).unwrap();
        let p = SolitonParams::steady(-1.0);
        let z0 = soliton_seed(&spec, &p, &SeedConfig::soliton(vec![a, b])).unwrap();
        let cfg = IntegratorConfig::new(0.001, 0.301).with_decimate(decimate);
        let run = || integrate(&ZField::warped(&spec, p), &ZMonitor::new(&spec, p), z0.t, &z0.to_vec(), &cfg).unwrap();
        let (x, y) = (run(), run());
        let bits = |t: &solitonflow_core::integrate::Trajectory<_>| t.states().flatten().map(|v: &f64| v.to_bits()).collect::<Vec<_>>();
        prop_assert_eq!(bits(&x), bits(&y));
        prop_assert_eq!(x.monitors(), y.monitors());
        prop_assert_eq!(x.len(), 300 / decimate + 1);
        prop_assert_eq!(x.monitors().len(), x.len());
        let t = x.times();
        for w in t.windows(2) {
            prop_assert!(w[1] > w[0]);
            prop_assert!((w[1] - w[0] - 0.001 * decimate as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn soliton_phase_space_runs_decrease_lyapunov(a in 0.5f64..10.0, b in 0.5f64..10.0) {
        let spec = WarpedProductSpec::new(vec![1, 2, 3], vec![0.0, 1.0, 1.0]).unwrap();
        let p = SolitonParams::steady(-1.0);
        let z0 = soliton_seed(&spec, &p, &SeedConfig::soliton(vec![a, b])).unwrap();
        let xy0 = xy_from_z(&z0, spec.d()).unwrap();
        let tr = integrate(&XyField::new(&spec), &XyMonitor::full(&spec), 0.0, &xy0.to_vec(), &IntegratorConfig::new(0.001, 10.0)).unwrap();
        prop_assert!(tr.termination().is_complete());
        let l: Vec<f64> = tr.monitors().iter().map(|m| m.lcal).collect();
        prop_assert!(l[0] < 0.0);
        for k in SKIP..l.len() - 1 {
            prop_assert!(l[k + 1] < l[k], "L increases at s = {}", tr.time(k + 1));
        }
    }
}

#[test]
fn example1_trajectory_stays_positive() {
    let spec = WarpedProductSpec::new(vec![1, 2, 3], vec![0.0, 1.0, 1.0]).unwrap();
    let p = SolitonParams::steady(-1.0);
    let z0 = soliton_seed(&spec, &p, &SeedConfig::soliton(vec![6.0, 3.0])).unwrap();
    let cfg = IntegratorConfig::new(0.001, 50.001).with_decimate(10);
    let tr = integrate(&ZField::warped(&spec, p), &ZMonitor::new(&spec, p), z0.t, &z0.to_vec(), &cfg).unwrap();
    assert!(tr.termination().is_complete());
    for (k, v) in tr.states().enumerate().skip(1) {
        let xy = xy_from_z(&ZState::from_slice(tr.time(k), v), spec.d()).unwrap();
        assert!(xy.x.iter().chain(&xy.y).all(|&c| c > 0.0), "t = {}", tr.time(k));
    }
}

/// Along the flow `dL/ds = 2 L G`, so `L(s) = L(0) exp(2 int_0^s G)`:
/// the constraint `L = 0` is invariant, but any offset is amplified by
/// that factor. A seed pushed off the locus follows the law closely.
#[test]
fn constraint_offset_grows_by_the_exponential_law() {
    let spec = WarpedProductSpec::new(vec![1, 2, 3], vec![0.0, 1.0, 1.0]).unwrap();
    let p = SolitonParams::ricci_flat();
    let z0 = soliton_seed(&spec, &p, &SeedConfig::ricci_flat(vec![6.0, 3.0]).constrained()).unwrap();
    let mut xy0 = xy_from_z(&z0, spec.d()).unwrap();
    xy0.x[0] *= 1.0 + 1e-6;
    let l0 = lyapunov(&xy0, &spec);
    assert!(l0 > 1e-6);
    let tr = integrate(&XyField::new(&spec), &XyMonitor::full(&spec), 0.0, &xy0.to_vec(), &IntegratorConfig::new(0.001, 20.0)).unwrap();
    let mut int_g = 0.0;
    let m = tr.monitors();
    for k in 1..tr.len() {
        int_g += 0.5 * (m[k].g + m[k - 1].g) * tr.step();
        if k % 1000 == 0 {
            let predicted = l0 * (2.0 * int_g).exp();
            assert!((m[k].lcal / predicted - 1.0).abs() < 1e-4, "s = {}: {} vs {predicted}", tr.time(k), m[k].lcal);
        }
    }
}

/// The constraint stays within ten times its seed offset exactly as long
/// as `int G ds <= ln(10)/2`. Near `E`, where `G = 1/(n-1)`, that allows
/// `s` up to about 5.7 for Example 1.
#[test]
fn constraint_stays_within_ten_times_its_seed_near_e() {
    let spec = WarpedProductSpec::new(vec![1, 2, 3], vec![0.0, 1.0, 1.0]).unwrap();
    let mut e = point_e(&spec).unwrap();
    assert!((script_g(&e) - 0.2).abs() < 1e-15);
    e.y[1] *= 1.0 + 1e-8;
    e.x[2] *= 1.0 - 1e-8;
    let (l0, h0) = (lyapunov(&e, &spec).abs(), (script_h(&e, spec.d()) - 1.0).abs());
    let tr = integrate(&XyField::new(&spec), &XyMonitor::full(&spec), 0.0, &e.to_vec(), &IntegratorConfig::new(0.001, 5.0)).unwrap();
    for m in tr.monitors() {
        assert!(m.lcal.abs() <= 10.0 * l0, "{} vs {l0}", m.lcal);
        assert!((m.h - 1.0).abs() <= 10.0 * h0.max(l0), "{} vs {h0}", m.h);
    }
}
