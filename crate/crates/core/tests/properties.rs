use std::f64::consts::{PI, TAU};

use proptest::prelude::*;

use idealflow::curve::{energy, ks_l2sq, make_perturbed_circle, mean_curvature, winding, Mode};
use idealflow::flow::{constraint_h, constraint_h_from_speed, flow_terms, rhs, speed_g};
use idealflow::grid::{antideriv, deriv, integrate, GridFunction};
use idealflow::ineq::{check_ksup, check_psw};
use idealflow::io::config::parse_config;
use idealflow::io::presets::{preset, PRESETS};

const N: usize = 64;

/// Trigonometric polynomial with modes `1..=coeffs.len()`, band-limited
/// well below `N / 4`.
fn trig(length: f64, mean: f64, coeffs: &[(f64, f64)]) -> GridFunction {
    GridFunction::from_fn(N, length, |s| {
        let x = TAU * s / length;
        mean + coeffs
            .iter()
            .enumerate()
            .map(|(i, (a, b))| {
                let m = (i + 1) as f64;
                a * (m * x).cos() + b * (m * x).sin()
            })
            .sum::<f64>()
    })
    .unwrap()
}

fn coeffs() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..8)
}

fn modes() -> impl Strategy<Value = Vec<Mode>> {
    prop::collection::vec((2u32..8, 0.0..0.1f64, 0.0..TAU), 1..4)
        .prop_map(|v| v.into_iter().map(|(m, a, p)| Mode::new(m, a, p)).collect())
}

fn max_diff(a: &GridFunction, b: &GridFunction) -> f64 {
    a.sub(b).max_abs()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn derivative_is_linear(a in coeffs(), b in coeffs(), alpha in -3.0..3.0f64, order in 1u32..5) {
        let (f, g) = (trig(3.0, 0.2, &a), trig(3.0, -1.0, &b));
        let lhs = deriv(&f.scale(alpha).add(&g), order).unwrap();
        let rhs = deriv(&f, order).unwrap().scale(alpha).add(&deriv(&g, order).unwrap());
        let scale = 1.0 + lhs.max_abs();
        prop_assert!(max_diff(&lhs, &rhs) <= 1e-10 * scale);
    }

    #[test]
    fn repeated_derivative_composes(a in coeffs()) {
        let f = trig(TAU, 0.5, &a);
        let twice = deriv(&deriv(&f, 1).unwrap(), 1).unwrap();
        prop_assert!(max_diff(&twice, &deriv(&f, 2).unwrap()) <= 1e-10);
    }

    #[test]
    fn integration_by_parts(a in coeffs(), b in coeffs(), length in 1.0..10.0f64) {
        let (f, g) = (trig(length, 0.3, &a), trig(length, 1.0, &b));
        let lhs = integrate(&f.mul(&deriv(&g, 1).unwrap()));
        let rhs = -integrate(&deriv(&f, 1).unwrap().mul(&g));
        prop_assert!((lhs - rhs).abs() <= 1e-10);
    }

    #[test]
    fn antiderivative_round_trip(a in coeffs(), length in 1.0..10.0f64) {
        let f = trig(length, 0.0, &a);
        let back = deriv(&antideriv(&f).unwrap(), 1).unwrap();
        prop_assert!(max_diff(&back, &f) <= 1e-10);
    }

    #[test]
    fn poincare_wirtinger_holds(a in coeffs(), length in 0.5..20.0f64) {
        let sides = check_psw(&trig(length, 0.0, &a)).unwrap();
        prop_assert!(sides.lhs_l2 <= sides.rhs_l2 + 1e-10);
        prop_assert!(sides.lhs_sup <= sides.rhs_sup + 1e-10);
    }

    #[test]
    fn profile_deviation_bounded_by_energy(m in modes(), omega in prop::sample::select(vec![1i64, 2, 3, -1])) {
        let p = make_perturbed_circle(TAU, omega, N, &m).unwrap();
        let dev = p.k().offset(-mean_curvature(&p));
        let dev_l2sq = integrate(&dev.mul(&dev));
        prop_assert!(dev_l2sq <= TAU * TAU / (4.0 * PI * PI) * ks_l2sq(&p) + 1e-10);
        let (lhs, rhs) = check_ksup(&p);
        prop_assert!(lhs <= rhs + 1e-10);
    }

    #[test]
    fn flow_terms_respect_invariants(m in modes()) {
        let p = make_perturbed_circle(TAU, 1, N, &m).unwrap();
        prop_assert!((winding(&p) - 1.0).abs() <= 1e-12);
        let g = speed_g(&p, false).unwrap();
        prop_assert!((constraint_h(&p) - constraint_h_from_speed(&p, &g)).abs() <= 1e-10);
        let terms = flow_terms(&p, false).unwrap();
        prop_assert!(terms.constraint_integral.abs() <= 1e-10);
        prop_assert!(integrate(&rhs(&p).unwrap()).abs() <= 1e-10);
    }

    #[test]
    fn energy_scales_quadratically(m in modes(), c in 0.1..3.0f64) {
        let p = make_perturbed_circle(TAU, 1, N, &m).unwrap();
        let scaled: Vec<Mode> = m.iter().map(|x| Mode::new(x.m, c * x.amplitude, x.phase)).collect();
        let q = make_perturbed_circle(TAU, 1, N, &scaled).unwrap();
        prop_assert!((energy(&q) - c * c * energy(&p)).abs() <= 1e-10 * (1.0 + energy(&q)));
    }

    #[test]
    fn config_round_trips(
        idx in 0..PRESETS.len(),
        dt in 1e-6..1e-3f64,
        n in prop::sample::select(vec![16usize, 32, 64, 128]),
        seed in any::<u64>(),
        m in modes(),
    ) {
        let mut c = preset(PRESETS[idx].0).unwrap();
        c.integrator.dt = dt;
        c.n = n;
        c.seed = seed;
        c.initial = idealflow::io::config::InitialData::PerturbedCircle { modes: m };
        let back = parse_config(&c.to_json()).unwrap();
        prop_assert_eq!(back, c);
    }
}
