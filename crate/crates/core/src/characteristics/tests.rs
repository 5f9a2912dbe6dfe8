use super::*;
use crate::model::{RateLaw, TimeGrid};
use approx::assert_relative_eq;
use proptest::prelude::*;

fn law(k1: f64, k2: f64, n: f64) -> GrowthLaw {
    GrowthLaw::new(RateLaw::linear(k1), RateLaw::linear(k2), n).unwrap()
}

/// Exact solution for `n = 0` and constant rates: the radius moves linearly
/// and `x2 - g1/G` decays like `(x1 / x1(t))^3`.
fn closed_form_n0(x: DisperseState, g1: f64, g: f64, t: f64) -> DisperseState {
    let r = x.radius + g * t;
    let fixed = g1 / g;
    DisperseState::new(r, fixed + (x.composition - fixed) * (x.radius / r).powi(3))
}

#[test]
fn step_radius_examples() {
    assert_relative_eq!(
        step_radius(0.1, 2.0, 0.0).unwrap(),
        2.1,
        max_relative = 1e-15
    );
    for n in [-2.0, -1.0, 0.0, 0.5, 2.0] {
        assert_relative_eq!(
            step_radius(0.37, 0.0, n).unwrap(),
            0.37,
            max_relative = 1e-15
        );
    }
    let r = step_radius(0.1, 0.48, -1.0).unwrap();
    assert_relative_eq!(r, 0.97f64.sqrt(), max_relative = 1e-15);
    assert_relative_eq!(r, 0.9849, max_relative = 1e-4);
}

#[test]
fn step_radius_rejects_negative_radicand() {
    assert!(matches!(
        step_radius(0.1, -1.0, 0.0),
        Err(Error::Step { .. })
    ));
    assert!(step_radius(0.0, 1.0, 0.0).is_err());
}

#[test]
fn step_composition_examples() {
    let x = DisperseState::new(0.1, 0.75);
    assert_eq!(step_composition(x, 0.0, 0.0, 0.0), 0.75);
    let value = step_composition(x, 2.0 * 1e-4, 12.0 * 1e-4, 0.0);
    // (0.006 + 0.75) * exp(-0.036)
    assert_relative_eq!(value, 0.756 * (-0.036f64).exp(), max_relative = 1e-15);
    assert!((value - 0.7290).abs() < 5e-4);
}

#[test]
fn step_composition_matches_ode_over_one_step() {
    let law = law(1.0, 5.0, 0.0);
    let x = DisperseState::new(0.1, 0.75);
    let c = [2.0, 2.0];
    let one_step_error = |dt: f64| {
        let discrete = step_composition(x, 2.0 * dt, 12.0 * dt, 0.0);
        let exact = ode_oracle(
            0.0,
            x,
            dt,
            ConcentrationInput::Function(&|_| c),
            &law,
            1e-12,
        )
        .unwrap();
        (discrete - exact.composition).abs()
    };
    let e1 = one_step_error(1e-4);
    let e2 = one_step_error(5e-5);
    assert!(e1 < 5e-4, "one-step error {e1}");
    let ratio = e1 / e2;
    assert!((ratio - 4.0).abs() < 0.5, "local error ratio {ratio}");
}

#[test]
fn symmetric_increments_stay_near_half() {
    let x = DisperseState::new(0.2, 0.5);
    for inc in [1.0, 1e-1, 1e-2, 1e-3] {
        let v = step_composition(x, inc / 2.0, inc, -1.0);
        assert!((0.0..=1.0).contains(&v));
    }
    let small = step_composition(x, 5e-7, 1e-6, 0.0);
    assert!((small - 0.5).abs() < 1e-9);
}

#[test]
fn first_order_consistency_with_varying_concentration() {
    // One step starting from t0 with concentration frozen at c(t0), against
    // the ODE with the smooth c(t).
    let law = law(1.0, 5.0, -1.0);
    let c = |t: f64| [2.0 * (-30.0 * t).exp(), 2.0 - 40.0 * t];
    let x = DisperseState::new(0.12, 0.6);
    let error = |dt: f64| {
        let rates = law.rates(c(0.0));
        let r = step_radius(x.radius, rates.total() * dt, -1.0).unwrap();
        let f = step_composition(x, rates.g1 * dt, rates.total() * dt, -1.0);
        let exact = ode_oracle(0.0, x, dt, ConcentrationInput::Function(&c), &law, 1e-13).unwrap();
        (r - exact.radius).abs().max((f - exact.composition).abs())
    };
    let ratio = error(2e-6) / error(1e-6);
    assert!((ratio - 4.0).abs() < 0.5, "ratio {ratio}");
}

#[test]
fn oracle_trivial_cases() {
    let zero = law(0.0, 0.0, 0.0);
    let x = DisperseState::new(0.3, 0.4);
    let y = ode_oracle(
        0.0,
        x,
        1.0,
        ConcentrationInput::Function(&|_| [1.0, 1.0]),
        &zero,
        1e-10,
    )
    .unwrap();
    assert_eq!(y, x);

    let law = law(1.0, 5.0, 0.0);
    let x = DisperseState::new(0.1, 0.75);
    let y = ode_oracle(
        0.0,
        x,
        0.01,
        ConcentrationInput::Function(&|_| [2.0, 2.0]),
        &law,
        1e-10,
    )
    .unwrap();
    let exact = closed_form_n0(x, 2.0, 12.0, 0.01);
    assert_relative_eq!(y.radius, exact.radius, max_relative = 1e-9);
    assert_relative_eq!(y.composition, exact.composition, max_relative = 1e-9);

    // backwards in time returns to the start
    let back = ode_oracle(
        0.01,
        y,
        0.0,
        ConcentrationInput::Function(&|_| [2.0, 2.0]),
        &law,
        1e-11,
    )
    .unwrap();
    assert_relative_eq!(back.radius, x.radius, max_relative = 1e-9);
    assert_relative_eq!(back.composition, x.composition, max_relative = 1e-9);
}

#[test]
fn oracle_rejects_bad_tolerance() {
    let law = law(1.0, 1.0, 0.0);
    let x = DisperseState::new(0.1, 0.5);
    assert!(ode_oracle(
        0.0,
        x,
        1.0,
        ConcentrationInput::Function(&|_| [1.0, 1.0]),
        &law,
        0.0
    )
    .is_err());
}

fn benchmark_path(points: usize) -> ConcentrationPath {
    let grid = TimeGrid::uniform(0.01, points).unwrap();
    ConcentrationPath::sampled(grid, |t| [2.0 - 10.0 * t, 2.0 * (-20.0 * t).exp()])
}

#[test]
fn identity_and_round_trip() {
    let law = law(1.0, 5.0, 0.0);
    let path = benchmark_path(201);
    let ch = Characteristics::new(&path, &law, 0.05);
    let x = DisperseState::new(0.1, 0.75);
    assert_eq!(ch.map(37, x, 37).unwrap(), x);
    let y = ch.map(0, x, 200).unwrap();
    assert!(y.radius > x.radius);
    let back = ch.map(200, y, 0).unwrap();
    assert_relative_eq!(back.radius, x.radius, max_relative = 1e-12);
    assert_relative_eq!(back.composition, x.composition, max_relative = 1e-12);
}

#[test]
fn backward_without_ancestor() {
    let law = law(1.0, 5.0, 0.0);
    let path = benchmark_path(101);
    let ch = Characteristics::new(&path, &law, 0.05);
    // radius smaller than the total growth: radicand <= 0
    assert!(matches!(
        ch.map(100, DisperseState::new(0.05, 0.5), 0),
        Err(Error::PreImageOutside)
    ));
    // pre-image radius below x_min
    let grown = ch.accumulated(100);
    assert!(matches!(
        ch.map(100, DisperseState::new(grown + 0.01, 0.5), 0),
        Err(Error::PreImageOutside)
    ));
    // composition pre-image leaves [0, 1]
    assert!(matches!(
        ch.map(100, DisperseState::new(0.2, 0.0), 0),
        Err(Error::PreImageOutside)
    ));
}

#[test]
fn matches_closed_form_for_constant_concentration() {
    let law = law(1.0, 5.0, 0.0);
    let x = DisperseState::new(0.1, 0.75);
    let exact = closed_form_n0(x, 2.0, 12.0, 0.01);
    let error = |points: usize| {
        let path =
            ConcentrationPath::constant(TimeGrid::uniform(0.01, points).unwrap(), [2.0, 2.0]);
        let y = xi_multi_step(0, x, points - 1, &path, &law, 0.05).unwrap();
        assert_relative_eq!(y.radius, exact.radius, max_relative = 1e-12);
        ((y.composition - exact.composition) / exact.composition).abs()
    };
    let e1 = error(1001);
    let e2 = error(2001);
    assert!(e1 < 5e-3);
    assert!((e1 / e2 - 2.0).abs() < 0.1, "ratio {}", e1 / e2);
}

#[test]
fn accumulated_and_per_step_radius_agree() {
    for n in [0.0, -1.0, 0.4, 1.7] {
        let law = law(1.0, 2.0, n);
        let path = benchmark_path(501);
        let ch = Characteristics::new(&path, &law, 0.01);
        let x = DisperseState::new(0.3, 0.25);
        let mut r = x.radius;
        let mut f = x.composition;
        for l in 0..500 {
            let (g1, total) = ch.increments(l);
            let next_f = step_composition(DisperseState::new(r, f), g1, total, n);
            r = step_radius(r, total, n).unwrap();
            f = next_f;
        }
        let y = ch.map(0, x, 500).unwrap();
        assert_relative_eq!(y.radius, r, max_relative = 1e-12);
        assert_relative_eq!(y.composition, f, max_relative = 1e-12);
        let traj = ch.trajectory(x).unwrap();
        assert_eq!(traj.len(), 501);
        assert_relative_eq!(traj[500].radius, y.radius, max_relative = 1e-14);
        assert_eq!(traj[500].composition, y.composition);
    }
}

#[test]
fn jacobian_trivial_cases() {
    let law_ = law(1.0, 5.0, 0.0);
    let path = benchmark_path(11);
    let x = DisperseState::new(0.1, 0.75);
    let j = jacobian_factor(0, x, 0, &path, &law_, 0.05).unwrap();
    assert_eq!(j.psi, 1.0);
    assert_eq!(j.radius_ratio, 1.0);

    let zero = law(0.0, 0.0, -1.0);
    let j = jacobian_factor(0, x, 10, &path, &zero, 0.05).unwrap();
    assert_eq!(j.psi, 1.0);
    assert_eq!(j.radius_ratio, 1.0);
    assert_eq!(j.determinant(), 1.0);
}

#[test]
fn jacobian_matches_finite_differences() {
    for n in [0.0, -1.0, 0.5] {
        let law = law(1.0, 5.0, n);
        let path = benchmark_path(401);
        let ch = Characteristics::new(&path, &law, 0.05);
        let x = DisperseState::new(0.11, 0.7);
        let h = 1e-6;
        let map = |x1: f64, x2: f64| ch.map(0, DisperseState::new(x1, x2), 400).unwrap();
        let d1p = map(x.radius + h, x.composition);
        let d1m = map(x.radius - h, x.composition);
        let d2p = map(x.radius, x.composition + h);
        let d2m = map(x.radius, x.composition - h);
        let a11 = (d1p.radius - d1m.radius) / (2.0 * h);
        let a21 = (d1p.composition - d1m.composition) / (2.0 * h);
        let a12 = (d2p.radius - d2m.radius) / (2.0 * h);
        let a22 = (d2p.composition - d2m.composition) / (2.0 * h);
        let det = a11 * a22 - a12 * a21;
        let j = ch.jacobian_factor(0, x, 400).unwrap();
        assert_relative_eq!(j.determinant(), det, max_relative = 1e-6);

        // backward map is the inverse: determinants multiply to one
        let y = ch.map(0, x, 400).unwrap();
        let jb = ch.jacobian_factor(400, y, 0).unwrap();
        assert_relative_eq!(
            jb.determinant() * j.determinant(),
            1.0,
            max_relative = 1e-10
        );
    }
}

#[test]
fn path_oracle_matches_discrete_map_on_coarse_grid() {
    // With the piecewise-constant path the only discrepancy left is the
    // radius frozen inside each composition step.
    let law = law(1.0, 5.0, 0.0);
    let x = DisperseState::new(0.1, 0.75);
    let error = |points: usize| {
        let path = benchmark_path(points);
        let y = xi_multi_step(0, x, points - 1, &path, &law, 0.05).unwrap();
        let z = ode_oracle(0.0, x, 0.01, ConcentrationInput::Path(&path), &law, 1e-11).unwrap();
        ((y.composition - z.composition) / z.composition).abs()
    };
    let ratio = error(501) / error(1001);
    assert!((ratio - 2.0).abs() < 0.1, "ratio {ratio}");
}

proptest! {
    #[test]
    fn semigroup(
        k in 0usize..60, m in 0usize..60, i in 0usize..60,
        x1 in 0.06f64..0.3, x2 in 0.0f64..=1.0,
        n in prop::sample::select(vec![0.0, -1.0, 0.5, -0.3]),
        ratio in 0.0f64..10.0,
    ) {
        let (k, m, i) = {
            let mut v = [k, m, i];
            v.sort();
            (v[0], v[1], v[2])
        };
        let law = law(1.0, ratio, n);
        let path = benchmark_path(60);
        let ch = Characteristics::new(&path, &law, 0.05);
        let x = DisperseState::new(x1, x2);
        let direct = ch.map(k, x, i).unwrap();
        let mid = ch.map(k, x, m).unwrap();
        let composed = ch.map(m, mid, i).unwrap();
        prop_assert!(((composed.radius - direct.radius) / direct.radius).abs() < 1e-12);
        prop_assert!((composed.composition - direct.composition).abs() <= 1e-12 * direct.composition.abs().max(1e-300) + 1e-15);
    }

    #[test]
    fn composition_bounded_and_radius_monotone(
        x1 in 0.01f64..5.0, x2 in 0.0f64..=1.0,
        g1 in 0.0f64..100.0, g2 in 0.0f64..100.0, dt in 0.0f64..1.0,
        n in -2.0f64..0.95,
    ) {
        let x = DisperseState::new(x1, x2);
        let f = step_composition(x, g1 * dt, (g1 + g2) * dt, n);
        prop_assert!((0.0..=1.0).contains(&f));
        let r = step_radius(x1, (g1 + g2) * dt, n).unwrap();
        prop_assert!(r >= x1);
    }

    #[test]
    fn radius_order_preserved(a in 0.05f64..0.3, b in 0.05f64..0.3, n in -1.5f64..0.9) {
        prop_assume!(a != b);
        let law = law(1.0, 3.0, n);
        let path = benchmark_path(40);
        let ch = Characteristics::new(&path, &law, 0.05);
        let ra = ch.radius(0, a, 39).unwrap();
        let rb = ch.radius(0, b, 39).unwrap();
        prop_assert_eq!(a < b, ra < rb);
    }
}
