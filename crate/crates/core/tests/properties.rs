//! Property tests for the moment conversions, the likelihood surface, and
//! the economic post-processing layer.

use cezero::*;
use proptest::prelude::*;
use rand::Rng as _;
use rand::SeedableRng as _;

proptest! {
    #![proptest_config(ProptestConfig { cases: 1000, ..ProptestConfig::default() })]

    #[test]
    fn gamma_moment_round_trip(eta in 1e-3..1e4f64, lambda in 1e-3..1e4f64) {
        let (psi, zeta) = gamma_moments(eta, lambda).unwrap();
        let (eta2, lambda2) = gamma_from_moments(psi, zeta).unwrap();
        prop_assert!((eta2 - eta).abs() / eta < 1e-10);
        prop_assert!((lambda2 - lambda).abs() / lambda < 1e-10);
    }

    #[test]
    fn lognormal_moment_round_trip(eta in -20.0..20.0f64, lambda in 1e-3..5.0f64) {
        let (psi, zeta) = lognormal_moments(eta, lambda).unwrap();
        let (eta2, lambda2) = lognormal_from_moments(psi, zeta).unwrap();
        prop_assert!((eta2 - eta).abs() / eta.abs().max(1.0) < 1e-10);
        prop_assert!((lambda2 - lambda).abs() / lambda < 1e-10);
    }

    #[test]
    fn mixture_mean_is_bounded_by_components(p in 0.0..=1.0f64, psi0 in 0.0..1e6f64, psi1 in 0.0..1e3f64) {
        let mu = mixture_mean(p, psi0, psi1).unwrap();
        prop_assert!(mu >= psi0.min(psi1) - 1e-9);
        prop_assert!(mu <= psi0.max(psi1) + 1e-9);
    }

    #[test]
    fn inverse_link_stays_in_support(x in -1e3..1e3f64) {
        let p = inverse_link(x, LinkFunction::Logit);
        prop_assert!(p > 0.0 && p < 1.0);
        let m = inverse_link(x, LinkFunction::Log);
        prop_assert!(m > 0.0 && m.is_finite());
    }
}

fn random_increments(rng: &mut impl rand::Rng, n: usize) -> IncrementDraws {
    let mu_e0: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..0.8)).collect();
    let mu_e1: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..0.8)).collect();
    let mu_c0: Vec<f64> = (0..n).map(|_| rng.gen_range(10.0..500.0)).collect();
    let mu_c1: Vec<f64> = (0..n).map(|_| rng.gen_range(10.0..500.0)).collect();
    IncrementDraws::from_columns(mu_e0, mu_e1, mu_c0, mu_c1).unwrap()
}

/// Economic-layer contracts over 1,000 random draw sets.
#[test]
fn econ_layer_properties_hold_on_random_draw_sets() {
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(2024);
    let grid = WtpGrid::regular(30_000.0, 1_000.0).unwrap();
    for case in 0..1000 {
        let n = rng.gen_range(2..40);
        let inc = random_increments(&mut rng, n);

        let curve = ceac(&inc, &grid);
        assert!(curve.iter().all(|&v| (0.0..=1.0).contains(&v)), "case {case}: CEAC out of [0,1]");

        let info = evpi(&inc, &grid);
        assert!(info.iter().all(|&v| v >= 0.0), "case {case}: EVPI negative");

        // EIB is affine in k with slope mean(delta_e).
        let slope = inc.mean_delta_e();
        let at0 = eib(&inc, 0.0);
        for &k in &[500.0, 7_000.0, 22_000.0] {
            let direct = eib(&inc, k);
            assert!(
                (direct - (at0 + slope * k)).abs() <= 1e-9 * direct.abs().max(1.0),
                "case {case}: EIB not affine at k={k}"
            );
        }

        // The EIB sign flips exactly at the break-even threshold.
        if slope > 0.0 {
            if let Some(be) = break_even(&inc) {
                if be.dominance.is_none() {
                    let delta = 1e-6 * be.k_star.max(1.0);
                    assert!(eib(&inc, be.k_star + delta) > 0.0, "case {case}");
                    assert!(eib(&inc, be.k_star - delta) < 0.0, "case {case}");
                }
            }
        }
    }
}

#[test]
fn ceac_is_invariant_to_draw_permutation() {
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(5);
    let inc = random_increments(&mut rng, 64);
    let grid = WtpGrid::regular(20_000.0, 500.0).unwrap();
    let base = ceac(&inc, &grid);

    let mut order: Vec<usize> = (0..inc.len()).collect();
    for i in (1..order.len()).rev() {
        let j = rng.gen_range(0..=i);
        order.swap(i, j);
    }
    let permute = |v: &[f64]| -> Vec<f64> { order.iter().map(|&i| v[i]).collect() };
    let shuffled = IncrementDraws::from_columns(
        permute(&inc.mu_e[0]),
        permute(&inc.mu_e[1]),
        permute(&inc.mu_c[0]),
        permute(&inc.mu_c[1]),
    )
    .unwrap();
    assert_eq!(base, ceac(&shuffled, &grid));
}

/// Central differences of the log posterior at two step sizes must agree:
/// the surface is smooth in every continuous parameter at interior states.
#[test]
fn finite_difference_gradient_consistency() {
    let truth = TruthParams::case_study();
    let (data, _) = simulate_dataset(&truth, 60, 41).unwrap();
    let spec = ModelSpec::case_study(CostFamily::Gamma);
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(303);
    let mut random_arm = |_t: usize| ArmParams {
        beta: vec![rng.gen_range(-3.5..-0.5)],
        psi0: rng.gen_range(0.2..0.8) * spec.h_psi,
        zeta0: rng.gen_range(0.2..0.8) * spec.h_zeta,
        xi: rng.gen_range(0.5..1.2),
        gamma: rng.gen_range(-2e-3..2e-3),
        log_tau: rng.gen_range(2.0..5.0),
    };
    let states: Vec<ParamState> = (0..10)
        .map(|_| ParamState { arms: [random_arm(0), random_arm(1)] })
        .collect();

    let f = |state: &ParamState| log_posterior(state, &data, &spec);

    for (si, state) in states.iter().enumerate() {
        for (name, getter, setter) in coordinate_accessors() {
            let v = getter(state);
            let h = 1e-5 * v.abs().max(1.0);
            let central = |step: f64| -> f64 {
                let mut hi = state.clone();
                setter(&mut hi, v + step);
                let mut lo = state.clone();
                setter(&mut lo, v - step);
                (f(&hi) - f(&lo)) / (2.0 * step)
            };
            let d1 = central(h);
            let d2 = central(h / 2.0);
            assert!(d1.is_finite() && d2.is_finite(), "state {si}, {name}");
            let denom = d1.abs().max(d2.abs()).max(1e-4);
            assert!(
                (d1 - d2).abs() / denom < 1e-4,
                "state {si}, {name}: d(h)={d1}, d(h/2)={d2}"
            );
        }
    }
}

type Getter = fn(&ParamState) -> f64;
type Setter = fn(&mut ParamState, f64);

fn coordinate_accessors() -> Vec<(&'static str, Getter, Setter)> {
    vec![
        ("beta0_0", |s| s.arms[0].beta[0], |s, v| s.arms[0].beta[0] = v),
        ("psi0_0", |s| s.arms[0].psi0, |s, v| s.arms[0].psi0 = v),
        ("zeta0_0", |s| s.arms[0].zeta0, |s, v| s.arms[0].zeta0 = v),
        ("xi_0", |s| s.arms[0].xi, |s, v| s.arms[0].xi = v),
        ("gamma_0", |s| s.arms[0].gamma, |s, v| s.arms[0].gamma = v),
        ("log_tau_0", |s| s.arms[0].log_tau, |s, v| s.arms[0].log_tau = v),
        ("beta0_1", |s| s.arms[1].beta[0], |s, v| s.arms[1].beta[0] = v),
        ("psi0_1", |s| s.arms[1].psi0, |s, v| s.arms[1].psi0 = v),
        ("zeta0_1", |s| s.arms[1].zeta0, |s, v| s.arms[1].zeta0 = v),
        ("xi_1", |s| s.arms[1].xi, |s, v| s.arms[1].xi = v),
        ("gamma_1", |s| s.arms[1].gamma, |s, v| s.arms[1].gamma = v),
        ("log_tau_1", |s| s.arms[1].log_tau, |s, v| s.arms[1].log_tau = v),
    ]
}
