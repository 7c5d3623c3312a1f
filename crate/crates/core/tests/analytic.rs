use std::f64::consts::PI;

use mmnoma_core::analytic::{rate_threshold, AccessMode};
use mmnoma_core::geometry::{far_conditional_pdf, nearest_distance_pdf};
use mmnoma_core::model::fejer_gain;
use mmnoma_core::montecarlo::simulate_trial;
use mmnoma_core::specfun::{psi, ChebyshevRule};
use mmnoma_core::{AnalyticContext, Error, LinkState, Regime, SimOptions, SystemConfig};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn ctx(cfg: SystemConfig) -> AnalyticContext {
    AnalyticContext::new(cfg).unwrap()
}

fn at_snr(snr_db: f64) -> SystemConfig {
    SystemConfig {
        snr_db,
        ..SystemConfig::default()
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

#[test]
fn loose_integrals_equal_closed_forms() {
    for snr in [60.0, 70.0, 83.0, 90.0] {
        let c = ctx(at_snr(snr)).with_loose_network(true);
        let (near, near_closed) = (
            c.coverage_near().unwrap().value,
            c.coverage_near_closed().unwrap().value,
        );
        let (far, far_closed) = (c.coverage_far().unwrap().value, c.coverage_far_closed().unwrap().value);
        assert!(rel(near, near_closed) < 1e-6, "snr {snr}: {near} vs {near_closed}");
        assert!(rel(far, far_closed) < 1e-6, "snr {snr}: {far} vs {far_closed}");
    }
}

#[test]
fn closed_near_at_zero_threshold() {
    let cfg = SystemConfig {
        threshold_near: 0.0,
        threshold_far: 0.0,
        ..SystemConfig::default()
    };
    let got = ctx(cfg).coverage_near_closed().unwrap().value;
    let k = cfg.num_pairs as f64;
    let want = 1.0 - (-k * cfg.los_radius.powi(2) / cfg.user_variance).exp();
    assert!((got - want).abs() < 1e-12);
}

#[test]
fn zero_threshold_covers_everyone() {
    let cfg = SystemConfig {
        threshold_near: 0.0,
        threshold_far: 0.0,
        ..SystemConfig::default()
    };
    let c = ctx(cfg);
    assert!((c.coverage_near().unwrap().value - 1.0).abs() < 1e-8);
    assert!((c.coverage_far().unwrap().value - 1.0).abs() < 1e-8);
}

#[test]
fn closed_form_tracks_theorem_at_defaults() {
    let c = ctx(SystemConfig::default());
    let exact = c.coverage_near().unwrap().value;
    let closed = c.coverage_near_closed().unwrap().value;
    assert!((exact - closed).abs() < 0.02);
}

#[test]
fn more_pairs_help_the_near_user() {
    let one = SystemConfig {
        num_pairs: 1,
        ..SystemConfig::default()
    };
    let two = SystemConfig::default();
    assert!(ctx(two).coverage_near_closed().unwrap().value >= ctx(one).coverage_near_closed().unwrap().value);
}

#[test]
fn far_closed_nonincreasing_in_variance() {
    let values: Vec<f64> = [50.0, 100.0, 200.0]
        .iter()
        .map(|&v| {
            let cfg = SystemConfig {
                user_variance: v,
                ..SystemConfig::default()
            };
            ctx(cfg).coverage_far_closed().unwrap().value
        })
        .collect();
    assert!(values.windows(2).all(|w| w[1] <= w[0]), "{values:?}");
}

#[test]
fn near_beats_far_at_defaults() {
    let c = ctx(SystemConfig::default());
    assert!(c.coverage_far().unwrap().value <= c.coverage_near().unwrap().value);
}

#[test]
fn far_threshold_monotone() {
    let values: Vec<f64> = [0.05, 0.2, 0.5, 1.0]
        .iter()
        .map(|&t| {
            let cfg = SystemConfig {
                threshold_far: t,
                ..SystemConfig::default()
            };
            ctx(cfg).coverage_far().unwrap().value
        })
        .collect();
    assert!(values.windows(2).all(|w| w[1] <= w[0]), "{values:?}");
}

/// Nested `r1`/`rf` integral over the conditional far-user law, done by
/// composite Gauss-Legendre on fixed panels.
fn nested_far(c: &AnalyticContext, beta: f64, tau: f64) -> f64 {
    const X: [f64; 5] = [
        0.0,
        0.538_469_310_105_683_1,
        -0.538_469_310_105_683_1,
        0.906_179_845_938_664,
        -0.906_179_845_938_664,
    ];
    const W: [f64; 5] = [
        0.568_888_888_888_888_9,
        0.478_628_670_499_366_5,
        0.478_628_670_499_366_5,
        0.236_926_885_056_189_1,
        0.236_926_885_056_189_1,
    ];
    let cfg = c.config();
    let sigma = cfg.user_sigma();
    let gl = |f: &dyn Fn(f64) -> f64, a: f64, b: f64, panels: usize| -> f64 {
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|p| {
                let mid = a + (p as f64 + 0.5) * h;
                X.iter().zip(W).map(|(x, w)| w * f(mid + 0.5 * h * x)).sum::<f64>() * 0.5 * h
            })
            .sum()
    };
    let theta = |r: f64| c.theta(cfg.link_state(r), r, tau, beta).unwrap();
    let upper = 12.0 * sigma;
    let inner = |r1: f64| {
        let f = |rf: f64| theta(rf) * far_conditional_pdf(rf, r1, sigma).unwrap();
        gl(&f, r1, upper, 160)
    };
    let outer = |r1: f64| nearest_distance_pdf(r1, cfg.num_pairs, sigma).unwrap() * inner(r1);
    gl(&outer, 0.0, 6.0 * sigma, 60)
}

#[test]
fn far_integral_reduction_matches_nested_form() {
    let cfg = SystemConfig::default();
    let n2 = 6;
    let c = ctx(cfg).with_nodes(50, n2).unwrap();
    let rule = ChebyshevRule::new(n2).unwrap();
    let beta = cfg.decoding_margin();
    let nested = PI / (2.0 * n2 as f64)
        * rule
            .nodes()
            .iter()
            .zip(rule.weights())
            .map(|(&z, &w)| {
                let g = fejer_gain(z * cfg.angular_ratio, cfg.antennas);
                w * nested_far(&c, beta * g, cfg.threshold_far)
            })
            .sum::<f64>();
    let reduced = c.coverage_far().unwrap().value;
    assert!((nested - reduced).abs() < 1e-6, "{nested} vs {reduced}");
}

/// Draw from the distribution whose CCDF is the Alzer expression:
/// the maximum of `n` exponentials with rate `psi(n)`.
fn surrogate_fading(n: u32, rng: &mut impl Rng) -> f64 {
    let rate = psi(n);
    (0..n)
        .map(|_| -(1.0 - rng.random::<f64>()).ln() / rate)
        .fold(0.0, f64::max)
}

/// Coverage with the library's geometry and interference but serving-link
/// fading replaced by the surrogate, under which the formulas are exact.
fn surrogate_coverage(cfg: &SystemConfig, opts: &SimOptions, trials: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let m = cfg.antennas as f64;
    let (mut near, mut far) = (0u64, 0u64);
    for t in 0..trials {
        let o = simulate_trial(cfg, opts, 4242, t).unwrap();
        let shape = |r: f64| cfg.path_loss.shape(cfg.link_state(r));
        let x = m * surrogate_fading(shape(o.r_near), &mut rng) * cfg.path_loss(o.r_near).unwrap();
        let g = fejer_gain(rng.random_range(-cfg.angular_ratio..=cfg.angular_ratio), cfg.antennas);
        let y = m * surrogate_fading(shape(o.r_far), &mut rng) * g * cfg.path_loss(o.r_far).unwrap();
        let (wk, wj) = (o.interference_near + o.noise, o.interference_far + o.noise);
        let (ak, aj) = (cfg.alloc_near, cfg.alloc_far);
        if aj * x / (ak * x + wk) > cfg.threshold_far && ak * x / wk > cfg.threshold_near {
            near += 1;
        }
        if aj * y / (ak * y + wj) > cfg.threshold_far {
            far += 1;
        }
    }
    (near as f64 / trials as f64, far as f64 / trials as f64)
}

#[test]
fn theorem_exact_under_surrogate_fading() {
    let trials = 60_000;
    for snr in [70.0, 80.0] {
        let cfg = at_snr(snr);
        let c = ctx(cfg);
        let (near, far) = surrogate_coverage(&cfg, &SimOptions::default(), trials);
        let (pk, pj) = (c.coverage_near().unwrap().value, c.coverage_far().unwrap().value);
        for (sim, ana) in [(near, pk), (far, pj)] {
            let se = (ana * (1.0 - ana) / trials as f64).sqrt();
            assert!(
                (sim - ana).abs() < 4.0 * se,
                "snr {snr}: sim {sim} vs analytic {ana} (se {se})"
            );
        }
    }
}

#[test]
fn throughput_limits_and_thresholds() {
    let cfg = SystemConfig {
        snr_db: 300.0,
        ..SystemConfig::default()
    };
    let c = ctx(cfg).with_loose_network(true);
    for mode in [AccessMode::Noma, AccessMode::Oma] {
        let t = c.throughput(mode).unwrap();
        assert!(rel(t.rate, cfg.rate_near + cfg.rate_far) < 1e-6, "{mode:?}: {}", t.rate);
    }
    let t = c.throughput(AccessMode::Noma).unwrap();
    assert!((t.threshold_near - 1.0).abs() < 1e-12);
    assert!((t.threshold_far - (0.3f64.exp2() - 1.0)).abs() < 1e-12);
    assert!((rate_threshold(3e7, 1e8, AccessMode::Oma) - 0.515_716_566).abs() < 1e-9);
}

#[test]
fn noma_throughput_rejects_undecodable_split() {
    let cfg = SystemConfig {
        alloc_near: 0.9,
        alloc_far: 0.1,
        threshold_far: 0.05,
        ..SystemConfig::default()
    };
    // tau_j = 2^0.3 - 1 > a_j / a_k
    let err = ctx(cfg).throughput(AccessMode::Noma).unwrap_err();
    assert!(matches!(err, Error::UnsupportedRegime(Regime::NotDecodable { .. })));
    assert!(ctx(cfg).throughput(AccessMode::Oma).is_ok());
}

#[test]
fn noise_only_theta_matches_hand_value() {
    let cfg = SystemConfig {
        bs_density: 1e-300,
        ..SystemConfig::default()
    };
    let c = ctx(cfg);
    let (r, tau, beta) = (40.0, 1.0, 0.1);
    let p = cfg.path_loss;
    let s = psi(3) * tau * r * r / (beta * 10.0 * p.intercept_los);
    let e = |n: f64| (-n * s * cfg.noise_power()).exp();
    let want = 3.0 * e(1.0) - 3.0 * e(2.0) + e(3.0);
    assert!((c.theta(LinkState::Los, r, tau, beta).unwrap() - want).abs() < 1e-14);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn near_coverage_in_unit_interval_and_monotone(snr in 55.0f64..100.0, t1 in 0.0f64..4.0, dt in 0.0f64..4.0) {
        let mk = |t: f64| SystemConfig { snr_db: snr, threshold_near: t, threshold_far: 0.01, ..SystemConfig::default() };
        let a = ctx(mk(t1)).coverage_near().unwrap().value;
        let b = ctx(mk(t1 + dt)).coverage_near().unwrap().value;
        prop_assert!((0.0..=1.0).contains(&a) && (0.0..=1.0).contains(&b));
        prop_assert!(b <= a + 1e-9);
    }

    #[test]
    fn closed_forms_bounded(snr in 40.0f64..120.0, m in 1u32..24, ak in 0.02f64..0.3) {
        let cfg = SystemConfig { snr_db: snr, antennas: m, alloc_near: ak, alloc_far: 1.0 - ak, ..SystemConfig::default() };
        let c = ctx(cfg);
        for v in [c.coverage_near_closed().unwrap().value, c.coverage_far_closed().unwrap().value] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
    }
}
