use mmnoma_core::geometry::{
    far_conditional_cdf, far_conditional_pdf, far_marginal_cdf, far_marginal_pdf, nearest_distance_cdf,
    nearest_distance_pdf, sample_network,
};
use mmnoma_core::specfun::{integrate, QuadratureSettings};
use mmnoma_core::{Error, SystemConfig};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Sup-norm distance between the ECDF of `u` and the uniform CDF.
fn ks_uniform(mut u: Vec<f64>) -> f64 {
    u.sort_by(f64::total_cmp);
    let n = u.len() as f64;
    u.iter()
        .enumerate()
        .map(|(i, &x)| (x - i as f64 / n).abs().max(((i + 1) as f64 / n - x).abs()))
        .fold(0.0, f64::max)
}

fn mass(f: impl Fn(f64) -> f64, upper: f64) -> f64 {
    integrate(|x| Ok::<_, Error>(f(x)), 0.0, upper, &QuadratureSettings::default()).unwrap()
}

#[test]
fn densities_integrate_to_one() {
    let sigma = 10.0;
    for pairs in [1, 2, 4] {
        let near = mass(|r| nearest_distance_pdf(r, pairs, sigma).unwrap(), 20.0 * sigma);
        let far = mass(|r| far_marginal_pdf(r, pairs, sigma).unwrap(), 20.0 * sigma);
        assert!((near - 1.0).abs() < 1e-6, "K={pairs}: {near}");
        assert!((far - 1.0).abs() < 1e-6, "K={pairs}: {far}");
    }
    for r1 in [0.5, 5.0, 20.0] {
        let cond = integrate(
            |rf| Ok::<_, Error>(far_conditional_pdf(rf, r1, sigma).unwrap()),
            r1,
            r1 + 20.0 * sigma,
            &QuadratureSettings::default(),
        )
        .unwrap();
        assert!((cond - 1.0).abs() < 1e-6, "r1={r1}: {cond}");
    }
}

#[test]
fn simulated_distances_follow_their_laws() {
    let cfg = SystemConfig::default();
    let sigma = cfg.user_sigma();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let n = 100_000;
    let (mut u_near, mut u_far, mut u_marg) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for _ in 0..n {
        let net = sample_network(&cfg, 50.0, &mut rng).unwrap();
        let (r1, rf) = (net.near_distance(), net.far_distance());
        assert!(rf >= r1);
        u_near.push(nearest_distance_cdf(r1, cfg.num_pairs, sigma).unwrap());
        u_far.push(far_conditional_cdf(rf, r1, sigma).unwrap());
        u_marg.push(far_marginal_cdf(rf, cfg.num_pairs, sigma).unwrap());
    }
    for (name, u) in [("near", u_near), ("far|near", u_far), ("far", u_marg)] {
        let d = ks_uniform(u);
        assert!(d < 0.01, "{name}: sup-norm {d}");
    }
}

proptest! {
    #[test]
    fn cdfs_are_monotone_and_bounded(pairs in 1u32..6, sigma in 1.0f64..50.0, a in 0.0f64..100.0, b in 0.0f64..100.0) {
        let (lo, hi) = (a.min(b), a.max(b));
        let f_lo = nearest_distance_cdf(lo, pairs, sigma).unwrap();
        let f_hi = nearest_distance_cdf(hi, pairs, sigma).unwrap();
        prop_assert!((0.0..=1.0).contains(&f_lo) && f_lo <= f_hi && f_hi <= 1.0);
        let g_lo = far_marginal_cdf(lo, pairs, sigma).unwrap();
        let g_hi = far_marginal_cdf(hi, pairs, sigma).unwrap();
        prop_assert!((0.0..=1.0).contains(&g_lo) && g_lo <= g_hi && g_hi <= 1.0 + 1e-15);
        // The far user is never stochastically closer than the near one.
        prop_assert!(g_lo <= f_lo + 1e-12);
    }
}
