//! Monte Carlo estimates of the same coverage and throughput metrics.
//!
//! Each trial drops a fresh network, draws independent fading for every
//! link and records the serving powers `X`, `Y` and the interference at both
//! users. Trial `t` under seed `s` always uses ChaCha8 stream `t` of key `s`,
//! so results do not depend on thread count or scheduling, and reusing a
//! seed across sweep points gives common random numbers.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;
use rayon::prelude::*;

use crate::analytic::{rate_threshold, AccessMode};
use crate::error::{domain, Error, Regime, Result};
use crate::geometry::{default_window_radius, sample_network, Point2D};
use crate::model::{fejer_gain, LinkState, NakagamiPower, SystemConfig};

/// Simulation switches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    /// Radius of the BS sampling window; `None` uses [`default_window_radius`].
    pub window_radius: Option<f64>,
    /// Include inter-cluster interference.
    pub interference: bool,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            window_radius: None,
            interference: true,
        }
    }
}

/// Received quantities of one trial, before any threshold is applied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    /// NOMA SINRs at the configured power split.
    pub sinr: PairSinr,
    pub r_near: f64,
    pub r_far: f64,
    /// `M |g_k|^2 L(r_k)`.
    pub serving_near: f64,
    /// `M |g_j|^2 G_F(theta_j) L(r_j)`.
    pub serving_far: f64,
    pub interference_near: f64,
    pub interference_far: f64,
    pub noise: f64,
}

/// The three NOMA SINRs of a pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairSinr {
    /// Near user decoding the far user's message.
    pub near_sic: f64,
    /// Near user decoding its own message after SIC.
    pub near: f64,
    pub far: f64,
}

/// SINRs from serving powers `x` (near), `y` (far) and interference-plus-noise
/// `w_near`, `w_far`.
pub fn pair_sinr(alloc_near: f64, alloc_far: f64, x: f64, y: f64, w_near: f64, w_far: f64) -> PairSinr {
    PairSinr {
        near_sic: alloc_far * x / (alloc_near * x + w_near),
        near: alloc_near * x / w_near,
        far: alloc_far * y / (alloc_near * y + w_far),
    }
}

impl TrialOutcome {
    /// Coverage of (near, far) under NOMA with thresholds `tau_k`, `tau_j`.
    /// The near user must clear both the SIC stage and its own threshold.
    pub fn noma_covered(&self, tau_k: f64, tau_j: f64) -> (bool, bool) {
        let s = &self.sinr;
        (s.near_sic > tau_j && s.near > tau_k, s.far > tau_j)
    }

    /// Coverage of (near, far) when each user is served alone at full power.
    pub fn oma_covered(&self, tau_k: f64, tau_j: f64) -> (bool, bool) {
        let near = self.serving_near / (self.interference_near + self.noise);
        let far = self.serving_far / (self.interference_far + self.noise);
        (near > tau_k, far > tau_j)
    }
}

struct Fading {
    los: NakagamiPower,
    nlos: NakagamiPower,
}

impl Fading {
    fn new(cfg: &SystemConfig) -> Result<Self> {
        Ok(Self {
            los: NakagamiPower::new(cfg.path_loss.shape_los)?,
            nlos: NakagamiPower::new(cfg.path_loss.shape_nlos)?,
        })
    }

    fn draw<R: Rng + ?Sized>(&self, link: LinkState, rng: &mut R) -> f64 {
        match link {
            LinkState::Los => self.los.sample(rng),
            LinkState::Nlos => self.nlos.sample(rng),
        }
    }
}

fn received<R: Rng + ?Sized>(
    cfg: &SystemConfig,
    fading: &Fading,
    distance: f64,
    beam_gain: f64,
    rng: &mut R,
) -> Result<f64> {
    let link = cfg.link_state(distance);
    let h = fading.draw(link, rng);
    Ok(cfg.antennas as f64 * h * beam_gain * cfg.path_loss(distance)?)
}

fn run_trial<R: Rng + ?Sized>(
    cfg: &SystemConfig,
    fading: &Fading,
    window: f64,
    opts: &SimOptions,
    rng: &mut R,
) -> Result<TrialOutcome> {
    let net = sample_network(cfg, window, rng)?;
    let near = net.near_user();
    let far = net.far_user();
    let r_near = near.norm();
    let r_far = far.norm();
    let serving_near = received(cfg, fading, r_near, 1.0, rng)?;
    let half = cfg.angular_ratio;
    let far_beam = fejer_gain(rng.random_range(-half..=half), cfg.antennas);
    let serving_far = received(cfg, fading, r_far, far_beam, rng)?;

    let (mut interference_near, mut interference_far) = (0.0, 0.0);
    if opts.interference {
        for (bs, &angle) in net.bs_points.iter().zip(&net.interferer_angles) {
            let gain = fejer_gain(angle, cfg.antennas);
            interference_near += interferer_power(cfg, fading, bs, &near, gain, rng)?;
            interference_far += interferer_power(cfg, fading, bs, &far, gain, rng)?;
        }
    }
    let noise = cfg.noise_power();
    Ok(TrialOutcome {
        sinr: pair_sinr(
            cfg.alloc_near,
            cfg.alloc_far,
            serving_near,
            serving_far,
            interference_near + noise,
            interference_far + noise,
        ),
        r_near,
        r_far,
        serving_near,
        serving_far,
        interference_near,
        interference_far,
        noise,
    })
}

fn interferer_power<R: Rng + ?Sized>(
    cfg: &SystemConfig,
    fading: &Fading,
    bs: &Point2D,
    user: &Point2D,
    gain: f64,
    rng: &mut R,
) -> Result<f64> {
    let d = bs.distance(user);
    if d == 0.0 {
        return Err(domain("distance", d, "interferer coincides with a user"));
    }
    received(cfg, fading, d, gain, rng)
}

/// Runs trial `trial` of the experiment keyed by `seed`.
pub fn simulate_trial(cfg: &SystemConfig, opts: &SimOptions, seed: u64, trial: u64) -> Result<TrialOutcome> {
    cfg.validate()?;
    let fading = Fading::new(cfg)?;
    let window = window_radius(cfg, opts)?;
    run_trial(cfg, &fading, window, opts, &mut trial_rng(seed, trial))
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn window_radius(cfg: &SystemConfig, opts: &SimOptions) -> Result<f64> {
    let w = opts
        .window_radius
        .unwrap_or_else(|| default_window_radius(cfg.bs_density));
    if w > 0.0 && w.is_finite() {
        Ok(w)
    } else {
        Err(domain("window_radius", w, "must be positive and finite"))
    }
}

/// Joint coverage counts over a batch of trials.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
struct Tally {
    both: u64,
    near_only: u64,
    far_only: u64,
}

impl Tally {
    fn of(covered: (bool, bool)) -> Self {
        match covered {
            (true, true) => Self {
                both: 1,
                ..Self::default()
            },
            (true, false) => Self {
                near_only: 1,
                ..Self::default()
            },
            (false, true) => Self {
                far_only: 1,
                ..Self::default()
            },
            (false, false) => Self::default(),
        }
    }

    fn merge(self, other: Self) -> Self {
        Self {
            both: self.both + other.both,
            near_only: self.near_only + other.near_only,
            far_only: self.far_only + other.far_only,
        }
    }
}

fn tally<F>(cfg: &SystemConfig, opts: &SimOptions, trials: u64, seed: u64, judge: F) -> Result<Tally>
where
    F: Fn(&TrialOutcome) -> (bool, bool) + Sync,
{
    if trials == 0 {
        return Err(domain("trials", 0.0, "need at least one trial"));
    }
    cfg.validate()?;
    let fading = Fading::new(cfg)?;
    let window = window_radius(cfg, opts)?;
    (0..trials)
        .into_par_iter()
        .map(|t| {
            let outcome = run_trial(cfg, &fading, window, opts, &mut trial_rng(seed, t))?;
            Ok(Tally::of(judge(&outcome)))
        })
        .try_reduce(Tally::default, |a, b| Ok(a.merge(b)))
}

/// A Bernoulli proportion with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageEstimate {
    pub p_hat: f64,
    pub stderr: f64,
    pub trials: u64,
    pub seed: u64,
}

impl CoverageEstimate {
    fn new(hits: u64, trials: u64, seed: u64) -> Self {
        let n = trials as f64;
        let p = hits as f64 / n;
        Self {
            p_hat: p,
            stderr: (p * (1.0 - p) / n).sqrt(),
            trials,
            seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairCoverage {
    pub near: CoverageEstimate,
    pub far: CoverageEstimate,
}

/// Estimates `P_k(tau_k)` and `P_j(tau_j)` at the configured thresholds.
pub fn estimate_coverage(cfg: &SystemConfig, opts: &SimOptions, trials: u64, seed: u64) -> Result<PairCoverage> {
    let margin = cfg.decoding_margin();
    if margin <= 0.0 {
        return Err(Error::UnsupportedRegime(Regime::NotDecodable { margin }));
    }
    let (tau_k, tau_j) = (cfg.threshold_near, cfg.threshold_far);
    let t = tally(cfg, opts, trials, seed, |o| o.noma_covered(tau_k, tau_j))?;
    Ok(PairCoverage {
        near: CoverageEstimate::new(t.both + t.near_only, trials, seed),
        far: CoverageEstimate::new(t.both + t.far_only, trials, seed),
    })
}

/// Simulated system throughput `E[R_k 1{near} + R_j 1{far}]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThroughputEstimate {
    pub rate: f64,
    pub stderr: f64,
    pub near: CoverageEstimate,
    pub far: CoverageEstimate,
}

pub fn estimate_throughput(
    cfg: &SystemConfig,
    opts: &SimOptions,
    mode: AccessMode,
    trials: u64,
    seed: u64,
) -> Result<ThroughputEstimate> {
    let tau_k = rate_threshold(cfg.rate_near, cfg.bandwidth, mode);
    let tau_j = rate_threshold(cfg.rate_far, cfg.bandwidth, mode);
    if mode == AccessMode::Noma {
        let margin = cfg.alloc_far - tau_j * cfg.alloc_near;
        if margin <= 0.0 {
            return Err(Error::UnsupportedRegime(Regime::NotDecodable { margin }));
        }
    }
    let t = tally(cfg, opts, trials, seed, |o| match mode {
        AccessMode::Noma => o.noma_covered(tau_k, tau_j),
        AccessMode::Oma => o.oma_covered(tau_k, tau_j),
    })?;
    let n = trials as f64;
    let (rk, rj) = (cfg.rate_near, cfg.rate_far);
    let freq = |c: u64| c as f64 / n;
    let (p_both, p_near, p_far) = (freq(t.both), freq(t.near_only), freq(t.far_only));
    let rate = (rk + rj) * p_both + rk * p_near + rj * p_far;
    let second = (rk + rj).powi(2) * p_both + rk * rk * p_near + rj * rj * p_far;
    let variance = (second - rate * rate).max(0.0);
    Ok(ThroughputEstimate {
        rate,
        stderr: (variance / n).sqrt(),
        near: CoverageEstimate::new(t.both + t.near_only, trials, seed),
        far: CoverageEstimate::new(t.both + t.far_only, trials, seed),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sinr_formulas() {
        let s = pair_sinr(0.2, 0.8, 4.0, 2.0, 1.0, 0.5);
        assert!((s.near_sic - 3.2 / 1.8).abs() < 1e-15);
        assert!((s.near - 0.8).abs() < 1e-15);
        assert!((s.far - 1.6 / 0.9).abs() < 1e-15);
    }

    #[test]
    fn trials_are_reproducible() {
        let cfg = SystemConfig::default();
        let opts = SimOptions::default();
        let a = simulate_trial(&cfg, &opts, 7, 3).unwrap();
        let b = simulate_trial(&cfg, &opts, 7, 3).unwrap();
        let c = simulate_trial(&cfg, &opts, 7, 4).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn interference_switch() {
        let cfg = SystemConfig::default();
        let opts = SimOptions {
            interference: false,
            ..SimOptions::default()
        };
        let o = simulate_trial(&cfg, &opts, 1, 0).unwrap();
        assert_eq!(o.interference_near, 0.0);
        assert_eq!(o.interference_far, 0.0);
        let o = simulate_trial(&cfg, &SimOptions::default(), 1, 0).unwrap();
        assert!(o.interference_near > 0.0);
    }

    #[test]
    fn coverage_in_unit_interval() {
        let cfg = SystemConfig::default();
        let est = estimate_coverage(&cfg, &SimOptions::default(), 500, 11).unwrap();
        for e in [est.near, est.far] {
            assert!((0.0..=1.0).contains(&e.p_hat));
            assert_eq!(e.trials, 500);
        }
        assert!(estimate_coverage(&cfg, &SimOptions::default(), 0, 11).is_err());
    }

    #[test]
    fn zero_threshold_always_covers() {
        let cfg = SystemConfig {
            threshold_near: 0.0,
            threshold_far: 0.0,
            ..SystemConfig::default()
        };
        let est = estimate_coverage(&cfg, &SimOptions::default(), 200, 5).unwrap();
        assert_eq!(est.near.p_hat, 1.0);
        assert_eq!(est.far.p_hat, 1.0);
    }

    #[test]
    fn throughput_consistent_with_coverage() {
        let cfg = SystemConfig::default();
        let est = estimate_throughput(&cfg, &SimOptions::default(), AccessMode::Oma, 400, 9).unwrap();
        let expect = cfg.rate_near * est.near.p_hat + cfg.rate_far * est.far.p_hat;
        assert!((est.rate - expect).abs() < 1e-6 * expect.max(1.0));
    }
}
