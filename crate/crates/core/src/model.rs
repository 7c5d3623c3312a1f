//! Physical-layer primitives shared by the analytic and simulation paths:
//! the LOS-disc path-loss law, the Fejér-kernel array gain, Nakagami power
//! fading and the validated system configuration.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use thiserror::Error;

use crate::error::{domain, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Default carrier frequency, 28 GHz.
pub const DEFAULT_CARRIER_HZ: f64 = 28e9;

/// Below this `|sin(pi * dtheta)|` the Fejér kernel is replaced by its limit.
const FEJER_SINGULAR: f64 = 1e-12;

/// Line-of-sight state of a link under the LOS-disc blockage model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LinkState {
    Los,
    Nlos,
}

impl LinkState {
    /// A link is LOS when its length does not exceed the disc radius.
    pub fn of_distance(distance: f64, los_radius: f64) -> Self {
        if distance <= los_radius {
            LinkState::Los
        } else {
            LinkState::Nlos
        }
    }
}

/// Path-loss law and Nakagami shapes for the LOS and NLOS branches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathLossParams {
    /// Intercept `C_L` at 1 m, linear.
    pub intercept_los: f64,
    /// Intercept `C_N` at 1 m, linear.
    pub intercept_nlos: f64,
    pub exponent_los: f64,
    pub exponent_nlos: f64,
    /// Nakagami shape `N_L`.
    pub shape_los: u32,
    /// Nakagami shape `N_N`.
    pub shape_nlos: u32,
}

impl PathLossParams {
    pub fn intercept(&self, link: LinkState) -> f64 {
        match link {
            LinkState::Los => self.intercept_los,
            LinkState::Nlos => self.intercept_nlos,
        }
    }

    pub fn exponent(&self, link: LinkState) -> f64 {
        match link {
            LinkState::Los => self.exponent_los,
            LinkState::Nlos => self.exponent_nlos,
        }
    }

    pub fn shape(&self, link: LinkState) -> u32 {
        match link {
            LinkState::Los => self.shape_los,
            LinkState::Nlos => self.shape_nlos,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        check_finite("C_L", self.intercept_los)?;
        check_finite("C_N", self.intercept_nlos)?;
        check_finite("alpha_L", self.exponent_los)?;
        check_finite("alpha_N", self.exponent_nlos)?;
        if self.intercept_los <= 0.0 {
            return Err(ConfigError::Intercept {
                key: "C_L",
                value: self.intercept_los,
            });
        }
        if self.intercept_nlos <= 0.0 {
            return Err(ConfigError::Intercept {
                key: "C_N",
                value: self.intercept_nlos,
            });
        }
        if self.exponent_los <= 0.0 {
            return Err(ConfigError::LosExponent(self.exponent_los));
        }
        if self.exponent_nlos <= 2.0 {
            return Err(ConfigError::NlosExponent(self.exponent_nlos));
        }
        if self.shape_los == 0 {
            return Err(ConfigError::FadingShape { key: "N_L" });
        }
        if self.shape_nlos == 0 {
            return Err(ConfigError::FadingShape { key: "N_N" });
        }
        Ok(())
    }
}

impl Default for PathLossParams {
    fn default() -> Self {
        let intercept = free_space_intercept(DEFAULT_CARRIER_HZ);
        Self {
            intercept_los: intercept,
            intercept_nlos: intercept,
            exponent_los: 2.0,
            exponent_nlos: 4.0,
            shape_los: 3,
            shape_nlos: 2,
        }
    }
}

/// Free-space gain `(c / (4 pi f))^2` at a 1 m reference distance.
pub fn free_space_intercept(carrier_hz: f64) -> f64 {
    let x = SPEED_OF_LIGHT / (4.0 * PI * carrier_hz);
    x * x
}

/// Complete parameter set of one clustered mmWave NOMA network.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemConfig {
    /// BS density `lambda_c`, per m^2.
    pub bs_density: f64,
    /// Variance `sigma^2` of the Gaussian user scatter around each BS, m^2.
    pub user_variance: f64,
    /// Number of NOMA pairs `K`; every cluster holds `2K` users.
    pub num_pairs: u32,
    /// Array size `M`.
    pub antennas: u32,
    /// LOS disc radius `R_L`, m.
    pub los_radius: f64,
    pub path_loss: PathLossParams,
    /// Power coefficient `a_k` of the near user.
    pub alloc_near: f64,
    /// Power coefficient `a_j` of the far user.
    pub alloc_far: f64,
    /// SINR threshold `tau_k`, linear.
    pub threshold_near: f64,
    /// SINR threshold `tau_j`, linear.
    pub threshold_far: f64,
    /// Transmit SNR `1/sigma_n^2` in dB.
    pub snr_db: f64,
    /// Half-width `q/lambda` of the beam-misalignment interval.
    pub angular_ratio: f64,
    /// Bandwidth `B`, Hz.
    pub bandwidth: f64,
    /// Rate requirement `R_k` of the near user, bit/s.
    pub rate_near: f64,
    /// Rate requirement `R_j` of the far user, bit/s.
    pub rate_far: f64,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            bs_density: 1.0 / (250.0 * 250.0 * PI),
            user_variance: 100.0,
            num_pairs: 2,
            antennas: 10,
            los_radius: 100.0,
            path_loss: PathLossParams::default(),
            alloc_near: 0.1,
            alloc_far: 0.9,
            threshold_near: 1.0,
            threshold_far: 0.2,
            snr_db: 83.0,
            angular_ratio: 0.25,
            bandwidth: 100e6,
            rate_near: 1e8,
            rate_far: 3e7,
        }
    }
}

/// Tolerance on `a_k + a_j = 1`.
pub const ALLOCATION_SUM_TOL: f64 = 1e-9;

impl SystemConfig {
    /// Noise power `sigma_n^2` normalized to unit transmit power.
    pub fn noise_power(&self) -> f64 {
        10f64.powf(-self.snr_db / 10.0)
    }

    /// Standard deviation `sigma` of each user coordinate.
    pub fn user_sigma(&self) -> f64 {
        self.user_variance.sqrt()
    }

    /// Total users per cluster, `2K`.
    pub fn cluster_size(&self) -> usize {
        2 * self.num_pairs as usize
    }

    /// `a_j - tau_j * a_k`, the margin that must stay positive for SIC.
    pub fn decoding_margin(&self) -> f64 {
        self.alloc_far - self.threshold_far * self.alloc_near
    }

    pub fn path_loss(&self, distance: f64) -> Result<f64> {
        path_loss(distance, &self.path_loss, self.los_radius)
    }

    pub fn link_state(&self, distance: f64) -> LinkState {
        LinkState::of_distance(distance, self.los_radius)
    }

    /// Checks every invariant, reporting the first violation.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let finite = [
            ("lambda_c", self.bs_density),
            ("sigma2", self.user_variance),
            ("R_L", self.los_radius),
            ("a_k", self.alloc_near),
            ("a_j", self.alloc_far),
            ("tau_k", self.threshold_near),
            ("tau_j", self.threshold_far),
            ("snr_db", self.snr_db),
            ("q_over_lambda", self.angular_ratio),
            ("B", self.bandwidth),
            ("R_k", self.rate_near),
            ("R_j", self.rate_far),
        ];
        for (key, value) in finite {
            check_finite(key, value)?;
        }
        let positive = [
            ("lambda_c", self.bs_density),
            ("sigma2", self.user_variance),
            ("R_L", self.los_radius),
            ("B", self.bandwidth),
            ("R_k", self.rate_near),
            ("R_j", self.rate_far),
        ];
        for (key, value) in positive {
            if value <= 0.0 {
                return Err(ConfigError::NotPositive { key, value });
            }
        }
        if self.num_pairs == 0 {
            return Err(ConfigError::NoPairs);
        }
        if self.antennas == 0 {
            return Err(ConfigError::NoAntennas);
        }
        self.path_loss.validate()?;
        if !(self.alloc_near > 0.0 && self.alloc_near < 1.0) {
            return Err(ConfigError::AllocationRange(self.alloc_near));
        }
        let sum = self.alloc_near + self.alloc_far;
        if (sum - 1.0).abs() > ALLOCATION_SUM_TOL {
            return Err(ConfigError::AllocationSum {
                near: self.alloc_near,
                far: self.alloc_far,
            });
        }
        if self.threshold_near < 0.0 {
            return Err(ConfigError::NegativeThreshold {
                key: "tau_k",
                value: self.threshold_near,
            });
        }
        if self.threshold_far < 0.0 {
            return Err(ConfigError::NegativeThreshold {
                key: "tau_j",
                value: self.threshold_far,
            });
        }
        let margin = self.decoding_margin();
        if margin <= 0.0 {
            return Err(ConfigError::NotDecodable { margin });
        }
        if !(self.angular_ratio > 0.0 && self.angular_ratio <= 0.5) {
            return Err(ConfigError::AngularRatio(self.angular_ratio));
        }
        Ok(())
    }
}

fn check_finite(key: &'static str, value: f64) -> Result<(), ConfigError> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(ConfigError::NotFinite { key, value })
    }
}

/// One violated [`SystemConfig`] invariant.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("{key} = {value} is not finite")]
    NotFinite { key: &'static str, value: f64 },
    #[error("{key} = {value} must be positive")]
    NotPositive { key: &'static str, value: f64 },
    #[error("K must be at least 1")]
    NoPairs,
    #[error("M must be at least 1")]
    NoAntennas,
    #[error("{key} = {value} must be a positive intercept")]
    Intercept { key: &'static str, value: f64 },
    #[error("alpha_L = {0} must be positive")]
    LosExponent(f64),
    #[error("alpha_N = {0} must exceed 2")]
    NlosExponent(f64),
    #[error("{key} must be at least 1")]
    FadingShape { key: &'static str },
    #[error("a_k = {0} must lie in (0, 1)")]
    AllocationRange(f64),
    #[error("a_k + a_j = {near} + {far} must equal 1")]
    AllocationSum { near: f64, far: f64 },
    #[error("{key} = {value} must be non-negative")]
    NegativeThreshold { key: &'static str, value: f64 },
    #[error("a_j - tau_j*a_k = {margin} must be positive")]
    NotDecodable { margin: f64 },
    #[error("q/lambda = {0} must lie in (0, 0.5]")]
    AngularRatio(f64),
}

impl ConfigError {
    /// Configuration key the violation is attributed to.
    pub fn key(&self) -> &'static str {
        match self {
            ConfigError::NotFinite { key, .. }
            | ConfigError::NotPositive { key, .. }
            | ConfigError::Intercept { key, .. }
            | ConfigError::FadingShape { key }
            | ConfigError::NegativeThreshold { key, .. } => key,
            ConfigError::NoPairs => "K",
            ConfigError::NoAntennas => "M",
            ConfigError::LosExponent(_) => "alpha_L",
            ConfigError::NlosExponent(_) => "alpha_N",
            ConfigError::AllocationRange(_) => "a_k",
            ConfigError::AllocationSum { .. } => "a_j",
            ConfigError::NotDecodable { .. } => "tau_j",
            ConfigError::AngularRatio(_) => "q_over_lambda",
        }
    }
}

/// LOS-disc path loss: `C_L r^-alpha_L` inside the disc, `C_N r^-alpha_N` outside.
pub fn path_loss(distance: f64, params: &PathLossParams, los_radius: f64) -> Result<f64> {
    if !(distance > 0.0) || !distance.is_finite() {
        return Err(domain("distance", distance, "must be positive and finite"));
    }
    let link = LinkState::of_distance(distance, los_radius);
    Ok(params.intercept(link) * distance.powf(-params.exponent(link)))
}

/// Normalized Fejér kernel `sin^2(pi M x) / (M^2 sin^2(pi x))`, in `[0, 1]`.
pub fn fejer_gain(delta: f64, antennas: u32) -> f64 {
    let m = antennas as f64;
    let den = (PI * delta).sin();
    if den.abs() < FEJER_SINGULAR {
        return 1.0;
    }
    let num = (PI * m * delta).sin();
    ((num * num) / (m * m * den * den)).min(1.0)
}

/// Effective gain `M |g|^2` of a beam aligned with the user.
pub fn aligned_gain(fading_power: f64, antennas: u32) -> f64 {
    antennas as f64 * fading_power
}

/// Unit-mean Nakagami power fading, `|g|^2 ~ Gamma(N, 1/N)`.
#[derive(Debug, Clone, Copy)]
pub struct NakagamiPower {
    dist: Gamma<f64>,
}

impl NakagamiPower {
    pub fn new(shape: u32) -> Result<Self> {
        if shape == 0 {
            return Err(domain("shape", 0.0, "Nakagami shape must be at least 1"));
        }
        let n = shape as f64;
        let dist = Gamma::new(n, 1.0 / n).expect("positive shape and scale");
        Ok(Self { dist })
    }
}

impl Distribution<f64> for NakagamiPower {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.dist.sample(rng)
    }
}

/// One draw of `|g|^2` for Nakagami shape `shape`.
pub fn sample_nakagami_power<R: Rng + ?Sized>(shape: u32, rng: &mut R) -> Result<f64> {
    Ok(NakagamiPower::new(shape)?.sample(rng))
}
