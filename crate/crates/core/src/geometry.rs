//! Poisson cluster process sampling and the distance distributions of the
//! nearest-random (NR) user pair.
//!
//! Users scatter around their BS with i.i.d. `N(0, sigma^2)` coordinates, so a
//! random user's distance is Rayleigh. The near user is the closest of the
//! `2K` cluster members; the far user is drawn uniformly from the rest.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Normal, Poisson};

use crate::error::{domain, Result};
use crate::model::SystemConfig;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2D {
    pub x: f64,
    pub y: f64,
}

impl Point2D {
    pub const ORIGIN: Point2D = Point2D { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(&self, other: &Point2D) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// One network drop around the typical BS at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkRealization {
    /// Interfering BSs; the typical BS at the origin is not included.
    pub bs_points: Vec<Point2D>,
    /// The `2K` users of the typical cluster, relative to the origin.
    pub typical_user_offsets: Vec<Point2D>,
    pub near_index: usize,
    pub far_index: usize,
    /// Beam misalignment of each interferer, in `[-q/lambda, q/lambda]`.
    pub interferer_angles: Vec<f64>,
}

impl NetworkRealization {
    pub fn near_user(&self) -> Point2D {
        self.typical_user_offsets[self.near_index]
    }

    pub fn far_user(&self) -> Point2D {
        self.typical_user_offsets[self.far_index]
    }

    pub fn near_distance(&self) -> f64 {
        self.near_user().norm()
    }

    pub fn far_distance(&self) -> f64 {
        self.far_user().norm()
    }
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma > 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(domain("sigma", sigma, "must be positive"))
    }
}

fn check_pairs(pairs: u32) -> Result<()> {
    if pairs == 0 {
        Err(domain("K", 0.0, "need at least one pair"))
    } else {
        Ok(())
    }
}

/// Rayleigh density `(v / sigma^2) exp(-v^2 / 2 sigma^2)` for `v > 0`.
pub fn rayleigh_pdf(v: f64, sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    if v <= 0.0 {
        return Ok(0.0);
    }
    let s2 = sigma * sigma;
    Ok(v / s2 * (-v * v / (2.0 * s2)).exp())
}

pub fn rayleigh_cdf(v: f64, sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    if v <= 0.0 {
        return Ok(0.0);
    }
    Ok(-(-v * v / (2.0 * sigma * sigma)).exp_m1())
}

/// Density of the near-user distance: the minimum of `2K` Rayleigh draws.
pub fn nearest_distance_pdf(r1: f64, pairs: u32, sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    check_pairs(pairs)?;
    if r1 < 0.0 {
        return Err(domain("r1", r1, "distance must be non-negative"));
    }
    let k = pairs as f64;
    let s2 = sigma * sigma;
    Ok(2.0 * k * r1 / s2 * (-k * r1 * r1 / s2).exp())
}

pub fn nearest_distance_cdf(r1: f64, pairs: u32, sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    check_pairs(pairs)?;
    if r1 <= 0.0 {
        return Ok(0.0);
    }
    let k = pairs as f64;
    Ok(-(-k * r1 * r1 / (sigma * sigma)).exp_m1())
}

/// Density of the far-user distance given the near-user distance `r1`:
/// a Rayleigh law truncated to `(r1, inf)`.
pub fn far_conditional_pdf(rf: f64, r1: f64, sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    if r1 < 0.0 {
        return Err(domain("r1", r1, "distance must be non-negative"));
    }
    if rf <= r1 {
        return Ok(0.0);
    }
    let s2 = sigma * sigma;
    // R_p(rf) / (1 - R_c(r1)) with the survival factor folded into one exponent.
    Ok(rf / s2 * (-(rf * rf - r1 * r1) / (2.0 * s2)).exp())
}

pub fn far_conditional_cdf(rf: f64, r1: f64, sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    if r1 < 0.0 {
        return Err(domain("r1", r1, "distance must be non-negative"));
    }
    if rf <= r1 {
        return Ok(0.0);
    }
    Ok(-(-(rf * rf - r1 * r1) / (2.0 * sigma * sigma)).exp_m1())
}

/// Unconditional density of the far-user distance,
/// `int_0^rf f_far(rf | r1) f_near(r1) dr1`
/// `= R_p(rf) (2K / (2K-1)) (1 - exp(-(2K-1) rf^2 / 2 sigma^2))`.
pub fn far_marginal_pdf(rf: f64, pairs: u32, sigma: f64) -> Result<f64> {
    check_pairs(pairs)?;
    let base = rayleigh_pdf(rf, sigma)?;
    if rf <= 0.0 {
        return Ok(0.0);
    }
    let m = 2.0 * pairs as f64 - 1.0;
    let cond = -(-m * rf * rf / (2.0 * sigma * sigma)).exp_m1();
    Ok(base * (m + 1.0) / m * cond)
}

pub fn far_marginal_cdf(rf: f64, pairs: u32, sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    check_pairs(pairs)?;
    if rf <= 0.0 {
        return Ok(0.0);
    }
    let m = 2.0 * pairs as f64 - 1.0;
    let s2 = sigma * sigma;
    let survive = (-rf * rf / (2.0 * s2)).exp();
    let survive_both = (-(m + 1.0) * rf * rf / (2.0 * s2)).exp();
    Ok(1.0 - ((m + 1.0) * survive - survive_both) / m)
}

/// Radius beyond which the dropped interferers are ignored: ten times the
/// mean inter-BS radius, `10 / sqrt(lambda_c pi)`.
pub fn default_window_radius(bs_density: f64) -> f64 {
    10.0 / (bs_density * PI).sqrt()
}

/// Samples BS locations in a disc of radius `window_radius`, the typical
/// cluster's users, the NR pair and the interferer beam angles.
pub fn sample_network<R: Rng + ?Sized>(
    cfg: &SystemConfig,
    window_radius: f64,
    rng: &mut R,
) -> Result<NetworkRealization> {
    if !(window_radius > 0.0) || !window_radius.is_finite() {
        return Err(domain("window_radius", window_radius, "must be positive"));
    }
    let mean = cfg.bs_density * PI * window_radius * window_radius;
    let count = if mean > 0.0 {
        Poisson::new(mean)
            .map_err(|_| domain("lambda_c", cfg.bs_density, "Poisson mean out of range"))?
            .sample(rng) as usize
    } else {
        0
    };
    let bs_points = (0..count)
        .map(|_| {
            let r = window_radius * rng.random::<f64>().sqrt();
            let phi = 2.0 * PI * rng.random::<f64>();
            Point2D::new(r * phi.cos(), r * phi.sin())
        })
        .collect();

    let scatter = Normal::new(0.0, cfg.user_sigma()).map_err(|_| domain("sigma2", cfg.user_variance, "invalid"))?;
    let users: Vec<Point2D> = (0..cfg.cluster_size())
        .map(|_| Point2D::new(scatter.sample(rng), scatter.sample(rng)))
        .collect();

    // Strict comparison keeps the lowest index on ties.
    let mut near_index = 0;
    for (i, u) in users.iter().enumerate().skip(1) {
        if u.norm() < users[near_index].norm() {
            near_index = i;
        }
    }
    let pick = rng.random_range(0..users.len() - 1);
    let far_index = if pick >= near_index { pick + 1 } else { pick };

    let half = cfg.angular_ratio;
    let interferer_angles = (0..count).map(|_| rng.random_range(-half..=half)).collect();

    Ok(NetworkRealization {
        bs_points,
        typical_user_offsets: users,
        near_index,
        far_index,
        interferer_angles,
    })
}
