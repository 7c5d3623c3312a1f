//! Stochastic-geometry coverage and throughput of the typical NOMA pair.
//!
//! The inter-cluster interference enters through its Laplace transform,
//! evaluated in closed form with Gauss-Chebyshev quadrature over the beam
//! misalignment. Coverage of each user is the Alzer-approximated Nakagami
//! CCDF averaged over the interference and over the NR distance laws:
//!
//! * near user: `int Theta_k(r1, tau_k, a_k) f_near(r1) dr1`, split at `R_L`;
//! * far user: Chebyshev average over the misalignment `g` of
//!   `int Theta_k(rf, tau_j, (a_j - tau_j a_k) G_F(g)) f_far(rf) drf`.
//!
//! The far-user density is the NR marginal (the `r1` integral of the
//! conditional law is done in closed form), which leaves a single adaptive
//! quadrature per Chebyshev node.
//!
//! Setting `loose_network` drops every inter-cluster interferer and every
//! NLOS serving link, which is the regime of the closed-form expressions.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{domain, Error, Regime, Result};
use crate::geometry::{far_marginal_pdf, nearest_distance_pdf};
use crate::model::{fejer_gain, LinkState, SystemConfig};
use crate::specfun::{binomial, integrate, psi, ChebyshevRule, QuadratureSettings, RhoKernels};

/// Default node counts for the misalignment quadratures.
pub const DEFAULT_NODES: usize = 50;

/// Probability mass of the distance laws left out of the radial integrals.
pub const DEFAULT_TAIL_MASS: f64 = 1e-9;

/// How a coverage value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    TheoremIntegral,
    ClosedForm,
    MonteCarlo,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::TheoremIntegral => "theorem",
            Method::ClosedForm => "closed-form",
            Method::MonteCarlo => "monte-carlo",
        }
    }
}

/// Numerical settings behind a [`CoverageResult`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Diagnostics {
    /// Chebyshev nodes for the interference transform.
    pub laplace_nodes: Option<usize>,
    /// Chebyshev nodes for the far-user misalignment average.
    pub misalignment_nodes: Option<usize>,
    pub trials: Option<u64>,
    pub stderr: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageResult {
    pub value: f64,
    pub method: Method,
    pub diagnostics: Diagnostics,
}

/// Multiple-access scheme of the pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AccessMode {
    /// Superposed, power-split signals with SIC at the near user.
    Noma,
    /// Each user alone on half the bandwidth at full power.
    Oma,
}

impl AccessMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            AccessMode::Noma => "noma",
            AccessMode::Oma => "oma",
        }
    }
}

/// SINR threshold that supports `rate` bit/s on `bandwidth` Hz:
/// `2^(R/B) - 1` for NOMA and `2^(2R/B) - 1` for OMA (half the band).
pub fn rate_threshold(rate: f64, bandwidth: f64, mode: AccessMode) -> f64 {
    let spectral = match mode {
        AccessMode::Noma => rate / bandwidth,
        AccessMode::Oma => 2.0 * rate / bandwidth,
    };
    spectral.exp2() - 1.0
}

/// System throughput of the pair together with its ingredients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Throughput {
    /// `R_k P_k + R_j P_j`, bit/s.
    pub rate: f64,
    pub coverage_near: f64,
    pub coverage_far: f64,
    pub threshold_near: f64,
    pub threshold_far: f64,
}

/// Checks that the configured power split lets SIC succeed and that the
/// near user's own threshold, not the SIC stage, is the binding one.
pub fn check_noma_regime(alloc_near: f64, alloc_far: f64, threshold_near: f64, threshold_far: f64) -> Result<()> {
    let margin = alloc_far - threshold_far * alloc_near;
    if margin <= 0.0 {
        return Err(Error::UnsupportedRegime(Regime::NotDecodable { margin }));
    }
    // a_j > a_k tau_j (1 + 1/tau_k), multiplied through by tau_k >= 0.
    if threshold_far > 0.0 && alloc_far * threshold_near <= alloc_near * threshold_far * (threshold_near + 1.0) {
        let bound = alloc_near * threshold_far * (1.0 + 1.0 / threshold_near);
        return Err(Error::UnsupportedRegime(Regime::SicBinding {
            a_far: alloc_far,
            bound,
        }));
    }
    Ok(())
}

/// Beam gains and Chebyshev weights at the nodes of `rule` scaled to
/// `[-half, half]`. `G_F` is even and the nodes are symmetric, so each mirrored
/// pair is evaluated once with twice the weight.
fn folded_gains(rule: &ChebyshevRule, half: f64, antennas: u32) -> Vec<(f64, f64)> {
    let n = rule.len();
    (0..n.div_ceil(2))
        .map(|i| {
            let mult = if 2 * i + 1 == n { 1.0 } else { 2.0 };
            (fejer_gain(rule.nodes()[i] * half, antennas), mult * rule.weights()[i])
        })
        .collect()
}

/// Immutable evaluation context: configuration, quadrature rules and the
/// per-node beam gains they need.
#[derive(Debug, Clone)]
pub struct AnalyticContext {
    cfg: SystemConfig,
    laplace_rule: ChebyshevRule,
    misalignment_rule: ChebyshevRule,
    quadrature: QuadratureSettings,
    tail_mass: f64,
    loose_network: bool,
    /// `(G_F(node), weight)` with mirrored nodes merged.
    laplace_gains: Vec<(f64, f64)>,
    misalignment_gains: Vec<(f64, f64)>,
    psi_los: f64,
    psi_nlos: f64,
    rho: RhoKernels,
}

impl AnalyticContext {
    pub fn new(cfg: SystemConfig) -> Result<Self> {
        cfg.validate()?;
        let laplace_rule = ChebyshevRule::new(DEFAULT_NODES)?;
        let misalignment_rule = ChebyshevRule::new(DEFAULT_NODES)?;
        let mut ctx = Self {
            cfg,
            laplace_gains: Vec::new(),
            misalignment_gains: Vec::new(),
            laplace_rule,
            misalignment_rule,
            quadrature: QuadratureSettings::default(),
            tail_mass: DEFAULT_TAIL_MASS,
            loose_network: false,
            psi_los: psi(cfg.path_loss.shape_los),
            psi_nlos: psi(cfg.path_loss.shape_nlos),
            rho: RhoKernels::new(&cfg.path_loss)?,
        };
        ctx.refresh_gains();
        Ok(ctx)
    }

    /// Sets the Chebyshev node counts `n1` (interference transform) and
    /// `n2` (far-user misalignment).
    pub fn with_nodes(mut self, laplace_nodes: usize, misalignment_nodes: usize) -> Result<Self> {
        self.laplace_rule = ChebyshevRule::new(laplace_nodes)?;
        self.misalignment_rule = ChebyshevRule::new(misalignment_nodes)?;
        self.refresh_gains();
        Ok(self)
    }

    pub fn with_loose_network(mut self, loose: bool) -> Self {
        self.loose_network = loose;
        self
    }

    pub fn with_quadrature(mut self, settings: QuadratureSettings, tail_mass: f64) -> Result<Self> {
        if !(settings.abs_tol > 0.0 && settings.rel_tol > 0.0) {
            return Err(domain(
                "tolerance",
                settings.abs_tol.min(settings.rel_tol),
                "must be positive",
            ));
        }
        if !(tail_mass > 0.0 && tail_mass < 1.0) {
            return Err(domain("tail_mass", tail_mass, "must lie in (0, 1)"));
        }
        self.quadrature = settings;
        self.tail_mass = tail_mass;
        Ok(self)
    }

    fn refresh_gains(&mut self) {
        let half = self.cfg.angular_ratio;
        let m = self.cfg.antennas;
        self.laplace_gains = folded_gains(&self.laplace_rule, half, m);
        self.misalignment_gains = folded_gains(&self.misalignment_rule, half, m);
    }

    pub fn config(&self) -> &SystemConfig {
        &self.cfg
    }

    pub fn loose_network(&self) -> bool {
        self.loose_network
    }

    pub fn laplace_nodes(&self) -> usize {
        self.laplace_rule.len()
    }

    pub fn misalignment_nodes(&self) -> usize {
        self.misalignment_rule.len()
    }

    fn diagnostics(&self, far: bool) -> Diagnostics {
        Diagnostics {
            laplace_nodes: (!self.loose_network).then_some(self.laplace_nodes()),
            misalignment_nodes: far.then_some(self.misalignment_nodes()),
            ..Diagnostics::default()
        }
    }

    /// `G_F^I(s, g)`: the radial interference integral at beam gain `G_F(g)`,
    /// in units of `R_L^2 / 2`.
    fn interference_kernel(&self, s: f64, gain: f64) -> Result<f64> {
        let sg = s * gain;
        if sg == 0.0 {
            return Ok(0.0);
        }
        let p = &self.cfg.path_loss;
        let m = self.cfg.antennas as f64;
        let r = self.cfg.los_radius;
        let nlos_arg = sg * m * p.intercept_nlos / (p.shape_nlos as f64 * r.powf(p.exponent_nlos));
        let los_arg = p.shape_los as f64 * r.powf(p.exponent_los) / (sg * m * p.intercept_los);
        let los = if los_arg.is_finite() {
            self.rho.los(los_arg)?
        } else {
            1.0
        };
        Ok(self.rho.nlos(nlos_arg)? - los)
    }

    /// Laplace transform `E[exp(-s I)]` of the inter-cluster interference.
    pub fn laplace_interference(&self, s: f64) -> Result<f64> {
        if s.is_nan() || s < 0.0 {
            return Err(domain("s", s, "Laplace argument must be non-negative"));
        }
        if s == 0.0 {
            return Ok(1.0);
        }
        let mut sum = 0.0;
        for &(gain, weight) in &self.laplace_gains {
            sum += self.interference_kernel(s, gain)? * weight;
        }
        let n = self.laplace_nodes() as f64;
        let r = self.cfg.los_radius;
        let exponent = PI * PI * self.cfg.bs_density * r * r / (2.0 * n) * sum;
        Ok((-exponent).exp().min(1.0))
    }

    /// `Theta_kappa(r, tau, beta)`: probability that a user at distance `r`
    /// on a `link` channel with effective power coefficient `beta` exceeds
    /// SINR `tau`.
    pub fn theta(&self, link: LinkState, r: f64, tau: f64, beta: f64) -> Result<f64> {
        if !(beta > 0.0) {
            return Err(Error::UnsupportedRegime(Regime::PowerCoefficient { beta }));
        }
        if r.is_nan() || r < 0.0 {
            return Err(domain("r", r, "distance must be non-negative"));
        }
        if tau.is_nan() || tau < 0.0 {
            return Err(domain("tau", tau, "threshold must be non-negative"));
        }
        let p = &self.cfg.path_loss;
        let shape = p.shape(link);
        let psi = match link {
            LinkState::Los => self.psi_los,
            LinkState::Nlos => self.psi_nlos,
        };
        let noise = self.cfg.noise_power();
        let unit = psi * tau * r.powf(p.exponent(link)) / (beta * self.cfg.antennas as f64 * p.intercept(link));
        let mut total = 0.0;
        for n in 1..=shape {
            let s = n as f64 * unit;
            let laplace = if self.loose_network {
                1.0
            } else {
                self.laplace_interference(s)?
            };
            let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
            total += sign * binomial(shape, n) * (-s * noise).exp() * laplace;
        }
        Ok(total)
    }

    fn near_tail_radius(&self) -> f64 {
        // exp(-K r^2 / sigma^2) = tail
        (self.cfg.user_variance * (1.0 / self.tail_mass).ln() / self.cfg.num_pairs as f64).sqrt()
    }

    fn far_tail_radius(&self) -> f64 {
        // survival <= (2K/(2K-1)) exp(-r^2 / 2 sigma^2)
        let k2 = self.cfg.cluster_size() as f64;
        (2.0 * self.cfg.user_variance * (k2 / ((k2 - 1.0) * self.tail_mass)).ln()).sqrt()
    }

    /// `int Theta(r, tau, beta) f(r) dr` split at the LOS radius and cut at `r_max`.
    fn radial_average(&self, tau: f64, beta: f64, r_max: f64, density: impl Fn(f64) -> Result<f64>) -> Result<f64> {
        let r_los = self.cfg.los_radius;
        let los = integrate(
            |r| -> Result<f64> { Ok(self.theta(LinkState::Los, r, tau, beta)? * density(r)?) },
            0.0,
            r_max.min(r_los),
            &self.quadrature,
        )?;
        let nlos = if r_max > r_los && !self.loose_network {
            integrate(
                |r| -> Result<f64> { Ok(self.theta(LinkState::Nlos, r, tau, beta)? * density(r)?) },
                r_los,
                r_max,
                &self.quadrature,
            )?
        } else {
            0.0
        };
        Ok(los + nlos)
    }

    /// Probability that the near user clears `tau` with power coefficient `beta`.
    fn near_probability(&self, beta: f64, tau: f64) -> Result<f64> {
        let sigma = self.cfg.user_sigma();
        let pairs = self.cfg.num_pairs;
        let value = self.radial_average(tau, beta, self.near_tail_radius(), |r| {
            nearest_distance_pdf(r, pairs, sigma)
        })?;
        Ok(value.clamp(0.0, 1.0))
    }

    /// Probability that the far user clears `tau` with power coefficient
    /// `beta_scale * G_F(g)`, averaged over the misalignment `g`.
    fn far_probability(&self, beta_scale: f64, tau: f64) -> Result<f64> {
        let sigma = self.cfg.user_sigma();
        let pairs = self.cfg.num_pairs;
        let r_max = self.far_tail_radius();
        let per_node: Vec<f64> = self
            .misalignment_gains
            .par_iter()
            .map(|&(gain, weight)| {
                if gain <= 0.0 {
                    return Ok(0.0);
                }
                Ok(weight
                    * self.radial_average(tau, beta_scale * gain, r_max, |r| far_marginal_pdf(r, pairs, sigma))?)
            })
            .collect::<Result<_>>()?;
        let sum: f64 = per_node.iter().sum();
        let value = PI / (2.0 * self.misalignment_nodes() as f64) * sum;
        Ok(value.clamp(0.0, 1.0))
    }

    /// Near-user coverage `P_k(tau_k)` by numerical integration.
    pub fn coverage_near(&self) -> Result<CoverageResult> {
        let c = &self.cfg;
        check_noma_regime(c.alloc_near, c.alloc_far, c.threshold_near, c.threshold_far)?;
        Ok(CoverageResult {
            value: self.near_probability(c.alloc_near, c.threshold_near)?,
            method: Method::TheoremIntegral,
            diagnostics: self.diagnostics(false),
        })
    }

    /// Far-user coverage `P_j(tau_j)` by numerical integration.
    pub fn coverage_far(&self) -> Result<CoverageResult> {
        let c = &self.cfg;
        let margin = c.decoding_margin();
        if margin <= 0.0 {
            return Err(Error::UnsupportedRegime(Regime::NotDecodable { margin }));
        }
        Ok(CoverageResult {
            value: self.far_probability(margin, c.threshold_far)?,
            method: Method::TheoremIntegral,
            diagnostics: self.diagnostics(true),
        })
    }

    fn check_closed_form(&self) -> Result<()> {
        let alpha = self.cfg.path_loss.exponent_los;
        if alpha != 2.0 {
            return Err(Error::UnsupportedRegime(Regime::LosExponent { alpha }));
        }
        Ok(())
    }

    fn closed_near(&self, beta: f64, tau: f64) -> f64 {
        let c = &self.cfg;
        let p = &c.path_loss;
        let k_over_var = c.num_pairs as f64 / c.user_variance;
        let r2 = c.los_radius * c.los_radius;
        let unit = self.psi_los * tau * c.noise_power() / (beta * c.antennas as f64 * p.intercept_los);
        let mut total = 0.0;
        for n in 1..=p.shape_los {
            let a = n as f64 * unit + k_over_var;
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            total += sign * binomial(p.shape_los, n) * (-a * r2).exp_m1() / a;
        }
        (k_over_var * total).clamp(0.0, 1.0)
    }

    /// Closed-form far-user kernel for one misalignment gain.
    fn closed_far_kernel(&self, beta: f64, tau: f64) -> f64 {
        let c = &self.cfg;
        let p = &c.path_loss;
        let var = c.user_variance;
        let r2 = c.los_radius * c.los_radius;
        let k = c.num_pairs as f64;
        let chi = (2.0 * k - 1.0) / (2.0 * var);
        let unit = self.psi_los * tau * c.noise_power() / (beta * c.antennas as f64 * p.intercept_los);
        let mut total = 0.0;
        for n in 1..=p.shape_los {
            let q = n as f64 * unit + 1.0 / (2.0 * var);
            let qc = q + chi;
            let bracket = 1.0 / (q * qc) + (-qc * r2).exp() / (qc * chi) - (-q * r2).exp() / (q * chi);
            let sign = if n % 2 == 1 { 1.0 } else { -1.0 };
            total += sign * binomial(p.shape_los, n) * bracket;
        }
        k / (2.0 * var * var) * total
    }

    fn closed_far(&self, beta_scale: f64, tau: f64) -> f64 {
        let sum: f64 = self
            .misalignment_gains
            .iter()
            .map(|&(gain, w)| {
                if gain > 0.0 {
                    self.closed_far_kernel(beta_scale * gain, tau) * w
                } else {
                    0.0
                }
            })
            .sum();
        (PI / (2.0 * self.misalignment_nodes() as f64) * sum).clamp(0.0, 1.0)
    }

    /// Near-user coverage with inter-cluster interference and NLOS serving
    /// links neglected, in closed form. Needs `alpha_L = 2`.
    pub fn coverage_near_closed(&self) -> Result<CoverageResult> {
        self.check_closed_form()?;
        let c = &self.cfg;
        check_noma_regime(c.alloc_near, c.alloc_far, c.threshold_near, c.threshold_far)?;
        Ok(CoverageResult {
            value: self.closed_near(c.alloc_near, c.threshold_near),
            method: Method::ClosedForm,
            diagnostics: Diagnostics::default(),
        })
    }

    /// Far-user counterpart of [`coverage_near_closed`](Self::coverage_near_closed);
    /// the misalignment average still uses the `n2`-node Chebyshev rule.
    pub fn coverage_far_closed(&self) -> Result<CoverageResult> {
        self.check_closed_form()?;
        let c = &self.cfg;
        let margin = c.decoding_margin();
        if margin <= 0.0 {
            return Err(Error::UnsupportedRegime(Regime::NotDecodable { margin }));
        }
        Ok(CoverageResult {
            value: self.closed_far(margin, c.threshold_far),
            method: Method::ClosedForm,
            diagnostics: Diagnostics {
                misalignment_nodes: Some(self.misalignment_nodes()),
                ..Diagnostics::default()
            },
        })
    }

    fn throughput_with(&self, mode: AccessMode, closed: bool) -> Result<Throughput> {
        let c = &self.cfg;
        let tau_k = rate_threshold(c.rate_near, c.bandwidth, mode);
        let tau_j = rate_threshold(c.rate_far, c.bandwidth, mode);
        // OMA: each user gets the whole power and no intra-pair interference.
        let (beta_near, beta_far) = match mode {
            AccessMode::Noma => {
                check_noma_regime(c.alloc_near, c.alloc_far, tau_k, tau_j)?;
                (c.alloc_near, c.alloc_far - tau_j * c.alloc_near)
            }
            AccessMode::Oma => (1.0, 1.0),
        };
        let (near, far) = if closed {
            self.check_closed_form()?;
            (self.closed_near(beta_near, tau_k), self.closed_far(beta_far, tau_j))
        } else {
            (
                self.near_probability(beta_near, tau_k)?,
                self.far_probability(beta_far, tau_j)?,
            )
        };
        Ok(Throughput {
            rate: c.rate_near * near + c.rate_far * far,
            coverage_near: near,
            coverage_far: far,
            threshold_near: tau_k,
            threshold_far: tau_j,
        })
    }

    /// System throughput `R_k P_k + R_j P_j` with thresholds derived from the
    /// rate requirements.
    pub fn throughput(&self, mode: AccessMode) -> Result<Throughput> {
        self.throughput_with(mode, false)
    }

    /// [`throughput`](Self::throughput) using the closed-form coverages.
    pub fn throughput_closed(&self, mode: AccessMode) -> Result<Throughput> {
        self.throughput_with(mode, true)
    }
}
