//! Special functions behind the interference Laplace transform: the Gauss
//! hypergeometric function, the `rho` kernels built on it, Gauss-Chebyshev
//! nodes, and the adaptive quadrature used for the distance integrals.

mod chebyshev;
mod hyp2f1;
pub mod quadrature;

pub use chebyshev::ChebyshevRule;
pub use hyp2f1::{gauss_2f1, Hyp2f1, MAX_TERMS, SERIES_TOL};
pub use quadrature::{integrate, QuadratureSettings};

use crate::error::{domain, Result};
use crate::model::PathLossParams;

/// Beyond this argument `rho_L` equals 1 to far below double precision.
const RHO_LOS_SATURATION: f64 = 1e60;

/// LOS kernel `2F1(N_L, N_L + 2/a_L; N_L + 2/a_L + 1; -v) 2 v^N_L / (a_L N_L + 2)`.
///
/// Increases from 0 at `v = 0` towards 1 as `v -> inf`.
pub fn rho_los(v: f64, params: &PathLossParams) -> Result<f64> {
    let (a, b, c) = los_parameters(params);
    los_from(v, params, |z| gauss_2f1(a, b, c, z))
}

/// NLOS kernel `2F1(-2/a_N, N_N; 1 - 2/a_N; -v)`; equals 1 at `v = 0` and
/// grows like `v^(2/a_N)`.
pub fn rho_nlos(v: f64, params: &PathLossParams) -> Result<f64> {
    let (a, b, c) = nlos_parameters(params)?;
    check_argument(v, "rho_N needs v >= 0")?;
    gauss_2f1(a, b, c, -v)
}

fn los_parameters(params: &PathLossParams) -> (f64, f64, f64) {
    let n = params.shape_los as f64;
    let b = n + 2.0 / params.exponent_los;
    (n, b, b + 1.0)
}

fn nlos_parameters(params: &PathLossParams) -> Result<(f64, f64, f64)> {
    let alpha = params.exponent_nlos;
    if alpha <= 2.0 {
        return Err(domain("alpha_N", alpha, "rho_N converges only for alpha_N > 2"));
    }
    let delta = 2.0 / alpha;
    Ok((-delta, params.shape_nlos as f64, 1.0 - delta))
}

fn check_argument(v: f64, reason: &'static str) -> Result<()> {
    if v.is_nan() || v < 0.0 {
        Err(domain("v", v, reason))
    } else {
        Ok(())
    }
}

fn los_from(v: f64, params: &PathLossParams, f: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    check_argument(v, "rho_L needs v >= 0")?;
    if v == 0.0 {
        return Ok(0.0);
    }
    if v >= RHO_LOS_SATURATION {
        return Ok(1.0);
    }
    let n = params.shape_los as f64;
    let alpha = params.exponent_los;
    // v^N * 2F1 is O(1); combine in log space so neither factor overflows.
    Ok(2.0 / (alpha * n + 2.0) * (n * v.ln() + f(-v)?.ln()).exp())
}

/// [`rho_los`] and [`rho_nlos`] for one fixed set of path-loss parameters,
/// backed by precomputed [`Hyp2f1`] tables.
#[derive(Debug, Clone)]
pub struct RhoKernels {
    params: PathLossParams,
    los: Hyp2f1,
    nlos: Hyp2f1,
}

impl RhoKernels {
    pub fn new(params: &PathLossParams) -> Result<Self> {
        let (a, b, c) = los_parameters(params);
        let los = Hyp2f1::new(a, b, c)?;
        let (a, b, c) = nlos_parameters(params)?;
        let nlos = Hyp2f1::new(a, b, c)?;
        Ok(Self {
            params: *params,
            los,
            nlos,
        })
    }

    pub fn los(&self, v: f64) -> Result<f64> {
        los_from(v, &self.params, |z| self.los.eval(z))
    }

    pub fn nlos(&self, v: f64) -> Result<f64> {
        check_argument(v, "rho_N needs v >= 0")?;
        self.nlos.eval(-v)
    }
}

/// `N (N!)^(-1/N)`, the Alzer-bound constant for a unit-mean Gamma(N) variable.
pub fn psi(shape: u32) -> f64 {
    let n = shape as f64;
    let ln_fact: f64 = (2..=shape).map(|k| (k as f64).ln()).sum();
    n * (-ln_fact / n).exp()
}

/// Binomial coefficient as a float.
pub fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn psi_values() {
        assert_eq!(psi(1), 1.0);
        assert!((psi(2) - 2f64.sqrt()).abs() < 1e-12);
        assert!((psi(3) - 1.650_964).abs() < 1e-6);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(3, 0), 1.0);
        assert_eq!(binomial(3, 2), 3.0);
        assert_eq!(binomial(10, 5), 252.0);
        assert_eq!(binomial(2, 3), 0.0);
    }

    #[test]
    fn rho_endpoints() {
        let p = PathLossParams::default();
        assert_eq!(rho_los(0.0, &p).unwrap(), 0.0);
        assert_eq!(rho_nlos(0.0, &p).unwrap(), 1.0);
        assert!(rho_los(-1.0, &p).is_err());
        let bad = PathLossParams {
            exponent_nlos: 2.0,
            ..p
        };
        assert!(rho_nlos(1.0, &bad).is_err());
    }

    #[test]
    fn rho_los_at_one() {
        // N_L = 3, alpha_L = 2: 2F1(3, 4; 5; -1) * 2 / 8. Oracle: the Pfaff
        // variant on b, 2^-4 2F1(4, 2; 5; 1/2), summed to 200 terms.
        let p = PathLossParams::default();
        let (a, b, c) = (4.0, 2.0, 5.0);
        let (mut t, mut s) = (1.0, 1.0);
        for n in 0..200 {
            let n = n as f64;
            t *= (a + n) * (b + n) / ((c + n) * (n + 1.0)) * 0.5;
            s += t;
        }
        let oracle = 2f64.powi(-4) * s * 0.25;
        assert!((rho_los(1.0, &p).unwrap() - oracle).abs() < 1e-13);
    }

    #[test]
    fn rho_los_monotone_on_grid() {
        let p = PathLossParams::default();
        let mut prev = 0.0;
        for i in 1..=1000 {
            let v = 0.01 * i as f64;
            let r = rho_los(v, &p).unwrap();
            assert!(r > prev, "v={v}");
            prev = r;
        }
        assert!(prev < 1.0);
    }

    #[test]
    fn tabulated_kernels_match() {
        let p = PathLossParams::default();
        let k = RhoKernels::new(&p).unwrap();
        for e in -30..=60 {
            let v = 10f64.powf(e as f64 * 0.5);
            let (l0, l1) = (rho_los(v, &p).unwrap(), k.los(v).unwrap());
            let (n0, n1) = (rho_nlos(v, &p).unwrap(), k.nlos(v).unwrap());
            assert!((l0 - l1).abs() <= 1e-13 * l0.abs().max(1e-300), "los v={v}: {l0} {l1}");
            assert!((n0 / n1 - 1.0).abs() < 1e-13, "nlos v={v}: {n0} {n1}");
        }
    }

    #[test]
    fn rho_nlos_growth_exponent() {
        let p = PathLossParams::default();
        let (v1, v2) = (1e8, 1e10);
        let slope = (rho_nlos(v2, &p).unwrap() / rho_nlos(v1, &p).unwrap()).ln() / (v2 / v1).ln();
        assert!((slope - 0.5).abs() < 1e-3, "{slope}");
    }
}
