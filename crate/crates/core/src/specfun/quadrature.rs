//! Globally adaptive Gauss-Kronrod (7/15) quadrature on finite intervals.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::Error;

/// Kronrod abscissae on [0, 1); odd indices are the 7-point Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Stopping rule for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSettings {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadratureSettings {
    fn default() -> Self {
        Self {
            abs_tol: 1e-11,
            rel_tol: 1e-10,
            max_intervals: 2000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    lower: f64,
    upper: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod<F, E>(f: &mut F, lower: f64, upper: f64) -> Result<Segment, E>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    let center = 0.5 * (lower + upper);
    let half = 0.5 * (upper - lower);
    let fc = f(center)?;
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx)? + f(center + dx)?;
        kron += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Ok(Segment {
        lower,
        upper,
        value: kron * half,
        error: ((kron - gauss) * half).abs(),
    })
}

/// Integrates a fallible integrand over `[lower, upper]`.
///
/// Integrand errors abort the integration and are passed through unchanged;
/// running out of intervals yields [`Error::Quadrature`].
pub fn integrate<F, E>(mut f: F, lower: f64, upper: f64, settings: &QuadratureSettings) -> Result<f64, E>
where
    F: FnMut(f64) -> Result<f64, E>,
    E: From<Error>,
{
    if upper == lower {
        return Ok(0.0);
    }
    if upper < lower {
        return adaptive(&mut f, upper, lower, settings).map(|v| -v);
    }
    adaptive(&mut f, lower, upper, settings)
}

fn adaptive<F, E>(f: &mut F, lower: f64, upper: f64, settings: &QuadratureSettings) -> Result<f64, E>
where
    F: FnMut(f64) -> Result<f64, E>,
    E: From<Error>,
{
    let first = kronrod(f, lower, upper)?;
    let mut total = first.value;
    let mut error = first.error;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    while error > settings.abs_tol.max(settings.rel_tol * total.abs()) {
        if heap.len() >= settings.max_intervals {
            return Err(Error::Quadrature {
                lower,
                upper,
                error,
                intervals: heap.len(),
            }
            .into());
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.lower + worst.upper);
        if !(mid > worst.lower && mid < worst.upper) {
            // Interval exhausted at machine precision; accept what we have.
            heap.push(Segment { error: 0.0, ..worst });
            error -= worst.error;
            continue;
        }
        let left = kronrod(f, worst.lower, mid)?;
        let right = kronrod(f, mid, worst.upper)?;
        total += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    // Re-sum to shed the drift of the running updates.
    Ok(heap.iter().map(|s| s.value).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ok(f: impl Fn(f64) -> f64) -> impl FnMut(f64) -> Result<f64, Error> {
        move |x| Ok(f(x))
    }

    #[test]
    fn kronrod_is_exact_for_low_degree() {
        let mut f = ok(|x: f64| x.powi(20) - 3.0 * x.powi(7) + 1.0);
        let seg = kronrod(&mut f, -1.0, 2.0).unwrap();
        let exact = (2f64.powi(21) + 1.0) / 21.0 - 3.0 * (2f64.powi(8) - 1.0) / 8.0 + 3.0;
        assert!((seg.value - exact).abs() < 1e-9 * exact.abs());
    }

    #[test]
    fn gauss_weights_sum_to_two() {
        let g = 2.0 * (WG[0] + WG[1] + WG[2]) + WG[3];
        let k = 2.0 * WGK[..7].iter().sum::<f64>() + WGK[7];
        assert!((g - 2.0).abs() < 1e-15);
        assert!((k - 2.0).abs() < 1e-15);
    }

    #[test]
    fn adaptive_handles_peaks() {
        let s = QuadratureSettings::default();
        let v = integrate(ok(|x: f64| 1.0 / (1e-4 + x * x)), -1.0, 1.0, &s).unwrap();
        let exact = 2.0 * (1.0 / 1e-2) * (1.0f64 / 1e-2).atan();
        assert!((v - exact).abs() < 1e-8 * exact);
        let v = integrate(ok(|x: f64| x.sqrt()), 0.0, 1.0, &s).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn reversed_bounds_flip_sign() {
        let s = QuadratureSettings::default();
        let v = integrate(ok(|x: f64| x.exp()), 1.0, 0.0, &s).unwrap();
        assert!((v + (1f64.exp() - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn integrand_errors_propagate() {
        let s = QuadratureSettings::default();
        let r: Result<f64, Error> = integrate(
            |x| {
                if x > 0.5 {
                    Err(crate::error::domain("x", x, "test"))
                } else {
                    Ok(x)
                }
            },
            0.0,
            1.0,
            &s,
        );
        assert!(matches!(r, Err(Error::Domain { .. })));
    }
}
