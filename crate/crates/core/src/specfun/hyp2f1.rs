//! Gauss hypergeometric function on the non-positive real axis.
//!
//! For `z <= 0` the Pfaff transformation
//!
//! ```text
//! 2F1(a, b; c; z) = (1 - z)^(-a) 2F1(a, c - b; c; w),   w = z / (z - 1) in [0, 1)
//! ```
//!
//! maps the argument into the unit interval. The transformed series is summed
//! directly while `w <= CONTINUATION_START`. Closer to the branch point at
//! `w = 1` the series needs too many terms, so the value and derivative at
//! `CONTINUATION_START` are carried towards `w` by re-expanding the
//! hypergeometric ODE in Taylor series, each step covering half the distance
//! left to the singularity. This works for every real parameter set, including
//! the integer `b - a` cases where the `1/z` connection formulas degenerate.

use crate::error::{domain, Error, Result};

/// Relative size of a term at which a series is considered converged.
pub const SERIES_TOL: f64 = 1e-15;

/// Hard cap on terms per series; exceeding it is reported, not truncated.
pub const MAX_TERMS: usize = 500;

/// Largest transformed argument summed directly.
const CONTINUATION_START: f64 = 0.5;

/// Fraction of the distance to `w = 1` covered by one continuation step.
const STEP_FRACTION: f64 = 0.5;

/// `2F1(a, b; c; z)` for real parameters and `z <= 0`.
pub fn gauss_2f1(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    for (name, v) in [("a", a), ("b", b), ("c", c), ("z", z)] {
        if !v.is_finite() {
            return Err(domain(name, v, "must be finite"));
        }
    }
    if is_non_positive_integer(c) {
        return Err(domain("c", c, "2F1 has a pole at non-positive integer c"));
    }
    if z > 0.0 {
        return Err(domain("z", z, "only z <= 0 is supported"));
    }
    if z == 0.0 || a == 0.0 || b == 0.0 {
        return Ok(1.0);
    }
    // Polynomial cases: the direct series terminates for any z.
    if is_non_positive_integer(a) || is_non_positive_integer(b) {
        let degree = [a, b]
            .into_iter()
            .filter(|&x| is_non_positive_integer(x))
            .fold(f64::INFINITY, |acc, x| acc.min(-x));
        if degree < MAX_TERMS as f64 {
            return Ok(series(a, b, c, z, (a, b, c, z))?.value);
        }
    }

    let w = z / (z - 1.0);
    // 1 - w, computed without cancellation.
    let dist = 1.0 / (1.0 - z);
    let prefactor = (1.0 - z).powf(-a);
    let bb = c - b;
    let inner = if w <= CONTINUATION_START {
        series(a, bb, c, w, (a, b, c, z))?.value
    } else {
        continue_to(a, bb, c, dist, (a, b, c, z))?
    };
    Ok(prefactor * inner)
}

fn is_non_positive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.round()
}

struct SeriesSum {
    value: f64,
    derivative: f64,
}

/// Maclaurin series of `2F1(a, b; c; x)` and its derivative, for `|x| < 1`.
fn series(a: f64, b: f64, c: f64, x: f64, orig: (f64, f64, f64, f64)) -> Result<SeriesSum> {
    let mut term = 1.0;
    let mut value = 1.0;
    let mut derivative = 0.0;
    // Terms may shrink by accident before the ratio settles below one.
    let settle = a.abs().max(b.abs()).max(c.abs()) + 2.0;
    for n in 0..MAX_TERMS {
        let nf = n as f64;
        term *= (a + nf) * (b + nf) / ((c + nf) * (nf + 1.0)) * x;
        value += term;
        if x != 0.0 {
            derivative += (nf + 1.0) * term / x;
        }
        if term == 0.0 {
            return Ok(SeriesSum { value, derivative });
        }
        if nf > settle && term.abs() <= SERIES_TOL * value.abs() {
            return Ok(SeriesSum { value, derivative });
        }
    }
    Err(convergence(orig))
}

/// Value of `2F1(a, b; c; 1 - dist)` by analytic continuation from
/// `x = CONTINUATION_START` along the real axis.
fn continue_to(a: f64, b: f64, c: f64, dist: f64, orig: (f64, f64, f64, f64)) -> Result<f64> {
    let start = series(a, b, c, CONTINUATION_START, orig)?;
    let (mut y, mut dy) = (start.value, start.derivative);
    let mut d0 = 1.0 - CONTINUATION_START;
    while d0 > dist {
        let h = (d0 - dist).min(STEP_FRACTION * d0);
        (y, dy) = taylor_step(a, b, c, d0, y, dy, h, orig)?;
        d0 -= h;
    }
    Ok(y)
}

/// Advances `(y, y')` of the hypergeometric ODE from `x0 = 1 - d0` to `x0 + h`.
#[allow(clippy::too_many_arguments)]
fn taylor_step(
    a: f64,
    b: f64,
    c: f64,
    d0: f64,
    y: f64,
    dy: f64,
    h: f64,
    orig: (f64, f64, f64, f64),
) -> Result<(f64, f64)> {
    if h == 0.0 {
        return Ok((y, dy));
    }
    let ab = a * b;
    let q1 = -(a + b + 1.0);
    let x0 = 1.0 - d0;
    let p0 = x0 * d0;
    let p1 = 1.0 - 2.0 * x0;
    let q0 = c - (a + b + 1.0) * x0;

    // Scaled Taylor coefficients u_n = y^(n)(x0) h^n / n!.
    let (mut u0, mut u1) = (y, dy * h);
    let (mut val, mut der) = (u0 + u1, u1);
    for n in 0..MAX_TERMS {
        let nf = n as f64;
        let u2 = -((p1 * nf * (nf + 1.0) + q0 * (nf + 1.0)) * u1 * h + (-nf * (nf - 1.0) + q1 * nf - ab) * u0 * h * h)
            / (p0 * (nf + 1.0) * (nf + 2.0));
        val += u2;
        der += (nf + 2.0) * u2;
        let scale = val.abs().max(der.abs()).max(f64::MIN_POSITIVE);
        if u2.abs() <= SERIES_TOL * scale && u1.abs() <= SERIES_TOL * scale {
            return Ok((val, der / h));
        }
        u0 = u1;
        u1 = u2;
    }
    Err(convergence(orig))
}

/// Number of precomputed anchors `1 - 2^-k` in [`Hyp2f1`].
const ANCHORS: usize = 220;

/// `2F1(a, b; c; .)` for fixed parameters, with the continuation path
/// precomputed so that each evaluation costs at most one Taylor step.
#[derive(Debug, Clone)]
pub struct Hyp2f1 {
    a: f64,
    b: f64,
    c: f64,
    /// `(y, y')` of the Pfaff-transformed function at `w = 1 - 2^-(k+1)`.
    anchors: Vec<(f64, f64)>,
}

impl Hyp2f1 {
    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        // Validates the parameters once.
        gauss_2f1(a, b, c, -1.0)?;
        let orig = (a, b, c, f64::NAN);
        let bb = c - b;
        let start = series(a, bb, c, CONTINUATION_START, orig)?;
        let mut anchors = Vec::with_capacity(ANCHORS);
        let (mut y, mut dy) = (start.value, start.derivative);
        let mut d0 = 1.0 - CONTINUATION_START;
        anchors.push((y, dy));
        for _ in 1..ANCHORS {
            (y, dy) = taylor_step(a, bb, c, d0, y, dy, 0.5 * d0, orig)?;
            d0 *= 0.5;
            anchors.push((y, dy));
        }
        Ok(Self { a, b, c, anchors })
    }

    /// Evaluates at `z <= 0`; agrees with [`gauss_2f1`] to rounding.
    pub fn eval(&self, z: f64) -> Result<f64> {
        let (a, b, c) = (self.a, self.b, self.c);
        if !(z <= 0.0) || !z.is_finite() {
            return Err(domain("z", z, "only finite z <= 0 is supported"));
        }
        if z == 0.0 || a == 0.0 || b == 0.0 || is_non_positive_integer(a) || is_non_positive_integer(b) {
            return gauss_2f1(a, b, c, z);
        }
        let w = z / (z - 1.0);
        let dist = 1.0 / (1.0 - z);
        let prefactor = (1.0 - z).powf(-a);
        let bb = c - b;
        let orig = (a, b, c, z);
        if w <= CONTINUATION_START {
            return Ok(prefactor * series(a, bb, c, w, orig)?.value);
        }
        // Closest anchor on the near side: distance 2^-(k+1) >= dist.
        let mut k = ((-dist.log2()).floor() as usize).saturating_sub(1).min(ANCHORS - 1);
        while k > 0 && 0.5f64.powi(k as i32 + 1) < dist {
            k -= 1;
        }
        let (mut y, mut dy) = self.anchors[k];
        let mut d0 = 0.5f64.powi(k as i32 + 1);
        while d0 > dist {
            let h = (d0 - dist).min(STEP_FRACTION * d0);
            (y, dy) = taylor_step(a, bb, c, d0, y, dy, h, orig)?;
            d0 -= h;
        }
        Ok(prefactor * y)
    }
}

fn convergence((a, b, c, z): (f64, f64, f64, f64)) -> Error {
    Error::SeriesConvergence {
        a,
        b,
        c,
        z,
        terms: MAX_TERMS,
    }
}
