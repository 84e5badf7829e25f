//! Quadrature and special-function kernels used by the model modules.
//!
//! Everything here is deterministic: fixed node sets or adaptive schemes with
//! fixed refinement rules, so repeated evaluation of the same integrand gives
//! bit-identical results.

use crate::error::{Error, Result};
use std::sync::OnceLock;

/// Adaptive Simpson integration of `f` on the finite interval `[a, b]`.
///
/// `abs_tol` is an absolute error budget for the whole interval. Refinement
/// stops when the classical `|S2 - S1| < 15 tol` criterion is met; exceeding
/// `max_depth` levels is reported as a failure rather than silently accepted.
pub fn adaptive_simpson<F>(f: &F, a: f64, b: f64, abs_tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::QuadratureFailure("non-finite interval".into()));
    }
    if a == b {
        return Ok(0.0);
    }
    let m = 0.5 * (a + b);
    let fa = f(a);
    let fm = f(m);
    let fb = f(b);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, abs_tol.max(f64::MIN_POSITIVE), 60)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol || (b - a).abs() < 1e-300 {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::QuadratureFailure(format!(
            "refinement limit reached on [{a}, {b}]"
        )));
    }
    let half = 0.5 * tol;
    Ok(simpson_step(f, a, m, fa, flm, fm, left, half, depth - 1)?
        + simpson_step(f, m, b, fm, frm, fb, right, half, depth - 1)?)
}

/// Integrates `f` over `[start, +inf)` (or `(-inf, start]` when `dir < 0`)
/// by geometrically widening panels.
///
/// The iteration stops once two consecutive panels contribute less than
/// `1e-16` of the accumulated value. Panels that keep growing signal a
/// non-integrable weight and are reported as such.
pub fn integrate_tail<F>(f: &F, start: f64, dir: f64, initial_width: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let sign = if dir < 0.0 { -1.0 } else { 1.0 };
    let mut acc = 0.0f64;
    let mut width = initial_width.max(1e-6);
    let mut edge = start;
    let mut small_streak = 0u32;
    // Average integrand level per panel; panels widen geometrically, so the
    // raw panel value grows even for integrable slowly-decaying weights.
    let mut prev_rate = f64::INFINITY;
    let mut grow_streak = 0u32;
    for _ in 0..200 {
        let (a, b) = if sign > 0.0 {
            (edge, edge + width)
        } else {
            (edge - width, edge)
        };
        let tol = 1e-13 * acc.abs().max(1.0) + 1e-300;
        let panel = adaptive_simpson(f, a, b, tol)?;
        if !panel.is_finite() {
            return Err(Error::IntegrabilityViolation(format!(
                "tail overflows near {edge}"
            )));
        }
        let rate = panel.abs() / width;
        if rate > 1.25 * prev_rate {
            grow_streak += 1;
            if grow_streak >= 4 {
                return Err(Error::IntegrabilityViolation(format!(
                    "tail level keeps growing near {edge}"
                )));
            }
        } else {
            grow_streak = 0;
        }
        prev_rate = rate;
        acc += panel;
        if panel.abs() <= 1e-16 * acc.abs().max(f64::MIN_POSITIVE) {
            small_streak += 1;
            if small_streak >= 2 {
                return Ok(acc);
            }
        } else {
            small_streak = 0;
        }
        edge = if sign > 0.0 { b } else { a };
        width *= 2.0;
    }
    Err(Error::IntegrabilityViolation(
        "tail did not settle after 200 panels".into(),
    ))
}

/// Gauss-Hermite rule: nodes and weights for `∫ e^{-x^2} f(x) dx ≈ Σ w_i f(x_i)`.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussHermite {
    /// Computes an `n`-point rule by Newton iteration on the (normalized)
    /// Hermite recurrence.
    pub fn new(n: usize) -> Self {
        assert!(n >= 2);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        let m = n.div_ceil(2);
        let mut z = 0.0f64;
        for i in 0..m {
            z = match i {
                0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
                1 => z - 1.14 * nf.powf(0.426) / z,
                2 => 1.86 * z - 0.86 * nodes[0],
                3 => 1.91 * z - 0.91 * nodes[1],
                _ => 2.0 * z - nodes[i - 2],
            };
            let mut pp = 0.0;
            for _ in 0..200 {
                // p1 becomes the normalized Hermite polynomial of degree n at z.
                let mut p1 = std::f64::consts::PI.powf(-0.25);
                let mut p2 = 0.0f64;
                for j in 0..n {
                    let p3 = p2;
                    p2 = p1;
                    let jf = j as f64;
                    p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
                }
                pp = (2.0 * nf).sqrt() * p2;
                let dz = p1 / pp;
                z -= dz;
                if dz.abs() < 1e-15 {
                    break;
                }
            }
            nodes[i] = z;
            nodes[n - 1 - i] = -z;
            weights[i] = 2.0 / (pp * pp);
            weights[n - 1 - i] = weights[i];
        }
        GaussHermite { nodes, weights }
    }

    /// Expectation of `f` under a unit-variance Gaussian with the given mean.
    pub fn gaussian_mean<F: Fn(f64) -> f64>(&self, mean: f64, f: F) -> f64 {
        let inv_sqrt_pi = 1.0 / std::f64::consts::PI.sqrt();
        let mut acc = 0.0;
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mean + std::f64::consts::SQRT_2 * x);
        }
        acc * inv_sqrt_pi
    }
}

/// Shared 128-point rule; exact for polynomials up to degree 255.
pub fn gauss_hermite_128() -> &'static GaussHermite {
    static RULE: OnceLock<GaussHermite> = OnceLock::new();
    RULE.get_or_init(|| GaussHermite::new(128))
}

/// Riemann zeta on `s > 1` by direct summation plus Euler-Maclaurin tail.
pub fn zeta(s: f64) -> f64 {
    assert!(s > 1.0, "zeta requires s > 1");
    let n0 = 64usize;
    let mut head = 0.0f64;
    for n in 1..n0 {
        head += (n as f64).powf(-s);
    }
    let nf = n0 as f64;
    let t = nf.powf(-s);
    head
        + nf.powf(1.0 - s) / (s - 1.0)
        + 0.5 * t
        + s * t / nf / 12.0
        - s * (s + 1.0) * (s + 2.0) * t / nf.powi(3) / 720.0
        + s * (s + 1.0) * (s + 2.0) * (s + 3.0) * (s + 4.0) * t / nf.powi(5) / 30240.0
}

/// Bisection root finding for a monotone decreasing predicate value.
///
/// Finds the root of `f` on `[lo, hi]` assuming `f(lo) >= 0 >= f(hi)`,
/// stopping when the bracket is below `rel_tol` relative to its midpoint
/// (with an absolute floor for roots at zero).
pub fn bisect_decreasing<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, rel_tol: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= rel_tol * mid.abs().max(1e-300) {
            return mid;
        }
        if f(mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Least-squares slope of `y` against `x`.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
    }
    sxy / sxx
}

/// Numerically stable `log(exp(a) + exp(b))`.
pub fn log_sum_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    if a > b {
        a + (b - a).exp().ln_1p()
    } else {
        b + (a - b).exp().ln_1p()
    }
}
