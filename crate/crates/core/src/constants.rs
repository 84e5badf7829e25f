//! Explicit constants of the smoothing and tilt-vs-shift inequalities.
//!
//! For a disorder law with MGF `M` and tilted mean `m_δ = (log M)'(δ)`:
//!
//! * `B_δ = (2/δ) |m_δ - log M(δ)/δ|`, continuously extended by `B_0 = 1` —
//!   the coefficient of `(γ/2) δ²` in the tilt smoothing bound;
//! * `c±_{β,δ}` — the derivative-comparison ratios built from expectations of
//!   `(ω - m_δ)² g(±β s₀ (ω - m_δ)^±)` against exponential endpoint weights,
//!   where `g(x) = (e^x - 1)/x`;
//! * `C±_{β,δ} = (1/δ) ∫₀^δ c±_{β,δ'} dδ'` — the averaged constants entering
//!   the sandwich `f(β, h + C⁻βδ; 0) ≤ f(β, h; δ) ≤ f(β, h + C⁺βδ; 0)`;
//! * `F_β(δ) = C⁻_{β,δ} δ` (strictly increasing) and its inverse;
//! * `A_{β,δ} = B_{F_β⁻¹(δ)} (F_β⁻¹(δ)/δ)²` — the shift-smoothing constant.
//!
//! All parameters are restricted to `β ∈ [0, ε₀)`, `|δ| < ε₀` with
//! `ε₀ = min{t₀/2, t₀/(2 s₀)}`, which keeps every expectation finite.

use crate::disorder::DisorderSpec;
use crate::error::{Error, Result};
use crate::numeric::adaptive_simpson;
use serde::{Deserialize, Serialize};

/// `(e^x - 1)/x`, extended by `1` at `x = 0`.
///
/// Near zero the direct form cancels; a four-term series keeps full relative
/// precision for `|x| < 1e-4`.
pub fn exprel(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 + x / 2.0 + x * x / 6.0 + x * x * x / 24.0
    } else {
        x.exp_m1() / x
    }
}

/// Admissible parameter radius `ε₀ = min{t₀/2, t₀/(2 s₀)}`.
pub fn epsilon0(spec: &DisorderSpec, s0: f64) -> f64 {
    let t0 = spec.t0();
    (t0 / 2.0).min(t0 / (2.0 * s0))
}

/// The tilt smoothing coefficient `B_δ`, with `B_0 = 1`.
pub fn b_delta(spec: &DisorderSpec, delta: f64) -> Result<f64> {
    if delta == 0.0 {
        return Ok(1.0);
    }
    let m = spec.tilted_mean(delta)?;
    let log_m = spec.log_mgf(delta)?;
    Ok((2.0 / delta.abs()) * (m - log_m / delta).abs())
}

fn check_range(spec: &DisorderSpec, beta: f64, delta: f64, s0: f64) -> Result<()> {
    if !(s0 > 0.0) {
        return Err(Error::ParameterOutOfRange(format!("s0 = {s0} must be > 0")));
    }
    let eps0 = epsilon0(spec, s0);
    if !(0.0..eps0).contains(&beta) {
        return Err(Error::ParameterOutOfRange(format!(
            "beta = {beta} outside [0, {eps0})"
        )));
    }
    if delta.abs() >= eps0 {
        return Err(Error::ParameterOutOfRange(format!(
            "|delta| = {} outside [0, {eps0})",
            delta.abs()
        )));
    }
    Ok(())
}

/// The derivative-comparison ratios `(c⁻, c⁺)` at `(β, δ)`.
pub fn c_pm(spec: &DisorderSpec, beta: f64, delta: f64, s0: f64) -> Result<(f64, f64)> {
    check_range(spec, beta, delta, s0)?;
    let m = spec.tilted_mean(delta)?;
    let bs = beta * s0;
    // Each integrand has a kink at ω = m, so integrate the halves separately.
    let num_plus = spec.expectation_piecewise(delta, &[m], |x| {
        (x - m) * (x - m) * exprel(bs * (x - m).max(0.0))
    })?;
    let den_plus = spec.expectation_piecewise(delta, &[m], |x| (-bs * (m - x).max(0.0)).exp())?;
    let num_minus = spec.expectation_piecewise(delta, &[m], |x| {
        (x - m) * (x - m) * exprel(-bs * (m - x).max(0.0))
    })?;
    let den_minus = spec.expectation_piecewise(delta, &[m], |x| (bs * (x - m).max(0.0)).exp())?;
    Ok((num_minus / den_minus, num_plus / den_plus))
}

/// The averaged constants `(C⁻, C⁺)` at `(β, δ)`.
pub fn c_pm_averaged(spec: &DisorderSpec, beta: f64, delta: f64, s0: f64) -> Result<(f64, f64)> {
    check_range(spec, beta, delta, s0)?;
    if delta == 0.0 {
        return c_pm(spec, beta, 0.0, s0);
    }
    let minus = average_component(spec, beta, delta, s0, false)?;
    let plus = average_component(spec, beta, delta, s0, true)?;
    Ok((minus, plus))
}

fn average_component(
    spec: &DisorderSpec,
    beta: f64,
    delta: f64,
    s0: f64,
    plus: bool,
) -> Result<f64> {
    // δ' ↦ c±_{β,δ'} is smooth inside the admissible interval; relative
    // tolerance 1e-8 on the average.
    let integrand = |d: f64| {
        let (cm, cp) = c_pm(spec, beta, d, s0).unwrap_or((f64::NAN, f64::NAN));
        if plus {
            cp
        } else {
            cm
        }
    };
    let scale = integrand(0.5 * delta).abs().max(1e-3) * delta.abs();
    let integral = adaptive_simpson(&integrand, 0.0, delta, 1e-8 * scale)?;
    if !integral.is_finite() {
        return Err(Error::QuadratureFailure(
            "c± average hit an invalid point".into(),
        ));
    }
    Ok(integral / delta)
}

/// `F_β(δ) = C⁻_{β,δ} δ` — continuous, strictly increasing, `F_β(0) = 0`.
pub fn f_beta(spec: &DisorderSpec, beta: f64, delta: f64, s0: f64) -> Result<f64> {
    if delta == 0.0 {
        check_range(spec, beta, delta, s0)?;
        return Ok(0.0);
    }
    let (c_minus, _) = c_pm_averaged(spec, beta, delta, s0)?;
    Ok(c_minus * delta)
}

/// Inverse of `F_β` by bisection, to absolute tolerance `1e-10`.
///
/// Both signs of `y` are supported: strict monotonicity holds on the whole
/// admissible interval, so the negative branch is inverted directly.
pub fn f_beta_inverse(spec: &DisorderSpec, beta: f64, y: f64, s0: f64) -> Result<f64> {
    check_range(spec, beta, 0.0, s0)?;
    if y == 0.0 {
        return Ok(0.0);
    }
    let eps0 = epsilon0(spec, s0);
    let sign = y.signum();
    let target = y.abs();
    // Largest admissible |δ|; for laws with unbounded moment radius the
    // bracket grows by doubling instead.
    let mut hi = if eps0.is_finite() {
        eps0 * (1.0 - 1e-12)
    } else {
        1.0f64
    };
    let value_at = |d: f64| f_beta(spec, beta, sign * d, s0).map(|v| v.abs());
    if eps0.is_infinite() {
        let mut guard = 0;
        while value_at(hi)? < target {
            hi *= 2.0;
            guard += 1;
            if guard > 40 {
                return Err(Error::OutOfImage {
                    y,
                    sup: sign * value_at(hi / 2.0)?,
                });
            }
        }
    } else {
        let sup = value_at(hi)?;
        if target > sup {
            return Err(Error::OutOfImage { y, sup: sign * sup });
        }
    }
    let mut lo = 0.0f64;
    while hi - lo > 1e-10 {
        let mid = 0.5 * (lo + hi);
        if value_at(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(sign * 0.5 * (lo + hi))
}

/// Largest shift `y` (in tilt units) for which `F_β⁻¹(y)` stays inside the
/// admissible interval; `None` when the interval is unbounded.
pub fn usable_radius(spec: &DisorderSpec, beta: f64, s0: f64) -> Result<Option<f64>> {
    let eps0 = epsilon0(spec, s0);
    if eps0.is_infinite() {
        return Ok(None);
    }
    Ok(Some(f_beta(spec, beta, eps0 * (1.0 - 1e-9), s0)?))
}

/// The shift-smoothing constant `A_{β,δ} = B_{F_β⁻¹(δ)} (F_β⁻¹(δ)/δ)²`,
/// extended by `A_{β,0} = 1`. Defined for `δ ≥ 0`.
pub fn a_constant(spec: &DisorderSpec, beta: f64, delta: f64, s0: f64) -> Result<f64> {
    if delta < 0.0 {
        return Err(Error::ParameterOutOfRange(format!(
            "A is defined for delta >= 0, got {delta}"
        )));
    }
    if delta == 0.0 {
        check_range(spec, beta, delta, s0)?;
        return Ok(1.0);
    }
    let rho = f_beta_inverse(spec, beta, delta, s0)?;
    let ratio = rho / delta;
    Ok(b_delta(spec, rho)? * ratio * ratio)
}

/// All constants evaluated at one parameter point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstantsReport {
    pub beta: f64,
    pub delta: f64,
    pub s0: f64,
    pub gamma: f64,
    pub b_delta: f64,
    pub c_minus: f64,
    pub c_plus: f64,
    pub big_c_minus: f64,
    pub big_c_plus: f64,
    pub f_value: f64,
    /// `A_{β,δ}`; only defined for `δ ≥ 0`.
    pub a_value: Option<f64>,
    /// Usable inversion radius `ε₀'`; `None` when unbounded.
    pub usable_radius: Option<f64>,
}

/// CSV header used by the grid command.
pub const CSV_HEADER: &str = "beta,delta,B,c_minus,c_plus,C_minus,C_plus,F,A";

impl ConstantsReport {
    pub fn csv_row(&self) -> String {
        let a = self
            .a_value
            .map(|v| v.to_string())
            .unwrap_or_else(|| "nan".to_string());
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.beta,
            self.delta,
            self.b_delta,
            self.c_minus,
            self.c_plus,
            self.big_c_minus,
            self.big_c_plus,
            self.f_value,
            a
        )
    }
}

/// Evaluates every constant at `(β, δ)`.
pub fn constants_report(
    spec: &DisorderSpec,
    beta: f64,
    delta: f64,
    s0: f64,
    gamma: f64,
) -> Result<ConstantsReport> {
    let (c_minus, c_plus) = c_pm(spec, beta, delta, s0)?;
    let (big_c_minus, big_c_plus) = c_pm_averaged(spec, beta, delta, s0)?;
    let b = b_delta(spec, delta)?;
    let f_value = big_c_minus * delta;
    let a_value = if delta >= 0.0 {
        Some(a_constant(spec, beta, delta, s0)?)
    } else {
        None
    };
    Ok(ConstantsReport {
        beta,
        delta,
        s0,
        gamma,
        b_delta: b,
        c_minus,
        c_plus,
        big_c_minus,
        big_c_plus,
        f_value,
        a_value,
        usable_radius: usable_radius(spec, beta, s0)?,
    })
}
