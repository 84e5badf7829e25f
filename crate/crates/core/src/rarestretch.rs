//! Rare-stretch strategy: gain/cost experiments and the certified
//! free-energy lower bound.
//!
//! A stretch of length `ℓ` is "good" when `(1/ℓ) log Z_ℓ ≥ G`. Good
//! stretches are rare under the untilted law but typical under a suitable
//! tilt; their probability is estimated by importance sampling with the
//! exact likelihood ratio, and the geometric-spacing construction turns
//! `(P(A_ℓ), ℓ, G)` into the explicit lower bound
//!
//! ```text
//! f ≥ (P/ℓ) [ ℓ G + E log c - γ log(ℓ/P) ]
//! ```
//!
//! where `E log c` is the expected log prefactor of the polynomial bound
//! `Z_N ≥ c/N^γ` (for the pinning witness, `log(c_α(1-defect)) + h + β m_δ`).
//! The entropic cost rate of forcing the tilt is `δ m_δ - log M(δ)`, the
//! relative entropy of the tilted law with respect to the base law.

use crate::constants::b_delta;
use crate::disorder::DisorderSpec;
use crate::error::{Error, Result};
use crate::pinning::{critical_point, free_energy_mc, quenched_log_z, RenewalLaw};
use crate::seeds::{replica_seed, run_indexed};
use serde::{Deserialize, Serialize};

/// Relative entropy rate `δ m_δ - log M(δ)` of the tilted law w.r.t. the
/// base law (the exponential cost of seeing tilted-typical stretches).
pub fn relative_entropy_rate(spec: &DisorderSpec, delta: f64) -> Result<f64> {
    Ok(delta * spec.tilted_mean(delta)? - spec.log_mgf(delta)?)
}

/// The closed-form lower bound from the rare-stretch composition.
pub fn gain_cost_lower_bound(
    p_hat: f64,
    ell: usize,
    gain: f64,
    gamma: f64,
    e_log_c: f64,
) -> Result<f64> {
    if ell == 0 {
        return Err(Error::ParameterOutOfRange("ell must be >= 1".into()));
    }
    if !(p_hat > 0.0 && p_hat <= 1.0) {
        return Err(Error::DegenerateEstimate(format!(
            "P(A_ell) estimate {p_hat} outside (0, 1]"
        )));
    }
    let lf = ell as f64;
    Ok((p_hat / lf) * (lf * gain + e_log_c - gamma * (lf / p_hat).ln()))
}

/// One stretch experiment: estimated stretch-set probability and the
/// certified lower bound.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StretchExperiment {
    pub ell: usize,
    pub g_target: f64,
    pub beta: f64,
    pub h: f64,
    pub delta: f64,
    pub gamma: f64,
    /// Expected log prefactor of the polynomial bound under the tilted law.
    pub e_log_c: f64,
    /// Importance-sampling estimate of `P(A_ℓ)` under the untilted law.
    pub p_hat: f64,
    pub p_hat_se: f64,
    /// Empirical `P_δ(A_ℓ)`; tends to 1 when `G` sits below the tilted mean.
    pub p_delta_hat: f64,
    pub lower_bound: f64,
    /// Bound recomputed at `P_hat - 2 se` (and `-∞` when that is ≤ 0).
    pub lower_bound_conservative: f64,
    pub certified_positive: bool,
    pub samples: usize,
    pub seed: u64,
}

/// Estimates `P(A_ℓ)` for `A_ℓ = {(1/ℓ) log Z_ℓ ≥ G}` by sampling stretches
/// under the `δ`-tilted law and reweighting with the exact likelihood ratio.
#[allow(clippy::too_many_arguments)]
pub fn estimate_stretch_set(
    spec: &DisorderSpec,
    renewal: &RenewalLaw,
    beta: f64,
    h: f64,
    delta: f64,
    ell: usize,
    g_target: f64,
    samples: usize,
    seed: u64,
    workers: usize,
) -> Result<StretchExperiment> {
    if ell < 8 {
        return Err(Error::ParameterOutOfRange(format!("ell = {ell} < 8")));
    }
    if samples < 100 {
        return Err(Error::ParameterOutOfRange(format!(
            "samples = {samples} < 100"
        )));
    }
    spec.tilt(delta)?;
    let per_sample: Vec<Result<(f64, bool)>> = run_indexed(workers, samples, |i| {
        let rseed = replica_seed(seed, i as u64);
        let (omega, log_w) = spec.sample_block(delta, ell, rseed)?;
        let rate = quenched_log_z(renewal, &omega, beta, h)? / ell as f64;
        let good = rate >= g_target;
        // Weight e^{-log_w} converts the tilted sample into an untilted one.
        let w = if good { (-log_w).exp() } else { 0.0 };
        Ok((w, good))
    });
    let rows: Vec<(f64, bool)> = per_sample.into_iter().collect::<Result<_>>()?;
    let hits = rows.iter().filter(|r| r.1).count();
    if hits == 0 {
        return Err(Error::DegenerateEstimate(
            "no sampled stretch reached the gain target".into(),
        ));
    }
    let nf = samples as f64;
    let p_hat = rows.iter().map(|r| r.0).sum::<f64>() / nf;
    let var = rows
        .iter()
        .map(|r| {
            let d = r.0 - p_hat;
            d * d
        })
        .sum::<f64>()
        / (nf * (nf - 1.0));
    let p_hat_se = var.sqrt();
    let p_delta_hat = hits as f64 / nf;
    let gamma = renewal.gamma();
    let e_log_c = renewal.prefactor().ln() + h + beta * spec.tilted_mean(delta)?;
    let lower_bound = gain_cost_lower_bound(p_hat.min(1.0), ell, g_target, gamma, e_log_c)?;
    let p_cons = p_hat - 2.0 * p_hat_se;
    let lower_bound_conservative = if p_cons > 0.0 {
        gain_cost_lower_bound(p_cons.min(1.0), ell, g_target, gamma, e_log_c)?
    } else {
        f64::NEG_INFINITY
    };
    Ok(StretchExperiment {
        ell,
        g_target,
        beta,
        h,
        delta,
        gamma,
        e_log_c,
        p_hat,
        p_hat_se,
        p_delta_hat,
        lower_bound,
        lower_bound_conservative,
        certified_positive: lower_bound > 0.0 && lower_bound_conservative > 0.0,
        samples,
        seed,
    })
}

/// Literal composition cross-check: scans consecutive `ℓ`-blocks under the
/// untilted law, and evaluates `(1/L) log Z_L` on the concatenated sequence
/// once `k` good stretches have been seen (or the length cap is hit).
///
/// Returns `(rate, good_stretches_seen, total_length)`.
#[allow(clippy::too_many_arguments)]
pub fn composite_stretch_rate(
    spec: &DisorderSpec,
    renewal: &RenewalLaw,
    beta: f64,
    h: f64,
    ell: usize,
    g_target: f64,
    k: usize,
    seed: u64,
) -> Result<(f64, usize, usize)> {
    let cap = 1usize << 12;
    let mut omega: Vec<f64> = Vec::new();
    let mut good = 0usize;
    let mut block = 0u64;
    while omega.len() + ell <= cap && good < k {
        let (b, _) = spec.sample_block(0.0, ell, replica_seed(seed, block))?;
        let rate = quenched_log_z(renewal, &b, beta, h)? / ell as f64;
        if rate >= g_target {
            good += 1;
        }
        omega.extend_from_slice(&b);
        block += 1;
    }
    if omega.is_empty() {
        return Err(Error::ParameterOutOfRange("ell exceeds the length cap".into()));
    }
    let total = omega.len();
    let rate = quenched_log_z(renewal, &omega, beta, h)? / total as f64;
    Ok((rate, good, total))
}

/// Per-tilt margin of the smoothing bound `f(β, h̄; δ) ≤ (γ/2) B_δ δ²`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TiltSmoothingEntry {
    pub delta: f64,
    pub estimate: f64,
    pub std_error: f64,
    pub systematic: f64,
    pub bound: f64,
    /// `bound + allowance - estimate`; the check passes when nonnegative.
    pub margin: f64,
    pub passed: bool,
}

/// Report of the tilt-smoothing verification run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TiltSmoothingReport {
    pub beta: f64,
    pub gamma: f64,
    pub h_critical: f64,
    pub entries: Vec<TiltSmoothingEntry>,
    pub passed: bool,
}

/// Locates `h̄ = h_c(β)` at zero tilt, then checks the smoothing bound
/// `f(β, h̄; δ) ≤ (γ/2) B_δ δ²` (within Monte Carlo noise) across the grid.
#[allow(clippy::too_many_arguments)]
pub fn tilt_smoothing_report(
    spec: &DisorderSpec,
    renewal: &RenewalLaw,
    beta: f64,
    delta_grid: &[f64],
    n: usize,
    replicas: usize,
    seed: u64,
    workers: usize,
    hc_tol: f64,
) -> Result<TiltSmoothingReport> {
    if beta <= 0.0 {
        return Err(Error::ParameterOutOfRange("beta must be > 0".into()));
    }
    let h_critical = critical_point(spec, renewal, beta, 0.0, n, replicas, seed, workers, hc_tol)?;
    let gamma = renewal.gamma();
    let mut entries = Vec::with_capacity(delta_grid.len());
    for &delta in delta_grid {
        let est = free_energy_mc(spec, renewal, beta, h_critical, delta, n, replicas, seed, workers)?;
        let bound = 0.5 * gamma * b_delta(spec, delta)? * delta * delta;
        let allowance = 3.0 * (est.std_error + est.systematic);
        let margin = bound + allowance - est.value;
        entries.push(TiltSmoothingEntry {
            delta,
            estimate: est.value,
            std_error: est.std_error,
            systematic: est.systematic,
            bound,
            margin,
            passed: margin >= 0.0,
        });
    }
    let passed = entries.iter().all(|e| e.passed);
    Ok(TiltSmoothingReport {
        beta,
        gamma,
        h_critical,
        entries,
        passed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropy_rate_values() {
        let g = DisorderSpec::standard_gaussian();
        assert_eq!(relative_entropy_rate(&g, 0.0).unwrap(), 0.0);
        // Gaussian: δ² - δ²/2 = δ²/2.
        assert!((relative_entropy_rate(&g, 0.2).unwrap() - 0.02).abs() < 1e-15);
        // Two-point at δ = 0.1 against the direct Kullback-Leibler sum
        // (mpmath: 0.0055000582253529211298).
        let tp = DisorderSpec::two_point(2.0).unwrap();
        let er = relative_entropy_rate(&tp, 0.1).unwrap();
        assert!((er - 0.0055000582253529211298).abs() < 1e-15, "{er}");
        let tilted = tp.tilt(0.1).unwrap();
        let kl: f64 = tilted
            .atoms()
            .unwrap()
            .iter()
            .zip(tp.atoms().unwrap())
            .map(|(&(_, q), (_, p))| q * (q / p).ln())
            .sum();
        assert!((er - kl).abs() < 1e-14, "{er} vs {kl}");
    }

    #[test]
    fn lower_bound_arithmetic() {
        // (0.5/16)(16*0.2 - 1 - 2 log 32) from mpmath.
        let v = gain_cost_lower_bound(0.5, 16, 0.2, 2.0, -1.0).unwrap();
        assert!((v - (-0.14785849392498290919)).abs() < 1e-15, "{v}");
        // P = 1: G + (E log c - γ log ℓ)/ℓ.
        let v = gain_cost_lower_bound(1.0, 8, 0.3, 1.5, 0.7).unwrap();
        let expect = 0.3 + (0.7 - 1.5 * 8.0f64.ln()) / 8.0;
        assert!((v - expect).abs() < 1e-15);
        assert!(gain_cost_lower_bound(0.0, 8, 0.3, 1.5, 0.7).is_err());
    }

    #[test]
    fn boundary_case_tends_to_zero() {
        // G = γ C and P = e^{-ℓC}: the bound collapses to the (E log c - γ
        // log ℓ)/ℓ correction, vanishing as ℓ grows.
        let gamma = 1.8;
        let cost = 0.02;
        let mut prev = f64::NEG_INFINITY;
        for ell in [64usize, 256, 1024] {
            let p = (-(ell as f64) * cost).exp();
            let v = gain_cost_lower_bound(p, ell, gamma * cost, gamma, -1.0).unwrap();
            assert!(v < 0.0, "ell {ell}: {v}");
            assert!(v > prev);
            prev = v;
        }
        assert!(prev.abs() < 1e-3);
    }

    #[test]
    fn trivial_threshold_gives_probability_one() {
        let spec = DisorderSpec::standard_gaussian();
        let renewal = RenewalLaw::new(0.8).unwrap();
        let exp =
            estimate_stretch_set(&spec, &renewal, 0.5, 0.0, 0.2, 16, -1e9, 400, 11, 2).unwrap();
        assert_eq!(exp.p_delta_hat, 1.0);
        // Weights average to 1 within Monte Carlo error.
        assert!((exp.p_hat - 1.0).abs() < 4.0 * exp.p_hat_se, "{}", exp.p_hat);
    }

    #[test]
    fn zero_tilt_weights_are_unity() {
        let spec = DisorderSpec::rademacher();
        let renewal = RenewalLaw::new(0.8).unwrap();
        let exp = estimate_stretch_set(&spec, &renewal, 0.5, 0.1, 0.0, 12, -0.5, 500, 3, 2).unwrap();
        // With δ = 0 the weights are exactly the indicator average.
        assert_eq!(exp.p_hat, exp.p_delta_hat);
        assert!(exp.p_hat > 0.0 && exp.p_hat <= 1.0);
    }

    #[test]
    fn beta_zero_indicator_is_deterministic() {
        let spec = DisorderSpec::standard_gaussian();
        let renewal = RenewalLaw::new(0.8).unwrap();
        // Z_ℓ does not depend on ω at β = 0, so P̂_δ ∈ {0, 1}.
        let exp = estimate_stretch_set(&spec, &renewal, 0.0, 0.3, 0.1, 16, -1.0, 200, 5, 1).unwrap();
        assert_eq!(exp.p_delta_hat, 1.0);
        let res = estimate_stretch_set(&spec, &renewal, 0.0, 0.3, 0.1, 16, 1.0, 200, 5, 1);
        assert!(matches!(res, Err(Error::DegenerateEstimate(_))));
    }

    #[test]
    fn importance_sampling_matches_enumeration() {
        // Rademacher disorder, ℓ = 10: exact P(A_ℓ) by enumerating 2^10
        // blocks directly.
        let spec = DisorderSpec::rademacher();
        let renewal = RenewalLaw::new(0.8).unwrap();
        let (beta, h, delta, ell) = (0.5, 0.0, 0.2, 10usize);
        // Enumerate all block rates, then aim at the upper quartile so the
        // event is rare but not degenerate.
        let mut rates: Vec<f64> = (0u32..(1 << ell))
            .map(|mask| {
                let omega: Vec<f64> = (0..ell)
                    .map(|i| if mask >> i & 1 == 1 { 1.0 } else { -1.0 })
                    .collect();
                quenched_log_z(&renewal, &omega, beta, h).unwrap() / ell as f64
            })
            .collect();
        let mut sorted = rates.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let g_target = sorted[(sorted.len() * 3) / 4];
        let exact =
            rates.iter().filter(|&&r| r >= g_target).count() as f64 / rates.len() as f64;
        rates.clear();
        assert!(exact > 0.05 && exact < 0.95, "uninformative target: {exact}");
        let exp = estimate_stretch_set(
            &spec, &renewal, beta, h, delta, ell, g_target, 20_000, 99, 4,
        )
        .unwrap();
        assert!(
            (exp.p_hat - exact).abs() <= 4.0 * exp.p_hat_se,
            "IS {} ± {} vs exact {exact}",
            exp.p_hat,
            exp.p_hat_se
        );
    }

    #[test]
    fn cost_consistency_on_enumerated_sets() {
        // -(1/ℓ) log P(A_ℓ) ≤ entropy cost + ε_ℓ when the gain target sits
        // below the tilted finite-ℓ mean.
        let spec = DisorderSpec::rademacher();
        let renewal = RenewalLaw::new(0.8).unwrap();
        let (beta, h, delta) = (0.5, 0.0, 0.25);
        let cost = relative_entropy_rate(&spec, delta).unwrap();
        let mut eps_prev = f64::INFINITY;
        for ell in [8usize, 12] {
            // Tilted mean of (1/ℓ) log Z_ℓ by enumeration.
            let tilted = spec.tilt(delta).unwrap();
            let atoms = tilted.atoms().unwrap();
            let mut mean = 0.0;
            let mut prob_good = 0.0;
            let mut p_exact = 0.0;
            let g_target;
            {
                let mut rates = Vec::new();
                let mut probs = Vec::new();
                for mask in 0u32..(1 << ell) {
                    let omega: Vec<f64> = (0..ell)
                        .map(|i| if mask >> i & 1 == 1 { atoms[0].0 } else { atoms[1].0 })
                        .collect();
                    let p: f64 = (0..ell)
                        .map(|i| if mask >> i & 1 == 1 { atoms[0].1 } else { atoms[1].1 })
                        .product();
                    let rate = quenched_log_z(&renewal, &omega, beta, h).unwrap() / ell as f64;
                    mean += p * rate;
                    rates.push(rate);
                    probs.push(p);
                }
                g_target = mean - 0.05;
                for (rate, p) in rates.iter().zip(&probs) {
                    if *rate >= g_target {
                        prob_good += p;
                        // untilted probability of the same block
                        p_exact += p; // placeholder, replaced below
                    }
                }
                let _ = prob_good;
                // Recompute untilted probability directly.
                p_exact = 0.0;
                for mask in 0u32..(1 << ell) {
                    let omega: Vec<f64> = (0..ell)
                        .map(|i| if mask >> i & 1 == 1 { atoms[0].0 } else { atoms[1].0 })
                        .collect();
                    let rate = quenched_log_z(&renewal, &omega, beta, h).unwrap() / ell as f64;
                    if rate >= g_target {
                        p_exact += 0.5f64.powi(ell as i32);
                    }
                }
            }
            let eps = -(p_exact.ln()) / ell as f64 - cost;
            assert!(eps > -1e-12, "ell {ell}: {eps}");
            assert!(eps < eps_prev, "ell {ell}: {eps} !< {eps_prev}");
            eps_prev = eps;
        }
    }

    #[test]
    fn tilted_probability_tends_to_one() {
        let spec = DisorderSpec::standard_gaussian();
        let renewal = RenewalLaw::new(0.8).unwrap();
        let (beta, h, delta) = (0.5, 0.1, 0.3);
        // Fixed gain target 2ε below the shortest-stretch mean: finite-ℓ
        // rates are biased downward, so anchoring at ℓ = 16 keeps the target
        // reachable by every stretch length in the ladder.
        let est = free_energy_mc(&spec, &renewal, beta, h, delta, 16, 64, 5, 2).unwrap();
        let eps = 0.05 * est.value.abs() + 2.0 * est.std_error;
        let g_target = est.value - 2.0 * eps;
        let mut prev = 0.0;
        for ell in [16usize, 32, 64, 128] {
            let exp = estimate_stretch_set(
                &spec, &renewal, beta, h, delta, ell, g_target, 2000, 77, 4,
            )
            .unwrap();
            assert!(
                exp.p_delta_hat >= prev - 0.05,
                "ell {ell}: {} after {prev}",
                exp.p_delta_hat
            );
            prev = exp.p_delta_hat;
        }
        assert!(prev > 0.9, "P_delta = {prev}");
    }

    #[test]
    fn composite_rate_supports_positive_bound() {
        let spec = DisorderSpec::standard_gaussian();
        let renewal = RenewalLaw::new(0.8).unwrap();
        // Supercritical point: bound and direct rate must both be positive.
        let (beta, h) = (0.5, 0.8);
        let (rate, good, total) =
            composite_stretch_rate(&spec, &renewal, beta, h, 32, 0.2, 16, 13).unwrap();
        assert!(good > 0);
        assert!(total <= 1 << 12);
        assert!(rate > 0.0, "composite rate {rate}");
    }

    #[test]
    fn experiment_is_deterministic() {
        let spec = DisorderSpec::standard_gaussian();
        let renewal = RenewalLaw::new(0.8).unwrap();
        let a = estimate_stretch_set(&spec, &renewal, 0.5, 0.1, 0.2, 16, -0.3, 500, 21, 1).unwrap();
        let b = estimate_stretch_set(&spec, &renewal, 0.5, 0.1, 0.2, 16, -0.3, 500, 21, 4).unwrap();
        assert_eq!(a.p_hat.to_bits(), b.p_hat.to_bits());
        assert_eq!(a.p_hat_se.to_bits(), b.p_hat_se.to_bits());
    }
}
