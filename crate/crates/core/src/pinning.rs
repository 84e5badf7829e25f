//! Renewal pinning model: quenched partition functions, Monte Carlo free
//! energy under tilted disorder, the homogeneous solver and critical-point
//! location.
//!
//! The inter-arrival law is the pure power law `K(n) = c_α n^{-(1+α)}` with
//! `c_α = 1/ζ(1+α)`, so the renewal is recurrent, `h_c(0) = 0`, and the
//! single-jump bound `Z_N ≥ K(N) e^{h + β ω_N}` holds with polynomial cost
//! exponent `γ = 1 + α` exactly. A transient variant rescales the mass by
//! `1 - defect`, shifting the homogeneous critical point to `-log(1-defect)`.

use crate::disorder::DisorderSpec;
use crate::error::{Error, Result};
use crate::numeric::{bisect_decreasing, integrate_tail, zeta};
use crate::seeds::{replica_seed, run_indexed};
use serde::{Deserialize, Serialize};
use std::sync::RwLock;

/// Power-law renewal inter-arrival distribution.
#[derive(Debug)]
pub struct RenewalLaw {
    alpha: f64,
    defect: f64,
    prefactor: f64,
    /// Cached `n^{-(1+α)}` values for the homogeneous series.
    powers: RwLock<Vec<f64>>,
}

impl Clone for RenewalLaw {
    fn clone(&self) -> Self {
        RenewalLaw {
            alpha: self.alpha,
            defect: self.defect,
            prefactor: self.prefactor,
            powers: RwLock::new(Vec::new()),
        }
    }
}

impl PartialEq for RenewalLaw {
    fn eq(&self, other: &Self) -> bool {
        self.alpha == other.alpha && self.defect == other.defect
    }
}

impl RenewalLaw {
    /// Recurrent power-law renewal with tail exponent `alpha`.
    pub fn new(alpha: f64) -> Result<Self> {
        Self::with_defect(alpha, 0.0)
    }

    /// Renewal with escape mass `defect = P(τ = ∞)`.
    pub fn with_defect(alpha: f64, defect: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidSpec(format!("alpha = {alpha} must be > 0")));
        }
        if !(0.0..1.0).contains(&defect) {
            return Err(Error::InvalidSpec(format!("defect = {defect} not in [0,1)")));
        }
        let prefactor = (1.0 - defect) / zeta(1.0 + alpha);
        Ok(RenewalLaw {
            alpha,
            defect,
            prefactor,
            powers: RwLock::new(Vec::new()),
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn defect(&self) -> f64 {
        self.defect
    }

    /// Polynomial cost exponent of the single-jump bound: `γ = 1 + α`.
    pub fn gamma(&self) -> f64 {
        1.0 + self.alpha
    }

    /// Constant `K(n) n^{1+α}`, i.e. `c_α (1 - defect)`.
    pub fn prefactor(&self) -> f64 {
        self.prefactor
    }

    /// Inter-arrival mass `K(n)`.
    pub fn k(&self, n: usize) -> f64 {
        assert!(n >= 1);
        self.prefactor * (n as f64).powf(-(1.0 + self.alpha))
    }

    fn ensure_powers(&self, len: usize) {
        {
            let r = self.powers.read().expect("powers lock");
            if r.len() >= len {
                return;
            }
        }
        let mut w = self.powers.write().expect("powers lock");
        let s = 1.0 + self.alpha;
        let start = w.len();
        w.reserve(len - start);
        for n in start..len {
            w.push(((n + 1) as f64).powf(-s));
        }
    }

    /// `Φ(f) = Σ_{n≥1} K(n) e^{-f n}`, to absolute accuracy well below 1e-15.
    ///
    /// Head terms are summed directly; the remainder uses the integral of
    /// `x^{-s} e^{-f x}` plus Euler-Maclaurin corrections.
    pub fn laplace_transform(&self, f: f64) -> f64 {
        assert!(f >= 0.0);
        if f == 0.0 {
            return 1.0 - self.defect;
        }
        let s = 1.0 + self.alpha;
        let n0 = ((3.0 / f).ceil() as usize).clamp(1000, 2_000_000);
        self.ensure_powers(n0);
        let powers = self.powers.read().expect("powers lock");
        let decay = (-f).exp();
        let mut pw = 1.0f64;
        let mut head = 0.0f64;
        let mut n_stop = n0;
        for n in 1..=n0 {
            pw *= decay;
            let term = powers[n - 1] * pw;
            head += term;
            if term < 1e-18 * head && f * n as f64 > 45.0 {
                n_stop = n;
                break;
            }
        }
        let x = n_stop as f64;
        let a = |y: f64| y.powf(-s) * (-f * y).exp();
        let tail = if f * x > 45.0 {
            0.0
        } else {
            let integral = integrate_tail(&a, x, 1.0, (0.5 / f).clamp(1.0, 1e6))
                .expect("positive decaying integrand");
            let ax = a(x);
            let u = f + s / x;
            let da = -u * ax;
            let d3a = -(u * u * u + 3.0 * u * s / (x * x) + 2.0 * s / (x * x * x)) * ax;
            integral - 0.5 * ax - da / 12.0 + d3a / 720.0
        };
        self.prefactor * (head + tail)
    }
}

impl Serialize for RenewalLaw {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Raw {
            alpha: f64,
            #[serde(skip_serializing_if = "is_zero")]
            defect: f64,
        }
        fn is_zero(x: &f64) -> bool {
            *x == 0.0
        }
        Raw {
            alpha: self.alpha,
            defect: self.defect,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for RenewalLaw {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            alpha: f64,
            #[serde(default)]
            defect: f64,
        }
        let raw = Raw::deserialize(d)?;
        RenewalLaw::with_defect(raw.alpha, raw.defect).map_err(serde::de::Error::custom)
    }
}

/// `log Z_N` for the quenched pinning partition function.
///
/// `Z_0 = 1`, `Z_i = Σ_{j<i} Z_j K(i-j) e^{h + β ω_i}`; the running array is
/// rescaled by its maximum whenever it threatens the floating-point range,
/// with the accumulated log offset tracked separately.
pub fn quenched_log_z(renewal: &RenewalLaw, omega: &[f64], beta: f64, h: f64) -> Result<f64> {
    let n = omega.len();
    let logs = quenched_log_z_prefix(renewal, omega, beta, h, &[n])?;
    Ok(logs[0])
}

/// `log Z_i` at each requested checkpoint (ascending, `1 ≤ i ≤ N`).
pub fn quenched_log_z_prefix(
    renewal: &RenewalLaw,
    omega: &[f64],
    beta: f64,
    h: f64,
    checkpoints: &[usize],
) -> Result<Vec<f64>> {
    let n = omega.len();
    if n == 0 {
        return Err(Error::EmptyDisorder);
    }
    for &c in checkpoints {
        if c == 0 || c > n {
            return Err(Error::ParameterOutOfRange(format!(
                "checkpoint {c} outside 1..={n}"
            )));
        }
    }
    let k: Vec<f64> = (1..=n).map(|j| renewal.k(j)).collect();
    let mut vals = vec![0.0f64; n + 1];
    vals[0] = 1.0;
    let mut offset = 0.0f64;
    let mut max_val = 1.0f64;
    let mut out = vec![0.0f64; checkpoints.len()];
    for i in 1..=n {
        let mut s = 0.0f64;
        for j in 0..i {
            s += vals[j] * k[i - j - 1];
        }
        let v = s * (h + beta * omega[i - 1]).exp();
        vals[i] = v;
        if v > max_val {
            max_val = v;
        }
        if max_val > 1e100 {
            let ln_m = max_val.ln();
            for val in vals[..=i].iter_mut() {
                *val /= max_val;
            }
            offset += ln_m;
            max_val = 1.0;
        }
        for (slot, &c) in out.iter_mut().zip(checkpoints) {
            if c == i {
                *slot = vals[i].ln() + offset;
            }
        }
    }
    Ok(out)
}

/// Super-additivity slack `log Z_{N+M} - log Z_N - log Z_M(θ^N ω)`;
/// nonnegative (up to rounding) for every valid input.
pub fn superadditive_slack(
    renewal: &RenewalLaw,
    omega: &[f64],
    n: usize,
    m: usize,
    beta: f64,
    h: f64,
) -> Result<f64> {
    if n == 0 || m == 0 || omega.len() < n + m {
        return Err(Error::ParameterOutOfRange(format!(
            "need N, M >= 1 and {} disorder values, got {}",
            n + m,
            omega.len()
        )));
    }
    let whole = quenched_log_z(renewal, &omega[..n + m], beta, h)?;
    let left = quenched_log_z(renewal, &omega[..n], beta, h)?;
    let right = quenched_log_z(renewal, &omega[n..n + m], beta, h)?;
    Ok(whole - left - right)
}

/// Finite-`N` quenched free-energy estimate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FreeEnergyEstimate {
    /// Mean of `(1/N) log Z_N` across disorder replicas.
    pub value: f64,
    /// Standard error across replicas.
    pub std_error: f64,
    /// Finite-size proxy `|f_N - f_{N/2}|` on the same replica prefixes.
    pub systematic: f64,
    pub n: usize,
    pub replicas: usize,
    pub seed: u64,
}

/// Per-replica raw data, for optional CSV streaming.
#[derive(Debug, Clone, Serialize)]
pub struct ReplicaRow {
    pub replica_index: usize,
    pub seed: u64,
    pub log_z_n: f64,
    pub log_z_half_n: f64,
}

/// Monte Carlo estimate of `f_N(β, h; δ)` with `replicas` independent
/// disorder blocks drawn from the tilted law.
///
/// `n` must be a power of two (`f_{N/2}` is computed on the same prefixes).
/// Replica seeds derive from the master seed; the reduction is in replica
/// order, so results do not depend on the worker count.
pub fn free_energy_mc(
    spec: &DisorderSpec,
    renewal: &RenewalLaw,
    beta: f64,
    h: f64,
    delta: f64,
    n: usize,
    replicas: usize,
    seed: u64,
    workers: usize,
) -> Result<FreeEnergyEstimate> {
    let (est, _) = free_energy_mc_detailed(spec, renewal, beta, h, delta, n, replicas, seed, workers)?;
    Ok(est)
}

/// As [`free_energy_mc`], also returning per-replica rows.
#[allow(clippy::too_many_arguments)]
pub fn free_energy_mc_detailed(
    spec: &DisorderSpec,
    renewal: &RenewalLaw,
    beta: f64,
    h: f64,
    delta: f64,
    n: usize,
    replicas: usize,
    seed: u64,
    workers: usize,
) -> Result<(FreeEnergyEstimate, Vec<ReplicaRow>)> {
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::ParameterOutOfRange(format!(
            "n = {n} must be a power of two >= 2"
        )));
    }
    if replicas < 2 {
        return Err(Error::ParameterOutOfRange(format!(
            "replicas = {replicas} must be >= 2"
        )));
    }
    if beta < 0.0 {
        return Err(Error::ParameterOutOfRange(format!("beta = {beta} < 0")));
    }
    // Fail fast on an inadmissible tilt before spawning workers.
    spec.tilt(delta)?;
    let half = n / 2;
    let results: Vec<Result<ReplicaRow>> = run_indexed(workers, replicas, |i| {
        let rseed = replica_seed(seed, i as u64);
        let (omega, _) = spec.sample_block(delta, n, rseed)?;
        let logs = quenched_log_z_prefix(renewal, &omega, beta, h, &[half, n])?;
        Ok(ReplicaRow {
            replica_index: i,
            seed: rseed,
            log_z_n: logs[1],
            log_z_half_n: logs[0],
        })
    });
    let rows: Vec<ReplicaRow> = results.into_iter().collect::<Result<_>>()?;
    let rf = replicas as f64;
    let mean_n = rows.iter().map(|r| r.log_z_n / n as f64).sum::<f64>() / rf;
    let mean_half = rows.iter().map(|r| r.log_z_half_n / half as f64).sum::<f64>() / rf;
    let var = rows
        .iter()
        .map(|r| {
            let d = r.log_z_n / n as f64 - mean_n;
            d * d
        })
        .sum::<f64>()
        / (rf * (rf - 1.0));
    Ok((
        FreeEnergyEstimate {
            value: mean_n,
            std_error: var.sqrt(),
            systematic: (mean_n - mean_half).abs(),
            n,
            replicas,
            seed,
        },
        rows,
    ))
}

/// Homogeneous free energy: `0` when `e^h (1-defect) ≤ 1`, otherwise the
/// unique `f > 0` with `Σ K(n) e^{-f n} = e^{-h}`, by bisection to relative
/// tolerance `1e-12`.
pub fn homogeneous_free_energy(renewal: &RenewalLaw, h: f64) -> f64 {
    let mass = 1.0 - renewal.defect();
    if h.exp() * mass <= 1.0 {
        return 0.0;
    }
    let target = (-h).exp();
    let mut hi = 1.0f64;
    while renewal.laplace_transform(hi) > target {
        hi *= 2.0;
        if hi > 1e6 {
            break;
        }
    }
    bisect_decreasing(|f| renewal.laplace_transform(f) - target, 0.0, hi, 1e-12)
}

/// Critical shift `h_c(β; δ)` located by bisection on `h` with the predicate
/// "the estimate is significantly positive" (`value > 3 se + systematic`).
///
/// Every evaluation reuses the same master seed (common random numbers), so
/// the per-replica monotonicity of `h ↦ log Z_N` makes the predicate monotone
/// and the result deterministic.
#[allow(clippy::too_many_arguments)]
pub fn critical_point(
    spec: &DisorderSpec,
    renewal: &RenewalLaw,
    beta: f64,
    delta: f64,
    n: usize,
    replicas: usize,
    seed: u64,
    workers: usize,
    tol: f64,
) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::ParameterOutOfRange(format!("tol = {tol} must be > 0")));
    }
    let positive = |h: f64| -> Result<bool> {
        let est = free_energy_mc(spec, renewal, beta, h, delta, n, replicas, seed, workers)?;
        Ok(est.value > 3.0 * est.std_error + est.systematic)
    };
    let limit = 10.0;
    let mut lo = -0.5f64;
    let mut hi = 0.5f64;
    while positive(lo)? {
        hi = lo;
        lo *= 2.0;
        if lo < -limit {
            return Err(Error::BracketNotFound { limit });
        }
    }
    while !positive(hi)? {
        lo = hi.max(lo);
        hi *= 2.0;
        if hi > limit {
            return Err(Error::BracketNotFound { limit });
        }
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if positive(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn renewal(alpha: f64) -> RenewalLaw {
        RenewalLaw::new(alpha).unwrap()
    }

    #[test]
    fn mass_is_normalized() {
        for alpha in [0.5f64, 0.8, 1.5, 2.0] {
            let r = renewal(alpha);
            assert_eq!(r.laplace_transform(0.0), 1.0);
            // Small-f continuity: 1 - Φ(f) vanishes like f^{min(α,1)}.
            let f = 1e-9f64;
            let dev = (r.laplace_transform(f) - 1.0).abs();
            assert!(
                dev < 10.0 * f.powf(alpha.min(1.0)).max(f * f.ln().abs()),
                "alpha={alpha}: deviation {dev}"
            );
        }
    }

    #[test]
    fn k_is_pure_power_law() {
        let r = renewal(1.5);
        let c = r.k(1);
        for n in [2usize, 5, 17, 1000] {
            let ratio = r.k(n) * (n as f64).powf(2.5);
            assert!((ratio - c).abs() < 1e-15 * c);
        }
    }

    #[test]
    fn laplace_transform_matches_direct_sum() {
        let r = renewal(0.75);
        for f in [0.5, 0.05, 0.004] {
            let mut direct = 0.0;
            let mut n = 1usize;
            loop {
                let t = r.k(n) * (-f * n as f64).exp();
                direct += t;
                if t < 1e-19 * direct && f * n as f64 > 42.0 {
                    break;
                }
                n += 1;
                assert!(n < 60_000_000);
            }
            let fast = r.laplace_transform(f);
            assert!(
                (fast - direct).abs() < 1e-13 * direct,
                "f={f}: {fast} vs {direct}"
            );
        }
    }

    #[test]
    fn single_renewal_step() {
        let r = renewal(1.5);
        let lz = quenched_log_z(&r, &[0.7], 0.4, -0.2).unwrap();
        let expect = r.k(1).ln() + (-0.2 + 0.4 * 0.7);
        assert!((lz - expect).abs() < 1e-13);
    }

    #[test]
    fn two_step_enumeration() {
        let r = renewal(1.5);
        let (b, h) = (0.3, 0.1);
        let om = [0.4, -0.9];
        let lz = quenched_log_z(&r, &om, b, h).unwrap();
        let z = r.k(2) * (h + b * om[1]).exp()
            + r.k(1) * r.k(1) * (2.0 * h + b * (om[0] + om[1])).exp();
        assert!((lz - z.ln()).abs() < 1e-13);
    }

    #[test]
    fn composition_enumeration_alpha_15() {
        // All renewal paths hitting 4: mpmath gives log P = -0.44563798919701641.
        let r = renewal(1.5);
        let lz = quenched_log_z(&r, &[0.0; 4], 0.0, 0.0).unwrap();
        assert!((lz - (-0.44563798919701640945)).abs() < 1e-13, "{lz}");
    }

    #[test]
    fn rescaling_handles_extreme_weights() {
        let r = renewal(0.8);
        let omega = vec![1.0; 512];
        // h + β ω = 50 per step: the naive recursion overflows near step 15.
        let lz = quenched_log_z(&r, &omega, 10.0, 40.0).unwrap();
        assert!(lz.is_finite());
        // Growth rate must sit between the pinned-path value and the maximum.
        assert!(lz > 512.0 * 49.0 && lz < 512.0 * 51.0, "{lz}");
        // Deeply negative rewards underflow instead without rescaling.
        let lz = quenched_log_z(&r, &omega, 10.0, -60.0).unwrap();
        assert!(lz.is_finite() && lz < 0.0);
        // Here the single-jump path carries the whole mass, so the lower
        // bound is attained up to rounding.
        let bound = r.k(512).ln() + (-60.0 + 10.0);
        assert!(lz >= bound - 1e-9, "{lz} vs {bound}");
        assert!((lz - bound).abs() < 1e-6, "{lz} vs {bound}");
    }

    #[test]
    fn prefix_checkpoints_match_direct_calls() {
        let r = renewal(0.8);
        let spec = DisorderSpec::standard_gaussian();
        let (omega, _) = spec.sample_block(0.0, 64, 5).unwrap();
        let both = quenched_log_z_prefix(&r, &omega, 0.7, 0.2, &[32, 64]).unwrap();
        let half = quenched_log_z(&r, &omega[..32], 0.7, 0.2).unwrap();
        let full = quenched_log_z(&r, &omega, 0.7, 0.2).unwrap();
        assert!((both[0] - half).abs() < 1e-12);
        assert!((both[1] - full).abs() < 1e-12);
    }

    #[test]
    fn superadditivity_small_cases() {
        let r = renewal(1.5);
        // N = M = 1 reduces to a single positive slack term.
        let om = [0.3, -0.2];
        let slack = superadditive_slack(&r, &om, 1, 1, 0.5, 0.1).unwrap();
        assert!(slack >= -1e-9);
        // Homogeneous case with explicit slack: paths of Z_16 not renewing at 8.
        let om = [0.0; 16];
        let slack = superadditive_slack(&r, &om, 8, 8, 0.0, 0.0).unwrap();
        assert!(slack > 0.0);
    }

    #[test]
    fn free_energy_mc_is_deterministic_across_workers() {
        let spec = DisorderSpec::standard_gaussian();
        let r = renewal(0.8);
        let a = free_energy_mc(&spec, &r, 0.5, 0.0, 0.1, 128, 8, 42, 1).unwrap();
        let b = free_energy_mc(&spec, &r, 0.5, 0.0, 0.1, 128, 8, 42, 4).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
    }

    #[test]
    fn free_energy_mc_validates_input() {
        let spec = DisorderSpec::standard_gaussian();
        let r = renewal(0.8);
        assert!(free_energy_mc(&spec, &r, 0.5, 0.0, 0.0, 100, 8, 1, 1).is_err());
        assert!(free_energy_mc(&spec, &r, 0.5, 0.0, 0.0, 128, 1, 1, 1).is_err());
        let l = DisorderSpec::laplace();
        assert!(matches!(
            free_energy_mc(&l, &r, 0.5, 0.0, 2.0, 128, 4, 1, 1),
            Err(Error::TiltOutOfRange { .. })
        ));
    }

    #[test]
    fn beta_zero_matches_homogeneous_solver() {
        let spec = DisorderSpec::standard_gaussian();
        let r = renewal(1.5);
        let h = 0.1;
        let est = free_energy_mc(&spec, &r, 0.0, h, 0.0, 2048, 4, 9, 1).unwrap();
        let exact = homogeneous_free_energy(&r, h);
        // mpmath polylog solve: f = 0.061658095690155931.
        assert!((exact - 0.061658095690155931432).abs() < 1e-12, "{exact}");
        assert!(est.std_error < 1e-12); // disorder is a no-op at β = 0
        assert!(
            (est.value - exact).abs() <= 3.0 * (est.std_error + est.systematic),
            "{} vs {exact} (sys {})",
            est.value,
            est.systematic
        );
    }

    #[test]
    fn homogeneous_solver_values() {
        let r = renewal(0.75);
        assert_eq!(homogeneous_free_energy(&r, 0.0), 0.0);
        assert_eq!(homogeneous_free_energy(&r, -0.3), 0.0);
        // mpmath polylog solve at h = 0.01.
        let f = homogeneous_free_energy(&r, 0.01);
        assert!((f - 0.00076072393192762562326).abs() < 1e-14, "{f}");
        let r2 = renewal(2.0);
        let f = homogeneous_free_energy(&r2, 0.5);
        assert!((f - 0.4163145258999329127).abs() < 1e-12, "{f}");
    }

    #[test]
    fn homogeneous_defect_shifts_critical_point() {
        let r = RenewalLaw::with_defect(1.5, 0.25).unwrap();
        let hc = -(1.0f64 - 0.25).ln();
        assert_eq!(homogeneous_free_energy(&r, hc), 0.0);
        assert_eq!(homogeneous_free_energy(&r, hc - 1e-6), 0.0);
        assert!(homogeneous_free_energy(&r, hc + 1e-3) > 0.0);
    }

    #[test]
    fn homogeneous_slope_exponents() {
        // Log-log slope over h ∈ [1e-4, 1e-2]: 4/3 for α = 0.75, 1 for α = 2.
        use crate::numeric::ls_slope;
        for (alpha, target, tol) in [(0.75, 4.0 / 3.0, 0.07), (2.0, 1.0, 0.05)] {
            let r = renewal(alpha);
            let xs: Vec<f64> = (0..20)
                .map(|i| 10f64.powf(-4.0 + 2.0 * i as f64 / 19.0))
                .collect();
            let lx: Vec<f64> = xs.iter().map(|h| h.ln()).collect();
            let ly: Vec<f64> = xs
                .iter()
                .map(|&h| homogeneous_free_energy(&r, h).ln())
                .collect();
            let slope = ls_slope(&lx, &ly);
            assert!(
                (slope - target).abs() < tol * target,
                "alpha={alpha}: slope {slope}"
            );
        }
    }

    #[test]
    fn polynomial_lower_bound_holds() {
        let r = renewal(0.8);
        let spec = DisorderSpec::two_point(2.0).unwrap();
        for seed in 0..20 {
            let (omega, _) = spec.sample_block(0.1, 48, seed).unwrap();
            let lz = quenched_log_z(&r, &omega, 0.9, -0.4).unwrap();
            let bound = r.k(48).ln() + (-0.4 + 0.9 * omega[47]);
            assert!(lz >= bound - 1e-10, "seed {seed}: {lz} < {bound}");
        }
    }

    #[test]
    fn h_monotonicity_per_seed() {
        let spec = DisorderSpec::standard_gaussian();
        let r = renewal(0.8);
        let mut prev = f64::NEG_INFINITY;
        for i in 0..8 {
            let h = -1.0 + 0.3 * i as f64;
            let est = free_energy_mc(&spec, &r, 0.6, h, 0.2, 256, 6, 31, 2).unwrap();
            assert!(est.value >= prev, "h={h}");
            prev = est.value;
        }
    }

    #[test]
    fn critical_point_beta_zero() {
        let spec = DisorderSpec::standard_gaussian();
        let r = renewal(0.8);
        // N large enough that the finite-size onset sits inside tol.
        let hc = critical_point(&spec, &r, 0.0, 0.0, 4096, 4, 3, 4, 0.02).unwrap();
        assert!(hc.abs() < 0.02 + 1e-9, "hc = {hc}");
    }

    #[test]
    fn critical_point_is_seed_stable() {
        let spec = DisorderSpec::standard_gaussian();
        let r = renewal(0.8);
        let tol = 0.04;
        let a = critical_point(&spec, &r, 0.5, 0.0, 1024, 32, 7, 4, tol).unwrap();
        let b = critical_point(&spec, &r, 0.5, 0.0, 1024, 32, 1234, 4, tol).unwrap();
        assert!((a - b).abs() <= 2.0 * tol, "{a} vs {b}");
    }

    #[test]
    fn renewal_serde_round_trip() {
        let r = RenewalLaw::with_defect(0.8, 0.1).unwrap();
        let s = serde_json::to_string(&r).unwrap();
        let back: RenewalLaw = serde_json::from_str(&s).unwrap();
        assert_eq!(r, back);
    }
}
