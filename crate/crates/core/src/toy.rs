//! Exact oracles for i.i.d. product-spin models.
//!
//! The partition function is `Z_N = E_N[e^{Σ (h + β ω_n) σ_n}]` with
//! independent spins, so `log Z_N` factorizes over sites and the free energy
//! `f(β, h; δ) = E_δ[log Σ_σ p_σ e^{(h + β ω) σ}]` is a single disorder
//! expectation. Finite-`N` values are computed by exact enumeration over
//! disorder configurations with a dynamic program over spin-atom counts,
//! which also yields the restricted partition functions with the empirical
//! mean `σ̄_N` confined to a window.
//!
//! The signed counterexample (Rademacher spins, two-point disorder) lives
//! here too, in both conventions: the quenched average of `log cosh` and the
//! annealed-style average of `cosh` itself. Both share the asymptotic orders
//! `∂f/∂δ ~ β²` and `∂f/∂h ~ β³` that break the tilt/shift comparison for
//! asymmetric disorder.

use crate::disorder::DisorderSpec;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

const ENUMERATION_BUDGET: f64 = 1e7;
const WINDOW_EPS: f64 = 1e-12;

/// I.i.d. spin marginal given by finitely many atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductSpinSpec {
    atoms: Vec<(f64, f64)>,
    s0: f64,
    signed: bool,
}

impl ProductSpinSpec {
    /// Spin law from `(value, probability)` atoms.
    pub fn from_atoms(atoms: Vec<(f64, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidSpec("no spin atoms".into()));
        }
        let mut total = 0.0;
        for &(v, p) in &atoms {
            if !v.is_finite() || !(p > 0.0) {
                return Err(Error::InvalidSpec(format!("bad spin atom ({v}, {p})")));
            }
            total += p;
        }
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidSpec(format!(
                "spin masses sum to {total}, not 1"
            )));
        }
        let signed = atoms.iter().any(|&(v, _)| v < 0.0);
        let s0 = atoms.iter().map(|&(v, _)| v.abs()).fold(0.0, f64::max);
        if s0 == 0.0 {
            return Err(Error::InvalidSpec("all spin values are zero".into()));
        }
        Ok(ProductSpinSpec { atoms, s0, signed })
    }

    /// Bernoulli spins `{0, 1}`, each with probability 1/2.
    pub fn bernoulli() -> Self {
        ProductSpinSpec::from_atoms(vec![(0.0, 0.5), (1.0, 0.5)]).expect("valid")
    }

    /// Rademacher spins `{-1, +1}`, each with probability 1/2.
    pub fn rademacher() -> Self {
        ProductSpinSpec::from_atoms(vec![(-1.0, 0.5), (1.0, 0.5)]).expect("valid")
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    /// Uniform bound: all values lie in `[0, s0]` (unsigned) or `[-s0, s0]`.
    pub fn s0(&self) -> f64 {
        self.s0
    }

    pub fn signed(&self) -> bool {
        self.signed
    }

    /// The spin law translated by `c`.
    pub fn shifted(&self, c: f64) -> Result<Self> {
        ProductSpinSpec::from_atoms(self.atoms.iter().map(|&(v, p)| (v + c, p)).collect())
    }

    /// `log Σ_σ p_σ e^{u σ}`, stable for large `|u|`.
    fn log_site_partition(&self, u: f64) -> f64 {
        let m = self
            .atoms
            .iter()
            .map(|&(v, _)| u * v)
            .fold(f64::NEG_INFINITY, f64::max);
        let s: f64 = self.atoms.iter().map(|&(v, p)| p * (u * v - m).exp()).sum();
        m + s.ln()
    }

    /// Gibbs mean `Σ p σ e^{uσ} / Σ p e^{uσ}` at one site.
    fn site_gibbs_mean(&self, u: f64) -> f64 {
        let m = self
            .atoms
            .iter()
            .map(|&(v, _)| u * v)
            .fold(f64::NEG_INFINITY, f64::max);
        let mut num = 0.0;
        let mut den = 0.0;
        for &(v, p) in &self.atoms {
            let w = p * (u * v - m).exp();
            num += w * v;
            den += w;
        }
        num / den
    }
}

impl Serialize for ProductSpinSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Raw<'a> {
            atoms: &'a [(f64, f64)],
        }
        Raw { atoms: &self.atoms }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ProductSpinSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            atoms: Vec<(f64, f64)>,
        }
        let raw = Raw::deserialize(d)?;
        ProductSpinSpec::from_atoms(raw.atoms).map_err(serde::de::Error::custom)
    }
}

fn check_integrability(spec: &DisorderSpec, spin: &ProductSpinSpec, beta: f64, delta: f64) -> Result<()> {
    if beta < 0.0 {
        return Err(Error::ParameterOutOfRange(format!("beta = {beta} < 0")));
    }
    if beta * spin.s0() + delta.abs() >= spec.t0() {
        return Err(Error::ParameterOutOfRange(format!(
            "beta * max|sigma| + |delta| = {} >= t0 = {}",
            beta * spin.s0() + delta.abs(),
            spec.t0()
        )));
    }
    Ok(())
}

/// Exact free energy `E_δ[log Σ_σ p_σ e^{(h + β ω) σ}]`.
pub fn exact_free_energy(
    spec: &DisorderSpec,
    spin: &ProductSpinSpec,
    beta: f64,
    h: f64,
    delta: f64,
) -> Result<f64> {
    check_integrability(spec, spin, beta, delta)?;
    spec.expectation(delta, |x| spin.log_site_partition(h + beta * x))
}

/// `E_δ[E-Gibbs[σ̄_N]]` — the exact `∂f/∂h` for the product model.
pub fn gibbs_mean_spin(
    spec: &DisorderSpec,
    spin: &ProductSpinSpec,
    beta: f64,
    h: f64,
    delta: f64,
) -> Result<f64> {
    check_integrability(spec, spin, beta, delta)?;
    spec.expectation(delta, |x| spin.site_gibbs_mean(h + beta * x))
}

/// Iterates over all disorder configurations of length `n`, with their
/// tilted probabilities, calling `visit(values, probability)`.
fn for_each_disorder_config<F: FnMut(&[f64], f64)>(
    atoms: &[(f64, f64)],
    n: usize,
    mut visit: F,
) {
    let d = atoms.len();
    let mut idx = vec![0usize; n];
    let mut values = vec![atoms[0].0; n];
    loop {
        let mut prob = 1.0;
        for (i, &j) in idx.iter().enumerate() {
            values[i] = atoms[j].0;
            prob *= atoms[j].1;
        }
        visit(&values, prob);
        // odometer increment
        let mut pos = 0;
        loop {
            if pos == n {
                return;
            }
            idx[pos] += 1;
            if idx[pos] < d {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
    }
}

/// Count-resolved partition values for one disorder configuration:
/// entry `k` of the result holds `(Σ σ at count-vector k, Z contribution)`,
/// where count-vectors enumerate how many sites took each spin atom.
/// Returns the shared log offset factored out for stability.
fn count_partition(spin: &ProductSpinSpec, us: &[f64]) -> (Vec<(f64, f64)>, f64) {
    let m = spin.atoms.len();
    let n = us.len();
    // Mixed-radix encoding of the first m-1 counts; the last is implied.
    let radix = n + 1;
    let states = radix.pow((m - 1) as u32);
    let mut dp = vec![0.0f64; states];
    let mut next = vec![0.0f64; states];
    dp[0] = 1.0;
    let mut offset = 0.0f64;
    for (site, &u) in us.iter().enumerate() {
        let mu = spin
            .atoms
            .iter()
            .map(|&(v, _)| u * v)
            .fold(f64::NEG_INFINITY, f64::max);
        offset += mu;
        next.iter_mut().for_each(|x| *x = 0.0);
        // Enumerate reachable states: counts with total = site.
        for (code, &w) in dp.iter().enumerate() {
            if w == 0.0 {
                continue;
            }
            for (j, &(v, p)) in spin.atoms.iter().enumerate() {
                let factor = p * (u * v - mu).exp();
                let ncode = if j + 1 < m {
                    code + radix.pow(j as u32)
                } else {
                    code
                };
                next[ncode] += w * factor;
            }
        }
        std::mem::swap(&mut dp, &mut next);
        let _ = site;
    }
    let mut out = Vec::new();
    for (code, &w) in dp.iter().enumerate() {
        if w == 0.0 {
            continue;
        }
        let mut rest = code;
        let mut total_count = 0usize;
        let mut sum = 0.0f64;
        for j in 0..m - 1 {
            let k = rest % radix;
            rest /= radix;
            total_count += k;
            sum += k as f64 * spin.atoms[j].0;
        }
        if total_count > n {
            continue;
        }
        sum += (n - total_count) as f64 * spin.atoms[m - 1].0;
        out.push((sum, w));
    }
    (out, offset)
}

fn enumeration_guard(spec: &DisorderSpec, spin: &ProductSpinSpec, n: usize, cap: usize) -> Result<Vec<(f64, f64)>> {
    if n == 0 || n > cap {
        return Err(Error::EnumerationTooLarge(format!(
            "N = {n} outside 1..={cap}"
        )));
    }
    let atoms = spec.atoms().ok_or_else(|| {
        Error::EnumerationTooLarge("exact enumeration needs a discrete disorder law".into())
    })?;
    let d = atoms.len() as f64;
    let spin_states = ((n + 1) as f64).powi(spin.atoms.len() as i32 - 1);
    if d.powi(n as i32) * spin_states > ENUMERATION_BUDGET {
        return Err(Error::EnumerationTooLarge(format!(
            "{}^{n} disorder configs x {spin_states} spin states exceed the budget",
            atoms.len()
        )));
    }
    Ok(atoms)
}

/// Exact `(1/N) E_δ[log Z_N]` by full enumeration (discrete disorder only).
///
/// For i.i.d. spins this equals [`exact_free_energy`] for every `N`.
pub fn exact_free_energy_finite_n(
    spec: &DisorderSpec,
    spin: &ProductSpinSpec,
    beta: f64,
    h: f64,
    delta: f64,
    n: usize,
) -> Result<f64> {
    restricted_free_energy_finite_n(spec, spin, beta, h, delta, f64::NEG_INFINITY, f64::INFINITY, n)
}

/// Exact `(1/N) E_δ[log Z_N^{[a,b]}]` with `σ̄_N` restricted to `[a, b]`.
///
/// Returns `-∞` when no spin configuration satisfies the constraint.
#[allow(clippy::too_many_arguments)]
pub fn restricted_free_energy_finite_n(
    spec: &DisorderSpec,
    spin: &ProductSpinSpec,
    beta: f64,
    h: f64,
    delta: f64,
    a: f64,
    b: f64,
    n: usize,
) -> Result<f64> {
    if !(a < b) {
        return Err(Error::ParameterOutOfRange(format!("need a < b, got [{a}, {b}]")));
    }
    check_integrability(spec, spin, beta, delta)?;
    let atoms = enumeration_guard(spec, spin, n, 14)?;
    let tilted = spec.tilt(delta)?;
    let tilted_atoms = tilted.atoms().expect("discrete");
    // The admissible count set does not depend on the disorder.
    {
        let us = vec![0.0; n];
        let (parts, _) = count_partition(spin, &us);
        let nf = n as f64;
        if !parts
            .iter()
            .any(|&(s, _)| s / nf >= a - WINDOW_EPS && s / nf <= b + WINDOW_EPS)
        {
            return Ok(f64::NEG_INFINITY);
        }
    }
    let nf = n as f64;
    let mut acc = 0.0f64;
    let mut us = vec![0.0f64; n];
    for_each_disorder_config(&tilted_atoms, n, |omega, prob| {
        for (u, &x) in us.iter_mut().zip(omega) {
            *u = h + beta * x;
        }
        let (parts, offset) = count_partition(spin, &us);
        let z: f64 = parts
            .iter()
            .filter(|&&(s, _)| s / nf >= a - WINDOW_EPS && s / nf <= b + WINDOW_EPS)
            .map(|&(_, w)| w)
            .sum();
        acc += prob * (z.ln() + offset);
        let _ = atoms.len();
    });
    Ok(acc / nf)
}

/// Gap between the exact finite-`N` free energy and its best window
/// restriction: windows `[x - s0/grid - 1/N, x + s0/grid + 1/N]` around grid
/// points `x = j s0/grid`, mirroring the inflated intervals of the interval-
/// bisection argument behind the sup decomposition.
pub fn sup_decomposition_residual(
    spec: &DisorderSpec,
    spin: &ProductSpinSpec,
    beta: f64,
    h: f64,
    delta: f64,
    n: usize,
    grid: usize,
) -> Result<f64> {
    if grid == 0 {
        return Err(Error::ParameterOutOfRange("grid must be >= 1".into()));
    }
    let exact = exact_free_energy_finite_n(spec, spin, beta, h, delta, n)?;
    Ok(exact - sup_over_windows(spec, spin, beta, h, delta, n, grid)?.max(f64::NEG_INFINITY))
}

/// Maximum of the restricted free energy over the window grid.
pub fn sup_over_windows(
    spec: &DisorderSpec,
    spin: &ProductSpinSpec,
    beta: f64,
    h: f64,
    delta: f64,
    n: usize,
    grid: usize,
) -> Result<f64> {
    let s0 = spin.s0();
    let half = s0 / grid as f64 + 1.0 / n as f64;
    let mut best = f64::NEG_INFINITY;
    for j in 0..=grid {
        let x = j as f64 * s0 / grid as f64;
        let v = restricted_free_energy_finite_n(spec, spin, beta, h, delta, x - half, x + half, n)?;
        if v > best {
            best = v;
        }
    }
    Ok(best)
}

/// Restricted value of the window centered at `x = 0` (the flat piece of the
/// decomposition, tending to `(1/N) log P_N(σ̄_N ≈ 0)`).
pub fn zero_window_value(
    spec: &DisorderSpec,
    spin: &ProductSpinSpec,
    beta: f64,
    h: f64,
    delta: f64,
    n: usize,
    grid: usize,
) -> Result<f64> {
    let half = spin.s0() / grid as f64 + 1.0 / n as f64;
    restricted_free_energy_finite_n(spec, spin, beta, h, delta, -half, half, n)
}

/// Centered finite differences (step `1e-6`) of the counterexample free
/// energy `E_δ[log cosh(h + β ω)]` in `h` and in `δ`, at `(β, 0, 0)`, for
/// two-point disorder with parameter `a` and Rademacher spins.
///
/// Returns `(∂f/∂h, ∂f/∂δ)`.
pub fn counterexample_derivatives(a: f64, beta: f64) -> Result<(f64, f64)> {
    let spec = DisorderSpec::two_point(a)?;
    let spin = ProductSpinSpec::rademacher();
    let eps = 1e-6;
    let f = |h: f64, d: f64| exact_free_energy(&spec, &spin, beta, h, d);
    let dh = (f(eps, 0.0)? - f(-eps, 0.0)?) / (2.0 * eps);
    let dd = (f(0.0, eps)? - f(0.0, -eps)?) / (2.0 * eps);
    Ok((dh, dd))
}

/// The no-log convention `E_δ[cosh(h + β ω)]` in closed form.
pub fn counterexample_f_nolog(a: f64, beta: f64, h: f64, delta: f64) -> f64 {
    let wp = (a * delta).exp();
    let wm = a * a * (-delta / a).exp();
    (wp * (h + a * beta).cosh() + wm * (h - beta / a).cosh()) / (wp + wm)
}

/// Centered finite differences of the no-log convention at `(β, 0, 0)`.
pub fn counterexample_derivatives_nolog(a: f64, beta: f64) -> (f64, f64) {
    let eps = 1e-6;
    let dh = (counterexample_f_nolog(a, beta, eps, 0.0) - counterexample_f_nolog(a, beta, -eps, 0.0))
        / (2.0 * eps);
    let dd = (counterexample_f_nolog(a, beta, 0.0, eps) - counterexample_f_nolog(a, beta, 0.0, -eps))
        / (2.0 * eps);
    (dh, dd)
}

/// Residual of the translation identity
/// `f_{σ+c}(β, h; δ) = f_σ(β, h; δ) + (β m_δ + h) c`.
pub fn translation_residual(
    spec: &DisorderSpec,
    spin: &ProductSpinSpec,
    beta: f64,
    h: f64,
    delta: f64,
    c: f64,
) -> Result<f64> {
    let shifted = spin.shifted(c)?;
    let lhs = exact_free_energy(spec, &shifted, beta, h, delta)?;
    let rhs = exact_free_energy(spec, spin, beta, h, delta)?
        + (beta * spec.tilted_mean(delta)? + h) * c;
    Ok((lhs - rhs).abs())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_point() -> DisorderSpec {
        DisorderSpec::two_point(2.0).unwrap()
    }

    #[test]
    fn exact_free_energy_trivia() {
        let spin = ProductSpinSpec::rademacher();
        let f = exact_free_energy(&two_point(), &spin, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(f, 0.0);
        // Bernoulli spins at β = 0: log((1 + e^h)/2); mpmath at h = 0.3.
        let b = ProductSpinSpec::bernoulli();
        let f = exact_free_energy(&two_point(), &b, 0.0, 0.3, 0.0).unwrap();
        assert!((f - 0.1612080639085818094).abs() < 1e-14);
        // Independent of the disorder law when β = 0.
        let f2 = exact_free_energy(&DisorderSpec::standard_gaussian(), &b, 0.0, 0.3, 0.2).unwrap();
        assert!((f - f2).abs() < 1e-12);
    }

    #[test]
    fn integrability_precondition() {
        let l = DisorderSpec::laplace(); // t0 = sqrt(2)
        let spin = ProductSpinSpec::rademacher();
        assert!(exact_free_energy(&l, &spin, 1.0, 0.0, 0.5).is_err());
        assert!(exact_free_energy(&l, &spin, 0.5, 0.0, 0.2).is_ok());
    }

    #[test]
    fn finite_n_matches_brute_force_n3() {
        // Full 2^3 x 2^3 enumeration written out independently.
        let spec = DisorderSpec::rademacher();
        let spin = ProductSpinSpec::bernoulli();
        let (beta, h, delta) = (0.4, -0.2, 0.15);
        let n = 3;
        let t = spec.tilt(delta).unwrap();
        let datoms = t.atoms().unwrap();
        let satoms = spin.atoms().to_vec();
        let mut expect = 0.0;
        for i0 in 0..2 {
            for i1 in 0..2 {
                for i2 in 0..2 {
                    let om = [datoms[i0].0, datoms[i1].0, datoms[i2].0];
                    let pw = datoms[i0].1 * datoms[i1].1 * datoms[i2].1;
                    let mut z = 0.0;
                    for s0 in 0..2 {
                        for s1 in 0..2 {
                            for s2 in 0..2 {
                                let sg = [satoms[s0].0, satoms[s1].0, satoms[s2].0];
                                let ps = satoms[s0].1 * satoms[s1].1 * satoms[s2].1;
                                let e: f64 = (0..3).map(|i| (h + beta * om[i]) * sg[i]).sum();
                                z += ps * e.exp();
                            }
                        }
                    }
                    expect += pw * z.ln();
                }
            }
        }
        expect /= n as f64;
        let got = exact_free_energy_finite_n(&spec, &spin, beta, h, delta, n).unwrap();
        assert!((got - expect).abs() < 1e-13, "{got} vs {expect}");
        // Factorization: equals the N-independent exact value.
        let f = exact_free_energy(&spec, &spin, beta, h, delta).unwrap();
        assert!((got - f).abs() < 1e-12);
    }

    #[test]
    fn finite_n_factorization_across_n() {
        let spec = two_point();
        let spin = ProductSpinSpec::bernoulli();
        let f = exact_free_energy(&spec, &spin, 0.3, 0.1, 0.05).unwrap();
        for n in [1usize, 2, 5, 9] {
            let fn_ = exact_free_energy_finite_n(&spec, &spin, 0.3, 0.1, 0.05, n).unwrap();
            assert!((fn_ - f).abs() < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn finite_n_guards() {
        let spin = ProductSpinSpec::bernoulli();
        let g = DisorderSpec::standard_gaussian();
        assert!(matches!(
            exact_free_energy_finite_n(&g, &spin, 0.1, 0.0, 0.0, 4),
            Err(Error::EnumerationTooLarge(_))
        ));
        let spec = two_point();
        assert!(matches!(
            exact_free_energy_finite_n(&spec, &spin, 0.1, 0.0, 0.0, 15),
            Err(Error::EnumerationTooLarge(_))
        ));
    }

    #[test]
    fn restricted_full_window_equals_exact() {
        let spec = two_point();
        let spin = ProductSpinSpec::bernoulli();
        let full =
            restricted_free_energy_finite_n(&spec, &spin, 0.2, 0.3, 0.1, -0.5, 1.5, 6).unwrap();
        let exact = exact_free_energy_finite_n(&spec, &spin, 0.2, 0.3, 0.1, 6).unwrap();
        assert!((full - exact).abs() < 1e-13);
    }

    #[test]
    fn restricted_empty_window_is_minus_infinity() {
        let spec = two_point();
        let spin = ProductSpinSpec::bernoulli();
        let v = restricted_free_energy_finite_n(&spec, &spin, 0.2, 0.3, 0.1, -0.9, -0.5, 6).unwrap();
        assert_eq!(v, f64::NEG_INFINITY);
    }

    #[test]
    fn restricted_nested_windows_are_monotone() {
        let spec = DisorderSpec::rademacher();
        let spin = ProductSpinSpec::bernoulli();
        let pairs = [((0.3, 0.6), (0.2, 0.8)), ((0.0, 0.4), (0.0, 0.9)), ((0.45, 0.55), (0.3, 0.7))];
        for ((a, b), (c, d)) in pairs {
            let inner =
                restricted_free_energy_finite_n(&spec, &spin, 0.2, 0.3, 0.1, a, b, 8).unwrap();
            let outer =
                restricted_free_energy_finite_n(&spec, &spin, 0.2, 0.3, 0.1, c, d, 8).unwrap();
            assert!(inner <= outer + 1e-12, "[{a},{b}] vs [{c},{d}]");
        }
    }

    #[test]
    fn counterexample_frozen_values() {
        // mpmath finite differences at a = 2.
        let (dh, dd) = counterexample_derivatives(2.0, 0.1).unwrap();
        assert!((dh - (-0.000491635921323)).abs() < 1e-9, "{dh}");
        assert!((dd - 0.00744743693055).abs() < 1e-9, "{dd}");
        // Symmetric disorder: both vanish.
        let (dh, dd) = counterexample_derivatives(1.0, 0.1).unwrap();
        assert!(dh.abs() < 1e-10 && dd.abs() < 1e-10);
    }

    #[test]
    fn counterexample_order_mismatch() {
        let mut prev_ratio = 0.0;
        for beta in [0.1, 0.05, 0.025] {
            let (dh, dd) = counterexample_derivatives(2.0, beta).unwrap();
            let ratio = (dd / (beta * dh)).abs();
            assert!(ratio > 3.0 * prev_ratio, "beta {beta}: {ratio}");
            prev_ratio = ratio;
            // δ-derivative carries the β² coefficient (a²-1)/(2a) = 0.75.
            assert!((dd / (beta * beta) - 0.75).abs() < 0.05 * 0.75, "beta {beta}");
        }
    }

    #[test]
    fn counterexample_inverse_parameter_mirrors() {
        // a ↦ 1/a mirrors ω ↦ -ω: leading coefficients flip sign.
        let (dh2, dd2) = counterexample_derivatives(2.0, 0.05).unwrap();
        let (dhh, ddh) = counterexample_derivatives(0.5, 0.05).unwrap();
        assert!((dh2 + dhh).abs() < 1e-9);
        assert!((dd2 + ddh).abs() < 1e-9);
    }

    #[test]
    fn nolog_matches_sinh_cosh_displays() {
        let (a, beta) = (2.0f64, 0.1f64);
        let (dh, dd) = counterexample_derivatives_nolog(a, beta);
        let dh_exact = ((a * beta).sinh() + a * a * (-beta / a).sinh()) / (1.0 + a * a);
        let dd_exact = (a * (a * beta).cosh() - a * (beta / a).cosh()) / (1.0 + a * a);
        assert!((dh - dh_exact).abs() < 1e-9, "{dh} vs {dh_exact}");
        assert!((dd - dd_exact).abs() < 1e-9, "{dd} vs {dd_exact}");
        // Shared asymptotic orders with the log convention.
        assert!((dd / (beta * beta) - 0.75).abs() < 0.01);
        assert!((dh / beta.powi(3) - (a * a - 1.0) / (6.0 * a)).abs() < 0.01);
    }

    #[test]
    fn translation_identity() {
        let spec = two_point();
        let spin = ProductSpinSpec::rademacher();
        assert_eq!(
            translation_residual(&spec, &spin, 0.3, 0.2, 0.1, 0.0).unwrap(),
            0.0
        );
        let r = translation_residual(&spec, &spin, 0.3, 0.2, 0.1, 1.0).unwrap();
        assert!(r < 1e-10, "{r}");
        // β = 0 reduces to an algebraic identity.
        let r = translation_residual(&spec, &spin, 0.0, 0.7, 0.0, -1.3).unwrap();
        assert!(r < 1e-12, "{r}");
        // Gaussian disorder goes through quadrature on both sides.
        let g = DisorderSpec::standard_gaussian();
        let r = translation_residual(&g, &ProductSpinSpec::bernoulli(), 0.4, -0.2, 0.25, 0.8).unwrap();
        assert!(r < 1e-10, "{r}");
    }

    #[test]
    fn gibbs_mean_is_h_derivative() {
        let spec = two_point();
        let spin = ProductSpinSpec::bernoulli();
        let (beta, h, delta) = (0.3, 0.2, 0.1);
        let eps = 1e-6;
        let fd = (exact_free_energy(&spec, &spin, beta, h + eps, delta).unwrap()
            - exact_free_energy(&spec, &spin, beta, h - eps, delta).unwrap())
            / (2.0 * eps);
        let gm = gibbs_mean_spin(&spec, &spin, beta, h, delta).unwrap();
        assert!((fd - gm).abs() < 1e-6, "{fd} vs {gm}");
    }

    #[test]
    fn zero_window_tends_to_log_half() {
        // Bernoulli spins: the x = 0 window value approaches -log 2 as N
        // grows, whatever the parameters.
        let spec = DisorderSpec::rademacher();
        let spin = ProductSpinSpec::bernoulli();
        let target = -(2.0f64.ln());
        let mut prev_gap = f64::INFINITY;
        for n in [6usize, 9, 12] {
            let v = zero_window_value(&spec, &spin, 0.2, 0.3, 0.1, n, 48).unwrap();
            let gap = (v - target).abs();
            assert!(gap < prev_gap, "n = {n}: {v}");
            prev_gap = gap;
        }
        // Parameter dependence dies with N as well.
        let v1 = zero_window_value(&spec, &spin, 0.2, 0.3, 0.1, 12, 48).unwrap();
        let v2 = zero_window_value(&spec, &spin, 0.1, -0.2, 0.0, 12, 48).unwrap();
        assert!((v1 - v2).abs() < 0.2, "{v1} vs {v2}");
    }

    #[test]
    fn sup_decomposition_shrinks_with_n() {
        let spec = DisorderSpec::rademacher();
        let spin = ProductSpinSpec::bernoulli();
        let mut prev = f64::INFINITY;
        for n in [6usize, 8, 10, 12] {
            let r = sup_decomposition_residual(&spec, &spin, 0.2, 0.3, 0.1, n, 48).unwrap();
            assert!(r >= 0.0);
            assert!(r < prev, "n = {n}: {r} !< {prev}");
            prev = r;
        }
        assert!(prev <= 0.1, "final residual {prev}");
    }

    #[test]
    fn spin_spec_serde_and_validation() {
        let b = ProductSpinSpec::bernoulli();
        let s = serde_json::to_string(&b).unwrap();
        assert!(s.contains("atoms"));
        let back: ProductSpinSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(b, back);
        assert!(ProductSpinSpec::from_atoms(vec![(0.0, 0.4), (1.0, 0.4)]).is_err());
        assert!(ProductSpinSpec::from_atoms(vec![(0.0, 1.0)]).is_err());
        assert!(!b.signed());
        assert!(ProductSpinSpec::rademacher().signed());
        assert_eq!(b.s0(), 1.0);
    }
}
