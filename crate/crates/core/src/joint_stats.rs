//! Multi-slot statistics of a single link: joint and conditional success
//! and outage probabilities, the correlation coefficient, Taylor
//! expansions, diversity gain and the bounded-path-gain variant.

use serde::{Deserialize, Serialize};

use crate::diversity::{div_poly, div_poly_dd, Precision};
use crate::error::{Error, Result};
use crate::network::{contention, NetworkParams};
use crate::quadrature::integrate_to_infinity;
use crate::specfun::{binomial, gamma, gauss_2f1, ln_gamma, rgamma};
use crate::xprec::{DoubleDouble, NeumaierSum};

/// Below this magnitude a denominator is treated as zero and the
/// removable singularity is replaced by its limit.
const SINGULAR: f64 = 1e-12;

/// Condition number above which an alternating sum is redone in
/// double-double.
const RESCUE_CONDITION: f64 = 1e6;

/// Condition number beyond which even double-double is not trusted
/// (leaves fewer than ten correct digits).
const DD_CONDITION_LIMIT: f64 = 1e21;

/// The three numbers that determine every single-link formula: the
/// contention Δ, the transmit probability and δ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkModel {
    pub big_delta: f64,
    pub p: f64,
    pub delta: f64,
    #[serde(default)]
    pub precision: Precision,
}

impl LinkModel {
    /// `δ` may be anywhere in `[0, 1]` here: a given Δ sidesteps the
    /// `Γ(1−δ)` singularity.
    pub fn new(big_delta: f64, p: f64, delta: f64) -> Result<Self> {
        if !(big_delta >= 0.0 && big_delta.is_finite()) {
            return Err(Error::Domain(format!("contention must be finite and >= 0, got {big_delta}")));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain(format!("p = {p} outside [0, 1]")));
        }
        if !(0.0..=1.0).contains(&delta) {
            return Err(Error::Domain(format!("delta = {delta} outside [0, 1]")));
        }
        Ok(Self {
            big_delta,
            p,
            delta,
            precision: Precision::Standard,
        })
    }

    pub fn from_params(params: &NetworkParams) -> Result<Self> {
        let c = contention(params)?;
        Self::new(c.big_delta, params.p, params.delta)
    }

    pub fn with_precision(self, precision: Precision) -> Self {
        Self { precision, ..self }
    }

    pub fn with_contention(self, big_delta: f64) -> Self {
        Self { big_delta, ..self }
    }

    pub fn with_p(self, p: f64) -> Self {
        Self { p, ..self }
    }

    fn d(&self, n: u32) -> f64 {
        div_poly(n, self.p, self.delta)
    }
}

/// Joint statistics over `n` slots.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointSuccessResult {
    pub n: u32,
    /// Success in every one of the `n` slots.
    pub ps_n: f64,
    /// At least one success.
    pub psone_n: f64,
    /// Failure in all `n` slots.
    pub po_n: f64,
}

/// `p_s^(n) = exp(−Δ D_n(p,δ))`.
pub fn joint_success(link: &LinkModel, n: u32) -> f64 {
    (-link.big_delta * link.d(n)).exp()
}

/// Success in slot `n+1` given successes in slots `1..=n`.
pub fn cond_success_after_successes(link: &LinkModel, n: u32) -> f64 {
    (link.big_delta * (link.d(n) - link.d(n + 1))).exp()
}

/// Failure in all `n` slots,
/// `p_o^(n) = Σ_{k=1}^n (−1)^k C(n,k) expm1(−Δ D_k)`.
///
/// This is the inclusion–exclusion sum for `1 − ψ^(n)` with the constant
/// parts cancelled exactly, so small outages keep their relative accuracy.
pub fn joint_outage(link: &LinkModel, n: u32) -> Result<f64> {
    link.precision.check(n)?;
    let mut acc = NeumaierSum::new();
    for k in 1..=n {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        acc.add(sign * binomial(n, k) * (-link.big_delta * link.d(k)).exp_m1());
    }
    if acc.condition() <= RESCUE_CONDITION {
        return Ok(acc.sum());
    }
    joint_outage_dd(link, n)
}

fn joint_outage_dd(link: &LinkModel, n: u32) -> Result<f64> {
    let mut sum = DoubleDouble::ZERO;
    let mut abs = 0.0;
    let mut binom = DoubleDouble::ONE;
    for k in 1..=n {
        binom = binom * f64::from(n - k + 1) / f64::from(k);
        let x = -(div_poly_dd(k, link.p, link.delta) * link.big_delta);
        let t = binom * x.exp_m1();
        abs += t.to_f64().abs();
        sum += if k % 2 == 0 { t } else { -t };
    }
    let value = sum.to_f64();
    let cond = if value == 0.0 { f64::INFINITY } else { abs / value.abs() };
    if cond > DD_CONDITION_LIMIT && abs > 0.0 {
        return Err(Error::Instability(format!(
            "inclusion-exclusion for n = {n} has condition number {cond:e}"
        )));
    }
    Ok(value)
}

/// `ψ^(n)`, the probability of at least one success in `n` slots.
///
/// The result must lie in `[p_s^(1), 1]`; values outside by at most 1e-9
/// are clamped, anything further is reported as an instability.
pub fn at_least_one_success(link: &LinkModel, n: u32) -> Result<f64> {
    let psi = 1.0 - joint_outage(link, n)?;
    let lo = joint_success(link, 1);
    clamp_checked(psi, lo, 1.0)
}

fn clamp_checked(v: f64, lo: f64, hi: f64) -> Result<f64> {
    if v >= lo && v <= hi {
        Ok(v)
    } else if v >= lo - 1e-9 && v <= hi + 1e-9 {
        Ok(v.clamp(lo, hi))
    } else {
        Err(Error::Instability(format!("{v} outside [{lo}, {hi}]")))
    }
}

pub fn joint_summary(link: &LinkModel, n: u32) -> Result<JointSuccessResult> {
    let psone_n = at_least_one_success(link, n)?;
    Ok(JointSuccessResult {
        n,
        ps_n: joint_success(link, n),
        psone_n,
        po_n: 1.0 - psone_n,
    })
}

/// Correlation coefficient of the success indicators of two slots,
/// `ζ = (e^{Δp²(1−δ)} − 1)/(e^{Δp} − 1)`. Failure indicators share it.
pub fn correlation_coefficient(link: &LinkModel) -> f64 {
    let LinkModel { big_delta, p, delta, .. } = *link;
    let den = (big_delta * p).exp_m1();
    if den.abs() < SINGULAR {
        return p * (1.0 - delta);
    }
    (big_delta * p * p * (1.0 - delta)).exp_m1() / den
}

/// `P(S₂ | S̄₁)` and its Δ-free upper bound `1 − p(1−δ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CondAfterFailure {
    pub value: f64,
    pub bound: f64,
}

pub fn cond_success_after_failure(link: &LinkModel) -> Result<CondAfterFailure> {
    let LinkModel { big_delta, p, delta, .. } = *link;
    if !(p > 0.0) {
        return Err(Error::Domain("conditioning on a failure needs p > 0".into()));
    }
    let bound = 1.0 - p * (1.0 - delta);
    let den = (big_delta * p).exp_m1();
    let value = if den.abs() < SINGULAR {
        bound
    } else {
        -(-big_delta * p * bound).exp_m1() / den
    };
    if value > bound * (1.0 + 1e-12) {
        return Err(Error::Instability(format!("{value} exceeds the bound {bound}")));
    }
    Ok(CondAfterFailure {
        value: value.min(bound),
        bound,
    })
}

/// `P(S̄₂ | S̄₁) = 1 − e^{−Δp}(1 − e^{−Δp(1−p(1−δ))})/(1 − e^{−Δp})`.
pub fn cond_outage_after_outage(link: &LinkModel) -> Result<f64> {
    let LinkModel { big_delta, p, delta, .. } = *link;
    if !(p > 0.0) {
        return Err(Error::Domain("conditioning on a failure needs p > 0".into()));
    }
    let den = -(-big_delta * p).exp_m1();
    if den.abs() < SINGULAR {
        return Ok(p * (1.0 - delta));
    }
    let num = -(-big_delta * p * (1.0 - p * (1.0 - delta))).exp_m1();
    Ok(1.0 - (-big_delta * p).exp() * num / den)
}

/// Outage in slot `n+1` given outages in slots `1..=n`.
pub fn cond_outage_after_failures(link: &LinkModel, n: u32) -> Result<f64> {
    let num = joint_outage(link, n + 1)?;
    let den = joint_outage(link, n)?;
    if den.abs() < f64::MIN_POSITIVE {
        return Ok(asymptotic_cond_outage(link.p, link.delta, n));
    }
    Ok(num / den)
}

/// `P(S̄₁ ∩ S̄₂)/P(S̄₁)²`, above 1 under positive correlation.
pub fn failure_correlation_ratio(link: &LinkModel) -> Result<f64> {
    let po1 = joint_outage(link, 1)?;
    let po2 = joint_outage(link, 2)?;
    Ok(po2 / (po1 * po1))
}

/// Δ → 0 limit of the outage probability after `n` outages, `p(1 − δ/n)`.
pub fn asymptotic_cond_outage(p: f64, delta: f64, n: u32) -> f64 {
    p * (1.0 - delta / f64::from(n))
}

/// Coefficient `Γ(n−δ)/(Γ(n)Γ(1−δ))` of the leading outage term.
pub fn outage_leading_coefficient(delta: f64, n: u32) -> f64 {
    let nf = f64::from(n);
    if n == 1 {
        return 1.0;
    }
    // Γ(n−δ) is finite for n >= 2 even at δ = 1, where 1/Γ(1−δ) = 0.
    gamma(nf - delta) * rgamma(1.0 - delta) / gamma(nf)
}

/// First-order expansion `ψ^(n) ≈ 1 − Δ p^n Γ(n−δ)/(Γ(n)Γ(1−δ))`, exact
/// to `O(Δ²)` as Δ → 0.
///
/// As p → 0 at fixed Δ the remainder is `O(Δ² p^n)`, the same power of p
/// as the retained term: every order in Δ contributes to the `p^n`
/// coefficient of the outage.
pub fn taylor_psone(link: &LinkModel, n: u32) -> f64 {
    1.0 - link.big_delta * link.p.powi(n as i32) * outage_leading_coefficient(link.delta, n)
}

/// Which parameter the diversity ladder drives to zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GainMode {
    VaryContention,
    VaryTransmitProb,
}

/// Rungs in the geometric ladder.
pub const LADDER_RUNGS: usize = 8;

/// Richardson-extrapolated slope of `δ log f(x)/log x` as `x → 0` over
/// the ladder `x₀ 2^{−j}`, where the local slope error is linear in `x`.
fn ladder_slope<F: FnMut(f64) -> Result<f64>>(mut f: F, mut x0: f64, delta: f64) -> Result<f64> {
    // Start where the outage is already small, so the linear term dominates.
    let mut guard = 0;
    while f(x0)? >= 0.1 {
        x0 *= 0.5;
        guard += 1;
        if guard > 200 {
            return Err(Error::NoSolution("outage never drops below 0.1 on the ladder".into()));
        }
    }
    let mut logs = Vec::with_capacity(LADDER_RUNGS);
    for j in 0..LADDER_RUNGS {
        let x = x0 * 0.5f64.powi(j as i32);
        let v = f(x)?;
        if !(v > 0.0) {
            return Err(Error::Instability(format!("non-positive outage {v:e} at x = {x:e}")));
        }
        logs.push((x.ln(), v.ln()));
    }
    let slopes: Vec<f64> = logs
        .windows(2)
        .map(|w| delta * (w[1].1 - w[0].1) / (w[1].0 - w[0].0))
        .collect();
    let k = slopes.len();
    Ok(2.0 * slopes[k - 1] - slopes[k - 2])
}

/// Numerical diversity gain `lim δ log p_o^(n) / log x`, with `x` the
/// contention Δ or the transmit probability p.
pub fn diversity_gain_estimate(link: &LinkModel, n: u32, mode: GainMode) -> Result<f64> {
    let high = link.with_precision(Precision::High);
    match mode {
        GainMode::VaryContention => {
            let x0 = if link.big_delta > 0.0 { link.big_delta } else { 1.0 };
            ladder_slope(|x| joint_outage(&high.with_contention(x), n), x0, link.delta)
        }
        GainMode::VaryTransmitProb => {
            let x0 = if link.p > 0.0 { link.p } else { 0.5 };
            ladder_slope(|x| joint_outage(&high.with_p(x), n), x0, link.delta)
        }
    }
}

/// Diversity of `n` attempts under independent interference, from
/// `p_o = (1 − e^{−Δp})^n` along the same Δ ladder.
pub fn independent_diversity_gain(link: &LinkModel, n: u32) -> Result<f64> {
    let x0 = if link.big_delta > 0.0 { link.big_delta } else { 1.0 };
    let p = link.p;
    ladder_slope(|x| Ok((-(-x * p).exp_m1()).powi(n as i32)), x0, link.delta)
}

/// `B_k` term of the bounded-path-gain exponent.
fn bounded_term(theta_p: f64, delta: f64, k: u32) -> Result<f64> {
    let kf = f64::from(k);
    let near = (theta_p / (1.0 + theta_p)).powi(k as i32);
    let far = theta_p.powf(delta)
        * delta
        * (ln_gamma(kf - delta)? + ln_gamma(delta)? - ln_gamma(kf)?).exp();
    let h = gauss_2f1(kf, delta, 1.0 + delta, -1.0 / theta_p)?;
    Ok(near + far - h)
}

/// Joint success probability with path loss `max(1, v^α)`.
///
/// `p = exp(−λπ Σ_k C(n,k) (−1)^{k+1} p^k B_k)` with `θ′ = θ max(1, r^α)`.
/// For `r >= 1` the result must exceed the unbounded value; a violation is
/// reported as an instability.
pub fn joint_success_bounded(params: &NetworkParams, n: u32) -> Result<f64> {
    params.validate()?;
    Precision::Standard.check(n)?;
    let alpha = params.alpha();
    let theta_p = params.theta * params.r.powf(alpha).max(1.0);
    let mut acc = NeumaierSum::new();
    let mut pk = 1.0;
    for k in 1..=n {
        pk *= params.p;
        let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
        acc.add(sign * binomial(n, k) * pk * bounded_term(theta_p, params.delta, k)?);
    }
    let value = (-params.lambda * std::f64::consts::PI * acc.sum()).exp();
    if params.r >= 1.0 {
        let unbounded = joint_success(&LinkModel::from_params(params)?, n);
        if value < unbounded * (1.0 - 1e-12) {
            return Err(Error::Instability(format!(
                "bounded success {value} below unbounded {unbounded} for r >= 1"
            )));
        }
    }
    Ok(value)
}

/// `λ F_n` by direct quadrature of the probability generating functional,
/// `2πλ ∫_0^∞ [1 − (p v^α/(v^α + θ′) + 1 − p)^n] v dv` with `θ′ = θ r^α`.
/// Equal to `Δ D_n(p,δ)`; kept as an independent check of that identity.
pub fn pgfl_exponent_quadrature(params: &NetworkParams, n: u32) -> Result<f64> {
    params.validate()?;
    let alpha = params.alpha();
    let p = params.p;
    // Work in s = ln(v/v0) with v0 = θ'^{1/α} = θ^{1/α} r, the scale of the integrand.
    let v0 = params.theta.powf(1.0 / alpha) * params.r;
    let integrand = |s: f64| {
        let v = v0 * s.exp();
        let x = (alpha * s).exp(); // (v/v0)^α
        let bracket = -(f64::from(n) * (-p / (1.0 + x)).ln_1p()).exp_m1();
        if bracket == 0.0 {
            return 0.0;
        }
        bracket * v * v
    };
    let right = integrate_to_infinity(integrand, 0.0, 1e-14, 1e-11)?;
    let left = integrate_to_infinity(|t| integrand(-t), 0.0, 1e-14, 1e-11)?;
    Ok(2.0 * std::f64::consts::PI * params.lambda * (left + right))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn link(d: f64, p: f64, delta: f64) -> LinkModel {
        LinkModel::new(d, p, delta).unwrap()
    }

    #[test]
    fn joint_success_values() {
        let l = link(0.5, 0.5, 0.5);
        assert!((joint_success(&l, 1) - (-0.25f64).exp()).abs() < 1e-16);
        assert!((joint_success(&l, 2) - (-0.4375f64).exp()).abs() < 1e-15);
        assert_eq!(joint_success(&link(0.5, 0.0, 0.3), 5), 1.0);
        let c = cond_success_after_successes(&l, 1);
        assert!((c - (-0.1875f64).exp()).abs() < 1e-15);
        assert!((c - 0.829_029_118_180_401_4).abs() < 1e-12);
        assert_eq!(cond_success_after_successes(&link(0.5, 0.0, 0.5), 3), 1.0);
        // Fully correlated, all transmit: one success guarantees all.
        for n in 1..6 {
            assert!((cond_success_after_successes(&link(0.7, 1.0, 0.0), n) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn inclusion_exclusion() {
        let l = link(0.5, 0.5, 0.5);
        let e1 = (-0.25f64).exp();
        assert!((at_least_one_success(&l, 1).unwrap() - e1).abs() < 1e-15);
        let two = 2.0 * e1 - (-0.5 * (2.0 * 0.5 + (0.5 - 1.0) * 0.25f64)).exp();
        assert!((at_least_one_success(&l, 2).unwrap() - two).abs() < 1e-15);
        // Jointly failing twice.
        let po2 = 1.0 - 2.0 * e1 + (-0.25 * (2.0 - 0.5 * 0.5f64)).exp();
        assert!((joint_outage(&l, 2).unwrap() - po2).abs() < 1e-15);

        // Direct alternating sum of the success probabilities, in double-double.
        for n in 1..=30 {
            let mut s = DoubleDouble::ZERO;
            let mut b = DoubleDouble::ONE;
            for k in 1..=n {
                b = b * f64::from(n - k + 1) / f64::from(k);
                let t = b * (-(div_poly_dd(k, l.p, l.delta) * l.big_delta)).exp();
                s += if k % 2 == 1 { t } else { -t };
            }
            let v = at_least_one_success(&l, n).unwrap();
            assert!((v - s.to_f64()).abs() < 1e-13, "n={n}");
        }
        assert!(at_least_one_success(&l, 31).is_err());
        assert!(at_least_one_success(&l.with_precision(Precision::High), 31).is_ok());
    }

    #[test]
    fn summary_ordering() {
        let l = link(0.8, 0.6, 0.4);
        let mut prev: Option<JointSuccessResult> = None;
        for n in 1..=30 {
            let r = joint_summary(&l, n).unwrap();
            assert!(0.0 <= r.ps_n && r.ps_n <= r.psone_n && r.psone_n <= 1.0);
            assert!((r.po_n - (1.0 - r.psone_n)).abs() < 1e-15);
            if let Some(q) = prev {
                assert!(r.ps_n <= q.ps_n && r.psone_n >= q.psone_n);
            }
            prev = Some(r);
        }
    }

    #[test]
    fn correlation_and_conditionals() {
        let l = link(0.5, 0.5, 0.5);
        let z = correlation_coefficient(&l);
        assert!((z - 0.0625f64.exp_m1() / 0.25f64.exp_m1()).abs() < 1e-16);
        assert!((z - 0.227_072_843_233_480_3).abs() < 1e-15);
        assert!((correlation_coefficient(&link(2.0, 1.0, 0.0)) - 1.0).abs() < 1e-15);
        assert_eq!(correlation_coefficient(&link(2.0, 0.3, 1.0)), 0.0);
        assert!((correlation_coefficient(&link(0.0, 0.3, 0.4)) - 0.18).abs() < 1e-15);

        let c = cond_success_after_failure(&l).unwrap();
        assert!((c.value - (-(-0.1875f64).exp_m1()) / 0.25f64.exp_m1()).abs() < 1e-15);
        assert!((c.value - 0.601_956_274_946_920_1).abs() < 1e-15);
        assert_eq!(c.bound, 0.75);
        let c0 = cond_success_after_failure(&link(0.0, 0.5, 0.5)).unwrap();
        assert_eq!(c0.value, 0.75);
        let c1 = cond_success_after_failure(&link(0.9, 0.4, 1.0)).unwrap();
        assert!((c1.value - (-0.36f64).exp()).abs() < 1e-15);
        assert!(cond_success_after_failure(&link(0.9, 0.0, 1.0)).is_err());

        // P(S̄₂|S̄₁) = 1 − P(S₂|S̄₁).
        let o = cond_outage_after_outage(&l).unwrap();
        assert!((o + c.value - 1.0).abs() < 1e-15);
        let o2 = cond_outage_after_failures(&l, 1).unwrap();
        assert!((o - o2).abs() < 1e-14);
    }

    #[test]
    fn positive_correlation_grid() {
        for &d in &[0.1, 0.5, 1.0, 3.0] {
            for i in 1..=10 {
                let p = f64::from(i) / 10.0;
                for j in 1..10 {
                    let delta = f64::from(j) / 10.0;
                    let l = link(d, p, delta);
                    let ps1 = joint_success(&l, 1);
                    assert!(joint_success(&l, 2) > ps1 * ps1);
                    assert!(failure_correlation_ratio(&l).unwrap() > 1.0);
                    let mut prev = 0.0;
                    for n in 1..8 {
                        let c = cond_success_after_successes(&l, n);
                        assert!(c > prev);
                        prev = c;
                    }
                }
            }
        }
    }

    #[test]
    fn asymptotic_outage_limit() {
        assert_eq!(asymptotic_cond_outage(0.5, 0.5, 1), 0.25);
        assert_eq!(asymptotic_cond_outage(0.4, 0.0, 7), 0.4);
        assert!((asymptotic_cond_outage(0.4, 0.3, 1_000_000) - 0.4).abs() < 1e-6);
        for &p in &[0.3, 0.7] {
            for &d in &[0.25, 0.75] {
                for n in 1..=4 {
                    let l = link(1e-6, p, d);
                    let r = cond_outage_after_failures(&l, n).unwrap();
                    assert!((r - asymptotic_cond_outage(p, d, n)).abs() < 1e-5, "p={p} d={d} n={n}: {r}");
                }
            }
        }
    }

    #[test]
    fn taylor_expansion_orders() {
        assert!((taylor_psone(&link(0.3, 0.4, 0.6), 1) - 0.88).abs() < 1e-15);
        // O(Δ²): halving Δ quarters the error.
        let err = |d: f64| {
            let l = link(d, 0.3, 0.5);
            (taylor_psone(&l, 2) - at_least_one_success(&l, 2).unwrap()).abs()
        };
        let r = err(0.01) / err(0.005);
        assert!((r - 4.0).abs() < 0.1, "{r}");
        // In p at fixed Δ the error keeps the order p^n (n = 3, ratio 8)
        // and shrinks with Δ², so the relative error vanishes only as Δ → 0.
        let err = |d: f64, p: f64| {
            let l = link(d, p, 0.5);
            (taylor_psone(&l, 3) - at_least_one_success(&l.with_precision(Precision::High), 3).unwrap()).abs()
        };
        let r = err(0.5, 0.01) / err(0.5, 0.005);
        assert!((r - 8.0).abs() < 0.2, "{r}");
        let q = err(0.02, 0.01) / err(0.01, 0.01);
        assert!((q - 4.0).abs() < 0.1, "{q}");
    }

    #[test]
    fn diversity_gain() {
        for n in 1..=4 {
            let l = link(0.5, 0.5, 0.5);
            let d = diversity_gain_estimate(&l, n, GainMode::VaryContention).unwrap();
            assert!((d - 0.5).abs() < 0.01, "n={n}: {d}");
            let dp = diversity_gain_estimate(&l, n, GainMode::VaryTransmitProb).unwrap();
            assert!((dp - 0.5 * f64::from(n)).abs() < 0.03, "n={n}: {dp}");
            let di = independent_diversity_gain(&l, n).unwrap();
            assert!((di - 0.5 * f64::from(n)).abs() < 0.01, "n={n}: {di}");
        }
    }

    #[test]
    fn bounded_path_gain() {
        let pi = std::f64::consts::PI;
        // Large θ' recovers the unbounded result.
        let params = NetworkParams::new(0.05, 1.0, 1e6, 0.5, 0.5).unwrap();
        for n in 1..=4 {
            let b = joint_success_bounded(&params, n).unwrap();
            let u = joint_success(&LinkModel::from_params(&params).unwrap(), n);
            assert!(((b.ln() - u.ln()) / u.ln()).abs() < 1e-3, "n={n}");
            assert!(b > u);
        }
        let params = NetworkParams::new(pi.powi(-2), 1.0, 1.0, 0.5, 0.5).unwrap();
        let b1 = joint_success_bounded(&params, 1).unwrap();
        // B_1 = 1/2 + π/2 − arctan(1) at θ' = 1, δ = 1/2.
        let expect = (-0.5 * (0.5 + pi / 4.0) / pi).exp();
        assert!((b1 - expect).abs() < 1e-12);
        assert!(b1 > (-0.25f64).exp());
        assert_eq!(joint_success_bounded(&params.with_p(0.0), 3).unwrap(), 1.0);
        // Short links are computed without an ordering claim.
        let short = NetworkParams { r: 0.5, ..params };
        assert!(joint_success_bounded(&short, 2).unwrap() > 0.0);
    }

    #[test]
    fn pgfl_integral_identity() {
        for &(delta, theta, r) in &[(0.5, 1.0, 1.0), (0.3, 5.0, 0.7), (0.8, 0.2, 2.0)] {
            let params = NetworkParams::new(0.2, r, theta, delta, 0.6).unwrap();
            let link = LinkModel::from_params(&params).unwrap();
            for n in 1..=4 {
                let q = pgfl_exponent_quadrature(&params, n).unwrap();
                let a = link.big_delta * div_poly(n, params.p, delta);
                assert!((q - a).abs() < 1e-6 * a.max(1.0), "δ={delta} n={n}: {q} vs {a}");
            }
        }
    }
}
