//! Two transmissions with different SIR thresholds θ₁, θ₂: the exponent
//! `D̂`, the joint SIR distribution `P₂`, the quadratic approximation of
//! the at-least-once probability in `ν = log √(θ₂/θ₁)`, and the threshold
//! design solvers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{contention, NetworkParams};
use crate::roots::bisect;

/// Singular-branch cutoff for `ν` near zero.
const NU_LIMIT: f64 = 1e-8;

/// Below this relative gap the thresholds are treated through the
/// hyperbolic form, which has no `0/0` at θ₁ = θ₂.
const CLOSE_THRESHOLDS: f64 = 1e-3;

/// A pair of thresholds, equivalently `(θ̄, ν)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoThresholdSpec {
    pub theta1: f64,
    pub theta2: f64,
}

impl TwoThresholdSpec {
    pub fn new(theta1: f64, theta2: f64) -> Result<Self> {
        if !(theta1 > 0.0 && theta2 > 0.0 && theta1.is_finite() && theta2.is_finite()) {
            return Err(Error::Domain(format!("thresholds must be positive, got ({theta1}, {theta2})")));
        }
        Ok(Self { theta1, theta2 })
    }

    /// `θ₁ = θ̄e^{−ν}`, `θ₂ = θ̄e^{ν}`.
    pub fn from_nu(theta_bar: f64, nu: f64) -> Result<Self> {
        Self::new(theta_bar * (-nu).exp(), theta_bar * nu.exp())
    }

    pub fn theta_bar(&self) -> f64 {
        (self.theta1 * self.theta2).sqrt()
    }

    pub fn nu(&self) -> f64 {
        0.5 * (self.theta2 / self.theta1).ln()
    }
}

/// The parameters that enter the two-threshold formulas.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymmetricLink {
    /// `Δ̂ = λπr²Γ(1+δ)Γ(1−δ)`, the contention without the threshold factor.
    pub delta_hat: f64,
    pub p: f64,
    /// `δ ∈ (0, 1]`.
    pub delta: f64,
}

impl AsymmetricLink {
    pub fn new(delta_hat: f64, p: f64, delta: f64) -> Result<Self> {
        if !(delta_hat >= 0.0 && delta_hat.is_finite()) {
            return Err(Error::Domain(format!("delta_hat must be finite and >= 0, got {delta_hat}")));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain(format!("p = {p} outside [0, 1]")));
        }
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(Error::Domain(format!("delta = {delta} outside (0, 1]")));
        }
        Ok(Self { delta_hat, p, delta })
    }

    pub fn from_params(params: &NetworkParams) -> Result<Self> {
        let c = contention(params)?;
        Self::new(c.delta_hat, params.p, params.delta)
    }

    /// `x = Δ̂pθ̄^δ`, the single-slot exponent at the geometric-mean threshold.
    pub fn exponent(&self, theta_bar: f64) -> f64 {
        self.delta_hat * self.p * theta_bar.powf(self.delta)
    }

    /// Success probability of one slot at threshold `theta`.
    pub fn single_success(&self, theta: f64) -> f64 {
        (-self.exponent(theta)).exp()
    }
}

/// `sinh(ν(1−δ))/sinh ν`, even in ν, with value `1−δ` at ν = 0.
pub fn sinh_ratio(nu: f64, delta: f64) -> f64 {
    let a = nu.abs();
    if a < NU_LIMIT {
        return 1.0 - delta;
    }
    (-a * delta).exp() * (-2.0 * a * (1.0 - delta)).exp_m1() / (-2.0 * a).exp_m1()
}

/// `g(ν) = 2cosh(νδ) − p·sinh(ν(1−δ))/sinh ν`, so `D̂ = pθ̄^δ g(ν)`.
pub fn g_nu(p: f64, delta: f64, nu: f64) -> f64 {
    2.0 * (nu * delta).cosh() - p * sinh_ratio(nu, delta)
}

/// `D̂(p,δ,θ₁,θ₂) = p(θ₁^δ+θ₂^δ) + p²(θ₁^δθ₂ − θ₂^δθ₁)/(θ₁−θ₂)`.
pub fn d2_hat(p: f64, delta: f64, theta1: f64, theta2: f64) -> f64 {
    let spec = TwoThresholdSpec { theta1, theta2 };
    let tb = spec.theta_bar();
    if (theta1 - theta2).abs() / tb < CLOSE_THRESHOLDS {
        return d2_hat_nu(p, delta, tb, spec.nu());
    }
    let t1d = theta1.powf(delta);
    let t2d = theta2.powf(delta);
    p * (t1d + t2d) + p * p * (t1d * theta2 - t2d * theta1) / (theta1 - theta2)
}

/// `D̂` in the `(θ̄, ν)` parametrization.
pub fn d2_hat_nu(p: f64, delta: f64, theta_bar: f64, nu: f64) -> f64 {
    p * theta_bar.powf(delta) * g_nu(p, delta, nu)
}

/// `P(S₁ ∩ S₂) = exp(−Δ̂ D̂)`.
pub fn joint_success_two(link: &AsymmetricLink, spec: &TwoThresholdSpec) -> f64 {
    (-link.delta_hat * d2_hat(link.p, link.delta, spec.theta1, spec.theta2)).exp()
}

/// `P₂(θ₁,θ₂) = P(SIR₁ ≤ θ₁, SIR₂ ≤ θ₂)`.
pub fn joint_sir_cdf(link: &AsymmetricLink, spec: &TwoThresholdSpec) -> f64 {
    let a1 = link.delta_hat * link.p * spec.theta1.powf(link.delta);
    let a2 = link.delta_hat * link.p * spec.theta2.powf(link.delta);
    let j = link.delta_hat * d2_hat(link.p, link.delta, spec.theta1, spec.theta2);
    // (1 − e^{−a1})(1 − e^{−a2}) − (e^{−j} − e^{−a1−a2})
    let marg = (-a1).exp_m1() * (-a2).exp_m1();
    let corr = (-(a1 + a2)).exp() * (a1 + a2 - j).exp_m1();
    (marg + corr).clamp(0.0, 1.0)
}

/// `P₂(θ̄e^{−ν}, θ̄e^{ν})` through the hyperbolic form.
pub fn joint_sir_cdf_nu(link: &AsymmetricLink, theta_bar: f64, nu: f64) -> f64 {
    let x = link.exponent(theta_bar);
    let d = link.delta;
    1.0 - 2.0 * (-x * (nu * d).cosh()).exp() * (x * (nu * d).sinh()).cosh()
        + (-x * g_nu(link.p, d, nu)).exp()
}

/// `ψ^(2)(ν) = 1 − P₂(θ̄e^{−ν}, θ̄e^{ν})`.
pub fn psi_two(link: &AsymmetricLink, theta_bar: f64, nu: f64) -> f64 {
    let x = link.exponent(theta_bar);
    let d = link.delta;
    let a1 = x * (-nu * d).exp();
    let a2 = x * (nu * d).exp();
    (-a1).exp() + (-a2).exp() - (-x * g_nu(link.p, d, nu)).exp()
}

/// `ψ^(2)` on a ν grid plus the symmetry verdict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetryCheck {
    pub nu: Vec<f64>,
    pub psi: Vec<f64>,
    pub psi_at_zero: f64,
    /// `ψ(ν) >= ψ(0)` everywhere on the grid.
    pub min_at_zero: bool,
    /// Largest `|ψ(ν) − ψ(−ν)|`.
    pub max_asymmetry: f64,
    pub even: bool,
}

pub fn symmetric_is_min_check(link: &AsymmetricLink, theta_bar: f64, nu_grid: &[f64]) -> Result<SymmetryCheck> {
    if nu_grid.is_empty() {
        return Err(Error::Domain("empty ν grid".into()));
    }
    let psi0 = psi_two(link, theta_bar, 0.0);
    let psi: Vec<f64> = nu_grid.iter().map(|&v| psi_two(link, theta_bar, v)).collect();
    let min_at_zero = psi.iter().all(|&v| v >= psi0 - 1e-15);
    let max_asymmetry = nu_grid
        .iter()
        .zip(&psi)
        .map(|(&v, &s)| (s - psi_two(link, theta_bar, -v)).abs())
        .fold(0.0, f64::max);
    Ok(SymmetryCheck {
        nu: nu_grid.to_vec(),
        psi,
        psi_at_zero: psi0,
        min_at_zero,
        max_asymmetry,
        even: max_asymmetry <= 1e-12,
    })
}

/// `B` as a function of `x = Δ̂pθ̄^δ`, δ and p: the `ν²` coefficient of
/// `ψ^(2)(ν)`.
pub fn b_coefficient(x: f64, delta: f64, p: f64) -> f64 {
    let d = delta;
    x * d * d * (x - 1.0) * (-x).exp()
        + x * d * (6.0 * d + 2.0 * p - 3.0 * p * d + p * d * d) / 6.0 * (-x * (2.0 - p * (1.0 - d))).exp()
}

/// `(A, B)` in `ψ^(2)(ν) = A + Bν² + O(ν⁴)`.
pub fn quadratic_coeffs(link: &AsymmetricLink, theta_bar: f64) -> Result<(f64, f64)> {
    let x = link.exponent(theta_bar);
    let d = link.delta;
    let a = 2.0 * (-x).exp() - (-x * (2.0 - link.p * (1.0 - d))).exp();
    let b = b_coefficient(x, d, link.p);
    if !(b > 0.0) && x > 0.0 && link.p > 0.0 {
        return Err(Error::Instability(format!("curvature B = {b:e} is not positive")));
    }
    Ok((a, b))
}

/// Location of the largest `B` over `x > 0` and `δ ∈ (0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BMaximum {
    pub b: f64,
    pub x: f64,
    pub delta: f64,
}

fn golden_max<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Maximizes [`b_coefficient`] for transmit probability `p`: golden-section
/// in `x ∈ (0, 10]` nested in golden-section over δ, started from a coarse
/// grid so the outer search sits in the right basin.
pub fn maximize_b(p: f64) -> BMaximum {
    let best_x = |d: f64| golden_max(|x| b_coefficient(x, d, p), 1e-6, 10.0, 1e-10);
    let mut best = (1.0, f64::NEG_INFINITY);
    for i in 1..=100 {
        let d = f64::from(i) / 100.0;
        let v = best_x(d).1;
        if v > best.1 {
            best = (d, v);
        }
    }
    let lo = (best.0 - 0.01).max(1e-6);
    let hi = (best.0 + 0.01).min(1.0);
    let (d, _) = golden_max(|d| best_x(d).1, lo, hi, 1e-9);
    // The interior search cannot land on the closed end δ = 1.
    let d = if best_x(1.0).1 >= best_x(d).1 { 1.0 } else { d };
    let (x, b) = best_x(d);
    BMaximum { b, x, delta: d }
}

/// Approximate squared asymmetry `ν̂²` for which
/// `P(S₁∩S₂)` at `(θ̄e^{−ν}, θ̄e^{ν})` equals `P(S₁)²` at θ̄, from the
/// quadratic expansion of `D̂`.
pub fn affordable_asymmetry(p: f64, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain(format!("delta = {delta} outside (0, 1)")));
    }
    Ok(p * (1.0 - delta) / (delta * (delta + p / 6.0 * (delta - 1.0) * (delta - 2.0))))
}

/// Exact counterpart of [`affordable_asymmetry`]: the positive root of
/// `g(ν) = 2`, squared. Independent of Δ̂ and θ̄.
pub fn affordable_asymmetry_exact(p: f64, delta: f64) -> Result<f64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Domain(format!("delta = {delta} outside (0, 1)")));
    }
    if p == 0.0 {
        return Ok(0.0);
    }
    let f = |nu: f64| g_nu(p, delta, nu) - 2.0;
    let mut hi = 1.0;
    while f(hi) <= 0.0 {
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::NoSolution("g(ν) never reaches 2".into()));
        }
    }
    let nu = bisect(f, 0.0, hi, 1e-13, f64::INFINITY)?;
    Ok(nu * nu)
}

/// Solution of the equal-at-least-once design problem.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EqualizedDesign {
    pub nu: f64,
    /// `(θ̄e^{−ν}, θ̄e^{ν})`.
    pub thresholds: TwoThresholdSpec,
    /// `ψ^(2)` at the designed pair.
    pub success: f64,
    /// `ψ^(2)(0)`.
    pub symmetric_success: f64,
}

/// `ν` from `e^{−νδ} = −log(1 − √(1 − ψ^(2)(0)))/(Δ̂pθ̄^δ)`, the
/// approximation that replaces `ψ^(2)(ν)` by its minimum.
pub fn equalize_at_least_once(link: &AsymmetricLink, theta_bar: f64) -> Result<EqualizedDesign> {
    let x = link.exponent(theta_bar);
    let psi0 = psi_two(link, theta_bar, 0.0);
    let rhs = -(-(1.0 - psi0).sqrt()).ln_1p() / x;
    if !(rhs > 0.0 && rhs.is_finite()) {
        return Err(Error::NoSolution(format!("right-hand side {rhs} is not positive")));
    }
    let nu = -rhs.ln() / link.delta;
    design(link, theta_bar, nu, psi0)
}

/// Bisection on `ν ∈ [−5, 0]` of the exact equation
/// `ψ^(2)(ν) = 1 − (1 − P(SIR₁ > θ̄e^{−ν}))²`.
pub fn equalize_at_least_once_exact(link: &AsymmetricLink, theta_bar: f64) -> Result<EqualizedDesign> {
    let x = link.exponent(theta_bar);
    let d = link.delta;
    let f = |nu: f64| {
        let miss = -(-x * (-nu * d).exp()).exp_m1();
        psi_two(link, theta_bar, nu) - (1.0 - miss * miss)
    };
    let nu = bisect(f, -5.0, 0.0, 1e-10, f64::INFINITY)?;
    design(link, theta_bar, nu, psi_two(link, theta_bar, 0.0))
}

fn design(link: &AsymmetricLink, theta_bar: f64, nu: f64, psi0: f64) -> Result<EqualizedDesign> {
    Ok(EqualizedDesign {
        nu,
        thresholds: TwoThresholdSpec::from_nu(theta_bar, nu)?,
        success: psi_two(link, theta_bar, nu),
        symmetric_success: psi0,
    })
}

/// Threshold θ₂ for the second attempt that restores
/// `P(SIR₂ > θ₂ | SIR₁ ≤ θ₁) = P(SIR₁ > θ₁)`.
///
/// Bisection on `log θ₂ ∈ [log θ₁ − 20, log θ₁]`.
pub fn post_failure_threshold(link: &AsymmetricLink, theta1: f64) -> Result<f64> {
    if !(theta1 > 0.0) {
        return Err(Error::Domain(format!("theta1 must be positive, got {theta1}")));
    }
    let a1 = link.exponent(theta1);
    if a1 < 1e-10 {
        return Err(Error::NoSolution(format!(
            "degenerate: single-slot exponent {a1:e} leaves the condition independent of θ₂"
        )));
    }
    let target = (-a1).exp() * -(-a1).exp_m1();
    let resid = |log_t2: f64| {
        let t2 = log_t2.exp();
        let a2 = link.exponent(t2);
        let j = link.delta_hat * d2_hat(link.p, link.delta, theta1, t2);
        // e^{−a2} − e^{−j} = e^{−a2}(1 − e^{a2−j})
        (-a2).exp() * -(a2 - j).exp_m1() - target
    };
    let hi = theta1.ln();
    let lo = hi - 20.0;
    let (r_lo, r_hi) = (resid(lo), resid(hi));
    if r_hi.abs() <= 1e-14 {
        return Ok(theta1);
    }
    if r_lo.signum() == r_hi.signum() {
        return Err(Error::NoSolution(format!(
            "no sign change for θ₂ in [θ₁e^-20, θ₁]: residuals {r_lo:e} and {r_hi:e}"
        )));
    }
    let log_t2 = bisect(resid, lo, hi, 1e-14, 1e-10)?;
    let t2 = log_t2.exp();
    let check = cond_success_after_failure_two(link, &TwoThresholdSpec::new(theta1, t2)?);
    if (check - (-a1).exp()).abs() > 1e-8 {
        return Err(Error::Instability(format!(
            "P(S2|not S1) = {check} misses P(S1) = {} at the root",
            (-a1).exp()
        )));
    }
    Ok(t2)
}

/// `P(SIR₂ > θ₂ | SIR₁ ≤ θ₁)`.
pub fn cond_success_after_failure_two(link: &AsymmetricLink, spec: &TwoThresholdSpec) -> f64 {
    let a1 = link.exponent(spec.theta1);
    let a2 = link.exponent(spec.theta2);
    let j = link.delta_hat * d2_hat(link.p, link.delta, spec.theta1, spec.theta2);
    (-a2).exp() * -(a2 - j).exp_m1() / -(-a1).exp_m1()
}

/// Rate gain from asymmetric thresholds and its quadratic lower bound, in nats.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThroughputGain {
    pub gain: f64,
    pub quadratic_bound: f64,
}

pub fn throughput_gain(theta_bar: f64, nu: f64) -> Result<ThroughputGain> {
    if !(theta_bar > 0.0) {
        return Err(Error::Domain(format!("theta_bar must be positive, got {theta_bar}")));
    }
    let s = (0.5 * nu).sinh();
    let denom = (1.0 + theta_bar) * (1.0 + theta_bar);
    // cosh ν − 1 = 2 sinh²(ν/2)
    Ok(ThroughputGain {
        gain: (4.0 * theta_bar * s * s / denom).ln_1p(),
        quadratic_bound: (theta_bar * nu * nu / denom).ln_1p(),
    })
}
