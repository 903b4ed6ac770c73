//! Local delay: the index `M` of the first successful slot, for a fixed
//! link distance and for a Rayleigh-distributed one held fixed over time.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::diversity::{div_poly, div_poly_dd_sequence};
use crate::error::{domain, Error, Result};
use crate::joint_stats::{joint_outage, LinkModel};
use crate::network::{contention, gamma_product, NetworkParams};
use crate::roots::bisect;
use crate::specfun::{binomial, gauss_2f1, ln_gamma};
use crate::xprec::{DoubleDouble, Fixed, NeumaierSum};

/// How the link distance is drawn.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum DistanceMode {
    Fixed { r: f64 },
    /// Nearest receiver of a PPP of intensity `mu`: `R² ~ Exp(πμ)`,
    /// mean distance `1/(2√μ)`.
    Rayleigh { mu: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DelayModel {
    /// `r` is ignored in Rayleigh mode.
    pub base: NetworkParams,
    pub distance: DistanceMode,
}

impl DelayModel {
    pub fn fixed(base: NetworkParams) -> Result<Self> {
        base.validate()?;
        Ok(Self {
            base,
            distance: DistanceMode::Fixed { r: base.r },
        })
    }

    pub fn rayleigh(base: NetworkParams, mu: f64) -> Result<Self> {
        base.validate()?;
        if !(mu > 0.0 && mu.is_finite()) {
            return domain(format!("receiver intensity must be finite and > 0, got {mu}"));
        }
        Ok(Self {
            base,
            distance: DistanceMode::Rayleigh { mu },
        })
    }

    pub fn mu(&self) -> Option<f64> {
        match self.distance {
            DistanceMode::Rayleigh { mu } => Some(mu),
            DistanceMode::Fixed { .. } => None,
        }
    }

    /// `Δ″ = Δ′/(πμ)`.
    pub fn delta_prime_ratio(&self) -> Result<f64> {
        let mu = self.require_rayleigh()?;
        Ok(contention(&self.base)?.delta_prime / (std::f64::consts::PI * mu))
    }

    /// The single-link model at the fixed distance.
    pub fn link(&self) -> Result<LinkModel> {
        match self.distance {
            DistanceMode::Fixed { r } => LinkModel::from_params(&NetworkParams { r, ..self.base }),
            DistanceMode::Rayleigh { .. } => Err(Error::Config("link model needs a fixed distance".into())),
        }
    }

    fn require_rayleigh(&self) -> Result<f64> {
        self.mu()
            .ok_or_else(|| Error::Config("operation needs a Rayleigh-distributed link distance".into()))
    }
}

/// `p̃_s^(n) = 1/(1 + Δ″ D_n)`, success in `n` slots averaged over the
/// link distance.
pub fn joint_success_random_distance(model: &DelayModel, n: u32) -> Result<f64> {
    if n == 0 {
        return domain("n must be at least 1");
    }
    let b = model.delta_prime_ratio()?;
    Ok(1.0 / (1.0 + b * div_poly(n, model.base.p, model.base.delta)))
}

/// Second-order expansion of [`joint_success_random_distance`] in `p`.
pub fn joint_success_random_distance_small_p(model: &DelayModel, n: u32) -> Result<f64> {
    let b = model.delta_prime_ratio()?;
    let (p, delta) = (model.base.p, model.base.delta);
    let n = f64::from(n);
    let c2 = n * (n - 1.0) / 2.0;
    Ok(1.0 - n * b * p + (c2 * b * (1.0 - delta) + n * n * b * b) * p * p)
}

/// Every node transmits with probability `p`, the receivers being the
/// idle ones (`μ = (1−p)λ`). The factor `p^n` is the chance that the
/// reference transmitter is active in all `n` slots.
pub fn joint_success_all_transmit(theta: f64, delta: f64, p: f64, n: u32) -> Result<f64> {
    if !(0.0..1.0).contains(&p) {
        return domain(format!("p = {p} outside [0, 1)"));
    }
    let g = theta.powf(delta) * gamma_product(delta)?;
    let q = 1.0 - p;
    Ok(p.powi(n as i32) * q / (q + g * div_poly(n, p, delta)))
}

/// `P(M > n) = p_o^(n)`, with `P(M > 0) = 1`.
pub fn delay_tail_fixed(params: &NetworkParams, n: u32) -> Result<f64> {
    if n == 0 {
        return Ok(1.0);
    }
    joint_outage(&LinkModel::from_params(params)?, n)
}

/// `P(M = n) = Σ_{k=1}^n (−1)^{k+1} C(n−1,k−1) e^{−Δ D_k}`.
pub fn delay_pmf_fixed(params: &NetworkParams, n: u32) -> Result<f64> {
    let link = LinkModel::from_params(params)?;
    delay_pmf_link(&link, n)
}

pub fn delay_pmf_link(link: &LinkModel, n: u32) -> Result<f64> {
    link.precision.check(n)?;
    let mut acc = NeumaierSum::new();
    for k in 1..=n {
        let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
        acc.add(sign * binomial(n - 1, k - 1) * (-link.big_delta * div_poly(k, link.p, link.delta)).exp());
    }
    let value = if acc.condition() <= 1e6 {
        acc.sum()
    } else {
        // Same rescue as the outage sums; D_k from the positive form.
        let d = div_poly_dd_sequence(n, link.p, link.delta);
        let mut sum = DoubleDouble::ZERO;
        let mut binom = DoubleDouble::ONE;
        let mut abs = 0.0;
        for k in 1..=n {
            if k > 1 {
                binom = binom * f64::from(n - k + 1) / f64::from(k - 1);
            }
            let t = binom * (-(d[k as usize] * link.big_delta)).exp();
            abs += t.to_f64();
            sum += if k % 2 == 1 { t } else { -t };
        }
        let v = sum.to_f64();
        if abs > 1e21 * v.abs() {
            return Err(Error::Instability(format!("delay pmf at n = {n} lost all digits")));
        }
        v
    };
    if value < -1e-12 {
        return Err(Error::Instability(format!("negative delay pmf {value} at n = {n}")));
    }
    Ok(value.max(0.0))
}

/// `E M = exp(Δ p/(1−p)^{1−δ})`, finite for every `p < 1`.
pub fn mean_delay_fixed(params: &NetworkParams) -> Result<f64> {
    let link = LinkModel::from_params(params)?;
    mean_delay_link(&link)
}

pub fn mean_delay_link(link: &LinkModel) -> Result<f64> {
    if !(link.p < 1.0) {
        return domain("mean delay needs p < 1");
    }
    Ok((link.big_delta * link.p * (1.0 - link.p).powf(link.delta - 1.0)).exp())
}

/// Whether the interference is the same realization in every slot.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterferenceMode {
    Dependent,
    Independent,
}

/// Outcome of a mean-delay evaluation in Rayleigh mode.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "status")]
pub enum MeanDelay {
    /// `value = partial_sum + tail_estimate`. `tail_uncertainty` bounds
    /// the error of the extrapolated tail; it is 0 for closed forms.
    Finite {
        value: f64,
        partial_sum: f64,
        terms: u32,
        tail_estimate: f64,
        tail_uncertainty: f64,
    },
    Infinite,
    /// The series converges but too slowly to certify the tolerance;
    /// typical just below the critical probability.
    NotConverged {
        partial_sum: f64,
        terms: u32,
        tail_estimate: f64,
        decay_exponent: f64,
    },
}

impl MeanDelay {
    /// Best available number: `∞` when infinite, the extrapolated sum
    /// otherwise.
    pub fn value(&self) -> f64 {
        match *self {
            MeanDelay::Finite { value, .. } => value,
            MeanDelay::Infinite => f64::INFINITY,
            MeanDelay::NotConverged {
                partial_sum,
                tail_estimate,
                ..
            } => partial_sum + tail_estimate,
        }
    }
}

/// Stopping rule of the dependent-mode series.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DelaySeriesControl {
    /// Relative tolerance on the tail uncertainty.
    pub rel_tol: f64,
    /// Upper limit on the number of terms.
    pub max_terms: u32,
}

impl Default for DelaySeriesControl {
    fn default() -> Self {
        Self {
            rel_tol: 1e-3,
            max_terms: 400,
        }
    }
}

/// Mean local delay with the link distance drawn once.
pub fn mean_delay_random(model: &DelayModel, mode: InterferenceMode) -> Result<MeanDelay> {
    mean_delay_random_with(model, mode, &DelaySeriesControl::default())
}

pub fn mean_delay_random_with(model: &DelayModel, mode: InterferenceMode, ctl: &DelaySeriesControl) -> Result<MeanDelay> {
    let b = model.delta_prime_ratio()?;
    let (p, delta) = (model.base.p, model.base.delta);
    let beta = b * p;
    if beta == 0.0 {
        return Ok(closed(1.0));
    }
    match mode {
        InterferenceMode::Independent => Ok(if beta < 1.0 {
            closed(1.0 / (1.0 - beta))
        } else {
            MeanDelay::Infinite
        }),
        InterferenceMode::Dependent => {
            if !(p < 1.0) || !(beta * (1.0 - p).powf(delta - 1.0) < 1.0) {
                return Ok(MeanDelay::Infinite);
            }
            Ok(dependent_series(b, p, delta, ctl))
        }
    }
}

fn closed(value: f64) -> MeanDelay {
    MeanDelay::Finite {
        value,
        partial_sum: value,
        terms: 0,
        tail_estimate: 0.0,
        tail_uncertainty: 0.0,
    }
}

/// `1/(1 + b D_j)` for `j = 0..=n`, with `D_j` from the non-negative
/// increment form, in fixed point.
fn random_success_sequence(b: f64, p: f64, delta: f64, n: usize, bits: u32) -> Vec<Fixed> {
    let one = Fixed::one(bits);
    let pf = Fixed::from_f64(p, bits);
    let q = one.sub(&pf);
    let bf = Fixed::from_f64(b, bits);
    let df = Fixed::from_f64(delta, bits);
    // rising[j] = (δ)_j / j!
    let mut rising = Vec::with_capacity(n);
    let mut r = one.clone();
    for j in 0..n {
        rising.push(r.clone());
        r = r.mul(&df.add(&Fixed::from_f64(j as f64, bits))).div_u64(j as u64 + 1);
    }
    let mut pmf = vec![Fixed::zero(bits); n.max(1)];
    pmf[0] = one.clone();
    let mut d = Fixed::zero(bits);
    let mut out = Vec::with_capacity(n + 1);
    out.push(one.clone());
    for m in 0..n {
        if m > 0 {
            for j in (1..=m).rev() {
                pmf[j] = pmf[j].mul(&q).add(&pmf[j - 1].mul(&pf));
            }
            pmf[0] = pmf[0].mul(&q);
        }
        let inc = (0..=m).fold(Fixed::zero(bits), |acc, j| acc.add(&pmf[j].mul(&rising[j])));
        d = d.add(&inc.mul(&pf));
        out.push(one.div(&one.add(&bf.mul(&d))));
    }
    out
}

/// `Σ_{k≥0} p̃_o^(k)` with `p̃_o^(k) = Σ_j (−1)^j C(k,j)/(1 + Δ″ D_j)`.
///
/// The alternating sums lose up to `k` bits, so they are done in fixed
/// point with `max_terms + 160` fractional bits. The terms decay like a
/// power of `k` whose local exponent drifts towards `1/β_eff` with
/// `β_eff = Δ″p(1−p)^{δ−1}`; the tail is bracketed by power laws with the
/// fitted local exponent and with `1/β_eff`.
fn dependent_series(b: f64, p: f64, delta: f64, ctl: &DelaySeriesControl) -> MeanDelay {
    let kmax = ctl.max_terms.max(16) as usize;
    let bits = kmax as u32 + 160;
    let s = random_success_sequence(b, p, delta, kmax, bits);
    let s_inf = 1.0 / (b * p * (1.0 - p).powf(delta - 1.0));
    let mut row = vec![BigInt::one()];
    let mut terms: Vec<f64> = vec![1.0];
    let mut partial = 1.0;
    let mut bracket = (f64::INFINITY, f64::INFINITY);
    for k in 1..=kmax {
        row = pascal_next(&row);
        let t = alternating_sum(&row, &s, bits);
        if !(t > 0.0) {
            break;
        }
        partial += t;
        terms.push(t);
        if k >= 16 {
            bracket = tail_bracket(&terms, s_inf);
            let half = 0.5 * (bracket.1 - bracket.0) + t;
            if t < 1e-12 * partial || half < 1e-3 * ctl.rel_tol * partial {
                break;
            }
        }
    }
    let n = terms.len() - 1;
    let (lo, hi) = bracket;
    if !hi.is_finite() {
        return MeanDelay::NotConverged {
            partial_sum: partial,
            terms: n as u32,
            tail_estimate: hi,
            decay_exponent: local_exponent(&terms),
        };
    }
    let tail = 0.5 * (lo + hi);
    // Half-width plus one term of slack for the Euler–Maclaurin remainder.
    let uncertainty = 0.5 * (hi - lo) + terms[n];
    let value = partial + tail;
    if uncertainty <= ctl.rel_tol * value {
        MeanDelay::Finite {
            value,
            partial_sum: partial,
            terms: n as u32,
            tail_estimate: tail,
            tail_uncertainty: uncertainty,
        }
    } else {
        MeanDelay::NotConverged {
            partial_sum: partial,
            terms: n as u32,
            tail_estimate: tail,
            decay_exponent: local_exponent(&terms),
        }
    }
}

fn pascal_next(row: &[BigInt]) -> Vec<BigInt> {
    let k = row.len();
    let mut next = Vec::with_capacity(k + 1);
    next.push(BigInt::one());
    for j in 1..k {
        next.push(&row[j - 1] + &row[j]);
    }
    next.push(BigInt::one());
    next
}

/// `Σ_j (−1)^j row[j] s[j]`.
fn alternating_sum(row: &[BigInt], s: &[Fixed], bits: u32) -> f64 {
    let mut acc = BigInt::zero();
    for (j, c) in row.iter().enumerate() {
        let x = c * s[j].raw();
        if j % 2 == 0 {
            acc += x;
        } else {
            acc -= x;
        }
    }
    Fixed::from_raw(acc, bits).to_f64()
}

/// `P(M > n)` for `n = 0..=n_max` with the link distance drawn once and
/// interference dependent across slots: `Σ_j (−1)^j C(n,j)/(1 + Δ″D_j)`.
pub fn delay_tail_random(model: &DelayModel, n_max: u32) -> Result<Vec<f64>> {
    let b = model.delta_prime_ratio()?;
    let (p, delta) = (model.base.p, model.base.delta);
    let n = n_max as usize;
    let bits = n_max + 160;
    let s = random_success_sequence(b, p, delta, n, bits);
    let mut row = vec![BigInt::one()];
    let mut out = Vec::with_capacity(n + 1);
    out.push(1.0);
    for _ in 1..=n {
        row = pascal_next(&row);
        out.push(alternating_sum(&row, &s, bits));
    }
    Ok(out)
}

/// Log-log slope of the terms between `n/2` and `n`.
fn local_exponent(terms: &[f64]) -> f64 {
    let n = terms.len() - 1;
    (terms[n / 2] / terms[n]).ln() / 2f64.ln()
}

fn tail_bracket(terms: &[f64], s_inf: f64) -> (f64, f64) {
    let n = terms.len() - 1;
    let a = power_tail(terms[n], n, local_exponent(terms));
    let b = power_tail(terms[n], n, s_inf);
    (a.min(b), a.max(b))
}

/// `Σ_{k>n} t_n (k/n)^{−s}` through Euler–Maclaurin on the Hurwitz zeta.
fn power_tail(t_n: f64, n: usize, s: f64) -> f64 {
    if !(s > 1.0) {
        return f64::INFINITY;
    }
    let a = (n + 1) as f64;
    let zeta = a.powf(1.0 - s) / (s - 1.0) + 0.5 * a.powf(-s) + s * a.powf(-s - 1.0) / 12.0;
    t_n * (n as f64).powf(s) * zeta
}

/// Where the mean local delay is finite, as a function of `p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DelayRegime {
    /// `p < p_c`: finite with either interference model.
    Finite,
    /// `p_c ≤ p < p_c_ind`: finite only if the interference is independent.
    FiniteIfIndependent,
    /// `p ≥ p_c_ind`: infinite for both.
    Infinite,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalProbabilities {
    /// Root of `Δ″p/(1−p)^{1−δ} = 1`.
    pub p_c: f64,
    /// `min(1, 1/Δ″)`.
    pub p_c_ind: f64,
}

impl CriticalProbabilities {
    pub fn regime(&self, p: f64) -> DelayRegime {
        if p < self.p_c {
            DelayRegime::Finite
        } else if p < self.p_c_ind {
            DelayRegime::FiniteIfIndependent
        } else {
            DelayRegime::Infinite
        }
    }
}

pub fn critical_probabilities(model: &DelayModel) -> Result<CriticalProbabilities> {
    let b = model.delta_prime_ratio()?;
    let delta = model.base.delta;
    let p_c_ind = (1.0 / b).min(1.0);
    // The left-hand side grows from 0 to ∞ on (0,1), so the root always exists.
    let f = |p: f64| b * p * (1.0 - p).powf(delta - 1.0) - 1.0;
    let hi = 1.0 - 1e-15;
    let p_c = if f(hi) <= 0.0 { hi } else { bisect(f, 0.0, hi, 1e-10, f64::INFINITY)? };
    if p_c > p_c_ind {
        return Err(Error::Instability(format!("p_c = {p_c} above p_c_ind = {p_c_ind}")));
    }
    Ok(CriticalProbabilities { p_c, p_c_ind })
}

/// Delay pmf under independent interference in Rayleigh mode.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndependentPmf {
    /// `Γ(n+1)Γ(1+1/β)/(β n Γ(n+1+1/β))` with `β = Δ″p`.
    pub exact: f64,
    /// `Γ(1+1/β) n^{−1/β}/(nβ)`, the leading-order power law. It lies
    /// above `exact` and the ratio tends to 1 as `n` grows.
    pub asymptotic: f64,
}

pub fn delay_pmf_independent(model: &DelayModel, n: u32) -> Result<IndependentPmf> {
    if n == 0 {
        return domain("n must be at least 1");
    }
    let beta = model.delta_prime_ratio()? * model.base.p;
    independent_pmf_beta(beta, n)
}

pub fn independent_pmf_beta(beta: f64, n: u32) -> Result<IndependentPmf> {
    if !(beta > 0.0) {
        return Ok(IndependentPmf {
            exact: if n == 1 { 1.0 } else { 0.0 },
            asymptotic: if n == 1 { 1.0 } else { 0.0 },
        });
    }
    let s = 1.0 / beta;
    let nf = f64::from(n);
    let lead = ln_gamma(1.0 + s)? - (beta * nf).ln();
    let exact = (lead + ln_gamma(nf + 1.0)? - ln_gamma(nf + 1.0 + s)?).exp();
    let asymptotic = (lead - s * nf.ln()).exp();
    if exact > asymptotic * (1.0 + 1e-12) {
        return Err(Error::Instability(format!(
            "gamma-ratio pmf {exact} exceeds its power law {asymptotic}"
        )));
    }
    Ok(IndependentPmf { exact, asymptotic })
}

/// `P(M > n)` under independent interference in Rayleigh mode,
/// `Σ_k (−1)^k C(n,k)/(1+kβ) = Γ(n+1)Γ(1+1/β)/Γ(n+1+1/β)`, from
/// `1/(1+kβ) = ∫_0^1 t^{kβ} dt`.
pub fn delay_tail_independent(beta: f64, n: u32) -> Result<f64> {
    if n == 0 {
        return Ok(1.0);
    }
    if !(beta > 0.0) {
        return Ok(0.0);
    }
    let s = 1.0 / beta;
    let nf = f64::from(n);
    Ok((ln_gamma(nf + 1.0)? + ln_gamma(1.0 + s)? - ln_gamma(nf + 1.0 + s)?).exp())
}

/// `Σ_{k=1}^n (−1)^{k+1} C(n−1,k−1)/(1+kβ)`, exactly.
pub fn independent_pmf_rational(beta: &BigRational, n: u32) -> BigRational {
    let mut sum = BigRational::zero();
    let mut c = BigInt::one();
    for k in 1..=n {
        if k > 1 {
            c = c * BigInt::from(n - k + 1) / BigInt::from(k - 1);
        }
        let term = BigRational::from_integer(c.clone()) / (BigRational::one() + beta * BigInt::from(k));
        if k % 2 == 1 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    sum
}

/// Partial sum of `Σ_n Σ_{k≤n} (−1)^k C(n,k)/(1+kβ)` against `1/(1−β)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BinomialIdentity {
    pub beta: BigRational,
    pub n_max: u32,
    pub partial: BigRational,
    pub target: BigRational,
    pub residual: f64,
}

/// Exact evaluation. Swapping the sums turns the double sum into
/// `Σ_k (−1)^k C(n_max+1, k+1)/(1+kβ)`.
pub fn binomial_identity_check(beta: f64, n_max: u32) -> Result<BinomialIdentity> {
    if !(0.0..1.0).contains(&beta) {
        return domain(format!("beta = {beta} outside [0, 1)"));
    }
    let b = BigRational::from_float(beta).expect("finite");
    Ok(binomial_identity_exact(&b, n_max))
}

pub fn binomial_identity_exact(beta: &BigRational, n_max: u32) -> BinomialIdentity {
    let mut partial = BigRational::zero();
    let mut c = BigInt::from(n_max + 1); // C(n_max+1, k+1) at k = 0
    for k in 0..=n_max {
        if k > 0 {
            c = c * BigInt::from(n_max + 1 - k) / BigInt::from(k + 1);
        }
        let term = BigRational::from_integer(c.clone()) / (BigRational::one() + beta * BigInt::from(k));
        if k % 2 == 0 {
            partial += term;
        } else {
            partial -= term;
        }
    }
    let target = (BigRational::one() - beta).recip();
    let residual = (&partial - &target).to_f64().unwrap_or(f64::NAN);
    BinomialIdentity {
        beta: beta.clone(),
        n_max,
        partial,
        target,
        residual,
    }
}

/// Mean-delay estimate from the first-order Taylor expansion of the
/// outage probabilities in Δ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaylorMeanDelay {
    pub n: u32,
    /// `Σ_{k=0}^n` of the linearised outages.
    pub m_hat_n: f64,
    /// Limit `1 + Δp(1−p)^{δ−1}`.
    pub m_hat: f64,
}

pub fn taylor_mean_delay(params: &NetworkParams, n: u32) -> Result<TaylorMeanDelay> {
    let link = LinkModel::from_params(params)?;
    taylor_mean_delay_link(&link, n)
}

pub fn taylor_mean_delay_link(link: &LinkModel, n: u32) -> Result<TaylorMeanDelay> {
    let LinkModel { big_delta, p, delta, .. } = *link;
    if !(p < 1.0) {
        return domain("mean delay needs p < 1");
    }
    if !(delta < 1.0) {
        return domain("Taylor estimate needs delta < 1");
    }
    let m_hat = 1.0 + big_delta * p * (1.0 - p).powf(delta - 1.0);
    let nf = f64::from(n);
    let tail = if p == 0.0 || big_delta == 0.0 {
        0.0
    } else {
        let h = gauss_2f1(1.0, nf + 1.0 - delta, nf + 1.0, p)?;
        let ln_front = (nf + 1.0) * p.ln() + ln_gamma(nf + 1.0 - delta)? - ln_gamma(nf + 1.0)? - ln_gamma(1.0 - delta)?;
        big_delta * ln_front.exp() * h
    };
    Ok(TaylorMeanDelay {
        n,
        m_hat_n: m_hat - tail,
        m_hat,
    })
}
