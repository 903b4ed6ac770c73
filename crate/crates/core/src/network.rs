//! Link-in-Poisson-field parameters and the contention constants derived
//! from them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::ln_gamma;

/// Smallest admissible distance of δ from 0 and 1.
pub const DELTA_MARGIN: f64 = 1e-4;

/// A reference link of length `r` in a PPP of interferers.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NetworkParams {
    /// Interferer intensity (nodes per unit area).
    pub lambda: f64,
    /// Link distance.
    pub r: f64,
    /// SIR threshold, linear scale.
    pub theta: f64,
    /// `2/α`.
    pub delta: f64,
    /// ALOHA transmit probability.
    pub p: f64,
}

impl NetworkParams {
    /// Validated constructor. `lambda = 0` is accepted (empty field).
    pub fn new(lambda: f64, r: f64, theta: f64, delta: f64, p: f64) -> Result<Self> {
        let params = Self {
            lambda,
            r,
            theta,
            delta,
            p,
        };
        params.validate()?;
        Ok(params)
    }

    /// Same as [`NetworkParams::new`] with the path-loss exponent `α > 2`.
    pub fn from_alpha(lambda: f64, r: f64, theta: f64, alpha: f64, p: f64) -> Result<Self> {
        if !(alpha > 2.0) {
            return Err(Error::Domain(format!("path-loss exponent must exceed 2, got {alpha}")));
        }
        Self::new(lambda, r, theta, 2.0 / alpha, p)
    }

    pub fn alpha(&self) -> f64 {
        2.0 / self.delta
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |c: bool, what: &str| {
            if c {
                Ok(())
            } else {
                Err(Error::Domain(what.to_string()))
            }
        };
        ok(self.lambda >= 0.0 && self.lambda.is_finite(), "lambda must be finite and >= 0")?;
        ok(self.r > 0.0 && self.r.is_finite(), "r must be finite and > 0")?;
        ok(self.theta > 0.0 && self.theta.is_finite(), "theta must be finite and > 0")?;
        ok(self.delta > 0.0 && self.delta < 1.0, "delta must lie in (0, 1)")?;
        ok((0.0..=1.0).contains(&self.p), "p must lie in [0, 1]")
    }

    pub fn with_p(self, p: f64) -> Self {
        Self { p, ..self }
    }

    pub fn with_theta(self, theta: f64) -> Self {
        Self { theta, ..self }
    }

    pub fn with_lambda(self, lambda: f64) -> Self {
        Self { lambda, ..self }
    }

    pub fn with_delta(self, delta: f64) -> Self {
        Self { delta, ..self }
    }

    /// Picks λ so that the contention Δ equals `big_delta`, keeping r, θ, δ.
    pub fn with_contention(self, big_delta: f64) -> Result<Self> {
        let c = contention(&self.with_lambda(1.0))?;
        Ok(self.with_lambda(big_delta / c.big_delta))
    }

    pub fn contention(&self) -> Result<Contention> {
        contention(self)
    }
}

/// Contention constants of a parameter set.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Contention {
    /// `Δ = λπr²θ^δ Γ(1+δ)Γ(1−δ)`.
    pub big_delta: f64,
    /// `Δ̂ = Δ/θ^δ`.
    pub delta_hat: f64,
    /// `Δ′ = Δ/r²`.
    pub delta_prime: f64,
    /// Spatial contention `γ = πθ^δ Γ(1+δ)Γ(1−δ)`.
    pub gamma_sc: f64,
}

/// `Γ(1+δ)Γ(1−δ)`, through log-gamma.
pub fn gamma_product(delta: f64) -> Result<f64> {
    check_delta(delta)?;
    Ok((ln_gamma(1.0 + delta)? + ln_gamma(1.0 - delta)?).exp())
}

fn check_delta(delta: f64) -> Result<()> {
    if !(DELTA_MARGIN..=1.0 - DELTA_MARGIN).contains(&delta) {
        return Err(Error::Domain(format!(
            "delta = {delta} outside [{DELTA_MARGIN}, {}]",
            1.0 - DELTA_MARGIN
        )));
    }
    Ok(())
}

pub fn contention(params: &NetworkParams) -> Result<Contention> {
    params.validate()?;
    let g = gamma_product(params.delta)?;
    let theta_d = params.theta.powf(params.delta);
    let gamma_sc = std::f64::consts::PI * theta_d * g;
    let delta_prime = params.lambda * gamma_sc;
    let big_delta = delta_prime * params.r * params.r;
    Ok(Contention {
        big_delta,
        delta_hat: big_delta / theta_d,
        delta_prime,
        gamma_sc,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn caption_values() {
        // λπr² = 1/2, θ = 5, δ = 1/2.
        let p = NetworkParams::new(0.5 / PI, 1.0, 5.0, 0.5, 0.5).unwrap();
        let c = contention(&p).unwrap();
        assert!((c.big_delta - 0.5 * 5f64.sqrt() * PI / 2.0).abs() < 1e-14);
        assert!((c.big_delta - 1.756_203_682_760_182).abs() < 1e-12);

        let p = NetworkParams::new(PI.powi(-2), 1.0, 1.0, 0.5, 0.5).unwrap();
        let c = contention(&p).unwrap();
        assert!((c.big_delta - 0.5).abs() < 1e-15);
        assert_eq!(c.delta_hat, c.big_delta);
    }

    #[test]
    fn identities() {
        for i in 1..20 {
            let d = f64::from(i) / 20.0;
            let g = gamma_product(d).unwrap();
            let reflect = PI * d / (PI * d).sin();
            assert!((g / reflect - 1.0).abs() < 1e-12, "δ={d}");
            let p = NetworkParams::new(0.3, 1.7, 2.5, d, 0.4).unwrap();
            let c = contention(&p).unwrap();
            assert!((c.big_delta - p.lambda * p.r * p.r * c.gamma_sc).abs() <= 1e-14 * c.big_delta);
            assert!(c.big_delta > 0.0 && c.delta_hat > 0.0 && c.delta_prime > 0.0 && c.gamma_sc > 0.0);
        }
    }

    #[test]
    fn monotone_in_each_parameter() {
        let base = NetworkParams::new(0.2, 1.0, 2.0, 0.6, 0.5).unwrap();
        let d0 = contention(&base).unwrap().big_delta;
        for bumped in [base.with_lambda(0.3), NetworkParams { r: 1.1, ..base }, base.with_theta(2.2)] {
            assert!(contention(&bumped).unwrap().big_delta > d0);
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(NetworkParams::new(1.0, 1.0, 1.0, 1.0, 0.5).is_err());
        assert!(NetworkParams::new(1.0, 0.0, 1.0, 0.5, 0.5).is_err());
        assert!(NetworkParams::new(1.0, 1.0, 1.0, 0.5, 1.5).is_err());
        assert!(NetworkParams::from_alpha(1.0, 1.0, 1.0, 2.0, 0.5).is_err());
        let tiny = NetworkParams::new(1.0, 1.0, 1.0, 5e-5, 0.5).unwrap();
        assert!(contention(&tiny).is_err());
        assert!((NetworkParams::from_alpha(1.0, 1.0, 1.0, 4.0, 0.5).unwrap().delta - 0.5).abs() < 1e-16);
    }
}
