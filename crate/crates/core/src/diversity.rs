//! The diversity polynomial
//! `D_n(p,δ) = Σ_{k=1}^n C(n,k) C(δ−1,k−1) p^k`
//! in its binomial, `(1−δ)`-expansion and δ-polynomial forms, plus the
//! analytic special cases.
//!
//! All public evaluators accept the closed range `δ ∈ [0, 1]`; the
//! endpoints are the fully correlated and the independent limits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::{binomial, ln_gamma, real_binomial, real_binomial_dd, stirling_table};
use crate::xprec::{DoubleDouble, NeumaierSum};

/// Working precision of the alternating sums downstream of `D_n`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Precision {
    /// f64 with compensated summation; `n <= 30`.
    #[default]
    Standard,
    /// Double-double rescue enabled throughout; `n <= 100`.
    High,
}

impl Precision {
    pub fn max_n(self) -> u32 {
        match self {
            Precision::Standard => 30,
            Precision::High => 100,
        }
    }

    pub fn check(self, n: u32) -> Result<()> {
        if n == 0 {
            return Err(Error::Domain("number of slots must be at least 1".into()));
        }
        if n > self.max_n() {
            return Err(Error::OutOfRange(format!(
                "n = {n} exceeds the cap of {} for {self:?} precision",
                self.max_n()
            )));
        }
        Ok(())
    }
}

/// Algebraic form used to evaluate `D_n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiversityForm {
    Binomial,
    OneMinusDeltaExpansion,
    DeltaPolynomial,
}

/// A single evaluation of `D_n(p, δ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiversityEval {
    pub n: u32,
    pub p: f64,
    pub delta: f64,
    pub form: DiversityForm,
    pub value: f64,
}

fn check_args(n: u32, p: f64, delta: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::Domain("n must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("p = {p} outside [0, 1]")));
    }
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::Domain(format!("delta = {delta} outside [0, 1]")));
    }
    Ok(())
}

/// Validated evaluation in the requested form.
pub fn evaluate(n: u32, p: f64, delta: f64, form: DiversityForm) -> Result<DiversityEval> {
    check_args(n, p, delta)?;
    if n as usize >= stirling_table().max_n() && form != DiversityForm::Binomial {
        return Err(Error::OutOfRange(format!("n = {n} beyond the Stirling table")));
    }
    let value = match form {
        DiversityForm::Binomial => div_poly(n, p, delta),
        DiversityForm::OneMinusDeltaExpansion => div_poly_one_minus_delta(n, p, delta),
        DiversityForm::DeltaPolynomial => div_poly_delta_form(n, p, delta),
    };
    Ok(DiversityEval {
        n,
        p,
        delta,
        form,
        value,
    })
}

/// Binomial-form `D_n(p, δ)`.
///
/// Terms alternate in sign. The f64 sum is compensated; when its
/// condition number exceeds 1e6 the value is recomputed in double-double.
pub fn div_poly(n: u32, p: f64, delta: f64) -> f64 {
    let mut acc = NeumaierSum::new();
    let mut pk = 1.0;
    for k in 1..=n {
        pk *= p;
        acc.add(binomial(n, k) * real_binomial(delta - 1.0, k - 1) * pk);
    }
    if acc.condition() <= 1e6 {
        acc.sum()
    } else {
        div_poly_dd(n, p, delta).to_f64()
    }
}

/// `D_n` in double-double, from the slot increments
/// `D_{m+1} − D_m = p Σ_j C(m,j) p^j (1−p)^{m−j} (δ)_j / j!`,
/// where `(δ)_j` is the rising factorial. Every term is non-negative, so
/// the only error is rounding of order 1e-31 relative.
pub fn div_poly_dd(n: u32, p: f64, delta: f64) -> DoubleDouble {
    div_poly_dd_sequence(n, p, delta)[n as usize]
}

/// `[D_0, D_1, ..., D_n]` in double-double, with `D_0 = 0`.
pub fn div_poly_dd_sequence(n: u32, p: f64, delta: f64) -> Vec<DoubleDouble> {
    let n = n as usize;
    let pd = DoubleDouble::from_f64(p);
    let q = DoubleDouble::ONE - pd;
    let d = DoubleDouble::from_f64(delta);
    // rising[j] = (δ)_j / j!
    let mut rising = Vec::with_capacity(n);
    let mut r = DoubleDouble::ONE;
    for j in 0..n {
        rising.push(r);
        r = r * (d + j as f64) / (j + 1) as f64;
    }
    // Row m of the binomial pmf, updated in place: pmf[j] = C(m,j) p^j q^{m−j}.
    let mut pmf = vec![DoubleDouble::ZERO; n.max(1)];
    pmf[0] = DoubleDouble::ONE;
    let mut out = Vec::with_capacity(n + 1);
    let mut total = DoubleDouble::ZERO;
    out.push(total);
    for m in 0..n {
        if m > 0 {
            for j in (1..=m).rev() {
                pmf[j] = pmf[j] * q + pmf[j - 1] * pd;
            }
            pmf[0] *= q;
        }
        let inc: DoubleDouble = (0..=m).map(|j| pmf[j] * rising[j]).sum();
        total += inc * pd;
        out.push(total);
    }
    out
}

/// Binomial-form sum evaluated term by term in double-double.
pub fn div_poly_binomial_dd(n: u32, p: f64, delta: f64) -> DoubleDouble {
    let pd = DoubleDouble::from_f64(p);
    let mut pk = DoubleDouble::ONE;
    let mut sum = DoubleDouble::ZERO;
    for k in 1..=n {
        pk *= pd;
        sum += real_binomial_dd(delta - 1.0, k - 1) * pk * binomial(n, k);
    }
    sum
}

/// `D_n` via the expansion in powers of `(1−δ)` with exact Stirling
/// numbers: `Σ_k C(n,k) p^k/Γ(k) Σ_j (−1)^j s(k−1,j) (1−δ)^j`.
pub fn div_poly_one_minus_delta(n: u32, p: f64, delta: f64) -> f64 {
    let table = stirling_table();
    let x = DoubleDouble::from_f64(1.0) - delta;
    let mut acc = NeumaierSum::new();
    let mut pk = 1.0;
    let mut fact = DoubleDouble::ONE; // (k−1)!
    for k in 1..=n {
        pk *= p;
        if k > 1 {
            fact *= f64::from(k - 1);
        }
        let row = table.row(k as usize - 1).expect("n within the Stirling table");
        let mut inner = DoubleDouble::ZERO;
        let mut xj = DoubleDouble::ONE;
        for (j, s) in row.iter().enumerate() {
            let term = DoubleDouble::from_bigint(s) * xj;
            inner += if j % 2 == 0 { term } else { -term };
            xj *= x;
        }
        acc.add((inner / fact).to_f64() * binomial(n, k) * pk);
    }
    acc.sum()
}

/// `D_n` as a polynomial in δ: `Σ_k C(n,k) p^k/Γ(k) Σ_{j=1}^k s(k,j) δ^{j−1}`.
pub fn div_poly_delta_form(n: u32, p: f64, delta: f64) -> f64 {
    let table = stirling_table();
    let d = DoubleDouble::from_f64(delta);
    let mut acc = NeumaierSum::new();
    let mut pk = 1.0;
    let mut fact = DoubleDouble::ONE;
    for k in 1..=n {
        pk *= p;
        if k > 1 {
            fact *= f64::from(k - 1);
        }
        let row = table.row(k as usize).expect("n within the Stirling table");
        let mut inner = DoubleDouble::ZERO;
        let mut dj = DoubleDouble::ONE;
        for s in row.iter().skip(1) {
            inner += DoubleDouble::from_bigint(s) * dj;
            dj *= d;
        }
        acc.add((inner / fact).to_f64() * binomial(n, k) * pk);
    }
    acc.sum()
}

/// Aggregate of the `j = 1` terms of the δ-polynomial form, i.e. the δ = 0 value.
pub fn delta_form_constant_term(n: u32, p: f64) -> f64 {
    div_poly_delta_form(n, p, 0.0)
}

/// First-order expansion about δ = 1:
/// `np + (1−δ) Σ_{k=2}^n C(n,k) (−1)^{k+1} p^k/(k−1)`.
///
/// Exact for `n <= 2`; a useful approximation when `1−δ <= 1/3`.
pub fn div_poly_delta_up1_approx(n: u32, p: f64, delta: f64) -> f64 {
    let mut acc = NeumaierSum::new();
    let mut pk = p;
    for k in 2..=n {
        pk *= p;
        let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
        acc.add(sign * binomial(n, k) * pk / f64::from(k - 1));
    }
    f64::from(n) * p + (1.0 - delta) * acc.sum()
}

/// `D_n(1, δ) = Γ(n+δ)/(Γ(n)Γ(1+δ))`, the all-transmit case.
pub fn simo_diversity(n: u32, delta: f64) -> f64 {
    let n = f64::from(n);
    let lg = |x: f64| ln_gamma(x).expect("positive argument");
    (lg(n + delta) - lg(n) - lg(1.0 + delta)).exp()
}

/// δ → 0 limit `1 − (1−p)^n`.
pub fn limit_full_correlation(n: u32, p: f64) -> f64 {
    -(f64::from(n) * (-p).ln_1p()).exp_m1()
}

/// δ → 1 limit `np`.
pub fn limit_independent(n: u32, p: f64) -> f64 {
    f64::from(n) * p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::gamma;

    fn grid() -> impl Iterator<Item = f64> {
        (0..=10).map(|i| f64::from(i) / 10.0)
    }

    #[test]
    fn listed_values() {
        for p in grid() {
            for d in grid() {
                assert_eq!(div_poly(1, p, d), p);
                let d2 = 2.0 * p + (d - 1.0) * p * p;
                assert!((div_poly(2, p, d) - d2).abs() < 1e-15);
                assert!((div_poly_one_minus_delta(2, p, d) - (2.0 * p - p * p * (1.0 - d))).abs() < 1e-15);
                assert!((div_poly_delta_up1_approx(2, p, d) - d2).abs() < 1e-15);
            }
        }
        assert_eq!(div_poly(2, 0.5, 0.5), 0.875);
        for n in 1..=20 {
            assert!((div_poly(n, 0.37, 1.0) - f64::from(n) * 0.37).abs() < 1e-13);
            assert!((div_poly(n, 0.37, 0.0) - limit_full_correlation(n, 0.37)).abs() < 1e-14);
            assert!((div_poly_one_minus_delta(4, 0.37, 1.0) - 4.0 * 0.37).abs() < 1e-15);
            assert!((delta_form_constant_term(n, 0.37) - limit_full_correlation(n, 0.37)).abs() < 1e-13);
            assert_eq!(div_poly_delta_form(n, 0.0, 0.4), 0.0);
        }
    }

    #[test]
    fn extended_precision_fixtures() {
        // 50-digit references.
        let v = div_poly_dd(30, 0.9, 0.25).to_f64();
        assert!((v - 2.505_236_461_724_625_119_4).abs() < 1e-15);
        let v = div_poly_dd(100, 0.7, 0.5).to_f64();
        assert!((v - 9.418_734_167_668_644_275).abs() < 1e-14);
        assert!((div_poly(30, 0.9, 0.25) - 2.505_236_461_724_625_119_4).abs() < 1e-14);
        let v = div_poly_dd(5, 0.3, 0.6);
        let w = div_poly_binomial_dd(5, 0.3, 0.6);
        assert!((v - w).abs().to_f64() < 1e-30);
    }

    #[test]
    fn three_forms_agree() {
        for n in 1..=20 {
            for p in grid() {
                for d in grid() {
                    let b = div_poly(n, p, d);
                    let tol = 1e-10 * b.abs().max(1.0);
                    let s1 = div_poly_one_minus_delta(n, p, d);
                    let s2 = div_poly_delta_form(n, p, d);
                    assert!((b - s1).abs() <= tol, "n={n} p={p} d={d}: {b} vs {s1}");
                    assert!((b - s2).abs() <= tol, "n={n} p={p} d={d}: {b} vs {s2}");
                }
            }
        }
        let e = evaluate(3, 0.4, 0.7, DiversityForm::OneMinusDeltaExpansion).unwrap();
        assert!((e.value - div_poly(3, 0.4, 0.7)).abs() < 1e-15);
        let e = evaluate(5, 0.3, 0.6, DiversityForm::DeltaPolynomial).unwrap();
        assert!((e.value - div_poly(5, 0.3, 0.6)).abs() < 1e-15);
        assert!(evaluate(0, 0.3, 0.6, DiversityForm::Binomial).is_err());
        assert!(evaluate(3, 1.3, 0.6, DiversityForm::Binomial).is_err());
    }

    #[test]
    fn range_and_shape() {
        for n in 1..=20 {
            for d in grid() {
                for p in grid() {
                    let v = div_poly(n, p, d);
                    let lo = limit_full_correlation(n, p);
                    let hi = limit_independent(n, p);
                    // div_poly promises ~1e-10 relative (condition number up to 1e6).
                    assert!(v >= lo - 1e-10 && v <= hi + 1e-10, "n={n} p={p} d={d}");
                }
                // Concave increasing in p.
                let h = 0.05;
                let vals: Vec<f64> = (0..=20).map(|i| div_poly(n, f64::from(i) * h, d)).collect();
                for w in vals.windows(3) {
                    assert!(w[1] - w[0] >= -1e-10);
                    assert!(w[2] - 2.0 * w[1] + w[0] <= 1e-10);
                }
            }
            // Convex increasing in δ.
            for p in grid() {
                let vals: Vec<f64> = (0..=20).map(|i| div_poly(n, p, f64::from(i) * 0.05)).collect();
                for w in vals.windows(3) {
                    assert!(w[1] - w[0] >= -1e-10);
                    assert!(w[2] - 2.0 * w[1] + w[0] >= -1e-10);
                }
            }
        }
    }

    #[test]
    fn polynomial_degree_in_p() {
        // The n-th finite difference is constant and non-zero; the (n+1)-th vanishes.
        for n in 1..=8u32 {
            let d = 0.35;
            let h = 0.1;
            let xs: Vec<f64> = (0..=n + 1).map(|i| div_poly(n, f64::from(i) * h, d)).collect();
            let diff = |vals: &[f64], order: usize| -> Vec<f64> {
                let mut v = vals.to_vec();
                for _ in 0..order {
                    v = v.windows(2).map(|w| w[1] - w[0]).collect();
                }
                v
            };
            let dn = diff(&xs, n as usize);
            let dn1 = diff(&xs, n as usize + 1);
            // Leading coefficient C(δ−1,n−1) times n! h^n.
            let lead = real_binomial(d - 1.0, n - 1) * gamma(f64::from(n) + 1.0) * h.powi(n as i32);
            assert!((dn[0] - lead).abs() < 1e-10, "n={n}");
            assert!(lead.abs() > 1e-12);
            assert!(dn1[0].abs() < 1e-10);
        }
    }

    #[test]
    fn falling_factorial_identity() {
        for i in 1..10 {
            let d = f64::from(i) / 10.0;
            for k in 1..=10u32 {
                let kf = f64::from(k);
                let g = gamma(d) / (gamma(kf) * gamma(d - kf + 1.0));
                let f = real_binomial(d - 1.0, k - 1);
                assert!((f - g).abs() <= 1e-12 * g.abs().max(1e-300), "d={d} k={k}");
            }
        }
    }

    #[test]
    fn simo_form() {
        for n in 1..=25 {
            for d in grid() {
                let s = simo_diversity(n, d);
                assert!((s - div_poly(n, 1.0, d)).abs() < 1e-10 * s, "n={n} d={d}");
            }
            assert_eq!(simo_diversity(n, 0.0), 1.0);
        }
        assert!((simo_diversity(2, 0.5) - 1.5).abs() < 1e-15);
        assert!((simo_diversity(100, 0.5) - div_poly_dd(100, 1.0, 0.5).to_f64()).abs() < 1e-12);
    }

    #[test]
    fn delta_near_one_expansion() {
        // The error is second order in (1−δ) with a bounded constant.
        let (n, p) = (4, 0.5);
        let mut ratios = Vec::new();
        for i in 1..=6 {
            let eps = 0.2 / f64::from(1 << i);
            let err = (div_poly(n, p, 1.0 - eps) - div_poly_delta_up1_approx(n, p, 1.0 - eps)).abs();
            ratios.push(err / (eps * eps));
        }
        let c = ratios.iter().cloned().fold(0.0, f64::max);
        assert!(c < 0.25, "{ratios:?}");
        let last = ratios[ratios.len() - 1];
        let prev = ratios[ratios.len() - 2];
        assert!((last / prev - 1.0).abs() < 0.05);
        assert_eq!(div_poly_delta_up1_approx(4, 0.5, 1.0), 2.0);
        let err = (div_poly(4, 0.5, 0.8) - div_poly_delta_up1_approx(4, 0.5, 0.8)).abs();
        assert!(err <= c * 0.04 * 1.5);
    }

    #[test]
    fn precision_caps() {
        assert!(Precision::Standard.check(30).is_ok());
        assert!(Precision::Standard.check(31).is_err());
        assert!(Precision::High.check(100).is_ok());
        assert!(Precision::High.check(0).is_err());
    }
}
