//! Real special functions: log-gamma, beta, real-argument binomials,
//! Stirling numbers of the first kind, and the Gauss hypergeometric
//! function on the half-line `z < 1`.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::xprec::DoubleDouble;

/// `ln Γ(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("ln_gamma requires x > 0, got {x}")));
    }
    Ok(libm::lgamma(x))
}

/// `Γ(x)` on the real line; poles return NaN.
pub fn gamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.floor() {
        return f64::NAN;
    }
    libm::tgamma(x)
}

/// `1/Γ(x)`, which is entire: zero at the poles of Γ.
pub fn rgamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.floor() {
        return 0.0;
    }
    if x > 171.0 {
        return (-libm::lgamma(x)).exp();
    }
    1.0 / libm::tgamma(x)
}

/// `Γ(a)/Γ(b)` for positive arguments, through log-gamma.
pub fn gamma_ratio(a: f64, b: f64) -> Result<f64> {
    Ok((ln_gamma(a)? - ln_gamma(b)?).exp())
}

/// Euler's beta function `B(a,b)` for `a, b > 0`.
pub fn beta(a: f64, b: f64) -> Result<f64> {
    Ok((ln_gamma(a)? + ln_gamma(b)? - ln_gamma(a + b)?).exp())
}

/// Generalized binomial `C(a, k) = a(a-1)···(a-k+1)/k!`.
///
/// Evaluated as a running product so zero and negative factors are exact.
pub fn real_binomial(a: f64, k: u32) -> f64 {
    let mut acc = 1.0;
    for i in 0..k {
        let fi = f64::from(i);
        acc *= (a - fi) / (fi + 1.0);
    }
    acc
}

/// [`real_binomial`] carried out in double-double arithmetic.
pub fn real_binomial_dd(a: f64, k: u32) -> DoubleDouble {
    let mut acc = DoubleDouble::ONE;
    let a = DoubleDouble::from_f64(a);
    for i in 0..k {
        let fi = f64::from(i);
        acc = acc * (a - fi) / (fi + 1.0);
    }
    acc
}

/// Integer binomial coefficient, correctly rounded to `f64`.
pub fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    if n > 120 {
        return binomial_big(n, k).to_f64().unwrap_or(f64::INFINITY);
    }
    // Each partial product is itself a binomial times at most n, well inside u128.
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * u128::from(n - i) / u128::from(i + 1);
    }
    acc as f64
}

/// Exact integer binomial coefficient.
pub fn binomial_big(n: u32, k: u32) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Truncation controls for the hypergeometric series.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesControl {
    pub max_terms: usize,
    /// Required relative size of the last retained term.
    pub tol: f64,
}

impl Default for SeriesControl {
    fn default() -> Self {
        Self {
            max_terms: 200_000,
            tol: 1e-10,
        }
    }
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

/// Defining power series of ₂F₁, summed until terms drop below ~1e-16 of
/// the partial sum. Fails if the cap is hit before `ctl.tol` is reached.
fn series_2f1(a: f64, b: f64, c: f64, z: f64, ctl: &SeriesControl) -> Result<f64> {
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut comp = 0.0;
    let mut last = f64::INFINITY;
    for k in 0..ctl.max_terms {
        let kf = k as f64;
        term *= (a + kf) * (b + kf) / ((c + kf) * (kf + 1.0)) * z;
        // Neumaier step; the transformed arguments can produce alternating terms.
        let t = sum + term;
        if sum.abs() >= term.abs() {
            comp += (sum - t) + term;
        } else {
            comp += (term - t) + sum;
        }
        sum = t;
        let rel = term.abs() / (sum + comp).abs().max(f64::MIN_POSITIVE);
        if term == 0.0 || (rel < 1e-17 && last < 1e-17) {
            return Ok(sum + comp);
        }
        last = rel;
    }
    if last <= ctl.tol {
        Ok(sum + comp)
    } else {
        Err(Error::NonConvergence {
            terms: ctl.max_terms,
            tail: last,
        })
    }
}

/// Gauss hypergeometric function ₂F₁(a,b;c;z) for real `z < 1`, with the
/// default term cap and tolerance.
pub fn gauss_2f1(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    gauss_2f1_with(a, b, c, z, &SeriesControl::default())
}

/// ₂F₁ with explicit truncation controls.
///
/// The direct series is used on `[-0.5, 1)`. On `[-2, -0.5)` the Pfaff
/// transformation maps the argument into `[1/3, 2/3]`. Below `-2` the
/// `1/z` connection formula is used when `a - b` is not an integer;
/// otherwise Pfaff again, which converges but slowly.
pub fn gauss_2f1_with(a: f64, b: f64, c: f64, z: f64, ctl: &SeriesControl) -> Result<f64> {
    if !(a.is_finite() && b.is_finite() && c.is_finite() && z.is_finite()) {
        return Err(Error::Domain("gauss_2f1 arguments must be finite".into()));
    }
    if is_nonpositive_integer(c) {
        return Err(Error::Domain(format!("gauss_2f1 undefined for c = {c}")));
    }
    if z >= 1.0 {
        return Err(Error::Domain(format!("gauss_2f1 requires z < 1, got {z}")));
    }
    if z == 0.0 || a == 0.0 || b == 0.0 {
        return Ok(1.0);
    }
    if z >= -0.5 {
        return series_2f1(a, b, c, z, ctl);
    }
    let diff = a - b;
    if z < -2.0 && diff != diff.round() {
        return connection_inverse_z(a, b, c, z, ctl);
    }
    // Pfaff: (1-z)^{-a} F(a, c-b; c; z/(z-1)).
    let w = z / (z - 1.0);
    Ok((1.0 - z).powf(-a) * series_2f1(a, c - b, c, w, ctl)?)
}

fn connection_inverse_z(a: f64, b: f64, c: f64, z: f64, ctl: &SeriesControl) -> Result<f64> {
    let w = 1.0 / z;
    let mz = -z;
    let g_c = gamma(c);
    let t1 = if is_nonpositive_integer(a - b + 1.0) {
        0.0
    } else {
        g_c * gamma(b - a) * rgamma(b) * rgamma(c - a)
            * mz.powf(-a)
            * series_2f1(a, a - c + 1.0, a - b + 1.0, w, ctl)?
    };
    let t2 = if is_nonpositive_integer(b - a + 1.0) {
        0.0
    } else {
        g_c * gamma(a - b) * rgamma(a) * rgamma(c - b)
            * mz.powf(-b)
            * series_2f1(b, b - c + 1.0, b - a + 1.0, w, ctl)?
    };
    let v = t1 + t2;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Instability(format!(
            "1/z connection overflowed for a={a}, b={b}, c={c}, z={z}"
        )))
    }
}

/// Triangular table of signed Stirling numbers of the first kind.
#[derive(Clone, Debug)]
pub struct StirlingTable {
    max_n: usize,
    rows: Vec<Vec<BigInt>>,
}

impl StirlingTable {
    /// Builds rows `0..=max_n` from `s(n+1,k) = s(n,k-1) - n·s(n,k)`.
    pub fn new(max_n: usize) -> Self {
        let mut rows: Vec<Vec<BigInt>> = Vec::with_capacity(max_n + 1);
        rows.push(vec![BigInt::one()]);
        for n in 0..max_n {
            let prev = &rows[n];
            let nn = BigInt::from(n);
            let mut row = vec![BigInt::zero(); n + 2];
            for (k, slot) in row.iter_mut().enumerate().skip(1) {
                let left = prev.get(k - 1).cloned().unwrap_or_default();
                let here = prev.get(k).map(|v| &nn * v).unwrap_or_default();
                *slot = left - here;
            }
            rows.push(row);
        }
        Self { max_n, rows }
    }

    pub fn max_n(&self) -> usize {
        self.max_n
    }

    /// `s(n, k)`, or an out-of-range error when `k > n` or `n > max_n`.
    pub fn get(&self, n: usize, k: usize) -> Result<&BigInt> {
        if n > self.max_n || k > n {
            return Err(Error::OutOfRange(format!(
                "stirling s({n},{k}) outside table of size {}",
                self.max_n
            )));
        }
        Ok(&self.rows[n][k])
    }

    /// Row `n` as coefficients of `x^0, x^1, ..., x^n`.
    pub fn row(&self, n: usize) -> Result<&[BigInt]> {
        self.rows
            .get(n)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::OutOfRange(format!("stirling row {n} beyond {}", self.max_n)))
    }
}

/// Rows available through [`stirling_first`] and [`stirling_table`].
pub const DEFAULT_STIRLING_ROWS: usize = 128;

/// Shared table with [`DEFAULT_STIRLING_ROWS`] rows, built on first use.
pub fn stirling_table() -> &'static StirlingTable {
    static TABLE: OnceLock<StirlingTable> = OnceLock::new();
    TABLE.get_or_init(|| StirlingTable::new(DEFAULT_STIRLING_ROWS))
}

/// Signed Stirling number of the first kind `s(n, k)`.
pub fn stirling_first(n: usize, k: usize) -> Result<BigInt> {
    stirling_table().get(n, k).cloned()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate, integrate_to_infinity};
    use num_traits::ToPrimitive;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn ln_gamma_fixtures() {
        assert_eq!(ln_gamma(1.0).unwrap(), 0.0);
        assert!(rel(ln_gamma(0.5).unwrap(), 0.5 * std::f64::consts::PI.ln()) < 1e-15);
        // 50-digit reference value.
        assert!(rel(ln_gamma(7.3).unwrap(), 7.147_892_523_022_248_312_258_853) < 1e-14);
        assert!(rel(ln_gamma(1e-3).unwrap(), 6.907_178_885_383_853_7) < 1e-14);
        assert!(rel(ln_gamma(1e4).unwrap(), 82_099.717_496_442_37) < 1e-14);
        assert!(ln_gamma(0.0).is_err());
        assert!(ln_gamma(-1.5).is_err());
    }

    #[test]
    fn gamma_reflection() {
        for i in 1..20 {
            let x = f64::from(i) / 20.0;
            let v = (ln_gamma(x).unwrap() + ln_gamma(1.0 - x).unwrap()).exp()
                * (std::f64::consts::PI * x).sin()
                / std::f64::consts::PI;
            assert!((v - 1.0).abs() < 1e-12, "x={x}: {v}");
        }
    }

    #[test]
    fn beta_against_quadrature() {
        for &d in &[0.1, 0.5, 0.9] {
            for k in 1..=6u32 {
                let kd = f64::from(k);
                let exact = beta(kd - d, d).unwrap();
                // ∫_0^∞ u^{δ-1}/(u+1)^k du with u = e^s.
                let softplus = |s: f64| if s > 0.0 { s + (-s).exp().ln_1p() } else { s.exp().ln_1p() };
                let f = |s: f64| (d * s - kd * softplus(s)).exp();
                let left = integrate_to_infinity(|t| f(-t), 0.0, 1e-13, 1e-12).unwrap();
                let right = integrate_to_infinity(f, 0.0, 1e-13, 1e-12).unwrap();
                let quad = left + right;
                assert!(rel(quad, exact) < 1e-8, "k={k}, d={d}: {quad} vs {exact}");
            }
        }
    }

    #[test]
    fn real_binomial_examples() {
        assert_eq!(real_binomial(-0.5, 2), 0.375);
        assert_eq!(real_binomial(3.7, 0), 1.0);
        for k in 2..10 {
            assert_eq!(real_binomial(0.0, k - 1), 0.0);
        }
        // Γ(δ)/(Γ(k)Γ(δ-k+1)) at δ=1/2, k=3 with reflection for Γ(-3/2).
        let d: f64 = 0.5;
        let k = 3.0;
        let g_neg = std::f64::consts::PI
            / ((std::f64::consts::PI * (d - k + 1.0)).sin() * gamma(k - d));
        let oracle = gamma(d) / (gamma(k) * g_neg);
        assert!(rel(real_binomial(d - 1.0, 2), oracle) < 1e-14);
        assert!(rel(real_binomial_dd(d - 1.0, 2).to_f64(), 0.375) < 1e-16);
    }

    #[test]
    fn binomials_are_exact() {
        assert_eq!(binomial(10, 3), 120.0);
        assert_eq!(binomial(3, 5), 0.0);
        assert_eq!(binomial_big(60, 30).to_string(), "118264581564861424");
        assert_eq!(binomial(56, 28), binomial_big(56, 28).to_f64().unwrap());
    }

    #[test]
    fn hypergeometric_closed_forms() {
        assert_eq!(gauss_2f1(1.3, 2.1, 0.7, 0.0).unwrap(), 1.0);
        let v = gauss_2f1(1.0, 1.0, 2.0, -0.5).unwrap();
        assert!(rel(v, 1.5f64.ln() / 0.5) < 1e-14);
        for &z in &[-0.3, -0.9, -1.7, -5.0, -1e3, 0.6, 0.95] {
            let v = gauss_2f1(1.0, 1.0, 2.0, z).unwrap();
            let cf = -(1.0 - z).ln() / z;
            assert!(rel(v, cf) < 1e-12, "z={z}: {v} vs {cf}");
        }
        // ₂F₁(a,b;b;z) = (1-z)^{-a}.
        for &z in &[-0.2, -3.0, -250.0, 0.8] {
            let v = gauss_2f1(2.5, 0.75, 0.75, z).unwrap();
            assert!(rel(v, (1.0 - z).powf(-2.5)) < 1e-12, "z={z}");
        }
    }

    #[test]
    fn hypergeometric_against_euler_integral() {
        // 50-digit reference value, and the Euler integral with t = u².
        let fixture = 0.376_787_179_448_522_635_549_778_7;
        let v = gauss_2f1(2.0, 0.5, 1.5, -4.0).unwrap();
        assert!(rel(v, fixture) < 1e-12);
        let quad = integrate(|u| (1.0 + 4.0 * u * u).powi(-2), 0.0, 1.0, 1e-15, 1e-14).unwrap();
        assert!(rel(v, quad) < 1e-10);

        // The arguments that show up for bounded path gain.
        for &tp in &[1e-3, 0.1, 1.0, 30.0, 1e6] {
            for k in 1..=4u32 {
                let d = 0.4;
                let z = -1.0 / tp;
                let v = gauss_2f1(f64::from(k), d, 1.0 + d, z).unwrap();
                // F(k,δ;1+δ;z) = δ ∫_0^1 t^{δ-1}(1-zt)^{-k} dt, t = u^{1/δ}.
                let quad = integrate(
                    |u: f64| (1.0 - z * u.powf(1.0 / d)).powi(-(k as i32)),
                    0.0,
                    1.0,
                    1e-15,
                    1e-13,
                )
                .unwrap();
                assert!(rel(v, quad) < 1e-9, "θ'={tp}, k={k}: {v} vs {quad}");
            }
        }
    }

    #[test]
    fn hypergeometric_contiguous_relation() {
        // (c-a)F(a-1) + (2a-c+(b-a)z)F(a) + a(z-1)F(a+1) = 0
        let cases = [
            (1.5, 0.3, 2.2, -0.4),
            (2.0, 0.7, 1.7, -1.5),
            (3.2, 0.5, 1.5, -12.0),
            (1.2, 2.4, 3.1, 0.7),
            (2.6, 0.25, 1.25, -400.0),
        ];
        for &(a, b, c, z) in &cases {
            let fm = gauss_2f1(a - 1.0, b, c, z).unwrap();
            let f0 = gauss_2f1(a, b, c, z).unwrap();
            let fp = gauss_2f1(a + 1.0, b, c, z).unwrap();
            let terms = [(c - a) * fm, (2.0 * a - c + (b - a) * z) * f0, a * (z - 1.0) * fp];
            let scale = terms.iter().map(|t: &f64| t.abs()).fold(0.0, f64::max);
            let resid = terms.iter().sum::<f64>() / scale;
            assert!(resid.abs() < 1e-9, "{a},{b},{c},{z}: {resid}");
        }
    }

    #[test]
    fn hypergeometric_errors() {
        assert!(gauss_2f1(1.0, 1.0, -2.0, 0.3).is_err());
        assert!(gauss_2f1(1.0, 1.0, 2.0, 1.0).is_err());
        let tight = SeriesControl {
            max_terms: 5,
            tol: 1e-10,
        };
        assert!(matches!(
            gauss_2f1_with(1.0, 1.0, 2.0, 0.9, &tight),
            Err(Error::NonConvergence { .. })
        ));
    }

    #[test]
    fn stirling_small_values() {
        assert_eq!(stirling_first(3, 2).unwrap(), BigInt::from(-3));
        assert_eq!(stirling_first(3, 1).unwrap(), BigInt::from(2));
        assert_eq!(stirling_first(0, 0).unwrap(), BigInt::one());
        for n in 1..30 {
            assert_eq!(stirling_first(n, n).unwrap(), BigInt::one());
            assert!(stirling_first(n, 0).unwrap().is_zero());
        }
        // s(k-1,1) = (-1)^k Γ(k-1)
        for k in 2..15usize {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let v = stirling_first(k - 1, 1).unwrap().to_f64().unwrap();
            assert_eq!(v, sign * gamma((k - 1) as f64).round());
        }
        assert!(matches!(stirling_first(2, 3), Err(Error::OutOfRange(_))));
        assert!(stirling_first(DEFAULT_STIRLING_ROWS + 1, 1).is_err());
    }

    #[test]
    fn stirling_recurrence_and_falling_factorial() {
        let t = StirlingTable::new(60);
        for n in 0..60usize {
            for k in 1..=n + 1 {
                let lhs = t.get(n + 1, k).unwrap();
                let left = if k <= n + 1 { t.get(n, k - 1).unwrap().clone() } else { BigInt::zero() };
                let here = if k <= n { t.get(n, k).unwrap().clone() } else { BigInt::zero() };
                assert_eq!(*lhs, left - BigInt::from(n) * here);
            }
        }
        for n in 0..12usize {
            for &x in &[-2.5, -0.3, 0.7, 3.0, 5.25] {
                let poly: f64 = t
                    .row(n)
                    .unwrap()
                    .iter()
                    .enumerate()
                    .map(|(k, s)| s.to_f64().unwrap() * f64::powi(x, k as i32))
                    .sum();
                let ff: f64 = (0..n).map(|i| x - i as f64).product();
                assert!((poly - ff).abs() <= 1e-9 * ff.abs().max(1.0), "n={n}, x={x}");
            }
        }
    }
}
