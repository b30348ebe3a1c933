//! Scalar q-special functions with certified truncation tails.
//!
//! Everything here is double precision on the real line, with explicit tail
//! bounds where an infinite product or sum is truncated:
//! - [`pochhammer_inf`]: the q-Pochhammer symbol (z;q)_inf for |q| < 1,
//!   the single kernel through which all q > 1 functions are computed.
//! - [`gamma_q`], [`gamma_qinv`]: the modified and classical q-gamma
//!   functions for base q > 1 (computed through base 1/q products).
//! - [`gamma_q_c`]: the continuous q-gamma function for 0 < q < 1, in the
//!   closed form pi/sin(pi z) * (q^{1-z};q)_inf / (q;q)_inf.
//! - [`q_exp_e`] and [`q_exp_e_lattice`]: the entire q-exponential factor
//!   E_{1/q}(x/(1-q)) = (x/q; 1/q)_inf, which vanishes exactly at x = q^d,
//!   d >= 1; the lattice form takes the integer exponent directly so the
//!   vanishing is exact by construction.
//! - [`theta`], [`q_log`]: the Jacobi theta function of base 1/q and the
//!   q-logarithm l(x) = 1/2 - x theta'(x)/theta(x), normalized so l(1) = 0.
//! - [`jackson`]: one-dimensional Jackson integrals with an empirical decay
//!   test and an eight-small-terms truncation rule.
//! - [`classical_gamma`]: the classical gamma function (Lanczos, reflection
//!   below 1/2), the oracle for Gamma-class and confluence checks.
//! - [`taylor`]: Taylor coefficients at 0 of the entire series used to
//!   evaluate characteristic classes on nilpotent elements.

use crate::error::Error;
use crate::Result;

/// Guard band around |q| = 1; bases inside it are rejected.
pub const Q_ONE_GUARD: f64 = 1e-12;

/// Theta/q-logarithm evaluation is refused for q below this (series too
/// slowly convergent to certify).
pub const THETA_MIN_Q: f64 = 1.0 + 1e-6;

/// A real base q together with the branch it is validated for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QParam {
    q: f64,
    above_one: bool,
}

impl QParam {
    /// Base q > 1 (+ guard band).
    pub fn above_one(q: f64) -> Result<Self> {
        if q > 1.0 + Q_ONE_GUARD && q.is_finite() {
            Ok(QParam { q, above_one: true })
        } else {
            Err(Error::QParamRange {
                q,
                branch: "base-above-one",
            })
        }
    }

    /// Base 0 < q < 1 (+ guard bands at both ends).
    pub fn below_one(q: f64) -> Result<Self> {
        if q > Q_ONE_GUARD && q < 1.0 - Q_ONE_GUARD {
            Ok(QParam {
                q,
                above_one: false,
            })
        } else {
            Err(Error::QParamRange {
                q,
                branch: "base-below-one",
            })
        }
    }

    pub fn value(self) -> f64 {
        self.q
    }

    pub fn is_above_one(self) -> bool {
        self.above_one
    }

    /// 1/q, staying on the opposite branch.
    pub fn inverse(self) -> QParam {
        QParam {
            q: 1.0 / self.q,
            above_one: !self.above_one,
        }
    }
}

/// Truncation certificate for a product or sum.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct TailBound {
    /// Absolute tolerance that was requested.
    pub requested: f64,
    /// Bound actually achieved (<= requested on success).
    pub achieved: f64,
    /// Number of product factors or sum terms used.
    pub terms: usize,
}

/// (z; q)_inf = prod_{r >= 0} (1 - q^r z) for 0 < q < 1.
///
/// The truncation length L is chosen so the logarithmic tail
/// sum_{r > L} |q^r z| / (1 - |q^r z|) stays below `tol`. Returns exact 0
/// when a factor vanishes exactly (z on the inverse q-spiral); flags a
/// [`Error::NearZeroFactor`] when a factor is below `tol` in magnitude but
/// not exactly zero, since the product is then numerically meaningless.
pub fn pochhammer_inf(z: f64, q: QParam, tol: f64) -> Result<(f64, TailBound)> {
    if q.above_one {
        return Err(Error::QParamRange {
            q: q.q,
            branch: "base-below-one",
        });
    }
    let q = q.q;
    let mut product = 1.0_f64;
    let mut r = 0usize;
    let mut qr = 1.0_f64; // q^r
    loop {
        let factor = 1.0 - qr * z;
        if factor == 0.0 {
            return Ok((
                0.0,
                TailBound {
                    requested: tol,
                    achieved: 0.0,
                    terms: r + 1,
                },
            ));
        }
        if factor.abs() < tol {
            return Err(Error::NearZeroFactor {
                index: r,
                value: factor,
            });
        }
        product *= factor;
        r += 1;
        qr *= q;
        let next = (qr * z).abs();
        if next < 0.5 {
            // log-tail: sum_{s >= r} |q^s z|/(1-|q^s z|) <= next/((1-q)(1-next))
            let bound = next / ((1.0 - q) * (1.0 - next));
            if bound < tol {
                return Ok((
                    product,
                    TailBound {
                        requested: tol,
                        achieved: bound,
                        terms: r,
                    },
                ));
            }
        }
        if r > 100_000_000 {
            return Err(Error::NonDecay("pochhammer_inf failed to converge".into()));
        }
    }
}

/// Incrementally extended table of (u^m; u)_inf values, m >= 1, sharing one
/// tail-bounded base product. Used by the Jackson-integral evaluators, which
/// need many shifted Pochhammers at the same base.
#[derive(Debug, Clone)]
pub struct PochhammerTable {
    u: f64,
    values: Vec<f64>, // values[m-1] = (u^m; u)_inf
    pub tail: TailBound,
}

impl PochhammerTable {
    /// Base table for 0 < u < 1 with per-product tail below `tol`.
    pub fn new(u: QParam, tol: f64) -> Result<Self> {
        let (base, tail) = pochhammer_inf(u.value(), u, tol)?;
        Ok(PochhammerTable {
            u: u.value(),
            values: vec![base],
            tail,
        })
    }

    /// (u^m; u)_inf via (u^{m+1}; u)_inf = (u^m; u)_inf / (1 - u^m).
    pub fn value(&mut self, m: usize) -> f64 {
        assert!(m >= 1, "PochhammerTable indices start at 1");
        while self.values.len() < m {
            let k = self.values.len(); // extending to (u^{k+1}; u)_inf
            let prev = self.values[k - 1];
            let next = prev / (1.0 - self.u.powi(k as i32));
            self.values.push(next);
        }
        self.values[m - 1]
    }
}

/// gamma_q(t) = (q^{-1}; q^{-1})_inf / (q^{-t}; q^{-1})_inf for q > 1.
///
/// Satisfies gamma_q(1) = 1 and gamma_q(t+1) = (1 - q^{-t}) gamma_q(t);
/// poles at t in Z_{<=0}. Evaluated as a log-space sum so that bases close
/// to 1, where both Pochhammer products underflow, stay representable.
pub fn gamma_q(t: f64, q: QParam) -> Result<f64> {
    if !q.above_one {
        return Err(Error::QParamRange {
            q: q.q,
            branch: "base-above-one",
        });
    }
    if t <= 0.0 && t == t.floor() {
        return Err(Error::Pole(format!(
            "gamma_q at nonpositive integer t = {t}"
        )));
    }
    if t < 0.0 {
        // gamma_q(t) = gamma_q(t + m) / prod_{j=0}^{m-1} (1 - q^{-(t+j)})
        let mut prefactor = 1.0;
        let mut tt = t;
        while tt < 0.0 {
            prefactor *= 1.0 - q.q.powf(-tt);
            tt += 1.0;
        }
        return Ok(gamma_q(tt, q)? / prefactor);
    }
    let u = 1.0 / q.q;
    // log gamma = -ln(1-u^t) + sum_{r>=1} [ln(1-u^r) - ln(1-u^{r+t})]
    let ut = u.powf(t);
    let mut log_sum = -(-ut).ln_1p();
    let mut ur = 1.0;
    for _ in 1..100_000_000 {
        ur *= u;
        let term = (-ur).ln_1p() - (-(ur * ut)).ln_1p();
        log_sum += term;
        if ur * (1.0 + ut) / (1.0 - u) < 1e-18 * (1.0 + log_sum.abs()) {
            return Ok(log_sum.exp());
        }
    }
    Err(Error::NonDecay("gamma_q log sum failed to converge".into()))
}

/// Gamma_{q^{-1}}(t) = (1 - q^{-1})^{1-t} gamma_q(t) for q > 1.
pub fn gamma_qinv(t: f64, q: QParam) -> Result<f64> {
    let g = gamma_q(t, q)?;
    Ok((1.0 - 1.0 / q.value()).powf(1.0 - t) * g)
}

/// Classical gamma function on the real line.
///
/// Lanczos approximation (g = 7, 9 coefficients), reflection for t < 1/2;
/// accurate to at least 13 significant digits away from the poles.
pub fn classical_gamma(t: f64) -> Result<f64> {
    if t <= 0.0 && t == t.floor() {
        return Err(Error::Pole(format!("gamma at nonpositive integer t = {t}")));
    }
    const G: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if t < 0.5 {
        // reflection: gamma(t) = pi / (sin(pi t) gamma(1 - t))
        let s = (std::f64::consts::PI * t).sin();
        return Ok(std::f64::consts::PI / (s * classical_gamma(1.0 - t)?));
    }
    let z = t - 1.0;
    let mut x = G[0];
    for (i, c) in G.iter().enumerate().skip(1) {
        x += c / (z + i as f64);
    }
    let t2 = z + 7.5;
    Ok((2.0 * std::f64::consts::PI).sqrt() * t2.powf(z + 0.5) * (-t2).exp() * x)
}

/// The q-exponential factor E_{q^{-1}}(x / (1 - q)) = (x/q; 1/q)_inf, q > 1.
///
/// Vanishes exactly at x = q^d for integers d >= 1 (the factor l = d is
/// zero); such points are detected up to rounding of x and reported as an
/// exact zero.
pub fn q_exp_e(x: f64, q: QParam, tol: f64) -> Result<(f64, TailBound)> {
    if !q.above_one {
        return Err(Error::QParamRange {
            q: q.q,
            branch: "base-above-one",
        });
    }
    if x > 0.0 {
        let d = (x.ln() / q.value().ln()).round();
        if d >= 1.0 && (x * q.value().powi(-d as i32) - 1.0).abs() <= 4.0 * f64::EPSILON {
            return Ok((
                0.0,
                TailBound {
                    requested: tol,
                    achieved: 0.0,
                    terms: d as usize,
                },
            ));
        }
    }
    pochhammer_inf(x / q.value(), q.inverse(), tol)
}

/// E_{q^{-1}}(q^e / (1 - q)) for integer exponent e: exactly 0 for e >= 1,
/// and the shifted product (u^{1-e}; u)_inf for e <= 0, read off a shared
/// [`PochhammerTable`] at u = 1/q.
pub fn q_exp_e_lattice(e: i64, table: &mut PochhammerTable) -> f64 {
    if e >= 1 {
        0.0
    } else {
        table.value((1 - e) as usize)
    }
}

/// Jacobi theta function of base q^{-1}: theta(x) = sum_n q^{-n(n-1)/2} x^n.
///
/// Symmetric summation; terms decay super-geometrically for any x > 0 once
/// q is not too close to 1 (guarded by [`THETA_MIN_Q`]).
pub fn theta(x: f64, q: QParam, tol: f64) -> Result<(f64, TailBound)> {
    theta_impl(x, q, tol, false)
}

/// x d/dx of theta, by termwise differentiation.
pub fn theta_x_dx(x: f64, q: QParam, tol: f64) -> Result<(f64, TailBound)> {
    theta_impl(x, q, tol, true)
}

fn theta_impl(x: f64, q: QParam, tol: f64, weight_n: bool) -> Result<(f64, TailBound)> {
    if !q.above_one {
        return Err(Error::QParamRange {
            q: q.q,
            branch: "base-above-one",
        });
    }
    if q.value() < THETA_MIN_Q {
        return Err(Error::BaseTooCloseToOne(q.value()));
    }
    if x <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "theta evaluated off the positive real line: x = {x}"
        )));
    }
    let q = q.value();
    let term = |n: i64| -> f64 {
        let expo = -(n as f64) * (n as f64 - 1.0) / 2.0;
        let w = if weight_n { n as f64 } else { 1.0 };
        w * q.powf(expo) * x.powi(n as i32)
    };
    let mut sum = term(0);
    let mut n = 1i64;
    let mut quiet = 0u32;
    let mut terms = 1usize;
    let mut last_mag = f64::INFINITY;
    while quiet < 4 {
        let t = term(n).abs() + term(-n).abs();
        sum += term(n) + term(-n);
        terms += 2;
        if t < tol * (sum.abs() + 1.0) && t <= last_mag {
            quiet += 1;
        } else {
            quiet = 0;
        }
        last_mag = t;
        n += 1;
        if n > 10_000 {
            return Err(Error::NonDecay("theta series did not converge".into()));
        }
    }
    Ok((
        sum,
        TailBound {
            requested: tol,
            achieved: last_mag,
            terms,
        },
    ))
}

/// q-logarithm l(x) = 1/2 - x theta'(x)/theta(x); l(1) = 0 and
/// l(q^{-m} x) = l(x) + m. On the q-spiral, l(q^b) = -b.
pub fn q_log(x: f64, q: QParam) -> Result<f64> {
    let tol = 1e-15;
    let (th, _) = theta(x, q, tol)?;
    let (xdx, _) = theta_x_dx(x, q, tol)?;
    if th == 0.0 {
        return Err(Error::Pole(format!("theta zero at x = {x}")));
    }
    Ok(0.5 - xdx / th)
}

/// A point of the q-spiral q^Z: the integer exponent and the value q^d.
#[derive(Debug, Clone, Copy)]
pub struct QSpiralPoint {
    pub d: i64,
    pub x: f64,
}

/// One-dimensional Jackson integral sum_{d in Z} q^{d p} f(q^d).
///
/// The caller asserts decay of q^{dp} f(q^d) in both directions; the
/// implementation verifies it empirically and truncates when eight
/// consecutive terms fall below tol * (|partial sum| + 1). A hard cap of
/// 10^4 lattice points per side turns missing decay into an error.
pub fn jackson<F: FnMut(QSpiralPoint) -> f64>(
    mut f: F,
    q: QParam,
    p: f64,
    tol: f64,
) -> Result<(f64, TailBound)> {
    if !q.above_one {
        return Err(Error::QParamRange {
            q: q.q,
            branch: "base-above-one",
        });
    }
    let q = q.q;
    let mut sum = 0.0f64;
    let mut terms = 0usize;
    let mut worst = 0.0f64;
    for dir in [1i64, -1i64] {
        let mut d = if dir == 1 { 0 } else { -1 };
        let mut quiet = 0u32;
        let mut steps = 0usize;
        while quiet < 8 {
            let x = q.powi(d as i32);
            let t = q.powf(d as f64 * p) * f(QSpiralPoint { d, x });
            sum += t;
            terms += 1;
            if t.abs() < tol * (sum.abs() + 1.0) {
                quiet += 1;
                worst = worst.max(t.abs());
            } else {
                quiet = 0;
            }
            d += dir;
            steps += 1;
            if steps > 10_000 {
                return Err(Error::NonDecay(format!(
                    "jackson integral: no decay after {steps} terms (direction {dir})"
                )));
            }
        }
    }
    Ok((
        sum,
        TailBound {
            requested: tol,
            achieved: worst,
            terms,
        },
    ))
}

/// Continuous q-gamma function for 0 < q < 1, in closed form:
/// gamma_q^c(z) = pi/sin(pi z) * (q^{1-z}; q)_inf / (q; q)_inf.
///
/// Satisfies gamma_q^c(z+1) = gamma_q^c(z) / (q^{-z} - 1); poles at the
/// integers (where the closed form degenerates). The Pochhammer ratio is
/// evaluated as a log-space sum (underflow-safe near q = 1), with the
/// difference equation used to shift z into (0, 1) first.
pub fn gamma_q_c(z: f64, q: QParam) -> Result<f64> {
    if q.above_one {
        return Err(Error::QParamRange {
            q: q.q,
            branch: "base-below-one",
        });
    }
    if z == z.floor() {
        return Err(Error::Pole(format!("gamma_q^c at integer z = {z}")));
    }
    let qv = q.q;
    if z < 0.0 {
        // gamma_q_c(z) = gamma_q_c(z+1) / (q^{-z} - 1)
        let mut factor = 1.0;
        let mut zz = z;
        while zz < 0.0 {
            factor /= qv.powf(-zz) - 1.0;
            zz += 1.0;
        }
        return Ok(gamma_q_c(zz, q)? * factor);
    }
    if z > 1.0 {
        // gamma_q_c(z) = (q^{-(z-1)} - 1) gamma_q_c(z-1)
        let mut factor = 1.0;
        let mut zz = z;
        while zz > 1.0 {
            zz -= 1.0;
            factor *= qv.powf(-zz) - 1.0;
        }
        return Ok(gamma_q_c(zz, q)? * factor);
    }
    // z in (0, 1): log ratio = sum_{r>=0} [ln(1-q^{1+r-z}) - ln(1-q^{1+r})]
    let qmz = qv.powf(-z);
    let mut log_sum = 0.0;
    let mut q1r = qv; // q^{1+r}
    for _ in 0..100_000_000 {
        let term = (-(q1r * qmz)).ln_1p() - (-q1r).ln_1p();
        log_sum += term;
        q1r *= qv;
        if q1r * (1.0 + qmz) / (1.0 - qv) < 1e-18 * (1.0 + log_sum.abs()) {
            let refl = std::f64::consts::PI / (std::f64::consts::PI * z).sin();
            return Ok(refl * log_sum.exp());
        }
    }
    Err(Error::NonDecay(
        "gamma_q_c log sum failed to converge".into(),
    ))
}

/// Generic truncated power-series helpers, shared with the algebra layer.
pub mod ps {
    use crate::scalar::Scalar;

    /// Product truncated at degree n (inclusive).
    pub fn mul<S: Scalar>(a: &[S], b: &[S], n: usize) -> Vec<S> {
        let mut out = vec![S::zero(); n + 1];
        for (i, ai) in a.iter().enumerate().take(n + 1) {
            if ai.is_zero() {
                continue;
            }
            for (j, bj) in b.iter().enumerate().take(n + 1 - i) {
                out[i + j] = out[i + j].clone() + ai.clone() * bj.clone();
            }
        }
        out
    }

    /// Reciprocal of a series with nonzero constant term, truncated at n.
    pub fn recip<S: Scalar>(a: &[S], n: usize) -> Vec<S> {
        let c0 = a[0].recip_checked().expect("ps::recip: zero constant term");
        let mut out = vec![S::zero(); n + 1];
        out[0] = c0.clone();
        for m in 1..=n {
            let mut acc = S::zero();
            for j in 1..=m {
                let aj = if j < a.len() { a[j].clone() } else { S::zero() };
                acc = acc + aj * out[m - j].clone();
            }
            out[m] = -(acc * c0.clone());
        }
        out
    }

    /// exp of a series with zero constant term, truncated at n.
    ///
    /// Uses the ODE f' = a' f, i.e. m f_m = sum_{j=1}^{m} j a_j f_{m-j}.
    pub fn exp<S: Scalar>(a: &[S], n: usize) -> Vec<S> {
        assert!(
            a.is_empty() || a[0].is_zero(),
            "ps::exp: nonzero constant term"
        );
        let mut out = vec![S::zero(); n + 1];
        out[0] = S::one();
        for m in 1..=n {
            let mut acc = S::zero();
            for j in 1..=m {
                let aj = if j < a.len() { a[j].clone() } else { S::zero() };
                acc = acc + S::from_int(j as i64) * aj * out[m - j].clone();
            }
            out[m] = acc * S::from_int(m as i64).recip_checked().unwrap();
        }
        out
    }

    /// f(c t) from f(t): scales coefficient m by c^m.
    pub fn scale_arg<S: Scalar>(a: &[S], c: &S) -> Vec<S> {
        let mut out = Vec::with_capacity(a.len());
        let mut cm = S::one();
        for am in a {
            out.push(am.clone() * cm.clone());
            cm = cm * c.clone();
        }
        out
    }

    /// Todd generating series t / (1 - e^{-t}) truncated at n; exact in the
    /// scalar field (rational Bernoulli-number coefficients).
    pub fn todd<S: Scalar>(n: usize) -> Vec<S> {
        // (1 - e^{-t})/t = sum_{m>=0} (-1)^m t^m/(m+1)!
        let mut den = Vec::with_capacity(n + 1);
        let mut fact = 1i64;
        for m in 0..=n {
            fact = fact.checked_mul(m as i64 + 1).expect("factorial overflow");
            let sign = if m % 2 == 0 { 1 } else { -1 };
            den.push(S::from_ratio(sign, fact));
        }
        recip(&den, n)
    }
}

/// High-precision rational evaluation of the q-gamma class data, used by
/// the exact comparison-pairing path. The pairing of the q-gamma class
/// against the summed I-series cancels catastrophically (the answer is a
/// product of small Pochhammer factors while the series terms are large),
/// so the class coefficients and the series sum are both carried in
/// rational arithmetic: log q is computed to 50 digits by the atanh series
/// on a rational argument, the Pochhammer log-sums are accumulated at a
/// fixed denominator 10^50, and only the final paired scalar is rounded
/// to f64.
pub mod exact {
    use super::ps;
    use crate::error::Error;
    use crate::scalar::{Rational, Scalar};
    use crate::Result;
    use num_bigint::BigInt;
    use num_traits::Signed;

    /// Working precision: absolute roundings at 10^{-50}.
    pub const SCALE_DIGITS: u32 = 50;

    fn scale() -> BigInt {
        BigInt::from(10u32).pow(SCALE_DIGITS)
    }

    /// Round a rational to the fixed denominator 10^{-SCALE_DIGITS}; keeps
    /// intermediate denominators from compounding across long sums.
    pub fn round_to_scale(x: &Rational) -> Rational {
        let s = scale();
        let scaled = x * Rational::from_integer(s.clone());
        let rounded = scaled.round().to_integer();
        Rational::new(rounded, s)
    }

    /// ln(q) for rational q > 0 to 50 digits, via
    /// ln q = 2 atanh((q-1)/(q+1)) = 2 sum_k y^{2k+1}/(2k+1).
    ///
    /// The running power stays exact (its digit count grows only linearly
    /// in the term index); an f64 shadow drives the tail break, and only
    /// the accumulated sum is rounded to the working scale.
    pub fn ln_rational(q: &Rational) -> Result<Rational> {
        if !q.is_positive() {
            return Err(Error::InvalidArgument(
                "ln of a nonpositive rational".into(),
            ));
        }
        let one = <Rational as Scalar>::one();
        let y = (q - one.clone()) / (q + one);
        let y2 = y.clone() * y.clone();
        let y_f = Scalar::to_f64(&y).abs();
        let y2_f = y_f * y_f;
        let mut power = y.clone();
        let mut power_f = y_f;
        let mut sum = <Rational as Scalar>::zero();
        let mut k = 0u32;
        loop {
            let term = power.clone() / Rational::from_integer(BigInt::from(2 * k + 1));
            sum = round_to_scale(&(sum + term));
            // tail bound: |power| y^2 / (1 - y^2)
            if power_f * y2_f / (1.0 - y2_f) < 1e-52 {
                break;
            }
            power *= y2.clone();
            power_f *= y2_f;
            k += 1;
            if k > 50_000 {
                return Err(Error::NonDecay("ln_rational series".into()));
            }
        }
        Ok(round_to_scale(&(sum * <Rational as Scalar>::from_int(2))))
    }

    /// S_m(u) = sum_{l>=1} l^{m-1} u^l / (1 - u^l) to 50 digits.
    fn pochhammer_log_sum(u: &Rational, m: usize) -> Result<Rational> {
        let mut sum = <Rational as Scalar>::zero();
        let mut ul = <Rational as Scalar>::one();
        let u_f = Scalar::to_f64(u);
        let mut ul_f = 1.0f64;
        for l in 1..5_000i64 {
            ul *= u.clone();
            ul_f *= u_f;
            let lm = <Rational as Scalar>::from_int(l).powi(m as i64 - 1);
            let term = lm * ul.clone() / (<Rational as Scalar>::one() - ul.clone());
            sum = round_to_scale(&(sum + term));
            // tail bound: terms decay geometrically once l > m / log(1/u)
            let next = (l as f64 + 1.0).powi(m as i32 - 1) * ul_f * u_f / (1.0 - u_f);
            if next * 2.0 / (1.0 - u_f) < 1e-52 && l > 4 {
                return Ok(sum);
            }
        }
        Err(Error::NonDecay("pochhammer_log_sum".into()))
    }

    /// Rational Taylor coefficients of t gamma_q(t) at 0 to 50 digits,
    /// mirroring the float provider: Todd(t L)/L * exp(-G(1/q, t)) with
    /// L = ln q.
    pub fn t_gamma_q_taylor(q: &Rational, n: usize) -> Result<(Vec<Rational>, Rational)> {
        let one = <Rational as Scalar>::one();
        if *q <= one {
            return Err(Error::InvalidArgument("exact t gamma_q needs q > 1".into()));
        }
        let ell = ln_rational(q)?;
        let u = one.clone() / q.clone();
        // g_m = -((ln u)^m / m!) S_m(u), ln u = -L
        let mut neg_g = vec![<Rational as Scalar>::zero(); n + 1];
        let mut fact = <Rational as Scalar>::one();
        let mut lnu_m = <Rational as Scalar>::one();
        for (m, slot) in neg_g.iter_mut().enumerate().skip(1) {
            fact *= <Rational as Scalar>::from_int(m as i64);
            lnu_m = round_to_scale(&(lnu_m * -ell.clone()));
            let s_m = pochhammer_log_sum(&u, m)?;
            *slot = round_to_scale(&(lnu_m.clone() / fact.clone() * s_m));
        }
        let corr = ps::exp(&neg_g, n);
        let todd: Vec<Rational> = ps::todd(n);
        let todd_scaled = ps::scale_arg(&todd, &ell);
        let mut out = ps::mul(&todd_scaled, &corr, n);
        let ell_inv = ell.clone().recip_checked().unwrap();
        for c in &mut out {
            *c = round_to_scale(&(c.clone() * ell_inv.clone()));
        }
        Ok((out, ell))
    }

    #[cfg(test)]
    mod tests {
        use super::*;
        use crate::qfun::{taylor, QParam};

        #[test]
        fn ln_rational_matches_f64() {
            for (n, d) in [(3i64, 2i64), (2, 1), (3, 1), (5, 2), (7, 5)] {
                let q = <Rational as Scalar>::from_ratio(n, d);
                let l = ln_rational(&q).unwrap();
                let expect = (n as f64 / d as f64).ln();
                assert!((Scalar::to_f64(&l) - expect).abs() < 1e-15, "{n}/{d}");
            }
        }

        #[test]
        fn exact_t_gamma_q_matches_float() {
            for (n, d) in [(3i64, 2i64), (2, 1), (3, 1)] {
                let q = <Rational as Scalar>::from_ratio(n, d);
                let (coeffs, _) = t_gamma_q_taylor(&q, 8).unwrap();
                let qf = QParam::above_one(n as f64 / d as f64).unwrap();
                let float = taylor::t_gamma_q(qf, 8).unwrap();
                for (c, f) in coeffs.iter().zip(&float) {
                    assert!(
                        (Scalar::to_f64(c) - f).abs() < 1e-12 * (1.0 + f.abs()),
                        "{n}/{d}: {c:?} vs {f}"
                    );
                }
            }
        }

        #[test]
        fn rounding_is_fine_grained() {
            let x = <Rational as Scalar>::from_ratio(1, 3);
            let r = round_to_scale(&x);
            assert!(Scalar::to_f64(&(x - r)).abs() < 1e-49);
        }
    }
}

/// Taylor coefficients (f^{(m)}(0)/m!) of the named entire series used on
/// nilpotent algebra elements.
pub mod taylor {
    use super::{ps, QParam};
    use crate::error::Error;
    use crate::Result;

    /// Euler-Mascheroni constant.
    pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_606_512_090_082;

    /// zeta(2) .. zeta(16), indexed by j - 2.
    pub const ZETA: [f64; 15] = [
        1.644_934_066_848_226_4,
        1.202_056_903_159_594_2,
        1.082_323_233_711_138_1,
        1.036_927_755_143_37,
        1.017_343_061_984_449_2,
        1.008_349_277_381_923,
        1.004_077_356_197_944_4,
        1.002_008_392_826_082_1,
        1.000_994_575_127_818,
        1.000_494_188_604_119_4,
        1.000_246_086_553_308,
        1.000_122_713_347_578_5,
        1.000_061_248_135_058_8,
        1.000_030_588_236_307,
        1.000_015_282_259_408_6,
    ];

    fn zeta(j: usize) -> f64 {
        assert!((2..=16).contains(&j), "zeta({j}) not tabulated");
        ZETA[j - 2]
    }

    /// Gamma(1 + t) around t = 0:
    /// exp(-gamma t + sum_{j>=2} (-1)^j zeta(j) t^j / j).
    pub fn gamma_one_plus(n: usize) -> Vec<f64> {
        let mut log = vec![0.0; n + 1];
        if n >= 1 {
            log[1] = -EULER_GAMMA;
        }
        for (j, l) in log.iter_mut().enumerate().skip(2) {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            *l = sign * zeta(j) / j as f64;
        }
        ps::exp(&log, n)
    }

    /// S_m(u) = sum_{l>=1} l^{m-1} u^l / (1 - u^l), geometric tail < 1e-18.
    fn pochhammer_log_sum(u: f64, m: usize) -> f64 {
        let mut sum = 0.0;
        let mut ul = 1.0;
        for l in 1..200_000 {
            ul *= u;
            let term = (l as f64).powi(m as i32 - 1) * ul / (1.0 - ul);
            sum += term;
            if term < 1e-18 * (sum.abs() + 1.0) && l > 4 {
                break;
            }
        }
        sum
    }

    /// Coefficients g_m of log[(u^{1+t}; u)_inf / (u; u)_inf] for m = 0..n.
    fn log_poch_shift(u: f64, n: usize) -> Vec<f64> {
        let mut g = vec![0.0; n + 1];
        let lnu = u.ln();
        let mut fact = 1.0;
        let mut lnu_m = 1.0;
        for (m, gm) in g.iter_mut().enumerate().skip(1) {
            fact *= m as f64;
            lnu_m *= lnu;
            *gm = -lnu_m / fact * pochhammer_log_sum(u, m);
        }
        g
    }

    /// t gamma_q(t) around t = 0 for q > 1 (entire; the value at 0 is
    /// 1/log q). Computed as Todd(t log q)/log q * exp(-G(1/q, t)).
    pub fn t_gamma_q(q: QParam, n: usize) -> Result<Vec<f64>> {
        if !q.is_above_one() {
            return Err(Error::QParamRange {
                q: q.value(),
                branch: "base-above-one",
            });
        }
        let lnq = q.value().ln();
        let todd: Vec<f64> = ps::todd(n);
        let todd_scaled = ps::scale_arg(&todd, &lnq);
        let g = log_poch_shift(1.0 / q.value(), n);
        let neg_g: Vec<f64> = g.iter().map(|x| -x).collect();
        let corr = ps::exp(&neg_g, n);
        let mut out = ps::mul(&todd_scaled, &corr, n);
        for c in &mut out {
            *c /= lnq;
        }
        Ok(out)
    }

    /// t Gamma_{q^{-1}}(t) = (1 - 1/q)^{1-t} * t gamma_q(t) around t = 0.
    pub fn t_gamma_qinv(q: QParam, n: usize) -> Result<Vec<f64>> {
        let base = t_gamma_q(q, n)?;
        let one_minus_u = 1.0 - 1.0 / q.value();
        let mut log = vec![0.0; n + 1];
        if n >= 1 {
            log[1] = -one_minus_u.ln();
        }
        let mut out = ps::mul(&base, &ps::exp(&log, n), n);
        for c in &mut out {
            *c *= one_minus_u;
        }
        Ok(out)
    }

    /// z gamma_q^c(z) around z = 0 for 0 < q < 1 (entire; value 1 at 0):
    /// [pi z / sin(pi z)] * exp(sum_m (-1)^m g_m(q) z^m).
    pub fn t_gamma_qc(q: QParam, n: usize) -> Result<Vec<f64>> {
        if q.is_above_one() {
            return Err(Error::QParamRange {
                q: q.value(),
                branch: "base-below-one",
            });
        }
        // log(pi z / sin(pi z)) = sum_{l>=1} zeta(2l) z^{2l} / l
        let mut log = vec![0.0; n + 1];
        for l in 1.. {
            if 2 * l > n {
                break;
            }
            log[2 * l] = zeta(2 * l) / l as f64;
        }
        let g = log_poch_shift(q.value(), n);
        for (m, gm) in g.iter().enumerate().skip(1) {
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            log[m] += sign * gm;
        }
        Ok(ps::exp(&log, n))
    }

    /// exp around x0.
    pub fn exp_at(x0: f64, n: usize) -> Vec<f64> {
        let e = x0.exp();
        let mut out = Vec::with_capacity(n + 1);
        let mut fact = 1.0;
        for m in 0..=n {
            if m > 0 {
                fact *= m as f64;
            }
            out.push(e / fact);
        }
        out
    }

    /// log around x0 > 0.
    pub fn log_at(x0: f64, n: usize) -> Result<Vec<f64>> {
        if x0 <= 0.0 {
            return Err(Error::PoleAtDegreeZero(format!("log at x0 = {x0}")));
        }
        let mut out = Vec::with_capacity(n + 1);
        out.push(x0.ln());
        for m in 1..=n {
            let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
            out.push(sign / (m as f64 * x0.powi(m as i32)));
        }
        Ok(out)
    }

    /// base^t around t0 (base > 0): base^{t0} (ln base)^m / m!.
    pub fn pow_base(base: f64, t0: f64, n: usize) -> Result<Vec<f64>> {
        if base <= 0.0 {
            return Err(Error::InvalidArgument(format!("pow_base with base {base}")));
        }
        let v = base.powf(t0);
        let l = base.ln();
        let mut out = Vec::with_capacity(n + 1);
        let mut fact = 1.0;
        let mut lm = 1.0;
        for m in 0..=n {
            if m > 0 {
                fact *= m as f64;
                lm *= l;
            }
            out.push(v * lm / fact);
        }
        Ok(out)
    }

    /// 1 / (1 - c q^t) around t0, with 1 - c q^{t0} != 0.
    pub fn inv_one_minus_c_qpow(c: f64, q: f64, t0: f64, n: usize) -> Result<Vec<f64>> {
        let g0 = 1.0 - c * q.powf(t0);
        if g0 == 0.0 {
            return Err(Error::PoleAtDegreeZero(format!(
                "1/(1 - c q^t) at c = {c}, q = {q}, t0 = {t0}"
            )));
        }
        let lnq = q.ln();
        let mut g = Vec::with_capacity(n + 1);
        g.push(g0);
        let mut fact = 1.0;
        let mut lm = 1.0;
        for m in 1..=n {
            fact *= m as f64;
            lm *= lnq;
            g.push(-c * q.powf(t0) * lm / fact);
        }
        Ok(ps::recip(&g, n))
    }

    /// Todd series t / (1 - e^{-t}) around 0.
    pub fn todd(n: usize) -> Vec<f64> {
        ps::todd(n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q2() -> QParam {
        QParam::above_one(2.0).unwrap()
    }
    fn u_half() -> QParam {
        QParam::below_one(0.5).unwrap()
    }

    #[test]
    fn pochhammer_at_zero_is_one() {
        let (v, tb) = pochhammer_inf(0.0, u_half(), 1e-12).unwrap();
        assert_eq!(v, 1.0);
        assert!(tb.achieved <= tb.requested);
    }

    #[test]
    fn pochhammer_q_q_at_half() {
        // (q; q)_inf at q = 1/2, partial product with tail bound 1e-12
        let (v, tb) = pochhammer_inf(0.5, u_half(), 1e-12).unwrap();
        assert!((v - 0.288788095087).abs() < 1e-11, "got {v}");
        assert!(tb.achieved <= 1e-12);
    }

    #[test]
    fn pochhammer_one_step_recurrence() {
        // (z; q)_inf = (1 - z)(qz; q)_inf
        let q = QParam::below_one(0.37).unwrap();
        for &z in &[0.9, 0.3, -1.7, 4.2, -0.05] {
            let (lhs, _) = pochhammer_inf(z, q, 1e-14).unwrap();
            let (rhs, _) = pochhammer_inf(q.value() * z, q, 1e-14).unwrap();
            let rhs = (1.0 - z) * rhs;
            assert!((lhs - rhs).abs() <= 1e-12 * (lhs.abs() + rhs.abs() + 1.0));
        }
    }

    #[test]
    fn pochhammer_exact_zero_on_spiral() {
        // z = q^{-m} hits the factor r = m exactly for dyadic q
        let (v, _) = pochhammer_inf(4.0, u_half(), 1e-12).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn pochhammer_near_zero_flagged() {
        let r = pochhammer_inf(4.0 * (1.0 + 1e-13), u_half(), 1e-9);
        assert!(matches!(r, Err(Error::NearZeroFactor { .. })));
    }

    #[test]
    fn gamma_q_basics() {
        for &qv in &[1.5, 2.0, 3.0, 7.25] {
            let q = QParam::above_one(qv).unwrap();
            assert!((gamma_q(1.0, q).unwrap() - 1.0).abs() < 1e-13);
            // gamma_q(2) = 1 - 1/q
            assert!((gamma_q(2.0, q).unwrap() - (1.0 - 1.0 / qv)).abs() < 1e-13);
        }
        // gamma_2(3) = (1 - 1/2)(1 - 1/4) = 3/8
        assert!((gamma_q(3.0, q2()).unwrap() - 0.375).abs() < 1e-13);
        assert!(matches!(gamma_q(0.0, q2()), Err(Error::Pole(_))));
        assert!(matches!(gamma_q(-3.0, q2()), Err(Error::Pole(_))));
    }

    #[test]
    fn gamma_q_recurrence_randomized() {
        // gamma_q(t + 1) = (1 - q^{-t}) gamma_q(t)
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut rnd = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..200 {
            let qv = 1.2 + 3.0 * rnd();
            let t = 0.1 + 4.0 * rnd();
            let q = QParam::above_one(qv).unwrap();
            let lhs = gamma_q(t + 1.0, q).unwrap();
            let rhs = (1.0 - qv.powf(-t)) * gamma_q(t, q).unwrap();
            assert!((lhs - rhs).abs() < 1e-11 * (lhs.abs() + rhs.abs()));
        }
    }

    #[test]
    fn gamma_qinv_confluence_to_classical() {
        // Gamma(3) = 2; |Gamma_{q^{-1}}(3) - 2| < 1e-3 at q = 1.001
        let q = QParam::above_one(1.001).unwrap();
        let v = gamma_qinv(3.0, q).unwrap();
        assert!((v - 2.0).abs() < 1e-3, "got {v}");
    }

    #[test]
    fn classical_gamma_values() {
        assert!((classical_gamma(0.5).unwrap() - std::f64::consts::PI.sqrt()).abs() < 1e-13);
        assert!((classical_gamma(3.0).unwrap() - 2.0).abs() < 1e-13);
        assert!((classical_gamma(1.0).unwrap() - 1.0).abs() < 1e-13);
        // reflection region
        assert!(
            (classical_gamma(-0.5).unwrap() - (-2.0 * std::f64::consts::PI.sqrt())).abs() < 1e-12
        );
    }

    #[test]
    fn q_exp_e_values() {
        // x = q (d = 1): the l = 1 factor vanishes exactly
        let (v, _) = q_exp_e(2.0, q2(), 1e-12).unwrap();
        assert_eq!(v, 0.0);
        // x = 1, q = 2: (1/2; 1/2)_inf
        let (v, _) = q_exp_e(1.0, q2(), 1e-12).unwrap();
        assert!((v - 0.288788095087).abs() < 1e-11);
        // x = 1/2, q = 2: (1/2; 1/2)_inf / (1 - 1/2)
        let (v, _) = q_exp_e(0.5, q2(), 1e-12).unwrap();
        assert!((v - 0.577576190174).abs() < 1e-11);
    }

    #[test]
    fn q_exp_e_lattice_matches_generic() {
        let mut table = PochhammerTable::new(u_half(), 1e-14).unwrap();
        for e in [-5i64, -2, -1, 0] {
            let (generic, _) = q_exp_e(2f64.powi(e as i32), q2(), 1e-14).unwrap();
            let lat = q_exp_e_lattice(e, &mut table);
            assert!((generic - lat).abs() < 1e-13 * (generic.abs() + 1.0));
        }
        assert_eq!(q_exp_e_lattice(1, &mut table), 0.0);
        assert_eq!(q_exp_e_lattice(7, &mut table), 0.0);
    }

    #[test]
    fn theta_shift_identity() {
        // theta(q^m x) = q^{m(m+1)/2} x^m theta(x)
        let mut state = 0xdeadbeefcafef00du64;
        let mut rnd = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let q = q2();
        for _ in 0..200 {
            let x = 0.1 + 9.9 * rnd();
            let m = (rnd() * 7.0).floor() as i64 - 3;
            let (lhs, _) = theta(q.value().powi(m as i32) * x, q, 1e-14).unwrap();
            let rhs = q.value().powf(m as f64 * (m as f64 + 1.0) / 2.0)
                * x.powi(m as i32)
                * theta(x, q, 1e-14).unwrap().0;
            assert!((lhs - rhs).abs() < 1e-10 * (lhs.abs() + rhs.abs()));
        }
    }

    #[test]
    fn q_log_normalization_and_shift() {
        let q = q2();
        assert!(q_log(1.0, q).unwrap().abs() < 1e-12);
        let mut state = 0x1234_5678_9abc_def0u64;
        let mut rnd = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..100 {
            let x = 0.2 + 5.0 * rnd();
            let m = (rnd() * 7.0).floor() as i64 - 3;
            let lhs = q_log(q.value().powi(-m as i32) * x, q).unwrap();
            let rhs = q_log(x, q).unwrap() + m as f64;
            assert!((lhs - rhs).abs() < 1e-10);
        }
        // on the spiral: l(q^b) = -b
        assert!((q_log(8.0, q).unwrap() + 3.0).abs() < 1e-12);
        assert!(matches!(
            q_log(1.0, QParam::above_one(1.0 + 1e-7).unwrap()),
            Err(Error::BaseTooCloseToOne(_))
        ));
    }

    #[test]
    fn jackson_indicator() {
        // f = indicator of d = 0 integrates to 1 for any weight
        let (v, _) = jackson(
            |pt| if pt.d == 0 { 1.0 } else { 0.0 },
            QParam::above_one(1.7).unwrap(),
            3.3,
            1e-12,
        )
        .unwrap();
        assert!((v - 1.0).abs() < 1e-14);
    }

    #[test]
    fn jackson_gamma_q_representation() {
        // [int]_q E_{q^{-1}}(x/(1-q)) x^p dx/x = gamma_q(p)
        for (qv, p, expect) in [(2.0, 2.0, 0.5), (3.0, 1.0, 1.0)] {
            let q = QParam::above_one(qv).unwrap();
            let mut table = PochhammerTable::new(q.inverse(), 1e-15).unwrap();
            let (v, _) = jackson(|pt| q_exp_e_lattice(pt.d, &mut table), q, p, 1e-13).unwrap();
            assert!((v - expect).abs() < 1e-11, "q={qv} p={p}: got {v}");
            let g = gamma_q(p, q).unwrap();
            assert!((v - g).abs() < 1e-11);
        }
    }

    #[test]
    fn jackson_non_decay_flagged() {
        let r = jackson(|_| 1.0, q2(), 0.0, 1e-12);
        assert!(matches!(r, Err(Error::NonDecay(_))));
    }

    #[test]
    fn jackson_lattice_reorigin_invariance() {
        // substituting f(q x) and adjusting the weight by q^{-p} reproduces
        // the same value: sum q^{dp} f(q^{d+1}) = q^{-p} sum q^{(d+1)p} f(q^{d+1})
        let q = q2();
        let p = 1.3;
        let f = |pt: QSpiralPoint| (-pt.x - 1.0 / pt.x).exp();
        let (base, _) = jackson(f, q, p, 1e-13).unwrap();
        let (shifted, _) = jackson(
            |pt: QSpiralPoint| {
                f(QSpiralPoint {
                    d: pt.d + 1,
                    x: pt.x * q.value(),
                })
            },
            q,
            p,
            1e-13,
        )
        .unwrap();
        let adjusted = q.value().powf(-p) * base;
        assert!((shifted - adjusted).abs() < 1e-12 * (base.abs() + 1.0));
    }

    #[test]
    fn e_q_duality() {
        // e_q(x/(1-q)) E_q(-x/(1-q)) = 1 for 0 < q < 1, |x| < 1:
        // 1/(x; q)_inf * (x; q)_inf = 1 via the product forms.
        let mut state = 77u64;
        let mut rnd = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..300 {
            let q = QParam::below_one(0.05 + 0.9 * rnd()).unwrap();
            let x = 1.98 * rnd() - 0.99;
            let (e_small, _) = pochhammer_inf(x, q, 1e-14).unwrap(); // E_q(-x/(1-q)) = (x;q)_inf
            let e_big = 1.0 / e_small; // e_q(x/(1-q)) = 1/(x;q)_inf
            let prod = e_big * e_small;
            assert!((prod - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn gamma_q_c_recurrence_and_limit() {
        let q = u_half();
        // difference equation gamma_q^c(z+1) = gamma_q^c(z)/(q^{-z} - 1)
        let mut state = 3141u64;
        let mut rnd = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for _ in 0..200 {
            let z = 0.05 + 0.9 * rnd();
            let lhs = gamma_q_c(z + 1.0, q).unwrap();
            let rhs = gamma_q_c(z, q).unwrap() * (q.value().powf(-z) - 1.0);
            assert!((lhs - rhs).abs() < 1e-11 * (lhs.abs() + rhs.abs()));
        }
        // (1-q)^{-z} gamma_q^c(z) -> Gamma(z) as q -> 1
        let qn = QParam::below_one(0.999).unwrap();
        let z = 1.3;
        let v = (1.0 - qn.value()).powf(-z) * gamma_q_c(z, qn).unwrap();
        assert!((v - classical_gamma(z).unwrap()).abs() < 1e-3, "got {v}");
        assert!(matches!(gamma_q_c(2.0, q), Err(Error::Pole(_))));
    }

    #[test]
    fn taylor_gamma_one_plus() {
        // Gamma(1 + t) = 1 - gamma t + ...
        let c = taylor::gamma_one_plus(4);
        assert!((c[0] - 1.0).abs() < 1e-15);
        assert!((c[1] + taylor::EULER_GAMMA).abs() < 1e-15);
        // second coefficient: (gamma^2 + zeta(2))/2
        let expect = (taylor::EULER_GAMMA.powi(2) + taylor::ZETA[0]) / 2.0;
        assert!((c[2] - expect).abs() < 1e-14);
    }

    #[test]
    fn taylor_todd() {
        let c = taylor::todd(6);
        // t/(1 - e^{-t}) = 1 + t/2 + t^2/12 - t^4/720 + t^6/30240 - ...
        assert!((c[0] - 1.0).abs() < 1e-15);
        assert!((c[1] - 0.5).abs() < 1e-15);
        assert!((c[2] - 1.0 / 12.0).abs() < 1e-15);
        assert!(c[3].abs() < 1e-15);
        assert!((c[4] + 1.0 / 720.0).abs() < 1e-15);
        assert!((c[6] - 1.0 / 30240.0).abs() < 1e-16);
    }

    #[test]
    fn taylor_t_gamma_q_matches_function() {
        // the series of t gamma_q(t) must reproduce t*gamma_q(t) pointwise
        for &qv in &[2.0, 3.0, 1.3] {
            let q = QParam::above_one(qv).unwrap();
            let c = taylor::t_gamma_q(q, 14).unwrap();
            assert!((c[0] - 1.0 / qv.ln()).abs() < 1e-13);
            for &t in &[0.05, -0.04, 0.02] {
                let series: f64 = c.iter().rev().fold(0.0, |acc, &cm| acc * t + cm);
                let direct = t * gamma_q(t, q).unwrap();
                assert!(
                    (series - direct).abs() < 1e-11 * (direct.abs() + 1.0),
                    "q={qv} t={t}: {series} vs {direct}"
                );
            }
        }
    }

    #[test]
    fn taylor_t_gamma_qc_matches_function() {
        for &qv in &[0.5, 0.25, 0.8] {
            let q = QParam::below_one(qv).unwrap();
            let c = taylor::t_gamma_qc(q, 14).unwrap();
            assert!((c[0] - 1.0).abs() < 1e-13);
            for &z in &[0.05, -0.04, 0.02] {
                let series: f64 = c.iter().rev().fold(0.0, |acc, &cm| acc * z + cm);
                let direct = z * gamma_q_c(z, q).unwrap();
                assert!(
                    (series - direct).abs() < 1e-10 * (direct.abs() + 1.0),
                    "q={qv} z={z}: {series} vs {direct}"
                );
            }
        }
    }

    #[test]
    fn taylor_t_gamma_qinv_matches_function() {
        let q = q2();
        let c = taylor::t_gamma_qinv(q, 14).unwrap();
        for &t in &[0.05, -0.04] {
            let series: f64 = c.iter().rev().fold(0.0, |acc, &cm| acc * t + cm);
            let direct = t * gamma_qinv(t, q).unwrap();
            assert!((series - direct).abs() < 1e-11 * (direct.abs() + 1.0));
        }
    }

    #[test]
    fn taylor_inv_one_minus_c_qpow() {
        let c = taylor::inv_one_minus_c_qpow(0.3, 2.0, 0.0, 14).unwrap();
        for &t in &[0.05, -0.04] {
            let series: f64 = c.iter().rev().fold(0.0, |acc, &cm| acc * t + cm);
            let direct = 1.0 / (1.0 - 0.3 * 2f64.powf(t));
            assert!((series - direct).abs() < 1e-10);
        }
        assert!(taylor::inv_one_minus_c_qpow(1.0, 2.0, 0.0, 4).is_err());
    }

    #[test]
    fn qparam_guards() {
        assert!(QParam::above_one(1.0).is_err());
        assert!(QParam::above_one(1.0 + 1e-13).is_err());
        assert!(QParam::below_one(1.0 - 1e-13).is_err());
        assert!(QParam::below_one(0.0).is_err());
        assert!(QParam::below_one(-0.5).is_err());
    }
}
