//! Special functions needed by the distribution catalog: log-gamma,
//! regularized incomplete gamma, error function and the normal quantile.
//! All are generic over the scalar type; coefficients are f64 literals
//! lifted through `Real::of`.

use crate::error::{Error, Result};
use crate::scalar::Real;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
];

/// Natural log of the gamma function for x > 0 (Lanczos approximation).
pub fn ln_gamma<T: Real>(x: T) -> T {
    let half = T::of(0.5);
    if x < half {
        // reflection; only reached by pathological shape parameters
        let pi = T::of(std::f64::consts::PI);
        return (pi / (pi * x).sin()).ln() - ln_gamma(T::one() - x);
    }
    let x = x - T::one();
    let mut acc = T::of(LANCZOS[0]);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc += T::of(c) / (x + T::of(i as f64));
    }
    let t = x + T::of(LANCZOS_G + 0.5);
    let sqrt_two_pi = T::of((2.0 * std::f64::consts::PI).sqrt());
    sqrt_two_pi.ln() + (x + half) * t.ln() - t + acc.ln()
}

/// Regularized lower incomplete gamma P(a, x), for a > 0, x >= 0.
pub fn gamma_p<T: Real>(a: T, x: T) -> Result<T> {
    if a <= T::zero() || x < T::zero() || !a.is_finite() || !x.is_finite() {
        return Err(Error::domain(format!("gamma_p domain: a={a}, x={x}")));
    }
    if x == T::zero() {
        return Ok(T::zero());
    }
    if x < a + T::one() {
        Ok(gamma_p_series(a, x))
    } else {
        Ok(T::one() - gamma_q_cf(a, x))
    }
}

/// Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x).
pub fn gamma_q<T: Real>(a: T, x: T) -> Result<T> {
    if a <= T::zero() || x < T::zero() || !a.is_finite() || !x.is_finite() {
        return Err(Error::domain(format!("gamma_q domain: a={a}, x={x}")));
    }
    if x == T::zero() {
        return Ok(T::one());
    }
    if x < a + T::one() {
        Ok(T::one() - gamma_p_series(a, x))
    } else {
        Ok(gamma_q_cf(a, x))
    }
}

fn gamma_p_series<T: Real>(a: T, x: T) -> T {
    let mut ap = a;
    let mut term = T::one() / a;
    let mut sum = term;
    for _ in 0..500 {
        ap += T::one();
        term = term * x / ap;
        sum += term;
        if term.abs() < sum.abs() * T::epsilon() {
            break;
        }
    }
    sum * (a * x.ln() - x - ln_gamma(a)).exp()
}

fn gamma_q_cf<T: Real>(a: T, x: T) -> T {
    // modified Lentz continued fraction
    let tiny = T::of(1e-300).max(T::min_positive_value());
    let mut b = x + T::one() - a;
    let mut c = T::one() / tiny;
    let mut d = T::one() / b;
    let mut h = d;
    for i in 1..500 {
        let an = -T::of(i as f64) * (T::of(i as f64) - a);
        b += T::of(2.0);
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = T::one() / d;
        let delta = d * c;
        h = h * delta;
        if (delta - T::one()).abs() < T::epsilon() {
            break;
        }
    }
    h * (a * x.ln() - x - ln_gamma(a)).exp()
}

/// Inverse of P(a, .): x with gamma_p(a, x) = p. Newton from a
/// Wilson-Hilferty start, guarded by bisection.
pub fn inv_gamma_p<T: Real>(a: T, p: T) -> Result<T> {
    if !(p > T::zero() && p < T::one()) || a <= T::zero() {
        return Err(Error::domain(format!("inv_gamma_p domain: a={a}, p={p}")));
    }
    let one = T::one();
    let mut x = if a > one {
        // Wilson-Hilferty
        let z = inv_norm_cdf(p)?;
        let nine_a = T::of(9.0) * a;
        let t = one - one / nine_a + z / nine_a.sqrt();
        a * t * t * t
    } else {
        let t = one - p * (one + a * T::of(0.76)); // crude but bracketed below
        if t <= T::zero() {
            T::of(1e-4)
        } else {
            (p * (ln_gamma(a) + a.ln()).exp()).powf(one / a)
        }
    };
    if !x.is_finite() || x <= T::zero() {
        x = a;
    }
    let mut lo = T::zero();
    let mut hi = T::infinity();
    for _ in 0..128 {
        let fx = gamma_p(a, x)? - p;
        if fx > T::zero() {
            hi = x;
        } else {
            lo = x;
        }
        // density of the standard gamma at x
        let dens = ((a - one) * x.ln() - x - ln_gamma(a)).exp();
        let mut next = if dens > T::zero() { x - fx / dens } else { x };
        if !(next > lo && next < hi) || !next.is_finite() {
            next = if hi.is_finite() {
                (lo + hi) * T::of(0.5)
            } else {
                x * T::of(2.0)
            };
        }
        if (next - x).abs() <= x.abs().max(one) * T::solver_eps() {
            return Ok(next);
        }
        x = next;
    }
    Ok(x)
}

/// erf via the incomplete gamma identity erf(x) = P(1/2, x^2).
pub fn erf<T: Real>(x: T) -> T {
    if x == T::zero() {
        return T::zero();
    }
    let p = gamma_p(T::of(0.5), x * x).unwrap_or_else(|_| T::one());
    if x > T::zero() {
        p
    } else {
        -p
    }
}

pub fn erfc<T: Real>(x: T) -> T {
    if x >= T::zero() {
        gamma_q(T::of(0.5), x * x).unwrap_or_else(|_| T::zero())
    } else {
        T::of(2.0) - erfc(-x)
    }
}

/// Standard normal CDF.
pub fn norm_cdf<T: Real>(x: T) -> T {
    let inv_sqrt2 = T::of(std::f64::consts::FRAC_1_SQRT_2);
    T::of(0.5) * erfc(-x * inv_sqrt2)
}

/// Standard normal density.
pub fn norm_pdf<T: Real>(x: T) -> T {
    let c = T::of(1.0 / (2.0 * std::f64::consts::PI).sqrt());
    c * (-x * x * T::of(0.5)).exp()
}

// Acklam's rational approximation to the normal quantile.
const ICDF_A: [f64; 6] = [
    -3.969683028665376e+01,
    2.209460984245205e+02,
    -2.759285104469687e+02,
    1.383577518672690e+02,
    -3.066479806614716e+01,
    2.506628277459239e+00,
];
const ICDF_B: [f64; 5] = [
    -5.447609879822406e+01,
    1.615858368580409e+02,
    -1.556989798598866e+02,
    6.680131188771972e+01,
    -1.328068155288572e+01,
];
const ICDF_C: [f64; 6] = [
    -7.784894002430293e-03,
    -3.223964580411365e-01,
    -2.400758277161838e+00,
    -2.549732539343734e+00,
    4.374664141464968e+00,
    2.938163982698783e+00,
];
const ICDF_D: [f64; 4] = [
    7.784695709041462e-03,
    3.224671290700398e-01,
    2.445134137142996e+00,
    3.754408661907416e+00,
];

/// Standard normal quantile, rational approximation refined by one Halley
/// step against the erfc-based CDF.
pub fn inv_norm_cdf<T: Real>(p: T) -> Result<T> {
    if !(p > T::zero() && p < T::one()) {
        return Err(Error::domain(format!("inv_norm_cdf domain: p={p}")));
    }
    let p_low = T::of(0.02425);
    let p_high = T::one() - p_low;
    let x = if p < p_low {
        let q = (T::of(-2.0) * p.ln()).sqrt();
        (((((T::of(ICDF_C[0]) * q + T::of(ICDF_C[1])) * q + T::of(ICDF_C[2])) * q
            + T::of(ICDF_C[3]))
            * q
            + T::of(ICDF_C[4]))
            * q
            + T::of(ICDF_C[5]))
            / ((((T::of(ICDF_D[0]) * q + T::of(ICDF_D[1])) * q + T::of(ICDF_D[2])) * q
                + T::of(ICDF_D[3]))
                * q
                + T::one())
    } else if p <= p_high {
        let q = p - T::of(0.5);
        let r = q * q;
        (((((T::of(ICDF_A[0]) * r + T::of(ICDF_A[1])) * r + T::of(ICDF_A[2])) * r
            + T::of(ICDF_A[3]))
            * r
            + T::of(ICDF_A[4]))
            * r
            + T::of(ICDF_A[5]))
            * q
            / (((((T::of(ICDF_B[0]) * r + T::of(ICDF_B[1])) * r + T::of(ICDF_B[2])) * r
                + T::of(ICDF_B[3]))
                * r
                + T::of(ICDF_B[4]))
                * r
                + T::one())
    } else {
        let q = (T::of(-2.0) * (T::one() - p).ln()).sqrt();
        -(((((T::of(ICDF_C[0]) * q + T::of(ICDF_C[1])) * q + T::of(ICDF_C[2])) * q
            + T::of(ICDF_C[3]))
            * q
            + T::of(ICDF_C[4]))
            * q
            + T::of(ICDF_C[5]))
            / ((((T::of(ICDF_D[0]) * q + T::of(ICDF_D[1])) * q + T::of(ICDF_D[2])) * q
                + T::of(ICDF_D[3]))
                * q
                + T::one())
    };
    // Halley refinement
    let e = norm_cdf(x) - p;
    let u = e / norm_pdf(x);
    Ok(x - u / (T::one() + x * u * T::of(0.5)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_gamma_known_values() {
        assert!((ln_gamma(1.0f64)).abs() < 1e-13);
        assert!((ln_gamma(2.0f64)).abs() < 1e-13);
        assert!((ln_gamma(0.5f64) - 0.5 * std::f64::consts::PI.ln()).abs() < 1e-13);
        // Gamma(5) = 24
        assert!((ln_gamma(5.0f64) - 24.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn gamma_p_complement() {
        for &(a, x) in &[(0.5, 0.3), (2.0, 1.7), (7.5, 9.0), (0.2, 0.01)] {
            let p: f64 = gamma_p(a, x).unwrap();
            let q: f64 = gamma_q(a, x).unwrap();
            assert!((p + q - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn gamma_p_exponential_case() {
        // P(1, x) = 1 - e^{-x}
        for &x in &[0.1, 1.0, 3.0, 10.0] {
            let p: f64 = gamma_p(1.0, x).unwrap();
            assert!((p - (1.0 - (-x as f64).exp())).abs() < 1e-14);
        }
    }

    #[test]
    fn inv_gamma_round_trip() {
        for &a in &[0.3, 0.7, 1.0, 2.0, 5.0, 20.0] {
            for &p in &[0.001, 0.1, 0.5, 0.9, 0.999] {
                let x: f64 = inv_gamma_p(a, p).unwrap();
                let back = gamma_p(a, x).unwrap();
                assert!(
                    (back - p).abs() < 1e-11,
                    "a={a} p={p} x={x} back={back}"
                );
            }
        }
    }

    #[test]
    fn inv_norm_matches_known_quantiles() {
        let x: f64 = inv_norm_cdf(0.975).unwrap();
        assert!((x - 1.959963984540054).abs() < 1e-12);
        let x: f64 = inv_norm_cdf(0.5).unwrap();
        assert!(x.abs() < 1e-14);
        let x: f64 = inv_norm_cdf(0.75).unwrap();
        assert!((x - 0.6744897501960817).abs() < 1e-12);
    }

    #[test]
    fn inv_norm_round_trip_tails() {
        for &p in &[1e-10, 1e-6, 0.01, 0.3, 0.7, 0.99, 1.0 - 1e-6] {
            let x: f64 = inv_norm_cdf(p).unwrap();
            assert!((norm_cdf(x) - p).abs() <= 1e-12 * p.max(1e-3), "p={p}");
        }
    }
}
