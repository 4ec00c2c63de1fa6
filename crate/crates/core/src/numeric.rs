//! Shared numeric utilities: deterministic summation, quadrature and
//! root bracketing.

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Pairwise summation in a fixed tree order. The result depends only on the
/// slice contents, never on thread count or chunking at call sites.
pub fn pairwise_sum<T: Real>(values: &[T]) -> T {
    const BASE: usize = 64;
    if values.len() <= BASE {
        let mut acc = T::zero();
        for &v in values {
            acc += v;
        }
        return acc;
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

pub fn mean<T: Real>(values: &[T]) -> T {
    pairwise_sum(values) / T::from_count(values.len())
}

/// Tanh-sinh (double exponential) quadrature over a finite interval.
/// Handles integrable endpoint singularities, which quantile functions
/// routinely have at 0 and 1.
pub fn integrate<T: Real, F: Fn(T) -> T>(f: F, a: T, b: T, rel_tol: T) -> Result<T> {
    if !(a < b) {
        return Err(Error::domain(format!(
            "integration bounds must satisfy a < b, got [{a}, {b}]"
        )));
    }
    let half = T::of(0.5);
    let center = (a + b) * half;
    let radius = (b - a) * half;
    let pi_half = T::of(std::f64::consts::FRAC_PI_2);

    // level 0: the single abscissa t = 0
    let mut sum = {
        let x = center;
        let w = pi_half;
        f(x) * w
    };
    let mut h = T::one();
    let mut previous = T::infinity();

    for level in 1..=12u32 {
        h = h * half;
        let mut level_sum = T::zero();
        let mut k: u64 = 1;
        loop {
            let t = h * T::of(k as f64);
            let (x_off, w) = tanh_sinh_node(t, pi_half);
            // x_off in (0,1): offset from the center in units of the radius
            let x_plus = center + radius * x_off;
            let x_minus = center - radius * x_off;
            let mut term = T::zero();
            if x_plus < b {
                term += f(x_plus) * w;
            }
            if x_minus > a {
                term += f(x_minus) * w;
            }
            level_sum += term;
            let tail = w * (f(x_plus.min(b - T::solver_eps() * radius))
                .abs()
                .max(T::one()));
            if x_off >= T::one() - T::epsilon() || (k > 8 && tail < T::of(1e-18)) {
                break;
            }
            k += 2; // only odd multiples are new at each level
            if k > 1 << 22 {
                break;
            }
        }
        sum = sum * half + level_sum * h;
        let estimate = sum * radius;
        if level >= 3 {
            let err = (estimate - previous).abs();
            if err <= rel_tol * estimate.abs().max(T::of(1e-300)) {
                return Ok(estimate);
            }
        }
        previous = sum * radius;
    }
    Ok(previous)
}

#[inline]
fn tanh_sinh_node<T: Real>(t: T, pi_half: T) -> (T, T) {
    let s = pi_half * t.sinh();
    let x = s.tanh();
    let cosh_s = s.cosh();
    let w = pi_half * t.cosh() / (cosh_s * cosh_s);
    (x, w)
}

/// Bisection for a continuous monotone function on a bracketing interval.
/// `increasing` states the direction of f; returns x with f(x) = target
/// within `f_tol`, or the midpoint once the interval is exhausted.
pub fn bisect_monotone<T: Real, F: Fn(T) -> Result<T>>(
    f: F,
    mut lo: T,
    mut hi: T,
    target: T,
    increasing: bool,
    f_tol: T,
) -> Result<T> {
    let mut x = (lo + hi) * T::of(0.5);
    for _ in 0..200 {
        x = (lo + hi) * T::of(0.5);
        if x <= lo || x >= hi {
            break;
        }
        let v = f(x)?;
        if (v - target).abs() <= f_tol {
            return Ok(x);
        }
        let go_right = if increasing { v < target } else { v > target };
        if go_right {
            lo = x;
        } else {
            hi = x;
        }
    }
    Ok(x)
}
