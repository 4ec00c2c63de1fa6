//! Central-moment kernels, exact and quasi-bootstrap U-statistics,
//! LU-statistics (a weighted L-statistic over sorted kernel evaluations)
//! and breakdown-point arithmetic in exact rationals.

use num_rational::Ratio;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lstats::{evaluate_wl, Sample, WlSpec};
use crate::numeric::mean;
use crate::qmc::{point_to_distinct_indices, SobolSequence};
use crate::scalar::Real;

/// Degree-k symmetric kernel whose expectation over i.i.d. draws is the
/// k-th central moment (the identity for k = 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KernelSpec {
    order: u8,
}

impl KernelSpec {
    pub fn new(order: u8) -> Result<Self> {
        if (1..=4).contains(&order) {
            Ok(KernelSpec { order })
        } else {
            Err(Error::domain(format!("kernel order must be 1..=4, got {order}")))
        }
    }

    pub fn order(self) -> u8 {
        self.order
    }
}

/// Evaluate the central-moment kernel on one argument tuple.
pub fn kernel_eval<T: Real>(kernel: KernelSpec, xs: &[T]) -> Result<T> {
    if xs.len() != kernel.order as usize {
        return Err(Error::domain(format!(
            "kernel of degree {} applied to {} arguments",
            kernel.order,
            xs.len()
        )));
    }
    Ok(kernel_eval_unchecked(kernel.order, xs))
}

#[inline]
fn kernel_eval_unchecked<T: Real>(order: u8, xs: &[T]) -> T {
    match order {
        1 => xs[0],
        2 => {
            let d = xs[0] - xs[1];
            d * d * T::of(0.5)
        }
        3 => {
            // (5/6) p3 - (1/2) p2 p1 + 2 e3
            let (a, b, c) = (xs[0], xs[1], xs[2]);
            let p1 = a + b + c;
            let p2 = a * a + b * b + c * c;
            let p3 = a * a * a + b * b * b + c * c * c;
            let e3 = a * b * c;
            T::of(5.0 / 6.0) * p3 - T::of(0.5) * p2 * p1 + T::of(2.0) * e3
        }
        4 => {
            // p4/4 - (p3 p1 - p4)/3 + (p2 e2 - p3 p1 + p4)/2 - 3 e4
            let (a, b, c, d) = (xs[0], xs[1], xs[2], xs[3]);
            let p1 = a + b + c + d;
            let p2 = a * a + b * b + c * c + d * d;
            let p3 = a * a * a + b * b * b + c * c * c + d * d * d;
            let p4 = a * a * a * a + b * b * b * b + c * c * c * c + d * d * d * d;
            let e2 = (p1 * p1 - p2) * T::of(0.5);
            let e4 = a * b * c * d;
            p4 * T::of(0.25) - (p3 * p1 - p4) * T::of(1.0 / 3.0)
                + (p2 * e2 - p3 * p1 + p4) * T::of(0.5)
                - T::of(3.0) * e4
        }
        _ => unreachable!("kernel order validated at construction"),
    }
}

/// Number of k-subsets of n, None on overflow.
pub fn subset_count(n: usize, k: u8) -> Option<u128> {
    let k = k as u128;
    let n = n as u128;
    if k > n {
        return Some(0);
    }
    let mut acc: u128 = 1;
    for j in 0..k {
        acc = acc.checked_mul(n - j)?;
        acc /= j + 1;
    }
    Some(acc)
}

fn check_arity<T: Real>(s: &Sample<T>, kernel: KernelSpec) -> Result<()> {
    if s.n() < kernel.order as usize {
        return Err(Error::InsufficientSample {
            required: kernel.order as usize,
            actual: s.n(),
        });
    }
    Ok(())
}

/// Average of the kernel over all C(n, k) index subsets.
pub fn exact_u_statistic<T: Real>(s: &Sample<T>, kernel: KernelSpec) -> Result<T> {
    check_arity(s, kernel)?;
    let values = enumerate_kernel(s, kernel);
    Ok(mean(&values))
}

fn enumerate_kernel<T: Real>(s: &Sample<T>, kernel: KernelSpec) -> Vec<T> {
    let n = s.n();
    let k = kernel.order as usize;
    let v = s.values();
    let count = subset_count(n, kernel.order).expect("subset count overflow") as usize;
    let mut out = Vec::with_capacity(count);
    let mut idx: Vec<usize> = (0..k).collect();
    let mut args = vec![T::zero(); k];
    loop {
        for (slot, &i) in args.iter_mut().zip(idx.iter()) {
            *slot = v[i];
        }
        out.push(kernel_eval_unchecked(kernel.order, &args));
        // next combination in lexicographic order
        let mut pos = k;
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            if idx[pos] != pos + n - k {
                break;
            }
        }
        idx[pos] += 1;
        for j in pos + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Deterministic quasi-bootstrap approximation of the U-statistic: a Sobol
/// point per draw is mapped to a distinct index tuple and the kernel values
/// are averaged. Falls back to full enumeration when C(n, k) <= size.
pub fn quasi_bootstrap_u<T: Real>(
    s: &Sample<T>,
    kernel: KernelSpec,
    size: usize,
    seed: u64,
) -> Result<T> {
    check_arity(s, kernel)?;
    if size == 0 {
        return Err(Error::domain("bootstrap size must be positive".into()));
    }
    let values = kernel_draws(s, kernel, size, seed);
    Ok(mean(&values))
}

fn kernel_draws<T: Real>(s: &Sample<T>, kernel: KernelSpec, size: usize, seed: u64) -> Vec<T> {
    if let Some(total) = subset_count(s.n(), kernel.order) {
        if total <= size as u128 {
            return enumerate_kernel(s, kernel);
        }
    }
    let n = s.n();
    let k = kernel.order as usize;
    let v = s.values();
    // chunked so draws can run in parallel while keeping a deterministic
    // draw-indexed layout
    const CHUNK: usize = 8192;
    let chunks: Vec<(usize, usize)> = (0..size)
        .step_by(CHUNK)
        .map(|start| (start, (start + CHUNK).min(size)))
        .collect();
    let mut out = vec![T::zero(); size];
    let slices: Vec<(usize, Vec<T>)> = chunks
        .par_iter()
        .map(|&(start, end)| {
            let mut seq = SobolSequence::new(k, seed);
            let mut point = vec![0.0f64; k];
            seq.seek(start as u64);
            let mut idx = Vec::with_capacity(k);
            let mut args = vec![T::zero(); k];
            let mut local = Vec::with_capacity(end - start);
            for _ in start..end {
                seq.next_point(&mut point);
                point_to_distinct_indices(&point, n, &mut idx);
                for (slot, &i) in args.iter_mut().zip(idx.iter()) {
                    *slot = v[i];
                }
                local.push(kernel_eval_unchecked(kernel.order, &args));
            }
            (start, local)
        })
        .collect();
    for (start, local) in slices {
        out[start..start + local.len()].copy_from_slice(&local);
    }
    out
}

/// Materialized kernel-evaluation sample: exact enumeration when it fits
/// under `size`, quasi-bootstrap draws otherwise.
pub fn kernel_sample<T: Real>(
    s: &Sample<T>,
    kernel: KernelSpec,
    size: usize,
    seed: u64,
) -> Result<Sample<T>> {
    check_arity(s, kernel)?;
    if kernel.order == 1 {
        return Ok(s.clone());
    }
    let draws = kernel_draws(s, kernel, size, seed);
    Sample::new(draws)
}

/// Default cap on materialized kernel evaluations.
pub const DEFAULT_BOOTSTRAP_SIZE: usize = 1 << 16;

/// A weighted L-statistic over the sorted kernel evaluations of a sample.
/// The stored spec's epsilon is the L-stage breakdown, already adjusted for
/// the kernel degree.
#[derive(Debug, Clone, PartialEq)]
pub struct LuSpec<T> {
    pub kernel: KernelSpec,
    pub wl: WlSpec<T>,
}

impl<T: Real> LuSpec<T> {
    /// Build from a target overall breakdown: the L-stage runs at
    /// eps0 = 1 - (1 - eps_target)^k.
    pub fn with_target_breakdown(kernel: KernelSpec, wl: WlSpec<T>, eps_target: T) -> Result<Self> {
        let eps0 = adjust_breakdown_real(eps_target, kernel.order)?;
        Ok(LuSpec {
            kernel,
            wl: wl.with_epsilon(eps0)?,
        })
    }

    /// Wrap a spec whose epsilon is already the L-stage breakdown.
    pub fn from_adjusted(kernel: KernelSpec, wl: WlSpec<T>) -> Self {
        LuSpec { kernel, wl }
    }

    pub fn epsilon0(&self) -> T {
        self.wl.epsilon
    }

    /// Overall breakdown point 1 - (1 - eps0)^{1/k}.
    pub fn overall_breakdown(&self) -> T {
        let one = T::one();
        one - (one - self.wl.epsilon).powf(one / T::of(f64::from(self.kernel.order)))
    }
}

/// LU-statistic: materialize kernel evaluations, sort, apply the weighted
/// L-statistic.
pub fn lu_statistic<T: Real>(
    s: &Sample<T>,
    lu: &LuSpec<T>,
    size: usize,
    seed: u64,
) -> Result<T> {
    let ks = kernel_sample(s, lu.kernel, size, seed)?;
    evaluate_wl(&ks, &lu.wl)
}

/// Exact breakdown adjustment eps0 = 1 - (1 - eps)^k in rational arithmetic.
pub fn adjust_breakdown(eps: Ratio<i64>, k: u8) -> Result<Ratio<i64>> {
    let one = Ratio::from_integer(1i64);
    if eps < Ratio::from_integer(0) || eps >= one {
        return Err(Error::domain(format!("breakdown must be in [0,1), got {eps}")));
    }
    let mut acc = one;
    let base = one - eps;
    for _ in 0..k {
        acc *= base;
    }
    Ok(one - acc)
}

/// Exact inverse map: overall breakdown 1 - (1 - eps0)^{1/k}, when the
/// k-th root of 1 - eps0 is rational; None otherwise.
pub fn overall_breakdown_exact(eps0: Ratio<i64>, k: u8) -> Option<Ratio<i64>> {
    let one = Ratio::from_integer(1i64);
    let rest = one - eps0;
    let num = integer_kth_root(*rest.numer(), k)?;
    let den = integer_kth_root(*rest.denom(), k)?;
    Some(one - Ratio::new(num, den))
}

fn integer_kth_root(v: i64, k: u8) -> Option<i64> {
    if v < 0 {
        return None;
    }
    let guess = (v as f64).powf(1.0 / f64::from(k)).round() as i64;
    for candidate in guess.saturating_sub(1)..=guess.saturating_add(1) {
        if candidate >= 0 && candidate.checked_pow(u32::from(k)) == Some(v) {
            return Some(candidate);
        }
    }
    None
}

/// Floating-point breakdown adjustment for estimator construction.
pub fn adjust_breakdown_real<T: Real>(eps: T, k: u8) -> Result<T> {
    if !(eps >= T::zero() && eps < T::one()) {
        return Err(Error::domain(format!("breakdown must be in [0,1), got {eps}")));
    }
    let one = T::one();
    Ok(one - (one - eps).powi(i32::from(k)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    fn sample(values: &[f64]) -> Sample<f64> {
        Sample::new(values.to_vec()).unwrap()
    }

    #[test]
    fn kernel_printed_examples() {
        let k2 = KernelSpec::new(2).unwrap();
        assert_eq!(kernel_eval(k2, &[3.0, 3.0]).unwrap(), 0.0);
        assert_eq!(kernel_eval(k2, &[0.0, 1.0]).unwrap(), 0.5);
        let k3 = KernelSpec::new(3).unwrap();
        for a in [-2.0, 0.0, 1.7] {
            assert!(kernel_eval(k3, &[a, a, a]).unwrap().abs() < 1e-12);
        }
        assert!(kernel_eval(k2, &[1.0]).is_err());
        assert!(KernelSpec::new(5).is_err());
    }

    #[test]
    fn exact_u_single_pair() {
        let s = sample(&[0.0, 1.0]);
        let v = exact_u_statistic(&s, KernelSpec::new(2).unwrap()).unwrap();
        assert_eq!(v, 0.5);
    }

    #[test]
    fn exact_u_constant_sample() {
        let s = sample(&[2.0; 6]);
        for k in 2..=4u8 {
            let v = exact_u_statistic(&s, KernelSpec::new(k).unwrap()).unwrap();
            assert!(v.abs() < 1e-12);
        }
    }

    /// Unbiased central-moment estimators in terms of power sums of the
    /// centered sample (the classical h-statistics); used as an oracle.
    pub(crate) fn h_statistic(values: &[f64], k: u8) -> f64 {
        let n = values.len() as f64;
        let mean: f64 = values.iter().sum::<f64>() / n;
        let m = |r: i32| -> f64 {
            values.iter().map(|&x| (x - mean).powi(r)).sum::<f64>() / n
        };
        match k {
            2 => n * m(2) / (n - 1.0),
            3 => n * n * m(3) / ((n - 1.0) * (n - 2.0)),
            4 => {
                let d = (n - 1.0) * (n - 2.0) * (n - 3.0);
                n * (n * n - 2.0 * n + 3.0) * m(4) / d
                    - 3.0 * n * (2.0 * n - 3.0) * m(2) * m(2) / d
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn exact_u_matches_h_statistics() {
        let mut rng = SplitMix64::new(99);
        for trial in 0..40 {
            let n = 4 + (trial % 9);
            let values: Vec<f64> = (0..n).map(|_| rng.next_open01() * 4.0 - 2.0).collect();
            let s = Sample::new(values.clone()).unwrap();
            for k in 2..=4u8 {
                let u = exact_u_statistic(&s, KernelSpec::new(k).unwrap()).unwrap();
                let h = h_statistic(&values, k);
                assert!(
                    (u - h).abs() <= 1e-10 * (1.0 + h.abs()),
                    "n={n} k={k} u={u} h={h}"
                );
            }
        }
    }

    #[test]
    fn quasi_bootstrap_exhaustion_fallback() {
        let s = sample(&[0.5, 1.5, 2.0, 3.0, 4.5]);
        let k = KernelSpec::new(2).unwrap();
        let exact = exact_u_statistic(&s, k).unwrap();
        // C(5,2) = 10 <= 100: silently exact
        let v = quasi_bootstrap_u(&s, k, 100, 7).unwrap();
        assert_eq!(v, exact);
    }

    #[test]
    fn quasi_bootstrap_three_point_example() {
        let s = sample(&[0.0, 1.0, 2.0]);
        let k = KernelSpec::new(2).unwrap();
        // kernel values {0.5, 2, 0.5}: exact mean 1.0; with size above C(3,2)
        // enumeration kicks in, so check the quasi path on a forced size by
        // verifying the exact value first
        assert!((exact_u_statistic(&s, k).unwrap() - 1.0).abs() < 1e-15);
        let v = quasi_bootstrap_u(&s, k, 100_000, 3).unwrap();
        assert!((v - 1.0).abs() < 0.01);
    }

    #[test]
    fn quasi_bootstrap_deterministic() {
        let mut rng = SplitMix64::new(1);
        let values: Vec<f64> = (0..300).map(|_| rng.next_open01()).collect();
        let s = Sample::new(values).unwrap();
        let k = KernelSpec::new(3).unwrap();
        let a = quasi_bootstrap_u(&s, k, 5000, 42).unwrap();
        let b = quasi_bootstrap_u(&s, k, 5000, 42).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
        let c = quasi_bootstrap_u(&s, k, 5000, 43).unwrap();
        assert_ne!(a.to_bits(), c.to_bits());
    }

    #[test]
    fn quasi_bootstrap_converges_to_exact() {
        let mut rng = SplitMix64::new(5);
        let values: Vec<f64> = (0..60).map(|_| rng.next_open01() * 3.0).collect();
        let s = Sample::new(values).unwrap();
        let k = KernelSpec::new(2).unwrap();
        let exact = exact_u_statistic(&s, k).unwrap();
        let approx = quasi_bootstrap_u(&s, k, 200_000, 11).unwrap();
        assert!((approx - exact).abs() < 5e-3 * (1.0 + exact.abs()));
    }

    #[test]
    fn lu_degenerate_order_one_is_wl() {
        let s = sample(&[5.0, 1.0, 3.0, 2.0, 4.0]);
        let lu = LuSpec::from_adjusted(KernelSpec::new(1).unwrap(), WlSpec::median());
        let v = lu_statistic(&s, &lu, 1 << 16, 0).unwrap();
        assert_eq!(v, 3.0);
    }

    #[test]
    fn lu_median_over_pairs() {
        let s = sample(&[1.0, 2.0, 3.0]);
        let lu = LuSpec::from_adjusted(KernelSpec::new(2).unwrap(), WlSpec::median());
        // kernel values {0.5, 2.0, 0.5} -> median 0.5
        let v = lu_statistic(&s, &lu, 1 << 16, 0).unwrap();
        assert!((v - 0.5).abs() < 1e-15);
    }

    #[test]
    fn lu_untrimmed_is_u_statistic() {
        let mut rng = SplitMix64::new(21);
        let values: Vec<f64> = (0..40).map(|_| rng.next_open01()).collect();
        let s = Sample::new(values).unwrap();
        let kernel = KernelSpec::new(2).unwrap();
        let wl = WlSpec::trimmed(0.0, 1.0).unwrap();
        let lu = LuSpec::from_adjusted(kernel, wl);
        let v = lu_statistic(&s, &lu, 1 << 16, 9).unwrap();
        let exact = exact_u_statistic(&s, kernel).unwrap();
        assert!((v - exact).abs() < 1e-12);
    }

    #[test]
    fn breakdown_adjustment_paper_constants() {
        let eps = Ratio::new(1i64, 24);
        assert_eq!(adjust_breakdown(eps, 2).unwrap(), Ratio::new(47, 576));
        assert_eq!(adjust_breakdown(eps, 3).unwrap(), Ratio::new(1657, 13824));
        assert_eq!(adjust_breakdown(eps, 4).unwrap(), Ratio::new(51935, 331776));
        assert_eq!(adjust_breakdown(eps, 1).unwrap(), eps);
    }

    #[test]
    fn breakdown_round_trip_exact() {
        for k in 1..=4u8 {
            for (num, den) in [(1i64, 24i64), (1, 8), (1, 12), (3, 100)] {
                let eps = Ratio::new(num, den);
                let eps0 = adjust_breakdown(eps, k).unwrap();
                let back = overall_breakdown_exact(eps0, k).unwrap();
                assert_eq!(back, eps);
            }
        }
    }

    #[test]
    fn kernel_scale_and_translation_laws() {
        let mut rng = SplitMix64::new(17);
        for _ in 0..50 {
            let xs: Vec<f64> = (0..4).map(|_| rng.next_open01() * 6.0 - 3.0).collect();
            let a = 0.5 + rng.next_open01() * 3.0;
            let t = rng.next_open01() * 10.0 - 5.0;
            for k in 1..=4u8 {
                let kernel = KernelSpec::new(k).unwrap();
                let args = &xs[..k as usize];
                let base = kernel_eval(kernel, args).unwrap();
                let scaled: Vec<f64> = args.iter().map(|&x| a * x).collect();
                let v = kernel_eval(kernel, &scaled).unwrap();
                assert!(
                    (v - a.powi(i32::from(k)) * base).abs() < 1e-9 * (1.0 + v.abs()),
                    "scale law k={k}"
                );
                if k >= 2 {
                    let shifted: Vec<f64> = args.iter().map(|&x| x + t).collect();
                    let w = kernel_eval(kernel, &shifted).unwrap();
                    assert!(
                        (w - base).abs() < 1e-8 * (1.0 + base.abs()),
                        "translation invariance k={k}: {w} vs {base}"
                    );
                }
            }
        }
    }
}
