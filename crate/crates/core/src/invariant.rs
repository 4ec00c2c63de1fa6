//! Recombined and quantile I-statistics for the mean and central moments,
//! standardized moments, the calibrated fixed-point iteration on kurtosis
//! and skewness, and RMSE-optimal combination selection.

use crate::calibration::{interpolate_d, DTable, ITable};
use crate::error::{Error, Result};
use crate::lstats::{
    empirical_cdf_value, evaluate_wl, sample_quantile, QuantileScheme, Sample, WlSpec,
};
use crate::rng::derive_seed;
use crate::scalar::{Flagged, Real};
use crate::ustats::{adjust_breakdown_real, kernel_sample, KernelSpec};

/// Closed form of the recombination limit: (d+1) lu1 - d lu2.
#[inline]
pub fn recombined<T: Real>(lu1_value: T, lu2_value: T, d: T) -> T {
    (d + T::one()) * lu1_value - d * lu2_value
}

/// Percentile shift relative to the pivot gamma/(1+gamma). The same
/// expression covers both sides of the pivot.
#[inline]
pub fn shift_percentile<T: Real>(p0: T, pivot: T, d: T) -> T {
    p0 + d * (p0 - pivot)
}

/// Configuration of a quantile I-statistic stage over a kernel-evaluation
/// sample. `epsilon` is the breakdown in kernel percentile space (already
/// degree-adjusted for kernel order > 1); the shifted percentile clamps to
/// [gamma*epsilon, 1-epsilon].
#[derive(Debug, Clone, PartialEq)]
pub struct QiConfig<T> {
    pub d: T,
    pub wl: WlSpec<T>,
    pub gamma: T,
    pub epsilon: T,
    pub scheme: QuantileScheme,
}

/// Quantile statistic over a materialized kernel-evaluation sample. The
/// flag records whether the shifted percentile was clamped.
pub fn quantile_statistic<T: Real>(
    kernel_values: &Sample<T>,
    cfg: &QiConfig<T>,
) -> Result<Flagged<T>> {
    let lu = evaluate_wl(kernel_values, &cfg.wl)?;
    let p0 = empirical_cdf_value(kernel_values, lu, cfg.scheme)?;
    if p0.clamped {
        return Err(Error::Internal(
            "weighted L-statistic fell outside its own sample".into(),
        ));
    }
    let pivot = cfg.gamma / (T::one() + cfg.gamma);
    let shifted = shift_percentile(p0.value, pivot, cfg.d);
    let lo = cfg.gamma * cfg.epsilon;
    let hi = T::one() - cfg.epsilon;
    let clamped = shifted < lo || shifted > hi;
    let p = shifted.max(lo).min(hi);
    let value = sample_quantile(kernel_values, p, cfg.scheme)?;
    Ok(Flagged { value, clamped })
}

/// Weighted L-statistic pair for a recombined estimator, carried with the
/// target overall breakdown (degree adjustment happens per kernel order).
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MomentWls<T> {
    pub wl1: WlSpec<T>,
    pub wl2: WlSpec<T>,
    pub eps_target: T,
}

impl<T: Real> MomentWls<T> {
    pub fn new(wl1: WlSpec<T>, wl2: WlSpec<T>, eps_target: T) -> Self {
        MomentWls {
            wl1,
            wl2,
            eps_target,
        }
    }

    fn adjusted(&self, order: u8) -> Result<(WlSpec<T>, WlSpec<T>)> {
        let eps0 = adjust_breakdown_real(self.eps_target, order)?;
        Ok((self.wl1.with_epsilon(eps0)?, self.wl2.with_epsilon(eps0)?))
    }
}

/// Recombined k-th central moment (the mean for k = 1): both weighted
/// L-statistics are taken over the same kernel-evaluation sample.
pub fn rkm<T: Real>(
    s: &Sample<T>,
    order: u8,
    d: T,
    wls: &MomentWls<T>,
    size: usize,
    seed: u64,
) -> Result<T> {
    let kernel = KernelSpec::new(order)?;
    let ks = kernel_sample(s, kernel, size, seed)?;
    rkm_on_kernel_sample(&ks, order, d, wls)
}

/// Same as [`rkm`] on a pre-materialized kernel sample.
pub fn rkm_on_kernel_sample<T: Real>(
    kernel_values: &Sample<T>,
    order: u8,
    d: T,
    wls: &MomentWls<T>,
) -> Result<T> {
    let (wl1, wl2) = wls.adjusted(order)?;
    let a = evaluate_wl(kernel_values, &wl1)?;
    let b = evaluate_wl(kernel_values, &wl2)?;
    Ok(recombined(a, b, d))
}

/// Quantile k-th central moment (the mean for k = 1).
pub fn qkm<T: Real>(
    s: &Sample<T>,
    order: u8,
    d: T,
    wl: &WlSpec<T>,
    gamma: T,
    eps_target: T,
    scheme: QuantileScheme,
    size: usize,
    seed: u64,
) -> Result<Flagged<T>> {
    let kernel = KernelSpec::new(order)?;
    let ks = kernel_sample(s, kernel, size, seed)?;
    qkm_on_kernel_sample(&ks, order, d, wl, gamma, eps_target, scheme)
}

pub fn qkm_on_kernel_sample<T: Real>(
    kernel_values: &Sample<T>,
    order: u8,
    d: T,
    wl: &WlSpec<T>,
    gamma: T,
    eps_target: T,
    scheme: QuantileScheme,
) -> Result<Flagged<T>> {
    let eps0 = adjust_breakdown_real(eps_target, order)?;
    let cfg = QiConfig {
        d,
        wl: wl.with_epsilon(eps0)?,
        gamma,
        epsilon: eps0,
        scheme,
    };
    quantile_statistic(kernel_values, &cfg)
}

/// Which I-statistic family an estimator belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StandardizedKind {
    Recombined,
    Quantile,
}

/// Estimator configuration for one moment order, covering both families.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentEstimator<T> {
    Recombined(MomentWls<T>),
    Quantile {
        wl: WlSpec<T>,
        gamma: T,
        eps_target: T,
        scheme: QuantileScheme,
    },
}

impl<T: Real> MomentEstimator<T> {
    pub fn estimate_on_kernel_sample(
        &self,
        kernel_values: &Sample<T>,
        order: u8,
        d: T,
    ) -> Result<Flagged<T>> {
        match self {
            MomentEstimator::Recombined(wls) => Ok(Flagged::exact(rkm_on_kernel_sample(
                kernel_values,
                order,
                d,
                wls,
            )?)),
            MomentEstimator::Quantile {
                wl,
                gamma,
                eps_target,
                scheme,
            } => qkm_on_kernel_sample(kernel_values, order, d, wl, *gamma, *eps_target, *scheme),
        }
    }
}

/// Standardized k-th moment (k = 3 or 4): the k-th moment estimate divided
/// by the variance estimate to the power k/2.
#[allow(clippy::too_many_arguments)]
pub fn standardized_moment<T: Real>(
    s: &Sample<T>,
    order: u8,
    numerator: &MomentEstimator<T>,
    numerator_d: T,
    variance: &MomentEstimator<T>,
    variance_d: T,
    size: usize,
    seed: u64,
) -> Result<T> {
    if !(order == 3 || order == 4) {
        return Err(Error::domain(format!(
            "standardized moment order must be 3 or 4, got {order}"
        )));
    }
    let ks_num = kernel_sample(s, KernelSpec::new(order)?, size, derive_seed(seed, order as u64))?;
    let ks_var = kernel_sample(s, KernelSpec::new(2)?, size, derive_seed(seed, 2))?;
    let num = numerator
        .estimate_on_kernel_sample(&ks_num, order, numerator_d)?
        .value;
    let var = variance
        .estimate_on_kernel_sample(&ks_var, 2, variance_d)?
        .value;
    if !(var > T::zero()) {
        return Err(Error::Numeric(format!(
            "variance estimate must be positive, got {var}"
        )));
    }
    Ok(num / var.powf(T::of(f64::from(order)) * T::of(0.5)))
}

/// Fixed-point iteration control. Iteration starts from the largest key in
/// the lookup table and stops on |x_i - x_{i-1}| < tolerance or after
/// `max_iterations` steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointConfig<T> {
    pub max_iterations: usize,
    pub tolerance: T,
}

impl<T: Real> Default for FixedPointConfig<T> {
    fn default() -> Self {
        FixedPointConfig {
            max_iterations: 100,
            tolerance: T::of(1e-4),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointOutcome<T> {
    pub value: T,
    pub iterations: usize,
    pub converged: bool,
    /// The final lookup clamped to the table boundary; the value is still
    /// the estimate computed with the boundary calibration.
    pub at_boundary: bool,
}

fn run_fixed_point<T: Real, F: FnMut(T) -> Result<Flagged<T>>>(
    start_key: T,
    cfg: &FixedPointConfig<T>,
    mut step: F,
) -> Result<FixedPointOutcome<T>> {
    if cfg.max_iterations == 0 {
        return Err(Error::domain("fixed point needs max_iterations >= 1".into()));
    }
    let first = step(start_key)?;
    let mut prev = first.value;
    let mut at_boundary = first.clamped;
    if !prev.is_finite() {
        return Err(Error::Numeric(format!(
            "fixed point diverged at start: iterate {prev} from key {start_key}"
        )));
    }
    let mut iterations = 1usize;
    let mut converged = false;
    while iterations < cfg.max_iterations {
        let next = step(prev)?;
        iterations += 1;
        at_boundary = next.clamped;
        if !next.value.is_finite() {
            return Err(Error::Numeric(format!(
                "fixed point diverged after {iterations} iterations (last iterate {prev})"
            )));
        }
        let delta = (next.value - prev).abs();
        prev = next.value;
        if delta < cfg.tolerance {
            converged = true;
            break;
        }
    }
    Ok(FixedPointOutcome {
        value: prev,
        iterations,
        converged,
        at_boundary,
    })
}

/// Calibrated kurtosis fixed point: iterate x -> standardized 4th moment
/// computed with d values D(x, 2) and D(x, 4).
#[allow(clippy::too_many_arguments)]
pub fn fixed_point_kurt<T: Real>(
    s: &Sample<T>,
    d_var: &DTable<T>,
    d_fourth: &DTable<T>,
    fourth: &MomentEstimator<T>,
    variance: &MomentEstimator<T>,
    cfg: &FixedPointConfig<T>,
    size: usize,
    seed: u64,
) -> Result<FixedPointOutcome<T>> {
    let ks4 = kernel_sample(s, KernelSpec::new(4)?, size, derive_seed(seed, 4))?;
    let ks2 = kernel_sample(s, KernelSpec::new(2)?, size, derive_seed(seed, 2))?;
    let start = d_fourth.key_max()?;
    run_fixed_point(start, cfg, |x| {
        let d4 = interpolate_d(d_fourth, x)?;
        let d2 = interpolate_d(d_var, x)?;
        let num = fourth.estimate_on_kernel_sample(&ks4, 4, d4.value)?;
        let var = variance.estimate_on_kernel_sample(&ks2, 2, d2.value)?;
        if !(var.value > T::zero()) {
            return Err(Error::Numeric(format!(
                "variance estimate must be positive, got {}",
                var.value
            )));
        }
        Ok(Flagged {
            value: num.value / (var.value * var.value),
            clamped: d4.clamped || d2.clamped || num.clamped || var.clamped,
        })
    })
}

/// Calibrated |skewness| fixed point: iterate y -> |standardized 3rd moment|
/// computed with d values D(y, 2) and D(y, 3). Callers handle left skew by
/// mirroring the sample first.
#[allow(clippy::too_many_arguments)]
pub fn fixed_point_skew<T: Real>(
    s: &Sample<T>,
    d_var: &DTable<T>,
    d_third: &DTable<T>,
    third: &MomentEstimator<T>,
    variance: &MomentEstimator<T>,
    cfg: &FixedPointConfig<T>,
    size: usize,
    seed: u64,
) -> Result<FixedPointOutcome<T>> {
    let ks3 = kernel_sample(s, KernelSpec::new(3)?, size, derive_seed(seed, 3))?;
    let ks2 = kernel_sample(s, KernelSpec::new(2)?, size, derive_seed(seed, 2))?;
    let start = d_third.key_max()?;
    run_fixed_point(start, cfg, |y| {
        let d3 = interpolate_d(d_third, y)?;
        let d2 = interpolate_d(d_var, y)?;
        let num = third.estimate_on_kernel_sample(&ks3, 3, d3.value)?;
        let var = variance.estimate_on_kernel_sample(&ks2, 2, d2.value)?;
        if !(var.value > T::zero()) {
            return Err(Error::Numeric(format!(
                "variance estimate must be positive, got {}",
                var.value
            )));
        }
        Ok(Flagged {
            value: (num.value / var.value.powf(T::of(1.5))).abs(),
            clamped: d3.clamped || d2.clamped || num.clamped || var.clamped,
        })
    })
}

/// A quick, robust sign estimate for the sample's skewness: the quartile
/// (Bowley) skew of the raw sample.
pub fn skewness_sign<T: Real>(s: &Sample<T>) -> Result<T> {
    let q1 = sample_quantile(s, T::of(0.25), QuantileScheme::ModeInterp)?;
    let q2 = sample_quantile(s, T::of(0.5), QuantileScheme::ModeInterp)?;
    let q3 = sample_quantile(s, T::of(0.75), QuantileScheme::ModeInterp)?;
    Ok((q3 + q1 - q2 - q2).signum())
}

/// One candidate estimator combination: weighted L-statistics for the
/// numerator kernel and for the variance kernel.
pub type Combo<T> = (MomentEstimator<T>, MomentEstimator<T>);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IkmConfig {
    pub size: usize,
    pub seed: u64,
    pub fixed_point: FixedPointConfigF,
}

/// FixedPointConfig with f64 fields so IkmConfig stays Copy for any T.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPointConfigF {
    pub max_iterations: usize,
    pub tolerance: f64,
}

impl Eq for FixedPointConfigF {}

impl Default for FixedPointConfigF {
    fn default() -> Self {
        FixedPointConfigF {
            max_iterations: 100,
            tolerance: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IkmSelection<T> {
    /// Standardized estimate of the selected combination.
    pub estimate: T,
    /// Index into the supplied combination list.
    pub chosen: usize,
    /// Consensus key: mean of the 1/5..4/5 quantiles of the per-combination
    /// fixed points, used to address the lookup table.
    pub consensus_key: T,
    /// d values interpolated at the consensus key (numerator, variance).
    pub d_values: (T, T),
    /// Combinations excluded because their shifted percentile left the
    /// breakdown window.
    pub excluded: Vec<usize>,
}

/// Select the RMSE-optimal combination through the calibrated lookup table:
/// run the fixed point per combination (with the table's d values), form the
/// vector of fixed points, take its central quantiles as the consensus key,
/// and report the combination the table holds optimal there.
pub fn ikm_select<T: Real>(
    s: &Sample<T>,
    table: &ITable<T>,
    combos: &[Combo<T>],
    cfg: &IkmConfig,
) -> Result<IkmSelection<T>> {
    if combos.is_empty() {
        return Err(Error::domain("no combinations supplied".into()));
    }
    let order = table.meta.k;
    if !(order == 3 || order == 4) {
        return Err(Error::domain(format!(
            "combination selection expects a table of order 3 or 4, got {order}"
        )));
    }
    let fp_cfg = FixedPointConfig {
        max_iterations: cfg.fixed_point.max_iterations,
        tolerance: T::of(cfg.fixed_point.tolerance),
    };
    let ks_num = kernel_sample(
        s,
        KernelSpec::new(order)?,
        cfg.size,
        derive_seed(cfg.seed, u64::from(order)),
    )?;
    let ks_var = kernel_sample(s, KernelSpec::new(2)?, cfg.size, derive_seed(cfg.seed, 2))?;
    let start = table.key_max()?;
    let mut fixed_points: Vec<(usize, T)> = Vec::with_capacity(combos.len());
    let mut excluded = Vec::new();
    for (id, (num_est, var_est)) in combos.iter().enumerate() {
        let mut percentile_left_window = false;
        let outcome = run_fixed_point(start, &fp_cfg, |x| {
            let row = table.lookup(x)?;
            let num = num_est.estimate_on_kernel_sample(&ks_num, order, row.value.d_num)?;
            let var = var_est.estimate_on_kernel_sample(&ks_var, 2, row.value.d_var)?;
            if num.clamped || var.clamped {
                percentile_left_window = true;
            }
            if !(var.value > T::zero()) {
                return Err(Error::Numeric(format!(
                    "variance estimate must be positive, got {}",
                    var.value
                )));
            }
            let standardized = if order == 4 {
                num.value / (var.value * var.value)
            } else {
                (num.value / var.value.powf(T::of(1.5))).abs()
            };
            Ok(Flagged {
                value: standardized,
                clamped: row.clamped,
            })
        });
        match outcome {
            Ok(res) if !percentile_left_window => fixed_points.push((id, res.value)),
            Ok(_) => excluded.push(id),
            Err(Error::Numeric(_)) => excluded.push(id),
            Err(e) => return Err(e),
        }
    }
    if fixed_points.is_empty() {
        return Err(Error::AllCombinationsExcluded(format!(
            "{} of {} combinations dropped",
            excluded.len(),
            combos.len()
        )));
    }
    let vector = Sample::new(fixed_points.iter().map(|&(_, v)| v).collect())?;
    let mut consensus = T::zero();
    for i in 1..=4 {
        let p = T::of(i as f64 / 5.0);
        consensus += sample_quantile(&vector, p, QuantileScheme::ModeInterp)?;
    }
    consensus = consensus / T::of(4.0);
    let row = table.lookup(consensus)?;
    let chosen = if fixed_points.iter().any(|&(id, _)| id == row.value.combo) {
        row.value.combo
    } else {
        // table's pick was excluded on this sample; fall back to the first
        // surviving combination
        fixed_points[0].0
    };
    let estimate = fixed_points
        .iter()
        .find(|&&(id, _)| id == chosen)
        .map(|&(_, v)| v)
        .expect("chosen combination has a fixed point");
    Ok(IkmSelection {
        estimate,
        chosen,
        consensus_key: consensus,
        d_values: (row.value.d_num, row.value.d_var),
        excluded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    #[test]
    fn recombined_identities() {
        assert_eq!(recombined(3.0, 100.0, 0.0), 3.0);
        for d in [-0.5, 0.0, 0.103, 2.0] {
            let mu = 1.7;
            assert!((recombined(mu, mu, d) - mu).abs() < 1e-15);
        }
    }

    #[test]
    fn recombined_matches_ratio_limit() {
        // ((a+c)^{d+1} / (b+c)^d) - c approaches (d+1) a - d b as c grows
        let mut rng = SplitMix64::new(4);
        for _ in 0..200 {
            let a = rng.next_open01() * 10.0 - 5.0;
            let b = rng.next_open01() * 10.0 - 5.0;
            let d = rng.next_open01() * 2.0 - 0.5;
            let c = 1e6;
            let lim = ((a + c).powf(d + 1.0) / (b + c).powf(d)) - c;
            let closed = recombined(a, b, d);
            assert!(
                (lim - closed).abs() < 1e-3,
                "a={a} b={b} d={d}: {lim} vs {closed}"
            );
        }
    }

    #[test]
    fn recombined_exponential_paper_constants() {
        // closed-form constant for the injected reference estimator
        let c_ref: f64 = 26068394603446272.0 * (7.0f64 / 247.0).powf(1.0 / 6.0)
            * 11.0f64.powf(1.0 / 3.0)
            / (391.0f64.powf(5.0 / 6.0) * 101898752449325.0 * 5.0f64.sqrt());
        let bm = 1.0 + c_ref.ln();
        let d = -c_ref.ln() / (1.0 - std::f64::consts::LN_2 + c_ref.ln());
        assert!((d - 0.103).abs() < 5e-4, "d={d}");
        let rm = recombined(bm, std::f64::consts::LN_2, d);
        assert!((rm - 1.0).abs() < 5e-3, "rm={rm}");
    }

    #[test]
    fn percentile_shift_cases() {
        // printed arithmetic: p0=0.62, gamma=1, d=0.088
        let p = shift_percentile(0.62, 0.5, 0.088);
        assert!((p - 0.63056).abs() < 1e-12);
        // below-pivot branch is the same algebra
        let p = shift_percentile(0.4, 0.5, 0.1);
        assert!((p - (0.4 - 0.1 * 0.1)).abs() < 1e-15);
    }

    #[test]
    fn quantile_statistic_identity_at_zero_d() {
        let ks = Sample::new((1..=101).map(|i| i as f64).collect()).unwrap();
        let cfg = QiConfig {
            d: 0.0,
            wl: WlSpec::trimmed(0.1, 1.0).unwrap(),
            gamma: 1.0,
            epsilon: 0.1,
            scheme: QuantileScheme::ModeInterp,
        };
        let lu = evaluate_wl(&ks, &cfg.wl).unwrap();
        let out = quantile_statistic(&ks, &cfg).unwrap();
        assert!(!out.clamped);
        assert!((out.value - lu).abs() < 1e-9, "{} vs {lu}", out.value);
    }

    #[test]
    fn quantile_statistic_pivot_coincidence() {
        // symmetric sample, WL at the median: any d returns the median
        let ks = Sample::new((-50..=50).map(|i| i as f64).collect()).unwrap();
        for d in [0.0, 0.2, 0.9] {
            let cfg = QiConfig {
                d,
                wl: WlSpec::median(),
                gamma: 1.0,
                epsilon: 0.1,
                scheme: QuantileScheme::ModeInterp,
            };
            let out = quantile_statistic(&ks, &cfg).unwrap();
            assert!(out.value.abs() < 1e-12, "d={d}: {}", out.value);
        }
    }

    #[test]
    fn quantile_statistic_clamps_at_window() {
        // force a huge shift so the percentile exceeds 1 - eps
        let ks = Sample::new((1..=100).map(|i| i as f64).collect()).unwrap();
        let eps = 0.1;
        let cfg = QiConfig {
            d: 50.0,
            wl: WlSpec::quantile_point(0.8, 0.2).unwrap(),
            gamma: 1.0,
            epsilon: eps,
            scheme: QuantileScheme::ModeInterp,
        };
        let out = quantile_statistic(&ks, &cfg).unwrap();
        assert!(out.clamped);
        let expect = sample_quantile(&ks, 1.0 - eps, QuantileScheme::ModeInterp).unwrap();
        assert_eq!(out.value, expect);
    }

    #[test]
    fn rkm_order_one_is_recombined_wl() {
        let s = Sample::new(vec![1.0, 4.0, 2.0, 8.0, 5.0, 3.0, 9.0, 2.5]).unwrap();
        let wls = MomentWls::new(
            WlSpec::trimmed(1.0 / 24.0, 1.0).unwrap(),
            WlSpec::median(),
            1.0 / 24.0,
        );
        let d = 0.103;
        let v = rkm(&s, 1, d, &wls, 1 << 16, 0).unwrap();
        let a = evaluate_wl(&s, &wls.wl1.with_epsilon(1.0 / 24.0).unwrap()).unwrap();
        let b = evaluate_wl(&s, &wls.wl2.with_epsilon(1.0 / 24.0).unwrap()).unwrap();
        assert!((v - recombined(a, b, d)).abs() < 1e-14);
    }

    #[test]
    fn rkm_reduces_to_unbiased_moment() {
        // d = 0 and an untrimmed mean stage: exactly the U-statistic
        let mut rng = SplitMix64::new(8);
        let values: Vec<f64> = (0..30).map(|_| rng.next_open01() * 5.0).collect();
        let s = Sample::new(values.clone()).unwrap();
        let wls = MomentWls::new(
            WlSpec::trimmed(0.0, 1.0).unwrap(),
            WlSpec::median(),
            0.0,
        );
        for k in 2..=3u8 {
            let v = rkm(&s, k, 0.0, &wls, 1 << 17, 0).unwrap();
            let h = crate::ustats::exact_u_statistic(&s, KernelSpec::new(k).unwrap()).unwrap();
            assert!((v - h).abs() < 1e-10 * (1.0 + h.abs()), "k={k}: {v} vs {h}");
        }
    }

    #[test]
    fn qkm_degenerate_cases() {
        let s = Sample::new((1..=60).map(|i| i as f64 * 0.1).collect()).unwrap();
        let wl = WlSpec::trimmed(1.0 / 24.0, 1.0).unwrap();
        // k=1, d=0: the WL itself
        let v = qkm(
            &s,
            1,
            0.0,
            &wl,
            1.0,
            1.0 / 24.0,
            QuantileScheme::ModeInterp,
            1 << 16,
            0,
        )
        .unwrap();
        let lu = evaluate_wl(&s, &wl.with_epsilon(1.0 / 24.0).unwrap()).unwrap();
        assert!((v.value - lu).abs() < 1e-9);
    }

    #[test]
    fn fixed_point_rejects_zero_iterations() {
        let cfg = FixedPointConfig::<f64> {
            max_iterations: 0,
            tolerance: 1e-4,
        };
        let out = run_fixed_point(1.0, &cfg, |x| Ok(Flagged::exact(x)));
        assert!(out.is_err());
    }

    #[test]
    fn fixed_point_converges_on_contraction() {
        let cfg = FixedPointConfig::<f64> {
            max_iterations: 100,
            tolerance: 1e-10,
        };
        // x -> (x + 2/x)/2 converges to sqrt(2)
        let out = run_fixed_point(10.0, &cfg, |x| Ok(Flagged::exact(0.5 * (x + 2.0 / x))))
            .unwrap();
        assert!(out.converged);
        assert!((out.value - std::f64::consts::SQRT_2).abs() < 1e-9);
        assert!(!out.at_boundary);
    }

    #[test]
    fn skewness_sign_detects_direction() {
        let spec =
            crate::distributions::DistributionSpec::new(crate::distributions::Family::Exponential, 1.0, 1.0, 0.0)
                .unwrap();
        let values: Vec<f64> = crate::qmc::stratified_probabilities(2000, 1)
            .map(|p| spec.quantile(p).unwrap())
            .collect();
        let s = Sample::new(values.clone()).unwrap();
        assert!(skewness_sign(&s).unwrap() > 0.0);
        let mirrored = s.affine(-1.0, 0.0);
        assert!(skewness_sign(&mirrored).unwrap() < 0.0);
    }
}
