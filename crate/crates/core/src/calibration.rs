//! Calibration of the bias-correction coefficient d against a consistent
//! distribution, and the lookup tables mapping |skewness| or kurtosis to d
//! values (D tables) and to RMSE-optimal estimator combinations (I tables).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{shape_from_kurtosis, shape_from_skewness, DistributionSpec, Family};
use crate::error::{Error, Result};
use crate::invariant::{Combo, MomentEstimator, MomentWls};
use crate::lstats::{
    asymptotic_wl_auto, empirical_cdf_value, evaluate_wl, QuantileScheme, Sample, WlSpec,
};
use crate::qmc::stratified_probabilities;
use crate::rng::derive_seed;
use crate::scalar::{Flagged, Real};
use crate::ustats::{adjust_breakdown_real, kernel_sample, KernelSpec};

pub const TABLE_FORMAT_VERSION: u32 = 1;
pub const DEFAULT_CAL_BASE_N: usize = 8192;
pub const DEFAULT_CAL_DRAWS: usize = 1 << 20;

/// d for the recombined mean of the exponential family with two quantile
/// points: -(ln(1-p1) + 1) / (ln(1-p1) - ln(1-p2)).
pub fn d_rm_closed_exponential<T: Real>(p1: T, p2: T) -> Result<T> {
    check_distinct_probabilities(p1, p2)?;
    let one = T::one();
    let l1 = (one - p1).ln();
    let l2 = (one - p2).ln();
    Ok(-(l1 + one) / (l1 - l2))
}

/// d for the quantile mean of the exponential family: (1 - 1/e - p1)/(p1 - p2).
pub fn d_qm_closed_exponential<T: Real>(p1: T, p2: T) -> Result<T> {
    check_distinct_probabilities(p1, p2)?;
    let e_inv = T::of(std::f64::consts::E).recip();
    Ok((T::one() - e_inv - p1) / (p1 - p2))
}

/// Pareto analogue of [`d_rm_closed_exponential`]; approaches it as the
/// shape grows.
pub fn d_rm_closed_pareto<T: Real>(shape: T, p1: T, p2: T) -> Result<T> {
    check_distinct_probabilities(p1, p2)?;
    if !(shape > T::one()) {
        return Err(Error::InfiniteMoment("pareto mean needs shape > 1".into()));
    }
    let one = T::one();
    let q1 = (one - p1).powf(-one / shape);
    let q2 = (one - p2).powf(-one / shape);
    Ok((shape / (shape - one) - q1) / (q1 - q2))
}

/// Pareto analogue of [`d_qm_closed_exponential`]:
/// (1 - ((a-1)/a)^a - p1) / (p1 - p2).
pub fn d_qm_closed_pareto<T: Real>(shape: T, p1: T, p2: T) -> Result<T> {
    check_distinct_probabilities(p1, p2)?;
    if !(shape > T::one()) {
        return Err(Error::InfiniteMoment("pareto mean needs shape > 1".into()));
    }
    let one = T::one();
    let f_mu = one - ((shape - one) / shape).powf(shape);
    Ok((f_mu - p1) / (p1 - p2))
}

fn check_distinct_probabilities<T: Real>(p1: T, p2: T) -> Result<()> {
    for p in [p1, p2] {
        if !(p > T::zero() && p < T::one()) {
            return Err(Error::domain(format!("probability {p} outside (0,1)")));
        }
    }
    if p1 == p2 {
        return Err(Error::DegeneratePair("p1 = p2".into()));
    }
    Ok(())
}

const DEGENERATE_REL_TOL: f64 = 1e-9;

/// d = (mean - A1)/(A1 - A2) with asymptotic weighted L-statistic values
/// A1, A2 on the consistent distribution.
pub fn d_rm_general<T: Real>(
    consistent: &DistributionSpec<T>,
    wl1: &WlSpec<T>,
    wl2: &WlSpec<T>,
    n_cal: usize,
    seed: u64,
) -> Result<T> {
    let mean = consistent.mean()?;
    let a1 = asymptotic_wl_auto(consistent, wl1, n_cal, derive_seed(seed, 1))?;
    let a2 = asymptotic_wl_auto(consistent, wl2, n_cal, derive_seed(seed, 2))?;
    let scale = a1.abs().max(a2.abs()).max(T::one());
    if (a1 - a2).abs() <= scale * T::of(DEGENERATE_REL_TOL) {
        return Err(Error::DegeneratePair(format!(
            "asymptotic values coincide: {a1} vs {a2}"
        )));
    }
    Ok((mean - a1) / (a1 - a2))
}

/// d = (F(mean) - F(A))/(F(A) - gamma/(1+gamma)), with every percentile
/// checked against the consistency window [gamma*eps, 1-eps].
pub fn d_qm_general<T: Real>(
    consistent: &DistributionSpec<T>,
    wl: &WlSpec<T>,
    gamma: T,
    epsilon: T,
    n_cal: usize,
    seed: u64,
) -> Result<T> {
    let mean = consistent.mean()?;
    let a = asymptotic_wl_auto(consistent, wl, n_cal, derive_seed(seed, 1))?;
    let f_mean = consistent.cdf(mean)?;
    let f_wl = consistent.cdf(a)?;
    let pivot = gamma / (T::one() + gamma);
    let lo = gamma * epsilon;
    let hi = T::one() - epsilon;
    for (name, p) in [("F(mean)", f_mean), ("F(WL)", f_wl), ("pivot", pivot)] {
        if p < lo || p > hi {
            return Err(Error::WindowViolation {
                what: name.into(),
                percentile: p.lossy_f64(),
                lo: lo.lossy_f64(),
                hi: hi.lossy_f64(),
            });
        }
    }
    if (f_wl - pivot).abs() <= T::of(DEGENERATE_REL_TOL) {
        return Err(Error::DegeneratePair(format!(
            "F(WL) = {f_wl} coincides with the pivot"
        )));
    }
    Ok((f_mean - f_wl) / (f_wl - pivot))
}

/// Asymptotics of a central-moment kernel distribution, materialized as a
/// large deterministic kernel-evaluation sample of the consistent
/// distribution.
pub struct KernelAsymptotics<T> {
    pub sample: Sample<T>,
    pub target: T,
    pub kernel_sd: Option<T>,
}

impl<T: Real> KernelAsymptotics<T> {
    pub fn build(
        spec: &DistributionSpec<T>,
        order: u8,
        n_cal: usize,
        seed: u64,
    ) -> Result<Self> {
        let moments = spec.population_moments()?;
        let target = moments.kernel_target(order);
        let kernel_sd = moments.sd_kernel[order as usize - 1];
        let sample = if order == 1 {
            let values: Result<Vec<T>> = stratified_probabilities(n_cal, seed)
                .map(|p| spec.quantile(T::of(p)))
                .collect();
            Sample::from_sorted(values?)
        } else {
            let base_n = DEFAULT_CAL_BASE_N.min(n_cal);
            let values: Result<Vec<T>> =
                stratified_probabilities(base_n, derive_seed(seed, 10))
                    .map(|p| spec.quantile(T::of(p)))
                    .collect();
            let base = Sample::from_sorted(values?);
            kernel_sample(&base, KernelSpec::new(order)?, n_cal, derive_seed(seed, 11))?
        };
        Ok(KernelAsymptotics {
            sample,
            target,
            kernel_sd,
        })
    }

    /// Calibrated d for one moment estimator on this kernel distribution.
    /// Near-degenerate geometry (numerator and denominator both vanishing,
    /// as happens towards symmetry) falls back to d = 0, which any d-value
    /// satisfies asymptotically there.
    pub fn calibrate(&self, est: &MomentEstimator<T>, order: u8) -> Result<Flagged<T>> {
        let sd = self
            .kernel_sd
            .unwrap_or_else(|| self.sample_sd())
            .max(T::of(1e-12));
        match est {
            MomentEstimator::Recombined(wls) => {
                let eps0 = adjust_breakdown_real(wls.eps_target, order)?;
                let a1 = evaluate_wl(&self.sample, &wls.wl1.with_epsilon(eps0)?)?;
                let a2 = evaluate_wl(&self.sample, &wls.wl2.with_epsilon(eps0)?)?;
                if (a1 - a2).abs() <= sd * T::of(1e-4) {
                    return Ok(Flagged::clamped(T::zero()));
                }
                Ok(Flagged::exact((self.target - a1) / (a1 - a2)))
            }
            MomentEstimator::Quantile {
                wl,
                gamma,
                eps_target,
                scheme,
            } => {
                let eps0 = adjust_breakdown_real(*eps_target, order)?;
                let a = evaluate_wl(&self.sample, &wl.with_epsilon(eps0)?)?;
                let f_target = empirical_cdf_value(&self.sample, self.target, *scheme)?;
                let f_wl = empirical_cdf_value(&self.sample, a, *scheme)?;
                let pivot = *gamma / (T::one() + *gamma);
                let lo = *gamma * eps0;
                let hi = T::one() - eps0;
                for (name, p) in [
                    ("F(target)", f_target.value),
                    ("F(WL)", f_wl.value),
                    ("pivot", pivot),
                ] {
                    if p < lo || p > hi {
                        return Err(Error::WindowViolation {
                            what: name.into(),
                            percentile: p.lossy_f64(),
                            lo: lo.lossy_f64(),
                            hi: hi.lossy_f64(),
                        });
                    }
                }
                if (f_wl.value - pivot).abs() <= T::of(1e-4) {
                    return Ok(Flagged::clamped(T::zero()));
                }
                Ok(Flagged::exact(
                    (f_target.value - f_wl.value) / (f_wl.value - pivot),
                ))
            }
        }
    }

    fn sample_sd(&self) -> T {
        let v = self.sample.values();
        let n = T::from_count(v.len());
        let mean = crate::numeric::pairwise_sum(v) / n;
        let var: T = crate::numeric::pairwise_sum(
            &v.iter().map(|&x| (x - mean) * (x - mean)).collect::<Vec<_>>(),
        ) / n;
        var.sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EstimatorClass {
    #[serde(rename = "rm-type")]
    Recombined,
    #[serde(rename = "qm-type")]
    Quantile,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KeyKind {
    AbsSkewness,
    Kurtosis,
}

/// Grid of calibration keys: start + i*delta for i = 1..=count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub start: f64,
    pub delta: f64,
    pub count: usize,
}

impl GridConfig {
    /// The printed default: 70 keys spaced 0.1 above the family's lower
    /// kurtosis bound.
    pub fn standard_kurtosis(family: Family) -> GridConfig {
        let start = if family == Family::Pareto { 9.0 } else { 3.0 };
        GridConfig {
            start,
            delta: 0.1,
            count: 70,
        }
    }

    pub fn keys(&self) -> impl Iterator<Item = f64> + '_ {
        (1..=self.count).map(move |i| self.start + self.delta * i as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableMeta {
    pub family: Family,
    pub etype: EstimatorClass,
    pub k: u8,
    pub key_kind: KeyKind,
    pub delta: f64,
    #[serde(rename = "C")]
    pub count: usize,
    pub n_cal: usize,
    pub seed: u64,
    pub version: u32,
}

/// Calibration lookup table: sorted (key, d) rows with linear interpolation
/// and clamped, flagged extension beyond the key range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DTable<T> {
    pub meta: TableMeta,
    pub rows: Vec<(T, T)>,
}

impl<T: Real> DTable<T> {
    pub fn key_min(&self) -> Result<T> {
        self.rows
            .first()
            .map(|r| r.0)
            .ok_or_else(|| Error::EmptyTable("d table has no rows".into()))
    }

    pub fn key_max(&self) -> Result<T> {
        self.rows
            .last()
            .map(|r| r.0)
            .ok_or_else(|| Error::EmptyTable("d table has no rows".into()))
    }

    pub fn to_json_string(&self) -> Result<String>
    where
        T: Serialize,
    {
        serde_json::to_string_pretty(self).map_err(|e| Error::numeric(e.to_string()))
    }

    pub fn from_json_str(s: &str) -> Result<Self>
    where
        T: for<'de> Deserialize<'de>,
    {
        let table: DTable<T> =
            serde_json::from_str(s).map_err(|e| Error::parse(e.to_string()))?;
        if table.rows.is_empty() {
            return Err(Error::EmptyTable("d table has no rows".into()));
        }
        if !table.rows.windows(2).all(|w| w[0].0 < w[1].0) {
            return Err(Error::parse("d table keys must be strictly increasing".into()));
        }
        Ok(table)
    }
}

/// Piecewise-linear interpolation with clamped, flagged extension.
pub fn interpolate_d<T: Real>(table: &DTable<T>, key: T) -> Result<Flagged<T>> {
    let rows = &table.rows;
    if rows.is_empty() {
        return Err(Error::EmptyTable("d table has no rows".into()));
    }
    if key <= rows[0].0 {
        let exactly_at = key == rows[0].0;
        return Ok(Flagged {
            value: rows[0].1,
            clamped: !exactly_at,
        });
    }
    if key >= rows[rows.len() - 1].0 {
        let exactly_at = key == rows[rows.len() - 1].0;
        return Ok(Flagged {
            value: rows[rows.len() - 1].1,
            clamped: !exactly_at,
        });
    }
    let idx = rows.partition_point(|r| r.0 <= key);
    let (k0, d0) = rows[idx - 1];
    let (k1, d1) = rows[idx];
    let t = (key - k0) / (k1 - k0);
    Ok(Flagged::exact(d0 + t * (d1 - d0)))
}

/// Outcome of a table build: the table plus any dropped rows or degenerate
/// fallbacks worth surfacing.
#[derive(Debug, Clone)]
pub struct DTableBuild<T> {
    pub table: DTable<T>,
    pub warnings: Vec<String>,
}

/// Build a D table for one moment order over a key grid of the consistent
/// family. Rows whose key the family cannot attain, or whose percentile
/// geometry is inconsistent, are dropped with a warning.
pub fn build_d_table<T: Real>(
    family: Family,
    estimator: &MomentEstimator<T>,
    order: u8,
    key_kind: KeyKind,
    grid: &GridConfig,
    n_cal: usize,
    seed: u64,
) -> Result<DTableBuild<T>> {
    let etype = match estimator {
        MomentEstimator::Recombined(_) => EstimatorClass::Recombined,
        MomentEstimator::Quantile { .. } => EstimatorClass::Quantile,
    };
    let keys: Vec<f64> = grid.keys().collect();
    let results: Vec<(f64, Result<Flagged<T>>)> = keys
        .par_iter()
        .map(|&key| {
            let row_seed = derive_seed(seed, key.to_bits());
            let d = build_d_row(family, estimator, order, key_kind, key, n_cal, row_seed);
            (key, d)
        })
        .collect();
    let mut rows = Vec::with_capacity(keys.len());
    let mut warnings = Vec::new();
    for (key, outcome) in results {
        match outcome {
            Ok(flagged) => {
                if flagged.clamped {
                    warnings.push(format!(
                        "key {key}: near-degenerate calibration, using d = 0"
                    ));
                }
                rows.push((T::of(key), flagged.value));
            }
            Err(e) => warnings.push(format!("key {key} dropped: {e}")),
        }
    }
    if rows.is_empty() {
        return Err(Error::EmptyTable(format!(
            "no calibratable rows for {family} ({} warnings)",
            warnings.len()
        )));
    }
    Ok(DTableBuild {
        table: DTable {
            meta: TableMeta {
                family,
                etype,
                k: order,
                key_kind,
                delta: grid.delta,
                count: grid.count,
                n_cal,
                seed,
                version: TABLE_FORMAT_VERSION,
            },
            rows,
        },
        warnings,
    })
}

fn build_d_row<T: Real>(
    family: Family,
    estimator: &MomentEstimator<T>,
    order: u8,
    key_kind: KeyKind,
    key: f64,
    n_cal: usize,
    seed: u64,
) -> Result<Flagged<T>> {
    let shape = match key_kind {
        KeyKind::Kurtosis => shape_from_kurtosis::<T>(family, T::of(key))?,
        KeyKind::AbsSkewness => shape_from_skewness::<T>(family, T::of(key))?,
    };
    let spec = DistributionSpec::standard(family, shape)?;
    let asym = KernelAsymptotics::build(&spec, order, n_cal, seed)?;
    asym.calibrate(estimator, order)
}

/// Build the kurtosis-keyed variance/fourth-moment table pair and run the
/// attraction envelope check: the calibrated map evaluated at the top key,
/// on mid-grid data, must come back below the top key.
#[allow(clippy::too_many_arguments)]
pub fn build_kurt_table_pair<T: Real>(
    family: Family,
    fourth: &MomentEstimator<T>,
    variance: &MomentEstimator<T>,
    grid: &GridConfig,
    n_cal: usize,
    seed: u64,
) -> Result<(DTableBuild<T>, DTableBuild<T>)> {
    let var_build = build_d_table(
        family,
        variance,
        2,
        KeyKind::Kurtosis,
        grid,
        n_cal,
        derive_seed(seed, 2),
    )?;
    let fourth_build = build_d_table(
        family,
        fourth,
        4,
        KeyKind::Kurtosis,
        grid,
        n_cal,
        derive_seed(seed, 4),
    )?;
    envelope_check(
        family,
        &var_build.table,
        &fourth_build.table,
        fourth,
        variance,
        n_cal,
        derive_seed(seed, 99),
    )?;
    Ok((var_build, fourth_build))
}

fn envelope_check<T: Real>(
    family: Family,
    d_var: &DTable<T>,
    d_fourth: &DTable<T>,
    fourth: &MomentEstimator<T>,
    variance: &MomentEstimator<T>,
    n_cal: usize,
    seed: u64,
) -> Result<()> {
    let key_max = d_fourth.key_max()?;
    let mid_key = d_fourth.rows[d_fourth.rows.len() / 2].0;
    let shape = shape_from_kurtosis::<T>(family, mid_key)?;
    let spec = DistributionSpec::standard(family, shape)?;
    let ks4 = KernelAsymptotics::build(&spec, 4, n_cal, derive_seed(seed, 4))?;
    let ks2 = KernelAsymptotics::build(&spec, 2, n_cal, derive_seed(seed, 2))?;
    let d4 = interpolate_d(d_fourth, key_max)?.value;
    let d2 = interpolate_d(d_var, key_max)?.value;
    let num = fourth.estimate_on_kernel_sample(&ks4.sample, 4, d4)?.value;
    let var = variance.estimate_on_kernel_sample(&ks2.sample, 2, d2)?.value;
    if !(var > T::zero()) {
        return Err(Error::Numeric("envelope check: non-positive variance".into()));
    }
    let mapped = num / (var * var);
    if !(mapped < key_max) {
        return Err(Error::Numeric(format!(
            "attraction envelope violated: map({key_max}) = {mapped} on mid-grid data"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IRow<T> {
    pub combo: usize,
    pub d_num: T,
    pub d_var: T,
}

/// Lookup table from kurtosis to the RMSE-optimal combination and its d
/// values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ITable<T> {
    pub meta: TableMeta,
    pub combos: Vec<(MomentEstimator<T>, MomentEstimator<T>)>,
    pub rows: Vec<(T, usize, T, T)>,
}

impl<T: Real> ITable<T> {
    pub fn key_max(&self) -> Result<T> {
        self.rows
            .last()
            .map(|r| r.0)
            .ok_or_else(|| Error::EmptyTable("i table has no rows".into()))
    }

    /// Interpolated d values plus the combination of the nearest row.
    pub fn lookup(&self, key: T) -> Result<Flagged<IRow<T>>> {
        if self.rows.is_empty() {
            return Err(Error::EmptyTable("i table has no rows".into()));
        }
        let first = &self.rows[0];
        let last = &self.rows[self.rows.len() - 1];
        if key <= first.0 {
            return Ok(Flagged {
                value: IRow {
                    combo: first.1,
                    d_num: first.2,
                    d_var: first.3,
                },
                clamped: key < first.0,
            });
        }
        if key >= last.0 {
            return Ok(Flagged {
                value: IRow {
                    combo: last.1,
                    d_num: last.2,
                    d_var: last.3,
                },
                clamped: key > last.0,
            });
        }
        let idx = self.rows.partition_point(|r| r.0 <= key);
        let lo = &self.rows[idx - 1];
        let hi = &self.rows[idx];
        let t = (key - lo.0) / (hi.0 - lo.0);
        let combo = if key - lo.0 <= hi.0 - key { lo.1 } else { hi.1 };
        Ok(Flagged::exact(IRow {
            combo,
            d_num: lo.2 + t * (hi.2 - lo.2),
            d_var: lo.3 + t * (hi.3 - lo.3),
        }))
    }

    pub fn to_json_string(&self) -> Result<String>
    where
        T: Serialize,
    {
        serde_json::to_string_pretty(self).map_err(|e| Error::numeric(e.to_string()))
    }

    pub fn from_json_str(s: &str) -> Result<Self>
    where
        T: for<'de> Deserialize<'de>,
    {
        let table: ITable<T> =
            serde_json::from_str(s).map_err(|e| Error::parse(e.to_string()))?;
        if table.rows.is_empty() {
            return Err(Error::EmptyTable("i table has no rows".into()));
        }
        Ok(table)
    }
}

#[derive(Debug, Clone)]
pub struct ITableBuild<T> {
    pub table: ITable<T>,
    pub warnings: Vec<String>,
}

/// Build an I table: per grid kurtosis, calibrate every combination's d
/// values asymptotically, measure each combination's Monte Carlo RMSE for
/// the standardized moment at sample size n, and store the argmin.
#[allow(clippy::too_many_arguments)]
pub fn build_i_table<T: Real>(
    family: Family,
    combos: &[Combo<T>],
    order: u8,
    grid: &GridConfig,
    reps: usize,
    n: usize,
    n_cal: usize,
    bootstrap_size: usize,
    seed: u64,
) -> Result<ITableBuild<T>> {
    if combos.is_empty() {
        return Err(Error::domain("no combinations supplied".into()));
    }
    if reps < 30 {
        return Err(Error::domain(format!("need reps >= 30, got {reps}")));
    }
    if !(order == 3 || order == 4) {
        return Err(Error::domain(format!(
            "i table order must be 3 or 4, got {order}"
        )));
    }
    let etype = match combos[0].0 {
        MomentEstimator::Recombined(_) => EstimatorClass::Recombined,
        MomentEstimator::Quantile { .. } => EstimatorClass::Quantile,
    };
    let keys: Vec<f64> = grid.keys().collect();
    let row_results: Vec<(f64, Result<Option<(usize, T, T)>>)> = keys
        .par_iter()
        .map(|&key| {
            let row_seed = derive_seed(seed, key.to_bits());
            (
                key,
                build_i_row(
                    family,
                    combos,
                    order,
                    key,
                    reps,
                    n,
                    n_cal,
                    bootstrap_size,
                    row_seed,
                ),
            )
        })
        .collect();
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    for (key, result) in row_results {
        match result {
            Ok(Some((combo, d_num, d_var))) => rows.push((T::of(key), combo, d_num, d_var)),
            Ok(None) => warnings.push(format!("key {key}: all combinations excluded")),
            Err(e) => warnings.push(format!("key {key} dropped: {e}")),
        }
    }
    if rows.is_empty() {
        return Err(Error::AllCombinationsExcluded(
            "every grid row lost all combinations".into(),
        ));
    }
    Ok(ITableBuild {
        table: ITable {
            meta: TableMeta {
                family,
                etype,
                k: order,
                key_kind: KeyKind::Kurtosis,
                delta: grid.delta,
                count: grid.count,
                n_cal,
                seed,
                version: TABLE_FORMAT_VERSION,
            },
            combos: combos.to_vec(),
            rows,
        },
        warnings,
    })
}

#[allow(clippy::too_many_arguments)]
fn build_i_row<T: Real>(
    family: Family,
    combos: &[Combo<T>],
    order: u8,
    key: f64,
    reps: usize,
    n: usize,
    n_cal: usize,
    bootstrap_size: usize,
    seed: u64,
) -> Result<Option<(usize, T, T)>> {
    let shape = shape_from_kurtosis::<T>(family, T::of(key))?;
    let spec = DistributionSpec::standard(family, shape)?;
    let asym_num = KernelAsymptotics::build(&spec, order, n_cal, derive_seed(seed, 1))?;
    let asym_var = KernelAsymptotics::build(&spec, 2, n_cal, derive_seed(seed, 2))?;
    let truth = T::of(key);
    // asymptotic d values per combination
    let mut d_values: Vec<Option<(T, T)>> = Vec::with_capacity(combos.len());
    for (num_est, var_est) in combos {
        let dn = asym_num.calibrate(num_est, order);
        let dv = asym_var.calibrate(var_est, 2);
        match (dn, dv) {
            (Ok(dn), Ok(dv)) => d_values.push(Some((dn.value, dv.value))),
            _ => d_values.push(None), // window violation: excluded up front
        }
    }
    let mut sq_err = vec![T::zero(); combos.len()];
    let mut alive = vec![true; combos.len()];
    for (c, dv) in d_values.iter().enumerate() {
        if dv.is_none() {
            alive[c] = false;
        }
    }
    let per_rep: Vec<Vec<Option<T>>> = (0..reps)
        .into_par_iter()
        .map(|rep| {
            let rep_seed = derive_seed(seed, 1000 + rep as u64);
            let mut rng = crate::rng::SplitMix64::new(rep_seed);
            let values: Vec<T> = (0..n)
                .map(|_| spec.quantile(T::of(rng.next_open01())).unwrap())
                .collect();
            let sample = Sample::new(values).expect("finite sample");
            let ks_num = kernel_sample(
                &sample,
                KernelSpec::new(order).unwrap(),
                bootstrap_size,
                derive_seed(rep_seed, u64::from(order)),
            )
            .expect("kernel sample");
            let ks_var = kernel_sample(
                &sample,
                KernelSpec::new(2).unwrap(),
                bootstrap_size,
                derive_seed(rep_seed, 2),
            )
            .expect("kernel sample");
            combos
                .iter()
                .enumerate()
                .map(|(c, (num_est, var_est))| {
                    let (d_num, d_var) = d_values[c]?;
                    let num = num_est
                        .estimate_on_kernel_sample(&ks_num, order, d_num)
                        .ok()?;
                    let var = var_est.estimate_on_kernel_sample(&ks_var, 2, d_var).ok()?;
                    if num.clamped || var.clamped || !(var.value > T::zero()) {
                        return None;
                    }
                    let standardized = if order == 4 {
                        num.value / (var.value * var.value)
                    } else {
                        (num.value / var.value.powf(T::of(1.5))).abs()
                    };
                    Some(standardized)
                })
                .collect()
        })
        .collect();
    let mut counts = vec![0usize; combos.len()];
    for rep_row in &per_rep {
        for (c, est) in rep_row.iter().enumerate() {
            match est {
                Some(v) => {
                    let err = *v - truth;
                    sq_err[c] += err * err;
                    counts[c] += 1;
                }
                None => alive[c] = false,
            }
        }
    }
    let mut best: Option<(usize, T)> = None;
    for c in 0..combos.len() {
        if !alive[c] || counts[c] == 0 {
            continue;
        }
        let rmse = (sq_err[c] / T::from_count(counts[c])).sqrt();
        if best.map_or(true, |(_, b)| rmse < b) {
            best = Some((c, rmse));
        }
    }
    Ok(best.map(|(c, _)| {
        let (dn, dv) = d_values[c].expect("alive combination has d values");
        (c, dn, dv)
    }))
}
