//! Order-statistic machinery: sample quantiles under two interpolation
//! schemes, the exact empirical inverse of each, and the weighted
//! L-statistic family (trimmed/Winsorized means, quantile averages,
//! median of means, Huber location, Hodges-Lehmann).

use serde::{Deserialize, Serialize};

use crate::distributions::DistributionSpec;
use crate::error::{Error, Result};
use crate::numeric::{integrate, mean, pairwise_sum};
use crate::qmc::stratified_probabilities;
use crate::rng::shuffle;
use crate::scalar::{Flagged, Real};

/// A sample stored sorted ascending. Estimators here are permutation
/// invariant, so the original order is discarded on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample<T> {
    values: Vec<T>,
}

impl<T: Real> Sample<T> {
    pub fn new(mut values: Vec<T>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InsufficientSample {
                required: 1,
                actual: 0,
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("sample contains non-finite values".into()));
        }
        values.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite values"));
        Ok(Sample { values })
    }

    /// Wrap values already sorted ascending (checked in debug builds only).
    pub fn from_sorted(values: Vec<T>) -> Self {
        debug_assert!(values.windows(2).all(|w| w[0] <= w[1]));
        Sample { values }
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn min(&self) -> T {
        self.values[0]
    }

    pub fn max(&self) -> T {
        *self.values.last().unwrap()
    }

    /// Map every value through an affine transform a*x + b, a != 0.
    pub fn affine(&self, a: T, b: T) -> Sample<T> {
        let mut values: Vec<T> = self.values.iter().map(|&x| a * x + b).collect();
        if a < T::zero() {
            values.reverse();
        }
        Sample { values }
    }
}

/// Interpolation scheme for sample quantiles and their empirical inverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum QuantileScheme {
    /// h = n p, interpolating the classical empirical CDF.
    Hf7,
    /// h = (n-1) p + 1, interpolating the modes of uniform order statistics.
    #[default]
    ModeInterp,
}

impl QuantileScheme {
    pub fn parse(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "hf7" => Ok(QuantileScheme::Hf7),
            "mode" | "mode_interp" | "modeinterp" => Ok(QuantileScheme::ModeInterp),
            other => Err(Error::parse(format!("unknown quantile scheme `{other}`"))),
        }
    }
}

/// Sample quantile at probability p in [0, 1].
pub fn sample_quantile<T: Real>(s: &Sample<T>, p: T, scheme: QuantileScheme) -> Result<T> {
    if !(p >= T::zero() && p <= T::one()) {
        return Err(Error::domain(format!("quantile needs 0 <= p <= 1, got {p}")));
    }
    let n = s.n();
    let v = s.values();
    if n == 1 {
        return Ok(v[0]);
    }
    let h = match scheme {
        QuantileScheme::ModeInterp => T::from_count(n - 1) * p + T::one(),
        QuantileScheme::Hf7 => T::from_count(n) * p,
    };
    let h = h.max(T::one()).min(T::from_count(n));
    let lo = h.floor();
    let idx = (lo.lossy_f64() as usize).min(n) - 1;
    let frac = h - lo;
    if idx + 1 >= n {
        return Ok(v[n - 1]);
    }
    Ok(v[idx] + frac * (v[idx + 1] - v[idx]))
}

/// Empirical CDF value that exactly inverts `sample_quantile` on
/// [min, max]; outside the range the value clamps to 0/1 with a flag.
pub fn empirical_cdf_value<T: Real>(
    s: &Sample<T>,
    x: T,
    scheme: QuantileScheme,
) -> Result<Flagged<T>> {
    if x.is_nan() {
        return Err(Error::domain("empirical cdf of NaN".into()));
    }
    let n = s.n();
    let v = s.values();
    if x < v[0] {
        return Ok(Flagged::clamped(T::zero()));
    }
    if x > v[n - 1] {
        return Ok(Flagged::clamped(T::one()));
    }
    if n == 1 || x == v[n - 1] {
        return Ok(Flagged::exact(T::one()));
    }
    // cf = #{X_i <= x}; ties advance cf to the last tied index, and the
    // interpolation target X_{cf+1} is then strictly greater than x.
    let cf = v.partition_point(|&e| e <= x);
    debug_assert!(cf >= 1 && cf < n);
    let frac = (x - v[cf - 1]) / (v[cf] - v[cf - 1]);
    let p = match scheme {
        QuantileScheme::ModeInterp => {
            (T::from_count(cf - 1) + frac) / T::from_count(n - 1)
        }
        QuantileScheme::Hf7 => (T::from_count(cf) + frac) / T::from_count(n),
    };
    Ok(Flagged::exact(p))
}

/// Weighted L-statistic kinds. Each is an estimator of location built from
/// order statistics (or, for the pluggable `ReferenceValue`, an injected
/// asymptotic constant for a standard member of a family).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WlKind<T> {
    Median,
    TrimmedMean,
    WinsorizedMean,
    QuantilePoint(T),
    QuantileAverage,
    UniformWeightedAverage,
    MedianOfMeans {
        blocks: usize,
        shuffle_seed: Option<u64>,
    },
    HuberM {
        tuning: T,
    },
    HodgesLehmannMedian,
    /// Asymptotic value of some external estimator on the standard member
    /// (scale 1, location 0) of a family; not sample evaluable.
    ReferenceValue(T),
}

pub const HUBER_DEFAULT_TUNING: f64 = 1.345;
/// 1 / Phi^{-1}(3/4): scales the MAD to the normal standard deviation.
pub const MAD_NORMAL_CONSISTENCY: f64 = 1.482602218505602;

/// Weighted L-statistic descriptor: kind, breakdown point epsilon and
/// asymmetry gamma. Trimmed/Winsorized kinds remove a gamma*eps fraction
/// below and an eps fraction above.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WlSpec<T> {
    pub kind: WlKind<T>,
    pub epsilon: T,
    pub gamma: T,
}

impl<T: Real> WlSpec<T> {
    pub fn new(kind: WlKind<T>, epsilon: T, gamma: T) -> Result<Self> {
        if !(epsilon >= T::zero() && epsilon < T::one()) {
            return Err(Error::domain(format!("epsilon must be in [0,1), got {epsilon}")));
        }
        if !(gamma >= T::zero()) || !gamma.is_finite() {
            return Err(Error::domain(format!("gamma must be >= 0, got {gamma}")));
        }
        let pivot = gamma / (T::one() + gamma);
        if gamma * epsilon > pivot || pivot > T::one() - epsilon {
            return Err(Error::domain(format!(
                "empty percentile window: gamma*eps={} pivot={pivot} 1-eps={}",
                gamma * epsilon,
                T::one() - epsilon
            )));
        }
        match kind {
            WlKind::QuantilePoint(p) if !(p > T::zero() && p < T::one()) => {
                return Err(Error::domain(format!("quantile point must be in (0,1), got {p}")))
            }
            WlKind::QuantileAverage | WlKind::UniformWeightedAverage if gamma <= T::zero() => {
                return Err(Error::domain("quantile averages need gamma > 0".into()))
            }
            WlKind::UniformWeightedAverage if epsilon >= pivot => {
                return Err(Error::domain(
                    "uniform weighted average needs epsilon < gamma/(1+gamma)".into(),
                ))
            }
            WlKind::MedianOfMeans { blocks, .. } if blocks == 0 => {
                return Err(Error::domain("median of means needs at least one block".into()))
            }
            WlKind::HuberM { tuning } if !(tuning > T::zero()) => {
                return Err(Error::domain("Huber tuning constant must be positive".into()))
            }
            _ => {}
        }
        Ok(WlSpec {
            kind,
            epsilon,
            gamma,
        })
    }

    pub fn median() -> Self {
        WlSpec {
            kind: WlKind::Median,
            epsilon: T::of(0.5),
            gamma: T::one(),
        }
    }

    pub fn trimmed(epsilon: T, gamma: T) -> Result<Self> {
        Self::new(WlKind::TrimmedMean, epsilon, gamma)
    }

    pub fn winsorized(epsilon: T, gamma: T) -> Result<Self> {
        Self::new(WlKind::WinsorizedMean, epsilon, gamma)
    }

    pub fn quantile_point(p: T, epsilon: T) -> Result<Self> {
        Self::new(WlKind::QuantilePoint(p), epsilon, T::one())
    }

    pub fn reference_value(v: T, epsilon: T) -> Result<Self> {
        Self::new(WlKind::ReferenceValue(v), epsilon, T::one())
    }

    /// Same spec with a substituted breakdown point.
    pub fn with_epsilon(mut self, epsilon: T) -> Result<Self> {
        self.epsilon = epsilon;
        Self::new(self.kind, self.epsilon, self.gamma)
    }

    /// Parse strings like `tm:eps=1/8,gamma=1`, `median`, `qp:p=0.62`,
    /// `mom:b=4,seed=1`, `huber:c=1.345`, `hl`, `ref:v=0.9712`.
    pub fn parse(text: &str) -> Result<Self> {
        let (head, rest) = match text.split_once(':') {
            Some((h, r)) => (h.trim(), r),
            None => (text.trim(), ""),
        };
        let mut eps: Option<T> = None;
        let mut gamma = T::one();
        let mut p: Option<T> = None;
        let mut blocks: Option<usize> = None;
        let mut seed: Option<u64> = None;
        let mut tuning = T::of(HUBER_DEFAULT_TUNING);
        let mut refv: Option<T> = None;
        for part in rest.split(',').filter(|s| !s.trim().is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::parse(format!("expected key=value, got `{part}`")))?;
            let key = key.trim();
            match key {
                "eps" | "epsilon" => eps = Some(parse_ratio(value)?),
                "gamma" => gamma = parse_ratio(value)?,
                "p" => p = Some(parse_ratio(value)?),
                "b" | "blocks" => {
                    blocks = Some(value.trim().parse().map_err(|_| {
                        Error::parse(format!("bad block count `{value}`"))
                    })?)
                }
                "seed" => {
                    seed = Some(value.trim().parse().map_err(|_| {
                        Error::parse(format!("bad seed `{value}`"))
                    })?)
                }
                "c" | "tuning" => tuning = parse_ratio(value)?,
                "v" | "value" => refv = Some(parse_ratio(value)?),
                other => return Err(Error::parse(format!("unknown key `{other}`"))),
            }
        }
        let default_eps = T::of(0.5);
        match head.to_ascii_lowercase().as_str() {
            "median" | "m" => Self::new(WlKind::Median, eps.unwrap_or(default_eps), gamma),
            "tm" | "trimmed" => Self::new(
                WlKind::TrimmedMean,
                eps.ok_or_else(|| Error::parse("trimmed mean needs eps".into()))?,
                gamma,
            ),
            "wm" | "winsorized" => Self::new(
                WlKind::WinsorizedMean,
                eps.ok_or_else(|| Error::parse("winsorized mean needs eps".into()))?,
                gamma,
            ),
            "qp" => {
                let p = p.ok_or_else(|| Error::parse("quantile point needs p".into()))?;
                let eps = eps.unwrap_or_else(|| p.min(T::one() - p));
                Self::new(WlKind::QuantilePoint(p), eps, gamma)
            }
            "qa" => Self::new(
                WlKind::QuantileAverage,
                eps.ok_or_else(|| Error::parse("quantile average needs eps".into()))?,
                gamma,
            ),
            "uwa" | "wa" => Self::new(
                WlKind::UniformWeightedAverage,
                eps.ok_or_else(|| Error::parse("weighted average needs eps".into()))?,
                gamma,
            ),
            "mom" => Self::new(
                WlKind::MedianOfMeans {
                    blocks: blocks
                        .ok_or_else(|| Error::parse("median of means needs b".into()))?,
                    shuffle_seed: seed,
                },
                eps.unwrap_or(T::zero()),
                gamma,
            ),
            "huber" | "hm" => Self::new(
                WlKind::HuberM { tuning },
                eps.unwrap_or(default_eps),
                gamma,
            ),
            "hl" => Self::new(WlKind::HodgesLehmannMedian, eps.unwrap_or(T::of(0.29)), gamma),
            "ref" => Self::new(
                WlKind::ReferenceValue(
                    refv.ok_or_else(|| Error::parse("reference value needs v".into()))?,
                ),
                eps.unwrap_or(default_eps),
                gamma,
            ),
            other => Err(Error::parse(format!("unknown estimator kind `{other}`"))),
        }
    }

    pub fn display_name(&self) -> String {
        let g = self.gamma.lossy_f64();
        let e = self.epsilon.lossy_f64();
        match self.kind {
            WlKind::Median => "median".into(),
            WlKind::TrimmedMean => format!("tm:eps={e},gamma={g}"),
            WlKind::WinsorizedMean => format!("wm:eps={e},gamma={g}"),
            WlKind::QuantilePoint(p) => format!("qp:p={}", p.lossy_f64()),
            WlKind::QuantileAverage => format!("qa:eps={e},gamma={g}"),
            WlKind::UniformWeightedAverage => format!("uwa:eps={e},gamma={g}"),
            WlKind::MedianOfMeans {
                blocks,
                shuffle_seed,
            } => match shuffle_seed {
                Some(s) => format!("mom:b={blocks},seed={s}"),
                None => format!("mom:b={blocks}"),
            },
            WlKind::HuberM { tuning } => format!("huber:c={}", tuning.lossy_f64()),
            WlKind::HodgesLehmannMedian => "hl".into(),
            WlKind::ReferenceValue(v) => format!("ref:v={}", v.lossy_f64()),
        }
    }
}

/// Parse a number that may be written as a fraction (`1/24`) or a decimal.
pub fn parse_ratio<T: Real>(s: &str) -> Result<T> {
    let s = s.trim();
    if let Some((num, den)) = s.split_once('/') {
        let n: f64 = num
            .trim()
            .parse()
            .map_err(|_| Error::parse(format!("bad numerator `{num}`")))?;
        let d: f64 = den
            .trim()
            .parse()
            .map_err(|_| Error::parse(format!("bad denominator `{den}`")))?;
        if d == 0.0 {
            return Err(Error::parse("zero denominator".into()));
        }
        Ok(T::of(n / d))
    } else {
        let v: f64 = s
            .parse()
            .map_err(|_| Error::parse(format!("bad number `{s}`")))?;
        Ok(T::of(v))
    }
}

fn ceil_count<T: Real>(x: T) -> usize {
    x.ceil().lossy_f64().max(0.0) as usize
}

fn trim_counts<T: Real>(n: usize, w: &WlSpec<T>) -> Result<(usize, usize)> {
    let nf = T::from_count(n);
    let lo = ceil_count(nf * w.gamma * w.epsilon);
    let hi = ceil_count(nf * w.epsilon);
    if lo + hi >= n {
        // smallest n keeping at least one order statistic
        let mut required = n + 1;
        let lim = 4 * n + 16;
        while required <= lim {
            let rf = T::from_count(required);
            if ceil_count(rf * w.gamma * w.epsilon) + ceil_count(rf * w.epsilon) < required {
                break;
            }
            required += 1;
        }
        return Err(Error::InsufficientSample {
            required,
            actual: n,
        });
    }
    Ok((lo, hi))
}

/// Evaluate a weighted L-statistic on a sample.
pub fn evaluate_wl<T: Real>(s: &Sample<T>, w: &WlSpec<T>) -> Result<T> {
    let n = s.n();
    let v = s.values();
    match w.kind {
        WlKind::Median => sample_quantile(s, T::of(0.5), QuantileScheme::ModeInterp),
        WlKind::QuantilePoint(p) => sample_quantile(s, p, QuantileScheme::ModeInterp),
        WlKind::TrimmedMean => {
            let (lo, hi) = trim_counts(n, w)?;
            Ok(mean(&v[lo..n - hi]))
        }
        WlKind::WinsorizedMean => {
            let (lo, hi) = trim_counts(n, w)?;
            let mut acc = pairwise_sum(&v[lo..n - hi]);
            acc += T::from_count(lo) * v[lo];
            acc += T::from_count(hi) * v[n - 1 - hi];
            Ok(acc / T::from_count(n))
        }
        WlKind::QuantileAverage => {
            let q_lo = sample_quantile(s, w.gamma * w.epsilon, QuantileScheme::ModeInterp)?;
            let q_hi = sample_quantile(s, T::one() - w.epsilon, QuantileScheme::ModeInterp)?;
            Ok((q_lo + w.gamma * q_hi) / (T::one() + w.gamma))
        }
        WlKind::UniformWeightedAverage => uniform_weighted_average(s, w),
        WlKind::MedianOfMeans {
            blocks,
            shuffle_seed,
        } => median_of_means(s, blocks, shuffle_seed),
        WlKind::HuberM { tuning } => huber_location(s, tuning),
        WlKind::HodgesLehmannMedian => Ok(hodges_lehmann(s)),
        WlKind::ReferenceValue(_) => Err(Error::NotSampleEvaluable(
            "reference-value estimator".into(),
        )),
    }
}

/// Exact integral of the piecewise-linear sample quantile function over
/// [a, b] under the mode-interpolation scheme.
fn integral_sample_quantile<T: Real>(s: &Sample<T>, a: T, b: T) -> T {
    debug_assert!(a <= b);
    let n = s.n();
    let v = s.values();
    if n == 1 {
        return v[0] * (b - a);
    }
    let nf = T::from_count(n - 1);
    // work in h-space: h = (n-1) p + 1 in [1, n]
    let ha = (nf * a + T::one()).max(T::one()).min(T::from_count(n));
    let hb = (nf * b + T::one()).max(T::one()).min(T::from_count(n));
    let q_at = |h: T| -> T {
        let lo = h.floor();
        let idx = (lo.lossy_f64() as usize).min(n) - 1;
        if idx + 1 >= n {
            return v[n - 1];
        }
        v[idx] + (h - lo) * (v[idx + 1] - v[idx])
    };
    let mut acc = T::zero();
    let mut h = ha;
    while h < hb {
        let next = (h.floor() + T::one()).min(hb);
        let half = T::of(0.5);
        acc += (q_at(h) + q_at(next)) * half * (next - h);
        h = next;
    }
    acc / nf
}

fn uniform_weighted_average<T: Real>(s: &Sample<T>, w: &WlSpec<T>) -> Result<T> {
    let one = T::one();
    let pivot = w.gamma / (one + w.gamma);
    let width = pivot / w.gamma - w.epsilon; // (1/(1+gamma)) - eps
    if !(width > T::zero()) {
        return Err(Error::domain(
            "uniform weighted average window is empty".into(),
        ));
    }
    let i_lower = integral_sample_quantile(s, w.gamma * w.epsilon, pivot);
    let i_upper = integral_sample_quantile(s, pivot, one - w.epsilon);
    let raw = i_lower / w.gamma + w.gamma * i_upper;
    Ok(raw / ((one + w.gamma) * width))
}

fn median_of_means<T: Real>(s: &Sample<T>, blocks: usize, seed: Option<u64>) -> Result<T> {
    let n = s.n();
    if blocks > n {
        return Err(Error::InsufficientSample {
            required: blocks,
            actual: n,
        });
    }
    let mut order: Vec<usize> = (0..n).collect();
    if let Some(seed) = seed {
        shuffle(&mut order, seed);
    }
    let base = n / blocks;
    let rem = n % blocks;
    let v = s.values();
    let mut means = Vec::with_capacity(blocks);
    let mut start = 0usize;
    for b in 0..blocks {
        let len = base + usize::from(b < rem);
        let vals: Vec<T> = order[start..start + len].iter().map(|&i| v[i]).collect();
        means.push(mean(&vals));
        start += len;
    }
    let block_sample = Sample::new(means)?;
    sample_quantile(&block_sample, T::of(0.5), QuantileScheme::ModeInterp)
}

fn huber_location<T: Real>(s: &Sample<T>, tuning: T) -> Result<T> {
    let med = sample_quantile(s, T::of(0.5), QuantileScheme::ModeInterp)?;
    let devs: Vec<T> = s.values().iter().map(|&x| (x - med).abs()).collect();
    let mad = sample_quantile(&Sample::new(devs)?, T::of(0.5), QuantileScheme::ModeInterp)?;
    if mad == T::zero() {
        return Ok(med);
    }
    let scale = mad * T::of(MAD_NORMAL_CONSISTENCY);
    let width = tuning * scale;
    let tol = T::of(1e-10).max(T::solver_eps()) * scale.max(T::one());
    let mut mu = med;
    for _ in 0..200 {
        let mut wsum = T::zero();
        let mut acc = T::zero();
        for &x in s.values() {
            let r = (x - mu).abs();
            let wgt = if r <= width { T::one() } else { width / r };
            wsum += wgt;
            acc += wgt * x;
        }
        let next = acc / wsum;
        let delta = (next - mu).abs();
        mu = next;
        if delta <= tol {
            break;
        }
    }
    Ok(mu)
}

/// Median of all Walsh averages (x_i + x_j)/2, i <= j, computed by value
/// bisection with pair counting; O(n log n log range) and no quadratic
/// allocation.
pub fn hodges_lehmann<T: Real>(s: &Sample<T>) -> T {
    let n = s.n();
    let total = n * (n + 1) / 2;
    let k1 = (total + 1) / 2;
    let k2 = total / 2 + 1;
    let a = walsh_select(s, k1);
    if k1 == k2 {
        a
    } else {
        (a + walsh_select(s, k2)) * T::of(0.5)
    }
}

fn walsh_count_le<T: Real>(v: &[T], t: T) -> usize {
    // pairs i <= j with (x_i + x_j)/2 <= t
    let n = v.len();
    let two_t = t + t;
    let mut count = 0usize;
    let mut j = n;
    for i in 0..n {
        if j < i + 1 {
            j = i + 1;
        }
        while j > i && v[i] + v[j - 1] > two_t {
            j -= 1;
        }
        if j <= i {
            break;
        }
        count += j - i;
    }
    count
}

fn walsh_select<T: Real>(s: &Sample<T>, k: usize) -> T {
    let v = s.values();
    let mut lo = v[0];
    let mut hi = *v.last().unwrap();
    if walsh_count_le(v, lo) >= k {
        return lo;
    }
    loop {
        let mid = lo + (hi - lo) * T::of(0.5);
        if mid <= lo || mid >= hi {
            break;
        }
        if walsh_count_le(v, mid) >= k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// How an asymptotic (population) weighted L-statistic value is obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AsymptoticMethod {
    /// Quadrature over the quantile function; exact for kinds that are
    /// explicit Q-integrals.
    QuadratureOnQ,
    /// Deterministic stratified inverse-transform sample of the given size;
    /// works for every kind, with O(n^{-1/2}) approximation error.
    LargeNQuasi { n: usize, seed: u64 },
}

pub const DEFAULT_ASYMPTOTIC_N: usize = 1 << 20;

fn kind_has_quadrature<T>(kind: &WlKind<T>) -> bool {
    matches!(
        kind,
        WlKind::Median
            | WlKind::QuantilePoint(_)
            | WlKind::QuantileAverage
            | WlKind::TrimmedMean
            | WlKind::WinsorizedMean
            | WlKind::UniformWeightedAverage
            | WlKind::ReferenceValue(_)
    )
}

/// Asymptotic value of a weighted L-statistic on a distribution.
pub fn asymptotic_wl<T: Real>(
    spec: &DistributionSpec<T>,
    w: &WlSpec<T>,
    method: AsymptoticMethod,
) -> Result<T> {
    if let WlKind::ReferenceValue(v0) = w.kind {
        return Ok(spec.location + spec.scale * v0);
    }
    match method {
        AsymptoticMethod::QuadratureOnQ => asymptotic_wl_quadrature(spec, w),
        AsymptoticMethod::LargeNQuasi { n, seed } => {
            if matches!(w.kind, WlKind::MedianOfMeans { .. }) {
                spec.mean()?; // infinite-mean guard: block means diverge
            }
            let values: Result<Vec<T>> = stratified_probabilities(n, seed)
                .map(|p| spec.quantile(T::of(p)))
                .collect();
            evaluate_wl(&Sample::from_sorted(values?), w)
        }
    }
}

/// Pick quadrature when the kind admits it, quasi sampling otherwise.
pub fn asymptotic_wl_auto<T: Real>(
    spec: &DistributionSpec<T>,
    w: &WlSpec<T>,
    n_cal: usize,
    seed: u64,
) -> Result<T> {
    if kind_has_quadrature(&w.kind) {
        asymptotic_wl(spec, w, AsymptoticMethod::QuadratureOnQ)
    } else {
        asymptotic_wl(spec, w, AsymptoticMethod::LargeNQuasi { n: n_cal, seed })
    }
}

const QUAD_TOL: f64 = 1e-11;

fn integral_q<T: Real>(spec: &DistributionSpec<T>, a: T, b: T) -> Result<T> {
    if a >= b {
        return Ok(T::zero());
    }
    if b >= T::one() {
        // split off the upper tail through the mean to keep the quadrature
        // away from the p = 1 singularity
        let mean = spec.mean()?;
        return if a <= T::zero() {
            Ok(mean)
        } else {
            Ok(mean - integral_q(spec, T::zero(), a)?)
        };
    }
    integrate(
        |p| spec.quantile(p).unwrap_or_else(|_| T::zero()),
        a,
        b,
        T::of(QUAD_TOL),
    )
}

fn asymptotic_wl_quadrature<T: Real>(spec: &DistributionSpec<T>, w: &WlSpec<T>) -> Result<T> {
    let one = T::one();
    match w.kind {
        WlKind::Median => spec.quantile(T::of(0.5)),
        WlKind::QuantilePoint(p) => spec.quantile(p),
        WlKind::QuantileAverage => {
            let lo = spec.quantile(w.gamma * w.epsilon)?;
            let hi = spec.quantile(one - w.epsilon)?;
            Ok((lo + w.gamma * hi) / (one + w.gamma))
        }
        WlKind::TrimmedMean => {
            let a = w.gamma * w.epsilon;
            let b = one - w.epsilon;
            if a <= T::zero() && b >= one {
                return spec.mean();
            }
            let num = integral_q(spec, a, b)?;
            Ok(num / (b - a))
        }
        WlKind::WinsorizedMean => {
            let a = w.gamma * w.epsilon;
            let b = one - w.epsilon;
            let mut acc = integral_q(spec, a, b)?;
            if a > T::zero() {
                acc += a * spec.quantile(a)?;
            }
            if b < one {
                acc += (one - b) * spec.quantile(b)?;
            }
            Ok(acc)
        }
        WlKind::UniformWeightedAverage => {
            let pivot = w.gamma / (one + w.gamma);
            let width = pivot / w.gamma - w.epsilon;
            if !(width > T::zero()) {
                return Err(Error::domain(
                    "uniform weighted average window is empty".into(),
                ));
            }
            let lower = integral_q(spec, w.gamma * w.epsilon, pivot)?;
            let upper = integral_q(spec, pivot, one - w.epsilon)?;
            Ok((lower / w.gamma + w.gamma * upper) / ((one + w.gamma) * width))
        }
        WlKind::ReferenceValue(v0) => Ok(spec.location + spec.scale * v0),
        WlKind::MedianOfMeans { .. } | WlKind::HuberM { .. } | WlKind::HodgesLehmannMedian => {
            Err(Error::UnsupportedMethod(format!(
                "{} has no quantile-integral form; use LargeNQuasi",
                w.display_name()
            )))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::Family;
    use proptest::prelude::*;

    fn s(values: &[f64]) -> Sample<f64> {
        Sample::new(values.to_vec()).unwrap()
    }

    #[test]
    fn quantile_printed_examples() {
        let sample = s(&[0.0, 1.0, 3.0]);
        // h = 2*0.25 + 1 = 1.5 -> midpoint of first gap
        let q = sample_quantile(&sample, 0.25, QuantileScheme::ModeInterp).unwrap();
        assert!((q - 0.5).abs() < 1e-15);
        assert_eq!(
            sample_quantile(&sample, 0.0, QuantileScheme::ModeInterp).unwrap(),
            0.0
        );
        assert_eq!(
            sample_quantile(&sample, 0.0, QuantileScheme::Hf7).unwrap(),
            0.0
        );
        let even = s(&[1.0, 2.0, 3.0, 4.0]);
        let q = sample_quantile(&even, 0.5, QuantileScheme::ModeInterp).unwrap();
        assert!((q - 2.5).abs() < 1e-15);
    }

    #[test]
    fn ecdf_printed_examples() {
        let sample = s(&[0.0, 1.0, 3.0]);
        let p = empirical_cdf_value(&sample, 0.5, QuantileScheme::ModeInterp).unwrap();
        assert!(!p.clamped);
        assert!((p.value - 0.25).abs() < 1e-15);
        let at_min = empirical_cdf_value(&sample, 0.0, QuantileScheme::ModeInterp).unwrap();
        assert_eq!(at_min.value, 0.0);
        assert!(!at_min.clamped);
        let at_max = empirical_cdf_value(&sample, 3.0, QuantileScheme::ModeInterp).unwrap();
        assert_eq!(at_max.value, 1.0);
        let outside = empirical_cdf_value(&sample, 9.0, QuantileScheme::ModeInterp).unwrap();
        assert!(outside.clamped);
        assert_eq!(outside.value, 1.0);
    }

    #[test]
    fn ecdf_handles_ties() {
        let sample = s(&[1.0, 1.0, 2.0, 2.0, 5.0]);
        // strictly increasing in x across the tie plateau
        let mut prev = -1.0;
        for x in [1.0, 1.5, 2.0, 3.0, 5.0] {
            let p = empirical_cdf_value(&sample, x, QuantileScheme::ModeInterp)
                .unwrap()
                .value;
            assert!(p >= prev);
            prev = p;
        }
    }

    #[test]
    fn hodges_lehmann_enumeration() {
        let sample = s(&[1.0, 2.0, 3.0]);
        // Walsh averages {1, 1.5, 2, 2, 2.5, 3}
        assert!((hodges_lehmann(&sample) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn hodges_lehmann_matches_brute_force() {
        let mut rng = crate::rng::SplitMix64::new(11);
        for n in [2usize, 3, 5, 8, 13, 40] {
            let values: Vec<f64> = (0..n).map(|_| rng.next_open01() * 10.0).collect();
            let sample = Sample::new(values.clone()).unwrap();
            let mut walsh = Vec::new();
            let v = sample.values();
            for i in 0..n {
                for j in i..n {
                    walsh.push(0.5 * (v[i] + v[j]));
                }
            }
            walsh.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let m = walsh.len();
            let brute = if m % 2 == 1 {
                walsh[m / 2]
            } else {
                0.5 * (walsh[m / 2 - 1] + walsh[m / 2])
            };
            let fast = hodges_lehmann(&sample);
            assert!((fast - brute).abs() < 1e-10, "n={n} fast={fast} brute={brute}");
        }
    }

    #[test]
    fn trimmed_mean_symmetric_sample() {
        let sample = s(&[-2.0, 0.0, 2.0]);
        let w = WlSpec::trimmed(0.25, 1.0).unwrap();
        assert!((evaluate_wl(&sample, &w).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn median_of_means_identity_blocks() {
        let sample = s(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]);
        let w = WlSpec::new(
            WlKind::MedianOfMeans {
                blocks: 2,
                shuffle_seed: None,
            },
            0.0,
            1.0,
        )
        .unwrap();
        assert!((evaluate_wl(&sample, &w).unwrap() - 4.5).abs() < 1e-14);
    }

    #[test]
    fn window_error_reports_required_n() {
        let sample = s(&[1.0, 2.0]);
        let w = WlSpec::trimmed(0.4, 1.0).unwrap();
        match evaluate_wl(&sample, &w) {
            Err(Error::InsufficientSample { required, actual }) => {
                assert_eq!(actual, 2);
                assert!(required > 2);
            }
            other => panic!("expected InsufficientSample, got {other:?}"),
        }
    }

    #[test]
    fn reference_value_not_sample_evaluable() {
        let sample = s(&[1.0, 2.0]);
        let w = WlSpec::reference_value(0.97, 0.04).unwrap();
        assert!(matches!(
            evaluate_wl(&sample, &w),
            Err(Error::NotSampleEvaluable(_))
        ));
    }

    #[test]
    fn asymptotic_median_exponential() {
        let spec = DistributionSpec::new(Family::Exponential, 1.0, 1.0, 0.0).unwrap();
        let v = asymptotic_wl(&spec, &WlSpec::median(), AsymptoticMethod::QuadratureOnQ).unwrap();
        assert!((v - std::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn asymptotic_trimmed_exponential_against_riemann() {
        let spec = DistributionSpec::new(Family::Exponential, 1.0, 1.0, 0.0).unwrap();
        let w = WlSpec::trimmed(0.125, 1.0).unwrap();
        let v = asymptotic_wl(&spec, &w, AsymptoticMethod::QuadratureOnQ).unwrap();
        // midpoint Riemann oracle on [1/8, 7/8]
        let m = 10_000_000usize;
        let (a, b) = (0.125f64, 0.875f64);
        let step = (b - a) / m as f64;
        let mut acc = 0.0f64;
        for i in 0..m {
            let p = a + (i as f64 + 0.5) * step;
            acc += (1.0 / (1.0 - p)).ln();
        }
        let oracle = acc * step / 0.75;
        assert!((v - oracle).abs() < 1e-7, "v={v} oracle={oracle}");
    }

    #[test]
    fn asymptotic_symmetric_kinds_vanish_on_gaussian() {
        let spec = DistributionSpec::new(Family::Gaussian, 1.0, 1.0, 0.0).unwrap();
        let kinds: Vec<WlSpec<f64>> = vec![
            WlSpec::median(),
            WlSpec::trimmed(0.125, 1.0).unwrap(),
            WlSpec::winsorized(0.125, 1.0).unwrap(),
            WlSpec::new(WlKind::QuantileAverage, 0.125, 1.0).unwrap(),
            WlSpec::new(WlKind::UniformWeightedAverage, 0.125, 1.0).unwrap(),
        ];
        for w in &kinds {
            let v = asymptotic_wl(&spec, w, AsymptoticMethod::QuadratureOnQ).unwrap();
            assert!(v.abs() < 1e-9, "{}: {v}", w.display_name());
        }
        for kind in [
            WlKind::MedianOfMeans {
                blocks: 8,
                shuffle_seed: Some(1),
            },
            WlKind::HuberM { tuning: 1.345 },
            WlKind::HodgesLehmannMedian,
        ] {
            let w = WlSpec::new(kind, 0.125, 1.0).unwrap();
            let v = asymptotic_wl(
                &spec,
                &w,
                AsymptoticMethod::LargeNQuasi {
                    n: 1 << 16,
                    seed: 2,
                },
            )
            .unwrap();
            assert!(v.abs() < 5e-3, "{}: {v}", w.display_name());
        }
    }

    #[test]
    fn winsorized_asymptote_exponential() {
        // gamma*eps*Q(eps) + int + eps*Q(1-eps), cross-checked by sampling
        let spec = DistributionSpec::new(Family::Exponential, 1.0, 1.0, 0.0).unwrap();
        let w = WlSpec::winsorized(0.125, 1.0).unwrap();
        let quad = asymptotic_wl(&spec, &w, AsymptoticMethod::QuadratureOnQ).unwrap();
        let quasi = asymptotic_wl(
            &spec,
            &w,
            AsymptoticMethod::LargeNQuasi {
                n: 1 << 18,
                seed: 5,
            },
        )
        .unwrap();
        assert!((quad - quasi).abs() < 2e-3, "quad={quad} quasi={quasi}");
    }

    #[test]
    fn parse_round_trip() {
        let w: WlSpec<f64> = WlSpec::parse("tm:eps=1/8,gamma=1").unwrap();
        assert_eq!(w.kind, WlKind::TrimmedMean);
        assert!((w.epsilon - 0.125).abs() < 1e-15);
        let w: WlSpec<f64> = WlSpec::parse("mom:b=4,seed=9").unwrap();
        assert!(matches!(
            w.kind,
            WlKind::MedianOfMeans {
                blocks: 4,
                shuffle_seed: Some(9)
            }
        ));
        let w: WlSpec<f64> = WlSpec::parse("median").unwrap();
        assert_eq!(w.kind, WlKind::Median);
        assert!(WlSpec::<f64>::parse("bogus:eps=1").is_err());
    }

    proptest! {
        #[test]
        fn round_trip_is_exact_on_grid(values in proptest::collection::vec(-1e6f64..1e6, 3..60)) {
            let mut vals = values;
            vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
            vals.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
            prop_assume!(vals.len() >= 3);
            let sample = Sample::new(vals).unwrap();
            let n = sample.n();
            for i in 0..n {
                let p = i as f64 / (n - 1) as f64;
                let x = sample_quantile(&sample, p, QuantileScheme::ModeInterp).unwrap();
                let back = empirical_cdf_value(&sample, x, QuantileScheme::ModeInterp).unwrap();
                prop_assert!((back.value - p).abs() <= 1e-12);
            }
            for i in 1..=n {
                let p = i as f64 / n as f64;
                let x = sample_quantile(&sample, p, QuantileScheme::Hf7).unwrap();
                let back = empirical_cdf_value(&sample, x, QuantileScheme::Hf7).unwrap();
                prop_assert!((back.value - p).abs() <= 1e-12);
            }
        }

        #[test]
        fn location_scale_equivariance(
            values in proptest::collection::vec(-1e3f64..1e3, 6..40),
            a in 0.1f64..10.0,
            b in -100.0f64..100.0,
        ) {
            let sample = Sample::new(values).unwrap();
            let transformed = sample.affine(a, b);
            let kinds: Vec<WlSpec<f64>> = vec![
                WlSpec::median(),
                WlSpec::trimmed(0.125, 1.0).unwrap(),
                WlSpec::winsorized(0.125, 1.0).unwrap(),
                WlSpec::new(WlKind::QuantileAverage, 0.125, 1.0).unwrap(),
                WlSpec::new(WlKind::UniformWeightedAverage, 0.125, 1.0).unwrap(),
                WlSpec::quantile_point(0.3, 0.3).unwrap(),
                WlSpec::new(WlKind::MedianOfMeans { blocks: 3, shuffle_seed: Some(5) }, 0.0, 1.0).unwrap(),
                WlSpec::new(WlKind::HuberM { tuning: 1.345 }, 0.5, 1.0).unwrap(),
                WlSpec::new(WlKind::HodgesLehmannMedian, 0.29, 1.0).unwrap(),
            ];
            for w in &kinds {
                let base = evaluate_wl(&sample, w).unwrap();
                let moved = evaluate_wl(&transformed, w).unwrap();
                let expect = a * base + b;
                let tol = 1e-8 * (1.0 + expect.abs());
                prop_assert!((moved - expect).abs() <= tol, "{}: {moved} vs {expect}", w.display_name());
            }
        }
    }

    #[test]
    fn breakdown_direction_trimmed_mean() {
        let n = 200usize;
        let eps = 0.1f64;
        let clean: Vec<f64> = (0..n).map(|i| i as f64 / n as f64).collect();
        let base = evaluate_wl(&Sample::new(clean.clone()).unwrap(), &WlSpec::trimmed(eps, 1.0).unwrap()).unwrap();
        // floor(n*eps) - 1 = 19 contaminated points: bounded move
        let mut few = clean.clone();
        let k_few = (n as f64 * eps).floor() as usize - 1;
        for v in few.iter_mut().rev().take(k_few) {
            *v = 1e12;
        }
        let moved = evaluate_wl(&Sample::new(few).unwrap(), &WlSpec::trimmed(eps, 1.0).unwrap()).unwrap();
        assert!((moved - base).abs() < 1.0, "bounded: {moved} vs {base}");
        // ceil(n*eps) + 1 = 21 contaminated points: unbounded move
        let mut many = clean;
        let k_many = (n as f64 * eps).ceil() as usize + 1;
        for v in many.iter_mut().rev().take(k_many) {
            *v = 1e12;
        }
        let broken = evaluate_wl(&Sample::new(many).unwrap(), &WlSpec::trimmed(eps, 1.0).unwrap()).unwrap();
        assert!(broken > 1e9, "breakdown expected, got {broken}");
    }

    #[test]
    fn quasi_consistency_all_kinds_exponential() {
        let spec = DistributionSpec::new(Family::Exponential, 1.0, 1.0, 0.0).unwrap();
        let sigma = 1.0; // sd of Exponential(1)
        let values: Vec<f64> = stratified_probabilities(1 << 20, 77)
            .map(|p| spec.quantile(p).unwrap())
            .collect();
        let sample = Sample::from_sorted(values);
        let kinds: Vec<WlSpec<f64>> = vec![
            WlSpec::median(),
            WlSpec::trimmed(0.125, 1.0).unwrap(),
            WlSpec::winsorized(0.125, 1.0).unwrap(),
            WlSpec::new(WlKind::QuantileAverage, 0.125, 1.0).unwrap(),
            WlSpec::new(WlKind::UniformWeightedAverage, 0.125, 1.0).unwrap(),
            WlSpec::quantile_point(0.7, 0.3).unwrap(),
            WlSpec::new(WlKind::MedianOfMeans { blocks: 8, shuffle_seed: Some(3) }, 0.0, 1.0).unwrap(),
            WlSpec::new(WlKind::HuberM { tuning: 1.345 }, 0.5, 1.0).unwrap(),
            WlSpec::new(WlKind::HodgesLehmannMedian, 0.29, 1.0).unwrap(),
        ];
        for w in &kinds {
            let asym = asymptotic_wl_auto(&spec, w, 1 << 20, 123).unwrap();
            let emp = evaluate_wl(&sample, w).unwrap();
            assert!(
                (emp - asym).abs() <= 5e-3 * sigma,
                "{}: sample {emp} vs asymptotic {asym}",
                w.display_name()
            );
        }
    }
}
