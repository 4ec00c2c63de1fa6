//! Parametric distribution catalog: quantile and CDF evaluation, closed-form
//! population moments (including the standard deviations of the central
//! moment kernel distributions), and shape solving from a target kurtosis or
//! skewness.
//!
//! Quantiles are closed-form where the family admits one and numeric
//! inversions of the regularized incomplete gamma otherwise. All functions
//! are pure; specs are immutable and safe to share across threads.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{bisect_monotone, integrate};
use crate::scalar::Real;
use crate::special::{gamma_p, inv_gamma_p, inv_norm_cdf, ln_gamma, norm_cdf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Exponential,
    Weibull,
    Gamma,
    Pareto,
    Lognormal,
    GeneralizedGaussian,
    Gaussian,
    Uniform,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::Exponential => "exponential",
            Family::Weibull => "weibull",
            Family::Gamma => "gamma",
            Family::Pareto => "pareto",
            Family::Lognormal => "lognormal",
            Family::GeneralizedGaussian => "generalized_gaussian",
            Family::Gaussian => "gaussian",
            Family::Uniform => "uniform",
        }
    }

    pub fn parse(s: &str) -> Result<Family> {
        match s.trim().to_ascii_lowercase().as_str() {
            "exponential" | "exp" => Ok(Family::Exponential),
            "weibull" => Ok(Family::Weibull),
            "gamma" => Ok(Family::Gamma),
            "pareto" => Ok(Family::Pareto),
            "lognormal" | "lnorm" => Ok(Family::Lognormal),
            "generalized_gaussian" | "gengauss" | "gg" => Ok(Family::GeneralizedGaussian),
            "gaussian" | "normal" => Ok(Family::Gaussian),
            "uniform" => Ok(Family::Uniform),
            other => Err(Error::parse(format!("unknown family `{other}`"))),
        }
    }

    /// Whether the shape parameter is meaningful for this family.
    pub fn has_shape(self) -> bool {
        !matches!(
            self,
            Family::Exponential | Family::Gaussian | Family::Uniform
        )
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A parametric family member: shape/scale/location. For Pareto the scale is
/// the support minimum; for Uniform the scale is the interval width; for
/// Lognormal the shape is the log-scale sigma and the scale multiplies the
/// exponential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistributionSpec<T> {
    pub family: Family,
    pub shape: T,
    pub scale: T,
    #[serde(default = "zero_location")]
    pub location: T,
}

fn zero_location<T: Real>() -> T {
    T::zero()
}

/// Population moment summary: mean, central moments of order 2..4, the
/// standardized third/fourth moments, and the standard deviation of each
/// central-moment kernel distribution (order 1 meaning the distribution
/// itself). Kernel deviations of unavailable order (heavy tails) are None.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSet<T> {
    pub mean: T,
    pub central: [T; 3],
    pub skewness: T,
    pub kurtosis: T,
    pub sd_kernel: [Option<T>; 4],
}

impl<T: Real> MomentSet<T> {
    /// Central moment of order k in 2..=4.
    pub fn central(&self, k: u8) -> T {
        self.central[k as usize - 2]
    }

    /// Kernel standard deviation for kernel order k in 1..=4.
    pub fn kernel_sd(&self, k: u8) -> Result<T> {
        self.sd_kernel[k as usize - 1]
            .ok_or_else(|| Error::InfiniteMoment(format!("kernel sd of order {k} is infinite")))
    }

    /// The population value matching a degree-k central moment kernel
    /// (the mean for k = 1).
    pub fn kernel_target(&self, k: u8) -> T {
        if k == 1 {
            self.mean
        } else {
            self.central(k)
        }
    }
}

impl<T: Real> DistributionSpec<T> {
    pub fn new(family: Family, shape: T, scale: T, location: T) -> Result<Self> {
        if !(scale > T::zero()) || !scale.is_finite() {
            return Err(Error::domain(format!("scale must be positive, got {scale}")));
        }
        if family.has_shape() && (!(shape > T::zero()) || !shape.is_finite()) {
            return Err(Error::domain(format!(
                "{family} shape must be positive, got {shape}"
            )));
        }
        let shape = if family.has_shape() { shape } else { T::one() };
        Ok(DistributionSpec {
            family,
            shape,
            scale,
            location,
        })
    }

    pub fn standard(family: Family, shape: T) -> Result<Self> {
        Self::new(family, shape, T::one(), T::zero())
    }

    /// Parse the CLI form `weibull:shape=2,scale=1[,location=0]`.
    pub fn parse(text: &str) -> Result<Self> {
        let (fam, rest) = match text.split_once(':') {
            Some((f, r)) => (Family::parse(f)?, r),
            None => (Family::parse(text)?, ""),
        };
        let mut shape = T::one();
        let mut scale = T::one();
        let mut location = T::zero();
        for part in rest.split(',').filter(|p| !p.trim().is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::parse(format!("expected key=value, got `{part}`")))?;
            let v: f64 = value
                .trim()
                .parse()
                .map_err(|_| Error::parse(format!("bad number `{value}`")))?;
            match key.trim() {
                "shape" | "alpha" => shape = T::of(v),
                "scale" | "lambda" => scale = T::of(v),
                "location" | "loc" => location = T::of(v),
                other => return Err(Error::parse(format!("unknown parameter `{other}`"))),
            }
        }
        Self::new(fam, shape, scale, location)
    }

    /// Quantile function Q(p) on 0 < p < 1.
    pub fn quantile(&self, p: T) -> Result<T> {
        if !(p > T::zero() && p < T::one()) {
            return Err(Error::domain(format!("quantile requires 0 < p < 1, got {p}")));
        }
        let one = T::one();
        let std = match self.family {
            Family::Exponential => (one / (one - p)).ln(),
            Family::Weibull => (one / (one - p)).ln().powf(one / self.shape),
            Family::Pareto => (one - p).powf(-one / self.shape),
            Family::Uniform => p,
            Family::Gaussian => inv_norm_cdf(p)?,
            Family::Lognormal => (self.shape * inv_norm_cdf(p)?).exp(),
            Family::Gamma => inv_gamma_p(self.shape, p)?,
            Family::GeneralizedGaussian => {
                let half = T::of(0.5);
                let a = one / self.shape;
                if p >= half {
                    inv_gamma_p(a, T::of(2.0) * p - one)?.powf(a)
                } else {
                    -inv_gamma_p(a, one - T::of(2.0) * p)?.powf(a)
                }
            }
        };
        Ok(self.location + self.scale * std)
    }

    /// CDF F(x); values below the support map to 0, above to 1.
    pub fn cdf(&self, x: T) -> Result<T> {
        if x.is_nan() {
            return Err(Error::domain("cdf of NaN".into()));
        }
        let one = T::one();
        let z = (x - self.location) / self.scale;
        let p = match self.family {
            Family::Exponential => {
                if z <= T::zero() {
                    T::zero()
                } else {
                    one - (-z).exp()
                }
            }
            Family::Weibull => {
                if z <= T::zero() {
                    T::zero()
                } else {
                    one - (-z.powf(self.shape)).exp()
                }
            }
            Family::Pareto => {
                if z <= one {
                    T::zero()
                } else {
                    one - z.powf(-self.shape)
                }
            }
            Family::Uniform => z.max(T::zero()).min(one),
            Family::Gaussian => norm_cdf(z),
            Family::Lognormal => {
                if z <= T::zero() {
                    T::zero()
                } else {
                    norm_cdf(z.ln() / self.shape)
                }
            }
            Family::Gamma => {
                if z <= T::zero() {
                    T::zero()
                } else {
                    gamma_p(self.shape, z)?
                }
            }
            Family::GeneralizedGaussian => {
                let half = T::of(0.5);
                let a = one / self.shape;
                if z == T::zero() {
                    half
                } else {
                    let g = gamma_p(a, z.abs().powf(self.shape))?;
                    if z > T::zero() {
                        half + half * g
                    } else {
                        half - half * g
                    }
                }
            }
        };
        Ok(p.max(T::zero()).min(one))
    }

    /// Raw moment E[Z^r] of the standardized member (scale 1, location 0),
    /// r <= 8. None when the moment is infinite.
    fn standard_raw_moment(&self, r: u8) -> Option<T> {
        let one = T::one();
        let rf = T::of(f64::from(r));
        match self.family {
            Family::Exponential => {
                Some(T::of((1..=u64::from(r)).product::<u64>() as f64))
            }
            Family::Weibull => Some((ln_gamma(one + rf / self.shape)).exp()),
            Family::Gamma => {
                // alpha (alpha+1) ... (alpha+r-1)
                let mut acc = one;
                for j in 0..r {
                    acc = acc * (self.shape + T::of(f64::from(j)));
                }
                Some(acc)
            }
            Family::Pareto => {
                if self.shape > rf {
                    Some(self.shape / (self.shape - rf))
                } else {
                    None
                }
            }
            Family::Lognormal => {
                let v = self.shape * self.shape;
                Some((rf * rf * v * T::of(0.5)).exp())
            }
            Family::Gaussian => {
                // standard normal raw moments: 0 odd, (r-1)!! even
                if r % 2 == 1 {
                    Some(T::zero())
                } else {
                    let mut acc = one;
                    let mut j = r as i64 - 1;
                    while j > 1 {
                        acc = acc * T::of(j as f64);
                        j -= 2;
                    }
                    Some(acc)
                }
            }
            Family::Uniform => Some(one / (rf + one)),
            Family::GeneralizedGaussian => {
                // symmetric about 0: odd raw moments vanish
                if r % 2 == 1 {
                    Some(T::zero())
                } else {
                    let b = self.shape;
                    Some((ln_gamma((rf + one) / b) - ln_gamma(one / b)).exp())
                }
            }
        }
    }

    /// Central moment of order k (1 <= k <= 8), including scale. Location
    /// does not enter. Errors when the moment is infinite.
    pub fn central_moment(&self, k: u8) -> Result<T> {
        if k == 0 || k > 8 {
            return Err(Error::domain(format!("central moment order {k} unsupported")));
        }
        if k == 1 {
            return Ok(T::zero());
        }
        let m1 = self
            .standard_raw_moment(1)
            .ok_or_else(|| Error::InfiniteMoment(format!("{} mean", self.family)))?;
        let mut acc = T::zero();
        for j in 0..=k {
            let raw = if j == 0 {
                T::one()
            } else {
                self.standard_raw_moment(j).ok_or_else(|| {
                    Error::InfiniteMoment(format!("{} raw moment {j}", self.family))
                })?
            };
            let binom = T::of(binomial_f64(k, j));
            let sign_pow = (-m1).powi(i32::from(k - j));
            acc += binom * raw * sign_pow;
        }
        Ok(acc * self.scale.powi(i32::from(k)))
    }

    /// Population mean (location + scale * standardized mean).
    pub fn mean(&self) -> Result<T> {
        let m1 = self
            .standard_raw_moment(1)
            .ok_or_else(|| Error::InfiniteMoment(format!("{} mean", self.family)))?;
        Ok(self.location + self.scale * m1)
    }

    pub fn population_moments(&self) -> Result<MomentSet<T>> {
        let mean = self.mean()?;
        let mu2 = self.central_moment(2)?;
        let mu3 = self.central_moment(3)?;
        let mu4 = self.central_moment(4)?;
        if !(mu2 > T::zero()) {
            return Err(Error::domain("degenerate distribution: variance is zero".into()));
        }
        let skewness = mu3 / mu2.powf(T::of(1.5));
        let kurtosis = mu4 / (mu2 * mu2);
        let mu5 = self.central_moment(5).ok();
        let mu6 = self.central_moment(6).ok();
        let mu7 = self.central_moment(7).ok();
        let mu8 = self.central_moment(8).ok();
        let _ = mu7; // orders 5..8 only feed the kernel deviations below
        let sd1 = Some(mu2.sqrt());
        let sd2 = Some(kernel_variance_2(mu2, mu4).sqrt());
        let sd3 = mu6.map(|m6| kernel_variance_3(mu2, mu3, mu4, m6).sqrt());
        let sd4 = match (mu5, mu6, mu8) {
            (Some(m5), Some(m6), Some(m8)) => {
                Some(kernel_variance_4(mu2, mu3, mu4, m5, m6, m8).sqrt())
            }
            _ => None,
        };
        Ok(MomentSet {
            mean,
            central: [mu2, mu3, mu4],
            skewness,
            kurtosis,
            sd_kernel: [sd1, sd2, sd3, sd4],
        })
    }
}

fn binomial_f64(n: u8, k: u8) -> f64 {
    let mut acc = 1.0f64;
    for j in 0..k {
        acc = acc * f64::from(n - j) / f64::from(j + 1);
    }
    acc
}

/// Var[(x1-x2)^2 / 2] in terms of central moments.
pub fn kernel_variance_2<T: Real>(mu2: T, mu4: T) -> T {
    (mu4 + mu2 * mu2) * T::of(0.5)
}

/// Variance of the degree-3 central moment kernel.
pub fn kernel_variance_3<T: Real>(mu2: T, mu3: T, mu4: T, mu6: T) -> T {
    // E[psi3^2] = mu6/3 + 13 mu3^2/6 - mu2 mu4/2 + 11 mu2^3/2
    let e2 = mu6 / T::of(3.0) + T::of(13.0 / 6.0) * mu3 * mu3 - T::of(0.5) * mu2 * mu4
        + T::of(5.5) * mu2 * mu2 * mu2;
    e2 - mu3 * mu3
}

/// Variance of the degree-4 central moment kernel.
pub fn kernel_variance_4<T: Real>(mu2: T, mu3: T, mu4: T, mu5: T, mu6: T, mu8: T) -> T {
    // E[psi4^2] = mu8/4 + 25 mu4^2/12 - 2 mu3 mu5 + 4 mu2 mu6/3
    //           + 26 mu2 mu3^2/3 - 5 mu2^2 mu4 + 12 mu2^4
    let mu2sq = mu2 * mu2;
    let e2 = mu8 * T::of(0.25) + T::of(25.0 / 12.0) * mu4 * mu4 - T::of(2.0) * mu3 * mu5
        + T::of(4.0 / 3.0) * mu2 * mu6
        + T::of(26.0 / 3.0) * mu2 * mu3 * mu3
        - T::of(5.0) * mu2sq * mu4
        + T::of(12.0) * mu2sq * mu2sq;
    e2 - mu4 * mu4
}

fn kurtosis_of<T: Real>(family: Family, shape: T) -> Result<T> {
    DistributionSpec::standard(family, shape)?
        .population_moments()
        .map(|m| m.kurtosis)
}

fn skewness_of<T: Real>(family: Family, shape: T) -> Result<T> {
    DistributionSpec::standard(family, shape)?
        .population_moments()
        .map(|m| m.skewness)
}

const SHAPE_SOLVE_TOL: f64 = 1e-8;

/// Shape parameter whose population kurtosis matches `target` (1e-8).
/// For the Weibull family the kurtosis in shape is two-branched; the lower
/// shape branch is returned.
pub fn shape_from_kurtosis<T: Real>(family: Family, target: T) -> Result<T> {
    let tol = T::of(SHAPE_SOLVE_TOL);
    match family {
        Family::Exponential | Family::Gaussian | Family::Uniform => {
            let fixed = kurtosis_of(family, T::one())?;
            if (target - fixed).abs() <= tol {
                Ok(T::one())
            } else {
                Err(Error::Range {
                    what: format!("{family} kurtosis is fixed at {fixed}"),
                    attainable: format!("[{fixed}, {fixed}]"),
                })
            }
        }
        Family::Gamma => {
            // kurt = 3 + 6/alpha
            let three = T::of(3.0);
            if target <= three {
                return Err(Error::Range {
                    what: format!("gamma kurtosis {target} unattainable"),
                    attainable: "(3, inf)".into(),
                });
            }
            Ok(T::of(6.0) / (target - three))
        }
        Family::Lognormal => {
            let lo = T::of(1e-3);
            let mut hi = T::of(4.0);
            if target <= kurtosis_of(family, lo)? {
                return Err(Error::Range {
                    what: format!("lognormal kurtosis {target} unattainable"),
                    attainable: "(3, inf)".into(),
                });
            }
            while kurtosis_of(family, hi)? < target {
                hi = hi * T::of(1.5);
                if hi > T::of(50.0) {
                    return Err(Error::Range {
                        what: format!("lognormal kurtosis {target} out of solver range"),
                        attainable: "(3, ~1e200)".into(),
                    });
                }
            }
            bisect_monotone(|s| kurtosis_of(family, s), lo, hi, target, true, tol)
        }
        Family::GeneralizedGaussian => {
            let lo = T::of(0.15);
            let hi = T::of(60.0);
            let k_lo = kurtosis_of(family, lo)?; // very heavy
            let k_hi = kurtosis_of(family, hi)?; // near the flat limit
            if target > k_lo || target < k_hi {
                return Err(Error::Range {
                    what: format!("generalized Gaussian kurtosis {target} unattainable"),
                    attainable: format!("[{k_hi}, {k_lo}]"),
                });
            }
            bisect_monotone(|s| kurtosis_of(family, s), lo, hi, target, false, tol)
        }
        Family::Pareto => {
            let lo = T::of(4.0 + 1e-6);
            let mut hi = T::of(64.0);
            while kurtosis_of(family, hi)? > target {
                hi = hi * T::of(2.0);
                if hi > T::of(1e9) {
                    return Err(Error::Range {
                        what: format!("pareto kurtosis {target} unattainable"),
                        attainable: "(9, inf)".into(),
                    });
                }
            }
            if kurtosis_of(family, lo)? < target {
                return Err(Error::Range {
                    what: format!("pareto kurtosis {target} out of range"),
                    attainable: "(9, inf)".into(),
                });
            }
            bisect_monotone(|s| kurtosis_of(family, s), lo, hi, target, false, tol)
        }
        Family::Weibull => {
            // kurtosis decreases in shape until ~3.35 then rises slowly;
            // the lower-shape branch is the decreasing one.
            let argmin = weibull_kurtosis_argmin::<T>()?;
            let k_min = kurtosis_of(family, argmin)?;
            if target < k_min {
                return Err(Error::Range {
                    what: format!("weibull kurtosis {target} unattainable"),
                    attainable: format!("[{k_min}, inf)"),
                });
            }
            let mut lo = T::of(0.2);
            while kurtosis_of(family, lo)? < target {
                lo = lo * T::of(0.5);
                if lo < T::of(1e-3) {
                    return Err(Error::Range {
                        what: format!("weibull kurtosis {target} out of solver range"),
                        attainable: format!("[{k_min}, ~1e6]"),
                    });
                }
            }
            bisect_monotone(|s| kurtosis_of(family, s), lo, argmin, target, false, tol)
        }
    }
}

fn weibull_kurtosis_argmin<T: Real>() -> Result<T> {
    // golden-section minimum of the kurtosis in shape on [3.0, 3.8]
    let phi = T::of(0.6180339887498949);
    let mut a = T::of(3.0);
    let mut b = T::of(3.8);
    for _ in 0..80 {
        let c = b - (b - a) * phi;
        let d = a + (b - a) * phi;
        if kurtosis_of(Family::Weibull, c)? < kurtosis_of(Family::Weibull, d)? {
            b = d;
        } else {
            a = c;
        }
    }
    Ok((a + b) * T::of(0.5))
}

/// Shape parameter matching a target absolute skewness (1e-8).
pub fn shape_from_skewness<T: Real>(family: Family, target: T) -> Result<T> {
    let tol = T::of(SHAPE_SOLVE_TOL);
    if target < T::zero() {
        return Err(Error::domain(
            "target skewness is matched in absolute value; pass a non-negative target".into(),
        ));
    }
    match family {
        Family::Exponential | Family::Gaussian | Family::Uniform => {
            let fixed = skewness_of(family, T::one())?;
            if (target - fixed).abs() <= tol {
                Ok(T::one())
            } else {
                Err(Error::Range {
                    what: format!("{family} skewness is fixed at {fixed}"),
                    attainable: format!("[{fixed}, {fixed}]"),
                })
            }
        }
        Family::GeneralizedGaussian => {
            if target.abs() <= tol {
                Ok(T::of(2.0))
            } else {
                Err(Error::Range {
                    what: "generalized Gaussian is symmetric".into(),
                    attainable: "[0, 0]".into(),
                })
            }
        }
        Family::Gamma => {
            // skew = 2 / sqrt(alpha)
            if target <= T::zero() {
                return Err(Error::Range {
                    what: "gamma skewness must be positive".into(),
                    attainable: "(0, inf)".into(),
                });
            }
            let r = T::of(2.0) / target;
            Ok(r * r)
        }
        Family::Lognormal => {
            if target <= T::zero() {
                return Err(Error::Range {
                    what: "lognormal skewness is strictly positive".into(),
                    attainable: "(0, inf)".into(),
                });
            }
            let lo = T::of(1e-4);
            let mut hi = T::of(3.0);
            while skewness_of(family, hi)? < target {
                hi = hi * T::of(1.5);
                if hi > T::of(40.0) {
                    return Err(Error::Range {
                        what: format!("lognormal skewness {target} out of solver range"),
                        attainable: "(0, huge)".into(),
                    });
                }
            }
            bisect_monotone(|s| skewness_of(family, s), lo, hi, target, true, tol)
        }
        Family::Pareto => {
            if target <= T::of(2.0) {
                return Err(Error::Range {
                    what: format!("pareto skewness {target} unattainable"),
                    attainable: "(2, inf)".into(),
                });
            }
            let lo = T::of(3.0 + 1e-6);
            let mut hi = T::of(64.0);
            while skewness_of(family, hi)? > target {
                hi = hi * T::of(2.0);
                if hi > T::of(1e9) {
                    return Err(Error::Range {
                        what: format!("pareto skewness {target} unattainable"),
                        attainable: "(2, inf)".into(),
                    });
                }
            }
            bisect_monotone(|s| skewness_of(family, s), lo, hi, target, false, tol)
        }
        Family::Weibull => {
            // skewness decreases in shape, crossing 0 near 3.60
            let mut lo = T::of(0.2);
            let hi = T::of(3.6023494257197);
            while skewness_of(family, lo)? < target {
                lo = lo * T::of(0.5);
                if lo < T::of(1e-3) {
                    return Err(Error::Range {
                        what: format!("weibull skewness {target} out of solver range"),
                        attainable: "[0, ~huge]".into(),
                    });
                }
            }
            bisect_monotone(|s| skewness_of(family, s), lo, hi, target, false, tol)
        }
    }
}

/// Numerically integrate Q(p)^k over (0,1); an independent cross-check of
/// the closed-form raw moments.
pub fn raw_moment_by_quadrature<T: Real>(
    spec: &DistributionSpec<T>,
    k: u8,
    rel_tol: T,
) -> Result<T> {
    integrate(
        |p| match spec.quantile(p) {
            Ok(q) => q.powi(i32::from(k)),
            Err(_) => T::zero(),
        },
        T::zero(),
        T::one(),
        rel_tol,
    )
}
