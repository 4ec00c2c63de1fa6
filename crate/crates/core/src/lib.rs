//! Robust "invariant" estimation of the mean and the 2nd-4th central
//! moments: recombined and quantile I-statistics built on weighted
//! L-statistics and trimmed U-statistics, calibrated against a consistent
//! parametric distribution, plus a Monte Carlo evaluation harness.
//!
//! The estimator core is generic over the scalar type through [`Real`];
//! `f64` aliases for the main types live at the crate root.

pub mod calibration;
pub mod distributions;
pub mod error;
pub mod harness;
pub mod invariant;
pub mod io;
pub mod lstats;
pub mod numeric;
pub mod qmc;
pub mod rng;
pub mod scalar;
pub mod special;
pub mod ustats;

pub use error::{Error, Result};
pub use scalar::{Flagged, Real};

pub use distributions::{
    shape_from_kurtosis, shape_from_skewness, DistributionSpec, Family, MomentSet,
};
pub use lstats::{
    asymptotic_wl, asymptotic_wl_auto, empirical_cdf_value, evaluate_wl, sample_quantile,
    AsymptoticMethod, QuantileScheme, Sample, WlKind, WlSpec,
};
pub use ustats::{
    adjust_breakdown, adjust_breakdown_real, exact_u_statistic, kernel_eval, kernel_sample,
    lu_statistic, overall_breakdown_exact, quasi_bootstrap_u, KernelSpec, LuSpec,
    DEFAULT_BOOTSTRAP_SIZE,
};

pub use calibration::{
    build_d_table, build_i_table, build_kurt_table_pair, d_qm_closed_exponential,
    d_qm_closed_pareto, d_qm_general, d_rm_closed_exponential, d_rm_closed_pareto, d_rm_general,
    interpolate_d, DTable, EstimatorClass, GridConfig, ITable, KeyKind, TableMeta,
};
pub use invariant::{
    fixed_point_kurt, fixed_point_skew, ikm_select, qkm, quantile_statistic, recombined, rkm,
    standardized_moment, FixedPointConfig, FixedPointOutcome, MomentWls, QiConfig,
};

/// Concrete `f64` aliases for the main domain types.
pub type Sample64 = lstats::Sample<f64>;
pub type DistributionSpec64 = distributions::DistributionSpec<f64>;
pub type MomentSet64 = distributions::MomentSet<f64>;
pub type WlSpec64 = lstats::WlSpec<f64>;
pub type WlKind64 = lstats::WlKind<f64>;
pub type LuSpec64 = ustats::LuSpec<f64>;
pub type DTable64 = calibration::DTable<f64>;
pub type ITable64 = calibration::ITable<f64>;
