//! The estimator family for the Weibull tail-coefficient and the associated
//! extreme quantile extrapolation.
//!
//! Given the ascending order statistics `X_{1,n} ≤ … ≤ X_{n,n}` and an
//! intermediate number `k` of upper spacings, the estimate is
//!
//! ```text
//! θ̂ = (1/T_n) · (1/k) Σ_{i=1..k} (log X_{n-i+1,n} − log X_{n-k+1,n})
//! ```
//!
//! where `T_n` is a deterministic normalization chosen among three variants,
//! all asymptotically equivalent to `1/log(n/k)`:
//!
//! - `V1`: `μ₀(log(n/k))` — the exact mean of the log-spacing sum,
//! - `V2`: `(1/k) Σ_{i=1..k} log(1 − log(i/k)/log(n/k))` — its Riemann sum,
//! - `V3`: `1/log(n/k)` — the first-order limit.
//!
//! The exact normalization bias of a variant is
//! `a_n = μ₀(log(n/k))/T_n − 1` (identically zero for V1); it is the lever
//! that separates the three variants' mean-square errors.

use std::fmt;
use std::str::FromStr;

use crate::distributions::WeibullTailModel;
use crate::error::{Error, Result};
use crate::specfun::mu0;

/// Which `T_n` normalization an estimate uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EstimatorVariant {
    V1,
    V2,
    V3,
}

impl EstimatorVariant {
    pub const ALL: [EstimatorVariant; 3] =
        [EstimatorVariant::V1, EstimatorVariant::V2, EstimatorVariant::V3];
}

impl fmt::Display for EstimatorVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EstimatorVariant::V1 => write!(f, "V1"),
            EstimatorVariant::V2 => write!(f, "V2"),
            EstimatorVariant::V3 => write!(f, "V3"),
        }
    }
}

impl FromStr for EstimatorVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "v1" => Ok(EstimatorVariant::V1),
            "v2" => Ok(EstimatorVariant::V2),
            "v3" => Ok(EstimatorVariant::V3),
            other => Err(Error::Domain(format!(
                "unknown estimator variant '{other}' (expected v1, v2 or v3)"
            ))),
        }
    }
}

/// A sample of strictly positive observations in ascending order — the sole
/// input to estimation. Construction validates, so every instance is usable.
#[derive(Debug, Clone, PartialEq)]
pub struct SortedSample {
    values: Vec<f64>,
}

impl SortedSample {
    /// Wrap already-ascending positive values.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 3 {
            return Err(Error::Domain(format!(
                "need at least 3 observations, got {}",
                values.len()
            )));
        }
        for (i, &v) in values.iter().enumerate() {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Domain(format!(
                    "observations must be positive finite numbers; value {i} is {v}"
                )));
            }
        }
        if values.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Domain("observations must be in ascending order".into()));
        }
        Ok(Self { values })
    }

    /// Sort (ties kept) and wrap.
    pub fn from_unsorted(mut values: Vec<f64>) -> Result<Self> {
        values.sort_unstable_by(f64::total_cmp);
        Self::new(values)
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    /// Ascending observations.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `X_{n-k+1,n}`, the (k-th from the top) order statistic.
    pub fn upper_order_statistic(&self, k: usize) -> Result<f64> {
        check_k(k, self.n())?;
        Ok(self.values[self.n() - k])
    }
}

/// One estimation result: the normalization and exact bias term that
/// produced `theta_hat` at this `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatePoint {
    pub k: usize,
    pub variant: EstimatorVariant,
    pub t_n: f64,
    pub a_n: f64,
    pub theta_hat: f64,
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k < 2 || k >= n {
        return Err(Error::Domain(format!(
            "k must satisfy 2 <= k < n, got k = {k}, n = {n}"
        )));
    }
    Ok(())
}

/// The normalization `T_n` for a variant. Strictly positive for 2 ≤ k < n.
pub fn t_n(variant: EstimatorVariant, n: usize, k: usize) -> Result<f64> {
    check_k(k, n)?;
    let log_nk = (n as f64 / k as f64).ln();
    match variant {
        EstimatorVariant::V1 => mu0(log_nk),
        EstimatorVariant::V2 => {
            // i = k term is log(1) = 0 and is kept to match the defining sum.
            let mut acc = 0.0;
            for i in 1..=k {
                acc += (1.0 - (i as f64 / k as f64).ln() / log_nk).ln();
            }
            Ok(acc / k as f64)
        }
        EstimatorVariant::V3 => Ok(1.0 / log_nk),
    }
}

/// Exact normalization bias `a_n = μ₀(log(n/k))/T_n − 1`.
///
/// Identically zero for V1; asymptotically `log(k)/(2k)` for V2 and
/// `−1/log(n/k)` for V3.
pub fn a_n_exact(variant: EstimatorVariant, n: usize, k: usize) -> Result<f64> {
    check_k(k, n)?;
    match variant {
        EstimatorVariant::V1 => Ok(0.0),
        _ => {
            let log_nk = (n as f64 / k as f64).ln();
            Ok(mu0(log_nk)? / t_n(variant, n, k)? - 1.0)
        }
    }
}

/// Mean of the top-k log-spacings, `(1/k) Σ_{i=1..k} (log X_{n-i+1,n} −
/// log X_{n-k+1,n})`. Each term is nonnegative (the sample is ascending), so
/// the result is nonnegative even in floating point, and exactly zero for a
/// constant sample.
fn mean_log_excess(values: &[f64], k: usize) -> f64 {
    let n = values.len();
    let log_pivot = values[n - k].ln();
    let mut acc = 0.0;
    for i in 1..=k {
        acc += values[n - i].ln() - log_pivot;
    }
    acc / k as f64
}

/// The tail-coefficient estimate at level `k` with the given normalization.
pub fn theta_hat(
    sample: &SortedSample,
    k: usize,
    variant: EstimatorVariant,
) -> Result<EstimatePoint> {
    let n = sample.n();
    check_k(k, n)?;
    let t = t_n(variant, n, k)?;
    Ok(EstimatePoint {
        k,
        variant,
        t_n: t,
        a_n: a_n_exact(variant, n, k)?,
        theta_hat: mean_log_excess(sample.values(), k) / t,
    })
}

/// Extreme quantile estimate `x̂_p = X_{n-k+1,n} · τ^θ̂` with
/// `τ = log(1/p)/log(n/k)`, valid in the extrapolation regime `p < 1/n`.
pub fn quantile_hat(
    sample: &SortedSample,
    k: usize,
    p: f64,
    variant: EstimatorVariant,
) -> Result<f64> {
    let n = sample.n();
    if !(p > 0.0) {
        return Err(Error::Domain(format!("quantile order must be positive, got p = {p}")));
    }
    if p >= 1.0 / n as f64 {
        return Err(Error::Domain(format!(
            "extreme-quantile regime requires p < 1/n, got p = {p} with n = {n}"
        )));
    }
    quantile_hat_unchecked(sample, k, p, variant)
}

/// `quantile_hat` without the `p < 1/n` regime check (`0 < p < 1` is still
/// required). The extrapolation ratio τ drops below 1 for large p and the
/// estimate is then an interpolation with no supporting theory; this entry
/// point exists for boundary diagnostics and tests.
pub fn quantile_hat_unchecked(
    sample: &SortedSample,
    k: usize,
    p: f64,
    variant: EstimatorVariant,
) -> Result<f64> {
    let n = sample.n();
    check_k(k, n)?;
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("quantile order must be in (0,1), got p = {p}")));
    }
    let point = theta_hat(sample, k, variant)?;
    let tau = -p.ln() / (n as f64 / k as f64).ln();
    Ok(sample.values()[n - k] * tau.powf(point.theta_hat))
}

/// The `k` minimizing the asymptotic mean-square error for a model whose
/// bias function has a finite nonzero value at `log n`:
/// `k* = round((λ/b(log n))²)`, clamped into `[2, n−1]`.
///
/// `λ` is the limit of `√k·b(log(n/k))` along the optimal sequence; `λ = 1`
/// balances squared bias against variance at the same rate.
pub fn optimal_k(n: usize, lambda: f64, model: &WeibullTailModel) -> Result<usize> {
    if n < 3 {
        return Err(Error::Domain(format!("need n >= 3, got {n}")));
    }
    if !(lambda != 0.0 && lambda.is_finite()) {
        return Err(Error::Domain(format!("lambda must be finite and nonzero, got {lambda}")));
    }
    let b = model.bias_b((n as f64).ln())?;
    if b == 0.0 {
        return Err(Error::UndefinedRate(format!(
            "bias function of {} vanishes at log n; every intermediate k attains the optimal rate",
            model.name()
        )));
    }
    let k = (lambda / b).powi(2).round();
    let k = if k.is_finite() { k as usize } else { n - 1 };
    Ok(k.clamp(2, n - 1))
}
