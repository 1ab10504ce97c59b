//! Special functions behind the estimator family.
//!
//! Everything here revolves around the kernel `K_ρ(λ) = ∫₁^λ u^{ρ-1} du`
//! (so `K₀ = log` and `K_ρ(λ) = (λ^ρ - 1)/ρ` for ρ < 0) and the moments
//!
//! ```text
//! μ_ρ(t)  = ∫₀^∞ K_ρ(1 + x/t) e^{-x} dx
//! σ²_ρ(t) = ∫₀^∞ K²_ρ(1 + x/t) e^{-x} dx − μ²_ρ(t)
//! ```
//!
//! For ρ = 0 the first moment reduces to `μ₀(t) = e^t E₁(t)` with `E₁` the
//! exponential integral, which is both faster and more accurate than
//! quadrature; the identity is exercised by tests comparing both routes.

mod laguerre;

pub use laguerre::{gauss_laguerre, GaussLaguerre};

use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// |ρ| below this is treated as ρ = 0: `(λ^ρ - 1)/ρ` cancels catastrophically
/// there and its limit is `log λ`.
pub const RHO_ZERO_EPS: f64 = 1e-12;

/// Node-doubling cap for the refinement loop.
const MAX_NODES: usize = 4096;

/// Quadrature control: `node_count` is the starting Gauss–Laguerre
/// resolution; it is doubled until two successive estimates agree within
/// `abs_tol` (the finer one is returned).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub node_count: usize,
    pub abs_tol: f64,
}

impl QuadratureConfig {
    pub fn new(node_count: usize, abs_tol: f64) -> Result<Self> {
        let cfg = Self { node_count, abs_tol };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.node_count < 2 {
            return Err(Error::Domain(format!(
                "quadrature needs at least 2 nodes, got {}",
                self.node_count
            )));
        }
        if !(self.abs_tol > 0.0) {
            return Err(Error::Domain(format!(
                "quadrature tolerance must be positive, got {}",
                self.abs_tol
            )));
        }
        Ok(())
    }
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self { node_count: 64, abs_tol: 1e-9 }
    }
}

/// `K_ρ(λ) = ∫₁^λ u^{ρ-1} du` for λ ≥ 1, ρ ≤ 0.
///
/// Nonnegative, and zero exactly when λ = 1.
pub fn k_rho(lambda: f64, rho: f64) -> Result<f64> {
    if !(lambda >= 1.0) {
        return Err(Error::Domain(format!("K_rho needs lambda >= 1, got {lambda}")));
    }
    if !rho.is_finite() || rho > 0.0 {
        return Err(Error::Domain(format!("K_rho needs finite rho <= 0, got {rho}")));
    }
    Ok(k_rho_raw(lambda, rho))
}

/// `k_rho` without argument checks, for quadrature inner loops.
#[inline]
fn k_rho_raw(lambda: f64, rho: f64) -> f64 {
    if rho.abs() < RHO_ZERO_EPS {
        lambda.ln()
    } else {
        (lambda.powf(rho) - 1.0) / rho
    }
}

/// Exponential integral `E₁(t) = ∫₁^∞ e^{-tu}/u du`, t > 0.
///
/// Power series for t ≤ 1, continued fraction (evaluated by backward
/// recurrence) above.
pub fn exp_integral_e1(t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("E1 needs t > 0, got {t}")));
    }
    if t <= 1.0 {
        Ok(e1_series(t))
    } else {
        Ok((-t).exp() * e1_scaled_cf(t))
    }
}

/// `μ₀(t) = e^t E₁(t)`, evaluated jointly so it stays finite for t > 700
/// where `e^t` alone would overflow.
pub fn mu0(t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("mu_0 needs t > 0, got {t}")));
    }
    if t <= 1.0 {
        Ok(t.exp() * e1_series(t))
    } else {
        Ok(e1_scaled_cf(t))
    }
}

/// E₁(t) = -γ - log t + Σ_{m≥1} (-1)^{m+1} t^m/(m·m!), accurate for t ≤ 1.
fn e1_series(t: f64) -> f64 {
    let mut sum = 0.0;
    let mut term = 1.0; // t^m / m!
    for m in 1..=40 {
        term *= t / m as f64;
        let contrib = if m % 2 == 1 { term / m as f64 } else { -term / m as f64 };
        sum += contrib;
        if contrib.abs() <= 1e-17 {
            break;
        }
    }
    -EULER_GAMMA - t.ln() + sum
}

/// `e^t E₁(t)` via the continued fraction
/// `E₁(t) = e^{-t} / (t + 1 - 1²/(t + 3 - 2²/(t + 5 - …)))`,
/// evaluated by backward recurrence. Reliable for t > 1; depth chosen with
/// generous margin (the recurrence is contractive, extra depth is harmless).
fn e1_scaled_cf(t: f64) -> f64 {
    let depth = (((80.0 / t) as usize) + 24).min(150);
    let mut f = 0.0;
    for j in (1..=depth).rev() {
        let jf = j as f64;
        f = jf * jf / (t + (2 * j + 1) as f64 - f);
    }
    1.0 / (t + 1.0 - f)
}

/// q-th moment `∫₀^∞ K_ρ^q(1 + x/t) e^{-x} dx` by refining Gauss–Laguerre
/// quadrature. This is the raw quadrature route; `mu_rho` switches to the
/// closed form for ρ = 0 and q = 1.
pub fn k_rho_moment(t: f64, rho: f64, q: u32, cfg: QuadratureConfig) -> Result<f64> {
    cfg.validate()?;
    if !(t > 0.0) {
        return Err(Error::Domain(format!("moment needs t > 0, got {t}")));
    }
    if !rho.is_finite() || rho > 0.0 {
        return Err(Error::Domain(format!("moment needs finite rho <= 0, got {rho}")));
    }
    if q == 0 || q > 4 {
        return Err(Error::Domain(format!("moment order must be in 1..=4, got {q}")));
    }
    integrate_refining(cfg, |x| k_rho_raw(1.0 + x / t, rho).powi(q as i32))
}

/// First moment `μ_ρ(t)`. Strictly positive and strictly decreasing in t.
pub fn mu_rho(t: f64, rho: f64, cfg: QuadratureConfig) -> Result<f64> {
    if !rho.is_finite() || rho > 0.0 {
        return Err(Error::Domain(format!("mu_rho needs finite rho <= 0, got {rho}")));
    }
    if rho.abs() < RHO_ZERO_EPS {
        cfg.validate()?;
        if !(t > 0.0) {
            return Err(Error::Domain(format!("mu_rho needs t > 0, got {t}")));
        }
        mu0(t)
    } else {
        k_rho_moment(t, rho, 1, cfg)
    }
}

/// Variance `σ²_ρ(t)` of `K_ρ(1 + X/t)`, X unit exponential. Strictly
/// positive for every t > 0; a nonpositive computed value means the
/// quadrature tolerance was too loose for this t and is reported as a
/// numerical failure.
pub fn sigma_rho_sq(t: f64, rho: f64, cfg: QuadratureConfig) -> Result<f64> {
    let m2 = k_rho_moment(t, rho, 2, cfg)?;
    let m1 = mu_rho(t, rho, cfg)?;
    let var = m2 - m1 * m1;
    if var > 0.0 {
        Ok(var)
    } else {
        Err(Error::Numerical(format!(
            "sigma_rho^2({t}) evaluated to {var}; tighten the quadrature tolerance"
        )))
    }
}

fn integrate_refining(cfg: QuadratureConfig, f: impl Fn(f64) -> f64) -> Result<f64> {
    let mut nodes = cfg.node_count.max(2);
    let mut prev = gauss_laguerre(nodes)?.integrate(&f);
    loop {
        nodes *= 2;
        if nodes > MAX_NODES {
            return Err(Error::Numerical(format!(
                "quadrature did not reach abs_tol {} within {} nodes",
                cfg.abs_tol, MAX_NODES
            )));
        }
        let next = gauss_laguerre(nodes)?.integrate(&f);
        if (next - prev).abs() <= cfg.abs_tol {
            return Ok(next);
        }
        prev = next;
    }
}
