//! Weibull tail-type distributions: the models whose tails the estimators
//! target, with exact quantiles, deep-tail inversion and the bias function
//! `b(x) = x e^{-x} / (F⁻¹(1-e^{-x}) · f(F⁻¹(1-e^{-x}))) − θ` that drives
//! the second-order behaviour of every estimate.
//!
//! A model here is `F(z) = 1 − exp(−H(z))` with `H⁻¹` regularly varying of
//! index θ. The built-in catalog covers the three shapes of bias that matter
//! in practice: ultimately positive (Γ with shape < 1, |N|), ultimately
//! negative (Γ with shape > 1), and identically zero (Weibull itself, and
//! the exponential as its shape-1 special case).

pub(crate) mod incgamma;

use std::fmt;
use std::sync::Arc;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::estimators::SortedSample;
use incgamma as ig;

/// Sign of the bias function for all large arguments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BiasSign {
    UltimatelyNonneg,
    UltimatelyNonpos,
    Zero,
}

impl fmt::Display for BiasSign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BiasSign::UltimatelyNonneg => write!(f, "ultimately nonnegative"),
            BiasSign::UltimatelyNonpos => write!(f, "ultimately nonpositive"),
            BiasSign::Zero => write!(f, "identically zero"),
        }
    }
}

#[derive(Clone)]
enum Kind {
    /// Gamma(shape, rate): density ∝ z^{shape-1} e^{-rate·z}.
    Gamma { shape: f64, rate: f64 },
    /// |N(0, sigma²)|: the absolute value of a centered normal.
    AbsNormal { sigma: f64 },
    /// Weibull(shape, scale): F(z) = 1 − exp(−(z/scale)^shape).
    Weibull { shape: f64, scale: f64 },
    /// Bias-only model for rate studies; has no distributional operations.
    Custom { bias: Arc<dyn Fn(f64) -> f64 + Send + Sync> },
}

/// A distribution in the Weibull tail family, carrying its tail coefficient
/// θ, second-order index ρ (`-∞` when the bias vanishes identically), and
/// the ultimate sign of its bias function.
#[derive(Clone)]
pub struct WeibullTailModel {
    name: String,
    kind: Kind,
    theta: f64,
    rho: f64,
    bias_sign: BiasSign,
}

impl fmt::Debug for WeibullTailModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WeibullTailModel")
            .field("name", &self.name)
            .field("theta", &self.theta)
            .field("rho", &self.rho)
            .field("bias_sign", &self.bias_sign)
            .finish()
    }
}

impl fmt::Display for WeibullTailModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

fn check_positive(what: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::Domain(format!("{what} must be positive and finite, got {v}")));
    }
    Ok(())
}

impl WeibullTailModel {
    /// Gamma with the given shape and *rate* (inverse scale). θ = 1 for any
    /// parameters; shape 1 is the exponential, whose bias vanishes.
    pub fn gamma(shape: f64, rate: f64) -> Result<Self> {
        check_positive("gamma shape", shape)?;
        check_positive("gamma rate", rate)?;
        let (rho, bias_sign) = if shape == 1.0 {
            (f64::NEG_INFINITY, BiasSign::Zero)
        } else if shape < 1.0 {
            (-1.0, BiasSign::UltimatelyNonneg)
        } else {
            (-1.0, BiasSign::UltimatelyNonpos)
        };
        Ok(Self {
            name: format!("Gamma({shape},{rate})"),
            kind: Kind::Gamma { shape, rate },
            theta: 1.0,
            rho,
            bias_sign,
        })
    }

    /// |N(mu, sigma²)| with standard deviation `sigma`. Only the centered
    /// case is in the Weibull tail family with the bias function used here,
    /// so `mu != 0` is rejected. θ = 1/2.
    pub fn abs_normal(mu: f64, sigma: f64) -> Result<Self> {
        check_positive("normal standard deviation", sigma)?;
        if mu != 0.0 {
            return Err(Error::Domain(format!(
                "absolute normal model requires mu = 0, got mu = {mu}"
            )));
        }
        Ok(Self {
            name: format!("|N(0,{sigma})|"),
            kind: Kind::AbsNormal { sigma },
            theta: 0.5,
            rho: -1.0,
            bias_sign: BiasSign::UltimatelyNonneg,
        })
    }

    /// Weibull with the given shape and *scale*. θ = 1/shape and the bias
    /// function is identically zero: this family is its own tail model.
    pub fn weibull(shape: f64, scale: f64) -> Result<Self> {
        check_positive("weibull shape", shape)?;
        check_positive("weibull scale", scale)?;
        Ok(Self {
            name: format!("Weibull({shape},{scale})"),
            kind: Kind::Weibull { shape, scale },
            theta: 1.0 / shape,
            rho: f64::NEG_INFINITY,
            bias_sign: BiasSign::Zero,
        })
    }

    /// A model given only by its bias function, for rate and ordering
    /// studies. Distributional operations (quantile, cdf, density, sample)
    /// are not available and report a domain error.
    pub fn custom(
        name: &str,
        theta: f64,
        rho: f64,
        bias_sign: BiasSign,
        bias: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        check_positive("theta", theta)?;
        if rho > 0.0 || rho.is_nan() {
            return Err(Error::Domain(format!("rho must be <= 0 (or -inf), got {rho}")));
        }
        Ok(Self {
            name: name.to_string(),
            kind: Kind::Custom { bias: Arc::new(bias) },
            theta,
            rho,
            bias_sign,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Tail coefficient θ.
    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Second-order index ρ ≤ 0; `-∞` when the bias vanishes identically.
    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn bias_sign(&self) -> BiasSign {
        self.bias_sign
    }

    /// File-name-friendly identifier, e.g. `gamma_0.5_1`.
    pub fn slug(&self) -> String {
        match &self.kind {
            Kind::Gamma { shape, rate } => format!("gamma_{shape}_{rate}"),
            Kind::AbsNormal { sigma } => format!("absnormal_0_{sigma}"),
            Kind::Weibull { shape, scale } => format!("weibull_{shape}_{scale}"),
            Kind::Custom { .. } => self
                .name
                .to_ascii_lowercase()
                .chars()
                .map(|c| if c.is_ascii_alphanumeric() || c == '.' { c } else { '_' })
                .collect(),
        }
    }

    /// Exact quantile F⁻¹(u) for 0 < u < 1.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::Domain(format!("quantile order must be in (0,1), got {u}")));
        }
        match &self.kind {
            Kind::Gamma { shape, rate } => Ok(ig::inv_reg_lower(*shape, u)? / rate),
            Kind::AbsNormal { sigma } => {
                Ok(sigma * (2.0 * ig::inv_reg_lower(0.5, u)?).sqrt())
            }
            Kind::Weibull { shape, scale } => {
                Ok(scale * (-(-u).ln_1p()).powf(1.0 / shape))
            }
            Kind::Custom { .. } => Err(self.custom_op_error("quantile")),
        }
    }

    /// The tail quantile F⁻¹(1 − e^{-x}) for x > 0, stable for arbitrarily
    /// deep tails: beyond x ≈ 30 the CDF value 1 − e^{-x} is
    /// indistinguishable from 1 in double precision, so inversion switches
    /// to a log-space solver instead of going through `quantile`.
    pub fn tail_quantile(&self, x: f64) -> Result<f64> {
        if !(x > 0.0 && x.is_finite()) {
            return Err(Error::Domain(format!("tail argument must be positive and finite, got {x}")));
        }
        match &self.kind {
            // closed form at every depth
            Kind::Weibull { shape, scale } => Ok(scale * x.powf(1.0 / shape)),
            Kind::Gamma { shape, rate } => {
                if x <= ig::TAIL_SWITCH {
                    self.quantile(-(-x).exp_m1())
                } else {
                    Ok(ig::tail_inverse(*shape, x)? / rate)
                }
            }
            Kind::AbsNormal { sigma } => {
                if x <= ig::TAIL_SWITCH {
                    self.quantile(-(-x).exp_m1())
                } else {
                    Ok(sigma * (2.0 * ig::tail_inverse(0.5, x)?).sqrt())
                }
            }
            Kind::Custom { .. } => Err(self.custom_op_error("tail_quantile")),
        }
    }

    /// CDF F(z); zero below the support.
    pub fn cdf(&self, z: f64) -> Result<f64> {
        match &self.kind {
            Kind::Gamma { shape, rate } => {
                Ok(if z <= 0.0 { 0.0 } else { ig::reg_lower(*shape, rate * z) })
            }
            Kind::AbsNormal { sigma } => Ok(if z <= 0.0 {
                0.0
            } else {
                ig::reg_lower(0.5, z * z / (2.0 * sigma * sigma))
            }),
            Kind::Weibull { shape, scale } => Ok(if z <= 0.0 {
                0.0
            } else {
                -(-(z / scale).powf(*shape)).exp_m1()
            }),
            Kind::Custom { .. } => Err(self.custom_op_error("cdf")),
        }
    }

    /// Density f(z); zero off the support.
    pub fn density(&self, z: f64) -> Result<f64> {
        if z <= 0.0 {
            return match &self.kind {
                Kind::Custom { .. } => Err(self.custom_op_error("density")),
                _ => Ok(0.0),
            };
        }
        self.ln_density(z).map(f64::exp)
    }

    fn ln_density(&self, z: f64) -> Result<f64> {
        debug_assert!(z > 0.0);
        match &self.kind {
            Kind::Gamma { shape, rate } => Ok(shape * rate.ln() + (shape - 1.0) * z.ln()
                - rate * z
                - ig::ln_gamma(*shape)),
            Kind::AbsNormal { sigma } => {
                Ok(0.5 * (2.0 / std::f64::consts::PI).ln() - sigma.ln()
                    - z * z / (2.0 * sigma * sigma))
            }
            Kind::Weibull { shape, scale } => Ok(shape.ln() - scale.ln()
                + (shape - 1.0) * (z / scale).ln()
                - (z / scale).powf(*shape)),
            Kind::Custom { .. } => Err(self.custom_op_error("density")),
        }
    }

    /// The bias function b(x) = x e^{-x} / (z·f(z)) − θ with
    /// z = F⁻¹(1 − e^{-x}), evaluated in log space so the deep tail
    /// (x ≫ 30) neither overflows nor cancels. Exactly zero for the models
    /// whose bias vanishes identically.
    pub fn bias_b(&self, x: f64) -> Result<f64> {
        if !(x > 0.0 && x.is_finite()) {
            return Err(Error::Domain(format!("bias argument must be positive and finite, got {x}")));
        }
        if let Kind::Custom { bias } = &self.kind {
            return Ok(bias(x));
        }
        if self.bias_sign == BiasSign::Zero {
            return Ok(0.0);
        }
        let z = self.tail_quantile(x)?;
        let ln_term = x.ln() - x - z.ln() - self.ln_density(z)?;
        let b = ln_term.exp() - self.theta;
        if b.is_finite() {
            Ok(b)
        } else {
            Err(Error::Numerical(format!(
                "bias evaluation saturated at x = {x} for {}",
                self.name
            )))
        }
    }

    /// Draw `n` observations with the inverse-CDF method and return them
    /// sorted. The stream is ChaCha8 keyed by `seed`: one u64 per draw,
    /// mapped to (0,1) strictly, so identical seeds give identical samples
    /// on every platform.
    pub fn sample(&self, n: usize, seed: u64) -> Result<SortedSample> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut values = Vec::with_capacity(n);
        for _ in 0..n {
            values.push(self.quantile(uniform_open01(rng.next_u64()))?);
        }
        SortedSample::from_unsorted(values)
    }

    fn custom_op_error(&self, op: &str) -> Error {
        Error::Domain(format!(
            "custom model '{}' defines only a bias function; {op} is unavailable",
            self.name
        ))
    }
}

/// Map a u64 to the open interval (0,1): the top 52 bits centered in the
/// unit cell, so 0 and 1 are unreachable.
pub(crate) fn uniform_open01(bits: u64) -> f64 {
    ((bits >> 12) as f64 + 0.5) * (1.0 / 4_503_599_627_370_496.0)
}

/// The five reference models every study in this crate reports on.
pub fn catalog() -> Vec<WeibullTailModel> {
    vec![
        WeibullTailModel::gamma(0.5, 1.0).unwrap(),
        WeibullTailModel::gamma(1.5, 1.0).unwrap(),
        WeibullTailModel::abs_normal(0.0, 1.0).unwrap(),
        WeibullTailModel::weibull(2.5, 2.5).unwrap(),
        WeibullTailModel::weibull(0.4, 0.4).unwrap(),
    ]
}

/// Parse a model spec of the form `family:param1,param2`:
/// `gamma:<shape>,<rate>`, `absnormal:<mu>,<sigma>` (mu must be 0) or
/// `weibull:<shape>,<scale>`.
pub fn parse_model_spec(spec: &str) -> Result<WeibullTailModel> {
    let (family, params) = spec.split_once(':').ok_or_else(|| {
        Error::Domain(format!(
            "model spec '{spec}' must look like 'family:params', e.g. 'gamma:1.5,1'"
        ))
    })?;
    let params: Vec<f64> = params
        .split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::Domain(format!("could not parse model parameter '{p}'")))
        })
        .collect::<Result<_>>()?;
    let expect = |n: usize| {
        if params.len() == n {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "model family '{family}' takes {n} parameters, got {}",
                params.len()
            )))
        }
    };
    match family.trim().to_ascii_lowercase().as_str() {
        "gamma" => {
            expect(2)?;
            WeibullTailModel::gamma(params[0], params[1])
        }
        "absnormal" => {
            expect(2)?;
            WeibullTailModel::abs_normal(params[0], params[1])
        }
        "weibull" => {
            expect(2)?;
            WeibullTailModel::weibull(params[0], params[1])
        }
        other => Err(Error::Domain(format!(
            "unknown model family '{other}' (expected gamma, absnormal or weibull)"
        ))),
    }
}
