//! Problem statement and the normalization shared by every solver.
//!
//! All solvers work in share space with a single normalized risk coefficient
//! `lambda_norm = lambda * (s0 * sigma)^2 / eta_tilde` (units 1/time^2) and a
//! drift forcing `alpha_tilde(t) = alpha(t) * s0 / (2 * eta_tilde)` (shares/time^2).
//! Prices are frozen at `s0` inside the risk term, which keeps the utility
//! quadratic in the holdings path.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn positive(field: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(
            field,
            format!("must be positive, got {value}"),
        ))
    }
}

fn finite(field: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(
            field,
            format!("must be finite, got {value}"),
        ))
    }
}

/// Raw market parameters for a single stock.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketParams {
    /// Arrival price, currency/share.
    pub s0: f64,
    /// Relative volatility, 1/sqrt(time).
    pub sigma: f64,
    /// Average daily volume, shares/time.
    pub adv: f64,
    /// Dimensionless impact calibration coefficient.
    pub eta: f64,
}

impl MarketParams {
    pub fn new(s0: f64, sigma: f64, adv: f64, eta: f64) -> Result<Self> {
        let market = MarketParams {
            s0,
            sigma,
            adv,
            eta,
        };
        market.validate()?;
        Ok(market)
    }

    /// Unit market: every coefficient one, so `eta_tilde = 1` and
    /// `lambda_norm` equals the raw risk aversion.
    pub fn unit() -> Self {
        MarketParams {
            s0: 1.0,
            sigma: 1.0,
            adv: 1.0,
            eta: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        positive("s0", self.s0)?;
        positive("sigma", self.sigma)?;
        positive("adv", self.adv)?;
        positive("eta", self.eta)?;
        positive("eta_tilde", self.eta_tilde())
    }

    /// Temporary impact coefficient `eta * sigma / (adv * s0)`.
    pub fn eta_tilde(&self) -> f64 {
        self.eta * self.sigma / (self.adv * self.s0)
    }
}

/// Expected relative drift of the asset ("alpha").
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DriftSpec {
    Zero,
    /// `alpha0` on `[0, t1)`, zero afterwards. `t1` may be infinite.
    ConstantLocal {
        alpha0: f64,
        t1: f64,
    },
    /// `alpha0 * exp(-gamma t)`.
    ExpDecay {
        alpha0: f64,
        gamma: f64,
    },
}

impl DriftSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            DriftSpec::Zero => Ok(()),
            DriftSpec::ConstantLocal { alpha0, t1 } => {
                finite("alpha0", alpha0)?;
                if t1 > 0.0 {
                    Ok(())
                } else {
                    Err(Error::invalid("t1", format!("must be positive, got {t1}")))
                }
            }
            DriftSpec::ExpDecay { alpha0, gamma } => {
                finite("alpha0", alpha0)?;
                if gamma.is_finite() && gamma >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::invalid(
                        "gamma",
                        format!("must be non-negative, got {gamma}"),
                    ))
                }
            }
        }
    }

    pub fn alpha0(&self) -> f64 {
        match *self {
            DriftSpec::Zero => 0.0,
            DriftSpec::ConstantLocal { alpha0, .. } | DriftSpec::ExpDecay { alpha0, .. } => alpha0,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.alpha0() == 0.0
    }

    /// Drift rate without the domain check; `t` is assumed non-negative.
    pub(crate) fn rate(&self, t: f64) -> f64 {
        match *self {
            DriftSpec::Zero => 0.0,
            DriftSpec::ConstantLocal { alpha0, t1 } => {
                if t < t1 {
                    alpha0
                } else {
                    0.0
                }
            }
            DriftSpec::ExpDecay { alpha0, gamma } => alpha0 * (-gamma * t).exp(),
        }
    }

    /// Second time derivative of the drift away from any switch point.
    pub(crate) fn second_derivative(&self, t: f64) -> f64 {
        match *self {
            DriftSpec::ExpDecay { gamma, .. } => gamma * gamma * self.rate(t),
            _ => 0.0,
        }
    }

    /// Exact integral of the drift over `[a, b]`.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        match *self {
            DriftSpec::Zero => 0.0,
            DriftSpec::ConstantLocal { alpha0, t1 } => alpha0 * (b.min(t1) - a.min(t1)).max(0.0),
            DriftSpec::ExpDecay { alpha0, gamma } => {
                if gamma == 0.0 {
                    alpha0 * (b - a)
                } else {
                    alpha0 * (-gamma * a).exp() * (-(-gamma * (b - a)).exp_m1()) / gamma
                }
            }
        }
    }
}

/// Drift rate `alpha(t)` in 1/time.
pub fn drift_at(spec: &DriftSpec, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::Domain {
            what: "t",
            value: t,
            reason: "time must be non-negative",
        });
    }
    Ok(spec.rate(t))
}

/// Temporary impact decay kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelSpec {
    /// Memoryless impact: price recovers instantly.
    DiracDelta,
    /// `beta * exp(-beta dt)`, unit mass on `[0, inf)`.
    Exponential { beta: f64 },
}

impl KernelSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::DiracDelta => Ok(()),
            KernelSpec::Exponential { beta } => positive("beta", beta),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            KernelSpec::DiracDelta => "delta",
            KernelSpec::Exponential { .. } => "exponential",
        }
    }

    pub fn beta(&self) -> Option<f64> {
        match *self {
            KernelSpec::DiracDelta => None,
            KernelSpec::Exponential { beta } => Some(beta),
        }
    }
}

/// Risk aversion, raw (1/currency) and normalized (1/time^2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskSpec {
    pub lambda_raw: f64,
    pub lambda_norm: f64,
}

/// Output of [`normalize`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normalized {
    pub eta_tilde: f64,
    pub risk: RiskSpec,
    /// Urgency rate `k` in 1/time.
    pub k: f64,
}

/// Urgency rate for a normalized risk coefficient and kernel.
pub fn urgency(lambda_norm: f64, kernel: &KernelSpec) -> f64 {
    match *kernel {
        KernelSpec::DiracDelta => lambda_norm.sqrt(),
        KernelSpec::Exponential { beta } => {
            let b2 = beta * beta;
            (lambda_norm * b2 / (lambda_norm + b2)).sqrt()
        }
    }
}

/// Maps raw market parameters and risk aversion onto the normalized
/// coefficients used downstream.
pub fn normalize(market: &MarketParams, risk_raw: f64, kernel: &KernelSpec) -> Result<Normalized> {
    market.validate()?;
    kernel.validate()?;
    if !(risk_raw.is_finite() && risk_raw >= 0.0) {
        return Err(Error::invalid(
            "lambda",
            format!("must be non-negative, got {risk_raw}"),
        ));
    }
    let eta_tilde = market.eta_tilde();
    let price_vol = market.s0 * market.sigma;
    let lambda_norm = risk_raw * price_vol * price_vol / eta_tilde;
    Ok(Normalized {
        eta_tilde,
        risk: RiskSpec {
            lambda_raw: risk_raw,
            lambda_norm,
        },
        k: urgency(lambda_norm, kernel),
    })
}

/// A fully validated single-stock execution problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExecutionProblem {
    pub x0: f64,
    pub x_t: f64,
    pub horizon: f64,
    pub market: MarketParams,
    pub drift: DriftSpec,
    pub kernel: KernelSpec,
    pub risk: RiskSpec,
    pub eta_tilde: f64,
    pub k: f64,
    pub alpha_tilde0: f64,
}

impl ExecutionProblem {
    pub fn new(
        x0: f64,
        x_t: f64,
        horizon: f64,
        market: MarketParams,
        drift: DriftSpec,
        kernel: KernelSpec,
        risk_raw: f64,
    ) -> Result<Self> {
        finite("x0", x0)?;
        finite("xT", x_t)?;
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::invalid("horizon", "horizon must be positive"));
        }
        drift.validate()?;
        let norm = normalize(&market, risk_raw, &kernel)?;
        Ok(ExecutionProblem {
            x0,
            x_t,
            horizon,
            market,
            drift,
            kernel,
            risk: norm.risk,
            eta_tilde: norm.eta_tilde,
            k: norm.k,
            alpha_tilde0: drift.alpha0() * market.s0 / (2.0 * norm.eta_tilde),
        })
    }

    /// Problem on the unit market, where `lambda_norm` equals the given risk
    /// coefficient and `alpha_tilde0 = alpha0 / 2`.
    pub fn normalized(
        x0: f64,
        x_t: f64,
        horizon: f64,
        lambda_norm: f64,
        drift: DriftSpec,
        kernel: KernelSpec,
    ) -> Result<Self> {
        Self::new(
            x0,
            x_t,
            horizon,
            MarketParams::unit(),
            drift,
            kernel,
            lambda_norm,
        )
    }

    pub fn lambda_norm(&self) -> f64 {
        self.risk.lambda_norm
    }

    /// Same problem with different boundary holdings.
    pub fn with_boundaries(&self, x0: f64, x_t: f64) -> Result<Self> {
        Self::new(
            x0,
            x_t,
            self.horizon,
            self.market,
            self.drift,
            self.kernel,
            self.risk.lambda_raw,
        )
    }

    pub fn with_kernel(&self, kernel: KernelSpec) -> Result<Self> {
        Self::new(
            self.x0,
            self.x_t,
            self.horizon,
            self.market,
            self.drift,
            kernel,
            self.risk.lambda_raw,
        )
    }

    /// Drift forcing `alpha(t) s0 / (2 eta_tilde)` in shares/time^2.
    pub fn alpha_tilde_at(&self, t: f64) -> f64 {
        self.drift.rate(t) * self.market.s0 / (2.0 * self.eta_tilde)
    }

    /// Right-hand side `f(t)` of the interior trajectory ODE `x'' - k^2 x = f(t)`.
    pub fn ode_forcing(&self, t: f64) -> f64 {
        let scale = self.market.s0 / (2.0 * self.eta_tilde);
        match self.kernel {
            KernelSpec::DiracDelta => -self.alpha_tilde_at(t),
            KernelSpec::Exponential { beta } => {
                let b2 = beta * beta;
                let a = self.drift.rate(t) * scale;
                let a2 = self.drift.second_derivative(t) * scale;
                (a2 - b2 * a) / (self.lambda_norm() + b2)
            }
        }
    }
}
