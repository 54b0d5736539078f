//! Flat `key: value` run configuration.
//!
//! ```text
//! # liquidate under the exponential kernel
//! x0: 1
//! xT: 0
//! T: 4
//! kernel: exponential
//! beta: 2
//! lambda: 0
//! eta: 1
//! s0: 1
//! sigma: 1
//! adv: 1
//! ```
//!
//! Required keys: `x0 xT T kernel lambda eta s0 sigma adv`, plus `beta` for
//! the exponential kernel. Optional keys and defaults:
//!
//! | key | default | meaning |
//! |---|---|---|
//! | `drift` | `zero` | `zero`, `constant` (`alpha0`, optional `t1`) or `exp_decay` (`alpha0`, `gamma`) |
//! | `n_cells` | 2000 | grid cells for sampling and the oracle |
//! | `n_paths` | 100000 | Monte Carlo paths |
//! | `seed` | 42 | Monte Carlo seed |
//! | `dt` | `T/1000` | Monte Carlo step, must divide `T` |
//! | `schedule` | `optimal` | schedule to simulate: `optimal` or `linear` |
//! | `sweep` | none | swept parameter: `beta`, `lambda`, `T` or `alpha0` |
//! | `sweep_values` | none | comma-separated values of the swept parameter |

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{DriftSpec, ExecutionProblem, KernelSpec, MarketParams};
use crate::montecarlo::SimulationSetup;

pub const DEFAULT_CELLS: usize = 2000;
pub const DEFAULT_PATHS: usize = 100_000;
pub const DEFAULT_SEED: u64 = 42;
pub const MIN_CELLS: usize = 8;

const KEYS: &[&str] = &[
    "x0",
    "xT",
    "T",
    "kernel",
    "beta",
    "lambda",
    "eta",
    "s0",
    "sigma",
    "adv",
    "drift",
    "alpha0",
    "gamma",
    "t1",
    "n_cells",
    "n_paths",
    "seed",
    "dt",
    "schedule",
    "sweep",
    "sweep_values",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Schedule {
    Optimal,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SweepParam {
    #[serde(rename = "beta")]
    Beta,
    #[serde(rename = "lambda")]
    Lambda,
    #[serde(rename = "T")]
    Horizon,
    #[serde(rename = "alpha0")]
    Alpha0,
}

impl SweepParam {
    pub fn key(&self) -> &'static str {
        match self {
            SweepParam::Beta => "beta",
            SweepParam::Lambda => "lambda",
            SweepParam::Horizon => "T",
            SweepParam::Alpha0 => "alpha0",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sweep {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

/// Validated configuration. Market fields follow the simulator's looser
/// invariants (zero volatility and zero impact allowed); solver commands
/// build an [`ExecutionProblem`], which requires them to be positive.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub x0: f64,
    pub x_t: f64,
    pub horizon: f64,
    pub kernel: KernelSpec,
    pub lambda: f64,
    pub market: MarketParams,
    pub drift: DriftSpec,
    pub n_cells: usize,
    pub n_paths: usize,
    pub seed: u64,
    pub dt: f64,
    pub schedule: Schedule,
    pub sweep: Option<Sweep>,
}

impl RunConfig {
    pub fn problem(&self) -> Result<ExecutionProblem> {
        ExecutionProblem::new(
            self.x0,
            self.x_t,
            self.horizon,
            self.market,
            self.drift,
            self.kernel,
            self.lambda,
        )
    }

    pub fn simulation_setup(&self) -> Result<SimulationSetup> {
        let m = &self.market;
        SimulationSetup::new(
            m.s0,
            m.sigma,
            m.eta * m.sigma / (m.adv * m.s0),
            self.drift,
            self.kernel,
        )
    }

    /// Copy with one swept parameter replaced.
    pub fn with_param(&self, param: SweepParam, value: f64) -> Result<Self> {
        let mut out = self.clone();
        out.sweep = None;
        match param {
            SweepParam::Beta => out.kernel = KernelSpec::Exponential { beta: value },
            SweepParam::Lambda => out.lambda = value,
            SweepParam::Horizon => {
                out.horizon = value;
                out.dt = value / 1000.0;
            }
            SweepParam::Alpha0 => {
                out.drift = match out.drift {
                    DriftSpec::Zero => DriftSpec::ConstantLocal {
                        alpha0: value,
                        t1: f64::INFINITY,
                    },
                    DriftSpec::ConstantLocal { t1, .. } => {
                        DriftSpec::ConstantLocal { alpha0: value, t1 }
                    }
                    DriftSpec::ExpDecay { gamma, .. } => DriftSpec::ExpDecay {
                        alpha0: value,
                        gamma,
                    },
                }
            }
        }
        out.validate()?;
        Ok(out)
    }

    pub fn set_cells(&mut self, n: usize) -> Result<()> {
        self.n_cells = n;
        self.validate()
    }

    pub fn set_paths(&mut self, n: usize) -> Result<()> {
        self.n_paths = n;
        self.validate()
    }

    fn validate(&self) -> Result<()> {
        finite("x0", self.x0)?;
        finite("xT", self.x_t)?;
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return Err(Error::invalid("T", "horizon must be positive"));
        }
        self.kernel.validate()?;
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(Error::invalid(
                "lambda",
                format!("must be non-negative, got {}", self.lambda),
            ));
        }
        positive("s0", self.market.s0)?;
        positive("adv", self.market.adv)?;
        non_negative("sigma", self.market.sigma)?;
        non_negative("eta", self.market.eta)?;
        self.drift.validate()?;
        if self.n_cells < MIN_CELLS {
            return Err(Error::invalid(
                "n_cells",
                format!("need at least {MIN_CELLS} cells"),
            ));
        }
        if self.n_paths == 0 {
            return Err(Error::invalid("n_paths", "need at least one path"));
        }
        positive("dt", self.dt)?;
        let steps = (self.horizon / self.dt).round();
        if steps < 1.0 || (steps * self.dt - self.horizon).abs() > 1e-9 * self.horizon {
            return Err(Error::invalid("dt", "must divide the horizon T"));
        }
        if let Some(sweep) = &self.sweep {
            if sweep.param == SweepParam::Beta && self.kernel == KernelSpec::DiracDelta {
                return Err(Error::invalid(
                    "sweep",
                    "beta sweeps need the exponential kernel",
                ));
            }
        }
        Ok(())
    }
}

fn finite(field: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(field, format!("must be finite, got {v}")))
    }
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(field, format!("must be positive, got {v}")))
    }
}

fn non_negative(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(
            field,
            format!("must be non-negative, got {v}"),
        ))
    }
}

struct Entry {
    line: usize,
    value: String,
}

struct Document {
    entries: BTreeMap<String, Entry>,
}

impl Document {
    fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once(':').ok_or_else(|| Error::Parse {
                line,
                message: format!("expected `key: value`, got `{content}`"),
            })?;
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(Error::Parse {
                    line,
                    message: format!("unknown key `{key}`"),
                });
            }
            if value.is_empty() {
                return Err(Error::Parse {
                    line,
                    message: format!("missing value for `{key}`"),
                });
            }
            if entries.contains_key(key) {
                return Err(Error::Parse {
                    line,
                    message: format!("duplicate key `{key}`"),
                });
            }
            entries.insert(
                key.to_string(),
                Entry {
                    line,
                    value: value.to_string(),
                },
            );
        }
        Ok(Document { entries })
    }

    fn take(&mut self, key: &str) -> Option<Entry> {
        self.entries.remove(key)
    }

    fn required(&mut self, key: &str) -> Result<Entry> {
        self.take(key)
            .ok_or_else(|| Error::invalid(key, "required key is missing"))
    }

    fn number(&mut self, key: &str) -> Result<Option<f64>> {
        self.take(key).map(|e| parse_number(key, &e)).transpose()
    }

    fn required_number(&mut self, key: &str) -> Result<f64> {
        let e = self.required(key)?;
        parse_number(key, &e)
    }

    fn count(&mut self, key: &str) -> Result<Option<u64>> {
        self.take(key)
            .map(|e| {
                e.value.replace('_', "").parse::<u64>().or_else(|_| {
                    // Accept integral floats such as 1e5.
                    let v = parse_number(key, &e)?;
                    if v >= 0.0 && v.fract() == 0.0 && v <= u64::MAX as f64 {
                        Ok(v as u64)
                    } else {
                        Err(Error::Parse {
                            line: e.line,
                            message: format!(
                                "{key}: expected a non-negative integer, got `{}`",
                                e.value
                            ),
                        })
                    }
                })
            })
            .transpose()
    }

    /// Rejects keys that were present but never consumed.
    fn finish(self, context: &str) -> Result<()> {
        match self.entries.into_iter().next() {
            None => Ok(()),
            Some((key, e)) => Err(Error::Parse {
                line: e.line,
                message: format!("`{key}` does not apply {context}"),
            }),
        }
    }
}

fn parse_number(key: &str, e: &Entry) -> Result<f64> {
    let v = e.value.as_str();
    let parsed = match v {
        "inf" | "+inf" => Ok(f64::INFINITY),
        "-inf" => Ok(f64::NEG_INFINITY),
        _ => v.parse::<f64>(),
    };
    match parsed {
        Ok(x) if !x.is_nan() => Ok(x),
        _ => Err(Error::Parse {
            line: e.line,
            message: format!("{key}: expected a number, got `{v}`"),
        }),
    }
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut doc = Document::parse(text)?;

    let x0 = doc.required_number("x0")?;
    let x_t = doc.required_number("xT")?;
    let horizon = doc.required_number("T")?;
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::invalid("T", "horizon must be positive"));
    }
    let kernel_entry = doc.required("kernel")?;
    let kernel = match kernel_entry.value.as_str() {
        "delta" => KernelSpec::DiracDelta,
        "exponential" => KernelSpec::Exponential {
            beta: doc
                .number("beta")?
                .ok_or_else(|| Error::invalid("beta", "required by the exponential kernel"))?,
        },
        other => {
            return Err(Error::Parse {
                line: kernel_entry.line,
                message: format!("kernel: expected `delta` or `exponential`, got `{other}`"),
            })
        }
    };
    let lambda = doc.required_number("lambda")?;
    let market = MarketParams {
        eta: doc.required_number("eta")?,
        s0: doc.required_number("s0")?,
        sigma: doc.required_number("sigma")?,
        adv: doc.required_number("adv")?,
    };

    let drift = match doc.take("drift") {
        None => DriftSpec::Zero,
        Some(e) => match e.value.as_str() {
            "zero" => DriftSpec::Zero,
            "constant" => DriftSpec::ConstantLocal {
                alpha0: doc.required_number("alpha0")?,
                t1: doc.number("t1")?.unwrap_or(f64::INFINITY),
            },
            "exp_decay" => DriftSpec::ExpDecay {
                alpha0: doc.required_number("alpha0")?,
                gamma: doc.required_number("gamma")?,
            },
            other => {
                return Err(Error::Parse {
                    line: e.line,
                    message: format!(
                        "drift: expected `zero`, `constant` or `exp_decay`, got `{other}`"
                    ),
                })
            }
        },
    };

    let n_cells = doc.count("n_cells")?.map_or(DEFAULT_CELLS, |v| v as usize);
    let n_paths = doc.count("n_paths")?.map_or(DEFAULT_PATHS, |v| v as usize);
    let seed = doc.count("seed")?.unwrap_or(DEFAULT_SEED);
    let dt = doc.number("dt")?.unwrap_or(horizon / 1000.0);
    let schedule = match doc.take("schedule") {
        None => Schedule::Optimal,
        Some(e) => match e.value.as_str() {
            "optimal" => Schedule::Optimal,
            "linear" => Schedule::Linear,
            other => {
                return Err(Error::Parse {
                    line: e.line,
                    message: format!("schedule: expected `optimal` or `linear`, got `{other}`"),
                })
            }
        },
    };
    let sweep = match (doc.take("sweep"), doc.take("sweep_values")) {
        (None, None) => None,
        (Some(p), Some(v)) => {
            let param = match p.value.as_str() {
                "beta" => SweepParam::Beta,
                "lambda" => SweepParam::Lambda,
                "T" => SweepParam::Horizon,
                "alpha0" => SweepParam::Alpha0,
                other => {
                    return Err(Error::Parse {
                        line: p.line,
                        message: format!(
                            "sweep: expected `beta`, `lambda`, `T` or `alpha0`, got `{other}`"
                        ),
                    })
                }
            };
            let values = v
                .value
                .split(',')
                .map(|s| {
                    parse_number(
                        "sweep_values",
                        &Entry {
                            line: v.line,
                            value: s.trim().to_string(),
                        },
                    )
                })
                .collect::<Result<Vec<f64>>>()?;
            Some(Sweep { param, values })
        }
        (Some(_), None) => {
            return Err(Error::invalid(
                "sweep_values",
                "required when `sweep` is set",
            ))
        }
        (None, Some(_)) => {
            return Err(Error::invalid(
                "sweep",
                "required when `sweep_values` is set",
            ))
        }
    };

    doc.finish(&format!("to kernel `{}` with this drift", kernel.name()))?;

    let config = RunConfig {
        x0,
        x_t,
        horizon,
        kernel,
        lambda,
        market,
        drift,
        n_cells,
        n_paths,
        seed,
        dt,
        schedule,
        sweep,
    };
    config.validate()?;
    Ok(config)
}
