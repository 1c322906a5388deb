//! Flat JSON run configuration.
//!
//! Every key is optional; missing model keys fall back to the baseline and
//! missing jump keys to the defaults of the chosen law. Unknown keys, keys of
//! another jump law and keys that do not apply to the command are rejected.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::model::{
    DoubleExponential, GaussianExponential, JumpSpec, Model, ModelParams, StripPolicy, SwapContract,
    TransformConvention,
};
use crate::montecarlo::{JumpCounting, SimConfig};
use crate::ode::OdeTolerance;
use crate::pricing::QuadratureConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Price,
    Sweep,
    Mc,
    PowerVar,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Price => "price",
            Command::Sweep => "sweep",
            Command::Mc => "mc",
            Command::PowerVar => "powervar",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct RunConfig {
    pub r: Option<f64>,
    pub d: Option<f64>,
    #[serde(rename = "V0")]
    pub v0: Option<f64>,
    pub lambda0: Option<f64>,
    #[serde(rename = "kappaV")]
    pub kappa_v: Option<f64>,
    #[serde(rename = "thetaV")]
    pub theta_v: Option<f64>,
    #[serde(rename = "sigmaV")]
    pub sigma_v: Option<f64>,
    #[serde(rename = "kappaL")]
    pub kappa_l: Option<f64>,
    #[serde(rename = "thetaL")]
    pub theta_l: Option<f64>,
    #[serde(rename = "sigmaL")]
    pub sigma_l: Option<f64>,
    pub rho: Option<f64>,

    /// `none`, `doubleExponential` or `gaussianExponential`.
    pub jump_law: Option<String>,
    pub p: Option<f64>,
    pub eta1: Option<f64>,
    pub eta2: Option<f64>,
    pub p_prime: Option<f64>,
    pub eta3: Option<f64>,
    pub eta4: Option<f64>,
    pub nu: Option<f64>,
    pub delta: Option<f64>,
    #[serde(rename = "rhoJ")]
    pub rho_j: Option<f64>,
    pub eta: Option<f64>,
    pub moment_power_transform: Option<bool>,
    /// `strict` or `continuation`.
    pub admissibility: Option<String>,

    #[serde(rename = "T")]
    pub tenor: Option<f64>,
    #[serde(rename = "N")]
    pub intervals: Option<usize>,
    pub notional: Option<f64>,
    pub vol_points_scale: Option<f64>,

    pub omega_max: Option<f64>,
    pub quad_tolerance: Option<f64>,
    pub s_substitution: Option<bool>,
    pub time_nodes: Option<usize>,
    pub ode_rtol: Option<f64>,
    pub ode_atol: Option<f64>,

    pub paths: Option<usize>,
    pub steps_per_interval: Option<usize>,
    pub seed: Option<u64>,
    pub antithetic: Option<bool>,
    /// `poisson` or `bernoulli`.
    pub jump_counting: Option<String>,
    pub linear_price_jump: Option<bool>,

    pub continuous: Option<bool>,
    pub monte_carlo: Option<bool>,
    pub sweep_axis: Option<String>,
    pub sweep_grid: Option<Vec<f64>>,
    pub sweep_axis2: Option<String>,
    pub sweep_grid2: Option<Vec<f64>>,
    pub power_orders: Option<Vec<f64>>,
    /// Number of x4 refinements of `stepsPerInterval` in `powervar`.
    pub power_refinements: Option<usize>,
    /// Per-path CSV dump written by `mc`.
    pub path_summary: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

/// Parameters a sweep may vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    P,
    PPrime,
    Eta1,
    Eta2,
    Eta3,
    Eta4,
    KappaL,
    ThetaL,
    SigmaL,
    Intervals,
    Tenor,
}

impl SweepAxis {
    const ALL: [(&'static str, SweepAxis); 11] = [
        ("p", SweepAxis::P),
        ("pPrime", SweepAxis::PPrime),
        ("eta1", SweepAxis::Eta1),
        ("eta2", SweepAxis::Eta2),
        ("eta3", SweepAxis::Eta3),
        ("eta4", SweepAxis::Eta4),
        ("kappaL", SweepAxis::KappaL),
        ("thetaL", SweepAxis::ThetaL),
        ("sigmaL", SweepAxis::SigmaL),
        ("N", SweepAxis::Intervals),
        ("T", SweepAxis::Tenor),
    ];

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .find(|(key, _)| *key == name)
            .map(|(_, axis)| *axis)
            .ok_or_else(|| {
                let known: Vec<&str> = Self::ALL.iter().map(|(k, _)| *k).collect();
                Error::Config(format!("unknown sweep axis `{name}` (expected one of {})", known.join(", ")))
            })
    }

    pub fn key(self) -> &'static str {
        Self::ALL.iter().find(|(_, a)| *a == self).map(|(k, _)| *k).unwrap_or("?")
    }

    fn is_jump_axis(self) -> bool {
        matches!(
            self,
            SweepAxis::P | SweepAxis::PPrime | SweepAxis::Eta1 | SweepAxis::Eta2 | SweepAxis::Eta3 | SweepAxis::Eta4
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub axis: SweepAxis,
    pub grid: Vec<f64>,
    pub second: Option<(SweepAxis, Vec<f64>)>,
}

/// A fully resolved configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Resolved {
    pub params: ModelParams,
    pub jumps: JumpSpec,
    pub convention: TransformConvention,
    pub strip: StripPolicy,
    pub contract: SwapContract,
    pub quad: QuadratureConfig,
    pub sim: SimConfig,
    pub continuous: bool,
    pub monte_carlo: bool,
    pub sweep: Option<Sweep>,
    pub power_orders: Vec<f64>,
    pub power_refinements: usize,
    pub path_summary: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

impl Resolved {
    pub fn model(&self) -> Result<Model> {
        Model::with_options(self.params, self.jumps, self.convention, self.strip)
    }

    /// Copy with one sweep coordinate applied.
    pub fn with_axis(&self, axis: SweepAxis, value: f64) -> Result<Resolved> {
        let mut out = self.clone();
        if axis.is_jump_axis() {
            match &mut out.jumps {
                JumpSpec::DoubleExponential(de) => {
                    let slot = match axis {
                        SweepAxis::P => &mut de.p,
                        SweepAxis::PPrime => &mut de.p_prime,
                        SweepAxis::Eta1 => &mut de.eta1,
                        SweepAxis::Eta2 => &mut de.eta2,
                        SweepAxis::Eta3 => &mut de.eta3,
                        _ => &mut de.eta4,
                    };
                    *slot = value;
                }
                _ => {
                    return Err(Error::Config(format!(
                        "sweep axis `{}` needs jumpLaw = doubleExponential",
                        axis.key()
                    )))
                }
            }
            return Ok(out);
        }
        match axis {
            SweepAxis::KappaL => out.params.kappa_l = value,
            SweepAxis::ThetaL => out.params.theta_l = value,
            SweepAxis::SigmaL => out.params.sigma_l = value,
            SweepAxis::Tenor => out.contract.tenor = value,
            SweepAxis::Intervals => {
                if !(value >= 1.0 && value.fract() == 0.0) {
                    return Err(Error::invalid("N", format!("sweep value {value} is not a positive integer")));
                }
                out.contract.intervals = value as usize;
            }
            _ => unreachable!("jump axes handled above"),
        }
        Ok(out)
    }
}

fn present<T>(value: &Option<T>, key: &str, keys: &mut Vec<String>) {
    if value.is_some() {
        keys.push(key.to_string());
    }
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(format!("malformed config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    fn double_exponential_keys(&self) -> Vec<String> {
        let mut keys = Vec::new();
        present(&self.p, "p", &mut keys);
        present(&self.eta1, "eta1", &mut keys);
        present(&self.eta2, "eta2", &mut keys);
        present(&self.p_prime, "pPrime", &mut keys);
        present(&self.eta3, "eta3", &mut keys);
        present(&self.eta4, "eta4", &mut keys);
        present(&self.moment_power_transform, "momentPowerTransform", &mut keys);
        keys
    }

    fn gaussian_exponential_keys(&self) -> Vec<String> {
        let mut keys = Vec::new();
        present(&self.nu, "nu", &mut keys);
        present(&self.delta, "delta", &mut keys);
        present(&self.rho_j, "rhoJ", &mut keys);
        present(&self.eta, "eta", &mut keys);
        keys
    }

    fn reject(keys: Vec<String>, context: &str) -> Result<()> {
        if keys.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(format!("key(s) {} not allowed {context}", keys.join(", "))))
        }
    }

    fn jumps(&self) -> Result<JumpSpec> {
        let law = self.jump_law.as_deref().unwrap_or("none");
        match law {
            "none" => {
                let mut keys = self.double_exponential_keys();
                keys.extend(self.gaussian_exponential_keys());
                Self::reject(keys, "with jumpLaw = none")?;
                Ok(JumpSpec::None)
            }
            "doubleExponential" => {
                Self::reject(self.gaussian_exponential_keys(), "with jumpLaw = doubleExponential")?;
                let d = DoubleExponential::default();
                Ok(JumpSpec::DoubleExponential(DoubleExponential {
                    p: self.p.unwrap_or(d.p),
                    eta1: self.eta1.unwrap_or(d.eta1),
                    eta2: self.eta2.unwrap_or(d.eta2),
                    p_prime: self.p_prime.unwrap_or(d.p_prime),
                    eta3: self.eta3.unwrap_or(d.eta3),
                    eta4: self.eta4.unwrap_or(d.eta4),
                }))
            }
            "gaussianExponential" => {
                Self::reject(self.double_exponential_keys(), "with jumpLaw = gaussianExponential")?;
                let g = GaussianExponential::default();
                Ok(JumpSpec::GaussianExponential(GaussianExponential {
                    nu: self.nu.unwrap_or(g.nu),
                    delta: self.delta.unwrap_or(g.delta),
                    rho_j: self.rho_j.unwrap_or(g.rho_j),
                    eta: self.eta.unwrap_or(g.eta),
                }))
            }
            other => Err(Error::Config(format!(
                "unknown jumpLaw `{other}` (expected none, doubleExponential or gaussianExponential)"
            ))),
        }
    }

    fn check_command_keys(&self, command: Command) -> Result<()> {
        let mut keys = Vec::new();
        let context = format!("for command `{}`", command.name());
        if command != Command::Sweep {
            present(&self.sweep_axis, "sweepAxis", &mut keys);
            present(&self.sweep_grid, "sweepGrid", &mut keys);
            present(&self.sweep_axis2, "sweepAxis2", &mut keys);
            present(&self.sweep_grid2, "sweepGrid2", &mut keys);
        }
        if command != Command::PowerVar {
            present(&self.power_orders, "powerOrders", &mut keys);
            present(&self.power_refinements, "powerRefinements", &mut keys);
        }
        if command != Command::Mc {
            present(&self.path_summary, "pathSummary", &mut keys);
        }
        if matches!(command, Command::Mc | Command::PowerVar) {
            present(&self.continuous, "continuous", &mut keys);
            present(&self.monte_carlo, "monteCarlo", &mut keys);
        }
        Self::reject(keys, &context)
    }

    fn sweep(&self) -> Result<Option<Sweep>> {
        let axis = self
            .sweep_axis
            .as_deref()
            .ok_or_else(|| Error::Config("command `sweep` needs sweepAxis".into()))?;
        let grid = self
            .sweep_grid
            .clone()
            .filter(|g| !g.is_empty())
            .ok_or_else(|| Error::Config("command `sweep` needs a non-empty sweepGrid".into()))?;
        let second = match (&self.sweep_axis2, &self.sweep_grid2) {
            (None, None) => None,
            (Some(a), Some(g)) if !g.is_empty() => Some((SweepAxis::parse(a)?, g.clone())),
            _ => return Err(Error::Config("sweepAxis2 and a non-empty sweepGrid2 go together".into())),
        };
        let axis = SweepAxis::parse(axis)?;
        if let Some((a2, _)) = &second {
            if *a2 == axis {
                return Err(Error::Config("sweepAxis2 must differ from sweepAxis".into()));
            }
        }
        Ok(Some(Sweep { axis, grid, second }))
    }

    /// Resolves defaults and checks that the keys fit `command`.
    pub fn resolve(&self, command: Command) -> Result<Resolved> {
        self.check_command_keys(command)?;
        let base = ModelParams::baseline();
        let params = ModelParams {
            r: self.r.unwrap_or(base.r),
            d: self.d.unwrap_or(base.d),
            v0: self.v0.unwrap_or(base.v0),
            lambda0: self.lambda0.unwrap_or(base.lambda0),
            kappa_v: self.kappa_v.unwrap_or(base.kappa_v),
            theta_v: self.theta_v.unwrap_or(base.theta_v),
            sigma_v: self.sigma_v.unwrap_or(base.sigma_v),
            kappa_l: self.kappa_l.unwrap_or(base.kappa_l),
            theta_l: self.theta_l.unwrap_or(base.theta_l),
            sigma_l: self.sigma_l.unwrap_or(base.sigma_l),
            rho: self.rho.unwrap_or(base.rho),
        };
        let jumps = self.jumps()?;
        let convention = if self.moment_power_transform.unwrap_or(false) {
            TransformConvention::MomentPower
        } else {
            TransformConvention::Standard
        };
        let strip = match self.admissibility.as_deref().unwrap_or("strict") {
            "strict" => StripPolicy::Strict,
            "continuation" => StripPolicy::Continuation,
            other => {
                return Err(Error::Config(format!(
                    "unknown admissibility `{other}` (expected strict or continuation)"
                )))
            }
        };

        let mut contract = SwapContract::new(self.tenor.unwrap_or(1.0), self.intervals.unwrap_or(252))?;
        contract.notional = self.notional.unwrap_or(contract.notional);
        contract.vol_points_scale = self.vol_points_scale.unwrap_or(contract.vol_points_scale);
        contract.validate()?;

        let qd = QuadratureConfig::default();
        let quad = QuadratureConfig {
            omega_max: self.omega_max.unwrap_or(qd.omega_max),
            omega_cap: qd.omega_cap.max(self.omega_max.unwrap_or(0.0)),
            rel_tol: self.quad_tolerance.unwrap_or(qd.rel_tol),
            s_substitution: self.s_substitution.unwrap_or(qd.s_substitution),
            time_nodes: self.time_nodes.unwrap_or(qd.time_nodes),
            ode: OdeTolerance {
                rtol: self.ode_rtol.unwrap_or(qd.ode.rtol),
                atol: self.ode_atol.unwrap_or(qd.ode.atol),
            },
            ..qd
        };
        quad.validate()?;

        let sd = SimConfig::default();
        let sim = SimConfig {
            paths: self.paths.unwrap_or(sd.paths),
            steps_per_interval: self.steps_per_interval.unwrap_or(sd.steps_per_interval),
            seed: self.seed.unwrap_or(sd.seed),
            antithetic: self.antithetic.unwrap_or(sd.antithetic),
            jump_counting: match self.jump_counting.as_deref().unwrap_or("poisson") {
                "poisson" => JumpCounting::Poisson,
                "bernoulli" => JumpCounting::Bernoulli,
                other => {
                    return Err(Error::Config(format!(
                        "unknown jumpCounting `{other}` (expected poisson or bernoulli)"
                    )))
                }
            },
            linear_price_jump: self.linear_price_jump.unwrap_or(sd.linear_price_jump),
        };
        sim.validate()?;

        let sweep = if command == Command::Sweep { self.sweep()? } else { None };
        let power_orders = self.power_orders.clone().unwrap_or_else(|| vec![0.5, 1.0, 1.5]);
        if let Some(u) = power_orders.iter().find(|u| !(**u > 0.0 && **u < 2.0)) {
            return Err(Error::invalid("powerOrders", format!("order {u} is outside (0, 2)")));
        }

        let resolved = Resolved {
            params,
            jumps,
            convention,
            strip,
            contract,
            quad,
            sim,
            continuous: self.continuous.unwrap_or(command == Command::Price),
            monte_carlo: self.monte_carlo.unwrap_or(false),
            sweep,
            power_orders,
            power_refinements: self.power_refinements.unwrap_or(2),
            path_summary: self.path_summary.clone(),
            output: self.output.clone(),
        };
        // Surface parameter errors before any work starts.
        resolved.model()?;
        Ok(resolved)
    }
}
