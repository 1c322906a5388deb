//! Full-truncation Euler simulation of `(X, V, lambda)` with Cox-driven jumps,
//! realized-volatility estimators and realized power variation.
//!
//! Every path draws from its own ChaCha8 stream (`seed`, stream = path index,
//! or pair index under antithetic sampling), so results do not depend on how
//! paths are scheduled across threads.

use std::f64::consts::PI;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use rayon::prelude::*;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::model::{JumpSpec, Model, SwapContract};
use crate::numerics::{mean_and_standard_error, CompensatedSum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum JumpCounting {
    /// Poisson number of jumps with mean `lambda+ h` per substep.
    #[default]
    Poisson,
    /// At most one jump per substep, with probability `min(lambda+ h, 1)`.
    Bernoulli,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub paths: usize,
    pub steps_per_interval: usize,
    pub seed: u64,
    pub antithetic: bool,
    pub jump_counting: JumpCounting,
    /// Add `e^{J} - 1` to the log-price at a jump instead of `J`.
    pub linear_price_jump: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            paths: 10_000,
            steps_per_interval: 10,
            seed: 20_240_601,
            antithetic: false,
            jump_counting: JumpCounting::Poisson,
            linear_price_jump: false,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.paths == 0 {
            return Err(Error::Config("paths must be >= 1".into()));
        }
        if self.steps_per_interval == 0 {
            return Err(Error::Config("stepsPerInterval must be >= 1".into()));
        }
        if self.antithetic && self.paths % 2 == 1 {
            return Err(Error::Config("antithetic sampling needs an even number of paths".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpEvent {
    /// Start of the substep in which the jump occurred.
    pub time: f64,
    /// Log-price jump size `J^S`.
    pub price: f64,
    /// Variance jump size `J^V`.
    pub variance: f64,
}

/// Borrowed view of one simulated path. Arrays are indexed by substep,
/// from `t = 0` to `t = T` inclusive.
#[derive(Debug, Clone, Copy)]
pub struct PathView<'a> {
    pub path_id: u64,
    /// RNG stream the path was drawn from.
    pub stream: u64,
    /// Second member of an antithetic pair (normals negated).
    pub mirrored: bool,
    pub substep: f64,
    pub steps_per_interval: usize,
    pub log_prices: &'a [f64],
    /// Positive part of the variance state.
    pub variance: &'a [f64],
    /// Positive part of the intensity state.
    pub intensity: &'a [f64],
    pub jumps: &'a [JumpEvent],
}

impl PathView<'_> {
    pub fn intervals(&self) -> usize {
        (self.log_prices.len() - 1) / self.steps_per_interval
    }

    /// `X` at the sampling dates `t_0 .. t_N`.
    pub fn sampled_log_prices(&self) -> impl Iterator<Item = f64> + '_ {
        self.log_prices.iter().copied().step_by(self.steps_per_interval)
    }

    /// Simple returns `S_{t_i}/S_{t_{i-1}} - 1` between sampling dates.
    pub fn simple_returns(&self) -> impl Iterator<Item = f64> + '_ {
        let k = self.steps_per_interval;
        (1..=self.intervals()).map(move |i| (self.log_prices[i * k] - self.log_prices[(i - 1) * k]).exp_m1())
    }

    pub fn terminal_log_price(&self) -> f64 {
        *self.log_prices.last().expect("non-empty path")
    }

    pub fn terminal_variance(&self) -> f64 {
        *self.variance.last().expect("non-empty path")
    }

    pub fn terminal_intensity(&self) -> f64 {
        *self.intensity.last().expect("non-empty path")
    }

    pub fn jump_count(&self) -> usize {
        self.jumps.len()
    }

    /// Trapezoidal `int_0^T V_t^{power} dt` on the substep grid.
    pub fn integrated_variance_power(&self, power: f64) -> f64 {
        let raise = |v: f64| match power {
            0.5 => v.sqrt(),
            1.0 => v,
            _ => v.powf(power),
        };
        let n = self.variance.len() - 1;
        let mut acc: CompensatedSum = self.variance[1..n].iter().map(|&v| raise(v)).collect();
        acc.add(0.5 * (raise(self.variance[0]) + raise(self.variance[n])));
        self.substep * acc.value()
    }

    /// Time average of `sqrt(V_t)` over `[0, T]`.
    pub fn average_volatility(&self) -> f64 {
        let tenor = self.substep * (self.variance.len() - 1) as f64;
        self.integrated_variance_power(0.5) / tenor
    }
}

/// Owned copy of a path, as stored in a [`PathBatch`].
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedPath {
    pub path_id: u64,
    pub stream: u64,
    pub mirrored: bool,
    pub log_prices: Vec<f64>,
    pub variance: Vec<f64>,
    pub intensity: Vec<f64>,
    pub jumps: Vec<JumpEvent>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathBatch {
    pub seed: u64,
    pub substep: f64,
    pub steps_per_interval: usize,
    pub antithetic: bool,
    pub paths: Vec<SimulatedPath>,
}

impl PathBatch {
    pub fn views(&self) -> impl Iterator<Item = PathView<'_>> + '_ {
        self.paths.iter().map(|p| PathView {
            path_id: p.path_id,
            stream: p.stream,
            mirrored: p.mirrored,
            substep: self.substep,
            steps_per_interval: self.steps_per_interval,
            log_prices: &p.log_prices,
            variance: &p.variance,
            intensity: &p.intensity,
            jumps: &p.jumps,
        })
    }

    /// One row per path: `path_id,RV,RV*,terminal_X,jumps`.
    pub fn write_summary_csv<W: Write>(&self, contract: &SwapContract, out: W) -> Result<()> {
        let rows: Vec<PathSummary> = self.views().map(|v| PathSummary::from_view(&v, contract)).collect();
        write_path_summaries(&rows, out)
    }
}

/// Per-path diagnostics for the CSV dump.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathSummary {
    pub path_id: u64,
    pub rv: f64,
    pub rv_star: f64,
    pub terminal_log_price: f64,
    pub jumps: usize,
}

impl PathSummary {
    pub fn from_view(view: &PathView, contract: &SwapContract) -> Self {
        let returns: Vec<f64> = view.simple_returns().collect();
        PathSummary {
            path_id: view.path_id,
            rv: realized_volatility(&returns, contract),
            rv_star: realized_volatility_star(&returns, contract),
            terminal_log_price: view.terminal_log_price(),
            jumps: view.jump_count(),
        }
    }
}

pub fn write_path_summaries<W: Write>(rows: &[PathSummary], out: W) -> Result<()> {
    let io = |e: csv::Error| Error::Config(format!("cannot write path summary: {e}"));
    let mut writer = csv::Writer::from_writer(out);
    writer.write_record(["path_id", "RV", "RV*", "terminal_X", "jumps"]).map_err(io)?;
    for row in rows {
        writer
            .write_record([
                row.path_id.to_string(),
                format!("{:.9e}", row.rv),
                format!("{:.9e}", row.rv_star),
                format!("{:.9e}", row.terminal_log_price),
                row.jumps.to_string(),
            ])
            .map_err(io)?;
    }
    writer.flush().map_err(|e| Error::Config(format!("cannot write path summary: {e}")))
}

/// Draws `(J^S, J^V)` for one jump.
fn draw_jump<R: Rng>(spec: &JumpSpec, rng: &mut R) -> (f64, f64) {
    fn two_sided<R: Rng>(rng: &mut R, up: f64, up_rate: f64, down_rate: f64) -> f64 {
        let u: f64 = rng.random();
        let e: f64 = rng.sample(Exp1);
        if u < up {
            e / up_rate
        } else {
            -e / down_rate
        }
    }
    match spec {
        JumpSpec::None => (0.0, 0.0),
        JumpSpec::DoubleExponential(de) => {
            let price = two_sided(rng, de.p, de.eta1, de.eta2);
            let variance = two_sided(rng, de.p_prime, de.eta3, de.eta4);
            (price, variance)
        }
        JumpSpec::GaussianExponential(ge) => {
            let variance = ge.eta * rng.sample::<f64, _>(Exp1);
            let z: f64 = rng.sample(StandardNormal);
            (ge.nu + ge.rho_j * variance + ge.delta * z, variance)
        }
    }
}

/// Per-thread scratch buffers.
struct Workspace {
    log_prices: Vec<f64>,
    variance: Vec<f64>,
    intensity: Vec<f64>,
    jumps: Vec<JumpEvent>,
}

impl Workspace {
    fn new(len: usize) -> Self {
        Workspace {
            log_prices: vec![0.0; len],
            variance: vec![0.0; len],
            intensity: vec![0.0; len],
            jumps: Vec::new(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Simulator<'a> {
    model: &'a Model,
    contract: SwapContract,
    config: SimConfig,
}

impl<'a> Simulator<'a> {
    pub fn new(model: &'a Model, contract: SwapContract, config: SimConfig) -> Result<Self> {
        contract.validate()?;
        config.validate()?;
        let steps = contract
            .intervals
            .checked_mul(config.steps_per_interval)
            .filter(|s| *s < 1 << 28)
            .ok_or_else(|| Error::Config("intervals x stepsPerInterval is too large".into()))?;
        debug_assert!(steps > 0);
        Ok(Simulator {
            model,
            contract,
            config,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn contract(&self) -> &SwapContract {
        &self.contract
    }

    pub fn substep(&self) -> f64 {
        self.contract.dt() / self.config.steps_per_interval as f64
    }

    fn total_steps(&self) -> usize {
        self.contract.intervals * self.config.steps_per_interval
    }

    /// Applies `f` to every path and returns the results in path order.
    pub fn map_paths<T, F>(&self, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(&PathView) -> T + Sync + Send,
    {
        let len = self.total_steps() + 1;
        (0..self.config.paths as u64)
            .into_par_iter()
            .map_init(
                || Workspace::new(len),
                |ws, id| {
                    let (stream, mirrored) = self.stream_of(id);
                    self.fill_path(ws, stream, mirrored);
                    f(&PathView {
                        path_id: id,
                        stream,
                        mirrored,
                        substep: self.substep(),
                        steps_per_interval: self.config.steps_per_interval,
                        log_prices: &ws.log_prices,
                        variance: &ws.variance,
                        intensity: &ws.intensity,
                        jumps: &ws.jumps,
                    })
                },
            )
            .collect()
    }

    /// Materializes every path. Memory grows with `paths x steps`; prefer
    /// [`Simulator::map_paths`] for large runs.
    pub fn simulate(&self) -> PathBatch {
        let paths = self.map_paths(|view| SimulatedPath {
            path_id: view.path_id,
            stream: view.stream,
            mirrored: view.mirrored,
            log_prices: view.log_prices.to_vec(),
            variance: view.variance.to_vec(),
            intensity: view.intensity.to_vec(),
            jumps: view.jumps.to_vec(),
        });
        PathBatch {
            seed: self.config.seed,
            substep: self.substep(),
            steps_per_interval: self.config.steps_per_interval,
            antithetic: self.config.antithetic,
            paths,
        }
    }

    fn stream_of(&self, id: u64) -> (u64, bool) {
        if self.config.antithetic {
            (id / 2, id % 2 == 1)
        } else {
            (id, false)
        }
    }

    fn fill_path(&self, ws: &mut Workspace, stream: u64, mirrored: bool) {
        let p = &self.model.params;
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        rng.set_stream(stream);
        let sign = if mirrored { -1.0 } else { 1.0 };
        let h = self.substep();
        let sqrt_h = h.sqrt();
        let rho_c = (1.0 - p.rho * p.rho).max(0.0).sqrt();
        let m = self.model.mean_price_jump();
        let has_jumps = self.model.jumps.has_jumps();
        let carry = p.r - p.d;

        let mut x = 0.0;
        let mut v = p.v0;
        let mut lam = p.lambda0;
        ws.jumps.clear();
        ws.log_prices[0] = x;
        ws.variance[0] = v;
        ws.intensity[0] = lam;
        for k in 1..ws.log_prices.len() {
            let vp = v.max(0.0);
            let lp = lam.max(0.0);
            let z1: f64 = sign * rng.sample::<f64, _>(StandardNormal);
            let z2: f64 = sign * rng.sample::<f64, _>(StandardNormal);
            let z3: f64 = sign * rng.sample::<f64, _>(StandardNormal);
            let sv = vp.sqrt() * sqrt_h;
            x += (carry - lp * m - 0.5 * vp) * h + sv * z1;
            v += p.kappa_v * (p.theta_v - vp) * h + p.sigma_v * sv * (p.rho * z1 + rho_c * z2);
            lam += p.kappa_l * (p.theta_l - lp) * h + p.sigma_l * (lp * h).sqrt() * z3;
            if has_jumps {
                let count = self.jump_count(&mut rng, lp * h);
                for _ in 0..count {
                    let (js, jv) = draw_jump(&self.model.jumps, &mut rng);
                    x += if self.config.linear_price_jump { js.exp_m1() } else { js };
                    v += jv;
                    ws.jumps.push(JumpEvent {
                        time: (k - 1) as f64 * h,
                        price: js,
                        variance: jv,
                    });
                }
            }
            ws.log_prices[k] = x;
            ws.variance[k] = v.max(0.0);
            ws.intensity[k] = lam.max(0.0);
        }
    }

    fn jump_count<R: Rng>(&self, rng: &mut R, mean: f64) -> u32 {
        let u: f64 = rng.random();
        match self.config.jump_counting {
            JumpCounting::Bernoulli => u32::from(u < mean),
            // 1 - mean <= e^{-mean}: no jump, without evaluating the exponential
            JumpCounting::Poisson if u <= 1.0 - mean => 0,
            JumpCounting::Poisson => {
                let mut prob = (-mean).exp();
                let mut cdf = prob;
                let mut k = 0;
                while u > cdf && k < 10_000 {
                    k += 1;
                    prob *= mean / k as f64;
                    cdf += prob;
                    if prob == 0.0 {
                        break;
                    }
                }
                k
            }
        }
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McStrike {
    pub estimate: f64,
    pub standard_error: f64,
    pub paths: usize,
}

impl McStrike {
    /// Under antithetic sampling consecutive pairs are averaged first, so the
    /// standard error reflects the pair correlation.
    pub fn from_samples(samples: &[f64], antithetic: bool) -> Self {
        let (estimate, standard_error) = if antithetic && samples.len() >= 2 {
            let pairs: Vec<f64> = samples.chunks_exact(2).map(|c| 0.5 * (c[0] + c[1])).collect();
            mean_and_standard_error(&pairs)
        } else {
            mean_and_standard_error(samples)
        };
        McStrike {
            estimate,
            standard_error,
            paths: samples.len(),
        }
    }

    /// `|estimate - reference| <= k * standard_error`.
    pub fn agrees_with(&self, reference: f64, k: f64) -> bool {
        (self.estimate - reference).abs() <= k * self.standard_error
    }
}

/// `sqrt(pi / (2 N T)) sum |R_i| * scale`.
pub fn realized_volatility(returns: &[f64], contract: &SwapContract) -> f64 {
    let n = returns.len() as f64;
    let sum: CompensatedSum = returns.iter().map(|r| r.abs()).collect();
    (PI / (2.0 * n * contract.tenor)).sqrt() * sum.value() * contract.vol_points_scale
}

/// `sqrt(sum R_i^2 / T) * scale`.
pub fn realized_volatility_star(returns: &[f64], contract: &SwapContract) -> f64 {
    let sum: CompensatedSum = returns.iter().map(|r| r * r).collect();
    (sum.value() / contract.tenor).sqrt() * contract.vol_points_scale
}

fn check_batch(batch: &PathBatch, contract: &SwapContract) -> Result<()> {
    if batch.paths.is_empty() {
        return Err(Error::Config("empty path batch".into()));
    }
    let expected = contract.intervals * batch.steps_per_interval + 1;
    if batch.paths.iter().any(|p| p.log_prices.len() != expected) {
        return Err(Error::Config(format!(
            "batch is not sampled on the contract grid ({} intervals)",
            contract.intervals
        )));
    }
    Ok(())
}

pub fn mc_strike_rv(batch: &PathBatch, contract: &SwapContract) -> Result<McStrike> {
    check_batch(batch, contract)?;
    let samples: Vec<f64> = batch
        .views()
        .map(|v| realized_volatility(&v.simple_returns().collect::<Vec<_>>(), contract))
        .collect();
    Ok(McStrike::from_samples(&samples, batch.antithetic))
}

pub fn mc_strike_rvstar(batch: &PathBatch, contract: &SwapContract) -> Result<McStrike> {
    check_batch(batch, contract)?;
    let samples: Vec<f64> = batch
        .views()
        .map(|v| realized_volatility_star(&v.simple_returns().collect::<Vec<_>>(), contract))
        .collect();
    Ok(McStrike::from_samples(&samples, batch.antithetic))
}

/// `E|Z|^u` for a standard normal `Z`: `2^{u/2} Gamma((u+1)/2) / Gamma(1/2)`.
pub fn mu_u(u: f64) -> f64 {
    2f64.powf(0.5 * u) * gamma(0.5 * (u + 1.0)) / PI.sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerVariation {
    /// `dt^{1 - u/2} sum |X_{t_i} - X_{t_{i-1}}|^u`.
    pub estimate: f64,
    /// `mu_u int_0^T V_s^{u/2} ds` from the same path.
    pub reference: f64,
}

impl PowerVariation {
    pub fn relative_error(&self) -> f64 {
        (self.estimate - self.reference).abs() / self.reference
    }
}

/// Realized power variation of order `u` over increments spanning `stride`
/// substeps, i.e. `dt = stride * substep`.
pub fn power_variation(path: &PathView, u: f64, stride: usize) -> Result<PowerVariation> {
    if !(u > 0.0 && u < 2.0) {
        return Err(Error::Domain(format!("power-variation order must lie in (0, 2), got {u}")));
    }
    if stride == 0 {
        return Err(Error::invalid("stride", "must be >= 1"));
    }
    let dt = stride as f64 * path.substep;
    let increments = (path.log_prices.len() - 1) / stride;
    let sum: CompensatedSum = (1..=increments)
        .map(|i| (path.log_prices[i * stride] - path.log_prices[(i - 1) * stride]).abs().powf(u))
        .collect();
    Ok(PowerVariation {
        estimate: dt.powf(1.0 - 0.5 * u) * sum.value(),
        reference: mu_u(u) * path.integrated_variance_power(0.5 * u),
    })
}
