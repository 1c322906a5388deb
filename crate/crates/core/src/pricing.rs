//! Fair volatility-swap strikes under discrete and continuous sampling.
//!
//! Discrete sampling uses, per interval,
//!
//! ```text
//! E|S_{t_i}/S_{t_{i-1}} - 1| = (2/pi) int_0^inf Re[(U(iu + 1) - U(iu)) / (iu)] du
//! ```
//!
//! where `U` is the transform of the log-return over `[t_{i-1}, t_i]`
//! seen from time zero. Continuous sampling uses
//! `sqrt(x) = (1 / (2 sqrt(pi))) int_0^inf (1 - e^{-s x}) s^{-3/2} ds` applied to
//! `V_t` and averaged over `[0, T]`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::mgf::{AffineSolver, FrequencyArgument};
use crate::model::{Model, SwapContract};
use crate::numerics::cexpm1;
use crate::ode::OdeTolerance;
use crate::quadrature::{integrate_vector, AdaptiveOptions, GaussLegendre};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    /// Initial truncation of the frequency integrals.
    pub omega_max: f64,
    /// Double the truncation until the last doubling contributes less than
    /// the tolerance; otherwise fail when the tail is too large.
    pub extend_omega: bool,
    /// Hard upper bound for the extended truncation.
    pub omega_cap: f64,
    /// Relative tolerance of the adaptive quadratures and of the tail.
    pub rel_tol: f64,
    /// Lower end of the frequency integrals (the integrand is 0/0 at zero).
    pub lower_limit: f64,
    /// Integrate the Laplace representation in `u = sqrt(s)`.
    pub s_substitution: bool,
    /// Gauss–Legendre nodes for the outer time integral of the continuous strike.
    pub time_nodes: usize,
    pub max_panels: usize,
    pub ode: OdeTolerance,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            omega_max: 200.0,
            extend_omega: true,
            omega_cap: 1e7,
            rel_tol: 1e-8,
            lower_limit: 1e-8,
            s_substitution: true,
            time_nodes: 64,
            max_panels: 4000,
            ode: OdeTolerance::default(),
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.omega_max > 0.0 && self.omega_max.is_finite()) {
            return Err(Error::invalid("omegaMax", "must be > 0"));
        }
        if !(self.omega_cap >= self.omega_max) {
            return Err(Error::invalid("omegaCap", "must be >= omegaMax"));
        }
        if !(self.rel_tol > 0.0) {
            return Err(Error::invalid("quadTolerance", "must be > 0"));
        }
        if !(self.lower_limit >= 0.0 && self.lower_limit < self.omega_max) {
            return Err(Error::invalid("lowerLimit", "must lie in [0, omegaMax)"));
        }
        if self.time_nodes == 0 {
            return Err(Error::invalid("timeNodes", "must be >= 1"));
        }
        if self.max_panels < 2 {
            return Err(Error::invalid("maxPanels", "must be >= 2"));
        }
        self.ode.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct StrikeDiagnostics {
    /// Size of the last truncation doubling, relative units of the strike.
    pub tail_estimate: f64,
    /// Estimated absolute quadrature error, same units as the strike.
    pub quadrature_error: f64,
    pub omega_max: f64,
    pub panels: usize,
    pub evaluations: usize,
    /// `E|S_{t_i}/S_{t_{i-1}} - 1|` per interval (discrete strike only).
    pub per_interval: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrikeResult {
    /// Fair strike in volatility points.
    pub strike: f64,
    pub diagnostics: StrikeDiagnostics,
}

#[derive(Debug, Clone, PartialEq)]
struct FrequencyIntegral {
    values: Vec<f64>,
    error: f64,
    tail: f64,
    omega_max: f64,
    panels: usize,
    evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
pub struct Pricer<'a> {
    model: &'a Model,
    quad: QuadratureConfig,
}

impl<'a> Pricer<'a> {
    pub fn new(model: &'a Model, quad: QuadratureConfig) -> Result<Self> {
        quad.validate()?;
        Ok(Pricer { model, quad })
    }

    pub fn config(&self) -> &QuadratureConfig {
        &self.quad
    }

    fn solver(&self) -> AffineSolver<'a> {
        AffineSolver::with_tolerance(self.model, self.quad.ode)
    }

    /// Integrates a vector integrand over `[lower_limit, inf)` by truncation,
    /// extending the truncation by doubling when allowed.
    fn frequency_integral<F>(&self, dim: usize, abs_tol: f64, mut f: F) -> Result<FrequencyIntegral>
    where
        F: FnMut(f64, &mut [f64]) -> Result<()>,
    {
        let q = &self.quad;
        let opts = AdaptiveOptions {
            rel_tol: q.rel_tol,
            abs_tol,
            max_panels: q.max_panels,
        };
        let head = integrate_vector(&mut f, q.lower_limit, q.omega_max, dim, opts)?;
        let mut values = head.values;
        let mut error = head.error;
        let mut panels = head.panels;
        let mut evaluations = head.evaluations;
        let mut upper = q.omega_max;
        loop {
            let total: f64 = values.iter().sum();
            let allowed = abs_tol.max(q.rel_tol * total.abs());
            let seg_opts = AdaptiveOptions {
                rel_tol: q.rel_tol,
                abs_tol: 0.25 * allowed,
                max_panels: q.max_panels,
            };
            let segment = integrate_vector(&mut f, upper, 2.0 * upper, dim, seg_opts)?;
            evaluations += segment.evaluations;
            let tail: f64 = segment.values.iter().map(|v| v.abs()).sum();
            if !q.extend_omega {
                if tail > allowed {
                    return Err(Error::Quadrature(format!(
                        "tail estimate {tail:e} beyond omegaMax = {upper} exceeds tolerance {allowed:e}"
                    )));
                }
                return Ok(FrequencyIntegral {
                    values,
                    error,
                    tail,
                    omega_max: upper,
                    panels,
                    evaluations,
                });
            }
            for (v, s) in values.iter_mut().zip(&segment.values) {
                *v += s;
            }
            error += segment.error;
            panels += segment.panels;
            upper *= 2.0;
            if tail <= allowed {
                return Ok(FrequencyIntegral {
                    values,
                    error,
                    tail,
                    omega_max: upper,
                    panels,
                    evaluations,
                });
            }
            if upper > q.omega_cap {
                return Err(Error::Quadrature(format!(
                    "frequency tail {tail:e} still above tolerance {allowed:e} at omega = {upper}"
                )));
            }
        }
    }

    /// `E|S_{t_i}/S_{t_{i-1}} - 1|` for the `i`-th interval of length `dt`.
    pub fn expected_abs_return(&self, i: usize, dt: f64) -> Result<f64> {
        check_interval(i, dt)?;
        let solver = self.solver();
        let integral = self.frequency_integral(1, 1e-15, |u, out| {
            let (z0, z1) = two_stage_pair(&solver, u, i, dt)?;
            out[0] = (z1.exp() - z0.exp()).im / u;
            Ok(())
        })?;
        Ok((2.0 / PI * integral.values[0]).max(0.0))
    }

    /// `P(X_{t_i} - X_{t_{i-1}} > 0)`.
    pub fn positive_return_probability(&self, i: usize, dt: f64) -> Result<f64> {
        check_interval(i, dt)?;
        let solver = self.solver();
        let integral = self.frequency_integral(1, 1e-14, |u, out| {
            let z = single_stage(&solver, Complex64::new(0.0, u), i, dt)?;
            out[0] = z.exp().im / u;
            Ok(())
        })?;
        Ok((0.5 + integral.values[0] / PI).clamp(0.0, 1.0))
    }

    /// Mass of `{Y > 0}` under the density `e^{Y - r dt} p(Y)`, i.e.
    /// `E[1{Y > 0} e^{Y - r dt}]`. The density has total mass `e^{-d dt}`,
    /// which replaces the usual `1/2` by half of that mass.
    pub fn tilted_positive_return_probability(&self, i: usize, dt: f64) -> Result<f64> {
        check_interval(i, dt)?;
        let solver = self.solver();
        let discount = (-self.model.params.r * dt).exp();
        let mass = discount * single_stage(&solver, Complex64::new(1.0, 0.0), i, dt)?.exp().re;
        let integral = self.frequency_integral(1, 1e-14, |u, out| {
            let z = single_stage(&solver, Complex64::new(1.0, u), i, dt)?;
            out[0] = discount * z.exp().im / u;
            Ok(())
        })?;
        Ok((0.5 * mass + integral.values[0] / PI).clamp(0.0, 1.0))
    }

    /// Fair strike of the volatility swap sampled at `N` equally spaced dates.
    ///
    /// All interval terms share one adaptive frequency partition: each node
    /// costs one two-stage trajectory per transform argument, and the
    /// per-interval integrals are reported in the diagnostics.
    pub fn discrete_strike(&self, contract: &SwapContract) -> Result<StrikeResult> {
        contract.validate()?;
        let n = contract.intervals;
        let dt = contract.dt();
        let solver = self.solver();
        let integral = self.frequency_integral(n, 1e-15, |u, out| {
            let z0 = solver.increment_log_cfs(Complex64::new(0.0, u), dt, n)?;
            let z1 = solver.increment_log_cfs(Complex64::new(1.0, u), dt, n)?;
            for k in 0..n {
                out[k] = (z1[k].exp() - z0[k].exp()).im / u;
            }
            Ok(())
        })?;
        let per_interval: Vec<f64> = integral.values.iter().map(|v| 2.0 / PI * v).collect();
        let scale = contract.rv_normalization() * contract.vol_points_scale;
        let strike = scale * per_interval.iter().sum::<f64>();
        Ok(StrikeResult {
            strike: strike.max(0.0),
            diagnostics: StrikeDiagnostics {
                tail_estimate: scale * 2.0 / PI * integral.tail,
                quadrature_error: scale * 2.0 / PI * integral.error,
                omega_max: integral.omega_max,
                panels: integral.panels,
                evaluations: integral.evaluations,
                per_interval,
            },
        })
    }

    /// Fair strike under continuous sampling, `E[(1/T) int_0^T sqrt(V_t) dt]`.
    pub fn continuous_strike(&self, contract: &SwapContract) -> Result<StrikeResult> {
        contract.validate()?;
        let p = &self.model.params;
        let tenor = contract.tenor;
        let rule = GaussLegendre::new(self.quad.time_nodes);
        let (times, weights) = rule.on_interval(0.0, tenor);
        let solver = self.solver();
        let scale = 1.0 / p.v0.max(p.theta_v).sqrt();

        // int_0^T (1 - E[e^{-s V_t}]) dt
        let time_average = |s: f64| -> Result<f64> {
            let q = FrequencyArgument::new(ZERO, Complex64::new(-s, 0.0), ZERO, ZERO);
            let coeffs = solver.solve_at(q, &times)?;
            Ok(coeffs
                .iter()
                .zip(&weights)
                .map(|(c, w)| -w * cexpm1(c.exponent(p.v0, p.lambda0)).re)
                .sum())
        };

        let opts = AdaptiveOptions {
            rel_tol: self.quad.rel_tol,
            abs_tol: 1e-15,
            max_panels: self.quad.max_panels,
        };
        // Map [0, inf) onto [0, 1) so the whole range is covered without truncation.
        let integral = if self.quad.s_substitution {
            // s = u^2, u = scale x / (1 - x): integrand 2 (1 - L) / (scale x^2)
            integrate_vector(
                |x, out| {
                    let u = scale * x / (1.0 - x);
                    out[0] = 2.0 * time_average(u * u)? / (scale * x * x);
                    Ok(())
                },
                0.0,
                1.0,
                1,
                opts,
            )?
        } else {
            // s = scale^2 y / (1 - y)^2: integrand (1 - L) (1 + y) / (scale y^{3/2}),
            // keeping the integrable y^{-1/2} singularity at the origin
            integrate_vector(
                |y, out| {
                    let w = 1.0 - y;
                    let s = scale * scale * y / (w * w);
                    out[0] = time_average(s)? * (1.0 + y) / (scale * y.powf(1.5));
                    Ok(())
                },
                0.0,
                1.0,
                1,
                opts,
            )?
        };
        let factor = contract.vol_points_scale / (2.0 * PI.sqrt() * tenor);
        Ok(StrikeResult {
            strike: (factor * integral.values[0]).max(0.0),
            diagnostics: StrikeDiagnostics {
                tail_estimate: 0.0,
                quadrature_error: factor * integral.error,
                omega_max: f64::INFINITY,
                panels: integral.panels,
                evaluations: integral.evaluations,
                per_interval: Vec::new(),
            },
        })
    }
}

fn check_interval(i: usize, dt: f64) -> Result<()> {
    if i == 0 {
        return Err(Error::invalid("i", "sampling index must be >= 1"));
    }
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::invalid("dt", format!("must be > 0, got {dt}")));
    }
    Ok(())
}

/// Log of the two-stage increment transform for one argument.
fn single_stage(solver: &AffineSolver, omega: Complex64, i: usize, dt: f64) -> Result<Complex64> {
    let p = &solver.model().params;
    let first = solver.solve(FrequencyArgument::log_price(omega), dt)?;
    if i == 1 {
        return Ok(first.exponent(p.v0, p.lambda0));
    }
    let q = FrequencyArgument::new(ZERO, first.c, first.d, first.e);
    Ok(solver.solve(q, (i - 1) as f64 * dt)?.exponent(p.v0, p.lambda0))
}

fn two_stage_pair(solver: &AffineSolver, u: f64, i: usize, dt: f64) -> Result<(Complex64, Complex64)> {
    Ok((
        single_stage(solver, Complex64::new(0.0, u), i, dt)?,
        single_stage(solver, Complex64::new(1.0, u), i, dt)?,
    ))
}
