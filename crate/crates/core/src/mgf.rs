//! Exponential-affine joint moment generating function of `(X, V, lambda)`.
//!
//! `E[exp(omega X_T + phi V_T + psi lambda_T + chi) | X, V, lambda]` equals
//! `exp(omega X + C(tau) V + D(tau) lambda + E(tau))` where
//!
//! ```text
//! C' = sigmaV^2 C^2 / 2 + (rho sigmaV omega - kappaV) C + (omega^2 - omega) / 2
//! D' = sigmaL^2 D^2 / 2 - kappaL D + Lambda(omega, C)
//! E' = (r - d) omega + kappaV thetaV C + kappaL thetaL D
//! ```
//!
//! with `(C, D, E)(0) = (phi, psi, chi)`. `C` does not depend on `D` or `E`
//! and is evaluated in closed form; `(D, E)` are integrated together with the
//! adaptive Dormand–Prince scheme in [`crate::ode`].

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::model::{Model, ModelParams};
use crate::numerics::cexpm1;
use crate::ode::{self, OdeStats, OdeTolerance};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// The quadruple `(omega, phi, psi, chi)` of exponents on `(X, V, lambda, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyArgument {
    pub omega: Complex64,
    pub phi: Complex64,
    pub psi: Complex64,
    pub chi: Complex64,
}

impl FrequencyArgument {
    pub fn new(omega: Complex64, phi: Complex64, psi: Complex64, chi: Complex64) -> Self {
        FrequencyArgument {
            omega,
            phi,
            psi,
            chi,
        }
    }

    /// `(omega, 0, 0, 0)`: transform of the log-price alone.
    pub fn log_price(omega: Complex64) -> Self {
        Self::new(omega, ZERO, ZERO, ZERO)
    }

    fn validate(&self) -> Result<()> {
        let all = [self.omega, self.phi, self.psi, self.chi];
        if all.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid("q", "frequency argument must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SolverDiagnostics {
    pub steps: usize,
    pub rejected: usize,
    pub evaluations: usize,
    /// Largest accepted local error estimate relative to the tolerance.
    pub max_local_error: f64,
}

impl From<OdeStats> for SolverDiagnostics {
    fn from(s: OdeStats) -> Self {
        SolverDiagnostics {
            steps: s.steps,
            rejected: s.rejected,
            evaluations: s.evaluations,
            max_local_error: s.max_error,
        }
    }
}

/// `(C, D, E)` at time-to-maturity `tau`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineCoefficients {
    pub tau: f64,
    pub c: Complex64,
    pub d: Complex64,
    pub e: Complex64,
    pub diagnostics: SolverDiagnostics,
}

impl AffineCoefficients {
    /// `C v + D lambda + E`, the log of the transform without the `omega x` term.
    pub fn exponent(&self, v: f64, lambda: f64) -> Complex64 {
        self.c * v + self.d * lambda + self.e
    }
}

/// Closed-form solution of the variance Riccati equation
/// `C' = a C^2 + b C + c` for an arbitrary complex initial value.
///
/// With `delta = sqrt(b^2 - 4ac)` (principal root), `beta = delta - b` and
/// `g = (e^{-delta tau} - 1) / delta`,
///
/// ```text
/// C(tau) = (2 C0 + (beta C0 - 2c) g) / (2 + (2a C0 - beta + 2 delta) g)
/// ```
///
/// The form has no logarithm and no division by `a`, `beta` or `delta`, so it
/// is continuous in `tau` and covers `sigmaV = 0` and the double-root case.
#[derive(Debug, Clone, Copy)]
pub struct VarianceRiccati {
    a: Complex64,
    b: Complex64,
    c: Complex64,
    delta: Complex64,
    beta: Complex64,
}

impl VarianceRiccati {
    pub fn new(params: &ModelParams, omega: Complex64) -> Self {
        let a = Complex64::new(0.5 * params.sigma_v * params.sigma_v, 0.0);
        let b = params.rho * params.sigma_v * omega - params.kappa_v;
        let c = 0.5 * (omega * omega - omega);
        let delta = (b * b - 4.0 * a * c).sqrt();
        VarianceRiccati {
            a,
            b,
            c,
            delta,
            beta: delta - b,
        }
    }

    /// Right-hand side `a C^2 + b C + c`.
    pub fn derivative(&self, c_value: Complex64) -> Complex64 {
        self.a * c_value * c_value + self.b * c_value + self.c
    }

    pub fn eval(&self, c0: Complex64, tau: f64) -> Complex64 {
        let z = self.delta * tau;
        let g = if z.norm() < 1e-4 {
            -tau * (1.0 - z / 2.0 + z * z / 6.0 - z * z * z / 24.0)
        } else {
            cexpm1(-z) / self.delta
        };
        let num = 2.0 * c0 + (self.beta * c0 - 2.0 * self.c) * g;
        let den = 2.0 + (2.0 * self.a * c0 - self.beta + 2.0 * self.delta) * g;
        num / den
    }
}

/// Solves the affine coefficient system for one model at a fixed tolerance.
#[derive(Debug, Clone, Copy)]
pub struct AffineSolver<'a> {
    model: &'a Model,
    tol: OdeTolerance,
}

impl<'a> AffineSolver<'a> {
    pub fn new(model: &'a Model) -> Self {
        Self::with_tolerance(model, OdeTolerance::default())
    }

    pub fn with_tolerance(model: &'a Model, tol: OdeTolerance) -> Self {
        AffineSolver { model, tol }
    }

    pub fn model(&self) -> &'a Model {
        self.model
    }

    pub fn tolerance(&self) -> OdeTolerance {
        self.tol
    }

    pub fn solve(&self, q: FrequencyArgument, tau: f64) -> Result<AffineCoefficients> {
        Ok(self.solve_at(q, &[tau])?[0])
    }

    /// Coefficients at every `tau` in `taus` (ascending) from one trajectory.
    pub fn solve_at(&self, q: FrequencyArgument, taus: &[f64]) -> Result<Vec<AffineCoefficients>> {
        q.validate()?;
        self.tol.validate()?;
        if let Some(bad) = taus.iter().find(|t| !(**t >= 0.0) || !t.is_finite()) {
            return Err(Error::invalid("tau", format!("must be finite and >= 0, got {bad}")));
        }
        let p = &self.model.params;
        let riccati = VarianceRiccati::new(p, q.omega);
        let half_sl2 = 0.5 * p.sigma_l * p.sigma_l;
        let drift = (p.r - p.d) * q.omega;
        let kv_tv = p.kappa_v * p.theta_v;
        let kl_tl = p.kappa_l * p.theta_l;
        let model = self.model;

        let rhs = |tau: f64, y: &[Complex64; 2]| -> Result<[Complex64; 2]> {
            let c = riccati.eval(q.phi, tau);
            let lambda_term = model.big_lambda(q.omega, c).map_err(|e| match e {
                Error::Domain(reason) => Error::Admissibility { tau, reason },
                other => other,
            })?;
            let d = y[0];
            Ok([
                half_sl2 * d * d - p.kappa_l * d + lambda_term,
                drift + kv_tv * c + kl_tl * d,
            ])
        };

        let mut out = Vec::with_capacity(taus.len());
        let stats = ode::integrate(rhs, [q.psi, q.chi], taus, self.tol, |_, tau, y| {
            out.push(AffineCoefficients {
                tau,
                c: riccati.eval(q.phi, tau),
                d: y[0],
                e: y[1],
                diagnostics: SolverDiagnostics::default(),
            });
        })?;
        let diagnostics = SolverDiagnostics::from(stats);
        for coeffs in &mut out {
            coeffs.diagnostics = diagnostics;
            if !(coeffs.c.norm().is_finite() && coeffs.d.norm().is_finite() && coeffs.e.norm().is_finite())
            {
                return Err(Error::Solver {
                    tau: coeffs.tau,
                    reason: "affine coefficients are not finite (transform explodes)".into(),
                });
            }
        }
        Ok(out)
    }

    /// `exp(omega x + C v + D lambda + E)`.
    pub fn mgf_joint(
        &self,
        q: FrequencyArgument,
        tau: f64,
        x: f64,
        v: f64,
        lambda: f64,
    ) -> Result<Complex64> {
        if !(v >= 0.0) {
            return Err(Error::invalid("v", format!("must be >= 0, got {v}")));
        }
        if !(lambda >= 0.0) {
            return Err(Error::invalid("lambda", format!("must be >= 0, got {lambda}")));
        }
        let coeffs = self.solve(q, tau)?;
        Ok((q.omega * x + coeffs.exponent(v, lambda)).exp())
    }

    /// `E[exp(-s V_tau)]` from the model's initial state.
    pub fn mgf_marginal_variance(&self, s: Complex64, tau: f64) -> Result<Complex64> {
        let p = &self.model.params;
        let q = FrequencyArgument::new(ZERO, -s, ZERO, ZERO);
        self.mgf_joint(q, tau, 0.0, p.v0, p.lambda0)
    }

    /// `log E[exp(omega (X_{t_i} - X_{t_{i-1}}))]` for `i = 1..=count`.
    ///
    /// The conditional transform over one interval is `exp(C1 V + D1 lambda + E1)`
    /// at the interval's start; its expectation from time zero is the joint
    /// transform with `q = (0, C1, D1, E1)` over `t_{i-1}`.
    pub fn increment_log_cfs(&self, omega: Complex64, dt: f64, count: usize) -> Result<Vec<Complex64>> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::invalid("dt", format!("must be > 0, got {dt}")));
        }
        let p = &self.model.params;
        let first = self.solve(FrequencyArgument::log_price(omega), dt)?;
        if count <= 1 {
            return Ok(vec![first.exponent(p.v0, p.lambda0); count]);
        }
        let q = FrequencyArgument::new(ZERO, first.c, first.d, first.e);
        let starts: Vec<f64> = (0..count).map(|k| k as f64 * dt).collect();
        Ok(self
            .solve_at(q, &starts)?
            .iter()
            .map(|coeffs| coeffs.exponent(p.v0, p.lambda0))
            .collect())
    }

    /// `E[exp(omega (X_{t_i} - X_{t_{i-1}}))]` with `t_i = i dt`.
    pub fn increment_cf(&self, omega: Complex64, i: usize, dt: f64) -> Result<Complex64> {
        if i == 0 {
            return Err(Error::invalid("i", "sampling index must be >= 1"));
        }
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::invalid("dt", format!("must be > 0, got {dt}")));
        }
        let p = &self.model.params;
        let first = self.solve(FrequencyArgument::log_price(omega), dt)?;
        if i == 1 {
            return Ok(first.exponent(p.v0, p.lambda0).exp());
        }
        let q = FrequencyArgument::new(ZERO, first.c, first.d, first.e);
        let second = self.solve(q, (i - 1) as f64 * dt)?;
        Ok(second.exponent(p.v0, p.lambda0).exp())
    }
}

/// [`AffineSolver::solve`] at the default tolerance.
pub fn solve_affine(model: &Model, q: FrequencyArgument, tau: f64) -> Result<AffineCoefficients> {
    AffineSolver::new(model).solve(q, tau)
}

pub fn mgf_joint(
    model: &Model,
    q: FrequencyArgument,
    tau: f64,
    x: f64,
    v: f64,
    lambda: f64,
) -> Result<Complex64> {
    AffineSolver::new(model).mgf_joint(q, tau, x, v, lambda)
}

pub fn mgf_marginal_variance(model: &Model, s: Complex64, tau: f64) -> Result<Complex64> {
    AffineSolver::new(model).mgf_marginal_variance(s, tau)
}

pub fn increment_cf(model: &Model, omega: Complex64, i: usize, dt: f64) -> Result<Complex64> {
    AffineSolver::new(model).increment_cf(omega, i, dt)
}
