//! Model parameters, jump-size laws and their exponential transforms.
//!
//! The asset, its instantaneous variance `V` and the jump intensity `lambda`
//! follow
//!
//! ```text
//! dS/S-    = (r - d - lambda m) dt + sqrt(V) dW^S + (e^{J^S} - 1) dN
//! dV       = kappaV (thetaV - V) dt + sigmaV sqrt(V) dW^V + J^V dN
//! dlambda  = kappaL (thetaL - lambda) dt + sigmaL sqrt(lambda) dW^lambda
//! ```
//!
//! with `d[W^S, W^V] = rho dt`, `W^lambda` independent, and `N` a Cox process
//! driven by `lambda`. Price and variance jump simultaneously; their joint
//! law is described by [`JumpSpec`].

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Diffusion and intensity coefficients plus initial states, all annualized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub r: f64,
    pub d: f64,
    pub v0: f64,
    pub lambda0: f64,
    pub kappa_v: f64,
    pub theta_v: f64,
    pub sigma_v: f64,
    pub kappa_l: f64,
    pub theta_l: f64,
    pub sigma_l: f64,
    pub rho: f64,
}

impl ModelParams {
    /// Market-estimated baseline diffusion parameters, with the intensity
    /// coefficients `kappaL = 3`, `thetaL = 0.02`, `sigmaL = 0.1` filled in
    /// as package defaults.
    pub fn baseline() -> Self {
        ModelParams {
            r: 0.05,
            d: 0.005,
            v0: 0.04,
            lambda0: 0.02,
            kappa_v: 10.0,
            theta_v: 0.05,
            sigma_v: 0.6,
            kappa_l: 3.0,
            theta_l: 0.02,
            sigma_l: 0.1,
            rho: -0.64,
        }
    }

    /// Checks the hard invariants and returns soft warnings (Feller conditions).
    ///
    /// `sigmaV = 0` is accepted: it is the deterministic-variance limit and the
    /// variance Riccati equation degenerates to a linear one.
    pub fn validate(&self) -> Result<Vec<String>> {
        let finite = [
            ("r", self.r),
            ("d", self.d),
            ("V0", self.v0),
            ("lambda0", self.lambda0),
            ("kappaV", self.kappa_v),
            ("thetaV", self.theta_v),
            ("sigmaV", self.sigma_v),
            ("kappaL", self.kappa_l),
            ("thetaL", self.theta_l),
            ("sigmaL", self.sigma_l),
            ("rho", self.rho),
        ];
        for (name, value) in finite {
            if !value.is_finite() {
                return Err(Error::invalid(name, "must be finite"));
            }
        }
        if self.v0 <= 0.0 {
            return Err(Error::invalid("V0", format!("must be > 0, got {}", self.v0)));
        }
        if self.lambda0 < 0.0 {
            return Err(Error::invalid(
                "lambda0",
                format!("must be >= 0, got {}", self.lambda0),
            ));
        }
        if self.kappa_v <= 0.0 {
            return Err(Error::invalid(
                "kappaV",
                format!("must be > 0, got {}", self.kappa_v),
            ));
        }
        if self.theta_v <= 0.0 {
            return Err(Error::invalid(
                "thetaV",
                format!("must be > 0, got {}", self.theta_v),
            ));
        }
        if self.sigma_v < 0.0 {
            return Err(Error::invalid(
                "sigmaV",
                format!("must be >= 0, got {}", self.sigma_v),
            ));
        }
        if self.kappa_l <= 0.0 {
            return Err(Error::invalid(
                "kappaL",
                format!("must be > 0, got {}", self.kappa_l),
            ));
        }
        if self.theta_l < 0.0 {
            return Err(Error::invalid(
                "thetaL",
                format!("must be >= 0, got {}", self.theta_l),
            ));
        }
        if self.sigma_l < 0.0 {
            return Err(Error::invalid(
                "sigmaL",
                format!("must be >= 0, got {}", self.sigma_l),
            ));
        }
        if !(-1.0..=1.0).contains(&self.rho) {
            return Err(Error::invalid(
                "rho",
                format!("must lie in [-1, 1], got {}", self.rho),
            ));
        }

        let mut warnings = Vec::new();
        if 2.0 * self.kappa_v * self.theta_v < self.sigma_v * self.sigma_v {
            warnings.push(format!(
                "Feller condition 2 kappaV thetaV >= sigmaV^2 violated ({} < {})",
                2.0 * self.kappa_v * self.theta_v,
                self.sigma_v * self.sigma_v
            ));
        }
        if 2.0 * self.kappa_l * self.theta_l < self.sigma_l * self.sigma_l {
            warnings.push(format!(
                "Feller condition 2 kappaL thetaL >= sigmaL^2 violated ({} < {})",
                2.0 * self.kappa_l * self.theta_l,
                self.sigma_l * self.sigma_l
            ));
        }
        Ok(warnings)
    }
}

/// Independent asymmetric double-exponential laws for `J^S` and `J^V`.
///
/// Densities are `p eta1 e^{-eta1 y} 1{y >= 0} + (1-p) eta2 e^{eta2 y} 1{y < 0}`
/// for the price jump and the same shape with `(pPrime, eta3, eta4)` for the
/// variance jump.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleExponential {
    pub p: f64,
    pub eta1: f64,
    pub eta2: f64,
    pub p_prime: f64,
    pub eta3: f64,
    pub eta4: f64,
}

/// `J^V ~ Exp(mean eta)` and `J^S | J^V ~ N(nu + rhoJ J^V, delta^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianExponential {
    pub nu: f64,
    pub delta: f64,
    pub rho_j: f64,
    pub eta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum JumpSpec {
    /// Jump-free model, whatever the intensity parameters.
    #[default]
    None,
    DoubleExponential(DoubleExponential),
    GaussianExponential(GaussianExponential),
}

/// Which closed form is used for `E[exp(omega J^S + c J^V)]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TransformConvention {
    /// The exact transform of the stated densities.
    #[default]
    Standard,
    /// For double-exponential jumps, `A^omega B^c` with `A = E e^{J^S}` and
    /// `B = E e^{J^V}`. Kept for comparison only; it is not the transform of
    /// the double-exponential law.
    MomentPower,
}

/// How arguments outside the convergence strip of the jump transform are treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StripPolicy {
    /// Outside the strip the expectation diverges: report a domain error.
    #[default]
    Strict,
    /// Evaluate the closed form as an analytic continuation and fail only at
    /// its poles. Needed for double-exponential variance jumps with a
    /// downward tail, whose Laplace transform diverges at large frequencies.
    Continuation,
}

const POLE_EPS: f64 = 1e-12;

fn kou_factor(
    up_weight: f64,
    up_rate: f64,
    down_rate: f64,
    z: Complex64,
    strip: StripPolicy,
    what: &str,
) -> Result<Complex64> {
    let down_weight = 1.0 - up_weight;
    let mut value = Complex64::new(0.0, 0.0);
    if up_weight > 0.0 {
        let den = up_rate - z;
        let outside = z.re >= up_rate;
        if (strip == StripPolicy::Strict && outside) || den.norm() < POLE_EPS {
            return Err(Error::Domain(format!(
                "{what} transform diverges: Re({z}) must be < {up_rate}"
            )));
        }
        value += up_weight * up_rate / den;
    }
    if down_weight > 0.0 {
        let den = down_rate + z;
        let outside = z.re <= -down_rate;
        if (strip == StripPolicy::Strict && outside) || den.norm() < POLE_EPS {
            return Err(Error::Domain(format!(
                "{what} transform diverges: Re({z}) must be > {}",
                -down_rate
            )));
        }
        value += down_weight * down_rate / den;
    }
    Ok(value)
}

impl DoubleExponential {
    fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::invalid("p", format!("must lie in [0, 1], got {}", self.p)));
        }
        if !(0.0..=1.0).contains(&self.p_prime) {
            return Err(Error::invalid(
                "pPrime",
                format!("must lie in [0, 1], got {}", self.p_prime),
            ));
        }
        if !(self.eta1 > 1.0) {
            return Err(Error::invalid("eta1", format!("must be > 1, got {}", self.eta1)));
        }
        if !(self.eta2 > 0.0) {
            return Err(Error::invalid("eta2", format!("must be > 0, got {}", self.eta2)));
        }
        if !(self.eta3 > 1.0) {
            return Err(Error::invalid("eta3", format!("must be > 1, got {}", self.eta3)));
        }
        if !(self.eta4 > 0.0) {
            return Err(Error::invalid("eta4", format!("must be > 0, got {}", self.eta4)));
        }
        Ok(())
    }

    /// `E[e^{J^S}]`, the base of the literal power form.
    fn price_base(&self) -> f64 {
        self.p * self.eta1 / (self.eta1 - 1.0) + (1.0 - self.p) * self.eta2 / (self.eta2 + 1.0)
    }

    fn variance_base(&self) -> f64 {
        self.p_prime * self.eta3 / (self.eta3 - 1.0)
            + (1.0 - self.p_prime) * self.eta4 / (self.eta4 + 1.0)
    }
}

impl GaussianExponential {
    fn validate(&self) -> Result<()> {
        if !self.nu.is_finite() || !self.rho_j.is_finite() {
            return Err(Error::invalid("nu", "nu and rhoJ must be finite"));
        }
        if !(self.delta >= 0.0) {
            return Err(Error::invalid(
                "delta",
                format!("must be >= 0, got {}", self.delta),
            ));
        }
        if !(self.eta > 0.0) {
            return Err(Error::invalid("eta", format!("must be > 0, got {}", self.eta)));
        }
        Ok(())
    }
}

impl Default for DoubleExponential {
    /// Artifact defaults; the intensity and jump-size baselines are not fixed
    /// by the model itself.
    fn default() -> Self {
        DoubleExponential {
            p: 0.2,
            eta1: 5.2,
            eta2: 2.0,
            p_prime: 1.0,
            eta3: 5.2,
            eta4: 3.0,
        }
    }
}

impl Default for GaussianExponential {
    fn default() -> Self {
        GaussianExponential {
            nu: -0.05,
            delta: 0.05,
            rho_j: -0.5,
            eta: 0.05,
        }
    }
}

impl JumpSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            JumpSpec::None => Ok(()),
            JumpSpec::DoubleExponential(de) => de.validate(),
            JumpSpec::GaussianExponential(ge) => ge.validate(),
        }
    }

    pub fn has_jumps(&self) -> bool {
        !matches!(self, JumpSpec::None)
    }

    /// `E[exp(omega J^S + c J^V)]` in the standard convention, strict strip.
    pub fn joint_jump_transform(&self, omega: Complex64, c: Complex64) -> Result<Complex64> {
        self.transform_with(omega, c, TransformConvention::Standard, StripPolicy::Strict)
    }

    pub fn transform_with(
        &self,
        omega: Complex64,
        c: Complex64,
        convention: TransformConvention,
        strip: StripPolicy,
    ) -> Result<Complex64> {
        match self {
            JumpSpec::None => Ok(Complex64::new(1.0, 0.0)),
            JumpSpec::DoubleExponential(de) => match convention {
                TransformConvention::Standard => {
                    let price = kou_factor(de.p, de.eta1, de.eta2, omega, strip, "price-jump")?;
                    let var = kou_factor(de.p_prime, de.eta3, de.eta4, c, strip, "variance-jump")?;
                    Ok(price * var)
                }
                TransformConvention::MomentPower => {
                    let log_a = de.price_base().ln();
                    let log_b = de.variance_base().ln();
                    Ok((omega * log_a + c * log_b).exp())
                }
            },
            JumpSpec::GaussianExponential(ge) => {
                let loading = (ge.rho_j * omega + c) * ge.eta;
                let den = Complex64::new(1.0, 0.0) - loading;
                if (strip == StripPolicy::Strict && loading.re >= 1.0) || den.norm() < POLE_EPS {
                    return Err(Error::Domain(format!(
                        "variance-jump transform diverges: Re((rhoJ omega + c) eta) = {} must be < 1",
                        loading.re
                    )));
                }
                let gauss = (omega * ge.nu + 0.5 * ge.delta * ge.delta * omega * omega).exp();
                Ok(gauss / den)
            }
        }
    }

    /// `m = E[e^{J^S} - 1]`.
    pub fn mean_price_jump(&self) -> Result<f64> {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Ok(self.joint_jump_transform(one, zero)?.re - 1.0)
    }

    /// Jump term of the intensity Riccati equation,
    /// `-m omega + E[exp(omega J^S + c J^V)] - 1`.
    pub fn big_lambda(&self, omega: Complex64, c: Complex64) -> Result<Complex64> {
        let m = self.mean_price_jump()?;
        Ok(-m * omega + self.joint_jump_transform(omega, c)? - 1.0)
    }
}

/// A validated parameter set together with its jump law and transform options.
#[derive(Debug, Clone, PartialEq)]
pub struct Model {
    pub params: ModelParams,
    pub jumps: JumpSpec,
    pub convention: TransformConvention,
    pub strip: StripPolicy,
    mean_jump: f64,
    warnings: Vec<String>,
}

impl Model {
    pub fn new(params: ModelParams, jumps: JumpSpec) -> Result<Self> {
        Self::with_options(
            params,
            jumps,
            TransformConvention::Standard,
            StripPolicy::Strict,
        )
    }

    pub fn with_options(
        params: ModelParams,
        jumps: JumpSpec,
        convention: TransformConvention,
        strip: StripPolicy,
    ) -> Result<Self> {
        let warnings = params.validate()?;
        jumps.validate()?;
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        // m always comes from the strict transform at (1, 0).
        let mean_jump = jumps
            .transform_with(one, zero, convention, StripPolicy::Strict)
            .map_err(|e| match e {
                Error::Domain(msg) => Error::invalid("jumps", format!("E[e^J^S] is infinite: {msg}")),
                other => other,
            })?
            .re
            - 1.0;
        Ok(Model {
            params,
            jumps,
            convention,
            strip,
            mean_jump,
            warnings,
        })
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn mean_price_jump(&self) -> f64 {
        self.mean_jump
    }

    pub fn joint_jump_transform(&self, omega: Complex64, c: Complex64) -> Result<Complex64> {
        self.jumps
            .transform_with(omega, c, self.convention, self.strip)
    }

    pub fn big_lambda(&self, omega: Complex64, c: Complex64) -> Result<Complex64> {
        if !self.jumps.has_jumps() {
            return Ok(Complex64::new(0.0, 0.0));
        }
        Ok(-self.mean_jump * omega + self.joint_jump_transform(omega, c)? - 1.0)
    }
}

/// Tenor, sampling count and reporting convention of a volatility swap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwapContract {
    pub tenor: f64,
    pub intervals: usize,
    pub notional: f64,
    /// Strikes are reported in this many points per unit of volatility (100).
    pub vol_points_scale: f64,
}

impl SwapContract {
    pub fn new(tenor: f64, intervals: usize) -> Result<Self> {
        let contract = SwapContract {
            tenor,
            intervals,
            notional: 1.0,
            vol_points_scale: 100.0,
        };
        contract.validate()?;
        Ok(contract)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tenor > 0.0 && self.tenor.is_finite()) {
            return Err(Error::invalid("T", format!("must be > 0, got {}", self.tenor)));
        }
        if self.intervals == 0 {
            return Err(Error::invalid("N", "must be >= 1"));
        }
        if !(self.vol_points_scale > 0.0) {
            return Err(Error::invalid("volPointsScale", "must be > 0"));
        }
        if !self.notional.is_finite() {
            return Err(Error::invalid("notional", "must be finite"));
        }
        Ok(())
    }

    /// Sampling interval `T / N`.
    pub fn dt(&self) -> f64 {
        self.tenor / self.intervals as f64
    }

    /// `t_i = i T / N` for `i = 0..=N`.
    pub fn sampling_times(&self) -> Vec<f64> {
        let dt = self.dt();
        (0..=self.intervals).map(|i| i as f64 * dt).collect()
    }

    /// `sqrt(pi / (2 N T))`, the normalization of the absolute-return measure.
    pub fn rv_normalization(&self) -> f64 {
        (std::f64::consts::PI / (2.0 * self.intervals as f64 * self.tenor)).sqrt()
    }
}
