//! Adaptive Dormand–Prince 5(4) integrator for small complex-valued systems.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeTolerance {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for OdeTolerance {
    fn default() -> Self {
        OdeTolerance {
            rtol: 1e-10,
            atol: 1e-12,
        }
    }
}

impl OdeTolerance {
    pub fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return Err(Error::invalid("odeTolerance", "rtol and atol must be > 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct OdeStats {
    pub steps: usize,
    pub rejected: usize,
    pub evaluations: usize,
    /// Largest accepted local error, in units of the tolerance (always <= 1).
    pub max_error: f64,
}

const MAX_STEPS: usize = 500_000;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

type State<const K: usize> = [Complex64; K];

fn combine<const K: usize>(y: &State<K>, h: f64, terms: &[(f64, &State<K>)]) -> State<K> {
    let mut out = *y;
    for (coef, k) in terms {
        if *coef == 0.0 {
            continue;
        }
        for j in 0..K {
            out[j] += h * coef * k[j];
        }
    }
    out
}

fn scaled_norm<const K: usize>(v: &State<K>, y: &State<K>, y_new: &State<K>, tol: OdeTolerance) -> f64 {
    let mut acc = 0.0;
    for j in 0..K {
        let scale_re = tol.atol + tol.rtol * y[j].re.abs().max(y_new[j].re.abs());
        let scale_im = tol.atol + tol.rtol * y[j].im.abs().max(y_new[j].im.abs());
        acc += (v[j].re / scale_re).powi(2) + (v[j].im / scale_im).powi(2);
    }
    (acc / (2 * K) as f64).sqrt()
}

/// Integrates `y' = f(t, y)` from `t = 0` through every time in `stops`
/// (ascending, non-negative), calling `at_stop(index, t, y)` at each one.
///
/// The step size carries over between stops; every stop is hit exactly.
pub fn integrate<const K: usize, F, G>(
    mut rhs: F,
    y0: State<K>,
    stops: &[f64],
    tol: OdeTolerance,
    mut at_stop: G,
) -> Result<OdeStats>
where
    F: FnMut(f64, &State<K>) -> Result<State<K>>,
    G: FnMut(usize, f64, &State<K>),
{
    let mut stats = OdeStats::default();
    let mut t = 0.0;
    let mut y = y0;
    let mut f0 = rhs(t, &y)?;
    stats.evaluations += 1;
    let mut h: Option<f64> = None;

    for (idx, &target) in stops.iter().enumerate() {
        if target < t || !target.is_finite() {
            return Err(Error::Solver {
                tau: target,
                reason: "output times must be finite and ascending".into(),
            });
        }
        while t < target {
            let span = target - t;
            let mut step = match h {
                Some(h) => h,
                None => {
                    let h0 = initial_step(&mut rhs, t, &y, &f0, span, tol, &mut stats)?;
                    h = Some(h0);
                    h0
                }
            };
            let last = step >= span * (1.0 - 1e-12);
            if last {
                step = span;
            }
            if step <= f64::EPSILON * t.abs().max(f64::MIN_POSITIVE) * 4.0 || step < 1e-300 {
                return Err(Error::Solver {
                    tau: t,
                    reason: format!("step size underflow (h = {step:e})"),
                });
            }
            if stats.steps + stats.rejected >= MAX_STEPS {
                return Err(Error::Solver {
                    tau: t,
                    reason: format!("exceeded {MAX_STEPS} steps"),
                });
            }

            let k1 = f0;
            let k2 = rhs(t + C2 * step, &combine(&y, step, &[(A21, &k1)]))?;
            let k3 = rhs(t + C3 * step, &combine(&y, step, &[(A31, &k1), (A32, &k2)]))?;
            let k4 = rhs(
                t + C4 * step,
                &combine(&y, step, &[(A41, &k1), (A42, &k2), (A43, &k3)]),
            )?;
            let k5 = rhs(
                t + C5 * step,
                &combine(&y, step, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
            )?;
            let k6 = rhs(
                t + step,
                &combine(
                    &y,
                    step,
                    &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
                ),
            )?;
            let y_new = combine(
                &y,
                step,
                &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
            );
            let t_new = if last { target } else { t + step };
            let k7 = rhs(t_new, &y_new)?;
            stats.evaluations += 6;

            let mut err_vec = [Complex64::new(0.0, 0.0); K];
            for j in 0..K {
                err_vec[j] = step
                    * (E1 * k1[j] + E3 * k3[j] + E4 * k4[j] + E5 * k5[j] + E6 * k6[j] + E7 * k7[j]);
            }
            let err = scaled_norm(&err_vec, &y, &y_new, tol);
            if !err.is_finite() {
                stats.rejected += 1;
                h = Some(step * 0.1);
                continue;
            }
            let factor = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            if err <= 1.0 {
                stats.steps += 1;
                stats.max_error = stats.max_error.max(err);
                t = t_new;
                y = y_new;
                f0 = k7;
                // Keep the unclipped step when the stop forced a shorter one.
                let proposal = step * factor;
                h = Some(if last { proposal.max(h.unwrap_or(proposal)) } else { proposal });
            } else {
                stats.rejected += 1;
                h = Some(step * factor.min(1.0));
            }
        }
        at_stop(idx, t, &y);
    }
    Ok(stats)
}

fn initial_step<const K: usize, F>(
    rhs: &mut F,
    t: f64,
    y: &State<K>,
    f0: &State<K>,
    span: f64,
    tol: OdeTolerance,
    stats: &mut OdeStats,
) -> Result<f64>
where
    F: FnMut(f64, &State<K>) -> Result<State<K>>,
{
    let d0 = scaled_norm(y, y, y, tol);
    let d1 = scaled_norm(f0, y, y, tol);
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    h0 = h0.min(span);
    let y1 = combine(y, h0, &[(1.0, f0)]);
    let f1 = rhs(t + h0, &y1)?;
    stats.evaluations += 1;
    let mut diff = [Complex64::new(0.0, 0.0); K];
    for j in 0..K {
        diff[j] = f1[j] - f0[j];
    }
    let d2 = scaled_norm(&diff, y, y, tol) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    Ok((100.0 * h0).min(h1).min(span))
}
