//! Adaptive Gauss–Kronrod (7/15) for vector-valued integrands and
//! Gauss–Legendre rules.

#![allow(clippy::excessive_precision)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// Gauss weights for the nodes `XGK[1], XGK[3], XGK[5], XGK[7]`.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, PartialEq)]
pub struct VectorIntegral {
    pub values: Vec<f64>,
    /// Sum over components of the estimated absolute errors.
    pub error: f64,
    pub panels: usize,
    pub evaluations: usize,
}

impl VectorIntegral {
    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct AdaptiveOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_panels: usize,
}

struct Panel {
    a: f64,
    b: f64,
    values: Vec<f64>,
    errors: Vec<f64>,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn kronrod_panel<F>(f: &mut F, a: f64, b: f64, dim: usize, scratch: &mut [Vec<f64>]) -> Result<Panel>
where
    F: FnMut(f64, &mut [f64]) -> Result<()>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    // scratch[0] = center, scratch[2j+1], scratch[2j+2] = center -/+ half * XGK[j]
    f(center, &mut scratch[0])?;
    for j in 0..7 {
        let dx = half * XGK[j];
        let (left, right) = scratch[2 * j + 1..2 * j + 3].split_at_mut(1);
        f(center - dx, &mut left[0])?;
        f(center + dx, &mut right[0])?;
    }
    let mut values = vec![0.0; dim];
    let mut errors = vec![0.0; dim];
    for k in 0..dim {
        let fc = scratch[0][k];
        let mut kronrod = WGK[7] * fc;
        let mut gauss = WG[3] * fc;
        for j in 0..7 {
            let pair = scratch[2 * j + 1][k] + scratch[2 * j + 2][k];
            kronrod += WGK[j] * pair;
            if j % 2 == 1 {
                gauss += WG[j / 2] * pair;
            }
        }
        let mean = 0.5 * kronrod;
        let mut resasc = WGK[7] * (fc - mean).abs();
        for j in 0..7 {
            resasc += WGK[j] * ((scratch[2 * j + 1][k] - mean).abs() + (scratch[2 * j + 2][k] - mean).abs());
        }
        let resasc = resasc * half.abs();
        let mut err = ((kronrod - gauss) * half).abs();
        if resasc != 0.0 && err != 0.0 {
            err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
        }
        values[k] = kronrod * half;
        errors[k] = err.max(50.0 * f64::EPSILON * values[k].abs());
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Quadrature(format!(
            "integrand is not finite on [{a}, {b}]"
        )));
    }
    let error = errors.iter().sum();
    Ok(Panel {
        a,
        b,
        values,
        errors,
        error,
    })
}

/// Integrates the `dim`-vector `f` over `[a, b]`, bisecting the panel with the
/// largest summed error until it drops below `max(abs_tol, rel_tol * |sum|)`,
/// where `sum` is the sum of the component integrals.
pub fn integrate_vector<F>(mut f: F, a: f64, b: f64, dim: usize, opts: AdaptiveOptions) -> Result<VectorIntegral>
where
    F: FnMut(f64, &mut [f64]) -> Result<()>,
{
    let mut scratch = vec![vec![0.0; dim]; 15];
    let mut heap = BinaryHeap::new();
    heap.push(kronrod_panel(&mut f, a, b, dim, &mut scratch)?);
    let mut evaluations = 15;
    loop {
        let (total, error) = heap.iter().fold((0.0, 0.0), |(s, e), p| {
            (s + p.values.iter().sum::<f64>(), e + p.error)
        });
        if error <= opts.abs_tol.max(opts.rel_tol * total.abs()) {
            break;
        }
        if heap.len() >= opts.max_panels {
            return Err(Error::Quadrature(format!(
                "no convergence on [{a}, {b}] after {} panels (error {error:e}, estimate {total:e})",
                heap.len()
            )));
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            return Err(Error::Quadrature(format!(
                "panel [{}, {}] cannot be bisected further",
                worst.a, worst.b
            )));
        }
        heap.push(kronrod_panel(&mut f, worst.a, mid, dim, &mut scratch)?);
        heap.push(kronrod_panel(&mut f, mid, worst.b, dim, &mut scratch)?);
        evaluations += 30;
    }

    // Sum panels in a fixed (left to right) order for reproducibility.
    let mut panels = heap.into_vec();
    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    let mut values = vec![0.0; dim];
    let mut error = 0.0;
    for panel in &panels {
        for k in 0..dim {
            values[k] += panel.values[k];
        }
        error += panel.errors.iter().sum::<f64>();
    }
    Ok(VectorIntegral {
        values,
        error,
        panels: panels.len(),
        evaluations,
    })
}

/// Scalar convenience wrapper around [`integrate_vector`].
pub fn integrate<F>(mut f: F, a: f64, b: f64, opts: AdaptiveOptions) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let out = integrate_vector(
        |x, out| {
            out[0] = f(x)?;
            Ok(())
        },
        a,
        b,
        1,
        opts,
    )?;
    Ok((out.values[0], out.error))
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Newton iteration on `P_n` from the Chebyshev-like initial guesses.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    /// Nodes and weights mapped onto `[a, b]`, nodes ascending.
    pub fn on_interval(&self, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        (
            self.nodes.iter().map(|x| mid + half * x).collect(),
            self.weights.iter().map(|w| half * w).collect(),
        )
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}
