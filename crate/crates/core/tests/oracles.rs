//! Transform-based quantities against moderate-size simulations.

use num_complex::Complex64;
use volswap::mgf::{increment_cf, mgf_marginal_variance};
use volswap::model::{DoubleExponential, GaussianExponential, JumpSpec, Model, ModelParams, SwapContract};
use volswap::montecarlo::{McStrike, SimConfig, Simulator};
use volswap::numerics::mean_and_standard_error;
use volswap::pricing::{Pricer, QuadratureConfig};

const Z: f64 = 4.0;

fn de_model() -> Model {
    // a busier jump regime than the defaults so jumps matter at this sample size
    let params = ModelParams {
        lambda0: 0.5,
        theta_l: 0.5,
        ..ModelParams::baseline()
    };
    Model::new(params, JumpSpec::DoubleExponential(DoubleExponential::default())).unwrap()
}

fn ge_model() -> Model {
    let params = ModelParams {
        lambda0: 0.5,
        theta_l: 0.5,
        ..ModelParams::baseline()
    };
    Model::new(params, JumpSpec::GaussianExponential(GaussianExponential::default())).unwrap()
}

fn assert_within(label: &str, mc: f64, se: f64, analytic: f64) {
    let z = (mc - analytic) / se;
    assert!(z.abs() < Z, "{label}: mc {mc} ± {se} vs analytic {analytic} (z = {z:.2})");
}

/// Log-returns over interval `i` (1-based) of a monthly grid.
fn interval_log_returns(model: &Model, i: usize, paths: usize, seed: u64) -> Vec<f64> {
    let contract = SwapContract::new(1.0, 12).unwrap();
    let config = SimConfig {
        paths,
        steps_per_interval: 21,
        seed,
        ..SimConfig::default()
    };
    Simulator::new(model, contract, config)
        .unwrap()
        .map_paths(|v| {
            let x: Vec<f64> = v.sampled_log_prices().collect();
            x[i] - x[i - 1]
        })
}

#[test]
fn interval_moments_match_simulation() {
    let model = de_model();
    let pricer = Pricer::new(&model, QuadratureConfig::default()).unwrap();
    let dt = 1.0 / 12.0;
    let i = 3;
    let y = interval_log_returns(&model, i, 60_000, 11);

    let abs: Vec<f64> = y.iter().map(|v| v.exp_m1().abs()).collect();
    let (m, se) = mean_and_standard_error(&abs);
    assert_within("E|R|", m, se, pricer.expected_abs_return(i, dt).unwrap());

    let up: Vec<f64> = y.iter().map(|v| f64::from(u8::from(*v > 0.0))).collect();
    let (m, se) = mean_and_standard_error(&up);
    assert_within("P(Y > 0)", m, se, pricer.positive_return_probability(i, dt).unwrap());

    let r = model.params.r;
    let tilted: Vec<f64> = y.iter().map(|v| if *v > 0.0 { (v - r * dt).exp() } else { 0.0 }).collect();
    let (m, se) = mean_and_standard_error(&tilted);
    assert_within("tilted P(Y > 0)", m, se, pricer.tilted_positive_return_probability(i, dt).unwrap());
}

#[test]
fn increment_characteristic_function_matches_simulation() {
    let model = ge_model();
    let dt = 1.0 / 12.0;
    let i = 2;
    let y = interval_log_returns(&model, i, 40_000, 12);
    for omega in [Complex64::new(0.0, 3.0), Complex64::new(0.0, -7.5), Complex64::new(0.5, 2.0)] {
        let analytic = increment_cf(&model, omega, i, dt).unwrap();
        let (re, im): (Vec<f64>, Vec<f64>) = y
            .iter()
            .map(|v| {
                let w = (omega * v).exp();
                (w.re, w.im)
            })
            .unzip();
        let (re, im) = (McStrike::from_samples(&re, false), McStrike::from_samples(&im, false));
        assert_within(&format!("Re cf({omega})"), re.estimate, re.standard_error, analytic.re);
        assert_within(&format!("Im cf({omega})"), im.estimate, im.standard_error, analytic.im);
    }
}

#[test]
fn variance_laplace_transform_matches_simulation() {
    let model = de_model();
    let contract = SwapContract::new(0.5, 126).unwrap();
    let config = SimConfig {
        paths: 30_000,
        steps_per_interval: 4,
        seed: 13,
        ..SimConfig::default()
    };
    let v_t = Simulator::new(&model, contract, config).unwrap().map_paths(|v| v.terminal_variance());
    for s in [2.0, 10.0, 40.0] {
        let samples: Vec<f64> = v_t.iter().map(|v| (-s * v).exp()).collect();
        let (m, se) = mean_and_standard_error(&samples);
        let analytic = mgf_marginal_variance(&model, Complex64::new(s, 0.0), 0.5).unwrap();
        assert!(analytic.im.abs() < 1e-12);
        assert_within(&format!("E exp(-{s} V)"), m, se, analytic.re);
    }
}

#[test]
fn discounted_price_is_a_martingale_in_simulation() {
    for model in [de_model(), ge_model()] {
        let contract = SwapContract::new(1.0, 52).unwrap();
        let config = SimConfig {
            paths: 40_000,
            steps_per_interval: 5,
            seed: 14,
            ..SimConfig::default()
        };
        let carry = model.params.r - model.params.d;
        let discounted = Simulator::new(&model, contract, config)
            .unwrap()
            .map_paths(|v| (v.terminal_log_price() - carry).exp());
        let (m, se) = mean_and_standard_error(&discounted);
        assert_within("E[e^{-(r-d)T} S_T / S_0]", m, se, 1.0);
    }
}

#[test]
fn antithetic_pairs_agree_with_plain_sampling() {
    let model = de_model();
    let contract = SwapContract::new(1.0, 52).unwrap();
    let mut estimates = Vec::new();
    for antithetic in [false, true] {
        let config = SimConfig {
            paths: 20_000,
            steps_per_interval: 4,
            seed: 15,
            antithetic,
            ..SimConfig::default()
        };
        let avg = Simulator::new(&model, contract, config)
            .unwrap()
            .map_paths(|v| 100.0 * v.average_volatility());
        estimates.push(McStrike::from_samples(&avg, antithetic));
    }
    let (plain, anti) = (estimates[0], estimates[1]);
    let se = plain.standard_error.hypot(anti.standard_error);
    assert!((plain.estimate - anti.estimate).abs() < Z * se, "{plain:?} vs {anti:?}");
}
