//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits with a
//! non-zero status if any criterion fails.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::Command as Process;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use volswap::cli::config::{Command, RunConfig};
use volswap::mgf::{solve_affine, AffineSolver, FrequencyArgument};
use volswap::model::{DoubleExponential, GaussianExponential, JumpSpec, Model, ModelParams, SwapContract};
use volswap::montecarlo::{mu_u, power_variation, realized_volatility, realized_volatility_star, McStrike, SimConfig, Simulator};
use volswap::pricing::{Pricer, QuadratureConfig};

const ORACLE_PATHS: usize = 1_000_000;
const SUBSTEPS_PER_YEAR: usize = 2520;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn examples() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples")
}

fn oracle_sets() -> Vec<(&'static str, Model)> {
    let base = ModelParams::baseline();
    vec![
        ("jump-free", Model::new(base, JumpSpec::None).unwrap()),
        (
            "double-exponential",
            Model::new(base, JumpSpec::DoubleExponential(DoubleExponential::default())).unwrap(),
        ),
        (
            "gaussian-exponential",
            Model::new(base, JumpSpec::GaussianExponential(GaussianExponential::default())).unwrap(),
        ),
    ]
}

fn mgf_arguments() -> [FrequencyArgument; 5] {
    let z = c(0.0, 0.0);
    [
        FrequencyArgument::new(c(1.0, 0.0), z, z, z),
        FrequencyArgument::new(c(0.0, 2.0), z, z, z),
        FrequencyArgument::new(c(0.5, 1.0), c(-2.0, 0.0), z, z),
        FrequencyArgument::new(z, c(-10.0, 0.0), c(-5.0, 0.0), z),
        FrequencyArgument::new(c(-0.5, 0.0), c(-1.0, 2.0), c(0.0, -3.0), z),
    ]
}

/// Per-path quantities shared by criteria 1 and 2.
struct OracleRun {
    name: &'static str,
    /// `exp(omega X_T + phi V_T + psi lambda_T)` for each argument.
    transforms: Vec<[Complex64; 5]>,
    rv: Vec<f64>,
    average_vol: Vec<f64>,
    elapsed: Duration,
}

fn simulate_oracle(name: &'static str, model: &Model, contract: SwapContract) -> OracleRun {
    let args = mgf_arguments();
    let config = SimConfig {
        paths: ORACLE_PATHS,
        steps_per_interval: SUBSTEPS_PER_YEAR / contract.intervals,
        seed: 1_000_003,
        ..SimConfig::default()
    };
    let started = Instant::now();
    let sim = Simulator::new(model, contract, config).unwrap();
    let samples = sim.map_paths(|v| {
        let (x, var, lam) = (v.terminal_log_price(), v.terminal_variance(), v.terminal_intensity());
        let transforms = args.map(|q| (q.omega * x + q.phi * var + q.psi * lam).exp());
        let returns: Vec<f64> = v.simple_returns().collect();
        (
            transforms,
            realized_volatility(&returns, &contract),
            contract.vol_points_scale * v.average_volatility(),
        )
    });
    OracleRun {
        name,
        transforms: samples.iter().map(|s| s.0).collect(),
        rv: samples.iter().map(|s| s.1).collect(),
        average_vol: samples.iter().map(|s| s.2).collect(),
        elapsed: started.elapsed(),
    }
}

fn criterion_1(runs: &[OracleRun], models: &[(&str, Model)], contract: SwapContract) -> Verdict {
    let started = Instant::now();
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    for (run, (_, model)) in runs.iter().zip(models) {
        let solver = AffineSolver::new(model);
        for (k, q) in mgf_arguments().into_iter().enumerate() {
            let p = &model.params;
            let analytic = solver.mgf_joint(q, contract.tenor, 0.0, p.v0, p.lambda0).unwrap();
            let re: Vec<f64> = run.transforms.iter().map(|t| t[k].re).collect();
            let im: Vec<f64> = run.transforms.iter().map(|t| t[k].im).collect();
            let (re, im) = (McStrike::from_samples(&re, false), McStrike::from_samples(&im, false));
            let se = re.standard_error.hypot(im.standard_error);
            let z = (c(re.estimate, im.estimate) - analytic).norm() / se;
            worst = worst.max(z);
            if z > 3.0 {
                failures.push(format!("{} q{}: |diff|/se = {z:.2}", run.name, k + 1));
            }
        }
    }
    let runtime = runs.iter().map(|r| r.elapsed).sum::<Duration>() + started.elapsed();
    let fast = runtime < Duration::from_secs(300);
    verdict(
        failures.is_empty() && fast,
        format!(
            "15 comparisons, worst |diff|/se = {worst:.2}, runtime {:.0}s (limit 300s){}",
            runtime.as_secs_f64(),
            if failures.is_empty() { String::new() } else { format!("; failed: {}", failures.join(", ")) }
        ),
    )
}

fn criterion_2(runs: &[OracleRun], models: &[(&str, Model)], contract: SwapContract) -> Verdict {
    let started = Instant::now();
    let mut lines = Vec::new();
    let mut pass = true;
    for (run, (_, model)) in runs.iter().zip(models) {
        let pricer = Pricer::new(model, QuadratureConfig::default()).unwrap();
        let discrete = pricer.discrete_strike(&contract).unwrap().strike;
        let continuous = pricer.continuous_strike(&contract).unwrap().strike;
        let mc = McStrike::from_samples(&run.rv, false);
        let mc_cont = McStrike::from_samples(&run.average_vol, false);
        let z1 = (mc.estimate - discrete) / mc.standard_error;
        let z2 = (mc_cont.estimate - continuous) / mc_cont.standard_error;
        pass &= z1.abs() <= 3.0 && z2.abs() <= 3.0;
        lines.push(format!(
            "{}: discrete {discrete:.4} vs {:.4}±{:.4} (z {z1:+.2}), continuous {continuous:.4} vs {:.4}±{:.4} (z {z2:+.2})",
            run.name, mc.estimate, mc.standard_error, mc_cont.estimate, mc_cont.standard_error
        ));
    }
    let runtime = runs.iter().map(|r| r.elapsed).sum::<Duration>() + started.elapsed();
    let fast = runtime < Duration::from_secs(600);
    verdict(
        pass && fast,
        format!("{}; runtime {:.0}s (limit 600s)", lines.join("; "), runtime.as_secs_f64()),
    )
}

fn criterion_3() -> Verdict {
    let mut checks = Vec::new();

    let det = ModelParams {
        v0: 0.04,
        theta_v: 0.04,
        sigma_v: 0.0,
        sigma_l: 0.0,
        d: 0.05,
        ..ModelParams::baseline()
    };
    let model = Model::new(det, JumpSpec::None).unwrap();
    let strike = Pricer::new(&model, QuadratureConfig::default())
        .unwrap()
        .continuous_strike(&SwapContract::new(1.0, 252).unwrap())
        .unwrap()
        .strike;
    checks.push(("deterministic continuous strike", (strike - 20.0).abs(), 1e-8));

    let jumped = Model::new(ModelParams::baseline(), JumpSpec::DoubleExponential(DoubleExponential::default())).unwrap();
    let q = FrequencyArgument::new(c(0.3, 1.7), c(-0.4, 0.2), c(0.1, -0.3), c(0.05, 0.5));
    let at_zero = solve_affine(&jumped, q, 0.0).unwrap();
    let ic_err = (at_zero.c - q.phi).norm() + (at_zero.d - q.psi).norm() + (at_zero.e - q.chi).norm();
    checks.push(("affine initial conditions", ic_err, f64::EPSILON));

    let one = c(1.0, 0.0);
    let zero = c(0.0, 0.0);
    let ge = Model::new(ModelParams::baseline(), JumpSpec::GaussianExponential(GaussianExponential::default())).unwrap();
    let lambda_err = jumped.big_lambda(one, zero).unwrap().norm().max(ge.big_lambda(one, zero).unwrap().norm());
    checks.push(("jump term at (1, 0)", lambda_err, 1e-14));

    checks.push(("mu_2", (mu_u(2.0) - 1.0).abs(), 1e-14));
    checks.push(("mu_1", (mu_u(1.0) - (2.0 / PI).sqrt()).abs(), 1e-14));

    let pass = checks.iter().all(|(_, err, tol)| err <= tol);
    let detail = checks
        .iter()
        .map(|(name, err, tol)| format!("{name} err {err:.1e} (tol {tol:.0e})"))
        .collect::<Vec<_>>()
        .join("; ");
    verdict(pass, detail)
}

fn criterion_4() -> Verdict {
    let model = Model::new(ModelParams::baseline(), JumpSpec::DoubleExponential(DoubleExponential::default())).unwrap();
    let pricer = Pricer::new(&model, QuadratureConfig::default()).unwrap();
    let strikes: Vec<f64> = [4, 12, 52, 252, 1000]
        .iter()
        .map(|&n| pricer.discrete_strike(&SwapContract::new(1.0, n).unwrap()).unwrap().strike)
        .collect();
    let continuous = pricer.continuous_strike(&SwapContract::new(1.0, 1000).unwrap()).unwrap().strike;
    let decreasing = strikes.windows(2).all(|w| w[1] < w[0]);
    let gap = (strikes[4] - continuous).abs() / continuous;
    verdict(
        decreasing && gap < 0.005,
        format!(
            "N = 4..1000: {}; continuous {continuous:.6}; final gap {:.3}% (limit 0.5%)",
            strikes.iter().map(|k| format!("{k:.6}")).collect::<Vec<_>>().join(" > "),
            100.0 * gap
        ),
    )
}

/// Discrete strikes over the grid of a shipped one-axis sweep config.
fn sweep_strikes(file: &str) -> (String, Vec<f64>, Vec<f64>) {
    let cfg = RunConfig::load(&examples().join(file)).unwrap();
    let resolved = cfg.resolve(Command::Sweep).unwrap();
    let sweep = resolved.sweep.clone().unwrap();
    let strikes = sweep
        .grid
        .iter()
        .map(|&x| {
            let point = resolved.with_axis(sweep.axis, x).unwrap();
            let model = point.model().unwrap();
            Pricer::new(&model, point.quad)
                .unwrap()
                .discrete_strike(&point.contract)
                .map(|r| r.strike)
                .unwrap_or(f64::NAN)
        })
        .collect();
    (sweep.axis.key().to_string(), sweep.grid, strikes)
}

fn criterion_5() -> Verdict {
    let mut pass = true;
    let mut lines = Vec::new();
    for (file, increasing) in [
        ("figure3_kappaL.json", true),
        ("figure3_thetaL.json", true),
        ("figure3_sigmaL.json", false),
        ("figure2_p.json", false),
        ("figure2_pprime.json", false),
    ] {
        let (axis, _, k) = sweep_strikes(file);
        let ok = k.windows(2).all(|w| if increasing { w[1] > w[0] } else { w[1] < w[0] });
        let observed = if k.windows(2).all(|w| w[1] > w[0]) {
            "increasing"
        } else if k.windows(2).all(|w| w[1] < w[0]) {
            "decreasing"
        } else {
            "not monotone"
        };
        pass &= ok;
        lines.push(format!(
            "{axis}: expected {}, observed {observed} ({:.8} .. {:.8}){}",
            if increasing { "increasing" } else { "decreasing" },
            k[0],
            k[k.len() - 1],
            if ok { "" } else { " FAIL" }
        ));
    }
    verdict(pass, lines.join("; "))
}

fn criterion_6() -> Verdict {
    let model = Model::new(ModelParams::baseline(), JumpSpec::DoubleExponential(DoubleExponential::default())).unwrap();
    let contract = SwapContract::new(1.0, 252).unwrap();
    let config = SimConfig {
        paths: 100_000,
        steps_per_interval: 2,
        seed: 606,
        ..SimConfig::default()
    };
    let bound = (PI / 2.0).sqrt();
    let violations = Simulator::new(&model, contract, config)
        .unwrap()
        .map_paths(|v| {
            let r: Vec<f64> = v.simple_returns().collect();
            realized_volatility(&r, &contract) > bound * realized_volatility_star(&r, &contract)
        })
        .into_iter()
        .filter(|v| *v)
        .count();
    verdict(violations == 0, format!("{violations} violations of RV <= sqrt(pi/2) RV* on 100000 paths"))
}

fn criterion_7() -> Verdict {
    let model = Model::new(ModelParams::baseline(), JumpSpec::DoubleExponential(DoubleExponential::default())).unwrap();
    let contract = SwapContract::new(1.0, 252).unwrap();
    let orders = [0.5, 1.0, 1.5];
    let mean_errors = |steps: usize| -> Vec<f64> {
        let config = SimConfig {
            paths: 40_000,
            steps_per_interval: steps,
            seed: 707,
            ..SimConfig::default()
        };
        let per_path = Simulator::new(&model, contract, config)
            .unwrap()
            .map_paths(|v| orders.map(|u| power_variation(v, u, 1).unwrap().relative_error()));
        (0..orders.len())
            .map(|k| per_path.iter().map(|e| e[k]).sum::<f64>() / per_path.len() as f64)
            .collect()
    };
    let coarse = mean_errors(1);
    let fine = mean_errors(4);
    let mut pass = true;
    let mut lines = Vec::new();
    for (k, u) in orders.iter().enumerate() {
        let ratio = fine[k] / coarse[k];
        pass &= (0.4..=0.6).contains(&ratio);
        lines.push(format!("u={u}: {:.5} -> {:.5} (ratio {ratio:.3})", coarse[k], fine[k]));
    }
    verdict(pass, format!("{}; required ratio 0.5 ± 20%", lines.join("; ")))
}

fn run_cli(args: &[&str], out: &Path) -> Vec<u8> {
    let status = Process::new(env!("CARGO_BIN_EXE_volswap"))
        .args(args)
        .arg("--out")
        .arg(out)
        .arg("--quiet")
        .status()
        .expect("binary runs");
    assert!(status.success(), "volswap {args:?} failed");
    std::fs::read(out).unwrap()
}

fn criterion_8() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let ex = examples();
    let path = |f: &str| ex.join(f).to_string_lossy().into_owned();
    let runs: Vec<(&str, Vec<String>)> = vec![
        ("price", vec!["price".into(), "--config".into(), path("deterministic.json")]),
        ("sweep", vec!["sweep".into(), "--config".into(), path("figure1_sampling.json")]),
        ("mc", vec!["mc".into(), "--config".into(), path("mc_baseline.json"), "--paths".into(), "4000".into()]),
        (
            "powervar",
            vec!["powervar".into(), "--config".into(), path("powervar.json"), "--paths".into(), "1000".into()],
        ),
    ];
    let mut identical = Vec::new();
    for (name, args) in &runs {
        let mut args: Vec<&str> = args.iter().map(String::as_str).collect();
        args.extend(["--seed", "4242"]);
        let a = run_cli(&args, &dir.path().join(format!("{name}_a.csv")));
        let b = run_cli(&args, &dir.path().join(format!("{name}_b.csv")));
        identical.push((*name, a == b && !a.is_empty()));
    }
    verdict(
        identical.iter().all(|(_, same)| *same),
        identical
            .iter()
            .map(|(n, same)| format!("{n}: {}", if *same { "byte-identical" } else { "DIFFERENT" }))
            .collect::<Vec<_>>()
            .join("; "),
    )
}

fn criterion_9() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let mut pass = true;
    let mut lines = Vec::new();
    for file in ["table1_eta1_eta2.json", "table2_eta3_eta4.json"] {
        let out = dir.path().join(format!("{file}.csv"));
        let config = examples().join(file);
        let bytes = run_cli(&["sweep", "--config", config.to_str().unwrap()], &out);
        let text = String::from_utf8(bytes).unwrap();
        let rows: Vec<Vec<f64>> = text
            .lines()
            .skip(1)
            .map(|l| l.split(',').skip(1).map(|v| v.parse().unwrap()).collect())
            .collect();
        let shape_ok = rows.len() == 7 && rows.iter().all(|r| r.len() == 7);
        let all: Vec<f64> = rows.into_iter().flatten().collect();
        let lo = all.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = all.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let spread = (hi - lo) / lo;
        pass &= shape_ok && spread < 0.01;
        lines.push(format!(
            "{file}: {} matrix, {lo:.4}..{hi:.4}, spread {:.3}%",
            if shape_ok { "7x7" } else { "malformed" },
            100.0 * spread
        ));
    }
    verdict(pass, format!("{} (limit 1%)", lines.join("; ")))
}

fn main() {
    // libtest-style flags are accepted and ignored.
    let started = Instant::now();
    let contract = SwapContract::new(1.0, 252).unwrap();
    let models = oracle_sets();
    let runs: Vec<OracleRun> = models
        .iter()
        .map(|(name, model)| simulate_oracle(name, model, contract))
        .collect();

    let criteria: Vec<(&str, Box<dyn Fn() -> Verdict + '_>)> = vec![
        ("MGF oracle (1e6 paths, 2520 substeps/year)", Box::new(|| criterion_1(&runs, &models, contract))),
        ("strike oracle, discrete and continuous", Box::new(|| criterion_2(&runs, &models, contract))),
        ("trivial closed forms", Box::new(criterion_3)),
        ("discrete-to-continuous convergence", Box::new(criterion_4)),
        ("sensitivity signs over shipped sweep grids", Box::new(criterion_5)),
        ("pathwise RV <= sqrt(pi/2) RV*", Box::new(criterion_6)),
        ("power-variation convergence", Box::new(criterion_7)),
        ("CLI determinism", Box::new(criterion_8)),
        ("table shape and spread", Box::new(criterion_9)),
    ];

    let mut failed = 0;
    for (i, (title, check)) in criteria.iter().enumerate() {
        let v = check();
        if !v.pass {
            failed += 1;
        }
        println!(
            "acceptance criterion {} [{}] {title}: {}",
            i + 1,
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed ({:.0}s)",
        criteria.len() - failed,
        started.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
