//! `volswap` command-line front end.
//!
//! Exit codes: 0 on success, 2 for configuration or validation errors,
//! 3 for numerical failures.

pub mod config;
pub mod output;

use std::ffi::OsString;
use std::fs::File;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::montecarlo::{
    mu_u, power_variation, realized_volatility, write_path_summaries, McStrike,
    PathSummary, SimConfig, Simulator,
};
use crate::pricing::Pricer;

use config::{Command, Resolved, RunConfig, SweepAxis};
use output::{sig10, Table};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "volswap", version, about = "Fair strikes of discretely sampled volatility swaps")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Discrete, continuous and (optionally) Monte Carlo strikes.
    Price(Flags),
    /// Strikes over a one- or two-dimensional parameter grid.
    Sweep(Flags),
    /// Monte Carlo estimates of RV, RV* and the continuous strike.
    Mc(Flags),
    /// Realized power variation against its volatility limit.
    Powervar(Flags),
}

#[derive(Debug, Args)]
struct Flags {
    /// JSON configuration file; the baseline is used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// CSV destination (overrides the `output` key); stdout when neither is set.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    paths: Option<usize>,
    /// Suppress the human-readable summary.
    #[arg(long)]
    quiet: bool,
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let (command, flags) = match cli.command {
        Cmd::Price(f) => (Command::Price, f),
        Cmd::Sweep(f) => (Command::Sweep, f),
        Cmd::Mc(f) => (Command::Mc, f),
        Cmd::Powervar(f) => (Command::PowerVar, f),
    };
    match execute(command, &flags) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.kind());
            if e.is_config() {
                EXIT_CONFIG
            } else {
                EXIT_NUMERICAL
            }
        }
    }
}

fn execute(command: Command, flags: &Flags) -> Result<()> {
    let mut cfg = match &flags.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if flags.seed.is_some() {
        cfg.seed = flags.seed;
    }
    if flags.paths.is_some() {
        cfg.paths = flags.paths;
    }
    let resolved = cfg.resolve(command)?;
    let model = resolved.model()?;
    for warning in model.warnings() {
        eprintln!("warning: {warning}");
    }
    let table = match command {
        Command::Price => price(&resolved)?,
        Command::Sweep => sweep(&resolved)?,
        Command::Mc => mc(&resolved)?,
        Command::PowerVar => powervar(&resolved)?,
    };
    let out = flags.out.as_deref().or(resolved.output.as_deref());
    if !flags.quiet && out.is_some() {
        println!("{}", table.render());
    }
    table.emit(out)
}

/// Strike estimates of one resolved configuration.
struct Strikes {
    discrete: f64,
    continuous: Option<f64>,
    mc_rv: Option<McStrike>,
    mc_continuous: Option<McStrike>,
}

fn strikes(r: &Resolved, continuous: bool, monte_carlo: bool) -> Result<Strikes> {
    let model = r.model()?;
    let pricer = Pricer::new(&model, r.quad)?;
    let discrete = pricer.discrete_strike(&r.contract)?.strike;
    let continuous = if continuous {
        Some(pricer.continuous_strike(&r.contract)?.strike)
    } else {
        None
    };
    let (mc_rv, mc_continuous) = if monte_carlo {
        let (a, b) = mc_strikes(r)?;
        (Some(a), Some(b))
    } else {
        (None, None)
    };
    Ok(Strikes {
        discrete,
        continuous,
        mc_rv,
        mc_continuous,
    })
}

/// MC strike of RV and of the continuously sampled volatility.
fn mc_strikes(r: &Resolved) -> Result<(McStrike, McStrike)> {
    let model = r.model()?;
    let contract = r.contract;
    let sim = Simulator::new(&model, contract, r.sim)?;
    let samples = sim.map_paths(|v| {
        let returns: Vec<f64> = v.simple_returns().collect();
        (
            realized_volatility(&returns, &contract),
            contract.vol_points_scale * v.average_volatility(),
        )
    });
    let rv: Vec<f64> = samples.iter().map(|s| s.0).collect();
    let avg: Vec<f64> = samples.iter().map(|s| s.1).collect();
    Ok((
        McStrike::from_samples(&rv, r.sim.antithetic),
        McStrike::from_samples(&avg, r.sim.antithetic),
    ))
}

fn strike_header(first: &str, r: &Resolved, continuous: bool) -> Vec<String> {
    let mut header = vec![first.to_string(), "discrete".to_string()];
    if continuous {
        header.push("continuous".into());
    }
    if r.monte_carlo {
        header.extend(["mc".into(), "mc_se".into(), "mc_continuous".into(), "mc_continuous_se".into()]);
    }
    header
}

fn strike_cells(s: &Strikes) -> Vec<String> {
    let mut row = vec![sig10(s.discrete)];
    if let Some(c) = s.continuous {
        row.push(sig10(c));
    }
    if let (Some(a), Some(b)) = (s.mc_rv, s.mc_continuous) {
        row.extend([
            sig10(a.estimate),
            sig10(a.standard_error),
            sig10(b.estimate),
            sig10(b.standard_error),
        ]);
    }
    row
}

fn price(r: &Resolved) -> Result<Table> {
    let s = strikes(r, r.continuous, r.monte_carlo)?;
    let mut header = strike_header("T", r, r.continuous);
    header.insert(1, "N".into());
    let mut table = Table::new(header);
    let mut row = vec![sig10(r.contract.tenor), r.contract.intervals.to_string()];
    row.extend(strike_cells(&s));
    table.push(row);
    Ok(table)
}

fn axis_cell(axis: SweepAxis, value: f64) -> String {
    if axis == SweepAxis::Intervals {
        format!("{}", value as usize)
    } else {
        sig10(value)
    }
}

fn sweep(r: &Resolved) -> Result<Table> {
    let sweep = r.sweep.as_ref().ok_or_else(|| Error::Config("missing sweep".into()))?;
    match &sweep.second {
        None => {
            let rows: Vec<Result<Vec<String>>> = sweep
                .grid
                .par_iter()
                .map(|&x| {
                    let point = r.with_axis(sweep.axis, x)?;
                    let mut row = vec![axis_cell(sweep.axis, x)];
                    row.extend(strike_cells(&strikes(&point, r.continuous, r.monte_carlo)?));
                    Ok(row)
                })
                .collect();
            let mut table = Table::new(strike_header(sweep.axis.key(), r, r.continuous));
            for row in rows {
                table.push(row?);
            }
            Ok(table)
        }
        Some((axis2, grid2)) => {
            let points: Vec<(f64, f64)> = sweep
                .grid
                .iter()
                .flat_map(|&a| grid2.iter().map(move |&b| (a, b)))
                .collect();
            let values: Vec<Result<f64>> = points
                .par_iter()
                .map(|&(a, b)| {
                    let point = r.with_axis(sweep.axis, a)?.with_axis(*axis2, b)?;
                    let model = point.model()?;
                    Ok(Pricer::new(&model, point.quad)?.discrete_strike(&point.contract)?.strike)
                })
                .collect();
            let mut header = vec![format!("{}\\{}", sweep.axis.key(), axis2.key())];
            header.extend(grid2.iter().map(|&b| axis_cell(*axis2, b)));
            let mut table = Table::new(header);
            let mut values = values.into_iter();
            for &a in &sweep.grid {
                let mut row = vec![axis_cell(sweep.axis, a)];
                for _ in grid2 {
                    row.push(sig10(values.next().expect("one value per grid point")?));
                }
                table.push(row);
            }
            Ok(table)
        }
    }
}

fn mc(r: &Resolved) -> Result<Table> {
    let model = r.model()?;
    let contract = r.contract;
    let sim = Simulator::new(&model, contract, r.sim)?;
    let growth = ((model.params.r - model.params.d) * contract.tenor).exp();
    let samples = sim.map_paths(|v| {
        let summary = PathSummary::from_view(v, &contract);
        (
            summary,
            contract.vol_points_scale * v.average_volatility(),
            summary.terminal_log_price.exp() / growth,
        )
    });
    if let Some(path) = &r.path_summary {
        let file =
            File::create(path).map_err(|e| Error::Config(format!("cannot create {}: {e}", path.display())))?;
        let rows: Vec<PathSummary> = samples.iter().map(|s| s.0).collect();
        write_path_summaries(&rows, file)?;
    }
    let column = |f: &dyn Fn(&(PathSummary, f64, f64)) -> f64| -> McStrike {
        McStrike::from_samples(&samples.iter().map(f).collect::<Vec<_>>(), r.sim.antithetic)
    };
    let bound = (std::f64::consts::PI / 2.0).sqrt();
    let violations = samples.iter().filter(|s| s.0.rv > bound * s.0.rv_star).count();
    let mut table = Table::new(["estimator", "estimate", "standard_error", "paths"]);
    for (name, est) in [
        ("RV", column(&|s| s.0.rv)),
        ("RV*", column(&|s| s.0.rv_star)),
        ("continuous", column(&|s| s.1)),
        ("discounted_terminal_price", column(&|s| s.2)),
    ] {
        table.push(vec![
            name.to_string(),
            sig10(est.estimate),
            sig10(est.standard_error),
            est.paths.to_string(),
        ]);
    }
    table.push(vec![
        "rv_bound_violations".into(),
        violations.to_string(),
        "0".into(),
        samples.len().to_string(),
    ]);
    Ok(table)
}

fn powervar(r: &Resolved) -> Result<Table> {
    let model = r.model()?;
    let mut table = Table::new([
        "u",
        "steps_per_interval",
        "substep",
        "mu_u",
        "mean_estimate",
        "mean_reference",
        "mean_relative_error",
        "standard_error",
    ]);
    let orders = &r.power_orders;
    for level in 0..=r.power_refinements {
        let steps = r.sim.steps_per_interval * 4usize.pow(level as u32);
        let config = SimConfig {
            steps_per_interval: steps,
            ..r.sim
        };
        let sim = Simulator::new(&model, r.contract, config)?;
        let per_path: Vec<Result<Vec<(f64, f64, f64)>>> = sim.map_paths(|v| {
            orders
                .iter()
                .map(|&u| {
                    let pv = power_variation(v, u, 1)?;
                    Ok((pv.estimate, pv.reference, pv.relative_error()))
                })
                .collect()
        });
        let per_path: Vec<Vec<(f64, f64, f64)>> = per_path.into_iter().collect::<Result<_>>()?;
        for (k, &u) in orders.iter().enumerate() {
            let pick = |f: fn(&(f64, f64, f64)) -> f64| -> McStrike {
                McStrike::from_samples(&per_path.iter().map(|p| f(&p[k])).collect::<Vec<_>>(), r.sim.antithetic)
            };
            let err = pick(|t| t.2);
            table.push(vec![
                sig10(u),
                steps.to_string(),
                sig10(sim.substep()),
                sig10(mu_u(u)),
                sig10(pick(|t| t.0).estimate),
                sig10(pick(|t| t.1).estimate),
                sig10(err.estimate),
                sig10(err.standard_error),
            ]);
        }
    }
    Ok(table)
}
