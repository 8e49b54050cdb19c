//! Command-line front end: config in, CSV out.
//!
//! Exit codes: 0 on success, 1 when an input is rejected, 2 when a numerical
//! procedure fails (a non-converging quadrature or contour, a rejected fit, or
//! a `crosscheck` above tolerance).

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};

use crate::asymptotics::{bs_limit_check_with, default_tau_grid, estimate_expansion};
use crate::config::{
    Method, RunConfig, DEFAULT_CROSSCHECK_TOLERANCE, DEFAULT_MC_PATHS, DEFAULT_MC_SEED,
};
use crate::error::{Error, Result};
use crate::kernel::{
    backward_step, min_variance_delta, negativity_tolerance, price_recursive, CallPayoff, Payoff,
    PriceGrid, PricingKernel,
};
use crate::lognormal::{price_closed, LognormalParams};
use crate::market_model::{feasibility_interval, MarketPath, MarketStep};
use crate::mc_oracle::{fit_optimal_delta, simulate_hedged_step, HedgeReport, SimConfig};
use crate::mellin::{price_mellin_many, GreenFunction};
use crate::negativity::{reports_to_csv, scan_all};
use crate::par;
use crate::report::{format_number, CsvTable};

/// Step counts swept by `bs-converge` unless the config lists its own.
pub const DEFAULT_CONVERGENCE_STEPS: [usize; 6] = [8, 16, 32, 64, 128, 256];
pub const DEFAULT_EXPANSION_ORDER: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// `s,V` at k = n.
    Price,
    /// `s,delta`: minimum-variance hedge held over the last period.
    Delta,
    /// Rate interval keeping prices nonnegative, and a verdict for r.
    Feasibility,
    /// Recursive, Mellin and closed-form prices side by side.
    Crosscheck,
    /// Negative-value sets of every V_k.
    XiScan,
    /// Distance to the Black–Scholes price as the period shrinks.
    BsConverge,
    /// Monte Carlo statistics of the one-period hedged portfolio.
    Simulate,
    /// Polynomial fit of the price in the hedging period.
    Asymptote,
}

#[derive(Debug, Parser)]
#[command(name = "dhedge", version, about = "Discrete-hedging option pricer")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    #[arg(long)]
    pub config: PathBuf,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// recursive | mellin | green | closed (overrides the config).
    #[arg(long)]
    pub method: Option<String>,
    /// `crosscheck` failure threshold on the relative difference.
    #[arg(long)]
    pub tolerance: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Result of one command: the table, progress notes, and an optional failure
/// raised after the table was complete.
#[derive(Debug)]
pub struct Outcome {
    pub table: CsvTable,
    pub notes: Vec<String>,
    pub failure: Option<Error>,
}

impl Outcome {
    fn table(table: CsvTable) -> Self {
        Self {
            table,
            notes: Vec::new(),
            failure: None,
        }
    }

    fn note(mut self, note: String) -> Self {
        self.notes.push(note);
        self
    }
}

pub fn exit_code(e: &Error) -> i32 {
    if e.is_numeric() {
        2
    } else {
        1
    }
}

/// Parses `args` (program name first), runs the command and returns the exit
/// code. The table goes to `--out` or `stdout`; notes and errors to `stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match run_cli(&cli, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

fn run_cli(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let mut cfg = RunConfig::load(&cli.config)?;
    if let Some(m) = &cli.method {
        m.parse::<Method>()?;
        cfg.method = Some(m.clone());
    }
    if let Some(t) = cli.tolerance {
        cfg.crosscheck.tolerance = Some(t);
    }
    if let Some(s) = cli.seed {
        cfg.mc.seed = Some(s);
    }
    let out = cli
        .out
        .clone()
        .or_else(|| cfg.out.as_ref().map(PathBuf::from));
    let outcome = execute(cli.command, &cfg)?;
    match out {
        Some(path) => outcome.table.write_to(&path)?,
        None => stdout.write_all(outcome.table.render().as_bytes())?,
    }
    for n in &outcome.notes {
        writeln!(stderr, "{n}")?;
    }
    match outcome.failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

/// Runs `command` against a parsed configuration.
pub fn execute(command: Command, cfg: &RunConfig) -> Result<Outcome> {
    match command {
        Command::Price => price(cfg),
        Command::Delta => delta(cfg),
        Command::Feasibility => feasibility(cfg),
        Command::Crosscheck => crosscheck(cfg),
        Command::XiScan => xi_scan(cfg),
        Command::BsConverge => bs_converge(cfg),
        Command::Simulate => simulate(cfg),
        Command::Asymptote => asymptote(cfg),
    }
}

fn call(cfg: &RunConfig) -> CallPayoff {
    CallPayoff {
        strike: cfg.model.strike,
    }
}

fn collect(values: Vec<Result<f64>>) -> Result<Vec<f64>> {
    values.into_iter().collect()
}

/// `V_n` at every spot by `method`.
fn price_at(
    method: Method,
    path: &MarketPath,
    closed: impl Fn() -> Result<LognormalParams>,
    cfg: &RunConfig,
    spots: &[f64],
) -> Result<Vec<f64>> {
    let payoff = call(cfg);
    let n = path.len();
    if n == 0 {
        return Ok(spots.iter().map(|&s| payoff.value(s)).collect());
    }
    match method {
        Method::Recursive => {
            let grids = price_recursive(path, &payoff, &cfg.grid_spec())?;
            Ok(spots.iter().map(|&s| grids[n].value_at(s)).collect())
        }
        Method::Mellin => price_mellin_many(path, n, spots, &cfg.mellin_line()?),
        Method::Green => {
            GreenFunction::build(path, n, &cfg.mellin_line()?)?.price_many(&payoff, spots)
        }
        Method::Closed => {
            let p = closed()?;
            collect(par::map_slice(spots, |&s| price_closed(&p, s)))
        }
    }
}

fn price(cfg: &RunConfig) -> Result<Outcome> {
    let spots = cfg.spots();
    let values = price_at(cfg.method()?, &cfg.path()?, || cfg.lognormal(), cfg, &spots)?;
    let mut t = CsvTable::new(["s", "V"]);
    for (s, v) in spots.iter().zip(&values) {
        t.push_numbers(&[*s, *v]);
    }
    Ok(Outcome::table(t))
}

/// `V_{n-1}` on the grid and the kernel of the last period.
fn last_period(cfg: &RunConfig) -> Result<(MarketPath, PriceGrid, PricingKernel)> {
    let path = cfg.path()?;
    let n = path.len();
    if n == 0 {
        return Err(Error::invalid(
            "n",
            0.0,
            "hedging needs at least one period (n >= 1)",
        ));
    }
    let inner = MarketPath::new(path.steps()[..n - 1].to_vec(), path.strike())?;
    let grids = price_recursive(&inner, &call(cfg), &cfg.grid_spec())?;
    let grid = grids.into_iter().next_back().expect("non-empty");
    let kern = PricingKernel::new(&path.steps()[n - 1])?;
    Ok((path, grid, kern))
}

fn delta(cfg: &RunConfig) -> Result<Outcome> {
    let (_, grid, kern) = last_period(cfg)?;
    let spots = cfg.spots();
    let deltas = collect(par::map_slice(&spots, |&s| {
        min_variance_delta(&grid, s, &kern)
    }))?;
    let mut t = CsvTable::new(["s", "delta"]);
    for (s, d) in spots.iter().zip(&deltas) {
        t.push_numbers(&[*s, *d]);
    }
    Ok(Outcome::table(t))
}

fn feasibility(cfg: &RunConfig) -> Result<Outcome> {
    let step = MarketStep::new(cfg.model.r, cfg.model.tau, cfg.distribution()?)?;
    let fi = feasibility_interval(&step)?;
    let r = cfg.model.r;
    let verdict = if fi.contains(r) {
        "feasible"
    } else {
        "infeasible"
    };
    let mut t = CsvTable::new(["r_lo", "r_hi", "r", "verdict"]);
    t.push_row(vec![
        format_number(fi.r_lo),
        format_number(fi.r_hi),
        format_number(r),
        verdict.to_string(),
    ]);
    Ok(Outcome::table(t).note(format!(
        "feasibility interval [{}, {}]: r = {r} is {verdict}",
        round_display(fi.r_lo),
        round_display(fi.r_hi)
    )))
}

/// Twelve significant digits, trailing zeros dropped.
fn round_display(x: f64) -> String {
    format!("{}", format!("{x:.11e}").parse::<f64>().unwrap_or(x))
}

fn crosscheck(cfg: &RunConfig) -> Result<Outcome> {
    let tol = cfg
        .crosscheck
        .tolerance
        .unwrap_or(DEFAULT_CROSSCHECK_TOLERANCE);
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::invalid("tolerance", tol, "must be finite and > 0"));
    }
    let path = cfg.path()?;
    let spots = cfg.spots();
    let recursive = price_at(Method::Recursive, &path, || cfg.lognormal(), cfg, &spots)?;
    let mellin = price_at(Method::Mellin, &path, || cfg.lognormal(), cfg, &spots)?;
    let closed = match cfg.lognormal() {
        Ok(_) => Some(price_at(
            Method::Closed,
            &path,
            || cfg.lognormal(),
            cfg,
            &spots,
        )?),
        Err(Error::Unsupported(_)) => None,
        Err(e) => return Err(e),
    };
    let floor = 1e-8 * cfg.model.strike;
    let mut t = CsvTable::new(["s", "V_recursive", "V_mellin", "V_closed", "max_rel_diff"]);
    let mut worst = (0.0f64, spots.first().copied().unwrap_or(f64::NAN));
    for (i, &s) in spots.iter().enumerate() {
        let mut vals = vec![recursive[i], mellin[i]];
        if let Some(c) = &closed {
            vals.push(c[i]);
        }
        let reference = *vals.last().expect("non-empty");
        let spread = vals.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b))
            - vals.iter().fold(f64::INFINITY, |a, &b| a.min(b));
        let rel = spread / reference.abs().max(floor);
        if !(rel <= worst.0) {
            worst = (rel, s);
        }
        t.push_row(vec![
            format_number(s),
            format_number(recursive[i]),
            format_number(mellin[i]),
            closed
                .as_ref()
                .map(|c| format_number(c[i]))
                .unwrap_or_default(),
            format_number(rel),
        ]);
    }
    let mut outcome = Outcome::table(t).note(format!(
        "max relative difference {:e} at s = {}",
        worst.0, worst.1
    ));
    if !(worst.0 <= tol) {
        outcome.failure = Some(Error::Convergence(format!(
            "methods disagree: max relative difference {:e} at s = {} exceeds tolerance {tol:e}",
            worst.0, worst.1
        )));
    }
    Ok(outcome)
}

fn xi_scan(cfg: &RunConfig) -> Result<Outcome> {
    let path = cfg.path()?;
    let grids = price_recursive(&path, &call(cfg), &cfg.grid_spec())?;
    let eps = cfg
        .negativity
        .eps
        .unwrap_or_else(|| negativity_tolerance(cfg.model.strike));
    let reports = scan_all(&grids, eps);
    let nonempty = reports.iter().filter(|r| !r.is_empty()).count();
    Ok(Outcome::table(reports_to_csv(&reports)).note(format!(
        "{nonempty} of {} steps have a negative set below -{eps:e}",
        reports.len()
    )))
}

/// Method for the small-period commands: the closed form unless overridden.
fn limit_method(cfg: &RunConfig) -> Result<Method> {
    match &cfg.method {
        Some(_) => cfg.method(),
        None if cfg.lognormal().is_ok() => Ok(Method::Closed),
        None => Ok(Method::Recursive),
    }
}

fn single_spot(cfg: &RunConfig) -> Result<f64> {
    match cfg.spots().as_slice() {
        [s] => Ok(*s),
        other => Err(Error::Config(format!(
            "this command takes a single spot, got {}",
            other.len()
        ))),
    }
}

/// `V(t, s)` with hedging period `t / n` by `method`.
fn price_cut(cfg: &RunConfig, method: Method, t: f64, n: usize, s: f64) -> Result<f64> {
    let path = cfg.path_with_steps(t / n as f64, n)?;
    let closed = || cfg.lognormal().and_then(|p| p.with_steps(t, n));
    Ok(price_at(method, &path, closed, cfg, &[s])?[0])
}

fn bs_converge(cfg: &RunConfig) -> Result<Outcome> {
    let base = cfg.lognormal()?;
    let method = limit_method(cfg)?;
    let s = single_spot(cfg)?;
    let t = cfg.horizon();
    let steps = cfg
        .limit
        .steps
        .clone()
        .unwrap_or_else(|| DEFAULT_CONVERGENCE_STEPS.to_vec());
    let report = bs_limit_check_with(&base, t, &steps, s, |p| price_cut(cfg, method, t, p.n, s))?;
    let note = match report.order {
        Some(o) => format!(
            "fitted order {o:.4} against Black-Scholes {}",
            report.reference
        ),
        None => "all errors at round-off level; order undefined".to_string(),
    };
    Ok(Outcome::table(report.to_csv()).note(note))
}

fn asymptote(cfg: &RunConfig) -> Result<Outcome> {
    let method = limit_method(cfg)?;
    let s = single_spot(cfg)?;
    let t = cfg.horizon();
    let order = cfg.limit.order.unwrap_or(DEFAULT_EXPANSION_ORDER);
    let taus = match &cfg.limit.steps {
        Some(ns) => ns.iter().map(|&n| t / n as f64).collect(),
        None => default_tau_grid(t),
    };
    let est = estimate_expansion(
        |tau| price_cut(cfg, method, t, (t / tau).round() as usize, s),
        t,
        s,
        order,
        &taus,
    )?;
    Ok(Outcome::table(est.to_csv()).note(format!("residual norm {:e}", est.residual_norm())))
}

fn simulate(cfg: &RunConfig) -> Result<Outcome> {
    let (path, grid, kern) = last_period(cfg)?;
    let n = path.len();
    let step = &path.steps()[n - 1];
    let next = backward_step(&grid, &kern)?;
    let paths = cfg.mc.paths.unwrap_or(DEFAULT_MC_PATHS);
    let seed = cfg.mc.seed.unwrap_or(DEFAULT_MC_SEED);
    let v = |y: f64| grid.value_at(y);
    let growth = (step.r * step.tau).exp();

    let mut t = CsvTable::new([
        "s",
        "kind",
        "delta",
        "mean",
        "var",
        "stderr",
        "var_stderr",
        "delta_stderr",
        "predicted_mean",
    ]);
    let mut push = |s: f64, kind: &str, r: &HedgeReport, predicted: Option<f64>| {
        let opt = |x: Option<f64>| x.map(format_number).unwrap_or_default();
        t.push_row(vec![
            format_number(s),
            kind.to_string(),
            format_number(r.delta),
            format_number(r.mean_pi),
            format_number(r.var_pi),
            format_number(r.stderr),
            format_number(r.var_stderr),
            opt(r.fitted_delta_stderr),
            opt(predicted),
        ]);
    };
    for s in cfg.spots() {
        let analytic = min_variance_delta(&grid, s, &kern)?;
        let sim = match &cfg.mc.deltas {
            Some(d) => SimConfig::new(paths, seed, d.clone())?,
            None => SimConfig::around(analytic, paths, seed)?,
        };
        let fit = fit_optimal_delta(&v, s, step, &sim)?;
        for p in &fit.points {
            push(s, "grid", p, None);
        }
        let at_analytic = simulate_hedged_step(&v, analytic, s, step, &sim)?;
        let predicted = growth * (next.value_at(s) - analytic * s);
        push(s, "analytic", &at_analytic, Some(predicted));
        push(s, "fitted", &fit.vertex, None);
    }
    Ok(Outcome::table(t))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(extra: &str) -> RunConfig {
        format!(
            "{extra}\n[model]\nmu = 0.05\nsigma = 0.2\nr = 0.09\ntau = 0.01\nn = 2\nstrike = 100.0\n"
        )
        .parse()
        .unwrap()
    }

    #[test]
    fn feasibility_verdict() {
        let o = execute(Command::Feasibility, &cfg("")).unwrap();
        let row = &o.table.rows()[0];
        assert!((row[0].parse::<f64>().unwrap() - 0.07).abs() < 1e-12);
        assert!((row[1].parse::<f64>().unwrap() - 0.11).abs() < 1e-12);
        assert_eq!(row[3], "feasible");
        assert!(o.notes[0].contains("[0.07, 0.11]"), "{}", o.notes[0]);
    }

    #[test]
    fn price_methods_agree() {
        let c = cfg("");
        let get = |m: &str| {
            let mut c = c.clone();
            c.method = Some(m.into());
            execute(Command::Price, &c).unwrap().table.rows()[0][1]
                .parse::<f64>()
                .unwrap()
        };
        let closed = get("closed");
        for m in ["recursive", "mellin", "green"] {
            assert!((get(m) - closed).abs() < 1e-5, "{m}");
        }
    }

    #[test]
    fn delta_needs_a_period() {
        let mut c = cfg("");
        c.model.n = 0;
        let e = execute(Command::Delta, &c).unwrap_err();
        assert_eq!(exit_code(&e), 1);
        let p = execute(Command::Price, &c).unwrap();
        assert_eq!(p.table.rows()[0][1], format_number(0.0));
    }

    #[test]
    fn crosscheck_gate() {
        let o = execute(Command::Crosscheck, &cfg("")).unwrap();
        assert!(o.failure.is_none());
        let mut tight = cfg("");
        tight.crosscheck.tolerance = Some(1e-16);
        tight.grid.nodes = Some(257);
        let o = execute(Command::Crosscheck, &tight).unwrap();
        assert_eq!(exit_code(o.failure.as_ref().unwrap()), 2);
    }
}
