//! End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use discrete_hedge::asymptotics::bs_limit_check;
use discrete_hedge::kernel::{
    min_variance_delta, negativity_tolerance, price_recursive, CallPayoff, GridSpec, PricingKernel,
};
use discrete_hedge::lognormal::{coefficients, price_closed, u_closed, LognormalParams};
use discrete_hedge::market_model::feasibility_interval;
use discrete_hedge::mc_oracle::{simulate_deltas, simulate_hedged_step, SimConfig};
use discrete_hedge::mellin::{
    mellin_forward, mellin_inverse_many, payoff_transform_call, price_mellin_many, GreenFunction,
    MellinLine, TransformFn,
};
use discrete_hedge::negativity::scan_all;
use discrete_hedge::numeric::quad::simpson_refined;

const E: f64 = 100.0;
const MC_PATHS: usize = 1_000_000;
const MC_SEED: u64 = 20_240_601;

type Check = Result<String, String>;

/// Name, runtime budget in seconds, check.
type Criterion = (&'static str, u64, fn() -> Check);

fn reference(n: usize) -> LognormalParams {
    LognormalParams::new(0.05, 0.2, 0.01, 0.09, E, n).unwrap()
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    let u = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
    lo + (hi - lo) * u
}

fn verdict(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn kernel_identities() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut worst_mass, mut worst_mom) = (0.0f64, 0.0f64);
    for _ in 0..50 {
        let mu = uniform(&mut rng, -0.1, 0.2);
        let sigma = uniform(&mut rng, 0.05, 0.6);
        let tau = uniform(&mut rng, 0.001, 0.1);
        let probe = LognormalParams::new(mu, sigma, tau, 0.0, E, 1).unwrap();
        let fi = feasibility_interval(&probe.step().unwrap()).unwrap();
        let r = uniform(&mut rng, fi.r_lo, fi.r_hi);
        let p = LognormalParams { r, ..probe };
        let k = PricingKernel::new(&p.step().unwrap()).unwrap();
        let (a, b) = k.step().dist.truncation_range();
        let mass = simpson_refined(|x| k.eval(x), a, b, 4096, 1e-13, 0.0, 1 << 22).unwrap();
        let mom =
            simpson_refined(|x| x.exp() * k.eval(x), a, b, 4096, 1e-13, 0.0, 1 << 22).unwrap();
        worst_mass = worst_mass.max((mass - k.discount()).abs());
        worst_mom = worst_mom.max((mom - 1.0).abs());
    }
    verdict(
        worst_mass < 1e-8 && worst_mom < 1e-8,
        format!("50 sets: max |mass - e^(-r tau)| = {worst_mass:.2e}, max |first moment - 1| = {worst_mom:.2e}"),
    )
}

fn coefficient_identities() -> Check {
    let (mut worst_sum, mut worst_u) = (0.0f64, 0.0f64);
    for i in 0..100 {
        let t = i as f64 / 99.0;
        let mu = -0.1 + 0.3 * t;
        let sigma = 0.05 + 0.45 * ((7 * i) % 100) as f64 / 99.0;
        let tau = 0.001 + 0.099 * ((13 * i) % 100) as f64 / 99.0;
        let probe = LognormalParams::new(mu, sigma, tau, 0.0, E, 1).unwrap();
        let fi = feasibility_interval(&probe.step().unwrap()).unwrap();
        let r = fi.r_lo - 0.5 * fi.width() + 2.0 * fi.width() * ((31 * i) % 100) as f64 / 99.0;
        let p = LognormalParams { r, ..probe };
        let c = coefficients(&p).unwrap();
        worst_sum = worst_sum.max((c.m1 + c.m2 - (-r * tau).exp()).abs());
        let u1 = u_closed(&p, Complex64::new(1.0, 0.0)).unwrap();
        worst_u = worst_u.max((u1 - 1.0).norm());
    }
    verdict(
        worst_sum < 1e-14 && worst_u < 1e-12,
        format!("100 sets: max |M1 + M2 - e^(-r tau)| = {worst_sum:.2e}, max |U(1) - 1| = {worst_u:.2e}"),
    )
}

fn three_way_prices() -> Check {
    let p = reference(100);
    let path = p.path().unwrap();
    let spots: Vec<f64> = (0..=100).map(|i| 60.0 + i as f64).collect();
    let grids = price_recursive(&path, &CallPayoff { strike: E }, &GridSpec::default())
        .map_err(|e| e.to_string())?;
    let line = MellinLine::for_path(&path).unwrap();
    let mellin = price_mellin_many(&path, 100, &spots, &line).map_err(|e| e.to_string())?;
    let green = GreenFunction::build(&path, 100, &line)
        .and_then(|g| g.price_many(&CallPayoff { strike: E }, &spots))
        .map_err(|e| e.to_string())?;
    let (mut worst, mut worst_away, mut at) = (0.0f64, 0.0f64, 0.0);
    for (i, &s) in spots.iter().enumerate() {
        let closed = price_closed(&p, s).unwrap();
        for v in [grids[100].value_at(s), mellin[i], green[i]] {
            let rel = (v - closed).abs() / closed;
            if rel > worst {
                worst = rel;
                at = s;
            }
            if (s - E).abs() >= 5.0 {
                worst_away = worst_away.max(rel);
            }
        }
    }
    verdict(
        worst < 1e-3,
        format!(
            "recursive/Mellin/Green vs closed on s in [60, 160]: max rel diff {worst:.2e} at s = {at}; \
             {worst_away:.2e} for |s - E| >= 5 (target 1e-4)"
        ),
    )
}

fn black_scholes_limit() -> Check {
    let ns = [8, 16, 32, 64, 128, 256];
    let r = bs_limit_check(&reference(1), 1.0, &ns, E).map_err(|e| e.to_string())?;
    let order = r.order.unwrap_or(f64::NAN);
    let last = r.rows.last().unwrap();
    let rel = last.error / r.reference;
    let errors: Vec<String> = r.rows.iter().map(|x| format!("{:.3e}", x.error)).collect();
    verdict(
        (0.8..=1.2).contains(&order) && rel < 0.01,
        format!(
            "errors [{}] decreasing, fitted order {order:.3}, n = 256 rel error {rel:.2e}",
            errors.join(", ")
        ),
    )
}

fn mellin_roundtrip() -> Check {
    let f = TransformFn::call_payoff(E).unwrap();
    let line = MellinLine::default().with_p_max(1e5);
    let spots: Vec<f64> = (0..=240)
        .map(|i| E * (-1.5 + 3.0 * i as f64 / 240.0).exp())
        .filter(|s| !(0.95 * E..=1.05 * E).contains(s))
        .collect();
    let v = mellin_inverse_many(&f, &line, &spots).map_err(|e| e.to_string())?;
    let sup = spots
        .iter()
        .zip(&v)
        .map(|(s, v)| (v - (s - E).max(0.0)).abs())
        .fold(0.0, f64::max);
    let mut worst_fwd = 0.0f64;
    for i in 0..20 {
        let p = Complex64::new(-1.1 - 1.8 * i as f64 / 19.0, -15.0 + 30.0 * i as f64 / 19.0);
        let quad = mellin_forward(|x| (x - E).max(0.0), p).map_err(|e| e.to_string())?;
        let closed = payoff_transform_call(E, p).unwrap();
        worst_fwd = worst_fwd.max((quad - closed).norm() / closed.norm());
    }
    verdict(
        sup < 1e-5 && worst_fwd < 1e-9,
        format!(
            "roundtrip sup error {sup:.2e} over {} spots off [0.95E, 1.05E]; forward vs closed max rel {worst_fwd:.2e} at 20 strip points",
            spots.len()
        ),
    )
}

fn delta_optimality() -> Check {
    // V_50: half a year to expiry, where a 10% change in Δ is resolvable
    let p = reference(51);
    let path = p.path().unwrap();
    let grids = price_recursive(&path, &CallPayoff { strike: E }, &GridSpec::default())
        .map_err(|e| e.to_string())?;
    let v50 = &grids[50];
    let step = &path.steps()[50];
    let kern = PricingKernel::new(step).unwrap();
    let v = |y: f64| v50.value_at(y);
    let mut ok = true;
    let mut parts = Vec::new();
    for s in [0.8 * E, E, 1.2 * E] {
        let delta = min_variance_delta(v50, s, &kern).map_err(|e| e.to_string())?;
        let r = simulate_deltas(
            &v,
            &[0.9 * delta, delta, 1.1 * delta],
            s,
            step,
            MC_PATHS,
            MC_SEED,
        )
        .map_err(|e| e.to_string())?;
        let margin = |i: usize| {
            let se = (r[i].var_stderr.powi(2) + r[1].var_stderr.powi(2)).sqrt();
            (r[i].var_pi - r[1].var_pi) / se
        };
        let cfg = SimConfig::around(delta, MC_PATHS, MC_SEED).unwrap();
        let fit = discrete_hedge::mc_oracle::fit_optimal_delta(&v, s, step, &cfg)
            .map_err(|e| e.to_string())?;
        let vertex = fit.vertex.fitted_delta.unwrap();
        let se = fit.vertex.fitted_delta_stderr.unwrap();
        let z = (vertex - delta) / se;
        let (lo, hi) = (margin(0), margin(2));
        ok &= lo > 2.0 && hi > 2.0 && z.abs() <= 2.0;
        parts.push(format!(
            "s={s}: Δ={delta:.5}, var gap {lo:.1}/{hi:.1} se, vertex z={z:.2}"
        ));
    }
    verdict(ok, parts.join("; "))
}

fn pricing_identity() -> Check {
    let p = reference(51);
    let path = p.path().unwrap();
    let grids = price_recursive(&path, &CallPayoff { strike: E }, &GridSpec::default())
        .map_err(|e| e.to_string())?;
    let mut ok = true;
    let mut parts = Vec::new();
    for k in [1usize, 10, 50] {
        let step = &path.steps()[k];
        let kern = PricingKernel::new(step).unwrap();
        let delta = min_variance_delta(&grids[k], E, &kern).map_err(|e| e.to_string())?;
        let v = |y: f64| grids[k].value_at(y);
        let cfg = SimConfig::around(delta, MC_PATHS, MC_SEED).unwrap();
        let r = simulate_hedged_step(&v, delta, E, step, &cfg).map_err(|e| e.to_string())?;
        let predicted = (step.r * step.tau).exp() * (grids[k + 1].value_at(E) - delta * E);
        let z = (r.mean_pi - predicted) / r.stderr;
        ok &= z.abs() <= 3.0;
        parts.push(format!("k={k}: z={z:.2}"));
    }
    verdict(
        ok,
        format!(
            "mean vs e^(r tau)(V_(k+1) - Δs) at s = E: {}",
            parts.join(", ")
        ),
    )
}

fn negativity_sets() -> Check {
    let eps = negativity_tolerance(E);
    let p = reference(100);
    let grids = price_recursive(
        &p.path().unwrap(),
        &CallPayoff { strike: E },
        &GridSpec::default(),
    )
    .map_err(|e| e.to_string())?;
    let reports = scan_all(&grids, eps);
    let nonempty = reports.iter().filter(|r| !r.is_empty()).count();
    let floor = reports
        .iter()
        .map(|r| r.min_value)
        .fold(f64::INFINITY, f64::min);
    // r = 0.05 lies below [0.07, 0.11] at every tau; at tau = 0.01 the negative
    // values (~e^-1500) underflow, so the one-step scan uses tau = 2
    let bad = LognormalParams::new(0.05, 0.2, 2.0, 0.05, E, 1).unwrap();
    let g = price_recursive(
        &bad.path().unwrap(),
        &CallPayoff { strike: E },
        &GridSpec::default(),
    )
    .map_err(|e| e.to_string())?;
    let xi1 = &scan_all(&g, eps)[1];
    let span = xi1
        .intervals
        .first()
        .map(|(lo, hi)| format!("[{lo:.3}, {hi:.3}]"))
        .unwrap_or_else(|| "none".into());
    verdict(
        nonempty == 0 && !xi1.is_empty(),
        format!(
            "r=0.09: {nonempty} of 101 scans nonempty (min V {floor:.2e}); r=0.05, tau=2: Ξ_1 {span}, min V {:.3e}",
            xi1.min_value
        ),
    )
}

fn growth_bounds() -> Check {
    let p = reference(100);
    let grids = price_recursive(
        &p.path().unwrap(),
        &CallPayoff { strike: E },
        &GridSpec::default(),
    )
    .map_err(|e| e.to_string())?;
    let eps = negativity_tolerance(E);
    let a = grids[0]
        .nodes()
        .map(|(s, v)| v / (s * s))
        .fold(0.0, f64::max);
    let mut itm_nodes = 0usize;
    let mut itm_ok = true;
    let mut quad_ok = true;
    let (mut worst_ratio, mut worst_k) = (0.0f64, 0);
    // the same bound with the constant grown by the discount factor
    let mut grown_ratio = 0.0f64;
    for (k, g) in grids.iter().enumerate() {
        let growth = (p.r * p.tau * k as f64).exp();
        for (s, v) in g.nodes() {
            if s >= 20.0 * E {
                itm_nodes += 1;
                let ratio = v / s;
                itm_ok &= ratio >= 1.0 - 2.0 * E / s - 1e-12 && ratio <= 1.0 + 1e-12;
            }
            quad_ok &= v <= a * s * s + eps;
            if v / (a * s * s) > worst_ratio {
                worst_ratio = v / (a * s * s);
                worst_k = k;
            }
            grown_ratio = grown_ratio.max(v / (growth * a * s * s));
        }
    }
    verdict(
        itm_ok && quad_ok && itm_nodes > 0,
        format!(
            "{itm_nodes} node values with s >= 20E inside [1 - 2E/s, 1]: {itm_ok}; \
             V_k <= A s^2 with A = {a:.4e} from k = 0: {quad_ok}, max V_k/(A s^2) = {worst_ratio:.4} at k = {worst_k} \
             (e^(r t_k) = {:.4}); with A e^(r t_k): max ratio {grown_ratio:.4}",
            (p.r * p.tau * worst_k as f64).exp()
        ),
    )
}

fn simulate_determinism() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        "[model]\nmu = 0.05\nsigma = 0.2\nr = 0.09\ntau = 0.01\nn = 2\nstrike = 100.0\nspots = [90.0, 100.0, 110.0]\n\n[mc]\npaths = 200000\nseed = 7\n",
    )
    .map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for threads in [1, 4, 8, 4] {
        let out = Command::new(env!("CARGO_BIN_EXE_dhedge"))
            .args(["simulate", "--config"])
            .arg(&cfg)
            .env("RAYON_NUM_THREADS", threads.to_string())
            .output()
            .map_err(|e| e.to_string())?;
        if !out.status.success() {
            return Err(String::from_utf8_lossy(&out.stderr).into_owned());
        }
        outputs.push(out.stdout);
    }
    let same = outputs.windows(2).all(|w| w[0] == w[1]);
    verdict(
        same && !outputs[0].is_empty(),
        format!(
            "simulate CSV ({} bytes) byte-identical under 1, 4, 8 threads and on repeat: {same}",
            outputs[0].len()
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("kernel identities", 10, kernel_identities),
        ("coefficient identities", 1, coefficient_identities),
        ("three-way price agreement", 120, three_way_prices),
        ("Black-Scholes limit", 300, black_scholes_limit),
        ("Mellin roundtrip", 30, mellin_roundtrip),
        ("delta optimality", 120, delta_optimality),
        ("pricing identity", 180, pricing_identity),
        ("negativity sets", 60, negativity_sets),
        ("growth and ITM bounds", 10, growth_bounds),
        ("simulate determinism", 60, simulate_determinism),
    ];
    let mut failures = 0;
    for (i, (name, budget, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let in_time = elapsed < Duration::from_secs(*budget);
        let (pass, detail) = match result {
            Ok(d) => (in_time, d),
            Err(d) => (false, d),
        };
        if !pass {
            failures += 1;
        }
        println!(
            "{} {:>2} {name}: {detail} ({:.2} s, budget {budget} s)",
            if pass { "PASS" } else { "FAIL" },
            i + 1,
            elapsed.as_secs_f64()
        );
    }
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failures} criteria failed");
        ExitCode::FAILURE
    }
}
