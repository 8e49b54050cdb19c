//! Monte Carlo simulation of the one-period hedged portfolio
//! `Π = V_k(s e^xi) - Δ s e^xi`.
//!
//! Path `i` draws its return from word `2i` of a ChaCha8 stream keyed by the
//! seed, so every path sees the same number whatever the thread layout, and
//! all candidate deltas share the same draws. Sums run over fixed chunks of
//! paths and are merged in chunk order, which makes every report
//! bit-reproducible.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{ensure_positive, Error, Result};
use crate::market_model::MarketStep;
use crate::numeric::fit::polyfit;
use crate::par;
use crate::report::CsvTable;

pub const MIN_PATHS: usize = 10_000;
pub const MIN_DELTAS: usize = 5;
const CHUNK: usize = 8192;

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub n_paths: usize,
    pub seed: u64,
    /// Candidate deltas for the variance fit.
    pub delta_grid: Vec<f64>,
}

impl SimConfig {
    pub fn new(n_paths: usize, seed: u64, delta_grid: Vec<f64>) -> Result<Self> {
        if n_paths < MIN_PATHS {
            return Err(Error::invalid(
                "mc paths",
                n_paths as f64,
                format!("need at least {MIN_PATHS} paths"),
            ));
        }
        if delta_grid.len() < MIN_DELTAS || delta_grid.iter().any(|d| !d.is_finite()) {
            return Err(Error::invalid(
                "delta grid",
                delta_grid.len() as f64,
                format!("need at least {MIN_DELTAS} finite candidate deltas"),
            ));
        }
        Ok(Self {
            n_paths,
            seed,
            delta_grid,
        })
    }

    /// Nine deltas spanning `delta ± max(0.2 |delta|, 0.05)`.
    pub fn around(delta: f64, n_paths: usize, seed: u64) -> Result<Self> {
        let half = (0.2 * delta.abs()).max(0.05);
        let grid = (0..9)
            .map(|i| delta - half + half * i as f64 / 4.0)
            .collect();
        Self::new(n_paths, seed, grid)
    }
}

/// Sample statistics of `Π` at one delta.
#[derive(Debug, Clone, PartialEq)]
pub struct HedgeReport {
    pub delta: f64,
    pub n_paths: usize,
    pub mean_pi: f64,
    /// Unbiased sample variance.
    pub var_pi: f64,
    /// Standard error of `mean_pi`: `sqrt(var_pi / n)`.
    pub stderr: f64,
    /// Standard error of `var_pi`: `sqrt((m4 - var^2) / n)`.
    pub var_stderr: f64,
    pub fitted_delta: Option<f64>,
    pub fitted_delta_stderr: Option<f64>,
}

/// Quadratic fit of the variance over the delta grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaFit {
    /// Statistics at the fitted vertex, with `fitted_delta` set.
    pub vertex: HedgeReport,
    /// Statistics at each grid delta.
    pub points: Vec<HedgeReport>,
}

/// Uniforms in (0, 1) for paths `start..start + count`.
fn keyed_uniforms(seed: u64, start: usize, count: usize) -> impl Iterator<Item = f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_word_pos(2 * start as u128);
    (0..count).map(move |_| ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64))
}

/// `(V(s e^xi), s e^xi)` per path of one chunk.
fn chunk_draws(
    v: &(dyn Fn(f64) -> f64 + Sync),
    s: f64,
    step: &MarketStep,
    seed: u64,
    start: usize,
    count: usize,
) -> Vec<(f64, f64)> {
    keyed_uniforms(seed, start, count)
        .map(|u| {
            let y = s * step.dist.quantile(u).exp();
            (v(y), y)
        })
        .collect()
}

/// Statistics at every delta from one set of common draws.
pub fn simulate_deltas(
    v: &(dyn Fn(f64) -> f64 + Sync),
    deltas: &[f64],
    s: f64,
    step: &MarketStep,
    n_paths: usize,
    seed: u64,
) -> Result<Vec<HedgeReport>> {
    ensure_positive("spot", s)?;
    if n_paths < 2 {
        return Err(Error::invalid(
            "mc paths",
            n_paths as f64,
            "need at least two paths",
        ));
    }
    let chunks = n_paths.div_ceil(CHUNK);
    let bounds = |c: usize| (c * CHUNK, CHUNK.min(n_paths - c * CHUNK));
    let nd = deltas.len();

    let sums = par::map_range(chunks, |c| {
        let (start, count) = bounds(c);
        let draws = chunk_draws(v, s, step, seed, start, count);
        deltas
            .iter()
            .map(|d| draws.iter().map(|(x, y)| x - d * y).sum::<f64>())
            .collect::<Vec<f64>>()
    });
    let n = n_paths as f64;
    let means: Vec<f64> = (0..nd)
        .map(|j| sums.iter().map(|c| c[j]).sum::<f64>() / n)
        .collect();

    // second pass regenerates the draws and sums centred powers
    let central = par::map_range(chunks, |c| {
        let (start, count) = bounds(c);
        let draws = chunk_draws(v, s, step, seed, start, count);
        deltas
            .iter()
            .zip(&means)
            .map(|(d, m)| {
                draws.iter().fold([0.0; 2], |[m2, m4], (x, y)| {
                    let e = x - d * y - m;
                    let e2 = e * e;
                    [m2 + e2, m4 + e2 * e2]
                })
            })
            .collect::<Vec<[f64; 2]>>()
    });
    let reports = (0..nd)
        .map(|j| {
            let (m2, m4) = central
                .iter()
                .fold((0.0, 0.0), |(a, b), c| (a + c[j][0], b + c[j][1]));
            let var = m2 / (n - 1.0);
            let pop = m2 / n;
            let fourth_spread = (m4 / n - pop * pop).max(0.0);
            let nonneg = |x: f64| if x.is_finite() { x.max(0.0) } else { x };
            HedgeReport {
                delta: deltas[j],
                n_paths,
                mean_pi: means[j],
                var_pi: nonneg(var),
                stderr: (nonneg(var) / n).sqrt(),
                var_stderr: (fourth_spread / n).sqrt(),
                fitted_delta: None,
                fitted_delta_stderr: None,
            }
        })
        .collect();
    Ok(reports)
}

/// Statistics of `Π` for one delta.
pub fn simulate_hedged_step(
    v: &(dyn Fn(f64) -> f64 + Sync),
    delta: f64,
    s: f64,
    step: &MarketStep,
    cfg: &SimConfig,
) -> Result<HedgeReport> {
    let mut r = simulate_deltas(v, &[delta], s, step, cfg.n_paths, cfg.seed)?;
    Ok(r.remove(0))
}

/// Fits `var(Δ)` over the grid by a quadratic and reports its vertex.
///
/// With common draws the sample variance is exactly quadratic in `Δ`; the
/// vertex is the sample regression slope of `V(s e^xi)` on `s e^xi`. Its
/// standard error is the heteroscedasticity-robust (sandwich) one, since the
/// hedging residual grows with the size of the move.
pub fn fit_optimal_delta(
    v: &(dyn Fn(f64) -> f64 + Sync),
    s: f64,
    step: &MarketStep,
    cfg: &SimConfig,
) -> Result<DeltaFit> {
    let points = simulate_deltas(v, &cfg.delta_grid, s, step, cfg.n_paths, cfg.seed)?;
    let centre = cfg.delta_grid.iter().sum::<f64>() / cfg.delta_grid.len() as f64;
    let spread = cfg
        .delta_grid
        .iter()
        .map(|d| (d - centre).abs())
        .fold(0.0, f64::max);
    if spread == 0.0 {
        return Err(Error::Bracketing("delta grid has no spread".into()));
    }
    let xs: Vec<f64> = cfg
        .delta_grid
        .iter()
        .map(|d| (d - centre) / spread)
        .collect();
    let ys: Vec<f64> = points.iter().map(|p| p.var_pi).collect();
    let fit = polyfit(&xs, &ys, 2)?;
    let (c1, c2) = (fit.coefficients[1], fit.coefficients[2]);
    if !(c2 > 0.0) {
        return Err(Error::Bracketing(format!(
            "variance is not convex over the grid (curvature {c2:e})"
        )));
    }
    let t = -c1 / (2.0 * c2);
    let vertex = centre + spread * t;
    let (lo, hi) = cfg
        .delta_grid
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &d| {
            (l.min(d), h.max(d))
        });
    if !(vertex >= lo && vertex <= hi) {
        return Err(Error::Bracketing(format!(
            "fitted delta {vertex} lies outside the grid [{lo}, {hi}]"
        )));
    }
    let se = slope_stderr(v, s, step, cfg.n_paths, cfg.seed, vertex);
    let mut at_vertex = simulate_deltas(v, &[vertex], s, step, cfg.n_paths, cfg.seed)?.remove(0);
    at_vertex.fitted_delta = Some(vertex);
    at_vertex.fitted_delta_stderr = Some(se);
    Ok(DeltaFit {
        vertex: at_vertex,
        points,
    })
}

/// Sandwich standard error of the regression slope `b` of `V` on `Y = s e^xi`:
/// `sqrt(sum e^2 (Y - Ybar)^2) / sum (Y - Ybar)^2` with `e` the centred residual.
fn slope_stderr(
    v: &(dyn Fn(f64) -> f64 + Sync),
    s: f64,
    step: &MarketStep,
    n_paths: usize,
    seed: u64,
    b: f64,
) -> f64 {
    let chunks = n_paths.div_ceil(CHUNK);
    let draws = |c: usize| chunk_draws(v, s, step, seed, c * CHUNK, CHUNK.min(n_paths - c * CHUNK));
    let sums = par::map_range(chunks, |c| {
        draws(c)
            .iter()
            .fold([0.0; 2], |[a, y], (x, z)| [a + x, y + z])
    });
    let n = n_paths as f64;
    let (vbar, ybar) = sums
        .iter()
        .fold((0.0, 0.0), |(a, y), c| (a + c[0], y + c[1]));
    let (vbar, ybar) = (vbar / n, ybar / n);
    let spread = par::map_range(chunks, |c| {
        draws(c).iter().fold([0.0; 2], |[num, den], (x, z)| {
            let dy = z - ybar;
            let e = (x - vbar) - b * dy;
            [num + e * e * dy * dy, den + dy * dy]
        })
    });
    let (num, den) = spread
        .iter()
        .fold((0.0, 0.0), |(a, b), c| (a + c[0], b + c[1]));
    num.sqrt() / den
}

/// `delta,mean,var,stderr`.
pub fn reports_to_csv(reports: &[HedgeReport]) -> CsvTable {
    let mut t = CsvTable::new(["delta", "mean", "var", "stderr"]);
    for r in reports {
        t.push_numbers(&[r.delta, r.mean_pi, r.var_pi, r.stderr]);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market_model::ReturnDistribution;

    fn step() -> MarketStep {
        MarketStep::new(
            0.09,
            0.01,
            ReturnDistribution::lognormal(0.05, 0.2, 0.01).unwrap(),
        )
        .unwrap()
    }

    fn cfg(delta: f64) -> SimConfig {
        SimConfig::around(delta, 20_000, 7).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(SimConfig::new(9_999, 1, vec![0.0; 5]).is_err());
        assert!(SimConfig::new(10_000, 1, vec![0.0; 4]).is_err());
        let c = SimConfig::around(0.5, 10_000, 1).unwrap();
        assert_eq!(c.delta_grid.len(), 9);
        assert!((c.delta_grid[0] - 0.4).abs() < 1e-15 && (c.delta_grid[8] - 0.6).abs() < 1e-15);
    }

    #[test]
    fn constant_claim_unhedged() {
        let r = simulate_hedged_step(&|_| 3.0, 0.0, 100.0, &step(), &cfg(0.0)).unwrap();
        assert_eq!(r.mean_pi, 3.0);
        assert_eq!(r.var_pi, 0.0);
        assert_eq!(r.stderr, 0.0);
    }

    #[test]
    fn linear_claim_fully_hedged() {
        let r = simulate_hedged_step(&|s| s, 1.0, 100.0, &step(), &cfg(1.0)).unwrap();
        assert!(r.mean_pi.abs() < 1e-12 && r.var_pi < 1e-24);
    }

    #[test]
    fn fitted_deltas_of_trivial_claims() {
        let lin = fit_optimal_delta(&|s| 2.0 * s, 100.0, &step(), &cfg(2.0)).unwrap();
        assert!((lin.vertex.fitted_delta.unwrap() - 2.0).abs() < 1e-9);
        let flat = fit_optimal_delta(&|_| 1.0, 100.0, &step(), &cfg(0.0)).unwrap();
        assert!(flat.vertex.fitted_delta.unwrap().abs() < 1e-9);
    }

    #[test]
    fn vertex_outside_grid_is_reported() {
        let c = SimConfig::new(10_000, 3, vec![0.0, 0.1, 0.2, 0.3, 0.4]).unwrap();
        let err = fit_optimal_delta(&|s| s, 100.0, &step(), &c);
        assert!(matches!(err, Err(Error::Bracketing(_))));
    }

    #[test]
    fn mean_of_forward_matches_moment() {
        // E[s e^xi] = s m with m = exp(mu tau + sigma^2 tau / 2)
        let r = simulate_hedged_step(&|s| s, 0.0, 100.0, &step(), &cfg(0.0)).unwrap();
        let m = 100.0 * (0.0005f64 + 0.0002).exp();
        assert!(
            (r.mean_pi - m).abs() < 4.0 * r.stderr,
            "{} vs {m}",
            r.mean_pi
        );
    }

    #[cfg(feature = "parallel")]
    #[test]
    fn bit_identical_across_pools() {
        let run = |threads: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| {
                    simulate_deltas(
                        &|s| (s - 100.0).max(0.0),
                        &[0.3, 0.5],
                        100.0,
                        &step(),
                        50_000,
                        11,
                    )
                    .unwrap()
                })
        };
        let one = run(1);
        assert_eq!(one, run(3));
        assert_eq!(one, run(8));
    }
}
