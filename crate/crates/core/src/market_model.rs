//! One-period return laws, market steps and the hedging-feasibility interval.
//!
//! A return `xi = ln(S_k / S_{k+1})` is described by its density and its
//! exponential-moment function `M(p) = E[e^{p xi}]`, which must be finite on
//! `(-a, a)` for some declared `a > 2`.

use std::fmt;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;

use crate::error::{ensure_finite, ensure_positive, Error, Result};
use crate::numeric::quad::simpson_refined;
use crate::numeric::{norm_pdf, norm_quantile};

pub type DensityFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type MgfFn = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;

/// Moment bound used for lognormal returns, whose moments all exist.
pub const DEFAULT_LOGNORMAL_MOMENT_BOUND: f64 = 4.0;

const MOMENT_PANELS: usize = 4096;
const MOMENT_REL_TOL: f64 = 1e-12;
const MOMENT_ABS_TOL: f64 = 1e-12;
const MOMENT_MAX_PANELS: usize = 1 << 23;
const QUANTILE_NODES: usize = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistributionKind {
    Lognormal,
    Custom,
}

/// Law of the one-period log return.
#[derive(Clone)]
pub struct ReturnDistribution {
    law: Law,
    moment_bound: f64,
    mean: f64,
    std_dev: f64,
    truncation: f64,
}

#[derive(Clone)]
enum Law {
    /// `xi ~ N(drift, variance)`.
    Lognormal { drift: f64, variance: f64 },
    Custom {
        density: DensityFn,
        mgf: Option<MgfFn>,
        range: (f64, f64),
        quantiles: Arc<OnceLock<QuantileTable>>,
    },
}

impl fmt::Debug for ReturnDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ReturnDistribution")
            .field("kind", &self.kind())
            .field("moment_bound", &self.moment_bound)
            .field("mean", &self.mean)
            .field("std_dev", &self.std_dev)
            .finish()
    }
}

impl ReturnDistribution {
    /// Normal log returns with mean `mu*tau` and variance `sigma^2*tau`.
    pub fn lognormal(mu: f64, sigma: f64, tau: f64) -> Result<Self> {
        ensure_finite("mu", mu)?;
        ensure_positive("tau", tau)?;
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::Degenerate(format!(
                "sigma = {sigma}: the return law collapses to a point mass (D[e^xi] = 0)"
            )));
        }
        let drift = mu * tau;
        let variance = sigma * sigma * tau;
        Ok(Self {
            law: Law::Lognormal { drift, variance },
            moment_bound: DEFAULT_LOGNORMAL_MOMENT_BOUND,
            mean: drift,
            std_dev: variance.sqrt(),
            truncation: 10.0,
        })
    }

    /// Arbitrary density. `bracket` must contain essentially all of its mass;
    /// `moment_bound` is the declared `a` (the engine cannot infer it).
    ///
    /// Exponential moments are computed by quadrature over
    /// `[mean - 12 sd, mean + 12 sd]` (widened to cover `bracket`).
    pub fn custom(
        density: impl Fn(f64) -> f64 + Send + Sync + 'static,
        bracket: (f64, f64),
        moment_bound: f64,
    ) -> Result<Self> {
        Self::build_custom(Arc::new(density), None, bracket, moment_bound)
    }

    /// Arbitrary density with a closed-form exponential-moment function.
    pub fn custom_with_mgf(
        density: impl Fn(f64) -> f64 + Send + Sync + 'static,
        mgf: impl Fn(Complex64) -> Complex64 + Send + Sync + 'static,
        bracket: (f64, f64),
        moment_bound: f64,
    ) -> Result<Self> {
        Self::build_custom(
            Arc::new(density),
            Some(Arc::new(mgf)),
            bracket,
            moment_bound,
        )
    }

    /// Finite mixture of normal log returns, given as `(weight, mean, sd)`.
    pub fn normal_mixture(components: &[(f64, f64, f64)], moment_bound: f64) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::Domain(
                "normal mixture needs at least one component".into(),
            ));
        }
        let total: f64 = components.iter().map(|c| c.0).sum();
        for &(w, m, sd) in components {
            ensure_positive("mixture weight", w)?;
            ensure_finite("mixture mean", m)?;
            ensure_positive("mixture sd", sd)?;
        }
        let comps: Vec<(f64, f64, f64)> = components
            .iter()
            .map(|&(w, m, sd)| (w / total, m, sd))
            .collect();
        let lo = comps
            .iter()
            .map(|c| c.1 - 12.0 * c.2)
            .fold(f64::INFINITY, f64::min);
        let hi = comps
            .iter()
            .map(|c| c.1 + 12.0 * c.2)
            .fold(f64::NEG_INFINITY, f64::max);
        let dens = comps.clone();
        let density = move |x: f64| {
            dens.iter()
                .map(|&(w, m, sd)| w * norm_pdf((x - m) / sd) / sd)
                .sum::<f64>()
        };
        let mgf = move |p: Complex64| {
            comps
                .iter()
                .map(|&(w, m, sd)| (p * m + p * p * (0.5 * sd * sd)).exp() * w)
                .sum::<Complex64>()
        };
        Self::custom_with_mgf(density, mgf, (lo, hi), moment_bound)
    }

    fn build_custom(
        density: DensityFn,
        mgf: Option<MgfFn>,
        bracket: (f64, f64),
        moment_bound: f64,
    ) -> Result<Self> {
        check_moment_bound(moment_bound)?;
        let (lo, hi) = bracket;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::Domain(format!(
                "invalid density bracket ({lo}, {hi})"
            )));
        }
        let integrate = |g: &dyn Fn(f64) -> f64, a: f64, b: f64| {
            simpson_refined(
                g,
                a,
                b,
                MOMENT_PANELS,
                MOMENT_REL_TOL,
                MOMENT_ABS_TOL,
                MOMENT_MAX_PANELS,
            )
        };
        let mass = integrate(&|x| density(x), lo, hi)?;
        if (mass - 1.0).abs() > 1e-6 {
            return Err(Error::Domain(format!(
                "density integrates to {mass} over ({lo}, {hi}), expected 1"
            )));
        }
        let mean = integrate(&|x| x * density(x), lo, hi)? / mass;
        let var = integrate(&|x| (x - mean).powi(2) * density(x), lo, hi)? / mass;
        if !(var > 0.0) {
            return Err(Error::Degenerate("density has zero variance".into()));
        }
        let sd = var.sqrt();
        let range = ((mean - 12.0 * sd).min(lo), (mean + 12.0 * sd).max(hi));
        let dist = Self {
            law: Law::Custom {
                density,
                mgf,
                range,
                quantiles: Arc::new(OnceLock::new()),
            },
            moment_bound,
            mean,
            std_dev: sd,
            truncation: 12.0,
        };
        let m0 = dist.exp_moment(0.0)?;
        if (m0 - 1.0).abs() > 1e-6 {
            return Err(Error::Domain(format!("M(0) = {m0}, expected 1")));
        }
        Ok(dist)
    }

    /// Replace the declared moment bound `a` (must exceed 2).
    pub fn with_moment_bound(mut self, a: f64) -> Result<Self> {
        check_moment_bound(a)?;
        self.moment_bound = a;
        Ok(self)
    }

    /// Width, in standard deviations, of the integration window around the mean.
    pub fn with_truncation(mut self, width: f64) -> Result<Self> {
        ensure_positive("truncation width", width)?;
        self.truncation = width;
        Ok(self)
    }

    pub fn kind(&self) -> DistributionKind {
        match self.law {
            Law::Lognormal { .. } => DistributionKind::Lognormal,
            Law::Custom { .. } => DistributionKind::Custom,
        }
    }

    pub fn moment_bound(&self) -> f64 {
        self.moment_bound
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn std_dev(&self) -> f64 {
        self.std_dev
    }

    /// `(drift, variance)` of a lognormal law.
    pub fn normal_parameters(&self) -> Option<(f64, f64)> {
        match self.law {
            Law::Lognormal { drift, variance } => Some((drift, variance)),
            Law::Custom { .. } => None,
        }
    }

    /// Integration window `mean -/+ width*sd` used by the pricing quadratures.
    pub fn truncation_range(&self) -> (f64, f64) {
        let w = self.truncation * self.std_dev;
        (self.mean - w, self.mean + w)
    }

    pub fn density(&self, x: f64) -> f64 {
        match &self.law {
            Law::Lognormal { drift, variance } => {
                let sd = variance.sqrt();
                norm_pdf((x - drift) / sd) / sd
            }
            Law::Custom { density, .. } => density(x),
        }
    }

    /// `M(p) = E[e^{p xi}]` for real `p` in `(-a, a)`.
    pub fn exp_moment(&self, p: f64) -> Result<f64> {
        self.check_open(p)?;
        Ok(self.mgf_real(p))
    }

    /// `ln M(p)`, exact for lognormal laws.
    pub fn log_exp_moment(&self, p: f64) -> Result<f64> {
        self.check_open(p)?;
        Ok(match self.law {
            Law::Lognormal { drift, variance } => p * drift + 0.5 * p * p * variance,
            Law::Custom { .. } => self.mgf_real(p).ln(),
        })
    }

    /// `M(p)` continued to complex `p` with `|Re p| <= a`.
    pub fn exp_moment_complex(&self, p: Complex64) -> Result<Complex64> {
        if !(p.re.abs() <= self.moment_bound) || !p.im.is_finite() {
            return Err(Error::Domain(format!(
                "moment not guaranteed finite: Re p = {} outside [-{a}, {a}]",
                p.re,
                a = self.moment_bound
            )));
        }
        Ok(self.mgf_complex(p))
    }

    fn check_open(&self, p: f64) -> Result<()> {
        if p.is_finite() && p.abs() < self.moment_bound {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "moment not guaranteed finite: p = {p} outside (-{a}, {a})",
                a = self.moment_bound
            )))
        }
    }

    fn mgf_real(&self, p: f64) -> f64 {
        match &self.law {
            Law::Lognormal { drift, variance } => (p * drift + 0.5 * p * p * variance).exp(),
            Law::Custom { mgf: Some(m), .. } => m(Complex64::new(p, 0.0)).re,
            Law::Custom { density, range, .. } => simpson_refined(
                |x| (p * x).exp() * density(x),
                range.0,
                range.1,
                MOMENT_PANELS,
                MOMENT_REL_TOL,
                MOMENT_ABS_TOL,
                MOMENT_MAX_PANELS,
            )
            .unwrap_or(f64::NAN),
        }
    }

    fn mgf_complex(&self, p: Complex64) -> Complex64 {
        match &self.law {
            Law::Lognormal { drift, variance } => (p * drift + p * p * (0.5 * variance)).exp(),
            Law::Custom { mgf: Some(m), .. } => m(p),
            Law::Custom { density, range, .. } => simpson_refined(
                |x| (p * x).exp() * density(x),
                range.0,
                range.1,
                MOMENT_PANELS,
                MOMENT_REL_TOL,
                MOMENT_ABS_TOL,
                MOMENT_MAX_PANELS,
            )
            .unwrap_or(Complex64::new(f64::NAN, f64::NAN)),
        }
    }

    /// `m = E[e^xi]` and `d = D[e^xi]`; fails when `d` is not positive.
    pub fn step_moments(&self) -> Result<StepMoments> {
        let (m, d) = match self.law {
            Law::Lognormal { drift, variance } => {
                let m = (drift + 0.5 * variance).exp();
                (m, m * m * variance.exp_m1())
            }
            Law::Custom { .. } => {
                let m = self.exp_moment(1.0)?;
                (m, self.exp_moment(2.0)? - m * m)
            }
        };
        if !(m.is_finite() && d.is_finite()) {
            return Err(Error::Domain(format!(
                "non-finite step moments m = {m}, d = {d}"
            )));
        }
        if !(d > 0.0) {
            return Err(Error::Degenerate(format!(
                "D[e^xi] = {d}: the variance of e^xi must be strictly positive"
            )));
        }
        Ok(StepMoments { m, d })
    }

    /// Inverse CDF of `xi`, used for Monte Carlo sampling.
    pub fn quantile(&self, u: f64) -> f64 {
        match &self.law {
            Law::Lognormal { drift, variance } => drift + variance.sqrt() * norm_quantile(u),
            Law::Custom {
                density,
                range,
                quantiles,
                ..
            } => quantiles
                .get_or_init(|| QuantileTable::build(density.as_ref(), *range))
                .invert(u),
        }
    }
}

fn check_moment_bound(a: f64) -> Result<()> {
    if a.is_finite() && a > 2.0 {
        Ok(())
    } else {
        Err(Error::invalid(
            "a",
            a,
            "moment bound must exceed 2 (E[e^{p xi}] finite for p in (-a, a) with a > 2)",
        ))
    }
}

/// First two moments of `e^xi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepMoments {
    pub m: f64,
    pub d: f64,
}

/// Tabulated CDF of a custom density, inverted by linear interpolation.
#[derive(Debug)]
struct QuantileTable {
    xs: Vec<f64>,
    cdf: Vec<f64>,
}

impl QuantileTable {
    fn build(density: &(dyn Fn(f64) -> f64 + Send + Sync), (lo, hi): (f64, f64)) -> Self {
        let n = QUANTILE_NODES;
        let h = (hi - lo) / n as f64;
        let xs: Vec<f64> = (0..=n).map(|i| lo + i as f64 * h).collect();
        let mut cdf = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        cdf.push(0.0);
        for w in xs.windows(2) {
            let (a, b) = (w[0], w[1]);
            acc += (b - a) / 6.0 * (density(a) + 4.0 * density(0.5 * (a + b)) + density(b));
            cdf.push(acc);
        }
        let total = acc;
        for c in &mut cdf {
            *c /= total;
        }
        Self { xs, cdf }
    }

    fn invert(&self, u: f64) -> f64 {
        let i = self
            .cdf
            .partition_point(|&c| c < u)
            .clamp(1, self.cdf.len() - 1);
        let (c0, c1) = (self.cdf[i - 1], self.cdf[i]);
        let t = if c1 > c0 { (u - c0) / (c1 - c0) } else { 0.5 };
        self.xs[i - 1] + t * (self.xs[i] - self.xs[i - 1])
    }
}

/// One hedging period: rate `r` per unit time, length `tau`, return law.
#[derive(Debug, Clone)]
pub struct MarketStep {
    pub r: f64,
    pub tau: f64,
    pub dist: ReturnDistribution,
}

impl MarketStep {
    pub fn new(r: f64, tau: f64, dist: ReturnDistribution) -> Result<Self> {
        ensure_finite("r", r)?;
        ensure_positive("tau", tau)?;
        Ok(Self { r, tau, dist })
    }

    /// One-step discount factor `e^{-r tau}`.
    pub fn discount(&self) -> f64 {
        (-self.r * self.tau).exp()
    }
}

/// Steps ordered backward from maturity: `steps[k]` spans `t_{k+1} -> t_k`.
#[derive(Debug, Clone)]
pub struct MarketPath {
    steps: Vec<MarketStep>,
    strike: f64,
    maturity: f64,
}

impl MarketPath {
    /// Path whose maturity is the sum of the step lengths.
    pub fn new(steps: Vec<MarketStep>, strike: f64) -> Result<Self> {
        let maturity = steps.iter().map(|s| s.tau).sum();
        Self::with_maturity(steps, strike, maturity)
    }

    pub fn with_maturity(steps: Vec<MarketStep>, strike: f64, maturity: f64) -> Result<Self> {
        ensure_positive("strike", strike)?;
        ensure_finite("maturity", maturity)?;
        let total: f64 = steps.iter().map(|s| s.tau).sum();
        if (total - maturity).abs() > 1e-9 * maturity.abs().max(1.0) {
            return Err(Error::Domain(format!(
                "step lengths sum to {total}, maturity is {maturity}"
            )));
        }
        Ok(Self {
            steps,
            strike,
            maturity,
        })
    }

    /// `n` identical steps.
    pub fn uniform(step: MarketStep, n: usize, strike: f64) -> Result<Self> {
        Self::new(vec![step; n], strike)
    }

    pub fn steps(&self) -> &[MarketStep] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn strike(&self) -> f64 {
        self.strike
    }

    pub fn maturity(&self) -> f64 {
        self.maturity
    }

    /// `t_k = T - (tau_0 + ... + tau_{k-1})`.
    pub fn time(&self, k: usize) -> f64 {
        self.maturity - self.steps[..k].iter().map(|s| s.tau).sum::<f64>()
    }

    /// Accumulated discount `prod_{m<k} e^{-r_m tau_m}`.
    pub fn discount_to(&self, k: usize) -> f64 {
        (-self.steps[..k].iter().map(|s| s.r * s.tau).sum::<f64>()).exp()
    }

    /// Standard deviation of the total log return over all steps.
    pub fn total_log_sd(&self) -> f64 {
        self.steps
            .iter()
            .map(|s| s.dist.std_dev().powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

/// Rates `[r_lo, r_hi]` for which discrete hedging keeps prices nonnegative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasibilityInterval {
    pub r_lo: f64,
    pub r_hi: f64,
}

impl FeasibilityInterval {
    pub fn contains(&self, r: f64) -> bool {
        r >= self.r_lo && r <= self.r_hi
    }

    pub fn width(&self) -> f64 {
        self.r_hi - self.r_lo
    }
}

/// `r_lo = ln M(1) / tau`, `r_hi = ln(M(2)/M(1)) / tau`.
pub fn feasibility_interval(step: &MarketStep) -> Result<FeasibilityInterval> {
    let l1 = step.dist.log_exp_moment(1.0)?;
    let l2 = step.dist.log_exp_moment(2.0)?;
    Ok(FeasibilityInterval {
        r_lo: l1 / step.tau,
        r_hi: (l2 - l1) / step.tau,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::quad::simpson_refined;

    fn quad_moment(dist: &ReturnDistribution, p: f64) -> f64 {
        let (lo, hi) = (
            dist.mean() - 14.0 * dist.std_dev(),
            dist.mean() + 14.0 * dist.std_dev(),
        );
        simpson_refined(
            |x| (p * x).exp() * dist.density(x),
            lo,
            hi,
            4096,
            1e-13,
            0.0,
            1 << 24,
        )
        .unwrap()
    }

    #[test]
    fn lognormal_exp_moments() {
        // mu*tau = 0.0005, sigma^2*tau = 0.0004
        let d = ReturnDistribution::lognormal(0.05, 0.2, 0.01).unwrap();
        assert_eq!(d.exp_moment(0.0).unwrap(), 1.0);
        assert!((d.exp_moment(1.0).unwrap() - 0.0007f64.exp()).abs() < 1e-15);
        assert!((d.exp_moment(2.0).unwrap() - 0.0018f64.exp()).abs() < 1e-15);
        // quadrature oracle
        for &p in &[-3.5, -2.0, -0.5, 1.0, 2.0, 3.9] {
            let q = quad_moment(&d, p);
            assert!((d.exp_moment(p).unwrap() - q).abs() < 1e-8, "p = {p}");
        }
    }

    #[test]
    fn moment_outside_strip_is_domain_error() {
        let d = ReturnDistribution::lognormal(0.05, 0.2, 0.01).unwrap();
        assert!(matches!(d.exp_moment(4.0), Err(Error::Domain(_))));
        assert!(matches!(d.exp_moment(-4.5), Err(Error::Domain(_))));
    }

    #[test]
    fn step_moments_lognormal() {
        let d = ReturnDistribution::lognormal(0.05, 0.2, 0.01).unwrap();
        let sm = d.step_moments().unwrap();
        let m = quad_moment(&d, 1.0);
        let dd = quad_moment(&d, 2.0) - m * m;
        assert!((sm.m - m).abs() < 1e-12);
        assert!((sm.d - dd).abs() < 1e-11);
        assert!((sm.m - 1.000_700_245).abs() < 1e-9);
        assert!((sm.d - 4.006_4e-4).abs() < 1e-7);
        let direct = d.exp_moment(2.0).unwrap() - sm.m * sm.m;
        assert!((sm.d - direct).abs() < 1e-15);
    }

    #[test]
    fn point_mass_is_rejected() {
        assert!(matches!(
            ReturnDistribution::lognormal(0.0, 0.0, 0.01),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn heavy_tail_bound_is_rejected() {
        let d = ReturnDistribution::lognormal(0.05, 0.2, 0.01).unwrap();
        assert!(d.with_moment_bound(1.5).is_err());
    }

    #[test]
    fn feasibility_lognormal() {
        let step = MarketStep::new(
            0.09,
            0.01,
            ReturnDistribution::lognormal(0.05, 0.2, 0.01).unwrap(),
        )
        .unwrap();
        let iv = feasibility_interval(&step).unwrap();
        assert!((iv.r_lo - 0.07).abs() < 1e-10);
        assert!((iv.r_hi - 0.11).abs() < 1e-10);
        assert!(iv.contains(0.09));
        assert!(!iv.contains(0.05));
    }

    #[test]
    fn feasibility_narrows_with_sigma() {
        for &sigma in &[0.2, 0.02, 0.002] {
            let step = MarketStep::new(
                0.05,
                0.01,
                ReturnDistribution::lognormal(0.05, sigma, 0.01).unwrap(),
            )
            .unwrap();
            let iv = feasibility_interval(&step).unwrap();
            assert!(iv.r_lo < iv.r_hi);
            assert!((iv.width() - sigma * sigma).abs() < 1e-10);
            assert!(iv.r_lo >= 0.05);
        }
    }

    #[test]
    fn custom_density_matches_closed_mixture() {
        let comps = [(0.7, 0.001, 0.015), (0.3, -0.002, 0.03)];
        let closed = ReturnDistribution::normal_mixture(&comps, 4.0).unwrap();
        let c2 = comps;
        let numeric = ReturnDistribution::custom(
            move |x| {
                c2.iter()
                    .map(|&(w, m, s)| w * norm_pdf((x - m) / s) / s)
                    .sum()
            },
            (-0.5, 0.5),
            4.0,
        )
        .unwrap();
        assert_eq!(numeric.kind(), DistributionKind::Custom);
        for &p in &[-3.0, -1.0, 0.0, 0.5, 2.0, 3.5] {
            let a = closed.exp_moment(p).unwrap();
            let b = numeric.exp_moment(p).unwrap();
            assert!((a - b).abs() < 1e-10, "p={p}: {a} vs {b}");
        }
        let iv = feasibility_interval(&MarketStep::new(0.05, 0.01, numeric).unwrap()).unwrap();
        assert!(iv.r_lo < iv.r_hi);
    }

    #[test]
    fn custom_density_must_be_normalised() {
        let r = ReturnDistribution::custom(|x| 2.0 * norm_pdf(x / 0.02) / 0.02, (-1.0, 1.0), 4.0);
        assert!(r.is_err());
    }

    #[test]
    fn quantiles_match_normal_for_custom() {
        let d =
            ReturnDistribution::custom(|x| norm_pdf(x / 0.02) / 0.02, (-0.4, 0.4), 4.0).unwrap();
        for &u in &[0.001, 0.1, 0.5, 0.9, 0.999] {
            let exact = 0.02 * norm_quantile(u);
            assert!((d.quantile(u) - exact).abs() < 1e-7, "u={u}");
        }
    }

    #[test]
    fn path_bookkeeping() {
        let step = MarketStep::new(
            0.09,
            0.01,
            ReturnDistribution::lognormal(0.05, 0.2, 0.01).unwrap(),
        )
        .unwrap();
        let path = MarketPath::uniform(step.clone(), 100, 100.0).unwrap();
        assert!((path.maturity() - 1.0).abs() < 1e-12);
        assert!((path.time(100)).abs() < 1e-12);
        assert!((path.discount_to(100) - (-0.09f64).exp()).abs() < 1e-14);
        assert!(MarketPath::with_maturity(vec![step; 10], 100.0, 1.0).is_err());
    }
}
