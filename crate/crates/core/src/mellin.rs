//! Mellin-space solution of the pricing recursion.
//!
//! With `F_k(p) = ∫_0^∞ s^{p-1} V_k(s) ds`, one backward step multiplies the
//! transform by `U(-p)`, where `U(p) = ∫ e^{px} f(x) dx`. Hence
//! `F_k(p) = F_0(p) ∏_{m<k} U_m(-p)` on the strip `1 - a < Re p < -1`, and
//! prices come back through the inverse transform along a vertical line
//! `Re p = a0` inside that strip.
//!
//! The inverse integral is a trapezoid sum over `[0, P]` in `Im p`, using
//! `F(conj p) = conj F(p)`. Its discretisation error is aliasing: with node
//! spacing `dw` the sum returns `Σ_j V(x e^{jL}) e^{a0 j L}`, `L = 2π/dw`, so
//! the node count doubles until the sum settles.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{ensure_positive, Error, Result};
use crate::kernel::{Payoff, PricingKernel};
use crate::market_model::{MarketPath, DEFAULT_LOGNORMAL_MOMENT_BOUND};
use crate::numeric::quad::{adaptive_simpson, simpson_refined};
use crate::numeric::UniformHermite;
use crate::par;
use crate::report::CsvTable;

pub type Evaluator = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;

/// `|F(a0 + iP)| / |F(a0)|` at the automatically chosen truncation height.
pub const DECAY_RATIO: f64 = 1e-12;
/// Relative change between node doublings at which an inversion is accepted.
pub const NODE_REL_TOL: f64 = 1e-8;
pub const DEFAULT_TAIL_TOL: f64 = 1e-6;
/// Nodes of the cached Green-function grid.
pub const GREEN_NODES: usize = 4096;
/// Half-width of the Green-function grid in standard deviations of the
/// total log return.
pub const GREEN_HALF_WIDTH_SD: f64 = 12.0;

const P_MAX_CAP: f64 = 1e7;
const MAX_NODES: usize = 1 << 26;
const CHUNK: usize = 1 << 16;
const CONJUGATE_TOL: f64 = 1e-8;

/// A Mellin transform together with the strip of `Re p` where it exists.
#[derive(Clone)]
pub struct TransformFn {
    evaluator: Evaluator,
    strip: (f64, f64),
    /// Standard deviation of the total log return, if the transform carries
    /// kernel factors; sets the first truncation height tried.
    log_sd: Option<f64>,
}

impl fmt::Debug for TransformFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TransformFn")
            .field("strip", &self.strip)
            .field("log_sd", &self.log_sd)
            .finish()
    }
}

impl TransformFn {
    /// Wrap a pure evaluator valid for `lo < Re p < hi`.
    pub fn new(
        strip: (f64, f64),
        evaluator: impl Fn(Complex64) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            evaluator: Arc::new(evaluator),
            strip,
            log_sd: None,
        }
    }

    pub fn strip(&self) -> (f64, f64) {
        self.strip
    }

    pub fn in_strip(&self, re: f64) -> bool {
        re > self.strip.0 && re < self.strip.1
    }

    pub fn eval(&self, p: Complex64) -> Result<Complex64> {
        self.check(p.re, "transform evaluation")?;
        Ok((self.evaluator)(p))
    }

    fn check(&self, re: f64, context: &str) -> Result<()> {
        if self.in_strip(re) {
            Ok(())
        } else {
            Err(Error::Strip {
                re,
                lo: self.strip.0,
                hi: self.strip.1,
                context: context.into(),
            })
        }
    }

    /// `E^{p+1} / (p (p + 1))`, the transform of `max(s - E, 0)`.
    pub fn call_payoff(strike: f64) -> Result<Self> {
        ensure_positive("strike", strike)?;
        let ln_e = strike.ln();
        Ok(Self::new((f64::NEG_INFINITY, -1.0), move |p| {
            call_transform_unchecked(ln_e, p)
        }))
    }

    /// `F_k(p) = F_0(p) ∏_{m<k} U_m(-p)` for a call struck at the path strike.
    pub fn product(path: &MarketPath, k: usize) -> Result<Self> {
        let factors = KernelProduct::new(path, k)?;
        let ln_e = path.strike().ln();
        let a = path_moment_bound(path);
        let log_sd = factors.log_sd();
        Ok(Self {
            strip: (1.0 - a, -1.0),
            log_sd,
            evaluator: Arc::new(move |p| call_transform_unchecked(ln_e, p) * factors.eval(p)),
        })
    }

    /// `∏_{m<k} U_m(-p)`, the transform of the Green function `G_k`.
    pub fn green(path: &MarketPath, k: usize) -> Result<Self> {
        let factors = KernelProduct::new(path, k)?;
        let a = path_moment_bound(path);
        let log_sd = factors.log_sd();
        Ok(Self {
            strip: (1.0 - a, a - 1.0),
            log_sd,
            evaluator: Arc::new(move |p| factors.eval(p)),
        })
    }
}

fn call_transform_unchecked(ln_e: f64, p: Complex64) -> Complex64 {
    ((p + 1.0) * ln_e).exp() / (p * (p + 1.0))
}

/// Smallest declared moment bound along the path.
fn path_moment_bound(path: &MarketPath) -> f64 {
    path.steps()
        .iter()
        .map(|s| s.dist.moment_bound())
        .reduce(f64::min)
        .unwrap_or(DEFAULT_LOGNORMAL_MOMENT_BOUND)
}

#[derive(Clone)]
struct KernelProduct {
    kernels: Arc<Vec<PricingKernel>>,
}

impl KernelProduct {
    fn new(path: &MarketPath, k: usize) -> Result<Self> {
        if k > path.len() {
            return Err(Error::Domain(format!(
                "step index {k} beyond the {} steps of the path",
                path.len()
            )));
        }
        let kernels = path.steps()[..k]
            .iter()
            .map(PricingKernel::new)
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            kernels: Arc::new(kernels),
        })
    }

    fn log_sd(&self) -> Option<f64> {
        if self.kernels.is_empty() {
            return None;
        }
        let var: f64 = self
            .kernels
            .iter()
            .map(|k| k.step().dist.std_dev().powi(2))
            .sum();
        Some(var.sqrt())
    }

    fn eval(&self, p: Complex64) -> Complex64 {
        self.kernels
            .iter()
            .map(|k| kernel_transform_unchecked(k, -p))
            .fold(Complex64::new(1.0, 0.0), |acc, u| acc * u)
    }
}

/// `∫_0^∞ x^{p-1} h(x) dx`, integrated in `t = ln x`.
///
/// The window grows until the integrand has decayed on both sides; an
/// integrand that does not decay means `Re p` lies outside the convergence
/// strip of `h`.
pub fn mellin_forward(h: impl Fn(f64) -> f64 + Sync, p: Complex64) -> Result<Complex64> {
    const DECAYED: f64 = 1e-15;
    const MAX_REACH: f64 = 704.0;
    let g = |t: f64| -> Complex64 {
        let v = h(t.exp());
        if v == 0.0 {
            Complex64::new(0.0, 0.0)
        } else {
            (p * t).exp() * v
        }
    };
    let peak_on = |lo: f64, hi: f64| -> f64 {
        (0..=4096)
            .map(|i| g(lo + (hi - lo) * i as f64 / 4096.0).norm())
            .fold(0.0, f64::max)
    };
    let edge = |t: f64, dir: f64| -> f64 {
        [0.0, 0.25, 0.5, 1.0]
            .iter()
            .map(|d| g(t - dir * d).norm())
            .fold(0.0, f64::max)
    };
    let mut lo = -8.0;
    let mut hi = 8.0;
    let mut peak = peak_on(lo, hi);
    loop {
        if !peak.is_finite() {
            return Err(divergent(p, "integrand overflows"));
        }
        let lo_ok = edge(lo, -1.0) <= DECAYED * peak;
        let hi_ok = edge(hi, 1.0) <= DECAYED * peak;
        if lo_ok && hi_ok {
            break;
        }
        if !lo_ok {
            if lo <= -MAX_REACH {
                return Err(divergent(p, "integrand does not decay as x -> 0"));
            }
            lo = (2.0 * lo).max(-MAX_REACH);
        }
        if !hi_ok {
            if hi >= MAX_REACH {
                return Err(divergent(p, "integrand does not decay as x -> infinity"));
            }
            hi = (2.0 * hi).min(MAX_REACH);
        }
        peak = peak.max(peak_on(lo, hi));
    }
    if peak == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let pieces = (hi - lo).ceil() as usize;
    let width = (hi - lo) / pieces as f64;
    let tol = 1e-13 * peak * width;
    let parts = par::map_range(pieces, |i| {
        let a = lo + i as f64 * width;
        adaptive_simpson(&g, a, a + width, tol, 40)
    });
    parts
        .into_iter()
        .try_fold(Complex64::new(0.0, 0.0), |acc, v| Ok(acc + v?))
}

fn divergent(p: Complex64, why: &str) -> Error {
    Error::Strip {
        re: p.re,
        lo: f64::NAN,
        hi: f64::NAN,
        context: format!("Mellin integral diverges at p = {p}: {why}"),
    }
}

/// Closed transform of the call payoff; defined for `Re p < -1`.
pub fn payoff_transform_call(strike: f64, p: Complex64) -> Result<Complex64> {
    TransformFn::call_payoff(strike)?.eval(p)
}

/// `U(p) = ∫ e^{px} f(x) dx` from the exponential moments of the return law:
/// `U(p) = (M(p+1) - m M(p)) (1 - e^{-r tau} m)/d + e^{-r tau} M(p)`.
pub fn kernel_transform(kern: &PricingKernel, p: Complex64) -> Result<Complex64> {
    let a = kern.step().dist.moment_bound();
    if !(p.re.abs() <= a - 1.0) {
        return Err(Error::Strip {
            re: p.re,
            lo: 1.0 - a,
            hi: a - 1.0,
            context: "kernel transform needs M(p) and M(p + 1)".into(),
        });
    }
    let v = kernel_transform_unchecked(kern, p);
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(Error::Domain(format!(
            "kernel transform is not finite at p = {p}"
        )))
    }
}

fn kernel_transform_unchecked(kern: &PricingKernel, p: Complex64) -> Complex64 {
    let dist = &kern.step().dist;
    let nan = Complex64::new(f64::NAN, f64::NAN);
    let mp = dist.exp_moment_complex(p).unwrap_or(nan);
    let mp1 = dist.exp_moment_complex(p + 1.0).unwrap_or(nan);
    (mp1 - mp * kern.m()) * kern.covariance_weight() + mp * kern.discount()
}

/// `F_k(p)` for the call struck at the path strike.
pub fn product_transform(path: &MarketPath, k: usize, p: Complex64) -> Result<Complex64> {
    TransformFn::product(path, k)?.eval(p)
}

/// Vertical inversion contour `Re p = a0`, truncated at `|Im p| <= P`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MellinLine {
    pub a0: f64,
    /// `P`; `None` picks the height where the transform has decayed by
    /// [`DECAY_RATIO`].
    pub p_max: Option<f64>,
    /// Starting node count on `[0, P]`; `None` starts from `4P/π`. Nodes
    /// double until the sum settles either way.
    pub nodes: Option<usize>,
    /// Largest accepted truncation-tail estimate, relative to `max(1, |V|)`.
    pub tail_tol: f64,
}

impl Default for MellinLine {
    fn default() -> Self {
        Self {
            a0: -0.5 * DEFAULT_LOGNORMAL_MOMENT_BOUND,
            p_max: None,
            nodes: None,
            tail_tol: DEFAULT_TAIL_TOL,
        }
    }
}

impl MellinLine {
    /// Line through the strip midpoint `a0 = -a/2`.
    pub fn for_moment_bound(a: f64) -> Result<Self> {
        if !(a.is_finite() && a > 2.0) {
            return Err(Error::invalid(
                "a",
                a,
                "moment bound must satisfy a > 2 so the strip 1 - a < Re p < -1 is non-empty",
            ));
        }
        Ok(Self {
            a0: -0.5 * a,
            ..Self::default()
        })
    }

    pub fn for_path(path: &MarketPath) -> Result<Self> {
        Self::for_moment_bound(path_moment_bound(path))
    }

    pub fn with_a0(self, a0: f64) -> Self {
        Self { a0, ..self }
    }

    pub fn with_p_max(self, p_max: f64) -> Self {
        Self {
            p_max: Some(p_max),
            ..self
        }
    }

    pub fn with_nodes(self, nodes: usize) -> Self {
        Self {
            nodes: Some(nodes),
            ..self
        }
    }

    pub fn with_tail_tol(self, tail_tol: f64) -> Self {
        Self { tail_tol, ..self }
    }

    fn validate(&self) -> Result<()> {
        if let Some(p) = self.p_max {
            ensure_positive("contour p_max", p)?;
        }
        if let Some(n) = self.nodes {
            if n < 2 || n % 2 == 1 {
                return Err(Error::invalid(
                    "contour nodes",
                    n as f64,
                    "must be even and at least 2",
                ));
            }
        }
        ensure_positive("contour tail_tol", self.tail_tol)?;
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Sums {
    full: f64,
    half: f64,
    slope: f64,
}

/// Trapezoid sums of `Re[F(a0 + iw) e^{-iw ln x}]` over `[0, P]` and
/// `[0, P/2]`, plus the same for `-p F(p)` when `derivative` is set.
struct Contour<'a> {
    f: &'a TransformFn,
    a0: f64,
    p_max: f64,
}

struct Inversion {
    values: Vec<f64>,
    slopes: Vec<f64>,
    tails: Vec<f64>,
    nodes: usize,
}

impl Contour<'_> {
    fn sample(&self, w: f64) -> Complex64 {
        (self.f.evaluator)(Complex64::new(self.a0, w))
    }

    /// Streams the nodes in fixed chunks so memory stays bounded and the
    /// summation order does not depend on the thread count.
    fn sums(&self, n: usize, ln_x: &[f64], derivative: bool) -> Result<(Vec<Sums>, [f64; 2])> {
        let dw = self.p_max / n as f64;
        let mut acc = vec![Sums::default(); ln_x.len()];
        let mut edge = [0.0; 2];
        let mut start = 0;
        while start <= n {
            let end = (start + CHUNK).min(n + 1);
            let fs = par::map_range(end - start, |i| self.sample((start + i) as f64 * dw));
            if let Some(bad) = fs
                .iter()
                .position(|v| !(v.re.is_finite() && v.im.is_finite()))
            {
                return Err(Error::Contour {
                    reason: format!(
                        "transform not finite at p = {} + {}i",
                        self.a0,
                        (start + bad) as f64 * dw
                    ),
                    p_max: self.p_max,
                    nodes: n,
                    hint: "check the moment bound and the strip of the return law",
                });
            }
            if (start..end).contains(&(n / 2)) {
                edge[0] = fs[n / 2 - start].norm();
            }
            if end == n + 1 {
                edge[1] = fs[n - start].norm();
            }
            let partial = par::map_slice(ln_x, |&lx| {
                let mut s = Sums::default();
                for (i, fv) in fs.iter().enumerate() {
                    let j = start + i;
                    let w = j as f64 * dw;
                    let (sin, cos) = (w * lx).sin_cos();
                    let term = fv.re * cos + fv.im * sin;
                    let full_w = if j == 0 || j == n { 0.5 } else { 1.0 };
                    s.full += full_w * term;
                    if j <= n / 2 {
                        let half_w = if j == 0 || j == n / 2 { 0.5 } else { 1.0 };
                        s.half += half_w * term;
                    }
                    if derivative {
                        // -p F(p) with p = a0 + iw
                        let d = -Complex64::new(self.a0, w) * fv;
                        s.slope += full_w * (d.re * cos + d.im * sin);
                    }
                }
                s
            });
            for (a, p) in acc.iter_mut().zip(partial) {
                a.full += p.full;
                a.half += p.half;
                a.slope += p.slope;
            }
            start = end;
        }
        for (a, &lx) in acc.iter_mut().zip(ln_x) {
            let scale = (-self.a0 * lx).exp() * dw / PI;
            a.full *= scale;
            a.half *= scale;
            a.slope *= scale;
        }
        Ok((acc, edge))
    }
}

fn choose_p_max(f: &TransformFn, a0: f64) -> Result<f64> {
    let at = |w: f64| (f.evaluator)(Complex64::new(a0, w)).norm();
    let axis = at(0.0);
    if !(axis.is_finite() && axis > 0.0) {
        return Err(Error::Contour {
            reason: format!("|F(a0)| = {axis} on the real axis"),
            p_max: 0.0,
            nodes: 0,
            hint: "the transform must be finite and non-zero at a0",
        });
    }
    let mut p = f.log_sd.map_or(1.0, |sd| (8.0 / sd).max(1.0));
    loop {
        let worst = [1.0, 1.19, 1.41]
            .iter()
            .map(|c| at(c * p))
            .fold(0.0, f64::max);
        if worst <= DECAY_RATIO * axis {
            return Ok(p);
        }
        if p > P_MAX_CAP {
            return Err(Error::Contour {
                reason: "transform has not decayed along the contour".into(),
                p_max: p,
                nodes: 0,
                hint: "set contour.p_max explicitly",
            });
        }
        p *= 2.0;
    }
}

fn invert(f: &TransformFn, line: &MellinLine, xs: &[f64], derivative: bool) -> Result<Inversion> {
    line.validate()?;
    f.check(line.a0, "inversion contour must lie inside the strip")?;
    if let Some(&x) = xs.iter().find(|&&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::invalid(
            "x",
            x,
            "inverse Mellin transform needs x > 0",
        ));
    }
    let probe = Complex64::new(line.a0, 0.731);
    let up = (f.evaluator)(probe);
    let down = (f.evaluator)(probe.conj());
    if (down - up.conj()).norm() > CONJUGATE_TOL * up.norm().max(f64::MIN_POSITIVE) {
        return Err(Error::Contour {
            reason: "transform is not conjugate-symmetric, original is not real".into(),
            p_max: 0.0,
            nodes: 0,
            hint: "only real-valued originals can be inverted",
        });
    }
    let p_max = match line.p_max {
        Some(p) => p,
        None => choose_p_max(f, line.a0)?,
    };
    let contour = Contour {
        f,
        a0: line.a0,
        p_max,
    };
    let ln_x: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let mut n = line
        .nodes
        .unwrap_or_else(|| ((4.0 * p_max / PI).ceil() as usize).max(16));
    n += n % 2;
    let (mut prev, _) = contour.sums(n, &ln_x, derivative)?;
    let (sums, edge) = loop {
        if 2 * n > MAX_NODES {
            return Err(Error::Contour {
                reason: "trapezoid sum did not settle under node doubling".into(),
                p_max,
                nodes: n,
                hint: "the original decays too slowly for aliasing to vanish",
            });
        }
        n *= 2;
        let (next, edge) = contour.sums(n, &ln_x, derivative)?;
        let change = next
            .iter()
            .zip(&prev)
            .map(|(a, b)| (a.full - b.full).abs())
            .fold(0.0, f64::max);
        let scale = next.iter().map(|s| s.full.abs()).fold(1.0, f64::max);
        if change <= NODE_REL_TOL * scale {
            break (next, edge);
        }
        prev = next;
    };

    // |F| ~ w^{-beta} between P/2 and P bounds the tail in absolute value;
    // the half-height difference accounts for oscillatory cancellation.
    let beta = (edge[0] / edge[1]).log2();
    let mut tails = Vec::with_capacity(xs.len());
    for (s, &lx) in sums.iter().zip(&ln_x) {
        let bound = if edge[1] == 0.0 {
            0.0
        } else if beta > 1.0 {
            (-line.a0 * lx).exp() * edge[1] * p_max / ((beta - 1.0) * PI)
        } else {
            f64::INFINITY
        };
        let tail = bound.min((s.full - s.half).abs());
        if tail > line.tail_tol * s.full.abs().max(1.0) {
            return Err(Error::Contour {
                reason: format!(
                    "truncation tail estimate {tail:e} at x = {} exceeds tolerance {:e}",
                    lx.exp(),
                    line.tail_tol
                ),
                p_max,
                nodes: n,
                hint: "increase contour.p_max",
            });
        }
        tails.push(tail);
    }
    Ok(Inversion {
        values: sums.iter().map(|s| s.full).collect(),
        slopes: sums.iter().map(|s| s.slope).collect(),
        tails,
        nodes: n,
    })
}

/// `(1/2πi) ∫ F(p) x^{-p} dp` along `line`.
pub fn mellin_inverse(f: &TransformFn, line: &MellinLine, x: f64) -> Result<f64> {
    Ok(mellin_inverse_many(f, line, &[x])?[0])
}

/// [`mellin_inverse`] at many points, sharing the transform samples.
pub fn mellin_inverse_many(f: &TransformFn, line: &MellinLine, xs: &[f64]) -> Result<Vec<f64>> {
    if xs.is_empty() {
        return Ok(Vec::new());
    }
    Ok(invert(f, line, xs, false)?.values)
}

/// Diagnostics of one inversion sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct InversionReport {
    pub values: Vec<f64>,
    pub tail_estimates: Vec<f64>,
    pub nodes: usize,
}

pub fn mellin_inverse_report(
    f: &TransformFn,
    line: &MellinLine,
    xs: &[f64],
) -> Result<InversionReport> {
    let inv = invert(f, line, xs, false)?;
    Ok(InversionReport {
        values: inv.values,
        tail_estimates: inv.tails,
        nodes: inv.nodes,
    })
}

/// `V_k(s)` for the call struck at the path strike.
pub fn price_mellin(path: &MarketPath, k: usize, s: f64, line: &MellinLine) -> Result<f64> {
    Ok(price_mellin_many(path, k, &[s], line)?[0])
}

pub fn price_mellin_many(
    path: &MarketPath,
    k: usize,
    spots: &[f64],
    line: &MellinLine,
) -> Result<Vec<f64>> {
    mellin_inverse_many(&TransformFn::product(path, k)?, line, spots)
}

/// Mellin-route price for a payoff given as a [`Payoff`]; only calls struck
/// at the path strike have a closed transform.
pub fn price_mellin_payoff(
    path: &MarketPath,
    k: usize,
    payoff: &dyn Payoff,
    spots: &[f64],
    line: &MellinLine,
) -> Result<Vec<f64>> {
    match payoff.call_strike() {
        Some(e) if e == path.strike() => price_mellin_many(path, k, spots, line),
        _ => Err(Error::Unsupported(
            "closed Mellin transforms exist only for the call payoff; use the Green-function route"
                .into(),
        )),
    }
}

/// `G_k` sampled on a log-uniform grid, with `V_k(s) = ∫ G_k(s/y) V_0(y) dy/y`.
///
/// Immutable once built, so one instance serves any number of concurrent
/// pricing calls.
#[derive(Debug, Clone)]
pub struct GreenFunction {
    k: usize,
    /// `g(u) = G_k(e^u)` with exact derivatives from the contour.
    curve: UniformHermite,
}

impl GreenFunction {
    pub fn build(path: &MarketPath, k: usize, line: &MellinLine) -> Result<Self> {
        if k == 0 {
            return Err(Error::Unsupported(
                "G_0 is a point mass; price the payoff directly".into(),
            ));
        }
        let transform = TransformFn::green(path, k)?;
        let steps = &path.steps()[..k];
        let centre: f64 = -steps.iter().map(|s| s.dist.mean()).sum::<f64>();
        let sd = transform.log_sd.unwrap_or(1.0);
        let half = GREEN_HALF_WIDTH_SD * sd;
        let u_lo = centre - half;
        let h = 2.0 * half / (GREEN_NODES - 1) as f64;
        let xs: Vec<f64> = (0..GREEN_NODES)
            .map(|i| (u_lo + i as f64 * h).exp())
            .collect();
        let inv = invert(&transform, line, &xs, true)?;
        // dG/du = x dG/dx is the inverse transform of -p F(p)
        Ok(Self {
            k,
            curve: UniformHermite::with_slopes(u_lo, h, inv.values, inv.slopes),
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// `[ln x_min, ln x_max]` of the cached grid; `G_k` is zero outside.
    pub fn log_range(&self) -> (f64, f64) {
        (self.curve.x0(), self.curve.x_max())
    }

    pub fn eval(&self, x: f64) -> f64 {
        if !(x > 0.0) {
            return 0.0;
        }
        self.eval_log(x.ln())
    }

    pub fn eval_log(&self, u: f64) -> f64 {
        self.curve.eval(u).unwrap_or(0.0)
    }

    /// `∫ G_k(x) dx / x`, which equals `∏ U_m(0)`, the k-step discount.
    pub fn mass(&self) -> Result<f64> {
        let (lo, hi) = self.log_range();
        simpson_refined(
            |u| self.eval_log(u),
            lo,
            hi,
            GREEN_NODES,
            1e-12,
            1e-15,
            1 << 22,
        )
    }

    /// `V_k(s) = ∫ g(u) payoff(s e^{-u}) du`.
    pub fn price(&self, payoff: &dyn Payoff, s: f64) -> Result<f64> {
        ensure_positive("spot", s)?;
        let (lo, hi) = self.log_range();
        let f = |u: f64| self.eval_log(u) * payoff.value(s * (-u).exp());
        let abs_tol = 1e-14 * (s + payoff.value(s).abs());
        let piece = |a: f64, b: f64| simpson_refined(f, a, b, GREEN_NODES, 1e-11, abs_tol, 1 << 22);
        match payoff.call_strike() {
            Some(e) => {
                let kink = (s / e).ln();
                if kink > lo && kink < hi {
                    Ok(piece(lo, kink)? + piece(kink, hi)?)
                } else {
                    piece(lo, hi)
                }
            }
            None => piece(lo, hi),
        }
    }

    pub fn price_many(&self, payoff: &dyn Payoff, spots: &[f64]) -> Result<Vec<f64>> {
        par::map_slice(spots, |&s| self.price(payoff, s))
            .into_iter()
            .collect()
    }

    pub fn to_csv(&self) -> CsvTable {
        let mut t = CsvTable::new(["x", "G"]);
        let lo = self.curve.x0();
        let h = self.curve.spacing();
        for (i, g) in self.curve.values().iter().enumerate() {
            t.push_numbers(&[(lo + i as f64 * h).exp(), *g]);
        }
        t
    }
}

/// Green-function route for a general payoff.
pub fn green_price(
    path: &MarketPath,
    k: usize,
    payoff: &dyn Payoff,
    s: f64,
    line: &MellinLine,
) -> Result<f64> {
    if k == 0 {
        return Ok(payoff.value(s));
    }
    GreenFunction::build(path, k, line)?.price(payoff, s)
}
