//! Signed pricing kernel and the backward pricing recursion.
//!
//! The value one step further from maturity is the kernel-weighted integral
//! `V_{k+1}(s) = ∫ V_k(s e^x) f_k(x) dx`, with
//! `f_k(x) = ((e^x - m)(1 - e^{-r tau} m)/d + e^{-r tau}) u(x)`.
//! The kernel integrates to `e^{-r tau}` and maps `s` to itself, but it is not
//! a density: it goes negative whenever `r` leaves the feasibility interval.

use crate::error::{Error, Result};
use crate::market_model::{MarketPath, MarketStep, StepMoments};
use crate::numeric::interp::{hermite_basis, hermite_basis_derivative};
use crate::numeric::quad::{simpson_refined, simpson_weights};
use crate::numeric::UniformHermite;
use crate::par;
use crate::report::CsvTable;

/// Minimum number of Simpson panels across the truncated return range.
pub const MIN_PANELS: usize = 4096;
/// Relative change between panel doublings at which a step is accepted.
pub const STEP_REL_TOL: f64 = 1e-9;
const MAX_PANELS: usize = 1 << 22;

/// Noise floor separating quadrature error from genuinely negative prices.
pub fn negativity_tolerance(strike: f64) -> f64 {
    1e-9 * strike
}

#[derive(Debug, Clone)]
pub struct PricingKernel {
    step: MarketStep,
    moments: StepMoments,
    discount: f64,
    /// `(1 - e^{-r tau} m) / d`
    slope: f64,
}

impl PricingKernel {
    pub fn new(step: &MarketStep) -> Result<Self> {
        let moments = step.dist.step_moments()?;
        let log_m = step.dist.log_exp_moment(1.0)?;
        let one_minus = -(log_m - step.r * step.tau).exp_m1();
        Ok(Self {
            step: step.clone(),
            moments,
            discount: step.discount(),
            slope: one_minus / moments.d,
        })
    }

    pub fn step(&self) -> &MarketStep {
        &self.step
    }

    pub fn m(&self) -> f64 {
        self.moments.m
    }

    pub fn d(&self) -> f64 {
        self.moments.d
    }

    pub fn discount(&self) -> f64 {
        self.discount
    }

    /// Coefficient of `(e^x - m) u(x)` in the kernel.
    pub fn covariance_weight(&self) -> f64 {
        self.slope
    }

    /// `f(x)`; negative values are legitimate.
    pub fn eval(&self, x: f64) -> f64 {
        ((x.exp() - self.moments.m) * self.slope + self.discount) * self.step.dist.density(x)
    }
}

/// Affine function `a + b s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Affine {
    pub a: f64,
    pub b: f64,
}

impl Affine {
    pub const ZERO: Affine = Affine { a: 0.0, b: 0.0 };

    pub fn eval(&self, s: f64) -> f64 {
        self.a + self.b * s
    }
}

/// Asymptotic forms of a price curve below and above the grid.
///
/// Affine forms are propagated exactly by the kernel: `a + b s` maps to
/// `a e^{-r tau} + b s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineTails {
    pub lower: Affine,
    pub upper: Affine,
}

impl AffineTails {
    pub fn both(f: Affine) -> Self {
        Self { lower: f, upper: f }
    }

    fn discounted(&self, discount: f64) -> Self {
        Self {
            lower: Affine {
                a: self.lower.a * discount,
                b: self.lower.b,
            },
            upper: Affine {
                a: self.upper.a * discount,
                b: self.upper.b,
            },
        }
    }
}

/// Terminal payoff `V_0(s)` together with its off-grid asymptotics.
pub trait Payoff: Send + Sync {
    fn value(&self, s: f64) -> f64;
    fn tails(&self) -> AffineTails;
    /// Strike, if this is a plain call (the only payoff with a closed
    /// Mellin transform).
    fn call_strike(&self) -> Option<f64> {
        None
    }
}

/// `max(s - E, 0)`.
#[derive(Debug, Clone, Copy)]
pub struct CallPayoff {
    pub strike: f64,
}

impl Payoff for CallPayoff {
    fn value(&self, s: f64) -> f64 {
        (s - self.strike).max(0.0)
    }
    fn tails(&self) -> AffineTails {
        AffineTails {
            lower: Affine::ZERO,
            upper: Affine {
                a: -self.strike,
                b: 1.0,
            },
        }
    }
    fn call_strike(&self) -> Option<f64> {
        Some(self.strike)
    }
}

/// Claim paying `a + b s` everywhere (bond for `b = 0`, forward for `a = 0`).
#[derive(Debug, Clone, Copy)]
pub struct AffinePayoff(pub Affine);

impl AffinePayoff {
    pub fn bond(face: f64) -> Self {
        Self(Affine { a: face, b: 0.0 })
    }
    pub fn linear(b: f64) -> Self {
        Self(Affine { a: 0.0, b })
    }
}

impl Payoff for AffinePayoff {
    fn value(&self, s: f64) -> f64 {
        self.0.eval(s)
    }
    fn tails(&self) -> AffineTails {
        AffineTails::both(self.0)
    }
}

/// Payoff given as a closure with explicit tails.
pub struct FnPayoff<F> {
    pub f: F,
    pub tails: AffineTails,
}

impl<F: Fn(f64) -> f64 + Send + Sync> Payoff for FnPayoff<F> {
    fn value(&self, s: f64) -> f64 {
        (self.f)(s)
    }
    fn tails(&self) -> AffineTails {
        self.tails
    }
}

/// Log-uniform grid layout in `ln(s/E)` over `[-L, L]`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct GridSpec {
    /// `L`; `None` picks `max(8 sigma sqrt(T), 4)` from the path.
    pub half_width: Option<f64>,
    /// Node count; `None` picks the smallest `2^j + 1 >= 2049` whose spacing
    /// resolves the narrowest step density with [`CELLS_PER_SD`] cells per
    /// standard deviation, capped at [`MAX_AUTO_NODES`].
    pub nodes: Option<usize>,
}

/// Grid cells per standard deviation of the narrowest one-step log return.
pub const CELLS_PER_SD: f64 = 16.0;
pub const MAX_AUTO_NODES: usize = (1 << 15) + 1;

impl GridSpec {
    pub fn resolve(&self, path: &MarketPath) -> Result<(f64, usize)> {
        let l = self
            .half_width
            .unwrap_or_else(|| (8.0 * path.total_log_sd()).max(4.0));
        if !(l.is_finite() && l > 0.0) {
            return Err(Error::invalid("grid half_width", l, "must be > 0"));
        }
        let nodes = match self.nodes {
            Some(n) => n,
            None => {
                let sd = path
                    .steps()
                    .iter()
                    .map(|st| st.dist.std_dev())
                    .fold(f64::INFINITY, f64::min);
                let mut n = 2049;
                while n < MAX_AUTO_NODES && 2.0 * l / (n - 1) as f64 > sd / CELLS_PER_SD {
                    n = 2 * n - 1;
                }
                n
            }
        };
        if nodes < 8 {
            return Err(Error::invalid(
                "grid nodes",
                nodes as f64,
                "need at least 8 nodes",
            ));
        }
        Ok((l, nodes))
    }
}

/// Option values at log-uniform asset prices for one step index.
#[derive(Debug, Clone)]
pub struct PriceGrid {
    strike: f64,
    step_index: usize,
    /// Interpolant of `V` in `y = ln(s/E)`.
    curve: UniformHermite,
    tails: AffineTails,
}

impl PriceGrid {
    /// Sample `f` at `nodes` points with `ln(s/E)` uniform on `[log_lo, log_hi]`.
    ///
    /// Node derivatives are one-sided differences of `f` itself, so kinks of
    /// `f` that sit on nodes (the strike, for instance) are kept exact.
    pub fn sample(
        strike: f64,
        log_lo: f64,
        log_hi: f64,
        nodes: usize,
        f: impl Fn(f64) -> f64,
        tails: AffineTails,
    ) -> Self {
        let h = (log_hi - log_lo) / (nodes - 1) as f64;
        let delta = 1e-3 * h;
        let g = |y: f64| f(strike * y.exp());
        let mut values = Vec::with_capacity(nodes);
        let mut left = Vec::with_capacity(nodes);
        let mut right = Vec::with_capacity(nodes);
        for i in 0..nodes {
            let y = log_lo + i as f64 * h;
            let v = g(y);
            values.push(v);
            right.push((-3.0 * v + 4.0 * g(y + delta) - g(y + 2.0 * delta)) / (2.0 * delta));
            left.push((3.0 * v - 4.0 * g(y - delta) + g(y - 2.0 * delta)) / (2.0 * delta));
        }
        Self {
            strike,
            step_index: 0,
            curve: UniformHermite::with_one_sided_slopes(log_lo, h, values, left, right),
            tails,
        }
    }

    /// Payoff grid `V_0` for a path.
    pub fn payoff(path: &MarketPath, payoff: &dyn Payoff, spec: &GridSpec) -> Result<Self> {
        let (l, n) = spec.resolve(path)?;
        Ok(Self::sample(
            path.strike(),
            -l,
            l,
            n,
            |s| payoff.value(s),
            payoff.tails(),
        ))
    }

    fn from_parts(
        strike: f64,
        curve: UniformHermite,
        tails: AffineTails,
        step_index: usize,
    ) -> Self {
        Self {
            strike,
            step_index,
            curve,
            tails,
        }
    }

    pub fn strike(&self) -> f64 {
        self.strike
    }

    pub fn step_index(&self) -> usize {
        self.step_index
    }

    pub fn len(&self) -> usize {
        self.curve.len()
    }

    pub fn is_empty(&self) -> bool {
        self.curve.is_empty()
    }

    pub fn log_lo(&self) -> f64 {
        self.curve.x0()
    }

    pub fn log_hi(&self) -> f64 {
        self.curve.x_max()
    }

    /// Spacing in `ln s`.
    pub fn log_spacing(&self) -> f64 {
        self.curve.spacing()
    }

    pub fn tails(&self) -> AffineTails {
        self.tails
    }

    pub fn s(&self, i: usize) -> f64 {
        self.strike * (self.curve.x0() + i as f64 * self.curve.spacing()).exp()
    }

    pub fn s_min(&self) -> f64 {
        self.s(0)
    }

    pub fn s_max(&self) -> f64 {
        self.s(self.len() - 1)
    }

    pub fn values(&self) -> &[f64] {
        self.curve.values()
    }

    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values()
            .iter()
            .enumerate()
            .map(|(i, &v)| (self.s(i), v))
    }

    pub fn contains(&self, s: f64) -> bool {
        s >= self.s_min() * (1.0 - 1e-12) && s <= self.s_max() * (1.0 + 1e-12)
    }

    /// `V(s)`: cubic Hermite interpolation on the grid, affine tails outside.
    pub fn value_at(&self, s: f64) -> f64 {
        if !(s > 0.0) {
            return self.tails.lower.eval(s.max(0.0));
        }
        let y = (s / self.strike).ln();
        match self.curve.eval(y) {
            Some(v) => v,
            None if y < self.curve.x0() => self.tails.lower.eval(s),
            None => self.tails.upper.eval(s),
        }
    }

    pub fn to_csv(&self) -> CsvTable {
        let mut t = CsvTable::new(["s", "V"]);
        for (s, v) in self.nodes() {
            t.push_numbers(&[s, v]);
        }
        t
    }

    /// Pointwise linear combination `alpha*self + beta*other` on a shared layout.
    pub fn combine(&self, alpha: f64, other: &PriceGrid, beta: f64) -> Result<PriceGrid> {
        if self.len() != other.len()
            || self.log_lo() != other.log_lo()
            || self.log_spacing() != other.log_spacing()
            || self.strike != other.strike
        {
            return Err(Error::Domain("grids do not share a layout".into()));
        }
        let mix = |p: &[f64], q: &[f64]| -> Vec<f64> {
            p.iter().zip(q).map(|(a, b)| alpha * a + beta * b).collect()
        };
        let curve = UniformHermite::with_one_sided_slopes(
            self.log_lo(),
            self.log_spacing(),
            mix(self.values(), other.values()),
            mix(self.curve.left_slopes(), other.curve.left_slopes()),
            mix(self.curve.right_slopes(), other.curve.right_slopes()),
        );
        let lin = |p: Affine, q: Affine| Affine {
            a: alpha * p.a + beta * q.a,
            b: alpha * p.b + beta * q.b,
        };
        Ok(Self::from_parts(
            self.strike,
            curve,
            AffineTails {
                lower: lin(self.tails.lower, other.tails.lower),
                upper: lin(self.tails.upper, other.tails.upper),
            },
            self.step_index,
        ))
    }
}

/// Per-cell-offset quadrature weights for one kernel at one panel density.
///
/// For a node `i` and a cell offset `o`, the Simpson points
/// `x = (o + j/q) h` land in grid cell `i + o` at local coordinate `j/q`, so
/// the Hermite basis values (and kernel values) do not depend on `i`.
struct CellWeights {
    offset_lo: i64,
    /// `[V_c, h m_c, V_{c+1}, h m_{c+1}]` coefficients per offset.
    hermite: Vec<[f64; 4]>,
    /// The same coefficients for the `y`-derivative of the interpolant.
    slope: Vec<[f64; 4]>,
    /// `∫ f` and `∫ e^x f` per offset, for points that fall off the grid.
    mass: Vec<[f64; 2]>,
}

impl CellWeights {
    fn build(kern: &PricingKernel, h: f64, offset_lo: i64, cells: usize, q: usize) -> Self {
        let w = simpson_weights(q, h / q as f64);
        let basis: Vec<[f64; 4]> = (0..=q)
            .map(|j| hermite_basis(j as f64 / q as f64))
            .collect();
        let dbasis: Vec<[f64; 4]> = (0..=q)
            .map(|j| hermite_basis_derivative(j as f64 / q as f64).map(|b| b / h))
            .collect();
        let mut hermite = Vec::with_capacity(cells);
        let mut slope = Vec::with_capacity(cells);
        let mut mass = Vec::with_capacity(cells);
        for c in 0..cells {
            let o = offset_lo + c as i64;
            let mut hw = [0.0; 4];
            let mut dw = [0.0; 4];
            let mut mw = [0.0; 2];
            for j in 0..=q {
                let x = (o as f64 + j as f64 / q as f64) * h;
                let wf = w[j] * kern.eval(x);
                for k in 0..4 {
                    hw[k] += wf * basis[j][k];
                    dw[k] += wf * dbasis[j][k];
                }
                mw[0] += wf;
                mw[1] += wf * x.exp();
            }
            hermite.push(hw);
            slope.push(dw);
            mass.push(mw);
        }
        Self {
            offset_lo,
            hermite,
            slope,
            mass,
        }
    }

    /// Values and `y`-derivatives of the next grid at every node.
    fn apply(&self, v: &PriceGrid) -> (Vec<f64>, Vec<f64>) {
        let n = v.len() as i64;
        let h = v.log_spacing();
        let values = v.values();
        let left = v.curve.left_slopes();
        let right = v.curve.right_slopes();
        let tails = v.tails;
        let pairs = par::map_range(v.len(), |i| {
            let s = v.s(i);
            let mut acc = 0.0;
            let mut dacc = 0.0;
            for (c, ((hw, dw), mw)) in self
                .hermite
                .iter()
                .zip(&self.slope)
                .zip(&self.mass)
                .enumerate()
            {
                let cell = i as i64 + self.offset_lo + c as i64;
                if cell < 0 || cell > n - 2 {
                    let t = if cell < 0 { tails.lower } else { tails.upper };
                    acc += t.a * mw[0] + t.b * s * mw[1];
                    dacc += t.b * s * mw[1];
                } else {
                    let c0 = cell as usize;
                    let coef = [values[c0], h * right[c0], values[c0 + 1], h * left[c0 + 1]];
                    for k in 0..4 {
                        acc += hw[k] * coef[k];
                        dacc += dw[k] * coef[k];
                    }
                }
            }
            (acc, dacc)
        });
        pairs.into_iter().unzip()
    }
}

/// One step of the recursion: grid `k` to grid `k + 1`.
///
/// Composite Simpson over the kernel's truncation range, snapped outward to
/// whole grid cells, starting from at least [`MIN_PANELS`] panels and doubling
/// until the sup-norm change is below [`STEP_REL_TOL`] of the sup-norm value.
pub fn backward_step(v: &PriceGrid, kern: &PricingKernel) -> Result<PriceGrid> {
    let h = v.log_spacing();
    let (xa, xb) = kern.step().dist.truncation_range();
    let offset_lo = (xa / h).floor() as i64;
    let offset_hi = (xb / h).ceil() as i64 - 1;
    let cells = (offset_hi - offset_lo + 1).max(1) as usize;
    let mut q = MIN_PANELS.div_ceil(cells).max(2);
    q += q % 2;

    let (mut prev, _) = CellWeights::build(kern, h, offset_lo, cells, q).apply(v);
    loop {
        if 2 * q * cells > MAX_PANELS {
            let scale = sup(&prev);
            return Err(Error::Quadrature {
                context: format!(
                    "backward step {} -> {} ({} cells, scale {scale:e})",
                    v.step_index(),
                    v.step_index() + 1,
                    cells
                ),
                panels: q * cells,
                change: f64::NAN,
            });
        }
        q *= 2;
        let (next, slopes) = CellWeights::build(kern, h, offset_lo, cells, q).apply(v);
        let change = next
            .iter()
            .zip(&prev)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let scale = sup(&next);
        if change <= STEP_REL_TOL * scale || scale == 0.0 {
            let curve =
                UniformHermite::with_one_sided_slopes(v.log_lo(), h, next, slopes.clone(), slopes);
            return Ok(PriceGrid::from_parts(
                v.strike,
                curve,
                v.tails.discounted(kern.discount()),
                v.step_index + 1,
            ));
        }
        prev = next;
    }
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// `[V_0, V_1, ..., V_n]` for the whole path.
pub fn price_recursive(
    path: &MarketPath,
    payoff: &dyn Payoff,
    spec: &GridSpec,
) -> Result<Vec<PriceGrid>> {
    let kernels = path
        .steps()
        .iter()
        .map(PricingKernel::new)
        .collect::<Result<Vec<_>>>()?;
    let mut grids = Vec::with_capacity(path.len() + 1);
    grids.push(PriceGrid::payoff(path, payoff, spec)?);
    for kern in &kernels {
        let next = backward_step(grids.last().expect("non-empty"), kern)?;
        grids.push(next);
    }
    Ok(grids)
}

/// Hedge ratio minimising the one-step variance of `V_k(s e^xi) - Δ s e^xi`:
/// `Δ = cov[V_k(s e^xi), e^xi] / (s D[e^xi])`.
pub fn min_variance_delta(v: &PriceGrid, s: f64, kern: &PricingKernel) -> Result<f64> {
    if !(s > 0.0) || !v.contains(s) {
        return Err(Error::Domain(format!(
            "spot {s} outside the grid range [{}, {}]",
            v.s_min(),
            v.s_max()
        )));
    }
    let dist = &kern.step().dist;
    let (xa, xb) = dist.truncation_range();
    let m = kern.m();
    let scale = (v.value_at(s).abs() + s) * kern.d();
    let cov = simpson_refined(
        |x| v.value_at(s * x.exp()) * (x.exp() - m) * dist.density(x),
        xa,
        xb,
        MIN_PANELS,
        1e-10,
        1e-12 * scale,
        MAX_PANELS,
    )?;
    Ok(cov / (s * kern.d()))
}

/// Hedged portfolio `Π = V - Δ s`.
pub fn portfolio_value(v_at_s: f64, delta: f64, s: f64) -> f64 {
    v_at_s - delta * s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market_model::ReturnDistribution;
    use crate::numeric::quad::simpson_refined;

    fn step(r: f64) -> MarketStep {
        MarketStep::new(
            r,
            0.01,
            ReturnDistribution::lognormal(0.05, 0.2, 0.01).unwrap(),
        )
        .unwrap()
    }

    fn small_grid(path: &MarketPath, payoff: &dyn Payoff) -> PriceGrid {
        PriceGrid::payoff(path, payoff, &GridSpec::default()).unwrap()
    }

    #[test]
    fn kernel_value_at_mean_return() {
        let k = PricingKernel::new(&step(0.09)).unwrap();
        let x = k.m().ln();
        // (e^x - m) vanishes, leaving e^{-r tau} u(x)
        let expected = (-0.0009f64).exp() * k.step().dist.density(x);
        assert!((k.eval(x) - expected).abs() < 1e-12);
        assert!((k.eval(x) - 19.928).abs() < 2e-3);
    }

    #[test]
    fn kernel_identities_by_quadrature() {
        for &r in &[0.05, 0.07, 0.09, 0.11, 0.2] {
            let k = PricingKernel::new(&step(r)).unwrap();
            let (a, b) = k.step().dist.truncation_range();
            let mass = simpson_refined(|x| k.eval(x), a, b, 4096, 1e-13, 0.0, 1 << 22).unwrap();
            let mom =
                simpson_refined(|x| x.exp() * k.eval(x), a, b, 4096, 1e-13, 0.0, 1 << 22).unwrap();
            assert!((mass - k.discount()).abs() < 1e-8, "r={r}");
            assert!((mom - 1.0).abs() < 1e-8, "r={r}");
        }
    }

    #[test]
    fn kernel_goes_negative_only_when_infeasible() {
        let feasible = PricingKernel::new(&step(0.09)).unwrap();
        let infeasible = PricingKernel::new(&step(0.05)).unwrap();
        let xs: Vec<f64> = (-400..=400).map(|i| i as f64 * 0.005).collect();
        assert!(xs.iter().all(|&x| feasible.eval(x) >= 0.0));
        assert!(infeasible.covariance_weight() < 0.0);
        // f < 0 where e^x - m > e^{-r tau} / |slope|
        let x_neg = (infeasible.m() + infeasible.discount() / -infeasible.covariance_weight()).ln();
        assert!(x_neg > 1.0);
    }

    #[test]
    fn constant_and_linear_claims() {
        let path = MarketPath::uniform(step(0.09), 1, 100.0).unwrap();
        let k = PricingKernel::new(&path.steps()[0]).unwrap();
        let bond = backward_step(&small_grid(&path, &AffinePayoff::bond(3.0)), &k).unwrap();
        for (_, v) in bond.nodes() {
            assert!((v - 3.0 * k.discount()).abs() < 1e-9);
        }
        let fwd = backward_step(&small_grid(&path, &AffinePayoff::linear(1.0)), &k).unwrap();
        for (s, v) in fwd.nodes() {
            assert!((v / s - 1.0).abs() < 1e-8, "s={s} v={v}");
        }
        assert_eq!(fwd.step_index(), 1);
    }

    #[test]
    fn one_step_call_matches_direct_quadrature() {
        let path = MarketPath::uniform(step(0.09), 1, 100.0).unwrap();
        let k = PricingKernel::new(&path.steps()[0]).unwrap();
        let v1 = backward_step(&small_grid(&path, &CallPayoff { strike: 100.0 }), &k).unwrap();
        for &s in &[90.0f64, 99.0, 100.0, 101.3, 115.0] {
            let (a, b) = k.step().dist.truncation_range();
            let kink = (100.0 / s).ln();
            let f = |x: f64| (s * x.exp() - 100.0).max(0.0) * k.eval(x);
            let direct = if kink > a && kink < b {
                simpson_refined(f, kink, b, 4096, 1e-13, 0.0, 1 << 22).unwrap()
            } else {
                simpson_refined(f, a, b, 4096, 1e-13, 0.0, 1 << 22).unwrap()
            };
            assert!(
                (v1.value_at(s) - direct).abs() < 2e-6,
                "s={s} grid={} direct={direct}",
                v1.value_at(s)
            );
        }
    }

    #[test]
    fn discount_accumulates_over_steps() {
        let path = MarketPath::uniform(step(0.09), 10, 100.0).unwrap();
        let grids = price_recursive(&path, &AffinePayoff::bond(1.0), &GridSpec::default()).unwrap();
        assert_eq!(grids.len(), 11);
        let target = (-0.09f64 * 0.1).exp();
        assert!(grids[10].values().iter().all(|v| (v - target).abs() < 1e-7));
        assert!((grids[10].tails().upper.a - target).abs() < 1e-15);
    }

    #[test]
    fn zero_steps_returns_payoff() {
        let path = MarketPath::new(vec![], 100.0).unwrap();
        let spec = GridSpec {
            half_width: Some(4.0),
            nodes: Some(65),
        };
        let grids = price_recursive(&path, &CallPayoff { strike: 100.0 }, &spec).unwrap();
        assert_eq!(grids.len(), 1);
        for (s, v) in grids[0].nodes() {
            assert_eq!(v, (s - 100.0).max(0.0));
        }
    }

    #[test]
    fn delta_trivial_claims() {
        let path = MarketPath::uniform(step(0.09), 1, 100.0).unwrap();
        let k = PricingKernel::new(&path.steps()[0]).unwrap();
        let lin = small_grid(&path, &AffinePayoff::linear(1.0));
        let bond = small_grid(&path, &AffinePayoff::bond(7.0));
        for &s in &[50.0, 100.0, 180.0] {
            assert!((min_variance_delta(&lin, s, &k).unwrap() - 1.0).abs() < 1e-8);
            assert!(min_variance_delta(&bond, s, &k).unwrap().abs() < 1e-9);
        }
        assert!(matches!(
            min_variance_delta(&lin, 1e6, &k),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn call_delta_in_unit_interval() {
        let path = MarketPath::uniform(step(0.09), 1, 100.0).unwrap();
        let k = PricingKernel::new(&path.steps()[0]).unwrap();
        let v1 = backward_step(&small_grid(&path, &CallPayoff { strike: 100.0 }), &k).unwrap();
        let d = min_variance_delta(&v1, 100.0, &k).unwrap();
        assert!(d > 0.0 && d < 1.0, "delta = {d}");
    }

    #[test]
    fn portfolio_arithmetic() {
        assert_eq!(portfolio_value(5.0, 0.5, 100.0), -45.0);
        assert_eq!(portfolio_value(123.0, 1.0, 123.0), 0.0);
        assert_eq!(portfolio_value(0.0, 0.0, 77.0), 0.0);
    }
}
