//! Closed forms for normally distributed log returns.
//!
//! With `xi ~ N(mu tau, sigma^2 tau)` the kernel transform factorises as
//! `U(p) = e^{mu tau p + sigma^2 tau p^2 / 2} (M1 + M2 e^{p sigma^2 tau})`,
//! so `U(-p)^n` expands binomially and the `n`-step Green function is a
//! signed mixture of `n + 1` Gaussians in `ln x`. Each mixture component
//! convolves with the call payoff to a Black–Scholes-like term.

use num_complex::Complex64;

use crate::error::{ensure_finite, ensure_positive, Error, Result};
use crate::market_model::{MarketPath, MarketStep, ReturnDistribution, StepMoments};
use crate::numeric::quad::simpson_refined;
use crate::numeric::{norm_cdf, norm_pdf};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LognormalParams {
    pub mu: f64,
    pub sigma: f64,
    pub tau: f64,
    pub r: f64,
    pub strike: f64,
    pub n: usize,
}

impl LognormalParams {
    pub fn new(mu: f64, sigma: f64, tau: f64, r: f64, strike: f64, n: usize) -> Result<Self> {
        ensure_finite("mu", mu)?;
        ensure_finite("r", r)?;
        ensure_positive("tau", tau)?;
        ensure_positive("strike", strike)?;
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(Error::invalid("sigma", sigma, "must be finite and >= 0"));
        }
        Ok(Self {
            mu,
            sigma,
            tau,
            r,
            strike,
            n,
        })
    }

    /// Same market with maturity `t` split into `n` periods.
    pub fn with_steps(&self, t: f64, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("n", 0.0, "need at least one step"));
        }
        Self::new(self.mu, self.sigma, t / n as f64, self.r, self.strike, n)
    }

    /// `E[xi] = mu tau`.
    pub fn drift(&self) -> f64 {
        self.mu * self.tau
    }

    /// `D[xi] = sigma^2 tau`.
    pub fn variance(&self) -> f64 {
        self.sigma * self.sigma * self.tau
    }

    pub fn maturity(&self) -> f64 {
        self.n as f64 * self.tau
    }

    pub fn distribution(&self) -> Result<ReturnDistribution> {
        ReturnDistribution::lognormal(self.mu, self.sigma, self.tau)
    }

    pub fn step(&self) -> Result<MarketStep> {
        MarketStep::new(self.r, self.tau, self.distribution()?)
    }

    pub fn path(&self) -> Result<MarketPath> {
        MarketPath::uniform(self.step()?, self.n, self.strike)
    }
}

/// `m = e^{mu tau + sigma^2 tau / 2}`, `d = e^{2 mu tau + sigma^2 tau}(e^{sigma^2 tau} - 1)`.
pub fn closed_moments(p: &LognormalParams) -> StepMoments {
    let m = (p.drift() + 0.5 * p.variance()).exp();
    let d = (2.0 * p.drift() + p.variance()).exp() * p.variance().exp_m1();
    StepMoments { m, d }
}

/// Mixing coefficients of the kernel transform. `M1 + M2 = e^{-r tau}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinomialCoefficients {
    pub m1: f64,
    pub m2: f64,
}

pub fn coefficients(p: &LognormalParams) -> Result<BinomialCoefficients> {
    let v = p.variance();
    if !(v > 0.0) {
        return Err(Error::Degenerate(
            "sigma = 0 makes the M1/M2 denominator vanish".into(),
        ));
    }
    // e^{mu tau + 3/2 sigma^2 tau} - e^{mu tau + sigma^2 tau / 2}
    let den = (p.drift() + 0.5 * v).exp() * v.exp_m1();
    let num = ((p.mu - p.r) * p.tau + 0.5 * v).exp_m1();
    let m2 = -num / den;
    let m1 = (-p.r * p.tau).exp() - m2;
    Ok(BinomialCoefficients { m1, m2 })
}

/// `U(p) = e^{mu tau p + sigma^2 tau p^2 / 2} (M1 + M2 e^{p sigma^2 tau})`.
pub fn u_closed(params: &LognormalParams, p: Complex64) -> Result<Complex64> {
    let c = coefficients(params)?;
    let v = params.variance();
    let gauss = (p * params.drift() + p * p * (0.5 * v)).exp();
    Ok(gauss * ((p * v).exp() * c.m2 + c.m1))
}

/// Signed binomial weights `C(n,k) M1^{n-k} M2^k`, evaluated in log space.
pub fn mixture_weights(n: usize, c: BinomialCoefficients) -> Vec<f64> {
    let (l1, l2) = (c.m1.abs().ln(), c.m2.abs().ln());
    let (s1, s2) = (c.m1.signum(), c.m2.signum());
    let mut log_binom = 0.0;
    (0..=n)
        .map(|k| {
            if k > 0 {
                log_binom += ((n - k + 1) as f64).ln() - (k as f64).ln();
            }
            let zero1 = c.m1 == 0.0 && k < n;
            let zero2 = c.m2 == 0.0 && k > 0;
            if zero1 || zero2 {
                return 0.0;
            }
            let mut lw = log_binom;
            if k < n {
                lw += (n - k) as f64 * l1;
            }
            if k > 0 {
                lw += k as f64 * l2;
            }
            let sign = if (n - k) % 2 == 1 && s1 < 0.0 {
                -1.0
            } else {
                1.0
            } * if k % 2 == 1 && s2 < 0.0 { -1.0 } else { 1.0 };
            sign * lw.exp()
        })
        .collect()
}

/// Shift `c_k = n mu tau + k sigma^2 tau` of the `k`-th mixture component
/// (component `k` is centred at `ln x = -c_k`).
fn component_shift(p: &LognormalParams, k: usize) -> f64 {
    p.n as f64 * p.drift() + k as f64 * p.variance()
}

/// Gaussian-mixture Green function `G_n(x)`.
pub fn green_closed(p: &LognormalParams, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!(
            "green function needs x > 0, got {x}"
        )));
    }
    let c = coefficients(p)?;
    let sd = (p.n as f64 * p.variance()).sqrt();
    if p.n == 0 {
        return Err(Error::Domain("G_0 is a point mass at x = 1".into()));
    }
    let lx = x.ln();
    Ok(mixture_weights(p.n, c)
        .iter()
        .enumerate()
        .map(|(k, w)| w * norm_pdf((lx + component_shift(p, k)) / sd) / sd)
        .sum())
}

/// `n`-step call price from the Gaussian-mixture Green function.
///
/// Each component contributes
/// `s e^{c_k + v/2} N(z_k + sqrt v) - E N(z_k)`, `z_k = (ln(s/E) + c_k)/sqrt v`,
/// `v = n sigma^2 tau`. With `M2 < 0` and large `n` the weights alternate
/// and grow, and the sum cancels catastrophically; use the recursive or
/// contour routes there.
pub fn price_closed(p: &LognormalParams, s: f64) -> Result<f64> {
    ensure_positive("s", s)?;
    if p.n == 0 {
        return Ok((s - p.strike).max(0.0));
    }
    let c = coefficients(p)?;
    let v = p.n as f64 * p.variance();
    let sv = v.sqrt();
    let ls = (s / p.strike).ln();
    Ok(mixture_weights(p.n, c)
        .iter()
        .enumerate()
        .filter(|(_, w)| **w != 0.0)
        .map(|(k, w)| {
            let ck = component_shift(p, k);
            let z = (ls + ck) / sv;
            w * (s * (ck + 0.5 * v).exp() * norm_cdf(z + sv) - p.strike * norm_cdf(z))
        })
        .sum())
}

/// The binomial-sum price with the substitution
/// `y = 1/x` but without its Jacobian: `Σ w_k (2π n σ²τ)^{-1/2} ∫_0^{s/E} e^{-(ln y + c_k)²/(2nσ²τ)} (s/y - E) dy`.
///
/// The substitution actually produces an extra `1/y` in the integrand; see
/// [`price_substituted`]. This version is kept to quantify the difference.
pub fn price_without_jacobian(p: &LognormalParams, s: f64) -> Result<f64> {
    substituted_integral(p, s, false)
}

/// `Σ w_k ∫_0^{s/E} g_k(y) (s/y - E) / y dy`, which is what the change of
/// variables really yields and equals [`price_closed`].
pub fn price_substituted(p: &LognormalParams, s: f64) -> Result<f64> {
    substituted_integral(p, s, true)
}

fn substituted_integral(p: &LognormalParams, s: f64, with_jacobian: bool) -> Result<f64> {
    ensure_positive("s", s)?;
    if p.n == 0 {
        return Err(Error::Domain("the binomial sum needs n >= 1".into()));
    }
    let c = coefficients(p)?;
    let v = p.n as f64 * p.variance();
    let sv = v.sqrt();
    let upper = (s / p.strike).ln();
    let weights = mixture_weights(p.n, c);
    let mut total = 0.0;
    for (k, w) in weights.iter().enumerate() {
        if *w == 0.0 {
            continue;
        }
        let ck = component_shift(p, k);
        let lower = -ck - 14.0 * sv;
        if upper <= lower {
            continue;
        }
        // y = e^t, dy = e^t dt
        let integrand = |t: f64| {
            let g =
                (-(t + ck).powi(2) / (2.0 * v)).exp() / (sv * (2.0 * std::f64::consts::PI).sqrt());
            let y = t.exp();
            let payoff = s / y - p.strike;
            if with_jacobian {
                g * payoff
            } else {
                g * payoff * y
            }
        };
        let hi = upper.min(-ck + 14.0 * sv);
        total += w * simpson_refined(integrand, lower, hi, 1024, 1e-12, 1e-18 * s, 1 << 22)?;
    }
    Ok(total)
}

/// Black–Scholes call value with time `t` to expiry.
pub fn black_scholes(s: f64, t: f64, strike: f64, r: f64, sigma: f64) -> f64 {
    if t <= 0.0 {
        return (s - strike).max(0.0);
    }
    let vol = sigma * t.sqrt();
    let df = (-r * t).exp();
    if vol <= 0.0 {
        return (s - strike * df).max(0.0);
    }
    let d1 = ((s / strike).ln() + (r + 0.5 * sigma * sigma) * t) / vol;
    let d2 = d1 - vol;
    s * norm_cdf(d1) - strike * df * norm_cdf(d2)
}
