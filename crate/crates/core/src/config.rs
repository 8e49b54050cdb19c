//! TOML run configuration.
//!
//! ```toml
//! method = "recursive"          # recursive | mellin | green | closed
//!
//! [model]
//! distribution = "lognormal"    # or "mixture" with `components`
//! mu = 0.05
//! sigma = 0.2
//! r = 0.09
//! tau = 0.01
//! n = 100
//! strike = 100.0
//! spot_grid = { lo = 60.0, hi = 160.0, count = 101 }
//!
//! [contour]
//! a = 4.0
//!
//! [mc]
//! paths = 1000000
//! seed = 42
//! ```

use std::path::Path;
use std::str::FromStr;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::kernel::GridSpec;
use crate::lognormal::LognormalParams;
use crate::market_model::{
    MarketPath, MarketStep, ReturnDistribution, DEFAULT_LOGNORMAL_MOMENT_BOUND,
};
use crate::mellin::{MellinLine, DEFAULT_TAIL_TOL};

pub const DEFAULT_CROSSCHECK_TOLERANCE: f64 = 1e-3;
pub const DEFAULT_MC_PATHS: usize = 100_000;
pub const DEFAULT_MC_SEED: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Recursive,
    Mellin,
    Green,
    Closed,
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "recursive" => Ok(Method::Recursive),
            "mellin" => Ok(Method::Mellin),
            "green" => Ok(Method::Green),
            "closed" => Ok(Method::Closed),
            other => Err(Error::Config(format!(
                "unknown method `{other}` (expected recursive, mellin, green or closed)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistributionName {
    Lognormal,
    Mixture,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpotGrid {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    #[serde(default = "lognormal_name")]
    pub distribution: DistributionName,
    pub mu: Option<f64>,
    pub sigma: Option<f64>,
    /// Mixture components `[weight, mean, sd]` of the one-period log return.
    pub components: Option<Vec<[f64; 3]>>,
    pub r: f64,
    pub tau: f64,
    pub n: usize,
    pub strike: f64,
    pub spot: Option<f64>,
    pub spots: Option<Vec<f64>>,
    pub spot_grid: Option<SpotGrid>,
}

fn lognormal_name() -> DistributionName {
    DistributionName::Lognormal
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContourSection {
    pub a: Option<f64>,
    pub a0: Option<f64>,
    pub p_max: Option<f64>,
    pub nodes: Option<usize>,
    pub tail_tol: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub half_width: Option<f64>,
    pub nodes: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSection {
    pub paths: Option<usize>,
    pub seed: Option<u64>,
    /// Explicit candidate deltas; default is a grid around the analytic one.
    pub deltas: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrosscheckSection {
    pub tolerance: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NegativitySection {
    pub eps: Option<f64>,
}

/// Shared by `bs-converge` and `asymptote`.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimitSection {
    /// Time to maturity; defaults to `n * tau`.
    pub t: Option<f64>,
    pub steps: Option<Vec<usize>>,
    /// Expansion degree for `asymptote`.
    pub order: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub method: Option<String>,
    pub out: Option<String>,
    pub model: ModelSection,
    #[serde(default)]
    pub contour: ContourSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub mc: McSection,
    #[serde(default)]
    pub crosscheck: CrosscheckSection,
    #[serde(default)]
    pub negativity: NegativitySection,
    #[serde(default)]
    pub limit: LimitSection,
}

impl FromStr for RunConfig {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        text.parse()
    }

    fn validate(&self) -> Result<()> {
        let a = self.moment_bound();
        if !(a.is_finite() && a > 2.0) {
            return Err(Error::invalid(
                "a",
                a,
                "moment bound must satisfy a > 2 (exponential moments on (-a, a))",
            ));
        }
        let m = &self.model;
        let spot_forms = [m.spot.is_some(), m.spots.is_some(), m.spot_grid.is_some()];
        if spot_forms.iter().filter(|&&x| x).count() > 1 {
            return Err(Error::Config(
                "give at most one of model.spot, model.spots, model.spot_grid".into(),
            ));
        }
        if let Some(g) = m.spot_grid {
            if !(g.lo > 0.0 && g.hi >= g.lo && g.count >= 1) {
                return Err(Error::Config(format!(
                    "spot_grid needs 0 < lo <= hi and count >= 1, got {g:?}"
                )));
            }
        }
        if let Some(method) = &self.method {
            method.parse::<Method>()?;
        }
        self.path()?;
        Ok(())
    }

    pub fn moment_bound(&self) -> f64 {
        self.contour.a.unwrap_or(DEFAULT_LOGNORMAL_MOMENT_BOUND)
    }

    pub fn method(&self) -> Result<Method> {
        self.method.as_deref().unwrap_or("recursive").parse()
    }

    pub fn distribution(&self) -> Result<ReturnDistribution> {
        let m = &self.model;
        let dist = match m.distribution {
            DistributionName::Lognormal => {
                let (mu, sigma) = m.mu.zip(m.sigma).ok_or_else(|| {
                    Error::Config("lognormal model needs model.mu and model.sigma".into())
                })?;
                ReturnDistribution::lognormal(mu, sigma, m.tau)?
            }
            DistributionName::Mixture => {
                let comps = m
                    .components
                    .as_ref()
                    .ok_or_else(|| Error::Config("mixture model needs model.components".into()))?;
                let comps: Vec<(f64, f64, f64)> =
                    comps.iter().map(|c| (c[0], c[1], c[2])).collect();
                ReturnDistribution::normal_mixture(&comps, self.moment_bound())?
            }
        };
        dist.with_moment_bound(self.moment_bound())
    }

    pub fn path(&self) -> Result<MarketPath> {
        self.path_with_steps(self.model.tau, self.model.n)
    }

    /// Same market re-cut into `n` periods of length `tau`.
    pub fn path_with_steps(&self, tau: f64, n: usize) -> Result<MarketPath> {
        let mut cfg = self.clone();
        cfg.model.tau = tau;
        let step = MarketStep::new(self.model.r, tau, cfg.distribution()?)?;
        MarketPath::uniform(step, n, self.model.strike)
    }

    /// Closed-form parameters, when the model is lognormal.
    pub fn lognormal(&self) -> Result<LognormalParams> {
        let m = &self.model;
        match (m.distribution, m.mu, m.sigma) {
            (DistributionName::Lognormal, Some(mu), Some(sigma)) => {
                LognormalParams::new(mu, sigma, m.tau, m.r, m.strike, m.n)
            }
            _ => Err(Error::Unsupported(
                "closed forms need a lognormal model".into(),
            )),
        }
    }

    pub fn spots(&self) -> Vec<f64> {
        let m = &self.model;
        if let Some(s) = m.spot {
            vec![s]
        } else if let Some(v) = &m.spots {
            v.clone()
        } else if let Some(g) = m.spot_grid {
            if g.count == 1 {
                vec![g.lo]
            } else {
                let h = (g.hi - g.lo) / (g.count - 1) as f64;
                (0..g.count).map(|i| g.lo + i as f64 * h).collect()
            }
        } else {
            vec![m.strike]
        }
    }

    pub fn grid_spec(&self) -> GridSpec {
        GridSpec {
            half_width: self.grid.half_width,
            nodes: self.grid.nodes,
        }
    }

    pub fn mellin_line(&self) -> Result<MellinLine> {
        let c = &self.contour;
        let mut line = MellinLine::for_moment_bound(self.moment_bound())?
            .with_tail_tol(c.tail_tol.unwrap_or(DEFAULT_TAIL_TOL));
        if let Some(a0) = c.a0 {
            line = line.with_a0(a0);
        }
        if let Some(p) = c.p_max {
            line = line.with_p_max(p);
        }
        if let Some(n) = c.nodes {
            line = line.with_nodes(n);
        }
        Ok(line)
    }

    pub fn horizon(&self) -> f64 {
        self.limit.t.unwrap_or(self.model.n as f64 * self.model.tau)
    }
}
