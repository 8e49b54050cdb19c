//! Regions where computed option values turn negative.
//!
//! Outside the feasibility interval the pricing kernel is signed strongly
//! enough for `V_k` to dip below zero; on those asset-price sets no hedging
//! policy realises the price.

use crate::error::{ensure_positive, Error, Result};
use crate::kernel::{price_recursive, CallPayoff, GridSpec, PriceGrid};
use crate::market_model::MarketPath;
use crate::par;
use crate::report::{format_number, CsvTable};

/// Bisection steps used to place each interval endpoint on the interpolant.
pub const ENDPOINT_BISECTIONS: usize = 40;

/// Negative set of one grid: maximal runs of nodes with `V < -eps`.
#[derive(Debug, Clone, PartialEq)]
pub struct NegativityReport {
    pub k: usize,
    /// Disjoint, sorted `(s_lo, s_hi)` pairs.
    pub intervals: Vec<(f64, f64)>,
    /// Smallest node value, negative or not.
    pub min_value: f64,
    pub min_location: f64,
}

impl NegativityReport {
    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Total length of the negative set in `ln s`.
    pub fn log_measure(&self) -> f64 {
        self.intervals.iter().map(|(a, b)| (b / a).ln()).sum()
    }
}

pub fn scan_negative_set(v: &PriceGrid, eps: f64) -> NegativityReport {
    let values = v.values();
    let (imin, &min_value) = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("grids are never empty");
    let below = |i: usize| values[i] < -eps;
    let mut intervals = Vec::new();
    let mut i = 0;
    while i < values.len() {
        if !below(i) {
            i += 1;
            continue;
        }
        let start = i;
        while i + 1 < values.len() && below(i + 1) {
            i += 1;
        }
        let s_lo = if start == 0 {
            v.s(0)
        } else {
            crossing(v, v.s(start - 1), v.s(start), eps)
        };
        let s_hi = if i + 1 == values.len() {
            v.s(i)
        } else {
            crossing(v, v.s(i + 1), v.s(i), eps)
        };
        intervals.push((s_lo, s_hi));
        i += 1;
    }
    NegativityReport {
        k: v.step_index(),
        intervals,
        min_value,
        min_location: v.s(imin),
    }
}

/// Point between `outside` (`V >= -eps`) and `inside` (`V < -eps`) where the
/// interpolant crosses `-eps`, bisected in `ln s`.
fn crossing(v: &PriceGrid, outside: f64, inside: f64, eps: f64) -> f64 {
    let (mut a, mut b) = (outside.ln(), inside.ln());
    for _ in 0..ENDPOINT_BISECTIONS {
        let m = 0.5 * (a + b);
        if v.value_at(m.exp()) < -eps {
            b = m;
        } else {
            a = m;
        }
    }
    (0.5 * (a + b)).exp()
}

pub fn scan_all(grids: &[PriceGrid], eps: f64) -> Vec<NegativityReport> {
    par::map_slice(grids, |g| scan_negative_set(g, eps))
}

/// `k,s_lo,s_hi,min_value`; a step with an empty negative set gets one row
/// with blank interval fields.
pub fn reports_to_csv(reports: &[NegativityReport]) -> CsvTable {
    let mut t = CsvTable::new(["k", "s_lo", "s_hi", "min_value"]);
    for r in reports {
        let k = r.k.to_string();
        if r.intervals.is_empty() {
            t.push_row(vec![
                k.clone(),
                String::new(),
                String::new(),
                format_number(r.min_value),
            ]);
        }
        for &(lo, hi) in &r.intervals {
            t.push_row(vec![
                k.clone(),
                format_number(lo),
                format_number(hi),
                format_number(r.min_value),
            ]);
        }
    }
    t
}

/// Negative-set size at a fixed time for one hedging period.
#[derive(Debug, Clone, PartialEq)]
pub struct ShrinkagePoint {
    pub tau: f64,
    pub k: usize,
    pub log_measure: f64,
    pub report: NegativityReport,
}

/// Measure of the negative set at time-to-maturity `t` for each `tau`.
///
/// `family(tau)` builds the path for hedging period `tau`; `t` must be a whole
/// number of periods for every `tau`.
pub fn shrinkage_profile(
    family: impl Fn(f64) -> Result<MarketPath> + Sync,
    taus: &[f64],
    t: f64,
    spec: &GridSpec,
    eps: f64,
) -> Result<Vec<ShrinkagePoint>> {
    ensure_positive("t", t)?;
    let points = par::map_slice(taus, |&tau| -> Result<ShrinkagePoint> {
        ensure_positive("tau", tau)?;
        let k = (t / tau).round() as usize;
        if k == 0 || ((k as f64) * tau - t).abs() > 1e-9 * t {
            return Err(Error::invalid(
                "tau",
                tau,
                format!("must divide t = {t} into a whole number of periods"),
            ));
        }
        let path = family(tau)?;
        if path.len() < k {
            return Err(Error::Domain(format!(
                "path for tau = {tau} has {} steps, {k} needed",
                path.len()
            )));
        }
        let truncated = MarketPath::new(path.steps()[..k].to_vec(), path.strike())?;
        let grids = price_recursive(
            &truncated,
            &CallPayoff {
                strike: path.strike(),
            },
            spec,
        )?;
        let report = scan_negative_set(&grids[k], eps);
        Ok(ShrinkagePoint {
            tau,
            k,
            log_measure: report.log_measure(),
            report,
        })
    });
    points.into_iter().collect()
}
