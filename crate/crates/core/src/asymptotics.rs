//! Small-period behaviour: polynomial expansion of the price in the hedging
//! period `tau` and convergence to the continuously hedged (Black–Scholes)
//! price as `tau -> 0`.

use crate::error::{ensure_positive, Error, Result};
use crate::lognormal::{black_scholes, price_closed, LognormalParams};
use crate::market_model::feasibility_interval;
use crate::numeric::fit::polyfit;
use crate::par;
use crate::report::{format_number, CsvTable};

/// Step counts whose periods `t/n` form the default `tau` grid.
pub const DEFAULT_STEP_COUNTS: [usize; 5] = [16, 32, 64, 128, 256];

/// `V(t, s; tau) ≈ B_0 + B_1 tau + ... + B_l tau^l` fitted over `tau_grid`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionEstimate {
    pub t: f64,
    pub s: f64,
    /// `B_0..B_l`.
    pub coefficients: Vec<f64>,
    pub tau_grid: Vec<f64>,
    /// Price at each `tau`.
    pub values: Vec<f64>,
    /// Price minus fitted polynomial at each `tau`.
    pub residuals: Vec<f64>,
}

impl ExpansionEstimate {
    pub fn residual_norm(&self) -> f64 {
        self.residuals.iter().map(|r| r * r).sum::<f64>().sqrt()
    }

    /// `tau,V,residual` per sample, then `B_l` rows as `l,B`.
    pub fn to_csv(&self) -> CsvTable {
        let mut t = CsvTable::new(["order", "B", "tau", "V", "residual"]);
        let rows = self.coefficients.len().max(self.tau_grid.len());
        for i in 0..rows {
            let mut row = Vec::with_capacity(5);
            match self.coefficients.get(i) {
                Some(b) => {
                    row.push(i.to_string());
                    row.push(format_number(*b));
                }
                None => row.extend([String::new(), String::new()]),
            }
            match self.tau_grid.get(i) {
                Some(tau) => {
                    row.push(format_number(*tau));
                    row.push(format_number(self.values[i]));
                    row.push(format_number(self.residuals[i]));
                }
                None => row.extend([String::new(), String::new(), String::new()]),
            }
            t.push_row(row);
        }
        t
    }
}

/// `t/n` for each `n` in [`DEFAULT_STEP_COUNTS`].
pub fn default_tau_grid(t: f64) -> Vec<f64> {
    DEFAULT_STEP_COUNTS.iter().map(|&n| t / n as f64).collect()
}

/// Number of whole periods of length `tau` in `t`, if there is one.
fn periods(t: f64, tau: f64) -> Option<usize> {
    let k = (t / tau).round();
    (k >= 1.0 && (k * tau - t).abs() <= 1e-9 * t).then_some(k as usize)
}

/// Least-squares fit of `price_at_tau` by a degree-`order` polynomial in `tau`.
pub fn estimate_expansion(
    price_at_tau: impl Fn(f64) -> Result<f64> + Sync + Send,
    t: f64,
    s: f64,
    order: usize,
    tau_grid: &[f64],
) -> Result<ExpansionEstimate> {
    ensure_positive("t", t)?;
    ensure_positive("spot", s)?;
    let mut distinct = tau_grid.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < order + 2 {
        return Err(Error::invalid(
            "tau grid",
            distinct.len() as f64,
            format!(
                "order {order} needs at least {} distinct periods",
                order + 2
            ),
        ));
    }
    for &tau in tau_grid {
        ensure_positive("tau", tau)?;
        if periods(t, tau).is_none() {
            return Err(Error::invalid(
                "tau",
                tau,
                format!("must divide t = {t} into a whole number of periods"),
            ));
        }
    }
    let values = par::map_slice(tau_grid, |&tau| price_at_tau(tau))
        .into_iter()
        .collect::<Result<Vec<f64>>>()?;
    // fit in tau / tau_max to keep the design matrix well scaled
    let scale = distinct[distinct.len() - 1];
    let xs: Vec<f64> = tau_grid.iter().map(|tau| tau / scale).collect();
    let fit = polyfit(&xs, &values, order)?;
    let coefficients = fit
        .coefficients
        .iter()
        .enumerate()
        .map(|(j, c)| c / scale.powi(j as i32))
        .collect();
    Ok(ExpansionEstimate {
        t,
        s,
        coefficients,
        tau_grid: tau_grid.to_vec(),
        values,
        residuals: fit.residuals,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub tau: f64,
    pub value: f64,
    pub error: f64,
}

/// Distance to the continuously hedged price along a sequence of step counts.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub s: f64,
    pub reference: f64,
    /// Sorted by increasing `n`.
    pub rows: Vec<ConvergenceRow>,
    /// Slope of `ln error` against `ln tau`; `None` when every error is at
    /// round-off level.
    pub order: Option<f64>,
}

impl ConvergenceReport {
    /// Observed order between consecutive rows.
    pub fn local_orders(&self) -> Vec<Option<f64>> {
        std::iter::once(None)
            .chain(self.rows.windows(2).map(|w| {
                let r = (w[0].error / w[1].error).ln() / (w[0].tau / w[1].tau).ln();
                r.is_finite().then_some(r)
            }))
            .collect()
    }

    /// `n,tau,V,error,order` with the local order (blank on the first row).
    pub fn to_csv(&self) -> CsvTable {
        let mut t = CsvTable::new(["n", "tau", "V", "error", "order"]);
        for (row, order) in self.rows.iter().zip(self.local_orders()) {
            t.push_row(vec![
                row.n.to_string(),
                format_number(row.tau),
                format_number(row.value),
                format_number(row.error),
                order.map(format_number).unwrap_or_default(),
            ]);
        }
        t
    }
}

/// [`bs_limit_check_with`] using the closed-form discrete price.
pub fn bs_limit_check(
    base: &LognormalParams,
    t: f64,
    step_counts: &[usize],
    s: f64,
) -> Result<ConvergenceReport> {
    bs_limit_check_with(base, t, step_counts, s, |p| price_closed(p, s))
}

/// Errors `|V(t, s; t/n) - C_BS(s, t)|` for each `n` and their fitted order.
///
/// Fails with a convergence error when the errors do not decrease with `n`,
/// unless all of them are at round-off level.
pub fn bs_limit_check_with(
    base: &LognormalParams,
    t: f64,
    step_counts: &[usize],
    s: f64,
    price: impl Fn(&LognormalParams) -> Result<f64> + Sync + Send,
) -> Result<ConvergenceReport> {
    ensure_positive("t", t)?;
    ensure_positive("spot", s)?;
    if step_counts.len() < 2 || step_counts.contains(&0) {
        return Err(Error::invalid(
            "step counts",
            step_counts.len() as f64,
            "need at least two positive step counts",
        ));
    }
    let mut ns = step_counts.to_vec();
    ns.sort_unstable();
    ns.dedup();
    let family = ns
        .iter()
        .map(|&n| base.with_steps(t, n))
        .collect::<Result<Vec<_>>>()?;
    for p in &family {
        let fi = feasibility_interval(&p.step()?)?;
        if !fi.contains(p.r) {
            return Err(Error::invalid(
                "r",
                p.r,
                format!(
                    "outside the feasibility interval [{}, {}] at tau = {}",
                    fi.r_lo, fi.r_hi, p.tau
                ),
            ));
        }
    }
    let reference = black_scholes(s, t, base.strike, base.r, base.sigma);
    let values = par::map_slice(&family, &price)
        .into_iter()
        .collect::<Result<Vec<f64>>>()?;
    let rows: Vec<ConvergenceRow> = family
        .iter()
        .zip(&values)
        .map(|(p, &v)| ConvergenceRow {
            n: p.n,
            tau: p.tau,
            value: v,
            error: (v - reference).abs(),
        })
        .collect();

    let negligible = 1e-10 * s;
    if rows.iter().all(|r| r.error <= negligible) {
        return Ok(ConvergenceReport {
            s,
            reference,
            rows,
            order: None,
        });
    }
    if let Some(w) = rows.windows(2).find(|w| !(w[1].error < w[0].error)) {
        let seq: Vec<String> = rows
            .iter()
            .map(|r| format!("n={}: {:e}", r.n, r.error))
            .collect();
        return Err(Error::Convergence(format!(
            "error does not decrease from n = {} to n = {} ({})",
            w[0].n,
            w[1].n,
            seq.join(", ")
        )));
    }
    let lx: Vec<f64> = rows.iter().map(|r| r.tau.ln()).collect();
    let ly: Vec<f64> = rows.iter().map(|r| r.error.ln()).collect();
    let fit = polyfit(&lx, &ly, 1)?;
    Ok(ConvergenceReport {
        s,
        reference,
        rows,
        order: Some(fit.coefficients[1]),
    })
}
