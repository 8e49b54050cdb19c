//! Least-squares polynomial fits.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Largest accepted ratio of extreme singular values of the design matrix.
pub const MAX_CONDITION: f64 = 1e10;

#[derive(Debug, Clone, PartialEq)]
pub struct PolyFit {
    /// `c_0 + c_1 x + ... + c_d x^d`.
    pub coefficients: Vec<f64>,
    /// `y_i - p(x_i)` per sample.
    pub residuals: Vec<f64>,
    pub condition: f64,
}

impl PolyFit {
    pub fn eval(&self, x: f64) -> f64 {
        self.coefficients
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * x + c)
    }

    pub fn residual_norm(&self) -> f64 {
        self.residuals.iter().map(|r| r * r).sum::<f64>().sqrt()
    }
}

/// Degree-`degree` least-squares fit through SVD.
pub fn polyfit(xs: &[f64], ys: &[f64], degree: usize) -> Result<PolyFit> {
    assert_eq!(xs.len(), ys.len());
    let cols = degree + 1;
    if xs.len() < cols {
        return Err(Error::Fit(format!(
            "{} samples cannot determine {cols} coefficients",
            xs.len()
        )));
    }
    let a = DMatrix::from_fn(xs.len(), cols, |i, j| xs[i].powi(j as i32));
    let b = DVector::from_column_slice(ys);
    let svd = a.clone().svd(true, true);
    let (smax, smin) = svd
        .singular_values
        .iter()
        .fold((0.0f64, f64::INFINITY), |(hi, lo), &s| {
            (hi.max(s), lo.min(s))
        });
    let condition = smax / smin;
    if !(condition <= MAX_CONDITION) {
        return Err(Error::Fit(format!(
            "condition number {condition:e} exceeds {MAX_CONDITION:e}; fit fewer orders"
        )));
    }
    let c = svd.solve(&b, 0.0).map_err(|e| Error::Fit(e.to_string()))?;
    let residuals = (&b - &a * &c).iter().copied().collect();
    Ok(PolyFit {
        coefficients: c.iter().copied().collect(),
        residuals,
        condition,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_quadratic() {
        let xs = [-1.0, -0.5, 0.0, 0.5, 1.0, 2.0];
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 - 2.0 * x + 0.5 * x * x).collect();
        let f = polyfit(&xs, &ys, 2).unwrap();
        for (c, e) in f.coefficients.iter().zip([3.0, -2.0, 0.5]) {
            assert!((c - e).abs() < 1e-13);
        }
        assert!(f.residual_norm() < 1e-13);
        assert!((f.eval(1.5) - (3.0 - 3.0 + 1.125)).abs() < 1e-13);
    }

    #[test]
    fn rejects_ill_conditioned_design() {
        let xs = [1e-6, 2e-6, 3e-6, 4e-6];
        let ys = [1.0, 2.0, 3.0, 4.0];
        assert!(matches!(polyfit(&xs, &ys, 3), Err(Error::Fit(_))));
        assert!(matches!(polyfit(&xs[..2], &ys[..2], 2), Err(Error::Fit(_))));
    }
}
