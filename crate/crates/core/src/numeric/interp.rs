//! Cubic Hermite interpolation on uniform grids.

/// Hermite basis at local coordinate `t` in [0, 1]:
/// `(h00, h10, h01, h11)` multiplying `(y0, h*m0, y1, h*m1)`.
#[inline]
pub fn hermite_basis(t: f64) -> [f64; 4] {
    let t2 = t * t;
    let t3 = t2 * t;
    [
        2.0 * t3 - 3.0 * t2 + 1.0,
        t3 - 2.0 * t2 + t,
        -2.0 * t3 + 3.0 * t2,
        t3 - t2,
    ]
}

/// `t`-derivatives of [`hermite_basis`].
#[inline]
pub fn hermite_basis_derivative(t: f64) -> [f64; 4] {
    let t2 = t * t;
    [
        6.0 * t2 - 6.0 * t,
        3.0 * t2 - 4.0 * t + 1.0,
        -6.0 * t2 + 6.0 * t,
        3.0 * t2 - 2.0 * t,
    ]
}

/// Piecewise cubic Hermite interpolant on `x0 + i*h`, `i = 0..len`.
///
/// Each node carries a left and a right derivative; cell `i` uses the right
/// derivative at node `i` and the left derivative at node `i + 1`, so a kink
/// placed on a node is represented exactly.
#[derive(Debug, Clone)]
pub struct UniformHermite {
    x0: f64,
    h: f64,
    values: Vec<f64>,
    left: Vec<f64>,
    right: Vec<f64>,
}

impl UniformHermite {
    /// Monotonicity-preserving slopes (Fritsch–Carlson).
    ///
    /// Slopes start from high-order finite differences; they are zeroed at
    /// local extrema or when they disagree in sign with the neighbouring
    /// secants, and rescaled onto the monotone region where
    /// `alpha^2 + beta^2 > 9`.
    pub fn monotone(x0: f64, h: f64, values: Vec<f64>) -> Self {
        let slopes = fritsch_carlson_slopes(&values, h);
        Self::with_slopes(x0, h, values, slopes)
    }

    /// Hermite interpolant with caller-supplied derivatives.
    pub fn with_slopes(x0: f64, h: f64, values: Vec<f64>, slopes: Vec<f64>) -> Self {
        Self::with_one_sided_slopes(x0, h, values, slopes.clone(), slopes)
    }

    /// Hermite interpolant with separate left and right derivatives per node.
    pub fn with_one_sided_slopes(
        x0: f64,
        h: f64,
        values: Vec<f64>,
        left: Vec<f64>,
        right: Vec<f64>,
    ) -> Self {
        assert!(values.len() >= 2);
        assert_eq!(values.len(), left.len());
        assert_eq!(values.len(), right.len());
        Self {
            x0,
            h,
            values,
            left,
            right,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn x_max(&self) -> f64 {
        self.x0 + (self.values.len() - 1) as f64 * self.h
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Derivatives approached from below each node.
    pub fn left_slopes(&self) -> &[f64] {
        &self.left
    }

    /// Derivatives approached from above each node.
    pub fn right_slopes(&self) -> &[f64] {
        &self.right
    }

    /// Interpolated value, or `None` outside `[x0, x_max]`.
    pub fn eval(&self, x: f64) -> Option<f64> {
        let n = self.values.len();
        let u = (x - self.x0) / self.h;
        if !(u >= 0.0) || u > (n - 1) as f64 {
            return None;
        }
        let i = (u.floor() as usize).min(n - 2);
        Some(self.eval_cell(i, u - i as f64))
    }

    /// Value inside cell `i` (between nodes `i` and `i+1`) at local `t`.
    #[inline]
    pub fn eval_cell(&self, i: usize, t: f64) -> f64 {
        let [a, b, c, d] = hermite_basis(t);
        a * self.values[i]
            + b * self.h * self.right[i]
            + c * self.values[i + 1]
            + d * self.h * self.left[i + 1]
    }
}

fn fritsch_carlson_slopes(y: &[f64], h: f64) -> Vec<f64> {
    let n = y.len();
    assert!(n >= 2, "need at least two nodes");
    let secant: Vec<f64> = y.windows(2).map(|w| (w[1] - w[0]) / h).collect();
    if n == 2 {
        return vec![secant[0]; 2];
    }
    // fourth-order centred differences where possible, second-order near ends
    let mut m: Vec<f64> = (0..n)
        .map(|i| {
            if i >= 2 && i + 2 < n {
                (y[i - 2] - 8.0 * y[i - 1] + 8.0 * y[i + 1] - y[i + 2]) / (12.0 * h)
            } else if i == 0 {
                (-3.0 * y[0] + 4.0 * y[1] - y[2]) / (2.0 * h)
            } else if i == n - 1 {
                (3.0 * y[n - 1] - 4.0 * y[n - 2] + y[n - 3]) / (2.0 * h)
            } else {
                0.5 * (secant[i - 1] + secant[i])
            }
        })
        .collect();
    // slopes must share the sign of the adjacent secants
    for i in 0..n {
        let left = if i > 0 { Some(secant[i - 1]) } else { None };
        let right = if i + 1 < n { Some(secant[i]) } else { None };
        let ok = match (left, right) {
            (Some(l), Some(r)) => l * r > 0.0 && m[i] * l > 0.0,
            (Some(d), None) | (None, Some(d)) => m[i] * d > 0.0,
            (None, None) => false,
        };
        if !ok {
            m[i] = 0.0;
        }
    }
    for i in 0..n - 1 {
        let d = secant[i];
        if d == 0.0 {
            m[i] = 0.0;
            m[i + 1] = 0.0;
            continue;
        }
        let alpha = m[i] / d;
        let beta = m[i + 1] / d;
        let r2 = alpha * alpha + beta * beta;
        if r2 > 9.0 {
            let tau = 3.0 / r2.sqrt();
            m[i] = tau * alpha * d;
            m[i + 1] = tau * beta * d;
        }
    }
    m
}
