//! Simpson-rule quadrature over real and complex integrands.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Values a quadrature rule can accumulate.
pub trait Integrand:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
    fn zero() -> Self;
    fn magnitude(self) -> f64;
}

impl Integrand for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl Integrand for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

/// Composite Simpson rule with `panels` (rounded up to even) sub-intervals.
pub fn simpson<T: Integrand>(f: impl Fn(f64) -> T, a: f64, b: f64, panels: usize) -> T {
    let n = (panels.max(2) + 1) & !1;
    let h = (b - a) / n as f64;
    let mut odd = T::zero();
    let mut even = T::zero();
    for i in 1..n {
        let v = f(a + i as f64 * h);
        if i % 2 == 1 {
            odd = odd + v;
        } else {
            even = even + v;
        }
    }
    (f(a) + f(b) + odd * 4.0 + even * 2.0) * (h / 3.0)
}

/// Composite Simpson that doubles its panel count until two successive
/// estimates differ by at most `max(rel_tol * |I|, abs_tol)`.
///
/// Function values are reused across doublings: each refinement only
/// evaluates the new midpoints.
pub fn simpson_refined<T: Integrand>(
    f: impl Fn(f64) -> T,
    a: f64,
    b: f64,
    start_panels: usize,
    rel_tol: f64,
    abs_tol: f64,
    max_panels: usize,
) -> Result<T> {
    let mut n = (start_panels.max(2) + 1) & !1;
    let mut h = (b - a) / n as f64;
    let ends = f(a) + f(b);
    let mut even = T::zero();
    let mut odd = T::zero();
    for i in 1..n {
        let v = f(a + i as f64 * h);
        if i % 2 == 1 {
            odd = odd + v;
        } else {
            even = even + v;
        }
    }
    let mut estimate = (ends + odd * 4.0 + even * 2.0) * (h / 3.0);
    loop {
        if n * 2 > max_panels {
            return Err(Error::Quadrature {
                context: "composite Simpson refinement".into(),
                panels: n,
                change: f64::NAN,
            });
        }
        // old odd and even nodes all become even nodes of the refined rule
        even = even + odd;
        n *= 2;
        h *= 0.5;
        let mut new_odd = T::zero();
        for i in (1..n).step_by(2) {
            new_odd = new_odd + f(a + i as f64 * h);
        }
        odd = new_odd;
        let refined = (ends + odd * 4.0 + even * 2.0) * (h / 3.0);
        let change = (refined - estimate).magnitude();
        let bound = (rel_tol * refined.magnitude()).max(abs_tol);
        estimate = refined;
        if change <= bound {
            return Ok(estimate);
        }
        if n * 2 > max_panels {
            return Err(Error::Quadrature {
                context: "composite Simpson refinement".into(),
                panels: n,
                change,
            });
        }
    }
}

/// Recursive adaptive Simpson with Richardson correction.
///
/// Handles isolated kinks (payoff strikes, density cusps) that slow the
/// composite rule down. Sub-intervals narrower than `1e-12` of `b - a` are
/// accepted as they are, which resolves jump discontinuities to that width.
pub fn adaptive_simpson<T: Integrand>(
    f: &impl Fn(f64) -> T,
    a: f64,
    b: f64,
    abs_tol: f64,
    max_depth: u32,
) -> Result<T> {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson_panel(a, b, fa, fm, fb);
    let mut failed = false;
    let min_width = 1e-12 * (b - a).abs();
    let v = adaptive_step(
        f,
        (a, b),
        (fa, fm, fb),
        whole,
        abs_tol,
        min_width,
        max_depth,
        &mut failed,
    );
    if failed {
        Err(Error::Quadrature {
            context: format!("adaptive Simpson on [{a}, {b}]"),
            panels: 1 << max_depth.min(30),
            change: abs_tol,
        })
    } else {
        Ok(v)
    }
}

fn simpson_panel<T: Integrand>(a: f64, b: f64, fa: T, fm: T, fb: T) -> T {
    (fa + fm * 4.0 + fb) * ((b - a) / 6.0)
}

#[allow(clippy::too_many_arguments)]
fn adaptive_step<T: Integrand>(
    f: &impl Fn(f64) -> T,
    (a, b): (f64, f64),
    (fa, fm, fb): (T, T, T),
    whole: T,
    tol: f64,
    min_width: f64,
    depth: u32,
    failed: &mut bool,
) -> T {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson_panel(a, m, fa, flm, fm);
    let right = simpson_panel(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if delta.magnitude() <= 15.0 * tol || (b - a).abs() <= min_width {
        return left + right + delta * (1.0 / 15.0);
    }
    if depth == 0 {
        *failed = true;
        return left + right + delta * (1.0 / 15.0);
    }
    let half = 0.5 * tol;
    adaptive_step(
        f,
        (a, m),
        (fa, flm, fm),
        left,
        half,
        min_width,
        depth - 1,
        failed,
    ) + adaptive_step(
        f,
        (m, b),
        (fm, frm, fb),
        right,
        half,
        min_width,
        depth - 1,
        failed,
    )
}

/// Simpson weights for `n` (even) panels of width `h`: `h/3 * [1,4,2,...,4,1]`.
pub fn simpson_weights(n: usize, h: f64) -> Vec<f64> {
    debug_assert!(n.is_multiple_of(2) && n >= 2);
    (0..=n)
        .map(|j| {
            let c = if j == 0 || j == n {
                1.0
            } else if j % 2 == 1 {
                4.0
            } else {
                2.0
            };
            c * h / 3.0
        })
        .collect()
}
