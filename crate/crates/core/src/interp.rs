//! Piecewise cubic Hermite interpolation on the uniform grid `j / J`.
//!
//! Node slopes come from fourth-order finite differences. In monotone mode
//! they are then clipped to `[0, 3 min(secant_left, secant_right)]`
//! (Hyman's filter), which keeps every cubic piece non-decreasing while
//! leaving smooth strictly increasing data untouched.

use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Shape {
    /// Data is non-decreasing and the interpolant must be too.
    Monotone,
    /// No shape constraint.
    Free,
}

#[derive(Clone, Debug)]
pub(crate) struct UniformHermite<'a, T> {
    values: &'a [T],
    slopes: Vec<T>,
    h: T,
    intervals: usize,
}

impl<'a, T: Real> UniformHermite<'a, T> {
    /// `values` are samples at `j / (len - 1)`; at least five points.
    pub(crate) fn new(values: &'a [T], shape: Shape) -> Self {
        let n = values.len();
        assert!(n >= 5, "need at least 5 grid points");
        let intervals = n - 1;
        let h = T::from_count(intervals).recip();
        let mut slopes = fourth_order_slopes(values, h);
        if shape == Shape::Monotone {
            let secant = |i: usize| (values[i + 1] - values[i]) / h;
            let three = T::lit(3.0);
            for (k, d) in slopes.iter_mut().enumerate() {
                let bound = match k {
                    0 => secant(0),
                    k if k == intervals => secant(intervals - 1),
                    k => secant(k - 1).min(secant(k)),
                };
                *d = d.max(T::zero()).min(three * bound);
            }
        }
        Self {
            values,
            slopes,
            h,
            intervals,
        }
    }

    /// Evaluates at `x`, clamped to `[0, 1]`.
    #[inline]
    pub(crate) fn eval(&self, x: T) -> T {
        let x = x.max(T::zero()).min(T::one());
        let u = x * T::from_count(self.intervals);
        let i = u.floor().to_usize().unwrap_or(0).min(self.intervals - 1);
        let t = u - T::from_count(i);

        let t2 = t * t;
        let t3 = t2 * t;
        let two = T::lit(2.0);
        let three = T::lit(3.0);
        let h00 = two * t3 - three * t2 + T::one();
        let h10 = t3 - two * t2 + t;
        let h01 = three * t2 - two * t3;
        let h11 = t3 - t2;
        self.values[i] * h00
            + self.h * self.slopes[i] * h10
            + self.values[i + 1] * h01
            + self.h * self.slopes[i + 1] * h11
    }

    /// Upper bound on `|p'|` over `[0, 1]`. In monotone mode every piece
    /// has derivative at most three times its secant.
    pub(crate) fn lipschitz_bound(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.intervals {
            let secant = ((self.values[i + 1] - self.values[i]) / self.h).abs();
            let d = self.slopes[i].abs().max(self.slopes[i + 1].abs());
            worst = worst.max(T::lit(3.0) * secant).max(d);
        }
        worst
    }
}

fn fourth_order_slopes<T: Real>(f: &[T], h: T) -> Vec<T> {
    let n = f.len();
    let last = n - 1;
    let c = |v: f64| T::lit(v);
    let denom = c(12.0) * h;
    let mut d = vec![T::zero(); n];
    d[0] = (c(-25.0) * f[0] + c(48.0) * f[1] - c(36.0) * f[2] + c(16.0) * f[3] - c(3.0) * f[4]) / denom;
    d[1] = (c(-3.0) * f[0] - c(10.0) * f[1] + c(18.0) * f[2] - c(6.0) * f[3] + f[4]) / denom;
    for k in 2..last - 1 {
        d[k] = (f[k - 2] - c(8.0) * f[k - 1] + c(8.0) * f[k + 1] - f[k + 2]) / denom;
    }
    d[last - 1] = (c(3.0) * f[last] + c(10.0) * f[last - 1] - c(18.0) * f[last - 2] + c(6.0) * f[last - 3]
        - f[last - 4])
        / denom;
    d[last] = (c(25.0) * f[last] - c(48.0) * f[last - 1] + c(36.0) * f[last - 2] - c(16.0) * f[last - 3]
        + c(3.0) * f[last - 4])
        / denom;
    d
}

/// Slopes of the interpolant at the nodes; exposed for density conversion.
pub(crate) fn node_slopes<T: Real>(values: &[T], shape: Shape) -> Vec<T> {
    UniformHermite::new(values, shape).slopes
}
