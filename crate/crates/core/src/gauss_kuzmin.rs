//! Gauss-Kuzmin iteration on gridded distribution functions and densities.
//!
//! A distribution function `F_n(x) = mu(tau_m^n < x)` evolves by
//!
//! ```text
//! F_{n+1}(x) = sum_{i >= 0} [ F_n(alpha^i) - F_n(alpha^i / (1 + (m-1)x)) ]
//! ```
//!
//! and the weighted density `f_n(x) = (1 + (m-1)x)(m + (m-1)x) F_n'(x)` by
//!
//! ```text
//! f_{n+1}(x) = sum_{i >= 0} P_i((m-1)x) f_n(alpha^i / (1 + (m-1)x)).
//! ```
//!
//! Both are evaluated on the uniform grid `j / J`; off-grid values come from
//! the cubic Hermite interpolant of [`crate::interp`]. Each grid point sums
//! its series in increasing `i`, so parallel evaluation is bit-identical to
//! sequential evaluation.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::interp::{node_slopes, Shape, UniformHermite};
use crate::measure::{cdf_unchecked, MeasureParams};
use crate::scalar::Real;

/// Default number of grid points, `2^12 + 1`.
pub const DEFAULT_GRID_POINTS: usize = 4097;

/// Errors below this level are at the interpolation noise floor and no
/// longer produce ratio diagnostics.
pub const RATIO_FLOOR: f64 = 1e-11;

/// Allowed deviation of `F(0)` from 0 and `F(1)` from 1 (raised to
/// `1000 eps` for types coarser than `f64`).
pub const ENDPOINT_TOL: f64 = 1e-6;

const MIN_POINTS: usize = 5;

fn ratio_floor<T: Real>() -> T {
    T::lit(RATIO_FLOOR).max(T::lit(1e3) * T::epsilon())
}

fn endpoint_tol<T: Real>() -> T {
    T::lit(ENDPOINT_TOL).max(T::lit(1e3) * T::epsilon())
}

fn monotone_slack<T: Real>() -> T {
    T::lit(16.0) * T::epsilon()
}

fn uniform_grid<T: Real>(points: usize) -> Result<Vec<T>> {
    if points < MIN_POINTS {
        return Err(Error::InvalidGrid(format!(
            "need at least {MIN_POINTS} points, got {points}"
        )));
    }
    let intervals = T::from_count(points - 1);
    Ok((0..points).map(|j| T::from_count(j) / intervals).collect())
}

/// Distribution function sampled on the uniform grid `x_j = j / (points - 1)`.
///
/// Values are non-decreasing with `F(0) = 0` and `F(1) = 1`, up to
/// [`ENDPOINT_TOL`] at the ends and a few ulps between neighbours.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction<T> {
    grid: Vec<T>,
    values: Vec<T>,
}

impl<T: Real> GridFunction<T> {
    /// Wraps samples taken on the uniform grid with `values.len()` points.
    pub fn new(values: Vec<T>) -> Result<Self> {
        let grid = uniform_grid(values.len())?;
        let f = Self { grid, values };
        f.validate()?;
        Ok(f)
    }

    pub fn from_fn(points: usize, f: impl Fn(T) -> T) -> Result<Self> {
        let grid = uniform_grid(points)?;
        let values = grid.iter().map(|&x| f(x)).collect();
        let out = Self { grid, values };
        out.validate()?;
        Ok(out)
    }

    /// `F_0(x) = x`, the distribution of a uniformly drawn start point.
    pub fn lebesgue(points: usize) -> Result<Self> {
        Self::from_fn(points, |x| x)
    }

    /// The limit distribution `G` sampled on the grid.
    pub fn limit(points: usize, mp: &MeasureParams<T>) -> Result<Self> {
        Self::from_fn(points, |x| cdf_unchecked(x, mp))
    }

    fn validate(&self) -> Result<()> {
        if let Some(j) = self.values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid(format!("non-finite value at index {j}")));
        }
        let end_tol = endpoint_tol::<T>();
        let first = self.values[0];
        let last = *self.values.last().expect("non-empty");
        if first.abs() > end_tol || (last - T::one()).abs() > end_tol {
            return Err(Error::InvalidGrid(format!(
                "distribution function must run from 0 to 1, got F(0) = {first}, F(1) = {last}"
            )));
        }
        let slack = monotone_slack::<T>();
        if let Some(index) = self.values.windows(2).position(|w| w[1] < w[0] - slack) {
            return Err(Error::NonMonotone { index });
        }
        Ok(())
    }

    pub fn grid(&self) -> &[T] {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn points(&self) -> usize {
        self.values.len()
    }

    /// Grid spacing `h = 1 / (points - 1)`.
    pub fn spacing(&self) -> T {
        T::from_count(self.points() - 1).recip()
    }

    /// Monotone cubic interpolation of the samples at any `x` in `[0, 1]`.
    pub fn eval(&self, x: T) -> T {
        UniformHermite::new(&self.values, Shape::Monotone).eval(x)
    }

    /// Resamples onto a uniform grid with `points` points.
    pub fn resample(&self, points: usize) -> Result<Self> {
        let it = UniformHermite::new(&self.values, Shape::Monotone);
        Self::from_fn(points, |x| it.eval(x))
    }
}

/// Weighted density `f(x) = (1 + (m-1)x)(m + (m-1)x) F'(x)` on the uniform
/// grid.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityGrid<T> {
    grid: Vec<T>,
    values: Vec<T>,
}

impl<T: Real> DensityGrid<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        let grid = uniform_grid(values.len())?;
        if let Some(j) = values.iter().position(|v| !v.is_finite() || *v < T::zero()) {
            return Err(Error::InvalidGrid(format!(
                "density must be finite and non-negative, index {j} holds {}",
                values[j]
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(points: usize, f: impl Fn(T) -> T) -> Result<Self> {
        let grid = uniform_grid::<T>(points)?;
        Self::new(grid.iter().map(|&x| f(x)).collect())
    }

    pub fn constant(points: usize, c: T) -> Result<Self> {
        Self::from_fn(points, |_| c)
    }

    /// Weighted density of the Lebesgue start `F_0(x) = x`.
    pub fn lebesgue(points: usize, mp: &MeasureParams<T>) -> Result<Self> {
        Self::from_fn(points, |x| weight(x, mp))
    }

    /// Converts a distribution function through its interpolant slopes.
    pub fn from_distribution(f: &GridFunction<T>, mp: &MeasureParams<T>) -> Self {
        let slopes = node_slopes(f.values(), Shape::Monotone);
        let values = f
            .grid()
            .iter()
            .zip(slopes)
            .map(|(&x, d)| weight(x, mp) * d.max(T::zero()))
            .collect();
        Self {
            grid: f.grid.clone(),
            values,
        }
    }

    pub fn grid(&self) -> &[T] {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn points(&self) -> usize {
        self.values.len()
    }
}

/// `(1 + (m-1)x)(m + (m-1)x)`.
#[inline]
fn weight<T: Real>(x: T, mp: &MeasureParams<T>) -> T {
    let m = mp.params().m_real::<T>();
    let t = (m - T::one()) * x;
    (T::one() + t) * (m + t)
}

fn check_tol<T: Real>(tol: T) -> Result<()> {
    if !(tol > T::zero()) {
        return Err(Error::InvalidTolerance(tol.to_string()));
    }
    Ok(())
}

/// Smallest `n` with `scale * alpha^n < tol`.
fn terms_needed<T: Real>(scale: T, alpha: T, tol: T) -> usize {
    let mut n = 0usize;
    let mut env = scale;
    while env >= tol && env > T::zero() {
        env = env * alpha;
        n += 1;
    }
    n
}

/// One Gauss-Kuzmin step `F_n -> F_{n+1}`.
///
/// The series stops once the remaining tail, bounded by
/// `L alpha^I (m-1)/m / (1 - alpha)` with `L` the interpolant's Lipschitz
/// constant, is below `tol`.
pub fn apply_gk<T: Real>(f: &GridFunction<T>, mp: &MeasureParams<T>, tol: T) -> Result<GridFunction<T>> {
    check_tol(tol)?;
    let interp = UniformHermite::new(f.values(), Shape::Monotone);
    let m = mp.params().m_real::<T>();
    let mm1 = m - T::one();
    let alpha = mp.alpha();

    let lipschitz = interp.lipschitz_bound();
    let envelope = lipschitz * (mm1 / m) / (T::one() - alpha);
    let terms = terms_needed(envelope, alpha, tol);

    let powers: Vec<T> = (0..terms).map(|i| alpha.powi(i as i32)).collect();
    let anchors: Vec<T> = powers.iter().map(|&a| interp.eval(a)).collect();

    let values: Vec<T> = f
        .grid()
        .par_iter()
        .map(|&x| {
            let shrink = (T::one() + mm1 * x).recip();
            powers
                .iter()
                .zip(&anchors)
                .fold(T::zero(), |acc, (&a, &fa)| acc + (fa - interp.eval(a * shrink)))
        })
        .collect();

    let out = GridFunction {
        grid: f.grid.clone(),
        values,
    };
    out.validate()?;
    Ok(out)
}

/// Transfer coefficient
/// `P_i(t) = (m-1) alpha^(i+1) (t+1)(t+m) / ((t + (m-1)alpha^i + 1)(t + (m-1)alpha^(i+1) + 1))`.
///
/// Callers pass `t = (m-1)x`.
pub fn pf_coefficient<T: Real>(i: u32, t: T, mp: &MeasureParams<T>) -> T {
    let m = mp.params().m_real::<T>();
    let mm1 = m - T::one();
    let a_i = mp.alpha().powi(i as i32);
    let a_next = a_i * mp.alpha();
    mm1 * a_next * (t + T::one()) * (t + m) / ((t + mm1 * a_i + T::one()) * (t + mm1 * a_next + T::one()))
}

/// One step of the density transfer `f_n -> f_{n+1}`.
///
/// Uses `P_i(t) <= (m-1) alpha^i`, so the tail after `I` terms is below
/// `sup|f| m alpha^I`.
pub fn density_transfer<T: Real>(f: &DensityGrid<T>, mp: &MeasureParams<T>, tol: T) -> Result<DensityGrid<T>> {
    check_tol(tol)?;
    let interp = UniformHermite::new(f.values(), Shape::Free);
    let m = mp.params().m_real::<T>();
    let mm1 = m - T::one();
    let alpha = mp.alpha();

    let sup = f.values().iter().fold(T::zero(), |acc, v| acc.max(v.abs()));
    let bound = sup + interp.lipschitz_bound() / T::from_count(f.points() - 1);
    let terms = terms_needed(bound * m, alpha, tol);

    let powers: Vec<T> = (0..terms).map(|i| alpha.powi(i as i32)).collect();
    let values: Vec<T> = f
        .grid()
        .par_iter()
        .map(|&x| {
            let t = mm1 * x;
            let shrink = (T::one() + t).recip();
            let s = powers.iter().enumerate().fold(T::zero(), |acc, (i, &a)| {
                acc + pf_coefficient(i as u32, t, mp) * interp.eval(a * shrink)
            });
            // cubic undershoot next to zeros of f
            s.max(T::zero())
        })
        .collect();

    DensityGrid::new(values)
}

/// Estimate of `max |f'|` over the grid by second-order differences.
pub fn derivative_max<T: Real>(f: &DensityGrid<T>) -> T {
    let v = f.values();
    let n = v.len();
    let inv_2h = T::from_count(n - 1) / T::lit(2.0);
    let three = T::lit(3.0);
    let four = T::lit(4.0);
    let left = (-three * v[0] + four * v[1] - v[2]) * inv_2h;
    let right = (three * v[n - 1] - four * v[n - 2] + v[n - 3]) * inv_2h;
    v.windows(3)
        .map(|w| ((w[2] - w[0]) * inv_2h).abs())
        .fold(left.abs().max(right.abs()), T::max)
}

/// `max_j |F(x_j) - G(x_j)|`.
pub fn sup_error<T: Real>(f: &GridFunction<T>, mp: &MeasureParams<T>) -> T {
    f.grid()
        .iter()
        .zip(f.values())
        .map(|(&x, &v)| (v - cdf_unchecked(x, mp)).abs())
        .fold(T::zero(), T::max)
}

/// Diagnostics for one iterate `F_n`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IterationReport<T> {
    pub n: usize,
    /// `e_n = max_j |F_n(x_j) - G(x_j)|`.
    pub sup_error: T,
    /// `e_n / e_{n-1}`; absent at `n = 0` and once either error is at the
    /// noise floor.
    pub ratio: Option<T>,
    /// Estimate of `max |f_n'|` for the weighted density of `F_n`.
    pub deriv_max: T,
}

fn report<T: Real>(n: usize, f: &GridFunction<T>, mp: &MeasureParams<T>, prev: Option<T>) -> IterationReport<T> {
    let e = sup_error(f, mp);
    let floor = ratio_floor::<T>();
    let ratio = prev.filter(|&p| p >= floor && e >= floor).map(|p| e / p);
    IterationReport {
        n,
        sup_error: e,
        ratio,
        deriv_max: derivative_max(&DensityGrid::from_distribution(f, mp)),
    }
}

/// Runs `steps` Gauss-Kuzmin steps from `f0`; returns the `steps + 1`
/// reports for `n = 0..=steps` and the last iterate.
pub fn iterate_with_last<T: Real>(
    f0: &GridFunction<T>,
    mp: &MeasureParams<T>,
    steps: usize,
    tol: T,
) -> Result<(Vec<IterationReport<T>>, GridFunction<T>)> {
    check_tol(tol)?;
    if steps == 0 {
        return Err(Error::Degenerate("steps must be positive".into()));
    }
    let mut reports = Vec::with_capacity(steps + 1);
    reports.push(report(0, f0, mp, None));
    let mut current = f0.clone();
    for n in 1..=steps {
        current = apply_gk(&current, mp, tol)?;
        let prev = reports.last().map(|r: &IterationReport<T>| r.sup_error);
        reports.push(report(n, &current, mp, prev));
    }
    Ok((reports, current))
}

/// Runs `steps` Gauss-Kuzmin steps and reports `e_n` for `n = 0..=steps`.
pub fn iterate<T: Real>(
    f0: &GridFunction<T>,
    mp: &MeasureParams<T>,
    steps: usize,
    tol: T,
) -> Result<Vec<IterationReport<T>>> {
    iterate_with_last(f0, mp, steps, tol).map(|(r, _)| r)
}

/// Least-squares geometric rate fitted to the trailing errors.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateFit<T> {
    /// `exp(slope)` of `log e_n` against `n`; NaN when fewer than two
    /// points are usable.
    pub rate: T,
    /// Number of reports that entered the fit.
    pub points: usize,
    /// Set when some errors in the window sat at the noise floor and were
    /// dropped.
    pub degenerate: bool,
}

/// Fits `e_n ~ C rate^n` over the last `window + 1` reports.
pub fn rate_estimate<T: Real>(reports: &[IterationReport<T>], window: usize) -> Result<RateFit<T>> {
    let needed = window.max(1) + 1;
    if reports.len() < needed {
        return Err(Error::NotEnoughReports {
            needed,
            got: reports.len(),
        });
    }
    let floor = ratio_floor::<T>();
    let tail = &reports[reports.len() - needed..];
    let usable: Vec<(T, T)> = tail
        .iter()
        .filter(|r| r.sup_error >= floor)
        .map(|r| (T::from_count(r.n), r.sup_error.ln()))
        .collect();
    let degenerate = usable.len() < tail.len();
    if usable.len() < 2 {
        return Ok(RateFit {
            rate: T::nan(),
            points: usable.len(),
            degenerate: true,
        });
    }
    let count = T::from_count(usable.len());
    let mean_n = usable.iter().map(|p| p.0).sum::<T>() / count;
    let mean_l = usable.iter().map(|p| p.1).sum::<T>() / count;
    let (num, den) = usable.iter().fold((T::zero(), T::zero()), |(num, den), &(n, l)| {
        let dn = n - mean_n;
        (num + dn * (l - mean_l), den + dn * dn)
    });
    Ok(RateFit {
        rate: (num / den).exp(),
        points: usable.len(),
        degenerate,
    })
}
