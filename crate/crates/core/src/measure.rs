//! The invariant probability measure `gamma_m` of the shift map.
//!
//! Density `k_m / (((m-1)x + 1)((m-1)x + m))` on `[0, 1]`, with
//! `k_m = (m-1)^2 / log(m^2 / (2m-1))`. Its distribution function
//!
//! ```text
//! G(x) = log(m((m-1)x + 1) / ((m-1)x + m)) / log(m^2 / (2m-1))
//! ```
//!
//! is also the limit of the Gauss-Kuzmin iteration.

use crate::error::{domain, Result};
use crate::expansion::ExpansionParams;
use crate::scalar::Real;

/// Expansion parameters plus the normalizing constant `k_m`.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasureParams<T> {
    params: ExpansionParams,
    k: T,
    /// `log(m^2 / (2m-1))`, the normalizer of `G`.
    log_norm: T,
}

impl<T: Real> MeasureParams<T> {
    pub fn new(m: u32) -> Result<Self> {
        Ok(Self::from_params(ExpansionParams::new(m)?))
    }

    pub fn from_params(params: ExpansionParams) -> Self {
        let log_norm = log_norm::<T>(&params);
        let mm1 = params.m_real::<T>() - T::one();
        Self {
            k: mm1 * mm1 / log_norm,
            params,
            log_norm,
        }
    }

    pub fn params(&self) -> &ExpansionParams {
        &self.params
    }

    #[inline]
    pub fn m(&self) -> u32 {
        self.params.m()
    }

    /// `k_m`.
    #[inline]
    pub fn k(&self) -> T {
        self.k
    }

    #[inline]
    pub fn alpha(&self) -> T {
        self.params.alpha_real()
    }
}

// log(m^2/(2m-1)) = log1p((m-1)^2/(2m-1)); the log1p form keeps full
// relative accuracy for every m.
fn log_norm<T: Real>(params: &ExpansionParams) -> T {
    let m = params.m_real::<T>();
    let mm1 = m - T::one();
    (mm1 * mm1 / (m + mm1)).ln_1p()
}

/// `k_m = (m-1)^2 / log(m^2 / (2m-1))`.
pub fn k_const<T: Real>(m: u32) -> Result<T> {
    Ok(MeasureParams::<T>::new(m)?.k())
}

fn check_unit<T: Real>(x: T) -> Result<()> {
    if !(x >= T::zero() && x <= T::one()) {
        return Err(domain(x, "[0, 1]"));
    }
    Ok(())
}

/// Density of `gamma_m` at `x`.
pub fn gamma_density<T: Real>(x: T, mp: &MeasureParams<T>) -> Result<T> {
    check_unit(x)?;
    Ok(density_unchecked(x, mp))
}

#[inline]
pub(crate) fn density_unchecked<T: Real>(x: T, mp: &MeasureParams<T>) -> T {
    let m = mp.params.m_real::<T>();
    let t = (m - T::one()) * x;
    mp.k / ((t + T::one()) * (t + m))
}

/// Distribution function `G(x) = gamma_m([0, x])`.
pub fn gamma_cdf<T: Real>(x: T, mp: &MeasureParams<T>) -> Result<T> {
    check_unit(x)?;
    Ok(cdf_unchecked(x, mp))
}

#[inline]
pub(crate) fn cdf_unchecked<T: Real>(x: T, mp: &MeasureParams<T>) -> T {
    // m((m-1)x+1)/((m-1)x+m) = 1 + (m-1)^2 x / ((m-1)x+m)
    let m = mp.params.m_real::<T>();
    let mm1 = m - T::one();
    (mm1 * mm1 * x / (mm1 * x + m)).ln_1p() / mp.log_norm
}

/// `gamma_m(a_1 = i) = G(m^-i) - G(m^-(i+1))`.
pub fn digit_probability<T: Real>(i: u32, mp: &MeasureParams<T>) -> T {
    let alpha = mp.alpha();
    let upper = alpha.powi(i as i32);
    cdf_unchecked(upper, mp) - cdf_unchecked(upper * alpha, mp)
}

/// `gamma_m(a_1 >= i) = G(m^-i)`.
pub fn digit_tail_probability<T: Real>(i: u32, mp: &MeasureParams<T>) -> T {
    cdf_unchecked(mp.alpha().powi(i as i32), mp)
}

/// Digit law truncated where the remaining mass drops below `tol`.
#[derive(Clone, Debug, PartialEq)]
pub struct DigitLaw<T> {
    /// `probabilities[i] = gamma_m(a_1 = i)`.
    pub probabilities: Vec<T>,
    /// `gamma_m(a_1 >= probabilities.len())`, which is `< tol`.
    pub tail: T,
}

/// Digit probabilities up to the first index whose tail mass is below `tol`.
pub fn digit_law<T: Real>(mp: &MeasureParams<T>, tol: T) -> Result<DigitLaw<T>> {
    if !(tol > T::zero()) {
        return Err(crate::Error::InvalidTolerance(tol.to_string()));
    }
    let mut probabilities = Vec::new();
    let mut i = 0u32;
    loop {
        let tail = digit_tail_probability(i, mp);
        if tail < tol {
            return Ok(DigitLaw { probabilities, tail });
        }
        probabilities.push(digit_probability(i, mp));
        i += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mp(m: u32) -> MeasureParams<f64> {
        MeasureParams::new(m).unwrap()
    }

    #[test]
    fn k_values() {
        // reference values evaluated at 40 digits
        assert!((k_const::<f64>(2).unwrap() - 3.476_059_496_782_207).abs() < 1e-14);
        assert!((k_const::<f64>(3).unwrap() - 6.805_190_112_072_547).abs() < 1e-13);
        assert!((k_const::<f64>(2).unwrap() - 1.0 / (4.0f64 / 3.0).ln()).abs() < 1e-14);
        assert!(k_const::<f64>(1).is_err());
    }

    #[test]
    fn k_normalization() {
        for m in 2u32..=16 {
            let k = k_const::<f64>(m).unwrap();
            let mf = m as f64;
            let lhs = k * (mf * mf / (2.0 * mf - 1.0)).ln() / ((mf - 1.0) * (mf - 1.0));
            assert!((lhs - 1.0).abs() < 1e-14, "m={m}: {lhs}");
        }
    }

    #[test]
    fn density_examples() {
        let mp = mp(2);
        assert!((gamma_density(0.0, &mp).unwrap() - 1.738_029_748_391_103).abs() < 1e-14);
        assert!((gamma_density(1.0, &mp).unwrap() - 0.579_343_249_463_701).abs() < 1e-14);
        assert!(gamma_density(1.1, &mp).is_err());
    }

    #[test]
    fn cdf_examples() {
        for m in [2u32, 3, 7, 100] {
            let mp = mp(m);
            assert_eq!(gamma_cdf(0.0, &mp).unwrap(), 0.0);
            assert!((gamma_cdf(1.0, &mp).unwrap() - 1.0).abs() < 1e-15);
        }
        let g = gamma_cdf(0.5, &mp(2)).unwrap();
        assert!((g - 0.633_760_578_961_742_5).abs() < 1e-14);
        assert!((g - 1.2f64.ln() / (4.0f64 / 3.0).ln()).abs() < 1e-14);
        assert!(gamma_cdf(-0.01, &mp(2)).is_err());
    }

    #[test]
    fn digit_probability_examples() {
        let mp = mp(2);
        assert!((digit_probability(0, &mp) - 0.366_239_421_038_257_5).abs() < 1e-14);
        assert!((digit_probability(1, &mp) - 0.267_521_157_923_485).abs() < 1e-14);
        assert!((digit_probability(5, &mp) - 0.026_228_349_832_757_95).abs() < 1e-14);
    }

    #[test]
    fn digit_law_sums_to_one() {
        for m in [2u32, 3, 5, 10] {
            let law = digit_law(&mp(m), 1e-13).unwrap();
            let s: f64 = law.probabilities.iter().sum();
            assert!(law.tail < 1e-13);
            assert!((s + law.tail - 1.0).abs() < 1e-12, "m={m}");
            assert!(law.probabilities.iter().all(|&p| p > 0.0 && p < 1.0));
        }
        assert!(digit_law(&mp(2), 0.0).is_err());
    }

    #[test]
    fn f32_measure() {
        let mp = MeasureParams::<f32>::new(2).unwrap();
        assert!((gamma_cdf(0.5f32, &mp).unwrap() - 0.633_760_6).abs() < 1e-6);
        assert!((mp.k() - 3.476_059_5).abs() < 1e-5);
    }
}
