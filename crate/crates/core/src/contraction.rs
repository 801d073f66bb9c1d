//! The contraction constant
//!
//! ```text
//! q_m = (m-1)^2 (m^2+1) sum_{i >= 0} 1 / (m^(i+1) + m - 1)^2
//! ```
//!
//! bounding `max|f'_{n+1}| <= q_m max|f'_n|`, together with an audit of the
//! closed-form upper bound usually quoted for it.
//!
//! `q_m < 1` only for `m = 2`; from `m = 3` on the series exceeds 1. The
//! functions here report those numbers as they are.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::expansion::ExpansionParams;
use crate::gauss_kuzmin::{density_transfer, derivative_max, DensityGrid};
use crate::measure::MeasureParams;
use crate::scalar::Real;

/// `alpha^i - alpha^(2i)`.
pub fn delta<T: Real>(i: u32, mp: &MeasureParams<T>) -> T {
    let a = mp.alpha().powi(i as i32);
    a - a * a
}

/// Certified value of `q_m`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QmBound<T> {
    pub m: u32,
    /// Partial sum through `truncation_index`, scaled.
    pub value: T,
    pub truncation_index: usize,
    /// The true `q_m` lies in `[value, value + tail_bound]`.
    pub tail_bound: T,
    /// `value + tail_bound < 1`.
    pub below_one: bool,
}

fn qm_prefactor<T: Real>(m: T) -> T {
    let mm1 = m - T::one();
    mm1 * mm1 * (m * m + T::one())
}

#[inline]
fn qm_term<T: Real>(m: T, i: usize) -> T {
    let d = m.powi(i as i32 + 1) + m - T::one();
    (d * d).recip()
}

/// Scaled bound on `sum_{i > index} term_i`, from
/// `1/(m^(i+1) + m - 1)^2 < m^(-2(i+1))`.
fn qm_tail<T: Real>(m: T, index: usize) -> T {
    let inv_sq = (m * m).recip();
    qm_prefactor(m) * inv_sq.powi(index as i32 + 2) / (T::one() - inv_sq)
}

/// `q_m` summed until the certified tail is below `tol`.
pub fn qm<T: Real>(m: u32, tol: T) -> Result<QmBound<T>> {
    ExpansionParams::new(m)?;
    if !(tol > T::zero()) {
        return Err(Error::InvalidTolerance(tol.to_string()));
    }
    let mf = T::from_u32(m).expect("u32 fits");
    let mut index = 0usize;
    let mut sum = qm_term(mf, 0);
    while qm_tail(mf, index) >= tol {
        index += 1;
        let term = qm_term(mf, index);
        if term.is_zero() {
            break;
        }
        sum = sum + term;
    }
    let value = qm_prefactor(mf) * sum;
    let tail_bound = qm_tail(mf, index);
    Ok(QmBound {
        m,
        value,
        truncation_index: index,
        tail_bound,
        below_one: value + tail_bound < T::one(),
    })
}

/// `q_m` with the series truncated after exactly `index` (inclusive).
pub fn qm_partial_sum<T: Real>(m: u32, index: usize) -> Result<T> {
    ExpansionParams::new(m)?;
    let mf = T::from_u32(m).expect("u32 fits");
    let s = (0..=index).map(|i| qm_term(mf, i)).sum::<T>();
    Ok(qm_prefactor(mf) * s)
}

/// One evaluation of the closed-form bound
/// `(m-1)^2 (m^2+1) [1/(2m-1)^2 + middle + 1/(m^3 (m-1)^3 (m^2+1))]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainEvaluation<T> {
    /// The three bracketed terms in order.
    pub terms: [T; 3],
    /// Prefactor times the sum of `terms`.
    pub bound: T,
    pub at_most_one: bool,
}

/// Audit of the closed-form bound on `q_m` against the series itself.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainAudit<T> {
    pub m: u32,
    /// Middle term printed as `1/(m^2+m-1)`.
    pub printed: ChainEvaluation<T>,
    /// Middle term squared, `1/(m^2+m-1)^2`, matching the `i = 1` series term.
    pub squared_middle: ChainEvaluation<T>,
    /// Series value of `q_m`.
    pub q_m: T,
    pub q_m_tail_bound: T,
    pub q_m_below_one: bool,
    /// Whether `1/(m^(i+1)+m-1)^2 <= m^-i / (m^2 (m-1)^2 (m^2+1))` holds for
    /// every `i` in `2..=64`; the geometric tail term relies on it.
    pub tail_comparison_holds: bool,
    /// `printed.at_most_one && q_m_below_one`.
    pub verdict: bool,
}

fn chain<T: Real>(m: T, middle: T) -> ChainEvaluation<T> {
    let mm1 = m - T::one();
    let first = (T::lit(2.0) * m - T::one()).powi(2).recip();
    let last = (m.powi(3) * mm1.powi(3) * (m * m + T::one())).recip();
    let terms = [first, middle, last];
    let bound = qm_prefactor(m) * (first + middle + last);
    ChainEvaluation {
        terms,
        bound,
        at_most_one: bound <= T::one(),
    }
}

/// Evaluates the closed-form bound on `q_m` as printed and with the squared
/// middle term, next to the series value.
pub fn audit_final_chain<T: Real>(m: u32) -> Result<ChainAudit<T>> {
    let q = qm::<T>(m, T::lit(1e-12).max(T::epsilon()))?;
    let mf = T::from_u32(m).expect("u32 fits");
    let middle = (mf * mf + mf - T::one()).recip();
    let printed = chain(mf, middle);
    let squared_middle = chain(mf, middle * middle);

    let mm1 = mf - T::one();
    let scale = (mf * mf * mm1 * mm1 * (mf * mf + T::one())).recip();
    let tail_comparison_holds = (2..=64usize).all(|i| qm_term(mf, i) <= scale * mf.powi(-(i as i32)));

    Ok(ChainAudit {
        m,
        verdict: printed.at_most_one && q.below_one,
        printed,
        squared_middle,
        q_m: q.value,
        q_m_tail_bound: q.tail_bound,
        q_m_below_one: q.below_one,
        tail_comparison_holds,
    })
}

/// Observed contraction of `max|f'|` over one density transfer step.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContractionStep<T> {
    pub m_before: T,
    pub m_after: T,
    pub ratio: T,
}

/// Below this, `max|f'|` estimates are dominated by rounding.
pub const DERIVATIVE_NOISE_FLOOR: f64 = 1e-9;

/// Applies one density transfer and compares `max|f'|` before and after.
///
/// Returns the image alongside the step so audits can be chained.
pub fn contraction_audit<T: Real>(
    mp: &MeasureParams<T>,
    f: &DensityGrid<T>,
    tol: T,
) -> Result<(ContractionStep<T>, DensityGrid<T>)> {
    let m_before = derivative_max(f);
    let floor = T::lit(DERIVATIVE_NOISE_FLOOR).max(T::lit(1e3) * T::epsilon());
    if !(m_before > floor) {
        return Err(Error::Degenerate(format!(
            "max |f'| = {m_before} is below the noise floor {floor}"
        )));
    }
    let next = density_transfer(f, mp, tol)?;
    let m_after = derivative_max(&next);
    Ok((
        ContractionStep {
            m_before,
            m_after,
            ratio: m_after / m_before,
        },
        next,
    ))
}
