//! Digit map, shift map and exact reconstruction for the m-adic Chan
//! continued fraction
//!
//! ```text
//!            m^-a1
//! x = ---------------------------------
//!      1 + (m-1) m^-a2
//!          -----------------------------
//!          1 + (m-1) m^-a3 / (1 + ...)
//! ```
//!
//! Floating-point inputs go through [`step`]/[`encode`]; rational inputs
//! through [`step_exact`]/[`encode_exact`], which never round.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{domain, Error, Result};
use crate::scalar::Real;

/// Arbitrary-precision rational, always kept in lowest terms with a
/// positive denominator.
pub type Rational = BigRational;

/// How many ulps around an exact power `m^-a` are treated as the boundary
/// itself. Floating inputs such as `1.0 / 9.0` are meant as `3^-2`.
const BOUNDARY_ULPS: f64 = 4.0;

/// Base of the expansion together with `alpha = 1/m`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExpansionParams {
    m: u32,
    alpha: Rational,
}

impl ExpansionParams {
    pub fn new(m: u32) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidBase(m as u64));
        }
        Ok(Self {
            m,
            alpha: Rational::new(BigInt::one(), BigInt::from(m)),
        })
    }

    #[inline]
    pub fn m(&self) -> u32 {
        self.m
    }

    /// `1/m`, exactly.
    pub fn alpha(&self) -> &Rational {
        &self.alpha
    }

    #[inline]
    pub fn m_real<T: Real>(&self) -> T {
        T::from_u32(self.m).expect("u32 fits any float")
    }

    #[inline]
    pub fn alpha_real<T: Real>(&self) -> T {
        self.m_real::<T>().recip()
    }

    /// `m^-a` as an exact rational.
    pub fn power_exact(&self, a: u32) -> Rational {
        Rational::new(BigInt::one(), num_traits::pow(BigInt::from(self.m), a as usize))
    }
}

/// Digits `a_1, ..., a_N` of a (possibly truncated) expansion.
///
/// `terminated` is set when the orbit reached 0 exactly, i.e. the digits
/// represent the value exactly rather than a truncation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DigitSequence {
    params: ExpansionParams,
    digits: Vec<u32>,
    terminated: bool,
    precision_warning: bool,
}

impl DigitSequence {
    /// Builds a sequence from raw digits.
    ///
    /// A terminated sequence of length > 1 must end in a non-zero digit:
    /// `[.., a, 0]` denotes the same number as `[.., a + 1]` and is never
    /// produced by the encoder.
    pub fn new(params: ExpansionParams, digits: Vec<u32>, terminated: bool) -> Result<Self> {
        if digits.is_empty() {
            return Err(Error::InvalidDigits("empty digit list".into()));
        }
        if terminated && digits.len() > 1 && digits.last() == Some(&0) {
            return Err(Error::InvalidDigits(
                "terminated expansion cannot end in digit 0".into(),
            ));
        }
        Ok(Self {
            params,
            digits,
            terminated,
            precision_warning: false,
        })
    }

    pub fn params(&self) -> &ExpansionParams {
        &self.params
    }

    pub fn digits(&self) -> &[u32] {
        &self.digits
    }

    pub fn terminated(&self) -> bool {
        self.terminated
    }

    /// Set when a floating-point orbit came within `1e-300` of zero, where
    /// the next digit is dominated by rounding.
    pub fn precision_warning(&self) -> bool {
        self.precision_warning
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    /// The first `k` digits as a truncated (non-terminated) sequence.
    pub fn prefix(&self, k: usize) -> Option<DigitSequence> {
        if k == 0 || k > self.digits.len() {
            return None;
        }
        Some(DigitSequence {
            params: self.params.clone(),
            digits: self.digits[..k].to_vec(),
            terminated: self.terminated && k == self.digits.len(),
            precision_warning: false,
        })
    }
}

fn check_unit_open_closed<T: Real>(x: T) -> Result<()> {
    if !(x > T::zero() && x <= T::one()) {
        return Err(domain(x, "(0, 1]"));
    }
    Ok(())
}

/// Multiplies `x` by `m^a`, splitting the power so it never overflows.
fn scale_by_power<T: Real>(mut x: T, m: T, mut a: u32) -> T {
    let chunk = {
        let c = (T::max_value().ln() / m.ln()).to_f64().unwrap_or(1.0) / 2.0;
        (c.floor() as u32).max(1)
    };
    while a > 0 {
        let k = a.min(chunk);
        x = x * m.powi(k as i32);
        a -= k;
    }
    x
}

/// Returns `(a, s)` with `s = x m^a` brought into `(1/m, 1]`.
fn bracket<T: Real>(x: T, params: &ExpansionParams) -> (u32, T) {
    let m = params.m_real::<T>();
    let upper = T::one() + T::lit(BOUNDARY_ULPS) * T::epsilon();

    let mut a = 0u32;
    let mut s = x;
    // Long jump for small x, deliberately undershooting by one.
    if s * m * m * m < T::one() {
        let est = (-(x.ln()) / m.ln()).floor().to_f64().unwrap_or(0.0) - 1.0;
        if est > 0.0 {
            a = est as u32;
            s = scale_by_power(x, m, a);
        }
    }
    while s * m <= upper {
        s = s * m;
        a += 1;
    }
    while s > upper && a > 0 {
        s = s / m;
        a -= 1;
    }
    (a, s)
}

/// First digit `a_1(x)`: the unique `a >= 0` with `m^-(a+1) < x <= m^-a`.
///
/// Values within a few ulps of an exact power `m^-a` are classified as the
/// power itself.
pub fn digit_of<T: Real>(x: T, params: &ExpansionParams) -> Result<u32> {
    check_unit_open_closed(x)?;
    Ok(bracket(x, params).0)
}

/// One application of the shift: `(a_1(x), tau_m(x))`, with
/// `tau_m(x) = (m^-a / x - 1) / (m - 1)`.
pub fn step<T: Real>(x: T, params: &ExpansionParams) -> Result<(u32, T)> {
    check_unit_open_closed(x)?;
    let (a, s) = bracket(x, params);
    let tol = T::lit(BOUNDARY_ULPS) * T::epsilon();
    if (s - T::one()).abs() <= tol {
        return Ok((a, T::zero()));
    }
    let m = params.m_real::<T>();
    let y = (s.recip() - T::one()) / (m - T::one());
    let below_one = T::one() - T::epsilon();
    Ok((a, y.max(T::zero()).min(below_one)))
}

/// The generalized Gauss map `tau_m` on `[0, 1]`, with `tau_m(0) = 0` and
/// `tau_m(1) = 0`.
pub fn tau<T: Real>(x: T, params: &ExpansionParams) -> Result<T> {
    if !(x >= T::zero() && x <= T::one()) {
        return Err(domain(x, "[0, 1]"));
    }
    if x.is_zero() {
        return Ok(T::zero());
    }
    step(x, params).map(|(_, y)| y)
}

/// Exact first digit of a rational in `(0, 1]`.
pub fn digit_of_exact(x: &Rational, params: &ExpansionParams) -> Result<u32> {
    check_rational_open_closed(x)?;
    Ok(bracket_exact(x, params).0)
}

/// Exact shift of a rational in `(0, 1]`.
pub fn step_exact(x: &Rational, params: &ExpansionParams) -> Result<(u32, Rational)> {
    check_rational_open_closed(x)?;
    let (a, scaled_numer) = bracket_exact(x, params);
    // y = (q - p m^a) / (p m^a (m - 1))
    let q = x.denom();
    let m_minus_one = BigInt::from(params.m - 1);
    let y = Rational::new(q - &scaled_numer, scaled_numer * m_minus_one);
    Ok((a, y))
}

fn check_rational_open_closed(x: &Rational) -> Result<()> {
    if !x.is_positive() || x > &Rational::one() {
        return Err(domain(x, "(0, 1]"));
    }
    Ok(())
}

/// Returns `(a, p m^a)` where `x = p/q` and `p m^a <= q < p m^(a+1)`.
fn bracket_exact(x: &Rational, params: &ExpansionParams) -> (u32, BigInt) {
    let p = x.numer();
    let q = x.denom();
    let m = BigInt::from(params.m);

    let bit_gap = q.bits() as f64 - p.bits() as f64 - 1.0;
    let est = (bit_gap / (params.m as f64).log2()).floor() - 1.0;
    let mut a = if est > 0.0 { est as u32 } else { 0 };
    let mut scaled = p * num_traits::pow(m.clone(), a as usize);
    while &scaled > q {
        scaled = scaled.div_floor(&m);
        a -= 1;
    }
    loop {
        let next = &scaled * &m;
        if &next > q {
            break;
        }
        scaled = next;
        a += 1;
    }
    (a, scaled)
}

fn check_encode_args(max_digits: usize) -> Result<()> {
    if max_digits == 0 {
        return Err(Error::InvalidDigits("max_digits must be at least 1".into()));
    }
    Ok(())
}

/// Expands `x in (0, 1)` into at most `max_digits` digits.
pub fn encode<T: Real>(x: T, params: &ExpansionParams, max_digits: usize) -> Result<DigitSequence> {
    if !(x > T::zero() && x < T::one()) {
        return Err(domain(x, "(0, 1)"));
    }
    check_encode_args(max_digits)?;

    let warn_below = T::lit(1e-300).max(T::min_positive_value() * T::lit(1024.0));
    let mut digits = Vec::with_capacity(max_digits.min(256));
    let mut terminated = false;
    let mut precision_warning = x < warn_below;
    let mut cur = x;
    for _ in 0..max_digits {
        let (a, y) = step(cur, params)?;
        digits.push(a);
        if y.is_zero() {
            terminated = true;
            break;
        }
        if y < warn_below {
            precision_warning = true;
        }
        cur = y;
    }
    Ok(DigitSequence {
        params: params.clone(),
        digits,
        terminated,
        precision_warning,
    })
}

/// Exact expansion of a rational `x in (0, 1)`.
pub fn encode_exact(x: &Rational, params: &ExpansionParams, max_digits: usize) -> Result<DigitSequence> {
    if !x.is_positive() || x >= &Rational::one() {
        return Err(domain(x, "(0, 1)"));
    }
    check_encode_args(max_digits)?;

    let mut digits = Vec::new();
    let mut terminated = false;
    let mut cur = x.clone();
    for _ in 0..max_digits {
        let (a, y) = step_exact(&cur, params)?;
        digits.push(a);
        if y.is_zero() {
            terminated = true;
            break;
        }
        cur = y;
    }
    Ok(DigitSequence {
        params: params.clone(),
        digits,
        terminated,
        precision_warning: false,
    })
}

/// Value of a digit string, exact and rounded to `f64`.
#[derive(Clone, Debug, PartialEq)]
pub struct Decoded {
    pub exact: Rational,
    pub approx: f64,
}

impl Decoded {
    pub fn approx_as<T: Real>(&self) -> T {
        T::from_f64(self.approx).expect("finite")
    }
}

fn partial_numerator(params: &ExpansionParams, k: usize, digit: u32) -> Rational {
    let p = params.power_exact(digit);
    if k == 0 {
        p
    } else {
        p * BigInt::from(params.m - 1)
    }
}

/// Evaluates the finite continued fraction bottom-up with the innermost
/// tail set to 0.
pub fn decode(seq: &DigitSequence) -> Decoded {
    let params = seq.params();
    let mut tail = Rational::zero();
    for (k, &d) in seq.digits().iter().enumerate().rev() {
        tail = partial_numerator(params, k, d) / (Rational::one() + tail);
    }
    let approx = tail.to_f64().expect("value in (0, 1]");
    Decoded { exact: tail, approx }
}

/// All convergents `C_1, ..., C_N`, where `C_k` is the value of the first
/// `k` digits.
///
/// Uses the forward recurrence `h_k = h_{k-1} + b_k h_{k-2}` (same for
/// `k_k`), seeded with `h_{-1} = 1, h_0 = 0, k_{-1} = 0, k_0 = 1`.
pub fn convergents(seq: &DigitSequence) -> Vec<Rational> {
    let params = seq.params();
    let (mut h_prev, mut h) = (Rational::one(), Rational::zero());
    let (mut k_prev, mut k) = (Rational::zero(), Rational::one());
    let mut out = Vec::with_capacity(seq.len());
    for (idx, &d) in seq.digits().iter().enumerate() {
        let b = partial_numerator(params, idx, d);
        let h_next = &h + &b * &h_prev;
        let k_next = &k + &b * &k_prev;
        h_prev = std::mem::replace(&mut h, h_next);
        k_prev = std::mem::replace(&mut k, k_next);
        out.push(&h / &k);
    }
    out
}
