//! Monte Carlo check of the limiting digit law.
//!
//! Start points are drawn uniformly, pushed through `burn_in` shift steps
//! and the next digit is recorded. Under the invariant measure the digit
//! `i` has probability `G(m^-i) - G(m^-(i+1))`.

use std::collections::BTreeMap;

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{domain, Error, Result};
use crate::expansion::{digit_of, step};
use crate::measure::{digit_probability, digit_tail_probability, MeasureParams};
use crate::scalar::Real;

pub const DEFAULT_BURN_IN: u32 = 10;
/// Digits at or above this index share one chi-square cell.
pub const DEFAULT_POOL_ABOVE: u32 = 8;
pub const SIGNIFICANCE: f64 = 0.001;

/// Samples per chunk; chunk `c` draws from ChaCha8 stream `c` of the seed,
/// so the result does not depend on how chunks are scheduled.
const CHUNK: u64 = 1 << 16;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DigitLawReport {
    pub m: u32,
    pub n_samples: u64,
    pub burn_in: u32,
    pub seed: u64,
    pub counts: BTreeMap<u32, u64>,
    /// Invariant-measure probabilities for every digit up to the larger of
    /// the largest observed digit and the pooling threshold.
    pub expected: BTreeMap<u32, f64>,
    /// Pearson statistic with digits `>= DEFAULT_POOL_ABOVE` pooled.
    pub chi_square: f64,
    pub max_abs_freq_error: f64,
}

fn sample_chunk<T: Real>(seed: u64, chunk: u64, len: u64, burn_in: u32, mp: &MeasureParams<T>) -> Vec<u64> {
    let params = mp.params();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    let mut counts: Vec<u64> = Vec::new();
    let mut done = 0;
    'draw: while done < len {
        let u: f64 = rng.sample(Open01);
        let mut x = T::from_f64(u).expect("finite");
        if !(x > T::zero() && x < T::one()) {
            continue;
        }
        for _ in 0..burn_in {
            // x stays in (0, 1) so step cannot fail
            let (_, y) = step(x, params).expect("orbit inside (0, 1)");
            if y.is_zero() {
                continue 'draw;
            }
            x = y;
        }
        let d = digit_of(x, params).expect("orbit inside (0, 1)") as usize;
        if d >= counts.len() {
            counts.resize(d + 1, 0);
        }
        counts[d] += 1;
        done += 1;
    }
    counts
}

/// Draws `n_samples` orbits from `seed` and tallies the digit after
/// `burn_in` shifts.
///
/// The result depends only on the arguments, not on the number of worker
/// threads.
pub fn sample_orbit<T: Real>(seed: u64, n_samples: u64, burn_in: u32, mp: &MeasureParams<T>) -> Result<DigitLawReport> {
    if n_samples == 0 {
        return Err(domain(n_samples, "n_samples >= 1"));
    }
    let chunks = n_samples.div_ceil(CHUNK);
    let per_chunk: Vec<Vec<u64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let len = CHUNK.min(n_samples - c * CHUNK);
            sample_chunk(seed, c, len, burn_in, mp)
        })
        .collect();

    let mut counts = BTreeMap::new();
    for chunk in &per_chunk {
        for (d, &c) in chunk.iter().enumerate() {
            if c > 0 {
                *counts.entry(d as u32).or_insert(0) += c;
            }
        }
    }
    Ok(build_report(mp.m(), n_samples, burn_in, seed, counts))
}

fn build_report(m: u32, n_samples: u64, burn_in: u32, seed: u64, counts: BTreeMap<u32, u64>) -> DigitLawReport {
    let mp = MeasureParams::<f64>::new(m).expect("base already validated");
    let top = counts
        .keys()
        .next_back()
        .copied()
        .unwrap_or(0)
        .max(DEFAULT_POOL_ABOVE);
    let expected: BTreeMap<u32, f64> = (0..=top).map(|i| (i, digit_probability(i, &mp))).collect();
    let n = n_samples as f64;
    let max_abs_freq_error = expected
        .iter()
        .map(|(d, p)| (*counts.get(d).unwrap_or(&0) as f64 / n - p).abs())
        .fold(0.0, f64::max);
    let (observed, probs) = pooled_cells(&counts, &mp, DEFAULT_POOL_ABOVE);
    let chi_square = pearson(&observed, &probs, n);
    DigitLawReport {
        m,
        n_samples,
        burn_in,
        seed,
        counts,
        expected,
        chi_square,
        max_abs_freq_error,
    }
}

/// Observed counts and probabilities for cells `0, .., pool_above - 1` and
/// the pooled tail `>= pool_above`.
fn pooled_cells(counts: &BTreeMap<u32, u64>, mp: &MeasureParams<f64>, pool_above: u32) -> (Vec<f64>, Vec<f64>) {
    let cells = pool_above as usize + 1;
    let mut observed = vec![0.0; cells];
    for (&d, &c) in counts {
        observed[(d as usize).min(cells - 1)] += c as f64;
    }
    let mut probs: Vec<f64> = (0..pool_above).map(|i| digit_probability(i, mp)).collect();
    probs.push(digit_tail_probability(pool_above, mp));
    (observed, probs)
}

fn pearson(observed: &[f64], probs: &[f64], n: f64) -> f64 {
    observed
        .iter()
        .zip(probs)
        .map(|(&o, &p)| {
            let e = n * p;
            (o - e) * (o - e) / e
        })
        .sum()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChiSquareTest {
    pub chi_square: f64,
    pub dof: u32,
    /// Critical value at [`SIGNIFICANCE`].
    pub critical: f64,
    pub pass: bool,
}

/// Pearson goodness-of-fit of the report's counts against the invariant
/// digit law, with digits `>= pool_above` merged into one cell.
pub fn digit_law_test(report: &DigitLawReport, pool_above: u32) -> Result<ChiSquareTest> {
    if pool_above == 0 {
        return Err(domain(pool_above, "pool_above >= 1"));
    }
    let mp = MeasureParams::<f64>::new(report.m)?;
    let n = report.n_samples as f64;
    let (observed, probs) = pooled_cells(&report.counts, &mp, pool_above);
    for (i, p) in probs.iter().enumerate() {
        let expected = n * p;
        if expected < 5.0 {
            let cell = if i == pool_above as usize {
                format!(">={pool_above}")
            } else {
                i.to_string()
            };
            return Err(Error::InsufficientExpected { cell, expected });
        }
    }
    let chi_square = pearson(&observed, &probs, n);
    let dof = pool_above;
    let critical = ChiSquared::new(dof as f64)
        .expect("positive dof")
        .inverse_cdf(1.0 - SIGNIFICANCE);
    Ok(ChiSquareTest {
        chi_square,
        dof,
        critical,
        pass: chi_square < critical,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mp(m: u32) -> MeasureParams<f64> {
        MeasureParams::new(m).unwrap()
    }

    #[test]
    fn deterministic() {
        let a = sample_orbit(42, 20_000, 10, &mp(2)).unwrap();
        let b = sample_orbit(42, 20_000, 10, &mp(2)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.counts.values().sum::<u64>(), 20_000);
        let c = sample_orbit(43, 20_000, 10, &mp(2)).unwrap();
        assert_ne!(a.counts, c.counts);
    }

    #[test]
    fn rejects_empty_sample() {
        assert!(sample_orbit(1, 0, 10, &mp(2)).is_err());
    }

    #[test]
    fn pearson_zero_on_expected() {
        let probs = [0.5, 0.25, 0.25];
        let obs = [50.0, 25.0, 25.0];
        assert_eq!(pearson(&obs, &probs, 100.0), 0.0);
    }

    #[test]
    fn ideal_counts_pass() {
        let mp = mp(3);
        let n = 1_000_000u64;
        let mut counts = BTreeMap::new();
        let mut used = 0;
        for i in 0..20u32 {
            let c = (digit_probability(i, &mp) * n as f64).round() as u64;
            counts.insert(i, c);
            used += c;
        }
        *counts.get_mut(&0).unwrap() += n - used;
        let report = build_report(3, n, 10, 0, counts);
        let t = digit_law_test(&report, 6).unwrap();
        assert!(t.chi_square < 1.0);
        assert!(t.pass);
        assert_eq!(t.dof, 6);
        assert!((t.critical - 22.457_744).abs() < 1e-4);
    }

    #[test]
    fn small_samples_are_rejected() {
        let report = sample_orbit(7, 50, 10, &mp(2)).unwrap();
        assert!(matches!(
            digit_law_test(&report, 8),
            Err(Error::InsufficientExpected { .. })
        ));
        assert!(digit_law_test(&report, 0).is_err());
    }
}
