use chancf::expansion::{
    convergents, decode, digit_of, digit_of_exact, encode, encode_exact, step, step_exact, tau, DigitSequence,
    ExpansionParams, Rational,
};
use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use proptest::prelude::*;

fn params(m: u32) -> ExpansionParams {
    ExpansionParams::new(m).unwrap()
}

fn ratio(p: u64, q: u64) -> Rational {
    Rational::new(BigInt::from(p), BigInt::from(q))
}

/// `m^-(a+1) < x <= m^-a`, checked without logarithms.
fn bracket_holds(x: f64, m: u32, a: u32) -> bool {
    let hi = (m as f64).powi(-(a as i32));
    let lo = hi / m as f64;
    lo < x && x <= hi * (1.0 + 1e-15)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn digit_lands_in_its_bracket(m in 2u32..17, x in 1e-12f64..=1.0) {
        let a = digit_of(x, &params(m)).unwrap();
        prop_assert!(bracket_holds(x, m, a) || bracket_holds(x * (1.0 + 4.0 * f64::EPSILON), m, a));
    }

    #[test]
    fn shift_stays_in_unit_interval(m in 2u32..17, x in 1e-12f64..=1.0) {
        let (_, y) = step(x, &params(m)).unwrap();
        prop_assert!((0.0..1.0).contains(&y));
    }

    #[test]
    fn float_round_trip(m in 2u32..11, x in 1e-6f64..1.0) {
        let seq = encode(x, &params(m), 60).unwrap();
        prop_assert!((decode(&seq).approx - x).abs() < 1e-10);
    }

    #[test]
    fn exact_round_trip(m in 2u32..11, p in 1u64..5000, extra in 1u64..5000) {
        let x = ratio(p, p + extra);
        let prm = params(m);
        let seq = encode_exact(&x, &prm, 200).unwrap();
        let back = decode(&seq).exact;
        if seq.terminated() {
            prop_assert_eq!(back, x);
        } else {
            // rationals can have eventually periodic expansions for m >= 3
            prop_assert!(m >= 3);
            prop_assert!((back - &x).abs().to_f64().unwrap() < 1e-12);
        }
    }

    #[test]
    fn shift_is_compatible_with_encoding(m in 2u32..11, p in 1u64..2000, extra in 1u64..2000) {
        let prm = params(m);
        let x = ratio(p, p + extra);
        let (a, y) = step_exact(&x, &prm).unwrap();
        let whole = encode_exact(&x, &prm, 400).unwrap();
        prop_assert_eq!(whole.digits()[0], a);
        if y.is_zero() {
            prop_assert_eq!(whole.len(), 1);
        } else {
            let rest = encode_exact(&y, &prm, 399).unwrap();
            prop_assert_eq!(&whole.digits()[1..], rest.digits());
            prop_assert_eq!(whole.terminated(), rest.terminated());
        }
    }

    #[test]
    fn convergents_alternate_and_squeeze(m in 2u32..8, p in 1u64..100_000, extra in 1u64..100_000) {
        let prm = params(m);
        let x = ratio(p, p + extra);
        let seq = encode_exact(&x, &prm, 40).unwrap();
        let cs = convergents(&seq);
        prop_assert_eq!(cs.len(), seq.len());
        for (k, c) in cs.iter().enumerate() {
            let d = c - &x;
            // odd-numbered convergents (1-based) lie above x
            if k % 2 == 0 { prop_assert!(!d.is_negative()); } else { prop_assert!(!d.is_positive()); }
        }
        for w in cs.windows(2) {
            let lo = if w[0] < w[1] { &w[0] } else { &w[1] };
            let hi = if w[0] < w[1] { &w[1] } else { &w[0] };
            prop_assert!(lo <= &x && &x <= hi);
        }
        prop_assert_eq!(cs.last().unwrap(), &decode(&seq).exact);
    }

    #[test]
    fn shift_matches_fractional_log_form(m in 2u32..17, x in 1e-9f64..1.0) {
        // tau(x) = (m^{frac(log_m(1/x))} - 1)/(m-1)
        let mf = m as f64;
        let l = (1.0 / x).ln() / mf.ln();
        let frac = l - l.floor();
        if frac > 1e-9 && frac < 1.0 - 1e-9 {
            let expected = (mf.powf(frac) - 1.0) / (mf - 1.0);
            prop_assert!((tau(x, &params(m)).unwrap() - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn float_and_exact_digits_agree(m in 2u32..11, p in 1u64..1000, extra in 1u64..1000) {
        let prm = params(m);
        let x = ratio(p, p + extra);
        let xf = x.to_f64().unwrap();
        let a = digit_of_exact(&x, &prm).unwrap();
        let b = digit_of(xf, &prm).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn boundaries_and_small_values() {
    let prm = params(2);
    assert_eq!(step(1.0f64, &prm).unwrap(), (0, 0.0));
    assert_eq!(step(0.25f64, &prm).unwrap(), (2, 0.0));
    assert_eq!(digit_of(1e-300f64, &prm).unwrap(), 996);
    let (a, y) = step_exact(&ratio(1, 1 << 40), &prm).unwrap();
    assert_eq!((a, y), (40, Rational::zero()));
    assert!(digit_of(0.0f64, &prm).is_err());
    assert!(digit_of(1.0000001f64, &prm).is_err());
    assert!(digit_of(f64::NAN, &prm).is_err());
    assert!(step_exact(&Rational::zero(), &prm).is_err());
    assert!(step_exact(&ratio(3, 2), &prm).is_err());
}

#[test]
fn f32_agrees_with_f64() {
    let prm = params(3);
    for x in [0.9f32, 0.5, 0.123, 1e-3, 0.3333] {
        let a = encode(x, &prm, 30).unwrap();
        let b = encode(x as f64, &prm, 30).unwrap();
        assert_eq!(a.digits()[..3], b.digits()[..3], "x={x}");
        assert!((decode(&a).approx_as::<f32>() - x).abs() < 1e-5);
    }
}

#[test]
fn sequence_validation() {
    let prm = params(2);
    assert!(DigitSequence::new(prm.clone(), vec![], false).is_err());
    assert!(DigitSequence::new(prm.clone(), vec![1, 0], true).is_err());
    assert!(DigitSequence::new(prm.clone(), vec![0], true).is_ok());
    assert!(DigitSequence::new(prm.clone(), vec![1, 0], false).is_ok());
    let seq = DigitSequence::new(prm, vec![1, 0, 1], true).unwrap();
    assert_eq!(decode(&seq.prefix(1).unwrap()).exact, ratio(1, 2));
    assert_eq!(decode(&seq.prefix(2).unwrap()).exact, ratio(1, 4));
    assert!(seq.prefix(0).is_none());
    assert_eq!(decode(&seq).exact, ratio(3, 10));
    assert!(Rational::one() > decode(&seq).exact);
}

#[test]
fn eventually_periodic_rational() {
    // 1/2 is a fixed point of the shift for m = 3
    let prm = params(3);
    assert_eq!(step_exact(&ratio(1, 2), &prm).unwrap(), (0, ratio(1, 2)));
    let seq = encode_exact(&ratio(1, 2), &prm, 25).unwrap();
    assert!(!seq.terminated());
    assert!(seq.digits().iter().all(|&a| a == 0));
}

#[test]
fn tiny_inputs_raise_precision_warning() {
    let seq = encode(1e-305f64, &params(2), 5).unwrap();
    assert!(seq.precision_warning());
    let seq = encode(0.3f64, &params(2), 5).unwrap();
    assert!(!seq.precision_warning());
}
