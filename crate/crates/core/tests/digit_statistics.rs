use chancf::digits::{digit_law_test, sample_orbit, DigitLawReport, DEFAULT_POOL_ABOVE};
use chancf::measure::digit_probability;
use chancf::MeasureParams64;

fn mp(m: u32) -> MeasureParams64 {
    MeasureParams64::new(m).unwrap()
}

fn freq(report: &DigitLawReport, i: u32) -> f64 {
    *report.counts.get(&i).unwrap_or(&0) as f64 / report.n_samples as f64
}

fn max_error(report: &DigitLawReport, mp: &MeasureParams64) -> f64 {
    (0..=5).map(|i| (freq(report, i) - digit_probability(i, mp)).abs()).fold(0.0, f64::max)
}

#[test]
fn burn_in_matters_for_the_first_digit() {
    // without burn-in the first digit follows Lebesgue measure: P(a = 0) = 1/2
    let mp = mp(2);
    let raw = sample_orbit(7, 200_000, 0, &mp).unwrap();
    let mixed = sample_orbit(7, 200_000, 10, &mp).unwrap();
    assert!((freq(&raw, 0) - 0.5).abs() < 0.005);
    assert!((freq(&mixed, 0) - digit_probability(0, &mp)).abs() < 0.005);
}

#[test]
fn swapped_counts_fail() {
    let mp = mp(2);
    let mut report = sample_orbit(3, 200_000, 10, &mp).unwrap();
    assert!(digit_law_test(&report, DEFAULT_POOL_ABOVE).unwrap().pass);
    let c0 = report.counts[&0];
    let c3 = report.counts[&3];
    report.counts.insert(0, c3);
    report.counts.insert(3, c0);
    assert!(!digit_law_test(&report, DEFAULT_POOL_ABOVE).unwrap().pass);
}

#[test]
fn frequencies_improve_with_sample_size() {
    let mp = mp(2);
    let better = (0..10u64)
        .filter(|&s| {
            let small = sample_orbit(100 + s, 10_000, 10, &mp).unwrap();
            let large = sample_orbit(200 + s, 1_000_000, 10, &mp).unwrap();
            max_error(&large, &mp) < max_error(&small, &mp)
        })
        .count();
    assert!(better >= 8, "{better} of 10");
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let mp = mp(3);
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| sample_orbit(42, 300_000, 10, &mp).unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(3));
    assert_eq!(one, run(8));
}

#[test]
fn report_serializes_with_stable_keys() {
    let report = sample_orbit(1, 70_000, 10, &mp(10)).unwrap();
    let v = serde_json::to_value(&report).unwrap();
    for key in ["m", "n_samples", "burn_in", "seed", "counts", "expected", "chi_square", "max_abs_freq_error"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    let total: u64 = report.counts.values().sum();
    assert_eq!(total, 70_000);
}

#[test]
fn invalid_requests() {
    let mp = mp(2);
    assert!(sample_orbit(1, 0, 10, &mp).is_err());
    let report = sample_orbit(1, 100, 10, &mp).unwrap();
    assert!(digit_law_test(&report, DEFAULT_POOL_ABOVE).is_err());
    assert!(digit_law_test(&report, 0).is_err());
}
