mod common;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{random_issue, random_issue_with};
use juryeq::experiment::{catalog, simulation_issue};
use juryeq::ppm::{classify_ppm, Vanishing};
use juryeq::support::{expected_margin, expected_turnout, find_pivots};
use juryeq::{
    best_response, exact_win_probability, find_equilibria, mc_win_probability,
    normal_win_probability, trace_sequence, EquilibriumKind, Issue, Ppm, Selection,
    SupportFunction,
};

fn poly(alpha: f64) -> Ppm {
    Ppm::Polynomial {
        q: 1.0,
        alpha,
        beta: 0.5,
    }
}

fn decades(lo: u32, hi: u32) -> Vec<u64> {
    (lo..=hi).map(|e| 10u64.pow(e)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn turnout_is_monotone_in_cost(seed in any::<u64>(), c1 in 0.0..1.0f64, c2 in 0.0..1.0f64, n in 1.0..1e9f64) {
        let issue = random_issue(&mut ChaCha8Rng::seed_from_u64(seed));
        let (lo, hi) = if c1 <= c2 { (c1, c2) } else { (c2, c1) };
        prop_assert!(expected_turnout(&issue, lo, n).unwrap() <= expected_turnout(&issue, hi, n).unwrap());
    }

    #[test]
    fn json_round_trip(seed in any::<u64>(), pick in 0usize..12) {
        let ppm = catalog()[pick].1.clone();
        let issue = random_issue_with(&mut ChaCha8Rng::seed_from_u64(seed), ppm);
        let back = Issue::from_json(&issue.to_json()).unwrap();
        prop_assert_eq!(back, issue);
    }

    #[test]
    fn exact_is_symmetric_under_swap(seed in any::<u64>(), n in 1u64..400, c in 0.0..1.0f64) {
        let issue = random_issue(&mut ChaCha8Rng::seed_from_u64(seed));
        let here = exact_win_probability(&issue, n, c).unwrap();
        let there = exact_win_probability(&issue.swapped(), n, c).unwrap();
        let tie = here.tie_probability.unwrap();
        prop_assert!((there.value - (1.0 - here.value - tie)).abs() <= 1e-12);
        prop_assert!((there.value - here.opponent).abs() <= 1e-12);
        prop_assert!((here.value + here.opponent + tie - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn normal_win_probability_increases_with_margin(
        n in 100u64..1_000_000,
        turnout in 0.05..0.95f64,
        lead in 0.0..0.2f64,
        step in 1e-4..0.1f64,
    ) {
        // flat supports below c = 0.5 fix the turnout and let the margin vary alone
        let wp = |m: f64| {
            let a = turnout * (1.0 + m) / 2.0;
            let b = turnout - a;
            let rest = (1.0 - turnout) / 2.0;
            let flat = |s: f64| SupportFunction::from_breakpoints(vec![(0.0, s), (0.5, s), (1.0, s + rest)]).unwrap();
            let issue = Issue::new(flat(a), flat(b), Ppm::Binomial).unwrap();
            normal_win_probability(&issue, n, 0.25).unwrap().value
        };
        let (m1, m2) = (lead, (lead + step).min(0.99));
        prop_assume!(m2 > m1);
        let (w1, w2) = (wp(m1), wp(m2));
        prop_assert!(w2 > w1 || w1 == 1.0, "WP({m1}) = {w1}, WP({m2}) = {w2}");
    }
}

#[test]
fn existence_and_residuals_on_random_issues() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let models = catalog();
    for case in 0..200 {
        let (name, ppm) = models[rng.random_range(0..models.len())].clone();
        let issue = random_issue_with(&mut rng, ppm);
        let n = 10f64.powf(rng.random_range(1.0..6.0)) as u64;
        let points = find_equilibria(&issue, n).unwrap();
        assert!(
            !points.is_empty(),
            "case {case} ({name}, N = {n}): no equilibrium"
        );
        let pivots = find_pivots(&issue);
        for p in &points {
            assert!(
                p.residual <= 1e-10,
                "case {case} ({name}, N = {n}): residual {} at {}",
                p.residual,
                p.c
            );
            match p.kind {
                EquilibriumKind::Left { pivot } => {
                    assert!(
                        pivots.locations().contains(&pivot) && p.c < pivot,
                        "case {case}: {p:?}"
                    )
                }
                EquilibriumKind::Right { pivot } => {
                    assert!(
                        pivots.locations().contains(&pivot) && p.c > pivot,
                        "case {case}: {p:?}"
                    )
                }
                _ => {}
            }
        }
    }
}

#[test]
fn pivots_match_a_dense_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for case in 0..100 {
        let issue = random_issue(&mut rng);
        let pivots = find_pivots(&issue);
        let locations = pivots.locations();
        let diff = |c: f64| issue.s_a().eval(c).unwrap() - issue.s_b().eval(c).unwrap();
        let steps = 100_000;
        let mut prev = diff(0.0);
        let mut crossings = 0;
        for i in 1..=steps {
            let c = i as f64 / steps as f64;
            let d = diff(c);
            if prev * d < 0.0 {
                crossings += 1;
                let near = locations.iter().any(|&p| (p - c).abs() <= 2e-5)
                    || pivots
                        .intervals
                        .iter()
                        .any(|iv| iv.contains(c) || iv.contains(c - 1e-5));
                assert!(
                    near,
                    "case {case}: sign change near {c} not reported in {locations:?}"
                );
            }
            if d != 0.0 {
                prev = d;
            }
        }
        for p in &pivots.points {
            assert!(
                diff(p.c).abs() <= 1e-12,
                "case {case}: reported pivot {} is not a root",
                p.c
            );
        }
        assert!(
            pivots.points.len() >= crossings,
            "case {case}: {crossings} crossings vs {locations:?}"
        );
    }
}

#[test]
fn margin_grows_linearly_away_from_pivots() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut checked = 0;
    for _ in 0..300 {
        let issue = random_issue(&mut rng);
        for p in &find_pivots(&issue).points {
            for (slopes, sign) in [(p.right, 1.0), (p.left, -1.0)] {
                let Some(s) = slopes else { continue };
                // the linear law only holds up to the nearest breakpoint
                let clear = issue
                    .breakpoint_costs()
                    .iter()
                    .all(|&b| (b - p.c).abs() > 1e-3 || b == p.c);
                let inside = (0.0..=1.0).contains(&(p.c + sign * 1e-3));
                if !clear || !inside {
                    continue;
                }
                let rel: Vec<f64> = [1e-3, 1e-4, 1e-5]
                    .iter()
                    .map(|&eps| {
                        let m = expected_margin(&issue, p.c + sign * eps).unwrap();
                        (m / eps - s.margin).abs() / s.margin
                    })
                    .collect();
                // the error is first order in eps
                assert!(
                    rel[1] <= 0.15 * rel[0] + 1e-9 && rel[2] <= 0.15 * rel[1] + 1e-9,
                    "m'={}: {rel:?}",
                    s.margin
                );
                assert!(rel[2] <= 1e-2, "m'={}: {rel:?}", s.margin);
                checked += 1;
            }
        }
    }
    assert!(checked > 100, "only {checked} finite differences checked");
}

#[test]
fn exact_monte_carlo_and_normal_agree() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let mut failures = Vec::new();
    let mut compared = 0;
    for case in 0..50 {
        let issue = random_issue(&mut rng);
        let c: f64 = rng.random_range(0.0..1.0);
        for n in [100u64, 500, 2000] {
            let exact = exact_win_probability(&issue, n, c).unwrap();
            let mc = mc_win_probability(&issue, n, c, 100_000, case * 3 + n).unwrap();
            let z = (mc.value - exact.value).abs() / mc.ci_halfwidth.unwrap();
            if z > 3.0 {
                failures.push(format!(
                    "case {case} N={n}: mc {z:.2} half-widths from exact"
                ));
            }
            let turnout = expected_turnout(&issue, c, n as f64).unwrap();
            let Ok(m) = expected_margin(&issue, c) else {
                continue;
            };
            if m <= 0.1 && turnout >= 100.0 {
                let normal = normal_win_probability(&issue, n, c).unwrap();
                compared += 1;
                let gap = (exact.value - normal.value).abs();
                if gap > 0.02 {
                    failures.push(format!(
                        "case {case} N={n} c={c:.3}: exact {:.5} normal {:.5} (tie {:.5})",
                        exact.value,
                        normal.value,
                        exact.tie_probability.unwrap()
                    ));
                }
            }
        }
    }
    assert!(compared >= 10, "only {compared} normal comparisons");
    assert!(
        failures.is_empty(),
        "{} of {compared} comparisons:\n{}",
        failures.len(),
        failures.join("\n")
    );
}

#[test]
fn exact_tie_matches_the_cov_model() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..20 {
        let issue = random_issue(&mut rng);
        for n in [1u64, 5, 12, 33, 60] {
            for i in 0..=20 {
                let c = i as f64 / 20.0;
                let Ok(m) = expected_margin(&issue, c) else {
                    continue;
                };
                let turnout = expected_turnout(&issue, c, n as f64).unwrap();
                let cov = juryeq::ppm::eval_cov(n, turnout.min(n as f64), m).unwrap();
                let tie = exact_win_probability(&issue, n, c)
                    .unwrap()
                    .tie_probability
                    .unwrap();
                assert!(
                    (cov - tie).abs() <= 1e-10,
                    "N={n} c={c}: cov {cov} vs tie {tie}"
                );
            }
        }
    }
}

#[test]
fn stability_dichotomy_on_the_simulation_issue() {
    for alpha in [0.8, 1.0, 1.25] {
        let issue = simulation_issue(poly(alpha));
        for n in [100_000u64, 1_000_000, 10_000_000, 100_000_000] {
            let points = find_equilibria(&issue, n).unwrap();
            let found: Vec<(&str, bool)> =
                points.iter().map(|p| (p.kind.name(), p.stable)).collect();
            assert_eq!(
                found,
                [("trivial", true), ("left", false), ("right", true)],
                "alpha {alpha}, N {n}"
            );
        }
    }
}

#[test]
fn left_and_right_sequences_close_in_on_the_pivot() {
    let grid = decades(4, 10);
    let weak: Vec<Ppm> = catalog()
        .into_iter()
        .map(|(_, ppm)| ppm)
        .filter(|ppm| {
            let class = classify_ppm(ppm);
            class.vanishing == Vanishing::Weak && class.tie_sensitivity.is_some_and(|q| q > 0.6)
        })
        .collect();
    assert!(weak.len() >= 3);
    for ppm in weak {
        let issue = simulation_issue(ppm.clone());
        for selection in [
            Selection::Left { pivot: 0.6 },
            Selection::Right { pivot: 0.6 },
        ] {
            let seq = trace_sequence(&issue, &grid, selection).unwrap();
            assert_eq!(
                seq.points.len(),
                grid.len(),
                "{} {selection:?} broke at {:?}",
                ppm.label(),
                seq.break_index
            );
            let gaps: Vec<f64> = seq.points.iter().map(|p| (p.c - 0.6).abs()).collect();
            assert!(
                gaps.windows(2).all(|w| w[1] < w[0]),
                "{} {selection:?}: {gaps:?}",
                ppm.label()
            );
        }
    }
}

#[test]
fn strongly_vanishing_models_only_have_tiny_equilibria() {
    let mut rng = ChaCha8Rng::seed_from_u64(29);
    for ppm in [Ppm::Binomial, Ppm::Poisson, Ppm::Cov { population: 1000 }] {
        for _ in 0..5 {
            let issue = random_issue_with(&mut rng, ppm.clone());
            let tops: Vec<f64> = [10_000u64, 1_000_000, 100_000_000]
                .iter()
                .map(|&n| {
                    let points = find_equilibria(&issue, n).unwrap();
                    let trivial = points.iter().map(|p| p.ln_c).fold(f64::INFINITY, f64::min);
                    let top = points
                        .iter()
                        .map(|p| p.ln_c)
                        .fold(f64::NEG_INFINITY, f64::max);
                    if n == 100_000_000 {
                        assert!(
                            top <= trivial + 10f64.ln(),
                            "{}: ln c from {trivial} to {top}",
                            ppm.label()
                        );
                    }
                    top
                })
                .collect();
            assert!(
                tops.windows(2).all(|w| w[1] < w[0]),
                "{}: {tops:?}",
                ppm.label()
            );
        }
    }
}

#[test]
fn margin_is_proportional_to_the_gap_along_right_sequences() {
    let issue = simulation_issue(poly(1.0));
    let seq = trace_sequence(&issue, &decades(4, 10), Selection::Right { pivot: 0.6 }).unwrap();
    let slope = find_pivots(&issue).side_slopes(0.6, true).unwrap().margin;
    let last = seq.points.last().unwrap();
    let ratio = expected_margin(&issue, last.c).unwrap() / (last.c - 0.6);
    assert!(
        (ratio / slope - 1.0).abs() <= 0.05,
        "ratio {ratio} vs m' {slope}"
    );
}

#[test]
fn best_response_falls_just_right_of_the_pivot() {
    let issue = simulation_issue(poly(1.0));
    for n in [1_000_000u64, 100_000_000] {
        let z = 0.05;
        let values: Vec<f64> = (1..=200)
            .map(|i| best_response(&issue, n, 0.6 + z * i as f64 / 200.0).unwrap())
            .collect();
        // flat while the cap binds, strictly decreasing after
        let cap = values.iter().rposition(|&p| p == 1.0).map_or(0, |i| i + 1);
        assert!(
            cap < values.len() / 2,
            "N = {n}: capped on {cap} of {} points",
            values.len()
        );
        assert!(values[cap..].windows(2).all(|w| w[1] < w[0]), "N = {n}");
    }
}

#[test]
fn slow_sequences_approach_certainty_and_fast_ones_a_coin_flip() {
    let grid = decades(4, 10);
    let wp_tail = |alpha: f64| -> Vec<f64> {
        let issue = simulation_issue(poly(alpha));
        let seq = trace_sequence(&issue, &grid, Selection::Right { pivot: 0.6 }).unwrap();
        seq.grid
            .iter()
            .zip(&seq.points)
            .map(|(&n, p)| normal_win_probability(&issue, n, p.c).unwrap().value)
            .collect()
    };
    // beta / alpha < 1/2 converges slowly
    let slow = wp_tail(1.25);
    assert!(slow.iter().any(|&w| w > 0.99), "{slow:?}");
    let fast = wp_tail(0.8);
    let tail = &fast[fast.len() - 4..];
    assert!(
        tail.windows(2).all(|w| w[1] < w[0] && w[1] > 0.5),
        "{fast:?}"
    );
    assert!(tail[tail.len() - 1] < 0.6, "{fast:?}");
}
