//! Acceptance criteria, run in order with one PASS/FAIL line each.
//!
//! Runs as a plain binary so timings are not disturbed by other tests.

mod common;

use std::f64::consts::PI;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{enumerate, random_issue};
use juryeq::equilibrium::fit_log_slope;
use juryeq::experiment::{run_scenario, simulation_issue, McSettings, ScenarioOverrides};
use juryeq::ppm::{eval_binomial, eval_cov};
use juryeq::special::normal_cdf;
use juryeq::support::{expected_margin, expected_turnout, find_pivots};
use juryeq::{
    exact_win_probability, find_equilibria, jury_classify, mc_win_probability,
    normal_win_probability, trace_sequence, EquilibriumKind, EquilibriumPoint, JuryClass, Ppm,
    Selection,
};

struct Verdict {
    pass: bool,
    details: Vec<String>,
}

impl Verdict {
    fn new() -> Self {
        Verdict {
            pass: true,
            details: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, detail: String) {
        self.pass &= ok;
        self.details
            .push(format!("{} {detail}", if ok { "ok  " } else { "MISS" }));
    }

    fn within(&mut self, what: &str, got: f64, want: f64, tol: f64) {
        let ok = (got - want).abs() <= tol;
        self.check(
            ok,
            format!(
                "{what}: got {got:.10} want {want:.10} (|diff| {:.2e}, tol {tol:.0e})",
                (got - want).abs()
            ),
        );
    }

    fn runtime(&mut self, elapsed: Duration, limit: Duration) {
        self.check(
            elapsed < limit,
            format!("runtime {elapsed:.2?} (limit {limit:.0?})"),
        );
    }
}

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

fn side(points: &[EquilibriumPoint], right: bool) -> Option<f64> {
    points
        .iter()
        .find(|p| match p.kind {
            EquilibriumKind::Right { .. } => right,
            EquilibriumKind::Left { .. } => !right,
            _ => false,
        })
        .map(|p| p.c)
}

fn pivot_detection() -> Verdict {
    let mut v = Verdict::new();
    let start = Instant::now();
    let issue = simulation_issue(poly(1.0));
    let pivots = find_pivots(&issue);
    let elapsed = start.elapsed();
    v.check(
        pivots.points.len() == 1 && pivots.intervals.is_empty(),
        format!(
            "{} point(s), {} interval(s)",
            pivots.points.len(),
            pivots.intervals.len()
        ),
    );
    if let Some(p) = pivots.points.first() {
        v.check(p.c == 0.6, format!("pivot at {}", p.c));
        v.within(
            "m'(0.6+)",
            p.right.map_or(f64::NAN, |s| s.margin),
            0.625,
            1e-9,
        );
    }
    v.runtime(elapsed, Duration::from_millis(1));
    v
}

fn equilibrium_triple() -> Verdict {
    let mut v = Verdict::new();
    let issue = simulation_issue(poly(1.0));
    let start = Instant::now();
    let eq = find_equilibria(&issue, 1_000_000).expect("solve");
    let elapsed = start.elapsed();
    v.check(eq.len() == 3, format!("{} equilibria", eq.len()));
    for p in &eq {
        v.check(
            p.residual <= 1e-10,
            format!(
                "{} at {:.6}: residual {:.1e}, stable {}",
                p.kind.name(),
                p.c,
                p.residual,
                p.stable
            ),
        );
    }
    let labels: Vec<(&str, bool)> = eq.iter().map(|p| (p.kind.name(), p.stable)).collect();
    v.check(
        labels == [("trivial", true), ("left", false), ("right", true)],
        format!("kinds and stability {labels:?}"),
    );
    v.runtime(elapsed, Duration::from_secs(1));
    v
}

fn centre_panel() -> Verdict {
    let mut v = Verdict::new();
    let a_published = [
        0.90810929, 0.93644931, 0.95076779, 0.95171826, 0.95206293, 0.95216058,
    ];
    let b_published = [
        0.98266767, 0.96161482, 0.95419222, 0.95247038, 0.95230315, 0.95223574,
    ];
    let issue = simulation_issue(poly(1.0));
    let start = Instant::now();
    for (i, n) in decades(3, 8).into_iter().enumerate() {
        let eq = find_equilibria(&issue, n).expect("solve");
        let plus = side(&eq, true).expect("right equilibrium");
        let minus = side(&eq, false).expect("left equilibrium");
        let a = normal_win_probability(&issue, n, plus).unwrap().value;
        let b = normal_win_probability(&issue, n, minus).unwrap().opponent;
        v.within(&format!("A at c+ (N=1e{})", i + 3), a, a_published[i], 5e-3);
        v.within(&format!("B at c- (N=1e{})", i + 3), b, b_published[i], 5e-3);
    }
    v.runtime(start.elapsed(), Duration::from_secs(10));
    v
}

fn limit_law() -> Verdict {
    let mut v = Verdict::new();
    let issue = simulation_issue(poly(1.0));
    let start = Instant::now();
    let eq = find_equilibria(&issue, 100_000_000).expect("solve");
    let plus = side(&eq, true).expect("right equilibrium");
    let wp = normal_win_probability(&issue, 100_000_000, plus)
        .unwrap()
        .value;
    v.within(
        "WP_A(c+, N=1e8) vs Phi(1/0.6)",
        wp,
        normal_cdf(1.0 / 0.6),
        2e-3,
    );
    v.within(
        "Phi(1/0.6) vs 0.95221",
        normal_cdf(1.0 / 0.6),
        0.95221,
        1e-5,
    );
    v.runtime(start.elapsed(), Duration::from_secs(1));
    v
}

fn right_panel() -> Verdict {
    let mut v = Verdict::new();
    let start = Instant::now();
    for (alpha, want) in [(0.5, 0.50003), (0.9, 0.73944), (1.0, 0.95212), (1.2, 1.0)] {
        let issue = simulation_issue(poly(alpha));
        let eq = find_equilibria(&issue, 100_000_000).expect("solve");
        match side(&eq, true) {
            Some(c) => {
                let wp = normal_win_probability(&issue, 100_000_000, c)
                    .unwrap()
                    .value;
                v.within(&format!("alpha {alpha}"), wp, want, 5e-3);
            }
            None => v.check(false, format!("alpha {alpha}: no right equilibrium")),
        }
    }
    v.runtime(start.elapsed(), Duration::from_secs(30));
    v
}

fn rate_law() -> Verdict {
    let mut v = Verdict::new();
    let grid = decades(4, 10);
    let ln_n: Vec<f64> = grid.iter().map(|&n| (n as f64).ln()).collect();
    let start = Instant::now();
    for alpha in [1.0, 0.8, 1.25] {
        let issue = simulation_issue(poly(alpha));
        let seq = trace_sequence(&issue, &grid, Selection::Right { pivot: 0.6 }).expect("trace");
        if seq.points.len() != grid.len() {
            v.check(
                false,
                format!("alpha {alpha}: sequence broke at {:?}", seq.break_index),
            );
            continue;
        }
        let slope = fit_log_slope(&ln_n, &seq.ln_gaps()).unwrap_or(f64::NAN);
        v.within(&format!("slope, alpha {alpha}"), slope, 0.5 / alpha, 0.03);
    }
    v.runtime(start.elapsed(), Duration::from_secs(5));
    v
}

fn jury_trichotomy() -> Verdict {
    let mut v = Verdict::new();
    let grid = decades(4, 10);
    for (alpha, want) in [
        (0.8, JuryClass::Jury),
        (1.0, JuryClass::WeakNonJury),
        (1.2, JuryClass::StrongNonJury),
    ] {
        let issue = simulation_issue(poly(alpha));
        let seq = trace_sequence(&issue, &grid, Selection::Right { pivot: 0.6 }).expect("trace");
        let verdict = jury_classify(&issue, &seq);
        v.check(
            verdict.class == want,
            format!(
                "alpha {alpha}: {:?} (slope {:.4}, rate {:?}), expected {want:?}",
                verdict.class,
                verdict.slope.unwrap_or(f64::NAN),
                verdict.rate_class
            ),
        );
        if want == JuryClass::WeakNonJury {
            v.within(
                "weak non-Jury limit",
                verdict.limit.unwrap_or(f64::NAN),
                0.9522,
                1e-3,
            );
        }
    }
    v
}

fn oracle_equivalence() -> Verdict {
    let mut v = Verdict::new();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let start = Instant::now();
    let (mut worst_exact, mut worst_mc) = (0.0f64, 0.0f64);
    let mut misses = Vec::new();
    for case in 0..50 {
        let issue = random_issue(&mut rng);
        let n: u64 = rng.random_range(1..=500);
        let c: f64 = rng.random_range(0.0..1.0);
        let (p_a, p_b) = (issue.s_a().eval(c).unwrap(), issue.s_b().eval(c).unwrap());
        let exact = exact_win_probability(&issue, n, c).unwrap();
        let (win, _) = enumerate(n, p_a, p_b);
        let err = (exact.value - win).abs();
        worst_exact = worst_exact.max(err);
        let mc = mc_win_probability(&issue, n, c, 1_000_000, 7_000 + case).unwrap();
        let half = mc.ci_halfwidth.unwrap();
        let z = (mc.value - exact.value).abs() / half;
        worst_mc = worst_mc.max(z);
        if err > 1e-10 || z > 3.0 {
            misses.push(format!(
                "case {case}: N={n} c={c:.4} exact err {err:.1e}, mc {z:.2} half-widths"
            ));
        }
    }
    v.check(
        worst_exact <= 1e-10,
        format!("worst |exact - enumeration| = {worst_exact:.2e} (tol 1e-10)"),
    );
    v.check(
        worst_mc <= 3.0,
        format!("worst |mc - exact| = {worst_mc:.2} Wilson half-widths (limit 3)"),
    );
    for m in misses {
        v.check(false, m);
    }
    v.runtime(start.elapsed(), Duration::from_secs(60));
    v
}

fn cov_equivalence() -> Verdict {
    let mut v = Verdict::new();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let issues = [
        simulation_issue(Ppm::Binomial),
        random_issue(&mut rng),
        random_issue(&mut rng),
    ];
    let mut worst = 0.0f64;
    let mut count = 0;
    for issue in &issues {
        for n in [1u64, 2, 3, 7, 10, 25, 42, 60] {
            for i in 1..=20 {
                let c = i as f64 / 20.0;
                let turnout = expected_turnout(issue, c, n as f64).unwrap();
                let Ok(m) = expected_margin(issue, c) else {
                    continue;
                };
                let cov = eval_cov(n, turnout.min(n as f64), m).unwrap();
                let tie = exact_win_probability(issue, n, c)
                    .unwrap()
                    .tie_probability
                    .unwrap();
                worst = worst.max((cov - tie).abs());
                count += 1;
            }
        }
    }
    v.check(
        worst <= 1e-10,
        format!("worst |cov - exact tie| = {worst:.2e} over {count} cases (tol 1e-10)"),
    );
    v
}

fn strong_triviality() -> Verdict {
    let mut v = Verdict::new();
    for ppm in [Ppm::Binomial, Ppm::Poisson, Ppm::Cov { population: 10_000 }] {
        let issue = simulation_issue(ppm.clone());
        let maxima: Vec<(f64, f64)> = [10_000u64, 1_000_000, 100_000_000]
            .iter()
            .map(|&n| {
                let eq = find_equilibria(&issue, n).expect("solve");
                let top = eq.iter().max_by(|a, b| a.ln_c.total_cmp(&b.ln_c)).unwrap();
                (top.c, top.ln_c)
            })
            .collect();
        let decreasing = maxima.windows(2).all(|w| w[1].1 < w[0].1);
        let (c_last, ln_last) = maxima[2];
        v.check(
            decreasing && c_last < 0.01 && ln_last < 0.01f64.ln(),
            format!(
                "{}: ln(max c) at 1e4, 1e6, 1e8 = {:.1}, {:.1}, {:.1}",
                ppm.label(),
                maxima[0].1,
                maxima[1].1,
                maxima[2].1
            ),
        );
    }
    v
}

fn stirling() -> Verdict {
    let mut v = Verdict::new();
    let scaled = eval_binomial(1e6, 0.0) * 1e3;
    let target = (2.0 / PI).sqrt();
    v.check(
        (scaled / target - 1.0).abs() <= 0.01,
        format!("p(1e6, 0) sqrt(1e6) = {scaled:.8}, sqrt(2/pi) = {target:.8}"),
    );
    v
}

fn determinism() -> Verdict {
    let mut v = Verdict::new();
    let exe = env!("CARGO_BIN_EXE_juryeq");
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for dir in &dirs {
        let status = Command::new(exe)
            .args(["scenario", "fig2-center", "--mc", "--seed", "42", "--out"])
            .arg(dir.path())
            .env(
                "JURYEQ_THREADS",
                if std::ptr::eq(dir, &dirs[0]) {
                    "1"
                } else {
                    "4"
                },
            )
            .output()
            .expect("run juryeq");
        v.check(
            status.status.success(),
            format!("exit status {}", status.status),
        );
    }
    let read =
        |d: &tempfile::TempDir| std::fs::read(d.path().join("fig2_center.csv")).unwrap_or_default();
    let (a, b) = (read(&dirs[0]), read(&dirs[1]));
    v.check(
        !a.is_empty() && a == b,
        format!("{} vs {} bytes, identical: {}", a.len(), b.len(), a == b),
    );

    // the library path must agree with itself too
    let overrides = ScenarioOverrides {
        mc: Some(McSettings {
            samples: 20_000,
            seed: 42,
        }),
        ..Default::default()
    };
    let x = run_scenario("fig2-center", &overrides).unwrap();
    let y = run_scenario("fig2-center", &overrides).unwrap();
    v.check(x == y, "repeated in-process runs identical".into());
    v
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 12] = [
        ("pivot detection", pivot_detection),
        ("equilibrium triple and stability", equilibrium_triple),
        (
            "win probabilities at the published centre-panel points",
            centre_panel,
        ),
        ("limit law at N = 1e8", limit_law),
        ("right-panel spot checks", right_panel),
        ("convergence rate law", rate_law),
        ("Jury trichotomy", jury_trichotomy),
        (
            "exact and Monte Carlo against enumeration",
            oracle_equivalence,
        ),
        ("CoV and multinomial tie equivalence", cov_equivalence),
        ("strongly vanishing models are trivial", strong_triviality),
        ("Stirling check", stirling),
        ("byte-identical scenario output", determinism),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let verdict = run();
        let status = if verdict.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {:>2} {status}: {name} [{:.2?}]",
            i + 1,
            start.elapsed()
        );
        for d in &verdict.details {
            println!("      {d}");
        }
        if !verdict.pass {
            failed.push(i + 1);
        }
    }
    println!(
        "\nacceptance: {} of {} criteria passed{}",
        criteria.len() - failed.len(),
        criteria.len(),
        if failed.is_empty() {
            String::new()
        } else {
            format!("; failing: {failed:?}")
        }
    );
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
