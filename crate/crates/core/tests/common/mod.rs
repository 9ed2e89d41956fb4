#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use juryeq::{Issue, Ppm, SupportFunction};

/// Non-decreasing piecewise-linear support from `s(0) = y0` up to `s(1) = total`.
pub fn random_support(rng: &mut ChaCha8Rng, total: f64) -> SupportFunction {
    let k = rng.random_range(1..4);
    let mut xs: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..0.95)).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let mut ys: Vec<f64> = (0..xs.len() + 1)
        .map(|_| rng.random_range(0.0..total))
        .collect();
    ys.sort_by(f64::total_cmp);
    let mut bp = vec![(0.0, ys[0])];
    bp.extend(xs.iter().zip(&ys[1..]).map(|(&x, &y)| (x, y)));
    bp.push((1.0, total));
    SupportFunction::from_breakpoints(bp).unwrap()
}

pub fn random_issue_with(rng: &mut ChaCha8Rng, ppm: Ppm) -> Issue {
    let total_a: f64 = rng.random_range(0.15..0.85);
    let s_a = random_support(rng, total_a);
    let s_b = random_support(rng, 1.0 - total_a);
    Issue::new(s_a, s_b, ppm).unwrap()
}

pub fn random_issue(rng: &mut ChaCha8Rng) -> Issue {
    random_issue_with(rng, Ppm::Binomial)
}

/// `(Pr(V_A > V_B), Pr(V_A = V_B))` by summing every multinomial outcome.
pub fn enumerate(n: u64, p_a: f64, p_b: f64) -> (f64, f64) {
    let rest = (1.0 - p_a - p_b).max(0.0);
    let mut ln_fact = vec![0.0f64; n as usize + 1];
    for k in 1..=n as usize {
        ln_fact[k] = ln_fact[k - 1] + (k as f64).ln();
    }
    let term = |k: u64, p: f64| if k == 0 { 0.0 } else { k as f64 * p.ln() };
    let (mut win, mut tie) = (0.0, 0.0);
    for a in 0..=n {
        for b in 0..=(n - a).min(a) {
            let r = n - a - b;
            let lp = ln_fact[n as usize]
                - ln_fact[a as usize]
                - ln_fact[b as usize]
                - ln_fact[r as usize]
                + term(a, p_a)
                + term(b, p_b)
                + term(r, rest);
            if a > b {
                win += lp.exp();
            } else {
                tie += lp.exp();
            }
        }
    }
    (win, tie)
}
