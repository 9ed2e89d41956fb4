//! Winning probabilities `Pr(V_A > V_B)` at a threshold profile, and the
//! limiting verdict along an equilibrium sequence.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::Serialize;

use crate::equilibrium::{classify_rate, EquilibriumSequence, Selection};
use crate::error::{Error, Result};
use crate::ppm::{Ppm, RateClass};
use crate::special::normal_cdf;
use crate::support::Issue;

/// Largest population accepted by the exact method.
pub const EXACT_CAP: u64 = 5_000;

/// Fewest Monte Carlo samples accepted.
pub const MIN_SAMPLES: u64 = 10_000;

/// Number of independent random streams a Monte Carlo run is split into.
pub const MC_SHARDS: u64 = 64;

/// Two-sided 95% standard normal quantile.
pub const Z_95: f64 = 1.959_963_984_540_054;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Exact,
    Normal,
    MonteCarlo,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::Normal => "normal",
            Method::MonteCarlo => "mc",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MonteCarloRun {
    pub samples: u64,
    pub seed: u64,
    pub shards: u64,
    pub wins_a: u64,
    pub wins_b: u64,
    pub ties: u64,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WinProbability {
    /// `Pr(V_A > V_B)`
    pub value: f64,
    /// `Pr(V_B > V_A)`
    pub opponent: f64,
    /// `Pr(V_A = V_B)`; the normal method does not estimate it.
    pub tie_probability: Option<f64>,
    pub method: Method,
    /// Wilson 95% half-width, Monte Carlo only.
    pub ci_halfwidth: Option<f64>,
    pub mc: Option<MonteCarloRun>,
    pub note: Option<String>,
}

fn check_cost(c: f64) -> Result<()> {
    if (0.0..=1.0).contains(&c) {
        Ok(())
    } else {
        Err(Error::CostOutOfRange(c))
    }
}

/// Exact distribution of the vote difference, one voter at a time.
///
/// Every entry is a convex combination of non-negative numbers, so plain
/// double arithmetic loses at most `N` ulps of relative accuracy.
pub fn exact_win_probability(issue: &Issue, population: u64, c: f64) -> Result<WinProbability> {
    check_cost(c)?;
    let (p_a, p_b) = issue.shares(c);
    exact_from_shares(population, p_a, p_b)
}

pub(crate) fn exact_from_shares(population: u64, p_a: f64, p_b: f64) -> Result<WinProbability> {
    if population > EXACT_CAP {
        return Err(Error::PopulationTooLarge {
            population,
            cap: EXACT_CAP,
        });
    }
    let n = population as usize;
    let rest = (1.0 - p_a - p_b).max(0.0);
    // index d + n holds Pr(V_A - V_B = d)
    let mut cur = vec![0.0f64; 2 * n + 1];
    let mut next = vec![0.0f64; 2 * n + 1];
    cur[n] = 1.0;
    for k in 0..n {
        let (lo, hi) = (n - k, n + k);
        next[lo - 1..=hi + 1].fill(0.0);
        for d in lo..=hi {
            let v = cur[d];
            next[d + 1] += v * p_a;
            next[d - 1] += v * p_b;
            next[d] += v * rest;
        }
        std::mem::swap(&mut cur, &mut next);
    }
    let value: f64 = cur[n + 1..].iter().sum();
    let opponent: f64 = cur[..n].iter().sum();
    Ok(WinProbability {
        value,
        opponent,
        tie_probability: Some(cur[n]),
        method: Method::Exact,
        ci_halfwidth: None,
        mc: None,
        note: None,
    })
}

/// Gaussian approximation `Phi(mu / sigma)` of the vote difference.
pub fn normal_win_probability(issue: &Issue, population: u64, c: f64) -> Result<WinProbability> {
    check_cost(c)?;
    let (p_a, p_b) = issue.shares(c);
    let big_n = population as f64;
    let diff = p_a - p_b;
    let var = big_n * (p_a + p_b - diff * diff);
    if !(var > 0.0) {
        return Err(Error::NoActiveVoters(c));
    }
    let z = big_n * diff / var.sqrt();
    let turnout = (p_a + p_b) * big_n;
    Ok(WinProbability {
        value: normal_cdf(z),
        opponent: normal_cdf(-z),
        tie_probability: None,
        method: Method::Normal,
        ci_halfwidth: None,
        mc: None,
        note: (turnout < 100.0)
            .then(|| format!("expected turnout {turnout:.1} is below 100; approximation is rough")),
    })
}

/// Wilson score interval `(low, high)` for `hits` out of `n` at level `z`.
pub fn wilson_interval(hits: u64, n: u64, z: f64) -> (f64, f64) {
    let nf = n as f64;
    let p = hits as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = z / denom * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt();
    (center - half, center + half)
}

/// Simulated elections: `V_A ~ Bin(N, p_A)`, then `V_B ~ Bin(N - V_A, p_B / (1 - p_A))`.
///
/// Samples are split over [`MC_SHARDS`] shards; shard `i` draws from the
/// ChaCha8 stream `i` keyed by `seed`, so results do not depend on threads.
pub fn mc_win_probability(
    issue: &Issue,
    population: u64,
    c: f64,
    samples: u64,
    seed: u64,
) -> Result<WinProbability> {
    check_cost(c)?;
    if samples < MIN_SAMPLES {
        return Err(Error::TooFewSamples {
            got: samples,
            min: MIN_SAMPLES,
        });
    }
    let (p_a, p_b) = issue.shares(c);
    let cond_b = if p_a < 1.0 {
        (p_b / (1.0 - p_a)).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let draw_a = Binomial::new(population, p_a.clamp(0.0, 1.0))
        .map_err(|e| Error::Config(format!("binomial draw: {e}")))?;
    let counts: Vec<(u64, u64, u64)> = (0..MC_SHARDS)
        .into_par_iter()
        .map(|shard| {
            let quota = samples / MC_SHARDS + u64::from(shard < samples % MC_SHARDS);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(shard);
            let (mut a, mut b, mut t) = (0u64, 0u64, 0u64);
            for _ in 0..quota {
                let va = draw_a.sample(&mut rng);
                let vb = Binomial::new(population - va, cond_b)
                    .expect("conditional probability lies in [0, 1]")
                    .sample(&mut rng);
                match va.cmp(&vb) {
                    std::cmp::Ordering::Greater => a += 1,
                    std::cmp::Ordering::Less => b += 1,
                    std::cmp::Ordering::Equal => t += 1,
                }
            }
            (a, b, t)
        })
        .collect();
    let (wins_a, wins_b, ties) = counts
        .iter()
        .fold((0, 0, 0), |acc, x| (acc.0 + x.0, acc.1 + x.1, acc.2 + x.2));
    let n = samples as f64;
    let (ci_low, ci_high) = wilson_interval(wins_a, samples, Z_95);
    Ok(WinProbability {
        value: wins_a as f64 / n,
        opponent: wins_b as f64 / n,
        tie_probability: Some(ties as f64 / n),
        method: Method::MonteCarlo,
        ci_halfwidth: Some(0.5 * (ci_high - ci_low)),
        mc: Some(MonteCarloRun {
            samples,
            seed,
            shards: MC_SHARDS,
            wins_a,
            wins_b,
            ties,
            ci_low,
            ci_high,
        }),
        note: None,
    })
}

/// `Phi((c*)^(-1/alpha))`, the limiting win probability under a polynomial
/// model with `alpha = 2 beta`; it depends on neither `beta` nor the supports.
pub fn polynomial_limit_wp(c_star: f64, alpha: f64) -> Result<f64> {
    if !(c_star > 0.0 && c_star < 1.0) {
        return Err(Error::Config(format!(
            "pivot must lie in (0, 1), got {c_star}"
        )));
    }
    if !(alpha > 0.0) {
        return Err(Error::Config(format!(
            "alpha must be positive, got {alpha}"
        )));
    }
    Ok(normal_cdf(c_star.powf(-1.0 / alpha)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum JuryClass {
    Jury,
    WeakNonJury,
    StrongNonJury,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JuryVerdict {
    pub class: JuryClass,
    /// Limiting win probability of the locally leading candidate.
    pub limit: Option<f64>,
    pub rate_class: Option<RateClass>,
    pub c_star: f64,
    pub slope: Option<f64>,
    /// `Phi(sqrt(s*) r m*)` from the fitted rate constant, when moderate.
    pub fitted_limit: Option<f64>,
    /// Predictions of the neighbouring hypotheses when the rate is inconclusive.
    pub alternatives: Vec<(RateClass, f64)>,
    pub note: String,
}

/// Limiting win probability of the leading candidate along `seq`.
pub fn jury_classify(issue: &Issue, seq: &EquilibriumSequence) -> JuryVerdict {
    let rate = classify_rate(seq);
    let c_star = seq.limit;
    let right = !matches!(seq.selection, Selection::Left { .. });
    let fitted_limit = rate.constant.and_then(|r| {
        let (a, b) = issue.shares(c_star);
        let slopes = issue.pivots().side_slopes(c_star, right)?;
        Some(normal_cdf((a + b).sqrt() * r * slopes.margin))
    });
    let closed_form = match issue.ppm() {
        Ppm::Polynomial { alpha, .. } => polynomial_limit_wp(c_star, *alpha).ok(),
        _ => None,
    };
    let moderate_limit = closed_form.or(fitted_limit);
    let (class, limit) = match rate.class {
        Some(RateClass::Slow) => (JuryClass::Jury, Some(1.0)),
        Some(RateClass::Fast) => (JuryClass::StrongNonJury, Some(0.5)),
        Some(RateClass::Moderate) => (JuryClass::WeakNonJury, moderate_limit),
        None => (JuryClass::Inconclusive, None),
    };
    let alternatives = if rate.class.is_none() {
        let mut alt = Vec::new();
        match rate.slope {
            Some(s) if s < 0.5 => alt.push((RateClass::Slow, 1.0)),
            Some(_) => alt.push((RateClass::Fast, 0.5)),
            None => {
                alt.push((RateClass::Slow, 1.0));
                alt.push((RateClass::Fast, 0.5));
            }
        }
        if let Some(l) = moderate_limit {
            alt.push((RateClass::Moderate, l));
        }
        alt
    } else {
        Vec::new()
    };
    JuryVerdict {
        class,
        limit,
        rate_class: rate.class,
        c_star,
        slope: rate.slope,
        fitted_limit,
        alternatives,
        note: rate.note,
    }
}

impl JuryVerdict {
    /// Compact JSON object: class, limit, rate class and pivot, plus evidence.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("verdict serializes")
    }
}
