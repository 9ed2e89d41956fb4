//! Perceived-pivotality models `p(n, m)`.
//!
//! Every family is evaluated in log space first (`ln_eval`) so the solver can
//! work with thresholds far below the smallest positive double.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{
    exp_floor, ln_binomial_pmf, ln_factorial, ln_gamma, log_sum_exp, stirling_remainder,
};

/// Largest population for which the CoV expectation is summed exactly.
pub const COV_EXACT_CAP: u64 = 10_000;

/// Growth function used for network sizes and altruism multipliers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Growth {
    Constant {
        k: u64,
    },
    /// `a * n^gamma`
    Power {
        a: f64,
        gamma: f64,
    },
    /// `exp(rate * n)`
    Exponential {
        #[serde(alias = "rho")]
        rate: f64,
    },
}

impl Growth {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidPpm(msg));
        match *self {
            Growth::Constant { k } if k < 1 => bad(format!("constant growth needs k >= 1, got {k}")),
            Growth::Power { a, gamma } if !(a.is_finite() && a >= 1.0) => {
                bad(format!("power growth needs a >= 1 so that f(n) >= 1 for n >= 1, got a = {a} (gamma = {gamma})"))
            }
            Growth::Power { gamma, .. } if !(gamma.is_finite() && gamma >= 0.0) => {
                bad(format!("power growth needs gamma >= 0, got {gamma}"))
            }
            Growth::Exponential { rate } if !(rate.is_finite() && rate > 0.0) => {
                bad(format!("exponential growth needs rate > 0, got {rate}"))
            }
            _ => Ok(()),
        }
    }

    pub fn ln_value(&self, n: f64) -> f64 {
        match *self {
            Growth::Constant { k } => (k as f64).ln(),
            Growth::Power { a, gamma } => {
                if gamma == 0.0 {
                    a.ln()
                } else {
                    a.ln() + gamma * n.ln()
                }
            }
            Growth::Exponential { rate } => rate * n,
        }
    }

    pub fn value(&self, n: f64) -> f64 {
        self.ln_value(n).exp()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Ppm {
    Binomial,
    Poisson,
    /// Binomial pivotality averaged over the realised turnout in a population of `N`.
    Cov {
        #[serde(rename = "N")]
        population: u64,
    },
    Network {
        kappa: Growth,
    },
    Altruist {
        q: f64,
        f: Growth,
    },
    /// `min{q, m^-alpha n^-beta}`
    Polynomial {
        q: f64,
        alpha: f64,
        beta: f64,
    },
}

fn check_cap(q: f64) -> Result<()> {
    if q > 0.0 && q <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidPpm(format!(
            "cap q must lie in (0, 1], got {q}"
        )))
    }
}

impl Ppm {
    pub fn validate(&self) -> Result<()> {
        match self {
            Ppm::Binomial | Ppm::Poisson => Ok(()),
            Ppm::Cov { population } => {
                if *population == 0 {
                    Err(Error::InvalidPpm("CoV population must be positive".into()))
                } else {
                    Ok(())
                }
            }
            Ppm::Network { kappa } => kappa.validate(),
            Ppm::Altruist { q, f } => {
                check_cap(*q)?;
                f.validate()
            }
            Ppm::Polynomial { q, alpha, beta } => {
                check_cap(*q)?;
                for (name, v) in [("alpha", alpha), ("beta", beta)] {
                    if !(v.is_finite() && *v > 0.0) {
                        return Err(Error::InvalidPpm(format!(
                            "{name} must be positive, got {v}"
                        )));
                    }
                }
                Ok(())
            }
        }
    }

    /// Short label used in tables.
    pub fn label(&self) -> String {
        match self {
            Ppm::Binomial => "binomial".into(),
            Ppm::Poisson => "poisson".into(),
            Ppm::Cov { population } => format!("cov(N={population})"),
            Ppm::Network { kappa } => format!("network({})", growth_label(kappa)),
            Ppm::Altruist { q, f } => format!("altruist(q={q}, f={})", growth_label(f)),
            Ppm::Polynomial { q, alpha, beta } => {
                format!("polynomial(q={q}, alpha={alpha}, beta={beta})")
            }
        }
    }

    /// Upper bound on `p` imposed by the family, if it has an explicit cap.
    pub fn cap(&self) -> Option<f64> {
        match self {
            Ppm::Altruist { q, .. } | Ppm::Polynomial { q, .. } => Some(*q),
            _ => None,
        }
    }

    /// `ln p(n, m)`; `population` overrides the CoV population when given.
    pub fn ln_eval_in(&self, n: f64, m: f64, population: Option<u64>) -> f64 {
        let n = n.max(0.0);
        let m = m.clamp(0.0, 1.0);
        let ln_p = match self {
            Ppm::Binomial => ln_binomial_tie(n, m),
            Ppm::Poisson => ln_poisson_tie(n, m),
            Ppm::Cov { population: own } => {
                let pop = population.unwrap_or(*own);
                // turnout slightly above the population is rounding noise
                ln_cov_tie(pop, n.min(pop as f64), m)
            }
            Ppm::Network { kappa } => ln_network(kappa, n, m),
            Ppm::Altruist { q, f } => ln_altruist(*q, f, n, m),
            Ppm::Polynomial { q, alpha, beta } => ln_polynomial(*q, *alpha, *beta, n, m),
        };
        ln_p.min(0.0)
    }

    pub fn ln_eval(&self, n: f64, m: f64) -> f64 {
        self.ln_eval_in(n, m, None)
    }

    pub fn eval_in(&self, n: f64, m: f64, population: Option<u64>) -> f64 {
        let ln_p = self.ln_eval_in(n, m, population);
        match self.cap() {
            // return the cap bit-for-bit rather than exp(ln q)
            Some(q) if ln_p >= q.ln() => q,
            _ => exp_floor(ln_p).clamp(0.0, 1.0),
        }
    }

    /// `p(n, m)` clamped to `[0, 1]`.
    pub fn eval(&self, n: f64, m: f64) -> f64 {
        self.eval_in(n, m, None)
    }
}

fn growth_label(g: &Growth) -> String {
    match g {
        Growth::Constant { k } => format!("const {k}"),
        Growth::Power { a, gamma } => format!("{a}*n^{gamma}"),
        Growth::Exponential { rate } => format!("exp({rate}n)"),
    }
}

/// Log of the binomial tie probability with real-valued `n`.
///
/// The tie index is `n / 2` for every `n`: at even `n` this is the usual pmf
/// at `n/2`, and the extension is smooth and decreasing in both arguments.
pub(crate) fn ln_binomial_tie(n: f64, m: f64) -> f64 {
    if n <= 0.0 {
        return 0.0;
    }
    if m >= 1.0 {
        return f64::NEG_INFINITY;
    }
    let log_one_minus_m2 = (-m * m).ln_1p();
    if n >= 20.0 {
        0.5 * (2.0 / (PI * n)).ln() + 0.5 * n * log_one_minus_m2 + stirling_remainder(n)
            - 2.0 * stirling_remainder(0.5 * n)
    } else {
        let k = 0.5 * n;
        ln_gamma(n + 1.0) - 2.0 * ln_gamma(k + 1.0) + k * (log_one_minus_m2 - 4.0f64.ln())
    }
}

/// `ln I0(x)` for `x >= 0`.
fn ln_bessel_i0(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    if x > 100.0 {
        // asymptotic series; terms shrink until k ~ 4x
        let mut term = 1.0f64;
        let mut sum = 1.0f64;
        for k in 1..200 {
            let kf = k as f64;
            term *= (2.0 * kf - 1.0).powi(2) / (kf * 8.0 * x);
            sum += term;
            if term < 1e-18 * sum {
                break;
            }
        }
        return x - 0.5 * (2.0 * PI * x).ln() + sum.ln();
    }
    // power series sum_k (x/2)^(2k) / (k!)^2, summed outward from its peak
    let ln_half = (0.5 * x).ln();
    let ln_term = |k: u64| 2.0 * k as f64 * ln_half - 2.0 * ln_factorial(k);
    let peak = (0.5 * x).floor() as u64;
    let top = ln_term(peak);
    let mut terms = vec![top];
    let mut k = peak;
    while k > 0 {
        k -= 1;
        let t = ln_term(k);
        terms.push(t);
        if t - top < (1e-18f64).ln() {
            break;
        }
    }
    let mut k = peak;
    loop {
        k += 1;
        let t = ln_term(k);
        terms.push(t);
        if t - top < (1e-18f64).ln() {
            break;
        }
    }
    log_sum_exp(&terms)
}

/// Tie probability of two independent Poisson counts with means `(1 ± m) n / 2`.
pub(crate) fn ln_poisson_tie(n: f64, m: f64) -> f64 {
    if n <= 0.0 {
        return 0.0;
    }
    -n + ln_bessel_i0(n * (1.0 - m * m).max(0.0).sqrt())
}

/// `ln Pr(Bin(k, (1+m)/2) = k/2)`, exactly zero probability at odd `k`.
fn ln_exact_tie(k: u64, m: f64) -> f64 {
    if k % 2 == 1 {
        return f64::NEG_INFINITY;
    }
    if k == 0 {
        return 0.0;
    }
    if m >= 1.0 {
        return f64::NEG_INFINITY;
    }
    let half = k / 2;
    ln_factorial(k) - 2.0 * ln_factorial(half) + half as f64 * ((-m * m).ln_1p() - 4.0f64.ln())
}

/// Expected exact tie probability when the realised turnout is `Bin(N, n/N)`.
///
/// Only turnouts within `12 sd + 30` of the mean are summed; the Chernoff
/// bound puts the discarded mass below `1e-30`.
pub(crate) fn ln_cov_tie(population: u64, n: f64, m: f64) -> f64 {
    if population > COV_EXACT_CAP {
        return ln_binomial_tie(n, m);
    }
    let big_n = population as f64;
    let rate = (n / big_n).clamp(0.0, 1.0);
    let sd = (big_n * rate * (1.0 - rate)).sqrt();
    let lo = (n - 12.0 * sd - 30.0).floor().max(0.0) as u64;
    let hi = ((n + 12.0 * sd + 30.0).ceil().min(big_n)) as u64;
    let terms: Vec<f64> = (lo..=hi)
        .map(|k| ln_binomial_pmf(population, k, rate) + ln_exact_tie(k, m))
        .filter(|t| t.is_finite())
        .collect();
    if terms.is_empty() {
        return f64::NEG_INFINITY;
    }
    log_sum_exp(&terms)
}

fn ln_network(kappa: &Growth, n: f64, m: f64) -> f64 {
    let size = kappa.value(n);
    if !size.is_finite() {
        return f64::NEG_INFINITY;
    }
    ln_binomial_tie(size, m)
}

fn ln_altruist(q: f64, f: &Growth, n: f64, m: f64) -> f64 {
    let ln_f = f.ln_value(n);
    let ln_bin = ln_binomial_tie(n, m);
    let prod = if ln_bin == f64::NEG_INFINITY || ln_f == f64::NEG_INFINITY {
        f64::NEG_INFINITY
    } else {
        ln_bin + ln_f
    };
    prod.min(q.ln())
}

fn ln_polynomial(q: f64, alpha: f64, beta: f64, n: f64, m: f64) -> f64 {
    if m == 0.0 || n == 0.0 {
        return q.ln();
    }
    (-alpha * m.ln() - beta * n.ln()).min(q.ln())
}

/// Binomial tie probability `p(n, m)` for real `n >= 0`.
pub fn eval_binomial(n: f64, m: f64) -> f64 {
    exp_floor(ln_binomial_tie(n.max(0.0), m.clamp(0.0, 1.0)))
}

/// Probability that two Poisson counts with means `(1 ± m) n / 2` are equal.
pub fn eval_poisson(n: f64, m: f64) -> f64 {
    exp_floor(ln_poisson_tie(n.max(0.0), m.clamp(0.0, 1.0))).min(1.0)
}

/// Tie probability averaged over a `Bin(N, n/N)` realised turnout.
pub fn eval_cov(population: u64, n: f64, m: f64) -> Result<f64> {
    if n > population as f64 {
        return Err(Error::TurnoutExceedsPopulation {
            turnout: n,
            population,
        });
    }
    Ok(exp_floor(ln_cov_tie(population, n.max(0.0), m.clamp(0.0, 1.0))).min(1.0))
}

pub fn eval_network(kappa: &Growth, n: f64, m: f64) -> f64 {
    exp_floor(ln_network(kappa, n.max(0.0), m.clamp(0.0, 1.0)))
}

pub fn eval_altruist(q: f64, f: &Growth, n: f64, m: f64) -> f64 {
    exp_floor(ln_altruist(q, f, n.max(0.0), m.clamp(0.0, 1.0)))
}

pub fn eval_polynomial(q: f64, alpha: f64, beta: f64, n: f64, m: f64) -> f64 {
    exp_floor(ln_polynomial(q, alpha, beta, n.max(0.0), m.clamp(0.0, 1.0)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Vanishing {
    Strong,
    Weak,
    None,
}

/// How fast `sqrt(N) |c_N - c*|` behaves: to infinity, to a constant, to zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateClass {
    Slow,
    Moderate,
    Fast,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PivotalityClass {
    pub vanishing: Vanishing,
    /// Lower bound `q` on `p(n, 0)`, present unless pivotality vanishes strongly.
    pub tie_sensitivity: Option<f64>,
    pub rate: Option<RateClass>,
}

impl PivotalityClass {
    fn strong() -> Self {
        PivotalityClass {
            vanishing: Vanishing::Strong,
            tie_sensitivity: None,
            rate: None,
        }
    }
}

/// Analytic classification of a model family.
pub fn classify_ppm(ppm: &Ppm) -> PivotalityClass {
    let non_vanishing = |q: f64| PivotalityClass {
        vanishing: Vanishing::None,
        tie_sensitivity: Some(q),
        rate: None,
    };
    let weak = |q: f64, rate| PivotalityClass {
        vanishing: Vanishing::Weak,
        tie_sensitivity: Some(q),
        rate: Some(rate),
    };
    match ppm {
        Ppm::Binomial | Ppm::Poisson | Ppm::Cov { .. } => PivotalityClass::strong(),
        Ppm::Network { kappa } => match *kappa {
            Growth::Constant { k } => non_vanishing(eval_binomial(k as f64, 0.0)),
            Growth::Power { a, gamma } if gamma == 0.0 => non_vanishing(eval_binomial(a, 0.0)),
            _ => PivotalityClass::strong(),
        },
        Ppm::Altruist { q, f } => match *f {
            Growth::Exponential { .. } => non_vanishing(*q),
            Growth::Power { gamma, .. } if gamma > 0.5 => weak(*q, RateClass::Slow),
            Growth::Power { a, gamma } if gamma == 0.5 => {
                weak(q.min(a * (2.0 / PI).sqrt()), RateClass::Moderate)
            }
            _ => PivotalityClass::strong(),
        },
        Ppm::Polynomial { q, alpha, beta } => {
            // |c_N - c*| shrinks like N^(-beta/alpha)
            let ratio = beta / alpha;
            let rate = if (ratio - 0.5).abs() <= 1e-12 {
                RateClass::Moderate
            } else if ratio > 0.5 {
                RateClass::Fast
            } else {
                RateClass::Slow
            };
            weak(*q, rate)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TieProbe {
    pub grid: Vec<f64>,
    pub at_tie: Vec<f64>,
    pub near_tie: Vec<f64>,
    pub inf_at_tie: f64,
    /// Whether `p(n, 0.01)` dropped below `1e-6` somewhere on the grid.
    pub near_tie_vanishes: bool,
}

/// Numeric evidence for the analytic class: `p(n, 0)` and `p(n, 0.01)` on
/// `n = 1e2, 1e3, ..., 1e12`. CoV is probed at full turnout.
pub fn probe_tie_sensitivity(ppm: &Ppm) -> TieProbe {
    let grid: Vec<f64> = (2..=12).map(|e| 10f64.powi(e)).collect();
    let eval = |n: f64, m: f64| ppm.eval_in(n, m, Some(n as u64));
    let at_tie: Vec<f64> = grid.iter().map(|&n| eval(n, 0.0)).collect();
    let near_tie: Vec<f64> = grid.iter().map(|&n| eval(n, 0.01)).collect();
    TieProbe {
        inf_at_tie: at_tie.iter().copied().fold(f64::INFINITY, f64::min),
        near_tie_vanishes: near_tie.iter().any(|&p| p < 1e-6),
        grid,
        at_tie,
        near_tie,
    }
}
