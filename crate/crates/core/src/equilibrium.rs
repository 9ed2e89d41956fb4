//! Fixed points `c = p(n(c, N), m(c))`, their labels, stability and
//! behaviour along a growing population.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ppm::{classify_ppm, RateClass};
use crate::special::exp_floor;
use crate::support::{margin_of, Issue, PivotSet};

/// Probe offsets used by [`check_stability`].
pub const STABILITY_DELTAS: [f64; 3] = [1e-3, 1e-4, 1e-5];

/// Width of the band around slope 1/2 treated as moderate convergence.
pub const RATE_BAND: f64 = 0.03;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    pub scan_cells: usize,
    /// How many times clustered brackets may be rescanned at twice the resolution.
    pub max_doublings: u32,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            scan_cells: 100_000,
            max_doublings: 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EquilibriumKind {
    Trivial,
    Left { pivot: f64 },
    Right { pivot: f64 },
    AtCap { q: f64, lo: f64, hi: f64 },
    Unclassified { reason: String },
}

impl EquilibriumKind {
    pub fn name(&self) -> &'static str {
        match self {
            EquilibriumKind::Trivial => "trivial",
            EquilibriumKind::Left { .. } => "left",
            EquilibriumKind::Right { .. } => "right",
            EquilibriumKind::AtCap { .. } => "at_cap",
            EquilibriumKind::Unclassified { .. } => "unclassified",
        }
    }

    /// Pivot location the point is attached to, if any.
    pub fn pivot(&self) -> Option<f64> {
        match *self {
            EquilibriumKind::Left { pivot } | EquilibriumKind::Right { pivot } => Some(pivot),
            EquilibriumKind::AtCap { q, .. } => Some(q),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquilibriumPoint {
    pub c: f64,
    /// `ln c`, kept separately because trivial thresholds underflow `f64`.
    pub ln_c: f64,
    pub kind: EquilibriumKind,
    pub stable: bool,
    /// `|p(n(c, N), m(c)) - c|`
    pub residual: f64,
}

/// The map `c -> p(n(c, N), m(c))`, with an empty electorate treated as a tie.
struct Response<'a> {
    issue: &'a Issue,
    population: u64,
}

impl Response<'_> {
    fn ln_p(&self, c: f64) -> f64 {
        let (a, b) = self.issue.shares(c);
        let m = margin_of(a, b).unwrap_or(0.0);
        let n = (a + b) * self.population as f64;
        self.issue.ppm().ln_eval_in(n, m, Some(self.population))
    }

    fn p(&self, c: f64) -> f64 {
        let (a, b) = self.issue.shares(c);
        let m = margin_of(a, b).unwrap_or(0.0);
        let n = (a + b) * self.population as f64;
        self.issue.ppm().eval_in(n, m, Some(self.population))
    }

    /// Sign of `p(c) - c`, decided in log space so it survives underflow.
    fn sign(&self, c: f64) -> Ordering {
        let ln_c = if c > 0.0 { c.ln() } else { f64::NEG_INFINITY };
        self.sign_ln(self.ln_p(c), ln_c)
    }

    fn sign_at_ln(&self, u: f64) -> Ordering {
        self.sign_ln(self.ln_p(u.exp()), u)
    }

    fn sign_ln(&self, ln_p: f64, ln_c: f64) -> Ordering {
        ln_p.partial_cmp(&ln_c).unwrap_or(Ordering::Equal)
    }

    fn residual(&self, c: f64) -> f64 {
        (self.p(c) - c).abs()
    }
}

/// One best-response step from the threshold profile at `c`.
pub fn best_response(issue: &Issue, population: u64, c: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&c) {
        return Err(Error::CostOutOfRange(c));
    }
    let (a, b) = issue.shares(c);
    let m = margin_of(a, b).ok_or(Error::NoActiveVoters(c))?;
    let n = (a + b) * population as f64;
    Ok(issue.ppm().eval_in(n, m, Some(population)).clamp(0.0, 1.0))
}

pub fn find_equilibria(issue: &Issue, population: u64) -> Result<Vec<EquilibriumPoint>> {
    find_equilibria_with(issue, population, &SolverConfig::default())
}

pub fn find_equilibria_with(
    issue: &Issue,
    population: u64,
    config: &SolverConfig,
) -> Result<Vec<EquilibriumPoint>> {
    if population == 0 {
        return Err(Error::Config("population must be at least 1".into()));
    }
    if config.scan_cells < 2 {
        return Err(Error::Config("scan needs at least two cells".into()));
    }
    let g = Response { issue, population };
    let roots = locate_roots(&g, issue, config);
    if roots.is_empty() {
        return Err(Error::NonConvergence(format!(
            "no fixed point found at N = {population}"
        )));
    }
    let pivots = issue.pivots();
    let cs: Vec<f64> = roots.iter().map(|r| r.0).collect();
    let mut points: Vec<EquilibriumPoint> = roots
        .iter()
        .map(|&(c, ln_c)| EquilibriumPoint {
            c,
            ln_c,
            kind: classify_point(issue, population, c, pivots),
            stable: false,
            residual: g.residual(c),
        })
        .collect();
    for (i, point) in points.iter_mut().enumerate() {
        let others: Vec<f64> = cs
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, &c)| c)
            .collect();
        point.stable = stability_probes(&g, point.c, &others, pivots).stable;
    }
    Ok(points)
}

/// Scan nodes: a uniform grid plus every location where `g` may kink.
fn scan_nodes(issue: &Issue, cells: usize) -> Vec<f64> {
    let mut nodes: Vec<f64> = (0..=cells).map(|i| i as f64 / cells as f64).collect();
    nodes.extend(issue.breakpoint_costs());
    nodes.extend(issue.pivots().locations());
    if let Some(q) = classify_ppm(issue.ppm()).tie_sensitivity {
        if q < 1.0 {
            nodes.push(q);
        }
    }
    nodes.retain(|c| (0.0..=1.0).contains(c));
    nodes.sort_by(f64::total_cmp);
    nodes.dedup();
    nodes
}

/// Index pairs `(i, i + 1)` where the sign flips between adjacent nodes.
fn brackets(signs: &[Ordering]) -> Vec<usize> {
    (0..signs.len().saturating_sub(1))
        .filter(|&i| {
            let (a, b) = (signs[i], signs[i + 1]);
            a != Ordering::Equal && b != Ordering::Equal && a != b
        })
        .collect()
}

fn locate_roots(g: &Response, issue: &Issue, config: &SolverConfig) -> Vec<(f64, f64)> {
    let mut nodes = scan_nodes(issue, config.scan_cells);
    let mut signs: Vec<Ordering> = nodes.par_iter().map(|&c| g.sign(c)).collect();

    // roots in neighbouring cells hint at more roots hiding in between
    for _ in 0..config.max_doublings {
        let br = brackets(&signs);
        let mut refine = vec![false; nodes.len().saturating_sub(1)];
        let mut any = false;
        for w in br.windows(2) {
            if w[1] <= w[0] + 2 {
                let lo = w[0].saturating_sub(1);
                let hi = (w[1] + 2).min(refine.len());
                for flag in &mut refine[lo..hi] {
                    *flag = true;
                }
                any = true;
            }
        }
        if !any {
            break;
        }
        let mids: Vec<(usize, f64)> = refine
            .iter()
            .enumerate()
            .filter(|&(_, &r)| r)
            .map(|(i, _)| (i, 0.5 * (nodes[i] + nodes[i + 1])))
            .collect();
        let mid_signs: Vec<Ordering> = mids.par_iter().map(|&(_, c)| g.sign(c)).collect();
        let mut new_nodes = Vec::with_capacity(nodes.len() + mids.len());
        let mut new_signs = Vec::with_capacity(nodes.len() + mids.len());
        let mut k = 0;
        for i in 0..nodes.len() {
            new_nodes.push(nodes[i]);
            new_signs.push(signs[i]);
            if k < mids.len() && mids[k].0 == i {
                new_nodes.push(mids[k].1);
                new_signs.push(mid_signs[k]);
                k += 1;
            }
        }
        nodes = new_nodes;
        signs = new_signs;
    }

    let mut roots: Vec<(f64, f64)> = Vec::new();
    for (i, s) in signs.iter().enumerate() {
        if *s == Ordering::Equal {
            let c = nodes[i];
            roots.push((c, if c > 0.0 { c.ln() } else { f64::NEG_INFINITY }));
        }
    }
    for i in brackets(&signs) {
        let (a, b) = (nodes[i], nodes[i + 1]);
        let root = if a == 0.0 {
            bisect_from_zero(g, b, signs[i])
        } else {
            let c = bisect(g, a, b, signs[i]);
            (c, c.ln())
        };
        roots.push(root);
    }
    roots.sort_by(|x, y| x.1.total_cmp(&y.1));
    roots.dedup_by(|x, y| (x.0 - y.0).abs() <= 1e-12 && x.0 > 0.0);
    roots
}

/// Bisection down to adjacent doubles; returns the endpoint with smaller residual.
fn bisect(g: &Response, mut lo: f64, mut hi: f64, lo_sign: Ordering) -> f64 {
    loop {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            break;
        }
        match g.sign(mid) {
            Ordering::Equal => return mid,
            s if s == lo_sign => lo = mid,
            _ => hi = mid,
        }
    }
    if g.residual(lo) <= g.residual(hi) {
        lo
    } else {
        hi
    }
}

/// Root in `(0, hi)` located on the `ln c` axis, which reaches thresholds
/// far below the smallest positive double.
fn bisect_from_zero(g: &Response, hi: f64, zero_sign: Ordering) -> (f64, f64) {
    let mut u_hi = hi.ln();
    let ln_p0 = g.ln_p(0.0);
    let mut u_lo = ln_p0.min(u_hi) - 1.0;
    let mut guard = 0;
    while g.sign_at_ln(u_lo) != zero_sign && guard < 64 {
        u_lo = 2.0 * u_lo - 1.0;
        guard += 1;
    }
    for _ in 0..200 {
        let mid = 0.5 * (u_lo + u_hi);
        if mid <= u_lo || mid >= u_hi {
            break;
        }
        match g.sign_at_ln(mid) {
            Ordering::Equal => {
                u_lo = mid;
                u_hi = mid;
                break;
            }
            s if s == zero_sign => u_lo = mid,
            _ => u_hi = mid,
        }
    }
    let u = 0.5 * (u_lo + u_hi);
    (exp_floor(u), u)
}

/// Labels an equilibrium by its position relative to the pivots.
pub fn classify_point(
    issue: &Issue,
    population: u64,
    c: f64,
    pivots: &PivotSet,
) -> EquilibriumKind {
    let _ = population;
    if let Some(iv) = pivots.interval_containing(c) {
        return match classify_ppm(issue.ppm()).tie_sensitivity {
            Some(q) if (c - q).abs() <= 1e-9 => EquilibriumKind::AtCap {
                q,
                lo: iv.lo,
                hi: iv.hi,
            },
            _ => EquilibriumKind::Unclassified {
                reason: format!(
                    "inside coincidence interval [{}, {}] but not at the tie level",
                    iv.lo, iv.hi
                ),
            },
        };
    }
    let locations = pivots.locations();
    // without a crossing, treat c = 1 as the only reference point
    let first = locations.first().copied().unwrap_or(1.0);
    if c < first && c < 0.5 * first {
        return EquilibriumKind::Trivial;
    }
    let nearest = locations
        .iter()
        .copied()
        .min_by(|a, b| (a - c).abs().total_cmp(&(b - c).abs()));
    match nearest {
        Some(p) if c < p => EquilibriumKind::Left { pivot: p },
        Some(p) if c > p => EquilibriumKind::Right { pivot: p },
        Some(p) => EquilibriumKind::Unclassified {
            reason: format!("sits exactly on pivot {p}"),
        },
        None => EquilibriumKind::Unclassified {
            reason: "no pivot and not below 0.5".into(),
        },
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Probe {
    pub delta: f64,
    pub x: f64,
    /// Sign of `p(x) - x`; `None` when the probe was skipped.
    pub sign: Option<i8>,
    pub toward: Option<bool>,
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StabilityReport {
    pub stable: bool,
    pub probes: Vec<Probe>,
}

/// Perturbs the threshold on both sides and checks that best responses move back.
pub fn check_stability(
    issue: &Issue,
    population: u64,
    point: &EquilibriumPoint,
) -> Result<StabilityReport> {
    let all = find_equilibria(issue, population)?;
    let others: Vec<f64> = all
        .iter()
        .map(|p| p.c)
        .filter(|&c| (c - point.c).abs() > 1e-12)
        .collect();
    let g = Response { issue, population };
    Ok(stability_probes(&g, point.c, &others, issue.pivots()))
}

fn stability_probes(g: &Response, c: f64, others: &[f64], pivots: &PivotSet) -> StabilityReport {
    let mut obstacles: Vec<f64> = others.to_vec();
    obstacles.extend(pivots.locations());
    let blocked = |x: f64| -> Option<String> {
        if !(0.0..=1.0).contains(&x) {
            return Some("outside [0, 1]".into());
        }
        let (lo, hi) = if x < c { (x, c) } else { (c, x) };
        obstacles
            .iter()
            .find(|&&o| o >= lo && o <= hi && o != c)
            .map(|o| format!("crosses {o}"))
    };
    let mut probes = Vec::new();
    let mut stable = true;
    for above in [false, true] {
        let dir = if above { 1.0 } else { -1.0 };
        let mut tried = 0;
        let mut record = |delta: f64, probes: &mut Vec<Probe>| {
            let x = c + dir * delta;
            if let Some(note) = blocked(x) {
                probes.push(Probe {
                    delta,
                    x,
                    sign: None,
                    toward: None,
                    note: Some(note),
                });
                return false;
            }
            let s = g.sign(x);
            let toward = if above {
                s == Ordering::Less
            } else {
                s == Ordering::Greater
            };
            probes.push(Probe {
                delta,
                x,
                sign: Some(s as i8),
                toward: Some(toward),
                note: None,
            });
            stable &= toward;
            true
        };
        for delta in STABILITY_DELTAS {
            if record(delta, &mut probes) {
                tried += 1;
            }
        }
        if tried == 0 {
            // fall back to a quarter of the free gap on this side
            let edge = if above { 1.0 } else { 0.0 };
            let gap = obstacles
                .iter()
                .copied()
                .filter(|&o| if above { o > c } else { o < c })
                .map(|o| (o - c).abs())
                .fold((edge - c).abs(), f64::min);
            if gap > 0.0 {
                record(0.25 * gap, &mut probes);
            }
        }
    }
    let any = probes.iter().any(|p| p.toward.is_some());
    StabilityReport {
        stable: stable && any,
        probes,
    }
}

/// Which equilibrium to follow along a population grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Selection {
    Trivial,
    Left { pivot: f64 },
    Right { pivot: f64 },
    AtCap { q: f64 },
}

impl Selection {
    fn matches(&self, kind: &EquilibriumKind) -> bool {
        let near = |a: f64, b: f64| (a - b).abs() <= 1e-9;
        match (self, kind) {
            (Selection::Trivial, EquilibriumKind::Trivial) => true,
            (Selection::Left { pivot }, EquilibriumKind::Left { pivot: p }) => near(*pivot, *p),
            (Selection::Right { pivot }, EquilibriumKind::Right { pivot: p }) => near(*pivot, *p),
            (Selection::AtCap { q }, EquilibriumKind::AtCap { q: p, .. }) => near(*q, *p),
            _ => false,
        }
    }

    /// The value the selected sequence converges to.
    pub fn limit(&self) -> f64 {
        match *self {
            Selection::Trivial => 0.0,
            Selection::Left { pivot } | Selection::Right { pivot } => pivot,
            Selection::AtCap { q } => q,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquilibriumSequence {
    pub selection: Selection,
    pub grid: Vec<u64>,
    /// Matched points, one per grid entry up to the first miss.
    pub points: Vec<EquilibriumPoint>,
    pub limit: f64,
    /// Fitted `gamma` in `|c_N - c*| ~ N^-gamma` over the tail half of the grid.
    pub rate_slope: Option<f64>,
    /// First grid index whose solve had no matching equilibrium.
    pub break_index: Option<usize>,
}

impl EquilibriumSequence {
    /// `ln |c_N - c*|` per matched point.
    pub fn ln_gaps(&self) -> Vec<f64> {
        self.points
            .iter()
            .map(|p| {
                if self.limit == 0.0 {
                    p.ln_c
                } else {
                    (p.c - self.limit).abs().ln()
                }
            })
            .collect()
    }

    /// Slope fitted on the first `i + 1` points, for every `i`.
    pub fn running_slopes(&self) -> Vec<Option<f64>> {
        let xs: Vec<f64> = self.grid.iter().map(|&n| (n as f64).ln()).collect();
        let ys = self.ln_gaps();
        (0..ys.len())
            .map(|i| fit_log_slope(&xs[..=i], &ys[..=i]))
            .collect()
    }
}

/// Least-squares slope of `-y` on `x`; `None` for fewer than two points.
pub fn fit_log_slope(ln_n: &[f64], ln_gap: &[f64]) -> Option<f64> {
    let k = ln_n.len().min(ln_gap.len());
    if k < 2 {
        return None;
    }
    let mx = ln_n[..k].iter().sum::<f64>() / k as f64;
    let my = ln_gap[..k].iter().sum::<f64>() / k as f64;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for i in 0..k {
        sxy += (ln_n[i] - mx) * (ln_gap[i] - my);
        sxx += (ln_n[i] - mx).powi(2);
    }
    if sxx == 0.0 || !sxy.is_finite() {
        return None;
    }
    Some(-sxy / sxx)
}

pub fn trace_sequence(
    issue: &Issue,
    grid: &[u64],
    selection: Selection,
) -> Result<EquilibriumSequence> {
    trace_sequence_with(issue, grid, selection, &SolverConfig::default())
}

pub fn trace_sequence_with(
    issue: &Issue,
    grid: &[u64],
    selection: Selection,
    config: &SolverConfig,
) -> Result<EquilibriumSequence> {
    if grid.is_empty() || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config(
            "population grid must be non-empty and strictly increasing".into(),
        ));
    }
    let limit = selection.limit();
    let solved: Vec<Result<Option<EquilibriumPoint>>> = grid
        .par_iter()
        .map(|&n| {
            let pts = find_equilibria_with(issue, n, config)?;
            Ok(pts
                .into_iter()
                .filter(|p| selection.matches(&p.kind))
                .min_by(|a, b| {
                    let da = (a.c - limit).abs();
                    let db = (b.c - limit).abs();
                    if limit == 0.0 {
                        a.ln_c.total_cmp(&b.ln_c)
                    } else {
                        da.total_cmp(&db)
                    }
                }))
        })
        .collect();
    let mut points = Vec::new();
    let mut break_index = None;
    for (i, r) in solved.into_iter().enumerate() {
        match r? {
            Some(p) => points.push(p),
            None => {
                break_index = Some(i);
                break;
            }
        }
    }
    let mut seq = EquilibriumSequence {
        selection,
        grid: grid.to_vec(),
        points,
        limit,
        rate_slope: None,
        break_index,
    };
    let k = seq.points.len();
    let tail = k.div_ceil(2);
    let xs: Vec<f64> = grid[k - tail..k].iter().map(|&n| (n as f64).ln()).collect();
    let ys = seq.ln_gaps();
    seq.rate_slope = fit_log_slope(&xs, &ys[k - tail..]);
    Ok(seq)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateVerdict {
    pub class: Option<RateClass>,
    pub slope: Option<f64>,
    /// `sqrt(N) |c_N - c*|` at the last grid point, reported for moderate rates.
    pub constant: Option<f64>,
    pub note: String,
}

/// Slow, moderate or fast convergence of `sqrt(N) |c_N - c*|`, from the fitted slope.
pub fn classify_rate(seq: &EquilibriumSequence) -> RateVerdict {
    let inconclusive = |note: String| RateVerdict {
        class: None,
        slope: seq.rate_slope,
        constant: None,
        note,
    };
    let k = seq.points.len();
    if k.div_ceil(2) < 4 {
        return inconclusive(format!("only {} tail points, need 4", k.div_ceil(2)));
    }
    let Some(slope) = seq.rate_slope else {
        return inconclusive("slope could not be fitted".into());
    };
    let gaps = seq.ln_gaps();
    let tail = &gaps[k.saturating_sub(5)..];
    let down = tail.windows(2).all(|w| w[1] <= w[0]);
    let up = tail.windows(2).all(|w| w[1] >= w[0]);
    if !(down || up) {
        return inconclusive("gap is not monotone over the last five grid points".into());
    }
    let class = if slope < 0.5 - RATE_BAND {
        RateClass::Slow
    } else if slope > 0.5 + RATE_BAND {
        RateClass::Fast
    } else {
        RateClass::Moderate
    };
    let constant = (class == RateClass::Moderate).then(|| {
        let last = &seq.points[k - 1];
        (seq.grid[k - 1] as f64).sqrt() * (last.c - seq.limit).abs()
    });
    RateVerdict {
        class: Some(class),
        slope: Some(slope),
        constant,
        note: format!("slope {slope:.4} against band 0.5 +/- {RATE_BAND}"),
    }
}
