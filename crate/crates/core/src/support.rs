//! Voter-type geometry: support functions, turnout, margin and pivots.
//!
//! A support function `s_T(c)` is the fraction of the population that
//! prefers `T` and has effective voting cost at most `c`. Here it is a
//! continuous, non-decreasing piecewise-linear map on `[0, 1]`; its value at
//! `c = 0` is the atom of zero-cost ("core") supporters.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ppm::Ppm;

/// Absolute tolerance for comparing masses.
pub const MASS_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct SupportFunction {
    breakpoints: Vec<(f64, f64)>,
}

impl SupportFunction {
    /// Builds a support function, rejecting breakpoints that violate any
    /// support-function invariant.
    pub fn from_breakpoints(breakpoints: Vec<(f64, f64)>) -> Result<Self> {
        let mut violations = Vec::new();
        check_breakpoints("support", &breakpoints, &mut violations);
        if let Some(v) = violations.first() {
            return Err(Error::InvalidSupport(v.to_string()));
        }
        Ok(SupportFunction { breakpoints })
    }

    /// `s(c) = core + slope * c`, clamped to the unit interval only by the caller's choice of values.
    pub fn linear(core: f64, total: f64) -> Result<Self> {
        Self::from_breakpoints(vec![(0.0, core), (1.0, total)])
    }

    pub fn constant(mass: f64) -> Result<Self> {
        Self::linear(mass, mass)
    }

    pub fn breakpoints(&self) -> &[(f64, f64)] {
        &self.breakpoints
    }

    /// Mass of zero-cost supporters, `s(0)`.
    pub fn core_mass(&self) -> f64 {
        self.breakpoints[0].1
    }

    pub fn total_mass(&self) -> f64 {
        self.breakpoints[self.breakpoints.len() - 1].1
    }

    pub fn eval(&self, c: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&c) {
            return Err(Error::CostOutOfRange(c));
        }
        Ok(self.value(c))
    }

    /// Unchecked evaluation; `c` is clamped into `[0, 1]`.
    pub(crate) fn value(&self, c: f64) -> f64 {
        let c = c.clamp(0.0, 1.0);
        let bp = &self.breakpoints;
        // index of the first breakpoint strictly to the right of c
        let hi = bp.partition_point(|&(x, _)| x <= c);
        if hi == 0 {
            return bp[0].1;
        }
        if hi == bp.len() {
            return bp[bp.len() - 1].1;
        }
        let (x0, y0) = bp[hi - 1];
        if x0 == c {
            return y0;
        }
        let (x1, y1) = bp[hi];
        y0 + (y1 - y0) * (c - x0) / (x1 - x0)
    }

    /// Slopes of the segments immediately left and right of `c`.
    pub fn one_sided_slopes(&self, c: f64) -> (Option<f64>, Option<f64>) {
        let bp = &self.breakpoints;
        let slope = |i: usize| (bp[i + 1].1 - bp[i].1) / (bp[i + 1].0 - bp[i].0);
        let left = if c <= 0.0 {
            None
        } else {
            let i = bp.partition_point(|&(x, _)| x < c);
            Some(slope(i.saturating_sub(1).min(bp.len() - 2)))
        };
        let right = if c >= 1.0 {
            None
        } else {
            let i = bp.partition_point(|&(x, _)| x <= c);
            Some(slope(i.saturating_sub(1).min(bp.len() - 2)))
        };
        (left, right)
    }
}

fn check_breakpoints(name: &str, bp: &[(f64, f64)], out: &mut Vec<Violation>) {
    let mut push = |kind, location: String, detail: String| {
        out.push(Violation {
            kind,
            location,
            detail,
        })
    };
    if bp.len() < 2 {
        push(
            ViolationKind::Shape,
            name.to_string(),
            format!("needs at least two breakpoints, got {}", bp.len()),
        );
        return;
    }
    for (i, &(c, s)) in bp.iter().enumerate() {
        if !c.is_finite() || !s.is_finite() {
            push(
                ViolationKind::Shape,
                format!("{name}[{i}]"),
                "non-finite value".to_string(),
            );
            return;
        }
        if !(-MASS_TOL..=1.0 + MASS_TOL).contains(&s) {
            push(
                ViolationKind::Range,
                format!("{name}[{i}]"),
                format!("mass {s} outside [0, 1]"),
            );
        }
    }
    if bp[0].0 != 0.0 {
        push(
            ViolationKind::Endpoints,
            format!("{name}[0]"),
            format!("first cost must be 0, got {}", bp[0].0),
        );
    }
    let last = bp.len() - 1;
    if bp[last].0 != 1.0 {
        push(
            ViolationKind::Endpoints,
            format!("{name}[{last}]"),
            format!("last cost must be 1, got {}", bp[last].0),
        );
    }
    for (i, w) in bp.windows(2).enumerate() {
        if w[1].0 <= w[0].0 {
            push(
                ViolationKind::Ordering,
                format!("{name}[{}]", i + 1),
                format!("cost {} does not increase past {}", w[1].0, w[0].0),
            );
        }
        if w[1].1 < w[0].1 - MASS_TOL {
            push(
                ViolationKind::Monotonicity,
                format!("{name}[{}]", i + 1),
                format!("mass decreases from {} to {}", w[0].1, w[1].1),
            );
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    Shape,
    Endpoints,
    Ordering,
    Monotonicity,
    Range,
    Normalization,
    Capacity,
    PpmParameter,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub location: String,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} at {}: {}", self.kind, self.location, self.detail)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, kind: ViolationKind) -> bool {
        self.violations.iter().any(|v| v.kind == kind)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        for v in &self.violations {
            writeln!(f, "  - {v}")?;
        }
        Ok(())
    }
}

/// On-disk form of an issue: `{"s_A": [[c, s], ...], "s_B": [...], "ppm": {...}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IssueSpec {
    #[serde(rename = "s_A")]
    pub s_a: Vec<(f64, f64)>,
    #[serde(rename = "s_B")]
    pub s_b: Vec<(f64, f64)>,
    pub ppm: Ppm,
}

/// Checks every support-function and issue invariant; never fails.
pub fn validate_issue(spec: &IssueSpec) -> ValidationReport {
    let mut violations = Vec::new();
    check_breakpoints("s_A", &spec.s_a, &mut violations);
    check_breakpoints("s_B", &spec.s_b, &mut violations);
    if let Err(e) = spec.ppm.validate() {
        violations.push(Violation {
            kind: ViolationKind::PpmParameter,
            location: "ppm".into(),
            detail: e.to_string(),
        });
    }
    // cross-function checks only make sense on structurally sound inputs
    let structural = violations.iter().any(|v| {
        matches!(
            v.kind,
            ViolationKind::Shape | ViolationKind::Endpoints | ViolationKind::Ordering
        )
    });
    if !structural {
        let a = SupportFunction {
            breakpoints: spec.s_a.clone(),
        };
        let b = SupportFunction {
            breakpoints: spec.s_b.clone(),
        };
        let total = a.total_mass() + b.total_mass();
        if (total - 1.0).abs() > MASS_TOL {
            violations.push(Violation {
                kind: ViolationKind::Normalization,
                location: "c = 1".into(),
                detail: format!("s_A(1) + s_B(1) = {total}, expected 1"),
            });
        }
        for c in merged_costs(&a, &b) {
            let s = a.value(c) + b.value(c);
            if s > 1.0 + MASS_TOL {
                violations.push(Violation {
                    kind: ViolationKind::Capacity,
                    location: format!("c = {c}"),
                    detail: format!("s_A + s_B = {s} exceeds 1"),
                });
            }
        }
    }
    ValidationReport { violations }
}

fn merged_costs(a: &SupportFunction, b: &SupportFunction) -> Vec<f64> {
    let mut xs: Vec<f64> = a
        .breakpoints
        .iter()
        .chain(b.breakpoints.iter())
        .map(|&(c, _)| c)
        .collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs
}

/// One-sided rates at a pivot: margin growth `|d m / d c|` moving away from
/// the pivot, and turnout density `(s_A + s_B)'`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SideSlopes {
    pub margin: f64,
    pub turnout: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PivotPoint {
    pub c: f64,
    pub left: Option<SideSlopes>,
    pub right: Option<SideSlopes>,
}

/// Closed interval on which the two support functions coincide.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PivotInterval {
    pub lo: f64,
    pub hi: f64,
    /// Slopes on the non-coinciding side left of `lo`.
    pub left: Option<SideSlopes>,
    /// Slopes on the non-coinciding side right of `hi`.
    pub right: Option<SideSlopes>,
}

impl PivotInterval {
    pub fn contains(&self, c: f64) -> bool {
        c >= self.lo - MASS_TOL && c <= self.hi + MASS_TOL
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct PivotSet {
    pub points: Vec<PivotPoint>,
    pub intervals: Vec<PivotInterval>,
}

impl PivotSet {
    pub fn is_empty(&self) -> bool {
        self.points.is_empty() && self.intervals.is_empty()
    }

    /// All pivot locations (isolated points and interval endpoints), sorted.
    pub fn locations(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.points.iter().map(|p| p.c).collect();
        for iv in &self.intervals {
            out.push(iv.lo);
            out.push(iv.hi);
        }
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// Smallest pivot location, if any.
    pub fn first(&self) -> Option<f64> {
        self.locations().first().copied()
    }

    pub fn point_near(&self, c: f64, tol: f64) -> Option<&PivotPoint> {
        self.points.iter().find(|p| (p.c - c).abs() <= tol)
    }

    pub fn interval_containing(&self, c: f64) -> Option<&PivotInterval> {
        self.intervals.iter().find(|iv| iv.contains(c))
    }

    /// Slopes on the given side of the pivot location `c`, whether it is an
    /// isolated point or an interval endpoint.
    pub fn side_slopes(&self, c: f64, right: bool) -> Option<SideSlopes> {
        if let Some(p) = self.point_near(c, 1e-9) {
            return if right { p.right } else { p.left };
        }
        self.intervals.iter().find_map(|iv| {
            if right && (iv.hi - c).abs() <= 1e-9 {
                iv.right
            } else if !right && (iv.lo - c).abs() <= 1e-9 {
                iv.left
            } else {
                None
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Issue {
    s_a: SupportFunction,
    s_b: SupportFunction,
    ppm: Ppm,
    pivots: PivotSet,
}

impl Issue {
    pub fn new(s_a: SupportFunction, s_b: SupportFunction, ppm: Ppm) -> Result<Self> {
        Self::from_spec(IssueSpec {
            s_a: s_a.breakpoints,
            s_b: s_b.breakpoints,
            ppm,
        })
    }

    pub fn from_spec(spec: IssueSpec) -> Result<Self> {
        let report = validate_issue(&spec);
        if !report.is_valid() {
            return Err(Error::InvalidIssue(report));
        }
        let s_a = SupportFunction {
            breakpoints: spec.s_a,
        };
        let s_b = SupportFunction {
            breakpoints: spec.s_b,
        };
        let pivots = compute_pivots(&s_a, &s_b);
        Ok(Issue {
            s_a,
            s_b,
            ppm: spec.ppm,
            pivots,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: IssueSpec = serde_json::from_str(text)?;
        Self::from_spec(spec)
    }

    pub fn to_spec(&self) -> IssueSpec {
        IssueSpec {
            s_a: self.s_a.breakpoints.clone(),
            s_b: self.s_b.breakpoints.clone(),
            ppm: self.ppm.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_spec()).expect("issue serializes")
    }

    /// Same supports, different pivotality model.
    pub fn with_ppm(&self, ppm: Ppm) -> Result<Self> {
        ppm.validate()?;
        Ok(Issue {
            ppm,
            ..self.clone()
        })
    }

    /// The issue with the candidates' roles exchanged.
    pub fn swapped(&self) -> Self {
        Issue {
            s_a: self.s_b.clone(),
            s_b: self.s_a.clone(),
            ppm: self.ppm.clone(),
            pivots: self.pivots.clone(),
        }
    }

    pub fn s_a(&self) -> &SupportFunction {
        &self.s_a
    }

    pub fn s_b(&self) -> &SupportFunction {
        &self.s_b
    }

    pub fn ppm(&self) -> &Ppm {
        &self.ppm
    }

    pub fn pivots(&self) -> &PivotSet {
        &self.pivots
    }

    /// Fractions `(s_A(c), s_B(c))` of the population voting for each side.
    pub(crate) fn shares(&self, c: f64) -> (f64, f64) {
        (self.s_a.value(c), self.s_b.value(c))
    }

    /// Union of both functions' breakpoint costs.
    pub fn breakpoint_costs(&self) -> Vec<f64> {
        merged_costs(&self.s_a, &self.s_b)
    }
}

/// `n(c, N) = (s_A(c) + s_B(c)) N`, unrounded.
pub fn expected_turnout(issue: &Issue, c: f64, population: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&c) {
        return Err(Error::CostOutOfRange(c));
    }
    let (a, b) = issue.shares(c);
    Ok((a + b) * population)
}

/// `m(c) = |s_A(c) - s_B(c)| / (s_A(c) + s_B(c))`.
pub fn expected_margin(issue: &Issue, c: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&c) {
        return Err(Error::CostOutOfRange(c));
    }
    let (a, b) = issue.shares(c);
    margin_of(a, b).ok_or(Error::NoActiveVoters(c))
}

pub(crate) fn margin_of(a: f64, b: f64) -> Option<f64> {
    let s = a + b;
    if s <= 0.0 {
        None
    } else {
        Some(((a - b).abs() / s).min(1.0))
    }
}

pub fn find_pivots(issue: &Issue) -> PivotSet {
    issue.pivots.clone()
}

fn side_slopes(
    s_a: &SupportFunction,
    s_b: &SupportFunction,
    c: f64,
    right: bool,
) -> Option<SideSlopes> {
    let (al, ar) = s_a.one_sided_slopes(c);
    let (bl, br) = s_b.one_sided_slopes(c);
    let (da, db) = if right { (ar?, br?) } else { (al?, bl?) };
    let s = s_a.value(c) + s_b.value(c);
    let margin = if s > 0.0 {
        (da - db).abs() / s
    } else {
        f64::INFINITY
    };
    Some(SideSlopes {
        margin,
        turnout: da + db,
    })
}

/// Exact pivot search: `s_A - s_B` is linear between merged breakpoints, so
/// each segment has either no root, one root, or coincides entirely.
/// Moves an interpolated crossing to the nearby double with the smallest
/// `|s_A - s_B|`; among ties the lower middle one wins.
fn polish_root(s_a: &SupportFunction, s_b: &SupportFunction, guess: f64) -> f64 {
    let gap = |c: f64| (s_a.value(c) - s_b.value(c)).abs();
    let bits = guess.to_bits();
    let candidates: Vec<f64> = (bits - 4..=bits + 4).map(f64::from_bits).collect();
    let best = candidates
        .iter()
        .map(|&c| gap(c))
        .fold(f64::INFINITY, f64::min);
    let ties: Vec<f64> = candidates.into_iter().filter(|&c| gap(c) == best).collect();
    ties[(ties.len() - 1) / 2]
}

fn compute_pivots(s_a: &SupportFunction, s_b: &SupportFunction) -> PivotSet {
    let xs = merged_costs(s_a, s_b);
    let d: Vec<f64> = xs.iter().map(|&c| s_a.value(c) - s_b.value(c)).collect();
    let zero: Vec<bool> = d.iter().map(|v| v.abs() <= MASS_TOL).collect();

    let mut intervals: Vec<(f64, f64)> = Vec::new();
    let mut in_interval = vec![false; xs.len()];
    let mut i = 0;
    while i + 1 < xs.len() {
        if zero[i] && zero[i + 1] {
            let start = i;
            while i + 1 < xs.len() && zero[i] && zero[i + 1] {
                i += 1;
            }
            for flag in &mut in_interval[start..=i] {
                *flag = true;
            }
            intervals.push((xs[start], xs[i]));
        } else {
            i += 1;
        }
    }

    let mut roots: Vec<f64> = Vec::new();
    for (k, &x) in xs.iter().enumerate() {
        if zero[k] && !in_interval[k] {
            roots.push(x);
        }
    }
    for k in 0..xs.len().saturating_sub(1) {
        let (d0, d1) = (d[k], d[k + 1]);
        if !zero[k] && !zero[k + 1] && (d0 > 0.0) != (d1 > 0.0) {
            let guess = xs[k] + d0 / (d0 - d1) * (xs[k + 1] - xs[k]);
            roots.push(polish_root(s_a, s_b, guess));
        }
    }
    roots.sort_by(f64::total_cmp);

    let points = roots
        .into_iter()
        .filter(|&c| c > 0.0 && c < 1.0)
        .map(|c| PivotPoint {
            c,
            left: side_slopes(s_a, s_b, c, false),
            right: side_slopes(s_a, s_b, c, true),
        })
        .collect();
    let intervals = intervals
        .into_iter()
        .map(|(lo, hi)| PivotInterval {
            lo,
            hi,
            left: side_slopes(s_a, s_b, lo, false),
            right: side_slopes(s_a, s_b, hi, true),
        })
        .collect();
    PivotSet { points, intervals }
}
