//! Experiment pipelines behind the `juryeq` binary: parsing of grids and
//! selections, the solve/trace/outcome runs, named scenarios, and output.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::equilibrium::{
    classify_rate, find_equilibria, trace_sequence, EquilibriumKind, EquilibriumPoint, RateVerdict,
    Selection, SolverConfig, RATE_BAND, STABILITY_DELTAS,
};
use crate::error::{Error, Result};
use crate::outcome::{
    exact_win_probability, jury_classify, mc_win_probability, normal_win_probability, JuryVerdict,
    Method, WinProbability, MC_SHARDS,
};
use crate::ppm::{classify_ppm, probe_tie_sensitivity, Growth, Ppm, RateClass, Vanishing};
use crate::support::{expected_margin, Issue, SupportFunction};

pub const SCENARIOS: [&str; 3] = ["fig2-center", "fig2-right", "table1-catalog"];

/// Exponents swept by the `fig2-right` scenario.
pub const FIG2_RIGHT_ALPHAS: [f64; 17] = [
    0.5, 0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95, 0.975, 1.0, 1.025, 1.05, 1.1, 1.15, 1.2,
];

pub const DEFAULT_MC_SAMPLES: u64 = 100_000;
pub const DEFAULT_SEED: u64 = 42;

/// Parses a positive integer written plainly or in scientific notation (`1e6`).
pub fn parse_count(text: &str) -> Result<u64> {
    let v: f64 = text
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("not a number: {text:?}")))?;
    if !(v >= 1.0 && v.fract() == 0.0 && v < 1.8e19) {
        return Err(Error::Config(format!(
            "expected a positive integer, got {text:?}"
        )));
    }
    Ok(v as u64)
}

/// `start:stop:points` (log-spaced, inclusive) or a comma-separated list.
pub fn parse_grid(text: &str) -> Result<Vec<u64>> {
    let grid: Vec<u64> = if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::Config(format!(
                "grid spec must be start:stop:points, got {text:?}"
            )));
        }
        let start = parse_count(parts[0])? as f64;
        let stop = parse_count(parts[1])? as f64;
        let points = parse_count(parts[2])?;
        if points < 2 {
            return Err(Error::Config(
                "a log-spaced grid needs at least two points".into(),
            ));
        }
        let (a, b) = (start.log10(), stop.log10());
        (0..points)
            .map(|i| {
                10f64
                    .powf(a + (b - a) * i as f64 / (points - 1) as f64)
                    .round() as u64
            })
            .collect()
    } else {
        text.split(',').map(parse_count).collect::<Result<_>>()?
    };
    if grid.is_empty() || grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config(format!(
            "grid must be strictly increasing: {grid:?}"
        )));
    }
    Ok(grid)
}

/// `right:0.6`, `left:0.6`, `cap:0.3` or `trivial`.
pub fn parse_selection(text: &str) -> Result<Selection> {
    let (kind, value) = match text.split_once(':') {
        Some((k, v)) => (k, Some(v)),
        None => (text, None),
    };
    let number = || -> Result<f64> {
        let v = value
            .ok_or_else(|| Error::Config(format!("selection {text:?} needs a pivot value")))?;
        v.parse()
            .map_err(|_| Error::Config(format!("bad pivot value in {text:?}")))
    };
    match kind {
        "trivial" => Ok(Selection::Trivial),
        "left" => Ok(Selection::Left { pivot: number()? }),
        "right" => Ok(Selection::Right { pivot: number()? }),
        "cap" | "at_cap" => Ok(Selection::AtCap { q: number()? }),
        _ => Err(Error::Config(format!(
            "unknown selection kind {kind:?}; expected trivial, left, right or cap"
        ))),
    }
}

pub fn parse_method(text: &str) -> Result<Method> {
    match text {
        "exact" => Ok(Method::Exact),
        "normal" => Ok(Method::Normal),
        "mc" => Ok(Method::MonteCarlo),
        _ => Err(Error::Config(format!(
            "unknown method {text:?}; expected exact, normal or mc"
        ))),
    }
}

pub fn load_issue(path: &Path) -> Result<Issue> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    Issue::from_json(&text)
}

/// Monte Carlo settings.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct McSettings {
    pub samples: u64,
    pub seed: u64,
}

impl Default for McSettings {
    fn default() -> Self {
        McSettings {
            samples: DEFAULT_MC_SAMPLES,
            seed: DEFAULT_SEED,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Mode {
    Solve,
    Trace { selection: Selection },
    Outcome { cost: f64, method: Method },
    Scenario { name: String },
}

/// Everything that determines a run's output. Its hash goes into every file header.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub issue: Option<PathBuf>,
    pub mode: Mode,
    pub grid: Vec<u64>,
    pub mc: Option<McSettings>,
    pub out_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("grid must be strictly increasing".into()));
        }
        if let Some(mc) = self.mc {
            if mc.samples < crate::outcome::MIN_SAMPLES {
                return Err(Error::TooFewSamples {
                    got: mc.samples,
                    min: crate::outcome::MIN_SAMPLES,
                });
            }
        }
        Ok(())
    }

    /// SHA-256 of the configuration, excluding the output directory.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.out_dir = None;
        let text = serde_json::to_string(&canonical).expect("config serializes");
        let digest = Sha256::digest(text.as_bytes());
        digest.iter().fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }

    fn provenance(&self) -> Vec<String> {
        let config = SolverConfig::default();
        vec![
            format!("juryeq {}", env!("CARGO_PKG_VERSION")),
            format!("config_sha256 {}", self.hash()),
            format!(
                "seed {}",
                self.mc
                    .map(|m| m.seed.to_string())
                    .unwrap_or_else(|| "-".into())
            ),
            format!(
                "scan_cells {} max_doublings {} stability_deltas {} rate_band {} mc_shards {}",
                config.scan_cells,
                config.max_doublings,
                STABILITY_DELTAS.map(|d| format!("{d:e}")).join(","),
                RATE_BAND,
                MC_SHARDS
            ),
        ]
    }
}

/// A named table of already-formatted cells.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub provenance: Vec<String>,
}

impl Table {
    fn new(name: &str, header: &[&str]) -> Self {
        Table {
            name: name.into(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            provenance: Vec::new(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for line in &self.provenance {
            out.push_str("# ");
            out.push_str(line);
            out.push('\n');
        }
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    /// Rows as JSON objects keyed by the header.
    pub fn to_json(&self) -> String {
        let rows: Vec<serde_json::Map<String, serde_json::Value>> = self
            .rows
            .iter()
            .map(|row| {
                self.header
                    .iter()
                    .zip(row)
                    .map(|(h, v)| {
                        let value = v
                            .parse::<f64>()
                            .ok()
                            .filter(|x| x.is_finite())
                            .map(serde_json::Value::from)
                            .unwrap_or_else(|| serde_json::Value::from(v.clone()));
                        (h.clone(), value)
                    })
                    .collect()
            })
            .collect();
        serde_json::to_string_pretty(&rows).expect("rows serialize")
    }

    /// Fixed-width rendering for terminals.
    pub fn to_text(&self) -> String {
        let mut widths: Vec<usize> = self.header.iter().map(|h| h.len()).collect();
        for row in &self.rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.len());
            }
        }
        let line = |cells: &[String]| {
            cells
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:>w$}"))
                .collect::<Vec<_>>()
                .join("  ")
        };
        let mut out = line(&self.header);
        out.push('\n');
        for row in &self.rows {
            out.push_str(&line(row));
            out.push('\n');
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

/// Writes `table` as `<dir>/<name>.csv` or `.json` and returns the path.
pub fn emit(table: &Table, dir: &Path, format: Format) -> Result<PathBuf> {
    if table.rows.is_empty() {
        return Err(Error::Config(format!(
            "refusing to write empty table {}",
            table.name
        )));
    }
    let (ext, body) = match format {
        Format::Csv => ("csv", table.to_csv()),
        Format::Json => ("json", table.to_json()),
    };
    write_file(dir, &format!("{}.{ext}", table.name), &body)
}

/// Writes a single JSON object such as a [`JuryVerdict`].
pub fn emit_object<T: Serialize>(value: &T, dir: &Path, name: &str) -> Result<PathBuf> {
    let body = serde_json::to_string_pretty(value)?;
    write_file(dir, &format!("{name}.json"), &body)
}

fn write_file(dir: &Path, file: &str, body: &str) -> Result<PathBuf> {
    let io = |path: &Path| {
        let path = path.display().to_string();
        move |source| Error::Io { path, source }
    };
    fs::create_dir_all(dir).map_err(io(dir))?;
    let path = dir.join(file);
    fs::write(&path, body).map_err(io(&path))?;
    Ok(path)
}

/// Twelve significant digits, plain notation where it stays short.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        format!("{x:.11e}")
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_num).unwrap_or_default()
}

fn kind_pivot(kind: &EquilibriumKind) -> String {
    fmt_opt(kind.pivot())
}

/// One row per equilibrium per population.
pub fn run_solve(
    issue: &Issue,
    config: &ExperimentConfig,
) -> Result<(Table, Vec<(u64, Vec<EquilibriumPoint>)>)> {
    config.validate()?;
    let solved: Vec<(u64, Vec<EquilibriumPoint>)> = config
        .grid
        .par_iter()
        .map(|&n| find_equilibria(issue, n).map(|pts| (n, pts)))
        .collect::<Result<_>>()?;
    let mut table = Table::new(
        "equilibria",
        &["N", "c", "kind", "pivot", "stable", "residual", "ln_c"],
    );
    table.provenance = config.provenance();
    for (n, pts) in &solved {
        for p in pts {
            table.rows.push(vec![
                n.to_string(),
                fmt_num(p.c),
                p.kind.name().into(),
                kind_pivot(&p.kind),
                p.stable.to_string(),
                fmt_num(p.residual),
                fmt_num(p.ln_c),
            ]);
        }
    }
    Ok((table, solved))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceReport {
    pub rate: RateVerdict,
    pub verdict: JuryVerdict,
}

pub fn run_trace(issue: &Issue, config: &ExperimentConfig) -> Result<(Table, TraceReport)> {
    config.validate()?;
    let Mode::Trace { selection } = config.mode else {
        return Err(Error::Config("run_trace needs trace mode".into()));
    };
    let seq = trace_sequence(issue, &config.grid, selection)?;
    let running = seq.running_slopes();
    let mut table = Table::new(
        "sequence",
        &["N", "c_N", "abs_gap", "margin", "rate_slope_running"],
    );
    table.provenance = config.provenance();
    for (i, p) in seq.points.iter().enumerate() {
        let margin = expected_margin(issue, p.c).ok();
        let gap = if seq.limit == 0.0 {
            p.c
        } else {
            (p.c - seq.limit).abs()
        };
        table.rows.push(vec![
            seq.grid[i].to_string(),
            fmt_num(p.c),
            fmt_num(gap),
            fmt_opt(margin),
            fmt_opt(running[i]),
        ]);
    }
    if let Some(b) = seq.break_index {
        table.rows.push(vec![
            seq.grid[b].to_string(),
            "missing".into(),
            String::new(),
            String::new(),
            String::new(),
        ]);
    }
    let report = TraceReport {
        rate: classify_rate(&seq),
        verdict: jury_classify(issue, &seq),
    };
    Ok((table, report))
}

fn wp_row(n: u64, c: f64, wp: &WinProbability, seed: Option<u64>) -> Vec<String> {
    vec![
        n.to_string(),
        fmt_num(c),
        wp.method.name().into(),
        fmt_num(wp.value),
        fmt_opt(wp.tie_probability),
        fmt_opt(wp.ci_halfwidth),
        seed.map(|s| s.to_string()).unwrap_or_default(),
    ]
}

pub fn win_probability(
    issue: &Issue,
    n: u64,
    c: f64,
    method: Method,
    mc: McSettings,
) -> Result<WinProbability> {
    match method {
        Method::Exact => exact_win_probability(issue, n, c),
        Method::Normal => normal_win_probability(issue, n, c),
        Method::MonteCarlo => mc_win_probability(issue, n, c, mc.samples, mc.seed),
    }
}

pub fn run_outcome(
    issue: &Issue,
    config: &ExperimentConfig,
) -> Result<(Table, Vec<WinProbability>)> {
    config.validate()?;
    let Mode::Outcome { cost, method } = config.mode else {
        return Err(Error::Config("run_outcome needs outcome mode".into()));
    };
    let mc = config.mc.unwrap_or_default();
    let mut table = Table::new(
        "win_probability",
        &["N", "c", "method", "wp_a", "tie_p", "ci_halfwidth", "seed"],
    );
    table.provenance = config.provenance();
    let mut all = Vec::new();
    for &n in &config.grid {
        let wp = win_probability(issue, n, cost, method, mc)?;
        let seed = (method == Method::MonteCarlo).then_some(mc.seed);
        table.rows.push(wp_row(n, cost, &wp, seed));
        all.push(wp);
    }
    Ok((table, all))
}

/// The worked example: 10% core support for A plus 50% uniform-cost A
/// supporters, against a fixed 40% block for B.
pub fn simulation_issue(ppm: Ppm) -> Issue {
    Issue::new(
        SupportFunction::linear(0.1, 0.6).expect("valid support"),
        SupportFunction::constant(0.4).expect("valid support"),
        ppm,
    )
    .expect("valid issue")
}

fn polynomial(alpha: f64) -> Ppm {
    Ppm::Polynomial {
        q: 1.0,
        alpha,
        beta: 0.5,
    }
}

fn pick(points: &[EquilibriumPoint], right: bool) -> Option<&EquilibriumPoint> {
    points
        .iter()
        .filter(|p| match p.kind {
            EquilibriumKind::Right { pivot } => right && (pivot - 0.6).abs() < 1e-9,
            EquilibriumKind::Left { pivot } => !right && (pivot - 0.6).abs() < 1e-9,
            _ => false,
        })
        .min_by(|a, b| (a.c - 0.6).abs().total_cmp(&(b.c - 0.6).abs()))
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ScenarioOverrides {
    pub mc: Option<McSettings>,
    pub grid: Option<Vec<u64>>,
    pub alphas: Option<Vec<f64>>,
}

/// Population grid of the `fig2-center` scenario.
pub fn fig2_center_grid() -> Vec<u64> {
    (3..=8).map(|e| 10u64.pow(e)).collect()
}

/// Population grid of the `fig2-right` scenario.
pub fn fig2_right_grid() -> Vec<u64> {
    (4..=8).map(|e| 10u64.pow(e)).collect()
}

pub fn run_scenario(name: &str, overrides: &ScenarioOverrides) -> Result<Vec<Table>> {
    let default_grid = match name {
        "fig2-center" => fig2_center_grid(),
        "fig2-right" => fig2_right_grid(),
        "table1-catalog" => Vec::new(),
        _ => {
            return Err(Error::Config(format!(
                "unknown scenario {name:?}; available: {}",
                SCENARIOS.join(", ")
            )))
        }
    };
    let config = ExperimentConfig {
        issue: None,
        mode: Mode::Scenario { name: name.into() },
        grid: overrides.grid.clone().unwrap_or(default_grid),
        mc: overrides.mc,
        out_dir: None,
    };
    config.validate()?;
    let mut table = match name {
        "fig2-center" => fig2_center(&config)?,
        "fig2-right" => fig2_right(
            &config,
            overrides.alphas.as_deref().unwrap_or(&FIG2_RIGHT_ALPHAS),
        )?,
        _ => table1_catalog(),
    };
    let mut provenance = config.provenance();
    if name == "fig2-right" {
        let alphas = overrides.alphas.as_deref().unwrap_or(&FIG2_RIGHT_ALPHAS);
        provenance.push(format!(
            "alphas {}",
            alphas
                .iter()
                .map(|a| fmt_num(*a))
                .collect::<Vec<_>>()
                .join(",")
        ));
    }
    table.provenance = provenance;
    Ok(vec![table])
}

struct CenterRow {
    n: u64,
    c_plus: Option<f64>,
    c_minus: Option<f64>,
    wp_a: Option<f64>,
    wp_b: Option<f64>,
    mc_a: Option<WinProbability>,
    mc_b: Option<WinProbability>,
}

fn fig2_center(config: &ExperimentConfig) -> Result<Table> {
    let issue = simulation_issue(polynomial(1.0));
    let rows: Vec<CenterRow> = config
        .grid
        .par_iter()
        .map(|&n| -> Result<CenterRow> {
            let pts = find_equilibria(&issue, n)?;
            let plus = pick(&pts, true).map(|p| p.c);
            let minus = pick(&pts, false).map(|p| p.c);
            let wp_a = plus
                .map(|c| normal_win_probability(&issue, n, c))
                .transpose()?;
            let wp_b = minus
                .map(|c| normal_win_probability(&issue, n, c))
                .transpose()?;
            let (mc_a, mc_b) = match config.mc {
                Some(mc) => (
                    plus.map(|c| mc_win_probability(&issue, n, c, mc.samples, mc.seed))
                        .transpose()?,
                    minus
                        .map(|c| mc_win_probability(&issue, n, c, mc.samples, mc.seed))
                        .transpose()?,
                ),
                None => (None, None),
            };
            Ok(CenterRow {
                n,
                c_plus: plus,
                c_minus: minus,
                wp_a: wp_a.map(|w| w.value),
                wp_b: wp_b.map(|w| w.opponent),
                mc_a,
                mc_b,
            })
        })
        .collect::<Result<_>>()?;
    let mut header = vec![
        "N",
        "c_plus",
        "wp_A_at_c_plus",
        "c_minus",
        "wp_B_at_c_minus",
    ];
    if config.mc.is_some() {
        header.extend(["wp_A_mc", "ci_A_mc", "wp_B_mc", "ci_B_mc"]);
    }
    let mut table = Table::new("fig2_center", &header);
    let missing = |x: Option<f64>| x.map(fmt_num).unwrap_or_else(|| "missing".into());
    for r in rows {
        let mut row = vec![
            r.n.to_string(),
            missing(r.c_plus),
            missing(r.wp_a),
            missing(r.c_minus),
            missing(r.wp_b),
        ];
        if config.mc.is_some() {
            row.push(missing(r.mc_a.as_ref().map(|w| w.value)));
            row.push(missing(r.mc_a.as_ref().and_then(|w| w.ci_halfwidth)));
            row.push(missing(r.mc_b.as_ref().map(|w| w.opponent)));
            row.push(missing(r.mc_b.as_ref().and_then(|w| w.ci_halfwidth)));
        }
        table.rows.push(row);
    }
    Ok(table)
}

fn fig2_right(config: &ExperimentConfig, alphas: &[f64]) -> Result<Table> {
    let jobs: Vec<(f64, u64)> = alphas
        .iter()
        .flat_map(|&a| config.grid.iter().map(move |&n| (a, n)))
        .collect();
    let results: Vec<(f64, u64, Option<(f64, f64)>)> = jobs
        .par_iter()
        .map(|&(alpha, n)| -> Result<_> {
            let issue = simulation_issue(polynomial(alpha));
            let pts = find_equilibria(&issue, n)?;
            let found = match pick(&pts, true) {
                Some(p) => Some((p.c, normal_win_probability(&issue, n, p.c)?.value)),
                None => None,
            };
            Ok((alpha, n, found))
        })
        .collect::<Result<_>>()?;
    let mut table = Table::new("fig2_right", &["alpha", "N", "c_plus", "wp_A_at_c_plus"]);
    for (alpha, n, found) in results {
        let (c, wp) = match found {
            Some((c, wp)) => (fmt_num(c), fmt_num(wp)),
            None => ("missing".into(), "missing".into()),
        };
        table.rows.push(vec![fmt_num(alpha), n.to_string(), c, wp]);
    }
    Ok(table)
}

/// Representative members of every model family, with labels for the catalog.
pub fn catalog() -> Vec<(&'static str, Ppm)> {
    let altruist = |f| Ppm::Altruist { q: 0.5, f };
    vec![
        ("cov", Ppm::Cov { population: 1000 }),
        ("binomial", Ppm::Binomial),
        ("poisson", Ppm::Poisson),
        (
            "network_constant",
            Ppm::Network {
                kappa: Growth::Constant { k: 9 },
            },
        ),
        (
            "network_growing",
            Ppm::Network {
                kappa: Growth::Power { a: 1.0, gamma: 0.5 },
            },
        ),
        (
            "altruist_exponential",
            altruist(Growth::Exponential { rate: 0.01 }),
        ),
        (
            "altruist_superroot",
            altruist(Growth::Power {
                a: 1.0,
                gamma: 0.75,
            }),
        ),
        (
            "altruist_root",
            altruist(Growth::Power { a: 1.0, gamma: 0.5 }),
        ),
        (
            "altruist_subroot",
            altruist(Growth::Power {
                a: 1.0,
                gamma: 0.25,
            }),
        ),
        ("polynomial_balanced", polynomial(1.0)),
        ("polynomial_shallow", polynomial(0.8)),
        ("polynomial_steep", polynomial(1.2)),
    ]
}

fn table1_catalog() -> Table {
    let mut table = Table::new(
        "table1_catalog",
        &[
            "model",
            "spec",
            "vanishing",
            "tie_sensitivity",
            "rate",
            "jury",
            "probe_inf_p_tie",
            "probe_p_near_tie_below_1e-6",
        ],
    );
    for (name, ppm) in catalog() {
        let class = classify_ppm(&ppm);
        let probe = probe_tie_sensitivity(&ppm);
        let vanishing = match class.vanishing {
            Vanishing::Strong => "strong",
            Vanishing::Weak => "weak",
            Vanishing::None => "none",
        };
        let rate = match class.rate {
            Some(RateClass::Slow) => "slow",
            Some(RateClass::Moderate) => "moderate",
            Some(RateClass::Fast) => "fast",
            None => "",
        };
        let jury = match class.rate {
            Some(RateClass::Slow) => "yes",
            Some(RateClass::Moderate) => "weak",
            Some(RateClass::Fast) => "no",
            None => "",
        };
        table.rows.push(vec![
            name.into(),
            format!("\"{}\"", ppm.label()),
            vanishing.into(),
            fmt_opt(class.tie_sensitivity),
            rate.into(),
            jury.into(),
            fmt_num(probe.inf_at_tie),
            probe.near_tie_vanishes.to_string(),
        ]);
    }
    table
}
