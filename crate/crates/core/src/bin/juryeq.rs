use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use juryeq::experiment::{
    emit, emit_object, load_issue, parse_count, parse_grid, parse_method, parse_selection,
    run_outcome, run_scenario, run_solve, run_trace, ExperimentConfig, Format, McSettings, Mode,
    ScenarioOverrides, DEFAULT_MC_SAMPLES,
};
use juryeq::{find_equilibria, Error, Issue, Method, Result};

#[derive(Parser)]
#[command(
    name = "juryeq",
    version,
    about = "Equilibria and winning probabilities of costly-voting games"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// All equilibria at one or more population sizes
    Solve {
        #[arg(long)]
        issue: PathBuf,
        #[arg(long = "N", conflicts_with = "grid")]
        population: Option<String>,
        #[arg(long)]
        grid: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Follow one equilibrium along a population grid
    Trace {
        #[arg(long)]
        issue: PathBuf,
        #[arg(long, default_value = "1e4:1e10:7")]
        grid: String,
        #[arg(long)]
        select: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Winning probability at a threshold, or at a selected equilibrium
    Outcome {
        #[arg(long)]
        issue: PathBuf,
        #[arg(long = "N")]
        population: String,
        #[arg(long, conflicts_with = "select")]
        c: Option<f64>,
        #[arg(long)]
        select: Option<String>,
        #[arg(long, default_value = "normal")]
        method: String,
        #[arg(long)]
        samples: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Named reproduction runs: fig2-center, fig2-right, table1-catalog
    Scenario {
        name: String,
        #[arg(long)]
        mc: bool,
        #[arg(long)]
        samples: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        grid: Option<String>,
        #[arg(long, value_delimiter = ',')]
        alphas: Option<Vec<f64>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check an issue file and optionally write it back in canonical form
    Validate {
        #[arg(long)]
        issue: PathBuf,
        #[arg(long)]
        write: Option<PathBuf>,
    },
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("JURYEQ_THREADS") {
        let n: usize = v.parse().map_err(|_| {
            Error::Config(format!(
                "JURYEQ_THREADS must be a positive integer, got {v:?}"
            ))
        })?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(e.to_string()))?;
    }
    Ok(())
}

fn mc_settings(samples: Option<String>, seed: Option<u64>) -> Result<McSettings> {
    Ok(McSettings {
        samples: samples
            .as_deref()
            .map(parse_count)
            .transpose()?
            .unwrap_or(DEFAULT_MC_SAMPLES),
        seed: seed.unwrap_or(juryeq::experiment::DEFAULT_SEED),
    })
}

fn run(cli: Cli) -> Result<()> {
    configure_threads()?;
    match cli.command {
        Command::Solve {
            issue,
            population,
            grid,
            out,
            json,
        } => {
            let grid = match (population, grid) {
                (Some(n), _) => vec![parse_count(&n)?],
                (None, Some(g)) => parse_grid(&g)?,
                (None, None) => return Err(Error::Config("give --N or --grid".into())),
            };
            let loaded = load_issue(&issue)?;
            let config = ExperimentConfig {
                issue: Some(issue),
                mode: Mode::Solve,
                grid,
                mc: None,
                out_dir: out.clone(),
            };
            let (table, _) = run_solve(&loaded, &config)?;
            print!("{}", table.to_text());
            if let Some(dir) = out {
                emit(&table, &dir, if json { Format::Json } else { Format::Csv })?;
            }
        }
        Command::Trace {
            issue,
            grid,
            select,
            out,
        } => {
            let loaded = load_issue(&issue)?;
            let config = ExperimentConfig {
                issue: Some(issue),
                mode: Mode::Trace {
                    selection: parse_selection(&select)?,
                },
                grid: parse_grid(&grid)?,
                mc: None,
                out_dir: out.clone(),
            };
            let (table, report) = run_trace(&loaded, &config)?;
            print!("{}", table.to_text());
            println!("{}", report.verdict.to_json());
            if let Some(dir) = out {
                emit(&table, &dir, Format::Csv)?;
                emit_object(&report.verdict, &dir, "verdict")?;
            }
        }
        Command::Outcome {
            issue,
            population,
            c,
            select,
            method,
            samples,
            seed,
            out,
        } => {
            let loaded = load_issue(&issue)?;
            let n = parse_count(&population)?;
            let method = parse_method(&method)?;
            let cost = match (c, select) {
                (Some(c), _) => c,
                (None, Some(sel)) => selected_cost(&loaded, n, &sel)?,
                (None, None) => return Err(Error::Config("give --c or --select".into())),
            };
            let mc = (method == Method::MonteCarlo)
                .then(|| mc_settings(samples, seed))
                .transpose()?;
            let config = ExperimentConfig {
                issue: Some(issue),
                mode: Mode::Outcome { cost, method },
                grid: vec![n],
                mc,
                out_dir: out.clone(),
            };
            let (table, _) = run_outcome(&loaded, &config)?;
            print!("{}", table.to_text());
            if let Some(dir) = out {
                emit(&table, &dir, Format::Csv)?;
            }
        }
        Command::Scenario {
            name,
            mc,
            samples,
            seed,
            grid,
            alphas,
            out,
        } => {
            let overrides = ScenarioOverrides {
                mc: mc.then(|| mc_settings(samples, seed)).transpose()?,
                grid: grid.as_deref().map(parse_grid).transpose()?,
                alphas,
            };
            for table in run_scenario(&name, &overrides)? {
                print!("{}", table.to_csv());
                if let Some(dir) = &out {
                    emit(&table, dir, Format::Csv)?;
                }
            }
        }
        Command::Validate { issue, write } => {
            let text = std::fs::read_to_string(&issue).map_err(|source| Error::Io {
                path: issue.display().to_string(),
                source,
            })?;
            let spec = serde_json::from_str(&text)?;
            let report = juryeq::support::validate_issue(&spec);
            println!("{report}");
            let loaded = Issue::from_spec(spec)?;
            if let Some(path) = write {
                std::fs::write(&path, loaded.to_json()).map_err(|source| Error::Io {
                    path: path.display().to_string(),
                    source,
                })?;
            }
        }
    }
    Ok(())
}

fn selected_cost(issue: &Issue, n: u64, text: &str) -> Result<f64> {
    let selection = parse_selection(text)?;
    let points = find_equilibria(issue, n)?;
    points
        .iter()
        .filter(|p| match (selection, &p.kind) {
            (juryeq::Selection::Trivial, juryeq::EquilibriumKind::Trivial) => true,
            (juryeq::Selection::Left { pivot }, juryeq::EquilibriumKind::Left { pivot: q })
            | (juryeq::Selection::Right { pivot }, juryeq::EquilibriumKind::Right { pivot: q }) => {
                (pivot - q).abs() < 1e-9
            }
            (juryeq::Selection::AtCap { q }, juryeq::EquilibriumKind::AtCap { q: r, .. }) => {
                (q - r).abs() < 1e-9
            }
            _ => false,
        })
        .map(|p| p.c)
        .next()
        .ok_or_else(|| Error::Config(format!("no {text} equilibrium at N = {n}")))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
