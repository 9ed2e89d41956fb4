//! Run the named scenarios in-process and print their tables.
//!
//! `cargo run --release --example reproduce_scenarios -- fig2-right`

use juryeq::experiment::{run_scenario, ScenarioOverrides, SCENARIOS};

fn main() -> juryeq::Result<()> {
    let names: Vec<String> = std::env::args().skip(1).collect();
    let names: Vec<&str> = if names.is_empty() {
        SCENARIOS.to_vec()
    } else {
        names.iter().map(String::as_str).collect()
    };
    for name in names {
        for table in run_scenario(name, &ScenarioOverrides::default())? {
            println!("== {name}: {}", table.name);
            print!("{}", table.to_text());
            println!();
        }
    }
    Ok(())
}
