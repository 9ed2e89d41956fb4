//! Pivots and margin slopes of a small issue.

use juryeq::support::{expected_margin, expected_turnout, find_pivots};
use juryeq::{Issue, Ppm, SupportFunction};

fn main() -> juryeq::Result<()> {
    let issue = Issue::new(
        SupportFunction::linear(0.1, 0.6)?,
        SupportFunction::constant(0.4)?,
        Ppm::Binomial,
    )?;
    let pivots = find_pivots(&issue);
    for p in &pivots.points {
        println!("pivot at c = {}", p.c);
        if let Some(s) = p.left {
            println!("  left:  m' = {:.4}, n' = {:.4}", s.margin, s.turnout);
        }
        if let Some(s) = p.right {
            println!("  right: m' = {:.4}, n' = {:.4}", s.margin, s.turnout);
        }
    }

    println!("\n    c   turnout(N=1000)   margin");
    for i in 0..=10 {
        let c = i as f64 / 10.0;
        println!(
            "{c:5.2}   {:15.2}   {:.4}",
            expected_turnout(&issue, c, 1000.0)?,
            expected_margin(&issue, c)?
        );
    }
    Ok(())
}
