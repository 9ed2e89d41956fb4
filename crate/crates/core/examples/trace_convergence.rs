//! Follow the right equilibrium up to N = 1e10 and fit the convergence rate.

use juryeq::experiment::simulation_issue;
use juryeq::{classify_rate, trace_sequence, Ppm, Selection};

fn main() -> juryeq::Result<()> {
    let grid: Vec<u64> = (4..=10).map(|e| 10u64.pow(e)).collect();
    for alpha in [0.8, 1.0, 1.25, 2.0] {
        let issue = simulation_issue(Ppm::Polynomial {
            q: 1.0,
            alpha,
            beta: 0.5,
        });
        let seq = trace_sequence(&issue, &grid, Selection::Right { pivot: 0.6 })?;
        println!("alpha = {alpha}");
        for ((n, p), slope) in seq.grid.iter().zip(&seq.points).zip(seq.running_slopes()) {
            let gap = p.c - seq.limit;
            println!(
                "  N = {n:>12}  c = {:.12}  gap = {gap:.3e}  sqrt(N) gap = {:.4}  slope {}",
                p.c,
                (*n as f64).sqrt() * gap,
                slope.map_or("-".into(), |s| format!("{s:.4}"))
            );
        }
        let rate = classify_rate(&seq);
        println!(
            "  fitted slope {:?}, class {:?}, constant {:?}\n",
            rate.slope, rate.class, rate.constant
        );
    }
    Ok(())
}
