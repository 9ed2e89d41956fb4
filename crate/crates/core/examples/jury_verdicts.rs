//! Does the majority's candidate win in the limit? One verdict per polynomial exponent.

use juryeq::experiment::simulation_issue;
use juryeq::{jury_classify, polynomial_limit_wp, trace_sequence, Ppm, Selection};

fn main() -> juryeq::Result<()> {
    let grid: Vec<u64> = (4..=10).map(|e| 10u64.pow(e)).collect();
    println!(
        "closed-form limit at c* = 0.6: {:.5}",
        polynomial_limit_wp(0.6, 1.0)?
    );
    for alpha in [0.5, 0.8, 1.0, 1.2, 2.0] {
        let issue = simulation_issue(Ppm::Polynomial {
            q: 1.0,
            alpha,
            beta: 0.5,
        });
        let seq = trace_sequence(&issue, &grid, Selection::Right { pivot: 0.6 })?;
        let verdict = jury_classify(&issue, &seq);
        println!(
            "alpha {alpha:>4}: {:?}, limit {:?}, slope {:.4}",
            verdict.class,
            verdict.limit,
            verdict.slope.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
