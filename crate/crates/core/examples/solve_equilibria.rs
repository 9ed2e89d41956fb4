//! Equilibria of the linear-support issue across population sizes, with stability probes.

use juryeq::experiment::simulation_issue;
use juryeq::{check_stability, find_equilibria, Ppm};

fn main() -> juryeq::Result<()> {
    let issue = simulation_issue(Ppm::Polynomial {
        q: 1.0,
        alpha: 1.0,
        beta: 0.5,
    });
    for n in [1_000u64, 100_000, 10_000_000] {
        println!("N = {n}");
        for point in find_equilibria(&issue, n)? {
            let report = check_stability(&issue, n, &point)?;
            println!(
                "  {:<8} c = {:<14.10} ln c = {:<10.4} residual {:.1e} stable {} ({} probes)",
                point.kind.name(),
                point.c,
                point.ln_c,
                point.residual,
                report.stable,
                report.probes.len()
            );
        }
    }

    // binomial pivotality collapses every threshold towards zero
    let binomial = simulation_issue(Ppm::Binomial);
    for n in [10_000u64, 1_000_000] {
        let points = find_equilibria(&binomial, n)?;
        println!(
            "binomial, N = {n}: {} point(s), largest ln c = {:.1}",
            points.len(),
            points[points.len() - 1].ln_c
        );
    }
    Ok(())
}
