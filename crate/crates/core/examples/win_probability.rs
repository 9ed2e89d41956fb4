//! The three win-probability estimators side by side.

use juryeq::experiment::simulation_issue;
use juryeq::{exact_win_probability, mc_win_probability, normal_win_probability, Ppm};

fn main() -> juryeq::Result<()> {
    let issue = simulation_issue(Ppm::Binomial);
    println!("    N      c      exact        tie     normal    monte carlo");
    for n in [50u64, 500, 5000] {
        for c in [0.3, 0.6, 0.65, 0.9] {
            let exact = exact_win_probability(&issue, n, c)?;
            let normal = normal_win_probability(&issue, n, c)?;
            let mc = mc_win_probability(&issue, n, c, 200_000, 42)?;
            println!(
                "{n:5}  {c:5.2}  {:9.6}  {:9.6}  {:9.6}  {:9.6} +/- {:.4}",
                exact.value,
                exact.tie_probability.unwrap_or(f64::NAN),
                normal.value,
                mc.value,
                mc.ci_halfwidth.unwrap_or(f64::NAN)
            );
        }
    }
    Ok(())
}
