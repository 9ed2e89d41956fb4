//! Every model family in the catalog, evaluated on a small grid and classified.

use juryeq::classify_ppm;
use juryeq::experiment::catalog;
use juryeq::ppm::probe_tie_sensitivity;

fn main() {
    let ns = [10.0, 1e3, 1e5, 1e7];
    println!(
        "{:<22} {:>10} {:>10} {:>10} {:>10}   class",
        "model", "n=1e1", "1e3", "1e5", "1e7"
    );
    for (name, ppm) in catalog() {
        let tie: Vec<String> = ns
            .iter()
            .map(|&n| format!("{:10.3e}", ppm.eval(n, 0.0)))
            .collect();
        let class = classify_ppm(&ppm);
        println!(
            "{name:<22} {}   {:?}, q = {:?}, rate {:?}",
            tie.join(" "),
            class.vanishing,
            class.tie_sensitivity,
            class.rate
        );
    }

    println!("\nnumerical probe at m = 0.01:");
    for (name, ppm) in catalog() {
        let probe = probe_tie_sensitivity(&ppm);
        println!(
            "{name:<22} inf p(n, 0) = {:.3e}, p(n, 0.01) vanishes: {}",
            probe.inf_at_tie, probe.near_tie_vanishes
        );
    }
}
