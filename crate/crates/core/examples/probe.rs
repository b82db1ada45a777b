//! Quick scenario probe printing the summary table and timing.

use std::time::Instant;

use dcscreen::simgen::{run_experiment, Knowledge, ModelKind, ScenarioConfig};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let reps: usize = args.get(1).map_or(20, |s| s.parse().unwrap());
    let model = match args.get(2).map(String::as_str) {
        Some("po") => ModelKind::Po,
        _ => ModelKind::Ph,
    };
    let rho: f64 = args.get(3).map_or(0.5, |s| s.parse().unwrap());
    let knowledge = match args.get(4).map(String::as_str) {
        Some("repeated") => Knowledge::Repeated { replicates: 2 },
        Some("validation") => Knowledge::Validation { m: 100 },
        Some("error_free") => Knowledge::ErrorFree,
        _ => Knowledge::Known,
    };
    let sigma = if knowledge == Knowledge::ErrorFree {
        None
    } else {
        Some(0.15)
    };
    let mut cfg = ScenarioConfig::desk(model, rho, sigma, knowledge);
    cfg.replications = reps;
    let start = Instant::now();
    let report = run_experiment(&cfg).unwrap();
    let elapsed = start.elapsed();
    print!("{}", report.to_csv());
    println!(
        "tau_c {:.4} mean_cens {:.4} degenerate {} elapsed {:.1?} per_rep {:.2?}",
        report.tau_c,
        report.diagnostics.mean_censoring_rate,
        report.diagnostics.degenerate_replicates,
        elapsed,
        elapsed / reps as u32
    );
}
