//! The full pipeline on a scenario file, as the `run` verb does it.
//!
//! cargo run --release --example run_scenario -- crates/core/configs/tilted_symmetry.toml

use std::path::PathBuf;

use sphere_fsb::cli::{analyze, write_outputs, Outcome, ScenarioConfig};

fn main() -> sphere_fsb::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/configs/tilted_symmetry.toml")));
    let cfg = ScenarioConfig::load(&path)?;
    let out = analyze(&cfg)?;
    for run in &out.report.runs {
        println!("eps = {} (scenario {})", run.epsilon, run.scenario_hash);
        for e in &run.equilibria {
            match e {
                Outcome::Ok(b) => println!("  equilibrium {:?}: {} (Re lambda {:+.3e})", b.pole, b.stability, b.eigenvalues[0].re),
                Outcome::Error(err) => println!("  {}: {}", err.stage, err.message),
                Outcome::Skipped(why) => println!("  skipped: {why}"),
            }
        }
        println!("  persistence integral: {} simple zero(s), degenerate {}", run.melnikov.roots.len(), run.melnikov.first_order_degenerate);
        for o in &run.periodic_orbits {
            match o {
                Outcome::Ok(o) => println!("  orbit at phi {:.6}: {} (multiplier {:.6})", o.fixed_phi, o.stability, o.multiplier),
                Outcome::Error(err) => println!("  {}: {}", err.stage, err.message),
                Outcome::Skipped(why) => println!("  skipped: {why}"),
            }
        }
        match &run.survey {
            Outcome::Ok(s) => println!("  survey: {} seeds, {} unclassified", s.entries.len(), s.unclassified),
            Outcome::Error(err) => println!("  survey failed: {}", err.message),
            Outcome::Skipped(why) => println!("  survey skipped: {why}"),
        }
    }
    let report = write_outputs(&cfg.output_dir, &out)?;
    println!("status {:?}, report at {}", out.report.status, report.display());
    Ok(())
}
