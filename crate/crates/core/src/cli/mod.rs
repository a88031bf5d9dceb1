//! Command-line front end: scenario files in, reports and trajectories out.

mod config;
mod pipeline;
mod report;

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

pub use config::{FieldSpec, FieldTerm, ScenarioConfig};
pub use pipeline::{analyze, write_outputs, EpsilonTiming, RunOutput, Timings};
pub use report::{
    summarize_csv, to_json, AnalysisReport, Artifact, ComplexNum, CsvSummary, EpsilonReport, EquilibriumSummary,
    LimitCount, MelnikovSummary, OrbitSummary, Outcome, RootSummary, RunStatus, ScenarioEcho, StageError,
    SurveyRow, SurveySummary, ToolInfo, TolerancesEcho, WaveSummary,
};

use crate::analysis::melnikov_i;
use crate::error::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_PARTIAL: i32 = 2;

/// Environment variable capping the worker threads; 0 or unset means one per core.
pub const THREADS_ENV: &str = "SPHERE_FSB_THREADS";

/// Reads [`THREADS_ENV`].
pub fn thread_cap() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(0) => Ok(None),
            Ok(n) => Ok(Some(n)),
            Err(_) => Err(Error::Config(format!("{THREADS_ENV}: expected a non-negative integer, got {v:?}"))),
        },
    }
}

/// Installs the global worker pool according to [`THREADS_ENV`].
pub fn configure_threads() -> Result<()> {
    if let Some(n) = thread_cap()? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::Config(format!("{THREADS_ENV}: {e}")))?;
    }
    Ok(())
}

/// What `run` did.
#[derive(Debug)]
pub struct RunSummary {
    pub exit_code: i32,
    pub report_path: Option<std::path::PathBuf>,
    pub message: String,
}

fn config_failure(e: Error) -> RunSummary {
    RunSummary { exit_code: EXIT_CONFIG, report_path: None, message: e.to_string() }
}

/// Loads a scenario file, runs the full analysis and writes the outputs.
///
/// Exit code 0 on full success, 2 when some branch failed (its error is in
/// the report), 1 when the configuration is invalid or nothing could be written.
pub fn run_scenario(config_path: &Path) -> RunSummary {
    let cfg = match ScenarioConfig::load(config_path) {
        Ok(c) => c,
        Err(e) => return config_failure(e),
    };
    let out = match analyze(&cfg) {
        Ok(o) => o,
        Err(e) => return config_failure(e),
    };
    match write_outputs(&cfg.output_dir, &out) {
        Ok(path) => {
            let partial = out.report.status == RunStatus::Partial;
            RunSummary {
                exit_code: if partial { EXIT_PARTIAL } else { EXIT_OK },
                message: format!(
                    "wrote {} ({} error{} recorded)",
                    path.display(),
                    out.report.error_count,
                    if out.report.error_count == 1 { "" } else { "s" }
                ),
                report_path: Some(path),
            }
        }
        Err(e) => config_failure(e),
    }
}

/// `phi,I` at the `grid` interior points `k pi / (grid + 1)`.
pub fn melnikov_table(cfg: &ScenarioConfig, grid: usize) -> Result<String> {
    if grid == 0 {
        return Err(Error::Config("--grid: must be at least 1".into()));
    }
    let scn = cfg.scenario(cfg.epsilons[0])?;
    let mut out = String::from("phi,I\n");
    for k in 1..=grid {
        let phi = k as f64 * PI / (grid + 1) as f64;
        let _ = writeln!(out, "{phi:.16e},{:.16e}", melnikov_i(&scn, phi));
    }
    Ok(out)
}

/// Loads a scenario file and tabulates its persistence integral.
pub fn dump_melnikov(config_path: &Path, grid: usize) -> Result<String> {
    melnikov_table(&ScenarioConfig::load(config_path)?, grid)
}

pub fn version_string() -> String {
    format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(field: &str) -> ScenarioConfig {
        let text = format!(
            "[scenario]\nx0_axis = [0.0, 0.0, 1.0]\nq_axis = [0.0, 1.0, 0.0]\nepsilons = [0.01]\n\n[field]\nbuiltin = \"{field}\"\n"
        );
        ScenarioConfig::parse(&text, Path::new(".")).unwrap()
    }

    #[test]
    fn melnikov_table_matches_closed_form() {
        let table = melnikov_table(&cfg("equatorial_trap"), 4).unwrap();
        let rows: Vec<Vec<f64>> =
            table.lines().skip(1).map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
        assert_eq!(rows.len(), 4);
        for (k, r) in rows.iter().enumerate() {
            let phi = (k + 1) as f64 * PI / 5.0;
            assert_eq!(r[0], phi);
            assert!((r[1] - PI * phi.sin() * phi.cos()).abs() <= 1e-12);
        }
        let zero = melnikov_table(&cfg("zero"), 3).unwrap();
        assert!(zero.lines().skip(1).all(|l| l.ends_with(",0.0000000000000000e0")));
        assert!(matches!(melnikov_table(&cfg("zero"), 0), Err(Error::Config(_))));
    }

    #[test]
    fn bad_config_exits_with_one() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.toml");
        std::fs::write(
            &path,
            "[scenario]\nx0_axis = [0.0, 0.0, 1.0]\nq_axis = [0.0, 0.0, 0.0]\nepsilons = [0.01]\n\n[field]\nbuiltin = \"zero\"\n",
        )
        .unwrap();
        let r = run_scenario(&path);
        assert_eq!(r.exit_code, EXIT_CONFIG);
        assert!(r.message.contains("q_axis"), "{}", r.message);
        assert_eq!(run_scenario(&dir.path().join("missing.toml")).exit_code, EXIT_CONFIG);
    }
}
