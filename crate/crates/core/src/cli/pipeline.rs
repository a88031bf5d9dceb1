//! Full analysis of one scenario file.
//!
//! Each epsilon is analyzed independently (and in parallel); inside one
//! epsilon a failing branch is recorded and the remaining stages go on.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::config::ScenarioConfig;
use super::report::*;
use crate::analysis::{
    continue_periodic_orbit, find_equilibrium, limit_set_survey, melnikov_roots, survey_horizon, LimitObject,
    PeriodicOrbitBranch, Pole,
};
use crate::error::{Error, Result};
use crate::flows::Scenario;
use crate::reconstruct::{lift_equilibrium, lift_periodic, WaveReconstruction};

/// Everything a run produces, before anything touches the disk.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: AnalysisReport,
    pub artifacts: Vec<Artifact>,
    pub timings: Timings,
}

/// Wall-clock seconds per epsilon; kept apart from the report so the report stays reproducible.
#[derive(Debug, Clone, Serialize)]
pub struct Timings {
    pub total_seconds: f64,
    pub per_epsilon: Vec<EpsilonTiming>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EpsilonTiming {
    pub epsilon: f64,
    pub seconds: f64,
}

fn stage_error(stage: impl Into<String>, err: &Error) -> StageError {
    StageError { stage: stage.into(), message: err.to_string() }
}

fn outcome<T>(stage: impl Into<String>, r: Result<T>) -> Outcome<T> {
    match r {
        Ok(v) => Outcome::Ok(v),
        Err(e) => Outcome::Error(stage_error(stage, &e)),
    }
}

fn pole_name(p: Pole) -> &'static str {
    match p {
        Pole::North => "north",
        Pole::South => "south",
    }
}

fn wave_summary(source: String, w: &WaveReconstruction, periodic_part: Option<CsvSummary>) -> WaveSummary {
    let m = w.base_rotation.matrix();
    WaveSummary {
        source,
        kind: w.kind,
        base_rotation: [0, 1, 2].map(|i| [0, 1, 2].map(|j| m[(i, j)])),
        frequency: w.frequency,
        measured_frequency: w.measured_frequency,
        relative_period: w.relative_period,
        residual_off_axis: w.residual_off_axis,
        consistency_error: w.consistency_error,
        periodic_part,
    }
}

fn analyze_epsilon(cfg: &ScenarioConfig, index: usize, eps: f64) -> Result<(EpsilonReport, Vec<Artifact>)> {
    let scn: Scenario = cfg.scenario(eps)?;
    let prefix = format!("eps{index:02}");
    let mut artifacts = Vec::new();

    let eq_results: Vec<_> = [Pole::North, Pole::South].map(|p| (p, find_equilibrium(&scn, p))).into();
    let equilibria: Vec<Outcome<EquilibriumSummary>> = eq_results
        .iter()
        .map(|(p, r)| match r {
            Ok(b) => Outcome::Ok(EquilibriumSummary {
                pole: b.pole,
                location: (*b.location.coords()).into(),
                chart: b.chart,
                predicted_first_order: b.predicted_first_order,
                trace_first_order: b.trace_first_order,
                eigenvalues: b.eigenvalues.map(|z| ComplexNum { re: z.re, im: z.im }),
                stability: b.stability,
                criterion: b.criterion,
                residual: b.residual,
                iterations: b.iterations,
            }),
            Err(e) => Outcome::Error(stage_error(format!("equilibrium/{}", pole_name(*p)), e)),
        })
        .collect();
    let eq_ok: Vec<_> = eq_results.iter().filter_map(|(_, r)| r.as_ref().ok().cloned()).collect();

    let profile = melnikov_roots(&scn);
    let melnikov = MelnikovSummary {
        scan_points: profile.phis.len(),
        first_order_degenerate: profile.degenerate,
        coefficient_scale: profile.scale,
        max_abs: profile.values.iter().fold(0.0, |m, v| m.max(v.abs())),
        roots: profile
            .roots
            .iter()
            .map(|r| RootSummary { phi0: r.phi0, value: r.value, derivative: r.derivative, derivative_fd: r.derivative_fd })
            .collect(),
        non_simple: profile.non_simple.clone(),
    };

    let mut orbits_ok: Vec<(usize, PeriodicOrbitBranch)> = Vec::new();
    let mut periodic_orbits = Vec::new();
    for (j, root) in profile.roots.iter().enumerate() {
        match continue_periodic_orbit(&scn, root.phi0) {
            Ok(o) => {
                let (art, samples) = trajectory_artifact(format!("{prefix}_orbit{j}_sphere.csv"), &o.orbit_samples);
                artifacts.push(art);
                periodic_orbits.push(Outcome::Ok(OrbitSummary {
                    phi0: o.phi0,
                    fixed_phi: o.fixed_phi,
                    fixed_point_residual: o.fixed_point_residual,
                    period: o.period_physical,
                    multiplier: o.multiplier,
                    backward_derivative: o.backward_derivative,
                    stability: o.stability,
                    integral_slope: o.integral_slope,
                    integral_slope_criterion_agrees: o.slope_criterion_agrees,
                    iterations: o.iterations,
                    samples,
                }));
                orbits_ok.push((j, o));
            }
            Err(e) => periodic_orbits.push(Outcome::Error(stage_error(format!("periodic_orbit/{j}"), &e))),
        }
    }

    let rotating_waves = eq_ok
        .iter()
        .map(|b| {
            let name = pole_name(b.pole);
            outcome(format!("rotating_wave/{name}"), lift_equilibrium(&scn, b).map(|w| wave_summary(name.into(), &w, None)))
        })
        .collect();
    let mut modulated_waves = Vec::new();
    for (j, o) in &orbits_ok {
        match lift_periodic(&scn, o) {
            Ok(w) => {
                let part = w.periodic_part_samples.as_ref().map(|tr| {
                    let (art, sum) = trajectory_artifact(format!("{prefix}_orbit{j}_periodic_part.csv"), tr);
                    artifacts.push(art);
                    sum
                });
                modulated_waves.push(Outcome::Ok(wave_summary(format!("orbit{j}"), &w, part)));
            }
            Err(e) => modulated_waves.push(Outcome::Error(stage_error(format!("modulated_wave/orbit{j}"), &e))),
        }
    }

    let survey = if cfg.seeds == 0 {
        Outcome::Skipped("seeds = 0".into())
    } else if eps == 0.0 {
        Outcome::Skipped("eps = 0 has no limit sets".into())
    } else {
        let orbit_list: Vec<_> = orbits_ok.iter().map(|(_, o)| o.clone()).collect();
        outcome(
            "survey",
            limit_set_survey(&scn, &eq_ok, &orbit_list, profile.degenerate, cfg.seeds).map(|entries| {
                // orbit indices in the survey refer to the successful orbits; map them back to root indices
                let relabel = |l: LimitObject| match l {
                    LimitObject::PeriodicOrbit { index } => LimitObject::PeriodicOrbit { index: orbits_ok[index].0 },
                    other => other,
                };
                let mut counts: BTreeMap<String, (LimitObject, usize)> = BTreeMap::new();
                let rows: Vec<SurveyRow> = entries
                    .iter()
                    .map(|e| {
                        let limit = relabel(e.limit);
                        let key = serde_json::to_string(&limit).expect("limit tags serialize");
                        counts.entry(key).or_insert((limit, 0)).1 += 1;
                        SurveyRow {
                            seed: (*e.seed.coords()).into(),
                            final_point: (*e.final_point.coords()).into(),
                            limit,
                            distance: if e.distance.is_finite() { e.distance } else { -1.0 },
                        }
                    })
                    .collect();
                SurveySummary {
                    horizon: survey_horizon(&scn),
                    unclassified: rows.iter().filter(|r| r.limit == LimitObject::Unclassified).count(),
                    counts: counts.into_values().map(|(limit, seeds)| LimitCount { limit, seeds }).collect(),
                    entries: rows,
                }
            }),
        )
    };

    let report = EpsilonReport {
        epsilon: eps,
        scenario_hash: format!("{:016x}", scn.hash()),
        equilibria,
        melnikov,
        periodic_orbits,
        rotating_waves,
        modulated_waves,
        survey,
    };
    Ok((report, artifacts))
}

fn count_errors(r: &EpsilonReport) -> usize {
    fn n<T>(v: &[Outcome<T>]) -> usize {
        v.iter().filter(|o| o.is_error()).count()
    }
    n(&r.equilibria) + n(&r.periodic_orbits) + n(&r.rotating_waves) + n(&r.modulated_waves) + r.survey.is_error() as usize
}

/// Runs every stage for every epsilon. Only configuration problems are errors;
/// analysis failures are recorded in the report.
pub fn analyze(cfg: &ScenarioConfig) -> Result<RunOutput> {
    let start = Instant::now();
    // the base scenario validates the axes once, before any fan-out
    let base = cfg.scenario(0.0)?;
    let results: Vec<_> = cfg
        .epsilons
        .par_iter()
        .enumerate()
        .map(|(i, &eps)| {
            let t = Instant::now();
            analyze_epsilon(cfg, i, eps).map(|r| (r, EpsilonTiming { epsilon: eps, seconds: t.elapsed().as_secs_f64() }))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut runs = Vec::with_capacity(results.len());
    let mut artifacts = Vec::new();
    let mut per_epsilon = Vec::new();
    for ((report, arts), timing) in results {
        runs.push(report);
        artifacts.extend(arts);
        per_epsilon.push(timing);
    }
    let error_count: usize = runs.iter().map(count_errors).sum();
    let report = AnalysisReport {
        tool: ToolInfo::current(),
        scenario: ScenarioEcho {
            x0_axis: cfg.x0_axis.into(),
            q_axis: cfg.q_axis.into(),
            speed: base.speed(),
            field: cfg.field_spec.clone(),
            epsilon_cap: cfg.field.epsilon_cap(),
            epsilons: cfg.epsilons.clone(),
            seeds: cfg.seeds,
            tolerances: (&cfg.tolerances).into(),
        },
        status: if error_count == 0 { RunStatus::Ok } else { RunStatus::Partial },
        error_count,
        runs,
    };
    Ok(RunOutput { report, artifacts, timings: Timings { total_seconds: start.elapsed().as_secs_f64(), per_epsilon } })
}

/// Writes `report.json`, `timings.json` and every trajectory CSV into `dir`.
pub fn write_outputs(dir: &Path, out: &RunOutput) -> Result<PathBuf> {
    let report = to_json(&out.report)?;
    let timings = to_json(&out.timings)?;
    std::fs::create_dir_all(dir)?;
    for a in &out.artifacts {
        std::fs::write(dir.join(&a.file), &a.contents)?;
    }
    std::fs::write(dir.join("timings.json"), timings)?;
    let path = dir.join("report.json");
    std::fs::write(&path, report)?;
    Ok(path)
}
