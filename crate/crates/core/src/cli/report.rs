//! The machine-readable run report.
//!
//! Every float is written with 17 significant digits so the file round-trips
//! exactly. Absent values are omitted rather than written as `null`, so a
//! `null` can only come from a NaN or infinity and makes serialization fail.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use super::config::FieldSpec;
use crate::analysis::{LimitObject, Pole, Stability};
use crate::error::{Error, Result};
use crate::flows::{CsvState, Tolerances, Trajectory};
use crate::reconstruct::WaveKind;

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub tool: ToolInfo,
    pub scenario: ScenarioEcho,
    pub status: RunStatus,
    pub error_count: usize,
    pub runs: Vec<EpsilonReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ToolInfo {
    pub name: &'static str,
    pub version: &'static str,
}

impl ToolInfo {
    pub fn current() -> Self {
        Self { name: env!("CARGO_PKG_NAME"), version: env!("CARGO_PKG_VERSION") }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Ok,
    Partial,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioEcho {
    pub x0_axis: [f64; 3],
    pub q_axis: [f64; 3],
    pub speed: f64,
    pub field: FieldSpec,
    pub epsilon_cap: f64,
    pub epsilons: Vec<f64>,
    pub seeds: usize,
    pub tolerances: TolerancesEcho,
}

#[derive(Debug, Clone, Serialize)]
pub struct TolerancesEcho {
    pub rtol: f64,
    pub atol: f64,
    pub chart_tol: f64,
    pub newton: f64,
    pub quadrature: f64,
    pub phi_min: f64,
    pub chart_delta: f64,
    pub max_step_divisions: f64,
    pub scan_points: usize,
}

impl From<&Tolerances> for TolerancesEcho {
    fn from(t: &Tolerances) -> Self {
        Self {
            rtol: t.rtol,
            atol: t.atol,
            chart_tol: t.chart_tol,
            newton: t.newton,
            quadrature: t.quadrature,
            phi_min: t.phi_min,
            chart_delta: t.chart_delta,
            max_step_divisions: t.max_step_divisions,
            scan_points: t.scan_points,
        }
    }
}

/// A failed stage, kept in the report in place of its result.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageError {
    pub stage: String,
    pub message: String,
}

/// A result, the error that replaced it, or the reason the stage did not run.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome<T> {
    Ok(T),
    Error(StageError),
    Skipped(String),
}

impl<T> Outcome<T> {
    pub fn ok(&self) -> Option<&T> {
        match self {
            Outcome::Ok(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_error(&self) -> bool {
        matches!(self, Outcome::Error(_))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EpsilonReport {
    pub epsilon: f64,
    /// Hex digest of the scenario inputs, shared with the trajectory files.
    pub scenario_hash: String,
    pub equilibria: Vec<Outcome<EquilibriumSummary>>,
    pub melnikov: MelnikovSummary,
    pub periodic_orbits: Vec<Outcome<OrbitSummary>>,
    pub rotating_waves: Vec<Outcome<WaveSummary>>,
    pub modulated_waves: Vec<Outcome<WaveSummary>>,
    pub survey: Outcome<SurveySummary>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ComplexNum {
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EquilibriumSummary {
    pub pole: Pole,
    pub location: [f64; 3],
    pub chart: [f64; 2],
    pub predicted_first_order: [f64; 2],
    pub trace_first_order: f64,
    pub eigenvalues: [ComplexNum; 2],
    pub stability: Stability,
    pub criterion: Stability,
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct RootSummary {
    pub phi0: f64,
    pub value: f64,
    pub derivative: f64,
    pub derivative_fd: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MelnikovSummary {
    pub scan_points: usize,
    pub first_order_degenerate: bool,
    pub coefficient_scale: f64,
    pub max_abs: f64,
    pub roots: Vec<RootSummary>,
    pub non_simple: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OrbitSummary {
    pub phi0: f64,
    pub fixed_phi: f64,
    pub fixed_point_residual: f64,
    pub period: f64,
    pub multiplier: f64,
    pub backward_derivative: f64,
    pub stability: Stability,
    pub integral_slope: f64,
    pub integral_slope_criterion_agrees: bool,
    pub iterations: usize,
    pub samples: CsvSummary,
}

#[derive(Debug, Clone, Serialize)]
pub struct WaveSummary {
    /// The equilibrium pole or periodic-orbit index the wave was lifted from.
    pub source: String,
    pub kind: WaveKind,
    pub base_rotation: [[f64; 3]; 3],
    pub frequency: f64,
    pub measured_frequency: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub relative_period: Option<f64>,
    pub residual_off_axis: f64,
    pub consistency_error: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub periodic_part: Option<CsvSummary>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SurveySummary {
    pub horizon: f64,
    pub counts: Vec<LimitCount>,
    pub unclassified: usize,
    pub entries: Vec<SurveyRow>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LimitCount {
    pub limit: LimitObject,
    pub seeds: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SurveyRow {
    pub seed: [f64; 3],
    pub final_point: [f64; 3],
    pub limit: LimitObject,
    pub distance: f64,
}

/// Where a trajectory was written and what it contains.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CsvSummary {
    /// File name inside the output directory.
    pub file: String,
    pub rows: usize,
    pub t_first: f64,
    pub t_last: f64,
    /// Mean of each state column (the time column excluded), in header order.
    pub column_means: Vec<f64>,
}

/// A CSV file waiting to be written.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub file: String,
    pub contents: String,
}

/// Renders a trajectory and summarizes it from the same values the file holds.
pub fn trajectory_artifact<S: Clone + CsvState>(file: String, traj: &Trajectory<S>) -> (Artifact, CsvSummary) {
    let contents = traj.to_csv();
    let summary = summarize_csv(&file, &contents).expect("freshly rendered CSV parses");
    (Artifact { file, contents }, summary)
}

/// Row count, time span and column means of a numeric CSV with a header line.
pub fn summarize_csv(file: &str, contents: &str) -> Result<CsvSummary> {
    let mut lines = contents.lines();
    let header = lines.next().ok_or_else(|| Error::InvalidInput(format!("{file}: empty CSV")))?;
    let width = header.split(',').count();
    let mut sums = vec![0.0; width.saturating_sub(1)];
    let (mut rows, mut t_first, mut t_last) = (0usize, f64::NAN, f64::NAN);
    for line in lines {
        let vals = line
            .split(',')
            .map(|v| v.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::InvalidInput(format!("{file}: row {}: {e}", rows + 1)))?;
        if vals.len() != width {
            return Err(Error::InvalidInput(format!("{file}: row {} has {} columns", rows + 1, vals.len())));
        }
        if rows == 0 {
            t_first = vals[0];
        }
        t_last = vals[0];
        for (s, v) in sums.iter_mut().zip(&vals[1..]) {
            *s += v;
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(Error::InvalidInput(format!("{file}: no rows")));
    }
    Ok(CsvSummary {
        file: file.to_string(),
        rows,
        t_first,
        t_last,
        column_means: sums.iter().map(|s| s / rows as f64).collect(),
    })
}

/// Pretty JSON whose floats carry 17 significant digits.
struct FixedPrecision<'a>(PrettyFormatter<'a>);

impl Formatter for FixedPrecision<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        if !value.is_finite() {
            return Err(io::Error::new(io::ErrorKind::InvalidData, format!("non-finite number {value} in report")));
        }
        write!(w, "{value:.16e}")
    }
    fn write_null<W: ?Sized + Write>(&mut self, _w: &mut W) -> io::Result<()> {
        // serde_json turns non-finite floats into null before they reach write_f64
        Err(io::Error::new(io::ErrorKind::InvalidData, "non-finite number in report"))
    }
    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Serializes with 17-digit floats; fails on NaN or infinity.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedPrecision(PrettyFormatter::new()));
    value.serialize(&mut ser).map_err(|e| Error::InvalidInput(format!("report serialization: {e}")))?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liegroup::UnitVector;
    use nalgebra::Vector3;

    #[test]
    fn floats_round_trip_exactly() {
        let vals = vec![0.1 + 0.2, 1.0, -3.5e-300, 6.02e23, 0.0];
        let text = to_json(&vals).unwrap();
        let back: Vec<f64> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, vals);
        assert!(text.contains("3.0000000000000004e-1"));
    }

    #[test]
    fn non_finite_is_rejected() {
        assert!(to_json(&vec![1.0, f64::NAN]).is_err());
        assert!(to_json(&ComplexNum { re: f64::INFINITY, im: 0.0 }).is_err());
    }

    #[test]
    fn csv_summary_matches_trajectory() {
        let mut tr = Trajectory::new(0);
        for k in 0..5 {
            let t = k as f64 * 0.1;
            tr.push(t, UnitVector::normalize(Vector3::new(t.cos(), t.sin(), 0.3)).unwrap());
        }
        let (art, sum) = trajectory_artifact("a.csv".into(), &tr);
        assert_eq!(sum.rows, 5);
        assert_eq!(sum.t_first, 0.0);
        assert_eq!(sum.t_last, 0.4);
        let mean_x: f64 = tr.states.iter().map(|s| s.coords()[0]).sum::<f64>() / 5.0;
        assert_eq!(sum.column_means[0], mean_x);
        assert_eq!(summarize_csv("a.csv", &art.contents).unwrap(), sum);
        assert!(summarize_csv("b.csv", "t,x\n1,oops\n").is_err());
    }
}
